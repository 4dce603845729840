//! Mean opinion score summaries with Student-t confidence intervals.

use std::fmt;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const MIN_RATING: i64 = 1;
pub const MAX_RATING: i64 = 5;
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyStats {
    pub n: usize,
    pub mean: f64,
    /// Half-width of the two-sided 95% t-interval.
    pub half_width: f64,
    /// Set for a single rating, where no interval exists and zero is reported.
    pub degenerate: bool,
}

impl fmt::Display for SurveyStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}±{:.3}", self.mean, self.half_width)
    }
}

/// Two-sided `(1 + CONFIDENCE) / 2` quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile(dof: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Validation(e.to_string()))?;
    Ok(dist.inverse_cdf(0.5 + CONFIDENCE / 2.0))
}

pub fn survey_stats(ratings: &[i64]) -> Result<SurveyStats> {
    if ratings.is_empty() {
        return Err(Error::Validation("no ratings".into()));
    }
    if let Some(r) = ratings.iter().find(|r| !(MIN_RATING..=MAX_RATING).contains(*r)) {
        return Err(Error::Validation(format!(
            "rating {r} outside {MIN_RATING}..={MAX_RATING}"
        )));
    }
    let n = ratings.len();
    let mean = ratings.iter().sum::<i64>() as f64 / n as f64;
    if n == 1 {
        return Ok(SurveyStats {
            n,
            mean,
            half_width: 0.0,
            degenerate: true,
        });
    }
    let ss: f64 = ratings.iter().map(|r| (*r as f64 - mean).powi(2)).sum();
    let s = (ss / (n - 1) as f64).sqrt();
    let half_width = if s == 0.0 {
        0.0
    } else {
        t_quantile((n - 1) as f64)? * s / (n as f64).sqrt()
    };
    Ok(SurveyStats {
        n,
        mean,
        half_width,
        degenerate: false,
    })
}

/// Parses one integer rating per non-empty line.
pub fn parse_ratings(text: &str) -> Result<Vec<i64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<i64>()
                .map_err(|_| Error::Validation(format!("rating {} is not an integer: {l:?}", i + 1)))
        })
        .collect()
}
