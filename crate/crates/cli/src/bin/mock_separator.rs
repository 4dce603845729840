//! Stand-in for a two-stem separator: the whole input becomes the vocal stem
//! and the accompaniment is silence of the same length.
//!
//! Usage: `singit-mock-separator <input> <outdir> [--fail]`

use std::path::PathBuf;
use std::process::ExitCode;

use singit_core::data::{load_audio, write_wav, ACCOMPANIMENT_STEM, VOCALS_STEM};
use singit_core::Waveform;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--fail") {
        eprintln!("mock separator: failing on request");
        return ExitCode::FAILURE;
    }
    let [input, outdir] = args.as_slice() else {
        eprintln!("usage: singit-mock-separator <input> <outdir> [--fail]");
        return ExitCode::from(2);
    };
    let outdir = PathBuf::from(outdir);
    let run = || -> singit_core::Result<()> {
        let song = load_audio(input.as_ref())?;
        write_wav(&outdir.join(VOCALS_STEM), &song)?;
        write_wav(&outdir.join(ACCOMPANIMENT_STEM), &Waveform::zeros(song.len(), song.sample_rate()))
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mock separator: {e}");
            ExitCode::FAILURE
        }
    }
}
