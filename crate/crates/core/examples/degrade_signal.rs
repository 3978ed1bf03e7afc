//! Contaminates a WAV file (or a generated tone) with a Butterworth filter,
//! pink noise and an impulse, and writes the result.
//!
//! cargo run --release --example degrade_signal [-- in.wav out.wav]

use std::path::PathBuf;

use mlc::degrade::{degrade, gen_fm_sawtooth, ButterworthSpec, DegradeSpec, ImpulseSpec, SosFilter};
use mlc::io::{read_wav, write_wav, WavFormat};

fn main() -> mlc::Result<()> {
    let mut args = std::env::args().skip(1);
    let x = match args.next() {
        Some(path) => read_wav(&PathBuf::from(path))?,
        None => gen_fm_sawtooth(|_| 110.0, 16000.0, 3.0)?,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "degraded.wav".into()));
    let fs = x.sample_rate();

    let filter = ButterworthSpec::highpass(4, 500.0);
    let sos = SosFilter::butterworth(&filter, fs)?;
    println!("4th-order high-pass at 500 Hz:");
    for f in [100.0, 250.0, 500.0, 1000.0, 2000.0] {
        println!("  {f:>6} Hz  {:>7.2} dB", 20.0 * sos.magnitude_at(f, fs).log10());
    }

    let spec = DegradeSpec {
        filter: Some(filter),
        pink_snr_db: Some(10.0),
        impulse: Some(ImpulseSpec { at_seconds: x.duration() / 2.0, amplitude: None }),
        seed: 7,
    };
    let y = degrade(&x, &spec)?;
    println!("input peak {:.3}, output peak {:.3}", x.peak(), y.peak());
    write_wav(&out, &y.map(|v| v / y.peak())?, WavFormat::Pcm16)?;
    println!("wrote {}", out.display());
    Ok(())
}
