//! Layer-by-layer view of a C major triad with the fundamentals removed:
//! the strongest bin of every layer, then the pitches that survive fusion.
//!
//! cargo run --release --example layer_stack

use mlc::cfp::{midi_to_hz, LOWEST_MIDI};
use mlc::degrade::{butterworth_apply, ButterworthSpec};
use mlc::eval::pick_frame;
use mlc::pipeline::analyze;
use mlc::signal::Axis;
use mlc::{MlcConfig, TimeSeries};

fn main() -> mlc::Result<()> {
    let fs = 44100.0;
    let chord = [60.0, 64.0, 67.0];
    let samples: Vec<f64> = (0..(fs as usize))
        .map(|n| {
            let t = n as f64 / fs;
            chord
                .iter()
                .flat_map(|&m| (1..=12).map(move |h| (h, midi_to_hz(m))))
                .map(|(h, f0)| (2.0 * std::f64::consts::PI * h as f64 * f0 * t).sin() / h as f64)
                .sum()
        })
        .collect();
    // a steep high-pass at 400 Hz removes every fundamental
    let x = butterworth_apply(&TimeSeries::new(samples, fs)?, &ButterworthSpec::highpass(8, 400.0))?;

    let config = MlcConfig::standard(fs, vec![0.2, 0.6, 0.9, 1.0]);
    let analysis = analyze(&x, &config)?;
    let frame = analysis.salience.frames() / 2;
    for (l, layer) in analysis.stack.layers().iter().enumerate() {
        let column = layer.column(frame);
        let half = &column[1..column.len() / 2];
        let k = 1 + (0..half.len()).fold(0, |best, i| if half[i] > half[best] { i } else { best });
        match layer.axis() {
            Axis::Frequency => println!("Z{l}: strongest bin {k} at {:.1} Hz", layer.bin_coordinate(k)),
            Axis::Quefrency => println!(
                "Z{l}: strongest bin {k} at {:.2} ms ({:.1} Hz)",
                1e3 * layer.bin_coordinate(k),
                1.0 / layer.bin_coordinate(k)
            ),
        }
    }
    let (le, lo) = analysis.cfp.source_layers();
    let active = pick_frame(analysis.salience.frame(frame), 0.1);
    let pitches: Vec<u8> = (0..active.len()).filter(|&b| active[b]).map(|b| LOWEST_MIDI + b as u8).collect();
    println!("fused Z{le} x Z{lo}: active MIDI pitches {pitches:?} (played {chord:?})");
    Ok(())
}
