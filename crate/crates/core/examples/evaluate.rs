//! Estimates a piano roll for a synthetic quartet and scores it frame by
//! frame against the rendered notes.
//!
//! cargo run --release --example evaluate [-- <depth 1..6>]

use mlc::dataset::SyntheticQuartet;
use mlc::eval::{evaluate, DEFAULT_THRESHOLD_RATIO};
use mlc::pipeline::estimate;
use mlc::MlcConfig;

const BEST: [&[f64]; 6] = [
    &[0.3, 1.0],
    &[0.3, 0.5, 1.0],
    &[0.2, 0.6, 0.9, 1.0],
    &[0.1, 0.9, 0.9, 0.5, 1.0],
    &[0.1, 0.9, 0.9, 0.7, 0.8, 1.0],
    &[0.1, 0.9, 0.9, 0.7, 0.8, 0.5, 1.0],
];

fn main() -> mlc::Result<()> {
    let depth: usize = std::env::args().nth(1).map_or(1, |d| d.parse().expect("depth 1..6"));
    let quartet = SyntheticQuartet { duration_s: 10.0, ..Default::default() };
    let config = MlcConfig::standard(quartet.sample_rate, BEST[depth - 1].to_vec());
    let piece = quartet.piece(&config.window)?;
    let (roll, offset) = estimate(&piece.signal, &config, DEFAULT_THRESHOLD_RATIO)?;
    let counts = evaluate(&roll, &piece.truth)?;
    println!("depth {depth}, gammas {:?}", config.gammas);
    println!("tp {}  fp {}  fn {}", counts.tp, counts.fp, counts.fn_);
    println!("{}", counts.scores());
    let mut head = Vec::new();
    roll.slice(0, 5).write_text(&mut head, offset)?;
    print!("first frames:\n{}", String::from_utf8_lossy(&head));
    Ok(())
}
