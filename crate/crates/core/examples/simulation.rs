//! Two-source simulation: a low-passed 2 Hz square wave plus a high-passed
//! FM sawtooth whose fundamental is filtered away, analyzed with a
//! two-layer stack. Prints the two strongest fused peaks in 1-4 Hz per
//! frame next to the true fundamentals.
//!
//! cargo run --release --example simulation [-- <cutoff_hz|none> <cutoff_s|none>]

use mlc::degrade::{simulation_f0_law, SimulationRecipe};
use mlc::pipeline::analyze;
use mlc::{MlcConfig, TimeSeries, WindowKind, WindowSpec};

fn top_two_peaks(column: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let mut peaks: Vec<usize> =
        (lo..=hi).filter(|&k| column[k] > column[k - 1] && column[k] >= column[k + 1] && column[k] > 0.0).collect();
    peaks.sort_by(|&a, &b| column[b].total_cmp(&column[a]));
    peaks.truncate(2);
    peaks
}

fn run(name: &str, x: &TimeSeries, config: &MlcConfig) -> mlc::Result<()> {
    let fs = x.sample_rate();
    let analysis = analyze(x, config)?;
    let y = analysis.cfp.spectrogram();
    let step = y.bin_step();
    let law = simulation_f0_law(fs);
    let (lo, hi) = ((1.0 / step).ceil() as usize, (4.0 / step).floor() as usize);
    let frames = y.frames();
    let mut hits = 0;
    println!("{name}: {frames} frames, bin step {step} Hz");
    for n in 1..frames - 1 {
        let center = n * config.window.hop + (config.window.window_length - 1) / 2;
        let truth = [2.0, law(center)];
        let peaks = top_two_peaks(y.column(n), lo, hi);
        let found: Vec<f64> = peaks.iter().map(|&k| k as f64 * step).collect();
        let ok = truth.iter().all(|t| found.iter().any(|f| (f - t).abs() <= step + 1e-9));
        hits += usize::from(ok);
        println!("  t = {:5.1} s  truth {:.3} {:.3}  peaks {:?}  {}", center as f64 / fs, truth[0], truth[1], found, if ok { "ok" } else { "miss" });
    }
    println!("{name}: {hits}/{} interior frames resolved ({:.1} %)", frames - 2, 100.0 * hits as f64 / (frames - 2) as f64);
    Ok(())
}

fn parse(arg: Option<String>, default: Option<f64>) -> Option<f64> {
    match arg.as_deref() {
        None => default,
        Some("none") => None,
        Some(v) => Some(v.parse().expect("number or `none`")),
    }
}

fn main() -> mlc::Result<()> {
    let mut args = std::env::args().skip(1);
    let cutoff_hz = parse(args.next(), Some(0.5));
    let cutoff_s = parse(args.next(), Some(0.05));
    let recipe = SimulationRecipe::default();
    let sim = recipe.build()?;
    let fs = recipe.sample_rate;
    let config = MlcConfig {
        window: WindowSpec::new(WindowKind::BlackmanHarris, (8.0 * fs) as usize, fs as usize),
        gammas: vec![0.24, 0.6, 1.0],
        cutoff_frequency_hz: cutoff_hz,
        cutoff_quefrency_s: cutoff_s,
    };
    run("clean", &sim.clean, &config)?;
    run("noisy", &sim.noisy, &config)?;
    Ok(())
}
