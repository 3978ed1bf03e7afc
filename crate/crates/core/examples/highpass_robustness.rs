//! Frame-level F-score of shallow and deep stacks on a synthetic quartet
//! as a 4th-order Butterworth high-pass removes more and more of the low
//! spectrum.
//!
//! cargo run --release --example highpass_robustness [-- <wav dir with X.txt annotations>]

use std::path::PathBuf;

use mlc::dataset::{load_dataset, Piece, SyntheticQuartet};
use mlc::degrade::{ButterworthSpec, DegradeSpec};
use mlc::eval::{evaluate, AnnotationUnits, EvalCounts, DEFAULT_THRESHOLD_RATIO};
use mlc::pipeline::estimate;
use mlc::MlcConfig;
use rayon::prelude::*;

const CONFIGS: &[(&str, &[f64])] = &[
    ("Z0 & Z1", &[0.3, 1.0]),
    ("Z1 & Z2", &[0.3, 0.5, 1.0]),
    ("Z2 & Z3", &[0.2, 0.6, 0.9, 1.0]),
    ("Z5 & Z6", &[0.1, 0.9, 0.9, 0.7, 0.8, 0.5, 1.0]),
];

fn f_score(pieces: &[Piece], config: &MlcConfig) -> mlc::Result<f64> {
    let counts: EvalCounts = pieces
        .par_iter()
        .map(|p| {
            let (roll, _) = estimate(&p.signal, config, DEFAULT_THRESHOLD_RATIO)?;
            evaluate(&roll, &p.truth)
        })
        .sum::<mlc::Result<EvalCounts>>()?;
    Ok(100.0 * counts.scores().f_score)
}

fn main() -> mlc::Result<()> {
    let fs = 44100.0;
    let template = MlcConfig::standard(fs, vec![1.0, 1.0]);
    let pieces = match std::env::args().nth(1) {
        Some(dir) => load_dataset(&PathBuf::from(dir), &template.window, AnnotationUnits::Hz)?,
        None => vec![SyntheticQuartet::default().piece(&template.window)?],
    };
    print!("{:>10}", "cutoff Hz");
    for (name, _) in CONFIGS {
        print!("{name:>10}");
    }
    println!();
    for cutoff in [None, Some(10.0), Some(100.0), Some(300.0), Some(1000.0)] {
        let degraded: Vec<Piece> = match cutoff {
            None => pieces.clone(),
            Some(hz) => {
                let spec = DegradeSpec { filter: Some(ButterworthSpec::highpass(4, hz)), ..Default::default() };
                pieces.iter().map(|p| p.degraded(&spec)).collect::<mlc::Result<_>>()?
            }
        };
        print!("{:>10}", cutoff.map_or("none".to_string(), |c| c.to_string()));
        for (_, gammas) in CONFIGS {
            print!("{:>10.2}", f_score(&degraded, &template.with_gammas(gammas.to_vec()))?);
        }
        println!();
    }
    Ok(())
}
