//! Brute-force and greedy search of the exponents of a one-layer stack
//! on a few short synthetic quartets.
//!
//! cargo run --release --example grid_search

use mlc::dataset::SyntheticQuartet;
use mlc::search::{brute_force, greedy, linear_grid, summary_row, Evaluator, SearchSpace};
use mlc::MlcConfig;

fn main() -> mlc::Result<()> {
    let template = MlcConfig::standard(44100.0, vec![1.0, 1.0]);
    let pieces = (0..3)
        .map(|seed| SyntheticQuartet { duration_s: 4.0, seed, ..Default::default() }.piece(&template.window))
        .collect::<mlc::Result<Vec<_>>>()?;
    let evaluator = Evaluator::new(&template, 0.1, &pieces)?;

    let brute = brute_force(&SearchSpace::brute_force(1), &evaluator)?;
    println!("{}", summary_row("brute", &brute.best.gammas, &brute.best.scores));

    let space = SearchSpace::new(vec![linear_grid(0.05, 0.95, 0.05), vec![1.0]])?;
    let greedy = greedy(&space, &evaluator)?;
    for step in &greedy.trace {
        println!("{}", summary_row("greedy", &step.best.gammas, &step.best.scores));
        for p in step.scanned.iter().step_by(3) {
            println!("    gamma_{} = {:.2}  F {:.2}", step.layer, p.gammas[step.layer], 100.0 * p.scores.f_score);
        }
    }
    Ok(())
}
