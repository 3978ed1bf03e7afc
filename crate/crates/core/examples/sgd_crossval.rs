//! Cross-validated SGD of the exponents and a per-band sigmoid output
//! layer on short synthetic quartets.
//!
//! cargo run --release --example sgd_crossval

use mlc::dataset::SyntheticQuartet;
use mlc::search::{sgd_train, SgdConfig};
use mlc::MlcConfig;

fn main() -> mlc::Result<()> {
    let template = MlcConfig::standard(22050.0, vec![1.0, 1.0]);
    let pieces = (0..5)
        .map(|seed| {
            SyntheticQuartet { sample_rate: 22050.0, duration_s: 2.0, seed, ..Default::default() }.piece(&template.window)
        })
        .collect::<mlc::Result<Vec<_>>>()?;
    let config = SgdConfig { folds: 5, max_epochs: 5, batch_size: 64, learning_rate: 1.0, ..SgdConfig::new(1) };
    let out = sgd_train(&config, &template, &pieces)?;
    for (i, fold) in out.folds.iter().enumerate() {
        println!(
            "fold {i} ({}): gammas {:.3?}, loss {:.4} -> {:.4}, {}",
            fold.test_pieces.join(","),
            fold.model.gammas,
            fold.epoch_losses[0],
            fold.epoch_losses[fold.epoch_losses.len() - 1],
            fold.counts.scores()
        );
    }
    println!("pooled: {}", out.scores);
    Ok(())
}
