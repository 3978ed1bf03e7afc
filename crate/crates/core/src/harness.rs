//! The six CLI commands as library functions. Each writes into
//! `config.output_dir` and returns the paths it created.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::dataset::{load_dataset, Piece};
use crate::degrade::degrade;
use crate::error::{Error, Result};
use crate::eval::{evaluate, Annotation, EvalCounts, Scores};
use crate::io::{read_wav, write_salience_csv, write_spectrogram_csv, write_wav};
use crate::pipeline::{analyze, estimate};
use crate::search::{brute_force, greedy, sgd_train, summary_row, write_table_csv, Evaluator, SearchOutcome, SgdOutcome};
use crate::signal::{Axis, Spectrogram};

fn output_dir(config: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&config.output_dir)?;
    Ok(&config.output_dir)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}

/// Writes the resolved configuration next to the outputs.
fn record_config(config: &RunConfig) -> Result<PathBuf> {
    let path = output_dir(config)?.join("run.conf");
    std::fs::write(&path, config.to_text())?;
    Ok(path)
}

/// Simulation sources and mixtures: `x1.wav` (filtered square), `x2.wav`
/// (filtered sawtooth), `x.wav` (their sum) and `x_noisy.wav`.
pub fn cmd_synth(config: &RunConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let sim = config.recipe().build()?;
    let dir = output_dir(config)?;
    let mut paths = Vec::new();
    for (name, signal) in [("x1", &sim.square), ("x2", &sim.sawtooth), ("x", &sim.clean), ("x_noisy", &sim.noisy)] {
        let path = dir.join(format!("{name}.wav"));
        write_wav(&path, signal, config.wav_format)?;
        paths.push(path);
    }
    paths.push(record_config(config)?);
    Ok(paths)
}

/// Applies the configured degradation chain to each input; outputs are
/// named `<stem>_degraded.wav`.
pub fn cmd_degrade(config: &RunConfig, inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let dir = output_dir(config)?;
    let spec = config.degrade_spec();
    let mut paths: Vec<PathBuf> = inputs
        .par_iter()
        .map(|input| {
            let y = degrade(&read_wav(input)?, &spec)?;
            let path = dir.join(format!("{}_degraded.wav", stem(input)));
            write_wav(&path, &y, config.wav_format)?;
            Ok(path)
        })
        .collect::<Result<_>>()?;
    paths.push(record_config(config)?);
    Ok(paths)
}

/// One CSV per layer (`<stem>_z<l>.csv`), the fused representation
/// (`<stem>_y.csv`) and band salience (`<stem>_salience.csv`).
pub fn cmd_analyze(config: &RunConfig, input: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let x = read_wav(input)?;
    let mlc = config.mlc_config(x.sample_rate())?;
    let analysis = analyze(&x, &mlc)?;
    let dir = output_dir(config)?;
    let name = stem(input);
    let offset = analysis.frame_offset_seconds;
    let mut jobs: Vec<(PathBuf, &Spectrogram)> = analysis
        .stack
        .layers()
        .iter()
        .enumerate()
        .map(|(l, s)| (dir.join(format!("{name}_z{l}.csv")), s))
        .collect();
    jobs.push((dir.join(format!("{name}_y.csv")), analysis.cfp.spectrogram()));
    jobs.par_iter().try_for_each(|(path, s)| {
        // quefrency layers are always written whole
        let max_bin = config
            .dump_max_hz
            .filter(|_| s.axis() == Axis::Frequency)
            .map(|hz| (hz / s.bin_step()).floor() as usize);
        write_spectrogram_csv(create(path)?, s, offset, max_bin)
    })?;
    let salience_path = dir.join(format!("{name}_salience.csv"));
    write_salience_csv(create(&salience_path)?, &analysis.salience, offset)?;
    let mut paths: Vec<PathBuf> = jobs.into_iter().map(|(p, _)| p).collect();
    paths.push(salience_path);
    Ok(paths)
}

/// Piano-roll text (`time f1 f2 ...` per frame) for each input, as
/// `<stem>.txt`.
pub fn cmd_estimate(config: &RunConfig, inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let dir = output_dir(config)?;
    inputs
        .par_iter()
        .map(|input| {
            let x = read_wav(input)?;
            let (roll, offset) = estimate(&x, &config.mlc_config(x.sample_rate())?, config.threshold_ratio)?;
            let path = dir.join(format!("{}.txt", stem(input)));
            roll.write_text(create(&path)?, offset)?;
            Ok(path)
        })
        .collect()
}

/// Frame grid implied by an annotation: first time, median spacing, count.
fn grid_of(annotation: &Annotation) -> (f64, f64, usize) {
    let times = annotation.times();
    let hop = match annotation.spacing() {
        h if h > 0.0 => h,
        _ => 1.0,
    };
    (times[0], hop, times.len())
}

/// Scores `predictions` against `truth`, both in annotation format. The
/// prediction file's frame times define the grid; the truth is resampled
/// onto it. Writes `counts.csv`.
pub fn cmd_eval(config: &RunConfig, predictions: &Path, truth: &Path) -> Result<(EvalCounts, Scores)> {
    let pred = Annotation::read(predictions, crate::eval::AnnotationUnits::Hz)?;
    let gt = Annotation::read(truth, config.annotation_units)?;
    let (offset, hop, frames) = grid_of(&pred);
    let pred_roll = pred.to_piano_roll(hop, offset, frames)?;
    let truth_roll = gt.to_piano_roll(hop, offset, frames)?;
    if truth_roll.dropped > 0 {
        log::warn!("{} ground-truth pitches outside the piano range were ignored", truth_roll.dropped);
    }
    let counts = evaluate(&pred_roll.roll, &truth_roll.roll)?;
    let scores = counts.scores();
    let dir = output_dir(config)?;
    let mut w = csv::Writer::from_writer(create(&dir.join("counts.csv"))?);
    w.write_record(["tp", "fp", "fn", "precision", "recall", "f_score"])?;
    w.write_record([
        counts.tp.to_string(),
        counts.fp.to_string(),
        counts.fn_.to_string(),
        format!("{:.4}", 100.0 * scores.precision),
        format!("{:.4}", 100.0 * scores.recall),
        format!("{:.4}", 100.0 * scores.f_score),
    ])?;
    w.flush()?;
    Ok((counts, scores))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Brute,
    Greedy,
    Sgd,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "brute" => Ok(SearchMode::Brute),
            "greedy" => Ok(SearchMode::Greedy),
            "sgd" => Ok(SearchMode::Sgd),
            other => Err(Error::invalid(format!("unknown search mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum SearchReport {
    Grid(SearchOutcome),
    Sgd(SgdOutcome),
}

impl SearchReport {
    /// Summary block: one row per layer pair (greedy) or the single best
    /// row (brute), or per-fold rows plus the pooled row (SGD).
    pub fn summary(&self, mode: SearchMode) -> String {
        let mut lines = vec![format!("{:<12} {:<10} gammas", "method", "layers")];
        match self {
            SearchReport::Grid(out) if mode == SearchMode::Greedy => {
                for step in &out.trace {
                    lines.push(summary_row("greedy", &step.best.gammas, &step.best.scores));
                }
            }
            SearchReport::Grid(out) => lines.push(summary_row("brute", &out.best.gammas, &out.best.scores)),
            SearchReport::Sgd(out) => {
                for (i, f) in out.folds.iter().enumerate() {
                    lines.push(summary_row(&format!("sgd-fold{i}"), &f.model.gammas, &f.counts.scores()));
                }
                let depth = out.folds[0].model.gammas.len();
                let mean: Vec<f64> = (0..depth)
                    .map(|l| out.folds.iter().map(|f| f.model.gammas[l]).sum::<f64>() / out.folds.len() as f64)
                    .collect();
                lines.push(summary_row("sgd-pooled", &mean, &out.scores));
            }
        }
        lines.join("\n") + "\n"
    }
}

fn load_pieces(config: &RunConfig) -> Result<Vec<Piece>> {
    let dir = config
        .dataset_dir
        .as_ref()
        .ok_or_else(|| Error::invalid("dataset_dir must be set for search"))?;
    // the hop in samples depends on the sample rate of the recordings
    let (entries, _) = crate::dataset::pair_dataset_dir(dir)?;
    let first = entries
        .first()
        .ok_or_else(|| Error::Dataset(format!("no audio/annotation pairs under {}", dir.display())))?;
    let fs = read_wav(&first.audio)?.sample_rate();
    load_dataset(dir, &config.window_spec(fs)?, config.annotation_units)
}

/// Runs one search mode over the dataset directory. Writes
/// `search_<mode>.csv` (grid modes) or `sgd_folds.csv`, plus
/// `search_<mode>.txt` with the summary block.
pub fn cmd_search(config: &RunConfig, mode: SearchMode) -> Result<(SearchReport, Vec<PathBuf>)> {
    config.validate()?;
    let pieces = load_pieces(config)?;
    let fs = pieces[0].signal.sample_rate();
    let template = config.mlc_config(fs)?.with_gammas(vec![1.0; config.search_depth + 1]);
    template.validate(fs)?;
    let dir = output_dir(config)?.to_path_buf();
    let name = match mode {
        SearchMode::Brute => "brute",
        SearchMode::Greedy => "greedy",
        SearchMode::Sgd => "sgd",
    };
    let mut paths = Vec::new();
    let report = match mode {
        SearchMode::Brute | SearchMode::Greedy => {
            let evaluator = Evaluator::new(&template, config.threshold_ratio, &pieces)?;
            let out = if mode == SearchMode::Brute {
                brute_force(&config.brute_space(), &evaluator)?
            } else {
                greedy(&config.greedy_space(), &evaluator)?
            };
            for f in &out.failures {
                log::warn!("grid point {f:?} failed");
            }
            let path = dir.join(format!("search_{name}.csv"));
            write_table_csv(create(&path)?, &out.table)?;
            paths.push(path);
            SearchReport::Grid(out)
        }
        SearchMode::Sgd => {
            let out = sgd_train(&config.sgd_config(), &template, &pieces)?;
            let path = dir.join("sgd_folds.csv");
            let mut w = csv::Writer::from_writer(create(&path)?);
            let depth = out.folds[0].model.gammas.len();
            let mut header = vec!["fold".to_string(), "test_pieces".to_string()];
            header.extend((0..depth).map(|l| format!("gamma_{l}")));
            header.extend(["tp", "fp", "fn"].map(String::from));
            w.write_record(&header)?;
            for (i, f) in out.folds.iter().enumerate() {
                let mut row = vec![i.to_string(), f.test_pieces.join(" ")];
                row.extend(f.model.gammas.iter().map(|g| g.to_string()));
                row.extend([f.counts.tp, f.counts.fp, f.counts.fn_].map(|c| c.to_string()));
                w.write_record(&row)?;
            }
            w.flush()?;
            paths.push(path);
            SearchReport::Sgd(out)
        }
    };
    let summary_path = dir.join(format!("search_{name}.txt"));
    std::fs::write(&summary_path, report.summary(mode))?;
    paths.push(summary_path);
    paths.push(record_config(config)?);
    Ok((report, paths))
}

/// Scores the configured pipeline (current `gammas`) on the dataset.
pub fn score_dataset(config: &RunConfig) -> Result<EvalCounts> {
    config.validate()?;
    let pieces = load_pieces(config)?;
    let fs = pieces[0].signal.sample_rate();
    let mlc = config.mlc_config(fs)?;
    pieces
        .par_iter()
        .map(|p| {
            let (roll, _) = estimate(&p.signal, &mlc, config.threshold_ratio)?;
            evaluate(&roll, &p.truth)
        })
        .sum()
}
