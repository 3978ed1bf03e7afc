//! End-to-end runs of the `mlc` command line on temporary directories.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use mlc::config::RunConfig;
use mlc::dataset::SyntheticQuartet;
use mlc::harness::{cmd_search, score_dataset, SearchMode, SearchReport};
use mlc::io::{write_wav, WavFormat};

fn mlc(dir: &Path, args: &[&str]) -> ExitCode {
    let out = dir.to_str().unwrap();
    let argv = ["mlc", "--output_dir", out].iter().chain(args).map(|s| s.to_string()).collect::<Vec<_>>();
    mlc::cli::run(argv)
}

fn ok(code: ExitCode) -> bool {
    code == ExitCode::SUCCESS
}

/// Writes two short quartets with frame-aligned annotations.
fn quartet_dir(dir: &Path, config: &RunConfig) -> PathBuf {
    let data = dir.join("data");
    std::fs::create_dir_all(&data).unwrap();
    for seed in 0..2 {
        let quartet = SyntheticQuartet { duration_s: 1.5, seed, ..Default::default() };
        let window = config.window_spec(quartet.sample_rate).unwrap();
        let piece = quartet.piece(&window).unwrap();
        write_wav(&data.join(format!("q{seed}.wav")), &piece.signal, WavFormat::Float32).unwrap();
        let offset = (window.window_length - 1) as f64 / 2.0 / quartet.sample_rate;
        let file = std::fs::File::create(data.join(format!("q{seed}.txt"))).unwrap();
        piece.truth.write_text(file, offset).unwrap();
    }
    data
}

#[test]
fn synth_writes_four_signals_and_config() {
    let dir = tempfile::tempdir().unwrap();
    assert!(ok(mlc(dir.path(), &["synth", "--synth_duration_s", "10", "--synth_impulse_at_s", "5"])));
    for name in ["x1.wav", "x2.wav", "x.wav", "x_noisy.wav", "run.conf"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let conf = RunConfig::read(&dir.path().join("run.conf")).unwrap();
    assert_eq!(conf.synth_duration_s, 10.0);
}

#[test]
fn analyze_is_deterministic_and_rejects_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let quartet = SyntheticQuartet { duration_s: 1.0, ..Default::default() };
    let (signal, _) = quartet.render().unwrap();
    let wav = dir.path().join("q.wav");
    write_wav(&wav, &signal, WavFormat::Float32).unwrap();

    let args = ["analyze", wav.to_str().unwrap(), "--gammas", "0.2,0.6,1"];
    assert!(ok(mlc(dir.path(), &args)));
    let names = ["q_z0.csv", "q_z1.csv", "q_z2.csv", "q_y.csv", "q_salience.csv"];
    let first: Vec<Vec<u8>> = names.iter().map(|n| std::fs::read(dir.path().join(n)).unwrap()).collect();
    assert!(ok(mlc(dir.path(), &args)));
    for (name, bytes) in names.iter().zip(&first) {
        assert_eq!(&std::fs::read(dir.path().join(name)).unwrap(), bytes, "{name}");
    }

    let empty = dir.path().join("empty.wav");
    let spec = hound::WavSpec { channels: 1, sample_rate: 44100, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
    hound::WavWriter::create(&empty, spec).unwrap().finalize().unwrap();
    assert!(!ok(mlc(dir.path(), &["analyze", empty.to_str().unwrap()])));
}

#[test]
fn degrade_estimate_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let quartet = SyntheticQuartet { duration_s: 1.0, ..Default::default() };
    let (signal, _) = quartet.render().unwrap();
    let wav = dir.path().join("q.wav");
    write_wav(&wav, &signal, WavFormat::Float32).unwrap();

    let degrade = ["degrade", wav.to_str().unwrap(), "--degrade_filter", "highpass", "--degrade_cutoff_hz", "300"];
    assert!(ok(mlc(dir.path(), &degrade)));
    let degraded = dir.path().join("q_degraded.wav");
    assert!(degraded.exists());

    assert!(ok(mlc(dir.path(), &["estimate", wav.to_str().unwrap(), degraded.to_str().unwrap()])));
    let pred = dir.path().join("q.txt");
    let text = std::fs::read_to_string(&pred).unwrap();
    assert!(text.lines().count() > 10);

    let (counts, scores) = mlc::harness::cmd_eval(&RunConfig::default(), &pred, &pred).unwrap();
    assert_eq!(counts.fp + counts.fn_, 0);
    assert!(counts.tp > 0);
    assert_eq!(scores.f_score, 1.0);
    assert!(ok(mlc(dir.path(), &["eval", pred.to_str().unwrap(), dir.path().join("q_degraded.txt").to_str().unwrap()])));
    assert!(dir.path().join("counts.csv").exists());
}

#[test]
fn single_point_brute_search_matches_direct_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = RunConfig::default();
    config.output_dir = dir.path().to_path_buf();
    config.dataset_dir = Some(quartet_dir(dir.path(), &config));
    config.search_depth = 1;
    config.set("brute_grid", "0.3").unwrap();

    let (report, paths) = cmd_search(&config, SearchMode::Brute).unwrap();
    let SearchReport::Grid(outcome) = report else { panic!("grid report expected") };
    assert_eq!(outcome.table.len(), 1);
    assert_eq!(outcome.best.gammas, vec![0.3, 0.3]);

    config.gammas = vec![0.3, 0.3];
    let direct = score_dataset(&config).unwrap();
    assert_eq!(outcome.best.counts, direct);
    assert!(paths.iter().any(|p| p.ends_with("search_brute.csv")));
    let csv = std::fs::read_to_string(dir.path().join("search_brute.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn greedy_search_over_cli_scans_whole_grid() {
    let dir = tempfile::tempdir().unwrap();
    let data = quartet_dir(dir.path(), &RunConfig::default());
    let args = ["search", "greedy", "--dataset_dir", data.to_str().unwrap(), "--search_depth", "1"];
    assert!(ok(mlc(dir.path(), &args)));
    let csv = std::fs::read_to_string(dir.path().join("search_greedy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 99);
    let summary = std::fs::read_to_string(dir.path().join("search_greedy.txt")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!ok(mlc(dir.path(), &["search", "brute"])));
    assert!(!ok(mlc(dir.path(), &["synth", "--gammas", "0.5,-1"])));
    assert!(!ok(mlc(dir.path(), &["estimate", "/nonexistent.wav"])));
    assert!(!ok(mlc(dir.path(), &["frobnicate"])));
}
