//! Acceptance suite. Every test prints one `ACCEPTANCE <n> PASS|FAIL|SKIP`
//! line and then asserts the criterion.
//!
//! cargo test --release -p mlc --test acceptance -- --include-ignored --nocapture

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use mlc::cfp::NUM_PITCHES;
use mlc::dataset::{load_dataset, Piece, SyntheticQuartet};
use mlc::degrade::{gen_pink, simulation_f0_law, ButterworthSpec, DegradeSpec, SimulationRecipe, SosFilter};
use mlc::eval::{evaluate, f_measure, scores, AnnotationUnits, EvalCounts, DEFAULT_THRESHOLD_RATIO};
use mlc::layers::compute_stack;
use mlc::pipeline::{analyze, estimate, FramePipeline};
use mlc::search::{AffineSigmoid, Batch, SgdModel};
use mlc::{MlcConfig, TimeSeries, WindowKind, WindowSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn report(id: u32, pass: bool, detail: String) {
    println!("ACCEPTANCE {id} {}: {detail}", if pass { "PASS" } else { "FAIL" });
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt()
}

// ---------------------------------------------------------------- 1

/// Bins of the (at most) two largest local maxima of `column[lo..=hi]`.
fn top_two_peaks(column: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let mut peaks: Vec<usize> = (lo..=hi)
        .filter(|&k| column[k] > 0.0 && column[k] > column[k - 1] && column[k] >= column[k + 1])
        .collect();
    peaks.sort_by(|&a, &b| column[b].total_cmp(&column[a]));
    peaks.truncate(2);
    peaks
}

/// Fraction of interior frames whose two strongest 1-4 Hz peaks land within
/// one bin of both 2 Hz and the sawtooth's fundamental at the frame center.
fn simulation_hit_rate(x: &TimeSeries, config: &MlcConfig) -> f64 {
    let fs = x.sample_rate();
    let analysis = analyze(x, config).unwrap();
    let y = analysis.cfp.spectrogram();
    let step = y.bin_step();
    let law = simulation_f0_law(fs);
    let (lo, hi) = ((1.0 / step).round() as usize, (4.0 / step).round() as usize);
    let interior = 1..y.frames() - 1;
    let total = interior.len();
    let hits = interior
        .filter(|&n| {
            let center = n * config.window.hop + (config.window.window_length - 1) / 2;
            let found: Vec<f64> = top_two_peaks(y.column(n), lo, hi).iter().map(|&k| k as f64 * step).collect();
            [2.0, law(center)].iter().all(|t| found.iter().any(|f| (f - t).abs() <= step + 1e-9))
        })
        .count();
    hits as f64 / total as f64
}

#[test]
#[ignore = "known red: the frequency-modulated source is not resolved to one bin with an 8 s window"]
fn criterion_1_simulation_fidelity() {
    let start = Instant::now();
    let recipe = SimulationRecipe::default();
    let sim = recipe.build().unwrap();
    let fs = recipe.sample_rate;
    let config = MlcConfig {
        window: WindowSpec::new(WindowKind::BlackmanHarris, (8.0 * fs) as usize, fs as usize),
        gammas: vec![0.24, 0.6, 1.0],
        cutoff_frequency_hz: Some(0.5),
        cutoff_quefrency_s: Some(0.01),
    };
    let clean = simulation_hit_rate(&sim.clean, &config);
    let noisy = simulation_hit_rate(&sim.noisy, &config);
    let secs = start.elapsed().as_secs_f64();
    let pass = clean >= 0.85 && noisy >= 0.75 && secs <= 60.0;
    report(
        1,
        pass,
        format!("clean {:.1} % (need 85), noisy {:.1} % (need 75), {secs:.1} s (limit 60)", 100.0 * clean, 100.0 * noisy),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 2

fn blackman_harris(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / (len - 1) as f64;
            0.35875 - 0.48829 * t.cos() + 0.14128 * (2.0 * t).cos() - 0.01168 * (3.0 * t).cos()
        })
        .collect()
}

#[test]
fn criterion_2_acf_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0_f64;
    let mut frames = 0;
    while frames < 100 {
        let n = rng.gen_range(16..=1024);
        let w = rng.gen_range(8..=n);
        let hop = rng.gen_range(1..=w);
        let len = w + 4 * hop;
        let x = TimeSeries::new((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect(), 1000.0).unwrap();
        let config = MlcConfig {
            window: WindowSpec { kind: WindowKind::BlackmanHarris, window_length: w, dft_size: n, hop },
            gammas: vec![2.0, 1.0],
            cutoff_frequency_hz: None,
            cutoff_quefrency_s: None,
        };
        let stack = compute_stack(&x, &config).unwrap();
        let z1 = stack.layer(1);
        let window = blackman_harris(w);
        for m in 0..z1.frames() {
            let mut frame = vec![0.0; n];
            for i in 0..w {
                frame[i] = x.samples()[m * hop + i] * window[i];
            }
            let acf: Vec<f64> =
                (0..n).map(|q| (0..n).map(|i| frame[i] * frame[(i + q) % n]).sum::<f64>().max(0.0)).collect();
            let scale = acf[0];
            for q in 0..n {
                // the unnormalized forward DFT contributes a factor N
                let err = (z1.get(q, m) / n as f64 - acf[q]).abs() / scale;
                worst = worst.max(err);
            }
            frames += 1;
        }
    }
    let pass = worst <= 1e-9;
    report(2, pass, format!("{frames} frames, worst relative error {worst:.2e} (limit 1e-9)"));
    assert!(pass);
}

// ---------------------------------------------------------------- 3

#[test]
fn criterion_3_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    let mut argmax_mismatch = 0;
    let cases = 40;
    for _ in 0..cases {
        let n = rng.gen_range(32..=512);
        let hop = rng.gen_range(8..=n);
        let fs = 8000.0;
        let depth = rng.gen_range(0..=4);
        let gammas: Vec<f64> = (0..=depth).map(|_| rng.gen_range(0.1..2.0)).collect();
        let config = MlcConfig {
            window: WindowSpec::new(WindowKind::BlackmanHarris, n, hop),
            gammas: gammas.clone(),
            cutoff_frequency_hz: Some(rng.gen_range(0.0..fs / 8.0)),
            cutoff_quefrency_s: Some(rng.gen_range(0.0..(n as f64 / 4.0) / fs)),
        };
        let len = n + 3 * hop;
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let a = compute_stack(&TimeSeries::new(x, fs).unwrap(), &config).unwrap();
        let b = compute_stack(&TimeSeries::new(x2, fs).unwrap(), &config).unwrap();
        let mut product = 1.0;
        for l in 0..=depth {
            product *= gammas[l];
            let factor = 2f64.powf(product);
            let (za, zb) = (a.layer(l), b.layer(l));
            for m in 0..za.frames() {
                let (ca, cb) = (za.column(m), zb.column(m));
                let scale = cb.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
                if scale == 0.0 {
                    continue;
                }
                for (va, vb) in ca.iter().zip(cb) {
                    worst = worst.max((factor * va - vb).abs() / scale);
                }
                // every layer is even, so bins k and N - k are the same peak
                let fold = |c: &[f64]| {
                    let k = (0..c.len()).fold(0, |best, k| if c[k] > c[best] { k } else { best });
                    k.min(c.len() - k)
                };
                argmax_mismatch += usize::from(fold(ca) != fold(cb));
            }
        }
    }
    let pass = worst <= 1e-9 && argmax_mismatch == 0;
    report(3, pass, format!("{cases} configs, worst relative error {worst:.2e}, {argmax_mismatch} argmax mismatches"));
    assert!(pass);
}

// ---------------------------------------------------------------- 4

/// Steady-state gain from a sine probe: RMS ratio over the last two seconds
/// after the response has settled.
fn probe_gain(filter: &SosFilter, f: f64, fs: f64) -> f64 {
    let settle = (8.0 * fs) as usize;
    let tail = (2.0 * fs) as usize;
    let x: Vec<f64> = (0..settle + tail).map(|n| (2.0 * PI * f * n as f64 / fs).sin()).collect();
    let y = filter.apply(&x);
    rms(&y[settle..]) / rms(&x[settle..])
}

#[test]
fn criterion_4_filter_correctness() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (order, cutoff, fs) in [(4, 10.0, 1000.0), (10, 10.0, 1000.0), (4, 1000.0, 44100.0), (10, 1000.0, 44100.0)] {
        for spec in [ButterworthSpec::lowpass(order, cutoff), ButterworthSpec::highpass(order, cutoff)] {
            let filter = SosFilter::butterworth(&spec, fs).unwrap();
            let db = 20.0 * probe_gain(&filter, cutoff, fs).log10();
            let below: Vec<f64> = [0.5, 0.6, 0.7, 0.8, 0.9].iter().map(|r| probe_gain(&filter, r * cutoff, fs)).collect();
            let above: Vec<f64> = [1.1, 1.2, 1.3, 1.4, 1.5].iter().map(|r| probe_gain(&filter, r * cutoff, fs)).collect();
            let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
            let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
            let monotone = match spec.kind {
                mlc::degrade::FilterKind::Lowpass => decreasing(&below) && decreasing(&above),
                mlc::degrade::FilterKind::Highpass => increasing(&below) && increasing(&above),
            };
            let ok = (db + 3.01).abs() <= 0.1 && monotone;
            pass &= ok;
            lines.push(format!("{:?} order {order} at {cutoff} Hz: {db:.3} dB, monotone {monotone}", spec.kind));
        }
    }
    report(4, pass, lines.join("; "));
    assert!(pass);
}

// ---------------------------------------------------------------- 5

/// Welch PSD with a Hann window and 50 % overlap; one-sided, unscaled.
fn welch(x: &[f64], seg: usize, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let fft = planner.plan_fft_forward(seg);
    let window: Vec<f64> = (0..seg).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos()).collect();
    let mut psd = vec![0.0; seg / 2 + 1];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let mut buf: Vec<Complex64> = (0..seg).map(|i| Complex64::new(x[start + i] * window[i], 0.0)).collect();
        fft.process(&mut buf);
        for (p, c) in psd.iter_mut().zip(&buf) {
            *p += c.norm_sqr();
        }
        count += 1;
        start += seg / 2;
    }
    psd.iter().map(|p| p / count as f64).collect()
}

#[test]
fn criterion_5_pink_noise_slope() {
    let fs = 1000.0;
    let seg = 4096;
    let mut planner = FftPlanner::new();
    let mut psd = vec![0.0; seg / 2 + 1];
    for seed in 0..50 {
        let x = gen_pink(1 << 16, fs, seed).unwrap();
        for (acc, p) in psd.iter_mut().zip(welch(x.samples(), seg, &mut planner)) {
            *acc += p / 50.0;
        }
    }
    let points: Vec<(f64, f64)> = (1..psd.len())
        .map(|k| (k as f64 * fs / seg as f64, psd[k]))
        .filter(|(f, _)| (10.0..=200.0).contains(f))
        .map(|(f, p)| (f.log10(), 10.0 * p.log10()))
        .collect();
    let n = points.len() as f64;
    let (mx, my) = (points.iter().map(|p| p.0).sum::<f64>() / n, points.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / points.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    let pass = (slope + 10.0).abs() <= 1.5;
    report(5, pass, format!("slope {slope:.3} dB/decade over 10-200 Hz (target -10 +/- 1.5)"));
    assert!(pass);
}

// ---------------------------------------------------------------- 6

#[test]
fn criterion_6_f_score_identity() {
    // counts with precision exactly 77.72 % and recall exactly 83.51 %
    let counts = EvalCounts { tp: 7772 * 8351, fp: 8351 * 2228, fn_: 7772 * 1649 };
    let s = scores(&counts);
    let f = 100.0 * s.f_score;
    let direct = 100.0 * f_measure(0.7772, 0.8351);
    let pass = (f - 80.51).abs() <= 0.01 && (direct - 80.51).abs() <= 0.01;
    report(
        6,
        pass,
        format!("P {:.2} R {:.2} F {f:.4} (target 80.51 +/- 0.01)", 100.0 * s.precision, 100.0 * s.recall),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 7, 8

fn bach10_dir() -> Option<PathBuf> {
    std::env::var_os("BACH10_DIR").map(PathBuf::from).filter(|p| p.is_dir())
}

fn f_score(pieces: &[Piece], config: &MlcConfig) -> f64 {
    let counts: EvalCounts = pieces
        .iter()
        .map(|p| {
            let (roll, _) = estimate(&p.signal, config, DEFAULT_THRESHOLD_RATIO).unwrap();
            evaluate(&roll, &p.truth).unwrap()
        })
        .sum();
    100.0 * counts.scores().f_score
}

#[test]
fn criterion_7_highpass_robustness() {
    let fs = 44100.0;
    let template = MlcConfig::standard(fs, vec![1.0, 1.0]);
    let (source, pieces) = match bach10_dir() {
        Some(dir) => ("Bach10", load_dataset(&dir, &template.window, AnnotationUnits::Hz).unwrap()),
        None => ("synthetic quartet", vec![SyntheticQuartet::default().piece(&template.window).unwrap()]),
    };
    let spec = DegradeSpec { filter: Some(ButterworthSpec::highpass(4, 1000.0)), ..Default::default() };
    let degraded: Vec<Piece> = pieces.iter().map(|p| p.degraded(&spec).unwrap()).collect();
    let shallow = f_score(&degraded, &template.with_gammas(vec![0.3, 1.0]));
    let deep = f_score(&degraded, &template.with_gammas(vec![0.1, 0.9, 0.9, 0.7, 0.8, 0.5, 1.0]));
    let pass = deep - shallow >= 10.0;
    report(
        7,
        pass,
        format!("{source}, 1 kHz high-pass: 6-layer F {deep:.2}, 1-layer F {shallow:.2}, gap {:.2} pp (need 10)", deep - shallow),
    );
    assert!(pass);
}

#[test]
fn criterion_8_bach10_magnitude() {
    let Some(dir) = bach10_dir() else {
        println!("ACCEPTANCE 8 SKIP: set BACH10_DIR to a directory of X.wav / X.txt pairs to run");
        return;
    };
    let template = MlcConfig::standard(44100.0, vec![0.3, 1.0]);
    let pieces = load_dataset(&dir, &template.window, AnnotationUnits::Hz).unwrap();
    let f = f_score(&pieces, &template);
    let pass = (73.0..=87.0).contains(&f);
    report(8, pass, format!("{} pieces, F {f:.2} (target 73-87)", pieces.len()));
    assert!(pass);
}

// ---------------------------------------------------------------- 9

fn toy_batch() -> (FramePipeline, Batch) {
    let fs = 8000.0;
    let config = MlcConfig {
        window: WindowSpec::new(WindowKind::BlackmanHarris, 1024, 256),
        gammas: vec![0.5, 1.0],
        cutoff_frequency_hz: Some(27.5),
        cutoff_quefrency_s: Some(0.24e-3),
    };
    let quartet = SyntheticQuartet { sample_rate: fs, duration_s: 1.0, seed: 9, ..Default::default() };
    let piece = quartet.piece(&config.window).unwrap();
    let pipeline = FramePipeline::new(&config, fs, 0.5).unwrap();
    let frames: Vec<(usize, usize)> = (0..piece.truth.frames()).map(|n| (0, n)).collect();
    let batch = Batch::gather(&pipeline, &[piece], &frames);
    (pipeline, batch)
}

#[test]
fn criterion_9_sgd_sanity() {
    let (pipeline, batch) = toy_batch();
    let gammas = vec![0.5, 1.0];

    // affine-only training: full-batch gradient descent on a convex loss
    let salience = batch.salience(&pipeline, &gammas);
    let mut model = AffineSigmoid::default();
    let mut losses = Vec::new();
    for _ in 0..200 {
        let (loss, grad) = model.loss_and_gradient(&salience, &batch.truth);
        losses.push(loss);
        model.step(&grad, 20.0);
    }
    let monotone = losses.windows(2).all(|w| w[1] < w[0]);

    // exponent gradients: central difference vs a 5-point stencil
    let sgd = SgdModel { gammas: gammas.clone(), output: model };
    let rel_step = 1e-3;
    let central = sgd.gamma_gradient(&pipeline, &batch, rel_step);
    let mut worst = 0.0_f64;
    for (i, c) in central.iter().enumerate() {
        let h = rel_step * gammas[i];
        let at = |d: f64| {
            let mut g = gammas.clone();
            g[i] += d;
            sgd.output.loss(&batch.salience(&pipeline, &g), &batch.truth)
        };
        let stencil = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
        worst = worst.max((c - stencil).abs() / stencil.abs().max(1e-12));
    }
    let pass = monotone && worst <= 1e-4;
    report(
        9,
        pass,
        format!(
            "loss {:.5} -> {:.5} over {} steps, monotone {monotone}; gamma gradient {central:?}, worst relative gap {worst:.2e}",
            losses[0],
            losses[losses.len() - 1],
            losses.len()
        ),
    );
    assert!(pass);
    assert_eq!(NUM_PITCHES, 88);
}
