//! Test-signal synthesis and degradations: square and frequency-modulated
//! sawtooth sources, causal Butterworth filtering, pink noise at a target
//! SNR and single-sample impulses.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::TimeSeries;

fn sample_count(fs: f64, duration: f64) -> Result<usize> {
    if !(fs > 0.0 && fs.is_finite()) {
        return Err(Error::invalid(format!("sample rate must be positive, got {fs}")));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!("duration must be positive, got {duration}")));
    }
    Ok(((duration * fs).round() as usize).max(1))
}

/// Bipolar (+1 / -1) pulse wave; sample `n` is high while the phase
/// `f0 * n / fs` modulo 1 is below `duty`.
pub fn gen_square(f0: f64, duty: f64, fs: f64, duration: f64) -> Result<TimeSeries> {
    let len = sample_count(fs, duration)?;
    if !(duty > 0.0 && duty < 1.0) {
        return Err(Error::invalid(format!("duty cycle must be in (0, 1), got {duty}")));
    }
    if !(f0 > 0.0 && f0 < fs / 2.0) {
        return Err(Error::invalid(format!("square-wave frequency {f0} must be in (0, fs/2)")));
    }
    // phase in units of fs keeps integer-ratio cases exact
    let high = duty * fs;
    let samples = (0..len)
        .map(|n| if (f0 * n as f64).rem_euclid(fs) < high { 1.0 } else { -1.0 })
        .collect();
    TimeSeries::new(samples, fs)
}

/// Rising-ramp sawtooth in `[-1, 1)` whose instantaneous frequency follows
/// `f0_law(n)` in Hz; the phase in cycles is `sum_{m <= n} f0_law(m) / fs`.
pub fn gen_fm_sawtooth(f0_law: impl Fn(usize) -> f64, fs: f64, duration: f64) -> Result<TimeSeries> {
    let len = sample_count(fs, duration)?;
    let mut phase = 0.0_f64;
    let mut samples = Vec::with_capacity(len);
    for n in 0..len {
        let f = f0_law(n);
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::invalid(format!("instantaneous frequency at sample {n} is {f}")));
        }
        phase = (phase + f / fs).fract();
        samples.push(2.0 * phase - 1.0);
    }
    TimeSeries::new(samples, fs)
}

/// The modulation law of the simulated sawtooth, `2.5 + cos(2 pi n / (10 fs))` Hz.
pub fn simulation_f0_law(fs: f64) -> impl Fn(usize) -> f64 {
    move |n| 2.5 + (2.0 * PI * n as f64 / (10.0 * fs)).cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterKind {
    Lowpass,
    Highpass,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ButterworthSpec {
    pub order: usize,
    pub cutoff_hz: f64,
    pub kind: FilterKind,
}

impl ButterworthSpec {
    pub fn lowpass(order: usize, cutoff_hz: f64) -> Self {
        ButterworthSpec { order, cutoff_hz, kind: FilterKind::Lowpass }
    }

    pub fn highpass(order: usize, cutoff_hz: f64) -> Self {
        ButterworthSpec { order, cutoff_hz, kind: FilterKind::Highpass }
    }
}

/// One biquad `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

/// Cascade of second-order sections.
#[derive(Clone, Debug, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
}

// Poles within this distance of the unit circle are treated as unstable.
const STABILITY_MARGIN: f64 = 1e-9;

impl SosFilter {
    /// Digital Butterworth via the bilinear transform with cutoff prewarping.
    /// Unity gain at DC (lowpass) or Nyquist (highpass).
    pub fn butterworth(spec: &ButterworthSpec, fs: f64) -> Result<Self> {
        if spec.order == 0 {
            return Err(Error::invalid("filter order must be at least 1"));
        }
        if !(fs > 0.0 && spec.cutoff_hz > 0.0 && spec.cutoff_hz < fs / 2.0) {
            return Err(Error::invalid(format!(
                "cutoff {} Hz must lie strictly inside (0, {}) Hz",
                spec.cutoff_hz,
                fs / 2.0
            )));
        }
        let order = spec.order;
        let k = 2.0 * fs;
        let warped = k * (PI * spec.cutoff_hz / fs).tan();
        let bilinear = |s: Complex64| (Complex64::new(k, 0.0) + s) / (Complex64::new(k, 0.0) - s);
        let highpass = spec.kind == FilterKind::Highpass;

        let mut sections = Vec::with_capacity(order.div_ceil(2));
        // left-half-plane poles of the normalized prototype, upper half only
        for i in 0..order / 2 {
            let theta = PI * (2 * i + order + 1) as f64 / (2 * order) as f64;
            let proto = Complex64::from_polar(1.0, theta);
            let s = if highpass { warped / proto } else { proto * warped };
            let z = bilinear(s);
            if z.norm() >= 1.0 - STABILITY_MARGIN {
                return Err(Error::UnstableFilter(format!(
                    "pole radius {} for order {order} at {} Hz",
                    z.norm(),
                    spec.cutoff_hz
                )));
            }
            let a = [-2.0 * z.re, z.norm_sqr()];
            sections.push(Self::normalized(a, highpass));
        }
        if order % 2 == 1 {
            // the real prototype pole -1 maps to -warped for both kinds
            let z = bilinear(Complex64::new(-warped, 0.0)).re;
            if z.abs() >= 1.0 - STABILITY_MARGIN {
                return Err(Error::UnstableFilter(format!("real pole at {z}")));
            }
            let (b, gain) = if highpass {
                ([1.0, -1.0, 0.0], (1.0 + z) / 2.0)
            } else {
                ([1.0, 1.0, 0.0], (1.0 - z) / 2.0)
            };
            sections.push(Biquad { b: b.map(|x| x * gain), a: [-z, 0.0] });
        }
        Ok(SosFilter { sections })
    }

    fn normalized(a: [f64; 2], highpass: bool) -> Biquad {
        if highpass {
            // unity at z = -1
            let g = (1.0 - a[0] + a[1]) / 4.0;
            Biquad { b: [g, -2.0 * g, g], a }
        } else {
            // unity at z = 1
            let g = (1.0 + a[0] + a[1]) / 4.0;
            Biquad { b: [g, 2.0 * g, g], a }
        }
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Causal single pass, zero initial state, transposed direct form II.
    pub fn apply(&self, input: &[f64]) -> Vec<f64> {
        let mut out = input.to_vec();
        for sec in &self.sections {
            let (mut s1, mut s2) = (0.0, 0.0);
            for v in out.iter_mut() {
                let x = *v;
                let y = sec.b[0] * x + s1;
                s1 = sec.b[1] * x - sec.a[0] * y + s2;
                s2 = sec.b[2] * x - sec.a[1] * y;
                *v = y;
            }
        }
        out
    }

    /// `|H(e^{j 2 pi f / fs})|`.
    pub fn magnitude_at(&self, f: f64, fs: f64) -> f64 {
        let z1 = Complex64::from_polar(1.0, -2.0 * PI * f / fs);
        let z2 = z1 * z1;
        self.sections
            .iter()
            .map(|s| {
                let num = s.b[0] + z1 * s.b[1] + z2 * s.b[2];
                let den = 1.0 + z1 * s.a[0] + z2 * s.a[1];
                (num / den).norm()
            })
            .product()
    }
}

pub fn butterworth_apply(x: &TimeSeries, spec: &ButterworthSpec) -> Result<TimeSeries> {
    let filter = SosFilter::butterworth(spec, x.sample_rate())?;
    TimeSeries::new(filter.apply(x.samples()), x.sample_rate())
}

/// Unit-variance pink noise: white Gaussian noise shaped by `1/sqrt(k)` in
/// the DFT domain (DC removed), so power falls 10 dB per decade.
pub fn gen_pink(num_samples: usize, fs: f64, seed: u64) -> Result<TimeSeries> {
    if num_samples == 0 {
        return Err(Error::invalid("pink noise needs at least one sample"));
    }
    if num_samples == 1 {
        return TimeSeries::new(vec![0.0], fs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf: Vec<Complex64> = (0..num_samples)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(num_samples).process(&mut buf);
    buf[0] = Complex64::new(0.0, 0.0);
    for (k, c) in buf.iter_mut().enumerate().skip(1) {
        let folded = k.min(num_samples - k) as f64;
        *c /= folded.sqrt();
    }
    planner.plan_fft_inverse(num_samples).process(&mut buf);
    let mut samples: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let mean = samples.iter().sum::<f64>() / num_samples as f64;
    let rms = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / num_samples as f64).sqrt();
    for s in samples.iter_mut() {
        *s = if rms > 0.0 { (*s - mean) / rms } else { 0.0 };
    }
    TimeSeries::new(samples, fs)
}

/// Noise gain that puts `noise` at `snr_db` below `signal` (mean-square powers).
pub fn snr_gain(signal: &TimeSeries, noise: &TimeSeries, snr_db: f64) -> Result<f64> {
    signal.check_compatible(noise)?;
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
    }
    let (ps, pn) = (signal.power(), noise.power());
    if ps <= 0.0 || pn <= 0.0 {
        return Err(Error::invalid("signal and noise must both have nonzero power"));
    }
    Ok((ps / (pn * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// `signal + alpha * noise` with `alpha` from [`snr_gain`].
pub fn mix_at_snr(signal: &TimeSeries, noise: &TimeSeries, snr_db: f64) -> Result<TimeSeries> {
    let alpha = snr_gain(signal, noise, snr_db)?;
    let samples = signal.samples().iter().zip(noise.samples()).map(|(s, n)| s + alpha * n).collect();
    TimeSeries::new(samples, signal.sample_rate())
}

/// Adds `amplitude` to the sample nearest `at_seconds`.
pub fn add_impulse(x: &TimeSeries, at_seconds: f64, amplitude: f64) -> Result<TimeSeries> {
    if !(at_seconds >= 0.0 && at_seconds < x.duration()) {
        return Err(Error::invalid(format!(
            "impulse time {at_seconds} s outside the signal's {} s",
            x.duration()
        )));
    }
    if !amplitude.is_finite() {
        return Err(Error::invalid("impulse amplitude must be finite"));
    }
    let idx = ((at_seconds * x.sample_rate()).round() as usize).min(x.len() - 1);
    let mut samples = x.samples().to_vec();
    samples[idx] += amplitude;
    TimeSeries::new(samples, x.sample_rate())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImpulseSpec {
    pub at_seconds: f64,
    /// `None` means ten times the signal's peak.
    pub amplitude: Option<f64>,
}

/// Chain of degradations applied in order: filter, pink noise, impulse.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DegradeSpec {
    pub filter: Option<ButterworthSpec>,
    pub pink_snr_db: Option<f64>,
    pub impulse: Option<ImpulseSpec>,
    pub seed: u64,
}

pub fn degrade(x: &TimeSeries, spec: &DegradeSpec) -> Result<TimeSeries> {
    let mut y = x.clone();
    if let Some(f) = &spec.filter {
        y = butterworth_apply(&y, f)?;
    }
    if let Some(snr) = spec.pink_snr_db {
        let noise = gen_pink(y.len(), y.sample_rate(), spec.seed)?;
        y = mix_at_snr(&y, &noise, snr)?;
    }
    if let Some(imp) = &spec.impulse {
        let amplitude = imp.amplitude.unwrap_or(10.0 * x.peak());
        y = add_impulse(&y, imp.at_seconds, amplitude)?;
    }
    Ok(y)
}

/// Two-source test scene: a 20 % duty square wave at 2 Hz behind a
/// low-pass, plus a slowly frequency-modulated sawtooth behind a high-pass,
/// optionally with pink noise and an impulse.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationRecipe {
    pub sample_rate: f64,
    pub duration_s: f64,
    pub square_f0_hz: f64,
    pub square_duty: f64,
    pub filter_order: usize,
    pub filter_cutoff_hz: f64,
    /// `None` leaves the noisy mixture without pink noise.
    pub pink_snr_db: Option<f64>,
    /// `None` leaves the noisy mixture without an impulse.
    pub impulse: Option<ImpulseSpec>,
    pub seed: u64,
}

impl Default for SimulationRecipe {
    fn default() -> Self {
        SimulationRecipe {
            sample_rate: 1000.0,
            duration_s: 100.0,
            square_f0_hz: 2.0,
            square_duty: 0.2,
            filter_order: 10,
            filter_cutoff_hz: 10.0,
            pink_snr_db: Some(10.0),
            impulse: Some(ImpulseSpec { at_seconds: 80.0, amplitude: None }),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Simulation {
    /// Low-passed square wave.
    pub square: TimeSeries,
    /// High-passed sawtooth.
    pub sawtooth: TimeSeries,
    /// `square + sawtooth`.
    pub clean: TimeSeries,
    /// `clean` plus pink noise and impulse.
    pub noisy: TimeSeries,
}

impl SimulationRecipe {
    pub fn build(&self) -> Result<Simulation> {
        let fs = self.sample_rate;
        let square = gen_square(self.square_f0_hz, self.square_duty, fs, self.duration_s)?;
        let sawtooth = gen_fm_sawtooth(simulation_f0_law(fs), fs, self.duration_s)?;
        let square = butterworth_apply(&square, &ButterworthSpec::lowpass(self.filter_order, self.filter_cutoff_hz))?;
        let sawtooth =
            butterworth_apply(&sawtooth, &ButterworthSpec::highpass(self.filter_order, self.filter_cutoff_hz))?;
        let clean = square.add(&sawtooth)?;
        let noisy = degrade(
            &clean,
            &DegradeSpec { filter: None, pink_snr_db: self.pink_snr_db, impulse: self.impulse, seed: self.seed },
        )?;
        Ok(Simulation { square, sawtooth, clean, noisy })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Steady-state gain from a sine probe: RMS ratio over whole periods in the tail.
    fn probe_gain(filter: &SosFilter, f: f64, fs: f64) -> f64 {
        let period = fs / f;
        let periods_tail = (2.0 * fs / period).ceil().max(20.0);
        let tail = (periods_tail * period).round() as usize;
        let settle = (fs * 3.0) as usize + (50.0 * period) as usize;
        let len = settle + tail;
        let x: Vec<f64> = (0..len).map(|n| (2.0 * PI * f * n as f64 / fs).sin()).collect();
        let y = filter.apply(&x);
        let rms = |v: &[f64]| (v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64).sqrt();
        rms(&y[settle..]) / rms(&x[settle..])
    }

    #[test]
    fn square_wave_levels() {
        let x = gen_square(2.0, 0.2, 1000.0, 3.0).unwrap();
        for p in 0..6 {
            let high = x.samples()[p * 500..(p + 1) * 500].iter().filter(|&&s| s == 1.0).count();
            assert_eq!(high, 100);
        }
        let x = gen_square(5.0, 0.5, 1000.0, 2.0).unwrap();
        assert!(x.samples().iter().sum::<f64>().abs() < 1e-12);
        let x = gen_square(4.0, 0.3, 1000.0, 0.25).unwrap();
        let mean = x.samples().iter().sum::<f64>() / x.len() as f64;
        assert!((mean - (2.0 * 0.3 - 1.0)).abs() < 1e-12);
        assert!(gen_square(2.0, 1.0, 1000.0, 1.0).is_err());
        assert!(gen_square(600.0, 0.5, 1000.0, 1.0).is_err());
    }

    #[test]
    fn sawtooth_constant_rate_period() {
        let x = gen_fm_sawtooth(|_| 4.0, 1000.0, 2.0).unwrap();
        let s = x.samples();
        for n in 0..s.len() - 250 {
            assert!((s[n] - s[n + 250]).abs() < 1e-9);
        }
        assert!(s.iter().all(|v| (-1.0..1.0).contains(v)));
        assert!(gen_fm_sawtooth(|n| if n > 10 { -1.0 } else { 1.0 }, 1000.0, 1.0).is_err());
    }

    #[test]
    fn sawtooth_tracks_modulation_law() {
        let fs = 1000.0;
        let law = simulation_f0_law(fs);
        let x = gen_fm_sawtooth(&law, fs, 30.0).unwrap();
        // unwrap the ramp phase and differentiate it
        let s = x.samples();
        let mut cycles = 0.0;
        let mut phase = vec![0.0; s.len()];
        for n in 0..s.len() {
            if n > 0 && s[n] < s[n - 1] {
                cycles += 1.0;
            }
            phase[n] = cycles + (s[n] + 1.0) / 2.0;
        }
        for n in 1..s.len() {
            let inst = (phase[n] - phase[n - 1]) * fs;
            let expected = law(n);
            assert!((inst - expected).abs() <= 0.01 * expected, "n={n}: {inst} vs {expected}");
        }
    }

    #[test]
    fn butterworth_minus_3db_at_cutoff() {
        for (order, fc, fs, kind) in [
            (10, 10.0, 1000.0, FilterKind::Lowpass),
            (10, 10.0, 1000.0, FilterKind::Highpass),
            (4, 1000.0, 44100.0, FilterKind::Highpass),
            (4, 250.0, 8000.0, FilterKind::Lowpass),
            (3, 100.0, 8000.0, FilterKind::Highpass),
        ] {
            let f = SosFilter::butterworth(&ButterworthSpec { order, cutoff_hz: fc, kind }, fs).unwrap();
            let db = 20.0 * probe_gain(&f, fc, fs).log10();
            assert!((db + 3.01).abs() <= 0.1, "order {order} {kind:?}: {db} dB");
            let analytic = 20.0 * f.magnitude_at(fc, fs).log10();
            assert!((analytic + 3.0103).abs() < 1e-3);
        }
    }

    #[test]
    fn highpass_blocks_dc() {
        let f = SosFilter::butterworth(&ButterworthSpec::highpass(4, 50.0), 1000.0).unwrap();
        let y = f.apply(&vec![1.0; 20000]);
        assert!(y[19000..].iter().all(|v| v.abs() <= 1e-6));
    }

    #[test]
    fn filter_design_errors() {
        assert!(SosFilter::butterworth(&ButterworthSpec::lowpass(0, 10.0), 1000.0).is_err());
        assert!(SosFilter::butterworth(&ButterworthSpec::lowpass(4, 500.0), 1000.0).is_err());
        assert!(SosFilter::butterworth(&ButterworthSpec::lowpass(4, 0.0), 1000.0).is_err());
        let tiny = SosFilter::butterworth(&ButterworthSpec::lowpass(10, 1e-6), 1000.0);
        assert!(matches!(tiny, Err(Error::UnstableFilter(_))));
    }

    #[test]
    fn pink_noise_determinism_and_mean() {
        let a = gen_pink(4096, 1000.0, 42).unwrap();
        let b = gen_pink(4096, 1000.0, 42).unwrap();
        let c = gen_pink(4096, 1000.0, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let big = gen_pink(1_000_000, 1000.0, 1).unwrap();
        let mean = big.samples().iter().sum::<f64>() / 1e6;
        let std = big.power().sqrt();
        assert!(mean.abs() <= 3.0 * std / 1e3);
    }

    #[test]
    fn snr_mixing() {
        let s = gen_square(3.0, 0.5, 1000.0, 2.0).unwrap();
        let n = gen_pink(2000, 1000.0, 5).unwrap();
        let alpha = snr_gain(&s, &n, 0.0).unwrap();
        assert!((alpha * alpha * n.power() - s.power()).abs() <= 1e-9 * s.power());
        let alpha10 = snr_gain(&s, &n, 10.0).unwrap();
        assert!((alpha10 * alpha10 * n.power() - 0.1).abs() <= 1e-9);
        let s2 = s.map(|v| 2.0 * v).unwrap();
        let alpha2 = snr_gain(&s2, &n, 10.0).unwrap();
        assert!((alpha2 - 2.0 * alpha10).abs() <= 1e-12);
        let zero = TimeSeries::new(vec![0.0; 2000], 1000.0).unwrap();
        assert!(mix_at_snr(&s, &zero, 10.0).is_err());
        let short = TimeSeries::new(vec![1.0; 10], 1000.0).unwrap();
        assert!(mix_at_snr(&s, &short, 10.0).is_err());
    }

    #[test]
    fn impulse_placement() {
        let x = TimeSeries::new(vec![0.5; 100_000], 1000.0).unwrap();
        assert_eq!(add_impulse(&x, 10.0, 0.0).unwrap(), x);
        let y = add_impulse(&x, 80.0, 3.0).unwrap();
        let diff: Vec<usize> =
            (0..x.len()).filter(|&i| y.samples()[i] != x.samples()[i]).collect();
        assert_eq!(diff, vec![80_000]);
        assert!(add_impulse(&x, 100.0, 1.0).is_err());
        assert!(add_impulse(&x, -1.0, 1.0).is_err());
    }

    #[test]
    fn recipe_without_noise_is_clean() {
        let recipe = SimulationRecipe { duration_s: 20.0, pink_snr_db: None, impulse: None, ..Default::default() };
        let sim = recipe.build().unwrap();
        assert_eq!(sim.clean, sim.noisy);
        assert_eq!(sim.clean.len(), 20_000);
    }

    proptest! {
        #[test]
        fn butterworth_is_linear(
            x in prop::collection::vec(-1.0f64..1.0, 64..256),
            y_seed in 0u64..1000,
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let y: Vec<f64> = gen_pink(x.len(), 1000.0, y_seed).unwrap().into_samples();
            let f = SosFilter::butterworth(&ButterworthSpec::highpass(6, 40.0), 1000.0).unwrap();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = f.apply(&mix);
            let fx = f.apply(&x);
            let fy = f.apply(&y);
            let scale = lhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            for i in 0..x.len() {
                prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() <= 1e-9 * scale);
            }
        }

        #[test]
        fn generators_bounded(f0 in 0.5f64..40.0, duty in 0.05f64..0.95) {
            let sq = gen_square(f0, duty, 1000.0, 1.0).unwrap();
            prop_assert!(sq.samples().iter().all(|v| *v == 1.0 || *v == -1.0));
            let saw = gen_fm_sawtooth(|n| f0 + 0.4 * f0 * (n as f64 * 0.01).sin(), 1000.0, 1.0).unwrap();
            prop_assert!(saw.samples().iter().all(|v| (-1.0..1.0).contains(v)));
        }

        #[test]
        fn mixing_hits_requested_snr(snr in -20.0f64..40.0, seed in 0u64..100) {
            let s = gen_fm_sawtooth(|_| 7.0, 1000.0, 1.0).unwrap();
            let n = gen_pink(1000, 1000.0, seed).unwrap();
            let alpha = snr_gain(&s, &n, snr).unwrap();
            let achieved = 10.0 * (s.power() / (alpha * alpha * n.power())).log10();
            prop_assert!(((achieved - snr) / snr.abs().max(1.0)).abs() <= 1e-9);
        }
    }
}
