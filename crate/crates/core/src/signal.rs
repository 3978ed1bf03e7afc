//! Short-time analysis primitives: windows, STFT magnitudes, the rectified
//! power activation, high-pass index masks and the real-part DFT used between
//! layers.
//!
//! All transforms are forward and unnormalized. Spectra are kept two-sided
//! (all `N` bins), so every layer of the recursion has the same shape.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A sampled real signal.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl TimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        if samples.is_empty() {
            return Err(Error::invalid("time series must contain at least one sample"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(format!("sample {i} of time series")));
        }
        Ok(TimeSeries { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Mean-square power.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    /// Applies `f` sample-wise, keeping the rate.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        TimeSeries::new(self.samples.iter().map(|&s| f(s)).collect(), self.sample_rate)
    }

    /// Sample-wise sum of two series of equal length and rate.
    pub fn add(&self, other: &TimeSeries) -> Result<Self> {
        self.check_compatible(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        TimeSeries::new(samples, self.sample_rate)
    }

    pub(crate) fn check_compatible(&self, other: &TimeSeries) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "signal lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::ShapeMismatch(format!(
                "sample rates differ: {} vs {}",
                self.sample_rate, other.sample_rate
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WindowKind {
    BlackmanHarris,
    Rectangular,
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "blackman_harris" | "blackmanharris" => Ok(WindowKind::BlackmanHarris),
            "rectangular" | "rect" | "boxcar" => Ok(WindowKind::Rectangular),
            other => Err(Error::invalid(format!("unsupported window kind `{other}`"))),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::BlackmanHarris => "blackman_harris",
            WindowKind::Rectangular => "rectangular",
        })
    }
}

/// Window shape, window length, DFT size and hop, all in samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub window_length: usize,
    pub dft_size: usize,
    pub hop: usize,
}

impl WindowSpec {
    /// Window length equal to the DFT size.
    pub fn new(kind: WindowKind, dft_size: usize, hop: usize) -> Self {
        WindowSpec { kind, window_length: dft_size, dft_size, hop }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_length == 0 || self.window_length > self.dft_size {
            return Err(Error::invalid(format!(
                "window length {} must be in 1..={}",
                self.window_length, self.dft_size
            )));
        }
        if self.dft_size < 2 {
            return Err(Error::invalid("dft size must be at least 2"));
        }
        if self.hop == 0 {
            return Err(Error::invalid("hop must be at least one sample"));
        }
        Ok(())
    }

    /// Number of whole frames that fit in `len` samples (0 if none).
    pub fn num_frames(&self, len: usize) -> usize {
        if len < self.window_length {
            0
        } else {
            (len - self.window_length) / self.hop + 1
        }
    }
}

/// 4-term Blackman-Harris coefficients (-92 dB side lobes).
const BLACKMAN_HARRIS: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];

/// Symmetric analysis window of `spec.window_length` samples.
pub fn make_window(spec: &WindowSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let len = spec.window_length;
    Ok(match spec.kind {
        WindowKind::Rectangular => vec![1.0; len],
        WindowKind::BlackmanHarris if len == 1 => vec![1.0],
        WindowKind::BlackmanHarris => {
            let [a0, a1, a2, a3] = BLACKMAN_HARRIS;
            let denom = (len - 1) as f64;
            (0..len)
                .map(|i| {
                    // Mirror so that w[i] == w[len-1-i] holds bit for bit.
                    let i = i.min(len - 1 - i) as f64;
                    let t = 2.0 * PI * i / denom;
                    (a0 - a1 * t.cos() + a2 * (2.0 * t).cos() - a3 * (3.0 * t).cos()).clamp(0.0, 1.0)
                })
                .collect()
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Frequency,
    Quefrency,
}

impl Axis {
    pub fn flipped(self) -> Axis {
        match self {
            Axis::Frequency => Axis::Quefrency,
            Axis::Quefrency => Axis::Frequency,
        }
    }
}

/// An `N x M` nonnegative matrix of bins by frames, stored frame-major
/// (each frame column is contiguous).
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    values: Vec<f64>,
    bins: usize,
    frames: usize,
    axis: Axis,
    sample_rate: f64,
    frame_hop_seconds: f64,
}

impl Spectrogram {
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        axis: Axis,
        sample_rate: f64,
        frame_hop_seconds: f64,
    ) -> Result<Self> {
        let frames = columns.len();
        if frames == 0 {
            return Err(Error::ShapeMismatch("spectrogram needs at least one frame".into()));
        }
        let bins = columns[0].len();
        if columns.iter().any(|c| c.len() != bins) {
            return Err(Error::ShapeMismatch("ragged spectrogram columns".into()));
        }
        let values: Vec<f64> = columns.into_iter().flatten().collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::NonFinite(format!(
                "spectrogram entry (bin {}, frame {}) = {}",
                i % bins,
                i / bins,
                values[i]
            )));
        }
        Ok(Spectrogram { values, bins, frames, axis, sample_rate, frame_hop_seconds })
    }

    /// Number of bins per frame (`N`).
    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Number of frames (`M`).
    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn frame_hop_seconds(&self) -> f64 {
        self.frame_hop_seconds
    }

    /// Hz per bin on the frequency axis, seconds per bin on the quefrency axis.
    pub fn bin_step(&self) -> f64 {
        match self.axis {
            Axis::Frequency => self.sample_rate / self.bins as f64,
            Axis::Quefrency => 1.0 / self.sample_rate,
        }
    }

    /// Physical coordinate (Hz or s) of bin `k`.
    pub fn bin_coordinate(&self, k: usize) -> f64 {
        k as f64 * self.bin_step()
    }

    pub fn get(&self, bin: usize, frame: usize) -> f64 {
        self.values[frame * self.bins + bin]
    }

    pub fn column(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.bins..(frame + 1) * self.bins]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.bins)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same metadata, new values (already validated by the caller's construction).
    pub(crate) fn with_columns(&self, columns: Vec<Vec<f64>>, axis: Axis) -> Result<Self> {
        Spectrogram::from_columns(columns, axis, self.sample_rate, self.frame_hop_seconds)
    }
}

/// Forward DFT plan of a fixed size, reused across frames.
#[derive(Clone)]
pub struct DftPlan {
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan").field("len", &self.len()).finish()
    }
}

impl DftPlan {
    pub fn new(len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::invalid(format!("dft length must be at least 2, got {len}")));
        }
        Ok(DftPlan { fft: FftPlanner::new().plan_fft_forward(len) })
    }

    pub fn len(&self) -> usize {
        self.fft.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Complex forward DFT of a real sequence zero-padded to the plan length.
    pub fn forward(&self, input: &[f64]) -> Vec<Complex64> {
        debug_assert!(input.len() <= self.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len()];
        for (b, &x) in buf.iter_mut().zip(input) {
            b.re = x;
        }
        self.fft.process(&mut buf);
        buf
    }

    /// Real part of the forward DFT, written into `out`.
    pub fn forward_real_into(&self, input: &[f64], out: &mut [f64]) {
        let spectrum = self.forward(input);
        for (o, c) in out.iter_mut().zip(&spectrum) {
            *o = c.re;
        }
    }
}

/// Forward unnormalized DFT keeping only the real part.
pub fn real_dft(v: &[f64]) -> Result<Vec<f64>> {
    let plan = DftPlan::new(v.len())?;
    let mut out = vec![0.0; v.len()];
    plan.forward_real_into(v, &mut out);
    Ok(out)
}

/// `|STFT|` of `x`, all `dft_size` bins kept; frame `n` starts at `n * hop`.
pub fn stft_magnitude(x: &TimeSeries, spec: &WindowSpec) -> Result<Spectrogram> {
    let window = make_window(spec)?;
    let frames = spec.num_frames(x.len());
    if frames == 0 {
        return Err(Error::SignalTooShort { len: x.len(), needed: spec.window_length });
    }
    let plan = DftPlan::new(spec.dft_size)?;
    let columns: Vec<Vec<f64>> = (0..frames)
        .into_par_iter()
        .map(|n| frame_magnitude(x.samples(), n * spec.hop, &window, &plan))
        .collect();
    Spectrogram::from_columns(
        columns,
        Axis::Frequency,
        x.sample_rate(),
        spec.hop as f64 / x.sample_rate(),
    )
}

/// Magnitude spectrum of the windowed frame starting at `start`.
pub(crate) fn frame_magnitude(samples: &[f64], start: usize, window: &[f64], plan: &DftPlan) -> Vec<f64> {
    let frame: Vec<f64> = samples[start..start + window.len()]
        .iter()
        .zip(window)
        .map(|(x, w)| x * w)
        .collect();
    plan.forward(&frame).iter().map(|c| c.norm()).collect()
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("activation exponent must be positive, got {gamma}")))
    }
}

/// Rectified power `x^gamma` for `x > 0`, `0` otherwise, in place.
pub fn power_activation_in_place(values: &mut [f64], gamma: f64) -> Result<()> {
    check_gamma(gamma)?;
    activate(values, gamma);
    Ok(())
}

pub(crate) fn activate(values: &mut [f64], gamma: f64) {
    if gamma == 1.0 {
        for v in values.iter_mut() {
            *v = v.max(0.0);
        }
    } else {
        for v in values.iter_mut() {
            *v = if *v > 0.0 { v.powf(gamma) } else { 0.0 };
        }
    }
}

/// Rectified power activation of a copy of `values`.
pub fn power_activation(values: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let mut out = values.to_vec();
    power_activation_in_place(&mut out, gamma)?;
    Ok(out)
}

/// Diagonal 0/1 high-pass mask: entry `i` passes iff `cutoff < i < len - cutoff`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HighpassMask {
    len: usize,
    cutoff: usize,
}

impl HighpassMask {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn passes(&self, i: usize) -> bool {
        i > self.cutoff && i < self.len - self.cutoff
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.len).map(|i| if self.passes(i) { 1.0 } else { 0.0 }).collect()
    }

    /// Zeroes the stop band of `values` in place.
    pub fn apply(&self, values: &mut [f64]) {
        debug_assert_eq!(values.len(), self.len);
        let lo = (self.cutoff + 1).min(values.len());
        values[..lo].fill(0.0);
        let hi = self.len - self.cutoff;
        if hi < values.len() {
            values[hi..].fill(0.0);
        }
    }
}

pub fn highpass_mask(len: usize, cutoff_index: usize) -> Result<HighpassMask> {
    if 2 * cutoff_index >= len {
        return Err(Error::invalid(format!(
            "cutoff index {cutoff_index} must be below half the transform size {len}"
        )));
    }
    Ok(HighpassMask { len, cutoff: cutoff_index })
}
