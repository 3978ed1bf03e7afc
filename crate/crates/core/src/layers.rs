//! The multi-layered cepstrum: a stack of spectrogram-shaped layers where
//! layer 0 is the power-compressed magnitude spectrogram and every further
//! layer is `activate(mask(DFT(previous)))`.
//!
//! Even layers live on the frequency axis, odd layers on the quefrency axis.
//! Each frame column is processed independently.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::{
    activate, highpass_mask, stft_magnitude, Axis, DftPlan, HighpassMask, Spectrogram, TimeSeries,
    WindowKind, WindowSpec,
};

/// Deepest stack accepted by [`MlcConfig::validate`].
pub const MAX_LAYERS: usize = 16;

/// Lowest piano key, A0.
pub const DEFAULT_CUTOFF_FREQUENCY_HZ: f64 = 27.5;
/// Period of the highest piano key, C8.
pub const DEFAULT_CUTOFF_QUEFRENCY_S: f64 = 0.24e-3;
pub const DEFAULT_DFT_SIZE: usize = 7939;
pub const DEFAULT_HOP_SECONDS: f64 = 0.01;

/// Exponent and high-pass cutoff of one layer. `cutoff_index: None` disables
/// the mask entirely (not even the DC bin is removed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerParams {
    pub gamma: f64,
    pub cutoff_index: Option<usize>,
}

impl LayerParams {
    pub fn new(gamma: f64, cutoff_index: usize) -> Self {
        LayerParams { gamma, cutoff_index: Some(cutoff_index) }
    }

    pub fn unmasked(gamma: f64) -> Self {
        LayerParams { gamma, cutoff_index: None }
    }

    fn validate(&self, len: usize) -> Result<Option<HighpassMask>> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        self.cutoff_index.map(|c| highpass_mask(len, c)).transpose()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlcConfig {
    pub window: WindowSpec,
    /// `gamma_0 ..= gamma_L`; the stack depth is `gammas.len() - 1`.
    pub gammas: Vec<f64>,
    /// `None` disables frequency-layer masks.
    pub cutoff_frequency_hz: Option<f64>,
    /// `None` disables quefrency-layer masks.
    pub cutoff_quefrency_s: Option<f64>,
}

impl MlcConfig {
    /// The evaluation setup used on polyphonic recordings: 7939-point DFT,
    /// Blackman-Harris window, 10 ms hop, A0 / C8 cutoffs.
    pub fn standard(sample_rate: f64, gammas: Vec<f64>) -> Self {
        let hop = (DEFAULT_HOP_SECONDS * sample_rate).round().max(1.0) as usize;
        MlcConfig {
            window: WindowSpec::new(WindowKind::BlackmanHarris, DEFAULT_DFT_SIZE, hop),
            gammas,
            cutoff_frequency_hz: Some(DEFAULT_CUTOFF_FREQUENCY_HZ),
            cutoff_quefrency_s: Some(DEFAULT_CUTOFF_QUEFRENCY_S),
        }
    }

    pub fn num_layers(&self) -> usize {
        self.gammas.len().saturating_sub(1)
    }

    pub fn with_gammas(&self, gammas: Vec<f64>) -> Self {
        MlcConfig { gammas, ..self.clone() }
    }

    /// `k_c = round(f_c * N / f_s)`.
    pub fn frequency_cutoff_index(&self, sample_rate: f64) -> Option<usize> {
        self.cutoff_frequency_hz
            .map(|fc| (fc * self.window.dft_size as f64 / sample_rate).round() as usize)
    }

    /// `n_c = round(q_c * f_s)`.
    pub fn quefrency_cutoff_index(&self, sample_rate: f64) -> Option<usize> {
        self.cutoff_quefrency_s.map(|qc| (qc * sample_rate).round() as usize)
    }

    /// Parameters of layer `l >= 1`: odd layers use the quefrency cutoff,
    /// even layers the frequency cutoff.
    pub fn layer_params(&self, layer: usize, sample_rate: f64) -> LayerParams {
        let cutoff_index = if layer % 2 == 1 {
            self.quefrency_cutoff_index(sample_rate)
        } else {
            self.frequency_cutoff_index(sample_rate)
        };
        LayerParams { gamma: self.gammas[layer], cutoff_index }
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        self.window.validate()?;
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::invalid(format!("sample rate must be positive, got {sample_rate}")));
        }
        if self.gammas.is_empty() {
            return Err(Error::invalid("at least one gamma (layer 0) is required"));
        }
        if self.num_layers() > MAX_LAYERS {
            return Err(Error::invalid(format!(
                "{} layers requested, at most {MAX_LAYERS} supported",
                self.num_layers()
            )));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::invalid(format!("gamma must be positive, got {g}")));
        }
        for (name, value) in [
            ("cutoff frequency", self.cutoff_frequency_hz),
            ("cutoff quefrency", self.cutoff_quefrency_s),
        ] {
            if let Some(v) = value {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::invalid(format!("{name} must be nonnegative, got {v}")));
                }
            }
        }
        let n = self.window.dft_size;
        for (name, idx) in [
            ("frequency", self.frequency_cutoff_index(sample_rate)),
            ("quefrency", self.quefrency_cutoff_index(sample_rate)),
        ] {
            if let Some(i) = idx {
                if 2 * i >= n {
                    return Err(Error::invalid(format!(
                        "{name} cutoff index {i} must be below half the DFT size {n}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `Z^(0) ..= Z^(L)`.
#[derive(Clone, Debug)]
pub struct LayerStack {
    layers: Vec<Spectrogram>,
}

impl LayerStack {
    pub fn layers(&self) -> &[Spectrogram] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &Spectrogram {
        &self.layers[l]
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len() - 1
    }

    /// `(l_e, l_o)` for the deepest two layers, or `None` when the stack has
    /// only layer 0.
    pub fn fusion_pair(&self) -> Option<(usize, usize)> {
        fusion_pair(self.num_layers())
    }
}

/// The even and odd indices among `{L-1, L}`.
pub fn fusion_pair(depth: usize) -> Option<(usize, usize)> {
    match depth {
        0 => None,
        l if l % 2 == 1 => Some((l - 1, l)),
        l => Some((l, l - 1)),
    }
}

/// `Z^(0) = |X|^gamma_0`, no mask.
pub fn compute_layer0(magnitudes: &Spectrogram, gamma0: f64) -> Result<Spectrogram> {
    if magnitudes.axis() != Axis::Frequency {
        return Err(Error::ShapeMismatch("layer 0 input must be on the frequency axis".into()));
    }
    LayerParams::unmasked(gamma0).validate(magnitudes.bins())?;
    let columns: Vec<Vec<f64>> = magnitudes
        .columns()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|c| {
            let mut out = c.to_vec();
            activate(&mut out, gamma0);
            out
        })
        .collect();
    magnitudes.with_columns(columns, Axis::Frequency)
}

/// `Z^(l) = activate(mask(DFT(Z^(l-1))))`; the output axis is flipped.
pub fn compute_next_layer(prev: &Spectrogram, params: &LayerParams) -> Result<Spectrogram> {
    let mask = params.validate(prev.bins())?;
    let plan = DftPlan::new(prev.bins())?;
    let columns: Vec<Vec<f64>> = prev
        .columns()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|c| next_column(&plan, c, mask.as_ref(), params.gamma))
        .collect();
    prev.with_columns(columns, prev.axis().flipped())
}

/// Masked real DFT of one column, before activation.
pub(crate) fn pre_activation(plan: &DftPlan, prev: &[f64], mask: Option<&HighpassMask>) -> Vec<f64> {
    let mut out = vec![0.0; prev.len()];
    plan.forward_real_into(prev, &mut out);
    if let Some(m) = mask {
        m.apply(&mut out);
    }
    out
}

fn next_column(plan: &DftPlan, prev: &[f64], mask: Option<&HighpassMask>, gamma: f64) -> Vec<f64> {
    let mut out = pre_activation(plan, prev, mask);
    activate(&mut out, gamma);
    out
}

/// Per-column evaluator for a fixed transform size, sample rate and cutoffs.
/// Used by the search strategies, which work frame by frame.
#[derive(Clone, Debug)]
pub struct ColumnEngine {
    plan: DftPlan,
    frequency_mask: Option<HighpassMask>,
    quefrency_mask: Option<HighpassMask>,
}

impl ColumnEngine {
    pub fn new(config: &MlcConfig, sample_rate: f64) -> Result<Self> {
        let n = config.window.dft_size;
        let frequency_mask =
            config.frequency_cutoff_index(sample_rate).map(|i| highpass_mask(n, i)).transpose()?;
        let quefrency_mask =
            config.quefrency_cutoff_index(sample_rate).map(|i| highpass_mask(n, i)).transpose()?;
        Ok(ColumnEngine { plan: DftPlan::new(n)?, frequency_mask, quefrency_mask })
    }

    pub fn len(&self) -> usize {
        self.plan.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn mask_for(&self, layer: usize) -> Option<&HighpassMask> {
        if layer % 2 == 1 {
            self.quefrency_mask.as_ref()
        } else {
            self.frequency_mask.as_ref()
        }
    }

    /// Masked DFT of `prev` (layer `layer - 1`), ready for layer `layer`'s activation.
    pub fn pre_activation(&self, prev: &[f64], layer: usize) -> Vec<f64> {
        pre_activation(&self.plan, prev, self.mask_for(layer))
    }

    /// All layers of one frame from its magnitude spectrum.
    pub fn stack(&self, magnitudes: &[f64], gammas: &[f64]) -> Vec<Vec<f64>> {
        let mut layers = Vec::with_capacity(gammas.len());
        let mut z0 = magnitudes.to_vec();
        activate(&mut z0, gammas[0]);
        layers.push(z0);
        for (l, &g) in gammas.iter().enumerate().skip(1) {
            let mut z = self.pre_activation(&layers[l - 1], l);
            activate(&mut z, g);
            layers.push(z);
        }
        layers
    }
}

/// Stack from an existing magnitude spectrogram.
pub fn compute_stack_from_magnitudes(magnitudes: &Spectrogram, config: &MlcConfig) -> Result<LayerStack> {
    let fs = magnitudes.sample_rate();
    config.validate(fs)?;
    if magnitudes.bins() != config.window.dft_size {
        return Err(Error::ShapeMismatch(format!(
            "spectrogram has {} bins, config expects {}",
            magnitudes.bins(),
            config.window.dft_size
        )));
    }
    let mut layers = vec![compute_layer0(magnitudes, config.gammas[0])?];
    for l in 1..=config.num_layers() {
        let next = compute_next_layer(&layers[l - 1], &config.layer_params(l, fs))?;
        layers.push(next);
    }
    Ok(LayerStack { layers })
}

/// STFT magnitude followed by the whole layer recursion.
pub fn compute_stack(x: &TimeSeries, config: &MlcConfig) -> Result<LayerStack> {
    config.validate(x.sample_rate())?;
    let magnitudes = stft_magnitude(x, &config.window)?;
    compute_stack_from_magnitudes(&magnitudes, config)
}
