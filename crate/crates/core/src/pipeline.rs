//! End-to-end analysis: signal -> layer stack -> fused representation ->
//! 88-band salience -> piano roll, both for whole spectrograms and one frame
//! at a time.

use crate::cfp::{fuse, fuse_column, project_to_bands, CfpRepresentation, LogFreqBank, Salience, NUM_PITCHES};
use crate::error::{Error, Result};
use crate::eval::{evaluate_frame, pick_frame, pick_pitches, EvalCounts, PianoRoll};
use crate::layers::{compute_stack, fusion_pair, ColumnEngine, LayerStack, MlcConfig};
use crate::signal::{frame_magnitude, make_window, DftPlan, TimeSeries, WindowSpec};

/// Time of the center of frame 0; frame `n` is centered at `offset + n * hop`.
pub fn frame_center_offset(window: &WindowSpec, sample_rate: f64) -> f64 {
    (window.window_length as f64 - 1.0) / 2.0 / sample_rate
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub stack: LayerStack,
    pub cfp: CfpRepresentation,
    pub salience: Salience,
    pub frame_offset_seconds: f64,
}

/// Layer stack, fusion of the deepest even/odd pair, and band salience.
pub fn analyze(x: &TimeSeries, config: &MlcConfig) -> Result<Analysis> {
    let (le, lo) = fusion_pair(config.num_layers())
        .ok_or_else(|| Error::invalid("fusion needs at least two layers (gamma_0 and gamma_1)"))?;
    let stack = compute_stack(x, config)?;
    let cfp = fuse(stack.layer(le), stack.layer(lo), (le, lo))?;
    let bank = LogFreqBank::new(config.window.dft_size, x.sample_rate());
    let salience = project_to_bands(&cfp, &bank);
    Ok(Analysis {
        stack,
        cfp,
        salience,
        frame_offset_seconds: frame_center_offset(&config.window, x.sample_rate()),
    })
}

/// Analysis followed by relative-threshold peak picking.
pub fn estimate(x: &TimeSeries, config: &MlcConfig, threshold_ratio: f64) -> Result<(PianoRoll, f64)> {
    let analysis = analyze(x, config)?;
    Ok((pick_pitches(&analysis.salience, threshold_ratio)?, analysis.frame_offset_seconds))
}

/// Frame-at-a-time version of [`analyze`] for a fixed window, sample rate
/// and cutoffs; the exponents are supplied per call.
#[derive(Clone, Debug)]
pub struct FramePipeline {
    window_spec: WindowSpec,
    window: Vec<f64>,
    plan: DftPlan,
    engine: ColumnEngine,
    bank: LogFreqBank,
    sample_rate: f64,
    threshold_ratio: f64,
}

impl FramePipeline {
    /// `template.gammas` only needs to be valid; it is not used afterwards.
    pub fn new(template: &MlcConfig, sample_rate: f64, threshold_ratio: f64) -> Result<Self> {
        template.validate(sample_rate)?;
        if !(threshold_ratio > 0.0 && threshold_ratio < 1.0) {
            return Err(Error::invalid(format!("threshold ratio must be in (0, 1), got {threshold_ratio}")));
        }
        Ok(FramePipeline {
            window_spec: template.window,
            window: make_window(&template.window)?,
            plan: DftPlan::new(template.window.dft_size)?,
            engine: ColumnEngine::new(template, sample_rate)?,
            bank: LogFreqBank::new(template.window.dft_size, sample_rate),
            sample_rate,
            threshold_ratio,
        })
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window_spec
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn threshold_ratio(&self) -> f64 {
        self.threshold_ratio
    }

    pub fn engine(&self) -> &ColumnEngine {
        &self.engine
    }

    pub fn num_frames(&self, x: &TimeSeries) -> usize {
        self.window_spec.num_frames(x.len())
    }

    pub fn frame_offset_seconds(&self) -> f64 {
        frame_center_offset(&self.window_spec, self.sample_rate)
    }

    /// `|STFT|` column of frame `n`.
    pub fn magnitudes(&self, x: &TimeSeries, n: usize) -> Vec<f64> {
        frame_magnitude(x.samples(), n * self.window_spec.hop, &self.window, &self.plan)
    }

    /// Band salience from a complete per-frame stack `Z^(0) ..= Z^(L)`, `L >= 1`.
    pub fn salience_from_layers(&self, layers: &[Vec<f64>]) -> [f64; NUM_PITCHES] {
        let (le, lo) = fusion_pair(layers.len() - 1).expect("at least two layers");
        self.bank.project_column(&fuse_column(&layers[le], &layers[lo]))
    }

    pub fn salience(&self, magnitudes: &[f64], gammas: &[f64]) -> [f64; NUM_PITCHES] {
        self.salience_from_layers(&self.engine.stack(magnitudes, gammas))
    }

    pub fn pick(&self, salience: &[f64; NUM_PITCHES]) -> [bool; NUM_PITCHES] {
        pick_frame(salience, self.threshold_ratio)
    }

    /// Counts of one frame, or `None` if the salience is not finite.
    pub fn frame_counts(&self, salience: &[f64; NUM_PITCHES], truth: &[bool; NUM_PITCHES]) -> Option<EvalCounts> {
        salience
            .iter()
            .all(|v| v.is_finite())
            .then(|| evaluate_frame(&self.pick(salience), truth))
    }
}
