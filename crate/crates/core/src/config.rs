//! Flat `key = value` run configuration shared by every CLI command.
//!
//! Lines are `key = value`; `#` starts a comment. Optional values accept
//! `none`. Lists are comma separated. Every key can also be passed as a
//! `--key value` flag, which takes precedence over the file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::degrade::{ButterworthSpec, DegradeSpec, FilterKind, ImpulseSpec, SimulationRecipe};
use crate::error::{Error, Result};
use crate::eval::{AnnotationUnits, DEFAULT_THRESHOLD_RATIO};
use crate::io::WavFormat;
use crate::layers::{
    MlcConfig, DEFAULT_CUTOFF_FREQUENCY_HZ, DEFAULT_CUTOFF_QUEFRENCY_S, DEFAULT_DFT_SIZE, DEFAULT_HOP_SECONDS,
};
use crate::search::{linear_grid, SearchSpace, SgdConfig};
use crate::signal::{WindowKind, WindowSpec};

/// Every recognised key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("window", "analysis window: blackman-harris or rectangular"),
    ("dft_size", "DFT size N in samples"),
    ("window_length", "window length in samples, or `auto` for the DFT size"),
    ("hop_seconds", "frame hop in seconds"),
    ("gammas", "comma-separated exponents gamma_0..gamma_L"),
    ("cutoff_frequency_hz", "frequency-layer cutoff in Hz, or `none`"),
    ("cutoff_quefrency_s", "quefrency-layer cutoff in seconds, or `none`"),
    ("threshold_ratio", "peak-picking threshold relative to the frame maximum"),
    ("seed", "seed for every random generator"),
    ("wav_format", "output WAV sample format: float32 or pcm16"),
    ("dump_max_hz", "highest frequency written for frequency-axis layers by analyze, or `none`"),
    ("synth_sample_rate", "simulation sample rate in Hz"),
    ("synth_duration_s", "simulation length in seconds"),
    ("square_f0_hz", "square-wave repetition rate in Hz"),
    ("square_duty", "square-wave duty cycle in (0, 1)"),
    ("synth_filter_order", "Butterworth order of the simulation filters"),
    ("synth_filter_cutoff_hz", "cutoff of the simulation filters in Hz"),
    ("synth_pink_snr_db", "pink-noise SNR of the noisy mixture in dB, or `none`"),
    ("synth_impulse_at_s", "impulse time of the noisy mixture in seconds, or `none`"),
    ("synth_impulse_amplitude", "impulse amplitude, or `auto` for ten times the peak"),
    ("degrade_filter", "degrade filter: none, lowpass or highpass"),
    ("degrade_filter_order", "Butterworth order of the degrade filter"),
    ("degrade_cutoff_hz", "degrade filter cutoff in Hz"),
    ("degrade_snr_db", "degrade pink-noise SNR in dB, or `none`"),
    ("degrade_impulse_at_s", "degrade impulse time in seconds, or `none`"),
    ("degrade_impulse_amplitude", "degrade impulse amplitude, or `auto`"),
    ("search_depth", "stack depth L searched by brute and greedy"),
    ("brute_grid", "brute-force grid per layer as start:stop:step, or a comma list"),
    ("greedy_grid", "greedy grid per layer as start:stop:step, or a comma list"),
    ("greedy_terminal_gamma", "fixed exponent of the deepest layer during greedy search"),
    ("sgd_learning_rate", "SGD learning rate"),
    ("sgd_batch_size", "SGD batch size in frames"),
    ("sgd_epochs", "SGD epochs per fold"),
    ("sgd_folds", "number of cross-validation folds"),
    ("sgd_fd_step", "relative finite-difference step for exponent gradients"),
    ("sgd_init_gammas", "initial exponents, or `auto`"),
    ("dataset_dir", "directory of paired X.wav / X.txt files, or `none`"),
    ("annotation_units", "pitch units of annotation files: hz or midi"),
    ("output_dir", "directory receiving all outputs"),
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub window: WindowKind,
    pub dft_size: usize,
    pub window_length: Option<usize>,
    pub hop_seconds: f64,
    pub gammas: Vec<f64>,
    pub cutoff_frequency_hz: Option<f64>,
    pub cutoff_quefrency_s: Option<f64>,
    pub threshold_ratio: f64,
    pub seed: u64,
    pub wav_format: WavFormat,
    pub dump_max_hz: Option<f64>,
    pub synth_sample_rate: f64,
    pub synth_duration_s: f64,
    pub square_f0_hz: f64,
    pub square_duty: f64,
    pub synth_filter_order: usize,
    pub synth_filter_cutoff_hz: f64,
    pub synth_pink_snr_db: Option<f64>,
    pub synth_impulse_at_s: Option<f64>,
    pub synth_impulse_amplitude: Option<f64>,
    pub degrade_filter: Option<FilterKind>,
    pub degrade_filter_order: usize,
    pub degrade_cutoff_hz: f64,
    pub degrade_snr_db: Option<f64>,
    pub degrade_impulse_at_s: Option<f64>,
    pub degrade_impulse_amplitude: Option<f64>,
    pub search_depth: usize,
    pub brute_grid: Vec<f64>,
    pub greedy_grid: Vec<f64>,
    pub greedy_terminal_gamma: f64,
    pub sgd_learning_rate: f64,
    pub sgd_batch_size: usize,
    pub sgd_epochs: usize,
    pub sgd_folds: usize,
    pub sgd_fd_step: f64,
    pub sgd_init_gammas: Option<Vec<f64>>,
    pub dataset_dir: Option<PathBuf>,
    pub annotation_units: AnnotationUnits,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let recipe = SimulationRecipe::default();
        let sgd = SgdConfig::new(1);
        let mut brute_grid = linear_grid(0.1, 0.9, 0.1);
        brute_grid.push(1.0);
        RunConfig {
            window: WindowKind::BlackmanHarris,
            dft_size: DEFAULT_DFT_SIZE,
            window_length: None,
            hop_seconds: DEFAULT_HOP_SECONDS,
            gammas: vec![0.24, 0.6, 1.0],
            cutoff_frequency_hz: Some(DEFAULT_CUTOFF_FREQUENCY_HZ),
            cutoff_quefrency_s: Some(DEFAULT_CUTOFF_QUEFRENCY_S),
            threshold_ratio: DEFAULT_THRESHOLD_RATIO,
            seed: 0,
            wav_format: WavFormat::Float32,
            dump_max_hz: None,
            synth_sample_rate: recipe.sample_rate,
            synth_duration_s: recipe.duration_s,
            square_f0_hz: recipe.square_f0_hz,
            square_duty: recipe.square_duty,
            synth_filter_order: recipe.filter_order,
            synth_filter_cutoff_hz: recipe.filter_cutoff_hz,
            synth_pink_snr_db: recipe.pink_snr_db,
            synth_impulse_at_s: recipe.impulse.map(|i| i.at_seconds),
            synth_impulse_amplitude: None,
            degrade_filter: None,
            degrade_filter_order: 4,
            degrade_cutoff_hz: 1000.0,
            degrade_snr_db: None,
            degrade_impulse_at_s: None,
            degrade_impulse_amplitude: None,
            search_depth: 1,
            brute_grid,
            greedy_grid: linear_grid(0.01, 0.99, 0.01),
            greedy_terminal_gamma: 1.0,
            sgd_learning_rate: sgd.learning_rate,
            sgd_batch_size: sgd.batch_size,
            sgd_epochs: sgd.max_epochs,
            sgd_folds: sgd.folds,
            sgd_fd_step: sgd.fd_step,
            sgd_init_gammas: None,
            dataset_dir: None,
            annotation_units: AnnotationUnits::Hz,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::invalid(format!("{key}: cannot parse `{v}`: {e}")))
}

fn optional<T: std::str::FromStr>(key: &str, v: &str, none: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if v.eq_ignore_ascii_case(none) {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse(key, s.trim())).collect()
}

/// `start:stop:step` or a comma list.
fn grid(key: &str, v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) =
                (parse(key, start.trim())?, parse(key, stop.trim())?, parse(key, step.trim())?);
            if !(step > 0.0 && stop >= start) {
                return Err(Error::invalid(format!("{key}: `{v}` is not an increasing range")));
            }
            Ok(linear_grid(start, stop, step))
        }
        [_] => list(key, v),
        _ => Err(Error::invalid(format!("{key}: expected start:stop:step or a list, got `{v}`"))),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",")
}

fn show<T: ToString>(v: &Option<T>, none: &str) -> String {
    v.as_ref().map_or(none.to_string(), T::to_string)
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let v = v.trim();
        match key {
            "window" => self.window = v.parse()?,
            "dft_size" => self.dft_size = parse(key, v)?,
            "window_length" => self.window_length = optional(key, v, "auto")?,
            "hop_seconds" => self.hop_seconds = parse(key, v)?,
            "gammas" => self.gammas = list(key, v)?,
            "cutoff_frequency_hz" => self.cutoff_frequency_hz = optional(key, v, "none")?,
            "cutoff_quefrency_s" => self.cutoff_quefrency_s = optional(key, v, "none")?,
            "threshold_ratio" => self.threshold_ratio = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "wav_format" => self.wav_format = v.parse()?,
            "dump_max_hz" => self.dump_max_hz = optional(key, v, "none")?,
            "synth_sample_rate" => self.synth_sample_rate = parse(key, v)?,
            "synth_duration_s" => self.synth_duration_s = parse(key, v)?,
            "square_f0_hz" => self.square_f0_hz = parse(key, v)?,
            "square_duty" => self.square_duty = parse(key, v)?,
            "synth_filter_order" => self.synth_filter_order = parse(key, v)?,
            "synth_filter_cutoff_hz" => self.synth_filter_cutoff_hz = parse(key, v)?,
            "synth_pink_snr_db" => self.synth_pink_snr_db = optional(key, v, "none")?,
            "synth_impulse_at_s" => self.synth_impulse_at_s = optional(key, v, "none")?,
            "synth_impulse_amplitude" => self.synth_impulse_amplitude = optional(key, v, "auto")?,
            "degrade_filter" => {
                self.degrade_filter = match v.to_ascii_lowercase().as_str() {
                    "none" => None,
                    "lowpass" => Some(FilterKind::Lowpass),
                    "highpass" => Some(FilterKind::Highpass),
                    other => return Err(Error::invalid(format!("{key}: unknown filter `{other}`"))),
                }
            }
            "degrade_filter_order" => self.degrade_filter_order = parse(key, v)?,
            "degrade_cutoff_hz" => self.degrade_cutoff_hz = parse(key, v)?,
            "degrade_snr_db" => self.degrade_snr_db = optional(key, v, "none")?,
            "degrade_impulse_at_s" => self.degrade_impulse_at_s = optional(key, v, "none")?,
            "degrade_impulse_amplitude" => self.degrade_impulse_amplitude = optional(key, v, "auto")?,
            "search_depth" => self.search_depth = parse(key, v)?,
            "brute_grid" => self.brute_grid = grid(key, v)?,
            "greedy_grid" => self.greedy_grid = grid(key, v)?,
            "greedy_terminal_gamma" => self.greedy_terminal_gamma = parse(key, v)?,
            "sgd_learning_rate" => self.sgd_learning_rate = parse(key, v)?,
            "sgd_batch_size" => self.sgd_batch_size = parse(key, v)?,
            "sgd_epochs" => self.sgd_epochs = parse(key, v)?,
            "sgd_folds" => self.sgd_folds = parse(key, v)?,
            "sgd_fd_step" => self.sgd_fd_step = parse(key, v)?,
            "sgd_init_gammas" => {
                self.sgd_init_gammas = if v.eq_ignore_ascii_case("auto") { None } else { Some(list(key, v)?) }
            }
            "dataset_dir" => {
                self.dataset_dir = if v.eq_ignore_ascii_case("none") { None } else { Some(PathBuf::from(v)) }
            }
            "annotation_units" => {
                self.annotation_units = match v.to_ascii_lowercase().as_str() {
                    "hz" => AnnotationUnits::Hz,
                    "midi" => AnnotationUnits::Midi,
                    other => return Err(Error::invalid(format!("{key}: unknown units `{other}`"))),
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(v),
            _ => return Err(Error::invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Textual value of `key` in the form `set` accepts.
    pub fn get(&self, key: &str) -> Result<String> {
        Ok(match key {
            "window" => self.window.to_string(),
            "dft_size" => self.dft_size.to_string(),
            "window_length" => show(&self.window_length, "auto"),
            "hop_seconds" => self.hop_seconds.to_string(),
            "gammas" => join(&self.gammas),
            "cutoff_frequency_hz" => show(&self.cutoff_frequency_hz, "none"),
            "cutoff_quefrency_s" => show(&self.cutoff_quefrency_s, "none"),
            "threshold_ratio" => self.threshold_ratio.to_string(),
            "seed" => self.seed.to_string(),
            "wav_format" => match self.wav_format {
                WavFormat::Pcm16 => "pcm16".into(),
                WavFormat::Float32 => "float32".into(),
            },
            "dump_max_hz" => show(&self.dump_max_hz, "none"),
            "synth_sample_rate" => self.synth_sample_rate.to_string(),
            "synth_duration_s" => self.synth_duration_s.to_string(),
            "square_f0_hz" => self.square_f0_hz.to_string(),
            "square_duty" => self.square_duty.to_string(),
            "synth_filter_order" => self.synth_filter_order.to_string(),
            "synth_filter_cutoff_hz" => self.synth_filter_cutoff_hz.to_string(),
            "synth_pink_snr_db" => show(&self.synth_pink_snr_db, "none"),
            "synth_impulse_at_s" => show(&self.synth_impulse_at_s, "none"),
            "synth_impulse_amplitude" => show(&self.synth_impulse_amplitude, "auto"),
            "degrade_filter" => match self.degrade_filter {
                None => "none".into(),
                Some(FilterKind::Lowpass) => "lowpass".into(),
                Some(FilterKind::Highpass) => "highpass".into(),
            },
            "degrade_filter_order" => self.degrade_filter_order.to_string(),
            "degrade_cutoff_hz" => self.degrade_cutoff_hz.to_string(),
            "degrade_snr_db" => show(&self.degrade_snr_db, "none"),
            "degrade_impulse_at_s" => show(&self.degrade_impulse_at_s, "none"),
            "degrade_impulse_amplitude" => show(&self.degrade_impulse_amplitude, "auto"),
            "search_depth" => self.search_depth.to_string(),
            "brute_grid" => join(&self.brute_grid),
            "greedy_grid" => join(&self.greedy_grid),
            "greedy_terminal_gamma" => self.greedy_terminal_gamma.to_string(),
            "sgd_learning_rate" => self.sgd_learning_rate.to_string(),
            "sgd_batch_size" => self.sgd_batch_size.to_string(),
            "sgd_epochs" => self.sgd_epochs.to_string(),
            "sgd_folds" => self.sgd_folds.to_string(),
            "sgd_fd_step" => self.sgd_fd_step.to_string(),
            "sgd_init_gammas" => self.sgd_init_gammas.as_deref().map_or("auto".into(), join),
            "dataset_dir" => self.dataset_dir.as_ref().map_or("none".into(), |p| p.display().to_string()),
            "annotation_units" => match self.annotation_units {
                AnnotationUnits::Hz => "hz".into(),
                AnnotationUnits::Midi => "midi".into(),
            },
            "output_dir" => self.output_dir.display().to_string(),
            _ => return Err(Error::invalid(format!("unknown config key `{key}`"))),
        })
    }

    pub fn parse_text(text: &str, origin: &Path) -> Result<Self> {
        let mut config = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { path: origin.to_path_buf(), line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            config.set(key.trim(), value).map_err(|e| err(e.to_string()))?;
        }
        Ok(config)
    }

    pub fn read(path: &Path) -> Result<Self> {
        RunConfig::parse_text(&std::fs::read_to_string(path)?, path)
    }

    /// Every key in `KEYS` order; `parse_text` of this reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, help) in KEYS {
            let _ = writeln!(out, "# {help}\n{key} = {}", self.get(key).expect("listed key"));
        }
        out
    }

    /// Checks everything that does not depend on an input file's sample rate.
    pub fn validate(&self) -> Result<()> {
        if !(self.hop_seconds > 0.0 && self.hop_seconds.is_finite()) {
            return Err(Error::invalid(format!("hop_seconds must be positive, got {}", self.hop_seconds)));
        }
        // the hop in samples is only known once the input's sample rate is
        let window = WindowSpec {
            kind: self.window,
            window_length: self.window_length.unwrap_or(self.dft_size),
            dft_size: self.dft_size,
            hop: 1,
        };
        window.validate()?;
        MlcConfig { window, gammas: self.gammas.clone(), cutoff_frequency_hz: None, cutoff_quefrency_s: None }
            .validate(1.0)?;
        for (key, v) in [("cutoff_frequency_hz", self.cutoff_frequency_hz), ("cutoff_quefrency_s", self.cutoff_quefrency_s)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::invalid(format!("{key} must be nonnegative, got {v}")));
                }
            }
        }
        if !(self.threshold_ratio > 0.0 && self.threshold_ratio < 1.0) {
            return Err(Error::invalid(format!("threshold_ratio must be in (0, 1), got {}", self.threshold_ratio)));
        }
        if let Some(h) = self.dump_max_hz {
            if !(h > 0.0) {
                return Err(Error::invalid(format!("dump_max_hz must be positive, got {h}")));
            }
        }
        let recipe = self.recipe();
        if !(recipe.sample_rate > 0.0 && recipe.duration_s > 0.0) {
            return Err(Error::invalid("synth sample rate and duration must be positive"));
        }
        if !(recipe.square_duty > 0.0 && recipe.square_duty < 1.0) {
            return Err(Error::invalid(format!("square_duty must be in (0, 1), got {}", recipe.square_duty)));
        }
        for spec in [
            ButterworthSpec::lowpass(recipe.filter_order, recipe.filter_cutoff_hz),
            ButterworthSpec::highpass(recipe.filter_order, recipe.filter_cutoff_hz),
        ] {
            crate::degrade::SosFilter::butterworth(&spec, recipe.sample_rate)?;
        }
        if self.search_depth == 0 || self.search_depth > crate::layers::MAX_LAYERS {
            return Err(Error::invalid(format!("search_depth must be in 1..={}", crate::layers::MAX_LAYERS)));
        }
        SearchSpace::new(vec![self.brute_grid.clone(); 2])?;
        SearchSpace::new(vec![self.greedy_grid.clone(), vec![self.greedy_terminal_gamma]])?;
        self.sgd_config().validate()?;
        if self.sgd_config().init_gammas.len() != self.search_depth + 1 {
            return Err(Error::invalid("sgd_init_gammas must have search_depth + 1 entries"));
        }
        Ok(())
    }

    /// Window in samples at `sample_rate`.
    pub fn window_spec(&self, sample_rate: f64) -> Result<WindowSpec> {
        let hop = (self.hop_seconds * sample_rate).round();
        if !(hop >= 1.0) {
            return Err(Error::invalid(format!(
                "hop of {} s is shorter than one sample at {sample_rate} Hz",
                self.hop_seconds
            )));
        }
        Ok(WindowSpec {
            kind: self.window,
            window_length: self.window_length.unwrap_or(self.dft_size),
            dft_size: self.dft_size,
            hop: hop as usize,
        })
    }

    /// Analysis configuration for input at `sample_rate`, validated.
    pub fn mlc_config(&self, sample_rate: f64) -> Result<MlcConfig> {
        let config = MlcConfig {
            window: self.window_spec(sample_rate)?,
            gammas: self.gammas.clone(),
            cutoff_frequency_hz: self.cutoff_frequency_hz,
            cutoff_quefrency_s: self.cutoff_quefrency_s,
        };
        config.validate(sample_rate)?;
        Ok(config)
    }

    pub fn recipe(&self) -> SimulationRecipe {
        SimulationRecipe {
            sample_rate: self.synth_sample_rate,
            duration_s: self.synth_duration_s,
            square_f0_hz: self.square_f0_hz,
            square_duty: self.square_duty,
            filter_order: self.synth_filter_order,
            filter_cutoff_hz: self.synth_filter_cutoff_hz,
            pink_snr_db: self.synth_pink_snr_db,
            impulse: self
                .synth_impulse_at_s
                .map(|at_seconds| ImpulseSpec { at_seconds, amplitude: self.synth_impulse_amplitude }),
            seed: self.seed,
        }
    }

    pub fn degrade_spec(&self) -> DegradeSpec {
        DegradeSpec {
            filter: self.degrade_filter.map(|kind| ButterworthSpec {
                order: self.degrade_filter_order,
                cutoff_hz: self.degrade_cutoff_hz,
                kind,
            }),
            pink_snr_db: self.degrade_snr_db,
            impulse: self
                .degrade_impulse_at_s
                .map(|at_seconds| ImpulseSpec { at_seconds, amplitude: self.degrade_impulse_amplitude }),
            seed: self.seed,
        }
    }

    pub fn brute_space(&self) -> SearchSpace {
        SearchSpace { grids: vec![self.brute_grid.clone(); self.search_depth + 1] }
    }

    pub fn greedy_space(&self) -> SearchSpace {
        let mut grids = vec![self.greedy_grid.clone(); self.search_depth];
        grids.push(vec![self.greedy_terminal_gamma]);
        SearchSpace { grids }
    }

    pub fn sgd_config(&self) -> SgdConfig {
        let defaults = SgdConfig::new(self.search_depth);
        SgdConfig {
            learning_rate: self.sgd_learning_rate,
            batch_size: self.sgd_batch_size,
            max_epochs: self.sgd_epochs,
            init_gammas: self.sgd_init_gammas.clone().unwrap_or(defaults.init_gammas),
            fd_step: self.sgd_fd_step,
            seed: self.seed,
            folds: self.sgd_folds,
        }
    }
}
