//! Multi-layered cepstrum (MLC) and combined frequency/periodicity (CFP)
//! salience for multiple fundamental-frequency estimation.
//!
//! The analysis chain is
//! [`stft_magnitude`](signal::stft_magnitude) →
//! [`compute_stack`](layers::compute_stack) → [`fuse`](cfp::fuse) →
//! [`project_to_bands`](cfp::project_to_bands) →
//! [`pick_pitches`](eval::pick_pitches), wrapped by
//! [`pipeline::analyze`] and [`pipeline::estimate`]. The [`degrade`]
//! module synthesizes and contaminates test signals, [`eval`] scores piano
//! rolls, and [`search`] tunes the exponents.

pub mod cfp;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod degrade;
pub mod error;
pub mod eval;
pub mod harness;
pub mod io;
pub mod layers;
pub mod pipeline;
pub mod search;
pub mod signal;

pub use error::{Error, Result};
pub use layers::{LayerParams, LayerStack, MlcConfig};
pub use signal::{Spectrogram, TimeSeries, WindowKind, WindowSpec};
