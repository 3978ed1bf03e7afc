//! Combined frequency and periodicity: multiply a frequency-axis layer by a
//! quefrency-axis layer resampled at `q = round(N / k)`, then sum the result
//! into 88 semitone bands.

use crate::error::{Error, Result};
use crate::signal::{Axis, Spectrogram};

pub const NUM_PITCHES: usize = 88;
pub const LOWEST_MIDI: u8 = 21;
pub const HIGHEST_MIDI: u8 = 108;

/// Equal-tempered frequency of a MIDI note, A4 = 440 Hz.
pub fn midi_to_hz(midi: f64) -> f64 {
    440.0 * 2f64.powf((midi - 69.0) / 12.0)
}

/// `round(N / k)` with halves rounded away from zero; `None` when `k == 0`
/// or the result falls outside `0..N`.
pub fn quefrency_index(k: usize, n: usize) -> Option<usize> {
    if k == 0 {
        return None;
    }
    // floor(N/k + 1/2) in integers.
    let q = (2 * n + k) / (2 * k);
    (q < n).then_some(q)
}

#[derive(Clone, Debug)]
pub struct CfpRepresentation {
    values: Spectrogram,
    layers: (usize, usize),
}

impl CfpRepresentation {
    pub fn spectrogram(&self) -> &Spectrogram {
        &self.values
    }

    /// `(l_e, l_o)` of the fused layers.
    pub fn source_layers(&self) -> (usize, usize) {
        self.layers
    }

    pub fn bins(&self) -> usize {
        self.values.bins()
    }

    pub fn frames(&self) -> usize {
        self.values.frames()
    }

    pub fn get(&self, bin: usize, frame: usize) -> f64 {
        self.values.get(bin, frame)
    }

    pub fn column(&self, frame: usize) -> &[f64] {
        self.values.column(frame)
    }
}

/// Fuses one frame: `y[k] = z_freq[k] * z_quef[round(N/k)]` for `1 <= k <= N/2`,
/// mirrored into the upper half, zero at DC and wherever the index is invalid.
pub fn fuse_column(z_freq: &[f64], z_quef: &[f64]) -> Vec<f64> {
    let n = z_freq.len();
    let mut y = vec![0.0; n];
    for k in 1..=n / 2 {
        if let Some(q) = quefrency_index(k, n) {
            y[k] = z_freq[k] * z_quef[q];
        }
    }
    for k in n / 2 + 1..n {
        y[k] = y[n - k];
    }
    y
}

/// Fuses a frequency layer with a quefrency layer. `layers` records which
/// layer indices were used.
pub fn fuse(z_freq: &Spectrogram, z_quef: &Spectrogram, layers: (usize, usize)) -> Result<CfpRepresentation> {
    if z_freq.axis() != Axis::Frequency || z_quef.axis() != Axis::Quefrency {
        return Err(Error::ShapeMismatch(
            "fusion needs a frequency-axis and a quefrency-axis layer".into(),
        ));
    }
    if z_freq.bins() != z_quef.bins() || z_freq.frames() != z_quef.frames() {
        return Err(Error::ShapeMismatch(format!(
            "layer shapes differ: {}x{} vs {}x{}",
            z_freq.bins(),
            z_freq.frames(),
            z_quef.bins(),
            z_quef.frames()
        )));
    }
    if !layers.0.is_multiple_of(2) || layers.1.is_multiple_of(2) {
        return Err(Error::invalid(format!("fusion layers {layers:?} must be (even, odd)")));
    }
    let columns = (0..z_freq.frames())
        .map(|n| fuse_column(z_freq.column(n), z_quef.column(n)))
        .collect();
    let values = Spectrogram::from_columns(
        columns,
        Axis::Frequency,
        z_freq.sample_rate(),
        z_freq.frame_hop_seconds(),
    )?;
    Ok(CfpRepresentation { values, layers })
}

/// 88 rectangular semitone bands (MIDI 21..=108) with edges a quarter tone
/// either side of each center, precomputed as bin ranges for one transform size.
#[derive(Clone, Debug, PartialEq)]
pub struct LogFreqBank {
    /// Half-open bin ranges, one per band.
    ranges: Vec<std::ops::Range<usize>>,
}

impl LogFreqBank {
    /// Bins `1..=N/2` are assigned to the band whose `[lower, upper)` edges
    /// contain the bin's center frequency.
    pub fn new(dft_size: usize, sample_rate: f64) -> Self {
        let step = sample_rate / dft_size as f64;
        let ranges = (0..NUM_PITCHES)
            .map(|b| {
                let (lo, hi) = Self::edges(b);
                // first k with k*step >= lo, first k with k*step >= hi
                let first = |f: f64| ((f / step).ceil() as usize).max(1);
                let start = first(lo).min(dft_size / 2 + 1);
                let end = first(hi).min(dft_size / 2 + 1);
                start..end.max(start)
            })
            .collect();
        LogFreqBank { ranges }
    }

    pub fn center_hz(band: usize) -> f64 {
        midi_to_hz(LOWEST_MIDI as f64 + band as f64)
    }

    /// `[lower, upper)` edges in Hz.
    pub fn edges(band: usize) -> (f64, f64) {
        let m = LOWEST_MIDI as f64 + band as f64;
        (midi_to_hz(m - 0.5), midi_to_hz(m + 0.5))
    }

    pub fn bins_of(&self, band: usize) -> std::ops::Range<usize> {
        self.ranges[band].clone()
    }

    /// Sums one fused column into 88 band values.
    pub fn project_column(&self, y: &[f64]) -> [f64; NUM_PITCHES] {
        let mut out = [0.0; NUM_PITCHES];
        for (o, r) in out.iter_mut().zip(&self.ranges) {
            *o = y[r.clone()].iter().sum();
        }
        out
    }
}

/// 88 x M band salience, stored frame-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Salience {
    values: Vec<[f64; NUM_PITCHES]>,
    frame_hop_seconds: f64,
}

impl Salience {
    pub fn new(values: Vec<[f64; NUM_PITCHES]>, frame_hop_seconds: f64) -> Self {
        Salience { values, frame_hop_seconds }
    }

    pub fn frames(&self) -> usize {
        self.values.len()
    }

    pub fn frame(&self, n: usize) -> &[f64; NUM_PITCHES] {
        &self.values[n]
    }

    pub fn frame_columns(&self) -> &[[f64; NUM_PITCHES]] {
        &self.values
    }

    pub fn get(&self, band: usize, frame: usize) -> f64 {
        self.values[frame][band]
    }

    pub fn frame_hop_seconds(&self) -> f64 {
        self.frame_hop_seconds
    }
}

pub fn project_to_bands(y: &CfpRepresentation, bank: &LogFreqBank) -> Salience {
    let values = (0..y.frames()).map(|n| bank.project_column(y.column(n))).collect();
    Salience::new(values, y.spectrogram().frame_hop_seconds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(cols: Vec<Vec<f64>>, axis: Axis) -> Spectrogram {
        Spectrogram::from_columns(cols, axis, 1000.0, 0.01).unwrap()
    }

    #[test]
    fn quefrency_index_examples() {
        assert_eq!(quefrency_index(250, 1000), Some(4));
        assert_eq!(quefrency_index(400, 1000), Some(3));
        assert_eq!(quefrency_index(3, 1000), Some(333));
        assert_eq!(quefrency_index(0, 1000), None);
        assert_eq!(quefrency_index(1, 1000), None);
        assert_eq!(quefrency_index(2, 1000), Some(500));
        // 7939 / 2 = 3969.5 rounds up
        assert_eq!(quefrency_index(2, 7939), Some(3970));
    }

    #[test]
    fn fusion_annihilation_and_identity() {
        let n = 16;
        let zf: Vec<f64> = (0..n).map(|k| (k as f64).sin().abs()).collect();
        let zero = spec(vec![vec![0.0; n]], Axis::Frequency);
        let ones = spec(vec![vec![1.0; n]], Axis::Quefrency);
        let y = fuse(&zero, &ones, (0, 1)).unwrap();
        assert!(y.spectrogram().values().iter().all(|&v| v == 0.0));
        let y = fuse(&spec(vec![zf.clone()], Axis::Frequency), &ones, (2, 1)).unwrap();
        assert_eq!(y.get(0, 0), 0.0);
        assert_eq!(y.get(1, 0), 0.0);
        for k in 2..=n / 2 {
            assert_eq!(y.get(k, 0), zf[k]);
        }
        for k in n / 2 + 1..n {
            assert_eq!(y.get(k, 0), y.get(n - k, 0));
        }
        assert_eq!(y.source_layers(), (2, 1));
    }

    #[test]
    fn fusion_rejects_bad_inputs() {
        let f = spec(vec![vec![1.0; 8]], Axis::Frequency);
        let q = spec(vec![vec![1.0; 8]], Axis::Quefrency);
        let q2 = spec(vec![vec![1.0; 10]], Axis::Quefrency);
        assert!(fuse(&q, &f, (0, 1)).is_err());
        assert!(fuse(&f, &q2, (0, 1)).is_err());
        assert!(fuse(&f, &q, (1, 1)).is_err());
    }

    #[test]
    fn bank_layout() {
        for b in 1..NUM_PITCHES {
            assert!(LogFreqBank::center_hz(b) > LogFreqBank::center_hz(b - 1));
            assert!((LogFreqBank::edges(b).0 - LogFreqBank::edges(b - 1).1).abs() < 1e-9);
        }
        assert!((LogFreqBank::center_hz(0) - 27.5).abs() < 1e-12);
        assert!((LogFreqBank::center_hz(48) - 440.0).abs() < 1e-12);
        let bank = LogFreqBank::new(7939, 44100.0);
        for b in 1..NUM_PITCHES {
            assert_eq!(bank.bins_of(b - 1).end, bank.bins_of(b).start);
        }
    }

    #[test]
    fn single_bin_at_440_lights_only_a4() {
        // 1 Hz bins: bin 440 is exactly 440 Hz.
        let n = 8192;
        let mut col = vec![0.0; n];
        col[440] = 3.0;
        let y = CfpRepresentation { values: spec(vec![col], Axis::Frequency), layers: (0, 1) };
        let bank = LogFreqBank::new(n, n as f64);
        let s = project_to_bands(&y, &bank);
        for b in 0..NUM_PITCHES {
            assert_eq!(s.get(b, 0), if b == 69 - 21 { 3.0 } else { 0.0 });
        }
        let zero = CfpRepresentation { values: spec(vec![vec![0.0; n]], Axis::Frequency), layers: (0, 1) };
        assert!(project_to_bands(&zero, &bank).frame(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn band_sum_accounts_for_covered_bins() {
        let n = 4096;
        let fs = 8192.0; // 2 Hz bins, Nyquist 4096 Hz
        let bank = LogFreqBank::new(n, fs);
        let col: Vec<f64> = (0..n).map(|k| ((k * 7919) % 13) as f64).collect();
        let total_bands: f64 = bank.project_column(&col).iter().sum();
        let lo = LogFreqBank::edges(0).0;
        let hi = LogFreqBank::edges(NUM_PITCHES - 1).1;
        let covered: f64 = (1..=n / 2)
            .filter(|&k| {
                let f = k as f64 * fs / n as f64;
                f >= lo && f < hi
            })
            .map(|k| col[k])
            .sum();
        let all_valid: f64 = col[1..=n / 2].iter().sum();
        assert!((total_bands - covered).abs() < 1e-9);
        assert!(total_bands <= all_valid);
    }

    proptest! {
        #[test]
        fn quefrency_index_non_increasing(n in 2usize..5000) {
            let mut prev = usize::MAX;
            for k in 2..=n / 2 {
                let q = quefrency_index(k, n).unwrap();
                prop_assert!(q <= prev);
                let exact = n as f64 / k as f64;
                prop_assert!((q as f64 - exact).abs() <= 0.5);
                prev = q;
            }
        }

        #[test]
        fn fusion_nonnegative_and_monotone(
            zf in prop::collection::vec(0.0f64..10.0, 32),
            zq in prop::collection::vec(0.0f64..10.0, 32),
            bump_at in 0usize..32,
        ) {
            let y = fuse_column(&zf, &zq);
            prop_assert!(y.iter().all(|&v| v >= 0.0));
            for k in 1..=16 {
                if zf[k] == 0.0 { prop_assert_eq!(y[k], 0.0); }
            }
            let mut zf2 = zf.clone();
            zf2[bump_at] += 1.0;
            let y2 = fuse_column(&zf2, &zq);
            for (a, b) in y2.iter().zip(&y) {
                prop_assert!(a >= b);
            }
        }

        #[test]
        fn projection_linear(
            a in prop::collection::vec(0.0f64..5.0, 512),
            b in prop::collection::vec(0.0f64..5.0, 512),
            s in 0.0f64..4.0,
        ) {
            let bank = LogFreqBank::new(512, 4096.0);
            let pa = bank.project_column(&a);
            let pb = bank.project_column(&b);
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            let pm = bank.project_column(&mix);
            for i in 0..NUM_PITCHES {
                prop_assert!((pm[i] - (pa[i] + s * pb[i])).abs() <= 1e-9 * (1.0 + pm[i]));
            }
        }
    }
}
