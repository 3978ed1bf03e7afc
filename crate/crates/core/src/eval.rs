//! Frame-level multi-pitch decisions, ground-truth ingestion and
//! precision / recall / F-score.

use std::fmt;
use std::io::Write;
use std::ops::{Add, AddAssign};
use std::path::Path;

use crate::cfp::{midi_to_hz, Salience, HIGHEST_MIDI, LOWEST_MIDI, NUM_PITCHES};
use crate::error::{Error, Result};

/// Relative peak threshold used when none is given.
pub const DEFAULT_THRESHOLD_RATIO: f64 = 0.1;

/// 88 x M boolean activity grid over MIDI 21..=108.
#[derive(Clone, Debug, PartialEq)]
pub struct PianoRoll {
    active: Vec<[bool; NUM_PITCHES]>,
    frame_hop_seconds: f64,
}

impl PianoRoll {
    pub fn new(frames: usize, frame_hop_seconds: f64) -> Self {
        PianoRoll { active: vec![[false; NUM_PITCHES]; frames], frame_hop_seconds }
    }

    pub fn from_frames(active: Vec<[bool; NUM_PITCHES]>, frame_hop_seconds: f64) -> Self {
        PianoRoll { active, frame_hop_seconds }
    }

    pub fn frames(&self) -> usize {
        self.active.len()
    }

    pub fn frame_hop_seconds(&self) -> f64 {
        self.frame_hop_seconds
    }

    pub fn frame(&self, n: usize) -> &[bool; NUM_PITCHES] {
        &self.active[n]
    }

    pub fn frame_rows(&self) -> &[[bool; NUM_PITCHES]] {
        &self.active
    }

    pub fn is_active(&self, band: usize, frame: usize) -> bool {
        self.active[frame][band]
    }

    pub fn set(&mut self, band: usize, frame: usize, on: bool) {
        self.active[frame][band] = on;
    }

    /// Marks a MIDI note active; returns `false` (and does nothing) when it
    /// lies outside the piano range.
    pub fn set_midi(&mut self, midi: i32, frame: usize) -> bool {
        match midi_band(midi) {
            Some(b) => {
                self.active[frame][b] = true;
                true
            }
            None => false,
        }
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().flatten().filter(|&&a| a).count()
    }

    /// Frames `[start, end)` as a new roll.
    pub fn slice(&self, start: usize, end: usize) -> PianoRoll {
        PianoRoll::from_frames(self.active[start..end].to_vec(), self.frame_hop_seconds)
    }

    /// Writes `time f0 f0 ...` lines with active pitches at band-center frequencies.
    pub fn write_text(&self, mut out: impl Write, frame_offset_seconds: f64) -> Result<()> {
        for (n, frame) in self.active.iter().enumerate() {
            write!(out, "{:.3}", frame_offset_seconds + n as f64 * self.frame_hop_seconds)?;
            for (b, _) in frame.iter().enumerate().filter(|(_, &a)| a) {
                write!(out, " {:.2}", midi_to_hz((LOWEST_MIDI as usize + b) as f64))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// CSV dump: one row per MIDI pitch, one 0/1 column per frame.
    pub fn write_csv(&self, out: impl Write, frame_offset_seconds: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["midi".to_string()];
        header.extend(
            (0..self.frames())
                .map(|n| format!("{:.4}", frame_offset_seconds + n as f64 * self.frame_hop_seconds)),
        );
        w.write_record(&header)?;
        for b in 0..NUM_PITCHES {
            let mut row = vec![(LOWEST_MIDI as usize + b).to_string()];
            row.extend(self.active.iter().map(|f| if f[b] { "1" } else { "0" }.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn midi_band(midi: i32) -> Option<usize> {
    (LOWEST_MIDI as i32..=HIGHEST_MIDI as i32)
        .contains(&midi)
        .then(|| (midi - LOWEST_MIDI as i32) as usize)
}

pub fn hz_to_midi(hz: f64) -> Result<f64> {
    if !(hz > 0.0 && hz.is_finite()) {
        return Err(Error::invalid(format!("frequency must be positive, got {hz}")));
    }
    Ok(69.0 + 12.0 * (hz / 440.0).log2())
}

fn check_ratio(threshold_ratio: f64) -> Result<()> {
    if threshold_ratio > 0.0 && threshold_ratio < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("threshold ratio must be in (0, 1), got {threshold_ratio}")))
    }
}

/// Active bands of one frame: local maxima across bands (strict, one-sided
/// at the edges) that reach `threshold_ratio` of the frame maximum.
pub fn pick_frame(salience: &[f64; NUM_PITCHES], threshold_ratio: f64) -> [bool; NUM_PITCHES] {
    let mut out = [false; NUM_PITCHES];
    let max = salience.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return out;
    }
    let floor = threshold_ratio * max;
    for b in 0..NUM_PITCHES {
        let s = salience[b];
        let left = b == 0 || s > salience[b - 1];
        let right = b == NUM_PITCHES - 1 || s > salience[b + 1];
        out[b] = s > 0.0 && s >= floor && left && right;
    }
    out
}

pub fn pick_pitches(salience: &Salience, threshold_ratio: f64) -> Result<PianoRoll> {
    check_ratio(threshold_ratio)?;
    let active = salience.frame_columns().iter().map(|f| pick_frame(f, threshold_ratio)).collect();
    Ok(PianoRoll::from_frames(active, salience.frame_hop_seconds()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AnnotationUnits {
    #[default]
    Hz,
    Midi,
}

/// Parsed annotation: per line, a time in seconds and zero or more pitches.
/// Pitch values of 0 mean silence.
#[derive(Clone, Debug, PartialEq)]
pub struct Annotation {
    frames: Vec<(f64, Vec<f64>)>,
    units: AnnotationUnits,
}

/// Result of mapping an annotation onto an analysis frame grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub roll: PianoRoll,
    /// Pitches that fell outside MIDI 21..=108.
    pub dropped: usize,
}

impl Annotation {
    pub fn parse(text: &str, units: AnnotationUnits, origin: &Path) -> Result<Self> {
        let mut frames = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { path: origin.to_path_buf(), line: i + 1, message };
            let mut fields = line.split_whitespace().map(|f| {
                f.parse::<f64>().map_err(|e| parse_err(format!("`{f}`: {e}")))
            });
            let time = fields.next().transpose()?.ok_or_else(|| parse_err("empty line".into()))?;
            let pitches = fields.collect::<Result<Vec<f64>>>()?;
            if !time.is_finite() || time < 0.0 {
                return Err(parse_err(format!("invalid time {time}")));
            }
            if let Some(p) = pitches.iter().find(|p| !p.is_finite() || **p < 0.0) {
                return Err(parse_err(format!("invalid pitch {p}")));
            }
            if let Some((prev, _)) = frames.last() {
                if time < *prev {
                    return Err(parse_err(format!("time {time} goes backwards")));
                }
            }
            frames.push((time, pitches));
        }
        if frames.is_empty() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: 0,
                message: "annotation file has no frames".into(),
            });
        }
        Ok(Annotation { frames, units })
    }

    pub fn read(path: &Path, units: AnnotationUnits) -> Result<Self> {
        Annotation::parse(&std::fs::read_to_string(path)?, units, path)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Frame times in seconds.
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|(t, _)| *t).collect()
    }

    /// Median positive gap between frame times (0 for a single frame).
    pub fn spacing(&self) -> f64 {
        let mut gaps: Vec<f64> = self.frames.windows(2).map(|w| w[1].0 - w[0].0).filter(|g| *g > 0.0).collect();
        if gaps.is_empty() {
            return 0.0;
        }
        gaps.sort_by(f64::total_cmp);
        gaps[gaps.len() / 2]
    }

    /// Index of the annotation frame nearest to `t` (ties go to the earlier one).
    fn nearest(&self, t: f64) -> usize {
        let after = self.frames.partition_point(|(time, _)| *time < t);
        if after == 0 {
            0
        } else if after == self.frames.len() || t - self.frames[after - 1].0 <= self.frames[after].0 - t {
            after - 1
        } else {
            after
        }
    }

    /// Resamples onto `num_frames` analysis frames at times
    /// `offset + n * hop` by nearest-frame lookup. Frames farther than one
    /// annotation step (or one analysis hop, whichever is larger) from every
    /// annotation are left silent.
    pub fn to_piano_roll(&self, frame_hop_seconds: f64, frame_offset_seconds: f64, num_frames: usize) -> Result<GroundTruth> {
        if !(frame_hop_seconds > 0.0) {
            return Err(Error::invalid(format!("frame hop must be positive, got {frame_hop_seconds}")));
        }
        let reach = self.spacing().max(frame_hop_seconds);
        let mut roll = PianoRoll::new(num_frames, frame_hop_seconds);
        let mut dropped = 0;
        for n in 0..num_frames {
            let t = frame_offset_seconds + n as f64 * frame_hop_seconds;
            let (time, pitches) = &self.frames[self.nearest(t)];
            if (time - t).abs() > reach + 1e-9 {
                continue;
            }
            for &p in pitches.iter().filter(|p| **p > 0.0) {
                let midi = match self.units {
                    AnnotationUnits::Hz => hz_to_midi(p)?,
                    AnnotationUnits::Midi => p,
                };
                if !roll.set_midi(midi.round() as i32, n) {
                    dropped += 1;
                }
            }
        }
        if dropped > 0 {
            log::warn!("{dropped} annotated pitches outside MIDI {LOWEST_MIDI}..={HIGHEST_MIDI} dropped");
        }
        Ok(GroundTruth { roll, dropped })
    }
}

/// Reads a `time f0 f0 ...` annotation (Hz) and maps it onto `num_frames`
/// analysis frames starting at time 0.
pub fn ingest_ground_truth(path: &Path, frame_hop_seconds: f64, num_frames: usize) -> Result<GroundTruth> {
    Annotation::read(path, AnnotationUnits::Hz)?.to_piano_roll(frame_hop_seconds, 0.0, num_frames)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_ }
    }
}

impl AddAssign for EvalCounts {
    fn add_assign(&mut self, o: EvalCounts) {
        *self = *self + o;
    }
}

impl std::iter::Sum for EvalCounts {
    fn sum<I: Iterator<Item = EvalCounts>>(iter: I) -> Self {
        iter.fold(EvalCounts::default(), Add::add)
    }
}

impl EvalCounts {
    pub fn scores(&self) -> Scores {
        scores(self)
    }
}

/// Cell-wise counts for one frame.
pub fn evaluate_frame(pred: &[bool; NUM_PITCHES], truth: &[bool; NUM_PITCHES]) -> EvalCounts {
    let mut c = EvalCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    c
}

pub fn evaluate(pred: &PianoRoll, truth: &PianoRoll) -> Result<EvalCounts> {
    if pred.frames() != truth.frames() {
        return Err(Error::ShapeMismatch(format!(
            "prediction has {} frames, ground truth {}",
            pred.frames(),
            truth.frames()
        )));
    }
    Ok(pred.active.iter().zip(&truth.active).map(|(p, t)| evaluate_frame(p, t)).sum())
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl fmt::Display for Scores {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P = {:.2}%  R = {:.2}%  F = {:.2}%",
            100.0 * self.precision,
            100.0 * self.recall,
            100.0 * self.f_score
        )
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and their harmonic mean; any 0/0 is 0.
pub fn scores(counts: &EvalCounts) -> Scores {
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    Scores { precision, recall, f_score: f_measure(precision, recall) }
}

pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}
