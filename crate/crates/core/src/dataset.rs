//! Pieces (audio plus frame-aligned ground truth), dataset directories
//! paired by file stem, and a synthetic four-voice test set.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cfp::midi_to_hz;
use crate::degrade::{degrade, DegradeSpec};
use crate::error::{Error, Result};
use crate::eval::{Annotation, AnnotationUnits, PianoRoll};
use crate::io::read_wav;
use crate::pipeline::frame_center_offset;
use crate::signal::{TimeSeries, WindowSpec};

/// One recording with its ground truth on the analysis frame grid.
#[derive(Clone, Debug)]
pub struct Piece {
    pub name: String,
    pub signal: TimeSeries,
    pub truth: PianoRoll,
}

impl Piece {
    /// Checks that `truth` has exactly one frame per analysis frame.
    pub fn new(name: impl Into<String>, signal: TimeSeries, truth: PianoRoll, window: &WindowSpec) -> Result<Self> {
        let name = name.into();
        let frames = window.num_frames(signal.len());
        if frames == 0 {
            return Err(Error::SignalTooShort { len: signal.len(), needed: window.window_length });
        }
        if truth.frames() != frames {
            return Err(Error::ShapeMismatch(format!(
                "{name}: ground truth has {} frames, analysis grid has {frames}",
                truth.frames()
            )));
        }
        Ok(Piece { name, signal, truth })
    }

    pub fn from_annotation(
        name: impl Into<String>,
        signal: TimeSeries,
        annotation: &Annotation,
        window: &WindowSpec,
    ) -> Result<Self> {
        let frames = window.num_frames(signal.len());
        let hop = window.hop as f64 / signal.sample_rate();
        let offset = frame_center_offset(window, signal.sample_rate());
        let gt = annotation.to_piano_roll(hop, offset, frames)?;
        Piece::new(name, signal, gt.roll, window)
    }

    /// The same piece with its audio passed through `spec`.
    pub fn degraded(&self, spec: &DegradeSpec) -> Result<Piece> {
        Ok(Piece { name: self.name.clone(), signal: degrade(&self.signal, spec)?, truth: self.truth.clone() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetEntry {
    pub name: String,
    pub audio: PathBuf,
    pub annotation: PathBuf,
}

fn walk(dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            walk(&path, files)?;
        } else {
            files.push(path);
        }
    }
    Ok(())
}

/// Pairs `X.wav` with `X.txt` anywhere under `dir`. Returns the pairs
/// (sorted by name) and the stems that had only one of the two files.
pub fn pair_dataset_dir(dir: &Path) -> Result<(Vec<DatasetEntry>, Vec<String>)> {
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    let mut audio = BTreeMap::new();
    let mut notes = BTreeMap::new();
    for f in files {
        let (Some(stem), Some(ext)) = (f.file_stem(), f.extension()) else { continue };
        let stem = stem.to_string_lossy().into_owned();
        match ext.to_string_lossy().to_ascii_lowercase().as_str() {
            "wav" => {
                audio.insert(stem, f);
            }
            "txt" => {
                notes.insert(stem, f);
            }
            _ => {}
        }
    }
    let mut entries = Vec::new();
    let mut unmatched = Vec::new();
    for (stem, wav) in &audio {
        match notes.get(stem) {
            Some(txt) => entries.push(DatasetEntry { name: stem.clone(), audio: wav.clone(), annotation: txt.clone() }),
            None => unmatched.push(format!("{stem}: no annotation")),
        }
    }
    unmatched.extend(notes.keys().filter(|s| !audio.contains_key(*s)).map(|s| format!("{s}: no audio")));
    Ok((entries, unmatched))
}

/// Loads every paired piece under `dir`; unpaired files are logged and skipped.
pub fn load_dataset(dir: &Path, window: &WindowSpec, units: AnnotationUnits) -> Result<Vec<Piece>> {
    let (entries, unmatched) = pair_dataset_dir(dir)?;
    for u in &unmatched {
        log::warn!("skipping {u}");
    }
    if entries.is_empty() {
        return Err(Error::Dataset(format!("no audio/annotation pairs under {}", dir.display())));
    }
    entries
        .par_iter()
        .map(|e| {
            let signal = read_wav(&e.audio)?;
            let annotation = Annotation::read(&e.annotation, units)?;
            Piece::from_annotation(e.name.clone(), signal, &annotation, window)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Note {
    pub midi: u8,
    pub start_s: f64,
    pub end_s: f64,
}

/// Marks each frame whose center lies inside a note.
pub fn roll_from_notes(notes: &[Note], hop_s: f64, offset_s: f64, frames: usize) -> PianoRoll {
    let mut roll = PianoRoll::new(frames, hop_s);
    for n in 0..frames {
        let t = offset_s + n as f64 * hop_s;
        for note in notes.iter().filter(|note| note.start_s <= t && t < note.end_s) {
            roll.set_midi(note.midi as i32, n);
        }
    }
    roll
}

/// Four independent voices of harmonic tones with random pitches and
/// durations, one voice per register.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticQuartet {
    pub sample_rate: f64,
    pub duration_s: f64,
    pub seed: u64,
    /// Inclusive MIDI range of each voice, high to low.
    pub voices: Vec<(u8, u8)>,
    pub min_note_s: f64,
    pub max_note_s: f64,
    pub max_harmonics: usize,
}

impl Default for SyntheticQuartet {
    fn default() -> Self {
        SyntheticQuartet {
            sample_rate: 44100.0,
            duration_s: 30.0,
            seed: 10,
            voices: vec![(62, 79), (55, 72), (48, 65), (38, 55)],
            min_note_s: 0.4,
            max_note_s: 1.2,
            max_harmonics: 20,
        }
    }
}

// Fade-in and fade-out length of every note.
const RAMP_S: f64 = 0.01;

impl SyntheticQuartet {
    pub fn notes(&self) -> Vec<Note> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut notes = Vec::new();
        for &(lo, hi) in &self.voices {
            let mut t = 0.0;
            while t < self.duration_s {
                let len = rng.gen_range(self.min_note_s..=self.max_note_s);
                let end = (t + len).min(self.duration_s);
                notes.push(Note { midi: rng.gen_range(lo..=hi), start_s: t, end_s: end });
                t = end;
            }
        }
        notes
    }

    pub fn render(&self) -> Result<(TimeSeries, Vec<Note>)> {
        let fs = self.sample_rate;
        let len = (self.duration_s * fs).round() as usize;
        let notes = self.notes();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed);
        let mut samples = vec![0.0; len];
        for note in &notes {
            let f0 = midi_to_hz(note.midi as f64);
            let start = (note.start_s * fs).round() as usize;
            let end = ((note.end_s * fs).round() as usize).min(len);
            let harmonics: Vec<(f64, f64)> = (1..=self.max_harmonics)
                .take_while(|&h| h as f64 * f0 < fs / 2.0)
                .map(|h| (h as f64, rng.gen_range(0.0..2.0 * PI)))
                .collect();
            let ramp = (RAMP_S * fs) as usize;
            for (i, s) in samples[start..end].iter_mut().enumerate() {
                let t = i as f64 / fs;
                let env = (i.min(end - start - 1 - i) as f64 / ramp as f64).min(1.0);
                let v: f64 = harmonics.iter().map(|&(h, ph)| (2.0 * PI * h * f0 * t + ph).sin() / h).sum();
                *s += 0.2 * env * v;
            }
        }
        Ok((TimeSeries::new(samples, fs)?, notes))
    }

    pub fn piece(&self, window: &WindowSpec) -> Result<Piece> {
        let (signal, notes) = self.render()?;
        let frames = window.num_frames(signal.len());
        let roll = roll_from_notes(
            &notes,
            window.hop as f64 / self.sample_rate,
            frame_center_offset(window, self.sample_rate),
            frames,
        );
        Piece::new(format!("quartet-{}", self.seed), signal, roll, window)
    }
}
