//! WAV input/output and CSV dumps of layers and band salience.

use std::io::Write;
use std::path::Path;

use hound::{SampleFormat, WavSpec, WavWriter};

use crate::cfp::{Salience, LOWEST_MIDI, NUM_PITCHES};
use crate::error::{Error, Result};
use crate::signal::{Axis, Spectrogram, TimeSeries};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WavFormat {
    Pcm16,
    #[default]
    Float32,
}

impl std::str::FromStr for WavFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pcm16" | "int16" | "i16" => Ok(WavFormat::Pcm16),
            "float32" | "f32" => Ok(WavFormat::Float32),
            other => Err(Error::invalid(format!("unknown wav format `{other}`"))),
        }
    }
}

/// Reads any PCM or float WAV, averaging channels to mono. Integer samples
/// are scaled to `[-1, 1)`.
pub fn read_wav(path: &Path) -> Result<TimeSeries> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>()?,
        SampleFormat::Int => {
            let scale = 2f64.powi(spec.bits_per_sample as i32 - 1);
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    if interleaved.is_empty() {
        return Err(Error::invalid(format!("{} contains no samples", path.display())));
    }
    let mono = interleaved
        .chunks(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    TimeSeries::new(mono, spec.sample_rate as f64)
}

/// Writes a mono WAV. PCM16 output is clipped to `[-1, 1)`.
pub fn write_wav(path: &Path, x: &TimeSeries, format: WavFormat) -> Result<()> {
    let rate = x.sample_rate().round();
    if rate < 1.0 || rate > u32::MAX as f64 || (rate - x.sample_rate()).abs() > 1e-9 {
        return Err(Error::invalid(format!("sample rate {} cannot be stored in a WAV header", x.sample_rate())));
    }
    let (bits, sample_format) = match format {
        WavFormat::Pcm16 => (16, SampleFormat::Int),
        WavFormat::Float32 => (32, SampleFormat::Float),
    };
    let spec = WavSpec { channels: 1, sample_rate: rate as u32, bits_per_sample: bits, sample_format };
    let mut writer = WavWriter::create(path, spec)?;
    match format {
        WavFormat::Pcm16 => {
            for &s in x.samples() {
                writer.write_sample((s * 32768.0).round().clamp(-32768.0, 32767.0) as i16)?;
            }
        }
        WavFormat::Float32 => {
            for &s in x.samples() {
                writer.write_sample(s as f32)?;
            }
        }
    }
    writer.finalize()?;
    Ok(())
}

/// Rows are bins (first column Hz or s), columns are frames (header row of
/// frame-center times). Only bins `0..=max_bin` are written.
pub fn write_spectrogram_csv(
    out: impl Write,
    s: &Spectrogram,
    frame_offset_seconds: f64,
    max_bin: Option<usize>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let label = match s.axis() {
        Axis::Frequency => "frequency_hz",
        Axis::Quefrency => "quefrency_s",
    };
    let mut header = vec![label.to_string()];
    header.extend((0..s.frames()).map(|n| format!("{:.4}", frame_offset_seconds + n as f64 * s.frame_hop_seconds())));
    w.write_record(&header)?;
    let last = max_bin.unwrap_or(s.bins() - 1).min(s.bins() - 1);
    for k in 0..=last {
        let mut row = Vec::with_capacity(s.frames() + 1);
        row.push(format!("{:.6}", s.bin_coordinate(k)));
        row.extend((0..s.frames()).map(|n| format!("{:e}", s.get(k, n))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// 88 rows keyed by MIDI pitch, one column per frame.
pub fn write_salience_csv(out: impl Write, s: &Salience, frame_offset_seconds: f64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["midi".to_string()];
    header.extend((0..s.frames()).map(|n| format!("{:.4}", frame_offset_seconds + n as f64 * s.frame_hop_seconds())));
    w.write_record(&header)?;
    for b in 0..NUM_PITCHES {
        let mut row = vec![(LOWEST_MIDI as usize + b).to_string()];
        row.extend((0..s.frames()).map(|n| format!("{:e}", s.get(b, n))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
