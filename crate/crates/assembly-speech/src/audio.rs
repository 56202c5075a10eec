//! WAV decoding into normalised sample buffers.

use std::path::Path;

use crate::error::{Error, Result};

/// Decoded mono audio with samples in `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("audio buffer must be non-empty".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        Ok(AudioBuffer {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Decode a RIFF PCM WAV file. Multi-channel input is downmixed by averaging.
pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!(
                "expected 16-bit integer PCM, got {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    let channels = spec.channels as usize;
    let mut samples = Vec::with_capacity(reader.len() as usize / channels.max(1));
    let mut acc = 0.0f64;
    let mut in_frame = 0usize;
    for s in reader.samples::<i16>() {
        let s = s.map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        acc += s as f64 / 32768.0;
        in_frame += 1;
        if in_frame == channels {
            samples.push(acc / channels as f64);
            acc = 0.0;
            in_frame = 0;
        }
    }
    if samples.is_empty() {
        return Err(Error::Decode {
            path: path.to_path_buf(),
            reason: "no samples".into(),
        });
    }
    AudioBuffer::new(samples, spec.sample_rate)
}

/// Write a mono 16-bit PCM WAV file. Used by fixtures and examples.
pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| Error::Serialize(e.to_string()))?;
    for &s in &audio.samples {
        let v = (s.clamp(-1.0, 1.0) * 32767.0).round() as i16;
        writer
            .write_sample(v)
            .map_err(|e| Error::Serialize(e.to_string()))?;
    }
    writer.finalize().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(())
}
