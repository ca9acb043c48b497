//! RIFF/WAVE decoding and encoding (PCM16 and float32 only).

use std::io::Cursor;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use paraling_core::AudioBuffer;

#[derive(Debug, thiserror::Error)]
pub enum WavError {
    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("WAV file contains no samples")]
    EmptyPayload,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Audio(#[from] paraling_core::Error),
}

// Decoding reads from memory, so any IO error means the bytes ran out.
fn map_read(e: hound::Error) -> WavError {
    match e {
        hound::Error::IoError(e) => WavError::MalformedHeader(format!("truncated: {e}")),
        other => map_hound(other),
    }
}

fn map_hound(e: hound::Error) -> WavError {
    match e {
        hound::Error::IoError(e) => WavError::Io(e),
        hound::Error::FormatError(m) => WavError::MalformedHeader(m.into()),
        hound::Error::Unsupported => WavError::UnsupportedEncoding("unsupported format".into()),
        other => WavError::UnsupportedEncoding(other.to_string()),
    }
}

/// Decodes WAV bytes into a mono buffer in [-1, 1]. Stereo is averaged.
pub fn load_wav(bytes: &[u8]) -> Result<AudioBuffer, WavError> {
    let reader = WavReader::new(Cursor::new(bytes)).map_err(map_read)?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(WavError::UnsupportedEncoding(format!("{} channels", spec.channels)));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f32::from(v) / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(map_read)?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<Result<_, _>>()
            .map_err(map_read)?,
        (format, bits) => {
            return Err(WavError::UnsupportedEncoding(format!("{format:?} {bits}-bit")));
        }
    };
    let channels = usize::from(spec.channels);
    if interleaved.len() < channels {
        return Err(WavError::EmptyPayload);
    }
    let mono: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|c| c.iter().map(|&v| f64::from(v)).sum::<f64>() / channels as f64)
        .collect();
    Ok(AudioBuffer::new_clamped(mono, spec.sample_rate)?)
}

pub fn read_wav(path: &Path) -> Result<AudioBuffer, WavError> {
    load_wav(&std::fs::read(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

/// Encodes a mono buffer. PCM16 rounds to the nearest step of 1/32768.
pub fn encode_wav(buf: &AudioBuffer, encoding: WavEncoding) -> Result<Vec<u8>, WavError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate(),
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let mut out = Cursor::new(Vec::new());
    {
        let mut w = WavWriter::new(&mut out, spec).map_err(map_hound)?;
        for &s in buf.samples() {
            match encoding {
                WavEncoding::Pcm16 => {
                    let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    w.write_sample(v).map_err(map_hound)?;
                }
                WavEncoding::Float32 => w.write_sample(s as f32).map_err(map_hound)?,
            }
        }
        w.finalize().map_err(map_hound)?;
    }
    Ok(out.into_inner())
}

pub fn write_wav(path: &Path, buf: &AudioBuffer, encoding: WavEncoding) -> Result<(), WavError> {
    std::fs::write(path, encode_wav(buf, encoding)?)?;
    Ok(())
}
