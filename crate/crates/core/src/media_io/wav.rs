use super::MediaError;
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use std::io::{self, Read};
use std::path::Path;

/// Mono PCM audio with samples normalized to `[-1.0, 1.0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub sample_rate: u32,
    pub samples: Vec<f64>,
}

impl AudioClip {
    pub fn new(sample_rate: u32, samples: Vec<f64>) -> Self {
        Self {
            sample_rate,
            samples,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn map_hound(err: hound::Error) -> MediaError {
    match err {
        hound::Error::Unsupported => {
            MediaError::UnsupportedEncoding("codec is not PCM or IEEE float".into())
        }
        hound::Error::FormatError(msg) => MediaError::MalformedContainer(msg.into()),
        // the file is already open; read failures here mean truncated chunks
        hound::Error::IoError(e) => MediaError::MalformedContainer(format!("truncated data: {e}")),
        other => MediaError::MalformedContainer(other.to_string()),
    }
}

/// Read a RIFF/WAVE file, downmixing stereo by averaging the two channels.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip, MediaError> {
    let file = std::fs::File::open(path.as_ref())?;
    decode_wav(io::BufReader::new(file))
}

pub(crate) fn decode_wav<R: Read>(reader: R) -> Result<AudioClip, MediaError> {
    let mut reader = WavReader::new(reader).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if !(1..=2).contains(&channels) {
        return Err(MediaError::UnsupportedEncoding(format!(
            "{channels} channels"
        )));
    }
    if spec.sample_rate == 0 {
        return Err(MediaError::MalformedContainer("sample rate is zero".into()));
    }

    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            if !matches!(spec.bits_per_sample, 8 | 16 | 24 | 32) {
                return Err(MediaError::UnsupportedEncoding(format!(
                    "{}-bit integer PCM",
                    spec.bits_per_sample
                )));
            }
            let scale = (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale).map_err(map_hound))
                .collect::<Result<_, _>>()?
        }
        SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(MediaError::UnsupportedEncoding(format!(
                    "{}-bit float",
                    spec.bits_per_sample
                )));
            }
            reader
                .samples::<f32>()
                .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)).map_err(map_hound))
                .collect::<Result<_, _>>()?
        }
    };

    let samples = if channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|lr| 0.5 * (lr[0] + lr[1]))
            .collect()
    } else {
        interleaved
    };
    Ok(AudioClip::new(spec.sample_rate, samples))
}

/// Write a mono 16-bit PCM file. Inverse of [`read_wav`] for 16-bit input.
pub fn write_wav_16bit(path: impl AsRef<Path>, clip: &AudioClip) -> Result<(), MediaError> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path.as_ref(), spec).map_err(map_hound)?;
    for &s in &clip.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}
