//! Sparse MFCC framing and the audio amplitude activity graph.
//!
//! Frames are deliberately sparse: at the default 8 sets per second and a set
//! length of `sample_rate / 62.5` samples, each analysed fragment covers only
//! 16 ms out of every 125 ms.

mod envelope;
mod mfcc;

pub use envelope::{amplitude_envelope, ActivityGraph};
pub use mfcc::{mfcc, MfccExtractor, LOG_FLOOR, NUM_COEFFS, NUM_FILTERS};

use crate::media_io::AudioClip;
use rayon::prelude::*;

/// Default number of analysed sample sets per second of audio.
pub const DEFAULT_SETS_PER_SECOND: f64 = 8.0;
/// Set length is `sample_rate / SET_LENGTH_DIVISOR` samples in AUTO mode.
pub const SET_LENGTH_DIVISOR: f64 = 62.5;
/// Shortest window the MFCC pipeline accepts.
pub const MIN_WINDOW: usize = 32;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FeatureError {
    #[error("clip has {samples} samples, shorter than one {set_length}-sample set")]
    ClipTooShort { samples: usize, set_length: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SetLength {
    /// `round(sample_rate / 62.5)`
    #[default]
    Auto,
    Samples(usize),
}

impl SetLength {
    pub fn resolve(self, sample_rate: u32) -> usize {
        match self {
            SetLength::Auto => (sample_rate as f64 / SET_LENGTH_DIVISOR).round() as usize,
            SetLength::Samples(n) => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub sets_per_second: f64,
    pub set_length: SetLength,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            sets_per_second: DEFAULT_SETS_PER_SECOND,
            set_length: SetLength::Auto,
        }
    }
}

/// A borrowed run of samples starting at `offset`.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub offset: usize,
    pub samples: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub t_start: f64,
    pub coeffs: [f64; NUM_COEFFS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub frames: Vec<FeatureFrame>,
    pub sets_per_second: f64,
    pub set_length_samples: usize,
}

impl FeatureSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn span_s(&self) -> f64 {
        self.frames.len() as f64 / self.sets_per_second
    }

    /// Frames whose start time falls in `[t_start, t_end)`.
    pub fn slice_time(&self, t_start: f64, t_end: f64) -> &[FeatureFrame] {
        let lo = self.frames.partition_point(|f| f.t_start < t_start);
        let hi = self.frames.partition_point(|f| f.t_start < t_end);
        &self.frames[lo..hi.max(lo)]
    }
}

/// Cut the clip into sets of `set_length` samples spaced `sample_rate /
/// sets_per_second` apart. A trailing partial set is dropped.
pub fn frame_audio<'a>(
    clip: &'a AudioClip,
    sets_per_second: f64,
    set_length: SetLength,
) -> Result<Vec<Window<'a>>, FeatureError> {
    if !(sets_per_second > 0.0 && sets_per_second.is_finite()) {
        return Err(FeatureError::InvalidParameter(format!(
            "sets_per_second must be positive, got {sets_per_second}"
        )));
    }
    let len = set_length.resolve(clip.sample_rate);
    if len == 0 {
        return Err(FeatureError::InvalidParameter("set length is zero".into()));
    }
    let n = clip.samples.len();
    if n < len {
        return Err(FeatureError::ClipTooShort {
            samples: n,
            set_length: len,
        });
    }
    let hop = clip.sample_rate as f64 / sets_per_second;
    let count = ((n - len) as f64 / hop).floor() as usize + 1;
    Ok((0..count)
        .map(|k| {
            let offset = ((k as f64 * hop).round() as usize).min(n - len);
            Window {
                offset,
                samples: &clip.samples[offset..offset + len],
            }
        })
        .collect())
}

/// MFCC vectors for every sample set of the clip, in time order.
pub fn extract_features(
    clip: &AudioClip,
    cfg: &FeatureConfig,
) -> Result<FeatureSequence, FeatureError> {
    let windows = frame_audio(clip, cfg.sets_per_second, cfg.set_length)?;
    let set_length = windows[0].samples.len();
    if set_length < MIN_WINDOW {
        return Err(FeatureError::InvalidParameter(format!(
            "set length {set_length} is below the {MIN_WINDOW}-sample minimum"
        )));
    }
    let extractor = MfccExtractor::new(set_length, clip.sample_rate);
    let rate = clip.sample_rate as f64;
    let frames = windows
        .par_iter()
        .map(|w| FeatureFrame {
            t_start: w.offset as f64 / rate,
            coeffs: extractor.compute(w.samples),
        })
        .collect();
    Ok(FeatureSequence {
        frames,
        sets_per_second: cfg.sets_per_second,
        set_length_samples: set_length,
    })
}
