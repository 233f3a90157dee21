//! Loading audio, frame sequences and cached histograms.

mod frames;
mod histogram;
mod wav;

pub use frames::{read_frames, Frame, FrameSequence, Pixels};
pub use histogram::{
    compute_histograms, read_histogram_cache, write_histogram_cache, HistogramMode, HistogramSeries,
};
pub use wav::{read_wav, write_wav_16bit, AudioClip};

use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum MediaError {
    #[error("malformed container: {0}")]
    MalformedContainer(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("frame {index} is {got_w}x{got_h}, expected {want_w}x{want_h}")]
    InconsistentDimensions {
        index: usize,
        want_w: u32,
        want_h: u32,
        got_w: u32,
        got_h: u32,
    },
    #[error("no frames found in {0}")]
    EmptySequence(PathBuf),
    #[error("frame rate unknown for {0}; supply one explicitly")]
    MissingFrameRate(PathBuf),
    #[error("invalid histogram cache: {0}")]
    BadCache(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
