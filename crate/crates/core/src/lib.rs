//! Segmentation, indexing and timeline assembly for recorded presentation videos.
//!
//! The audio track is cut at speaker changes with a growing-window BIC scan over
//! sparse MFCC frames, the video track is cut at visual discontinuities found in
//! frame-to-frame histogram distances, and a noisy transcript is filtered down to
//! a handful of theme and topic phrases. Everything lands in a six-row
//! [`timeline::TimelineDoc`] that can be exported as JSON or rendered as SVG.

pub mod audio_features;
pub mod audio_segmentation;
pub mod export;
pub mod media_io;
pub mod segment;
pub mod speaker_analysis;
pub mod synth;
pub mod text_index;
pub mod timeline;
pub mod video_segmentation;

pub use segment::{Boundary, Segment, SegmentKind};
