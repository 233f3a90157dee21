//! Time-interval types shared by the audio and video segmenters.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Audio,
    Video,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Audio => "audio",
            SegmentKind::Video => "video",
        }
    }
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SegmentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "audio" => Ok(SegmentKind::Audio),
            "video" => Ok(SegmentKind::Video),
            other => Err(format!("unknown segment kind '{other}'")),
        }
    }
}

/// A detected change point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    /// Seconds from the start of the recording.
    pub t: f64,
    /// Detector score at the change point. Peak ΔBIC for audio, deviation of
    /// the junction distance for video.
    pub score: f64,
}

/// Half-open interval `[t_start, t_end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub t_start: f64,
    pub t_end: f64,
    /// Score of the boundary that opened this segment; `None` for the first one.
    pub score: Option<f64>,
    pub cluster: Option<usize>,
    pub keyframe: Option<usize>,
}

impl Segment {
    pub fn new(kind: SegmentKind, t_start: f64, t_end: f64) -> Self {
        Self {
            kind,
            t_start,
            t_end,
            score: None,
            cluster: None,
            keyframe: None,
        }
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PartitionError {
    #[error("boundaries are not strictly increasing at index {0}")]
    UnsortedBoundaries(usize),
    #[error("boundary at {t}s lies outside (0, {duration})")]
    OutOfRange { t: f64, duration: f64 },
}

/// Cut `[0, total_duration)` at each boundary.
pub fn segments_from_boundaries(
    kind: SegmentKind,
    boundaries: &[Boundary],
    total_duration: f64,
) -> Result<Vec<Segment>, PartitionError> {
    for (i, pair) in boundaries.windows(2).enumerate() {
        if pair[1].t <= pair[0].t {
            return Err(PartitionError::UnsortedBoundaries(i + 1));
        }
    }
    if let Some(b) = boundaries
        .iter()
        .find(|b| !(b.t > 0.0 && b.t < total_duration))
    {
        return Err(PartitionError::OutOfRange {
            t: b.t,
            duration: total_duration,
        });
    }

    let mut segments = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0.0;
    let mut score = None;
    for b in boundaries {
        let mut seg = Segment::new(kind, start, b.t);
        seg.score = score;
        segments.push(seg);
        start = b.t;
        score = Some(b.score);
    }
    let mut last = Segment::new(kind, start, total_duration);
    last.score = score;
    segments.push(last);
    Ok(segments)
}
