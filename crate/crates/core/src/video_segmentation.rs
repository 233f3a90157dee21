//! Shot boundaries from frame-to-frame histogram distances, the video
//! activity graph, and keyframe selection.
//!
//! A frame transition `i → i+1` is a boundary when its distance stands out
//! from the distances in the two windows around it: the `window_s` seconds
//! before and the `window_s` seconds after. "Stands out" means exceeding the
//! pooled mean of both windows by more than `deviation_k` pooled standard
//! deviations, and by at least `min_jump` in absolute terms.

use crate::audio_features::ActivityGraph;
use crate::media_io::HistogramSeries;
use crate::segment::{Boundary, Segment, SegmentKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ShotError {
    #[error("histograms have {0} and {1} bins")]
    BinMismatch(usize, usize),
    #[error("need at least two frames")]
    EmptySequence,
    #[error("series spans {span_s:.3}s, detection needs {required_s:.3}s")]
    SeriesTooShort { span_s: f64, required_s: f64 },
    #[error("segment [{0}, {1}) contains no frames")]
    EmptySegment(f64, f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotConfig {
    pub window_s: f64,
    pub deviation_k: f64,
    pub min_shot_s: f64,
    /// Smallest L1 jump above the window mean that can count as a cut.
    pub min_jump: f64,
}

impl Default for ShotConfig {
    fn default() -> Self {
        Self {
            window_s: 4.0,
            deviation_k: 3.0,
            min_shot_s: 1.0,
            min_jump: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyframeRef {
    pub frame_index: usize,
    pub t: f64,
}

/// L1 distance between two normalized histograms, in `[0, 2]`.
pub fn frame_distance(h1: &[f64], h2: &[f64]) -> Result<f64, ShotError> {
    if h1.len() != h2.len() {
        return Err(ShotError::BinMismatch(h1.len(), h2.len()));
    }
    Ok(h1.iter().zip(h2).map(|(a, b)| (a - b).abs()).sum())
}

pub fn video_activity(hs: &HistogramSeries) -> Result<ActivityGraph, ShotError> {
    if hs.len() < 2 {
        return Err(ShotError::EmptySequence);
    }
    let values = hs
        .histograms
        .windows(2)
        .map(|w| frame_distance(&w[0], &w[1]))
        .collect::<Result<_, _>>()?;
    Ok(ActivityGraph {
        kind: SegmentKind::Video,
        bin_duration_s: 1.0 / hs.fps,
        values,
    })
}

pub fn detect_shots(hs: &HistogramSeries, cfg: &ShotConfig) -> Result<Vec<Boundary>, ShotError> {
    if !(cfg.window_s > 0.0
        && cfg.deviation_k > 0.0
        && cfg.min_shot_s >= 0.0
        && cfg.min_jump >= 0.0)
    {
        return Err(ShotError::InvalidConfig(format!("{cfg:?}")));
    }
    let span_s = hs.duration_s();
    if span_s < 2.0 * cfg.window_s || hs.len() < 2 {
        return Err(ShotError::SeriesTooShort {
            span_s,
            required_s: 2.0 * cfg.window_s,
        });
    }
    let d = video_activity(hs)?.values;
    let w = ((cfg.window_s * hs.fps).round() as usize).max(1);

    let mut sum = vec![0.0; d.len() + 1];
    let mut sq = vec![0.0; d.len() + 1];
    for (i, v) in d.iter().enumerate() {
        sum[i + 1] = sum[i] + v;
        sq[i + 1] = sq[i] + v * v;
    }
    let range = |a: usize, b: usize| (sum[b] - sum[a], sq[b] - sq[a]);

    // (activity index, deviation)
    let mut candidates = Vec::new();
    for i in w..d.len().saturating_sub(w) {
        let (s1, q1) = range(i - w, i);
        let (s2, q2) = range(i + 1, i + 1 + w);
        let n = (2 * w) as f64;
        let mean = (s1 + s2) / n;
        let std = ((q1 + q2) / n - mean * mean).max(0.0).sqrt();
        let deviation = d[i] - mean;
        if deviation > cfg.deviation_k * std && deviation > cfg.min_jump {
            candidates.push((i, deviation));
        }
    }

    // strongest first, earlier time on ties
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let min_gap = cfg.min_shot_s * hs.fps;
    let mut kept: Vec<(usize, f64)> = Vec::new();
    for (i, dev) in candidates {
        if kept
            .iter()
            .all(|&(j, _)| (i as f64 - j as f64).abs() >= min_gap)
        {
            kept.push((i, dev));
        }
    }
    kept.sort_by_key(|&(i, _)| i);
    Ok(kept
        .into_iter()
        .map(|(i, dev)| Boundary {
            t: hs.time_of(i + 1),
            score: dev,
        })
        .collect())
}

/// Frame indices whose timestamps fall inside the segment.
fn frames_in(hs: &HistogramSeries, seg: &Segment) -> std::ops::Range<usize> {
    let eps = 1e-9;
    let lo = ((seg.t_start * hs.fps - eps).ceil().max(0.0) as usize).min(hs.len());
    let hi = ((seg.t_end * hs.fps - eps).ceil().max(0.0) as usize).min(hs.len());
    lo..hi.max(lo)
}

/// The frame closest in L1 to the segment's mean histogram; earliest on ties.
pub fn select_keyframe(hs: &HistogramSeries, seg: &Segment) -> Result<KeyframeRef, ShotError> {
    let range = frames_in(hs, seg);
    if range.is_empty() {
        return Err(ShotError::EmptySegment(seg.t_start, seg.t_end));
    }
    let n = range.len() as f64;
    let mut mean = vec![0.0; hs.bins];
    for h in &hs.histograms[range.clone()] {
        for (m, v) in mean.iter_mut().zip(h) {
            *m += v / n;
        }
    }
    let mut best = (range.start, f64::INFINITY);
    for i in range {
        let dist = frame_distance(&hs.histograms[i], &mean)?;
        if dist < best.1 {
            best = (i, dist);
        }
    }
    Ok(KeyframeRef {
        frame_index: best.0,
        t: hs.time_of(best.0),
    })
}
