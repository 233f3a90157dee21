//! Bottom-up BIC clustering of audio segments, motion-consistency hints from
//! the video activity graph, and MFCC scatter diagnostics.

use crate::audio_features::{
    extract_features, ActivityGraph, FeatureConfig, FeatureError, FeatureSequence, NUM_COEFFS,
};
use crate::audio_segmentation::{bic_delta_rows, BicError, Row, MIN_SIDE_FRAMES};
use crate::media_io::AudioClip;
use crate::segment::Segment;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Coefficient pairs plotted when none are requested.
pub const DEFAULT_SCATTER_PAIRS: [(usize, usize); 3] = [(1, 2), (2, 3), (3, 4)];
pub const DEFAULT_CV_THRESHOLD: f64 = 0.3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClusterError {
    #[error("segment {index} has {frames} feature frames; clustering needs {required}")]
    InsufficientSamples {
        index: usize,
        frames: usize,
        required: usize,
    },
    #[error(transparent)]
    Bic(#[from] BicError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("coefficient index {0} is outside 1..=12")]
    BadCoefficient(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: usize,
    /// Indices into the clustered segment list, ascending.
    pub members: Vec<usize>,
    pub label: Option<String>,
}

/// Adjacent audio segments over which the video activity stays steady.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionHint {
    pub left: usize,
    pub right: usize,
    /// Coefficient of variation of video activity over both segments.
    pub cv: f64,
}

fn segment_rows(seg: &Segment, features: &FeatureSequence) -> Vec<Row> {
    features
        .slice_time(seg.t_start, seg.t_end)
        .iter()
        .map(|f| f.coeffs)
        .collect()
}

/// Greedy agglomeration without motion hints.
pub fn cluster_segments(
    segments: &[Segment],
    features: &FeatureSequence,
    lambda: f64,
) -> Result<Vec<Cluster>, ClusterError> {
    cluster_segments_with_hints(segments, features, lambda, &[], 0.0)
}

/// Repeatedly merge the pair of clusters with the most negative merge ΔBIC
/// (features of the two concatenated, split at the junction) until no pair is
/// below zero. Pairs linked by a hint get `hint_bias` added to their ΔBIC;
/// a negative bias favours merging them. Ties go to the lowest `(i, j)`.
pub fn cluster_segments_with_hints(
    segments: &[Segment],
    features: &FeatureSequence,
    lambda: f64,
    hints: &[MotionHint],
    hint_bias: f64,
) -> Result<Vec<Cluster>, ClusterError> {
    let required = 2 * MIN_SIDE_FRAMES;
    let rows: Vec<Vec<Row>> = segments.iter().map(|s| segment_rows(s, features)).collect();
    for (index, r) in rows.iter().enumerate() {
        if r.len() < required {
            return Err(ClusterError::InsufficientSamples {
                index,
                frames: r.len(),
                required,
            });
        }
    }

    let mut groups: Vec<Vec<usize>> = (0..segments.len()).map(|i| vec![i]).collect();
    let linked = |a: &[usize], b: &[usize]| {
        hints.iter().any(|h| {
            (a.contains(&h.left) && b.contains(&h.right))
                || (a.contains(&h.right) && b.contains(&h.left))
        })
    };
    loop {
        let pairs: Vec<(usize, usize)> = (0..groups.len())
            .flat_map(|i| (i + 1..groups.len()).map(move |j| (i, j)))
            .collect();
        let scores: Vec<Result<f64, BicError>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let left: Vec<Row> = groups[i]
                    .iter()
                    .flat_map(|&m| rows[m].iter().copied())
                    .collect();
                let split = left.len();
                let mut joined = left;
                joined.extend(groups[j].iter().flat_map(|&m| rows[m].iter().copied()));
                let mut delta = bic_delta_rows(&joined, split, lambda)?;
                if hint_bias != 0.0 && linked(&groups[i], &groups[j]) {
                    delta += hint_bias;
                }
                Ok(delta)
            })
            .collect();
        let mut best: Option<((usize, usize), f64)> = None;
        for (pair, score) in pairs.into_iter().zip(scores) {
            let score = score?;
            if score < 0.0 && best.is_none_or(|(_, b)| score < b) {
                best = Some((pair, score));
            }
        }
        let Some(((i, j), _)) = best else { break };
        let absorbed = groups.remove(j);
        groups[i].extend(absorbed);
        groups[i].sort_unstable();
    }

    groups.sort_by_key(|g| g[0]);
    Ok(groups
        .into_iter()
        .enumerate()
        .map(|(id, members)| Cluster {
            id,
            members,
            label: None,
        })
        .collect())
}

/// Copy cluster ids onto the segments.
pub fn assign_clusters(segments: &mut [Segment], clusters: &[Cluster]) {
    for c in clusters {
        for &m in &c.members {
            if let Some(seg) = segments.get_mut(m) {
                seg.cluster = Some(c.id);
            }
        }
    }
}

fn coefficient_of_variation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if mean == 0.0 {
        if var == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        var.sqrt() / mean
    }
}

/// One hint per adjacent pair whose combined span has video activity with a
/// coefficient of variation below `cv_threshold`.
pub fn motion_consistency_hints(
    audio_segments: &[Segment],
    activity: &ActivityGraph,
    cv_threshold: f64,
) -> Vec<MotionHint> {
    audio_segments
        .windows(2)
        .enumerate()
        .filter_map(|(i, pair)| {
            let values = activity.slice_time(pair[0].t_start, pair[1].t_end);
            if values.is_empty() {
                return None;
            }
            let cv = coefficient_of_variation(values);
            (cv < cv_threshold).then_some(MotionHint {
                left: i,
                right: i + 1,
                cv,
            })
        })
        .collect()
}

/// Agreement between two labelings of the same items, in `[0, 1]`.
pub fn rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings differ in length");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut agree = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / (n * (n - 1) / 2) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClipLabel {
    Female,
    Male,
    Film,
    Silence,
    Unlabeled,
}

impl ClipLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClipLabel::Female => "female",
            ClipLabel::Male => "male",
            ClipLabel::Film => "film",
            ClipLabel::Silence => "silence",
            ClipLabel::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for ClipLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClipLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "female" => ClipLabel::Female,
            "male" => ClipLabel::Male,
            "film" => ClipLabel::Film,
            "silence" => ClipLabel::Silence,
            "" | "unlabeled" => ClipLabel::Unlabeled,
            other => return Err(format!("unknown clip label '{other}'")),
        })
    }
}

#[derive(Debug, Clone)]
pub struct LabeledClip {
    pub clip_id: String,
    pub label: ClipLabel,
    pub clip: AudioClip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub clip_id: String,
    pub label: ClipLabel,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSeries {
    pub pair: (usize, usize),
    pub points: Vec<ScatterPoint>,
}

/// Mean MFCC coordinates of each clip for each coefficient pair.
pub fn mfcc_scatter(
    clips: &[LabeledClip],
    pairs: &[(usize, usize)],
    cfg: &FeatureConfig,
) -> Result<Vec<ScatterSeries>, ClusterError> {
    let pairs = if pairs.is_empty() {
        &DEFAULT_SCATTER_PAIRS[..]
    } else {
        pairs
    };
    if let Some(&bad) = pairs
        .iter()
        .flat_map(|&(x, y)| [x, y])
        .find(|c| !(1..NUM_COEFFS).contains(c))
        .as_ref()
    {
        return Err(ClusterError::BadCoefficient(bad));
    }
    let means = clips
        .par_iter()
        .map(|c| {
            let feats = extract_features(&c.clip, cfg)?;
            let n = feats.len() as f64;
            let mut mean = [0.0; NUM_COEFFS];
            for f in &feats.frames {
                for (m, v) in mean.iter_mut().zip(&f.coeffs) {
                    *m += v / n;
                }
            }
            Ok(mean)
        })
        .collect::<Result<Vec<_>, FeatureError>>()?;
    Ok(pairs
        .iter()
        .map(|&(xi, yi)| ScatterSeries {
            pair: (xi, yi),
            points: clips
                .iter()
                .zip(&means)
                .map(|(c, m)| ScatterPoint {
                    clip_id: c.clip_id.clone(),
                    label: c.label,
                    x: m[xi],
                    y: m[yi],
                })
                .collect(),
        })
        .collect())
}
