use crate::media_io::AudioClip;
use crate::segment::SegmentKind;
use serde::{Deserialize, Serialize};

/// Per-bin activity: RMS amplitude for audio, adjacent-frame histogram
/// distance for video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityGraph {
    pub kind: SegmentKind,
    pub bin_duration_s: f64,
    pub values: Vec<f64>,
}

impl ActivityGraph {
    pub fn span_s(&self) -> f64 {
        self.values.len() as f64 * self.bin_duration_s
    }

    /// Values of every bin overlapping `[t_start, t_end)`.
    pub fn slice_time(&self, t_start: f64, t_end: f64) -> &[f64] {
        let n = self.values.len();
        let lo = ((t_start / self.bin_duration_s).floor().max(0.0) as usize).min(n);
        let hi = ((t_end / self.bin_duration_s).ceil().max(0.0) as usize).min(n);
        &self.values[lo..hi.max(lo)]
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

/// RMS amplitude per bin. A full-scale square wave maps to 1.0; the last bin
/// may be partial.
///
/// # Panics
/// If `bin_duration_s` is not positive.
pub fn amplitude_envelope(clip: &AudioClip, bin_duration_s: f64) -> ActivityGraph {
    assert!(bin_duration_s > 0.0, "bin duration must be positive");
    let bin_len = ((bin_duration_s * clip.sample_rate as f64).round() as usize).max(1);
    let values = clip
        .samples
        .chunks(bin_len)
        .map(|chunk| {
            let ms = chunk.iter().map(|s| s * s).sum::<f64>() / chunk.len() as f64;
            ms.sqrt().min(1.0)
        })
        .collect();
    ActivityGraph {
        kind: SegmentKind::Audio,
        bin_duration_s,
        values,
    }
}
