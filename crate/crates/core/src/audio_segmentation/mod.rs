//! Speaker-change detection over MFCC frames with the Bayesian Information
//! Criterion.

mod bic;
mod scan;

pub use crate::segment::{segments_from_boundaries, PartitionError};
pub use bic::{bic_delta, bic_delta_rows, bic_penalty, log_det, sample_covariance, REGULARIZATION};
pub use scan::detect_speaker_changes;

use crate::audio_features::NUM_COEFFS;

/// Feature dimension the criterion is evaluated in.
pub const DIM: usize = NUM_COEFFS;
/// Fewest frames on either side of a split; a full covariance in `DIM`
/// dimensions needs more samples than dimensions.
pub const MIN_SIDE_FRAMES: usize = DIM + 1;

pub type Row = [f64; DIM];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BicError {
    #[error("split leaves {left}/{right} frames; each side needs at least {required}")]
    InsufficientSamples {
        left: usize,
        right: usize,
        required: usize,
    },
    #[error("covariance is singular even after regularization")]
    SingularCovariance,
    #[error(
        "feature stream spans {frames} frames, shorter than the {required}-frame initial window"
    )]
    ClipTooShort { frames: usize, required: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Growing-window scan parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicConfig {
    /// Weight on the model-complexity penalty.
    pub lambda: f64,
    pub initial_window_s: f64,
    pub growth_step_s: f64,
    pub max_window_s: f64,
    /// Frames excluded at each end of a window; never fewer than
    /// [`MIN_SIDE_FRAMES`] are used.
    pub min_margin_frames: usize,
    /// A boundary needs a peak ΔBIC strictly above this value.
    pub clearance: f64,
}

impl Default for BicConfig {
    fn default() -> Self {
        Self {
            lambda: 0.85,
            initial_window_s: 8.0,
            growth_step_s: 2.0,
            max_window_s: 30.0,
            min_margin_frames: 5,
            clearance: 0.0,
        }
    }
}

impl BicConfig {
    pub fn validate(&self) -> Result<(), BicError> {
        let positive = [
            ("lambda", self.lambda),
            ("initial_window_s", self.initial_window_s),
            ("growth_step_s", self.growth_step_s),
            ("max_window_s", self.max_window_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(BicError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_window_s < self.initial_window_s {
            return Err(BicError::InvalidConfig(
                "max_window_s is smaller than initial_window_s".into(),
            ));
        }
        Ok(())
    }
}
