use super::bic::{bic_penalty, log_det};
use super::{BicConfig, BicError, Row, DIM, MIN_SIDE_FRAMES};
use crate::audio_features::FeatureSequence;
use crate::segment::Boundary;
use rayon::prelude::*;

const TRI: usize = DIM * (DIM + 1) / 2;

/// Prefix sums of first and second moments over one analysis window,
/// centered on the window mean to limit cancellation.
struct WindowMoments {
    first: Vec<Row>,
    second: Vec<[f64; TRI]>,
}

impl WindowMoments {
    fn new(rows: &[Row]) -> Self {
        let n = rows.len() as f64;
        let mut mean = [0.0; DIM];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n;
            }
        }
        let mut first = Vec::with_capacity(rows.len() + 1);
        let mut second = Vec::with_capacity(rows.len() + 1);
        let mut s1 = [0.0; DIM];
        let mut s2 = [0.0; TRI];
        first.push(s1);
        second.push(s2);
        for r in rows {
            let c: Row = std::array::from_fn(|i| r[i] - mean[i]);
            let mut t = 0;
            for i in 0..DIM {
                s1[i] += c[i];
                for j in i..DIM {
                    s2[t] += c[i] * c[j];
                    t += 1;
                }
            }
            first.push(s1);
            second.push(s2);
        }
        Self { first, second }
    }

    /// ML covariance of rows `[a, b)`.
    fn covariance(&self, a: usize, b: usize) -> [[f64; DIM]; DIM] {
        let n = (b - a) as f64;
        let mu: Row = std::array::from_fn(|i| (self.first[b][i] - self.first[a][i]) / n);
        let mut cov = [[0.0; DIM]; DIM];
        let mut t = 0;
        for i in 0..DIM {
            for j in i..DIM {
                let v = (self.second[b][t] - self.second[a][t]) / n - mu[i] * mu[j];
                cov[i][j] = v;
                cov[j][i] = v;
                t += 1;
            }
        }
        cov
    }
}

/// Best admissible split of `rows`: `(split, ΔBIC)`, lowest split on ties.
fn best_split(rows: &[Row], margin: usize, lambda: f64) -> Result<Option<(usize, f64)>, BicError> {
    best_split_within(rows, margin, margin, usize::MAX, lambda)
}

/// As [`best_split`], with candidates further limited to `[lo, hi]`.
fn best_split_within(
    rows: &[Row],
    margin: usize,
    lo: usize,
    hi: usize,
    lambda: f64,
) -> Result<Option<(usize, f64)>, BicError> {
    let n = rows.len();
    if n < 2 * margin {
        return Ok(None);
    }
    let lo = lo.max(margin);
    let hi = hi.min(n - margin);
    if lo > hi {
        return Ok(None);
    }
    let moments = WindowMoments::new(rows);
    let whole = 0.5 * n as f64 * log_det(&moments.covariance(0, n))?;
    let penalty = lambda * bic_penalty(n);
    let scores: Vec<Result<f64, BicError>> = (lo..=hi)
        .into_par_iter()
        .map(|s| {
            let l = log_det(&moments.covariance(0, s))?;
            let r = log_det(&moments.covariance(s, n))?;
            Ok(whole - 0.5 * s as f64 * l - 0.5 * (n - s) as f64 * r - penalty)
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, score) in scores.into_iter().enumerate() {
        let score = score?;
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((lo + i, score));
        }
    }
    Ok(best)
}

/// Growing-window speaker-change scan.
///
/// A window of `initial_window_s` starts at the current origin. If the best
/// split has a ΔBIC above `clearance`, a boundary is emitted there and the
/// window restarts at the boundary; otherwise the window grows by
/// `growth_step_s`, and once it is `max_window_s` long it slides forward by
/// the same step instead.
///
/// A detection made with little data past the change is placed imprecisely,
/// and restarting there leaves a sliver of the old speaker that triggers a
/// second, spurious boundary. So each detection is re-located once in a
/// window reaching as far past it as before it, searching within one growth
/// step of the first estimate.
pub fn detect_speaker_changes(
    features: &FeatureSequence,
    cfg: &BicConfig,
) -> Result<Vec<Boundary>, BicError> {
    cfg.validate()?;
    let rate = features.sets_per_second;
    let to_frames = |s: f64| ((s * rate).round() as usize).max(1);
    let initial = to_frames(cfg.initial_window_s);
    let step = to_frames(cfg.growth_step_s);
    let max_len = to_frames(cfg.max_window_s).max(initial);
    let margin = cfg.min_margin_frames.max(MIN_SIDE_FRAMES);

    let rows: Vec<Row> = features.frames.iter().map(|f| f.coeffs).collect();
    let n = rows.len();
    if n < initial {
        return Err(BicError::ClipTooShort {
            frames: n,
            required: initial,
        });
    }

    let mut boundaries = Vec::new();
    let mut origin = 0;
    let mut len = initial;
    loop {
        let end = (origin + len).min(n);
        let at_end = end == n;
        if let Some((split, score)) = best_split(&rows[origin..end], margin, cfg.lambda)? {
            if score > cfg.clearance {
                let (split, score) = refine(
                    &rows,
                    origin,
                    split,
                    n.min(origin + max_len),
                    step,
                    margin,
                    cfg,
                )
                .filter(|&(_, s)| s > cfg.clearance)
                .unwrap_or((split, score));
                let idx = origin + split;
                boundaries.push(Boundary {
                    t: features.frames[idx].t_start,
                    score,
                });
                origin = idx;
                len = initial;
                continue;
            }
        }
        if at_end {
            break;
        }
        if len < max_len {
            len = (len + step).min(max_len);
        } else {
            origin += step;
        }
    }
    Ok(boundaries)
}

fn refine(
    rows: &[Row],
    origin: usize,
    split: usize,
    limit: usize,
    step: usize,
    margin: usize,
    cfg: &BicConfig,
) -> Option<(usize, f64)> {
    let end = (origin + 2 * split).min(limit);
    best_split_within(
        &rows[origin..end],
        margin,
        split.saturating_sub(step),
        split + step,
        cfg.lambda,
    )
    .ok()
    .flatten()
}
