use super::{BicError, Row, DIM, MIN_SIDE_FRAMES};
use crate::audio_features::FeatureFrame;

/// Ridge added to a covariance whose Cholesky factorization fails.
pub const REGULARIZATION: f64 = 1e-8;

/// `(1/2)·(d + d(d+1)/2)·ln N`: free parameters of one extra full-covariance
/// Gaussian, scaled by the log sample count.
pub fn bic_penalty(n: usize) -> f64 {
    let d = DIM as f64;
    0.5 * (d + d * (d + 1.0) / 2.0) * (n as f64).ln()
}

/// Maximum-likelihood covariance (divides by N), two-pass.
pub fn sample_covariance(rows: &[Row]) -> [[f64; DIM]; DIM] {
    let n = rows.len() as f64;
    let mut mean = [0.0; DIM];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = [[0.0; DIM]; DIM];
    for r in rows {
        let c: Row = std::array::from_fn(|i| r[i] - mean[i]);
        for i in 0..DIM {
            for j in i..DIM {
                cov[i][j] += c[i] * c[j];
            }
        }
    }
    for i in 0..DIM {
        for j in i..DIM {
            cov[i][j] /= n;
            cov[j][i] = cov[i][j];
        }
    }
    cov
}

fn cholesky_log_det(m: &[[f64; DIM]; DIM]) -> Option<f64> {
    let mut l = [[0.0; DIM]; DIM];
    let mut log_det = 0.0;
    for j in 0..DIM {
        let mut diag = m[j][j];
        for k in 0..j {
            diag -= l[j][k] * l[j][k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l[j][j] = ljj;
        log_det += 2.0 * ljj.ln();
        for i in j + 1..DIM {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / ljj;
        }
    }
    Some(log_det)
}

/// `ln |Σ|` of a symmetric positive (semi)definite matrix. A matrix that is
/// not numerically positive definite gets [`REGULARIZATION`]·I added once.
pub fn log_det(cov: &[[f64; DIM]; DIM]) -> Result<f64, BicError> {
    if let Some(v) = cholesky_log_det(cov) {
        return Ok(v);
    }
    let mut reg = *cov;
    for (i, row) in reg.iter_mut().enumerate() {
        row[i] += REGULARIZATION;
    }
    cholesky_log_det(&reg).ok_or(BicError::SingularCovariance)
}

/// ΔBIC of splitting `rows` at `split` into two full-covariance Gaussians
/// versus modelling all of it with one. Positive favours two models.
pub fn bic_delta_rows(rows: &[Row], split: usize, lambda: f64) -> Result<f64, BicError> {
    let n = rows.len();
    let (left, right) = rows.split_at(split.min(n));
    if left.len() < MIN_SIDE_FRAMES || right.len() < MIN_SIDE_FRAMES {
        return Err(BicError::InsufficientSamples {
            left: left.len(),
            right: right.len(),
            required: MIN_SIDE_FRAMES,
        });
    }
    let whole = log_det(&sample_covariance(rows))?;
    let l = log_det(&sample_covariance(left))?;
    let r = log_det(&sample_covariance(right))?;
    Ok(0.5 * n as f64 * whole
        - 0.5 * left.len() as f64 * l
        - 0.5 * right.len() as f64 * r
        - lambda * bic_penalty(n))
}

pub fn bic_delta(frames: &[FeatureFrame], split: usize, lambda: f64) -> Result<f64, BicError> {
    let rows: Vec<Row> = frames.iter().map(|f| f.coeffs).collect();
    bic_delta_rows(&rows, split, lambda)
}
