use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub const NUM_COEFFS: usize = 13;
pub const NUM_FILTERS: usize = 26;
/// Filter energies below this are clamped before the log.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Precomputed window, FFT plan and filterbank for one set length and rate.
///
/// Pipeline: Hann window, zero-pad to the next power of two, magnitude
/// spectrum, 26 triangular HTK-mel filters over `[0, sample_rate/2]`, natural
/// log with a floor, orthonormal DCT-II, keep c0..c12.
pub struct MfccExtractor {
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    fft_size: usize,
    /// Sparse filters: (first bin, weights).
    filters: Vec<(usize, Vec<f64>)>,
    centers_hz: Vec<f64>,
    dct: Vec<[f64; NUM_FILTERS]>,
}

impl MfccExtractor {
    pub fn new(window_len: usize, sample_rate: u32) -> Self {
        let window = hann(window_len);
        let fft_size = window_len.max(1).next_power_of_two();
        let fft = FftPlanner::new().plan_fft_forward(fft_size);
        let (filters, centers_hz) = mel_filterbank(fft_size, sample_rate as f64);
        Self {
            window,
            fft,
            fft_size,
            filters,
            centers_hz,
            dct: dct_table(),
        }
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    /// Center frequency of each mel filter, ascending.
    pub fn filter_centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    /// Triangular-filter weight of filter `j` at FFT bin `k`.
    pub fn filter_weight(&self, j: usize, k: usize) -> f64 {
        let (first, w) = &self.filters[j];
        k.checked_sub(*first)
            .and_then(|i| w.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Magnitude of the one-sided spectrum of the windowed, zero-padded input.
    pub fn magnitude_spectrum(&self, samples: &[f64]) -> Vec<f64> {
        assert_eq!(samples.len(), self.window.len(), "window length mismatch");
        let mut buf: Vec<Complex<f64>> = samples
            .iter()
            .zip(&self.window)
            .map(|(s, w)| Complex::new(s * w, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(self.fft_size)
            .collect();
        self.fft.process(&mut buf);
        buf[..=self.fft_size / 2].iter().map(|c| c.norm()).collect()
    }

    pub fn mel_energies(&self, samples: &[f64]) -> [f64; NUM_FILTERS] {
        let spectrum = self.magnitude_spectrum(samples);
        let mut energies = [0.0; NUM_FILTERS];
        for (e, (first, weights)) in energies.iter_mut().zip(&self.filters) {
            *e = weights
                .iter()
                .zip(&spectrum[*first..])
                .map(|(w, m)| w * m)
                .sum();
        }
        energies
    }

    pub fn compute(&self, samples: &[f64]) -> [f64; NUM_COEFFS] {
        let log_energies = self.mel_energies(samples).map(|e| e.max(LOG_FLOOR).ln());
        // Non-DC basis vectors sum to zero, so subtracting a common reference
        // leaves them unchanged and makes a flat log spectrum map to exact zeros.
        let reference = log_energies[0];
        let mut out = [0.0; NUM_COEFFS];
        out[0] = self.dct[0]
            .iter()
            .zip(&log_energies)
            .map(|(b, x)| b * x)
            .sum();
        for (k, c) in out.iter_mut().enumerate().skip(1) {
            *c = self.dct[k]
                .iter()
                .zip(&log_energies)
                .map(|(b, x)| b * (x - reference))
                .sum();
        }
        out
    }
}

/// MFCC of a single window.
pub fn mfcc(window: &[f64], sample_rate: u32) -> [f64; NUM_COEFFS] {
    MfccExtractor::new(window.len(), sample_rate).compute(window)
}

fn hann(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / denom).cos())
        .collect()
}

fn mel_filterbank(fft_size: usize, sample_rate: f64) -> (Vec<(usize, Vec<f64>)>, Vec<f64>) {
    let nyquist = sample_rate / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..NUM_FILTERS + 2)
        .map(|i| mel_to_hz(top * i as f64 / (NUM_FILTERS + 1) as f64))
        .collect();
    let bin_hz = sample_rate / fft_size as f64;
    let n_bins = fft_size / 2 + 1;

    let filters = edges
        .windows(3)
        .map(|e| {
            let (lo, center, hi) = (e[0], e[1], e[2]);
            let first = (lo / bin_hz).ceil() as usize;
            let last = ((hi / bin_hz).floor() as usize).min(n_bins - 1);
            let weights = (first..=last)
                .map(|k| {
                    let f = k as f64 * bin_hz;
                    if f <= center {
                        ((f - lo) / (center - lo)).max(0.0)
                    } else {
                        ((hi - f) / (hi - center)).max(0.0)
                    }
                })
                .collect();
            (first, weights)
        })
        .collect();
    let centers = edges[1..=NUM_FILTERS].to_vec();
    (filters, centers)
}

fn dct_table() -> Vec<[f64; NUM_FILTERS]> {
    let m = NUM_FILTERS as f64;
    (0..NUM_COEFFS)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / m).sqrt()
            } else {
                (2.0 / m).sqrt()
            };
            let mut row = [0.0; NUM_FILTERS];
            for (n, v) in row.iter_mut().enumerate() {
                *v = scale * (PI * k as f64 * (2.0 * n as f64 + 1.0) / (2.0 * m)).cos();
            }
            row
        })
        .collect()
}
