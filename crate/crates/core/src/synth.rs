//! Seeded synthetic fixtures: Gaussian feature streams, tone-based speakers,
//! static and moving scenes, and corrupted transcripts.

use crate::audio_features::{FeatureFrame, FeatureSequence, NUM_COEFFS};
use crate::media_io::{AudioClip, Frame, FrameSequence};
use crate::text_index::TimedToken;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

pub type Row = [f64; NUM_COEFFS];

/// Isotropic 13-dimensional Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSource {
    pub mean: Row,
    pub std: f64,
}

impl GaussianSource {
    /// Unit-variance source whose mean is `offset` in every coordinate.
    pub fn standard(offset: f64) -> Self {
        Self {
            mean: [offset; NUM_COEFFS],
            std: 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Row {
        std::array::from_fn(|i| {
            let z: f64 = StandardNormal.sample(rng);
            self.mean[i] + self.std * z
        })
    }
}

pub fn gaussian_rows<R: Rng + ?Sized>(rng: &mut R, src: &GaussianSource, n: usize) -> Vec<Row> {
    (0..n).map(|_| src.sample(rng)).collect()
}

/// Feature stream made of consecutive `(source, seconds)` runs.
pub fn gaussian_feature_stream<R: Rng + ?Sized>(
    rng: &mut R,
    runs: &[(GaussianSource, f64)],
    sets_per_second: f64,
) -> FeatureSequence {
    let mut frames = Vec::new();
    for (src, secs) in runs {
        let n = (secs * sets_per_second).round() as usize;
        for _ in 0..n {
            let t_start = frames.len() as f64 / sets_per_second;
            frames.push(FeatureFrame {
                t_start,
                coeffs: src.sample(rng),
            });
        }
    }
    FeatureSequence {
        frames,
        sets_per_second,
        set_length_samples: 0,
    }
}

/// A crude voiced speaker: harmonics of `pitch_hz` shaped by two formant
/// peaks, with per-syllable loudness and pitch jitter plus a noise floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneVoice {
    pub pitch_hz: f64,
    pub formants_hz: [f64; 2],
    pub level: f64,
}

impl ToneVoice {
    pub fn render<R: Rng + ?Sized>(&self, rng: &mut R, sample_rate: u32, seconds: f64) -> Vec<f64> {
        let n = (seconds * sample_rate as f64).round() as usize;
        let rate = sample_rate as f64;
        let syllable = (rate / 8.0) as usize;
        let mut out = Vec::with_capacity(n);
        let mut phase = 0.0f64;
        let mut gain = 1.0;
        let mut pitch = self.pitch_hz;
        for i in 0..n {
            if i % syllable == 0 {
                gain = rng.gen_range(0.6..1.0);
                pitch = self.pitch_hz * rng.gen_range(0.95..1.05);
            }
            phase += 2.0 * PI * pitch / rate;
            let mut v = 0.0;
            let mut h = 1;
            while pitch * h as f64 <= rate / 2.0 - 100.0 && h <= 40 {
                let f = pitch * h as f64;
                let amp: f64 = self
                    .formants_hz
                    .iter()
                    .map(|fc| 1.0 / (1.0 + ((f - fc) / 150.0).powi(2)))
                    .sum();
                v += amp * (phase * h as f64).sin();
                h += 1;
            }
            let noise: f64 = StandardNormal.sample(rng);
            out.push((self.level * gain * v / 4.0 + 0.002 * noise).clamp(-1.0, 1.0));
        }
        out
    }
}

/// Low-level white noise.
pub fn noise<R: Rng + ?Sized>(rng: &mut R, sample_rate: u32, seconds: f64, level: f64) -> Vec<f64> {
    let n = (seconds * sample_rate as f64).round() as usize;
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            (level * z).clamp(-1.0, 1.0)
        })
        .collect()
}

pub fn concat_clip(sample_rate: u32, parts: Vec<Vec<f64>>) -> AudioClip {
    AudioClip::new(sample_rate, parts.concat())
}

/// Grayscale frames of a static scene with uniform value `level`, optionally
/// with per-pixel noise of amplitude `jitter`.
pub fn static_scene<R: Rng + ?Sized>(
    rng: &mut R,
    frames: usize,
    size: (u32, u32),
    level: u8,
    jitter: u8,
) -> Vec<Frame> {
    let n = (size.0 * size.1) as usize;
    (0..frames)
        .map(|i| {
            let data = (0..n)
                .map(|_| {
                    if jitter == 0 {
                        level
                    } else {
                        let d = rng.gen_range(-(jitter as i16)..=jitter as i16);
                        (level as i16 + d).clamp(0, 255) as u8
                    }
                })
                .collect();
            Frame::gray(i, size.0, size.1, data)
        })
        .collect()
}

/// Frames of fast-changing random content.
pub fn high_motion<R: Rng + ?Sized>(rng: &mut R, frames: usize, size: (u32, u32)) -> Vec<Frame> {
    let n = (size.0 * size.1) as usize;
    (0..frames)
        .map(|i| {
            let base: u8 = rng.gen();
            let spread = rng.gen_range(10u8..120);
            let data = (0..n)
                .map(|_| base.saturating_add(rng.gen_range(0..=spread)))
                .collect();
            Frame::gray(i, size.0, size.1, data)
        })
        .collect()
}

pub fn frame_sequence(fps: f64, parts: Vec<Vec<Frame>>) -> FrameSequence {
    FrameSequence::new(fps, parts.concat()).expect("fixture frames share one size")
}

/// Replace `floor(fraction · len)` characters of `word` at distinct random
/// positions with a different lowercase letter.
pub fn corrupt_word<R: Rng + ?Sized>(rng: &mut R, word: &str, fraction: f64) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    let k = (fraction * chars.len() as f64).floor() as usize;
    for pos in sample(rng, chars.len(), k.min(chars.len())).into_iter() {
        let old = chars[pos];
        chars[pos] = loop {
            let c = (b'a' + rng.gen_range(0..26u8)) as char;
            if c != old {
                break c;
            }
        };
    }
    chars.into_iter().collect()
}

/// Tokens at a steady `seconds_per_word` pace starting from `t0`.
pub fn timed_tokens(words: &[String], t0: f64, seconds_per_word: f64) -> Vec<TimedToken> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| TimedToken {
            word: w.clone(),
            t_start: t0 + i as f64 * seconds_per_word,
            t_end: t0 + (i + 1) as f64 * seconds_per_word,
        })
        .collect()
}
