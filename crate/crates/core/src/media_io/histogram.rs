use super::{FrameSequence, MediaError};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Color quantization used for per-frame histograms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramMode {
    /// `per_channel`³ bins over quantized R, G, B.
    Rgb { per_channel: u32 },
    /// Flat bins over Rec.601 luma.
    Gray { bins: u32 },
}

impl Default for HistogramMode {
    fn default() -> Self {
        HistogramMode::Rgb { per_channel: 8 }
    }
}

impl HistogramMode {
    pub fn bin_count(self) -> usize {
        match self {
            HistogramMode::Rgb { per_channel } => (per_channel as usize).pow(3),
            HistogramMode::Gray { bins } => bins as usize,
        }
    }

    fn validate(self) -> Result<(), MediaError> {
        let n = match self {
            HistogramMode::Rgb { per_channel } => per_channel,
            HistogramMode::Gray { bins } => bins,
        };
        if (1..=256).contains(&n) {
            Ok(())
        } else {
            Err(MediaError::InvalidParameter(format!(
                "bins per channel must be in 1..=256, got {n}"
            )))
        }
    }

    /// Parses `rgb<b>` or `gray<b>`, e.g. `rgb8`, `gray64`.
    pub fn parse(s: &str) -> Option<Self> {
        if let Some(n) = s.strip_prefix("rgb") {
            n.parse()
                .ok()
                .map(|per_channel| HistogramMode::Rgb { per_channel })
        } else if let Some(n) = s.strip_prefix("gray") {
            n.parse().ok().map(|bins| HistogramMode::Gray { bins })
        } else {
            None
        }
    }

    fn bin_of(self, [r, g, b]: [u8; 3]) -> usize {
        match self {
            HistogramMode::Rgb { per_channel } => {
                let q = |c: u8| c as usize * per_channel as usize / 256;
                let n = per_channel as usize;
                (q(r) * n + q(g)) * n + q(b)
            }
            HistogramMode::Gray { bins } => {
                let luma = (299 * r as u32 + 587 * g as u32 + 114 * b as u32 + 500) / 1000;
                luma.min(255) as usize * bins as usize / 256
            }
        }
    }
}

/// Per-frame L1-normalized color histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSeries {
    pub fps: f64,
    pub bins: usize,
    pub histograms: Vec<Vec<f64>>,
}

impl HistogramSeries {
    pub fn new(fps: f64, bins: usize, histograms: Vec<Vec<f64>>) -> Result<Self, MediaError> {
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(MediaError::InvalidParameter(format!(
                "fps must be positive, got {fps}"
            )));
        }
        for (i, h) in histograms.iter().enumerate() {
            if h.len() != bins {
                return Err(MediaError::BadCache(format!(
                    "frame {i} has {} bins, expected {bins}",
                    h.len()
                )));
            }
            let sum: f64 = h.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || h.iter().any(|v| !(*v >= 0.0)) {
                return Err(MediaError::BadCache(format!(
                    "frame {i} is not a normalized histogram (sum {sum})"
                )));
            }
        }
        Ok(Self {
            fps,
            bins,
            histograms,
        })
    }

    pub fn len(&self) -> usize {
        self.histograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.histograms.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.fps
    }

    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 / self.fps
    }
}

/// Map every frame to its normalized color histogram. Output order matches
/// frame order regardless of how the work is scheduled.
pub fn compute_histograms(
    seq: &FrameSequence,
    mode: HistogramMode,
) -> Result<HistogramSeries, MediaError> {
    mode.validate()?;
    let bins = mode.bin_count();
    let histograms = seq
        .frames
        .par_iter()
        .map(|frame| {
            let mut counts = vec![0u64; bins];
            let mut total = 0u64;
            for px in frame.rgb_pixels() {
                counts[mode.bin_of(px)] += 1;
                total += 1;
            }
            let total = total.max(1) as f64;
            counts.into_iter().map(|c| c as f64 / total).collect()
        })
        .collect();
    HistogramSeries::new(seq.fps, bins, histograms)
}

/// Serialize as `PVHIST v1 fps=<f> bins=<b> frames=<n>` plus one line per frame.
pub fn write_histogram_cache(
    path: impl AsRef<Path>,
    series: &HistogramSeries,
) -> Result<(), MediaError> {
    let mut out = format!(
        "PVHIST v1 fps={} bins={} frames={}\n",
        series.fps,
        series.bins,
        series.len()
    );
    for h in &series.histograms {
        for (i, v) in h.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{v}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_histogram_cache(path: impl AsRef<Path>) -> Result<HistogramSeries, MediaError> {
    let text = fs::read_to_string(path)?;
    parse_cache(&text)
}

fn parse_cache(text: &str) -> Result<HistogramSeries, MediaError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| MediaError::BadCache("empty file".into()))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("PVHIST") || fields.next() != Some("v1") {
        return Err(MediaError::BadCache(format!("bad header '{header}'")));
    }
    let (mut fps, mut bins, mut frames) = (None, None, None);
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| MediaError::BadCache(format!("bad header field '{field}'")))?;
        let bad = || MediaError::BadCache(format!("bad value in '{field}'"));
        match key {
            "fps" => fps = Some(value.parse::<f64>().map_err(|_| bad())?),
            "bins" => bins = Some(value.parse::<usize>().map_err(|_| bad())?),
            "frames" => frames = Some(value.parse::<usize>().map_err(|_| bad())?),
            _ => {
                return Err(MediaError::BadCache(format!(
                    "unknown header field '{key}'"
                )))
            }
        }
    }
    let missing = |k: &str| MediaError::BadCache(format!("header lacks {k}"));
    let fps = fps.ok_or_else(|| missing("fps"))?;
    let bins = bins.ok_or_else(|| missing("bins"))?;
    let frames = frames.ok_or_else(|| missing("frames"))?;

    let histograms = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| MediaError::BadCache(format!("frame {i}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if histograms.len() != frames {
        return Err(MediaError::BadCache(format!(
            "header announces {frames} frames, found {}",
            histograms.len()
        )));
    }
    HistogramSeries::new(fps, bins, histograms)
}
