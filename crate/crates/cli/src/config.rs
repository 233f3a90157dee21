//! Flat `key=value` run configuration. Precedence: flags, then file, then
//! built-in defaults.

use anyhow::{anyhow, bail, Context, Result};
use pvseg_core::audio_features::{FeatureConfig, SetLength};
use pvseg_core::audio_segmentation::BicConfig;
use pvseg_core::media_io::HistogramMode;
use pvseg_core::speaker_analysis::DEFAULT_CV_THRESHOLD;
use pvseg_core::text_index::DEFAULT_THRESHOLD;
use pvseg_core::timeline::DEFAULT_FRAMES_PER_PIXEL;
use pvseg_core::video_segmentation::ShotConfig;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Used for the pixel scale when there is no video track.
pub const FALLBACK_FPS: f64 = 29.97;

pub fn defaults() -> BTreeMap<String, String> {
    let bic = BicConfig::default();
    let shot = ShotConfig::default();
    let feat = FeatureConfig::default();
    let pairs: [(&str, String); 33] = [
        ("audio", String::new()),
        ("frames", String::new()),
        ("histograms", String::new()),
        ("transcript", String::new()),
        ("themes", String::new()),
        ("slides", String::new()),
        ("out", "out".into()),
        ("video_id", String::new()),
        ("fps", String::new()),
        ("histogram_mode", "rgb8".into()),
        ("features.sets_per_second", feat.sets_per_second.to_string()),
        ("features.set_length", "auto".into()),
        ("bic.lambda", bic.lambda.to_string()),
        ("bic.initial_window_s", bic.initial_window_s.to_string()),
        ("bic.growth_step_s", bic.growth_step_s.to_string()),
        ("bic.max_window_s", bic.max_window_s.to_string()),
        ("bic.min_margin_frames", bic.min_margin_frames.to_string()),
        ("bic.clearance", bic.clearance.to_string()),
        ("shot.window_s", shot.window_s.to_string()),
        ("shot.deviation_k", shot.deviation_k.to_string()),
        ("shot.min_shot_s", shot.min_shot_s.to_string()),
        ("shot.min_jump", shot.min_jump.to_string()),
        ("text.threshold", DEFAULT_THRESHOLD.to_string()),
        ("cluster.enabled", "true".into()),
        ("cluster.lambda", bic.lambda.to_string()),
        ("cluster.hint_cv", DEFAULT_CV_THRESHOLD.to_string()),
        ("cluster.hint_bias", "0".into()),
        ("activity.audio_bin_s", "0.5".into()),
        (
            "timeline.frames_per_pixel",
            DEFAULT_FRAMES_PER_PIXEL.to_string(),
        ),
        ("timeline.fallback_fps", FALLBACK_FPS.to_string()),
        ("keyframes.images", "true".into()),
        ("scatter.clips", String::new()),
        ("threads", "0".into()),
    ];
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Parse `key = value` lines; `#` starts a comment line.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value, got '{line}'", n + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Layer `file` and then `flags` over the defaults. Unknown keys are errors.
pub fn resolve(
    file: &BTreeMap<String, String>,
    flags: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, String>> {
    let mut map = defaults();
    for layer in [file, flags] {
        for (k, v) in layer {
            match map.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => bail!("unknown config key '{k}'"),
            }
        }
    }
    Ok(map)
}

pub fn echo(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub audio: Option<PathBuf>,
    pub frames: Option<PathBuf>,
    pub histograms: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
    pub themes: Option<PathBuf>,
    pub slides: Option<PathBuf>,
    pub out: PathBuf,
    pub video_id: String,
    pub fps: Option<f64>,
    pub histogram_mode: HistogramMode,
    pub features: FeatureConfig,
    pub bic: BicConfig,
    pub shot: ShotConfig,
    pub text_threshold: f64,
    pub cluster_enabled: bool,
    pub cluster_lambda: f64,
    pub hint_cv: f64,
    pub hint_bias: f64,
    pub audio_bin_s: f64,
    pub frames_per_pixel: f64,
    pub fallback_fps: f64,
    pub keyframe_images: bool,
    pub scatter_clips: Option<PathBuf>,
    pub threads: usize,
    /// Resolved key/value view, written next to outputs.
    pub resolved: BTreeMap<String, String>,
}

fn num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = &map[key];
    raw.parse::<T>()
        .map_err(|e| anyhow!("config key '{key}': cannot parse '{raw}': {e}"))
}

fn path(map: &BTreeMap<String, String>, key: &str) -> Option<PathBuf> {
    Some(&map[key]).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn stem(p: &Path) -> Option<String> {
    p.file_stem().map(|s| s.to_string_lossy().into_owned())
}

impl RunConfig {
    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self> {
        let set_length = match map["features.set_length"].as_str() {
            "auto" | "AUTO" => SetLength::Auto,
            n => SetLength::Samples(
                n.parse()
                    .with_context(|| format!("config key 'features.set_length': '{n}'"))?,
            ),
        };
        let histogram_mode = HistogramMode::parse(&map["histogram_mode"]).ok_or_else(|| {
            anyhow!(
                "config key 'histogram_mode': expected rgbN or grayN, got '{}'",
                map["histogram_mode"]
            )
        })?;
        let fps = match map["fps"].as_str() {
            "" => None,
            _ => Some(num::<f64>(&map, "fps")?),
        };
        let audio = path(&map, "audio");
        let frames = path(&map, "frames");
        let histograms = path(&map, "histograms");
        let video_id = match map["video_id"].as_str() {
            "" => audio
                .as_deref()
                .or(frames.as_deref())
                .or(histograms.as_deref())
                .and_then(stem)
                .unwrap_or_else(|| "video".into()),
            id => id.to_string(),
        };
        let bic = BicConfig {
            lambda: num(&map, "bic.lambda")?,
            initial_window_s: num(&map, "bic.initial_window_s")?,
            growth_step_s: num(&map, "bic.growth_step_s")?,
            max_window_s: num(&map, "bic.max_window_s")?,
            min_margin_frames: num(&map, "bic.min_margin_frames")?,
            clearance: num(&map, "bic.clearance")?,
        };
        bic.validate().map_err(|e| anyhow!("bic config: {e}"))?;
        Ok(Self {
            audio,
            frames,
            histograms,
            transcript: path(&map, "transcript"),
            themes: path(&map, "themes"),
            slides: path(&map, "slides"),
            out: PathBuf::from(&map["out"]),
            video_id,
            fps,
            histogram_mode,
            features: FeatureConfig {
                sets_per_second: num(&map, "features.sets_per_second")?,
                set_length,
            },
            bic,
            shot: ShotConfig {
                window_s: num(&map, "shot.window_s")?,
                deviation_k: num(&map, "shot.deviation_k")?,
                min_shot_s: num(&map, "shot.min_shot_s")?,
                min_jump: num(&map, "shot.min_jump")?,
            },
            text_threshold: num(&map, "text.threshold")?,
            cluster_enabled: num(&map, "cluster.enabled")?,
            cluster_lambda: num(&map, "cluster.lambda")?,
            hint_cv: num(&map, "cluster.hint_cv")?,
            hint_bias: num(&map, "cluster.hint_bias")?,
            audio_bin_s: num(&map, "activity.audio_bin_s")?,
            frames_per_pixel: num(&map, "timeline.frames_per_pixel")?,
            fallback_fps: num(&map, "timeline.fallback_fps")?,
            keyframe_images: num(&map, "keyframes.images")?,
            scatter_clips: path(&map, "scatter.clips"),
            threads: num(&map, "threads")?,
            resolved: map,
        })
    }

    pub fn has_video(&self) -> bool {
        self.frames.is_some() || self.histograms.is_some()
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}
