//! Six-row timeline document, its JSON interchange form and a static SVG
//! rendering.
//!
//! Every element carries pixel extents computed as `round(t * fps / fpp)`,
//! where `fpp` is the zoom scale in video frames per pixel.

use crate::audio_features::ActivityGraph;
use crate::segment::Segment;
use crate::text_index::PhraseHit;
use crate::video_segmentation::KeyframeRef;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_FRAMES_PER_PIXEL: f64 = 28.0;
pub const MIN_FRAMES_PER_PIXEL: f64 = 1.0;
pub const MAX_FRAMES_PER_PIXEL: f64 = 30.0;
pub const THUMBNAIL_WIDTH_PX: i64 = 80;
pub const THUMBNAIL_HEIGHT_PX: i64 = 60;
pub const MARKER_INTERVAL_S: f64 = 60.0;

#[derive(Debug, thiserror::Error)]
pub enum TimelineError {
    #[error("frames per pixel {0} is outside [1, 30]")]
    ScaleOutOfRange(f64),
    #[error("invalid timeline input: {0}")]
    InvalidInput(String),
    #[error("unsupported timeline schema version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed timeline document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Time to pixel mapping for one zoom level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelScale {
    pub fps: f64,
    pub frames_per_pixel: f64,
}

impl PixelScale {
    pub fn new(fps: f64, frames_per_pixel: f64) -> Result<Self, TimelineError> {
        if !(MIN_FRAMES_PER_PIXEL..=MAX_FRAMES_PER_PIXEL).contains(&frames_per_pixel) {
            return Err(TimelineError::ScaleOutOfRange(frames_per_pixel));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(TimelineError::InvalidInput(format!(
                "fps must be positive, got {fps}"
            )));
        }
        Ok(Self {
            fps,
            frames_per_pixel,
        })
    }

    pub fn x(&self, t: f64) -> i64 {
        (t * self.fps / self.frames_per_pixel).round() as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thumbnail {
    pub segment: usize,
    pub frame_index: usize,
    pub t: f64,
    /// Image path relative to the document.
    pub image: String,
    pub x: i64,
    pub width: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub t: f64,
    pub x: i64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentItem {
    pub t_start: f64,
    pub t_end: f64,
    pub x0: i64,
    pub x1: i64,
    pub score: Option<f64>,
    pub cluster: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub bin_duration_s: f64,
    /// Pixel offset between consecutive bins at this zoom.
    pub x_step: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackRow {
    pub segments: Vec<SegmentItem>,
    pub activity: Option<Activity>,
}

impl TrackRow {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty() && self.activity.as_ref().is_none_or(|a| a.values.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseItem {
    pub phrase: String,
    pub t_start: f64,
    pub t_end: f64,
    pub x0: i64,
    pub x1: i64,
    pub score: f64,
}

/// Rows in display order, top to bottom.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Rows {
    pub thumbnails: Vec<Thumbnail>,
    pub markers: Vec<Marker>,
    pub video: TrackRow,
    pub audio: TrackRow,
    pub theme_phrases: Vec<PhraseItem>,
    pub topic_phrases: Vec<PhraseItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineDoc {
    pub pvtl: u32,
    pub video_id: String,
    pub duration_s: f64,
    pub fps: f64,
    pub frames_per_pixel: f64,
    pub width: i64,
    pub rows: Rows,
}

/// Keyframe of the video segment at `segment`, stored at `image`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyframeImage {
    pub segment: usize,
    pub keyframe: KeyframeRef,
    pub image: String,
}

#[derive(Debug, Clone, Default)]
pub struct TimelineInputs<'a> {
    pub video_id: String,
    pub duration_s: f64,
    pub fps: f64,
    pub video_segments: &'a [Segment],
    pub audio_segments: &'a [Segment],
    pub video_activity: Option<&'a ActivityGraph>,
    pub audio_activity: Option<&'a ActivityGraph>,
    pub theme_hits: &'a [PhraseHit],
    pub topic_hits: &'a [PhraseHit],
    pub keyframes: &'a [KeyframeImage],
}

/// `m:ss`, or `h:mm:ss` from one hour on.
pub fn format_clock(t: f64) -> String {
    let total = t.max(0.0).round() as u64;
    let (h, m, s) = (total / 3600, total / 60 % 60, total % 60);
    if h > 0 {
        format!("{h}:{m:02}:{s:02}")
    } else {
        format!("{m}:{s:02}")
    }
}

fn segment_items(segs: &[Segment], scale: PixelScale) -> Vec<SegmentItem> {
    segs.iter()
        .map(|s| SegmentItem {
            t_start: s.t_start,
            t_end: s.t_end,
            x0: scale.x(s.t_start),
            x1: scale.x(s.t_end),
            score: s.score,
            cluster: s.cluster,
        })
        .collect()
}

fn activity(graph: Option<&ActivityGraph>, scale: PixelScale) -> Option<Activity> {
    graph.map(|g| Activity {
        bin_duration_s: g.bin_duration_s,
        x_step: g.bin_duration_s * scale.fps / scale.frames_per_pixel,
        values: g.values.clone(),
    })
}

fn phrase_items(hits: &[PhraseHit], scale: PixelScale) -> Vec<PhraseItem> {
    let mut items: Vec<PhraseItem> = hits
        .iter()
        .map(|h| PhraseItem {
            phrase: h.phrase.clone(),
            t_start: h.t_start,
            t_end: h.t_end,
            x0: scale.x(h.t_start),
            x1: scale.x(h.t_end),
            score: h.score,
        })
        .collect();
    items.sort_by(|a, b| {
        a.t_start
            .total_cmp(&b.t_start)
            .then_with(|| a.phrase.cmp(&b.phrase))
    });
    items
}

pub fn build_timeline(
    inputs: &TimelineInputs<'_>,
    frames_per_pixel: f64,
) -> Result<TimelineDoc, TimelineError> {
    let scale = PixelScale::new(inputs.fps, frames_per_pixel)?;
    let duration = inputs.duration_s;
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(TimelineError::InvalidInput(format!(
            "duration must be non-negative, got {duration}"
        )));
    }

    let markers = (0..)
        .map(|k| k as f64 * MARKER_INTERVAL_S)
        .take_while(|&t| t <= duration)
        .map(|t| Marker {
            t,
            x: scale.x(t),
            label: format_clock(t),
        })
        .collect();

    let mut thumbnails = Vec::new();
    for kf in inputs.keyframes {
        let seg = inputs.video_segments.get(kf.segment).ok_or_else(|| {
            TimelineError::InvalidInput(format!(
                "keyframe refers to missing video segment {}",
                kf.segment
            ))
        })?;
        let x0 = scale.x(seg.t_start);
        if scale.x(seg.t_end) - x0 >= THUMBNAIL_WIDTH_PX {
            thumbnails.push(Thumbnail {
                segment: kf.segment,
                frame_index: kf.keyframe.frame_index,
                t: kf.keyframe.t,
                image: kf.image.clone(),
                x: x0,
                width: THUMBNAIL_WIDTH_PX,
            });
        }
    }
    thumbnails.sort_by_key(|t| t.segment);

    Ok(TimelineDoc {
        pvtl: SCHEMA_VERSION,
        video_id: inputs.video_id.clone(),
        duration_s: duration,
        fps: inputs.fps,
        frames_per_pixel,
        width: scale.x(duration),
        rows: Rows {
            thumbnails,
            markers,
            video: TrackRow {
                segments: segment_items(inputs.video_segments, scale),
                activity: activity(inputs.video_activity, scale),
            },
            audio: TrackRow {
                segments: segment_items(inputs.audio_segments, scale),
                activity: activity(inputs.audio_activity, scale),
            },
            theme_phrases: phrase_items(inputs.theme_hits, scale),
            topic_phrases: phrase_items(inputs.topic_hits, scale),
        },
    })
}

/// Canonical JSON: fixed key order, two-space indent, trailing newline.
pub fn doc_to_json(doc: &TimelineDoc) -> Result<String, TimelineError> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

pub fn doc_from_json(text: &str) -> Result<TimelineDoc, TimelineError> {
    let doc: TimelineDoc = serde_json::from_str(text)?;
    if doc.pvtl != SCHEMA_VERSION {
        return Err(TimelineError::UnsupportedVersion(doc.pvtl));
    }
    Ok(doc)
}

pub fn export_doc(doc: &TimelineDoc, path: impl AsRef<Path>) -> Result<(), TimelineError> {
    std::fs::write(path, doc_to_json(doc)?)?;
    Ok(())
}

pub fn import_doc(path: impl AsRef<Path>) -> Result<TimelineDoc, TimelineError> {
    doc_from_json(&std::fs::read_to_string(path)?)
}

pub const VIDEO_ACTIVITY_COLOR: &str = "red";
pub const AUDIO_ACTIVITY_COLOR: &str = "green";
pub const PHRASE_COLOR: &str = "yellow";

const MARKER_ROW_H: i64 = 24;
const TRACK_ROW_H: i64 = 48;
const PHRASE_ROW_H: i64 = 20;

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn track_svg(out: &mut String, id: &str, row: &TrackRow, color: &str, y: i64) {
    let _ = writeln!(out, r#"<g id="{id}" transform="translate(0,{y})">"#);
    for s in &row.segments {
        let _ = writeln!(
            out,
            r#"<rect class="segment" x="{}" y="0" width="{}" height="{TRACK_ROW_H}" fill="none" stroke="gray"/>"#,
            s.x0,
            (s.x1 - s.x0).max(0)
        );
    }
    if let Some(a) = row.activity.as_ref().filter(|a| !a.values.is_empty()) {
        let peak = a.values.iter().cloned().fold(0.0_f64, f64::max);
        let norm = if peak > 0.0 { peak } else { 1.0 };
        let h = TRACK_ROW_H as f64;
        let points: Vec<String> = a
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", i as f64 * a.x_step, h - h * v / norm))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="activity" fill="none" stroke="{color}" points="{}"/>"#,
            points.join(" ")
        );
    }
    out.push_str("</g>\n");
}

fn phrase_svg(out: &mut String, id: &str, items: &[PhraseItem], y: i64) {
    let _ = writeln!(out, r#"<g id="{id}" transform="translate(0,{y})">"#);
    for p in items {
        let _ = writeln!(
            out,
            r#"<rect class="phrase" x="{}" y="2" width="{}" height="{}" fill="{PHRASE_COLOR}" stroke="olive"><title>{}</title></rect>"#,
            p.x0,
            (p.x1 - p.x0).max(1),
            PHRASE_ROW_H - 4,
            xml_escape(&p.phrase)
        );
    }
    out.push_str("</g>\n");
}

/// Static SVG of the document. Rows keep their fixed order; rows without
/// content are left out. X coordinates are the document's pixel coordinates.
pub fn render_svg(doc: &TimelineDoc) -> String {
    let r = &doc.rows;
    let width = doc.width.max(1);
    let mut body = String::new();
    let mut y = 0;

    if !r.thumbnails.is_empty() {
        let _ = writeln!(body, r#"<g id="thumbnails" transform="translate(0,{y})">"#);
        for t in &r.thumbnails {
            let _ = writeln!(
                body,
                r#"<image x="{}" y="0" width="{}" height="{THUMBNAIL_HEIGHT_PX}" xlink:href="{}"/>"#,
                t.x,
                t.width,
                xml_escape(&t.image)
            );
        }
        body.push_str("</g>\n");
        y += THUMBNAIL_HEIGHT_PX;
    }

    let _ = writeln!(body, r#"<g id="markers" transform="translate(0,{y})">"#);
    let _ = writeln!(
        body,
        r#"<line class="axis" x1="0" y1="{MARKER_ROW_H}" x2="{width}" y2="{MARKER_ROW_H}" stroke="black"/>"#
    );
    for m in &r.markers {
        let _ = writeln!(
            body,
            r#"<line class="tick" x1="{x}" y1="{}" x2="{x}" y2="{MARKER_ROW_H}" stroke="black"/><text x="{x}" y="10" font-size="9">{}</text>"#,
            MARKER_ROW_H - 6,
            xml_escape(&m.label),
            x = m.x
        );
    }
    for (track, color) in [
        (&r.video, VIDEO_ACTIVITY_COLOR),
        (&r.audio, AUDIO_ACTIVITY_COLOR),
    ] {
        for s in track.segments.iter().filter(|s| s.t_start > 0.0) {
            let _ = writeln!(
                body,
                r#"<line class="boundary" x1="{x}" y1="12" x2="{x}" y2="{MARKER_ROW_H}" stroke="{color}"/>"#,
                x = s.x0
            );
        }
    }
    body.push_str("</g>\n");
    y += MARKER_ROW_H;

    if !r.video.is_empty() {
        track_svg(&mut body, "video", &r.video, VIDEO_ACTIVITY_COLOR, y);
        y += TRACK_ROW_H;
    }
    if !r.audio.is_empty() {
        track_svg(&mut body, "audio", &r.audio, AUDIO_ACTIVITY_COLOR, y);
        y += TRACK_ROW_H;
    }
    if !r.theme_phrases.is_empty() {
        phrase_svg(&mut body, "theme_phrases", &r.theme_phrases, y);
        y += PHRASE_ROW_H;
    }
    if !r.topic_phrases.is_empty() {
        phrase_svg(&mut body, "topic_phrases", &r.topic_phrases, y);
        y += PHRASE_ROW_H;
    }

    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\" width=\"{width}\" height=\"{y}\" viewBox=\"0 0 {width} {y}\">\n\
         <title>{}</title>\n{body}</svg>\n",
        xml_escape(&doc.video_id)
    )
}

pub fn render_static(doc: &TimelineDoc, path: impl AsRef<Path>) -> Result<(), TimelineError> {
    std::fs::write(path, render_svg(doc))?;
    Ok(())
}
