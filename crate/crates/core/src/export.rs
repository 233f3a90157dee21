//! CSV and image artifacts written between pipeline stages.

use crate::audio_features::{ActivityGraph, FeatureFrame, FeatureSequence, NUM_COEFFS};
use crate::media_io::FrameSequence;
use crate::segment::{Boundary, Segment, SegmentKind};
use crate::speaker_analysis::{Cluster, ScatterSeries};
use crate::text_index::{PhraseHit, PhraseKind};
use crate::timeline::KeyframeImage;
use crate::video_segmentation::KeyframeRef;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {reason}")]
    Malformed { path: String, reason: String },
}

fn malformed(path: &Path, reason: impl Into<String>) -> ExportError {
    ExportError::Malformed {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

fn write_rows<T: Serialize>(
    path: &Path,
    rows: impl IntoIterator<Item = T>,
) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ExportError> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// `t_start,c0..c12`, preceded by a `#` line recording the framing.
pub fn write_features(path: impl AsRef<Path>, feats: &FeatureSequence) -> Result<(), ExportError> {
    let mut out = BufWriter::new(File::create(path.as_ref())?);
    writeln!(
        out,
        "# sets_per_second={} set_length={}",
        feats.sets_per_second, feats.set_length_samples
    )?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t_start".to_string()];
    header.extend((0..NUM_COEFFS).map(|i| format!("c{i}")));
    w.write_record(&header)?;
    for f in &feats.frames {
        let mut rec = vec![f.t_start.to_string()];
        rec.extend(f.coeffs.iter().map(|c| c.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureSequence, ExportError> {
    let path = path.as_ref();
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    let mut sps = None;
    let mut set_len = None;
    for kv in first.trim_start_matches('#').split_whitespace() {
        match kv.split_once('=') {
            Some(("sets_per_second", v)) => sps = v.parse::<f64>().ok(),
            Some(("set_length", v)) => set_len = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let (Some(sets_per_second), Some(set_length_samples)) = (sps, set_len) else {
        return Err(malformed(path, "missing framing header"));
    };
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut frames = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != NUM_COEFFS + 1 {
            return Err(malformed(
                path,
                format!("expected {} columns, got {}", NUM_COEFFS + 1, rec.len()),
            ));
        }
        let vals: Vec<f64> = rec
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|e| malformed(path, format!("{v}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let mut coeffs = [0.0; NUM_COEFFS];
        coeffs.copy_from_slice(&vals[1..]);
        frames.push(FeatureFrame {
            t_start: vals[0],
            coeffs,
        });
    }
    Ok(FeatureSequence {
        frames,
        sets_per_second,
        set_length_samples,
    })
}

#[derive(Serialize, Deserialize)]
struct BoundaryRow {
    t: f64,
    score: f64,
}

pub fn write_boundaries(path: impl AsRef<Path>, bs: &[Boundary]) -> Result<(), ExportError> {
    write_rows(
        path.as_ref(),
        bs.iter().map(|b| BoundaryRow {
            t: b.t,
            score: b.score,
        }),
    )
}

pub fn read_boundaries(path: impl AsRef<Path>) -> Result<Vec<Boundary>, ExportError> {
    Ok(read_rows::<BoundaryRow>(path.as_ref())?
        .into_iter()
        .map(|r| Boundary {
            t: r.t,
            score: r.score,
        })
        .collect())
}

#[derive(Serialize, Deserialize)]
struct SegmentRow {
    kind: String,
    t_start: f64,
    t_end: f64,
    score: Option<f64>,
    cluster: Option<usize>,
}

pub fn write_segments(path: impl AsRef<Path>, segs: &[Segment]) -> Result<(), ExportError> {
    write_rows(
        path.as_ref(),
        segs.iter().map(|s| SegmentRow {
            kind: s.kind.as_str().to_string(),
            t_start: s.t_start,
            t_end: s.t_end,
            score: s.score,
            cluster: s.cluster,
        }),
    )
}

pub fn read_segments(path: impl AsRef<Path>) -> Result<Vec<Segment>, ExportError> {
    let path = path.as_ref();
    read_rows::<SegmentRow>(path)?
        .into_iter()
        .map(|r| {
            let kind: SegmentKind = r.kind.parse().map_err(|e: String| malformed(path, e))?;
            Ok(Segment {
                score: r.score,
                cluster: r.cluster,
                ..Segment::new(kind, r.t_start, r.t_end)
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct HitRow {
    kind: String,
    phrase: String,
    t_start: f64,
    t_end: f64,
    score: f64,
}

pub fn write_hits(path: impl AsRef<Path>, hits: &[PhraseHit]) -> Result<(), ExportError> {
    write_rows(
        path.as_ref(),
        hits.iter().map(|h| HitRow {
            kind: h.kind.as_str().to_string(),
            phrase: h.phrase.clone(),
            t_start: h.t_start,
            t_end: h.t_end,
            score: h.score,
        }),
    )
}

/// Token positions are not stored and come back as zero.
pub fn read_hits(path: impl AsRef<Path>) -> Result<Vec<PhraseHit>, ExportError> {
    let path = path.as_ref();
    read_rows::<HitRow>(path)?
        .into_iter()
        .map(|r| {
            let kind: PhraseKind = r.kind.parse().map_err(|e: String| malformed(path, e))?;
            Ok(PhraseHit {
                phrase: r.phrase,
                kind,
                t_start: r.t_start,
                t_end: r.t_end,
                score: r.score,
                token_start: 0,
                token_end: 0,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ClusterRow {
    cluster_id: usize,
    segment: usize,
    t_start: f64,
    t_end: f64,
}

/// One row per member segment.
pub fn write_clusters(
    path: impl AsRef<Path>,
    clusters: &[Cluster],
    segs: &[Segment],
) -> Result<(), ExportError> {
    let rows = clusters.iter().flat_map(|c| {
        c.members.iter().filter_map(move |&m| {
            segs.get(m).map(|s| ClusterRow {
                cluster_id: c.id,
                segment: m,
                t_start: s.t_start,
                t_end: s.t_end,
            })
        })
    });
    write_rows(path.as_ref(), rows)
}

#[derive(Serialize)]
struct ScatterRow<'a> {
    pair: String,
    clip_id: &'a str,
    label: &'a str,
    x: f64,
    y: f64,
}

pub fn write_scatter(path: impl AsRef<Path>, series: &[ScatterSeries]) -> Result<(), ExportError> {
    let rows = series.iter().flat_map(|s| {
        s.points.iter().map(move |p| ScatterRow {
            pair: format!("c{}-c{}", s.pair.0, s.pair.1),
            clip_id: &p.clip_id,
            label: p.label.as_str(),
            x: p.x,
            y: p.y,
        })
    });
    write_rows(path.as_ref(), rows)
}

#[derive(Serialize, Deserialize)]
struct KeyframeRow {
    segment: usize,
    frame_index: usize,
    t: f64,
    image: String,
}

pub fn write_keyframes(path: impl AsRef<Path>, kfs: &[KeyframeImage]) -> Result<(), ExportError> {
    write_rows(
        path.as_ref(),
        kfs.iter().map(|k| KeyframeRow {
            segment: k.segment,
            frame_index: k.keyframe.frame_index,
            t: k.keyframe.t,
            image: k.image.clone(),
        }),
    )
}

pub fn read_keyframes(path: impl AsRef<Path>) -> Result<Vec<KeyframeImage>, ExportError> {
    Ok(read_rows::<KeyframeRow>(path.as_ref())?
        .into_iter()
        .map(|r| KeyframeImage {
            segment: r.segment,
            keyframe: KeyframeRef {
                frame_index: r.frame_index,
                t: r.t,
            },
            image: r.image,
        })
        .collect())
}

pub fn write_activity(path: impl AsRef<Path>, graph: &ActivityGraph) -> Result<(), ExportError> {
    let mut s = serde_json::to_string(graph)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_activity(path: impl AsRef<Path>) -> Result<ActivityGraph, ExportError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Save each keyframe as `keyframes/NNNN.png` plus a `.ppm`/`.pgm` twin under
/// `out_dir`. Returned image paths are relative to `out_dir` and point at the PNGs.
pub fn write_keyframe_images(
    out_dir: impl AsRef<Path>,
    frames: &FrameSequence,
    keyframes: &[(usize, KeyframeRef)],
) -> Result<Vec<KeyframeImage>, ExportError> {
    let out_dir = out_dir.as_ref();
    let sub = out_dir.join("keyframes");
    std::fs::create_dir_all(&sub)?;
    let mut written = Vec::with_capacity(keyframes.len());
    for &(segment, kf) in keyframes {
        let frame = frames.frames.get(kf.frame_index).ok_or_else(|| {
            malformed(
                out_dir,
                format!("keyframe {} is past the last frame", kf.frame_index),
            )
        })?;
        let img = frame.to_image();
        let stem = format!("{segment:04}");
        img.save_with_format(sub.join(format!("{stem}.png")), image::ImageFormat::Png)?;
        let pnm_ext = if img.color().has_color() {
            "ppm"
        } else {
            "pgm"
        };
        img.save_with_format(
            sub.join(format!("{stem}.{pnm_ext}")),
            image::ImageFormat::Pnm,
        )?;
        written.push(KeyframeImage {
            segment,
            keyframe: kf,
            image: format!("keyframes/{stem}.png"),
        });
    }
    Ok(written)
}
