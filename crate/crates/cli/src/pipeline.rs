//! Pipeline stages. Stages talk to each other only through files in the
//! output directory.

use crate::config::{echo, RunConfig};
use crate::CliError;
use anyhow::{anyhow, Context};
use pvseg_core::audio_features::{amplitude_envelope, extract_features};
use pvseg_core::audio_segmentation::MIN_SIDE_FRAMES;
use pvseg_core::audio_segmentation::{detect_speaker_changes, BicError};
use pvseg_core::export::{self, ExportError};
use pvseg_core::media_io::{
    compute_histograms, read_frames, read_histogram_cache, read_wav, write_histogram_cache,
    FrameSequence, HistogramSeries,
};
use pvseg_core::segment::{segments_from_boundaries, Segment, SegmentKind};
use pvseg_core::speaker_analysis::{
    assign_clusters, cluster_segments_with_hints, mfcc_scatter, motion_consistency_hints, Cluster,
    LabeledClip, DEFAULT_SCATTER_PAIRS,
};
use pvseg_core::text_index::{
    filter_phrases, load_phrase_list, load_slide_phrases, load_transcript, PhraseKind, PhraseList,
};
use pvseg_core::timeline::{build_timeline, export_doc, import_doc, render_static, TimelineInputs};
use pvseg_core::video_segmentation::{detect_shots, select_keyframe, video_activity};
use std::path::{Path, PathBuf};

pub const FEATURES: &str = "features.csv";
pub const AUDIO_BOUNDARIES: &str = "audio_boundaries.csv";
pub const AUDIO_SEGMENTS: &str = "audio_segments.csv";
pub const AUDIO_ACTIVITY: &str = "audio_activity.json";
pub const HISTOGRAMS: &str = "histograms.pvhist";
pub const VIDEO_BOUNDARIES: &str = "video_boundaries.csv";
pub const VIDEO_SEGMENTS: &str = "video_segments.csv";
pub const VIDEO_ACTIVITY: &str = "video_activity.json";
pub const KEYFRAMES: &str = "keyframes.csv";
pub const KEYFRAME_DIR: &str = "keyframes";
pub const HITS: &str = "hits.csv";
pub const CLUSTERS: &str = "clusters.csv";
pub const SCATTER: &str = "scatter.csv";
pub const TIMELINE_JSON: &str = "timeline.json";
pub const TIMELINE_SVG: &str = "timeline.svg";
pub const CONFIG_ECHO: &str = "config.resolved";

const AUDIO_OUTPUTS: [&str; 4] = [FEATURES, AUDIO_BOUNDARIES, AUDIO_SEGMENTS, AUDIO_ACTIVITY];
const VIDEO_OUTPUTS: [&str; 5] = [
    HISTOGRAMS,
    VIDEO_BOUNDARIES,
    VIDEO_SEGMENTS,
    VIDEO_ACTIVITY,
    KEYFRAMES,
];

fn fail(stage: &'static str) -> impl Fn(anyhow::Error) -> CliError {
    move |source| CliError::Stage { stage, source }
}

fn prepare_out(cfg: &RunConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("cannot create output directory {}", cfg.out.display()))?;
    std::fs::write(cfg.out_file(CONFIG_ECHO), echo(&cfg.resolved))?;
    Ok(())
}

fn setup(cfg: &RunConfig, stage: &'static str) -> Result<(), CliError> {
    prepare_out(cfg).map_err(fail(stage))
}

fn remove_outputs(cfg: &RunConfig, names: &[&str]) -> anyhow::Result<()> {
    for name in names {
        let p = cfg.out_file(name);
        if p.exists() {
            std::fs::remove_file(&p).with_context(|| format!("removing stale {}", p.display()))?;
        }
    }
    if names.contains(&KEYFRAMES) {
        let dir = cfg.out_file(KEYFRAME_DIR);
        if dir.exists() {
            std::fs::remove_dir_all(dir)?;
        }
    }
    Ok(())
}

fn last_end(segs: &[Segment]) -> Option<f64> {
    segs.last().map(|s| s.t_end)
}

fn read_segments_if(path: &Path) -> Result<Option<Vec<Segment>>, ExportError> {
    if path.exists() {
        export::read_segments(path).map(Some)
    } else {
        Ok(None)
    }
}

pub struct AudioSummary {
    pub duration_s: f64,
    pub boundaries: usize,
}

pub fn segment_audio(cfg: &RunConfig) -> Result<AudioSummary, CliError> {
    let path = cfg
        .audio
        .as_ref()
        .ok_or_else(|| CliError::Usage("segment-audio needs --audio".into()))?;
    setup(cfg, "segment-audio")?;
    run_audio(cfg, path).map_err(fail("segment-audio"))
}

fn run_audio(cfg: &RunConfig, path: &Path) -> anyhow::Result<AudioSummary> {
    let clip = read_wav(path).with_context(|| format!("reading {}", path.display()))?;
    let feats = extract_features(&clip, &cfg.features)?;
    export::write_features(cfg.out_file(FEATURES), &feats)?;
    let boundaries = match detect_speaker_changes(&feats, &cfg.bic) {
        Ok(b) => b,
        Err(BicError::ClipTooShort { frames, required }) => {
            eprintln!("warning: audio has {frames} feature frames, {required} needed for change detection; keeping one segment");
            Vec::new()
        }
        Err(e) => return Err(e.into()),
    };
    let duration_s = clip.duration_s();
    let segments = segments_from_boundaries(SegmentKind::Audio, &boundaries, duration_s)?;
    export::write_boundaries(cfg.out_file(AUDIO_BOUNDARIES), &boundaries)?;
    export::write_segments(cfg.out_file(AUDIO_SEGMENTS), &segments)?;
    export::write_activity(
        cfg.out_file(AUDIO_ACTIVITY),
        &amplitude_envelope(&clip, cfg.audio_bin_s),
    )?;
    Ok(AudioSummary {
        duration_s,
        boundaries: boundaries.len(),
    })
}

pub struct VideoSummary {
    pub frames: usize,
    pub boundaries: usize,
}

pub fn segment_video(cfg: &RunConfig) -> Result<VideoSummary, CliError> {
    if !cfg.has_video() {
        return Err(CliError::Usage(
            "segment-video needs --frames or --histograms".into(),
        ));
    }
    setup(cfg, "segment-video")?;
    run_video(cfg).map_err(fail("segment-video"))
}

fn run_video(cfg: &RunConfig) -> anyhow::Result<VideoSummary> {
    let (frames, hs): (Option<FrameSequence>, HistogramSeries) =
        match (&cfg.frames, &cfg.histograms) {
            (Some(p), _) => {
                let seq =
                    read_frames(p, cfg.fps).with_context(|| format!("reading {}", p.display()))?;
                let hs = compute_histograms(&seq, cfg.histogram_mode)?;
                (Some(seq), hs)
            }
            (None, Some(p)) => (
                None,
                read_histogram_cache(p).with_context(|| format!("reading {}", p.display()))?,
            ),
            (None, None) => unreachable!("checked by caller"),
        };
    write_histogram_cache(cfg.out_file(HISTOGRAMS), &hs)?;
    export::write_activity(cfg.out_file(VIDEO_ACTIVITY), &video_activity(&hs)?)?;
    let boundaries = detect_shots(&hs, &cfg.shot)?;
    let segments = segments_from_boundaries(SegmentKind::Video, &boundaries, hs.duration_s())?;
    export::write_boundaries(cfg.out_file(VIDEO_BOUNDARIES), &boundaries)?;
    export::write_segments(cfg.out_file(VIDEO_SEGMENTS), &segments)?;

    remove_outputs(cfg, &[KEYFRAMES])?;
    if let (Some(seq), true) = (&frames, cfg.keyframe_images) {
        let refs = segments
            .iter()
            .enumerate()
            .map(|(i, s)| select_keyframe(&hs, s).map(|k| (i, k)))
            .collect::<Result<Vec<_>, _>>()?;
        let kfs = export::write_keyframe_images(&cfg.out, seq, &refs)?;
        export::write_keyframes(cfg.out_file(KEYFRAMES), &kfs)?;
    }
    Ok(VideoSummary {
        frames: hs.len(),
        boundaries: boundaries.len(),
    })
}

/// Best known media duration, for spreading untimed transcripts.
fn known_duration(cfg: &RunConfig) -> anyhow::Result<Option<f64>> {
    for name in [AUDIO_SEGMENTS, VIDEO_SEGMENTS] {
        if let Some(segs) = read_segments_if(&cfg.out_file(name))? {
            if let Some(t) = last_end(&segs) {
                return Ok(Some(t));
            }
        }
    }
    match &cfg.audio {
        Some(p) => Ok(Some(read_wav(p)?.duration_s())),
        None => Ok(None),
    }
}

pub fn index_text(cfg: &RunConfig) -> Result<usize, CliError> {
    let path = cfg
        .transcript
        .as_ref()
        .ok_or_else(|| CliError::Usage("index-text needs --transcript".into()))?;
    if !(cfg.text_threshold > 0.0 && cfg.text_threshold <= 1.0) {
        return Err(CliError::Usage(format!(
            "text.threshold must be in (0, 1], got {}",
            cfg.text_threshold
        )));
    }
    setup(cfg, "index-text")?;
    run_text(cfg, path).map_err(fail("index-text"))
}

fn run_text(cfg: &RunConfig, path: &Path) -> anyhow::Result<usize> {
    let tokens = load_transcript(path, known_duration(cfg)?)
        .with_context(|| format!("reading {}", path.display()))?;
    let themes = match &cfg.themes {
        Some(p) => load_phrase_list(p, PhraseKind::Theme)?,
        None => PhraseList::default_themes(),
    };
    let mut hits = filter_phrases(&tokens, &themes, cfg.text_threshold);
    if let Some(p) = &cfg.slides {
        hits.extend(filter_phrases(
            &tokens,
            &load_slide_phrases(p)?,
            cfg.text_threshold,
        ));
    }
    export::write_hits(cfg.out_file(HITS), &hits)?;
    Ok(hits.len())
}

pub fn cluster(cfg: &RunConfig) -> Result<Vec<Cluster>, CliError> {
    let missing: Vec<&str> = [AUDIO_SEGMENTS, FEATURES]
        .into_iter()
        .filter(|n| !cfg.out_file(n).exists())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Dependency(format!(
            "cluster needs {} in {}; run segment-audio first",
            missing.join(" and "),
            cfg.out.display()
        )));
    }
    setup(cfg, "cluster")?;
    run_cluster(cfg).map_err(fail("cluster"))
}

fn run_cluster(cfg: &RunConfig) -> anyhow::Result<Vec<Cluster>> {
    let mut segments = export::read_segments(cfg.out_file(AUDIO_SEGMENTS))?;
    let feats = export::read_features(cfg.out_file(FEATURES))?;
    // Segments too short for two covariance estimates stay unclustered.
    let eligible: Vec<usize> = (0..segments.len())
        .filter(|&i| {
            feats
                .slice_time(segments[i].t_start, segments[i].t_end)
                .len()
                >= 2 * MIN_SIDE_FRAMES
        })
        .collect();
    let picked: Vec<Segment> = eligible.iter().map(|&i| segments[i].clone()).collect();
    let activity_path = cfg.out_file(VIDEO_ACTIVITY);
    let hints = if activity_path.exists() {
        motion_consistency_hints(
            &picked,
            &export::read_activity(&activity_path)?,
            cfg.hint_cv,
        )
    } else {
        Vec::new()
    };
    let mut clusters =
        cluster_segments_with_hints(&picked, &feats, cfg.cluster_lambda, &hints, cfg.hint_bias)?;
    for c in &mut clusters {
        for m in &mut c.members {
            *m = eligible[*m];
        }
    }
    for s in &mut segments {
        s.cluster = None;
    }
    assign_clusters(&mut segments, &clusters);
    export::write_clusters(cfg.out_file(CLUSTERS), &clusters, &segments)?;
    export::write_segments(cfg.out_file(AUDIO_SEGMENTS), &segments)?;
    if let Some(list) = &cfg.scatter_clips {
        write_scatter(cfg, list)?;
    }
    Ok(clusters)
}

/// `clip_id,label,path` rows; relative paths resolve against the list file.
fn write_scatter(cfg: &RunConfig, list: &Path) -> anyhow::Result<()> {
    let base = list.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(list)?;
    let mut clips = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let field = |i: usize| {
            rec.get(i)
                .map(str::trim)
                .ok_or_else(|| anyhow!("{}: short row", list.display()))
        };
        let path = base.join(field(2)?);
        clips.push(LabeledClip {
            clip_id: field(0)?.to_string(),
            label: field(1)?.parse().map_err(|e: String| anyhow!(e))?,
            clip: read_wav(&path).with_context(|| format!("reading {}", path.display()))?,
        });
    }
    let series = mfcc_scatter(&clips, &DEFAULT_SCATTER_PAIRS, &cfg.features)?;
    export::write_scatter(cfg.out_file(SCATTER), &series)?;
    Ok(())
}

pub fn render(
    cfg: &RunConfig,
    doc: Option<&Path>,
    svg: Option<&Path>,
) -> Result<PathBuf, CliError> {
    if let Some(doc_path) = doc {
        let target = svg
            .map(Path::to_path_buf)
            .unwrap_or_else(|| doc_path.with_extension("svg"));
        let doc = import_doc(doc_path)
            .with_context(|| format!("reading {}", doc_path.display()))
            .map_err(fail("render"))?;
        render_static(&doc, &target).map_err(|e| fail("render")(e.into()))?;
        return Ok(target);
    }
    let any = [AUDIO_SEGMENTS, VIDEO_SEGMENTS, HITS]
        .iter()
        .any(|n| cfg.out_file(n).exists());
    if !any {
        return Err(CliError::Dependency(format!(
            "nothing to render in {}; run a segmentation or index stage first",
            cfg.out.display()
        )));
    }
    setup(cfg, "render")?;
    let json = run_render(cfg).map_err(fail("render"))?;
    if let Some(target) = svg {
        let doc = import_doc(&json).map_err(|e| fail("render")(e.into()))?;
        render_static(&doc, target).map_err(|e| fail("render")(e.into()))?;
    }
    Ok(json)
}

fn read_opt<T>(
    path: PathBuf,
    f: impl Fn(&Path) -> Result<T, ExportError>,
) -> anyhow::Result<Option<T>> {
    if path.exists() {
        Ok(Some(
            f(&path).with_context(|| format!("reading {}", path.display()))?,
        ))
    } else {
        Ok(None)
    }
}

fn run_render(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let audio_segs =
        read_opt(cfg.out_file(AUDIO_SEGMENTS), |p| export::read_segments(p))?.unwrap_or_default();
    let video_segs =
        read_opt(cfg.out_file(VIDEO_SEGMENTS), |p| export::read_segments(p))?.unwrap_or_default();
    let audio_act = read_opt(cfg.out_file(AUDIO_ACTIVITY), |p| export::read_activity(p))?;
    let video_act = read_opt(cfg.out_file(VIDEO_ACTIVITY), |p| export::read_activity(p))?;
    let hits = read_opt(cfg.out_file(HITS), |p| export::read_hits(p))?.unwrap_or_default();
    let keyframes =
        read_opt(cfg.out_file(KEYFRAMES), |p| export::read_keyframes(p))?.unwrap_or_default();
    let (themes, topics): (Vec<_>, Vec<_>) =
        hits.into_iter().partition(|h| h.kind == PhraseKind::Theme);

    let fps = match cfg.fps {
        Some(f) => f,
        None if cfg.out_file(HISTOGRAMS).exists() => {
            read_histogram_cache(cfg.out_file(HISTOGRAMS))?.fps
        }
        None => cfg.fallback_fps,
    };
    let duration_s = [last_end(&audio_segs), last_end(&video_segs)]
        .into_iter()
        .flatten()
        .chain(themes.iter().chain(&topics).map(|h| h.t_end))
        .fold(0.0, f64::max);

    let inputs = TimelineInputs {
        video_id: cfg.video_id.clone(),
        duration_s,
        fps,
        video_segments: &video_segs,
        audio_segments: &audio_segs,
        video_activity: video_act.as_ref(),
        audio_activity: audio_act.as_ref(),
        theme_hits: &themes,
        topic_hits: &topics,
        keyframes: &keyframes,
    };
    let doc = build_timeline(&inputs, cfg.frames_per_pixel)?;
    let json = cfg.out_file(TIMELINE_JSON);
    export_doc(&doc, &json)?;
    render_static(&doc, cfg.out_file(TIMELINE_SVG))?;
    Ok(json)
}

pub struct AnalyzeSummary {
    pub audio: Option<AudioSummary>,
    pub video: Option<VideoSummary>,
    pub hits: Option<usize>,
    pub clusters: Option<usize>,
    pub timeline: PathBuf,
}

/// Every stage whose input is present, then the timeline. Outputs from
/// earlier runs of skipped stages are removed so they cannot leak in.
pub fn analyze(cfg: &RunConfig) -> Result<AnalyzeSummary, CliError> {
    if cfg.audio.is_none() && !cfg.has_video() {
        return Err(CliError::Usage(
            "analyze needs --audio, --frames or --histograms".into(),
        ));
    }
    setup(cfg, "analyze")?;
    let mut stale: Vec<&str> = vec![CLUSTERS, SCATTER];
    if cfg.audio.is_none() {
        stale.extend(AUDIO_OUTPUTS);
    }
    if !cfg.has_video() {
        stale.extend(VIDEO_OUTPUTS);
    }
    if cfg.transcript.is_none() {
        stale.push(HITS);
    }
    remove_outputs(cfg, &stale).map_err(fail("analyze"))?;

    let audio = cfg.audio.as_ref().map(|_| segment_audio(cfg)).transpose()?;
    let video = cfg.has_video().then(|| segment_video(cfg)).transpose()?;
    let hits = cfg
        .transcript
        .as_ref()
        .map(|_| index_text(cfg))
        .transpose()?;
    let clusters = match (&audio, cfg.cluster_enabled) {
        (Some(_), true) => Some(cluster(cfg)?.len()),
        _ => None,
    };
    let timeline = render(cfg, None, None)?;
    Ok(AnalyzeSummary {
        audio,
        video,
        hits,
        clusters,
        timeline,
    })
}
