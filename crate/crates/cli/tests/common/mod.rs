#![allow(dead_code)]

use pvseg_core::media_io::write_wav_16bit;
use pvseg_core::synth::{concat_clip, static_scene, ToneVoice};
use rand::rngs::StdRng;
use rand::SeedableRng;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const SAMPLE_RATE: u32 = 16_000;
pub const FPS: f64 = 25.0;
pub const SCENE_S: f64 = 10.0;
pub const SCENES: usize = 4;

pub const VOICE_A: ToneVoice = ToneVoice {
    pitch_hz: 110.0,
    formants_hz: [500.0, 1500.0],
    level: 0.5,
};
pub const VOICE_B: ToneVoice = ToneVoice {
    pitch_hz: 230.0,
    formants_hz: [850.0, 2600.0],
    level: 0.5,
};

pub fn pvseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvseg"))
        .args(args)
        .output()
        .expect("pvseg binary runs")
}

pub fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// 20 s of one voice followed by 20 s of another.
pub fn two_speaker_wav(dir: &Path) -> PathBuf {
    let mut rng = StdRng::seed_from_u64(11);
    let a = VOICE_A.render(&mut rng, SAMPLE_RATE, 20.0);
    let b = VOICE_B.render(&mut rng, SAMPLE_RATE, 20.0);
    let path = dir.join("talk.wav");
    write_wav_16bit(&path, &concat_clip(SAMPLE_RATE, vec![a, b])).unwrap();
    path
}

/// Four static scenes of 10 s each at 25 fps, as a directory of PGM files.
pub fn frames_dir(dir: &Path) -> PathBuf {
    let mut rng = StdRng::seed_from_u64(12);
    let per = (SCENE_S * FPS) as usize;
    let out = dir.join("frames");
    std::fs::create_dir_all(&out).unwrap();
    let mut k = 0;
    for level in [40u8, 200, 90, 160][..SCENES].iter() {
        for f in static_scene(&mut rng, per, (32, 24), *level, 6) {
            f.to_image().save(out.join(format!("{k:05}.pgm"))).unwrap();
            k += 1;
        }
    }
    out
}

/// Timed transcript with "design constraints" misspelled at 4 s and
/// "mel filter bank" at 25 s.
pub fn transcript(dir: &Path) -> PathBuf {
    let words: [(&str, f64); 10] = [
        ("today", 1.0),
        ("we", 2.0),
        ("cover", 3.0),
        ("desing", 4.0),
        ("constraints", 4.5),
        ("then", 10.0),
        ("the", 24.0),
        ("mel", 25.0),
        ("filter", 25.4),
        ("bank", 25.8),
    ];
    let mut text = String::from("word,t_start,t_end\n");
    for (w, t) in words {
        text.push_str(&format!("{w},{t},{}\n", t + 0.3));
    }
    let path = dir.join("transcript.csv");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn slides(dir: &Path) -> PathBuf {
    let path = dir.join("slides.txt");
    std::fs::write(&path, "Mel filter bank\nCepstral lifting\n").unwrap();
    path
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
