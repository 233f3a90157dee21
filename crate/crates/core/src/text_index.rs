//! Index phrases from noisy transcripts.
//!
//! Theme phrases come from a short curated list expected in every
//! presentation; topic phrases are the text lines of the slides. Both are
//! matched against the transcript word by word with normalized Levenshtein
//! similarity, so recognizer errors of a character or two still produce hits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::Path;

/// Theme phrases shipped as the default list.
pub const DEFAULT_THEME_PHRASES: &str = include_str!("../data/theme_phrases.txt");

/// Per-word similarity every word of a hit must reach.
pub const MIN_WORD_SIMILARITY: f64 = 0.5;
pub const DEFAULT_THRESHOLD: f64 = 0.75;
/// Pace assumed for plain-text transcripts when no duration is known.
pub const FALLBACK_SECONDS_PER_WORD: f64 = 0.4;

#[derive(Debug, thiserror::Error)]
pub enum TextError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: starts at {t}s, before the previous token at {prev}s")]
    NonMonotonicTimestamps { line: usize, t: f64, prev: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedToken {
    pub word: String,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhraseKind {
    Theme,
    Topic,
}

impl PhraseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhraseKind::Theme => "theme",
            PhraseKind::Topic => "topic",
        }
    }
}

impl fmt::Display for PhraseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PhraseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theme" => Ok(PhraseKind::Theme),
            "topic" => Ok(PhraseKind::Topic),
            other => Err(format!("unknown phrase kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseList {
    pub kind: PhraseKind,
    pub phrases: Vec<String>,
}

impl PhraseList {
    /// One phrase per line; blank lines dropped, lowercased, first occurrence
    /// of duplicates kept.
    pub fn from_lines(kind: PhraseKind, text: &str) -> Self {
        let mut phrases: Vec<String> = Vec::new();
        for line in text.lines() {
            let p = line.trim().to_lowercase();
            if !p.is_empty() && !phrases.contains(&p) {
                phrases.push(p);
            }
        }
        Self { kind, phrases }
    }

    pub fn default_themes() -> Self {
        Self::from_lines(PhraseKind::Theme, DEFAULT_THEME_PHRASES)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhraseHit {
    pub phrase: String,
    pub kind: PhraseKind,
    pub t_start: f64,
    pub t_end: f64,
    pub score: f64,
    /// Matched tokens, `[token_start, token_end)`.
    #[serde(skip)]
    pub token_start: usize,
    #[serde(skip)]
    pub token_end: usize,
}

/// Lowercase and keep only alphanumeric characters.
pub fn normalize_word(raw: &str) -> String {
    raw.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn phrase_words(phrase: &str) -> Vec<String> {
    phrase
        .split_whitespace()
        .map(normalize_word)
        .filter(|w| !w.is_empty())
        .collect()
}

/// `1 − levenshtein(a, b) / max(|a|, |b|)` over characters.
pub fn word_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - strsim::levenshtein(a, b) as f64 / longest as f64
}

/// Load a transcript: CSV rows `word,t_start,t_end` (optional header), or
/// plain text whose words are spread evenly over `duration_s` (or
/// [`FALLBACK_SECONDS_PER_WORD`] each when no duration is known).
pub fn load_transcript(
    path: impl AsRef<Path>,
    duration_s: Option<f64>,
) -> Result<Vec<TimedToken>, TextError> {
    let text = fs::read_to_string(path)?;
    parse_transcript(&text, duration_s)
}

fn looks_like_csv(line: &str) -> bool {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    fields.len() == 3
        && (fields[1..] == ["t_start", "t_end"]
            || fields[1..].iter().all(|f| f.parse::<f64>().is_ok()))
}

pub fn parse_transcript(text: &str, duration_s: Option<f64>) -> Result<Vec<TimedToken>, TextError> {
    let Some(first) = text.lines().find(|l| !l.trim().is_empty()) else {
        return Ok(Vec::new());
    };
    if looks_like_csv(first) {
        parse_csv_transcript(text)
    } else {
        Ok(spread_plain_text(text, duration_s))
    }
}

fn parse_csv_transcript(text: &str) -> Result<Vec<TimedToken>, TextError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut tokens: Vec<TimedToken> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| TextError::MalformedLine {
            line,
            reason: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 3 {
            return Err(TextError::MalformedLine {
                line,
                reason: format!("expected 3 fields, found {}", record.len()),
            });
        }
        if line == 1 && &record[1] == "t_start" {
            continue;
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TextError::MalformedLine {
                    line,
                    reason: format!("'{s}' is not a time"),
                })
        };
        let (t_start, t_end) = (num(&record[1])?, num(&record[2])?);
        if t_end <= t_start {
            return Err(TextError::MalformedLine {
                line,
                reason: format!("token ends at {t_end}s before it starts at {t_start}s"),
            });
        }
        if let Some(prev) = tokens.last() {
            if t_start < prev.t_start {
                return Err(TextError::NonMonotonicTimestamps {
                    line,
                    t: t_start,
                    prev: prev.t_start,
                });
            }
        }
        let word = normalize_word(&record[0]);
        if !word.is_empty() {
            tokens.push(TimedToken {
                word,
                t_start,
                t_end,
            });
        }
    }
    Ok(tokens)
}

fn spread_plain_text(text: &str, duration_s: Option<f64>) -> Vec<TimedToken> {
    let words: Vec<String> = text
        .split_whitespace()
        .map(normalize_word)
        .filter(|w| !w.is_empty())
        .collect();
    if words.is_empty() {
        return Vec::new();
    }
    let step = match duration_s {
        Some(d) if d > 0.0 => d / words.len() as f64,
        _ => FALLBACK_SECONDS_PER_WORD,
    };
    words
        .into_iter()
        .enumerate()
        .map(|(i, word)| TimedToken {
            word,
            t_start: i as f64 * step,
            t_end: (i + 1) as f64 * step,
        })
        .collect()
}

pub fn load_phrase_list(path: impl AsRef<Path>, kind: PhraseKind) -> Result<PhraseList, TextError> {
    Ok(PhraseList::from_lines(kind, &fs::read_to_string(path)?))
}

/// Slide text, one line per phrase.
pub fn load_slide_phrases(path: impl AsRef<Path>) -> Result<PhraseList, TextError> {
    load_phrase_list(path, PhraseKind::Topic)
}

/// Per-word similarities of `phrase` against the tokens starting at `at`.
fn window_scores(tokens: &[TimedToken], at: usize, phrase: &[String]) -> Option<f64> {
    let mut total = 0.0;
    for (tok, word) in tokens[at..at + phrase.len()].iter().zip(phrase) {
        let s = word_similarity(&tok.word, word);
        if s < MIN_WORD_SIMILARITY {
            return None;
        }
        total += s;
    }
    Some(total / phrase.len() as f64)
}

fn match_phrase(
    tokens: &[TimedToken],
    phrase: &str,
    kind: PhraseKind,
    threshold: f64,
) -> Vec<PhraseHit> {
    let words = phrase_words(phrase);
    let k = words.len();
    if k == 0 || tokens.len() < k {
        return Vec::new();
    }
    let mut candidates: Vec<(usize, f64)> = (0..=tokens.len() - k)
        .filter_map(|at| window_scores(tokens, at, &words).map(|s| (at, s)))
        .filter(|&(_, s)| s >= threshold)
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut kept: Vec<(usize, f64)> = Vec::new();
    for (at, s) in candidates {
        if kept
            .iter()
            .all(|&(other, _)| at + k <= other || other + k <= at)
        {
            kept.push((at, s));
        }
    }
    kept.into_iter()
        .map(|(at, score)| PhraseHit {
            phrase: phrase.to_string(),
            kind,
            t_start: tokens[at].t_start,
            t_end: tokens[at + k - 1].t_end,
            score,
            token_start: at,
            token_end: at + k,
        })
        .collect()
}

/// Slide each phrase over the transcript. A window is a hit when every word
/// reaches [`MIN_WORD_SIMILARITY`] and the mean reaches `threshold`;
/// overlapping hits of one phrase keep the best (earliest on ties).
///
/// # Panics
/// If `threshold` is outside `(0, 1]`.
pub fn filter_phrases(tokens: &[TimedToken], list: &PhraseList, threshold: f64) -> Vec<PhraseHit> {
    assert!(
        threshold > 0.0 && threshold <= 1.0,
        "threshold must be in (0, 1], got {threshold}"
    );
    let mut hits: Vec<PhraseHit> = list
        .phrases
        .par_iter()
        .flat_map_iter(|p| match_phrase(tokens, p, list.kind, threshold))
        .collect();
    hits.sort_by(|a, b| {
        a.t_start
            .total_cmp(&b.t_start)
            .then(a.token_start.cmp(&b.token_start))
            .then_with(|| a.phrase.cmp(&b.phrase))
    });
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::timed_tokens;
    use proptest::prelude::*;

    fn toks(words: &str) -> Vec<TimedToken> {
        let ws: Vec<String> = words.split_whitespace().map(String::from).collect();
        timed_tokens(&ws, 0.0, 0.5)
    }

    /// Textbook dynamic-programming edit distance.
    fn lev(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut prev: Vec<usize> = (0..=b.len()).collect();
        for i in 1..=a.len() {
            let mut cur = vec![i; b.len() + 1];
            for j in 1..=b.len() {
                let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
                cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            }
            prev = cur;
        }
        prev[b.len()]
    }

    #[test]
    fn csv_transcript() {
        let t = parse_transcript("design,1.0,1.4\n", None).unwrap();
        assert_eq!(
            t,
            vec![TimedToken {
                word: "design".into(),
                t_start: 1.0,
                t_end: 1.4
            }]
        );
        let t =
            parse_transcript("word,t_start,t_end\nThe,0,0.2\n\"Demo!\",0.2,0.5\n", None).unwrap();
        assert_eq!(
            t.iter().map(|t| t.word.as_str()).collect::<Vec<_>>(),
            ["the", "demo"]
        );
    }

    #[test]
    fn out_of_order_rows() {
        let err = parse_transcript("a,2.0,2.5\nb,1.0,1.5\n", None).unwrap_err();
        assert!(matches!(
            err,
            TextError::NonMonotonicTimestamps { line: 2, .. }
        ));
        let err = parse_transcript("a,2.0,2.5\nb,3.0\n", None).unwrap_err();
        assert!(matches!(err, TextError::MalformedLine { line: 2, .. }));
        let err = parse_transcript("a,2.0,1.0\n", None).unwrap_err();
        assert!(matches!(err, TextError::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn empty_file() {
        assert!(parse_transcript("", None).unwrap().is_empty());
        assert!(parse_transcript("\n  \n", Some(10.0)).unwrap().is_empty());
    }

    #[test]
    fn plain_text_is_spread_uniformly() {
        let t = parse_transcript("Our design, constraints.", Some(3.0)).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(
            (t[1].word.as_str(), t[1].t_start, t[1].t_end),
            ("design", 1.0, 2.0)
        );
        let t = parse_transcript("one two", None).unwrap();
        assert_eq!(t[1].t_start, FALLBACK_SECONDS_PER_WORD);
    }

    #[test]
    fn exact_phrase_hit() {
        let list = PhraseList::default_themes();
        let hits = filter_phrases(&toks("we faced some design constraints early"), &list, 0.75);
        assert_eq!(hits.len(), 1);
        let h = &hits[0];
        assert_eq!(
            (h.phrase.as_str(), h.kind, h.score),
            ("design constraints", PhraseKind::Theme, 1.0)
        );
        assert_eq!((h.t_start, h.t_end), (1.5, 2.5));
    }

    #[test]
    fn misspelled_phrase_hit() {
        let list = PhraseList {
            kind: PhraseKind::Topic,
            phrases: vec!["design constraints".into()],
        };
        let hits = filter_phrases(&toks("desing constrants"), &list, 0.75);
        assert_eq!(hits.len(), 1);
        let oracle = ((1.0 - lev("desing", "design") as f64 / 6.0)
            + (1.0 - lev("constrants", "constraints") as f64 / 11.0))
            / 2.0;
        assert!((hits[0].score - oracle).abs() < 1e-12);
        // a transposition costs two edits: mean(1 - 2/6, 1 - 1/11)
        assert_eq!(lev("desing", "design"), 2);
        assert!((hits[0].score - (1.0 - 2.0 / 6.0 + 1.0 - 1.0 / 11.0) / 2.0).abs() < 1e-12);
        assert_eq!(hits[0].kind, PhraseKind::Topic);
    }

    #[test]
    fn absent_phrase() {
        assert!(filter_phrases(
            &toks("nothing relevant here"),
            &PhraseList::default_themes(),
            0.75
        )
        .is_empty());
    }

    #[test]
    fn one_weak_word_blocks_a_hit() {
        let list = PhraseList {
            kind: PhraseKind::Theme,
            phrases: vec!["alternative solutions now".into()],
        };
        // mean is high but "xyz" is far below the per-word floor
        assert!(filter_phrases(&toks("alternative solutions xyz"), &list, 0.6).is_empty());
    }

    #[test]
    fn overlapping_hits_keep_the_best() {
        let list = PhraseList {
            kind: PhraseKind::Theme,
            phrases: vec!["demo demo".into()],
        };
        let hits = filter_phrases(&toks("demo demo demo"), &list, 0.75);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].token_start, 0);
        let hits = filter_phrases(&toks("demx demo demo"), &list, 0.7);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].token_start, 1);
    }

    #[test]
    fn slide_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("slides.txt");
        fs::write(
            &p,
            "Project Goals\n\nBudget Overview\nproject goals\nTimeline\n",
        )
        .unwrap();
        let list = load_slide_phrases(&p).unwrap();
        assert_eq!(list.kind, PhraseKind::Topic);
        assert_eq!(
            list.phrases,
            ["project goals", "budget overview", "timeline"]
        );
        fs::write(&p, "\n   \n\n").unwrap();
        let empty = load_slide_phrases(&p).unwrap();
        assert!(empty.phrases.is_empty());
        assert!(filter_phrases(&toks("project goals"), &empty, 0.75).is_empty());
    }

    #[test]
    fn default_list_is_the_shipped_table() {
        let list = PhraseList::default_themes();
        assert_eq!(list.phrases.len(), 9);
        assert!(list
            .phrases
            .contains(&"functional requirements".to_string()));
    }

    #[test]
    fn strsim_agrees_with_dp_oracle() {
        for (a, b) in [
            ("kitten", "sitting"),
            ("", "abc"),
            ("design", "desing"),
            ("über", "uber"),
        ] {
            assert_eq!(strsim::levenshtein(a, b), lev(a, b));
        }
    }

    proptest! {
        #[test]
        fn hit_scores_are_self_consistent(words in proptest::collection::vec("[a-e]{1,5}", 1..30)) {
            let tokens = timed_tokens(&words, 0.0, 0.3);
            let list = PhraseList { kind: PhraseKind::Theme, phrases: vec!["abc de".into(), "eda".into()] };
            for h in filter_phrases(&tokens, &list, 0.6) {
                let pw = phrase_words(&h.phrase);
                let sims: Vec<f64> = tokens[h.token_start..h.token_end].iter().zip(&pw)
                    .map(|(t, p)| 1.0 - lev(&t.word, p) as f64 / t.word.chars().count().max(p.chars().count()) as f64)
                    .collect();
                let mean = sims.iter().sum::<f64>() / sims.len() as f64;
                prop_assert!((mean - h.score).abs() < 1e-12);
                prop_assert!(h.score >= 0.6 && sims.iter().all(|&s| s >= 0.5));
                prop_assert_eq!(h.t_start, tokens[h.token_start].t_start);
                prop_assert_eq!(h.t_end, tokens[h.token_end - 1].t_end);
            }
        }

        #[test]
        fn threshold_one_is_exact_matching(words in proptest::collection::vec("[ab]{1,2}", 0..25)) {
            let tokens = timed_tokens(&words, 0.0, 1.0);
            let phrase = vec!["a".to_string(), "ab".to_string()];
            let list = PhraseList { kind: PhraseKind::Topic, phrases: vec![phrase.join(" ")] };
            let hits: Vec<usize> = filter_phrases(&tokens, &list, 1.0).iter().map(|h| h.token_start).collect();
            // oracle: leftmost non-overlapping exact occurrences
            let mut oracle = Vec::new();
            let mut i = 0;
            while i + phrase.len() <= words.len() {
                if words[i..i + phrase.len()] == phrase[..] { oracle.push(i); i += phrase.len(); } else { i += 1; }
            }
            prop_assert_eq!(hits, oracle);
        }
    }
}
