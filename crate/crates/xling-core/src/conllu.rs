//! CoNLL-U ingestion: lemma sequences per sentence, translation comments,
//! and sentiment labels supplied through a sidecar file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sentiment::Polarity;

/// The lemma sequence of one sentence, with whatever sentence-level
/// annotations the treebank carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaSentence {
    pub lemmas: Vec<String>,
    pub sentence_id: String,
    /// From `# text[lang] = ...` comments.
    pub translation_comments: BTreeMap<String, String>,
    pub sentiment_label: Option<Polarity>,
}

/// Parse a CoNLL-U file into lemma sentences.
///
/// Token lines must have 10 tab-separated fields. Multiword-token ranges
/// (`1-2`) and empty nodes (`1.1`) are skipped. A `_` lemma falls back to
/// the lowercased FORM field. Sentences without a `# sent_id` comment get
/// their 1-based ordinal as id.
pub fn parse_conllu(path: impl AsRef<Path>) -> Result<Vec<LemmaSentence>> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let content = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
    parse_conllu_str(&content, &pstr)
}

pub fn parse_conllu_str(content: &str, origin: &str) -> Result<Vec<LemmaSentence>> {
    let mut sentences = Vec::new();
    let mut lemmas: Vec<String> = Vec::new();
    let mut sent_id: Option<String> = None;
    let mut comments: BTreeMap<String, String> = BTreeMap::new();

    let flush = |lemmas: &mut Vec<String>,
                 sent_id: &mut Option<String>,
                 comments: &mut BTreeMap<String, String>,
                 out: &mut Vec<LemmaSentence>| {
        if !lemmas.is_empty() {
            let id = sent_id
                .take()
                .unwrap_or_else(|| (out.len() + 1).to_string());
            out.push(LemmaSentence {
                lemmas: std::mem::take(lemmas),
                sentence_id: id,
                translation_comments: std::mem::take(comments),
                sentiment_label: None,
            });
        } else {
            sent_id.take();
            comments.clear();
        }
    };

    for (i, raw) in content.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            flush(&mut lemmas, &mut sent_id, &mut comments, &mut sentences);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                let key = key.trim();
                let value = value.trim();
                if key == "sent_id" {
                    sent_id = Some(value.to_string());
                } else if let Some(lang) =
                    key.strip_prefix("text[").and_then(|k| k.strip_suffix(']'))
                {
                    comments.insert(lang.trim().to_string(), value.to_string());
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(Error::format(
                origin,
                lineno,
                format!("token line has {} fields, expected 10", fields.len()),
            ));
        }
        let id = fields[0];
        if id.contains('-') || id.contains('.') {
            continue; // multiword-token range or empty node
        }
        if id.parse::<usize>().is_err() {
            return Err(Error::format(
                origin,
                lineno,
                format!("invalid token id {id:?}"),
            ));
        }
        let lemma = if fields[2] == "_" {
            fields[1].to_lowercase()
        } else {
            fields[2].to_string()
        };
        lemmas.push(lemma);
    }
    flush(&mut lemmas, &mut sent_id, &mut comments, &mut sentences);
    Ok(sentences)
}

/// Outcome of applying a sentiment sidecar file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SidecarOutcome {
    pub applied: usize,
    pub unknown_ids: usize,
    /// Annotations whose label is outside {negative, positive} (dropped:
    /// this is a binary task).
    pub dropped_labels: usize,
}

/// Apply a sentiment sidecar (`<sentence_id>\t<positive|negative>` lines) to
/// parsed sentences, matching on sentence id.
pub fn apply_sentiment_sidecar(
    sentences: &mut [LemmaSentence],
    path: impl AsRef<Path>,
) -> Result<SidecarOutcome> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let content = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
    let mut outcome = SidecarOutcome::default();
    let mut by_id: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, s) in sentences.iter().enumerate() {
        by_id.insert(&s.sentence_id, i);
    }
    let mut updates: Vec<(usize, Polarity)> = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let (id, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(&pstr, i + 1, "expected `<sentence_id>\\t<label>`"))?;
        let polarity = match label {
            "positive" => Polarity::Positive,
            "negative" => Polarity::Negative,
            _ => {
                outcome.dropped_labels += 1;
                continue;
            }
        };
        match by_id.get(id) {
            Some(&idx) => updates.push((idx, polarity)),
            None => outcome.unknown_ids += 1,
        }
    }
    for (idx, polarity) in updates {
        sentences[idx].sentiment_label = Some(polarity);
        outcome.applied += 1;
    }
    if outcome.unknown_ids > 0 {
        log::warn!(
            "{pstr}: {} sidecar ids did not match any sentence",
            outcome.unknown_ids
        );
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# sent_id = myv1
# text = Кота удыны
# text[eng] = The cat sleeps
1\tКота\tkota\tNOUN\t_\t_\t2\tnsubj\t_\t_
2\tудыны\tudyny\tVERB\t_\t_\t0\troot\t_\t_

# sent_id = myv2
1-2\tдвоих\t_\t_\t_\t_\t_\t_\t_\t_
1\tдво\tдва\tNUM\t_\t_\t0\troot\t_\t_
2\tих\tони\tPRON\t_\t_\t1\tdet\t_\t_
3.1\tnull\tnull\t_\t_\t_\t_\t_\t_\t_
4\tформа\t_\tNOUN\t_\t_\t1\tobj\t_\t_
";

    #[test]
    fn parses_lemmas_and_comments() {
        let s = parse_conllu_str(SAMPLE, "inline").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].lemmas, vec!["kota", "udyny"]);
        assert_eq!(s[0].sentence_id, "myv1");
        assert_eq!(
            s[0].translation_comments.get("eng").map(String::as_str),
            Some("The cat sleeps")
        );
        assert!(s[0].sentiment_label.is_none());
    }

    #[test]
    fn skips_ranges_and_empty_nodes_and_falls_back_on_form() {
        let s = parse_conllu_str(SAMPLE, "inline").unwrap();
        // range line and empty node skipped; `_` lemma becomes lowercased form
        assert_eq!(s[1].lemmas, vec!["два", "они", "форма"]);
    }

    #[test]
    fn field_count_error_names_line() {
        let bad = "1\tx\tx\tNOUN\n";
        match parse_conllu_str(bad, "inline") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn ordinal_id_fallback() {
        let text = "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n1\tb\tb\tX\t_\t_\t0\troot\t_\t_\n";
        let s = parse_conllu_str(text, "inline").unwrap();
        assert_eq!(s[0].sentence_id, "1");
        assert_eq!(s[1].sentence_id, "2");
    }

    #[test]
    fn comment_only_blocks_are_dropped() {
        let text = "# sent_id = empty\n\n1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n";
        let s = parse_conllu_str(text, "inline").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].lemmas, vec!["a"]);
    }

    #[test]
    fn sidecar_applies_labels() {
        let dir = std::env::temp_dir().join("xling-conllu-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("labels.tsv");
        std::fs::write(&p, "myv1\tpositive\nmyv2\tneutral\nmissing\tnegative\n").unwrap();
        let mut s = parse_conllu_str(SAMPLE, "inline").unwrap();
        let outcome = apply_sentiment_sidecar(&mut s, &p).unwrap();
        assert_eq!(outcome.applied, 1);
        assert_eq!(outcome.dropped_labels, 1);
        assert_eq!(outcome.unknown_ids, 1);
        assert_eq!(s[0].sentiment_label, Some(Polarity::Positive));
        assert_eq!(s[1].sentiment_label, None);
    }

    #[test]
    fn sidecar_format_error() {
        let dir = std::env::temp_dir().join("xling-conllu-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("bad.tsv");
        std::fs::write(&p, "no-tab-here\n").unwrap();
        let mut s = parse_conllu_str(SAMPLE, "inline").unwrap();
        assert!(apply_sentiment_sidecar(&mut s, &p).is_err());
    }
}
