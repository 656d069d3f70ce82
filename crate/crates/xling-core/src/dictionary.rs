//! Translation dictionaries: parsing the canonical XML schema, per-target
//! statistics, and centroid projection of lexemes into aligned embedding
//! spaces.
//!
//! Schema (documented in the README): root `<dictionary src="xxx">` holding
//! `<e>` entries; each entry has one `<l pos="...">lemma</l>` and any number
//! of `<mg>` meaning groups, each holding `<t lang="yyy">translation</t>`
//! elements whose translations are interchangeable for that sense.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::embeddings::{NormalizationPolicy, WordEmbeddings};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    /// ISO 639-3 code of the target language.
    pub language: String,
    pub lemma: String,
}

/// One sense grouping; its translations are interchangeable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeaningGroup {
    pub translations: Vec<Translation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexeme {
    pub lemma: String,
    pub pos: Option<String>,
    pub meaning_groups: Vec<MeaningGroup>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationDictionary {
    pub source_language: String,
    pub lexemes: Vec<Lexeme>,
}

impl TranslationDictionary {
    /// Lexemes with no translations at all (retained by the parser, useless
    /// for projection).
    pub fn untranslated_count(&self) -> usize {
        self.lexemes
            .iter()
            .filter(|l| l.meaning_groups.is_empty())
            .count()
    }

    pub fn stats(&self) -> DictionaryStats {
        dictionary_stats(self)
    }
}

fn valid_iso639_3(code: &str) -> bool {
    code.len() == 3 && code.chars().all(|c| c.is_ascii_lowercase())
}

/// Parse a dictionary from the canonical XML schema.
pub fn parse_dictionary_xml(path: impl AsRef<Path>) -> Result<TranslationDictionary> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let content = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
    parse_dictionary_str(&content, &pstr)
}

/// Parse a dictionary from XML text; `origin` labels errors.
pub fn parse_dictionary_str(xml: &str, origin: &str) -> Result<TranslationDictionary> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| Error::Format {
        path: origin.to_string(),
        line: e.pos().row as usize,
        msg: format!("XML syntax error: {e}"),
    })?;
    let root = doc.root_element();
    let schema_err = |msg: String| Error::Schema {
        path: origin.to_string(),
        msg,
    };
    if root.tag_name().name() != "dictionary" {
        return Err(schema_err(format!(
            "unknown root element <{}>, expected <dictionary>",
            root.tag_name().name()
        )));
    }
    let source_language = root
        .attribute("src")
        .ok_or_else(|| schema_err("<dictionary> is missing the src attribute".into()))?
        .to_string();
    if !valid_iso639_3(&source_language) {
        return Err(schema_err(format!(
            "src {source_language:?} is not an ISO 639-3 code"
        )));
    }

    let mut lexemes = Vec::new();
    let mut dropped_groups = 0usize;
    for entry in root.children().filter(|n| n.is_element()) {
        if entry.tag_name().name() != "e" {
            return Err(schema_err(format!(
                "unexpected element <{}> under <dictionary>",
                entry.tag_name().name()
            )));
        }
        let mut lemma: Option<(String, Option<String>)> = None;
        let mut meaning_groups = Vec::new();
        for child in entry.children().filter(|n| n.is_element()) {
            match child.tag_name().name() {
                "l" => {
                    if lemma.is_some() {
                        return Err(schema_err("entry has more than one <l> element".into()));
                    }
                    let text = child.text().unwrap_or("").trim().to_string();
                    if text.is_empty() {
                        return Err(schema_err("entry lemma must not be empty".into()));
                    }
                    lemma = Some((text, child.attribute("pos").map(str::to_string)));
                }
                "mg" => {
                    let mut translations = Vec::new();
                    for t in child.children().filter(|n| n.is_element()) {
                        if t.tag_name().name() != "t" {
                            return Err(schema_err(format!(
                                "unexpected element <{}> under <mg>",
                                t.tag_name().name()
                            )));
                        }
                        let language = t
                            .attribute("lang")
                            .ok_or_else(|| schema_err("<t> is missing the lang attribute".into()))?
                            .to_string();
                        if !valid_iso639_3(&language) {
                            return Err(schema_err(format!(
                                "lang {language:?} is not an ISO 639-3 code"
                            )));
                        }
                        let text = t.text().unwrap_or("").trim().to_string();
                        if text.is_empty() {
                            return Err(schema_err("translation text must not be empty".into()));
                        }
                        translations.push(Translation {
                            language,
                            lemma: text,
                        });
                    }
                    if translations.is_empty() {
                        dropped_groups += 1;
                    } else {
                        meaning_groups.push(MeaningGroup { translations });
                    }
                }
                other => {
                    return Err(schema_err(format!(
                        "unexpected element <{other}> under <e>"
                    )));
                }
            }
        }
        let (lemma, pos) =
            lemma.ok_or_else(|| schema_err("entry is missing its <l> element".into()))?;
        lexemes.push(Lexeme {
            lemma,
            pos,
            meaning_groups,
        });
    }
    let dict = TranslationDictionary {
        source_language,
        lexemes,
    };
    if dropped_groups > 0 {
        log::warn!("{origin}: dropped {dropped_groups} empty meaning groups");
    }
    let untranslated = dict.untranslated_count();
    if untranslated > 0 {
        log::info!("{origin}: {untranslated} entries carry no translations");
    }
    Ok(dict)
}

/// Per-target-language counts for one dictionary.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TargetStats {
    pub target_language: String,
    /// Meaning groups containing at least one translation to this target.
    pub meaning_groups: usize,
    pub translations: usize,
    /// Percentage of this dictionary's total translations; 0.0 for an empty
    /// dictionary. Rendered to 2 decimals.
    pub share_percent: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DictionaryStats {
    pub source_language: String,
    /// One row per target language, ordered by language code.
    pub targets: Vec<TargetStats>,
    pub total_translations: usize,
    pub lexemes: usize,
}

impl fmt::Display for DictionaryStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "source: {} ({} lexemes)",
            self.source_language, self.lexemes
        )?;
        for t in &self.targets {
            writeln!(
                f,
                "  {}: {} meaning groups, {} translations ({:.2}%)",
                t.target_language, t.meaning_groups, t.translations, t.share_percent
            )?;
        }
        write!(f, "  total translations: {}", self.total_translations)
    }
}

pub fn dictionary_stats(dict: &TranslationDictionary) -> DictionaryStats {
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    let mut translations: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0usize;
    for lexeme in &dict.lexemes {
        for mg in &lexeme.meaning_groups {
            let mut langs_here: Vec<&str> = Vec::new();
            for t in &mg.translations {
                *translations.entry(&t.language).or_default() += 1;
                total += 1;
                if !langs_here.contains(&t.language.as_str()) {
                    langs_here.push(&t.language);
                }
            }
            for lang in langs_here {
                *groups.entry(lang).or_default() += 1;
            }
        }
    }
    let targets = translations
        .iter()
        .map(|(&lang, &count)| TargetStats {
            target_language: lang.to_string(),
            meaning_groups: groups.get(lang).copied().unwrap_or(0),
            translations: count,
            share_percent: if total == 0 {
                0.0
            } else {
                count as f64 / total as f64 * 100.0
            },
        })
        .collect();
    DictionaryStats {
        source_language: dict.source_language.clone(),
        targets,
        total_translations: total,
        lexemes: dict.lexemes.len(),
    }
}

/// The aligned resource-rich spaces translations are resolved against.
/// All spaces must share one dimensionality and one coordinate system.
/// Each space carries the normalization policy its vocabulary was built
/// with, so dictionary citation forms are normalized the same way before
/// lookup.
pub struct ProjectionTargets<'a, T> {
    spaces: BTreeMap<String, (&'a WordEmbeddings<T>, NormalizationPolicy)>,
    dim: Option<usize>,
}

impl<'a, T: Scalar> ProjectionTargets<'a, T> {
    pub fn new() -> Self {
        ProjectionTargets {
            spaces: BTreeMap::new(),
            dim: None,
        }
    }

    pub fn add(
        &mut self,
        embeddings: &'a WordEmbeddings<T>,
        policy: NormalizationPolicy,
    ) -> Result<&mut Self> {
        match self.dim {
            Some(d) if d != embeddings.dim() => {
                return Err(Error::Shape(format!(
                    "target space {} has dim {}, expected {d}",
                    embeddings.language(),
                    embeddings.dim()
                )));
            }
            _ => self.dim = Some(embeddings.dim()),
        }
        self.spaces
            .insert(embeddings.language().to_string(), (embeddings, policy));
        Ok(self)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    /// All vectors of `lemma` in the space of `language`, after applying the
    /// space's lookup normalization. Empty when unresolvable.
    pub fn resolve(&self, language: &str, lemma: &str) -> Vec<&'a [T]> {
        match self.spaces.get(language) {
            Some((space, policy)) => space.lookup(&policy.apply(lemma)),
            None => Vec::new(),
        }
    }
}

impl<'a, T: Scalar> Default for ProjectionTargets<'a, T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Centroid of all vectors of all translations of `lexeme` that resolve in
/// the provided spaces; `None` when nothing resolves.
pub fn project_lexeme<T: Scalar>(
    lexeme: &Lexeme,
    targets: &ProjectionTargets<'_, T>,
) -> Option<Vec<T>> {
    let dim = targets.dim()?;
    let mut acc = vec![T::zero(); dim];
    let mut count = 0usize;
    for mg in &lexeme.meaning_groups {
        for t in &mg.translations {
            for vector in targets.resolve(&t.language, &t.lemma) {
                for (a, &v) in acc.iter_mut().zip(vector) {
                    *a += v;
                }
                count += 1;
            }
        }
    }
    if count == 0 {
        return None;
    }
    let n = T::from_config(count as f64);
    for a in &mut acc {
        *a /= n;
    }
    Some(acc)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
pub struct LanguageCoverage {
    /// Translation entries that resolved to at least one vector.
    pub resolved_translations: usize,
    /// Total vectors those translations contributed.
    pub contributed_vectors: usize,
}

/// Bookkeeping from [`build_endangered_embeddings`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CoverageReport {
    pub language: String,
    pub lexemes: usize,
    pub projected: usize,
    pub skipped: usize,
    pub per_language: BTreeMap<String, LanguageCoverage>,
}

impl CoverageReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("language: {}\n", self.language));
        out.push_str(&format!("lexemes: {}\n", self.lexemes));
        out.push_str(&format!("projected: {}\n", self.projected));
        out.push_str(&format!("skipped: {}\n", self.skipped));
        for (lang, cov) in &self.per_language {
            out.push_str(&format!(
                "resolved[{lang}]: {} translations, {} vectors\n",
                cov.resolved_translations, cov.contributed_vectors
            ));
        }
        out
    }

    /// One JSON object per line: a summary record then one record per
    /// contributing language.
    pub fn to_jsonl(&self) -> String {
        let mut lines = Vec::new();
        lines.push(
            serde_json::json!({
                "type": "coverage_summary",
                "language": self.language,
                "lexemes": self.lexemes,
                "projected": self.projected,
                "skipped": self.skipped,
            })
            .to_string(),
        );
        for (lang, cov) in &self.per_language {
            lines.push(
                serde_json::json!({
                    "type": "coverage_language",
                    "language": lang,
                    "resolved_translations": cov.resolved_translations,
                    "contributed_vectors": cov.contributed_vectors,
                })
                .to_string(),
            );
        }
        lines.join("\n") + "\n"
    }
}

/// Construct embeddings for an endangered language: one centroid vector per
/// projectable lexeme, in dictionary order. Homonym entries (same lemma
/// listed as separate lexemes) merge into multi-vector entries.
pub fn build_endangered_embeddings<T: Scalar>(
    dict: &TranslationDictionary,
    targets: &ProjectionTargets<'_, T>,
    language: impl Into<String>,
) -> Result<(WordEmbeddings<T>, CoverageReport)> {
    let language = language.into();
    let dim = targets
        .dim()
        .ok_or_else(|| Error::Construction("no target spaces provided for projection".into()))?;
    let mut rows: Vec<(String, Vec<T>)> = Vec::new();
    let mut per_language: BTreeMap<String, LanguageCoverage> = BTreeMap::new();
    let mut skipped = 0usize;
    for lexeme in &dict.lexemes {
        match project_lexeme(lexeme, targets) {
            Some(centroid) => {
                rows.push((lexeme.lemma.clone(), centroid));
                for mg in &lexeme.meaning_groups {
                    for t in &mg.translations {
                        let vectors = targets.resolve(&t.language, &t.lemma);
                        if !vectors.is_empty() {
                            let cov = per_language.entry(t.language.clone()).or_default();
                            cov.resolved_translations += 1;
                            cov.contributed_vectors += vectors.len();
                        }
                    }
                }
            }
            None => skipped += 1,
        }
    }
    if rows.is_empty() {
        return Err(Error::Construction(format!(
            "no lexeme of {language} projects into the provided spaces"
        )));
    }
    let report = CoverageReport {
        language: language.clone(),
        lexemes: dict.lexemes.len(),
        projected: rows.len(),
        skipped,
        per_language,
    };
    let embeddings = WordEmbeddings::from_rows(language, dim, rows)?;
    Ok((embeddings, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"<dictionary src="myv">
  <e><l pos="N">кудо</l><mg><t lang="fin">talo</t></mg></e>
</dictionary>"#;

    fn space(lang: &str, rows: &[(&str, &[f64])]) -> WordEmbeddings<f64> {
        WordEmbeddings::from_rows(
            lang,
            rows[0].1.len(),
            rows.iter()
                .map(|(l, v)| (l.to_string(), v.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn parses_minimal_document() {
        let d = parse_dictionary_str(MINIMAL, "inline").unwrap();
        assert_eq!(d.source_language, "myv");
        assert_eq!(d.lexemes.len(), 1);
        assert_eq!(d.lexemes[0].lemma, "кудо");
        assert_eq!(d.lexemes[0].pos.as_deref(), Some("N"));
        assert_eq!(d.lexemes[0].meaning_groups.len(), 1);
        assert_eq!(d.lexemes[0].meaning_groups[0].translations.len(), 1);
    }

    #[test]
    fn counts_two_groups_two_translations() {
        let xml = r#"<dictionary src="myv">
  <e><l>пине</l>
    <mg><t lang="fin">koira</t></mg>
    <mg><t lang="rus">собака</t></mg>
  </e>
</dictionary>"#;
        let d = parse_dictionary_str(xml, "inline").unwrap();
        let stats = d.stats();
        assert_eq!(stats.total_translations, 2);
        let fin = stats
            .targets
            .iter()
            .find(|t| t.target_language == "fin")
            .unwrap();
        assert_eq!(fin.meaning_groups, 1);
        assert_eq!(fin.translations, 1);
        assert!((fin.share_percent - 50.0).abs() < 1e-12);
    }

    #[test]
    fn group_counts_by_target_presence() {
        // one group holding two fin translations and one rus:
        // fin groups=1 translations=2; rus groups=1 translations=1
        let xml = r#"<dictionary src="sms">
  <e><l>x</l><mg><t lang="fin">a</t><t lang="fin">b</t><t lang="rus">c</t></mg></e>
</dictionary>"#;
        let stats = parse_dictionary_str(xml, "inline").unwrap().stats();
        let fin = stats
            .targets
            .iter()
            .find(|t| t.target_language == "fin")
            .unwrap();
        assert_eq!((fin.meaning_groups, fin.translations), (1, 2));
        let rus = stats
            .targets
            .iter()
            .find(|t| t.target_language == "rus")
            .unwrap();
        assert_eq!((rus.meaning_groups, rus.translations), (1, 1));
    }

    #[test]
    fn syntax_error_reports_line() {
        let xml = "<dictionary src=\"myv\">\n<e><l>x</l>\n</dictionary>";
        match parse_dictionary_str(xml, "inline") {
            Err(Error::Format { line, .. }) => assert!(line >= 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_root_is_schema_error() {
        let xml = "<lexicon src=\"myv\"></lexicon>";
        assert!(matches!(
            parse_dictionary_str(xml, "inline"),
            Err(Error::Schema { .. })
        ));
    }

    #[test]
    fn bad_language_codes_rejected() {
        let xml = "<dictionary src=\"m\"></dictionary>";
        assert!(parse_dictionary_str(xml, "inline").is_err());
        let xml =
            r#"<dictionary src="myv"><e><l>x</l><mg><t lang="FI">a</t></mg></e></dictionary>"#;
        assert!(parse_dictionary_str(xml, "inline").is_err());
    }

    #[test]
    fn untranslated_entries_are_retained() {
        let xml = r#"<dictionary src="myv">
  <e><l>кудо</l></e>
  <e><l>пине</l><mg><t lang="fin">koira</t></mg></e>
</dictionary>"#;
        let d = parse_dictionary_str(xml, "inline").unwrap();
        assert_eq!(d.lexemes.len(), 2);
        assert_eq!(d.untranslated_count(), 1);
    }

    #[test]
    fn empty_dictionary_stats_are_zero() {
        let d = parse_dictionary_str(r#"<dictionary src="myv"></dictionary>"#, "inline").unwrap();
        let stats = d.stats();
        assert_eq!(stats.total_translations, 0);
        assert!(stats.targets.is_empty());
    }

    fn lexeme(lemma: &str, translations: &[(&str, &str)]) -> Lexeme {
        Lexeme {
            lemma: lemma.to_string(),
            pos: None,
            meaning_groups: vec![MeaningGroup {
                translations: translations
                    .iter()
                    .map(|(lang, l)| Translation {
                        language: lang.to_string(),
                        lemma: l.to_string(),
                    })
                    .collect(),
            }],
        }
    }

    #[test]
    fn projection_of_singleton_is_exact() {
        let fin = space("fin", &[("talo", &[1.0, 2.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        let lx = lexeme("кудо", &[("fin", "talo")]);
        assert_eq!(project_lexeme(&lx, &targets).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn projection_of_two_is_midpoint() {
        let fin = space("fin", &[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        let lx = lexeme("x", &[("fin", "a"), ("fin", "b")]);
        assert_eq!(project_lexeme(&lx, &targets).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn projection_across_languages_matches_sum() {
        let fin = space("fin", &[("a", &[1.0, 0.0]), ("a", &[0.0, 2.0])]);
        let rus = space("rus", &[("б", &[3.0, 3.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        targets.add(&rus, NormalizationPolicy::none()).unwrap();
        let lx = lexeme("x", &[("fin", "a"), ("rus", "б")]);
        let got = project_lexeme(&lx, &targets).unwrap();
        // three vectors total: (1,0), (0,2), (3,3)
        assert_eq!(got, vec![4.0 / 3.0, 5.0 / 3.0]);
    }

    #[test]
    fn projection_unresolvable_is_none() {
        let fin = space("fin", &[("talo", &[1.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        let lx = lexeme("x", &[("fin", "missing"), ("eng", "talo")]);
        assert!(project_lexeme(&lx, &targets).is_none());
    }

    #[test]
    fn mismatched_dims_rejected() {
        let fin = space("fin", &[("a", &[1.0, 0.0])]);
        let rus = space("rus", &[("b", &[1.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        assert!(matches!(
            targets.add(&rus, NormalizationPolicy::none()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn lookup_uses_space_policy() {
        let raw = space("fin", &[("kerros#talo", &[1.0, 1.0])]);
        let policy = NormalizationPolicy {
            strip_compound_marker: true,
            ..Default::default()
        };
        let normalized = raw.normalize_vocab(&policy);
        let mut targets = ProjectionTargets::new();
        targets.add(&normalized, policy).unwrap();
        // the dictionary cites the compound with its marker
        let lx = lexeme("x", &[("fin", "kerros#talo")]);
        assert_eq!(project_lexeme(&lx, &targets).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn build_projects_and_reports() {
        let fin = space("fin", &[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        let dict = TranslationDictionary {
            source_language: "myv".into(),
            lexemes: vec![
                lexeme("w1", &[("fin", "a")]),
                lexeme("w2", &[("fin", "missing")]),
                lexeme("w3", &[("fin", "a"), ("fin", "b")]),
            ],
        };
        let (emb, report) = build_endangered_embeddings(&dict, &targets, "myv").unwrap();
        assert_eq!(emb.len(), 2);
        assert_eq!(report.projected, 2);
        assert_eq!(report.skipped, 1);
        assert_eq!(report.projected + report.skipped, dict.lexemes.len());
        assert_eq!(report.per_language["fin"].resolved_translations, 3);
        assert_eq!(emb.lookup("w3"), vec![&[0.5, 0.5][..]]);
        assert!(report.to_text().contains("projected: 2"));
        assert!(report.to_jsonl().lines().count() == 2);
    }

    #[test]
    fn homonyms_merge_into_multi_vector_entries() {
        let fin = space("fin", &[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        let dict = TranslationDictionary {
            source_language: "myv".into(),
            lexemes: vec![lexeme("w", &[("fin", "a")]), lexeme("w", &[("fin", "b")])],
        };
        let (emb, _) = build_endangered_embeddings(&dict, &targets, "myv").unwrap();
        assert_eq!(emb.len(), 1);
        assert_eq!(emb.lookup("w").len(), 2);
    }

    #[test]
    fn zero_projectable_is_an_error() {
        let fin = space("fin", &[("a", &[1.0])]);
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        let dict = TranslationDictionary {
            source_language: "myv".into(),
            lexemes: vec![lexeme("w", &[("fin", "zzz")])],
        };
        assert!(matches!(
            build_endangered_embeddings(&dict, &targets, "myv"),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn determinism_bit_identical() {
        let fin = space(
            "fin",
            &[("a", &[0.1, 0.7]), ("b", &[-0.3, 0.2]), ("c", &[0.9, -0.4])],
        );
        let mut targets = ProjectionTargets::new();
        targets.add(&fin, NormalizationPolicy::none()).unwrap();
        let dict = TranslationDictionary {
            source_language: "myv".into(),
            lexemes: vec![
                lexeme("w1", &[("fin", "a"), ("fin", "b")]),
                lexeme("w2", &[("fin", "c")]),
            ],
        };
        let (e1, r1) = build_endangered_embeddings(&dict, &targets, "myv").unwrap();
        let (e2, r2) = build_endangered_embeddings(&dict, &targets, "myv").unwrap();
        assert_eq!(r1, r2);
        assert_eq!(e1.matrix().data().len(), e2.matrix().data().len());
        for (a, b) in e1.matrix().data().iter().zip(e2.matrix().data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_centroid_within_componentwise_hull(
            vecs in proptest::collection::vec(
                proptest::collection::vec(-5.0f64..5.0, 3), 1..6),
        ) {
            let rows: Vec<(String, Vec<f64>)> =
                vecs.iter().enumerate().map(|(i, v)| (format!("t{i}"), v.clone())).collect();
            let fin = WordEmbeddings::from_rows("fin", 3, rows).unwrap();
            let mut targets = ProjectionTargets::new();
            targets.add(&fin, NormalizationPolicy::none()).unwrap();
            let lx = lexeme(
                "w",
                &vecs.iter().enumerate()
                    .map(|(i, _)| ("fin", Box::leak(format!("t{i}").into_boxed_str()) as &str))
                    .collect::<Vec<_>>(),
            );
            let centroid = project_lexeme(&lx, &targets).unwrap();
            for j in 0..3 {
                let lo = vecs.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
                let hi = vecs.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(centroid[j] >= lo - 1e-12 && centroid[j] <= hi + 1e-12);
            }
        }

        #[test]
        fn prop_shares_sum_to_hundred(
            counts in proptest::collection::vec(1usize..40, 1..4),
        ) {
            // build a dictionary with `counts[i]` translations to language i
            let langs = ["fin", "rus", "eng"];
            let lexemes: Vec<Lexeme> = counts
                .iter()
                .enumerate()
                .flat_map(|(i, &c)| {
                    (0..c).map(move |j| lexeme(
                        Box::leak(format!("w{i}_{j}").into_boxed_str()),
                        &[(langs[i], "x")],
                    ))
                })
                .collect();
            let d = TranslationDictionary { source_language: "myv".into(), lexemes };
            let stats = d.stats();
            let sum: f64 = stats.targets.iter().map(|t| t.share_percent).sum();
            prop_assert!((sum - 100.0).abs() < 0.05);
        }
    }
}
