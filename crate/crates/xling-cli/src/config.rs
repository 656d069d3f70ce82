//! Pipeline configuration: one JSON document describing languages, stage
//! settings, and corpus locations.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use xling_core::align::RefinementConfig;
use xling_core::embeddings::NormalizationPolicy;
use xling_core::reduce::ReductionConfig;
use xling_core::sentiment::TransferMode;
use xling_core::sgns::SkipGramConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Anchor,
    ResourceRich,
    Endangered,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageEntry {
    pub code: String,
    pub role: Role,
    pub embeddings: Option<PathBuf>,
    pub seed_lexicon: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub treebank: Option<PathBuf>,
    pub realign_target: Option<String>,
    #[serde(default)]
    pub normalization: NormalizationPolicy,
}

fn default_realignment() -> RefinementConfig {
    RefinementConfig::endangered()
}

fn default_mode() -> TransferMode {
    TransferMode::Substitute
}

fn default_sentiment_epochs() -> usize {
    30
}

fn default_sentiment_lr() -> f64 {
    0.1
}

fn default_buckets() -> usize {
    1 << 20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentimentSection {
    pub train_corpus: PathBuf,
    pub train_language: String,
    pub eval_corpus: Option<PathBuf>,
    pub eval_language: Option<String>,
    #[serde(default = "default_mode")]
    pub mode: TransferMode,
    #[serde(default = "default_sentiment_epochs")]
    pub epochs: usize,
    #[serde(default = "default_sentiment_lr")]
    pub initial_learning_rate: f64,
    #[serde(default = "default_buckets")]
    pub buckets: usize,
    #[serde(default)]
    pub bigram_keys_from_anchor: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub reduction: ReductionConfig,
    #[serde(default)]
    pub alignment: RefinementConfig,
    #[serde(default = "default_realignment")]
    pub realignment: RefinementConfig,
    #[serde(default)]
    pub finetune: SkipGramConfig,
    pub sentiment: Option<SentimentSection>,
    pub languages: Vec<LanguageEntry>,
}

/// A loaded config plus the bytes it was parsed from (hashed into the run
/// manifest).
pub struct LoadedConfig {
    pub config: PipelineConfig,
    pub bytes: Vec<u8>,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let config: PipelineConfig = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
    validate_structure(&config)?;
    Ok(LoadedConfig { config, bytes })
}

fn iso_like(code: &str) -> bool {
    code.len() == 3 && code.chars().all(|c| c.is_ascii_lowercase())
}

/// Structural validation, independent of any particular command.
fn validate_structure(config: &PipelineConfig) -> Result<(), CliError> {
    if config.languages.is_empty() {
        return Err(CliError::config("config declares no languages"));
    }
    let mut codes = BTreeSet::new();
    for lang in &config.languages {
        if !iso_like(&lang.code) {
            return Err(CliError::config(format!(
                "language code {:?} is not an ISO 639-3 code",
                lang.code
            )));
        }
        if !codes.insert(lang.code.as_str()) {
            return Err(CliError::config(format!(
                "duplicate language code {:?}",
                lang.code
            )));
        }
    }
    let anchors: Vec<&LanguageEntry> = config
        .languages
        .iter()
        .filter(|l| l.role == Role::Anchor)
        .collect();
    if anchors.len() != 1 {
        return Err(CliError::config(format!(
            "config must declare exactly one anchor language, found {}",
            anchors.len()
        )));
    }
    for lang in &config.languages {
        match lang.role {
            Role::Anchor => {
                if lang.embeddings.is_none() {
                    return Err(CliError::config(format!(
                        "anchor language {} needs an embeddings path",
                        lang.code
                    )));
                }
                if lang.seed_lexicon.is_some()
                    || lang.realign_target.is_some()
                    || lang.dictionary.is_some()
                {
                    return Err(CliError::config(format!(
                        "anchor language {} must not carry seed_lexicon/realign_target/dictionary",
                        lang.code
                    )));
                }
            }
            Role::ResourceRich => {
                if lang.embeddings.is_none() {
                    return Err(CliError::config(format!(
                        "resource-rich language {} needs an embeddings path",
                        lang.code
                    )));
                }
                if lang.seed_lexicon.is_none() {
                    return Err(CliError::config(format!(
                        "resource-rich language {} needs a seed_lexicon for alignment",
                        lang.code
                    )));
                }
                if lang.realign_target.is_some() || lang.dictionary.is_some() {
                    return Err(CliError::config(format!(
                        "resource-rich language {} must not carry realign_target/dictionary",
                        lang.code
                    )));
                }
            }
            Role::Endangered => {
                if lang.embeddings.is_some() {
                    return Err(CliError::config(format!(
                        "endangered language {} gets its embeddings constructed; remove the path",
                        lang.code
                    )));
                }
                if lang.dictionary.is_none() {
                    return Err(CliError::config(format!(
                        "endangered language {} needs a translation dictionary",
                        lang.code
                    )));
                }
                let target = lang.realign_target.as_deref().ok_or_else(|| {
                    CliError::config(format!(
                        "endangered language {} needs a realign_target",
                        lang.code
                    ))
                })?;
                let ok = config.languages.iter().any(|l| {
                    l.code == target && matches!(l.role, Role::Anchor | Role::ResourceRich)
                });
                if !ok {
                    return Err(CliError::config(format!(
                        "realign_target {:?} of {} is not an anchor or resource-rich language in \
                         this config",
                        target, lang.code
                    )));
                }
            }
        }
    }
    if let Some(s) = &config.sentiment {
        if !config.languages.iter().any(|l| l.code == s.train_language) {
            return Err(CliError::config(format!(
                "sentiment train_language {:?} is not in the config",
                s.train_language
            )));
        }
        if let Some(e) = &s.eval_language {
            if !config.languages.iter().any(|l| l.code == *e) {
                return Err(CliError::config(format!(
                    "sentiment eval_language {e:?} is not in the config"
                )));
            }
        }
        if !s.buckets.is_power_of_two() {
            return Err(CliError::config("sentiment buckets must be a power of two"));
        }
    }
    Ok(())
}

impl PipelineConfig {
    pub fn anchor(&self) -> &LanguageEntry {
        self.languages
            .iter()
            .find(|l| l.role == Role::Anchor)
            .expect("validated")
    }

    pub fn resource_rich(&self) -> impl Iterator<Item = &LanguageEntry> {
        self.languages
            .iter()
            .filter(|l| l.role == Role::ResourceRich)
    }

    pub fn endangered(&self) -> impl Iterator<Item = &LanguageEntry> {
        self.languages.iter().filter(|l| l.role == Role::Endangered)
    }

    pub fn language(&self, code: &str) -> Option<&LanguageEntry> {
        self.languages.iter().find(|l| l.code == code)
    }
}

/// Check that a set of input files exists before a command writes anything.
pub fn require_files<'a>(
    files: impl IntoIterator<Item = (&'a str, &'a Path)>,
) -> Result<(), CliError> {
    for (what, path) in files {
        if !path.is_file() {
            return Err(CliError::config(format!(
                "{what} not found: {}",
                path.display()
            )));
        }
    }
    Ok(())
}
