//! The pipeline commands. Each validates everything it needs before writing
//! a single byte into the run directory.

use std::path::{Path, PathBuf};

use serde_json::json;
use xling_core::align::{align_supervised, apply_alignment, AlignmentResult, SeedLexicon};
use xling_core::dictionary::{
    build_endangered_embeddings, parse_dictionary_xml, ProjectionTargets, TranslationDictionary,
};
use xling_core::embeddings::{load_word2vec_text, save_word2vec_text, Metric, WordEmbeddings};
use xling_core::reduce::reduce;
use xling_core::sentiment::{
    evaluate, load_labeled_corpus, load_model, save_model, train, SentimentTrainConfig,
    TransferContext, TransferMode,
};
use xling_core::sgns::skipgram_finetune;

use crate::artifacts::{record_stage, save_matrix, RunDir};
use crate::config::{require_files, LoadedConfig, Role};
use crate::CliError;

type Emb = WordEmbeddings<f64>;

fn load_vec(path: &Path, code: &str) -> Result<Emb, CliError> {
    load_word2vec_text(path, code).map_err(CliError::from)
}

fn save_vec(e: &Emb, run: &RunDir, path: &Path) -> Result<(), CliError> {
    run.ensure_parent(path)?;
    save_word2vec_text(e, path).map_err(CliError::from)
}

fn stage_artifact(run: &RunDir, path: &Path, missing_hint: &str) -> Result<PathBuf, CliError> {
    if path.is_file() {
        Ok(path.to_path_buf())
    } else {
        Err(CliError::config(format!(
            "missing artifact {}; {missing_hint}",
            path.strip_prefix(run.root()).unwrap_or(path).display()
        )))
    }
}

/// `reduce`: normalize each pre-trained vocabulary, bring every space to the
/// target dimensionality, and write the results under `reduced/`.
pub fn cmd_reduce(loaded: &LoadedConfig, run: &RunDir, seed: u64) -> Result<(), CliError> {
    let config = &loaded.config;
    let inputs: Vec<(&str, &Path)> = config
        .languages
        .iter()
        .filter(|l| l.role != Role::Endangered)
        .map(|l| {
            (
                "embeddings file",
                l.embeddings.as_deref().expect("validated"),
            )
        })
        .collect();
    require_files(inputs)?;

    let mut written = Vec::new();
    let mut metrics = Vec::new();
    for lang in config
        .languages
        .iter()
        .filter(|l| l.role != Role::Endangered)
    {
        let path = lang.embeddings.as_deref().expect("validated");
        let raw = load_vec(path, &lang.code)?;
        let normalized = raw.normalize_vocab(&lang.normalization);
        let reduced = reduce(&normalized, &config.reduction)?;
        let out = run.reduced_vec(&lang.code);
        save_vec(&reduced, run, &out)?;
        log::info!(
            "reduce {}: {} lemmas, {} vectors, dim {} -> {}",
            lang.code,
            reduced.len(),
            reduced.vector_count(),
            raw.dim(),
            reduced.dim()
        );
        metrics.push(json!({
            "stage": "reduce",
            "language": lang.code,
            "lemmas": reduced.len(),
            "vectors": reduced.vector_count(),
            "from_dim": raw.dim(),
            "to_dim": reduced.dim(),
            "skipped": raw.dim() == config.reduction.target_dim,
        }));
        written.push(out);
    }
    run.append_metrics(&metrics)?;
    record_stage(run, &loaded.bytes, seed, "reduce", &written)
}

/// `align`: copy the anchor space unchanged, align every resource-rich space
/// onto it, and persist both the aligned vectors and the mapping matrices.
pub fn cmd_align(loaded: &LoadedConfig, run: &RunDir, seed: u64) -> Result<(), CliError> {
    let config = &loaded.config;
    let anchor = config.anchor();
    let anchor_reduced = stage_artifact(
        run,
        &run.reduced_vec(&anchor.code),
        "run `xling reduce` first",
    )?;
    let mut seeds = Vec::new();
    for lang in config.resource_rich() {
        stage_artifact(
            run,
            &run.reduced_vec(&lang.code),
            "run `xling reduce` first",
        )?;
        let seed_path = lang.seed_lexicon.as_deref().expect("validated");
        seeds.push(("seed lexicon", seed_path));
    }
    require_files(seeds)?;

    let anchor_space = load_vec(&anchor_reduced, &anchor.code)?;
    let mut written = Vec::new();
    let anchor_out = run.aligned_vec(&anchor.code);
    save_vec(&anchor_space, run, &anchor_out)?;
    written.push(anchor_out);

    let mut metrics = Vec::new();
    for lang in config.resource_rich() {
        let source = load_vec(&run.reduced_vec(&lang.code), &lang.code)?;
        let lexicon = SeedLexicon::from_file(
            lang.seed_lexicon.as_deref().expect("validated"),
            &lang.code,
            &anchor.code,
        )?;
        let result = align_supervised(&source, &anchor_space, &lexicon, &config.alignment)?;
        let aligned = apply_alignment(&source, &result)?;
        let out = run.aligned_vec(&lang.code);
        save_vec(&aligned, run, &out)?;
        let map_out = run.mapping(&lang.code);
        run.ensure_parent(&map_out)?;
        save_matrix(&result.mapping, &map_out)?;
        log::info!(
            "align {} -> {}: {} seed pairs, induced sizes {:?}",
            lang.code,
            anchor.code,
            lexicon.len(),
            result.induced_lexicon_size_per_iteration
        );
        for (i, size) in result.induced_lexicon_size_per_iteration.iter().enumerate() {
            metrics.push(json!({
                "stage": "align",
                "language": lang.code,
                "iteration": i + 1,
                "induced_pairs": size,
            }));
        }
        metrics.push(json!({
            "stage": "align",
            "language": lang.code,
            "target": anchor.code,
            "seed_pairs": lexicon.len(),
            "iterations": result.iterations_run,
        }));
        written.push(out);
        written.push(map_out);
    }
    run.append_metrics(&metrics)?;
    record_stage(run, &loaded.bytes, seed, "align", &written)
}

/// Aligned spaces with their lookup policies, for projection and boost.
fn projection_targets<'a>(
    config: &'a LoadedConfig,
    run: &RunDir,
    spaces: &'a mut Vec<Emb>,
) -> Result<ProjectionTargets<'a, f64>, CliError> {
    let cfg = &config.config;
    for lang in cfg.languages.iter().filter(|l| l.role != Role::Endangered) {
        let path = stage_artifact(run, &run.aligned_vec(&lang.code), "run `xling align` first")?;
        spaces.push(load_vec(&path, &lang.code)?);
    }
    let mut targets = ProjectionTargets::new();
    for (lang, space) in cfg
        .languages
        .iter()
        .filter(|l| l.role != Role::Endangered)
        .zip(spaces.iter())
    {
        targets.add(space, lang.normalization.clone())?;
    }
    Ok(targets)
}

/// `project`: construct endangered-language embeddings as translation
/// centroids over the aligned spaces.
pub fn cmd_project(loaded: &LoadedConfig, run: &RunDir, seed: u64) -> Result<(), CliError> {
    let config = &loaded.config;
    let dicts: Vec<(&str, &Path)> = config
        .endangered()
        .map(|l| ("dictionary", l.dictionary.as_deref().expect("validated")))
        .collect();
    if dicts.is_empty() {
        return Err(CliError::config(
            "config declares no endangered languages to project",
        ));
    }
    require_files(dicts)?;
    let mut spaces = Vec::new();
    let targets = projection_targets(loaded, run, &mut spaces)?;

    let mut written = Vec::new();
    let mut metrics = Vec::new();
    for lang in config.endangered() {
        let dict = parse_dictionary_xml(lang.dictionary.as_deref().expect("validated"))?;
        let stats = dict.stats();
        log::info!("dictionary statistics for {}:\n{stats}", lang.code);
        let (embeddings, report) = build_endangered_embeddings(&dict, &targets, &lang.code)?;
        let out = run.projected_vec(&lang.code);
        save_vec(&embeddings, run, &out)?;
        let cov_txt = run.coverage_text(&lang.code);
        std::fs::write(&cov_txt, report.to_text())
            .map_err(|e| CliError::data(format!("cannot write coverage: {e}")))?;
        let cov_jsonl = run.coverage_jsonl(&lang.code);
        std::fs::write(&cov_jsonl, report.to_jsonl())
            .map_err(|e| CliError::data(format!("cannot write coverage: {e}")))?;
        log::info!(
            "project {}: {} of {} lexemes projected ({} skipped)",
            lang.code,
            report.projected,
            report.lexemes,
            report.skipped
        );
        for t in &stats.targets {
            metrics.push(json!({
                "stage": "project",
                "language": lang.code,
                "target": t.target_language,
                "meaning_groups": t.meaning_groups,
                "translations": t.translations,
                "share_percent": format!("{:.2}", t.share_percent),
            }));
        }
        metrics.push(json!({
            "stage": "project",
            "language": lang.code,
            "lexemes": report.lexemes,
            "projected": report.projected,
            "skipped": report.skipped,
        }));
        written.extend([out, cov_txt, cov_jsonl]);
    }
    run.append_metrics(&metrics)?;
    record_stage(run, &loaded.bytes, seed, "project", &written)
}

/// Seed lexicon for re-alignment: dictionary pairs into the realign target
/// language, with the target's lookup normalization applied to the
/// translation side.
fn realign_seed(
    dict: &TranslationDictionary,
    source_code: &str,
    target_code: &str,
    policy: &xling_core::embeddings::NormalizationPolicy,
) -> SeedLexicon {
    let mut pairs = Vec::new();
    for lexeme in &dict.lexemes {
        for mg in &lexeme.meaning_groups {
            for t in &mg.translations {
                if t.language == target_code {
                    pairs.push((lexeme.lemma.clone(), policy.apply(&t.lemma)));
                }
            }
        }
    }
    SeedLexicon::new(pairs, source_code, target_code)
}

/// `finetune`: skip-gram fine-tuning on each endangered treebank, then
/// supervised re-alignment to the configured target (skipped entirely when
/// `realignment.iterations` is 0).
pub fn cmd_finetune(loaded: &LoadedConfig, run: &RunDir, seed: u64) -> Result<(), CliError> {
    let config = &loaded.config;
    let mut inputs: Vec<(&str, &Path)> = Vec::new();
    for lang in config.endangered() {
        let treebank = lang.treebank.as_deref().ok_or_else(|| {
            CliError::config(format!("endangered language {} has no treebank", lang.code))
        })?;
        inputs.push(("treebank", treebank));
        inputs.push(("dictionary", lang.dictionary.as_deref().expect("validated")));
        stage_artifact(
            run,
            &run.projected_vec(&lang.code),
            "run `xling project` first",
        )?;
        if config.realignment.iterations > 0 {
            stage_artifact(
                run,
                &run.aligned_vec(lang.realign_target.as_deref().expect("validated")),
                "run `xling align` first",
            )?;
        }
    }
    require_files(inputs)?;

    let mut written = Vec::new();
    let mut metrics = Vec::new();
    for lang in config.endangered() {
        let projected = load_vec(&run.projected_vec(&lang.code), &lang.code)?;
        let corpus = xling_core::conllu::parse_conllu(lang.treebank.as_deref().expect("checked"))?;
        let mut sg_config = config.finetune.clone();
        sg_config.rng_seed = seed;
        let outcome = skipgram_finetune(&projected, &corpus, &sg_config)?;
        log::info!(
            "finetune {}: {} sentences, {} OOV admitted, epoch losses {:?}",
            lang.code,
            corpus.len(),
            outcome.admitted_oov,
            outcome.epoch_mean_loss
        );
        metrics.push(json!({
            "stage": "finetune",
            "language": lang.code,
            "sentences": corpus.len(),
            "admitted_oov": outcome.admitted_oov,
            "dropped_tokens": outcome.dropped_tokens,
            "epoch_mean_loss": outcome.epoch_mean_loss,
        }));

        let final_embeddings = if config.realignment.iterations > 0 {
            let target_code = lang.realign_target.as_deref().expect("validated");
            let target_entry = config.language(target_code).expect("validated");
            let target_space = load_vec(&run.aligned_vec(target_code), target_code)?;
            let dict = parse_dictionary_xml(lang.dictionary.as_deref().expect("validated"))?;
            let lexicon = realign_seed(&dict, &lang.code, target_code, &target_entry.normalization);
            if lexicon.is_empty() {
                return Err(CliError::data(format!(
                    "dictionary of {} holds no translations into realign target {target_code}",
                    lang.code
                )));
            }
            let result: AlignmentResult<f64> = align_supervised(
                &outcome.embeddings,
                &target_space,
                &lexicon,
                &config.realignment,
            )?;
            let map_out = run.final_mapping(&lang.code);
            run.ensure_parent(&map_out)?;
            save_matrix(&result.mapping, &map_out)?;
            metrics.push(json!({
                "stage": "realign",
                "language": lang.code,
                "target": target_code,
                "seed_pairs": lexicon.len(),
                "induced_sizes": result.induced_lexicon_size_per_iteration,
            }));
            log::info!(
                "realign {} -> {}: {} dictionary pairs, induced sizes {:?}",
                lang.code,
                target_code,
                lexicon.len(),
                result.induced_lexicon_size_per_iteration
            );
            written.push(map_out);
            apply_alignment(&outcome.embeddings, &result)?
        } else {
            log::info!("realign {}: skipped (0 iterations configured)", lang.code);
            outcome.embeddings
        };
        let out = run.final_vec(&lang.code);
        save_vec(&final_embeddings, run, &out)?;
        written.push(out);
    }
    run.append_metrics(&metrics)?;
    record_stage(run, &loaded.bytes, seed, "finetune", &written)
}

pub struct NnArgs {
    pub query: String,
    pub source_lang: String,
    pub target_lang: String,
    pub k: usize,
    pub metric: String,
    pub csls_k: usize,
    pub source_embeddings: Option<PathBuf>,
    pub target_embeddings: Option<PathBuf>,
}

/// `nn`: print the top-k nearest lemmas in the target space for a source
/// lemma's vector.
pub fn cmd_nn(loaded: &LoadedConfig, run: &RunDir, args: &NnArgs) -> Result<(), CliError> {
    let resolve = |explicit: &Option<PathBuf>, code: &str| -> Result<PathBuf, CliError> {
        if let Some(p) = explicit {
            if !p.is_file() {
                return Err(CliError::config(format!(
                    "embeddings not found: {}",
                    p.display()
                )));
            }
            return Ok(p.clone());
        }
        if loaded.config.language(code).is_none() {
            return Err(CliError::config(format!(
                "language {code:?} is not in the config"
            )));
        }
        run.best_embeddings(code).ok_or_else(|| {
            CliError::config(format!(
                "no artifact for {code} under {}; run the pipeline or pass an explicit path",
                run.root().display()
            ))
        })
    };
    let source_path = resolve(&args.source_embeddings, &args.source_lang)?;
    let target_path = resolve(&args.target_embeddings, &args.target_lang)?;
    let source = load_vec(&source_path, &args.source_lang)?;
    let target = load_vec(&target_path, &args.target_lang)?;
    if args.k == 0 {
        return Err(CliError::config("k must be at least 1"));
    }
    let query = source.first_vector(&args.query).ok_or_else(|| {
        CliError::data(format!(
            "lemma {:?} is out of vocabulary in {} ({})",
            args.query,
            args.source_lang,
            source_path.display()
        ))
    })?;
    let results = match args.metric.as_str() {
        "cosine" => target.nearest_neighbors(query, args.k, Metric::Cosine)?,
        "csls" => target.nearest_neighbors(
            query,
            args.k,
            Metric::Csls {
                k: args.csls_k,
                source: &source,
            },
        )?,
        other => return Err(CliError::config(format!("unknown metric {other:?}"))),
    };
    for (lemma, score) in results {
        println!("{lemma}\t{score:.4}");
    }
    Ok(())
}

fn resolve_space(run: &RunDir, code: &str, loaded: &LoadedConfig) -> Result<Emb, CliError> {
    if loaded.config.language(code).is_none() {
        return Err(CliError::config(format!(
            "language {code:?} is not in the config"
        )));
    }
    let path = run.best_embeddings(code).ok_or_else(|| {
        CliError::config(format!(
            "no embeddings artifact for {code}; run the pipeline stages first"
        ))
    })?;
    load_vec(&path, code)
}

/// `sentiment-train`: train the classifier on the configured corpus over the
/// train language's aligned space.
pub fn cmd_sentiment_train(loaded: &LoadedConfig, run: &RunDir, seed: u64) -> Result<(), CliError> {
    let config = &loaded.config;
    let section = config
        .sentiment
        .as_ref()
        .ok_or_else(|| CliError::config("config has no sentiment section"))?;
    require_files([("sentiment training corpus", section.train_corpus.as_path())])?;
    let space = resolve_space(run, &section.train_language, loaded)?;
    let corpus = load_labeled_corpus(&section.train_corpus)?;
    if corpus.dropped_labels > 0 {
        log::info!(
            "dropped {} non-binary labels from the training corpus",
            corpus.dropped_labels
        );
    }
    let train_config = SentimentTrainConfig {
        epochs: section.epochs,
        initial_learning_rate: section.initial_learning_rate,
        buckets: section.buckets,
        rng_seed: seed,
    };
    let trained = train(&corpus.examples, &space, &train_config)?;
    let out = run.sentiment_model();
    run.ensure_parent(&out)?;
    save_model(&trained.model, &out)?;
    log::info!(
        "sentiment-train on {}: {} examples, final training accuracy {:.3}",
        section.train_language,
        corpus.examples.len(),
        trained.epoch_accuracy.last().copied().unwrap_or(0.0)
    );
    let metrics: Vec<serde_json::Value> = trained
        .epoch_accuracy
        .iter()
        .enumerate()
        .map(|(i, acc)| {
            json!({
                "stage": "sentiment-train",
                "language": section.train_language,
                "epoch": i + 1,
                "train_accuracy": acc,
            })
        })
        .collect();
    run.append_metrics(&metrics)?;
    record_stage(run, &loaded.bytes, seed, "sentiment-train", &[out])
}

/// `sentiment-eval`: evaluate the persisted model on the configured corpus
/// in the configured transfer mode.
pub fn cmd_sentiment_eval(loaded: &LoadedConfig, run: &RunDir, seed: u64) -> Result<(), CliError> {
    let config = &loaded.config;
    let section = config
        .sentiment
        .as_ref()
        .ok_or_else(|| CliError::config("config has no sentiment section"))?;
    let eval_corpus = section
        .eval_corpus
        .as_deref()
        .ok_or_else(|| CliError::config("sentiment section has no eval_corpus"))?;
    let eval_language = section
        .eval_language
        .as_deref()
        .ok_or_else(|| CliError::config("sentiment section has no eval_language"))?;
    require_files([("sentiment evaluation corpus", eval_corpus)])?;
    let model_path = run.sentiment_model();
    if !model_path.is_file() {
        return Err(CliError::config(
            "no trained model found; run `xling sentiment-train` first",
        ));
    }

    let model = load_model::<f64>(&model_path)?;
    let source = resolve_space(run, eval_language, loaded)?;
    let corpus = load_labeled_corpus(eval_corpus)?;
    if corpus.examples.is_empty() {
        return Err(CliError::data(format!(
            "evaluation corpus {} contains no usable examples",
            eval_corpus.display()
        )));
    }

    let anchor_code = &config.anchor().code;
    let needs_anchor = !matches!(section.mode, TransferMode::Direct);
    let anchor_space = if needs_anchor {
        Some(resolve_space(run, anchor_code, loaded)?)
    } else {
        None
    };

    // boost resources: the endangered language's dictionary over all aligned
    // resource-rich + anchor spaces
    let mut boost_spaces: Vec<(xling_core::embeddings::NormalizationPolicy, Emb)> = Vec::new();
    let mut dictionary = None;
    let mut targets_storage = None;
    if matches!(section.mode, TransferMode::Boost) {
        let lang = config.language(eval_language).ok_or_else(|| {
            CliError::config(format!(
                "eval language {eval_language:?} is not in the config"
            ))
        })?;
        let dict_path = lang.dictionary.as_deref().ok_or_else(|| {
            CliError::config(format!(
                "boost mode needs a dictionary for eval language {eval_language}"
            ))
        })?;
        dictionary = Some(parse_dictionary_xml(dict_path)?);
        for entry in config
            .languages
            .iter()
            .filter(|l| l.role != Role::Endangered)
        {
            let path = run.aligned_vec(&entry.code);
            if path.is_file() {
                boost_spaces.push((entry.normalization.clone(), load_vec(&path, &entry.code)?));
            }
        }
        let mut targets = ProjectionTargets::new();
        for (policy, space) in &boost_spaces {
            targets.add(space, policy.clone())?;
        }
        targets_storage = Some(targets);
    }

    let ctx = TransferContext {
        mode: section.mode,
        anchor: anchor_space.as_ref(),
        dictionary: dictionary.as_ref(),
        boost_targets: targets_storage.as_ref(),
        bigram_keys_from_anchor: section.bigram_keys_from_anchor,
    };
    let result = evaluate(&corpus.examples, &model, &source, &ctx)?;
    let report = json!({
        "language": eval_language,
        "mode": section.mode,
        "total": result.total,
        "correct": result.correct,
        "accuracy": result.accuracy,
        "confusion": {
            "negative": {"negative": result.confusion[0][0], "positive": result.confusion[0][1]},
            "positive": {"negative": result.confusion[1][0], "positive": result.confusion[1][1]},
        },
        "dropped_labels": corpus.dropped_labels,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    let out = run.sentiment_eval(eval_language);
    run.ensure_parent(&out)?;
    std::fs::write(
        &out,
        serde_json::to_string_pretty(&report).expect("serializes") + "\n",
    )
    .map_err(|e| CliError::data(format!("cannot write {}: {e}", out.display())))?;
    run.append_metrics(&[json!({
        "stage": "sentiment-eval",
        "language": eval_language,
        "accuracy": result.accuracy,
        "total": result.total,
    })])?;
    record_stage(run, &loaded.bytes, seed, "sentiment-eval", &[out])
}
