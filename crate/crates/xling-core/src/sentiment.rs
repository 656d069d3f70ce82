//! Linear sentiment classifier over averaged word vectors plus hashed bigram
//! embeddings, trained in one language and applied zero-shot in another via
//! the aligned spaces.
//!
//! Word vectors are frozen during training: updating them would break their
//! alignment with the other languages. Only the classifier weights, bias,
//! and bigram table learn.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::dictionary::{ProjectionTargets, TranslationDictionary};
use crate::embeddings::WordEmbeddings;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Binary sentiment label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative,
    Positive,
}

impl Polarity {
    pub fn index(self) -> usize {
        match self {
            Polarity::Negative => 0,
            Polarity::Positive => 1,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "negative" => Some(Polarity::Negative),
            "positive" => Some(Polarity::Positive),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Negative => "negative",
            Polarity::Positive => "positive",
        }
    }
}

const MODEL_MAGIC: &[u8; 4] = b"XLSM";
const MODEL_VERSION: u32 = 1;

/// Linear classifier state.
#[derive(Debug, Clone)]
pub struct SentimentModel<T> {
    dim: usize,
    buckets: usize,
    /// 2 x dim, row 0 = negative, row 1 = positive.
    weights: Matrix<T>,
    bias: [T; 2],
    /// buckets x dim learnable hashed-bigram embeddings.
    bigram_table: Matrix<T>,
    trained_epochs: usize,
}

impl<T: Scalar> SentimentModel<T> {
    /// Zero-initialized model. `buckets` must be a power of two.
    pub fn new(dim: usize, buckets: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "model dimension must be positive".into(),
            ));
        }
        if buckets == 0 || !buckets.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "bigram bucket count must be a power of two, got {buckets}"
            )));
        }
        Ok(SentimentModel {
            dim,
            buckets,
            weights: Matrix::zeros(2, dim),
            bias: [T::zero(); 2],
            bigram_table: Matrix::zeros(buckets, dim),
            trained_epochs: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn buckets(&self) -> usize {
        self.buckets
    }

    pub fn trained_epochs(&self) -> usize {
        self.trained_epochs
    }

    fn logits(&self, feature: &[T]) -> [T; 2] {
        [
            dot(self.weights.row(0), feature) + self.bias[0],
            dot(self.weights.row(1), feature) + self.bias[1],
        ]
    }
}

fn fnv1a64(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Bucket of the bigram `(first, second)`: FNV-1a 64 over the UTF-8 bytes of
/// `first ++ 0x01 ++ second`, masked to the table size.
pub fn bigram_bucket(first: &str, second: &str, buckets: usize) -> usize {
    debug_assert!(buckets.is_power_of_two());
    let bytes = first
        .as_bytes()
        .iter()
        .copied()
        .chain(std::iter::once(0x01))
        .chain(second.as_bytes().iter().copied());
    (fnv1a64(bytes) & (buckets as u64 - 1)) as usize
}

/// Resolved ingredients of one sentence feature: word vectors (whatever
/// transfer mode produced them) and bigram bucket ids.
struct FeatureParts<T> {
    words: Vec<Vec<T>>,
    buckets: Vec<usize>,
}

impl<T: Scalar> FeatureParts<T> {
    fn unit_count(&self) -> usize {
        self.words.len() + self.buckets.len()
    }
}

fn assemble_feature<T: Scalar>(model: &SentimentModel<T>, parts: &FeatureParts<T>) -> Vec<T> {
    let mut acc = vec![T::zero(); model.dim];
    let units = parts.unit_count();
    if units == 0 {
        return acc; // every token OOV and no bigrams: zero feature
    }
    for w in &parts.words {
        for (a, &v) in acc.iter_mut().zip(w) {
            *a += v;
        }
    }
    for &b in &parts.buckets {
        for (a, &v) in acc.iter_mut().zip(model.bigram_table.row(b)) {
            *a += v;
        }
    }
    let n = T::from_config(units as f64);
    for a in &mut acc {
        *a /= n;
    }
    acc
}

fn direct_parts<T: Scalar>(
    lemmas: &[String],
    embeddings: &WordEmbeddings<T>,
    model: &SentimentModel<T>,
) -> FeatureParts<T> {
    FeatureParts {
        words: lemmas
            .iter()
            .filter_map(|l| embeddings.mean_vector(l))
            .collect(),
        buckets: lemmas
            .windows(2)
            .map(|pair| bigram_bucket(&pair[0], &pair[1], model.buckets))
            .collect(),
    }
}

/// Sentence feature: the mean of all word units (mean lemma vectors, OOV
/// lemmas skipped) and all adjacent-bigram table rows. Zero vector when
/// nothing resolves.
pub fn featurize<T: Scalar>(
    lemmas: &[String],
    embeddings: &WordEmbeddings<T>,
    model: &SentimentModel<T>,
) -> Result<Vec<T>> {
    if lemmas.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot featurize an empty lemma list".into(),
        ));
    }
    if embeddings.dim() != model.dim {
        return Err(Error::Shape(
            "embeddings dim does not match model dim".into(),
        ));
    }
    Ok(assemble_feature(
        model,
        &direct_parts(lemmas, embeddings, model),
    ))
}

fn softmax2<T: Scalar>(logits: [T; 2]) -> [T; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let sum = e0 + e1;
    [e0 / sum, e1 / sum]
}

struct ExampleGrads<T> {
    w: Matrix<T>,
    b: [T; 2],
    bigram_rows: Vec<(usize, Vec<T>)>,
}

/// Cross-entropy gradients for one example at the model's current
/// parameters.
fn example_grads<T: Scalar>(
    model: &SentimentModel<T>,
    parts: &FeatureParts<T>,
    label: Polarity,
) -> ExampleGrads<T> {
    let feature = assemble_feature(model, parts);
    let probs = softmax2(model.logits(&feature));
    let mut dlogits = [probs[0], probs[1]];
    dlogits[label.index()] -= T::one();

    let mut w = Matrix::zeros(2, model.dim);
    for (r, &g) in dlogits.iter().enumerate() {
        for (out, &f) in w.row_mut(r).iter_mut().zip(&feature) {
            *out = g * f;
        }
    }
    let units = parts.unit_count();
    let mut bigram_rows = Vec::new();
    if units > 0 && !parts.buckets.is_empty() {
        // d(loss)/d(feature) = W^T dlogits; each unit enters the mean with
        // weight 1/units
        let scale = T::one() / T::from_config(units as f64);
        let dfeature: Vec<T> = (0..model.dim)
            .map(|j| {
                (dlogits[0] * model.weights.get(0, j) + dlogits[1] * model.weights.get(1, j))
                    * scale
            })
            .collect();
        for &bucket in &parts.buckets {
            bigram_rows.push((bucket, dfeature.clone()));
        }
    }
    ExampleGrads {
        w,
        b: dlogits,
        bigram_rows,
    }
}

#[cfg(test)]
fn cross_entropy<T: Scalar>(
    model: &SentimentModel<T>,
    parts: &FeatureParts<T>,
    label: Polarity,
) -> T {
    let feature = assemble_feature(model, parts);
    let probs = softmax2(model.logits(&feature));
    -probs[label.index()].max(T::from_config(1e-300)).ln()
}

/// Training settings. The seed is reserved for future stochastic variants:
/// with zero initialization and in-order example visits the run is already
/// fully determined.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SentimentTrainConfig {
    pub epochs: usize,
    pub initial_learning_rate: f64,
    /// Bigram hash buckets (power of two).
    pub buckets: usize,
    pub rng_seed: u64,
}

impl Default for SentimentTrainConfig {
    fn default() -> Self {
        SentimentTrainConfig {
            epochs: 30,
            initial_learning_rate: 0.1,
            buckets: 1 << 20,
            rng_seed: 0,
        }
    }
}

pub struct TrainedSentiment<T> {
    pub model: SentimentModel<T>,
    /// Training-set accuracy measured after each epoch.
    pub epoch_accuracy: Vec<f64>,
}

/// Train by per-example SGD on softmax cross-entropy, visiting examples in
/// corpus order each epoch, with the learning rate decaying linearly to zero
/// over all updates. Word vectors are read from `embeddings` and never
/// updated.
pub fn train<T: Scalar>(
    corpus: &[(Vec<String>, Polarity)],
    embeddings: &WordEmbeddings<T>,
    config: &SentimentTrainConfig,
) -> Result<TrainedSentiment<T>> {
    if corpus.is_empty() {
        return Err(Error::Training("training corpus is empty".into()));
    }
    let has_pos = corpus.iter().any(|(_, l)| *l == Polarity::Positive);
    let has_neg = corpus.iter().any(|(_, l)| *l == Polarity::Negative);
    if !has_pos || !has_neg {
        return Err(Error::Training(
            "training corpus must contain both labels".into(),
        ));
    }
    if corpus.iter().any(|(lemmas, _)| lemmas.is_empty()) {
        return Err(Error::Training(
            "training corpus contains an empty sentence".into(),
        ));
    }
    let mut model = SentimentModel::new(embeddings.dim(), config.buckets)?;
    let parts: Vec<FeatureParts<T>> = corpus
        .iter()
        .map(|(lemmas, _)| direct_parts(lemmas, embeddings, &model))
        .collect();

    let total_steps = (config.epochs * corpus.len()).max(1);
    let lr0 = config.initial_learning_rate;
    let mut step = 0usize;
    let mut epoch_accuracy = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        for (p, (_, label)) in parts.iter().zip(corpus) {
            let lr = T::from_config(lr0 * (1.0 - step as f64 / total_steps as f64));
            step += 1;
            let grads = example_grads(&model, p, *label);
            for r in 0..2 {
                for (w, &g) in model.weights.row_mut(r).iter_mut().zip(grads.w.row(r)) {
                    *w -= lr * g;
                }
                model.bias[r] -= lr * grads.b[r];
            }
            for (bucket, drow) in &grads.bigram_rows {
                for (v, &g) in model.bigram_table.row_mut(*bucket).iter_mut().zip(drow) {
                    *v -= lr * g;
                }
            }
        }
        model.trained_epochs += 1;
        let correct = parts
            .iter()
            .zip(corpus)
            .filter(|(p, (_, label))| {
                let probs = softmax2(model.logits(&assemble_feature(&model, p)));
                let predicted = if probs[1] > probs[0] {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                };
                predicted == *label
            })
            .count();
        epoch_accuracy.push(correct as f64 / corpus.len() as f64);
    }
    Ok(TrainedSentiment {
        model,
        epoch_accuracy,
    })
}

/// How lemma vectors are obtained at prediction time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferMode {
    /// Use the source-language vectors as-is.
    Direct,
    /// Replace each lemma vector by its cosine-nearest vector in the anchor
    /// space.
    Substitute,
    /// Substitute, averaged with the centroid of the lemma's dictionary
    /// translations resolved in the provided resource-rich spaces.
    Boost,
}

/// Everything prediction may need beyond the source space.
pub struct TransferContext<'a, T> {
    pub mode: TransferMode,
    pub anchor: Option<&'a WordEmbeddings<T>>,
    pub dictionary: Option<&'a TranslationDictionary>,
    /// Aligned spaces the boost centroids are resolved against.
    pub boost_targets: Option<&'a ProjectionTargets<'a, T>>,
    /// Key bigrams on substituted anchor lemmas instead of the original
    /// source lemmas.
    pub bigram_keys_from_anchor: bool,
}

impl<'a, T> TransferContext<'a, T> {
    pub fn direct() -> Self {
        TransferContext {
            mode: TransferMode::Direct,
            anchor: None,
            dictionary: None,
            boost_targets: None,
            bigram_keys_from_anchor: false,
        }
    }

    pub fn substitute(anchor: &'a WordEmbeddings<T>) -> Self {
        TransferContext {
            mode: TransferMode::Substitute,
            anchor: Some(anchor),
            ..Self::direct()
        }
    }

    pub fn boost(
        anchor: &'a WordEmbeddings<T>,
        dictionary: &'a TranslationDictionary,
        boost_targets: &'a ProjectionTargets<'a, T>,
    ) -> Self {
        TransferContext {
            mode: TransferMode::Boost,
            anchor: Some(anchor),
            dictionary: Some(dictionary),
            boost_targets: Some(boost_targets),
            bigram_keys_from_anchor: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Polarity,
    /// Softmax probability of the positive class.
    pub positive_probability: f64,
}

/// Nearest anchor row to `vector` by cosine (lowest row index on exact
/// ties); `None` when the vector has zero norm.
fn nearest_anchor_row<T: Scalar>(vector: &[T], anchor: &WordEmbeddings<T>) -> Option<usize> {
    let vn = dot(vector, vector).sqrt();
    if vn == T::zero() {
        return None;
    }
    let mut best: Option<(usize, T)> = None;
    for i in 0..anchor.vector_count() {
        let row = anchor.row(i);
        let rn = dot(row, row).sqrt();
        if rn == T::zero() {
            continue;
        }
        let c = dot(vector, row) / (vn * rn);
        match best {
            Some((_, b)) if c <= b => {}
            _ => best = Some((i, c)),
        }
    }
    best.map(|(i, _)| i)
}

/// Centroid of all vectors of all dictionary translations of `lemma` across
/// the provided spaces (homonym entries pooled).
fn dictionary_centroid<T: Scalar>(
    lemma: &str,
    dictionary: &TranslationDictionary,
    targets: &ProjectionTargets<'_, T>,
) -> Option<Vec<T>> {
    let dim = targets.dim()?;
    let mut acc = vec![T::zero(); dim];
    let mut count = 0usize;
    for lexeme in dictionary.lexemes.iter().filter(|l| l.lemma == lemma) {
        for mg in &lexeme.meaning_groups {
            for t in &mg.translations {
                for v in targets.resolve(&t.language, &t.lemma) {
                    for (a, &x) in acc.iter_mut().zip(v) {
                        *a += x;
                    }
                    count += 1;
                }
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

fn transfer_parts<T: Scalar>(
    lemmas: &[String],
    model: &SentimentModel<T>,
    source: &WordEmbeddings<T>,
    ctx: &TransferContext<'_, T>,
) -> Result<FeatureParts<T>> {
    let anchor = match ctx.mode {
        TransferMode::Direct => None,
        TransferMode::Substitute | TransferMode::Boost => Some(ctx.anchor.ok_or_else(|| {
            Error::InvalidArgument("substitute/boost transfer requires an anchor space".into())
        })?),
    };
    if ctx.mode == TransferMode::Boost && (ctx.dictionary.is_none() || ctx.boost_targets.is_none())
    {
        return Err(Error::InvalidArgument(
            "boost transfer requires a translation dictionary and resolved target spaces".into(),
        ));
    }
    if let Some(a) = anchor {
        if a.dim() != source.dim() {
            return Err(Error::Shape(
                "anchor and source spaces differ in dim".into(),
            ));
        }
    }

    let mut words = Vec::new();
    // bigram key per position (anchor keying replaces keys where a
    // substitution happened)
    let mut keys: Vec<&str> = lemmas.iter().map(String::as_str).collect();
    for (pos, lemma) in lemmas.iter().enumerate() {
        let source_vec = source.mean_vector(lemma);
        let unit = match ctx.mode {
            TransferMode::Direct => source_vec,
            TransferMode::Substitute | TransferMode::Boost => {
                let substituted = source_vec.as_ref().and_then(|v| {
                    let anchor = anchor.expect("validated above");
                    nearest_anchor_row(v, anchor).map(|row| {
                        if ctx.bigram_keys_from_anchor {
                            if let Some(l) = anchor_lemma_of_row(anchor, row) {
                                keys[pos] = l;
                            }
                        }
                        anchor.row(row).to_vec()
                    })
                });
                // a zero-norm source vector cannot be searched; fall back to
                // the source vector itself
                let substituted = substituted.or(source_vec);
                if ctx.mode == TransferMode::Boost {
                    let centroid = dictionary_centroid(
                        lemma,
                        ctx.dictionary.expect("validated above"),
                        ctx.boost_targets.expect("validated above"),
                    );
                    match (substituted, centroid) {
                        (Some(s), Some(c)) => {
                            let half = T::from_config(0.5);
                            Some(s.iter().zip(&c).map(|(&a, &b)| (a + b) * half).collect())
                        }
                        (Some(s), None) => Some(s),
                        (None, Some(c)) => Some(c),
                        (None, None) => None,
                    }
                } else {
                    substituted
                }
            }
        };
        if let Some(u) = unit {
            words.push(u);
        }
    }
    let buckets = keys
        .windows(2)
        .map(|pair| bigram_bucket(pair[0], pair[1], model.buckets))
        .collect();
    Ok(FeatureParts { words, buckets })
}

fn anchor_lemma_of_row<T: Scalar>(anchor: &WordEmbeddings<T>, row: usize) -> Option<&str> {
    anchor
        .iter()
        .find(|(_, _, idx)| idx.contains(&row))
        .map(|(_, lemma, _)| lemma)
}

/// Predict the sentiment of a lemma sequence.
pub fn predict<T: Scalar>(
    lemmas: &[String],
    model: &SentimentModel<T>,
    source: &WordEmbeddings<T>,
    ctx: &TransferContext<'_, T>,
) -> Result<Prediction> {
    if lemmas.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot classify an empty lemma list".into(),
        ));
    }
    if source.dim() != model.dim {
        return Err(Error::Shape(
            "source space dim does not match model dim".into(),
        ));
    }
    let parts = transfer_parts(lemmas, model, source, ctx)?;
    let feature = assemble_feature(model, &parts);
    let probs = softmax2(model.logits(&feature));
    let label = if probs[1] > probs[0] {
        Polarity::Positive
    } else {
        Polarity::Negative
    };
    Ok(Prediction {
        label,
        positive_probability: probs[1].to_f64().expect("probability converts to f64"),
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Evaluation {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// `confusion[gold][predicted]`, indexed negative = 0 / positive = 1.
    pub confusion: [[usize; 2]; 2],
}

/// Evaluate on labeled lemma sequences.
pub fn evaluate<T: Scalar>(
    test: &[(Vec<String>, Polarity)],
    model: &SentimentModel<T>,
    source: &WordEmbeddings<T>,
    ctx: &TransferContext<'_, T>,
) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("evaluation set is empty".into()));
    }
    let mut confusion = [[0usize; 2]; 2];
    for (lemmas, gold) in test {
        let p = predict(lemmas, model, source, ctx)?;
        confusion[gold.index()][p.label.index()] += 1;
    }
    let correct = confusion[0][0] + confusion[1][1];
    Ok(Evaluation {
        total: test.len(),
        correct,
        accuracy: correct as f64 / test.len() as f64,
        confusion,
    })
}

/// Labeled corpus in the `<label>\t<lemma lemma ...>` text format. Labels
/// outside {negative, positive} are dropped (binary task).
pub struct LabeledCorpus {
    pub examples: Vec<(Vec<String>, Polarity)>,
    pub dropped_labels: usize,
}

pub fn load_labeled_corpus(path: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let content = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
    let mut examples = Vec::new();
    let mut dropped = 0usize;
    for (i, raw) in content.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let (label, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(&pstr, i + 1, "expected `<label>\\t<lemmas>`"))?;
        let lemmas: Vec<String> = rest
            .split(' ')
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if lemmas.is_empty() {
            return Err(Error::format(&pstr, i + 1, "example has no lemmas"));
        }
        match Polarity::parse(label) {
            Some(p) => examples.push((lemmas, p)),
            None => dropped += 1,
        }
    }
    Ok(LabeledCorpus {
        examples,
        dropped_labels: dropped,
    })
}

fn put_f32s<T: Scalar>(out: &mut Vec<u8>, values: impl Iterator<Item = T>) {
    for v in values {
        out.extend_from_slice(&(v.to_f32().unwrap_or(f32::NAN)).to_le_bytes());
    }
}

/// Persist a model: `XLSM` magic, format version, dimensions, then all
/// tables as little-endian 32-bit floats.
pub fn save_model<T: Scalar>(model: &SentimentModel<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let mut bytes = Vec::with_capacity(16 + (model.buckets + 2) * model.dim * 4);
    bytes.extend_from_slice(MODEL_MAGIC);
    bytes.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(model.dim as u32).to_le_bytes());
    bytes.extend_from_slice(&(model.buckets as u64).to_le_bytes());
    bytes.extend_from_slice(&(model.trained_epochs as u32).to_le_bytes());
    put_f32s(&mut bytes, model.weights.data().iter().copied());
    put_f32s(&mut bytes, model.bias.iter().copied());
    put_f32s(&mut bytes, model.bigram_table.data().iter().copied());
    let mut f = fs::File::create(path).map_err(|e| Error::io(&pstr, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(&pstr, e))
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::ModelFormat(format!("truncated model file ({what})")))
}

fn read_f32s<T: Scalar>(r: &mut impl Read, count: usize, what: &str) -> Result<Vec<T>> {
    let mut bytes = vec![0u8; count * 4];
    read_exact(r, &mut bytes, what)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| {
            let v = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            T::from_f32(v).expect("f32 converts to any Scalar")
        })
        .collect())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<SentimentModel<T>> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let mut f = fs::File::open(path).map_err(|e| Error::io(&pstr, e))?;
    let mut magic = [0u8; 4];
    read_exact(&mut f, &mut magic, "magic")?;
    if &magic != MODEL_MAGIC {
        return Err(Error::ModelFormat(
            "bad magic bytes, not a sentiment model file".into(),
        ));
    }
    let mut u32buf = [0u8; 4];
    read_exact(&mut f, &mut u32buf, "version")?;
    let version = u32::from_le_bytes(u32buf);
    if version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported model format version {version} (expected {MODEL_VERSION})"
        )));
    }
    read_exact(&mut f, &mut u32buf, "dim")?;
    let dim = u32::from_le_bytes(u32buf) as usize;
    let mut u64buf = [0u8; 8];
    read_exact(&mut f, &mut u64buf, "buckets")?;
    let buckets = u64::from_le_bytes(u64buf) as usize;
    read_exact(&mut f, &mut u32buf, "trained_epochs")?;
    let trained_epochs = u32::from_le_bytes(u32buf) as usize;
    if dim == 0 || buckets == 0 || !buckets.is_power_of_two() {
        return Err(Error::ModelFormat("invalid header dimensions".into()));
    }
    let weights = Matrix::from_vec(2, dim, read_f32s(&mut f, 2 * dim, "weights")?)?;
    let bias_v: Vec<T> = read_f32s(&mut f, 2, "bias")?;
    let bigram_table = Matrix::from_vec(
        buckets,
        dim,
        read_f32s(&mut f, buckets * dim, "bigram table")?,
    )?;
    let mut trailing = [0u8; 1];
    if f.read(&mut trailing).map_err(|e| Error::io(&pstr, e))? != 0 {
        return Err(Error::ModelFormat(
            "trailing bytes after model payload".into(),
        ));
    }
    Ok(SentimentModel {
        dim,
        buckets,
        weights,
        bias: [bias_v[0], bias_v[1]],
        bigram_table,
        trained_epochs,
    })
}

/// Extract `(lemmas, label)` pairs from annotated treebank sentences.
pub fn labeled_from_sentences(
    sentences: &[crate::conllu::LemmaSentence],
) -> Vec<(Vec<String>, Polarity)> {
    sentences
        .iter()
        .filter_map(|s| s.sentiment_label.map(|l| (s.lemmas.clone(), l)))
        .collect()
}

/// Bundle of per-language spaces for boost lookups keyed by code.
pub type ResourceSpaces<'a, T> = BTreeMap<&'a str, &'a WordEmbeddings<T>>;
