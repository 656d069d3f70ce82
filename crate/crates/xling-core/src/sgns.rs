//! Skip-gram-with-negative-sampling fine-tuning of projected embeddings on
//! small lemmatized corpora.
//!
//! The input-vector table is initialized from the embeddings (multi-vector
//! entries collapsed to their mean; SGNS trains one vector per lemma), the
//! context table starts at zero, and negatives are drawn from the corpus
//! unigram distribution raised to `unigram_power`. Everything is driven by
//! one seeded RNG, consumed in a fixed order: OOV initializations first,
//! then per epoch a sentence shuffle followed by the negative draws.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::conllu::LemmaSentence;
use crate::embeddings::WordEmbeddings;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Learning-rate floor the linear decay runs down to (capped at the initial
/// rate, so a zero rate stays zero).
pub const FINAL_LEARNING_RATE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SkipGramConfig {
    /// Symmetric context window (fixed width, not sampled).
    pub window: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    /// Linearly decayed to [`FINAL_LEARNING_RATE`] over all updates.
    pub initial_learning_rate: f64,
    /// Corpus lemmas below this count are dropped from training.
    pub min_count: usize,
    /// Exponent on unigram counts for the negative-sampling distribution.
    pub unigram_power: f64,
    pub rng_seed: u64,
    /// Admit corpus lemmas that are missing from the embeddings (random
    /// initialization in [-0.5/dim, 0.5/dim]).
    pub admit_oov: bool,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            window: 5,
            negative_samples: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            min_count: 1,
            unigram_power: 0.75,
            rng_seed: 0,
            admit_oov: true,
        }
    }
}

impl SkipGramConfig {
    fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        if self.initial_learning_rate < 0.0 || !self.initial_learning_rate.is_finite() {
            return Err(Error::InvalidArgument(
                "learning rate must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Fine-tuned embeddings plus training bookkeeping.
#[derive(Debug, Clone)]
pub struct FinetuneOutcome<T> {
    pub embeddings: WordEmbeddings<T>,
    /// Mean loss per (center, context) pair, one entry per epoch.
    pub epoch_mean_loss: Vec<f64>,
    pub admitted_oov: usize,
    /// Corpus tokens dropped for being below `min_count` or out of
    /// vocabulary with OOV admission disabled.
    pub dropped_tokens: usize,
}

/// Loss of one SGNS tuple:
/// `-ln s(u.v) - sum_i ln s(-u.n_i)` with `s` the logistic function.
pub fn sgns_tuple_loss<T: Scalar>(center: &[T], context: &[T], negatives: &[&[T]]) -> T {
    let mut loss = -log_sigmoid(dot_s(center, context));
    for n in negatives {
        loss -= log_sigmoid(-dot_s(center, n));
    }
    loss
}

/// Analytic gradients of [`sgns_tuple_loss`] with respect to every vector.
pub struct SgnsTupleGrads<T> {
    pub center: Vec<T>,
    pub context: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

pub fn sgns_tuple_gradients<T: Scalar>(
    center: &[T],
    context: &[T],
    negatives: &[&[T]],
) -> SgnsTupleGrads<T> {
    let g_pos = sigmoid(dot_s(center, context)) - T::one();
    let mut d_center: Vec<T> = context.iter().map(|&v| g_pos * v).collect();
    let d_context: Vec<T> = center.iter().map(|&u| g_pos * u).collect();
    let mut d_negatives = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g_neg = sigmoid(dot_s(center, n));
        for (dc, &nv) in d_center.iter_mut().zip(*n) {
            *dc += g_neg * nv;
        }
        d_negatives.push(center.iter().map(|&u| g_neg * u).collect());
    }
    SgnsTupleGrads {
        center: d_center,
        context: d_context,
        negatives: d_negatives,
    }
}

fn dot_s<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn log_sigmoid<T: Scalar>(x: T) -> T {
    // numerically stable: -ln(1 + e^-x) for x >= 0, x - ln(1 + e^x) otherwise
    if x >= T::zero() {
        -(T::one() + (-x).exp()).ln()
    } else {
        x - (T::one() + x.exp()).ln()
    }
}

/// Cumulative unigram^power table; draws cost one `f64` from the RNG.
struct NegativeTable {
    cumulative: Vec<f64>,
    total: f64,
    distinct: usize,
}

impl NegativeTable {
    fn new(counts: &[usize], power: f64) -> Self {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut total = 0.0f64;
        let mut distinct = 0usize;
        for &c in counts {
            if c > 0 {
                total += (c as f64).powf(power);
                distinct += 1;
            }
            cumulative.push(total);
        }
        NegativeTable {
            cumulative,
            total,
            distinct,
        }
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> usize {
        let r = rng.random::<f64>() * self.total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

/// Fine-tune `embeddings` on `corpus` with skip-gram negative sampling.
/// Deterministic given `config.rng_seed`; with 0 epochs (or a 0 learning
/// rate) the output equals the collapsed input table exactly.
pub fn skipgram_finetune<T: Scalar>(
    embeddings: &WordEmbeddings<T>,
    corpus: &[LemmaSentence],
    config: &SkipGramConfig,
) -> Result<FinetuneOutcome<T>> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::Training("fine-tuning corpus is empty".into()));
    }
    let dim = embeddings.dim();
    let mut rng = ChaCha20Rng::seed_from_u64(config.rng_seed);

    // corpus counts in first-occurrence order
    let mut counts: IndexMap<&str, usize> = IndexMap::new();
    for sentence in corpus {
        for lemma in &sentence.lemmas {
            *counts.entry(lemma.as_str()).or_default() += 1;
        }
    }

    // vocabulary: every embedding lemma (original rank order), then admitted
    // OOV lemmas in corpus order
    let mut vocab: IndexMap<String, usize> = IndexMap::new(); // lemma -> vocab id
    for (_, lemma, _) in embeddings.iter() {
        vocab.insert(lemma.to_string(), vocab.len());
    }
    let mut admitted_oov = 0usize;
    if config.admit_oov {
        for (&lemma, &count) in &counts {
            if count >= config.min_count.max(1) && !vocab.contains_key(lemma) {
                vocab.insert(lemma.to_string(), vocab.len());
                admitted_oov += 1;
            }
        }
    }
    let vocab_size = vocab.len();

    // input table: collapsed means, then seeded uniform init for OOV
    let mut input: Vec<T> = Vec::with_capacity(vocab_size * dim);
    for (_, lemma, _) in embeddings.iter() {
        input.extend(
            embeddings
                .mean_vector(lemma)
                .expect("lemma is in vocabulary"),
        );
    }
    let inv_dim = 1.0 / dim as f64;
    for _ in embeddings.len()..vocab_size {
        for _ in 0..dim {
            input.push(T::from_config((rng.random::<f64>() - 0.5) * inv_dim));
        }
    }
    let mut context: Vec<T> = vec![T::zero(); vocab_size * dim];

    // encode sentences, dropping untrainable tokens
    let mut dropped_tokens = 0usize;
    let mut sentences: Vec<Vec<usize>> = Vec::new();
    for sentence in corpus {
        let mut ids = Vec::with_capacity(sentence.lemmas.len());
        for lemma in &sentence.lemmas {
            let trainable = counts[lemma.as_str()] >= config.min_count.max(1);
            match vocab.get_index_of(lemma.as_str()) {
                Some(id) if trainable => ids.push(id),
                _ => dropped_tokens += 1,
            }
        }
        if !ids.is_empty() {
            sentences.push(ids);
        }
    }

    // negative-sampling distribution over corpus counts (vocab id order)
    let mut vocab_counts = vec![0usize; vocab_size];
    for sentence in &sentences {
        for &id in sentence {
            vocab_counts[id] += 1;
        }
    }
    let table = NegativeTable::new(&vocab_counts, config.unigram_power);

    let total_positions: usize = config.epochs * sentences.iter().map(Vec::len).sum::<usize>();
    let lr_start = config.initial_learning_rate;
    let lr_end = FINAL_LEARNING_RATE.min(lr_start);
    let mut position = 0usize;

    let mut epoch_mean_loss = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    for _epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        let mut pair_count = 0usize;
        for &si in &order {
            let sentence = &sentences[si];
            for c in 0..sentence.len() {
                let progress = position as f64 / total_positions.max(1) as f64;
                let lr = T::from_config(lr_start + (lr_end - lr_start) * progress);
                position += 1;
                let center = sentence[c];
                let lo = c.saturating_sub(config.window);
                let hi = (c + config.window).min(sentence.len() - 1);
                for j in lo..=hi {
                    if j == c {
                        continue;
                    }
                    let target = sentence[j];
                    pair_count += 1;
                    let mut neu1e = vec![T::zero(); dim];
                    // positive then negatives, word2vec update order
                    for sample in 0..=config.negative_samples {
                        let (out_id, label) = if sample == 0 {
                            (target, T::one())
                        } else {
                            if table.distinct <= 1 {
                                break; // nothing to sample but the positive
                            }
                            let mut neg = table.sample(&mut rng);
                            while neg == target {
                                neg = table.sample(&mut rng);
                            }
                            (neg, T::zero())
                        };
                        let in_row = &input[center * dim..(center + 1) * dim];
                        let out_row = &mut context[out_id * dim..(out_id + 1) * dim];
                        let f = dot_s(in_row, out_row);
                        let s = sigmoid(f);
                        let g = (label - s) * lr;
                        loss_sum += if label == T::one() {
                            (-log_sigmoid(f)).to_f64().unwrap_or(f64::NAN)
                        } else {
                            (-log_sigmoid(-f)).to_f64().unwrap_or(f64::NAN)
                        };
                        for (e, &o) in neu1e.iter_mut().zip(out_row.iter()) {
                            *e += g * o;
                        }
                        for (o, &i_v) in out_row.iter_mut().zip(in_row.iter()) {
                            *o += g * i_v;
                        }
                    }
                    let in_row = &mut input[center * dim..(center + 1) * dim];
                    for (i_v, &e) in in_row.iter_mut().zip(&neu1e) {
                        *i_v += e;
                    }
                }
            }
        }
        epoch_mean_loss.push(if pair_count == 0 {
            0.0
        } else {
            loss_sum / pair_count as f64
        });
    }

    let rows: Vec<(String, Vec<T>)> = vocab
        .keys()
        .enumerate()
        .map(|(id, lemma)| (lemma.clone(), input[id * dim..(id + 1) * dim].to_vec()))
        .collect();
    let out = WordEmbeddings::from_rows(embeddings.language(), dim, rows)?;
    Ok(FinetuneOutcome {
        embeddings: out,
        epoch_mean_loss,
        admitted_oov,
        dropped_tokens,
    })
}
