//! Supervised alignment of one embedding space to another: orthogonal
//! Procrustes on a seed lexicon, CSLS similarity with hubness correction,
//! mutual-nearest-neighbor lexicon induction, and iterative refinement.
//!
//! Conventions: vectors are rows, and the mapping `W` is applied on the
//! right (`aligned = rows * W`), so for `Y = X * Q` the recovered mapping
//! equals `Q`. The target space is never modified.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::embeddings::WordEmbeddings;
use crate::error::{Error, Result};
use crate::linalg::{dot, svd_square, Matrix};
use crate::scalar::Scalar;

/// Paired (source lemma, target lemma) supervision for a Procrustes solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLexicon {
    pub pairs: Vec<(String, String)>,
    pub source_language: String,
    pub target_language: String,
}

impl SeedLexicon {
    pub fn new(
        pairs: Vec<(String, String)>,
        source_language: impl Into<String>,
        target_language: impl Into<String>,
    ) -> Self {
        let mut seen = HashSet::new();
        let pairs = pairs
            .into_iter()
            .filter(|p| seen.insert(p.clone()))
            .collect();
        SeedLexicon {
            pairs,
            source_language: source_language.into(),
            target_language: target_language.into(),
        }
    }

    /// Load from the MUSE bilingual dictionary format: one pair per line,
    /// source and target lemma separated by a single space or tab. Lines
    /// starting with `#` and blank lines are ignored; exact duplicates are
    /// dropped.
    pub fn from_file(
        path: impl AsRef<Path>,
        source_language: impl Into<String>,
        target_language: impl Into<String>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let pstr = path.display().to_string();
        let content = fs::read_to_string(path).map_err(|e| Error::io(&pstr, e))?;
        let mut pairs = Vec::new();
        for (i, raw) in content.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.splitn(2, [' ', '\t']);
            let src = fields.next().unwrap_or("");
            let tgt = fields.next().unwrap_or("");
            if src.is_empty() || tgt.is_empty() || tgt.contains([' ', '\t']) {
                return Err(Error::format(
                    &pstr,
                    i + 1,
                    "expected exactly two lemmas separated by a single space or tab",
                ));
            }
            pairs.push((src.to_string(), tgt.to_string()));
        }
        Ok(SeedLexicon::new(pairs, source_language, target_language))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Settings for CSLS-based iterative refinement.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RefinementConfig {
    /// Refinement iterations after the seed solve (may be 0).
    pub iterations: usize,
    /// Neighborhood size for the CSLS hubness penalties.
    pub csls_k: usize,
    /// Induction considers only this many most-frequent lemmas per side.
    pub induction_vocab_limit: usize,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        RefinementConfig {
            iterations: 20,
            csls_k: 10,
            induction_vocab_limit: 20_000,
        }
    }
}

impl RefinementConfig {
    /// Defaults for aligning resource-rich spaces to the anchor.
    pub fn resource_rich() -> Self {
        Self::default()
    }

    /// Defaults for re-aligning a constructed endangered-language space.
    pub fn endangered() -> Self {
        RefinementConfig {
            iterations: 5,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.csls_k == 0 {
            return Err(Error::InvalidArgument("csls_k must be at least 1".into()));
        }
        if self.induction_vocab_limit == 0 {
            return Err(Error::InvalidArgument(
                "induction_vocab_limit must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a supervised alignment: the orthogonal mapping plus refinement
/// metadata.
#[derive(Debug, Clone)]
pub struct AlignmentResult<T> {
    /// `d x d` orthogonal matrix, applied as `rows * mapping`.
    pub mapping: Matrix<T>,
    pub iterations_run: usize,
    pub induced_lexicon_size_per_iteration: Vec<usize>,
}

/// Orthogonal matrix `W` minimizing `||source * W - target||_F`, via the SVD
/// of the cross-covariance `source^T * target`. Rows of the two matrices are
/// paired observations.
pub fn procrustes<T: Scalar>(source: &Matrix<T>, target: &Matrix<T>) -> Result<Matrix<T>> {
    if source.rows() != target.rows() || source.cols() != target.cols() {
        return Err(Error::Shape(format!(
            "procrustes inputs must be paired: {}x{} vs {}x{}",
            source.rows(),
            source.cols(),
            target.rows(),
            target.cols()
        )));
    }
    if source.rows() == 0 {
        return Err(Error::InsufficientData(
            "procrustes needs at least one paired row".into(),
        ));
    }
    let m = source.transpose().matmul(target)?;
    let svd = svd_square(&m)?;
    let w = svd.u.matmul(&svd.v.transpose())?;
    check_orthogonal(&w)?;
    Ok(w)
}

fn check_orthogonal<T: Scalar>(w: &Matrix<T>) -> Result<()> {
    let d = w.rows();
    let mut wtw = w.transpose().matmul(w)?;
    for i in 0..d {
        let v = wtw.get(i, i) - T::one();
        wtw.set(i, i, v);
    }
    let dev = wtw.max_abs();
    if dev >= T::from_config(1e-6) {
        return Err(Error::Numerical(format!(
            "mapping failed the orthogonality check: {dev}"
        )));
    }
    Ok(())
}

struct VectorView<'a, T> {
    rows: Vec<&'a [T]>,
    norms: Vec<T>,
    /// lemma index owning each vector
    owner: Vec<usize>,
    lemmas: Vec<&'a str>,
}

fn collect_vectors<'a, T: Scalar>(e: &'a WordEmbeddings<T>) -> Result<VectorView<'a, T>> {
    let mut rows = Vec::with_capacity(e.vector_count());
    let mut norms = Vec::with_capacity(e.vector_count());
    let mut owner = Vec::with_capacity(e.vector_count());
    let mut lemmas = Vec::with_capacity(e.len());
    for (rank, lemma, idx) in e.iter() {
        lemmas.push(lemma);
        for &i in idx {
            let row = e.row(i);
            let n = dot(row, row).sqrt();
            if n == T::zero() {
                return Err(Error::Degenerate(format!(
                    "zero-norm vector for lemma {lemma:?} in {}",
                    e.language()
                )));
            }
            rows.push(row);
            norms.push(n);
            owner.push(rank);
        }
    }
    Ok(VectorView {
        rows,
        norms,
        owner,
        lemmas,
    })
}

/// Mean of the k largest values (k capped at the slice length).
fn topk_mean<T: Scalar>(vals: &mut [T], k: usize) -> T {
    let k = k.min(vals.len());
    if k == 0 {
        return T::zero();
    }
    if k < vals.len() {
        vals.select_nth_unstable_by(k - 1, |a, b| b.partial_cmp(a).expect("finite scores"));
    }
    vals[..k].iter().copied().sum::<T>() / T::from_config(k as f64)
}

fn cos_row<T: Scalar>(query: &[T], qn: T, view: &VectorView<'_, T>) -> Vec<T> {
    view.rows
        .iter()
        .zip(&view.norms)
        .map(|(row, &n)| dot(query, row) / (qn * n))
        .collect()
}

/// Hubness penalty of every vector in `of` against the vectors of `other`:
/// mean cosine to its k nearest vectors there.
fn hub_penalties<T: Scalar>(of: &VectorView<'_, T>, other: &VectorView<'_, T>, k: usize) -> Vec<T> {
    of.rows
        .iter()
        .zip(&of.norms)
        .map(|(row, &n)| {
            let mut cs = cos_row(row, n, other);
            topk_mean(&mut cs, k)
        })
        .collect()
}

/// CSLS score of `query` (already mapped into the target coordinate system)
/// against every target lemma, in target frequency-rank order. Multi-vector
/// lemmas score by their best vector.
pub fn csls_scores_by_rank<T: Scalar>(
    query: &[T],
    mapped_source: &WordEmbeddings<T>,
    target: &WordEmbeddings<T>,
    k: usize,
) -> Result<Vec<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("csls k must be at least 1".into()));
    }
    if mapped_source.dim() != target.dim() || query.len() != target.dim() {
        return Err(Error::Shape("csls requires equal dimensions".into()));
    }
    let qn = dot(query, query).sqrt();
    if qn == T::zero() {
        return Err(Error::Degenerate("zero-norm query vector".into()));
    }
    let src = collect_vectors(mapped_source)?;
    let tgt = collect_vectors(target)?;
    // penalty of each target vector w.r.t. the mapped source population
    let r_tgt = hub_penalties(&tgt, &src, k);
    // penalty of the query w.r.t. the target population
    let mut qcos = cos_row(query, qn, &tgt);
    let r_query = topk_mean(&mut qcos.clone(), k);
    let two = T::one() + T::one();
    let mut best = vec![T::neg_infinity(); target.len()];
    for (j, c) in qcos.iter_mut().enumerate() {
        let s = two * *c - r_query - r_tgt[j];
        let lemma = tgt.owner[j];
        if s > best[lemma] {
            best[lemma] = s;
        }
    }
    Ok(best)
}

/// CSLS score of `query` against every target lemma, labeled.
pub fn csls_scores<T: Scalar>(
    query: &[T],
    mapped_source: &WordEmbeddings<T>,
    target: &WordEmbeddings<T>,
    k: usize,
) -> Result<Vec<(String, T)>> {
    let by_rank = csls_scores_by_rank(query, mapped_source, target, k)?;
    Ok(by_rank
        .into_iter()
        .enumerate()
        .map(|(rank, s)| (target.lemma_at(rank).expect("rank in range").to_string(), s))
        .collect())
}

/// Candidate choice with the shared tie rule: higher score, then lower rank,
/// then lexicographically smaller lemma.
fn better<T: Scalar>(
    best: &Option<(usize, T)>,
    cand_rank: usize,
    cand_score: T,
    lemmas: &[&str],
) -> bool {
    match best {
        None => true,
        Some((brank, bscore)) => match cand_score.partial_cmp(bscore).expect("finite scores") {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => {
                cand_rank < *brank || (cand_rank == *brank && lemmas[cand_rank] < lemmas[*brank])
            }
        },
    }
}

/// Induce a lexicon of mutual CSLS nearest neighbors between the
/// `induction_vocab_limit` most frequent lemmas of each space.
/// `mapped_source` must already be transformed by the current mapping.
/// Pairs come back ordered by source frequency rank; the result may be
/// empty.
pub fn induce_lexicon<T: Scalar>(
    mapped_source: &WordEmbeddings<T>,
    target: &WordEmbeddings<T>,
    config: &RefinementConfig,
) -> Result<SeedLexicon> {
    config.validate()?;
    if mapped_source.dim() != target.dim() {
        return Err(Error::Shape("induction requires equal dimensions".into()));
    }
    let src_e = mapped_source.top_by_rank(config.induction_vocab_limit)?;
    let tgt_e = target.top_by_rank(config.induction_vocab_limit)?;
    let src = collect_vectors(&src_e)?;
    let tgt = collect_vectors(&tgt_e)?;
    let k = config.csls_k;
    let two = T::one() + T::one();

    // per-vector hubness penalties in both directions
    let r_src = hub_penalties(&src, &tgt, k);
    let r_tgt = hub_penalties(&tgt, &src, k);

    // forward: best target lemma per source lemma
    let mut forward: Vec<Option<(usize, T)>> = vec![None; src.lemmas.len()];
    // reverse: best source lemma per target lemma
    let mut reverse: Vec<Option<(usize, T)>> = vec![None; tgt.lemmas.len()];

    let mut lemma_best: Vec<T> = vec![T::neg_infinity(); tgt.lemmas.len()];
    for (i, (row, &n)) in src.rows.iter().zip(&src.norms).enumerate() {
        let cs = cos_row(row, n, &tgt);
        for x in &mut lemma_best {
            *x = T::neg_infinity();
        }
        for (j, &c) in cs.iter().enumerate() {
            let s = two * c - r_src[i] - r_tgt[j];
            let t_lemma = tgt.owner[j];
            if s > lemma_best[t_lemma] {
                lemma_best[t_lemma] = s;
            }
            // reverse side shares the same symmetric score matrix
            let s_lemma = src.owner[i];
            if better(&reverse[t_lemma], s_lemma, s, &src.lemmas) {
                reverse[t_lemma] = Some((s_lemma, s));
            }
        }
        let s_lemma = src.owner[i];
        for (t_lemma, &score) in lemma_best.iter().enumerate() {
            if score > T::neg_infinity() && better(&forward[s_lemma], t_lemma, score, &tgt.lemmas) {
                forward[s_lemma] = Some((t_lemma, score));
            }
        }
    }

    let mut pairs = Vec::new();
    for (s_lemma, fwd) in forward.iter().enumerate() {
        if let Some((t_lemma, _)) = fwd {
            if let Some((back, _)) = reverse[*t_lemma] {
                if back == s_lemma {
                    pairs.push((
                        src.lemmas[s_lemma].to_string(),
                        tgt.lemmas[*t_lemma].to_string(),
                    ));
                }
            }
        }
    }
    Ok(SeedLexicon {
        pairs,
        source_language: mapped_source.language().to_string(),
        target_language: target.language().to_string(),
    })
}

/// Resolve lexicon pairs to paired rows (first registered vector on each
/// side). Unresolvable pairs are dropped; the count is returned.
fn resolve_pairs<T: Scalar>(
    lexicon: &SeedLexicon,
    source: &WordEmbeddings<T>,
    target: &WordEmbeddings<T>,
) -> Result<(Matrix<T>, Matrix<T>, usize)> {
    let mut src_rows: Vec<Vec<T>> = Vec::new();
    let mut tgt_rows: Vec<Vec<T>> = Vec::new();
    let mut dropped = 0usize;
    for (s, t) in &lexicon.pairs {
        match (source.first_vector(s), target.first_vector(t)) {
            (Some(sv), Some(tv)) => {
                src_rows.push(sv.to_vec());
                tgt_rows.push(tv.to_vec());
            }
            _ => dropped += 1,
        }
    }
    Ok((
        Matrix::from_rows(&src_rows)?,
        Matrix::from_rows(&tgt_rows)?,
        dropped,
    ))
}

/// Supervised alignment: Procrustes on the seed lexicon, then the configured
/// number of CSLS refinement iterations, each re-inducing a lexicon and
/// re-solving. Runs exactly `config.iterations` refinements (no convergence
/// test).
pub fn align_supervised<T: Scalar>(
    source: &WordEmbeddings<T>,
    target: &WordEmbeddings<T>,
    seed: &SeedLexicon,
    config: &RefinementConfig,
) -> Result<AlignmentResult<T>> {
    config.validate()?;
    if source.dim() != target.dim() {
        return Err(Error::Shape(format!(
            "cannot align dim {} onto dim {}",
            source.dim(),
            target.dim()
        )));
    }
    if seed.is_empty() {
        return Err(Error::Alignment("seed lexicon is empty".into()));
    }
    let (src_rows, tgt_rows, dropped) = resolve_pairs(seed, source, target)?;
    if src_rows.rows() == 0 {
        return Err(Error::Alignment(
            "no seed pair resolves in both vocabularies".into(),
        ));
    }
    if dropped > 0 {
        log::warn!(
            "alignment {}->{}: dropped {dropped} of {} seed pairs not found in both vocabularies",
            source.language(),
            target.language(),
            seed.len()
        );
    }
    let mut mapping = procrustes(&src_rows, &tgt_rows)?;
    let mut induced_sizes = Vec::with_capacity(config.iterations);
    if config.iterations > 0 {
        let src_top = source.top_by_rank(config.induction_vocab_limit)?;
        let tgt_top = target.top_by_rank(config.induction_vocab_limit)?;
        for _ in 0..config.iterations {
            let mapped = src_top.with_matrix(src_top.matrix().matmul(&mapping)?)?;
            let lexicon = induce_lexicon(&mapped, &tgt_top, config)?;
            induced_sizes.push(lexicon.len());
            if lexicon.is_empty() {
                continue; // keep the current mapping
            }
            let (s, t, _) = resolve_pairs(&lexicon, source, target)?;
            if s.rows() == 0 {
                continue;
            }
            mapping = procrustes(&s, &t)?;
        }
    }
    Ok(AlignmentResult {
        mapping,
        iterations_run: config.iterations,
        induced_lexicon_size_per_iteration: induced_sizes,
    })
}

/// Apply an alignment: every vector row is replaced by `row * W`; the
/// vocabulary structure is untouched.
pub fn apply_alignment<T: Scalar>(
    embeddings: &WordEmbeddings<T>,
    result: &AlignmentResult<T>,
) -> Result<WordEmbeddings<T>> {
    if result.mapping.rows() != embeddings.dim() {
        return Err(Error::Shape(format!(
            "mapping is {}x{} but embeddings have dim {}",
            result.mapping.rows(),
            result.mapping.cols(),
            embeddings.dim()
        )));
    }
    embeddings.with_matrix(embeddings.matrix().matmul(&result.mapping)?)
}
