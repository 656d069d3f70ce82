//! Word embeddings for one language: loading and saving the word2vec text
//! format, vocabulary normalization, lookup, and exact nearest-neighbor
//! queries.
//!
//! A lemma may own several vectors (e.g. after merging POS-tagged variants of
//! the same lemma); queries score such lemmas by their best vector.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Number of significant digits used when rendering vectors as text.
/// Enough for an exact `f32` round trip and a stable `f64` one.
pub const TEXT_SIG_DIGITS: usize = 9;

/// Dense word embeddings for one language.
///
/// Immutable after construction; all transformations return new values.
#[derive(Debug, Clone)]
pub struct WordEmbeddings<T> {
    language: String,
    dim: usize,
    entries: IndexMap<String, Vec<usize>>,
    matrix: Matrix<T>,
}

impl<T: Scalar> WordEmbeddings<T> {
    /// Build from `(lemma, vector)` rows in frequency order. Repeated lemmas
    /// accumulate multiple vectors under one entry.
    pub fn from_rows(
        language: impl Into<String>,
        dim: usize,
        rows: Vec<(String, Vec<T>)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Construction(
                "embedding dimension must be positive".into(),
            ));
        }
        if rows.is_empty() {
            return Err(Error::Construction(
                "embeddings must contain at least one vector".into(),
            ));
        }
        let mut entries: IndexMap<String, Vec<usize>> = IndexMap::new();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, (lemma, vector)) in rows.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(Error::Shape(format!(
                    "vector for lemma {lemma:?} has length {}, expected {dim}",
                    vector.len()
                )));
            }
            entries.entry(lemma).or_default().push(i);
            data.extend_from_slice(&vector);
        }
        let rows_n = data.len() / dim;
        Ok(WordEmbeddings {
            language: language.into(),
            dim,
            entries,
            matrix: Matrix::from_vec(rows_n, dim, data)?,
        })
    }

    pub(crate) fn from_parts(
        language: String,
        dim: usize,
        entries: IndexMap<String, Vec<usize>>,
        matrix: Matrix<T>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Construction(
                "embeddings must contain at least one lemma".into(),
            ));
        }
        if matrix.cols() != dim {
            return Err(Error::Shape("matrix width does not match dim".into()));
        }
        for (lemma, idx) in &entries {
            if idx.is_empty() {
                return Err(Error::Construction(format!(
                    "lemma {lemma:?} has no vectors"
                )));
            }
            if idx.iter().any(|&i| i >= matrix.rows()) {
                return Err(Error::Construction(format!(
                    "lemma {lemma:?} references a missing row"
                )));
            }
        }
        Ok(WordEmbeddings {
            language,
            dim,
            entries,
            matrix,
        })
    }

    /// Same vocabulary structure over a replacement matrix (row i of the new
    /// matrix still belongs to whatever lemma owned row i).
    pub(crate) fn with_matrix(&self, matrix: Matrix<T>) -> Result<Self> {
        if matrix.rows() != self.matrix.rows() {
            return Err(Error::Shape(format!(
                "replacement matrix has {} rows, expected {}",
                matrix.rows(),
                self.matrix.rows()
            )));
        }
        Ok(WordEmbeddings {
            language: self.language.clone(),
            dim: matrix.cols(),
            entries: self.entries.clone(),
            matrix,
        })
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct lemmas.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of stored vectors (matrix rows).
    pub fn vector_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.entries.contains_key(lemma)
    }

    /// Rank 0 is the most frequent lemma (first in file order).
    pub fn rank_of(&self, lemma: &str) -> Option<usize> {
        self.entries.get_index_of(lemma)
    }

    pub fn lemma_at(&self, rank: usize) -> Option<&str> {
        self.entries.get_index(rank).map(|(l, _)| l.as_str())
    }

    pub fn row_indices(&self, lemma: &str) -> Option<&[usize]> {
        self.entries.get(lemma).map(Vec::as_slice)
    }

    pub fn row(&self, index: usize) -> &[T] {
        self.matrix.row(index)
    }

    /// All vectors registered for `lemma`, in registration order. An empty
    /// list signals out-of-vocabulary.
    pub fn lookup(&self, lemma: &str) -> Vec<&[T]> {
        match self.entries.get(lemma) {
            Some(idx) => idx.iter().map(|&i| self.matrix.row(i)).collect(),
            None => Vec::new(),
        }
    }

    /// First registered vector, if the lemma is known.
    pub fn first_vector(&self, lemma: &str) -> Option<&[T]> {
        self.entries
            .get(lemma)
            .and_then(|idx| idx.first())
            .map(|&i| self.matrix.row(i))
    }

    /// Mean of all vectors registered for `lemma`.
    pub fn mean_vector(&self, lemma: &str) -> Option<Vec<T>> {
        let idx = self.entries.get(lemma)?;
        let mut acc = vec![T::zero(); self.dim];
        for &i in idx {
            for (a, &v) in acc.iter_mut().zip(self.matrix.row(i)) {
                *a += v;
            }
        }
        let n = T::from_config(idx.len() as f64);
        for a in &mut acc {
            *a /= n;
        }
        Some(acc)
    }

    /// Iterate `(rank, lemma, row indices)` in frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, &[usize])> {
        self.entries
            .iter()
            .enumerate()
            .map(|(r, (l, idx))| (r, l.as_str(), idx.as_slice()))
    }

    /// Restriction to the `limit` most frequent lemmas (all of them if
    /// `limit` exceeds the vocabulary).
    pub fn top_by_rank(&self, limit: usize) -> Result<Self> {
        let keep = limit.min(self.entries.len()).max(1);
        let mut rows = Vec::new();
        let mut entries: IndexMap<String, Vec<usize>> = IndexMap::new();
        for (lemma, idx) in self.entries.iter().take(keep) {
            let list = entries.entry(lemma.clone()).or_default();
            for &i in idx {
                list.push(rows.len());
                rows.push(i);
            }
        }
        let mut data = Vec::with_capacity(rows.len() * self.dim);
        for i in rows {
            data.extend_from_slice(self.matrix.row(i));
        }
        let n = data.len() / self.dim;
        WordEmbeddings::from_parts(
            self.language.clone(),
            self.dim,
            entries,
            Matrix::from_vec(n, self.dim, data)?,
        )
    }

    /// Apply a vocabulary normalization policy. Lemmas that collide after
    /// normalization merge their vector lists; the merged lemma keeps the
    /// best (smallest) frequency rank among its sources. Vectors are
    /// untouched.
    pub fn normalize_vocab(&self, policy: &NormalizationPolicy) -> Self {
        let mut entries: IndexMap<String, Vec<usize>> = IndexMap::new();
        for (lemma, idx) in &self.entries {
            let key = policy.apply(lemma);
            entries.entry(key).or_default().extend_from_slice(idx);
        }
        WordEmbeddings {
            language: self.language.clone(),
            dim: self.dim,
            entries,
            matrix: self.matrix.clone(),
        }
    }

    /// Exact top-k query over the vocabulary. Multi-vector lemmas score by
    /// their best vector; ties break by ascending frequency rank, then
    /// lemma order.
    pub fn nearest_neighbors(
        &self,
        query: &[T],
        k: usize,
        metric: Metric<'_, T>,
    ) -> Result<Vec<(String, T)>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if query.len() != self.dim {
            return Err(Error::Shape(format!(
                "query length {} does not match dim {}",
                query.len(),
                self.dim
            )));
        }
        let qn = dot(query, query).sqrt();
        if qn == T::zero() {
            return Err(Error::Degenerate("zero-norm query vector".into()));
        }
        let mut scored: Vec<(usize, &str, T)> = Vec::new();
        match metric {
            Metric::Cosine => {
                for (rank, lemma, idx) in self.iter() {
                    let mut best: Option<T> = None;
                    for &i in idx {
                        let row = self.matrix.row(i);
                        let rn = dot(row, row).sqrt();
                        if rn == T::zero() {
                            continue; // zero rows cannot be scored
                        }
                        let c = clamp_cos(dot(query, row) / (qn * rn));
                        best = Some(match best {
                            Some(b) => b.max(c),
                            None => c,
                        });
                    }
                    if let Some(b) = best {
                        scored.push((rank, lemma, b));
                    }
                }
            }
            Metric::Csls { k: csls_k, source } => {
                let scores = crate::align::csls_scores_by_rank(query, source, self, csls_k)?;
                for (rank, score) in scores.into_iter().enumerate() {
                    let lemma = self.lemma_at(rank).expect("rank within vocabulary");
                    scored.push((rank, lemma, score));
                }
            }
        }
        scored.sort_by(|a, b| {
            b.2.partial_cmp(&a.2)
                .expect("similarity scores are finite")
                .then_with(|| a.0.cmp(&b.0))
                .then_with(|| a.1.cmp(b.1))
        });
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(_, lemma, s)| (lemma.to_string(), s))
            .collect())
    }
}

/// Structural equality: language, dimension, lemma order, and per-lemma
/// vector sequences by value. Row numbering is a representation detail.
impl<T: Scalar> PartialEq for WordEmbeddings<T> {
    fn eq(&self, other: &Self) -> bool {
        self.language == other.language
            && self.dim == other.dim
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(other.entries.iter())
                .all(|((la, ia), (lb, ib))| {
                    la == lb
                        && ia.len() == ib.len()
                        && ia
                            .iter()
                            .zip(ib)
                            .all(|(&ra, &rb)| self.matrix.row(ra) == other.matrix.row(rb))
                })
    }
}

/// Similarity metric for [`WordEmbeddings::nearest_neighbors`].
///
/// CSLS needs the population the queries come from (the mapped source space)
/// to compute the reverse hubness penalty.
pub enum Metric<'a, T> {
    Cosine,
    Csls {
        k: usize,
        source: &'a WordEmbeddings<T>,
    },
}

/// String-level vocabulary normalization.
///
/// Application is idempotent: the POS suffix is stripped from the first
/// separator onward, so a second pass finds nothing left to remove.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct NormalizationPolicy {
    pub strip_compound_marker: bool,
    pub compound_marker: char,
    pub strip_pos_suffix: bool,
    pub pos_separator: char,
    pub lowercase: bool,
}

impl Default for NormalizationPolicy {
    fn default() -> Self {
        NormalizationPolicy {
            strip_compound_marker: false,
            compound_marker: '#',
            strip_pos_suffix: false,
            pos_separator: '_',
            lowercase: false,
        }
    }
}

impl NormalizationPolicy {
    /// Identity policy.
    pub fn none() -> Self {
        Self::default()
    }

    pub fn apply(&self, lemma: &str) -> String {
        let mut s: String = if self.strip_compound_marker {
            lemma
                .chars()
                .filter(|&c| c != self.compound_marker)
                .collect()
        } else {
            lemma.to_string()
        };
        if self.strip_pos_suffix {
            if let Some(pos) = s.find(self.pos_separator) {
                if pos > 0 {
                    s.truncate(pos);
                }
            }
        }
        if self.lowercase {
            s = s.to_lowercase();
        }
        s
    }
}

fn clamp_cos<T: Scalar>(c: T) -> T {
    c.min(T::one()).max(-T::one())
}

/// Cosine similarity. Errors on zero-norm input.
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "cosine over lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let na2 = dot(a, a);
    let nb2 = dot(b, b);
    if na2 == T::zero() || nb2 == T::zero() {
        return Err(Error::Degenerate("cosine of a zero-norm vector".into()));
    }
    Ok(clamp_cos(dot(a, b) / (na2 * nb2).sqrt()))
}

/// Render a float with [`TEXT_SIG_DIGITS`] significant digits, as a fixed
/// point of parse-then-format (required for byte-stable round trips).
pub fn format_float<T: Scalar>(x: T) -> String {
    let v = x.to_f64().expect("scalar converts to f64");
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", TEXT_SIG_DIGITS - 1, v);
    let epos = sci.find('e').expect("scientific format has an exponent");
    let exp: i32 = sci[epos + 1..].parse().expect("valid exponent");
    if !(-4..=12).contains(&exp) {
        return sci;
    }
    let decimals = (TEXT_SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    format!("{:.*}", decimals, v)
}

fn parse_float<T: Scalar>(s: &str) -> Option<T> {
    let v: f64 = s.parse().ok()?;
    if !v.is_finite() {
        return None;
    }
    T::from_f64(v)
}

/// Load embeddings from word2vec text format: a `<count> <dim>` header line
/// followed by `count` lines of `<token> <dim floats>`, single-space
/// separated. Duplicate tokens accumulate under one lemma. Token order
/// defines the frequency rank.
pub fn load_word2vec_text<T: Scalar>(
    path: impl AsRef<Path>,
    language: impl Into<String>,
) -> Result<WordEmbeddings<T>> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let content = fs::read(path).map_err(|e| Error::io(&pstr, e))?;
    let content = String::from_utf8(content)
        .map_err(|_| Error::format(&pstr, 0, "file is not valid UTF-8"))?;

    let mut lines = content.split('\n').enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(&pstr, 1, "empty file; expected `<count> <dim>` header"))?;
    let header = header.strip_suffix('\r').unwrap_or(header);
    let mut parts = header.split(' ');
    let count: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(&pstr, 1, "malformed header: expected `<count> <dim>`"))?;
    let dim: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(&pstr, 1, "malformed header: expected `<count> <dim>`"))?;
    if parts.next().is_some() {
        return Err(Error::format(&pstr, 1, "malformed header: trailing fields"));
    }
    if count == 0 || dim == 0 {
        return Err(Error::format(
            &pstr,
            1,
            "header must declare at least one vector and one dimension",
        ));
    }

    let mut rows: Vec<(String, Vec<T>)> = Vec::with_capacity(count);
    let mut seen = 0usize;
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue; // tolerate blank trailing lines
        }
        if seen == count {
            return Err(Error::format(
                &pstr,
                lineno,
                format!("found more than the {count} vector lines declared in the header"),
            ));
        }
        let mut fields = line.split(' ');
        let token = fields.next().unwrap_or("");
        if token.is_empty() {
            return Err(Error::format(&pstr, lineno, "empty token"));
        }
        let mut vector = Vec::with_capacity(dim);
        for f in fields {
            match parse_float::<T>(f) {
                Some(v) => vector.push(v),
                None => {
                    return Err(Error::format(
                        &pstr,
                        lineno,
                        format!("cannot parse {f:?} as a finite float"),
                    ))
                }
            }
        }
        if vector.len() != dim {
            return Err(Error::format(
                &pstr,
                lineno,
                format!("expected {dim} floats, found {}", vector.len()),
            ));
        }
        rows.push((token.to_string(), vector));
        seen += 1;
    }
    if seen != count {
        return Err(Error::format(
            &pstr,
            0,
            format!("header declared {count} vectors but file contains {seen}"),
        ));
    }
    WordEmbeddings::from_rows(language, dim, rows)
}

/// Save embeddings in word2vec text format (LF line endings, multi-vector
/// lemmas written as repeated lines). The output re-loads into a
/// structurally equal value.
pub fn save_word2vec_text<T: Scalar>(
    embeddings: &WordEmbeddings<T>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    if embeddings.is_empty() || embeddings.vector_count() == 0 {
        return Err(Error::Construction(
            "refusing to write empty embeddings".into(),
        ));
    }
    let file = fs::File::create(path).map_err(|e| Error::io(&pstr, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(&pstr, e);
    writeln!(w, "{} {}", embeddings.vector_count(), embeddings.dim()).map_err(io)?;
    for (_, lemma, idx) in embeddings.iter() {
        for &i in idx {
            w.write_all(lemma.as_bytes()).map_err(io)?;
            for v in embeddings.row(i) {
                w.write_all(b" ").map_err(io)?;
                w.write_all(format_float(*v).as_bytes()).map_err(io)?;
            }
            w.write_all(b"\n").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}
