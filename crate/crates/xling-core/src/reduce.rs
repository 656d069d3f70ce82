//! Dimensionality reduction to a common size: mean-centering with removal of
//! the top principal components (post-processing), then a PCA projection,
//! then the same post-processing again.

use crate::embeddings::WordEmbeddings;
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ReductionConfig {
    /// Common dimensionality all spaces are brought to.
    pub target_dim: usize,
    /// Number of top principal components removed before and after the PCA
    /// projection.
    pub ppa_components: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            target_dim: 100,
            ppa_components: 7,
        }
    }
}

/// Principal components of a data matrix (computed from the covariance of
/// the mean-centered rows).
#[derive(Debug, Clone)]
pub struct Pca<T> {
    pub mean: Vec<T>,
    /// `d x k`, one principal direction per column, by decreasing variance.
    /// Sign convention: each column's entry of largest magnitude is positive.
    pub components: Matrix<T>,
    /// Variance along each kept component, non-increasing.
    pub variances: Vec<T>,
}

fn column_means<T: Scalar>(m: &Matrix<T>) -> Vec<T> {
    let n = T::from_config(m.rows() as f64);
    let mut mean = vec![T::zero(); m.cols()];
    for i in 0..m.rows() {
        for (a, &v) in mean.iter_mut().zip(m.row(i)) {
            *a += v;
        }
    }
    for a in &mut mean {
        *a /= n;
    }
    mean
}

fn centered<T: Scalar>(m: &Matrix<T>, mean: &[T]) -> Matrix<T> {
    let mut out = m.clone();
    for i in 0..out.rows() {
        for (v, &mu) in out.row_mut(i).iter_mut().zip(mean) {
            *v -= mu;
        }
    }
    out
}

fn covariance<T: Scalar>(centered: &Matrix<T>) -> Matrix<T> {
    let n = centered.rows();
    let d = centered.cols();
    let mut cov = Matrix::zeros(d, d);
    for r in 0..n {
        let row = centered.row(r);
        for i in 0..d {
            let ri = row[i];
            let dst = cov.row_mut(i);
            for j in i..d {
                dst[j] += ri * row[j];
            }
        }
    }
    let scale = T::one() / T::from_config((n - 1) as f64);
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) * scale;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    cov
}

fn fix_signs<T: Scalar>(components: &mut Matrix<T>) {
    for c in 0..components.cols() {
        let mut best = 0usize;
        let mut best_abs = T::zero();
        for r in 0..components.rows() {
            let a = components.get(r, c).abs();
            if a > best_abs {
                best_abs = a;
                best = r;
            }
        }
        if components.get(best, c) < T::zero() {
            for r in 0..components.rows() {
                let v = -components.get(r, c);
                components.set(r, c, v);
            }
        }
    }
}

/// Fit the top `k` principal components of `matrix`.
pub fn pca_fit<T: Scalar>(matrix: &Matrix<T>, k: usize) -> Result<Pca<T>> {
    if matrix.rows() < 2 {
        return Err(Error::InsufficientData("PCA needs at least 2 rows".into()));
    }
    if k == 0 || k > matrix.cols() {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {k} components of a {}-dimensional space",
            matrix.cols()
        )));
    }
    let mean = column_means(matrix);
    let x = centered(matrix, &mean);
    let cov = covariance(&x);
    let (values, vectors) = sym_eigen(&cov)?;
    let d = matrix.cols();
    let mut components = Matrix::zeros(d, k);
    for c in 0..k {
        for r in 0..d {
            components.set(r, c, vectors.get(r, c));
        }
    }
    fix_signs(&mut components);
    Ok(Pca {
        mean,
        components,
        variances: values[..k].to_vec(),
    })
}

/// Project rows onto the fitted components: `(rows - mean) * components`.
pub fn pca_transform<T: Scalar>(pca: &Pca<T>, matrix: &Matrix<T>) -> Result<Matrix<T>> {
    if matrix.cols() != pca.components.rows() {
        return Err(Error::Shape(format!(
            "matrix has dim {} but PCA was fitted on dim {}",
            matrix.cols(),
            pca.components.rows()
        )));
    }
    centered(matrix, &pca.mean).matmul(&pca.components)
}

/// Post-processing step: mean-center the rows, then remove their projections
/// onto the top `d_components` principal directions of the centered data.
/// With `d_components = 0` this is plain mean-centering.
pub fn post_process<T: Scalar>(matrix: &Matrix<T>, d_components: usize) -> Result<Matrix<T>> {
    let n = matrix.rows();
    if n < 2 || n <= d_components {
        return Err(Error::InsufficientData(format!(
            "post-processing with D={d_components} needs more than {} rows",
            n.max(1)
        )));
    }
    let mean = column_means(matrix);
    let mut x = centered(matrix, &mean);
    if d_components == 0 {
        return Ok(x);
    }
    let cov = covariance(&x);
    let (_, vectors) = sym_eigen(&cov)?;
    for i in 0..x.rows() {
        let row = x.row_mut(i);
        for c in 0..d_components {
            let mut proj = T::zero();
            for (r, v) in row.iter().enumerate() {
                proj += *v * vectors.get(r, c);
            }
            for (r, v) in row.iter_mut().enumerate() {
                *v -= proj * vectors.get(r, c);
            }
        }
    }
    Ok(x)
}

/// Reduce an embedding space to `config.target_dim` dimensions. A space that
/// already has the target dimensionality is returned unchanged. The
/// vocabulary and multi-vector structure are never touched.
pub fn reduce<T: Scalar>(
    embeddings: &WordEmbeddings<T>,
    config: &ReductionConfig,
) -> Result<WordEmbeddings<T>> {
    if config.target_dim == 0 {
        return Err(Error::InvalidArgument("target_dim must be positive".into()));
    }
    if config.ppa_components >= config.target_dim {
        return Err(Error::InvalidArgument(format!(
            "ppa_components ({}) must be smaller than target_dim ({})",
            config.ppa_components, config.target_dim
        )));
    }
    if embeddings.dim() == config.target_dim {
        return Ok(embeddings.clone());
    }
    if embeddings.dim() < config.target_dim {
        return Err(Error::InsufficientData(format!(
            "cannot reduce a {}-dimensional space to {} dimensions",
            embeddings.dim(),
            config.target_dim
        )));
    }
    if embeddings.vector_count() <= config.target_dim {
        return Err(Error::InsufficientData(format!(
            "need more than {} vectors to reduce to {} dimensions",
            config.target_dim, config.target_dim
        )));
    }
    let x1 = post_process(embeddings.matrix(), config.ppa_components)?;
    let pca = pca_fit(&x1, config.target_dim)?;
    let x2 = pca_transform(&pca, &x1)?;
    let x3 = post_process(&x2, config.ppa_components)?;
    embeddings.with_matrix(x3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_matrix(seed: u64, rows: usize, cols: usize) -> Matrix<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols)
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    /// Test-side principal directions by power iteration with deflation,
    /// independent of the crate's eigensolver.
    fn power_iteration_dirs(x: &Matrix<f64>, count: usize) -> Vec<Vec<f64>> {
        let d = x.cols();
        let n = x.rows();
        let mut cov = vec![vec![0.0f64; d]; d];
        let mean: Vec<f64> = (0..d)
            .map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64)
            .collect();
        for r in 0..n {
            for i in 0..d {
                for j in 0..d {
                    cov[i][j] += (x.get(r, i) - mean[i]) * (x.get(r, j) - mean[j]);
                }
            }
        }
        for row in &mut cov {
            for v in row.iter_mut() {
                *v /= (n - 1) as f64;
            }
        }
        let mut dirs = Vec::new();
        for _ in 0..count {
            let mut v: Vec<f64> = (0..d).map(|i| 1.0 + i as f64 * 0.1).collect();
            for _ in 0..2000 {
                let mut next = vec![0.0; d];
                for i in 0..d {
                    for j in 0..d {
                        next[i] += cov[i][j] * v[j];
                    }
                }
                let norm: f64 = next.iter().map(|a| a * a).sum::<f64>().sqrt();
                for a in &mut next {
                    *a /= norm;
                }
                v = next;
            }
            let lambda: f64 = {
                let mut cv = vec![0.0; d];
                for i in 0..d {
                    for j in 0..d {
                        cv[i] += cov[i][j] * v[j];
                    }
                }
                v.iter().zip(&cv).map(|(a, b)| a * b).sum()
            };
            for i in 0..d {
                for j in 0..d {
                    cov[i][j] -= lambda * v[i] * v[j];
                }
            }
            dirs.push(v);
        }
        dirs
    }

    fn toy_embeddings(m: &Matrix<f64>) -> WordEmbeddings<f64> {
        let rows: Vec<(String, Vec<f64>)> = (0..m.rows())
            .map(|i| (format!("w{i}"), m.row(i).to_vec()))
            .collect();
        WordEmbeddings::from_rows("xxx", m.cols(), rows).unwrap()
    }

    /// Per-component variance of the stored matrix is non-increasing.
    fn variances_are_ordered(e: &WordEmbeddings<f64>) -> bool {
        let m = e.matrix();
        let n = m.rows();
        let vars: Vec<f64> = (0..m.cols())
            .map(|j| {
                let mean = (0..n).map(|i| m.get(i, j)).sum::<f64>() / n as f64;
                (0..n)
                    .map(|i| (m.get(i, j) - mean) * (m.get(i, j) - mean))
                    .sum::<f64>()
            })
            .collect();
        vars.windows(2).all(|w| w[0] >= w[1] - 1e-9)
    }

    #[test]
    fn post_process_zero_components_is_centering() {
        let m = random_matrix(1, 6, 3);
        let out = post_process(&m, 0).unwrap();
        for j in 0..3 {
            let col_mean: f64 = (0..6).map(|i| out.get(i, j)).sum::<f64>() / 6.0;
            assert!(col_mean.abs() < 1e-12);
            let orig_mean: f64 = (0..6).map(|i| m.get(i, j)).sum::<f64>() / 6.0;
            assert!((out.get(0, j) - (m.get(0, j) - orig_mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn post_process_equal_rows_vanish() {
        let m = Matrix::from_rows(&vec![vec![2.0, -1.0, 0.5]; 5]).unwrap();
        for d in [0, 1, 2] {
            let out = post_process(&m, d).unwrap();
            assert!(out.max_abs() < 1e-12);
        }
    }

    #[test]
    fn post_process_removes_top_directions() {
        let m = random_matrix(2, 20, 5);
        let out = post_process(&m, 2).unwrap();
        let dirs = power_iteration_dirs(&m, 2);
        for i in 0..out.rows() {
            for dir in &dirs {
                let proj: f64 = out.row(i).iter().zip(dir).map(|(a, b)| a * b).sum();
                assert!(proj.abs() < 1e-8, "projection {proj} should vanish");
            }
        }
        // and column means are ~0
        for j in 0..5 {
            let mean: f64 = (0..20).map(|i| out.get(i, j)).sum::<f64>() / 20.0;
            assert!(mean.abs() < 1e-10);
        }
    }

    #[test]
    fn post_process_insufficient_rows() {
        let m = random_matrix(3, 2, 4);
        assert!(post_process(&m, 2).is_err());
        let one = random_matrix(4, 1, 4);
        assert!(post_process(&one, 0).is_err());
    }

    #[test]
    fn pca_toy_axis_hand_computed() {
        // points (0,0), (1,2), (2,4): centered covariance [[1,2],[2,4]],
        // principal axis (1,2)/sqrt(5)
        let m = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let pca = pca_fit(&m, 1).unwrap();
        let s = 1.0 / 5.0f64.sqrt();
        assert!((pca.components.get(0, 0) - s).abs() < 1e-12);
        assert!((pca.components.get(1, 0) - 2.0 * s).abs() < 1e-12);
        assert!((pca.variances[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn reduce_shapes_and_structure() {
        let m = random_matrix(5, 40, 12);
        let mut rows: Vec<(String, Vec<f64>)> = (0..40)
            .map(|i| (format!("w{i}"), m.row(i).to_vec()))
            .collect();
        // one multi-vector lemma
        rows[3].0 = "w2".into();
        let e = WordEmbeddings::from_rows("xxx", 12, rows).unwrap();
        let cfg = ReductionConfig {
            target_dim: 6,
            ppa_components: 2,
        };
        let out = reduce(&e, &cfg).unwrap();
        assert_eq!(out.dim(), 6);
        assert_eq!(out.len(), e.len());
        assert_eq!(out.vector_count(), e.vector_count());
        assert_eq!(out.lookup("w2").len(), 2);

        // with D=0 the output is exactly the PCA projection, so its column
        // variances inherit the non-increasing order
        let plain = reduce(
            &e,
            &ReductionConfig {
                target_dim: 6,
                ppa_components: 0,
            },
        )
        .unwrap();
        assert!(variances_are_ordered(&plain));
    }

    #[test]
    fn reduce_preserves_distances_on_exact_subspace() {
        // 40 vectors spanned by 10 random basis vectors in a 30-dim ambient
        let basis = random_matrix(6, 10, 30);
        let coeffs = random_matrix(7, 40, 10);
        let data = coeffs.matmul(&basis).unwrap();
        let e = toy_embeddings(&data);
        let cfg = ReductionConfig {
            target_dim: 10,
            ppa_components: 0,
        };
        let out = reduce(&e, &cfg).unwrap();
        let dist = |m: &Matrix<f64>, a: usize, b: usize| -> f64 {
            m.row(a)
                .iter()
                .zip(m.row(b))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        };
        for a in 0..10 {
            for b in (a + 1)..10 {
                let d0 = dist(&data, a, b);
                let d1 = dist(out.matrix(), a, b);
                assert!((d0 - d1).abs() < 1e-6, "distance {d0} became {d1}");
            }
        }
    }

    #[test]
    fn reduce_skips_when_already_at_target() {
        let m = random_matrix(8, 20, 6);
        let e = toy_embeddings(&m);
        let cfg = ReductionConfig {
            target_dim: 6,
            ppa_components: 1,
        };
        let out = reduce(&e, &cfg).unwrap();
        assert_eq!(out, e);
    }

    #[test]
    fn reduce_rejects_bad_configs() {
        let m = random_matrix(9, 20, 6);
        let e = toy_embeddings(&m);
        // upscaling
        assert!(reduce(
            &e,
            &ReductionConfig {
                target_dim: 12,
                ppa_components: 0
            }
        )
        .is_err());
        // too few vectors
        let small = toy_embeddings(&random_matrix(10, 4, 6));
        assert!(reduce(
            &small,
            &ReductionConfig {
                target_dim: 4,
                ppa_components: 0
            }
        )
        .is_err());
        // ppa >= target
        assert!(reduce(
            &e,
            &ReductionConfig {
                target_dim: 3,
                ppa_components: 3
            }
        )
        .is_err());
    }

    #[test]
    fn variances_non_increasing() {
        let m = random_matrix(11, 50, 8);
        let pca = pca_fit(&m, 8).unwrap();
        assert!(pca.variances.windows(2).all(|w| w[0] >= w[1]));
    }
}
