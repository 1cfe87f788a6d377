//! Dense complex-matrix kernels: Hermitian eigendecomposition, PSD matrix
//! functions, trace norms and matrix exponentials.
//!
//! Everything here is a pure function of immutable inputs. Matrices are
//! square, row-major `Complex64` buffers; dimensions stay small enough
//! (d <= 2^13, and in practice d <= 256 for the experiments) that dense
//! O(d^3) algorithms are the right tool.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Relative tolerance for the Hermitian symmetry check.
pub const HERMITIAN_RTOL: f64 = 1e-12;
/// Eigenvalue gap below which two eigenvalues count as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Negative eigenvalues above this magnitude are clamped to zero before
/// taking square roots; anything more negative is an error.
pub const NEGATIVE_EIG_HARD_LIMIT: f64 = -1e-8;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// Outer product |v><v| of a (not necessarily normalized) vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let mut m = Self::zeros(v.len());
        for i in 0..v.len() {
            for j in 0..v.len() {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                let dst = &mut out.data[i * d..(i + 1) * d];
                for j in 0..d {
                    dst[j] += a * row[j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "mul_vec dimension mismatch");
        let d = self.dim;
        let mut out = vec![Complex64::ZERO; d];
        for i in 0..d {
            let mut acc = Complex64::ZERO;
            for j in 0..d {
                acc += self.data[i * d + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| self.data[j * d + i].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Tr[A B], computed without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut acc = Complex64::ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.data[i * d + j] * other.data[j * d + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |A_ij - conj(A_ji)| over all entries.
    pub fn hermitian_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let r = (self.data[i * d + j] - self.data[j * d + i].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, rtol: f64) -> bool {
        let scale = self.max_abs();
        self.hermitian_residual() <= rtol * scale.max(1.0)
    }

    /// (A + A^dag)/2; removes round-off asymmetry from products.
    pub fn hermitian_part(&self) -> Self {
        let d = self.dim;
        Self::from_fn(d, |i, j| {
            (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5
        })
    }

    /// Kronecker product, `self` on the most significant index block.
    pub fn kron(&self, other: &Self) -> Self {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = Self::zeros(d);
        for ia in 0..da {
            for ja in 0..da {
                let a = self.data[ia * da + ja];
                if a == Complex64::ZERO {
                    continue;
                }
                for ib in 0..db {
                    for jb in 0..db {
                        out[(ia * db + ib, ja * db + jb)] = a * other.data[ib * db + jb];
                    }
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.data[i * self.dim + j]).collect()
    }

    fn set_column(&mut self, j: usize, col: &[Complex64]) {
        for i in 0..self.dim {
            self.data[i * self.dim + j] = col[i];
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: descending real eigenvalues
/// and the unitary whose k-th column is the matching eigenvector.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// Q diag(values) Q^dag.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.values.len();
        let q = &self.vectors;
        let mut scaled = ComplexMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                scaled[(i, j)] = q[(i, j)] * self.values[j];
            }
        }
        scaled.matmul(&q.adjoint())
    }
}

fn to_nalgebra(a: &ComplexMatrix) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(a.dim(), a.dim(), |i, j| a[(i, j)])
}

/// Hermitian eigendecomposition with deterministic ordering.
///
/// Eigenvalues are sorted descending. Each eigenvector is phase-fixed so
/// its first component of significant magnitude is real positive, and
/// within a degenerate cluster (gap < 1e-10) the columns are ordered
/// lexicographically, so identical inputs give identical outputs.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<HermitianEig> {
    let residual = a.hermitian_residual();
    if residual > HERMITIAN_RTOL * a.max_abs().max(1.0) {
        return Err(Error::NonHermitianInput {
            max_asymmetry: residual,
        });
    }
    let d = a.dim();
    let sym = to_nalgebra(&a.hermitian_part());
    let eig = sym.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues are finite")
    });

    let mut values = Vec::with_capacity(d);
    let mut vectors = ComplexMatrix::zeros(d);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col: Vec<Complex64> = (0..d).map(|i| eig.eigenvectors[(i, src)]).collect();
        fix_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    sort_degenerate_clusters(&mut values, &mut vectors);

    Ok(HermitianEig { values, vectors })
}

/// Rotate a global phase so the first component with |v_i| > 1e-8 is real
/// positive. Unit vectors always have such a component.
fn fix_phase(col: &mut [Complex64]) {
    if let Some(pivot) = col.iter().find(|z| z.norm() > 1e-8) {
        let phase = pivot.conj() / pivot.norm();
        for z in col.iter_mut() {
            *z *= phase;
        }
    }
}

/// Order eigenvectors inside each degenerate cluster lexicographically by
/// (re, im) component pairs. Tie-breaking only; eigenvalues keep their
/// descending order.
fn sort_degenerate_clusters(values: &mut [f64], vectors: &mut ComplexMatrix) {
    let d = values.len();
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (values[end - 1] - values[end]).abs() < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            let mut cols: Vec<(Vec<Complex64>, f64)> = (start..end)
                .map(|j| (vectors.column(j), values[j]))
                .collect();
            cols.sort_by(|a, b| lex_cmp(&a.0, &b.0));
            for (offset, (col, val)) in cols.into_iter().enumerate() {
                vectors.set_column(start + offset, &col);
                values[start + offset] = val;
            }
        }
        start = end;
    }
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.partial_cmp(&y.re).expect("finite") {
            std::cmp::Ordering::Equal => {}
            ord => return ord,
        }
        match x.im.partial_cmp(&y.im).expect("finite") {
            std::cmp::Ordering::Equal => {}
            ord => return ord,
        }
    }
    std::cmp::Ordering::Equal
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in [-1e-8, 0) are treated as round-off and clamped to zero;
/// anything more negative is rejected.
pub fn sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(a)?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < NEGATIVE_EIG_HARD_LIMIT {
        return Err(Error::NegativeSpectrum {
            min_eigenvalue: min,
        });
    }
    let d = a.dim();
    let q = &eig.vectors;
    // eigenvalues at the solver noise floor are true zeros; keeping them
    // would scatter O(1e-8) square roots through the result
    let max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-14 * (1.0 + max);
    let mut scaled = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let v = eig.values[j];
            let root = if v > cutoff { v.sqrt() } else { 0.0 };
            scaled[(i, j)] = q[(i, j)] * root;
        }
    }
    Ok(scaled.matmul(&q.adjoint()).hermitian_part())
}

/// Tr sqrt(sqrt(rho) sigma sqrt(rho)) for Hermitian PSD inputs
/// (sub-normalized states allowed). Symmetric in its arguments.
pub fn trace_norm_product(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let s = sqrt_psd(rho)?;
    let inner = s.matmul(sigma).matmul(&s).hermitian_part();
    let eig = eig_hermitian(&inner)?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < NEGATIVE_EIG_HARD_LIMIT {
        return Err(Error::NegativeSpectrum {
            min_eigenvalue: min,
        });
    }
    Ok(sum_sqrt_spectrum(&eig.values))
}

/// Sum of square roots of a PSD spectrum. Eigenvalues at the solver's
/// noise floor are dropped: taking sqrt of an O(eps) artifact of a
/// rank-deficient matrix would otherwise contribute O(1e-8) each.
pub(crate) fn sum_sqrt_spectrum(values: &[f64]) -> f64 {
    let max = values.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = 1e-14 * (1.0 + max);
    values
        .iter()
        .filter(|&&v| v > cutoff)
        .map(|&v| v.sqrt())
        .sum()
}

/// exp(-i t G) for Hermitian G. Unitary; identity at t = 0.
pub fn exp_i_hermitian(g: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(g)?;
    let d = g.dim();
    let q = &eig.vectors;
    let mut scaled = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let phase = Complex64::from_polar(1.0, -t * eig.values[j]);
            scaled[(i, j)] = q[(i, j)] * phase;
        }
    }
    Ok(scaled.matmul(&q.adjoint()))
}

/// Haar-random unitary: QR of a complex Ginibre matrix via modified
/// Gram-Schmidt, which leaves R with a real positive diagonal so the
/// distribution is exactly Haar.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    use rand_distr::StandardNormal;
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();

    for j in 0..dim {
        // two Gram-Schmidt passes keep the columns orthonormal to ~1e-15
        for _pass in 0..2 {
            for k in 0..j {
                let proj: Complex64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let prev = cols[k].clone();
                for (c, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *c -= proj * p;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for c in cols[j].iter_mut() {
            *c /= norm;
        }
    }

    let mut u = ComplexMatrix::zeros(dim);
    for (j, col) in cols.iter().enumerate() {
        u.set_column(j, col);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let raw = ComplexMatrix::from_fn(d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        raw.hermitian_part()
    }

    fn random_psd(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let raw = ComplexMatrix::from_fn(d, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        raw.matmul(&raw.adjoint()).hermitian_part()
    }

    /// Singular values via one-sided Jacobi on the columns; independent of
    /// the eigendecomposition path used by the implementation.
    fn jacobi_singular_values(a: &ComplexMatrix) -> Vec<f64> {
        let d = a.dim();
        let mut cols: Vec<Vec<Complex64>> = (0..d).map(|j| a.column(j)).collect();
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..d {
                for q in (p + 1)..d {
                    let app: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                    let aqq: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                    let apq: Complex64 = cols[p]
                        .iter()
                        .zip(cols[q].iter())
                        .map(|(x, y)| x.conj() * y)
                        .sum();
                    off = off.max(apq.norm());
                    if apq.norm() < 1e-15 * (app * aqq).sqrt().max(1e-300) {
                        continue;
                    }
                    // complex Jacobi rotation zeroing the (p,q) Gram entry
                    let phase = apq / apq.norm();
                    let tau = (aqq - app) / (2.0 * apq.norm());
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..d {
                        let vp = cols[p][i];
                        let vq = cols[q][i];
                        cols[p][i] = c * vp - s * phase.conj() * vq;
                        cols[q][i] = s * phase * vp + c * vq;
                    }
                }
            }
            if off < 1e-14 {
                break;
            }
        }
        let mut sv: Vec<f64> = cols
            .iter()
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    #[test]
    fn eig_identity() {
        let eig = eig_hermitian(&ComplexMatrix::identity(4)).unwrap();
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // degenerate tie-breaking must give a deterministic permutation basis
        let again = eig_hermitian(&ComplexMatrix::identity(4)).unwrap();
        assert!(eig.vectors.max_abs_diff(&again.vectors) == 0.0);
    }

    #[test]
    fn eig_diagonal_already_sorted() {
        let a = ComplexMatrix::from_diag(&[0.7, 0.2, 0.1, 0.0]);
        let eig = eig_hermitian(&a).unwrap();
        assert_eq!(eig.values.len(), 4);
        for (got, want) in eig.values.iter().zip([0.7, 0.2, 0.1, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        // eigenvectors must be a permutation of the standard basis
        for j in 0..4 {
            let col = eig.vectors.column(j);
            let big: Vec<usize> = (0..4).filter(|&i| col[i].norm() > 0.5).collect();
            assert_eq!(big.len(), 1);
            assert!((col[big[0]].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_reconstruction_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 5, 8, 16] {
            let a = random_hermitian(d, &mut rng);
            let eig = eig_hermitian(&a).unwrap();
            let scale = 1.0 + eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(eig.reconstruct().max_abs_diff(&a) <= 1e-10 * scale);
            // Q^dag Q = I
            let qtq = eig.vectors.adjoint().matmul(&eig.vectors);
            assert!(qtq.max_abs_diff(&ComplexMatrix::identity(d)) <= 1e-10);
            // descending order
            for w in eig.values.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn eig_values_sum_to_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_hermitian(9, &mut rng);
        let eig = eig_hermitian(&a).unwrap();
        let sum: f64 = eig.values.iter().sum();
        assert!((sum - a.trace().re).abs() < 1e-10);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut a = ComplexMatrix::identity(3);
        a[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(
            eig_hermitian(&a),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn sqrt_identity_and_diag() {
        let s = sqrt_psd(&ComplexMatrix::identity(3)).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        let s = sqrt_psd(&ComplexMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_diag(&[2.0, 3.0])) < 1e-12);
    }

    #[test]
    fn sqrt_squaring_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [3usize, 6, 12] {
            let a = random_psd(d, &mut rng);
            let s = sqrt_psd(&a).unwrap();
            assert!(s.matmul(&s).max_abs_diff(&a) <= 1e-9);
            assert!(s.hermitian_residual() < 1e-12);
        }
    }

    #[test]
    fn sqrt_rejects_negative_spectrum() {
        let a = ComplexMatrix::from_diag(&[1.0, -0.5]);
        assert!(matches!(
            sqrt_psd(&a),
            Err(Error::NegativeSpectrum { .. })
        ));
    }

    #[test]
    fn trace_norm_pure_states() {
        let zero = ComplexMatrix::from_diag(&[1.0, 0.0]);
        let one = ComplexMatrix::from_diag(&[0.0, 1.0]);
        assert!((trace_norm_product(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_norm_product(&zero, &one).unwrap() < 1e-12);
    }

    #[test]
    fn trace_norm_matches_jacobi_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..5 {
            let d = 6;
            let mut rho = random_psd(d, &mut rng);
            let mut sigma = random_psd(d, &mut rng);
            let tr_r = rho.trace().re;
            let tr_s = sigma.trace().re;
            rho = rho.scale(Complex64::new(1.0 / tr_r, 0.0));
            sigma = sigma.scale(Complex64::new(1.0 / tr_s, 0.0));

            let got = trace_norm_product(&rho, &sigma).unwrap();
            // oracle: sum of singular values of sqrt(rho) sqrt(sigma)
            let x = sqrt_psd(&rho).unwrap().matmul(&sqrt_psd(&sigma).unwrap());
            let want: f64 = jacobi_singular_values(&x).iter().sum();
            assert!(
                (got - want).abs() < 1e-8,
                "trace norm {got} vs svd oracle {want}"
            );
            // symmetry
            let swapped = trace_norm_product(&sigma, &rho).unwrap();
            assert!((got - swapped).abs() < 1e-9);
            // normalized states stay within [0, 1]
            assert!((-1e-10..=1.0 + 1e-9).contains(&got));
        }
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let g = random_hermitian(5, &mut rng);
        let w = exp_i_hermitian(&g, 0.0).unwrap();
        assert!(w.max_abs_diff(&ComplexMatrix::identity(5)) < 1e-12);
    }

    #[test]
    fn exp_pauli_z_at_pi() {
        let z = ComplexMatrix::from_diag(&[1.0, -1.0]);
        let w = exp_i_hermitian(&z, std::f64::consts::PI).unwrap();
        let want = ComplexMatrix::from_fn(2, |i, j| {
            if i == j {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::ZERO
            }
        });
        assert!(w.max_abs_diff(&want) < 1e-12);
        let wwdag = w.matmul(&w.adjoint());
        assert!(wwdag.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn exp_matches_taylor_series_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let g = random_hermitian(6, &mut rng);
        let t = 0.713;
        let got = exp_i_hermitian(&g, t).unwrap();

        // scaling-and-squaring Taylor oracle for exp(-i t G)
        let scale_pow = 8u32;
        let factor = Complex64::new(0.0, -t / f64::from(1u32 << scale_pow));
        let a = g.scale(factor);
        let mut term = ComplexMatrix::identity(6);
        let mut acc = ComplexMatrix::identity(6);
        for k in 1..=20 {
            term = term.matmul(&a).scale(Complex64::new(1.0 / k as f64, 0.0));
            acc = acc.add(&term);
        }
        let mut want = acc;
        for _ in 0..scale_pow {
            want = want.matmul(&want);
        }
        assert!(got.max_abs_diff(&want) < 1e-9);
    }

    #[test]
    fn exp_group_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = random_hermitian(4, &mut rng);
        let (s, t) = (0.37, -0.81);
        let lhs = exp_i_hermitian(&g, s)
            .unwrap()
            .matmul(&exp_i_hermitian(&g, t).unwrap());
        let rhs = exp_i_hermitian(&g, s + t).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-9);
    }

    #[test]
    fn haar_unitary_is_unitary_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let u = haar_unitary(8, &mut rng);
        let utu = u.adjoint().matmul(&u);
        assert!(utu.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
        let mut rng2 = ChaCha8Rng::seed_from_u64(37);
        let u2 = haar_unitary(8, &mut rng2);
        assert_eq!(u.max_abs_diff(&u2), 0.0);
    }
}
