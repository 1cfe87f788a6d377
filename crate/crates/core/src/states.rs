//! Probe-state construction and characterization: fixed-purity random
//! mixed states, GHZ states, maximally mixed states and the optimal
//! mixed probe for a given spectrum and generator.

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Eigenvalues below this threshold do not count toward the rank.
pub const RANK_TOL: f64 = 1e-10;

/// An n-qubit density matrix. `normalized` distinguishes proper states
/// (trace 1) from sub-normalized states produced by projections
/// (0 <= trace <= 1).
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: ComplexMatrix,
    normalized: bool,
}

impl DensityMatrix {
    /// Wrap a trace-1 Hermitian matrix. Cheap checks only (dimension,
    /// Hermiticity, trace); call [`DensityMatrix::validate`] for the full
    /// PSD check.
    pub fn new_normalized(n_qubits: usize, mat: ComplexMatrix) -> Result<Self> {
        Self::new_inner(n_qubits, mat, true)
    }

    /// Wrap a sub-normalized (0 <= trace <= 1) Hermitian PSD matrix.
    pub fn new_subnormalized(n_qubits: usize, mat: ComplexMatrix) -> Result<Self> {
        Self::new_inner(n_qubits, mat, false)
    }

    fn new_inner(n_qubits: usize, mat: ComplexMatrix, normalized: bool) -> Result<Self> {
        let d = 1usize << n_qubits;
        if mat.dim() != d {
            return Err(Error::DimMismatch {
                left: mat.dim(),
                right: d,
            });
        }
        let res = mat.hermitian_residual();
        if res > 1e-10 * mat.max_abs().max(1.0) {
            return Err(Error::NonHermitianInput {
                max_asymmetry: res,
            });
        }
        let tr = mat.trace();
        if tr.im.abs() > 1e-10 {
            return Err(Error::NumericalInconsistency(format!(
                "complex trace {tr}"
            )));
        }
        if normalized && (tr.re - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalInconsistency(format!(
                "normalized state with trace {}",
                tr.re
            )));
        }
        if !normalized && !(-1e-10..=1.0 + 1e-10).contains(&tr.re) {
            return Err(Error::NumericalInconsistency(format!(
                "sub-normalized state with trace {}",
                tr.re
            )));
        }
        Ok(Self {
            n_qubits,
            mat,
            normalized,
        })
    }

    /// Pure state |psi><psi| from a normalized state vector.
    pub fn from_pure(n_qubits: usize, psi: &[Complex64]) -> Result<Self> {
        let d = 1usize << n_qubits;
        if psi.len() != d {
            return Err(Error::DimMismatch {
                left: psi.len(),
                right: d,
            });
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NumericalInconsistency(format!(
                "state vector norm^2 = {norm}"
            )));
        }
        Self::new_normalized(n_qubits, ComplexMatrix::outer(psi))
    }

    /// Computational basis state |z><z|.
    pub fn basis_state(n_qubits: usize, z: usize) -> Self {
        let d = 1usize << n_qubits;
        assert!(z < d, "basis label out of range");
        let mut psi = vec![Complex64::ZERO; d];
        psi[z] = Complex64::ONE;
        Self::from_pure(n_qubits, &psi).expect("basis state is valid")
    }

    /// I / 2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mat = ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0));
        Self {
            n_qubits,
            mat,
            normalized: true,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Full invariant check: Hermitian, PSD (eigenvalues >= -1e-10) and
    /// the trace condition for the normalization flag.
    pub fn validate(&self) -> Result<()> {
        let eig = numerics::eig_hermitian(&self.mat)?;
        let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::NegativeSpectrum {
                min_eigenvalue: min,
            });
        }
        let tr = self.trace();
        let ok = if self.normalized {
            (tr - 1.0).abs() <= 1e-10
        } else {
            (-1e-10..=1.0 + 1e-10).contains(&tr)
        };
        if !ok {
            return Err(Error::NumericalInconsistency(format!("trace {tr}")));
        }
        Ok(())
    }

    /// Spectral decomposition with descending eigenvalues.
    pub fn spectral(&self) -> Result<SpectralDecomposition> {
        let eig = numerics::eig_hermitian(&self.mat)?;
        let rank = eig.values.iter().filter(|&&v| v > RANK_TOL).count().max(1);
        Ok(SpectralDecomposition {
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            rank,
        })
    }
}

/// Descending spectrum of a density matrix plus its numerical rank.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    pub rank: usize,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Tr[rho^2]. For Hermitian rho this is the squared Frobenius norm, so no
/// product needs to be formed.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += rho.matrix()[(i, j)].norm_sqr();
        }
    }
    acc
}

/// Random n-qubit state with exactly the requested purity.
///
/// Eigenvalues come from a symmetric Dirichlet draw, interpolated linearly
/// toward either the pure spectrum (1,0,...,0) or the uniform spectrum
/// until Tr[rho^2] matches `target_purity` (bisection to 1e-12), then
/// conjugated by a Haar-random unitary. Deterministic for a fixed seed.
pub fn random_state_with_purity(
    n_qubits: usize,
    target_purity: f64,
    rng_seed: u64,
) -> Result<DensityMatrix> {
    let d = 1usize << n_qubits;
    let min_purity = 1.0 / d as f64;
    if !(min_purity - 1e-12..=1.0 + 1e-12).contains(&target_purity) {
        return Err(Error::PurityOutOfRange {
            requested: target_purity,
            min: min_purity,
        });
    }
    let target = target_purity.clamp(min_purity, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    // symmetric Dirichlet(1): normalized i.i.d. exponentials
    let mut spectrum: Vec<f64> = (0..d)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = spectrum.iter().sum();
    for v in spectrum.iter_mut() {
        *v /= total;
    }
    spectrum.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let spectrum = interpolate_spectrum_to_purity(&spectrum, target, d);
    let u = numerics::haar_unitary(d, &mut rng);
    let rho = conjugate_diag(&u, &spectrum);
    DensityMatrix::new_normalized(n_qubits, rho)
}

/// U diag(spectrum) U^dag.
fn conjugate_diag(u: &ComplexMatrix, spectrum: &[f64]) -> ComplexMatrix {
    let d = spectrum.len();
    let mut scaled = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            scaled[(i, j)] = u[(i, j)] * spectrum[j];
        }
    }
    scaled.matmul(&u.adjoint()).hermitian_part()
}

fn spectrum_purity(s: &[f64]) -> f64 {
    s.iter().map(|v| v * v).sum()
}

/// Move a probability vector along a straight line toward (1,0,...,0) or
/// toward the uniform vector until its purity hits `target`. Purity is
/// monotone in the interpolation weight along both lines.
fn interpolate_spectrum_to_purity(base: &[f64], target: f64, d: usize) -> Vec<f64> {
    let start = spectrum_purity(base);
    if (start - target).abs() <= 1e-14 {
        return base.to_vec();
    }
    let toward_pure = target > start;
    let endpoint: Vec<f64> = if toward_pure {
        let mut e = vec![0.0; d];
        e[0] = 1.0;
        e
    } else {
        vec![1.0 / d as f64; d]
    };
    let blend = |t: f64| -> Vec<f64> {
        base.iter()
            .zip(endpoint.iter())
            .map(|(&b, &e)| (1.0 - t) * b + t * e)
            .collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = spectrum_purity(&blend(mid));
        let high_side = if toward_pure { p >= target } else { p <= target };
        if high_side {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let t = 0.5 * (lo + hi);
    let mut out = blend(t);
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

/// GHZ state (|0...0> + e^{i phase} |1...1>) / sqrt(2).
pub fn ghz(n_qubits: usize, phase: f64) -> DensityMatrix {
    assert!(n_qubits >= 1);
    let d = 1usize << n_qubits;
    let mut psi = vec![Complex64::ZERO; d];
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    psi[0] = Complex64::new(amp, 0.0);
    psi[d - 1] = Complex64::from_polar(amp, phase);
    DensityMatrix::from_pure(n_qubits, &psi).expect("GHZ state is valid")
}

/// Optimal mixed probe for a fixed spectrum under the generator G: the
/// state of that spectrum whose QFI attains the fixed-spectrum maximum.
///
/// Eigenvalue k is attached to (|g_k> + |g_{d-k+1}>)/sqrt(2) (k below the
/// midpoint), its partner to the orthogonal difference vector, and to
/// |g_k> itself at the midpoint, where |g_k> are eigenvectors of G sorted
/// by descending eigenvalue.
pub fn optimal_mixed_probe(spectrum: &[f64], g: &ComplexMatrix) -> Result<DensityMatrix> {
    let d = g.dim();
    validate_spectrum(spectrum, d)?;
    let n_qubits = d.trailing_zeros() as usize;
    if d != 1usize << n_qubits {
        return Err(Error::InvalidArgument(format!(
            "generator dimension {d} is not a power of two"
        )));
    }
    let geig = numerics::eig_hermitian(g)?;

    let mut rho = ComplexMatrix::zeros(d);
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..d {
        let partner = d - 1 - k;
        let vector: Vec<Complex64> = if k < partner {
            let a = geig.vectors.column(k);
            let b = geig.vectors.column(partner);
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| (x + y) * sqrt_half)
                .collect()
        } else if k > partner {
            let a = geig.vectors.column(partner);
            let b = geig.vectors.column(k);
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y) * sqrt_half)
                .collect()
        } else {
            geig.vectors.column(k)
        };
        let weight = Complex64::new(spectrum[k], 0.0);
        let outer = ComplexMatrix::outer(&vector).scale(weight);
        rho = rho.add(&outer);
    }
    DensityMatrix::new_normalized(n_qubits, rho.hermitian_part())
}

pub(crate) fn validate_spectrum(spectrum: &[f64], dim: usize) -> Result<()> {
    if spectrum.len() != dim {
        return Err(Error::SpectrumInvalid(format!(
            "length {} does not match dimension {dim}",
            spectrum.len()
        )));
    }
    let total: f64 = spectrum.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::SpectrumInvalid(format!("sums to {total}")));
    }
    for w in spectrum.windows(2) {
        if w[1] > w[0] + 1e-12 {
            return Err(Error::SpectrumInvalid("not descending".into()));
        }
    }
    if spectrum.iter().any(|&v| v < -1e-12) {
        return Err(Error::SpectrumInvalid("negative entry".into()));
    }
    Ok(())
}
