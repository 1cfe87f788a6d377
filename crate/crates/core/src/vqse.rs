//! Variational quantum state eigensolver: trains a diagonalizing circuit
//! against a non-degenerate diagonal Hamiltonian and reads off the m
//! largest eigenvalue estimates together with circuits preparing the
//! matching eigenvector estimates.

use crate::circuits::{self, Ansatz};
use crate::error::{Error, Result};
use crate::optimize::{self, OptMethod, OptimizerConfig};
use crate::states::DensityMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

/// Inverse golden ratio; spaces the qubit weights so low-lying energies
/// stay distinct.
const WEIGHT_SPACING: f64 = 0.618_033_988_7;
/// Adjacent low energies closer than this count as degenerate.
const ENERGY_GAP_TOL: f64 = 1e-9;

/// Diagonal Hamiltonian with per-qubit weights q_i = 1 + i g / n; the
/// energy of a bitstring is the sum of the weights of its set bits.
/// Construction verifies that the m lowest energies are pairwise distinct.
#[derive(Debug, Clone)]
pub struct DiagHamiltonian {
    n_qubits: usize,
    weights: Vec<f64>,
}

impl DiagHamiltonian {
    pub fn new(n_qubits: usize, m: usize) -> Result<Self> {
        assert!(n_qubits >= 1 && n_qubits <= 13);
        let weights: Vec<f64> = (0..n_qubits)
            .map(|i| 1.0 + i as f64 * WEIGHT_SPACING / n_qubits as f64)
            .collect();
        let h = Self { n_qubits, weights };
        h.check_low_spectrum(m)?;
        Ok(h)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Energy of a computational basis label (qubit 0 is the most
    /// significant bit, matching the circuit convention).
    pub fn energy(&self, z: usize) -> f64 {
        let mut acc = 0.0;
        for (qubit, w) in self.weights.iter().enumerate() {
            if z & (1usize << (self.n_qubits - 1 - qubit)) != 0 {
                acc += w;
            }
        }
        acc
    }

    /// All candidate labels sorted by ascending energy. Exhaustive for
    /// n <= 10; for larger n only bitstrings of Hamming weight up to
    /// ceil(log2 m) + 1 are enumerated, which covers the low spectrum.
    fn low_labels(&self, m: usize) -> Vec<usize> {
        let d = 1usize << self.n_qubits;
        let mut labels: Vec<usize> = if self.n_qubits <= 10 {
            (0..d).collect()
        } else {
            let max_weight = (m.max(2) as f64).log2().ceil() as u32 + 1;
            (0..d)
                .filter(|z: &usize| z.count_ones() <= max_weight)
                .collect()
        };
        labels.sort_by(|&a, &b| self.energy(a).partial_cmp(&self.energy(b)).unwrap());
        labels
    }

    fn check_low_spectrum(&self, m: usize) -> Result<()> {
        let labels = self.low_labels(m);
        let take = (m + 1).min(labels.len());
        for pair in labels[..take].windows(2) {
            let (e0, e1) = (self.energy(pair[0]), self.energy(pair[1]));
            if (e1 - e0).abs() < ENERGY_GAP_TOL {
                return Err(Error::DegenerateLowSpectrum { energy: e0 });
            }
        }
        Ok(())
    }
}

/// Tr[H rho] for a diagonal H: sum of energy(z) times the z-th diagonal
/// entry.
pub fn diag_expectation(h: &DiagHamiltonian, rho: &DensityMatrix) -> f64 {
    (0..rho.dim())
        .map(|z| h.energy(z) * rho.matrix()[(z, z)].re)
        .sum()
}

/// VQSE cost Tr[H V rho V^dag]; minimized when V maps the k-th largest
/// eigenvector of rho to the k-th lowest energy eigenstate of H.
pub fn vqse_cost(
    h: &DiagHamiltonian,
    ansatz: &Ansatz,
    beta: &[f64],
    rho: &DensityMatrix,
) -> Result<f64> {
    if h.n_qubits() != rho.n_qubits() {
        return Err(Error::DimMismatch {
            left: 1usize << h.n_qubits(),
            right: rho.dim(),
        });
    }
    let rotated = circuits::apply(ansatz, beta, rho)?;
    Ok(diag_expectation(h, &rotated))
}

/// How eigenvalue estimates are read from the rotated state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenvalueReadout {
    /// Read the diagonal of V rho V^dag directly (noiseless simulation).
    Exact,
    /// Multinomial sampling with `n_runs` computational-basis shots.
    Shots,
}

/// Output of a VQSE run: trained parameters, eigenvalue estimates in
/// descending order, the basis labels whose inverse-circuit preparations
/// give the eigenvector estimates, and the best restart's cost history.
#[derive(Debug, Clone)]
pub struct VqseResult {
    pub beta_opt: Vec<f64>,
    pub eigenvalue_estimates: Vec<f64>,
    pub labels: Vec<usize>,
    pub cost_history: Vec<f64>,
    pub n_runs: u64,
    pub readout: EigenvalueReadout,
}

impl VqseResult {
    /// Eigenvector estimate |v_i> = V^dag |z_i>.
    pub fn eigenvector(&self, ansatz: &Ansatz, i: usize) -> Result<Vec<Complex64>> {
        let d = 1usize << ansatz.n_qubits();
        let mut basis = vec![Complex64::ZERO; d];
        basis[self.labels[i]] = Complex64::ONE;
        circuits::apply_inverse_to_statevector(ansatz, &self.beta_opt, &basis)
    }

    pub fn eigenvectors(&self, ansatz: &Ansatz) -> Result<Vec<Vec<Complex64>>> {
        (0..self.labels.len())
            .map(|i| self.eigenvector(ansatz, i))
            .collect()
    }

    /// Cost history as `iteration,cost` CSV lines.
    pub fn cost_history_csv_rows(&self) -> Vec<String> {
        self.cost_history
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{i},{c}"))
            .collect()
    }
}

/// Read the m largest eigenvalue estimates (and their labels) from an
/// already-trained diagonalizing circuit.
pub fn extract_eigenvalue_estimates(
    rho: &DensityMatrix,
    ansatz: &Ansatz,
    beta: &[f64],
    m: usize,
    n_runs: u64,
    rng_seed: u64,
    readout: EigenvalueReadout,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let rotated = circuits::apply(ansatz, beta, rho)?;
    let d = rotated.dim();
    let raw: Vec<f64> = (0..d)
        .map(|z| rotated.matrix()[(z, z)].re.clamp(0.0, 1.0))
        .collect();

    let estimates: Vec<f64> = match readout {
        EigenvalueReadout::Exact => raw,
        EigenvalueReadout::Shots => {
            if n_runs == 0 {
                return Err(Error::InvalidArgument("n_runs must be >= 1".into()));
            }
            let total: f64 = raw.iter().sum();
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let mut counts = vec![0u64; d];
            let mut remaining = n_runs;
            let mut mass_left = total;
            for z in 0..d {
                if remaining == 0 {
                    break;
                }
                if z == d - 1 {
                    counts[z] = remaining;
                    break;
                }
                let p = if mass_left <= 0.0 {
                    0.0
                } else {
                    (raw[z] / mass_left).clamp(0.0, 1.0)
                };
                let draw = rand_distr::Binomial::new(remaining, p)
                    .map_err(|e| Error::NumericalInconsistency(e.to_string()))?
                    .sample(&mut rng);
                counts[z] = draw;
                remaining -= draw;
                mass_left -= raw[z];
            }
            counts
                .iter()
                .map(|&c| c as f64 / n_runs as f64)
                .collect()
        }
    };

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        estimates[b]
            .partial_cmp(&estimates[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let labels: Vec<usize> = order[..m].to_vec();
    let values: Vec<f64> = labels.iter().map(|&z| estimates[z]).collect();
    Ok((values, labels))
}

/// Train a diagonalizing circuit for `rho` and return the m largest
/// eigenvalue estimates.
///
/// Training is parameter-shift gradient descent on the VQSE cost
/// (learning rate, iteration count, restart count and base seed come
/// from `optimizer_config`; the method field is overridden because the
/// cost is an expectation value with exact shift-rule gradients).
pub fn run_vqse(
    rho: &DensityMatrix,
    m: usize,
    ansatz: &Ansatz,
    optimizer_config: &OptimizerConfig,
    n_runs: u64,
    rng_seed: u64,
    readout: EigenvalueReadout,
) -> Result<VqseResult> {
    let d = rho.dim();
    if m < 1 || m > d {
        return Err(Error::MOutOfRange { m, dim: d });
    }
    let h = DiagHamiltonian::new(rho.n_qubits(), m)?;

    let objective =
        |beta: &[f64]| -> Result<f64> { Ok(-vqse_cost(&h, ansatz, beta, rho)?) };
    let config = OptimizerConfig {
        method: OptMethod::GradDescent,
        seed: rng_seed,
        ..optimizer_config.clone()
    };
    let trained = optimize::maximize(objective, ansatz.param_count(), &config)?;
    let cost_history: Vec<f64> = trained.history.iter().map(|v| -v).collect();

    let (eigenvalue_estimates, labels) = extract_eigenvalue_estimates(
        rho,
        ansatz,
        &trained.best_params,
        m,
        n_runs,
        rng_seed ^ 0x5EED_FACE,
        readout,
    )?;

    Ok(VqseResult {
        beta_opt: trained.best_params,
        eigenvalue_estimates,
        labels,
        cost_history,
        n_runs,
        readout,
    })
}
