//! Fidelity-type quantities: exact Uhlmann fidelity, truncated and
//! truncated-generalized fidelities (direct spectral path and T-matrix
//! path), sub- and super-fidelities, and shot-based swap-test estimators
//! with a gate-level circuit cross-check.

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix};
use crate::states::DensityMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uhlmann fidelity F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho))
/// between normalized states. Value in [0, 1], symmetric, 1 iff equal.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    if !rho.is_normalized() || !sigma.is_normalized() {
        return Err(Error::InvalidArgument(
            "fidelity expects normalized states".into(),
        ));
    }
    let f = numerics::trace_norm_product(rho.matrix(), sigma.matrix())?;
    Ok(f.clamp(0.0, 1.0))
}

/// ||sqrt(a) sqrt(b)||_1 for Hermitian PSD (possibly sub-normalized) inputs.
pub fn trace_fidelity_subnorm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    numerics::trace_norm_product(a, b)
}

/// Trace deficits below the eigensolver noise floor count as exact
/// normalization; otherwise sqrt of the round-off pollutes the
/// generalized fidelity of numerically-pure states.
fn trace_deficit(trace: f64) -> f64 {
    let deficit = 1.0 - trace;
    if deficit < 1e-13 {
        0.0
    } else {
        deficit
    }
}

/// Generalized fidelity between sub-normalized states:
/// ||sqrt(a) sqrt(b)||_1 + sqrt((1 - Tr a)(1 - Tr b)).
pub fn generalized_fidelity_subnorm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let first = numerics::trace_norm_product(a, b)?;
    let fa = trace_deficit(a.trace().re);
    let fb = trace_deficit(b.trace().re);
    Ok(first + (fa * fb).sqrt())
}

/// Projection of an exact/error state pair onto the top-m eigenspace of
/// the exact state. Both projected states are sub-normalized.
#[derive(Debug, Clone)]
pub struct TruncationResult {
    pub m: usize,
    pub truncated_exact: DensityMatrix,
    pub truncated_error: DensityMatrix,
    pub kept_eigenvalues: Vec<f64>,
    pub projector_basis: Vec<Vec<Complex64>>,
}

/// Project both states onto the span of the m largest-eigenvalue
/// eigenvectors of `rho_exact`. The error state is never diagonalized.
pub fn truncate(
    rho_exact: &DensityMatrix,
    rho_error: &DensityMatrix,
    m: usize,
) -> Result<TruncationResult> {
    let d = rho_exact.dim();
    if rho_error.dim() != d {
        return Err(Error::DimMismatch {
            left: d,
            right: rho_error.dim(),
        });
    }
    if m < 1 || m > d {
        return Err(Error::MOutOfRange { m, dim: d });
    }
    let spec = rho_exact.spectral()?;
    let kept: Vec<f64> = spec.eigenvalues[..m].to_vec();
    let basis: Vec<Vec<Complex64>> = (0..m).map(|k| spec.eigenvectors.column(k)).collect();

    // truncated exact state from its own eigenpairs
    let mut exact = ComplexMatrix::zeros(d);
    for (lambda, v) in kept.iter().zip(basis.iter()) {
        let outer = ComplexMatrix::outer(v).scale(Complex64::new(*lambda, 0.0));
        exact = exact.add(&outer);
    }

    // truncated error state Pi rho_err Pi via the m-column basis
    let block = project_block(rho_error.matrix(), &basis);
    let error = expand_block(&block, &basis, d);

    let n = rho_exact.n_qubits();
    Ok(TruncationResult {
        m,
        truncated_exact: DensityMatrix::new_subnormalized(n, exact.hermitian_part())?,
        truncated_error: DensityMatrix::new_subnormalized(n, error.hermitian_part())?,
        kept_eigenvalues: kept,
        projector_basis: basis,
    })
}

/// B^dag A B for a d x m column basis, giving the m x m block of A.
fn project_block(a: &ComplexMatrix, basis: &[Vec<Complex64>]) -> ComplexMatrix {
    let m = basis.len();
    let mut block = ComplexMatrix::zeros(m);
    let applied: Vec<Vec<Complex64>> = basis.iter().map(|v| a.mul_vec(v)).collect();
    for r in 0..m {
        for c in 0..m {
            let val: Complex64 = basis[r]
                .iter()
                .zip(applied[c].iter())
                .map(|(x, y)| x.conj() * y)
                .sum();
            block[(r, c)] = val;
        }
    }
    block
}

/// B block B^dag back in the full d-dimensional space.
fn expand_block(block: &ComplexMatrix, basis: &[Vec<Complex64>], d: usize) -> ComplexMatrix {
    let m = basis.len();
    let mut out = ComplexMatrix::zeros(d);
    for r in 0..m {
        for c in 0..m {
            let w = block[(r, c)];
            if w == Complex64::ZERO {
                continue;
            }
            for i in 0..d {
                let left = basis[r][i] * w;
                for j in 0..d {
                    out[(i, j)] += left * basis[c][j].conj();
                }
            }
        }
    }
    out
}

/// Truncated fidelity F(rho_theta^(m), rho_{theta+delta}^(m)); a lower
/// bound on the exact fidelity, nondecreasing in m.
pub fn truncated_fidelity(t: &TruncationResult) -> Result<f64> {
    trace_fidelity_subnorm(t.truncated_exact.matrix(), t.truncated_error.matrix())
}

/// Truncated generalized fidelity F_*; an upper bound on the exact
/// fidelity, nonincreasing in m.
pub fn generalized_fidelity(t: &TruncationResult) -> Result<f64> {
    generalized_fidelity_subnorm(t.truncated_exact.matrix(), t.truncated_error.matrix())
}

/// The m x m T-matrix T_ij = sqrt(l_i l_j) <v_i| rho_err |v_j> built from
/// eigenvalue/eigenvector estimates, plus the diagonal overlaps
/// <v_i| rho_err |v_i> needed for the generalized-fidelity tail term.
#[derive(Debug, Clone)]
pub struct TMatrix {
    pub mat: ComplexMatrix,
    pub diag_overlaps: Vec<f64>,
}

/// Assemble the T-matrix from estimated eigenvalues and eigenvector
/// preparations (exact or variationally obtained).
pub fn build_tmatrix(
    eigenvalue_estimates: &[f64],
    eigenvector_estimates: &[Vec<Complex64>],
    rho_error: &DensityMatrix,
) -> Result<TMatrix> {
    let m = eigenvalue_estimates.len();
    if eigenvector_estimates.len() != m {
        return Err(Error::DimMismatch {
            left: eigenvector_estimates.len(),
            right: m,
        });
    }
    for v in eigenvector_estimates {
        if v.len() != rho_error.dim() {
            return Err(Error::DimMismatch {
                left: v.len(),
                right: rho_error.dim(),
            });
        }
    }
    let block = project_block(rho_error.matrix(), eigenvector_estimates);
    let mut mat = ComplexMatrix::zeros(m);
    let mut diag = Vec::with_capacity(m);
    for i in 0..m {
        for j in 0..m {
            let w = (eigenvalue_estimates[i].max(0.0) * eigenvalue_estimates[j].max(0.0)).sqrt();
            mat[(i, j)] = block[(i, j)] * w;
        }
        diag.push(block[(i, i)].re);
    }
    Ok(TMatrix {
        mat: mat.hermitian_part(),
        diag_overlaps: diag,
    })
}

/// Fidelity bounds reconstructed from the T-matrix:
/// lower = Tr sqrt(T), upper = lower + sqrt((1 - sum l_i)(1 - sum overlaps)).
/// With exact eigenvectors both agree with the direct truncation path.
pub fn tmatrix_fidelity(tm: &TMatrix, kept: &[f64]) -> Result<(f64, f64)> {
    let eig = numerics::eig_hermitian(&tm.mat)?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-8 {
        return Err(Error::NonPsdTMatrix {
            min_eigenvalue: min,
        });
    }
    let lower = numerics::sum_sqrt_spectrum(&eig.values);
    let kept_sum: f64 = kept.iter().sum();
    let overlap_sum: f64 = tm.diag_overlaps.iter().sum();
    let tail = (trace_deficit(kept_sum) * trace_deficit(overlap_sum)).sqrt();
    Ok((lower, lower + tail))
}

/// Re Tr[rho sigma].
pub fn trace_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    rho.matrix().trace_product(sigma.matrix()).re
}

/// Re Tr[rho sigma rho sigma].
pub fn trace_quartic(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let p = rho.matrix().matmul(sigma.matrix());
    p.trace_product(&p).re
}

fn check_normalized_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    if !rho.is_normalized() || !sigma.is_normalized() {
        return Err(Error::InvalidArgument(
            "sub/super fidelity expects normalized states".into(),
        ));
    }
    Ok(())
}

fn clamp_radicand(x: f64, what: &str) -> Result<f64> {
    if x < -1e-10 {
        return Err(Error::NumericalInconsistency(format!(
            "{what} radicand = {x:.3e}"
        )));
    }
    Ok(x.max(0.0))
}

/// Sub-fidelity E(rho, sigma) = Tr[rs] + sqrt(2((Tr[rs])^2 - Tr[rsrs])).
/// sqrt(E) lower-bounds the fidelity.
pub fn sub_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_normalized_pair(rho, sigma)?;
    let pair = trace_pair(rho, sigma);
    let quartic = trace_quartic(rho, sigma);
    let radicand = clamp_radicand(pair * pair - quartic, "sub-fidelity")?;
    Ok(pair + (2.0 * radicand).sqrt())
}

/// Super-fidelity R(rho, sigma) = Tr[rs] + sqrt((1-Tr r^2)(1-Tr s^2)).
/// sqrt(R) upper-bounds the fidelity.
pub fn super_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_normalized_pair(rho, sigma)?;
    let pair = trace_pair(rho, sigma);
    let a = clamp_radicand(1.0 - trace_pair(rho, rho), "super-fidelity")?;
    let b = clamp_radicand(1.0 - trace_pair(sigma, sigma), "super-fidelity")?;
    Ok(pair + (a * b).sqrt())
}

/// Which state functional a swap test estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapTestKind {
    /// Tr[rho sigma], 2n+1 qubits.
    Pair,
    /// Tr[rho^2] of the first state, 2n+1 qubits.
    Purity,
    /// Tr[rho sigma rho sigma], 4n+1 qubits.
    Quartic,
}

/// Analytic value of the functional targeted by a swap test.
pub fn swap_test_target(kind: SwapTestKind, rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    match kind {
        SwapTestKind::Pair => trace_pair(rho, sigma),
        SwapTestKind::Purity => trace_pair(rho, rho),
        SwapTestKind::Quartic => trace_quartic(rho, sigma),
    }
}

/// Shot-based swap-test estimator. Samples the ancilla outcome from the
/// analytically computed p(0) = 1/2 + f/2, which is statistically
/// identical to running the circuit; the circuit itself is validated by
/// [`swap_test_circuit_probability`]. Returns (estimate, standard error).
pub fn swap_test_estimate(
    kind: SwapTestKind,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    shots: u64,
    rng_seed: u64,
) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be >= 1".into()));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let f = swap_test_target(kind, rho, sigma);
    let p0 = (0.5 + 0.5 * f).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut zeros = 0u64;
    for _ in 0..shots {
        if rng.random::<f64>() < p0 {
            zeros += 1;
        }
    }
    let phat = zeros as f64 / shots as f64;
    let estimate = 2.0 * phat - 1.0;
    let std_error = 2.0 * (phat * (1.0 - phat) / shots as f64).sqrt();
    Ok((estimate, std_error))
}

/// Gate-level simulation of the generalized swap test on 1 + N n qubits:
/// Hadamard on the ancilla, an ancilla-controlled cyclic register shift,
/// Hadamard again; returns the probability of reading the ancilla in 0.
/// Intended for tiny n as the cross-check of the sampled estimator.
pub fn swap_test_circuit_probability(
    kind: SwapTestKind,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let n = rho.n_qubits();
    let registers: Vec<&DensityMatrix> = match kind {
        SwapTestKind::Pair => vec![rho, sigma],
        SwapTestKind::Purity => vec![rho, rho],
        SwapTestKind::Quartic => vec![rho, sigma, rho, sigma],
    };
    let n_regs = registers.len();

    // ancilla |0><0| on the most significant qubit, then the registers
    let mut joint = {
        let mut anc = ComplexMatrix::zeros(2);
        anc[(0, 0)] = Complex64::ONE;
        anc
    };
    for reg in &registers {
        joint = joint.kron(reg.matrix());
    }

    let reg_bits = n_regs * n;
    let total_dim = joint.dim();
    let anc_mask = 1usize << reg_bits;

    let hadamard = {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        [
            [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        ]
    };
    let total_qubits = reg_bits + 1;
    crate::circuits::conjugate_single_qubit(&mut joint, total_qubits, 0, &hadamard);

    // controlled cyclic shift: register contents (r1, ..., rN) -> (r2, ..., rN, r1)
    let perm = |idx: usize| -> usize {
        if idx & anc_mask == 0 {
            return idx;
        }
        let r = idx & (anc_mask - 1);
        let top_bits = n;
        let low_bits = reg_bits - top_bits;
        let first = r >> low_bits;
        let rest = r & ((1usize << low_bits) - 1);
        let shifted = (rest << top_bits) | first;
        (idx & anc_mask) | shifted
    };
    let mut permuted = ComplexMatrix::zeros(total_dim);
    for i in 0..total_dim {
        let pi = perm(i);
        for j in 0..total_dim {
            permuted[(pi, perm(j))] = joint[(i, j)];
        }
    }
    joint = permuted;

    crate::circuits::conjugate_single_qubit(&mut joint, total_qubits, 0, &hadamard);

    let mut p0 = 0.0;
    for i in 0..total_dim {
        if i & anc_mask == 0 {
            p0 += joint[(i, i)].re;
        }
    }
    Ok(p0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{self, DensityMatrix};

    fn random_pair(n: usize, seed: u64) -> (DensityMatrix, DensityMatrix) {
        let rho = states::random_state_with_purity(n, 0.8, seed).unwrap();
        let sigma = states::random_state_with_purity(n, 0.6, seed + 1).unwrap();
        (rho, sigma)
    }

    #[test]
    fn fidelity_of_identical_states_is_one() {
        let rho = states::random_state_with_purity(2, 0.7, 3).unwrap();
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fidelity_of_pure_states_is_the_overlap() {
        let a = states::ghz(2, 0.0);
        let b = DensityMatrix::basis_state(2, 0);
        // |<GHZ|00>| = 1/sqrt(2)
        let f = fidelity(&a, &b).unwrap();
        assert!((f - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn fidelity_matches_trace_norm_definition() {
        let (rho, sigma) = random_pair(3, 100);
        let f = fidelity(&rho, &sigma).unwrap();
        let tn = numerics::trace_norm_product(rho.matrix(), sigma.matrix()).unwrap();
        assert!((f - tn).abs() < 1e-9);
    }

    #[test]
    fn truncate_with_full_m_is_exact() {
        let (rho, sigma) = random_pair(2, 200);
        let t = truncate(&rho, &sigma, 4).unwrap();
        assert!(t.truncated_exact.matrix().max_abs_diff(rho.matrix()) < 1e-9);
        assert!(t.truncated_error.matrix().max_abs_diff(sigma.matrix()) < 1e-9);
    }

    #[test]
    fn truncate_pure_exact_state_m1() {
        let psi = states::ghz(2, 0.0);
        let (_, sigma) = random_pair(2, 300);
        let t = truncate(&psi, &sigma, 1).unwrap();
        assert!(t.truncated_exact.matrix().max_abs_diff(psi.matrix()) < 1e-9);
        // truncated error = <psi|sigma|psi> |psi><psi|
        let overlap = psi.matrix().trace_product(sigma.matrix()).re;
        let want = psi
            .matrix()
            .scale(Complex64::new(overlap, 0.0));
        assert!(t.truncated_error.matrix().max_abs_diff(&want) < 1e-9);
    }

    #[test]
    fn truncation_contracts_the_trace() {
        for seed in 0..100u64 {
            let (rho, sigma) = random_pair(2, 1000 + 2 * seed);
            let m = 1 + (seed as usize % 4);
            let t = truncate(&rho, &sigma, m).unwrap();
            assert!(t.truncated_error.trace() <= 1.0 + 1e-10);
            assert!(t.truncated_exact.trace() <= 1.0 + 1e-10);
            let kept_sum: f64 = t.kept_eigenvalues.iter().sum();
            assert!((t.truncated_exact.trace() - kept_sum).abs() < 1e-9);
        }
    }

    #[test]
    fn truncate_rejects_bad_m() {
        let (rho, sigma) = random_pair(2, 400);
        assert!(matches!(
            truncate(&rho, &sigma, 0),
            Err(Error::MOutOfRange { .. })
        ));
        assert!(matches!(
            truncate(&rho, &sigma, 5),
            Err(Error::MOutOfRange { .. })
        ));
    }

    #[test]
    fn truncated_fidelities_at_full_rank_equal_exact() {
        let (rho, sigma) = random_pair(3, 500);
        let f = fidelity(&rho, &sigma).unwrap();
        let t = truncate(&rho, &sigma, 8).unwrap();
        assert!((truncated_fidelity(&t).unwrap() - f).abs() < 1e-9);
        assert!((generalized_fidelity(&t).unwrap() - f).abs() < 1e-9);
    }

    #[test]
    fn orthogonal_pure_states_have_zero_truncated_fidelity() {
        let a = DensityMatrix::basis_state(2, 0);
        let b = DensityMatrix::basis_state(2, 3);
        for m in 1..=4 {
            let t = truncate(&a, &b, m).unwrap();
            assert!(truncated_fidelity(&t).unwrap() < 1e-9);
        }
    }

    #[test]
    fn truncated_fidelity_sweep_is_monotone_and_sandwiched() {
        let (rho, sigma) = random_pair(3, 600);
        let f = fidelity(&rho, &sigma).unwrap();
        let mut prev_lower = 0.0;
        let mut prev_upper = f64::INFINITY;
        for m in 1..=8 {
            let t = truncate(&rho, &sigma, m).unwrap();
            let lower = truncated_fidelity(&t).unwrap();
            let upper = generalized_fidelity(&t).unwrap();
            assert!(lower <= f + 1e-9, "m={m}: {lower} vs F={f}");
            assert!(upper >= f - 1e-9, "m={m}: {upper} vs F={f}");
            assert!(lower >= prev_lower - 1e-9, "lower not monotone at m={m}");
            assert!(upper <= prev_upper + 1e-9, "upper not monotone at m={m}");
            prev_lower = lower;
            prev_upper = upper;
        }
    }

    #[test]
    fn tmatrix_path_matches_direct_path_with_exact_eigenvectors() {
        let (rho, sigma) = random_pair(3, 700);
        for m in [1usize, 2, 4] {
            let t = truncate(&rho, &sigma, m).unwrap();
            let tm = build_tmatrix(&t.kept_eigenvalues, &t.projector_basis, &sigma).unwrap();
            let (lower, upper) = tmatrix_fidelity(&tm, &t.kept_eigenvalues).unwrap();
            let direct_lower = truncated_fidelity(&t).unwrap();
            let direct_upper = generalized_fidelity(&t).unwrap();
            assert!(
                (lower - direct_lower).abs() < 1e-8,
                "m={m}: {lower} vs {direct_lower}"
            );
            assert!(
                (upper - direct_upper).abs() < 1e-8,
                "m={m}: {upper} vs {direct_upper}"
            );
        }
    }

    #[test]
    fn tmatrix_scalar_cases() {
        // identical pure states, m=1: T = [1]
        let psi = states::ghz(2, 0.4);
        let t = truncate(&psi, &psi, 1).unwrap();
        let tm = build_tmatrix(&t.kept_eigenvalues, &t.projector_basis, &psi).unwrap();
        let (lower, upper) = tmatrix_fidelity(&tm, &t.kept_eigenvalues).unwrap();
        assert!((lower - 1.0).abs() < 1e-9);
        assert!((upper - 1.0).abs() < 1e-9);

        // general m=1: lower = sqrt(T_11)
        let (rho, sigma) = random_pair(2, 800);
        let t = truncate(&rho, &sigma, 1).unwrap();
        let tm = build_tmatrix(&t.kept_eigenvalues, &t.projector_basis, &sigma).unwrap();
        let (lower, _) = tmatrix_fidelity(&tm, &t.kept_eigenvalues).unwrap();
        assert!((lower - tm.mat[(0, 0)].re.max(0.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sub_super_for_pure_pair_collapse_to_fidelity() {
        let a = states::ghz(2, 0.0);
        let b = DensityMatrix::basis_state(2, 0);
        let f = fidelity(&a, &b).unwrap();
        let e = sub_fidelity(&a, &b).unwrap();
        let r = super_fidelity(&a, &b).unwrap();
        assert!((e.sqrt() - f).abs() < 1e-9);
        assert!((r.sqrt() - f).abs() < 1e-9);
    }

    #[test]
    fn sub_super_hand_computed_maximally_mixed_qubit() {
        // rho = sigma = I/2: Tr[rs] = 1/2, Tr[rsrs] = Tr[I/16] = 1/8,
        // so E = 1/2 + sqrt(2 (1/4 - 1/8)) = 1 and R = 1/2 + 1/2 = 1
        let rho = DensityMatrix::maximally_mixed(1);
        assert!((trace_pair(&rho, &rho) - 0.5).abs() < 1e-12);
        assert!((trace_quartic(&rho, &rho) - 0.125).abs() < 1e-12);
        let e = sub_fidelity(&rho, &rho).unwrap();
        let r = super_fidelity(&rho, &rho).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);
        let f = fidelity(&rho, &rho).unwrap();
        assert!(e.sqrt() <= f + 1e-9);
        assert!(f <= r.sqrt() + 1e-9);
    }

    #[test]
    fn sub_super_sandwich_on_random_pairs() {
        for seed in 0..500u64 {
            let n = 1 + (seed as usize % 3);
            let (rho, sigma) = random_pair(n, 2000 + 3 * seed);
            let f = fidelity(&rho, &sigma).unwrap();
            let e = sub_fidelity(&rho, &sigma).unwrap();
            let r = super_fidelity(&rho, &sigma).unwrap();
            assert!(
                e.sqrt() <= f + 1e-9,
                "seed {seed}: sqrt(E) = {} > F = {f}",
                e.sqrt()
            );
            assert!(
                f <= r.sqrt() + 1e-9,
                "seed {seed}: F = {f} > sqrt(R) = {}",
                r.sqrt()
            );
        }
    }

    #[test]
    fn swap_test_trivial_cases() {
        let psi = states::ghz(1, 0.0);
        let (est, se) = swap_test_estimate(SwapTestKind::Quartic, &psi, &psi, 100, 1).unwrap();
        assert_eq!(est, 1.0);
        assert_eq!(se, 0.0);

        let zero = DensityMatrix::basis_state(1, 0);
        let one = DensityMatrix::basis_state(1, 1);
        let (est, se) =
            swap_test_estimate(SwapTestKind::Pair, &zero, &one, 1_000_000, 2).unwrap();
        assert!(est.abs() <= 4.0 * se.max(1e-3), "estimate {est}, se {se}");
    }

    #[test]
    fn swap_test_estimates_track_analytic_values() {
        let (rho, sigma) = random_pair(2, 900);
        for kind in [SwapTestKind::Pair, SwapTestKind::Purity, SwapTestKind::Quartic] {
            let target = swap_test_target(kind, &rho, &sigma);
            let mut hits = 0;
            for seed in 0..100 {
                let (est, se) =
                    swap_test_estimate(kind, &rho, &sigma, 1_000_000, 5000 + seed).unwrap();
                if (est - target).abs() <= 3.0 * se {
                    hits += 1;
                }
            }
            assert!(hits >= 99, "kind {kind:?}: only {hits}/100 within 3 sigma");
        }
    }

    #[test]
    fn swap_test_estimator_is_unbiased() {
        let (rho, sigma) = random_pair(1, 950);
        let target = swap_test_target(SwapTestKind::Pair, &rho, &sigma);
        let shots = 10_000u64;
        let n_seeds = 1000;
        let mut sum = 0.0;
        for seed in 0..n_seeds {
            let (est, _) =
                swap_test_estimate(SwapTestKind::Pair, &rho, &sigma, shots, 7_000 + seed).unwrap();
            sum += est;
        }
        let mean = sum / n_seeds as f64;
        let p0 = 0.5 + 0.5 * target;
        let sigma_one = 2.0 * (p0 * (1.0 - p0) / shots as f64).sqrt();
        let tol = 3.0 * sigma_one / (n_seeds as f64).sqrt();
        assert!(
            (mean - target).abs() <= tol,
            "mean {mean} vs target {target}, tol {tol}"
        );
    }

    #[test]
    fn circuit_crosscheck_single_qubit() {
        let (rho, sigma) = random_pair(1, 980);
        for kind in [SwapTestKind::Pair, SwapTestKind::Purity, SwapTestKind::Quartic] {
            let p0 = swap_test_circuit_probability(kind, &rho, &sigma).unwrap();
            let want = 0.5 + 0.5 * swap_test_target(kind, &rho, &sigma);
            assert!(
                (p0 - want).abs() < 1e-10,
                "kind {kind:?}: circuit {p0} vs analytic {want}"
            );
        }
    }
}
