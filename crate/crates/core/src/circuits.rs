//! Parameterized state preparation: layered hardware-efficient ansatz,
//! phase encoding under a Hermitian generator, and parameter-shift
//! gradients for expectation-value costs.
//!
//! Conventions (fixed, echoed in experiment metadata):
//! - rotations are half-angle, R_a(alpha) = exp(-i alpha sigma_a / 2), so
//!   the parameter-shift rule is exact with +-pi/2 shifts;
//! - qubit 0 is the most significant bit of a basis index;
//! - each layer is one Ry and one Rz per qubit followed by a CNOT brick,
//!   with even layers pairing (0,1),(2,3),... and odd layers (1,2),(3,4),...
//!   (no wrap-around), and the final layer keeps its brick.

use crate::error::{Error, Result};
use crate::numerics::{self, ComplexMatrix};
use crate::states::DensityMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotAxis {
    Y,
    Z,
}

/// One slot of an ansatz layout: a parameterized rotation or a CNOT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateSlot {
    Rot {
        qubit: usize,
        axis: RotAxis,
        param_index: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// Layered parameterized circuit description.
#[derive(Debug, Clone)]
pub struct Ansatz {
    n_qubits: usize,
    layers: usize,
    layout: Vec<GateSlot>,
    param_count: usize,
}

impl Ansatz {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn layout(&self) -> &[GateSlot] {
        &self.layout
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    /// Structured per-slot text description for experiment logs.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "ansatz n_qubits={} layers={} params={}\n",
            self.n_qubits, self.layers, self.param_count
        ));
        for (idx, slot) in self.layout.iter().enumerate() {
            match slot {
                GateSlot::Rot {
                    qubit,
                    axis,
                    param_index,
                } => {
                    let a = match axis {
                        RotAxis::Y => "ry",
                        RotAxis::Z => "rz",
                    };
                    out.push_str(&format!("slot {idx}: {a} q{qubit} param {param_index}\n"));
                }
                GateSlot::Cnot { control, target } => {
                    out.push_str(&format!("slot {idx}: cnot q{control} -> q{target}\n"));
                }
            }
        }
        out
    }
}

/// Layered hardware-efficient ansatz: per layer one Ry and one Rz per
/// qubit, then the alternating CNOT brick. Parameter count is 2 n layers.
pub fn build_hw_efficient(n_qubits: usize, layers: usize) -> Ansatz {
    assert!(n_qubits >= 2, "ansatz needs at least two qubits");
    assert!(layers >= 1, "ansatz needs at least one layer");
    let mut layout = Vec::new();
    let mut param_index = 0;
    for layer in 0..layers {
        for qubit in 0..n_qubits {
            layout.push(GateSlot::Rot {
                qubit,
                axis: RotAxis::Y,
                param_index,
            });
            param_index += 1;
            layout.push(GateSlot::Rot {
                qubit,
                axis: RotAxis::Z,
                param_index,
            });
            param_index += 1;
        }
        let first = if layer % 2 == 0 { 0 } else { 1 };
        let mut control = first;
        while control + 1 < n_qubits {
            layout.push(GateSlot::Cnot {
                control,
                target: control + 1,
            });
            control += 2;
        }
    }
    Ansatz {
        n_qubits,
        layers,
        layout,
        param_count: param_index,
    }
}

/// Hermitian generator of the phase encoding, with a fast path for
/// generators diagonal in the computational basis.
#[derive(Debug, Clone)]
pub struct Generator {
    matrix: ComplexMatrix,
    diagonal: Option<Vec<f64>>,
    locality_note: String,
}

impl Generator {
    pub fn from_matrix(matrix: ComplexMatrix, locality_note: impl Into<String>) -> Result<Self> {
        let res = matrix.hermitian_residual();
        if res > 1e-10 * matrix.max_abs().max(1.0) {
            return Err(Error::NonHermitianInput {
                max_asymmetry: res,
            });
        }
        let d = matrix.dim();
        let mut off = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    off = off.max(matrix[(i, j)].norm());
                }
            }
        }
        let diagonal = if off < 1e-14 {
            Some((0..d).map(|i| matrix[(i, i)].re).collect())
        } else {
            None
        };
        Ok(Self {
            matrix,
            diagonal,
            locality_note: locality_note.into(),
        })
    }

    /// Magnetometry generator G = sum_i Z_i; diagonal entry for basis
    /// state z is n minus twice its Hamming weight.
    pub fn collective_z(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let diag: Vec<f64> = (0..d)
            .map(|z: usize| (n_qubits as i64 - 2 * z.count_ones() as i64) as f64)
            .collect();
        Self {
            matrix: ComplexMatrix::from_diag(&diag),
            diagonal: Some(diag),
            locality_note: "sum of single-qubit Z terms".into(),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        self.diagonal.as_deref()
    }

    pub fn locality_note(&self) -> &str {
        &self.locality_note
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

fn rotation_kernel(axis: RotAxis, angle: f64) -> [[Complex64; 2]; 2] {
    let half = 0.5 * angle;
    match axis {
        RotAxis::Y => {
            let (s, c) = half.sin_cos();
            [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ]
        }
        RotAxis::Z => [
            [Complex64::from_polar(1.0, -half), Complex64::ZERO],
            [Complex64::ZERO, Complex64::from_polar(1.0, half)],
        ],
    }
}

fn bit_mask(n_qubits: usize, qubit: usize) -> usize {
    1usize << (n_qubits - 1 - qubit)
}

/// rho <- (U_q rho U_q^dag) for a single-qubit kernel u on `qubit`.
pub(crate) fn conjugate_single_qubit(
    mat: &mut ComplexMatrix,
    n_qubits: usize,
    qubit: usize,
    u: &[[Complex64; 2]; 2],
) {
    let d = mat.dim();
    let mask = bit_mask(n_qubits, qubit);
    // left multiply: rows
    for i0 in 0..d {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        for j in 0..d {
            let r0 = mat[(i0, j)];
            let r1 = mat[(i1, j)];
            mat[(i0, j)] = u[0][0] * r0 + u[0][1] * r1;
            mat[(i1, j)] = u[1][0] * r0 + u[1][1] * r1;
        }
    }
    // right multiply by u^dag: columns
    for j0 in 0..d {
        if j0 & mask != 0 {
            continue;
        }
        let j1 = j0 | mask;
        for i in 0..d {
            let c0 = mat[(i, j0)];
            let c1 = mat[(i, j1)];
            mat[(i, j0)] = c0 * u[0][0].conj() + c1 * u[0][1].conj();
            mat[(i, j1)] = c0 * u[1][0].conj() + c1 * u[1][1].conj();
        }
    }
}

/// rho <- CNOT rho CNOT with the given control and target qubits.
fn conjugate_cnot(mat: &mut ComplexMatrix, n_qubits: usize, control: usize, target: usize) {
    let d = mat.dim();
    let cmask = bit_mask(n_qubits, control);
    let tmask = bit_mask(n_qubits, target);
    let perm = |i: usize| if i & cmask != 0 { i ^ tmask } else { i };
    for i in 0..d {
        let pi = perm(i);
        if pi > i {
            for j in 0..d {
                let a = mat[(i, j)];
                mat[(i, j)] = mat[(pi, j)];
                mat[(pi, j)] = a;
            }
        }
    }
    for j in 0..d {
        let pj = perm(j);
        if pj > j {
            for i in 0..d {
                let a = mat[(i, j)];
                mat[(i, j)] = mat[(i, pj)];
                mat[(i, pj)] = a;
            }
        }
    }
}

fn statevector_single_qubit(
    psi: &mut [Complex64],
    n_qubits: usize,
    qubit: usize,
    u: &[[Complex64; 2]; 2],
) {
    let mask = bit_mask(n_qubits, qubit);
    for i0 in 0..psi.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let a0 = psi[i0];
        let a1 = psi[i1];
        psi[i0] = u[0][0] * a0 + u[0][1] * a1;
        psi[i1] = u[1][0] * a0 + u[1][1] * a1;
    }
}

fn statevector_cnot(psi: &mut [Complex64], n_qubits: usize, control: usize, target: usize) {
    let cmask = bit_mask(n_qubits, control);
    let tmask = bit_mask(n_qubits, target);
    for i in 0..psi.len() {
        if i & cmask != 0 && i & tmask == 0 {
            psi.swap(i, i | tmask);
        }
    }
}

fn check_params(ansatz: &Ansatz, params: &[f64]) -> Result<()> {
    if params.len() != ansatz.param_count {
        return Err(Error::ParamLengthMismatch {
            expected: ansatz.param_count,
            got: params.len(),
        });
    }
    Ok(())
}

/// rho_alpha = U_alpha rho U_alpha^dag via per-gate kernels; the full
/// 2^n x 2^n unitary is never formed.
pub fn apply(ansatz: &Ansatz, params: &[f64], rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_params(ansatz, params)?;
    if rho.n_qubits() != ansatz.n_qubits {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: 1usize << ansatz.n_qubits,
        });
    }
    let n = ansatz.n_qubits;
    let mut mat = rho.matrix().clone();
    for slot in &ansatz.layout {
        match *slot {
            GateSlot::Rot {
                qubit,
                axis,
                param_index,
            } => {
                let u = rotation_kernel(axis, params[param_index]);
                conjugate_single_qubit(&mut mat, n, qubit, &u);
            }
            GateSlot::Cnot { control, target } => conjugate_cnot(&mut mat, n, control, target),
        }
    }
    if rho.is_normalized() {
        DensityMatrix::new_normalized(n, mat)
    } else {
        DensityMatrix::new_subnormalized(n, mat)
    }
}

/// U_alpha^dag rho U_alpha: the layout walked backwards with negated
/// rotation angles.
pub fn apply_inverse(
    ansatz: &Ansatz,
    params: &[f64],
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_params(ansatz, params)?;
    let n = ansatz.n_qubits;
    let mut mat = rho.matrix().clone();
    for slot in ansatz.layout.iter().rev() {
        match *slot {
            GateSlot::Rot {
                qubit,
                axis,
                param_index,
            } => {
                let u = rotation_kernel(axis, -params[param_index]);
                conjugate_single_qubit(&mut mat, n, qubit, &u);
            }
            GateSlot::Cnot { control, target } => conjugate_cnot(&mut mat, n, control, target),
        }
    }
    if rho.is_normalized() {
        DensityMatrix::new_normalized(n, mat)
    } else {
        DensityMatrix::new_subnormalized(n, mat)
    }
}

/// U_alpha |psi> on a state vector; used by pure-state fast paths.
pub fn apply_to_statevector(
    ansatz: &Ansatz,
    params: &[f64],
    psi: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_params(ansatz, params)?;
    let n = ansatz.n_qubits;
    if psi.len() != 1usize << n {
        return Err(Error::DimMismatch {
            left: psi.len(),
            right: 1usize << n,
        });
    }
    let mut out = psi.to_vec();
    for slot in &ansatz.layout {
        match *slot {
            GateSlot::Rot {
                qubit,
                axis,
                param_index,
            } => {
                let u = rotation_kernel(axis, params[param_index]);
                statevector_single_qubit(&mut out, n, qubit, &u);
            }
            GateSlot::Cnot { control, target } => statevector_cnot(&mut out, n, control, target),
        }
    }
    Ok(out)
}

/// U_alpha^dag |psi>; prepares estimated eigenvectors from basis labels.
pub fn apply_inverse_to_statevector(
    ansatz: &Ansatz,
    params: &[f64],
    psi: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_params(ansatz, params)?;
    let n = ansatz.n_qubits;
    if psi.len() != 1usize << n {
        return Err(Error::DimMismatch {
            left: psi.len(),
            right: 1usize << n,
        });
    }
    let mut out = psi.to_vec();
    for slot in ansatz.layout.iter().rev() {
        match *slot {
            GateSlot::Rot {
                qubit,
                axis,
                param_index,
            } => {
                let u = rotation_kernel(axis, -params[param_index]);
                statevector_single_qubit(&mut out, n, qubit, &u);
            }
            GateSlot::Cnot { control, target } => statevector_cnot(&mut out, n, control, target),
        }
    }
    Ok(out)
}

/// rho_theta = W_theta rho W_theta^dag with W_theta = exp(-i theta G).
/// Diagonal generators use elementwise phase multiplication; the dense
/// path goes through the matrix exponential.
pub fn encode_phase(rho: &DensityMatrix, g: &Generator, theta: f64) -> Result<DensityMatrix> {
    if rho.dim() != g.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: g.dim(),
        });
    }
    let mat = match g.diagonal() {
        Some(diag) => encode_diag(rho.matrix(), diag, theta),
        None => encode_dense(rho.matrix(), g.matrix(), theta)?,
    };
    if rho.is_normalized() {
        DensityMatrix::new_normalized(rho.n_qubits(), mat)
    } else {
        DensityMatrix::new_subnormalized(rho.n_qubits(), mat)
    }
}

fn encode_diag(mat: &ComplexMatrix, diag: &[f64], theta: f64) -> ComplexMatrix {
    let d = mat.dim();
    ComplexMatrix::from_fn(d, |i, j| {
        mat[(i, j)] * Complex64::from_polar(1.0, -theta * (diag[i] - diag[j]))
    })
}

fn encode_dense(mat: &ComplexMatrix, g: &ComplexMatrix, theta: f64) -> Result<ComplexMatrix> {
    let w = numerics::exp_i_hermitian(g, theta)?;
    Ok(w.matmul(mat).matmul(&w.adjoint()).hermitian_part())
}

/// Parameter-shift derivative of an expectation-value cost with respect
/// to one rotation angle: [cost(a + pi/2 e_idx) - cost(a - pi/2 e_idx)] / 2.
pub fn param_shift_grad<F>(cost: F, ansatz: &Ansatz, params: &[f64], index: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    check_params(ansatz, params)?;
    let is_rotation = ansatz.layout.iter().any(
        |slot| matches!(slot, GateSlot::Rot { param_index, .. } if *param_index == index),
    );
    if !is_rotation {
        return Err(Error::NonRotationSlot { param_index: index });
    }
    let mut plus = params.to_vec();
    let mut minus = params.to_vec();
    plus[index] += FRAC_PI_2;
    minus[index] -= FRAC_PI_2;
    Ok((cost(&plus)? - cost(&minus)?) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity;
    use crate::states::{self, DensityMatrix};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(p: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..p).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect()
    }

    #[test]
    fn brick_layout_counts() {
        let a = build_hw_efficient(2, 1);
        assert_eq!(a.param_count(), 4);
        let cnots = a
            .layout()
            .iter()
            .filter(|s| matches!(s, GateSlot::Cnot { .. }))
            .count();
        assert_eq!(cnots, 1);

        let a = build_hw_efficient(4, 3);
        assert_eq!(a.param_count(), 24);

        let a = build_hw_efficient(8, 3);
        assert_eq!(a.param_count(), 48);
        // even layers pair (0,1),(2,3),(4,5),(6,7); odd layers (1,2),(3,4),(5,6)
        let cnots = a
            .layout()
            .iter()
            .filter(|s| matches!(s, GateSlot::Cnot { .. }))
            .count();
        assert_eq!(cnots, 4 + 3 + 4);
    }

    #[test]
    fn every_param_used_once() {
        let a = build_hw_efficient(5, 4);
        let mut seen = vec![0usize; a.param_count()];
        for slot in a.layout() {
            if let GateSlot::Rot { param_index, .. } = slot {
                seen[*param_index] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn zero_params_leave_only_the_bricks() {
        let a = build_hw_efficient(3, 2);
        let rho = states::random_state_with_purity(3, 0.9, 7).unwrap();
        let out = apply(&a, &vec![0.0; a.param_count()], &rho).unwrap();

        let mut expected = rho.matrix().clone();
        for slot in a.layout() {
            if let GateSlot::Cnot { control, target } = slot {
                conjugate_cnot(&mut expected, 3, *control, *target);
            }
        }
        assert!(out.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn apply_preserves_trace_and_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = build_hw_efficient(3, 3);
        let rho = states::random_state_with_purity(3, 0.8, 3).unwrap();
        for _ in 0..5 {
            let params = random_params(a.param_count(), &mut rng);
            let out = apply(&a, &params, &rho).unwrap();
            assert!((out.trace() - 1.0).abs() < 1e-10);
            assert!((states::purity(&out) - states::purity(&rho)).abs() < 1e-10);
        }
    }

    #[test]
    fn inverse_circuit_recovers_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = build_hw_efficient(3, 2);
        let rho = states::random_state_with_purity(3, 0.7, 11).unwrap();
        let params = random_params(a.param_count(), &mut rng);
        let there = apply(&a, &params, &rho).unwrap();
        let back = apply_inverse(&a, &params, &there).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-9);
    }

    #[test]
    fn statevector_and_density_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let a = build_hw_efficient(3, 2);
        let params = random_params(a.param_count(), &mut rng);
        let mut psi = vec![Complex64::ZERO; 8];
        psi[0] = Complex64::ONE;
        let psi_out = apply_to_statevector(&a, &params, &psi).unwrap();
        let rho_out = apply(
            &a,
            &params,
            &DensityMatrix::basis_state(3, 0),
        )
        .unwrap();
        let from_psi = ComplexMatrix::outer(&psi_out);
        assert!(rho_out.matrix().max_abs_diff(&from_psi) < 1e-12);

        let back = apply_inverse_to_statevector(&a, &params, &psi_out).unwrap();
        assert!((back[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn param_length_is_checked() {
        let a = build_hw_efficient(2, 1);
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            apply(&a, &[0.0; 3], &rho),
            Err(Error::ParamLengthMismatch { .. })
        ));
    }

    #[test]
    fn encode_at_zero_is_identity() {
        let g = Generator::collective_z(2);
        let rho = states::random_state_with_purity(2, 0.9, 19).unwrap();
        let out = encode_phase(&rho, &g, 0.0).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn encode_fixed_point_for_commuting_state() {
        // diagonal rho commutes with the diagonal generator
        let g = Generator::collective_z(2);
        let rho = DensityMatrix::new_normalized(
            2,
            ComplexMatrix::from_diag(&[0.4, 0.3, 0.2, 0.1]),
        )
        .unwrap();
        let out = encode_phase(&rho, &g, 0.83).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn encode_preserves_spectrum() {
        let g = Generator::collective_z(3);
        let rho = states::random_state_with_purity(3, 0.85, 23).unwrap();
        let before = rho.spectral().unwrap();
        let after = encode_phase(&rho, &g, 0.41).unwrap().spectral().unwrap();
        for (a, b) in before.eigenvalues.iter().zip(after.eigenvalues.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn encode_additivity() {
        let g = Generator::collective_z(2);
        let rho = states::random_state_with_purity(2, 0.75, 29).unwrap();
        let two_step = encode_phase(&encode_phase(&rho, &g, 0.3).unwrap(), &g, 0.5).unwrap();
        let one_step = encode_phase(&rho, &g, 0.8).unwrap();
        assert!(two_step.matrix().max_abs_diff(one_step.matrix()) < 1e-9);
    }

    #[test]
    fn diagonal_fast_path_matches_dense_exponential() {
        let g = Generator::collective_z(3);
        let rho = states::random_state_with_purity(3, 0.9, 31).unwrap();
        let theta = 0.37;
        let fast = encode_diag(rho.matrix(), g.diagonal().unwrap(), theta);
        let dense = encode_dense(rho.matrix(), g.matrix(), theta).unwrap();
        assert!(fast.max_abs_diff(&dense) < 1e-10);
    }

    #[test]
    fn encoded_fidelity_is_theta_invariant() {
        let g = Generator::collective_z(3);
        let rho = states::random_state_with_purity(3, 0.88, 37).unwrap();
        let delta = 0.1;
        let reference = {
            let a = encode_phase(&rho, &g, 0.0).unwrap();
            let b = encode_phase(&rho, &g, delta).unwrap();
            fidelity::fidelity(&a, &b).unwrap()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..10 {
            let theta = rng.random_range(-3.0..3.0);
            let a = encode_phase(&rho, &g, theta).unwrap();
            let b = encode_phase(&rho, &g, theta + delta).unwrap();
            let f = fidelity::fidelity(&a, &b).unwrap();
            assert!((f - reference).abs() < 1e-9, "theta={theta}: {f} vs {reference}");
        }
    }

    #[test]
    fn param_shift_trivial_and_analytic() {
        let a = build_hw_efficient(2, 1);
        let params = vec![0.3, 0.1, 0.2, 0.4];

        // constant cost
        let grad = param_shift_grad(|_| Ok(1.0), &a, &params, 0).unwrap();
        assert_eq!(grad, 0.0);

        // <Z> on qubit 0 after Ry(alpha) from |00>: cos(alpha), gradient -sin
        let zcost = |p: &[f64]| -> Result<f64> {
            let rho = apply(&a, p, &DensityMatrix::basis_state(2, 0))?;
            let m = rho.matrix();
            // Z on qubit 0: +1 for indices 0..2, -1 for 2..4
            Ok(m[(0, 0)].re + m[(1, 1)].re - m[(2, 2)].re - m[(3, 3)].re)
        };
        for alpha in [0.0, FRAC_PI_2, 1.1] {
            let mut p = vec![0.0; 4];
            p[0] = alpha;
            let grad = param_shift_grad(zcost, &a, &p, 0).unwrap();
            assert!(
                (grad + alpha.sin()).abs() < 1e-10,
                "alpha={alpha}: grad {grad}"
            );
        }
    }

    #[test]
    fn param_shift_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let a = build_hw_efficient(3, 2);
        let rho0 = states::random_state_with_purity(3, 0.9, 61).unwrap();
        let cost = |p: &[f64]| -> Result<f64> {
            let rho = apply(&a, p, &rho0)?;
            Ok(rho.matrix()[(0, 0)].re)
        };
        let params = random_params(a.param_count(), &mut rng);
        for index in [0usize, 5, 11] {
            let ps = param_shift_grad(cost, &a, &params, index).unwrap();
            let h = 1e-5;
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus[index] += h;
            minus[index] -= h;
            let fd = (cost(&plus).unwrap() - cost(&minus).unwrap()) / (2.0 * h);
            assert!((ps - fd).abs() < 1e-5, "index {index}: {ps} vs {fd}");
        }
    }

    #[test]
    fn param_shift_rejects_bad_index() {
        let a = build_hw_efficient(2, 1);
        assert!(matches!(
            param_shift_grad(|_| Ok(0.0), &a, &[0.0; 4], 4),
            Err(Error::NonRotationSlot { .. })
        ));
    }
}
