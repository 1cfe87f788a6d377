//! Quantum Fisher information estimation: the exact QFI oracle, the
//! finite-shift approximation, truncated and sub/super-fidelity bounds,
//! their dynamics-agnostic combination, the analytic small-shift limit of
//! the truncated lower bound, fixed-spectrum maxima, generator-aware
//! literature bounds, and the purity-loss bound with stratified sampling.

use crate::circuits::{self, Generator};
use crate::error::{Error, Result};
use crate::fidelity;
use crate::numerics::ComplexMatrix;
use crate::states::{self, DensityMatrix};

/// Pairs with eigenvalue sum at or below this threshold are skipped in
/// spectral QFI sums, matching the convention that 0/0 terms vanish.
const EIG_PAIR_TOL: f64 = 1e-12;

/// Map a fidelity-like value to the induced QFI bound 8 (1 - f) / delta^2.
/// Round-off can push f marginally above 1; the bound is clamped at zero
/// so such values never produce a negative bound.
pub fn induced_bound(f_value: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ZeroDelta);
    }
    if !(0.0..=1.0 + 1e-9).contains(&f_value) {
        return Err(Error::InvalidArgument(format!(
            "fidelity value {f_value} outside [0, 1]"
        )));
    }
    Ok((8.0 * (1.0 - f_value) / (delta * delta)).max(0.0))
}

/// Exact QFI for phase encoding under G:
/// 2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<l_i|G|l_j>|^2.
pub fn exact_qfi(rho: &DensityMatrix, g: &Generator) -> Result<f64> {
    if rho.dim() != g.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: g.dim(),
        });
    }
    if !rho.is_normalized() {
        return Err(Error::InvalidArgument(
            "exact QFI expects a normalized state".into(),
        ));
    }
    let spec = rho.spectral()?;
    let m = generator_in_eigenbasis(g, &spec.eigenvectors);
    let d = rho.dim();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let sum = spec.eigenvalues[i] + spec.eigenvalues[j];
            if sum <= EIG_PAIR_TOL {
                continue;
            }
            let diff = spec.eigenvalues[i] - spec.eigenvalues[j];
            acc += 2.0 * diff * diff / sum * m[(i, j)].norm_sqr();
        }
    }
    Ok(acc)
}

fn generator_in_eigenbasis(g: &Generator, eigenvectors: &ComplexMatrix) -> ComplexMatrix {
    let gv = g.matrix().matmul(eigenvectors);
    eigenvectors.adjoint().matmul(&gv)
}

/// TQFI bounds: (induced(F_*), induced(F)) from the m-truncated pair.
/// lower <= I_delta <= upper, with equality at m = rank.
pub fn tqfi_bounds(
    rho_theta: &DensityMatrix,
    rho_error: &DensityMatrix,
    m: usize,
    delta: f64,
) -> Result<(f64, f64)> {
    let t = fidelity::truncate(rho_theta, rho_error, m)?;
    let f_trunc = fidelity::truncated_fidelity(&t)?;
    let f_gen = fidelity::generalized_fidelity(&t)?;
    Ok((
        induced_bound(f_gen.min(1.0 + 1e-9), delta)?,
        induced_bound(f_trunc.min(1.0 + 1e-9), delta)?,
    ))
}

/// SSQFI bounds: (induced(sqrt(R)), induced(sqrt(E))).
pub fn ssqfi_bounds(
    rho_theta: &DensityMatrix,
    rho_error: &DensityMatrix,
    delta: f64,
) -> Result<(f64, f64)> {
    let e = fidelity::sub_fidelity(rho_theta, rho_error)?;
    let r = fidelity::super_fidelity(rho_theta, rho_error)?;
    Ok((
        induced_bound(r.sqrt().min(1.0 + 1e-9), delta)?,
        induced_bound(e.sqrt().min(1.0 + 1e-9), delta)?,
    ))
}

/// Dynamics-agnostic combination: H = max of the lower bounds,
/// J = min of the upper bounds.
pub fn dynamics_agnostic_bounds(tqfi: (f64, f64), ssqfi: (f64, f64)) -> (f64, f64) {
    (tqfi.0.max(ssqfi.0), tqfi.1.min(ssqfi.1))
}

/// Every bound evaluated on one exact/error state pair.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub delta: f64,
    pub m: usize,
    pub f: f64,
    pub f_trunc: f64,
    pub f_gen: f64,
    pub sqrt_e: f64,
    pub sqrt_r: f64,
    pub i_delta: f64,
    pub tqfi_lower: f64,
    pub tqfi_upper: f64,
    pub ssqfi_lower: f64,
    pub ssqfi_upper: f64,
    pub h_delta: f64,
    pub j_delta: f64,
    pub exact_qfi: Option<f64>,
}

impl BoundsReport {
    pub const CSV_HEADER: &'static str = "delta,m,f,f_trunc,f_gen,sqrt_e,sqrt_r,i_delta,\
tqfi_lower,tqfi_upper,ssqfi_lower,ssqfi_upper,h_delta,j_delta,exact_qfi";

    pub fn csv_row(&self) -> String {
        let exact = match self.exact_qfi {
            Some(v) => format!("{v}"),
            None => String::new(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.delta,
            self.m,
            self.f,
            self.f_trunc,
            self.f_gen,
            self.sqrt_e,
            self.sqrt_r,
            self.i_delta,
            self.tqfi_lower,
            self.tqfi_upper,
            self.ssqfi_lower,
            self.ssqfi_upper,
            self.h_delta,
            self.j_delta,
            exact
        )
    }
}

/// Evaluate every fidelity and QFI bound on an exact/error pair. The
/// exact QFI column is filled when the generator is supplied.
pub fn bounds_report(
    rho_theta: &DensityMatrix,
    rho_error: &DensityMatrix,
    m: usize,
    delta: f64,
    generator: Option<&Generator>,
) -> Result<BoundsReport> {
    let f = fidelity::fidelity(rho_theta, rho_error)?;
    let t = fidelity::truncate(rho_theta, rho_error, m)?;
    let f_trunc = fidelity::truncated_fidelity(&t)?;
    let f_gen = fidelity::generalized_fidelity(&t)?;
    let e = fidelity::sub_fidelity(rho_theta, rho_error)?;
    let r = fidelity::super_fidelity(rho_theta, rho_error)?;
    let sqrt_e = e.sqrt();
    let sqrt_r = r.sqrt();

    let i_delta = induced_bound(f, delta)?;
    let tqfi = (
        induced_bound(f_gen.min(1.0 + 1e-9), delta)?,
        induced_bound(f_trunc.min(1.0 + 1e-9), delta)?,
    );
    let ssqfi = (
        induced_bound(sqrt_r.min(1.0 + 1e-9), delta)?,
        induced_bound(sqrt_e.min(1.0 + 1e-9), delta)?,
    );
    let (h_delta, j_delta) = dynamics_agnostic_bounds(tqfi, ssqfi);

    let exact = match generator {
        Some(g) => Some(exact_qfi(rho_theta, g)?),
        None => None,
    };

    Ok(BoundsReport {
        delta,
        m,
        f,
        f_trunc,
        f_gen,
        sqrt_e,
        sqrt_r,
        i_delta,
        tqfi_lower: tqfi.0,
        tqfi_upper: tqfi.1,
        ssqfi_lower: ssqfi.0,
        ssqfi_upper: ssqfi.1,
        h_delta,
        j_delta,
        exact_qfi: exact,
    })
}

/// Small-shift limit of the truncated QFI lower bound.
///
/// For a strictly sub-normalized truncation (Tr rho^(m) < 1) the limit is
/// the spectral QFI sum restricted to the kept m x m block. When the
/// truncation captures the full trace (m >= rank), the generalized
/// fidelity's tail term vanishes identically and the limit picks up the
/// coupling of the kept block to its orthogonal complement.
pub fn tqfi_limit_analytic(rho: &DensityMatrix, g: &Generator, m: usize) -> Result<f64> {
    let d = rho.dim();
    if m < 1 || m > d {
        return Err(Error::MOutOfRange { m, dim: d });
    }
    if rho.dim() != g.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: g.dim(),
        });
    }
    let spec = rho.spectral()?;
    let gm = generator_in_eigenbasis(g, &spec.eigenvectors);

    let mut block = 0.0;
    for i in 0..m {
        for j in 0..m {
            let sum = spec.eigenvalues[i] + spec.eigenvalues[j];
            if sum <= EIG_PAIR_TOL {
                continue;
            }
            let diff = spec.eigenvalues[i] - spec.eigenvalues[j];
            block += 2.0 * diff * diff / sum * gm[(i, j)].norm_sqr();
        }
    }

    let kept_trace: f64 = spec.eigenvalues[..m].iter().sum();
    if kept_trace >= 1.0 - 1e-9 {
        for k in 0..m {
            for j in m..d {
                block += 4.0 * spec.eigenvalues[k].max(0.0) * gm[(k, j)].norm_sqr();
            }
        }
    }
    Ok(block)
}

/// Heisenberg limit 4 n^2 for pure probes under collective-Z encoding.
pub fn max_qfi_pure(n_qubits: usize) -> Result<f64> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    Ok(4.0 * (n_qubits * n_qubits) as f64)
}

/// Fixed-spectrum QFI maximum:
/// (1/2) sum_k lambda_{k, d-k+1} (g_k - g_{d-k+1})^2, where
/// lambda_{k,l} = (l_k - l_l)^2 / (l_k + l_l) and vanishing-weight pairs
/// are skipped.
pub fn max_qfi_mixed(spectrum: &[f64], g: &ComplexMatrix) -> Result<f64> {
    let d = g.dim();
    states::validate_spectrum(spectrum, d)?;
    let geig = crate::numerics::eig_hermitian(g)?;
    let gvals = &geig.values;
    let mut acc = 0.0;
    for k in 0..d {
        let partner = d - 1 - k;
        let sum = spectrum[k] + spectrum[partner];
        if sum <= EIG_PAIR_TOL {
            continue;
        }
        let lam = (spectrum[k] - spectrum[partner]).powi(2) / sum;
        acc += 0.5 * lam * (gvals[k] - gvals[partner]).powi(2);
    }
    Ok(acc)
}

/// Generator-aware literature bounds:
/// lower = 4 (Tr[rho^2 G^2] - Tr[(rho G)^2]),
/// upper = 4 (Tr[rho G^2] - (Tr[rho G])^2).
/// The lower bound saturates exactly on states of rank <= 2.
pub fn generator_aware_bounds(rho: &DensityMatrix, g: &Generator) -> Result<(f64, f64)> {
    if rho.dim() != g.dim() {
        return Err(Error::DimMismatch {
            left: rho.dim(),
            right: g.dim(),
        });
    }
    let gm = g.matrix();
    let rho_g = rho.matrix().matmul(gm);
    let rho_sq = rho.matrix().matmul(rho.matrix());
    let g_sq = gm.matmul(gm);
    let lower = 4.0 * (rho_sq.trace_product(&g_sq).re - rho_g.trace_product(&rho_g).re);
    let mean_g = rho.matrix().trace_product(gm).re;
    let upper = 4.0 * (rho.matrix().trace_product(&g_sq).re - mean_g * mean_g);
    Ok((lower, upper))
}

/// Purity-loss bound evaluated with a deterministic stratified sampler.
#[derive(Debug, Clone)]
pub struct PurityLossReport {
    /// 4 (Tr[rho^2 G^2] - Tr[(rho G)^2]).
    pub l_exact: f64,
    /// Tr[rho^2] - Tr[rho_ave^2].
    pub delta_nu: f64,
    /// Variance of the parameter jitter, (Delta x)^2.
    pub variance_dx2: f64,
    /// Number of strata K.
    pub strata: usize,
    /// 2 delta_nu / (Delta x)^2.
    pub l_stratified: f64,
    pub rho_ave_purity: f64,
}

impl PurityLossReport {
    pub const CSV_HEADER: &'static str =
        "l_exact,delta_nu,variance_dx2,strata,l_stratified,rho_ave_purity";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.l_exact,
            self.delta_nu,
            self.variance_dx2,
            self.strata,
            self.l_stratified,
            self.rho_ave_purity
        )
    }
}

/// Purity-loss bound from an ensemble-averaged state. The jittered angles
/// theta_j are the K equal-probability stratum medians of a Gaussian
/// centered at theta with variance dx2, so the sampler is deterministic;
/// `_rng_seed` is accepted for interface stability and recorded by
/// callers, but no randomness is consumed.
pub fn purity_loss_bound(
    rho: &DensityMatrix,
    g: &Generator,
    theta: f64,
    dx2: f64,
    strata: usize,
    _rng_seed: u64,
) -> Result<PurityLossReport> {
    if dx2 <= 0.0 {
        return Err(Error::InvalidArgument("dx2 must be positive".into()));
    }
    if strata == 0 {
        return Err(Error::InvalidArgument("need at least one stratum".into()));
    }
    let (l_exact, _) = generator_aware_bounds(rho, g)?;

    let sigma = dx2.sqrt();
    let d = rho.dim();
    let mut ave = ComplexMatrix::zeros(d);
    for j in 0..strata {
        let quantile = (j as f64 + 0.5) / strata as f64;
        let theta_j = theta + sigma * inverse_normal_cdf(quantile);
        let encoded = circuits::encode_phase(rho, g, theta_j)?;
        ave = ave.add(encoded.matrix());
    }
    let ave = ave.scale(num_complex::Complex64::new(1.0 / strata as f64, 0.0));
    let rho_ave = DensityMatrix::new_normalized(rho.n_qubits(), ave.hermitian_part())?;

    let probe_purity = states::purity(rho);
    let ave_purity = states::purity(&rho_ave);
    let delta_nu = probe_purity - ave_purity;
    Ok(PurityLossReport {
        l_exact,
        delta_nu,
        variance_dx2: dx2,
        strata,
        l_stratified: 2.0 * delta_nu / dx2,
        rho_ave_purity: ave_purity,
    })
}

/// Smallest K whose purity-loss circuit budget (K^2 + K)/2 + 1 covers the
/// truncated-bound budget 2 t n ln(n) + n + (n + n^2)/2. Natural log.
pub fn strata_count(n_qubits: usize, training_iterations: usize) -> usize {
    let n = n_qubits as f64;
    let rhs = 2.0 * training_iterations as f64 * n * n.ln() + n + (n + n * n) / 2.0;
    let mut k = (((8.0 * (rhs - 1.0).max(0.0) + 1.0).sqrt() - 1.0) / 2.0).floor() as usize;
    k = k.saturating_sub(2).max(1);
    while (((k * k + k) / 2 + 1) as f64) < rhs {
        k += 1;
    }
    k
}

/// Inverse standard normal CDF (Acklam's rational approximation,
/// |relative error| < 1.2e-9).
fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile must be in (0, 1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -((((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0))
    }
}
