//! The experiment runners behind each subcommand. Every runner derives
//! per-work-unit seeds from the base seed, collects results in unit
//! order, and writes metadata-prefixed CSV, so identical configurations
//! reproduce byte-identical outputs under any worker count.

use crate::config::{ExperimentConfig, ExperimentKind, InputState};
use crate::{derive_seed, write_csv, CliError};
use qfisher::circuits::{self, Ansatz, Generator};
use qfisher::optimize::{self, OptResult, OptimizerConfig};
use qfisher::qfi::{self, BoundsReport};
use qfisher::states::{self, DensityMatrix};
use rayon::prelude::*;

/// Run a closure inside a rayon pool of the configured width (0 keeps
/// the global default pool).
pub fn with_workers<T: Send>(
    workers: usize,
    run: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(run)
    }
}

fn optimizer_config(cfg: &ExperimentConfig, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        method: cfg.method,
        max_iters: cfg.max_iters,
        restarts: cfg.restarts,
        initial_step: cfg.initial_step,
        learning_rate: cfg.learning_rate,
        convergence_tol: cfg.convergence_tol,
        seed,
    }
}

fn input_state(
    cfg: &ExperimentConfig,
    purity: f64,
    unit: u64,
) -> Result<DensityMatrix, CliError> {
    Ok(match cfg.input_state {
        InputState::Zero => DensityMatrix::basis_state(cfg.n, 0),
        InputState::Ghz => states::ghz(cfg.n, 0.0),
        InputState::MaximallyMixed => DensityMatrix::maximally_mixed(cfg.n),
        InputState::RandomPurity => {
            states::random_state_with_purity(cfg.n, purity, derive_seed(cfg.seed, unit))?
        }
    })
}

fn check_report(label: &str, report: &BoundsReport) -> Result<(), CliError> {
    let tol = 1e-8;
    let ok = report.h_delta <= report.i_delta + tol
        && report.i_delta <= report.j_delta + tol
        && report.f_trunc <= report.f + tol
        && report.f <= report.f_gen + tol
        && report.sqrt_e <= report.f + tol
        && report.f <= report.sqrt_r + tol;
    if !ok {
        return Err(CliError::Numerical(format!(
            "sandwich breach at {label}: H={} I={} J={}",
            report.h_delta, report.i_delta, report.j_delta
        )));
    }
    Ok(())
}

/// The VQFIE training objective: prepare the probe with the ansatz,
/// encode the exact and error states, and take the dynamics-agnostic
/// lower bound H_delta.
pub fn probe_cost(
    ansatz: &Ansatz,
    params: &[f64],
    input: &DensityMatrix,
    g: &Generator,
    theta: f64,
    delta: f64,
    m: usize,
) -> qfisher::Result<f64> {
    let probe = circuits::apply(ansatz, params, input)?;
    let rho_theta = circuits::encode_phase(&probe, g, theta)?;
    let rho_error = circuits::encode_phase(&probe, g, theta + delta)?;
    let tqfi = qfi::tqfi_bounds(&rho_theta, &rho_error, m, delta)?;
    let ssqfi = qfi::ssqfi_bounds(&rho_theta, &rho_error, delta)?;
    Ok(qfi::dynamics_agnostic_bounds(tqfi, ssqfi).0)
}

/// Pure-probe cost along the statevector fast path: for a pure probe the
/// m = 1 truncated bounds collapse onto the overlap fidelity, so the
/// cost is 8 (1 - |<psi| e^{-i delta G} |psi>|) / delta^2.
pub fn pure_probe_cost(
    ansatz: &Ansatz,
    params: &[f64],
    g_diag: &[f64],
    delta: f64,
) -> qfisher::Result<f64> {
    let d = g_diag.len();
    let mut zero = vec![num_complex::Complex64::ZERO; d];
    zero[0] = num_complex::Complex64::ONE;
    let psi = circuits::apply_to_statevector(ansatz, params, &zero)?;
    let overlap: num_complex::Complex64 = psi
        .iter()
        .zip(g_diag.iter())
        .map(|(a, g)| a.norm_sqr() * num_complex::Complex64::from_polar(1.0, -delta * g))
        .sum();
    qfi::induced_bound(overlap.norm().min(1.0 + 1e-9), delta)
}

/// One CSV row of the estimation run: a labeled input state with its
/// full bounds report.
pub struct EstimateRow {
    pub label: String,
    pub purity: f64,
    pub report: BoundsReport,
}

pub fn run_estimate(cfg: &ExperimentConfig) -> Result<Vec<EstimateRow>, CliError> {
    cfg.validate(ExperimentKind::Estimate)?;
    let g = Generator::collective_z(cfg.n);
    let purities: Vec<f64> = match cfg.input_state {
        InputState::RandomPurity => cfg.purity.clone(),
        _ => vec![1.0],
    };
    let rows: Vec<EstimateRow> = with_workers(cfg.workers, || {
        purities
            .par_iter()
            .enumerate()
            .map(|(idx, &purity)| -> Result<EstimateRow, CliError> {
                let input = input_state(cfg, purity, idx as u64)?;
                let rho_theta = circuits::encode_phase(&input, &g, cfg.theta)?;
                let rho_error = circuits::encode_phase(&input, &g, cfg.theta + cfg.delta)?;
                let report =
                    qfi::bounds_report(&rho_theta, &rho_error, cfg.m, cfg.delta, Some(&g))?;
                let label = match cfg.input_state {
                    InputState::RandomPurity => format!("random_p{purity}"),
                    other => other.name().to_string(),
                };
                check_report(&label, &report)?;
                Ok(EstimateRow {
                    label,
                    purity: states::purity(&input),
                    report,
                })
            })
            .collect()
    })?;
    let csv: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{}", r.label, r.purity, r.report.csv_row()))
        .collect();
    write_csv(
        &cfg.out_path,
        &cfg.metadata(ExperimentKind::Estimate),
        &format!("state,purity,{}", BoundsReport::CSV_HEADER),
        &csv,
    )?;
    Ok(rows)
}

/// Outcome of one probe-training run.
pub struct OptimizeOutcome {
    pub label: String,
    pub m: usize,
    pub result: OptResult,
    pub final_cost: f64,
    /// Fixed-spectrum QFI ceiling for the input state.
    pub ceiling: f64,
    pub final_report: BoundsReport,
}

/// Train the probe-preparation circuit to maximize H_delta; one training
/// run per sweep label (purity values, or truncation orders for the
/// m-sweep). Writes the cost-vs-iteration history and a final report per
/// label.
pub fn run_optimize(
    cfg: &ExperimentConfig,
    experiment: ExperimentKind,
) -> Result<Vec<OptimizeOutcome>, CliError> {
    cfg.validate(experiment)?;
    let g = Generator::collective_z(cfg.n);
    let ansatz = circuits::build_hw_efficient(cfg.n, cfg.layers);

    // sweep units: (label, input purity, truncation order)
    let units: Vec<(String, f64, usize)> = match experiment {
        ExperimentKind::MSweep => (1..=cfg.m)
            .map(|m| {
                let purity = cfg.purity.first().copied().unwrap_or(1.0);
                (format!("m{m}"), purity, m)
            })
            .collect(),
        _ => match cfg.input_state {
            InputState::RandomPurity => cfg
                .purity
                .iter()
                .map(|&p| (format!("p{p}"), p, cfg.m))
                .collect(),
            other => vec![(other.name().to_string(), 1.0, cfg.m)],
        },
    };

    let outcomes = with_workers(cfg.workers, || {
        units
            .par_iter()
            .enumerate()
            .map(|(idx, (label, purity, m))| -> Result<OptimizeOutcome, CliError> {
                let input = input_state(cfg, *purity, idx as u64)?;
                let spectrum = input.spectral()?.eigenvalues;
                let ceiling = qfi::max_qfi_mixed(&spectrum, g.matrix())?;
                let objective = |params: &[f64]| {
                    probe_cost(&ansatz, params, &input, &g, cfg.theta, cfg.delta, *m)
                };
                let opt_cfg = optimizer_config(cfg, derive_seed(cfg.seed, 1000 + idx as u64));
                let result = optimize::maximize(objective, ansatz.param_count(), &opt_cfg)?;

                let probe = circuits::apply(&ansatz, &result.best_params, &input)?;
                let rho_theta = circuits::encode_phase(&probe, &g, cfg.theta)?;
                let rho_error = circuits::encode_phase(&probe, &g, cfg.theta + cfg.delta)?;
                let final_report =
                    qfi::bounds_report(&rho_theta, &rho_error, *m, cfg.delta, Some(&g))?;
                check_report(label, &final_report)?;
                Ok(OptimizeOutcome {
                    label: label.clone(),
                    m: *m,
                    final_cost: result.best_value,
                    ceiling,
                    result,
                    final_report,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let mut history_rows = Vec::new();
    for outcome in &outcomes {
        for (restart, hist) in outcome.result.restart_histories.iter().enumerate() {
            for (iteration, cost) in hist.iter().enumerate() {
                history_rows.push(format!(
                    "{},{restart},{iteration},{cost}",
                    outcome.label
                ));
            }
        }
    }
    write_csv(
        &cfg.out_path,
        &cfg.metadata(experiment),
        "label,restart,iteration,cost",
        &history_rows,
    )?;

    let final_rows: Vec<String> = outcomes
        .iter()
        .map(|o| {
            format!(
                "{},{},{},{},{}",
                o.label,
                o.m,
                o.final_cost,
                o.ceiling,
                o.final_report.csv_row()
            )
        })
        .collect();
    write_csv(
        &sibling_path(&cfg.out_path, "_final"),
        &cfg.metadata(experiment),
        &format!("label,m,final_cost,ceiling,{}", BoundsReport::CSV_HEADER),
        &final_rows,
    )?;
    Ok(outcomes)
}

/// Insert a suffix before the file extension: out.csv -> out_final.csv.
pub fn sibling_path(path: &std::path::Path, suffix: &str) -> std::path::PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|s| format!(".{}", s.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

pub struct VarianceRow {
    pub n: usize,
    pub delta: f64,
    pub samples: usize,
    pub variance: f64,
}

/// Trainability scan: variance of cost-function differences over random
/// parameter pairs, for each system size and shift. The probe is the
/// pure |0...0> input, the ansatz has ceil(log2 n) layers, and the cost
/// is the truncated lower bound along the pure fast path.
pub fn run_variance_scan(cfg: &ExperimentConfig) -> Result<Vec<VarianceRow>, CliError> {
    cfg.validate(ExperimentKind::VarianceScan)?;
    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let layers = (n as f64).log2().ceil().max(1.0) as usize;
        let ansatz = circuits::build_hw_efficient(n, layers);
        let g_diag: Vec<f64> = (0..1usize << n)
            .map(|z: usize| (n as i64 - 2 * z.count_ones() as i64) as f64)
            .collect();
        let samples = if n > 11 {
            cfg.samples.min(100)
        } else {
            cfg.samples
        };
        for (di, &delta) in cfg.delta_list.iter().enumerate() {
            let diffs: Vec<f64> = with_workers(cfg.workers, || {
                (0..samples)
                    .into_par_iter()
                    .map(|s| -> Result<f64, CliError> {
                        let unit = ((ni as u64) << 40) ^ ((di as u64) << 32) ^ s as u64;
                        let seed = derive_seed(cfg.seed, unit);
                        let mut rng = {
                            use rand::SeedableRng;
                            rand_chacha::ChaCha8Rng::seed_from_u64(seed)
                        };
                        use rand::Rng;
                        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                            (0..ansatz.param_count())
                                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                                .collect()
                        };
                        let a = draw(&mut rng);
                        let b = draw(&mut rng);
                        let ca = pure_probe_cost(&ansatz, &a, &g_diag, delta)?;
                        let cb = pure_probe_cost(&ansatz, &b, &g_diag, delta)?;
                        Ok((ca - cb) / (n * n) as f64)
                    })
                    .collect()
            })?;
            let mean: f64 = diffs.iter().sum::<f64>() / diffs.len() as f64;
            let variance: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                / (diffs.len() - 1) as f64;
            rows.push(VarianceRow {
                n,
                delta,
                samples,
                variance,
            });
        }
    }
    let csv: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{},{},{}", r.n, r.delta, r.samples, r.variance))
        .collect();
    write_csv(
        &cfg.out_path,
        &cfg.metadata(ExperimentKind::VarianceScan),
        "n,delta,samples,var_delta_cost_over_n2",
        &csv,
    )?;
    Ok(rows)
}

pub struct BoundCompareRow {
    pub n: usize,
    pub purity: f64,
    pub tqfi_lower: f64,
    pub ssqfi_lower: f64,
    pub h_delta: f64,
    pub j_delta: f64,
    pub purity_loss: f64,
    pub exact_qfi: f64,
}

/// Spectrum on the line between uniform and pure with the requested
/// purity (bisection on the mixing weight).
pub fn spectrum_with_purity(d: usize, purity: f64) -> Vec<f64> {
    let uniform = 1.0 / d as f64;
    let blend = |t: f64| -> Vec<f64> {
        let mut s: Vec<f64> = vec![(1.0 - t) * uniform; d];
        s[0] += t;
        s
    };
    let p_of = |t: f64| -> f64 { blend(t).iter().map(|v| v * v).sum() };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p_of(mid) < purity {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    blend(0.5 * (lo + hi))
}

/// Evaluate every lower bound at the optimal mixed probe across purities
/// in (1/n, 1): truncated/sub-super/dynamics-agnostic bounds at
/// delta = (Delta x)^2, and the stratified purity-loss bound with the
/// strata count balancing the two circuit budgets.
pub fn run_bound_compare(cfg: &ExperimentConfig) -> Result<Vec<BoundCompareRow>, CliError> {
    cfg.validate(ExperimentKind::BoundCompare)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_list {
        let g = Generator::collective_z(n);
        let d = 1usize << n;
        let strata = qfi::strata_count(n, cfg.max_iters);
        let m = cfg.m.min(d);
        let purities: Vec<f64> = (1..=cfg.purity_samples)
            .map(|j| {
                let low = 1.0 / n as f64;
                low + (j as f64 / (cfg.purity_samples + 1) as f64) * (1.0 - low)
            })
            .collect();
        let n_rows: Vec<BoundCompareRow> = with_workers(cfg.workers, || {
            purities
                .par_iter()
                .map(|&purity| -> Result<BoundCompareRow, CliError> {
                    let spectrum = spectrum_with_purity(d, purity);
                    let probe = states::optimal_mixed_probe(&spectrum, g.matrix())?;
                    let rho_theta = circuits::encode_phase(&probe, &g, cfg.theta)?;
                    let rho_error =
                        circuits::encode_phase(&probe, &g, cfg.theta + cfg.delta)?;
                    let report =
                        qfi::bounds_report(&rho_theta, &rho_error, m, cfg.delta, Some(&g))?;
                    check_report(&format!("n={n} purity={purity}"), &report)?;
                    let loss = qfi::purity_loss_bound(
                        &probe, &g, cfg.theta, cfg.delta, strata, cfg.seed,
                    )?;
                    Ok(BoundCompareRow {
                        n,
                        purity,
                        tqfi_lower: report.tqfi_lower,
                        ssqfi_lower: report.ssqfi_lower,
                        h_delta: report.h_delta,
                        j_delta: report.j_delta,
                        purity_loss: loss.l_stratified,
                        exact_qfi: report.exact_qfi.unwrap_or(f64::NAN),
                    })
                })
                .collect()
        })?;
        rows.extend(n_rows);
    }
    let csv: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                r.n,
                r.purity,
                r.tqfi_lower,
                r.ssqfi_lower,
                r.h_delta,
                r.j_delta,
                r.purity_loss,
                r.exact_qfi
            )
        })
        .collect();
    write_csv(
        &cfg.out_path,
        &cfg.metadata(ExperimentKind::BoundCompare),
        "n,purity,tqfi_lower,ssqfi_lower,h_delta,j_delta,purity_loss,exact_qfi",
        &csv,
    )?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_fast_path_matches_density_path() {
        let n = 3;
        let ansatz = circuits::build_hw_efficient(n, 2);
        let g = Generator::collective_z(n);
        let g_diag: Vec<f64> = (0..8)
            .map(|z: usize| (3 - 2 * z.count_ones() as i64) as f64)
            .collect();
        let input = DensityMatrix::basis_state(n, 0);
        let params: Vec<f64> = (0..ansatz.param_count())
            .map(|i| 0.3 + 0.2 * i as f64)
            .collect();
        let delta = 0.1;
        let fast = pure_probe_cost(&ansatz, &params, &g_diag, delta).unwrap();
        // density path: m = 1 truncated lower bound at theta = 0
        let probe = circuits::apply(&ansatz, &params, &input).unwrap();
        let a = circuits::encode_phase(&probe, &g, 0.0).unwrap();
        let b = circuits::encode_phase(&probe, &g, delta).unwrap();
        let (lower, _) = qfi::tqfi_bounds(&a, &b, 1, delta).unwrap();
        assert!((fast - lower).abs() < 1e-8, "fast {fast} vs density {lower}");
    }

    #[test]
    fn spectrum_solver_hits_requested_purity() {
        for purity in [0.26, 0.5, 0.77, 0.99] {
            let s = spectrum_with_purity(16, purity);
            let p: f64 = s.iter().map(|v| v * v).sum();
            assert!((p - purity).abs() < 1e-10);
            assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for w in s.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn sibling_path_inserts_suffix() {
        let p = sibling_path(std::path::Path::new("runs/out.csv"), "_final");
        assert_eq!(p, std::path::PathBuf::from("runs/out_final.csv"));
    }
}
