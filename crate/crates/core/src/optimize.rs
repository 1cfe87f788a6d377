//! Classical optimizers for the hybrid loop: a derivative-free
//! linear-approximation trust-region method (COBYLA-style), a
//! Nelder-Mead fallback, and parameter-shift gradient descent.
//!
//! One "iteration" is one new objective evaluation after the initial
//! simplex is built, which pins down the meaning of an iteration budget.
//! Restarts run in parallel with per-restart seeds; results are collected
//! in restart order, so the outcome is independent of scheduling.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptMethod {
    Cobyla,
    NelderMead,
    GradDescent,
}

impl OptMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cobyla" => Some(Self::Cobyla),
            "nelder_mead" | "nelder-mead" => Some(Self::NelderMead),
            "grad_descent" | "grad-descent" => Some(Self::GradDescent),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Cobyla => "cobyla",
            Self::NelderMead => "nelder_mead",
            Self::GradDescent => "grad_descent",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub method: OptMethod,
    pub max_iters: usize,
    pub restarts: usize,
    /// Initial trust radius / simplex edge, in radians.
    pub initial_step: f64,
    /// Learning rate for gradient descent.
    pub learning_rate: f64,
    pub seed: u64,
    /// Trust-radius floor; a trajectory stops once the radius shrinks
    /// below this.
    pub convergence_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: OptMethod::Cobyla,
            max_iters: 200,
            restarts: 30,
            initial_step: 0.5,
            learning_rate: 0.1,
            seed: 0,
            convergence_tol: 1e-8,
        }
    }
}

/// Outcome of a multi-restart maximization.
#[derive(Debug, Clone)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_value: f64,
    /// Best-so-far value per iteration for the winning restart.
    pub history: Vec<f64>,
    /// Best-so-far value per iteration for every restart.
    pub restart_histories: Vec<Vec<f64>>,
    pub restart_index: usize,
    /// Total objective evaluations across all restarts (the budget
    /// ledger: every call that would hit a quantum device).
    pub objective_calls: u64,
}

impl OptResult {
    /// History rows as `restart,iteration,cost` CSV lines.
    pub fn history_csv_rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for (restart, hist) in self.restart_histories.iter().enumerate() {
            for (iteration, cost) in hist.iter().enumerate() {
                rows.push(format!("{restart},{iteration},{cost}"));
            }
        }
        rows
    }
}

struct Trajectory {
    best_params: Vec<f64>,
    best_value: f64,
    history: Vec<f64>,
    calls: u64,
}

fn restart_seed(base: u64, restart: usize) -> u64 {
    base ^ (restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Maximize a (deterministic or seeded) objective over `dim` parameters.
/// Initialization is uniform on [0, 2 pi) per parameter, per restart.
pub fn maximize<F>(objective: F, dim: usize, config: &OptimizerConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if dim == 0 {
        return Err(Error::InvalidArgument("objective has no parameters".into()));
    }
    let outcomes: Vec<Result<Trajectory>> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(config.seed, restart));
            let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..TAU)).collect();
            let run = match config.method {
                OptMethod::Cobyla => cobyla_trajectory(&objective, x0, config),
                OptMethod::NelderMead => nelder_mead_trajectory(&objective, x0, config),
                OptMethod::GradDescent => grad_descent_trajectory(&objective, x0, config),
            };
            run.map_err(|e| Error::ObjectiveEvaluationFailure {
                restart,
                source: Box::new(e),
            })
        })
        .collect();

    let mut best: Option<(usize, Trajectory)> = None;
    let mut histories = Vec::with_capacity(config.restarts);
    let mut calls = 0u64;
    for (restart, outcome) in outcomes.into_iter().enumerate() {
        let traj = outcome?;
        calls += traj.calls;
        histories.push(traj.history.clone());
        let better = match &best {
            None => true,
            Some((_, b)) => traj.best_value > b.best_value,
        };
        if better {
            best = Some((restart, traj));
        }
    }
    let (restart_index, traj) = best.expect("at least one restart");
    Ok(OptResult {
        best_params: traj.best_params,
        best_value: traj.best_value,
        history: traj.history,
        restart_histories: histories,
        restart_index,
        objective_calls: calls,
    })
}

/// Linear solve by Gaussian elimination with partial pivoting; None when
/// the system is numerically singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Trust-region method on a simplex of linear interpolants: n+1 points,
/// a linear model fit through them, one steepest-ascent step of length
/// `radius` per cycle, radius halved when the step fails to improve.
fn cobyla_trajectory<F>(objective: &F, x0: Vec<f64>, config: &OptimizerConfig) -> Result<Trajectory>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let dim = x0.len();
    // minimize the negated objective internally
    let eval = |x: &[f64], calls: &mut u64| -> Result<f64> {
        *calls += 1;
        Ok(-objective(x)?)
    };
    let mut calls = 0u64;
    let mut radius = config.initial_step;

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut values: Vec<f64> = Vec::with_capacity(dim + 1);
    points.push(x0.clone());
    values.push(eval(&x0, &mut calls)?);
    for i in 0..dim {
        let mut p = x0.clone();
        p[i] += radius;
        values.push(eval(&p, &mut calls)?);
        points.push(p);
    }

    let mut history = Vec::with_capacity(config.max_iters);
    let mut budget = config.max_iters;
    while budget > 0 {
        let best = argmin(&values);
        let worst = argmax(&values);

        // linear model: g . (x_i - x_best) = f_i - f_best
        let mut rows = Vec::with_capacity(dim);
        let mut rhs = Vec::with_capacity(dim);
        for i in 0..=dim {
            if i == best {
                continue;
            }
            rows.push(
                points[i]
                    .iter()
                    .zip(points[best].iter())
                    .map(|(a, b)| a - b)
                    .collect::<Vec<f64>>(),
            );
            rhs.push(values[i] - values[best]);
        }

        let grad = match solve_linear(rows, rhs) {
            Some(g) => g,
            None => {
                // degenerate simplex: rebuild the axes around the best point
                let center = points[best].clone();
                let center_value = values[best];
                points.clear();
                values.clear();
                points.push(center.clone());
                values.push(center_value);
                for i in 0..dim {
                    if budget == 0 {
                        break;
                    }
                    let mut p = center.clone();
                    p[i] += radius;
                    let v = eval(&p, &mut calls)?;
                    budget -= 1;
                    history.push(-values[argmin(&values)].min(v));
                    points.push(p);
                    values.push(v);
                }
                if points.len() < dim + 1 {
                    break;
                }
                continue;
            }
        };

        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm < 1e-14 {
            radius *= 0.5;
            if radius < config.convergence_tol {
                break;
            }
            continue;
        }
        let candidate: Vec<f64> = points[best]
            .iter()
            .zip(grad.iter())
            .map(|(x, g)| x - radius * g / norm)
            .collect();
        let value = eval(&candidate, &mut calls)?;
        budget -= 1;

        if value < values[best] - 1e-15 * (1.0 + values[best].abs()) {
            points[worst] = candidate;
            values[worst] = value;
        } else {
            if value < values[worst] {
                points[worst] = candidate;
                values[worst] = value;
            }
            radius *= 0.5;
            if radius < config.convergence_tol {
                history.push(-values[argmin(&values)]);
                break;
            }
        }
        history.push(-values[argmin(&values)]);
    }

    let best = argmin(&values);
    Ok(Trajectory {
        best_params: points[best].clone(),
        best_value: -values[best],
        history,
        calls,
    })
}

/// Standard Nelder-Mead with reflection 1, expansion 2, contraction 0.5
/// and shrink 0.5, on the negated objective.
fn nelder_mead_trajectory<F>(
    objective: &F,
    x0: Vec<f64>,
    config: &OptimizerConfig,
) -> Result<Trajectory>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let dim = x0.len();
    let eval = |x: &[f64], calls: &mut u64| -> Result<f64> {
        *calls += 1;
        Ok(-objective(x)?)
    };
    let mut calls = 0u64;

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut values: Vec<f64> = Vec::with_capacity(dim + 1);
    points.push(x0.clone());
    values.push(eval(&x0, &mut calls)?);
    for i in 0..dim {
        let mut p = x0.clone();
        p[i] += config.initial_step;
        values.push(eval(&p, &mut calls)?);
        points.push(p);
    }

    let mut history = Vec::with_capacity(config.max_iters);
    let mut budget = config.max_iters as i64;
    while budget > 0 {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for (c, x) in centroid.iter_mut().zip(points[i].iter()) {
                *c += x / dim as f64;
            }
        }
        let blend = |alpha: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(points[worst].iter())
                .map(|(c, w)| c + alpha * (c - w))
                .collect()
        };

        let reflected = blend(1.0);
        let fr = eval(&reflected, &mut calls)?;
        budget -= 1;
        if fr < values[best] {
            let expanded = blend(2.0);
            let fe = eval(&expanded, &mut calls)?;
            budget -= 1;
            if fe < fr {
                points[worst] = expanded;
                values[worst] = fe;
            } else {
                points[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            points[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = blend(-0.5);
            let fc = eval(&contracted, &mut calls)?;
            budget -= 1;
            if fc < values[worst] {
                points[worst] = contracted;
                values[worst] = fc;
            } else {
                // shrink toward the best point
                let anchor = points[best].clone();
                for i in 0..points.len() {
                    if i == best || budget <= 0 {
                        continue;
                    }
                    let shrunk: Vec<f64> = anchor
                        .iter()
                        .zip(points[i].iter())
                        .map(|(a, x)| a + 0.5 * (x - a))
                        .collect();
                    values[i] = eval(&shrunk, &mut calls)?;
                    points[i] = shrunk;
                    budget -= 1;
                }
            }
        }
        let current_best = values.iter().cloned().fold(f64::INFINITY, f64::min);
        history.push(-current_best);
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - current_best;
        if spread.abs() < config.convergence_tol {
            break;
        }
    }

    let best = argmin(&values);
    Ok(Trajectory {
        best_params: points[best].clone(),
        best_value: -values[best],
        history,
        calls,
    })
}

fn grad_descent_trajectory<F>(
    objective: &F,
    x0: Vec<f64>,
    config: &OptimizerConfig,
) -> Result<Trajectory>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let mut x = x0;
    let mut calls = 0u64;
    let mut history = Vec::with_capacity(config.max_iters);
    let mut best_value = f64::NEG_INFINITY;
    let mut best_params = x.clone();
    for _ in 0..config.max_iters {
        let (next, step_calls) = grad_descent_step(objective, &x, config.learning_rate)?;
        calls += step_calls;
        x = next;
        let value = objective(&x)?;
        calls += 1;
        if value > best_value {
            best_value = value;
            best_params = x.clone();
        }
        history.push(best_value);
    }
    Ok(Trajectory {
        best_params,
        best_value,
        history,
        calls,
    })
}

/// One parameter-shift ascent step on every coordinate:
/// alpha <- alpha + lr * grad(objective). Returns the updated parameters
/// and the number of objective calls spent (2 per parameter).
pub fn grad_descent_step<F>(objective: &F, params: &[f64], lr: f64) -> Result<(Vec<f64>, u64)>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let shift = std::f64::consts::FRAC_PI_2;
    let mut grad = vec![0.0; params.len()];
    let mut calls = 0u64;
    for (i, g) in grad.iter_mut().enumerate() {
        let mut plus = params.to_vec();
        let mut minus = params.to_vec();
        plus[i] += shift;
        minus[i] -= shift;
        *g = (objective(&plus)? - objective(&minus)?) / 2.0;
        calls += 2;
    }
    let next = params
        .iter()
        .zip(grad.iter())
        .map(|(x, g)| x + lr * g)
        .collect();
    Ok((next, calls))
}

fn argmin(values: &[f64]) -> usize {
    let mut idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[idx] {
            idx = i;
        }
    }
    idx
}

fn argmax(values: &[f64]) -> usize {
    let mut idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[idx] {
            idx = i;
        }
    }
    idx
}
