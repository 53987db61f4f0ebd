//! Two-layer gradient/constraint iteration for convex QP with linear
//! inequality constraints, including the LP special case `Q = 0`.
//!
//! One layer takes explicit gradient steps `x <- (1 - alpha Q) x - alpha p`;
//! the other computes constraint violations `max(0, Ax - k)` and applies
//! corrections along `A^T`. Step sizes `alpha_t` shrink while constraint
//! gains `beta_t` grow as the iteration settles. States are real-valued;
//! no spike encoding is involved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{constraint_violation, qp_objective, QpInstance};

/// Hyperparameter schedule: `alpha_t = alpha0 / (1 + t / horizon)`
/// (non-increasing) and `beta_t = min(beta_cap, beta0 * (1 + t / horizon))`
/// (non-decreasing, capped for stability of the correction map).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QpSchedule {
    pub alpha0: f64,
    pub beta0: f64,
    pub beta_cap: f64,
    pub horizon: f64,
    pub max_iters: usize,
    /// Convergence tolerance on the per-iteration state change.
    pub tol: f64,
    /// Corrections per outer iteration stop once the max violation falls
    /// below this, or after `inner_cap` steps.
    pub inner_tol: f64,
    pub inner_cap: usize,
}

impl Default for QpSchedule {
    fn default() -> Self {
        Self {
            alpha0: 0.0, // 0 means: derive from the instance at solve time
            beta0: 0.0,
            beta_cap: 0.0,
            horizon: 200.0,
            max_iters: 200_000,
            tol: 1e-12,
            inner_tol: 1e-11,
            inner_cap: 40,
        }
    }
}

impl QpSchedule {
    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha0 / (1.0 + t as f64 / self.horizon)
    }

    pub fn beta(&self, t: usize) -> f64 {
        (self.beta0 * (1.0 + t as f64 / self.horizon)).min(self.beta_cap)
    }

    /// Fills the zero (derive-me) fields from instance spectra:
    /// `alpha0 = 1 / (lambda_max(Q) + 1)`, `beta_cap = 1 / lambda_max(A A^T)`.
    pub fn resolved_for(mut self, inst: &QpInstance) -> Self {
        if self.alpha0 <= 0.0 {
            self.alpha0 = 1.0 / (lambda_max_q(inst) + 1.0);
        }
        if self.beta_cap <= 0.0 {
            let gram = lambda_max_gram(inst);
            self.beta_cap = if gram > 0.0 { 1.0 / gram } else { 0.0 };
        }
        if self.beta0 <= 0.0 {
            self.beta_cap = self.beta_cap.max(1e-12);
            self.beta0 = self.beta_cap / 8.0;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::ZeroBudget);
        }
        for (what, v) in [
            ("alpha0", self.alpha0),
            ("horizon", self.horizon),
            ("tol", self.tol),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::OutOfRange { what, value: v });
            }
        }
        if self.beta0 < 0.0 || self.beta_cap < self.beta0 {
            return Err(Error::OutOfRange { what: "beta0/beta_cap", value: self.beta0 });
        }
        Ok(())
    }
}

/// Largest eigenvalue of Q by power iteration.
fn lambda_max_q(inst: &QpInstance) -> f64 {
    let l = inst.l;
    let mut v = vec![1.0 / (l as f64).sqrt(); l];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut w = vec![0.0; l];
        for i in 0..l {
            for j in 0..l {
                w[i] += inst.q[i * l + j] * v[j];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        lambda = norm;
        for i in 0..l {
            v[i] = w[i] / norm;
        }
    }
    lambda
}

/// Largest eigenvalue of A^T A (equivalently A A^T) by power iteration.
fn lambda_max_gram(inst: &QpInstance) -> f64 {
    if inst.m == 0 {
        return 0.0;
    }
    let l = inst.l;
    let mut v = vec![1.0 / (l as f64).sqrt(); l];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut av = vec![0.0; inst.m];
        for r in 0..inst.m {
            for j in 0..l {
                av[r] += inst.a[r * l + j] * v[j];
            }
        }
        let mut w = vec![0.0; l];
        for r in 0..inst.m {
            for j in 0..l {
                w[j] += inst.a[r * l + j] * av[r];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return 0.0;
        }
        lambda = norm;
        for j in 0..l {
            v[j] = w[j] / norm;
        }
    }
    lambda
}

/// `x' = (1 - alpha Q) x - alpha p`.
pub fn gradient_step(x: &[f64], inst: &QpInstance, alpha: f64) -> Result<Vec<f64>> {
    if x.len() != inst.l {
        return Err(Error::DimensionMismatch { expected: inst.l, got: x.len() });
    }
    if alpha <= 0.0 {
        return Err(Error::OutOfRange { what: "alpha", value: alpha });
    }
    let l = inst.l;
    let mut next = Vec::with_capacity(l);
    for i in 0..l {
        let mut qx = 0.0;
        for j in 0..l {
            qx += inst.q[i * l + j] * x[j];
        }
        next.push(x[i] - alpha * (qx + inst.p[i]));
    }
    Ok(next)
}

/// `x' = x - beta * A^T * max(0, Ax - k)`; interior points are fixed points.
pub fn constraint_correction(x: &[f64], inst: &QpInstance, beta: f64) -> Result<Vec<f64>> {
    if x.len() != inst.l {
        return Err(Error::DimensionMismatch { expected: inst.l, got: x.len() });
    }
    if beta < 0.0 {
        return Err(Error::OutOfRange { what: "beta", value: beta });
    }
    let violations = constraint_violation(inst, x)?;
    let mut next = x.to_vec();
    for r in 0..inst.m {
        if violations[r] > 0.0 {
            let row = inst.a_row(r);
            for j in 0..inst.l {
                next[j] -= beta * row[j] * violations[r];
            }
        }
    }
    Ok(next)
}

/// State of the gradient and constraint layers at readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpNetState {
    pub x: Vec<f64>,
    pub violations: Vec<f64>,
    /// Running objective value (monitoring only; no dynamical role).
    pub cost_monitor: f64,
}

/// Solver output: final state plus residual checkpoints `(iter, f, max_violation)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub state: QpNetState,
    pub objective: f64,
    pub iterations: usize,
    pub max_violation: f64,
    pub converged: bool,
    pub residuals: Vec<(usize, f64, f64)>,
}

/// Alternates gradient steps and constraint corrections per the schedule,
/// starting from the origin, until the state change drops below `tol` or the
/// iteration budget runs out.
pub fn solve_qp(inst: &QpInstance, schedule: &QpSchedule) -> Result<QpSolution> {
    let sched = schedule.resolved_for(inst);
    sched.validate()?;
    let mut x = vec![0.0; inst.l];
    let mut converged = false;
    let mut iterations = 0;
    let mut residuals = Vec::new();
    let checkpoint_every = (sched.max_iters / 100).max(1);
    for t in 0..sched.max_iters {
        iterations = t + 1;
        let mut next = gradient_step(&x, inst, sched.alpha(t))?;
        let beta = sched.beta(t);
        if inst.m > 0 && beta > 0.0 {
            for _ in 0..sched.inner_cap {
                let v = constraint_violation(inst, &next)?;
                let worst = v.iter().copied().fold(0.0, f64::max);
                if worst <= sched.inner_tol {
                    break;
                }
                next = constraint_correction(&next, inst, beta)?;
            }
        }
        let delta: f64 = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        x = next;
        if t % checkpoint_every == 0 {
            let f = qp_objective(inst, &x)?;
            let v = constraint_violation(inst, &x)?;
            residuals.push((t, f, v.iter().copied().fold(0.0, f64::max)));
        }
        if delta < sched.tol {
            converged = true;
            break;
        }
    }
    let violations = constraint_violation(inst, &x)?;
    let max_violation = violations.iter().copied().fold(0.0, f64::max);
    let objective = qp_objective(inst, &x)?;
    residuals.push((iterations, objective, max_violation));
    Ok(QpSolution {
        state: QpNetState { x, violations, cost_monitor: objective },
        objective,
        iterations,
        max_violation,
        converged,
    residuals,
    })
}
