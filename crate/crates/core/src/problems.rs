//! Problem instances, objective evaluators, file formats, brute-force
//! oracles, and seeded random generators.
//!
//! All evaluators are pure; instances are immutable after construction.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimization direction. Files always carry minimization form;
/// maximization inputs are negated at load and tagged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

// ---------------------------------------------------------------------------
// QUBO
// ---------------------------------------------------------------------------

/// `min x^T Q x` over binary `x`, with `Q` stored upper-triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    n: usize,
    /// Row-major `n x n`; strictly-lower entries are zero.
    q: Vec<f64>,
    sense: Sense,
}

impl QuboInstance {
    /// Builds from a dense matrix, folding `Q_ij + Q_ji` into the upper
    /// triangle. Maximization instances are negated so the stored form is
    /// always a minimization.
    pub fn from_dense(matrix: &[Vec<f64>], sense: Sense) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::structure("QUBO needs at least one variable"));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for v in row {
                if !v.is_finite() {
                    return Err(Error::structure(format!("non-finite entry in row {i}")));
                }
            }
        }
        let sign = match sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let folded = if i == j { matrix[i][i] } else { matrix[i][j] + matrix[j][i] };
                q[i * n + j] = sign * folded;
            }
        }
        Ok(Self { n, q, sense })
    }

    /// Builds directly from upper-triangular entries `(i, j, value)` with `i <= j`.
    pub fn from_upper(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::structure("QUBO needs at least one variable"));
        }
        let mut q = vec![0.0; n * n];
        for &(i, j, v) in entries {
            if i > j || j >= n {
                return Err(Error::structure(format!("entry ({i},{j}) outside the upper triangle of n={n}")));
            }
            q[i * n + j] += v;
        }
        Ok(Self { n, q, sense: Sense::Minimize })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    /// Upper-triangular entry; zero for `i > j`.
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    /// Symmetric coupling between distinct variables: `Q_ij` for `i < j`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.q[a * self.n + b]
    }

    pub fn diagonal(&self, i: usize) -> f64 {
        self.q[i * self.n + i]
    }

    pub fn nonzero_upper(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.q[i * self.n + j];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

/// `sum_{i<=j} Q_ij x_i x_j` for a binary assignment.
pub fn qubo_objective(inst: &QuboInstance, x: &[u8]) -> Result<f64> {
    if x.len() != inst.n {
        return Err(Error::DimensionMismatch { expected: inst.n, got: x.len() });
    }
    let mut total = 0.0;
    for i in 0..inst.n {
        if x[i] == 0 {
            continue;
        }
        for j in i..inst.n {
            if x[j] != 0 {
                total += inst.q[i * inst.n + j];
            }
        }
    }
    Ok(total)
}

/// Objective change from flipping `x[flip]`, given the current assignment.
pub fn qubo_flip_delta(inst: &QuboInstance, x: &[u8], flip: usize) -> f64 {
    let mut marginal = inst.diagonal(flip);
    for j in 0..inst.n {
        if j != flip && x[j] != 0 {
            marginal += inst.coupling(flip, j);
        }
    }
    if x[flip] == 0 { marginal } else { -marginal }
}

// ---------------------------------------------------------------------------
// Ising
// ---------------------------------------------------------------------------

/// Spin form over `s in {-1,+1}^n`: energy `sum_{i<j} J_ij s_i s_j + sum h_i s_i`,
/// related to the QUBO objective by the stored offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    pub n: usize,
    /// Symmetric with zero diagonal.
    pub j: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub offset: f64,
}

impl IsingInstance {
    pub fn validate(&self) -> Result<()> {
        if self.j.len() != self.n || self.h.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: self.j.len() });
        }
        for i in 0..self.n {
            if self.j[i].len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: self.j[i].len() });
            }
            if self.j[i][i] != 0.0 {
                return Err(Error::structure(format!("Ising coupling diagonal must be zero at {i}")));
            }
            for k in 0..self.n {
                if self.j[i][k] != self.j[k][i] {
                    return Err(Error::structure(format!("Ising coupling not symmetric at ({i},{k})")));
                }
            }
        }
        Ok(())
    }

    pub fn energy(&self, s: &[i8]) -> Result<f64> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: s.len() });
        }
        let mut e = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                e += self.j[i][j] * s[i] as f64 * s[j] as f64;
            }
            e += self.h[i] * s[i] as f64;
        }
        Ok(e)
    }
}

/// Substitutes `x = (s + 1) / 2`: for every assignment,
/// `qubo_objective(x) == ising.energy(s) + ising.offset` exactly.
pub fn qubo_to_ising(inst: &QuboInstance) -> IsingInstance {
    let n = inst.n;
    let mut j = vec![vec![0.0; n]; n];
    let mut h = vec![0.0; n];
    let mut offset = 0.0;
    for a in 0..n {
        offset += inst.diagonal(a) / 2.0;
        h[a] += inst.diagonal(a) / 2.0;
        for b in (a + 1)..n {
            let c = inst.q(a, b);
            j[a][b] = c / 4.0;
            j[b][a] = c / 4.0;
            h[a] += c / 4.0;
            h[b] += c / 4.0;
            offset += c / 4.0;
        }
    }
    IsingInstance { n, j, h, offset }
}

/// Inverse substitution `s = 2x - 1`. Returns the QUBO together with a
/// residual constant so `qubo_objective(x) + residual == energy(s) + offset`.
pub fn ising_to_qubo(ising: &IsingInstance) -> Result<(QuboInstance, f64)> {
    ising.validate()?;
    let n = ising.n;
    let mut entries = Vec::new();
    let mut residual = ising.offset;
    for i in 0..n {
        let row_coupling: f64 = (0..n).filter(|&k| k != i).map(|k| ising.j[i][k]).sum();
        entries.push((i, i, 2.0 * ising.h[i] - 2.0 * row_coupling));
        residual -= ising.h[i];
        for k in (i + 1)..n {
            entries.push((i, k, 4.0 * ising.j[i][k]));
            residual += ising.j[i][k];
        }
    }
    Ok((QuboInstance::from_upper(n, &entries)?, residual))
}

// ---------------------------------------------------------------------------
// CNF
// ---------------------------------------------------------------------------

/// A CNF formula; literals are signed 1-based variable indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    pub n_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfFormula {
    pub fn new(n_vars: usize, clauses: Vec<Vec<i32>>) -> Result<Self> {
        for (ci, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(Error::structure(format!("clause {ci} is empty")));
            }
            for &lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var == 0 || var > n_vars {
                    return Err(Error::structure(format!("clause {ci} has out-of-range literal {lit}")));
                }
            }
        }
        Ok(Self { n_vars, clauses })
    }

    pub fn is_three_cnf(&self) -> bool {
        self.clauses.iter().all(|c| c.len() == 3)
    }
}

/// Number of satisfied clauses plus whether all are satisfied.
pub fn cnf_eval(f: &CnfFormula, assignment: &[u8]) -> Result<(usize, bool)> {
    if assignment.len() != f.n_vars {
        return Err(Error::DimensionMismatch { expected: f.n_vars, got: assignment.len() });
    }
    let mut satisfied = 0;
    for clause in &f.clauses {
        let ok = clause.iter().any(|&lit| {
            let v = assignment[(lit.unsigned_abs() - 1) as usize] != 0;
            if lit > 0 { v } else { !v }
        });
        if ok {
            satisfied += 1;
        }
    }
    Ok((satisfied, satisfied == f.clauses.len()))
}

// ---------------------------------------------------------------------------
// CSP
// ---------------------------------------------------------------------------

/// Forbidden value pairs between two variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspConstraint {
    pub a: usize,
    pub b: usize,
    pub forbidden: Vec<(i32, i32)>,
}

/// Finite-domain CSP with extensional binary constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspInstance {
    pub domains: Vec<Vec<i32>>,
    pub constraints: Vec<CspConstraint>,
}

impl CspInstance {
    pub fn new(domains: Vec<Vec<i32>>, constraints: Vec<CspConstraint>) -> Result<Self> {
        let n = domains.len();
        if n == 0 {
            return Err(Error::structure("CSP needs at least one variable"));
        }
        for (i, d) in domains.iter().enumerate() {
            if d.is_empty() {
                return Err(Error::structure(format!("variable {i} has an empty domain")));
            }
        }
        for c in &constraints {
            if c.a >= n || c.b >= n || c.a == c.b {
                return Err(Error::structure(format!("constraint references bad variable pair ({}, {})", c.a, c.b)));
            }
            for &(va, vb) in &c.forbidden {
                if !domains[c.a].contains(&va) || !domains[c.b].contains(&vb) {
                    return Err(Error::structure(format!(
                        "forbidden pair ({va},{vb}) outside domains of ({}, {})",
                        c.a, c.b
                    )));
                }
            }
        }
        Ok(Self { domains, constraints })
    }

    pub fn n_vars(&self) -> usize {
        self.domains.len()
    }

    /// Count of violated forbidden pairs under a full assignment of values.
    pub fn violations(&self, assignment: &[i32]) -> Result<usize> {
        if assignment.len() != self.n_vars() {
            return Err(Error::DimensionMismatch { expected: self.n_vars(), got: assignment.len() });
        }
        Ok(self
            .constraints
            .iter()
            .map(|c| {
                let pair = (assignment[c.a], assignment[c.b]);
                c.forbidden.iter().filter(|&&f| f == pair).count()
            })
            .sum())
    }

    /// All-different pairs make graph coloring a CSP: one variable per vertex,
    /// values `0..k`, and equal-value pairs forbidden along each edge.
    pub fn graph_coloring(n_vertices: usize, edges: &[(usize, usize)], k: usize) -> Result<Self> {
        let domain: Vec<i32> = (0..k as i32).collect();
        let constraints = edges
            .iter()
            .map(|&(u, v)| CspConstraint {
                a: u,
                b: v,
                forbidden: (0..k as i32).map(|c| (c, c)).collect(),
            })
            .collect();
        Self::new(vec![domain; n_vertices], constraints)
    }
}

// ---------------------------------------------------------------------------
// TSP
// ---------------------------------------------------------------------------

/// Distance-matrix TSP instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    n: usize,
    /// Row-major `n x n`.
    dist: Vec<f64>,
}

impl TspInstance {
    pub fn new(matrix: &[Vec<f64>]) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(Error::structure("TSP needs at least one city"));
        }
        let mut dist = vec![0.0; n * n];
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::structure(format!("distance ({i},{j}) must be finite and nonnegative")));
                }
                if i == j && d != 0.0 {
                    return Err(Error::structure(format!("diagonal distance ({i},{i}) must be zero")));
                }
                dist[i * n + j] = d;
            }
        }
        Ok(Self { n, dist })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn max_dist(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.dist[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }
}

/// Closed-tour length including the return edge. The tour must be a
/// permutation of `0..n`.
pub fn tour_length(inst: &TspInstance, tour: &[usize]) -> Result<f64> {
    let n = inst.n;
    if tour.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: tour.len() });
    }
    let mut seen = vec![false; n];
    for &c in tour {
        if c >= n || seen[c] {
            return Err(Error::structure(format!("tour is not a permutation: {tour:?}")));
        }
        seen[c] = true;
    }
    let mut total = 0.0;
    for i in 0..n {
        total += inst.dist(tour[i], tour[(i + 1) % n]);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// QP
// ---------------------------------------------------------------------------

/// Convex quadratic program: `min 0.5 x^T Q x + p^T x` subject to `A x <= k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpInstance {
    /// Number of variables (L).
    pub l: usize,
    /// Number of constraints (M).
    pub m: usize,
    /// Row-major `L x L`, symmetric PSD.
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Row-major `M x L`.
    pub a: Vec<f64>,
    pub k: Vec<f64>,
}

const PSD_TOLERANCE: f64 = 1e-9;

impl QpInstance {
    pub fn new(q: Vec<Vec<f64>>, p: Vec<f64>, a: Vec<Vec<f64>>, k: Vec<f64>) -> Result<Self> {
        let l = p.len();
        let m = k.len();
        if q.len() != l || q.iter().any(|r| r.len() != l) {
            return Err(Error::DimensionMismatch { expected: l, got: q.len() });
        }
        if a.len() != m || a.iter().any(|r| r.len() != l) {
            return Err(Error::DimensionMismatch { expected: m, got: a.len() });
        }
        let mut qf = vec![0.0; l * l];
        for i in 0..l {
            for j in 0..l {
                if (q[i][j] - q[j][i]).abs() > PSD_TOLERANCE {
                    return Err(Error::structure(format!("Q not symmetric at ({i},{j})")));
                }
                qf[i * l + j] = q[i][j];
            }
        }
        check_psd(&qf, l)?;
        let mut af = vec![0.0; m * l];
        for i in 0..m {
            for j in 0..l {
                af[i * l + j] = a[i][j];
            }
        }
        Ok(Self { l, m, q: qf, p, a: af, k })
    }

    pub fn q_at(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.l + j]
    }

    pub fn a_row(&self, i: usize) -> &[f64] {
        &self.a[i * self.l..(i + 1) * self.l]
    }
}

/// Cholesky-style PSD check: any pivot below `-1e-9` rejects the matrix.
fn check_psd(q: &[f64], n: usize) -> Result<()> {
    let scale = q.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut l = vec![0.0f64; n * n];
    let mut d = vec![0.0f64; n];
    for j in 0..n {
        let mut dj = q[j * n + j];
        for k in 0..j {
            dj -= l[j * n + k] * l[j * n + k] * d[k];
        }
        if dj < -PSD_TOLERANCE * scale {
            return Err(Error::structure(format!("Q is not PSD (pivot {dj:.3e} at column {j})")));
        }
        d[j] = dj.max(0.0);
        for i in (j + 1)..n {
            let mut v = q[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k] * d[k];
            }
            if d[j] > PSD_TOLERANCE * scale {
                l[i * n + j] = v / d[j];
            } else if v.abs() > 1e-6 * scale.max(1.0) {
                return Err(Error::structure(format!("Q is not PSD (rank defect at column {j})")));
            }
        }
    }
    Ok(())
}

/// `f(x) = 0.5 x^T Q x + p^T x`.
pub fn qp_objective(inst: &QpInstance, x: &[f64]) -> Result<f64> {
    if x.len() != inst.l {
        return Err(Error::DimensionMismatch { expected: inst.l, got: x.len() });
    }
    let mut quad = 0.0;
    for i in 0..inst.l {
        let mut row = 0.0;
        for j in 0..inst.l {
            row += inst.q[i * inst.l + j] * x[j];
        }
        quad += x[i] * row;
    }
    let linear: f64 = inst.p.iter().zip(x).map(|(pi, xi)| pi * xi).sum();
    Ok(0.5 * quad + linear)
}

/// Gradient `Q x + p`.
pub fn qp_gradient(inst: &QpInstance, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != inst.l {
        return Err(Error::DimensionMismatch { expected: inst.l, got: x.len() });
    }
    let mut g = inst.p.clone();
    for i in 0..inst.l {
        for j in 0..inst.l {
            g[i] += inst.q[i * inst.l + j] * x[j];
        }
    }
    Ok(g)
}

/// Elementwise `max(0, Ax - k)`.
pub fn constraint_violation(inst: &QpInstance, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != inst.l {
        return Err(Error::DimensionMismatch { expected: inst.l, got: x.len() });
    }
    let mut v = Vec::with_capacity(inst.m);
    for r in 0..inst.m {
        let ax: f64 = inst.a_row(r).iter().zip(x).map(|(a, xi)| a * xi).sum();
        v.push((ax - inst.k[r]).max(0.0));
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Brute force oracles
// ---------------------------------------------------------------------------

const BRUTE_FORCE_BIT_CAP: usize = 24;
const BRUTE_FORCE_TSP_CAP: usize = 10;

/// Exhaustive QUBO minimum for `n <= 24`. Ties break to the
/// lexicographically smallest assignment.
pub fn brute_force_qubo(inst: &QuboInstance) -> Result<(Vec<u8>, f64)> {
    let n = inst.n;
    if n > BRUTE_FORCE_BIT_CAP {
        return Err(Error::TooLarge(format!("QUBO brute force capped at n <= {BRUTE_FORCE_BIT_CAP}, got {n}")));
    }
    // Gray-code walk with O(n) flip deltas.
    let mut x = vec![0u8; n];
    let mut obj = 0.0;
    let mut best = x.clone();
    let mut best_obj = obj;
    let total: u64 = 1u64 << n;
    for i in 1..total {
        let bit = i.trailing_zeros() as usize;
        obj += qubo_flip_delta(inst, &x, bit);
        x[bit] ^= 1;
        if obj < best_obj || (obj == best_obj && x < best) {
            best_obj = obj;
            best = x.clone();
        }
    }
    Ok((best, best_obj))
}

/// Exhaustive MAX-SAT style oracle for `n <= 24`: the assignment satisfying
/// the most clauses (lexicographically smallest among ties), its satisfied
/// count, and whether the formula is satisfiable.
pub fn brute_force_cnf(f: &CnfFormula) -> Result<(Vec<u8>, usize, bool)> {
    let n = f.n_vars;
    if n > BRUTE_FORCE_BIT_CAP {
        return Err(Error::TooLarge(format!("CNF brute force capped at n <= {BRUTE_FORCE_BIT_CAP}, got {n}")));
    }
    let mut clauses_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, clause) in f.clauses.iter().enumerate() {
        for &lit in clause {
            clauses_of[(lit.unsigned_abs() - 1) as usize].push(ci);
        }
    }
    let mut x = vec![0u8; n];
    // true-literal counts per clause under all-false
    let mut true_lits: Vec<u32> = f
        .clauses
        .iter()
        .map(|c| c.iter().filter(|&&l| l < 0).count() as u32)
        .collect();
    let mut satisfied = true_lits.iter().filter(|&&c| c > 0).count();
    let mut best = x.clone();
    let mut best_sat = satisfied;
    let total: u64 = 1u64 << n;
    for i in 1..total {
        let var = i.trailing_zeros() as usize;
        let turning_on = x[var] == 0;
        for &ci in &clauses_of[var] {
            for &lit in &f.clauses[ci] {
                if (lit.unsigned_abs() - 1) as usize != var {
                    continue;
                }
                let delta: i64 = if (lit > 0) == turning_on { 1 } else { -1 };
                let before = true_lits[ci];
                true_lits[ci] = (true_lits[ci] as i64 + delta) as u32;
                if before == 0 && true_lits[ci] > 0 {
                    satisfied += 1;
                } else if before > 0 && true_lits[ci] == 0 {
                    satisfied -= 1;
                }
            }
        }
        x[var] ^= 1;
        if satisfied > best_sat || (satisfied == best_sat && x < best) {
            best_sat = satisfied;
            best = x.clone();
        }
    }
    Ok((best, best_sat, best_sat == f.clauses.len()))
}

/// Exhaustive CSP oracle (fewest violations; lexicographically smallest by
/// domain index among ties). Capped at `2^24` total assignments.
pub fn brute_force_csp(inst: &CspInstance) -> Result<(Vec<i32>, usize)> {
    let mut total: u64 = 1;
    for d in &inst.domains {
        total = total.saturating_mul(d.len() as u64);
        if total > (1u64 << BRUTE_FORCE_BIT_CAP) {
            return Err(Error::TooLarge(format!(
                "CSP brute force capped at 2^{BRUTE_FORCE_BIT_CAP} assignments"
            )));
        }
    }
    let n = inst.n_vars();
    let mut idx = vec![0usize; n];
    let mut best_idx = idx.clone();
    let mut best_viol = usize::MAX;
    loop {
        let assignment: Vec<i32> = idx.iter().enumerate().map(|(v, &i)| inst.domains[v][i]).collect();
        let viol = inst.violations(&assignment)?;
        if viol < best_viol {
            best_viol = viol;
            best_idx = idx.clone();
            if viol == 0 {
                // lexicographic order guarantees the first zero is the smallest
                break;
            }
        }
        // odometer increment, last variable fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok((
                    best_idx.iter().enumerate().map(|(v, &i)| inst.domains[v][i]).collect(),
                    best_viol,
                ));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < inst.domains[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
    Ok((
        best_idx.iter().enumerate().map(|(v, &i)| inst.domains[v][i]).collect(),
        best_viol,
    ))
}

/// Exhaustive TSP oracle for `n <= 10`. The first city is fixed at 0, so the
/// lexicographically smallest optimal tour representation is returned.
pub fn brute_force_tsp(inst: &TspInstance) -> Result<(Vec<usize>, f64)> {
    let n = inst.n();
    if n > BRUTE_FORCE_TSP_CAP {
        return Err(Error::TooLarge(format!("TSP brute force capped at n <= {BRUTE_FORCE_TSP_CAP}, got {n}")));
    }
    if n == 1 {
        return Ok((vec![0], 0.0));
    }
    let mut suffix: Vec<usize> = (1..n).collect();
    let mut tour = vec![0usize; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    permute_lex(&mut suffix, &mut |perm| {
        tour[0] = 0;
        tour[1..].copy_from_slice(perm);
        let len = tour_length(inst, &tour).expect("permutation by construction");
        match &best {
            Some((_, b)) if len >= *b => {}
            _ => best = Some((tour.clone(), len)),
        }
    });
    Ok(best.expect("at least one tour"))
}

/// Visits all permutations of `items` in lexicographic order.
fn permute_lex(items: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    items.sort_unstable();
    loop {
        visit(items);
        // next_permutation
        let n = items.len();
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| items[i] < items[i + 1]) else {
            return;
        };
        let j = (i + 1..n).rev().find(|&j| items[j] > items[i]).unwrap();
        items.swap(i, j);
        items[i + 1..].reverse();
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// QUBO text: header `n nnz`, then `nnz` lines of `i j value` with `i <= j`,
/// 0-indexed.
pub fn parse_qubo_str(text: &str) -> Result<QuboInstance> {
    let mut lines = text.lines().enumerate();
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file"))?;
    let mut parts = header.split_whitespace();
    let n: usize = parse_token(&mut parts, line_no + 1, "variable count")?;
    let nnz: usize = parse_token(&mut parts, line_no + 1, "entry count")?;
    let mut entries = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(nnz + 1, format!("expected {nnz} entries, file ended early")))?;
        let mut parts = line.split_whitespace();
        let i: usize = parse_token(&mut parts, ln + 1, "row index")?;
        let j: usize = parse_token(&mut parts, ln + 1, "column index")?;
        let v: f64 = parse_token(&mut parts, ln + 1, "value")?;
        if i > j || j >= n {
            return Err(Error::parse(ln + 1, format!("entry ({i},{j}) outside upper triangle of n={n}")));
        }
        entries.push((i, j, v));
    }
    QuboInstance::from_upper(n, &entries)
}

pub fn write_qubo_str(inst: &QuboInstance) -> String {
    let entries = inst.nonzero_upper();
    let mut out = format!("{} {}\n", inst.n(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {v}");
    }
    out
}

fn parse_token<'a, T: std::str::FromStr>(
    parts: &mut impl Iterator<Item = &'a str>,
    line: usize,
    what: &str,
) -> Result<T> {
    let token = parts
        .next()
        .ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what}: '{token}'")))
}

/// Standard DIMACS CNF: `c` comment lines, a `p cnf <vars> <clauses>` header,
/// then 0-terminated clauses (which may span lines).
pub fn parse_dimacs_str(text: &str) -> Result<CnfFormula> {
    let mut n_vars = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if n_vars.is_some() {
                return Err(Error::parse(line_no, "duplicate problem line"));
            }
            let mut parts = line.split_whitespace();
            let _p = parts.next();
            match parts.next() {
                Some("cnf") => {}
                other => return Err(Error::parse(line_no, format!("expected 'p cnf', got {other:?}"))),
            }
            n_vars = Some(parse_token::<usize>(&mut parts, line_no, "variable count")?);
            declared_clauses = parse_token(&mut parts, line_no, "clause count")?;
            continue;
        }
        let nv = n_vars.ok_or_else(|| Error::parse(line_no, "clause before 'p cnf' header"))?;
        for token in line.split_whitespace() {
            let lit: i32 = token
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad literal '{token}'")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(Error::parse(line_no, "empty clause"));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > nv {
                    return Err(Error::parse(line_no, format!("literal {lit} exceeds variable count {nv}")));
                }
                current.push(lit);
            }
        }
    }
    let nv = n_vars.ok_or_else(|| Error::parse(1, "missing 'p cnf' header"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if declared_clauses != 0 && clauses.len() != declared_clauses {
        return Err(Error::parse(
            text.lines().count(),
            format!("header declared {declared_clauses} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(nv, clauses)
}

pub fn write_dimacs_str(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.n_vars, f.clauses.len());
    for clause in &f.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

/// TSP text: a line with `n`, then `n` rows of `n` distances.
pub fn parse_tsp_str(text: &str) -> Result<TspInstance> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty file"))?;
    let n: usize = header
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, format!("bad city count '{}'", header.trim())))?;
    let mut matrix = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(n + 1, format!("expected {n} matrix rows, file ended early")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(ln + 1, format!("bad distance '{tok}'")))
            })
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::parse(ln + 1, format!("expected {n} distances, got {}", row.len())));
        }
        matrix.push(row);
    }
    TspInstance::new(&matrix)
}

pub fn write_tsp_str(inst: &TspInstance) -> String {
    let mut out = format!("{}\n", inst.n());
    for row in inst.rows() {
        let cells: Vec<String> = row.iter().map(|d| format!("{d}")).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

#[derive(Serialize, Deserialize)]
struct QpDoc {
    q: Vec<Vec<f64>>,
    p: Vec<f64>,
    a: Vec<Vec<f64>>,
    k: Vec<f64>,
}

/// QP JSON: object with `q`, `p`, `a`, `k` arrays.
pub fn parse_qp_str(text: &str) -> Result<QpInstance> {
    let doc: QpDoc = serde_json::from_str(text)?;
    QpInstance::new(doc.q, doc.p, doc.a, doc.k)
}

pub fn write_qp_str(inst: &QpInstance) -> String {
    let doc = QpDoc {
        q: (0..inst.l).map(|i| inst.q[i * inst.l..(i + 1) * inst.l].to_vec()).collect(),
        p: inst.p.clone(),
        a: (0..inst.m).map(|i| inst.a[i * inst.l..(i + 1) * inst.l].to_vec()).collect(),
        k: inst.k.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("QP document serializes")
}

/// CSP JSON: `domains` (per-variable value lists) plus `constraints`
/// (`a`, `b`, `forbidden` pair lists).
pub fn parse_csp_str(text: &str) -> Result<CspInstance> {
    let doc: CspInstance = serde_json::from_str(text)?;
    CspInstance::new(doc.domains, doc.constraints)
}

pub fn write_csp_str(inst: &CspInstance) -> String {
    serde_json::to_string_pretty(inst).expect("CSP document serializes")
}

/// DIMACS graph (`p edge n m`, `e u v` with 1-based vertices) plus a color
/// count, loaded as a graph-coloring CSP.
pub fn parse_dimacs_graph_str(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let mut parts = rest.split_whitespace();
            match parts.next() {
                Some("edge") | Some("col") => {}
                other => return Err(Error::parse(line_no, format!("expected 'p edge', got {other:?}"))),
            }
            n = Some(parse_token::<usize>(&mut parts, line_no, "vertex count")?);
        } else if let Some(rest) = line.strip_prefix('e') {
            let nv = n.ok_or_else(|| Error::parse(line_no, "edge before 'p edge' header"))?;
            let mut parts = rest.split_whitespace();
            let u: usize = parse_token(&mut parts, line_no, "edge endpoint")?;
            let v: usize = parse_token(&mut parts, line_no, "edge endpoint")?;
            if u == 0 || v == 0 || u > nv || v > nv {
                return Err(Error::parse(line_no, format!("edge ({u},{v}) outside 1..={nv}")));
            }
            edges.push((u - 1, v - 1));
        } else {
            return Err(Error::parse(line_no, format!("unrecognized line '{line}'")));
        }
    }
    let nv = n.ok_or_else(|| Error::parse(1, "missing 'p edge' header"))?;
    Ok((nv, edges))
}

pub fn parse_qubo(path: &Path) -> Result<QuboInstance> {
    parse_qubo_str(&std::fs::read_to_string(path)?)
}

pub fn parse_dimacs(path: &Path) -> Result<CnfFormula> {
    parse_dimacs_str(&std::fs::read_to_string(path)?)
}

pub fn parse_tsp(path: &Path) -> Result<TspInstance> {
    parse_tsp_str(&std::fs::read_to_string(path)?)
}

pub fn parse_qp(path: &Path) -> Result<QpInstance> {
    parse_qp_str(&std::fs::read_to_string(path)?)
}

pub fn parse_csp(path: &Path) -> Result<CspInstance> {
    parse_csp_str(&std::fs::read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

/// Random QUBO with integer upper-triangle entries in `[lo, hi]`.
pub fn gen_random_qubo(n: usize, lo: i64, hi: i64, seed: u64) -> QuboInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            entries.push((i, j, rng.gen_range(lo..=hi) as f64));
        }
    }
    QuboInstance::from_upper(n, &entries).expect("generator output is valid")
}

/// Uniform random 3-CNF: `m` clauses over three distinct variables each.
pub fn gen_random_3sat(n_vars: usize, m_clauses: usize, seed: u64) -> CnfFormula {
    assert!(n_vars >= 3, "3-SAT generation needs at least 3 variables");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(m_clauses);
    for _ in 0..m_clauses {
        let mut vars = Vec::with_capacity(3);
        while vars.len() < 3 {
            let v = rng.gen_range(1..=n_vars as i32);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let clause: Vec<i32> = vars
            .into_iter()
            .map(|v| if rng.gen::<bool>() { v } else { -v })
            .collect();
        clauses.push(clause);
    }
    CnfFormula::new(n_vars, clauses).expect("generator output is valid")
}

/// Symmetric TSP with distances uniform in `[1, 10)`.
pub fn gen_random_tsp(n: usize, seed: u64) -> TspInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = rng.gen_range(1.0..10.0);
            matrix[i][j] = d;
            matrix[j][i] = d;
        }
    }
    TspInstance::new(&matrix).expect("generator output is valid")
}

/// Random feasible convex QP (`lp = false`) or bounded LP (`lp = true`).
///
/// Feasibility: `k = A x_hat + slack` for a random interior point.
/// LP boundedness: `p = A^T lambda` with `lambda >= 0`.
pub fn gen_random_qp(l: usize, m: usize, lp: bool, seed: u64) -> QpInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![vec![0.0; l]; m];
    for row in &mut a {
        for v in row.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    let q = if lp {
        vec![vec![0.0; l]; l]
    } else {
        // Q = R^T R + 0.1 I, positive definite
        let mut r = vec![vec![0.0; l]; l];
        for row in &mut r {
            for v in row.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let mut q = vec![vec![0.0; l]; l];
        for i in 0..l {
            for j in 0..l {
                let mut dot = 0.0;
                for t in 0..l {
                    dot += r[t][i] * r[t][j];
                }
                q[i][j] = dot + if i == j { 0.1 } else { 0.0 };
            }
        }
        q
    };
    let p: Vec<f64> = if lp {
        // boundedness: p = -A^T lambda with lambda >= 0, so every feasible
        // ray (Ad <= 0) is non-improving
        let lambda: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
        (0..l).map(|j| -(0..m).map(|i| a[i][j] * lambda[i]).sum::<f64>()).collect()
    } else {
        (0..l).map(|_| rng.gen_range(-2.0..2.0)).collect()
    };
    let x_hat: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let k: Vec<f64> = (0..m)
        .map(|i| {
            let ax: f64 = a[i].iter().zip(&x_hat).map(|(ai, xi)| ai * xi).sum();
            ax + rng.gen_range(0.1..1.0)
        })
        .collect();
    QpInstance::new(q, p, a, k).expect("generator output is valid")
}

/// Erdos-Renyi style undirected graph with edge probability `p_edge`.
pub fn gen_random_graph_edges(n: usize, p_edge: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p_edge {
                edges.push((u, v));
            }
        }
    }
    edges
}
