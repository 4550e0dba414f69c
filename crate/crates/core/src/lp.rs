//! Dense two-phase revised simplex: Dantzig pricing, lexicographic ratio test.
//!
//! [`Simplex`] works on the standard form `min c^T x, A x = b, x >= 0` and
//! supports appending columns and resuming, which the cutting-plane outer
//! certificates use. [`solve_lp`] converts a general [`LpProblem`] to that form.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

/// Reduced costs above `-OPT_TOL` count as optimal.
pub const OPT_TOL: f64 = 1e-9;
/// Smallest pivot element accepted by the ratio test.
pub const PIVOT_TOL: f64 = 1e-9;
/// Pivot elements below this are numerically zero.
pub const STALL_TOL: f64 = 1e-12;
/// Phase-1 objective at or below this is feasible.
pub const FEAS_TOL: f64 = 1e-9;
/// The basis inverse is recomputed from scratch after this many pivots.
const REFACTOR_EVERY: usize = 100;
/// Relative tolerance for ties in the ratio test.
const LEX_TIE: f64 = 1e-11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("degenerate pivot: row {row}, column {col}, largest candidate {magnitude:.3e}")]
    DegeneratePivot { row: usize, col: usize, magnitude: f64 },
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

/// Revised simplex state on a standard-form problem.
#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    /// Column-major constraint matrix, rows already sign-normalized so `b >= 0`.
    a: Vec<f64>,
    c: Vec<f64>,
    b: Vec<f64>,
    row_sign: Vec<f64>,
    /// Basic variable per row; indices `>= n` are artificials `n + row`.
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    phase: Phase,
    pivots_since_refactor: usize,
    pub iterations: usize,
    pub max_iterations: usize,
    status: Option<LpStatus>,
}

impl Simplex {
    /// `a` is column-major with `m` rows.
    pub fn new(m: usize, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self, LpError> {
        if m == 0 || b.len() != m || a.len() != m * c.len() {
            return Err(LpError::Malformed(format!(
                "dimensions: {} rows, {} rhs, {} matrix entries, {} costs",
                m,
                b.len(),
                a.len(),
                c.len()
            )));
        }
        if a.iter().chain(&b).chain(&c).any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("non-finite entry".into()));
        }
        let row_sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let mut a = a;
        for col in a.chunks_mut(m) {
            for (v, s) in col.iter_mut().zip(&row_sign) {
                *v *= s;
            }
        }
        let b: Vec<f64> = b.iter().zip(&row_sign).map(|(v, s)| v * s).collect();
        let n = c.len();
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Ok(Simplex {
            m,
            a,
            c,
            xb: b.clone(),
            b,
            row_sign,
            basis: (n..n + m).collect(),
            binv,
            phase: Phase::One,
            pivots_since_refactor: 0,
            iterations: 0,
            max_iterations: 1_000_000,
            status: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.c.len()
    }

    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    fn n(&self) -> usize {
        self.c.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n()
    }

    fn cost(&self, j: usize) -> f64 {
        match (self.phase, self.is_artificial(j)) {
            (Phase::One, true) => 1.0,
            (Phase::One, false) => 0.0,
            (Phase::Two, true) => 0.0,
            (Phase::Two, false) => self.c[j],
        }
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.a[j * self.m..(j + 1) * self.m]
    }

    /// Appends a column (in the original row signs) and returns its index.
    pub fn add_column(&mut self, col: &[f64], cost: f64) -> Result<usize, LpError> {
        if col.len() != self.m || !cost.is_finite() || col.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Malformed("bad appended column".into()));
        }
        // Artificial indices shift by one; renumber them.
        let n = self.n();
        for bj in self.basis.iter_mut() {
            if *bj >= n {
                *bj += 1;
            }
        }
        self.a.extend(col.iter().zip(&self.row_sign).map(|(v, s)| v * s));
        self.c.push(cost);
        if self.status == Some(LpStatus::Optimal) {
            self.status = None;
        }
        Ok(n)
    }

    fn duals_internal(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = self.cost(bj);
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, r) in y.iter_mut().zip(row) {
                    *yk += cb * r;
                }
            }
        }
        y
    }

    fn ftran(&self, col: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|i| self.binv[i * m..(i + 1) * m].iter().zip(col).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn pivot(&mut self, r: usize, entering: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        for v in row_r.iter_mut() {
            *v /= piv;
        }
        self.xb[r] /= piv;
        let xr = self.xb[r];
        for (i, row) in before.chunks_mut(m).enumerate() {
            let f = alpha[i];
            if f != 0.0 {
                for (v, rv) in row.iter_mut().zip(row_r.iter()) {
                    *v -= f * rv;
                }
                self.xb[i] -= f * xr;
            }
        }
        for (k, row) in after.chunks_mut(m).enumerate() {
            let i = r + 1 + k;
            let f = alpha[i];
            if f != 0.0 {
                for (v, rv) in row.iter_mut().zip(row_r.iter()) {
                    *v -= f * rv;
                }
                self.xb[i] -= f * xr;
            }
        }
        self.basis[r] = entering;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    /// Recomputes the basis inverse and basic values from scratch.
    fn refactor(&mut self) {
        let m = self.m;
        let n = self.n();
        let mut bmat = DMatrix::<f64>::zeros(m, m);
        for (i, &bj) in self.basis.iter().enumerate() {
            if bj >= n {
                bmat[(bj - n, i)] = 1.0;
            } else {
                for (k, v) in self.column(bj).iter().enumerate() {
                    bmat[(k, i)] = *v;
                }
            }
        }
        let lu = bmat.clone().lu();
        if let Some(inv) = lu.try_inverse() {
            for i in 0..m {
                for k in 0..m {
                    self.binv[i * m + k] = inv[(i, k)];
                }
            }
            // One step of iterative refinement on B x = b.
            let b = nalgebra::DVector::from_column_slice(&self.b);
            let mut x = lu.solve(&b).unwrap_or_else(|| &inv * &b);
            if let Some(dx) = lu.solve(&(&b - &bmat * &x)) {
                x += dx;
            }
            self.xb = x.iter().copied().collect();
            for v in self.xb.iter_mut() {
                if *v < 0.0 && *v > -1e-11 {
                    *v = 0.0;
                }
            }
        }
        self.pivots_since_refactor = 0;
    }

    /// Leaving row by the lexicographic minimum ratio rule.
    ///
    /// Ties in `x_B / alpha` are broken by comparing the rows of `B^-1 / alpha`
    /// left to right, which is the ratio test of the problem with `b` perturbed
    /// by `(e, e^2, ...)` for infinitesimal `e`. No basis repeats.
    fn lex_ratio_test(&self, alpha: &[f64]) -> Option<usize> {
        let m = self.m;
        let mut cand: Vec<usize> = (0..m).filter(|&i| alpha[i] > PIVOT_TOL).collect();
        if cand.is_empty() {
            return None;
        }
        let ratio = |i: usize| self.xb[i].max(0.0) / alpha[i];
        let min = cand.iter().map(|&i| ratio(i)).fold(f64::INFINITY, f64::min);
        cand.retain(|&i| ratio(i) <= min + LEX_TIE * (1.0 + min));
        let mut k = 0;
        while cand.len() > 1 && k < m {
            let key = |i: usize| self.binv[i * m + k] / alpha[i];
            let lo = cand.iter().map(|&i| key(i)).fold(f64::INFINITY, f64::min);
            cand.retain(|&i| key(i) <= lo + LEX_TIE * (1.0 + lo.abs()));
            k += 1;
        }
        cand.into_iter().min_by_key(|&i| self.basis[i])
    }

    /// Runs pivots in the current phase until optimal or unbounded.
    fn iterate(&mut self) -> Result<LpStatus, LpError> {
        let m = self.m;
        let n = self.n();
        loop {
            if self.iterations >= self.max_iterations {
                return Err(LpError::IterationLimit(self.max_iterations));
            }
            let y = self.duals_internal();
            let mut basic = vec![false; n];
            for &bj in &self.basis {
                if bj < n {
                    basic[bj] = true;
                }
            }
            // Dantzig pricing; the lowest index wins ties.
            let mut entering = None;
            let mut best_d = -OPT_TOL;
            for j in 0..n {
                if basic[j] {
                    continue;
                }
                let d = self.cost(j) - y.iter().zip(self.column(j)).map(|(a, b)| a * b).sum::<f64>();
                if d < best_d {
                    entering = Some(j);
                    best_d = d;
                }
            }
            let Some(j) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let alpha = self.ftran(&self.a[j * m..(j + 1) * m]);
            let largest = alpha.iter().cloned().fold(0.0f64, f64::max);
            let Some(r) = self.lex_ratio_test(&alpha) else {
                if largest > STALL_TOL {
                    let row = alpha.iter().position(|&v| v == largest).unwrap_or(0);
                    return Err(LpError::DegeneratePivot { row, col: j, magnitude: largest });
                }
                return Ok(LpStatus::Unbounded);
            };
            self.pivot(r, j, &alpha);
            self.iterations += 1;
        }
    }

    /// Drives zero-level artificials out of the basis where a pivot exists.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        let n = self.n();
        for r in 0..m {
            if self.basis[r] < n {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut pick = None;
            let mut best = PIVOT_TOL;
            for j in 0..n {
                if self.basis.contains(&j) {
                    continue;
                }
                let v: f64 = row.iter().zip(self.column(j)).map(|(a, b)| a * b).sum();
                if v.abs() > best {
                    best = v.abs();
                    pick = Some(j);
                    if best > 1e-3 {
                        break;
                    }
                }
            }
            if let Some(j) = pick {
                let alpha = self.ftran(&self.a[j * m..(j + 1) * m]);
                self.pivot(r, j, &alpha);
            }
        }
    }

    /// Solves from the current basis; phase 1 first if not yet feasible.
    pub fn solve(&mut self) -> Result<LpStatus, LpError> {
        if self.phase == Phase::One {
            let st = self.iterate()?;
            debug_assert_eq!(st, LpStatus::Optimal);
            self.refactor();
            let infeas: f64 = self.basis.iter().zip(&self.xb).filter(|(&j, _)| j >= self.n()).map(|(_, &v)| v).sum();
            if infeas > FEAS_TOL {
                self.status = Some(LpStatus::Infeasible);
                return Ok(LpStatus::Infeasible);
            }
            self.drive_out_artificials();
            self.phase = Phase::Two;
        }
        let st = self.iterate()?;
        self.refactor();
        self.status = Some(st);
        Ok(st)
    }

    /// Primal values of the structural columns.
    pub fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        for (&j, &v) in self.basis.iter().zip(&self.xb) {
            if j < self.n() {
                x[j] = v;
            }
        }
        x
    }

    /// Simplex multipliers `c_B B^-1` in the original row signs.
    ///
    /// After an infeasible phase 1 these form a Farkas certificate:
    /// `y^T A <= 0` and `y^T b > 0`.
    pub fn duals(&self) -> Vec<f64> {
        let y = self.duals_internal();
        y.iter().zip(&self.row_sign).map(|(v, s)| v * s).collect()
    }

    pub fn objective(&self) -> f64 {
        self.primal().iter().zip(&self.c).map(|(x, c)| x * c).sum()
    }

    /// Sum of the artificial values, zero once feasible.
    pub fn infeasibility(&self) -> f64 {
        self.basis.iter().zip(&self.xb).filter(|(&j, _)| j >= self.n()).map(|(_, &v)| v.max(0.0)).sum()
    }

    /// Reduced cost of column `j` in the current phase.
    pub fn reduced_cost(&self, j: usize) -> f64 {
        let y = self.duals_internal();
        self.cost(j) - y.iter().zip(self.column(j)).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// A linear program in general form:
/// `min c^T x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub`, `lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    /// Per-variable bounds; `None` means `[0, inf)` for every variable.
    pub bounds: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Multipliers for the equality rows followed by the inequality rows.
    pub dual: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lo + x'`.
    Shift(usize, f64),
    /// `x = hi - x'`.
    Flip(usize, f64),
    /// `x = x+ - x-`.
    Free(usize, usize),
}

/// Solves a general-form problem by conversion to standard form.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    let nv = p.objective.len();
    let bounds = p.bounds.clone().unwrap_or_else(|| vec![(0.0, f64::INFINITY); nv]);
    if bounds.len() != nv
        || p.a_eq.len() != p.b_eq.len()
        || p.a_ub.len() != p.b_ub.len()
        || p.a_eq.iter().chain(&p.a_ub).any(|r| r.len() != nv)
    {
        return Err(LpError::Malformed("inconsistent dimensions".into()));
    }
    if bounds.iter().any(|&(lo, hi)| lo > hi || lo.is_nan() || hi.is_nan()) {
        return Err(LpError::Malformed("empty or invalid variable bounds".into()));
    }
    let mut map = Vec::with_capacity(nv);
    let mut ncols = 0;
    let mut bound_rows = Vec::new();
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        if lo.is_finite() {
            map.push(VarMap::Shift(ncols, lo));
            if hi.is_finite() {
                bound_rows.push((j, ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            map.push(VarMap::Flip(ncols, hi));
            ncols += 1;
        } else {
            map.push(VarMap::Free(ncols, ncols + 1));
            ncols += 2;
        }
    }
    let n_eq = p.a_eq.len();
    let n_ub = p.a_ub.len();
    let m = n_eq + n_ub + bound_rows.len();
    if m == 0 {
        return Err(LpError::Malformed("no constraints".into()));
    }
    let n_slack = n_ub + bound_rows.len();
    let n = ncols + n_slack;
    let mut a = vec![0.0; m * n];
    let mut b = vec![0.0; m];
    let mut c = vec![0.0; n];
    let rows = p.a_eq.iter().zip(&p.b_eq).chain(p.a_ub.iter().zip(&p.b_ub));
    for (i, (row, &rhs)) in rows.enumerate() {
        let mut r = rhs;
        for (j, &v) in row.iter().enumerate() {
            match map[j] {
                VarMap::Shift(k, lo) => {
                    a[k * m + i] += v;
                    r -= v * lo;
                }
                VarMap::Flip(k, hi) => {
                    a[k * m + i] -= v;
                    r -= v * hi;
                }
                VarMap::Free(k1, k2) => {
                    a[k1 * m + i] += v;
                    a[k2 * m + i] -= v;
                }
            }
        }
        b[i] = r;
    }
    for s in 0..n_ub {
        let i = n_eq + s;
        a[(ncols + s) * m + i] = 1.0;
    }
    for (s, &(_, k, width)) in bound_rows.iter().enumerate() {
        let i = n_eq + n_ub + s;
        a[k * m + i] = 1.0;
        a[(ncols + n_ub + s) * m + i] = 1.0;
        b[i] = width;
    }
    for (j, &cv) in p.objective.iter().enumerate() {
        match map[j] {
            VarMap::Shift(k, _) => c[k] += cv,
            VarMap::Flip(k, _) => c[k] -= cv,
            VarMap::Free(k1, k2) => {
                c[k1] += cv;
                c[k2] -= cv;
            }
        }
    }
    let mut sx = Simplex::new(m, a, b, c)?;
    let status = sx.solve()?;
    let xs = sx.primal();
    let x: Vec<f64> = map
        .iter()
        .map(|&mv| match mv {
            VarMap::Shift(k, lo) => lo + xs[k],
            VarMap::Flip(k, hi) => hi - xs[k],
            VarMap::Free(k1, k2) => xs[k1] - xs[k2],
        })
        .collect();
    let mut dual = sx.duals();
    dual.truncate(n_eq + n_ub);
    let objective = if status == LpStatus::Optimal {
        p.objective.iter().zip(&x).map(|(c, x)| c * x).sum()
    } else {
        f64::NAN
    };
    Ok(LpSolution { status, x, dual, objective, iterations: sx.iterations })
}
