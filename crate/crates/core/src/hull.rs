//! Finite-degree hull membership by linear programming.
//!
//! An inner certificate is a probability measure on a sample reproducing the
//! basis values at `q`; an outer certificate is a polynomial whose modulus at
//! `q` beats its sup over the sample. By Farkas duality at most one of the two
//! exists for a fixed basis and sample.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::geometry::{
    build_default_geometry, sample_set, Family, set_membership, validate_geometry, ComplexPoint, GeometryError,
    SampleId, SceneGeometry, SetLabel, SetSample, DEFAULT_H_GRID, MEMBERSHIP_TOL,
};
use crate::lp::{LpError, LpStatus, Simplex};
use crate::polybasis::{make_basis, poly_eval, BasisMode, MonomialBasis, Poly, PolyError};
use crate::C64;

/// Largest moment mismatch accepted in a certificate.
pub const CERT_RESIDUAL_TOL: f64 = 1e-8;
/// Smallest outer margin reported as a separation.
pub const MIN_OUTER_MARGIN: f64 = 1e-6;
/// Default number of rotations approximating the modulus constraint.
pub const DEFAULT_M_GON: usize = 16;
/// Coefficient box of the outer problem.
const COEFF_BOX: f64 = 1e6;
const START_POINTS: usize = 200;
const BATCH: usize = 50;
const MAX_CUT_COLUMNS: usize = 10_000;
const CUT_TOL: f64 = 1e-9;
const INNER_START_COLUMNS: usize = 1000;
const INNER_BATCH: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{stage}: {source}")]
    Stage { stage: String, source: Box<HullError> },
}

impl HullError {
    fn at(self, stage: impl Into<String>) -> HullError {
        HullError::Stage { stage: stage.into(), source: Box::new(self) }
    }
}

/// Discrete representing measure for evaluation at `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerCertificate {
    pub q: ComplexPoint,
    pub basis: MonomialBasis,
    pub sample: SampleId,
    /// `(sample index, weight)` pairs with positive weight.
    pub weights: Vec<(usize, f64)>,
    pub residual: f64,
    pub tolerance: f64,
    pub iterations: usize,
}

impl InnerCertificate {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "point": self.q.to_reals(),
            "basis": { "mode": self.basis.mode.name(), "degrees": self.basis.mode.degrees() },
            "sample_h": self.sample.h(),
            "weights": self.weights.iter().map(|&(i, w)| json!([i, w])).collect::<Vec<_>>(),
            "residual": self.residual,
            "degree": self.basis.mode.degrees(),
        })
    }
}

/// A candidate separator from an infeasible moment problem: `Re P <= 0` on the
/// sample and `Re P(q) > 0`, so `exp(P)` separates `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasWitness {
    pub poly: Poly,
    pub re_at_q: f64,
    pub max_re_on_sample: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InnerOutcome {
    Feasible(InnerCertificate),
    Infeasible(FarkasWitness),
}

impl InnerOutcome {
    pub fn certificate(&self) -> Option<&InnerCertificate> {
        match self {
            InnerOutcome::Feasible(c) => Some(c),
            InnerOutcome::Infeasible(_) => None,
        }
    }
}

/// Separating polynomial with `sup` over the sample normalized to one.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterCertificate {
    pub q: ComplexPoint,
    pub poly: Poly,
    pub sample: SampleId,
    pub sup_on_sample: f64,
    pub value_at_q: C64,
    /// `|P(q)| / sup |P| - 1` on the sample.
    pub margin: f64,
    pub refined: bool,
    /// Optimal value of the polygonal problem before normalization.
    pub lp_value: f64,
    pub cuts: usize,
}

impl OuterCertificate {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "point": self.q.to_reals(),
            "poly": self.poly.to_json_value(),
            "sup": self.sup_on_sample,
            "value": [self.value_at_q.re, self.value_at_q.im],
            "margin": self.margin,
            "refined": self.refined,
        })
    }
}

fn is_sample_point(q: &ComplexPoint, sample: &SetSample) -> Option<usize> {
    sample.points.iter().position(|p| p == q)
}

/// Moment problem: a probability measure on the sample matching the basis values at `q`.
pub fn inner_certificate(
    q: &ComplexPoint,
    sample: &SetSample,
    basis: &MonomialBasis,
    tol: f64,
) -> Result<InnerOutcome, HullError> {
    if sample.is_empty() {
        return Err(HullError::Usage("inner certificate needs a nonempty sample".into()));
    }
    let k = basis.len();
    let mut phi_q = vec![C64::new(0.0, 0.0); k];
    basis.eval_into(q, &mut phi_q)?;
    if let Some(i) = is_sample_point(q, sample) {
        return Ok(InnerOutcome::Feasible(InnerCertificate {
            q: *q,
            basis: basis.clone(),
            sample: sample.id,
            weights: vec![(i, 1.0)],
            residual: 0.0,
            tolerance: CERT_RESIDUAL_TOL,
            iterations: 0,
        }));
    }
    let constant = basis.index_of((0, 0));
    let moments: Vec<usize> = (0..k).filter(|&j| Some(j) != constant).collect();
    let n = sample.len();
    if moments.is_empty() {
        // Only constants: every probability measure represents q.
        return Ok(InnerOutcome::Feasible(InnerCertificate {
            q: *q,
            basis: basis.clone(),
            sample: sample.id,
            weights: vec![(0, 1.0)],
            residual: 0.0,
            tolerance: CERT_RESIDUAL_TOL,
            iterations: 0,
        }));
    }
    let rows = basis.eval_rows(&sample.points)?;
    // Centred non-constant moments in whitened coordinates; the row sum = 1
    // absorbs the centring.
    let nk = moments.len();
    let mut mean = vec![C64::new(0.0, 0.0); nk];
    for i in 0..n {
        for (mj, &j) in mean.iter_mut().zip(&moments) {
            *mj += rows[i * k + j];
        }
    }
    for mj in mean.iter_mut() {
        *mj /= n as f64;
    }
    // Real and imaginary parts side by side; the sample may satisfy real
    // relations (for instance a real-valued moment) that complex whitening
    // would keep as singular rows.
    let p = 2 * nk;
    let split = |phi: &[C64], i: usize| -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (c, (&j, mj)) in moments.iter().zip(&mean).enumerate() {
            let v = phi[i * k + j] - mj;
            out[c] = v.re;
            out[nk + c] = v.im;
        }
        out
    };
    let centred: Vec<f64> = (0..n).flat_map(|i| split(&rows, i)).collect();
    let white = RealWhitening::new(&centred, n, p);
    let nm = white.rank();
    let m = nm + 1;
    let table: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut col = white.apply(&centred[i * p..(i + 1) * p]);
            col.push(1.0);
            col
        })
        .collect();
    let column = |i: usize| -> Vec<f64> { table[i * m..(i + 1) * m].to_vec() };
    let mut b = white.apply(&split(&phi_q, 0));
    b.push(1.0);
    // Restricted master over an evenly strided subset, grown by Farkas pricing.
    let stride = n.div_ceil(INNER_START_COLUMNS).max(1);
    let mut active: Vec<usize> = (0..n).step_by(stride).collect();
    let mut in_master = vec![false; n];
    let mut a = Vec::with_capacity(active.len() * m);
    for &i in &active {
        a.extend(column(i));
        in_master[i] = true;
    }
    let mut sx = Simplex::new(m, a, b, vec![0.0; active.len()])?;
    loop {
        let status = sx.solve()?;
        if status != LpStatus::Infeasible && sx.infeasibility() <= tol {
            break;
        }
        let y = sx.duals();
        let mut priced: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .filter(|&i| !in_master[i])
            .filter_map(|i| {
                let v: f64 = table[i * m..(i + 1) * m].iter().zip(&y).map(|(a, b)| a * b).sum();
                (v > crate::lp::OPT_TOL).then_some((v, i))
            })
            .collect();
        if priced.is_empty() {
            // Re(c phi) = c.re phi.re - c.im phi.im.
            let a = white.coefficients(&y[..nm]);
            let mut coeffs = vec![C64::new(0.0, 0.0); k];
            let mut shift = C64::new(0.0, 0.0);
            for (c, (&j, mj)) in moments.iter().zip(&mean).enumerate() {
                let cj = C64::new(a[c], -a[nk + c]);
                coeffs[j] = cj;
                shift += cj * mj;
            }
            // Constant term: the sum row's multiplier minus the centring.
            let offset = match constant {
                Some(c0) => {
                    coeffs[c0] = (C64::new(y[nm], 0.0) - shift) * basis.scale[c0];
                    0.0
                }
                None => y[nm] - shift.re,
            };
            let poly = Poly::new(basis.clone(), coeffs)?;
            let re_at_q = poly_eval(&poly, q)?.re + offset;
            let max_re_on_sample = (0..n)
                .map(|i| (0..k).map(|j| rows[i * k + j] * poly.coeffs[j]).sum::<C64>().re)
                .fold(f64::NEG_INFINITY, f64::max)
                + offset;
            return Ok(InnerOutcome::Infeasible(FarkasWitness { poly, re_at_q, max_re_on_sample }));
        }
        priced.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for &(_, i) in priced.iter().take(INNER_BATCH) {
            sx.add_column(&column(i), 0.0)?;
            in_master[i] = true;
            active.push(i);
        }
    }
    let x = sx.primal();
    let total: f64 = x.iter().sum();
    let mut weights: Vec<(usize, f64)> = x
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(c, &v)| (active[c], v / total))
        .collect();
    weights.sort_by_key(|w| w.0);
    let mut residual = moment_residual(q, sample, basis, &weights)?;
    for _ in 0..2 {
        let Some(better) = polish_weights(&phi_q, &rows, k, &weights) else { break };
        let r = moment_residual(q, sample, basis, &better)?;
        if r >= residual {
            break;
        }
        weights = better;
        residual = r;
    }
    Ok(InnerOutcome::Feasible(InnerCertificate {
        q: *q,
        basis: basis.clone(),
        sample: sample.id,
        weights,
        residual,
        tolerance: CERT_RESIDUAL_TOL,
        iterations: sx.iterations,
    }))
}

/// One least-squares correction of the weights on their support, in raw
/// moment coordinates. Rejected when a weight would turn negative.
fn polish_weights(phi_q: &[C64], rows: &[C64], k: usize, weights: &[(usize, f64)]) -> Option<Vec<(usize, f64)>> {
    let s = weights.len();
    let m = 2 * k + 1;
    let mut a = DMatrix::<f64>::zeros(m, s);
    let mut r = nalgebra::DVector::<f64>::zeros(m);
    for j in 0..k {
        r[j] = phi_q[j].re;
        r[k + j] = phi_q[j].im;
    }
    r[2 * k] = 1.0;
    for (c, &(i, w)) in weights.iter().enumerate() {
        for j in 0..k {
            let v = rows[i * k + j];
            a[(j, c)] = v.re;
            a[(k + j, c)] = v.im;
            r[j] -= w * v.re;
            r[k + j] -= w * v.im;
        }
        a[(2 * k, c)] = 1.0;
        r[2 * k] -= w;
    }
    let delta = a.svd(true, true).solve(&r, 1e-14).ok()?;
    let out: Vec<(usize, f64)> = weights.iter().zip(delta.iter()).map(|(&(i, w), d)| (i, w + d)).collect();
    out.iter().all(|w| w.1 >= 0.0).then_some(out)
}

fn moment_residual(
    q: &ComplexPoint,
    sample: &SetSample,
    basis: &MonomialBasis,
    weights: &[(usize, f64)],
) -> Result<f64, HullError> {
    let k = basis.len();
    let mut acc = vec![C64::new(0.0, 0.0); k];
    let mut row = vec![C64::new(0.0, 0.0); k];
    for &(i, w) in weights {
        let p = sample
            .points
            .get(i)
            .ok_or_else(|| HullError::Usage(format!("weight index {i} outside the sample")))?;
        basis.eval_into(p, &mut row)?;
        for (a, r) in acc.iter_mut().zip(&row) {
            *a += r * w;
        }
    }
    basis.eval_into(q, &mut row)?;
    Ok(acc.iter().zip(&row).map(|(a, r)| (a - r).norm()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerReport {
    pub residual: f64,
    pub weight_sum: f64,
    pub negative_weights: usize,
    pub trials: usize,
    pub violations: usize,
    /// Largest `|P(q)| - (max |P| + residual K)` over the trials.
    pub max_slack_violation: f64,
    pub ok: bool,
}

/// Re-checks an inner certificate against random unit-norm polynomials.
pub fn verify_inner(cert: &InnerCertificate, sample: &SetSample, trials: usize, seed: u64) -> Result<InnerReport, HullError> {
    if sample.id != cert.sample {
        return Err(HullError::Usage("certificate refers to a different sample".into()));
    }
    let negative_weights = cert.weights.iter().filter(|w| w.1 < 0.0).count();
    let weight_sum: f64 = cert.weights.iter().map(|w| w.1).sum();
    let residual = moment_residual(&cert.q, sample, &cert.basis, &cert.weights)?;
    let k = cert.basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys: Vec<Vec<C64>> = (0..trials)
        .map(|_| {
            let c: Vec<C64> = (0..k)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            c.into_iter().map(|v| v / norm).collect()
        })
        .collect();
    let rows = cert.basis.eval_rows(&sample.points)?;
    let sups: Vec<f64> = polys
        .par_iter()
        .map(|c| {
            rows.chunks(k)
                .map(|r| r.iter().zip(c).map(|(a, b)| a * b).sum::<C64>().norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let mut phi_q = vec![C64::new(0.0, 0.0); k];
    cert.basis.eval_into(&cert.q, &mut phi_q)?;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for (c, sup) in polys.iter().zip(&sups) {
        let at_q = phi_q.iter().zip(c).map(|(a, b)| a * b).sum::<C64>().norm();
        let slack = at_q - (sup + residual * k as f64);
        worst = worst.max(slack);
        if slack > 1e-12 {
            violations += 1;
        }
    }
    let ok = negative_weights == 0
        && (weight_sum - 1.0).abs() <= 1e-9
        && residual <= cert.tolerance
        && violations == 0;
    Ok(InnerReport {
        residual,
        weight_sum,
        negative_weights,
        trials,
        violations,
        max_slack_violation: if trials == 0 { 0.0 } else { worst },
        ok,
    })
}

/// Values of `P` with coefficient vector `coeffs` at every sample point.
fn eval_all(basis: &MonomialBasis, coeffs: &[C64], points: &[ComplexPoint]) -> Result<Vec<C64>, HullError> {
    let k = basis.len();
    points
        .par_chunks(1024)
        .map(|chunk| {
            let mut row = vec![C64::new(0.0, 0.0); k];
            chunk
                .iter()
                .map(|p| {
                    basis.eval_into(p, &mut row)?;
                    Ok(row.iter().zip(coeffs).map(|(a, b)| a * b).sum())
                })
                .collect::<Result<Vec<C64>, PolyError>>()
        })
        .collect::<Result<Vec<Vec<C64>>, PolyError>>()
        .map(|v| v.concat())
        .map_err(HullError::from)
}

fn rotation(j: usize, m: usize) -> C64 {
    C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / m as f64)
}

/// Column of the dual problem for the constraint `Re(w_j P(p)) <= t`.
fn cut_column(phi: &[C64], omega: C64) -> Vec<f64> {
    let k = phi.len();
    let mut col = vec![0.0; 2 * k + 1];
    for (r, v) in phi.iter().enumerate() {
        let g = omega * v;
        col[r] = g.re;
        col[k + r] = -g.im;
    }
    col[2 * k] = 1.0;
    col
}

/// Searches for a polynomial separating `q` from the sample.
///
/// Solves `min t` subject to `Re(w_j P(p_i)) <= t` over the `m`-gon rotations,
/// `P(q) = 1`, by cutting planes on the dual side: each constraint is a column
/// of the dual problem, and the most violated constraints are appended until
/// none is violated. The returned margin is recomputed from the exact sup of
/// `|P|` over the sample.
pub fn outer_certificate(
    q: &ComplexPoint,
    sample: &SetSample,
    basis: &MonomialBasis,
    m_gon: usize,
    min_margin: f64,
) -> Result<Option<OuterCertificate>, HullError> {
    if m_gon < 8 {
        return Err(HullError::Usage(format!("mGon must be at least 8, got {m_gon}")));
    }
    if sample.is_empty() {
        return Err(HullError::Usage("outer certificate needs a nonempty sample".into()));
    }
    if is_sample_point(q, sample).is_some() {
        return Err(HullError::Usage("the probe point is a sample point".into()));
    }
    let kb = basis.len();
    let mut phi_q = vec![C64::new(0.0, 0.0); kb];
    basis.eval_into(q, &mut phi_q)?;
    let n = sample.len();
    let rows = basis.eval_rows(&sample.points)?;
    let white = Whitening::new(&rows, n, kb);
    let k = white.rank();
    if k == 0 {
        return Ok(None);
    }
    let psi_q = white.apply(&phi_q);
    let psi = |i: usize| white.apply(&rows[i * kb..(i + 1) * kb]);
    let m = 2 * k + 1;
    let mut a = Vec::new();
    let mut cost = Vec::new();
    let mut push = |col: Vec<f64>, c: f64| {
        a.extend(col);
        cost.push(c);
    };
    for r in 0..2 * k {
        for sign in [1.0, -1.0] {
            let mut col = vec![0.0; m];
            col[r] = sign;
            push(col, COEFF_BOX);
        }
    }
    let cvec: Vec<f64> = psi_q.iter().map(|v| v.re).chain(psi_q.iter().map(|v| -v.im)).collect();
    let dvec: Vec<f64> = psi_q.iter().map(|v| v.im).chain(psi_q.iter().map(|v| v.re)).collect();
    for (vec, costs) in [(&cvec, [-1.0, 1.0]), (&dvec, [0.0, 0.0])] {
        for (sign, c) in [(-1.0, costs[0]), (1.0, costs[1])] {
            let mut col: Vec<f64> = vec.iter().map(|v| sign * v).collect();
            col.push(0.0);
            push(col, c);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sample.id.digest ^ 0x5eed);
    let mut start: Vec<usize> = if n <= START_POINTS {
        (0..n).collect()
    } else {
        let mut picked = HashSet::new();
        while picked.len() < START_POINTS {
            picked.insert(rng.random_range(0..n));
        }
        picked.into_iter().collect()
    };
    start.sort_unstable();
    let mut present: HashSet<(usize, usize)> = HashSet::new();
    for &i in &start {
        let row = psi(i);
        for j in 0..m_gon {
            push(cut_column(&row, rotation(j, m_gon)), 0.0);
            present.insert((i, j));
        }
    }
    let mut sx = Simplex::new(m, a, vec![0.0; 2 * k].into_iter().chain([1.0]).collect(), cost)?;
    let values_of = |coeffs: &[C64]| -> Vec<C64> {
        rows.par_chunks(kb)
            .map(|r| r.iter().zip(coeffs).map(|(a, b)| a * b).sum())
            .collect()
    };
    let mut cuts = present.len();
    let (coeffs, t) = loop {
        let st = sx.solve()?;
        if st != LpStatus::Optimal {
            return Err(HullError::Usage(format!("outer problem ended {st:?}")));
        }
        let y = sx.duals();
        let white_coeffs: Vec<C64> = (0..k).map(|r| C64::new(y[r], y[k + r])).collect();
        let coeffs = white.coefficients(&white_coeffs);
        let t = -y[2 * k];
        if cuts >= MAX_CUT_COLUMNS {
            break (coeffs, t);
        }
        let values = values_of(&coeffs);
        let mut viol: Vec<(f64, usize, usize)> = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                let jr = (-v.arg() * m_gon as f64 / std::f64::consts::TAU).round() as i64;
                let j = jr.rem_euclid(m_gon as i64) as usize;
                let excess = (rotation(j, m_gon) * v).re - t;
                (excess > CUT_TOL && !present.contains(&(i, j))).then_some((excess, i, j))
            })
            .collect();
        if viol.is_empty() {
            break (coeffs, t);
        }
        viol.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        for &(_, i, j) in viol.iter().take(BATCH) {
            sx.add_column(&cut_column(&psi(i), rotation(j, m_gon)), 0.0)?;
            present.insert((i, j));
            cuts += 1;
        }
    };
    let values = values_of(&coeffs);
    let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let at_q: C64 = phi_q.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
    if !(sup > 0.0 && sup.is_finite()) {
        return Ok(None);
    }
    let margin = at_q.norm() / sup - 1.0;
    if margin < min_margin {
        return Ok(None);
    }
    let poly = Poly::new(basis.clone(), coeffs.iter().map(|c| c / sup).collect())?;
    Ok(Some(OuterCertificate {
        q: *q,
        poly,
        sample: sample.id,
        sup_on_sample: 1.0,
        value_at_q: at_q / sup,
        margin,
        refined: false,
        lp_value: t,
        cuts,
    }))
}

/// Change of basis making the sample evaluation matrix orthonormal up to `sqrt(N)`.
///
/// With `Phi = Q R` and `R = U S V*`, the map `T = sqrt(N) V S^-1` sends whitened
/// coefficients to monomial ones; directions with singular value below
/// `WHITEN_RCOND` times the largest are dropped.
struct Whitening {
    /// `K x r`, row-major.
    t: Vec<C64>,
    k: usize,
    r: usize,
}

const WHITEN_RCOND: f64 = 1e-12;

impl Whitening {
    fn new(rows: &[C64], n: usize, k: usize) -> Self {
        let phi = DMatrix::from_row_slice(n, k, rows);
        let r = if n >= k {
            phi.qr().r()
        } else {
            phi
        };
        let svd = r.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| smax > 0.0 && svd.singular_values[i] > WHITEN_RCOND * smax)
            .collect();
        let scale = (n as f64).sqrt();
        let mut t = vec![C64::new(0.0, 0.0); k * keep.len()];
        for (c, &i) in keep.iter().enumerate() {
            let f = scale / svd.singular_values[i];
            for row in 0..k {
                // V = (V*)^H, column i of V is the conjugated row i of V*.
                t[row * keep.len() + c] = v_t[(i, row)].conj() * f;
            }
        }
        Whitening { t, k, r: keep.len() }
    }

    fn rank(&self) -> usize {
        self.r
    }

    /// Whitened basis values `phi T` from monomial values `phi`.
    fn apply(&self, phi: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.r];
        for (row, p) in phi.iter().enumerate().take(self.k) {
            for (o, t) in out.iter_mut().zip(&self.t[row * self.r..(row + 1) * self.r]) {
                *o += p * t;
            }
        }
        out
    }

    /// Monomial coefficients `T c` of a polynomial with whitened coefficients `c`.
    fn coefficients(&self, c: &[C64]) -> Vec<C64> {
        (0..self.k)
            .map(|row| self.t[row * self.r..(row + 1) * self.r].iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Real counterpart of [`Whitening`] for the inner LP.
struct RealWhitening {
    /// `p x r`, row-major.
    t: Vec<f64>,
    p: usize,
    r: usize,
}

impl RealWhitening {
    fn new(rows: &[f64], n: usize, p: usize) -> Self {
        let a = DMatrix::from_row_slice(n, p, rows);
        let r = if n >= p { a.qr().r() } else { a };
        let svd = r.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| smax > 0.0 && svd.singular_values[i] > WHITEN_RCOND * smax)
            .collect();
        let scale = (n as f64).sqrt();
        let mut t = vec![0.0; p * keep.len()];
        for (c, &i) in keep.iter().enumerate() {
            let f = scale / svd.singular_values[i];
            for row in 0..p {
                t[row * keep.len() + c] = v_t[(i, row)] * f;
            }
        }
        RealWhitening { t, p, r: keep.len() }
    }

    fn rank(&self) -> usize {
        self.r
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.r];
        for (row, v) in x.iter().enumerate().take(self.p) {
            for (o, t) in out.iter_mut().zip(&self.t[row * self.r..(row + 1) * self.r]) {
                *o += v * t;
            }
        }
        out
    }

    fn coefficients(&self, c: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|row| self.t[row * self.r..(row + 1) * self.r].iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterReport {
    pub margin: f64,
    pub refined_sup: f64,
    pub refined_margin: f64,
    pub retained: f64,
    pub refined: bool,
}

/// Re-evaluates an outer certificate on a finer sample.
pub fn verify_outer(cert: &OuterCertificate, refined: &SetSample) -> Result<OuterReport, HullError> {
    if refined.h > cert.sample.h() / 4.0 * (1.0 + 1e-12) {
        return Err(HullError::Usage(format!(
            "refined sample must have h <= {} (got {})",
            cert.sample.h() / 4.0,
            refined.h
        )));
    }
    let values = eval_all(&cert.poly.basis, &cert.poly.coeffs, &refined.points)?;
    let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let at_q = poly_eval(&cert.poly, &cert.q)?.norm();
    let refined_margin = at_q / sup - 1.0;
    let retained = refined_margin / cert.margin;
    Ok(OuterReport { margin: cert.margin, refined_sup: sup, refined_margin, retained, refined: retained >= 0.5 })
}

/// Marks the certificate as checked on a refined sample.
pub fn refine_outer(cert: &mut OuterCertificate, refined: &SetSample) -> Result<OuterReport, HullError> {
    let rep = verify_outer(cert, refined)?;
    cert.refined = rep.refined;
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HullMode {
    Polynomial,
    Laurent,
}

impl HullMode {
    /// Basis for ladder rung `d`; Laurent rungs use the box `(d, d, min(d, 4))`.
    pub fn basis_mode(&self, d: u32) -> BasisMode {
        match self {
            HullMode::Polynomial => BasisMode::Polynomial(d),
            HullMode::Laurent => BasisMode::Laurent(d, d, d.min(4)),
        }
    }
}

impl std::str::FromStr for HullMode {
    type Err = HullError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "poly" | "polynomial" => Ok(HullMode::Polynomial),
            "laurent" => Ok(HullMode::Laurent),
            _ => Err(HullError::Usage(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HullVerdict {
    Inside(BasisMode, Box<InnerCertificate>),
    Outside(BasisMode, Box<OuterCertificate>),
    Ambiguous(Option<BasisMode>, String),
}

impl HullVerdict {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullVerdict::Inside(..))
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, HullVerdict::Outside(..))
    }

    pub fn short(&self) -> &'static str {
        match self {
            HullVerdict::Inside(..) => "In",
            HullVerdict::Outside(..) => "Out",
            HullVerdict::Ambiguous(..) => "Ambiguous",
        }
    }
}

/// Tolerances shared by the certificate searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct CertOptions {
    /// Phase-one objective accepted as feasible.
    pub feas_tol: f64,
    /// Largest moment residual of an accepted inner certificate.
    pub residual_tol: f64,
    /// Smallest outer margin reported.
    pub min_margin: f64,
    pub m_gon: usize,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions {
            feas_tol: crate::lp::FEAS_TOL,
            residual_tol: CERT_RESIDUAL_TOL,
            min_margin: MIN_OUTER_MARGIN,
            m_gon: DEFAULT_M_GON,
        }
    }
}

impl CertOptions {
    pub fn validate(&self) -> Result<(), HullError> {
        if !(self.feas_tol > 0.0 && self.residual_tol > 0.0 && self.min_margin > 0.0) {
            return Err(HullError::Usage("tolerances must be positive".into()));
        }
        if self.m_gon < 8 {
            return Err(HullError::Usage(format!("mGon must be at least 8, got {}", self.m_gon)));
        }
        Ok(())
    }
}

/// Walks a degree ladder: the first separation wins, otherwise the largest
/// degree with a representing measure, otherwise ambiguous.
pub fn classify_point(
    q: &ComplexPoint,
    sample: &SetSample,
    mode: HullMode,
    ladder: &[u32],
) -> Result<HullVerdict, HullError> {
    classify_point_with(q, sample, mode, ladder, &CertOptions::default())
}

/// [`classify_point`] with explicit tolerances.
pub fn classify_point_with(
    q: &ComplexPoint,
    sample: &SetSample,
    mode: HullMode,
    ladder: &[u32],
    opts: &CertOptions,
) -> Result<HullVerdict, HullError> {
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HullError::Usage("degree ladder must be increasing".into()));
    }
    let modes: Vec<BasisMode> = ladder.iter().map(|&d| mode.basis_mode(d)).collect();
    classify_modes(q, sample, &modes, opts)
}

/// Ladder walk over explicit bases, in order.
pub fn classify_modes(
    q: &ComplexPoint,
    sample: &SetSample,
    modes: &[BasisMode],
    opts: &CertOptions,
) -> Result<HullVerdict, HullError> {
    if modes.iter().any(|m| m.is_laurent()) && q.z.norm() <= crate::polybasis::POLE_RADIUS {
        return Ok(HullVerdict::Ambiguous(None, "z = 0 is outside C* x C".into()));
    }
    let on_sample = is_sample_point(q, sample).is_some();
    let mut inside: Option<(BasisMode, InnerCertificate)> = None;
    let mut notes = Vec::new();
    for &bm in modes {
        let basis = make_basis(bm, Some(sample))?;
        if basis.len() <= 1 {
            notes.push(format!("{bm}: constants neither separate nor constrain"));
            continue;
        }
        if !on_sample {
            if let Some(cert) = outer_certificate(q, sample, &basis, opts.m_gon, opts.min_margin)? {
                return Ok(HullVerdict::Outside(bm, Box::new(cert)));
            }
        }
        match inner_certificate(q, sample, &basis, opts.feas_tol)? {
            InnerOutcome::Feasible(c) if c.residual <= opts.residual_tol => inside = Some((bm, c)),
            InnerOutcome::Feasible(c) => notes.push(format!("{bm}: residual {:.2e}", c.residual)),
            InnerOutcome::Infeasible(_) => notes.push(format!("{bm}: neither certificate")),
        }
    }
    Ok(match inside {
        Some((bm, c)) => HullVerdict::Inside(bm, Box::new(c)),
        None => HullVerdict::Ambiguous(modes.last().copied(), notes.join("; ")),
    })
}

/// Which coordinate a scan slice holds fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SliceFixed {
    W(C64),
    Z(C64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub fixed: SliceFixed,
    /// `[x0, x1, y0, y1]` in the free coordinate.
    pub window: [f64; 4],
    pub n: usize,
}

impl ScanGrid {
    /// Node `(ix, iy)` of the free coordinate and the resulting point.
    pub fn node(&self, ix: usize, iy: usize) -> (C64, ComplexPoint) {
        let [x0, x1, y0, y1] = self.window;
        let d = (self.n.max(2) - 1) as f64;
        let c = C64::new(x0 + (x1 - x0) * ix as f64 / d, y0 + (y1 - y0) * iy as f64 / d);
        let p = match self.fixed {
            SliceFixed::W(w) => ComplexPoint::new(c, w),
            SliceFixed::Z(z) => ComplexPoint::new(z, c),
        };
        (c, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanVerdict {
    In,
    Out,
    Ambiguous,
}

/// Single-degree classification of every node of a slice grid, row `iy` major.
pub fn hull_scan(grid: &ScanGrid, sample: &SetSample, mode: HullMode, degree: u32) -> Result<Vec<Vec<ScanVerdict>>, HullError> {
    hull_scan_with(grid, sample, mode.basis_mode(degree), &CertOptions::default())
}

/// Scan with an explicit basis and tolerances.
pub fn hull_scan_with(
    grid: &ScanGrid,
    sample: &SetSample,
    basis_mode: BasisMode,
    opts: &CertOptions,
) -> Result<Vec<Vec<ScanVerdict>>, HullError> {
    if grid.n == 0 || grid.n > 256 {
        return Err(HullError::Usage(format!("scan grid size must be in 1..=256, got {}", grid.n)));
    }
    let n = grid.n;
    let cells: Vec<ScanVerdict> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (_, p) = grid.node(idx % n, idx / n);
            Ok(match classify_modes(&p, sample, &[basis_mode], opts)? {
                HullVerdict::Inside(..) => ScanVerdict::In,
                HullVerdict::Outside(..) => ScanVerdict::Out,
                HullVerdict::Ambiguous(..) => ScanVerdict::Ambiguous,
            })
        })
        .collect::<Result<_, HullError>>()?;
    Ok(cells.chunks(n).map(|r| r.to_vec()).collect())
}

/// A point at distance `delta` from sample point `i` along `i` times a unit
/// tangent `mix.0 u + mix.1 v`.
///
/// The sign of the curve component is chosen so that `z` leaves the closed
/// domain bounded by the base curve of the sample point.
pub fn near_off_probe(geom: &SceneGeometry, sample: &SetSample, i: usize, mix: (f64, f64), delta: f64) -> Option<ComplexPoint> {
    let (u, v) = sample.tangent_frame(geom, i)?;
    let curve = match sample.params[i].family {
        Family::X1 => Some(&geom.curve2),
        Family::X2 => Some(&geom.curve1),
        _ => None,
    };
    let make = |a: f64| {
        let tau = u * C64::new(a, 0.0) + v * C64::new(mix.1, 0.0);
        let nrm = tau.norm();
        (nrm > 0.0).then(|| sample.points[i] + tau * C64::new(0.0, delta / nrm))
    };
    let q = make(mix.0)?;
    match curve {
        Some(c) if c.winding_number(q.z).ok()? != 0 => make(-mix.0),
        _ => Some(q),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub h: f64,
    pub poly_ladder: Vec<u32>,
    pub laurent_ladder: Vec<u32>,
    pub inner_degree: u32,
    pub probe_ladder: Vec<u32>,
    pub probes_per_set: usize,
    pub vt_points: usize,
    pub probe_delta: f64,
    pub min_margin: f64,
    pub refine: bool,
    pub seed: u64,
    pub cert: CertOptions,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            h: 0.02,
            poly_ladder: vec![2, 4, 6],
            laurent_ladder: vec![2, 4, 6, 8],
            inner_degree: 4,
            probe_ladder: vec![4, 6, 8, 10],
            probes_per_set: 20,
            vt_points: 10,
            probe_delta: 0.2,
            min_margin: 1e-3,
            refine: true,
            seed: 7,
            cert: CertOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupReport {
    pub name: String,
    pub pass: bool,
    pub passed: usize,
    pub total: usize,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub groups: Vec<GroupReport>,
    pub pass: bool,
}

fn group(name: &str, outcomes: Vec<(bool, String)>) -> GroupReport {
    let passed = outcomes.iter().filter(|o| o.0).count();
    let total = outcomes.len();
    GroupReport {
        name: name.into(),
        pass: total > 0 && passed == total,
        passed,
        total,
        details: outcomes.into_iter().map(|o| o.1).collect(),
    }
}

fn inner_ok(q: &ComplexPoint, sample: &SetSample, d: u32, opts: &CertOptions) -> Result<(bool, String), HullError> {
    let basis = make_basis(BasisMode::Polynomial(d), Some(sample))?;
    if basis.len() <= 1 {
        return Ok((false, format!("{q}: Ambiguous at degree {d}")));
    }
    Ok(match inner_certificate(q, sample, &basis, opts.feas_tol)? {
        InnerOutcome::Feasible(c) => {
            (c.residual <= opts.residual_tol, format!("{q} vs {}: residual {:.2e}", sample.label, c.residual))
        }
        InnerOutcome::Infeasible(_) => (false, format!("{q} vs {}: infeasible", sample.label)),
    })
}

/// Result of one near-off probe: the degree that separated, margin and retention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub q: [f64; 4],
    pub degree: Option<u32>,
    pub margin: f64,
    pub retained: Option<f64>,
}

/// Outer certificates for `count` near-off probes of one sample.
pub fn probe_battery(
    geom: &SceneGeometry,
    sample: &SetSample,
    refined: Option<&SetSample>,
    params: &SuiteParams,
    count: usize,
    seed: u64,
) -> Result<Vec<ProbeResult>, HullError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::with_capacity(count);
    while probes.len() < count {
        let i = rng.random_range(0..sample.len());
        let mix = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        if let Some(q) = near_off_probe(geom, sample, i, mix, params.probe_delta) {
            probes.push(q);
        }
    }
    probes
        .par_iter()
        .map(|q| {
            let mut last = f64::NEG_INFINITY;
            for &d in &params.probe_ladder {
                let basis = make_basis(BasisMode::Polynomial(d), Some(sample))?;
                if basis.len() <= 1 {
                    continue;
                }
                if let Some(mut cert) = outer_certificate(q, sample, &basis, params.cert.m_gon, params.cert.min_margin)? {
                    last = cert.margin;
                    if cert.margin >= params.min_margin {
                        let retained = match refined {
                            Some(r) => Some(refine_outer(&mut cert, r)?.retained),
                            None => None,
                        };
                        return Ok(ProbeResult { q: q.to_reals(), degree: Some(d), margin: cert.margin, retained });
                    }
                }
            }
            Ok(ProbeResult { q: q.to_reals(), degree: None, margin: last, retained: None })
        })
        .collect()
}

/// Runs the five certificate groups on a validated geometry.
pub fn stolzenberg_suite(geom: &SceneGeometry, params: &SuiteParams) -> Result<SuiteReport, HullError> {
    params.cert.validate()?;
    let val = validate_geometry(geom, DEFAULT_H_GRID)?;
    if !val.overall {
        return Err(HullError::Usage(format!("geometry failed validation:\n{val}")));
    }
    let h = params.h;
    let sample = |l: SetLabel, h: f64| sample_set(geom, l, h).map_err(|e| HullError::from(e).at(format!("sample {l}")));
    let y = sample(SetLabel::Y, h)?;
    let origin = ComplexPoint::default();
    let d = params.inner_degree;
    let mut groups = Vec::new();

    // (1) the origin lies in the hull of Y
    let g1 = vec![inner_ok(&origin, &y, d, &params.cert).map_err(|e| e.at("origin"))?];
    groups.push(group("origin_in_hull", g1));

    // (2) flat pieces lie in the hulls of the annuli
    let mut g2 = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for (vt, x) in [(SetLabel::Vt1, SetLabel::X1), (SetLabel::Vt2, SetLabel::X2)] {
        let vs = sample(vt, h)?;
        let xs = sample(x, h)?;
        for _ in 0..params.vt_points {
            let p = vs.points[rng.random_range(0..vs.len())];
            g2.push(inner_ok(&p, &xs, d, &params.cert).map_err(|e| e.at(format!("{vt} in hull of {x}")))?);
        }
    }
    groups.push(group("flat_pieces_in_annulus_hulls", g2));

    // (3) contrast at a point of the analytic disk w = z^2
    let q = ComplexPoint::real(0.5, 0.25);
    let pv = classify_point_with(&q, &y, HullMode::Polynomial, &params.poly_ladder, &params.cert).map_err(|e| e.at("contrast poly"))?;
    let lv = classify_point_with(&q, &y, HullMode::Laurent, &params.laurent_ladder, &params.cert).map_err(|e| e.at("contrast laurent"))?;
    let describe = |v: &HullVerdict| match v {
        HullVerdict::Inside(m, c) => format!("Inside({m}) residual {:.2e}", c.residual),
        HullVerdict::Outside(m, c) => format!("Outside({m}) margin {:.3e}", c.margin),
        HullVerdict::Ambiguous(_, s) => format!("Ambiguous: {s}"),
    };
    groups.push(group(
        "contrast_poly_vs_laurent",
        vec![(pv.is_inside(), format!("polynomial: {}", describe(&pv))), (lv.is_outside(), format!("laurent: {}", describe(&lv)))],
    ));

    // (4) separate polynomial convexity of the pieces
    let mut g4 = Vec::new();
    for (k, label) in [SetLabel::Y1, SetLabel::Y2, SetLabel::Yplus, SetLabel::Yminus].into_iter().enumerate() {
        let s = sample(label, h)?;
        let r = if params.refine { Some(sample(label, h / 4.0)?) } else { None };
        let res = probe_battery(geom, &s, r.as_ref(), params, params.probes_per_set, params.seed + 1 + k as u64)
            .map_err(|e| e.at(format!("probes {label}")))?;
        for p in res {
            let ok = p.degree.is_some() && p.retained.is_none_or(|r| r >= 0.5);
            g4.push((ok, format!("{label} {:?}: degree {:?} margin {:.3e} retained {:?}", p.q, p.degree, p.margin, p.retained)));
        }
    }
    groups.push(group("separate_convexity_probes", g4));

    // (5) the origin is certified against Y and against X1 u X2 alike
    let xu = sample(SetLabel::X1uX2, h)?;
    let g5 = vec![
        inner_ok(&origin, &y, d, &params.cert).map_err(|e| e.at("merge Y"))?,
        inner_ok(&origin, &xu, d, &params.cert).map_err(|e| e.at("merge X1uX2"))?,
    ];
    groups.push(group("hull_merge_consistency", g5));

    let pass = groups.iter().all(|g| g.pass);
    Ok(SuiteReport { groups, pass })
}

/// Convenience: default geometry, checked membership of a point in `Y`.
pub fn on_default_y(p: &ComplexPoint) -> Result<bool, HullError> {
    let g = build_default_geometry(None)?;
    Ok(set_membership(&g, SetLabel::Y, p, MEMBERSHIP_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_sample(n: usize, r: f64) -> SetSample {
        let pts = (0..n)
            .map(|k| ComplexPoint::new(C64::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64), C64::new(0.0, 0.0)))
            .collect();
        SetSample::from_points(SetLabel::Y, 0.1, pts)
    }

    #[test]
    fn dirac_certificate_for_sample_point() {
        let s = circle_sample(40, 1.0);
        let basis = make_basis(BasisMode::Polynomial(3), Some(&s)).unwrap();
        let out = inner_certificate(&s.points[5], &s, &basis, 1e-9).unwrap();
        let c = out.certificate().unwrap();
        assert_eq!(c.weights, vec![(5, 1.0)]);
        assert_eq!(c.residual, 0.0);
        let rep = verify_inner(c, &s, 50, 1).unwrap();
        assert!(rep.ok && rep.max_slack_violation <= 0.0);
    }

    #[test]
    fn disk_center_is_inside_circle_hull() {
        let s = circle_sample(64, 1.0);
        let basis = make_basis(BasisMode::Polynomial(4), Some(&s)).unwrap();
        let out = inner_certificate(&ComplexPoint::default(), &s, &basis, 1e-9).unwrap();
        let c = out.certificate().expect("feasible");
        assert!(c.residual < 1e-8);
        assert!(verify_inner(c, &s, 100, 3).unwrap().ok);
    }

    #[test]
    fn far_point_is_separated_by_z() {
        let s = circle_sample(64, 1.0);
        let q = ComplexPoint::real(3.0, 0.0);
        let basis = make_basis(BasisMode::Polynomial(1), Some(&s)).unwrap();
        match inner_certificate(&q, &s, &basis, 1e-9).unwrap() {
            InnerOutcome::Infeasible(f) => assert!(f.re_at_q > 0.0 && f.max_re_on_sample <= 1e-9),
            InnerOutcome::Feasible(_) => panic!("should be infeasible"),
        }
        let cert = outer_certificate(&q, &s, &basis, 16, 1e-6).unwrap().expect("separable");
        assert!((cert.margin - 2.0).abs() < 1e-6, "{}", cert.margin);
    }

    #[test]
    fn tampered_certificate_is_flagged() {
        let s = circle_sample(64, 1.0);
        let basis = make_basis(BasisMode::Polynomial(2), Some(&s)).unwrap();
        let out = inner_certificate(&ComplexPoint::default(), &s, &basis, 1e-9).unwrap();
        let mut c = out.certificate().unwrap().clone();
        c.weights[0].1 = -c.weights[0].1;
        let rep = verify_inner(&c, &s, 10, 1).unwrap();
        assert_eq!(rep.negative_weights, 1);
        assert!(!rep.ok);
    }

    #[test]
    fn small_m_gon_is_rejected() {
        let s = circle_sample(16, 1.0);
        let basis = make_basis(BasisMode::Polynomial(1), Some(&s)).unwrap();
        assert!(outer_certificate(&ComplexPoint::real(3.0, 0.0), &s, &basis, 4, 1e-6).is_err());
    }

    #[test]
    fn laurent_separates_what_polynomials_cannot() {
        // inside the unit disk, where 1/z is large
        let s = circle_sample(64, 1.0);
        let q = ComplexPoint::real(0.3, 0.0);
        let poly = classify_point(&q, &s, HullMode::Polynomial, &[2, 4]).unwrap();
        assert!(poly.is_inside());
        let laur = classify_point(&q, &s, HullMode::Laurent, &[1, 2]).unwrap();
        assert!(laur.is_outside());
    }

    #[test]
    fn degree_zero_is_ambiguous() {
        let s = circle_sample(16, 1.0);
        let v = classify_point(&ComplexPoint::real(3.0, 0.0), &s, HullMode::Polynomial, &[0]).unwrap();
        assert!(matches!(v, HullVerdict::Ambiguous(..)));
    }
}
