//! Automorphisms of `C* x C` built from exactly invertible primitives.
//!
//! Chains compose [`PrimitiveMap`]s left to right. Besides evaluation and
//! Jacobians this module iterates an attracting map to decide basin
//! membership and runs a derivative-free search for chains that squeeze a
//! sample toward a point.

use nalgebra::Matrix2;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ComplexPoint, SetSample};
use crate::C64;

/// Intermediate `|z|` below this is a range error.
pub const Z_FLOOR: f64 = 1e-300;
/// Any coordinate modulus above this is a range error.
pub const COORD_CEIL: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EscapeReason {
    ZUnderflow,
    ZOverflow,
    WOverflow,
}

impl std::fmt::Display for EscapeReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EscapeReason::ZUnderflow => "zUnderflow",
            EscapeReason::ZOverflow => "zOverflow",
            EscapeReason::WOverflow => "wOverflow",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomError {
    #[error("range error at step {step}: {reason}")]
    Range { step: usize, reason: EscapeReason },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage: {0}")]
    Usage(String),
}

/// One generator of the chain group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum PrimitiveMap {
    /// `(z, w) -> (lambda z, w)`.
    ScaleZ { lambda: C64 },
    /// `(z, w) -> (z, mu w)`.
    ScaleW { mu: C64 },
    /// `(z, w) -> (z, w + f(z))` with `f` a Laurent polynomial given as `(exponent, coefficient)`.
    ShearW { coeffs: Vec<(i32, C64)> },
    /// `(z, w) -> (z exp(g(w)), w)` with `g` a polynomial given as `(exponent, coefficient)`.
    TwistZ { coeffs: Vec<(u32, C64)> },
}

fn laurent_eval(terms: &[(i32, C64)], z: C64) -> C64 {
    terms.iter().map(|&(k, c)| c * z.powi(k)).sum()
}

fn laurent_deriv(terms: &[(i32, C64)], z: C64) -> C64 {
    terms.iter().filter(|t| t.0 != 0).map(|&(k, c)| c * k as f64 * z.powi(k - 1)).sum()
}

fn poly_eval_w(terms: &[(u32, C64)], w: C64) -> C64 {
    terms.iter().map(|&(k, c)| c * w.powu(k)).sum()
}

fn poly_deriv_w(terms: &[(u32, C64)], w: C64) -> C64 {
    terms.iter().filter(|t| t.0 != 0).map(|&(k, c)| c * k as f64 * w.powu(k - 1)).sum()
}

impl PrimitiveMap {
    /// Checks nonzero scalings and finite coefficients.
    pub fn validate(&self) -> Result<(), AutomError> {
        let finite = |c: &C64| c.re.is_finite() && c.im.is_finite();
        let ok = match self {
            PrimitiveMap::ScaleZ { lambda: s } | PrimitiveMap::ScaleW { mu: s } => finite(s) && s.norm() > 0.0,
            PrimitiveMap::ShearW { coeffs } => coeffs.iter().all(|t| finite(&t.1)),
            PrimitiveMap::TwistZ { coeffs } => coeffs.iter().all(|t| finite(&t.1)),
        };
        if ok {
            Ok(())
        } else {
            Err(AutomError::Usage(format!("invalid primitive {self:?}")))
        }
    }

    pub fn inverse(&self) -> PrimitiveMap {
        match self {
            PrimitiveMap::ScaleZ { lambda } => PrimitiveMap::ScaleZ { lambda: lambda.inv() },
            PrimitiveMap::ScaleW { mu } => PrimitiveMap::ScaleW { mu: mu.inv() },
            PrimitiveMap::ShearW { coeffs } => PrimitiveMap::ShearW { coeffs: coeffs.iter().map(|&(k, c)| (k, -c)).collect() },
            PrimitiveMap::TwistZ { coeffs } => PrimitiveMap::TwistZ { coeffs: coeffs.iter().map(|&(k, c)| (k, -c)).collect() },
        }
    }

    pub fn apply(&self, p: &ComplexPoint) -> ComplexPoint {
        let (z, w) = (p.z, p.w);
        match self {
            PrimitiveMap::ScaleZ { lambda } => ComplexPoint::new(lambda * z, w),
            PrimitiveMap::ScaleW { mu } => ComplexPoint::new(z, mu * w),
            PrimitiveMap::ShearW { coeffs } => ComplexPoint::new(z, w + laurent_eval(coeffs, z)),
            PrimitiveMap::TwistZ { coeffs } => ComplexPoint::new(z * poly_eval_w(coeffs, w).exp(), w),
        }
    }

    /// Jacobian `[[dz'/dz, dz'/dw], [dw'/dz, dw'/dw]]` at `p`.
    pub fn jacobian(&self, p: &ComplexPoint) -> Matrix2<C64> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match self {
            PrimitiveMap::ScaleZ { lambda } => Matrix2::new(*lambda, zero, zero, one),
            PrimitiveMap::ScaleW { mu } => Matrix2::new(one, zero, zero, *mu),
            PrimitiveMap::ShearW { coeffs } => Matrix2::new(one, zero, laurent_deriv(coeffs, p.z), one),
            PrimitiveMap::TwistZ { coeffs } => {
                let e = poly_eval_w(coeffs, p.w).exp();
                Matrix2::new(e, p.z * poly_deriv_w(coeffs, p.w) * e, zero, one)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Composition of primitives, applied first to last.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AutomorphismChain {
    pub maps: Vec<PrimitiveMap>,
}

fn range_check(p: &ComplexPoint, step: usize) -> Result<(), AutomError> {
    let zn = p.z.norm();
    let wn = p.w.norm();
    let reason = if zn.is_nan() || zn > COORD_CEIL {
        Some(EscapeReason::ZOverflow)
    } else if zn < Z_FLOOR {
        Some(EscapeReason::ZUnderflow)
    } else if wn.is_nan() || wn > COORD_CEIL {
        Some(EscapeReason::WOverflow)
    } else {
        None
    };
    match reason {
        Some(reason) => Err(AutomError::Range { step, reason }),
        None => Ok(()),
    }
}

fn require_punctured(p: &ComplexPoint) -> Result<(), AutomError> {
    if p.z == C64::new(0.0, 0.0) {
        Err(AutomError::Domain(format!("{p} is not in C* x C")))
    } else {
        Ok(())
    }
}

impl AutomorphismChain {
    pub fn new(maps: Vec<PrimitiveMap>) -> Result<Self, AutomError> {
        for m in &maps {
            m.validate()?;
        }
        Ok(AutomorphismChain { maps })
    }

    pub fn identity() -> Self {
        AutomorphismChain::default()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    /// The chain applying primitive inverses in reverse order.
    pub fn inverse(&self) -> AutomorphismChain {
        AutomorphismChain { maps: self.maps.iter().rev().map(PrimitiveMap::inverse).collect() }
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &AutomorphismChain) -> AutomorphismChain {
        AutomorphismChain { maps: self.maps.iter().chain(&other.maps).cloned().collect() }
    }

    pub fn apply(&self, p: &ComplexPoint, direction: Direction) -> Result<ComplexPoint, AutomError> {
        require_punctured(p)?;
        let mut x = *p;
        match direction {
            Direction::Forward => {
                for (step, m) in self.maps.iter().enumerate() {
                    x = m.apply(&x);
                    range_check(&x, step)?;
                }
            }
            Direction::Inverse => {
                for (step, m) in self.maps.iter().rev().enumerate() {
                    x = m.inverse().apply(&x);
                    range_check(&x, step)?;
                }
            }
        }
        Ok(x)
    }

    /// Chain-rule Jacobian of the forward map at `p`.
    pub fn jacobian(&self, p: &ComplexPoint) -> Result<Matrix2<C64>, AutomError> {
        require_punctured(p)?;
        let mut x = *p;
        let mut j = Matrix2::identity();
        for (step, m) in self.maps.iter().enumerate() {
            j = m.jacobian(&x) * j;
            x = m.apply(&x);
            range_check(&x, step)?;
        }
        Ok(j)
    }

    /// Central differences with relative step `rel`, using the holomorphy of the map.
    pub fn jacobian_fd(&self, p: &ComplexPoint, rel: f64) -> Result<Matrix2<C64>, AutomError> {
        let mut j = Matrix2::zeros();
        for col in 0..2 {
            let base = if col == 0 { p.z } else { p.w };
            let h = rel * base.norm().max(1.0);
            let dp = if col == 0 {
                ComplexPoint::new(C64::new(h, 0.0), C64::new(0.0, 0.0))
            } else {
                ComplexPoint::new(C64::new(0.0, 0.0), C64::new(h, 0.0))
            };
            let plus = self.apply(&(*p + dp), Direction::Forward)?;
            let minus = self.apply(&(*p - dp), Direction::Forward)?;
            j[(0, col)] = (plus.z - minus.z) / (2.0 * h);
            j[(1, col)] = (plus.w - minus.w) / (2.0 * h);
        }
        Ok(j)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chains serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, AutomError> {
        let c: AutomorphismChain = serde_json::from_str(s).map_err(|e| AutomError::Usage(e.to_string()))?;
        AutomorphismChain::new(c.maps)
    }
}

/// The attracting map `G(z, w) = (z e^w, 0.2 w - 0.3 (z e^w - 1))` and its fixed point `(1, 0)`.
pub fn default_attracting_map() -> (AutomorphismChain, ComplexPoint) {
    let c = |re: f64| C64::new(re, 0.0);
    let chain = AutomorphismChain {
        maps: vec![
            PrimitiveMap::TwistZ { coeffs: vec![(1, c(1.0))] },
            PrimitiveMap::ScaleW { mu: c(0.2) },
            PrimitiveMap::ShearW { coeffs: vec![(0, c(0.3)), (1, c(-0.3))] },
        ],
    };
    (chain, ComplexPoint::real(1.0, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub residual: f64,
    pub eigenvalues: [C64; 2],
    pub spectral_radius: f64,
}

/// Roots of `x^2 - tr x + det`, smaller modulus first.
pub fn eigenvalues_2x2(m: &Matrix2<C64>) -> [C64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let mut ev = [(tr - disc) / 2.0, (tr + disc) / 2.0];
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)));
    ev
}

pub fn fixed_point_report(chain: &AutomorphismChain, p: &ComplexPoint) -> Result<FixedPointReport, AutomError> {
    let image = chain.apply(p, Direction::Forward)?;
    let eigenvalues = eigenvalues_2x2(&chain.jacobian(p)?);
    Ok(FixedPointReport {
        residual: image.dist(p),
        eigenvalues,
        spectral_radius: eigenvalues[0].norm().max(eigenvalues[1].norm()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct BasinCaps {
    pub max_iter: usize,
    pub conv_tol: f64,
    pub z_lo: f64,
    pub hi: f64,
}

impl Default for BasinCaps {
    fn default() -> Self {
        BasinCaps { max_iter: 500, conv_tol: 1e-6, z_lo: 1e-8, hi: 1e8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasinVerdict {
    Converged(usize),
    Escaped(EscapeReason),
    Undecided(usize),
}

impl BasinVerdict {
    pub fn is_converged(&self) -> bool {
        matches!(self, BasinVerdict::Converged(_))
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self, BasinVerdict::Undecided(_))
    }

    /// Verdict name and step count for tabular output.
    pub fn parts(&self) -> (String, usize) {
        match self {
            BasinVerdict::Converged(s) => ("Converged".into(), *s),
            BasinVerdict::Escaped(r) => (format!("Escaped({r})"), 0),
            BasinVerdict::Undecided(c) => ("Undecided".into(), *c),
        }
    }
}

/// Iterations after reaching `conv_tol` whose distances must strictly decrease.
const CONFIRM_STEPS: usize = 20;

fn escape(x: &ComplexPoint, caps: &BasinCaps) -> Option<EscapeReason> {
    let zn = x.z.norm();
    if zn.is_nan() || zn > caps.hi {
        Some(EscapeReason::ZOverflow)
    } else if zn < caps.z_lo {
        Some(EscapeReason::ZUnderflow)
    } else if x.w.norm().is_nan() || x.w.norm() > caps.hi {
        Some(EscapeReason::WOverflow)
    } else {
        None
    }
}

/// Forward orbit test for the basin of `p`.
pub fn basin_membership(chain: &AutomorphismChain, p: &ComplexPoint, q: &ComplexPoint, caps: &BasinCaps) -> Result<BasinVerdict, AutomError> {
    require_punctured(q)?;
    let step = |x: &ComplexPoint| match chain.apply(x, Direction::Forward) {
        Ok(y) => escape(&y, caps).map_or(Ok(y), Err),
        Err(AutomError::Range { reason, .. }) => Err(reason),
        Err(e) => unreachable!("forward step on a punctured point: {e}"),
    };
    if let Some(r) = escape(q, caps) {
        return Ok(BasinVerdict::Escaped(r));
    }
    let mut x = *q;
    for n in 0..=caps.max_iter {
        let d = x.dist(p);
        if d < caps.conv_tol {
            let mut y = x;
            let mut last = d;
            let mut confirmed = true;
            for _ in 0..CONFIRM_STEPS {
                y = match step(&y) {
                    Ok(y) => y,
                    Err(r) => return Ok(BasinVerdict::Escaped(r)),
                };
                let dy = y.dist(p);
                if !(dy < last || dy == 0.0 && last == 0.0) {
                    confirmed = false;
                    break;
                }
                last = dy;
            }
            if confirmed {
                return Ok(BasinVerdict::Converged(n));
            }
        }
        if n == caps.max_iter {
            break;
        }
        x = match step(&x) {
            Ok(y) => y,
            Err(r) => return Ok(BasinVerdict::Escaped(r)),
        };
    }
    Ok(BasinVerdict::Undecided(caps.max_iter))
}

/// Basin membership of `psi(q)` for `G`: membership of `q` in `psi^-1(basin)`.
pub fn omega_membership(
    psi: &AutomorphismChain,
    g: &AutomorphismChain,
    p: &ComplexPoint,
    q: &ComplexPoint,
    caps: &BasinCaps,
) -> Result<BasinVerdict, AutomError> {
    require_punctured(q)?;
    match psi.apply(q, Direction::Forward) {
        Ok(x) => basin_membership(g, p, &x, caps),
        Err(AutomError::Range { reason, .. }) => Ok(BasinVerdict::Escaped(reason)),
        Err(e) => Err(e),
    }
}

/// Radius of the largest ball about `p` found inside the basin by probing
/// `directions` seeded unit directions of `C^2`.
///
/// Along each ray the first failing radius on a grid of `steps` points up to
/// `r_max` is refined by bisection.
pub fn basin_inradius(
    chain: &AutomorphismChain,
    p: &ComplexPoint,
    caps: &BasinCaps,
    directions: usize,
    r_max: f64,
    steps: usize,
    seed: u64,
) -> Result<f64, AutomError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs: Vec<ComplexPoint> = (0..directions)
        .map(|_| {
            let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            ComplexPoint::from_reals(v[0] / n, v[1] / n, v[2] / n, v[3] / n)
        })
        .collect();
    let inside = |d: &ComplexPoint, r: f64| -> Result<bool, AutomError> {
        let q = *p + *d * C64::new(r, 0.0);
        if q.z == C64::new(0.0, 0.0) {
            return Ok(false);
        }
        Ok(basin_membership(chain, p, &q, caps)?.is_converged())
    };
    let radii: Vec<f64> = dirs
        .par_iter()
        .map(|d| {
            let mut lo = 0.0;
            let mut hi = None;
            for k in 1..=steps {
                let r = r_max * k as f64 / steps as f64;
                if inside(d, r)? {
                    lo = r;
                } else {
                    hi = Some(r);
                    break;
                }
            }
            let Some(mut hi) = hi else { return Ok(r_max) };
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if inside(d, mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        })
        .collect::<Result<_, AutomError>>()?;
    Ok(radii.into_iter().fold(r_max, f64::min))
}

/// Shape of the chains explored by [`shrink_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ShrinkFamily {
    pub depth: usize,
    pub laurent_deg: u32,
    pub twist_deg: u32,
}

impl Default for ShrinkFamily {
    fn default() -> Self {
        ShrinkFamily { depth: 6, laurent_deg: 3, twist_deg: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Shear,
    Twist,
    ScaleZ,
    ScaleW,
}

const SLOT_CYCLE: [Slot; 4] = [Slot::Shear, Slot::Twist, Slot::ScaleZ, Slot::ScaleW];
/// Number of independent restarts of the simplex search.
pub const SHRINK_RESTARTS: usize = 8;

impl ShrinkFamily {
    pub fn validate(&self) -> Result<(), AutomError> {
        if self.depth == 0 || self.depth > 6 || self.laurent_deg > 3 || self.twist_deg > 2 {
            return Err(AutomError::Usage(format!(
                "family needs depth in 1..=6, laurentDeg <= 3, twistDeg <= 2 (got {self:?})"
            )));
        }
        Ok(())
    }

    fn slots(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..self.depth).map(|i| SLOT_CYCLE[i % 4])
    }

    fn slot_dim(&self, s: Slot) -> usize {
        match s {
            Slot::Shear => 2 * (2 * self.laurent_deg as usize + 1),
            Slot::Twist => 2 * (self.twist_deg as usize + 1),
            Slot::ScaleZ | Slot::ScaleW => 2,
        }
    }

    /// Length of the real parameter vector.
    pub fn dim(&self) -> usize {
        self.slots().map(|s| self.slot_dim(s)).sum()
    }

    /// Chain for a parameter vector; the zero vector is the identity.
    pub fn decode(&self, x: &[f64]) -> AutomorphismChain {
        let mut maps = Vec::with_capacity(self.depth);
        let mut at = 0;
        let cx = |i: usize| C64::new(x[i], x[i + 1]);
        for s in self.slots() {
            match s {
                Slot::Shear => {
                    let l = self.laurent_deg as i32;
                    let coeffs = (-l..=l).enumerate().map(|(j, k)| (k, cx(at + 2 * j))).collect();
                    maps.push(PrimitiveMap::ShearW { coeffs });
                }
                Slot::Twist => {
                    let coeffs = (0..=self.twist_deg).map(|k| (k, cx(at + 2 * k as usize))).collect();
                    maps.push(PrimitiveMap::TwistZ { coeffs });
                }
                Slot::ScaleZ => maps.push(PrimitiveMap::ScaleZ { lambda: cx(at).exp() }),
                Slot::ScaleW => maps.push(PrimitiveMap::ScaleW { mu: cx(at).exp() }),
            }
            at += self.slot_dim(s);
        }
        AutomorphismChain { maps }
    }
}

/// `max |psi(x) - p|` over the sample, infinite on range errors.
pub fn max_radius(psi: &AutomorphismChain, points: &[ComplexPoint], p: &ComplexPoint) -> f64 {
    let mut worst = 0.0f64;
    for x in points {
        match psi.apply(x, Direction::Forward) {
            Ok(y) => {
                let d = y.dist(p);
                if !d.is_finite() {
                    return f64::INFINITY;
                }
                worst = worst.max(d);
            }
            Err(_) => return f64::INFINITY,
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkResult {
    pub psi: AutomorphismChain,
    pub baseline: f64,
    pub radius: f64,
    /// Best radius so far after each objective evaluation.
    pub radius_trace: Vec<f64>,
    pub success: bool,
    pub evaluations: usize,
}

/// Nelder-Mead on `f` from `x0` with at most `budget` evaluations; returns the
/// best point and the value of every evaluation in order.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, budget: usize) -> (Vec<f64>, f64, Vec<f64>) {
    let n = x0.len();
    let mut values = Vec::with_capacity(budget);
    let eval = |x: &[f64], values: &mut Vec<f64>| {
        let v = f(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        values.push(v);
        v
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if values.len() >= budget {
            break;
        }
        let mut x = x0.to_vec();
        if i > 0 {
            x[i - 1] += step;
        }
        let v = eval(&x, &mut values);
        simplex.push((x, v));
    }
    let best_of = |s: &[(Vec<f64>, f64)]| {
        s.iter().min_by(|a, b| a.1.total_cmp(&b.1)).cloned().unwrap_or((x0.to_vec(), f64::INFINITY))
    };
    if simplex.len() < n + 1 {
        let b = best_of(&simplex);
        return (b.0, b.1, values);
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while values.len() < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let xr = lerp(&centroid, &worst.0, -1.0);
        let fr = eval(&xr, &mut values);
        if fr < simplex[0].1 {
            if values.len() >= budget {
                simplex[n] = (xr, fr);
                break;
            }
            let xe = lerp(&centroid, &worst.0, -2.0);
            let fe = eval(&xe, &mut values);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            if values.len() >= budget {
                break;
            }
            let (xc, fc) = if fr < worst.1 {
                let xc = lerp(&centroid, &xr, 0.5);
                let fc = eval(&xc, &mut values);
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &worst.0, 0.5);
                let fc = eval(&xc, &mut values);
                (xc, fc)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    if values.len() >= budget {
                        break;
                    }
                    let x = lerp(&x0, &s.0, 0.5);
                    let v = eval(&x, &mut values);
                    *s = (x, v);
                }
            }
        }
    }
    let b = best_of(&simplex);
    (b.0, b.1, values)
}

/// Searches the chain family for `psi` minimizing `max |psi(x) - p|` over the sample.
///
/// The budget is split evenly over [`SHRINK_RESTARTS`] restarts; restart 0
/// starts at the identity, the others at seeded perturbations of it, each on
/// its own random stream. The trace is the running best over all evaluations
/// taken restart by restart.
pub fn shrink_search(
    sample: &SetSample,
    p: &ComplexPoint,
    eps_target: f64,
    family: &ShrinkFamily,
    budget: usize,
    seed: u64,
) -> Result<ShrinkResult, AutomError> {
    family.validate()?;
    if budget < 1000 {
        return Err(AutomError::Usage(format!("budget must be at least 1000, got {budget}")));
    }
    if sample.is_empty() {
        return Err(AutomError::Usage("shrink search needs a nonempty sample".into()));
    }
    if let Some(x) = sample.points.iter().find(|x| x.z == C64::new(0.0, 0.0)) {
        return Err(AutomError::Domain(format!("sample point {x} is not in C* x C")));
    }
    let baseline = max_radius(&AutomorphismChain::identity(), &sample.points, p);
    if baseline <= eps_target {
        return Ok(ShrinkResult {
            psi: AutomorphismChain::identity(),
            baseline,
            radius: baseline,
            radius_trace: vec![baseline],
            success: true,
            evaluations: 1,
        });
    }
    let dim = family.dim();
    let objective = |x: &[f64]| max_radius(&family.decode(x), &sample.points, p);
    let per = budget / SHRINK_RESTARTS;
    let runs: Vec<(Vec<f64>, f64, Vec<f64>)> = (0..SHRINK_RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let x0: Vec<f64> = if r == 0 {
                vec![0.0; dim]
            } else {
                (0..dim).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect()
            };
            let step = 0.05 + 0.2 * rng.random::<f64>();
            let budget = if r == 0 { per + budget % SHRINK_RESTARTS } else { per };
            nelder_mead(&objective, &x0, step, budget)
        })
        .collect();
    let mut trace = Vec::with_capacity(budget);
    let mut best = f64::INFINITY;
    for (_, _, values) in &runs {
        for v in values {
            best = best.min(*v);
            trace.push(best);
        }
    }
    let (x, radius, _) = runs
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .expect("at least one restart");
    let (psi, radius) = if radius < baseline { (family.decode(&x), radius) } else { (AutomorphismChain::identity(), baseline) };
    Ok(ShrinkResult {
        psi,
        baseline,
        radius,
        evaluations: trace.len(),
        radius_trace: trace,
        success: radius <= eps_target,
    })
}
