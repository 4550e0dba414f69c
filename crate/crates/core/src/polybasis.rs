//! Graded monomial and Laurent-monomial bases with per-column scaling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ComplexPoint, SetSample};
use crate::C64;

/// Below this modulus `z` is treated as a pole of the Laurent basis.
pub const POLE_RADIUS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("pole: |z| = {0:.3e} is too close to 0 for a Laurent basis")]
    Pole(f64),
    #[error("ill-conditioned system: {0}; use ridge > 0")]
    Conditioning(String),
    #[error("usage: {0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisMode {
    Polynomial(u32),
    Laurent(u32, u32, u32),
}

impl BasisMode {
    pub fn is_laurent(&self) -> bool {
        matches!(self, BasisMode::Laurent(..))
    }

    pub fn degrees(&self) -> Vec<u32> {
        match *self {
            BasisMode::Polynomial(d) => vec![d],
            BasisMode::Laurent(a, b, c) => vec![a, b, c],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BasisMode::Polynomial(_) => "polynomial",
            BasisMode::Laurent(..) => "laurent",
        }
    }

    /// Exponent pairs `(a, b)` of `z^a w^b` in the frozen order.
    pub fn exponents(&self) -> Vec<(i32, u32)> {
        match *self {
            BasisMode::Polynomial(d) => {
                let mut out = Vec::new();
                for k in 0..=d as i32 {
                    for a in (0..=k).rev() {
                        out.push((a, (k - a) as u32));
                    }
                }
                out
            }
            BasisMode::Laurent(dn, dp, dw) => {
                let mut out = Vec::new();
                for b in 0..=dw {
                    for a in -(dn as i32)..=dp as i32 {
                        out.push((a, b));
                    }
                }
                // Grade |a| + b, then b ascending, then a descending.
                out.sort_by_key(|&(a, b)| (a.unsigned_abs() + b, b, -a));
                out
            }
        }
    }
}

impl std::fmt::Display for BasisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisMode::Polynomial(d) => write!(f, "Polynomial({d})"),
            BasisMode::Laurent(a, b, c) => write!(f, "Laurent({a},{b},{c})"),
        }
    }
}

/// An ordered monomial basis with positive column scales.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialBasis {
    pub mode: BasisMode,
    pub exponents: Vec<(i32, u32)>,
    pub scale: Vec<f64>,
    a_min: i32,
    a_max: i32,
    b_max: u32,
}

impl MonomialBasis {
    pub fn unscaled(mode: BasisMode) -> Self {
        let exponents = mode.exponents();
        let scale = vec![1.0; exponents.len()];
        Self::with_scale(mode, exponents, scale)
    }

    fn with_scale(mode: BasisMode, exponents: Vec<(i32, u32)>, scale: Vec<f64>) -> Self {
        let a_min = exponents.iter().map(|e| e.0).min().unwrap_or(0);
        let a_max = exponents.iter().map(|e| e.0).max().unwrap_or(0);
        let b_max = exponents.iter().map(|e| e.1).max().unwrap_or(0);
        MonomialBasis { mode, exponents, scale, a_min, a_max, b_max }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn index_of(&self, e: (i32, u32)) -> Option<usize> {
        self.exponents.iter().position(|&x| x == e)
    }

    /// The same basis with new column scales.
    pub fn rescaled(&self, scale: Vec<f64>) -> Result<Self, PolyError> {
        if scale.len() != self.len() || scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(PolyError::Usage("column scales must be positive, finite and one per element".into()));
        }
        Ok(Self::with_scale(self.mode, self.exponents.clone(), scale))
    }

    /// Unscaled monomial values written into `out`.
    fn raw_into(&self, p: &ComplexPoint, out: &mut [C64]) -> Result<(), PolyError> {
        if self.a_min < 0 && p.z.norm() <= POLE_RADIUS {
            return Err(PolyError::Pole(p.z.norm()));
        }
        let za = |a: i32| if a >= 0 { p.z.powi(a) } else { p.z.inv().powi(-a) };
        let zp: Vec<C64> = (self.a_min..=self.a_max).map(za).collect();
        let mut wp = Vec::with_capacity(self.b_max as usize + 1);
        let mut acc = C64::new(1.0, 0.0);
        for _ in 0..=self.b_max {
            wp.push(acc);
            acc *= p.w;
        }
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            *o = zp[(a - self.a_min) as usize] * wp[b as usize];
        }
        Ok(())
    }

    /// Scaled basis values at `p` written into `out`.
    pub fn eval_into(&self, p: &ComplexPoint, out: &mut [C64]) -> Result<(), PolyError> {
        self.raw_into(p, out)?;
        for (o, s) in out.iter_mut().zip(&self.scale) {
            *o /= *s;
        }
        Ok(())
    }

    /// Scaled evaluation matrix, one row of length `len()` per point.
    pub fn eval_rows(&self, points: &[ComplexPoint]) -> Result<Vec<C64>, PolyError> {
        let k = self.len();
        let mut out = vec![C64::new(0.0, 0.0); k * points.len()];
        for (row, p) in out.chunks_mut(k.max(1)).zip(points) {
            self.eval_into(p, row)?;
        }
        Ok(out)
    }
}

/// Builds a basis; with a sample each column is scaled to sup-norm 1 on it.
pub fn make_basis(mode: BasisMode, scaling: Option<&SetSample>) -> Result<MonomialBasis, PolyError> {
    let mut basis = MonomialBasis::unscaled(mode);
    if let Some(sample) = scaling {
        let k = basis.len();
        let mut sup = vec![0.0f64; k];
        let mut row = vec![C64::new(0.0, 0.0); k];
        for p in &sample.points {
            basis.raw_into(p, &mut row)?;
            for (s, v) in sup.iter_mut().zip(&row) {
                *s = s.max(v.norm());
            }
        }
        for s in sup.iter_mut() {
            if !(s.is_finite() && *s > 0.0) {
                *s = 1.0;
            }
        }
        basis.scale = sup;
    }
    Ok(basis)
}

/// Scaled basis values at `p`.
pub fn eval_basis(basis: &MonomialBasis, p: &ComplexPoint) -> Result<Vec<C64>, PolyError> {
    let mut out = vec![C64::new(0.0, 0.0); basis.len()];
    basis.eval_into(p, &mut out)?;
    Ok(out)
}

/// A coefficient vector over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub basis: MonomialBasis,
    pub coeffs: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    mode: String,
    degrees: Vec<u32>,
    exponents: Vec<(i32, u32)>,
    scale: Vec<f64>,
    coeffs: Vec<[f64; 2]>,
}

impl Poly {
    pub fn new(basis: MonomialBasis, coeffs: Vec<C64>) -> Result<Self, PolyError> {
        if coeffs.len() != basis.len() {
            return Err(PolyError::Usage(format!("{} coefficients for a basis of size {}", coeffs.len(), basis.len())));
        }
        Ok(Poly { basis, coeffs })
    }

    pub fn zero(basis: MonomialBasis) -> Self {
        let n = basis.len();
        Poly { basis, coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    /// Builds a polynomial from unscaled terms `c z^a w^b`.
    pub fn from_terms(basis: MonomialBasis, terms: &[((i32, u32), C64)]) -> Result<Self, PolyError> {
        let mut p = Poly::zero(basis);
        for &(e, c) in terms {
            let k = p
                .basis
                .index_of(e)
                .ok_or_else(|| PolyError::Usage(format!("monomial z^{} w^{} not in basis", e.0, e.1)))?;
            p.coeffs[k] += c * p.basis.scale[k];
        }
        Ok(p)
    }

    /// Unscaled terms `c z^a w^b`.
    pub fn terms(&self) -> Vec<((i32, u32), C64)> {
        self.basis
            .exponents
            .iter()
            .zip(&self.coeffs)
            .zip(&self.basis.scale)
            .map(|((&e, &c), &s)| (e, c / s))
            .collect()
    }

    /// Product expressed over `target`, which must contain every exponent sum.
    pub fn mul(&self, other: &Poly, target: MonomialBasis) -> Result<Poly, PolyError> {
        let mut out = Vec::new();
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                out.push(((ea.0 + eb.0, ea.1 + eb.1), ca * cb));
            }
        }
        Poly::from_terms(target, &out)
    }

    /// The same function over the basis with different column scales.
    pub fn rescaled(&self, scale: Vec<f64>) -> Result<Poly, PolyError> {
        let basis = self.basis.rescaled(scale)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.basis.scale.iter().zip(&basis.scale))
            .map(|(&c, (&old, &new))| c * (new / old))
            .collect();
        Ok(Poly { basis, coeffs })
    }

    pub fn scaled_by(&self, f: C64) -> Poly {
        Poly { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|c| c * f).collect() }
    }

    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = PolyJson {
            mode: self.basis.mode.name().into(),
            degrees: self.basis.mode.degrees(),
            exponents: self.basis.exponents.clone(),
            scale: self.basis.scale.clone(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        };
        serde_json::to_value(doc).expect("poly serializes")
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Poly, PolyError> {
        let doc: PolyJson = serde_json::from_value(v.clone()).map_err(|e| PolyError::Usage(e.to_string()))?;
        let mode = match (doc.mode.as_str(), doc.degrees.as_slice()) {
            ("polynomial", [d]) => BasisMode::Polynomial(*d),
            ("laurent", [a, b, c]) => BasisMode::Laurent(*a, *b, *c),
            _ => return Err(PolyError::Usage(format!("bad basis mode {} {:?}", doc.mode, doc.degrees))),
        };
        if mode.exponents() != doc.exponents {
            return Err(PolyError::Usage("exponent ordering does not match the mode".into()));
        }
        let basis = MonomialBasis::unscaled(mode).rescaled(doc.scale)?;
        Poly::new(basis, doc.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect())
    }
}

pub fn poly_eval(q: &Poly, p: &ComplexPoint) -> Result<C64, PolyError> {
    let v = eval_basis(&q.basis, p)?;
    Ok(v.iter().zip(&q.coeffs).map(|(a, b)| a * b).sum())
}

/// Evaluates `q` at many points.
pub fn poly_eval_many(q: &Poly, points: &[ComplexPoint]) -> Result<Vec<C64>, PolyError> {
    let mut row = vec![C64::new(0.0, 0.0); q.basis.len()];
    points
        .iter()
        .map(|p| {
            q.basis.eval_into(p, &mut row)?;
            Ok(row.iter().zip(&q.coeffs).map(|(a, b)| a * b).sum())
        })
        .collect()
}

/// Ratio below which a singular value counts as zero.
const RANK_TOL: f64 = 1e-12;

/// Regularized least squares; returns the fit and its root-mean-square residual.
pub fn least_squares_fit(
    basis: &MonomialBasis,
    points: &[ComplexPoint],
    values: &[C64],
    ridge: f64,
) -> Result<(Poly, f64), PolyError> {
    let n = points.len();
    let k = basis.len();
    if n != values.len() || n < k {
        return Err(PolyError::Usage(format!("need #points = #values >= {k}, got {n} and {}", values.len())));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(PolyError::Usage("ridge must be a nonnegative finite number".into()));
    }
    let rows = basis.eval_rows(points)?;
    let extra = if ridge > 0.0 { k } else { 0 };
    let mut a = DMatrix::<C64>::zeros(n + extra, k);
    let mut b = DVector::<C64>::zeros(n + extra);
    for i in 0..n {
        for j in 0..k {
            a[(i, j)] = rows[i * k + j];
        }
        b[i] = values[i];
    }
    let sr = ridge.sqrt();
    for j in 0..extra {
        a[(n + j, j)] = C64::new(sr, 0.0);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if ridge == 0.0 && smin <= RANK_TOL * smax {
        return Err(PolyError::Conditioning(format!("singular value ratio {:.3e}", smin / smax)));
    }
    let x = svd
        .solve(&b, RANK_TOL * smax)
        .map_err(|e| PolyError::Conditioning(e.to_string()))?;
    let coeffs: Vec<C64> = x.iter().copied().collect();
    let mut ss = 0.0;
    for i in 0..n {
        let fit: C64 = (0..k).map(|j| rows[i * k + j] * coeffs[j]).sum();
        ss += (fit - values[i]).norm_sqr();
    }
    Ok((Poly::new(basis.clone(), coeffs)?, (ss / n as f64).sqrt()))
}

/// Largest over smallest singular value of the scaled evaluation matrix.
///
/// The matrix is reduced to its triangular factor; the extreme singular values
/// then come from power iteration and inverse power iteration on `R^H R`.
pub fn basis_condition_estimate(basis: &MonomialBasis, sample: &SetSample) -> Result<f64, PolyError> {
    if sample.is_empty() {
        return Err(PolyError::Usage("condition estimate needs a nonempty sample".into()));
    }
    let k = basis.len();
    let n = sample.len();
    if n < k {
        return Ok(f64::INFINITY);
    }
    let rows = basis.eval_rows(&sample.points)?;
    let a = DMatrix::<C64>::from_row_slice(n, k, &rows);
    let r = a.qr().r();
    let diag_max = (0..k).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    let diag_min = (0..k).map(|i| r[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if diag_max == 0.0 || diag_min <= 1e-13 * diag_max {
        return Ok(f64::INFINITY);
    }
    let rh = r.adjoint();
    let start = DVector::<C64>::from_fn(k, |i, _| C64::new(1.0, 0.1 * i as f64));
    let power = |apply: &dyn Fn(&DVector<C64>) -> Option<DVector<C64>>| -> Option<f64> {
        let mut v = start.normalize();
        let mut lambda = 0.0;
        for _ in 0..1000 {
            let u = apply(&v)?;
            let next = u.norm();
            if !next.is_finite() || next == 0.0 {
                return None;
            }
            v = u / C64::new(next, 0.0);
            if (next - lambda).abs() <= 1e-4 * next {
                return Some(next);
            }
            lambda = next;
        }
        Some(lambda)
    };
    let lmax = power(&|v| Some(&rh * (&r * v))).unwrap_or(f64::INFINITY);
    let lmin_inv = power(&|v| {
        let y = rh.solve_lower_triangular(v)?;
        r.solve_upper_triangular(&y)
    });
    match lmin_inv {
        Some(li) if li.is_finite() && li > 0.0 => Ok((lmax * li).sqrt()),
        _ => Ok(f64::INFINITY),
    }
}
