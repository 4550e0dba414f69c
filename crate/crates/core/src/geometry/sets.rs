use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::SceneGeometry;
use super::{ComplexPoint, GeometryError};
use crate::C64;

/// Names of the compact sets built over the two curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetLabel {
    V1,
    V2,
    X1,
    X2,
    Vt1,
    Vt2,
    Y1,
    Y2,
    Y,
    Yplus,
    Yminus,
    X1uX2,
}

impl SetLabel {
    pub const ALL: [SetLabel; 12] = [
        SetLabel::V1,
        SetLabel::V2,
        SetLabel::X1,
        SetLabel::X2,
        SetLabel::Vt1,
        SetLabel::Vt2,
        SetLabel::Y1,
        SetLabel::Y2,
        SetLabel::Y,
        SetLabel::Yplus,
        SetLabel::Yminus,
        SetLabel::X1uX2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SetLabel::V1 => "V1",
            SetLabel::V2 => "V2",
            SetLabel::X1 => "X1",
            SetLabel::X2 => "X2",
            SetLabel::Vt1 => "Vt1",
            SetLabel::Vt2 => "Vt2",
            SetLabel::Y1 => "Y1",
            SetLabel::Y2 => "Y2",
            SetLabel::Y => "Y",
            SetLabel::Yplus => "Yplus",
            SetLabel::Yminus => "Yminus",
            SetLabel::X1uX2 => "X1uX2",
        }
    }
}

impl fmt::Display for SetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SetLabel {
    type Err = GeometryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let alias = match t {
            "Y+" => Some(SetLabel::Yplus),
            "Y-" => Some(SetLabel::Yminus),
            _ => None,
        };
        alias
            .or_else(|| SetLabel::ALL.iter().copied().find(|l| l.name().eq_ignore_ascii_case(t)))
            .ok_or_else(|| GeometryError::Usage(format!("unknown set label '{s}'")))
    }
}

/// Which parameterized family a sample point comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `(z(s), z(s)^2 - t)` with `z` on the second curve.
    X1,
    /// `(z(s), 1 + t)` with `z` on the first curve.
    X2,
    /// `(x, x^2 - t)` with `x` in the positive interval.
    Vt1,
    /// `(x, 1 + t)` with `x` in the negative interval.
    Vt2,
}

/// Parameters of a sample point: global curve parameter (or real `x`) and fibre parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleParam {
    pub family: Family,
    pub s: f64,
    pub t: f64,
}

/// Identity of a sample, carried by certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SampleId {
    pub label: SetLabel,
    /// Bit pattern of the mesh parameter.
    pub h_bits: u64,
    pub len: usize,
    pub digest: u64,
}

impl SampleId {
    pub fn h(&self) -> f64 {
        f64::from_bits(self.h_bits)
    }
}

/// A weighted discretization of one of the compact sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SetSample {
    pub label: SetLabel,
    pub points: Vec<ComplexPoint>,
    pub weights: Vec<f64>,
    pub params: Vec<SampleParam>,
    pub h: f64,
    pub id: SampleId,
}

fn digest(points: &[ComplexPoint]) -> u64 {
    // FNV-1a over the coordinate bit patterns.
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for p in points {
        for x in p.to_reals() {
            for b in x.to_bits().to_le_bytes() {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0100_0000_01b3);
            }
        }
    }
    hash
}

impl SetSample {
    pub fn new(label: SetLabel, h: f64, points: Vec<ComplexPoint>, weights: Vec<f64>, params: Vec<SampleParam>) -> Self {
        let id = SampleId { label, h_bits: h.to_bits(), len: points.len(), digest: digest(&points) };
        SetSample { label, points, weights, params, h, id }
    }

    /// A sample without parameter information, e.g. a hand-built point list.
    pub fn from_points(label: SetLabel, h: f64, points: Vec<ComplexPoint>) -> Self {
        let n = points.len();
        let params = vec![SampleParam { family: Family::X1, s: f64::NAN, t: f64::NAN }; n];
        SetSample::new(label, h, points, vec![1.0 / n.max(1) as f64; n], params)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn relabel(label: SetLabel, h: f64, parts: Vec<SetSample>) -> SetSample {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut params = Vec::new();
        for p in parts {
            points.extend(p.points);
            weights.extend(p.weights);
            params.extend(p.params);
        }
        SetSample::new(label, h, points, weights, params)
    }

    fn filtered(self, label: SetLabel, keep: impl Fn(&ComplexPoint) -> bool) -> SetSample {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut params = Vec::new();
        for i in 0..self.points.len() {
            if keep(&self.points[i]) {
                points.push(self.points[i]);
                weights.push(self.weights[i]);
                params.push(self.params[i]);
            }
        }
        SetSample::new(label, self.h, points, weights, params)
    }

    /// The two real tangent vectors of the parameterization at point `i`.
    pub fn tangent_frame(&self, geom: &SceneGeometry, i: usize) -> Option<(ComplexPoint, ComplexPoint)> {
        let par = self.params[i];
        if par.s.is_nan() {
            return None;
        }
        let z = self.points[i].z;
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Some(match par.family {
            Family::X1 => {
                let d = geom.curve2.deriv(par.s);
                let d = d / d.norm();
                (ComplexPoint::new(d, z * d * 2.0), ComplexPoint::new(zero, -one))
            }
            Family::X2 => {
                let d = geom.curve1.deriv(par.s);
                let d = d / d.norm();
                (ComplexPoint::new(d, zero), ComplexPoint::new(zero, one))
            }
            Family::Vt1 => (ComplexPoint::new(one, z * 2.0), ComplexPoint::new(zero, -one)),
            Family::Vt2 => (ComplexPoint::new(one, zero), ComplexPoint::new(zero, one)),
        })
    }

    /// CSV with columns `re_z, im_z, re_w, im_w, weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_z,im_z,re_w,im_w,weight\n");
        for (p, w) in self.points.iter().zip(&self.weights) {
            let [a, b, c, d] = p.to_reals();
            out.push_str(&format!("{a},{b},{c},{d},{w}\n"));
        }
        out
    }
}

fn on_real_interval(z: C64, iv: (f64, f64), tol: f64) -> bool {
    z.im.abs() <= tol && z.re >= iv.0 - tol && z.re <= iv.1 + tol
}

fn in_v1(p: &ComplexPoint, tol: f64) -> bool {
    let f = p.z * p.z - p.w;
    f.im.abs() <= tol && f.re >= -tol && f.re <= 1.0 + tol
}

fn in_v2(p: &ComplexPoint, tol: f64) -> bool {
    p.w.im.abs() <= tol && p.w.re >= 1.0 - tol && p.w.re <= 2.0 + tol
}

/// Interior of the part of `X1` removed to form `Y1`.
fn in_removed_from_x1(geom: &SceneGeometry, p: &ComplexPoint, tol: f64) -> bool {
    let (a, b) = geom.i_minus;
    p.z.im.abs() <= tol
        && p.z.re > a + tol
        && p.z.re < b - tol
        && p.w.im.abs() <= tol
        && p.w.re > 1.0 + tol
        && p.w.re < 2.0 - tol
}

/// Interior of the part of `X2` removed to form `Y2`.
fn in_removed_from_x2(geom: &SceneGeometry, p: &ComplexPoint, tol: f64) -> bool {
    let (a, b) = geom.i_plus;
    let f = p.z * p.z - p.w;
    p.z.im.abs() <= tol
        && p.z.re > a + tol
        && p.z.re < b - tol
        && f.im.abs() <= tol
        && f.re > tol
        && f.re < 1.0 - tol
}

/// Membership of `p` in the set named by `label`, up to `tol`.
pub fn set_membership(geom: &SceneGeometry, label: SetLabel, p: &ComplexPoint, tol: f64) -> bool {
    let x1 = |p: &ComplexPoint| in_v1(p, tol) && geom.curve2.distance(p.z).0 <= tol;
    let x2 = |p: &ComplexPoint| in_v2(p, tol) && geom.curve1.distance(p.z).0 <= tol;
    let y1 = |p: &ComplexPoint| x1(p) && !in_removed_from_x1(geom, p, tol);
    let y2 = |p: &ComplexPoint| x2(p) && !in_removed_from_x2(geom, p, tol);
    match label {
        SetLabel::V1 => in_v1(p, tol),
        SetLabel::V2 => in_v2(p, tol),
        SetLabel::X1 => x1(p),
        SetLabel::X2 => x2(p),
        SetLabel::Vt1 => in_v1(p, tol) && on_real_interval(p.z, geom.i_plus, tol),
        SetLabel::Vt2 => in_v2(p, tol) && on_real_interval(p.z, geom.i_minus, tol),
        SetLabel::Y1 => y1(p),
        SetLabel::Y2 => y2(p),
        SetLabel::Y => y1(p) || y2(p),
        SetLabel::Yplus => p.z.re >= -tol && (y1(p) || y2(p)),
        SetLabel::Yminus => p.z.re <= tol && (y1(p) || y2(p)),
        SetLabel::X1uX2 => x1(p) || x2(p),
    }
}

/// The fibre parameters `t in [0, 1]` kept over a real node `x` of the removal interval.
///
/// Both families remove the open interval `(x^2 - 2, x^2 - 1)`.
pub fn retained_t_intervals(x: f64) -> Vec<(f64, f64)> {
    let lo = x * x - 2.0;
    let hi = x * x - 1.0;
    let mut out = Vec::new();
    if lo >= 0.0 {
        out.push((0.0, lo.min(1.0)));
    }
    if hi <= 1.0 {
        out.push((hi.max(0.0), 1.0));
    }
    out
}

/// Retained `w`-intervals over a real node: `Y1` over the negative interval or
/// `Y2` over the positive one, sorted by left endpoint.
pub fn retained_w_intervals(label: SetLabel, x: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = retained_t_intervals(x)
        .into_iter()
        .map(|(a, b)| match label {
            SetLabel::Y1 => (x * x - b, x * x - a),
            _ => (1.0 + a, 1.0 + b),
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Fibre nodes over `[a, b]` on the grid of spacing `1/n`, endpoints included,
/// with trapezoid cells.
fn fibre_nodes(pieces: &[(f64, f64)], n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in pieces {
        let mut ts = vec![a];
        for j in 0..=n {
            let t = j as f64 / n as f64;
            if t > a + 1e-12 && t < b - 1e-12 {
                ts.push(t);
            }
        }
        if b > a {
            ts.push(b);
        }
        let m = ts.len();
        for i in 0..m {
            let left = if i > 0 { ts[i] - ts[i - 1] } else { 0.0 };
            let right = if i + 1 < m { ts[i + 1] - ts[i] } else { 0.0 };
            out.push((ts[i], 0.5 * (left + right)));
        }
    }
    out
}

fn strictly_inside(x: f64, iv: (f64, f64)) -> bool {
    x > iv.0 && x < iv.1
}

fn sample_curve_family(geom: &SceneGeometry, family: Family, remove: bool, h: f64) -> SetSample {
    let n = (1.0 / h).ceil() as usize;
    let full = [(0.0, 1.0)];
    let (curve, iv, label) = match family {
        Family::X1 => (&geom.curve2, geom.i_minus, if remove { SetLabel::Y1 } else { SetLabel::X1 }),
        _ => (&geom.curve1, geom.i_plus, if remove { SetLabel::Y2 } else { SetLabel::X2 }),
    };
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut params = Vec::new();
    for cs in curve.arclength_samples(h) {
        let z = cs.z;
        let pieces = if remove && z.im.abs() <= 1e-12 && strictly_inside(z.re, iv) {
            retained_t_intervals(z.re)
        } else {
            full.to_vec()
        };
        let area = match family {
            Family::X1 => (1.0 + 4.0 * z.norm_sqr() - 4.0 * (z * cs.tangent).re.powi(2)).max(0.0).sqrt(),
            _ => 1.0,
        };
        for (t, cell) in fibre_nodes(&pieces, n) {
            let w = match family {
                Family::X1 => z * z - t,
                _ => C64::new(1.0 + t, 0.0),
            };
            points.push(ComplexPoint::new(z, w));
            weights.push(cs.ds * cell * area);
            params.push(SampleParam { family, s: cs.s, t });
        }
    }
    SetSample::new(label, h, points, weights, params)
}

fn sample_flat(iv: (f64, f64), family: Family, h: f64) -> SetSample {
    let n = (1.0 / h).ceil() as usize;
    let nx = ((iv.1 - iv.0) / h).ceil() as usize;
    let step = (iv.1 - iv.0) / nx as f64;
    let label = if family == Family::Vt1 { SetLabel::Vt1 } else { SetLabel::Vt2 };
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut params = Vec::new();
    for i in 0..=nx {
        let x = if i == nx { iv.1 } else { iv.0 + step * i as f64 };
        let dx = if i == 0 || i == nx { 0.5 * step } else { step };
        for (t, cell) in fibre_nodes(&[(0.0, 1.0)], n) {
            let w = if family == Family::Vt1 { x * x - t } else { 1.0 + t };
            points.push(ComplexPoint::real(x, w));
            weights.push(dx * cell);
            params.push(SampleParam { family, s: x, t });
        }
    }
    SetSample::new(label, h, points, weights, params)
}

/// Weighted sample of a compact set with spacing at most `h` in arclength and fibre parameter.
pub fn sample_set(geom: &SceneGeometry, label: SetLabel, h: f64) -> Result<SetSample, GeometryError> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(GeometryError::Usage(format!("sampling h must lie in (0, 0.1], got {h}")));
    }
    let s = match label {
        SetLabel::V1 | SetLabel::V2 => {
            return Err(GeometryError::Usage(format!("{label} is unbounded and cannot be sampled")))
        }
        SetLabel::X1 => sample_curve_family(geom, Family::X1, false, h),
        SetLabel::X2 => sample_curve_family(geom, Family::X2, false, h),
        SetLabel::Y1 => sample_curve_family(geom, Family::X1, true, h),
        SetLabel::Y2 => sample_curve_family(geom, Family::X2, true, h),
        SetLabel::Vt1 => sample_flat(geom.i_plus, Family::Vt1, h),
        SetLabel::Vt2 => sample_flat(geom.i_minus, Family::Vt2, h),
        SetLabel::Y => SetSample::relabel(
            label,
            h,
            vec![sample_set(geom, SetLabel::Y1, h)?, sample_set(geom, SetLabel::Y2, h)?],
        ),
        SetLabel::X1uX2 => SetSample::relabel(
            label,
            h,
            vec![sample_set(geom, SetLabel::X1, h)?, sample_set(geom, SetLabel::X2, h)?],
        ),
        SetLabel::Yplus => sample_set(geom, SetLabel::Y, h)?.filtered(label, |p| p.z.re >= 0.0),
        SetLabel::Yminus => sample_set(geom, SetLabel::Y, h)?.filtered(label, |p| p.z.re <= 0.0),
    };
    Ok(s)
}

/// Determinant of the two parameter tangent vectors of `X1` or `X2` at `(s, t)`.
pub fn totally_real_defect(geom: &SceneGeometry, label: SetLabel, s: f64, t: f64) -> Result<f64, GeometryError> {
    let curve = match label {
        SetLabel::X1 => &geom.curve2,
        SetLabel::X2 => &geom.curve1,
        other => return Err(GeometryError::Usage(format!("totally real defect is defined for X1, X2, not {other}"))),
    };
    let n = curve.len() as f64;
    if !(0.0..=n).contains(&s) || !(0.0..=1.0).contains(&t) {
        return Err(GeometryError::Usage(format!("parameter ({s}, {t}) outside [0, {n}] x [0, 1]")));
    }
    // For X1, u = (z', 2 z z') and v = (0, -1); for X2, u = (z', 0) and v = (0, 1).
    let d = curve.deriv(s.min(n - 1e-15));
    let z = curve.point(s);
    let (u, v) = match label {
        SetLabel::X1 => ([d, z * d * 2.0], [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]),
        _ => ([d, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
    };
    Ok((u[0] * v[1] - u[1] * v[0]).norm())
}

/// Minimum Euclidean distance between the two samples in `R^4`.
pub fn set_separation(a: &SetSample, b: &SetSample) -> Result<f64, GeometryError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeometryError::Usage("set_separation needs nonempty samples".into()));
    }
    let mut sorted: Vec<ComplexPoint> = b.points.clone();
    sorted.sort_by(|p, q| p.z.re.total_cmp(&q.z.re));
    let keys: Vec<f64> = sorted.iter().map(|p| p.z.re).collect();
    let best = a
        .points
        .par_iter()
        .map(|p| {
            let start = keys.partition_point(|&x| x < p.z.re);
            let mut best = f64::INFINITY;
            for q in sorted[start..].iter() {
                if q.z.re - p.z.re >= best {
                    break;
                }
                best = best.min(p.dist(q));
            }
            for q in sorted[..start].iter().rev() {
                if p.z.re - q.z.re >= best {
                    break;
                }
                best = best.min(p.dist(q));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_default_geometry, MEMBERSHIP_TOL};

    fn geom() -> SceneGeometry {
        build_default_geometry(None).unwrap()
    }

    #[test]
    fn membership_examples() {
        let g = geom();
        let tol = MEMBERSHIP_TOL;
        assert!(set_membership(&g, SetLabel::V1, &ComplexPoint::real(1.0, 1.0), tol));
        let p = ComplexPoint::new(C64::i(), C64::new(0.0, 0.0));
        assert!(!set_membership(&g, SetLabel::V1, &p, tol));
        assert!(set_membership(&g, SetLabel::Y1, &ComplexPoint::real(-1.5, 2.1), tol));
        assert!(!set_membership(&g, SetLabel::Y1, &ComplexPoint::real(-1.5, 1.5), tol));
    }

    #[test]
    fn label_parsing() {
        assert_eq!("Y+".parse::<SetLabel>().unwrap(), SetLabel::Yplus);
        assert_eq!("x1ux2".parse::<SetLabel>().unwrap(), SetLabel::X1uX2);
        assert!("Z".parse::<SetLabel>().is_err());
    }

    #[test]
    fn x2_sample_is_exact() {
        let s = sample_set(&geom(), SetLabel::X2, 0.05).unwrap();
        for p in &s.points {
            assert_eq!(p.w.im, 0.0);
            assert!((1.0..=2.0).contains(&p.w.re));
        }
    }

    #[test]
    fn unbounded_labels_are_rejected() {
        assert!(sample_set(&geom(), SetLabel::V1, 0.05).is_err());
        assert!(sample_set(&geom(), SetLabel::Y, 0.5).is_err());
    }

    #[test]
    fn sampled_points_pass_membership() {
        let g = geom();
        for label in [SetLabel::X1, SetLabel::X2, SetLabel::Y1, SetLabel::Y2, SetLabel::Vt1, SetLabel::Vt2, SetLabel::Yminus] {
            let s = sample_set(&g, label, 0.1).unwrap();
            assert!(!s.is_empty());
            for p in s.points.iter().step_by(7) {
                assert!(set_membership(&g, label, p, MEMBERSHIP_TOL), "{label} {p}");
            }
        }
    }

    #[test]
    fn retained_intervals_match_regions() {
        let s2 = 2f64.sqrt();
        let s3 = 3f64.sqrt();
        for k in 0..=100 {
            let x = -s3 + (s3 - 1.0) * k as f64 / 100.0;
            let iv = retained_w_intervals(SetLabel::Y1, x);
            if x <= -s2 {
                let last = iv.last().unwrap();
                assert!((last.0 - 2.0).abs() < 1e-12 && (last.1 - x * x).abs() < 1e-12);
            } else {
                assert!((iv[0].0 - (x * x - 1.0)).abs() < 1e-12 && (iv[0].1 - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vt2_weight_is_its_area() {
        let s = sample_set(&geom(), SetLabel::Vt2, 0.05).unwrap();
        assert!((s.total_weight() - (3f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn x2_weight_is_curve_length() {
        let g = geom();
        let s = sample_set(&g, SetLabel::X2, 0.05).unwrap();
        assert!((s.total_weight() - g.curve1.length()).abs() < 1e-9);
    }

    #[test]
    fn defect_of_x2_is_speed() {
        let g = geom();
        let d = totally_real_defect(&g, SetLabel::X2, 3.3, 0.4).unwrap();
        assert!((d - g.curve1.deriv(3.3).norm()).abs() < 1e-14);
        assert!(totally_real_defect(&g, SetLabel::Y, 0.0, 0.0).is_err());
        assert!(totally_real_defect(&g, SetLabel::X1, 0.0, 1.5).is_err());
    }

    #[test]
    fn separation_of_identical_samples_is_zero() {
        let s = sample_set(&geom(), SetLabel::Y2, 0.1).unwrap();
        assert_eq!(set_separation(&s, &s).unwrap(), 0.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let s = sample_set(&geom(), SetLabel::Vt1, 0.1).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("re_z,im_z,re_w,im_w,weight\n"));
        assert_eq!(csv.lines().count(), s.len() + 1);
    }
}
