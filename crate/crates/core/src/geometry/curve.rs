use serde::{Deserialize, Serialize};

use super::bezier::{CubicBezier, Rect};
use super::GeometryError;
use crate::C64;

/// Joint tolerance for closedness and C1 continuity.
pub const JOINT_TOL: f64 = 1e-9;

/// A closed chain of cubic Bezier segments.
///
/// The global parameter runs over `[0, n)` where `n` is the number of
/// segments; `s = k + u` addresses local parameter `u` of segment `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub segments: Vec<CubicBezier>,
    pub closed: bool,
    /// `(global parameter, required point)` pairs.
    pub anchors: Vec<(f64, C64)>,
}

/// A point of an arclength sampling of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    /// Global curve parameter.
    pub s: f64,
    pub z: C64,
    /// Unit tangent.
    pub tangent: C64,
    /// Arclength cell attached to the node.
    pub ds: f64,
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    segments: Vec<[[f64; 2]; 4]>,
    closed: bool,
    anchors: Vec<(f64, [f64; 2])>,
}

impl CurveSpec {
    /// Builds a closed chain, rejecting gaps between consecutive segments.
    pub fn closed(segments: Vec<CubicBezier>, anchors: Vec<(f64, C64)>) -> Result<Self, GeometryError> {
        if segments.is_empty() {
            return Err(GeometryError::Usage("curve needs at least one segment".into()));
        }
        let n = segments.len();
        for k in 0..n {
            let gap = (segments[k].end() - segments[(k + 1) % n].start()).norm();
            if gap > JOINT_TOL {
                return Err(GeometryError::OpenChain { segment: k, gap });
            }
        }
        Ok(Self { segments, closed: true, anchors })
    }

    /// A circle of the given radius as four cubic arcs, counterclockwise.
    pub fn circle(center: C64, radius: f64) -> Self {
        let k = 4.0 / 3.0 * (std::f64::consts::PI / 8.0).tan();
        let mut segs = Vec::with_capacity(4);
        for q in 0..4 {
            let a = C64::from_polar(1.0, q as f64 * std::f64::consts::FRAC_PI_2);
            let b = a * C64::i();
            segs.push(CubicBezier::new(
                center + a * radius,
                center + (a + b * k) * radius,
                center + (b + a * k) * radius,
                center + b * radius,
            ));
        }
        Self { segments: segs, closed: true, anchors: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let n = self.segments.len();
        let s = s.rem_euclid(n as f64);
        let k = (s.floor() as usize).min(n - 1);
        (k, s - k as f64)
    }

    pub fn point(&self, s: f64) -> C64 {
        let (k, u) = self.locate(s);
        self.segments[k].eval(u)
    }

    pub fn deriv(&self, s: f64) -> C64 {
        let (k, u) = self.locate(s);
        self.segments[k].deriv(u)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64 + Copy) -> CurveSpec {
        CurveSpec {
            segments: self.segments.iter().map(|s| s.map(f)).collect(),
            closed: self.closed,
            anchors: self.anchors.iter().map(|&(s, p)| (s, f(p))).collect(),
        }
    }

    /// Image under `z -> -z`.
    pub fn negated(&self) -> CurveSpec {
        self.map(|z| -z)
    }

    pub fn translated(&self, by: C64) -> CurveSpec {
        self.map(move |z| z + by)
    }

    pub fn bbox(&self) -> Rect {
        self.segments
            .iter()
            .map(CubicBezier::bbox)
            .reduce(|a, b| a.union(&b))
            .expect("curve has segments")
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.arc_length(0.0, 1.0)).sum()
    }

    /// Segment index with zero length, if any.
    pub fn degenerate_segment(&self) -> Option<usize> {
        self.segments.iter().position(|s| s.control_polygon_length() < 1e-12)
    }

    /// Distance from `q` to the curve and the global parameter of the foot point.
    pub fn distance(&self, q: C64) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for (k, seg) in self.segments.iter().enumerate() {
            if seg.bbox().distance_to(q) > best.0 {
                continue;
            }
            let (u, d) = seg.closest(q);
            if d < best.0 {
                best = (d, k as f64 + u);
            }
        }
        best
    }

    /// Winding number of the curve around `q`.
    pub fn winding_number(&self, q: C64) -> Result<i64, GeometryError> {
        let (d, _) = self.distance(q);
        if d <= 1e-9 {
            return Err(GeometryError::OnBoundary { point: q, distance: d });
        }
        let total: f64 = self.segments.iter().map(|s| arg_increment(s, q, 0)).sum();
        let turns = total / std::f64::consts::TAU;
        let rounded = turns.round();
        // The subdivision keeps every piece inside a cone seen from q, so the
        // sum of increments is exact up to floating-point error.
        debug_assert!((turns - rounded).abs() < 0.1);
        Ok(rounded as i64)
    }

    /// Nodes spaced at most `h` apart in arclength, segment joints included.
    pub fn arclength_samples(&self, h: f64) -> Vec<CurveSample> {
        let mut out = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let len = seg.arc_length(0.0, 1.0);
            let n = ((len / h).ceil() as usize).max(1);
            let step = len / n as f64;
            for j in 0..n {
                let u = seg.param_at_length(step * j as f64, len);
                let d = seg.deriv(u);
                out.push(CurveSample { s: k as f64 + u, z: seg.eval(u), tangent: d / d.norm(), ds: step });
            }
        }
        // Cell of a node is half of each adjacent interval.
        let m = out.len();
        let steps: Vec<f64> = out.iter().map(|c| c.ds).collect();
        for j in 0..m {
            let prev = steps[(j + m - 1) % m];
            out[j].ds = 0.5 * (prev + steps[j]);
        }
        out
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let j = CurveJson {
            segments: self
                .segments
                .iter()
                .map(|s| s.0.map(|p| [p.re, p.im]))
                .collect(),
            closed: self.closed,
            anchors: self.anchors.iter().map(|&(s, p)| (s, [p.re, p.im])).collect(),
        };
        serde_json::to_value(j).expect("curve serializes")
    }
}

/// Argument increment of `seg - q`, subdividing until each piece lies in a
/// cone of opening below a right angle as seen from `q`.
fn arg_increment(seg: &CubicBezier, q: C64, depth: u32) -> f64 {
    let bb = seg.bbox();
    if bb.distance_to(q) > bb.diameter() || depth > 60 {
        return ((seg.end() - q) / (seg.start() - q)).arg();
    }
    let (a, b) = seg.split(0.5);
    arg_increment(&a, q, depth + 1) + arg_increment(&b, q, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_winding() {
        let c = CurveSpec::circle(C64::new(0.0, 0.0), 1.0);
        assert_eq!(c.winding_number(C64::new(0.0, 0.0)).unwrap(), 1);
        assert_eq!(c.winding_number(C64::new(3.0, 0.0)).unwrap(), 0);
        assert_eq!(c.winding_number(C64::new(0.999, 0.0)).unwrap(), 1);
        assert_eq!(c.winding_number(C64::new(1.001, 0.0)).unwrap(), 0);
    }

    #[test]
    fn reversed_circle_winds_negatively() {
        let c = CurveSpec::circle(C64::new(0.0, 0.0), 1.0);
        let rev = CurveSpec {
            segments: c.segments.iter().rev().map(|s| CubicBezier([s.0[3], s.0[2], s.0[1], s.0[0]])).collect(),
            closed: true,
            anchors: vec![],
        };
        assert_eq!(rev.winding_number(C64::new(0.2, 0.1)).unwrap(), -1);
    }

    #[test]
    fn on_boundary_is_an_error() {
        let c = CurveSpec::circle(C64::new(0.0, 0.0), 1.0);
        let err = c.winding_number(C64::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, GeometryError::OnBoundary { .. }));
    }

    #[test]
    fn open_chain_rejected() {
        let a = CubicBezier::line(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let b = CubicBezier::line(C64::new(1.0, 0.0), C64::new(1.0, 1.0));
        let err = CurveSpec::closed(vec![a, b], vec![]).unwrap_err();
        assert!(matches!(err, GeometryError::OpenChain { segment: 1, .. }));
    }

    #[test]
    fn arclength_samples_cover_circle() {
        let c = CurveSpec::circle(C64::new(0.0, 0.0), 2.0);
        let samples = c.arclength_samples(0.05);
        let total: f64 = samples.iter().map(|s| s.ds).sum();
        assert!((total - c.length()).abs() < 1e-9);
        for w in samples.windows(2) {
            assert!((w[1].z - w[0].z).norm() <= 0.05 + 1e-12);
        }
        // circle approximation error of the 4-arc cubic is ~2.7e-4 relative
        assert!((c.length() - 4.0 * std::f64::consts::PI).abs() < 1e-2);
    }
}
