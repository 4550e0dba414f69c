use crate::C64;

/// 8-point Gauss-Legendre rule on [-1, 1].
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Axis-aligned rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: C64,
    pub max: C64,
}

impl Rect {
    pub fn from_points(pts: &[C64]) -> Rect {
        let mut min = pts[0];
        let mut max = pts[0];
        for p in &pts[1..] {
            min.re = min.re.min(p.re);
            min.im = min.im.min(p.im);
            max.re = max.re.max(p.re);
            max.im = max.im.max(p.im);
        }
        Rect { min, max }
    }

    pub fn diameter(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn center(&self) -> C64 {
        (self.min + self.max) * 0.5
    }

    pub fn overlaps(&self, other: &Rect, eps: f64) -> bool {
        self.min.re <= other.max.re + eps
            && other.min.re <= self.max.re + eps
            && self.min.im <= other.max.im + eps
            && other.min.im <= self.max.im + eps
    }

    /// Euclidean distance from `q` to the rectangle (0 inside).
    pub fn distance_to(&self, q: C64) -> f64 {
        let dx = (self.min.re - q.re).max(0.0).max(q.re - self.max.re);
        let dy = (self.min.im - q.im).max(0.0).max(q.im - self.max.im);
        dx.hypot(dy)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            min: C64::new(self.min.re.min(other.min.re), self.min.im.min(other.min.im)),
            max: C64::new(self.max.re.max(other.max.re), self.max.im.max(other.max.im)),
        }
    }
}

/// A planar cubic Bezier segment with complex control points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBezier(pub [C64; 4]);

impl CubicBezier {
    pub fn new(p0: C64, p1: C64, p2: C64, p3: C64) -> Self {
        Self([p0, p1, p2, p3])
    }

    /// Straight segment from `a` to `b` with evenly spaced control points.
    pub fn line(a: C64, b: C64) -> Self {
        let d = (b - a) / 3.0;
        Self([a, a + d, a + d * 2.0, b])
    }

    pub fn start(&self) -> C64 {
        self.0[0]
    }

    pub fn end(&self) -> C64 {
        self.0[3]
    }

    pub fn eval(&self, t: f64) -> C64 {
        let [p0, p1, p2, p3] = self.0;
        let s = 1.0 - t;
        p0 * (s * s * s) + p1 * (3.0 * s * s * t) + p2 * (3.0 * s * t * t) + p3 * (t * t * t)
    }

    pub fn deriv(&self, t: f64) -> C64 {
        let [p0, p1, p2, p3] = self.0;
        let s = 1.0 - t;
        ((p1 - p0) * (s * s) + (p2 - p1) * (2.0 * s * t) + (p3 - p2) * (t * t)) * 3.0
    }

    pub fn second_deriv(&self, t: f64) -> C64 {
        let [p0, p1, p2, p3] = self.0;
        ((p2 - p1 * 2.0 + p0) * (1.0 - t) + (p3 - p2 * 2.0 + p1) * t) * 6.0
    }

    /// de Casteljau split at `t`.
    pub fn split(&self, t: f64) -> (CubicBezier, CubicBezier) {
        let [p0, p1, p2, p3] = self.0;
        let lerp = |a: C64, b: C64| a + (b - a) * t;
        let a = lerp(p0, p1);
        let b = lerp(p1, p2);
        let c = lerp(p2, p3);
        let d = lerp(a, b);
        let e = lerp(b, c);
        let m = lerp(d, e);
        (CubicBezier([p0, a, d, m]), CubicBezier([m, e, c, p3]))
    }

    /// Bounding box of the control polygon; it contains the curve.
    pub fn bbox(&self) -> Rect {
        Rect::from_points(&self.0)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> CubicBezier {
        CubicBezier(self.0.map(f))
    }

    pub fn control_polygon_length(&self) -> f64 {
        self.0.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Arc length between parameters `t0 <= t1`.
    pub fn arc_length(&self, t0: f64, t1: f64) -> f64 {
        const PIECES: usize = 4;
        let mut total = 0.0;
        let step = (t1 - t0) / PIECES as f64;
        for k in 0..PIECES {
            let a = t0 + step * k as f64;
            let half = 0.5 * step;
            let mid = a + half;
            total += GL_NODES
                .iter()
                .zip(GL_WEIGHTS.iter())
                .map(|(x, w)| w * self.deriv(mid + half * x).norm())
                .sum::<f64>()
                * half;
        }
        total
    }

    /// Parameter at which the arc length from 0 equals `target`.
    pub fn param_at_length(&self, target: f64, total: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        if target >= total {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut t = target / total;
        for _ in 0..60 {
            let f = self.arc_length(0.0, t) - target;
            if f.abs() < 1e-13 {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let speed = self.deriv(t).norm();
            let newton = t - f / speed;
            t = if speed > 1e-12 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        t
    }

    /// Closest parameter to `q` and its distance.
    pub fn closest(&self, q: C64) -> (f64, f64) {
        const SEEDS: usize = 24;
        let mut best_t = 0.0;
        let mut best_d = f64::INFINITY;
        for k in 0..=SEEDS {
            let t = k as f64 / SEEDS as f64;
            let d = (self.eval(t) - q).norm();
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        // Newton on the stationarity condition Re(conj(B - q) B') = 0.
        let mut t = best_t;
        for _ in 0..30 {
            let diff = self.eval(t) - q;
            let d1 = self.deriv(t);
            let d2 = self.second_deriv(t);
            let f = (diff.conj() * d1).re;
            let fp = d1.norm_sqr() + (diff.conj() * d2).re;
            if fp.abs() < 1e-300 {
                break;
            }
            let next = (t - f / fp).clamp(0.0, 1.0);
            if (next - t).abs() < 1e-15 {
                t = next;
                break;
            }
            t = next;
        }
        let d = (self.eval(t) - q).norm();
        if d < best_d {
            (t, d)
        } else {
            (best_t, best_d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_segment_is_exact() {
        let seg = CubicBezier::line(C64::new(1.0, 0.0), C64::new(3f64.sqrt(), 0.0));
        for k in 0..=10 {
            let p = seg.eval(k as f64 / 10.0);
            assert_eq!(p.im, 0.0);
        }
        assert!((seg.arc_length(0.0, 1.0) - (3f64.sqrt() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn split_reproduces_curve() {
        let seg = CubicBezier::new(
            C64::new(0.0, 0.0),
            C64::new(1.0, 2.0),
            C64::new(3.0, -1.0),
            C64::new(4.0, 0.5),
        );
        let (a, b) = seg.split(0.3);
        for k in 0..=10 {
            let u = k as f64 / 10.0;
            assert!((a.eval(u) - seg.eval(0.3 * u)).norm() < 1e-14);
            assert!((b.eval(u) - seg.eval(0.3 + 0.7 * u)).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let seg = CubicBezier::new(
            C64::new(0.0, 0.0),
            C64::new(1.0, 2.0),
            C64::new(3.0, -1.0),
            C64::new(4.0, 0.5),
        );
        let h = 1e-6;
        for k in 1..10 {
            let t = k as f64 / 10.0;
            let fd = (seg.eval(t + h) - seg.eval(t - h)) / (2.0 * h);
            assert!((fd - seg.deriv(t)).norm() < 1e-7);
            let fd2 = (seg.deriv(t + h) - seg.deriv(t - h)) / (2.0 * h);
            assert!((fd2 - seg.second_deriv(t)).norm() < 1e-6);
        }
    }

    #[test]
    fn closest_point_on_line() {
        let seg = CubicBezier::line(C64::new(0.0, 0.0), C64::new(2.0, 0.0));
        let (t, d) = seg.closest(C64::new(0.5, 0.25));
        assert!((t - 0.25).abs() < 1e-12);
        assert!((d - 0.25).abs() < 1e-12);
    }

    #[test]
    fn param_at_length_inverts_arc_length() {
        let seg = CubicBezier::new(
            C64::new(0.0, 0.0),
            C64::new(1.0, 2.0),
            C64::new(3.0, -1.0),
            C64::new(4.0, 0.5),
        );
        let total = seg.arc_length(0.0, 1.0);
        for k in 1..10 {
            let target = total * k as f64 / 10.0;
            let t = seg.param_at_length(target, total);
            assert!((seg.arc_length(0.0, t) - target).abs() < 1e-10);
        }
    }
}
