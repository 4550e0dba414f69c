use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::bezier::CubicBezier;
use super::curve::{CurveSpec, JOINT_TOL};
use super::intersect::intersect_curves;
use super::GeometryError;
use crate::C64;

/// The real interval `[1, sqrt 3]` on the first boundary curve.
pub const I_PLUS: (f64, f64) = (1.0, 1.732_050_807_568_877_2);
/// The real interval `[-sqrt 3, -1]` on the second boundary curve.
pub const I_MINUS: (f64, f64) = (-1.732_050_807_568_877_2, -1.0);
/// Default spacing of the arrangement grid.
pub const DEFAULT_H_GRID: f64 = 0.02;

/// Minimum speed a regular curve must keep.
const MIN_SPEED: f64 = 1e-3;
/// Curves must pass through the anchors and contain the intervals within this.
const ON_CURVE_TOL: f64 = 1e-9;
/// Distance at which a merged intersection is attributed to `+i` or `-i`.
const ANCHOR_MATCH_TOL: f64 = 1e-5;

/// The two boundary curves and the intervals on them.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    pub curve1: CurveSpec,
    pub curve2: CurveSpec,
    pub i_plus: (f64, f64),
    pub i_minus: (f64, f64),
}

/// Replacement control-point tables, `[[re, im]; 4]` per segment.
///
/// A missing `curve2` is taken to be the image of `curve1` under `z -> -z`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryOverrides {
    pub curve1: Vec<[[f64; 2]; 4]>,
    #[serde(default)]
    pub curve2: Option<Vec<[[f64; 2]; 4]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<28} {:<4} {:.6e}", c.name, if c.pass { "ok" } else { "FAIL" }, c.value)?;
        }
        write!(f, "overall: {}", if self.overall { "pass" } else { "fail" })
    }
}

fn chain(joints: &[C64], offsets: &[C64]) -> Vec<CubicBezier> {
    let n = joints.len();
    (0..n)
        .map(|k| {
            let a = joints[k];
            let b = joints[(k + 1) % n];
            CubicBezier::new(a, a + offsets[k], b - offsets[(k + 1) % n], b)
        })
        .collect()
}

fn default_curve1() -> CurveSpec {
    let s3 = I_PLUS.1;
    let c = C64::new;
    let l = (s3 - 1.0) / 3.0;
    let d1 = c(-1.0, 1.0) / 2f64.sqrt();
    let d2 = c(1.0, 1.0) / 2f64.sqrt();
    let joints = [
        c(s3, 0.0),
        c(1.0, 0.0),
        c(0.0, 1.0),
        c(-1.3, 1.85),
        c(-2.6, 0.0),
        c(-1.3, -1.85),
        c(0.0, -1.0),
        c(1.05, -0.75),
        c(2.3, -0.3),
    ];
    let offsets = [
        c(-l, 0.0),
        c(-l, 0.0),
        d1 * 0.45,
        c(-0.75, -0.05),
        c(0.0, -0.95),
        c(0.75, -0.05),
        d2 * 0.5,
        c(0.55, 0.1),
        c(0.15, 0.35),
    ];
    let anchors = vec![(0.0, joints[0]), (1.0, joints[1]), (2.0, joints[2]), (6.0, joints[6])];
    CurveSpec::closed(chain(&joints, &offsets), anchors).expect("default chain is closed")
}

fn curve_from_table(table: &[[[f64; 2]; 4]]) -> Result<CurveSpec, GeometryError> {
    let segs = table
        .iter()
        .map(|s| CubicBezier(s.map(|p| C64::new(p[0], p[1]))))
        .collect();
    CurveSpec::closed(segs, Vec::new())
}

/// The default scene, or one built from override tables.
pub fn build_default_geometry(overrides: Option<&GeometryOverrides>) -> Result<SceneGeometry, GeometryError> {
    let (curve1, curve2) = match overrides {
        None => {
            let c1 = default_curve1();
            let c2 = c1.negated();
            (c1, c2)
        }
        Some(o) => {
            let c1 = curve_from_table(&o.curve1)?;
            let c2 = match &o.curve2 {
                Some(t) => curve_from_table(t)?,
                None => c1.negated(),
            };
            (c1, c2)
        }
    };
    Ok(SceneGeometry { curve1, curve2, i_plus: I_PLUS, i_minus: I_MINUS })
}

#[derive(Serialize, Deserialize)]
struct SceneJson {
    curve1: Vec<[[f64; 2]; 4]>,
    curve2: Vec<[[f64; 2]; 4]>,
    anchors: AnchorsJson,
}

#[derive(Serialize, Deserialize)]
struct AnchorsJson {
    curve1: Vec<(f64, [f64; 2])>,
    curve2: Vec<(f64, [f64; 2])>,
}

fn table(c: &CurveSpec) -> Vec<[[f64; 2]; 4]> {
    c.segments.iter().map(|s| s.0.map(|p| [p.re, p.im])).collect()
}

impl SceneGeometry {
    pub fn translated(&self, by: C64) -> SceneGeometry {
        SceneGeometry { curve1: self.curve1.translated(by), curve2: self.curve2.translated(by), ..self.clone() }
    }

    /// The anchor point of `curve1` nearest in value to `target`.
    pub fn anchor_param(&self, target: C64) -> Option<f64> {
        self.curve1
            .anchors
            .iter()
            .find(|(_, p)| (*p - target).norm() < ON_CURVE_TOL)
            .map(|&(s, _)| s)
    }

    pub fn to_json(&self) -> String {
        let doc = SceneJson {
            curve1: table(&self.curve1),
            curve2: table(&self.curve2),
            anchors: AnchorsJson {
                curve1: self.curve1.anchors.iter().map(|&(s, p)| (s, [p.re, p.im])).collect(),
                curve2: self.curve2.anchors.iter().map(|&(s, p)| (s, [p.re, p.im])).collect(),
            },
        };
        serde_json::to_string_pretty(&doc).expect("scene serializes")
    }

    pub fn from_json(text: &str) -> Result<SceneGeometry, GeometryError> {
        let doc: SceneJson = serde_json::from_str(text).map_err(|e| GeometryError::Usage(e.to_string()))?;
        let mut c1 = curve_from_table(&doc.curve1)?;
        let mut c2 = curve_from_table(&doc.curve2)?;
        c1.anchors = doc.anchors.curve1.iter().map(|&(s, p)| (s, C64::new(p[0], p[1]))).collect();
        c2.anchors = doc.anchors.curve2.iter().map(|&(s, p)| (s, C64::new(p[0], p[1]))).collect();
        Ok(SceneGeometry { curve1: c1, curve2: c2, i_plus: I_PLUS, i_minus: I_MINUS })
    }
}

/// Points spread evenly over a real interval, endpoints included.
fn interval_points(iv: (f64, f64), n: usize) -> impl Iterator<Item = C64> {
    (0..=n).map(move |k| C64::new(iv.0 + (iv.1 - iv.0) * k as f64 / n as f64, 0.0))
}

fn smoothness(c: &CurveSpec) -> (f64, f64) {
    let n = c.len();
    let mut jump: f64 = 0.0;
    for k in 0..n {
        let a = &c.segments[k];
        let b = &c.segments[(k + 1) % n];
        jump = jump.max((a.end() - b.start()).norm()).max((a.deriv(1.0) - b.deriv(0.0)).norm());
    }
    let mut speed = f64::INFINITY;
    for seg in &c.segments {
        for j in 0..=64 {
            speed = speed.min(seg.deriv(j as f64 / 64.0).norm());
        }
    }
    (jump, speed)
}

/// Component labelling of the complement of both curves on a regular grid.
#[derive(Debug, Clone)]
pub struct Arrangement {
    pub origin: C64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// `None` for nodes blocked by a curve.
    pub labels: Vec<Option<u32>>,
    pub unbounded: u32,
    pub central: Option<u32>,
    pub components: u32,
}

impl Arrangement {
    pub fn compute(geom: &SceneGeometry, h: f64) -> Arrangement {
        let bb = geom.curve1.bbox().union(&geom.curve2.bbox());
        let pad = 4.0 * h;
        let origin = bb.min - C64::new(pad, pad);
        let nx = ((bb.max.re - bb.min.re + 2.0 * pad) / h).ceil() as usize + 1;
        let ny = ((bb.max.im - bb.min.im + 2.0 * pad) / h).ceil() as usize + 1;
        let mut blocked = vec![false; nx * ny];
        let radius = 0.75 * h;
        let r_nodes = (radius / h).ceil() as isize + 1;
        for curve in [&geom.curve1, &geom.curve2] {
            for cs in curve.arclength_samples(h / 4.0) {
                let gx = ((cs.z.re - origin.re) / h).round() as isize;
                let gy = ((cs.z.im - origin.im) / h).round() as isize;
                for dy in -r_nodes..=r_nodes {
                    for dx in -r_nodes..=r_nodes {
                        let (ix, iy) = (gx + dx, gy + dy);
                        if ix < 0 || iy < 0 || ix >= nx as isize || iy >= ny as isize {
                            continue;
                        }
                        let node = origin + C64::new(ix as f64 * h, iy as f64 * h);
                        if (node - cs.z).norm() <= radius {
                            blocked[iy as usize * nx + ix as usize] = true;
                        }
                    }
                }
            }
        }
        let mut labels: Vec<Option<u32>> = vec![None; nx * ny];
        let mut next = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..nx * ny {
            if blocked[start] || labels[start].is_some() {
                continue;
            }
            labels[start] = Some(next);
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                let (x, y) = (i % nx, i / nx);
                let mut visit = |j: usize| {
                    if !blocked[j] && labels[j].is_none() {
                        labels[j] = Some(next);
                        queue.push_back(j);
                    }
                };
                if x > 0 {
                    visit(i - 1);
                }
                if x + 1 < nx {
                    visit(i + 1);
                }
                if y > 0 {
                    visit(i - nx);
                }
                if y + 1 < ny {
                    visit(i + nx);
                }
            }
            next += 1;
        }
        // Node 0 is a padded corner and always free.
        let unbounded = labels[0].expect("corner node is free");
        let ox = ((-origin.re) / h).round();
        let oy = ((-origin.im) / h).round();
        let central = if ox >= 0.0 && oy >= 0.0 && (ox as usize) < nx && (oy as usize) < ny {
            labels[oy as usize * nx + ox as usize]
        } else {
            None
        };
        Arrangement { origin, h, nx, ny, labels, unbounded, central, components: next }
    }

    pub fn node(&self, ix: usize, iy: usize) -> C64 {
        self.origin + C64::new(ix as f64 * self.h, iy as f64 * self.h)
    }

    pub fn label_at(&self, ix: usize, iy: usize) -> Option<u32> {
        self.labels[iy * self.nx + ix]
    }

    /// Distance from `q` to the nearest node of the unbounded or central component,
    /// searched within `reach`.
    pub fn distance_to_outer(&self, q: C64, reach: f64) -> f64 {
        let r = (reach / self.h).ceil() as isize + 1;
        let gx = ((q.re - self.origin.re) / self.h).round() as isize;
        let gy = ((q.im - self.origin.im) / self.h).round() as isize;
        let mut best = f64::INFINITY;
        for dy in -r..=r {
            for dx in -r..=r {
                let (ix, iy) = (gx + dx, gy + dy);
                if ix < 0 || iy < 0 || ix >= self.nx as isize || iy >= self.ny as isize {
                    continue;
                }
                let (ix, iy) = (ix as usize, iy as usize);
                match self.label_at(ix, iy) {
                    Some(l) if l == self.unbounded || Some(l) == self.central => {
                        best = best.min((self.node(ix, iy) - q).norm());
                    }
                    _ => {}
                }
            }
        }
        best
    }
}

/// Runs the seven scene checks.
pub fn validate_geometry(geom: &SceneGeometry, h_grid: f64) -> Result<ValidationReport, GeometryError> {
    if !(h_grid > 0.0 && h_grid <= 0.1) {
        return Err(GeometryError::Usage(format!("hGrid must lie in (0, 0.1], got {h_grid}")));
    }
    for c in [&geom.curve1, &geom.curve2] {
        if let Some(segment) = c.degenerate_segment() {
            return Err(GeometryError::DegenerateSegment { segment });
        }
    }
    let mut checks = Vec::new();
    let mut push = |name: &str, pass: bool, value: f64| checks.push(Check { name: name.into(), pass, value });

    let (j1, s1) = smoothness(&geom.curve1);
    let (j2, s2) = smoothness(&geom.curve2);
    let jump = j1.max(j2);
    let speed = s1.min(s2);
    push("smooth_regular", jump <= JOINT_TOL && speed > MIN_SPEED, speed);

    let gap_plus = interval_points(geom.i_plus, 32).map(|p| geom.curve1.distance(p).0).fold(0.0, f64::max);
    let gap_minus = interval_points(geom.i_minus, 32).map(|p| geom.curve2.distance(p).0).fold(0.0, f64::max);
    let gap = gap_plus.max(gap_minus);
    push("intervals_on_curves", gap <= ON_CURVE_TOL, gap);

    let anchors = [C64::i(), -C64::i()];
    let through = anchors
        .iter()
        .flat_map(|&a| [geom.curve1.distance(a).0, geom.curve2.distance(a).0])
        .fold(0.0, f64::max);
    push("through_plus_minus_i", through <= ON_CURVE_TOL, through);

    let rep = intersect_curves(&geom.curve1, &geom.curve2);
    let at_anchors = |p: &C64| anchors.iter().any(|a| (p - a).norm() < ANCHOR_MATCH_TOL);
    let exact_two = !rep.overflow
        && rep.points.len() == 2
        && rep.points.iter().all(at_anchors)
        && (rep.points[0] - rep.points[1]).norm() > 1.0;
    push("intersections_exactly_pm_i", exact_two, rep.count() as f64);

    let wind = |c: &CurveSpec, q: C64| c.winding_number(q).unwrap_or(0);
    let outside = interval_points(geom.i_minus, 32).filter(|&p| wind(&geom.curve1, p) != 1).count()
        + interval_points(geom.i_plus, 32).filter(|&p| wind(&geom.curve2, p) != 1).count();
    push("intervals_inside_domains", outside == 0, outside as f64);

    let zero = C64::new(0.0, 0.0);
    let w1 = wind(&geom.curve1, zero);
    let w2 = wind(&geom.curve2, zero);
    push("origin_in_both_domains", w1 == 1 && w2 == 1, (w1 + w2) as f64);

    let arr = Arrangement::compute(geom, h_grid);
    let reach = 2.0 * h_grid;
    let mut worst: f64 = 0.0;
    if arr.central.is_some() {
        for c in [&geom.curve1, &geom.curve2] {
            for cs in c.arclength_samples(h_grid) {
                worst = worst.max(arr.distance_to_outer(cs.z, reach));
            }
        }
    } else {
        worst = f64::INFINITY;
    }
    push("arrangement_boundary", worst <= reach, worst);

    let overall = checks.iter().all(|c| c.pass);
    Ok(ValidationReport { checks, overall })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_validates() {
        let g = build_default_geometry(None).unwrap();
        let rep = validate_geometry(&g, DEFAULT_H_GRID).unwrap();
        assert!(rep.overall, "{rep}");
    }

    #[test]
    fn anchors_are_on_the_curve() {
        let g = build_default_geometry(None).unwrap();
        let s = g.anchor_param(C64::i()).unwrap();
        assert!((g.curve1.point(s) - C64::i()).norm() < 1e-9);
        for &(s, p) in &g.curve1.anchors {
            assert!((g.curve1.point(s) - p).norm() < 1e-9);
        }
    }

    #[test]
    fn symmetric_curves() {
        let g = build_default_geometry(None).unwrap();
        for k in 0..200 {
            let s = k as f64 * 9.0 / 200.0;
            assert!((g.curve2.point(s) + g.curve1.point(s)).norm() < 1e-12);
        }
    }

    #[test]
    fn identical_curves_fail_intersection_check() {
        let mut g = build_default_geometry(None).unwrap();
        g.curve2 = g.curve1.clone();
        let rep = validate_geometry(&g, 0.05).unwrap();
        assert!(!rep.check("intersections_exactly_pm_i").unwrap().pass);
        assert!(!rep.overall);
    }

    #[test]
    fn translated_geometry_loses_anchors_and_origin() {
        let g = build_default_geometry(None).unwrap().translated(C64::new(3.0, 0.0));
        let rep = validate_geometry(&g, 0.05).unwrap();
        assert!(!rep.check("through_plus_minus_i").unwrap().pass);
        assert!(!rep.check("origin_in_both_domains").unwrap().pass);
    }

    #[test]
    fn degenerate_segment_is_reported() {
        let g = build_default_geometry(None).unwrap();
        let mut table = table(&g.curve1);
        let p = table[3][0];
        let q = table[2][3];
        assert_eq!(p, q);
        table.insert(3, [p; 4]);
        let o = GeometryOverrides { curve1: table, curve2: None };
        let g = build_default_geometry(Some(&o)).unwrap();
        let err = validate_geometry(&g, 0.05).unwrap_err();
        assert_eq!(err, GeometryError::DegenerateSegment { segment: 3 });
    }

    #[test]
    fn open_override_is_rejected() {
        let o = GeometryOverrides {
            curve1: vec![[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]]],
            curve2: None,
        };
        assert!(matches!(build_default_geometry(Some(&o)), Err(GeometryError::OpenChain { .. })));
    }

    #[test]
    fn json_round_trip() {
        let g = build_default_geometry(None).unwrap();
        let back = SceneGeometry::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn winding_of_origin() {
        let g = build_default_geometry(None).unwrap();
        assert_eq!(g.curve1.winding_number(C64::new(0.0, 0.0)).unwrap(), 1);
        assert_eq!(g.curve2.winding_number(C64::new(0.0, 0.0)).unwrap(), 1);
    }
}
