use super::bezier::CubicBezier;
use super::curve::CurveSpec;
use crate::C64;

/// Leaf boxes below this size are isolation boxes.
pub const ISOLATION_RADIUS: f64 = 1e-6;
/// Leaf boxes closer than this belong to the same intersection.
const MERGE_RADIUS: f64 = 1e-5;
/// Above this many leaves the curves are treated as overlapping.
const MAX_LEAVES: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionReport {
    /// One representative point per merged cluster of isolation boxes.
    pub points: Vec<C64>,
    /// Largest extent of a merged cluster.
    pub max_cluster_extent: f64,
    /// The leaf budget was exhausted: the curves share an arc.
    pub overflow: bool,
}

impl IntersectionReport {
    /// Number of isolated intersections, `usize::MAX` for overlapping curves.
    pub fn count(&self) -> usize {
        if self.overflow {
            usize::MAX
        } else {
            self.points.len()
        }
    }
}

/// Intersections of two curves by recursive subdivision with bounding-box pruning.
pub fn intersect_curves(a: &CurveSpec, b: &CurveSpec) -> IntersectionReport {
    let mut leaves = Vec::new();
    let mut overflow = false;
    'outer: for sa in &a.segments {
        for sb in &b.segments {
            recurse(sa, sb, 0, &mut leaves, &mut overflow);
            if overflow {
                break 'outer;
            }
        }
    }
    let clusters = cluster(&leaves);
    let max_cluster_extent = clusters.iter().map(|c| c.1).fold(0.0, f64::max);
    IntersectionReport { points: clusters.into_iter().map(|c| c.0).collect(), max_cluster_extent, overflow }
}

fn recurse(a: &CubicBezier, b: &CubicBezier, depth: u32, leaves: &mut Vec<C64>, overflow: &mut bool) {
    if *overflow {
        return;
    }
    let ba = a.bbox();
    let bb = b.bbox();
    if !ba.overlaps(&bb, 1e-12) {
        return;
    }
    let da = ba.diameter();
    let db = bb.diameter();
    if (da < ISOLATION_RADIUS && db < ISOLATION_RADIUS) || depth > 80 {
        leaves.push((ba.center() + bb.center()) * 0.5);
        if leaves.len() > MAX_LEAVES {
            *overflow = true;
        }
        return;
    }
    if da >= db {
        let (a0, a1) = a.split(0.5);
        recurse(&a0, b, depth + 1, leaves, overflow);
        recurse(&a1, b, depth + 1, leaves, overflow);
    } else {
        let (b0, b1) = b.split(0.5);
        recurse(a, &b0, depth + 1, leaves, overflow);
        recurse(a, &b1, depth + 1, leaves, overflow);
    }
}

/// Single-linkage clustering; returns (centroid, extent) per cluster.
fn cluster(points: &[C64]) -> Vec<(C64, f64)> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| points[i].re.total_cmp(&points[j].re));
    for x in 0..n {
        for y in x + 1..n {
            let (i, j) = (order[x], order[y]);
            if points[j].re - points[i].re > MERGE_RADIUS {
                break;
            }
            if (points[i] - points[j]).norm() < MERGE_RADIUS {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match roots.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(i),
            None => {
                roots.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let c = g.iter().map(|&i| points[i]).sum::<C64>() / g.len() as f64;
            let extent = g.iter().map(|&i| (points[i] - c).norm()).fold(0.0, f64::max);
            (c, extent)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_circles_meet_twice() {
        let a = CurveSpec::circle(C64::new(0.0, 0.0), 1.0);
        let b = CurveSpec::circle(C64::new(1.0, 0.0), 1.0);
        let rep = intersect_curves(&a, &b);
        assert_eq!(rep.count(), 2);
        for p in &rep.points {
            assert!((p.re - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn identical_curves_overflow() {
        let a = CurveSpec::circle(C64::new(0.0, 0.0), 1.0);
        let rep = intersect_curves(&a, &a);
        assert!(rep.overflow);
        assert!(rep.count() > 2);
    }

    #[test]
    fn disjoint_circles() {
        let a = CurveSpec::circle(C64::new(0.0, 0.0), 1.0);
        let b = CurveSpec::circle(C64::new(5.0, 0.0), 1.0);
        assert_eq!(intersect_curves(&a, &b).count(), 0);
    }
}
