//! The simplex solver against brute-force oracles.

use hullab_core::lp::{solve_lp, LpProblem, LpStatus, Simplex};
use proptest::prelude::*;

const SUPPLY: [f64; 3] = [20.0, 30.0, 25.0];
const DEMAND: [f64; 3] = [10.0, 35.0, 30.0];
const COST: [[f64; 3]; 3] = [[8.0, 6.0, 10.0], [9.0, 12.0, 13.0], [14.0, 9.0, 16.0]];

/// Cheapest integer flow by enumerating the four free entries.
fn transport_by_enumeration() -> f64 {
    let mut best = f64::INFINITY;
    for x11 in 0..=20 {
        for x12 in 0..=(20 - x11) {
            for x21 in 0..=30 {
                for x22 in 0..=(30 - x21) {
                    let x13 = 20 - x11 - x12;
                    let x23 = 30 - x21 - x22;
                    let x31 = 10 - x11 - x21;
                    let x32 = 35 - x12 - x22;
                    let x33 = 30 - x13 - x23;
                    if x31 < 0 || x32 < 0 || x33 < 0 || x31 + x32 + x33 != 25 {
                        continue;
                    }
                    let x = [[x11, x12, x13], [x21, x22, x23], [x31, x32, x33]];
                    let cost: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| COST[i][j] * x[i][j] as f64).sum();
                    best = best.min(cost);
                }
            }
        }
    }
    best
}

#[test]
fn transportation_matches_enumeration() {
    let mut a_eq = Vec::new();
    let mut b_eq = Vec::new();
    for i in 0..3 {
        a_eq.push((0..9).map(|k| if k / 3 == i { 1.0 } else { 0.0 }).collect());
        b_eq.push(SUPPLY[i]);
    }
    for j in 0..3 {
        a_eq.push((0..9).map(|k| if k % 3 == j { 1.0 } else { 0.0 }).collect());
        b_eq.push(DEMAND[j]);
    }
    let p = LpProblem { objective: COST.iter().flatten().copied().collect(), a_eq, b_eq, ..Default::default() };
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    let oracle = transport_by_enumeration();
    assert_eq!(oracle, 735.0);
    assert!((s.objective - oracle).abs() < 1e-9, "{} vs {oracle}", s.objective);
    for i in 0..3 {
        let row: f64 = s.x[3 * i..3 * i + 3].iter().sum();
        assert!((row - SUPPLY[i]).abs() < 1e-9);
    }
}

#[test]
fn infeasible_system_is_reported() {
    // x + y <= 1 and x + y >= 3.
    let p = LpProblem {
        objective: vec![1.0, 1.0],
        a_ub: vec![vec![1.0, 1.0], vec![-1.0, -1.0]],
        b_ub: vec![1.0, -3.0],
        ..Default::default()
    };
    assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn degenerate_cycling_example_terminates() {
    // Beale's classic cycling problem for textbook pivot rules.
    let p = LpProblem {
        objective: vec![-0.75, 150.0, -0.02, 6.0],
        a_ub: vec![vec![0.25, -60.0, -0.04, 9.0], vec![0.5, -90.0, -0.02, 3.0], vec![0.0, 0.0, 1.0, 0.0]],
        b_ub: vec![0.0, 0.0, 1.0],
        ..Default::default()
    };
    let s = solve_lp(&p).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective + 0.05).abs() < 1e-12, "{}", s.objective);
}

/// Minimum of `c . x` over `[0,1]^2` cut by `a_k . x <= b_k`, by visiting
/// every pairwise intersection of the boundary lines.
fn min_2d_by_vertices(c: [f64; 2], cuts: &[([f64; 2], f64)]) -> f64 {
    let mut lines: Vec<([f64; 2], f64)> = cuts.to_vec();
    lines.extend([([1.0, 0.0], 1.0), ([-1.0, 0.0], 0.0), ([0.0, 1.0], 1.0), ([0.0, -1.0], 0.0)]);
    let feasible = |x: [f64; 2]| lines.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9);
    let mut best = f64::INFINITY;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a, b) = lines[i];
            let (d, e) = lines[j];
            let det = a[0] * d[1] - a[1] * d[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(b * d[1] - a[1] * e) / det, (a[0] * e - b * d[0]) / det];
            if feasible(x) {
                best = best.min(c[0] * x[0] + c[1] * x[1]);
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn small_lps_match_vertex_enumeration(
        c in prop::array::uniform2(-3.0f64..3.0),
        cuts in prop::collection::vec((prop::array::uniform2(-2.0f64..2.0), 0.1f64..2.0), 0..4),
    ) {
        let p = LpProblem {
            objective: c.to_vec(),
            a_ub: cuts.iter().map(|(a, _)| a.to_vec()).collect(),
            b_ub: cuts.iter().map(|(_, b)| *b).collect(),
            bounds: Some(vec![(0.0, 1.0); 2]),
            ..Default::default()
        };
        let s = solve_lp(&p).unwrap();
        prop_assert_eq!(s.status, LpStatus::Optimal);
        let oracle = min_2d_by_vertices(c, &cuts);
        prop_assert!((s.objective - oracle).abs() < 1e-8, "{} vs {}", s.objective, oracle);
    }

    #[test]
    fn appending_columns_never_raises_the_optimum(
        cols in prop::collection::vec((prop::array::uniform2(0.1f64..2.0), -2.0f64..2.0), 2..8),
    ) {
        // Feasible set {A x = b, x >= 0} with b in the positive cone of every column.
        let b = vec![1.0, 1.0];
        let mut sx = Simplex::new(2, vec![1.0, 0.0, 0.0, 1.0], b, vec![0.0, 0.0]).unwrap();
        prop_assert_eq!(sx.solve().unwrap(), LpStatus::Optimal);
        let mut last = sx.objective();
        for (a, cost) in cols {
            sx.add_column(&a, cost).unwrap();
            prop_assert_eq!(sx.solve().unwrap(), LpStatus::Optimal);
            prop_assert!(sx.objective() <= last + 1e-9);
            last = sx.objective();
        }
    }
}
