//! Chain algebra and basin properties on random inputs.

use hullab_core::autom::{
    basin_membership, default_attracting_map, shrink_search, AutomorphismChain, BasinCaps, Direction, PrimitiveMap, ShrinkFamily,
};
use hullab_core::geometry::{build_default_geometry, sample_set, SetLabel};
use hullab_core::{ComplexPoint, C64};
use proptest::prelude::*;

fn c64(range: f64) -> impl Strategy<Value = C64> {
    (-range..range, -range..range).prop_map(|(a, b)| C64::new(a, b))
}

fn primitive() -> impl Strategy<Value = PrimitiveMap> {
    prop_oneof![
        (0.2f64..3.0, -3.2f64..3.2).prop_map(|(r, t)| PrimitiveMap::ScaleZ { lambda: C64::from_polar(r, t) }),
        (0.2f64..3.0, -3.2f64..3.2).prop_map(|(r, t)| PrimitiveMap::ScaleW { mu: C64::from_polar(r, t) }),
        prop::collection::vec((-2i32..=2, c64(1.0)), 1..4).prop_map(|coeffs| PrimitiveMap::ShearW { coeffs }),
        prop::collection::vec((0u32..=2, c64(0.15)), 1..3).prop_map(|coeffs| PrimitiveMap::TwistZ { coeffs }),
    ]
}

fn chain() -> impl Strategy<Value = AutomorphismChain> {
    prop::collection::vec(primitive(), 0..5).prop_map(|m| AutomorphismChain::new(m).unwrap())
}

/// Points with `|z|` in `[0.1, 10]` and `|w| <= 10`.
fn point() -> impl Strategy<Value = ComplexPoint> {
    (0.1f64..10.0, -3.2f64..3.2, 0.0f64..10.0, -3.2f64..3.2)
        .prop_map(|(r, t, s, u)| ComplexPoint::new(C64::from_polar(r, t), C64::from_polar(s, u)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn forward_then_inverse_is_identity(ch in chain(), p in point()) {
        let Ok(y) = ch.apply(&p, Direction::Forward) else { return Ok(()) };
        prop_assume!(y.norm() < 1e6);
        let back = ch.apply(&y, Direction::Inverse).unwrap();
        prop_assert!(back.dist(&p) <= 1e-9 * p.norm().max(1.0), "{} vs {}", back, p);
    }

    #[test]
    fn jacobian_matches_finite_differences(ch in chain(), p in point()) {
        let Ok(j) = ch.jacobian(&p) else { return Ok(()) };
        let Ok(fd) = ch.jacobian_fd(&p, 1e-6) else { return Ok(()) };
        let scale = j.iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assume!(scale < 1e4);
        let dev = (j - fd).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(dev <= 1e-5 * scale, "deviation {dev:e} at scale {scale:e}");
    }

    #[test]
    fn chain_json_round_trips(ch in chain()) {
        prop_assert_eq!(AutomorphismChain::from_json(&ch.to_json()).unwrap(), ch);
    }

    #[test]
    fn inverse_chain_inverts(ch in chain(), p in point()) {
        let Ok(y) = ch.apply(&p, Direction::Forward) else { return Ok(()) };
        prop_assume!(y.norm() < 1e6);
        let back = ch.inverse().apply(&y, Direction::Forward).unwrap();
        prop_assert!(back.dist(&p) <= 1e-9 * p.norm().max(1.0));
    }

    #[test]
    fn basin_is_invariant(re_z in 0.05f64..3.0, im_z in -2.0f64..2.0, w in c64(3.0)) {
        let (g, p) = default_attracting_map();
        let caps = BasinCaps::default();
        let q = ComplexPoint::new(C64::new(re_z, im_z), w);
        let a = basin_membership(&g, &p, &q, &caps).unwrap();
        let Ok(gq) = g.apply(&q, Direction::Forward) else { return Ok(()) };
        let b = basin_membership(&g, &p, &gq, &caps).unwrap();
        if a.is_decided() && b.is_decided() {
            prop_assert_eq!(a.is_converged(), b.is_converged(), "{:?} vs {:?}", a, b);
        }
    }
}

#[test]
fn shrink_trace_is_monotone_and_bounded() {
    let geom = build_default_geometry(None).unwrap();
    let y = sample_set(&geom, SetLabel::Y, 0.1).unwrap();
    let (_, p) = default_attracting_map();
    let family = ShrinkFamily { depth: 1, ..ShrinkFamily::default() };
    let r = shrink_search(&y, &p, 0.05, &family, 1000, 3).unwrap();
    assert!(r.radius_trace.len() <= 1000);
    assert!(r.radius_trace.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.radius <= r.baseline);
    assert_eq!(r.radius, *r.radius_trace.last().unwrap());
    // The returned chain round-trips like any other.
    let q = y.points[17];
    let back = r.psi.apply(&r.psi.apply(&q, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
    assert!(back.dist(&q) < 1e-9);
}

#[test]
fn shrink_search_is_reproducible() {
    let geom = build_default_geometry(None).unwrap();
    let y = sample_set(&geom, SetLabel::Y, 0.1).unwrap();
    let (_, p) = default_attracting_map();
    let family = ShrinkFamily { depth: 2, ..ShrinkFamily::default() };
    let a = shrink_search(&y, &p, 0.05, &family, 1200, 9).unwrap();
    let b = shrink_search(&y, &p, 0.05, &family, 1200, 9).unwrap();
    assert_eq!(a, b);
}
