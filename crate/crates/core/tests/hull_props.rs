//! Certificate properties on a coarse Y sample.

use std::sync::OnceLock;

use hullab_core::geometry::{build_default_geometry, sample_set, SetLabel, SetSample};
use hullab_core::hull::{inner_certificate, outer_certificate, verify_inner, InnerOutcome, DEFAULT_M_GON};
use hullab_core::polybasis::{make_basis, poly_eval, BasisMode};
use hullab_core::{ComplexPoint, C64};
use proptest::prelude::*;

fn y() -> &'static SetSample {
    static Y: OnceLock<SetSample> = OnceLock::new();
    Y.get_or_init(|| sample_set(&build_default_geometry(None).unwrap(), SetLabel::Y, 0.1).unwrap())
}

fn probe() -> impl Strategy<Value = ComplexPoint> {
    (0.1f64..2.0, -3.2f64..3.2, -3.0f64..3.0, -3.0f64..3.0)
        .prop_map(|(r, t, a, b)| ComplexPoint::new(C64::from_polar(r, t), C64::new(a, b)))
        .prop_filter("inside the w box", |p| p.w.norm() <= 3.0)
}

fn inner(q: &ComplexPoint, d: u32) -> InnerOutcome {
    let s = y();
    inner_certificate(q, s, &make_basis(BasisMode::Polynomial(d), Some(s)).unwrap(), 1e-9).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sample_points_are_their_own_measures(i in 0usize..3054) {
        let s = y();
        let q = s.points[i % s.len()];
        match inner(&q, 4) {
            InnerOutcome::Feasible(c) => {
                prop_assert_eq!(c.residual, 0.0);
                prop_assert_eq!(c.weights.clone(), vec![(i % s.len(), 1.0)]);
                prop_assert!(verify_inner(&c, s, 50, 1).unwrap().ok);
            }
            InnerOutcome::Infeasible(_) => prop_assert!(false, "sample point rejected"),
        }
    }

    #[test]
    fn inner_and_outer_exclude_each_other(q in probe(), d in 2u32..=3) {
        let s = y();
        let basis = make_basis(BasisMode::Polynomial(d), Some(s)).unwrap();
        let feasible = matches!(inner_certificate(&q, s, &basis, 1e-9).unwrap(), InnerOutcome::Feasible(c) if c.residual < 1e-9);
        let separated = outer_certificate(&q, s, &basis, DEFAULT_M_GON, 1e-6).unwrap().is_some_and(|c| c.margin > 1e-6);
        prop_assert!(!(feasible && separated), "{} has both certificates at degree {}", q, d);
    }

    #[test]
    fn farkas_witness_separates(q in probe()) {
        if let InnerOutcome::Infeasible(w) = inner(&q, 2) {
            prop_assert!(w.re_at_q > w.max_re_on_sample, "{} <= {}", w.re_at_q, w.max_re_on_sample);
            // The witness is a genuine polynomial: recompute Re P(q).
            let shift = w.re_at_q - poly_eval(&w.poly, &q).unwrap().re;
            let top = s_max_re(&w.poly) + shift;
            prop_assert!((top - w.max_re_on_sample).abs() <= 1e-9 * top.abs().max(1.0));
        }
    }

    #[test]
    fn separation_persists_at_higher_degree(q in probe()) {
        let s = y();
        let at = |d: u32| {
            let basis = make_basis(BasisMode::Polynomial(d), Some(s)).unwrap();
            outer_certificate(&q, s, &basis, DEFAULT_M_GON, 1e-6).unwrap().map(|c| c.margin)
        };
        if let Some(m2) = at(2) {
            let m4 = at(4);
            prop_assert!(m4.is_some_and(|m4| m4 >= m2 - 1e-6), "degree 2 margin {} lost at degree 4: {:?}", m2, m4);
        }
    }

    #[test]
    fn membership_persists_at_lower_degree(q in probe()) {
        if let InnerOutcome::Feasible(c) = inner(&q, 4) {
            if c.residual < 1e-9 {
                prop_assert!(matches!(inner(&q, 2), InnerOutcome::Feasible(_)));
            }
        }
    }
}

fn s_max_re(p: &hullab_core::polybasis::Poly) -> f64 {
    y().points.iter().map(|x| poly_eval(p, x).unwrap().re).fold(f64::NEG_INFINITY, f64::max)
}
