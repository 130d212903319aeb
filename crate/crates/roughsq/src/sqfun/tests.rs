use super::*;
use crate::fnspace::{sample, Grid1D};
use crate::zoo::parse_function;

fn f(id: &str) -> Evaluator {
    parse_function(id).unwrap().f
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn affine_inputs_vanish() {
    let g = f("affine:a=2,b=-1");
    let p = SqParams::new(1.0, 4.0).with_resolution(8);
    // only round-off in the quotients remains; the m-form amplifies it by
    // the |m − 1|^{−2α} weight near m = 1
    for x in [-1.0, 0.3] {
        let vals = [
            s_alpha(&g, x, &p).unwrap().value,
            s_alpha_via_m(&g, x, &p).unwrap().value,
            g_alpha(&g, x, &p).unwrap().value,
            g_alpha_m(&g, x, 3.0, &p).unwrap().value,
            q_square(&g, x, &p).unwrap().value,
            s_local(&g, x, 0.5, &p).unwrap().value,
        ];
        for v in vals {
            assert!(v < 1e-5, "{vals:?}");
        }
    }
}

#[test]
fn quadratic_closed_forms() {
    let g = f("quadratic");
    let r = 3.0;
    let p = SqParams::new(1.0, r).with_resolution(8);
    for x in [0.0, 1.7] {
        let s = s_alpha(&g, x, &p).unwrap();
        assert!(rel(s.value, 2.0 * r) < 1e-6, "st {}", s.value);
        let sm = s_alpha_via_m(&g, x, &p).unwrap();
        assert!(rel(sm.value, 2.0 * r) < 1e-4, "m {}", sm.value);
        let ga = g_alpha(&g, x, &p).unwrap();
        assert!(rel(ga.value, r * 2f64.sqrt()) < 1e-8, "G {}", ga.value);
        let gm = g_alpha_m(&g, x, 2.0, &p).unwrap();
        assert!(rel(gm.value, r) < 1e-8, "𝒢 {}", gm.value);
        for delta in [0.25, 1.0, 2.5] {
            let l = s_local(&g, x, delta, &p).unwrap();
            assert!(rel(l.value, delta * 2f64.sqrt()) < 1e-8, "loc {}", l.value);
        }
    }
}

#[test]
fn majorization_examples() {
    let c = majorization_constant(1.0, 2.0).unwrap();
    assert!((c - 1.0 / 2f64.ln().sqrt()).abs() < 1e-9);
    // α = 0: A = sup ((s/2)² + 1)/s on [1, 2], attained at s = 1 with A = 5/4
    let c0 = majorization_constant(0.0, 2.0).unwrap();
    assert!((c0 - (1.25 / 2f64.ln()).sqrt()).abs() < 1e-9);
    let near = majorization_constant(0.75, 1.0 + 1e-6).unwrap();
    assert!(near.is_finite() && near > 0.0);
    assert!(majorization_constant(1.0, 1.0).is_err());
}

#[test]
fn grid_inputs_need_samples() {
    let grid = Grid1D::new(-4.0, 1.0 / 256.0, 2049).unwrap();
    let g = sample(&f("smooth_bump"), grid).unwrap();
    let p = SqParams::new(1.0, 3.0).with_resolution(8);
    assert!(matches!(s_alpha(&g, 3.0, &p), Err(Error::OutsideGrid(_))));
    let v = s_alpha(&g, 0.0, &p).unwrap();
    assert!(v.tail.is_none());
    let e = s_alpha(&f("smooth_bump"), 0.0, &p).unwrap();
    assert!(rel(v.value, e.value) < 1e-3, "{} vs {}", v.value, e.value);
}

#[test]
fn modes_agree_within_error_estimates() {
    for (id, a) in [("smooth_bump", 0.75), ("gaussian:width=0.5", 1.0), ("odd_bump", 1.25), ("cubic:a0=0,a1=0,a2=1,a3=0.3", 1.0)] {
        let g = f(id);
        let p = SqParams::new(a, 4.0).with_estimates(true, false);
        let st = s_alpha(&g, 0.3, &p).unwrap();
        let m = s_alpha_via_m(&g, 0.3, &p).unwrap();
        let tol = st.error.unwrap().max(m.error.unwrap());
        assert!((st.value - m.value).abs() <= tol, "{id}: {} vs {} (tol {tol})", st.value, m.value);
    }
}

#[test]
fn midpoint_policy_is_a_consistent_alternative() {
    let g = f("gaussian:width=0.5");
    let rings = s_alpha(&g, 0.2, &SqParams::new(0.75, 3.0)).unwrap().value;
    let grid = SqParams::new(0.75, 3.0).with_policy(DiagonalPolicy::MidpointOffset).with_resolution(32);
    let mid = s_alpha(&g, 0.2, &grid).unwrap().value;
    assert!(rel(mid, rings) < 0.02, "{mid} vs {rings}");
}

#[test]
fn second_difference_identity() {
    // 2𝒢_{α,2} = G over the same two-sided t-range
    for (id, x, a) in [("smooth_bump", 0.2, 1.0), ("bandlimited_random:seed=7", -0.4, 0.75), ("odd_bump", 1.1, 1.25), ("zygmund_mix", 0.0, 1.0)] {
        let g = f(id);
        let p = SqParams::new(a, 3.0).with_estimates(false, false);
        let gm = g_alpha_m(&g, x, 2.0, &p).unwrap().value;
        let gr = g_alpha_two_sided(&g, x, &p).unwrap().value;
        assert!(rel(2.0 * gm, gr) < 1e-8, "{id}: {} vs {gr}", 2.0 * gm);
    }
}

#[test]
fn dilation_covariance() {
    // S(g(λ·), x, R) = λ^α S(g, λx, λR)
    let lam = 2.0;
    for (id, a) in [("smooth_bump", 1.0), ("gaussian:width=0.7", 0.75), ("odd_bump", 1.25)] {
        let g = f(id);
        let gl = g.affine_transform(1.0, lam, 0.0);
        let x = 0.35;
        let p = SqParams::new(a, 2.0).with_estimates(false, false);
        let lhs = s_alpha(&gl, x, &p).unwrap().value;
        let rhs = lam.powf(a) * s_alpha(&g, lam * x, &SqParams { radius: lam * p.radius, ..p }).unwrap().value;
        assert!(rel(lhs, rhs) < 0.01, "{id}: {lhs} vs {rhs}");
    }
}

#[test]
fn translation_invariance() {
    let g = f("zygmund_mix");
    let a = 0.75;
    let shifted = g.affine_transform(1.0, 1.0, -a);
    let p = SqParams::new(1.0, 3.0).with_estimates(false, false);
    for x in [-0.5, 0.1, 0.9] {
        let u = s_alpha(&shifted, x + a, &p).unwrap().value;
        let v = s_alpha(&g, x, &p).unwrap().value;
        assert!(rel(u, v) < 1e-9, "{u} vs {v}");
    }
    // aligned grids: shifting by whole cells moves nothing
    let h = 1.0 / 128.0;
    let base = Grid1D::new(-6.0, h, 12 * 128 + 1).unwrap();
    let moved = Grid1D::new(-6.0 + 32.0 * h, h, 12 * 128 + 1).unwrap();
    let gb = sample(&g, base).unwrap();
    let gm = GridFunction::new(moved, gb.values().to_vec()).unwrap();
    let p = SqParams::new(1.0, 2.0).with_estimates(false, false).with_resolution(8);
    let u = s_alpha(&gm, 0.3 + 32.0 * h, &p).unwrap().value;
    let v = s_alpha(&gb, 0.3, &p).unwrap().value;
    assert!(rel(u, v) < 1e-9, "{u} vs {v}");
}

#[test]
fn lemma_bound_with_matched_truncation() {
    // 𝒢_{α,m} with |t| ≤ T is dominated by C_{α,m} S_α on the box R = mT
    for (id, x, m, a) in [("smooth_bump", 0.1, 1.5, 1.0), ("gaussian:width=0.4", -0.3, 3.0, 0.75), ("odd_bump", 0.8, 4.0, 1.25), ("bandlimited_random:seed=2,window=2", 0.0, 2.0, 1.0)] {
        let g = f(id);
        let t = 1.0;
        let p = SqParams::new(a, t).with_estimates(false, false);
        let gm = g_alpha_m(&g, x, m, &p).unwrap().value;
        let s = s_alpha(&g, x, &SqParams { radius: m * t, ..p }).unwrap().value;
        let c = majorization_constant(a, m).unwrap();
        assert!(gm <= c * s * 1.05, "{id}: {gm} > {c}·{s}");
    }
}

#[test]
fn tail_exponent_matches_decay() {
    let g = f("smooth_bump");
    for a in [0.75, 1.0] {
        let p = SqParams::new(a, 4.0).with_resolution(8);
        let fit = tail_fit(&g, 0.0, &p, &[4.0, 8.0, 16.0, 32.0]).unwrap();
        let e = fit.exponent.unwrap();
        assert!((e - (1.0 - 2.0 * a)).abs() < 0.1, "α = {a}: exponent {e}");
    }
}

#[test]
fn local_blows_up_only_at_the_corner() {
    let g = f("zygmund_mix");
    let p = SqParams::new(1.0, 1.0).with_resolution(4);
    let seq = |x: f64| (0..3).map(|l| s_local_level(&g, x, 0.5, &p, l).unwrap()).collect::<Vec<_>>();
    assert!(!stabilizes(&seq(0.3), BLOWUP_TOL));
    assert!(stabilizes(&seq(0.71), BLOWUP_TOL));
    assert!(s_local(&g, 0.3, 0.5, &p.with_cutoff(0.0)).is_ok());
    assert!(s_local(&g, 0.3, 0.5, &SqParams::new(0.75, 1.0)).is_err());
}

#[test]
fn stabilization_predicate() {
    assert!(stabilizes(&[1.0, 1.001, 1.0015], 0.02));
    assert!(!stabilizes(&[1.0, 1.1, 1.2], 0.02));
    assert!(!stabilizes(&[1.0, 1.0], 0.02));
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quotient_identity_holds_pointwise(x in -2.0f64..2.0, m in prop_oneof![-2.0f64..-1.01, 1.01f64..4.0], t in prop_oneof![-1.5f64..-0.01, 0.01f64..1.5]) {
            let g = f("bandlimited_random:seed=11");
            let (lhs, bracket) = quotient_forms(&g, x, m, t);
            let rhs = (m - 1.0) / m * bracket;
            let scale = bracket.abs().max(lhs.abs()).max(1.0) / t.abs().min(1.0);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale, "{} vs {}", lhs, rhs);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn local_is_monotone_in_delta(x in -1.0f64..1.0, d1 in 0.01f64..1.0, ratio in 1.0f64..3.0) {
            let g = f("gaussian:width=0.6");
            let p = SqParams::new(1.0, 1.0).with_resolution(4).with_estimates(false, false);
            let a = s_local(&g, x, d1, &p).unwrap().value;
            let b = s_local(&g, x, d1 * ratio, &p).unwrap().value;
            prop_assert!(b >= a, "{} < {}", b, a);
            let grid = p.with_policy(DiagonalPolicy::MidpointOffset);
            let a = s_local(&g, x, d1, &grid).unwrap().value;
            let b = s_local(&g, x, d1 * ratio, &grid).unwrap().value;
            prop_assert!(b >= a, "midpoint: {} < {}", b, a);
        }
    }
}
