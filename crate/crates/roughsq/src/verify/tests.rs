use super::*;
use crate::zoo::parse_function;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn verdicts_compare_and_reject_non_finite_values() {
    assert!(Verdict::check("a", 1.0, Comparison::Le, 1.0).passed());
    assert!(!Verdict::check("a", 1.0, Comparison::Lt, 1.0).passed());
    assert!(Verdict::check("a", 2.0, Comparison::Gt, 1.0).passed());
    assert!(!Verdict::check("a", f64::NAN, Comparison::Ge, 0.0).passed());
    assert!(!Verdict::check("a", f64::INFINITY, Comparison::Ge, 0.0).passed());
    assert!(Verdict::flag("f", true).passed());
    assert!(!Verdict::inconclusive("i", 0.5, Comparison::Ge, 0.98, "low R²").passed());
    let shown = Verdict::check("band", 1.05, Comparison::Le, 1.1).to_string();
    assert!(shown.starts_with("PASS band") && shown.contains("<="), "{shown}");
}

#[test]
fn reports_pass_vacuously_and_absorb_with_prefixes() {
    let mut outer = ExperimentReport::new("outer");
    assert!(outer.passed());
    let mut inner = ExperimentReport::new("inner");
    inner.param("alpha", 1.0);
    inner.output_with_error("v", 2.0, 0.1);
    inner.verdict(Verdict::check("v_small", 2.0, Comparison::Le, 1.0));
    inner.tables.push(Table::new("t", &["x"]));
    inner.note("n");
    outer.absorb("in", inner);
    assert_eq!(outer.outputs["in.v"], 2.0);
    assert_eq!(outer.errors["in.v"], 0.1);
    assert_eq!(outer.verdicts[0].name, "in.v_small");
    assert_eq!(outer.tables[0].name, "in.t");
    assert_eq!(outer.notes[0], "in: n");
    assert!(!outer.passed());
    assert_eq!(outer.failures().count(), 1);
    assert!(outer.render().contains("overall: FAIL"));
}

#[test]
fn tables_expose_columns() {
    let mut t = Table::new("t", &["x", "y"]);
    t.push(vec![1.0, 2.0]);
    t.push(vec![3.0, 4.0]);
    assert_eq!(t.column("y").unwrap(), vec![2.0, 4.0]);
    assert!(t.column("z").is_none());
}

#[test]
fn tiers_parse_and_order() {
    assert_eq!("quick".parse::<Tier>().unwrap(), Tier::Quick);
    assert_eq!("thorough".parse::<Tier>().unwrap().to_string(), "thorough");
    assert!("fast".parse::<Tier>().is_err());
    assert!(Tier::Quick < Tier::Standard && Tier::Standard < Tier::Thorough);
    assert_eq!(Tier::Standard.pick(1, 2, 3), 2);
}

#[test]
fn spread_of_positive_values() {
    assert_eq!(spread(&[2.0, 1.0, 4.0]), 4.0);
    assert_eq!(spread(&[1.0, 0.0]), f64::INFINITY);
}

#[test]
fn criteria_are_numbered_and_found() {
    let ids: Vec<_> = criterion_ids().collect();
    assert_eq!(ids.len(), 15);
    let mut unique = ids.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), 15);
    for (i, c) in CRITERIA.iter().enumerate() {
        assert_eq!(c.number as usize, i + 1);
    }
    assert_eq!(find_criterion("7").unwrap().id, "strong-h1");
    assert_eq!(find_criterion("C12").unwrap().id, "q-equivalence");
    assert_eq!(find_criterion("menger").unwrap().number, 2);
    assert!(find_criterion("c16").is_none());
    assert!(criterion("nope", &VerifyConfig::default()).is_err());
}

#[test]
fn reports_serialize_identically_for_identical_runs() {
    let cfg = VerifyConfig::default().with_tier(Tier::Quick).with_seed(11);
    let run = || serde_json::to_string(&scaling_check(&[-3, 0, 3], Rect::default(), 1.0, cfg.seed).unwrap()).unwrap();
    assert_eq!(run(), run());
    let sym = || serde_json::to_string(&sym_identity(&SYM_FUNCTIONS, 500, &cfg).unwrap()).unwrap();
    assert_eq!(sym(), sym());
    let json = run();
    assert!(!json.contains("wall_clock"));
}

#[test]
fn weierstrass_fails_the_integral_condition_almost_everywhere() {
    let cfg = VerifyConfig::default();
    let w = parse_function("weierstrass:b=2").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<f64> = (0..50).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let hits = xs
        .iter()
        .filter(|&&x| {
            let v = stein_zygmund_test(&w.f, x, 0.5, &cfg).unwrap();
            v.bounded && !v.finite
        })
        .count();
    assert!(hits >= 45, "{hits} of 50");
}

#[test]
fn stein_zygmund_and_classifier_agree_on_smooth_inputs() {
    let cfg = VerifyConfig::default().with_tier(Tier::Quick);
    for id in ["smooth_bump", "gaussian:width=0.5"] {
        let e = parse_function(id).unwrap();
        let xs = [-1.3, -0.2, 0.45, 1.1];
        let (_, classes) = differentiability_classify(&e.f, 0.5, &xs, &cfg).unwrap();
        for c in classes {
            let sz = stein_zygmund_test(&e.f, c.x, 0.5, &cfg).unwrap();
            assert!(!sz.finite || c.differentiable, "{id} at {}", c.x);
        }
    }
}

#[test]
fn classifier_separates_the_corner() {
    let cfg = VerifyConfig::default().with_tier(Tier::Quick);
    let mix = parse_function("zygmund_mix").unwrap();
    let c = mix.f.kinks()[0];
    let (rep, classes) = differentiability_classify(&mix.f, 0.5, &[c, c - 0.4, c + 0.7], &cfg).unwrap();
    assert!(!classes[0].theorem_side() && !classes[0].differentiable);
    assert!(classes[1..].iter().all(|k| k.theorem_side() && k.differentiable));
    assert_eq!(rep.outputs["agreement"], 1.0);
}
