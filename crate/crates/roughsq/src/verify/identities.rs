//! Exact identities and pointwise inequalities checked on random draws: the
//! closed form of the quadratic symmetrization, the Menger bound, the
//! majorization of 𝒢_{α,m} by S_α, and the agreement of the two S_α
//! parametrizations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{timed, Comparison, ExperimentReport, Table, Verdict, VerifyConfig};
use crate::error::{Error, Result};
use crate::fnspace::Evaluator;
use crate::sqfun::{g_alpha, g_alpha_m, majorization_constant, s_alpha, s_alpha_via_m, SqParams};
use crate::symm::{commutator_kernel, graph_point, menger_curvature, sym_bruteforce, sym_closed, Triple};
use crate::zoo::parse_function;

/// Symmetrization inputs: polynomials, a bump and a Weierstrass function.
pub const SYM_FUNCTIONS: [&str; 5] = ["affine:a=2,b=-1", "quadratic", "cubic:a0=0.3,a1=-1,a2=0.5,a3=0.7", "smooth_bump", "weierstrass"];

/// Lipschitz graphs of the Menger check.
pub const MENGER_FUNCTIONS: [&str; 5] = ["smooth_bump", "gaussian:width=0.5", "abs", "zygmund_mix", "bandlimited_random:window=3"];

/// Smallest pairwise gap of a drawn triple.
pub const MIN_GAP: f64 = 1e-3;

fn draw_triple(rng: &mut ChaCha8Rng, half: f64) -> Triple {
    loop {
        let (x, y, z) = (rng.gen_range(-half..half), rng.gen_range(-half..half), rng.gen_range(-half..half));
        if let Ok(t) = Triple::new(x, y, z) {
            if t.min_gap() >= MIN_GAP {
                return t;
            }
        }
    }
}

fn entries(ids: &[&str]) -> Result<Vec<Evaluator>> {
    ids.iter().map(|id| parse_function(id).map(|e| e.f)).collect()
}

/// Sum of the magnitudes of the three brute-force products, the scale of
/// its cancellation error.
fn product_scale(a: &Evaluator, t: &Triple) -> Result<f64> {
    let Triple { x, y, z } = *t;
    let k = |p, q| commutator_kernel(a, p, q);
    Ok((k(x, y)? * k(x, z)?).abs() + (k(y, z)? * k(y, x)?).abs() + (k(z, x)? * k(z, y)?).abs())
}

/// Brute force against the closed form on `draws` random (A, triple) pairs
/// in [−2, 2]³ with pairwise gaps ≥ 10⁻³. The error is measured relative to
/// max(|closed|, Σ|products|): for affine A the closed form is exactly 0
/// and only the product scale is meaningful.
pub fn sym_identity(ids: &[&str], draws: usize, cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("sym-identity");
        cfg.record(&mut r);
        r.param("functions", ids.join(","));
        r.param("draws", draws as f64);
        r.param("min_gap", MIN_GAP);
        if ids.is_empty() || draws == 0 {
            return Err(Error::Param("the check needs functions and draws".into()));
        }
        let fs = entries(ids)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let jobs: Vec<(usize, Triple)> = (0..draws).map(|_| (rng.gen_range(0..fs.len()), draw_triple(&mut rng, 2.0))).collect();
        let rows: Vec<(usize, f64, f64, f64)> = jobs
            .par_iter()
            .map(|&(i, t)| {
                let b = sym_bruteforce(&fs[i], &t)?;
                let c = sym_closed(&fs[i], &t)?;
                let scale = c.abs().max(product_scale(&fs[i], &t)?);
                Ok((i, (b - c).abs() / scale, c, t.min_gap()))
            })
            .collect::<Result<_>>()?;
        let mut t = Table::new("per_function", &["function", "draws", "max_relative_error", "min_closed"]);
        for (i, id) in ids.iter().enumerate() {
            let mine: Vec<_> = rows.iter().filter(|row| row.0 == i).collect();
            let worst = mine.iter().map(|row| row.1).fold(0.0, f64::max);
            let low = mine.iter().map(|row| row.2).fold(f64::INFINITY, f64::min);
            t.push(vec![i as f64, mine.len() as f64, worst, low]);
            r.output(&format!("{id}.max_relative_error"), worst);
        }
        r.tables.push(t);
        let worst = rows.iter().map(|row| row.1).fold(0.0, f64::max);
        let negative = rows.iter().filter(|row| row.2 < 0.0).count();
        r.output("max_relative_error", worst);
        r.verdict(Verdict::check("max_relative_error", worst, Comparison::Le, 1e-10));
        r.verdict(Verdict::check("closed_form_negative", negative as f64, Comparison::Le, 0.0));
        Ok(r)
    })
}

/// 1/R(x,y,z) ≤ 2|Sym|^{1/2} on `draws` random triples of Lipschitz graphs,
/// with absolute slack 10⁻¹².
pub fn menger_check(draws: usize, cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("menger-bound");
        cfg.record(&mut r);
        r.param("functions", MENGER_FUNCTIONS.join(","));
        r.param("draws", draws as f64);
        let fs = entries(&MENGER_FUNCTIONS)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4d45_4e47);
        let jobs: Vec<(usize, Triple)> = (0..draws).map(|_| (rng.gen_range(0..fs.len()), draw_triple(&mut rng, 3.0))).collect();
        let excess: Vec<(f64, f64)> = jobs
            .par_iter()
            .map(|&(i, t)| {
                let a = &fs[i];
                let c = menger_curvature(&graph_point(a, t.x), &graph_point(a, t.y), &graph_point(a, t.z))?;
                let bound = 2.0 * sym_closed(a, &t)?.sqrt();
                Ok((c - bound, if bound > 0.0 { c / bound } else { 0.0 }))
            })
            .collect::<Result<_>>()?;
        let violations = excess.iter().filter(|e| e.0 > 1e-12).count();
        r.output("max_excess", excess.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max));
        r.output("max_curvature_over_bound", excess.iter().map(|e| e.1).fold(0.0, f64::max));
        r.verdict(Verdict::check("violations", violations as f64, Comparison::Le, 0.0));
        Ok(r)
    })
}

/// Inputs of the majorization and mixing checks.
const SMOOTH_INPUTS: [&str; 4] = ["smooth_bump", "gaussian:width=0.5", "odd_bump", "vanishing_moment_bump"];

/// G_{α,m} ≤ C_{α,m}·S_α on `samples` random (g, x, m) per α, with
/// 𝒢_{α,m} truncated to |t| ≤ 1 and S_α to the box R = m (the box the
/// change of variables s = mt maps onto); 5% quadrature slack. Also
/// 2𝒢_{α,2} = G_α on t ∈ (0, R] after the reflection t ↦ −t.
pub fn majorization_check(alphas: &[f64], samples: usize, cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("majorization");
        cfg.record(&mut r);
        r.param("alphas", alphas.to_vec());
        r.param("samples", samples as f64);
        r.param("slack", 0.05);
        let fs = entries(&SMOOTH_INPUTS)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4d41_4a);
        let res = cfg.tier.pick(8, 8, 16);
        let mut t = Table::new("samples", &["alpha", "function", "x", "m", "g_m", "bound", "ratio"]);
        let mut worst = 0.0f64;
        let mut identity = 0.0f64;
        for &a in alphas {
            let jobs: Vec<(usize, f64, f64)> =
                (0..samples).map(|_| (rng.gen_range(0..fs.len()), rng.gen_range(-1.5..1.5), rng.gen_range(1.25..4.0))).collect();
            let rows: Vec<Vec<f64>> = jobs
                .par_iter()
                .map(|&(i, x, m)| {
                    let p = SqParams::new(a, 1.0).with_resolution(res).with_estimates(false, false);
                    let gm = g_alpha_m(&fs[i], x, m, &p)?.value;
                    let s = s_alpha(&fs[i], x, &SqParams { radius: m, ..p })?.value;
                    let bound = majorization_constant(a, m)? * s;
                    Ok(vec![a, i as f64, x, m, gm, bound, gm / bound])
                })
                .collect::<Result<_>>()?;
            for row in rows {
                worst = worst.max(row[6]);
                t.push(row);
            }
            // reflection t ↦ −t maps the two-sided 2𝒢_{α,2} onto the one-sided
            // G_α of g and of g(−·)
            for (i, f) in fs.iter().enumerate() {
                let x = 0.1 + 0.2 * i as f64;
                let p = SqParams::new(a, 2.0).with_resolution(res).with_estimates(false, false);
                let g2 = g_alpha_m(f, x, 2.0, &p)?.value;
                let reflected = f.affine_transform(1.0, -1.0, 0.0);
                let right = g_alpha(f, x, &p)?.value;
                let left = g_alpha(&reflected, -x, &p)?.value;
                let both = (right * right + left * left).sqrt();
                identity = identity.max((2.0 * g2 - both).abs() / both);
            }
        }
        r.tables.push(t);
        r.output("max_ratio", worst);
        r.output("second_difference_identity_error", identity);
        r.verdict(Verdict::check("majorization", worst, Comparison::Le, 1.05));
        r.verdict(Verdict::check("second_difference_identity", identity, Comparison::Le, 1e-8));
        Ok(r)
    })
}

/// st-plane against m-parametrized S_α on `count` seeded random smooth
/// functions; the two must agree within the sum of their error estimates.
pub fn mixing_check(count: usize, cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("mixing-identity");
        cfg.record(&mut r);
        r.param("functions", count as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4d49_58);
        // at 8 nodes per unit the st-plane doubling can stall for one level
        // on oscillatory inputs and understate its error
        let res = cfg.tier.pick(16, 16, 32);
        r.param("resolution", res as f64);
        let jobs: Vec<(u32, f64, f64)> =
            (0..count).map(|i| (rng.gen_range(0..10_000u32), rng.gen_range(-1.0..1.0), [0.75, 1.0, 1.25][i % 3])).collect();
        let rows: Vec<Vec<f64>> = jobs
            .par_iter()
            .map(|&(seed, x, a)| {
                let f = parse_function(&format!("bandlimited_random:seed={seed},window=3"))?.f;
                let p = SqParams::new(a, 4.0).with_resolution(res).with_estimates(true, false);
                let st = s_alpha(&f, x, &p)?;
                let m = s_alpha_via_m(&f, x, &p)?;
                let tol = st.error.unwrap_or(0.0) + m.error.unwrap_or(0.0);
                Ok(vec![seed as f64, x, a, st.value, m.value, tol, (st.value - m.value).abs() / tol.max(f64::MIN_POSITIVE)])
            })
            .collect::<Result<_>>()?;
        let worst = rows.iter().map(|row| row[6]).fold(0.0, f64::max);
        let rel = rows.iter().map(|row| (row[3] - row[4]).abs() / row[3]).fold(0.0, f64::max);
        let mut t = Table::new("functions", &["seed", "x", "alpha", "st_plane", "m_param", "tolerance", "difference_over_tolerance"]);
        rows.into_iter().for_each(|row| t.push(row));
        r.tables.push(t);
        r.output("max_relative_difference", rel);
        r.output("max_difference_over_tolerance", worst);
        r.verdict(Verdict::check("within_error_estimates", worst, Comparison::Le, 1.0));
        Ok(r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::Tier;

    #[test]
    fn small_identity_runs_pass() {
        let cfg = VerifyConfig::default().with_tier(Tier::Quick);
        assert!(sym_identity(&SYM_FUNCTIONS, 2000, &cfg).unwrap().passed());
        assert!(menger_check(2000, &cfg).unwrap().passed());
    }

    #[test]
    fn triples_respect_the_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(draw_triple(&mut rng, 0.01).min_gap() >= MIN_GAP);
        }
    }
}
