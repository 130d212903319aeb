//! The catalogue of runnable experiments.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roughsq::verify::{self, ExperimentReport, Rect, Scan, Tier, VerifyConfig, RATIO_FUNCTIONS, SYM_FUNCTIONS};
use roughsq::zoo::parse_function;

use crate::config::RunConfig;

type Runner = fn(&RunConfig, &VerifyConfig) -> roughsq::Result<ExperimentReport>;

pub struct Experiment {
    pub id: &'static str,
    /// Flags the experiment accepts, with their defaults.
    pub params: &'static [(&'static str, &'static str)],
    pub claim: &'static str,
    run: Runner,
}

impl Experiment {
    pub fn accepts(&self, flag: &str) -> bool {
        self.params.iter().any(|(p, _)| *p == flag)
    }

    pub fn run(&self, cfg: &RunConfig) -> Result<ExperimentReport> {
        for (flag, given) in [("alpha", cfg.alpha.is_some()), ("p", cfg.p.is_some()), ("function", cfg.function.is_some())] {
            if given && !self.accepts(flag) {
                bail!("experiment `{}` does not take --{flag}", self.id);
            }
        }
        Ok((self.run)(cfg, &cfg.verify_config())?)
    }
}

const ALL_ALPHAS: [f64; 3] = [0.75, 1.0, 1.25];

fn alphas(cfg: &RunConfig) -> Vec<f64> {
    cfg.alpha.map_or_else(|| ALL_ALPHAS.to_vec(), |a| vec![a])
}

/// Sorted by id.
pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        id: "blowup-scan",
        params: &[("alpha", "0.5"), ("function", "vanishing_moment_bump, or quadratic_cap for alpha >= 1.5")],
        claim: "truncated S_alpha grows like R^(1-2alpha) (log R at 1/2) for alpha <= 1/2 and like eps^(3-2alpha) (log 1/eps at 3/2) for alpha >= 3/2",
        run: |c, v| {
            let alpha = c.alpha.unwrap_or(0.5);
            if alpha >= 1.5 {
                let f = c.function.as_deref().unwrap_or("quadratic_cap");
                verify::blowup_scan(alpha, f, 0.0, &Scan::Cutoffs(vec![1e-1, 1e-2, 1e-3, 1e-4]), v)
            } else {
                let f = c.function.as_deref().unwrap_or("vanishing_moment_bump");
                verify::blowup_scan(alpha, f, 0.5, &Scan::Radii(vec![8.0, 64.0, 512.0]), v)
            }
        },
    },
    Experiment {
        id: "cell-bounds",
        params: &[("alpha", "0.75, 1, 1.25")],
        claim: "cell-restricted multiplier integrals stay below one constant times c_{n,l} (and the W bounds) with no trend in n or l",
        run: |c, v| verify::cell_sweep(&alphas(c), v),
    },
    Experiment {
        id: "converse-multiplier",
        params: &[("alpha", "1")],
        claim: "the multiplier averaged over R_eps has no zero on 1/4 <= |xi| <= 4 for small eps",
        run: |c, v| verify::converse_multiplier_gap(1e-2, c.alpha.unwrap_or(1.0), v),
    },
    Experiment {
        id: "diff-classify",
        params: &[("function", "weierstrass:b=2")],
        claim: "finite S_loc with bounded second quotients coincides with differentiability except on a null set",
        run: |c, v| {
            let e = parse_function(c.function.as_deref().unwrap_or("weierstrass:b=2"))?;
            let n = v.tier.pick(20, 50, 200);
            let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            Ok(verify::differentiability_classify(&e.f, 0.5, &xs, v)?.0)
        },
    },
    Experiment {
        id: "hardy-counterexample",
        params: &[("alpha", "1")],
        claim: "S_alpha f(x) >= 1/(2(x-1)) for the odd bump, so S_alpha f is not integrable while its weak L1 quasinorm stays bounded",
        run: |c, v| verify::hardy_counterexample_scan(c.alpha.unwrap_or(1.0), &[8.0, 16.0, 32.0, 64.0], v),
    },
    Experiment {
        id: "majorization",
        params: &[("alpha", "0.75, 1, 1.25")],
        claim: "G_{alpha,m} <= C_{alpha,m} S_alpha pointwise with the explicit constant, and 2 G_{alpha,2} = G_alpha",
        run: |c, v| verify::majorization_check(&alphas(c), 20, v),
    },
    Experiment {
        id: "menger-bound",
        params: &[],
        claim: "Menger curvature of graph triples is at most 2|Sym|^(1/2)",
        run: |_, v| verify::menger_check(10_000, v),
    },
    Experiment {
        id: "mixing-identity",
        params: &[],
        claim: "the st-plane and m-parametrized forms of S_alpha coincide",
        run: |_, v| verify::mixing_check(10, v),
    },
    Experiment {
        id: "open-weak-type",
        params: &[("alpha", "0.75, 1, 1.25")],
        claim: "exploratory: is ||S_alpha f||_{L^(1,inf)} bounded by ||D^alpha f||_1? (no verdict)",
        run: |c, v| verify::open_problem_scan(&alphas(c), v),
    },
    Experiment {
        id: "plancherel-constant",
        params: &[],
        claim: "||S_1 f||_2 = c ||f'||_2 with c^2 the double integral of |rho(s)-rho(t)|^2/|s-t|^2",
        run: |_, v| verify::plancherel_report(v),
    },
    Experiment {
        id: "q-equivalence",
        params: &[],
        claim: "Q f and S_1 f are comparable with one constant",
        run: |_, v| verify::q_equivalence(v),
    },
    Experiment {
        id: "scaling-lemma",
        params: &[("alpha", "1")],
        claim: "cell energies of g over 2^-k Omega equal those of the dilate g(2^-k .) over Omega",
        run: |c, v| verify::scaling_check(&[-3, 0, 3], Rect::default(), c.alpha.unwrap_or(1.0), v.seed),
    },
    Experiment {
        id: "sigma-tau-lemma",
        params: &[("alpha", "1")],
        claim: "the sigma-tau integral over a dyadic cell obeys the a^(+-1/2) b^(3/2-alpha) case bounds",
        run: |c, _| verify::sigma_tau_check(c.alpha.unwrap_or(1.0), 5.0),
    },
    Experiment {
        id: "sobolev-ratio",
        params: &[("alpha", "1"), ("p", "2"), ("function", "band over five compact inputs")],
        claim: "||S_alpha f||_p is comparable to ||D^alpha f||_p with constants depending on p and alpha only",
        run: |c, v| {
            let (alpha, p) = (c.alpha.unwrap_or(1.0), c.p.unwrap_or(2.0));
            match c.function.as_deref() {
                Some(f) => verify::sobolev_ratio(f, alpha, p, v),
                None => verify::sobolev_band(&RATIO_FUNCTIONS, alpha, p, v),
            }
        },
    },
    Experiment {
        id: "sym-identity",
        params: &[("function", "affine, quadratic, cubic, smooth_bump, weierstrass")],
        claim: "the three-term symmetrization of the commutator kernel equals the squared second divided difference",
        run: |c, v| {
            let draws = v.tier.pick(10_000, 100_000, 1_000_000);
            match c.function.as_deref() {
                Some(f) => verify::sym_identity(&[f], draws, v),
                None => verify::sym_identity(&SYM_FUNCTIONS, draws, v),
            }
        },
    },
    Experiment {
        id: "weak-type-consistency",
        params: &[("alpha", "0.75, 1, 1.25")],
        claim: "||S_alpha(D^-alpha f)||_{L^(1,inf)} / ||f||_{H1} stays in a factor-10 band over H1 inputs",
        run: |c, v| verify::weak_type_consistency(&alphas(c), v),
    },
    Experiment {
        id: "weaktype-growth",
        params: &[],
        claim: "the weak L1 ratio of S_1 f_j to ||f_j'||_1 grows like (log j)^(1/2), so S_1 is not of weak type (1,1) on W^{1,1}",
        run: |_, v| {
            let js: &[f64] = if v.tier == Tier::Thorough { &[1e2, 1e3, 1e4] } else { &[1e2, 1e3] };
            verify::weaktype_growth(js, None, v)
        },
    },
    Experiment {
        id: "zygmund-modulus",
        params: &[],
        claim: "Zygmund-class functions satisfy the weighted quotient modulus with C ||f||_{Lambda*}",
        run: |_, v| verify::zygmund_check(1000, v.seed, 1.25, v),
    },
];

pub fn find(id: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.id == id)
}

/// Text for `list`: experiments, then the acceptance criteria.
pub fn listing() -> String {
    let mut s = String::from("experiments:\n");
    for e in EXPERIMENTS {
        s.push_str(&format!("  {}\n    claim: {}\n", e.id, e.claim));
        if e.params.is_empty() {
            s.push_str("    params: none\n");
        }
        for (p, d) in e.params {
            s.push_str(&format!("    --{p} (default {d})\n"));
        }
    }
    s.push_str("criteria (run c1 .. c15, or all):\n");
    for c in verify::CRITERIA.iter() {
        s.push_str(&format!("  c{:<2} {:<22} {}\n", c.number, c.id, c.claim));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_is_sorted_and_unique() {
        let ids: Vec<_> = EXPERIMENTS.iter().map(|e| e.id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn listing_names_the_core_experiments() {
        let text = listing();
        for id in ["sobolev-ratio", "weaktype-growth", "diff-classify"] {
            assert!(text.contains(id), "{id}");
        }
        assert_eq!(text, listing());
    }
}
