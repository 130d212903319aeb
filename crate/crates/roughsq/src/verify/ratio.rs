//! Norm ratios: ‖S_α f‖_p against ‖𝒟^α f‖_p, the L² constant, and the
//! weak-type consistency scans.
//!
//! The L² constant. With ρ(u) = (e^{iu} − 1)/u one has (e^{isξ} − 1)/s =
//! ξρ(sξ), so
//! Δ_s g(x)/s − Δ_t g(x)/t = (2π)^{−1}∫ ĝ(ξ) e^{ixξ} ξ [ρ(sξ) − ρ(tξ)] dξ.
//! Plancherel in x turns ∫ S₁g(x)² dx into (2π)^{−1}∫ |ĝ(ξ)|² ξ² I(ξ) dξ
//! with I(ξ) = ∬ |ρ(sξ) − ρ(tξ)|² |s−t|^{−2} ds dt, and σ = sξ, τ = tξ
//! (ds dt = ξ^{−2} dσ dτ, |s−t|^{−2} = ξ²|σ−τ|^{−2}) shows I(ξ) does not
//! depend on ξ. Hence ‖S₁g‖₂² = c²‖g′‖₂² with
//!
//! c² = ∬ |ρ(σ) − ρ(τ)|² |σ − τ|^{−2} dσ dτ.
//!
//! [`plancherel_constant`] evaluates c² on the boxes |σ|, |τ| ≤ R in the
//! diagonal coordinates d = σ − τ > 0 (times 2), u = τ: log octaves in d
//! toward the diagonal with the remainder J(d_min)/d_min (the integrand is
//! bounded there), equal panels beyond, Gauss panels along u. The box
//! values approach the limit like R^{−κ}; κ is fitted from the increments
//! and the limit extrapolated geometrically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::multiplier::rho;
use super::{spread, timed, Comparison, ExperimentReport, Table, Tier, Verdict, VerifyConfig};
use crate::error::{Error, Result};
use crate::fnspace::{h1_norm, lp_norm, sample, weak_l1_quasinorm, Evaluator, Grid1D, GridFunction, NormSpec};
use crate::fractional::riesz_derivative;
use crate::numerics::{gauss, linear_fit, pairwise_sum};
use crate::sqfun::{s_alpha_level, SqParams, Source};
use crate::zoo::parse_function;

/// Zoo inputs of the ratio scans: compact support, 𝒟^α f computable.
pub const RATIO_FUNCTIONS: [&str; 5] =
    ["smooth_bump", "gaussian:width=0.5", "odd_bump", "vanishing_moment_bump", "bandlimited_random:window=3"];

// ---------------------------------------------------------------- L² constant

const PANEL_ORDER: usize = 8;

/// J_R(d) = ∫_{−R}^{R−d} |ρ(u+d) − ρ(u)|² du.
fn pair_energy(r: f64, d: f64, width: f64) -> f64 {
    let (a, b) = (-r, r - d);
    if !(b > a) {
        return 0.0;
    }
    let panels = ((b - a) / width).ceil() as usize;
    let rule = gauss(PANEL_ORDER);
    let w = (b - a) / panels as f64;
    let parts: Vec<f64> = (0..panels)
        .map(|i| {
            let lo = a + i as f64 * w;
            rule.integrate(lo, lo + w, |u| (rho(u + d) - rho(u)).norm_sqr())
        })
        .collect();
    pairwise_sum(&parts)
}

/// c² restricted to the box |σ|, |τ| ≤ R.
fn plancherel_box(r: f64, resolution: usize) -> f64 {
    let width = 2.0 / resolution as f64;
    let rule = gauss(PANEL_ORDER);
    let dmin = 2f64.powi(-12);
    let split = 4.0f64.min(2.0 * r);
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    let mut lo = dmin;
    while lo < split {
        let hi = (2.0 * lo).min(split);
        // Gauss in ln d
        for (v, w) in rule.on(lo.ln(), hi.ln()) {
            let d = v.exp();
            nodes.push((d, w * d));
        }
        lo = hi;
    }
    let panels = ((2.0 * r - split) / width).ceil() as usize;
    let pw = (2.0 * r - split) / panels as f64;
    for i in 0..panels {
        let a = split + i as f64 * pw;
        nodes.extend(rule.on(a, a + pw));
    }
    let terms: Vec<f64> = nodes.par_iter().map(|&(d, w)| w * pair_energy(r, d, width) / (d * d)).collect();
    let rem = pair_energy(r, dmin, width) / dmin;
    2.0 * (pairwise_sum(&terms) + rem)
}

/// Box values of c² and the extrapolated constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlancherelConstant {
    /// c (not squared)
    pub value: f64,
    pub error: f64,
    pub radii: Vec<f64>,
    /// c² on each box
    pub boxes: Vec<f64>,
    /// fitted κ in c²(∞) − c²(R) ∝ R^{−κ}
    pub decay: f64,
    pub resolution: usize,
}

/// c from boxes of the given (doubling) radii at the given resolution
/// (Gauss panels of width 2/resolution).
pub fn plancherel_constant_with(resolution: usize, radii: &[f64]) -> Result<PlancherelConstant> {
    if resolution == 0 || radii.len() < 3 {
        return Err(Error::Param("need resolution ≥ 1 and at least three radii".into()));
    }
    if radii.windows(2).any(|w| (w[1] / w[0] - 2.0).abs() > 1e-12) {
        return Err(Error::Param("radii must double".into()));
    }
    let boxes: Vec<f64> = radii.iter().map(|&r| plancherel_box(r, resolution)).collect();
    let incs: Vec<f64> = boxes.windows(2).map(|w| w[1] - w[0]).collect();
    if incs.iter().any(|&i| !(i > 0.0)) {
        return Err(Error::Fit(format!("box values are not increasing: {boxes:?}")));
    }
    let xs: Vec<f64> = radii[..incs.len()].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = incs.iter().map(|i| i.ln()).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| Error::Fit("tail fit failed".into()))?;
    if !(fit.slope < 0.0) {
        return Err(Error::Fit(format!("box increments do not decay (exponent {:.3})", fit.slope)));
    }
    // geometric sum of the remaining increments
    let q = 2f64.powf(fit.slope);
    let n = boxes.len();
    let limit = boxes[n - 1] + incs[n - 2] * q / (1.0 - q);
    // continuation with the last local ratio instead of the fitted one
    let lq = incs[n - 2] / incs[n - 3];
    let err_sq = if lq < 1.0 { (boxes[n - 1] + incs[n - 2] * lq / (1.0 - lq) - limit).abs() } else { f64::INFINITY };
    let value = limit.sqrt();
    Ok(PlancherelConstant { value, error: err_sq / (2.0 * value), radii: radii.to_vec(), boxes, decay: -fit.slope, resolution })
}

/// Radii and resolution per tier.
fn plancherel_setting(tier: Tier) -> (usize, Vec<f64>) {
    match tier {
        Tier::Quick => (1, vec![32.0, 64.0, 128.0]),
        Tier::Standard => (1, vec![64.0, 128.0, 256.0, 512.0]),
        Tier::Thorough => (2, vec![64.0, 128.0, 256.0, 512.0, 1024.0]),
    }
}

/// c = (∬|ρ(σ)−ρ(τ)|²|σ−τ|^{−2})^{1/2} at the standard setting.
pub fn plancherel_constant() -> Result<f64> {
    let (res, radii) = plancherel_setting(Tier::Standard);
    Ok(plancherel_constant_with(res, &radii)?.value)
}

/// The constant with a refinement check and the cross-check against the
/// triple integral of the quadratic symmetrization.
pub fn plancherel_report(cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("plancherel-constant");
        cfg.record(&mut r);
        let (res, radii) = plancherel_setting(cfg.tier);
        r.param("resolution", res as f64);
        r.param("radii", radii.clone());
        let c = plancherel_constant_with(res, &radii)?;
        let fine = plancherel_constant_with(2 * res, &radii)?;
        r.output_with_error("c", c.value, c.error);
        r.output("c_refined", fine.value);
        r.output("decay_exponent", c.decay);
        let mut t = Table::new("boxes", &["radius", "c_squared"]);
        for (rad, b) in c.radii.iter().zip(&c.boxes) {
            t.push(vec![*rad, *b]);
        }
        r.tables.push(t);
        let change = (fine.value - c.value).abs() / c.value;
        r.verdict(Verdict::check("refinement_change", change, Comparison::Le, 0.01));
        // ∭|Sym| = ∫ S₁²(x) dx, so the triple integral over ‖A′‖² is c²
        let bump = parse_function("smooth_bump")?;
        let sym = crate::symm::sym_l2_identity(&bump.f, 1.0, cfg.tier.pick(8, 16, 24))?;
        let ratio = sym.rhs_ratio.unwrap_or(f64::NAN);
        r.output("sym_triple_ratio", ratio);
        let rel = (ratio / (c.value * c.value) - 1.0).abs();
        r.verdict(Verdict::check("sym_identity_vs_c_squared", rel, Comparison::Le, 0.10));
        Ok(r)
    })
}

// ---------------------------------------------------------------- S_α without truncation

/// Untruncated S_α f(x) for compactly supported f, with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Untruncated {
    pub value: f64,
    /// difference between the two- and three-radius extrapolations
    pub extrapolation: f64,
}

/// S_α f(x) for f with finite support and 1/2 < α < 3/2.
///
/// Outside the support D(s) = −f(x)/s, which makes the box remainder
/// S²(∞) − S²(R) an expansion in R^{1−2α}, R^{−2α}, …; three boxes R₀,
/// 2R₀, 4R₀ eliminate the first two terms.
pub fn s_alpha_untruncated(f: &Evaluator, x: f64, alpha: f64, resolution: usize, level: u32) -> Result<Untruncated> {
    if !(alpha > 0.5 && alpha < 1.5) {
        return Err(Error::Param(format!("untruncated S_α needs 1/2 < α < 3/2, got {alpha}")));
    }
    if !f.support().is_finite() {
        return Err(Error::Param(format!("`{}` has no finite support", f.tag())));
    }
    let r0 = 2f64.powf((x.abs() + f.support() + 1.0).log2().ceil()).max(8.0);
    let base = SqParams::new(alpha, r0).with_resolution(resolution).with_estimates(false, false);
    let radii = [r0, 2.0 * r0, 4.0 * r0];
    let mut v = [0.0; 3];
    for (vi, &rad) in v.iter_mut().zip(&radii) {
        *vi = s_alpha_level(f, x, &SqParams { radius: rad, ..base }, level)?.powi(2);
    }
    let (a, b) = (1.0 - 2.0 * alpha, -2.0 * alpha);
    let pa: Vec<f64> = radii.iter().map(|r| r.powf(a)).collect();
    let pb: Vec<f64> = radii.iter().map(|r| r.powf(b)).collect();
    // v_i = L − B·R_i^a − C·R_i^b
    let (d1, d2) = (v[1] - v[0], v[2] - v[1]);
    let (a11, a12, a21, a22) = (pa[0] - pa[1], pb[0] - pb[1], pa[1] - pa[2], pb[1] - pb[2]);
    let det = a11 * a22 - a12 * a21;
    let bb = (d1 * a22 - a12 * d2) / det;
    let cc = (a11 * d2 - a21 * d1) / det;
    let three = v[2] + bb * pa[2] + cc * pb[2];
    let two = v[2] + d2 / a21 * pa[2];
    let value = three.max(0.0).sqrt();
    let extrapolation = (three.max(0.0).sqrt() - two.max(0.0).sqrt()).abs();
    if !value.is_finite() {
        return Err(Error::NonFinite { x, value });
    }
    Ok(Untruncated { value, extrapolation })
}

// ---------------------------------------------------------------- ‖S_α f‖_p

/// ‖S_α f‖_p with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SNorm {
    pub value: f64,
    pub error: f64,
    /// share of ‖S_α f‖_p^p carried by the fitted far-field tail
    pub tail_share: f64,
    /// largest relative change of S_α f(x) under one refinement level
    pub max_refinement: f64,
    /// largest relative extrapolation spread
    pub max_extrapolation: f64,
    pub nodes: usize,
}

/// x-quadrature for ∫|S_α f|^p: Gauss panels of width 1/2 on [−W, W],
/// Gauss in ln|x| on four octaves beyond, and the far field S·|x| ≈ A + B/|x|
/// fitted on the last octave and integrated in closed variables.
pub fn s_norm(f: &Evaluator, alpha: f64, p: f64, resolution: usize, order: usize) -> Result<SNorm> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidNorm(format!("need 1 < p < ∞, got {p}")));
    }
    let w = f.support() + 0.5;
    let rule = gauss(order);
    let mut core: Vec<(f64, f64)> = Vec::new();
    let panels = (2.0 * w / 0.5).ceil() as usize;
    let pw = 2.0 * w / panels as f64;
    for i in 0..panels {
        let a = -w + i as f64 * pw;
        core.extend(rule.on(a, a + pw));
    }
    const OCTAVES: i32 = 4;
    let mut far: Vec<(f64, f64, bool)> = Vec::new();
    for sign in [-1.0, 1.0] {
        for k in 0..OCTAVES {
            let (lo, hi) = (w * 2f64.powi(k), w * 2f64.powi(k + 1));
            for (v, wt) in rule.on(lo.ln(), hi.ln()) {
                let x = v.exp();
                far.push((sign * x, wt * x, k == OCTAVES - 1));
            }
        }
    }
    let xs: Vec<f64> = core.iter().map(|c| c.0).chain(far.iter().map(|c| c.0)).collect();
    let vals: Vec<Untruncated> =
        xs.par_iter().map(|&x| s_alpha_untruncated(f, x, alpha, resolution, 0)).collect::<Result<_>>()?;
    // refinement check at every eighth node
    let checks: Vec<f64> = xs
        .par_iter()
        .enumerate()
        .filter(|(i, _)| i % 8 == 3)
        .map(|(i, &x)| {
            let fine = s_alpha_untruncated(f, x, alpha, resolution, 1)?;
            Ok((fine.value - vals[i].value).abs() / vals[i].value.max(f64::MIN_POSITIVE))
        })
        .collect::<Result<_>>()?;
    let max_refinement = checks.iter().cloned().fold(0.0, f64::max);
    let max_extrapolation =
        vals.iter().map(|u| u.extrapolation / u.value.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let weights: Vec<f64> = core.iter().map(|c| c.1).chain(far.iter().map(|c| c.1)).collect();
    let body: Vec<f64> = vals.iter().zip(&weights).map(|(u, w)| w * u.value.powf(p)).collect();
    let body = pairwise_sum(&body);
    let big_l = w * 2f64.powi(OCTAVES);
    let mut tail = 0.0;
    for sign in [-1.0, 1.0] {
        let (zs, ys): (Vec<f64>, Vec<f64>) = far
            .iter()
            .enumerate()
            .filter(|(_, c)| c.2 && c.0 * sign > 0.0)
            .map(|(i, c)| (1.0 / c.0.abs(), vals[core.len() + i].value * c.0.abs()))
            .unzip();
        let fit = linear_fit(&zs, &ys).ok_or_else(|| Error::Fit("far-field fit failed".into()))?;
        let (aa, bb) = (fit.intercept, fit.slope);
        // ∫_L^∞ (A/x + B/x²)^p dx = L^{1−p}/(p−1) ∫₀¹ (A + B w^{1/(p−1)}/L)^p dw
        let e = 1.0 / (p - 1.0);
        let inner = gauss(16).integrate(0.0, 1.0, |t| (aa + bb * t.powf(e) / big_l).abs().powf(p));
        tail += big_l.powf(1.0 - p) * e * inner;
    }
    let total = body + tail;
    let value = total.powf(1.0 / p);
    let error = value * (max_refinement + max_extrapolation);
    Ok(SNorm { value, error, tail_share: tail / total, max_refinement, max_extrapolation, nodes: xs.len() })
}

/// ‖𝒟^α f‖_p on a periodic grid of period 256 and spacing 1/64, with the
/// change against period 128 as the error estimate.
pub fn riesz_norm(f: &Evaluator, alpha: f64, p: f64) -> Result<(f64, f64)> {
    let norm = |half: f64| -> Result<f64> {
        let g = sample(f, Grid1D::periodic(-half, half, 1.0 / 64.0)?)?;
        lp_norm(&riesz_derivative(&g, alpha)?, NormSpec::lp(p)?)
    };
    let big = norm(128.0)?;
    let small = norm(64.0)?;
    Ok((big, (big - small).abs()))
}

fn tier_resolution(tier: Tier) -> (usize, usize) {
    // (S_α resolution, Gauss order of the x-rule)
    tier.pick((8, 6), (8, 8), (16, 8))
}

/// r = ‖S_α f‖_p / ‖𝒟^α f‖_p for one zoo entry.
pub fn sobolev_ratio(f_id: &str, alpha: f64, p: f64, cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("sobolev-ratio");
        cfg.record(&mut r);
        r.param("function", f_id);
        r.param("alpha", alpha);
        r.param("p", p);
        if !(alpha > 0.5 && alpha < 1.5) {
            return Err(Error::Param(format!("the ratio needs 1/2 < α < 3/2, got {alpha}")));
        }
        let entry = parse_function(f_id)?;
        let (res, order) = tier_resolution(cfg.tier);
        r.param("resolution", res as f64);
        r.param("x_order", order as f64);
        let s = s_norm(&entry.f, alpha, p, res, order)?;
        let (d, d_err) = riesz_norm(&entry.f, alpha, p)?;
        let ratio = s.value / d;
        r.output_with_error("s_norm", s.value, s.error);
        r.output_with_error("riesz_norm", d, d_err);
        r.output_with_error("ratio", ratio, ratio * (s.error / s.value + d_err / d));
        r.output("tail_share", s.tail_share);
        r.output("max_refinement", s.max_refinement);
        r.output("max_extrapolation", s.max_extrapolation);
        r.output("nodes", s.nodes as f64);
        let mut v = Verdict::check("no_blowup", s.max_refinement, Comparison::Le, cfg.blowup_tol);
        if !v.passed() {
            v = v.with_note("S_α changes under refinement at some node: the value is not converged there");
        }
        r.verdict(v);
        r.verdict(Verdict::check("ratio_positive", ratio, Comparison::Gt, 0.0));
        Ok(r)
    })
}

/// Ratios over several zoo entries and their band max r / min r.
///
/// The band threshold is 1.1 at (α, p) = (1, 2), where the ratio is the
/// constant c, and 10 elsewhere. At (1, 2) each ratio is also compared with
/// the quadrature value of c (3%).
pub fn sobolev_band(ids: &[&str], alpha: f64, p: f64, cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("sobolev-ratio");
        cfg.record(&mut r);
        r.param("alpha", alpha);
        r.param("p", p);
        r.param("functions", ids.join(" "));
        let mut table = Table::new("ratios", &["index", "ratio", "s_norm", "riesz_norm"]);
        let mut ratios = Vec::new();
        for (i, id) in ids.iter().enumerate() {
            let one = sobolev_ratio(id, alpha, p, cfg)?;
            let ratio = one.outputs["ratio"];
            table.push(vec![i as f64, ratio, one.outputs["s_norm"], one.outputs["riesz_norm"]]);
            ratios.push(ratio);
            r.absorb(id, one);
        }
        r.tables.push(table);
        let band = spread(&ratios);
        r.output("band", band);
        let identity = alpha == 1.0 && p == 2.0;
        r.verdict(Verdict::check("band", band, Comparison::Le, if identity { 1.1 } else { 10.0 }));
        if identity {
            let (res, radii) = plancherel_setting(cfg.tier);
            let c = plancherel_constant_with(res, &radii)?;
            r.output_with_error("plancherel_c", c.value, c.error);
            let worst = ratios.iter().map(|x| (x / c.value - 1.0).abs()).fold(0.0, f64::max);
            r.verdict(Verdict::check("ratio_vs_plancherel", worst, Comparison::Le, 0.03));
        }
        Ok(r)
    })
}

// ---------------------------------------------------------------- weak type

/// Inputs f = g′ for compact bumps g: mean zero, H¹-normalizable.
const H1_INPUTS: [&str; 3] = ["smooth_bump", "gaussian:width=0.5", "odd_bump"];

fn derivative(id: &str) -> Result<Evaluator> {
    parse_function(id)?.df.ok_or_else(|| Error::Param(format!("`{id}` has no derivative")))
}

/// Uniform x-grid on [−l, l) and S_α sampled on it.
fn s_on_grid(src: Source<'_>, alpha: f64, l: f64, h: f64, radius: f64, res: usize) -> Result<GridFunction> {
    let grid = Grid1D::periodic(-l, l, h)?;
    let xs: Vec<f64> = grid.points().collect();
    let p = SqParams::new(alpha, radius).with_resolution(res).with_estimates(false, false);
    let vals: Vec<f64> = xs.par_iter().map(|&x| s_alpha_level(src, x, &p, 0)).collect::<Result<_>>()?;
    GridFunction::new(grid, vals)
}

/// ‖S_α(𝒟^{−α}f)‖_{L^{1,∞}} / ‖f‖_{H¹} for mean-zero bump derivatives f.
/// Consistency direction of the weak-type bound: the ratios of different
/// inputs stay within a factor-10 band for each α.
pub fn weak_type_consistency(alphas: &[f64], cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("weak-type-consistency");
        cfg.record(&mut r);
        r.param("alphas", alphas.to_vec());
        r.param("inputs", H1_INPUTS.join(" "));
        let (l, hx) = cfg.tier.pick((8.0, 0.25), (16.0, 0.125), (16.0, 0.0625));
        let radius = 32.0;
        r.param("window", l);
        r.param("x_spacing", hx);
        r.param("radius", radius);
        let mut table = Table::new("ratios", &["alpha", "input", "weak_quasinorm", "h1_norm", "ratio"]);
        for &alpha in alphas {
            let mut ratios = Vec::new();
            for (i, id) in H1_INPUTS.iter().enumerate() {
                let f = derivative(id)?;
                let g = sample(&f, Grid1D::periodic(-128.0, 128.0, 1.0 / 64.0)?)?;
                let h1 = h1_norm(&g)?;
                if let Some(w) = &h1.warning {
                    r.note(format!("{id}: {w}"));
                }
                // the inputs integrate to 0; the sampled odd_bump′ keeps a
                // quadrature residue (≈ 4e-6) in its mean mode, removed here
                let m = g.mean();
                let g0 = GridFunction::new(*g.grid(), g.values().iter().map(|v| v - m).collect())?;
                let u = riesz_derivative(&g0, -alpha)?;
                let s = s_on_grid(Source::from(&u), alpha, l, hx, radius, 8)?;
                r.output(&format!("removed_mean.a{alpha}.{id}"), m * g.grid().period());
                let wq = weak_l1_quasinorm(&s);
                let ratio = wq / h1.value;
                table.push(vec![alpha, i as f64, wq, h1.value, ratio]);
                r.output(&format!("ratio.a{alpha}.{id}"), ratio);
                ratios.push(ratio);
            }
            let band = spread(&ratios);
            r.output(&format!("band.a{alpha}"), band);
            r.verdict(Verdict::check(format!("band_alpha_{alpha}"), band, Comparison::Le, 10.0));
        }
        r.tables.push(table);
        Ok(r)
    })
}

/// Exploratory: ‖S_α f‖_{L^{1,∞}} / ‖𝒟^α f‖_{L¹} over compact inputs,
/// including a seeded random windowed one. No verdict: whether this ratio
/// is bounded is open.
pub fn open_problem_scan(alphas: &[f64], cfg: &VerifyConfig) -> Result<ExperimentReport> {
    timed(|| {
        let mut r = ExperimentReport::new("open-weak-type");
        cfg.record(&mut r);
        r.param("alphas", alphas.to_vec());
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let seed = rng.gen_range(0..1000u32) as f64;
        let random = format!("bandlimited_random:seed={seed},window=3");
        let ids = ["smooth_bump", "odd_bump", "vanishing_moment_bump", random.as_str()];
        r.param("inputs", ids.join(" "));
        let (l, hx) = cfg.tier.pick((8.0, 0.25), (16.0, 0.125), (32.0, 0.0625));
        let mut table = Table::new("ratios", &["alpha", "input", "weak_quasinorm", "riesz_l1", "ratio"]);
        for &alpha in alphas {
            for (i, id) in ids.iter().enumerate() {
                let f = parse_function(id)?.f;
                let grid = Grid1D::periodic(-l, l, hx)?;
                let xs: Vec<f64> = grid.points().collect();
                let vals: Vec<f64> = xs
                    .par_iter()
                    .map(|&x| s_alpha_untruncated(&f, x, alpha, 8, 0).map(|u| u.value))
                    .collect::<Result<_>>()?;
                let wq = weak_l1_quasinorm(&GridFunction::new(grid, vals)?);
                let g = sample(&f, Grid1D::periodic(-128.0, 128.0, 1.0 / 64.0)?)?;
                let d1 = lp_norm(&riesz_derivative(&g, alpha)?, NormSpec::lp(1.0)?)?;
                table.push(vec![alpha, i as f64, wq, d1, wq / d1]);
                r.output(&format!("ratio.a{alpha}.{i}"), wq / d1);
            }
        }
        r.tables.push(table);
        r.note("exploratory scan; no verdict is attached");
        Ok(r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pair_energy_matches_the_plancherel_oracle() {
        // ∫_ℝ |ρ(u+d) − ρ(u)|² du = 2π(2 − 2 sin d / d); the box loses O(1/R)
        for d in [0.01f64, 0.5, 3.0, 20.0] {
            let oracle = 2.0 * PI * (2.0 - 2.0 * d.sin() / d);
            let got = pair_energy(4096.0, d, 1.0);
            assert!((got - oracle).abs() < 2e-3 * oracle.max(1e-3) + 1e-3, "d = {d}: {got} vs {oracle}");
        }
    }

    #[test]
    fn constant_is_pi_sqrt_two() {
        // c² = 8π ∫₀^∞ (x − sin x)/x³ dx = 2π²
        let c = plancherel_constant_with(1, &[32.0, 64.0, 128.0]).unwrap();
        let oracle = PI * 2f64.sqrt();
        assert!((c.value - oracle).abs() < 5e-3 * oracle, "{} vs {oracle}", c.value);
        assert!(c.decay > 0.5 && c.decay < 1.5, "decay {}", c.decay);
    }

    #[test]
    fn untruncated_value_is_radius_independent() {
        let f = parse_function("smooth_bump").unwrap().f;
        let a = s_alpha_untruncated(&f, 0.3, 1.0, 8, 0).unwrap();
        // forcing larger boxes through a far point of the same function
        let g = f.affine_transform(1.0, 1.0, 0.0).with_support(9.0);
        let b = s_alpha_untruncated(&g, 0.3, 1.0, 8, 0).unwrap();
        assert!((a.value - b.value).abs() < 1e-3 * a.value, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn l2_ratio_of_a_bump_is_the_constant() {
        let f = parse_function("smooth_bump").unwrap().f;
        let s = s_norm(&f, 1.0, 2.0, 8, 8).unwrap();
        let (d, _) = riesz_norm(&f, 1.0, 2.0).unwrap();
        let oracle = PI * 2f64.sqrt();
        assert!((s.value / d / oracle - 1.0).abs() < 0.01, "ratio {} vs {oracle}", s.value / d);
    }
}
