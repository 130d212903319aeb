//! Square functions built from difference quotients D(s) = (g(x+s) − g(x))/s:
//!
//! S_α g(x)² = ∬ |D(s) − D(t)|² |s−t|^{−2α} ds dt,
//! G_α g(x)² = ∫₀^∞ |g(x+2t) − 2g(x+t) + g(x)|² t^{−1−2α} dt,
//! 𝒢_{α,m} g(x)² = ∫ |D(mt) − D(t)|² |t|^{1−2α} dt,
//! Q g(x)² = ∫_{1<|m|≤2} ∫ |(g(x+mt) − g(x+t))/((m−1)t) − D(t)|² |t|^{−1} dt dm,
//! S_loc,δ g(x)² = ∬_{|s|+|t|<δ} |D(s) − D(t)|² |s−t|^{−2} ds dt.
//!
//! Everything is truncated: |s|, |t| ≤ R for S, 0 < t ≤ R for G, |t| ≤ R
//! for 𝒢 and Q.
//!
//! Region bookkeeping for the m-parametrization: the integrand of S is
//! symmetric in (s, t), so S² = 2∬_{|s|>|t|}. On that half put s = mt with
//! |m| > 1; then ds = |t| dm and |s−t|^{−2α} = |m−1|^{−2α}|t|^{−2α}, so
//! S² = 2∫_{|m|>1} 𝒢_{α,m}² |m−1|^{−2α} dm. The box |s|, |t| ≤ R restricted
//! to |s| ≥ |t| is exactly |t| ≤ R/|m|, which is the truncation used there,
//! so both modes compute the same truncated quantity.
//!
//! Quadrature. In the st-plane the integral is taken in diagonal
//! coordinates d = s − t > 0 (times 2 by symmetry): dyadic octaves in d with
//! Gauss–Legendre nodes in ln d, an inner panel rule along the diagonal
//! direction, and below the last ring d_min the analytic remainder
//! J(d_min) d_min^{1−2α}/(3−2α), which is exact for J(d) ∝ d², the behaviour
//! of any C¹ quotient. The m-parametrization uses the same octave rule in
//! m − 1 toward m = 1 and a K/m² tail beyond |m| = M_max. S_loc is written
//! as ∫₀^δ Φ(λ) dλ over diamond shells |s| + |t| = λ, with Φ tabulated at
//! fixed nodes and integrated piecewise linearly, so it is nondecreasing in
//! δ by construction.

mod quad;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnspace::{Evaluator, GridFunction};
use crate::numerics::{linear_fit, scan_max};
use quad::{grade_toward, integrate, log_octaves, panels, uniform_parallel, Zone};

pub const DEFAULT_RINGS: u32 = 12;
/// Rings added by each refinement level (the diagonal reach shrinks 16×).
pub const RINGS_PER_LEVEL: u32 = 4;
/// Relative change below which a refinement sequence counts as stable.
pub const BLOWUP_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalPolicy {
    /// Tensor grid with s and t offset by half a cell, so s ≠ t at every node.
    MidpointOffset,
    /// Dyadic rings in |s − t| down to 2^{−rings}, then an analytic remainder.
    DyadicRings { rings: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    StPlane,
    MParametrized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqParams {
    pub alpha: f64,
    /// truncation radius R
    pub radius: f64,
    pub policy: DiagonalPolicy,
    /// inner panels per unit length at the base level
    pub resolution: usize,
    pub mode: Mode,
    /// If positive, pairs with |s − t| < cutoff are excluded and no diagonal
    /// remainder is added (st-plane and S_loc only).
    pub diagonal_cutoff: f64,
    /// Also evaluate at doubled resolution and report the difference.
    pub error_estimate: bool,
    /// Also evaluate with radius 2R and report the difference.
    pub tail_indicator: bool,
}

impl Default for SqParams {
    fn default() -> Self {
        SqParams {
            alpha: 1.0,
            radius: 8.0,
            policy: DiagonalPolicy::DyadicRings { rings: DEFAULT_RINGS },
            resolution: 16,
            mode: Mode::StPlane,
            diagonal_cutoff: 0.0,
            error_estimate: true,
            tail_indicator: true,
        }
    }
}

impl SqParams {
    pub fn new(alpha: f64, radius: f64) -> Self {
        SqParams { alpha, radius, ..Default::default() }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_policy(mut self, policy: DiagonalPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.diagonal_cutoff = cutoff;
        self
    }

    pub fn with_estimates(mut self, error: bool, tail: bool) -> Self {
        self.error_estimate = error;
        self.tail_indicator = tail;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Param(format!("truncation radius must be positive, got {}", self.radius)));
        }
        if self.resolution < 4 {
            return Err(Error::Param(format!("resolution must be at least 4, got {}", self.resolution)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Param(format!("α must be finite, got {}", self.alpha)));
        }
        if !(self.diagonal_cutoff >= 0.0 && self.diagonal_cutoff.is_finite()) {
            return Err(Error::Param(format!("diagonal cutoff must be ≥ 0, got {}", self.diagonal_cutoff)));
        }
        if let DiagonalPolicy::DyadicRings { rings } = self.policy {
            if rings == 0 || rings > 40 {
                return Err(Error::Param(format!("ring count must be in 1..=40, got {rings}")));
            }
        }
        Ok(())
    }
}

/// A truncated square-function value with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqValue {
    pub value: f64,
    /// |v(2·res) − v(res)|; `value` is the finer of the two
    pub error: Option<f64>,
    /// |v(2R) − v(R)|, absent when not requested or when a grid input does
    /// not reach 2R
    pub tail: Option<f64>,
}

/// Input of the square functions.
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Eval(&'a Evaluator),
    /// sampled input, linearly interpolated between nodes
    Grid(&'a GridFunction),
}

impl<'a> From<&'a Evaluator> for Source<'a> {
    fn from(e: &'a Evaluator) -> Self {
        Source::Eval(e)
    }
}

impl<'a> From<&'a GridFunction> for Source<'a> {
    fn from(g: &'a GridFunction) -> Self {
        Source::Grid(g)
    }
}

impl Source<'_> {
    fn value(&self, x: f64) -> f64 {
        match self {
            Source::Eval(e) => e.eval(x),
            Source::Grid(g) => g.interp(x).unwrap_or(f64::NAN),
        }
    }

    fn require(&self, lo: f64, hi: f64) -> Result<()> {
        match self {
            Source::Eval(_) => Ok(()),
            Source::Grid(g) => {
                let (a, b) = (g.grid().origin(), g.grid().last());
                let slack = 1e-9 * g.grid().spacing();
                if lo < a - slack {
                    Err(Error::OutsideGrid(lo))
                } else if hi > b + slack {
                    Err(Error::OutsideGrid(hi))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn kinks(&self) -> &[f64] {
        match self {
            Source::Eval(e) => e.kinks(),
            Source::Grid(_) => &[],
        }
    }

    fn active(&self) -> Option<(f64, f64)> {
        match self {
            Source::Eval(e) => e.active(),
            Source::Grid(_) => None,
        }
    }

    fn feature(&self) -> f64 {
        match self {
            Source::Eval(e) => e.feature_scale(),
            Source::Grid(_) => 1.0,
        }
    }
}

/// Quadrature parameters of one refinement level.
#[derive(Debug, Clone, Copy)]
struct Level {
    /// panel width inside the active interval
    width: f64,
    /// panel width when the input has structure everywhere
    fill: f64,
    /// outer Gauss nodes per octave
    q: usize,
    /// last ring: d_min, μ_min or λ_min
    floor: f64,
    /// geometric subdivisions toward weight singularities
    depth: u32,
    res: f64,
}

fn level(p: &SqParams, feature: f64, lvl: u32) -> Level {
    let res = p.resolution as f64 * 2f64.powi(lvl as i32);
    let rings = match p.policy {
        DiagonalPolicy::DyadicRings { rings } => rings,
        DiagonalPolicy::MidpointOffset => DEFAULT_RINGS,
    } + RINGS_PER_LEVEL * lvl;
    let f = if feature > 0.0 && feature.is_finite() { feature } else { 1.0 };
    Level {
        width: (4.0 * f).clamp(1.0 / 256.0, 1.0) / res,
        fill: (4.0 * f).clamp(1.0 / 8.0, 1.0) / res,
        q: ((res / 2.0) as usize).clamp(6, 64),
        // rings reach below the feature scale, with at most six extra rings
        // (inputs with structure at every scale never look smooth)
        floor: 0.5f64.powi(rings as i32) * (64.0 * f).clamp(2f64.powi(-6), 1.0),
        depth: 20 + 2 * lvl,
        res,
    }
}

/// The input seen from a base point x.
struct Ctx<'a> {
    src: Source<'a>,
    x: f64,
    gx: f64,
    kinks: Vec<f64>,
    active: Option<(f64, f64)>,
}

impl<'a> Ctx<'a> {
    fn new(src: Source<'a>, x: f64) -> Self {
        Ctx {
            src,
            x,
            gx: src.value(x),
            kinks: src.kinks().iter().map(|k| k - x).collect(),
            active: src.active().map(|(lo, hi)| (lo - x, hi - x)),
        }
    }

    fn g(&self, u: f64) -> f64 {
        self.src.value(self.x + u)
    }

    fn dq(&self, u: f64) -> f64 {
        (self.g(u) - self.gx) / u
    }

    /// Breakpoints and zones, in the integration variable v, of g evaluated
    /// at x + c·v + shift.
    fn structure(&self, c: f64, shift: f64, width: f64, pts: &mut Vec<f64>, zones: &mut Vec<Zone>) {
        pts.push(-shift / c);
        pts.extend(self.kinks.iter().map(|k| (k - shift) / c));
        if let Some((lo, hi)) = self.active {
            let (a, b) = ((lo - shift) / c, (hi - shift) / c);
            zones.push(Zone { lo: a.min(b), hi: a.max(b), width: width / c.abs() });
        }
    }

    fn fill(&self, w: f64) -> Option<f64> {
        self.active.is_none().then_some(w)
    }
}

fn root(sq: f64) -> f64 {
    sq.max(0.0).sqrt()
}

/// Runs `f(level, radius)` at the requested levels and radii.
fn estimate(x: f64, p: &SqParams, tail_ok: bool, f: impl Fn(u32, f64) -> f64) -> Result<SqValue> {
    let coarse = f(0, p.radius);
    let (value, error, top) = if p.error_estimate {
        let fine = f(1, p.radius);
        (fine, Some((fine - coarse).abs()), 1)
    } else {
        (coarse, None, 0)
    };
    if !value.is_finite() {
        return Err(Error::NonFinite { x, value });
    }
    let tail = (p.tail_indicator && tail_ok).then(|| (f(top, 2.0 * p.radius) - value).abs());
    Ok(SqValue { value, error, tail })
}

fn start<'a>(g: Source<'a>, x: f64, p: &SqParams, span: f64) -> Result<(Ctx<'a>, bool)> {
    p.validate()?;
    if !x.is_finite() {
        return Err(Error::Param(format!("evaluation point {x} is not finite")));
    }
    g.require(x - span, x + span)?;
    let tail_ok = g.require(x - 2.0 * span, x + 2.0 * span).is_ok();
    Ok((Ctx::new(g, x), tail_ok))
}

// ---------------------------------------------------------------- S_α

/// J(d) = ∫ |D(u+d) − D(u)|² du over u ∈ [−R, R−d].
fn pair_integral(c: &Ctx, lv: &Level, r: f64, d: f64) -> f64 {
    let (mut pts, mut zones) = (Vec::new(), Vec::new());
    c.structure(1.0, 0.0, lv.width, &mut pts, &mut zones);
    c.structure(1.0, d, lv.width, &mut pts, &mut zones);
    let ps = panels(-r, r - d, &pts, &zones, c.fill(lv.fill), lv.width);
    integrate(&ps, |u| {
        let v = c.dq(u + d) - c.dq(u);
        v * v
    })
}

fn st_rings(c: &Ctx, p: &SqParams, lv: &Level, r: f64) -> f64 {
    let a = p.alpha;
    let top = 2.0 * r;
    let body = |lo: f64| log_octaves(lo, top, lv.q, |d| d.powf(-2.0 * a) * pair_integral(c, lv, r, d));
    let half = if p.diagonal_cutoff > 0.0 {
        body(p.diagonal_cutoff)
    } else {
        let dmin = lv.floor.min(top / 4.0);
        // for α ≥ 3/2 the diagonal is not integrable: the value is the
        // quadrature truncated at the last ring
        let rem = if a < 1.5 { pair_integral(c, lv, r, dmin) * dmin.powf(1.0 - 2.0 * a) / (3.0 - 2.0 * a) } else { 0.0 };
        body(dmin) + rem
    };
    2.0 * half
}

fn st_midpoint(c: &Ctx, p: &SqParams, lv: &Level, r: f64) -> f64 {
    let mut n = (2.0 * r * lv.res).ceil() as usize;
    n += n % 2;
    let h = 2.0 * r / n as f64;
    let nodes = |off: f64| -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let s = -r + (i as f64 + off) * h;
                (s, c.dq(s))
            })
            .collect()
    };
    let (ss, ts) = (nodes(0.25), nodes(0.75));
    let a = p.alpha;
    let cut = p.diagonal_cutoff;
    let rows: Vec<f64> = ss
        .par_iter()
        .map(|&(s, ds)| {
            let terms: Vec<f64> = ts
                .iter()
                .map(|&(t, dt)| {
                    let gap = (s - t).abs();
                    if gap < cut {
                        0.0
                    } else {
                        (ds - dt).powi(2) * gap.powf(-2.0 * a)
                    }
                })
                .collect();
            crate::numerics::pairwise_sum(&terms)
        })
        .collect();
    crate::numerics::pairwise_sum(&rows) * h * h
}

fn st_square(c: &Ctx, p: &SqParams, lv: &Level, r: f64) -> f64 {
    match p.policy {
        DiagonalPolicy::MidpointOffset => st_midpoint(c, p, lv, r),
        DiagonalPolicy::DyadicRings { .. } => st_rings(c, p, lv, r),
    }
}

/// 𝒢_{α,m}² truncated to |t| ≤ t_max.
fn gm_square(c: &Ctx, lv: &Level, a: f64, m: f64, t_max: f64) -> f64 {
    if !(t_max > 0.0) {
        return 0.0;
    }
    let k = m.abs().max(1.0);
    let (mut pts, mut zones) = (Vec::new(), Vec::new());
    c.structure(1.0, 0.0, lv.width, &mut pts, &mut zones);
    c.structure(m, 0.0, lv.width, &mut pts, &mut zones);
    let ps = panels(-t_max, t_max, &pts, &zones, c.fill(lv.fill / k), lv.width / k);
    let ps = grade_toward(ps, 0.0, lv.depth);
    integrate(&ps, |t| {
        let v = c.dq(m * t) - c.dq(t);
        v * v * t.abs().powf(1.0 - 2.0 * a)
    })
}

fn m_max(r: f64, lv: &Level) -> f64 {
    (2f64.powi(r.log2().ceil() as i32 + 8) * lv.res / 8.0).max(4.0)
}

fn m_square(c: &Ctx, p: &SqParams, lv: &Level, r: f64) -> f64 {
    let a = p.alpha;
    let mm = m_max(r, lv);
    let pos = |m: f64| gm_square(c, lv, a, m, r / m) * (m - 1.0).powf(-2.0 * a);
    let neg = |n: f64| gm_square(c, lv, a, -n, r / n) * (n + 1.0).powf(-2.0 * a);
    let mu_min = lv.floor;
    // 𝒢_{1+μ}² ∝ μ² as μ → 0
    let rem = if a < 1.5 {
        gm_square(c, lv, a, 1.0 + mu_min, r / (1.0 + mu_min)) * mu_min.powf(1.0 - 2.0 * a) / (3.0 - 2.0 * a)
    } else {
        0.0
    };
    let near = log_octaves(mu_min, mm - 1.0, lv.q, |mu| pos(1.0 + mu));
    let far = log_octaves(1.0, mm, lv.q, neg);
    // both integrands decay like K/m² beyond M_max
    let tails = mm * (pos(mm) + neg(mm));
    2.0 * (rem + near + far + tails)
}

fn check_cutoff_mode(p: &SqParams) -> Result<()> {
    if p.diagonal_cutoff > 0.0 {
        return Err(Error::Param("the diagonal cutoff is only defined in the st-plane mode".into()));
    }
    Ok(())
}

/// Truncated S_α g(x), in the mode selected by `p.mode`.
pub fn s_alpha<'a>(g: impl Into<Source<'a>>, x: f64, p: &SqParams) -> Result<SqValue> {
    let (c, tail_ok) = start(g.into(), x, p, p.radius)?;
    if p.mode == Mode::MParametrized {
        check_cutoff_mode(p)?;
    }
    let feature = c.src.feature();
    estimate(x, p, tail_ok, |l, r| {
        let lv = level(p, feature, l);
        root(match p.mode {
            Mode::StPlane => st_square(&c, p, &lv, r),
            Mode::MParametrized => m_square(&c, p, &lv, r),
        })
    })
}

/// Truncated S_α g(x) through the m-parametrization (whatever `p.mode` says).
pub fn s_alpha_via_m<'a>(g: impl Into<Source<'a>>, x: f64, p: &SqParams) -> Result<SqValue> {
    s_alpha(g, x, &p.with_mode(Mode::MParametrized))
}

/// Raw quadrature of S_α at refinement level `level_index` (each level
/// doubles the resolution and adds `RINGS_PER_LEVEL` rings), without
/// diagnostics.
pub fn s_alpha_level<'a>(g: impl Into<Source<'a>>, x: f64, p: &SqParams, level_index: u32) -> Result<f64> {
    let (c, _) = start(g.into(), x, p, p.radius)?;
    let lv = level(p, c.src.feature(), level_index);
    let v = root(match p.mode {
        Mode::StPlane => st_square(&c, p, &lv, p.radius),
        Mode::MParametrized => {
            check_cutoff_mode(p)?;
            m_square(&c, p, &lv, p.radius)
        }
    });
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { x, value: v })
    }
}

// ---------------------------------------------------------------- G, 𝒢, Q

fn second_difference_square(c: &Ctx, lv: &Level, a: f64, lo: f64, hi: f64) -> f64 {
    let (mut pts, mut zones) = (Vec::new(), Vec::new());
    c.structure(1.0, 0.0, lv.width, &mut pts, &mut zones);
    c.structure(2.0, 0.0, lv.width, &mut pts, &mut zones);
    let ps = panels(lo, hi, &pts, &zones, c.fill(lv.fill / 2.0), lv.width / 2.0);
    let ps = grade_toward(ps, 0.0, lv.depth);
    integrate(&ps, |t| {
        let v = c.g(2.0 * t) - 2.0 * c.g(t) + c.gx;
        v * v * t.abs().powf(-1.0 - 2.0 * a)
    })
}

/// One-sided Marcinkiewicz function G_α, t ∈ (0, R].
pub fn g_alpha<'a>(g: impl Into<Source<'a>>, x: f64, p: &SqParams) -> Result<SqValue> {
    let src = g.into();
    p.validate()?;
    src.require(x, x + 2.0 * p.radius)?;
    let tail_ok = src.require(x, x + 4.0 * p.radius).is_ok();
    let c = Ctx::new(src, x);
    estimate(x, p, tail_ok, |l, r| {
        let lv = level(p, src.feature(), l);
        root(second_difference_square(&c, &lv, p.alpha, 0.0, r))
    })
}

/// Two-sided variant G_ℝ, t ∈ [−R, R]; 2𝒢_{α,2} = G_ℝ exactly.
pub fn g_alpha_two_sided<'a>(g: impl Into<Source<'a>>, x: f64, p: &SqParams) -> Result<SqValue> {
    let (c, tail_ok) = start(g.into(), x, p, 2.0 * p.radius)?;
    estimate(x, p, tail_ok, |l, r| {
        let lv = level(p, c.src.feature(), l);
        root(second_difference_square(&c, &lv, p.alpha, -r, r))
    })
}

/// 𝒢_{α,m} g(x) truncated to |t| ≤ R.
pub fn g_alpha_m<'a>(g: impl Into<Source<'a>>, x: f64, m: f64, p: &SqParams) -> Result<SqValue> {
    if m == 0.0 || m == 1.0 || !m.is_finite() {
        return Err(Error::Param(format!("m must be finite and differ from 0 and 1, got {m}")));
    }
    let (c, tail_ok) = start(g.into(), x, p, p.radius * m.abs().max(1.0))?;
    estimate(x, p, tail_ok, |l, r| {
        let lv = level(p, c.src.feature(), l);
        root(gm_square(&c, &lv, p.alpha, m, r))
    })
}

fn q_inner(c: &Ctx, lv: &Level, m: f64, r: f64) -> f64 {
    let k = m.abs().max(1.0);
    let (mut pts, mut zones) = (Vec::new(), Vec::new());
    c.structure(1.0, 0.0, lv.width, &mut pts, &mut zones);
    c.structure(m, 0.0, lv.width, &mut pts, &mut zones);
    let ps = panels(-r, r, &pts, &zones, c.fill(lv.fill / k), lv.width / k);
    let ps = grade_toward(ps, 0.0, lv.depth);
    integrate(&ps, |t| {
        let gt = c.g(t);
        let v = (c.g(m * t) - gt) / ((m - 1.0) * t) - (gt - c.gx) / t;
        v * v / t.abs()
    })
}

fn q_sq(c: &Ctx, lv: &Level, r: f64) -> f64 {
    let mu_min = lv.floor;
    // the m-integrand stays bounded as m → 1
    let rem = q_inner(c, lv, 1.0 + mu_min, r) * mu_min;
    let near = log_octaves(mu_min, 1.0, lv.q, |mu| q_inner(c, lv, 1.0 + mu, r));
    let neg = uniform_parallel(1.0, 2.0, 4, lv.q, |n| q_inner(c, lv, -n, r));
    rem + near + neg
}

/// Q g(x) with |t| ≤ R.
pub fn q_square<'a>(g: impl Into<Source<'a>>, x: f64, p: &SqParams) -> Result<SqValue> {
    let (c, tail_ok) = start(g.into(), x, p, 2.0 * p.radius)?;
    estimate(x, p, tail_ok, |l, r| {
        let lv = level(p, c.src.feature(), l);
        root(q_sq(&c, &lv, r))
    })
}

/// The two sides of (g(x+mt)−g(x))/(mt) − (g(x+t)−g(x))/t
/// = (m−1)/m · [(g(x+mt)−g(x+t))/((m−1)t) − (g(x+t)−g(x))/t]:
/// returns (quotient difference, bracket).
pub fn quotient_forms(g: &Evaluator, x: f64, m: f64, t: f64) -> (f64, f64) {
    let (g0, g1, gm) = (g.eval(x), g.eval(x + t), g.eval(x + m * t));
    let lhs = (gm - g0) / (m * t) - (g1 - g0) / t;
    let bracket = (gm - g1) / ((m - 1.0) * t) - (g1 - g0) / t;
    (lhs, bracket)
}

// ---------------------------------------------------------------- S_loc

/// Integral over σ of one diamond edge, s = s0 + s1σ, t = t0 + t1σ, with the
/// weight |s − t|^{−2α} written as λ^{−2α} w(σ).
#[allow(clippy::too_many_arguments)]
fn edge(c: &Ctx, lv: &Level, lam: f64, (s0, s1): (f64, f64), (t0, t1): (f64, f64), hi: f64, diagonal: bool, a: f64) -> f64 {
    if !(hi > 0.0) {
        return 0.0;
    }
    let (mut pts, mut zones) = (Vec::new(), Vec::new());
    c.structure(s1, s0, lv.width, &mut pts, &mut zones);
    c.structure(t1, t0, lv.width, &mut pts, &mut zones);
    for z in zones.iter_mut() {
        z.width = z.width.min(0.25);
    }
    let fill = c.fill((lv.fill / lam).min(0.25));
    let ps = panels(0.0, hi, &pts, &zones, fill, (lv.width / lam).min(0.25));
    let f = |sig: f64| {
        let v = c.dq(s0 + s1 * sig) - c.dq(t0 + t1 * sig);
        let w = if diagonal { (1.0 - 2.0 * sig).abs().powf(-2.0 * a) } else { 1.0 };
        v * v * w
    };
    if diagonal && hi == 0.5 {
        // rings in |s − t| = 2λρ, ρ = 1/2 − σ, down to the level floor
        let last = ps.last().map_or(0.5, |p| p.1 - p.0);
        let depth = (last * 2.0 * lam / lv.floor).log2().ceil().clamp(0.0, 60.0) as u32;
        let ps = grade_toward(ps, 0.5, depth);
        // integrand ~ ρ^{2−2α} below the dropped piece
        let rho = last * 0.5f64.powi(depth as i32);
        integrate(&ps, f) + f(0.5 - rho) * rho / (3.0 - 2.0 * a)
    } else {
        integrate(&ps, f)
    }
}

/// Φ(λ): the integrand of S_loc² on the shell |s| + |t| = λ (ds dt = λ dλ dσ
/// on each edge of the unit diamond; edges 1 and 3 are folded at the
/// diagonal, edges 2 and 4 are mirror images under s ↔ t).
fn shell(c: &Ctx, lv: &Level, a: f64, lam: f64, cut: f64) -> f64 {
    let hi = if cut > 0.0 { 0.5 - cut / (2.0 * lam) } else { 0.5 };
    let e1 = edge(c, lv, lam, (lam, -lam), (0.0, lam), hi, true, a);
    let e3 = edge(c, lv, lam, (-lam, lam), (0.0, -lam), hi, true, a);
    let e2 = if lam >= cut { edge(c, lv, lam, (0.0, -lam), (lam, -lam), 1.0, false, a) } else { 0.0 };
    2.0 * lam.powf(1.0 - 2.0 * a) * (e1 + e3 + e2)
}

fn local_rings(c: &Ctx, lv: &Level, a: f64, delta: f64, cut: f64) -> f64 {
    let per_octave = 2 * lv.q;
    let lmin = lv.floor;
    let mut nodes = Vec::new();
    let mut base = lmin;
    'outer: loop {
        for k in 0..per_octave {
            let l = base * (1.0 + k as f64 / per_octave as f64);
            nodes.push(l);
            if l >= delta {
                break 'outer;
            }
        }
        base *= 2.0;
    }
    let phi: Vec<f64> = nodes.par_iter().map(|&l| shell(c, lv, a, l, cut)).collect();
    // Φ(λ) ∝ λ^{3−2α} below λ_min
    let e = 4.0 - 2.0 * a;
    let rem = |d: f64| phi[0] * lmin * (d / lmin).powf(e) / e;
    if delta <= lmin {
        return rem(delta);
    }
    let mut total = if cut > 0.0 { 0.0 } else { rem(lmin) };
    for i in 0..nodes.len() - 1 {
        let (l0, l1, p0, p1) = (nodes[i], nodes[i + 1], phi[i], phi[i + 1]);
        let full = 0.5 * (l1 - l0) * (p0 + p1);
        if l1 <= delta {
            total += full;
        } else {
            let pd = p0 + (p1 - p0) * (delta - l0) / (l1 - l0);
            let tail = 0.5 * (l1 - delta) * (pd + p1);
            total += (full - tail).max(0.0);
            break;
        }
    }
    total
}

fn local_midpoint(c: &Ctx, lv: &Level, a: f64, delta: f64, cut: f64) -> f64 {
    let h = 1.0 / lv.res;
    let n = (delta / h).ceil() as i64 + 1;
    let mut total = 0.0;
    for i in -n..=n {
        let s = (i as f64 + 0.25) * h;
        if s.abs() >= delta {
            continue;
        }
        let ds = c.dq(s);
        for j in -n..=n {
            let t = (j as f64 + 0.75) * h;
            let gap = (s - t).abs();
            if s.abs() + t.abs() < delta && gap >= cut {
                total += (ds - c.dq(t)).powi(2) * gap.powf(-2.0 * a);
            }
        }
    }
    total * h * h
}

fn local_square(c: &Ctx, p: &SqParams, lv: &Level, delta: f64) -> f64 {
    match p.policy {
        DiagonalPolicy::MidpointOffset => local_midpoint(c, lv, p.alpha, delta, p.diagonal_cutoff),
        DiagonalPolicy::DyadicRings { .. } => local_rings(c, lv, p.alpha, delta, p.diagonal_cutoff),
    }
}

fn local_start<'a>(g: Source<'a>, x: f64, delta: f64, p: &SqParams) -> Result<Ctx<'a>> {
    p.validate()?;
    if p.alpha != 1.0 {
        return Err(Error::Param(format!("the local square function is defined for α = 1, got {}", p.alpha)));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Param(format!("δ must be positive, got {delta}")));
    }
    g.require(x - delta, x + delta)?;
    Ok(Ctx::new(g, x))
}

/// S_loc,δ g(x). `p.radius` is not used; the diamond |s| + |t| < δ is the
/// region. The tail indicator is not defined here and stays empty.
pub fn s_local<'a>(g: impl Into<Source<'a>>, x: f64, delta: f64, p: &SqParams) -> Result<SqValue> {
    let c = local_start(g.into(), x, delta, p)?;
    estimate(x, p, false, |l, _| {
        let lv = level(p, c.src.feature(), l);
        root(local_square(&c, p, &lv, delta))
    })
}

/// Raw S_loc,δ quadrature at refinement level `level_index`.
pub fn s_local_level<'a>(g: impl Into<Source<'a>>, x: f64, delta: f64, p: &SqParams, level_index: u32) -> Result<f64> {
    let c = local_start(g.into(), x, delta, p)?;
    let lv = level(p, c.src.feature(), level_index);
    Ok(root(local_square(&c, p, &lv, delta)))
}

// ---------------------------------------------------------------- helpers

/// C_{α,m} = (A_{α,m}/log m)^{1/2} with
/// A_{α,m} = sup_{1≤s≤m} ((s/m)^{2−2α} + 1) s^{−1} (s−1)^{2α}.
pub fn majorization_constant(alpha: f64, m: f64) -> Result<f64> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::Param(format!("m must exceed 1, got {m}")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Param(format!("α must be ≥ 0, got {alpha}")));
    }
    let f = |s: f64| ((s / m).powf(2.0 - 2.0 * alpha) + 1.0) / s * (s - 1.0).powf(2.0 * alpha);
    let (_, a) = scan_max(1.0, m, 256, 1e-10, f);
    Ok((a / m.ln()).sqrt())
}

/// Stabilization predicate: the last two relative changes of a refinement
/// sequence are within `tol`. Sequences shorter than three never stabilize.
pub fn stabilizes(values: &[f64], tol: f64) -> bool {
    let n = values.len();
    if n < 3 {
        return false;
    }
    values[n - 3..].windows(2).all(|w| (w[1] - w[0]).abs() <= tol * w[1].abs().max(f64::MIN_POSITIVE))
}

/// Values of S_α at growing radii and the fitted exponent of the
/// increments v(R_{i+1})² − v(R_i)² against R_i (expected 1 − 2α for
/// compactly supported inputs and α > 1/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub exponent: Option<f64>,
}

pub fn tail_fit<'a>(g: impl Into<Source<'a>>, x: f64, p: &SqParams, radii: &[f64]) -> Result<TailFit> {
    let src = g.into();
    let values = radii
        .iter()
        .map(|&r| s_alpha_level(src, x, &SqParams { radius: r, ..*p }, 0))
        .collect::<Result<Vec<f64>>>()?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..values.len().saturating_sub(1) {
        let inc = values[i + 1].powi(2) - values[i].powi(2);
        if inc > 0.0 {
            xs.push(radii[i].ln());
            ys.push(inc.ln());
        }
    }
    let exponent = (xs.len() >= 2 && xs.len() + 1 == values.len()).then(|| linear_fit(&xs, &ys)).flatten().map(|f| f.slope);
    Ok(TailFit { radii: radii.to_vec(), values, exponent })
}

#[cfg(test)]
mod tests;
