//! Function representations, norms and seminorms, and the Hilbert transform.
//!
//! Functions live either on a uniform grid ([`GridFunction`]) or as exact
//! point rules ([`Evaluator`]). Norms are left-endpoint Riemann sums; every
//! reduction goes through [`pairwise_sum`] so results do not depend on thread
//! count.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;
use crate::spectral::{self, Parity};

/// Uniform grid x_i = x0 + i·h, i = 0..n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x0: f64,
    h: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x0: f64, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing {h} and origin {x0} must be finite, h > 0")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        Ok(Grid1D { x0, h, n })
    }

    /// Grid covering [a, b) with spacing h (b excluded, as for one period).
    pub fn periodic(a: f64, b: f64, h: f64) -> Result<Self> {
        let n = ((b - a) / h).round() as usize;
        Grid1D::new(a, h, n)
    }

    pub fn origin(&self) -> f64 {
        self.x0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn last(&self) -> f64 {
        self.point(self.n - 1)
    }

    /// Length of the period N·h.
    pub fn period(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Index of the node nearest to x, if x lies within the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let r = ((x - self.x0) / self.h).round();
        (r >= 0.0 && r < self.n as f64).then_some(r as usize)
    }
}

/// Scalar sample type of a grid function: `f64` or `Complex64`.
pub trait Sample: Copy + Default + Send + Sync + Add<Output = Self> + fmt::Debug + 'static {
    fn to_complex(self) -> Complex64;
    /// Real inputs keep the real part; used after real-preserving multipliers.
    fn from_complex(c: Complex64) -> Self;
    fn magnitude(self) -> f64;
    fn finite(self) -> bool;
    fn scaled(self, s: f64) -> Self;
    fn sub(self, o: Self) -> Self;
}

impl Sample for f64 {
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_complex(c: Complex64) -> Self {
        c.re
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn scaled(self, s: f64) -> Self {
        self * s
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
}

impl Sample for Complex64 {
    fn to_complex(self) -> Complex64 {
        self
    }
    fn from_complex(c: Complex64) -> Self {
        c
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn scaled(self, s: f64) -> Self {
        self * s
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
}

/// Uniformly sampled function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T: Sample = f64> {
    grid: Grid1D,
    values: Vec<T>,
}

impl<T: Sample> GridFunction<T> {
    pub fn new(grid: Grid1D, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.finite()) {
            return Err(Error::NonFinite { x: grid.point(i), value: values[i].magnitude() });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> T) -> Result<Self> {
        let values = grid.points().map(f).collect();
        GridFunction::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn scale(&self, c: f64) -> Self {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v.scaled(c)).collect() }
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.to_complex()).collect()
    }

    /// Grid mean (1/N)·Σ g_i.
    pub fn mean(&self) -> T {
        pairwise_sum(&self.values).scaled(1.0 / self.values.len() as f64)
    }

    /// Linear interpolation at x; x must lie in [x0, x_{N−1}].
    pub fn interp(&self, x: f64) -> Result<T> {
        let u = (x - self.grid.x0) / self.grid.h;
        let last = (self.grid.n - 1) as f64;
        if !(u >= -1e-9 && u <= last + 1e-9) {
            return Err(Error::OutsideGrid(x));
        }
        let u = u.clamp(0.0, last);
        let i = (u.floor() as usize).min(self.grid.n - 2);
        let w = u - i as f64;
        Ok(self.values[i].scaled(1.0 - w) + self.values[i + 1].scaled(w))
    }

    /// Apply a Fourier multiplier on the periodized grid.
    pub fn multiplier(&self, parity: Parity, m: impl Fn(f64) -> Complex64) -> Result<Self> {
        let out = spectral::apply(&self.to_complex(), self.grid.h, parity, m)?;
        Ok(GridFunction { grid: self.grid, values: out.into_iter().map(T::from_complex).collect() })
    }
}

/// Regularity class declared by an evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Smoothness {
    Smooth,
    Lipschitz,
    Zygmund,
    Discontinuous,
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Smoothness::Smooth => "smooth",
            Smoothness::Lipschitz => "lipschitz",
            Smoothness::Zygmund => "zygmund",
            Smoothness::Discontinuous => "discontinuous",
        };
        f.write_str(s)
    }
}

type PointMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Exact, deterministic point rule with a declared support radius.
///
/// Besides the support radius the evaluator carries hints for the
/// quadrature engine: `kinks` (points where the map is not C²),
/// `feature_scale` (the smallest length on which the map varies; panel
/// widths and the diagonal refinement follow it within fixed limits) and an
/// optional `active` interval outside of which the map is locally constant.
#[derive(Clone)]
pub struct Evaluator {
    tag: String,
    params: BTreeMap<String, f64>,
    map: PointMap,
    support: f64,
    smoothness: Smoothness,
    kinks: Vec<f64>,
    feature_scale: f64,
    active: Option<(f64, f64)>,
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evaluator")
            .field("tag", &self.tag)
            .field("params", &self.params)
            .field("support", &self.support)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl Evaluator {
    pub fn new(tag: impl Into<String>, map: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Evaluator {
            tag: tag.into(),
            params: BTreeMap::new(),
            map: Arc::new(map),
            support: f64::INFINITY,
            smoothness: Smoothness::Smooth,
            kinks: Vec::new(),
            feature_scale: 1.0,
            active: None,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = radius;
        self
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn with_feature_scale(mut self, scale: f64) -> Self {
        self.feature_scale = scale;
        self
    }

    /// Declare that the map is constant on each side of [lo, hi].
    pub fn with_active(mut self, lo: f64, hi: f64) -> Self {
        self.active = Some((lo.min(hi), lo.max(hi)));
        self
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn feature_scale(&self) -> f64 {
        self.feature_scale
    }

    /// Interval outside of which the map is locally constant: the declared
    /// one, else the support, else `None` (structure everywhere).
    pub fn active(&self) -> Option<(f64, f64)> {
        self.active.or_else(|| self.support.is_finite().then(|| (-self.support, self.support)))
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() > self.support {
            0.0
        } else {
            (self.map)(x)
        }
    }

    /// x ↦ c·f(λx + a), with support, kinks and scale carried along.
    pub fn affine_transform(&self, c: f64, lambda: f64, a: f64) -> Evaluator {
        let inner = self.clone();
        let mut out = Evaluator::new(format!("{}∘affine", self.tag), move |x| c * inner.eval(lambda * x + a));
        out.params = self.params.clone();
        out.smoothness = self.smoothness;
        out.feature_scale = self.feature_scale / lambda.abs();
        out.kinks = self.kinks.iter().map(|k| (k - a) / lambda).collect();
        out.active = self.active.map(|(lo, hi)| {
            let (p, q) = ((lo - a) / lambda, (hi - a) / lambda);
            (p.min(q), p.max(q))
        });
        out.support = if self.support.is_finite() {
            (self.support + a.abs()) / lambda.abs()
        } else {
            f64::INFINITY
        };
        out
    }
}

/// Exponent and weak flag of a (quasi)norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    p: f64,
    weak: bool,
}

impl NormSpec {
    pub fn new(p: f64, weak: bool) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::InvalidNorm(format!("p = {p} must be positive")));
        }
        if weak && p != 1.0 {
            return Err(Error::InvalidNorm(format!("weak norms only for p = 1, got {p}")));
        }
        Ok(NormSpec { p, weak })
    }

    pub fn lp(p: f64) -> Result<Self> {
        NormSpec::new(p, false)
    }

    pub fn weak_l1() -> Self {
        NormSpec { p: 1.0, weak: true }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_weak(&self) -> bool {
        self.weak
    }
}

pub fn sample(ev: &Evaluator, grid: Grid1D) -> Result<GridFunction> {
    let values: Vec<f64> = grid.points().map(|x| ev.eval(x)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { x: grid.point(i), value: values[i] });
    }
    GridFunction::new(grid, values)
}

/// Riemann-sum L^p norm (Σ|g_i|^p h)^{1/p}; p = ∞ gives max|g_i|.
pub fn lp_norm<T: Sample>(g: &GridFunction<T>, spec: NormSpec) -> Result<f64> {
    if spec.weak {
        return Err(Error::InvalidNorm("use weak_l1_quasinorm for the weak norm".into()));
    }
    let mags: Vec<f64> = g.values.iter().map(|v| v.magnitude()).collect();
    let max = mags.iter().cloned().fold(0.0, f64::max);
    if spec.p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let h = g.grid.h;
    let p = spec.p;
    if p == 1.0 {
        return Ok(pairwise_sum(&mags) * h);
    }
    // Scaling by the max keeps large exponents in range.
    let terms: Vec<f64> = mags.iter().map(|m| (m / max).powf(p)).collect();
    Ok(max * (pairwise_sum(&terms) * h).powf(1.0 / p))
}

/// sup_λ λ·meas{|g| > λ} on the grid.
///
/// With magnitudes sorted a_0 ≥ a_1 ≥ …, letting λ increase to a_i gives
/// λ·#{|g| > λ}·h → a_i·(i+1)·h, so the supremum is max_i a_i (i+1) h.
pub fn weak_l1_quasinorm(g: &GridFunction) -> f64 {
    let mut mags: Vec<f64> = g.values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let h = g.grid.h;
    mags.iter()
        .enumerate()
        .map(|(i, a)| a * (i + 1) as f64 * h)
        .fold(0.0, f64::max)
}

/// Discrete Hilbert transform: multiplier −i·sgn ξ on the periodized grid,
/// with the mean and Nyquist modes sent to zero.
pub fn hilbert_transform<T: Sample>(g: &GridFunction<T>) -> Result<GridFunction<T>> {
    g.multiplier(Parity::Odd, |xi| {
        if xi > 0.0 {
            Complex64::new(0.0, -1.0)
        } else if xi < 0.0 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// ‖g‖₁ + ‖Hg‖₁ with a boundary-mass diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct H1Norm {
    pub value: f64,
    /// max|g| over the outer sixteenth of the grid on each side, relative to max|g|.
    pub boundary_mass: f64,
    pub warning: Option<String>,
}

pub const H1_BOUNDARY_TOL: f64 = 1e-6;

pub fn h1_norm(g: &GridFunction) -> Result<H1Norm> {
    let one = NormSpec { p: 1.0, weak: false };
    let hg = hilbert_transform(g)?;
    let value = lp_norm(g, one)? + lp_norm(&hg, one)?;
    let n = g.values.len();
    let edge = (n / 16).max(1);
    let max = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge_max = g.values[..edge]
        .iter()
        .chain(&g.values[n - edge..])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary_mass = if max > 0.0 { edge_max / max } else { 0.0 };
    let warning = (boundary_mass > H1_BOUNDARY_TOL)
        .then(|| format!("boundary mass {boundary_mass:.3e} exceeds {H1_BOUNDARY_TOL:e}; periodization error likely"));
    Ok(H1Norm { value, boundary_mass, warning })
}

/// max over nodes x and grid offsets 0 < h ≤ hmax of |g(x+h) + g(x−h) − 2g(x)| / h.
pub fn zygmund_seminorm<T: Sample>(g: &GridFunction<T>, hmax: f64) -> Result<f64> {
    let len = g.grid.last() - g.grid.x0;
    if !(hmax > 0.0 && hmax <= 0.5 * len + 1e-12) {
        return Err(Error::Param(format!("hmax = {hmax} must lie in (0, {}]", 0.5 * len)));
    }
    let h = g.grid.h;
    let jmax = ((hmax / h) + 1e-9).floor() as usize;
    let v = &g.values;
    let n = v.len();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let reach = jmax.min(i).min(n - 1 - i);
            let mut m = 0.0f64;
            for j in 1..=reach {
                let second = v[i + j].sub(v[i].scaled(2.0)) + v[i - j];
                m = m.max(second.magnitude() / (j as f64 * h));
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_period(n: usize) -> Grid1D {
        Grid1D::periodic(0.0, 1.0, 1.0 / n as f64).unwrap()
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid1D::new(0.0, 0.0, 4).is_err());
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        let g = Grid1D::new(-1.0, 0.5, 5).unwrap();
        assert_eq!(g.last(), 1.0);
    }

    #[test]
    fn sample_identity() {
        let ev = Evaluator::new("id", |x| x);
        let g = sample(&ev, Grid1D::new(0.0, 1.0, 3).unwrap()).unwrap();
        assert_eq!(g.values(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn sample_reports_non_finite_node() {
        let ev = Evaluator::new("pole", |x| 1.0 / x);
        match sample(&ev, Grid1D::new(-1.0, 0.5, 5).unwrap()) {
            Err(Error::NonFinite { x, .. }) => assert_eq!(x, 0.0),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn evaluator_vanishes_outside_support() {
        let ev = Evaluator::new("one", |_| 1.0).with_support(2.0);
        assert_eq!(ev.eval(1.5), 1.0);
        assert_eq!(ev.eval(-2.5), 0.0);
    }

    #[test]
    fn lp_norm_examples() {
        let g = GridFunction::from_fn(unit_period(1000), |_| 1.0).unwrap();
        assert!((lp_norm(&g, NormSpec::lp(2.0).unwrap()).unwrap() - 1.0).abs() < 1e-12);

        let h = 1e-3;
        let g = GridFunction::from_fn(Grid1D::periodic(-1.0, 2.0, h).unwrap(), |x| {
            if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }
        })
        .unwrap();
        let l1 = lp_norm(&g, NormSpec::lp(1.0).unwrap()).unwrap();
        assert!((l1 - 1.0).abs() <= h + 1e-12);

        // ∫ e^{−2x²} = √(π/2), so ‖e^{−x²}‖₂ = (π/2)^{1/4}.
        let g = GridFunction::from_fn(Grid1D::periodic(-10.0, 10.0, 0.01).unwrap(), |x| (-x * x).exp()).unwrap();
        let l2 = lp_norm(&g, NormSpec::lp(2.0).unwrap()).unwrap();
        assert!((l2 - (PI / 2.0).powf(0.25)).abs() < 1e-12);

        let sup = lp_norm(&g, NormSpec::lp(f64::INFINITY).unwrap()).unwrap();
        assert_eq!(sup, 1.0);
    }

    #[test]
    fn weak_norm_rejected_by_lp() {
        assert!(NormSpec::new(2.0, true).is_err());
        let g = GridFunction::from_fn(unit_period(8), |_| 1.0).unwrap();
        assert!(lp_norm(&g, NormSpec::weak_l1()).is_err());
    }

    #[test]
    fn weak_quasinorm_examples() {
        let h = 1e-3;
        let ind = GridFunction::from_fn(Grid1D::periodic(-1.0, 2.0, h).unwrap(), |x| {
            if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }
        })
        .unwrap();
        assert!((weak_l1_quasinorm(&ind) - 1.0).abs() <= 2.0 * h);

        let zero = GridFunction::from_fn(unit_period(16), |_| 0.0).unwrap();
        assert_eq!(weak_l1_quasinorm(&zero), 0.0);

        // sup_{λ≤1} λ(min(1/λ,100) − 1) = 1 − 1/100.
        let mut prev_err = f64::INFINITY;
        for h in [1e-2, 1e-3, 1e-4] {
            let g = GridFunction::from_fn(Grid1D::periodic(1.0, 100.0, h).unwrap(), |x| 1.0 / x).unwrap();
            let err = (weak_l1_quasinorm(&g) - 0.99).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
        assert!(prev_err < 1e-3);
    }

    #[test]
    fn hilbert_single_modes() {
        let grid = unit_period(64);
        let c = GridFunction::from_fn(grid, |x| (2.0 * PI * x).cos()).unwrap();
        let s = GridFunction::from_fn(grid, |x| (2.0 * PI * x).sin()).unwrap();
        let hc = hilbert_transform(&c).unwrap();
        let hs = hilbert_transform(&s).unwrap();
        for i in 0..64 {
            assert!((hc.values()[i] - s.values()[i]).abs() < 1e-13);
            assert!((hs.values()[i] + c.values()[i]).abs() < 1e-13);
        }
        let one = GridFunction::from_fn(grid, |_| 1.0).unwrap();
        assert!(hilbert_transform(&one).unwrap().values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn h1_norm_of_zero_and_bump_derivative() {
        let z = GridFunction::from_fn(Grid1D::periodic(-8.0, 8.0, 0.01).unwrap(), |_| 0.0).unwrap();
        let n = h1_norm(&z).unwrap();
        assert_eq!(n.value, 0.0);
        assert!(n.warning.is_none());

        // derivative of (1−x²)^4 on |x| ≤ 1
        let dbump = |x: f64| if x.abs() < 1.0 { -8.0 * x * (1.0 - x * x).powi(3) } else { 0.0 };
        let coarse = h1_norm(&GridFunction::from_fn(Grid1D::periodic(-16.0, 16.0, 1.0 / 64.0).unwrap(), dbump).unwrap()).unwrap();
        let fine = h1_norm(&GridFunction::from_fn(Grid1D::periodic(-16.0, 16.0, 1.0 / 128.0).unwrap(), dbump).unwrap()).unwrap();
        assert!(coarse.warning.is_none());
        assert!(((coarse.value - fine.value) / fine.value).abs() < 0.01);
    }

    #[test]
    fn h1_norm_of_indicator_grows_like_log_length() {
        let ind = |x: f64| if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 };
        let h = 1.0 / 32.0;
        let vals: Vec<f64> = [64.0, 256.0, 1024.0]
            .iter()
            .map(|&l| h1_norm(&GridFunction::from_fn(Grid1D::periodic(-l / 2.0, l / 2.0, h).unwrap(), ind).unwrap()).unwrap().value)
            .collect();
        // |Hχ(x)| ~ 1/(π|x|) for large |x|, so each factor 4 in L adds ≈ (2/π)·ln 4.
        let step = (2.0 / PI) * 4f64.ln();
        for w in vals.windows(2) {
            let d = w[1] - w[0];
            assert!((d - step).abs() < 0.1 * step, "increment {d} vs {step}");
        }
    }

    #[test]
    fn zygmund_examples() {
        let grid = Grid1D::new(-1.0, 1.0 / 64.0, 129).unwrap();
        let aff = GridFunction::from_fn(grid, |x| 3.0 * x - 1.0).unwrap();
        assert!(zygmund_seminorm(&aff, 1.0).unwrap() < 1e-12);
        let sq = GridFunction::from_fn(grid, |x| x * x).unwrap();
        assert!((zygmund_seminorm(&sq, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(zygmund_seminorm(&sq, 1.5).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_lines_and_bounded() {
        let g = GridFunction::from_fn(Grid1D::new(0.0, 0.25, 9).unwrap(), |x| 2.0 * x + 1.0).unwrap();
        assert!((g.interp(1.1).unwrap() - 3.2).abs() < 1e-14);
        assert!(g.interp(2.5).is_err());
    }
}
