//! Commutator kernel, its three-term quadratic symmetrization, Menger
//! curvature, and the triple-integral L² identity.
//!
//! For the kernel 𝒦_A(x,y) = (A(y) − A(x))/(x − y)² the symmetrization
//! collapses to a squared difference of divided differences,
//!
//! Sym(x,y,z) = (z−y)^{−2} ((A(y)−A(x))/(y−x) − (A(z)−A(x))/(z−x))²,
//!
//! i.e. the square of the second divided difference A[x,y,z]. The closed
//! form needs one subtraction of nearby slopes; the six-product brute force
//! cancels terms of size |x−y|^{−4} and is kept for testing only.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fnspace::Evaluator;
use crate::numerics::pairwise_sum;

/// Pairwise distinct real triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Triple {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if x == y || x == z || y == z || !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Degenerate(format!("triple ({x}, {y}, {z}) is not pairwise distinct")));
        }
        Ok(Triple { x, y, z })
    }

    pub fn min_gap(&self) -> f64 {
        (self.x - self.y).abs().min((self.x - self.z).abs()).min((self.y - self.z).abs())
    }

    /// All six orderings.
    pub fn permutations(&self) -> [Triple; 6] {
        let Triple { x, y, z } = *self;
        [
            Triple { x, y, z },
            Triple { x, y: z, z: y },
            Triple { x: y, y: x, z },
            Triple { x: y, y: z, z: x },
            Triple { x: z, y: x, z: y },
            Triple { x: z, y, z: x },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPoint {
    pub u: f64,
    pub v: f64,
}

impl PlanarPoint {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::Degenerate(format!("point ({u}, {v}) is not finite")));
        }
        Ok(PlanarPoint { u, v })
    }

    fn dist(&self, o: &PlanarPoint) -> f64 {
        (self.u - o.u).hypot(self.v - o.v)
    }
}

/// Graph point (x, A(x)).
pub fn graph_point(a: &Evaluator, x: f64) -> PlanarPoint {
    PlanarPoint { u: x, v: a.eval(x) }
}

/// 𝒦_A(x,y) = (A(y) − A(x))/(x − y)².
pub fn commutator_kernel(a: &Evaluator, x: f64, y: f64) -> Result<f64> {
    if x == y {
        return Err(Error::Degenerate(format!("kernel is singular at x = y = {x}")));
    }
    Ok((a.eval(y) - a.eval(x)) / (x - y).powi(2))
}

pub fn sym_bruteforce(a: &Evaluator, t: &Triple) -> Result<f64> {
    let Triple { x, y, z } = Triple::new(t.x, t.y, t.z)?;
    let k = |p, q| commutator_kernel(a, p, q);
    Ok(k(x, y)? * k(x, z)? + k(y, z)? * k(y, x)? + k(z, x)? * k(z, y)?)
}

pub fn sym_closed(a: &Evaluator, t: &Triple) -> Result<f64> {
    let Triple { x, y, z } = Triple::new(t.x, t.y, t.z)?;
    Ok(sym_from_values(x, y, z, a.eval(x), a.eval(y), a.eval(z)))
}

fn sym_from_values(x: f64, y: f64, z: f64, ax: f64, ay: f64, az: f64) -> f64 {
    let d = (ay - ax) / (y - x) - (az - ax) / (z - x);
    (d / (z - y)).powi(2)
}

/// 4·area / product of sides; 0 for collinear points.
pub fn menger_curvature(p1: &PlanarPoint, p2: &PlanarPoint, p3: &PlanarPoint) -> Result<f64> {
    let (a, b, c) = (p1.dist(p2), p2.dist(p3), p3.dist(p1));
    if a == 0.0 || b == 0.0 || c == 0.0 {
        return Err(Error::Degenerate("coincident points".into()));
    }
    let cross = (p2.u - p1.u) * (p3.v - p1.v) - (p2.v - p1.v) * (p3.u - p1.u);
    // 4·area = 2|cross|
    Ok(2.0 * cross.abs() / (a * b * c))
}

/// Result of the triple-integral identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SymL2 {
    /// ∭|Sym| over ℝ³, extrapolated from the boxes of half-width B, 2B, 4B.
    pub lhs: f64,
    /// raw value on [−B,B]³
    pub lhs_box: f64,
    /// ‖A′‖₂²
    pub derivative_sq: f64,
    /// lhs / ‖A′‖₂², absent when A′ = 0
    pub rhs_ratio: Option<f64>,
}

/// Midpoint triple quadrature of Sym with the x, y, z grids offset by
/// h/3 from each other, so no two nodes coincide.
fn sym_box_integral(a: &Evaluator, b: f64, resolution: usize) -> f64 {
    let h = 1.0 / resolution as f64;
    let n = (2.0 * b * resolution as f64).round() as usize;
    let nodes = |off: f64| -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let x = -b + (i as f64 + 0.5 + off) * h;
                (x, a.eval(x))
            })
            .collect()
    };
    let (gx, gy, gz) = (nodes(-1.0 / 3.0), nodes(0.0), nodes(1.0 / 3.0));
    let rows: Vec<f64> = gx
        .par_iter()
        .map(|&(x, ax)| {
            let inner: Vec<f64> = gy
                .iter()
                .map(|&(y, ay)| {
                    let line: Vec<f64> = gz.iter().map(|&(z, az)| sym_from_values(x, y, z, ax, ay, az)).collect();
                    pairwise_sum(&line)
                })
                .collect();
            pairwise_sum(&inner)
        })
        .collect();
    pairwise_sum(&rows) * h * h * h
}

/// ∭|Sym[𝒦_A]| and its ratio to ‖A′‖₂². Outside the support the box tail
/// expands as c₁/B + c₂/B² + …, so the B, 2B and 4B values are combined by
/// two-step Richardson extrapolation.
pub fn sym_l2_identity(a: &Evaluator, b: f64, resolution: usize) -> Result<SymL2> {
    if !(b > 0.0) || resolution < 4 {
        return Err(Error::Param(format!("box {b} and resolution {resolution} invalid")));
    }
    if !(a.support() <= b) {
        return Err(Error::Param(format!("support radius {} escapes the box [−{b}, {b}]", a.support())));
    }
    let lhs_box = sym_box_integral(a, b, resolution);
    let lhs_2 = sym_box_integral(a, 2.0 * b, resolution);
    let lhs_4 = sym_box_integral(a, 4.0 * b, resolution);
    let lhs = (8.0 * lhs_4 - 6.0 * lhs_2 + lhs_box) / 3.0;
    // ‖A′‖² by fourth-order central differences on a grid four times finer.
    let fine = 4 * resolution;
    let h = 1.0 / fine as f64;
    let n = (2.0 * b * fine as f64).round() as usize;
    let terms: Vec<f64> = (0..n)
        .map(|i| {
            let x = -b + (i as f64 + 0.5) * h;
            let d = (a.eval(x - 2.0 * h) - 8.0 * a.eval(x - h) + 8.0 * a.eval(x + h) - a.eval(x + 2.0 * h)) / (12.0 * h);
            d * d
        })
        .collect();
    let derivative_sq = pairwise_sum(&terms) * h;
    let rhs_ratio = (derivative_sq > 0.0).then(|| lhs / derivative_sq);
    Ok(SymL2 { lhs, lhs_box, derivative_sq, rhs_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::parse_function;

    #[test]
    fn kernel_examples() {
        let id = Evaluator::new("id", |x| x);
        assert_eq!(commutator_kernel(&id, 0.0, 1.0).unwrap(), 1.0);
        let c = Evaluator::new("c", |_| 3.0);
        assert_eq!(commutator_kernel(&c, 0.3, 1.0).unwrap(), 0.0);
        let sq = Evaluator::new("sq", |x| x * x);
        assert_eq!(commutator_kernel(&sq, 1.0, 3.0).unwrap(), 2.0);
        assert!(commutator_kernel(&sq, 1.0, 1.0).is_err());
    }

    #[test]
    fn sym_examples() {
        let aff = parse_function("affine:a=2,b=-1").unwrap().f;
        let sq = parse_function("quadratic").unwrap().f;
        let t = Triple::new(-0.4, 0.9, 2.3).unwrap();
        assert!(sym_bruteforce(&aff, &t).unwrap().abs() < 1e-14);
        assert_eq!(sym_closed(&aff, &t).unwrap(), 0.0);
        assert!((sym_bruteforce(&sq, &t).unwrap() - 1.0).abs() < 1e-13);
        assert!((sym_closed(&sq, &t).unwrap() - 1.0).abs() < 1e-14);
        assert!(Triple::new(1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn menger_examples() {
        let p = |u, v| PlanarPoint::new(u, v).unwrap();
        assert_eq!(menger_curvature(&p(0.0, 0.0), &p(1.0, 0.0), &p(2.0, 0.0)).unwrap(), 0.0);
        assert!((menger_curvature(&p(1.0, 0.0), &p(0.0, 1.0), &p(-1.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(menger_curvature(&p(1.0, 0.0), &p(1.0, 0.0), &p(-1.0, 0.0)).is_err());
    }

    #[test]
    fn l2_identity_zero_function() {
        let z = Evaluator::new("zero", |_| 0.0).with_support(1.0);
        let r = sym_l2_identity(&z, 2.0, 8).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.rhs_ratio.is_none());
        let wide = Evaluator::new("w", |_| 1.0);
        assert!(sym_l2_identity(&wide, 2.0, 8).is_err());
    }
}

#[cfg(test)]
mod identity_tests {
    use super::*;
    use crate::zoo::parse_function;
    use proptest::prelude::*;

    /// 1/R from the explicit circumcenter.
    fn circumcenter_curvature(p: [(f64, f64); 3]) -> f64 {
        let [(ax, ay), (bx, by), (cx, cy)] = p;
        let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
        let (a2, b2, c2) = (ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy);
        let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
        let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
        1.0 / (ax - ux).hypot(ay - uy)
    }

    fn well_separated() -> impl Strategy<Value = Triple> {
        (-3.0f64..3.0, 0.05f64..2.0, 0.05f64..2.0).prop_map(|(x, a, b)| Triple::new(x, x + a, x + a + b).unwrap())
    }

    proptest! {
        #[test]
        fn closed_form_matches_bruteforce(t in well_separated(), c in -2.0f64..2.0) {
            let a = parse_function(&format!("cubic:a0=0.3,a1=-1,a2={c},a3=0.7")).unwrap().f;
            let brute = sym_bruteforce(&a, &t).unwrap();
            let closed = sym_closed(&a, &t).unwrap();
            let scale = t.min_gap().powi(-4) * 10.0;
            prop_assert!((brute - closed).abs() <= 1e-10 * scale.max(1.0), "{} vs {}", brute, closed);
        }

        #[test]
        fn sym_is_permutation_invariant(t in well_separated()) {
            let a = parse_function("gaussian:width=0.7").unwrap().f;
            let v = sym_closed(&a, &t).unwrap();
            for p in t.permutations() {
                let w = sym_closed(&a, &p).unwrap();
                prop_assert!((v - w).abs() <= 1e-9 * v + 1e-300);
            }
        }

        #[test]
        fn menger_bounded_by_sym(t in well_separated()) {
            let a = parse_function("smooth_bump:radius=2").unwrap().f;
            let pts = [graph_point(&a, t.x), graph_point(&a, t.y), graph_point(&a, t.z)];
            let c = menger_curvature(&pts[0], &pts[1], &pts[2]).unwrap();
            let sym = sym_closed(&a, &t).unwrap();
            prop_assert!(c <= 2.0 * sym.sqrt() * (1.0 + 1e-9) + 1e-12);
        }

        #[test]
        fn menger_matches_circumcenter(
            p in prop::array::uniform3((-5.0f64..5.0, -5.0f64..5.0))
        ) {
            let q: Vec<PlanarPoint> = p.iter().map(|&(u, v)| PlanarPoint::new(u, v).unwrap()).collect();
            let (a, b, c) = (q[0].dist(&q[1]), q[1].dist(&q[2]), q[2].dist(&q[0]));
            let cross = ((p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[1].1 - p[0].1) * (p[2].0 - p[0].0)).abs();
            // stay away from nearly collinear triples where the circumcenter is ill-conditioned
            prop_assume!(a.min(b).min(c) > 0.1 && cross > 0.05 * a.max(b).max(c).powi(2));
            let got = menger_curvature(&q[0], &q[1], &q[2]).unwrap();
            let want = circumcenter_curvature(p);
            prop_assert!((got - want).abs() <= 1e-10 * want);
        }
    }

    #[test]
    fn l2_identity_ratio_is_two_pi_squared() {
        let target = 2.0 * std::f64::consts::PI.powi(2);
        for id in ["smooth_bump", "smooth_bump:radius=0.5", "gaussian:width=0.25"] {
            let a = parse_function(id).unwrap().f;
            let r = sym_l2_identity(&a, a.support().max(1.0), 16).unwrap();
            let ratio = r.rhs_ratio.unwrap();
            assert!((ratio / target - 1.0).abs() < 0.05, "{id}: {ratio}");
        }
    }
}
