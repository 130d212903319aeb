//! Panel layouts and nested Gauss–Legendre rules.

use rayon::prelude::*;

use crate::numerics::{gauss, pairwise_sum};

/// Gauss–Legendre order on every inner panel.
pub(crate) const PANEL_ORDER: usize = 6;
/// Growth factor of graded panels away from structure.
const GRADE: f64 = 1.5;

/// Stretch of the line that needs panels no wider than `width`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Zone {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
}

/// Panel layout on [a, b]. Panels never straddle `points` or zone edges.
/// Inside a zone panels are uniform; elsewhere they are uniform of width
/// `fill` if given, otherwise graded geometrically from `start` at both
/// segment ends (the integrand is smooth there on the scale of the distance
/// to the nearest structure).
pub(crate) fn panels(a: f64, b: f64, points: &[f64], zones: &[Zone], fill: Option<f64>, start: f64) -> Vec<(f64, f64)> {
    if !(b > a) {
        return Vec::new();
    }
    let tol = 1e-14 * (b - a);
    let mut cuts = vec![a, b];
    let inside = |c: f64| c > a + tol && c < b - tol;
    cuts.extend(points.iter().copied().filter(|&c| inside(c)));
    for z in zones {
        cuts.extend([z.lo, z.hi].into_iter().filter(|&c| inside(c)));
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= tol);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mid = 0.5 * (p + q);
        let zone_width = zones
            .iter()
            .filter(|z| z.lo <= mid && mid <= z.hi)
            .map(|z| z.width)
            .fold(f64::INFINITY, f64::min);
        let uniform = if zone_width.is_finite() { Some(zone_width) } else { fill };
        match uniform {
            Some(h) => {
                let n = ((q - p) / h).ceil().max(1.0) as usize;
                let step = (q - p) / n as f64;
                out.extend((0..n).map(|i| (p + i as f64 * step, if i + 1 == n { q } else { p + (i + 1) as f64 * step })));
            }
            None if q - p <= 2.0 * start => out.push((p, q)),
            None => {
                let mut left = Vec::new();
                let (mut pos, mut h) = (p, start);
                while pos + h < mid {
                    left.push((pos, pos + h));
                    pos += h;
                    h *= GRADE;
                }
                left.push((pos, mid));
                let mut right = Vec::new();
                let (mut pos, mut h) = (q, start);
                while pos - h > mid {
                    right.push((pos - h, pos));
                    pos -= h;
                    h *= GRADE;
                }
                right.push((mid, pos));
                out.extend(left);
                out.extend(right.into_iter().rev());
            }
        }
    }
    out
}

/// Replace the panels touching `point` by `depth` geometrically shrinking
/// pieces; the innermost piece of relative size 2^{−depth} is dropped and
/// its width returned through the layout (callers add a remainder if needed).
pub(crate) fn grade_toward(panels: Vec<(f64, f64)>, point: f64, depth: u32) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels.len() + 2 * depth as usize);
    for (a, b) in panels {
        if a == point {
            let w = b - a;
            for i in (0..depth).rev() {
                out.push((a + w * 0.5f64.powi(i as i32 + 1), a + w * 0.5f64.powi(i as i32)));
            }
        } else if b == point {
            let w = b - a;
            for i in 0..depth {
                out.push((b - w * 0.5f64.powi(i as i32), b - w * 0.5f64.powi(i as i32 + 1)));
            }
        } else {
            out.push((a, b));
        }
    }
    out
}

pub(crate) fn integrate(panels: &[(f64, f64)], f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss(PANEL_ORDER);
    let parts: Vec<f64> = panels.iter().map(|&(a, b)| rule.integrate(a, b, &f)).collect();
    pairwise_sum(&parts)
}

/// ∫_lo^hi F(y) dy, Gauss–Legendre in ln y over octaves [lo·2^i, lo·2^{i+1}]
/// (the last one clipped at hi). Nodes are evaluated in parallel and summed
/// pairwise in a fixed order.
pub(crate) fn log_octaves(lo: f64, hi: f64, q: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    if !(hi > lo && lo > 0.0) {
        return 0.0;
    }
    let rule = gauss(q);
    let mut nodes = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = (2.0 * a).min(hi);
        for (z, w) in rule.on(a.ln(), b.ln()) {
            let y = z.exp();
            nodes.push((y, w * y));
        }
        a = b;
    }
    let terms: Vec<f64> = nodes.par_iter().map(|&(y, w)| w * f(y)).collect();
    pairwise_sum(&terms)
}

/// ∫_a^b F over `n` equal Gauss panels of order q, nodes in parallel.
pub(crate) fn uniform_parallel(a: f64, b: f64, n: usize, q: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let rule = gauss(q);
    let h = (b - a) / n as f64;
    let nodes: Vec<(f64, f64)> = (0..n).flat_map(|i| rule.on(a + i as f64 * h, a + (i + 1) as f64 * h).collect::<Vec<_>>()).collect();
    let terms: Vec<f64> = nodes.par_iter().map(|&(y, w)| w * f(y)).collect();
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panels_respect_cuts_and_cover() {
        let zones = [Zone { lo: -1.0, hi: 1.0, width: 0.1 }];
        let ps = panels(-8.0, 7.5, &[0.0, 0.3, -2.5], &zones, None, 0.1);
        assert_eq!(ps.first().unwrap().0, -8.0);
        assert_eq!(ps.last().unwrap().1, 7.5);
        for w in ps.windows(2) {
            assert!((w[0].1 - w[1].0).abs() < 1e-15);
        }
        for c in [0.0, 0.3, -2.5, -1.0, 1.0] {
            assert!(ps.iter().any(|p| p.1 == c), "cut {c} missing");
        }
        assert!(ps.iter().filter(|p| p.0 >= -1.0 && p.1 <= 1.0).all(|p| p.1 - p.0 <= 0.1 + 1e-15));
        let total: f64 = ps.iter().map(|p| p.1 - p.0).sum();
        assert!((total - 15.5).abs() < 1e-12);
    }

    #[test]
    fn graded_rules_integrate_rational_tails() {
        // ∫_1^100 dx/x² with structure only at the left end
        let ps = panels(1.0, 100.0, &[], &[], None, 0.05);
        let v = integrate(&ps, |x| 1.0 / (x * x));
        assert!((v - 0.99).abs() < 1e-10, "{v}");
        let oct = log_octaves(1e-3, 5.0, 8, |y| y.sqrt());
        assert!((oct - 2.0 / 3.0 * (5f64.powf(1.5) - 1e-3f64.powf(1.5))).abs() < 1e-12);
    }

    #[test]
    fn grading_toward_a_point() {
        let ps = grade_toward(panels(0.0, 1.0, &[], &[], Some(0.25), 0.25), 0.0, 30);
        let v = integrate(&ps, |t| t.powf(-0.5));
        assert!((v - 2.0).abs() < 1e-4, "{v}");
    }
}
