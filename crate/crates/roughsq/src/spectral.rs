//! Fourier multipliers on a periodized uniform grid.
//!
//! Convention (used by every module): on a grid of N points with spacing h the
//! forward transform is ĝ(ξ_k) = h·Σ_j g_j e^{−i ξ_k x_j}, the inverse carries
//! 1/(Nh), and ξ_k = 2πk/(Nh) with k taken in (−N/2, N/2]. This approximates
//! the continuous ĝ(ξ) = ∫ g(x) e^{−ixξ} dx, so a multiplier m(ξ) acts as
//! g ↦ F⁻¹[m ĝ]. Because the h factors cancel, applying a multiplier is just
//! IDFT(m · DFT(g)).
//!
//! The Nyquist mode of an even-length grid has no sign; odd multipliers
//! (such as −i·sgn ξ) send it to zero, even ones see |ξ| = π/h.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Largest transform the size policy accepts.
pub const MAX_TRANSFORM: usize = 1 << 26;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn check_size(n: usize) -> Result<()> {
    if n > MAX_TRANSFORM {
        Err(Error::TransformSize(n))
    } else {
        Ok(())
    }
}

/// Frequency of DFT bin `k` and whether it is the (unsigned) Nyquist bin.
pub fn frequency(k: usize, n: usize, h: f64) -> (f64, bool) {
    let scale = 2.0 * std::f64::consts::PI / (n as f64 * h);
    if 2 * k == n {
        (scale * k as f64, true)
    } else if 2 * k < n {
        (scale * k as f64, false)
    } else {
        (scale * (k as f64 - n as f64), false)
    }
}

pub fn forward(data: &mut [Complex64]) {
    let n = data.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(data));
}

/// Unnormalized inverse DFT followed by the 1/N factor.
pub fn inverse(data: &mut [Complex64]) {
    let n = data.len();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(data));
    let s = 1.0 / n as f64;
    for v in data.iter_mut() {
        *v *= s;
    }
}

/// Parity of a multiplier, which decides the Nyquist treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// m(−ξ) = conj(m(ξ)) with a well-defined value at |ξ| = π/h.
    Even,
    /// Sign-carrying multiplier; the Nyquist mode is zeroed.
    Odd,
}

/// Apply `m(ξ)` to the samples. Returns the complex result.
pub fn apply(values: &[Complex64], h: f64, parity: Parity, m: impl Fn(f64) -> Complex64) -> Result<Vec<Complex64>> {
    let n = values.len();
    check_size(n)?;
    let mut buf = values.to_vec();
    forward(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let (xi, nyq) = frequency(k, n, h);
        *v *= if nyq && parity == Parity::Odd { Complex64::new(0.0, 0.0) } else { m(xi) };
    }
    inverse(&mut buf);
    Ok(buf)
}

/// Forward spectrum in the continuous normalization ĝ(ξ_k) ≈ h·DFT.
pub fn spectrum(values: &[Complex64], h: f64) -> Result<Vec<Complex64>> {
    check_size(values.len())?;
    let mut buf = values.to_vec();
    forward(&mut buf);
    for v in buf.iter_mut() {
        *v *= h;
    }
    Ok(buf)
}
