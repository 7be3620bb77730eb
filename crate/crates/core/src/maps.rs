//! Scalar complex maps of the tree recurrence.
//!
//! * `h_β(x) = (β + x) / (βx + 1)` and its inverse `(y − β) / (1 − βy)`;
//! * `f_{β,k,s}(x) = β^s h_β(x)^k` and the multivariate `F_{β,k,s}`;
//! * the log-conjugated map `f^φ_{β,k,s}(x) = s log β + k log h_β(e^x)`;
//! * `p_β = log ∘ h_β⁻¹ ∘ exp`, its non-analytic linearisation `q_β`, and
//!   the envelope `i_{k,δ}` bounding the imaginary extent of `C₂`.
//!
//! Every logarithm is the principal branch and is only taken on the open
//! right half-plane; anything else is reported as [`Error::Branch`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative size below which a Möbius denominator counts as zero.
const POLE_TOL: f64 = 1e-14;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Principal logarithm restricted to `Re z > 0`.
pub fn principal_log(z: Complex64) -> Result<Complex64> {
    if z.re > 0.0 && z.is_finite() {
        Ok(z.ln())
    } else {
        Err(Error::Branch)
    }
}

fn checked_div(num: Complex64, den: Complex64, scale: f64) -> Result<Complex64> {
    if den.norm() <= POLE_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::MapPole);
    }
    Ok(num / den)
}

/// Parameters of one recurrence step `F_{β,k,s}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub beta: Complex64,
    pub k: usize,
    pub s: i32,
    pub delta_cap: usize,
}

impl MapParams {
    pub fn new(beta: Complex64, k: usize, s: i32, delta_cap: usize) -> Self {
        MapParams { beta, k, s, delta_cap }
    }

    pub fn branching(&self) -> usize {
        self.delta_cap.saturating_sub(1)
    }

    pub fn arity(&self) -> usize {
        self.k + self.s.unsigned_abs() as usize
    }

    /// `1 ≤ k + |s| ≤ d` for an inner step, `≤ Δ` for the step at the root.
    pub fn is_valid_step(&self, at_root: bool) -> bool {
        let bound = if at_root { self.delta_cap } else { self.branching() };
        (1..=bound).contains(&self.arity())
    }
}

/// All `(k, s)` with `1 ≤ k + |s| ≤ bound`.
pub fn step_shapes(bound: usize) -> Vec<(usize, i32)> {
    let mut out = Vec::new();
    for k in 0..=bound {
        let rest = (bound - k) as i32;
        for s in -rest..=rest {
            if k + s.unsigned_abs() as usize >= 1 {
                out.push((k, s));
            }
        }
    }
    out
}

pub fn h_map(beta: Complex64, x: Complex64) -> Result<Complex64> {
    let den = beta * x + 1.0;
    checked_div(beta + x, den, (beta * x).norm() + 1.0)
}

pub fn h_inverse(beta: Complex64, y: Complex64) -> Result<Complex64> {
    let den = 1.0 - beta * y;
    checked_div(y - beta, den, (beta * y).norm() + 1.0)
}

/// `β^s` with an explicit error for `0^{-n}`.
pub fn beta_pow(beta: Complex64, s: i32) -> Result<Complex64> {
    if s < 0 && beta == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroToNegativePower);
    }
    Ok(beta.powi(s))
}

/// Univariate recurrence `f_{β,k,s}(x) = β^s h_β(x)^k`.
pub fn f_uni(beta: Complex64, k: usize, s: i32, x: Complex64) -> Result<Complex64> {
    Ok(beta_pow(beta, s)? * h_map(beta, x)?.powi(k as i32))
}

/// Multivariate recurrence `F_{β,k,s}(x₁..x_k) = β^s Π h_β(x_i)`, `k = xs.len()`.
pub fn f_multi(beta: Complex64, s: i32, xs: &[Complex64]) -> Result<Complex64> {
    xs.iter().try_fold(beta_pow(beta, s)?, |acc, &x| Ok(acc * h_map(beta, x)?))
}

/// `f^φ_{β,k,s}(x) = s log β + k log h_β(e^x)`, principal branch.
pub fn f_phi(beta: Complex64, k: usize, s: i32, x: Complex64) -> Result<Complex64> {
    let mut out = Complex64::new(0.0, 0.0);
    if k > 0 {
        out += principal_log(h_map(beta, x.exp())?)? * k as f64;
    }
    if s != 0 {
        out += principal_log(beta)? * s as f64;
    }
    Ok(out)
}

/// Analytic derivative `k (1−β²) eˣ / ((β + eˣ)(βeˣ + 1))`.
pub fn f_phi_deriv(beta: Complex64, k: usize, x: Complex64) -> Result<Complex64> {
    let y = x.exp();
    let den = (beta + y) * (beta * y + 1.0);
    checked_div((1.0 - beta * beta) * y * k as f64, den, (beta.norm() + y.norm()).powi(2) + 1.0)
}

/// Real-axis form `k|1−β²| / (β² + 1 + β(eˣ + e⁻ˣ))` of `|f^φ'|`.
pub fn f_phi_deriv_real(beta: f64, k: usize, x: f64) -> f64 {
    k as f64 * (1.0 - beta * beta).abs() / (beta * beta + 1.0 + 2.0 * beta * x.cosh())
}

/// The open interval of β on which the Δ-regular tree has a unique Gibbs
/// measure; unbounded for Δ ≤ 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum UniquenessInterval {
    Bounded { lo: f64, hi: f64 },
    AllPositive,
}

impl UniquenessInterval {
    pub fn contains(&self, beta: f64) -> bool {
        match *self {
            UniquenessInterval::Bounded { lo, hi } => lo < beta && beta < hi,
            UniquenessInterval::AllPositive => beta > 0.0,
        }
    }

    /// `(lo, hi)` with `hi = ∞` when unbounded.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            UniquenessInterval::Bounded { lo, hi } => (lo, hi),
            UniquenessInterval::AllPositive => (0.0, f64::INFINITY),
        }
    }
}

pub fn uniqueness_interval(delta_cap: usize) -> UniquenessInterval {
    if delta_cap <= 2 {
        return UniquenessInterval::AllPositive;
    }
    let dl = delta_cap as f64;
    UniquenessInterval::Bounded { lo: (dl - 2.0) / dl, hi: dl / (dl - 2.0) }
}

/// `d |1−β| / (1+β)`: the supremum over real x of `(d/k)|f^φ'|`. Below 1
/// exactly on the uniqueness interval for `Δ = d + 1`.
pub fn contraction_ratio(beta: f64, d: usize) -> f64 {
    d as f64 * (1.0 - beta).abs() / (1.0 + beta)
}

/// Half-width `2k|log β|` of the interval `I₀(β, k)`.
pub fn i0_half_width(beta: f64, k: usize) -> f64 {
    2.0 * k as f64 * beta.ln().abs()
}

/// `|log h_β(β^{2k})|`, computed as `|log(β^{2k+1} + 1) − log(β + β^{2k})|`.
pub fn c2_half_width(beta: f64, k: usize) -> f64 {
    let b2k = beta.powi(2 * k as i32);
    ((beta * b2k + 1.0).ln() - (beta + b2k).ln()).abs()
}

/// `p_β(z) = log h_β⁻¹(e^z)`.
pub fn p_map(beta: Complex64, z: Complex64) -> Result<Complex64> {
    principal_log(h_inverse(beta, z.exp())?)
}

/// `p_β⁻¹(w) = log h_β(e^w)`.
pub fn p_inverse(beta: Complex64, w: Complex64) -> Result<Complex64> {
    principal_log(h_map(beta, w.exp())?)
}

fn check_real_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || beta == 1.0 || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("need a positive real beta != 1, got {beta}")));
    }
    Ok(())
}

/// `p_β'(a) = (1−β²) / (2β(cosh log β − cosh a))` for real `|a| < |log β|`.
pub fn p_deriv_real(beta: f64, a: f64) -> Result<f64> {
    check_real_beta(beta)?;
    let gap = beta.ln().cosh() - a.cosh();
    if a.abs() >= beta.ln().abs() || gap <= 0.0 {
        return Err(Error::MapPole);
    }
    Ok((1.0 - beta * beta) / (2.0 * beta * gap))
}

/// `q_β(a + bi) = p_β(a) + p_β'(a) b i`.
pub fn q_map(beta: f64, z: Complex64) -> Result<Complex64> {
    let slope = p_deriv_real(beta, z.re)?;
    let base = p_map(c(beta), c(z.re))?;
    Ok(Complex64::new(base.re, slope * z.im))
}

/// `i_{k,δ}(x) = kδ (cosh log β − cosh x) · 2β / |1−β²|`.
pub fn i_func(beta: f64, k: usize, delta: f64, x: f64) -> Result<f64> {
    check_real_beta(beta)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    Ok(k as f64 * delta * (beta.ln().cosh() - x.cosh()) * 2.0 * beta / (1.0 - beta * beta).abs())
}

/// `β = e^{−2J}`.
pub fn beta_of_j(j: f64) -> f64 {
    (-2.0 * j).exp()
}
