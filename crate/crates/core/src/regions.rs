//! Rectangles, the regions `C₂` and `D`, and sampled verification of the
//! set relations between them.
//!
//! Every check draws a seeded sample (evenly spaced boundary points plus
//! uniform interior points), evaluates the relevant map and reports the
//! largest violation together with a witness. Sample evaluation runs in
//! parallel; reductions are sequential in sample order, so reports do not
//! depend on the thread count.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{
    c2_half_width, f_multi, f_phi, f_phi_deriv, f_uni, h_inverse, h_map, i0_half_width, p_inverse, p_map,
    principal_log, q_map, step_shapes, uniqueness_interval, MapParams,
};

/// Distance within which a point counts as lying on a region boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Smallest accepted value of `min |f + 1|`.
pub const MARGIN_FLOOR: f64 = 1e-6;
/// Violation recorded when a map cannot be evaluated at a sample.
pub const ERROR_VIOLATION: f64 = f64::MAX;
pub const CONVEXITY_TUPLES: usize = 1000;
const CONVEXITY_TOL: f64 = 1e-6;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` evenly spaced points of `[lo, hi]`, endpoints included.
fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if n == 1 { 0.5 * (lo + hi) } else { lo + step * i as f64 })
}

fn named(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    Ok(())
}

/// `R(a, b) = {x + yi : |x| ≤ a, |y| ≤ b}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub a: f64,
    pub b: f64,
}

impl Rectangle {
    pub fn new(a: f64, b: f64) -> Self {
        debug_assert!(a >= 0.0 && b >= 0.0);
        Rectangle { a, b }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re.abs() <= self.a && z.im.abs() <= self.b
    }

    /// `max(|Re z| − a, |Im z| − b)`; non-positive exactly on the rectangle.
    pub fn excess(&self, z: Complex64) -> f64 {
        (z.re.abs() - self.a).max(z.im.abs() - self.b)
    }

    /// Minkowski erosion by a disk of radius `eps`; `None` when empty.
    pub fn erode(&self, eps: f64) -> Option<Rectangle> {
        if eps > self.a.min(self.b) {
            None
        } else {
            Some(Rectangle::new(self.a - eps, self.b - eps))
        }
    }

    /// Bounding rectangle of the dilation by a disk of radius `eps`.
    pub fn dilate_bound(&self, eps: f64) -> Rectangle {
        Rectangle::new(self.a + eps, self.b + eps)
    }

    pub fn scale(&self, c: f64) -> Rectangle {
        Rectangle::new(c * self.a, c * self.b)
    }

    /// `n` points: a fifth evenly along the real segment, a fifth evenly
    /// around the perimeter, the rest uniform inside.
    fn samples(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let n_axis = n / 5;
        let n_edge = n / 5;
        let mut out: Vec<Complex64> = linspace(-self.a, self.a, n_axis).map(|x| cx(x, 0.0)).collect();
        out.extend(self.perimeter(n_edge));
        while out.len() < n {
            out.push(self.random_point(rng));
        }
        out
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        cx(rng.gen_range(-1.0..=1.0) * self.a, rng.gen_range(-1.0..=1.0) * self.b)
    }

    /// Points spread over the four sides in proportion to their length.
    fn perimeter(&self, n: usize) -> Vec<Complex64> {
        let total = 2.0 * (self.a + self.b);
        if n == 0 || total == 0.0 {
            return vec![Complex64::new(0.0, 0.0); n.min(1)];
        }
        let n_h = ((n as f64 * self.a / total).round() as usize).max(2);
        let n_v = ((n as f64 * self.b / total).round() as usize).max(2);
        let mut out = Vec::with_capacity(2 * (n_h + n_v));
        for sign in [1.0, -1.0] {
            out.extend(linspace(-self.a, self.a, n_h).map(|x| cx(x, sign * self.b)));
            out.extend(linspace(-self.b, self.b, n_v).map(|y| cx(sign * self.a, y)));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Boundary,
    Outside,
}

impl Membership {
    pub fn from_excess(excess: f64) -> Membership {
        if excess.is_nan() || excess > BOUNDARY_TOL {
            Membership::Outside
        } else if excess >= -BOUNDARY_TOL {
            Membership::Boundary
        } else {
            Membership::Inside
        }
    }

    pub fn is_member(self) -> bool {
        self != Membership::Outside
    }
}

/// `C₂(β, δ, k) = {z : |Re z| ≤ |log h_β(β^{2k})|, |Im z| ≤ i_{k,δ}(Re z)}`;
/// `{0}` when `k = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionC2 {
    pub beta: f64,
    pub delta: f64,
    pub k: usize,
}

impl RegionC2 {
    pub fn new(beta: f64, delta: f64, k: usize) -> Result<Self> {
        check_beta(beta)?;
        check_delta(delta)?;
        if k >= 1 && beta == 1.0 {
            return Err(Error::InvalidParameter("C2 needs beta != 1".into()));
        }
        Ok(RegionC2 { beta, delta, k })
    }

    pub fn half_width(&self) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            c2_half_width(self.beta, self.k)
        }
    }

    /// `i_{k,δ}(x)`; negative once `|x| > |log β|`.
    pub fn imag_bound(&self, x: f64) -> f64 {
        let b = self.beta;
        self.k as f64 * self.delta * (b.ln().cosh() - x.cosh()) * 2.0 * b / (1.0 - b * b).abs()
    }

    pub fn excess(&self, z: Complex64) -> f64 {
        if self.k == 0 {
            return z.norm();
        }
        (z.re.abs() - self.half_width()).max(z.im.abs() - self.imag_bound(z.re))
    }

    pub fn classify(&self, z: Complex64) -> Membership {
        Membership::from_excess(self.excess(z))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.classify(z).is_member()
    }

    /// `g_β(t) = log h_β(e^t)`, the inverse of `p_β` on the real line.
    /// Evenly spaced `t` over `I₀(β, k)` gives evenly spaced images under `q_β`.
    fn real_from_potential(&self, t: f64) -> f64 {
        p_inverse(cx(self.beta, 0.0), cx(t, 0.0)).map(|w| w.re).unwrap_or(f64::NAN)
    }

    fn potential_width(&self) -> f64 {
        i0_half_width(self.beta, self.k)
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        if self.k == 0 {
            return cx(0.0, 0.0);
        }
        let w = self.potential_width();
        let a = self.real_from_potential(rng.gen_range(-w..=w));
        cx(a, rng.gen_range(-1.0..=1.0) * self.imag_bound(a))
    }

    /// Boundary points, split between the curved top/bottom and the two
    /// vertical sides in proportion to the side lengths of `q_β(C₂)`.
    fn boundary(&self, n: usize) -> Vec<Complex64> {
        if self.k == 0 {
            return vec![cx(0.0, 0.0)];
        }
        let w = self.potential_width();
        let h = self.k as f64 * self.delta;
        let total = 2.0 * (w + h);
        let n_h = ((n as f64 * w / total).round() as usize).max(2);
        let n_v = ((n as f64 * h / total).round() as usize).max(2);
        let l = self.half_width();
        let top = self.imag_bound(l);
        let mut out = Vec::with_capacity(2 * (n_h + n_v));
        for sign in [1.0, -1.0] {
            out.extend(linspace(-w, w, n_h).map(|t| {
                let a = self.real_from_potential(t);
                cx(a, sign * self.imag_bound(a))
            }));
            out.extend(linspace(-top, top, n_v).map(|y| cx(sign * l, y)));
        }
        out
    }

    fn samples(&self, n: usize, boundary_fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, usize) {
        let mut out = self.boundary((n as f64 * boundary_fraction) as usize);
        let n_boundary = out.len();
        while out.len() < n.max(n_boundary) {
            out.push(self.random_point(rng));
        }
        (out, n_boundary)
    }
}

/// Base set `W` of the region `D = φ(W)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionBase {
    /// `C₂(β, δ, d)`, with `φ = h_{β'}⁻¹ ∘ exp`.
    C2(RegionC2),
    /// `R(δ, δ)` for `β = 1`, with `φ = exp`.
    Square(Rectangle),
}

impl RegionBase {
    pub fn excess(&self, w: Complex64) -> f64 {
        match self {
            RegionBase::C2(r) => r.excess(w),
            RegionBase::Square(r) => r.excess(w),
        }
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        match self {
            RegionBase::C2(r) => r.random_point(rng),
            RegionBase::Square(r) => r.random_point(rng),
        }
    }

    fn samples(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        match self {
            RegionBase::C2(r) => r.samples(n, 0.5, rng).0,
            RegionBase::Square(r) => {
                let mut out = r.perimeter(n / 2);
                while out.len() < n {
                    out.push(r.random_point(rng));
                }
                out
            }
        }
    }
}

/// `D = (h_{β'}⁻¹ ∘ exp)(C₂(β, δ, d))`, or `exp(R(δ, δ))` when `β = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionD {
    pub beta: f64,
    pub beta_prime: Complex64,
    pub delta: f64,
    pub d: usize,
}

impl RegionD {
    pub fn new(beta: f64, beta_prime: Complex64, delta: f64, d: usize) -> Result<Self> {
        check_beta(beta)?;
        check_delta(delta)?;
        if !beta_prime.is_finite() || beta_prime.norm() == 0.0 {
            return Err(Error::InvalidParameter(format!("invalid beta' = {beta_prime}")));
        }
        Ok(RegionD { beta, beta_prime, delta, d })
    }

    pub fn is_square(&self) -> bool {
        self.beta == 1.0
    }

    pub fn base(&self) -> RegionBase {
        if self.is_square() {
            RegionBase::Square(Rectangle::new(self.delta, self.delta))
        } else {
            RegionBase::C2(RegionC2 { beta: self.beta, delta: self.delta, k: self.d })
        }
    }

    /// Preimage of `z` in the base set coordinates.
    pub fn to_base(&self, z: Complex64) -> Result<Complex64> {
        if self.is_square() {
            principal_log(z)
        } else {
            principal_log(h_map(self.beta_prime, z)?)
        }
    }

    pub fn from_base(&self, w: Complex64) -> Result<Complex64> {
        if self.is_square() {
            Ok(w.exp())
        } else {
            h_inverse(self.beta_prime, w.exp())
        }
    }

    /// Base-set excess of `z`; [`ERROR_VIOLATION`] off the branch domain.
    pub fn excess(&self, z: Complex64) -> f64 {
        match self.to_base(z) {
            Ok(w) => self.base().excess(w),
            Err(_) => ERROR_VIOLATION,
        }
    }

    pub fn classify(&self, z: Complex64) -> Membership {
        Membership::from_excess(self.excess(z))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.classify(z).is_member()
    }
}

pub fn c2_contains(r: &RegionC2, z: Complex64) -> bool {
    r.contains(z)
}

pub fn d_contains(r: &RegionD, z: Complex64) -> bool {
    r.contains(z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub re: f64,
    pub im: f64,
    pub k: usize,
    pub s: i32,
}

impl Witness {
    fn at(z: Complex64, k: usize, s: i32) -> Self {
        Witness { re: z.re, im: z.im, k, s }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub max_violation: f64,
    pub witness: Option<Witness>,
    pub samples_used: usize,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
}

impl VerificationReport {
    fn finish(worst: Worst, tol: f64, samples_used: usize, seed: u64, params: BTreeMap<String, f64>) -> Self {
        let passed = worst.violation <= tol;
        VerificationReport {
            passed,
            max_violation: worst.violation,
            witness: if passed { None } else { worst.witness },
            samples_used,
            seed,
            params,
            metrics: BTreeMap::new(),
        }
    }

    fn with_metrics(mut self, metrics: &[(&str, f64)]) -> Self {
        self.metrics.extend(named(metrics));
        self
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Running maximum violation; ties keep the earliest sample.
#[derive(Clone, Copy, Debug)]
struct Worst {
    violation: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Worst { violation: f64::NEG_INFINITY, witness: None }
    }

    fn observe(&mut self, violation: f64, witness: Witness) {
        let v = if violation.is_nan() { ERROR_VIOLATION } else { violation };
        if v > self.violation {
            self.violation = v;
            self.witness = Some(witness);
        }
    }

    fn merge(&mut self, other: Worst) {
        if let Some(w) = other.witness {
            self.observe(other.violation, w);
        }
    }
}

/// Supremum of `|f^φ_{β,k}'|` over `n_grid` evenly spaced points of
/// `I₀(β, d)` together with `x = 0`. Returns `(sup, argmax)`.
pub fn phi_deriv_grid_sup(beta: f64, k: usize, d: usize, n_grid: usize) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let w = i0_half_width(beta, d);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for x in linspace(-w, w, n_grid).chain(std::iter::once(0.0)) {
        let v = f_phi_deriv(cx(beta, 0.0), k, cx(x, 0.0))?.norm();
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// `C₀` proxy `R(2d|log β| + ε, ε)`: the `ε`-neighbourhood box of `I₀(β, d)`.
pub fn c0_proxy(beta: f64, d: usize, eps: f64) -> Rectangle {
    Rectangle::new(i0_half_width(beta, d) + eps, eps)
}

/// Default neighbourhood width `0.05 |I₀(β, d)|`.
pub fn default_c0_eps(beta: f64, d: usize) -> f64 {
    0.05 * 2.0 * i0_half_width(beta, d)
}

/// `η` with `sup |f^φ_{β,k}'| = (k/d)(1 − η)` over a sample of `domain`.
pub fn measure_eta(params: &MapParams, domain: Rectangle, n_samples: usize, seed: u64) -> Result<f64> {
    let (k, d) = (params.k, params.branching());
    if k == 0 || d == 0 {
        return Ok(1.0);
    }
    let pts = domain.samples(n_samples, &mut rng(seed));
    let sup = pts
        .par_iter()
        .map(|&x| f_phi_deriv(params.beta, k, x).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(1.0 - d as f64 * sup / k as f64)
}

/// Samples `domain` and checks `|Re f(x)| ≤ χ max(|Re x|, τ)` and
/// `|Im f(x)| ≤ χ max(|Im x|, ξ)` for `f = f^φ_{β,k,s}`.
///
/// For a rectangle centred at 0 this is the same as checking every
/// sub-rectangle `R(a, b)`: the binding one for a point `x` is
/// `R(|Re x|, |Im x|)`. The violation is relative: `ratio/χ − 1`.
pub fn check_rect_contraction(
    params: &MapParams,
    domain: Rectangle,
    chi: f64,
    tau: f64,
    xi: f64,
    n_samples: usize,
    seed: u64,
) -> VerificationReport {
    let pts = domain.samples(n_samples, &mut rng(seed));
    let ratios: Vec<Option<f64>> = pts
        .par_iter()
        .map(|&x| {
            f_phi(params.beta, params.k, params.s, x).ok().map(|fx| {
                let re = fx.re.abs() / x.re.abs().max(tau);
                let im = fx.im.abs() / x.im.abs().max(xi);
                re.max(im)
            })
        })
        .collect();
    let mut worst = Worst::new();
    let mut sup = 0.0f64;
    for (&x, r) in pts.iter().zip(&ratios) {
        let v = match r {
            Some(r) => {
                sup = sup.max(*r);
                r / chi - 1.0
            }
            None => ERROR_VIOLATION,
        };
        worst.observe(v, Witness::at(x, params.k, params.s));
    }
    let params_map = named(&[
        ("beta_re", params.beta.re),
        ("beta_im", params.beta.im),
        ("k", params.k as f64),
        ("s", params.s as f64),
        ("delta_cap", params.delta_cap as f64),
        ("a", domain.a),
        ("b", domain.b),
        ("chi", chi),
        ("tau", tau),
        ("xi", xi),
    ]);
    VerificationReport::finish(worst, BOUNDARY_TOL, pts.len(), seed, params_map).with_metrics(&[("sup_ratio", sup)])
}

/// Largest contraction ratio seen by [`check_rect_contraction`].
pub fn measure_contraction_sup(params: &MapParams, domain: Rectangle, tau: f64, xi: f64, n_samples: usize, seed: u64) -> f64 {
    check_rect_contraction(params, domain, 1.0, tau, xi, n_samples, seed).metrics["sup_ratio"]
}

/// Largest gap between consecutive covered points of `[lo, hi]`, halved,
/// including the two ends.
fn cover_distance(mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
    if xs.is_empty() {
        return hi - lo;
    }
    xs.sort_by(f64::total_cmp);
    let mut gap = (xs[0] - lo).max(hi - xs[xs.len() - 1]);
    for w in xs.windows(2) {
        gap = gap.max(0.5 * (w[1] - w[0]));
    }
    gap.max(0.0)
}

/// Checks `q_β(C₂(β, δ, k)) = R(2k|log β|, kδ)` on samples.
///
/// Interior and boundary samples must map into the rectangle. Boundary
/// images must lie on its boundary and cover it: `boundary_cover` is the
/// largest distance from a point of the rectangle's boundary to the
/// nearest boundary image, and must not exceed `10 · perimeter / n`.
pub fn verify_image_q(beta: f64, delta: f64, k: usize, n_samples: usize, seed: u64) -> Result<VerificationReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("verify_image_q needs k >= 1".into()));
    }
    let region = RegionC2::new(beta, delta, k)?;
    let rect = Rectangle::new(i0_half_width(beta, k), k as f64 * delta);
    let (pts, n_boundary) = region.samples(n_samples, 0.8, &mut rng(seed));
    let images: Vec<Result<Complex64>> = pts.par_iter().map(|&z| q_map(beta, z)).collect();

    let mut worst = Worst::new();
    let mut offset = 0.0f64;
    let (mut top, mut bottom, mut left, mut right) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, (&z, img)) in pts.iter().zip(&images).enumerate() {
        let w = match img {
            Ok(w) => *w,
            Err(_) => {
                worst.observe(ERROR_VIOLATION, Witness::at(z, k, 0));
                continue;
            }
        };
        let excess = rect.excess(w);
        worst.observe(excess, Witness::at(z, k, 0));
        if i < n_boundary {
            offset = offset.max(excess.abs());
            let (dx, dy) = (rect.a - w.re.abs(), rect.b - w.im.abs());
            // Corner images count for both sides they touch.
            if dy <= dx + BOUNDARY_TOL {
                if w.im > 0.0 { top.push(w.re) } else { bottom.push(w.re) }
            }
            if dx <= dy + BOUNDARY_TOL {
                if w.re > 0.0 { right.push(w.im) } else { left.push(w.im) }
            }
        }
    }
    let cover = [
        cover_distance(top, -rect.a, rect.a),
        cover_distance(bottom, -rect.a, rect.a),
        cover_distance(left, -rect.b, rect.b),
        cover_distance(right, -rect.b, rect.b),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        + offset;
    let cover_tol = 10.0 * 4.0 * (rect.a + rect.b) / n_samples as f64;
    if cover > cover_tol {
        worst.observe(cover - cover_tol, Witness::at(cx(rect.a, rect.b), k, 0));
    }
    let params = named(&[("beta", beta), ("delta", delta), ("k", k as f64)]);
    Ok(VerificationReport::finish(worst, BOUNDARY_TOL, pts.len(), seed, params).with_metrics(&[
        ("rect_a", rect.a),
        ("rect_b", rect.b),
        ("boundary_offset", offset),
        ("boundary_cover", cover),
        ("cover_tolerance", cover_tol),
        ("boundary_samples", n_boundary as f64),
    ]))
}

/// Measured `(sup |p_β − q_β|, sup |p_β − p_{β'}|)` over a sample of
/// `C₂(β, δ, k)`.
pub fn approx_gap(beta: f64, beta_prime: Complex64, delta: f64, k: usize, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    let region = RegionC2::new(beta, delta, k)?;
    let (pts, _) = region.samples(n_samples, 0.5, &mut rng(seed));
    let b = cx(beta, 0.0);
    let gaps = pts
        .par_iter()
        .map(|&z| {
            let p = p_map(b, z)?;
            let q = q_map(beta, z)?;
            let pp = p_map(beta_prime, z)?;
            Ok(((p - q).norm(), (p - pp).norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(gaps.into_iter().fold((0.0, 0.0), |(a, b), (x, y)| (a.max(x), b.max(y))))
}

/// `S_{2ε}(C(k)) ⊆ C₁(k) ⊆ S†_{2ε}(C(k))` with `C(k) = q_β(C₂)`,
/// `C₁(k) = p_{β'}(C₂)` and `ε` the measured sum of both gaps.
pub fn verify_set_sandwich(
    beta: f64,
    beta_prime: Complex64,
    delta: f64,
    k: usize,
    n_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let region = RegionC2::new(beta, delta, k)?;
    let (g1, g2) = approx_gap(beta, beta_prime, delta, k, n_samples, seed)?;
    let eps = 1.1 * (g1 + g2) + 1e-12;
    let rect = Rectangle::new(i0_half_width(beta, k), k as f64 * delta);
    let outer = rect.dilate_bound(2.0 * eps);
    let mut r = rng(seed ^ 0x5eed);
    let (pts, _) = region.samples(n_samples, 0.5, &mut r);

    let mut worst = Worst::new();
    let outer_excess: Vec<f64> = pts
        .par_iter()
        .map(|&z| p_map(beta_prime, z).map(|w| outer.excess(w)).unwrap_or(ERROR_VIOLATION))
        .collect();
    for (&z, &e) in pts.iter().zip(&outer_excess) {
        worst.observe(e, Witness::at(z, k, 0));
    }
    let mut inner_checked = 0;
    if let Some(inner) = rect.erode(2.0 * eps) {
        let probes = inner.samples(n_samples, &mut r);
        inner_checked = probes.len();
        let inner_excess: Vec<f64> = probes
            .par_iter()
            .map(|&w| p_inverse(beta_prime, w).map(|z| region.excess(z)).unwrap_or(ERROR_VIOLATION))
            .collect();
        for (&w, &e) in probes.iter().zip(&inner_excess) {
            worst.observe(e, Witness::at(w, k, 0));
        }
    }
    let params = named(&[
        ("beta", beta),
        ("beta_prime_re", beta_prime.re),
        ("beta_prime_im", beta_prime.im),
        ("delta", delta),
        ("k", k as f64),
    ]);
    Ok(VerificationReport::finish(worst, BOUNDARY_TOL, pts.len() + inner_checked, seed, params)
        .with_metrics(&[("eps", eps), ("gap_q", g1), ("gap_beta", g2)]))
}

/// Rejects `β` outside the open uniqueness interval and `Δ < 2`.
pub fn check_uniqueness(beta: f64, delta_cap: usize) -> Result<()> {
    check_beta(beta)?;
    if delta_cap < 2 {
        return Err(Error::InvalidParameter(format!("delta cap must be at least 2, got {delta_cap}")));
    }
    if !uniqueness_interval(delta_cap).contains(beta) {
        let (lo, hi) = uniqueness_interval(delta_cap).bounds();
        return Err(Error::InvalidParameter(format!("beta = {beta} lies outside ({lo}, {hi})")));
    }
    Ok(())
}

struct PointOutcome {
    worst: Worst,
    min_margin: f64,
    max_m: f64,
}

/// Sampled check that `D` is closed under the recurrence at `β'` and keeps
/// `−1` out of its image.
///
/// For every sampled `z ∈ D` and every `(k, s)` with `1 ≤ k + |s| ≤ d` the
/// image `f_{β',k,s}(z)` must lie in `D`; for `k + |s| ≤ Δ` the distance
/// `|f_{β',k,s}(z) + 1|` must stay above [`MARGIN_FLOOR`]. `1 ∈ D` and
/// `−1 ∉ D` are checked directly. A spot-check of the multivariate map on
/// independent coordinates builds, for each tuple `z₁..z_k`, the point
/// `x̃ = h_{β'}⁻¹(exp(mean log h_{β'}(z_i)))` and checks that it lies in `D`
/// with `f(x̃) = F(z₁..z_k)`.
pub fn verify_region_closure(
    beta: f64,
    beta_prime: Complex64,
    delta: f64,
    delta_cap: usize,
    n_samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    check_uniqueness(beta, delta_cap)?;
    let d = delta_cap - 1;
    let region = RegionD::new(beta, beta_prime, delta, d)?;
    let base = region.base();
    let mut r = rng(seed);
    let pts = base.samples(n_samples, &mut r);
    let closure_shapes = step_shapes(d);
    let margin_shapes = step_shapes(delta_cap);

    let outcomes: Vec<PointOutcome> = pts
        .par_iter()
        .map(|&w| {
            let mut worst = Worst::new();
            let mut min_margin = f64::INFINITY;
            let mut max_m = 0.0f64;
            let z = match region.from_base(w) {
                Ok(z) => z,
                Err(_) => {
                    worst.observe(ERROR_VIOLATION, Witness::at(w, 0, 0));
                    return PointOutcome { worst, min_margin, max_m };
                }
            };
            if region.is_square() {
                if let Ok(hp) = h_map(beta_prime, z).and_then(principal_log) {
                    max_m = hp.norm() / (delta * delta);
                }
            }
            for &(k, s) in &margin_shapes {
                let fz = match f_uni(beta_prime, k, s, z) {
                    Ok(v) => v,
                    Err(_) => {
                        worst.observe(ERROR_VIOLATION, Witness::at(z, k, s));
                        continue;
                    }
                };
                min_margin = min_margin.min((fz + 1.0).norm());
                if k + (s.unsigned_abs() as usize) <= d {
                    worst.observe(region.excess(fz), Witness::at(z, k, s));
                }
            }
            PointOutcome { worst, min_margin, max_m }
        })
        .collect();

    let mut worst = Worst::new();
    let mut min_margin = f64::INFINITY;
    let mut max_m = 0.0f64;
    for o in outcomes {
        worst.merge(o.worst);
        min_margin = min_margin.min(o.min_margin);
        max_m = max_m.max(o.max_m);
    }
    worst.observe(MARGIN_FLOOR - min_margin, Witness::at(cx(-1.0, 0.0), 0, 0));

    let one = cx(1.0, 0.0);
    let contains_one = region.contains(one);
    let excludes_minus_one = !region.contains(-one);
    if !contains_one {
        worst.observe(region.excess(one).max(1.0), Witness::at(one, 0, 0));
    }
    if !excludes_minus_one {
        worst.observe(1.0, Witness::at(-one, 0, 0));
    }

    let multi_shapes: Vec<(usize, i32)> = {
        let wide: Vec<_> = closure_shapes.iter().copied().filter(|&(k, _)| k >= 2).collect();
        if wide.is_empty() {
            closure_shapes.iter().copied().filter(|&(k, _)| k >= 1).collect()
        } else {
            wide
        }
    };
    let n_tuples = if multi_shapes.is_empty() { 0 } else { CONVEXITY_TUPLES.min(n_samples) };
    let tuples: Vec<((usize, i32), Vec<Complex64>)> = (0..n_tuples)
        .map(|_| {
            let shape = multi_shapes[r.gen_range(0..multi_shapes.len())];
            let ws = (0..shape.0).map(|_| base.random_point(&mut r)).collect();
            (shape, ws)
        })
        .collect();
    let tuple_results: Vec<(f64, f64, Witness)> = tuples
        .par_iter()
        .map(|((k, s), ws)| convexity_check(&region, *k, *s, ws))
        .collect();
    let mut max_gap = 0.0f64;
    for (v, gap, w) in tuple_results {
        max_gap = max_gap.max(gap);
        worst.observe(v, w);
    }

    let params = named(&[
        ("beta", beta),
        ("beta_prime_re", beta_prime.re),
        ("beta_prime_im", beta_prime.im),
        ("delta", delta),
        ("delta_cap", delta_cap as f64),
    ]);
    let mut metrics = vec![
        ("min_margin", min_margin),
        ("tuples_checked", n_tuples as f64),
        ("max_convexity_gap", max_gap),
        ("contains_one", contains_one as u8 as f64),
        ("excludes_minus_one", excludes_minus_one as u8 as f64),
    ];
    if region.is_square() {
        metrics.push(("m_measured", max_m));
        metrics.push(("eps_delta_m", delta * delta_cap as f64 * max_m));
    }
    Ok(VerificationReport::finish(worst, BOUNDARY_TOL, pts.len(), seed, params).with_metrics(&metrics))
}

/// Returns `(violation, gap, witness)` for one tuple.
fn convexity_check(region: &RegionD, k: usize, s: i32, ws: &[Complex64]) -> (f64, f64, Witness) {
    let run = || -> Result<(f64, f64, Complex64)> {
        let zs = ws.iter().map(|&w| region.from_base(w)).collect::<Result<Vec<_>>>()?;
        let big_f = f_multi(region.beta_prime, s, &zs)?;
        let mut mean = Complex64::new(0.0, 0.0);
        for &z in &zs {
            mean += principal_log(h_map(region.beta_prime, z)?)?;
        }
        mean /= zs.len() as f64;
        let x = h_inverse(region.beta_prime, mean.exp())?;
        let fx = f_uni(region.beta_prime, k, s, x)?;
        let gap = (fx - big_f).norm() / big_f.norm().max(1.0);
        let excess = region.excess(x).max(region.excess(big_f));
        Ok((excess.max(gap - CONVEXITY_TOL), gap, x))
    };
    match run() {
        Ok((v, gap, x)) => (v, gap, Witness::at(x, k, s)),
        Err(_) => (ERROR_VIOLATION, f64::INFINITY, Witness::at(ws[0], k, s)),
    }
}

/// Grid for [`search_delta`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    /// Candidate `δ`, tried in decreasing order.
    pub deltas: Vec<f64>,
    /// Candidate ratios `δ_β / δ`, tried in decreasing order.
    pub ratios: Vec<f64>,
    pub probes: usize,
    pub search_samples: usize,
    pub confirm_samples: usize,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            deltas: vec![0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001],
            ratios: vec![1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001],
            probes: 8,
            search_samples: 2000,
            confirm_samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub found: bool,
    pub beta: f64,
    pub delta_cap: usize,
    pub delta: f64,
    pub delta_beta: f64,
    /// Smallest `|f + 1|` over all probes of the confirming run.
    pub margin: f64,
    pub seed: u64,
    pub reports: Vec<VerificationReport>,
}

/// `β + δ_β e^{2πij/n}` for `j = 0..n`.
pub fn probe_points(beta: f64, delta_beta: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|j| cx(beta, 0.0) + Complex64::from_polar(delta_beta, 2.0 * PI * j as f64 / n as f64)).collect()
}

fn run_probes(beta: f64, delta: f64, delta_beta: f64, delta_cap: usize, grid: &SearchGrid, n: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    probe_points(beta, delta_beta, grid.probes)
        .into_iter()
        .map(|bp| verify_region_closure(beta, bp, delta, delta_cap, n, seed))
        .collect()
}

/// Finds the pair `(δ, δ_β)` on the grid with the largest `δ_β` (ties go to
/// larger `δ`) for which the closure check passes at every probe `β'` on
/// `|β' − β| = δ_β`, first at `search_samples` and then at `confirm_samples`.
pub fn search_delta(beta: f64, delta_cap: usize, grid: &SearchGrid, seed: u64) -> Result<SearchResult> {
    check_uniqueness(beta, delta_cap)?;
    let mut candidates: Vec<(f64, f64)> = grid
        .deltas
        .iter()
        .flat_map(|&d| grid.ratios.iter().map(move |&r| (d, d * r)))
        .collect();
    candidates.sort_by(|x, y| y.1.total_cmp(&x.1).then(y.0.total_cmp(&x.0)));
    for (delta, delta_beta) in candidates {
        let quick = run_probes(beta, delta, delta_beta, delta_cap, grid, grid.search_samples, seed)?;
        if !quick.iter().all(|r| r.passed) {
            continue;
        }
        let reports = run_probes(beta, delta, delta_beta, delta_cap, grid, grid.confirm_samples, seed)?;
        if reports.iter().all(|r| r.passed) {
            let margin = reports.iter().map(|r| r.metrics["min_margin"]).fold(f64::INFINITY, f64::min);
            return Ok(SearchResult { found: true, beta, delta_cap, delta, delta_beta, margin, seed, reports });
        }
    }
    Ok(SearchResult { found: false, beta, delta_cap, delta: 0.0, delta_beta: 0.0, margin: 0.0, seed, reports: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn r(x: f64) -> Complex64 {
        cx(x, 0.0)
    }

    #[test]
    fn rectangle_ops() {
        let rect = Rectangle::new(1.0, 0.5);
        let e = rect.erode(0.1).unwrap();
        assert!((e.a - 0.9).abs() < 1e-15 && (e.b - 0.4).abs() < 1e-15);
        assert_eq!(rect.erode(0.0), Some(rect));
        assert_eq!(rect.erode(0.6), None);
        assert_eq!(Rectangle::new(1.0, 1.0).dilate_bound(0.25), Rectangle::new(1.25, 1.25));
        assert!(rect.contains(cx(-1.0, 0.5)));
        assert!(!rect.contains(cx(0.0, 0.51)));
        assert_eq!(rect.scale(2.0), Rectangle::new(2.0, 1.0));
    }

    #[test]
    fn c2_examples() {
        let region = RegionC2::new(0.5, 0.01, 2).unwrap();
        assert_eq!(region.classify(r(0.0)), Membership::Inside);
        let point = RegionC2::new(0.5, 0.01, 0).unwrap();
        assert!(point.contains(r(0.0)));
        assert!(!point.contains(r(0.01)));
        assert!(RegionC2::new(1.0, 0.01, 1).is_err());
        // The corner of the real extent sits on the boundary.
        let l = region.half_width();
        assert_eq!(region.classify(r(l)), Membership::Boundary);
        assert_eq!(region.classify(r(l + 1e-6)), Membership::Outside);
    }

    #[test]
    fn d_examples() {
        let region = RegionD::new(0.5, r(0.5), 0.001, 2).unwrap();
        assert!(region.contains(r(1.0)));
        assert!(!region.contains(r(-1.0)));
        let square = RegionD::new(1.0, cx(1.0, 0.001), 0.05, 2).unwrap();
        assert!(square.is_square());
        assert!(square.contains(r(1.0)));
        assert!(!square.contains(r(-1.0)));
        assert!(square.contains(r(0.05f64.exp())));
        assert!(!square.contains(r(0.06f64.exp())));
    }

    #[test]
    fn nested_in_k() {
        let mut g = rng(1);
        for _ in 0..1000 {
            let z = cx(g.gen_range(-1.5..1.5), g.gen_range(-0.05..0.05));
            for beta in [0.5, 2.0] {
                let small = RegionC2::new(beta, 0.02, 1).unwrap();
                let large = RegionC2::new(beta, 0.02, 2).unwrap();
                if small.contains(z) {
                    assert!(large.contains(z), "{z} in C2(k=1) but not C2(k=2)");
                }
            }
        }
    }

    #[test]
    fn derivative_grid_sup_sits_at_zero() {
        for delta_cap in [3usize, 4, 5] {
            let d = delta_cap - 1;
            let (lo, hi) = uniqueness_interval(delta_cap).bounds();
            for i in 1..=10 {
                let beta = lo + (hi - lo) * i as f64 / 11.0;
                for k in 1..=d {
                    let (sup, at) = phi_deriv_grid_sup(beta, k, d, 200).unwrap();
                    assert_eq!(at, 0.0);
                    let expected = k as f64 * (1.0 - beta).abs() / (1.0 + beta);
                    assert!((sup - expected).abs() < 1e-10);
                    assert!(sup < k as f64 / d as f64);
                }
            }
        }
    }

    #[test]
    fn rect_contraction_examples() {
        let params = MapParams::new(r(0.5), 1, 0, 3);
        let domain = c0_proxy(0.5, 2, 0.05);
        let eta = measure_eta(&params, domain, 4000, 3).unwrap();
        assert!(eta > 0.0 && eta < 1.0);
        let chi = 0.5 * (1.0 - eta / 2.0);
        let rep = check_rect_contraction(&params, domain, chi, 1e-6, 1e-6, 4000, 3);
        assert!(rep.passed, "{rep:?}");
        assert!(rep.witness.is_none());

        let zero = MapParams::new(r(0.5), 0, 0, 3);
        assert!(check_rect_contraction(&zero, domain, 0.1, 1e-3, 1e-3, 500, 3).passed);

        let sup = measure_contraction_sup(&params, domain, 1e-6, 1e-6, 4000, 3);
        let rep = check_rect_contraction(&params, domain, 0.9 * sup, 1e-6, 1e-6, 4000, 3);
        assert!(!rep.passed);
        let w = rep.witness.unwrap();
        assert!(cx(w.re, w.im).norm() < 0.1, "{w:?}");
    }

    #[test]
    fn passing_contraction_keeps_images_in_scaled_rectangle() {
        let params = MapParams::new(r(0.8), 2, 0, 3);
        let domain = Rectangle::new(0.6, 0.04);
        let sup = measure_contraction_sup(&params, domain, 1e-3, 1e-3, 3000, 5);
        let chi = 1.01 * sup;
        assert!(check_rect_contraction(&params, domain, chi, 1e-3, 1e-3, 3000, 5).passed);
        let scaled = domain.scale(chi);
        let mut g = rng(9);
        for _ in 0..2000 {
            let x = domain.random_point(&mut g);
            assert!(scaled.excess(f_phi(params.beta, 2, 0, x).unwrap()) <= 1e-12);
        }
    }

    #[test]
    fn image_q_examples() {
        let rep = verify_image_q(2.0, 0.01, 1, 10_000, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!((rep.metrics["rect_a"] - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!(rep.metrics["boundary_cover"] <= 1e-3);
        assert_eq!(q_map(2.0, r(0.0)).unwrap(), r(0.0));
        let region = RegionC2::new(2.0, 0.01, 1).unwrap();
        let top = q_map(2.0, cx(0.0, region.imag_bound(0.0))).unwrap();
        assert!((top.im.abs() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn approx_gap_scaling() {
        let (g1, g2) = approx_gap(0.5, r(0.5), 0.02, 2, 4000, 2).unwrap();
        assert_eq!(g2, 0.0);
        let (h1, _) = approx_gap(0.5, r(0.5), 0.01, 2, 4000, 2).unwrap();
        let ratio = g1 / h1;
        assert!((ratio - 4.0).abs() < 0.8, "{ratio}");
        // q agrees with p on the real axis.
        for x in [-0.3, 0.0, 0.2] {
            assert!((q_map(0.5, r(x)).unwrap() - p_map(r(0.5), r(x)).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn sandwich_holds() {
        let rep = verify_set_sandwich(0.5, cx(0.5, 0.0005), 0.02, 2, 3000, 4).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["eps"] > 0.0);
    }

    #[test]
    fn closure_examples() {
        let rep = verify_region_closure(0.5, r(0.5), 0.01, 3, 4000, 11).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["min_margin"] > 0.5);
        assert_eq!(rep.metrics["tuples_checked"], 1000.0);
        assert!(rep.metrics["max_convexity_gap"] < 1e-9);

        let rep = verify_region_closure(1.0, cx(1.0, 0.001), 0.05, 3, 4000, 11).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.metrics["eps_delta_m"] < 1.0);

        assert!(verify_region_closure(3.5, r(3.5), 0.01, 3, 100, 1).is_err());
    }

    #[test]
    fn closure_failure_has_witness() {
        // Far from beta, the image of D escapes.
        let rep = verify_region_closure(0.5, cx(0.5, 0.3), 0.01, 3, 1000, 2).unwrap();
        assert!(!rep.passed);
        assert!(rep.max_violation > 0.0);
        assert!(rep.witness.is_some());
        let json = rep.to_json();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.witness, rep.witness);
    }

    #[test]
    fn report_is_deterministic() {
        let a = verify_region_closure(0.8, cx(0.8, 0.001), 0.02, 3, 1500, 5).unwrap();
        let b = verify_region_closure(0.8, cx(0.8, 0.001), 0.02, 3, 1500, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn search_rejects_outside_interval() {
        assert!(search_delta(3.0, 3, &SearchGrid::default(), 0).is_err());
        assert!(search_delta(0.2, 3, &SearchGrid::default(), 0).is_err());
    }

    #[test]
    fn search_at_one_succeeds() {
        let grid = SearchGrid { confirm_samples: 2000, search_samples: 500, ..SearchGrid::default() };
        let res = search_delta(1.0, 3, &grid, 1).unwrap();
        assert!(res.found && res.delta_beta > 0.0 && res.margin > 0.0);
        let near_edge = search_delta(0.99 * 3.0, 3, &grid, 1).unwrap();
        assert!(near_edge.delta_beta < res.delta_beta);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn erosion_composes(a in 0.0..5.0f64, b in 0.0..5.0f64, e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
            let rect = Rectangle::new(a, b);
            let twice = rect.erode(e1).and_then(|x| x.erode(e2));
            let once = rect.erode(e1 + e2);
            prop_assert_eq!(twice.is_some(), once.is_some());
            if let (Some(x), Some(y)) = (twice, once) {
                prop_assert!((x.a - y.a).abs() < 1e-12 && (x.b - y.b).abs() < 1e-12);
            }
        }

        #[test]
        fn d_always_holds_one_and_not_minus_one(
            beta in 0.2..5.0f64,
            bp_re in -0.05..0.05f64,
            bp_im in -0.05..0.05f64,
            delta in 0.001..0.1f64,
            d in 1usize..5,
        ) {
            let region = RegionD::new(beta, cx(beta + bp_re, bp_im), delta, d).unwrap();
            prop_assert!(region.contains(r(1.0)));
            prop_assert!(!region.contains(r(-1.0)));
        }
    }
}
