//! Barvinok-style approximation of `Z_G(β)`: expand `log p(t)` for
//! `p(t) = Z(1 + t(β − 1))` around `t = 0`, truncate, and evaluate at `t = 1`.
//!
//! The truncation order comes from the nearest root of `p`: with all roots
//! outside the disc of radius `ρ > 1`, the tail after order `m` is at most
//! `deg · ρ^{−(m+1)} / ((m+1)(1 − 1/ρ))`.

use std::io::Write;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{CutPolynomial, ExactEngine};
use crate::graph::PinnedGraph;
use crate::maps::uniqueness_interval;
use crate::zeros::fisher_zeros;

/// Truncated series `log p(t) ≈ log p(0) + Σ_{j≤m} c_j t^j` along `[1, β]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorLogSeries {
    pub base_value: Complex64,
    /// `c₁..c_m`.
    pub coeffs: Vec<Complex64>,
    pub m: usize,
    pub segment: (Complex64, Complex64),
}

impl TaylorLogSeries {
    /// `exp(log p(0) + Σ c_j)`.
    pub fn estimate(&self) -> Complex64 {
        (self.base_value + self.coeffs.iter().sum::<Complex64>()).exp()
    }
}

/// `c₁..c_m` of `log p(t)` from `j c_j = j a_j − Σ_{i<j} i c_i a_{j−i}`,
/// `a_j = p_j / p₀`.
pub fn log_taylor_coeffs(p: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    let p0 = p.first().copied().unwrap_or_default();
    if p0.is_zero() {
        return Err(Error::InvalidParameter("log series needs p(0) != 0".into()));
    }
    let a = |j: usize| p.get(j).map_or(Complex64::zero(), |&pj| pj / p0);
    let mut c = vec![Complex64::zero(); m + 1];
    for j in 1..=m {
        let mut acc = a(j) * j as f64;
        for i in 1..j {
            acc -= c[i] * a(j - i) * i as f64;
        }
        c[j] = acc / j as f64;
    }
    c.remove(0);
    Ok(c)
}

fn binomial_row(k: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for j in 1..=k {
        let next = &row[j - 1] * BigUint::from(k - j + 1) / BigUint::from(j);
        row.push(next);
    }
    row
}

/// Integer parts `Σ_{k≥j} γ_k C(k, j)` of the coefficients of
/// `p(t) = Σ_j (β − 1)^j Σ_{k≥j} γ_k C(k, j) t^j`; exact.
pub fn shifted_integer_coeffs(poly: &CutPolynomial) -> Vec<BigUint> {
    let deg = poly.degree().unwrap_or(0);
    let mut out = vec![BigUint::zero(); deg + 1];
    for (k, g) in poly.coeffs().iter().enumerate().take(deg + 1) {
        if g.is_zero() {
            continue;
        }
        for (j, c) in binomial_row(k).into_iter().enumerate() {
            out[j] += g * c;
        }
    }
    out
}

/// Coefficients `p_j` of `p(t) = Z(1 + t(β − 1))`.
pub fn shifted_coeffs(poly: &CutPolynomial, beta: Complex64) -> Vec<Complex64> {
    let step = beta - 1.0;
    let mut scale = Complex64::one();
    shifted_integer_coeffs(poly)
        .iter()
        .map(|s| {
            let v = scale * s.to_f64().unwrap_or(f64::INFINITY);
            scale *= step;
            v
        })
        .collect()
}

/// `deg · ρ^{−(m+1)} / ((m+1)(1 − 1/ρ))`.
pub fn tail_bound(deg: usize, rho: f64, m: usize) -> f64 {
    if rho.is_infinite() || deg == 0 {
        return 0.0;
    }
    deg as f64 * rho.powi(-(m as i32 + 1)) / ((m + 1) as f64 * (1.0 - 1.0 / rho))
}

/// Smallest `m` whose tail bound is at most `ln(1 + ε)`, so that the
/// relative error of the estimate is at most `ε`.
pub fn truncation_order(deg: usize, rho: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if !(rho > 1.0) {
        return Err(Error::Certificate { rho });
    }
    let target = eps.ln_1p();
    let mut m = 0;
    while tail_bound(deg, rho, m) > target {
        m += 1;
    }
    Ok(m)
}

/// Minimum modulus of the roots of `p(t)`: `t_i = (β_i − 1)/(β − 1)` for the
/// Fisher zeros `β_i`. `+∞` when `β = 1` or `Z` has no zeros.
pub fn root_radius(poly: &CutPolynomial, beta: Complex64) -> Result<f64> {
    let step = beta - 1.0;
    if step.is_zero() {
        return Ok(f64::INFINITY);
    }
    let zs = fisher_zeros(poly)?;
    Ok(zs.roots.iter().map(|r| ((r - 1.0) / step).norm()).fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarvinokEstimate {
    pub z_hat: Complex64,
    pub m_used: usize,
    /// Zero-free certificate: the smallest `|t|` with `p(t) = 0`.
    pub rho: f64,
    /// Whether `Re β` lies in the open uniqueness interval of the graph's `Δ`.
    pub in_strip: bool,
    pub series: TaylorLogSeries,
}

/// Truncated series of exactly order `m`, without a certificate.
pub fn barvinok_with_order(poly: &CutPolynomial, beta: Complex64, m: usize) -> Result<TaylorLogSeries> {
    let p = shifted_coeffs(poly, beta);
    let coeffs = log_taylor_coeffs(&p, m)?;
    Ok(TaylorLogSeries {
        base_value: p[0].ln(),
        coeffs,
        m,
        segment: (Complex64::one(), beta),
    })
}

/// Certified estimate from a known cut polynomial. Fails with
/// [`Error::Certificate`] when a root of `p` lies in the closed unit disc.
pub fn barvinok_from_poly(poly: &CutPolynomial, beta: Complex64, eps: f64, delta_cap: usize) -> Result<BarvinokEstimate> {
    let rho = root_radius(poly, beta)?;
    let deg = poly.degree().unwrap_or(0);
    let m_used = if (beta - 1.0).is_zero() { 0 } else { truncation_order(deg, rho, eps)? };
    let series = barvinok_with_order(poly, beta, m_used)?;
    Ok(BarvinokEstimate {
        z_hat: series.estimate(),
        m_used,
        rho,
        in_strip: uniqueness_interval(delta_cap).contains(beta.re),
        series,
    })
}

pub fn barvinok_estimate(g: &PinnedGraph, beta: Complex64, eps: f64) -> Result<BarvinokEstimate> {
    barvinok_estimate_with(&ExactEngine::default(), g, beta, eps)
}

pub fn barvinok_estimate_with(engine: &ExactEngine, g: &PinnedGraph, beta: Complex64, eps: f64) -> Result<BarvinokEstimate> {
    let poly = engine.cut_polynomial(g)?;
    barvinok_from_poly(&poly, beta, eps, g.delta_cap())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub beta_re: f64,
    pub beta_im: f64,
    pub eps: f64,
    pub m_used: usize,
    pub rho: f64,
    /// `|Ẑ − Z| / |Z|`; NaN without a certificate.
    pub rel_error: f64,
    pub certified: bool,
    /// Certificate holds and the error is within `ε`.
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    /// Rows where the certificate held but the error exceeded `ε`.
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.certified && !r.ok).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(e.to_string());
        w.write_record(["beta_re", "beta_im", "eps", "m_used", "rho", "rel_error", "ok"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.beta_re.to_string(),
                r.beta_im.to_string(),
                r.eps.to_string(),
                r.m_used.to_string(),
                r.rho.to_string(),
                r.rel_error.to_string(),
                r.ok.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidParameter(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Runs the estimator over every `(β, ε)` pair and compares with the exact
/// value of the cut polynomial.
pub fn error_report(g: &PinnedGraph, betas: &[Complex64], eps_list: &[f64]) -> Result<ErrorReport> {
    let poly = ExactEngine::default().cut_polynomial(g)?;
    let jobs: Vec<(Complex64, f64)> = betas.iter().flat_map(|&b| eps_list.iter().map(move |&e| (b, e))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(beta, eps)| {
            let row = |m_used, rho, rel_error: f64, certified| ErrorRow {
                beta_re: beta.re,
                beta_im: beta.im,
                eps,
                m_used,
                rho,
                rel_error,
                certified,
                ok: certified && rel_error <= eps,
            };
            match barvinok_from_poly(&poly, beta, eps, g.delta_cap()) {
                Ok(est) => {
                    let exact = poly.eval(beta);
                    Ok(row(est.m_used, est.rho, (est.z_hat - exact).norm() / exact.norm(), true))
                }
                Err(Error::Certificate { rho }) => Ok(row(0, rho, f64::NAN, false)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorReport { rows })
}
