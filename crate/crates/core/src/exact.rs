//! Exact ground truth: the cut polynomial `Z_G(β) = Σ_k γ_k β^k` by
//! enumeration over spin configurations, pinned partition functions and the
//! ratio `R_{G,v} = Z⁺/Z⁻`.

use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{PinnedGraph, Spin};

pub const DEFAULT_ENUMERATION_CAP: usize = 30;

/// Above this many free vertices the enumeration is split across threads.
const PARALLEL_THRESHOLD: usize = 18;
/// Number of high-order free vertices fixed per parallel chunk.
const PARALLEL_PREFIX_BITS: usize = 8;
/// `u64` counters are exact up to this many free vertices.
const HARD_CAP: usize = 62;

/// Exact coefficients γ₀..γ_m of the partition function, `m = |E|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "CutPolynomialJson", try_from = "CutPolynomialJson")]
pub struct CutPolynomial {
    coeffs: Vec<BigUint>,
    n_free: usize,
}

#[derive(Serialize, Deserialize)]
struct CutPolynomialJson {
    n_free: usize,
    gammas: Vec<String>,
}

impl From<CutPolynomial> for CutPolynomialJson {
    fn from(p: CutPolynomial) -> Self {
        CutPolynomialJson {
            n_free: p.n_free,
            gammas: p.coeffs.iter().map(|c| c.to_str_radix(10)).collect(),
        }
    }
}

impl TryFrom<CutPolynomialJson> for CutPolynomial {
    type Error = String;

    fn try_from(j: CutPolynomialJson) -> std::result::Result<Self, String> {
        let coeffs = j
            .gammas
            .iter()
            .map(|s| BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| format!("bad integer `{s}`")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CutPolynomial { coeffs, n_free: j.n_free })
    }
}

impl CutPolynomial {
    pub fn new(coeffs: Vec<BigUint>, n_free: usize) -> Self {
        CutPolynomial { coeffs, n_free }
    }

    pub fn from_u64(coeffs: &[u64], n_free: usize) -> Self {
        CutPolynomial { coeffs: coeffs.iter().map(|&c| BigUint::from(c)).collect(), n_free }
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Index of the highest non-zero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// `Z(1)`, the number of configurations.
    pub fn total(&self) -> BigUint {
        self.coeffs.iter().sum()
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect()
    }

    /// Horner evaluation in complex floating point.
    pub fn eval(&self, beta: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * beta + c.to_f64().unwrap_or(f64::INFINITY))
    }
}

impl Mul for &CutPolynomial {
    type Output = CutPolynomial;

    /// Convolution; the cut polynomial of a disjoint union.
    fn mul(self, rhs: &CutPolynomial) -> CutPolynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return CutPolynomial::new(Vec::new(), self.n_free + rhs.n_free);
        }
        let mut out = vec![BigUint::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CutPolynomial::new(out, self.n_free + rhs.n_free)
    }
}

impl Add for &CutPolynomial {
    type Output = CutPolynomial;

    /// Coefficient-wise sum; `n_free` is taken as one more than the larger
    /// operand, matching `Z = Z⁺ + Z⁻`.
    fn add(self, rhs: &CutPolynomial) -> CutPolynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).cloned().unwrap_or_default();
                let b = rhs.coeffs.get(k).cloned().unwrap_or_default();
                a + b
            })
            .collect();
        CutPolynomial::new(coeffs, self.n_free.max(rhs.n_free) + 1)
    }
}

/// A ratio `Z⁺/Z⁻` that may sit at the point at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ratio {
    Finite(Complex64),
    Infinite,
}

impl Ratio {
    /// Builds `num/den` from a projective pair; `None` when both vanish.
    pub fn from_pair(num: Complex64, den: Complex64) -> Option<Ratio> {
        match (num.is_zero(), den.is_zero()) {
            (true, true) => None,
            (_, true) => Some(Ratio::Infinite),
            _ => Some(Ratio::Finite(num / den)),
        }
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            Ratio::Finite(z) => Some(z),
            Ratio::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Ratio::Infinite)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(z) => write!(f, "{z}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

/// A full spin assignment that extends the pins of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfig {
    assignment: Vec<Spin>,
}

impl SpinConfig {
    /// The configuration whose free vertices (in increasing order) read
    /// their spin from the bits of `mask`, bit set meaning minus.
    pub fn from_mask(g: &PinnedGraph, mask: u64) -> Self {
        let mut bit = 0;
        let assignment = (0..g.n_vertices())
            .map(|v| match g.pin(v) {
                Some(s) => s,
                None => {
                    let s = if mask >> bit & 1 == 1 { Spin::Minus } else { Spin::Plus };
                    bit += 1;
                    s
                }
            })
            .collect();
        SpinConfig { assignment }
    }

    pub fn new(assignment: Vec<Spin>) -> Self {
        SpinConfig { assignment }
    }

    pub fn spin(&self, v: usize) -> Spin {
        self.assignment[v]
    }

    pub fn is_consistent(&self, g: &PinnedGraph) -> bool {
        self.assignment.len() == g.n_vertices()
            && g.pins().iter().all(|(&v, &s)| self.assignment[v] == s)
    }

    /// Number of bichromatic edges.
    pub fn cut_size(&self, g: &PinnedGraph) -> usize {
        g.edges().iter().filter(|&&(u, v)| self.assignment[u] != self.assignment[v]).count()
    }

    /// `w_{G,β}(σ) = β^{cut(σ)}` as a product over edges.
    pub fn weight(&self, g: &PinnedGraph, beta: Complex64) -> Complex64 {
        g.edges()
            .iter()
            .filter(|&&(u, v)| self.assignment[u] != self.assignment[v])
            .fold(Complex64::new(1.0, 0.0), |acc, _| acc * beta)
    }
}

/// `Z⁺_{G,v}`, `Z⁻_{G,v}` at a given β and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinnedRatio {
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    pub ratio: Ratio,
}

/// Brute-force enumerator with a cap on the number of free vertices.
#[derive(Clone, Copy, Debug)]
pub struct ExactEngine {
    cap: usize,
}

impl Default for ExactEngine {
    fn default() -> Self {
        ExactEngine { cap: DEFAULT_ENUMERATION_CAP }
    }
}

impl ExactEngine {
    pub fn with_cap(cap: usize) -> Self {
        ExactEngine { cap: cap.min(HARD_CAP) }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn check_cap(&self, g: &PinnedGraph) -> Result<()> {
        let free = g.n_free();
        if free > self.cap {
            return Err(Error::EnumerationCap { free, cap: self.cap });
        }
        Ok(())
    }

    pub fn cut_polynomial(&self, g: &PinnedGraph) -> Result<CutPolynomial> {
        self.check_cap(g)?;
        let counts = cut_counts(g);
        Ok(CutPolynomial::from_u64(&counts, g.n_free()))
    }

    /// `Σ_σ w(σ)` straight from the definition, one configuration at a time.
    /// Independent of the Gray-code path; used as a cross-check.
    pub fn evaluate_direct(&self, g: &PinnedGraph, beta: Complex64) -> Result<Complex64> {
        self.check_cap(g)?;
        let total = 1u64 << g.n_free();
        Ok((0..total).map(|mask| SpinConfig::from_mask(g, mask).weight(g, beta)).sum())
    }

    /// Cut polynomials with `v` additionally pinned plus and minus.
    pub fn pinned_polynomials(&self, g: &PinnedGraph, v: usize) -> Result<(CutPolynomial, CutPolynomial)> {
        if v >= g.n_vertices() {
            return Err(Error::VertexOutOfRange { vertex: v, n: g.n_vertices() });
        }
        if g.pin(v).is_some() {
            return Err(Error::PinnedVertex(v));
        }
        if g.is_isolated(v) {
            return Err(Error::IsolatedVertex(v));
        }
        let plus = self.cut_polynomial(&g.with_pin(v, Spin::Plus)?)?;
        let minus = self.cut_polynomial(&g.with_pin(v, Spin::Minus)?)?;
        Ok((plus, minus))
    }

    pub fn pinned_ratio(&self, g: &PinnedGraph, v: usize, beta: Complex64) -> Result<PinnedRatio> {
        let (plus, minus) = self.pinned_polynomials(g, v)?;
        let z_plus = plus.eval(beta);
        let z_minus = minus.eval(beta);
        let ratio = if z_minus.is_zero() { Ratio::Infinite } else { Ratio::Finite(z_plus / z_minus) };
        Ok(PinnedRatio { z_plus, z_minus, ratio })
    }
}

pub fn cut_polynomial(g: &PinnedGraph) -> Result<CutPolynomial> {
    ExactEngine::default().cut_polynomial(g)
}

pub fn pinned_ratio(g: &PinnedGraph, v: usize, beta: Complex64) -> Result<PinnedRatio> {
    ExactEngine::default().pinned_ratio(g, v, beta)
}

/// Number of configurations per cut size. Caller has checked the cap.
fn cut_counts(g: &PinnedGraph) -> Vec<u64> {
    let free = g.free_vertices();
    let mut spins: Vec<i8> = (0..g.n_vertices())
        .map(|v| if g.pin(v) == Some(Spin::Minus) { -1 } else { 1 })
        .collect();
    let len = g.n_edges() + 1;

    if free.len() < PARALLEL_THRESHOLD {
        let mut counts = vec![0u64; len];
        gray_walk(g, &mut spins, &free, &mut counts);
        return counts;
    }

    let split = free.len() - PARALLEL_PREFIX_BITS;
    let (low, high) = free.split_at(split);
    (0u64..1 << PARALLEL_PREFIX_BITS)
        .into_par_iter()
        .map(|prefix| {
            let mut local = spins.clone();
            for (bit, &v) in high.iter().enumerate() {
                local[v] = if prefix >> bit & 1 == 1 { -1 } else { 1 };
            }
            let mut counts = vec![0u64; len];
            gray_walk(g, &mut local, low, &mut counts);
            counts
        })
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Visits all assignments of `vars` in reflected Gray-code order, updating
/// the cut size by the degree of the flipped vertex at each step.
fn gray_walk(g: &PinnedGraph, spins: &mut [i8], vars: &[usize], counts: &mut [u64]) {
    let mut cut = g.edges().iter().filter(|&&(u, v)| spins[u] != spins[v]).count() as isize;
    counts[cut as usize] += 1;
    for step in 1u64..1 << vars.len() {
        let v = vars[step.trailing_zeros() as usize];
        for &w in g.neighbors(v) {
            cut += if spins[w] == spins[v] { 1 } else { -1 };
        }
        spins[v] = -spins[v];
        counts[cut as usize] += 1;
    }
}
