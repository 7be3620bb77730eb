//! Fisher zeros: complex roots of `Z_G(β)` and their distance to the
//! uniqueness interval.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{linalg::balancing::balance_parlett_reinsch, DMatrix, Schur};
use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{CutPolynomial, ExactEngine};
use crate::graph::{generate_family, Family};
use crate::maps::uniqueness_interval;

/// Roots closer than this are merged into one cluster.
pub const CLUSTER_RADIUS: f64 = 1e-7;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    /// All roots with multiplicity, sorted by real then imaginary part.
    pub roots: Vec<Complex64>,
    pub clusters: Vec<RootCluster>,
    /// `max |Z(r)| / Σ|γ_k||r|^k` over the roots.
    pub residual: f64,
    /// True for a constant polynomial (no zeros).
    pub degenerate: bool,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Value and derivative of `Σ c_k x^k` by Horner's rule.
fn horner(coeffs: &[f64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn relative_residual(coeffs: &[f64], x: Complex64) -> f64 {
    let (p, _) = horner(coeffs, x);
    let r = x.norm();
    let scale = coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.abs());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// Rational shifts `num / 2^k` tried when the QR iteration stalls; a
/// spectrum symmetric under `x ↦ −x` can defeat the double-shift sweep.
const RETRY_SHIFTS: [(i64, u32); 3] = [(1, 3), (-3, 4), (5, 5)];

fn companion_eigenvalues(coeffs: &[f64]) -> Option<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    balance_parlett_reinsch(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, SCHUR_MAX_ITER.max(200 * n))?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

fn check_real_poly(coeffs: &[f64]) -> Result<()> {
    let n = coeffs.len().saturating_sub(1);
    if n > 0 && (coeffs[n] == 0.0 || !coeffs.iter().all(|c| c.is_finite())) {
        return Err(Error::InvalidParameter("polynomial needs a finite nonzero leading coefficient".into()));
    }
    Ok(())
}

fn polish(coeffs: &[f64], roots: &mut [Complex64]) {
    for r in roots.iter_mut() {
        let (p, dp) = horner(coeffs, *r);
        if dp.norm() > 0.0 {
            let polished = *r - p / dp;
            if polished.is_finite() && relative_residual(coeffs, polished) < relative_residual(coeffs, *r) {
                *r = polished;
            }
        }
    }
}

fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Roots of `Σ c_k x^k` (`c` low order first, leading term nonzero) from
/// the eigenvalues of the balanced companion matrix, each refined by one
/// Newton step when that lowers the residual.
pub fn real_poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    check_real_poly(coeffs)?;
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    let mut roots = companion_eigenvalues(coeffs).ok_or(Error::RootFinding)?;
    polish(coeffs, &mut roots);
    sort_roots(&mut roots);
    Ok(roots)
}

/// As [`real_poly_roots`] for an integer polynomial, retrying on exact
/// Taylor shifts `p(x + c)` when the eigenvalue iteration fails.
fn int_poly_roots(p: &[BigInt]) -> Result<Vec<Complex64>> {
    let coeffs: Vec<f64> = p.iter().map(big_to_f64).collect();
    check_real_poly(&coeffs)?;
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    let mut found = companion_eigenvalues(&coeffs);
    for &(num, k) in &RETRY_SHIFTS {
        if found.is_some() {
            break;
        }
        let shifted: Vec<f64> = taylor_shift(p, num, k).iter().map(big_to_f64).collect();
        let c = num as f64 / (1u64 << k) as f64;
        found = companion_eigenvalues(&shifted).map(|rs| rs.into_iter().map(|r| r + c).collect());
    }
    let mut roots = found.ok_or(Error::RootFinding)?;
    polish(&coeffs, &mut roots);
    Ok(roots)
}

fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `2^{km} p(x + num/2^k)` with `m = deg p`, exactly.
fn taylor_shift(p: &[BigInt], num: i64, k: u32) -> Vec<BigInt> {
    let m = p.len() - 1;
    let den = BigInt::from(1u64 << k);
    let num = BigInt::from(num);
    let mut r = vec![p[m].clone()];
    let mut scale = BigInt::one();
    for j in (0..m).rev() {
        scale *= &den;
        // r ← r · (den x + num) + p_j den^{m−j}
        let mut next = vec![BigInt::zero(); r.len() + 1];
        for (i, c) in r.iter().enumerate() {
            next[i] += c * &num;
            next[i + 1] += c * &den;
        }
        next[0] += &p[j] * &scale;
        r = next;
    }
    r
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn is_constant(p: &[BigInt]) -> bool {
    p.len() <= 1
}

/// Divides out the content and makes the leading coefficient positive.
fn primitive(p: Vec<BigInt>) -> Vec<BigInt> {
    let p = trim(p);
    let content = p.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if content.is_zero() {
        return p;
    }
    let content = if p.last().is_some_and(|c| c.sign() == Sign::Minus) { -content } else { content };
    p.into_iter().map(|c| c / &content).collect()
}

fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    if p.len() <= 1 {
        return vec![BigInt::zero()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Pseudo-remainder of `a` by `b` (`b` nonzero).
fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (i, c) in b.iter().enumerate() {
            r[dr - db + i] -= &lr * c;
        }
        r.pop();
        r = primitive_or_zero(r);
    }
    trim(r)
}

fn primitive_or_zero(p: Vec<BigInt>) -> Vec<BigInt> {
    let p = trim(p);
    if p.iter().all(Zero::is_zero) {
        vec![BigInt::zero()]
    } else {
        primitive(p)
    }
}

fn poly_gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let (mut a, mut b) = (primitive(a.to_vec()), primitive_or_zero(b.to_vec()));
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = pseudo_rem(&a, &b);
        a = b;
        b = primitive_or_zero(r);
    }
    primitive(a)
}

/// Exact quotient `a / b` of primitive integer polynomials with `b | a`.
fn exact_div(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = b.len() - 1;
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &b[db];
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    debug_assert!(r.iter().all(Zero::is_zero), "inexact polynomial division");
    trim(q)
}

/// `[h₁, h₂, ...]` where `h_i` is the square-free product of the factors of
/// `p` with multiplicity at least `i`. Every root of `p` with multiplicity
/// `m` is a simple root of exactly `h₁..h_m`.
fn multiplicity_layers(p: &[BigInt]) -> Vec<Vec<BigInt>> {
    let mut chain = vec![primitive(p.to_vec())];
    while !is_constant(chain.last().unwrap()) {
        let g = chain.last().unwrap();
        chain.push(poly_gcd(g, &derivative(g)));
    }
    chain.windows(2).map(|w| exact_div(&w[0], &w[1])).collect()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Groups roots whose pairwise distance chains stay below `radius`.
pub fn cluster_roots(roots: &[Complex64], radius: f64) -> Vec<RootCluster> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match out.iter_mut().find(|(r, _, _)| *r == root) {
            Some(entry) => {
                entry.1 += roots[i];
                entry.2 += 1;
            }
            None => out.push((root, roots[i], 1)),
        }
    }
    out.into_iter()
        .map(|(_, sum, m)| RootCluster { center: sum / m as f64, multiplicity: m })
        .collect()
}

/// All complex roots of the cut polynomial.
///
/// Trailing zero coefficients above the degree are dropped and zeros at
/// `β = 0` are split off exactly. The rest is split exactly over the
/// integers into square-free layers (repeated gcd with the derivative), so
/// the floating-point solver only ever sees simple roots; each layer has
/// its content divided out before conversion to `f64`.
pub fn fisher_zeros(poly: &CutPolynomial) -> Result<ZeroSet> {
    let Some(degree) = poly.degree() else {
        return Ok(ZeroSet { roots: Vec::new(), clusters: Vec::new(), residual: 0.0, degenerate: true });
    };
    let coeffs = &poly.coeffs()[..=degree];
    let low = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let core: Vec<BigInt> = coeffs[low..].iter().map(|c| BigInt::from(c.clone())).collect();
    let mut roots = vec![Complex64::zero(); low];
    for layer in multiplicity_layers(&core) {
        roots.extend(int_poly_roots(&layer)?);
    }
    sort_roots(&mut roots);

    let full: Vec<f64> = coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect();
    let residual = roots.iter().map(|&r| relative_residual(&full, r)).fold(0.0, f64::max);
    let clusters = cluster_roots(&roots, CLUSTER_RADIUS);
    Ok(ZeroSet { roots, clusters, residual, degenerate: degree == 0 })
}

/// Relative error of `γ_m Π r_i = (−1)^m γ₀`. Returns 0 when both sides vanish.
pub fn vieta_error(poly: &CutPolynomial, zs: &ZeroSet) -> f64 {
    let Some(m) = poly.degree() else { return 0.0 };
    let lead = poly.coeffs()[m].to_f64().unwrap_or(f64::INFINITY);
    let c0 = poly.coeffs()[0].to_f64().unwrap_or(f64::INFINITY);
    let prod = zs.roots.iter().fold(Complex64::new(lead, 0.0), |acc, &r| acc * r);
    let target = if m % 2 == 0 { c0 } else { -c0 };
    let err = (prod - target).norm();
    if target == 0.0 {
        err
    } else {
        err / target.abs()
    }
}

/// Largest `|r − conj(r')|` over roots paired with their nearest conjugate.
pub fn conjugate_asymmetry(zs: &ZeroSet) -> f64 {
    zs.roots
        .iter()
        .map(|r| zs.roots.iter().map(|s| (r.conj() - s).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// The closed interval `[lo + shrink, hi − shrink]` of the uniqueness
/// interval for `Δ`; unbounded above when `Δ ≤ 2`.
pub fn shrunk_interval(delta_cap: usize, shrink: f64) -> Result<(f64, f64)> {
    let (lo, hi) = uniqueness_interval(delta_cap).bounds();
    let half = 0.5 * (hi - lo);
    if !(shrink >= 0.0) || shrink >= half {
        return Err(Error::InvalidParameter(format!("shrink {shrink} outside [0, {half})")));
    }
    Ok((lo + shrink, hi - shrink))
}

fn distance_to_interval(z: Complex64, lo: f64, hi: f64) -> f64 {
    let x = z.re.clamp(lo, hi);
    (z - x).norm()
}

/// Minimum distance from a root to the shrunk interval, with the root that
/// attains it; `+∞` when there are no roots.
pub fn zero_free_margin_with_root(zs: &ZeroSet, delta_cap: usize, shrink: f64) -> Result<(f64, Option<Complex64>)> {
    let (lo, hi) = shrunk_interval(delta_cap, shrink)?;
    let mut best = (f64::INFINITY, None);
    for &r in &zs.roots {
        let d = distance_to_interval(r, lo, hi);
        if d < best.0 {
            best = (d, Some(r));
        }
    }
    Ok(best)
}

pub fn zero_free_margin(zs: &ZeroSet, delta_cap: usize, shrink: f64) -> Result<f64> {
    Ok(zero_free_margin_with_root(zs, delta_cap, shrink)?.0)
}

/// One block of graphs to scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub family: Family,
    pub sizes: Vec<usize>,
    /// Vertex degree for random regular graphs; ignored otherwise.
    pub degree: usize,
    pub seeds: Vec<u64>,
}

impl ScanSpec {
    pub fn new(family: Family, sizes: impl IntoIterator<Item = usize>) -> Self {
        ScanSpec { family, sizes: sizes.into_iter().collect(), degree: 0, seeds: vec![0] }
    }

    pub fn random_regular(degree: usize, sizes: impl IntoIterator<Item = usize>, seeds: impl IntoIterator<Item = u64>) -> Self {
        ScanSpec {
            family: Family::RandomRegular,
            sizes: sizes.into_iter().collect(),
            degree,
            seeds: seeds.into_iter().collect(),
        }
    }

    fn jobs(&self) -> Vec<(Family, usize, usize, u64)> {
        let seeds: &[u64] = if self.family == Family::RandomRegular { &self.seeds } else { &[0] };
        self.sizes
            .iter()
            .flat_map(|&n| seeds.iter().map(move |&s| (self.family, n, self.degree, s)))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub family: String,
    pub n: usize,
    /// `Δ` of the interval the margin is measured against.
    pub delta: usize,
    /// Maximum vertex degree of the graph.
    pub degree: usize,
    pub num_zeros: usize,
    pub margin: f64,
    pub min_root_re: f64,
    pub min_root_im: f64,
    pub seed: u64,
    pub residual: f64,
    pub roots: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub shrink: f64,
    pub rows: Vec<ScanRow>,
    pub min_margin: f64,
}

impl ScanReport {
    pub fn all_positive(&self) -> bool {
        self.rows.iter().all(|r| r.margin > 0.0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidParameter(e.to_string());
        w.write_record(["family", "n", "delta", "degree", "num_zeros", "margin", "min_root_re", "min_root_im"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.family.clone(),
                r.n.to_string(),
                r.delta.to_string(),
                r.degree.to_string(),
                r.num_zeros.to_string(),
                r.margin.to_string(),
                r.min_root_re.to_string(),
                r.min_root_im.to_string(),
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

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

/// Generates every graph of `specs`, finds its zeros and measures the margin
/// against `B_Δ` shrunk by `shrink`, where `Δ` is `delta_cap` if given and
/// the graph's own degree cap otherwise.
pub fn scan_family(specs: &[ScanSpec], delta_cap: Option<usize>, shrink: f64, engine: &ExactEngine) -> Result<ScanReport> {
    let jobs: Vec<_> = specs.iter().flat_map(ScanSpec::jobs).collect();
    let rows = jobs
        .par_iter()
        .map(|&(family, n, degree, seed)| {
            let g = generate_family(family, n, degree, seed)?;
            let poly = engine.cut_polynomial(&g)?;
            let zs = fisher_zeros(&poly)?;
            let delta = delta_cap.unwrap_or(g.delta_cap());
            let (margin, root) = zero_free_margin_with_root(&zs, delta, shrink)?;
            let root = root.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            Ok(ScanRow {
                family: family.name().to_string(),
                n,
                delta,
                degree: g.max_degree(),
                num_zeros: zs.len(),
                margin,
                min_root_re: root.re,
                min_root_im: root.im,
                seed,
                residual: zs.residual,
                roots: zs.roots,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(ScanReport { shrink, rows, min_margin })
}

/// Parses `a..b` (inclusive), `a..=b`, a comma list, or a single size.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidParameter(format!("bad size range `{s}`"));
    let num = |t: &str| usize::from_str(t.trim()).map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::cut_polynomial;
    use crate::graph::PinnedGraph;
    use proptest::prelude::*;

    fn zeros_of(family: Family, n: usize) -> ZeroSet {
        fisher_zeros(&cut_polynomial(&generate_family(family, n, 0, 0).unwrap()).unwrap()).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| (x - y).norm() < tol))
    }

    #[test]
    fn small_examples() {
        let k2 = fisher_zeros(&CutPolynomial::from_u64(&[2, 2], 2)).unwrap();
        assert!(close(&k2.roots, &[Complex64::new(-1.0, 0.0)], 1e-12));

        let tri = fisher_zeros(&CutPolynomial::from_u64(&[2, 0, 6, 0], 3)).unwrap();
        let y = 1.0 / 3f64.sqrt();
        assert!(close(&tri.roots, &[Complex64::new(0.0, y), Complex64::new(0.0, -y)], 1e-12));

        let c4 = zeros_of(Family::Cycle, 4);
        let (a, b) = (2f64.sqrt() - 1.0, 2f64.sqrt() + 1.0);
        let want = [a, -a, b, -b].map(|t| Complex64::new(0.0, t));
        assert!(close(&c4.roots, &want, 1e-8), "{:?}", c4.roots);
        assert!(c4.residual < 1e-12);
    }

    #[test]
    fn degenerate_and_peeled() {
        let constant = fisher_zeros(&CutPolynomial::from_u64(&[4, 0], 2)).unwrap();
        assert!(constant.degenerate && constant.is_empty());
        // β² (3 + β): two exact zeros at the origin.
        let p = CutPolynomial::from_u64(&[0, 0, 3, 1], 3);
        let zs = fisher_zeros(&p).unwrap();
        assert_eq!(zs.roots.iter().filter(|r| r.norm() == 0.0).count(), 2);
        assert_eq!(zs.clusters.iter().find(|c| c.center.norm() == 0.0).unwrap().multiplicity, 2);
        assert!(vieta_error(&p, &zs) < 1e-12);
    }

    #[test]
    fn paths_have_a_single_cluster_at_minus_one() {
        let zs = zeros_of(Family::Path, 6);
        assert_eq!(zs.len(), 5);
        assert!(zs.roots.iter().all(|r| (r + 1.0).norm() < 1e-12));
        assert_eq!(zs.clusters.len(), 1);
        assert_eq!(zs.clusters[0].multiplicity, 5);
    }

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn integer_helpers() {
        // (x + 1)^2 (x^2 + 3) = x^4 + 2x^3 + 4x^2 + 6x + 3
        let p = ints(&[3, 6, 4, 2, 1]);
        let layers = multiplicity_layers(&p);
        assert_eq!(layers, vec![ints(&[3, 3, 1, 1]), ints(&[1, 1])]);
        assert_eq!(poly_gcd(&p, &ints(&[1, 1])), ints(&[1, 1]));
        assert_eq!(exact_div(&p, &ints(&[1, 1])), ints(&[3, 3, 1, 1]));
        // 8^2 (x + 1/8)^2 = 64x^2 + 16x + 1
        assert_eq!(taylor_shift(&ints(&[0, 0, 1]), 1, 3), ints(&[1, 16, 64]));
        assert_eq!(primitive(ints(&[-4, 0, -6])), ints(&[2, 0, 3]));
    }

    #[test]
    fn margin_examples() {
        let k2 = fisher_zeros(&CutPolynomial::from_u64(&[2, 2], 2)).unwrap();
        assert!((zero_free_margin(&k2, 3, 0.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);

        let c4 = zeros_of(Family::Cycle, 4);
        let m = zero_free_margin(&c4, 3, 0.0).unwrap();
        let a = 2f64.sqrt() - 1.0;
        assert!((m - (1.0 / 9.0 + a * a).sqrt()).abs() < 1e-9);
        assert!(m >= a);

        let empty = ZeroSet { roots: vec![], clusters: vec![], residual: 0.0, degenerate: true };
        assert_eq!(zero_free_margin(&empty, 3, 0.0).unwrap(), f64::INFINITY);
        assert!(zero_free_margin(&k2, 3, 2.0).is_err());
    }

    #[test]
    fn scan_examples() {
        let engine = ExactEngine::default();
        let cycles = scan_family(&[ScanSpec::new(Family::Cycle, 3..=12)], Some(3), 0.05, &engine).unwrap();
        assert_eq!(cycles.rows.len(), 10);
        assert!(cycles.all_positive());

        let complete = scan_family(&[ScanSpec::new(Family::Complete, 3..=5)], None, 0.05, &engine).unwrap();
        assert!(complete.all_positive());

        let edges = scan_family(&[ScanSpec::new(Family::Path, [2])], Some(3), 0.0, &engine).unwrap();
        assert!((edges.min_margin - 4.0 / 3.0).abs() < 1e-9);

        let csv = cycles.to_csv();
        assert!(csv.starts_with("family,n,delta,degree,num_zeros,margin,min_root_re,min_root_im\n"));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_sizes("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_sizes("3..=4").unwrap(), vec![3, 4]);
        assert_eq!(parse_sizes("4,8").unwrap(), vec![4, 8]);
        assert!(parse_sizes("5..3").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_graph_root_invariants(n in 4usize..=12, seed in 0u64..1000) {
            let n = n + n % 2;
            let g = generate_family(Family::RandomRegular, n, 3, seed).unwrap();
            let poly = cut_polynomial(&g).unwrap();
            let zs = fisher_zeros(&poly).unwrap();
            prop_assert_eq!(zs.len(), poly.degree().unwrap());
            prop_assert!(zs.residual <= 1e-8);
            prop_assert!(conjugate_asymmetry(&zs) <= 1e-9);
            prop_assert!(vieta_error(&poly, &zs) <= 1e-8);
            prop_assert!(zero_free_margin(&zs, 3, 0.05).unwrap() > 0.0);
        }

        #[test]
        fn pinned_graphs_have_consistent_roots(seed in 0u64..500) {
            let g = crate::graph::random_connected(7, 3, 3, seed).unwrap();
            let g: PinnedGraph = g.with_pin(0, crate::graph::Spin::Plus).unwrap();
            let poly = cut_polynomial(&g).unwrap();
            let zs = fisher_zeros(&poly).unwrap();
            prop_assert_eq!(zs.len(), poly.degree().unwrap_or(0));
            prop_assert!(vieta_error(&poly, &zs) <= 1e-8);
        }
    }
}
