//! Large-N behaviour: steepest-descent limits of G_λ(1^N) and g_λ, the
//! Gaussian integral behind them, GUE fluctuations of coherent systems and
//! the boundary probe along sampled paths.
//!
//! Exact values are computed first and only their logarithms are mixed with
//! floating point, since prefactors such as ((1−χ−p)/(1−p))^N under- or
//! overflow doubles long before N = 400.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::graph::{forward_sample_path, measure_gt, CoherentSpec, GtSpec};
use crate::partitions::Partition;
use crate::scalar::{binom, det, ln_binom, ln_rational, rational_to_f64, Rational};

// ---------------------------------------------------------------------------
// exact G_λ^{(0,−p)}(1^N) from residues

fn rpow(x: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// ∮ u^e (u−p)^{−m} ((1−p)/(1−u))^n du/2πi around 0 and p, as minus the
/// residue at u = 1 (the one at infinity vanishes when e − m − n ≤ −2).
fn row_moment(e: i64, m: usize, n: usize, p: &Rational) -> Rational {
    let q = Rational::one() - p;
    let (qn, qd) = (q.numer().clone(), q.denom().clone());
    // [w^{n−1}] (1+w)^e (q+w)^{−m} = q^{−m} Σ_b C(−m,b) q^{−b} C(e, n−1−b)
    let mut s = BigInt::zero();
    let mut qd_pow = BigInt::one();
    let mut qn_pows = vec![BigInt::one(); n];
    for i in 1..n {
        qn_pows[i] = &qn_pows[i - 1] * &qn;
    }
    let mut cm = BigInt::one();
    let mut ce = binom(e, n as i64 - 1);
    for b in 0..n {
        // ce = C(e, n−1−b), cm = C(−m, b)
        s += &cm * &ce * &qd_pow * &qn_pows[n - 1 - b];
        cm = cm * BigInt::from(-(m as i64) - b as i64) / BigInt::from(b as i64 + 1);
        qd_pow *= &qd;
        let a = n as i64 - 1 - b as i64;
        if a >= 1 {
            ce = binom(e, a - 1);
        }
    }
    let coeff = Rational::new(s, qn_pows[n - 1].clone());
    let res = rpow(&q, n as i64 - m as i64) * coeff;
    if n % 2 == 0 {
        -res
    } else {
        res
    }
}

/// ∮ u^{a−1}... for the column formula: Res_0 + Res_p of u^{d}(u−p)^{−c}(1−u)^n.
fn col_moment(d: i64, c: usize, n: usize, p: &Rational) -> Rational {
    let q = Rational::one() - p;
    let mut total = Rational::zero();
    if d <= -1 {
        // [u^{−d−1}] (u−p)^{−c}(1−u)^n
        let target = (-d - 1) as usize;
        let lead = rpow(&(-p.clone()), -(c as i64));
        for b in 0..=target {
            let e = target - b;
            let t = Rational::from(binom(-(c as i64), b as i64) * binom(n as i64, e as i64)) * rpow(&(-p.recip()), b as i64);
            total += if e % 2 == 0 { t } else { -t };
        }
        total *= lead;
    }
    if c >= 1 {
        // [w^{c−1}] (p+w)^d (q−w)^n
        for x in 0..c {
            let y = c - 1 - x;
            if y > n {
                continue;
            }
            let t = Rational::from(binom(d, x as i64) * binom(n as i64, y as i64)) * rpow(p, d - x as i64) * rpow(&q, (n - y) as i64);
            total += if y % 2 == 0 { t } else { -t };
        }
    }
    total
}

/// G_λ^{(0,−p)}(1^N) as a determinant of one-variable contour moments,
/// evaluated exactly. Rows are used when l(λ) ≤ λ_1, columns otherwise.
pub fn principal_exact(lambda: &Partition, n: usize, p: &Rational) -> Result<Rational> {
    if !(Rational::zero() < *p && *p < Rational::one()) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0,1)")));
    }
    if lambda.is_empty() {
        return Ok(Rational::one());
    }
    if lambda.len() > n {
        return Ok(Rational::zero());
    }
    if lambda.len() <= lambda.first() {
        let k = lambda.len();
        let mut cache: HashMap<(i64, usize), Rational> = HashMap::new();
        let m: Vec<Vec<Rational>> = (1..=k)
            .map(|i| {
                (1..=k)
                    .map(|j| {
                        let e = (k - j) as i64 - lambda.part(i) as i64;
                        let mm = k - i + 1;
                        cache.entry((e, mm)).or_insert_with(|| row_moment(e, mm, n, p)).clone()
                    })
                    .collect()
            })
            .collect();
        Ok(det(m))
    } else {
        let k = lambda.first();
        let cols = lambda.conjugate();
        let m: Vec<Vec<Rational>> = (1..=k).map(|i| (1..=k).map(|j| col_moment(i as i64 - j as i64 - 1, cols.part(i), n, p)).collect()).collect();
        let v = det(m);
        Ok(if lambda.size() % 2 == 0 { v } else { -v })
    }
}

fn ln_positive(v: &Rational, what: &str) -> Result<f64> {
    if !v.is_positive() {
        return Err(Error::InvalidParameter(format!("{what} is not positive")));
    }
    Ok(ln_rational(v))
}

// ---------------------------------------------------------------------------
// limit specs

fn z_constant(chis: &[f64], p: f64) -> f64 {
    let k = chis.len();
    let mut z = 1.0;
    let mut i = 0;
    while i < k {
        let mut m = 1;
        while i + m < k && chis[i + m] == chis[i] {
            m += 1;
        }
        if chis[i] > 0.0 {
            z *= (chis[i] + p).powi((m * (m + 1) / 2) as i32);
        }
        i += m;
    }
    for i in 0..k {
        for j in i + 1..k {
            if chis[i] > chis[j] {
                z *= chis[i] - chis[j];
            }
        }
        z /= chis[i].powi((k - i) as i32);
    }
    z
}

/// d = Σ_{χ>0} C(m(χ)+1, 2).
fn d_exponent(chis: &[f64]) -> usize {
    let mut counts: Vec<(f64, usize)> = Vec::new();
    for &c in chis.iter().filter(|&&c| c > 0.0) {
        match counts.iter_mut().find(|e| e.0 == c) {
            Some(e) => e.1 += 1,
            None => counts.push((c, 1)),
        }
    }
    counts.iter().map(|e| e.1 * (e.1 + 1) / 2).sum()
}

fn gauss_part(xs: &[f64], sig: &[f64], same: impl Fn(usize, usize) -> bool) -> f64 {
    let k = xs.len();
    let mut v = (2.0 * std::f64::consts::PI).powf(-(k as f64) / 2.0);
    for i in 0..k {
        v *= (-xs[i] * xs[i] / 2.0).exp() / sig[i];
        for j in i + 1..k {
            if same(i, j) {
                v *= (xs[i] - xs[j]) / sig[i];
            }
        }
    }
    v
}

fn round_parts(target: impl Iterator<Item = f64>) -> Partition {
    let mut parts: Vec<usize> = Vec::new();
    for t in target {
        let mut v = t.round().max(0.0) as usize;
        if let Some(&last) = parts.last() {
            v = v.min(last);
        }
        parts.push(v);
    }
    Partition::new(parts).expect("clamped parts decrease")
}

/// Rows growing like α_i N + x_i √(N α_i(1+α_i)).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowLimitSpec {
    pub alphas: Vec<f64>,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    #[serde(serialize_with = "ser_rational")]
    pub p: Rational,
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn check_p(p: &Rational) -> Result<f64> {
    if !(Rational::zero() < *p && *p < Rational::one()) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0,1)")));
    }
    Ok(rational_to_f64(p))
}

impl RowLimitSpec {
    pub fn new(alphas: Vec<f64>, x: Vec<f64>, z: Vec<f64>, p: Rational) -> Result<Self> {
        let pf = check_p(&p)?;
        if alphas.is_empty() || alphas.len() != x.len() {
            return Err(Error::InvalidParameter("need one fluctuation x_i per α_i".into()));
        }
        if alphas.windows(2).any(|w| w[0] < w[1]) || alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter("α must be positive and non-increasing".into()));
        }
        for i in 1..alphas.len() {
            if alphas[i] == alphas[i - 1] && x[i] > x[i - 1] {
                return Err(Error::InvalidParameter("x must decrease within blocks of equal α".into()));
            }
        }
        if alphas.iter().any(|&a| (a / (1.0 + a) - pf).abs() < 1e-12) {
            return Err(Error::InvalidParameter("χ_i = 0 (α_i = p/(1−p)) is excluded".into()));
        }
        if z.iter().any(|v| v.abs() >= 1.0) {
            return Err(Error::InvalidParameter("test variables need |z| < 1".into()));
        }
        Ok(RowLimitSpec { alphas, x, z, p })
    }

    pub fn p_f64(&self) -> f64 {
        rational_to_f64(&self.p)
    }

    pub fn chis(&self) -> Vec<f64> {
        let p = self.p_f64();
        self.alphas.iter().map(|a| a / (1.0 + a) - p).collect()
    }

    pub fn d(&self) -> usize {
        d_exponent(&self.chis())
    }

    pub fn lambda_at(&self, n: usize) -> Partition {
        let nf = n as f64;
        round_parts(self.alphas.iter().zip(&self.x).map(|(a, x)| a * nf + x * (nf * a * (1.0 + a)).sqrt()))
    }

    fn phi(&self, z: f64) -> f64 {
        let c = self.p_f64() / (1.0 - self.p_f64());
        self.alphas.iter().map(|a| (1.0 - c * (z - 1.0)) / (1.0 - a * (z - 1.0))).product()
    }
}

/// The closed-form limit; 1 when every row is subcritical, an error when
/// subcritical and supercritical rows are mixed.
pub fn row_limit_value(spec: &RowLimitSpec) -> Result<f64> {
    let chis = spec.chis();
    let p = spec.p_f64();
    if chis.iter().all(|&c| c < 0.0) {
        return Ok(1.0);
    }
    if chis.iter().any(|&c| c < 0.0) {
        return Err(Error::Unsupported("closed form needs every α_i above p/(1−p)".into()));
    }
    let sig: Vec<f64> = spec.alphas.iter().map(|a| (a * (1.0 + a)).sqrt()).collect();
    let a = &spec.alphas;
    let g = gauss_part(&spec.x, &sig, |i, j| a[i] == a[j]);
    Ok(z_constant(&chis, p) * g * spec.z.iter().map(|&z| spec.phi(z)).product::<f64>())
}

/// log of G_λ(z, 1^{N−n}) N^{d/2} Π((1−χ̃_i−p)/(1−p))^N (χ̃_i+p)^{λ_i} at z = ∅.
pub fn row_lhs_ln(spec: &RowLimitSpec, lambda: &Partition, n: usize) -> Result<f64> {
    if !spec.z.is_empty() {
        return Err(Error::Unsupported("exact evaluation needs z = ∅; use row_lhs_quadrature".into()));
    }
    let g = principal_exact(lambda, n, &spec.p)?;
    let p = spec.p_f64();
    let nf = n as f64;
    let mut v = ln_positive(&g, "G_λ(1^N)")? + spec.d() as f64 / 2.0 * nf.ln();
    for (i, c) in spec.chis().iter().enumerate() {
        let r = c.max(0.0) + p;
        v += nf * ((1.0 - r) / (1.0 - p)).ln() + lambda.part(i + 1) as f64 * r.ln();
    }
    Ok(v)
}

/// Columns growing like β_i N + y_i √(N β_i(1−β_i)).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColLimitSpec {
    pub betas: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    #[serde(serialize_with = "ser_rational")]
    pub p: Rational,
}

impl ColLimitSpec {
    pub fn new(betas: Vec<f64>, y: Vec<f64>, z: Vec<f64>, p: Rational) -> Result<Self> {
        let pf = check_p(&p)?;
        if betas.is_empty() || betas.len() != y.len() {
            return Err(Error::InvalidParameter("need one fluctuation y_i per β_i".into()));
        }
        if betas.windows(2).any(|w| w[0] < w[1]) || betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::InvalidParameter("β must lie in (0,1) and be non-increasing; frozen columns are stripped upstream".into()));
        }
        for i in 1..betas.len() {
            if betas[i] == betas[i - 1] && y[i] > y[i - 1] {
                return Err(Error::InvalidParameter("y must decrease within blocks of equal β".into()));
            }
        }
        if betas.iter().any(|&b| (b - pf).abs() < 1e-12) {
            return Err(Error::InvalidParameter("χ_i = 0 (β_i = p) is excluded".into()));
        }
        if z.iter().any(|v| v.abs() >= 1.0) {
            return Err(Error::InvalidParameter("test variables need |z| < 1".into()));
        }
        Ok(ColLimitSpec { betas, y, z, p })
    }

    pub fn p_f64(&self) -> f64 {
        rational_to_f64(&self.p)
    }

    pub fn chis(&self) -> Vec<f64> {
        let p = self.p_f64();
        self.betas.iter().map(|b| (b - p) / (1.0 - b)).collect()
    }

    pub fn d(&self) -> usize {
        d_exponent(&self.chis())
    }

    /// The partition whose columns are round(β_i N + y_i √(N β_i(1−β_i))).
    pub fn lambda_at(&self, n: usize) -> Partition {
        let nf = n as f64;
        round_parts(self.betas.iter().zip(&self.y).map(|(b, y)| b * nf + y * (nf * b * (1.0 - b)).sqrt())).conjugate()
    }

    fn phi(&self, z: f64) -> f64 {
        let p = self.p_f64();
        self.betas.iter().map(|b| 1.0 + (b - p) / (1.0 - p) * (z - 1.0)).product()
    }
}

pub fn col_limit_value(spec: &ColLimitSpec) -> Result<f64> {
    let chis = spec.chis();
    let p = spec.p_f64();
    if chis.iter().all(|&c| c < 0.0) {
        return Ok(1.0);
    }
    if chis.iter().any(|&c| c < 0.0) {
        return Err(Error::Unsupported("closed form needs every β_i above p".into()));
    }
    let sig: Vec<f64> = spec.betas.iter().map(|b| (b * (1.0 - b)).sqrt()).collect();
    let b = &spec.betas;
    let g = gauss_part(&spec.y, &sig, |i, j| b[i] == b[j]);
    Ok(z_constant(&chis, p) * g * spec.z.iter().map(|&z| spec.phi(z)).product::<f64>())
}

/// log of G_λ(1^N) N^{d/2} Π (χ̃_i+p)^{λ'_i} / (1+χ̃_i)^N.
pub fn col_lhs_ln(spec: &ColLimitSpec, lambda: &Partition, n: usize) -> Result<f64> {
    if !spec.z.is_empty() {
        return Err(Error::Unsupported("exact evaluation needs z = ∅; use col_lhs_quadrature".into()));
    }
    let g = principal_exact(lambda, n, &spec.p)?;
    let p = spec.p_f64();
    let nf = n as f64;
    let cols = lambda.conjugate();
    let mut v = ln_positive(&g, "G_λ(1^N)")? + spec.d() as f64 / 2.0 * nf.ln();
    for (i, c) in spec.chis().iter().enumerate() {
        let ct = c.max(0.0);
        v += cols.part(i + 1) as f64 * (ct + p).ln() - nf * (1.0 + ct).ln();
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// normalized quadrature on the steepest-descent circles (supercritical only)

/// ∮ u^s f(u) du/2πi, s = 0..k−1, by the trapezoid rule with `m` nodes.
fn circle_moments(center: f64, radius: f64, m: usize, k: usize, f: &dyn Fn(Complex64) -> Complex64) -> (Vec<Complex64>, Vec<Complex64>, f64) {
    let mut full = vec![Complex64::zero(); k];
    let mut half = vec![Complex64::zero(); k];
    let mut abs = 0.0;
    for j in 0..m {
        let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / m as f64);
        let u = center + radius * e;
        let w = f(u) * radius * e / m as f64;
        abs += w.norm() * (1.0 + u.norm()).powi(k as i32);
        let mut up = Complex64::one();
        for s in 0..k {
            full[s] += w * up;
            if j % 2 == 0 {
                half[s] += 2.0 * w * up;
            }
            up *= u;
        }
    }
    (full, half, abs)
}

fn cdet(m: Vec<Vec<Complex64>>) -> Complex64 {
    det(m)
}

/// LHS value and an error estimate from the moment determinant on circles
/// through the saddle points.
fn quadrature_lhs(k: usize, circles: &[(f64, f64)], f: &dyn Fn(usize, Complex64) -> Complex64) -> Result<(f64, f64)> {
    let mut m = 256;
    loop {
        let rows: Vec<_> = (0..k).map(|i| circle_moments(circles[i].0, circles[i].1, m, k, &|u| f(i, u))).collect();
        let full: Vec<Vec<Complex64>> = rows.iter().map(|r| (0..k).map(|j| r.0[k - 1 - j]).collect()).collect();
        let half: Vec<Vec<Complex64>> = rows.iter().map(|r| (0..k).map(|j| r.1[k - 1 - j]).collect()).collect();
        let scale: f64 = rows.iter().map(|r| r.2).product::<f64>() * (1..=k).product::<usize>() as f64;
        let (a, b) = (cdet(full), cdet(half));
        let err = (a - b).norm() + 16.0 * f64::EPSILON * scale;
        if err <= 1e-11 * a.norm().max(1e-300) || m >= 1 << 18 {
            return Ok((a.re, err.max(a.im.abs())));
        }
        m *= 2;
    }
}

/// The normalized row integrand of G_λ(z, 1^{N−n}), integrated on the
/// circles |u| = α_i/(1+α_i). Needs every row supercritical.
pub fn row_lhs_quadrature(spec: &RowLimitSpec, lambda: &Partition, n: usize) -> Result<(f64, f64)> {
    let chis = spec.chis();
    if chis.iter().any(|&c| c < 0.0) {
        return Err(Error::Unsupported("quadrature runs on supercritical rows only".into()));
    }
    let p = spec.p_f64();
    let k = chis.len();
    let nf = n as f64;
    let radii: Vec<f64> = chis.iter().map(|c| c + p).collect();
    let z = spec.z.clone();
    let f = |i: usize, u: Complex64| -> Complex64 {
        let t = lambda.part(i + 1) as f64;
        let r = radii[i];
        let h = |v: Complex64| -(1.0 - v).ln() * nf - v.ln() * t;
        let hr = -(1.0 - r).ln() * nf - r.ln() * t;
        let mut v = (h(u) - hr).exp() / (u - p).powi((k - i) as i32);
        for &zj in &z {
            v *= (1.0 - u) / (1.0 - p) * (1.0 - p * zj) / (1.0 - u * zj);
        }
        v
    };
    let circles: Vec<(f64, f64)> = radii.iter().map(|&r| (0.0, r)).collect();
    let (v, e) = quadrature_lhs(k, &circles, &f)?;
    let s = nf.powf(spec.d() as f64 / 2.0);
    Ok((v * s, e * s))
}

/// Column analogue on circles centred at p through −χ_i.
pub fn col_lhs_quadrature(spec: &ColLimitSpec, lambda: &Partition, n: usize) -> Result<(f64, f64)> {
    let chis = spec.chis();
    if chis.iter().any(|&c| c < 0.0) {
        return Err(Error::Unsupported("quadrature runs on supercritical columns only".into()));
    }
    let p = spec.p_f64();
    let k = chis.len();
    let nf = n as f64;
    let cols = lambda.conjugate();
    let z = spec.z.clone();
    let f = |i: usize, u: Complex64| -> Complex64 {
        let t = cols.part(i + 1) as f64;
        let c = chis[i];
        let h = |v: Complex64| (1.0 - v).ln() * nf - (p - v).ln() * t;
        let hc = (1.0 + c).ln() * nf - (p + c).ln() * t;
        let mut v = (h(u) - hc).exp() / u.powi((k - i) as i32);
        for &zj in &z {
            v *= (1.0 - zj * u) / (1.0 - u);
        }
        v
    };
    let circles: Vec<(f64, f64)> = chis.iter().map(|&c| (p, p + c)).collect();
    let (v, e) = quadrature_lhs(k, &circles, &f)?;
    let s = nf.powf(spec.d() as f64 / 2.0);
    Ok((v * s, e * s))
}

// ---------------------------------------------------------------------------
// probes

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbePoint {
    pub n: usize,
    pub lambda: String,
    pub lhs: f64,
    pub limit: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub points: Vec<ProbePoint>,
    /// relative errors strictly decrease along the grid (or sit at rounding level)
    pub monotone: bool,
}

impl ProbeReport {
    fn new(points: Vec<ProbePoint>) -> Self {
        // errors already at rounding level count as settled
        let monotone = points.windows(2).all(|w| w[1].rel_error < w[0].rel_error || w[1].rel_error.max(w[0].rel_error) < 1e-12);
        ProbeReport { points, monotone }
    }

    pub fn last_error(&self) -> f64 {
        self.points.last().map(|p| p.rel_error).unwrap_or(f64::NAN)
    }
}

static MAX_THREADS: AtomicUsize = AtomicUsize::new(0);

/// Caps the number of worker threads used by probes; 0 means one per grid point.
pub fn set_max_threads(n: usize) {
    MAX_THREADS.store(n, AtomicOrdering::Relaxed);
}

fn par_map<T: Send, F: Fn(usize) -> Result<T> + Sync>(grid: &[usize], f: F) -> Result<Vec<T>> {
    let cap = match MAX_THREADS.load(AtomicOrdering::Relaxed) {
        0 => grid.len().max(1),
        c => c,
    };
    let f = &f;
    let mut out = Vec::with_capacity(grid.len());
    for chunk in grid.chunks(cap) {
        let res: Vec<Result<T>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|&n| s.spawn(move || f(n))).collect();
            handles.into_iter().map(|h| h.join().expect("probe worker panicked")).collect()
        });
        for r in res {
            out.push(r?);
        }
    }
    Ok(out)
}

fn point(n: usize, lambda: &Partition, lhs: f64, limit: f64) -> ProbePoint {
    ProbePoint { n, lambda: lambda.to_string(), lhs, limit, rel_error: (lhs - limit).abs() / limit.abs() }
}

pub fn row_limit_probe(spec: &RowLimitSpec, grid: &[usize]) -> Result<ProbeReport> {
    let limit = row_limit_value(spec)?;
    let points = par_map(grid, |n| {
        let lam = spec.lambda_at(n);
        let lhs = if spec.z.is_empty() { row_lhs_ln(spec, &lam, n)?.exp() } else { row_lhs_quadrature(spec, &lam, n)?.0 };
        Ok(point(n, &lam, lhs, limit))
    })?;
    Ok(ProbeReport::new(points))
}

pub fn col_limit_probe(spec: &ColLimitSpec, grid: &[usize]) -> Result<ProbeReport> {
    let limit = col_limit_value(spec)?;
    let points = par_map(grid, |n| {
        let lam = spec.lambda_at(n);
        let lhs = if spec.z.is_empty() { col_lhs_ln(spec, &lam, n)?.exp() } else { col_lhs_quadrature(spec, &lam, n)?.0 };
        Ok(point(n, &lam, lhs, limit))
    })?;
    Ok(ProbeReport::new(points))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependencePoint {
    pub n: usize,
    pub lhs: f64,
    /// max relative change of the LHS when a subcritical row moves by ±⌊√N⌋
    pub perturbation: f64,
    /// relative change of the LHS since the previous grid point
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub points: Vec<IndependencePoint>,
    /// the perturbation effect shrinks along the grid and ends below the drift band
    pub pass: bool,
}

/// Moves each subcritical row by ±⌊√N⌋ and compares the effect with the
/// size of the remaining finite-N drift.
pub fn row_independence_probe(spec: &RowLimitSpec, grid: &[usize]) -> Result<IndependenceReport> {
    let chis = spec.chis();
    let sub: Vec<usize> = (0..chis.len()).filter(|&i| chis[i] < 0.0).collect();
    if sub.is_empty() || !spec.z.is_empty() {
        return Err(Error::InvalidParameter("need a subcritical row and z = ∅".into()));
    }
    let raw = par_map(grid, |n| {
        let lam = spec.lambda_at(n);
        let base = row_lhs_ln(spec, &lam, n)?;
        let shift = (n as f64).sqrt().floor() as i64;
        let mut worst: f64 = 0.0;
        for &i in &sub {
            for sgn in [-1i64, 1] {
                let mut parts = lam.padded(chis.len());
                let v = parts[i] as i64 + sgn * shift;
                let hi = if i == 0 { i64::MAX } else { parts[i - 1] as i64 };
                let lo = parts.get(i + 1).map(|&x| x as i64).unwrap_or(0);
                if v < lo || v > hi {
                    continue;
                }
                parts[i] = v as usize;
                let moved = Partition::new(parts).expect("stays a partition");
                let other = row_lhs_ln(spec, &moved, n)?;
                worst = worst.max(((other - base).exp() - 1.0).abs());
            }
        }
        Ok((n, base.exp(), worst))
    })?;
    let mut points: Vec<IndependencePoint> = Vec::new();
    for (idx, &(n, lhs, perturbation)) in raw.iter().enumerate() {
        let drift = if idx == 0 { f64::INFINITY } else { (lhs / raw[idx - 1].1 - 1.0).abs() };
        points.push(IndependencePoint { n, lhs, perturbation, drift });
    }
    let shrinking = points.windows(2).all(|w| w[1].perturbation < w[0].perturbation);
    let last = points.last().map(|p| p.perturbation < p.drift).unwrap_or(false);
    Ok(IndependenceReport { points, pass: shrinking && last })
}

/// Default grid for the limit probes.
pub const PROBE_GRID: [usize; 4] = [50, 100, 200, 400];

/// Row specs checked by the test suite, all at p = 3/10.
pub fn reference_row_specs() -> Vec<(&'static str, RowLimitSpec)> {
    let p = Rational::new(3.into(), 10.into());
    let mk = |a: &[f64], x: &[f64], z: &[f64]| RowLimitSpec::new(a.to_vec(), x.to_vec(), z.to_vec(), p.clone()).expect("valid reference spec");
    vec![
        ("one-row", mk(&[1.0], &[0.0], &[])),
        ("one-row-shifted", mk(&[1.0], &[0.5], &[])),
        ("two-rows", mk(&[2.0, 1.0], &[0.0, 0.0], &[])),
        ("two-rows-shifted", mk(&[1.5, 0.8], &[0.4, 0.0], &[])),
        ("three-rows", mk(&[2.0, 1.0, 0.6], &[0.0, 0.0, 0.0], &[])),
        ("equal-rows", mk(&[1.0, 1.0], &[0.5, -0.5], &[])),
        ("one-row-test-variable", mk(&[1.0], &[0.0], &[0.3])),
        ("two-rows-test-variable", mk(&[2.0, 1.0], &[0.0, 0.0], &[0.2])),
    ]
}

/// Column specs checked by the test suite, all at p = 3/10.
pub fn reference_col_specs() -> Vec<(&'static str, ColLimitSpec)> {
    let p = Rational::new(3.into(), 10.into());
    let mk = |b: &[f64], y: &[f64], z: &[f64]| ColLimitSpec::new(b.to_vec(), y.to_vec(), z.to_vec(), p.clone()).expect("valid reference spec");
    vec![
        ("one-column", mk(&[0.6], &[0.0], &[])),
        ("two-columns", mk(&[0.7, 0.5], &[0.0, 0.0], &[])),
        ("one-column-test-variable", mk(&[0.6], &[0.0], &[0.3])),
    ]
}

// ---------------------------------------------------------------------------
// g_λ^{(p,0)} at points with repetitions

fn falling(x: f64, r: usize) -> f64 {
    (0..r).map(|i| x - i as f64).product()
}

/// ln g_λ^{(p,0)}(χ) − Σ λ_i ln(χ_i+p), with repeated χ handled by
/// derivatives (l'Hôpital, one variable at a time). Needs λ_k ≥ 1.
pub fn g_normalized(lambda: &Partition, chis: &[f64], p: f64) -> Result<f64> {
    let k = chis.len();
    if lambda.len() != k {
        return Err(Error::InvalidParameter(format!("need exactly {k} positive parts, got {lambda}")));
    }
    if chis.windows(2).any(|w| w[0] < w[1]) || chis.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::InvalidParameter("χ must be positive and non-increasing".into()));
    }
    let l = lambda.padded(k);
    let rho: Vec<usize> = (0..k).map(|i| (0..i).filter(|&j| chis[j] == chis[i]).count()).collect();
    let mut x = vec![vec![0.0; k]; k];
    for i in 0..k {
        let xi = chis[i];
        for j in 0..k {
            let a_exp = i as f64 - j as f64;
            let b_exp = l[j] as f64 - l[i] as f64;
            let r = rho[i];
            let mut s = 0.0;
            for a in 0..=r {
                let b = r - a;
                let c = binom(r as i64, a as i64).to_f64().unwrap_or(f64::INFINITY);
                s += c * falling(a_exp, a) * xi.powf(a_exp - a as f64) * falling(b_exp, b) * (xi + p).powf(b_exp - b as f64);
            }
            x[i][j] = s;
        }
    }
    let dx = det(x);
    let mut denom = 1.0;
    for i in 0..k {
        let r = rho[i];
        denom *= if r % 2 == 0 { 1.0 } else { -1.0 } * (1..=r).product::<usize>() as f64;
        for j in i + 1..k {
            if chis[i] > chis[j] {
                denom *= chis[i] - chis[j];
            }
        }
    }
    let v = dx / denom;
    if !(v > 0.0) {
        return Err(Error::Unsupported(format!("g_λ lost positivity in floating point at {lambda}")));
    }
    let mut out = v.ln();
    for i in 0..k {
        out += (k - i) as f64 * chis[i].ln() - (chis[i] + p).ln();
    }
    Ok(out)
}

/// Compares N^{−Σ C(m,2)/2} g_λ(χ)/Π(χ_i+p)^{λ_i} with its limit, where
/// λ(N)_i = round(α_i N + t_i √N).
pub fn g_limit_probe(chis: &[f64], alphas: &[f64], t: &[f64], p: f64, grid: &[usize]) -> Result<ProbeReport> {
    let k = chis.len();
    if alphas.len() != k || t.len() != k {
        return Err(Error::InvalidParameter("χ, α and t need equal lengths".into()));
    }
    for i in 0..k {
        for j in 0..k {
            if (chis[i] == chis[j]) != (alphas[i] == alphas[j]) || (chis[i] > chis[j]) != (alphas[i] > alphas[j]) {
                return Err(Error::InvalidParameter("χ and α must be ordered the same way".into()));
            }
        }
    }
    let mut rep = 0usize;
    let mut fact = 1.0;
    let mut diffs = 1.0;
    for i in 0..k {
        let r = (0..i).filter(|&j| chis[j] == chis[i]).count();
        rep += r;
        fact *= (1..=r).product::<usize>() as f64;
        for j in i + 1..k {
            if chis[i] == chis[j] {
                diffs *= t[i] - t[j];
            }
        }
    }
    let limit = diffs / (z_constant(chis, p) * fact);
    let points = par_map(grid, |n| {
        let nf = n as f64;
        let lam = round_parts(alphas.iter().zip(t).map(|(a, ti)| a * nf + ti * nf.sqrt()));
        let lhs = (g_normalized(&lam, chis, p)? - rep as f64 / 2.0 * nf.ln()).exp();
        Ok(point(n, &lam, lhs, limit))
    })?;
    Ok(ProbeReport::new(points))
}

// ---------------------------------------------------------------------------
// Gaussian integral

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianReport {
    pub sigma: f64,
    pub xs: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// relative error, or absolute error when the right side vanishes
    pub error: f64,
}

/// ∫_{iR}…∫_{iR} exp(Σ −σx_iv_i + σ²v_i²/2) Π_{i<j}(v_i−v_j) Π dv_i/2πi by
/// the trapezoid rule on truncated lines, against
/// (2π)^{−k/2} σ^{−k(k+1)/2} Π e^{−x_i²/2} Π_{i<j}(x_i−x_j).
pub fn gaussian_lemma_check(sigma: f64, xs: &[f64]) -> Result<GaussianReport> {
    let k = xs.len();
    if !(sigma > 0.0) || k == 0 || k > 3 {
        return Err(Error::InvalidParameter("need σ > 0 and 1 ≤ k ≤ 3".into()));
    }
    // v = it, dv/2πi = dt/2π; moments ∫ (it)^s e^{−iσxt − σ²t²/2} dt/2π
    let tmax = 14.0 / sigma;
    let steps = 8000;
    let h = 2.0 * tmax / steps as f64;
    let moments = |x: f64| -> Vec<Complex64> {
        let mut m = vec![Complex64::zero(); k];
        for j in 0..=steps {
            let t = -tmax + j as f64 * h;
            let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
            let base = Complex64::new(-sigma * sigma * t * t / 2.0, -sigma * x * t).exp() * w * h / (2.0 * std::f64::consts::PI);
            let mut pw = Complex64::one();
            for s in 0..k {
                m[s] += base * pw;
                pw *= Complex64::new(0.0, t);
            }
        }
        m
    };
    let mat: Vec<Vec<Complex64>> = xs.iter().map(|&x| {
        let m = moments(x);
        (0..k).map(|j| m[k - 1 - j]).collect()
    }).collect();
    let lhs = cdet(mat).re;
    let mut rhs = (2.0 * std::f64::consts::PI).powf(-(k as f64) / 2.0) * sigma.powf(-((k * (k + 1) / 2) as f64));
    for i in 0..k {
        rhs *= (-xs[i] * xs[i] / 2.0).exp();
        for j in i + 1..k {
            rhs *= xs[i] - xs[j];
        }
    }
    let error = if rhs == 0.0 { lhs.abs() } else { (lhs - rhs).abs() / rhs.abs() };
    Ok(GaussianReport { sigma, xs: xs.to_vec(), lhs, rhs, error })
}

// ---------------------------------------------------------------------------
// GUE

/// ρ^{GUE}_A at x for grouping by equal parameters.
pub fn gue_density(groups: &[f64], x: &[f64]) -> f64 {
    let k = x.len();
    let mut norm = (2.0 * std::f64::consts::PI).powf(k as f64 / 2.0);
    let mut i = 0;
    while i < k {
        let mut m = 1;
        while i + m < k && groups[i + m] == groups[i] {
            m += 1;
        }
        for r in 1..=m {
            norm *= (1..r).product::<usize>() as f64;
        }
        i += m;
    }
    let mut v = 1.0 / norm;
    for i in 0..k {
        if i > 0 && groups[i] == groups[i - 1] && x[i] > x[i - 1] {
            return 0.0;
        }
        v *= (-x[i] * x[i] / 2.0).exp();
        for j in i + 1..k {
            if groups[i] == groups[j] {
                v *= (x[i] - x[j]).powi(2);
            }
        }
    }
    v
}

/// ∫ ρ^{GUE}_A over the ordered chamber by a tensor trapezoid rule, k ≤ 2.
pub fn gue_normalization(groups: &[f64]) -> Result<f64> {
    let (lim, steps) = (12.0, 1200);
    let h = 2.0 * lim / steps as f64;
    let node = |j: usize| -lim + j as f64 * h;
    match groups.len() {
        1 => Ok((0..=steps).map(|j| gue_density(groups, &[node(j)])).sum::<f64>() * h),
        2 => {
            let mut s = 0.0;
            for a in 0..=steps {
                for b in 0..=steps {
                    s += gue_density(groups, &[node(a), node(b)]);
                }
            }
            Ok(s * h * h)
        }
        _ => Err(Error::Unsupported("normalization check is implemented for k ≤ 2".into())),
    }
}

fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").cdf(x)
}

/// Marginal CDFs of the ordered 2×2 GUE eigenvalues: x_1 = (u+v)/√2,
/// x_2 = (u−v)/√2 with u ~ N(0,1) and v ~ χ_3 independent.
pub fn gue2_marginal_cdf(index: usize, a: f64) -> f64 {
    let steps = 1200;
    let vmax = 12.0;
    let h = vmax / steps as f64;
    let c = (2.0 / std::f64::consts::PI).sqrt();
    let mut s = 0.0;
    for j in 0..=steps {
        let v = j as f64 * h;
        let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
        let dens = c * v * v * (-v * v / 2.0).exp();
        let arg = if index == 0 { std::f64::consts::SQRT_2 * a - v } else { std::f64::consts::SQRT_2 * a + v };
        s += w * dens * normal_cdf(arg);
    }
    s * h
}

/// Asymptotic Kolmogorov p-value.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    if lam < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=200 {
        let t = 2.0 * (-2.0 * (j * j) as f64 * lam * lam).exp();
        s += if j % 2 == 1 { t } else { -t };
        if t < 1e-16 {
            break;
        }
    }
    s.clamp(0.0, 1.0)
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

// ---------------------------------------------------------------------------
// one-row and one-column closed forms

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln dim_K((a) → (b)) on one-row shapes; leaving (0) is free, every other
/// step costs 1−p.
pub fn ln_dim_row(a: usize, b: usize, k: usize, q: f64) -> f64 {
    if b < a {
        return f64::NEG_INFINITY;
    }
    if k == 0 {
        return if a == b { 0.0 } else { f64::NEG_INFINITY };
    }
    if a > 0 {
        return k as f64 * q.ln() + ln_binom((b - a + k - 1) as u64, (k - 1) as u64);
    }
    if b == 0 {
        return 0.0;
    }
    // Σ_{u<K} q^u C(b−1+u, u), by the term ratio q(b+u)/(u+1)
    let mut terms = Vec::with_capacity(k);
    let mut t = 0.0;
    for u in 0..k {
        terms.push(t);
        t += q.ln() + ((b + u) as f64).ln() - ((u + 1) as f64).ln();
    }
    log_sum_exp(&terms)
}

/// ln dim_K((1^a) → (1^b)) on one-column shapes; adding a box is free,
/// staying at a nonempty column costs 1−p.
pub fn ln_dim_col(a: usize, b: usize, k: usize, q: f64) -> f64 {
    if b < a || b - a > k {
        return f64::NEG_INFINITY;
    }
    if a > 0 || b == 0 {
        let stays = k - (b - a);
        if a == 0 {
            return 0.0;
        }
        return ln_binom(k as u64, (b - a) as u64) + stays as f64 * q.ln();
    }
    let terms: Vec<f64> = (0..=k - b).map(|s| ln_binom((k - s - 1) as u64, (b - 1) as u64) + (k - s - b) as f64 * q.ln()).collect();
    log_sum_exp(&terms)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltReport {
    pub kind: String,
    pub n: usize,
    pub parameter: f64,
    pub mean: f64,
    pub variance: f64,
    pub target_variance: f64,
    pub variance_rel_error: f64,
    pub sup_cdf_distance: f64,
    /// P(|λ/n − parameter| ≤ 0.05)
    pub lln_window_prob: f64,
    pub tail_mass: f64,
    /// (normalized x, exact CDF, Gaussian CDF) at each atom
    #[serde(skip)]
    pub cdf: Vec<(f64, f64, f64)>,
}

fn clt_from_masses(kind: &str, n: usize, par: f64, sd: f64, masses: Vec<(usize, f64)>) -> CltReport {
    let total: f64 = masses.iter().map(|m| m.1).sum();
    let mean: f64 = masses.iter().map(|(m, w)| *m as f64 * w).sum::<f64>() / total;
    let variance: f64 = masses.iter().map(|(m, w)| (*m as f64 - mean).powi(2) * w).sum::<f64>() / total;
    let centre = par * n as f64;
    let mut acc = 0.0;
    let mut sup: f64 = 0.0;
    let mut lln = 0.0;
    let mut cdf = Vec::with_capacity(masses.len());
    for (m, w) in &masses {
        let x = (*m as f64 - centre) / sd;
        let g = normal_cdf(x);
        sup = sup.max((acc - g).abs());
        acc += w;
        sup = sup.max((acc - g).abs());
        cdf.push((x, acc, g));
        if (*m as f64 / n as f64 - par).abs() <= 0.05 {
            lln += w;
        }
    }
    let target = sd * sd;
    CltReport {
        kind: kind.into(),
        n,
        parameter: par,
        mean,
        variance,
        target_variance: target,
        variance_rel_error: (variance - target).abs() / target,
        sup_cdf_distance: sup,
        lln_window_prob: lln,
        tail_mass: 1.0 - total,
        cdf,
    }
}

fn f64_positive(v: &Rational) -> f64 {
    rational_to_f64(v)
}

/// Exact law of λ_1 at level n for A = (α), B = ∅:
/// M_n((m)) = Φ(0)^n dim_n((m)) g_{(m)}(χ), g_{(m)}(χ) = χ(χ+p)^{m−1}.
pub fn clt_rows_exact(alpha: &Rational, p: &Rational, n: usize) -> Result<CltReport> {
    let spec = GtSpec::new(vec![alpha.clone()], vec![]);
    spec.validate(p)?;
    let (a, pf) = (f64_positive(alpha), f64_positive(p));
    let q = 1.0 - pf;
    let chi = a / (1.0 + a) - pf;
    let ln_phi0 = -(q.ln() + (1.0 + a).ln());
    let sd = (n as f64 * a * (1.0 + a)).sqrt();
    let hi = (a * n as f64 + 14.0 * sd) as usize + 10;
    let masses = (0..=hi)
        .map(|m| {
            let g = if m == 0 { 0.0 } else { chi.ln() + (m - 1) as f64 * (chi + pf).ln() };
            (m, (n as f64 * ln_phi0 + ln_dim_row(0, m, n, q) + g).exp())
        })
        .collect();
    Ok(clt_from_masses("rows", n, a, sd, masses))
}

/// Exact law of λ'_1 at level n for A = ∅, B = (β), β < 1.
pub fn clt_cols_exact(beta: &Rational, p: &Rational, n: usize) -> Result<CltReport> {
    let spec = GtSpec::new(vec![], vec![beta.clone()]);
    spec.validate(p)?;
    if beta.is_one() {
        return Err(Error::InvalidParameter("β = 1 is a frozen column".into()));
    }
    let (b, pf) = (f64_positive(beta), f64_positive(p));
    let q = 1.0 - pf;
    let y = (b - pf) / (1.0 - b);
    let ln_phi0 = ((1.0 - b) / q).ln();
    let sd = (n as f64 * b * (1.0 - b)).sqrt();
    let masses = (0..=n)
        .map(|j| {
            let g = if j == 0 { 0.0 } else { y.ln() + (j - 1) as f64 * (y + pf).ln() };
            (j, (n as f64 * ln_phi0 + ln_dim_col(0, j, n, q) + g).exp())
        })
        .collect();
    Ok(clt_from_masses("cols", n, b, sd, masses))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalKs {
    pub index: usize,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub sample_mean: f64,
    pub target_mean: f64,
    pub sample_variance: f64,
    pub target_variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub atoms: usize,
    pub tail_mass: f64,
    pub marginals: Vec<MarginalKs>,
    pub significance: f64,
    pub pass: bool,
}

/// Exact law of (λ_1, λ_2) at level n for A = (α_1, α_2), B = ∅, on a
/// window of ±7 standard deviations around (α_1 n, α_2 n).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoRowLaw {
    pub n: usize,
    pub alphas: Vec<f64>,
    pub sds: Vec<f64>,
    #[serde(skip)]
    pub atoms: Vec<((usize, usize), f64)>,
    pub tail_mass: f64,
}

impl TwoRowLaw {
    /// Mean and variance of the normalized row i (0-based), without jitter.
    pub fn moments(&self, i: usize) -> (f64, f64) {
        let total: f64 = self.atoms.iter().map(|a| a.1).sum();
        let x = |l: &(usize, usize)| ((if i == 0 { l.0 } else { l.1 }) as f64 - self.alphas[i] * self.n as f64) / self.sds[i];
        let mean = self.atoms.iter().map(|(l, w)| x(l) * w).sum::<f64>() / total;
        let var = self.atoms.iter().map(|(l, w)| (x(l) - mean).powi(2) * w).sum::<f64>() / total;
        // jitter by U(−½, ½) adds 1/12 box² of variance
        (mean, var + 1.0 / (12.0 * self.sds[i] * self.sds[i]))
    }
}

pub fn two_row_law(alphas: &[Rational; 2], p: &Rational, n: usize) -> Result<TwoRowLaw> {
    let spec = GtSpec::new(alphas.to_vec(), vec![]);
    spec.validate(p)?;
    let a: Vec<f64> = spec.alphas.iter().map(f64_positive).collect();
    let pf = f64_positive(p);
    let chis: Vec<f64> = a.iter().map(|x| x / (1.0 + x) - pf).collect();
    let sds: Vec<f64> = a.iter().map(|x| (n as f64 * x * (1.0 + x)).sqrt()).collect();
    let ln_phi0: f64 = a.iter().map(|x| -((1.0 - pf).ln() + (1.0 + x).ln())).sum();
    let window = |i: usize| -> (f64, usize) {
        let c = a[i] * n as f64;
        ((c - 7.0 * sds[i]).floor(), (c + 7.0 * sds[i]).ceil() as usize)
    };
    let (w1, w2) = (window(0), window(1));
    if w2.0 < 1.0 {
        return Err(Error::InvalidParameter("n too small: the second row reaches zero inside the window".into()));
    }
    let (w1, w2) = ((w1.0 as usize, w1.1), (w2.0 as usize, w2.1));
    let mut cache: HashMap<(i64, usize), Rational> = HashMap::new();
    let mut moment = |e: i64, m: usize| cache.entry((e, m)).or_insert_with(|| row_moment(e, m, n, p)).clone();
    let mut atoms: Vec<((usize, usize), f64)> = Vec::new();
    for l1 in w1.0..=w1.1 {
        let (a11, a12) = (moment(1 - l1 as i64, 2), moment(-(l1 as i64), 2));
        for l2 in w2.0..=w2.1.min(l1) {
            let (a21, a22) = (moment(1 - l2 as i64, 1), moment(-(l2 as i64), 1));
            let g = &a11 * &a22 - &a12 * &a21;
            let lam = Partition::from_slice(&[l1, l2]);
            let lg = g_normalized(&lam, &chis, pf)? + l1 as f64 * (chis[0] + pf).ln() + l2 as f64 * (chis[1] + pf).ln();
            let v = n as f64 * ln_phi0 + ln_positive(&g, "G_λ(1^n)")? + lg;
            atoms.push(((l1, l2), v.exp()));
        }
    }
    let tail_mass = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
    Ok(TwoRowLaw { n, alphas: a, sds, atoms, tail_mass })
}

/// Two-row fluctuations for A = (α_1, α_2), B = ∅: draws `samples` exact
/// samples of λ at level n, jitters each part by U(−½, ½) and runs KS tests
/// of the normalized rows against the GUE marginals.
pub fn clt_two_rows_ks(alphas: &[Rational; 2], p: &Rational, n: usize, samples: usize, seed: u64) -> Result<KsReport> {
    let law = two_row_law(alphas, p, n)?;
    let (a, sds, atoms) = (&law.alphas, &law.sds, &law.atoms);
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let mut cdf = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for at in atoms {
        acc += at.1 / total;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = vec![Vec::with_capacity(samples), Vec::with_capacity(samples)];
    for _ in 0..samples {
        let u: f64 = rng.gen();
        let idx = cdf.partition_point(|&c| c <= u).min(atoms.len() - 1);
        let (l1, l2) = atoms[idx].0;
        for (i, l) in [l1, l2].into_iter().enumerate() {
            let jitter: f64 = rng.gen::<f64>() - 0.5;
            xs[i].push((l as f64 + jitter - a[i] * n as f64) / sds[i]);
        }
    }
    let equal = a[0] == a[1];
    let target_mean = |i: usize| if equal { if i == 0 { 2.0 / std::f64::consts::PI.sqrt() } else { -2.0 / std::f64::consts::PI.sqrt() } } else { 0.0 };
    let target_var = |_: usize| if equal { 2.0 - 4.0 / std::f64::consts::PI } else { 1.0 };
    let significance = 1e-3;
    let mut marginals = Vec::new();
    for i in 0..2 {
        let d = if equal { ks_statistic(xs[i].clone(), |x| gue2_marginal_cdf(i, x)) } else { ks_statistic(xs[i].clone(), normal_cdf) };
        let mean = xs[i].iter().sum::<f64>() / samples as f64;
        let var = xs[i].iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
        marginals.push(MarginalKs {
            index: i + 1,
            ks_statistic: d,
            p_value: ks_p_value(d, samples),
            sample_mean: mean,
            target_mean: target_mean(i),
            sample_variance: var,
            target_variance: target_var(i),
        });
    }
    let pass = marginals.iter().all(|m| m.p_value > significance);
    Ok(KsReport { n, samples, seed, alphas: a.clone(), atoms: atoms.len(), tail_mass: law.tail_mass, marginals, significance, pass })
}

/// Checks exactly, on the level-n measure, that the first s columns have
/// length n for every atom, where s counts β_i = 1.
pub fn frozen_columns_check(spec: &GtSpec, n: usize, p: &Rational) -> Result<bool> {
    let s = spec.frozen();
    let m = measure_gt(spec, n, p, 1e-10)?;
    let conj_ok = m.atoms.iter().all(|(lam, _)| {
        let c = lam.conjugate();
        (1..=s).all(|i| c.part(i) == n)
    });
    Ok(conj_ok && !m.atoms.is_empty())
}

/// What `clt_experiment` computed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CltOutcome {
    Exact(CltReport),
    Sampled(KsReport),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltExperiment {
    pub frozen_columns: usize,
    /// exact check of λ'_1 = … = λ'_s = n on a small level
    pub frozen_verified: bool,
    pub outcome: CltOutcome,
}

/// One row or one column: exact; two rows: sampled KS test. Frozen columns
/// are checked exactly on level min(n, 3) and stripped.
pub fn clt_experiment(spec: &GtSpec, n: usize, p: &Rational, samples: usize, seed: u64) -> Result<CltExperiment> {
    spec.validate(p)?;
    let s = spec.frozen();
    let frozen_verified = s == 0 || frozen_columns_check(spec, n.min(3), p)?;
    let betas: Vec<Rational> = spec.betas.iter().filter(|b| !b.is_one()).cloned().collect();
    let outcome = match (spec.alphas.len(), betas.len()) {
        (1, 0) => CltOutcome::Exact(clt_rows_exact(&spec.alphas[0], p, n)?),
        (0, 1) => CltOutcome::Exact(clt_cols_exact(&betas[0], p, n)?),
        (2, 0) => CltOutcome::Sampled(clt_two_rows_ks(&[spec.alphas[0].clone(), spec.alphas[1].clone()], p, n, samples, seed)?),
        _ => return Err(Error::Unsupported("CLT experiments cover one row, one column or two rows".into())),
    };
    Ok(CltExperiment { frozen_columns: s, frozen_verified, outcome })
}

// ---------------------------------------------------------------------------
// boundary probe

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub n: usize,
    pub lambda: String,
    pub target: f64,
    pub mean_abs_deviation: f64,
    pub max_abs_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub paths: usize,
    pub seed: u64,
    pub points: Vec<BoundaryPoint>,
    /// mean deviations strictly decrease along the grid for every λ
    pub monotone: bool,
}

/// Samples `paths` paths of the coherent system to level max(grid) and, at
/// each N in the grid, compares p↓_{N,1}(t_N, λ) with M_1(λ). Covers one
/// row (B = ∅, one α) or one column (A = ∅, one β < 1).
pub fn boundary_path_probe(spec: &GtSpec, p: &Rational, grid: &[usize], lambdas: &[Partition], paths: usize, seed: u64) -> Result<BoundaryReport> {
    spec.validate(p)?;
    let row = match (spec.alphas.len(), spec.betas.len()) {
        (1, 0) => true,
        (0, 1) if !spec.betas[0].is_one() => false,
        _ => return Err(Error::Unsupported("boundary probe covers one row or one non-frozen column".into())),
    };
    if grid.is_empty() || grid.iter().any(|&n| n < 1) {
        return Err(Error::InvalidParameter("grid levels must be positive".into()));
    }
    let top = *grid.iter().max().unwrap();
    let m1 = measure_gt(spec, 1, p, 1e-14)?;
    let q = 1.0 - rational_to_f64(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coh = CoherentSpec::Gt(spec.clone());
    let mut sampled = Vec::with_capacity(paths);
    for _ in 0..paths {
        sampled.push(forward_sample_path(&coh, top, p, &mut rng)?);
    }
    let size = |l: &Partition| if row { l.first() } else { l.len() };
    let ln_dim = |a: usize, b: usize, k: usize| if row { ln_dim_row(a, b, k, q) } else { ln_dim_col(a, b, k, q) };
    let mut points = Vec::new();
    for lam in lambdas {
        let shape_ok = if row { lam.len() <= 1 } else { lam.first() <= 1 && lam.len() <= 1 };
        if !shape_ok {
            return Err(Error::InvalidParameter(format!("{lam} is not a level-1 shape of this system")));
        }
        let target = rational_to_f64(&m1.prob(lam));
        for &n in grid {
            let devs: Vec<f64> = sampled
                .iter()
                .map(|path| {
                    let t = &path.steps[n];
                    let (a, b) = (size(lam), size(t));
                    // dim_1(λ) = 1 for level-1 shapes
                    let v = (ln_dim(a, b, n - 1) - ln_dim(0, b, n)).exp();
                    (v - target).abs()
                })
                .collect();
            points.push(BoundaryPoint {
                n,
                lambda: lam.to_string(),
                target,
                mean_abs_deviation: devs.iter().sum::<f64>() / devs.len().max(1) as f64,
                max_abs_deviation: devs.iter().copied().fold(0.0, f64::max),
            });
        }
    }
    let monotone = points.chunks(grid.len()).all(|c| c.windows(2).all(|w| w[1].mean_abs_deviation < w[0].mean_abs_deviation));
    Ok(BoundaryReport { paths, seed, points, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::dim_between;
    use crate::grothendieck::{g_eval_det, g_skew_eval, G_principal_branching, GrothendieckParams};
    use crate::partitions::partitions_up_to;
    use crate::scalar::{q, qi};

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    #[test]
    fn exact_matches_branching() {
        for pp in [q(1, 3), q(1, 2), q(3, 10)] {
            for lam in partitions_up_to(6, 6) {
                for n in 0..=5 {
                    let a = principal_exact(&lam, n, &pp).unwrap();
                    let b = G_principal_branching(&lam, n, Rational::one() - &pp);
                    assert_eq!(a, b, "{lam} at N = {n}, p = {pp}");
                }
            }
        }
        assert_eq!(principal_exact(&p(&[1]), 2, &q(1, 2)).unwrap(), q(3, 2));
    }

    #[test]
    fn exact_matches_branching_larger() {
        let pp = q(3, 10);
        for lam in [p(&[9, 4]), p(&[7, 7, 2]), p(&[3, 3, 3, 3, 3, 1]), p(&[12])] {
            let a = principal_exact(&lam, 9, &pp).unwrap();
            let b = G_principal_branching(&lam, 9, Rational::one() - &pp);
            assert_eq!(a, b, "{lam}");
        }
    }

    #[test]
    fn quadrature_matches_exact() {
        let spec = RowLimitSpec::new(vec![2.0, 1.0], vec![0.3, -0.2], vec![], q(3, 10)).unwrap();
        for n in [20, 60] {
            let lam = spec.lambda_at(n);
            let e = row_lhs_ln(&spec, &lam, n).unwrap().exp();
            let (v, err) = row_lhs_quadrature(&spec, &lam, n).unwrap();
            assert!((e - v).abs() < 1e-9 * e.abs() + err, "{e} vs {v}");
        }
        let spec = ColLimitSpec::new(vec![0.7, 0.5], vec![0.0, 0.1], vec![], q(3, 10)).unwrap();
        for n in [20, 60] {
            let lam = spec.lambda_at(n);
            let e = col_lhs_ln(&spec, &lam, n).unwrap().exp();
            let (v, err) = col_lhs_quadrature(&spec, &lam, n).unwrap();
            assert!((e - v).abs() < 1e-9 * e.abs() + err, "{e} vs {v}");
        }
    }

    #[test]
    fn quadrature_with_test_variables() {
        // G_λ(z, 1^{N−1}) = Σ_μ G_{λ/μ}(z) G_μ(1^{N−1}) checked against branching in f64
        let spec = RowLimitSpec::new(vec![1.0], vec![0.0], vec![0.5], q(3, 10)).unwrap();
        let n = 12;
        let lam = spec.lambda_at(n);
        let (v, _) = row_lhs_quadrature(&spec, &lam, n).unwrap();
        let params = GrothendieckParams::tasep(0.3f64);
        let mut xs = vec![1.0; n];
        xs[0] = 0.5;
        let g = crate::grothendieck::G_eval(&lam, &xs, &params).unwrap();
        let chi: f64 = 0.5 - 0.3;
        let norm = (n as f64).sqrt() * ((1.0 - chi - 0.3) / 0.7f64).powi(n as i32) * (chi + 0.3).powi(lam.first() as i32);
        assert!((g * norm - v).abs() < 1e-9 * v.abs(), "{} vs {v}", g * norm);
    }

    #[test]
    fn limit_values() {
        let spec = RowLimitSpec::new(vec![1.0], vec![0.0], vec![], q(3, 10)).unwrap();
        let z = 0.5 / 0.2;
        let expect = z / (2.0 * std::f64::consts::PI).sqrt() / 2f64.sqrt();
        assert!((row_limit_value(&spec).unwrap() - expect).abs() < 1e-14);
        let sub = RowLimitSpec::new(vec![0.2, 0.1], vec![0.0, 0.0], vec![], q(3, 10)).unwrap();
        assert_eq!(row_limit_value(&sub).unwrap(), 1.0);
        let tied = RowLimitSpec::new(vec![1.0, 1.0], vec![0.5, 0.5], vec![], q(3, 10)).unwrap();
        assert_eq!(row_limit_value(&tied).unwrap(), 0.0);
        let cols = ColLimitSpec::new(vec![0.2], vec![0.0], vec![], q(3, 10)).unwrap();
        assert_eq!(col_limit_value(&cols).unwrap(), 1.0);
        assert!(RowLimitSpec::new(vec![3.0 / 7.0], vec![0.0], vec![], q(3, 10)).is_err());
    }

    #[test]
    fn subcritical_rows_tend_to_one() {
        let spec = RowLimitSpec::new(vec![0.2], vec![0.0], vec![], q(3, 10)).unwrap();
        let r = row_limit_probe(&spec, &[50, 100, 200, 400]).unwrap();
        assert!(r.monotone, "{r:?}");
        assert!(r.last_error() < 1e-3, "{r:?}");
    }

    #[test]
    fn g_normalized_against_exact() {
        let pp = 0.3;
        let chis = [0.2, 0.2];
        let lam = p(&[5, 3]);
        let exact = g_skew_eval(&lam, &Partition::empty(), &[q(1, 5), q(1, 5)], &GrothendieckParams::new(q(3, 10), qi(0)));
        let v = g_normalized(&lam, &chis, pp).unwrap() + 5.0 * 0.5f64.ln() + 3.0 * 0.5f64.ln();
        assert!((v.exp() - rational_to_f64(&exact)).abs() < 1e-12);
        let lam = p(&[6, 2, 1]);
        let xs = [q(2, 5), q(1, 4), q(1, 10)];
        let exact = g_eval_det(&lam, &q(3, 10), &xs).unwrap();
        let v = g_normalized(&lam, &[0.4, 0.25, 0.1], pp).unwrap() + 6.0 * 0.7f64.ln() + 2.0 * 0.55f64.ln() + 0.4f64.ln();
        assert!((v.exp() / rational_to_f64(&exact) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g_limit_one_variable_is_exact() {
        let r = g_limit_probe(&[0.2], &[1.0], &[0.3], 0.3, &[50, 100, 200, 400]).unwrap();
        for pt in &r.points {
            assert!(pt.rel_error < 1e-12, "{pt:?}");
        }
    }

    #[test]
    fn gaussian_small_cases() {
        let r = gaussian_lemma_check(1.0, &[0.0]).unwrap();
        assert!((r.lhs - (2.0 * std::f64::consts::PI).powf(-0.5)).abs() < 1e-12);
        let r = gaussian_lemma_check(2.0, &[1.0]).unwrap();
        let expect = (2.0 * std::f64::consts::PI).powf(-0.5) * 0.5 * (-0.5f64).exp();
        assert!((r.lhs - expect).abs() < 1e-12, "{r:?}");
        let r = gaussian_lemma_check(1.0, &[0.7, 0.7]).unwrap();
        assert!(r.lhs.abs() < 1e-12);
    }

    #[test]
    fn gue_normalizes() {
        assert!((gue_normalization(&[1.0]).unwrap() - 1.0).abs() < 1e-6);
        assert!((gue_normalization(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-6);
        assert!((gue_normalization(&[2.0, 1.0]).unwrap() - 1.0).abs() < 1e-6);
        assert!((gue2_marginal_cdf(0, 8.0) - 1.0).abs() < 1e-9);
        assert!(gue2_marginal_cdf(1, -8.0) < 1e-9);
    }

    #[test]
    fn closed_form_dims() {
        let pp = q(3, 10);
        let qf = 0.7;
        for (a, b, k) in [(0, 0, 3), (0, 4, 3), (2, 5, 4), (0, 1, 1), (3, 3, 2)] {
            let exact = rational_to_f64(&dim_between(&p(&[a]), &p(&[b]), k, &pp));
            assert!((ln_dim_row(a, b, k, qf).exp() - exact).abs() < 1e-12 * exact.max(1.0), "row {a} {b} {k}");
        }
        let col = |j: usize| Partition::new(vec![1; j]).unwrap();
        for (a, b, k) in [(0, 0, 3), (0, 2, 3), (1, 3, 4), (2, 2, 3), (0, 3, 3)] {
            let exact = rational_to_f64(&dim_between(&col(a), &col(b), k, &pp));
            assert!((ln_dim_col(a, b, k, qf).exp() - exact).abs() < 1e-12 * exact.max(1.0), "col {a} {b} {k}");
        }
    }

    #[test]
    fn closed_form_measures() {
        let pp = q(3, 10);
        let rows = clt_rows_exact(&qi(1), &pp, 3).unwrap();
        let m = measure_gt(&GtSpec::new(vec![qi(1)], vec![]), 3, &pp, 1e-12).unwrap();
        let mut acc = 0.0;
        for (i, (_, v)) in m.atoms.iter().enumerate().take(6) {
            acc += rational_to_f64(v);
            assert!((rows.cdf[i].1 - acc).abs() < 1e-12);
        }
        let cols = clt_cols_exact(&q(3, 5), &pp, 3).unwrap();
        let m = measure_gt(&GtSpec::new(vec![], vec![q(3, 5)]), 3, &pp, 1e-12).unwrap();
        for j in 0..=3 {
            let lam = Partition::new(vec![1; j]).unwrap();
            let prev = if j == 0 { 0.0 } else { cols.cdf[j - 1].1 };
            assert!((cols.cdf[j].1 - prev - rational_to_f64(&m.prob(&lam))).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_p_value_shape() {
        assert!(ks_p_value(0.001, 10_000) > 0.99);
        assert!(ks_p_value(0.05, 10_000) < 1e-10);
    }
}
