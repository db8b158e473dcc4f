//! Evaluation of G_λ^{(a,b)}, g_λ^{(a,b)}, their skew versions and the
//! principal specializations G_λ^{(0,−p)}(1^N).
#![allow(non_snake_case)]

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::branching::{self, Bound, Table};
use crate::error::{Error, Result};
use crate::graph::PhiSpec;
use crate::partitions::{down_set, interlaces, skew_stats, Partition};
use crate::scalar::{binom, det, rational_to_f64, Rational, Scalar, Semiring};

/// The pair (a, b) indexing the two-parameter family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrothendieckParams<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> GrothendieckParams<T> {
    pub fn new(a: T, b: T) -> Self {
        GrothendieckParams { a, b }
    }
    /// (0, −p): the weights of the graph and of geometric TASEP.
    pub fn tasep(p: T) -> Self {
        GrothendieckParams { a: T::zero(), b: -p }
    }
    /// (−a, −b), the pairing partner of g^{(a,b)}.
    pub fn negated(&self) -> Self {
        GrothendieckParams { a: -self.a.clone(), b: -self.b.clone() }
    }
    pub fn swapped(&self) -> Self {
        GrothendieckParams { a: self.b.clone(), b: self.a.clone() }
    }
    pub fn convert<U: Scalar>(&self, f: impl Fn(&T) -> U) -> GrothendieckParams<U> {
        GrothendieckParams { a: f(&self.a), b: f(&self.b) }
    }
}

/// Per-step weights (x', g) of a variable: G_{λ/μ}(x) = x'^{|λ/μ|} g^{r(μ/λ̄)}.
fn one_var_weights<T: Scalar>(x: &T, params: &GrothendieckParams<T>) -> Result<(T, T)> {
    let den = T::one() - params.a.clone() * x.clone();
    if den.is_zero() {
        return Err(Error::Pole);
    }
    let xp = x.clone() / den.clone();
    let g = (T::one() + params.b.clone() * x.clone()) / den;
    Ok((xp, g))
}

/// G_{λ/μ}(x) in one variable.
pub fn G_skew_one<T: Scalar>(lambda: &Partition, mu: &Partition, x: &T, params: &GrothendieckParams<T>) -> Result<T> {
    let (xp, g) = one_var_weights(x, params)?;
    if !interlaces(mu, lambda) {
        return Ok(T::zero());
    }
    let d = (lambda.size() - mu.size()) as u32;
    let lb = lambda.bar();
    let r = (1..=mu.len()).filter(|&i| mu.part(i) > lb.part(i)).count() as u32;
    Ok(xp.powi(d) * g.powi(r))
}

/// g_{λ/μ}(x) in one variable: b^{r−b_c}(a+b)^i x^{b_c}(x+a)^{c−b_c}.
pub fn g_skew_one<T: Scalar>(lambda: &Partition, mu: &Partition, x: &T, params: &GrothendieckParams<T>) -> T {
    let Ok(s) = skew_stats(lambda, mu) else {
        return T::zero();
    };
    let ab = params.a.clone() + params.b.clone();
    params.b.powi((s.rows - s.components) as u32)
        * ab.powi(s.excess as u32)
        * x.powi(s.components as u32)
        * (x.clone() + params.a.clone()).powi((s.cols - s.components) as u32)
}

fn check_distinct<T: Scalar>(xs: &[T], allow_zero: bool) -> Result<()> {
    for (i, x) in xs.iter().enumerate() {
        if !allow_zero && x.is_zero() {
            return Err(Error::DegeneratePoints);
        }
        if xs[..i].iter().any(|y| y == x) {
            return Err(Error::DegeneratePoints);
        }
    }
    Ok(())
}

fn vandermonde<T: Scalar>(xs: &[T]) -> T {
    let mut v = T::one();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            v = v * (xs[i].clone() - xs[j].clone());
        }
    }
    v
}

/// G_λ^{(a,b)}(x_1..x_n) as the ratio of alternants.
pub fn G_eval_det<T: Scalar>(lambda: &Partition, params: &GrothendieckParams<T>, xs: &[T]) -> Result<T> {
    check_distinct(xs, false)?;
    let n = xs.len();
    if lambda.len() > n {
        return Ok(T::zero());
    }
    let mut m = Vec::with_capacity(n);
    for x in xs {
        let den = T::one() - params.a.clone() * x.clone();
        if den.is_zero() {
            return Err(Error::Pole);
        }
        let plus = T::one() + params.b.clone() * x.clone();
        let row = (1..=n)
            .map(|j| {
                let lj = lambda.part(j) as u32;
                x.powi(lj + (n - j) as u32) * plus.powi((j - 1) as u32) / den.powi(lj)
            })
            .collect();
        m.push(row);
    }
    Ok(det(m) / vandermonde(xs))
}

/// G_{λ/μ}(x_1..x_n) by summing over interlacing chains.
pub fn G_skew_eval<T: Scalar>(lambda: &Partition, mu: &Partition, xs: &[T], params: &GrothendieckParams<T>) -> Result<T> {
    let steps = xs.iter().map(|x| one_var_weights(x, params)).collect::<Result<Vec<_>>>()?;
    if !lambda.contains(mu) {
        return Ok(T::zero());
    }
    let t = branching::chain_last(mu, &steps, &Bound::Sub(lambda.clone()));
    Ok(t.get(lambda).cloned().unwrap_or_else(T::zero))
}

pub fn G_eval<T: Scalar>(lambda: &Partition, xs: &[T], params: &GrothendieckParams<T>) -> Result<T> {
    G_skew_eval(lambda, &Partition::empty(), xs, params)
}

/// g_{λ/μ}(x_1..x_n) by summing over chains μ ⊆ ν^1 ⊆ … ⊆ λ.
pub fn g_skew_eval<T: Scalar>(lambda: &Partition, mu: &Partition, xs: &[T], params: &GrothendieckParams<T>) -> T {
    if !lambda.contains(mu) {
        return T::zero();
    }
    let shapes: Vec<Partition> = down_set(lambda).into_iter().filter(|p| p.contains(mu)).collect();
    let mut cur: HashMap<Partition, T> = HashMap::new();
    cur.insert(mu.clone(), T::one());
    for x in xs {
        let mut next = HashMap::new();
        for nu in &shapes {
            let mut acc = T::zero();
            for (kappa, v) in &cur {
                if nu.contains(kappa) {
                    acc = acc + g_skew_one(nu, kappa, x, params) * v.clone();
                }
            }
            if !acc.is_zero() {
                next.insert(nu.clone(), acc);
            }
        }
        cur = next;
    }
    cur.get(lambda).cloned().unwrap_or_else(T::zero)
}

/// g_λ^{(a,0)}(x_1..x_n) as det[x_i^{n−j} φ_{λ_j}(x_i)] over the Vandermonde,
/// with φ_0 = 1 and φ_k(x) = x(x+a)^{k−1}.
pub fn g_eval_det<T: Scalar>(lambda: &Partition, a: &T, xs: &[T]) -> Result<T> {
    check_distinct(xs, true)?;
    let n = xs.len();
    if lambda.len() > n {
        return Err(Error::InvalidParameter(format!("l({lambda}) exceeds {n} variables")));
    }
    let phi = |k: usize, x: &T| -> T {
        if k == 0 {
            T::one()
        } else {
            x.clone() * (x.clone() + a.clone()).powi((k - 1) as u32)
        }
    };
    let m = xs
        .iter()
        .map(|x| (1..=n).map(|j| x.powi((n - j) as u32) * phi(lambda.part(j), x)).collect())
        .collect();
    Ok(det(m) / vandermonde(xs))
}

/// h_c of k copies of b: C(c+k−1, c) b^c.
fn h_const<T: Scalar>(c: usize, k: usize, b: &T) -> T {
    if k == 0 {
        return if c == 0 { T::one() } else { T::zero() };
    }
    T::from_bigint(&binom((c + k - 1) as i64, c as i64)) * b.powi(c as u32)
}

/// g_λ^{(0,b)} under the specialization whose complete homogeneous values are `h`.
pub fn g_eval_jt<T: Scalar>(lambda: &Partition, b: &T, h: &[T]) -> Result<T> {
    let n = lambda.len();
    if n == 0 {
        return Ok(T::one());
    }
    let need = lambda.first() + n - 1;
    if h.len() <= need {
        return Err(Error::InvalidParameter(format!("need {} h-coefficients, got {}", need + 1, h.len())));
    }
    let m = (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    let idx = lambda.part(i) as i64 - i as i64 + j as i64;
                    if idx < 0 {
                        return T::zero();
                    }
                    let idx = idx as usize;
                    let mut acc = T::zero();
                    for c in 0..=idx {
                        let hc = h_const(c, i - 1, b);
                        if !hc.is_zero() {
                            acc = acc + h[idx - c].clone() * hc;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(det(m))
}

/// Taylor coefficients h_0..h_K of Φ(z)/Φ(0).
pub fn phi_h_coeffs<T: Scalar>(phi: &PhiSpec, k: usize) -> Result<Vec<T>> {
    if phi.s > 0 || phi.factors.iter().any(|(x, _)| *x == -Rational::one()) {
        return Err(Error::InvalidParameter("Φ(0) = 0; strip the z^s factor first".into()));
    }
    let mut out = vec![T::zero(); k + 1];
    out[0] = T::one();
    for (x, y) in &phi.factors {
        let one = Rational::one();
        let gamma = T::from_rational(&(x / (&one + x)));
        let eta = T::from_rational(&(y / (&one + y)));
        // (1 − γz)/(1 − ηz) = 1 + Σ_{k≥1} η^{k−1}(η − γ) z^k
        let mut series = vec![T::zero(); k + 1];
        series[0] = T::one();
        let mut pw = eta.clone() - gamma;
        for s in series.iter_mut().skip(1) {
            *s = pw.clone();
            pw = pw * eta.clone();
        }
        let mut conv = vec![T::zero(); k + 1];
        for i in 0..=k {
            if out[i].is_zero() {
                continue;
            }
            for j in 0..=k - i {
                conv[i + j] = conv[i + j].clone() + out[i].clone() * series[j].clone();
            }
        }
        out = conv;
    }
    Ok(out)
}

/// Which method evaluates G_λ^{(0,−p)}(1^N).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Branching,
    JtSeries,
    Contour,
}

/// A truncated series value with a certified bound on the omitted part.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTail {
    pub computed_sum: Rational,
    pub tail_bound: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PrincipalValue {
    Exact(Rational),
    Series(SeriesTail),
    Approx { value: f64, error: f64 },
}

impl PrincipalValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            PrincipalValue::Exact(v) => rational_to_f64(v),
            PrincipalValue::Series(s) => rational_to_f64(&s.computed_sum),
            PrincipalValue::Approx { value, .. } => *value,
        }
    }
    /// Absolute error bound (zero for exact values).
    pub fn error(&self) -> f64 {
        match self {
            PrincipalValue::Exact(_) => 0.0,
            PrincipalValue::Series(s) => rational_to_f64(&s.tail_bound),
            PrincipalValue::Approx { error, .. } => *error,
        }
    }
}

/// Weighted level tables dim_n(μ → ν) for ν ⊆ bound, n = 0..levels, starting from `start`,
/// with edge weight (1−p)^{r(μ/ν̄)}.
pub fn principal_levels<T: Semiring>(start: &Partition, levels: usize, one_minus_p: T, bound: &Bound) -> Vec<Table<T>> {
    let steps = vec![(T::one(), one_minus_p); levels];
    branching::chain(start, &steps, bound)
}

pub fn principal_last<T: Semiring>(start: &Partition, levels: usize, one_minus_p: T, bound: &Bound) -> Table<T> {
    let steps = vec![(T::one(), one_minus_p); levels];
    branching::chain_last(start, &steps, bound)
}

/// G_λ^{(0,−p)}(1^N) by the branching recursion, in any semiring.
pub fn G_principal_branching<T: Semiring>(lambda: &Partition, n: usize, one_minus_p: T) -> T {
    if lambda.len() > n {
        return T::zero();
    }
    principal_last(&Partition::empty(), n, one_minus_p, &Bound::Sub(lambda.clone()))
        .remove(lambda)
        .unwrap_or_else(T::zero)
}

/// C(a+N−1, N−1) as a rational, zero for a < 0.
fn h_ones(a: i64, n: usize) -> Rational {
    if a < 0 {
        Rational::zero()
    } else {
        Rational::from_integer(binom(a + n as i64 - 1, n as i64 - 1))
    }
}

/// One entry f_k^{(m,l)}(1^N) of the series determinant (a = 0), truncated so
/// the omitted tail is at most `eps`; returns (partial sum, tail bound).
fn jt_entry(k: i64, l: i64, n: usize, p: &Rational, eps: &Rational, max_terms: usize) -> Result<(Rational, Rational)> {
    if l <= 0 {
        let mut s = Rational::zero();
        let mp = -p.clone();
        for b in 0..=(-l) {
            s += h_ones(k + b, n) * Rational::from_integer(binom(-l, b)) * num_traits::pow(mp.clone(), b as usize);
        }
        return Ok((s, Rational::zero()));
    }
    // terms t_b = C(k+b+N−1, N−1) C(b+l−1, b) p^b, zero while k+b < 0;
    // the ratio t_{b+1}/t_b is non-increasing, so a geometric bound on the tail holds.
    let ratio = |b: i64| -> Rational {
        let m = k + b;
        Rational::new((m + n as i64).into(), (m + 1).into()) * Rational::new((b + l).into(), (b + 1).into()) * p
    };
    let mut b = (-k).max(0);
    let mut t = h_ones(k + b, n) * Rational::from_integer(binom(b + l - 1, b)) * num_traits::pow(p.clone(), b as usize);
    let mut sum = Rational::zero();
    for _ in 0..max_terms {
        sum += &t;
        let next = &t * ratio(b);
        let r_next = ratio(b + 1);
        if r_next < Rational::one() {
            let tail = &next / (Rational::one() - &r_next);
            if &tail <= eps {
                return Ok((sum, tail));
            }
        }
        t = next;
        b += 1;
    }
    Err(Error::TailNotConverged { bound: f64::INFINITY, tol: rational_to_f64(eps) })
}

fn permanent(m: &[Vec<Rational>]) -> Rational {
    fn rec(m: &[Vec<Rational>], row: usize, used: &mut Vec<bool>) -> Rational {
        if row == m.len() {
            return Rational::one();
        }
        let mut acc = Rational::zero();
        for c in 0..m.len() {
            if !used[c] && !m[row][c].is_zero() {
                used[c] = true;
                acc += &m[row][c] * rec(m, row + 1, used);
                used[c] = false;
            }
        }
        acc
    }
    rec(m, 0, &mut vec![false; m.len()])
}

/// G_λ^{(0,−p)}(1^N) from the Jacobi–Trudi series, with certified tail bound ≤ tol.
pub fn G_principal_jt_series(lambda: &Partition, n: usize, p: &Rational, tol: &Rational) -> Result<SeriesTail> {
    let size = lambda.len();
    if size == 0 {
        return Ok(SeriesTail { computed_sum: Rational::one(), tail_bound: Rational::zero() });
    }
    if size > n {
        return Ok(SeriesTail { computed_sum: Rational::zero(), tail_bound: Rational::zero() });
    }
    let pref = num_traits::pow(Rational::one() - p, n * size);
    let mut eps = tol.clone();
    for _ in 0..40 {
        let mut s = vec![vec![Rational::zero(); size]; size];
        let mut t = vec![vec![Rational::zero(); size]; size];
        for i in 1..=size {
            for j in 1..=size {
                let k = lambda.part(i) as i64 - i as i64 + j as i64;
                let l = j as i64 - i as i64 + 1;
                let (v, e) = jt_entry(k, l, n, p, &eps, 200_000)?;
                s[i - 1][j - 1] = v;
                t[i - 1][j - 1] = e;
            }
        }
        let abs: Vec<Vec<Rational>> = s.iter().map(|r| r.iter().map(|v| v.abs()).collect()).collect();
        let upper: Vec<Vec<Rational>> =
            abs.iter().zip(&t).map(|(a, e)| a.iter().zip(e).map(|(x, y)| x + y).collect()).collect();
        let bound = (permanent(&upper) - permanent(&abs)) * &pref;
        if &bound <= tol {
            let value = det(s) * &pref;
            return Ok(SeriesTail { computed_sum: value, tail_bound: bound });
        }
        let shrink = (&bound / tol).ceil() * Rational::from_integer(4.into());
        eps = &eps / shrink;
    }
    Err(Error::TailNotConverged { bound: f64::INFINITY, tol: rational_to_f64(tol) })
}

/// G_λ^{(0,−p)}(1^N) by the chosen backend.
pub fn G_principal(lambda: &Partition, n: usize, p: &Rational, backend: Backend, tol: f64) -> Result<PrincipalValue> {
    if !(p.is_positive() && *p < Rational::one()) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0,1)")));
    }
    if lambda.len() > n {
        return Err(Error::InvalidParameter(format!("l({lambda}) exceeds N = {n}")));
    }
    match backend {
        Backend::Branching => Ok(PrincipalValue::Exact(G_principal_branching(lambda, n, Rational::one() - p))),
        Backend::JtSeries => {
            let tol_q = BigRational::from_float(tol).ok_or_else(|| Error::InvalidParameter("tolerance".into()))?;
            G_principal_jt_series(lambda, n, p, &tol_q).map(PrincipalValue::Series)
        }
        Backend::Contour => {
            let (value, error) = crate::contour::principal(lambda, n, rational_to_f64(p), tol)?;
            Ok(PrincipalValue::Approx { value, error })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    #[test]
    fn one_variable_values() {
        let par = GrothendieckParams::tasep(q(1, 3));
        assert_eq!(G_skew_one(&p(&[1]), &Partition::empty(), &qi(1), &par).unwrap(), qi(1));
        assert_eq!(G_skew_one(&p(&[1]), &p(&[1]), &qi(1), &par).unwrap(), q(2, 3));
        assert_eq!(G_skew_one(&p(&[1, 1]), &p(&[2]), &qi(1), &par).unwrap(), qi(0));
        let pole = GrothendieckParams::new(qi(1), qi(0));
        assert_eq!(G_skew_one(&p(&[1]), &Partition::empty(), &qi(1), &pole), Err(Error::Pole));
    }

    #[test]
    fn two_variable_g1() {
        let pp = q(2, 7);
        let par = GrothendieckParams::tasep(pp.clone());
        let (x1, x2) = (q(1, 3), q(-2, 5));
        let expect = &x1 + &x2 - &pp * &x1 * &x2;
        let xs = [x1.clone(), x2.clone()];
        assert_eq!(G_eval_det(&p(&[1]), &par, &xs).unwrap(), expect);
        assert_eq!(G_eval(&p(&[1]), &xs, &par).unwrap(), expect);
        assert_eq!(G_eval_det(&Partition::empty(), &par, &xs).unwrap(), qi(1));
        assert_eq!(G_eval_det(&p(&[1]), &par, &[x1.clone(), x1]), Err(Error::DegeneratePoints));
    }

    #[test]
    fn one_row_is_power() {
        let par = GrothendieckParams::tasep(q(1, 2));
        for n in 0..=6 {
            let lam = Partition::new(vec![n]).unwrap();
            let z = q(3, 7);
            assert_eq!(G_eval_det(&lam, &par, &[z.clone()]).unwrap(), num_traits::pow(z.clone(), n));
            assert_eq!(G_eval(&lam, &[z.clone()], &par).unwrap(), num_traits::pow(z, n));
        }
    }

    #[test]
    fn skew_g_one_examples() {
        let (a, b, x) = (q(1, 3), q(2, 5), q(3, 7));
        let par = GrothendieckParams::new(a.clone(), b.clone());
        let v = g_skew_one(&p(&[7, 4, 3, 2]), &p(&[5, 2]), &x, &par);
        let expect = &b * &b * (&a + &b) * &x * &x * num_traits::pow(&x + &a, 4);
        assert_eq!(v, expect);
        assert_eq!(g_skew_one(&p(&[2, 1]), &p(&[2, 1]), &x, &par), qi(1));
        let pp = q(1, 3);
        let par = GrothendieckParams::new(qi(0), pp.clone());
        for m in 1..6 {
            let lam = Partition::new(vec![m]).unwrap();
            let v = g_skew_one(&lam, &Partition::empty(), &x, &par);
            // one row is a single component: no power of b survives
            assert_eq!(v, num_traits::pow(x.clone(), m));
        }
    }

    #[test]
    fn g_one_variable_closed_form() {
        let (pp, pt) = (q(1, 3), q(1, 5));
        let par = GrothendieckParams::new(qi(0), pp.clone());
        for n in 0..=6 {
            for lam in crate::partitions::partitions_of(n) {
                let v = g_skew_eval(&lam, &Partition::empty(), &[pt.clone()], &par);
                let e = num_traits::pow(pp.clone(), lam.size() - lam.first()) * num_traits::pow(pt.clone(), lam.first());
                assert_eq!(v, e, "{lam}");
            }
        }
    }

    #[test]
    fn jt_examples() {
        let t = q(2, 3);
        let pp = q(1, 5);
        let h: Vec<Rational> = (0..6).map(|k| num_traits::pow(t.clone(), k)).collect();
        assert_eq!(g_eval_jt(&p(&[1, 1]), &pp, &h).unwrap(), &t * &pp);
        assert_eq!(g_eval_jt(&p(&[3]), &pp, &h).unwrap(), h[3].clone());
    }

    #[test]
    fn g_det_one_row() {
        let (chi, a) = (q(1, 5), q(3, 10));
        for m in 1..6 {
            let lam = Partition::new(vec![m]).unwrap();
            let v = g_eval_det(&lam, &a, &[chi.clone()]).unwrap();
            assert_eq!(v, &chi * num_traits::pow(&chi + &a, m - 1));
        }
    }

    #[test]
    fn principal_small() {
        let pp = q(1, 2);
        let v = G_principal(&p(&[1]), 2, &pp, Backend::Branching, 1e-12).unwrap();
        assert_eq!(v, PrincipalValue::Exact(q(3, 2)));
        let s = G_principal_jt_series(&p(&[1]), 2, &pp, &q(1, 1_000_000_000_000)).unwrap();
        assert!((rational_to_f64(&s.computed_sum) - 1.5).abs() <= rational_to_f64(&s.tail_bound) + 1e-15);
        assert_eq!(G_principal_branching(&Partition::empty(), 3, q(1, 2)), qi(1));
    }

    #[test]
    fn jt_series_matches_branching() {
        let pp = q(1, 3);
        let tol = q(1, 10i64.pow(14));
        for lam in [p(&[1]), p(&[2, 1]), p(&[3, 1]), p(&[1, 1, 1]), p(&[2, 2]), p(&[1, 1])] {
            for n in [3usize, 5, 8] {
                let exact = G_principal_branching(&lam, n, Rational::one() - &pp);
                let s = G_principal_jt_series(&lam, n, &pp, &tol).unwrap();
                assert!((&exact - &s.computed_sum).abs() <= s.tail_bound, "{lam} N={n}");
            }
        }
    }

    #[test]
    fn phi_coefficients() {
        let pt = q(1, 3);
        let geom = PhiSpec::geometric(&pt);
        let h: Vec<Rational> = phi_h_coeffs(&geom, 5).unwrap();
        for (k, v) in h.iter().enumerate() {
            assert_eq!(*v, num_traits::pow(pt.clone(), k));
        }
        let one = PhiSpec { s: 0, factors: vec![] };
        let h: Vec<Rational> = phi_h_coeffs(&one, 3).unwrap();
        assert_eq!(h, vec![qi(1), qi(0), qi(0), qi(0)]);
        let other = PhiSpec::geometric(&q(1, 4));
        let both = PhiSpec { s: 0, factors: [geom.factors.clone(), other.factors.clone()].concat() };
        let (a, b, c): (Vec<Rational>, Vec<Rational>, Vec<Rational>) =
            (phi_h_coeffs(&geom, 6).unwrap(), phi_h_coeffs(&other, 6).unwrap(), phi_h_coeffs(&both, 6).unwrap());
        for k in 0..=6 {
            let conv: Rational = (0..=k).map(|i| &a[i] * &b[k - i]).sum();
            assert_eq!(c[k], conv);
        }
        assert!(phi_h_coeffs::<Rational>(&PhiSpec { s: 1, factors: vec![] }, 2).is_err());
    }
}
