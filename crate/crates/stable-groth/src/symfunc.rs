//! Truncated symmetric polynomials over the rationals, Schur expansions of
//! G_λ and g_λ, and the involution ω at the level of Schur coefficients.
//!
//! Elements are stored in the monomial basis m_ν. Passing to the Schur basis
//! uses the Kostka matrix, which is unitriangular in dominance order.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_traits::{One, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grothendieck::{G_skew_eval, GrothendieckParams};
use crate::partitions::{interlacing_below, partitions_of, partitions_up_to, Partition};
use crate::scalar::{binom, det, Rational};

/// Symmetric polynomial in `nvars` variables, truncated above `max_degree`,
/// stored as Σ c_ν m_ν.
#[derive(Clone, Debug, PartialEq)]
pub struct SymPoly {
    pub nvars: usize,
    pub max_degree: usize,
    coeffs: BTreeMap<Partition, Rational>,
}

impl SymPoly {
    pub fn zero(nvars: usize, max_degree: usize) -> Self {
        SymPoly { nvars, max_degree, coeffs: BTreeMap::new() }
    }

    /// Builds a polynomial from explicit monomials x^e, rejecting input that
    /// is not invariant under permuting the variables.
    pub fn from_monomials(nvars: usize, max_degree: usize, terms: &[(Vec<usize>, Rational)]) -> Result<Self> {
        let mut full: HashMap<Vec<usize>, Rational> = HashMap::new();
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::InvalidParameter(format!("exponent vector {e:?} has wrong length")));
            }
            if e.iter().sum::<usize>() > max_degree {
                continue;
            }
            *full.entry(e.clone()).or_insert_with(Rational::zero) += c;
        }
        full.retain(|_, c| !c.is_zero());
        let mut coeffs = BTreeMap::new();
        for (e, c) in &full {
            let mut sorted = e.clone();
            sorted.sort_unstable_by(|a, b| b.cmp(a));
            let lam = Partition::new(sorted.clone())?;
            match coeffs.get(&lam) {
                Some(v) if v != c => return Err(Error::NotSymmetric),
                _ => {
                    coeffs.insert(lam, c.clone());
                }
            }
        }
        // every rearrangement of a present exponent must be present too
        for (lam, _) in &coeffs {
            let count = rearrangements(&lam.padded(nvars)).len();
            let present = full.keys().filter(|e| sorted_desc(e) == lam.padded(nvars)).count();
            if count != present {
                return Err(Error::NotSymmetric);
            }
        }
        Ok(SymPoly { nvars, max_degree, coeffs })
    }

    pub fn monomial(nvars: usize, max_degree: usize, nu: &Partition) -> Self {
        let mut p = SymPoly::zero(nvars, max_degree);
        if nu.len() <= nvars && nu.size() <= max_degree {
            p.coeffs.insert(nu.clone(), Rational::one());
        }
        p
    }

    /// h_k = Σ_{|ν|=k} m_ν.
    pub fn h(nvars: usize, max_degree: usize, k: usize) -> Self {
        let mut p = SymPoly::zero(nvars, max_degree);
        if k <= max_degree {
            for nu in partitions_of(k).into_iter().filter(|nu| nu.len() <= nvars) {
                p.coeffs.insert(nu, Rational::one());
            }
        }
        p
    }

    /// e_k = m_{1^k}.
    pub fn e(nvars: usize, max_degree: usize, k: usize) -> Self {
        SymPoly::monomial(nvars, max_degree, &Partition::from_slice(&vec![1; k]))
    }

    pub fn coeff(&self, nu: &Partition) -> Rational {
        self.coeffs.get(nu).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Partition, &Rational)> {
        self.coeffs.iter()
    }

    pub fn add(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.clone();
        out.max_degree = self.max_degree.min(other.max_degree);
        for (k, v) in &other.coeffs {
            *out.coeffs.entry(k.clone()).or_insert_with(Rational::zero) += v;
        }
        out.coeffs.retain(|k, v| !v.is_zero() && k.size() <= out.max_degree);
        out
    }

    pub fn scale(&self, c: &Rational) -> SymPoly {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v *= c;
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    /// Σ c_μ s_μ written in the monomial basis.
    pub fn from_schur(exp: &SchurExpansion, nvars: usize) -> SymPoly {
        let mut p = SymPoly::zero(nvars, exp.degree_bound);
        for (mu, c) in &exp.coefficients {
            let k = kostka_table(mu.size());
            for nu in partitions_of(mu.size()).into_iter().filter(|nu| nu.len() <= nvars) {
                if let Some(kv) = k.get(&(mu.clone(), nu.clone())) {
                    *p.coeffs.entry(nu).or_insert_with(Rational::zero) += c * kv;
                }
            }
        }
        p.coeffs.retain(|_, v| !v.is_zero());
        p
    }

    pub fn eval(&self, xs: &[Rational]) -> Result<Rational> {
        if xs.len() != self.nvars {
            return Err(Error::InvalidParameter(format!("expected {} values", self.nvars)));
        }
        let mut acc = Rational::zero();
        for (nu, c) in &self.coeffs {
            let mut m = Rational::zero();
            for e in rearrangements(&nu.padded(self.nvars)) {
                m += e.iter().zip(xs).map(|(&k, x)| num_traits::pow(x.clone(), k)).fold(Rational::one(), |a, b| a * b);
            }
            acc += c * m;
        }
        Ok(acc)
    }
}

fn sorted_desc(e: &[usize]) -> Vec<usize> {
    let mut s = e.to_vec();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

/// Distinct permutations of an exponent vector.
fn rearrangements(e: &[usize]) -> Vec<Vec<usize>> {
    let mut v = e.to_vec();
    v.sort_unstable();
    let mut out = vec![v.clone()];
    // next lexicographic permutation
    loop {
        let Some(i) = (0..v.len().saturating_sub(1)).rev().find(|&i| v[i] < v[i + 1]) else {
            break;
        };
        let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
        v.swap(i, j);
        v[i + 1..].reverse();
        out.push(v.clone());
    }
    out
}

/// Schur coefficients of a symmetric function, valid through `degree_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurExpansion {
    pub coefficients: BTreeMap<Partition, Rational>,
    pub degree_bound: usize,
}

impl Serialize for SchurExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.coefficients.len()))?;
        for (k, v) in &self.coefficients {
            m.serialize_entry(&k.to_string(), &v.to_string())?;
        }
        m.end()
    }
}

impl SchurExpansion {
    pub fn coeff(&self, lambda: &Partition) -> Rational {
        self.coefficients.get(lambda).cloned().unwrap_or_else(Rational::zero)
    }

    /// Applies ω: s_λ ↦ s_λ'.
    pub fn transpose(&self) -> SchurExpansion {
        SchurExpansion {
            coefficients: self.coefficients.iter().map(|(k, v)| (k.conjugate(), v.clone())).collect(),
            degree_bound: self.degree_bound,
        }
    }

    pub fn truncate(&self, degree: usize) -> SchurExpansion {
        SchurExpansion {
            coefficients: self.coefficients.iter().filter(|(k, _)| k.size() <= degree).map(|(k, v)| (k.clone(), v.clone())).collect(),
            degree_bound: degree.min(self.degree_bound),
        }
    }

    /// Σ c_ν s_ν(xs); exact for polynomials of degree ≤ degree_bound.
    pub fn eval(&self, xs: &[Rational]) -> Rational {
        self.coefficients.iter().map(|(nu, c)| c * schur_eval(nu, xs)).sum()
    }
}

thread_local! {
    static KOSTKA: RefCell<HashMap<usize, Rc<HashMap<(Partition, Partition), Rational>>>> = RefCell::new(HashMap::new());
}

/// K_{μν} for |μ| = |ν| = n: the number of semistandard tableaux of shape μ
/// and content ν, counted as chains of horizontal strips.
fn kostka_table(n: usize) -> Rc<HashMap<(Partition, Partition), Rational>> {
    if let Some(t) = KOSTKA.with(|k| k.borrow().get(&n).cloned()) {
        return t;
    }
    let parts = partitions_of(n);
    let mut table = HashMap::new();
    for nu in &parts {
        // all shapes reachable with content ν
        let mut cur: HashMap<Partition, Rational> = HashMap::new();
        cur.insert(Partition::empty(), Rational::one());
        let mut size = 0;
        for &strip in nu.parts() {
            size += strip;
            let mut next: HashMap<Partition, Rational> = HashMap::new();
            for shape in partitions_of(size) {
                let mut acc = Rational::zero();
                for below in interlacing_below(&shape) {
                    if let Some(v) = cur.get(&below) {
                        acc += v;
                    }
                }
                if !acc.is_zero() {
                    next.insert(shape, acc);
                }
            }
            cur = next;
        }
        for (mu, v) in cur {
            table.insert((mu, nu.clone()), v);
        }
    }
    let t = Rc::new(table);
    KOSTKA.with(|k| k.borrow_mut().insert(n, t.clone()));
    t
}

/// Partitions of n, largest in dominance (and lexicographic) order first.
fn lex_desc(n: usize) -> Vec<Partition> {
    let mut v = partitions_of(n);
    v.sort_by(|a, b| b.parts().cmp(a.parts()));
    v
}

/// s_λ(xs): bialternant for distinct points, interlacing sum otherwise.
pub fn schur_eval(lambda: &Partition, xs: &[Rational]) -> Rational {
    let n = xs.len();
    if lambda.len() > n {
        return Rational::zero();
    }
    let distinct = (0..n).all(|i| (0..i).all(|j| xs[i] != xs[j]));
    if distinct && n > 0 {
        let m: Vec<Vec<Rational>> = xs
            .iter()
            .map(|x| (1..=n).map(|j| num_traits::pow(x.clone(), lambda.part(j) + n - j)).collect())
            .collect();
        let mut v = Rational::one();
        for i in 0..n {
            for j in i + 1..n {
                v *= &xs[i] - &xs[j];
            }
        }
        det(m) / v
    } else {
        let par = GrothendieckParams::new(Rational::zero(), Rational::zero());
        G_skew_eval(lambda, &Partition::empty(), xs, &par).expect("no poles at a = 0")
    }
}

/// Schur expansion of a symmetric polynomial. Needs nvars ≥ max_degree so
/// that the monomial coefficients determine the element.
pub fn to_schur(p: &SymPoly) -> Result<SchurExpansion> {
    if p.nvars < p.max_degree {
        return Err(Error::InvalidParameter(format!("need at least {} variables, got {}", p.max_degree, p.nvars)));
    }
    Ok(monomial_to_schur(|nu| p.coeff(nu), p.max_degree))
}

fn monomial_to_schur<F: Fn(&Partition) -> Rational>(coeff: F, degree: usize) -> SchurExpansion {
    let mut out = BTreeMap::new();
    for n in 0..=degree {
        let k = kostka_table(n);
        let order = lex_desc(n);
        let mut found: Vec<(Partition, Rational)> = Vec::new();
        for mu in &order {
            // c_μ = Σ_{λ ⊵ μ} d_λ K_{λμ}, and K_{μμ} = 1
            let mut d = coeff(mu);
            for (lam, dl) in &found {
                if let Some(kv) = k.get(&(lam.clone(), mu.clone())) {
                    d -= dl * kv;
                }
            }
            if !d.is_zero() {
                found.push((mu.clone(), d));
            }
        }
        out.extend(found);
    }
    SchurExpansion { coefficients: out, degree_bound: degree }
}

/// [x^e] of G_{κ/ν}(x) = (x/(1−ax))^d ((1+bx)/(1−ax))^r.
fn one_var_coeff(e: usize, d: usize, r: usize, a: &Rational, b: &Rational) -> Rational {
    if e < d {
        return Rational::zero();
    }
    let mut acc = Rational::zero();
    for j in 0..=r.min(e - d) {
        let m = e - d - j;
        let c = binom(r as i64, j as i64) * binom((d + r + m) as i64 - 1, m as i64);
        if d + r == 0 && m > 0 {
            continue;
        }
        acc += Rational::from_integer(c) * num_traits::pow(b.clone(), j) * num_traits::pow(a.clone(), m);
    }
    acc
}

/// Coefficient of x^ν (as an exponent vector) in G_λ^{(a,b)}.
fn grothendieck_monomial(lambda: &Partition, nu: &Partition, a: &Rational, b: &Rational) -> Rational {
    if nu.len() < lambda.len() {
        return Rational::zero();
    }
    let shapes = crate::partitions::down_set(lambda);
    let mut cur: HashMap<Partition, Rational> = HashMap::new();
    cur.insert(Partition::empty(), Rational::one());
    for &e in nu.parts() {
        let mut next = HashMap::new();
        for kappa in &shapes {
            let mut acc = Rational::zero();
            for prev in interlacing_below(kappa) {
                if let Some(v) = cur.get(&prev) {
                    let d = kappa.size() - prev.size();
                    let r = (1..=prev.len()).filter(|&i| prev.part(i) > kappa.part(i + 1)).count();
                    let w = one_var_coeff(e, d, r, a, b);
                    if !w.is_zero() {
                        acc += w * v;
                    }
                }
            }
            if !acc.is_zero() {
                next.insert(kappa.clone(), acc);
            }
        }
        cur = next;
    }
    cur.remove(lambda).unwrap_or_else(Rational::zero)
}

/// G_λ^{(a,b)}(x_1..x_nvars) truncated above total degree `degree`.
pub fn grothendieck_poly(lambda: &Partition, a: &Rational, b: &Rational, nvars: usize, degree: usize) -> SymPoly {
    let mut p = SymPoly::zero(nvars, degree);
    for nu in partitions_up_to(degree, nvars) {
        let c = grothendieck_monomial(lambda, &nu, a, b);
        if !c.is_zero() {
            p.coeffs.insert(nu, c);
        }
    }
    p
}

/// Schur expansion of G_λ^{(a,b)} through total degree D.
pub fn grothendieck_schur(lambda: &Partition, a: &Rational, b: &Rational, degree: usize) -> Result<SchurExpansion> {
    if degree < lambda.size() {
        return Err(Error::InvalidParameter(format!("degree bound {degree} below |λ| = {}", lambda.size())));
    }
    Ok(monomial_to_schur(|nu| grothendieck_monomial(lambda, nu, a, b), degree))
}

/// Schur expansion of g_λ^{(a,b)} by inverting ⟨G_μ^{(−a,−b)}, s_ν⟩.
pub fn dual_g_by_inversion(lambda: &Partition, a: &Rational, b: &Rational, degree: usize) -> Result<SchurExpansion> {
    if degree < lambda.size() {
        return Err(Error::InvalidParameter(format!("degree bound {degree} below |λ| = {}", lambda.size())));
    }
    let top = lambda.size();
    let (na, nb) = (-a.clone(), -b.clone());
    let mut coeffs: BTreeMap<Partition, Rational> = BTreeMap::new();
    coeffs.insert(lambda.clone(), Rational::one());
    // Σ_ν A_{μν} B_ν = δ_{μλ}: solve degree by degree, top first
    for n in (0..top).rev() {
        for mu in partitions_of(n) {
            let row = grothendieck_schur(&mu, &na, &nb, top)?;
            let mut acc = Rational::zero();
            for (nu, bv) in &coeffs {
                if nu.size() > n {
                    acc += row.coeff(nu) * bv;
                }
            }
            if !acc.is_zero() {
                coeffs.insert(mu, -acc);
            }
        }
    }
    Ok(SchurExpansion { coefficients: coeffs, degree_bound: degree })
}

/// Checks ω(G_λ^{(a,b)}) = G_{λ'}^{(b,a)} coefficient by coefficient through degree D.
pub fn involution_check(lambda: &Partition, a: &Rational, b: &Rational, degree: usize) -> Result<bool> {
    let lhs = grothendieck_schur(lambda, a, b, degree)?.transpose().truncate(degree);
    let rhs = grothendieck_schur(&lambda.conjugate(), b, a, degree)?;
    Ok(lhs == rhs)
}

/// The same check for the dual family: ω(g_λ^{(a,b)}) = g_{λ'}^{(b,a)}.
pub fn involution_check_dual(lambda: &Partition, a: &Rational, b: &Rational, degree: usize) -> Result<bool> {
    let lhs = dual_g_by_inversion(lambda, a, b, degree)?.transpose();
    let rhs = dual_g_by_inversion(&lambda.conjugate(), b, a, degree)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grothendieck::{g_eval_det, G_eval};
    use crate::scalar::{q, qi};

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    #[test]
    fn schur_values() {
        let (a, b) = (q(2, 3), q(-1, 5));
        assert_eq!(schur_eval(&p(&[1]), &[a.clone(), b.clone()]), &a + &b);
        assert_eq!(schur_eval(&Partition::empty(), &[a.clone()]), qi(1));
        assert_eq!(schur_eval(&p(&[2, 1]), &[qi(1), qi(1), qi(1)]), qi(8));
        assert_eq!(schur_eval(&p(&[2, 1]), &[qi(1), qi(2), qi(3)]), schur_eval(&p(&[2, 1]), &[qi(1), qi(2), qi(3), qi(0)]));
        assert_eq!(schur_eval(&p(&[2, 2]), &[qi(1), qi(1), qi(2)]), qi(17));
    }

    #[test]
    fn kostka_small() {
        let k = kostka_table(3);
        assert_eq!(k[&(p(&[2, 1]), p(&[1, 1, 1]))], qi(2));
        assert_eq!(k[&(p(&[3]), p(&[1, 1, 1]))], qi(1));
        assert!(k.get(&(p(&[1, 1, 1]), p(&[3]))).is_none());
    }

    #[test]
    fn to_schur_basic() {
        let h2 = to_schur(&SymPoly::h(3, 3, 2)).unwrap();
        assert_eq!(h2.coefficients, BTreeMap::from([(p(&[2]), qi(1))]));
        let e2 = to_schur(&SymPoly::e(3, 3, 2)).unwrap();
        assert_eq!(e2.coefficients, BTreeMap::from([(p(&[1, 1]), qi(1))]));
        let pp = q(1, 3);
        let g1 = SymPoly::from_monomials(2, 2, &[(vec![1, 0], qi(1)), (vec![0, 1], qi(1)), (vec![1, 1], -pp.clone())]).unwrap();
        let s = to_schur(&g1).unwrap();
        assert_eq!(s.coefficients, BTreeMap::from([(p(&[1]), qi(1)), (p(&[1, 1]), -pp)]));
    }

    #[test]
    fn rejects_asymmetric() {
        let r = SymPoly::from_monomials(2, 2, &[(vec![1, 0], qi(1))]);
        assert_eq!(r, Err(Error::NotSymmetric));
        let r = SymPoly::from_monomials(2, 2, &[(vec![1, 0], qi(1)), (vec![0, 1], qi(2))]);
        assert_eq!(r, Err(Error::NotSymmetric));
    }

    #[test]
    fn g_one_box_expansion() {
        let pp = q(1, 2);
        let s = grothendieck_schur(&p(&[1]), &qi(0), &-pp.clone(), 2).unwrap();
        assert_eq!(s.coefficients, BTreeMap::from([(p(&[1]), qi(1)), (p(&[1, 1]), -pp)]));
        let e = grothendieck_schur(&Partition::empty(), &q(1, 3), &q(1, 5), 4).unwrap();
        assert_eq!(e.coefficients, BTreeMap::from([(Partition::empty(), qi(1))]));
    }

    #[test]
    fn expansion_matches_evaluation() {
        let (a, b) = (q(1, 3), q(-2, 5));
        let lam = p(&[2, 1]);
        let xs = [q(1, 7), q(-1, 9)];
        let poly = grothendieck_poly(&lam, &a, &b, 2, 16);
        let direct = G_eval(&lam, &xs, &GrothendieckParams::new(a.clone(), b.clone())).unwrap();
        // the omitted terms have degree > 16 in points of size ≤ 1/7
        let diff = crate::scalar::rational_to_f64(&(direct - poly.eval(&xs).unwrap())).abs();
        assert!(diff < 1e-10, "{diff}");
        let a0 = grothendieck_poly(&lam, &qi(0), &qi(0), 3, 3);
        assert_eq!(to_schur(&a0).unwrap().coefficients, BTreeMap::from([(lam.clone(), qi(1))]));
    }

    #[test]
    fn leading_terms() {
        let (a, b) = (q(2, 5), q(-1, 3));
        for n in 0..=5 {
            for lam in partitions_of(n) {
                let s = grothendieck_schur(&lam, &a, &b, n + 1).unwrap();
                assert_eq!(s.coeff(&lam), qi(1));
                assert!(s.coefficients.keys().all(|k| k.size() >= n));
            }
        }
        for n in 0..=4 {
            for lam in partitions_of(n) {
                let g = dual_g_by_inversion(&lam, &a, &b, n).unwrap();
                assert_eq!(g.coeff(&lam), qi(1));
                assert!(g.coefficients.keys().all(|k| k.size() <= n));
            }
        }
        let g = dual_g_by_inversion(&p(&[1]), &a, &b, 3).unwrap();
        assert_eq!(g.coefficients, BTreeMap::from([(p(&[1]), qi(1))]));
    }

    #[test]
    fn involution_examples() {
        let pp = q(1, 2);
        assert!(involution_check(&p(&[1]), &qi(0), &-pp.clone(), 3).unwrap());
        assert!(involution_check(&Partition::empty(), &qi(0), &-pp, 3).unwrap());
        assert!(involution_check(&p(&[2, 1]), &q(1, 3), &q(1, 5), 5).unwrap());
        assert!(involution_check_dual(&p(&[2, 1]), &q(1, 3), &q(1, 5), 3).unwrap());
        assert!(involution_check(&p(&[2]), &q(1, 3), &q(1, 5), 4).unwrap());
        // without swapping the parameters the identity fails
        let lhs = grothendieck_schur(&p(&[2]), &q(1, 3), &q(1, 5), 4).unwrap().transpose();
        assert_ne!(lhs, grothendieck_schur(&p(&[1, 1]), &q(1, 3), &q(1, 5), 4).unwrap());
    }

    #[test]
    fn dual_matches_determinant() {
        let a = q(1, 2);
        let xs = [q(1, 3), q(-2, 7), q(3, 5)];
        for n in 0..=4 {
            for lam in partitions_of(n).into_iter().filter(|l| l.len() <= 3) {
                let g = dual_g_by_inversion(&lam, &a, &qi(0), n).unwrap();
                assert_eq!(g.eval(&xs), g_eval_det(&lam, &a, &xs).unwrap(), "{lam}");
            }
        }
    }
}
