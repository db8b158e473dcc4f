//! The weighted graded graph of partitions, its coherent systems and samplers.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::branching::Bound;
use crate::error::{Error, Result};
use crate::grothendieck::{g_eval_jt, g_skew_eval, g_skew_one, phi_h_coeffs, principal_last, principal_levels, GrothendieckParams};
use crate::partitions::{down_set, interlaces, interlacing_below, Partition};
use crate::scalar::{rational_to_f64, LogPos, Rational};

/// The parameter p of the graph.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub p: Rational,
}

impl ModelParams {
    pub fn new(p: Rational) -> Result<Self> {
        if p.is_negative() || p >= Rational::one() {
            return Err(Error::InvalidParameter(format!("p = {p} must lie in [0,1)")));
        }
        Ok(ModelParams { p })
    }
}

fn check_p(p: &Rational) -> Result<()> {
    ModelParams::new(p.clone()).map(|_| ())
}

/// Φ(z) = z^s Π (1 − x_i(z−1))/(1 − y_i(z−1)).
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSpec {
    pub s: usize,
    pub factors: Vec<(Rational, Rational)>,
}

impl PhiSpec {
    pub fn one() -> Self {
        PhiSpec { s: 0, factors: Vec::new() }
    }

    /// (1 − p̃)/(1 − p̃ z).
    pub fn geometric(pt: &Rational) -> Self {
        PhiSpec { s: 0, factors: vec![(Rational::zero(), pt / (Rational::one() - pt))] }
    }

    /// Φ^{A,B} of a system of GT type.
    pub fn from_gt(spec: &GtSpec, p: &Rational) -> Self {
        let one = Rational::one();
        let mut phi = PhiSpec::one();
        for a in &spec.alphas {
            phi.factors.push((p / (&one - p), a.clone()));
        }
        for b in &spec.betas {
            if *b == one {
                phi.s += 1;
            } else if b != p {
                phi.factors.push((-(b - p) / (&one - p), Rational::zero()));
            }
        }
        phi
    }

    pub fn validate(&self, p: &Rational) -> Result<()> {
        check_p(p)?;
        let cap = p / (Rational::one() - p);
        for (x, y) in &self.factors {
            if *x < -Rational::one() || *x > cap || y.is_negative() || y < x {
                return Err(Error::InvalidParameter(format!("factor (x={x}, y={y}) outside the admissible family for p={p}")));
            }
        }
        Ok(())
    }

    /// Moves factors with x = −1 (which contribute a zero at z = 0) into `s`.
    pub fn normalized(&self) -> PhiSpec {
        let mut out = PhiSpec { s: self.s, factors: Vec::new() };
        for (x, y) in &self.factors {
            if *x == -Rational::one() {
                out.s += 1;
                if !y.is_zero() {
                    out.factors.push((Rational::zero(), y.clone()));
                }
            } else if x != y {
                out.factors.push((x.clone(), y.clone()));
            }
        }
        out
    }

    /// Φ with the z^s factor removed; requires a normalized spec.
    pub fn stripped(&self) -> PhiSpec {
        PhiSpec { s: 0, factors: self.factors.clone() }
    }

    /// Φ̃(0) for the stripped function.
    pub fn phi0(&self) -> Rational {
        let one = Rational::one();
        self.factors.iter().map(|(x, y)| (&one + x) / (&one + y)).fold(one.clone(), |a, b| a * b)
    }

    pub fn is_one(&self) -> bool {
        let n = self.normalized();
        n.s == 0 && n.factors.is_empty()
    }

    /// First K+1 Taylor coefficients of Φ itself (including the z^s factor).
    pub fn taylor(&self, k: usize) -> Vec<Rational> {
        let n = self.normalized();
        let h: Vec<Rational> = phi_h_coeffs(&n.stripped(), k).expect("stripped spec");
        let c = n.phi0();
        let mut out = vec![Rational::zero(); k + 1];
        for i in 0..=k {
            if i + n.s <= k {
                out[i + n.s] = &h[i] * &c;
            }
        }
        out
    }

    /// Per-factor data (γ, u) with Φ_f/Φ_f(0) = (1 − γz)/(1 − (γ+u)z).
    fn gamma_u(&self) -> Vec<(Rational, Rational)> {
        let one = Rational::one();
        self.factors
            .iter()
            .map(|(x, y)| {
                let g = x / (&one + x);
                let e = y / (&one + y);
                let u = &e - &g;
                (g, u)
            })
            .collect()
    }
}

/// A finite system of GT type.
#[derive(Clone, Debug, PartialEq)]
pub struct GtSpec {
    pub alphas: Vec<Rational>,
    pub betas: Vec<Rational>,
}

impl GtSpec {
    pub fn new(mut alphas: Vec<Rational>, mut betas: Vec<Rational>) -> Self {
        alphas.sort_by(|a, b| b.cmp(a));
        betas.sort_by(|a, b| b.cmp(a));
        GtSpec { alphas, betas }
    }

    pub fn validate(&self, p: &Rational) -> Result<()> {
        check_p(p)?;
        let cap = p / (Rational::one() - p);
        for a in &self.alphas {
            if *a <= cap {
                return Err(Error::InvalidParameter(format!("alpha = {a} must exceed p/(1-p) = {cap}")));
            }
        }
        for b in &self.betas {
            if b < p || *b > Rational::one() {
                return Err(Error::InvalidParameter(format!("beta = {b} must lie in [p, 1]")));
            }
        }
        Ok(())
    }

    /// Number of β equal to 1 (frozen columns).
    pub fn frozen(&self) -> usize {
        self.betas.iter().filter(|b| b.is_one()).count()
    }

    /// χ-parameters (x_i for rows, y_i for non-frozen columns).
    pub fn chis(&self, p: &Rational) -> (Vec<Rational>, Vec<Rational>) {
        let one = Rational::one();
        let xs = self.alphas.iter().map(|a| (a - p * (&one + a)) / (&one + a)).collect();
        let ys = self.betas.iter().filter(|b| !b.is_one()).map(|b| (b - p) / (&one - b)).collect();
        (xs, ys)
    }
}

/// Which coherent system to build.
#[derive(Clone, Debug, PartialEq)]
pub enum CoherentSpec {
    Phi(PhiSpec),
    Gt(GtSpec),
}

impl CoherentSpec {
    pub fn phi(&self, p: &Rational) -> PhiSpec {
        match self {
            CoherentSpec::Phi(phi) => phi.clone(),
            CoherentSpec::Gt(gt) => PhiSpec::from_gt(gt, p),
        }
    }

    pub fn measure(&self, n: usize, p: &Rational, tol: f64) -> Result<CoherentLevelMeasure> {
        match self {
            CoherentSpec::Phi(phi) => measure_phi(phi, n, p, tol, GBackend::Jt),
            CoherentSpec::Gt(gt) => measure_gt(gt, n, p, tol),
        }
    }
}

/// How g^{(0,p)}_λ(Φ) is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GBackend {
    /// Jacobi–Trudi determinant over the Taylor coefficients of Φ.
    Jt,
    /// Iterated one-variable branching over the factors of Φ.
    Factored,
}

/// A probability measure on partitions of length ≤ n, known up to an omitted tail.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentLevelMeasure {
    pub level: usize,
    pub p: Rational,
    /// atoms in graded order
    pub atoms: Vec<(Partition, Rational)>,
    /// exact mass not covered by `atoms` (total mass is one)
    pub tail_mass: Rational,
}

#[derive(Serialize)]
struct AtomJson {
    partition: Partition,
    prob: String,
    prob_f64: f64,
}

#[derive(Serialize)]
struct MeasureJson {
    level: usize,
    p: String,
    atoms: Vec<AtomJson>,
    tail_mass: f64,
}

impl CoherentLevelMeasure {
    pub fn delta(level: usize, p: &Rational, at: Partition) -> Self {
        CoherentLevelMeasure { level, p: p.clone(), atoms: vec![(at, Rational::one())], tail_mass: Rational::zero() }
    }

    pub fn prob(&self, lambda: &Partition) -> Rational {
        self.atoms.iter().find(|(l, _)| l == lambda).map(|(_, v)| v.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn as_map(&self) -> HashMap<Partition, Rational> {
        self.atoms.iter().cloned().collect()
    }

    pub fn tail_f64(&self) -> f64 {
        rational_to_f64(&self.tail_mass)
    }

    pub fn max_size(&self) -> usize {
        self.atoms.iter().map(|(l, _)| l.size()).max().unwrap_or(0)
    }

    /// JSON document `{level, p, atoms:[{partition, prob}], tail_mass}`.
    pub fn to_json_value(&self) -> impl Serialize {
        MeasureJson {
            level: self.level,
            p: self.p.to_string(),
            atoms: self
                .atoms
                .iter()
                .map(|(l, v)| AtomJson { partition: l.clone(), prob: v.to_string(), prob_f64: rational_to_f64(v) })
                .collect(),
            tail_mass: self.tail_f64(),
        }
    }
}

/// A path ∅ = t_0 ⪯ t_1 ⪯ … ⪯ t_N.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphPath {
    pub steps: Vec<Partition>,
}

impl GraphPath {
    pub fn new(steps: Vec<Partition>) -> Result<Self> {
        if steps.first().map(|t| !t.is_empty()).unwrap_or(true) {
            return Err(Error::InvalidParameter("a path starts at the empty partition".into()));
        }
        for (n, w) in steps.windows(2).enumerate() {
            if !interlaces(&w[0], &w[1]) {
                return Err(Error::InvalidParameter(format!("{} does not interlace {}", w[0], w[1])));
            }
            if w[1].len() > n + 1 {
                return Err(Error::InvalidParameter(format!("{} too long for level {}", w[1], n + 1)));
            }
        }
        Ok(GraphPath { steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.steps.len() <= 1
    }

    pub fn last(&self) -> &Partition {
        self.steps.last().unwrap()
    }

    /// The path with every level shifted: t_n + s^n.
    pub fn shifted(&self, s: usize) -> GraphPath {
        GraphPath { steps: self.steps.iter().enumerate().map(|(n, t)| t.shift(n, s)).collect() }
    }

    /// w^p(τ) = Π w(t_{n−1}, t_n).
    pub fn weight(&self, p: &Rational) -> Rational {
        self.steps.windows(2).map(|w| edge_weight(&w[0], &w[1], p)).fold(Rational::one(), |a, b| a * b)
    }
}

/// w^p(μ, λ) = (1−p)^{r(μ/λ̄)} when μ ⪯ λ.
pub fn edge_weight(mu: &Partition, lambda: &Partition, p: &Rational) -> Rational {
    if !interlaces(mu, lambda) {
        return Rational::zero();
    }
    let r = (1..=mu.len()).filter(|&i| mu.part(i) > lambda.part(i + 1)).count();
    num_traits::pow(Rational::one() - p, r)
}

fn edge_rows(mu: &Partition, lambda: &Partition) -> usize {
    (1..=mu.len()).filter(|&i| mu.part(i) > lambda.part(i + 1)).count()
}

/// dim_{n,n+k}(μ, λ) = G_{λ/μ}(1^k).
pub fn dim_between(mu: &Partition, lambda: &Partition, k: usize, p: &Rational) -> Rational {
    if !lambda.contains(mu) {
        return Rational::zero();
    }
    principal_last(mu, k, Rational::one() - p, &Bound::Sub(lambda.clone())).remove(lambda).unwrap_or_else(Rational::zero)
}

/// dim_n(λ) = G_λ(1^n).
pub fn dim(lambda: &Partition, n: usize, p: &Rational) -> Rational {
    dim_between(&Partition::empty(), lambda, n, p)
}

/// p↓_{n+k,n}(λ, μ).
pub fn cotransition(lambda: &Partition, n_plus_k: usize, mu: &Partition, n: usize, p: &Rational) -> Result<Rational> {
    if n > n_plus_k {
        return Err(Error::InvalidParameter("levels must satisfy n ≤ n+k".into()));
    }
    if lambda.len() > n_plus_k || mu.len() > n {
        return Ok(Rational::zero());
    }
    let num = dim_between(mu, lambda, n_plus_k - n, p) * dim(mu, n, p);
    Ok(num / dim(lambda, n_plus_k, p))
}

/// Table of g^{(0,p)}_λ(Φ) for all λ in `shapes` by the factored route
/// g_{λ/μ}^{(0,p)}(Φ_f) = g^{(γ,p−γ)}_{λ/μ}(u).
fn g_phi_factored(phi: &PhiSpec, p: &Rational, start: &Partition, shapes: &[Partition]) -> HashMap<Partition, Rational> {
    let mut cur: HashMap<Partition, Rational> = HashMap::new();
    cur.insert(start.clone(), Rational::one());
    for (gamma, u) in phi.gamma_u() {
        let params = GrothendieckParams::new(gamma.clone(), p - &gamma);
        let mut next = HashMap::new();
        for lam in shapes {
            let mut acc = Rational::zero();
            for (mu, v) in &cur {
                if lam.contains(mu) {
                    let w = g_skew_one(lam, mu, &u, &params);
                    if !w.is_zero() {
                        acc += w * v;
                    }
                }
            }
            if !acc.is_zero() {
                next.insert(lam.clone(), acc);
            }
        }
        cur = next;
    }
    cur
}

/// g^{(0,p)}_λ(Φ) for one λ, by either backend.
pub fn g_of_phi(lambda: &Partition, phi: &PhiSpec, p: &Rational, backend: GBackend) -> Result<Rational> {
    let phi = phi.normalized();
    if phi.s > 0 {
        return Err(Error::InvalidParameter("Φ(0) = 0; strip the z^s factor first".into()));
    }
    match backend {
        GBackend::Jt => {
            let h: Vec<Rational> = phi_h_coeffs(&phi, lambda.first() + lambda.len())?;
            g_eval_jt(lambda, p, &h)
        }
        GBackend::Factored => {
            let shapes = down_set(lambda);
            Ok(g_phi_factored(&phi, p, &Partition::empty(), &shapes).remove(lambda).unwrap_or_else(Rational::zero))
        }
    }
}

const MAX_RADIUS: usize = 400;

fn partitions_in(bound_size: usize, max_len: usize) -> Vec<Partition> {
    crate::partitions::partitions_up_to(bound_size, max_len)
}

/// Atoms of M_n^Φ(λ/μ) for |λ| ≤ radius (before the z^s shift).
fn atoms_phi(phi: &PhiSpec, n: usize, mu: &Partition, p: &Rational, radius: usize, backend: GBackend) -> Result<Vec<(Partition, Rational)>> {
    let shapes = partitions_in(radius, n);
    let dims = principal_last(&Partition::empty(), n, Rational::one() - p, &Bound::Size { max_size: radius, max_len: n });
    let c = num_traits::pow(phi.phi0(), n);
    let dmu = dims.get(mu).cloned().ok_or_else(|| Error::InvalidParameter(format!("{mu} is not a vertex of level {n}")))?;
    let mut out = Vec::new();
    let gvals: HashMap<Partition, Rational> = if backend == GBackend::Factored || !mu.is_empty() {
        let sub: Vec<Partition> = shapes.iter().filter(|l| l.contains(mu)).cloned().collect();
        g_phi_factored(phi, p, mu, &sub)
    } else {
        let h: Vec<Rational> = phi_h_coeffs(phi, radius + n)?;
        let mut m = HashMap::new();
        for lam in &shapes {
            let v = g_eval_jt(lam, p, &h)?;
            if !v.is_zero() {
                m.insert(lam.clone(), v);
            }
        }
        m
    };
    for lam in shapes {
        if let Some(g) = gvals.get(&lam) {
            let d = &dims[&lam];
            out.push((lam, g * &c * d / &dmu));
        }
    }
    Ok(out)
}

fn finish(level: usize, p: &Rational, mut atoms: Vec<(Partition, Rational)>, shift: usize) -> CoherentLevelMeasure {
    atoms.retain(|(_, v)| !v.is_zero());
    let total: Rational = atoms.iter().map(|(_, v)| v.clone()).sum();
    let atoms = atoms.into_iter().map(|(l, v)| (l.shift(level, shift), v)).collect::<Vec<_>>();
    let mut atoms = atoms;
    atoms.sort_by(|a, b| a.0.cmp(&b.0));
    CoherentLevelMeasure { level, p: p.clone(), atoms, tail_mass: Rational::one() - total }
}

fn grow_until<F>(tol: f64, mut build: F) -> Result<Vec<(Partition, Rational)>>
where
    F: FnMut(usize) -> Result<Vec<(Partition, Rational)>>,
{
    let mut radius = 8;
    loop {
        let atoms = build(radius)?;
        let total: Rational = atoms.iter().map(|(_, v)| v.clone()).sum();
        let tail = rational_to_f64(&(Rational::one() - total));
        if tail <= tol {
            return Ok(atoms);
        }
        if radius >= MAX_RADIUS {
            return Err(Error::TruncationFailed { tail, tol });
        }
        // mass beyond the radius decays geometrically; aim directly at tol
        radius = (radius * 3 / 2 + 4).min(MAX_RADIUS);
    }
}

/// M_n^Φ(λ) on the enumerated support, tail ≤ tol.
pub fn measure_phi(phi: &PhiSpec, n: usize, p: &Rational, tol: f64, backend: GBackend) -> Result<CoherentLevelMeasure> {
    skew_measure_phi(phi, n, &Partition::empty(), p, tol, backend)
}

/// M_n^Φ(λ/μ) on the enumerated support, tail ≤ tol.
pub fn skew_measure_phi(phi: &PhiSpec, n: usize, mu: &Partition, p: &Rational, tol: f64, backend: GBackend) -> Result<CoherentLevelMeasure> {
    phi.validate(p)?;
    if mu.len() > n {
        return Err(Error::InvalidParameter(format!("{mu} is not a vertex of level {n}")));
    }
    let phi = phi.normalized();
    if n == 0 {
        return Ok(CoherentLevelMeasure::delta(0, p, Partition::empty()));
    }
    if phi.factors.is_empty() {
        return Ok(CoherentLevelMeasure::delta(n, p, mu.shift(n, phi.s)));
    }
    let stripped = phi.stripped();
    let atoms = grow_until(tol, |r| atoms_phi(&stripped, n, mu, p, r + mu.size(), backend))?;
    Ok(finish(n, p, atoms, phi.s))
}

/// g^{(p,0)}_ν(x_1..x_k) for every ν in `shapes` (which must be down-closed).
fn g_p0_table(xs: &[Rational], p: &Rational, shapes: &[Partition]) -> HashMap<Partition, Rational> {
    let params = GrothendieckParams::new(p.clone(), Rational::zero());
    let mut cur: HashMap<Partition, Rational> = HashMap::new();
    cur.insert(Partition::empty(), Rational::one());
    for x in xs {
        let mut next = HashMap::new();
        for nu in shapes {
            let mut acc = Rational::zero();
            // with b = 0 only interlacing predecessors contribute
            for kappa in interlacing_below(nu) {
                if let Some(v) = cur.get(&kappa) {
                    acc += g_skew_one(nu, &kappa, x, &params) * v;
                }
            }
            if !acc.is_zero() {
                next.insert(nu.clone(), acc);
            }
        }
        cur = next;
    }
    cur
}

fn in_hook(lam: &Partition, k: usize, l: usize) -> bool {
    lam.part(k + 1) <= l
}

fn atoms_gt(spec: &GtSpec, n: usize, p: &Rational, radius: usize) -> Vec<(Partition, Rational)> {
    let (xs, ys) = spec.chis(p);
    let (k, l) = (xs.len(), ys.len());
    let shapes: Vec<Partition> = partitions_in(radius, n).into_iter().filter(|lam| in_hook(lam, k, l)).collect();
    let gx_shapes: Vec<Partition> = shapes.iter().filter(|m| m.len() <= k).cloned().collect();
    let gx = g_p0_table(&xs, p, &gx_shapes);
    let dims = principal_last(&Partition::empty(), n, Rational::one() - p, &Bound::Size { max_size: radius, max_len: n });
    let phi = PhiSpec::from_gt(spec, p).normalized();
    let c = num_traits::pow(phi.phi0(), n);
    let params = GrothendieckParams::new(p.clone(), Rational::zero());
    let mut out = Vec::new();
    for lam in shapes {
        let lc = lam.conjugate();
        let mut acc = Rational::zero();
        for (mu, gmu) in &gx {
            if !lam.contains(mu) {
                continue;
            }
            let w = if l == 0 {
                if *mu == lam { Rational::one() } else { Rational::zero() }
            } else {
                g_skew_eval(&lc, &mu.conjugate(), &ys, &params)
            };
            if !w.is_zero() {
                acc += w * gmu;
            }
        }
        if !acc.is_zero() {
            let v = acc * &c * &dims[&lam];
            out.push((lam, v));
        }
    }
    out
}

/// M_n^{A,B} through the hook formula.
pub fn measure_gt(spec: &GtSpec, n: usize, p: &Rational, tol: f64) -> Result<CoherentLevelMeasure> {
    spec.validate(p)?;
    let s = spec.frozen();
    if n == 0 {
        return Ok(CoherentLevelMeasure::delta(0, p, Partition::empty()));
    }
    let atoms = grow_until(tol, |r| Ok(atoms_gt(spec, n, p, r)))?;
    Ok(finish(n, p, atoms, s))
}

/// Coherency check between consecutive levels.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherencyReport {
    pub level: usize,
    /// max_μ |M_n(μ) − Σ_λ p↓(λ,μ) M_{n+1}(λ)|
    pub residual: f64,
    /// combined omitted tail mass of both levels
    pub slack: f64,
    /// max(0, residual − slack)
    pub excess: f64,
}

pub fn coherency_residual(lower: &CoherentLevelMeasure, upper: &CoherentLevelMeasure, p: &Rational) -> Result<CoherencyReport> {
    let n = lower.level;
    if upper.level != n + 1 {
        return Err(Error::InvalidParameter("measures must sit on consecutive levels".into()));
    }
    let radius = lower.max_size().max(upper.max_size());
    let tables = principal_levels(&Partition::empty(), n + 1, Rational::one() - p, &Bound::Size { max_size: radius, max_len: n + 1 });
    let (dn, dn1) = (&tables[n], &tables[n + 1]);
    let mut pushed: HashMap<Partition, Rational> = HashMap::new();
    for (lam, m) in &upper.atoms {
        let base = m / &dn1[lam];
        for mu in interlacing_below(lam) {
            if mu.len() > n {
                continue;
            }
            let w = num_traits::pow(Rational::one() - p, edge_rows(&mu, lam));
            *pushed.entry(mu.clone()).or_insert_with(Rational::zero) += &base * w * &dn[&mu];
        }
    }
    let lower_map = lower.as_map();
    let mut residual = Rational::zero();
    let keys: Vec<&Partition> = lower_map.keys().chain(pushed.keys()).collect();
    for mu in keys {
        let a = lower_map.get(mu).cloned().unwrap_or_else(Rational::zero);
        let b = pushed.get(mu).cloned().unwrap_or_else(Rational::zero);
        let d = (a - b).abs();
        if d > residual {
            residual = d;
        }
    }
    let residual = rational_to_f64(&residual);
    let slack = lower.tail_f64() + upper.tail_f64();
    Ok(CoherencyReport { level: n, residual, slack, excess: (residual - slack).max(0.0) })
}

/// Inverse-CDF draw from the enumerated atoms; `None` when the draw lands in the tail.
pub fn sample_atoms<R: Rng>(m: &CoherentLevelMeasure, cdf: &[f64], rng: &mut R) -> Option<Partition> {
    let u: f64 = rng.gen();
    let idx = cdf.partition_point(|&c| c <= u);
    m.atoms.get(idx).map(|(l, _)| l.clone())
}

pub fn cumulative(m: &CoherentLevelMeasure) -> Vec<f64> {
    let mut acc = 0.0;
    m.atoms
        .iter()
        .map(|(_, v)| {
            acc += rational_to_f64(v);
            acc
        })
        .collect()
}

/// Draws from a level measure, extending the support when a draw falls in the tail.
pub struct LevelSampler {
    spec: CoherentSpec,
    p: Rational,
    pub measure: CoherentLevelMeasure,
    cdf: Vec<f64>,
    tol: f64,
    retries: usize,
}

impl LevelSampler {
    pub fn new(spec: CoherentSpec, n: usize, p: &Rational, tol: f64) -> Result<Self> {
        if tol >= 1e-6 {
            return Err(Error::InvalidParameter("sampling needs tail mass below 1e-6".into()));
        }
        let measure = spec.measure(n, p, tol)?;
        let cdf = cumulative(&measure);
        Ok(LevelSampler { spec, p: p.clone(), measure, cdf, tol, retries: 4 })
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> Result<Partition> {
        for _ in 0..=self.retries {
            if let Some(l) = sample_atoms(&self.measure, &self.cdf, rng) {
                return Ok(l);
            }
            self.tol /= 1e3;
            self.measure = self.spec.measure(self.measure.level, &self.p, self.tol)?;
            self.cdf = cumulative(&self.measure);
        }
        Err(Error::SupportExhausted(self.retries))
    }
}

/// One draw from a fixed measure; fails if the tail is hit `retries + 1` times.
pub fn sample_level<R: Rng>(m: &CoherentLevelMeasure, rng: &mut R, retries: usize) -> Result<Partition> {
    if m.tail_f64() >= 1e-6 {
        return Err(Error::InvalidParameter("sampling needs tail mass below 1e-6".into()));
    }
    let cdf = cumulative(m);
    for _ in 0..=retries {
        if let Some(l) = sample_atoms(m, &cdf, rng) {
            return Ok(l);
        }
    }
    Err(Error::SupportExhausted(retries))
}

fn pick<R: Rng>(weights: &[(Partition, f64)], rng: &mut R) -> Partition {
    let total: f64 = weights.iter().map(|w| w.1).sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (l, w) in weights {
        acc += w;
        if u < acc {
            return l.clone();
        }
    }
    weights.last().unwrap().0.clone()
}

/// Samples a path ending at λ at level N with law w^p(τ)/dim_N(λ), backwards
/// through the cotransition kernels.
pub fn sample_conditioned_path<R: Rng>(lambda: &Partition, n: usize, p: &Rational, rng: &mut R) -> Result<GraphPath> {
    check_p(p)?;
    if lambda.len() > n {
        return Err(Error::InvalidParameter(format!("l({lambda}) exceeds N = {n}")));
    }
    let omp = LogPos::from_rational(&(Rational::one() - p));
    let tables = principal_levels(&Partition::empty(), n, omp, &Bound::Sub(lambda.clone()));
    let mut steps = vec![lambda.clone()];
    let mut cur = lambda.clone();
    for level in (1..=n).rev() {
        let below = &tables[level - 1];
        let weights: Vec<(Partition, f64)> = interlacing_below(&cur)
            .into_iter()
            .filter_map(|mu| below.get(&mu).map(|d| (mu.clone(), (*d * pow_log(omp, edge_rows(&mu, &cur))).ln())))
            .collect();
        let mx = weights.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<(Partition, f64)> = weights.into_iter().map(|(l, w)| (l, (w - mx).exp())).collect();
        cur = pick(&weights, rng);
        steps.push(cur.clone());
    }
    steps.reverse();
    GraphPath::new(steps)
}

fn pow_log(x: LogPos, k: usize) -> LogPos {
    LogPos(x.0 * k as f64)
}

/// Forward kernel of a coherent system: from μ at level n to λ at level n+1 with
/// probability Φ(0) g_λ(Φ) w(μ,λ) / g_μ(Φ).
struct ForwardKernel {
    phi: PhiSpec,
    p: Rational,
    h: Vec<Rational>,
    ln_phi0: f64,
    /// (k, l) when g vanishes outside the hook λ_{k+1} ≤ l
    hook: Option<(usize, usize)>,
    /// ln g_λ(Φ), or None where g vanishes
    cache: HashMap<Partition, Option<f64>>,
}

impl ForwardKernel {
    fn new(phi: &PhiSpec, p: &Rational, hook: Option<(usize, usize)>) -> Self {
        let phi = phi.normalized().stripped();
        let ln_phi0 = crate::scalar::ln_rational(&phi.phi0());
        ForwardKernel { phi, p: p.clone(), h: vec![Rational::one()], ln_phi0, hook, cache: HashMap::new() }
    }

    fn ln_g(&mut self, lam: &Partition) -> Result<Option<f64>> {
        if let Some(v) = self.cache.get(lam) {
            return Ok(*v);
        }
        if let Some((k, l)) = self.hook {
            if lam.part(k + 1) > l {
                return Ok(None);
            }
        }
        let need = lam.first() + lam.len();
        if self.h.len() <= need {
            self.h = phi_h_coeffs(&self.phi, 2 * need + 8)?;
        }
        let v = g_eval_jt(lam, &self.p, &self.h)?;
        let out = if v.is_positive() { Some(crate::scalar::ln_rational(&v)) } else { None };
        self.cache.insert(lam.clone(), out);
        Ok(out)
    }

    fn draw<R: Rng>(&mut self, mu: &Partition, n: usize, rng: &mut R) -> Result<Partition> {
        let gmu = self.ln_g(mu)?.ok_or_else(|| Error::InvalidParameter(format!("g vanishes at {mu}")))?;
        let ln_q = (1.0 - rational_to_f64(&self.p)).ln();
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = mu.clone();
        let mut first = mu.first();
        loop {
            // all λ ⪰ μ with λ_1 = first and l(λ) ≤ n+1
            let mut inner = vec![vec![first]];
            for i in 2..=(mu.len() + 1).min(n + 1) {
                let (lo, hi) = (mu.part(i), mu.part(i - 1));
                inner = inner
                    .into_iter()
                    .flat_map(|v| {
                        (lo..=hi).map(move |x| {
                            let mut w = v.clone();
                            w.push(x);
                            w
                        })
                    })
                    .collect();
            }
            let mut row_mass = 0.0;
            for parts in inner {
                let lam = Partition::new(parts).expect("interlacing candidates are partitions");
                let Some(g) = self.ln_g(&lam)? else { continue };
                let pf = (self.ln_phi0 + g - gmu + edge_rows(mu, &lam) as f64 * ln_q).exp();
                acc += pf;
                row_mass += pf;
                last = lam.clone();
                if u < acc {
                    return Ok(lam);
                }
            }
            if (row_mass < 1e-300 && first > mu.first() + 4 * (n + 16)) || first > mu.first() + 100_000 {
                return Ok(last);
            }
            first += 1;
        }
    }
}

/// Samples levels 0..N of the path of a coherent system.
pub fn forward_sample_path<R: Rng>(spec: &CoherentSpec, n: usize, p: &Rational, rng: &mut R) -> Result<GraphPath> {
    let phi = spec.phi(p);
    phi.validate(p)?;
    let phi = phi.normalized();
    let hook = match spec {
        CoherentSpec::Gt(gt) => Some((gt.alphas.len(), gt.betas.len() - gt.frozen())),
        CoherentSpec::Phi(_) => None,
    };
    let mut kernel = ForwardKernel::new(&phi, p, hook);
    let mut steps = vec![Partition::empty()];
    let mut cur = Partition::empty();
    for level in 0..n {
        cur = if kernel.phi.factors.is_empty() { cur } else { kernel.draw(&cur, level, rng)? };
        steps.push(cur.clone());
    }
    Ok(GraphPath { steps }.shifted(phi.s))
}

/// All paths from ∅ to λ through levels 0..N.
pub fn paths_to(lambda: &Partition, n: usize) -> Vec<GraphPath> {
    fn rec(cur: &Partition, level: usize, acc: &mut Vec<Partition>, out: &mut Vec<GraphPath>) {
        if level == 0 {
            if cur.is_empty() {
                let mut s = acc.clone();
                s.reverse();
                out.push(GraphPath { steps: s });
            }
            return;
        }
        for mu in interlacing_below(cur) {
            if mu.len() <= level - 1 {
                acc.push(mu.clone());
                rec(&mu, level - 1, acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    if lambda.len() <= n {
        rec(lambda, n, &mut vec![lambda.clone()], &mut out);
    }
    out
}

/// Empirical histogram helper shared by the Monte Carlo tests and the CLI.
pub fn histogram<I: IntoIterator<Item = Partition>>(it: I) -> BTreeMap<Partition, usize> {
    let mut h = BTreeMap::new();
    for l in it {
        *h.entry(l).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    #[test]
    fn weights_and_dims() {
        let pp = q(1, 3);
        assert_eq!(edge_weight(&Partition::empty(), &p(&[1]), &pp), qi(1));
        assert_eq!(edge_weight(&p(&[1]), &p(&[1]), &pp), q(2, 3));
        assert_eq!(edge_weight(&p(&[2]), &p(&[1, 1]), &pp), qi(0));
        assert_eq!(dim(&p(&[1]), 2, &pp), q(5, 3));
        assert_eq!(dim_between(&p(&[2, 1]), &p(&[2, 1]), 0, &pp), qi(1));
        assert_eq!(dim_between(&p(&[2]), &p(&[2, 1]), 0, &pp), qi(0));
    }

    #[test]
    fn cotransition_example() {
        let pp = q(1, 2);
        let a = cotransition(&p(&[1]), 2, &Partition::empty(), 1, &pp).unwrap();
        let b = cotransition(&p(&[1]), 2, &p(&[1]), 1, &pp).unwrap();
        assert_eq!(a, q(2, 3));
        assert_eq!(b, q(1, 3));
        assert_eq!(cotransition(&p(&[2, 1]), 2, &p(&[2, 1]), 2, &pp).unwrap(), qi(1));
    }

    #[test]
    fn cotransitions_are_stochastic() {
        let pp = q(2, 7);
        for size in 0..=5 {
            for lam in crate::partitions::partitions_of(size) {
                for top in lam.len().max(1)..=5 {
                    for k in 0..=3.min(top) {
                        let low = top - k;
                        let total: Rational = down_set(&lam)
                            .iter()
                            .filter(|mu| mu.len() <= low)
                            .map(|mu| cotransition(&lam, top, mu, low, &pp).unwrap())
                            .sum();
                        assert_eq!(total, qi(1), "{lam} {top} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn geometric_level_one() {
        let pt = q(1, 2);
        let m = measure_phi(&PhiSpec::geometric(&pt), 1, &q(1, 2), 1e-10, GBackend::Jt).unwrap();
        for (lam, v) in &m.atoms {
            assert_eq!(lam.len() <= 1, true);
            assert_eq!(*v, q(1, 2) * num_traits::pow(pt.clone(), lam.first()));
        }
        assert!(m.tail_f64() <= 1e-10 && m.tail_f64() >= 0.0);
    }

    #[test]
    fn trivial_phi_is_delta() {
        let m = measure_phi(&PhiSpec::one(), 3, &q(1, 3), 1e-10, GBackend::Jt).unwrap();
        assert_eq!(m.atoms, vec![(Partition::empty(), qi(1))]);
    }

    #[test]
    fn backends_agree_on_atoms() {
        let pp = q(1, 3);
        let phi = PhiSpec { s: 0, factors: vec![(q(1, 4), q(1, 2)), (q(-1, 3), qi(0)), (qi(0), q(1, 5))] };
        let a = measure_phi(&phi, 2, &pp, 1e-4, GBackend::Jt).unwrap();
        let b = measure_phi(&phi, 2, &pp, 1e-4, GBackend::Factored).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gt_matches_phi_route() {
        let pp = q(1, 3);
        let spec = GtSpec::new(vec![qi(1)], vec![]);
        let a = measure_gt(&spec, 2, &pp, 1e-8).unwrap();
        let b = measure_phi(&PhiSpec::from_gt(&spec, &pp), 2, &pp, 1e-8, GBackend::Jt).unwrap();
        let bm = b.as_map();
        for (lam, v) in &a.atoms {
            assert_eq!(bm.get(lam).cloned().unwrap_or_else(Rational::zero), *v, "{lam}");
        }
        assert!(b.atoms.iter().all(|(l, v)| l.len() <= 1 || v.is_zero()));
    }

    #[test]
    fn coherency_geometric() {
        let pp = q(1, 2);
        let phi = PhiSpec::geometric(&pp);
        let ms: Vec<_> = (0..=3).map(|n| measure_phi(&phi, n, &pp, 1e-10, GBackend::Jt).unwrap()).collect();
        for n in 0..3 {
            let r = coherency_residual(&ms[n], &ms[n + 1], &pp).unwrap();
            assert!(r.residual <= 1e-9, "{r:?}");
        }
    }

    #[test]
    fn conditioned_path_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pp = q(1, 2);
        let path = sample_conditioned_path(&p(&[2, 1]), 1, &pp, &mut rng);
        assert!(path.is_err());
        let path = sample_conditioned_path(&p(&[3]), 1, &pp, &mut rng).unwrap();
        assert_eq!(path.steps, vec![Partition::empty(), p(&[3])]);
        let mut through_empty = 0;
        let trials = 20000;
        for _ in 0..trials {
            let path = sample_conditioned_path(&p(&[1]), 2, &pp, &mut rng).unwrap();
            if path.steps[1].is_empty() {
                through_empty += 1;
            }
        }
        let f = through_empty as f64 / trials as f64;
        let e = 2.0 / 3.0;
        assert!((f - e).abs() < 4.0 * (e * (1.0 - e) / trials as f64).sqrt());
    }

    #[test]
    fn forward_path_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let path = forward_sample_path(&CoherentSpec::Phi(PhiSpec::one()), 4, &q(1, 2), &mut rng).unwrap();
        assert!(path.steps.iter().all(|t| t.is_empty()));
        let z = PhiSpec { s: 1, factors: vec![] };
        let path = forward_sample_path(&CoherentSpec::Phi(z), 3, &q(1, 2), &mut rng).unwrap();
        assert_eq!(path.last(), &p(&[1, 1, 1]));
    }

    #[test]
    fn path_enumeration() {
        let pp = q(1, 3);
        for lam in [p(&[2, 1]), p(&[3]), p(&[1, 1])] {
            let paths = paths_to(&lam, 3);
            let total: Rational = paths.iter().map(|t| t.weight(&pp)).sum();
            assert_eq!(total, dim(&lam, 3, &pp));
        }
    }
}
