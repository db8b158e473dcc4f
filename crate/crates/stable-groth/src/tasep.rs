//! Discrete-time TASEP with geometric jumps.
//!
//! A configuration is stored as the partition λ with particle positions
//! Y_i = λ_i − i. Particles far to the left are packed and cannot move, so
//! only the first l(λ)+1 of them are ever touched.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::branching::Bound;
use crate::error::{Error, Result};
use crate::graph::CoherentLevelMeasure;
use crate::grothendieck::principal_last;
use crate::partitions::Partition;
use crate::scalar::{rational_to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParticleConfig {
    pub lambda: Partition,
    pub t: usize,
}

impl ParticleConfig {
    pub fn initial() -> Self {
        ParticleConfig { lambda: Partition::empty(), t: 0 }
    }

    /// Y_1..Y_k.
    pub fn positions(&self, k: usize) -> Vec<i64> {
        (1..=k).map(|i| self.lambda.part(i) as i64 - i as i64).collect()
    }
}

/// Bulk rate p and first-particle rate p̃ ≤ p.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpLaw {
    pub p: Rational,
    pub pt: Rational,
}

impl JumpLaw {
    pub fn new(p: Rational, pt: Rational) -> Result<Self> {
        if !(Rational::zero() < pt && pt <= p && p < Rational::one()) {
            return Err(Error::InvalidParameter(format!("need 0 < p̃ ≤ p < 1, got p = {p}, p̃ = {pt}")));
        }
        Ok(JumpLaw { p, pt })
    }

    pub fn uniform(p: Rational) -> Result<Self> {
        JumpLaw::new(p.clone(), p)
    }
}

/// Geometric jump with P(d) = (1−q) q^d.
fn geometric<R: Rng>(q: f64, rng: &mut R) -> i64 {
    // 1 − U lies in (0, 1], so the log is finite
    let u: f64 = 1.0 - rng.gen::<f64>();
    (u.ln() / q.ln()).floor() as i64
}

/// One time step: particles from the last active one down to Y_2 jump a
/// geometric distance clamped one short of the (old) right neighbour, then
/// Y_1 jumps freely with rate p̃.
pub fn step<R: Rng>(cfg: &ParticleConfig, law: &JumpLaw, rng: &mut R) -> ParticleConfig {
    let (p, pt) = (rational_to_f64(&law.p), rational_to_f64(&law.pt));
    let k = cfg.lambda.len() + 1;
    let old = cfg.positions(k);
    let mut new = old.clone();
    for i in (1..k).rev() {
        let cap = old[i - 1] - 1;
        new[i] = (old[i] + geometric(p, rng)).min(cap);
    }
    new[0] = old[0] + geometric(pt, rng);
    let parts = new.iter().enumerate().map(|(i, y)| (y + i as i64 + 1) as usize).collect();
    ParticleConfig { lambda: Partition::new(parts).expect("blocking keeps the order"), t: cfg.t + 1 }
}

/// Runs `n` steps from the empty configuration and returns every state.
pub fn trajectory<R: Rng>(n: usize, law: &JumpLaw, rng: &mut R) -> Vec<ParticleConfig> {
    let mut out = vec![ParticleConfig::initial()];
    for _ in 0..n {
        let next = step(out.last().unwrap(), law, rng);
        out.push(next);
    }
    out
}

/// P(Y(t+n) = λ+δ | Y(t) = μ+δ) = p^{|λ|−|μ|}(1−p)^n G_{λ/μ}(1^n) for p̃ = p.
pub fn transition_prob(mu: &Partition, lambda: &Partition, n_steps: usize, p: &Rational) -> Rational {
    if !lambda.contains(mu) {
        return Rational::zero();
    }
    let g = principal_last(mu, n_steps, Rational::one() - p, &Bound::Sub(lambda.clone()))
        .remove(lambda)
        .unwrap_or_else(Rational::zero);
    num_traits::pow(p.clone(), lambda.size() - mu.size()) * num_traits::pow(Rational::one() - p, n_steps) * g
}

/// Law of Y(n) started from the packed state, on |λ| ≤ radius where the
/// omitted mass drops below `tol`.
pub fn distribution_at(n: usize, law: &JumpLaw, tol: f64) -> Result<CoherentLevelMeasure> {
    if n == 0 {
        return Ok(CoherentLevelMeasure::delta(0, &law.p, Partition::empty()));
    }
    let (p, pt) = (&law.p, &law.pt);
    let mut radius = 8;
    loop {
        let table = principal_last(&Partition::empty(), n, Rational::one() - p, &Bound::Size { max_size: radius, max_len: n });
        let c = num_traits::pow(Rational::one() - pt, n);
        let mut atoms: Vec<(Partition, Rational)> = table
            .into_iter()
            .map(|(lam, g)| {
                let v = &c * num_traits::pow(pt.clone(), lam.first()) * num_traits::pow(p.clone(), lam.size() - lam.first()) * g;
                (lam, v)
            })
            .collect();
        atoms.sort_by(|a, b| a.0.cmp(&b.0));
        let total: Rational = atoms.iter().map(|a| a.1.clone()).sum();
        let tail = Rational::one() - total;
        if rational_to_f64(&tail) <= tol {
            return Ok(CoherentLevelMeasure { level: n, p: p.clone(), atoms, tail_mass: tail });
        }
        if radius >= 400 {
            return Err(Error::TruncationFailed { tail: rational_to_f64(&tail), tol });
        }
        radius = radius * 3 / 2 + 4;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandCheck {
    pub partition: Partition,
    pub exact: f64,
    pub empirical: f64,
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub bands: Vec<BandCheck>,
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
    pub all_bands_pass: bool,
    pub histogram: BTreeMap<String, usize>,
}

/// Simulates `samples` runs of `n` steps and compares with the exact law.
/// Bands are checked for every λ with P ≥ 1e−3; the χ² statistic pools the
/// remaining mass into one extra cell.
pub fn mc_vs_exact(n: usize, law: &JumpLaw, samples: usize, seed: u64) -> Result<McReport> {
    let exact = distribution_at(n, law, 1e-12)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist: BTreeMap<Partition, usize> = BTreeMap::new();
    for _ in 0..samples {
        let mut cfg = ParticleConfig::initial();
        for _ in 0..n {
            cfg = step(&cfg, law, &mut rng);
        }
        *hist.entry(cfg.lambda).or_insert(0) += 1;
    }
    let s = samples as f64;
    let mut bands = Vec::new();
    let mut chi2 = 0.0;
    let (mut rest_exact, mut rest_count) = (1.0, samples);
    for (lam, v) in &exact.atoms {
        let pe = rational_to_f64(v);
        if pe < 1e-3 {
            continue;
        }
        let count = hist.get(lam).copied().unwrap_or(0);
        let emp = count as f64 / s;
        let sigma = (pe * (1.0 - pe) / s).sqrt();
        bands.push(BandCheck { partition: lam.clone(), exact: pe, empirical: emp, sigma, pass: (emp - pe).abs() <= 4.0 * sigma });
        chi2 += (count as f64 - s * pe).powi(2) / (s * pe);
        rest_exact -= pe;
        rest_count -= count;
    }
    if rest_exact > 0.0 {
        chi2 += (rest_count as f64 - s * rest_exact).powi(2) / (s * rest_exact);
    }
    let dof = bands.len().max(1);
    let p_value = ChiSquared::new(dof as f64).map(|d| 1.0 - d.cdf(chi2)).unwrap_or(f64::NAN);
    let all_bands_pass = bands.iter().all(|b| b.pass);
    Ok(McReport {
        steps: n,
        samples,
        seed,
        bands,
        chi2,
        dof,
        p_value,
        all_bands_pass,
        histogram: hist.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}
