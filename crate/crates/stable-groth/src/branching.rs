//! Interlacing-chain dynamic programming.
//!
//! One step maps a table `old(μ)` to `new(λ) = Σ_{μ⪯λ} x'^{|λ/μ|} g^{r(μ/λ̄)} old(μ)`.
//! The weight factorizes over rows, so the sum is taken one coordinate at a
//! time (last row first) with a running recurrence; every entry costs O(1)
//! per row instead of a sum over all interlacing predecessors.

use std::collections::HashMap;

use crate::partitions::Partition;
use crate::scalar::Semiring;

/// Which partitions a table keeps.
#[derive(Clone, Debug)]
pub enum Bound {
    /// μ ⊆ top.
    Sub(Partition),
    /// |μ| ≤ max_size and l(μ) ≤ max_len.
    Size { max_size: usize, max_len: usize },
}

impl Bound {
    fn rows(&self) -> usize {
        match self {
            Bound::Sub(top) => top.len(),
            Bound::Size { max_len, .. } => *max_len,
        }
    }

    pub fn admits(&self, p: &Partition) -> bool {
        match self {
            Bound::Sub(top) => top.contains(p),
            Bound::Size { max_size, max_len } => p.size() <= *max_size && p.len() <= *max_len,
        }
    }
}

/// Table of values indexed by partitions.
pub type Table<T> = HashMap<Partition, T>;

pub fn delta<T: Semiring>(mu: &Partition) -> Table<T> {
    let mut t = HashMap::new();
    t.insert(mu.clone(), T::one());
    t
}

/// One interlacing step with per-step weights `xp` (per box) and `g` (per
/// nonempty row of μ/λ̄).
pub fn step<T: Semiring>(old: &Table<T>, xp: &T, g: &T, bound: &Bound) -> Table<T> {
    let r = bound.rows();
    if r == 0 {
        return old.clone();
    }
    let mut cur: HashMap<Vec<usize>, T> = old
        .iter()
        .filter(|(k, v)| k.len() <= r && !v.is_zero())
        .map(|(k, v)| (k.padded(r), v.clone()))
        .collect();
    for i in (0..r).rev() {
        // group by every coordinate except i
        let mut groups: HashMap<Vec<usize>, Vec<(usize, T)>> = HashMap::new();
        for (k, v) in cur.into_iter() {
            let mut gk = k.clone();
            gk[i] = 0;
            groups.entry(gk).or_default().push((k[i], v));
        }
        let mut next: HashMap<Vec<usize>, T> = HashMap::new();
        for (gk, mut entries) in groups {
            entries.sort_by_key(|e| e.0);
            let c = if i + 1 < r { gk[i + 1] } else { 0 };
            let mut ub = match bound {
                Bound::Sub(top) => top.part(i + 1),
                Bound::Size { max_size, .. } => {
                    let rest: usize = gk.iter().sum();
                    if rest > *max_size {
                        continue;
                    }
                    max_size - rest
                }
            };
            if i > 0 {
                ub = ub.min(gk[i - 1]);
            }
            if ub < c {
                continue;
            }
            let mut acc = T::zero();
            let mut idx = entries.partition_point(|e| e.0 < c);
            for b in c..=ub {
                let mut a = T::zero();
                if idx < entries.len() && entries[idx].0 == b {
                    a = entries[idx].1.clone();
                    idx += 1;
                }
                let w = if b == c { a } else { g.clone() * a };
                acc = xp.clone() * acc + w;
                if !acc.is_zero() {
                    let mut key = gk.clone();
                    key[i] = b;
                    next.insert(key, acc.clone());
                } else if idx >= entries.len() {
                    break;
                }
            }
        }
        cur = next;
    }
    cur.into_iter()
        .map(|(k, v)| (Partition::new(k).expect("sweep keeps partitions ordered"), v))
        .collect()
}

/// Runs `steps` interlacing steps from `start`, returning the table at every level
/// (index 0 is the start).
pub fn chain<T: Semiring>(start: &Partition, steps: &[(T, T)], bound: &Bound) -> Vec<Table<T>> {
    let mut levels = Vec::with_capacity(steps.len() + 1);
    let mut cur = if bound.admits(start) { delta(start) } else { HashMap::new() };
    levels.push(cur.clone());
    for (xp, g) in steps {
        cur = step(&cur, xp, g, bound);
        levels.push(cur.clone());
    }
    levels
}

/// Only the final table of [`chain`].
pub fn chain_last<T: Semiring>(start: &Partition, steps: &[(T, T)], bound: &Bound) -> Table<T> {
    let mut cur = if bound.admits(start) { delta(start) } else { HashMap::new() };
    for (xp, g) in steps {
        cur = step(&cur, xp, g, bound);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{interlacing_below, partitions_up_to};
    use crate::scalar::{q, Rational};
    use num_traits::{One, Zero};

    /// Direct sum over interlacing predecessors.
    fn naive_step(old: &Table<Rational>, xp: &Rational, g: &Rational, bound: &Bound) -> Table<Rational> {
        let mut out = HashMap::new();
        let cands = match bound {
            Bound::Size { max_size, max_len } => partitions_up_to(*max_size, *max_len),
            Bound::Sub(top) => crate::partitions::down_set(top),
        };
        for lam in cands {
            let mut acc = Rational::zero();
            for mu in interlacing_below(&lam) {
                if let Some(v) = old.get(&mu) {
                    let d = lam.size() - mu.size();
                    let rr = (1..=mu.len()).filter(|&i| mu.part(i) > lam.part(i + 1)).count();
                    acc += num_traits::pow(xp.clone(), d) * num_traits::pow(g.clone(), rr) * v;
                }
            }
            if !acc.is_zero() {
                out.insert(lam, acc);
            }
        }
        out
    }

    #[test]
    fn sweep_matches_naive_sum() {
        let bound = Bound::Size { max_size: 7, max_len: 3 };
        let (xp, g) = (q(2, 3), q(1, 2));
        let mut t: Table<Rational> = delta(&Partition::empty());
        for _ in 0..3 {
            let a = step(&t, &xp, &g, &bound);
            let b = naive_step(&t, &xp, &g, &bound);
            assert_eq!(a, b);
            t = a;
        }
        let top = Partition::from_slice(&[3, 2, 1]);
        let bound = Bound::Sub(top);
        let mut t: Table<Rational> = delta(&Partition::from_slice(&[1]));
        for _ in 0..3 {
            let a = step(&t, &xp, &g, &bound);
            let b = naive_step(&t, &xp, &g, &bound);
            assert_eq!(a, b);
            t = a;
        }
    }

    #[test]
    fn principal_single_box() {
        let p = q(1, 2);
        let g = Rational::one() - &p;
        let lam = Partition::from_slice(&[1]);
        let levels = chain(&Partition::empty(), &[(Rational::one(), g.clone()), (Rational::one(), g)], &Bound::Sub(lam.clone()));
        assert_eq!(levels[2][&lam], q(3, 2));
    }
}
