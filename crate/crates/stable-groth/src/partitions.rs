//! Partitions, interlacing and skew-shape statistics.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A weakly decreasing sequence of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    /// Builds a partition, dropping trailing zeros.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not weakly decreasing")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition { parts })
    }

    /// Like [`Partition::new`] but panics on bad input; for literals.
    pub fn from_slice(parts: &[usize]) -> Self {
        Self::new(parts.to_vec()).expect("valid partition literal")
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// λ_i with 1-based index; zero beyond the length.
    pub fn part(&self, i: usize) -> usize {
        if i == 0 {
            return usize::MAX;
        }
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn first(&self) -> usize {
        self.part(1)
    }

    pub fn conjugate(&self) -> Partition {
        let w = self.first();
        let parts = (1..=w).map(|i| self.parts.iter().filter(|&&p| p >= i).count()).collect();
        Partition { parts }
    }

    /// λ̄ = (λ_2, λ_3, …).
    pub fn bar(&self) -> Partition {
        Partition { parts: self.parts.iter().skip(1).copied().collect() }
    }

    /// Whether the diagram of `self` contains that of `mu`.
    pub fn contains(&self, mu: &Partition) -> bool {
        mu.len() <= self.len() && mu.parts.iter().zip(&self.parts).all(|(m, l)| m <= l)
    }

    /// Parts padded with zeros to length `n`.
    pub fn padded(&self, n: usize) -> Vec<usize> {
        let mut v = self.parts.clone();
        v.resize(n.max(v.len()), 0);
        v
    }

    /// λ + (s^n): add `s` to each of the first `n` parts.
    pub fn shift(&self, n: usize, s: usize) -> Partition {
        let mut v = self.padded(n);
        for x in v.iter_mut().take(n) {
            *x += s;
        }
        Partition::new(v).expect("shift keeps order")
    }

    /// Inverse of [`Partition::shift`]; `None` if some of the first `n` parts is below `s`.
    pub fn unshift(&self, n: usize, s: usize) -> Option<Partition> {
        if self.len() > n {
            return None;
        }
        let v = self.padded(n);
        if v.iter().any(|&x| x < s) {
            return None;
        }
        Partition::new(v.into_iter().map(|x| x - s).collect()).ok()
    }

    /// Multiplicity of the part `k`.
    pub fn multiplicity(&self, k: usize) -> usize {
        self.parts.iter().filter(|&&p| p == k).count()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let s: Vec<String> = self.parts.iter().map(|p| p.to_string()).collect();
        write!(f, "{}", s.join(","))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Partition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        if s.is_empty() || s == "0" || s == "∅" {
            return Ok(Partition::empty());
        }
        let parts = s
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidPartition(s.to_string()))?;
        Partition::new(parts)
    }
}

impl Ord for Partition {
    /// Graded order: by size, then reverse-lexicographic on parts
    /// (so within a size the largest first part comes first).
    fn cmp(&self, other: &Self) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| other.parts.cmp(&self.parts))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Partition::new(v).map_err(serde::de::Error::custom)
    }
}

/// `mu ⪯ lambda`: λ_1 ≥ μ_1 ≥ λ_2 ≥ μ_2 ≥ …
pub fn interlaces(mu: &Partition, lambda: &Partition) -> bool {
    if mu.len() > lambda.len() {
        return false;
    }
    (1..=lambda.len()).all(|i| lambda.part(i) >= mu.part(i) && mu.part(i) >= lambda.part(i + 1))
}

pub fn conjugate(lambda: &Partition) -> Partition {
    lambda.conjugate()
}

/// Counts attached to a skew diagram λ/μ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewStats {
    /// nonempty rows
    pub rows: usize,
    /// nonempty columns
    pub cols: usize,
    /// edge-connected components
    pub components: usize,
    /// |λ/μ| − rows − cols + components
    pub excess: usize,
}

pub fn skew_stats(lambda: &Partition, mu: &Partition) -> Result<SkewStats> {
    if !lambda.contains(mu) {
        return Err(Error::NotContained { outer: lambda.to_string(), inner: mu.to_string() });
    }
    let n = lambda.len();
    let rows = (1..=n).filter(|&i| lambda.part(i) > mu.part(i)).count();
    // rows i and i+1 share an edge exactly when λ_{i+1} > μ_i
    let links = (1..n).filter(|&i| lambda.part(i + 1) > mu.part(i)).count();
    let (lc, mc) = (lambda.conjugate(), mu.conjugate());
    let cols = (1..=lc.len()).filter(|&j| lc.part(j) > mc.part(j)).count();
    let components = rows - links;
    let size = lambda.size() - mu.size();
    Ok(SkewStats { rows, cols, components, excess: size + components - rows - cols })
}

/// All partitions of `n`, largest first part first.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    partitions_bounded(n, n, n)
}

/// Partitions of `n` with at most `max_len` parts, each at most `max_part`.
pub fn partitions_bounded(n: usize, max_len: usize, max_part: usize) -> Vec<Partition> {
    fn rec(n: usize, max_len: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        if max_len == 0 {
            return;
        }
        for first in (1..=max_part.min(n)).rev() {
            cur.push(first);
            rec(n - first, max_len - 1, first, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_len, max_part, &mut Vec::new(), &mut out);
    out
}

/// All partitions with size ≤ `max_size` and length ≤ `max_len`, in graded order.
pub fn partitions_up_to(max_size: usize, max_len: usize) -> Vec<Partition> {
    (0..=max_size).flat_map(|n| partitions_bounded(n, max_len, n)).collect()
}

/// All μ ⊆ λ.
pub fn down_set(lambda: &Partition) -> Vec<Partition> {
    fn rec(lambda: &Partition, i: usize, bound: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if i > lambda.len() {
            out.push(Partition::new(cur.clone()).unwrap());
            return;
        }
        for v in 0..=lambda.part(i).min(bound) {
            cur.push(v);
            rec(lambda, i + 1, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(lambda, 1, usize::MAX, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All μ with μ ⪯ λ.
pub fn interlacing_below(lambda: &Partition) -> Vec<Partition> {
    let n = lambda.len();
    let mut out = vec![Vec::new()];
    for i in 1..=n {
        let (lo, hi) = (lambda.part(i + 1), lambda.part(i));
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(|v| Partition::new(v).unwrap()).collect()
}

/// All λ with μ ⪯ λ, l(λ) ≤ max_len and λ_1 ≤ max_first.
pub fn interlacing_above(mu: &Partition, max_len: usize, max_first: usize) -> Vec<Partition> {
    let n = (mu.len() + 1).min(max_len);
    if mu.len() > max_len || mu.first() > max_first {
        return Vec::new();
    }
    let mut out = vec![Vec::new()];
    for i in 1..=n {
        let lo = mu.part(i);
        let hi = if i == 1 { max_first } else { mu.part(i - 1) };
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.into_iter().map(|v| Partition::new(v).unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(p(&[4, 3, 2]).conjugate(), p(&[3, 3, 2, 1]));
        assert_eq!(Partition::empty().conjugate(), Partition::empty());
        assert_eq!(p(&[1, 1, 1]).conjugate(), p(&[3]));
    }

    #[test]
    fn normalization_and_parse() {
        assert_eq!(Partition::new(vec![3, 1, 0, 0]).unwrap(), p(&[3, 1]));
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!("4,3,2".parse::<Partition>().unwrap(), p(&[4, 3, 2]));
        assert_eq!("".parse::<Partition>().unwrap(), Partition::empty());
        assert_eq!(p(&[4, 3, 2]).to_string(), "4,3,2");
        let j = serde_json::to_string(&p(&[2, 1])).unwrap();
        assert_eq!(j, "[2,1]");
        let back: Partition = serde_json::from_str(&j).unwrap();
        assert_eq!(back, p(&[2, 1]));
    }

    #[test]
    fn interlacing_examples() {
        assert!(interlaces(&p(&[4, 2]), &p(&[4, 3, 2])));
        assert!(interlaces(&p(&[3, 1]), &p(&[3, 1])));
        assert!(!interlaces(&p(&[1, 1]), &p(&[3])));
    }

    #[test]
    fn skew_stats_examples() {
        let s = skew_stats(&p(&[7, 4, 3, 2]), &p(&[5, 2])).unwrap();
        assert_eq!((s.rows, s.cols, s.components, s.excess), (4, 6, 2, 1));
        let s = skew_stats(&p(&[3, 1]), &p(&[3, 1])).unwrap();
        assert_eq!((s.rows, s.cols, s.components, s.excess), (0, 0, 0, 0));
        let s = skew_stats(&p(&[2]), &Partition::empty()).unwrap();
        assert_eq!((s.rows, s.cols, s.components, s.excess), (1, 2, 1, 0));
        assert!(skew_stats(&p(&[2]), &p(&[1, 1])).is_err());
    }

    /// Components by flood fill over boxes, as an independent check.
    fn components_flood(lambda: &Partition, mu: &Partition) -> usize {
        let mut boxes: Vec<(usize, usize)> = Vec::new();
        for i in 1..=lambda.len() {
            for j in mu.part(i) + 1..=lambda.part(i) {
                boxes.push((i, j));
            }
        }
        let mut seen = vec![false; boxes.len()];
        let mut comps = 0;
        for s in 0..boxes.len() {
            if seen[s] {
                continue;
            }
            comps += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(t) = stack.pop() {
                let (i, j) = boxes[t];
                for (u, &(a, b)) in boxes.iter().enumerate() {
                    if !seen[u] && (a.abs_diff(i) + b.abs_diff(j) == 1) {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        comps
    }

    #[test]
    fn exhaustive_small_shapes() {
        for n in 0..=8 {
            for lambda in partitions_of(n) {
                let below = interlacing_below(&lambda);
                for mu in down_set(&lambda) {
                    let s = skew_stats(&lambda, &mu).unwrap();
                    let size = lambda.size() - mu.size();
                    assert_eq!(s.excess + s.rows + s.cols, size + s.components);
                    assert!(s.components <= s.rows && s.components <= s.cols);
                    assert_eq!(s.components, components_flood(&lambda, &mu));
                    assert_eq!(size == 0, s.rows == 0 && s.cols == 0 && s.components == 0);
                    if interlaces(&mu, &lambda) {
                        assert!(below.contains(&mu));
                        let (lc, mc) = (lambda.conjugate(), mu.conjugate());
                        assert!((1..=lc.len()).all(|j| lc.part(j) - mc.part(j) <= 1));
                    } else {
                        assert!(!below.contains(&mu));
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        let counts: Vec<usize> = (0..8).map(|n| partitions_of(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15]);
        assert_eq!(down_set(&p(&[2, 1])).len(), 5);
        let above = interlacing_above(&p(&[1]), 2, 3);
        assert_eq!(above.len(), 6);
        assert!(above.iter().all(|l| interlaces(&p(&[1]), l)));
    }

    #[test]
    fn shifting() {
        let l = p(&[2, 1]);
        assert_eq!(l.shift(3, 1), p(&[3, 2, 1]));
        assert_eq!(p(&[3, 2, 1]).unshift(3, 1), Some(l));
        assert_eq!(p(&[3, 2]).unshift(3, 1), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_partition() -> impl Strategy<Value = Partition> {
            proptest::collection::vec(0usize..7, 0..6).prop_map(|mut v| {
                v.sort_unstable_by(|a, b| b.cmp(a));
                Partition::new(v).unwrap()
            })
        }

        proptest! {
            #[test]
            fn conjugation_is_involutive(l in arb_partition()) {
                let c = l.conjugate();
                prop_assert_eq!(c.conjugate(), l.clone());
                prop_assert_eq!(c.size(), l.size());
                prop_assert_eq!(c.first(), l.len());
            }

            #[test]
            fn display_roundtrip(l in arb_partition()) {
                prop_assert_eq!(l.to_string().parse::<Partition>().unwrap(), l);
            }
        }
    }
}
