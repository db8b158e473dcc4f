//! Contour-integral evaluation of G_λ by trapezoidal quadrature on circles.
//!
//! Two integrands are available: one with an integral per row of λ
//! (poles at 0, a, b inside, 1/x_j outside) and one with an integral per
//! column (poles at 0 and −b). On a circle the trapezoidal rule converges
//! geometrically for analytic integrands, so the difference between the
//! K-node and K/2-node sums is a safe error estimate.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::Partition;

const MAX_K: usize = 3;

/// Equispaced nodes on a circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CirclePath {
    pub center: Complex64,
    pub radius: f64,
    pub points: usize,
}

impl CirclePath {
    pub fn new(center: Complex64, radius: f64, points: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
        }
        if points < 64 || !points.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("node count {points} must be a power of two ≥ 64")));
        }
        Ok(CirclePath { center, radius, points })
    }

    pub fn with_points(&self, points: usize) -> Result<Self> {
        CirclePath::new(self.center, self.radius, points)
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        let k = self.points as f64;
        (0..self.points)
            .map(|j| self.center + Complex64::from_polar(self.radius, 2.0 * std::f64::consts::PI * j as f64 / k))
            .collect()
    }

    /// Signed distance of z from the circle (negative inside).
    fn gap(&self, z: Complex64) -> f64 {
        (z - self.center).norm() - self.radius
    }
}

/// A quadrature result. `error` bounds |true − value| heuristically (node
/// doubling plus floating-point rounding).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContourValue {
    pub value: f64,
    pub imag: f64,
    pub error: f64,
    pub points: usize,
}

/// Σ over the k-fold tensor grid of Π_{i<j}(u_i − u_j) Π_i w_i(node); also the
/// same sum on the even subgrid and Σ of absolute values.
fn tensor_sum(w: &[Vec<Complex64>], nodes: &[Complex64]) -> (Complex64, Complex64, f64) {
    let k = w.len();
    let n = nodes.len();
    let mut full = Complex64::new(0.0, 0.0);
    let mut half = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    match k {
        0 => return (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 1.0),
        1 => {
            for (j, v) in w[0].iter().enumerate() {
                full += v;
                abs += v.norm();
                if j % 2 == 0 {
                    half += v;
                }
            }
        }
        2 => {
            for a in 0..n {
                let (ua, wa) = (nodes[a], w[0][a]);
                for b in 0..n {
                    let t = (ua - nodes[b]) * wa * w[1][b];
                    full += t;
                    abs += t.norm();
                    if (a | b) % 2 == 0 {
                        half += t;
                    }
                }
            }
        }
        _ => {
            for a in 0..n {
                let (ua, wa) = (nodes[a], w[0][a]);
                for b in 0..n {
                    let ub = nodes[b];
                    let wab = (ua - ub) * wa * w[1][b];
                    for c in 0..n {
                        let uc = nodes[c];
                        let t = wab * (ua - uc) * (ub - uc) * w[2][c];
                        full += t;
                        abs += t.norm();
                        if (a | b | c) % 2 == 0 {
                            half += t;
                        }
                    }
                }
            }
        }
    }
    let scale = 1.0 / (n as f64).powi(k as i32);
    (full * scale, half * scale * 2f64.powi(k as i32), abs * scale)
}

/// Integrates Π_{i<j}(u_i−u_j) Π_i f_i(u_i) du_i/(2πi) over the circle.
/// `ops` is the number of floating multiplications behind one value of f_i,
/// which sets its relative rounding error.
fn integrate<F>(k: usize, ops: usize, path: &CirclePath, f: F) -> ContourValue
where
    F: Fn(usize, Complex64) -> Complex64,
{
    let nodes = path.nodes();
    // du/(2πi) = (u − c) dθ/(2π)
    let w: Vec<Vec<Complex64>> = (0..k).map(|i| nodes.iter().map(|&u| f(i, u) * (u - path.center)).collect()).collect();
    let (full, half, abs) = tensor_sum(&w, &nodes);
    let rounding = 4.0 * f64::EPSILON * abs * (2 * k.max(1) + ops) as f64;
    let error = (full - half).norm() + rounding;
    ContourValue { value: full.re, imag: full.im, error: error.max(full.im.abs()), points: path.points }
}

fn check_k(k: usize) -> Result<()> {
    if k > MAX_K {
        return Err(Error::Unsupported(format!("{k}-fold contour integrals (at most {MAX_K})")));
    }
    Ok(())
}

fn violation(what: &str) -> Error {
    Error::ContourViolation(what.to_string())
}

/// G_λ^{(a,−b)}(xs) via the row integrand.
pub fn G_contour_rows(lambda: &Partition, xs: &[f64], a: f64, b: f64, path: &CirclePath) -> Result<ContourValue> {
    let k = lambda.len();
    check_k(k)?;
    let inv_max = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if inv_max > 0.0 && a.abs().max(b.abs()) >= 1.0 / inv_max {
        return Err(Error::InvalidParameter("need max(|a|,|b|) < min |x_i|^{-1}".into()));
    }
    for z in [0.0, a, b] {
        if path.gap(Complex64::new(z, 0.0)) >= 0.0 {
            return Err(violation(&format!("{z} is not inside the contour")));
        }
    }
    for &x in xs {
        if x != 0.0 && path.gap(Complex64::new(1.0 / x, 0.0)) <= 0.0 {
            return Err(violation(&format!("pole {} lies inside the contour", 1.0 / x)));
        }
    }
    let parts = lambda.padded(k);
    let one = Complex64::new(1.0, 0.0);
    let ops = xs.len() + 2 * ((lambda.first() + k) as f64).log2().ceil() as usize;
    Ok(integrate(k, ops, path, |i, u| {
        let mut v = (u - a).powi(-(parts[i] as i32)) * (u - b).powi(-((k - i) as i32));
        for &x in xs {
            v *= (1.0 - b * x) / (one - u * x);
        }
        v
    }))
}

/// G_λ^{(0,b)}(xs) via the column integrand with k ≥ λ_1 integrals.
pub fn G_contour_cols(lambda: &Partition, xs: &[f64], b: f64, k: usize, path: &CirclePath) -> Result<ContourValue> {
    check_k(k)?;
    if lambda.first() > k {
        return Err(Error::InvalidParameter(format!("need λ_1 ≤ k, got λ_1 = {} and k = {k}", lambda.first())));
    }
    for z in [0.0, -b] {
        if path.gap(Complex64::new(z, 0.0)) >= 0.0 {
            return Err(violation(&format!("{z} is not inside the contour")));
        }
    }
    let cols = lambda.conjugate().padded(k);
    let sign = if lambda.size() % 2 == 0 { 1.0 } else { -1.0 };
    let one = Complex64::new(1.0, 0.0);
    let ops = xs.len() + 2 * ((lambda.len() + k) as f64).log2().ceil() as usize;
    let r = integrate(k, ops, path, |i, u| {
        let mut v = u.powi(-1 - (k - 1 - i) as i32) * (u + b).powi(-(cols[i] as i32));
        for &x in xs {
            v *= one - u * x;
        }
        v
    });
    Ok(ContourValue { value: sign * r.value, imag: sign * r.imag, ..r })
}

/// Doubles the node count until the error estimate is below `tol`.
pub fn refine<F>(start: &CirclePath, max_points: usize, tol: f64, eval: F) -> Result<ContourValue>
where
    F: Fn(&CirclePath) -> Result<ContourValue>,
{
    let mut path = start.clone();
    let mut best = eval(&path)?;
    while best.error > tol && path.points * 2 <= max_points {
        path = path.with_points(path.points * 2)?;
        let v = eval(&path)?;
        if v.error < best.error {
            best = v;
        } else if v.error > 4.0 * best.error {
            break;
        }
    }
    Ok(best)
}

fn max_points(k: usize) -> usize {
    match k {
        0 | 1 => 1 << 16,
        2 => 2048,
        _ => 512,
    }
}

/// G_λ^{(0,−p)}(1^N) by quadrature: the row integrand when l(λ) ≤ λ_1,
/// otherwise the column one. Circles centred at p/2 enclose the poles at
/// 0 and p; the gap δ to them is chosen to keep the integrand small relative
/// to the answer, which controls cancellation. Returns (value, error).
pub fn principal(lambda: &Partition, n: usize, p: f64, tol: f64) -> Result<(f64, f64)> {
    if lambda.is_empty() {
        return Ok((1.0, 0.0));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (0,1)")));
    }
    let use_rows = lambda.len() <= lambda.first();
    let k = if use_rows { lambda.len() } else { lambda.first() };
    check_k(k)?;
    let parts = lambda.padded(k);
    let cols = lambda.conjugate().padded(k);
    let nf = n as f64;
    // log |f_i(u)| without the Vandermonde factor
    let logf = |i: usize, u: Complex64| -> f64 {
        if use_rows {
            -(parts[i] as f64) * u.norm().ln() - (k - i) as f64 * (u - p).norm().ln() + nf * ((1.0 - p) / (Complex64::new(1.0, 0.0) - u).norm()).ln()
        } else {
            -((k - i) as f64) * u.norm().ln() - cols[i] as f64 * (u - p).norm().ln() + nf * (Complex64::new(1.0, 0.0) - u).norm().ln()
        }
    };
    let reach = if use_rows { (1.0 - p) / 2.0 } else { 1.0 };
    let mut cands = Vec::new();
    for j in 1..=24 {
        let delta = reach * 0.5f64.powf(j as f64 / 2.0);
        let r = p / 2.0 + delta;
        let probe = CirclePath::new(Complex64::new(p / 2.0, 0.0), r, 256)?;
        let score: f64 = (0..k).map(|i| probe.nodes().iter().map(|&u| logf(i, u)).fold(f64::NEG_INFINITY, f64::max)).sum::<f64>()
            + (k * (k - 1) / 2) as f64 * (2.0 * r).ln()
            + (k as f64) * r.ln();
        // nodes needed for convergence grow like r/δ
        let nodes_needed = 40.0 * r / delta;
        if nodes_needed <= max_points(k) as f64 {
            cands.push((score, r));
        }
    }
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut best: Option<ContourValue> = None;
    for &(_, r) in cands.iter().take(3) {
        let start = CirclePath::new(Complex64::new(p / 2.0, 0.0), r, 64)?;
        let ones = vec![1.0; n];
        let v = if use_rows {
            refine(&start, max_points(k), tol, |c| G_contour_rows(lambda, &ones, 0.0, p, c))?
        } else {
            refine(&start, max_points(k), tol, |c| G_contour_cols(lambda, &ones, -p, k, c))?
        };
        if best.map(|b| v.error < b.error).unwrap_or(true) {
            best = Some(v);
        }
        if v.error <= tol {
            break;
        }
    }
    let b = best.ok_or_else(|| Error::QuadratureNotConverged { estimate: f64::INFINITY, tol })?;
    Ok((b.value, b.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grothendieck::{G_eval, G_principal_branching, GrothendieckParams};
    use crate::scalar::{q, rational_to_f64, Rational};
    use num_traits::One;

    fn circle(c: f64, r: f64, k: usize) -> CirclePath {
        CirclePath::new(Complex64::new(c, 0.0), r, k).unwrap()
    }

    #[test]
    fn path_validation() {
        assert!(CirclePath::new(Complex64::new(0.0, 0.0), 1.0, 100).is_err());
        assert!(CirclePath::new(Complex64::new(0.0, 0.0), -1.0, 64).is_err());
    }

    #[test]
    fn rows_one_box() {
        let (x1, x2, p) = (0.3, -0.4, 0.25);
        let v = G_contour_rows(&Partition::from_slice(&[1]), &[x1, x2], 0.0, p, &circle(0.1, 0.6, 256)).unwrap();
        assert!((v.value - (x1 + x2 - p * x1 * x2)).abs() < 1e-10, "{v:?}");
        assert!(v.error < 1e-10);
        let e = G_contour_rows(&Partition::empty(), &[x1], 0.0, p, &circle(0.1, 0.6, 64)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_match_exact() {
        let lam = Partition::from_slice(&[2, 1]);
        let exact = G_eval(&lam, &[q(1, 3), q(1, 4)], &GrothendieckParams::tasep(q(1, 2))).unwrap();
        let v = G_contour_rows(&lam, &[1.0 / 3.0, 0.25], 0.0, 0.5, &circle(0.25, 1.0, 256)).unwrap();
        assert!((v.value - rational_to_f64(&exact)).abs() < 1e-8);
    }

    #[test]
    fn cols_small_cases() {
        let p = 0.3;
        let v = G_contour_cols(&Partition::from_slice(&[1]), &[0.7], -p, 1, &circle(0.15, 0.4, 128)).unwrap();
        assert!((v.value - 0.7).abs() < 1e-12);
        let e = G_contour_cols(&Partition::empty(), &[0.7], -p, 1, &circle(0.15, 0.4, 128)).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let lam = Partition::from_slice(&[1, 1, 1]);
        let exact = G_principal_branching(&lam, 4, Rational::one() - q(3, 10));
        let v = G_contour_cols(&lam, &[1.0; 4], -p, 1, &circle(0.15, 0.4, 256)).unwrap();
        assert!((v.value - rational_to_f64(&exact)).abs() < 1e-8);
    }

    #[test]
    fn violations() {
        let lam = Partition::from_slice(&[1]);
        let r = G_contour_rows(&lam, &[0.5], 0.0, 0.3, &circle(0.0, 2.5, 64));
        assert!(matches!(r, Err(Error::ContourViolation(_))));
        let r = G_contour_cols(&lam, &[0.5], -0.3, 1, &circle(0.0, 0.1, 64));
        assert!(matches!(r, Err(Error::ContourViolation(_))));
    }

    #[test]
    fn radius_independence() {
        let lam = Partition::from_slice(&[2, 1]);
        let xs = [0.2, 0.3, -0.1];
        let a = G_contour_rows(&lam, &xs, 0.1, 0.2, &circle(0.0, 0.5, 512)).unwrap();
        let b = G_contour_rows(&lam, &xs, 0.1, 0.2, &circle(0.0, 1.0, 512)).unwrap();
        assert!((a.value - b.value).abs() < 1e-9);
    }

    #[test]
    fn principal_auto() {
        for lam in [vec![1], vec![2, 1], vec![1, 1, 1], vec![3, 1]] {
            let lam = Partition::from_slice(&lam);
            for n in [3usize, 20, 200] {
                let exact = rational_to_f64(&G_principal_branching(&lam, n, Rational::one() - q(1, 3)));
                let (v, err) = principal(&lam, n, 1.0 / 3.0, 1e-12 * exact).unwrap();
                assert!((v - exact).abs() <= err.max(1e-9 * exact), "{lam} {n}: {v} vs {exact} ± {err}");
                assert!(err <= 1e-8 * exact, "{lam} {n}: err {err}");
            }
        }
    }
}
