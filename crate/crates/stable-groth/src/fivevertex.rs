//! Five-vertex configurations on finite windows of the quadrant.
//!
//! Vertex (i, j) sits in column i ≥ 1 and row j ≥ 1. Its incoming edges are
//! the horizontal edge from (i−1, j) and the vertical edge from (i, j−1);
//! the outgoing ones lead to (i+1, j) and (i, j+1). Paths travel up and
//! right and never pass straight up through a vertex.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GraphPath;
use crate::grothendieck::G_principal_branching;
use crate::partitions::{down_set, interlacing_below, Partition};
use crate::scalar::Rational;

/// The five admissible local states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexState {
    /// both incoming and both outgoing edges filled, weight 1
    Full,
    /// bottom → right, weight 1
    BottomRight,
    /// left → top, weight 1−p
    LeftTop,
    /// left → right, weight p
    Horizontal,
    /// no edges, weight 1
    Empty,
}

impl VertexState {
    /// Classifies the occupation (left, bottom, right, top).
    pub fn from_edges(left: bool, bottom: bool, right: bool, top: bool) -> Option<Self> {
        match (left, bottom, right, top) {
            (true, true, true, true) => Some(VertexState::Full),
            (false, true, true, false) => Some(VertexState::BottomRight),
            (true, false, false, true) => Some(VertexState::LeftTop),
            (true, false, true, false) => Some(VertexState::Horizontal),
            (false, false, false, false) => Some(VertexState::Empty),
            _ => None,
        }
    }

    pub fn weight(&self, p: &Rational) -> Rational {
        match self {
            VertexState::LeftTop => Rational::one() - p,
            VertexState::Horizontal => p.clone(),
            _ => Rational::one(),
        }
    }
}

/// Edge occupations on rows 1..=rows and columns 1..=width.
///
/// `horiz[j][i]` is the edge entering column i+1 in row j+1 from the left
/// (index 0 is the left boundary, index `width` the right boundary);
/// `vert[j][i]` is the edge entering row j+1 in column i+1 from below
/// (index 0 is the bottom boundary, index `rows` the top boundary).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiveVertexConfig {
    pub rows: usize,
    pub width: usize,
    pub horiz: Vec<Vec<bool>>,
    pub vert: Vec<Vec<bool>>,
}

impl FiveVertexConfig {
    pub fn empty(rows: usize, width: usize) -> Self {
        FiveVertexConfig { rows, width, horiz: vec![vec![false; width + 1]; rows], vert: vec![vec![false; width]; rows + 1] }
    }

    /// State at column i, row j (both 1-based).
    pub fn state(&self, i: usize, j: usize) -> Option<VertexState> {
        let (c, r) = (i - 1, j - 1);
        VertexState::from_edges(self.horiz[r][c], self.vert[r][c], self.horiz[r][c + 1], self.vert[r + 1][c])
    }

    /// True when every vertex is one of the five states.
    pub fn is_valid(&self) -> bool {
        (1..=self.rows).all(|j| (1..=self.width).all(|i| self.state(i, j).is_some()))
    }

    /// Product of the vertex weights, or `None` if some vertex is invalid.
    pub fn weight(&self, p: &Rational) -> Option<Rational> {
        let mut w = Rational::one();
        for j in 1..=self.rows {
            for i in 1..=self.width {
                w *= self.state(i, j)?.weight(p);
            }
        }
        Some(w)
    }

    /// Domain-wall: every left boundary edge filled and every bottom one empty.
    pub fn is_domain_wall(&self) -> bool {
        self.horiz.iter().all(|r| r[0]) && self.vert[0].iter().all(|&b| !b)
    }

    /// Columns of the filled vertical edges above row j.
    pub fn filled_above(&self, j: usize) -> Vec<usize> {
        (1..=self.width).filter(|&i| self.vert[j][i - 1]).collect()
    }
}

/// Boundary data of a single row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowBoundary {
    pub left: bool,
    pub right: bool,
    /// filled columns entering from below
    pub bottom: Vec<usize>,
    /// filled columns leaving at the top
    pub top: Vec<usize>,
}

impl RowBoundary {
    /// The boundary of Z_{n,λ/μ}.
    pub fn skew(n: usize, lambda: &Partition, mu: &Partition) -> Self {
        RowBoundary {
            left: true,
            right: false,
            bottom: (1..n).map(|i| mu.part(i) + n - i).collect(),
            top: (1..=n).map(|i| lambda.part(i) + n + 1 - i).collect(),
        }
    }

    fn fits(&self, width: usize) -> bool {
        self.bottom.iter().chain(&self.top).all(|&c| c >= 1 && c <= width)
    }
}

fn row_config(b: &RowBoundary, width: usize, horiz: Vec<bool>) -> FiveVertexConfig {
    let mut cfg = FiveVertexConfig::empty(1, width);
    cfg.horiz[0] = horiz;
    for &c in &b.bottom {
        cfg.vert[0][c - 1] = true;
    }
    for &c in &b.top {
        cfg.vert[1][c - 1] = true;
    }
    cfg
}

/// Every admissible configuration of one row with the given boundary, by
/// brute force over the internal horizontal edges.
pub fn enumerate_row_configs(b: &RowBoundary, width: usize) -> Result<Vec<FiveVertexConfig>> {
    if width > 20 {
        return Err(Error::InvalidParameter(format!("brute force over width {width} is too large")));
    }
    if !b.fits(width) {
        return Err(Error::WindowOverflow { need: b.bottom.iter().chain(&b.top).copied().max().unwrap_or(0), have: width });
    }
    let internal = width.saturating_sub(1);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << internal) {
        let mut horiz = vec![false; width + 1];
        horiz[0] = b.left;
        horiz[width] = b.right;
        for k in 0..internal {
            horiz[k + 1] = mask >> k & 1 == 1;
        }
        let cfg = row_config(b, width, horiz);
        if cfg.is_valid() {
            out.push(cfg);
        }
    }
    Ok(out)
}

/// The unique row configuration with the given boundary, if any; the
/// horizontal edges follow from conservation at each vertex.
pub fn build_row(b: &RowBoundary, width: usize) -> Result<Option<FiveVertexConfig>> {
    if !b.fits(width) {
        return Err(Error::WindowOverflow { need: b.bottom.iter().chain(&b.top).copied().max().unwrap_or(0), have: width });
    }
    let mut horiz = vec![false; width + 1];
    horiz[0] = b.left;
    let mut flow: i64 = b.left as i64;
    for i in 1..=width {
        flow += b.bottom.contains(&i) as i64 - b.top.contains(&i) as i64;
        if !(0..=1).contains(&flow) {
            return Ok(None);
        }
        horiz[i] = flow == 1;
    }
    if horiz[width] != b.right {
        return Ok(None);
    }
    let cfg = row_config(b, width, horiz);
    Ok(if cfg.is_valid() { Some(cfg) } else { None })
}

/// Z_{n,λ/μ} from the lattice construction.
pub fn row_partition_function(n: usize, lambda: &Partition, mu: &Partition, p: &Rational) -> Result<Rational> {
    if n == 0 || lambda.len() > n || mu.len() + 1 > n {
        return Err(Error::InvalidParameter(format!("need l(λ) ≤ n and l(μ) ≤ n−1 with n = {n}")));
    }
    let width = lambda.first().max(mu.first()) + n;
    let b = RowBoundary::skew(n, lambda, mu);
    Ok(build_row(&b, width)?.and_then(|c| c.weight(p)).unwrap_or_else(Rational::zero))
}

/// Z_{[1;n],λ}: both the sum over intermediate shapes of products of row
/// partition functions and the closed form through G_λ(1^n).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPartitionFunction {
    pub branching: Rational,
    pub closed_form: Rational,
}

pub fn block_partition_function(n: usize, lambda: &Partition, p: &Rational) -> Result<BlockPartitionFunction> {
    if lambda.len() > n {
        return Err(Error::InvalidParameter(format!("l({lambda}) exceeds n = {n}")));
    }
    let shapes = down_set(lambda);
    let mut cur: HashMap<Partition, Rational> = HashMap::from([(Partition::empty(), Rational::one())]);
    for row in 1..=n {
        let mut next = HashMap::new();
        for nu in shapes.iter().filter(|s| s.len() <= row) {
            let mut acc = Rational::zero();
            for mu in interlacing_below(nu) {
                if let Some(v) = cur.get(&mu) {
                    acc += row_partition_function(row, nu, &mu, p)? * v;
                }
            }
            if !acc.is_zero() {
                next.insert(nu.clone(), acc);
            }
        }
        cur = next;
    }
    let branching = cur.remove(lambda).unwrap_or_else(Rational::zero);
    let closed_form = num_traits::pow(Rational::one() - p, n) * num_traits::pow(p.clone(), lambda.size()) * G_principal_branching(lambda, n, Rational::one() - p);
    Ok(BlockPartitionFunction { branching, closed_form })
}

/// Columns where path i (1-based) goes up from row j to row j+1.
fn path_column(t: &GraphPath, i: usize, j: usize) -> usize {
    t.steps[j].part(i) + j + 1 - i
}

/// The configuration σ(t) on rows 1..N: path i enters row i from the left
/// and rises from row j at column t^{(j)}_i + j + 1 − i.
pub fn path_to_config(t: &GraphPath, width: usize) -> Result<FiveVertexConfig> {
    let n = t.len();
    let need = (1..=n).map(|j| t.steps[j].first() + j + 1).max().unwrap_or(0);
    if width < need {
        return Err(Error::WindowOverflow { need, have: width });
    }
    let mut cfg = FiveVertexConfig::empty(n, width);
    for j in 1..=n {
        for i in 1..=j {
            let up = path_column(t, i, j);
            let start = if i == j { 1 } else { path_column(t, i, j - 1) + 1 };
            // horizontal edges entering columns start..=up
            for c in start..=up {
                cfg.horiz[j - 1][c - 1] = true;
            }
            cfg.vert[j][up - 1] = true;
        }
    }
    Ok(cfg)
}

/// Colours used by [`render_svg`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorScheme {
    pub weight_p: String,
    pub weight_one_minus_p: String,
    pub weight_one: String,
    pub path: String,
    pub grid: String,
}

impl Default for ColorScheme {
    fn default() -> Self {
        ColorScheme {
            weight_p: "#1f4fd1".into(),
            weight_one_minus_p: "#d12a1f".into(),
            weight_one: "#1f9d3a".into(),
            path: "#000000".into(),
            grid: "#cccccc".into(),
        }
    }
}

const CELL: usize = 20;

/// Deterministic SVG 1.1 drawing: grid, filled edges, and coloured vertices.
pub fn render_svg(cfg: &FiveVertexConfig, colors: &ColorScheme) -> String {
    let (w, h) = ((cfg.width + 1) * CELL, (cfg.rows + 1) * CELL);
    let x = |i: usize| i * CELL;
    let y = |j: usize| h - j * CELL;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g stroke="{}" stroke-width="1" stroke-dasharray="2,2">"#, colors.grid);
    for i in 1..=cfg.width {
        let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, x(i), y(0), x(i), y(cfg.rows + 1) + CELL / 2);
    }
    for j in 1..=cfg.rows {
        let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, 0, y(j), w, y(j));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g stroke="{}" stroke-width="3" stroke-linecap="round">"#, colors.path);
    for j in 1..=cfg.rows {
        for i in 0..=cfg.width {
            if cfg.horiz[j - 1][i] {
                let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, x(i), y(j), x(i + 1), y(j));
            }
        }
    }
    for j in 0..=cfg.rows {
        for i in 1..=cfg.width {
            if cfg.vert[j][i - 1] {
                let _ = writeln!(s, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, x(i), y(j), x(i), y(j + 1));
            }
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "<g>");
    for j in 1..=cfg.rows {
        for i in 1..=cfg.width {
            let fill = match cfg.state(i, j) {
                Some(VertexState::Horizontal) => &colors.weight_p,
                Some(VertexState::LeftTop) => &colors.weight_one_minus_p,
                Some(VertexState::Full) | Some(VertexState::BottomRight) => &colors.weight_one,
                _ => continue,
            };
            let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="5" fill="{fill}"/>"#, x(i), y(j));
        }
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grothendieck::{G_skew_one, GrothendieckParams};
    use crate::scalar::{q, qi};

    fn p(v: &[usize]) -> Partition {
        Partition::from_slice(v)
    }

    #[test]
    fn figure_row() {
        let pp = q(1, 2);
        let z = row_partition_function(3, &p(&[4, 3, 2]), &p(&[4, 2]), &pp).unwrap();
        assert_eq!(z, q(1, 32));
        let z = row_partition_function(1, &Partition::empty(), &Partition::empty(), &pp).unwrap();
        assert_eq!(z, q(1, 2));
        let z = row_partition_function(2, &p(&[1, 1]), &p(&[2]), &pp).unwrap();
        assert_eq!(z, qi(0));
        let b = RowBoundary::skew(3, &p(&[4, 3, 2]), &p(&[4, 2]));
        assert_eq!(enumerate_row_configs(&b, 7).unwrap().len(), 1);
    }

    #[test]
    fn row_formula_small() {
        let pp = q(2, 7);
        let par = GrothendieckParams::tasep(pp.clone());
        for lam in crate::partitions::partitions_up_to(7, 3) {
            for n in lam.len().max(1)..=3 {
                for mu in down_set(&lam).into_iter().filter(|m| m.len() < n) {
                    let z = row_partition_function(n, &lam, &mu, &pp).unwrap();
                    let g = G_skew_one(&lam, &mu, &qi(1), &par).unwrap();
                    let expect = (Rational::one() - &pp) * num_traits::pow(pp.clone(), lam.size() - mu.size()) * g;
                    assert_eq!(z, expect, "{lam}/{mu} row {n}");
                }
            }
        }
    }

    #[test]
    fn block_examples() {
        let pp = q(1, 3);
        let b = block_partition_function(1, &Partition::empty(), &pp).unwrap();
        assert_eq!(b.branching, q(2, 3));
        let b = block_partition_function(2, &p(&[1]), &pp).unwrap();
        let expect = num_traits::pow(q(2, 3), 2) * &pp * (qi(2) - &pp);
        assert_eq!(b.branching, expect);
        assert_eq!(b.closed_form, expect);
    }

    #[test]
    fn figure_path_config() {
        let steps = vec![p(&[]), p(&[2]), p(&[3, 1]), p(&[5, 1]), p(&[5, 1]), p(&[5, 3])];
        let t = GraphPath::new(steps).unwrap();
        let cfg = path_to_config(&t, 11).unwrap();
        assert!(cfg.is_valid() && cfg.is_domain_wall());
        // top of row 5 in the figure: columns 10, 7, 3, 2, 1
        assert_eq!(cfg.filled_above(5), vec![1, 2, 3, 7, 10]);
        assert_eq!(cfg.filled_above(1), vec![3]);
        for j in 1..=5 {
            assert_eq!(cfg.filled_above(j).len(), j);
        }
        let svg = render_svg(&cfg, &ColorScheme::default());
        assert_eq!(svg, render_svg(&cfg, &ColorScheme::default()));
        assert!(svg.starts_with("<?xml") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn window_too_small() {
        let t = GraphPath::new(vec![p(&[]), p(&[2])]).unwrap();
        assert!(matches!(path_to_config(&t, 2), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn empty_render() {
        let svg = render_svg(&FiveVertexConfig::empty(0, 0), &ColorScheme::default());
        assert!(svg.contains("<svg") && !svg.contains("<circle"));
    }
}
