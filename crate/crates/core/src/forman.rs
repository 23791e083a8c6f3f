//! Forman subdivision and topological orthogonality.
//!
//! The `p`-cells of the subdivision `K` of a mesh `M` are the intervals
//! `[a, b]` of the face poset of `M` with `dim b - dim a = p`. Every cell of
//! `K` is combinatorially a cube, which is what the cup product and the
//! diagonal inner products rely on.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::complex::{CellComplex, CellId, Incidence, Sign};
use crate::error::{CmcError, Result};

/// Cell `[lower, upper]` of a Forman subdivision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntervalCell {
    pub lower: CellId,
    pub upper: CellId,
}

impl IntervalCell {
    pub fn dim(&self) -> usize {
        self.upper.dim - self.lower.dim
    }
}

/// `left ⊥_enclosing right` with the relative orthogonal orientation `sign`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrthogonalPair {
    pub enclosing: CellId,
    pub left: CellId,
    pub right: CellId,
    pub sign: Sign,
    pub pivot: usize,
}

/// A quasi-cubical complex with its orthogonal-pair index.
#[derive(Clone, Debug)]
pub struct QuasiCubicalMesh {
    complex: CellComplex,
    intervals: Option<Vec<Vec<IntervalCell>>>,
    parent: Option<CellComplex>,
    nodes: Vec<Vec<Vec<usize>>>,
    // orth[dim a][a][p]: pairs splitting a into a p-cell and a (dim a - p)-cell
    orth: Vec<Vec<Vec<Vec<OrthogonalPair>>>>,
}

/// Fails on the first cell of `m` that is not a simple polytope.
pub fn check_simple_cells(m: &CellComplex) -> Result<()> {
    for p in 2..=m.dim() {
        for a in 0..m.count(p) {
            let cell = CellId::new(p, a);
            let closure = m.closure(cell);
            let mut degree: BTreeMap<usize, usize> = closure[0].iter().map(|&n| (n, 0)).collect();
            for &e in &closure[1] {
                for &(n, _) in m.faces(CellId::new(1, e)) {
                    *degree.get_mut(&n).expect("closed") += 1;
                }
            }
            if degree.values().any(|&k| k != p) {
                return Err(CmcError::NonSimpleCell(cell));
            }
        }
    }
    Ok(())
}

/// Builds the Forman subdivision of a validated mesh of simple polytopes.
///
/// Cells of each dimension are ordered by `(dim lower, lower index, upper index)`.
/// Edges `[a, b]` run from `[a, a]` to `[b, b]`; higher cells are oriented by
/// propagating the diamond constraints, then top cells are made compatible.
pub fn forman_subdivide(m: &CellComplex) -> Result<QuasiCubicalMesh> {
    let report = m.validate();
    if !report.is_valid() {
        return Err(CmcError::InvalidMesh(report));
    }
    check_simple_cells(m)?;
    let d = m.dim();

    let closures: Vec<Vec<Vec<Vec<usize>>>> = (0..=d)
        .map(|p| (0..m.count(p)).map(|i| m.closure(CellId::new(p, i))).collect())
        .collect();

    let mut intervals: Vec<Vec<IntervalCell>> = vec![Vec::new(); d + 1];
    for (ud, level) in closures.iter().enumerate() {
        for (ui, closure) in level.iter().enumerate() {
            for (ld, lowers) in closure.iter().enumerate() {
                for &li in lowers {
                    intervals[ud - ld].push(IntervalCell {
                        lower: CellId::new(ld, li),
                        upper: CellId::new(ud, ui),
                    });
                }
            }
        }
    }
    for level in &mut intervals {
        level.sort_by_key(|c| (c.lower.dim, c.lower.index, c.upper.index));
    }
    let index: Vec<HashMap<IntervalCell, usize>> = intervals
        .iter()
        .map(|level| level.iter().enumerate().map(|(i, c)| (*c, i)).collect())
        .collect();

    let mut faces: Vec<Vec<Incidence>> = vec![vec![Vec::new(); intervals[0].len()]];
    for p in 1..=d {
        let mut level = Vec::with_capacity(intervals[p].len());
        for (x, cell) in intervals[p].iter().enumerate() {
            let (a, b) = (cell.lower, cell.upper);
            // (hyperface, +1 when the lower end was raised)
            let mut hyper: Vec<(usize, Sign)> = Vec::with_capacity(2 * p);
            for &(a2, _) in m.cofaces(a) {
                if closures[b.dim][b.index][a.dim + 1].binary_search(&a2).is_ok() {
                    let y = IntervalCell { lower: CellId::new(a.dim + 1, a2), upper: b };
                    hyper.push((index[p - 1][&y], 1));
                }
            }
            for &(b2, _) in m.faces(b) {
                if closures[b.dim - 1][b2][a.dim].binary_search(&a.index).is_ok() {
                    let y = IntervalCell { lower: a, upper: CellId::new(b.dim - 1, b2) };
                    hyper.push((index[p - 1][&y], -1));
                }
            }
            let kcell = CellId::new(p, x);
            if hyper.len() != 2 * p {
                return Err(CmcError::NotQuasiCubical(
                    kcell,
                    format!("{} hyperfaces instead of {}", hyper.len(), 2 * p),
                ));
            }
            if p >= 2 {
                let hf: Vec<usize> = hyper.iter().map(|h| h.0).collect();
                let signs = diamond_signs(kcell, &hf, &faces[p - 1])?;
                hyper = hf.into_iter().zip(signs).collect();
            }
            level.push(hyper);
        }
        faces.push(level);
    }

    let counts = intervals.iter().map(Vec::len).collect();
    let mut k = CellComplex::new(counts, faces)?.orient_top_cells()?;
    for (name, cells) in m.labels() {
        let carried = (0..=d)
            .map(|p| {
                intervals[p]
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| {
                        cells.get(c.upper.dim).is_some_and(|l| l.binary_search(&c.upper.index).is_ok())
                    })
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        k.set_label(name.clone(), carried)?;
    }
    let mut mesh = QuasiCubicalMesh::from_complex(k)?;
    mesh.intervals = Some(intervals);
    mesh.parent = Some(m.clone());
    Ok(mesh)
}

/// Orientation signs of the hyperfaces `hf` of one cell such that `∂∂ = 0` on it.
/// `lower` holds the already-signed hyperfaces of the level below.
fn diamond_signs(cell: CellId, hf: &[usize], lower: &[Incidence]) -> Result<Vec<Sign>> {
    let mut through: BTreeMap<usize, Vec<(usize, Sign)>> = BTreeMap::new();
    for (i, &y) in hf.iter().enumerate() {
        for &(z, e) in &lower[y] {
            through.entry(z).or_default().push((i, e));
        }
    }
    let mut adj: Vec<Vec<(usize, Sign)>> = vec![Vec::new(); hf.len()];
    for (z, list) in &through {
        if list.len() != 2 {
            return Err(CmcError::NotQuasiCubical(
                cell,
                format!("{} cells between it and subface {z}", list.len()),
            ));
        }
        let (i, ei) = list[0];
        let (j, ej) = list[1];
        let factor = -ei * ej;
        adj[i].push((j, factor));
        adj[j].push((i, factor));
    }
    let mut signs: Vec<Option<Sign>> = vec![None; hf.len()];
    signs[0] = Some(1);
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        let si = signs[i].expect("visited");
        for &(j, factor) in &adj[i] {
            let sj = si * factor;
            match signs[j] {
                None => {
                    signs[j] = Some(sj);
                    queue.push_back(j);
                }
                Some(s) if s != sj => {
                    return Err(CmcError::NotQuasiCubical(cell, "contradictory diamond signs".into()))
                }
                Some(_) => {}
            }
        }
    }
    signs
        .into_iter()
        .map(|s| s.ok_or_else(|| CmcError::NotQuasiCubical(cell, "disconnected boundary".into())))
        .collect()
}

impl QuasiCubicalMesh {
    /// Wraps a complex already known to be quasi-cubical (checked structurally)
    /// and builds the orthogonal-pair index.
    pub fn from_complex(complex: CellComplex) -> Result<Self> {
        let d = complex.dim();
        if d > 3 {
            return Err(CmcError::UnsupportedDimension(format!(
                "orthogonal orientations are implemented for D ≤ 3, got D = {d}"
            )));
        }
        let mut nodes: Vec<Vec<Vec<usize>>> = vec![(0..complex.count(0)).map(|i| vec![i]).collect()];
        for p in 1..=d {
            let level: Vec<Vec<usize>> = complex
                .faces_of_dim(p)
                .iter()
                .map(|list| {
                    let mut ns: Vec<usize> =
                        list.iter().flat_map(|&(b, _)| nodes[p - 1][b].iter().copied()).collect();
                    ns.sort_unstable();
                    ns.dedup();
                    ns
                })
                .collect();
            for (i, ns) in level.iter().enumerate() {
                let cell = CellId::new(p, i);
                if ns.len() != 1 << p {
                    return Err(CmcError::NotQuasiCubical(cell, format!("{} nodes", ns.len())));
                }
                if complex.faces(cell).len() != 2 * p {
                    return Err(CmcError::NotQuasiCubical(
                        cell,
                        format!("{} hyperfaces", complex.faces(cell).len()),
                    ));
                }
            }
            nodes.push(level);
        }
        let mut mesh = Self { complex, intervals: None, parent: None, nodes, orth: Vec::new() };
        mesh.orth = mesh.build_orth_index()?;
        Ok(mesh)
    }

    fn build_orth_index(&self) -> Result<Vec<Vec<Vec<Vec<OrthogonalPair>>>>> {
        let d = self.dim();
        let mut orth = Vec::with_capacity(d + 1);
        for n in 0..=d {
            let mut level = Vec::with_capacity(self.complex.count(n));
            for a in 0..self.complex.count(n) {
                let enclosing = CellId::new(n, a);
                let closure = self.complex.closure(enclosing);
                let mut splits = Vec::with_capacity(n + 1);
                for p in 0..=n {
                    let q = n - p;
                    let mut pairs = Vec::new();
                    for &b in &closure[p] {
                        for &c in &closure[q] {
                            let (left, right) = (CellId::new(p, b), CellId::new(q, c));
                            if let Some(pivot) = single_common(self.nodes_of(left), self.nodes_of(right)) {
                                let sign = self.orthogonal_sign(enclosing, left, right, pivot)?;
                                pairs.push(OrthogonalPair { enclosing, left, right, sign, pivot });
                            }
                        }
                    }
                    splits.push(pairs);
                }
                level.push(splits);
            }
            orth.push(level);
        }
        Ok(orth)
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    pub fn count(&self, p: usize) -> usize {
        self.complex.count(p)
    }

    /// Interval description of every cell, present when built by subdivision.
    pub fn intervals(&self) -> Option<&[Vec<IntervalCell>]> {
        self.intervals.as_deref()
    }

    pub fn interval(&self, cell: CellId) -> Option<IntervalCell> {
        self.intervals.as_ref().map(|iv| iv[cell.dim][cell.index])
    }

    /// The subdivided mesh `M`, present when built by subdivision.
    pub fn parent(&self) -> Option<&CellComplex> {
        self.parent.as_ref()
    }

    /// Sorted nodes of a cell.
    pub fn nodes_of(&self, cell: CellId) -> &[usize] {
        &self.nodes[cell.dim][cell.index]
    }

    pub fn set_label(&mut self, name: impl Into<String>, cells: Vec<Vec<usize>>) -> Result<()> {
        self.complex.set_label(name, cells)
    }

    /// All ordered pairs `(b, c)` with `b ⊥_a c`, `dim b = p`, `dim c = q`.
    pub fn orthogonal_pairs(&self, a: CellId, p: usize, q: usize) -> Result<&[OrthogonalPair]> {
        if p + q != a.dim || a.dim > self.dim() || a.index >= self.count(a.dim) {
            return Err(CmcError::DimensionMismatch(format!(
                "split ({p}, {q}) of {a} in a {}-dimensional mesh",
                self.dim()
            )));
        }
        Ok(&self.orth[a.dim][a.index][p])
    }

    /// Relative orthogonal orientation `ε⊥(a, b, c)`.
    pub fn relative_orthogonal_orientation(&self, a: CellId, b: CellId, c: CellId) -> Result<Sign> {
        if b.dim + c.dim != a.dim {
            return Err(CmcError::DimensionMismatch(format!("{b} and {c} do not split {a}")));
        }
        let closure = self.complex.closure(a);
        let inside = |x: CellId| closure[x.dim].binary_search(&x.index).is_ok();
        if !inside(b) || !inside(c) {
            return Err(CmcError::NotOrthogonal(format!("{b} and {c} must both be subfaces of {a}")));
        }
        let pivot = single_common(self.nodes_of(b), self.nodes_of(c))
            .ok_or_else(|| CmcError::NotOrthogonal(format!("{b} and {c} do not share exactly one node")))?;
        self.orthogonal_sign(a, b, c, pivot)
    }

    fn orthogonal_sign(&self, a: CellId, b: CellId, c: CellId, pivot: usize) -> Result<Sign> {
        let (p, q) = (b.dim, c.dim);
        let eps = |x: CellId, y: usize| {
            self.complex.sign(x, y).ok_or_else(|| {
                CmcError::NotOrthogonal(format!("{} is not a hyperface of {x}", CellId::new(x.dim - 1, y)))
            })
        };
        if p == 0 || q == 0 {
            Ok(1)
        } else if p == 1 {
            Ok(eps(a, c.index)? * eps(b, pivot)?)
        } else if q == 1 {
            let parity: Sign = if p % 2 == 0 { 1 } else { -1 };
            Ok(parity * eps(a, b.index)? * eps(c, pivot)?)
        } else {
            Err(CmcError::UnsupportedDimension(format!(
                "relative orthogonal orientation for the split ({p}, {q})"
            )))
        }
    }

    /// Reverses the orientation of every top cell.
    pub fn flip_top_cells(&self) -> Result<Self> {
        let mut out = Self {
            complex: self.complex.flip_top_cells(),
            intervals: self.intervals.clone(),
            parent: self.parent.clone(),
            nodes: self.nodes.clone(),
            orth: Vec::new(),
        };
        out.orth = out.build_orth_index()?;
        Ok(out)
    }
}

fn single_common(x: &[usize], y: &[usize]) -> Option<usize> {
    let (mut i, mut j) = (0, 0);
    let mut found = None;
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if found.is_some() {
                    return None;
                }
                found = Some(x[i]);
                i += 1;
                j += 1;
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn segment() -> CellComplex {
        CellComplex::new(vec![2, 1], vec![vec![vec![], vec![]], vec![vec![(0, -1), (1, 1)]]]).unwrap()
    }

    /// A single polygon with `n` sides, counterclockwise.
    pub(crate) fn polygon(n: usize) -> CellComplex {
        let edges = (0..n).map(|i| vec![(i, -1), ((i + 1) % n, 1)]).collect();
        let face = vec![(0..n).map(|i| (i, 1)).collect()];
        CellComplex::new(vec![n, n, 1], vec![vec![vec![]; n], edges, face]).unwrap()
    }

    #[test]
    fn interval_counts() {
        let k = forman_subdivide(&segment()).unwrap();
        assert_eq!(k.complex().counts(), &[3, 2]);
        let k = forman_subdivide(&polygon(4)).unwrap();
        assert_eq!(k.complex().counts(), &[9, 12, 4]);
        let k = forman_subdivide(&polygon(3)).unwrap();
        assert_eq!(k.complex().counts(), &[7, 9, 3]);
        assert!(k.complex().validate().is_valid());
        assert!(k.complex().check_compatible_orientation().compatible);
    }

    #[test]
    fn edge_orientation_runs_from_lower_to_upper() {
        let k = forman_subdivide(&polygon(4)).unwrap();
        let iv = k.intervals().unwrap();
        assert_eq!(iv[0][8].upper, CellId::new(2, 0));
        for (x, cell) in iv[1].iter().enumerate() {
            let head = iv[0].iter().position(|c| c.lower == cell.upper).unwrap();
            let tail = iv[0].iter().position(|c| c.lower == cell.lower).unwrap();
            let faces = k.complex().faces(CellId::new(1, x));
            assert!(faces.contains(&(head, 1)) && faces.contains(&(tail, -1)));
        }
    }

    #[test]
    fn pair_counts_on_a_square() {
        let k = forman_subdivide(&polygon(4)).unwrap();
        let a = CellId::new(2, 0);
        assert_eq!(k.orthogonal_pairs(a, 0, 2).unwrap().len(), 4);
        assert!(k.orthogonal_pairs(a, 0, 2).unwrap().iter().all(|p| p.sign == 1));
        assert_eq!(k.orthogonal_pairs(a, 1, 1).unwrap().len(), 8);
        assert!(k.orthogonal_pairs(a, 1, 2).is_err());
    }

    #[test]
    fn non_simple_cell_is_rejected() {
        // square pyramid: apex node 4 has four edges in a 3-cell
        let edges: Vec<(usize, usize)> = vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (1, 4), (2, 4), (3, 4)];
        let e_faces = edges.iter().map(|&(t, h)| vec![(t, -1), (h, 1)]).collect();
        let base = vec![(0, 1), (1, 1), (2, 1), (3, 1)];
        let tri = |e0: usize, s1: usize, s2: usize| vec![(e0, 1), (s1, 1), (s2, -1)];
        let f = vec![base, tri(0, 5, 4), tri(1, 6, 5), tri(2, 7, 6), tri(3, 4, 7)];
        let cell = vec![vec![(0, -1), (1, 1), (2, 1), (3, 1), (4, 1)]];
        let m = CellComplex::new(vec![5, 8, 5, 1], vec![vec![vec![]; 5], e_faces, f, cell]).unwrap();
        assert!(m.validate().is_valid());
        assert!(matches!(forman_subdivide(&m), Err(CmcError::NonSimpleCell(c)) if c == CellId::new(3, 0)));
    }
}
