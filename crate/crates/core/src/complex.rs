//! Intrinsic cell complexes.
//!
//! A [`CellComplex`] is a graded poset stored only through its cell to
//! hyperface incidence, each pair carrying a relative orientation
//! `ε(a, b) ∈ {-1, +1}`. Coface lists, closures and boundary sub-meshes
//! are derived from that single datum.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{CmcError, Result};

/// Relative orientation of a cell-hyperface pair, always `-1` or `+1`.
pub type Sign = i8;

/// Signed hyperface list of one cell: `(hyperface index, ε)`.
pub type Incidence = Vec<(usize, Sign)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId {
    pub dim: usize,
    pub index: usize,
}

impl CellId {
    pub fn new(dim: usize, index: usize) -> Self {
        Self { dim, index }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-cell #{}", self.dim, self.index)
    }
}

macro_rules! graded_vector {
    ($name:ident, $doc:literal) => {
        #[doc = $doc]
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            dim: usize,
            values: Vec<f64>,
        }

        impl $name {
            pub fn new(dim: usize, values: Vec<f64>) -> Self {
                Self { dim, values }
            }

            pub fn zeros(dim: usize, len: usize) -> Self {
                Self::new(dim, vec![0.0; len])
            }

            pub fn constant(dim: usize, len: usize, value: f64) -> Self {
                Self::new(dim, vec![value; len])
            }

            /// The basis element of cell `index`.
            pub fn basis(dim: usize, len: usize, index: usize) -> Self {
                let mut values = vec![0.0; len];
                values[index] = 1.0;
                Self::new(dim, values)
            }

            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn values(&self) -> &[f64] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [f64] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }

            pub fn scaled(&self, factor: f64) -> Self {
                Self::new(self.dim, self.values.iter().map(|v| v * factor).collect())
            }

            pub fn norm(&self) -> f64 {
                self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
            }

            pub fn max_abs(&self) -> f64 {
                self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
            }

            fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
                assert_eq!(self.dim, other.dim, "degree mismatch");
                assert_eq!(self.len(), other.len(), "length mismatch");
                Self::new(
                    self.dim,
                    self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect(),
                )
            }
        }

        impl Add for &$name {
            type Output = $name;
            fn add(self, rhs: Self) -> $name {
                self.zip_with(rhs, |a, b| a + b)
            }
        }

        impl Sub for &$name {
            type Output = $name;
            fn sub(self, rhs: Self) -> $name {
                self.zip_with(rhs, |a, b| a - b)
            }
        }

        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, rhs: f64) -> $name {
                self.scaled(rhs)
            }
        }
    };
}

graded_vector!(Chain, "A real `p`-chain: one coefficient per `p`-cell.");
graded_vector!(Cochain, "A real `p`-cochain (discrete differential form): one value per `p`-cell.");

/// A structural problem found by [`CellComplex::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A cell whose hyperface list cannot come from a graded poset
    /// (an edge without two distinct endpoints, a cell with no hyperfaces).
    Grading { cell: CellId, reason: String },
    /// `∂∂ ≠ 0` at `cell`: the signed count through `subface` does not cancel.
    ChainComplex { cell: CellId, subface: CellId },
    /// A `(D-1)`-cell shared by more than two `D`-cells.
    TooManyCofaces { cell: CellId, count: usize },
    /// Number of cells strictly between `subface` and `cell` differs from two.
    Diamond { cell: CellId, subface: CellId, between: usize },
    /// A labelled sub-mesh that is not closed under taking subfaces.
    LabelNotClosed { label: String, cell: CellId, missing: CellId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Grading { cell, reason } => write!(f, "grading: {cell}: {reason}"),
            Violation::ChainComplex { cell, subface } => {
                write!(f, "chain complex: boundary of boundary of {cell} is nonzero at {subface}")
            }
            Violation::TooManyCofaces { cell, count } => {
                write!(f, "manifold: {cell} has {count} top-dimensional cofaces")
            }
            Violation::Diamond { cell, subface, between } => {
                write!(f, "diamond: {between} cells between {subface} and {cell}")
            }
            Violation::LabelNotClosed { label, cell, missing } => {
                write!(f, "label `{label}`: {cell} present but its subface {missing} is not")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Outcome of the compatible-orientation check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientationReport {
    pub compatible: bool,
    /// Interior `(D-1)`-cells whose two cofaces induce the same orientation.
    pub offending: Vec<usize>,
    /// `(D-1)`-cells with more than two `D`-cofaces (precondition failure).
    pub overfull: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    counts: Vec<usize>,
    faces: Vec<Vec<Incidence>>,
    labels: BTreeMap<String, Vec<Vec<usize>>>,
    cofaces: OnceLock<Vec<Vec<Incidence>>>,
}

impl CellComplex {
    /// Builds a complex from per-dimension cell counts and the signed
    /// hyperface list of every cell (`faces[p][i]`; nodes have empty lists).
    pub fn new(counts: Vec<usize>, faces: Vec<Vec<Incidence>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(CmcError::InvalidIncidence("complex needs at least one dimension".into()));
        }
        if faces.len() != counts.len() {
            return Err(CmcError::InvalidIncidence(format!(
                "{} incidence levels for {} dimensions",
                faces.len(),
                counts.len()
            )));
        }
        for (p, level) in faces.iter().enumerate() {
            if level.len() != counts[p] {
                return Err(CmcError::InvalidIncidence(format!(
                    "dimension {p}: {} incidence lists for {} cells",
                    level.len(),
                    counts[p]
                )));
            }
            for (i, list) in level.iter().enumerate() {
                if p == 0 && !list.is_empty() {
                    return Err(CmcError::InvalidIncidence(format!("node {i} lists hyperfaces")));
                }
                let mut seen = BTreeSet::new();
                for &(b, s) in list {
                    if b >= counts[p - 1] {
                        return Err(CmcError::InvalidIncidence(format!(
                            "{}: hyperface index {b} out of range",
                            CellId::new(p, i)
                        )));
                    }
                    if s != 1 && s != -1 {
                        return Err(CmcError::InvalidIncidence(format!(
                            "{}: sign {s} is not ±1",
                            CellId::new(p, i)
                        )));
                    }
                    if !seen.insert(b) {
                        return Err(CmcError::InvalidIncidence(format!(
                            "{}: hyperface {b} listed twice",
                            CellId::new(p, i)
                        )));
                    }
                }
            }
        }
        Ok(Self { counts, faces, labels: BTreeMap::new(), cofaces: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn count(&self, p: usize) -> usize {
        self.counts.get(p).copied().unwrap_or(0)
    }

    /// Signed hyperfaces of `cell`.
    pub fn faces(&self, cell: CellId) -> &[(usize, Sign)] {
        &self.faces[cell.dim][cell.index]
    }

    pub fn faces_of_dim(&self, p: usize) -> &[Incidence] {
        &self.faces[p]
    }

    /// Signed cofaces of `cell` (cells of dimension `dim + 1` having it as hyperface).
    pub fn cofaces(&self, cell: CellId) -> &[(usize, Sign)] {
        let all = self.cofaces.get_or_init(|| {
            let mut co: Vec<Vec<Incidence>> = self.counts.iter().map(|&n| vec![Vec::new(); n]).collect();
            for p in 1..self.counts.len() {
                for (a, list) in self.faces[p].iter().enumerate() {
                    for &(b, s) in list {
                        co[p - 1][b].push((a, s));
                    }
                }
            }
            co
        });
        if cell.dim >= all.len() {
            return &[];
        }
        &all[cell.dim][cell.index]
    }

    /// Relative orientation `ε(a, b)`, or `None` when `b` is not a hyperface of `a`.
    pub fn sign(&self, a: CellId, b: usize) -> Option<Sign> {
        if a.dim == 0 {
            return None;
        }
        self.faces(a).iter().find(|(f, _)| *f == b).map(|(_, s)| *s)
    }

    pub fn labels(&self) -> &BTreeMap<String, Vec<Vec<usize>>> {
        &self.labels
    }

    pub fn label(&self, name: &str) -> Option<&[Vec<usize>]> {
        self.labels.get(name).map(Vec::as_slice)
    }

    /// Attaches a named cell set (one sorted index list per dimension).
    pub fn set_label(&mut self, name: impl Into<String>, mut cells: Vec<Vec<usize>>) -> Result<()> {
        cells.resize(self.counts.len(), Vec::new());
        if cells.len() > self.counts.len() {
            return Err(CmcError::SubMesh("label has more dimensions than the complex".into()));
        }
        for (p, list) in cells.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if let Some(&bad) = list.iter().find(|&&i| i >= self.counts[p]) {
                return Err(CmcError::SubMesh(format!("label cell {} out of range", CellId::new(p, bad))));
            }
        }
        self.labels.insert(name.into(), cells);
        Ok(())
    }

    pub fn remove_label(&mut self, name: &str) {
        self.labels.remove(name);
    }

    /// Down-set of `cell`: all of its subfaces (itself included), per dimension, sorted.
    pub fn closure(&self, cell: CellId) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); cell.dim + 1];
        cells[cell.dim].push(cell.index);
        self.close_in_place(&mut cells);
        cells
    }

    /// Smallest subface-closed set containing `cells`.
    pub fn closure_of(&self, cells: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = cells.to_vec();
        out.resize(self.counts.len(), Vec::new());
        self.close_in_place(&mut out);
        out
    }

    fn close_in_place(&self, cells: &mut [Vec<usize>]) {
        for p in (1..cells.len()).rev() {
            let mut lower: BTreeSet<usize> = cells[p - 1].iter().copied().collect();
            for &a in &cells[p] {
                lower.extend(self.faces[p][a].iter().map(|(b, _)| *b));
            }
            cells[p - 1] = lower.into_iter().collect();
        }
        if let Some(top) = cells.last_mut() {
            top.sort_unstable();
            top.dedup();
        }
    }

    /// Sorted node indices of `cell`.
    pub fn nodes_of(&self, cell: CellId) -> Vec<usize> {
        self.closure(cell).swap_remove(0)
    }

    /// Rewrites node signs so that every node is positively oriented: each
    /// edge then has one `+1` (head) and one `-1` (tail). Node orientations
    /// are recovered per connected component, the lowest node taken positive.
    /// Returns the nodes whose orientation was flipped.
    pub fn normalize_node_orientation(&mut self) -> Result<Vec<usize>> {
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        let n = self.count(0);
        let mut adjacent: Vec<Vec<(usize, Sign, Sign)>> = vec![Vec::new(); n];
        for (e, list) in self.faces[1].iter().enumerate() {
            let [(a, sa), (b, sb)] = list[..] else {
                return Err(CmcError::InvalidIncidence(format!("{} has {} endpoints", CellId::new(1, e), list.len())));
            };
            adjacent[a].push((b, sa, sb));
            adjacent[b].push((a, sb, sa));
        }
        // s_a ε(e,a) = −s_b ε(e,b) on every edge.
        let mut orientation: Vec<Option<Sign>> = vec![None; n];
        for root in 0..n {
            if orientation[root].is_some() {
                continue;
            }
            orientation[root] = Some(1);
            let mut queue = VecDeque::from([root]);
            while let Some(a) = queue.pop_front() {
                let sa = orientation[a].expect("queued nodes are oriented");
                for &(b, ea, eb) in &adjacent[a] {
                    let want = -sa * ea * eb;
                    match orientation[b] {
                        None => {
                            orientation[b] = Some(want);
                            queue.push_back(b);
                        }
                        Some(s) if s != want => {
                            return Err(CmcError::InvalidIncidence(format!(
                                "node orientations are contradictory around node {b}"
                            )))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        let flipped: Vec<usize> = (0..n).filter(|&i| orientation[i] == Some(-1)).collect();
        if !flipped.is_empty() {
            for list in &mut self.faces[1] {
                for (b, s) in list.iter_mut() {
                    *s *= orientation[*b].expect("all nodes oriented");
                }
            }
            self.cofaces = OnceLock::new();
        }
        Ok(flipped)
    }

    /// `(D-1)`-cells with exactly one `D`-coface.
    pub fn boundary_facets(&self) -> Vec<usize> {
        let d = self.dim();
        if d == 0 {
            return Vec::new();
        }
        (0..self.count(d - 1))
            .filter(|&c| self.cofaces(CellId::new(d - 1, c)).len() == 1)
            .collect()
    }

    /// The closed boundary sub-mesh `∂K`.
    pub fn boundary_submesh(&self) -> SubMesh {
        let d = self.dim();
        let mut cells = vec![Vec::new(); self.counts.len()];
        if d > 0 {
            cells[d - 1] = self.boundary_facets();
        }
        self.submesh("boundary", &cells)
    }

    /// Builds the closed sub-mesh generated by `cells`, re-indexed locally.
    pub fn submesh(&self, name: &str, cells: &[Vec<usize>]) -> SubMesh {
        let closed = self.closure_of(cells);
        let top = closed.iter().rposition(|c| !c.is_empty()).unwrap_or(0);
        let parent_cells: Vec<Vec<usize>> = closed.into_iter().take(top + 1).collect();
        let counts: Vec<usize> = parent_cells.iter().map(Vec::len).collect();
        let mut faces: Vec<Vec<Incidence>> = Vec::with_capacity(counts.len());
        for (p, list) in parent_cells.iter().enumerate() {
            let level = list
                .iter()
                .map(|&parent| {
                    if p == 0 {
                        return Vec::new();
                    }
                    self.faces[p][parent]
                        .iter()
                        .map(|&(b, s)| {
                            let local = parent_cells[p - 1]
                                .binary_search(&b)
                                .expect("closure contains every hyperface");
                            (local, s)
                        })
                        .collect()
                })
                .collect();
            faces.push(level);
        }
        let complex = CellComplex::new(counts, faces).expect("restriction of a valid complex");
        SubMesh {
            name: name.to_string(),
            complex,
            parent_cells,
            parent_counts: self.counts.clone(),
        }
    }

    /// Sub-mesh of a stored label.
    pub fn label_submesh(&self, name: &str) -> Result<SubMesh> {
        let cells = self
            .labels
            .get(name)
            .ok_or_else(|| CmcError::SubMesh(format!("no label `{name}`")))?;
        Ok(self.submesh(name, cells))
    }

    /// Boundary operator `∂_p` as an `n_{p-1} × n_p` matrix.
    pub fn boundary_matrix(&self, p: usize) -> Result<CsrMatrix<f64>> {
        if p == 0 || p > self.dim() {
            return Err(CmcError::DimensionMismatch(format!(
                "boundary of {p}-chains on a {}-dimensional complex",
                self.dim()
            )));
        }
        let mut coo = CooMatrix::new(self.counts[p - 1], self.counts[p]);
        for (a, list) in self.faces[p].iter().enumerate() {
            for &(b, s) in list {
                coo.push(b, a, f64::from(s));
            }
        }
        Ok(CsrMatrix::from(&coo))
    }

    /// Coboundary operator `δ_p` as an `n_{p+1} × n_p` matrix (transpose of `∂_{p+1}`).
    pub fn coboundary_matrix(&self, p: usize) -> Result<CsrMatrix<f64>> {
        if p >= self.dim() {
            return Err(CmcError::DimensionMismatch(format!(
                "coboundary of {p}-cochains on a {}-dimensional complex",
                self.dim()
            )));
        }
        let mut coo = CooMatrix::new(self.counts[p + 1], self.counts[p]);
        for (a, list) in self.faces[p + 1].iter().enumerate() {
            for &(b, s) in list {
                coo.push(a, b, f64::from(s));
            }
        }
        Ok(CsrMatrix::from(&coo))
    }

    pub fn boundary(&self, chain: &Chain) -> Result<Chain> {
        let p = chain.dim();
        if p == 0 || p > self.dim() {
            return Err(CmcError::DimensionMismatch(format!("boundary of a {p}-chain")));
        }
        self.check_len(p, chain.len())?;
        let mut out = vec![0.0; self.counts[p - 1]];
        for (a, list) in self.faces[p].iter().enumerate() {
            let coeff = chain.values()[a];
            if coeff == 0.0 {
                continue;
            }
            for &(b, s) in list {
                out[b] += f64::from(s) * coeff;
            }
        }
        Ok(Chain::new(p - 1, out))
    }

    /// `(δσ)(a) = Σ_{b ⋖ a} ε(a, b) σ(b)`.
    pub fn coboundary(&self, cochain: &Cochain) -> Result<Cochain> {
        let p = cochain.dim();
        if p >= self.dim() {
            return Err(CmcError::DimensionMismatch(format!(
                "coboundary of a {p}-cochain on a {}-dimensional complex",
                self.dim()
            )));
        }
        self.check_len(p, cochain.len())?;
        let values = self.faces[p + 1]
            .iter()
            .map(|list| list.iter().map(|&(b, s)| f64::from(s) * cochain.values()[b]).sum())
            .collect();
        Ok(Cochain::new(p + 1, values))
    }

    pub(crate) fn check_len(&self, p: usize, len: usize) -> Result<()> {
        if p > self.dim() || self.counts[p] != len {
            return Err(CmcError::DimensionMismatch(format!(
                "{p}-cochain of length {len} on a complex with {} {p}-cells",
                self.count(p)
            )));
        }
        Ok(())
    }

    pub fn check_compatible_orientation(&self) -> OrientationReport {
        let d = self.dim();
        let mut offending = Vec::new();
        let mut overfull = Vec::new();
        if d > 0 {
            for c in 0..self.count(d - 1) {
                let co = self.cofaces(CellId::new(d - 1, c));
                match co.len() {
                    0 | 1 => {}
                    2 => {
                        if co[0].1 != -co[1].1 {
                            offending.push(c);
                        }
                    }
                    _ => overfull.push(c),
                }
            }
        }
        OrientationReport { compatible: offending.is_empty() && overfull.is_empty(), offending, overfull }
    }

    /// Flood-fills sign flips over the `D`-cells so that every interior
    /// `(D-1)`-cell receives opposite orientations from its two cofaces.
    /// The lowest-indexed cell of each connected component keeps its orientation.
    pub fn orient_top_cells(&self) -> Result<CellComplex> {
        let d = self.dim();
        if d == 0 {
            return Ok(self.clone());
        }
        let n_top = self.count(d);
        let mut flip: Vec<Option<bool>> = vec![None; n_top];
        for seed in 0..n_top {
            if flip[seed].is_some() {
                continue;
            }
            flip[seed] = Some(false);
            let mut queue = VecDeque::from([seed]);
            while let Some(a) = queue.pop_front() {
                let fa = flip[a].expect("visited");
                for &(c, s_ac) in &self.faces[d][a] {
                    let co = self.cofaces(CellId::new(d - 1, c));
                    if co.len() > 2 {
                        return Err(CmcError::InvalidIncidence(format!(
                            "{} has {} top-dimensional cofaces",
                            CellId::new(d - 1, c),
                            co.len()
                        )));
                    }
                    let eff_a = if fa { -s_ac } else { s_ac };
                    for &(b, s_bc) in co {
                        if b == a {
                            continue;
                        }
                        let needs_flip = s_bc != -eff_a;
                        match flip[b] {
                            None => {
                                flip[b] = Some(needs_flip);
                                queue.push_back(b);
                            }
                            Some(f) if f != needs_flip => return Err(CmcError::NonOrientable(c)),
                            Some(_) => {}
                        }
                    }
                }
            }
        }
        let mut faces = self.faces.clone();
        for (a, f) in flip.iter().enumerate() {
            if f == &Some(true) {
                for entry in &mut faces[d][a] {
                    entry.1 = -entry.1;
                }
            }
        }
        let mut out = CellComplex::new(self.counts.clone(), faces)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Negates the orientation of every `D`-cell.
    pub fn flip_top_cells(&self) -> CellComplex {
        let d = self.dim();
        let mut faces = self.faces.clone();
        if d > 0 {
            for list in &mut faces[d] {
                for entry in list.iter_mut() {
                    entry.1 = -entry.1;
                }
            }
        }
        let mut out = CellComplex::new(self.counts.clone(), faces).expect("same structure");
        out.labels = self.labels.clone();
        out
    }

    /// The all-ones `D`-chain of a compatibly oriented complex.
    pub fn fundamental_class(&self) -> Result<Chain> {
        let report = self.check_compatible_orientation();
        if !report.compatible {
            let mut bad = report.offending;
            bad.extend(report.overfull);
            return Err(CmcError::IncompatibleOrientation(bad));
        }
        Ok(Chain::constant(self.dim(), self.count(self.dim()), 1.0))
    }

    /// Discrete integral `σ[K] = Σ_a σ(a)` of a top-dimensional cochain.
    pub fn integrate(&self, cochain: &Cochain) -> Result<f64> {
        if cochain.dim() != self.dim() {
            return Err(CmcError::DimensionMismatch(format!(
                "integrating a {}-cochain over a {}-dimensional complex",
                cochain.dim(),
                self.dim()
            )));
        }
        self.check_len(cochain.dim(), cochain.len())?;
        let class = self.fundamental_class()?;
        Ok(class.values().iter().zip(cochain.values()).map(|(a, b)| a * b).sum())
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let d = self.dim();
        for p in 1..=d {
            for (a, list) in self.faces[p].iter().enumerate() {
                let cell = CellId::new(p, a);
                if p == 1 && list.len() != 2 {
                    violations.push(Violation::Grading {
                        cell,
                        reason: format!("edge has {} endpoints", list.len()),
                    });
                } else if list.is_empty() {
                    violations.push(Violation::Grading { cell, reason: "no hyperfaces".into() });
                }
                if p < 2 {
                    continue;
                }
                let mut through: BTreeMap<usize, (usize, i32)> = BTreeMap::new();
                for &(b, s_ab) in list {
                    for &(c, s_bc) in &self.faces[p - 1][b] {
                        let e = through.entry(c).or_insert((0, 0));
                        e.0 += 1;
                        e.1 += i32::from(s_ab) * i32::from(s_bc);
                    }
                }
                for (c, (between, signed)) in through {
                    let subface = CellId::new(p - 2, c);
                    if between != 2 {
                        violations.push(Violation::Diamond { cell, subface, between });
                    }
                    if signed != 0 {
                        violations.push(Violation::ChainComplex { cell, subface });
                    }
                }
            }
        }
        if d > 0 {
            for c in 0..self.count(d - 1) {
                let count = self.cofaces(CellId::new(d - 1, c)).len();
                if count > 2 {
                    violations.push(Violation::TooManyCofaces { cell: CellId::new(d - 1, c), count });
                }
            }
        }
        for (name, cells) in &self.labels {
            for p in 1..cells.len() {
                for &a in &cells[p] {
                    for &(b, _) in &self.faces[p][a] {
                        if cells[p - 1].binary_search(&b).is_err() {
                            violations.push(Violation::LabelNotClosed {
                                label: name.clone(),
                                cell: CellId::new(p, a),
                                missing: CellId::new(p - 1, b),
                            });
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }
}

/// A closed sub-mesh with its own local indexing and a map back to the parent.
#[derive(Clone, Debug)]
pub struct SubMesh {
    name: String,
    complex: CellComplex,
    parent_cells: Vec<Vec<usize>>,
    parent_counts: Vec<usize>,
}

impl SubMesh {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn is_empty(&self) -> bool {
        self.parent_cells.iter().all(Vec::is_empty)
    }

    /// Parent indices of the local `p`-cells (empty beyond the sub-mesh dimension).
    pub fn parent_cells(&self, p: usize) -> &[usize] {
        self.parent_cells.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, p: usize) -> usize {
        self.parent_cells(p).len()
    }

    pub fn local_index(&self, p: usize, parent: usize) -> Option<usize> {
        self.parent_cells(p).binary_search(&parent).ok()
    }

    pub fn contains(&self, p: usize, parent: usize) -> bool {
        self.local_index(p, parent).is_some()
    }

    /// Boolean mask over the parent's `p`-cells.
    pub fn mask(&self, p: usize) -> Vec<bool> {
        let mut mask = vec![false; self.parent_counts.get(p).copied().unwrap_or(0)];
        for &i in self.parent_cells(p) {
            mask[i] = true;
        }
        mask
    }

    /// Discrete trace: restriction of a parent cochain to the sub-mesh cells.
    pub fn trace(&self, cochain: &Cochain) -> Result<Cochain> {
        let p = cochain.dim();
        if p >= self.parent_counts.len() || cochain.len() != self.parent_counts[p] {
            return Err(CmcError::DimensionMismatch(format!(
                "{p}-cochain of length {} does not live on the parent of `{}`",
                cochain.len(),
                self.name
            )));
        }
        if !self.is_empty() && p > self.complex.dim() {
            return Err(CmcError::DimensionMismatch(format!(
                "trace of a {p}-cochain onto the {}-dimensional sub-mesh `{}`",
                self.complex.dim(),
                self.name
            )));
        }
        let values = self
            .parent_cells(p)
            .iter()
            .map(|&i| {
                cochain.values().get(i).copied().ok_or_else(|| {
                    CmcError::SubMesh(format!("cell {} missing from complex", CellId::new(p, i)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cochain::new(p, values))
    }

    /// Extends a sub-mesh cochain by zero to the parent.
    pub fn extend_by_zero(&self, cochain: &Cochain) -> Cochain {
        let p = cochain.dim();
        let mut values = vec![0.0; self.parent_counts[p]];
        for (local, &parent) in self.parent_cells(p).iter().enumerate() {
            values[parent] = cochain.values()[local];
        }
        Cochain::new(p, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> CellComplex {
        CellComplex::new(vec![2, 1], vec![vec![vec![], vec![]], vec![vec![(0, -1), (1, 1)]]]).unwrap()
    }

    /// Two unit squares side by side: nodes 0..6 (row-major 3×2), edges 0..7.
    fn two_squares(flip_second: bool) -> CellComplex {
        // nodes: 0 (0,0) 1 (1,0) 2 (2,0) 3 (0,1) 4 (1,1) 5 (2,1)
        // edges: 0: 0->1, 1: 1->2, 2: 3->4, 3: 4->5, 4: 0->3, 5: 1->4, 6: 2->5
        let edges = [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)];
        let e_faces = edges.iter().map(|&(t, h)| vec![(t, -1), (h, 1)]).collect();
        let s = if flip_second { -1 } else { 1 };
        let f0 = vec![(0, 1), (5, 1), (2, -1), (4, -1)];
        let f1 = vec![(1, s), (6, s), (3, -s), (5, -s)];
        CellComplex::new(vec![6, 7, 2], vec![vec![vec![]; 6], e_faces, vec![f0, f1]]).unwrap()
    }

    #[test]
    fn edge_boundary_is_head_minus_tail() {
        let k = edge();
        let d = k.boundary(&Chain::basis(1, 1, 0)).unwrap();
        assert_eq!(d.values(), &[-1.0, 1.0]);
        let delta = k.coboundary(&Cochain::basis(0, 2, 0)).unwrap();
        assert_eq!(delta.values(), &[-1.0]);
        assert_eq!(k.fundamental_class().unwrap().values(), &[1.0]);
    }

    #[test]
    fn boundary_rejects_nodes_and_wrong_length() {
        let k = edge();
        assert!(matches!(k.boundary(&Chain::zeros(0, 2)), Err(CmcError::DimensionMismatch(_))));
        assert!(matches!(k.boundary(&Chain::zeros(1, 3)), Err(CmcError::DimensionMismatch(_))));
        assert!(matches!(k.coboundary(&Cochain::zeros(1, 1)), Err(CmcError::DimensionMismatch(_))));
    }

    #[test]
    fn negative_node_is_normalized() {
        let good = two_squares(false);
        let mut faces: Vec<Vec<Incidence>> = (0..3).map(|p| good.faces_of_dim(p).to_vec()).collect();
        // Node 4 negatively oriented: every ε(e, 4) flips.
        for list in &mut faces[1] {
            for (b, s) in list.iter_mut() {
                if *b == 4 {
                    *s = -*s;
                }
            }
        }
        let mut k = CellComplex::new(vec![6, 7, 2], faces).unwrap();
        assert!(k.validate().is_valid());
        assert_eq!(k.normalize_node_orientation().unwrap(), vec![4]);
        assert_eq!(k.faces_of_dim(1), good.faces_of_dim(1));
        let mut again = good.clone();
        assert!(again.normalize_node_orientation().unwrap().is_empty());
    }

    #[test]
    fn flipped_square_is_reported_and_fixed() {
        let bad = two_squares(true);
        let report = bad.check_compatible_orientation();
        assert!(!report.compatible);
        assert_eq!(report.offending, vec![5]);
        let fixed = bad.orient_top_cells().unwrap();
        assert!(fixed.check_compatible_orientation().compatible);
        assert_eq!(fixed.faces(CellId::new(2, 1)), two_squares(false).faces(CellId::new(2, 1)));
        assert_eq!(fixed.faces(CellId::new(2, 0)), bad.faces(CellId::new(2, 0)));
        let again = fixed.orient_top_cells().unwrap();
        assert_eq!(again.faces_of_dim(2), fixed.faces_of_dim(2));
    }

    #[test]
    fn validate_flags_single_sign_flip() {
        let good = two_squares(false);
        assert!(good.validate().is_valid());
        let mut faces: Vec<Vec<Incidence>> = (0..=2).map(|p| good.faces_of_dim(p).to_vec()).collect();
        faces[2][0][1].1 = -faces[2][0][1].1;
        let bad = CellComplex::new(good.counts().to_vec(), faces).unwrap();
        let report = bad.validate();
        assert!(report
            .violations
            .iter()
            .all(|v| matches!(v, Violation::ChainComplex { cell, .. } if *cell == CellId::new(2, 0))));
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn constructor_rejects_malformed_incidence() {
        assert!(CellComplex::new(vec![2, 1], vec![vec![vec![], vec![]], vec![vec![(0, -1), (2, 1)]]]).is_err());
        assert!(CellComplex::new(vec![2, 1], vec![vec![vec![], vec![]], vec![vec![(0, 0), (1, 1)]]]).is_err());
        assert!(CellComplex::new(vec![2, 1], vec![vec![vec![], vec![]], vec![vec![(0, 1), (0, 1)]]]).is_err());
    }

    #[test]
    fn trace_and_submesh() {
        let k = two_squares(false);
        let boundary = k.boundary_submesh();
        assert_eq!(boundary.parent_cells(1), &[0, 1, 2, 3, 4, 6]);
        assert_eq!(boundary.count(0), 6);
        let c = Cochain::constant(1, 7, 2.5);
        let t = boundary.trace(&c).unwrap();
        assert!(t.values().iter().all(|&v| v == 2.5));
        let empty = k.submesh("empty", &[]);
        assert!(empty.is_empty());
        assert!(empty.trace(&c).unwrap().is_empty());
        assert!(empty.trace(&Cochain::zeros(2, 2)).unwrap().is_empty());
    }

    #[test]
    fn label_closure_is_validated() {
        let mut k = two_squares(false);
        k.set_label("bottom", vec![vec![0, 1], vec![0]]).unwrap();
        assert!(k.validate().is_valid());
        k.set_label("broken", vec![vec![0], vec![0]]).unwrap();
        let report = k.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(&report.violations[0], Violation::LabelNotClosed { missing, .. } if *missing == CellId::new(0, 1)));
    }
}
