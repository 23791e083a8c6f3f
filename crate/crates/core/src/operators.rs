//! Metric operators on a quasi-cubical Riemannian mesh: cup product,
//! diagonal inner products, Hodge star and adjoint coboundary.

use std::io::Write;
use std::sync::OnceLock;

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::complex::{CellComplex, CellId, Cochain, SubMesh};
use crate::error::{CmcError, Result};
use crate::forman::QuasiCubicalMesh;

/// `y = A x` for a CSR matrix.
pub fn spmv(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len(), "spmv dimension mismatch");
    a.row_iter()
        .map(|row| row.col_indices().iter().zip(row.values()).map(|(&j, v)| v * x[j]).sum())
        .collect()
}

/// `y = Aᵀ x` for a CSR matrix.
pub fn spmv_transpose(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.nrows(), x.len(), "spmv dimension mismatch");
    let mut y = vec![0.0; a.ncols()];
    for (i, row) in a.row_iter().enumerate() {
        for (&j, v) in row.col_indices().iter().zip(row.values()) {
            y[j] += v * x[i];
        }
    }
    y
}

pub fn diagonal(values: &[f64]) -> CsrMatrix<f64> {
    let n = values.len();
    let mut coo = CooMatrix::new(n, n);
    for (i, &v) in values.iter().enumerate() {
        coo.push(i, i, v);
    }
    CsrMatrix::from(&coo)
}

/// Writes `row col value` lines, one per stored entry.
pub fn dump_coordinate<W: Write>(a: &CsrMatrix<f64>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "% {} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, row) in a.row_iter().enumerate() {
        for (&j, v) in row.col_indices().iter().zip(row.values()) {
            writeln!(out, "{i} {j} {v:e}")?;
        }
    }
    Ok(())
}

/// Quasi-cubical cup product `σ ⌣ τ`.
pub fn cup(k: &QuasiCubicalMesh, sigma: &Cochain, tau: &Cochain) -> Result<Cochain> {
    let (p, q) = (sigma.dim(), tau.dim());
    check_degrees(k, p, q)?;
    k.complex().check_len(p, sigma.len())?;
    k.complex().check_len(q, tau.len())?;
    let n = p + q;
    let scale = 0.5f64.powi(n as i32);
    let values = (0..k.count(n))
        .map(|a| {
            let pairs = k.orthogonal_pairs(CellId::new(n, a), p, q).expect("checked degrees");
            scale
                * pairs
                    .iter()
                    .map(|pr| f64::from(pr.sign) * sigma.values()[pr.left.index] * tau.values()[pr.right.index])
                    .sum::<f64>()
        })
        .collect();
    Ok(Cochain::new(n, values))
}

/// Matrix of `τ ↦ σ ⌣ τ` for a fixed `p`-cochain `σ` and `q`-cochains `τ`.
pub fn cup_left_matrix(k: &QuasiCubicalMesh, sigma: &Cochain, q: usize) -> Result<CsrMatrix<f64>> {
    let p = sigma.dim();
    check_degrees(k, p, q)?;
    k.complex().check_len(p, sigma.len())?;
    let n = p + q;
    let scale = 0.5f64.powi(n as i32);
    let mut coo = CooMatrix::new(k.count(n), k.count(q));
    for a in 0..k.count(n) {
        for pr in k.orthogonal_pairs(CellId::new(n, a), p, q)? {
            coo.push(a, pr.right.index, scale * f64::from(pr.sign) * sigma.values()[pr.left.index]);
        }
    }
    Ok(CsrMatrix::from(&coo))
}

/// Matrix of `σ ↦ σ ⌣ τ` for a fixed `q`-cochain `τ` and `p`-cochains `σ`.
pub fn cup_right_matrix(k: &QuasiCubicalMesh, p: usize, tau: &Cochain) -> Result<CsrMatrix<f64>> {
    let q = tau.dim();
    check_degrees(k, p, q)?;
    k.complex().check_len(q, tau.len())?;
    let n = p + q;
    let scale = 0.5f64.powi(n as i32);
    let mut coo = CooMatrix::new(k.count(n), k.count(p));
    for a in 0..k.count(n) {
        for pr in k.orthogonal_pairs(CellId::new(n, a), p, q)? {
            coo.push(a, pr.left.index, scale * f64::from(pr.sign) * tau.values()[pr.right.index]);
        }
    }
    Ok(CsrMatrix::from(&coo))
}

fn check_degrees(k: &QuasiCubicalMesh, p: usize, q: usize) -> Result<()> {
    if p + q > k.dim() {
        return Err(CmcError::DimensionMismatch(format!(
            "cup of degrees {p} and {q} exceeds dimension {}",
            k.dim()
        )));
    }
    Ok(())
}

/// Positive measure of every cell; nodes carry measure one.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricData {
    measures: Vec<Vec<f64>>,
}

impl MetricData {
    pub fn new(complex: &CellComplex, mut measures: Vec<Vec<f64>>) -> Result<Self> {
        if measures.len() == complex.dim() {
            measures.insert(0, vec![1.0; complex.count(0)]);
        }
        if measures.len() != complex.dim() + 1 {
            return Err(CmcError::InvalidMetric(format!(
                "{} measure levels for a {}-dimensional complex",
                measures.len(),
                complex.dim()
            )));
        }
        for (p, level) in measures.iter().enumerate() {
            if level.len() != complex.count(p) {
                return Err(CmcError::InvalidMetric(format!(
                    "{} measures for {} {p}-cells",
                    level.len(),
                    complex.count(p)
                )));
            }
            for (i, &mu) in level.iter().enumerate() {
                if p == 0 && mu != 1.0 {
                    return Err(CmcError::InvalidMetric(format!("node {i} has measure {mu}, expected 1")));
                }
                if !(mu > 0.0 && mu.is_finite()) {
                    return Err(CmcError::InvalidMetric(format!(
                        "{} has non-positive measure {mu}",
                        CellId::new(p, i)
                    )));
                }
            }
        }
        Ok(Self { measures })
    }

    pub fn measure(&self, cell: CellId) -> f64 {
        self.measures[cell.dim][cell.index]
    }

    pub fn measures(&self, p: usize) -> &[f64] {
        &self.measures[p]
    }

    pub fn into_levels(self) -> Vec<Vec<f64>> {
        self.measures
    }
}

/// Diagonal inner product on `p`-cochains.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProduct {
    pub dim: usize,
    pub weights: Vec<f64>,
}

impl InnerProduct {
    pub fn apply(&self, sigma: &Cochain, rho: &Cochain) -> f64 {
        self.weights
            .iter()
            .zip(sigma.values())
            .zip(rho.values())
            .map(|((w, s), r)| w * s * r)
            .sum()
    }
}

/// `⟨c, c⟩_p = (1 / (2^D μ(c))) Σ_{a ∈ K_D, b ∈ K_{D-p}, b ⊥_a c} μ(b)`.
pub fn inner_product(k: &QuasiCubicalMesh, metric: &MetricData, p: usize) -> Result<InnerProduct> {
    let d = k.dim();
    if p > d {
        return Err(CmcError::DimensionMismatch(format!("inner product of degree {p} in dimension {d}")));
    }
    let mut weights = vec![0.0; k.count(p)];
    for a in 0..k.count(d) {
        for pr in k.orthogonal_pairs(CellId::new(d, a), d - p, p)? {
            weights[pr.right.index] += metric.measure(pr.left);
        }
    }
    let scale = 0.5f64.powi(d as i32);
    for (c, w) in weights.iter_mut().enumerate() {
        *w *= scale / metric.measure(CellId::new(p, c));
        if *w <= 0.0 {
            return Err(CmcError::InvalidMetric(format!(
                "{} lies in no top-dimensional cell",
                CellId::new(p, c)
            )));
        }
    }
    Ok(InnerProduct { dim: p, weights })
}

/// Indices of the `p`-cells not on the boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroTraceSpace {
    pub dim: usize,
    pub interior: Vec<usize>,
    mask: Vec<bool>,
}

impl ZeroTraceSpace {
    pub fn is_interior(&self, index: usize) -> bool {
        self.mask[index]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn project(&self, cochain: &Cochain) -> Cochain {
        let values = cochain
            .values()
            .iter()
            .zip(&self.mask)
            .map(|(&v, &inside)| if inside { v } else { 0.0 })
            .collect();
        Cochain::new(cochain.dim(), values)
    }
}

/// A quasi-cubical mesh with measures and its cached metric operators.
#[derive(Debug)]
pub struct RiemannianMesh {
    mesh: QuasiCubicalMesh,
    metric: MetricData,
    inner: Vec<InnerProduct>,
    boundary: SubMesh,
    zero_trace: Vec<ZeroTraceSpace>,
    coboundary: Vec<OnceLock<CsrMatrix<f64>>>,
    hodge: Vec<OnceLock<CsrMatrix<f64>>>,
    adjoint: Vec<OnceLock<CsrMatrix<f64>>>,
}

impl RiemannianMesh {
    pub fn new(mesh: QuasiCubicalMesh, metric: MetricData) -> Result<Self> {
        let d = mesh.dim();
        for p in 0..=d {
            if metric.measures(p).len() != mesh.count(p) {
                return Err(CmcError::InvalidMetric("measures do not match the mesh".into()));
            }
        }
        let report = mesh.complex().check_compatible_orientation();
        if !report.compatible {
            return Err(CmcError::IncompatibleOrientation(report.offending));
        }
        let inner = (0..=d).map(|p| inner_product(&mesh, &metric, p)).collect::<Result<Vec<_>>>()?;
        let boundary = mesh.complex().boundary_submesh();
        let zero_trace = (0..=d)
            .map(|p| {
                let mask: Vec<bool> = boundary.mask(p).into_iter().map(|b| !b).collect();
                let mask = if mask.len() == mesh.count(p) { mask } else { vec![true; mesh.count(p)] };
                let interior = (0..mask.len()).filter(|&i| mask[i]).collect();
                ZeroTraceSpace { dim: p, interior, mask }
            })
            .collect();
        let cells = || (0..=d).map(|_| OnceLock::new()).collect();
        Ok(Self {
            mesh,
            metric,
            inner,
            boundary,
            zero_trace,
            coboundary: cells(),
            hodge: cells(),
            adjoint: cells(),
        })
    }

    pub fn mesh(&self) -> &QuasiCubicalMesh {
        &self.mesh
    }

    pub fn complex(&self) -> &CellComplex {
        self.mesh.complex()
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn count(&self, p: usize) -> usize {
        self.mesh.count(p)
    }

    pub fn boundary(&self) -> &SubMesh {
        &self.boundary
    }

    pub fn inner(&self, p: usize) -> &InnerProduct {
        &self.inner[p]
    }

    pub fn weights(&self, p: usize) -> &[f64] {
        &self.inner[p].weights
    }

    pub fn zero_trace_space(&self, p: usize) -> &ZeroTraceSpace {
        &self.zero_trace[p]
    }

    /// Zeroes the boundary entries of a cochain.
    pub fn zero_trace_project(&self, cochain: &Cochain) -> Cochain {
        self.zero_trace[cochain.dim()].project(cochain)
    }

    /// `δ_p` as an `n_{p+1} × n_p` matrix.
    pub fn coboundary_matrix(&self, p: usize) -> Result<&CsrMatrix<f64>> {
        if p >= self.dim() {
            return Err(CmcError::DimensionMismatch(format!("coboundary of degree {p}")));
        }
        if let Some(m) = self.coboundary[p].get() {
            return Ok(m);
        }
        let m = self.complex().coboundary_matrix(p)?;
        Ok(self.coboundary[p].get_or_init(|| m))
    }

    /// `★_p` as an `n_{D-p} × n_p` matrix:
    /// `(★_p σ)(c) = (1 / (2^D ⟨c,c⟩_{D-p})) Σ_{a ∈ K_D, b ∈ K_p, b ⊥_a c} ε⊥(a,b,c) σ(b)`.
    pub fn hodge_star_matrix(&self, p: usize) -> Result<&CsrMatrix<f64>> {
        let d = self.dim();
        if p > d {
            return Err(CmcError::DimensionMismatch(format!("Hodge star of degree {p}")));
        }
        if let Some(m) = self.hodge[p].get() {
            return Ok(m);
        }
        let w = &self.inner[d - p].weights;
        let scale = 0.5f64.powi(d as i32);
        let mut coo = CooMatrix::new(self.count(d - p), self.count(p));
        for a in 0..self.count(d) {
            for pr in self.mesh.orthogonal_pairs(CellId::new(d, a), p, d - p)? {
                let c = pr.right.index;
                coo.push(c, pr.left.index, scale * f64::from(pr.sign) / w[c]);
            }
        }
        let m = CsrMatrix::from(&coo);
        Ok(self.hodge[p].get_or_init(|| m))
    }

    pub fn hodge_star(&self, sigma: &Cochain) -> Result<Cochain> {
        let p = sigma.dim();
        self.complex().check_len(p, sigma.len())?;
        let m = self.hodge_star_matrix(p)?;
        Ok(Cochain::new(self.dim() - p, spmv(m, sigma.values())))
    }

    /// `δ★_p` as an `n_{p-1} × n_p` matrix, nonzero only on interior rows:
    /// `(δ★σ)(b) = (1/⟨b,b⟩_{p-1}) Σ_{a ⋗ b} ε(a,b) ⟨a,a⟩_p σ(a)`.
    pub fn adjoint_coboundary_matrix(&self, p: usize) -> Result<&CsrMatrix<f64>> {
        if p == 0 || p > self.dim() {
            return Err(CmcError::DimensionMismatch(format!("adjoint coboundary of degree {p}")));
        }
        if let Some(m) = self.adjoint[p].get() {
            return Ok(m);
        }
        let (wb, wa) = (&self.inner[p - 1].weights, &self.inner[p].weights);
        let mask = &self.zero_trace[p - 1];
        let mut coo = CooMatrix::new(self.count(p - 1), self.count(p));
        for (a, list) in self.complex().faces_of_dim(p).iter().enumerate() {
            for &(b, s) in list {
                if mask.is_interior(b) {
                    coo.push(b, a, f64::from(s) * wa[a] / wb[b]);
                }
            }
        }
        let m = CsrMatrix::from(&coo);
        Ok(self.adjoint[p].get_or_init(|| m))
    }

    /// Adjoint coboundary of a zero-trace cochain.
    pub fn adjoint_coboundary(&self, sigma: &Cochain) -> Result<Cochain> {
        let p = sigma.dim();
        self.complex().check_len(p, sigma.len())?;
        if p == 0 {
            return Err(CmcError::DimensionMismatch("adjoint coboundary of a 0-cochain".into()));
        }
        let space = &self.zero_trace[p];
        if let Some(cell) = (0..sigma.len()).find(|&i| !space.is_interior(i) && sigma.values()[i] != 0.0) {
            return Err(CmcError::NonZeroTrace { dim: p, cell });
        }
        let m = self.adjoint_coboundary_matrix(p)?;
        Ok(Cochain::new(p - 1, spmv(m, sigma.values())))
    }

    /// `(σ ⌣ τ)[K]` for a pair of complementary degrees.
    pub fn integrate_cup(&self, sigma: &Cochain, tau: &Cochain) -> Result<f64> {
        let product = cup(&self.mesh, sigma, tau)?;
        self.complex().integrate(&product)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forman::forman_subdivide;

    fn path(n: usize) -> CellComplex {
        let edges = (0..n).map(|i| vec![(i, -1), (i + 1, 1)]).collect();
        CellComplex::new(vec![n + 1, n], vec![vec![vec![]; n + 1], edges]).unwrap()
    }

    fn square() -> CellComplex {
        let edges = (0..4).map(|i| vec![(i, -1), ((i + 1) % 4, 1)]).collect();
        CellComplex::new(vec![4, 4, 1], vec![vec![vec![]; 4], edges, vec![(0..4).map(|i| (i, 1)).collect()]])
            .unwrap()
    }

    fn uniform(k: &QuasiCubicalMesh, h: f64) -> MetricData {
        let levels = (0..=k.dim()).map(|p| vec![h.powi(p as i32); k.count(p)]).collect();
        MetricData::new(k.complex(), levels).unwrap()
    }

    #[test]
    fn one_dimensional_weights() {
        let k = forman_subdivide(&path(3)).unwrap();
        let h = 0.25;
        let rm = RiemannianMesh::new(k.clone(), uniform(&k, h)).unwrap();
        let boundary = rm.boundary();
        for (i, &w) in rm.weights(0).iter().enumerate() {
            let expected = if boundary.contains(0, i) { h / 2.0 } else { h };
            assert!((w - expected).abs() < 1e-15);
        }
        assert!(rm.weights(1).iter().all(|&w| (w - 1.0 / h).abs() < 1e-12));
    }

    #[test]
    fn unit_grid_interior_edge_weight_is_one() {
        let k = forman_subdivide(&square()).unwrap();
        let rm = RiemannianMesh::new(k.clone(), uniform(&k, 1.0)).unwrap();
        let space = rm.zero_trace_space(1);
        assert_eq!(space.interior.len(), 4);
        for &e in &space.interior {
            assert!((rm.weights(1)[e] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn star_of_one_on_a_unit_edge_is_its_length() {
        // a single edge of length one subdivided into two halves
        let k = forman_subdivide(&path(1)).unwrap();
        let rm = RiemannianMesh::new(k.clone(), uniform(&k, 0.5)).unwrap();
        let star = rm.hodge_star(&Cochain::constant(0, 3, 1.0)).unwrap();
        assert!(star.values().iter().all(|&v| (v.abs() - 0.5).abs() < 1e-15));
        assert!((rm.complex().integrate(&star).unwrap().abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cup_with_top_degree_averages_nodes() {
        let k = forman_subdivide(&square()).unwrap();
        let w = Cochain::new(0, (0..9).map(|i| i as f64).collect());
        let f = Cochain::new(2, vec![1.0, 2.0, 3.0, 4.0]);
        let wf = cup(&k, &w, &f).unwrap();
        for a in 0..4 {
            let nodes = k.nodes_of(CellId::new(2, a));
            let mean = nodes.iter().map(|&n| n as f64).sum::<f64>() / 4.0;
            assert!((wf.values()[a] - mean * f.values()[a]).abs() < 1e-14);
        }
        let s = Cochain::new(1, (0..12).map(|i| (i as f64).sin()).collect());
        assert!(cup(&k, &s, &s).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn cup_is_not_associative_on_a_path() {
        let k = forman_subdivide(&path(1)).unwrap();
        let e = |v: [f64; 2]| Cochain::new(1, v.to_vec());
        let n = |v: [f64; 3]| Cochain::new(0, v.to_vec());
        let (a, b, c) = (n([1.0, 0.0, 0.0]), n([0.0, 0.0, 1.0]), e([1.0, 1.0]));
        let left = cup(&k, &cup(&k, &a, &b).unwrap(), &c).unwrap();
        let right = cup(&k, &a, &cup(&k, &b, &c).unwrap()).unwrap();
        assert!((&left - &right).max_abs() > 0.1);
    }

    #[test]
    fn adjoint_coboundary_matches_dense_transpose() {
        let k = forman_subdivide(&path(2)).unwrap();
        let h = 0.5;
        let rm = RiemannianMesh::new(k.clone(), uniform(&k, h)).unwrap();
        let d0 = rm.complex().coboundary_matrix(0).unwrap();
        let (n0, n1) = (rm.count(0), rm.count(1));
        let mut dense = vec![vec![0.0; n1]; n0];
        for (e, row) in d0.row_iter().enumerate() {
            for (&v, s) in row.col_indices().iter().zip(row.values()) {
                dense[v][e] = s * rm.weights(1)[e] / rm.weights(0)[v];
            }
        }
        let m = rm.adjoint_coboundary_matrix(1).unwrap();
        for v in 0..n0 {
            for e in 0..n1 {
                let got = m.get_entry(v, e).map(|x| x.into_value()).unwrap_or(0.0);
                let want = if rm.zero_trace_space(0).is_interior(v) { dense[v][e] } else { 0.0 };
                assert!((got - want).abs() < 1e-14, "({v}, {e}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn zero_trace_projection() {
        let k = forman_subdivide(&square()).unwrap();
        let rm = RiemannianMesh::new(k.clone(), uniform(&k, 1.0)).unwrap();
        let space = rm.zero_trace_space(0);
        let center = space.interior[0];
        let inside = Cochain::basis(0, 9, center);
        assert_eq!(rm.zero_trace_project(&inside), inside);
        let edge_node = (0..9).find(|&i| !space.is_interior(i)).unwrap();
        assert_eq!(rm.zero_trace_project(&Cochain::basis(0, 9, edge_node)).max_abs(), 0.0);
        let nonzero = Cochain::basis(1, 12, rm.boundary().parent_cells(1)[0]);
        assert!(matches!(rm.adjoint_coboundary(&nonzero), Err(CmcError::NonZeroTrace { .. })));
    }
}
