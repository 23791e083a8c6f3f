//! Primal weak formulation: nodal potential unknowns, flow rate by post-processing.

use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::linalg::{index_map, submatrix, Factorization};
use super::problem::TransportProblem;
use super::SolveResult;
use crate::complex::{CellId, Cochain};
use crate::error::Result;
use crate::operators::{cup_right_matrix, diagonal, spmv};

/// Assembled primal operators on all nodes, before Dirichlet elimination.
#[derive(Clone, Debug)]
pub struct PrimalSystem {
    /// `A_D = δ_0ᵀ diag(⟨·,·⟩_1 κ̃) δ_0`.
    pub stiffness: CsrMatrix<f64>,
    /// `A_A`, present only when `v` is nonzero.
    pub advection: Option<CsrMatrix<f64>>,
    /// `F(w) = (w ⌣ f)[K]`.
    pub load: Vec<f64>,
    /// `G(w) = (tr w ⌣ g_N)[Γ_N]`.
    pub neumann_load: Vec<f64>,
    /// Nodes off `Γ_D`, in increasing order.
    pub free: Vec<usize>,
}

impl PrimalSystem {
    /// `A_D − A_A`.
    pub fn operator(&self) -> CsrMatrix<f64> {
        match &self.advection {
            Some(a) => &self.stiffness - a,
            None => self.stiffness.clone(),
        }
    }

    /// `F − G`.
    pub fn rhs(&self) -> Vec<f64> {
        self.load.iter().zip(&self.neumann_load).map(|(f, g)| f - g).collect()
    }
}

/// `(π̃u ⌣ v)` as a matrix acting on `u`.
pub(crate) fn advective_flux_matrix(p: &TransportProblem, v: &Cochain) -> Result<CsrMatrix<f64>> {
    let x = cup_right_matrix(p.mesh.mesh(), 0, v)?;
    Ok(&x * &diagonal(&p.capacity_dual))
}

pub fn assemble_primal(p: &TransportProblem) -> Result<PrimalSystem> {
    p.validate()?;
    let m = &p.mesh;
    let d = m.dim();
    let d0 = m.coboundary_matrix(0)?;
    let scaled: Vec<f64> = m.weights(1).iter().zip(&p.kappa_dual).map(|(w, k)| w * k).collect();
    let stiffness = &(&d0.transpose() * &diagonal(&scaled)) * d0;

    let top = 0.5f64.powi(d as i32);
    let mut load = vec![0.0; m.count(0)];
    for a in 0..m.count(d) {
        for &n in m.mesh().nodes_of(CellId::new(d, a)) {
            load[n] += top * p.f.values()[a];
        }
    }
    let facet = 0.5f64.powi(d as i32 - 1);
    let mut neumann_load = vec![0.0; m.count(0)];
    for (&c, &g) in p.neumann.facets.iter().zip(&p.neumann.values) {
        let s = p.outward_sign(c);
        for &n in m.mesh().nodes_of(CellId::new(d - 1, c)) {
            neumann_load[n] += facet * s * g;
        }
    }

    let advection = match &p.v {
        Some(v) if p.has_advection() => {
            let mut pairing = CooMatrix::new(m.count(1), m.count(d - 1));
            for a in 0..m.count(d) {
                for pr in m.mesh().orthogonal_pairs(CellId::new(d, a), 1, d - 1)? {
                    pairing.push(pr.left.index, pr.right.index, top * f64::from(pr.sign));
                }
            }
            let pairing = CsrMatrix::from(&pairing);
            let x = advective_flux_matrix(p, v)?;
            Some(&(&d0.transpose() * &pairing) * &x)
        }
        _ => None,
    };

    let dir = p.dirichlet_mask();
    let free = (0..m.count(0)).filter(|&n| !dir[n]).collect();
    Ok(PrimalSystem { stiffness, advection, load, neumann_load, free })
}

/// Reduces `L u = r` to the free rows with `u = g` on the fixed ones.
pub(crate) fn eliminate(l: &CsrMatrix<f64>, rhs: &[f64], free: &[usize], fixed: &[f64]) -> (CsrMatrix<f64>, Vec<f64>) {
    let n = l.nrows();
    let map = index_map(n, free);
    let reduced = submatrix(l, &map, &map, (free.len(), free.len()));
    let mut r: Vec<f64> = free.iter().map(|&i| rhs[i]).collect();
    for (i, j, &v) in l.triplet_iter() {
        if let (Some(ri), None) = (map[i], map[j]) {
            r[ri] -= v * fixed[j];
        }
    }
    (reduced, r)
}

/// `q = −★_1 κ̃ δ_0 u + π̃u ⌣ v` off `Γ_N`, `g_N` on `Γ_N`.
pub fn primal_flow_rate(p: &TransportProblem, u: &[f64]) -> Result<Vec<f64>> {
    let mut q = primal_flux(p, u)?;
    for (&c, &g) in p.neumann.facets.iter().zip(&p.neumann.values) {
        q[c] = g;
    }
    Ok(q)
}

/// `−★_1 κ̃ δ_0 u + π̃u ⌣ v` on every face, `Γ_N` included.
pub fn primal_flux(p: &TransportProblem, u: &[f64]) -> Result<Vec<f64>> {
    let m = &p.mesh;
    let du = spmv(m.coboundary_matrix(0)?, u);
    let kdu: Vec<f64> = du.iter().zip(&p.kappa_dual).map(|(x, k)| -x * k).collect();
    let mut q = spmv(m.hodge_star_matrix(1)?, &kdu);
    if let Some(v) = p.v.as_ref().filter(|_| p.has_advection()) {
        let adv = spmv(&advective_flux_matrix(p, v)?, u);
        q.iter_mut().zip(adv).for_each(|(a, b)| *a += b);
    }
    Ok(q)
}

pub fn solve_primal_steady(p: &TransportProblem) -> Result<SolveResult> {
    let sys = assemble_primal(p)?;
    let g = p.dirichlet_nodal();
    let (l, r) = eliminate(&sys.operator(), &sys.rhs(), &sys.free, &g);
    let fact = if sys.advection.is_some() { Factorization::general(l)? } else { Factorization::spd(l)? };
    let (x, stats) = fact.solve(&r)?;
    let mut u = g;
    for (k, &n) in sys.free.iter().enumerate() {
        u[n] = x[k];
    }
    let q = primal_flow_rate(p, &u)?;
    let d = p.dim();
    Ok(SolveResult {
        u: Cochain::new(0, u),
        q: Cochain::new(d - 1, q),
        u_tilde: None,
        stats: vec![stats],
        series: Vec::new(),
    })
}
