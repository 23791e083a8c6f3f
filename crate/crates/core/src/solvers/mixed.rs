//! Mixed weak formulation: flow rate on `(D-1)`-cells and dual potential on
//! `D`-cells; the nodal potential comes from `★_D`.

use std::str::FromStr;

use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};

use super::linalg::{index_map, submatrix, Factorization, SolveStats};
use super::problem::TransportProblem;
use super::SolveResult;
use crate::complex::{CellId, Cochain};
use crate::error::{CmcError, Result};
use crate::operators::{cup_right_matrix, diagonal, spmv, spmv_transpose};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixedMethod {
    /// Schur complement `B A⁻¹ Bᵀ` on the dual potential.
    #[default]
    Eliminate,
    /// Full indefinite block system.
    Saddle,
}

impl FromStr for MixedMethod {
    type Err = CmcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eliminate" => Ok(Self::Eliminate),
            "saddle" => Ok(Self::Saddle),
            other => Err(CmcError::InvalidProblem(format!("unknown mixed method `{other}`"))),
        }
    }
}

/// Assembled mixed operators on all `(D-1)`- and `D`-cells.
#[derive(Clone, Debug)]
pub struct MixedSystem {
    /// Diagonal of `A = diag(⟨·,·⟩_{D-1} / κ)`.
    pub a: Vec<f64>,
    /// `B_D = diag(⟨·,·⟩_D) δ_{D-1}`, `n_D × n_{D-1}`.
    pub b: CsrMatrix<f64>,
    /// `B_A` as the `n_{D-1} × n_D` block multiplying `ũ` next to `Bᵀ`.
    pub b_adv: Option<CsrMatrix<f64>>,
    /// Diagonal of `C = diag(π ⟨·,·⟩_D)`.
    pub c: Vec<f64>,
    /// `F = diag(⟨·,·⟩_D) f`.
    pub f: Vec<f64>,
    /// `G(r) = (tr r ⌣ g_D)[Γ_D]`, zero off `Γ_D`.
    pub g: Vec<f64>,
    /// Faces off `Γ_N`, in increasing order.
    pub free: Vec<usize>,
}

impl MixedSystem {
    /// `Bᵀ + B_A`.
    pub fn coupling(&self) -> CsrMatrix<f64> {
        let bt = self.b.transpose();
        match &self.b_adv {
            Some(a) => &bt + a,
            None => bt,
        }
    }
}

pub fn assemble_mixed(p: &TransportProblem) -> Result<MixedSystem> {
    p.validate()?;
    let m = &p.mesh;
    let d = m.dim();
    let wf = m.weights(d - 1);
    let wd = m.weights(d);
    let a: Vec<f64> = wf.iter().zip(&p.kappa).map(|(w, k)| w / k).collect();
    let b = &diagonal(wd) * m.coboundary_matrix(d - 1)?;
    let b_adv = match &p.v {
        Some(v) if p.has_advection() => {
            let x = cup_right_matrix(m.mesh(), 0, v)?;
            let star = m.hodge_star_matrix(d)?;
            Some(&(&(&diagonal(&a) * &x) * star) * &diagonal(&p.capacity))
        }
        _ => None,
    };
    let c = wd.iter().zip(&p.capacity).map(|(w, pi)| w * pi).collect();
    let f = wd.iter().zip(p.f.values()).map(|(w, f)| w * f).collect();

    let facet = 0.5f64.powi(d as i32 - 1);
    let gd = p.dirichlet_nodal();
    let mut g = vec![0.0; m.count(d - 1)];
    for &c in &p.dirichlet.facets {
        let nodes = m.mesh().nodes_of(CellId::new(d - 1, c));
        g[c] = p.outward_sign(c) * facet * nodes.iter().map(|&n| gd[n]).sum::<f64>();
    }
    let neu = p.neumann_mask();
    let free = (0..m.count(d - 1)).filter(|&c| !neu[c]).collect();
    Ok(MixedSystem { a, b, b_adv, c, f, g, free })
}

/// Free-face blocks and the Schur complement.
pub(crate) struct Reduced {
    pub b_free: CsrMatrix<f64>,
    pub e_free: CsrMatrix<f64>,
    pub a_free: Vec<f64>,
    pub g_free: Vec<f64>,
    /// `F − B_N g_N`.
    pub load: Vec<f64>,
    pub schur: CsrMatrix<f64>,
    /// `r = F − B_N g_N + B_f A⁻¹ G_f`.
    pub rhs: Vec<f64>,
}

pub(crate) fn reduce(p: &TransportProblem, sys: &MixedSystem) -> Reduced {
    let d = p.dim();
    let (nf, nd) = (p.mesh.count(d - 1), p.mesh.count(d));
    let faces = index_map(nf, &sys.free);
    let cells: Vec<Option<usize>> = (0..nd).map(Some).collect();
    let b_free = submatrix(&sys.b, &cells, &faces, (nd, sys.free.len()));
    let e_free = submatrix(&sys.coupling(), &faces, &cells, (sys.free.len(), nd));
    let a_free: Vec<f64> = sys.free.iter().map(|&c| sys.a[c]).collect();
    let g_free: Vec<f64> = sys.free.iter().map(|&c| sys.g[c]).collect();
    let mut qn = vec![0.0; nf];
    for (&c, &g) in p.neumann.facets.iter().zip(&p.neumann.values) {
        qn[c] = g;
    }
    let neumann_flux = spmv(&sys.b, &qn);
    let inv: Vec<f64> = a_free.iter().map(|x| 1.0 / x).collect();
    let b_ainv = &b_free * &diagonal(&inv);
    let schur = &b_ainv * &e_free;
    let correction = spmv(&b_ainv, &g_free);
    let load: Vec<f64> = (0..nd).map(|i| sys.f[i] - neumann_flux[i]).collect();
    let rhs = load.iter().zip(&correction).map(|(l, c)| l + c).collect();
    Reduced { b_free, e_free, a_free, g_free, load, schur, rhs }
}

/// `q` on all faces from `ũ`: `A⁻¹((Bᵀ + B_A)_f ũ − G_f)` on free faces, `g_N` on `Γ_N`.
pub(crate) fn flow_from_dual(p: &TransportProblem, sys: &MixedSystem, red: &Reduced, ut: &[f64]) -> Vec<f64> {
    let ef = spmv(&red.e_free, ut);
    let mut q = vec![0.0; p.mesh.count(p.dim() - 1)];
    for (k, &c) in sys.free.iter().enumerate() {
        q[c] = (ef[k] - red.g_free[k]) / red.a_free[k];
    }
    for (&c, &g) in p.neumann.facets.iter().zip(&p.neumann.values) {
        q[c] = g;
    }
    q
}

/// `u = ★_D ũ` off `Γ_D`, `g_D` on `Γ_D`.
pub fn mixed_potential(p: &TransportProblem, ut: &[f64]) -> Result<Vec<f64>> {
    let mut u = spmv(p.mesh.hodge_star_matrix(p.dim())?, ut);
    for (&n, &g) in p.dirichlet.nodes.iter().zip(&p.dirichlet.values) {
        u[n] = g;
    }
    Ok(u)
}

pub fn solve_mixed_steady(p: &TransportProblem, method: MixedMethod) -> Result<SolveResult> {
    let sys = assemble_mixed(p)?;
    let red = reduce(p, &sys);
    let advective = sys.b_adv.is_some();
    let (ut, q, stats) = match method {
        MixedMethod::Eliminate => {
            let fact =
                if advective { Factorization::general(red.schur.clone())? } else { Factorization::spd(red.schur.clone())? };
            let (ut, stats) = fact.solve(&red.rhs)?;
            let q = flow_from_dual(p, &sys, &red, &ut);
            (ut, q, stats)
        }
        MixedMethod::Saddle => {
            let (ut, qf, stats) = saddle(&red)?;
            let mut q = flow_from_dual(p, &sys, &red, &ut);
            for (k, &c) in sys.free.iter().enumerate() {
                q[c] = qf[k];
            }
            (ut, q, stats)
        }
    };
    let u = mixed_potential(p, &ut)?;
    let d = p.dim();
    Ok(SolveResult {
        u: Cochain::new(0, u),
        q: Cochain::new(d - 1, q),
        u_tilde: Some(Cochain::new(d, ut)),
        stats: vec![stats],
        series: Vec::new(),
    })
}

/// `[[A_ff, −E_f], [−B_f, 0]] [q_f; ũ] = [−G_f; −(F − B_N g_N)]`.
fn saddle(red: &Reduced) -> Result<(Vec<f64>, Vec<f64>, SolveStats)> {
    let nf = red.a_free.len();
    let nd = red.b_free.nrows();
    let mut coo = CooMatrix::new(nf + nd, nf + nd);
    for (k, &a) in red.a_free.iter().enumerate() {
        coo.push(k, k, a);
    }
    for (i, j, &v) in red.e_free.triplet_iter() {
        coo.push(i, nf + j, -v);
    }
    for (i, j, &v) in red.b_free.triplet_iter() {
        coo.push(nf + i, j, -v);
    }
    let rhs: Vec<f64> = red.g_free.iter().chain(&red.load).map(|x| -x).collect();
    let (x, stats) = Factorization::general(CsrMatrix::from(&coo))?.solve(&rhs)?;
    Ok((x[nf..].to_vec(), x[..nf].to_vec(), stats))
}

/// Largest differences in `(u, q)` between the two mixed solution methods.
pub fn mixed_method_gap(p: &TransportProblem) -> Result<(f64, f64)> {
    let a = solve_mixed_steady(p, MixedMethod::Eliminate)?;
    let b = solve_mixed_steady(p, MixedMethod::Saddle)?;
    let gap = |x: &Cochain, y: &Cochain| x.values().iter().zip(y.values()).fold(0.0f64, |m, (s, t)| m.max((s - t).abs()));
    let ua = a.u_tilde.as_ref().expect("mixed result");
    let ub = b.u_tilde.as_ref().expect("mixed result");
    Ok((gap(ua, ub).max(gap(&a.u, &b.u)), gap(&a.q, &b.q)))
}

/// Initial flow rate for a dual potential: `κ δ★_D ũ + (★_D πũ) ⌣ v`,
/// one-sided on boundary faces, then `g_N` on `Γ_N`.
pub fn initial_flow_rate(p: &TransportProblem, sys: &MixedSystem, ut: &[f64]) -> Result<Vec<f64>> {
    let mut q: Vec<f64> = spmv_transpose(&sys.b, ut).iter().zip(&sys.a).map(|(x, a)| x / a).collect();
    if let Some(v) = p.v.as_ref().filter(|_| p.has_advection()) {
        let d = p.dim();
        let pu: Vec<f64> = ut.iter().zip(&p.capacity).map(|(u, c)| u * c).collect();
        let nodal = spmv(p.mesh.hodge_star_matrix(d)?, &pu);
        let adv = spmv(&cup_right_matrix(p.mesh.mesh(), 0, v)?, &nodal);
        q.iter_mut().zip(adv).for_each(|(a, b)| *a += b);
    }
    for (&c, &g) in p.neumann.facets.iter().zip(&p.neumann.values) {
        q[c] = g;
    }
    Ok(q)
}
