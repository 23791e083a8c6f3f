use std::sync::Arc;

use crate::complex::{CellId, Cochain};
use crate::error::{CmcError, Result};
use crate::operators::RiemannianMesh;

/// Prescribed potential on the Dirichlet part of the boundary.
///
/// `facets` are the `(D-1)`-cells of `Γ_D`; `nodes` lists the nodes of their
/// closure in increasing order and `values` holds `g_D` on them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dirichlet {
    pub facets: Vec<usize>,
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

/// Prescribed flow rate `g_N` on the `(D-1)`-cells of `Γ_N`, oriented as in `K`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Neumann {
    pub facets: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransientParams {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub theta: f64,
    /// Initial potential, one value per node.
    pub u0: Vec<f64>,
}

/// Scalar transport data on a Riemannian quasi-cubical mesh.
#[derive(Clone, Debug)]
pub struct TransportProblem {
    pub mesh: Arc<RiemannianMesh>,
    /// `κ̃` per 1-cell.
    pub kappa_dual: Vec<f64>,
    /// `κ` per `(D-1)`-cell.
    pub kappa: Vec<f64>,
    /// `π̃` per node.
    pub capacity_dual: Vec<f64>,
    /// `π` per `D`-cell.
    pub capacity: Vec<f64>,
    /// Production rate, a `D`-cochain.
    pub f: Cochain,
    /// Volumetric flow rate, a `(D-1)`-cochain.
    pub v: Option<Cochain>,
    pub dirichlet: Dirichlet,
    pub neumann: Neumann,
    pub transient: Option<TransientParams>,
}

impl Dirichlet {
    /// `Γ_D` from its facets, with `g_D` sampled per node of their closure.
    pub fn from_facets(mesh: &RiemannianMesh, mut facets: Vec<usize>, g: impl Fn(usize) -> f64) -> Self {
        facets.sort_unstable();
        facets.dedup();
        let d = mesh.dim();
        let mut nodes: Vec<usize> =
            facets.iter().flat_map(|&c| mesh.mesh().nodes_of(CellId::new(d - 1, c)).to_vec()).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let values = nodes.iter().map(|&n| g(n)).collect();
        Self { facets, nodes, values }
    }
}

impl Neumann {
    pub fn from_facets(mut facets: Vec<usize>, g: impl Fn(usize) -> f64) -> Self {
        facets.sort_unstable();
        facets.dedup();
        let values = facets.iter().map(|&c| g(c)).collect();
        Self { facets, values }
    }
}

impl TransportProblem {
    /// Unit capacities, no advection, steady; `Γ_N` is the rest of the boundary with `g_N = 0`.
    pub fn new(mesh: Arc<RiemannianMesh>, kappa: f64, f: Cochain, dirichlet: Dirichlet) -> Self {
        let d = mesh.dim();
        let facets: Vec<usize> = mesh
            .boundary()
            .parent_cells(d - 1)
            .iter()
            .copied()
            .filter(|c| dirichlet.facets.binary_search(c).is_err())
            .collect();
        let neumann = Neumann::from_facets(facets, |_| 0.0);
        Self {
            kappa_dual: vec![kappa; mesh.count(1)],
            kappa: vec![kappa; mesh.count(d - 1)],
            capacity_dual: vec![1.0; mesh.count(0)],
            capacity: vec![1.0; mesh.count(d)],
            f,
            v: None,
            dirichlet,
            neumann,
            transient: None,
            mesh,
        }
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        let d = m.dim();
        let bad = |msg: String| Err(CmcError::InvalidProblem(msg));
        let sizes = [
            ("kappa_dual", self.kappa_dual.len(), m.count(1)),
            ("kappa", self.kappa.len(), m.count(d - 1)),
            ("capacity_dual", self.capacity_dual.len(), m.count(0)),
            ("capacity", self.capacity.len(), m.count(d)),
        ];
        for (name, got, want) in sizes {
            if got != want {
                return bad(format!("{name} has {got} entries, expected {want}"));
            }
        }
        for (name, vals) in [
            ("kappa_dual", &self.kappa_dual),
            ("kappa", &self.kappa),
            ("capacity_dual", &self.capacity_dual),
            ("capacity", &self.capacity),
        ] {
            if let Some(i) = vals.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
                return bad(format!("{name}[{i}] = {} is not positive", vals[i]));
            }
        }
        if self.f.dim() != d || self.f.len() != m.count(d) {
            return bad(format!("f must be a {d}-cochain on {} cells", m.count(d)));
        }
        if let Some(v) = &self.v {
            if v.dim() != d - 1 || v.len() != m.count(d - 1) {
                return bad(format!("v must be a {}-cochain on {} cells", d - 1, m.count(d - 1)));
            }
        }
        let dir = &self.dirichlet;
        let neu = &self.neumann;
        if dir.nodes.len() != dir.values.len() || neu.facets.len() != neu.values.len() {
            return bad("boundary cells and values differ in length".into());
        }
        if !dir.nodes.windows(2).all(|w| w[0] < w[1]) || !dir.facets.windows(2).all(|w| w[0] < w[1]) {
            return bad("Dirichlet cells must be strictly increasing".into());
        }
        if !neu.facets.windows(2).all(|w| w[0] < w[1]) {
            return bad("Neumann cells must be strictly increasing".into());
        }
        let boundary = m.boundary();
        let mut covered = vec![0u8; m.count(d - 1)];
        for &c in dir.facets.iter().chain(&neu.facets) {
            if c >= covered.len() || !boundary.contains(d - 1, c) {
                return bad(format!("{} is not a boundary cell", CellId::new(d - 1, c)));
            }
            covered[c] += 1;
        }
        for &c in boundary.parent_cells(d - 1) {
            if covered[c] != 1 {
                return bad(format!(
                    "{} is covered {} times by the Dirichlet and Neumann parts",
                    CellId::new(d - 1, c),
                    covered[c]
                ));
            }
        }
        let expected = Dirichlet::from_facets(m, dir.facets.clone(), |_| 0.0).nodes;
        if expected != dir.nodes {
            return bad("Dirichlet nodes must be exactly the nodes of the Dirichlet facets".into());
        }
        if let Some(t) = &self.transient {
            if !(t.dt > 0.0 && t.dt.is_finite()) {
                return bad(format!("time step {} must be positive", t.dt));
            }
            if !(0.0..=1.0).contains(&t.theta) {
                return bad(format!("theta = {} outside [0, 1]", t.theta));
            }
            if t.u0.len() != m.count(0) {
                return bad(format!("u0 has {} entries, expected {}", t.u0.len(), m.count(0)));
            }
        }
        Ok(())
    }

    /// `g_D` extended by zero to all nodes.
    pub fn dirichlet_nodal(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.mesh.count(0)];
        for (&n, &v) in self.dirichlet.nodes.iter().zip(&self.dirichlet.values) {
            g[n] = v;
        }
        g
    }

    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.mesh.count(0)];
        for &n in &self.dirichlet.nodes {
            m[n] = true;
        }
        m
    }

    pub fn neumann_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.mesh.count(self.dim() - 1)];
        for &c in &self.neumann.facets {
            m[c] = true;
        }
        m
    }

    pub fn has_advection(&self) -> bool {
        self.v.as_ref().is_some_and(|v| v.values().iter().any(|&x| x != 0.0))
    }

    /// Relative orientation of a boundary `(D-1)`-cell in its unique top coface.
    pub fn outward_sign(&self, facet: usize) -> f64 {
        let d = self.dim();
        let cof = self.mesh.complex().cofaces(CellId::new(d - 1, facet));
        debug_assert_eq!(cof.len(), 1);
        f64::from(cof[0].1)
    }
}
