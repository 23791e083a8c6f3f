//! Manufactured transport problems with known exact solutions.
//!
//! Each entry fixes a chart, a potential `u`, a constant conductivity `κ`
//! and the derived forms `du`, `q = −★κ du` and `f = dq`, all written in
//! chart coordinates:
//!
//! | name | chart | u | κ | q | f |
//! |---|---|---|---|---|---|
//! | cube-quadratic | xyz | x²+y²+z² | 2 | −4z dx∧dy + 4y dx∧dz − 4x dy∧dz | −12 |
//! | disk-quadratic | (r, φ) | r² | 1 | −2r² dφ | −4r dr∧dφ |
//! | hemisphere-linear | (θ, φ) | θ | 2 | −2 sinθ dφ | −2 cosθ dθ∧dφ |
//! | rectangle-linear | xy | 5x | 6 | −30 dy | 0 |
//!
//! Boundary data are traces of the exact fields: `g_D = R_0 u` on the nodes
//! of `Γ_D`, `g_N = R_{D-1} q` on `Γ_N`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::forms::{Component, FormField};
use super::generators::{cube_mesh, hemisphere_mesh, polar_disk_mesh, rect_mesh};
use super::tess::PlanarTessellation;
use super::voronoi::voronoi_rectangle;
use super::EmbeddedMesh;
use crate::complex::Cochain;
use crate::error::{CmcError, Result};
use crate::solvers::{
    primal_flux, relative_error, solve_mixed_steady, solve_primal_steady, Dirichlet, MixedMethod, Neumann,
    TransportProblem,
};

pub const NAMES: [&str; 4] = ["cube-quadratic", "disk-quadratic", "hemisphere-linear", "rectangle-linear"];

/// Seed of the default 10-cell Voronoi tessellation for `rectangle-linear`.
pub const RECTANGLE_SEED: u64 = 1;
pub const RECTANGLE_CELLS: usize = 10;

const SIDE_TOL: f64 = 1e-9;

/// Continuum data of a catalog problem.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub kappa: f64,
    pub u: FormField,
    pub du: FormField,
    pub q: FormField,
    pub f: FormField,
}

#[derive(Clone, Debug, Default)]
pub struct CatalogOptions {
    /// Mesh resolution: `[n]` or `[nx, ny, nz]` for the cube, `[nr, nφ]`,
    /// `[nθ, nφ]`, or `[nx, ny]` for a structured rectangle.
    pub resolution: Option<Vec<usize>>,
    /// Voronoi seed for `rectangle-linear`.
    pub seed: Option<u64>,
    /// Imported tessellation for `rectangle-linear`.
    pub tess: Option<PlanarTessellation>,
}

/// A catalog entry discretized on a mesh.
#[derive(Clone, Debug)]
pub struct CatalogProblem {
    pub name: String,
    pub mesh: EmbeddedMesh,
    pub exact: ExactSolution,
    pub problem: TransportProblem,
    /// `R_0 u`.
    pub exact_u: Cochain,
    /// `R_{D-1} q`.
    pub exact_q: Cochain,
}

fn c(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Component {
    Arc::new(f)
}

fn unknown(name: &str) -> CmcError {
    CmcError::UnknownProblem(format!("`{name}` (known: {})", NAMES.join(", ")))
}

pub fn exact_solution(name: &str) -> Result<ExactSolution> {
    Ok(match name {
        "cube-quadratic" => ExactSolution {
            kappa: 2.0,
            u: FormField::scalar(3, |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2]),
            du: FormField::new(3, 1, vec![c(|x| 2.0 * x[0]), c(|x| 2.0 * x[1]), c(|x| 2.0 * x[2])])?,
            q: FormField::new(3, 2, vec![c(|x| -4.0 * x[2]), c(|x| 4.0 * x[1]), c(|x| -4.0 * x[0])])?,
            f: FormField::top(3, |_| -12.0),
        },
        "disk-quadratic" => ExactSolution {
            kappa: 1.0,
            u: FormField::scalar(2, |x| x[0] * x[0]),
            du: FormField::new(2, 1, vec![c(|x| 2.0 * x[0]), c(|_| 0.0)])?,
            q: FormField::new(2, 1, vec![c(|_| 0.0), c(|x| -2.0 * x[0] * x[0])])?,
            f: FormField::top(2, |x| -4.0 * x[0]),
        },
        "hemisphere-linear" => ExactSolution {
            kappa: 2.0,
            u: FormField::scalar(2, |x| x[0]),
            du: FormField::new(2, 1, vec![c(|_| 1.0), c(|_| 0.0)])?,
            q: FormField::new(2, 1, vec![c(|_| 0.0), c(|x| -2.0 * x[0].sin())])?,
            f: FormField::top(2, |x| -2.0 * x[0].cos()),
        },
        "rectangle-linear" => ExactSolution {
            kappa: 6.0,
            u: FormField::scalar(2, |x| 5.0 * x[0]),
            du: FormField::new(2, 1, vec![c(|_| 5.0), c(|_| 0.0)])?,
            q: FormField::new(2, 1, vec![c(|_| 0.0), c(|_| -30.0)])?,
            f: FormField::top(2, |_| 0.0),
        },
        other => return Err(unknown(other)),
    })
}

/// Mesh for a catalog entry; defaults are cube 2³, the 4×3 disk (4 sectors,
/// 3 rings), hemisphere 6×6 and a 10-cell Voronoi tessellation of
/// `[0, 20] × [0, 15]`.
///
/// Four sectors put a ray on `x = 0`, so no boundary arc straddles `Γ_D`
/// and `Γ_N`.
pub fn catalog_mesh(name: &str, opts: &CatalogOptions) -> Result<EmbeddedMesh> {
    let res = opts.resolution.as_deref();
    let bad = |n: usize| CmcError::InvalidProblem(format!("`{name}` takes {n} resolution values"));
    match name {
        "cube-quadratic" => match res {
            None => cube_mesh(2, 2, 2),
            Some(&[n]) => cube_mesh(n, n, n),
            Some(&[nx, ny, nz]) => cube_mesh(nx, ny, nz),
            Some(_) => Err(bad(3)),
        },
        "disk-quadratic" => match res {
            None => polar_disk_mesh(3, 4),
            Some(&[nr, nphi]) => polar_disk_mesh(nr, nphi),
            Some(_) => Err(bad(2)),
        },
        "hemisphere-linear" => match res {
            None => hemisphere_mesh(6, 6),
            Some(&[nt, nphi]) => hemisphere_mesh(nt, nphi),
            Some(_) => Err(bad(2)),
        },
        "rectangle-linear" => match (&opts.tess, res) {
            (Some(t), _) => t.to_embedded(),
            (None, Some(&[nx, ny])) => rect_mesh(20.0, 15.0, nx, ny),
            (None, Some(_)) => Err(bad(2)),
            (None, None) => {
                voronoi_rectangle(20.0, 15.0, RECTANGLE_CELLS, opts.seed.unwrap_or(RECTANGLE_SEED))?.to_embedded()
            }
        },
        other => Err(unknown(other)),
    }
}

/// Dirichlet facets of a catalog entry: cube `y, z ∈ {0, 1}`, disk `x ≥ 0`,
/// hemisphere `y ≤ 0`, rectangle `x ∈ {0, 20}`.
///
/// On the disk and hemisphere a boundary facet belongs to `Γ_D` when its
/// chart-midpoint lies strictly inside the half-circle.
pub fn dirichlet_facets(name: &str, mesh: &EmbeddedMesh) -> Result<Vec<usize>> {
    let near = |a: f64, b: f64| (a - b).abs() < SIDE_TOL;
    Ok(match name {
        "cube-quadratic" => {
            mesh.boundary_facets_where(|x, _| near(x[1], 0.0) || near(x[1], 1.0) || near(x[2], 0.0) || near(x[2], 1.0))
        }
        "disk-quadratic" => mesh.boundary_facets_where(|_, p| p[0] > SIDE_TOL),
        "hemisphere-linear" => mesh.boundary_facets_where(|_, p| p[1] < -SIDE_TOL),
        "rectangle-linear" => mesh.boundary_facets_where(|x, _| near(x[0], 0.0) || near(x[0], 20.0)),
        other => return Err(unknown(other)),
    })
}

/// Discretizes `exact` on `mesh` with the given Dirichlet facets.
pub fn discretize(name: &str, mesh: EmbeddedMesh, exact: ExactSolution, gamma_d: Vec<usize>) -> Result<CatalogProblem> {
    let d = mesh.dim();
    let exact_u = mesh.derham(&exact.u)?;
    let exact_q = mesh.derham(&exact.q)?;
    let f = mesh.derham(&exact.f)?;
    let riemannian = Arc::new(mesh.riemannian()?);
    let dirichlet = Dirichlet::from_facets(&riemannian, gamma_d, |n| exact_u.values()[n]);
    let neumann_facets: Vec<usize> = riemannian
        .boundary()
        .parent_cells(d - 1)
        .iter()
        .copied()
        .filter(|c| dirichlet.facets.binary_search(c).is_err())
        .collect();
    let neumann = Neumann::from_facets(neumann_facets, |c| exact_q.values()[c]);
    let mut problem = TransportProblem::new(riemannian, exact.kappa, f, dirichlet);
    problem.neumann = neumann;
    problem.validate()?;

    let mut mesh = mesh;
    let closed = |facets: &[usize]| {
        let mut cells = vec![Vec::new(); d + 1];
        cells[d - 1] = facets.to_vec();
        mesh.complex().closure_of(&cells)
    };
    let (dl, nl) = (closed(&problem.dirichlet.facets), closed(&problem.neumann.facets));
    mesh.set_label("dirichlet", dl)?;
    mesh.set_label("neumann", nl)?;
    Ok(CatalogProblem { name: name.to_string(), mesh, exact, problem, exact_u, exact_q })
}

pub fn catalog_with(name: &str, opts: &CatalogOptions) -> Result<CatalogProblem> {
    let exact = exact_solution(name)?;
    let mesh = catalog_mesh(name, opts)?;
    let gamma_d = dirichlet_facets(name, &mesh)?;
    discretize(name, mesh, exact, gamma_d)
}

pub fn catalog(name: &str) -> Result<CatalogProblem> {
    catalog_with(name, &CatalogOptions::default())
}

/// Relative errors of both formulations against the exact cochains.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ErrorRow {
    pub primal_u: f64,
    pub mixed_u: f64,
    /// Primal flow rate with `g_N` copied onto `Γ_N`.
    pub primal_q: f64,
    pub mixed_q: f64,
    /// Primal flow rate computed from `u` on every face, `Γ_N` included.
    pub primal_q_computed: f64,
}

/// Reference errors `[primal u, mixed u, primal q, mixed q]` of the default
/// catalog meshes. The primal flow value was obtained without the `g_N`
/// copy, so it compares against [`ErrorRow::primal_q_computed`].
pub fn reference_errors(name: &str) -> Option<[f64; 4]> {
    match name {
        "cube-quadratic" => Some([0.0, 0.0467428, 0.129099, 7.2207e-16]),
        "disk-quadratic" => Some([0.0243588, 0.0802977, 0.0581986, 4.72913e-06]),
        "hemisphere-linear" => Some([0.0190061, 0.0256953, 0.0161111, 0.000889324]),
        _ => None,
    }
}

/// Solves both formulations steadily and reports their errors.
pub fn error_row(c: &CatalogProblem, method: MixedMethod) -> Result<ErrorRow> {
    let p = solve_primal_steady(&c.problem)?;
    let m = solve_mixed_steady(&c.problem, method)?;
    let raw = Cochain::new(c.exact_q.dim(), primal_flux(&c.problem, p.u.values())?);
    Ok(ErrorRow {
        primal_u: relative_error(&p.u, &c.exact_u)?,
        mixed_u: relative_error(&m.u, &c.exact_u)?,
        primal_q: relative_error(&p.q, &c.exact_q)?,
        mixed_q: relative_error(&m.q, &c.exact_q)?,
        primal_q_computed: relative_error(&raw, &c.exact_q)?,
    })
}

/// Expected total measure of the catalog domain.
pub fn domain_measure(name: &str) -> Result<f64> {
    Ok(match name {
        "cube-quadratic" => 1.0,
        "disk-quadratic" => PI,
        "hemisphere-linear" => 2.0 * PI,
        "rectangle-linear" => 300.0,
        other => return Err(unknown(other)),
    })
}
