use std::sync::Arc;

use cmc::geometry::catalog::{catalog, catalog_with, CatalogOptions, NAMES};
use cmc::io::{load_problem, write_mesh, write_problem, MeshFile, ProblemFile};
use cmc::solvers::{
    primal_flux, relative_errors, solve_mixed_steady, solve_mixed_transient, solve_primal_steady,
    solve_primal_transient, solve_steady, Formulation, MixedMethod, TransientParams, TransportProblem,
};
use cmc::Cochain;

fn gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// The mixed flow rate balances production on every top cell: `δq = f`.
#[test]
fn mixed_flow_is_locally_conservative() {
    for name in NAMES {
        let c = catalog(name).unwrap();
        let m = solve_mixed_steady(&c.problem, MixedMethod::Eliminate).unwrap();
        let dq = c.mesh.complex().coboundary(&m.q).unwrap();
        let scale = c.problem.f.max_abs().max(m.q.max_abs());
        assert!(gap(dq.values(), c.problem.f.values()) <= 1e-10 * scale, "{name}");
    }
}

/// A linear potential is reproduced exactly on a structured rectangle.
#[test]
fn linear_potential_is_exact_on_a_grid() {
    let opts = CatalogOptions { resolution: Some(vec![4, 3]), ..Default::default() };
    let c = catalog_with("rectangle-linear", &opts).unwrap();
    for formulation in [Formulation::Primal, Formulation::Mixed] {
        let r = solve_steady(&c.problem, formulation, MixedMethod::Eliminate).unwrap();
        let e = relative_errors(&r, &c.exact_u, &c.exact_q).unwrap();
        assert!(e.u_rel < 1e-12 && e.q_rel < 1e-12, "{formulation:?}: {e:?}");
    }
}

#[test]
fn prescribed_neumann_flux_is_copied_by_the_primal_solver() {
    let c = catalog("disk-quadratic").unwrap();
    let r = solve_primal_steady(&c.problem).unwrap();
    let raw = primal_flux(&c.problem, r.u.values()).unwrap();
    for (&f, &g) in c.problem.neumann.facets.iter().zip(&c.problem.neumann.values) {
        assert_eq!(r.q.values()[f], g);
    }
    let interior: Vec<usize> = (0..raw.len()).filter(|i| c.problem.neumann.facets.binary_search(i).is_err()).collect();
    for i in interior {
        assert_eq!(r.q.values()[i], raw[i]);
    }
}

#[test]
fn problem_files_reproduce_the_catalog_solution() {
    let dir = tempfile::tempdir().unwrap();
    let c = catalog("hemisphere-linear").unwrap();
    write_mesh(dir.path().join("mesh.json"), &MeshFile::from_embedded(&c.mesh).unwrap()).unwrap();
    write_problem(dir.path().join("problem.json"), &ProblemFile::from_catalog(&c, "mesh.json")).unwrap();
    let (file, _, p) = load_problem(dir.path().join("problem.json")).unwrap();
    for formulation in [Formulation::Primal, Formulation::Mixed] {
        let a = solve_steady(&c.problem, formulation, MixedMethod::Eliminate).unwrap();
        let b = solve_steady(&p, formulation, MixedMethod::Eliminate).unwrap();
        assert!(gap(a.u.values(), b.u.values()) < 1e-12);
        assert!(gap(a.q.values(), b.q.values()) < 1e-12);
    }
    let (u, q) = file.exact_cochains(2).unwrap();
    assert_eq!(u, c.exact_u);
    assert_eq!(q, c.exact_q);
}

/// Backward Euler decays monotonically toward the steady state.
#[test]
fn implicit_steps_approach_the_steady_state_monotonically() {
    let c = catalog("disk-quadratic").unwrap();
    let steady = solve_primal_steady(&c.problem).unwrap();
    let mut p = c.problem.clone();
    p.transient = Some(TransientParams { t0: 0.0, dt: 0.1, steps: 30, theta: 1.0, u0: p.dirichlet_nodal() });
    let run = solve_primal_transient(&p).unwrap();
    let gaps: Vec<f64> = run.series.iter().map(|s| gap(&s.u, steady.u.values())).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-14), "{gaps:?}");
    assert_eq!(run.series.len(), 31);
    assert!((run.series[30].t - 3.0).abs() < 1e-12);
}

/// Mixed Crank-Nicolson on `u_t = u_xx`, `u(0) = sin πx`, converges at second order.
#[test]
fn mixed_crank_nicolson_is_second_order() {
    let m = cmc::geometry::generators::grid_mesh(&[1.0], &[16]).unwrap();
    let x: Vec<f64> = m.node_positions().iter().map(|p| p[0]).collect();
    let r = Arc::new(m.riemannian().unwrap());
    let ends = r.boundary().parent_cells(0).to_vec();
    let dirichlet = cmc::solvers::Dirichlet::from_facets(&r, ends, |_| 0.0);
    let base = TransportProblem::new(r.clone(), 1.0, Cochain::zeros(1, r.count(1)), dirichlet);
    let u0: Vec<f64> = x.iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
    let at = |steps: usize| {
        let mut p = base.clone();
        p.transient = Some(TransientParams { t0: 0.0, dt: 0.1 / steps as f64, steps, theta: 0.5, u0: u0.clone() });
        solve_mixed_transient(&p).unwrap().u_tilde.unwrap().into_values()
    };
    let reference = at(2560);
    let ratio = gap(&at(10), &reference) / gap(&at(20), &reference);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn invalid_problems_are_rejected_before_solving() {
    let c = catalog("disk-quadratic").unwrap();
    let mut p = c.problem.clone();
    p.kappa[0] = 0.0;
    assert!(solve_primal_steady(&p).is_err());
    let mut p = c.problem.clone();
    p.neumann.facets.pop();
    p.neumann.values.pop();
    assert!(solve_mixed_steady(&p, MixedMethod::Saddle).is_err());
}
