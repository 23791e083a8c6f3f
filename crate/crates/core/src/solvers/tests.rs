use std::sync::Arc;

use super::*;
use crate::geometry::catalog::catalog;
use crate::geometry::generators::grid_mesh;

/// Unit segment as two Forman edges, `u = 0` at `x = 0`, `u = 1` at `x = 1`.
fn segment_problem() -> TransportProblem {
    let mesh = grid_mesh(&[1.0], &[1]).unwrap();
    let m = Arc::new(mesh.riemannian().unwrap());
    let ends = m.boundary().parent_cells(0).to_vec();
    let dir = Dirichlet::from_facets(&m, ends, |n| mesh.center(crate::complex::CellId::new(0, n))[0]);
    TransportProblem::new(m, 1.0, Cochain::zeros(1, 2), dir)
}

#[test]
fn harmonic_interpolation_on_two_edges() {
    let p = segment_problem();
    let r = solve_primal_steady(&p).unwrap();
    assert_eq!(r.u.len(), 3);
    let mid = (0..3).find(|&n| !p.dirichlet.nodes.contains(&n)).unwrap();
    assert!((r.u.values()[mid] - 0.5).abs() < 1e-14);
}

#[test]
fn no_advection_without_velocity() {
    let c = catalog("disk-quadratic").unwrap();
    assert!(assemble_primal(&c.problem).unwrap().advection.is_none());
    let mut p = c.problem.clone();
    p.v = Some(Cochain::zeros(1, p.mesh.count(1)));
    assert!(assemble_primal(&p).unwrap().advection.is_none());
    assert!(assemble_mixed(&p).unwrap().b_adv.is_none());
}

#[test]
fn mixed_diagonal_is_positive_and_stencil_matches() {
    let c = catalog("disk-quadratic").unwrap();
    let sys = assemble_mixed(&c.problem).unwrap();
    assert!(sys.a.iter().all(|&a| a > 0.0));
    let delta = c.problem.mesh.coboundary_matrix(1).unwrap();
    let w = c.problem.mesh.weights(2);
    for (i, j, &v) in delta.triplet_iter() {
        assert!((sys.b.get_entry(i, j).unwrap().into_value() - w[i] * v).abs() < 1e-15);
    }
    assert_eq!(sys.b.nnz(), delta.nnz());
}

#[test]
fn relative_error_oracles() {
    let x = Cochain::new(0, vec![1.0, -2.0, 3.0]);
    assert_eq!(relative_error(&x, &x).unwrap(), 0.0);
    assert!((relative_error(&x.scaled(2.0), &x).unwrap() - 1.0).abs() < 1e-15);
    assert!(relative_error(&x, &Cochain::zeros(0, 3)).is_err());
}

#[test]
fn boundary_partition_is_checked() {
    let mut p = catalog("disk-quadratic").unwrap().problem;
    p.neumann.facets.pop();
    p.neumann.values.pop();
    assert!(matches!(p.validate(), Err(CmcError::InvalidProblem(_))));
}

#[test]
fn prescribed_values_are_copied_exactly() {
    let c = catalog("hemisphere-linear").unwrap();
    let p = &c.problem;
    let r = solve_primal_steady(p).unwrap();
    for (&n, &g) in p.dirichlet.nodes.iter().zip(&p.dirichlet.values) {
        assert_eq!(r.u.values()[n], g);
    }
    for (&f, &g) in p.neumann.facets.iter().zip(&p.neumann.values) {
        assert_eq!(r.q.values()[f], g);
    }
    let r = solve_mixed_steady(p, MixedMethod::Eliminate).unwrap();
    for (&n, &g) in p.dirichlet.nodes.iter().zip(&p.dirichlet.values) {
        assert_eq!(r.u.values()[n], g);
    }
    for (&f, &g) in p.neumann.facets.iter().zip(&p.neumann.values) {
        assert_eq!(r.q.values()[f], g);
    }
}
