//! θ-method time stepping for both formulations.

use super::linalg::Factorization;
use super::mixed::{assemble_mixed, flow_from_dual, initial_flow_rate, mixed_potential, reduce};
use super::primal::{assemble_primal, eliminate, primal_flow_rate};
use super::problem::{TransientParams, TransportProblem};
use super::{SolveResult, TimeStep};
use crate::complex::Cochain;
use crate::error::{CmcError, Result};
use crate::operators::{diagonal, spmv};

fn params(p: &TransportProblem) -> Result<&TransientParams> {
    p.validate()?;
    p.transient.as_ref().ok_or_else(|| CmcError::InvalidProblem("transient parameters missing".into()))
}

/// `★_0(π̃ u)`.
fn primal_amount(p: &TransportProblem, u: &[f64]) -> Result<Vec<f64>> {
    let pu: Vec<f64> = u.iter().zip(&p.capacity_dual).map(|(u, c)| u * c).collect();
    Ok(spmv(p.mesh.hodge_star_matrix(0)?, &pu))
}

/// Steps `(M/Δt + θL) u¹ = (M/Δt − (1−θ)L) u⁰ + F − G` with `L = A_D − A_A`,
/// `M = diag(⟨·,·⟩_0 π̃)` and `u = g_D` on Dirichlet nodes at every step.
pub fn solve_primal_transient(p: &TransportProblem) -> Result<SolveResult> {
    let tp = params(p)?;
    let sys = assemble_primal(p)?;
    let l = sys.operator();
    let mass: Vec<f64> = p.mesh.weights(0).iter().zip(&p.capacity_dual).map(|(w, c)| w / tp.dt * c).collect();
    let step = &diagonal(&mass) + &(l.clone() * tp.theta);
    let g = p.dirichlet_nodal();
    let rhs0 = sys.rhs();
    let (reduced, _) = eliminate(&step, &rhs0, &sys.free, &g);
    let fact = if sys.advection.is_some() { Factorization::general(reduced)? } else { Factorization::spd(reduced)? };

    let d = p.dim();
    let mut u = tp.u0.clone();
    let mut series = Vec::with_capacity(tp.steps + 1);
    series.push(TimeStep {
        t: tp.t0,
        q: primal_flow_rate(p, &u)?,
        amount: primal_amount(p, &u)?,
        u_tilde: None,
        u: u.clone(),
    });
    let mut stats = Vec::with_capacity(tp.steps);
    for n in 1..=tp.steps {
        let lu = spmv(&l, &u);
        let rhs: Vec<f64> = (0..u.len()).map(|i| mass[i] * u[i] - (1.0 - tp.theta) * lu[i] + rhs0[i]).collect();
        let (_, r) = eliminate(&step, &rhs, &sys.free, &g);
        let (x, s) = fact.solve(&r)?;
        let mut next = g.clone();
        for (k, &i) in sys.free.iter().enumerate() {
            next[i] = x[k];
        }
        u = next;
        stats.push(s);
        series.push(TimeStep {
            t: tp.t0 + n as f64 * tp.dt,
            q: primal_flow_rate(p, &u)?,
            amount: primal_amount(p, &u)?,
            u_tilde: None,
            u: u.clone(),
        });
    }
    let last = series.last().expect("initial state");
    Ok(SolveResult {
        u: Cochain::new(0, last.u.clone()),
        q: Cochain::new(d - 1, last.q.clone()),
        u_tilde: None,
        stats,
        series,
    })
}

/// Mixed θ-method from `ũ⁰ = ★_0 u⁰` and its consistent initial flow rate.
pub fn solve_mixed_transient(p: &TransportProblem) -> Result<SolveResult> {
    let tp = params(p)?;
    let ut0 = spmv(p.mesh.hodge_star_matrix(0)?, &tp.u0);
    let sys = assemble_mixed(p)?;
    let q0 = initial_flow_rate(p, &sys, &ut0)?;
    solve_mixed_transient_from(p, ut0, q0)
}

/// Mixed θ-method from an explicit initial state `(ũ⁰, q⁰)`:
/// `(C/Δt + θS) ũ¹ = (C/Δt) ũ⁰ + θ r + (1−θ)(F − B q⁰)`, with `S`, `r` the
/// Schur complement and its right-hand side.
pub fn solve_mixed_transient_from(p: &TransportProblem, ut0: Vec<f64>, q0: Vec<f64>) -> Result<SolveResult> {
    let tp = params(p)?;
    let d = p.dim();
    if ut0.len() != p.mesh.count(d) || q0.len() != p.mesh.count(d - 1) {
        return Err(CmcError::DimensionMismatch("initial mixed state does not match the mesh".into()));
    }
    let sys = assemble_mixed(p)?;
    let red = reduce(p, &sys);
    let mass: Vec<f64> = sys.c.iter().map(|c| c / tp.dt).collect();
    let step = &diagonal(&mass) + &(red.schur.clone() * tp.theta);
    let fact = if sys.b_adv.is_some() { Factorization::general(step)? } else { Factorization::spd(step)? };

    let amount = |ut: &[f64]| ut.iter().zip(&p.capacity).map(|(u, c)| u * c).collect::<Vec<f64>>();
    let (mut ut, mut q) = (ut0, q0);
    let mut series = Vec::with_capacity(tp.steps + 1);
    series.push(TimeStep {
        t: tp.t0,
        u: mixed_potential(p, &ut)?,
        q: q.clone(),
        u_tilde: Some(ut.clone()),
        amount: amount(&ut),
    });
    let mut stats = Vec::with_capacity(tp.steps);
    for n in 1..=tp.steps {
        let bq = spmv(&sys.b, &q);
        let rhs: Vec<f64> = (0..ut.len())
            .map(|i| mass[i] * ut[i] + tp.theta * red.rhs[i] + (1.0 - tp.theta) * (sys.f[i] - bq[i]))
            .collect();
        let (x, s) = fact.solve(&rhs)?;
        ut = x;
        q = flow_from_dual(p, &sys, &red, &ut);
        stats.push(s);
        series.push(TimeStep {
            t: tp.t0 + n as f64 * tp.dt,
            u: mixed_potential(p, &ut)?,
            q: q.clone(),
            u_tilde: Some(ut.clone()),
            amount: amount(&ut),
        });
    }
    let last = series.last().expect("initial state");
    Ok(SolveResult {
        u: Cochain::new(0, last.u.clone()),
        q: Cochain::new(d - 1, last.q.clone()),
        u_tilde: Some(Cochain::new(d, ut)),
        stats,
        series,
    })
}
