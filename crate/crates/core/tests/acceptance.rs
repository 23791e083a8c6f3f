//! Acceptance criteria 1-9. Each test prints one PASS/FAIL line to stderr,
//! bypassing output capture, and runs under a shared lock so that the timed
//! criteria are not measured against each other.

use std::io::Write;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use cmc::geometry::catalog::{
    catalog, catalog_with, error_row, reference_errors, CatalogOptions, CatalogProblem, NAMES, RECTANGLE_CELLS,
    RECTANGLE_SEED,
};
use cmc::geometry::generators::{cube_mesh, grid_mesh, polar_disk_mesh, rect_mesh};
use cmc::geometry::tess::{parse_tess, write_tess};
use cmc::geometry::voronoi::voronoi_rectangle;
use cmc::geometry::EmbeddedMesh;
use cmc::operators::cup_left_matrix;
use cmc::solvers::{
    mixed_method_gap, solve_mixed_steady, solve_mixed_transient, solve_mixed_transient_from,
    solve_primal_steady, solve_primal_transient, Dirichlet, MixedMethod, TransientParams, TransportProblem,
};
use cmc::{cup, CellComplex, CellId, Chain, Cochain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u8, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "criterion {id} [{verdict}] {title}: {detail}");
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn within(value: f64, reference: f64, rel: f64) -> bool {
    (value - reference).abs() <= rel * reference.abs()
}

// ---------------------------------------------------------------- criterion 1

fn random_cochain(rng: &mut ChaCha8Rng, p: usize, n: usize) -> Cochain {
    Cochain::new(p, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn integer_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(-100i32..=100))).collect()
}

/// `Σ_b ε(a,b) ε(b,c)` in integers for every pair `(a, c)` two levels apart.
fn signs_square_to_zero(c: &CellComplex) -> bool {
    (2..=c.dim()).all(|p| {
        (0..c.count(p)).all(|a| {
            let mut sums = std::collections::BTreeMap::<usize, i64>::new();
            for &(b, s) in c.faces(CellId::new(p, a)) {
                for &(g, t) in c.faces(CellId::new(p - 1, b)) {
                    *sums.entry(g).or_default() += i64::from(s) * i64::from(t);
                }
            }
            sums.values().all(|&v| v == 0)
        })
    })
}

#[derive(Default)]
struct IdentityGaps {
    nilpotent: bool,
    commutativity: f64,
    leibniz: f64,
    hodge: f64,
    adjoint: f64,
    sign: f64,
}

fn identity_gaps(m: &EmbeddedMesh, seed: u64) -> IdentityGaps {
    let r = m.riemannian().unwrap();
    let k = r.mesh();
    let c = r.complex();
    let d = r.dim();
    let n = |p: usize| r.count(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = IdentityGaps { nilpotent: signs_square_to_zero(c), ..Default::default() };

    for _ in 0..100 {
        for p in 0..d.saturating_sub(1) {
            let x = Cochain::new(p, integer_values(&mut rng, n(p)));
            let dd = c.coboundary(&c.coboundary(&x).unwrap()).unwrap();
            g.nilpotent &= dd.values().iter().all(|&v| v == 0.0);
        }
        for p in 2..=d {
            let x = Chain::new(p, integer_values(&mut rng, n(p)));
            let bb = c.boundary(&c.boundary(&x).unwrap()).unwrap();
            g.nilpotent &= bb.values().iter().all(|&v| v == 0.0);
        }
        for p in 0..=d {
            for q in 0..=d - p {
                let s = random_cochain(&mut rng, p, n(p));
                let t = random_cochain(&mut rng, q, n(q));
                let st = cup(k, &s, &t).unwrap();
                let ts = cup(k, &t, &s).unwrap().scaled(if p * q % 2 == 0 { 1.0 } else { -1.0 });
                g.commutativity = g.commutativity.max(max_gap(st.values(), ts.values()));
                if p + q < d {
                    let lhs = c.coboundary(&st).unwrap();
                    let a = cup(k, &c.coboundary(&s).unwrap(), &t).unwrap();
                    let b = cup(k, &s, &c.coboundary(&t).unwrap()).unwrap();
                    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                    let rhs = &a + &b.scaled(sign);
                    g.leibniz = g.leibniz.max(max_gap(lhs.values(), rhs.values()));
                }
            }
        }
    }

    // ⟨★e_i, e_j⟩_{D-p} against (e_i ⌣ e_j)[K] for every basis pair.
    let class = c.fundamental_class().unwrap();
    for p in 0..=d {
        let w = r.weights(d - p);
        for i in 0..n(p) {
            let e = Cochain::basis(p, n(p), i);
            let star = r.hodge_star(&e).unwrap();
            let cup_with = cup_left_matrix(k, &e, d - p).unwrap();
            let integrals: Vec<f64> = {
                let mut out = vec![0.0; n(d - p)];
                for (a, j, &v) in cup_with.triplet_iter() {
                    out[j] += class.values()[a] * v;
                }
                out
            };
            for j in 0..n(d - p) {
                g.hodge = g.hodge.max((w[j] * star.values()[j] - integrals[j]).abs());
            }
        }
    }

    // ⟨e_i, δ̃e_j⟩_p against ⟨δ★e_i, e_j⟩_{p-1} over interior cells.
    for p in 1..=d {
        let (inner_p, inner_q) = (r.zero_trace_space(p), r.zero_trace_space(p - 1));
        let delta = r.coboundary_matrix(p - 1).unwrap();
        let (wp, wq) = (r.weights(p), r.weights(p - 1));
        for &i in &inner_p.interior {
            let adj = r.adjoint_coboundary(&Cochain::basis(p, n(p), i)).unwrap();
            let row = delta.row(i);
            for &j in &inner_q.interior {
                let dij = row.get_entry(j).map_or(0.0, |e| e.into_value());
                g.adjoint = g.adjoint.max((wp[i] * dij - wq[j] * adj.values()[j]).abs());
            }
        }
    }

    // δ★_D ★_0 u = −★_1 δ̃_0 u on interior (D-1)-cells, relative to the size of the right side.
    for _ in 0..100 {
        let u = r.zero_trace_project(&random_cochain(&mut rng, 0, n(0)));
        let lhs = r.adjoint_coboundary(&r.hodge_star(&u).unwrap()).unwrap();
        let rhs = r.hodge_star(&c.coboundary(&u).unwrap()).unwrap().scaled(-1.0);
        let scale = rhs.max_abs().max(1.0);
        for &b in &r.zero_trace_space(d - 1).interior {
            g.sign = g.sign.max((lhs.values()[b] - rhs.values()[b]).abs() / scale);
        }
    }
    g
}

#[test]
fn criterion_1_algebraic_identities() {
    let _lock = serial();
    let start = Instant::now();
    let meshes = [
        ("square", rect_mesh(1.0, 1.0, 1, 1).unwrap()),
        ("disk 4x3", polar_disk_mesh(3, 4).unwrap()),
        ("cube 2x2x2", cube_mesh(2, 2, 2).unwrap()),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (seed, (name, m)) in meshes.iter().enumerate() {
        let g = identity_gaps(m, seed as u64);
        let ok = g.nilpotent
            && g.commutativity <= 1e-13
            && g.leibniz <= 1e-13
            && g.hodge <= 1e-12
            && g.adjoint <= 1e-12
            && g.sign <= 1e-12;
        pass &= ok;
        details.push(format!(
            "{name}: dd=0 {}, comm {:.1e}, leibniz {:.1e}, hodge {:.1e}, adjoint {:.1e}, sign {:.1e}",
            g.nilpotent, g.commutativity, g.leibniz, g.hodge, g.adjoint, g.sign
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 1.0;
    report(1, "algebraic identities", pass, &format!("{}; {elapsed:.2}s", details.join("; ")));
    assert!(pass, "{details:?} in {elapsed:.2}s");
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_2_cube_exactness() {
    let _lock = serial();
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for n in 1..=4 {
        let c = catalog_with("cube-quadratic", &CatalogOptions { resolution: Some(vec![n]), ..Default::default() }).unwrap();
        let row = error_row(&c, MixedMethod::Eliminate).unwrap();
        pass &= row.primal_u <= 1e-10 && row.mixed_q <= 1e-10;
        details.push(format!("n={n}: primal u {:.1e}, mixed q {:.1e}", row.primal_u, row.mixed_q));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 5.0;
    report(2, "cube exactness", pass, &format!("{}; {elapsed:.2}s", details.join("; ")));
    assert!(pass, "{details:?} in {elapsed:.2}s");
}

// ------------------------------------------------------------ criteria 3 and 4

/// Compares `[primal u, mixed u, primal q, mixed q]` at 1% relative deviation.
/// The primal flow reference was computed without copying `g_N` onto `Γ_N`,
/// so it is matched by the computed flux; the copied value is printed too.
fn reference_row(id: u8, name: &str, budget: f64) {
    let _lock = serial();
    let start = Instant::now();
    let c = catalog(name).unwrap();
    let row = error_row(&c, MixedMethod::Eliminate).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let reference = reference_errors(name).unwrap();
    let ours = [row.primal_u, row.mixed_u, row.primal_q_computed, row.mixed_q];
    let labels = ["primal u", "mixed u", "primal q", "mixed q"];
    let mut pass = elapsed < budget;
    let mut details = Vec::new();
    for k in 0..4 {
        let ok = within(ours[k], reference[k], 0.01);
        pass &= ok;
        details.push(format!(
            "{} {:.6e} vs {:.6e} {}",
            labels[k],
            ours[k],
            reference[k],
            if ok { "ok" } else { "off" }
        ));
    }
    details.push(format!("primal q with g_N copied {:.6e}", row.primal_q));
    report(id, &format!("{name} reference errors"), pass, &format!("{}; {elapsed:.2}s", details.join("; ")));
    assert!(pass, "{details:?} in {elapsed:.2}s");
}

#[test]
fn criterion_3_disk_reference_errors() {
    reference_row(3, "disk-quadratic", 1.0);
}

#[test]
fn criterion_4_hemisphere_reference_errors() {
    reference_row(4, "hemisphere-linear", 1.0);
}

// ---------------------------------------------------------------- criterion 5

/// Soft: unmet targets print the sweep table instead of failing.
#[test]
fn criterion_5_cube_resolution_sweep() {
    let _lock = serial();
    let target = reference_errors("cube-quadratic").unwrap();
    let mut rows = Vec::new();
    for n in 2..=6 {
        let c = catalog_with("cube-quadratic", &CatalogOptions { resolution: Some(vec![n]), ..Default::default() }).unwrap();
        rows.push((n, error_row(&c, MixedMethod::Eliminate).unwrap()));
    }
    let (n, best) = rows
        .iter()
        .min_by(|a, b| (a.1.mixed_u - target[1]).abs().total_cmp(&(b.1.mixed_u - target[1]).abs()))
        .unwrap();
    let met = within(best.mixed_u, target[1], 0.05);
    let table: Vec<String> = rows
        .iter()
        .map(|(n, r)| format!("n={n} mixed u {:.6e} primal q {:.6e}", r.mixed_u, r.primal_q_computed))
        .collect();
    let detail = format!(
        "closest n={n}: mixed u {:.7e} vs {:.7e}, primal q {:.6e} vs {:.6e}{}",
        best.mixed_u,
        target[1],
        best.primal_q_computed,
        target[2],
        if met { String::new() } else { format!(" (unmet, sweep: {})", table.join("; ")) }
    );
    report(5, "cube resolution sweep (soft)", met, &detail);
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_voronoi_rectangle() {
    let _lock = serial();
    let text = write_tess(&voronoi_rectangle(20.0, 15.0, RECTANGLE_CELLS, RECTANGLE_SEED).unwrap());
    let tess = parse_tess(&text).unwrap();
    let parent = tess.to_complex().unwrap();
    let c = catalog_with("rectangle-linear", &CatalogOptions { tess: Some(tess), ..Default::default() }).unwrap();
    let forman = c.mesh.complex();
    let valid = parent.validate().is_valid()
        && forman.validate().is_valid()
        && forman.check_compatible_orientation().compatible
        && (c.mesh.total_measure() - 300.0).abs() < 1e-9;
    let row = error_row(&c, MixedMethod::Eliminate).unwrap();
    let pass = valid
        && row.primal_u < 0.2
        && row.mixed_u < 0.2
        && row.primal_q < 0.6
        && row.primal_q_computed < 0.6
        && row.mixed_q < 0.6;
    let detail = format!(
        "{} cells, valid {valid}; primal u {:.4}, mixed u {:.4}, primal q {:.4} (computed {:.4}), mixed q {:.4}",
        parent.count(2),
        row.primal_u,
        row.mixed_u,
        row.primal_q,
        row.primal_q_computed,
        row.mixed_q
    );
    report(6, "irregular Voronoi mesh", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 7

#[test]
fn criterion_7_mixed_paths_agree() {
    let _lock = serial();
    let mut pass = true;
    let mut details = Vec::new();
    for name in ["disk-quadratic", "cube-quadratic"] {
        let (du, dq) = mixed_method_gap(&catalog(name).unwrap().problem).unwrap();
        pass &= du <= 1e-8 && dq <= 1e-8;
        details.push(format!("{name}: u {du:.1e}, q {dq:.1e}"));
    }
    report(7, "eliminate vs saddle", pass, &details.join("; "));
    assert!(pass, "{details:?}");
}

// ---------------------------------------------------------------- criterion 8

fn with_transient(p: &TransportProblem, dt: f64, steps: usize, theta: f64, u0: Vec<f64>) -> TransportProblem {
    let mut p = p.clone();
    p.transient = Some(TransientParams { t0: 0.0, dt, steps, theta, u0 });
    p
}

fn series_drift(series: &[cmc::solvers::TimeStep], u: &[f64], q: &[f64]) -> f64 {
    series.iter().fold(0.0f64, |m, s| m.max(max_gap(&s.u, u)).max(max_gap(&s.q, q)))
}

fn fixed_point_drift(c: &CatalogProblem) -> f64 {
    let primal = solve_primal_steady(&c.problem).unwrap();
    let p = with_transient(&c.problem, 0.05, 20, 0.5, primal.u.values().to_vec());
    let run = solve_primal_transient(&p).unwrap();
    let a = series_drift(&run.series, primal.u.values(), primal.q.values());

    let mixed = solve_mixed_steady(&c.problem, MixedMethod::Eliminate).unwrap();
    let ut = mixed.u_tilde.as_ref().unwrap().values().to_vec();
    let p = with_transient(&c.problem, 0.05, 20, 0.5, mixed.u.values().to_vec());
    let run = solve_mixed_transient_from(&p, ut, mixed.q.values().to_vec()).unwrap();
    a.max(series_drift(&run.series, mixed.u.values(), mixed.q.values()))
}

fn long_time_gap(c: &CatalogProblem) -> (f64, f64) {
    let u0 = c.problem.dirichlet_nodal();
    let p = with_transient(&c.problem, 0.5, 200, 1.0, u0);
    let primal = solve_primal_steady(&c.problem).unwrap();
    let run = solve_primal_transient(&p).unwrap();
    let a = max_gap(run.u.values(), primal.u.values()).max(max_gap(run.q.values(), primal.q.values()));
    let mixed = solve_mixed_steady(&c.problem, MixedMethod::Eliminate).unwrap();
    let run = solve_mixed_transient(&p).unwrap();
    let b = max_gap(run.u.values(), mixed.u.values()).max(max_gap(run.q.values(), mixed.q.values()));
    (a, b)
}

/// `u_t = u_xx` on `[0, 1]`, `u = 0` at both ends, `u(0) = sin πx`, until `T = 0.1`.
fn crank_nicolson_ratio() -> f64 {
    let m = grid_mesh(&[1.0], &[16]).unwrap();
    let x: Vec<f64> = m.node_positions().iter().map(|p| p[0]).collect();
    let r = Arc::new(m.riemannian().unwrap());
    let ends = r.boundary().parent_cells(0).to_vec();
    let dirichlet = Dirichlet::from_facets(&r, ends, |_| 0.0);
    let base = TransportProblem::new(r.clone(), 1.0, Cochain::zeros(1, r.count(1)), dirichlet);
    let u0: Vec<f64> = x.iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
    let at = |steps: usize| {
        let p = with_transient(&base, 0.1 / steps as f64, steps, 0.5, u0.clone());
        solve_primal_transient(&p).unwrap().u.into_values()
    };
    let reference = at(2560);
    max_gap(&at(10), &reference) / max_gap(&at(20), &reference)
}

/// Largest per-step change of the total amount on an insulated disk.
fn conservation_residual() -> f64 {
    let m = polar_disk_mesh(3, 4).unwrap();
    let r = Arc::new(m.riemannian().unwrap());
    let d = r.dim();
    let base = TransportProblem::new(r.clone(), 1.0, Cochain::zeros(d, r.count(d)), Dirichlet::default());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u0: Vec<f64> = (0..r.count(0)).map(|_| rng.random::<f64>()).collect();
    let p = with_transient(&base, 0.05, 20, 0.5, u0);
    let mut worst = 0.0f64;
    for run in [solve_primal_transient(&p).unwrap(), solve_mixed_transient(&p).unwrap()] {
        let totals: Vec<f64> = run.series.iter().map(|s| s.amount.iter().sum()).collect();
        worst = totals.windows(2).fold(worst, |m, w| m.max((w[1] - w[0]).abs()));
    }
    worst
}

#[test]
fn criterion_8_transient_properties() {
    let _lock = serial();
    let disk = catalog("disk-quadratic").unwrap();
    let drift = fixed_point_drift(&disk);
    let (primal_gap, mixed_gap) = long_time_gap(&disk);
    let ratio = crank_nicolson_ratio();
    let residual = conservation_residual();
    let pass = drift <= 1e-12
        && primal_gap <= 1e-6
        && mixed_gap <= 1e-6
        && (3.5..=4.5).contains(&ratio)
        && residual <= 1e-9;
    let detail = format!(
        "fixed point {drift:.1e}; long time primal {primal_gap:.1e} mixed {mixed_gap:.1e}; CN ratio {ratio:.3}; conservation {residual:.1e}"
    );
    report(8, "transient properties", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 9

#[test]
fn criterion_9_de_rham_naturality() {
    let _lock = serial();
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for name in NAMES {
        let c = catalog(name).unwrap();
        let k = c.mesh.complex();
        let mut gap = 0.0f64;
        for (form, derivative) in [(&c.exact.u, &c.exact.du), (&c.exact.q, &c.exact.f)] {
            let lhs = c.mesh.derham(derivative).unwrap();
            let rhs = k.coboundary(&c.mesh.derham(form).unwrap()).unwrap();
            gap = gap.max(max_gap(lhs.values(), rhs.values()) / lhs.max_abs().max(1.0));
        }
        worst = worst.max(gap);
        details.push(format!("{name} {gap:.1e}"));
    }
    let pass = worst <= 1e-8;
    report(9, "de Rham naturality", pass, &details.join("; "));
    assert!(pass, "{details:?}");
}
