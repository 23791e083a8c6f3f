use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cmc::geometry::catalog::{self, error_row, reference_errors, CatalogOptions, NAMES};
use cmc::geometry::generators::{cube_mesh, hemisphere_mesh, polar_disk_mesh, rect_mesh};
use cmc::geometry::tess::read_tess;
use cmc::geometry::voronoi::voronoi_rectangle;
use cmc::geometry::EmbeddedMesh;
use cmc::io::{
    load_problem, read_mesh, read_problem, read_result, write_mesh, write_problem, write_result, MeshFile,
    ProblemFile, Regime, ResultFile,
};
use cmc::solvers::{relative_errors, solve_steady, solve_transient, Formulation, MixedMethod, TransientParams};
use cmc::viz::{render_vtk, Drawing, RenderSpec, ValueRange};
use cmc::{forman_subdivide, CellComplex, CellId};

use crate::{
    DiscretizeArgs, FormanArgs, FormulationArg, GenArgs, MeshKind, MethodArg, RegimeArg, RenderArgs, ReproArgs,
    SolveArgs, Usage, ValidateArgs,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn method(m: MethodArg) -> MixedMethod {
    match m {
        MethodArg::Eliminate => MixedMethod::Eliminate,
        MethodArg::Saddle => MixedMethod::Saddle,
    }
}

fn counts(c: &CellComplex) -> String {
    c.counts().iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn gen(a: GenArgs) -> Result<()> {
    let mesh = match a.kind {
        MeshKind::Cube => cube_mesh(a.nx.unwrap_or(a.n), a.ny.unwrap_or(a.n), a.nz.unwrap_or(a.n))?,
        MeshKind::Rect => rect_mesh(a.width, a.height, a.nx.unwrap_or(a.n), a.ny.unwrap_or(a.n))?,
        MeshKind::Disk => polar_disk_mesh(a.nr, a.nphi)?,
        MeshKind::Hemisphere => hemisphere_mesh(a.ntheta, a.nphi)?,
        MeshKind::Voronoi => voronoi_rectangle(a.width, a.height, a.cells, a.seed)?.to_embedded()?,
        MeshKind::Tess => {
            let path = a.input.as_ref().ok_or_else(|| usage("`gen tess` needs --input <file.tess>"))?;
            read_tess(path).with_context(|| format!("reading {}", path.display()))?.to_embedded()?
        }
    };
    let file = if a.subdivided { MeshFile::from_embedded(&mesh)? } else { MeshFile::parent_of_embedded(&mesh)? };
    write_mesh(&a.output, &file)?;
    println!("counts {}", file.counts.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" "));
    Ok(())
}

pub fn forman(a: FormanArgs) -> Result<()> {
    let input = read_mesh(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let parent = input.to_complex()?;
    let planar = input.coordinates.as_ref().filter(|cs| parent.dim() == 2 && cs.iter().all(|p| p.len() == 2));
    let (file, sub) = match planar {
        Some(cs) => {
            let vertices: Vec<[f64; 2]> = cs.iter().map(|p| [p[0], p[1]]).collect();
            let m = EmbeddedMesh::from_planar_complex(&parent, &vertices)?;
            (MeshFile::from_embedded(&m)?, m.complex().clone())
        }
        None => {
            let k = forman_subdivide(&parent)?;
            let mut file = MeshFile::from_forman(&k);
            if let (Some(cs), Some(levels)) = (&input.coordinates, k.intervals()) {
                file.coordinates = Some(levels[0].iter().map(|iv| centroid(&parent, cs, iv.upper)).collect());
            }
            (file, k.complex().clone())
        }
    };
    write_mesh(&a.output, &file)?;
    println!("counts {}", counts(&sub));
    Ok(())
}

/// Vertex average of a parent cell; Forman nodes sit there.
fn centroid(parent: &CellComplex, coords: &[Vec<f64>], cell: CellId) -> Vec<f64> {
    let nodes = parent.nodes_of(cell);
    let dim = coords.first().map_or(0, Vec::len);
    let mut p = vec![0.0; dim];
    for &n in &nodes {
        for (acc, v) in p.iter_mut().zip(&coords[n]) {
            *acc += v;
        }
    }
    p.iter_mut().for_each(|v| *v /= nodes.len() as f64);
    p
}

pub fn validate(a: ValidateArgs) -> Result<()> {
    let file = read_mesh(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let c = file.to_complex()?;
    let report = c.validate();
    for v in &report.violations {
        eprintln!("violation: {v}");
    }
    if !report.is_valid() {
        bail!("{}: {} violation(s)", a.input.display(), report.violations.len());
    }
    let orientation = c.check_compatible_orientation();
    if !orientation.overfull.is_empty() {
        bail!("{}: facets with more than two cofaces: {:?}", a.input.display(), orientation.overfull);
    }
    if !orientation.compatible {
        eprintln!("orientation: incompatible across facets {:?}", orientation.offending);
    }
    println!("valid: D = {}, counts {}, compatible orientation: {}", c.dim(), counts(&c), orientation.compatible);
    Ok(())
}

fn default_mesh_path(problem: &Path) -> PathBuf {
    let stem = problem.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    problem.with_file_name(format!("{stem}.mesh.json"))
}

/// `mesh` as referenced from `problem`: relative to its directory when possible.
fn relative_reference(problem: &Path, mesh: &Path) -> String {
    let base = problem.parent().filter(|p| !p.as_os_str().is_empty());
    let rel = match base {
        Some(b) => mesh.strip_prefix(b).unwrap_or(mesh),
        None => mesh,
    };
    if base.is_some() && rel == mesh && mesh.is_relative() {
        // Not under the problem's directory; fall back to an absolute path.
        return std::path::absolute(mesh).unwrap_or_else(|_| mesh.to_path_buf()).display().to_string();
    }
    rel.display().to_string()
}

pub fn discretize(a: DiscretizeArgs) -> Result<()> {
    if !NAMES.contains(&a.problem.as_str()) {
        return Err(usage(format!("unknown problem `{}` (known: {})", a.problem, NAMES.join(", "))));
    }
    if (a.seed.is_some() || a.tess.is_some()) && a.problem != "rectangle-linear" {
        return Err(usage("--seed and --tess apply to rectangle-linear only"));
    }
    let tess = a.tess.as_ref().map(|p| read_tess(p).with_context(|| format!("reading {}", p.display()))).transpose()?;
    let opts = CatalogOptions { resolution: a.resolution.clone(), seed: a.seed, tess };
    let mut c = catalog::catalog_with(&a.problem, &opts)?;
    if let (Some(dt), Some(steps)) = (a.dt, a.steps) {
        let u0 = c.problem.dirichlet_nodal();
        c.problem.transient = Some(TransientParams { t0: 0.0, dt, steps, theta: a.theta, u0 });
        c.problem.validate()?;
    }
    let mesh_path = a.mesh.clone().unwrap_or_else(|| default_mesh_path(&a.output));
    write_mesh(&mesh_path, &MeshFile::from_embedded(&c.mesh)?)?;
    write_problem(&a.output, &ProblemFile::from_catalog(&c, &relative_reference(&a.output, &mesh_path)))?;
    println!("{}: counts {} -> {}, {}", c.name, counts(c.mesh.complex()), a.output.display(), mesh_path.display());
    Ok(())
}

pub fn solve(a: SolveArgs) -> Result<()> {
    let transient = a.regime == RegimeArg::Transient;
    if !transient && (a.dt.is_some() || a.steps.is_some() || a.theta.is_some()) {
        return Err(usage("--dt, --steps and --theta need --regime transient"));
    }
    if transient && a.method != MethodArg::Eliminate {
        return Err(usage("--method applies to steady mixed solves only"));
    }
    if let Some(theta) = a.theta {
        if !(0.0..=1.0).contains(&theta) {
            return Err(usage(format!("--theta {theta} is outside [0, 1]")));
        }
    }
    let (file, _, mut p) = load_problem(&a.problem).with_context(|| format!("loading {}", a.problem.display()))?;
    let formulation = match a.formulation {
        FormulationArg::Primal => Formulation::Primal,
        FormulationArg::Mixed => Formulation::Mixed,
    };
    let result = if transient {
        let mut t = match p.transient.take() {
            Some(t) => t,
            None => {
                let (Some(dt), Some(steps)) = (a.dt, a.steps) else {
                    return Err(usage("problem has no transient data; pass --dt and --steps"));
                };
                TransientParams { t0: 0.0, dt, steps, theta: 0.5, u0: p.dirichlet_nodal() }
            }
        };
        t.dt = a.dt.unwrap_or(t.dt);
        t.steps = a.steps.unwrap_or(t.steps);
        t.theta = a.theta.unwrap_or(t.theta);
        p.transient = Some(t);
        p.validate()?;
        solve_transient(&p, formulation)?
    } else {
        solve_steady(&p, formulation, method(a.method))?
    };
    let d = p.mesh.dim();
    let errors = match (transient, file.exact_cochains(d)) {
        (false, Some((u, q))) => Some(relative_errors(&result, &u, &q)?),
        _ => None,
    };
    let regime = if transient { Regime::Transient } else { Regime::Steady };
    let mut out = ResultFile::new(formulation, regime, &result, errors);
    if formulation == Formulation::Mixed && !transient {
        out.method = Some(method(a.method));
    }
    write_result(&a.output, &out)?;
    if let Some(e) = errors {
        println!("u_rel {:.6e}  q_rel {:.6e}", e.u_rel, e.q_rel);
    }
    if transient {
        println!("{} time levels written to {}", result.series.len(), a.output.display());
    }
    Ok(())
}

fn range(r: &Option<Vec<f64>>, flag: &str) -> Result<ValueRange> {
    match r.as_deref() {
        None => Ok(ValueRange::Auto),
        Some([lo, hi]) if lo < hi => Ok(ValueRange::Fixed(*lo, *hi)),
        Some(_) => Err(usage(format!("{flag} needs lo,hi with lo < hi"))),
    }
}

fn frame_path(out: &Path, i: usize) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("frame");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("");
    out.with_file_name(format!("{stem}_{i:04}.{ext}"))
}

pub fn render(a: RenderArgs) -> Result<()> {
    let ext = a.output.extension().and_then(|s| s.to_str()).unwrap_or("").to_ascii_lowercase();
    if ext != "svg" && ext != "vtk" {
        return Err(usage("output must end in .svg or .vtk"));
    }
    let spec = RenderSpec {
        width: a.width,
        height: a.height,
        u_range: range(&a.u_range, "--u-range")?,
        q_range: range(&a.q_range, "--q-range")?,
        arrows: !a.no_arrows,
        arrow_length: a.arrow_length,
    };
    let result = read_result(&a.result).with_context(|| format!("reading {}", a.result.display()))?;
    if a.frames && result.series.is_empty() {
        return Err(usage("--frames needs a transient result"));
    }
    let mesh = match (&a.problem, &a.mesh) {
        (Some(p), _) => {
            let file = read_problem(p).with_context(|| format!("reading {}", p.display()))?;
            read_mesh(file.mesh_path(p.parent().unwrap_or(Path::new("."))))?
        }
        (None, Some(m)) => read_mesh(m).with_context(|| format!("reading {}", m.display()))?,
        (None, None) => return Err(usage("pass --problem or --mesh")),
    };
    let c = mesh.to_complex()?;
    if (ext == "svg") != (c.dim() == 2) {
        bail!("a D = {} mesh renders to {}", c.dim(), if c.dim() == 2 { ".svg" } else { ".vtk" });
    }
    if result.u.len() != c.count(0) || result.q.len() != c.count(c.dim() - 1) {
        bail!("result does not live on this mesh");
    }
    let coords = mesh.coordinates_3d().context("mesh file has no coordinates")?;
    let drawing = if ext == "svg" { Some(Drawing::from_points(&c, &coords)?) } else { None };
    let draw = |u: &[f64], q: &[f64]| -> Result<String> {
        Ok(match &drawing {
            Some(d) => d.render_svg(u, q, &spec)?,
            None => render_vtk(&c, &coords, u, q)?,
        })
    };
    if a.frames {
        // Shared ranges keep frames comparable.
        let mut spec_all = spec.clone();
        if spec_all.u_range == ValueRange::Auto {
            let (lo, hi) = result.series.iter().flat_map(|s| s.u.iter()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            spec_all.u_range = ValueRange::Fixed(lo, hi);
        }
        for (i, step) in result.series.iter().enumerate() {
            let text = match &drawing {
                Some(d) => d.render_svg(&step.u, &step.q, &spec_all)?,
                None => render_vtk(&c, &coords, &step.u, &step.q)?,
            };
            std::fs::write(frame_path(&a.output, i), text)?;
        }
        println!("{} frames written", result.series.len());
    } else {
        std::fs::write(&a.output, draw(&result.u, &result.q)?)?;
        println!("wrote {}", a.output.display());
    }
    Ok(())
}

pub fn repro(a: ReproArgs) -> Result<()> {
    let m = method(a.method);
    println!(
        "{:<18} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "problem", "primal u", "mixed u", "primal q", "mixed q", "primal q*"
    );
    for name in NAMES {
        let c = catalog::catalog(name)?;
        let r = error_row(&c, m)?;
        println!(
            "{:<18} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
            name, r.primal_u, r.mixed_u, r.primal_q, r.mixed_q, r.primal_q_computed
        );
        if let Some([pu, mu, pq, mq]) = reference_errors(name) {
            println!("{:<18} {:>12.4e} {:>12.4e} {:>12} {:>12.4e} {:>12.4e}", "  reference", pu, mu, "", mq, pq);
        }
    }
    println!("primal q copies g_N on the Neumann boundary; primal q* is computed from u on every face.");
    Ok(())
}
