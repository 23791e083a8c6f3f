//! JSON file formats: `cmc-mesh`, `cmc-problem` and `cmc-result`, version 1.
//!
//! All indices are 0-based. Paths inside a problem file are relative to the
//! problem file itself.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::complex::{CellComplex, CellId, Cochain, Incidence};
use crate::error::{CmcError, Result};
use crate::forman::QuasiCubicalMesh;
use crate::geometry::catalog::CatalogProblem;
use crate::geometry::{Chart, EmbeddedMesh};
use crate::operators::{MetricData, RiemannianMesh};
use crate::solvers::{
    Dirichlet, ErrorReport, Formulation, MixedMethod, Neumann, SolveResult, SolveStats, TimeStep, TransientParams,
    TransportProblem,
};

pub const MESH_FORMAT: &str = "cmc-mesh";
pub const PROBLEM_FORMAT: &str = "cmc-problem";
pub const RESULT_FORMAT: &str = "cmc-result";
pub const VERSION: u32 = 1;

fn check_header(kind: &str, format: &Option<String>, version: Option<u32>) -> Result<()> {
    if let Some(f) = format.as_deref().filter(|f| *f != kind) {
        return Err(CmcError::Parse(format!("expected a `{kind}` file, found `{f}`")));
    }
    if let Some(v) = version.filter(|&v| v != VERSION) {
        return Err(CmcError::Parse(format!("unsupported `{kind}` version {v}")));
    }
    Ok(())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CmcError::Parse(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `cmc-mesh` v1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub version: Option<u32>,
    pub dim: usize,
    pub counts: Vec<usize>,
    /// `incidence[p][i]` lists `[hyperface, sign]` of cell `i` of dimension
    /// `p`. The node level may be omitted, in which case `incidence[0]`
    /// describes edges.
    pub incidence: Vec<Vec<Incidence>>,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<Vec<usize>>>,
    /// Per-node Cartesian coordinates, for visualization only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<Vec<Vec<f64>>>,
    /// `[lower dim, lower index, upper dim, upper index]` per cell, in
    /// dimension order, for a Forman subdivision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_map: Option<Vec<[usize; 4]>>,
}

impl MeshFile {
    pub fn from_complex(c: &CellComplex) -> Self {
        Self {
            format: Some(MESH_FORMAT.into()),
            version: Some(VERSION),
            dim: c.dim(),
            counts: c.counts().to_vec(),
            incidence: (0..=c.dim()).map(|p| c.faces_of_dim(p).to_vec()).collect(),
            labels: c.labels().clone(),
            coordinates: None,
            measures: None,
            interval_map: None,
        }
    }

    /// A Forman mesh together with its interval map, when known.
    pub fn from_forman(k: &QuasiCubicalMesh) -> Self {
        let mut file = Self::from_complex(k.complex());
        file.interval_map = k.intervals().map(|levels| {
            levels
                .iter()
                .flatten()
                .map(|iv| [iv.lower.dim, iv.lower.index, iv.upper.dim, iv.upper.index])
                .collect()
        });
        file
    }

    /// The subdivided embedded mesh with coordinates, measures and labels.
    pub fn from_embedded(m: &EmbeddedMesh) -> Result<Self> {
        let mut file = Self::from_forman(m.mesh());
        file.coordinates = Some(m.node_positions().iter().map(|p| trim(m, p)).collect());
        file.measures = Some(m.measures()?.into_levels());
        Ok(file)
    }

    /// The mesh before subdivision, with the coordinates of its vertices.
    pub fn parent_of_embedded(m: &EmbeddedMesh) -> Result<Self> {
        let k = m.mesh();
        let parent = k.parent().ok_or_else(|| CmcError::Geometry("mesh was not built by subdivision".into()))?;
        let mut coords = vec![Vec::new(); parent.count(0)];
        for n in 0..k.count(0) {
            let iv = k.interval(CellId::new(0, n)).expect("subdivided mesh has intervals");
            if iv.upper.dim == 0 {
                coords[iv.upper.index] = trim(m, &m.node_position(n));
            }
        }
        let mut file = Self::from_complex(parent);
        file.coordinates = Some(coords);
        Ok(file)
    }

    /// Builds the complex, normalizing node orientations to positive.
    pub fn to_complex(&self) -> Result<CellComplex> {
        check_header(MESH_FORMAT, &self.format, self.version)?;
        if self.counts.len() != self.dim + 1 {
            return Err(CmcError::Parse(format!("{} counts for dimension {}", self.counts.len(), self.dim)));
        }
        let mut faces = self.incidence.clone();
        if faces.len() == self.dim {
            faces.insert(0, vec![Vec::new(); self.counts[0]]);
        }
        let mut c = CellComplex::new(self.counts.clone(), faces)?;
        let flipped = c.normalize_node_orientation()?;
        if !flipped.is_empty() {
            log::warn!("normalized {} negatively oriented node(s) to the positive convention", flipped.len());
        }
        for (name, cells) in &self.labels {
            c.set_label(name.clone(), cells.clone())?;
        }
        Ok(c)
    }

    /// A quasi-cubical mesh with stored measures.
    pub fn to_riemannian(&self) -> Result<RiemannianMesh> {
        let measures = self
            .measures
            .clone()
            .ok_or_else(|| CmcError::InvalidMetric("mesh file carries no measures".into()))?;
        let k = QuasiCubicalMesh::from_complex(self.to_complex()?)?;
        let metric = MetricData::new(k.complex(), measures)?;
        RiemannianMesh::new(k, metric)
    }

    pub fn coordinates_3d(&self) -> Option<Vec<[f64; 3]>> {
        self.coordinates.as_ref().map(|cs| {
            cs.iter()
                .map(|c| {
                    let mut p = [0.0; 3];
                    for (k, v) in c.iter().take(3).enumerate() {
                        p[k] = *v;
                    }
                    p
                })
                .collect()
        })
    }
}

fn trim(m: &EmbeddedMesh, p: &[f64; 3]) -> Vec<f64> {
    let ambient = if m.dim() == 3 || m.chart() == Chart::Spherical { 3 } else { 2 };
    p[..ambient].to_vec()
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<MeshFile> {
    read_json(path.as_ref())
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &MeshFile) -> Result<()> {
    write_json(path.as_ref(), mesh)
}

/// Boundary data of a problem file. For `Γ_D`, `cells` are facets and
/// `values` are per node of their closure (listed in `nodes`, or derived).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub cells: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<usize>>,
    pub values: Vec<f64>,
}

fn default_theta() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransientData {
    #[serde(default)]
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    pub u0: Vec<f64>,
}

/// Exact cochains `u′ = R_0 u` and `q′ = R_{D-1} q` for error reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactData {
    pub u: Vec<f64>,
    pub q: Vec<f64>,
}

/// `cmc-problem` v1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub version: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Path of the `cmc-mesh` file, relative to the problem file.
    pub mesh: String,
    /// `κ` per `(D-1)`-cell.
    pub kappa: Vec<f64>,
    /// `κ̃` per 1-cell; defaults to the constant value of `kappa`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_dual: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_dual: Option<Vec<f64>>,
    /// Production rate per `D`-cell.
    pub f: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<f64>>,
    pub dirichlet: BoundaryData,
    pub neumann: BoundaryData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient: Option<TransientData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactData>,
}

impl ProblemFile {
    pub fn from_problem(p: &TransportProblem, mesh_path: &str) -> Self {
        Self {
            format: Some(PROBLEM_FORMAT.into()),
            version: Some(VERSION),
            name: None,
            mesh: mesh_path.to_string(),
            kappa: p.kappa.clone(),
            kappa_dual: Some(p.kappa_dual.clone()),
            capacity: Some(p.capacity.clone()),
            capacity_dual: Some(p.capacity_dual.clone()),
            f: p.f.values().to_vec(),
            v: p.v.as_ref().map(|v| v.values().to_vec()),
            dirichlet: BoundaryData {
                cells: p.dirichlet.facets.clone(),
                nodes: Some(p.dirichlet.nodes.clone()),
                values: p.dirichlet.values.clone(),
            },
            neumann: BoundaryData { cells: p.neumann.facets.clone(), nodes: None, values: p.neumann.values.clone() },
            transient: p.transient.as_ref().map(|t| TransientData {
                t0: t.t0,
                dt: t.dt,
                steps: t.steps,
                theta: t.theta,
                u0: t.u0.clone(),
            }),
            exact: None,
        }
    }

    pub fn from_catalog(c: &CatalogProblem, mesh_path: &str) -> Self {
        let mut file = Self::from_problem(&c.problem, mesh_path);
        file.name = Some(c.name.clone());
        file.exact = Some(ExactData { u: c.exact_u.values().to_vec(), q: c.exact_q.values().to_vec() });
        file
    }

    /// Resolves the mesh reference against `base` (the problem file's directory).
    pub fn mesh_path(&self, base: &Path) -> PathBuf {
        base.join(&self.mesh)
    }

    /// Assembles and validates the transport problem on `mesh`.
    pub fn to_problem(&self, mesh: Arc<RiemannianMesh>) -> Result<TransportProblem> {
        check_header(PROBLEM_FORMAT, &self.format, self.version)?;
        let d = mesh.dim();
        let kappa_dual = match &self.kappa_dual {
            Some(k) => k.clone(),
            None => {
                let first = *self.kappa.first().ok_or_else(|| CmcError::InvalidProblem("empty kappa".into()))?;
                if self.kappa.iter().any(|&k| k != first) {
                    return Err(CmcError::InvalidProblem("non-constant kappa needs an explicit kappa_dual".into()));
                }
                vec![first; mesh.count(1)]
            }
        };
        let dirichlet = match &self.dirichlet.nodes {
            Some(nodes) => Dirichlet {
                facets: self.dirichlet.cells.clone(),
                nodes: nodes.clone(),
                values: self.dirichlet.values.clone(),
            },
            None => {
                let derived = Dirichlet::from_facets(&mesh, self.dirichlet.cells.clone(), |_| 0.0);
                if derived.nodes.len() != self.dirichlet.values.len() {
                    return Err(CmcError::InvalidProblem(format!(
                        "dirichlet: {} values for {} nodes",
                        self.dirichlet.values.len(),
                        derived.nodes.len()
                    )));
                }
                Dirichlet { values: self.dirichlet.values.clone(), ..derived }
            }
        };
        let problem = TransportProblem {
            kappa_dual,
            kappa: self.kappa.clone(),
            capacity_dual: self.capacity_dual.clone().unwrap_or_else(|| vec![1.0; mesh.count(0)]),
            capacity: self.capacity.clone().unwrap_or_else(|| vec![1.0; mesh.count(d)]),
            f: Cochain::new(d, self.f.clone()),
            v: self.v.clone().map(|v| Cochain::new(d - 1, v)),
            dirichlet,
            neumann: Neumann { facets: self.neumann.cells.clone(), values: self.neumann.values.clone() },
            transient: self.transient.as_ref().map(|t| TransientParams {
                t0: t.t0,
                dt: t.dt,
                steps: t.steps,
                theta: t.theta,
                u0: t.u0.clone(),
            }),
            mesh,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn exact_cochains(&self, d: usize) -> Option<(Cochain, Cochain)> {
        self.exact.as_ref().map(|e| (Cochain::new(0, e.u.clone()), Cochain::new(d - 1, e.q.clone())))
    }
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<ProblemFile> {
    read_json(path.as_ref())
}

pub fn write_problem(path: impl AsRef<Path>, problem: &ProblemFile) -> Result<()> {
    write_json(path.as_ref(), problem)
}

/// Reads a problem file and the mesh it references.
pub fn load_problem(path: impl AsRef<Path>) -> Result<(ProblemFile, MeshFile, TransportProblem)> {
    let path = path.as_ref();
    let file = read_problem(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mesh_file = read_mesh(file.mesh_path(base))?;
    let mesh = Arc::new(mesh_file.to_riemannian()?);
    let problem = file.to_problem(mesh)?;
    Ok((file, mesh_file, problem))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Steady,
    Transient,
}

/// `cmc-result` v1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub version: Option<u32>,
    pub formulation: Formulation,
    pub regime: Regime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MixedMethod>,
    pub u: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_tilde: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<ErrorReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<TimeStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stats: Vec<SolveStats>,
}

impl ResultFile {
    pub fn new(formulation: Formulation, regime: Regime, result: &SolveResult, errors: Option<ErrorReport>) -> Self {
        Self {
            format: Some(RESULT_FORMAT.into()),
            version: Some(VERSION),
            formulation,
            regime,
            method: None,
            u: result.u.values().to_vec(),
            q: result.q.values().to_vec(),
            u_tilde: result.u_tilde.as_ref().map(|c| c.values().to_vec()),
            errors,
            series: result.series.clone(),
            stats: result.stats.clone(),
        }
    }

    pub fn check(&self) -> Result<()> {
        check_header(RESULT_FORMAT, &self.format, self.version)
    }
}

pub fn read_result(path: impl AsRef<Path>) -> Result<ResultFile> {
    let r: ResultFile = read_json(path.as_ref())?;
    r.check()?;
    Ok(r)
}

pub fn write_result(path: impl AsRef<Path>, result: &ResultFile) -> Result<()> {
    write_json(path.as_ref(), result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog::catalog;
    use crate::geometry::generators::polar_disk_mesh;

    #[test]
    fn node_level_may_be_omitted() {
        let text = r#"{"dim": 1, "counts": [2, 1], "incidence": [[[[0, -1], [1, 1]]]]}"#;
        let file: MeshFile = serde_json::from_str(text).unwrap();
        let c = file.to_complex().unwrap();
        assert_eq!(c.faces(CellId::new(1, 0)), &[(0, -1), (1, 1)]);
    }

    #[test]
    fn wrong_format_is_rejected() {
        let text = r#"{"format": "cmc-result", "dim": 0, "counts": [1], "incidence": [[[]]]}"#;
        let file: MeshFile = serde_json::from_str(text).unwrap();
        assert!(matches!(file.to_complex(), Err(CmcError::Parse(_))));
    }

    #[test]
    fn parent_mesh_has_vertex_coordinates() {
        let m = polar_disk_mesh(4, 3).unwrap();
        let file = MeshFile::parent_of_embedded(&m).unwrap();
        assert_eq!(file.counts, vec![13, 24, 12]);
        let coords = file.coordinates.unwrap();
        assert_eq!(coords[0], vec![0.0, 0.0]);
        assert!(coords.iter().all(|c| c.len() == 2 && c[0].hypot(c[1]) <= 1.0 + 1e-12));
    }

    #[test]
    fn catalog_problem_survives_a_file_round_trip() {
        let c = catalog("disk-quadratic").unwrap();
        let mesh = MeshFile::from_embedded(&c.mesh).unwrap();
        let text = serde_json::to_string(&mesh).unwrap();
        let back: MeshFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mesh);
        let r = Arc::new(back.to_riemannian().unwrap());
        let file = ProblemFile::from_catalog(&c, "mesh.json");
        let p = file.to_problem(r).unwrap();
        assert_eq!(p.dirichlet, c.problem.dirichlet);
        assert_eq!(p.neumann, c.problem.neumann);
        assert_eq!(p.f, c.problem.f);
        assert_eq!(p.mesh.weights(1), c.problem.mesh.weights(1));
    }
}
