//! Embeddings of meshes in charts: cell shapes, measures, the de Rham map,
//! mesh generators, `.tess` import and the manufactured-problem catalog.
//!
//! Curved meshes are described cell by cell as boxes in chart coordinates.
//! Straight polygonal meshes store points, segments and oriented polygons.

pub mod catalog;
pub mod forms;
pub mod generators;
pub mod quadrature;
pub mod tess;
pub mod voronoi;

use std::f64::consts::PI;

use crate::complex::{CellComplex, CellId, Incidence, Sign};
use crate::error::{CmcError, Result};
use crate::forman::{forman_subdivide, QuasiCubicalMesh};
use crate::operators::{MetricData, RiemannianMesh};

pub use forms::FormField;

const COORD_TOL: f64 = 1e-9;

/// Coordinate system of the parameter domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    Cartesian(usize),
    /// `(r, φ)` on the plane.
    Polar,
    /// `(θ, φ)` on the unit sphere, `θ` measured from the north pole.
    Spherical,
}

impl Chart {
    pub fn dim(&self) -> usize {
        match self {
            Chart::Cartesian(d) => *d,
            Chart::Polar | Chart::Spherical => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Chart::Cartesian(_) => "cartesian",
            Chart::Polar => "polar",
            Chart::Spherical => "spherical",
        }
    }

    /// Period of a cyclic coordinate.
    pub fn period(&self, axis: usize) -> Option<f64> {
        match (self, axis) {
            (Chart::Polar | Chart::Spherical, 1) => Some(2.0 * PI),
            _ => None,
        }
    }

    pub fn to_cartesian(&self, x: &[f64]) -> [f64; 3] {
        match self {
            Chart::Cartesian(_) => {
                let mut out = [0.0; 3];
                out[..x.len()].copy_from_slice(x);
                out
            }
            Chart::Polar => [x[0] * x[1].cos(), x[0] * x[1].sin(), 0.0],
            Chart::Spherical => [x[0].sin() * x[1].cos(), x[0].sin() * x[1].sin(), x[0].cos()],
        }
    }

    /// Diagonal of the metric tensor at `x` (all supported charts are orthogonal).
    pub fn metric_diagonal(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Chart::Cartesian(d) => vec![1.0; *d],
            Chart::Polar => vec![1.0, x[0] * x[0]],
            Chart::Spherical => vec![1.0, x[0].sin().powi(2)],
        }
    }

    /// Riemannian measure of a chart box, in closed form.
    pub fn box_measure(&self, extents: &[Extent]) -> f64 {
        let spans: Vec<usize> = (0..extents.len()).filter(|&k| extents[k].is_span()).collect();
        let width = |k: usize| match extents[k] {
            Extent::Span(lo, hi) => hi - lo,
            _ => 0.0,
        };
        match self {
            Chart::Cartesian(_) => spans.iter().map(|&k| width(k)).product(),
            Chart::Polar | Chart::Spherical => {
                let radial = |v: f64| if *self == Chart::Polar { v } else { v.sin() };
                match spans.as_slice() {
                    [] => 1.0,
                    [0] => width(0),
                    [1] => radial(extents[0].center()) * width(1),
                    _ => {
                        let Extent::Span(lo, hi) = extents[0] else { unreachable!() };
                        let base = if *self == Chart::Polar {
                            (hi * hi - lo * lo) / 2.0
                        } else {
                            lo.cos() - hi.cos()
                        };
                        base * width(1)
                    }
                }
            }
        }
    }

    fn same(&self, axis: usize, a: f64, b: f64) -> bool {
        match self.period(axis) {
            Some(p) => {
                let d = (a - b).rem_euclid(p);
                d < COORD_TOL || p - d < COORD_TOL
            }
            None => (a - b).abs() < COORD_TOL,
        }
    }
}

/// Extent of a chart box along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extent {
    Span(f64, f64),
    At(f64),
    /// Coordinate undefined at a chart singularity (disk center, pole).
    Free,
}

impl Extent {
    pub fn is_span(&self) -> bool {
        matches!(self, Extent::Span(..))
    }

    /// Midpoint of a span, the fixed value otherwise (0 for a free axis).
    pub fn center(&self) -> f64 {
        match *self {
            Extent::Span(lo, hi) => (lo + hi) / 2.0,
            Extent::At(x) => x,
            Extent::Free => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lo,
    Hi,
}

/// The axis along which hyperface box `c` collapses box `a`, and on which side.
fn collapse_side(chart: &Chart, a: &[Extent], c: &[Extent]) -> Result<(usize, Side)> {
    let axes: Vec<usize> = (0..a.len()).filter(|&k| a[k].is_span() && !c[k].is_span()).collect();
    let [k] = axes[..] else {
        return Err(CmcError::Geometry(format!("box {c:?} is not a facet of {a:?}")));
    };
    let Extent::Span(lo, hi) = a[k] else { unreachable!() };
    match c[k] {
        Extent::At(s) if chart.same(k, s, lo) => Ok((k, Side::Lo)),
        Extent::At(s) if chart.same(k, s, hi) => Ok((k, Side::Hi)),
        _ => Err(CmcError::Geometry(format!("box {c:?} does not lie on a side of {a:?}"))),
    }
}

/// Relative orientation `ε(a, c)` of chart-positive boxes.
fn box_incidence(chart: &Chart, a: &[Extent], c: &[Extent]) -> Result<Sign> {
    let (k, side) = collapse_side(chart, a, c)?;
    let j = (0..k).filter(|&i| a[i].is_span()).count();
    let out: Sign = if side == Side::Hi { 1 } else { -1 };
    Ok(if j % 2 == 0 { out } else { -out })
}

/// Assigns signs to unsigned hyperface lists so that every cell carries the
/// orientation of its chart box.
pub fn signed_box_complex(
    chart: &Chart,
    hyperfaces: Vec<Vec<Vec<usize>>>,
    boxes: &[Vec<Vec<Extent>>],
) -> Result<CellComplex> {
    let counts = hyperfaces.iter().map(Vec::len).collect();
    let mut faces: Vec<Vec<Incidence>> = Vec::with_capacity(hyperfaces.len());
    for (p, level) in hyperfaces.into_iter().enumerate() {
        let signed = level
            .into_iter()
            .enumerate()
            .map(|(a, list)| {
                list.into_iter()
                    .map(|c| Ok((c, box_incidence(chart, &boxes[p][a], &boxes[p - 1][c])?)))
                    .collect::<Result<Incidence>>()
            })
            .collect::<Result<Vec<_>>>()?;
        faces.push(signed);
    }
    CellComplex::new(counts, faces)
}

/// Parametric description of one embedded cell.
#[derive(Clone, Debug, PartialEq)]
pub enum CellShape {
    /// Chart box; `sign` relates the cell orientation to the increasing-axis orientation.
    Box { extents: Vec<Extent>, sign: Sign },
    Point([f64; 2]),
    /// Straight edge from tail to head.
    Segment([f64; 2], [f64; 2]),
    /// Straight polygon, vertices listed along the cell orientation.
    Polygon(Vec<[f64; 2]>),
}

/// A quasi-cubical mesh with an embedding in a chart.
#[derive(Clone, Debug)]
pub struct EmbeddedMesh {
    mesh: QuasiCubicalMesh,
    chart: Chart,
    shapes: Vec<Vec<CellShape>>,
}

impl EmbeddedMesh {
    /// Subdivides a chart-box mesh; Forman cells are embedded by chart midpoints.
    pub fn from_chart_complex(m: &CellComplex, chart: Chart, boxes: &[Vec<Vec<Extent>>]) -> Result<Self> {
        let k = forman_subdivide(m)?;
        let intervals = k.intervals().expect("built by subdivision").to_vec();
        let mut extents: Vec<Vec<Vec<Extent>>> = Vec::with_capacity(intervals.len());
        for level in &intervals {
            let boxes_p = level
                .iter()
                .map(|iv| {
                    let a = &boxes[iv.lower.dim][iv.lower.index];
                    let b = &boxes[iv.upper.dim][iv.upper.index];
                    (0..chart.dim()).map(|axis| forman_extent(&chart, axis, a[axis], b[axis])).collect()
                })
                .collect::<Result<Vec<Vec<Extent>>>>()?;
            extents.push(boxes_p);
        }
        let signs = box_signs(&chart, k.complex(), &extents)?;
        let (k, signs) = make_top_positive(k, signs, |k| box_signs(&chart, k.complex(), &extents))?;
        let shapes = extents
            .into_iter()
            .zip(signs)
            .map(|(level, s)| {
                level.into_iter().zip(s).map(|(extents, sign)| CellShape::Box { extents, sign }).collect()
            })
            .collect();
        Ok(Self { mesh: k, chart, shapes })
    }

    /// Subdivides a straight planar polygon mesh; Forman nodes sit at vertices,
    /// edge midpoints and vertex-average centroids.
    pub fn from_planar_complex(m: &CellComplex, vertices: &[[f64; 2]]) -> Result<Self> {
        if m.dim() != 2 || vertices.len() != m.count(0) {
            return Err(CmcError::Geometry("planar embedding needs a 2D mesh and one point per node".into()));
        }
        let k = forman_subdivide(m)?;
        let intervals = k.intervals().expect("built by subdivision").to_vec();
        let point_of = |cell: CellId| -> [f64; 2] {
            let nodes = m.nodes_of(cell);
            let n = nodes.len() as f64;
            let (sx, sy) = nodes.iter().fold((0.0, 0.0), |(x, y), &i| (x + vertices[i][0], y + vertices[i][1]));
            [sx / n, sy / n]
        };
        let points: Vec<[f64; 2]> = intervals[0].iter().map(|iv| point_of(iv.upper)).collect();
        let build = |k: &QuasiCubicalMesh| -> Result<Vec<Vec<CellShape>>> {
            let c = k.complex();
            let nodes = points.iter().map(|&p| CellShape::Point(p)).collect();
            let edges = (0..c.count(1))
                .map(|e| {
                    let f = c.faces(CellId::new(1, e));
                    let tail = f.iter().find(|x| x.1 < 0).expect("edge tail").0;
                    let head = f.iter().find(|x| x.1 > 0).expect("edge head").0;
                    CellShape::Segment(points[tail], points[head])
                })
                .collect();
            let faces = (0..c.count(2))
                .map(|a| Ok(CellShape::Polygon(boundary_loop(c, a)?.into_iter().map(|n| points[n]).collect())))
                .collect::<Result<Vec<_>>>()?;
            Ok(vec![nodes, edges, faces])
        };
        let shapes = build(&k)?;
        let signs = vec![vec![1; k.count(0)], vec![1; k.count(1)], polygon_signs(&shapes[2])];
        let (k, _) = make_top_positive(k, signs, |k| {
            let s = build(k)?;
            Ok(vec![vec![1; k.count(0)], vec![1; k.count(1)], polygon_signs(&s[2])])
        })?;
        let shapes = build(&k)?;
        Ok(Self { mesh: k, chart: Chart::Cartesian(2), shapes })
    }

    pub fn mesh(&self) -> &QuasiCubicalMesh {
        &self.mesh
    }

    pub fn complex(&self) -> &CellComplex {
        self.mesh.complex()
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn shape(&self, cell: CellId) -> &CellShape {
        &self.shapes[cell.dim][cell.index]
    }

    pub fn set_label(&mut self, name: impl Into<String>, cells: Vec<Vec<usize>>) -> Result<()> {
        self.mesh.set_label(name, cells)
    }

    /// Chart coordinates of the center of a cell.
    pub fn center(&self, cell: CellId) -> Vec<f64> {
        match self.shape(cell) {
            CellShape::Box { extents, .. } => extents.iter().map(Extent::center).collect(),
            CellShape::Point(p) => p.to_vec(),
            CellShape::Segment(a, b) => vec![(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0],
            CellShape::Polygon(ps) => {
                let n = ps.len() as f64;
                vec![ps.iter().map(|p| p[0]).sum::<f64>() / n, ps.iter().map(|p| p[1]).sum::<f64>() / n]
            }
        }
    }

    pub fn center_cartesian(&self, cell: CellId) -> [f64; 3] {
        self.chart.to_cartesian(&self.center(cell))
    }

    pub fn node_position(&self, node: usize) -> [f64; 3] {
        self.center_cartesian(CellId::new(0, node))
    }

    pub fn node_positions(&self) -> Vec<[f64; 3]> {
        (0..self.mesh.count(0)).map(|n| self.node_position(n)).collect()
    }

    /// Unit Cartesian tangent of an edge at its center, along its orientation.
    pub fn edge_tangent(&self, edge: usize) -> [f64; 3] {
        let t = match self.shape(CellId::new(1, edge)) {
            CellShape::Segment(a, b) => [b[0] - a[0], b[1] - a[1], 0.0],
            CellShape::Box { extents, sign } => {
                let k = extents.iter().position(Extent::is_span).expect("edge spans one axis");
                let Extent::Span(lo, hi) = extents[k] else { unreachable!() };
                let h = (hi - lo) * 1e-4;
                let mut x: Vec<f64> = extents.iter().map(Extent::center).collect();
                x[k] += h;
                let plus = self.chart.to_cartesian(&x);
                x[k] -= 2.0 * h;
                let minus = self.chart.to_cartesian(&x);
                let s = f64::from(*sign);
                [s * (plus[0] - minus[0]), s * (plus[1] - minus[1]), s * (plus[2] - minus[2])]
            }
            _ => unreachable!("edges are segments or boxes"),
        };
        let n = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
        [t[0] / n, t[1] / n, t[2] / n]
    }

    /// Riemannian measure of a cell (1 for nodes).
    pub fn cell_measure(&self, cell: CellId) -> f64 {
        match self.shape(cell) {
            CellShape::Box { extents, .. } => self.chart.box_measure(extents),
            CellShape::Point(_) => 1.0,
            CellShape::Segment(a, b) => ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt(),
            CellShape::Polygon(ps) => shoelace(ps).abs(),
        }
    }

    pub fn measures(&self) -> Result<MetricData> {
        let levels = (0..=self.dim())
            .map(|p| (0..self.mesh.count(p)).map(|i| self.cell_measure(CellId::new(p, i))).collect())
            .collect();
        MetricData::new(self.complex(), levels)
    }

    /// Sum of the top-cell measures.
    pub fn total_measure(&self) -> f64 {
        let d = self.dim();
        (0..self.mesh.count(d)).map(|i| self.cell_measure(CellId::new(d, i))).sum()
    }

    pub fn riemannian(&self) -> Result<RiemannianMesh> {
        RiemannianMesh::new(self.mesh.clone(), self.measures()?)
    }

    /// Boundary `(D-1)`-cells whose center satisfies `pred(chart coords, cartesian coords)`.
    pub fn boundary_facets_where(&self, pred: impl Fn(&[f64], [f64; 3]) -> bool) -> Vec<usize> {
        let d = self.dim();
        self.complex()
            .boundary_facets()
            .into_iter()
            .filter(|&c| {
                let cell = CellId::new(d - 1, c);
                pred(&self.center(cell), self.center_cartesian(cell))
            })
            .collect()
    }
}

/// Extent of the Forman cell `[a, b]` along one axis.
fn forman_extent(chart: &Chart, axis: usize, a: Extent, b: Extent) -> Result<Extent> {
    Ok(match (a, b) {
        (_, Extent::At(s)) => Extent::At(s),
        (_, Extent::Free) => Extent::Free,
        (Extent::Span(..), Extent::Span(lo, hi)) => Extent::At((lo + hi) / 2.0),
        (Extent::Free, Extent::Span(lo, hi)) => Extent::Span(lo, hi),
        (Extent::At(s), Extent::Span(lo, hi)) => {
            let mid = (lo + hi) / 2.0;
            if chart.same(axis, s, lo) {
                Extent::Span(lo, mid)
            } else if chart.same(axis, s, hi) {
                Extent::Span(mid, hi)
            } else {
                return Err(CmcError::Geometry(format!("subface at {s} is not on a side of [{lo}, {hi}]")));
            }
        }
    })
}

/// Orientation of every box cell relative to its increasing-axis orientation.
fn box_signs(chart: &Chart, k: &CellComplex, extents: &[Vec<Vec<Extent>>]) -> Result<Vec<Vec<Sign>>> {
    let mut signs: Vec<Vec<Sign>> = vec![vec![1; k.count(0)]];
    for p in 1..=k.dim() {
        let level = (0..k.count(p))
            .map(|a| {
                let mut found: Option<Sign> = None;
                for &(c, eps) in k.faces(CellId::new(p, a)) {
                    let geometric = box_incidence(chart, &extents[p][a], &extents[p - 1][c])?;
                    let s = eps * geometric * signs[p - 1][c];
                    match found {
                        None => found = Some(s),
                        Some(f) if f != s => {
                            return Err(CmcError::Geometry(format!(
                                "{} has an orientation inconsistent with its chart box",
                                CellId::new(p, a)
                            )))
                        }
                        Some(_) => {}
                    }
                }
                Ok(found.unwrap_or(1))
            })
            .collect::<Result<Vec<_>>>()?;
        signs.push(level);
    }
    Ok(signs)
}

/// Flips all top cells when every one of them is negatively oriented in the chart.
fn make_top_positive(
    k: QuasiCubicalMesh,
    signs: Vec<Vec<Sign>>,
    recompute: impl Fn(&QuasiCubicalMesh) -> Result<Vec<Vec<Sign>>>,
) -> Result<(QuasiCubicalMesh, Vec<Vec<Sign>>)> {
    let d = k.dim();
    if d == 0 {
        return Ok((k, signs));
    }
    let top = &signs[d];
    if top.iter().all(|&s| s > 0) {
        Ok((k, signs))
    } else if top.iter().all(|&s| s < 0) {
        let k = k.flip_top_cells()?;
        let signs = recompute(&k)?;
        Ok((k, signs))
    } else {
        Err(CmcError::Geometry("top cells have mixed chart orientations".into()))
    }
}

/// Node sequence of the oriented boundary loop of a 2-cell.
pub(crate) fn boundary_loop(c: &CellComplex, face: usize) -> Result<Vec<usize>> {
    let edges = c.faces(CellId::new(2, face));
    let directed: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(e, s)| {
            let f = c.faces(CellId::new(1, e));
            let tail = f.iter().find(|x| x.1 < 0).expect("edge tail").0;
            let head = f.iter().find(|x| x.1 > 0).expect("edge head").0;
            if s > 0 {
                (tail, head)
            } else {
                (head, tail)
            }
        })
        .collect();
    let mut nodes = vec![directed[0].0];
    let mut current = directed[0].1;
    while current != nodes[0] {
        if nodes.len() > directed.len() {
            return Err(CmcError::Geometry(format!("2-cell {face} has no simple oriented boundary loop")));
        }
        nodes.push(current);
        current = directed
            .iter()
            .find(|d| d.0 == current)
            .ok_or_else(|| CmcError::Geometry(format!("2-cell {face} has a broken boundary loop")))?
            .1;
    }
    if nodes.len() != directed.len() {
        return Err(CmcError::Geometry(format!("2-cell {face} has a broken boundary loop")));
    }
    Ok(nodes)
}

fn polygon_signs(shapes: &[CellShape]) -> Vec<Sign> {
    shapes
        .iter()
        .map(|s| match s {
            CellShape::Polygon(ps) if shoelace(ps) < 0.0 => -1,
            _ => 1,
        })
        .collect()
}

/// Signed area of a polygon (positive when counterclockwise).
pub fn shoelace(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_measures_match_metric_quadrature() {
        for chart in [Chart::Polar, Chart::Spherical] {
            let b = [Extent::Span(0.3, 0.7), Extent::Span(1.0, 2.5)];
            let numeric = quadrature::integrate_box(&[(0.3, 0.7), (1.0, 2.5)], &mut |x| {
                chart.metric_diagonal(x).iter().product::<f64>().sqrt()
            });
            assert!((chart.box_measure(&b) - numeric).abs() < 1e-12);
            let arc = [Extent::At(0.3), Extent::Span(1.0, 2.5)];
            let g = chart.metric_diagonal(&[0.3, 0.0])[1].sqrt();
            assert!((chart.box_measure(&arc) - g * 1.5).abs() < 1e-15);
        }
    }

    #[test]
    fn forman_extent_wraps_the_periodic_axis() {
        let c = Chart::Polar;
        let e = forman_extent(&c, 1, Extent::At(0.0), Extent::Span(4.0 * PI / 3.0, 2.0 * PI)).unwrap();
        let Extent::Span(lo, hi) = e else { panic!("expected a span, got {e:?}") };
        assert!((lo - 5.0 * PI / 3.0).abs() < 1e-14 && hi == 2.0 * PI);
        assert_eq!(forman_extent(&c, 1, Extent::Free, Extent::Span(0.0, 1.0)).unwrap(), Extent::Span(0.0, 1.0));
    }

    #[test]
    fn shoelace_sign() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(shoelace(&sq), 1.0);
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert_eq!(shoelace(&rev), -1.0);
    }
}
