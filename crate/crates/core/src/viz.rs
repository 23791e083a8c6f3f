//! Figures: SVG heat maps with flux arrows for `D = 2`, legacy VTK for `D = 3`.
//!
//! Potentials are drawn as a flat fill per top cell (mean of its node values).
//! A flux `q(S)` on a `(D-1)`-cell `S` with cofaces `V+` (`ε = +1`) and `V-`
//! is an arrow crossing `S` from `V+` to `V-` when `q(S) > 0` and back when
//! `q(S) < 0`. A missing coface is a ghost cell in the background.
//! Arrows are colored by `|q(S)|` as is, without dividing by `μ(S)`.

use std::fmt::Write as _;

use crate::complex::{CellComplex, CellId};
use crate::error::{CmcError, Result};
use crate::geometry::{boundary_loop, CellShape, EmbeddedMesh, Extent};
use crate::io::MeshFile;

/// Sub-segments per curved edge in SVG outlines.
const CURVE_SAMPLES: usize = 8;

/// Linear hue sweep from red (0°) to magenta (300°) at full saturation and value.
pub fn rainbow(t: f64) -> [u8; 3] {
    let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
    let h = 5.0 * t;
    let sector = (h.floor() as usize).min(4);
    let f = h - sector as f64;
    let up = (255.0 * f).round() as u8;
    let down = 255 - up;
    match sector {
        0 => [255, up, 0],
        1 => [down, 255, 0],
        2 => [0, 255, up],
        3 => [0, down, 255],
        _ => [up, 0, 255],
    }
}

/// Hue in degrees of a color produced by [`rainbow`].
pub fn hue_of(rgb: [u8; 3]) -> f64 {
    let [r, g, b] = rgb.map(f64::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    if max == min {
        return 0.0;
    }
    let d = max - min;
    let h = if max == r {
        ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        (b - r) / d + 2.0
    } else {
        (r - g) / d + 4.0
    };
    60.0 * h
}

fn hex(rgb: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueRange {
    Auto,
    Fixed(f64, f64),
}

impl ValueRange {
    fn resolve(self, values: impl Iterator<Item = f64>) -> (f64, f64) {
        match self {
            ValueRange::Fixed(lo, hi) => (lo, hi),
            ValueRange::Auto => values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))),
        }
    }
}

fn normalized(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    /// Canvas width and height in pixels.
    pub width: u32,
    pub height: u32,
    pub u_range: ValueRange,
    pub q_range: ValueRange,
    pub arrows: bool,
    /// Arrow length in model units; `None` picks 0.3 of the mean facet length.
    pub arrow_length: Option<f64>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            width: 800,
            height: 800,
            u_range: ValueRange::Auto,
            q_range: ValueRange::Auto,
            arrows: true,
            arrow_length: None,
        }
    }
}

/// One flux glyph: a facet midpoint and the unit normal pointing from `V+` to `V-`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FacetGlyph {
    pub mid: [f64; 2],
    pub normal: [f64; 2],
    pub length: f64,
}

/// A 2D mesh projected onto the `xy` plane.
#[derive(Clone, Debug)]
pub struct Drawing {
    /// Closed outline of each top cell.
    pub outlines: Vec<Vec<[f64; 2]>>,
    pub cell_nodes: Vec<Vec<usize>>,
    pub glyphs: Vec<FacetGlyph>,
    node_count: usize,
}

fn xy(p: [f64; 3]) -> [f64; 2] {
    [p[0], p[1]]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn unit(a: [f64; 2]) -> [f64; 2] {
    let n = a[0].hypot(a[1]);
    if n > 0.0 {
        [a[0] / n, a[1] / n]
    } else {
        [0.0, 0.0]
    }
}

fn polyline_length(ps: &[[f64; 2]]) -> f64 {
    ps.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum()
}

/// Normal of the facet with tangent `t` at `mid`, oriented from `V+` to `V-`.
fn crossing_normal(c: &CellComplex, facet: usize, mid: [f64; 2], t: [f64; 2], center: impl Fn(usize) -> [f64; 2]) -> [f64; 2] {
    let n = unit([t[1], -t[0]]);
    let cofaces = c.cofaces(CellId::new(1, facet));
    let away = match (cofaces.iter().find(|x| x.1 > 0), cofaces.iter().find(|x| x.1 < 0)) {
        (Some(&(plus, _)), _) => sub(mid, center(plus)),
        (None, Some(&(minus, _))) => sub(center(minus), mid),
        (None, None) => return n,
    };
    if dot(n, away) >= 0.0 {
        n
    } else {
        [-n[0], -n[1]]
    }
}

/// Joins per-edge polylines along the boundary loop of a 2-cell.
fn outline(c: &CellComplex, face: usize, node: &dyn Fn(usize) -> [f64; 2], edge: &dyn Fn(usize) -> Vec<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    let nodes = boundary_loop(c, face)?;
    let edges = c.faces(CellId::new(2, face));
    let mut out = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        let b = nodes[(i + 1) % nodes.len()];
        let e = edges
            .iter()
            .map(|x| x.0)
            .find(|&e| {
                let f = c.faces(CellId::new(1, e));
                f.iter().any(|x| x.0 == a) && f.iter().any(|x| x.0 == b)
            })
            .ok_or_else(|| CmcError::Geometry(format!("2-cell {face}: no edge joins nodes {a} and {b}")))?;
        let mut ps = edge(e);
        let pa = node(a);
        let d = |p: [f64; 2]| dot(sub(p, pa), sub(p, pa));
        if d(ps[0]) > d(ps[ps.len() - 1]) {
            ps.reverse();
        }
        ps.pop();
        out.extend(ps);
    }
    Ok(out)
}

impl Drawing {
    /// Projects a 2D embedded mesh; curved edges are sampled in the chart.
    pub fn from_embedded(m: &EmbeddedMesh) -> Result<Self> {
        let c = m.complex();
        if c.dim() != 2 {
            return Err(CmcError::Geometry(format!("SVG rendering needs a 2D mesh, got D = {}", c.dim())));
        }
        let chart = m.chart();
        let edge_points = |e: usize| -> Vec<[f64; 2]> {
            match m.shape(CellId::new(1, e)) {
                CellShape::Segment(a, b) => vec![*a, *b],
                CellShape::Box { extents, .. } => {
                    let k = extents.iter().position(Extent::is_span).expect("edge spans one axis");
                    let Extent::Span(lo, hi) = extents[k] else { unreachable!() };
                    let mut x: Vec<f64> = extents.iter().map(Extent::center).collect();
                    (0..=CURVE_SAMPLES)
                        .map(|i| {
                            x[k] = lo + (hi - lo) * i as f64 / CURVE_SAMPLES as f64;
                            xy(chart.to_cartesian(&x))
                        })
                        .collect()
                }
                _ => unreachable!("edges are segments or boxes"),
            }
        };
        let node = |n: usize| xy(m.node_position(n));
        let outlines =
            (0..c.count(2)).map(|a| outline(c, a, &node, &edge_points)).collect::<Result<Vec<_>>>()?;
        let center = |a: usize| xy(m.center_cartesian(CellId::new(2, a)));
        let glyphs = (0..c.count(1))
            .map(|e| {
                let mid = xy(m.center_cartesian(CellId::new(1, e)));
                let t = xy(m.edge_tangent(e));
                FacetGlyph { mid, normal: crossing_normal(c, e, mid, t, center), length: polyline_length(&edge_points(e)) }
            })
            .collect();
        Ok(Self {
            outlines,
            cell_nodes: (0..c.count(2)).map(|a| c.nodes_of(CellId::new(2, a))).collect(),
            glyphs,
            node_count: c.count(0),
        })
    }

    /// Straight-edged drawing from node coordinates stored in a mesh file.
    pub fn from_mesh_file(file: &MeshFile) -> Result<Self> {
        let c = file.to_complex()?;
        let coords = file.coordinates_3d().ok_or_else(|| CmcError::Geometry("mesh file has no coordinates".into()))?;
        Self::from_points(&c, &coords)
    }

    pub fn from_points(c: &CellComplex, coords: &[[f64; 3]]) -> Result<Self> {
        if c.dim() != 2 {
            return Err(CmcError::Geometry(format!("SVG rendering needs a 2D mesh, got D = {}", c.dim())));
        }
        if coords.len() != c.count(0) {
            return Err(CmcError::Geometry(format!("{} coordinates for {} nodes", coords.len(), c.count(0))));
        }
        let node = |n: usize| xy(coords[n]);
        let ends = |e: usize| {
            let f = c.faces(CellId::new(1, e));
            let tail = f.iter().find(|x| x.1 < 0).expect("edge tail").0;
            let head = f.iter().find(|x| x.1 > 0).expect("edge head").0;
            (node(tail), node(head))
        };
        let edge_points = |e: usize| {
            let (a, b) = ends(e);
            vec![a, b]
        };
        let cell_nodes: Vec<Vec<usize>> = (0..c.count(2)).map(|a| c.nodes_of(CellId::new(2, a))).collect();
        let center = |a: usize| {
            let ns = &cell_nodes[a];
            let k = ns.len() as f64;
            [ns.iter().map(|&n| coords[n][0]).sum::<f64>() / k, ns.iter().map(|&n| coords[n][1]).sum::<f64>() / k]
        };
        let outlines =
            (0..c.count(2)).map(|a| outline(c, a, &node, &edge_points)).collect::<Result<Vec<_>>>()?;
        let glyphs = (0..c.count(1))
            .map(|e| {
                let (a, b) = ends(e);
                let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                FacetGlyph { mid, normal: crossing_normal(c, e, mid, sub(b, a), center), length: polyline_length(&[a, b]) }
            })
            .collect();
        Ok(Self { outlines, cell_nodes, glyphs, node_count: c.count(0) })
    }

    /// Flat fill value of each top cell.
    pub fn cell_means(&self, u: &[f64]) -> Vec<f64> {
        self.cell_nodes.iter().map(|ns| ns.iter().map(|&n| u[n]).sum::<f64>() / ns.len() as f64).collect()
    }

    /// Arrow direction per facet: `sign(q)` times the `V+ → V-` normal, `None` when `q = 0`.
    pub fn arrow_directions(&self, q: &[f64]) -> Vec<Option<[f64; 2]>> {
        self.glyphs
            .iter()
            .zip(q)
            .map(|(g, &v)| match v.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => Some(g.normal),
                Some(std::cmp::Ordering::Less) => Some([-g.normal[0], -g.normal[1]]),
                _ => None,
            })
            .collect()
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in self.outlines.iter().flatten() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// The SVG document; identical bytes for identical inputs.
    pub fn render_svg(&self, u: &[f64], q: &[f64], spec: &RenderSpec) -> Result<String> {
        if u.len() != self.node_count || q.len() != self.glyphs.len() {
            return Err(CmcError::DimensionMismatch(format!(
                "u has {} values for {} nodes, q has {} for {} facets",
                u.len(),
                self.node_count,
                q.len(),
                self.glyphs.len()
            )));
        }
        let (lo, hi) = self.bounds();
        let margin = 0.05 * f64::from(spec.width.min(spec.height));
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let scale = (f64::from(spec.width.min(spec.height)) - 2.0 * margin) / span;
        let to_px = |p: [f64; 2]| [margin + (p[0] - lo[0]) * scale, f64::from(spec.height) - margin - (p[1] - lo[1]) * scale];

        let means = self.cell_means(u);
        let u_range = spec.u_range.resolve(means.iter().copied());
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = spec.width,
            h = spec.height
        );
        let _ = writeln!(s, r#"<rect width="{}" height="{}" fill="white"/>"#, spec.width, spec.height);
        let _ = writeln!(s, r##"<g id="cells" stroke="#404040" stroke-width="0.5">"##);
        for (ps, &m) in self.outlines.iter().zip(&means) {
            let mut d = String::new();
            for (i, p) in ps.iter().enumerate() {
                let [x, y] = to_px(*p);
                let _ = write!(d, "{}{x:.3} {y:.3} ", if i == 0 { "M" } else { "L" });
            }
            d.push('Z');
            let _ = writeln!(s, r#"<path d="{d}" fill="{}"/>"#, hex(rainbow(normalized(m, u_range))));
        }
        s.push_str("</g>\n");

        if spec.arrows {
            let mean_len = self.glyphs.iter().map(|g| g.length).sum::<f64>() / self.glyphs.len().max(1) as f64;
            let len = spec.arrow_length.unwrap_or(0.3 * mean_len) * scale;
            let dirs = self.arrow_directions(q);
            let q_range = spec.q_range.resolve(q.iter().zip(&dirs).filter(|(_, d)| d.is_some()).map(|(v, _)| v.abs()));
            let _ = writeln!(s, r#"<g id="arrows" stroke-width="1.5">"#);
            for ((g, dir), &v) in self.glyphs.iter().zip(&dirs).zip(q) {
                let Some(n) = dir else { continue };
                let color = hex(rainbow(normalized(v.abs(), q_range)));
                let [mx, my] = to_px(g.mid);
                // Screen y points down.
                let (dx, dy) = (n[0], -n[1]);
                let (tx, ty) = (mx - 0.5 * len * dx, my - 0.5 * len * dy);
                let (hx, hy) = (mx + 0.5 * len * dx, my + 0.5 * len * dy);
                let head = 0.35 * len;
                let (bx, by) = (hx - head * dx, hy - head * dy);
                let (px, py) = (-dy * 0.5 * head, dx * 0.5 * head);
                let _ = writeln!(
                    s,
                    r#"<line x1="{tx:.3}" y1="{ty:.3}" x2="{bx:.3}" y2="{by:.3}" stroke="{color}"/><polygon points="{hx:.3},{hy:.3} {:.3},{:.3} {:.3},{:.3}" fill="{color}"/>"#,
                    bx + px,
                    by + py,
                    bx - px,
                    by - py
                );
            }
            s.push_str("</g>\n");
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}

const VTK_LINE: u8 = 3;
const VTK_QUAD: u8 = 9;
const VTK_HEXAHEDRON: u8 = 12;

fn triple_product(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn minus(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// The eight nodes of a quasi-cubical 3-cell in VTK hexahedron order.
fn hexahedron(c: &CellComplex, cell: usize, coords: &[[f64; 3]]) -> Result<[usize; 8]> {
    let bottom_face = c.faces(CellId::new(3, cell))[0].0;
    let bottom = boundary_loop(c, bottom_face)?;
    if bottom.len() != 4 {
        return Err(CmcError::Geometry(format!("3-cell {cell} is not a hexahedron")));
    }
    let edges = &c.closure(CellId::new(3, cell))[1];
    let mut top = [0; 4];
    for (k, &a) in bottom.iter().enumerate() {
        top[k] = edges
            .iter()
            .map(|&e| c.faces(CellId::new(1, e)))
            .filter(|f| f.iter().any(|x| x.0 == a))
            .flat_map(|f| f.iter().map(|x| x.0))
            .find(|n| !bottom.contains(n))
            .ok_or_else(|| CmcError::Geometry(format!("3-cell {cell} is not a hexahedron")))?;
    }
    let [a0, a1, a2, a3] = [bottom[0], bottom[1], bottom[2], bottom[3]];
    let v = triple_product(minus(coords[a1], coords[a0]), minus(coords[a3], coords[a0]), minus(coords[top[0]], coords[a0]));
    Ok(if v >= 0.0 {
        [a0, a1, a2, a3, top[0], top[1], top[2], top[3]]
    } else {
        [a0, a3, a2, a1, top[0], top[3], top[2], top[1]]
    })
}

fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:e}")
    }
}

/// Legacy ASCII VTK unstructured grid for a 2D or 3D mesh: top cells followed
/// by `(D-1)`-cells. Point data `u`; cell data `q` (zero on top cells) and `cell_dim`.
pub fn render_vtk(c: &CellComplex, coords: &[[f64; 3]], u: &[f64], q: &[f64]) -> Result<String> {
    let d = c.dim();
    if !(2..=3).contains(&d) {
        return Err(CmcError::Geometry(format!("VTK output supports D = 2 or 3, got {d}")));
    }
    if coords.len() != c.count(0) || u.len() != c.count(0) || q.len() != c.count(d - 1) {
        return Err(CmcError::DimensionMismatch("coordinates, u and q must match the mesh".into()));
    }
    let mut cells: Vec<(u8, Vec<usize>)> = Vec::with_capacity(c.count(d) + c.count(d - 1));
    for i in 0..c.count(d) {
        cells.push(if d == 3 {
            (VTK_HEXAHEDRON, hexahedron(c, i, coords)?.to_vec())
        } else {
            (VTK_QUAD, boundary_loop(c, i)?)
        });
    }
    for i in 0..c.count(d - 1) {
        cells.push(if d == 3 {
            (VTK_QUAD, boundary_loop(c, i)?)
        } else {
            let f = c.faces(CellId::new(1, i));
            (VTK_LINE, f.iter().map(|x| x.0).collect())
        });
    }

    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\ncmc result\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", coords.len());
    for p in coords {
        let _ = writeln!(s, "{} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]));
    }
    let size: usize = cells.iter().map(|(_, ns)| ns.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", cells.len());
    for (_, ns) in &cells {
        let _ = write!(s, "{}", ns.len());
        for n in ns {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", cells.len());
    for (t, _) in &cells {
        let _ = writeln!(s, "{t}");
    }
    let _ = writeln!(s, "POINT_DATA {}", u.len());
    s.push_str("SCALARS u double 1\nLOOKUP_TABLE default\n");
    for &v in u {
        let _ = writeln!(s, "{}", fmt_f64(v));
    }
    let _ = writeln!(s, "CELL_DATA {}", cells.len());
    s.push_str("SCALARS q double 1\nLOOKUP_TABLE default\n");
    for _ in 0..c.count(d) {
        s.push_str("0\n");
    }
    for &v in q {
        let _ = writeln!(s, "{}", fmt_f64(v));
    }
    s.push_str("SCALARS cell_dim int 1\nLOOKUP_TABLE default\n");
    for (i, _) in cells.iter().enumerate() {
        let _ = writeln!(s, "{}", if i < c.count(d) { d } else { d - 1 });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::catalog::catalog;
    use crate::geometry::generators::{cube_mesh, rect_mesh};

    #[test]
    fn rainbow_endpoints() {
        assert_eq!(rainbow(0.0), [255, 0, 0]);
        assert_eq!(rainbow(1.0), [255, 0, 255]);
        assert_eq!(rainbow(0.4), [0, 255, 0]);
        assert_eq!(hue_of(rainbow(1.0)), 300.0);
    }

    #[test]
    fn constant_potential_gives_one_fill() {
        let m = rect_mesh(2.0, 1.0, 2, 1).unwrap();
        let d = Drawing::from_embedded(&m).unwrap();
        let u = vec![3.0; m.complex().count(0)];
        let q = vec![0.0; m.complex().count(1)];
        let svg = d.render_svg(&u, &q, &RenderSpec::default()).unwrap();
        let fills: std::collections::BTreeSet<&str> =
            svg.match_indices("fill=\"#").map(|(i, _)| &svg[i + 6..i + 13]).collect();
        assert_eq!(fills.len(), 1);
        assert!(!svg.contains("<polygon"));
    }

    #[test]
    fn one_arrow_per_nonzero_flux() {
        let m = rect_mesh(1.0, 1.0, 1, 1).unwrap();
        let d = Drawing::from_embedded(&m).unwrap();
        let mut q = vec![0.0; m.complex().count(1)];
        q[0] = 1.0;
        q[3] = -2.0;
        let svg = d.render_svg(&vec![0.0; m.complex().count(0)], &q, &RenderSpec::default()).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 2);
    }

    #[test]
    fn interior_arrow_crosses_from_positive_to_negative_side() {
        let m = rect_mesh(2.0, 1.0, 2, 1).unwrap();
        let c = m.complex();
        let d = Drawing::from_embedded(&m).unwrap();
        for e in 0..c.count(1) {
            let cof = c.cofaces(CellId::new(1, e));
            if cof.len() != 2 {
                continue;
            }
            let plus = cof.iter().find(|x| x.1 > 0).unwrap().0;
            let minus = cof.iter().find(|x| x.1 < 0).unwrap().0;
            let step = sub(xy(m.center_cartesian(CellId::new(2, minus))), xy(m.center_cartesian(CellId::new(2, plus))));
            assert!(dot(d.glyphs[e].normal, step) > 0.0, "edge {e}");
        }
    }

    #[test]
    fn svg_bytes_are_deterministic() {
        let c = catalog("disk-quadratic").unwrap();
        let d = Drawing::from_embedded(&c.mesh).unwrap();
        let spec = RenderSpec::default();
        let a = d.render_svg(c.exact_u.values(), c.exact_q.values(), &spec).unwrap();
        let b = Drawing::from_embedded(&c.mesh).unwrap().render_svg(c.exact_u.values(), c.exact_q.values(), &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn file_drawing_matches_embedded_directions() {
        let c = catalog("disk-quadratic").unwrap();
        let file = MeshFile::from_embedded(&c.mesh).unwrap();
        let a = Drawing::from_embedded(&c.mesh).unwrap().arrow_directions(c.exact_q.values());
        let b = Drawing::from_mesh_file(&file).unwrap().arrow_directions(c.exact_q.values());
        for (x, y) in a.iter().zip(&b) {
            match (x, y) {
                (Some(x), Some(y)) => assert!(dot(*x, *y) > 0.9),
                (None, None) => {}
                _ => panic!("arrow presence differs"),
            }
        }
    }

    #[test]
    fn hexahedra_have_positive_volume() {
        let m = cube_mesh(1, 1, 1).unwrap();
        let c = m.complex();
        let coords = m.node_positions();
        for h in 0..c.count(3) {
            let n = hexahedron(c, h, &coords).unwrap();
            let v = triple_product(
                minus(coords[n[1]], coords[n[0]]),
                minus(coords[n[3]], coords[n[0]]),
                minus(coords[n[4]], coords[n[0]]),
            );
            assert!(v > 0.0);
            let mut sorted = n.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 8);
        }
    }
}
