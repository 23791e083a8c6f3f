//! Two-dimensional subset of the Neper `.tess` format.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use log::warn;

use super::{shoelace, EmbeddedMesh};
use crate::complex::{CellComplex, Incidence};
use crate::error::{CmcError, Result};

/// Straight polygonal tessellation of a planar domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarTessellation {
    pub vertices: Vec<[f64; 2]>,
    /// `[tail, head]` vertex indices.
    pub edges: Vec<[usize; 2]>,
    /// Vertex loops, one per face.
    pub faces: Vec<Vec<usize>>,
}

struct Tokens<'a> {
    items: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        let t = self
            .items
            .get(self.pos)
            .ok_or_else(|| CmcError::Parse(format!("unexpected end of file while reading {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let t = self.next(what)?;
        t.parse().map_err(|_| CmcError::Parse(format!("expected {what}, found `{t}`")))
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).copied()
    }
}

/// Converts a 1-based `.tess` id to a 0-based index.
fn index(id: i64, count: usize, what: &str) -> Result<usize> {
    if id < 1 || id as usize > count {
        return Err(CmcError::Parse(format!("{what} id {id} out of range 1..={count}")));
    }
    Ok(id as usize - 1)
}

pub fn parse_tess(text: &str) -> Result<PlanarTessellation> {
    let mut tk = Tokens { items: text.split_whitespace().collect(), pos: 0 };
    let mut vertices: Option<Vec<[f64; 2]>> = None;
    let mut edges: Option<Vec<[usize; 2]>> = None;
    let mut raw_faces: Option<Vec<(Vec<i64>, Vec<i64>)>> = None;
    while let Some(tok) = tk.peek() {
        tk.pos += 1;
        match tok {
            "***tess" | "***end" => {}
            "**vertex" => {
                let n: usize = tk.number("vertex count")?;
                let mut vs = Vec::with_capacity(n);
                for _ in 0..n {
                    let _id: i64 = tk.number("vertex id")?;
                    let x: f64 = tk.number("vertex x")?;
                    let y: f64 = tk.number("vertex y")?;
                    let _z: f64 = tk.number("vertex z")?;
                    tk.next("vertex state")?;
                    vs.push([x, y]);
                }
                vertices = Some(vs);
            }
            "**edge" => {
                let n: usize = tk.number("edge count")?;
                let mut es = Vec::with_capacity(n);
                for _ in 0..n {
                    let _id: i64 = tk.number("edge id")?;
                    let a: i64 = tk.number("edge vertex")?;
                    let b: i64 = tk.number("edge vertex")?;
                    tk.next("edge state")?;
                    es.push([a, b]);
                }
                let nv = vertices.as_ref().map_or(0, Vec::len);
                edges = Some(
                    es.into_iter()
                        .map(|[a, b]| Ok([index(a, nv, "vertex")?, index(b, nv, "vertex")?]))
                        .collect::<Result<_>>()?,
                );
            }
            "**face" => {
                let n: usize = tk.number("face count")?;
                let mut fs = Vec::with_capacity(n);
                for _ in 0..n {
                    let _id: i64 = tk.number("face id")?;
                    let nver: usize = tk.number("face vertex count")?;
                    let vers = (0..nver).map(|_| tk.number("face vertex")).collect::<Result<Vec<i64>>>()?;
                    let nedge: usize = tk.number("face edge count")?;
                    let eds = (0..nedge).map(|_| tk.number("face edge")).collect::<Result<Vec<i64>>>()?;
                    for _ in 0..4 {
                        tk.number::<f64>("face equation")?;
                    }
                    for _ in 0..5 {
                        tk.next("face state")?;
                    }
                    fs.push((vers, eds));
                }
                raw_faces = Some(fs);
            }
            s if s.starts_with("**") => {
                warn!("skipping .tess section `{s}`");
                while tk.peek().is_some_and(|t| !t.starts_with("**")) {
                    tk.pos += 1;
                }
            }
            other => return Err(CmcError::Parse(format!("unexpected token `{other}`"))),
        }
    }
    let vertices = vertices.ok_or_else(|| CmcError::Parse("missing **vertex section".into()))?;
    let edges = edges.ok_or_else(|| CmcError::Parse("missing **edge section".into()))?;
    let raw_faces = raw_faces.ok_or_else(|| CmcError::Parse("missing **face section".into()))?;
    let lookup: HashMap<(usize, usize), usize> =
        edges.iter().enumerate().map(|(i, &[a, b])| ((a.min(b), a.max(b)), i)).collect();
    let mut faces = Vec::with_capacity(raw_faces.len());
    for (f, (vers, eds)) in raw_faces.into_iter().enumerate() {
        let loop_: Vec<usize> = vers.iter().map(|&v| index(v, vertices.len(), "vertex")).collect::<Result<_>>()?;
        let mut from_loop = BTreeSet::new();
        for k in 0..loop_.len() {
            let (a, b) = (loop_[k], loop_[(k + 1) % loop_.len()]);
            let e = lookup
                .get(&(a.min(b), a.max(b)))
                .ok_or_else(|| CmcError::Parse(format!("face {} uses a missing edge", f + 1)))?;
            from_loop.insert(*e);
        }
        let listed: BTreeSet<usize> =
            eds.iter().map(|&e| index(e.abs(), edges.len(), "edge")).collect::<Result<_>>()?;
        if from_loop != listed || from_loop.len() != loop_.len() {
            return Err(CmcError::Parse(format!("face {} edge list disagrees with its vertex loop", f + 1)));
        }
        faces.push(loop_);
    }
    Ok(PlanarTessellation { vertices, edges, faces })
}

pub fn read_tess(path: impl AsRef<Path>) -> Result<PlanarTessellation> {
    parse_tess(&std::fs::read_to_string(path)?)
}

pub fn write_tess(t: &PlanarTessellation) -> String {
    let lookup: HashMap<(usize, usize), usize> =
        t.edges.iter().enumerate().map(|(i, &[a, b])| ((a.min(b), a.max(b)), i)).collect();
    let mut s = String::new();
    let _ = writeln!(s, "***tess\n **format\n   3.4\n **general\n   2 standard");
    let _ = writeln!(s, " **vertex\n {}", t.vertices.len());
    for (i, v) in t.vertices.iter().enumerate() {
        let _ = writeln!(s, " {} {:.17e} {:.17e} 0 0", i + 1, v[0], v[1]);
    }
    let _ = writeln!(s, " **edge\n {}", t.edges.len());
    for (i, e) in t.edges.iter().enumerate() {
        let _ = writeln!(s, " {} {} {} 0", i + 1, e[0] + 1, e[1] + 1);
    }
    let _ = writeln!(s, " **face\n {}", t.faces.len());
    for (i, f) in t.faces.iter().enumerate() {
        let vers: Vec<String> = f.iter().map(|v| (v + 1).to_string()).collect();
        let eds: Vec<String> = (0..f.len())
            .map(|k| {
                let (a, b) = (f[k], f[(k + 1) % f.len()]);
                let e = lookup[&(a.min(b), a.max(b))];
                let sign = if t.edges[e][0] == a { 1 } else { -1 };
                (sign * (e as i64 + 1)).to_string()
            })
            .collect();
        let (cx, cy) = f.iter().fold((0.0, 0.0), |(x, y), &v| (x + t.vertices[v][0], y + t.vertices[v][1]));
        let n = f.len() as f64;
        let _ = writeln!(s, " {} {} {}", i + 1, f.len(), vers.join(" "));
        let _ = writeln!(s, "   {} {}", f.len(), eds.join(" "));
        let _ = writeln!(s, "   0 0 0 1");
        let _ = writeln!(s, "   0 0 {:.17e} {:.17e} 0", cx / n, cy / n);
    }
    s.push_str("***end\n");
    s
}

impl PlanarTessellation {
    /// Mesh with edges from tail to head and faces oriented counterclockwise.
    pub fn to_complex(&self) -> Result<CellComplex> {
        let lookup: HashMap<(usize, usize), usize> =
            self.edges.iter().enumerate().map(|(i, &[a, b])| ((a.min(b), a.max(b)), i)).collect();
        let edge_faces = self.edges.iter().map(|&[a, b]| vec![(a, -1), (b, 1)]).collect();
        let mut face_faces: Vec<Incidence> = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            let pts: Vec<[f64; 2]> = f.iter().map(|&v| self.vertices[v]).collect();
            let ccw: i8 = if shoelace(&pts) >= 0.0 { 1 } else { -1 };
            let list = (0..f.len())
                .map(|k| {
                    let (a, b) = (f[k], f[(k + 1) % f.len()]);
                    let e = lookup[&(a.min(b), a.max(b))];
                    let along: i8 = if self.edges[e][0] == a { 1 } else { -1 };
                    (e, along * ccw)
                })
                .collect();
            face_faces.push(list);
        }
        let counts = vec![self.vertices.len(), self.edges.len(), self.faces.len()];
        CellComplex::new(counts, vec![vec![Vec::new(); self.vertices.len()], edge_faces, face_faces])?
            .orient_top_cells()
    }

    pub fn to_embedded(&self) -> Result<EmbeddedMesh> {
        EmbeddedMesh::from_planar_complex(&self.to_complex()?, &self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| shoelace(&f.iter().map(|&v| self.vertices[v]).collect::<Vec<_>>()).abs())
            .sum()
    }
}
