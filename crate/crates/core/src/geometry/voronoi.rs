//! Seeded Voronoi tessellations of a rectangle.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tess::PlanarTessellation;
use crate::error::{CmcError, Result};

/// Voronoi tessellation of `[0, w] × [0, h]` with `cells` uniformly drawn seeds.
pub fn voronoi_rectangle(w: f64, h: f64, cells: usize, seed: u64) -> Result<PlanarTessellation> {
    if cells == 0 || w <= 0.0 || h <= 0.0 {
        return Err(CmcError::Geometry("Voronoi tessellation needs cells and a positive rectangle".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<[f64; 2]> = (0..cells).map(|_| [rng.random::<f64>() * w, rng.random::<f64>() * h]).collect();
    let tol = 1e-9 * w.max(h);

    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut faces = Vec::with_capacity(cells);
    for (i, s) in seeds.iter().enumerate() {
        let mut poly = vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
        for (j, t) in seeds.iter().enumerate() {
            if i != j {
                let n = [t[0] - s[0], t[1] - s[1]];
                let c = (n[0] * (s[0] + t[0]) + n[1] * (s[1] + t[1])) / 2.0;
                poly = clip(&poly, n, c);
            }
        }
        let mut loop_: Vec<usize> = Vec::with_capacity(poly.len());
        for p in poly {
            let v = match vertices.iter().position(|q| (q[0] - p[0]).abs() < tol && (q[1] - p[1]).abs() < tol) {
                Some(v) => v,
                None => {
                    vertices.push(p);
                    vertices.len() - 1
                }
            };
            if loop_.last() != Some(&v) {
                loop_.push(v);
            }
        }
        while loop_.len() > 1 && loop_.first() == loop_.last() {
            loop_.pop();
        }
        if loop_.len() < 3 {
            return Err(CmcError::Geometry(format!("Voronoi cell {i} degenerated")));
        }
        faces.push(loop_);
    }

    let mut edges = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for f in &faces {
        for k in 0..f.len() {
            let (a, b) = (f[k], f[(k + 1) % f.len()]);
            seen.entry((a.min(b), a.max(b))).or_insert_with(|| {
                edges.push([a, b]);
                edges.len() - 1
            });
        }
    }
    Ok(PlanarTessellation { vertices, edges, faces })
}

/// Sutherland–Hodgman clip of a convex polygon to `n · x ≤ c`.
fn clip(poly: &[[f64; 2]], n: [f64; 2], c: f64) -> Vec<[f64; 2]> {
    let side = |p: &[f64; 2]| n[0] * p[0] + n[1] * p[1] - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
        let (sp, sq) = (side(&p), side(&q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}
