//! Structured mesh generators.
//!
//! Index orders are fixed so that golden numbers are reproducible:
//! grid cells are grouped by their set of spanning axes (lexicographic), then
//! by lower corner with axis 0 varying fastest. Polar-type meshes number the
//! center first, then rings outward with the angle varying fastest; radial
//! edges precede arcs.

use std::f64::consts::PI;

use super::forms::combinations;
use super::{signed_box_complex, Chart, EmbeddedMesh, Extent};
use crate::error::{CmcError, Result};

/// Regular grid on `[0, L_0] × … × [0, L_{d-1}]` with `n_k` cells per axis.
pub fn grid_mesh(lengths: &[f64], n: &[usize]) -> Result<EmbeddedMesh> {
    let d = lengths.len();
    if d == 0 || d > 3 || n.len() != d {
        return Err(CmcError::UnsupportedDimension(format!("grid of dimension {d}")));
    }
    if n.contains(&0) || lengths.iter().any(|&l| l.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)) {
        return Err(CmcError::Geometry("grid needs at least one cell and positive size per axis".into()));
    }
    let coord = |k: usize, i: usize| lengths[k] * i as f64 / n[k] as f64;

    // per dimension: the spanning-axis sets, their corner ranges and index offsets
    let mut blocks: Vec<Vec<(Vec<usize>, Vec<usize>, usize)>> = Vec::with_capacity(d + 1);
    for p in 0..=d {
        let mut offset = 0;
        let mut level = Vec::new();
        for axes in combinations(d, p) {
            let ranges: Vec<usize> = (0..d).map(|k| if axes.contains(&k) { n[k] } else { n[k] + 1 }).collect();
            let size: usize = ranges.iter().product();
            level.push((axes, ranges, offset));
            offset += size;
        }
        blocks.push(level);
    }
    let locate = |axes: &[usize], corner: &[usize]| -> usize {
        let p = axes.len();
        let (_, ranges, offset) = blocks[p].iter().find(|b| b.0 == axes).expect("axis set");
        let mut idx = 0;
        for k in (0..d).rev() {
            idx = idx * ranges[k] + corner[k];
        }
        offset + idx
    };

    let mut boxes: Vec<Vec<Vec<Extent>>> = Vec::with_capacity(d + 1);
    let mut hyperfaces: Vec<Vec<Vec<usize>>> = Vec::with_capacity(d + 1);
    for level in blocks.iter() {
        let mut b = Vec::new();
        let mut h = Vec::new();
        for (axes, ranges, _) in level {
            let size: usize = ranges.iter().product();
            for lin in 0..size {
                let mut corner = vec![0; d];
                let mut rest = lin;
                for k in 0..d {
                    corner[k] = rest % ranges[k];
                    rest /= ranges[k];
                }
                b.push(
                    (0..d)
                        .map(|k| {
                            if axes.contains(&k) {
                                Extent::Span(coord(k, corner[k]), coord(k, corner[k] + 1))
                            } else {
                                Extent::At(coord(k, corner[k]))
                            }
                        })
                        .collect(),
                );
                let mut faces = Vec::new();
                for &k in axes {
                    let sub: Vec<usize> = axes.iter().copied().filter(|&a| a != k).collect();
                    faces.push(locate(&sub, &corner));
                    let mut up = corner.clone();
                    up[k] += 1;
                    faces.push(locate(&sub, &up));
                }
                h.push(faces);
            }
        }
        boxes.push(b);
        hyperfaces.push(h);
    }
    let chart = Chart::Cartesian(d);
    let m = signed_box_complex(&chart, hyperfaces, &boxes)?;
    EmbeddedMesh::from_chart_complex(&m, chart, &boxes)
}

/// Unit cube split into `nx × ny × nz` boxes.
pub fn cube_mesh(nx: usize, ny: usize, nz: usize) -> Result<EmbeddedMesh> {
    grid_mesh(&[1.0, 1.0, 1.0], &[nx, ny, nz])
}

/// `[0, w] × [0, h]` split into `nx × ny` rectangles.
pub fn rect_mesh(w: f64, h: f64, nx: usize, ny: usize) -> Result<EmbeddedMesh> {
    grid_mesh(&[w, h], &[nx, ny])
}

/// Unit disk in polar coordinates: `nr` rings and `nphi` sectors; the
/// innermost ring consists of three-sided pie slices around the center node.
pub fn polar_disk_mesh(nr: usize, nphi: usize) -> Result<EmbeddedMesh> {
    rotational_mesh(Chart::Polar, 1.0, nr, nphi)
}

/// Northern unit hemisphere in `(θ, φ)`: `ntheta` latitude bands, `nphi` sectors.
pub fn hemisphere_mesh(ntheta: usize, nphi: usize) -> Result<EmbeddedMesh> {
    rotational_mesh(Chart::Spherical, PI / 2.0, ntheta, nphi)
}

fn rotational_mesh(chart: Chart, rmax: f64, nr: usize, nphi: usize) -> Result<EmbeddedMesh> {
    if nr == 0 {
        return Err(CmcError::Geometry("need at least one ring".into()));
    }
    if nphi < 3 {
        return Err(CmcError::Geometry(format!("need at least 3 sectors, got {nphi}")));
    }
    let r = |i: usize| rmax * i as f64 / nr as f64;
    let phi = |j: usize| 2.0 * PI * j as f64 / nphi as f64;
    let node = |i: usize, j: usize| if i == 0 { 0 } else { 1 + (i - 1) * nphi + j % nphi };
    let radial = |i: usize, j: usize| i * nphi + j % nphi;
    let arc = |i: usize, j: usize| nr * nphi + (i - 1) * nphi + j % nphi;

    let mut nodes = vec![vec![Extent::At(0.0), Extent::Free]];
    for i in 1..=nr {
        for j in 0..nphi {
            nodes.push(vec![Extent::At(r(i)), Extent::At(phi(j))]);
        }
    }
    let mut edges = Vec::new();
    let mut edge_faces = Vec::new();
    for i in 0..nr {
        for j in 0..nphi {
            edges.push(vec![Extent::Span(r(i), r(i + 1)), Extent::At(phi(j))]);
            edge_faces.push(vec![node(i, j), node(i + 1, j)]);
        }
    }
    for i in 1..=nr {
        for j in 0..nphi {
            edges.push(vec![Extent::At(r(i)), Extent::Span(phi(j), phi(j + 1))]);
            edge_faces.push(vec![node(i, j), node(i, j + 1)]);
        }
    }
    let mut faces = Vec::new();
    let mut face_faces = Vec::new();
    for i in 0..nr {
        for j in 0..nphi {
            faces.push(vec![Extent::Span(r(i), r(i + 1)), Extent::Span(phi(j), phi(j + 1))]);
            let mut list = vec![radial(i, j), arc(i + 1, j), radial(i, j + 1)];
            if i > 0 {
                list.push(arc(i, j));
            }
            face_faces.push(list);
        }
    }
    let boxes = vec![nodes, edges, faces];
    let hyperfaces = vec![vec![Vec::new(); boxes[0].len()], edge_faces, face_faces];
    let m = signed_box_complex(&chart, hyperfaces, &boxes)?;
    EmbeddedMesh::from_chart_complex(&m, chart, &boxes)
}
