//! Differential forms in chart coordinates and their de Rham discretization.

use std::fmt;
use std::sync::Arc;

use super::quadrature::{integrate_box, integrate_triangle, interval};
use super::{CellShape, EmbeddedMesh, Extent};
use crate::complex::{CellId, Cochain};
use crate::error::{CmcError, Result};

pub type Component = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A `p`-form on a chart: one coefficient function per increasing axis
/// multi-index, in lexicographic order (for `dim = 3, p = 2`:
/// `dx∧dy`, `dx∧dz`, `dy∧dz`).
#[derive(Clone)]
pub struct FormField {
    dim: usize,
    degree: usize,
    components: Vec<Component>,
}

impl fmt::Debug for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormField({}-form on a {}-dimensional chart)", self.degree, self.dim)
    }
}

/// Increasing `p`-subsets of `0..n`, lexicographically ordered.
pub fn combinations(n: usize, p: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, p, &mut Vec::new(), &mut out);
    out
}

impl FormField {
    pub fn new(dim: usize, degree: usize, components: Vec<Component>) -> Result<Self> {
        let expected = combinations(dim, degree).len();
        if degree > dim || components.len() != expected {
            return Err(CmcError::DimensionMismatch(format!(
                "{} components for a {degree}-form in dimension {dim}, expected {expected}",
                components.len()
            )));
        }
        Ok(Self { dim, degree, components })
    }

    pub fn scalar(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, degree: 0, components: vec![Arc::new(f)] }
    }

    /// A top-degree form `f dx¹∧…∧dxⁿ`.
    pub fn top(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, degree: dim, components: vec![Arc::new(f)] }
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        let n = combinations(dim, degree).len();
        Self { dim, degree, components: (0..n).map(|_| Arc::new(|_: &[f64]| 0.0) as Component).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient of `dx^{axes[0]} ∧ …` at `x`; `axes` must be increasing.
    pub fn eval(&self, axes: &[usize], x: &[f64]) -> f64 {
        let idx = combinations(self.dim, self.degree)
            .iter()
            .position(|c| c == axes)
            .expect("increasing axis multi-index");
        (self.components[idx])(x)
    }
}

impl EmbeddedMesh {
    /// de Rham map: integrates `form` over every embedded cell of its degree.
    pub fn derham(&self, form: &FormField) -> Result<Cochain> {
        let p = form.degree();
        if form.dim() != self.chart().dim() || p > self.dim() {
            return Err(CmcError::DimensionMismatch(format!(
                "{p}-form on a {}-dimensional chart cannot be integrated on this mesh",
                form.dim()
            )));
        }
        let values = (0..self.mesh().count(p))
            .map(|i| self.integrate_cell(CellId::new(p, i), form))
            .collect::<Result<Vec<_>>>()?;
        Ok(Cochain::new(p, values))
    }

    fn integrate_cell(&self, cell: CellId, form: &FormField) -> Result<f64> {
        let mismatch = || CmcError::DimensionMismatch(format!("{cell} does not carry a {}-form", form.degree()));
        match self.shape(cell) {
            CellShape::Box { extents, sign } => {
                let axes: Vec<usize> = (0..extents.len()).filter(|&k| extents[k].is_span()).collect();
                if axes.len() != form.degree() {
                    return Err(mismatch());
                }
                let base: Vec<f64> = extents.iter().map(Extent::center).collect();
                let ranges: Vec<(f64, f64)> = axes
                    .iter()
                    .map(|&k| match extents[k] {
                        Extent::Span(lo, hi) => (lo, hi),
                        _ => unreachable!(),
                    })
                    .collect();
                let mut x = base.clone();
                let value = integrate_box(&ranges, &mut |y| {
                    for (&k, &v) in axes.iter().zip(y) {
                        x[k] = v;
                    }
                    form.eval(&axes, &x)
                });
                Ok(f64::from(*sign) * value)
            }
            CellShape::Point(pt) if form.degree() == 0 => Ok(form.eval(&[], pt)),
            CellShape::Segment(a, b) if form.degree() == 1 => {
                let t = [b[0] - a[0], b[1] - a[1]];
                Ok(interval(0.0, 1.0)
                    .map(|(s, w)| {
                        let x = [a[0] + s * t[0], a[1] + s * t[1]];
                        w * (form.eval(&[0], &x) * t[0] + form.eval(&[1], &x) * t[1])
                    })
                    .sum())
            }
            CellShape::Polygon(ps) if form.degree() == 2 => Ok((1..ps.len() - 1)
                .map(|i| integrate_triangle([ps[0], ps[i], ps[i + 1]], &mut |x| form.eval(&[0, 1], x)))
                .sum()),
            _ => Err(mismatch()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_order() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn component_count_is_checked() {
        let c: Component = Arc::new(|_| 1.0);
        assert!(FormField::new(3, 1, vec![c.clone(), c.clone()]).is_err());
        assert!(FormField::new(3, 1, vec![c.clone(), c.clone(), c]).is_ok());
    }
}
