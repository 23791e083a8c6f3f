//! Sparse direct solves on top of faer, with a conjugate-gradient fallback.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par, Side};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{CmcError, Result};
use crate::operators::spmv;

pub const CG_RTOL: f64 = 1e-12;

/// How a linear system was solved.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub method: String,
    pub unknowns: usize,
    pub nonzeros: usize,
    /// CG iterations, 0 for direct solves.
    pub iterations: usize,
    /// `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
    pub residual: f64,
}

static SEQUENTIAL: Once = Once::new();

/// Runs faer single-threaded so that repeated solves are bit-reproducible.
fn sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

fn to_faer(a: &CsrMatrix<f64>) -> Result<SparseColMat<usize, f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> =
        a.triplet_iter().map(|(i, j, &v)| Triplet::new(i, j, v)).collect();
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &triplets)
        .map_err(|e| CmcError::Solver(format!("cannot build sparse matrix: {e:?}")))
}

fn residual(a: &CsrMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    let ax = spmv(a, x);
    let r = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

enum Kind {
    Cholesky(Llt<usize, f64>),
    Lu(Lu<usize, f64>),
    Cg,
    Empty,
}

/// A factorized square matrix, reusable across right-hand sides.
pub struct Factorization {
    matrix: CsrMatrix<f64>,
    kind: Kind,
}

impl Factorization {
    /// Cholesky for symmetric positive definite matrices; CG if the
    /// factorization breaks down.
    pub fn spd(matrix: CsrMatrix<f64>) -> Result<Self> {
        sequential();
        check_square(&matrix)?;
        if matrix.nrows() == 0 {
            return Ok(Self { matrix, kind: Kind::Empty });
        }
        let kind = match to_faer(&matrix)?.sp_cholesky(Side::Lower) {
            Ok(llt) => Kind::Cholesky(llt),
            Err(e) => {
                log::warn!("sparse Cholesky failed ({e:?}); falling back to conjugate gradients");
                Kind::Cg
            }
        };
        Ok(Self { matrix, kind })
    }

    /// LU with partial pivoting for general square matrices.
    pub fn general(matrix: CsrMatrix<f64>) -> Result<Self> {
        sequential();
        check_square(&matrix)?;
        if matrix.nrows() == 0 {
            return Ok(Self { matrix, kind: Kind::Empty });
        }
        let lu = to_faer(&matrix)?
            .sp_lu()
            .map_err(|e| CmcError::Solver(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { matrix, kind: Kind::Lu(lu) })
    }

    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.matrix
    }

    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.matrix.nrows();
        if b.len() != n {
            return Err(CmcError::DimensionMismatch(format!("right-hand side of length {} for {n} unknowns", b.len())));
        }
        let (x, method, iterations) = match &self.kind {
            Kind::Empty => (Vec::new(), "none", 0),
            Kind::Cholesky(f) => (direct(f, b), "cholesky", 0),
            Kind::Lu(f) => (direct(f, b), "lu", 0),
            Kind::Cg => {
                let (x, it) = conjugate_gradient(&self.matrix, b, CG_RTOL, 20 * n.max(50))?;
                (x, "cg", it)
            }
        };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(CmcError::Solver(format!("{method} solve produced non-finite values")));
        }
        let stats = SolveStats {
            method: method.into(),
            unknowns: n,
            nonzeros: self.matrix.nnz(),
            iterations,
            residual: residual(&self.matrix, &x, b),
        };
        Ok((x, stats))
    }
}

fn check_square(a: &CsrMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(CmcError::DimensionMismatch(format!("{}×{} system matrix", a.nrows(), a.ncols())));
    }
    Ok(())
}

fn direct<S: Solve<f64>>(f: &S, b: &[f64]) -> Vec<f64> {
    let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    f.solve_in_place(rhs.as_mut());
    (0..b.len()).map(|i| rhs[(i, 0)]).collect()
}

pub fn solve_spd(a: CsrMatrix<f64>, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
    Factorization::spd(a)?.solve(b)
}

pub fn solve_general(a: CsrMatrix<f64>, b: &[f64]) -> Result<(Vec<f64>, SolveStats)> {
    Factorization::general(a)?.solve(b)
}

/// Unpreconditioned conjugate gradients; errors if `rtol` is not reached.
pub fn conjugate_gradient(a: &CsrMatrix<f64>, b: &[f64], rtol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = rtol * rtol * rr;
    if rr == 0.0 {
        return Ok((x, 0));
    }
    for it in 1..=max_iter {
        let ap = spmv(a, &p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(CmcError::Solver("conjugate gradients met a non-positive curvature".into()));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let next = dot(&r, &r);
        if next <= target {
            return Ok((x, it));
        }
        let beta = next / rr;
        rr = next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(CmcError::Solver(format!("conjugate gradients did not converge in {max_iter} iterations")))
}

/// Principal submatrix `A[rows, cols]`; `rows`/`cols` map old indices to new ones.
pub fn submatrix(a: &CsrMatrix<f64>, rows: &[Option<usize>], cols: &[Option<usize>], shape: (usize, usize)) -> CsrMatrix<f64> {
    let mut coo = CooMatrix::new(shape.0, shape.1);
    for (i, j, &v) in a.triplet_iter() {
        if let (Some(r), Some(c)) = (rows[i], cols[j]) {
            coo.push(r, c, v);
        }
    }
    CsrMatrix::from(&coo)
}

/// Maps each selected index to its position in `selected`.
pub fn index_map(n: usize, selected: &[usize]) -> Vec<Option<usize>> {
    let mut map = vec![None; n];
    for (k, &i) in selected.iter().enumerate() {
        map[i] = Some(k);
    }
    map
}

pub fn is_symmetric(a: &CsrMatrix<f64>, tol: f64) -> bool {
    let t = a.transpose();
    let diff = a - &t;
    let scale = a.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    diff.values().iter().all(|v| v.abs() <= tol * scale)
}
