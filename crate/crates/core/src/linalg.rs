//! Small dense complex linear algebra.
//!
//! Everything here works on matrices of dimension at most [`MAX_DIM`]: a
//! cyclic Jacobi eigensolver for Hermitian matrices, an orthonormal basis of
//! the complex tangent hyperplane `{Z : Σ g_j Z_j = 0}`, and the 2×2 normal
//! equations used to invert an affine parametrisation.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_DIM: usize = 16;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-13;

/// Gradient floor below which a tangent basis is not built.
pub const GRAD_FLOOR: f64 = 1e-8;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_columns(columns: &[Vec<C64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    /// `max |A - Aᴴ|` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).max_abs()
    }

    /// `max |A - Aᵀ|` over all entries.
    pub fn symmetric_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.sub(&self.transpose()).max_abs()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// A Hermitian matrix; construction symmetrises the input as `(A + Aᴴ)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(a: CMatrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: a.cols(),
            });
        }
        if a.rows() == 0 || a.rows() > MAX_DIM {
            return Err(Error::Precondition(format!(
                "Hermitian dimension {} outside 1..={MAX_DIM}",
                a.rows()
            )));
        }
        let m = a.rows();
        let sym = CMatrix::from_fn(m, m, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
        Ok(HermitianMatrix(sym))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }
}

/// Eigen-decomposition `A = V Λ Vᴴ` with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMatrix,
}

/// Cyclic Jacobi on a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the classic real symmetric rotation. Sweeps stop once
/// the off-diagonal Frobenius norm is below `1e-13·‖A‖_F`.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<HermitianEigen> {
    let m = a.dim();
    let mut w = a.as_matrix().clone();
    let mut v = CMatrix::identity(m);
    let scale = w.frobenius();
    let target = JACOBI_REL_TOL * scale;

    let off_norm = |w: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    s += w[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = scale == 0.0 || off_norm(&w) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = w[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = w[(p, p)].re;
                let aqq = w[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = -phase.conj() * s;
                let uqq = phase.conj() * c;

                for k in 0..m {
                    let wkp = w[(k, p)];
                    let wkq = w[(k, q)];
                    w[(k, p)] = wkp * upp + wkq * uqp;
                    w[(k, q)] = wkp * upq + wkq * uqq;
                }
                for k in 0..m {
                    let wpk = w[(p, k)];
                    let wqk = w[(q, k)];
                    w[(p, k)] = upp.conj() * wpk + uqp.conj() * wqk;
                    w[(q, k)] = upq.conj() * wpk + uqq.conj() * wqk;
                }
                w[(p, q)] = C64::new(0.0, 0.0);
                w[(q, p)] = C64::new(0.0, 0.0);
                w[(p, p)] = C64::new(w[(p, p)].re, 0.0);
                w[(q, q)] = C64::new(w[(q, q)].re, 0.0);

                for k in 0..m {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
            }
        }
        converged = off_norm(&w) <= target;
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| w[(i, i)].re.total_cmp(&w[(j, j)].re));
    let values = order.iter().map(|&i| w[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(m, m, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Smallest eigenvalue and a unit eigenvector.
pub fn hermitian_eig_min(a: &HermitianMatrix) -> Result<(f64, Vec<C64>)> {
    let eig = hermitian_eig(a)?;
    Ok((eig.values[0], eig.vectors.column(0)))
}

/// Bilinear pairing `Σ x_j y_j` (no conjugation).
pub fn bilinear(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Hermitian inner product `⟨x, y⟩ = Σ x_j conj(y_j)`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis (as columns of an n×(n−1) matrix) of the complex
/// tangent hyperplane `{Z : Σ g_j Z_j = 0}`.
///
/// A Householder reflector sends `conj(g)/|g|` to a multiple of `e₁`; its
/// remaining columns span the Hermitian orthogonal complement of `conj(g)`.
pub fn tangent_null_basis(g: &[C64]) -> Result<CMatrix> {
    let n = g.len();
    let gnorm = norm(g);
    if !(gnorm >= GRAD_FLOOR) {
        return Err(Error::DegenerateGradient {
            norm: gnorm,
            floor: GRAD_FLOOR,
        });
    }
    let u: Vec<C64> = g.iter().map(|x| x.conj() / gnorm).collect();
    let phase = if u[0].norm() > 0.0 {
        u[0] / u[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let mut v = u.clone();
    v[0] += phase;
    let vv = norm(&v).powi(2);
    // H = I - 2 v vᴴ / (vᴴ v); columns 1..n
    let house = CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        C64::new(delta, 0.0) - v[i] * v[j].conj() * (2.0 / vv)
    });
    Ok(CMatrix::from_fn(n, n - 1, |i, j| house[(i, j + 1)]))
}

/// Least-squares coefficients of `r ≈ b·w1 + c·w2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramSolution {
    pub w1: C64,
    pub w2: C64,
    pub residual: f64,
}

/// Solves the 2×2 normal equations `Bᴴ B w = Bᴴ r` for `B = [b c]`.
pub fn gram_solve_2(b: &[C64], c: &[C64], r: &[C64]) -> Result<GramSolution> {
    if b.len() != c.len() || b.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: if b.len() != c.len() { c.len() } else { r.len() },
        });
    }
    let bb = inner(b, b).re;
    let cc = inner(c, c).re;
    // Bᴴ B = [[⟨b,b⟩, ⟨c,b⟩], [⟨b,c⟩, ⟨c,c⟩]]
    let cb = inner(c, b);
    let bc = inner(b, c);
    let det = bb * cc - (bc * cb).re;
    if !(det > 1e-14 * bb * cc) {
        return Err(Error::DependentVectors);
    }
    let rb = inner(r, b);
    let rc = inner(r, c);
    let w1 = (rb * cc - cb * rc) / det;
    let w2 = (rc * bb - bc * rb) / det;
    let resid: Vec<C64> = (0..r.len()).map(|j| r[j] - b[j] * w1 - c[j] * w2).collect();
    Ok(GramSolution {
        w1,
        w2,
        residual: norm(&resid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn herm(m: CMatrix) -> HermitianMatrix {
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn identity_eigenvalue() {
        let (l, v) = hermitian_eig_min(&herm(CMatrix::identity(2))).unwrap();
        assert!((l - 1.0).abs() < 1e-15);
        assert!((norm(&v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_min() {
        let a = CMatrix::from_diag(&[c(-1.0, 0.0), c(0.0, 0.0)]);
        let (l, v) = hermitian_eig_min(&herm(a)).unwrap();
        assert_eq!(l, -1.0);
        assert!((v[0].norm() - 1.0).abs() < 1e-15);
        assert!(v[1].norm() < 1e-15);
    }

    #[test]
    fn off_diagonal_imaginary() {
        // λ² − 1 = 0
        let a = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(0.0, 1.0),
            (1, 0) => c(0.0, -1.0),
            _ => c(0.0, 0.0),
        });
        let (l, v) = hermitian_eig_min(&herm(a.clone())).unwrap();
        assert!((l + 1.0).abs() < 1e-14);
        let av = a.matvec(&v);
        let resid: Vec<C64> = av.iter().zip(&v).map(|(x, y)| x + y).collect();
        assert!(norm(&resid) <= 1e-10);
    }

    #[test]
    fn rejects_oversized() {
        assert!(HermitianMatrix::new(CMatrix::identity(17)).is_err());
        assert!(HermitianMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn zero_matrix_is_already_diagonal() {
        let eig = hermitian_eig(&herm(CMatrix::zeros(3, 3))).unwrap();
        assert_eq!(eig.values, vec![0.0; 3]);
    }

    #[test]
    fn null_basis_axis_c2() {
        let g = [c(0.0, 0.0), c(0.5, 0.0)];
        let p = tangent_null_basis(&g).unwrap();
        assert_eq!((p.rows(), p.cols()), (2, 1));
        assert!((p[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(p[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn null_basis_axis_c3() {
        let g = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let p = tangent_null_basis(&g).unwrap();
        let gram = p.adjoint().matmul(&p);
        assert!(gram.sub(&CMatrix::identity(2)).max_abs() < 1e-15);
        for j in 0..2 {
            assert!(p[(0, j)].norm() < 1e-15);
        }
    }

    #[test]
    fn null_basis_diagonal_gradient() {
        let s = 0.5f64.sqrt();
        let p = tangent_null_basis(&[c(s, 0.0), c(s, 0.0)]).unwrap();
        let v = p.column(0);
        assert!((v[0] + v[1]).norm() < 1e-15);
        assert!((norm(&v) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn null_basis_floor() {
        let err = tangent_null_basis(&[c(1e-9, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::DegenerateGradient { .. }));
    }

    #[test]
    fn gram_cases() {
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = [c(0.0, 0.0), c(1.0, 0.0)];
        let s = gram_solve_2(&e1, &e2, &e1).unwrap();
        assert_eq!((s.w1, s.w2, s.residual), (c(1.0, 0.0), c(0.0, 0.0), 0.0));

        let b = [c(0.0, 0.0), c(0.1, 0.0)];
        let cv = [c(1.0, 0.0), c(0.0, 0.0)];
        let s = gram_solve_2(&b, &cv, &[c(0.0, 0.0); 2]).unwrap();
        assert_eq!((s.w1, s.w2), (c(0.0, 0.0), c(0.0, 0.0)));

        let e1 = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let e2 = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let e3 = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let s = gram_solve_2(&e1, &e2, &e3).unwrap();
        assert_eq!((s.w1, s.w2), (c(0.0, 0.0), c(0.0, 0.0)));
        assert!((s.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gram_dependent() {
        let b = [c(1.0, 0.0), c(0.0, 0.0)];
        let cv = [c(2.0, 0.0), c(0.0, 0.0)];
        assert_eq!(
            gram_solve_2(&b, &cv, &b).unwrap_err(),
            Error::DependentVectors
        );
        let cv = [c(0.0, 3.0), c(0.0, 0.0)];
        assert_eq!(
            gram_solve_2(&b, &cv, &b).unwrap_err(),
            Error::DependentVectors
        );
    }

    fn cvec(n: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b)), n)
    }

    proptest! {
        #[test]
        fn null_basis_is_orthonormal_and_tangent(g in (2usize..7).prop_flat_map(cvec)) {
            prop_assume!(norm(&g) > 1e-3);
            let p = tangent_null_basis(&g).unwrap();
            let n = g.len();
            let gram = p.adjoint().matmul(&p);
            prop_assert!(gram.sub(&CMatrix::identity(n - 1)).max_abs() <= 1e-12);
            for j in 0..n - 1 {
                prop_assert!(bilinear(&g, &p.column(j)).norm() <= 1e-12 * norm(&g));
            }
        }

        #[test]
        fn gram_residual_is_orthogonal(
            (b, cv, r) in (2usize..6).prop_flat_map(|n| (cvec(n), cvec(n), cvec(n)))
        ) {
            let Ok(s) = gram_solve_2(&b, &cv, &r) else { return Ok(()); };
            let bb = inner(&b, &b).re;
            let cc = inner(&cv, &cv).re;
            prop_assume!((bb * cc - (inner(&b, &cv) * inner(&cv, &b)).re) > 1e-3 * bb * cc);
            let resid: Vec<C64> = (0..r.len()).map(|j| r[j] - b[j] * s.w1 - cv[j] * s.w2).collect();
            prop_assert!(inner(&resid, &b).norm() <= 1e-10);
            prop_assert!(inner(&resid, &cv).norm() <= 1e-10);
        }
    }
}
