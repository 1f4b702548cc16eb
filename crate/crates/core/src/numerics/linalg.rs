//! Complex Hermitian linear algebra on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigen-decomposition `M = U diag(λ) U^†` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= lam;
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }
}

fn check_square_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Symmetrized Hermitian part `(M + M^†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermitian_eigendecomposition(m: &CMatrix) -> Result<HermitianEigen> {
    check_square_finite(m, "matrix")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::<Complex64, Dyn>::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Lower Cholesky factor `L` of a Hermitian positive-definite matrix, `M = L L^†`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    l: CMatrix,
}

impl CholeskyFactor {
    pub fn new(m: &CMatrix) -> Result<Self> {
        check_square_finite(m, "covariance")?;
        let chol = Cholesky::new(hermitian_part(m)).ok_or(Error::NotPositiveDefinite)?;
        let l = chol.l();
        if l
            .diagonal()
            .iter()
            .any(|d| !(d.re > 0.0) || !d.re.is_finite() || d.im.abs() > 1e-12 * d.re)
        {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &CMatrix {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn reconstruct(&self) -> CMatrix {
        &self.l * self.l.adjoint()
    }

    /// `L^{-1} b`
    pub fn solve_lower(&self, b: &CVector) -> CVector {
        self.l
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a nonzero diagonal")
    }

    /// `L^{-1} B` for a matrix right-hand side.
    pub fn solve_lower_mat(&self, b: &CMatrix) -> CMatrix {
        self.l
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a nonzero diagonal")
    }

    /// `M^{-1} b` via two triangular solves.
    pub fn solve(&self, b: &CVector) -> CVector {
        let y = self.solve_lower(b);
        self.l
            .adjoint()
            .solve_upper_triangular(&y)
            .expect("Cholesky factor has a nonzero diagonal")
    }

    /// `M^{-1}` materialized; only used for small correlation matrices.
    pub fn inverse(&self) -> CMatrix {
        let n = self.dim();
        let mut inv = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = CVector::zeros(n);
            e[j] = Complex64::new(1.0, 0.0);
            inv.set_column(j, &self.solve(&e));
        }
        hermitian_part(&inv)
    }

    /// `x^† M^{-1} x = ||L^{-1} x||^2`
    pub fn inv_quad_form(&self, x: &CVector) -> f64 {
        self.solve_lower(x).norm_squared()
    }
}

/// Cholesky factors of a block-diagonal covariance, one per block.
#[derive(Debug, Clone)]
pub struct BlockCholesky {
    blocks: Vec<CholeskyFactor>,
    offsets: Vec<usize>,
    dim: usize,
}

impl BlockCholesky {
    pub fn new(blocks: &[CMatrix]) -> Result<Self> {
        let mut factors = Vec::with_capacity(blocks.len());
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut off = 0;
        for b in blocks {
            offsets.push(off);
            off += b.nrows();
            factors.push(CholeskyFactor::new(b)?);
        }
        Ok(Self {
            blocks: factors,
            offsets,
            dim: off,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[CholeskyFactor] {
        &self.blocks
    }

    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        let o = self.offsets[j];
        o..o + self.blocks[j].dim()
    }

    fn check(&self, x: &CVector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Blockwise `L^{-1} x`.
    pub fn solve_lower(&self, x: &CVector) -> Result<CVector> {
        self.check(x)?;
        let mut out = CVector::zeros(self.dim);
        for (j, f) in self.blocks.iter().enumerate() {
            let r = self.block_range(j);
            let y = f.solve_lower(&x.rows(r.start, r.len()).into_owned());
            out.rows_mut(r.start, r.len()).copy_from(&y);
        }
        Ok(out)
    }

    /// `Sigma^{-1} x`.
    pub fn solve(&self, x: &CVector) -> Result<CVector> {
        self.check(x)?;
        let mut out = CVector::zeros(self.dim);
        for (j, f) in self.blocks.iter().enumerate() {
            let r = self.block_range(j);
            let y = f.solve(&x.rows(r.start, r.len()).into_owned());
            out.rows_mut(r.start, r.len()).copy_from(&y);
        }
        Ok(out)
    }

    /// Per-block `x_j^dagger Sigma_j^{-1} x_j`.
    pub fn block_quad_forms(&self, x: &CVector) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let r = self.block_range(j);
                f.inv_quad_form(&x.rows(r.start, r.len()).into_owned())
            })
            .collect())
    }

    /// Dense stacked lower factor.
    pub fn dense_lower(&self) -> CMatrix {
        let mut l = CMatrix::zeros(self.dim, self.dim);
        for (j, f) in self.blocks.iter().enumerate() {
            let r = self.block_range(j);
            l.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(f.lower());
        }
        l
    }
}

/// Relative Frobenius distance `||a - b|| / max(||b||, tiny)`.
pub fn relative_frobenius(a: &CMatrix, b: &CMatrix) -> f64 {
    let denom = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / denom
}

/// `x^† y`
pub fn inner(x: &CVector, y: &CVector) -> Complex64 {
    x.dotc(y)
}
