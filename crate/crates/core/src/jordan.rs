//! Euclidean Jordan algebra of a product of Lorentz cones
//! `L^{n_1} x ... x L^{n_r}`.
//!
//! A [`BlockVector`] is an element of `R^n` split into `r` blocks. Each block
//! `x_i = (x0; x̄)` has the two eigenvalues `x0 ± ‖x̄‖`, so a rank-`r` vector has
//! `2r` eigenvalues. One-dimensional blocks (`L^1`, the nonnegative ray) have an
//! empty barred part and a repeated eigenvalue `x0`.
//!
//! The arrow matrix `Arw(x)` and the quadratic representation `Q_x` are never
//! materialized in the solver: every block is applied in `O(n_i)` through its
//! closed form. [`BlockDiag`] materializations exist for diagnostics and tests.

use alloc::{sync::Arc, vec, vec::Vec};
use core::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::math;

/// Default tolerance for [`BlockVector::cone_membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug)]
struct Layout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
}

/// Block sizes `(n_1, ..., n_r)` of a product of Lorentz cones.
#[derive(Clone, Debug)]
pub struct ConeStructure(Arc<Layout>);

impl ConeStructure {
    pub fn new(sizes: impl Into<Vec<usize>>) -> Result<Self> {
        let sizes = sizes.into();
        if sizes.is_empty() {
            return Err(Error::InvalidStructure("at least one block is required"));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidStructure("block sizes must be positive"));
        }
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut dim = 0;
        for &size in &sizes {
            offsets.push(dim);
            dim += size;
        }
        Ok(Self(Arc::new(Layout {
            sizes,
            offsets,
            dim,
        })))
    }

    /// Total dimension `n`.
    pub fn dim(&self) -> usize {
        self.0.dim
    }

    /// Number of blocks `r`.
    pub fn rank(&self) -> usize {
        self.0.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0.sizes
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        let start = self.0.offsets[i];
        start..start + self.0.sizes[i]
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = Range<usize>> + '_ {
        self.0
            .offsets
            .iter()
            .zip(&self.0.sizes)
            .map(|(&o, &s)| o..o + s)
    }
}

impl PartialEq for ConeStructure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.sizes == other.0.sizes
    }
}

impl Eq for ConeStructure {}

/// Classification of a vector relative to the cone, see [`BlockVector::cone_membership`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeMembership {
    Interior,
    Boundary,
    Outside,
}

/// Frobenius norm, spectral norm and smallest eigenvalue of a block vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub frobenius: f64,
    pub spectral: f64,
    pub lambda_min: f64,
}

/// Eigenvalues and Jordan frame of one block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
}

/// Blockwise spectral decomposition `x_i = λ1 c1 + λ2 c2`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    structure: ConeStructure,
    blocks: Vec<BlockSpectrum>,
}

impl SpectralDecomposition {
    pub fn structure(&self) -> &ConeStructure {
        &self.structure
    }

    pub fn blocks(&self) -> &[BlockSpectrum] {
        &self.blocks
    }

    /// All `2r` eigenvalues, block by block.
    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| [b.lambda1, b.lambda2])
    }

    pub fn reconstruct(&self) -> BlockVector {
        let mut out = BlockVector::zeros(&self.structure);
        for (range, spec) in self.structure.blocks().zip(&self.blocks) {
            let dst = &mut out.values.as_mut_slice()[range];
            for (k, v) in dst.iter_mut().enumerate() {
                *v = spec.lambda1 * spec.c1[k] + spec.lambda2 * spec.c2[k];
            }
        }
        out
    }

    /// The frame of block `i` embedded as full block vectors (zero elsewhere).
    pub fn frame(&self, i: usize) -> (BlockVector, BlockVector) {
        let range = self.structure.block(i);
        let mut c1 = BlockVector::zeros(&self.structure);
        let mut c2 = BlockVector::zeros(&self.structure);
        c1.values.as_mut_slice()[range.clone()].copy_from_slice(&self.blocks[i].c1);
        c2.values.as_mut_slice()[range].copy_from_slice(&self.blocks[i].c2);
        (c1, c2)
    }
}

/// Block-diagonal matrix, one dense block per cone block.
#[derive(Clone, Debug)]
pub struct BlockDiag {
    structure: ConeStructure,
    blocks: Vec<DMatrix<f64>>,
}

impl BlockDiag {
    pub fn new(structure: &ConeStructure, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        if blocks.len() != structure.rank() {
            return Err(Error::Dimension {
                what: "block-diagonal block count",
                expected: structure.rank(),
                found: blocks.len(),
            });
        }
        for (b, &size) in blocks.iter().zip(structure.sizes()) {
            if b.nrows() != size || b.ncols() != size {
                return Err(Error::Dimension {
                    what: "block-diagonal block size",
                    expected: size,
                    found: b.nrows().max(b.ncols()),
                });
            }
        }
        Ok(Self {
            structure: structure.clone(),
            blocks,
        })
    }

    pub fn structure(&self) -> &ConeStructure {
        &self.structure
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.structure.dim();
        let mut out = DMatrix::zeros(n, n);
        for (range, b) in self.structure.blocks().zip(&self.blocks) {
            out.view_mut((range.start, range.start), (b.nrows(), b.ncols()))
                .copy_from(b);
        }
        out
    }

    pub fn apply(&self, v: &BlockVector) -> Result<BlockVector> {
        check_structure(&self.structure, &v.structure)?;
        let mut out = BlockVector::zeros(&self.structure);
        for (range, b) in self.structure.blocks().zip(&self.blocks) {
            let src = DVector::from_column_slice(&v.values.as_slice()[range.clone()]);
            out.values.as_mut_slice()[range].copy_from_slice((b * src).as_slice());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &BlockDiag) -> Result<BlockDiag> {
        check_structure(&self.structure, &other.structure)?;
        Ok(Self {
            structure: self.structure.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Operator 2-norm, the largest singular value over all blocks.
    pub fn spectral_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                b.clone()
                    .singular_values()
                    .iter()
                    .fold(0.0_f64, |acc, &s| acc.max(s))
            })
            .fold(0.0, f64::max)
    }
}

fn check_structure(a: &ConeStructure, b: &ConeStructure) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::StructureMismatch {
            left: a.dim(),
            right: b.dim(),
        })
    }
}

/// `(x0, ‖x̄‖)` of one block.
#[inline]
fn head_tail(block: &[f64]) -> (f64, f64) {
    (block[0], math::hypot_slice(&block[1..]))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A vector partitioned into Lorentz-cone blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockVector {
    structure: ConeStructure,
    values: DVector<f64>,
}

impl BlockVector {
    pub fn new(structure: &ConeStructure, values: impl Into<DVector<f64>>) -> Result<Self> {
        let values = values.into();
        if values.len() != structure.dim() {
            return Err(Error::Dimension {
                what: "block vector",
                expected: structure.dim(),
                found: values.len(),
            });
        }
        Ok(Self {
            structure: structure.clone(),
            values,
        })
    }

    pub fn from_slice(structure: &ConeStructure, values: &[f64]) -> Result<Self> {
        Self::new(structure, DVector::from_column_slice(values))
    }

    pub fn zeros(structure: &ConeStructure) -> Self {
        Self {
            structure: structure.clone(),
            values: DVector::zeros(structure.dim()),
        }
    }

    /// The identity element `e = (e_1; ...; e_r)` with `e_i = (1; 0)`.
    pub fn identity(structure: &ConeStructure) -> Self {
        let mut e = Self::zeros(structure);
        for range in structure.blocks() {
            e.values[range.start] = 1.0;
        }
        e
    }

    pub fn structure(&self) -> &ConeStructure {
        &self.structure
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DVector<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.values.as_slice()[self.structure.block(i)]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> + '_ {
        let values = self.values.as_slice();
        self.structure.blocks().map(move |r| &values[r])
    }

    fn check(&self, other: &BlockVector) -> Result<()> {
        check_structure(&self.structure, &other.structure)
    }

    /// Same structure, new values computed block by block.
    fn map_blocks<F>(&self, mut f: F) -> Result<BlockVector>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let mut out = Self::zeros(&self.structure);
        let src = self.values.as_slice();
        let dst = out.values.as_mut_slice();
        for range in self.structure.blocks() {
            f(&src[range.clone()], &mut dst[range])?;
        }
        Ok(out)
    }

    fn zip_blocks<F>(&self, other: &BlockVector, mut f: F) -> Result<BlockVector>
    where
        F: FnMut(&[f64], &[f64], &mut [f64]) -> Result<()>,
    {
        self.check(other)?;
        let mut out = Self::zeros(&self.structure);
        let (a, b) = (self.values.as_slice(), other.values.as_slice());
        let dst = out.values.as_mut_slice();
        for range in self.structure.blocks() {
            f(&a[range.clone()], &b[range.clone()], &mut dst[range])?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &BlockVector) -> Result<BlockVector> {
        self.check(other)?;
        Ok(Self {
            structure: self.structure.clone(),
            values: &self.values + &other.values,
        })
    }

    pub fn sub(&self, other: &BlockVector) -> Result<BlockVector> {
        self.check(other)?;
        Ok(Self {
            structure: self.structure.clone(),
            values: &self.values - &other.values,
        })
    }

    pub fn scale(&self, alpha: f64) -> BlockVector {
        Self {
            structure: self.structure.clone(),
            values: &self.values * alpha,
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &BlockVector) -> Result<()> {
        self.check(other)?;
        self.values.axpy(alpha, &other.values, 1.0);
        Ok(())
    }

    /// Euclidean inner product.
    pub fn dot(&self, other: &BlockVector) -> Result<f64> {
        self.check(other)?;
        Ok(self.values.dot(&other.values))
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn spectral_decompose(&self) -> SpectralDecomposition {
        let blocks = self
            .blocks()
            .map(|block| {
                let (x0, nb) = head_tail(block);
                let k = block.len();
                let mut c1 = vec![0.0; k];
                let mut c2 = vec![0.0; k];
                c1[0] = 0.5;
                c2[0] = 0.5;
                if k > 1 {
                    if nb > 0.0 {
                        for j in 1..k {
                            c1[j] = 0.5 * block[j] / nb;
                            c2[j] = -0.5 * block[j] / nb;
                        }
                    } else {
                        // any unit direction is a valid frame when x̄ = 0
                        c1[1] = 0.5;
                        c2[1] = -0.5;
                    }
                }
                BlockSpectrum {
                    lambda1: x0 + nb,
                    lambda2: x0 - nb,
                    c1,
                    c2,
                }
            })
            .collect();
        SpectralDecomposition {
            structure: self.structure.clone(),
            blocks,
        }
    }

    /// All `2r` eigenvalues, `(λ1, λ2)` per block.
    pub fn eigenvalues(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.blocks().map(|b| {
            let (x0, nb) = head_tail(b);
            (x0 + nb, x0 - nb)
        })
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues()
            .map(|(_, l2)| l2)
            .fold(f64::INFINITY, f64::min)
    }

    /// `‖x‖_2 = max_i (|x0_i| + ‖x̄_i‖)`. Not a norm outside the cone.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues()
            .map(|(l1, l2)| l1.abs().max(l2.abs()))
            .fold(0.0, f64::max)
    }

    /// `‖x‖_F = sqrt(Σ λ1² + λ2²) = √2 ‖x‖`.
    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(
            self.eigenvalues()
                .map(|(l1, l2)| l1 * l1 + l2 * l2)
                .sum::<f64>(),
        )
    }

    pub fn norms(&self) -> Norms {
        let mut fro2 = 0.0;
        let mut spectral = 0.0_f64;
        let mut lambda_min = f64::INFINITY;
        for (l1, l2) in self.eigenvalues() {
            fro2 += l1 * l1 + l2 * l2;
            spectral = spectral.max(l1.abs()).max(l2.abs());
            lambda_min = lambda_min.min(l2);
        }
        Norms {
            frobenius: math::sqrt(fro2),
            spectral,
            lambda_min,
        }
    }

    pub fn cone_membership(&self, tol: f64) -> ConeMembership {
        let lmin = self.lambda_min();
        if lmin > tol {
            ConeMembership::Interior
        } else if lmin < -tol {
            ConeMembership::Outside
        } else {
            ConeMembership::Boundary
        }
    }

    pub fn is_interior(&self) -> bool {
        self.cone_membership(MEMBERSHIP_TOL) == ConeMembership::Interior
    }

    fn require_interior(&self) -> Result<()> {
        let lambda_min = self.lambda_min();
        if lambda_min > 0.0 {
            Ok(())
        } else {
            Err(Error::NotInterior { lambda_min })
        }
    }

    /// `x ∘ y = (xᵀy; x0 ȳ + y0 x̄)` blockwise.
    pub fn jordan_product(&self, other: &BlockVector) -> Result<BlockVector> {
        self.zip_blocks(other, |x, y, out| {
            out[0] = dot(x, y);
            for j in 1..x.len() {
                out[j] = x[0] * y[j] + y[0] * x[j];
            }
            Ok(())
        })
    }

    /// Dense blocks of `Arw(x) = [x0, x̄ᵀ; x̄, x0 I]`.
    pub fn arw(&self) -> BlockDiag {
        let blocks = self
            .blocks()
            .map(|x| {
                let k = x.len();
                let mut m = DMatrix::from_diagonal_element(k, k, x[0]);
                for j in 1..k {
                    m[(0, j)] = x[j];
                    m[(j, 0)] = x[j];
                }
                m
            })
            .collect();
        BlockDiag {
            structure: self.structure.clone(),
            blocks,
        }
    }

    /// `Arw(x)⁻¹ y` through the closed-form arrow inverse.
    pub fn arw_solve(&self, y: &BlockVector) -> Result<BlockVector> {
        self.zip_blocks(y, arw_solve_block)
    }

    /// `Q_x y` via the closed form
    /// `[‖x‖², 2x0x̄ᵀ; 2x0x̄, λ1λ2 I + 2x̄x̄ᵀ]`, `O(n_i)` per block.
    pub fn quad_apply(&self, y: &BlockVector) -> Result<BlockVector> {
        self.zip_blocks(y, |x, y, out| {
            quad_apply_block(x, y, out);
            Ok(())
        })
    }

    /// Dense blocks of `Q_x`.
    pub fn quad_rep(&self) -> BlockDiag {
        let blocks = self
            .blocks()
            .map(|x| {
                let k = x.len();
                let (x0, nb) = head_tail(x);
                let det = x0 * x0 - nb * nb;
                let mut m = DMatrix::zeros(k, k);
                m[(0, 0)] = x0 * x0 + nb * nb;
                for i in 1..k {
                    m[(0, i)] = 2.0 * x0 * x[i];
                    m[(i, 0)] = 2.0 * x0 * x[i];
                    for j in 1..k {
                        m[(i, j)] = 2.0 * x[i] * x[j];
                    }
                    m[(i, i)] += det;
                }
                m
            })
            .collect();
        BlockDiag {
            structure: self.structure.clone(),
            blocks,
        }
    }

    /// `x^p = λ1^p c1 + λ2^p c2` blockwise.
    pub fn power(&self, p: f64) -> Result<BlockVector> {
        let integral = p == libm::trunc(p);
        let pow = |lambda: f64| -> Result<f64> {
            if (lambda == 0.0 && p < 0.0) || (lambda < 0.0 && !integral) {
                Err(Error::PowerUndefined {
                    exponent: p,
                    eigenvalue: lambda,
                })
            } else {
                Ok(math::powf(lambda, p))
            }
        };
        self.map_blocks(|x, out| {
            let (x0, nb) = head_tail(x);
            let f1 = pow(x0 + nb)?;
            let f2 = pow(x0 - nb)?;
            out[0] = 0.5 * (f1 + f2);
            if nb > 0.0 {
                let coef = 0.5 * (f1 - f2) / nb;
                for j in 1..x.len() {
                    out[j] = coef * x[j];
                }
            }
            Ok(())
        })
    }

    pub fn inverse(&self) -> Result<BlockVector> {
        self.power(-1.0)
    }

    pub fn sqrt(&self) -> Result<BlockVector> {
        self.power(0.5)
    }

    /// Dense blocks of `T_x = Q_{x^{1/2}}`; requires `x ∈ int L`.
    pub fn t_rep(&self) -> Result<BlockDiag> {
        self.require_interior()?;
        Ok(self.sqrt()?.quad_rep())
    }

    /// `T_x y`; requires `x ∈ int L`.
    pub fn t_apply(&self, y: &BlockVector) -> Result<BlockVector> {
        self.require_interior()?;
        self.sqrt()?.quad_apply(y)
    }

    /// `T_x⁻¹ y = Q_{x^{-1/2}} y`; requires `x ∈ int L`.
    pub fn t_inv_apply(&self, y: &BlockVector) -> Result<BlockVector> {
        self.require_interior()?;
        self.power(-0.5)?.quad_apply(y)
    }
}

pub(crate) fn quad_apply_block(x: &[f64], y: &[f64], out: &mut [f64]) {
    let x0 = x[0];
    let xbar = &x[1..];
    let ybar = &y[1..];
    let nb2: f64 = xbar.iter().map(|v| v * v).sum();
    let xy = dot(xbar, ybar);
    let det = x0 * x0 - nb2;
    out[0] = (x0 * x0 + nb2) * y[0] + 2.0 * x0 * xy;
    for j in 1..x.len() {
        out[j] = 2.0 * x0 * y[0] * x[j] + det * y[j] + 2.0 * xy * x[j];
    }
}

/// Solves `Arw(x) z = w` for one block.
pub(crate) fn arw_solve_block(x: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
    let x0 = x[0];
    let xbar = &x[1..];
    let nb2: f64 = xbar.iter().map(|v| v * v).sum();
    let det = x0 * x0 - nb2;
    if x0 == 0.0 || det == 0.0 {
        return Err(Error::SingularArrow);
    }
    let z0 = (x0 * w[0] - dot(xbar, &w[1..])) / det;
    out[0] = z0;
    for j in 1..x.len() {
        out[j] = (w[j] - x[j] * z0) / x0;
    }
    Ok(())
}

/// Applies `Arw(x)` to one block.
#[inline]
pub(crate) fn arw_apply_block(x: &[f64], y: &[f64], out: &mut [f64]) {
    out[0] = dot(x, y);
    for j in 1..x.len() {
        out[j] = x[0] * y[j] + y[0] * x[j];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(sizes: &[usize], values: &[f64]) -> BlockVector {
        let s = ConeStructure::new(sizes.to_vec()).unwrap();
        BlockVector::from_slice(&s, values).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn structure_rejects_empty_and_zero_blocks() {
        assert!(ConeStructure::new(Vec::new()).is_err());
        assert!(ConeStructure::new(vec![3, 0]).is_err());
        let s = ConeStructure::new(vec![3, 1, 2]).unwrap();
        assert_eq!((s.dim(), s.rank()), (6, 3));
        assert_eq!(s.block(2), 4..6);
    }

    #[test]
    fn identity_has_unit_eigenvalues() {
        let s = ConeStructure::new(vec![4]).unwrap();
        let e = BlockVector::identity(&s);
        let d = e.spectral_decompose();
        assert_eq!((d.blocks()[0].lambda1, d.blocks()[0].lambda2), (1.0, 1.0));
    }

    #[test]
    fn spectral_decompose_hand_values() {
        let x = bv(&[3], &[3.0, 4.0, 0.0]);
        let d = x.spectral_decompose();
        let b = &d.blocks()[0];
        assert_eq!((b.lambda1, b.lambda2), (7.0, -1.0));
        assert_eq!(b.c1, vec![0.5, 0.5, 0.0]);
        assert_eq!(b.c2, vec![0.5, -0.5, 0.0]);

        let y = bv(&[2], &[0.0, 1.0]);
        let d = y.spectral_decompose();
        let b = &d.blocks()[0];
        assert_eq!((b.lambda1, b.lambda2), (1.0, -1.0));
    }

    #[test]
    fn degenerate_frame_uses_first_direction() {
        let x = bv(&[3], &[2.0, 0.0, 0.0]);
        let d = x.spectral_decompose();
        let (c1, c2) = d.frame(0);
        assert_eq!(c1.as_slice(), &[0.5, 0.5, 0.0]);
        let zero = c1.jordan_product(&c2).unwrap();
        assert!(zero.norm() < 1e-15);
        assert_eq!(c1.jordan_product(&c1).unwrap(), c1);
        assert_eq!(d.reconstruct(), x);
    }

    #[test]
    fn one_dimensional_blocks_repeat_the_eigenvalue() {
        let x = bv(&[1, 1], &[2.0, -3.0]);
        let eig: Vec<_> = x.eigenvalues().collect();
        assert_eq!(eig, vec![(2.0, 2.0), (-3.0, -3.0)]);
        assert_eq!(x.spectral_decompose().reconstruct(), x);
        assert!(close(x.frobenius_norm(), (2.0_f64 * 13.0).sqrt()));
    }

    #[test]
    fn jordan_product_examples() {
        let a = bv(&[2], &[1.0, 1.0]);
        let b = bv(&[2], &[1.0, -1.0]);
        assert_eq!(a.jordan_product(&b).unwrap().as_slice(), &[0.0, 0.0]);
        let x = bv(&[3, 1], &[1.5, -2.0, 0.25, 7.0]);
        let e = BlockVector::identity(x.structure());
        assert_eq!(x.jordan_product(&e).unwrap(), x);
        let other = bv(&[2, 2], &[1.0, 0.0, 1.0, 0.0]);
        assert!(matches!(
            x.jordan_product(&other),
            Err(Error::StructureMismatch { .. })
        ));
    }

    #[test]
    fn arw_examples() {
        let x = bv(&[2], &[3.0, 4.0]);
        let a = x.arw().to_dense();
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 4.0, 3.0]));
        let e = BlockVector::identity(&ConeStructure::new(vec![3, 1]).unwrap());
        assert_eq!(e.arw().to_dense(), DMatrix::identity(4, 4));
    }

    #[test]
    fn arw_solve_inverts_arw() {
        let x = bv(&[3, 1], &[2.0, 0.5, -0.7, 3.0]);
        let w = bv(&[3, 1], &[0.3, -1.0, 2.0, 1.5]);
        let z = x.arw_solve(&w).unwrap();
        let back = x.jordan_product(&z).unwrap();
        assert!((back.values() - w.values()).norm() < 1e-13);
        let singular = bv(&[2], &[1.0, 1.0]);
        assert_eq!(singular.arw_solve(&bv(&[2], &[1.0, 0.0])), Err(Error::SingularArrow));
    }

    #[test]
    fn quad_rep_of_identity_is_identity() {
        let e = BlockVector::identity(&ConeStructure::new(vec![3, 2, 1]).unwrap());
        assert_eq!(e.quad_rep().to_dense(), DMatrix::identity(6, 6));
        assert_eq!(e.t_rep().unwrap().to_dense(), DMatrix::identity(6, 6));
    }

    #[test]
    fn power_rules() {
        let s = ConeStructure::new(vec![3, 1]).unwrap();
        let e = BlockVector::identity(&s);
        for p in [-1.0, 0.5, 2.0, 3.7] {
            assert_eq!(e.power(p).unwrap(), e);
        }
        let x = bv(&[3], &[3.0, 4.0, 0.0]);
        assert!(matches!(x.power(0.5), Err(Error::PowerUndefined { .. })));
        // integer powers of indefinite vectors are fine
        let sq = x.power(2.0).unwrap();
        assert!((sq.values() - x.jordan_product(&x).unwrap().values()).norm() < 1e-12);
        let boundary = bv(&[2], &[1.0, 1.0]);
        assert!(matches!(boundary.power(-1.0), Err(Error::PowerUndefined { .. })));
        assert!(boundary.sqrt().is_ok());
        assert_eq!(x.power(1.0).unwrap(), x);
    }

    #[test]
    fn norms_examples() {
        let s = ConeStructure::new(vec![2, 3, 1]).unwrap();
        let n = BlockVector::identity(&s).norms();
        assert!(close(n.frobenius, 6.0_f64.sqrt()));
        assert_eq!((n.spectral, n.lambda_min), (1.0, 1.0));

        let n = bv(&[2], &[3.0, 4.0]).norms();
        assert!(close(n.frobenius, 50.0_f64.sqrt()));
        assert_eq!((n.spectral, n.lambda_min), (7.0, -1.0));
    }

    #[test]
    fn membership_examples() {
        let s = ConeStructure::new(vec![2]).unwrap();
        assert_eq!(
            BlockVector::identity(&s).cone_membership(MEMBERSHIP_TOL),
            ConeMembership::Interior
        );
        assert_eq!(
            bv(&[2], &[1.0, 1.0]).cone_membership(MEMBERSHIP_TOL),
            ConeMembership::Boundary
        );
        assert_eq!(
            bv(&[2], &[0.0, 1.0]).cone_membership(MEMBERSHIP_TOL),
            ConeMembership::Outside
        );
    }

    #[test]
    fn t_rep_requires_interior() {
        let x = bv(&[2], &[0.0, 1.0]);
        assert!(matches!(x.t_rep(), Err(Error::NotInterior { .. })));
        assert!(matches!(
            x.t_apply(&BlockVector::identity(x.structure())),
            Err(Error::NotInterior { .. })
        ));
    }
}
