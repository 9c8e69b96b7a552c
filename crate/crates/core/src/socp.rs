//! Second-order cone programs in standard form and the measurements the
//! interior-point analysis is phrased in.
//!
//! Primal: `min cᵀx  s.t.  Ax = b, x ∈ L`. Dual: `max bᵀy  s.t.  Aᵀy + s = c,
//! s ∈ L`.

use alloc::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::jordan::{BlockVector, ConeStructure};
use crate::newton::InstanceAux;

/// Where the instance came from, when its variable layout is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceLayout {
    General,
    /// SVM reduction with `features` features and `points` training points.
    /// `folded` selects the single `L^{n+3}` block over `(t+1; t; w; b)`.
    Svm {
        features: usize,
        points: usize,
        folded: bool,
    },
}

/// `min cᵀx s.t. Ax = b, x ∈ L` with `A` of full row rank.
#[derive(Clone, Debug)]
pub struct SocpInstance {
    a: Arc<DMatrix<f64>>,
    b: DVector<f64>,
    c: BlockVector,
    layout: InstanceLayout,
    aux: Arc<InstanceAux>,
}

impl SocpInstance {
    /// Validates dimensions and rejects rank-deficient `A`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: BlockVector) -> Result<Self> {
        let (m, n) = a.shape();
        if n != c.dim() {
            return Err(Error::Dimension {
                what: "columns of A vs cone dimension",
                expected: c.dim(),
                found: n,
            });
        }
        if b.len() != m {
            return Err(Error::Dimension {
                what: "length of b vs rows of A",
                expected: m,
                found: b.len(),
            });
        }
        if m == 0 {
            return Err(Error::InvalidStructure("A needs at least one row"));
        }
        if a.iter().chain(b.iter()).chain(c.values().iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("instance data must be finite".into()));
        }
        let rank = row_rank(&a);
        if rank < m {
            return Err(Error::RankDeficient { rank, rows: m });
        }
        let aux = Arc::new(InstanceAux::new(&a, c.structure()));
        Ok(Self {
            a: Arc::new(a),
            b,
            c,
            layout: InstanceLayout::General,
            aux,
        })
    }

    pub fn with_layout(mut self, layout: InstanceLayout) -> Self {
        self.layout = layout;
        self
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &BlockVector {
        &self.c
    }

    pub fn cones(&self) -> &ConeStructure {
        self.c.structure()
    }

    pub fn layout(&self) -> InstanceLayout {
        self.layout
    }

    /// Number of equality constraints `m`.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    /// Cone dimension `n`.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Number of cone blocks `r`.
    pub fn rank(&self) -> usize {
        self.cones().rank()
    }

    /// Operator 2-norm of `A`.
    pub fn a_norm(&self) -> f64 {
        self.aux.a_norm2
    }

    pub(crate) fn aux(&self) -> &InstanceAux {
        &self.aux
    }

    /// `A v`.
    pub fn mul_a(&self, v: &DVector<f64>) -> DVector<f64> {
        self.aux.mul_a(v.as_slice())
    }

    /// `Aᵀ w`.
    pub fn mul_at(&self, w: &DVector<f64>) -> DVector<f64> {
        self.aux.mul_at(w.as_slice())
    }
}

/// Numerical rank of the rows of `a` from a column-pivoted QR of `aᵀ`.
fn row_rank(a: &DMatrix<f64>) -> usize {
    let (m, n) = a.shape();
    if m > n {
        // more rows than columns can never be full row rank; still report it
        let qr = a.clone().col_piv_qr();
        return rank_from_r(&qr.r(), m.max(n));
    }
    let qr = a.transpose().col_piv_qr();
    rank_from_r(&qr.r(), m.max(n))
}

fn rank_from_r(r: &DMatrix<f64>, scale: usize) -> usize {
    let k = r.nrows().min(r.ncols());
    if k == 0 {
        return 0;
    }
    let r00 = r[(0, 0)].abs();
    let tol = scale as f64 * f64::EPSILON * r00;
    (0..k).filter(|&i| r[(i, i)].abs() > tol).count()
}

/// A primal-dual point `(x, y, s)` with its duality gap and central-path
/// distance recomputed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    x: BlockVector,
    y: DVector<f64>,
    s: BlockVector,
    mu: f64,
    d: f64,
}

impl Iterate {
    /// `d` is `+∞` when `x` is not interior or `μ <= 0`.
    pub fn new(x: BlockVector, y: DVector<f64>, s: BlockVector) -> Result<Self> {
        let mu = duality_gap(&x, &s)?;
        let d = if mu > 0.0 {
            central_path_distance(&x, &s, mu).unwrap_or(f64::INFINITY)
        } else {
            f64::INFINITY
        };
        Ok(Self { x, y, s, mu, d })
    }

    pub fn x(&self) -> &BlockVector {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn s(&self) -> &BlockVector {
        &self.s
    }

    /// Duality gap `xᵀs / r`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `d(x, s, μ)`.
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn is_strictly_feasible(&self) -> bool {
        self.x.is_interior() && self.s.is_interior()
    }

    pub fn into_parts(self) -> (BlockVector, DVector<f64>, BlockVector) {
        (self.x, self.y, self.s)
    }
}

/// `μ = xᵀs / r`.
pub fn duality_gap(x: &BlockVector, s: &BlockVector) -> Result<f64> {
    Ok(x.dot(s)? / x.structure().rank() as f64)
}

/// `d(x, s, ν) = ‖T_x s − νe‖_F`, computed blockwise without forming `T_x`.
pub fn central_path_distance(x: &BlockVector, s: &BlockVector, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "central path parameter must be positive, got {nu}"
        )));
    }
    let mut v = x.t_apply(s)?;
    for range in v.structure().clone().blocks() {
        v.values_mut()[range.start] -= nu;
    }
    Ok(v.frobenius_norm())
}

/// Strictly feasible on both sides and `d(x, s, μ) <= ημ`.
pub fn in_neighborhood(iter: &Iterate, eta: f64) -> bool {
    iter.is_strictly_feasible() && iter.mu > 0.0 && iter.d <= eta * iter.mu
}

/// `(‖Ax − b‖, ‖Aᵀy + s − c‖)`.
pub fn linear_residuals(inst: &SocpInstance, iter: &Iterate) -> (f64, f64) {
    let primal = (inst.mul_a(iter.x.values()) - inst.b()).norm();
    let dual = (inst.mul_at(&iter.y) + iter.s.values() - inst.c().values()).norm();
    (primal, dual)
}

/// `(x̂, ŝ) = (e, μ⁻¹ T_x s)`.
pub fn scale_to_frame(
    x: &BlockVector,
    s: &BlockVector,
    mu: f64,
) -> Result<(BlockVector, BlockVector)> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "scaling needs a positive gap, got {mu}"
        )));
    }
    let s_hat = x.t_apply(s)?.scale(1.0 / mu);
    Ok((BlockVector::identity(x.structure()), s_hat))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn structure(sizes: &[usize]) -> ConeStructure {
        ConeStructure::new(sizes.to_vec()).unwrap()
    }

    #[test]
    fn gap_examples() {
        let s = structure(&[3, 1, 2]);
        let e = BlockVector::identity(&s);
        assert_eq!(duality_gap(&e, &e).unwrap(), 1.0);
        assert_eq!(duality_gap(&e.scale(2.0), &e.scale(3.0)).unwrap(), 6.0);
        let other = BlockVector::identity(&structure(&[2]));
        assert!(duality_gap(&e, &other).is_err());
    }

    #[test]
    fn distance_examples() {
        let s = structure(&[2]);
        let e = BlockVector::identity(&s);
        assert_eq!(central_path_distance(&e, &e.scale(0.7), 0.7).unwrap(), 0.0);
        let eta = 0.01;
        let iter = Iterate::new(e.clone(), DVector::zeros(1), e.scale(1.0 + 2.0 * eta)).unwrap();
        // T_e s = s and μ = 1 + 2η, so s − μe = 0
        assert!(iter.d() < 1e-15);
        assert!(in_neighborhood(&iter, eta));
        // off-centre: s = (1; 0.5) with μ = 1, ‖(0; 0.5)‖_F = √2 · 0.5
        let s2 = BlockVector::from_slice(&s, &[1.0, 0.5]).unwrap();
        let d = central_path_distance(&e, &s2, 1.0).unwrap();
        assert!((d - 0.5 * 2.0_f64.sqrt()).abs() < 1e-15);
        let outside = BlockVector::from_slice(&s, &[0.0, 1.0]).unwrap();
        assert!(matches!(
            central_path_distance(&outside, &e, 1.0),
            Err(Error::NotInterior { .. })
        ));
        let bad = Iterate::new(e.clone(), DVector::zeros(1), outside).unwrap();
        assert!(!in_neighborhood(&bad, 10.0));
    }

    #[test]
    fn rank_check_rejects_dependent_rows() {
        let s = structure(&[3]);
        let c = BlockVector::identity(&s);
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let err = SocpInstance::new(a, DVector::zeros(2), c.clone()).unwrap_err();
        assert_eq!(err, Error::RankDeficient { rank: 1, rows: 2 });
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        assert!(matches!(
            SocpInstance::new(a, DVector::zeros(1), c),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn residuals_are_linear_in_perturbation() {
        let s = structure(&[2, 1]);
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 2.0]);
        let x = BlockVector::from_slice(&s, &[2.0, 0.5, 1.0]).unwrap();
        let b = &a * x.values();
        let y = DVector::from_column_slice(&[0.3, -0.2]);
        let sv = BlockVector::from_slice(&s, &[1.0, 0.1, 2.0]).unwrap();
        let c = BlockVector::new(&s, a.transpose() * &y + sv.values()).unwrap();
        let inst = SocpInstance::new(a.clone(), b, c).unwrap();
        let it = Iterate::new(x.clone(), y.clone(), sv.clone()).unwrap();
        assert_eq!(linear_residuals(&inst, &it), (0.0, 0.0));
        let v = BlockVector::from_slice(&s, &[0.1, -0.3, 0.2]).unwrap();
        let it = Iterate::new(x.add(&v).unwrap(), y, sv).unwrap();
        let (p, d) = linear_residuals(&inst, &it);
        assert!((p - (&a * v.values()).norm()).abs() < 1e-15);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn scaling_of_identity_pair() {
        let s = structure(&[3, 1]);
        let e = BlockVector::identity(&s);
        let (xh, sh) = scale_to_frame(&e, &e, 1.0).unwrap();
        assert_eq!(xh, e);
        assert_eq!(sh, e);
        assert!(scale_to_frame(&e, &e, 0.0).is_err());
    }
}
