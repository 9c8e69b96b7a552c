//! The Newton system of the primal-dual method and its solution.
//!
//! Unknowns are ordered `(Δx, Δy, Δs)`, equations as
//!
//! ```text
//! [ A       0   0      ] [Δx]   [ b − Ax        ]
//! [ 0       Aᵀ  I      ] [Δy] = [ c − s − Aᵀy   ]
//! [ Arw(s)  0   Arw(x) ] [Δs]   [ σμe − x∘s     ]
//! ```
//!
//! `solve_exact` never forms this matrix. It eliminates `Δs` and `Δx` down to
//! the `m × m` system `K Δy = h` with `K = A Arw(s)⁻¹Arw(x) Aᵀ`, then splits `K`
//! into a diagonal part (one-dimensional cones whose column of `A` has at most
//! one nonzero) and a low-rank part over the remaining coordinates `Q`. The
//! low-rank part is handled through a bordered system of size
//! `|Q| + #(rows with no diagonal contribution)`, factored densely with
//! [`Lu`]. For the SVM reduction that is `n + 4`, independent of `m`.
//!
//! [`NewtonSystem::solve_dense`] factors the full matrix and is the reference
//! path.

use alloc::{vec, vec::Vec};

use nalgebra::{DMatrix, DVector};
use rand::{distributions::Uniform, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jordan::{arw_apply_block, arw_solve_block, BlockVector, ConeStructure};
use crate::linalg::Lu;
use crate::math;
use crate::socp::{Iterate, SocpInstance};

/// Relative residual accepted from the direct solve.
pub const RESIDUAL_REL_TOL: f64 = 1e-8;

/// Noise vectors are rescaled to this fraction of the requested error.
pub const NOISE_FRACTION: f64 = 0.9;

const REFINE_STEPS: usize = 2;

/// A one-dimensional cone coordinate whose column of `A` has at most one
/// nonzero entry.
#[derive(Clone, Debug)]
struct Eliminated {
    col: usize,
    entry: Option<(usize, f64)>,
}

/// Per-instance data reused by every Newton system of that instance.
#[derive(Debug)]
pub(crate) struct InstanceAux {
    m: usize,
    n: usize,
    q_cols: Vec<usize>,
    /// `(cone block, offset into Q)` for every block kept in `Q`.
    q_blocks: Vec<(usize, usize)>,
    eliminated: Vec<Eliminated>,
    a_q: DMatrix<f64>,
    pub(crate) a_norm2: f64,
    a_fro2: f64,
    a_row_abs: Vec<f64>,
    a_col_abs: Vec<f64>,
}

impl InstanceAux {
    pub(crate) fn new(a: &DMatrix<f64>, cones: &ConeStructure) -> Self {
        let (m, n) = a.shape();
        let mut q_cols = Vec::new();
        let mut q_blocks = Vec::new();
        let mut eliminated = Vec::new();
        for (blk, range) in cones.blocks().enumerate() {
            if range.len() == 1 {
                let col = range.start;
                let mut nz = (0..m).filter(|&i| a[(i, col)] != 0.0);
                let first = nz.next();
                if nz.next().is_none() {
                    eliminated.push(Eliminated {
                        col,
                        entry: first.map(|i| (i, a[(i, col)])),
                    });
                    continue;
                }
            }
            q_blocks.push((blk, q_cols.len()));
            q_cols.extend(range);
        }
        let a_q = DMatrix::from_fn(m, q_cols.len(), |i, k| a[(i, q_cols[k])]);
        let a_norm2 = a
            .clone()
            .singular_values()
            .iter()
            .fold(0.0_f64, |acc, &s| acc.max(s));
        let a_row_abs = (0..m).map(|i| a.row(i).iter().map(|v| v.abs()).sum()).collect();
        let a_col_abs = (0..n).map(|j| a.column(j).iter().map(|v| v.abs()).sum()).collect();
        Self {
            m,
            n,
            q_cols,
            q_blocks,
            eliminated,
            a_q,
            a_norm2,
            a_fro2: a.norm_squared(),
            a_row_abs,
            a_col_abs,
        }
    }

    pub(crate) fn mul_a(&self, v: &[f64]) -> DVector<f64> {
        let vq = DVector::from_iterator(self.q_cols.len(), self.q_cols.iter().map(|&j| v[j]));
        let mut out = &self.a_q * vq;
        for e in &self.eliminated {
            if let Some((i, a)) = e.entry {
                out[i] += a * v[e.col];
            }
        }
        out
    }

    pub(crate) fn mul_at(&self, w: &[f64]) -> DVector<f64> {
        let wv = DVector::from_column_slice(w);
        let tq = self.a_q.tr_mul(&wv);
        let mut out = DVector::zeros(self.n);
        for (k, &j) in self.q_cols.iter().enumerate() {
            out[j] = tq[k];
        }
        for e in &self.eliminated {
            if let Some((i, a)) = e.entry {
                out[e.col] = a * w[i];
            }
        }
        out
    }
}

/// Reduced factorization for one `(x, s)` pair.
#[derive(Clone, Debug)]
struct Factor {
    /// Diagonal of `K` contributed by eliminated coordinates; zero on border rows.
    e: Vec<f64>,
    border: Vec<usize>,
    lu: Lu,
}

/// How `assemble_with` fills in `κ` and `ζ`.
pub enum Measure<'a> {
    Skip,
    /// Full SVD of the dense matrix.
    Dense,
    /// Power and inverse iteration through the structured solver.
    Estimate(&'a mut ConditionEstimator),
}

/// The assembled Newton system for one iterate.
#[derive(Clone, Debug)]
pub struct NewtonSystem {
    inst: SocpInstance,
    x: BlockVector,
    s: BlockVector,
    rhs: DVector<f64>,
    sigma: f64,
    mu: f64,
    fro: f64,
    abs_sum: f64,
    kappa: Option<f64>,
    zeta: Option<f64>,
    factor: Result<Factor>,
}

/// Solution of a Newton system, possibly with injected noise.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub dx: BlockVector,
    pub dy: DVector<f64>,
    pub ds: BlockVector,
    /// `‖M·solution − rhs‖` of the returned (possibly noisy) solution.
    pub residual_norm: f64,
    pub exact: bool,
    /// `ℓ₂` distance between the returned and the exact solution.
    pub injected_error: f64,
}

impl SolveReport {
    /// `(Δx; Δy; Δs)` as one vector.
    pub fn stacked(&self) -> DVector<f64> {
        let (n, m) = (self.dx.dim(), self.dy.len());
        let mut out = DVector::zeros(2 * n + m);
        out.rows_mut(0, n).copy_from(self.dx.values());
        out.rows_mut(n, m).copy_from(&self.dy);
        out.rows_mut(n + m, n).copy_from(self.ds.values());
        out
    }
}

/// Assembles the system with `κ` and `ζ` from a dense SVD.
pub fn assemble(inst: &SocpInstance, iter: &Iterate, sigma: f64) -> Result<NewtonSystem> {
    assemble_with(inst, iter, sigma, Measure::Dense)
}

pub fn assemble_with(
    inst: &SocpInstance,
    iter: &Iterate,
    sigma: f64,
    measure: Measure<'_>,
) -> Result<NewtonSystem> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "centering parameter must lie in (0, 1], got {sigma}"
        )));
    }
    let (x, y, s) = (iter.x(), iter.y(), iter.s());
    if x.structure() != inst.cones() || s.structure() != inst.cones() {
        return Err(Error::StructureMismatch {
            left: inst.n(),
            right: x.dim(),
        });
    }
    if y.len() != inst.m() {
        return Err(Error::Dimension {
            what: "dual vector y",
            expected: inst.m(),
            found: y.len(),
        });
    }
    for v in [x, s] {
        let lambda_min = v.lambda_min();
        if !(lambda_min > 0.0) {
            return Err(Error::NotInterior { lambda_min });
        }
    }
    let (m, n) = (inst.m(), inst.n());
    let mu = iter.mu();
    let mut rhs = DVector::zeros(m + 2 * n);
    rhs.rows_mut(0, m)
        .copy_from(&(inst.b() - inst.mul_a(x.values())));
    rhs.rows_mut(m, n)
        .copy_from(&(inst.c().values() - s.values() - inst.mul_at(y)));
    let xs = x.jordan_product(s)?;
    let mut comp = xs.into_values() * -1.0;
    for range in inst.cones().blocks() {
        comp[range.start] += sigma * mu;
    }
    rhs.rows_mut(m + n, n).copy_from(&comp);

    let aux = inst.aux();
    let fro = structured_fro(aux, x, s);
    let abs_sum = structured_abs_sum(aux, x, s);
    let factor = Factor::new(aux, x, s);
    let mut sys = NewtonSystem {
        inst: inst.clone(),
        x: x.clone(),
        s: s.clone(),
        rhs,
        sigma,
        mu,
        fro,
        abs_sum,
        kappa: None,
        zeta: None,
        factor,
    };
    match measure {
        Measure::Skip => {}
        Measure::Dense => {
            let mat = sys.matrix();
            sys.kappa = Some(measure_kappa(&mat));
            sys.zeta = Some(measure_zeta(&mat)?);
        }
        Measure::Estimate(est) => {
            let (smax, smin) = est.estimate(&sys);
            sys.kappa = Some(if smin > 0.0 { smax / smin } else { f64::INFINITY });
            sys.zeta = Some(zeta_from_parts(sys.fro, sys.abs_sum, smax)?);
        }
    }
    Ok(sys)
}

/// `‖M‖_F` from the blocks of `M`.
fn structured_fro(aux: &InstanceAux, x: &BlockVector, s: &BlockVector) -> f64 {
    let arw_fro2 = |v: &BlockVector| -> f64 {
        v.blocks()
            .map(|b| {
                let tail: f64 = b[1..].iter().map(|t| t * t).sum();
                b.len() as f64 * b[0] * b[0] + 2.0 * tail
            })
            .sum()
    };
    math::sqrt(2.0 * aux.a_fro2 + aux.n as f64 + arw_fro2(x) + arw_fro2(s))
}

/// Largest absolute row or column sum of `M`.
fn structured_abs_sum(aux: &InstanceAux, x: &BlockVector, s: &BlockVector) -> f64 {
    // absolute row sums of Arw(v); Arw is symmetric so they are also column sums
    let arw_rows = |v: &BlockVector| -> Vec<f64> {
        let mut out = vec![0.0; v.dim()];
        for (range, b) in v.structure().blocks().zip(v.blocks()) {
            let tail: f64 = b[1..].iter().map(|t| t.abs()).sum();
            out[range.start] = b[0].abs() + tail;
            for k in 1..b.len() {
                out[range.start + k] = b[k].abs() + b[0].abs();
            }
        }
        out
    };
    let rs = arw_rows(s);
    let rx = arw_rows(x);
    let mut best = aux.a_row_abs.iter().copied().fold(0.0, f64::max);
    for j in 0..aux.n {
        best = best
            .max(aux.a_col_abs[j] + 1.0)
            .max(rs[j] + rx[j])
            .max(aux.a_col_abs[j] + rs[j])
            .max(1.0 + rx[j]);
    }
    best
}

fn zeta_from_parts(fro: f64, abs_sum: f64, sigma_max: f64) -> Result<f64> {
    if !(sigma_max > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    Ok((core::f64::consts::SQRT_2 * fro).min(abs_sum) / sigma_max)
}

/// Applies `Arw(v)` blockwise to `w` in place of `out`.
fn arw_mul(v: &BlockVector, w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for range in v.structure().blocks() {
        arw_apply_block(
            &v.as_slice()[range.clone()],
            &w[range.clone()],
            &mut out[range],
        );
    }
    out
}

/// `Arw(v)⁻¹ w` blockwise; `v` is interior so every block is invertible.
fn arw_div(v: &BlockVector, w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for range in v.structure().blocks() {
        arw_solve_block(
            &v.as_slice()[range.clone()],
            &w[range.clone()],
            &mut out[range],
        )
        .expect("interior vectors have invertible arrow blocks");
    }
    out
}

impl Factor {
    fn new(aux: &InstanceAux, x: &BlockVector, s: &BlockVector) -> Result<Self> {
        let m = aux.m;
        let mut e = vec![0.0; m];
        for el in &aux.eliminated {
            if let Some((i, a)) = el.entry {
                e[i] += a * a * x.as_slice()[el.col] / s.as_slice()[el.col];
            }
        }
        let border: Vec<usize> = (0..m).filter(|&i| e[i] == 0.0).collect();
        let plus: Vec<usize> = (0..m).filter(|&i| e[i] != 0.0).collect();
        let nq = aux.q_cols.len();
        let nb = nq + border.len();
        let mut b = vec![0.0; nb * nb];

        // Arw(x)⁻¹Arw(s) on each kept block
        let cones = x.structure();
        for &(blk, off) in &aux.q_blocks {
            let range = cones.block(blk);
            let xb = &x.as_slice()[range.clone()];
            let sb = &s.as_slice()[range.clone()];
            let k = range.len();
            let mut col = vec![0.0; k];
            let mut out = vec![0.0; k];
            for j in 0..k {
                if j == 0 {
                    col.copy_from_slice(sb);
                } else {
                    col.iter_mut().for_each(|c| *c = 0.0);
                    col[0] = sb[j];
                    col[j] = sb[0];
                }
                arw_solve_block(xb, &col, &mut out)?;
                for (r, &v) in out.iter().enumerate() {
                    b[(off + r) * nb + off + j] = v;
                }
            }
        }

        // A_{Q,+}ᵀ E⁻¹ A_{Q,+}
        if !plus.is_empty() && nq > 0 {
            let f = DMatrix::from_fn(plus.len(), nq, |r, k| {
                aux.a_q[(plus[r], k)] / math::sqrt(e[plus[r]])
            });
            let h = f.transpose() * &f;
            for i in 0..nq {
                for j in 0..nq {
                    b[i * nb + j] += h[(i, j)];
                }
            }
        }

        for (k, &row) in border.iter().enumerate() {
            for i in 0..nq {
                let a = aux.a_q[(row, i)];
                b[i * nb + nq + k] = -a;
                b[(nq + k) * nb + i] = a;
            }
        }
        let lu = Lu::from_row_major(nb, b)?;
        Ok(Self { e, border, lu })
    }

    /// Solves `K dy = h`, or `Kᵀ dy = h` when `transposed`.
    fn solve_k(&self, aux: &InstanceAux, h: &[f64], transposed: bool) -> Vec<f64> {
        let nq = aux.q_cols.len();
        let nb = nq + self.border.len();
        let g = DVector::from_iterator(
            aux.m,
            h.iter()
                .zip(&self.e)
                .map(|(&hi, &ei)| if ei != 0.0 { hi / ei } else { 0.0 }),
        );
        let mut rhs = vec![0.0; nb];
        rhs[..nq].copy_from_slice(aux.a_q.tr_mul(&g).as_slice());
        // the transposed bordered matrix is J Bᵀ J with J = diag(I, −I)
        let sign = if transposed { -1.0 } else { 1.0 };
        for (k, &row) in self.border.iter().enumerate() {
            rhs[nq + k] = sign * h[row];
        }
        if transposed {
            self.lu.solve_transpose_in_place(&mut rhs);
        } else {
            self.lu.solve_in_place(&mut rhs);
        }
        let z = DVector::from_column_slice(&rhs[..nq]);
        let t = &aux.a_q * z;
        let mut dy = vec![0.0; aux.m];
        for i in 0..aux.m {
            if self.e[i] != 0.0 {
                dy[i] = (h[i] - t[i]) / self.e[i];
            }
        }
        for (k, &row) in self.border.iter().enumerate() {
            dy[row] = sign * rhs[nq + k];
        }
        dy
    }
}

impl NewtonSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Condition number of the matrix, if it was measured.
    pub fn kappa(&self) -> Option<f64> {
        self.kappa
    }

    /// Block-encoding parameter of the symmetrized matrix, if it was measured.
    pub fn zeta(&self) -> Option<f64> {
        self.zeta
    }

    /// `‖M‖_F`.
    pub fn frobenius_norm(&self) -> f64 {
        self.fro
    }

    /// The dense `(m + 2n) × (m + 2n)` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let (m, n) = (self.inst.m(), self.inst.n());
        let a = self.inst.a();
        let mut mat = DMatrix::zeros(m + 2 * n, m + 2 * n);
        mat.view_mut((0, 0), (m, n)).copy_from(a);
        mat.view_mut((m, n), (n, m)).copy_from(&a.transpose());
        for j in 0..n {
            mat[(m + j, n + m + j)] = 1.0;
        }
        mat.view_mut((m + n, 0), (n, n))
            .copy_from(&self.s.arw().to_dense());
        mat.view_mut((m + n, n + m), (n, n))
            .copy_from(&self.x.arw().to_dense());
        mat
    }

    /// `M v` without forming `M`; `v = (Δx; Δy; Δs)`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        let (m, n) = (self.inst.m(), self.inst.n());
        let aux = self.inst.aux();
        let (dx, rest) = v.as_slice().split_at(n);
        let (dy, ds) = rest.split_at(m);
        let mut out = DVector::zeros(m + 2 * n);
        out.rows_mut(0, m).copy_from(&aux.mul_a(dx));
        let dual = aux.mul_at(dy) + DVector::from_column_slice(ds);
        out.rows_mut(m, n).copy_from(&dual);
        let sx = arw_mul(&self.s, dx);
        let xs = arw_mul(&self.x, ds);
        for j in 0..n {
            out[m + n + j] = sx[j] + xs[j];
        }
        out
    }

    /// `Mᵀ u` without forming `M`; `u` is indexed like the equations.
    pub fn apply_transpose(&self, u: &DVector<f64>) -> DVector<f64> {
        let (m, n) = (self.inst.m(), self.inst.n());
        let aux = self.inst.aux();
        let (u1, rest) = u.as_slice().split_at(m);
        let (u2, u3) = rest.split_at(n);
        let mut out = DVector::zeros(m + 2 * n);
        let first = aux.mul_at(u1) + DVector::from_vec(arw_mul(&self.s, u3));
        out.rows_mut(0, n).copy_from(&first);
        out.rows_mut(n, m).copy_from(&aux.mul_a(u2));
        let xu3 = arw_mul(&self.x, u3);
        for j in 0..n {
            out[n + m + j] = u2[j] + xu3[j];
        }
        out
    }

    fn factor(&self) -> Result<&Factor> {
        self.factor.as_ref().map_err(Clone::clone)
    }

    /// One pass of the reduced solve of `M z = r`.
    fn reduced_solve(&self, f: &Factor, r: &[f64]) -> DVector<f64> {
        let (m, n) = (self.inst.m(), self.inst.n());
        let aux = self.inst.aux();
        let (r1, rest) = r.split_at(m);
        let (r2, r3) = rest.split_at(n);
        let xr2 = arw_mul(&self.x, r2);
        let t: Vec<f64> = r3.iter().zip(&xr2).map(|(a, b)| a - b).collect();
        let q = arw_div(&self.s, &t);
        let aq = aux.mul_a(&q);
        let h: Vec<f64> = r1.iter().zip(aq.iter()).map(|(a, b)| a - b).collect();
        let dy = f.solve_k(aux, &h, false);
        let aty = aux.mul_at(&dy);
        let ds: Vec<f64> = r2.iter().zip(aty.iter()).map(|(a, b)| a - b).collect();
        let xds = arw_mul(&self.x, &ds);
        let t: Vec<f64> = r3.iter().zip(&xds).map(|(a, b)| a - b).collect();
        let dx = arw_div(&self.s, &t);
        let mut out = DVector::zeros(m + 2 * n);
        out.rows_mut(0, n).copy_from_slice(&dx);
        out.rows_mut(n, m).copy_from_slice(&dy);
        out.rows_mut(n + m, n).copy_from_slice(&ds);
        out
    }

    /// One pass of the reduced solve of `Mᵀ u = v`.
    fn reduced_solve_transpose(&self, f: &Factor, v: &[f64]) -> DVector<f64> {
        let (m, n) = (self.inst.m(), self.inst.n());
        let aux = self.inst.aux();
        let (v1, rest) = v.split_at(n);
        let (v2, v3) = rest.split_at(m);
        // D_T = Arw(x) Arw(s)⁻¹
        let dt = |w: &[f64]| arw_mul(&self.x, &arw_div(&self.s, w));
        let g = dt(v1);
        let av3 = aux.mul_a(v3);
        let ag = aux.mul_a(&g);
        let h: Vec<f64> = (0..m).map(|i| v2[i] - av3[i] + ag[i]).collect();
        let u1 = f.solve_k(aux, &h, true);
        let atu1 = aux.mul_at(&u1);
        let w: Vec<f64> = (0..n).map(|j| atu1[j] - v1[j]).collect();
        let u2: Vec<f64> = dt(&w).iter().zip(v3).map(|(a, b)| a + b).collect();
        let diff: Vec<f64> = v3.iter().zip(&u2).map(|(a, b)| a - b).collect();
        let u3 = arw_div(&self.x, &diff);
        let mut out = DVector::zeros(m + 2 * n);
        out.rows_mut(0, m).copy_from_slice(&u1);
        out.rows_mut(m, n).copy_from_slice(&u2);
        out.rows_mut(m + n, n).copy_from_slice(&u3);
        out
    }

    fn residual_bound(&self, sol: &DVector<f64>, rhs: &DVector<f64>) -> f64 {
        RESIDUAL_REL_TOL * (self.fro * sol.norm() + rhs.norm())
    }

    /// Solves `M z = r` (or `Mᵀ z = r`) through the reduced factorization with
    /// iterative refinement, falling back to dense LU when the residual
    /// contract still fails.
    fn solve_vec(&self, r: &DVector<f64>, transposed: bool) -> Result<DVector<f64>> {
        let f = self.factor()?;
        let step = |v: &DVector<f64>| {
            if transposed {
                self.reduced_solve_transpose(f, v.as_slice())
            } else {
                self.reduced_solve(f, v.as_slice())
            }
        };
        let op = |v: &DVector<f64>| {
            if transposed {
                self.apply_transpose(v)
            } else {
                self.apply(v)
            }
        };
        let mut sol = step(r);
        let mut res = r - op(&sol);
        for _ in 0..REFINE_STEPS {
            if res.norm() <= 1e-2 * self.residual_bound(&sol, r) {
                break;
            }
            sol += step(&res);
            res = r - op(&sol);
        }
        if res.norm() <= self.residual_bound(&sol, r) && sol.iter().all(|v| v.is_finite()) {
            return Ok(sol);
        }
        let lu = Lu::new(&self.matrix())?;
        Ok(if transposed {
            lu.solve_transpose(r)
        } else {
            lu.solve(r)
        })
    }

    /// `M⁻¹ r` through the reduced factorization.
    pub fn solve_rhs(&self, r: &DVector<f64>) -> Result<DVector<f64>> {
        self.solve_vec(r, false)
    }

    /// `M⁻ᵀ r` through the reduced factorization.
    pub fn solve_rhs_transpose(&self, r: &DVector<f64>) -> Result<DVector<f64>> {
        self.solve_vec(r, true)
    }

    fn report(&self, sol: DVector<f64>, exact: bool, injected_error: f64) -> Result<SolveReport> {
        let (m, n) = (self.inst.m(), self.inst.n());
        let residual_norm = (self.apply(&sol) - &self.rhs).norm();
        let cones = self.inst.cones();
        Ok(SolveReport {
            dx: BlockVector::new(cones, sol.rows(0, n).into_owned())?,
            dy: sol.rows(n, m).into_owned(),
            ds: BlockVector::new(cones, sol.rows(n + m, n).into_owned())?,
            residual_norm,
            exact,
            injected_error,
        })
    }

    /// Direct solve; fails on a numerically singular matrix.
    pub fn solve_exact(&self) -> Result<SolveReport> {
        let sol = self.solve_vec(&self.rhs, false)?;
        self.report(sol, true, 0.0)
    }

    /// Dense LU on the full matrix, the reference path.
    pub fn solve_dense(&self) -> Result<SolveReport> {
        let lu = Lu::new(&self.matrix())?;
        let sol = lu.solve(&self.rhs);
        self.report(sol, true, 0.0)
    }

    /// Exact solve plus an isotropic-in-the-cube noise vector of `ℓ₂` norm
    /// exactly `0.9 · target_error`.
    pub fn solve_inexact(&self, target_error: f64, rng_seed: u64) -> Result<SolveReport> {
        if !(target_error >= 0.0) || !target_error.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "target error must be finite and nonnegative, got {target_error}"
            )));
        }
        let exact = self.solve_exact()?;
        self.perturb(&exact, target_error, rng_seed)
    }

    /// Adds seeded noise of norm `0.9 · target_error` to an exact solution.
    pub fn perturb(&self, exact: &SolveReport, target_error: f64, rng_seed: u64) -> Result<SolveReport> {
        if !(target_error >= 0.0) || !target_error.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "target error must be finite and nonnegative, got {target_error}"
            )));
        }
        if target_error == 0.0 {
            return Ok(exact.clone());
        }
        let mut sol = exact.stacked();
        sol += noise_vector(sol.len(), NOISE_FRACTION * target_error, rng_seed);
        self.report(sol, false, NOISE_FRACTION * target_error)
    }
}

/// Coordinates i.i.d. uniform on `[−1, 1]`, rescaled to `ℓ₂` norm `norm`.
pub fn noise_vector(len: usize, norm: f64, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-1.0, 1.0);
    loop {
        let u = DVector::from_fn(len, |_, _| rng.sample(dist));
        let un = u.norm();
        if un > 0.0 || len == 0 {
            return if len == 0 { u } else { u * (norm / un) };
        }
    }
}

/// `σ_max / σ_min` from a full SVD; `+∞` for a numerically singular matrix.
///
/// The singular values of `sym(M) = [0 M; Mᵀ 0]` are those of `M` doubled, so
/// the ratio is the same for both.
pub fn measure_kappa(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let smin = sv.iter().fold(f64::INFINITY, |a, &s| a.min(s));
    let dim = m.nrows().max(m.ncols()) as f64;
    if !(smax > 0.0) || smin <= smax * f64::EPSILON * dim {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// `ζ(sym(M)) = min(‖sym M‖_F, s₁(sym M)) / ‖sym M‖₂`, where `s₁` is the
/// largest absolute row sum.
pub fn measure_zeta(m: &DMatrix<f64>) -> Result<f64> {
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    let row = (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let col = (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    zeta_from_parts(m.norm(), row.max(col), smax)
}

/// Extremal singular values by power iteration on `MᵀM` and on `(MᵀM)⁻¹`,
/// warm-started from the previous call's vectors.
#[derive(Clone, Debug)]
pub struct ConditionEstimator {
    pub cold_steps: usize,
    pub warm_steps: usize,
    pub tol: f64,
    v_max: Option<DVector<f64>>,
    v_min: Option<DVector<f64>>,
}

impl Default for ConditionEstimator {
    fn default() -> Self {
        Self {
            cold_steps: 200,
            warm_steps: 20,
            tol: 1e-6,
            v_max: None,
            v_min: None,
        }
    }
}

fn start_vector(len: usize) -> DVector<f64> {
    let v = DVector::from_fn(len, |i, _| 1.0 + ((i * 7919) % 17) as f64 / 17.0);
    let norm = v.norm();
    v / norm
}

impl ConditionEstimator {
    pub fn new() -> Self {
        Self::default()
    }

    fn take(slot: &mut Option<DVector<f64>>, len: usize, cold: usize, warm: usize) -> (DVector<f64>, usize) {
        match slot.take() {
            Some(v) if v.len() == len => (v, warm),
            _ => (start_vector(len), cold),
        }
    }

    /// `(σ_max, σ_min)`; `σ_min = 0` when the system is singular.
    pub fn estimate(&mut self, sys: &NewtonSystem) -> (f64, f64) {
        let len = sys.dim();
        let (mut v, steps) = Self::take(&mut self.v_max, len, self.cold_steps, self.warm_steps);
        let mut smax = 0.0;
        for _ in 0..steps.max(1) {
            let w = sys.apply(&v);
            let est = w.norm();
            let u = sys.apply_transpose(&w);
            let un = u.norm();
            if !(un > 0.0) {
                break;
            }
            v = u / un;
            let done = (est - smax).abs() <= self.tol * est;
            smax = est;
            if done {
                break;
            }
        }
        self.v_max = Some(v);

        let (mut v, steps) = Self::take(&mut self.v_min, len, self.cold_steps, self.warm_steps);
        let mut inv = 0.0;
        for _ in 0..steps.max(1) {
            let w = match sys.solve_rhs_transpose(&v) {
                Ok(w) => w,
                Err(_) => return (smax, 0.0),
            };
            let est = w.norm();
            let u = match sys.solve_rhs(&w) {
                Ok(u) => u,
                Err(_) => return (smax, 0.0),
            };
            let un = u.norm();
            if !(un > 0.0) || !un.is_finite() {
                break;
            }
            v = u / un;
            let done = (est - inv).abs() <= self.tol * est;
            inv = est;
            if done {
                break;
            }
        }
        self.v_min = Some(v);
        (smax, if inv > 0.0 { 1.0 / inv } else { 0.0 })
    }
}
