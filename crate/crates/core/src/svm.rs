//! Soft-margin linear SVM: random instances, the reduction to a cone program,
//! and classifier evaluation.
//!
//! The reduction introduces `t` with `(t+1; t; w) ∈ L^{n+2}`, which is
//! equivalent to `2t + 1 ≥ ‖w‖²`, and writes each margin constraint as the
//! equality `wᵀx⁽ⁱ⁾ + b + yᵢξᵢ = yᵢ` with `ξᵢ ∈ L¹`. Variables are laid out as
//! `(t+1, t, w, b, ξ)`, so the bias sits at index `n + 2` and `ξᵢ` at
//! `n + 3 + i` in both variants:
//!
//! * folded (default): cones `L^{n+3} × (L¹)^m`, the bias joins the first block;
//! * unfolded: cones `L^{n+2} × L¹ × (L¹)^m`, which forces `b ≥ 0`.

use alloc::{vec, vec::Vec};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::jordan::{BlockVector, ConeStructure};
use crate::socp::{InstanceLayout, Iterate, SocpInstance};

/// Generation parameters carried with a dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetMeta {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub seed: u64,
}

/// `n × m` feature matrix whose columns are examples, and `±1` labels.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmDataset {
    x: DMatrix<f64>,
    labels: Vec<f64>,
    meta: DatasetMeta,
}

impl SvmDataset {
    pub fn new(x: DMatrix<f64>, labels: Vec<f64>, meta: DatasetMeta) -> Result<Self> {
        if labels.len() != x.ncols() {
            return Err(Error::Dimension {
                what: "labels vs examples",
                expected: x.ncols(),
                found: labels.len(),
            });
        }
        if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
            return Err(Error::InvalidParameter("labels must be +1 or -1".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("features must be finite".into()));
        }
        Ok(Self { x, labels, meta })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn meta(&self) -> DatasetMeta {
        self.meta
    }

    /// Feature count.
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Example count.
    pub fn m(&self) -> usize {
        self.x.ncols()
    }
}

/// Hyperplane `wᵀx + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Classifier {
    pub w: DVector<f64>,
    pub b: f64,
}

impl Classifier {
    pub fn negated(&self) -> Self {
        Self {
            w: -&self.w,
            b: -self.b,
        }
    }
}

/// A generated train/test pair together with the planted hyperplane.
#[derive(Clone, Debug)]
pub struct Generated {
    pub train: SvmDataset,
    pub test: SvmDataset,
    pub planted: Classifier,
}

/// How raw standard normal points are brought to minimum planted margin 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MarginRule {
    /// Each point moves along `w*` away from the hyperplane by
    /// `1 − min |w*ᵀx|`; the data keep unit scale at every `n`.
    #[default]
    Offset,
    /// All points are scaled by `1 / min |w*ᵀx|`. The scale grows roughly
    /// linearly with the number of points.
    Rescale,
}

/// Draws `SVM(n, m, p)`: a training set of `m` points and a test set of
/// `⌊m/3⌋` points from the same distribution.
pub fn generate(n: usize, m: usize, p: f64, seed: u64) -> Result<(SvmDataset, SvmDataset)> {
    let g = generate_planted(n, m, p, seed)?;
    Ok((g.train, g.test))
}

/// [`generate_planted_with`] under the default margin rule.
pub fn generate_planted(n: usize, m: usize, p: f64, seed: u64) -> Result<Generated> {
    generate_planted_with(n, m, p, seed, MarginRule::default())
}

/// Planted unit normal `w*` (uniform on the sphere, `b* = 0`), points
/// i.i.d. standard normal brought to `min |w*ᵀx| = 1` over train and test
/// by `rule`, labels `sign(w*ᵀx)` each flipped with probability `p`.
pub fn generate_planted_with(
    n: usize,
    m: usize,
    p: f64,
    seed: u64,
    rule: MarginRule,
) -> Result<Generated> {
    if n < 2 || m < 2 || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(alloc::format!(
            "need n >= 2, m >= 2 and 0 <= p <= 1, got n={n} m={m} p={p}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = loop {
        let w = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = w.norm();
        if norm > 0.0 {
            break w / norm;
        }
    };
    let m_test = m / 3;
    let total = m + m_test;
    let mut x = DMatrix::from_fn(n, total, |_, _| rng.sample::<f64, _>(StandardNormal));
    let scores = x.tr_mul(&w);
    let min_abs = scores.iter().fold(f64::INFINITY, |a, s| a.min(s.abs()));
    let side = |s: f64| if s >= 0.0 { 1.0 } else { -1.0 };
    match rule {
        MarginRule::Offset => {
            let gap = 1.0 - min_abs;
            for (j, &s) in scores.iter().enumerate() {
                x.column_mut(j).axpy(side(s) * gap, &w, 1.0);
            }
        }
        MarginRule::Rescale => {
            if min_abs > 0.0 {
                x /= min_abs;
            }
        }
    }
    let labels: Vec<f64> = scores
        .iter()
        .map(|&s| {
            let label = side(s);
            if rng.gen::<f64>() < p {
                -label
            } else {
                label
            }
        })
        .collect();
    let train = SvmDataset::new(
        x.columns(0, m).into_owned(),
        labels[..m].to_vec(),
        DatasetMeta { n, m, p, seed },
    )?;
    let test = SvmDataset::new(
        x.columns(m, m_test).into_owned(),
        labels[m..].to_vec(),
        DatasetMeta {
            n,
            m: m_test,
            p,
            seed,
        },
    )?;
    Ok(Generated {
        train,
        test,
        planted: Classifier { w, b: 0.0 },
    })
}

/// Bias-folded reduction.
pub fn to_socp(data: &SvmDataset, c: f64) -> Result<SocpInstance> {
    to_socp_with(data, c, true)
}

/// Reduction with a separate `L¹` bias block.
pub fn to_socp_unfolded(data: &SvmDataset, c: f64) -> Result<SocpInstance> {
    to_socp_with(data, c, false)
}

pub fn to_socp_with(data: &SvmDataset, c: f64, folded: bool) -> Result<SocpInstance> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "C must be positive, got {c}"
        )));
    }
    let (n, m) = (data.n(), data.m());
    if m == 0 {
        return Err(Error::Empty("dataset has no examples"));
    }
    let dim = n + 3 + m;
    let mut a = DMatrix::zeros(m + 1, dim);
    let mut b = DVector::zeros(m + 1);
    for i in 0..m {
        let y = data.labels[i];
        a.view_mut((i, 2), (1, n))
            .copy_from(&data.x.column(i).transpose());
        a[(i, n + 2)] = 1.0;
        a[(i, n + 3 + i)] = y;
        b[i] = y;
    }
    a[(m, 0)] = 1.0;
    a[(m, 1)] = -1.0;
    b[m] = 1.0;

    let mut sizes = if folded { vec![n + 3] } else { vec![n + 2, 1] };
    sizes.extend(core::iter::repeat_n(1, m));
    let cones = ConeStructure::new(sizes)?;
    let mut cv = DVector::zeros(dim);
    cv[1] = 1.0;
    for i in 0..m {
        cv[n + 3 + i] = c;
    }
    let cvec = BlockVector::new(&cones, cv)?;
    Ok(SocpInstance::new(a, b, cvec)?.with_layout(InstanceLayout::Svm {
        features: n,
        points: m,
        folded,
    }))
}

fn svm_layout(inst: &SocpInstance) -> Result<(usize, usize)> {
    match inst.layout() {
        InstanceLayout::Svm { features, points, .. } if inst.n() == features + 3 + points => {
            Ok((features, points))
        }
        InstanceLayout::Svm { features, points, .. } => Err(Error::Dimension {
            what: "SVM layout",
            expected: features + 3 + points,
            found: inst.n(),
        }),
        InstanceLayout::General => Err(Error::InvalidStructure("instance is not an SVM reduction")),
    }
}

/// Reads `(w, b)` from a primal vector in the reduction layout.
pub fn extract_from_primal(inst: &SocpInstance, x: &BlockVector) -> Result<Classifier> {
    let (n, _) = svm_layout(inst)?;
    if x.dim() != inst.n() {
        return Err(Error::Dimension {
            what: "primal vector",
            expected: inst.n(),
            found: x.dim(),
        });
    }
    let v = x.as_slice();
    Ok(Classifier {
        w: DVector::from_column_slice(&v[2..2 + n]),
        b: v[n + 2],
    })
}

pub fn extract_classifier(inst: &SocpInstance, solution: &Iterate) -> Result<Classifier> {
    extract_from_primal(inst, solution.x())
}

/// Slacks `ξ` from a primal vector in the reduction layout.
pub fn extract_slacks(inst: &SocpInstance, x: &BlockVector) -> Result<DVector<f64>> {
    let (n, m) = svm_layout(inst)?;
    Ok(DVector::from_column_slice(&x.as_slice()[n + 3..n + 3 + m]))
}

/// Fraction of examples with `y (wᵀx + b) > 0`; a zero score is an error.
pub fn accuracy(clf: &Classifier, data: &SvmDataset) -> Result<f64> {
    if data.m() == 0 {
        return Err(Error::Empty("dataset has no examples"));
    }
    if clf.w.len() != data.n() {
        return Err(Error::Dimension {
            what: "classifier vs feature count",
            expected: data.n(),
            found: clf.w.len(),
        });
    }
    let scores = data.x.tr_mul(&clf.w);
    let correct = scores
        .iter()
        .zip(&data.labels)
        .filter(|(s, y)| *y * (*s + clf.b) > 0.0)
        .count();
    Ok(correct as f64 / data.m() as f64)
}
