//! JSON file formats for cone programs and SVM datasets.
//!
//! Both are tagged by `kind` so `solve` can accept either.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use qipm_core::svm::DatasetMeta;
use qipm_core::{BlockVector, ConeStructure, SocpInstance, SvmDataset};
use serde::{Deserialize, Serialize};

/// `min cᵀx s.t. Ax = b, x ∈ L` with `A` stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    pub cone_sizes: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Strictly feasible primal start; required to solve general instances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

/// Labels in `{−1, +1}` and the feature matrix stored column-major, one
/// example per column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub seed: u64,
    pub labels: Vec<f64>,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Document {
    Socp(InstanceFile),
    Svm(DatasetFile),
}

impl InstanceFile {
    pub fn from_instance(inst: &SocpInstance, x0: Option<&BlockVector>) -> Self {
        let a = inst.a();
        let mut rows = Vec::with_capacity(a.len());
        for i in 0..a.nrows() {
            rows.extend(a.row(i).iter());
        }
        Self {
            m: inst.m(),
            n: inst.n(),
            cone_sizes: inst.cones().sizes().to_vec(),
            a: rows,
            b: inst.b().iter().copied().collect(),
            c: inst.c().as_slice().to_vec(),
            x0: x0.map(|x| x.as_slice().to_vec()),
        }
    }

    pub fn to_instance(&self) -> Result<(SocpInstance, Option<BlockVector>)> {
        if self.a.len() != self.m * self.n {
            bail!("A has {} entries, expected m*n = {}", self.a.len(), self.m * self.n);
        }
        let cones = ConeStructure::new(self.cone_sizes.clone())?;
        let a = DMatrix::from_row_slice(self.m, self.n, &self.a);
        let c = BlockVector::from_slice(&cones, &self.c)?;
        let inst = SocpInstance::new(a, DVector::from_column_slice(&self.b), c)?;
        let x0 = match &self.x0 {
            Some(v) => Some(BlockVector::from_slice(&cones, v)?),
            None => None,
        };
        Ok((inst, x0))
    }
}

impl DatasetFile {
    pub fn from_dataset(data: &SvmDataset) -> Self {
        let meta = data.meta();
        Self {
            n: data.n(),
            m: data.m(),
            p: meta.p,
            seed: meta.seed,
            labels: data.labels().to_vec(),
            x: data.x().as_slice().to_vec(),
        }
    }

    pub fn to_dataset(&self) -> Result<SvmDataset> {
        if self.x.len() != self.n * self.m {
            bail!("X has {} entries, expected n*m = {}", self.x.len(), self.n * self.m);
        }
        let x = DMatrix::from_column_slice(self.n, self.m, &self.x);
        let meta = DatasetMeta {
            n: self.n,
            m: self.m,
            p: self.p,
            seed: self.seed,
        };
        Ok(SvmDataset::new(x, self.labels.clone(), meta)?)
    }
}

pub fn write_document(path: &Path, doc: &Document) -> Result<()> {
    let text = serde_json::to_string_pretty(doc)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_document(path: &Path) -> Result<Document> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
