//! Ground-truth sparse coding instances: random dictionaries, k-sparse
//! coefficient matrices, and the data products the rest of the library
//! measures and recovers.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, Combinations};
use crate::error::{BcsError, Result};
use crate::exec;
use crate::linalg;
use crate::rng;

const DICT_STREAM: u64 = 0x01;
const SUPPORT_STREAM: u64 = 0x02;
const VALUE_STREAM: u64 = 0x03;

/// Problem dimensions. `ell` is set in balanced mode, where every support
/// pattern receives exactly `ell` columns and `n = ell * C(m, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDims {
    pub d: usize,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub ell: Option<usize>,
}

impl ProblemDims {
    pub fn new(d: usize, m: usize, k: usize, n: usize) -> Result<Self> {
        let dims = ProblemDims { d, m, k, n, ell: None };
        dims.validate()?;
        Ok(dims)
    }

    /// Balanced layout: `ell` columns per support pattern.
    pub fn balanced(d: usize, m: usize, k: usize, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(BcsError::dimension("ell must be positive"));
        }
        let patterns = binomial(m, k);
        let n = patterns.saturating_mul(ell as u128);
        if n > usize::MAX as u128 {
            return Err(BcsError::dimension("n = ell * C(m,k) overflows"));
        }
        let dims = ProblemDims { d, m, k, n: n as usize, ell: Some(ell) };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(BcsError::dimension("k must be at least 1"));
        }
        if 2 * self.k >= self.d {
            return Err(BcsError::dimension(format!(
                "need 2k < d, got k={} d={}",
                self.k, self.d
            )));
        }
        if self.m < self.k {
            return Err(BcsError::dimension(format!(
                "need m >= k, got m={} k={}",
                self.m, self.k
            )));
        }
        if self.n == 0 {
            return Err(BcsError::dimension("n must be at least 1"));
        }
        if let Some(ell) = self.ell {
            let expect = binomial(self.m, self.k).saturating_mul(ell as u128);
            if expect != self.n as u128 {
                return Err(BcsError::dimension(format!(
                    "balanced mode requires n = ell * C(m,k) = {expect}, got n={}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// Column-normalized dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub atoms: DMatrix<f64>,
}

impl Dictionary {
    /// Wrap an explicit atom matrix, checking unit column norms.
    pub fn from_atoms(atoms: DMatrix<f64>) -> Result<Self> {
        for j in 0..atoms.ncols() {
            let norm = atoms.column(j).norm();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(BcsError::Degenerate(format!(
                    "column {j} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Dictionary { atoms })
    }

    pub fn d(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn m(&self) -> usize {
        self.atoms.ncols()
    }
}

/// A sorted set of k distinct atom indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SupportPattern(Vec<usize>);

impl SupportPattern {
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            return Err(BcsError::dimension("support must be nonempty"));
        }
        if *indices.last().unwrap() >= m {
            return Err(BcsError::dimension("support index out of range"));
        }
        Ok(SupportPattern(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Distribution of the nonzero coefficient values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffModel {
    /// Uniform on (0, 1].
    IntervalUniform,
    /// Plus or minus one with equal probability (class-Gamma values, C = 1).
    SymmetricUnit,
}

/// How column supports are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportMode {
    /// Exactly `ell` columns per pattern, patterns in lexicographic order.
    Balanced,
    /// Each column's support drawn uniformly from C([m], k).
    Iid,
}

/// k-sparse coefficient matrix with per-column support bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficientMatrix {
    pub values: DMatrix<f64>,
    pub supports: Vec<SupportPattern>,
    pub coeff_model: CoeffModel,
}

/// Full synthetic instance: everything needed to score recovery later.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodingInstance {
    pub dims: ProblemDims,
    pub dict: Dictionary,
    pub coeffs: SparseCoefficientMatrix,
    pub data: DMatrix<f64>,
    pub seed: u64,
}

impl SparseCodingInstance {
    /// Group column indices by shared support, in first-appearance order.
    pub fn support_groups(&self) -> Vec<(SupportPattern, Vec<usize>)> {
        let mut groups: Vec<(SupportPattern, Vec<usize>)> = Vec::new();
        for (j, s) in self.coeffs.supports.iter().enumerate() {
            match groups.iter_mut().find(|(p, _)| p == s) {
                Some((_, cols)) => cols.push(j),
                None => groups.push((s.clone(), vec![j])),
            }
        }
        groups
    }
}

/// Random dictionary: i.i.d. Gaussian columns normalized to unit norm.
/// Deterministic given seed; column j draws from its own derived stream.
pub fn generate_dictionary(d: usize, m: usize, seed: u64) -> Result<Dictionary> {
    if d < 2 || m < d.min(2) || m == 0 {
        return Err(BcsError::dimension(format!(
            "generate_dictionary needs 2 <= d and m >= 2, got d={d} m={m}"
        )));
    }
    let mut atoms = DMatrix::zeros(d, m);
    for j in 0..m {
        let mut col_rng = rng::rng_for(seed, &[DICT_STREAM, j as u64]);
        let mut col = nalgebra::DVector::from_fn(d, |_, _| {
            <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut col_rng)
        });
        let norm = col.norm();
        if norm == 0.0 {
            return Err(BcsError::Degenerate("zero Gaussian column".into()));
        }
        col.scale_mut(1.0 / norm);
        atoms.set_column(j, &col);
    }
    Ok(Dictionary { atoms })
}

/// Numerical spark condition: every s-column submatrix has smallest
/// singular value above `tol_spark` (relative to its largest).
pub fn spark_check(dict: &Dictionary, s: usize) -> Result<bool> {
    spark_check_with(dict, s, 1e-8, 10_000_000)
}

pub fn spark_check_with(dict: &Dictionary, s: usize, tol: f64, budget: u128) -> Result<bool> {
    let (d, m) = (dict.d(), dict.m());
    if s > d || s > m {
        return Err(BcsError::dimension(format!(
            "spark_check needs s <= min(d, m), got s={s} d={d} m={m}"
        )));
    }
    let count = binomial(m, s);
    if count > budget {
        return Err(BcsError::Budget { needed: count, budget });
    }
    // Partitioned by leading index; any failing subset anywhere decides.
    let failures = exec::flat_map_ranges(m, 1, |range| {
        let mut bad = Vec::new();
        for first in range {
            for subset in crate::combinatorics::subsets_with_first(first, m, s) {
                let sub = dict.atoms.select_columns(subset.iter());
                let sv = linalg::singular_values(&sub);
                let smax = sv.first().copied().unwrap_or(0.0);
                let smin = sv.last().copied().unwrap_or(0.0);
                if smax == 0.0 || smin <= tol * smax {
                    bad.push(subset);
                }
            }
        }
        bad
    });
    Ok(failures.is_empty())
}

/// Largest normalized inner product between distinct columns.
pub fn coherence(dict: &Dictionary) -> Result<f64> {
    coherence_of(&dict.atoms)
}

/// Coherence of an arbitrary matrix with nonzero columns.
pub fn coherence_of(mat: &DMatrix<f64>) -> Result<f64> {
    let m = mat.ncols();
    if m < 2 {
        return Err(BcsError::dimension("coherence needs at least 2 columns"));
    }
    let mut best = 0.0_f64;
    for i in 0..m {
        let ni = mat.column(i).norm();
        if ni == 0.0 {
            return Err(BcsError::Degenerate(format!("column {i} has zero norm")));
        }
        for j in i + 1..m {
            let nj = mat.column(j).norm();
            if nj == 0.0 {
                return Err(BcsError::Degenerate(format!("column {j} has zero norm")));
            }
            let c = mat.column(i).dot(&mat.column(j)).abs() / (ni * nj);
            best = best.max(c);
        }
    }
    Ok(best.min(1.0))
}

/// All support patterns in lexicographic order.
pub fn all_supports(m: usize, k: usize) -> Vec<SupportPattern> {
    Combinations::new(m, k).map(SupportPattern).collect()
}

fn draw_support(m: usize, k: usize, rng: &mut impl Rng) -> SupportPattern {
    // Floyd's sampling: k distinct indices without building a full deck.
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for j in m - k..m {
        let t = rng.gen_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    SupportPattern(chosen)
}

fn draw_value(model: CoeffModel, rng: &mut impl Rng) -> f64 {
    match model {
        // 1 - U[0,1) lands in (0, 1].
        CoeffModel::IntervalUniform => 1.0 - rng.gen::<f64>(),
        CoeffModel::SymmetricUnit => {
            if rng.gen::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// k-sparse coefficients under the chosen support mode and value model.
pub fn generate_coefficients(
    dims: &ProblemDims,
    model: CoeffModel,
    mode: SupportMode,
    seed: u64,
) -> Result<SparseCoefficientMatrix> {
    dims.validate()?;
    let supports: Vec<SupportPattern> = match mode {
        SupportMode::Balanced => {
            let ell = dims.ell.ok_or_else(|| {
                BcsError::dimension("balanced mode requires dims.ell")
            })?;
            let patterns = all_supports(dims.m, dims.k);
            if patterns.len() * ell != dims.n {
                return Err(BcsError::dimension("n != ell * C(m,k)"));
            }
            patterns
                .into_iter()
                .flat_map(|p| std::iter::repeat(p).take(ell))
                .collect()
        }
        SupportMode::Iid => (0..dims.n)
            .map(|j| {
                let mut col_rng = rng::rng_for(seed, &[SUPPORT_STREAM, j as u64]);
                draw_support(dims.m, dims.k, &mut col_rng)
            })
            .collect(),
    };
    let mut values = DMatrix::zeros(dims.m, dims.n);
    for (j, support) in supports.iter().enumerate() {
        let mut col_rng = rng::rng_for(seed, &[VALUE_STREAM, j as u64]);
        for &i in support.indices() {
            values[(i, j)] = draw_value(model, &mut col_rng);
        }
    }
    Ok(SparseCoefficientMatrix { values, supports, coeff_model: model })
}

/// Full instance: dictionary, coefficients, and data = A * X.
pub fn synthesize(
    dims: &ProblemDims,
    model: CoeffModel,
    mode: SupportMode,
    seed: u64,
) -> Result<SparseCodingInstance> {
    let dict = generate_dictionary(dims.d, dims.m, seed)?;
    synthesize_with_dictionary(dims, dict, model, mode, seed)
}

/// Same but with a caller-supplied dictionary (identity overrides, ablations).
pub fn synthesize_with_dictionary(
    dims: &ProblemDims,
    dict: Dictionary,
    model: CoeffModel,
    mode: SupportMode,
    seed: u64,
) -> Result<SparseCodingInstance> {
    dims.validate()?;
    if dict.d() != dims.d || dict.m() != dims.m {
        return Err(BcsError::shape(format!(
            "dictionary is {}x{}, dims say {}x{}",
            dict.d(),
            dict.m(),
            dims.d,
            dims.m
        )));
    }
    let coeffs = generate_coefficients(dims, model, mode, seed)?;
    let data = &dict.atoms * &coeffs.values;
    Ok(SparseCodingInstance { dims: *dims, dict, coeffs, data, seed })
}
