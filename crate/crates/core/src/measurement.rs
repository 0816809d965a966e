//! Per-column Gaussian and hybrid measurement operators.
//!
//! Each data column gets its own sampling matrix; hybrid ensembles stack a
//! fixed block F (shared across columns) over a per-column varying block.
//! Entries default to N(0, 1/d).

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{BcsError, Result};
use crate::rng;

const GAUSS_STREAM: u64 = 0x10;
const FIXED_STREAM: u64 = 0x11;
const VARYING_STREAM: u64 = 0x12;

/// Independent p x d Gaussian sampling matrices, one per column.
#[derive(Debug, Clone)]
pub struct GaussianEnsemble {
    pub mats: Vec<DMatrix<f64>>,
    pub p: usize,
    pub d: usize,
    pub variance: f64,
    pub seed: u64,
}

/// Hybrid ensemble: shared fixed block F plus per-column varying blocks.
#[derive(Debug, Clone)]
pub struct HybridEnsemble {
    pub fixed: DMatrix<f64>,
    pub varying: Vec<DMatrix<f64>>,
    pub d: usize,
    pub seed: u64,
}

impl HybridEnsemble {
    pub fn p_f(&self) -> usize {
        self.fixed.nrows()
    }

    pub fn p_v(&self) -> usize {
        self.varying.first().map_or(0, |v| v.nrows())
    }

    /// Full stacked sampling matrix [F; V_j] for column j.
    pub fn stacked(&self, j: usize) -> DMatrix<f64> {
        let p_f = self.p_f();
        let p_v = self.p_v();
        let mut phi = DMatrix::zeros(p_f + p_v, self.d);
        phi.rows_mut(0, p_f).copy_from(&self.fixed);
        phi.rows_mut(p_f, p_v).copy_from(&self.varying[j]);
        phi
    }
}

/// Either ensemble, viewed as one sampling matrix per column.
pub trait ColumnSampler {
    fn len(&self) -> usize;
    fn dim(&self) -> usize;
    fn matrix(&self, j: usize) -> DMatrix<f64>;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ColumnSampler for GaussianEnsemble {
    fn len(&self) -> usize {
        self.mats.len()
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn matrix(&self, j: usize) -> DMatrix<f64> {
        self.mats[j].clone()
    }
}

impl ColumnSampler for HybridEnsemble {
    fn len(&self) -> usize {
        self.varying.len()
    }
    fn dim(&self) -> usize {
        self.d
    }
    fn matrix(&self, j: usize) -> DMatrix<f64> {
        self.stacked(j)
    }
}

/// Observed measurements z_j = Phi_j y_j, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub observations: Vec<DVector<f64>>,
}

fn gaussian_matrix(rows: usize, cols: usize, sd: f64, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
    })
}

/// n independent p x d matrices with N(0, 1/d) entries.
pub fn sample_gaussian(p: usize, d: usize, n: usize, seed: u64) -> Result<GaussianEnsemble> {
    sample_gaussian_with_variance(p, d, n, 1.0 / d as f64, seed)
}

pub fn sample_gaussian_with_variance(
    p: usize,
    d: usize,
    n: usize,
    variance: f64,
    seed: u64,
) -> Result<GaussianEnsemble> {
    if p == 0 || p > d {
        return Err(BcsError::dimension(format!(
            "need 1 <= p <= d, got p={p} d={d}"
        )));
    }
    let sd = variance.sqrt();
    let mats = (0..n)
        .map(|j| {
            let mut mrng = rng::rng_for(seed, &[GAUSS_STREAM, j as u64]);
            gaussian_matrix(p, d, sd, &mut mrng)
        })
        .collect();
    Ok(GaussianEnsemble { mats, p, d, variance, seed })
}

/// Hybrid ensemble: F shared across all columns, V_j independent per column.
pub fn sample_hybrid(
    p_f: usize,
    p_v: usize,
    d: usize,
    n: usize,
    seed: u64,
) -> Result<HybridEnsemble> {
    if p_f == 0 || p_v == 0 {
        return Err(BcsError::dimension("p_f and p_v must be at least 1"));
    }
    if p_f + p_v > d {
        return Err(BcsError::dimension(format!(
            "need p_f + p_v <= d, got {p_f}+{p_v} > {d}"
        )));
    }
    let sd = (1.0 / d as f64).sqrt();
    let mut frng = rng::rng_for(seed, &[FIXED_STREAM]);
    let fixed = gaussian_matrix(p_f, d, sd, &mut frng);
    let varying = (0..n)
        .map(|j| {
            let mut vrng = rng::rng_for(seed, &[VARYING_STREAM, j as u64]);
            gaussian_matrix(p_v, d, sd, &mut vrng)
        })
        .collect();
    Ok(HybridEnsemble { fixed, varying, d, seed })
}

/// Apply an ensemble to data: z_j = Phi_j y_j.
pub fn apply<S: ColumnSampler>(ensemble: &S, data: &DMatrix<f64>) -> Result<MeasurementRecord> {
    if data.ncols() != ensemble.len() {
        return Err(BcsError::shape(format!(
            "data has {} columns, ensemble expects {}",
            data.ncols(),
            ensemble.len()
        )));
    }
    if data.nrows() != ensemble.dim() {
        return Err(BcsError::shape(format!(
            "data rows {} != ensemble dimension {}",
            data.nrows(),
            ensemble.dim()
        )));
    }
    let observations = (0..data.ncols())
        .map(|j| ensemble.matrix(j) * data.column(j))
        .collect();
    Ok(MeasurementRecord { observations })
}

/// Orthogonal projection of z back into the row space of Phi:
/// y_hat = Phi^T (Phi Phi^T)^{-1} z, computed through a QR of Phi^T.
pub fn project_column(phi: &DMatrix<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
    let (p, d) = phi.shape();
    if p > d {
        return Err(BcsError::dimension(format!("need p <= d, got p={p} d={d}")));
    }
    if z.len() != p {
        return Err(BcsError::shape(format!(
            "observation has length {}, expected {p}",
            z.len()
        )));
    }
    let qr = phi.transpose().qr();
    let r = qr.r();
    let diag_max = (0..p).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    for i in 0..p {
        if r[(i, i)].abs() <= 1e-12 * diag_max.max(1e-300) {
            return Err(BcsError::Singular(
                "sampling matrix is not full row rank".into(),
            ));
        }
    }
    // Phi = R^T Q^T, so Phi Phi^T = R^T R and y_hat = Q R^{-T} z.
    let w = r
        .transpose()
        .solve_lower_triangular(z)
        .ok_or_else(|| BcsError::Singular("triangular solve failed".into()))?;
    Ok(qr.q() * w)
}

/// Project every column of a record, reassembling a d x n matrix.
pub fn project_record<S: ColumnSampler>(
    ensemble: &S,
    record: &MeasurementRecord,
) -> Result<DMatrix<f64>> {
    if record.observations.len() != ensemble.len() {
        return Err(BcsError::shape("record/ensemble size mismatch".into()));
    }
    let d = ensemble.dim();
    let n = ensemble.len();
    let mut out = DMatrix::zeros(d, n);
    for j in 0..n {
        let y_hat = project_column(&ensemble.matrix(j), &record.observations[j])?;
        out.set_column(j, &y_hat);
    }
    Ok(out)
}

/// Dense block-diagonal operator with blocks Phi_1 .. Phi_n; equals the
/// ensemble action on vec(Y). Guarded by an entry budget.
pub fn dense_block_operator<S: ColumnSampler>(ensemble: &S) -> Result<DMatrix<f64>> {
    dense_block_operator_with_budget(ensemble, 100_000_000)
}

pub fn dense_block_operator_with_budget<S: ColumnSampler>(
    ensemble: &S,
    budget: u128,
) -> Result<DMatrix<f64>> {
    let n = ensemble.len();
    if n == 0 {
        return Err(BcsError::dimension("empty ensemble".into()));
    }
    let d = ensemble.dim();
    let p = ensemble.matrix(0).nrows();
    let entries = (p as u128) * (n as u128) * (d as u128) * (n as u128);
    if entries > budget {
        return Err(BcsError::Budget { needed: entries, budget });
    }
    let mut block = DMatrix::zeros(p * n, d * n);
    for j in 0..n {
        block
            .view_mut((j * p, j * d), (p, d))
            .copy_from(&ensemble.matrix(j));
    }
    Ok(block)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn gaussian_shapes_and_determinism() {
        let e = sample_gaussian(3, 16, 150, 5).unwrap();
        assert_eq!(e.mats.len(), 150);
        assert_eq!(e.mats[0].shape(), (3, 16));
        // pairwise distinct
        for j in 1..150 {
            assert_ne!(e.mats[0], e.mats[j]);
        }
        let e2 = sample_gaussian(3, 16, 150, 5).unwrap();
        assert_eq!(e.mats, e2.mats);
    }

    #[test]
    fn square_gaussian_invertible() {
        let mut ok = 0;
        for seed in 0..200 {
            let e = sample_gaussian(4, 4, 1, seed).unwrap();
            let sv = crate::linalg::singular_values(&e.mats[0]);
            if sv[3] > 1e-10 * sv[0] {
                ok += 1;
            }
        }
        assert!(ok >= 199, "ok = {ok}");
    }

    #[test]
    fn empirical_entry_variance() {
        // Monte-Carlo moment estimate for d = 16: expect 1/16 within 3 SE.
        let d = 16;
        let e = sample_gaussian(16, d, 250, 77).unwrap();
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for m in &e.mats {
            for v in m.iter() {
                sum_sq += v * v;
                count += 1;
            }
        }
        let var = sum_sq / count as f64;
        let expect = 1.0 / d as f64;
        // Var of x^2 terms is 2 * expect^2 for Gaussians.
        let se = (2.0 * expect * expect / count as f64).sqrt();
        assert!((var - expect).abs() <= 3.0 * se, "var={var} expect={expect}");
    }

    #[test]
    fn p_greater_than_d_rejected() {
        assert!(sample_gaussian(17, 16, 1, 0).is_err());
    }

    #[test]
    fn hybrid_stacks_and_shares_fixed_block() {
        let e = sample_hybrid(3, 9, 16, 150, 2).unwrap();
        assert_eq!(e.stacked(0).shape(), (12, 16));
        assert_eq!(e.stacked(7).rows(0, 3), e.fixed.rows(0, 3));
        assert!(sample_hybrid(8, 9, 16, 5, 2).is_err()); // p_f + p_v = d + 1
    }

    #[test]
    fn apply_identity_rows_and_linearity() {
        let d = 6;
        let n = 4;
        let mats = vec![DMatrix::identity(d, d); n];
        let ensemble = GaussianEnsemble { mats, p: d, d, variance: 1.0, seed: 0 };
        let mut rng = crate::rng::rng_from_seed(1);
        let y = DMatrix::from_fn(d, n, |_, _| rng.gen::<f64>() - 0.5);
        let rec = apply(&ensemble, &y).unwrap();
        for j in 0..n {
            assert_relative_eq!((&rec.observations[j] - y.column(j)).norm(), 0.0);
        }
        // zero data -> zero observations; scaling is linear
        let zero = DMatrix::zeros(d, n);
        let rec0 = apply(&ensemble, &zero).unwrap();
        assert!(rec0.observations.iter().all(|z| z.norm() == 0.0));
        let rec2 = apply(&ensemble, &(2.0 * &y)).unwrap();
        for j in 0..n {
            assert_relative_eq!(
                (&rec2.observations[j] - 2.0 * &rec.observations[j]).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn projection_recovers_full_measurements() {
        let e = sample_gaussian(4, 4, 1, 3).unwrap();
        let mut rng = crate::rng::rng_from_seed(8);
        let y = DVector::from_fn(4, |_, _| rng.gen::<f64>() - 0.5);
        let z = &e.mats[0] * &y;
        let y_hat = project_column(&e.mats[0], &z).unwrap();
        assert_relative_eq!((y_hat - y).norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_coordinate_case() {
        // First p rows of the identity: y_hat = z padded with zeros.
        let mut phi = DMatrix::zeros(2, 5);
        phi[(0, 0)] = 1.0;
        phi[(1, 1)] = 1.0;
        let z = DVector::from_vec(vec![0.3, -0.7]);
        let y_hat = project_column(&phi, &z).unwrap();
        assert_relative_eq!(y_hat[0], 0.3);
        assert_relative_eq!(y_hat[1], -0.7);
        assert_eq!(y_hat.rows(2, 3).norm(), 0.0);
    }

    #[test]
    fn projection_contracts_and_satisfies_constraints() {
        let e = sample_gaussian(3, 16, 1, 9).unwrap();
        let mut rng = crate::rng::rng_from_seed(10);
        let y = DVector::from_fn(16, |_, _| rng.gen::<f64>() - 0.5);
        let z = &e.mats[0] * &y;
        let y_hat = project_column(&e.mats[0], &z).unwrap();
        assert!((&e.mats[0] * &y_hat - &z).norm() <= 1e-10);
        assert!(y_hat.norm() <= y.norm() + 1e-12);
    }

    #[test]
    fn projection_rejects_rank_deficient() {
        let phi = DMatrix::zeros(2, 4);
        let z = DVector::zeros(2);
        assert!(project_column(&phi, &z).is_err());
    }

    #[test]
    fn dense_block_matches_apply() {
        let e = sample_gaussian(2, 5, 3, 4).unwrap();
        let mut rng = crate::rng::rng_from_seed(11);
        let y = DMatrix::from_fn(5, 3, |_, _| rng.gen::<f64>() - 0.5);
        let rec = apply(&e, &y).unwrap();
        let block = dense_block_operator(&e).unwrap();
        let mut vec_y = DVector::zeros(15);
        for j in 0..3 {
            vec_y.rows_mut(j * 5, 5).copy_from(&y.column(j));
        }
        let stacked = block * vec_y;
        for j in 0..3 {
            let got = stacked.rows(j * 2, 2);
            assert_relative_eq!((got - &rec.observations[j]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dense_block_structure() {
        let e = sample_gaussian(1, 2, 2, 6).unwrap();
        let block = dense_block_operator(&e).unwrap();
        assert_eq!(block.shape(), (2, 4));
        assert_eq!(block[(0, 2)], 0.0);
        assert_eq!(block[(0, 3)], 0.0);
        assert_eq!(block[(1, 0)], 0.0);
        assert_eq!(block[(1, 1)], 0.0);
    }

    #[test]
    fn dense_block_budget() {
        let e = sample_gaussian(4, 16, 100, 1).unwrap();
        assert!(matches!(
            dense_block_operator_with_budget(&e, 1000),
            Err(BcsError::Budget { .. })
        ));
    }

    #[test]
    fn hybrid_fixed_rows_match_direct_product() {
        let e = sample_hybrid(3, 9, 16, 10, 21).unwrap();
        let mut rng = crate::rng::rng_from_seed(22);
        let y = DMatrix::from_fn(16, 10, |_, _| rng.gen::<f64>() - 0.5);
        let rec = apply(&e, &y).unwrap();
        let fy = &e.fixed * &y;
        for j in 0..10 {
            let top = rec.observations[j].rows(0, 3).clone_owned();
            assert_relative_eq!((top - fy.column(j)).norm(), 0.0, epsilon = 1e-12);
        }
    }
}
