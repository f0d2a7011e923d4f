//! Coefficient estimation for the linear-in-parameters PIM model
//! `y = Aθ + noise`: block least squares through orthogonal factorization,
//! plus sample-by-sample RLS and LMS.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisTerm, DataMatrix};
use crate::error::{Error, Result};
use crate::linalg::QrAccumulator;
use crate::Real;

/// Rows absorbed per QR block update.
const QR_BLOCK_ROWS: usize = 2048;
const CONDITION_ITERATIONS: usize = 60;

/// Estimated coefficients, aligned with the data-matrix terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientVector<T> {
    pub terms: Vec<BasisTerm>,
    pub values: Vec<Complex<T>>,
}

impl<T: Real> CoefficientVector<T> {
    pub fn new(terms: Vec<BasisTerm>, values: Vec<Complex<T>>) -> Result<Self> {
        let v = Self { terms, values };
        v.validate()?;
        Ok(v)
    }

    pub fn zeros(terms: Vec<BasisTerm>) -> Self {
        let values = vec![Complex::new(T::zero(), T::zero()); terms.len()];
        Self { terms, values }
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.len() != self.values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} terms but {} coefficients",
                self.terms.len(),
                self.values.len()
            )));
        }
        if self
            .values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite("coefficient vector"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.norm_sqr().to_f64_lossy())
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let v: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        v.validate()?;
        Ok(v)
    }
}

/// Block least-squares diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsDiagnostics {
    pub rows: usize,
    pub cols: usize,
    pub ridge_lambda: f64,
    /// Two-norm condition number estimate of the (ridge-augmented) matrix.
    pub condition_number: f64,
    /// Smallest `|R_jj|` relative to the largest.
    pub min_relative_pivot: f64,
    /// Mean `|y − Aθ|²` over the training rows.
    pub residual_power: f64,
    pub residual_power_db: f64,
}

/// Solves `min ‖y − Aθ‖² + λ‖θ‖²` by Householder QR of `[A; √λ·I]`.
///
/// With `ridge_lambda = 0` a numerically rank-deficient `A` is an error
/// rather than being regularized silently.
pub fn fit_block_ls<T: Real>(
    a: &DataMatrix<T>,
    y: &[Complex<T>],
    ridge_lambda: f64,
) -> Result<(CoefficientVector<T>, LsDiagnostics)> {
    let (n, k) = (a.rows(), a.cols());
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "data matrix has {n} rows, observation has {} samples",
            y.len()
        )));
    }
    if n < k {
        return Err(Error::DimensionMismatch(format!(
            "underdetermined system: {n} rows < {k} columns"
        )));
    }
    if !(ridge_lambda.is_finite() && ridge_lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ridge must be non-negative, got {ridge_lambda}"
        )));
    }
    if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("observation"));
    }

    let mut qr = QrAccumulator::new(k);
    let mut start = 0;
    while start < n {
        let end = (start + QR_BLOCK_ROWS).min(n);
        qr.absorb(end - start, |j| &a.column(j)[start..end], &y[start..end]);
        start = end;
    }
    if ridge_lambda > 0.0 {
        let s = T::lit(ridge_lambda.sqrt());
        let cols: Vec<Vec<Complex<T>>> = (0..k)
            .map(|j| {
                let mut c = vec![Complex::new(T::zero(), T::zero()); k];
                c[j] = Complex::new(s, T::zero());
                c
            })
            .collect();
        qr.absorb(
            k,
            |j| &cols[j],
            &vec![Complex::new(T::zero(), T::zero()); k],
        );
    }

    let pivots: Vec<f64> = (0..k).map(|j| qr.r_diag(j).norm().to_f64_lossy()).collect();
    let max_pivot = pivots.iter().cloned().fold(0.0, f64::max);
    let tol = max_pivot * (n.max(k) as f64) * T::epsilon().to_f64_lossy();
    if let Some((column, &magnitude)) = pivots.iter().enumerate().find(|(_, &p)| p <= tol) {
        return Err(Error::RankDeficient { column, magnitude });
    }
    let min_pivot = pivots.iter().cloned().fold(f64::INFINITY, f64::min);

    let theta = qr.solve();
    let coefficients = CoefficientVector::new(a.terms().to_vec(), theta)?;
    let fitted = a.mul_vec(&coefficients.values)?;
    let residual_power = y
        .iter()
        .zip(&fitted)
        .map(|(yv, fv)| (*yv - *fv).norm_sqr().to_f64_lossy())
        .sum::<f64>()
        / n as f64;

    let diagnostics = LsDiagnostics {
        rows: n,
        cols: k,
        ridge_lambda,
        condition_number: qr.condition_estimate(CONDITION_ITERATIONS),
        min_relative_pivot: if max_pivot > 0.0 {
            min_pivot / max_pivot
        } else {
            0.0
        },
        residual_power,
        residual_power_db: 10.0 * residual_power.log10(),
    };
    Ok((coefficients, diagnostics))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMethod {
    BlockLs,
    Rls,
    Lms,
}

/// Hyperparameters for [`fit_block_ls`] and [`fit_adaptive`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub method: EstimatorMethod,
    /// Ridge for block LS; for RLS the initial inverse correlation is
    /// `I/ridge_lambda` (or `I/1e-6` when zero).
    pub ridge_lambda: f64,
    /// RLS exponential forgetting factor in `(0, 1]`.
    pub forgetting_factor: f64,
    /// LMS step size; `None` picks `0.1 / mean‖a[n]‖²` from the data.
    pub step_size: Option<f64>,
    /// Adaptive estimators fail once `‖θ‖` exceeds this.
    pub divergence_bound: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            method: EstimatorMethod::BlockLs,
            ridge_lambda: 0.0,
            forgetting_factor: 0.999,
            step_size: None,
            divergence_bound: 1e6,
        }
    }
}

const RLS_DEFAULT_DELTA: f64 = 1e-6;

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge_lambda.is_finite() && self.ridge_lambda >= 0.0) {
            return Err(Error::InvalidArgument("ridge_lambda must be >= 0".into()));
        }
        if !(self.forgetting_factor > 0.0 && self.forgetting_factor <= 1.0) {
            return Err(Error::InvalidArgument(
                "forgetting_factor must be in (0, 1]".into(),
            ));
        }
        if let Some(mu) = self.step_size {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::InvalidArgument("step_size must be >= 0".into()));
            }
        }
        if !(self.divergence_bound > 0.0) {
            return Err(Error::InvalidArgument(
                "divergence_bound must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// `0.1 / mean‖a[n]‖²`, a conservative LMS step for the given regressors.
pub fn default_lms_step<T: Real>(a: &DataMatrix<T>) -> f64 {
    let energy: f64 = (0..a.cols())
        .map(|j| {
            a.column(j)
                .iter()
                .map(|v| v.norm_sqr().to_f64_lossy())
                .sum::<f64>()
        })
        .sum::<f64>()
        / a.rows() as f64;
    if energy > 0.0 {
        0.1 / energy
    } else {
        0.0
    }
}

enum AdaptiveKind<T> {
    Rls {
        /// Inverse correlation estimate, row-major `k×k`.
        p: Vec<Complex<T>>,
        forgetting: T,
    },
    Lms {
        step: T,
    },
}

/// Per-sample coefficient tracker. Prediction for regressor row `a` is
/// `aᵀθ`; the error is `e = y − aᵀθ` before the update.
pub struct AdaptiveEstimator<T> {
    theta: Vec<Complex<T>>,
    kind: AdaptiveKind<T>,
    bound: f64,
    samples: usize,
}

impl<T: Real> AdaptiveEstimator<T> {
    /// `step_size` overrides `config.step_size` for LMS.
    pub fn new(config: &EstimatorConfig, k: usize, step_size: Option<f64>) -> Result<Self> {
        config.validate()?;
        let kind = match config.method {
            EstimatorMethod::Rls => {
                let delta = if config.ridge_lambda > 0.0 {
                    config.ridge_lambda
                } else {
                    RLS_DEFAULT_DELTA
                };
                let mut p = vec![Complex::new(T::zero(), T::zero()); k * k];
                for i in 0..k {
                    p[i * k + i] = Complex::new(T::lit(1.0 / delta), T::zero());
                }
                AdaptiveKind::Rls {
                    p,
                    forgetting: T::lit(config.forgetting_factor),
                }
            }
            EstimatorMethod::Lms => {
                let mu = step_size
                    .or(config.step_size)
                    .ok_or_else(|| Error::InvalidArgument("LMS needs a step size".into()))?;
                AdaptiveKind::Lms { step: T::lit(mu) }
            }
            EstimatorMethod::BlockLs => {
                return Err(Error::InvalidArgument(
                    "block LS is not an adaptive method".into(),
                ))
            }
        };
        Ok(Self {
            theta: vec![Complex::new(T::zero(), T::zero()); k],
            kind,
            bound: config.divergence_bound,
            samples: 0,
        })
    }

    pub fn theta(&self) -> &[Complex<T>] {
        &self.theta
    }

    /// Consumes one regressor row and observation; returns the a-priori
    /// error.
    pub fn update(&mut self, row: &[Complex<T>], y: Complex<T>) -> Result<Complex<T>> {
        let k = self.theta.len();
        if row.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} for {k} coefficients",
                row.len()
            )));
        }
        let prediction = row
            .iter()
            .zip(&self.theta)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, t)| {
                acc + *a * *t
            });
        let err = y - prediction;

        match &mut self.kind {
            AdaptiveKind::Lms { step } => {
                for (t, a) in self.theta.iter_mut().zip(row) {
                    *t = *t + a.conj() * err * *step;
                }
            }
            AdaptiveKind::Rls { p, forgetting } => {
                // regressor x = conj(a) so that aᵀθ = xᴴθ
                let x: Vec<Complex<T>> = row.iter().map(|a| a.conj()).collect();
                let pi: Vec<Complex<T>> = (0..k)
                    .map(|i| {
                        (0..k).fold(Complex::new(T::zero(), T::zero()), |acc, j| {
                            acc + p[i * k + j] * x[j]
                        })
                    })
                    .collect();
                let denom = x
                    .iter()
                    .zip(&pi)
                    .fold(Complex::new(*forgetting, T::zero()), |acc, (xi, pii)| {
                        acc + xi.conj() * *pii
                    });
                let gain: Vec<Complex<T>> = pi.iter().map(|v| *v / denom).collect();
                for (t, g) in self.theta.iter_mut().zip(&gain) {
                    *t = *t + *g * err;
                }
                let inv_f = T::one() / *forgetting;
                for i in 0..k {
                    for j in 0..k {
                        p[i * k + j] = (p[i * k + j] - gain[i] * pi[j].conj()) * inv_f;
                    }
                }
                // keep P Hermitian
                for i in 0..k {
                    for j in i + 1..k {
                        let avg = (p[i * k + j] + p[j * k + i].conj()) * T::lit(0.5);
                        p[i * k + j] = avg;
                        p[j * k + i] = avg.conj();
                    }
                    p[i * k + i] = Complex::new(p[i * k + i].re, T::zero());
                }
            }
        }

        let norm = self
            .theta
            .iter()
            .map(|t| t.norm_sqr().to_f64_lossy())
            .sum::<f64>()
            .sqrt();
        if !(norm <= self.bound) {
            return Err(Error::Diverged {
                sample: self.samples,
                norm,
                bound: self.bound,
            });
        }
        self.samples += 1;
        Ok(err)
    }
}

/// Output of [`fit_adaptive`].
#[derive(Clone, Debug)]
pub struct AdaptiveFit<T> {
    pub coefficients: CoefficientVector<T>,
    /// `(samples consumed, θ)` every `record_every` samples and at the end.
    pub trajectory: Vec<(usize, Vec<Complex<T>>)>,
    pub a_priori_errors: Vec<Complex<T>>,
}

/// Runs RLS or LMS over the rows of `a` against `y`.
pub fn fit_adaptive<T: Real>(
    a: &DataMatrix<T>,
    y: &[Complex<T>],
    config: &EstimatorConfig,
    record_every: usize,
) -> Result<AdaptiveFit<T>> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "data matrix has {} rows, observation has {} samples",
            a.rows(),
            y.len()
        )));
    }
    let step = match (config.method, config.step_size) {
        (EstimatorMethod::Lms, None) => Some(default_lms_step(a)),
        _ => None,
    };
    let mut est = AdaptiveEstimator::new(config, a.cols(), step)?;
    let mut trajectory = Vec::new();
    let mut errors = Vec::with_capacity(a.rows());
    let mut row = vec![Complex::new(T::zero(), T::zero()); a.cols()];
    for (n, &yn) in y.iter().enumerate() {
        for (j, r) in row.iter_mut().enumerate() {
            *r = a.get(n, j);
        }
        errors.push(est.update(&row, yn)?);
        if record_every > 0 && (n + 1) % record_every == 0 {
            trajectory.push((n + 1, est.theta().to_vec()));
        }
    }
    if trajectory.last().map(|(s, _)| *s) != Some(a.rows()) {
        trajectory.push((a.rows(), est.theta().to_vec()));
    }
    Ok(AdaptiveFit {
        coefficients: CoefficientVector::new(a.terms().to_vec(), est.theta().to_vec())?,
        trajectory,
        a_priori_errors: errors,
    })
}

/// Dispatches on `config.method`; diagnostics exist only for block LS.
pub fn fit<T: Real>(
    a: &DataMatrix<T>,
    y: &[Complex<T>],
    config: &EstimatorConfig,
) -> Result<(CoefficientVector<T>, Option<LsDiagnostics>)> {
    config.validate()?;
    match config.method {
        EstimatorMethod::BlockLs => {
            let (c, d) = fit_block_ls(a, y, config.ridge_lambda)?;
            Ok((c, Some(d)))
        }
        _ => Ok((fit_adaptive(a, y, config, 0)?.coefficients, None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn terms(k: usize) -> Vec<BasisTerm> {
        (0..k).map(|i| BasisTerm::diagonal(i as i32)).collect()
    }

    fn random_matrix(n: usize, k: usize, seed: u64) -> DataMatrix<f64> {
        let mut rng = Rng::new(seed);
        let data = (0..n * k).map(|_| c(rng.normal(), rng.normal())).collect();
        DataMatrix::from_columns(n, terms(k), data).unwrap()
    }

    fn random_vec(k: usize, seed: u64) -> Vec<C64> {
        let mut rng = Rng::new(seed);
        (0..k).map(|_| c(rng.normal(), rng.normal())).collect()
    }

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn identity_matrix() {
        let a = DataMatrix::from_columns(
            2,
            terms(2),
            vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
        )
        .unwrap();
        let (theta, d) = fit_block_ls(&a, &[c(1., 0.), c(0., 2.)], 0.0).unwrap();
        assert!(rel_err(&theta.values, &[c(1., 0.), c(0., 2.)]) < 1e-15);
        assert!((d.condition_number - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_recovery() {
        let a = random_matrix(500, 6, 1);
        let truth = random_vec(6, 2);
        let y = a.mul_vec(&truth).unwrap();
        let (theta, d) = fit_block_ls(&a, &y, 0.0).unwrap();
        assert!(rel_err(&theta.values, &truth) < 1e-12);
        let py: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / 500.0;
        assert!(d.residual_power <= 1e-16 * py);
    }

    #[test]
    fn residual_is_orthogonal_to_columns() {
        let a = random_matrix(300, 5, 3);
        let y = random_vec(300, 4);
        let (theta, _) = fit_block_ls(&a, &y, 0.0).unwrap();
        let fitted = a.mul_vec(&theta.values).unwrap();
        let resid: Vec<C64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let ah = |v: &[C64]| -> f64 {
            (0..a.cols())
                .map(|j| {
                    a.column(j)
                        .iter()
                        .zip(v)
                        .map(|(x, y)| x.conj() * y)
                        .sum::<C64>()
                        .norm_sqr()
                })
                .sum::<f64>()
                .sqrt()
        };
        assert!(ah(&resid) <= 1e-8 * ah(&y));
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let col: Vec<C64> = random_vec(50, 5);
        let mut data = col.clone();
        data.extend(col.iter().map(|v| v * 2.0));
        let a = DataMatrix::from_columns(50, terms(2), data).unwrap();
        let y = random_vec(50, 6);
        assert!(matches!(
            fit_block_ls(&a, &y, 0.0),
            Err(Error::RankDeficient { column: 1, .. })
        ));
        // explicit ridge resolves it
        let (theta, d) = fit_block_ls(&a, &y, 1e-3).unwrap();
        assert!(theta.values.iter().all(|v| v.re.is_finite()));
        assert!(d.condition_number.is_finite());
    }

    #[test]
    fn dimension_errors() {
        let a = random_matrix(10, 3, 7);
        assert!(fit_block_ls(&a, &random_vec(9, 1), 0.0).is_err());
        let wide = random_matrix(2, 3, 7);
        assert!(fit_block_ls(&wide, &random_vec(2, 1), 0.0).is_err());
        assert!(fit_block_ls(&a, &random_vec(10, 1), -1.0).is_err());
    }

    #[test]
    fn ridge_shrinks_solution() {
        let a = random_matrix(40, 4, 8);
        let y = random_vec(40, 9);
        let mut last = f64::INFINITY;
        for lambda in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let (theta, _) = fit_block_ls(&a, &y, lambda).unwrap();
            assert!(theta.norm() <= last + 1e-12);
            last = theta.norm();
        }
    }

    #[test]
    fn column_permutation_permutes_solution() {
        let a = random_matrix(100, 4, 10);
        let y = random_vec(100, 11);
        let (theta, _) = fit_block_ls(&a, &y, 0.0).unwrap();
        let perm = [2, 0, 3, 1];
        let (permuted, _) = fit_block_ls(&a.permute_columns(&perm).unwrap(), &y, 0.0).unwrap();
        for (j, &p) in perm.iter().enumerate() {
            assert!((permuted.values[j] - theta.values[p]).norm() < 1e-12);
        }
    }

    #[test]
    fn rls_converges_to_block_ls() {
        let a = random_matrix(5000, 3, 12);
        let truth = random_vec(3, 13);
        let y = a.mul_vec(&truth).unwrap();
        let (ls, _) = fit_block_ls(&a, &y, 0.0).unwrap();
        let cfg = EstimatorConfig {
            method: EstimatorMethod::Rls,
            forgetting_factor: 1.0,
            ..Default::default()
        };
        let fit = fit_adaptive(&a, &y, &cfg, 1000).unwrap();
        assert!(rel_err(&fit.coefficients.values, &ls.values) < 1e-6);
        assert_eq!(fit.trajectory.len(), 5);
    }

    #[test]
    fn rls_with_ridge_equals_ridge_ls() {
        let a = random_matrix(200, 3, 14);
        let y = random_vec(200, 15);
        let (ls, _) = fit_block_ls(&a, &y, 5.0).unwrap();
        let cfg = EstimatorConfig {
            method: EstimatorMethod::Rls,
            forgetting_factor: 1.0,
            ridge_lambda: 5.0,
            ..Default::default()
        };
        let fit = fit_adaptive(&a, &y, &cfg, 0).unwrap();
        assert!(rel_err(&fit.coefficients.values, &ls.values) < 1e-9);
    }

    #[test]
    fn lms_zero_step_stays_put() {
        let a = random_matrix(100, 3, 16);
        let y = random_vec(100, 17);
        let cfg = EstimatorConfig {
            method: EstimatorMethod::Lms,
            step_size: Some(0.0),
            ..Default::default()
        };
        let fit = fit_adaptive(&a, &y, &cfg, 10).unwrap();
        assert!(fit.coefficients.values.iter().all(|v| *v == c(0., 0.)));
    }

    #[test]
    fn lms_scalar_geometric_convergence() {
        let n = 50;
        let a = DataMatrix::from_columns(n, terms(1), vec![c(1., 0.); n]).unwrap();
        let target = c(0.7, -0.4);
        let y = vec![target; n];
        let mu = 0.2;
        let cfg = EstimatorConfig {
            method: EstimatorMethod::Lms,
            step_size: Some(mu),
            ..Default::default()
        };
        let fit = fit_adaptive(&a, &y, &cfg, 1).unwrap();
        for (count, theta) in &fit.trajectory {
            let want = target * (1.0 - (1.0 - mu).powi(*count as i32));
            assert!((theta[0] - want).norm() < 1e-14, "n={count}");
        }
    }

    #[test]
    fn lms_divergence_is_detected() {
        let a = random_matrix(200, 3, 18);
        let y = random_vec(200, 19);
        let cfg = EstimatorConfig {
            method: EstimatorMethod::Lms,
            step_size: Some(5.0),
            divergence_bound: 1e3,
            ..Default::default()
        };
        assert!(matches!(
            fit_adaptive(&a, &y, &cfg, 0),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn lms_default_step_reduces_error() {
        let a = random_matrix(20_000, 3, 20);
        let truth = random_vec(3, 21);
        let y = a.mul_vec(&truth).unwrap();
        let cfg = EstimatorConfig {
            method: EstimatorMethod::Lms,
            ..Default::default()
        };
        let fit = fit_adaptive(&a, &y, &cfg, 0).unwrap();
        assert!(rel_err(&fit.coefficients.values, &truth) < 1e-6);
    }

    #[test]
    fn config_validation() {
        let bad = EstimatorConfig {
            forgetting_factor: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = EstimatorConfig {
            ridge_lambda: -1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn coefficient_json_round_trip() {
        let v = CoefficientVector::new(terms(3), random_vec(3, 22)).unwrap();
        let back = CoefficientVector::<f64>::from_json(&v.to_json().unwrap()).unwrap();
        assert_eq!(back, v);
        // bit-exact for many values, not just a lucky few
        let many: Vec<BasisTerm> = (0..500).map(|i| BasisTerm::new(i, i, i)).collect();
        let v = CoefficientVector::new(many, random_vec(500, 23)).unwrap();
        let back = CoefficientVector::<f64>::from_json(&v.to_json().unwrap()).unwrap();
        assert_eq!(back, v);
        assert!(CoefficientVector::<f64>::from_json(r#"{"terms":[[0,0,0]],"values":[]}"#).is_err());
    }

    #[test]
    fn single_precision_fit() {
        let a64 = random_matrix(400, 3, 23);
        let truth = random_vec(3, 24);
        let y64 = a64.mul_vec(&truth).unwrap();
        let to32 = |v: &C64| num_complex::Complex::new(v.re as f32, v.im as f32);
        let data: Vec<_> = (0..3)
            .flat_map(|j| a64.column(j).iter().map(to32).collect::<Vec<_>>())
            .collect();
        let a32 = DataMatrix::from_columns(400, terms(3), data).unwrap();
        let y32: Vec<_> = y64.iter().map(to32).collect();
        let (theta, _) = fit_block_ls(&a32, &y32, 0.0).unwrap();
        for (t, w) in theta.values.iter().zip(&truth) {
            assert!(((t.re as f64 - w.re).powi(2) + (t.im as f64 - w.im).powi(2)).sqrt() < 1e-4);
        }
    }
}
