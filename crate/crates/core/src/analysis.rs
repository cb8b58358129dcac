//! Prediction metrics, the augmented Dickey–Fuller unit-root test and report
//! records.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::numerics::CVec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("zero reference vector")]
    ZeroVector,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("series of length {len} is too short, need at least {need}")]
    TooShort { len: usize, need: usize },
    #[error("singular regression matrix")]
    Singular,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// `‖pred − truth‖² / ‖truth‖²`.
pub fn nmse(pred: &[Complex64], truth: &[Complex64]) -> Result<f64, AnalysisError> {
    if pred.len() != truth.len() {
        return Err(AnalysisError::LengthMismatch(pred.len(), truth.len()));
    }
    let denom: f64 = truth.iter().map(|z| z.norm_sqr()).sum();
    if denom == 0.0 {
        return Err(AnalysisError::ZeroVector);
    }
    let err: f64 = pred.iter().zip(truth).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok(err / denom)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// `|aᴴb| / (‖a‖·‖b‖)`, in `[0, 1]`.
pub fn cosine_similarity(a: &[Complex64], b: &[Complex64]) -> Result<f64, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch(a.len(), b.len()));
    }
    let na = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(AnalysisError::ZeroVector);
    }
    let s: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    Ok((s.norm() / (na * nb)).min(1.0))
}

/// `log₂(1 + |hᵀw|² / σ²)` in bit/s/Hz.
pub fn achievable_se(h: &[Complex64], w: &[Complex64], noise_var: f64) -> Result<f64, AnalysisError> {
    if h.len() != w.len() {
        return Err(AnalysisError::LengthMismatch(h.len(), w.len()));
    }
    if !(noise_var > 0.0) {
        return Err(AnalysisError::InvalidArgument(format!("noise variance must be positive, got {noise_var}")));
    }
    let g: Complex64 = h.iter().zip(w).map(|(a, b)| a * b).sum();
    Ok((1.0 + g.norm_sqr() / noise_var).log2())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfResult {
    pub t_stat: f64,
    pub p_value: f64,
    pub lags: usize,
    /// Observations in the regression.
    pub n_obs: usize,
}

/// Schwert's rule `⌊12·(T/100)^{1/4}⌋`.
pub fn schwert_lags(len: usize) -> usize {
    (12.0 * (len as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Shortest series [`adf_test`] accepts for `lags`.
pub fn adf_min_len(lags: usize) -> usize {
    lags + 10
}

/// ADF regression `Δy_t = α + γ·y_{t−1} + Σ β_i·Δy_{t−i} + ε` with a constant
/// and no trend; reports the t-statistic of `γ` and its asymptotic p-value.
pub fn adf_test(series: &[f64], lags: usize) -> Result<AdfResult, AnalysisError> {
    let need = adf_min_len(lags);
    if series.len() < need {
        return Err(AnalysisError::TooShort { len: series.len(), need });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidArgument("non-finite sample".into()));
    }
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let n_obs = dy.len() - lags;
    let p = 2 + lags;
    let x = DMatrix::from_fn(n_obs, p, |r, c| {
        let t = r + lags;
        match c {
            0 => 1.0,
            1 => series[t],
            i => dy[t - (i - 1)],
        }
    });
    let y = DVector::from_fn(n_obs, |r, _| dy[r + lags]);
    let svd = x.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    if svd.singular_values.iter().any(|&s| s <= s_max * 1e-10) {
        return Err(AnalysisError::Singular);
    }
    let beta = svd.solve(&y, 0.0).map_err(|_| AnalysisError::Singular)?;
    let resid = &y - &x * &beta;
    let dof = n_obs.checked_sub(p).filter(|&d| d > 0).ok_or(AnalysisError::TooShort { len: series.len(), need })?;
    let s2 = resid.norm_squared() / dof as f64;
    // Var(β̂) = s²·V Σ⁻² Vᵀ; only the γ entry is needed.
    let v_t = svd.v_t.as_ref().expect("requested");
    let var_gamma: f64 = (0..p).map(|k| (v_t[(k, 1)] / svd.singular_values[k]).powi(2)).sum::<f64>() * s2;
    if !(var_gamma > 0.0) {
        return Err(AnalysisError::Singular);
    }
    let t_stat = beta[1] / var_gamma.sqrt();
    Ok(AdfResult {
        t_stat,
        p_value: mackinnon_p(t_stat),
        lags,
        n_obs,
    })
}

/// MacKinnon (1994) response surface for the constant-only Dickey–Fuller
/// distribution with one series.
pub fn mackinnon_p(t: f64) -> f64 {
    const TAU_MAX: f64 = 2.74;
    const TAU_MIN: f64 = -18.83;
    const TAU_STAR: f64 = -1.61;
    const SMALL_P: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
    const LARGE_P: [f64; 4] = [1.7339, 0.93202, -0.12745, -1.0368e-2];
    if t.is_nan() {
        return f64::NAN;
    }
    if t > TAU_MAX {
        return 1.0;
    }
    if t < TAU_MIN {
        return 0.0;
    }
    let coef: &[f64] = if t <= TAU_STAR { &SMALL_P } else { &LARGE_P };
    let z = coef.iter().rev().fold(0.0, |acc, c| acc * t + c);
    Normal::standard().cdf(z)
}

/// Sorted ADF p-values of sliding segments of the real part of antenna 0.
///
/// Segments whose regression is singular are skipped.
pub fn pvalue_cdf(
    trajectories: &[&[CVec]],
    segment_len: usize,
    stride: usize,
    lags: usize,
) -> Result<Vec<f64>, AnalysisError> {
    if stride == 0 {
        return Err(AnalysisError::InvalidArgument("stride must be positive".into()));
    }
    if segment_len < adf_min_len(lags) {
        return Err(AnalysisError::TooShort { len: segment_len, need: adf_min_len(lags) });
    }
    if let Some(t) = trajectories.iter().find(|t| t.len() < segment_len) {
        return Err(AnalysisError::TooShort { len: t.len(), need: segment_len });
    }
    let per_traj: Vec<Vec<f64>> = trajectories
        .par_iter()
        .map(|traj| {
            let series: Vec<f64> = traj.iter().map(|h| h[0].re).collect();
            (0..=series.len() - segment_len)
                .step_by(stride)
                .filter_map(|s| adf_test(&series[s..s + segment_len], lags).ok())
                .map(|r| r.p_value)
                .collect()
        })
        .collect();
    let mut p: Vec<f64> = per_traj.into_iter().flatten().collect();
    p.sort_by(f64::total_cmp);
    Ok(p)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Aggregate metrics of one method on one evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub scenario: String,
    pub speeds_kmh: Vec<f64>,
    pub horizon_ms: f64,
    pub method: String,
    /// Mean per-window NMSE; `None` for beam predictors.
    pub nmse: Option<f64>,
    /// Mean cosine similarity between the predicted beam and the ZF beam of
    /// the true channel, in percent.
    pub cosine_pct: f64,
    pub n: usize,
    pub seeds: Vec<u64>,
}

impl MetricsReport {
    pub fn nmse_db(&self) -> Option<f64> {
        self.nmse.map(to_db)
    }
}

/// Mean NMSE and mean ZF-beam cosine similarity of CSI predictions.
///
/// The ZF beam is `conj(h)/‖h‖`, so the cosine between the beams of `ĥ`
/// and `h` equals the cosine between `ĥ` and `h`.
pub fn csi_metrics(preds: &[CVec], truths: &[&CVec]) -> Result<(f64, f64), AnalysisError> {
    if preds.len() != truths.len() {
        return Err(AnalysisError::LengthMismatch(preds.len(), truths.len()));
    }
    if preds.is_empty() {
        return Err(AnalysisError::InvalidArgument("no samples".into()));
    }
    let mut e = 0.0;
    let mut c = 0.0;
    for (p, t) in preds.iter().zip(truths) {
        e += nmse(p, t)?;
        c += cosine_similarity(p, t).unwrap_or(0.0);
    }
    let n = preds.len() as f64;
    Ok((e / n, 100.0 * c / n))
}

/// Mean cosine similarity in percent between predicted beams and the ZF
/// beams `conj(h)` of the true channels.
pub fn beam_metrics(beams: &[CVec], truths: &[&CVec]) -> Result<f64, AnalysisError> {
    if beams.len() != truths.len() {
        return Err(AnalysisError::LengthMismatch(beams.len(), truths.len()));
    }
    if beams.is_empty() {
        return Err(AnalysisError::InvalidArgument("no samples".into()));
    }
    let mut c = 0.0;
    for (w, t) in beams.iter().zip(truths) {
        c += cosine_similarity(w, &t.conj()).unwrap_or(0.0);
    }
    Ok(100.0 * c / beams.len() as f64)
}
