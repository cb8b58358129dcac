use ndarray::Array2;
use num_complex::Complex64;

use super::PredictorError;
use crate::nn::Real;
use crate::numerics::CVec;

/// Per-sample losses of a batch and the gradient of their mean with respect
/// to the network output.
#[derive(Debug, Clone)]
pub struct LossEval<T> {
    pub per_sample: Vec<f64>,
    pub grad: Array2<T>,
}

impl<T> LossEval<T> {
    pub fn mean(&self) -> f64 {
        self.per_sample.iter().sum::<f64>() / self.per_sample.len() as f64
    }
}

/// Single-user zero-forcing beam `√P · conj(h)/‖h‖`.
pub fn zf_beamform(h: &[Complex64], power: f64) -> Result<CVec, PredictorError> {
    if !(power > 0.0) {
        return Err(PredictorError::InvalidConfig(format!("beam power must be positive, got {power}")));
    }
    let norm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(PredictorError::ZeroChannel);
    }
    let s = power.sqrt() / norm;
    Ok(h.iter().map(|z| z.conj() * s).collect())
}

/// Mean over the batch of `‖ŷ − y‖² / ‖y‖²`, on real-layout rows.
pub fn nmse_loss<T: Real>(pred: &Array2<T>, target: &Array2<T>) -> Result<LossEval<T>, PredictorError> {
    if pred.dim() != target.dim() {
        return Err(PredictorError::Shape(format!("prediction {:?} vs target {:?}", pred.dim(), target.dim())));
    }
    let batch = pred.nrows();
    let mut per_sample = Vec::with_capacity(batch);
    let mut grad = Array2::zeros(pred.raw_dim());
    for b in 0..batch {
        let (p, y) = (pred.row(b), target.row(b));
        let denom: f64 = y.iter().map(|v| v.to_f64_lossless().powi(2)).sum();
        if denom == 0.0 {
            return Err(PredictorError::ZeroChannel);
        }
        let err: f64 = p
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a.to_f64_lossless() - b.to_f64_lossless()).powi(2))
            .sum();
        per_sample.push(err / denom);
        let scale = 2.0 / denom / batch as f64;
        for (g, (a, y)) in grad.row_mut(b).iter_mut().zip(p.iter().zip(y.iter())) {
            *g = T::of((a.to_f64_lossless() - y.to_f64_lossless()) * scale);
        }
    }
    Ok(LossEval { per_sample, grad })
}

/// Mean over the batch of `−|ŵᴴw| / (‖ŵ‖·‖w‖)`, with `ŵ` the real-layout
/// rows of `pred` and `w` the target beams.
pub fn cosine_loss<T: Real>(pred: &Array2<T>, target: &[CVec]) -> Result<LossEval<T>, PredictorError> {
    let batch = pred.nrows();
    if target.len() != batch {
        return Err(PredictorError::Shape(format!("{} predictions, {} targets", batch, target.len())));
    }
    let mut per_sample = Vec::with_capacity(batch);
    let mut grad = Array2::zeros(pred.raw_dim());
    for (b, w) in target.iter().enumerate() {
        let n = w.len();
        if pred.ncols() != 2 * n {
            return Err(PredictorError::Shape(format!("prediction width {} vs beam length {n}", pred.ncols())));
        }
        let row = pred.row(b);
        let a: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(row[i].to_f64_lossless(), row[n + i].to_f64_lossless()))
            .collect();
        let na = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nw = w.norm();
        if na == 0.0 {
            return Err(PredictorError::DegenerateDirection);
        }
        if nw == 0.0 {
            return Err(PredictorError::ZeroChannel);
        }
        let s: Complex64 = a.iter().zip(w.iter()).map(|(x, y)| x.conj() * y).sum();
        let abs_s = s.norm();
        per_sample.push(-abs_s / (na * nw));
        let scale = -1.0 / batch as f64;
        let mut g = grad.row_mut(b);
        for i in 0..n {
            let cw = s.conj() * w[i];
            let (d_re, d_im) = if abs_s > 0.0 { (cw.re / abs_s, cw.im / abs_s) } else { (0.0, 0.0) };
            let tail = abs_s / (na * na * na * nw);
            g[i] = T::of(scale * (d_re / (na * nw) - tail * a[i].re));
            g[n + i] = T::of(scale * (d_im / (na * nw) - tail * a[i].im));
        }
    }
    Ok(LossEval { per_sample, grad })
}
