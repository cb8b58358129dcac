use num_complex::Complex64;

use crate::numerics::{min_norm_lstsq, CMat, CVec, DEFAULT_SVD_CUTOFF};

pub const AR_ORDER: usize = 5;

/// Sample-and-hold: the latest snapshot, whatever the horizon.
pub fn sh_predict(past: &[CVec]) -> CVec {
    past.last().expect("non-empty window").clone()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArPrediction {
    pub value: CVec,
    /// Antennas whose fit was degenerate and fell back to sample-and-hold.
    pub fallback: Vec<usize>,
}

impl ArPrediction {
    pub fn used_fallback(&self) -> bool {
        !self.fallback.is_empty()
    }
}

/// Per-antenna complex AR(`order`) fitted by minimum-norm least squares on
/// the window, then run forward `horizon` steps.
///
/// An antenna whose regression has rank zero, or whose forecast is not
/// finite, keeps its last sample instead.
pub fn ar_predict(past: &[CVec], horizon: usize, order: usize) -> ArPrediction {
    let k = past.len();
    assert!(order >= 1 && k > order, "AR({order}) needs more than {order} samples, got {k}");
    let n_b = past[0].len();
    let rows = k - order;
    let mut value = CVec::zeros(n_b);
    let mut fallback = Vec::new();
    let mut a = vec![Complex64::default(); rows * order];
    let mut y = vec![Complex64::default(); rows];
    let mut series = Vec::with_capacity(k + horizon);
    for b in 0..n_b {
        series.clear();
        series.extend(past.iter().map(|h| h[b]));
        for r in 0..rows {
            let t = r + order;
            for i in 0..order {
                a[r * order + i] = series[t - 1 - i];
            }
            y[r] = series[t];
        }
        let mat = CMat::from_row_major(rows, order, a.clone()).expect("consistent shape");
        let coef = match min_norm_lstsq(&mat, &y, DEFAULT_SVD_CUTOFF) {
            Ok(sol) if sol.rank > 0 => Some(sol.x),
            _ => None,
        };
        let forecast = coef.and_then(|c| {
            for _ in 0..horizon {
                let n = series.len();
                let next: Complex64 = (0..order).map(|i| c[i] * series[n - 1 - i]).sum();
                series.push(next);
            }
            let v = *series.last().unwrap();
            (v.re.is_finite() && v.im.is_finite()).then_some(v)
        });
        match forecast {
            Some(v) => value[b] = v,
            None => {
                value[b] = past[k - 1][b];
                fallback.push(b);
            }
        }
    }
    ArPrediction { value, fallback }
}

/// First-order differences `x_{t+1} − x_t` of a sequence of equal-length
/// vectors.
pub fn difference_preprocess(seq: &[Vec<f64>]) -> Vec<Vec<f64>> {
    seq.windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
        .collect()
}
