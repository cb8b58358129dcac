use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{cosine_loss, nmse_loss, zf_beamform, AdjusterMode, LossEval, LpcNet, ModelKind, PredictorError};
use crate::channel::{Dataset, WindowRef};
use crate::nn::{AdamConfig, AdamState, NnError, ParamStore, Real};
use crate::numerics::{complex_to_real, CVec, SeededRng};

/// Windows per forward pass outside training.
const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean training loss over each epoch, accumulated during the epoch.
    pub epoch_loss: Vec<f64>,
    /// Loss over the training windows before the first update.
    pub initial_loss: f64,
    /// Loss over the training windows with the final parameters.
    pub final_loss: f64,
    pub steps: usize,
}

/// Per-window random phase per antenna and a common Doppler ramp. Both map
/// a channel trajectory onto another one the simulator could have produced.
struct Augment {
    doppler: f64,
    antenna: Vec<Complex64>,
}

impl Augment {
    fn draw(rng: &mut SeededRng, n_b: usize, max_doppler: f64) -> Self {
        let doppler = if max_doppler > 0.0 { rng.random_range(-max_doppler..max_doppler) } else { 0.0 };
        let antenna = (0..n_b).map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..TAU))).collect();
        Self { doppler, antenna }
    }

    /// Transformed past and target of window `r`.
    fn window(&self, ds: &Dataset, r: WindowRef) -> (Vec<CVec>, CVec) {
        let w = ds.window(r);
        let apply = |h: &CVec, t: usize| {
            let ramp = Complex64::from_polar(1.0, self.doppler * t as f64);
            CVec::new(h.iter().zip(&self.antenna).map(|(z, a)| z * a * ramp).collect())
        };
        let past = w.past.iter().enumerate().map(|(i, h)| apply(h, i)).collect();
        (past, apply(w.target, ds.k - 1 + r.horizon))
    }
}

enum Target<T> {
    Csi(Array2<T>),
    Beam(Vec<CVec>),
}

fn batch_io<T: Real>(
    kind: ModelKind,
    net: &LpcNet,
    ds: &Dataset,
    refs: &[WindowRef],
    aug: Option<&[Augment]>,
) -> Result<(super::Features<T>, Target<T>), PredictorError> {
    let windows: Vec<_> = refs.iter().map(|&r| ds.window(r)).collect();
    let rotated: Option<Vec<(Vec<CVec>, CVec)>> =
        aug.map(|aug| refs.iter().zip(aug).map(|(&r, a)| a.window(ds, r)).collect());
    let (past, targets): (Vec<&[CVec]>, Vec<&CVec>) = match &rotated {
        Some(v) => v.iter().map(|(p, t)| (&p[..], t)).unzip(),
        None => windows.iter().map(|w| (w.past, w.target)).unzip(),
    };
    let f = net.features(&past)?;
    let target = if kind.predicts_beam() {
        Target::Beam(targets.iter().map(|t| zf_beamform(t, 1.0)).collect::<Result<_, _>>()?)
    } else {
        let n = 2 * net.config().n_b;
        let mut t = Array2::zeros((refs.len(), n));
        for (b, w) in targets.iter().enumerate() {
            for (dst, v) in t.row_mut(b).iter_mut().zip(complex_to_real(w)) {
                *dst = T::of(v);
            }
        }
        Target::Csi(t)
    };
    Ok((f, target))
}

fn loss_of<T: Real>(out: &Array2<T>, target: &Target<T>) -> Result<LossEval<T>, PredictorError> {
    match target {
        Target::Csi(t) => nmse_loss(out, t),
        Target::Beam(w) => cosine_loss(out, w),
    }
}

fn check_refs(kind: ModelKind, net: &LpcNet, refs: &[WindowRef]) -> Result<(), PredictorError> {
    if !kind.is_neural() {
        return Err(PredictorError::InvalidConfig(format!("{kind} has no trainable parameters")));
    }
    if refs.is_empty() {
        return Err(PredictorError::InvalidConfig("no windows".into()));
    }
    let h = net.config().horizon;
    if let Some(r) = refs.iter().find(|r| r.horizon != h) {
        return Err(PredictorError::InvalidConfig(format!(
            "window horizon {} differs from model horizon {h}",
            r.horizon
        )));
    }
    Ok(())
}

/// Mean per-window loss of the model over `refs`: NMSE for CSI predictors,
/// negative cosine similarity for the beam predictor.
pub fn evaluate_loss<T: Real>(
    kind: ModelKind,
    net: &LpcNet,
    store: &ParamStore<T>,
    ds: &Dataset,
    refs: &[WindowRef],
) -> Result<f64, PredictorError> {
    check_refs(kind, net, refs)?;
    let p = store.view();
    let chunks = refs
        .par_chunks(EVAL_CHUNK)
        .map(|chunk| {
            let (f, target) = batch_io::<T>(kind, net, ds, chunk, None)?;
            let (out, _) = net.forward(&p, f, AdjusterMode::Learned)?;
            Ok(loss_of(&out, &target)?.per_sample)
        })
        .collect::<Result<Vec<_>, PredictorError>>()?;
    let total: f64 = chunks.iter().flatten().sum();
    Ok(total / refs.len() as f64)
}

/// Predictions for `refs`, in order.
pub fn predict_windows<T: Real>(
    net: &LpcNet,
    store: &ParamStore<T>,
    ds: &Dataset,
    refs: &[WindowRef],
) -> Result<Vec<CVec>, PredictorError> {
    let chunks = refs
        .par_chunks(EVAL_CHUNK)
        .map(|chunk| {
            let past: Vec<&[CVec]> = chunk.iter().map(|&r| ds.window(r).past).collect();
            net.predict(store, &past)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Mini-batch ADAM over shuffled windows for `cfg.epochs` epochs.
///
/// The shuffle draws from `rng`; with a fixed seed the run is deterministic.
pub fn train<T: Real>(
    kind: ModelKind,
    net: &LpcNet,
    store: &mut ParamStore<T>,
    ds: &Dataset,
    refs: &[WindowRef],
    rng: &mut SeededRng,
) -> Result<TrainReport, PredictorError> {
    check_refs(kind, net, refs)?;
    let cfg = net.config().clone();
    let initial_loss = evaluate_loss(kind, net, store, ds, refs)?;
    let mut adam = AdamState::<T>::new(AdamConfig::with_lr(cfg.lr), store.total_count());
    let mut order: Vec<usize> = (0..refs.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut steps = 0;
    for epoch in 0..cfg.epochs {
        order.shuffle(rng);
        let mut sum = 0.0;
        for (batch, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let diverged = |store: &ParamStore<T>| PredictorError::NonFiniteLoss {
                epoch,
                batch,
                param_norm: store.l2_norm(),
            };
            let batch_refs: Vec<WindowRef> = chunk.iter().map(|&i| refs[i]).collect();
            let aug: Option<Vec<Augment>> = cfg
                .augment
                .then(|| batch_refs.iter().map(|_| Augment::draw(rng, ds.n_b(), cfg.augment_doppler)).collect());
            let (f, target) = batch_io::<T>(kind, net, ds, &batch_refs, aug.as_deref())?;
            let (out, tape) = match net.forward(&store.view(), f, AdjusterMode::Learned) {
                Ok(v) => v,
                Err(PredictorError::Nn(NnError::NonFinite(_))) => return Err(diverged(store)),
                Err(e) => return Err(e),
            };
            let loss = loss_of(&out, &target)?;
            let batch_sum: f64 = loss.per_sample.iter().sum();
            if !batch_sum.is_finite() {
                return Err(diverged(store));
            }
            sum += batch_sum;
            store.zero_grads();
            {
                let (p, mut g) = store.split_mut();
                net.backward(&p, &mut g, &tape, &loss.grad);
            }
            match adam.update(store) {
                Ok(()) => {}
                Err(NnError::NonFinite(_)) => return Err(diverged(store)),
                Err(e) => return Err(e.into()),
            }
            steps += 1;
        }
        epoch_loss.push(sum / refs.len() as f64);
    }
    let final_loss = evaluate_loss(kind, net, store, ds, refs)?;
    Ok(TrainReport {
        epoch_loss,
        initial_loss,
        final_loss,
        steps,
    })
}
