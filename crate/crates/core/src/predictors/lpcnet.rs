use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use super::{LpcnetConfig, PredictorError};
use crate::nn::{init_params, GradsMut, Lstm, LstmTape, Mlp2, Mlp2Tape, NnError, ParamId, ParamInit, ParamStore, Real, Values};
use crate::numerics::{complex_to_real, real_to_complex, CVec};

/// Network inputs for a batch of windows.
#[derive(Debug, Clone)]
pub struct Features<T> {
    /// LSTM input per time step, each `batch × 2N_b`.
    pub seq: Vec<Array2<T>>,
    /// Per-coordinate histories `x_k`, one row per (window, coordinate):
    /// `(batch·2N_b) × N_i`.
    pub history: Array2<T>,
    /// Last observed snapshot in real layout, `batch × 2N_b`.
    pub last: Array2<T>,
}

impl<T> Features<T> {
    pub fn batch(&self) -> usize {
        self.last.nrows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjusterMode {
    /// Adjustments produced by the two MLPs.
    Learned,
    /// `Wᵃ` and `bᵃ` forced to all-ones.
    Identity,
}

#[derive(Debug, Clone)]
pub struct LpcTape<T> {
    lstm: LstmTape<T>,
    z: Array2<T>,
    wa: Option<Array2<T>>,
    ba: Option<Array1<T>>,
    mlps: Option<(Mlp2Tape<T>, Mlp2Tape<T>)>,
}

impl<T> LpcTape<T> {
    /// Final LSTM hidden state, `batch × N_z`.
    pub fn hidden(&self) -> &Array2<T> {
        &self.z
    }

    pub fn weight_adjustment(&self) -> Option<&Array2<T>> {
        self.wa.as_ref()
    }

    pub fn bias_adjustment(&self) -> Option<&Array1<T>> {
        self.ba.as_ref()
    }
}

/// Readout `out[b,k] = Σ_j (Wᵃ[b,k,j]·W[k,j])·z[b,j] + bᵃ[b,k]·bias[k]`.
///
/// `wa` has one row per (window, output) pair, `ba` one entry per pair;
/// `None` stands for all-ones. Both cases share one summation order, so an
/// all-ones adjustment reproduces the static readout bit for bit.
pub fn dynamic_linear<T: Real>(
    w: ArrayView2<'_, T>,
    bias: ArrayView1<'_, T>,
    wa: Option<ArrayView2<'_, T>>,
    ba: Option<ArrayView1<'_, T>>,
    z: ArrayView2<'_, T>,
) -> Array2<T> {
    let (n_out, n_z) = w.dim();
    let batch = z.nrows();
    let w = w.as_standard_layout();
    let z = z.as_standard_layout();
    let wa_in = wa;
    let wa = wa_in.as_ref().map(|a| a.as_standard_layout());
    let w_s = w.as_slice().expect("standard layout");
    let z_s = z.as_slice().expect("standard layout");
    let mut out = Array2::zeros((batch, n_out));
    for bi in 0..batch {
        let zr = &z_s[bi * n_z..(bi + 1) * n_z];
        for k in 0..n_out {
            let wr = &w_s[k * n_z..(k + 1) * n_z];
            let row = bi * n_out + k;
            let mut acc = T::zero();
            match &wa {
                Some(a) => {
                    let ar = &a.as_slice().expect("standard layout")[row * n_z..(row + 1) * n_z];
                    for j in 0..n_z {
                        acc += (ar[j] * wr[j]) * zr[j];
                    }
                }
                None => {
                    for j in 0..n_z {
                        acc += wr[j] * zr[j];
                    }
                }
            }
            let b = match &ba {
                Some(ba) => ba[row] * bias[k],
                None => bias[k],
            };
            out[(bi, k)] = acc + b;
        }
    }
    out
}

/// Gradients of [`dynamic_linear`] for an upstream gradient `d_out`.
#[derive(Debug, Clone)]
pub struct LinearGrads<T> {
    pub w: Array2<T>,
    pub bias: Array1<T>,
    pub wa: Option<Array2<T>>,
    pub ba: Option<Array1<T>>,
    pub z: Array2<T>,
}

pub fn dynamic_linear_backward<T: Real>(
    w: ArrayView2<'_, T>,
    bias: ArrayView1<'_, T>,
    wa: Option<ArrayView2<'_, T>>,
    ba: Option<ArrayView1<'_, T>>,
    z: ArrayView2<'_, T>,
    d_out: ArrayView2<'_, T>,
) -> LinearGrads<T> {
    let (n_out, n_z) = w.dim();
    let batch = z.nrows();
    let w = w.as_standard_layout();
    let z = z.as_standard_layout();
    let wa_std = wa.as_ref().map(|a| a.as_standard_layout());
    let w_s = w.as_slice().expect("standard layout");
    let z_s = z.as_slice().expect("standard layout");
    let mut g = LinearGrads {
        w: Array2::zeros((n_out, n_z)),
        bias: Array1::zeros(n_out),
        wa: wa_std.as_ref().map(|_| Array2::zeros((batch * n_out, n_z))),
        ba: ba.map(|_| Array1::zeros(batch * n_out)),
        z: Array2::zeros((batch, n_z)),
    };
    {
        let gw = g.w.as_slice_mut().expect("fresh array");
        let gz = g.z.as_slice_mut().expect("fresh array");
        for bi in 0..batch {
            let zr = &z_s[bi * n_z..(bi + 1) * n_z];
            for k in 0..n_out {
                let d = d_out[(bi, k)];
                let row = bi * n_out + k;
                let wr = &w_s[k * n_z..(k + 1) * n_z];
                let gwr = &mut gw[k * n_z..(k + 1) * n_z];
                let gzr = &mut gz[bi * n_z..(bi + 1) * n_z];
                match (&wa_std, g.wa.as_mut()) {
                    (Some(a), Some(ga)) => {
                        let ar = &a.as_slice().expect("standard layout")[row * n_z..(row + 1) * n_z];
                        let gar = &mut ga.as_slice_mut().expect("fresh array")[row * n_z..(row + 1) * n_z];
                        for j in 0..n_z {
                            gwr[j] += d * ar[j] * zr[j];
                            gar[j] = d * wr[j] * zr[j];
                            gzr[j] += d * ar[j] * wr[j];
                        }
                    }
                    _ => {
                        for j in 0..n_z {
                            gwr[j] += d * zr[j];
                            gzr[j] += d * wr[j];
                        }
                    }
                }
                match (&ba, g.ba.as_mut()) {
                    (Some(ba), Some(gba)) => {
                        g.bias[k] += d * ba[row];
                        gba[row] = d * bias[k];
                    }
                    _ => g.bias[k] += d,
                }
            }
        }
    }
    g
}

/// The recurrent predictor family: LSTM encoder, readout, optional
/// hypernetwork adjusters, optional differencing and residual.
#[derive(Debug, Clone)]
pub struct LpcNet {
    cfg: LpcnetConfig,
    lstm: Lstm,
    w: ParamId,
    b: ParamId,
    adjusters: Option<(Mlp2, Mlp2)>,
}

impl LpcNet {
    /// Parameter layout: `lstm.*`, `readout.w [2N_b, N_z]`, `readout.b [2N_b]`
    /// and, with the adjuster, `adj_w.*` (`N_i → N_w → N_z`) and `adj_b.*`
    /// (`N_i → N_s → 1`) initialized near the identity.
    pub fn param_inits(cfg: &LpcnetConfig) -> Vec<ParamInit> {
        let n_out = 2 * cfg.n_b;
        let mut v = Lstm::param_inits("lstm", n_out, cfg.n_z);
        v.push(ParamInit::weight("readout.w", n_out, cfg.n_z));
        v.push(ParamInit::bias("readout.b", n_out));
        if cfg.enable_adjuster {
            v.extend(Mlp2::near_identity_inits("adj_w", cfg.n_i(), cfg.n_w, cfg.n_z, cfg.adjuster_init_scale));
            v.extend(Mlp2::near_identity_inits("adj_b", cfg.n_i(), cfg.n_s, 1, cfg.adjuster_init_scale));
        }
        v
    }

    pub fn init<T: Real, R: Rng + ?Sized>(cfg: &LpcnetConfig, rng: &mut R) -> Result<(Self, ParamStore<T>), PredictorError> {
        cfg.validate()?;
        let store = init_params(&Self::param_inits(cfg), rng)?;
        let net = Self::bind(cfg, &store)?;
        Ok((net, store))
    }

    pub fn bind<T: Real>(cfg: &LpcnetConfig, store: &ParamStore<T>) -> Result<Self, PredictorError> {
        cfg.validate()?;
        let n_out = 2 * cfg.n_b;
        let lstm = Lstm::bind(store, "lstm")?;
        let shape_err = |what: &str, expected: Vec<usize>, got: Vec<usize>| {
            PredictorError::Nn(NnError::ShapeMismatch {
                what: what.into(),
                expected,
                got,
            })
        };
        if lstm.input != n_out || lstm.hidden != cfg.n_z {
            return Err(shape_err("lstm", vec![n_out, cfg.n_z], vec![lstm.input, lstm.hidden]));
        }
        let w = store.id("readout.w")?;
        let b = store.id("readout.b")?;
        if store.spec(w).shape != [n_out, cfg.n_z] || store.spec(b).shape != [n_out] {
            return Err(shape_err("readout", vec![n_out, cfg.n_z], store.spec(w).shape.clone()));
        }
        let adjusters = if cfg.enable_adjuster {
            let aw = Mlp2::bind(store, "adj_w")?;
            let ab = Mlp2::bind(store, "adj_b")?;
            if (aw.input, aw.hidden, aw.output) != (cfg.n_i(), cfg.n_w, cfg.n_z) {
                return Err(shape_err("adj_w", vec![cfg.n_i(), cfg.n_w, cfg.n_z], vec![aw.input, aw.hidden, aw.output]));
            }
            if (ab.input, ab.hidden, ab.output) != (cfg.n_i(), cfg.n_s, 1) {
                return Err(shape_err("adj_b", vec![cfg.n_i(), cfg.n_s, 1], vec![ab.input, ab.hidden, ab.output]));
            }
            Some((aw, ab))
        } else {
            None
        };
        if store.total_count() != cfg.param_count() {
            return Err(PredictorError::InvalidConfig(format!(
                "store holds {} parameters, configuration needs {}",
                store.total_count(),
                cfg.param_count()
            )));
        }
        Ok(Self {
            cfg: cfg.clone(),
            lstm,
            w,
            b,
            adjusters,
        })
    }

    pub fn config(&self) -> &LpcnetConfig {
        &self.cfg
    }

    /// Converts windows of `K` complex snapshots into network inputs.
    pub fn features<T: Real>(&self, windows: &[&[CVec]]) -> Result<Features<T>, PredictorError> {
        let cfg = &self.cfg;
        let n = 2 * cfg.n_b;
        let s_len = cfg.n_i();
        let batch = windows.len();
        let mut seq = vec![Array2::<T>::zeros((batch, n)); s_len];
        let mut history = Array2::<T>::zeros((batch * n, s_len));
        let mut last = Array2::<T>::zeros((batch, n));
        for (bi, win) in windows.iter().enumerate() {
            if win.len() != cfg.k {
                return Err(PredictorError::Shape(format!("window of {} snapshots, K = {}", win.len(), cfg.k)));
            }
            let real: Vec<Vec<f64>> = win
                .iter()
                .map(|h| {
                    if h.len() == cfg.n_b {
                        Ok(complex_to_real(h))
                    } else {
                        Err(PredictorError::Shape(format!("snapshot of {} antennas, N_b = {}", h.len(), cfg.n_b)))
                    }
                })
                .collect::<Result<_, _>>()?;
            for t in 0..s_len {
                for k in 0..n {
                    let v = if cfg.enable_diff { real[t + 1][k] - real[t][k] } else { real[t][k] };
                    let v = T::of(v);
                    seq[t][(bi, k)] = v;
                    history[(bi * n + k, t)] = v;
                }
            }
            for k in 0..n {
                last[(bi, k)] = T::of(real[cfg.k - 1][k]);
            }
        }
        Ok(Features { seq, history, last })
    }

    /// Batched forward pass; returns outputs in real layout, `batch × 2N_b`.
    pub fn forward<T: Real>(
        &self,
        p: &Values<'_, T>,
        f: Features<T>,
        mode: AdjusterMode,
    ) -> Result<(Array2<T>, LpcTape<T>), PredictorError> {
        let batch = f.batch();
        let n = 2 * self.cfg.n_b;
        let (z, lstm_tape) = self.lstm.forward_seq(p, f.seq)?;
        let (wa, ba, mlps) = match (self.adjusters, mode) {
            (Some((aw, ab)), AdjusterMode::Learned) => {
                let (wa, tw) = aw.forward(p, f.history.clone())?;
                let (ba, tb) = ab.forward(p, f.history)?;
                let ba = ba.into_shape_with_order(batch * n).expect("single output column");
                (Some(wa), Some(ba), Some((tw, tb)))
            }
            (Some(_), AdjusterMode::Identity) => (
                Some(Array2::ones((batch * n, self.cfg.n_z))),
                Some(Array1::ones(batch * n)),
                None,
            ),
            (None, _) => (None, None, None),
        };
        let mut out = dynamic_linear(
            p.mat(self.w),
            p.vec(self.b),
            wa.as_ref().map(|a| a.view()),
            ba.as_ref().map(|a| a.view()),
            z.view(),
        );
        if self.cfg.enable_residual {
            out += &f.last;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(NnError::NonFinite("network output".into()).into());
        }
        Ok((
            out,
            LpcTape {
                lstm: lstm_tape,
                z,
                wa,
                ba,
                mlps,
            },
        ))
    }

    /// Accumulates parameter gradients for upstream gradient `d_out`.
    pub fn backward<T: Real>(&self, p: &Values<'_, T>, g: &mut GradsMut<'_, T>, tape: &LpcTape<T>, d_out: &Array2<T>) {
        let lg = dynamic_linear_backward(
            p.mat(self.w),
            p.vec(self.b),
            tape.wa.as_ref().map(|a| a.view()),
            tape.ba.as_ref().map(|a| a.view()),
            tape.z.view(),
            d_out.view(),
        );
        let mut gw = g.mat(self.w);
        gw += &lg.w;
        let mut gb = g.vec(self.b);
        gb += &lg.bias;
        if let (Some((aw, ab)), Some((tw, tb))) = (self.adjusters, tape.mlps.as_ref()) {
            let dwa = lg.wa.expect("adjuster gradient");
            let dba = lg.ba.expect("adjuster gradient");
            aw.backward(p, g, tw, &dwa);
            let n = dba.len();
            ab.backward(p, g, tb, &dba.into_shape_with_order((n, 1)).expect("column"));
        }
        self.lstm.backward_seq(p, g, &tape.lstm, &lg.z);
    }

    /// Complex predictions for a batch of windows.
    pub fn predict<T: Real>(&self, store: &ParamStore<T>, windows: &[&[CVec]]) -> Result<Vec<CVec>, PredictorError> {
        let f = self.features(windows)?;
        let (out, _) = self.forward(&store.view(), f, AdjusterMode::Learned)?;
        out.rows()
            .into_iter()
            .map(|r| {
                let v: Vec<f64> = r.iter().map(|x| x.to_f64_lossless()).collect();
                Ok(real_to_complex(&v)?)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_grad_scaled, max_relative_error, SeededRng};
    use num_complex::Complex64;
    use rand::Rng;

    fn small_cfg() -> LpcnetConfig {
        LpcnetConfig {
            n_b: 3,
            k: 5,
            n_z: 6,
            n_w: 4,
            n_s: 3,
            horizon: 1,
            enable_diff: true,
            enable_adjuster: true,
            enable_residual: true,
            lr: 1e-3,
            batch_size: 4,
            epochs: 1,
            adjuster_init_scale: 0.5,
            augment: false,
            augment_doppler: 0.5,
        }
    }

    fn random_windows(rng: &mut SeededRng, batch: usize, k: usize, n_b: usize) -> Vec<Vec<CVec>> {
        (0..batch)
            .map(|_| {
                (0..k)
                    .map(|_| (0..n_b).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
                    .collect()
            })
            .collect()
    }

    fn refs(w: &[Vec<CVec>]) -> Vec<&[CVec]> {
        w.iter().map(|v| v.as_slice()).collect()
    }

    fn perturb(store: &mut ParamStore<f64>, rng: &mut SeededRng) {
        for v in store.values_mut() {
            *v += rng.random_range(-0.3..0.3);
        }
    }

    #[test]
    fn shift_equivariance() {
        let mut rng = SeededRng::new(1);
        let cfg = small_cfg();
        let (net, mut store) = LpcNet::init::<f64, _>(&cfg, &mut rng).unwrap();
        perturb(&mut store, &mut rng);
        let w = random_windows(&mut rng, 3, cfg.k, cfg.n_b);
        let c: Vec<Complex64> = (0..cfg.n_b).map(|_| Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))).collect();
        let shifted: Vec<Vec<CVec>> = w
            .iter()
            .map(|win| win.iter().map(|h| h.iter().zip(&c).map(|(a, b)| a + b).collect()).collect())
            .collect();
        let a = net.predict(&store, &refs(&w)).unwrap();
        let b = net.predict(&store, &refs(&shifted)).unwrap();
        for (pa, pb) in a.iter().zip(&b) {
            for i in 0..cfg.n_b {
                assert!((pb[i] - (pa[i] + c[i])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_adjuster_matches_static_readout_bitwise() {
        let mut rng = SeededRng::new(2);
        let cfg = small_cfg();
        let (net, mut store) = LpcNet::init::<f64, _>(&cfg, &mut rng).unwrap();
        perturb(&mut store, &mut rng);
        let mut static_cfg = cfg.clone();
        static_cfg.enable_adjuster = false;
        let mut static_store = ParamStore::<f64>::new();
        for spec in store.specs().iter().filter(|s| !s.name.starts_with("adj_")) {
            let id = static_store.add(&spec.name, &spec.shape).unwrap();
            static_store.value_mut(id).copy_from_slice(store.value(store.id(&spec.name).unwrap()));
        }
        let static_net = LpcNet::bind(&static_cfg, &static_store).unwrap();
        let w = random_windows(&mut rng, 4, cfg.k, cfg.n_b);
        let (a, _) = net
            .forward(&store.view(), net.features::<f64>(&refs(&w)).unwrap(), AdjusterMode::Identity)
            .unwrap();
        let (b, _) = static_net
            .forward(&static_store.view(), static_net.features::<f64>(&refs(&w)).unwrap(), AdjusterMode::Learned)
            .unwrap();
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn zero_window_zero_params_gives_zero() {
        let cfg = small_cfg().lstm_baseline();
        let mut rng = SeededRng::new(3);
        let (net, mut store) = LpcNet::init::<f64, _>(&cfg, &mut rng).unwrap();
        store.values_mut().iter_mut().for_each(|v| *v = 0.0);
        let w = vec![vec![CVec::zeros(cfg.n_b); cfg.k]; 2];
        for p in net.predict(&store, &refs(&w)).unwrap() {
            assert_eq!(p, CVec::zeros(cfg.n_b));
        }
    }

    #[test]
    fn constant_window_offset_is_input_free() {
        let mut rng = SeededRng::new(4);
        let cfg = small_cfg();
        let (net, mut store) = LpcNet::init::<f64, _>(&cfg, &mut rng).unwrap();
        perturb(&mut store, &mut rng);
        let mut offsets = Vec::new();
        for s in 0..3 {
            let c: CVec = (0..cfg.n_b).map(|i| Complex64::new(s as f64 + i as f64, -(s as f64))).collect();
            let w = vec![vec![c.clone(); cfg.k]];
            let p = net.predict(&store, &refs(&w)).unwrap().remove(0);
            offsets.push(p.sub(&c));
        }
        for o in &offsets[1..] {
            assert!(o.sub(&offsets[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn wrong_window_shapes_rejected() {
        let cfg = small_cfg();
        let (net, _) = LpcNet::init::<f64, _>(&cfg, &mut SeededRng::new(0)).unwrap();
        let short = vec![vec![CVec::zeros(cfg.n_b); cfg.k - 1]];
        assert!(net.features::<f64>(&refs(&short)).is_err());
        let wide = vec![vec![CVec::zeros(cfg.n_b + 1); cfg.k]];
        assert!(net.features::<f64>(&refs(&wide)).is_err());
    }

    /// Loss `Σ c ⊙ out` with fixed random `c`, so every output coordinate is
    /// exercised.
    fn check_grad(cfg: &LpcnetConfig, seed: u64) -> f64 {
        let mut rng = SeededRng::new(seed);
        let (net, mut store) = LpcNet::init::<f64, _>(cfg, &mut rng).unwrap();
        perturb(&mut store, &mut rng);
        let w = random_windows(&mut rng, 3, cfg.k, cfg.n_b);
        let coef = Array2::from_shape_fn((3, 2 * cfg.n_b), |_| rng.random_range(-1.0..1.0));
        let f = net.features::<f64>(&refs(&w)).unwrap();
        let (_, tape) = net.forward(&store.view(), f.clone(), AdjusterMode::Learned).unwrap();
        store.zero_grads();
        {
            let (p, mut g) = store.split_mut();
            net.backward(&p, &mut g, &tape, &coef);
        }
        let analytic = store.grads().to_vec();
        let base = store.clone();
        let numeric = finite_diff_grad_scaled(
            |params| {
                let mut s = base.clone();
                s.values_mut().copy_from_slice(params);
                let (out, _) = net.forward(&s.view(), f.clone(), AdjusterMode::Learned).unwrap();
                (&out * &coef).sum()
            },
            base.values(),
            1e-6,
        )
        .unwrap();
        max_relative_error(&analytic, &numeric)
    }

    #[test]
    fn gradient_matches_finite_differences_all_variants() {
        for (diff, adj) in [(true, true), (true, false), (false, true), (false, false)] {
            let cfg = small_cfg().ablation(diff, adj);
            for seed in 0..5 {
                let err = check_grad(&cfg, seed);
                assert!(err < 1e-4, "diff={diff} adj={adj} seed={seed}: {err}");
            }
        }
        let j = small_cfg().jlpcnet();
        assert!(check_grad(&j, 9) < 1e-4);
    }

    #[test]
    fn dynamic_linear_gradient() {
        let mut rng = SeededRng::new(11);
        let (n_out, n_z, batch) = (4, 5, 3);
        let mut draw = |r: usize, c: usize| Array2::from_shape_fn((r, c), |_| rng.random_range(-1.0..1.0));
        let w = draw(n_out, n_z);
        let bias = draw(1, n_out).into_shape_with_order(n_out).unwrap();
        let wa = draw(batch * n_out, n_z);
        let ba = draw(1, batch * n_out).into_shape_with_order(batch * n_out).unwrap();
        let z = draw(batch, n_z);
        let coef = draw(batch, n_out);
        let g = dynamic_linear_backward(w.view(), bias.view(), Some(wa.view()), Some(ba.view()), z.view(), coef.view());
        // flatten every input into one parameter vector
        let parts = [w.len(), bias.len(), wa.len(), ba.len(), z.len()];
        let flat: Vec<f64> = w.iter().chain(&bias).chain(&wa).chain(&ba).chain(&z).copied().collect();
        let numeric = finite_diff_grad_scaled(
            |p| {
                let mut off = 0;
                let mut take = |n: usize| {
                    let s = p[off..off + n].to_vec();
                    off += n;
                    s
                };
                let w = Array2::from_shape_vec((n_out, n_z), take(parts[0])).unwrap();
                let bias = Array1::from(take(parts[1]));
                let wa = Array2::from_shape_vec((batch * n_out, n_z), take(parts[2])).unwrap();
                let ba = Array1::from(take(parts[3]));
                let z = Array2::from_shape_vec((batch, n_z), take(parts[4])).unwrap();
                (&dynamic_linear(w.view(), bias.view(), Some(wa.view()), Some(ba.view()), z.view()) * &coef).sum()
            },
            &flat,
            1e-6,
        )
        .unwrap();
        let analytic: Vec<f64> = g
            .w
            .iter()
            .chain(&g.bias)
            .chain(g.wa.as_ref().unwrap())
            .chain(g.ba.as_ref().unwrap())
            .chain(&g.z)
            .copied()
            .collect();
        let err = max_relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn f32_forward_tracks_f64() {
        let mut rng = SeededRng::new(5);
        let cfg = small_cfg();
        let (net, store) = LpcNet::init::<f64, _>(&cfg, &mut rng).unwrap();
        let w = random_windows(&mut rng, 2, cfg.k, cfg.n_b);
        let a = net.predict(&store, &refs(&w)).unwrap();
        let b = net.predict(&store.cast::<f32>(), &refs(&w)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.sub(y).norm() < 1e-5);
        }
    }
}
