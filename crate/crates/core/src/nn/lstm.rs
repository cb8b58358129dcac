use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::{sigmoid, GradsMut, NnError, ParamId, ParamInit, ParamStore, Real, Values};

/// LSTM layer with one bias vector per gate. Gate blocks are stacked in the
/// order input, forget, candidate, output along the first weight axis.
#[derive(Debug, Clone, Copy)]
pub struct Lstm {
    pub input: usize,
    pub hidden: usize,
    w_ih: ParamId,
    w_hh: ParamId,
    bias: ParamId,
}

/// Cell and hidden state for a batch (`batch × hidden`).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState<T> {
    pub c: Array2<T>,
    pub z: Array2<T>,
}

impl<T: Real> LstmState<T> {
    pub fn zeros(batch: usize, hidden: usize) -> Self {
        Self {
            c: Array2::zeros((batch, hidden)),
            z: Array2::zeros((batch, hidden)),
        }
    }
}

/// Activations recorded by [`Lstm::forward_seq`] for the reverse pass.
#[derive(Debug, Clone)]
pub struct LstmTape<T> {
    inputs: Vec<Array2<T>>,
    /// `z_0 .. z_S`
    hidden: Vec<Array2<T>>,
    /// `c_0 .. c_S`
    cells: Vec<Array2<T>>,
    /// Activated gates per step, `batch × 4·hidden`.
    gates: Vec<Array2<T>>,
}

impl Lstm {
    /// Parameter layout: `{prefix}.w_ih [4H, N_in]`, `{prefix}.w_hh [4H, H]`,
    /// `{prefix}.b [4H]`.
    pub fn param_inits(prefix: &str, input: usize, hidden: usize) -> Vec<ParamInit> {
        vec![
            ParamInit::weight(format!("{prefix}.w_ih"), 4 * hidden, input),
            ParamInit::weight(format!("{prefix}.w_hh"), 4 * hidden, hidden),
            ParamInit::bias(format!("{prefix}.b"), 4 * hidden),
        ]
    }

    pub fn bind<T: Real>(store: &ParamStore<T>, prefix: &str) -> Result<Self, NnError> {
        let w_ih = store.id(&format!("{prefix}.w_ih"))?;
        let w_hh = store.id(&format!("{prefix}.w_hh"))?;
        let bias = store.id(&format!("{prefix}.b"))?;
        let shape_ih = &store.spec(w_ih).shape;
        if shape_ih.len() != 2 || shape_ih[0] % 4 != 0 {
            return Err(NnError::ShapeMismatch {
                what: format!("{prefix}.w_ih"),
                expected: vec![0, 0],
                got: shape_ih.clone(),
            });
        }
        let hidden = shape_ih[0] / 4;
        let input = shape_ih[1];
        let expect = |id: ParamId, shape: Vec<usize>| -> Result<(), NnError> {
            let got = &store.spec(id).shape;
            if *got != shape {
                return Err(NnError::ShapeMismatch {
                    what: store.spec(id).name.clone(),
                    expected: shape,
                    got: got.clone(),
                });
            }
            Ok(())
        };
        expect(w_hh, vec![4 * hidden, hidden])?;
        expect(bias, vec![4 * hidden])?;
        Ok(Self {
            input,
            hidden,
            w_ih,
            w_hh,
            bias,
        })
    }

    pub fn param_count(input: usize, hidden: usize) -> usize {
        4 * (input * hidden + hidden * hidden + hidden)
    }

    fn step<T: Real>(
        &self,
        p: &Values<'_, T>,
        x: ArrayView2<'_, T>,
        c: &Array2<T>,
        z: &Array2<T>,
    ) -> (Array2<T>, Array2<T>, Array2<T>) {
        let h = self.hidden;
        let mut gates = x.dot(&p.mat(self.w_ih).t());
        gates += &z.dot(&p.mat(self.w_hh).t());
        gates += &p.vec(self.bias);
        for mut row in gates.rows_mut() {
            let row = row.as_slice_mut().expect("contiguous gate row");
            for v in &mut row[..2 * h] {
                *v = sigmoid(*v);
            }
            for v in &mut row[2 * h..3 * h] {
                *v = v.tanh();
            }
            for v in &mut row[3 * h..] {
                *v = sigmoid(*v);
            }
        }
        let mut c_new = Array2::zeros(c.raw_dim());
        let mut z_new = Array2::zeros(c.raw_dim());
        for (b, g) in gates.rows().into_iter().enumerate() {
            let g = g.as_slice().expect("contiguous gate row");
            for j in 0..h {
                let cn = g[h + j] * c[(b, j)] + g[j] * g[2 * h + j];
                c_new[(b, j)] = cn;
                z_new[(b, j)] = g[3 * h + j] * cn.tanh();
            }
        }
        (c_new, z_new, gates)
    }

    /// Runs the recursion over `inputs` (each `batch × input`) from a zero
    /// state and returns the last hidden state.
    pub fn forward_seq<T: Real>(
        &self,
        p: &Values<'_, T>,
        inputs: Vec<Array2<T>>,
    ) -> Result<(Array2<T>, LstmTape<T>), NnError> {
        let batch = inputs.first().map_or(0, |x| x.nrows());
        for x in &inputs {
            if x.dim() != (batch, self.input) {
                return Err(NnError::ShapeMismatch {
                    what: "lstm input".into(),
                    expected: vec![batch, self.input],
                    got: vec![x.nrows(), x.ncols()],
                });
            }
        }
        let mut tape = LstmTape {
            hidden: vec![Array2::zeros((batch, self.hidden))],
            cells: vec![Array2::zeros((batch, self.hidden))],
            gates: Vec::with_capacity(inputs.len()),
            inputs: Vec::new(),
        };
        for x in &inputs {
            let (c, z, g) = self.step(p, x.view(), tape.cells.last().unwrap(), tape.hidden.last().unwrap());
            tape.cells.push(c);
            tape.hidden.push(z);
            tape.gates.push(g);
        }
        tape.inputs = inputs;
        Ok((tape.hidden.last().unwrap().clone(), tape))
    }

    /// Back-propagates `d_last` (gradient w.r.t. the final hidden state)
    /// through the whole unrolled sequence, accumulating into `g`.
    pub fn backward_seq<T: Real>(
        &self,
        p: &Values<'_, T>,
        g: &mut GradsMut<'_, T>,
        tape: &LstmTape<T>,
        d_last: &Array2<T>,
    ) {
        self.backward_impl(p, g, tape, d_last, None)
    }

    fn backward_impl<T: Real>(
        &self,
        p: &Values<'_, T>,
        g: &mut GradsMut<'_, T>,
        tape: &LstmTape<T>,
        d_last: &Array2<T>,
        d_last_cell: Option<&Array2<T>>,
    ) {
        let h = self.hidden;
        let batch = d_last.nrows();
        let mut dz = d_last.clone();
        let mut dc = d_last_cell.cloned().unwrap_or_else(|| Array2::zeros((batch, h)));
        let w_hh = p.mat(self.w_hh);
        let mut dpre = Array2::<T>::zeros((batch, 4 * h));
        for t in (0..tape.gates.len()).rev() {
            let gates = &tape.gates[t];
            let c_prev = &tape.cells[t];
            let c_cur = &tape.cells[t + 1];
            for b in 0..batch {
                let gr = gates.row(b);
                let gr = gr.as_slice().expect("contiguous");
                let mut dr = dpre.row_mut(b);
                let dr = dr.as_slice_mut().expect("contiguous");
                for j in 0..h {
                    let (i_g, f_g, c_g, o_g) = (gr[j], gr[h + j], gr[2 * h + j], gr[3 * h + j]);
                    let tc = c_cur[(b, j)].tanh();
                    let dzj = dz[(b, j)];
                    let d_o = dzj * tc;
                    let dcj = dc[(b, j)] + dzj * o_g * (T::one() - tc * tc);
                    let d_i = dcj * c_g;
                    let d_c = dcj * i_g;
                    let d_f = dcj * c_prev[(b, j)];
                    dc[(b, j)] = dcj * f_g;
                    dr[j] = d_i * i_g * (T::one() - i_g);
                    dr[h + j] = d_f * f_g * (T::one() - f_g);
                    dr[2 * h + j] = d_c * (T::one() - c_g * c_g);
                    dr[3 * h + j] = d_o * o_g * (T::one() - o_g);
                }
            }
            ndarray::linalg::general_mat_mul(T::one(), &dpre.t(), &tape.inputs[t], T::one(), &mut g.mat(self.w_ih));
            ndarray::linalg::general_mat_mul(T::one(), &dpre.t(), &tape.hidden[t], T::one(), &mut g.mat(self.w_hh));
            let mut gb = g.vec(self.bias);
            gb += &dpre.sum_axis(Axis(0));
            dz = dpre.dot(&w_hh);
        }
    }
}

/// Single-sample LSTM update `(c, z) ← LSTM(c, z, x)` using the parameters
/// stored under `prefix`.
pub fn lstm_step<T: Real>(
    state: &LstmState<T>,
    x: &[T],
    params: &ParamStore<T>,
    prefix: &str,
) -> Result<LstmState<T>, NnError> {
    let layer = Lstm::bind(params, prefix)?;
    if x.len() != layer.input || state.c.dim() != (1, layer.hidden) || state.z.dim() != (1, layer.hidden) {
        return Err(NnError::ShapeMismatch {
            what: "lstm_step".into(),
            expected: vec![layer.input, layer.hidden],
            got: vec![x.len(), state.c.ncols()],
        });
    }
    let xv = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
    let (c, z, _) = layer.step(&params.view(), xv, &state.c, &state.z);
    Ok(LstmState { c, z })
}

/// Accumulates into the store's gradient buffer the parameter gradient of
/// `Σ_j (w_c[j]·c′_j + w_z[j]·z′_j)` for one step taken from `state`.
#[doc(hidden)]
pub fn lstm_step_backward<T: Real>(
    state: &LstmState<T>,
    x: &[T],
    params: &mut ParamStore<T>,
    prefix: &str,
    w_c: &Array1<T>,
    w_z: &Array1<T>,
) -> Result<(), NnError> {
    let layer = Lstm::bind(params, prefix)?;
    let (values, mut grads) = params.split_mut();
    let xv = Array2::from_shape_vec((1, x.len()), x.to_vec()).map_err(|_| NnError::ShapeMismatch {
        what: "lstm_step".into(),
        expected: vec![layer.input],
        got: vec![x.len()],
    })?;
    let (c, z, gates) = layer.step(&values, xv.view(), &state.c, &state.z);
    let tape = LstmTape {
        inputs: vec![xv],
        hidden: vec![state.z.clone(), z],
        cells: vec![state.c.clone(), c],
        gates: vec![gates],
    };
    let dz = w_z.clone().insert_axis(Axis(0));
    let dc = w_c.clone().insert_axis(Axis(0));
    layer.backward_impl(&values, &mut grads, &tape, &dz, Some(&dc));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_params;
    use crate::numerics::{finite_diff_grad_scaled, max_relative_error, SeededRng};
    use rand::Rng;

    fn store(input: usize, hidden: usize, seed: u64) -> ParamStore<f64> {
        init_params(&Lstm::param_inits("lstm", input, hidden), &mut SeededRng::new(seed)).unwrap()
    }

    #[test]
    fn zero_params_keep_zero_state() {
        let mut p = store(4, 3, 0);
        p.values_mut().iter_mut().for_each(|v| *v = 0.0);
        let s = LstmState::zeros(1, 3);
        let out = lstm_step(&s, &[1.0, -2.0, 3.0, 0.5], &p, "lstm").unwrap();
        assert!(out.c.iter().chain(out.z.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn forget_bias_scales_cell() {
        let (input, hidden) = (2, 3);
        let mut p = store(input, hidden, 0);
        p.values_mut().iter_mut().for_each(|v| *v = 0.0);
        let b = p.id("lstm.b").unwrap();
        for j in 0..hidden {
            p.value_mut(b)[hidden + j] = 10.0;
        }
        let c0 = Array2::from_shape_vec((1, 3), vec![0.5, -1.5, 2.0]).unwrap();
        let s = LstmState {
            c: c0.clone(),
            z: Array2::zeros((1, 3)),
        };
        let out = lstm_step(&s, &[0.3, 0.7], &p, "lstm").unwrap();
        let f = 1.0 / (1.0 + (-10.0f64).exp());
        assert!((f - 0.9999546).abs() < 1e-7);
        for j in 0..3 {
            // input gate is σ(0)=½ but the candidate is tanh(0)=0
            assert!((out.c[(0, j)] - f * c0[(0, j)]).abs() < 1e-15);
        }
    }

    #[test]
    fn hidden_state_is_bounded() {
        let mut p = store(5, 4, 3);
        p.values_mut().iter_mut().for_each(|v| *v *= 50.0);
        let mut rng = SeededRng::new(8);
        let mut s = LstmState::zeros(1, 4);
        for _ in 0..20 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-10.0..10.0)).collect();
            s = lstm_step(&s, &x, &p, "lstm").unwrap();
            assert!(s.z.iter().all(|v| v.abs() <= 1.0 && v.is_finite()));
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let p = store(4, 3, 0);
        assert!(lstm_step(&LstmState::zeros(1, 3), &[1.0; 5], &p, "lstm").is_err());
        assert!(lstm_step(&LstmState::zeros(1, 2), &[1.0; 4], &p, "lstm").is_err());
    }

    fn step_loss(p: &ParamStore<f64>, s: &LstmState<f64>, x: &[f64]) -> f64 {
        let out = lstm_step(s, x, p, "lstm").unwrap();
        out.z.iter().map(|v| v * v).sum()
    }

    #[test]
    fn single_step_gradient_matches_finite_differences() {
        for seed in 0..5 {
            let (input, hidden) = (6, 5);
            let mut p = store(input, hidden, seed);
            let mut rng = SeededRng::new(100 + seed);
            let x: Vec<f64> = (0..input).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = LstmState {
                c: Array2::from_shape_fn((1, hidden), |_| rng.random_range(-1.0..1.0)),
                z: Array2::from_shape_fn((1, hidden), |_| rng.random_range(-0.9..0.9)),
            };
            let z = lstm_step(&s, &x, &p, "lstm").unwrap().z;
            // loss = ‖z′‖², so dL/dz′ = 2 z′ and no direct cell term
            let w_z = z.row(0).mapv(|v| 2.0 * v);
            let w_c = Array1::zeros(hidden);
            p.zero_grads();
            lstm_step_backward(&s, &x, &mut p, "lstm", &w_c, &w_z).unwrap();
            let analytic = p.grads().to_vec();
            let base = p.values().to_vec();
            let numeric = finite_diff_grad_scaled(
                |v| {
                    let mut q = p.clone();
                    q.values_mut().copy_from_slice(v);
                    step_loss(&q, &s, &x)
                },
                &base,
                1e-6,
            )
            .unwrap();
            let err = max_relative_error(&analytic, &numeric);
            assert!(err < 1e-5, "seed {seed}: rel err {err}");
        }
    }

    #[test]
    fn sequence_gradient_matches_finite_differences() {
        let (input, hidden, steps, batch) = (4, 3, 6, 2);
        let mut p = store(input, hidden, 21);
        let mut rng = SeededRng::new(77);
        let xs: Vec<Array2<f64>> = (0..steps)
            .map(|_| Array2::from_shape_fn((batch, input), |_| rng.random_range(-1.0..1.0)))
            .collect();
        let layer = Lstm::bind(&p, "lstm").unwrap();
        let loss = |q: &ParamStore<f64>| -> f64 {
            let (z, _) = layer.forward_seq(&q.view(), xs.clone()).unwrap();
            z.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v * v * v).sum()
        };
        p.zero_grads();
        {
            let (values, mut grads) = p.split_mut();
            let (z, tape) = layer.forward_seq(&values, xs.clone()).unwrap();
            let mut dz = z.clone();
            for (i, v) in dz.iter_mut().enumerate() {
                *v = 3.0 * (i as f64 + 1.0) * *v * *v;
            }
            layer.backward_seq(&values, &mut grads, &tape, &dz);
        }
        let analytic = p.grads().to_vec();
        let base = p.values().to_vec();
        let numeric = finite_diff_grad_scaled(
            |v| {
                let mut q = p.clone();
                q.values_mut().copy_from_slice(v);
                loss(&q)
            },
            &base,
            1e-6,
        )
        .unwrap();
        let err = max_relative_error(&analytic, &numeric);
        assert!(err < 1e-5, "rel err {err}");
    }
}
