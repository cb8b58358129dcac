use ndarray::{Array2, Axis};

use super::{GradsMut, Init, NnError, ParamId, ParamInit, ParamStore, Real, Values};

#[inline]
pub fn relu<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// `W₂·relu(W₁x + b₁) + b₂`, applied row-wise to a `batch × input` matrix.
#[derive(Debug, Clone, Copy)]
pub struct Mlp2 {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

#[derive(Debug, Clone)]
pub struct Mlp2Tape<T> {
    input: Array2<T>,
    /// Post-ReLU hidden activations.
    hidden: Array2<T>,
}

impl<T> Mlp2Tape<T> {
    pub fn hidden(&self) -> &Array2<T> {
        &self.hidden
    }
}

impl Mlp2 {
    /// Standard layout: uniform weights, zero biases.
    pub fn param_inits(prefix: &str, input: usize, hidden: usize, output: usize) -> Vec<ParamInit> {
        vec![
            ParamInit::weight(format!("{prefix}.w1"), hidden, input),
            ParamInit::bias(format!("{prefix}.b1"), hidden),
            ParamInit::weight(format!("{prefix}.w2"), output, hidden),
            ParamInit::bias(format!("{prefix}.b2"), output),
        ]
    }

    /// Layout for a hypernetwork head whose output multiplies another
    /// layer's parameters: output weights shrunk by `out_scale`, output bias
    /// set to one so the product starts near the identity.
    pub fn near_identity_inits(prefix: &str, input: usize, hidden: usize, output: usize, out_scale: f64) -> Vec<ParamInit> {
        vec![
            ParamInit::weight(format!("{prefix}.w1"), hidden, input),
            ParamInit::bias(format!("{prefix}.b1"), hidden),
            ParamInit::new(
                format!("{prefix}.w2"),
                &[output, hidden],
                Init::Uniform {
                    fan_in: hidden,
                    scale: out_scale,
                },
            ),
            ParamInit::new(format!("{prefix}.b2"), &[output], Init::Constant(1.0)),
        ]
    }

    pub fn param_count(input: usize, hidden: usize, output: usize) -> usize {
        input * hidden + hidden + hidden * output + output
    }

    pub fn bind<T: Real>(store: &ParamStore<T>, prefix: &str) -> Result<Self, NnError> {
        let w1 = store.id(&format!("{prefix}.w1"))?;
        let b1 = store.id(&format!("{prefix}.b1"))?;
        let w2 = store.id(&format!("{prefix}.w2"))?;
        let b2 = store.id(&format!("{prefix}.b2"))?;
        let s1 = store.spec(w1).shape.clone();
        let s2 = store.spec(w2).shape.clone();
        if s1.len() != 2 || s2.len() != 2 || s2[1] != s1[0] {
            return Err(NnError::ShapeMismatch {
                what: format!("{prefix} weights"),
                expected: vec![s1.first().copied().unwrap_or(0)],
                got: s2,
            });
        }
        let (hidden, input, output) = (s1[0], s1[1], s2[0]);
        if store.spec(b1).shape != [hidden] || store.spec(b2).shape != [output] {
            return Err(NnError::ShapeMismatch {
                what: format!("{prefix} biases"),
                expected: vec![hidden, output],
                got: vec![store.spec(b1).len(), store.spec(b2).len()],
            });
        }
        Ok(Self {
            input,
            hidden,
            output,
            w1,
            b1,
            w2,
            b2,
        })
    }

    pub fn forward<T: Real>(&self, p: &Values<'_, T>, x: Array2<T>) -> Result<(Array2<T>, Mlp2Tape<T>), NnError> {
        if x.ncols() != self.input {
            return Err(NnError::ShapeMismatch {
                what: "mlp input".into(),
                expected: vec![self.input],
                got: vec![x.ncols()],
            });
        }
        let mut hidden = x.dot(&p.mat(self.w1).t());
        hidden += &p.vec(self.b1);
        hidden.mapv_inplace(relu);
        let mut out = hidden.dot(&p.mat(self.w2).t());
        out += &p.vec(self.b2);
        Ok((out, Mlp2Tape { input: x, hidden }))
    }

    /// Accumulates parameter gradients for upstream gradient `d_out`. Inputs
    /// are treated as data, so no input gradient is produced.
    pub fn backward<T: Real>(&self, p: &Values<'_, T>, g: &mut GradsMut<'_, T>, tape: &Mlp2Tape<T>, d_out: &Array2<T>) {
        ndarray::linalg::general_mat_mul(T::one(), &d_out.t(), &tape.hidden, T::one(), &mut g.mat(self.w2));
        let mut gb2 = g.vec(self.b2);
        gb2 += &d_out.sum_axis(Axis(0));
        let mut d_hidden = d_out.dot(&p.mat(self.w2));
        ndarray::Zip::from(&mut d_hidden)
            .and(&tape.hidden)
            .for_each(|d, &h| {
                if h <= T::zero() {
                    *d = T::zero();
                }
            });
        ndarray::linalg::general_mat_mul(T::one(), &d_hidden.t(), &tape.input, T::one(), &mut g.mat(self.w1));
        let mut gb1 = g.vec(self.b1);
        gb1 += &d_hidden.sum_axis(Axis(0));
    }
}
