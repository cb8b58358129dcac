use std::collections::HashMap;

use ndarray::{ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2};
use rand::Rng;

use super::{NnError, Real};

/// Index of a tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    offset: usize,
}

impl ParamSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Named tensors stored back to back in one flat buffer, with a gradient
/// buffer of identical layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    specs: Vec<ParamSpec>,
    by_name: HashMap<String, usize>,
    values: Vec<T>,
    grads: Vec<T>,
}

impl<T: Real> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        Self {
            specs: Vec::new(),
            by_name: HashMap::new(),
            values: Vec::new(),
            grads: Vec::new(),
        }
    }

    /// Appends a zero-filled tensor.
    pub fn add(&mut self, name: &str, shape: &[usize]) -> Result<ParamId, NnError> {
        if self.by_name.contains_key(name) {
            return Err(NnError::DuplicateName(name.to_string()));
        }
        let spec = ParamSpec {
            name: name.to_string(),
            shape: shape.to_vec(),
            offset: self.values.len(),
        };
        let n = spec.len();
        self.values.resize(self.values.len() + n, T::zero());
        self.grads.resize(self.grads.len() + n, T::zero());
        self.by_name.insert(name.to_string(), self.specs.len());
        self.specs.push(spec);
        Ok(ParamId(self.specs.len() - 1))
    }

    pub fn id(&self, name: &str) -> Result<ParamId, NnError> {
        self.by_name
            .get(name)
            .map(|&i| ParamId(i))
            .ok_or_else(|| NnError::UnknownParam(name.to_string()))
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn spec(&self, id: ParamId) -> &ParamSpec {
        &self.specs[id.0]
    }

    /// Number of scalar parameters across all tensors.
    pub fn total_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn grads(&self) -> &[T] {
        &self.grads
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(|g| *g = T::zero());
    }

    pub fn value(&self, id: ParamId) -> &[T] {
        &self.values[self.specs[id.0].range()]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut [T] {
        let r = self.specs[id.0].range();
        &mut self.values[r]
    }

    pub fn grad(&self, id: ParamId) -> &[T] {
        &self.grads[self.specs[id.0].range()]
    }

    pub fn view(&self) -> Values<'_, T> {
        Values {
            specs: &self.specs,
            data: &self.values,
        }
    }

    /// Read-only parameter view plus a mutable gradient view.
    pub fn split_mut(&mut self) -> (Values<'_, T>, GradsMut<'_, T>) {
        (
            Values {
                specs: &self.specs,
                data: &self.values,
            },
            GradsMut {
                specs: &self.specs,
                data: &mut self.grads,
            },
        )
    }

    /// Split borrow used by optimizers: values mutable, gradients shared.
    pub fn values_mut_and_grads(&mut self) -> (&mut [T], &[T]) {
        (&mut self.values, &self.grads)
    }

    /// Same layout with every entry converted to another element type.
    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        ParamStore {
            specs: self.specs.clone(),
            by_name: self.by_name.clone(),
            values: self.values.iter().map(|v| U::of(v.to_f64_lossless())).collect(),
            grads: self.grads.iter().map(|v| U::of(v.to_f64_lossless())).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| {
                let x = v.to_f64_lossless();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn check_rank(spec: &ParamSpec, rank: usize) {
    assert_eq!(
        spec.shape.len(),
        rank,
        "parameter {} has rank {}, viewed as rank {rank}",
        spec.name,
        spec.shape.len()
    );
}

/// Borrowed parameter values.
#[derive(Clone, Copy)]
pub struct Values<'a, T> {
    specs: &'a [ParamSpec],
    data: &'a [T],
}

impl<'a, T: Real> Values<'a, T> {
    pub fn shape(&self, id: ParamId) -> &'a [usize] {
        &self.specs[id.0].shape
    }

    pub fn slice(&self, id: ParamId) -> &'a [T] {
        &self.data[self.specs[id.0].range()]
    }

    pub fn vec(&self, id: ParamId) -> ArrayView1<'a, T> {
        let spec = &self.specs[id.0];
        check_rank(spec, 1);
        ArrayView1::from(self.slice(id))
    }

    pub fn mat(&self, id: ParamId) -> ArrayView2<'a, T> {
        let spec = &self.specs[id.0];
        check_rank(spec, 2);
        ArrayView2::from_shape((spec.shape[0], spec.shape[1]), self.slice(id))
            .expect("shape checked at construction")
    }
}

/// Mutable gradient buffer with the store's layout.
pub struct GradsMut<'a, T> {
    specs: &'a [ParamSpec],
    data: &'a mut [T],
}

impl<T: Real> GradsMut<'_, T> {
    pub fn slice(&mut self, id: ParamId) -> &mut [T] {
        let r = self.specs[id.0].range();
        &mut self.data[r]
    }

    pub fn vec(&mut self, id: ParamId) -> ArrayViewMut1<'_, T> {
        check_rank(&self.specs[id.0], 1);
        ArrayViewMut1::from(self.slice(id))
    }

    pub fn mat(&mut self, id: ParamId) -> ArrayViewMut2<'_, T> {
        let spec = &self.specs[id.0];
        check_rank(spec, 2);
        let shape = (spec.shape[0], spec.shape[1]);
        ArrayViewMut2::from_shape(shape, self.slice(id)).expect("shape checked at construction")
    }
}

/// Initialization law for one tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Zeros,
    Constant(f64),
    /// Uniform in `±scale/√fan_in`.
    Uniform { fan_in: usize, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamInit {
    pub name: String,
    pub shape: Vec<usize>,
    pub init: Init,
}

impl ParamInit {
    pub fn new(name: impl Into<String>, shape: &[usize], init: Init) -> Self {
        Self {
            name: name.into(),
            shape: shape.to_vec(),
            init,
        }
    }

    /// Weight matrix `[fan_out, fan_in]` drawn from `U(±1/√fan_in)`.
    pub fn weight(name: impl Into<String>, fan_out: usize, fan_in: usize) -> Self {
        Self::new(name, &[fan_out, fan_in], Init::Uniform { fan_in, scale: 1.0 })
    }

    pub fn bias(name: impl Into<String>, len: usize) -> Self {
        Self::new(name, &[len], Init::Zeros)
    }
}

/// Builds a store from a layer list, drawing tensors in list order.
pub fn init_params<T: Real, R: Rng + ?Sized>(spec: &[ParamInit], rng: &mut R) -> Result<ParamStore<T>, NnError> {
    let mut store = ParamStore::new();
    for p in spec {
        let id = store.add(&p.name, &p.shape)?;
        match p.init {
            Init::Zeros => {}
            Init::Constant(c) => store.value_mut(id).iter_mut().for_each(|v| *v = T::of(c)),
            Init::Uniform { fan_in, scale } => {
                let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
                for v in store.value_mut(id) {
                    *v = T::of(scale * rng.random_range(-bound..=bound));
                }
            }
        }
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn demo_spec() -> Vec<ParamInit> {
        vec![
            ParamInit::weight("a.w", 3, 100),
            ParamInit::bias("a.b", 3),
            ParamInit::new("b.out", &[2], Init::Constant(1.0)),
        ]
    }

    #[test]
    fn total_count_sums_tensor_sizes() {
        let store: ParamStore<f64> = init_params(&demo_spec(), &mut SeededRng::new(1)).unwrap();
        assert_eq!(store.total_count(), 300 + 3 + 2);
        assert_eq!(store.total_count(), store.total_count());
        assert_eq!(store.value(store.id("b.out").unwrap()), &[1.0, 1.0]);
        assert!(store.value(store.id("a.b").unwrap()).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut s = ParamStore::<f64>::new();
        s.add("x", &[2]).unwrap();
        assert!(matches!(s.add("x", &[3]), Err(NnError::DuplicateName(_))));
        assert!(matches!(s.id("y"), Err(NnError::UnknownParam(_))));
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a: ParamStore<f64> = init_params(&demo_spec(), &mut SeededRng::new(9)).unwrap();
        let b: ParamStore<f64> = init_params(&demo_spec(), &mut SeededRng::new(9)).unwrap();
        assert_eq!(a, b);
        let w = a.value(a.id("a.w").unwrap());
        assert!(w.iter().all(|v| v.abs() <= 0.1));
        assert!(w.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn uniform_weight_mean_is_centered() {
        // U(±1/√fan_in) has standard deviation bound/√3; the mean of n draws
        // has standard error bound/√(3n).
        let n = 1_000_000;
        let spec = [ParamInit::weight("w", 1000, 1000)];
        let store: ParamStore<f64> = init_params(&spec, &mut SeededRng::new(5)).unwrap();
        let mean = store.values().iter().sum::<f64>() / n as f64;
        let se = (1.0 / 1000f64.sqrt()) / (3.0 * n as f64).sqrt();
        assert!(mean.abs() < 3.0 * se, "mean {mean} vs 3σ {}", 3.0 * se);
    }
}
