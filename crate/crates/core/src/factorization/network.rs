use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};
use crate::seed;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Sigmoid,
    Relu,
    /// Identity. Meant for tests and diagnostics.
    Linear,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(T::zero()),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and the output `a`.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Sigmoid => a * (T::one() - a),
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Linear => T::one(),
        }
    }
}

/// Dense feed-forward network. `weights[l]` is row-major
/// `layer_sizes[l+1] × layer_sizes[l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NetworkParams<T> {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub seed: u64,
}

/// Per-layer pre-activations and activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    /// `activations[0]` is the input.
    pub activations: Vec<Vec<T>>,
    pub pre_activations: Vec<Vec<T>>,
}

impl<T: Scalar> NetworkParams<T> {
    /// Uniform initialization in `[-init_range, init_range]`.
    pub fn init(
        layer_sizes: Vec<usize>,
        hidden_activation: Activation,
        init_range: f64,
        seed: u64,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::arg("a network needs at least an input and an output layer"));
        }
        if !(init_range >= 0.0 && init_range.is_finite()) {
            return Err(Error::arg("init_range must be finite and >= 0"));
        }
        let mut rng = seed::rng(seed);
        let mut draw = |len: usize| -> Vec<T> {
            (0..len)
                .map(|_| {
                    if init_range == 0.0 {
                        T::zero()
                    } else {
                        T::lit(rng.random_range(-init_range..=init_range))
                    }
                })
                .collect()
        };
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layer_sizes.windows(2) {
            weights.push(draw(w[0] * w[1]));
            biases.push(draw(w[1]));
        }
        Ok(NetworkParams {
            layer_sizes,
            weights,
            biases,
            hidden_activation,
            output_activation: Activation::Sigmoid,
            seed,
        })
    }

    pub fn zeros(layer_sizes: Vec<usize>, hidden_activation: Activation) -> Result<Self> {
        Self::init(layer_sizes, hidden_activation, 0.0, 0)
    }

    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().expect("non-empty layer sizes")
    }

    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    pub fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.layer_sizes.len() < 2
            || self.weights.len() != self.layer_sizes.len() - 1
            || self.biases.len() != self.weights.len()
        {
            return Err(Error::arg("layer count does not match layer_sizes"));
        }
        for (l, w) in self.layer_sizes.windows(2).enumerate() {
            if self.weights[l].len() != w[0] * w[1] || self.biases[l].len() != w[1] {
                return Err(Error::arg(format!("layer {l} has inconsistent shapes")));
            }
        }
        let finite = self
            .weights
            .iter()
            .chain(&self.biases)
            .flatten()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::arg("network has non-finite parameters"));
        }
        Ok(())
    }

    pub fn forward_trace(&self, input: &[T]) -> Result<ForwardTrace<T>> {
        if input.len() != self.input_len() {
            return Err(Error::arg(format!(
                "input has length {}, network expects {}",
                input.len(),
                self.input_len()
            )));
        }
        let mut activations = vec![input.to_vec()];
        let mut pre_activations = Vec::with_capacity(self.layers());
        for l in 0..self.layers() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let prev = &activations[l];
            let w = &self.weights[l];
            let act = self.activation_of(l);
            let mut z = self.biases[l].clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                for (wi, xi) in row.iter().zip(prev) {
                    *zo += *wi * *xi;
                }
            }
            let a: Vec<T> = z.iter().map(|&v| act.apply(v)).collect();
            debug_assert_eq!(a.len(), n_out);
            pre_activations.push(z);
            activations.push(a);
        }
        Ok(ForwardTrace {
            activations,
            pre_activations,
        })
    }

    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        Ok(self
            .forward_trace(input)?
            .activations
            .pop()
            .expect("at least one layer"))
    }

    /// All parameters, weights then biases, layer by layer.
    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for w in &self.weights {
            out.extend_from_slice(w);
        }
        for b in &self.biases {
            out.extend_from_slice(b);
        }
        out
    }

    pub fn set_flat(&mut self, params: &[T]) {
        let mut it = params.iter().copied();
        for w in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for v in w.iter_mut() {
                *v = it.next().expect("parameter vector too short");
            }
        }
    }
}
