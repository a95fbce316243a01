use super::matrix::SparseRatingMatrix;
use super::network::NetworkParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Inputs and masked targets for training one network: row `r` of
/// `inputs` is fed forward and its outputs are compared with row `r` of the
/// target grid wherever the mask is set.
#[derive(Debug, Clone, PartialEq)]
pub struct LossContext<T> {
    pub inputs: Vec<Vec<T>>,
    pub targets: Vec<Vec<T>>,
    pub mask: Vec<Vec<u8>>,
}

impl<T: Scalar> LossContext<T> {
    /// Rows are matrix rows (user clusters), outputs are columns (drugs).
    pub fn by_rows(inputs: Vec<Vec<T>>, ratings: &SparseRatingMatrix<T>) -> Result<Self> {
        if inputs.len() != ratings.rows {
            return Err(Error::arg(format!(
                "{} input rows for a matrix with {} rows",
                inputs.len(),
                ratings.rows
            )));
        }
        let row = |i: usize| ratings.values[i * ratings.cols..(i + 1) * ratings.cols].to_vec();
        let mrow = |i: usize| ratings.mask[i * ratings.cols..(i + 1) * ratings.cols].to_vec();
        Ok(LossContext {
            targets: (0..ratings.rows).map(row).collect(),
            mask: (0..ratings.rows).map(mrow).collect(),
            inputs,
        })
    }

    /// Rows are matrix columns (drugs), outputs are rows (user clusters).
    pub fn by_columns(inputs: Vec<Vec<T>>, ratings: &SparseRatingMatrix<T>) -> Result<Self> {
        if inputs.len() != ratings.cols {
            return Err(Error::arg(format!(
                "{} input rows for a matrix with {} columns",
                inputs.len(),
                ratings.cols
            )));
        }
        let targets = (0..ratings.cols)
            .map(|j| (0..ratings.rows).map(|i| ratings.values[ratings.idx(i, j)]).collect())
            .collect();
        let mask = (0..ratings.cols)
            .map(|j| (0..ratings.rows).map(|i| ratings.mask[ratings.idx(i, j)]).collect())
            .collect();
        Ok(LossContext {
            inputs,
            targets,
            mask,
        })
    }

    pub fn check_against(&self, net: &NetworkParams<T>) -> Result<()> {
        if self.targets.len() != self.inputs.len() || self.mask.len() != self.inputs.len() {
            return Err(Error::arg("inputs, targets and mask differ in row count"));
        }
        for (r, ((x, t), m)) in self.inputs.iter().zip(&self.targets).zip(&self.mask).enumerate() {
            if x.len() != net.input_len() {
                return Err(Error::arg(format!(
                    "row {r}: input length {} but network expects {}",
                    x.len(),
                    net.input_len()
                )));
            }
            if t.len() != net.output_len() || m.len() != net.output_len() {
                return Err(Error::arg(format!(
                    "row {r}: target width does not match network output {}",
                    net.output_len()
                )));
            }
        }
        Ok(())
    }
}

/// Loss gradient, shaped like the network's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Scalar> Gradients<T> {
    fn zeros_like(net: &NetworkParams<T>) -> Self {
        Gradients {
            weights: net.weights.iter().map(|w| vec![T::zero(); w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![T::zero(); b.len()]).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<T> {
        self.weights.iter().chain(&self.biases).flatten().copied().collect()
    }
}

#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackpropFault {
    #[default]
    None,
    /// Negates the deltas propagated into hidden layers.
    FlipHiddenDelta,
}

/// `½ Σ ψ (target − output)²` over the context. Masked cells are skipped
/// without reading their targets.
pub fn context_loss<T: Scalar>(net: &NetworkParams<T>, ctx: &LossContext<T>) -> Result<T> {
    ctx.check_against(net)?;
    let half = T::lit(0.5);
    let mut loss = T::zero();
    for ((x, t), m) in ctx.inputs.iter().zip(&ctx.targets).zip(&ctx.mask) {
        if m.iter().all(|&v| v == 0) {
            continue;
        }
        let out = net.forward(x)?;
        for o in 0..out.len() {
            if m[o] == 1 {
                let e = t[o] - out[o];
                loss += half * e * e;
            }
        }
    }
    Ok(loss)
}

/// Loss and its gradient by backpropagation.
pub fn backprop<T: Scalar>(net: &NetworkParams<T>, ctx: &LossContext<T>) -> Result<(T, Gradients<T>)> {
    backprop_with_fault(net, ctx, BackpropFault::None)
}

#[doc(hidden)]
pub fn backprop_with_fault<T: Scalar>(
    net: &NetworkParams<T>,
    ctx: &LossContext<T>,
    fault: BackpropFault,
) -> Result<(T, Gradients<T>)> {
    ctx.check_against(net)?;
    let half = T::lit(0.5);
    let mut loss = T::zero();
    let mut grad = Gradients::zeros_like(net);
    let layers = net.layers();
    for ((x, t), m) in ctx.inputs.iter().zip(&ctx.targets).zip(&ctx.mask) {
        if m.iter().all(|&v| v == 0) {
            continue;
        }
        let trace = net.forward_trace(x)?;
        let out = &trace.activations[layers];
        let out_act = net.activation_of(layers - 1);
        let z_out = &trace.pre_activations[layers - 1];
        // dL/dz for the output layer; zero on masked cells.
        let mut delta: Vec<T> = (0..out.len())
            .map(|o| {
                if m[o] == 1 {
                    let e = out[o] - t[o];
                    loss += half * e * e;
                    e * out_act.derivative(z_out[o], out[o])
                } else {
                    T::zero()
                }
            })
            .collect();
        for l in (0..layers).rev() {
            let n_in = net.layer_sizes[l];
            let prev = &trace.activations[l];
            let gw = &mut grad.weights[l];
            for (o, &d) in delta.iter().enumerate() {
                if d == T::zero() {
                    continue;
                }
                grad.biases[l][o] += d;
                let row = &mut gw[o * n_in..(o + 1) * n_in];
                for (g, &a) in row.iter_mut().zip(prev) {
                    *g += d * a;
                }
            }
            if l == 0 {
                break;
            }
            let w = &net.weights[l];
            let act = net.activation_of(l - 1);
            let z = &trace.pre_activations[l - 1];
            let mut next = vec![T::zero(); n_in];
            for (i, nd) in next.iter_mut().enumerate() {
                let mut s = T::zero();
                for (o, &d) in delta.iter().enumerate() {
                    s += w[o * n_in + i] * d;
                }
                *nd = s * act.derivative(z[i], prev[i]);
                if fault == BackpropFault::FlipHiddenDelta {
                    *nd = -*nd;
                }
            }
            delta = next;
        }
    }
    Ok((loss, grad))
}

/// Result of comparing backpropagated and finite-difference gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub params_checked: usize,
}

impl GradientCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_relative_error < tolerance
    }
}

/// Denominator floor for the relative error, so parameters whose gradient
/// is (numerically) zero are compared on an absolute scale.
pub const GRADIENT_CHECK_FLOOR: f64 = 1e-6;

/// Central differences `(L(θ+h) − L(θ−h)) / 2h` against backprop over every
/// parameter. Relative error is `|a − n| / max(|a|, |n|, floor)`.
pub fn gradient_check<T: Scalar>(net: &NetworkParams<T>, ctx: &LossContext<T>, h: f64) -> Result<GradientCheck> {
    gradient_check_with_fault(net, ctx, h, BackpropFault::None)
}

#[doc(hidden)]
pub fn gradient_check_with_fault<T: Scalar>(
    net: &NetworkParams<T>,
    ctx: &LossContext<T>,
    h: f64,
    fault: BackpropFault,
) -> Result<GradientCheck> {
    if !(h > 0.0) {
        return Err(Error::arg("finite-difference step must be > 0"));
    }
    let (_, grad) = backprop_with_fault(net, ctx, fault)?;
    let analytic = grad.flatten();
    let base = net.flatten();
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (p, &a) in analytic.iter().enumerate() {
        let mut shifted = base.clone();
        shifted[p] = base[p] + T::lit(h);
        probe.set_flat(&shifted);
        let up = context_loss(&probe, ctx)?.to_f64_lossy();
        shifted[p] = base[p] - T::lit(h);
        probe.set_flat(&shifted);
        let down = context_loss(&probe, ctx)?.to_f64_lossy();
        let numeric = (up - down) / (2.0 * h);
        let a = a.to_f64_lossy();
        let denom = a.abs().max(numeric.abs()).max(GRADIENT_CHECK_FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(GradientCheck {
        max_relative_error: worst,
        params_checked: analytic.len(),
    })
}
