use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::adam::{AdamConfig, AdamState};
use crate::engine::conv::{conv2d_backward, conv2d_forward, ConvParams};
use crate::engine::ops;
use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};
use crate::zoo::{Activation, Layer, ModelSpec};

/// Trainable parameters: one ConvParams per conv layer, in layer order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T = f32> {
    pub convs: Vec<ConvParams<T>>,
}

impl<T: Scalar> ModelParams<T> {
    /// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero bias.
    pub fn init(spec: &ModelSpec, seed: u64) -> ModelParams<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut convs = Vec::new();
        let mut in_ch = spec.input_shape.0;
        for layer in &spec.layers {
            if let Layer::Conv {
                out_ch,
                kernel,
                stride,
                dilation,
                ..
            } = layer
            {
                let mut p = ConvParams::<T>::zeros(*out_ch, in_ch, *kernel, *stride, *dilation);
                let fan_in = in_ch * kernel * kernel;
                let fan_out = out_ch * kernel * kernel;
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                for w in p.weights.iter_mut() {
                    *w = T::from_f64_(rng.gen_range(-bound..bound));
                }
                convs.push(p);
                in_ch = *out_ch;
            }
        }
        ModelParams { convs }
    }

    pub fn zeros_like(&self) -> ModelParams<T> {
        ModelParams {
            convs: self
                .convs
                .iter()
                .map(|p| ConvParams::zeros(p.out_ch, p.in_ch, p.kernel, p.stride, p.dilation))
                .collect(),
        }
    }

    /// Adds `other` into `self`, used for ordered gradient reduction.
    pub fn add_assign(&mut self, other: &ModelParams<T>) {
        for (a, b) in self.convs.iter_mut().zip(&other.convs) {
            for (w, &g) in a.weights.iter_mut().zip(&b.weights) {
                *w += g;
            }
            for (w, &g) in a.bias.iter_mut().zip(&b.bias) {
                *w += g;
            }
        }
    }

    pub fn scale(&mut self, factor: T) {
        for p in self.convs.iter_mut() {
            for w in p.weights.iter_mut() {
                *w *= factor;
            }
            for b in p.bias.iter_mut() {
                *b *= factor;
            }
        }
    }

    /// Flat group lengths (weights and bias of each conv, interleaved),
    /// matching the layout used by `adam_step`.
    pub fn group_lens(&self) -> Vec<usize> {
        let mut lens = Vec::new();
        for p in &self.convs {
            lens.push(p.weights.len());
            lens.push(p.bias.len());
        }
        lens
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        ModelParams {
            convs: self.convs.iter().map(|p| p.cast()).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.convs
            .iter()
            .all(|p| p.weights.iter().all(|v| v.is_finite()) && p.bias.iter().all(|v| v.is_finite()))
    }
}

/// One Adam update over all conv layers.
pub fn adam_step<T: Scalar>(
    params: &mut ModelParams<T>,
    grads: &ModelParams<T>,
    state: &mut AdamState<T>,
) -> Result<()> {
    let mut param_groups: Vec<&mut [T]> = Vec::new();
    for p in params.convs.iter_mut() {
        param_groups.push(&mut p.weights);
        param_groups.push(&mut p.bias);
    }
    let mut grad_groups: Vec<&[T]> = Vec::new();
    for g in &grads.convs {
        grad_groups.push(&g.weights);
        grad_groups.push(&g.bias);
    }
    state.step(&mut param_groups, &grad_groups)
}

pub fn adam_state_for<T: Scalar>(params: &ModelParams<T>, config: AdamConfig) -> AdamState<T> {
    AdamState::new(config, &params.group_lens())
}

/// Per-layer activations recorded during the forward pass.
pub struct Tape<T = f32> {
    /// node 0 = input, node i+1 = post-activation output of layer i
    pub nodes: Vec<Tensor<T>>,
    /// conv pre-activation, kept only where the backward pass needs it
    preacts: Vec<Option<Tensor<T>>>,
    argmax: Vec<Option<Vec<usize>>>,
}

/// Forward pass over a validated spec; returns the output and the tape.
pub fn forward<T: Scalar>(
    spec: &ModelSpec,
    params: &ModelParams<T>,
    input: &Tensor<T>,
) -> Result<(Tensor<T>, Tape<T>)> {
    if input.shape() != spec.input_shape {
        return Err(Error::shape(format!(
            "input shape {:?} != model input {:?}",
            input.shape(),
            spec.input_shape
        )));
    }
    let mut tape = Tape {
        nodes: vec![input.clone()],
        preacts: Vec::with_capacity(spec.layers.len()),
        argmax: Vec::with_capacity(spec.layers.len()),
    };
    let mut conv_idx = 0;
    for layer in &spec.layers {
        let cur = tape.nodes.last().unwrap();
        let (out, preact, argmax) = match layer {
            Layer::Conv { activation, .. } => {
                let p = &params.convs[conv_idx];
                conv_idx += 1;
                let z = conv2d_forward(cur, p)?;
                match activation {
                    Activation::Sigmoid => (ops::sigmoid(&z), None, None),
                    Activation::Relu => {
                        let a = ops::relu(&z);
                        (a, Some(z), None)
                    }
                    Activation::None => (z, None, None),
                }
            }
            Layer::MaxPool2 => {
                let (out, idx) = ops::maxpool2(cur)?;
                (out, None, Some(idx))
            }
            Layer::Upsample2 => (ops::upsample_nearest2(cur), None, None),
            Layer::ResidualJoin { source } => (ops::residual_add(cur, &tape.nodes[*source])?, None, None),
        };
        tape.nodes.push(out);
        tape.preacts.push(preact);
        tape.argmax.push(argmax);
    }
    Ok((tape.nodes.last().unwrap().clone(), tape))
}

/// Backward pass: gradients for every conv layer plus the input gradient.
pub fn backward<T: Scalar>(
    spec: &ModelSpec,
    params: &ModelParams<T>,
    tape: &Tape<T>,
    grad_out: &Tensor<T>,
) -> Result<(ModelParams<T>, Tensor<T>)> {
    let n = spec.layers.len();
    tape.nodes[n].check_same_shape(grad_out, "model backward")?;

    let mut grad_nodes: Vec<Option<Tensor<T>>> = vec![None; n + 1];
    grad_nodes[n] = Some(grad_out.clone());

    let mut grads = ModelParams {
        convs: params
            .convs
            .iter()
            .map(|p| ConvParams::zeros(p.out_ch, p.in_ch, p.kernel, p.stride, p.dilation))
            .collect(),
    };
    let mut conv_idx = params.convs.len();

    for (i, layer) in spec.layers.iter().enumerate().rev() {
        let g_out = grad_nodes[i + 1]
            .take()
            .ok_or_else(|| Error::numeric(format!("no gradient reached layer {i}")))?;
        let g_in = match layer {
            Layer::Conv { activation, .. } => {
                conv_idx -= 1;
                let p = &params.convs[conv_idx];
                let g_z = match activation {
                    Activation::Sigmoid => ops::sigmoid_backward(&tape.nodes[i + 1], &g_out),
                    Activation::Relu => {
                        let z = tape.preacts[i].as_ref().expect("relu preact on tape");
                        ops::relu_backward(z, &g_out)
                    }
                    Activation::None => g_out,
                };
                let (g_in, g_p) = conv2d_backward(&tape.nodes[i], p, &g_z)?;
                grads.convs[conv_idx] = g_p;
                g_in
            }
            Layer::MaxPool2 => {
                let idx = tape.argmax[i].as_ref().expect("argmax on tape");
                ops::maxpool2_backward(tape.nodes[i].shape(), idx, &g_out)
            }
            Layer::Upsample2 => ops::upsample_nearest2_backward(&g_out)?,
            Layer::ResidualJoin { source } => {
                // gradient flows unchanged to both operands
                accumulate(&mut grad_nodes[*source], &g_out);
                g_out
            }
        };
        accumulate(&mut grad_nodes[i], &g_in);
    }

    let grad_input = grad_nodes[0].take().expect("input gradient");
    Ok((grads, grad_input))
}

fn accumulate<T: Scalar>(slot: &mut Option<Tensor<T>>, g: &Tensor<T>) {
    match slot {
        Some(acc) => {
            for (a, &b) in acc.data.iter_mut().zip(&g.data) {
                *a += b;
            }
        }
        None => *slot = Some(g.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{build_base_net, build_jain2009_residual};

    fn identity_spec() -> ModelSpec {
        ModelSpec {
            name: "identity".to_string(),
            input_shape: (3, 4, 4),
            layers: vec![Layer::conv(3, 1, 1, Activation::None)],
        }
    }

    /// 1x1 conv with identity channel mapping.
    fn identity_params() -> ModelParams<f32> {
        let mut p = ConvParams::<f32>::zeros(3, 3, 1, 1, 1);
        for c in 0..3 {
            let wi = p.w_idx(c, c, 0, 0);
            p.weights[wi] = 1.0;
        }
        ModelParams { convs: vec![p] }
    }

    #[test]
    fn identity_conv_model_returns_input() {
        let spec = identity_spec();
        let params = identity_params();
        let mut input = Tensor::<f32>::zeros(3, 4, 4);
        for (i, v) in input.data.iter_mut().enumerate() {
            *v = i as f32 * 0.01;
        }
        let (out, _) = forward(&spec, &params, &input).unwrap();
        assert_eq!(out.data, input.data);
    }

    #[test]
    fn forward_is_deterministic() {
        let spec = build_base_net(5);
        let params = ModelParams::<f32>::init(&spec, 11);
        let mut input = Tensor::<f32>::zeros(3, 128, 128);
        for (i, v) in input.data.iter_mut().enumerate() {
            *v = ((i * 2654435761) % 1000) as f32 / 1000.0;
        }
        let (a, _) = forward(&spec, &params, &input).unwrap();
        let (b, _) = forward(&spec, &params, &input).unwrap();
        assert_eq!(a.data, b.data);
        assert_eq!(a.shape(), (3, 128, 128));
        assert!(a.all_finite());
    }

    #[test]
    fn init_is_seed_deterministic_and_seed_sensitive() {
        let spec = build_base_net(5);
        let a = ModelParams::<f32>::init(&spec, 3);
        let b = ModelParams::<f32>::init(&spec, 3);
        let c = ModelParams::<f32>::init(&spec, 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.convs.iter().all(|p| p.bias.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn residual_join_feeds_gradient_to_both_branches() {
        let spec = build_jain2009_residual();
        let mut small = spec.clone();
        small.input_shape = (3, 8, 8);
        let params = ModelParams::<f32>::init(&small, 5);
        let input = Tensor::<f32>::filled(3, 8, 8, 0.4);
        let (out, tape) = forward(&small, &params, &input).unwrap();
        let grad_out = Tensor::filled(3, 8, 8, 1.0);
        let (grads, grad_in) = backward(&small, &params, &tape, &grad_out).unwrap();
        assert_eq!(out.shape(), (3, 8, 8));
        assert_eq!(grad_in.shape(), (3, 8, 8));
        assert!(grads.convs.iter().any(|g| g.weights.iter().any(|&w| w != 0.0)));
    }

    #[test]
    fn wrong_input_shape_is_rejected() {
        let spec = build_base_net(5);
        let params = ModelParams::<f32>::init(&spec, 0);
        let input = Tensor::<f32>::zeros(3, 64, 64);
        assert!(matches!(forward(&spec, &params, &input), Err(Error::Shape(_))));
    }
}
