//! Named architecture builders and the validated layer-graph spec they share.
//!
//! Layer indices: the network input is node 0 and the output of layer `i`
//! (0-based in `layers`) is node `i + 1`. A `ResidualJoin { source }` adds
//! node `source` to the running activation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INPUT_SHAPE: (usize, usize, usize) = (3, 128, 128);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Relu,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Layer {
    Conv {
        out_ch: usize,
        kernel: usize,
        stride: usize,
        dilation: usize,
        activation: Activation,
    },
    MaxPool2,
    Upsample2,
    ResidualJoin {
        source: usize,
    },
}

impl Layer {
    pub fn conv(out_ch: usize, kernel: usize, dilation: usize, activation: Activation) -> Layer {
        Layer::Conv {
            out_ch,
            kernel,
            stride: 1,
            dilation,
            activation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub input_shape: (usize, usize, usize),
    pub layers: Vec<Layer>,
}

impl ModelSpec {
    /// Shape after every node: element 0 is the input shape, element i+1 the
    /// output of layer i. Fails on any inconsistency.
    pub fn node_shapes(&self) -> Result<Vec<(usize, usize, usize)>> {
        let mut shapes = vec![self.input_shape];
        for (i, layer) in self.layers.iter().enumerate() {
            let (c, h, w) = *shapes.last().unwrap();
            let next = match layer {
                Layer::Conv {
                    out_ch,
                    kernel,
                    stride,
                    dilation,
                    ..
                } => {
                    if kernel % 2 == 0 || *kernel == 0 {
                        return Err(Error::validation(format!(
                            "layer {i}: kernel {kernel} must be odd"
                        )));
                    }
                    if *stride < 1 || *dilation < 1 {
                        return Err(Error::validation(format!(
                            "layer {i}: stride and dilation must be >= 1"
                        )));
                    }
                    let pad = dilation * (kernel - 1) / 2;
                    let span = dilation * (kernel - 1) + 1;
                    let oh = (h + 2 * pad - span) / stride + 1;
                    let ow = (w + 2 * pad - span) / stride + 1;
                    let _ = c;
                    (*out_ch, oh, ow)
                }
                Layer::MaxPool2 => {
                    if h % 2 != 0 || w % 2 != 0 {
                        return Err(Error::validation(format!(
                            "layer {i}: maxpool needs even dims, got {h}x{w}"
                        )));
                    }
                    (c, h / 2, w / 2)
                }
                Layer::Upsample2 => (c, h * 2, w * 2),
                Layer::ResidualJoin { source } => {
                    if *source > i {
                        return Err(Error::validation(format!(
                            "layer {i}: residual source {source} is not an earlier node"
                        )));
                    }
                    let src_shape = shapes[*source];
                    if src_shape != (c, h, w) {
                        return Err(Error::validation(format!(
                            "layer {i}: residual source shape {src_shape:?} != join-point shape {:?}",
                            (c, h, w)
                        )));
                    }
                    (c, h, w)
                }
            };
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::validation("model has no layers".to_string()));
        }
        let shapes = self.node_shapes()?;
        let out = *shapes.last().unwrap();
        let expect = (3, self.input_shape.1, self.input_shape.2);
        if out != expect {
            return Err(Error::validation(format!(
                "model output shape {out:?} != required {expect:?}"
            )));
        }
        Ok(())
    }

    /// Number of trainable parameters.
    pub fn param_count(&self) -> usize {
        let mut in_ch = self.input_shape.0;
        let mut total = 0;
        for layer in &self.layers {
            if let Layer::Conv { out_ch, kernel, .. } = layer {
                total += out_ch * in_ch * kernel * kernel + out_ch;
                in_ch = *out_ch;
            }
        }
        total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model spec serializes")
    }

    pub fn from_json(s: &str) -> Result<ModelSpec> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Two-layer net shared by the denoise/deblur/color-constancy tasks:
/// one hidden layer of 8 feature maps, sigmoid, then a linear output conv.
pub fn build_base_net(kernel: usize) -> ModelSpec {
    ModelSpec {
        name: format!("base_k{kernel}"),
        input_shape: INPUT_SHAPE,
        layers: vec![
            Layer::conv(8, kernel, 1, Activation::Sigmoid),
            Layer::conv(3, kernel, 1, Activation::None),
        ],
    }
}

/// Four hidden sigmoid conv layers of width 8, kernel 5, linear output.
pub fn build_jain2009(kernel: usize) -> ModelSpec {
    let mut layers = Vec::new();
    for _ in 0..4 {
        layers.push(Layer::conv(8, kernel, 1, Activation::Sigmoid));
    }
    layers.push(Layer::conv(3, kernel, 1, Activation::None));
    ModelSpec {
        name: format!("jain2009_k{kernel}"),
        input_shape: INPUT_SHAPE,
        layers,
    }
}

/// Jain2009 with 2x2 max pooling after the first two hidden convs and
/// nearest upsampling after the last two, tracing 128-64-32-64-128.
pub fn build_jain2009_pool() -> ModelSpec {
    ModelSpec {
        name: "jain2009_pool".to_string(),
        input_shape: INPUT_SHAPE,
        layers: vec![
            Layer::conv(8, 5, 1, Activation::Sigmoid),
            Layer::MaxPool2,
            Layer::conv(8, 5, 1, Activation::Sigmoid),
            Layer::MaxPool2,
            Layer::conv(8, 5, 1, Activation::Sigmoid),
            Layer::Upsample2,
            Layer::conv(8, 5, 1, Activation::Sigmoid),
            Layer::Upsample2,
            Layer::conv(3, 5, 1, Activation::None),
        ],
    }
}

/// Jain2009 with all hidden convs at the given dilation rate.
pub fn build_jain2009_dilated(rate: usize) -> ModelSpec {
    let mut spec = build_jain2009(5);
    spec.name = format!("jain2009_dilated_r{rate}");
    let n = spec.layers.len();
    for layer in &mut spec.layers[..n - 1] {
        if let Layer::Conv { dilation, .. } = layer {
            *dilation = rate;
        }
    }
    if rate == 1 {
        spec.name = build_jain2009(5).name;
    }
    spec
}

/// Jain2009 plus one residual connection from the output of the first conv
/// to the input of the output conv.
pub fn build_jain2009_residual() -> ModelSpec {
    let mut spec = build_jain2009(5);
    spec.name = "jain2009_residual".to_string();
    let out_conv = spec.layers.pop().unwrap();
    spec.layers.push(Layer::ResidualJoin { source: 1 });
    spec.layers.push(out_conv);
    spec
}

/// Configurable-depth residual denoiser: `depth` 3x3 convs of width 64
/// (relu), linear 3-channel output, plus a join from the network input so
/// the convolutional stack learns a correction to the input.
pub fn build_deep_residual_denoiser(depth: usize) -> ModelSpec {
    assert!(depth >= 2, "deep residual denoiser needs at least 2 convs");
    let mut layers = Vec::new();
    for _ in 0..depth - 1 {
        layers.push(Layer::conv(64, 3, 1, Activation::Relu));
    }
    layers.push(Layer::conv(3, 3, 1, Activation::None));
    layers.push(Layer::ResidualJoin { source: 0 });
    ModelSpec {
        name: format!("deep_residual_d{depth}"),
        input_shape: INPUT_SHAPE,
        layers,
    }
}

/// Replace every conv kernel in the spec by `k` (padding is implicit in k).
pub fn with_kernel_size(spec: &ModelSpec, k: usize) -> ModelSpec {
    let mut out = spec.clone();
    for layer in &mut out.layers {
        if let Layer::Conv { kernel, .. } = layer {
            *kernel = k;
        }
    }
    out.name = format!("{}_k{k}", spec.name);
    out
}

/// All named builders, for `zoo list` and the acceptance sweep.
pub fn builders() -> Vec<(&'static str, ModelSpec)> {
    vec![
        ("base", build_base_net(5)),
        ("jain2009", build_jain2009(5)),
        ("jain2009-pool", build_jain2009_pool()),
        ("jain2009-dilated-2", build_jain2009_dilated(2)),
        ("jain2009-dilated-4", build_jain2009_dilated(4)),
        ("jain2009-dilated-8", build_jain2009_dilated(8)),
        ("jain2009-residual", build_jain2009_residual()),
        ("deep-residual-8", build_deep_residual_denoiser(8)),
    ]
}

/// Look up an architecture by CLI name. `base-k<k>` selects a base net with
/// a non-default kernel, `deep-residual-<d>` a custom depth.
pub fn by_name(name: &str) -> Result<ModelSpec> {
    for (n, spec) in builders() {
        if n == name {
            return Ok(spec);
        }
    }
    if let Some(k) = name.strip_prefix("base-k") {
        let k: usize = k
            .parse()
            .map_err(|_| Error::validation(format!("bad kernel in arch name {name}")))?;
        return Ok(build_base_net(k));
    }
    if let Some(d) = name.strip_prefix("deep-residual-") {
        let d: usize = d
            .parse()
            .map_err(|_| Error::validation(format!("bad depth in arch name {name}")))?;
        return Ok(build_deep_residual_denoiser(d));
    }
    Err(Error::validation(format!("unknown architecture {name}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_net_has_two_convs_and_expected_param_count() {
        let spec = build_base_net(5);
        assert_eq!(spec.layers.len(), 2);
        // (3*8*25 + 8) + (8*3*25 + 3)
        assert_eq!(spec.param_count(), 1211);
        spec.validate().unwrap();
        let shapes = spec.node_shapes().unwrap();
        assert_eq!(*shapes.last().unwrap(), (3, 128, 128));
    }

    #[test]
    fn jain2009_is_five_conv_layers_deep() {
        let spec = build_jain2009(5);
        assert_eq!(spec.layers.len(), 5);
        spec.validate().unwrap();
        // first layer identical to the base net's first layer
        assert_eq!(spec.layers[0], build_base_net(5).layers[0]);
    }

    #[test]
    fn pool_variant_traces_128_64_32_64_128() {
        let spec = build_jain2009_pool();
        spec.validate().unwrap();
        let hw: Vec<usize> = spec.node_shapes().unwrap().iter().map(|s| s.1).collect();
        assert_eq!(hw, vec![128, 128, 64, 64, 32, 32, 64, 64, 128, 128]);
    }

    #[test]
    fn dilated_rate_one_equals_jain2009() {
        assert_eq!(build_jain2009_dilated(1), build_jain2009(5));
        for rate in [2, 4, 8] {
            build_jain2009_dilated(rate).validate().unwrap();
        }
    }

    #[test]
    fn residual_variant_has_one_join_with_matching_shapes() {
        let spec = build_jain2009_residual();
        spec.validate().unwrap();
        let joins: Vec<&Layer> = spec
            .layers
            .iter()
            .filter(|l| matches!(l, Layer::ResidualJoin { .. }))
            .collect();
        assert_eq!(joins.len(), 1);
        let shapes = spec.node_shapes().unwrap();
        assert_eq!(shapes[1], (8, 128, 128));
        // removing the join gives jain2009 back
        let mut without = spec.clone();
        without.layers.retain(|l| !matches!(l, Layer::ResidualJoin { .. }));
        without.name = build_jain2009(5).name.clone();
        assert_eq!(without, build_jain2009(5));
    }

    #[test]
    fn deep_residual_depth_counts_convs() {
        let spec = build_deep_residual_denoiser(5);
        let convs = spec.layers.iter().filter(|l| matches!(l, Layer::Conv { .. })).count();
        assert_eq!(convs, 5);
        assert_eq!(spec.layers.len(), 6);
        spec.validate().unwrap();
    }

    #[test]
    fn with_kernel_size_rewrites_all_kernels() {
        let base = build_base_net(5);
        let k15 = with_kernel_size(&base, 15);
        k15.validate().unwrap();
        for layer in &k15.layers {
            if let Layer::Conv { kernel, .. } = layer {
                assert_eq!(*kernel, 15);
            }
        }
        // k=5 is the identity transform on the layer list
        assert_eq!(with_kernel_size(&base, 5).layers, base.layers);
        // parameter count scales as k^2 (bias excluded)
        let w5 = base.param_count() - 11;
        let w15 = k15.param_count() - 11;
        assert_eq!(w15, w5 * 9);
    }

    #[test]
    fn spec_json_round_trip_is_identity() {
        for (_, spec) in builders() {
            let json = spec.to_json();
            assert_eq!(ModelSpec::from_json(&json).unwrap(), spec);
        }
    }

    #[test]
    fn bad_residual_source_rejected_at_validation() {
        let mut spec = build_base_net(5);
        spec.layers.push(Layer::ResidualJoin { source: 9 });
        assert!(matches!(spec.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn odd_pool_dims_rejected() {
        let mut spec = build_base_net(5);
        spec.input_shape = (3, 127, 127);
        spec.layers.insert(1, Layer::MaxPool2);
        assert!(spec.validate().is_err());
    }
}
