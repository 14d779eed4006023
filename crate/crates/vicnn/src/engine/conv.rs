use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

/// Weights and hyperparameters of one convolutional layer.
///
/// Weights are laid out `[out_ch][in_ch][k][k]`, row-major. Padding is
/// implicit "same" zero padding of width `dilation * (kernel - 1) / 2`,
/// so spatial size is preserved whenever `stride == 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvParams<T = f32> {
    pub out_ch: usize,
    pub in_ch: usize,
    pub kernel: usize,
    pub stride: usize,
    pub dilation: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> ConvParams<T> {
    pub fn zeros(out_ch: usize, in_ch: usize, kernel: usize, stride: usize, dilation: usize) -> Self {
        ConvParams {
            out_ch,
            in_ch,
            kernel,
            stride,
            dilation,
            weights: vec![T::zero(); out_ch * in_ch * kernel * kernel],
            bias: vec![T::zero(); out_ch],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel % 2 == 0 || self.kernel == 0 {
            return Err(Error::validation(format!("kernel {} must be odd", self.kernel)));
        }
        if self.stride < 1 || self.dilation < 1 {
            return Err(Error::validation("stride and dilation must be >= 1".to_string()));
        }
        if self.weights.len() != self.out_ch * self.in_ch * self.kernel * self.kernel {
            return Err(Error::shape(format!(
                "weights length {} does not match {}x{}x{}x{}",
                self.weights.len(),
                self.out_ch,
                self.in_ch,
                self.kernel,
                self.kernel
            )));
        }
        if self.bias.len() != self.out_ch {
            return Err(Error::shape(format!(
                "bias length {} does not match out_ch {}",
                self.bias.len(),
                self.out_ch
            )));
        }
        Ok(())
    }

    pub fn padding(&self) -> usize {
        self.dilation * (self.kernel - 1) / 2
    }

    /// Spatial output size for one input dimension.
    pub fn out_dim(&self, dim: usize) -> usize {
        let span = self.dilation * (self.kernel - 1) + 1;
        (dim + 2 * self.padding() - span) / self.stride + 1
    }

    #[inline]
    pub fn w_idx(&self, o: usize, c: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_ch + c) * self.kernel + ky) * self.kernel + kx
    }

    pub fn cast<U: Scalar>(&self) -> ConvParams<U> {
        ConvParams {
            out_ch: self.out_ch,
            in_ch: self.in_ch,
            kernel: self.kernel,
            stride: self.stride,
            dilation: self.dilation,
            weights: self.weights.iter().map(|v| U::from_f64_(v.to_f64_())).collect(),
            bias: self.bias.iter().map(|v| U::from_f64_(v.to_f64_())).collect(),
        }
    }
}

fn check_input<T: Scalar>(input: &Tensor<T>, p: &ConvParams<T>) -> Result<()> {
    p.validate()?;
    if input.channels != p.in_ch {
        return Err(Error::shape(format!(
            "input has {} channels, conv expects {}",
            input.channels, p.in_ch
        )));
    }
    Ok(())
}

/// Range of output positions whose sampled input position lands inside [0, dim).
/// Sampled position: out * stride + k * dilation - pad.
#[inline]
fn valid_out_range(out_dim: usize, dim: usize, stride: usize, offset: isize) -> (usize, usize) {
    // smallest out with out*stride + offset >= 0
    let lo = if offset >= 0 {
        0
    } else {
        ((-offset) as usize + stride - 1) / stride
    };
    // largest out with out*stride + offset <= dim - 1
    let max_pos = dim as isize - 1 - offset;
    if max_pos < 0 {
        return (1, 0); // empty
    }
    let hi = (max_pos as usize / stride).min(out_dim.saturating_sub(1));
    (lo.min(out_dim), hi)
}

/// Direct 2-D convolution (cross-correlation) with zero "same" padding.
pub fn conv2d_forward<T: Scalar>(input: &Tensor<T>, p: &ConvParams<T>) -> Result<Tensor<T>> {
    check_input(input, p)?;
    let out_h = p.out_dim(input.height);
    let out_w = p.out_dim(input.width);
    let pad = p.padding() as isize;
    let mut out = Tensor::zeros(p.out_ch, out_h, out_w);

    for o in 0..p.out_ch {
        for row in 0..out_h {
            let b = p.bias[o];
            out.row_mut(o, row).iter_mut().for_each(|v| *v = b);
        }
        for c in 0..p.in_ch {
            for ky in 0..p.kernel {
                let off_y = (ky * p.dilation) as isize - pad;
                let (oy_lo, oy_hi) = valid_out_range(out_h, input.height, p.stride, off_y);
                for kx in 0..p.kernel {
                    let w = p.weights[p.w_idx(o, c, ky, kx)];
                    if w == T::zero() && p.stride == 1 {
                        continue;
                    }
                    let off_x = (kx * p.dilation) as isize - pad;
                    let (ox_lo, ox_hi) = valid_out_range(out_w, input.width, p.stride, off_x);
                    if oy_lo > oy_hi || ox_lo > ox_hi {
                        continue;
                    }
                    for oy in oy_lo..=oy_hi {
                        let iy = (oy * p.stride) as isize + off_y;
                        let in_row = input.row(c, iy as usize);
                        let out_row = out.row_mut(o, oy);
                        if p.stride == 1 {
                            let ix0 = (ox_lo as isize + off_x) as usize;
                            let n = ox_hi - ox_lo + 1;
                            let src = &in_row[ix0..ix0 + n];
                            let dst = &mut out_row[ox_lo..ox_lo + n];
                            for (d, s) in dst.iter_mut().zip(src) {
                                *d += w * *s;
                            }
                        } else {
                            for ox in ox_lo..=ox_hi {
                                let ix = (ox * p.stride) as isize + off_x;
                                out_row[ox] += w * in_row[ix as usize];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of a convolution given the gradient of its output.
pub fn conv2d_backward<T: Scalar>(
    input: &Tensor<T>,
    p: &ConvParams<T>,
    grad_out: &Tensor<T>,
) -> Result<(Tensor<T>, ConvParams<T>)> {
    check_input(input, p)?;
    let out_h = p.out_dim(input.height);
    let out_w = p.out_dim(input.width);
    if grad_out.shape() != (p.out_ch, out_h, out_w) {
        return Err(Error::shape(format!(
            "grad_out shape {:?} does not match conv output ({}, {}, {})",
            grad_out.shape(),
            p.out_ch,
            out_h,
            out_w
        )));
    }
    let pad = p.padding() as isize;
    let mut grad_input = Tensor::zeros(input.channels, input.height, input.width);
    let mut grad_p = ConvParams::zeros(p.out_ch, p.in_ch, p.kernel, p.stride, p.dilation);

    for o in 0..p.out_ch {
        let mut gb = T::zero();
        for oy in 0..out_h {
            for &g in grad_out.row(o, oy) {
                gb += g;
            }
        }
        grad_p.bias[o] = gb;

        for c in 0..p.in_ch {
            for ky in 0..p.kernel {
                let off_y = (ky * p.dilation) as isize - pad;
                let (oy_lo, oy_hi) = valid_out_range(out_h, input.height, p.stride, off_y);
                for kx in 0..p.kernel {
                    let off_x = (kx * p.dilation) as isize - pad;
                    let (ox_lo, ox_hi) = valid_out_range(out_w, input.width, p.stride, off_x);
                    if oy_lo > oy_hi || ox_lo > ox_hi {
                        continue;
                    }
                    let w = p.weights[p.w_idx(o, c, ky, kx)];
                    let mut gw = T::zero();
                    for oy in oy_lo..=oy_hi {
                        let iy = ((oy * p.stride) as isize + off_y) as usize;
                        let g_row = grad_out.row(o, oy);
                        if p.stride == 1 {
                            let ix0 = (ox_lo as isize + off_x) as usize;
                            let n = ox_hi - ox_lo + 1;
                            let in_row = &input.row(c, iy)[ix0..ix0 + n];
                            let gi_row = &mut grad_input.row_mut(c, iy)[ix0..ix0 + n];
                            let g_seg = &g_row[ox_lo..ox_lo + n];
                            for ((gi, inp), g) in gi_row.iter_mut().zip(in_row).zip(g_seg) {
                                gw += *g * *inp;
                                *gi += w * *g;
                            }
                        } else {
                            for ox in ox_lo..=ox_hi {
                                let ix = ((ox * p.stride) as isize + off_x) as usize;
                                let g = g_row[ox];
                                gw += g * input.get(c, iy, ix);
                                let gi = grad_input.idx(c, iy, ix);
                                grad_input.data[gi] += w * g;
                            }
                        }
                    }
                    let wi = grad_p.w_idx(o, c, ky, kx);
                    grad_p.weights[wi] = gw;
                }
            }
        }
    }
    Ok((grad_input, grad_p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params<T: Scalar>(out_ch: usize, in_ch: usize, k: usize, w: Vec<T>, b: Vec<T>) -> ConvParams<T> {
        ConvParams {
            out_ch,
            in_ch,
            kernel: k,
            stride: 1,
            dilation: 1,
            weights: w,
            bias: b,
        }
    }

    #[test]
    fn identity_kernel_passes_input_through() {
        let input = Tensor::<f32>::from_vec(1, 3, 3, (1..=9).map(|v| v as f32).collect()).unwrap();
        let p = params(1, 1, 1, vec![1.0], vec![0.0]);
        let out = conv2d_forward(&input, &p).unwrap();
        assert_eq!(out.data, input.data);
    }

    #[test]
    fn ones_kernel_counts_overlap() {
        let input = Tensor::<f32>::filled(1, 5, 5, 1.0);
        let p = params(1, 1, 3, vec![1.0; 9], vec![0.0]);
        let out = conv2d_forward(&input, &p).unwrap();
        assert_eq!(out.get(0, 2, 2), 9.0);
        assert_eq!(out.get(0, 0, 0), 4.0);
        assert_eq!(out.get(0, 0, 2), 6.0);
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let input = Tensor::<f32>::zeros(2, 4, 4);
        let p = params(1, 3, 1, vec![0.0; 3], vec![0.0]);
        assert!(matches!(conv2d_forward(&input, &p), Err(Error::Shape(_))));
    }

    #[test]
    fn even_kernel_is_rejected() {
        let input = Tensor::<f32>::zeros(1, 4, 4);
        let p = params(1, 1, 2, vec![0.0; 4], vec![0.0]);
        assert!(conv2d_forward(&input, &p).is_err());
    }

    #[test]
    fn zero_grad_out_gives_zero_gradients() {
        let input = Tensor::<f32>::filled(2, 4, 4, 0.7);
        let mut p = ConvParams::zeros(3, 2, 3, 1, 1);
        p.weights.iter_mut().enumerate().for_each(|(i, w)| *w = i as f32 * 0.01);
        let grad_out = Tensor::zeros(3, 4, 4);
        let (gi, gp) = conv2d_backward(&input, &p, &grad_out).unwrap();
        assert!(gi.data.iter().all(|&v| v == 0.0));
        assert!(gp.weights.iter().all(|&v| v == 0.0));
        assert!(gp.bias.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_kernel_weight_grad_sums_input() {
        let input = Tensor::<f32>::from_vec(2, 2, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let p = params(1, 2, 1, vec![0.5, -0.5], vec![0.0]);
        let grad_out = Tensor::filled(1, 2, 2, 1.0);
        let (_, gp) = conv2d_backward(&input, &p, &grad_out).unwrap();
        assert_eq!(gp.weights[0], 10.0);
        assert_eq!(gp.weights[1], 26.0);
        assert_eq!(gp.bias[0], 4.0);
    }

    #[test]
    fn same_padding_preserves_size_at_any_dilation() {
        for d in [1usize, 2, 4, 8] {
            let input = Tensor::<f32>::zeros(1, 32, 32);
            let p = ConvParams::<f32>::zeros(1, 1, 5, 1, d);
            let out = conv2d_forward(&input, &p).unwrap();
            assert_eq!(out.shape(), (1, 32, 32), "dilation {d}");
        }
    }
}
