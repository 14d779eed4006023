//! Shared oracle helpers for integration tests.

use vicnn::engine::ConvParams;
use vicnn::tensor::Tensor;

/// Quadruple-loop reference convolution in f64. Deliberately written with no
/// shortcuts so it can serve as the independent oracle for the engine's
/// convolution: zero padding of dilation*(k-1)/2, then a literal translation
/// of out[o,y,x] = b[o] + sum w[o,c,i,j] * in[c, y*s - p + i*d, x*s - p + j*d].
pub fn naive_conv(input: &Tensor<f64>, p: &ConvParams<f64>) -> Tensor<f64> {
    let pad = p.padding() as isize;
    let oh = p.out_dim(input.height);
    let ow = p.out_dim(input.width);
    let mut out = Tensor::zeros(p.out_ch, oh, ow);
    for o in 0..p.out_ch {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = p.bias[o];
                for c in 0..p.in_ch {
                    for ky in 0..p.kernel {
                        for kx in 0..p.kernel {
                            let iy = (oy * p.stride + ky * p.dilation) as isize - pad;
                            let ix = (ox * p.stride + kx * p.dilation) as isize - pad;
                            if iy >= 0
                                && ix >= 0
                                && (iy as usize) < input.height
                                && (ix as usize) < input.width
                            {
                                acc += input.get(c, iy as usize, ix as usize)
                                    * p.weights[p.w_idx(o, c, ky, kx)];
                            }
                        }
                    }
                }
                out.set(o, oy, ox, acc);
            }
        }
    }
    out
}
