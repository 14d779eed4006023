use crate::error::{Error, Result};
use crate::tensor::{Scalar, Tensor};

pub fn sigmoid<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    input.map(|x| T::one() / (T::one() + (-x).exp()))
}

/// Backward through sigmoid given its *output* s: ds/dx = s * (1 - s).
pub fn sigmoid_backward<T: Scalar>(output: &Tensor<T>, grad_out: &Tensor<T>) -> Tensor<T> {
    let mut g = grad_out.clone();
    for (gv, &s) in g.data.iter_mut().zip(&output.data) {
        *gv = *gv * s * (T::one() - s);
    }
    g
}

pub fn relu<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    input.map(|x| if x > T::zero() { x } else { T::zero() })
}

/// Backward through relu given its *input*; the subgradient at 0 is 0.
pub fn relu_backward<T: Scalar>(input: &Tensor<T>, grad_out: &Tensor<T>) -> Tensor<T> {
    let mut g = grad_out.clone();
    for (gv, &x) in g.data.iter_mut().zip(&input.data) {
        if x <= T::zero() {
            *gv = T::zero();
        }
    }
    g
}

/// 2x2 max pooling with stride 2. Returns the pooled tensor and the flat
/// input index of each window maximum (first occurrence on ties).
pub fn maxpool2<T: Scalar>(input: &Tensor<T>) -> Result<(Tensor<T>, Vec<usize>)> {
    if input.height % 2 != 0 || input.width % 2 != 0 {
        return Err(Error::shape(format!(
            "maxpool2 needs even spatial dims, got {}x{}",
            input.height, input.width
        )));
    }
    let (c_n, out_h, out_w) = (input.channels, input.height / 2, input.width / 2);
    let mut out = Tensor::zeros(c_n, out_h, out_w);
    let mut argmax = vec![0usize; c_n * out_h * out_w];
    for c in 0..c_n {
        for oy in 0..out_h {
            for ox in 0..out_w {
                let mut best = input.get(c, 2 * oy, 2 * ox);
                let mut best_idx = input.idx(c, 2 * oy, 2 * ox);
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let v = input.get(c, 2 * oy + dy, 2 * ox + dx);
                    if v > best {
                        best = v;
                        best_idx = input.idx(c, 2 * oy + dy, 2 * ox + dx);
                    }
                }
                let oi = out.idx(c, oy, ox);
                out.data[oi] = best;
                argmax[oi] = best_idx;
            }
        }
    }
    Ok((out, argmax))
}

/// Routes each output gradient back to the stored argmax position.
pub fn maxpool2_backward<T: Scalar>(
    input_shape: (usize, usize, usize),
    argmax: &[usize],
    grad_out: &Tensor<T>,
) -> Tensor<T> {
    let mut grad_input = Tensor::zeros(input_shape.0, input_shape.1, input_shape.2);
    for (i, &src) in argmax.iter().enumerate() {
        grad_input.data[src] += grad_out.data[i];
    }
    grad_input
}

/// Nearest-neighbor 2x upsampling: each pixel becomes a 2x2 block.
pub fn upsample_nearest2<T: Scalar>(input: &Tensor<T>) -> Tensor<T> {
    let mut out = Tensor::zeros(input.channels, input.height * 2, input.width * 2);
    for c in 0..input.channels {
        for y in 0..input.height {
            for x in 0..input.width {
                let v = input.get(c, y, x);
                out.set(c, 2 * y, 2 * x, v);
                out.set(c, 2 * y, 2 * x + 1, v);
                out.set(c, 2 * y + 1, 2 * x, v);
                out.set(c, 2 * y + 1, 2 * x + 1, v);
            }
        }
    }
    out
}

/// Backward of nearest upsampling: sum each 2x2 block of the incoming gradient.
pub fn upsample_nearest2_backward<T: Scalar>(grad_out: &Tensor<T>) -> Result<Tensor<T>> {
    if grad_out.height % 2 != 0 || grad_out.width % 2 != 0 {
        return Err(Error::shape("upsample backward needs even grad dims".to_string()));
    }
    let mut grad_input = Tensor::zeros(grad_out.channels, grad_out.height / 2, grad_out.width / 2);
    for c in 0..grad_input.channels {
        for y in 0..grad_input.height {
            for x in 0..grad_input.width {
                let g = grad_out.get(c, 2 * y, 2 * x)
                    + grad_out.get(c, 2 * y, 2 * x + 1)
                    + grad_out.get(c, 2 * y + 1, 2 * x)
                    + grad_out.get(c, 2 * y + 1, 2 * x + 1);
                grad_input.set(c, y, x, g);
            }
        }
    }
    Ok(grad_input)
}

/// Elementwise sum of two same-shaped tensors.
pub fn residual_add<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    a.check_same_shape(b, "residual_add")?;
    let mut out = a.clone();
    for (o, &bv) in out.data.iter_mut().zip(&b.data) {
        *o += bv;
    }
    Ok(out)
}

/// Mean squared error and its gradient w.r.t. the prediction.
/// The scalar is accumulated in f64 regardless of the working precision.
pub fn mse_loss<T: Scalar>(prediction: &Tensor<T>, target: &Tensor<T>) -> Result<(f64, Tensor<T>)> {
    prediction.check_same_shape(target, "mse_loss")?;
    let n = prediction.len();
    let inv_n = T::from_f64_(1.0 / n as f64);
    let two = T::from_f64_(2.0);
    let mut sum = 0.0f64;
    let mut grad = Tensor::zeros(prediction.channels, prediction.height, prediction.width);
    for i in 0..n {
        let d = prediction.data[i] - target.data[i];
        sum += d.to_f64_() * d.to_f64_();
        grad.data[i] = two * d * inv_n;
    }
    Ok((sum / n as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_of_zero_is_half() {
        let t = Tensor::<f32>::zeros(1, 1, 1);
        assert_eq!(sigmoid(&t).data[0], 0.5);
    }

    #[test]
    fn sigmoid_saturates_with_vanishing_gradient() {
        let t = Tensor::<f64>::filled(1, 1, 1, 50.0);
        let s = sigmoid(&t);
        assert!((s.data[0] - 1.0).abs() < 1e-12);
        let g = sigmoid_backward(&s, &Tensor::filled(1, 1, 1, 1.0));
        assert!(g.data[0].abs() < 1e-12);
    }

    #[test]
    fn relu_clips_negatives() {
        let t = Tensor::<f32>::from_vec(1, 1, 2, vec![-1.0, 2.0]).unwrap();
        assert_eq!(relu(&t).data, vec![0.0, 2.0]);
        let g = relu_backward(&t, &Tensor::filled(1, 1, 2, 3.0));
        assert_eq!(g.data, vec![0.0, 3.0]);
    }

    #[test]
    fn maxpool_constant_tensor_quarter_size() {
        let t = Tensor::<f32>::filled(2, 4, 6, 0.3);
        let (out, _) = maxpool2(&t).unwrap();
        assert_eq!(out.shape(), (2, 2, 3));
        assert!(out.data.iter().all(|&v| v == 0.3));
    }

    #[test]
    fn maxpool_takes_window_max() {
        let t = Tensor::<f32>::from_vec(1, 2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let (out, argmax) = maxpool2(&t).unwrap();
        assert_eq!(out.data, vec![4.0]);
        assert_eq!(argmax, vec![3]);
        let g = maxpool2_backward((1, 2, 2), &argmax, &Tensor::filled(1, 1, 1, 5.0));
        assert_eq!(g.data, vec![0.0, 0.0, 0.0, 5.0]);
    }

    #[test]
    fn maxpool_rejects_odd_dims() {
        assert!(maxpool2(&Tensor::<f32>::zeros(1, 3, 4)).is_err());
        assert!(maxpool2(&Tensor::<f32>::zeros(1, 4, 5)).is_err());
    }

    #[test]
    fn upsample_replicates_pixel() {
        let t = Tensor::<f32>::filled(1, 1, 1, 7.0);
        let up = upsample_nearest2(&t);
        assert_eq!(up.shape(), (1, 2, 2));
        assert!(up.data.iter().all(|&v| v == 7.0));
    }

    #[test]
    fn upsample_after_pool_is_identity_on_block_constant() {
        let mut t = Tensor::<f32>::zeros(1, 4, 4);
        for y in 0..4 {
            for x in 0..4 {
                t.set(0, y, x, (y / 2 * 2 + x / 2) as f32);
            }
        }
        let (pooled, _) = maxpool2(&t).unwrap();
        let up = upsample_nearest2(&pooled);
        assert_eq!(up.data, t.data);
    }

    #[test]
    fn residual_add_is_commutative_and_passes_gradient() {
        let a = Tensor::<f32>::from_vec(1, 1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        let b = Tensor::<f32>::from_vec(1, 1, 3, vec![0.5, -1.0, 2.0]).unwrap();
        assert_eq!(residual_add(&a, &b).unwrap().data, residual_add(&b, &a).unwrap().data);
        let zero = Tensor::<f32>::zeros(1, 1, 3);
        assert_eq!(residual_add(&a, &zero).unwrap().data, a.data);
        assert!(residual_add(&a, &Tensor::<f32>::zeros(1, 1, 4)).is_err());
    }

    #[test]
    fn mse_of_identical_tensors_is_zero() {
        let a = Tensor::<f32>::filled(1, 2, 2, 0.25);
        let (loss, grad) = mse_loss(&a, &a).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mse_of_unit_offset_is_one() {
        let a = Tensor::<f32>::filled(2, 3, 3, 1.5);
        let b = Tensor::<f32>::filled(2, 3, 3, 0.5);
        let (loss, grad) = mse_loss(&a, &b).unwrap();
        assert!((loss - 1.0).abs() < 1e-12);
        let n = a.len() as f32;
        assert!(grad.data.iter().all(|&g| (g - 2.0 / n).abs() < 1e-7));
    }
}
