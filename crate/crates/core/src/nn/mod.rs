//! Neural layers with exact forward and backward passes.
//!
//! Spatial tensors are laid out `[channels, d0, d1, d2]`; for video patches
//! the three spatial axes are `(height, width, frames)`. One-dimensional
//! layers reuse the same kernels with `d1 = d2 = 1`.

mod activation;
mod conv;
mod dense;
mod pool;
pub mod serialize;

pub use activation::{cross_entropy, relu_backward, relu_forward, softmax, PROB_CLIP};
pub use conv::{
    conv1d_backward, conv1d_forward, conv3d_backward, conv3d_forward, ConvGrads, ConvLayer,
};
pub use dense::{dense_backward, dense_forward, DenseGrads, DenseLayer};
pub use pool::{maxpool3d_backward, maxpool3d_forward, PoolSpec};

pub(crate) use conv::conv3d_backward_with;

/// `c = a·b + beta·c` on row-major buffers, where `a` is logically `[m, k]`
/// and `b` is `[k, n]`. A `*_t` flag means the buffer holds the transpose.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if a_t { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_t { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the asserts above bound every index the kernel touches given
    // these strides, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::gemm;

    fn naive(m: usize, k: usize, n: usize, a: &[f64], a_t: bool, b: &[f64], b_t: bool) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for p in 0..k {
                    let av = if a_t { a[p * m + i] } else { a[i * k + p] };
                    let bv = if b_t { b[j * k + p] } else { b[p * n + j] };
                    c[i * n + j] += av * bv;
                }
            }
        }
        c
    }

    #[test]
    fn gemm_transposes_agree_with_naive() {
        let (m, k, n) = (3, 5, 4);
        let a: Vec<f64> = (0..m * k).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..k * n).map(|i| (i as f64 * 0.91).cos()).collect();
        for &(a_t, b_t) in &[(false, false), (true, false), (false, true), (true, true)] {
            let mut c = vec![0.0; m * n];
            gemm(m, k, n, &a, a_t, &b, b_t, 0.0, &mut c);
            let expect = naive(m, k, n, &a, a_t, &b, b_t);
            for (x, y) in c.iter().zip(&expect) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
