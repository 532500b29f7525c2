//! Separable 3D transform for block groups: orthonormal 2D DCT-II on each
//! block followed by an orthonormal multi-level Haar transform along the
//! stack. Both factors are orthonormal, so the inverse is the transpose and
//! energy is preserved.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone)]
pub struct GroupTransform {
    n: usize,
    /// Row-major DCT-II matrix, `dct[k * n + t]`.
    dct: Vec<f64>,
}

impl GroupTransform {
    pub fn new(block_size: usize) -> Self {
        let n = block_size;
        let mut dct = vec![0.0; n * n];
        for k in 0..n {
            let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
            for t in 0..n {
                dct[k * n + t] = scale * (PI * (2 * t + 1) as f64 * k as f64 / (2 * n) as f64).cos();
            }
        }
        Self { n, dct }
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    /// `C · B · Cᵀ` (forward) or `Cᵀ · B · C` (inverse) in place.
    fn dct2(&self, block: &mut [f64], tmp: &mut [f64], inverse: bool) {
        let n = self.n;
        let c = |a: usize, b: usize| if inverse { self.dct[b * n + a] } else { self.dct[a * n + b] };
        // rows: tmp[r][k] = Σ_t block[r][t] · c(k, t)
        for r in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for t in 0..n {
                    acc += block[r * n + t] * c(k, t);
                }
                tmp[r * n + k] = acc;
            }
        }
        // columns: block[k][col] = Σ_r c(k, r) · tmp[r][col]
        for k in 0..n {
            for col in 0..n {
                let mut acc = 0.0;
                for r in 0..n {
                    acc += c(k, r) * tmp[r * n + col];
                }
                block[k * n + col] = acc;
            }
        }
    }

    /// Transforms `count` blocks stored back to back. `count` must be a power
    /// of two.
    pub fn forward(&self, stack: &mut [f64], count: usize) {
        let len = self.n * self.n;
        assert!(count.is_power_of_two() && stack.len() == count * len);
        let mut tmp = vec![0.0; len];
        for b in stack.chunks_exact_mut(len) {
            self.dct2(b, &mut tmp, false);
        }
        haar_forward(stack, count, len);
    }

    pub fn inverse(&self, stack: &mut [f64], count: usize) {
        let len = self.n * self.n;
        assert!(count.is_power_of_two() && stack.len() == count * len);
        haar_inverse(stack, count, len);
        let mut tmp = vec![0.0; len];
        for b in stack.chunks_exact_mut(len) {
            self.dct2(b, &mut tmp, true);
        }
    }
}

/// Multi-level orthonormal Haar along the stack axis, applied independently
/// to each of the `len` coefficient positions. Output order per level:
/// approximations first, then details.
fn haar_forward(stack: &mut [f64], count: usize, len: usize) {
    let mut line = vec![0.0; count];
    let mut out = vec![0.0; count];
    for pos in 0..len {
        for (i, v) in line.iter_mut().enumerate() {
            *v = stack[i * len + pos];
        }
        let mut size = count;
        while size > 1 {
            let half = size / 2;
            for i in 0..half {
                let (a, b) = (line[2 * i], line[2 * i + 1]);
                out[i] = (a + b) * FRAC_1_SQRT_2;
                out[half + i] = (a - b) * FRAC_1_SQRT_2;
            }
            line[..size].copy_from_slice(&out[..size]);
            size = half;
        }
        for (i, v) in line.iter().enumerate() {
            stack[i * len + pos] = *v;
        }
    }
}

fn haar_inverse(stack: &mut [f64], count: usize, len: usize) {
    let mut line = vec![0.0; count];
    let mut out = vec![0.0; count];
    for pos in 0..len {
        for (i, v) in line.iter_mut().enumerate() {
            *v = stack[i * len + pos];
        }
        let mut size = 2;
        while size <= count {
            let half = size / 2;
            for i in 0..half {
                let (a, d) = (line[i], line[half + i]);
                out[2 * i] = (a + d) * FRAC_1_SQRT_2;
                out[2 * i + 1] = (a - d) * FRAC_1_SQRT_2;
            }
            line[..size].copy_from_slice(&out[..size]);
            size *= 2;
        }
        for (i, v) in line.iter().enumerate() {
            stack[i * len + pos] = *v;
        }
    }
}
