//! Orthogonal matching pursuit using the precomputed Gram matrix
//! (Batch-OMP): correlations are updated as `Dᵀy − G_S x_S` and the
//! least-squares refit uses an incrementally grown Cholesky factor of `G_SS`.

use super::dictionary::{dot, Dictionary};

/// Below this squared pivot the new atom is considered linearly dependent on
/// the current support.
const SINGULAR_PIVOT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseCode {
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Euclidean norm of `signal − D x`.
    pub residual_norm: f64,
}

/// Reusable OMP state for one dictionary.
#[derive(Debug, Clone)]
pub struct OmpSolver<'a> {
    dict: &'a Dictionary,
    gram: Vec<f64>,
}

impl<'a> OmpSolver<'a> {
    pub fn new(dict: &'a Dictionary) -> Self {
        Self {
            dict,
            gram: dict.gram(),
        }
    }

    pub fn dictionary(&self) -> &Dictionary {
        self.dict
    }

    /// Greedy sparse code of `signal`: stops once `‖residual‖² ≤ epsilon` or
    /// the support reaches `max_atoms`. Ties go to the lowest atom index.
    pub fn code(&self, signal: &[f64], epsilon: f64, max_atoms: usize) -> SparseCode {
        let k_atoms = self.dict.n_atoms();
        let n = self.dict.atom_length();
        assert_eq!(signal.len(), n, "signal length must equal atom length");

        let energy = dot(signal, signal);
        let alpha0: Vec<f64> = (0..k_atoms).map(|k| dot(self.dict.atom(k), signal)).collect();
        let mut alpha = alpha0.clone();
        let max_atoms = max_atoms.min(k_atoms).min(n);

        let mut support: Vec<usize> = Vec::with_capacity(max_atoms);
        let mut selected = vec![false; k_atoms];
        // lower-triangular Cholesky factor of G_SS, row-major max_atoms × max_atoms
        let mut chol = vec![0.0; max_atoms * max_atoms];
        let mut x: Vec<f64> = Vec::new();
        let mut err = energy;

        while err > epsilon && support.len() < max_atoms {
            let mut best = usize::MAX;
            let mut best_abs = 0.0;
            for (k, a) in alpha.iter().enumerate() {
                if !selected[k] && a.abs() > best_abs {
                    best_abs = a.abs();
                    best = k;
                }
            }
            if best == usize::MAX || best_abs <= 1e-12 * energy.sqrt() {
                break;
            }

            let s = support.len();
            let g_row = &self.gram[best * k_atoms..(best + 1) * k_atoms];
            if s > 0 {
                // solve L w = G_{S, best}
                let mut w = vec![0.0; s];
                for i in 0..s {
                    let mut v = g_row[support[i]];
                    for j in 0..i {
                        v -= chol[i * max_atoms + j] * w[j];
                    }
                    w[i] = v / chol[i * max_atoms + i];
                }
                let pivot = g_row[best] - dot(&w, &w);
                if pivot <= SINGULAR_PIVOT {
                    break;
                }
                chol[s * max_atoms..s * max_atoms + s].copy_from_slice(&w);
                chol[s * max_atoms + s] = pivot.sqrt();
            } else {
                chol[0] = g_row[best].sqrt();
            }
            support.push(best);
            selected[best] = true;

            // x = (L Lᵀ)⁻¹ alpha0_S
            let m = support.len();
            let mut y = vec![0.0; m];
            for i in 0..m {
                let mut v = alpha0[support[i]];
                for j in 0..i {
                    v -= chol[i * max_atoms + j] * y[j];
                }
                y[i] = v / chol[i * max_atoms + i];
            }
            x = vec![0.0; m];
            for i in (0..m).rev() {
                let mut v = y[i];
                for j in i + 1..m {
                    v -= chol[j * max_atoms + i] * x[j];
                }
                x[i] = v / chol[i * max_atoms + i];
            }

            // alpha = alpha0 − G_{:,S} x
            alpha.copy_from_slice(&alpha0);
            for (&k, &c) in support.iter().zip(&x) {
                let row = &self.gram[k * k_atoms..(k + 1) * k_atoms];
                for (a, g) in alpha.iter_mut().zip(row) {
                    *a -= c * g;
                }
            }
            let explained: f64 = support.iter().zip(&x).map(|(&k, &c)| c * alpha0[k]).sum();
            err = energy - explained;
        }

        let mut recon = vec![0.0; n];
        self.dict.synthesize(&support, &x, &mut recon);
        let residual_norm = signal
            .iter()
            .zip(&recon)
            .map(|(s, r)| (s - r) * (s - r))
            .sum::<f64>()
            .sqrt();
        SparseCode {
            support,
            coefficients: x,
            residual_norm,
        }
    }
}

/// One-shot OMP; builds the Gram matrix on every call.
pub fn omp(dict: &Dictionary, signal: &[f64], epsilon: f64, max_atoms: usize) -> SparseCode {
    OmpSolver::new(dict).code(signal, epsilon, max_atoms)
}
