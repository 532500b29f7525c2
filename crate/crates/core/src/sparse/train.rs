//! K-SVD dictionary update.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::dictionary::{dot, norm, Dictionary};
use super::omp::{OmpSolver, SparseCode};
use crate::error::{Error, Result};

/// Training signals, sparse codes and their residuals during one K-SVD run.
///
/// Residuals `r_i = y_i − D x_i` are kept up to date across atom updates so
/// each restricted error matrix `E_k` can be assembled from the patches that
/// use atom `k` without recomputing the full reconstruction.
#[derive(Debug, Clone)]
pub struct TrainState<'a> {
    signals: &'a [f64],
    len: usize,
    pub dict: Dictionary,
    pub codes: Vec<SparseCode>,
    residuals: Vec<f64>,
}

impl<'a> TrainState<'a> {
    /// `signals` holds `len`-sample training vectors back to back.
    pub fn new(signals: &'a [f64], dict: Dictionary) -> Self {
        let len = dict.atom_length();
        assert_eq!(signals.len() % len, 0);
        let count = signals.len() / len;
        Self {
            signals,
            len,
            dict,
            codes: vec![SparseCode::default(); count],
            residuals: signals.to_vec(),
        }
    }

    pub fn signal_count(&self) -> usize {
        self.signals.len() / self.len
    }

    fn signal(&self, i: usize) -> &[f64] {
        &self.signals[i * self.len..(i + 1) * self.len]
    }

    fn residual(&self, i: usize) -> &[f64] {
        &self.residuals[i * self.len..(i + 1) * self.len]
    }

    /// Σ‖y_i − D x_i‖² over all training signals.
    pub fn total_error(&self) -> f64 {
        self.residuals.iter().map(|v| v * v).sum()
    }

    /// Recomputes the total error from scratch (no cached residuals).
    pub fn total_error_recomputed(&self) -> f64 {
        let mut recon = vec![0.0; self.len];
        (0..self.signal_count())
            .map(|i| {
                let c = &self.codes[i];
                self.dict.synthesize(&c.support, &c.coefficients, &mut recon);
                self.signal(i)
                    .iter()
                    .zip(&recon)
                    .map(|(y, r)| (y - r) * (y - r))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Sparse-codes every training signal against the current dictionary.
    pub fn sparse_code(&mut self, epsilon: f64, max_atoms: usize) {
        let solver = OmpSolver::new(&self.dict);
        let len = self.len;
        self.codes = self
            .signals
            .par_chunks(len)
            .map(|y| solver.code(y, epsilon, max_atoms))
            .collect();
        let mut recon = vec![0.0; len];
        for i in 0..self.codes.len() {
            let c = &self.codes[i];
            self.dict.synthesize(&c.support, &c.coefficients, &mut recon);
            for t in 0..len {
                self.residuals[i * len + t] = self.signals[i * len + t] - recon[t];
            }
        }
    }

    /// Indices of signals whose code uses atom `k`, with the position of `k`
    /// inside each support.
    fn users(&self, k: usize) -> Vec<(usize, usize)> {
        self.codes
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.support.iter().position(|&a| a == k).map(|p| (i, p)))
            .collect()
    }

    /// Replaces atom `k` and its coefficient row by the leading singular pair
    /// of the restricted error matrix. Returns `false` if no signal uses `k`.
    pub fn update_atom(&mut self, k: usize) -> bool {
        let users = self.users(k);
        if users.is_empty() {
            return false;
        }
        let len = self.len;
        let m = users.len();
        let old: Vec<f64> = self.dict.atom(k).to_vec();

        // E_k columns: r_i + d_k x_{k,i}
        let mut e = vec![0.0; m * len];
        for (col, &(i, p)) in users.iter().enumerate() {
            let c = self.codes[i].coefficients[p];
            let r = self.residual(i);
            for t in 0..len {
                e[col * len + t] = r[t] + old[t] * c;
            }
        }

        let Some(mut u) = leading_left_singular(&e, len, m) else {
            // E_k is zero: atom k already explains its users exactly with x = 0
            for (col, &(i, p)) in users.iter().enumerate() {
                self.codes[i].coefficients[p] = 0.0;
                self.residuals[i * len..(i + 1) * len].copy_from_slice(&e[col * len..(col + 1) * len]);
            }
            return true;
        };
        if dot(&u, &old) < 0.0 {
            u.iter_mut().for_each(|v| *v = -*v);
        }

        for (col, &(i, p)) in users.iter().enumerate() {
            let ec = &e[col * len..(col + 1) * len];
            let x = dot(ec, &u);
            self.codes[i].coefficients[p] = x;
            for t in 0..len {
                self.residuals[i * len + t] = ec[t] - u[t] * x;
            }
        }
        self.dict.atom_mut(k).copy_from_slice(&u);
        true
    }

    /// Swaps unused atom `k` for the normalized training signal with the
    /// largest current error, provided that error exceeds `epsilon`.
    /// `taken` marks signals already used as replacements this sweep.
    pub fn replace_unused(&mut self, k: usize, epsilon: f64, taken: &mut [bool]) -> bool {
        let mut worst = None;
        let mut worst_err = epsilon;
        for i in 0..self.signal_count() {
            if taken[i] {
                continue;
            }
            let err = dot(self.residual(i), self.residual(i));
            if err > worst_err {
                worst_err = err;
                worst = Some(i);
            }
        }
        let Some(i) = worst else { return false };
        let y = self.signal(i).to_vec();
        let n = norm(&y);
        if n == 0.0 {
            return false;
        }
        taken[i] = true;
        self.dict
            .atom_mut(k)
            .iter_mut()
            .zip(&y)
            .for_each(|(a, v)| *a = v / n);
        true
    }

    /// One full K-SVD iteration: sparse coding then the atom sweep.
    pub fn iterate(&mut self, epsilon: f64, max_atoms: usize) {
        self.sparse_code(epsilon, max_atoms);
        let mut taken = vec![false; self.signal_count()];
        for k in 0..self.dict.n_atoms() {
            if !self.update_atom(k) {
                self.replace_unused(k, epsilon, &mut taken);
            }
        }
        self.dict.normalize();
    }
}

/// Leading left singular vector of the `len × m` column-major matrix `e`,
/// or `None` when `e` is zero.
fn leading_left_singular(e: &[f64], len: usize, m: usize) -> Option<Vec<f64>> {
    if e.iter().all(|&v| v == 0.0) {
        return None;
    }
    if m == 1 {
        let n = norm(e);
        return (n > 0.0).then(|| e.iter().map(|v| v / n).collect());
    }
    let mat = DMatrix::from_column_slice(len, m, e);
    let u = if m < len {
        // eigenvector of EᵀE gives v; u = E v / ‖E v‖
        let eig = SymmetricEigen::new(mat.transpose() * &mat);
        let idx = argmax(eig.eigenvalues.as_slice());
        let v = eig.eigenvectors.column(idx).into_owned();
        let u = &mat * v;
        u.as_slice().to_vec()
    } else {
        let eig = SymmetricEigen::new(&mat * mat.transpose());
        let idx = argmax(eig.eigenvalues.as_slice());
        eig.eigenvectors.column(idx).as_slice().to_vec()
    };
    let n = norm(&u);
    (n > 0.0 && n.is_finite()).then(|| u.iter().map(|v| v / n).collect())
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Runs exactly `iterations` K-SVD iterations from `dict0` on back-to-back
/// training signals.
pub fn train_dictionary(
    signals: &[f64],
    dict0: Dictionary,
    epsilon: f64,
    max_atoms: usize,
    iterations: usize,
) -> Result<Dictionary> {
    let len = dict0.atom_length();
    let count = signals.len() / len;
    if count < dict0.n_atoms() {
        return Err(Error::Training(format!(
            "{count} training patches for {} atoms",
            dict0.n_atoms()
        )));
    }
    let mut state = TrainState::new(signals, dict0);
    for _ in 0..iterations {
        state.iterate(epsilon, max_atoms);
    }
    Ok(state.dict)
}
