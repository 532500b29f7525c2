use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column-normalized atom matrix, stored atom-major (each atom contiguous).
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atom_length: usize,
    n_atoms: usize,
    atoms: Vec<f64>,
}

impl Dictionary {
    /// Builds a dictionary from atom-major data, normalizing every atom.
    pub fn from_atoms(atom_length: usize, n_atoms: usize, atoms: Vec<f64>) -> Result<Self> {
        if atom_length == 0 || n_atoms == 0 || atoms.len() != atom_length * n_atoms {
            return Err(Error::InvalidParameter(format!(
                "dictionary data of length {} is not {atom_length}x{n_atoms}",
                atoms.len()
            )));
        }
        let mut d = Self {
            atom_length,
            n_atoms,
            atoms,
        };
        for k in 0..n_atoms {
            if norm(d.atom(k)) == 0.0 {
                return Err(Error::InvalidParameter(format!("atom {k} is zero")));
            }
        }
        d.normalize();
        Ok(d)
    }

    pub fn atom_length(&self) -> usize {
        self.atom_length
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn atom(&self, k: usize) -> &[f64] {
        &self.atoms[k * self.atom_length..(k + 1) * self.atom_length]
    }

    pub(crate) fn atom_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.atoms[k * self.atom_length..(k + 1) * self.atom_length]
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn normalize(&mut self) {
        for k in 0..self.n_atoms {
            let a = self.atom_mut(k);
            let n = norm(a);
            if n > 0.0 {
                a.iter_mut().for_each(|v| *v /= n);
            }
        }
    }

    /// `Dᵀ D`, row-major `K × K`.
    pub fn gram(&self) -> Vec<f64> {
        let k = self.n_atoms;
        let mut g = vec![0.0; k * k];
        for i in 0..k {
            for j in i..k {
                let v = dot(self.atom(i), self.atom(j));
                g[i * k + j] = v;
                g[j * k + i] = v;
            }
        }
        g
    }

    /// `D x` for a sparse `x` given as `(atom, coefficient)` pairs.
    pub fn synthesize(&self, support: &[usize], coefficients: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (&k, &c) in support.iter().zip(coefficients) {
            for (o, a) in out.iter_mut().zip(self.atom(k)) {
                *o += c * a;
            }
        }
    }

    /// Writes `<path>` as little-endian `f64` atoms (atom-major) and
    /// `<path>.json` describing the layout.
    pub fn dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut raw = Vec::with_capacity(self.atoms.len() * 8);
        for v in &self.atoms {
            raw.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, raw).map_err(|e| Error::io(path, e))?;
        let header = DictionaryHeader {
            atom_length: self.atom_length,
            n_atoms: self.n_atoms,
            dtype: "f64le".into(),
            layout: "atom-major".into(),
        };
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".json");
        let json = serde_json::to_string_pretty(&header).expect("header serializes");
        fs::write(&sidecar, json).map_err(|e| Error::io(sidecar, e))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DictionaryHeader {
    atom_length: usize,
    n_atoms: usize,
    dtype: String,
    layout: String,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Separable overcomplete DCT: `K` atoms of `n × n` pixels, `√K` cosines per
/// axis sampled at `n` points. Non-constant 1D factors are mean-removed before
/// the outer product; every atom is then normalized. Atom 0 is the constant
/// `1/n` patch.
pub fn build_overcomplete_dct(patch_size: usize, n_atoms: usize) -> Result<Dictionary> {
    let per_axis = (n_atoms as f64).sqrt().round() as usize;
    if per_axis * per_axis != n_atoms {
        return Err(Error::InvalidParameter(format!(
            "atom count {n_atoms} is not a perfect square"
        )));
    }
    if patch_size == 0 || n_atoms < patch_size * patch_size {
        return Err(Error::InvalidParameter(format!(
            "{n_atoms} atoms cannot span {patch_size}x{patch_size} patches"
        )));
    }
    let n = patch_size;
    let mut basis = vec![vec![0.0; n]; per_axis];
    for (k, col) in basis.iter_mut().enumerate() {
        for (t, v) in col.iter_mut().enumerate() {
            *v = (PI * (k * t) as f64 / per_axis as f64).cos();
        }
        if k > 0 {
            let mean = col.iter().sum::<f64>() / n as f64;
            col.iter_mut().for_each(|v| *v -= mean);
        }
    }
    // atom index = i * per_axis + j, pixel (r, c) = basis[i][r] * basis[j][c]
    let mut atoms = Vec::with_capacity(n * n * n_atoms);
    for bi in &basis {
        for bj in &basis {
            for &r in bi {
                for &c in bj {
                    atoms.push(r * c);
                }
            }
        }
    }
    Dictionary::from_atoms(n * n, n_atoms, atoms)
}
