#![allow(dead_code)]

use blockade_core::hilbert::{DensityMatrix, HilbertSpace, OperatorMatrix};
use blockade_core::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn dense(op: &OperatorMatrix) -> DMatrix<C64> {
    DMatrix::from_column_slice(op.dim(), op.dim(), &op.to_dense())
}

pub fn dense_state(rho: &DensityMatrix) -> DMatrix<C64> {
    DMatrix::from_column_slice(rho.dim(), rho.dim(), rho.as_slice())
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn hermitian_spectrum(m: DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Restriction of `m` to the basis states selected by `keep`.
pub fn restrict(space: &HilbertSpace, m: &DMatrix<C64>, keep: impl Fn(&[usize]) -> bool) -> DMatrix<C64> {
    let idx: Vec<usize> = (0..space.total_dim()).filter(|&i| keep(&space.levels_of(i))).collect();
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// Random density matrix `A A† / Tr(A A†)` from a flat list of `2 d²` reals.
pub fn random_state(space: &HilbertSpace, raw: &[f64]) -> DensityMatrix {
    let d = space.total_dim();
    let a = DMatrix::from_fn(d, d, |i, j| C64::new(raw[2 * (i * d + j)], raw[2 * (i * d + j) + 1]));
    let m = &a * a.adjoint();
    let tr = m.trace();
    let m = m / tr;
    DensityMatrix::from_column_major(space, m.as_slice().to_vec()).unwrap()
}

/// Seeded generator shared by the randomized checks.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` uniform reals in `[-1, 1)`.
pub fn uniform_reals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
