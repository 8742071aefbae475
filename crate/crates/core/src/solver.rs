//! Lindblad master equation in superoperator form.
//!
//! Density matrices are vectorised column-major, `vec(ρ)[i + D·j] = ρ_ij`, so
//! that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. The generator
//!
//! ```text
//! ρ̇ = -i[H, ρ] + Σ_k r_k (c_k ρ c_k† - ½{c_k†c_k, ρ})
//! ```
//!
//! is assembled as `K ρ + ρ K† + Σ_k r_k c_k ρ c_k†` with the effective
//! non-Hermitian generator `K = -iH - ½ Σ_k r_k c_k†c_k`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::hilbert::{DensityMatrix, HilbertSpace, OperatorMatrix, StateTolerance};
use crate::model::Collapse;
use crate::{Error, Result, C64, I};

/// Hermiticity tolerance on the Hamiltonian passed to [`build_liouvillian`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Steady-state residual bound relative to the largest generator entry.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;
/// Iterative-refinement passes after the LU solve.
pub const REFINEMENT_STEPS: usize = 2;
/// Default bound on `h · ‖L‖_∞` for [`evolve`].
pub const DEFAULT_STEP_FACTOR: f64 = 0.01;
/// Upper limit on RK4 steps between two consecutive output times.
pub const MAX_STEPS_PER_INTERVAL: u64 = 200_000_000;

/// Sparse `D² × D²` generator of the master equation, stored column-major.
#[derive(Clone)]
pub struct Liouvillian {
    space: HilbertSpace,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
    max_abs: f64,
    inf_norm: f64,
}

impl core::fmt::Debug for Liouvillian {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Liouvillian")
            .field("space", &self.space)
            .field("nnz", &self.values.len())
            .field("max_abs", &self.max_abs)
            .finish()
    }
}

/// Assembles the generator for Hamiltonian `h` and Lindblad channels.
pub fn build_liouvillian(h: &OperatorMatrix, collapses: &[Collapse]) -> Result<Liouvillian> {
    let space = h.space().clone();
    for c in collapses {
        if !c.op.space().same_as(&space) {
            return Err(Error::SpaceMismatch);
        }
        if !(c.rate.is_finite() && c.rate >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "rate",
                reason: format!("collapse rate {} must be finite and non-negative", c.rate),
            });
        }
    }
    let residual = h.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian { residual });
    }

    let d = space.total_dim();
    let mut effective = h.scale(-I);
    for c in collapses {
        let decay = &c.op.adjoint() * &c.op;
        effective = &effective - &decay.scale(C64::new(0.5 * c.rate, 0.0));
    }

    let mut entries: Vec<(usize, usize, C64)> = Vec::new();
    // K ρ: (i, j) <- (k, j) with K_ik
    for (i, k, v) in effective.iter() {
        for j in 0..d {
            entries.push((i + d * j, k + d * j, v));
        }
    }
    // ρ K†: (i, j) <- (i, k) with (K†)_kj = conj(K_jk)
    for (j, k, v) in effective.iter() {
        let v = v.conj();
        for i in 0..d {
            entries.push((i + d * j, i + d * k, v));
        }
    }
    // r c ρ c†: (i, j) <- (k, l) with r c_ik conj(c_jl)
    for c in collapses {
        let ops: Vec<_> = c.op.iter().collect();
        for &(i, k, a) in &ops {
            for &(j, l, b) in &ops {
                entries.push((i + d * j, k + d * l, a * b.conj() * c.rate));
            }
        }
    }
    Ok(Liouvillian::from_entries(space, entries))
}

impl Liouvillian {
    fn from_entries(space: HilbertSpace, mut entries: Vec<(usize, usize, C64)>) -> Self {
        let n = space.total_dim() * space.total_dim();
        entries.sort_unstable_by_key(|e| (e.1, e.0));
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut row_sums = vec![0.0f64; n];
        let mut max_abs = 0.0f64;
        for (r, v) in row_idx.iter().zip(&values) {
            let a = v.norm();
            row_sums[*r] += a;
            max_abs = max_abs.max(a);
        }
        let inf_norm = row_sums.into_iter().fold(0.0, f64::max);
        Self {
            space,
            col_ptr,
            row_idx,
            values,
            max_abs,
            inf_norm,
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    /// Side length `D²` of the superoperator.
    pub fn size(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.inf_norm
    }

    /// Stored entries as `(row, col, value)`, column by column.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.size()).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    /// `out = L x`.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (c, &xc) in x.iter().enumerate() {
            if xc == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                out[self.row_idx[k]] += self.values[k] * xc;
            }
        }
    }

    /// `L vec(ρ)` as a column-major matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Vec<C64>> {
        if !rho.space().same_as(&self.space) {
            return Err(Error::SpaceMismatch);
        }
        let mut out = vec![C64::new(0.0, 0.0); self.size()];
        self.apply_into(rho.as_slice(), &mut out);
        Ok(out)
    }

    /// `max |vec(I)ᵀ L|`, zero for a trace-preserving generator.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.space.total_dim();
        (0..self.size())
            .map(|c| {
                (self.col_ptr[c]..self.col_ptr[c + 1])
                    .filter(|&k| self.row_idx[k] % (d + 1) == 0)
                    .map(|k| self.values[k])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Unique unit-trace fixed point of `L`.
///
/// The first row of `L` (the equation for `ρ̇₀₀`) is replaced by the trace
/// functional and the resulting nonsingular system is solved by sparse LU.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let d = l.space.total_dim();
    let n = l.size();
    let mut triplets: Vec<Triplet<usize, usize, C64>> = l
        .entries()
        .filter(|(r, _, _)| *r != 0)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    triplets.extend((0..d).map(|i| Triplet::new(0, i * (d + 1), C64::new(1.0, 0.0))));
    let a = SparseColMat::<usize, C64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::SingularSystem(format!("assembly: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("factorisation: {e:?}")))?;
    let mut rhs = faer::Mat::<C64>::zeros(n, 1);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    lu.solve_in_place(rhs.as_mut());

    let mut x: Vec<C64> = (0..n).map(|k| rhs[(k, 0)]).collect();
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::SingularSystem("non-finite solution".into()));
    }
    // Iterative refinement with the same factors. Weakly driven points have
    // populations near 1e-13 whose relative accuracy this recovers.
    let mut lx = vec![C64::new(0.0, 0.0); n];
    for _ in 0..REFINEMENT_STEPS {
        l.apply_into(&x, &mut lx);
        let trace: C64 = (0..d).map(|i| x[i * (d + 1)]).sum();
        for k in 1..n {
            rhs[(k, 0)] = -lx[k];
        }
        rhs[(0, 0)] = C64::new(1.0, 0.0) - trace;
        lu.solve_in_place(rhs.as_mut());
        for (k, v) in x.iter_mut().enumerate() {
            *v += rhs[(k, 0)];
        }
    }
    let trace: C64 = (0..d).map(|i| x[i * (d + 1)]).sum();
    if trace.norm() == 0.0 {
        return Err(Error::SingularSystem("zero-trace solution".into()));
    }
    x.iter_mut().for_each(|v| *v /= trace);

    l.apply_into(&x, &mut lx);
    let residual = lx.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tolerance = STEADY_RESIDUAL_TOL * l.max_abs;
    if !(residual <= tolerance) {
        return Err(Error::ResidualTooLarge { residual, tolerance });
    }
    let rho = DensityMatrix::from_column_major(&l.space, x)?;
    rho.validate(&StateTolerance::default())?;
    Ok(rho)
}

/// Settings for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Step bound `h ≤ step_factor / ‖L‖_∞`.
    pub step_factor: f64,
    /// Tolerances checked on every returned state.
    pub tolerance: StateTolerance,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            step_factor: DEFAULT_STEP_FACTOR,
            tolerance: StateTolerance {
                trace: 1e-8,
                ..StateTolerance::default()
            },
        }
    }
}

/// `ρ(t)` for every `t` in `t_grid`, starting from `rho0` at `t = 0`.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    evolve_with(rho0, l, t_grid, &EvolveOptions::default())
}

/// Fixed-step classical RK4 on `vec(ρ)`. Each interval between output times
/// is split into equal steps no longer than `step_factor / ‖L‖_∞`.
pub fn evolve_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    if !rho0.space().same_as(&l.space) {
        return Err(Error::SpaceMismatch);
    }
    if let Some(&t0) = t_grid.first() {
        if !(t0 >= 0.0) {
            return Err(Error::Integration(format!("first time {t0} is negative")));
        }
    }
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Integration("time grid must be finite and ascending".into()));
    }
    if !(opts.step_factor > 0.0) {
        return Err(Error::Integration("step factor must be positive".into()));
    }
    let h_max = if l.inf_norm > 0.0 {
        opts.step_factor / l.inf_norm
    } else {
        f64::INFINITY
    };

    let n = l.size();
    let mut x = rho0.as_slice().to_vec();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    let mut out = Vec::with_capacity(t_grid.len());
    let mut t = 0.0;
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0);
            if steps > MAX_STEPS_PER_INTERVAL as f64 {
                return Err(Error::Integration(format!(
                    "step-size underflow: {steps:e} steps needed for interval {span:e}"
                )));
            }
            let steps = steps as u64;
            let h = span / steps as f64;
            if h <= f64::EPSILON * target.abs() {
                return Err(Error::Integration(format!("step-size underflow at t = {target}")));
            }
            for _ in 0..steps {
                l.apply_into(&x, &mut k1);
                axpy_into(&x, &k1, 0.5 * h, &mut tmp);
                l.apply_into(&tmp, &mut k2);
                axpy_into(&x, &k2, 0.5 * h, &mut tmp);
                l.apply_into(&tmp, &mut k3);
                axpy_into(&x, &k3, h, &mut tmp);
                l.apply_into(&tmp, &mut k4);
                let w = h / 6.0;
                for i in 0..n {
                    x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
                }
            }
            if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Integration(format!(
                    "non-finite state at t = {target} (h = {h:e}, ‖L‖∞ = {:e})",
                    l.inf_norm
                )));
            }
        }
        t = target;
        let rho = DensityMatrix::from_column_major(&l.space, x.clone())?;
        rho.validate(&opts.tolerance)
            .map_err(|e| Error::InvalidState(format!("at t = {target}: {e}")))?;
        out.push(rho);
    }
    Ok(out)
}

fn axpy_into(x: &[C64], k: &[C64], a: f64, out: &mut [C64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + ki * a;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{lowering, number, FactorKind};

    fn boson(cutoff: usize) -> HilbertSpace {
        HilbertSpace::new([("m", FactorKind::Boson { cutoff })]).unwrap()
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn single_phonon_decay_generator() {
        let s = boson(3);
        let b = lowering(&s, "m").unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(&s), &[Collapse { rate: 1.0, op: b }]).unwrap();
        let rho = DensityMatrix::basis_state(&s, &[1]).unwrap();
        let out = l.apply(&rho).unwrap();
        let d = 4;
        for j in 0..d {
            for i in 0..d {
                let expected = match (i, j) {
                    (0, 0) => c(1.0),
                    (1, 1) => c(-1.0),
                    _ => c(0.0),
                };
                assert!((out[i + d * j] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn free_rotation_of_coherence() {
        let s = boson(2);
        let delta = 0.7;
        let h = delta * &number(&s, "m").unwrap();
        let l = build_liouvillian(&h, &[]).unwrap();
        let rho = DensityMatrix::from_fn(&s, |i, j| if (i, j) == (0, 1) { c(1.0) } else { c(0.0) });
        let out = l.apply(&rho).unwrap();
        assert!((out[3] - C64::new(0.0, delta)).norm() < 1e-15);
        assert!(out.iter().enumerate().all(|(k, v)| k == 3 || v.norm() == 0.0));
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let s = boson(2);
        let b = lowering(&s, "m").unwrap();
        assert!(matches!(build_liouvillian(&b, &[]), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn rejects_mixed_spaces() {
        let h = OperatorMatrix::zeros(&boson(2));
        let op = lowering(&boson(3), "m").unwrap();
        assert_eq!(
            build_liouvillian(&h, &[Collapse { rate: 1.0, op }]).unwrap_err(),
            Error::SpaceMismatch
        );
    }

    #[test]
    fn vacuum_is_fixed_point_of_decay() {
        let s = boson(4);
        let b = lowering(&s, "m").unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(&s), &[Collapse { rate: 1.0, op: b }]).unwrap();
        let rho = steady_state(&l).unwrap();
        assert!((rho.get(0, 0) - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn decay_law() {
        let s = boson(3);
        let b = lowering(&s, "m").unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(&s), &[Collapse { rate: 1.0, op: b }]).unwrap();
        let rho = DensityMatrix::basis_state(&s, &[1]).unwrap();
        let ts = [0.5, 1.0, 2.0];
        let states = evolve(&rho, &l, &ts).unwrap();
        for (t, r) in ts.iter().zip(&states) {
            assert!((r.get(1, 1).re - (-t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_generator_keeps_state() {
        let s = boson(2);
        let l = build_liouvillian(&OperatorMatrix::zeros(&s), &[]).unwrap();
        let rho = DensityMatrix::pure(&s, &[c(0.6), C64::new(0.0, 0.8), c(0.0)]).unwrap();
        for r in evolve(&rho, &l, &[0.0, 1.0, 5.0]).unwrap() {
            assert_eq!(r, rho);
        }
    }

    #[test]
    fn bad_time_grids() {
        let s = boson(2);
        let l = build_liouvillian(&OperatorMatrix::zeros(&s), &[]).unwrap();
        let rho = DensityMatrix::basis_state(&s, &[0]).unwrap();
        assert!(matches!(evolve(&rho, &l, &[-1.0]), Err(Error::Integration(_))));
        assert!(matches!(evolve(&rho, &l, &[1.0, 0.5]), Err(Error::Integration(_))));
    }

    #[test]
    fn nan_detection() {
        let s = boson(2);
        let b = lowering(&s, "m").unwrap();
        let l = build_liouvillian(&OperatorMatrix::zeros(&s), &[Collapse { rate: 1.0, op: b }]).unwrap();
        let rho = DensityMatrix::basis_state(&s, &[1]).unwrap();
        // A step bound far beyond RK4 stability blows the state up.
        let opts = EvolveOptions {
            step_factor: 1e3,
            ..EvolveOptions::default()
        };
        let err = evolve_with(&rho, &l, &[1e6], &opts).unwrap_err();
        assert!(matches!(err, Error::Integration(_) | Error::InvalidState(_)), "{err:?}");
    }
}
