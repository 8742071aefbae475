//! Composite Hilbert spaces built from truncated boson and qubit factors, the
//! operators acting on them, and density matrices.
//!
//! Factor order is declaration order and fixes the Kronecker layout: the
//! first factor is the most significant digit of a flat basis index, so
//! `|n_0, n_1, ...⟩` sits at `Σ n_f · stride_f` with `stride_f` the product of
//! the dimensions of every later factor.
//!
//! Qubit levels are ordered `|g⟩ = 0`, `|e⟩ = 1`.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result, C64};

/// Kind of a single tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    /// Boson mode truncated to Fock states `|0⟩ … |cutoff⟩`.
    Boson { cutoff: usize },
    /// Two-level system.
    Qubit,
}

impl FactorKind {
    pub fn dim(self) -> usize {
        match self {
            FactorKind::Boson { cutoff } => cutoff + 1,
            FactorKind::Qubit => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    label: String,
    kind: FactorKind,
}

impl Factor {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }
}

#[derive(Debug, PartialEq, Eq)]
struct SpaceInner {
    factors: Vec<Factor>,
    strides: Vec<usize>,
    total_dim: usize,
}

/// Ordered tensor product of labelled factors.
///
/// Cloning is cheap; clones share the factor list.
#[derive(Clone)]
pub struct HilbertSpace(Arc<SpaceInner>);

impl HilbertSpace {
    /// Builds a space from `(label, kind)` pairs in declaration order.
    pub fn new<S: Into<String>>(specs: impl IntoIterator<Item = (S, FactorKind)>) -> Result<Self> {
        let mut factors: Vec<Factor> = Vec::new();
        for (label, kind) in specs {
            let label = label.into();
            if factors.iter().any(|f| f.label == label) {
                return Err(Error::DuplicateLabel(label));
            }
            if let FactorKind::Boson { cutoff } = kind {
                if cutoff < 2 {
                    return Err(Error::CutoffTooSmall { label, cutoff });
                }
            }
            factors.push(Factor { label, kind });
        }
        if factors.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut strides = vec![1; factors.len()];
        for k in (0..factors.len() - 1).rev() {
            strides[k] = strides[k + 1] * factors[k + 1].dim();
        }
        let total_dim = strides[0] * factors[0].dim();
        Ok(Self(Arc::new(SpaceInner {
            factors,
            strides,
            total_dim,
        })))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0.factors
    }

    pub fn total_dim(&self) -> usize {
        self.0.total_dim
    }

    /// Position of the factor called `label`.
    pub fn position(&self, label: &str) -> Result<usize> {
        self.0
            .factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn factor(&self, label: &str) -> Result<&Factor> {
        self.position(label).map(|k| &self.0.factors[k])
    }

    /// Flat index of the basis state with the given per-factor levels.
    pub fn index_of(&self, levels: &[usize]) -> Option<usize> {
        if levels.len() != self.0.factors.len() {
            return None;
        }
        let mut idx = 0;
        for ((level, factor), stride) in levels.iter().zip(&self.0.factors).zip(&self.0.strides) {
            if *level >= factor.dim() {
                return None;
            }
            idx += level * stride;
        }
        Some(idx)
    }

    /// Per-factor levels of a flat basis index.
    pub fn levels_of(&self, index: usize) -> Vec<usize> {
        self.0
            .factors
            .iter()
            .zip(&self.0.strides)
            .map(|(f, s)| (index / s) % f.dim())
            .collect()
    }

    pub fn same_as(&self, other: &HilbertSpace) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl PartialEq for HilbertSpace {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.0.factors.iter().map(|x| (&x.label, x.dim())))
            .finish()
    }
}

/// Convenience wrapper around [`HilbertSpace::new`].
pub fn make_space<S: Into<String>>(specs: impl IntoIterator<Item = (S, FactorKind)>) -> Result<HilbertSpace> {
    HilbertSpace::new(specs)
}

/// Square complex matrix on a [`HilbertSpace`], stored in compressed sparse
/// row form with sorted column indices and no explicit zeros.
#[derive(Clone)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl OperatorMatrix {
    /// Assembles a matrix from `(row, col, value)` entries. Repeated
    /// coordinates are summed.
    pub fn from_triplets(space: &HilbertSpace, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let dim = space.total_dim();
        let mut entries: Vec<(usize, usize, C64)> = entries.into_iter().collect();
        for &(i, j, _) in &entries {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: i.max(j) + 1,
                });
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != C64::new(0.0, 0.0));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (i, j, v) in merged {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            space: space.clone(),
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        Self {
            space: space.clone(),
            row_ptr: vec![0; space.total_dim() + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let dim = space.total_dim();
        Self {
            space: space.clone(),
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            values: vec![C64::new(1.0, 0.0); dim],
        }
    }

    /// Embeds a single-factor matrix (dense, row-major, `d × d` with `d` the
    /// factor dimension) into the full space with identities elsewhere.
    pub fn embed(space: &HilbertSpace, label: &str, local: &[C64]) -> Result<Self> {
        let k = space.position(label)?;
        let d = space.factors()[k].dim();
        if local.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: local.len(),
            });
        }
        let stride = space.0.strides[k];
        let mut entries = Vec::new();
        for row in 0..space.total_dim() {
            let l = (row / stride) % d;
            for lp in 0..d {
                let v = local[l * d + lp];
                if v != C64::new(0.0, 0.0) {
                    let col = row - l * stride + lp * stride;
                    entries.push((row, col, v));
                }
            }
        }
        Self::from_triplets(space, entries)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry `(i, j)`; zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(p) => self.values[range.start + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Stored entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries as `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(&self.space, self.iter().map(|(i, j, v)| (j, i, v.conj())))
            .expect("indices stay in range")
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(&self.space, self.iter().map(|(i, j, v)| (j, i, v))).expect("indices stay in range")
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.drop_zeros()
    }

    fn drop_zeros(self) -> Self {
        if self.values.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return self;
        }
        let space = self.space.clone();
        Self::from_triplets(&space, self.iter().collect::<Vec<_>>()).expect("indices stay in range")
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Self::from_triplets(&self.space, self.iter().chain(other.iter()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Self::from_triplets(&self.space, self.iter().chain(other.iter().map(|(i, j, v)| (i, j, -v))))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let dim = self.dim();
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut touched = vec![false; dim];
        let mut cols = Vec::new();
        let mut entries = Vec::new();
        for i in 0..dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &cols {
                entries.push((i, j, acc[j]));
                acc[j] = C64::new(0.0, 0.0);
                touched[j] = false;
            }
            cols.clear();
        }
        Self::from_triplets(&self.space, entries)
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    /// `{self, other}`
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_add(&other.try_mul(self)?)
    }

    /// `max |A - A†|` over all entries.
    pub fn hermiticity_residual(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.try_sub(other)?.max_abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Dense copy in column-major order (`out[i + d * j] = A_ij`).
    pub fn to_dense(&self) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for (i, j, v) in self.iter() {
            out[i + d * j] = v;
        }
        out
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("space", &self.space)
            .field("nnz", &self.nnz())
            .finish()
    }
}

impl PartialEq for OperatorMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
            && self.values == other.values
    }
}

// Arithmetic operators panic when the operands live on different spaces; use
// the `try_*` methods when that can happen.
impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        self.try_add(rhs).expect("operator addition across spaces")
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        self.try_sub(rhs).expect("operator subtraction across spaces")
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        self.try_mul(rhs).expect("operator product across spaces")
    }
}

impl Mul<&OperatorMatrix> for C64 {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        rhs.scale(self)
    }
}

impl Mul<&OperatorMatrix> for f64 {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        rhs.scale(C64::new(self, 0.0))
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

fn local_lowering(kind: FactorKind) -> Vec<C64> {
    let d = kind.dim();
    let mut m = vec![C64::new(0.0, 0.0); d * d];
    match kind {
        FactorKind::Boson { .. } => {
            for n in 1..d {
                m[(n - 1) * d + n] = C64::new((n as f64).sqrt(), 0.0);
            }
        }
        // σ₋ = |g⟩⟨e|
        FactorKind::Qubit => m[1] = C64::new(1.0, 0.0),
    }
    m
}

/// Annihilation operator `b` (boson) or `σ₋` (qubit) of factor `label`,
/// embedded in the full space.
pub fn lowering(space: &HilbertSpace, label: &str) -> Result<OperatorMatrix> {
    let kind = space.factor(label)?.kind();
    OperatorMatrix::embed(space, label, &local_lowering(kind))
}

/// Creation operator `b†` / `σ₊` of factor `label`.
pub fn raising(space: &HilbertSpace, label: &str) -> Result<OperatorMatrix> {
    Ok(lowering(space, label)?.adjoint())
}

/// `b†b` (or `σ₊σ₋`) of factor `label`.
pub fn number(space: &HilbertSpace, label: &str) -> Result<OperatorMatrix> {
    let low = lowering(space, label)?;
    Ok(&low.adjoint() * &low)
}

/// Tolerances a [`DensityMatrix`] must satisfy to count as physical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerance {
    pub trace: f64,
    pub hermiticity: f64,
    /// Smallest admissible eigenvalue is `-positivity`.
    pub positivity: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        Self {
            trace: 1e-10,
            hermiticity: 1e-10,
            positivity: 1e-8,
        }
    }
}

/// Dense density matrix stored column-major (`entries[i + d * j] = ρ_ij`).
///
/// Construction does not validate physicality; call
/// [`validate`](Self::validate) for that.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_column_major(space: &HilbertSpace, entries: Vec<C64>) -> Result<Self> {
        let d = space.total_dim();
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: entries.len(),
            });
        }
        Ok(Self {
            space: space.clone(),
            entries,
        })
    }

    pub fn from_fn(space: &HilbertSpace, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = space.total_dim();
        let mut entries = Vec::with_capacity(d * d);
        for j in 0..d {
            for i in 0..d {
                entries.push(f(i, j));
            }
        }
        Self {
            space: space.clone(),
            entries,
        }
    }

    /// `|ψ⟩⟨ψ|` for a basis state given by per-factor levels.
    pub fn basis_state(space: &HilbertSpace, levels: &[usize]) -> Result<Self> {
        let k = space.index_of(levels).ok_or(Error::DimensionMismatch {
            expected: space.factors().len(),
            got: levels.len(),
        })?;
        Ok(Self::from_fn(space, |i, j| {
            if i == k && j == k {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(space: &HilbertSpace, amplitudes: &[C64]) -> Result<Self> {
        let d = space.total_dim();
        if amplitudes.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        Ok(Self::from_fn(space, |i, j| amplitudes[i] * amplitudes[j].conj() / norm))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i + self.dim() * j]
    }

    /// Column-major vectorisation `vec(ρ)`.
    pub fn as_slice(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.entries
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.entries[i * (d + 1)]).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in j..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part `(ρ + ρ†)/2`, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(self.dim(), |i, j| (self.get(i, j) + self.get(j, i).conj()) * 0.5)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// Checks trace, Hermiticity and positivity against `tol`.
    pub fn validate(&self, tol: &StateTolerance) -> Result<()> {
        if self.entries.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::InvalidState(alloc::format!("trace {tr} deviates from one")));
        }
        let herm = self.hermiticity_residual();
        if herm > tol.hermiticity {
            return Err(Error::InvalidState(alloc::format!("hermiticity residual {herm:e}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -tol.positivity {
            return Err(Error::InvalidState(alloc::format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `Tr(op · ρ)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        if !self.space.same_as(op.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(op.iter().map(|(i, k, v)| v * self.get(k, i)).sum())
    }

    /// `op · ρ · op†` (not normalised).
    pub fn sandwich(&self, op: &OperatorMatrix) -> Result<Vec<C64>> {
        if !self.space.same_as(op.space()) {
            return Err(Error::SpaceMismatch);
        }
        let d = self.dim();
        // tmp = op ρ, column-major
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        for (i, k, v) in op.iter() {
            for j in 0..d {
                tmp[i + d * j] += v * self.entries[k + d * j];
            }
        }
        // out = tmp op†, out_ij = Σ_l tmp_il conj(op_jl)
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for (j, l, v) in op.iter() {
            let c = v.conj();
            for i in 0..d {
                out[i + d * j] += tmp[i + d * l] * c;
            }
        }
        Ok(out)
    }

    /// Trace distance `½ ‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if !self.space.same_as(&other.space) {
            return Err(Error::SpaceMismatch);
        }
        let ev = hermitian_eigenvalues(self.dim(), |i, j| {
            let a = self.get(i, j) - other.get(i, j);
            let b = (self.get(j, i) - other.get(j, i)).conj();
            (a + b) * 0.5
        })?;
        Ok(0.5 * ev.iter().map(|x| x.abs()).sum::<f64>())
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMatrix")
            .field("space", &self.space)
            .field("trace", &self.trace())
            .finish()
    }
}

fn hermitian_eigenvalues(d: usize, f: impl Fn(usize, usize) -> C64) -> Result<Vec<f64>> {
    let m = faer::Mat::<C64>::from_fn(d, d, f);
    let mut ev = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::InvalidState(alloc::format!("eigenvalue solver failed: {e:?}")))?;
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(ev)
}
