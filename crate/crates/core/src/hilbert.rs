// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra over tensor-product Hilbert spaces.
//!
//! Every state and operator carries its subsystem dimension list so that
//! tensor products, partial traces and embeddings can be checked instead of
//! trusted. Storage is dense; the total dimension is capped (default
//! [`DEFAULT_MAX_DIM`]) so that an accidental large product fails loudly.

use std::fmt;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::units::HbarConvention;

/// Largest total dimension any operator or state may have by default.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Hermiticity tolerance, relative to the largest entry magnitude (or 1).
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Errors raised by the linear-algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("subsystem dimension {0} is smaller than 2")]
    SubsystemTooSmall(usize),
    #[error("dims {dims:?} describe {expected} basis states but the data has {found}")]
    DimsMismatch {
        dims: Vec<usize>,
        expected: usize,
        found: usize,
    },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("total dimension {requested} exceeds the configured maximum {max}")]
    Capacity { requested: usize, max: usize },
    #[error("operator is not Hermitian (max |H - H†| = {0:e})")]
    NotHermitian(f64),
    #[error("incompatible dimensions {0:?} and {1:?}")]
    Incompatible(Vec<usize>, Vec<usize>),
    #[error("invalid subsystem selection {keep:?} for dims {dims:?}")]
    InvalidSubsystems { keep: Vec<usize>, dims: Vec<usize> },
    #[error("basis label {label:?} is out of range for dims {dims:?}")]
    InvalidLabel { label: Vec<usize>, dims: Vec<usize> },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("eigendecomposition did not converge")]
    NoConvergence,
}

fn total_dim(dims: &[usize]) -> Result<usize, HilbertError> {
    let mut n: usize = 1;
    for &d in dims {
        if d < 2 {
            return Err(HilbertError::SubsystemTooSmall(d));
        }
        n = n.checked_mul(d).ok_or(HilbertError::Capacity {
            requested: usize::MAX,
            max: DEFAULT_MAX_DIM,
        })?;
    }
    Ok(n)
}

/// Flat index of a multi-index label, first subsystem most significant.
pub fn flat_index(dims: &[usize], label: &[usize]) -> Result<usize, HilbertError> {
    if label.len() != dims.len() || label.iter().zip(dims).any(|(l, d)| l >= d) {
        return Err(HilbertError::InvalidLabel {
            label: label.to_vec(),
            dims: dims.to_vec(),
        });
    }
    Ok(label.iter().zip(dims).fold(0, |acc, (l, d)| acc * d + l))
}

/// Inverse of [`flat_index`].
pub fn multi_index(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut label = vec![0; dims.len()];
    for (slot, &d) in label.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    label
}

/// A column vector of amplitudes over a composed space.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
    dims: Vec<usize>,
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateVector")
            .field("dims", &self.dims)
            .field("amplitudes", &self.amplitudes.as_slice())
            .finish()
    }
}

impl StateVector {
    /// Wraps raw amplitudes without normalizing them.
    pub fn new(amplitudes: DVector<C64>, dims: Vec<usize>) -> Result<Self, HilbertError> {
        let n = total_dim(&dims)?;
        if n != amplitudes.len() {
            return Err(HilbertError::DimsMismatch {
                dims,
                expected: n,
                found: amplitudes.len(),
            });
        }
        Ok(StateVector { amplitudes, dims })
    }

    /// Wraps amplitudes and rescales them to unit norm.
    pub fn normalized(amplitudes: DVector<C64>, dims: Vec<usize>) -> Result<Self, HilbertError> {
        let mut s = Self::new(amplitudes, dims)?;
        let norm = s.amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(HilbertError::ZeroNorm);
        }
        s.amplitudes /= C64::new(norm, 0.0);
        Ok(s)
    }

    /// The computational basis state with the given multi-index label.
    pub fn basis(dims: &[usize], label: &[usize]) -> Result<Self, HilbertError> {
        let n = total_dim(dims)?;
        let k = flat_index(dims, label)?;
        let mut v = DVector::zeros(n);
        v[k] = C64::new(1.0, 0.0);
        Ok(StateVector {
            amplitudes: v,
            dims: dims.to_vec(),
        })
    }

    /// Normalized superposition Σ c_k |label_k⟩.
    pub fn superposition(dims: &[usize], terms: &[(C64, &[usize])]) -> Result<Self, HilbertError> {
        let n = total_dim(dims)?;
        let mut v = DVector::zeros(n);
        for (c, label) in terms {
            v[flat_index(dims, label)?] += *c;
        }
        Self::normalized(v, dims.to_vec())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    /// Amplitude of the basis state with the given label.
    pub fn amplitude(&self, label: &[usize]) -> Result<C64, HilbertError> {
        Ok(self.amplitudes[flat_index(&self.dims, label)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<C64, HilbertError> {
        if self.dims != other.dims {
            return Err(HilbertError::Incompatible(self.dims.clone(), other.dims.clone()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Multiplies every amplitude by `c`.
    pub fn scaled(&self, c: C64) -> StateVector {
        StateVector {
            amplitudes: &self.amplitudes * c,
            dims: self.dims.clone(),
        }
    }

    /// |self⟩ ⊗ |other⟩.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, HilbertError> {
        let n = self.len() * other.len();
        if n > DEFAULT_MAX_DIM {
            return Err(HilbertError::Capacity {
                requested: n,
                max: DEFAULT_MAX_DIM,
            });
        }
        let q = other.len();
        let v = DVector::from_fn(n, |k, _| self.amplitudes[k / q] * other.amplitudes[k % q]);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(StateVector { amplitudes: v, dims })
    }

    /// Applies an operator, returning a new state.
    pub fn apply(&self, op: &Operator) -> Result<StateVector, HilbertError> {
        if op.dims != self.dims {
            return Err(HilbertError::Incompatible(op.dims.clone(), self.dims.clone()));
        }
        Ok(StateVector {
            amplitudes: &op.entries * &self.amplitudes,
            dims: self.dims.clone(),
        })
    }

    /// Largest entrywise modulus of the difference to `other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64, HilbertError> {
        if self.dims != other.dims {
            return Err(HilbertError::Incompatible(self.dims.clone(), other.dims.clone()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// |ψ⟩⟨ψ|.
    pub fn density(&self) -> Operator {
        Operator {
            entries: &self.amplitudes * self.amplitudes.adjoint(),
            dims: self.dims.clone(),
            hermitian: true,
        }
    }

    /// Expectation value ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, op: &Operator) -> Result<C64, HilbertError> {
        let applied = self.apply(op)?;
        Ok(self.amplitudes.dotc(&applied.amplitudes))
    }
}

/// A square complex matrix over a composed space.
#[derive(Clone, PartialEq)]
pub struct Operator {
    entries: DMatrix<C64>,
    dims: Vec<usize>,
    hermitian: bool,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("dims", &self.dims)
            .field("hermitian", &self.hermitian)
            .field("entries", &self.entries)
            .finish()
    }
}

fn check_shape(entries: &DMatrix<C64>, dims: &[usize]) -> Result<(), HilbertError> {
    if entries.nrows() != entries.ncols() {
        return Err(HilbertError::NotSquare {
            rows: entries.nrows(),
            cols: entries.ncols(),
        });
    }
    let n = total_dim(dims)?;
    if n > DEFAULT_MAX_DIM {
        return Err(HilbertError::Capacity {
            requested: n,
            max: DEFAULT_MAX_DIM,
        });
    }
    if n != entries.nrows() {
        return Err(HilbertError::DimsMismatch {
            dims: dims.to_vec(),
            expected: n,
            found: entries.nrows(),
        });
    }
    Ok(())
}

impl Operator {
    /// Wraps a general (not necessarily Hermitian) square matrix.
    pub fn new(entries: DMatrix<C64>, dims: Vec<usize>) -> Result<Self, HilbertError> {
        check_shape(&entries, &dims)?;
        Ok(Operator {
            entries,
            dims,
            hermitian: false,
        })
    }

    /// Wraps a matrix asserted Hermitian; the assertion is checked.
    pub fn hermitian(entries: DMatrix<C64>, dims: Vec<usize>) -> Result<Self, HilbertError> {
        check_shape(&entries, &dims)?;
        let op = Operator {
            entries,
            dims,
            hermitian: true,
        };
        let defect = op.hermiticity_defect();
        if defect > HERMITICITY_TOL * op.scale() {
            return Err(HilbertError::NotHermitian(defect));
        }
        Ok(op)
    }

    /// Real diagonal operator; always Hermitian.
    pub fn diagonal(values: &[f64], dims: Vec<usize>) -> Result<Self, HilbertError> {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)));
        let entries = DMatrix::from_diagonal(&d);
        check_shape(&entries, &dims)?;
        Ok(Operator {
            entries,
            dims,
            hermitian: true,
        })
    }

    pub fn identity(dims: &[usize]) -> Result<Self, HilbertError> {
        let n = total_dim(dims)?;
        Self::diagonal(&vec![1.0; n], dims.to_vec())
    }

    pub fn zeros(dims: &[usize]) -> Result<Self, HilbertError> {
        let n = total_dim(dims)?;
        Self::diagonal(&vec![0.0; n], dims.to_vec())
    }

    /// Builds an operator entry by entry; Hermiticity is checked when asserted.
    pub fn from_fn(dims: &[usize], hermitian: bool, f: impl FnMut(usize, usize) -> C64) -> Result<Self, HilbertError> {
        let n = total_dim(dims)?;
        let m = DMatrix::from_fn(n, n, f);
        if hermitian {
            Self::hermitian(m, dims.to_vec())
        } else {
            Self::new(m, dims.to_vec())
        }
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Side length of the matrix.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Whether the operator was constructed as (and checked to be) Hermitian.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    /// Matrix element ⟨row_label|A|col_label⟩.
    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<C64, HilbertError> {
        Ok(self.entries[(flat_index(&self.dims, row)?, flat_index(&self.dims, col)?)])
    }

    /// max |A − A†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// max |A† A − I|.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.entries.adjoint() * &self.entries;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Largest entry modulus, or 1 when that is smaller.
    pub fn scale(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(1.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64, HilbertError> {
        self.same_space(other)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn same_space(&self, other: &Operator) -> Result<(), HilbertError> {
        if self.dims != other.dims {
            return Err(HilbertError::Incompatible(self.dims.clone(), other.dims.clone()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            entries: self.entries.adjoint(),
            dims: self.dims.clone(),
            hermitian: self.hermitian,
        }
    }

    /// Matrix product self · other.
    pub fn mul(&self, other: &Operator) -> Result<Operator, HilbertError> {
        self.same_space(other)?;
        Ok(Operator {
            entries: &self.entries * &other.entries,
            dims: self.dims.clone(),
            hermitian: false,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator, HilbertError> {
        self.same_space(other)?;
        Ok(Operator {
            entries: &self.entries + &other.entries,
            dims: self.dims.clone(),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator, HilbertError> {
        self.same_space(other)?;
        Ok(Operator {
            entries: &self.entries - &other.entries,
            dims: self.dims.clone(),
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// Multiplies by a real scalar (Hermiticity is preserved).
    pub fn scaled(&self, s: f64) -> Operator {
        Operator {
            entries: &self.entries * C64::new(s, 0.0),
            dims: self.dims.clone(),
            hermitian: self.hermitian,
        }
    }

    /// Multiplies by a complex scalar.
    pub fn scaled_complex(&self, s: C64) -> Operator {
        Operator {
            entries: &self.entries * s,
            dims: self.dims.clone(),
            hermitian: self.hermitian && s.im == 0.0,
        }
    }

    /// [self, other].
    pub fn commutator(&self, other: &Operator) -> Result<Operator, HilbertError> {
        self.same_space(other)?;
        Ok(Operator {
            entries: &self.entries * &other.entries - &other.entries * &self.entries,
            dims: self.dims.clone(),
            hermitian: false,
        })
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// Embeds a single-subsystem operator at position `site` of `dims`.
    pub fn embed(local: &Operator, site: usize, dims: &[usize]) -> Result<Operator, HilbertError> {
        if site >= dims.len() || local.dim() != dims[site] {
            return Err(HilbertError::InvalidSubsystems {
                keep: vec![site],
                dims: dims.to_vec(),
            });
        }
        let mut acc: Option<Operator> = None;
        for (k, &d) in dims.iter().enumerate() {
            let factor = if k == site {
                Operator {
                    dims: vec![d],
                    ..local.clone()
                }
            } else {
                Operator::identity(&[d])?
            };
            acc = Some(match acc {
                None => factor,
                Some(a) => kron(&a, &factor)?,
            });
        }
        let mut out = acc.expect("dims is nonempty");
        out.hermitian = local.hermitian;
        Ok(out)
    }

    /// Re-labels the subsystem structure without touching entries.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Operator, HilbertError> {
        check_shape(&self.entries, &dims)?;
        Ok(Operator { dims, ..self })
    }
}

/// Kronecker product with the default capacity.
pub fn kron(a: &Operator, b: &Operator) -> Result<Operator, HilbertError> {
    kron_with_limit(a, b, DEFAULT_MAX_DIM)
}

/// Kronecker product; fails when the result would exceed `max_dim`.
pub fn kron_with_limit(a: &Operator, b: &Operator, max_dim: usize) -> Result<Operator, HilbertError> {
    let (p, q) = (a.dim(), b.dim());
    let n = p.checked_mul(q).ok_or(HilbertError::Capacity {
        requested: usize::MAX,
        max: max_dim,
    })?;
    if n > max_dim {
        return Err(HilbertError::Capacity {
            requested: n,
            max: max_dim,
        });
    }
    let entries = DMatrix::from_fn(n, n, |r, c| a.entries[(r / q, c / q)] * b.entries[(r % q, c % q)]);
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Ok(Operator {
        entries,
        dims,
        hermitian: a.hermitian && b.hermitian,
    })
}

/// Eigendecomposition of a Hermitian operator, reusable for many times `t`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
    dims: Vec<usize>,
    rate: f64,
}

impl SpectralDecomposition {
    /// Diagonalizes `h`; its Hermiticity is checked regardless of the flag.
    pub fn new(h: &Operator, convention: HbarConvention) -> Result<Self, HilbertError> {
        let defect = h.hermiticity_defect();
        if defect > HERMITICITY_TOL * h.scale() {
            return Err(HilbertError::NotHermitian(defect));
        }
        let (values, vectors) = hermitian_eigen(&h.entries)?;
        Ok(SpectralDecomposition {
            values,
            vectors,
            dims: h.dims.clone(),
            rate: convention.to_angular_frequency(),
        })
    }

    /// Eigenvalues in the operator's own units, unsorted.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    fn phases(&self, t: f64) -> DVector<C64> {
        DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&e| C64::from_polar(1.0, -e * self.rate * t)),
        )
    }

    /// exp(−i H t) (or exp(−i H t/ħ)).
    pub fn propagator(&self, t: f64) -> Operator {
        let phases = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        Operator {
            entries: scaled * self.vectors.adjoint(),
            dims: self.dims.clone(),
            hermitian: false,
        }
    }

    /// Coordinates of a state in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &StateVector) -> Result<DVector<C64>, HilbertError> {
        if psi.dims != self.dims {
            return Err(HilbertError::Incompatible(psi.dims.clone(), self.dims.clone()));
        }
        Ok(self.vectors.adjoint() * &psi.amplitudes)
    }

    /// Evolves eigenbasis coordinates for time `t` and returns the state.
    pub fn evolve_coordinates(&self, coords: &DVector<C64>, t: f64) -> StateVector {
        let phased = coords.component_mul(&self.phases(t));
        StateVector {
            amplitudes: &self.vectors * phased,
            dims: self.dims.clone(),
        }
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector, HilbertError> {
        let c = self.to_eigenbasis(psi)?;
        Ok(self.evolve_coordinates(&c, t))
    }
}

/// Groups basis indices into the connected components of the coupling graph
/// of `m` (nonzero off-diagonal entries).
fn coupled_blocks(m: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in 0..n {
        for r in (c + 1)..n {
            if m[(r, c)] != C64::new(0.0, 0.0) || m[(c, r)] != C64::new(0.0, 0.0) {
                let (a, b) = (root(&mut parent, r), root(&mut parent, c));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

/// Eigenpairs of a Hermitian matrix, block by block.
///
/// nalgebra's complex solver occasionally returns NaN on matrices with
/// decoupled rows (seen for sparse rotating-wave couplings), so decoupled
/// blocks are solved separately and any non-finite result is redone with
/// cyclic Jacobi sweeps.
fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>), HilbertError> {
    let n = m.nrows();
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for block in coupled_blocks(m) {
        let k = block.len();
        let sub = DMatrix::from_fn(k, k, |r, c| m[(block[r], block[c])]);
        let (vals, vecs) = if k == 1 {
            (vec![sub[(0, 0)].re], DMatrix::from_element(1, 1, C64::new(1.0, 0.0)))
        } else {
            let eig = sub.clone().symmetric_eigen();
            let finite = eig.eigenvalues.iter().all(|v| v.is_finite())
                && eig.eigenvectors.iter().all(|z| z.re.is_finite() && z.im.is_finite());
            if finite {
                (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
            } else {
                jacobi_eigen(sub)?
            }
        };
        for (j, v) in vals.into_iter().enumerate() {
            let col = values.len();
            values.push(v);
            for (r, &row) in block.iter().enumerate() {
                vectors[(row, col)] = vecs[(r, j)];
            }
        }
    }
    Ok((values, vectors))
}

/// Cyclic complex Jacobi: each rotation first removes the phase of the
/// pivot, then applies the real symmetric rotation that zeroes it.
fn jacobi_eigen(mut a: DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>), HilbertError> {
    let n = a.nrows();
    let mut v = DMatrix::<C64>::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|c| (0..n).filter(move |&r| r != c).map(move |r| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * scale {
            let values = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b == 0.0 {
                    continue;
                }
                let phase = apq / b;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b);
                let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (cs, sp) = (C64::new(c, 0.0), C64::new(s, 0.0));
                let ph_conj = phase.conj();
                // Columns: A ← A G, V ← V G.
                for r in 0..n {
                    let (xp, xq) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = cs * xp - sp * ph_conj * xq;
                    a[(r, q)] = sp * xp + cs * ph_conj * xq;
                    let (yp, yq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = cs * yp - sp * ph_conj * yq;
                    v[(r, q)] = sp * yp + cs * ph_conj * yq;
                }
                // Rows: A ← G† A.
                for col in 0..n {
                    let (xp, xq) = (a[(p, col)], a[(q, col)]);
                    a[(p, col)] = cs * xp - sp * phase * xq;
                    a[(q, col)] = sp * xp + cs * phase * xq;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    Err(HilbertError::NoConvergence)
}

/// U = exp(−i h t / ħ) via Hermitian eigendecomposition.
pub fn matexp_unitary(h: &Operator, t: f64, convention: HbarConvention) -> Result<Operator, HilbertError> {
    Ok(SpectralDecomposition::new(h, convention)?.propagator(t))
}

/// |⟨ψ|φ⟩|², insensitive to the global phase of either state.
pub fn fidelity_up_to_global_phase(psi: &StateVector, phi: &StateVector) -> Result<f64, HilbertError> {
    let overlap = psi.inner(phi)?;
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

fn validate_keep(dims: &[usize], keep: &[usize]) -> Result<(), HilbertError> {
    let bad = keep.is_empty() || keep.iter().any(|&k| k >= dims.len()) || keep.windows(2).any(|w| w[0] >= w[1]);
    if bad {
        return Err(HilbertError::InvalidSubsystems {
            keep: keep.to_vec(),
            dims: dims.to_vec(),
        });
    }
    Ok(())
}

/// Splits every flat index into (kept flat index, traced flat index).
fn split_indices(dims: &[usize], keep: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<(usize, usize)>) {
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).map(|k| dims[k]).collect();
    let n: usize = dims.iter().product();
    let map = (0..n)
        .map(|flat| {
            let label = multi_index(dims, flat);
            let mut kept = 0;
            let mut traced = 0;
            for (site, (&l, &d)) in label.iter().zip(dims).enumerate() {
                if keep.contains(&site) {
                    kept = kept * d + l;
                } else {
                    traced = traced * d + l;
                }
            }
            (kept, traced)
        })
        .collect();
    (kept_dims, traced_dims, map)
}

/// Reduced density matrix of `rho` on the subsystems listed (ascending) in `keep`.
pub fn partial_trace(rho: &Operator, keep: &[usize]) -> Result<Operator, HilbertError> {
    validate_keep(&rho.dims, keep)?;
    let (kept_dims, _, map) = split_indices(&rho.dims, keep);
    let nk: usize = kept_dims.iter().product();
    let mut out = DMatrix::<C64>::zeros(nk, nk);
    for (i, &(ki, ti)) in map.iter().enumerate() {
        for (j, &(kj, tj)) in map.iter().enumerate() {
            if ti == tj {
                out[(ki, kj)] += rho.entries[(i, j)];
            }
        }
    }
    Ok(Operator {
        entries: out,
        dims: kept_dims,
        hermitian: rho.hermitian,
    })
}

/// Reduced density matrix of a pure state, computed as M M† without forming |ψ⟩⟨ψ|.
pub fn reduced_density(psi: &StateVector, keep: &[usize]) -> Result<Operator, HilbertError> {
    validate_keep(&psi.dims, keep)?;
    let (kept_dims, traced_dims, map) = split_indices(&psi.dims, keep);
    let nk: usize = kept_dims.iter().product();
    let nt: usize = traced_dims.iter().product();
    let mut m = DMatrix::<C64>::zeros(nk, nt);
    for (i, &(k, t)) in map.iter().enumerate() {
        m[(k, t)] = psi.amplitudes[i];
    }
    Ok(Operator {
        entries: &m * m.adjoint(),
        dims: kept_dims,
        hermitian: true,
    })
}

/// Tr(ρ²).
pub fn purity(rho: &Operator) -> f64 {
    rho.entries.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eigen_residual(m: &DMatrix<C64>, values: &[f64], vectors: &DMatrix<C64>) -> f64 {
        let d = DMatrix::from_fn(values.len(), values.len(), |r, c| {
            if r == c {
                C64::new(values[r], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        (m * vectors - vectors * d).camax()
    }

    #[test]
    fn sparse_rotating_wave_matrix_has_finite_eigenpairs() {
        // Three decoupled 2x2 couplings embedded among empty rows; the plain
        // complex solver returns NaN on this one.
        let mut m = DMatrix::<C64>::zeros(12, 12);
        for (r, z) in [
            (1, C64::new(-1.1867464660895492e8, 4.132427003569015e7)),
            (2, C64::new(-1.678312947442183e8, 5.844134313964112e7)),
            (3, C64::new(-2.055505174969915e8, 7.157573528751148e7)),
        ] {
            m[(r, r + 7)] = z;
            m[(r + 7, r)] = z.conj();
        }
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        assert!(vals.iter().all(|v| v.is_finite()));
        assert!(eigen_residual(&m, &vals, &vecs) < 1e-6);
        assert!((&vecs.adjoint() * &vecs - DMatrix::<C64>::identity(12, 12)).camax() < 1e-14);
    }

    #[test]
    fn jacobi_matches_dense_solver() {
        let m = DMatrix::from_fn(6, 6, |r, c| {
            let x = ((r * 7 + c * 3) % 5) as f64 - 2.0;
            let y = if r == c { 0.0 } else { ((r * 2 + c) % 3) as f64 - 1.0 };
            if r <= c {
                C64::new(x + (r + c) as f64, y)
            } else {
                C64::new(
                    ((c * 7 + r * 3) % 5) as f64 - 2.0 + (r + c) as f64,
                    -(((c * 2 + r) % 3) as f64 - 1.0),
                )
            }
        });
        assert!((&m - m.adjoint()).camax() < 1e-15);
        let (mut a, v) = jacobi_eigen(m.clone()).unwrap();
        assert!(eigen_residual(&m, &a, &v) < 1e-12);
        let mut b: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> Operator {
        Operator::hermitian(
            DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
            vec![2],
        )
        .unwrap()
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = kron(&Operator::identity(&[2]).unwrap(), &Operator::identity(&[3]).unwrap()).unwrap();
        assert_eq!(k, Operator::identity(&[2, 3]).unwrap());
        assert_eq!(k.dims(), &[2, 3]);
    }

    #[test]
    fn kron_x_identity_permutation() {
        let k = kron(&pauli_x(), &Operator::identity(&[2]).unwrap()).unwrap();
        let ones = [(0, 2), (1, 3), (2, 0), (3, 1)];
        for r in 0..4 {
            for col in 0..4 {
                let expect = if ones.contains(&(r, col)) { 1.0 } else { 0.0 };
                assert_eq!(k.get(r, col), c(expect, 0.0));
            }
        }
    }

    #[test]
    fn kron_capacity_error() {
        let big = Operator::identity(&[64]).unwrap();
        let err = kron_with_limit(&big, &big, 1000).unwrap_err();
        assert_eq!(
            err,
            HilbertError::Capacity {
                requested: 4096,
                max: 1000
            }
        );
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            Operator::hermitian(m.clone(), vec![2]),
            Err(HilbertError::NotHermitian(_))
        ));
        let op = Operator::new(m, vec![2]).unwrap();
        assert!(matches!(
            matexp_unitary(&op, 1.0, HbarConvention::AngularFrequency),
            Err(HilbertError::NotHermitian(_))
        ));
    }

    #[test]
    fn zero_generator_gives_identity() {
        let u = matexp_unitary(&Operator::zeros(&[3, 2]).unwrap(), 1e-6, HbarConvention::AngularFrequency).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(&[3, 2]).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn sigma_x_rotation_matches_euler_identity() {
        let eps = 2.3e9;
        let t = 0.37e-9;
        let h = pauli_x().scaled(eps);
        let u = matexp_unitary(&h, t, HbarConvention::AngularFrequency).unwrap();
        let (co, si) = ((eps * t).cos(), (eps * t).sin());
        let expect = [[c(co, 0.), c(0., -si)], [c(0., -si), c(co, 0.)]];
        for (i, row) in expect.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert!((u.get(i, j) - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn joules_convention_divides_by_hbar() {
        let e = 1e-24;
        let h = Operator::diagonal(&[0.0, e], vec![2]).unwrap();
        let t = 1e-10;
        let u = matexp_unitary(&h, t, HbarConvention::Joules).unwrap();
        let phase = -e * t / crate::units::HBAR;
        assert!((u.get(1, 1) - C64::from_polar(1.0, phase)).norm() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::basis(&[2], &[0]).unwrap();
        let one = StateVector::basis(&[2], &[1]).unwrap();
        assert_eq!(fidelity_up_to_global_phase(&zero, &one).unwrap(), 0.0);
        let psi = StateVector::superposition(&[2], &[(c(0.6, 0.), &[0]), (c(0., 0.8), &[1])]).unwrap();
        let rotated = psi.scaled(C64::from_polar(1.0, 1.234));
        assert!((fidelity_up_to_global_phase(&psi, &rotated).unwrap() - 1.0).abs() < 1e-15);
        let other = StateVector::basis(&[3], &[0]).unwrap();
        assert!(fidelity_up_to_global_phase(&zero, &other).is_err());
    }

    #[test]
    fn fidelity_of_entangled_against_symmetric_pair() {
        // (|0,2⟩ + i|2,0⟩)/√2 against (|0,2⟩ + |2,0⟩)/√2: |(1 + i)/2|² = 1/2.
        let dims = [3, 3];
        let a = StateVector::superposition(&dims, &[(c(1., 0.), &[0, 2]), (c(0., 1.), &[2, 0])]).unwrap();
        let b = StateVector::superposition(&dims, &[(c(1., 0.), &[0, 2]), (c(1., 0.), &[2, 0])]).unwrap();
        assert!((fidelity_up_to_global_phase(&a, &b).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_state_is_pure() {
        let a = StateVector::superposition(&[3], &[(c(1., 0.), &[0]), (c(0., 2.), &[2])]).unwrap();
        let b = StateVector::superposition(&[2], &[(c(1., 0.), &[0]), (c(1., 1.), &[1])]).unwrap();
        let ab = a.tensor(&b).unwrap();
        for keep in [[0usize].as_slice(), [1].as_slice()] {
            let r = reduced_density(&ab, keep).unwrap();
            assert!((purity(&r) - 1.0).abs() < 1e-10);
            let r2 = partial_trace(&ab.density(), keep).unwrap();
            assert!(r.max_abs_diff(&r2).unwrap() < 1e-14);
        }
    }

    #[test]
    fn partial_trace_rejects_bad_selection() {
        let psi = StateVector::basis(&[2, 2], &[0, 1]).unwrap();
        assert!(reduced_density(&psi, &[2]).is_err());
        assert!(reduced_density(&psi, &[]).is_err());
        assert!(reduced_density(&psi, &[1, 0]).is_err());
    }

    #[test]
    fn embed_places_local_operator() {
        let x = pauli_x();
        let e = Operator::embed(&x, 1, &[3, 2, 2]).unwrap();
        let direct = kron(
            &kron(&Operator::identity(&[3]).unwrap(), &x).unwrap(),
            &Operator::identity(&[2]).unwrap(),
        )
        .unwrap();
        assert_eq!(e, direct);
    }

    #[test]
    fn label_roundtrip() {
        let dims = [3, 3, 4];
        for flat in 0..36 {
            assert_eq!(flat_index(&dims, &multi_index(&dims, flat)).unwrap(), flat);
        }
        assert!(flat_index(&dims, &[3, 0, 0]).is_err());
    }
}
