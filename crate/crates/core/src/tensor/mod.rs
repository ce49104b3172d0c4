//! Dense real tensors over typed, conjugate-flagged wires.
//!
//! A [`Tensor`] stores one `f64` per joint index assignment, row-major over
//! its wire list (the last wire varies fastest). Every wire names the
//! [`Space`] it lives in and whether it is the conjugate copy of that space.
//! Caps and contractions only ever join a plain wire with a conjugate wire of
//! the same space, which is how the doubled (CPM) bookkeeping is kept honest
//! even though the field is real.

mod network;

pub use network::{Network, WireRef};

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Default tolerance for numeric comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("space `{0}` must have at least one basis vector")]
    EmptySpace(String),
    #[error("space `{space}` has duplicate basis label `{label}`")]
    DuplicateLabel { space: String, label: String },
    #[error("unknown basis label `{label}` in space `{space}`")]
    UnknownLabel { space: String, label: String },
    #[error("data length {got} does not match wire dimensions (expected {expected})")]
    DataLength { expected: usize, got: usize },
    #[error("tensor entry {0} is not finite")]
    NonFinite(usize),
    #[error("wire index {index} out of range for rank {rank}")]
    WireOutOfRange { index: usize, rank: usize },
    #[error("cannot contract a wire with itself (index {0})")]
    SelfContraction(usize),
    #[error("space mismatch: `{0}` vs `{1}`")]
    SpaceMismatch(String, String),
    #[error("conjugate flags must differ to contract wires over `{0}`")]
    FlagMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// A finite-dimensional real space with a named orthonormal basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Space {
    name: String,
    basis: Vec<String>,
}

impl Space {
    pub fn new<S: Into<String>>(name: S, basis: Vec<String>) -> Result<Arc<Space>> {
        let name = name.into();
        if basis.is_empty() {
            return Err(TensorError::EmptySpace(name));
        }
        for (i, label) in basis.iter().enumerate() {
            if basis[..i].contains(label) {
                return Err(TensorError::DuplicateLabel {
                    space: name,
                    label: label.clone(),
                });
            }
        }
        Ok(Arc::new(Space { name, basis }))
    }

    /// A space whose basis labels are `0..dim`.
    pub fn with_dim<S: Into<String>>(name: S, dim: usize) -> Result<Arc<Space>> {
        Space::new(name, (0..dim).map(|i| i.to_string()).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.basis
            .iter()
            .position(|b| b == label)
            .ok_or_else(|| TensorError::UnknownLabel {
                space: self.name.clone(),
                label: label.to_string(),
            })
    }
}

/// One leg of a tensor: a space, possibly in its conjugate role.
#[derive(Debug, Clone)]
pub struct Wire {
    pub space: Arc<Space>,
    pub conjugate: bool,
}

impl PartialEq for Wire {
    fn eq(&self, other: &Self) -> bool {
        self.conjugate == other.conjugate && self.same_space(other)
    }
}

impl Wire {
    pub fn plain(space: &Arc<Space>) -> Wire {
        Wire {
            space: Arc::clone(space),
            conjugate: false,
        }
    }

    pub fn conj(space: &Arc<Space>) -> Wire {
        Wire {
            space: Arc::clone(space),
            conjugate: true,
        }
    }

    pub fn flipped(&self) -> Wire {
        Wire {
            space: Arc::clone(&self.space),
            conjugate: !self.conjugate,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn same_space(&self, other: &Wire) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    /// Checks that `self` and `other` may be joined by a cap.
    pub fn check_contractible(&self, other: &Wire) -> Result<()> {
        if !self.same_space(other) {
            return Err(TensorError::SpaceMismatch(
                self.space.name.clone(),
                other.space.name.clone(),
            ));
        }
        if self.conjugate == other.conjugate {
            return Err(TensorError::FlagMismatch(self.space.name.clone()));
        }
        Ok(())
    }
}

impl fmt::Display for Wire {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conjugate {
            write!(f, "{}*", self.space.name)
        } else {
            write!(f, "{}", self.space.name)
        }
    }
}

/// Formats a wire list as `N N* S`.
pub fn layout_string(wires: &[Wire]) -> String {
    wires.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ")
}

fn strides(wires: &[Wire]) -> Vec<usize> {
    let mut strides = vec![1; wires.len()];
    for k in (0..wires.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * wires[k + 1].dim();
    }
    strides
}

/// Advances a row-major multi-index; returns `false` after the last one.
pub(crate) fn increment(index: &mut [usize], dims: &[usize]) -> bool {
    for k in (0..index.len()).rev() {
        index[k] += 1;
        if index[k] < dims[k] {
            return true;
        }
        index[k] = 0;
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    wires: Vec<Wire>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(wires: Vec<Wire>, data: Vec<f64>) -> Result<Tensor> {
        let expected: usize = wires.iter().map(Wire::dim).product();
        if data.len() != expected {
            return Err(TensorError::DataLength {
                expected,
                got: data.len(),
            });
        }
        if let Some(bad) = data.iter().position(|x| !x.is_finite()) {
            return Err(TensorError::NonFinite(bad));
        }
        Ok(Tensor { wires, data })
    }

    pub fn zeros(wires: Vec<Wire>) -> Tensor {
        let len = wires.iter().map(Wire::dim).product();
        Tensor {
            wires,
            data: vec![0.0; len],
        }
    }

    pub fn scalar(value: f64) -> Tensor {
        Tensor {
            wires: Vec::new(),
            data: vec![value],
        }
    }

    /// Builds a tensor entry by entry from its multi-index.
    pub fn from_fn(wires: Vec<Wire>, mut f: impl FnMut(&[usize]) -> f64) -> Tensor {
        let dims: Vec<usize> = wires.iter().map(Wire::dim).collect();
        let len = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut index = vec![0; dims.len()];
        loop {
            data.push(f(&index));
            if !increment(&mut index, &dims) {
                break;
            }
        }
        Tensor { wires, data }
    }

    /// The basis vector `|label⟩` on a single plain wire.
    pub fn basis(space: &Arc<Space>, label: &str) -> Result<Tensor> {
        let i = space.index_of(label)?;
        let mut t = Tensor::zeros(vec![Wire::plain(space)]);
        t.data[i] = 1.0;
        Ok(t)
    }

    /// A vector on the given wires from weighted basis tuples.
    pub fn from_terms<'a, I>(wires: Vec<Wire>, terms: I) -> Result<Tensor>
    where
        I: IntoIterator<Item = (&'a [String], f64)>,
    {
        let mut t = Tensor::zeros(wires);
        let st = strides(&t.wires);
        for (labels, weight) in terms {
            if labels.len() != t.wires.len() {
                return Err(TensorError::ShapeMismatch(format!(
                    "term has {} labels but the tensor has {} wires",
                    labels.len(),
                    t.wires.len()
                )));
            }
            let mut offset = 0;
            for ((label, wire), stride) in labels.iter().zip(&t.wires).zip(&st) {
                offset += wire.space.index_of(label)? * stride;
            }
            t.data[offset] += weight;
        }
        Ok(t)
    }

    pub fn wires(&self) -> &[Wire] {
        &self.wires
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rank(&self) -> usize {
        self.wires.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.wires.iter().map(Wire::dim).collect()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let st = strides(&self.wires);
        let offset: usize = index.iter().zip(&st).map(|(i, s)| i * s).sum();
        self.data[offset]
    }

    /// The value of a rank-0 tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        if self.wires.is_empty() {
            Some(self.data[0])
        } else {
            None
        }
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|x| **x != 0.0).count()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        Tensor {
            wires: self.wires.clone(),
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.check_same_wires(other)?;
        Ok(Tensor {
            wires: self.wires.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    fn check_same_wires(&self, other: &Tensor) -> Result<()> {
        if self.wires != other.wires {
            return Err(TensorError::ShapeMismatch(format!(
                "[{}] vs [{}]",
                layout_string(&self.wires),
                layout_string(&other.wires)
            )));
        }
        Ok(())
    }

    /// Outer product; wires are `self.wires ++ other.wires`.
    pub fn tensor_product(&self, other: &Tensor) -> Tensor {
        let mut data = Vec::with_capacity(self.data.len() * other.data.len());
        for a in &self.data {
            data.extend(other.data.iter().map(|b| a * b));
        }
        let mut wires = self.wires.clone();
        wires.extend(other.wires.iter().cloned());
        Tensor { wires, data }
    }

    /// Applies a cap to wires `i` and `j`, summing over their shared index.
    pub fn contract(&self, i: usize, j: usize) -> Result<Tensor> {
        let rank = self.rank();
        for index in [i, j] {
            if index >= rank {
                return Err(TensorError::WireOutOfRange { index, rank });
            }
        }
        if i == j {
            return Err(TensorError::SelfContraction(i));
        }
        self.wires[i].check_contractible(&self.wires[j])?;

        let st = strides(&self.wires);
        let diag_stride = st[i] + st[j];
        let n = self.wires[i].dim();
        let kept: Vec<usize> = (0..rank).filter(|&k| k != i && k != j).collect();
        let wires: Vec<Wire> = kept.iter().map(|&k| self.wires[k].clone()).collect();
        let dims: Vec<usize> = wires.iter().map(Wire::dim).collect();
        let kept_strides: Vec<usize> = kept.iter().map(|&k| st[k]).collect();

        let mut data = Vec::with_capacity(dims.iter().product());
        let mut index = vec![0; dims.len()];
        loop {
            let base: usize = index.iter().zip(&kept_strides).map(|(a, s)| a * s).sum();
            data.push((0..n).map(|t| self.data[base + t * diag_stride]).sum());
            if !increment(&mut index, &dims) {
                break;
            }
        }
        Ok(Tensor { wires, data })
    }

    /// Contracts `a` against `b` along the given `(wire of a, wire of b)`
    /// pairs in one pass. The result carries a's remaining wires followed by
    /// b's remaining wires.
    pub fn contract_pair(a: &Tensor, b: &Tensor, pairs: &[(usize, usize)]) -> Result<Tensor> {
        for &(i, j) in pairs {
            if i >= a.rank() {
                return Err(TensorError::WireOutOfRange {
                    index: i,
                    rank: a.rank(),
                });
            }
            if j >= b.rank() {
                return Err(TensorError::WireOutOfRange {
                    index: j,
                    rank: b.rank(),
                });
            }
            a.wires[i].check_contractible(&b.wires[j])?;
        }
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if pairs[..k].iter().any(|&(i2, j2)| i2 == i || j2 == j) {
                return Err(TensorError::ShapeMismatch(format!(
                    "wire used twice in contraction ({i}, {j})"
                )));
            }
        }

        let a_free: Vec<usize> = (0..a.rank()).filter(|k| !pairs.iter().any(|p| p.0 == *k)).collect();
        let b_free: Vec<usize> = (0..b.rank()).filter(|k| !pairs.iter().any(|p| p.1 == *k)).collect();
        // a as (free × bound), b as (bound × free)
        let a_perm: Vec<usize> = a_free.iter().copied().chain(pairs.iter().map(|p| p.0)).collect();
        let b_perm: Vec<usize> = pairs.iter().map(|p| p.1).chain(b_free.iter().copied()).collect();
        let a_mat = a.permute(&a_perm)?;
        let b_mat = b.permute(&b_perm)?;
        let bound: usize = pairs.iter().map(|p| a.wires[p.0].dim()).product();
        let rows = a_mat.data.len() / bound;
        let cols = b_mat.data.len() / bound;

        let mut data = vec![0.0; rows * cols];
        for r in 0..rows {
            let a_row = &a_mat.data[r * bound..(r + 1) * bound];
            let out = &mut data[r * cols..(r + 1) * cols];
            for (k, &x) in a_row.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let b_row = &b_mat.data[k * cols..(k + 1) * cols];
                for (o, y) in out.iter_mut().zip(b_row) {
                    *o += x * y;
                }
            }
        }
        let wires = a_free
            .iter()
            .map(|&k| a.wires[k].clone())
            .chain(b_free.iter().map(|&k| b.wires[k].clone()))
            .collect();
        Ok(Tensor { wires, data })
    }

    /// Reorders wires: wire `k` of the result is wire `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Tensor> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if perm.len() != rank {
            return Err(TensorError::ShapeMismatch(format!(
                "permutation of length {} for rank {rank}",
                perm.len()
            )));
        }
        for &p in perm {
            if p >= rank || seen[p] {
                return Err(TensorError::ShapeMismatch(format!("invalid permutation {perm:?}")));
            }
            seen[p] = true;
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let st = strides(&self.wires);
        let wires: Vec<Wire> = perm.iter().map(|&p| self.wires[p].clone()).collect();
        let dims: Vec<usize> = wires.iter().map(Wire::dim).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| st[p]).collect();
        let mut data = Vec::with_capacity(self.data.len());
        let mut index = vec![0; rank];
        let mut offset = 0usize;
        loop {
            data.push(self.data[offset]);
            // incremental offset update mirrors `increment`
            let mut k = rank;
            loop {
                if k == 0 {
                    return Ok(Tensor { wires, data });
                }
                k -= 1;
                index[k] += 1;
                offset += src_strides[k];
                if index[k] < dims[k] {
                    break;
                }
                offset -= src_strides[k] * dims[k];
                index[k] = 0;
            }
        }
    }

    /// Horizontal reflection: wire order reversed and every flag flipped.
    /// Over the reals the entries are only re-indexed.
    pub fn conjugate(&self) -> Tensor {
        let rank = self.rank();
        let perm: Vec<usize> = (0..rank).rev().collect();
        let mut t = self.permute(&perm).expect("reversal is a permutation");
        for w in &mut t.wires {
            w.conjugate = !w.conjugate;
        }
        t
    }

    pub fn equal_within(&self, other: &Tensor, tol: f64) -> bool {
        self.wires == other.wires && self.data.iter().zip(&other.data).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Returns `λ > 0` with `self ≈ λ·other`, or `None`.
    ///
    /// `λ` is the least-squares ratio; the fit is accepted when the largest
    /// entrywise deviation after scaling is at most `tol`.
    pub fn proportional_to(&self, other: &Tensor, tol: f64) -> Result<Option<f64>> {
        self.check_same_wires(other)?;
        let denom: f64 = other.data.iter().map(|x| x * x).sum();
        if denom == 0.0 {
            return Err(TensorError::ShapeMismatch(
                "proportionality against a zero tensor".into(),
            ));
        }
        let lambda = self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() / denom;
        if lambda <= 0.0 {
            return Ok(None);
        }
        let ok = self
            .data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a - lambda * b).abs() <= tol);
        Ok(ok.then_some(lambda))
    }

    /// Cosine of the angle between two tensors with identical wires.
    pub fn cosine(&self, other: &Tensor) -> Result<f64> {
        self.check_same_wires(other)?;
        let dot: f64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum();
        let n = self.norm() * other.norm();
        Ok(if n == 0.0 { 0.0 } else { dot / n })
    }
}

/// Free-function form of [`Tensor::tensor_product`].
pub fn tensor_product(a: &Tensor, b: &Tensor) -> Tensor {
    a.tensor_product(b)
}

/// Kronecker delta over arbitrary wires of one space: 1 iff all indices agree.
pub fn delta(wires: Vec<Wire>) -> Result<Tensor> {
    if let Some(first) = wires.first() {
        if let Some(bad) = wires.iter().find(|w| !w.same_space(first)) {
            return Err(TensorError::SpaceMismatch(
                first.space.name.clone(),
                bad.space.name.clone(),
            ));
        }
    }
    let mut t = Tensor::zeros(wires);
    if t.wires.is_empty() {
        t.data[0] = 1.0;
        return Ok(t);
    }
    let step: usize = strides(&t.wires).iter().sum();
    for i in 0..t.wires[0].dim() {
        t.data[i * step] = 1.0;
    }
    Ok(t)
}

/// The effect `Σᵢ ⟨i ī|` on `[H, H̄]`.
pub fn cap(space: &Arc<Space>) -> Tensor {
    delta(vec![Wire::plain(space), Wire::conj(space)]).expect("single space")
}

/// The state `Σᵢ |i ī⟩` on `[H, H̄]`.
pub fn cup(space: &Arc<Space>) -> Tensor {
    delta(vec![Wire::plain(space), Wire::conj(space)]).expect("single space")
}

/// Spider with `inputs` conjugate legs followed by `outputs` plain legs.
pub fn spider(inputs: usize, outputs: usize, space: &Arc<Space>) -> Result<Tensor> {
    if inputs + outputs == 0 {
        return Err(TensorError::ShapeMismatch("spider needs at least one leg".into()));
    }
    let wires = std::iter::repeat_with(|| Wire::conj(space))
        .take(inputs)
        .chain(std::iter::repeat_with(|| Wire::plain(space)).take(outputs))
        .collect();
    delta(wires)
}
