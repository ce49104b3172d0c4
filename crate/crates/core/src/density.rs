//! Density vectors, dual density operators and their two operator views.
//!
//! A dual density operator lives on four wires `[H, H̄, H, H̄]`, indexed
//! `x1 x2 x3 x4` below. It can be read as a density operator on `H ⊗ H̄` in
//! two ways:
//!
//! * Φ₁ has rows `(x1, x2)` and columns `(x4, x3)`. The column order is
//!   reversed because the conjugate copy `conj|ρ⟩` lists its wires in the
//!   opposite order.
//! * Φ₂ swaps the second and fourth wires first. Its rows are `(x1, x4)` and
//!   its columns `(x2, x3)`.
//!
//! [`DualDensity::swap_sw_ne`] exchanges `x2` and `x4`, so that
//! `phi1(swap_sw_ne(d)) == phi2(d)`.
//!
//! For a state `Σₖ p′ₖ |ρₖ⟩ conj|ρₖ⟩`, Φ₁ is the mixture `Σₖ p′ₖ |ρₖ⟩⟨ρₖ|`
//! over the groups, and Φ₂ is `Σₖ p′ₖ ρₖ ⊗ ρₖ`.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::tensor::{layout_string, Network, Space, Tensor, TensorError, Wire, WireRef};

/// Eigenvalues at or below this are dropped from entropy sums.
pub const EIGENVALUE_CLIP: f64 = 1e-12;
/// Default PSD tolerance for entailment bisection.
pub const ENTAILMENT_TOL: f64 = 1e-10;
const BISECTION_STEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("sense list is empty")]
    EmptySenseList,
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("sense vector has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("operator is not symmetric (deviation {0:e})")]
    NonSymmetric(f64),
    #[error("operator has zero trace")]
    ZeroTrace,
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, DensityError>;

/// How sense and group weights are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Unit vectors with probabilities summing to one.
    #[default]
    Probabilities,
    /// Any nonnegative weights and any vectors.
    Free,
}

const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Two,
    E,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

/// A square operator stored as a tensor whose first `rows` wires index rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    tensor: Tensor,
    rows: usize,
}

impl Operator {
    pub fn new(tensor: Tensor, rows: usize) -> Result<Operator> {
        if rows > tensor.rank() {
            return Err(DensityError::Layout(format!(
                "row split {rows} exceeds rank {}",
                tensor.rank()
            )));
        }
        let dims = tensor.dims();
        let r: usize = dims[..rows].iter().product();
        let c: usize = dims[rows..].iter().product();
        if r != c {
            return Err(DensityError::Layout(format!(
                "row dimension {r} differs from column dimension {c} in [{}]",
                layout_string(tensor.wires())
            )));
        }
        Ok(Operator { tensor, rows })
    }

    /// A matrix on `[H, H̄]`, given row-major.
    pub fn on_space(space: &Arc<Space>, data: Vec<f64>) -> Result<Operator> {
        let t = Tensor::new(vec![Wire::plain(space), Wire::conj(space)], data)?;
        Operator::new(t, 1)
    }

    /// The rank-one projector `|v⟩⟨v|` for a vector on a single wire.
    pub fn projector(v: &Tensor) -> Result<Operator> {
        if v.rank() != 1 {
            return Err(DensityError::Layout("projector needs a single-wire vector".into()));
        }
        Operator::new(v.tensor_product(&v.conjugate()), 1)
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn row_wires(&self) -> &[Wire] {
        &self.tensor.wires()[..self.rows]
    }

    pub fn dim(&self) -> usize {
        self.tensor.dims()[..self.rows].iter().product()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, self.tensor.data())
    }

    pub fn trace(&self) -> f64 {
        let m = self.matrix();
        m.trace()
    }

    /// Largest `|M - Mᵀ|` entry.
    pub fn asymmetry(&self) -> f64 {
        let m = self.matrix();
        (&m - m.transpose()).amax()
    }

    fn check_symmetric(&self) -> Result<DMatrix<f64>> {
        let m = self.matrix();
        let dev = (&m - m.transpose()).amax();
        if dev > WEIGHT_TOL * m.amax().max(1.0) {
            return Err(DensityError::NonSymmetric(dev));
        }
        Ok((&m + m.transpose()) * 0.5)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let m = self.check_symmetric()?;
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Number of eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> Result<usize> {
        Ok(self.eigenvalues()?.iter().filter(|&&x| x > cutoff).count())
    }

    pub fn normalize(&self) -> Result<Operator> {
        let tr = self.trace();
        if tr.abs() <= f64::MIN_POSITIVE {
            return Err(DensityError::ZeroTrace);
        }
        Ok(Operator {
            tensor: self.tensor.scale(1.0 / tr),
            rows: self.rows,
        })
    }

    /// Von Neumann entropy of the trace-normalized operator.
    pub fn entropy(&self, base: LogBase) -> Result<f64> {
        let ev = self.normalize()?.eigenvalues()?;
        let s: f64 = ev
            .iter()
            .filter(|&&l| l > EIGENVALUE_CLIP)
            .map(|&l| -l * base.log(l))
            .sum();
        Ok(s.max(0.0))
    }

    /// `Tr ρ̂²` of the trace-normalized operator.
    pub fn purity(&self) -> Result<f64> {
        let ev = self.normalize()?.eigenvalues()?;
        Ok(ev.iter().map(|l| l * l).sum())
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            tensor: self.tensor.scale(factor),
            rows: self.rows,
        }
    }

    fn sub_scaled(&self, other: &Operator, k: f64) -> Result<DMatrix<f64>> {
        if self.dim() != other.dim() {
            return Err(DensityError::Layout(format!(
                "operator dimensions differ: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.matrix() - other.matrix() * k)
    }
}

fn min_eigenvalue_of(m: DMatrix<f64>) -> f64 {
    let m = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Largest `k ∈ [0, 1]` such that `σ − kρ` is positive semidefinite, with
/// both operators trace-normalized first. `k = 1` means `ρ ⊑ σ`.
pub fn graded_entailment(rho: &Operator, sigma: &Operator, tol: f64) -> Result<f64> {
    for op in [rho, sigma] {
        let min = op.min_eigenvalue()?;
        if min < -tol * op.trace().abs().max(1.0) {
            return Err(DensityError::NotPsd(min));
        }
    }
    let rho = rho.normalize()?;
    let sigma = sigma.normalize()?;
    let psd_at = |k: f64| -> Result<bool> { Ok(min_eigenvalue_of(sigma.sub_scaled(&rho, k)?) >= -tol) };
    if psd_at(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if psd_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// One weighted sense vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Sense {
    pub weight: f64,
    pub vector: Tensor,
}

impl Sense {
    pub fn new(weight: f64, vector: Tensor) -> Sense {
        Sense { weight, vector }
    }
}

/// A weighted group of senses: one density vector inside a dual density.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseGroup {
    pub weight: f64,
    pub senses: Vec<Sense>,
}

fn check_weights(weights: impl Iterator<Item = f64> + Clone, weighting: Weighting) -> Result<()> {
    if let Some(w) = weights.clone().find(|w| *w < 0.0 || !w.is_finite()) {
        return Err(DensityError::NegativeProbability(w));
    }
    if weighting == Weighting::Probabilities {
        let total: f64 = weights.sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(DensityError::ProbabilitySum(total));
        }
    }
    Ok(())
}

/// A vector in `H ⊗ H̄` of the form `Σᵢ pᵢ |φᵢ⟩ conj|φᵢ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector {
    tensor: Tensor,
}

impl DensityVector {
    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn operator(&self) -> Operator {
        Operator::new(self.tensor.clone(), 1).expect("[H, H̄] is square")
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.tensor.wires()[0].space
    }
}

/// Builds `Σᵢ pᵢ |φᵢ⟩ conj|φᵢ⟩` from single-wire sense vectors.
pub fn density_vector(senses: &[Sense], weighting: Weighting) -> Result<DensityVector> {
    let first = senses.first().ok_or(DensityError::EmptySenseList)?;
    check_weights(senses.iter().map(|s| s.weight), weighting)?;
    let wire = first.vector.wires().first().cloned();
    let wire = match wire {
        Some(w) if !w.conjugate => w,
        _ => return Err(DensityError::Layout("sense vectors must live on one plain wire".into())),
    };
    let mut acc = Tensor::zeros(vec![wire.clone(), wire.flipped()]);
    for s in senses {
        if s.vector.wires() != [wire.clone()] {
            return Err(DensityError::Layout(format!(
                "sense vector on [{}], expected [{}]",
                layout_string(s.vector.wires()),
                wire
            )));
        }
        if weighting == Weighting::Probabilities {
            let norm = s.vector.norm();
            if (norm - 1.0).abs() > WEIGHT_TOL {
                return Err(DensityError::NotNormalized(norm));
            }
        }
        acc = acc.add(&s.vector.tensor_product(&s.vector.conjugate()).scale(s.weight))?;
    }
    Ok(DensityVector { tensor: acc })
}

/// Where a dual density came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    FromMixtures(Vec<SenseGroup>),
    /// A CPM² box `f` on `[H, C, D]`.
    FromNormalForm {
        box_tensor: Tensor,
    },
    Raw,
}

/// Which operator view of a dual density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    First,
    Second,
}

/// One of the two tensor factors of a view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// A vector on `[H, H̄, H, H̄]` whose two operator views are both PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDensity {
    tensor: Tensor,
    provenance: Provenance,
}

/// Checks the `[H, H̄, H, H̄]` layout (all four wires over one space, flags
/// alternating).
pub fn check_dual_layout(t: &Tensor) -> Result<()> {
    let w = t.wires();
    let ok = w.len() == 4
        && w.iter().all(|x| x.same_space(&w[0]))
        && w[1].conjugate != w[0].conjugate
        && w[2].conjugate == w[0].conjugate
        && w[3].conjugate == w[1].conjugate;
    if ok {
        Ok(())
    } else {
        Err(DensityError::Layout(format!(
            "expected [H H* H H*], got [{}]",
            layout_string(w)
        )))
    }
}

impl DualDensity {
    /// Wraps a raw tensor after checking layout, symmetry and PSD of both
    /// views.
    pub fn from_raw(tensor: Tensor, tol: f64) -> Result<DualDensity> {
        check_dual_layout(&tensor)?;
        let d = DualDensity {
            tensor,
            provenance: Provenance::Raw,
        };
        d.validate(tol)?;
        Ok(d)
    }

    /// Re-checks both views: symmetric and min eigenvalue ≥ −tol·scale.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for op in [self.phi1(), self.phi2()] {
            let min = op.min_eigenvalue()?;
            if min < -tol * op.trace().abs().max(1.0) {
                return Err(DensityError::NotPsd(min));
            }
        }
        Ok(())
    }

    /// `Σₖ p′ₖ |ρₖ⟩ conj|ρₖ⟩` with `ρₖ` the density vector of group `k`.
    pub fn from_mixtures(groups: &[SenseGroup], weighting: Weighting) -> Result<DualDensity> {
        if groups.is_empty() {
            return Err(DensityError::EmptySenseList);
        }
        check_weights(groups.iter().map(|g| g.weight), weighting)?;
        let mut acc: Option<Tensor> = None;
        for g in groups {
            let rho = density_vector(&g.senses, weighting)?;
            let term = rho.tensor.tensor_product(&rho.tensor.conjugate()).scale(g.weight);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(DualDensity {
            tensor: acc.expect("nonempty"),
            provenance: Provenance::FromMixtures(groups.to_vec()),
        })
    }

    /// The CPM² normal form of a box `f` on `[H, C, D]`:
    /// `Φ[x1,x2,x3,x4] = Σ f[x1,c,d] f[x2,c,d′] f[x3,c′,d′] f[x4,c′,d]`.
    ///
    /// The C wires join copies 1–2 and 3–4, the D wires join 1–4 and 2–3.
    pub fn from_normal_form(box_tensor: &Tensor) -> Result<DualDensity> {
        if box_tensor.rank() != 3 || box_tensor.wires()[0].conjugate {
            return Err(DensityError::Layout("normal-form box must be on [H, C, D]".into()));
        }
        let f = box_tensor.clone();
        let fc = box_tensor.conjugate(); // [D*, C*, H*]
        let r = WireRef::new;
        let net = Network::new(
            vec![f.clone(), fc.clone(), f, fc],
            vec![
                (r(0, 1), r(1, 1)),
                (r(2, 1), r(3, 1)),
                (r(0, 2), r(3, 0)),
                (r(1, 0), r(2, 2)),
            ],
            vec![r(0, 0), r(1, 2), r(2, 0), r(3, 2)],
        )?;
        Ok(DualDensity {
            tensor: net.contract()?,
            provenance: Provenance::FromNormalForm {
                box_tensor: box_tensor.clone(),
            },
        })
    }

    /// Unchecked wrapper used by composition, where the layout is known.
    pub(crate) fn from_tensor_unchecked(tensor: Tensor) -> Result<DualDensity> {
        check_dual_layout(&tensor)?;
        Ok(DualDensity {
            tensor,
            provenance: Provenance::Raw,
        })
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.tensor.wires()[0].space
    }

    pub fn phi1(&self) -> Operator {
        let t = self.tensor.permute(&[0, 1, 3, 2]).expect("rank 4");
        Operator::new(t, 2).expect("square")
    }

    pub fn phi2(&self) -> Operator {
        let t = self.tensor.permute(&[0, 3, 1, 2]).expect("rank 4");
        Operator::new(t, 2).expect("square")
    }

    pub fn view(&self, view: View) -> Operator {
        match view {
            View::First => self.phi1(),
            View::Second => self.phi2(),
        }
    }

    /// Exchanges wires `x2` and `x4`; an involution mapping Φ₂ onto Φ₁.
    pub fn swap_sw_ne(&self) -> DualDensity {
        DualDensity {
            tensor: self.tensor.permute(&[0, 3, 2, 1]).expect("rank 4"),
            provenance: Provenance::Raw,
        }
    }

    pub fn entropy1(&self, base: LogBase) -> Result<f64> {
        self.phi1().entropy(base)
    }

    pub fn entropy2(&self, base: LogBase) -> Result<f64> {
        self.phi2().entropy(base)
    }

    /// Full discard along the first view: the trace of Φ₁.
    pub fn discard1(&self) -> f64 {
        self.phi1().trace()
    }

    /// Full discard along the second view: the trace of Φ₂.
    pub fn discard2(&self) -> f64 {
        self.phi2().trace()
    }

    /// Traces one tensor factor out of a view, leaving an operator on a
    /// single `[H, H̄]` pair.
    ///
    /// Φ₁ factors are `(x1 | x4)` and `(x2 | x3)`; Φ₂ factors are
    /// `(x1 | x2)` and `(x4 | x3)`.
    pub fn partial_discard(&self, view: View, keep: Factor) -> Operator {
        // (wires to cap, wires kept as [row, col])
        let (cap, kept) = match (view, keep) {
            (View::First, Factor::First) => ((1, 2), [0, 3]),
            (View::First, Factor::Second) => ((0, 3), [1, 2]),
            (View::Second, Factor::First) => ((2, 3), [0, 1]),
            (View::Second, Factor::Second) => ((0, 1), [3, 2]),
        };
        let t = self.tensor.contract(cap.0, cap.1).expect("alternating flags");
        // `contract` keeps the remaining wires in their original order
        let remaining: Vec<usize> = (0..4).filter(|k| *k != cap.0 && *k != cap.1).collect();
        let perm: Vec<usize> = kept
            .iter()
            .map(|k| remaining.iter().position(|r| r == k).expect("kept wire"))
            .collect();
        Operator::new(t.permute(&perm).expect("rank 2"), 1).expect("square")
    }

    /// The density operator on `H` that word-level entailment compares:
    /// Φ₂ with its second factor traced out, `Σₖ p′ₖ Tr(ρₖ) ρₖ`.
    pub fn entailment_operator(&self) -> Operator {
        self.partial_discard(View::Second, Factor::First)
    }
}

/// CPM²-lifts a pure tensor: `v ⊗ conj(v) ⊗ v ⊗ conj(v)`, regrouped so that
/// each wire `w` of `v` becomes four adjacent wires `[w, w̄, w, w̄]`.
pub fn lift_pure(v: &Tensor) -> Tensor {
    let m = v.rank();
    let cv = v.conjugate();
    let quad = v.tensor_product(&cv).tensor_product(v).tensor_product(&cv);
    let mut perm = Vec::with_capacity(4 * m);
    for k in 0..m {
        perm.push(k);
        perm.push(m + (m - 1 - k));
        perm.push(2 * m + k);
        perm.push(3 * m + (m - 1 - k));
    }
    quad.permute(&perm).expect("slot-wise regrouping is a permutation")
}

/// Outcome of the preparation-state agreement probe for a vector pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Agreement {
    /// `uu† ≈ vv†`
    pub projectors_equal: bool,
    /// `u ≈ v` or `u ≈ −v`
    pub vectors_equal_up_to_sign: bool,
}

impl Agreement {
    pub fn holds(&self) -> bool {
        self.projectors_equal == self.vectors_equal_up_to_sign
    }
}

/// Compares `uu† = vv†` against `u = ±v`. Over the reals the sign cannot be
/// recovered from the projector, so the vector side allows either sign.
pub fn preparation_state_agreement(u: &Tensor, v: &Tensor, tol: f64) -> Result<Agreement> {
    if u.wires() != v.wires() {
        return Err(DensityError::Layout(format!(
            "[{}] vs [{}]",
            layout_string(u.wires()),
            layout_string(v.wires())
        )));
    }
    let pu = u.tensor_product(&u.conjugate());
    let pv = v.tensor_product(&v.conjugate());
    Ok(Agreement {
        projectors_equal: pu.equal_within(&pv, tol),
        vectors_equal_up_to_sign: u.equal_within(v, tol) || u.equal_within(&v.scale(-1.0), tol),
    })
}
