//! From grammar to meaning: reduction diagrams become tensor networks over
//! CPM²-lifted word meanings.
//!
//! A simple type `b^z` is sent to the space assigned to `b`, in its
//! conjugate role when `z` is odd, so every pregroup contraction joins a
//! plain wire with a conjugate one. Under lifting, each atomic wire `w`
//! becomes the four slots `[w, w̄, w, w̄]`, and a lifted cap joins slot `s`
//! of one group with slot `s` of the other.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::density::{DensityError, DualDensity, LogBase};
use crate::pregroup::{reduce, PregroupError, PregroupType, ReductionDiagram, SimpleType};
use crate::tensor::{delta, layout_string, Network, Space, Tensor, TensorError, Wire, WireRef};

/// Number of copies a lifted wire carries.
pub const LIFT: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticsError {
    #[error("no space assigned to basic type `{0}`")]
    AssignmentGap(String),
    #[error("layout error: {0}")]
    Layout(String),
    #[error(transparent)]
    Pregroup(#[from] PregroupError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

pub type Result<T> = std::result::Result<T, SemanticsError>;

/// Maps basic grammatical types to meaning spaces (`n ↦ N`, `s ↦ S`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeAssignment {
    spaces: BTreeMap<String, Arc<Space>>,
}

impl TypeAssignment {
    pub fn new() -> TypeAssignment {
        TypeAssignment::default()
    }

    pub fn with(mut self, base: &str, space: &Arc<Space>) -> TypeAssignment {
        self.insert(base, space);
        self
    }

    pub fn insert(&mut self, base: &str, space: &Arc<Space>) {
        self.spaces.insert(base.to_string(), Arc::clone(space));
    }

    pub fn space(&self, base: &str) -> Result<&Arc<Space>> {
        self.spaces
            .get(base)
            .ok_or_else(|| SemanticsError::AssignmentGap(base.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<Space>)> {
        self.spaces.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn wire(&self, simple: &SimpleType) -> Result<Wire> {
        let space = self.space(&simple.base)?;
        Ok(Wire {
            space: Arc::clone(space),
            conjugate: simple.adjoint.rem_euclid(2) == 1,
        })
    }

    pub fn wires(&self, ty: &PregroupType) -> Result<Vec<Wire>> {
        ty.simples.iter().map(|s| self.wire(s)).collect()
    }

    pub fn lifted_wires(&self, ty: &PregroupType) -> Result<Vec<Wire>> {
        Ok(self.wires(ty)?.iter().flat_map(lift_wire).collect())
    }
}

/// The four slots `[w, w̄, w, w̄]` of a lifted wire.
pub fn lift_wire(w: &Wire) -> [Wire; 4] {
    [w.clone(), w.flipped(), w.clone(), w.flipped()]
}

/// A word with its grammatical type and lifted meaning. The meaning's open
/// wires are the lifted wires of the type, in order.
#[derive(Debug, Clone)]
pub struct Word {
    pub name: String,
    pub ty: PregroupType,
    pub meaning: Network,
}

/// One atomic contraction: `(word, wire)` on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomicCap {
    pub left: (usize, usize),
    pub right: (usize, usize),
}

/// The image of one reduction link: one atomic cap per copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedCap {
    pub link: (usize, usize),
    pub atomic: Vec<AtomicCap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPlan {
    /// Expected open wires of each word's meaning.
    pub layouts: Vec<Vec<Wire>>,
    pub caps: Vec<LiftedCap>,
    /// Output wires as `(word, wire)`, survivors in order.
    pub outputs: Vec<(usize, usize)>,
    /// 4 for lifted plans, 1 for plain ones.
    pub copies: usize,
}

impl ContractionPlan {
    pub fn output_wires(&self) -> Vec<Wire> {
        self.outputs.iter().map(|&(w, k)| self.layouts[w][k].clone()).collect()
    }

    pub fn atomic_contractions(&self) -> usize {
        self.caps.iter().map(|c| c.atomic.len()).sum()
    }
}

/// The lifted contraction plan of a reduction.
pub fn plan(d: &ReductionDiagram, ta: &TypeAssignment) -> Result<ContractionPlan> {
    plan_with_copies(d, ta, LIFT)
}

/// The same wiring on unlifted meanings (one copy per wire).
pub fn plan_unlifted(d: &ReductionDiagram, ta: &TypeAssignment) -> Result<ContractionPlan> {
    plan_with_copies(d, ta, 1)
}

fn plan_with_copies(d: &ReductionDiagram, ta: &TypeAssignment, copies: usize) -> Result<ContractionPlan> {
    let mut starts = Vec::with_capacity(d.words.len());
    let mut layouts = Vec::with_capacity(d.words.len());
    let mut offset = 0;
    for ty in &d.words {
        starts.push(offset);
        offset += ty.len();
        let wires = ta.wires(ty)?;
        layouts.push(if copies == 1 {
            wires
        } else {
            wires.iter().flat_map(lift_wire).collect()
        });
    }
    let locate = |p: usize| {
        let word = d.positions[p].word;
        (word, p - starts[word])
    };
    let caps = d
        .links
        .iter()
        .map(|&(i, j)| {
            let (wi, li) = locate(i);
            let (wj, lj) = locate(j);
            LiftedCap {
                link: (i, j),
                atomic: (0..copies)
                    .map(|s| AtomicCap {
                        left: (wi, copies * li + s),
                        right: (wj, copies * lj + s),
                    })
                    .collect(),
            }
        })
        .collect();
    let outputs = d
        .survivors
        .iter()
        .flat_map(|&p| {
            let (w, l) = locate(p);
            (0..copies).map(move |s| (w, copies * l + s))
        })
        .collect();
    Ok(ContractionPlan {
        layouts,
        caps,
        outputs,
        copies,
    })
}

/// Assembles the full tensor network of a plan applied to word meanings.
pub fn network(p: &ContractionPlan, meanings: &[Network]) -> Result<Network> {
    if meanings.len() != p.layouts.len() {
        return Err(SemanticsError::Layout(format!(
            "plan expects {} meanings, got {}",
            p.layouts.len(),
            meanings.len()
        )));
    }
    for (k, (m, layout)) in meanings.iter().zip(&p.layouts).enumerate() {
        let got = m.output_wires();
        if &got != layout {
            return Err(SemanticsError::Layout(format!(
                "word {k}: meaning on [{}], plan expects [{}]",
                layout_string(&got),
                layout_string(layout)
            )));
        }
    }
    let joins: Vec<_> = p
        .caps
        .iter()
        .flat_map(|c| c.atomic.iter().map(|a| (a.left, a.right)))
        .collect();
    Ok(Network::compose(meanings, &joins, &p.outputs)?)
}

/// Runs a plan by pairwise contraction.
pub fn execute(p: &ContractionPlan, meanings: &[Network]) -> Result<Tensor> {
    Ok(network(p, meanings)?.contract()?)
}

/// Runs a plan through the brute-force summation oracle.
pub fn execute_brute_force(p: &ContractionPlan, meanings: &[Network]) -> Result<Tensor> {
    Ok(network(p, meanings)?.contract_brute_force()?)
}

/// Pregroup type of the subject relative pronoun: head noun, output noun,
/// sentence leg, verb-subject leg.
pub fn that_subj_type() -> PregroupType {
    "n^r n s^l n".parse().expect("valid type")
}

/// Pregroup type of the object relative pronoun: head noun, output noun,
/// verb-object leg, sentence leg.
pub fn that_obj_type() -> PregroupType {
    "n^r n n^ll s^l".parse().expect("valid type")
}

/// A three-legged spider on the given noun positions and a unit
/// `Σᵢ |i⟩` on the sentence position, repeated once per copy.
#[allow(clippy::needless_range_loop)]
fn pronoun(
    ta: &TypeAssignment,
    ty: &PregroupType,
    legs: [usize; 3],
    sentence: usize,
    copies: usize,
) -> Result<Network> {
    let wires = ta.wires(ty)?;
    let slot = |pos: usize, s: usize| -> Wire {
        let w = &wires[pos];
        if s % 2 == 1 {
            w.flipped()
        } else {
            w.clone()
        }
    };
    let mut nodes = Vec::with_capacity(2 * copies);
    // where each (position, slot) wire lives
    let mut at = vec![vec![WireRef::new(0, 0); copies]; wires.len()];
    for s in 0..copies {
        let node = nodes.len();
        nodes.push(delta(legs.iter().map(|&p| slot(p, s)).collect())?);
        for (k, &p) in legs.iter().enumerate() {
            at[p][s] = WireRef::new(node, k);
        }
        at[sentence][s] = WireRef::new(nodes.len(), 0);
        nodes.push(delta(vec![slot(sentence, s)])?);
    }
    let outputs = at.into_iter().flatten().collect();
    Ok(Network::new(nodes, Vec::new(), outputs)?)
}

/// Lifted subject relative pronoun as a factored network.
pub fn that_subj(ta: &TypeAssignment) -> Result<Network> {
    pronoun(ta, &that_subj_type(), [0, 1, 3], 2, LIFT)
}

/// Lifted object relative pronoun as a factored network.
pub fn that_obj(ta: &TypeAssignment) -> Result<Network> {
    pronoun(ta, &that_obj_type(), [0, 1, 2], 3, LIFT)
}

pub fn that_subj_unlifted(ta: &TypeAssignment) -> Result<Tensor> {
    Ok(pronoun(ta, &that_subj_type(), [0, 1, 3], 2, 1)?.contract()?)
}

pub fn that_obj_unlifted(ta: &TypeAssignment) -> Result<Tensor> {
    Ok(pronoun(ta, &that_obj_type(), [0, 1, 2], 3, 1)?.contract()?)
}

/// Traces and entropies of a composed result on a dual-density layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectra {
    pub trace1: f64,
    pub trace2: f64,
    pub entropy1: Option<f64>,
    pub entropy2: Option<f64>,
}

impl Spectra {
    pub fn of(d: &DualDensity, base: LogBase) -> Spectra {
        Spectra {
            trace1: d.discard1(),
            trace2: d.discard2(),
            entropy1: d.entropy1(base).ok(),
            entropy2: d.entropy2(base).ok(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Composition {
    pub tensor: Tensor,
    pub diagram: ReductionDiagram,
    /// Present when the result lives on `[H, H̄, H, H̄]`.
    pub spectra: Option<Spectra>,
}

impl Composition {
    pub fn dual_density(&self) -> Option<DualDensity> {
        DualDensity::from_tensor_unchecked(self.tensor.clone()).ok()
    }
}

/// reduce → plan → execute, with spectral diagnostics on the result.
pub fn compose_phrase(
    words: &[&Word],
    target: &PregroupType,
    ta: &TypeAssignment,
    base: LogBase,
) -> Result<Composition> {
    let types: Vec<PregroupType> = words.iter().map(|w| w.ty.clone()).collect();
    let diagram = reduce(&types, target)?;
    compose_with_diagram(words, diagram, ta, base)
}

/// Composes along an already computed reduction.
pub fn compose_with_diagram(
    words: &[&Word],
    diagram: ReductionDiagram,
    ta: &TypeAssignment,
    base: LogBase,
) -> Result<Composition> {
    let p = plan(&diagram, ta)?;
    let meanings: Vec<Network> = words.iter().map(|w| w.meaning.clone()).collect();
    let tensor = execute(&p, &meanings)?;
    let spectra = DualDensity::from_tensor_unchecked(tensor.clone())
        .ok()
        .map(|d| Spectra::of(&d, base));
    Ok(Composition {
        tensor,
        diagram,
        spectra,
    })
}
