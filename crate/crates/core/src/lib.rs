//! Dual density operators for compositional meaning.
//!
//! Word meanings are vectors on `[H, H̄, H, H̄]` built by doubling density
//! vectors a second time. They compose along pregroup reductions with every
//! structural map (caps, spiders, units) lifted slot-wise. Each result
//! carries two density-operator views, which give two entropies and a
//! graded entailment order.
//!
//! Modules, bottom-up:
//! * [`tensor`]: dense tensors over typed wires, structural generators and
//!   tensor networks with a brute-force oracle.
//! * [`density`]: density vectors, dual densities, Φ₁/Φ₂, entropy and
//!   entailment.
//! * [`pregroup`]: type syntax and reduction search.
//! * [`semantics`]: from reduction diagrams to contraction plans; relative
//!   pronouns.
//! * [`lexicon`]: the JSON lexicon format and the built-in Beirut model.

pub mod density;
pub mod lexicon;
pub mod pregroup;
pub mod semantics;
pub mod tensor;
