mod common;

use dualdensity::density::{graded_entailment, lift_pure, DualDensity, LogBase, Operator, Weighting, ENTAILMENT_TOL};
use dualdensity::pregroup::{check_diagram, reduce, PregroupType};
use dualdensity::semantics::{execute, plan, plan_unlifted};
use dualdensity::tensor::{delta, Network, Tensor, Wire, WireRef};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn mixture(seed: u64, dim: usize) -> (DualDensity, Vec<dualdensity::density::SenseGroup>) {
    let mut rng = common::rng(seed);
    let space = common::space("H", dim);
    let groups = common::random_groups(&space, &mut rng);
    (
        DualDensity::from_mixtures(&groups, Weighting::Probabilities).unwrap(),
        groups,
    )
}

fn random_operator(seed: u64, dim: usize) -> Operator {
    let (d, _) = mixture(seed, dim);
    d.entailment_operator().normalize().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mixtures_have_psd_views(seed in any::<u64>(), dim in 2usize..=6) {
        let (d, _) = mixture(seed, dim);
        for op in [d.phi1(), d.phi2()] {
            prop_assert!(op.asymmetry() < 1e-12);
            prop_assert!(op.min_eigenvalue().unwrap() >= -1e-10);
        }
    }

    #[test]
    fn mixture_matches_sense_pair_expansion(seed in any::<u64>(), dim in 2usize..=5) {
        let (d, groups) = mixture(seed, dim);
        let expected = common::expanded_dual_density(&groups, dim);
        for (a, b) in d.tensor().data().iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_exchanges_the_entropies(seed in any::<u64>(), dim in 2usize..=5) {
        let (d, _) = mixture(seed, dim);
        let s = d.swap_sw_ne();
        let (s1, s2) = (d.entropy1(LogBase::Two).unwrap(), d.entropy2(LogBase::Two).unwrap());
        prop_assert!((s.entropy1(LogBase::Two).unwrap() - s2).abs() < 1e-9);
        prop_assert!((s.entropy2(LogBase::Two).unwrap() - s1).abs() < 1e-9);
        prop_assert!(s.swap_sw_ne().tensor().equal_within(d.tensor(), 0.0));
    }

    #[test]
    fn spectra_match_the_jacobi_oracle(seed in any::<u64>(), dim in 2usize..=4) {
        let (d, _) = mixture(seed, dim);
        let data = d.tensor().data();
        for (op, m) in [(d.phi1(), common::view1(data, dim)), (d.phi2(), common::view2(data, dim))] {
            let ours = op.eigenvalues().unwrap();
            let theirs = common::jacobi_eigenvalues(&m);
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
            // power sums reconstruct the spectrum
            for k in 1..=3 {
                let from_ev: f64 = ours.iter().map(|l| l.powi(k as i32)).sum();
                prop_assert!((from_ev - common::trace_power(&m, k)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn normal_form_states_are_psd(seed in any::<u64>(), h in 2usize..=4, c in 1usize..=3, dd in 1usize..=3) {
        let mut rng = common::rng(seed);
        let wires = vec![
            Wire::plain(&common::space("H", h)),
            Wire::plain(&common::space("C", c)),
            Wire::plain(&common::space("D", dd)),
        ];
        let d = DualDensity::from_normal_form(&common::random_tensor(wires, &mut rng)).unwrap();
        prop_assert!(d.validate(1e-10).is_ok());
        let data = d.tensor().data();
        prop_assert!(common::rank(&common::view1(data, h), 1e-9) <= dd * dd);
        prop_assert!(common::rank(&common::view2(data, h), 1e-9) <= c * c);
    }

    #[test]
    fn entailment_is_a_graded_order(a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), dim in 2usize..=4) {
        let (ra, rb, rc) = (random_operator(a, dim), random_operator(b, dim), random_operator(c, dim));
        prop_assert!((graded_entailment(&ra, &ra, ENTAILMENT_TOL).unwrap() - 1.0).abs() < 1e-9);
        let kab = graded_entailment(&ra, &rb, ENTAILMENT_TOL).unwrap();
        let kba = graded_entailment(&rb, &ra, ENTAILMENT_TOL).unwrap();
        let kbc = graded_entailment(&rb, &rc, ENTAILMENT_TOL).unwrap();
        let kac = graded_entailment(&ra, &rc, ENTAILMENT_TOL).unwrap();
        prop_assert!((0.0..=1.0).contains(&kab));
        // k·ρ ⊑ σ holds at the returned k
        let gap = Operator::new(rb.tensor().add(&ra.tensor().scale(-kab)).unwrap(), 1).unwrap();
        prop_assert!(gap.min_eigenvalue().unwrap() >= -1e-8);
        // graded transitivity
        prop_assert!(kac >= kab * kbc - 1e-8);
        // antisymmetry between normalized states
        if kab > 1.0 - 1e-9 && kba > 1.0 - 1e-9 {
            prop_assert!(ra.tensor().equal_within(rb.tensor(), 1e-6));
        }
    }

    #[test]
    fn reduce_agrees_with_exhaustive_matching(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (simples, target) = common::random_case(8, &mut rng);
        let words = common::random_words(simples.clone(), &mut rng);
        let expected = common::exhaustive_reducible(&simples, &target);
        match reduce(&words, &target) {
            Ok(d) => {
                prop_assert!(expected);
                prop_assert!(check_diagram(&d));
            }
            Err(_) => prop_assert!(!expected),
        }
    }

    #[test]
    fn contraction_order_does_not_matter(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let h = common::space("H", rng.gen_range(1..=3));
        let k = common::space("K", rng.gen_range(1..=3));
        // a ring of three nodes with one open wire each
        let nodes = vec![
            common::random_tensor(vec![Wire::plain(&h), Wire::plain(&k), Wire::conj(&h)], &mut rng),
            common::random_tensor(vec![Wire::conj(&k), Wire::plain(&h), Wire::plain(&k)], &mut rng),
            common::random_tensor(vec![Wire::conj(&h), Wire::conj(&k), Wire::plain(&h)], &mut rng),
        ];
        let r = WireRef::new;
        let links = vec![(r(0, 1), r(1, 0)), (r(1, 2), r(2, 1)), (r(2, 0), r(0, 0))];
        let outputs = vec![r(0, 2), r(1, 1), r(2, 2)];
        let net = Network::new(nodes.clone(), links.clone(), outputs.clone()).unwrap();
        let reference = net.contract_brute_force().unwrap();
        prop_assert!(net.contract().unwrap().equal_within(&reference, 1e-9));
        // same network with nodes listed in a shuffled order
        let mut order: Vec<usize> = (0..3).collect();
        order.shuffle(&mut rng);
        let pos = |old: usize| order.iter().position(|&o| o == old).unwrap();
        let remap = |w: WireRef| r(pos(w.node), w.wire);
        let shuffled = Network::new(
            order.iter().map(|&o| nodes[o].clone()).collect(),
            links.iter().map(|&(a, b)| (remap(a), remap(b))).collect(),
            outputs.iter().map(|&o| remap(o)).collect(),
        )
        .unwrap();
        prop_assert!(shuffled.contract().unwrap().equal_within(&reference, 1e-9));
        // pairwise by hand, in the opposite order
        let ab = Tensor::contract_pair(&nodes[2], &nodes[0], &[(0, 0)]).unwrap(); // [K*, H, K, H]
        let full = Tensor::contract_pair(&ab, &nodes[1], &[(0, 2), (2, 0)]).unwrap(); // [H, H, H]
        let manual = full.permute(&[1, 2, 0]).unwrap();
        prop_assert!(manual.equal_within(&reference, 1e-9));
    }

    #[test]
    fn lifting_commutes_with_composition(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let phrase = common::random_pure_phrase(&mut rng);
        let d = reduce(&phrase.words, &phrase.target).unwrap();
        let lifted = execute(&plan(&d, &phrase.ta).unwrap(), &phrase.lifted).unwrap();
        let plain_nets: Vec<Network> = phrase.plain.iter().cloned().map(Network::single).collect();
        let plain = execute(&plan_unlifted(&d, &phrase.ta).unwrap(), &plain_nets).unwrap();
        prop_assert!(lifted.equal_within(&lift_pure(&plain), 1e-9), "{}", phrase.text);
    }
}

#[test]
fn snake_identity_holds_in_every_small_dimension() {
    let mut rng = common::rng(7);
    for dim in 1..=8 {
        let h = common::space("H", dim);
        let v = common::random_tensor(vec![Wire::plain(&h)], &mut rng);
        // v fed through two identity wires bent back on each other
        let cup = delta(vec![Wire::conj(&h), Wire::plain(&h)]).unwrap();
        let cap = delta(vec![Wire::conj(&h), Wire::plain(&h)]).unwrap();
        let r = WireRef::new;
        let net = Network::new(
            vec![v.clone(), cup, cap],
            vec![(r(0, 0), r(1, 0)), (r(1, 1), r(2, 0))],
            vec![r(2, 1)],
        )
        .unwrap();
        assert!(net.contract().unwrap().equal_within(&v, 0.0), "dim {dim}");
        assert!(net.contract_brute_force().unwrap().equal_within(&v, 0.0), "dim {dim}");
    }
}

#[test]
fn unit_target_reduces_fully() {
    let words = dualdensity::pregroup::parse_type_list("n, n^r").unwrap();
    let d = reduce(&words, &PregroupType::unit()).unwrap();
    assert!(d.survivors.is_empty());
    assert!(check_diagram(&d));
}
