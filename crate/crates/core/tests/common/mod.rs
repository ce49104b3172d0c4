//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls into the code paths it checks: eigenvalues come from a
//! hand-rolled Jacobi sweep, dual densities from the explicit four-index sum
//! over sense pairs, and reducibility from exhaustive matching enumeration.

#![allow(dead_code)]

use std::sync::Arc;

use dualdensity::density::{Sense, SenseGroup};
use dualdensity::pregroup::{PregroupType, SimpleType};
use dualdensity::tensor::{Space, Tensor, Wire};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn space(name: &str, dim: usize) -> Arc<Space> {
    Space::with_dim(name, dim).unwrap()
}

pub fn random_tensor(wires: Vec<Wire>, rng: &mut impl Rng) -> Tensor {
    Tensor::from_fn(wires, |_| rng.gen_range(-1.0..1.0))
}

pub fn random_unit(space: &Arc<Space>, rng: &mut impl Rng) -> Tensor {
    loop {
        let v = random_tensor(vec![Wire::plain(space)], rng);
        let n = v.norm();
        if n > 1e-3 {
            return v.scale(1.0 / n);
        }
    }
}

pub fn random_probabilities(k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random probability-weighted sense groups over `space`.
pub fn random_groups(space: &Arc<Space>, rng: &mut impl Rng) -> Vec<SenseGroup> {
    let groups = rng.gen_range(1..=3);
    let outer = random_probabilities(groups, rng);
    outer
        .into_iter()
        .map(|weight| {
            let senses = rng.gen_range(1..=3);
            let inner = random_probabilities(senses, rng);
            SenseGroup {
                weight,
                senses: inner
                    .into_iter()
                    .map(|p| Sense::new(p, random_unit(space, rng)))
                    .collect(),
            }
        })
        .collect()
}

/// `Σₖ p′ₖ Σᵢⱼ pₖᵢ pₖⱼ φₖᵢ[x1] φₖᵢ[x2] φₖⱼ[x3] φₖⱼ[x4]`, written out.
pub fn expanded_dual_density(groups: &[SenseGroup], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim.pow(4)];
    for g in groups {
        for a in &g.senses {
            for b in &g.senses {
                let (u, v) = (a.vector.data(), b.vector.data());
                for x1 in 0..dim {
                    for x2 in 0..dim {
                        for x3 in 0..dim {
                            for x4 in 0..dim {
                                out[((x1 * dim + x2) * dim + x3) * dim + x4] +=
                                    g.weight * a.weight * b.weight * u[x1] * u[x2] * v[x3] * v[x4];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// A square matrix as rows.
pub type Matrix = Vec<Vec<f64>>;

/// Reads `Φ` on `[x1,x2,x3,x4]` as a matrix with the given row and column
/// wire orders.
pub fn dual_view(data: &[f64], dim: usize, rows: [usize; 2], cols: [usize; 2]) -> Matrix {
    let n = dim * dim;
    let mut m = vec![vec![0.0; n]; n];
    for (idx, &x) in data.iter().enumerate() {
        let x4 = idx % dim;
        let x3 = (idx / dim) % dim;
        let x2 = (idx / dim / dim) % dim;
        let x1 = idx / dim / dim / dim;
        let xs = [x1, x2, x3, x4];
        m[xs[rows[0]] * dim + xs[rows[1]]][xs[cols[0]] * dim + xs[cols[1]]] = x;
    }
    m
}

/// Rows (x1,x2), columns (x4,x3).
pub fn view1(data: &[f64], dim: usize) -> Matrix {
    dual_view(data, dim, [0, 1], [3, 2])
}

/// Rows (x1,x4), columns (x2,x3).
pub fn view2(data: &[f64], dim: usize) -> Matrix {
    dual_view(data, dim, [0, 3], [1, 2])
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.len();
    let mut a = m.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Von Neumann entropy in bits of `m / tr(m)`, clipping tiny eigenvalues.
pub fn entropy_bits(m: &Matrix) -> f64 {
    let ev = jacobi_eigenvalues(m);
    let total: f64 = ev.iter().sum();
    ev.iter()
        .map(|l| l / total)
        .filter(|&p| p > 1e-12)
        .map(|p| -p * p.log2())
        .sum()
}

pub fn rank(m: &Matrix, cutoff: f64) -> usize {
    jacobi_eigenvalues(m).iter().filter(|&&l| l > cutoff).count()
}

pub fn trace_power(m: &Matrix, power: u32) -> f64 {
    let n = m.len();
    let mut acc: Matrix = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..power {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if acc[i][k] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += acc[i][k] * m[k][j];
                }
            }
        }
        acc = next;
    }
    (0..n).map(|i| acc[i][i]).sum()
}

/// All partial matchings of `0..m` as lists of links `(i, j)`, `i < j`.
pub fn partial_matchings(m: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(
        p: usize,
        m: usize,
        used: &mut Vec<bool>,
        links: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if p == m {
            out.push(links.clone());
            return;
        }
        if used[p] {
            return go(p + 1, m, used, links, out);
        }
        go(p + 1, m, used, links, out);
        for k in p + 1..m {
            if !used[k] {
                used[k] = true;
                links.push((p, k));
                go(p + 1, m, used, links, out);
                links.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, m, &mut vec![false; m], &mut Vec::new(), &mut out);
    out
}

/// Whether `simples` reduces to `target`, by filtering every partial
/// matching: links contract `b^z` with `b^(z+1)`, do not cross, do not
/// enclose an unmatched position, and the unmatched positions spell the
/// target.
pub fn exhaustive_reducible(simples: &[SimpleType], target: &PregroupType) -> bool {
    let m = simples.len();
    partial_matchings(m).into_iter().any(|links| {
        let contract_ok = links
            .iter()
            .all(|&(i, j)| simples[i].base == simples[j].base && simples[j].adjoint == simples[i].adjoint + 1);
        if !contract_ok {
            return false;
        }
        let planar = links
            .iter()
            .all(|&(i, j)| links.iter().all(|&(k, l)| !(i < k && k < j && j < l)));
        if !planar {
            return false;
        }
        let matched: Vec<bool> = (0..m).map(|p| links.iter().any(|&(i, j)| p == i || p == j)).collect();
        let survivors: Vec<usize> = (0..m).filter(|&p| !matched[p]).collect();
        let open = survivors.iter().all(|&s| links.iter().all(|&(i, j)| !(i < s && s < j)));
        let spelled: Vec<&SimpleType> = survivors.iter().map(|&s| &simples[s]).collect();
        open && spelled == target.simples.iter().collect::<Vec<_>>()
    })
}

pub fn random_simple(rng: &mut impl Rng) -> SimpleType {
    let base = if rng.gen_bool(0.5) { "n" } else { "s" };
    SimpleType::new(base, rng.gen_range(-2..=2))
}

/// Splits a flat sequence into random nonempty words.
pub fn random_words(simples: Vec<SimpleType>, rng: &mut impl Rng) -> Vec<PregroupType> {
    let mut words = Vec::new();
    let mut current = Vec::new();
    for s in simples {
        current.push(s);
        if rng.gen_bool(0.4) {
            words.push(PregroupType::new(std::mem::take(&mut current)));
        }
    }
    if !current.is_empty() || words.is_empty() {
        words.push(PregroupType::new(current));
    }
    words
}

/// A random sequence of at most `max` simples with a target, built either
/// by wrapping the target in contracting pairs (mostly reducible) or
/// uniformly (mostly not).
pub fn random_case(max: usize, rng: &mut impl Rng) -> (Vec<SimpleType>, PregroupType) {
    if rng.gen_bool(0.5) {
        let t_len = rng.gen_range(0..=2.min(max));
        let target: Vec<SimpleType> = (0..t_len).map(|_| random_simple(rng)).collect();
        let mut seq = target.clone();
        while seq.len() + 2 <= max && rng.gen_bool(0.8) {
            let base = if rng.gen_bool(0.5) { "n" } else { "s" };
            let a = SimpleType::new(base, rng.gen_range(-2..=1));
            let b = SimpleType::new(base, a.adjoint + 1);
            let at = rng.gen_range(0..=seq.len());
            seq.insert(at, b);
            seq.insert(at, a);
        }
        if seq.is_empty() {
            seq.push(random_simple(rng));
        }
        (seq, PregroupType::new(target))
    } else {
        let len = rng.gen_range(1..=max);
        let seq = (0..len).map(|_| random_simple(rng)).collect();
        let t_len = rng.gen_range(0..=2);
        (seq, PregroupType::new((0..t_len).map(|_| random_simple(rng)).collect()))
    }
}

/// A random phrase over pure word meanings, in both plain and lifted form.
pub struct PurePhrase {
    pub text: &'static str,
    pub words: Vec<PregroupType>,
    pub target: PregroupType,
    pub ta: dualdensity::semantics::TypeAssignment,
    pub plain: Vec<Tensor>,
    pub lifted: Vec<dualdensity::tensor::Network>,
}

const TEMPLATES: [(&str, &str, &str); 7] = [
    ("subject verb object", "n, n^r s n^l, n", "s"),
    ("subject verb", "n, n^r s", "s"),
    ("adjective noun", "n n^l, n", "n"),
    ("adjective adjective noun", "n n^l, n n^l, n", "n"),
    ("subject verb adjective noun", "n, n^r s n^l, n n^l, n", "s"),
    ("noun that verb noun", "n, that_subj, n^r s n^l, n", "n"),
    ("noun that noun verb", "n, that_obj, n, n^r s n^l", "n"),
];

pub fn random_pure_phrase(rng: &mut impl Rng) -> PurePhrase {
    use dualdensity::density::lift_pure;
    use dualdensity::pregroup::parse_type;
    use dualdensity::semantics::{
        that_obj, that_obj_type, that_obj_unlifted, that_subj, that_subj_type, that_subj_unlifted, TypeAssignment,
    };
    use dualdensity::tensor::Network;

    let (text, types, target) = TEMPLATES[rng.gen_range(0..TEMPLATES.len())];
    // the brute-force oracle is exponential in the number of links, so
    // four-word phrases stay at |N| = 2
    let four_words = types.split(',').count() == 4;
    let n = space("N", if four_words { 2 } else { rng.gen_range(2..=3) });
    let s = space("S", 2);
    let ta = TypeAssignment::new().with("n", &n).with("s", &s);
    let mut words = Vec::new();
    let mut plain = Vec::new();
    let mut lifted = Vec::new();
    for tok in types.split(',').map(str::trim) {
        match tok {
            "that_subj" => {
                words.push(that_subj_type());
                plain.push(that_subj_unlifted(&ta).unwrap());
                lifted.push(that_subj(&ta).unwrap());
            }
            "that_obj" => {
                words.push(that_obj_type());
                plain.push(that_obj_unlifted(&ta).unwrap());
                lifted.push(that_obj(&ta).unwrap());
            }
            ty => {
                let ty = parse_type(ty).unwrap();
                let v = random_tensor(ta.wires(&ty).unwrap(), rng);
                lifted.push(Network::single(lift_pure(&v)));
                plain.push(v);
                words.push(ty);
            }
        }
    }
    PurePhrase {
        text,
        words,
        target: parse_type(target).unwrap(),
        ta,
        plain,
        lifted,
    }
}
