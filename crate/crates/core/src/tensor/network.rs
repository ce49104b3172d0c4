//! Tensor networks: a set of nodes, caps between node wires, and an ordered
//! list of open wires.
//!
//! [`Network::contract`] evaluates pairwise, always merging the two nodes
//! whose merged tensor is smallest. [`Network::contract_brute_force`] is an
//! independent oracle that sums the product of all node entries over every
//! joint index assignment.

use super::{Result, Tensor, TensorError, Wire};

/// A wire of a network node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WireRef {
    pub node: usize,
    pub wire: usize,
}

impl WireRef {
    pub fn new(node: usize, wire: usize) -> WireRef {
        WireRef { node, wire }
    }
}

/// An open wire of one part in [`Network::compose`]: `(part, output position)`.
pub type Port = (usize, usize);

#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Tensor>,
    links: Vec<(WireRef, WireRef)>,
    outputs: Vec<WireRef>,
}

impl From<Tensor> for Network {
    fn from(t: Tensor) -> Network {
        Network::single(t)
    }
}

impl Network {
    /// Every node wire must appear exactly once, either in a link or as an
    /// output, and every link must join contractible wires.
    pub fn new(nodes: Vec<Tensor>, links: Vec<(WireRef, WireRef)>, outputs: Vec<WireRef>) -> Result<Network> {
        let mut used: Vec<Vec<bool>> = nodes.iter().map(|t| vec![false; t.rank()]).collect();
        let mut mark = |r: WireRef| -> Result<()> {
            let slot = used
                .get_mut(r.node)
                .and_then(|n| n.get_mut(r.wire))
                .ok_or_else(|| TensorError::ShapeMismatch(format!("dangling wire reference {r:?}")))?;
            if *slot {
                return Err(TensorError::ShapeMismatch(format!("wire {r:?} used twice")));
            }
            *slot = true;
            Ok(())
        };
        for &(a, b) in &links {
            mark(a)?;
            mark(b)?;
        }
        for &o in &outputs {
            mark(o)?;
        }
        if let Some((node, _)) = used.iter().enumerate().find(|(_, n)| n.iter().any(|u| !u)) {
            return Err(TensorError::ShapeMismatch(format!(
                "node {node} has an unconnected wire"
            )));
        }
        let net = Network { nodes, links, outputs };
        for &(a, b) in &net.links {
            net.wire(a).check_contractible(net.wire(b))?;
        }
        Ok(net)
    }

    pub fn single(t: Tensor) -> Network {
        let outputs = (0..t.rank()).map(|w| WireRef::new(0, w)).collect();
        Network {
            nodes: vec![t],
            links: Vec::new(),
            outputs,
        }
    }

    pub fn nodes(&self) -> &[Tensor] {
        &self.nodes
    }

    pub fn links(&self) -> &[(WireRef, WireRef)] {
        &self.links
    }

    pub fn outputs(&self) -> &[WireRef] {
        &self.outputs
    }

    pub fn wire(&self, r: WireRef) -> &Wire {
        &self.nodes[r.node].wires[r.wire]
    }

    /// The open wires, in output order.
    pub fn output_wires(&self) -> Vec<Wire> {
        self.outputs.iter().map(|&r| self.wire(r).clone()).collect()
    }

    /// Places several networks side by side and joins their open wires.
    ///
    /// `joins` and `outputs` address open wires as `(part, output position)`.
    pub fn compose(parts: &[Network], joins: &[(Port, Port)], outputs: &[Port]) -> Result<Network> {
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        let mut offsets = Vec::with_capacity(parts.len());
        for part in parts {
            let offset = nodes.len();
            offsets.push(offset);
            nodes.extend(part.nodes.iter().cloned());
            let shift = |r: WireRef| WireRef::new(r.node + offset, r.wire);
            links.extend(part.links.iter().map(|&(a, b)| (shift(a), shift(b))));
        }
        let open = |(part, pos): (usize, usize)| -> Result<WireRef> {
            let r = parts
                .get(part)
                .and_then(|p| p.outputs.get(pos))
                .ok_or_else(|| TensorError::ShapeMismatch(format!("no open wire {pos} on part {part}")))?;
            Ok(WireRef::new(r.node + offsets[part], r.wire))
        };
        for &(a, b) in joins {
            links.push((open(a)?, open(b)?));
        }
        let outputs = outputs.iter().map(|&o| open(o)).collect::<Result<Vec<_>>>()?;
        Network::new(nodes, links, outputs)
    }

    /// Pairwise contraction down to one tensor over the output wires.
    pub fn contract(&self) -> Result<Tensor> {
        // each live tensor remembers which original wire each of its legs is
        struct Live {
            tensor: Tensor,
            legs: Vec<WireRef>,
        }
        let mut live: Vec<Live> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(n, t)| Live {
                tensor: t.clone(),
                legs: (0..t.rank()).map(|w| WireRef::new(n, w)).collect(),
            })
            .collect();
        let mut pending = self.links.clone();

        let locate = |live: &[Live], r: WireRef| -> (usize, usize) {
            for (i, l) in live.iter().enumerate() {
                if let Some(p) = l.legs.iter().position(|&x| x == r) {
                    return (i, p);
                }
            }
            unreachable!("wire {r:?} lost during contraction")
        };

        while !pending.is_empty() {
            // self-links first
            if let Some(k) = pending
                .iter()
                .position(|&(a, b)| locate(&live, a).0 == locate(&live, b).0)
            {
                let (a, b) = pending.remove(k);
                let (i, pa) = locate(&live, a);
                let (_, pb) = locate(&live, b);
                let l = &mut live[i];
                l.tensor = l.tensor.contract(pa, pb)?;
                l.legs = l
                    .legs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != pa && *k != pb)
                    .map(|(_, &r)| r)
                    .collect();
                continue;
            }

            // cheapest pair of live tensors joined by at least one link
            let mut best: Option<(usize, usize, usize)> = None;
            for &(a, b) in &pending {
                let (i, _) = locate(&live, a);
                let (j, _) = locate(&live, b);
                let (i, j) = (i.min(j), i.max(j));
                let shared: Vec<usize> = pending
                    .iter()
                    .filter_map(|&(x, y)| {
                        let (xi, xp) = locate(&live, x);
                        let (yi, yp) = locate(&live, y);
                        if (xi, yi) == (i, j) {
                            Some(live[i].tensor.wires[xp].dim())
                        } else if (xi, yi) == (j, i) {
                            Some(live[i].tensor.wires[yp].dim())
                        } else {
                            None
                        }
                    })
                    .collect();
                let bound: usize = shared.iter().product();
                let size = live[i].tensor.len() / bound * (live[j].tensor.len() / bound);
                if best.is_none_or(|(_, _, s)| size < s) {
                    best = Some((i, j, size));
                }
            }
            let (i, j, _) = best.expect("pending links exist");

            let mut pairs = Vec::new();
            pending.retain(|&(x, y)| {
                let (xi, xp) = locate(&live, x);
                let (yi, yp) = locate(&live, y);
                if (xi, yi) == (i, j) {
                    pairs.push((xp, yp));
                    false
                } else if (xi, yi) == (j, i) {
                    pairs.push((yp, xp));
                    false
                } else {
                    true
                }
            });
            let right = live.remove(j);
            let left = &mut live[i];
            let merged = Tensor::contract_pair(&left.tensor, &right.tensor, &pairs)?;
            let legs: Vec<WireRef> = left
                .legs
                .iter()
                .enumerate()
                .filter(|(k, _)| !pairs.iter().any(|p| p.0 == *k))
                .map(|(_, &r)| r)
                .chain(
                    right
                        .legs
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| !pairs.iter().any(|p| p.1 == *k))
                        .map(|(_, &r)| r),
                )
                .collect();
            left.tensor = merged;
            left.legs = legs;
        }

        let mut iter = live.into_iter();
        let first = iter
            .next()
            .map(|l| (l.tensor, l.legs))
            .unwrap_or((Tensor::scalar(1.0), Vec::new()));
        let (tensor, legs) = iter.fold(first, |(t, mut legs), l| {
            legs.extend(l.legs);
            (t.tensor_product(&l.tensor), legs)
        });
        let perm: Vec<usize> = self
            .outputs
            .iter()
            .map(|o| legs.iter().position(|l| l == o).expect("output wire survives"))
            .collect();
        tensor.permute(&perm)
    }

    /// Independent oracle: sums `Π nodes` over every assignment of every
    /// index, free and bound. Branches whose partial product is already zero
    /// are skipped, which leaves the sum unchanged.
    pub fn contract_brute_force(&self) -> Result<Tensor> {
        // one variable per link and per output wire
        let mut var_of: Vec<Vec<usize>> = self.nodes.iter().map(|t| vec![usize::MAX; t.rank()]).collect();
        let mut var_dims = Vec::new();
        for &o in &self.outputs {
            var_of[o.node][o.wire] = var_dims.len();
            var_dims.push(self.wire(o).dim());
        }
        for &(a, b) in &self.links {
            var_of[a.node][a.wire] = var_dims.len();
            var_of[b.node][b.wire] = var_dims.len();
            var_dims.push(self.wire(a).dim());
        }
        let n_out = self.outputs.len();

        // greedy node order: next node introduces the fewest new variables
        let mut order = Vec::new();
        let mut var_order: Vec<usize> = Vec::new();
        let mut assigned = vec![false; var_dims.len()];
        let mut remaining: Vec<usize> = (0..self.nodes.len()).collect();
        // after the variable at depth d is fixed, these nodes become complete
        let mut completes_at: Vec<Vec<usize>> = vec![Vec::new(); var_dims.len() + 1];
        while !remaining.is_empty() {
            let (k, _) = remaining
                .iter()
                .enumerate()
                .min_by_key(|(_, &n)| {
                    let fresh = var_of[n].iter().filter(|&&v| !assigned[v]).count();
                    (fresh, self.nodes[n].nonzero_count())
                })
                .expect("nonempty");
            let n = remaining.remove(k);
            for &v in &var_of[n] {
                if !assigned[v] {
                    assigned[v] = true;
                    var_order.push(v);
                }
            }
            completes_at[var_order.len()].push(n);
            order.push(n);
        }

        let strides: Vec<Vec<usize>> = self.nodes.iter().map(|t| super::strides(&t.wires)).collect();
        let out_wires = self.output_wires();
        let out_dims: Vec<usize> = out_wires.iter().map(Wire::dim).collect();
        let out_strides = super::strides(&out_wires);
        let mut out = vec![0.0; out_dims.iter().product()];
        let mut values = vec![0usize; var_dims.len()];

        struct Ctx<'a> {
            net: &'a Network,
            var_of: &'a [Vec<usize>],
            var_dims: &'a [usize],
            var_order: &'a [usize],
            completes_at: &'a [Vec<usize>],
            strides: &'a [Vec<usize>],
            out_strides: &'a [usize],
            n_out: usize,
        }

        fn node_value(ctx: &Ctx, n: usize, values: &[usize]) -> f64 {
            let offset: usize = ctx.var_of[n]
                .iter()
                .zip(&ctx.strides[n])
                .map(|(&v, s)| values[v] * s)
                .sum();
            ctx.net.nodes[n].data[offset]
        }

        fn descend(ctx: &Ctx, depth: usize, partial: f64, values: &mut Vec<usize>, out: &mut [f64]) {
            let mut p = partial;
            for &n in &ctx.completes_at[depth] {
                p *= node_value(ctx, n, values);
                if p == 0.0 {
                    return;
                }
            }
            if depth == ctx.var_order.len() {
                let offset: usize = (0..ctx.n_out).map(|v| values[v] * ctx.out_strides[v]).sum();
                out[offset] += p;
                return;
            }
            let v = ctx.var_order[depth];
            for x in 0..ctx.var_dims[v] {
                values[v] = x;
                descend(ctx, depth + 1, p, values, out);
            }
        }

        let ctx = Ctx {
            net: self,
            var_of: &var_of,
            var_dims: &var_dims,
            var_order: &var_order,
            completes_at: &completes_at,
            strides: &strides,
            out_strides: &out_strides,
            n_out,
        };
        descend(&ctx, 0, 1.0, &mut values, &mut out);
        Tensor::new(out_wires, out)
    }
}
