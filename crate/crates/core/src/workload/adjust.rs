//! Growing kernel depths (and the matching producer filter counts) into the
//! slack left by a layer's cluster and the grid height.

use serde::{Deserialize, Serialize};

use super::layers::Network;
use crate::error::Result;
use crate::photonic::GoaArch;

/// Unused length of a length-`l` cluster: `(L, S1, S2)` with `L = ⌈l/k⌉k`,
/// `S1 = L − l` and `S2 = mk − L` (zero once the cluster is taller than the grid).
pub fn slack(l: usize, k: usize, m: usize) -> (usize, usize, usize) {
    let big_l = l.div_ceil(k) * k;
    (big_l, big_l - l, (m * k).saturating_sub(big_l))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthAdjustment {
    pub layer: usize,
    pub producer: usize,
    pub length: usize,
    pub padded_length: usize,
    pub s1: usize,
    pub s2: usize,
    pub delta: usize,
    pub depth_before: usize,
    pub depth_after: usize,
    pub filters_before: usize,
    pub filters_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedNetwork {
    pub original: Network,
    pub adjusted: Network,
    /// `Δl` per layer, zero where nothing changed.
    pub deltas: Vec<usize>,
    pub adjustments: Vec<DepthAdjustment>,
}

/// Picks `Δl` for a layer of length `l = h²d`. Returns `(Δl, d′)`.
///
/// `d′ = ⌊(l + Δl)/h²⌋` must be a multiple of the pool ratio `r`. Among the
/// admissible values, the one growing the producer's module width
/// `⌈(d′/r)/k⌉` least wins, and among those the largest `Δl`.
pub fn choose_delta(
    h: usize,
    depth: usize,
    r: usize,
    producer_filters: usize,
    k: usize,
    m: usize,
) -> (usize, usize) {
    let h2 = h * h;
    let l = h2 * depth;
    let (_, s1, s2) = slack(l, k, m);
    let base_width = producer_filters.div_ceil(k);
    let mut best = (0usize, depth, 0usize);
    for delta in 0..=s1 + s2 {
        let d = (l + delta) / h2;
        if !d.is_multiple_of(r) {
            continue;
        }
        let growth = (d / r).div_ceil(k).saturating_sub(base_width);
        if growth < best.2 || (growth == best.2 && delta > best.0) {
            best = (delta, d, growth);
        }
    }
    (best.0, best.1)
}

/// Adjusts every layer fed by exactly one weight layer that feeds nothing
/// else, from the last layer back to the first.
pub fn adjust_depths(network: &Network, arch: &GoaArch) -> Result<AdjustedNetwork> {
    network.validate()?;
    arch.validate()?;
    let mut net = network.clone();
    let mut deltas = vec![0; net.layers.len()];
    let mut adjustments = Vec::new();
    for a in (0..net.layers.len()).rev() {
        if !net.layers[a].is_weight() {
            continue;
        }
        let [b] = net.producers(a)[..] else {
            continue;
        };
        if net.consumers(b) != [a] {
            continue;
        }
        let r = net.pool_ratio_between(b, a);
        let layer = &net.layers[a];
        let (h, depth) = (layer.h(), layer.depth);
        let filters_b = net.layers[b].filters;
        let (delta, d_new) = choose_delta(h, depth, r, filters_b, arch.k, arch.m);
        let l = layer.length();
        let (big_l, s1, s2) = slack(l, arch.k, arch.m);
        deltas[a] = delta;
        if d_new == depth {
            continue;
        }
        net.layers[a].depth = d_new;
        net.layers[b].filters = d_new / r;
        adjustments.push(DepthAdjustment {
            layer: a,
            producer: b,
            length: l,
            padded_length: big_l,
            s1,
            s2,
            delta,
            depth_before: depth,
            depth_after: d_new,
            filters_before: filters_b,
            filters_after: d_new / r,
        });
    }
    adjustments.reverse();
    net.validate()?;
    Ok(AdjustedNetwork {
        original: network.clone(),
        adjusted: net,
        deltas,
        adjustments,
    })
}
