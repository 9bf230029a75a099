use std::collections::BTreeSet;
use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use goa_core::cost::{component_counts, estimate, ComponentKind, DeviceParams};
use goa_core::exec::{compile_cluster, run_cluster, run_cluster_with};
use goa_core::mapper::{pack, pack_monotone, ClusterShape, MappingPlan, Placement};
use goa_core::photonic::{GoaArch, MeshProgram, ModuleGrid, Route};
use goa_core::search::{exhaustive_search, metric_terms, Bounds, Normalization, SearchConfig, Weights};
use goa_core::workload::{partition, LayerSpec, Network, WeightMatrix};
use goa_core::GoaError;

fn load<T: serde::de::DeserializeOwned>(name: &str) -> T {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn shared_pass_arch() -> GoaArch {
    GoaArch::new(20, 12, 63, 20).unwrap()
}

#[test]
fn five_vgg_matrices_share_the_first_pass() {
    let net: Network = load("vgg16_subset5.json");
    let plan = pack(&net.cluster_shapes(63), &shared_pass_arch()).unwrap();
    plan.validate().unwrap();
    assert!(plan.mapping_cost <= 2);
    let first: BTreeSet<usize> = plan.passes[0].iter().map(|p| p.cluster).collect();
    assert_eq!(first.len(), 4);
    // conv3_2 reshapes to 256×2304: 37 block columns cannot stand in 20 grid rows.
    let big = plan.clusters.iter().find(|c| c.cols == 2304).unwrap();
    assert_eq!((big.block_rows, big.block_cols), (5, 37));
    assert!(plan.segments_of(big.id).len() >= 2);
}

#[test]
fn empty_network_costs_nothing() {
    let plan = pack(&[], &shared_pass_arch()).unwrap();
    assert_eq!((plan.mapping_cost, plan.eo_conversions), (0, 0));
    let cost = estimate(&shared_pass_arch(), &plan, &DeviceParams::illustrative()).unwrap();
    assert_eq!((cost.latency_ns, cost.energy_pj), (0.0, 0.0));
}

fn shapes(k: usize, dims: &[(usize, usize)]) -> Vec<ClusterShape> {
    dims.iter()
        .enumerate()
        .map(|(i, &(br, bc))| ClusterShape::new(i, i, br * k, bc * k, k))
        .collect()
}

#[test]
fn greedy_can_need_an_extra_pass_on_a_taller_grid() {
    // (block_rows, block_cols): grid widths 2, 4, 1, 3 and heights 6, 1, 6, 7.
    let s = shapes(2, &[(2, 6), (4, 1), (1, 6), (3, 7)]);
    let small = GoaArch::new(5, 6, 2, 6).unwrap();
    let tall = GoaArch::new(6, 6, 2, 6).unwrap();
    let greedy = (pack(&s, &small).unwrap().mapping_cost, pack(&s, &tall).unwrap().mapping_cost);
    assert!(greedy.1 > greedy.0, "greedy costs {greedy:?}");
    let mono = (
        pack_monotone(&s, &small).unwrap(),
        pack_monotone(&s, &tall).unwrap(),
    );
    mono.1.validate().unwrap();
    assert_eq!(mono.1.arch, tall);
    assert!(mono.1.mapping_cost <= mono.0.mapping_cost);
}

/// Fewest passes over every split of every cluster into full-width segments
/// and every placement of those segments.
fn optimal_passes(shapes: &[ClusterShape], m: usize, n: usize) -> usize {
    fn compositions(h: usize, max: usize) -> Vec<Vec<usize>> {
        if h == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=h.min(max) {
            for mut rest in compositions(h - first, max) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    struct Search {
        m: usize,
        n: usize,
        limit: usize,
        bins: Vec<Vec<bool>>,
    }
    impl Search {
        fn free(&self, b: usize, r: usize, c: usize, w: usize, h: usize) -> bool {
            (r..r + h).all(|i| (c..c + w).all(|j| !self.bins[b][i * self.n + j]))
        }
        fn set(&mut self, b: usize, r: usize, c: usize, w: usize, h: usize, v: bool) {
            for i in r..r + h {
                for j in c..c + w {
                    self.bins[b][i * self.n + j] = v;
                }
            }
        }
        /// `floor` is the earliest slot an identical previous piece allows.
        fn place(&mut self, pieces: &[(usize, usize)], floor: (usize, usize), left: usize) -> bool {
            let Some((&(w, h), rest)) = pieces.split_first() else {
                return true;
            };
            let used: usize = self.bins.iter().map(|b| b.iter().filter(|&&x| x).count()).sum();
            if used + left > self.limit * self.m * self.n {
                return false;
            }
            let same_next = rest.first() == Some(&(w, h));
            let cells = (self.m + 1 - h) * (self.n + 1 - w);
            for b in floor.0..self.bins.len() {
                let start = if b == floor.0 { floor.1 } else { 0 };
                for slot in start..cells {
                    let (r, c) = (slot / (self.n + 1 - w), slot % (self.n + 1 - w));
                    if self.free(b, r, c, w, h) {
                        self.set(b, r, c, w, h, true);
                        let next = if same_next { (b, slot + 1) } else { (0, 0) };
                        if self.place(rest, next, left - w * h) {
                            return true;
                        }
                        self.set(b, r, c, w, h, false);
                    }
                }
            }
            if self.bins.len() < self.limit {
                let b = self.bins.len();
                self.bins.push(vec![false; self.m * self.n]);
                self.set(b, 0, 0, w, h, true);
                let next = if same_next { (b, 1) } else { (0, 0) };
                if self.place(rest, next, left - w * h) {
                    return true;
                }
                self.bins.pop();
            }
            false
        }
    }
    let mut multisets: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    let mut stack: Vec<(usize, Vec<(usize, usize)>)> = vec![(0, Vec::new())];
    while let Some((i, pieces)) = stack.pop() {
        let Some(s) = shapes.get(i) else {
            let mut sorted = pieces;
            sorted.sort_by_key(|&(w, h)| std::cmp::Reverse((w * h, w, h)));
            multisets.insert(sorted);
            continue;
        };
        for comp in compositions(s.height(), m) {
            let mut next = pieces.clone();
            next.extend(comp.iter().map(|&h| (s.width(), h)));
            stack.push((i + 1, next));
        }
    }
    let area: usize = shapes.iter().map(ClusterShape::area).sum();
    let mut limit = area.div_ceil(m * n).max(1);
    loop {
        for pieces in &multisets {
            let mut search = Search { m, n, limit, bins: Vec::new() };
            if search.place(pieces, (0, 0), area) {
                return limit;
            }
        }
        limit += 1;
    }
}

#[test]
fn greedy_against_exhaustive_packing() {
    // Hand-checked oracle cases: extents are (grid columns, grid rows).
    assert_eq!(optimal_passes(&shapes(2, &[(1, 2), (1, 2), (2, 2)]), 2, 2), 2);
    assert_eq!(optimal_passes(&shapes(2, &[(1, 3)]), 1, 1), 3);
    assert_eq!(optimal_passes(&shapes(2, &[(1, 3), (2, 1), (1, 1)]), 2, 2), 2);
    assert_eq!(optimal_passes(&shapes(2, &[(2, 2), (2, 2), (1, 1)]), 2, 2), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut total_greedy, mut total_opt, mut worst) = (0, 0, 1.0f64);
    for _ in 0..100 {
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=3);
        let count = rng.random_range(1..=6);
        let dims: Vec<(usize, usize)> = (0..count)
            .map(|_| (rng.random_range(1..=n), rng.random_range(1..=m + 2)))
            .collect();
        let s = shapes(2, &dims);
        let greedy = pack(&s, &GoaArch::new(m, n, 2, m).unwrap()).unwrap().mapping_cost;
        let opt = optimal_passes(&s, m, n);
        assert!(greedy >= opt, "greedy {greedy} beat the exhaustive {opt} on {dims:?}");
        total_greedy += greedy;
        total_opt += opt;
        worst = worst.max(greedy as f64 / opt as f64);
    }
    println!(
        "greedy/optimal pass ratio: {:.3} overall, {worst:.3} worst",
        total_greedy as f64 / total_opt as f64
    );
}

#[test]
fn one_extra_conversion_costs_one_conversion_latency() {
    let arch = GoaArch::new(2, 1, 2, 2).unwrap();
    let shape = ClusterShape::new(0, 0, 2, 4, 2);
    let whole = pack(std::slice::from_ref(&shape), &arch).unwrap();
    assert_eq!(whole.eo_conversions, 0);
    let seg = |segment, row| Placement {
        cluster: 0,
        layer: 0,
        pass: 0,
        segment,
        origin_row: row,
        origin_col: 0,
        height: 1,
        width: 1,
        block_col_start: row,
        restored: vec![],
    };
    let split = MappingPlan {
        passes: vec![vec![seg(0, 0), seg(1, 1)]],
        eo_conversions: 1,
        ..whole.clone()
    };
    split.validate().unwrap();
    let p = DeviceParams::illustrative();
    let a = estimate(&arch, &whole, &p).unwrap();
    let b = estimate(&arch, &split, &p).unwrap();
    assert!((b.latency_ns - a.latency_ns - p.eo_conversion.latency_ns).abs() < 1e-12);
    assert!((b.energy_pj - a.energy_pj - p.eo_conversion.energy_pj).abs() < 1e-9);
}

#[test]
fn more_work_never_costs_less() {
    let arch = GoaArch::new(3, 4, 4, 3).unwrap();
    let p = DeviceParams::illustrative();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut dims = Vec::new();
    let mut last = estimate(&arch, &pack(&[], &arch).unwrap(), &p).unwrap();
    for _ in 0..12 {
        dims.push((rng.random_range(1..=4), rng.random_range(1..=5)));
        let plan = pack(&shapes(4, &dims), &arch).unwrap();
        let cost = estimate(&arch, &plan, &p).unwrap();
        if cost.passes >= last.passes && cost.eo_conversions >= last.eo_conversions {
            assert!(cost.latency_ns >= last.latency_ns);
            if cost.touched_mzis >= last.touched_mzis {
                assert!(cost.energy_pj >= last.energy_pj);
            }
        }
        last = cost;
    }
}

#[test]
fn counts_match_a_fully_programmed_grid() {
    for (m, n, k) in [(1, 1, 2), (2, 3, 4), (3, 2, 5)] {
        let arch = GoaArch::new(m, n, k, m).unwrap();
        let mut grid = ModuleGrid::new(&arch);
        for r in 0..m {
            for c in 0..n {
                grid.set(r, c, MeshProgram::identity(k), Route::Down).unwrap();
            }
        }
        let modules: Vec<_> = (0..m)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter_map(|(r, c)| grid.get(r, c))
            .collect();
        let mzis: usize = modules.iter().map(|s| s.program.mzi_count() + s.program.diagonal().len()).sum();
        let counts = component_counts(&arch);
        assert_eq!(counts.get(ComponentKind::Mzi), mzis);
        assert_eq!(counts.get(ComponentKind::Mrr), modules.len() * k);
        assert_eq!(counts.get(ComponentKind::Dac), grid.row_wavelengths().len() * k);
        assert_eq!(counts.get(ComponentKind::Adc), n * k);
    }
}

#[test]
fn fully_restored_cluster_is_exact_on_the_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let arch = GoaArch::new(2, 7, 4, 2).unwrap();
    let w = WeightMatrix::random(0, 11, 13, &mut rng);
    let cluster = partition(&w, 4).unwrap();
    let mut shape = cluster.shape(0);
    shape.restored = (0..shape.block_rows).collect();
    let plan = pack(std::slice::from_ref(&shape), &arch).unwrap();
    assert!(plan.segments_of(0).len() > 1);
    let programs = vec![compile_cluster(&cluster, &shape).unwrap()];
    let x: Vec<f64> = (0..13).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y = run_cluster(&plan, &programs, 0, &x).unwrap();
    let expect = &w.values * DVector::from_column_slice(&x);
    let err = y.iter().zip(expect.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "err {err}");
}

#[test]
fn shared_channel_in_a_column_is_a_routing_violation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let arch = GoaArch::new(3, 2, 2, 3).unwrap();
    let w = WeightMatrix::new(0, DMatrix::from_fn(4, 6, |_, _| rng.random_range(-1.0..1.0)));
    let cluster = partition(&w, 2).unwrap();
    let shape = cluster.shape(0);
    let plan = pack(std::slice::from_ref(&shape), &arch).unwrap();
    let programs = vec![compile_cluster(&cluster, &shape).unwrap()];
    let x = vec![0.5; 6];
    assert!(run_cluster_with(&plan, &programs, 0, &x, Some(&[0, 1, 2])).is_ok());
    match run_cluster_with(&plan, &programs, 0, &x, Some(&[0, 1, 1])) {
        Err(GoaError::RoutingViolation { upper_row, lower_row, wavelength, .. }) => {
            assert_eq!((upper_row, lower_row, wavelength), (1, 2, 1));
        }
        other => panic!("expected a routing violation, got {other:?}"),
    }
}

fn raw_config(budget: usize, workloads: Vec<Network>) -> SearchConfig {
    SearchConfig {
        schema_version: 1,
        weights: Weights::default(),
        mzi_budget: budget,
        wavelengths: 6,
        m_range: Bounds::new(1, 6),
        n_range: Bounds::new(1, 6),
        k_range: Bounds::new(2, 8),
        population: 8,
        generations: 5,
        crossover_rate: 0.9,
        mutation_rate: 0.2,
        seed: 0,
        normalization: Normalization::Raw,
        workloads,
    }
}

#[test]
fn doubling_the_budget_never_hurts() {
    let p = DeviceParams::illustrative();
    let net: Network = load("tiny_mlp.json");
    let mut last = f64::INFINITY;
    for budget in [150, 300, 600, 1200] {
        let best = exhaustive_search(&raw_config(budget, vec![net.clone()]), &p).unwrap()[0].fitness;
        assert!(best <= last, "budget {budget}: {best} after {last}");
        last = best;
    }
}

#[test]
fn one_extra_pass_in_one_of_two_workloads() {
    let a = Network::new("a", vec![LayerSpec::dense(8, 8)]);
    let b = Network::new("b", vec![LayerSpec::dense(8, 8)]);
    let b2 = Network::new("b2", vec![LayerSpec::dense(8, 8), LayerSpec::dense(8, 8)]);
    let weights = Weights {
        alpha: 1.0,
        beta: 0.0,
        gamma: 0.0,
        delta: 0.0,
    };
    let p = DeviceParams::illustrative();
    let eval = |ws: Vec<Network>| {
        let cfg = SearchConfig {
            weights,
            ..raw_config(1000, ws)
        };
        let t = metric_terms(&cfg, &p, 2, 2, 4).unwrap().unwrap();
        goa_core::search::metric(&t, &cfg.weights, None)
    };
    // On a 2×2 grid of 4-port modules each 8×8 layer fills one pass.
    assert!((eval(vec![a.clone(), b2]) - eval(vec![a, b]) - 0.5).abs() < 1e-12);
}
