use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use goa_core::approx::{approx_module, fit_diagonal, Orientation};
use goa_core::cost::{estimate, DeviceParams};
use goa_core::mapper::{pack, pack_monotone, ClusterShape};
use goa_core::photonic::{
    accumulate_column, decompose_unitary, haar_unitary, mesh_forward, mzi_transfer, reconstruct,
    ComplexSignalVector, GoaArch, MeshProgram, MziSetting, C64,
};
use goa_core::workload::{adjust_depths, partition, LayerSpec, Network, WeightMatrix};

fn random_program(k: usize, rng: &mut ChaCha8Rng) -> MeshProgram {
    let p = decompose_unitary(&haar_unitary(k, rng)).unwrap();
    let d = (0..k).map(|_| rng.random_range(0.0..2.0)).collect();
    p.with_diagonal(d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mzi_is_unitary(theta in -10.0f64..10.0, phi in -10.0f64..10.0) {
        let t = mzi_transfer(MziSetting::new(theta, phi));
        let dev = (t.adjoint() * t - nalgebra::Matrix2::<C64>::identity()).norm();
        prop_assert!(dev < 1e-12);
    }

    #[test]
    fn mesh_forward_matches_reconstruct(k in 2usize..=12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(k, &mut rng);
        let x: Vec<C64> = (0..k).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let y = mesh_forward(&p, &ComplexSignalVector::new(x.clone(), 0)).unwrap();
        let expect = reconstruct(&p) * DVector::from_vec(x);
        let err = y.amplitudes.iter().zip(expect.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "err {err}");
    }

    #[test]
    fn accumulate_rejects_exactly_repeated_channels(channels in prop::collection::vec(0usize..5, 1..5)) {
        let outputs: Vec<(usize, ComplexSignalVector)> = channels
            .iter()
            .enumerate()
            .map(|(row, &wl)| (row, ComplexSignalVector::from_real(&[row as f64 + 1.0, 1.0], wl)))
            .collect();
        let mut sorted = channels.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let distinct = sorted.len() == channels.len();
        match accumulate_column(0, &outputs) {
            Ok(sum) => {
                prop_assert!(distinct);
                let n = channels.len() as f64;
                prop_assert_eq!(sum, vec![n * (n + 1.0) / 2.0, n]);
            }
            Err(_) => prop_assert!(!distinct),
        }
    }

    #[test]
    fn partition_round_trip(rows in 1usize..40, cols in 1usize..40, k in 2usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = WeightMatrix::random(0, rows, cols, &mut rng);
        let c = partition(&w, k).unwrap();
        prop_assert_eq!((c.rows_mod, c.cols_mod), (rows.div_ceil(k), cols.div_ceil(k)));
        prop_assert_eq!(c.reassemble(), w);
    }

    #[test]
    fn approx_is_idempotent(k in 2usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        let hw = approx_module(&w).unwrap().hardware_matrix();
        let again = approx_module(&hw).unwrap().hardware_matrix();
        prop_assert!((&again - &hw).amax() <= 1e-9);
    }

    #[test]
    fn approx_beats_random_diagonals(k in 2usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        let a = approx_module(&w).unwrap();
        for _ in 0..50 {
            let d = DVector::from_fn(k, |_, _| rng.random_range(-2.0..2.0));
            let other = (&w - &a.u * DMatrix::from_diagonal(&d)).norm();
            prop_assert!(a.residual <= other + 1e-12);
        }
    }

    #[test]
    fn row_fit_beats_perturbed_rows(k in 2usize..=6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        let u = goa_core::photonic::random_orthogonal(k, &mut rng);
        let s = fit_diagonal(&w, &u, Orientation::Row).unwrap();
        let res = |s: &[f64]| (&w - DMatrix::from_diagonal(&DVector::from_column_slice(s)) * &u).norm();
        let best = res(&s);
        for i in 0..k {
            let mut t = s.clone();
            t[i] += rng.random_range(-0.1..0.1);
            prop_assert!(best <= res(&t) + 1e-12);
        }
    }

    #[test]
    fn monotone_packing_never_costs_more_on_a_bigger_grid(
        m in 1usize..=5,
        n in 4usize..=6,
        dims in prop::collection::vec((1usize..=4, 1usize..=9), 0..10),
    ) {
        let k = 2;
        let shapes: Vec<ClusterShape> = dims
            .iter()
            .enumerate()
            .map(|(i, &(br, bc))| ClusterShape::new(i, i, br * k, bc * k, k))
            .collect();
        let plan = |m: usize, n: usize| pack_monotone(&shapes, &GoaArch::new(m, n, k, m).unwrap()).unwrap();
        let base = plan(m, n);
        base.validate().unwrap();
        prop_assert!(base.mapping_cost <= pack(&shapes, &base.arch).unwrap().mapping_cost);
        prop_assert!(plan(m + 1, n).mapping_cost <= base.mapping_cost, "taller grid costs more");
        prop_assert!(plan(m, n + 1).mapping_cost <= base.mapping_cost, "wider grid costs more");
    }

    #[test]
    fn estimate_is_linear_in_params(m in 1usize..=4, n in 1usize..=4, k in 2usize..=8, factor in 0.0f64..10.0) {
        let arch = GoaArch::new(m, n, k, m).unwrap();
        let shapes = vec![ClusterShape::new(0, 0, n * k, 3 * m * k, k)];
        let plan = pack(&shapes, &arch).unwrap();
        let p = DeviceParams::illustrative();
        let a = estimate(&arch, &plan, &p).unwrap();
        let b = estimate(&arch, &plan, &p.scaled(factor)).unwrap();
        let close = |x: f64, y: f64| (x * factor - y).abs() <= 1e-9 * (1.0 + y.abs());
        prop_assert!(close(a.area_um2, b.area_um2));
        prop_assert!(close(a.static_power_mw, b.static_power_mw));
        prop_assert!(close(a.latency_ns, b.latency_ns));
        prop_assert!(close(a.energy_pj, b.energy_pj));
    }

    #[test]
    fn depth_adjustment_only_grows_and_stays_consistent(
        filters in prop::collection::vec(1usize..200, 2..6),
        k in 3usize..20,
        m in 1usize..8,
    ) {
        let mut layers = vec![LayerSpec::conv(filters[0], 3, 3)];
        for w in filters.windows(2) {
            layers.push(LayerSpec::conv(w[1], 3, w[0]));
        }
        let net = Network::new("chain", layers);
        net.validate().unwrap();
        let arch = GoaArch::new(m, 4, k, m).unwrap();
        let a = adjust_depths(&net, &arch).unwrap();
        a.adjusted.validate().unwrap();
        for (before, after) in net.layers.iter().zip(&a.adjusted.layers) {
            prop_assert!(after.depth >= before.depth && after.filters >= before.filters);
        }
        for adj in &a.adjustments {
            prop_assert!(adj.length + adj.delta <= (adj.padded_length + adj.s2).max(m * k));
        }
    }
}
