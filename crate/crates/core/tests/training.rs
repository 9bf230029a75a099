use goa_core::approx::approx_module;
use goa_core::photonic::GoaArch;
use goa_core::trainer::{
    blobs, hw_aware_train, project_hardware_masked, restore_and_retrain, train_float, Activation,
    BlobSpec, Dataset, RestoredMask, ToyNet, TrainSchedule,
};
use goa_core::GoaError;

fn data() -> (Dataset, Dataset) {
    let d = blobs(&BlobSpec {
        classes: 3,
        per_class: 200,
        spread: 0.5,
        width: 8,
        seed: 1,
    })
    .unwrap();
    d.split(150, 1).unwrap()
}

fn schedule(epochs: usize, period: usize) -> TrainSchedule {
    TrainSchedule {
        epochs,
        projection_period: period,
        learning_rate: 0.1,
        batch_size: 16,
        restoration_budget: 0,
        seed: 3,
    }
}

fn arch() -> GoaArch {
    GoaArch::new(4, 16, 4, 4).unwrap()
}

fn net() -> ToyNet {
    ToyNet::new(vec![8, 16, 16, 4], 3, Activation::Tanh, 2).unwrap()
}

#[test]
fn loss_falls_over_the_first_epochs() {
    let (train, val) = data();
    let out = train_float(net(), &train, &val, &schedule(5, 5)).unwrap();
    let losses: Vec<f64> = out.trace.epochs.iter().map(|e| e.train_loss).collect();
    assert!(losses.windows(2).all(|w| w[1] < w[0]), "{losses:?}");
    assert_eq!(out.trace.projections, 0);
}

#[test]
fn period_equal_to_epochs_projects_twice() {
    let (train, val) = data();
    let s = schedule(4, 4);
    let out = hw_aware_train(net(), &train, &val, &s, &arch(), &RestoredMask::none(3)).unwrap();
    assert_eq!(out.trace.projections, 2);
    assert_eq!(out.trace.projections, s.projection_count());
    assert!(out.trace.epochs[3].projected);
}

#[test]
fn projection_residuals_are_block_residuals() {
    let n = net();
    let p = project_hardware_masked(&n, 4, &RestoredMask::none(3)).unwrap();
    for (layer, w) in n.weights.iter().enumerate() {
        for br in 0..w.nrows() / 4 {
            for bc in 0..w.ncols() / 4 {
                let block = w.view((br * 4, bc * 4), (4, 4)).into_owned();
                let expect = approx_module(&block).unwrap().residual;
                assert!((p.residuals[layer][(br, bc)] - expect).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn fully_restored_projection_keeps_float_weights() {
    let n = net();
    let p = project_hardware_masked(&n, 4, &RestoredMask::all(&n, 4)).unwrap();
    for (a, b) in n.weights.iter().zip(&p.net.weights) {
        assert!((a - b).amax() <= 1e-8);
    }
}

#[test]
fn zero_budget_is_plain_continued_training() {
    let (train, val) = data();
    let s = schedule(2, 1);
    let hw = hw_aware_train(net(), &train, &val, &s, &arch(), &RestoredMask::none(3)).unwrap();
    let r = restore_and_retrain(&hw, &train, &val, &s, &arch(), 0).unwrap();
    assert!(r.selection.columns.is_empty());
    let cont = hw_aware_train(hw.net.clone(), &train, &val, &s, &arch(), &RestoredMask::none(3)).unwrap();
    assert_eq!(r.retrained.net, cont.net);
}

#[test]
fn budget_one_restores_the_worst_column() {
    let (train, val) = data();
    let s = schedule(2, 1);
    let hw = hw_aware_train(net(), &train, &val, &s, &arch(), &RestoredMask::none(3)).unwrap();
    let r = restore_and_retrain(&hw, &train, &val, &s, &arch(), 1).unwrap();
    assert_eq!(r.selection.refs(), vec![r.ranking.columns[0].column]);
    let top = r.ranking.columns[0].column;
    assert!(r.mask.is_restored(top.cluster, top.block_row));
    assert_eq!(r.mask.count(), 1);
    assert!(r.plan.clusters[top.cluster].is_restored(top.block_row));
}

#[test]
fn divergence_returns_the_trace() {
    let (train, val) = data();
    let mut s = schedule(3, 1);
    s.learning_rate = 1e300;
    let linear = ToyNet::new(vec![8, 16, 16, 4], 3, Activation::Identity, 2).unwrap();
    match train_float(linear, &train, &val, &s) {
        Err(GoaError::Diverged { epoch, .. }) => assert!(epoch >= 1),
        other => panic!("expected divergence, got {:?}", other.map(|o| o.trace.final_accuracy)),
    }
}
