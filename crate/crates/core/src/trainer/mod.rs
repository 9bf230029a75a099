//! Hardware-aware training of a small dense network: weights are pulled back
//! into per-block `UΣ` form on a fixed epoch schedule, and selected module
//! columns can be restored to exact form and retrained.

mod data;
mod net;

use std::collections::BTreeSet;

use log::info;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::{
    apply_restorations, approx_module, rank_columns, select_restorations, ColumnRef,
    RestorationSelection,
};
use crate::error::{GoaError, Result};
use crate::mapper::{pack, ClusterShape, MappingPlan};
use crate::photonic::GoaArch;
use crate::workload::{partition, WeightMatrix};

pub use data::{blobs, load_csv, BlobSpec, Dataset};
pub use net::{train_step, Activation, Batch, Gradients, Targets, ToyNet};

pub const TRACE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    pub epochs: usize,
    /// Project every `projection_period` epochs.
    pub projection_period: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    #[serde(default)]
    pub restoration_budget: usize,
    pub seed: u64,
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GoaError::InvalidConfig(msg));
        if self.projection_period == 0 {
            return bad("projection_period must be at least 1".into());
        }
        if self.epochs < self.projection_period {
            return bad(format!(
                "{} epochs is shorter than the projection period {}",
                self.epochs, self.projection_period
            ));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad(format!("learning rate {} is invalid", self.learning_rate));
        }
        Ok(())
    }

    /// Projections a run performs: one per completed period plus the final one.
    pub fn projection_count(&self) -> usize {
        self.epochs / self.projection_period + 1
    }
}

/// Block rows (module columns) of each layer kept in exact restored form.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RestoredMask {
    pub layers: Vec<BTreeSet<usize>>,
}

impl RestoredMask {
    pub fn none(layers: usize) -> Self {
        Self {
            layers: vec![BTreeSet::new(); layers],
        }
    }

    /// Every block of `net` restored.
    pub fn all(net: &ToyNet, k: usize) -> Self {
        Self {
            layers: net
                .weights
                .iter()
                .map(|w| (0..w.nrows().div_ceil(k)).collect())
                .collect(),
        }
    }

    pub fn is_restored(&self, layer: usize, block_row: usize) -> bool {
        self.layers.get(layer).is_some_and(|s| s.contains(&block_row))
    }

    pub fn count(&self) -> usize {
        self.layers.iter().map(BTreeSet::len).sum()
    }
}

/// Result of projecting a net: the projected net and each layer's block
/// residuals (`block_rows × block_cols`, zero for restored blocks).
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub net: ToyNet,
    pub residuals: Vec<DMatrix<f64>>,
}

fn check_divisible(net: &ToyNet, k: usize) -> Result<()> {
    if let Some(d) = net.dims.iter().find(|&&d| d % k != 0) {
        return Err(GoaError::InvalidConfig(format!(
            "layer width {d} is not a multiple of the module size {k}"
        )));
    }
    Ok(())
}

/// Replaces every unrestored `k × k` block by its hardware matrix `U·diag(σ)`.
pub fn project_hardware_masked(net: &ToyNet, k: usize, mask: &RestoredMask) -> Result<Projection> {
    check_divisible(net, k)?;
    let mut out = net.clone();
    let mut residuals = Vec::with_capacity(net.layers());
    for (l, w) in net.weights.iter().enumerate() {
        let mut cluster = partition(&WeightMatrix::new(l, w.clone()), k)?;
        let mut res = DMatrix::zeros(cluster.rows_mod, cluster.cols_mod);
        for br in 0..cluster.rows_mod {
            if mask.is_restored(l, br) {
                continue;
            }
            for bc in 0..cluster.cols_mod {
                let a = approx_module(cluster.block(br, bc))?;
                res[(br, bc)] = a.residual;
                *cluster.block_mut(br, bc) = a.hardware_matrix();
            }
        }
        out.weights[l] = cluster.reassemble().values;
        residuals.push(res);
    }
    Ok(Projection {
        net: out,
        residuals,
    })
}

pub fn project_hardware(net: &ToyNet, arch: &GoaArch) -> Result<ToyNet> {
    Ok(project_hardware_masked(net, arch.k, &RestoredMask::none(net.layers()))?.net)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Validation accuracy at the end of the epoch, before any projection.
    pub accuracy: f64,
    pub projected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_projection_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub schema_version: u32,
    pub label: String,
    pub epochs: Vec<EpochRecord>,
    pub projections: usize,
    pub final_accuracy: f64,
    #[serde(default)]
    pub restored_blocks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: ToyNet,
    /// Weights just before the last projection.
    pub pre_projection: ToyNet,
    /// Block residuals measured at the last projection.
    pub residuals: Vec<DMatrix<f64>>,
    pub trace: TrainTrace,
}

fn run_training(
    mut net: ToyNet,
    train: &Dataset,
    val: &Dataset,
    schedule: &TrainSchedule,
    hardware: Option<(usize, &RestoredMask)>,
    label: &str,
) -> Result<TrainOutcome> {
    schedule.validate()?;
    net.validate()?;
    if let Some((k, _)) = hardware {
        check_divisible(&net, k)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut trace = TrainTrace {
        schema_version: TRACE_SCHEMA_VERSION,
        label: label.into(),
        restored_blocks: hardware.map_or(0, |(_, m)| m.count()),
        ..TrainTrace::default()
    };
    let mut pre_projection = net.clone();
    let mut residuals: Vec<DMatrix<f64>> = Vec::new();

    let mut project = |net: &mut ToyNet, trace: &mut TrainTrace| -> Result<()> {
        if let Some((k, mask)) = hardware {
            pre_projection = net.clone();
            let p = project_hardware_masked(net, k, mask)?;
            *net = p.net;
            residuals = p.residuals;
            trace.projections += 1;
        }
        Ok(())
    };

    for epoch in 1..=schedule.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(schedule.batch_size) {
            let loss = match train_step(&mut net, &train.batch(chunk), schedule.learning_rate) {
                Ok(l) => l,
                Err(GoaError::NonFinite(_)) => {
                    return Err(GoaError::Diverged {
                        epoch,
                        trace: Box::new(trace),
                    })
                }
                Err(e) => return Err(e),
            };
            total += loss * chunk.len() as f64;
        }
        let accuracy = net.accuracy(&val.features, &val.labels);
        let mut record = EpochRecord {
            epoch,
            train_loss: total / train.len().max(1) as f64,
            accuracy,
            projected: false,
            post_projection_accuracy: None,
        };
        if hardware.is_some() && epoch % schedule.projection_period == 0 {
            project(&mut net, &mut trace)?;
            record.projected = true;
            record.post_projection_accuracy = Some(net.accuracy(&val.features, &val.labels));
        }
        info!(
            "{label} epoch {epoch}: loss {:.4} acc {:.4}{}",
            record.train_loss,
            record.accuracy,
            record
                .post_projection_accuracy
                .map_or(String::new(), |a| format!(" projected {a:.4}"))
        );
        trace.epochs.push(record);
    }
    project(&mut net, &mut trace)?;
    trace.final_accuracy = net.accuracy(&val.features, &val.labels);
    Ok(TrainOutcome {
        net,
        pre_projection,
        residuals,
        trace,
    })
}

/// Plain SGD with no projection; the float reference.
pub fn train_float(
    net: ToyNet,
    train: &Dataset,
    val: &Dataset,
    schedule: &TrainSchedule,
) -> Result<TrainOutcome> {
    run_training(net, train, val, schedule, None, "float")
}

/// SGD with projection at the end of every `p`-th epoch and once more after the last.
pub fn hw_aware_train(
    net: ToyNet,
    train: &Dataset,
    val: &Dataset,
    schedule: &TrainSchedule,
    arch: &GoaArch,
    mask: &RestoredMask,
) -> Result<TrainOutcome> {
    run_training(net, train, val, schedule, Some((arch.k, mask)), "hardware")
}

/// Cluster shapes of the net's layers, cluster `i` being layer `i`.
pub fn net_shapes(net: &ToyNet, k: usize) -> Vec<ClusterShape> {
    net.weights
        .iter()
        .enumerate()
        .map(|(i, w)| ClusterShape::new(i, i, w.nrows(), w.ncols(), k))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestoreOutcome {
    pub selection: RestorationSelection,
    pub ranking: RestorationSelection,
    pub mask: RestoredMask,
    /// Plan of the widened clusters.
    pub plan: MappingPlan,
    pub retrained: TrainOutcome,
}

/// Ranks module columns by the residuals of the last projection, restores
/// up to `budget` admissible ones to their pre-projection weights, then
/// retrains with those blocks left exact.
pub fn restore_and_retrain(
    previous: &TrainOutcome,
    train: &Dataset,
    val: &Dataset,
    schedule: &TrainSchedule,
    arch: &GoaArch,
    budget: usize,
) -> Result<RestoreOutcome> {
    let k = arch.k;
    let shapes = net_shapes(&previous.net, k);
    let plan = pack(&shapes, arch)?;
    let residuals = if previous.residuals.len() == shapes.len() {
        previous.residuals.clone()
    } else {
        project_hardware_masked(&previous.pre_projection, k, &RestoredMask::none(shapes.len()))?
            .residuals
    };
    let ranking = rank_columns(&shapes, &residuals)?;
    let selection = select_restorations(&ranking, budget, &plan)?;
    let widened = pack(&apply_restorations(&shapes, &selection), arch)?;

    let mut mask = RestoredMask::none(shapes.len());
    let mut net = previous.net.clone();
    for ColumnRef { cluster, block_row } in selection.refs() {
        mask.layers[cluster].insert(block_row);
        let rows = block_row * k..(block_row + 1) * k;
        for r in rows {
            let src = previous.pre_projection.weights[cluster].row(r).into_owned();
            net.weights[cluster].set_row(r, &src);
        }
    }
    info!(
        "restoring {} of {budget} requested columns{}",
        selection.columns.len(),
        if selection.shortfall { " (shortfall)" } else { "" }
    );
    let mut retrained = hw_aware_train(net, train, val, schedule, arch, &mask)?;
    retrained.trace.label = "restored".into();
    Ok(RestoreOutcome {
        selection,
        ranking,
        mask,
        plan: widened,
        retrained,
    })
}
