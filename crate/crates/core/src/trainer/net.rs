use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Activation::Tanh => z.map(f64::tanh),
            Activation::Identity => z.clone(),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn derivative(self, a: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Activation::Tanh => a.map(|v| 1.0 - v * v),
            Activation::Identity => DMatrix::from_element(a.nrows(), a.ncols(), 1.0),
        }
    }
}

/// Small fully connected network. Layer `i` maps `dims[i]` to `dims[i + 1]`;
/// hidden layers use `activation`, the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyNet {
    pub dims: Vec<usize>,
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub activation: Activation,
    /// Logits scored by the classification loss (the rest is padding).
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Labels(Vec<usize>),
    /// One column per sample, scored with `0.5·‖y − t‖²`.
    Values(DMatrix<f64>),
}

/// Samples are columns of `inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: DMatrix<f64>,
    pub targets: Targets,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.ncols() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl ToyNet {
    pub fn new(dims: Vec<usize>, classes: usize, activation: Activation, seed: u64) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(GoaError::InvalidConfig(format!("bad layer dims {dims:?}")));
        }
        if classes == 0 || classes > *dims.last().unwrap() {
            return Err(GoaError::InvalidConfig(format!(
                "{classes} classes do not fit an output width of {}",
                dims.last().unwrap()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = dims
            .windows(2)
            .map(|d| {
                let scale = (1.0 / d[0] as f64).sqrt();
                DMatrix::from_fn(d[1], d[0], |_, _| scale * rng.sample::<f64, _>(StandardNormal))
            })
            .collect();
        let biases = dims[1..].iter().map(|&d| DVector::zeros(d)).collect();
        Ok(Self {
            dims,
            weights,
            biases,
            activation,
            classes,
        })
    }

    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() + 1 != self.dims.len() || self.biases.len() != self.weights.len() {
            return Err(GoaError::InvalidConfig("layer count mismatch".into()));
        }
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            if w.shape() != (self.dims[i + 1], self.dims[i]) || b.len() != self.dims[i + 1] {
                return Err(GoaError::DimensionMismatch {
                    context: "toy net layer",
                    expected: self.dims[i + 1] * self.dims[i],
                    actual: w.len(),
                });
            }
            if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
                return Err(GoaError::NonFinite("toy net parameters"));
            }
        }
        Ok(())
    }

    /// Activations of every layer, input first.
    fn forward_all(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = vec![x.clone()];
        for (i, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * acts.last().unwrap();
            for mut col in z.column_iter_mut() {
                col += b;
            }
            let last = i + 1 == self.weights.len();
            acts.push(if last { z } else { self.activation.apply(&z) });
        }
        acts
    }

    pub fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.forward_all(x).pop().unwrap()
    }

    fn check_batch(&self, batch: &Batch) -> Result<()> {
        if batch.inputs.nrows() != self.dims[0] {
            return Err(GoaError::DimensionMismatch {
                context: "batch input width",
                expected: self.dims[0],
                actual: batch.inputs.nrows(),
            });
        }
        let expected = batch.len();
        let (actual, ok) = match &batch.targets {
            Targets::Labels(l) => (l.len(), l.iter().all(|&y| y < self.classes)),
            Targets::Values(t) => (t.ncols(), t.nrows() == *self.dims.last().unwrap()),
        };
        if actual != expected || !ok || expected == 0 {
            return Err(GoaError::DimensionMismatch {
                context: "batch targets",
                expected,
                actual,
            });
        }
        Ok(())
    }

    /// Mean loss and the gradient of the output with respect to the logits.
    fn loss_and_delta(&self, out: &DMatrix<f64>, targets: &Targets) -> (f64, DMatrix<f64>) {
        let b = out.ncols() as f64;
        match targets {
            Targets::Values(t) => {
                let diff = out - t;
                (0.5 * diff.norm_squared() / b, diff / b)
            }
            Targets::Labels(labels) => {
                let mut delta = DMatrix::zeros(out.nrows(), out.ncols());
                let mut loss = 0.0;
                for (j, &y) in labels.iter().enumerate() {
                    let logits = out.column(j);
                    let logits = logits.rows(0, self.classes);
                    let max = logits.max();
                    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
                    let sum: f64 = exps.iter().sum();
                    loss += sum.ln() + max - logits[y];
                    for (c, e) in exps.iter().enumerate() {
                        let p = e / sum;
                        delta[(c, j)] = (p - if c == y { 1.0 } else { 0.0 }) / b;
                    }
                }
                (loss / b, delta)
            }
        }
    }

    pub fn loss(&self, batch: &Batch) -> Result<f64> {
        self.check_batch(batch)?;
        Ok(self.loss_and_delta(&self.forward(&batch.inputs), &batch.targets).0)
    }

    pub fn gradients(&self, batch: &Batch) -> Result<(f64, Gradients)> {
        self.check_batch(batch)?;
        let acts = self.forward_all(&batch.inputs);
        let (loss, mut delta) = self.loss_and_delta(acts.last().unwrap(), &batch.targets);
        let n = self.weights.len();
        let mut gw = vec![DMatrix::zeros(0, 0); n];
        let mut gb = vec![DVector::zeros(0); n];
        for i in (0..n).rev() {
            gw[i] = &delta * acts[i].transpose();
            gb[i] = delta.column_sum();
            if i > 0 {
                let back = self.weights[i].transpose() * &delta;
                delta = back.component_mul(&self.activation.derivative(&acts[i]));
            }
        }
        Ok((
            loss,
            Gradients {
                weights: gw,
                biases: gb,
            },
        ))
    }

    /// Fraction of correctly classified samples (argmax over the scored logits).
    pub fn accuracy(&self, inputs: &DMatrix<f64>, labels: &[usize]) -> f64 {
        if labels.is_empty() {
            return 0.0;
        }
        let out = self.forward(inputs);
        let hits = labels
            .iter()
            .enumerate()
            .filter(|&(j, &y)| out.column(j).rows(0, self.classes).argmax().0 == y)
            .count();
        hits as f64 / labels.len() as f64
    }
}

/// One plain SGD step; returns the loss before the update.
pub fn train_step(net: &mut ToyNet, batch: &Batch, learning_rate: f64) -> Result<f64> {
    let (loss, g) = net.gradients(batch)?;
    if !loss.is_finite() {
        return Err(GoaError::NonFinite("training loss"));
    }
    for (w, dw) in net.weights.iter_mut().zip(&g.weights) {
        *w -= dw * learning_rate;
    }
    for (b, db) in net.biases.iter_mut().zip(&g.biases) {
        *b -= db * learning_rate;
    }
    Ok(loss)
}
