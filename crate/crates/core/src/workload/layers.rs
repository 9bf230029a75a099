use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};
use crate::mapper::ClusterShape;

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv,
    Dense,
    Pool,
}

fn one() -> usize {
    1
}

/// Shape of one network layer. Dense layers use `kernel = 1`; pool layers
/// only carry `pool_ratio`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    #[serde(default)]
    pub filters: usize,
    #[serde(default = "one")]
    pub kernel: usize,
    #[serde(default)]
    pub depth: usize,
    #[serde(default = "one")]
    pub pool_ratio: usize,
    /// Weight layers whose outputs are summed to form this layer's input.
    /// `None` means the nearest preceding weight layer; an empty list means
    /// the network input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl LayerSpec {
    pub fn conv(filters: usize, kernel: usize, depth: usize) -> Self {
        Self {
            kind: LayerKind::Conv,
            filters,
            kernel,
            depth,
            pool_ratio: 1,
            inputs: None,
            name: None,
        }
    }

    pub fn dense(outputs: usize, inputs: usize) -> Self {
        Self {
            kind: LayerKind::Dense,
            filters: outputs,
            kernel: 1,
            depth: inputs,
            pool_ratio: 1,
            inputs: None,
            name: None,
        }
    }

    pub fn pool(ratio: usize) -> Self {
        Self {
            kind: LayerKind::Pool,
            filters: 0,
            kernel: 1,
            depth: 0,
            pool_ratio: ratio,
            inputs: None,
            name: None,
        }
    }

    pub fn with_inputs(mut self, inputs: Vec<usize>) -> Self {
        self.inputs = Some(inputs);
        self
    }

    pub fn is_weight(&self) -> bool {
        self.kind != LayerKind::Pool
    }

    /// Spatial kernel size, 1 for dense layers.
    pub fn h(&self) -> usize {
        match self.kind {
            LayerKind::Dense => 1,
            _ => self.kernel,
        }
    }

    /// Reshaped matrix length `h²·d`.
    pub fn length(&self) -> usize {
        self.h() * self.h() * self.depth
    }
}

/// `(filters, h²·d)` of a conv layer.
pub fn reshape_conv(layer: &LayerSpec) -> Result<(usize, usize)> {
    if layer.kind != LayerKind::Conv {
        return Err(GoaError::InvalidConfig(format!(
            "reshape_conv expects a conv layer, got {:?}",
            layer.kind
        )));
    }
    Ok((layer.filters, layer.kernel * layer.kernel * layer.depth))
}

/// Matrix shape of any weight layer (dense layers are 1×1 convs).
pub fn weight_shape(layer: &LayerSpec) -> Option<(usize, usize)> {
    layer.is_weight().then(|| (layer.filters, layer.length()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    #[serde(default = "schema_v1")]
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub layers: Vec<LayerSpec>,
}

fn schema_v1() -> u32 {
    NETWORK_SCHEMA_VERSION
}

impl Network {
    pub fn new(name: impl Into<String>, layers: Vec<LayerSpec>) -> Self {
        Self {
            schema_version: NETWORK_SCHEMA_VERSION,
            name: name.into(),
            layers,
        }
    }

    /// Producers of layer `idx` after resolving the implicit default.
    pub fn producers(&self, idx: usize) -> Vec<usize> {
        match &self.layers[idx].inputs {
            Some(list) => list.clone(),
            None => (0..idx)
                .rev()
                .find(|&j| self.layers[j].is_weight())
                .into_iter()
                .collect(),
        }
    }

    /// Weight layers fed (directly) by layer `idx`.
    pub fn consumers(&self, idx: usize) -> Vec<usize> {
        (idx + 1..self.layers.len())
            .filter(|&j| self.layers[j].is_weight() && self.producers(j).contains(&idx))
            .collect()
    }

    /// Product of pool ratios strictly between `from` and `to`.
    pub fn pool_ratio_between(&self, from: usize, to: usize) -> usize {
        self.layers[from + 1..to]
            .iter()
            .filter(|l| l.kind == LayerKind::Pool)
            .map(|l| l.pool_ratio)
            .product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != NETWORK_SCHEMA_VERSION {
            return Err(GoaError::InvalidConfig(format!(
                "unsupported network schema_version {}",
                self.schema_version
            )));
        }
        for (idx, layer) in self.layers.iter().enumerate() {
            let bad = |reason: String| Err(GoaError::InvalidLayer { layer: idx, reason });
            match layer.kind {
                LayerKind::Pool => {
                    if layer.pool_ratio == 0 {
                        return bad("pool_ratio must be at least 1".into());
                    }
                    if layer.inputs.is_some() {
                        return bad("pool layers take no explicit inputs".into());
                    }
                    continue;
                }
                LayerKind::Dense if layer.kernel != 1 => {
                    return bad(format!("dense layer with kernel {}", layer.kernel));
                }
                _ => {}
            }
            if layer.filters == 0 || layer.kernel == 0 || layer.depth == 0 {
                return bad("filters, kernel and depth must all be at least 1".into());
            }
            for p in self.producers(idx) {
                if p >= idx {
                    return bad(format!("input {p} does not precede the layer"));
                }
                let prod = &self.layers[p];
                if !prod.is_weight() {
                    return bad(format!("input {p} is not a weight layer"));
                }
                let r = self.pool_ratio_between(p, idx);
                if layer.depth != r * prod.filters {
                    return bad(format!(
                        "depth {} does not match {r} x {} filters of layer {p}",
                        layer.depth, prod.filters
                    ));
                }
            }
        }
        Ok(())
    }

    /// Indices of weight layers, in order.
    pub fn weight_layers(&self) -> Vec<usize> {
        (0..self.layers.len())
            .filter(|&i| self.layers[i].is_weight())
            .collect()
    }

    /// `(rows, cols)` of every weight matrix, in layer order.
    pub fn matrix_shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().filter_map(weight_shape).collect()
    }

    /// Module footprints for packing; cluster `i` is the `i`-th weight layer.
    pub fn cluster_shapes(&self, k: usize) -> Vec<ClusterShape> {
        self.weight_layers()
            .into_iter()
            .enumerate()
            .map(|(id, l)| {
                let (rows, cols) = weight_shape(&self.layers[l]).expect("weight layer");
                ClusterShape::new(id, l, rows, cols, k)
            })
            .collect()
    }
}
