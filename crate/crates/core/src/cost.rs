//! Component counts and linear area/power/latency/energy estimates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GoaError, Result};
use crate::mapper::MappingPlan;
use crate::photonic::{mesh_mzi_count, GoaArch};

pub const DEVICE_SCHEMA_VERSION: u32 = 1;
pub const COST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Mzi,
    Mrr,
    Dac,
    Eom,
    Splitter,
    Pd,
    Tia,
    Adc,
}

impl ComponentKind {
    pub const ALL: [ComponentKind; 8] = [
        ComponentKind::Mzi,
        ComponentKind::Mrr,
        ComponentKind::Dac,
        ComponentKind::Eom,
        ComponentKind::Splitter,
        ComponentKind::Pd,
        ComponentKind::Tia,
        ComponentKind::Adc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Mzi => "mzi",
            ComponentKind::Mrr => "mrr",
            ComponentKind::Dac => "dac",
            ComponentKind::Eom => "eom",
            ComponentKind::Splitter => "splitter",
            ComponentKind::Pd => "pd",
            ComponentKind::Tia => "tia",
            ComponentKind::Adc => "adc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeviceEntry {
    pub area_um2: f64,
    pub static_power_mw: f64,
    /// Energy per use (one pass through the device).
    pub energy_pj: f64,
    pub latency_ns: f64,
}

impl DeviceEntry {
    fn values(&self) -> [f64; 4] {
        [
            self.area_um2,
            self.static_power_mw,
            self.energy_pj,
            self.latency_ns,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConversionEntry {
    pub latency_ns: f64,
    pub energy_pj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub schema_version: u32,
    #[serde(default)]
    pub label: String,
    pub components: BTreeMap<ComponentKind, DeviceEntry>,
    pub eo_conversion: ConversionEntry,
}

impl DeviceParams {
    /// Placeholder figures of plausible magnitude. Not measured values.
    pub fn illustrative() -> Self {
        let e = |area_um2, static_power_mw, energy_pj, latency_ns| DeviceEntry {
            area_um2,
            static_power_mw,
            energy_pj,
            latency_ns,
        };
        let components = BTreeMap::from([
            (ComponentKind::Mzi, e(2_500.0, 1.0, 0.05, 0.01)),
            (ComponentKind::Mrr, e(300.0, 0.5, 0.02, 0.01)),
            (ComponentKind::Dac, e(11_000.0, 4.0, 0.6, 0.1)),
            (ComponentKind::Eom, e(1_200.0, 1.0, 0.1, 0.02)),
            (ComponentKind::Splitter, e(50.0, 0.0, 0.0, 0.005)),
            (ComponentKind::Pd, e(100.0, 0.5, 0.02, 0.01)),
            (ComponentKind::Tia, e(1_000.0, 1.5, 0.1, 0.05)),
            (ComponentKind::Adc, e(20_000.0, 10.0, 1.0, 0.2)),
        ]);
        Self {
            schema_version: DEVICE_SCHEMA_VERSION,
            label: "illustrative placeholder values".into(),
            components,
            eo_conversion: ConversionEntry {
                latency_ns: 1.0,
                energy_pj: 5.0,
            },
        }
    }

    pub fn zero() -> Self {
        Self {
            schema_version: DEVICE_SCHEMA_VERSION,
            label: "zero".into(),
            components: ComponentKind::ALL
                .iter()
                .map(|&c| (c, DeviceEntry::default()))
                .collect(),
            eo_conversion: ConversionEntry::default(),
        }
    }

    /// Every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for e in out.components.values_mut() {
            e.area_um2 *= factor;
            e.static_power_mw *= factor;
            e.energy_pj *= factor;
            e.latency_ns *= factor;
        }
        out.eo_conversion.latency_ns *= factor;
        out.eo_conversion.energy_pj *= factor;
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != DEVICE_SCHEMA_VERSION {
            return Err(GoaError::InvalidConfig(format!(
                "unsupported device parameter schema_version {}",
                self.schema_version
            )));
        }
        for kind in ComponentKind::ALL {
            let entry = self
                .components
                .get(&kind)
                .ok_or_else(|| GoaError::MissingDevice(kind.name().into()))?;
            if entry.values().iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(GoaError::InvalidConfig(format!(
                    "device entry {} has a negative or non-finite value",
                    kind.name()
                )));
            }
        }
        let eo = self.eo_conversion;
        if [eo.latency_ns, eo.energy_pj]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(GoaError::InvalidConfig(
                "eo_conversion has a negative or non-finite value".into(),
            ));
        }
        Ok(())
    }

    pub fn get(&self, kind: ComponentKind) -> Result<&DeviceEntry> {
        self.components
            .get(&kind)
            .ok_or_else(|| GoaError::MissingDevice(kind.name().into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub mzi: usize,
    pub mrr: usize,
    pub dac: usize,
    pub eom: usize,
    pub splitter: usize,
    pub pd: usize,
    pub tia: usize,
    pub adc: usize,
}

impl ComponentCounts {
    pub fn get(&self, kind: ComponentKind) -> usize {
        match kind {
            ComponentKind::Mzi => self.mzi,
            ComponentKind::Mrr => self.mrr,
            ComponentKind::Dac => self.dac,
            ComponentKind::Eom => self.eom,
            ComponentKind::Splitter => self.splitter,
            ComponentKind::Pd => self.pd,
            ComponentKind::Tia => self.tia,
            ComponentKind::Adc => self.adc,
        }
    }
}

pub fn component_counts(arch: &GoaArch) -> ComponentCounts {
    let modules = arch.m * arch.n;
    let (mk, nk) = (arch.m * arch.k, arch.n * arch.k);
    ComponentCounts {
        mzi: modules * (mesh_mzi_count(arch.k) + arch.k),
        mrr: modules * arch.k,
        dac: mk,
        eom: mk,
        splitter: mk,
        pd: nk,
        tia: nk,
        adc: nk,
    }
}

/// Chip area (µm²) and static power (mW).
pub fn area_power(arch: &GoaArch, params: &DeviceParams) -> Result<(f64, f64)> {
    let counts = component_counts(arch);
    let mut area = 0.0;
    let mut power = 0.0;
    for kind in ComponentKind::ALL {
        let e = params.get(kind)?;
        let c = counts.get(kind) as f64;
        area += c * e.area_um2;
        power += c * e.static_power_mw;
    }
    Ok((area, power))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub schema_version: u32,
    pub params_label: String,
    pub counts: ComponentCounts,
    pub area_um2: f64,
    pub static_power_mw: f64,
    pub passes: usize,
    pub eo_conversions: usize,
    pub per_pass_latency_ns: f64,
    pub latency_ns: f64,
    /// MZIs programmed over all passes.
    pub touched_mzis: usize,
    pub energy_pj: f64,
    pub formulas: Vec<String>,
}

/// Sequential-pass estimate for one inference of the mapped network.
pub fn estimate(arch: &GoaArch, plan: &MappingPlan, params: &DeviceParams) -> Result<CostReport> {
    params.validate()?;
    if &plan.arch != arch {
        return Err(GoaError::InvalidConfig(
            "plan was built for a different architecture".into(),
        ));
    }
    let counts = component_counts(arch);
    let (area, power) = area_power(arch, params)?;
    let p = |kind| params.get(kind).copied();
    let (mzi, mrr) = (p(ComponentKind::Mzi)?, p(ComponentKind::Mrr)?);
    let input_chain = [ComponentKind::Dac, ComponentKind::Eom, ComponentKind::Splitter];
    let output_chain = [ComponentKind::Pd, ComponentKind::Tia, ComponentKind::Adc];
    let chain = |kinds: [ComponentKind; 3], f: fn(&DeviceEntry) -> f64| -> Result<f64> {
        kinds.iter().map(|&k| p(k).map(|e| f(&e))).sum()
    };

    let per_pass_latency = chain(input_chain, |e| e.latency_ns)?
        + (arch.k + 1) as f64 * mzi.latency_ns
        + mrr.latency_ns
        + chain(output_chain, |e| e.latency_ns)?;
    let passes = plan.passes.len();
    let eo = plan.eo_conversions;
    let latency = passes as f64 * per_pass_latency + eo as f64 * params.eo_conversion.latency_ns;

    let io_energy = (arch.m * arch.k) as f64 * chain(input_chain, |e| e.energy_pj)?
        + (arch.n * arch.k) as f64 * chain(output_chain, |e| e.energy_pj)?;
    let mut touched_mzis = 0;
    let mut energy = eo as f64 * params.eo_conversion.energy_pj;
    for pass in 0..passes {
        let modules = plan.occupied_modules(pass);
        let t = modules * arch.mzis_per_module();
        touched_mzis += t;
        energy += t as f64 * mzi.energy_pj + (modules * arch.k) as f64 * mrr.energy_pj + io_energy;
    }

    Ok(CostReport {
        schema_version: COST_SCHEMA_VERSION,
        params_label: params.label.clone(),
        counts,
        area_um2: area,
        static_power_mw: power,
        passes,
        eo_conversions: eo,
        per_pass_latency_ns: per_pass_latency,
        latency_ns: latency,
        touched_mzis,
        energy_pj: energy,
        formulas: vec![
            "area = sum(count_c * area_c)".into(),
            "static_power = sum(count_c * static_power_c)".into(),
            "per_pass_latency = dac + eom + splitter + (k+1)*mzi + mrr + pd + tia + adc".into(),
            "latency = passes * per_pass_latency + eo_conversions * eo_latency".into(),
            "energy = sum_pass(touched_mzi*mzi_e + touched_mrr*mrr_e + mk*(dac+eom+splitter)_e + nk*(pd+tia+adc)_e) + eo_conversions * eo_energy".into(),
        ],
    })
}
