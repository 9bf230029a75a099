//! Genetic search over grid shape `(m, n, k)` under an MZI budget.

use std::collections::HashMap;

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cost::{area_power, DeviceParams};
use crate::error::{GoaError, Result};
use crate::mapper::pack;
use crate::photonic::{mesh_mzi_count, GoaArch};
use crate::workload::Network;

pub const SEARCH_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            delta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Each term divided by its value at the reference candidate.
    #[default]
    Reference,
    Raw,
}

/// Inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: usize,
    pub max: usize,
}

impl Bounds {
    pub fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn len(&self) -> usize {
        self.max + 1 - self.min
    }

    pub fn is_empty(&self) -> bool {
        self.max < self.min
    }

    fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.min..=self.max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub schema_version: u32,
    pub weights: Weights,
    pub mzi_budget: usize,
    pub wavelengths: usize,
    pub m_range: Bounds,
    pub n_range: Bounds,
    pub k_range: Bounds,
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub normalization: Normalization,
    pub workloads: Vec<Network>,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GoaError::InvalidConfig(msg));
        if self.schema_version != SEARCH_SCHEMA_VERSION {
            return bad(format!("unsupported search schema_version {}", self.schema_version));
        }
        let w = self.weights;
        if [w.alpha, w.beta, w.gamma, w.delta]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return bad("metric weights must be finite and nonnegative".into());
        }
        if self.population < 2 {
            return bad(format!("population {} is below 2", self.population));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} {r} is outside [0, 1]"));
            }
        }
        for (name, b) in [("m_range", self.m_range), ("n_range", self.n_range), ("k_range", self.k_range)] {
            if b.is_empty() || b.min == 0 {
                return bad(format!("{name} [{}, {}] is empty or starts at 0", b.min, b.max));
            }
        }
        if self.k_range.min < 2 {
            return bad("k_range must start at 2 or above".into());
        }
        if self.workloads.is_empty() {
            return bad("workload list is empty".into());
        }
        for net in &self.workloads {
            net.validate()?;
        }
        Ok(())
    }

    pub fn space_size(&self) -> usize {
        self.m_range.len() * self.n_range.len() * self.k_range.len()
    }
}

fn ser_fitness<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_some(v)
    } else {
        s.serialize_none()
    }
}

fn de_fitness<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTerms {
    /// Average over workloads.
    pub mapping_cost: f64,
    pub area_um2: f64,
    pub power_mw: f64,
    /// Average over workloads.
    pub eo_conversions: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// `null` in JSON for infeasible candidates.
    #[serde(serialize_with = "ser_fitness", deserialize_with = "de_fitness")]
    pub fitness: f64,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<MetricTerms>,
}

impl Candidate {
    pub fn genome(&self) -> (usize, usize, usize) {
        (self.m, self.n, self.k)
    }
}

/// Budget, wavelength and width checks, without packing.
pub fn is_feasible(cfg: &SearchConfig, m: usize, n: usize, k: usize) -> bool {
    if m > cfg.wavelengths || k < 2 {
        return false;
    }
    if m * n * (mesh_mzi_count(k) + k) > cfg.mzi_budget {
        return false;
    }
    cfg.workloads.iter().all(|net| {
        net.matrix_shapes()
            .iter()
            .all(|&(rows, _)| rows.div_ceil(k) <= n)
    })
}

/// Unweighted metric terms, or `None` when the candidate is infeasible.
pub fn metric_terms(
    cfg: &SearchConfig,
    params: &DeviceParams,
    m: usize,
    n: usize,
    k: usize,
) -> Result<Option<MetricTerms>> {
    if !is_feasible(cfg, m, n, k) {
        return Ok(None);
    }
    let arch = GoaArch::new(m, n, k, cfg.wavelengths)?;
    let (area, power) = area_power(&arch, params)?;
    let mut cost = 0.0;
    let mut eo = 0.0;
    for net in &cfg.workloads {
        let plan = match pack(&net.cluster_shapes(k), &arch) {
            Ok(p) => p,
            Err(GoaError::InfeasibleCluster { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        cost += plan.mapping_cost as f64;
        eo += plan.eo_conversions as f64;
    }
    let w = cfg.workloads.len() as f64;
    Ok(Some(MetricTerms {
        mapping_cost: cost / w,
        area_um2: area,
        power_mw: power,
        eo_conversions: eo / w,
    }))
}

/// `α·cost + β·area + γ·power + δ·eo`, each term optionally divided by the
/// reference candidate's value (a zero reference term divides by 1).
pub fn metric(terms: &MetricTerms, weights: &Weights, reference: Option<&MetricTerms>) -> f64 {
    let norm = |v: f64, r: Option<f64>| match r {
        Some(r) if r != 0.0 => v / r,
        _ => v,
    };
    weights.alpha * norm(terms.mapping_cost, reference.map(|r| r.mapping_cost))
        + weights.beta * norm(terms.area_um2, reference.map(|r| r.area_um2))
        + weights.gamma * norm(terms.power_mw, reference.map(|r| r.power_mw))
        + weights.delta * norm(terms.eo_conversions, reference.map(|r| r.eo_conversions))
}

/// Feasible genomes of the whole space, in `(m, n, k)` order.
pub fn feasible_region(cfg: &SearchConfig) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for m in cfg.m_range.iter() {
        for n in cfg.n_range.iter() {
            for k in cfg.k_range.iter() {
                if is_feasible(cfg, m, n, k) {
                    out.push((m, n, k));
                }
            }
        }
    }
    out
}

/// Largest feasible grid by MZI count, then most square, then smallest `k`.
pub fn reference_genome(cfg: &SearchConfig) -> Option<(usize, usize, usize)> {
    feasible_region(cfg).into_iter().min_by_key(|&(m, n, k)| {
        (
            std::cmp::Reverse(m * n * (mesh_mzi_count(k) + k)),
            m.abs_diff(n),
            k,
        )
    })
}

/// Evaluates candidates with a shared cache.
struct Evaluator<'a> {
    cfg: &'a SearchConfig,
    params: &'a DeviceParams,
    reference: Option<MetricTerms>,
    cache: HashMap<(usize, usize, usize), Candidate>,
}

impl<'a> Evaluator<'a> {
    fn new(cfg: &'a SearchConfig, params: &'a DeviceParams) -> Result<Self> {
        let reference = match cfg.normalization {
            Normalization::Raw => None,
            Normalization::Reference => {
                let (m, n, k) = reference_genome(cfg).ok_or(GoaError::EmptyFeasibleRegion)?;
                metric_terms(cfg, params, m, n, k)?
            }
        };
        Ok(Self {
            cfg,
            params,
            reference,
            cache: HashMap::new(),
        })
    }

    fn evaluate_all(&mut self, genomes: &[(usize, usize, usize)]) -> Result<Vec<Candidate>> {
        let mut fresh: Vec<(usize, usize, usize)> = genomes
            .iter()
            .copied()
            .filter(|g| !self.cache.contains_key(g))
            .collect();
        fresh.sort_unstable();
        fresh.dedup();
        let (cfg, params, reference) = (self.cfg, self.params, self.reference);
        let evaluated: Vec<Result<Candidate>> = fresh
            .par_iter()
            .map(|&(m, n, k)| {
                let terms = metric_terms(cfg, params, m, n, k)?;
                let fitness = terms
                    .as_ref()
                    .map_or(f64::INFINITY, |t| metric(t, &cfg.weights, reference.as_ref()));
                Ok(Candidate {
                    m,
                    n,
                    k,
                    fitness,
                    feasible: terms.is_some(),
                    terms,
                })
            })
            .collect();
        for c in evaluated {
            let c = c?;
            self.cache.insert(c.genome(), c);
        }
        Ok(genomes.iter().map(|g| self.cache[g].clone()).collect())
    }
}

/// Strictly better: lower fitness, ties broken by smaller genome.
fn better(a: &Candidate, b: &Candidate) -> bool {
    a.fitness < b.fitness || (a.fitness == b.fitness && a.genome() < b.genome())
}

fn best_of(cands: &[Candidate]) -> &Candidate {
    cands
        .iter()
        .reduce(|best, c| if better(c, best) { c } else { best })
        .expect("nonempty population")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Best fitness found so far.
    #[serde(serialize_with = "ser_fitness", deserialize_with = "de_fitness")]
    pub best_fitness: f64,
    pub best: (usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub schema_version: u32,
    pub best: Candidate,
    pub history: Vec<GenerationRecord>,
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<(usize, usize, usize)>,
}

fn gene<R: Rng>(rng: &mut R, b: Bounds, current: usize) -> usize {
    if rng.random_bool(0.5) {
        rng.random_range(b.min..=b.max)
    } else if rng.random_bool(0.5) {
        (current + 1).min(b.max)
    } else {
        current.saturating_sub(1).max(b.min)
    }
}

pub fn ga_search(cfg: &SearchConfig, params: &DeviceParams) -> Result<SearchResult> {
    cfg.validate()?;
    params.validate()?;
    if feasible_region(cfg).is_empty() {
        return Err(GoaError::EmptyFeasibleRegion);
    }
    let mut eval = Evaluator::new(cfg, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let random_genome = |rng: &mut ChaCha8Rng| {
        (
            rng.random_range(cfg.m_range.min..=cfg.m_range.max),
            rng.random_range(cfg.n_range.min..=cfg.n_range.max),
            rng.random_range(cfg.k_range.min..=cfg.k_range.max),
        )
    };

    let genomes: Vec<_> = (0..cfg.population).map(|_| random_genome(&mut rng)).collect();
    let mut population = eval.evaluate_all(&genomes)?;
    let mut best = best_of(&population).clone();
    let mut history = vec![GenerationRecord {
        generation: 0,
        best_fitness: best.fitness,
        best: best.genome(),
    }];
    info!("generation 0: best {:?} fitness {}", best.genome(), best.fitness);

    for generation in 1..=cfg.generations {
        let elite = best_of(&population).clone();
        let mut next = vec![elite.genome()];
        while next.len() < cfg.population {
            let pick = |rng: &mut ChaCha8Rng| {
                let a = &population[rng.random_range(0..population.len())];
                let b = &population[rng.random_range(0..population.len())];
                if better(b, a) { b.genome() } else { a.genome() }
            };
            let p1 = pick(&mut rng);
            let p2 = pick(&mut rng);
            let mut child = p1;
            if rng.random_bool(cfg.crossover_rate) {
                if rng.random_bool(0.5) {
                    child.0 = p2.0;
                }
                if rng.random_bool(0.5) {
                    child.1 = p2.1;
                }
                if rng.random_bool(0.5) {
                    child.2 = p2.2;
                }
            }
            if rng.random_bool(cfg.mutation_rate) {
                child.0 = gene(&mut rng, cfg.m_range, child.0);
            }
            if rng.random_bool(cfg.mutation_rate) {
                child.1 = gene(&mut rng, cfg.n_range, child.1);
            }
            if rng.random_bool(cfg.mutation_rate) {
                child.2 = gene(&mut rng, cfg.k_range, child.2);
            }
            next.push(child);
        }
        population = eval.evaluate_all(&next)?;
        let gen_best = best_of(&population);
        if better(gen_best, &best) {
            best = gen_best.clone();
        }
        debug!("generation {generation}: best {:?} fitness {}", best.genome(), best.fitness);
        history.push(GenerationRecord {
            generation,
            best_fitness: best.fitness,
            best: best.genome(),
        });
    }

    if !best.feasible {
        // The population never hit the feasible region; fall back to the scan.
        let region = feasible_region(cfg);
        let cands = eval.evaluate_all(&region)?;
        best = best_of(&cands).clone();
    }
    Ok(SearchResult {
        schema_version: SEARCH_SCHEMA_VERSION,
        best,
        history,
        evaluations: eval.cache.len(),
        reference: match cfg.normalization {
            Normalization::Raw => None,
            Normalization::Reference => reference_genome(cfg),
        },
    })
}

/// Evaluates every feasible candidate and returns them with the best first.
pub fn exhaustive_search(cfg: &SearchConfig, params: &DeviceParams) -> Result<Vec<Candidate>> {
    cfg.validate()?;
    params.validate()?;
    let region = feasible_region(cfg);
    if region.is_empty() {
        return Err(GoaError::EmptyFeasibleRegion);
    }
    let mut eval = Evaluator::new(cfg, params)?;
    let mut cands = eval.evaluate_all(&region)?;
    cands.sort_by(|a, b| {
        a.fitness
            .total_cmp(&b.fitness)
            .then(a.genome().cmp(&b.genome()))
    });
    Ok(cands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::LayerSpec;

    fn config() -> SearchConfig {
        SearchConfig {
            schema_version: SEARCH_SCHEMA_VERSION,
            weights: Weights::default(),
            mzi_budget: 2_000,
            wavelengths: 8,
            m_range: Bounds::new(1, 6),
            n_range: Bounds::new(1, 6),
            k_range: Bounds::new(2, 6),
            population: 12,
            generations: 20,
            crossover_rate: 0.8,
            mutation_rate: 0.3,
            seed: 1,
            normalization: Normalization::Reference,
            workloads: vec![Network::new(
                "tiny",
                vec![LayerSpec::conv(8, 3, 3), LayerSpec::conv(12, 3, 8), LayerSpec::dense(5, 12)],
            )],
        }
    }

    #[test]
    fn single_candidate_space() {
        let mut cfg = config();
        cfg.m_range = Bounds::new(2, 2);
        cfg.n_range = Bounds::new(3, 3);
        cfg.k_range = Bounds::new(4, 4);
        let r = ga_search(&cfg, &DeviceParams::illustrative()).unwrap();
        assert_eq!(r.best.genome(), (2, 3, 4));
        assert_eq!(r.history[0].best, (2, 3, 4));
    }

    #[test]
    fn history_is_monotone_and_deterministic() {
        let cfg = config();
        let p = DeviceParams::illustrative();
        let a = ga_search(&cfg, &p).unwrap();
        let b = ga_search(&cfg, &p).unwrap();
        assert_eq!(a, b);
        assert!(a.history.windows(2).all(|w| w[1].best_fitness <= w[0].best_fitness));
    }

    #[test]
    fn weight_selection() {
        let t = MetricTerms {
            mapping_cost: 3.0,
            area_um2: 10.0,
            power_mw: 4.0,
            eo_conversions: 1.0,
        };
        let only_cost = Weights {
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 0.0,
        };
        assert_eq!(metric(&t, &only_cost, None), 3.0);
        let zero = Weights {
            alpha: 0.0,
            ..only_cost
        };
        assert_eq!(metric(&t, &zero, Some(&t)), 0.0);
    }

    #[test]
    fn empty_region_is_an_error() {
        let mut cfg = config();
        cfg.mzi_budget = 2;
        assert!(matches!(
            ga_search(&cfg, &DeviceParams::illustrative()),
            Err(GoaError::EmptyFeasibleRegion)
        ));
    }

    #[test]
    fn infeasible_fitness_round_trips_as_null() {
        let c = Candidate {
            m: 1,
            n: 1,
            k: 2,
            fitness: f64::INFINITY,
            feasible: false,
            terms: None,
        };
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"fitness\":null"));
        let back: Candidate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
