//! Synchronous networks of node functions and their damage spreading.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::build;
use crate::enumeration::all_canonical_forms;
use crate::error::{domain, Error, Result};
use crate::field::{lower_segments, PrimeModulus};
use crate::parallel::{mean_and_stderr, pool};
use crate::sampler::{derive_seed, substream, Distribution, NetworkSpec};
use crate::sensitivity::{brute_force_qc, ensemble_qc_formula};
use crate::table::TruthTable;

/// Default bound on `p^N` for exhaustive attractor search.
pub const DEFAULT_STATE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    /// Node indices read by `table`, in variable order.
    pub inputs: Vec<usize>,
    pub table: TruthTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Network {
    p: PrimeModulus,
    nodes: Vec<Node>,
}

impl Network {
    pub fn new(p: PrimeModulus, nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(domain("a network needs at least one node"));
        }
        let size = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.table.modulus() != p {
                return Err(domain(format!("node {i} is over F_{}, not F_{}", node.table.modulus().get(), p.get())));
            }
            if node.table.arity() != node.inputs.len() {
                return Err(domain(format!(
                    "node {i} has {} inputs but a table of arity {}",
                    node.inputs.len(),
                    node.table.arity()
                )));
            }
            if let Some(&j) = node.inputs.iter().find(|&&j| j >= size) {
                return Err(domain(format!("node {i} reads missing node {j}")));
            }
            let mut sorted = node.inputs.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(domain(format!("node {i} lists an input twice")));
            }
        }
        Ok(Self { p, nodes })
    }

    pub(crate) fn from_parts_unchecked(p: PrimeModulus, nodes: Vec<Node>) -> Self {
        Self { p, nodes }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn step_into(&self, x: &[u32], out: &mut [u32]) {
        let mut buf = Vec::with_capacity(8);
        for (node, y) in self.nodes.iter().zip(out.iter_mut()) {
            buf.clear();
            buf.extend(node.inputs.iter().map(|&j| x[j]));
            *y = node.table.evaluate_unchecked(&buf);
        }
    }

    pub fn step(&self, x: &[u32]) -> Result<Vec<u32>> {
        if x.len() != self.len() {
            return Err(domain(format!("state has {} entries for {} nodes", x.len(), self.len())));
        }
        if let Some(&v) = x.iter().find(|&&v| v >= self.p.get()) {
            return Err(domain(format!("state entry {v} is not in F_{}", self.p.get())));
        }
        let mut out = vec![0; self.len()];
        self.step_into(x, &mut out);
        Ok(out)
    }

    /// Moves node `i` to position `perm[i]`, rewiring inputs to match.
    pub fn relabel(&self, perm: &[usize]) -> Result<Network> {
        crate::table::check_permutation(perm, self.len())?;
        let mut nodes = vec![None; self.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            nodes[perm[i]] = Some(Node { inputs: node.inputs.iter().map(|&j| perm[j]).collect(), table: node.table.clone() });
        }
        Ok(Self { p: self.p, nodes: nodes.into_iter().map(Option::unwrap).collect() })
    }

    /// `p^N` if it fits in a `u64`.
    pub fn state_count(&self) -> Option<u64> {
        (self.p.get() as u64).checked_pow(self.len() as u32)
    }

    pub fn encode_state(&self, x: &[u32]) -> u64 {
        x.iter().fold(0u64, |acc, &v| acc * self.p.get() as u64 + v as u64)
    }

    pub fn decode_state(&self, mut index: u64) -> Vec<u32> {
        let p = self.p.get() as u64;
        let mut x = vec![0u32; self.len()];
        for v in x.iter_mut().rev() {
            *v = (index % p) as u32;
            index /= p;
        }
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DerridaMode {
    /// One fixed network.
    Quenched,
    /// A fresh network from the ensemble for every sample.
    Annealed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Estimator {
    MonteCarlo,
    MeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerridaPoint {
    pub m: usize,
    pub d: f64,
    pub stderr: Option<f64>,
    pub samples: Option<u64>,
}

/// Expected one-step Hamming distance `D(m)` after perturbing `m` nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerridaCurve {
    pub estimator: Estimator,
    pub mode: DerridaMode,
    pub nodes: usize,
    pub points: Vec<DerridaPoint>,
    pub seed: Option<u64>,
    /// Nodes whose exact sensitivities were out of reach and were replaced
    /// by the parameter-ensemble mean (mean-field only).
    pub approximated_nodes: Vec<usize>,
}

fn check_ms(nodes: usize, ms: &[usize]) -> Result<()> {
    match ms.iter().find(|&&m| m > nodes) {
        Some(m) => Err(domain(format!("perturbation size {m} exceeds the {nodes} nodes"))),
        None => Ok(()),
    }
}

/// One damage trial: random state, random `m` nodes, nonzero shifts, one step.
fn damage_trial<R: Rng + ?Sized>(net: &Network, m: usize, rng: &mut R, order: &mut [usize]) -> u64 {
    let p = net.p.get();
    let x: Vec<u32> = (0..net.len()).map(|_| rng.random_range(0..p)).collect();
    let mut y = x.clone();
    let (chosen, _) = order.partial_shuffle(rng, m);
    for &i in chosen.iter() {
        y[i] = (y[i] + rng.random_range(1..p)) % p;
    }
    let (mut fx, mut fy) = (vec![0; net.len()], vec![0; net.len()]);
    net.step_into(&x, &mut fx);
    net.step_into(&y, &mut fy);
    fx.iter().zip(&fy).filter(|(a, b)| a != b).count() as u64
}

fn monte_carlo_curve(
    nodes: usize,
    mode: DerridaMode,
    ms: &[usize],
    samples: u64,
    seed: u64,
    workers: usize,
    trial: impl Fn(usize, &mut rand_chacha::ChaCha20Rng) -> u64 + Sync,
) -> Result<DerridaCurve> {
    check_ms(nodes, ms)?;
    if samples == 0 {
        return Err(domain("samples must be at least 1"));
    }
    let pool = pool(workers)?;
    let points = ms
        .iter()
        .map(|&m| {
            let stream_seed = derive_seed(seed, m as u64);
            let (sum, sum_sq) = pool.install(|| {
                (0..samples)
                    .into_par_iter()
                    .map(|i| {
                        let h = trial(m, &mut substream(stream_seed, i)) as u128;
                        (h, h * h)
                    })
                    .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
            });
            let (d, stderr) = mean_and_stderr(sum, sum_sq, samples, 1.0);
            DerridaPoint { m, d, stderr, samples: Some(samples) }
        })
        .collect();
    Ok(DerridaCurve {
        estimator: Estimator::MonteCarlo,
        mode,
        nodes,
        points,
        seed: Some(seed),
        approximated_nodes: Vec::new(),
    })
}

/// Monte Carlo `D(m)` on a fixed network. Sample `i` of size `m` uses
/// `substream(derive_seed(seed, m), i)`, independent of `workers`.
pub fn derrida_quenched(net: &Network, ms: &[usize], samples: u64, seed: u64, workers: usize) -> Result<DerridaCurve> {
    monte_carlo_curve(net.len(), DerridaMode::Quenched, ms, samples, seed, workers, |m, rng| {
        let mut order: Vec<usize> = (0..net.len()).collect();
        damage_trial(net, m, rng, &mut order)
    })
}

/// Monte Carlo `D(m)` with a new network drawn from `spec` for every sample.
pub fn derrida_annealed(
    spec: &NetworkSpec,
    ms: &[usize],
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<DerridaCurve> {
    spec.validate()?;
    let samplers = spec.samplers()?;
    monte_carlo_curve(spec.nodes, DerridaMode::Annealed, ms, samples, seed, workers, |m, rng| {
        let net = spec.sample_with(&samplers, rng);
        let mut order: Vec<usize> = (0..net.len()).collect();
        damage_trial(&net, m, rng, &mut order)
    })
}

/// What a Monte Carlo Derrida estimate perturbs.
#[derive(Debug, Clone, Copy)]
pub enum DerridaSource<'a> {
    Quenched(&'a Network),
    Annealed(&'a NetworkSpec),
}

pub fn derrida_monte_carlo(
    source: DerridaSource<'_>,
    ms: &[usize],
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<DerridaCurve> {
    match source {
        DerridaSource::Quenched(net) => derrida_quenched(net, ms, samples, seed, workers),
        DerridaSource::Annealed(spec) => derrida_annealed(spec, ms, samples, seed, workers),
    }
}

fn big(x: u64) -> BigInt {
    BigInt::from(x)
}

/// `P(|A ∩ S| = c)` for a fixed `k`-set `A` and a uniform `m`-subset `S` of `N`.
fn hypergeometric(nodes: usize, m: usize, k: usize, c: usize) -> BigRational {
    if c > m || c > k || k - c > nodes - m {
        return BigRational::zero();
    }
    let (n, m, k, c) = (nodes as u64, m as u64, k as u64, c as u64);
    BigRational::new(big(binomial(m, c)) * big(binomial(n - m, k - c)), big(binomial(n, k)))
}

/// `sum_i sum_c P(c of node i's inputs are hit) * q_c(node i)`.
fn mean_field_sum(nodes: usize, ms: &[usize], per_node: &[Vec<BigRational>]) -> Vec<DerridaPoint> {
    ms.iter()
        .map(|&m| {
            let mut d = BigRational::zero();
            for q in per_node {
                for (c, qc) in q.iter().enumerate() {
                    d += hypergeometric(nodes, m, q.len() - 1, c) * qc;
                }
            }
            DerridaPoint { m, d: d.to_f64().unwrap_or(f64::NAN), stderr: None, samples: None }
        })
        .collect()
}

/// `q_0 = 0, q_1, ..., q_k` of one table.
fn profile_with_zero(f: &TruthTable) -> Result<Vec<BigRational>> {
    let mut q = vec![BigRational::zero()];
    for c in 1..=f.arity() {
        q.push(brute_force_qc(f, c)?);
    }
    Ok(q)
}

/// Mean-field `D(m)` of a fixed network from exact node sensitivities.
/// Exact for one step because the perturbed set is uniform over all nodes.
/// Nodes too wide for enumeration use the parameter-ensemble formula instead.
pub fn derrida_mean_field(net: &Network, ms: &[usize]) -> Result<DerridaCurve> {
    check_ms(net.len(), ms)?;
    let mut approximated_nodes = Vec::new();
    let mut per_node = Vec::with_capacity(net.len());
    for (i, node) in net.nodes.iter().enumerate() {
        match profile_with_zero(&node.table) {
            Ok(q) => per_node.push(q),
            Err(Error::Capacity { .. }) => {
                approximated_nodes.push(i);
                per_node.push(ensemble_profile(net.p, node.table.arity(), Distribution::ParameterUniform)?);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(DerridaCurve {
        estimator: Estimator::MeanField,
        mode: DerridaMode::Quenched,
        nodes: net.len(),
        points: mean_field_sum(net.len(), ms, &per_node),
        seed: None,
        approximated_nodes,
    })
}

/// Exact ensemble mean of `q_0..q_k` for arity `k`.
pub fn ensemble_profile(p: PrimeModulus, k: usize, distribution: Distribution) -> Result<Vec<BigRational>> {
    let mut q = vec![BigRational::zero()];
    match distribution {
        Distribution::ParameterUniform => {
            for c in 1..=k {
                q.push(ensemble_qc_formula(p, k, c)?);
            }
        }
        Distribution::FunctionUniform => {
            let tables: Vec<TruthTable> = if k == 1 {
                let pv = p.get();
                let mut out = Vec::new();
                for seg in lower_segments(p) {
                    for inside in 0..pv {
                        for outside in (0..pv).filter(|&b| b != inside) {
                            out.push(TruthTable::from_fn(p, 1, |x| if seg.contains(x[0]) { inside } else { outside })?);
                        }
                    }
                }
                out
            } else {
                all_canonical_forms(p, k)?.iter().map(build).collect()
            };
            let count = BigInt::from(tables.len());
            for c in 1..=k {
                let sum = tables
                    .par_iter()
                    .map(|t| brute_force_qc(t, c))
                    .try_reduce(BigRational::zero, |a, b| Ok(a + b))?;
                q.push(sum / &count);
            }
        }
    }
    Ok(q)
}

/// Annealed mean-field `D(m)` for the ensemble: the expectation of the
/// annealed Monte Carlo estimator.
pub fn derrida_mean_field_ensemble(spec: &NetworkSpec, ms: &[usize]) -> Result<DerridaCurve> {
    spec.validate()?;
    check_ms(spec.nodes, ms)?;
    let mut cache: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut per_node = Vec::with_capacity(spec.nodes);
    for i in 0..spec.nodes {
        let k = spec.indegree.of(i);
        if let Some((_, q)) = cache.iter().find(|(kk, _)| *kk == k) {
            per_node.push(q.clone());
        } else {
            let q = ensemble_profile(spec.p, k, spec.distribution)?;
            cache.push((k, q.clone()));
            per_node.push(q);
        }
    }
    Ok(DerridaCurve {
        estimator: Estimator::MeanField,
        mode: DerridaMode::Annealed,
        nodes: spec.nodes,
        points: mean_field_sum(spec.nodes, ms, &per_node),
        seed: None,
        approximated_nodes: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attractor {
    /// Cycle states as indices (`x_0` most significant), starting from the smallest.
    pub cycle: Vec<u64>,
    /// Number of states, cycle included, that eventually reach the cycle.
    pub basin_size: u64,
}

impl Attractor {
    pub fn period(&self) -> usize {
        self.cycle.len()
    }
}

/// All attractors by exhaustive iteration, sorted by smallest state.
pub fn attractors(net: &Network, state_cap: u64) -> Result<Vec<Attractor>> {
    let total = net.state_count().filter(|&s| s <= state_cap).ok_or_else(|| Error::Capacity {
        guard: "state_cap",
        detail: format!("{}^{} states exceed the cap of {state_cap}", net.p.get(), net.len()),
    })?;
    let next: Vec<u64> = (0..total)
        .into_par_iter()
        .map_init(
            || vec![0u32; net.len()],
            |out, s| {
                net.step_into(&net.decode_state(s), out);
                net.encode_state(out)
            },
        )
        .collect();
    const UNSEEN: u32 = u32::MAX;
    const ON_PATH: u32 = u32::MAX - 1;
    let mut label = vec![UNSEEN; total as usize];
    let mut cycles: Vec<Vec<u64>> = Vec::new();
    let mut basins: Vec<u64> = Vec::new();
    let mut path = Vec::new();
    for start in 0..total {
        if label[start as usize] != UNSEEN {
            continue;
        }
        path.clear();
        let mut s = start;
        while label[s as usize] == UNSEEN {
            label[s as usize] = ON_PATH;
            path.push(s);
            s = next[s as usize];
        }
        let id = if label[s as usize] == ON_PATH {
            let from = path.iter().position(|&t| t == s).unwrap();
            let mut cycle = path[from..].to_vec();
            let min = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
            cycle.rotate_left(min);
            cycles.push(cycle);
            basins.push(0);
            (cycles.len() - 1) as u32
        } else {
            label[s as usize]
        };
        for &t in &path {
            label[t as usize] = id;
        }
        basins[id as usize] += path.len() as u64;
    }
    let mut out: Vec<Attractor> =
        cycles.into_iter().zip(basins).map(|(cycle, basin_size)| Attractor { cycle, basin_size }).collect();
    out.sort_by_key(|a| a.cycle[0]);
    Ok(out)
}

/// Total number of attractor states as an exact integer.
pub fn attractor_state_total(found: &[Attractor]) -> BigUint {
    found.iter().map(|a| BigUint::from(a.cycle.len())).sum()
}
