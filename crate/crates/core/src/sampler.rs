//! Seed-reproducible random nested canalizing functions and networks.
//!
//! Two distributions are kept apart: [`Distribution::ParameterUniform`] draws
//! the case-ladder parameters uniformly (orders, segments, outputs), while
//! [`Distribution::FunctionUniform`] is uniform over distinct functions.
//!
//! Randomness comes from ChaCha20 streams: `substream(seed, i)` is the
//! generator for sample or node `i`, so results do not depend on how work is
//! split across threads.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::{build, decompose, CanonicalNcf, LayerEntry};
use crate::definition::{from_definition, DefinitionParams};
use crate::enumeration::{composition_count, compositions};
use crate::error::{domain, Result};
use crate::field::{all_segments, lower_segments, PrimeModulus, Segment};
use crate::network::{Network, Node};
use crate::table::TruthTable;

/// Name and version of the generator behind every seeded routine.
pub const RNG_NAME: &str = "chacha20-stream/1";

const REJECTION_ATTEMPTS: usize = 1_000_000;

pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for a tagged sub-experiment.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Distribution {
    ParameterUniform,
    FunctionUniform,
}

impl std::str::FromStr for Distribution {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parameter" | "parameter-uniform" | "ParameterUniform" => Ok(Self::ParameterUniform),
            "function" | "function-uniform" | "FunctionUniform" => Ok(Self::FunctionUniform),
            _ => Err(domain(format!("unknown distribution `{s}` (use `parameter` or `function`)"))),
        }
    }
}

/// Order uniform over `n!`, segments i.i.d. uniform over all `2(p-1)`,
/// `b_1..b_n` i.i.d. uniform on `F_p`, `b_{n+1}` uniform on `F_p - {b_n}`.
pub fn sample_definition_params<R: Rng + ?Sized>(p: PrimeModulus, n: usize, rng: &mut R) -> Result<DefinitionParams> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    let segs = all_segments(p);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let segments = (0..n).map(|_| segs[rng.random_range(0..segs.len())]).collect();
    let mut outputs: Vec<u32> = (0..n).map(|_| rng.random_range(0..p.get())).collect();
    let shift = rng.random_range(1..p.get());
    outputs.push((outputs[n - 1] + shift) % p.get());
    DefinitionParams::new(p, order, segments, outputs)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub p: PrimeModulus,
    pub n: usize,
    pub distribution: Distribution,
    /// Required layer number.
    pub layers: Option<usize>,
    /// Required layer sizes `(k_1, ..., k_r)`.
    pub composition: Option<Vec<usize>>,
}

impl EnsembleSpec {
    pub fn new(p: PrimeModulus, n: usize, distribution: Distribution) -> Self {
        Self { p, n, distribution, layers: None, composition: None }
    }

    pub fn with_layers(mut self, r: usize) -> Self {
        self.layers = Some(r);
        self
    }

    pub fn with_composition(mut self, sizes: Vec<usize>) -> Self {
        self.composition = Some(sizes);
        self
    }

    fn is_constrained(&self) -> bool {
        self.layers.is_some() || self.composition.is_some()
    }

    fn admits(&self, sizes: &[usize]) -> bool {
        self.layers.is_none_or(|r| sizes.len() == r) && self.composition.as_ref().is_none_or(|c| c == sizes)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if let Some(c) = &self.composition {
            if c.contains(&0) || c.iter().sum::<usize>() != self.n {
                return Err(domain(format!("composition {c:?} is not a composition of {}", self.n)));
            }
            if self.layers.is_some_and(|r| r != c.len()) {
                return Err(domain("layer number disagrees with the composition"));
            }
        }
        if self.layers.is_some_and(|r| r == 0 || r > self.n) {
            return Err(domain(format!("layer number must lie in 1..={}", self.n)));
        }
        if self.is_constrained() && self.n < 2 {
            return Err(domain("structure constraints need n >= 2"));
        }
        Ok(())
    }
}

/// Precomputed stratum weights for repeated function-uniform draws.
#[derive(Debug, Clone)]
pub struct CanonicalSampler {
    spec: EnsembleSpec,
    strata: Vec<(Vec<usize>, BigUint)>,
    total: BigUint,
}

impl CanonicalSampler {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        if spec.n < 2 {
            return Err(domain("canonical forms need n >= 2"));
        }
        let strata: Vec<(Vec<usize>, BigUint)> = compositions(spec.n)
            .into_iter()
            .filter(|sizes| spec.admits(sizes))
            .map(|sizes| {
                let w = composition_count(spec.p, &sizes);
                (sizes, w)
            })
            .filter(|(_, w)| *w > BigUint::ZERO)
            .collect();
        let total: BigUint = strata.iter().map(|(_, w)| w).sum();
        if total == BigUint::ZERO {
            return Err(domain("no nested canalizing function satisfies the structure constraints"));
        }
        Ok(Self { spec, strata, total })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// Number of distinct functions in the constrained universe.
    pub fn universe_size(&self) -> &BigUint {
        &self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CanonicalNcf> {
        match self.spec.distribution {
            Distribution::FunctionUniform => Ok(self.sample_function_uniform(rng)),
            Distribution::ParameterUniform => {
                for _ in 0..REJECTION_ATTEMPTS {
                    let d = sample_definition_params(self.spec.p, self.spec.n, rng)?;
                    let c = decompose(&from_definition(&d))?.expect("definition images are nested canalizing");
                    if self.spec.admits(&c.layer_sizes()) {
                        return Ok(c);
                    }
                }
                Err(domain("structure constraints are too rare under the parameter ensemble"))
            }
        }
    }

    fn sample_function_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> CanonicalNcf {
        let mut ticket = random_below(&self.total, rng);
        let sizes = self
            .strata
            .iter()
            .find_map(|(sizes, w)| {
                if ticket < *w {
                    Some(sizes)
                } else {
                    ticket -= w;
                    None
                }
            })
            .expect("ticket falls in some stratum");
        fill_canonical(self.spec.p, self.spec.n, sizes, rng)
    }
}

/// Uniform integer in `0..bound` by rejection on random bit strings.
fn random_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess;
        let x = BigUint::from_bytes_be(&buf);
        if x < *bound {
            return x;
        }
    }
}

/// Uniform canonical form with the given layer sizes.
fn fill_canonical<R: Rng + ?Sized>(p: PrimeModulus, n: usize, sizes: &[usize], rng: &mut R) -> CanonicalNcf {
    let segs = all_segments(p);
    let oriented = lower_segments(p);
    let r = sizes.len();
    let single_last = sizes[r - 1] == 1;
    let mut vars: Vec<usize> = (0..n).collect();
    vars.shuffle(rng);
    let mut it = vars.into_iter();
    let layers: Vec<Vec<LayerEntry>> = sizes
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            (0..k)
                .map(|_| {
                    let var = it.next().unwrap();
                    let segment = if single_last && i == r - 1 {
                        oriented[rng.random_range(0..oriented.len())]
                    } else {
                        segs[rng.random_range(0..segs.len())]
                    };
                    LayerEntry { var, segment }
                })
                .collect()
        })
        .collect();
    let pv = p.get();
    let mut constants = vec![rng.random_range(0..pv)];
    constants.extend((1..r).map(|_| rng.random_range(1..pv)));
    let last = if single_last && r >= 2 {
        // nonzero and != -B_r
        let forbidden = pv - constants[r - 1];
        let k = rng.random_range(0..pv - 2) + 1;
        if k >= forbidden {
            k + 1
        } else {
            k
        }
    } else {
        rng.random_range(1..pv)
    };
    constants.push(last);
    CanonicalNcf::new(p, n, layers, constants).expect("sampled form satisfies the constraints")
}

pub fn sample_canonical<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<CanonicalNcf> {
    CanonicalSampler::new(spec.clone())?.sample(rng)
}

/// Draws a table; unlike [`sample_canonical`] this also covers `n = 1`.
pub fn sample_table<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<TruthTable> {
    spec.validate()?;
    match (spec.distribution, spec.n, spec.is_constrained()) {
        (Distribution::ParameterUniform, _, false) => Ok(from_definition(&sample_definition_params(spec.p, spec.n, rng)?)),
        (Distribution::FunctionUniform, 1, _) => Ok(sample_univariate(spec.p, rng)),
        _ => Ok(build(&sample_canonical(spec, rng)?)),
    }
}

/// `b` on a segment containing 0, `b' != b` elsewhere: uniform over the `p(p-1)^2` such functions.
fn sample_univariate<R: Rng + ?Sized>(p: PrimeModulus, rng: &mut R) -> TruthTable {
    let segs = lower_segments(p);
    let seg: Segment = segs[rng.random_range(0..segs.len())];
    let inside = rng.random_range(0..p.get());
    let outside = (inside + rng.random_range(1..p.get())) % p.get();
    TruthTable::from_fn(p, 1, |x| if seg.contains(x[0]) { inside } else { outside }).expect("tiny table")
}

/// Draws from one of the two ensembles, reusing stratum weights across calls.
#[derive(Debug, Clone)]
pub(crate) enum TableSampler {
    Parameter { p: PrimeModulus, n: usize },
    Univariate { p: PrimeModulus },
    Canonical(Box<CanonicalSampler>),
}

impl TableSampler {
    pub(crate) fn new(p: PrimeModulus, n: usize, distribution: Distribution) -> Result<Self> {
        Ok(match (distribution, n) {
            (_, 0) => return Err(domain("in-degree must be at least 1")),
            (Distribution::ParameterUniform, _) => Self::Parameter { p, n },
            (Distribution::FunctionUniform, 1) => Self::Univariate { p },
            (Distribution::FunctionUniform, _) => {
                Self::Canonical(Box::new(CanonicalSampler::new(EnsembleSpec::new(p, n, distribution))?))
            }
        })
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TruthTable {
        match self {
            Self::Parameter { p, n } => from_definition(&sample_definition_params(*p, *n, rng).expect("n >= 1")),
            Self::Univariate { p } => sample_univariate(*p, rng),
            Self::Canonical(s) => build(&s.sample(rng).expect("unconstrained sampling succeeds")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InDegree {
    Constant(usize),
    PerNode(Vec<usize>),
}

impl InDegree {
    pub fn of(&self, node: usize) -> usize {
        match self {
            InDegree::Constant(k) => *k,
            InDegree::PerNode(ks) => ks[node],
        }
    }
}

/// Random networks: uniform distinct inputs per node, node functions from an ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub nodes: usize,
    pub p: PrimeModulus,
    pub indegree: InDegree,
    pub distribution: Distribution,
    pub allow_self_inputs: bool,
}

impl NetworkSpec {
    pub fn new(nodes: usize, p: PrimeModulus, indegree: InDegree, distribution: Distribution) -> Self {
        Self { nodes, p, indegree, distribution, allow_self_inputs: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(domain("a network needs at least one node"));
        }
        if let InDegree::PerNode(ks) = &self.indegree {
            if ks.len() != self.nodes {
                return Err(domain(format!("{} in-degrees given for {} nodes", ks.len(), self.nodes)));
            }
        }
        let available = if self.allow_self_inputs { self.nodes } else { self.nodes - 1 };
        for i in 0..self.nodes {
            let k = self.indegree.of(i);
            if k == 0 || k > available {
                return Err(domain(format!(
                    "in-degree {k} of node {i} must lie in 1..={available} for {} nodes",
                    self.nodes
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn samplers(&self) -> Result<Vec<(usize, TableSampler)>> {
        let mut distinct: Vec<usize> = (0..self.nodes).map(|i| self.indegree.of(i)).collect();
        distinct.sort_unstable();
        distinct.dedup();
        distinct
            .into_iter()
            .map(|k| Ok((k, TableSampler::new(self.p, k, self.distribution)?)))
            .collect()
    }

    pub(crate) fn sample_with<R: Rng + ?Sized>(&self, samplers: &[(usize, TableSampler)], rng: &mut R) -> Network {
        let candidates_all: Vec<usize> = (0..self.nodes).collect();
        let nodes = (0..self.nodes)
            .map(|i| {
                let k = self.indegree.of(i);
                let mut pool: Vec<usize> = if self.allow_self_inputs {
                    candidates_all.clone()
                } else {
                    candidates_all.iter().copied().filter(|&j| j != i).collect()
                };
                let (chosen, _) = pool.partial_shuffle(rng, k);
                let inputs = chosen.to_vec();
                let sampler = &samplers.iter().find(|(kk, _)| *kk == k).expect("sampler per in-degree").1;
                Node { inputs, table: sampler.sample(rng) }
            })
            .collect();
        Network::from_parts_unchecked(self.p, nodes)
    }
}

pub fn sample_network<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<Network> {
    spec.validate()?;
    let samplers = spec.samplers()?;
    Ok(spec.sample_with(&samplers, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{all_canonical_forms, count_ncfs};
    use std::collections::HashMap;

    fn pm(p: u32) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn parameter_support_covers_all_functions() {
        let mut rng = substream(7, 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            seen.insert(from_definition(&sample_definition_params(pm(2), 2, &mut rng).unwrap()));
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn last_output_marginal_is_uniform() {
        let mut rng = substream(8, 0);
        let mut counts = [0u64; 5];
        let draws = 50_000u64;
        for _ in 0..draws {
            let d = sample_definition_params(pm(5), 3, &mut rng).unwrap();
            assert_ne!(d.outputs()[2], d.outputs()[3]);
            counts[d.outputs()[3] as usize] += 1;
        }
        let e = draws as f64 / 5.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        assert!(chi2 < 18.47, "chi2 = {chi2}");
    }

    #[test]
    fn seeds_reproduce() {
        let a: Vec<_> = (0..20).map(|i| sample_definition_params(pm(3), 4, &mut substream(11, i)).unwrap()).collect();
        let b: Vec<_> = (0..20).map(|i| sample_definition_params(pm(3), 4, &mut substream(11, i)).unwrap()).collect();
        assert_eq!(a, b);
        let c = sample_definition_params(pm(3), 4, &mut substream(12, 0)).unwrap();
        assert!(a.iter().any(|d| *d != c));
    }

    #[test]
    fn function_uniform_is_uniform_at_three_two() {
        // chi-square goodness of fit over all 192 functions
        let spec = EnsembleSpec::new(pm(3), 2, Distribution::FunctionUniform);
        let sampler = CanonicalSampler::new(spec).unwrap();
        let forms = all_canonical_forms(pm(3), 2).unwrap();
        assert_eq!(forms.len(), 192);
        let mut counts: HashMap<CanonicalNcf, u64> = forms.iter().map(|f| (f.clone(), 0)).collect();
        let draws = 100_000u64;
        let mut rng = substream(2024, 0);
        for _ in 0..draws {
            *counts.get_mut(&sampler.sample(&mut rng).unwrap()).expect("sample is a valid form") += 1;
        }
        let expected = draws as f64 / 192.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 191 degrees of freedom, 0.001 upper quantile
        assert!(chi2 < 255.0, "chi2 = {chi2}");
    }

    #[test]
    fn function_uniform_small_boolean_universes() {
        for n in [2usize, 3] {
            let forms = all_canonical_forms(pm(2), n).unwrap();
            let sampler = CanonicalSampler::new(EnsembleSpec::new(pm(2), n, Distribution::FunctionUniform)).unwrap();
            let mut counts: HashMap<CanonicalNcf, u64> = forms.iter().map(|f| (f.clone(), 0)).collect();
            let draws = 64_000u64;
            let mut rng = substream(99, n as u64);
            for _ in 0..draws {
                *counts.get_mut(&sampler.sample(&mut rng).unwrap()).unwrap() += 1;
            }
            let k = forms.len() as f64;
            let e = draws as f64 / k;
            let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
            // 0.001 quantiles: df=7 -> 24.3, df=63 -> 103.4
            let bound = if n == 2 { 24.3 } else { 103.4 };
            assert!(chi2 < bound, "n={n} chi2={chi2}");
        }
    }

    #[test]
    fn structure_constraints() {
        let base = EnsembleSpec::new(pm(3), 4, Distribution::FunctionUniform);
        let mut rng = substream(5, 0);
        for _ in 0..200 {
            let c = sample_canonical(&base.clone().with_layers(1), &mut rng).unwrap();
            assert_eq!(c.layer_sizes(), vec![4]);
            let c = sample_canonical(&base.clone().with_composition(vec![1, 2, 1]), &mut rng).unwrap();
            assert_eq!(c.layer_sizes(), vec![1, 2, 1]);
            let c = sample_canonical(&base.clone().with_layers(2).with_distribution_param(), &mut rng).unwrap();
            assert_eq!(c.layer_number(), 2);
        }
        // Boolean single-variable last layers do not exist
        let none = EnsembleSpec::new(pm(2), 3, Distribution::FunctionUniform).with_composition(vec![2, 1]);
        assert!(sample_canonical(&none, &mut rng).is_err());
        assert!(EnsembleSpec::new(pm(3), 3, Distribution::FunctionUniform).with_composition(vec![1, 1]).validate().is_err());
        assert!(EnsembleSpec::new(pm(3), 3, Distribution::FunctionUniform).with_layers(4).validate().is_err());
    }

    impl EnsembleSpec {
        fn with_distribution_param(mut self) -> Self {
            self.distribution = Distribution::ParameterUniform;
            self
        }
    }

    #[test]
    fn sampled_forms_round_trip() {
        for (p, n) in [(2u32, 4usize), (3, 3), (5, 3), (7, 5)] {
            for dist in [Distribution::FunctionUniform, Distribution::ParameterUniform] {
                let sampler = CanonicalSampler::new(EnsembleSpec::new(pm(p), n, dist)).unwrap();
                let mut rng = substream(p as u64, n as u64);
                for _ in 0..500 {
                    let c = sampler.sample(&mut rng).unwrap();
                    assert_eq!(decompose(&build(&c)).unwrap().as_ref(), Some(&c));
                }
            }
        }
    }

    #[test]
    fn universe_size_is_the_count() {
        let s = CanonicalSampler::new(EnsembleSpec::new(pm(5), 4, Distribution::FunctionUniform)).unwrap();
        assert_eq!(s.universe_size(), &count_ncfs(pm(5), 4).unwrap());
    }

    #[test]
    fn univariate_universe() {
        let mut rng = substream(1, 1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..5000 {
            let spec = EnsembleSpec::new(pm(3), 1, Distribution::FunctionUniform);
            seen.insert(sample_table(&spec, &mut rng).unwrap());
        }
        // p (p-1)^2 distinct two-valued segment functions
        assert_eq!(seen.len(), 12);
    }

    #[test]
    fn random_below_is_in_range() {
        let mut rng = substream(3, 3);
        let bound = BigUint::from(1000u32);
        for _ in 0..1000 {
            assert!(random_below(&bound, &mut rng) < bound);
        }
    }

    #[test]
    fn networks() {
        let spec = NetworkSpec::new(10, pm(3), InDegree::Constant(2), Distribution::ParameterUniform);
        let a = sample_network(&spec, &mut substream(42, 0)).unwrap();
        let b = sample_network(&spec, &mut substream(42, 0)).unwrap();
        assert_eq!(a, b);
        for (i, node) in a.nodes().iter().enumerate() {
            assert_eq!(node.inputs.len(), 2);
            assert_ne!(node.inputs[0], node.inputs[1]);
            assert!(!node.inputs.contains(&i));
        }
        let lonely = NetworkSpec::new(1, pm(3), InDegree::Constant(1), Distribution::ParameterUniform);
        assert!(sample_network(&lonely, &mut substream(0, 0)).is_err());
        let mut selfish = lonely.clone();
        selfish.allow_self_inputs = true;
        assert!(sample_network(&selfish, &mut substream(0, 0)).is_ok());
        let too_many = NetworkSpec::new(4, pm(2), InDegree::Constant(4), Distribution::FunctionUniform);
        assert!(sample_network(&too_many, &mut substream(0, 0)).is_err());
        let listed = NetworkSpec::new(3, pm(2), InDegree::PerNode(vec![1, 2, 2]), Distribution::FunctionUniform);
        let net = sample_network(&listed, &mut substream(0, 0)).unwrap();
        assert_eq!(net.nodes().iter().map(|n| n.inputs.len()).collect::<Vec<_>>(), vec![1, 2, 2]);
    }
}
