//! c-sensitivity: the probability that a function changes value when `c`
//! uniformly chosen inputs are shifted by uniform nonzero offsets.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::enumeration::forms::combinations;
use crate::error::{domain, Error, Result};
use crate::field::PrimeModulus;
use crate::parallel::{mean_and_stderr, pool};
use crate::sampler::{substream, CanonicalSampler, EnsembleSpec, TableSampler};
use crate::table::{increment, TruthTable};

/// Largest number of point/perturbation pairs visited by [`brute_force_qc`].
pub const MAX_SENSITIVITY_EVALUATIONS: u64 = 1 << 28;

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn check_c(n: usize, c: usize) -> Result<()> {
    if c == 0 || c > n {
        return Err(domain(format!("c must lie in 1..={n}, got {c}")));
    }
    Ok(())
}

fn evaluations(p: PrimeModulus, n: usize, c: usize) -> Option<u64> {
    let subsets = binomial(n as u64, c as u64);
    (p.get() as u64)
        .checked_pow(n as u32)?
        .checked_mul(subsets)?
        .checked_mul((p.get() as u64 - 1).checked_pow(c as u32)?)
}

/// Returns `(changed, total)` over all points, `c`-subsets and nonzero offsets.
pub(crate) fn perturbation_counts(f: &TruthTable, c: usize) -> Result<(u64, u64)> {
    let (p, n) = (f.modulus(), f.arity());
    check_c(n, c)?;
    let total = evaluations(p, n, c)
        .filter(|&e| e <= MAX_SENSITIVITY_EVALUATIONS)
        .ok_or_else(|| Error::Capacity {
            guard: "MAX_SENSITIVITY_EVALUATIONS",
            detail: format!("p={}, n={n}, c={c} needs more than {MAX_SENSITIVITY_EVALUATIONS} evaluations", p.get()),
        })?;
    let pv = p.get();
    let subsets = combinations(&(0..n).collect::<Vec<_>>(), c);
    let strides: Vec<usize> = (0..n).map(|v| f.stride(v)).collect();
    let values = f.values();
    let mut x = vec![0u32; n];
    let mut d = vec![1u32; c];
    let mut changed = 0u64;
    for (idx, &fx) in values.iter().enumerate() {
        for subset in &subsets {
            d.iter_mut().for_each(|v| *v = 1);
            loop {
                let mut j = idx as isize;
                for (&var, &dv) in subset.iter().zip(&d) {
                    let moved = (x[var] + dv) % pv;
                    j += (moved as isize - x[var] as isize) * strides[var] as isize;
                }
                changed += (values[j as usize] != fx) as u64;
                // next offset vector in (1..p)^c
                let mut k = c;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    d[k] += 1;
                    if d[k] < pv {
                        k += 1;
                        break;
                    }
                    d[k] = 1;
                }
                if k == 0 {
                    break;
                }
            }
        }
        increment(&mut x, pv);
    }
    Ok((changed, total))
}

/// Exact `q_c(f)` by enumeration.
pub fn brute_force_qc(f: &TruthTable, c: usize) -> Result<BigRational> {
    let (changed, total) = perturbation_counts(f, c)?;
    Ok(ratio(changed, total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityEstimator {
    BruteForce,
    Formula,
    MonteCarlo,
}

/// `q_1, ..., q_n`, exact for brute force and the formula; for Monte Carlo
/// the exact mean of the sampled exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityProfile {
    pub p: u32,
    pub n: usize,
    pub estimator: SensitivityEstimator,
    pub q: Vec<BigRational>,
    /// Per-`c` standard errors (Monte Carlo only).
    pub stderr: Vec<Option<f64>>,
    pub samples: Option<u64>,
}

impl SensitivityProfile {
    pub fn of(f: &TruthTable) -> Result<Self> {
        let q = (1..=f.arity()).map(|c| brute_force_qc(f, c)).collect::<Result<_>>()?;
        Ok(Self {
            p: f.modulus().get(),
            n: f.arity(),
            estimator: SensitivityEstimator::BruteForce,
            q,
            stderr: Vec::new(),
            samples: None,
        })
    }

    pub fn ensemble(p: PrimeModulus, n: usize) -> Result<Self> {
        let q = (1..=n).map(|c| ensemble_qc_formula(p, n, c)).collect::<Result<_>>()?;
        Ok(Self { p: p.get(), n, estimator: SensitivityEstimator::Formula, q, stderr: Vec::new(), samples: None })
    }

    pub fn monte_carlo(spec: &EnsembleSpec, samples: u64, seed: u64, workers: usize) -> Result<Self> {
        let estimates =
            (1..=spec.n).map(|c| monte_carlo_ensemble_qc(spec, c, samples, seed, workers)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            p: spec.p.get(),
            n: spec.n,
            estimator: SensitivityEstimator::MonteCarlo,
            stderr: estimates.iter().map(|e| e.stderr).collect(),
            q: estimates.into_iter().map(|e| e.exact_mean).collect(),
            samples: Some(samples),
        })
    }

    pub fn qc(&self, c: usize) -> Option<&BigRational> {
        c.checked_sub(1).and_then(|i| self.q.get(i))
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.q.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Expected number of inputs whose change alters the output, `n * q_1`.
    pub fn average_sensitivity(&self) -> BigRational {
        self.q.first().map_or_else(BigRational::zero, |q1| q1 * BigInt::from(self.n))
    }
}

/// Probability that a uniform point leaves a uniform segment from inside,
/// or enters it from outside, under a uniform nonzero shift: `(p+1) / (3(p-1))`.
pub fn segment_crossing_probability(p: PrimeModulus) -> BigRational {
    let p = p.get() as u64;
    ratio(p + 1, 3 * (p - 1))
}

fn pow(base: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * base)
}

fn binom(n: usize, k: usize) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    BigRational::from_integer(BigInt::from(binomial(BigUint::from(n), BigUint::from(k))))
}

fn ensemble_terms(p: PrimeModulus, n: usize, c: usize) -> Result<(BigRational, BigRational, BigRational)> {
    if n == 0 {
        return Err(domain("n must be at least 1"));
    }
    check_c(n, c)?;
    let phi1 = segment_crossing_probability(p);
    let t = (BigRational::one() - &phi1) / BigInt::from(2);
    let interior = &phi1 * ratio(p.get() as u64 - 1, p.get() as u64);
    Ok((phi1, t, interior))
}

/// Mean `q_c` over the parameter-uniform ensemble of arity `n`, in closed form.
pub fn ensemble_qc_formula(p: PrimeModulus, n: usize, c: usize) -> Result<BigRational> {
    let (phi1, t, _) = ensemble_terms(p, n, c)?;
    let half = ratio(1, 2);
    let last = ratio(c as u64, n as u64) * pow(&half, n - c) * pow(&t, c - 1);
    let mut inner = BigRational::zero();
    for i in 1..=c {
        let mut s = BigRational::zero();
        for j in i..=(i + n - c).min(n - 1) {
            s += binom(n - j, c - i) * binom(j - 1, i - 1) * pow(&half, j - i);
        }
        inner += s * pow(&t, i - 1);
    }
    let spread = ratio(p.get() as u64 - 1, p.get() as u64) * inner / binom(n, c);
    Ok(phi1 * (last + spread))
}

/// The same mean as [`ensemble_qc_formula`], as the unsimplified double sum over
/// the first perturbed position `i` and the deciding position `j`.
pub fn ensemble_qc_direct_sum(p: PrimeModulus, n: usize, c: usize) -> Result<BigRational> {
    let (phi1, t, interior) = ensemble_terms(p, n, c)?;
    let half = ratio(1, 2);
    let total = binom(n, c);
    let mut q = BigRational::zero();
    for i in 1..=c {
        for j in i..=(n + i - c) {
            let placement = binom(j - 1, i - 1) * binom(n - j, c - i) / &total;
            let passing = pow(&t, i - 1) * pow(&half, j - i);
            let decide = if j < n { interior.clone() } else { phi1.clone() };
            q += placement * passing * decide;
        }
    }
    Ok(q)
}

#[derive(Debug, Clone)]
pub struct McEstimate {
    pub mean: f64,
    /// `None` for a single sample.
    pub stderr: Option<f64>,
    pub samples: u64,
    /// Exact mean of the sampled `q_c` values.
    pub exact_mean: BigRational,
}

/// Averages exact `q_c` over `samples` functions drawn from `spec`.
/// Sample `i` uses `substream(seed, i)`, so the estimate is identical for any `workers`.
pub fn monte_carlo_ensemble_qc(
    spec: &EnsembleSpec,
    c: usize,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<McEstimate> {
    spec.validate()?;
    check_c(spec.n, c)?;
    if samples == 0 {
        return Err(domain("samples must be at least 1"));
    }
    let total = evaluations(spec.p, spec.n, c).unwrap_or(u64::MAX);
    if total > MAX_SENSITIVITY_EVALUATIONS {
        return Err(Error::Capacity {
            guard: "MAX_SENSITIVITY_EVALUATIONS",
            detail: format!("n={} is too large for exact per-sample sensitivities", spec.n),
        });
    }
    let constrained = spec.layers.is_some() || spec.composition.is_some();
    let draw: Box<dyn Fn(u64) -> TruthTable + Sync> = if constrained {
        let s = CanonicalSampler::new(spec.clone())?;
        s.sample(&mut substream(seed, 0))?;
        Box::new(move |i| crate::canonical::build(&s.sample(&mut substream(seed, i)).expect("checked above")))
    } else {
        let s = TableSampler::new(spec.p, spec.n, spec.distribution)?;
        Box::new(move |i| s.sample(&mut substream(seed, i)))
    };
    let (sum, sum_sq) = pool(workers)?.install(|| {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let (k, _) = perturbation_counts(&draw(i), c).expect("guard checked");
                (k as u128, (k as u128) * (k as u128))
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    });
    let (mean, stderr) = mean_and_stderr(sum, sum_sq, samples, total as f64);
    let exact_mean = BigRational::new(BigInt::from(sum), BigInt::from(samples as u128 * total as u128));
    debug_assert!((exact_mean.to_f64().unwrap() - mean).abs() < 1e-9);
    Ok(McEstimate { mean, stderr, samples, exact_mean })
}
