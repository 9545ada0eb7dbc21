//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use mncf::enumeration::{
    approximation_error_table, census, census_orbits, count_equivalence_classes, count_ncfs, count_ncfs_egf,
    count_ncfs_recursive, stratum_counts,
};
use mncf::io::{network_to_json, rational_string};
use mncf::network::{derrida_annealed, derrida_mean_field, derrida_mean_field_ensemble, derrida_quenched};
use mncf::sampler::{sample_network, substream, CanonicalSampler};
use mncf::sensitivity::{brute_force_qc, ensemble_qc_direct_sum, ensemble_qc_formula, monte_carlo_ensemble_qc};
use mncf::{
    build, decompose, from_definition, DefinitionParams, Distribution, EnsembleSpec, InDegree, Network, NetworkSpec,
    Node, PrimeModulus, TruthTable,
};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn pm(p: u32) -> PrimeModulus {
    PrimeModulus::new(p).unwrap()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn exact_counts() -> Outcome {
    let start = Instant::now();
    let expected: [(u32, usize, u64); 6] =
        [(3, 2, 192), (3, 3, 5568), (3, 4, 219468), (5, 2, 5120), (5, 3, 547840), (5, 4, 78561280)];
    let mut bad = Vec::new();
    for (p, n, want) in expected {
        let got = count_ncfs(pm(p), n).unwrap();
        if got != BigUint::from(want) {
            bad.push(format!("(p={p}, n={n}) gave {got}, expected {want}"));
        }
    }
    within(Duration::from_secs(1), start)?;
    if bad.is_empty() {
        Ok("all six counts match".into())
    } else {
        Err(bad.join("; "))
    }
}

fn triple_agreement() -> Outcome {
    let start = Instant::now();
    for p in [2, 3, 5, 7] {
        for n in 2..=25 {
            let closed = count_ncfs(pm(p), n).unwrap();
            let rec = count_ncfs_recursive(pm(p), n).unwrap();
            let egf = count_ncfs_egf(pm(p), n).unwrap();
            if closed != rec || closed != egf {
                return Err(format!("(p={p}, n={n}): closed {closed}, recursive {rec}, series {egf}"));
            }
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("p in {{2,3,5,7}}, n = 2..25 in {:?}", start.elapsed()))
}

fn census_oracle() -> Outcome {
    let start = Instant::now();
    for (p, n, want) in [(2, 2, 8usize), (2, 3, 64), (2, 4, 736), (3, 2, 192)] {
        let c = census(pm(p), n).unwrap();
        if c.count() != want {
            return Err(format!("census (p={p}, n={n}) found {}, expected {want}", c.count()));
        }
        let strata = c.by_stratum();
        for s in stratum_counts(pm(p), n).unwrap() {
            let found = strata.get(&(s.layers, s.single_last)).copied().unwrap_or(0);
            if BigUint::from(found) != s.count {
                return Err(format!(
                    "(p={p}, n={n}) stratum r={} single_last={}: census {found}, summand {}",
                    s.layers, s.single_last, s.count
                ));
            }
        }
    }
    within(Duration::from_secs(120), start)?;
    Ok("8, 64, 736, 192 with matching strata".into())
}

fn asymptotics() -> Outcome {
    let start = Instant::now();
    let dir = option_env!("CARGO_TARGET_TMPDIR").map_or_else(|| std::env::temp_dir().display().to_string(), String::from);
    let mut notes = Vec::new();
    for p in [2u32, 5] {
        let rows = approximation_error_table(pm(p), 80).unwrap();
        let mut csv = String::from("n,exact,approx,rel_error\n");
        for r in &rows {
            csv.push_str(&format!("{},{},{},{:e}\n", r.n, r.exact, r.approx, r.rel_error()));
        }
        if rows.len() != 79 {
            return Err(format!("p={p}: {} rows", rows.len()));
        }
        let path = std::path::Path::new(&dir).join(format!("approx_p{p}.csv"));
        std::fs::write(&path, csv).map_err(|e| e.to_string())?;
        notes.push(path.display().to_string());
        let at = |n: usize| rows[n - 2].rel_error();
        if at(40) >= 1e-9 {
            return Err(format!("p={p}, n=40: {}", at(40)));
        }
        if p == 2 {
            // "about 7.8%" read to one decimal place of a percent; the frozen
            // reference pins the exact value
            if (at(2) - 0.078).abs() >= 0.001 || (at(2) - 0.0785882738487).abs() > 1e-12 {
                return Err(format!("p=2, n=2: {}", at(2)));
            }
            if at(10) >= 1e-3 {
                return Err(format!("p=2, n=10: {}", at(10)));
            }
        }
    }
    let rows = approximation_error_table(pm(2), 2).unwrap();
    Ok(format!("rel error at (2,2) = {:.5}; CSVs {}", rows[0].rel_error(), notes.join(", ")))
        .and_then(|s| within(Duration::from_secs(60), start).map(|_| s))
}

fn ensemble_mean(p: u32, n: usize, c: usize) -> BigRational {
    let all: Vec<_> = DefinitionParams::enumerate_all(pm(p), n).collect();
    let sum: BigRational = all.iter().map(|d| brute_force_qc(&from_definition(d), c).unwrap()).sum();
    sum / BigInt::from(all.len())
}

fn sensitivity_exactness() -> Outcome {
    let start = Instant::now();
    for p in [2, 3, 5] {
        for n in 1..=8 {
            for c in 1..=n {
                let a = ensemble_qc_formula(pm(p), n, c).unwrap();
                let b = ensemble_qc_direct_sum(pm(p), n, c).unwrap();
                if a != b {
                    return Err(format!("(p={p}, n={n}, c={c}): {} vs {}", rational_string(&a), rational_string(&b)));
                }
            }
        }
    }
    let mut shown = Vec::new();
    for (p, n) in [(2, 2), (2, 3), (3, 2)] {
        for c in 1..=n {
            let oracle = ensemble_mean(p, n, c);
            let formula = ensemble_qc_formula(pm(p), n, c).unwrap();
            if oracle != formula {
                return Err(format!("(p={p}, n={n}, c={c}) oracle {} formula {}", rational_string(&oracle), rational_string(&formula)));
            }
            shown.push(rational_string(&formula));
        }
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("exhaustive means {}", shown.join(" ")))
}

fn sensitivity_statistics() -> Outcome {
    let start = Instant::now();
    let spec = EnsembleSpec::new(pm(3), 4, Distribution::ParameterUniform);
    let mut z = Vec::new();
    for c in 1..=4 {
        let est = monte_carlo_ensemble_qc(&spec, c, 10_000, 0, 4).unwrap();
        let q = ensemble_qc_formula(pm(3), 4, c).unwrap().to_f64().unwrap();
        let se = est.stderr.unwrap();
        let score = (est.mean - q) / se;
        if score.abs() > 3.0 {
            return Err(format!("c={c}: mean {} formula {q} stderr {se}", est.mean));
        }
        z.push(format!("{score:+.2}"));
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("z-scores {}", z.join(" ")))
}

fn ring(p: u32, size: usize, f: impl Fn(&[u32]) -> u32 + Copy) -> Network {
    let nodes = (0..size)
        .map(|i| Node { inputs: vec![(i + 1) % size], table: TruthTable::from_fn(pm(p), 1, f).unwrap() })
        .collect();
    Network::new(pm(p), nodes).unwrap()
}

fn derrida_consistency() -> Outcome {
    let ms = [1, 5, 10, 25, 50];
    let mut worst = 0.0f64;
    for p in [2u32, 3] {
        let spec = NetworkSpec::new(50, pm(p), InDegree::Constant(3), Distribution::ParameterUniform);
        let mc = derrida_annealed(&spec, &ms, 10_000, 0, 4).unwrap();
        let mf = derrida_mean_field_ensemble(&spec, &ms).unwrap();
        for (a, b) in mc.points.iter().zip(&mf.points) {
            let se = a.stderr.unwrap();
            let score = (a.d - b.d) / se;
            if score.abs() > 3.0 {
                return Err(format!("p={p}, m={}: MC {} mean field {} stderr {se}", a.m, a.d, b.d));
            }
            worst = worst.max(score.abs());
        }
        let constant = ring(p, 50, |_| 0);
        let identity = ring(p, 50, |x| x[0]);
        for (net, name) in [(&constant, "constant"), (&identity, "identity")] {
            let mc = derrida_quenched(net, &ms, 1000, 0, 2).unwrap();
            let mf = derrida_mean_field(net, &ms).unwrap();
            for (a, b) in mc.points.iter().zip(&mf.points) {
                let want = if name == "constant" { 0.0 } else { a.m as f64 };
                if a.d != want || (b.d - want).abs() > 1e-12 {
                    return Err(format!("{name} p={p} m={}: MC {} mean field {}", a.m, a.d, b.d));
                }
            }
        }
    }
    Ok(format!("largest |z| = {worst:.2}; degenerate networks exact"))
}

fn round_trips() -> Outcome {
    for (p, n) in [(2, 4), (3, 3), (5, 3)] {
        let sampler = CanonicalSampler::new(EnsembleSpec::new(pm(p), n, Distribution::FunctionUniform)).unwrap();
        let mut rng = substream(0, (p as u64) << 8 | n as u64);
        for i in 0..10_000 {
            let c = sampler.sample(&mut rng).unwrap();
            if decompose(&build(&c)).unwrap().as_ref() != Some(&c) {
                return Err(format!("(p={p}, n={n}) draw {i} did not round-trip"));
            }
        }
    }
    for (f, c) in &census(pm(3), 2).unwrap().functions {
        let back = decompose(f).unwrap().ok_or("census function not recognized")?;
        if &back != c || &build(&back) != f {
            return Err("census function did not round-trip".into());
        }
    }
    Ok("3 x 10^4 draws and 192 census functions".into())
}

fn equivalence_classes() -> Outcome {
    let expected = [(3, [144u64, 1728, 20736]), (5, [3200, 128000, 5120000])];
    for (p, wants) in expected {
        for (n, want) in (2..).zip(wants) {
            let got = count_equivalence_classes(pm(p), n).unwrap();
            if got != BigUint::from(want) {
                return Err(format!("(p={p}, n={n}): {got} vs {want}"));
            }
        }
    }
    let mut cmp = Vec::new();
    for p in [2, 3] {
        let orbits = census_orbits(pm(p), 2).unwrap();
        let formula = count_equivalence_classes(pm(p), 2).unwrap();
        cmp.push(format!("p={p}: orbits {} vs formula {formula}", orbits.orbit_count));
    }
    Ok(format!("class counts exact; {}", cmp.join(", ")))
}

fn determinism() -> Outcome {
    let spec = EnsembleSpec::new(pm(3), 3, Distribution::ParameterUniform);
    let a = monte_carlo_ensemble_qc(&spec, 2, 500, 9, 1).unwrap();
    let b = monte_carlo_ensemble_qc(&spec, 2, 500, 9, 4).unwrap();
    let c = monte_carlo_ensemble_qc(&spec, 2, 500, 9, 1).unwrap();
    if a.exact_mean != b.exact_mean || a.exact_mean != c.exact_mean || a.stderr != c.stderr {
        return Err("sensitivity estimate changed between runs".into());
    }
    let net_spec = NetworkSpec::new(12, pm(3), InDegree::Constant(2), Distribution::FunctionUniform);
    let n1 = network_to_json(&sample_network(&net_spec, &mut substream(9, 0)).unwrap()).to_string();
    let n2 = network_to_json(&sample_network(&net_spec, &mut substream(9, 0)).unwrap()).to_string();
    if n1 != n2 {
        return Err("network JSON differs".into());
    }
    let d1 = format!("{:?}", derrida_annealed(&net_spec, &[1, 6], 300, 9, 1).unwrap());
    let d2 = format!("{:?}", derrida_annealed(&net_spec, &[1, 6], 300, 9, 3).unwrap());
    if d1 != d2 {
        return Err("Derrida curve differs".into());
    }
    Ok("repeated seeded runs identical".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact counts", exact_counts),
        ("counting methods agree", triple_agreement),
        ("census oracle", census_oracle),
        ("asymptotic error table", asymptotics),
        ("sensitivity exactness", sensitivity_exactness),
        ("sensitivity statistics", sensitivity_statistics),
        ("Derrida consistency", derrida_consistency),
        ("canonical round trip", round_trips),
        ("equivalence classes", equivalence_classes),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {:>2} {name} [{took:.2}s]: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{took:.2}s]: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
