use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use mncf::enumeration::{
    approximation_error_table, census as run_census, census_orbits, count_equivalence_classes, count_ncfs,
    count_ncfs_egf, count_ncfs_recursive, stratum_counts,
};
use mncf::io::{canonical_to_json, function_from_json, network_from_json, network_to_json, rational_string, table_to_json};
use mncf::network::{
    attractors as find_attractors, derrida_mean_field, derrida_mean_field_ensemble, derrida_monte_carlo, ensemble_profile,
    DerridaCurve, DerridaSource, Estimator,
};
use mncf::sampler::{sample_network, sample_table, substream, CanonicalSampler, RNG_NAME};
use mncf::sensitivity::{brute_force_qc, monte_carlo_ensemble_qc, SensitivityProfile};
use mncf::{
    decompose, from_definition, DefinitionParams, Distribution, EnsembleSpec, Error, InDegree, Network, NetworkSpec,
    PrimeModulus, TruthTable,
};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::output::{emit, emit_json, json_only, opt_f64, read_json, usage, CliError, CliResult};
use crate::{CountMethodArg, DistArg, EstimatorArg, Format, NetworkArgs, Out, Rng};

/// Largest parameter-tuple enumeration attempted by `sensitivity --oracle`.
const ORACLE_TUPLE_GUARD: u64 = 2_000_000;

fn prime(p: u32) -> CliResult<PrimeModulus> {
    Ok(PrimeModulus::new(p)?)
}

fn distribution(d: DistArg) -> Distribution {
    match d {
        DistArg::Parameter => Distribution::ParameterUniform,
        DistArg::Function => Distribution::FunctionUniform,
    }
}

fn dist_name(d: Distribution) -> &'static str {
    match d {
        Distribution::ParameterUniform => "parameter",
        Distribution::FunctionUniform => "function",
    }
}

pub fn count(p: u32, n: usize, method: CountMethodArg, out: &Out) -> CliResult {
    let pm = prime(p)?;
    let methods: Vec<(&str, _)> = match method {
        CountMethodArg::Closed => vec![("closed", count_ncfs(pm, n)?)],
        CountMethodArg::Recursive => vec![("recursive", count_ncfs_recursive(pm, n)?)],
        CountMethodArg::Egf => vec![("egf", count_ncfs_egf(pm, n)?)],
        CountMethodArg::Census => vec![("census", run_census(pm, n)?.count().into())],
        CountMethodArg::All => vec![
            ("closed", count_ncfs(pm, n)?),
            ("recursive", count_ncfs_recursive(pm, n)?),
            ("egf", count_ncfs_egf(pm, n)?),
        ],
    };
    if methods.iter().any(|(_, c)| *c != methods[0].1) {
        let detail: Vec<String> = methods.iter().map(|(m, c)| format!("{m}={c}")).collect();
        return Err(CliError::Io(format!("counting methods disagree: {}", detail.join(", "))));
    }
    match out.format {
        None => emit(out, &format!("{}\n", methods[0].1)),
        Some(Format::Csv) => {
            let mut s = String::from("p,n,method,count\n");
            for (m, c) in &methods {
                writeln!(s, "{p},{n},{m},{c}").unwrap();
            }
            emit(out, &s)
        }
        Some(Format::Json) => {
            let counts: serde_json::Map<String, Value> =
                methods.iter().map(|(m, c)| (m.to_string(), Value::from(c.to_string()))).collect();
            emit_json(out, json!({"p": p, "n": n, "counts": counts}))
        }
    }
}

pub fn approx(p: u32, n_max: usize, out: &Out) -> CliResult {
    let rows = approximation_error_table(prime(p)?, n_max)?;
    match out.format {
        Some(Format::Json) => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| json!({"n": r.n, "exact": r.exact.to_string(), "approx": r.approx, "rel_error": r.rel_error()}))
                .collect();
            emit_json(out, json!({"p": p, "rows": rows}))
        }
        _ => {
            let mut s = String::from("n,exact,approx,rel_error\n");
            for r in &rows {
                writeln!(s, "{},{},{},{:e}", r.n, r.exact, r.approx, r.rel_error()).unwrap();
            }
            emit(out, &s)
        }
    }
}

pub fn classes(p: u32, n: usize, orbits: bool, out: &Out) -> CliResult {
    let pm = prime(p)?;
    let formula = count_equivalence_classes(pm, n)?;
    if !orbits && out.format.is_none() {
        return emit(out, &format!("{formula}\n"));
    }
    let orbit = census_orbits(pm, n)?;
    match out.format {
        Some(Format::Json) => emit_json(
            out,
            json!({
                "p": p,
                "n": n,
                "formula": formula.to_string(),
                "orbits": orbit.orbit_count,
                "orbit_sizes": orbit.orbit_sizes,
                "note": "orbits counts distinct functions up to variable permutation; the formula counts \
layer structures and is not an orbit count",
            }),
        ),
        _ => emit(out, &format!("p,n,formula,orbits\n{p},{n},{formula},{}\n", orbit.orbit_count)),
    }
}

pub fn census(p: u32, n: usize, list: bool, out: &Out) -> CliResult {
    let pm = prime(p)?;
    let c = run_census(pm, n)?;
    let found = c.by_stratum();
    let strata = stratum_counts(pm, n)?;
    let total_formula = count_ncfs(pm, n)?;
    match out.format {
        Some(Format::Json) => {
            let rows: Vec<Value> = strata
                .iter()
                .map(|s| {
                    json!({
                        "layers": s.layers,
                        "single_last": s.single_last,
                        "census": found.get(&(s.layers, s.single_last)).copied().unwrap_or(0),
                        "formula": s.count.to_string(),
                    })
                })
                .collect();
            let mut body = json!({
                "p": p,
                "n": n,
                "tables_scanned": c.tables_scanned,
                "total": c.count(),
                "formula_total": total_formula.to_string(),
                "strata": rows,
            });
            if list {
                body["functions"] = c
                    .functions
                    .iter()
                    .map(|(t, f)| json!({"table": t.values(), "canonical": canonical_to_json(f)}))
                    .collect();
            }
            emit_json(out, body)
        }
        _ => {
            let mut s = String::from("layers,single_last,census,formula\n");
            for st in &strata {
                let got = found.get(&(st.layers, st.single_last)).copied().unwrap_or(0);
                writeln!(s, "{},{},{got},{}", st.layers, st.single_last, st.count).unwrap();
            }
            writeln!(s, "total,,{},{total_formula}", c.count()).unwrap();
            emit(out, &s)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn generate(
    p: u32,
    n: usize,
    dist: DistArg,
    layers: Option<usize>,
    composition: Option<Vec<usize>>,
    count: usize,
    rng: Rng,
    out: &Out,
) -> CliResult {
    json_only(out, "generate")?;
    let mut spec = EnsembleSpec::new(prime(p)?, n, distribution(dist));
    spec.layers = layers;
    spec.composition = composition;
    spec.validate()?;
    let sampler = if n >= 2 { Some(CanonicalSampler::new(spec.clone())?) } else { None };
    let mut functions = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let mut r = substream(rng.seed, i);
        let entry = match &sampler {
            Some(s) => {
                let c = s.sample(&mut r)?;
                json!({"canonical": canonical_to_json(&c), "table": table_to_json(&mncf::build(&c))})
            }
            None => json!({"canonical": Value::Null, "table": table_to_json(&sample_table(&spec, &mut r)?)}),
        };
        functions.push(entry);
    }
    emit_json(
        out,
        json!({
            "rng": RNG_NAME,
            "seed": rng.seed,
            "distribution": dist_name(spec.distribution),
            "functions": functions,
        }),
    )
}

fn network_spec(p: u32, args: &NetworkArgs) -> CliResult<NetworkSpec> {
    let nodes = args.nodes.ok_or_else(|| usage("--nodes is required"))?;
    let indegree = match (&args.indegree, &args.indegrees) {
        (Some(k), None) => InDegree::Constant(*k),
        (None, Some(ks)) => InDegree::PerNode(ks.clone()),
        _ => return Err(usage("give exactly one of --indegree or --indegrees")),
    };
    let mut spec = NetworkSpec::new(nodes, prime(p)?, indegree, distribution(args.distribution));
    spec.allow_self_inputs = args.allow_self_inputs;
    spec.validate()?;
    Ok(spec)
}

pub fn gen_network(p: u32, args: &NetworkArgs, rng: Rng, out: &Out) -> CliResult {
    json_only(out, "gen-network")?;
    let spec = network_spec(p, args)?;
    let net = sample_network(&spec, &mut substream(rng.seed, 0))?;
    emit_json(out, network_to_json(&net))
}

fn exact_profile_json(f: &TruthTable) -> Value {
    let rows: Vec<Value> = (1..=f.arity())
        .map(|c| match brute_force_qc(f, c) {
            Ok(q) => json!({"c": c, "q": rational_string(&q), "q_float": q.to_f64()}),
            Err(e) => json!({"c": c, "error": e.to_string()}),
        })
        .collect();
    Value::from(rows)
}

pub fn analyze(input: &Path, out: &Out) -> CliResult {
    json_only(out, "analyze")?;
    let f = function_from_json(&read_json(input)?)?;
    let essential = f.essential_variables();
    let triples: Vec<Value> = f
        .canalizing_triples()
        .iter()
        .map(|t| json!({"var": t.var, "input": t.input, "output": t.output}))
        .collect();
    let (reduced, kept) = f.drop_inessential();
    let canonical = if reduced.arity() >= 2 { decompose(&reduced)? } else { None };
    let mut body = json!({
        "p": f.modulus().get(),
        "n": f.arity(),
        "essential_variables": essential,
        "canalizing_triples": triples,
        "nested_canalizing": canonical.is_some() && kept.len() == f.arity(),
        "canonical": canonical.as_ref().map(canonical_to_json),
        "sensitivity": exact_profile_json(&f),
    });
    if let Some(c) = &canonical {
        body["layer_number"] = c.layer_number().into();
        body["layer_sizes"] = json!(c.layer_sizes());
        body["layer_outputs"] = json!(c.layer_outputs());
        if kept.len() != f.arity() {
            // the canonical form is over the essential variables only
            body["canonical_variables"] = json!(kept);
        }
    }
    emit_json(out, body)
}

pub fn sensitivity_of_function(input: &Path, out: &Out) -> CliResult {
    let f = function_from_json(&read_json(input)?)?;
    let prof = SensitivityProfile::of(&f)?;
    match out.format {
        Some(Format::Json) => emit_json(
            out,
            json!({"p": prof.p, "n": prof.n, "estimator": "brute-force", "rows": exact_profile_json(&f)}),
        ),
        _ => {
            let mut s = String::from("c,q_exact,q\n");
            for (c, q) in (1..).zip(&prof.q) {
                writeln!(s, "{c},{},{}", rational_string(q), q.to_f64().unwrap_or(f64::NAN)).unwrap();
            }
            emit(out, &s)
        }
    }
}

fn oracle_means(p: PrimeModulus, n: usize) -> CliResult<Vec<BigRational>> {
    let segs = 2 * (p.get() as u64 - 1);
    let tuples = (1..=n as u64)
        .try_fold(1u64, |acc, k| acc.checked_mul(k * segs * p.get() as u64))
        .and_then(|t| t.checked_mul(p.get() as u64 - 1))
        .filter(|&t| t <= ORACLE_TUPLE_GUARD)
        .ok_or_else(|| {
            CliError::Core(Error::Capacity {
                guard: "ORACLE_TUPLE_GUARD",
                detail: format!("parameter tuples for p={}, n={n} exceed {ORACLE_TUPLE_GUARD}", p.get()),
            })
        })?;
    let tables: Vec<TruthTable> = DefinitionParams::enumerate_all(p, n).map(|d| from_definition(&d)).collect();
    debug_assert_eq!(tables.len() as u64, tuples);
    (1..=n)
        .map(|c| {
            let sum: BigRational =
                tables.iter().map(|t| brute_force_qc(t, c)).collect::<Result<Vec<_>, _>>()?.into_iter().sum();
            Ok(sum / BigRational::from_integer(tables.len().into()))
        })
        .collect()
}

pub fn sensitivity(
    p: u32,
    n: usize,
    samples: Option<u64>,
    dist: DistArg,
    oracle: bool,
    rng: Rng,
    out: &Out,
) -> CliResult {
    let pm = prime(p)?;
    let d = distribution(dist);
    let reference = ensemble_profile(pm, n, d)?;
    let oracle = if oracle {
        if d != Distribution::ParameterUniform {
            return Err(usage("--oracle averages the parameter ensemble; use --distribution parameter"));
        }
        Some(oracle_means(pm, n)?)
    } else {
        None
    };
    let spec = EnsembleSpec::new(pm, n, d);
    let mc = match samples {
        Some(s) => Some((1..=n).map(|c| monte_carlo_ensemble_qc(&spec, c, s, rng.seed, rng.workers)).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    match out.format {
        Some(Format::Json) => {
            let rows: Vec<Value> = (1..=n)
                .map(|c| {
                    let q = &reference[c];
                    let mut row = json!({"c": c, "q_formula": rational_string(q), "q_formula_float": q.to_f64()});
                    if let Some(o) = &oracle {
                        row["q_oracle"] = rational_string(&o[c - 1]).into();
                    }
                    if let Some(m) = &mc {
                        let e = &m[c - 1];
                        row["q_mc"] = e.mean.into();
                        row["q_mc_exact"] = rational_string(&e.exact_mean).into();
                        row["stderr"] = json!(e.stderr);
                    }
                    row
                })
                .collect();
            emit_json(
                out,
                json!({
                    "p": p,
                    "n": n,
                    "distribution": dist_name(d),
                    "seed": rng.seed,
                    "samples": samples,
                    "rng": RNG_NAME,
                    "rows": rows,
                }),
            )
        }
        _ => {
            let mut s = String::from("c,q_formula,q_mc,stderr,samples\n");
            for c in 1..=n {
                let q = reference[c].to_f64().unwrap_or(f64::NAN);
                let (mean, se) = match &mc {
                    Some(m) => (Some(m[c - 1].mean), m[c - 1].stderr),
                    None => (None, None),
                };
                let count = samples.map(|s| s.to_string()).unwrap_or_default();
                writeln!(s, "{c},{q},{},{},{count}", opt_f64(mean), opt_f64(se)).unwrap();
            }
            emit(out, &s)
        }
    }
}

fn estimator_name(e: Estimator) -> &'static str {
    match e {
        Estimator::MonteCarlo => "monte-carlo",
        Estimator::MeanField => "mean-field",
    }
}

fn curve_json(c: &DerridaCurve) -> Value {
    let points: Vec<Value> = c
        .points
        .iter()
        .map(|pt| json!({"m": pt.m, "D": pt.d, "stderr": pt.stderr, "samples": pt.samples}))
        .collect();
    json!({
        "estimator": estimator_name(c.estimator),
        "mode": format!("{:?}", c.mode).to_lowercase(),
        "seed": c.seed,
        "approximated_nodes": c.approximated_nodes,
        "points": points,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn derrida(
    network: Option<&Path>,
    p: Option<u32>,
    args: &NetworkArgs,
    m: Option<Vec<usize>>,
    samples: u64,
    estimator: EstimatorArg,
    rng: Rng,
    out: &Out,
) -> CliResult {
    let fixed: Option<Network> = network.map(|path| Ok::<_, CliError>(network_from_json(&read_json(path)?)?)).transpose()?;
    let spec = match &fixed {
        Some(net) => {
            if p.is_some_and(|p| p != net.modulus().get()) {
                return Err(usage("--p disagrees with the network file"));
            }
            None
        }
        None => Some(network_spec(p.ok_or_else(|| usage("--p is required without --network"))?, args)?),
    };
    let size = fixed.as_ref().map_or_else(|| spec.as_ref().unwrap().nodes, Network::len);
    let prime_value = fixed.as_ref().map_or_else(|| spec.as_ref().unwrap().p.get(), |n| n.modulus().get());
    let ms = m.unwrap_or_else(|| (1..=size).collect());
    let mut curves = Vec::new();
    if matches!(estimator, EstimatorArg::Mc | EstimatorArg::Both) {
        let source = match (&fixed, &spec) {
            (Some(net), _) => DerridaSource::Quenched(net),
            (None, Some(s)) => DerridaSource::Annealed(s),
            _ => unreachable!(),
        };
        curves.push(derrida_monte_carlo(source, &ms, samples, rng.seed, rng.workers)?);
    }
    if matches!(estimator, EstimatorArg::MeanField | EstimatorArg::Both) {
        curves.push(match (&fixed, &spec) {
            (Some(net), _) => derrida_mean_field(net, &ms)?,
            (None, Some(s)) => derrida_mean_field_ensemble(s, &ms)?,
            _ => unreachable!(),
        });
    }
    match out.format {
        Some(Format::Json) => emit_json(
            out,
            json!({
                "p": prime_value,
                "nodes": size,
                "rng": RNG_NAME,
                "curves": curves.iter().map(curve_json).collect::<Vec<_>>(),
            }),
        ),
        _ => {
            let mut s = String::from("m,D,stderr,samples,estimator\n");
            for c in &curves {
                for pt in &c.points {
                    let count = pt.samples.map(|s| s.to_string()).unwrap_or_default();
                    writeln!(s, "{},{},{},{count},{}", pt.m, pt.d, opt_f64(pt.stderr), estimator_name(c.estimator))
                        .unwrap();
                }
            }
            emit(out, &s)
        }
    }
}

pub fn attractors(network: &Path, state_cap: u64, out: &Out) -> CliResult {
    let net = network_from_json(&read_json(network)?)?;
    let found = find_attractors(&net, state_cap)?;
    match out.format {
        Some(Format::Csv) => {
            let mut s = String::from("attractor,period,basin_size,states\n");
            for (i, a) in found.iter().enumerate() {
                let states: Vec<String> = a
                    .cycle
                    .iter()
                    .map(|&st| net.decode_state(st).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(""))
                    .collect();
                writeln!(s, "{i},{},{},{}", a.period(), a.basin_size, states.join(";")).unwrap();
            }
            emit(out, &s)
        }
        _ => {
            let list: Vec<Value> = found
                .iter()
                .map(|a| {
                    let states: Vec<Vec<u32>> = a.cycle.iter().map(|&st| net.decode_state(st)).collect();
                    json!({"period": a.period(), "basin_size": a.basin_size, "states": states})
                })
                .collect();
            let mut periods: BTreeMap<usize, usize> = BTreeMap::new();
            for a in &found {
                *periods.entry(a.period()).or_default() += 1;
            }
            emit_json(
                out,
                json!({
                    "p": net.modulus().get(),
                    "nodes": net.len(),
                    "attractor_count": found.len(),
                    "periods": periods.iter().map(|(k, v)| json!({"period": k, "count": v})).collect::<Vec<_>>(),
                    "attractors": list,
                }),
            )
        }
    }
}
