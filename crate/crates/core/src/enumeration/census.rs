use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::canonical::{build, decompose, CanonicalNcf};
use crate::error::{Error, Result};
use crate::field::PrimeModulus;
use crate::table::{permutations, table_len, TruthTable};

/// Default bound on the number of tables `p^(p^n)` a census may scan.
pub const CENSUS_TABLE_GUARD: u64 = 1 << 24;

/// Every nested canalizing function found by scanning all `p^(p^n)` tables.
#[derive(Debug, Clone)]
pub struct Census {
    pub p: u32,
    pub n: usize,
    pub tables_scanned: u64,
    /// Sorted by table.
    pub functions: Vec<(TruthTable, CanonicalNcf)>,
}

impl Census {
    pub fn count(&self) -> usize {
        self.functions.len()
    }

    /// Counts keyed by `(layer number, last layer has one variable)`.
    pub fn by_stratum(&self) -> BTreeMap<(usize, bool), u64> {
        let mut out = BTreeMap::new();
        for (_, c) in &self.functions {
            let sizes = c.layer_sizes();
            *out.entry((sizes.len(), sizes[sizes.len() - 1] == 1)).or_insert(0) += 1;
        }
        out
    }

    pub fn by_composition(&self) -> BTreeMap<Vec<usize>, u64> {
        let mut out = BTreeMap::new();
        for (_, c) in &self.functions {
            *out.entry(c.layer_sizes()).or_insert(0) += 1;
        }
        out
    }
}

fn guarded_table_count(p: PrimeModulus, n: usize, guard: u64) -> Result<(usize, u64)> {
    let len = table_len(p, n)?;
    let total = (p.get() as u64)
        .checked_pow(len as u32)
        .filter(|&t| t <= guard)
        .ok_or_else(|| Error::Capacity {
            guard: "CENSUS_TABLE_GUARD",
            detail: format!("{}^{len} tables exceed {guard}", p.get()),
        })?;
    Ok((len, total))
}

/// Scans every table over `(p, n)` and keeps the nested canalizing ones.
pub fn census(p: PrimeModulus, n: usize) -> Result<Census> {
    census_with_guard(p, n, CENSUS_TABLE_GUARD)
}

pub fn census_with_guard(p: PrimeModulus, n: usize, guard: u64) -> Result<Census> {
    if n < 2 {
        return Err(crate::error::domain("census needs n >= 2"));
    }
    let (len, total) = guarded_table_count(p, n, guard)?;
    let pv = p.get() as u64;
    let mut functions: Vec<(TruthTable, CanonicalNcf)> = (0..total)
        .into_par_iter()
        .filter_map(|code| {
            let mut c = code;
            let values: Vec<u32> = (0..len)
                .map(|_| {
                    let v = (c % pv) as u32;
                    c /= pv;
                    v
                })
                .collect();
            let t = TruthTable::new(p, n, values).ok()?;
            if !(0..n).all(|v| t.is_essential(v)) {
                return None;
            }
            decompose(&t).ok().flatten().map(|form| (t, form))
        })
        .collect();
    functions.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Census { p: p.get(), n, tables_scanned: total, functions })
}

/// Orbits of nested canalizing functions under permutation of variables.
#[derive(Debug, Clone)]
pub struct OrbitCensus {
    pub p: u32,
    pub n: usize,
    pub orbit_count: usize,
    /// Lexicographically least table of each orbit, sorted.
    pub representatives: Vec<TruthTable>,
    /// Orbit size for each representative.
    pub orbit_sizes: Vec<usize>,
}

fn orbit_minimum(t: &TruthTable, perms: &[Vec<usize>]) -> TruthTable {
    perms
        .iter()
        .map(|perm| t.permute_variables(perm).expect("valid permutation"))
        .min()
        .expect("at least the identity")
}

fn group_orbits(p: u32, n: usize, tables: impl ParallelIterator<Item = TruthTable>) -> OrbitCensus {
    let perms = permutations(n);
    let mins: Vec<TruthTable> = tables.map(|t| orbit_minimum(&t, &perms)).collect();
    let mut sizes: HashMap<TruthTable, usize> = HashMap::new();
    for m in mins {
        *sizes.entry(m).or_insert(0) += 1;
    }
    let mut reps: Vec<(TruthTable, usize)> = sizes.into_iter().collect();
    reps.sort();
    OrbitCensus {
        p,
        n,
        orbit_count: reps.len(),
        orbit_sizes: reps.iter().map(|r| r.1).collect(),
        representatives: reps.into_iter().map(|r| r.0).collect(),
    }
}

/// Orbit census over the exhaustive table scan.
pub fn census_orbits(p: PrimeModulus, n: usize) -> Result<OrbitCensus> {
    let c = census(p, n)?;
    Ok(group_orbits(p.get(), n, c.functions.into_par_iter().map(|(t, _)| t)))
}

/// Orbit census over all canonical forms; reaches sizes the table scan cannot.
pub fn orbits_of_forms(p: PrimeModulus, n: usize) -> Result<OrbitCensus> {
    let forms = super::all_canonical_forms(p, n)?;
    Ok(group_orbits(p.get(), n, forms.into_par_iter().map(|c| build(&c))))
}
