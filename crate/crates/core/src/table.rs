//! Complete function tables `F_p^n -> F_p`.
//!
//! Points are indexed with `x_0` most significant:
//! `index(x) = sum_i x_i * p^(n-1-i)`.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::field::PrimeModulus;

/// Upper bound on `p^n` accepted when materializing a table.
pub const MAX_TABLE_LEN: usize = 1 << 26;

/// Largest arity for which permutation searches are attempted (`10!`).
pub const MAX_PERMUTATION_ARITY: usize = 10;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TruthTable {
    p: PrimeModulus,
    n: usize,
    values: Vec<u32>,
}

/// `f(x) = b` whenever `x_var = input`, and `f` is not identically `b` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanalizingTriple {
    pub var: usize,
    pub input: u32,
    pub output: u32,
}

pub(crate) fn table_len(p: PrimeModulus, n: usize) -> Result<usize> {
    let mut len = 1usize;
    for _ in 0..n {
        len = len
            .checked_mul(p.as_usize())
            .filter(|&l| l <= MAX_TABLE_LEN)
            .ok_or_else(|| Error::Capacity {
                guard: "MAX_TABLE_LEN",
                detail: format!("{}^{n} entries exceed {MAX_TABLE_LEN}", p.get()),
            })?;
    }
    Ok(len)
}

impl TruthTable {
    pub fn new(p: PrimeModulus, n: usize, values: Vec<u32>) -> Result<Self> {
        let len = table_len(p, n)?;
        if values.len() != len {
            return Err(domain(format!(
                "table for p={}, n={n} needs {len} entries, got {}",
                p.get(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= p.get()) {
            return Err(domain(format!("table entry {v} is not in F_{}", p.get())));
        }
        Ok(Self { p, n, values })
    }

    pub fn constant(p: PrimeModulus, n: usize, value: u32) -> Result<Self> {
        p.check_value(value)?;
        Ok(Self { p, n, values: vec![value; table_len(p, n)?] })
    }

    /// Tabulates `f` at every point, in index order.
    pub fn from_fn(p: PrimeModulus, n: usize, mut f: impl FnMut(&[u32]) -> u32) -> Result<Self> {
        let len = table_len(p, n)?;
        let mut values = Vec::with_capacity(len);
        let mut x = vec![0u32; n];
        for _ in 0..len {
            values.push(f(&x) % p.get());
            increment(&mut x, p.get());
        }
        Ok(Self { p, n, values })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u32> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, x: &[u32]) -> Result<usize> {
        if x.len() != self.n {
            return Err(domain(format!("point has {} coordinates, expected {}", x.len(), self.n)));
        }
        let mut idx = 0usize;
        for &xi in x {
            self.p.check_value(xi)?;
            idx = idx * self.p.as_usize() + xi as usize;
        }
        Ok(idx)
    }

    pub fn point_of(&self, mut index: usize) -> Vec<u32> {
        let p = self.p.as_usize();
        let mut x = vec![0u32; self.n];
        for slot in x.iter_mut().rev() {
            *slot = (index % p) as u32;
            index /= p;
        }
        x
    }

    pub fn evaluate(&self, x: &[u32]) -> Result<u32> {
        Ok(self.values[self.index_of(x)?])
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, x: &[u32]) -> u32 {
        let p = self.p.as_usize();
        let idx = x.iter().fold(0usize, |acc, &xi| acc * p + xi as usize);
        self.values[idx]
    }

    /// Index stride of variable `var`.
    pub(crate) fn stride(&self, var: usize) -> usize {
        self.p.as_usize().pow((self.n - 1 - var) as u32)
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Whether changing `x_var` alone can change the output somewhere.
    pub fn is_essential(&self, var: usize) -> bool {
        let p = self.p.as_usize();
        let stride = self.stride(var);
        let block = stride * p;
        self.values.chunks(block).any(|chunk| {
            (0..stride).any(|lo| (1..p).any(|a| chunk[lo + a * stride] != chunk[lo]))
        })
    }

    pub fn essential_variables(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.is_essential(i)).collect()
    }

    /// Restriction `x_var = a`, as a table over the remaining `n-1` variables.
    pub fn restrict(&self, var: usize, a: u32) -> Result<TruthTable> {
        if var >= self.n {
            return Err(domain(format!("variable {var} out of range for arity {}", self.n)));
        }
        self.p.check_value(a)?;
        let p = self.p.as_usize();
        let stride = self.stride(var);
        let values = self
            .values
            .chunks(stride * p)
            .flat_map(|chunk| &chunk[a as usize * stride..(a as usize + 1) * stride])
            .copied()
            .collect();
        Ok(TruthTable { p: self.p, n: self.n - 1, values })
    }

    /// The common value of `f` on the slice `x_var = a`, if that slice is constant.
    pub(crate) fn slice_constant(&self, var: usize, a: u32) -> Option<u32> {
        let p = self.p.as_usize();
        let stride = self.stride(var);
        let mut it = self
            .values
            .chunks(stride * p)
            .flat_map(|chunk| &chunk[a as usize * stride..(a as usize + 1) * stride]);
        let first = *it.next()?;
        it.all(|&v| v == first).then_some(first)
    }

    /// All `<i:a:b>` triples, ordered by `(i, a)`.
    pub fn canalizing_triples(&self) -> Vec<CanalizingTriple> {
        let mut out = Vec::new();
        for var in 0..self.n {
            for a in 0..self.p.get() {
                let Some(b) = self.slice_constant(var, a) else { continue };
                let residual_hits_other = (0..self.p.get())
                    .filter(|&other| other != a)
                    .any(|other| self.slice_constant(var, other) != Some(b));
                if residual_hits_other {
                    out.push(CanalizingTriple { var, input: a, output: b });
                }
            }
        }
        out
    }

    /// `g(x_0, ..., x_{n-1}) = f(x_{perm[0]}, ..., x_{perm[n-1]})`.
    pub fn permute_variables(&self, perm: &[usize]) -> Result<TruthTable> {
        check_permutation(perm, self.n)?;
        let mut y = vec![0u32; self.n];
        TruthTable::from_fn(self.p, self.n, |x| {
            for (slot, &src) in y.iter_mut().zip(perm) {
                *slot = x[src];
            }
            self.evaluate_unchecked(&y)
        })
    }

    /// Drops inessential variables; returns the reduced table and the kept original indices.
    pub fn drop_inessential(&self) -> (TruthTable, Vec<usize>) {
        let keep = self.essential_variables();
        let mut table = self.clone();
        for var in (0..self.n).rev() {
            if !keep.contains(&var) {
                table = table.restrict(var, 0).expect("variable in range");
            }
        }
        (table, keep)
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable(p={}, n={}, {:?})", self.p, self.n, self.values)
    }
}

pub(crate) fn increment(x: &mut [u32], p: u32) {
    for slot in x.iter_mut().rev() {
        *slot += 1;
        if *slot < p {
            return;
        }
        *slot = 0;
    }
}

pub fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(domain(format!("permutation has length {}, expected {n}", perm.len())));
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(domain(format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// Whether `f(x) = g(x o sigma)` for some permutation `sigma`.
pub fn are_permutation_equivalent(f: &TruthTable, g: &TruthTable) -> Result<bool> {
    if f.p != g.p || f.n != g.n {
        return Err(domain("tables differ in modulus or arity"));
    }
    if f.n > MAX_PERMUTATION_ARITY {
        return Err(Error::Capacity {
            guard: "MAX_PERMUTATION_ARITY",
            detail: format!("arity {} exceeds {MAX_PERMUTATION_ARITY}", f.n),
        });
    }
    let mut fs = f.values.clone();
    let mut gs = g.values.clone();
    fs.sort_unstable();
    gs.sort_unstable();
    if fs != gs {
        return Ok(false);
    }
    for perm in permutations(f.n) {
        if &g.permute_variables(&perm)? == f {
            return Ok(true);
        }
    }
    Ok(false)
}
