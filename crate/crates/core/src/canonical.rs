//! The unique layered polynomial form of a nested canalizing function.
//!
//! `f = M_1(M_2(...(M_{r-1}(B_{r+1} M_r + B_r) + B_{r-1})...) + B_2) + B_1`
//! with `M_i` the product of `Q_S(x_j)` over the variables of layer `i`.

use crate::definition::DefinitionParams;
use crate::error::{constraint, domain, Error, Result};
use crate::field::{PrimeModulus, Segment};
use crate::table::TruthTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayerEntry {
    pub var: usize,
    pub segment: Segment,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalNcf {
    p: PrimeModulus,
    n: usize,
    layers: Vec<Vec<LayerEntry>>,
    constants: Vec<u32>,
}

impl CanonicalNcf {
    /// Validates the structural constraints. Entries inside a layer are sorted by variable.
    ///
    /// When the last layer holds a single variable its segment must contain 0: the
    /// alternative orientation `-B Q_{S^c} + (A + B)` denotes the same function.
    pub fn new(p: PrimeModulus, n: usize, mut layers: Vec<Vec<LayerEntry>>, constants: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(domain("canonical forms are defined for n >= 2"));
        }
        let r = layers.len();
        if r == 0 {
            return Err(constraint("at least one layer required"));
        }
        let mut seen = vec![false; n];
        for layer in &mut layers {
            if layer.is_empty() {
                return Err(constraint("every layer needs at least one variable"));
            }
            layer.sort();
            for e in layer.iter() {
                if e.var >= n {
                    return Err(domain(format!("variable {} out of range for arity {n}", e.var)));
                }
                if std::mem::replace(&mut seen[e.var], true) {
                    return Err(constraint(format!("variable {} appears in two layers", e.var)));
                }
                if e.segment.modulus() != p {
                    return Err(domain("segment modulus differs from the function modulus"));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(constraint(format!("variable {missing} is in no layer")));
        }
        if constants.len() != r + 1 {
            return Err(constraint(format!("{r} layers need {} constants, got {}", r + 1, constants.len())));
        }
        for &b in &constants {
            p.check_value(b)?;
        }
        if constants[1..].contains(&0) {
            return Err(constraint("constants B_2, ..., B_{r+1} must be nonzero"));
        }
        if layers[r - 1].len() == 1 {
            if (constants[r] + constants[r - 1]).is_multiple_of(p.get()) && r >= 2 {
                return Err(constraint("single-variable last layer needs B_{r+1} + B_r != 0"));
            }
            if !layers[r - 1][0].segment.contains_zero() {
                return Err(constraint("single-variable last layer must use the segment containing 0"));
            }
        }
        Ok(Self { p, n, layers, constants })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Vec<LayerEntry>] {
        &self.layers
    }

    pub fn constants(&self) -> &[u32] {
        &self.constants
    }

    pub fn layer_number(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    #[inline]
    pub fn evaluate_unchecked(&self, x: &[u32]) -> u32 {
        let p = self.p.get();
        let r = self.layers.len();
        let monomial = |layer: &[LayerEntry]| layer.iter().all(|e| !e.segment.contains(x[e.var]));
        let mut acc = if monomial(&self.layers[r - 1]) {
            (self.constants[r] + self.constants[r - 1]) % p
        } else {
            self.constants[r - 1]
        };
        for i in (0..r - 1).rev() {
            acc = if monomial(&self.layers[i]) {
                (acc + self.constants[i]) % p
            } else {
                self.constants[i]
            };
        }
        acc
    }

    pub fn evaluate(&self, x: &[u32]) -> Result<u32> {
        if x.len() != self.n {
            return Err(domain(format!("point has {} coordinates, expected {}", x.len(), self.n)));
        }
        for &xi in x {
            self.p.check_value(xi)?;
        }
        Ok(self.evaluate_unchecked(x))
    }

    /// The canalized output of each layer, followed by the output when every variable misses.
    pub fn layer_outputs(&self) -> Vec<u32> {
        let p = self.p.get();
        self.constants
            .iter()
            .scan(0u32, |acc, &b| {
                *acc = (*acc + b) % p;
                Some(*acc)
            })
            .collect()
    }

    /// Parameters of the case ladder visiting the layers in order.
    pub fn to_definition_params(&self) -> DefinitionParams {
        let outs = self.layer_outputs();
        let mut order = Vec::with_capacity(self.n);
        let mut segments = Vec::with_capacity(self.n);
        let mut outputs = Vec::with_capacity(self.n + 1);
        for (layer, &c) in self.layers.iter().zip(&outs) {
            for e in layer {
                order.push(e.var);
                segments.push(e.segment);
                outputs.push(c);
            }
        }
        outputs.push(outs[self.layers.len()]);
        DefinitionParams::new(self.p, order, segments, outputs).expect("canonical form yields valid parameters")
    }
}

/// Exact table of the polynomial form.
pub fn build(c: &CanonicalNcf) -> TruthTable {
    TruthTable::from_fn(c.p, c.n, |x| c.evaluate_unchecked(x)).expect("arity fits a table")
}

/// Recovers the canonical form of `f`, or `None` if `f` is not nested canalizing.
///
/// Requires `n >= 2` and every variable essential; use
/// [`TruthTable::drop_inessential`] first otherwise.
pub fn decompose(f: &TruthTable) -> Result<Option<CanonicalNcf>> {
    let n = f.arity();
    if n < 2 {
        return Err(Error::Precondition(format!("decompose needs n >= 2, got n = {n}")));
    }
    if let Some(v) = (0..n).find(|&v| !f.is_essential(v)) {
        return Err(Error::Precondition(format!("variable {v} is inessential")));
    }
    let p = f.modulus();
    let mut g = f.clone();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut layers: Vec<Vec<LayerEntry>> = Vec::new();
    let mut outputs: Vec<u32> = Vec::new();

    while g.arity() >= 2 {
        let mut layer: Vec<(usize, Segment)> = Vec::new();
        let mut layer_output: Option<u32> = None;
        for local in 0..g.arity() {
            let slices: Vec<Option<u32>> = (0..p.get()).map(|a| g.slice_constant(local, a)).collect();
            let Some(b) = slices.iter().flatten().next().copied() else { continue };
            if slices.iter().flatten().any(|&v| v != b) {
                return Ok(None);
            }
            let members: Vec<bool> = slices.iter().map(Option::is_some).collect();
            let Some(seg) = Segment::from_members(p, &members) else { return Ok(None) };
            if layer_output.is_some_and(|c| c != b) {
                return Ok(None);
            }
            layer_output = Some(b);
            layer.push((local, seg));
        }
        let Some(c) = layer_output else { return Ok(None) };
        outputs.push(c);
        for &(local, seg) in layer.iter().rev() {
            let outside = seg.complement();
            let a = if outside.contains_zero() { 0 } else { outside.bound() };
            g = g.restrict(local, a)?;
        }
        layers.push(
            layer
                .iter()
                .map(|&(local, segment)| LayerEntry { var: remaining[local], segment })
                .collect(),
        );
        let removed: Vec<usize> = layer.iter().map(|&(local, _)| local).collect();
        remaining = remaining
            .iter()
            .enumerate()
            .filter(|(i, _)| !removed.contains(i))
            .map(|(_, &v)| v)
            .collect();
    }

    if g.arity() == 1 {
        let vals = g.values();
        let members: Vec<bool> = vals.iter().map(|&v| v == vals[0]).collect();
        let Some(seg) = Segment::from_members(p, &members) else { return Ok(None) };
        let rest = vals[p.as_usize() - 1];
        if vals.iter().any(|&v| v != vals[0] && v != rest) {
            return Ok(None);
        }
        outputs.push(vals[0]);
        outputs.push(rest);
        layers.push(vec![LayerEntry { var: remaining[0], segment: seg }]);
    } else {
        outputs.push(g.values()[0]);
    }

    let pv = p.get();
    let mut constants = Vec::with_capacity(outputs.len());
    constants.push(outputs[0]);
    for w in outputs.windows(2) {
        constants.push((w[1] + pv - w[0]) % pv);
    }
    let Ok(candidate) = CanonicalNcf::new(p, n, layers, constants) else { return Ok(None) };
    Ok((build(&candidate) == *f).then_some(candidate))
}

/// Recognizer that accepts tables with inessential variables (they are never nested canalizing).
pub fn is_nested_canalizing(f: &TruthTable) -> bool {
    f.arity() >= 2 && (0..f.arity()).all(|v| f.is_essential(v)) && matches!(decompose(f), Ok(Some(_)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definition::from_definition;
    use crate::field::all_segments;
    use std::collections::{HashMap, HashSet};

    fn pm(p: u32) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn entry(var: usize, seg: Segment) -> LayerEntry {
        LayerEntry { var, segment: seg }
    }

    #[test]
    fn builds_product_of_indicators() {
        let p = pm(3);
        let s0 = Segment::lower(p, 0).unwrap();
        let c = CanonicalNcf::new(p, 2, vec![vec![entry(0, s0), entry(1, s0)]], vec![0, 1]).unwrap();
        assert_eq!(build(&c).values(), &[0, 0, 0, 0, 1, 1, 0, 1, 1]);
        assert_eq!(decompose(&build(&c)).unwrap(), Some(c));
    }

    #[test]
    fn decomposes_and() {
        let p = pm(2);
        let and = TruthTable::new(p, 2, vec![0, 0, 0, 1]).unwrap();
        let c = decompose(&and).unwrap().unwrap();
        let s0 = Segment::lower(p, 0).unwrap();
        assert_eq!(c.layers(), &[vec![entry(0, s0), entry(1, s0)]]);
        assert_eq!(c.constants(), &[0, 1]);
    }

    #[test]
    fn rejects_min_and_xor() {
        let min = TruthTable::from_fn(pm(3), 2, |x| x[0].min(x[1])).unwrap();
        assert_eq!(decompose(&min).unwrap(), None);
        let xor = TruthTable::new(pm(2), 2, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(decompose(&xor).unwrap(), None);
    }

    #[test]
    fn precondition_errors() {
        let proj = TruthTable::from_fn(pm(3), 2, |x| x[0]).unwrap();
        assert!(matches!(decompose(&proj), Err(Error::Precondition(_))));
        let uni = TruthTable::from_fn(pm(3), 1, |x| x[0]).unwrap();
        assert!(matches!(decompose(&uni), Err(Error::Precondition(_))));
        assert!(!is_nested_canalizing(&proj));
    }

    #[test]
    fn constraint_errors() {
        let p = pm(3);
        let s0 = Segment::lower(p, 0).unwrap();
        let err = CanonicalNcf::new(p, 2, vec![vec![entry(0, s0)], vec![entry(1, s0)]], vec![0, 1, 2]);
        assert!(matches!(err, Err(Error::Constraint(_))));
        let zero_b = CanonicalNcf::new(p, 2, vec![vec![entry(0, s0), entry(1, s0)]], vec![1, 0]);
        assert!(matches!(zero_b, Err(Error::Constraint(_))));
        let wrong_orientation = CanonicalNcf::new(
            p,
            2,
            vec![vec![entry(0, s0)], vec![entry(1, Segment::upper(p, 1).unwrap())]],
            vec![0, 1, 1],
        );
        assert!(matches!(wrong_orientation, Err(Error::Constraint(_))));
        let dup = CanonicalNcf::new(p, 2, vec![vec![entry(0, s0), entry(0, s0)]], vec![0, 1]);
        assert!(dup.is_err());
        let missing = CanonicalNcf::new(p, 3, vec![vec![entry(0, s0), entry(1, s0)]], vec![0, 1]);
        assert!(missing.is_err());
    }

    #[test]
    fn definition_outputs_match_layers() {
        let p = pm(3);
        let s0 = Segment::lower(p, 0).unwrap();
        let s1 = Segment::upper(p, 2).unwrap();
        let c = CanonicalNcf::new(p, 3, vec![vec![entry(2, s1)], vec![entry(0, s0), entry(1, s1)]], vec![2, 2, 1])
            .unwrap();
        let d = c.to_definition_params();
        assert_eq!(d.outputs(), &[2, 1, 1, 2]);
        assert_eq!(from_definition(&d), build(&c));
        assert_eq!(d.layer_count(), c.layer_number());
    }

    /// Every function of the given shape, by brute force enumeration of all tables.
    fn recognized(p: u32, n: usize) -> HashSet<TruthTable> {
        let p = pm(p);
        let len = p.as_usize().pow(n as u32);
        let total = p.as_usize().pow(len as u32);
        (0..total)
            .filter_map(|mut code| {
                let values: Vec<u32> = (0..len)
                    .map(|_| {
                        let v = (code % p.as_usize()) as u32;
                        code /= p.as_usize();
                        v
                    })
                    .collect();
                let t = TruthTable::new(p, n, values).unwrap();
                is_nested_canalizing(&t).then_some(t)
            })
            .collect()
    }

    #[test]
    fn recognition_matches_parameter_search() {
        for (p, n) in [(2u32, 2usize), (2, 3), (3, 2)] {
            let by_params: HashSet<TruthTable> =
                DefinitionParams::enumerate_all(pm(p), n).map(|d| from_definition(&d)).collect();
            assert_eq!(recognized(p, n), by_params, "p={p} n={n}");
        }
    }

    #[test]
    fn round_trip_on_parameter_images() {
        for (p, n) in [(2u32, 3usize), (3, 2), (3, 3), (5, 2)] {
            for d in DefinitionParams::enumerate_all(pm(p), n).step_by(7) {
                let t = from_definition(&d);
                let c = decompose(&t).unwrap().expect("definition image is nested canalizing");
                assert_eq!(build(&c), t);
                assert_eq!(c.layer_number(), d.layer_count());
                assert_eq!(t.essential_variables().len(), n);
            }
        }
    }

    fn all_forms(p: PrimeModulus, n: usize) -> Vec<CanonicalNcf> {
        crate::enumeration::all_canonical_forms(p, n).unwrap()
    }

    #[test]
    fn distinct_forms_give_distinct_tables() {
        for (p, n) in [(2u32, 2usize), (2, 3), (3, 2), (3, 3)] {
            let forms = all_forms(pm(p), n);
            let mut tables = HashMap::new();
            for c in &forms {
                let t = build(c);
                assert!(t.essential_variables().len() == n);
                if let Some(prev) = tables.insert(t, c.clone()) {
                    panic!("{prev:?} and {c:?} build the same table");
                }
            }
        }
    }

    #[test]
    fn single_variable_dedup_count() {
        // b Q_S(x) + a over nonzero a, b, excluding functions of the form c Q_S'(x)
        for p in [3u32, 5, 7] {
            let pmod = pm(p);
            let segs = all_segments(pmod);
            let pure: HashSet<Vec<u32>> = (1..p)
                .flat_map(|c| segs.iter().map(move |s| (0..p).map(|x| c * s.indicator(x).unwrap()).collect()))
                .collect();
            let mut found = HashSet::new();
            for a in 1..p {
                for b in 1..p {
                    for s in &segs {
                        let f: Vec<u32> = (0..p).map(|x| (b * s.indicator(x).unwrap() + a) % p).collect();
                        if !pure.contains(&f) {
                            found.insert(f);
                        }
                    }
                }
            }
            let q = p as usize - 1;
            assert_eq!(found.len(), q * q * (q - 1), "p={p}");
        }
    }

    #[test]
    fn product_form_count() {
        let p = pm(3);
        let segs = all_segments(p);
        for k in [2usize, 3] {
            let mut found = HashSet::new();
            let combos = segs.len().pow(k as u32);
            for a in 1..3u32 {
                for b in 1..3u32 {
                    for mut code in 0..combos {
                        let chosen: Vec<Segment> = (0..k)
                            .map(|_| {
                                let s = segs[code % segs.len()];
                                code /= segs.len();
                                s
                            })
                            .collect();
                        let t = TruthTable::from_fn(p, k, |x| {
                            let m: u32 = chosen.iter().zip(x).map(|(s, &xi)| s.indicator(xi).unwrap()).product();
                            b * m + a
                        })
                        .unwrap();
                        found.insert(t);
                    }
                }
            }
            // 2^k (p-1)^(k+2)
            assert_eq!(found.len(), (1 << k) * 2usize.pow(k as u32 + 2), "k={k}");
        }
    }
}
