//! Nested canalizing functions given by variable order, canalizing input
//! segments and canalized outputs.

use crate::error::{constraint, domain, Result};
use crate::field::{all_segments, PrimeModulus, Segment};
use crate::table::{check_permutation, permutations, TruthTable};

/// `f(x) = b_k` for the first `k` with `x_{order[k]}` in `segments[k]`,
/// and `b_n` (the last output) when no variable hits its segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DefinitionParams {
    p: PrimeModulus,
    order: Vec<usize>,
    segments: Vec<Segment>,
    outputs: Vec<u32>,
}

impl DefinitionParams {
    pub fn new(p: PrimeModulus, order: Vec<usize>, segments: Vec<Segment>, outputs: Vec<u32>) -> Result<Self> {
        let n = order.len();
        if n == 0 {
            return Err(domain("a nested canalizing function needs at least one variable"));
        }
        check_permutation(&order, n)?;
        if segments.len() != n {
            return Err(domain(format!("{} segments given for {n} variables", segments.len())));
        }
        if segments.iter().any(|s| s.modulus() != p) {
            return Err(domain("segment modulus differs from the function modulus"));
        }
        if outputs.len() != n + 1 {
            return Err(domain(format!("{} outputs given, expected {}", outputs.len(), n + 1)));
        }
        for &b in &outputs {
            p.check_value(b)?;
        }
        if outputs[n - 1] == outputs[n] {
            return Err(constraint("the last two canalized outputs must differ"));
        }
        Ok(Self { p, order, segments, outputs })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    pub fn arity(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    #[inline]
    pub fn evaluate_unchecked(&self, x: &[u32]) -> u32 {
        for (k, (&var, seg)) in self.order.iter().zip(&self.segments).enumerate() {
            if seg.contains(x[var]) {
                return self.outputs[k];
            }
        }
        self.outputs[self.order.len()]
    }

    /// The same function with the last segment complemented and the last two outputs swapped.
    pub fn with_last_layer_swapped(&self) -> DefinitionParams {
        let n = self.arity();
        let mut segments = self.segments.clone();
        segments[n - 1] = segments[n - 1].complement();
        let mut outputs = self.outputs.clone();
        outputs.swap(n - 1, n);
        DefinitionParams { p: self.p, order: self.order.clone(), segments, outputs }
    }

    pub fn layer_count(&self) -> usize {
        layer_number(&self.outputs)
    }

    /// Every parameter tuple for `(p, n)`: orders lexicographically, then segments, then outputs.
    pub fn enumerate_all(p: PrimeModulus, n: usize) -> impl Iterator<Item = DefinitionParams> {
        let segs = all_segments(p);
        let orders = permutations(n);
        let seg_choices = segs.len().pow(n as u32);
        let pv = p.get() as usize;
        let out_choices = pv.pow(n as u32 + 1);
        orders.into_iter().flat_map(move |order| {
            let segs = segs.clone();
            (0..seg_choices).flat_map(move |mut si| {
                let mut segments = Vec::with_capacity(n);
                for _ in 0..n {
                    segments.push(segs[si % segs.len()]);
                    si /= segs.len();
                }
                let order = order.clone();
                (0..out_choices).filter_map(move |mut oi| {
                    let mut outputs = Vec::with_capacity(n + 1);
                    for _ in 0..=n {
                        outputs.push((oi % pv) as u32);
                        oi /= pv;
                    }
                    (outputs[n - 1] != outputs[n]).then(|| DefinitionParams {
                        p,
                        order: order.clone(),
                        segments: segments.clone(),
                        outputs,
                    })
                })
            })
        })
    }
}

/// Tabulates the case ladder.
pub fn from_definition(d: &DefinitionParams) -> TruthTable {
    TruthTable::from_fn(d.p, d.arity(), |x| d.evaluate_unchecked(x)).expect("arity fits a table")
}

fn count_output_changes(outputs: &[u32]) -> usize {
    outputs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Output changes, less one when `b_{n-1} = b_{n+1}`: the last variable then joins
/// layer `n-1` under its complemented segment.
fn layer_number(outputs: &[u32]) -> usize {
    let changes = count_output_changes(outputs);
    let n = outputs.len() - 1;
    if n >= 2 && outputs[n - 2] == outputs[n] {
        changes - 1
    } else {
        changes
    }
}

/// Layer number of the function with canalized outputs `outputs = (b_1, ..., b_{n+1})`.
///
/// This is the number of changes along the output sequence, except when
/// `b_{n-1} = b_{n+1}`, where the last two layers merge.
pub fn layer_count_from_outputs(outputs: &[u32], p: PrimeModulus) -> Result<usize> {
    if outputs.len() < 2 {
        return Err(domain("need at least two canalized outputs"));
    }
    for &b in outputs {
        p.check_value(b)?;
    }
    let n = outputs.len() - 1;
    if outputs[n - 1] == outputs[n] {
        return Err(constraint("the last two canalized outputs must differ"));
    }
    Ok(layer_number(outputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::decompose;

    fn pm(p: u32) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn lower(p: u32, j: u32) -> Segment {
        Segment::lower(pm(p), j).unwrap()
    }

    fn upper(p: u32, j: u32) -> Segment {
        Segment::upper(pm(p), j).unwrap()
    }

    #[test]
    fn and_from_two_layers() {
        let d = DefinitionParams::new(pm(2), vec![0, 1], vec![lower(2, 0), lower(2, 0)], vec![0, 0, 1]).unwrap();
        assert_eq!(from_definition(&d).values(), &[0, 0, 0, 1]);
    }

    #[test]
    fn ladder_by_hand() {
        // x0 in {0} -> 1; else x1 in {2} -> 0; else 2
        let d = DefinitionParams::new(pm(3), vec![0, 1], vec![lower(3, 0), upper(3, 2)], vec![1, 0, 2]).unwrap();
        assert_eq!(from_definition(&d).values(), &[1, 1, 1, 2, 2, 0, 2, 2, 0]);
        // with S_2 = {0,1} instead
        let d = DefinitionParams::new(pm(3), vec![0, 1], vec![lower(3, 0), lower(3, 1)], vec![1, 0, 2]).unwrap();
        assert_eq!(from_definition(&d).values(), &[1, 1, 1, 0, 0, 2, 0, 0, 2]);
    }

    #[test]
    fn equal_last_outputs_rejected() {
        let err = DefinitionParams::new(pm(3), vec![0, 1], vec![lower(3, 0), lower(3, 0)], vec![1, 2, 2]);
        assert!(matches!(err, Err(crate::Error::Constraint(_))));
        assert!(matches!(layer_count_from_outputs(&[0, 1, 1], pm(2)), Err(crate::Error::Constraint(_))));
    }

    #[test]
    fn malformed_params_rejected() {
        assert!(DefinitionParams::new(pm(3), vec![0, 0], vec![lower(3, 0); 2], vec![0, 1, 2]).is_err());
        assert!(DefinitionParams::new(pm(3), vec![0, 1], vec![lower(3, 0)], vec![0, 1, 2]).is_err());
        assert!(DefinitionParams::new(pm(3), vec![0, 1], vec![lower(3, 0); 2], vec![0, 1]).is_err());
        assert!(DefinitionParams::new(pm(3), vec![0, 1], vec![lower(2, 0); 2], vec![0, 1, 0]).is_err());
        assert!(DefinitionParams::new(pm(3), vec![0, 1], vec![lower(3, 0); 2], vec![0, 1, 3]).is_err());
    }

    #[test]
    fn layer_counts() {
        assert_eq!(layer_count_from_outputs(&[1, 0, 2, 2, 0, 1], pm(3)).unwrap(), 4);
        assert_eq!(layer_count_from_outputs(&[2, 2, 2, 2, 1], pm(3)).unwrap(), 1);
        // three changes, but x_2 joins layer 2 with the complemented segment
        let r = layer_count_from_outputs(&[0, 1, 0, 1], pm(2)).unwrap();
        assert_eq!(r, 2);
        assert_eq!(layer_count_from_outputs(&[0, 1, 0, 2], pm(3)).unwrap(), 3);
        let d = DefinitionParams::new(pm(2), vec![0, 1, 2], vec![lower(2, 0); 3], vec![0, 1, 0, 1]).unwrap();
        let c = decompose(&from_definition(&d)).unwrap().unwrap();
        assert_eq!(c.layer_number(), r);
    }

    #[test]
    fn layer_count_agrees_with_decomposition() {
        for (p, n) in [(2u32, 2usize), (2, 3), (3, 2), (3, 3)] {
            for d in DefinitionParams::enumerate_all(pm(p), n) {
                let c = decompose(&from_definition(&d)).unwrap().unwrap();
                assert_eq!(c.layer_number(), d.layer_count(), "{d:?}");
            }
        }
    }

    #[test]
    fn last_layer_swap_is_identity() {
        let p = pm(5);
        let d = DefinitionParams::new(p, vec![2, 0, 1], vec![lower(5, 1), upper(5, 3), lower(5, 0)], vec![4, 1, 1, 3])
            .unwrap();
        let swapped = d.with_last_layer_swapped();
        assert_eq!(swapped.outputs(), &[4, 1, 3, 1]);
        assert_eq!(from_definition(&d), from_definition(&swapped));
    }

    #[test]
    fn enumeration_size() {
        // 2! orders * 4 segment pairs * (2*2*1) outputs
        let all: Vec<_> = DefinitionParams::enumerate_all(pm(2), 2).collect();
        assert_eq!(all.len(), 32);
        let distinct: std::collections::HashSet<_> = all.iter().map(from_definition).collect();
        assert_eq!(distinct.len(), 8);
        assert_eq!(DefinitionParams::enumerate_all(pm(3), 2).count(), 2 * 16 * 18);
    }
}
