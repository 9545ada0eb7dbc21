use crate::canonical::{CanonicalNcf, LayerEntry};
use crate::error::{Error, Result};
use crate::field::{all_segments, lower_segments, PrimeModulus, Segment};

use super::counting::{count_ncfs, biguint_to_f64};

/// Guard on the number of canonical forms materialized by [`all_canonical_forms`].
pub const MAX_ENUMERATED_FORMS: usize = 1 << 22;

/// All compositions of `n` (ordered sequences of positive parts), in lexicographic order.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for k in 1..=rest {
            cur.push(k);
            go(rest - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(n, &mut Vec::new(), &mut out);
    }
    out
}

pub(crate) fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Ordered set partitions of `vars` with block sizes `sizes`.
fn ordered_partitions(vars: &[usize], sizes: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&k, rest_sizes)) = sizes.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for block in combinations(vars, k) {
        let rest: Vec<usize> = vars.iter().copied().filter(|v| !block.contains(v)).collect();
        for mut tail in ordered_partitions(&rest, rest_sizes) {
            tail.insert(0, block.clone());
            out.push(tail);
        }
    }
    out
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    choices.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.push(o.clone());
                    v
                })
            })
            .collect()
    })
}

/// Every valid canonical form over `n` variables; one per nested canalizing function.
pub fn all_canonical_forms(p: PrimeModulus, n: usize) -> Result<Vec<CanonicalNcf>> {
    let total = count_ncfs(p, n)?;
    if biguint_to_f64(&total) > MAX_ENUMERATED_FORMS as f64 {
        return Err(Error::Capacity {
            guard: "MAX_ENUMERATED_FORMS",
            detail: format!("{total} canonical forms exceed {MAX_ENUMERATED_FORMS}"),
        });
    }
    let pv = p.get();
    let segs = all_segments(p);
    let oriented = lower_segments(p);
    let vars: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    for sizes in compositions(n) {
        let r = sizes.len();
        let single_last = sizes[r - 1] == 1;
        let mut const_choices: Vec<Vec<u32>> = vec![(0..pv).collect()];
        const_choices.extend((0..r).map(|_| (1..pv).collect::<Vec<u32>>()));
        let constant_sets: Vec<Vec<u32>> = cartesian(&const_choices)
            .into_iter()
            .filter(|b| !single_last || r < 2 || (b[r] + b[r - 1]) % pv != 0)
            .collect();
        let seg_choices: Vec<Vec<Segment>> = (0..n)
            .map(|i| if single_last && i == n - 1 { oriented.clone() } else { segs.clone() })
            .collect();
        let seg_sets = cartesian(&seg_choices);
        for blocks in ordered_partitions(&vars, &sizes) {
            for seg_set in &seg_sets {
                let mut it = seg_set.iter();
                let layers: Vec<Vec<LayerEntry>> = blocks
                    .iter()
                    .map(|block| block.iter().map(|&var| LayerEntry { var, segment: *it.next().unwrap() }).collect())
                    .collect();
                for constants in &constant_sets {
                    out.push(CanonicalNcf::new(p, n, layers.clone(), constants.clone())?);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn composition_enumeration() {
        assert_eq!(compositions(3), vec![vec![1, 1, 1], vec![1, 2], vec![2, 1], vec![3]]);
        for n in 1..10 {
            assert_eq!(compositions(n).len(), 1 << (n - 1));
        }
    }

    #[test]
    fn partitions_count() {
        // 4! / (1! 2! 1!)
        assert_eq!(ordered_partitions(&[0, 1, 2, 3], &[1, 2, 1]).len(), 12);
    }

    #[test]
    fn form_count_matches_closed_form() {
        for (p, n) in [(2u32, 2usize), (2, 4), (3, 2), (3, 3), (5, 2)] {
            let pm = PrimeModulus::new(p).unwrap();
            let forms = all_canonical_forms(pm, n).unwrap();
            assert_eq!(BigUint::from(forms.len()), count_ncfs(pm, n).unwrap());
        }
    }

    #[test]
    fn guard() {
        let pm = PrimeModulus::new(5).unwrap();
        assert!(matches!(all_canonical_forms(pm, 6), Err(Error::Capacity { .. })));
    }
}
