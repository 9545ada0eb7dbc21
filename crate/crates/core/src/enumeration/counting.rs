use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::field::PrimeModulus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CountMethod {
    ClosedForm,
    Recursive,
    #[serde(rename = "EGF")]
    Egf,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountReport {
    pub p: u32,
    pub n: usize,
    pub count: BigUint,
    pub method: CountMethod,
}

/// Row `S(n, 0), ..., S(n, n)` of the Stirling numbers of the second kind.
pub fn stirling2_row(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for i in 1..=n {
        let mut next = vec![BigUint::zero(); i + 1];
        for (k, slot) in next.iter_mut().enumerate().skip(1) {
            let carry = row.get(k).map(|s| s * k).unwrap_or_default();
            *slot = &row[k - 1] + carry;
        }
        row = next;
    }
    row
}

/// `S(n, r)`; zero when `r > n`.
pub fn stirling2(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    stirling2_row(n).swap_remove(r)
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn require_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(domain(format!("counting formulas hold for n >= 2, got {n}")))
    } else {
        Ok(())
    }
}

/// `|NCF(n)| = 2^n p (p-1)^n sum_r (p-1)^r r! [S(n,r) - (np/2) S(n-1,r)]`,
/// evaluated as `2^(n-1) p (p-1)^n sum_r (p-1)^r r! [2 S(n,r) - n p S(n-1,r)]`.
pub fn count_ncfs(p: PrimeModulus, n: usize) -> Result<BigUint> {
    require_n(n)?;
    let q = BigInt::from(p.get() - 1);
    let sn = stirling2_row(n);
    let sn1 = stirling2_row(n - 1);
    let mut sum = BigInt::zero();
    let mut qr = BigInt::one();
    let mut rfact = BigInt::one();
    for (r, s_r) in sn.iter().enumerate().skip(1) {
        qr *= &q;
        rfact *= r;
        let s_prev = sn1.get(r).cloned().unwrap_or_default();
        let bracket = BigInt::from(2u32) * BigInt::from(s_r.clone()) - BigInt::from(n * p.as_usize()) * BigInt::from(s_prev);
        sum += &qr * &rfact * bracket;
    }
    let total = (BigInt::one() << (n - 1)) * BigInt::from(p.get()) * q.pow(n as u32) * sum;
    Ok(total.to_biguint().expect("the count is nonnegative"))
}

/// `p * a_n` with `a_2 = 4(p-1)^4` and
/// `a_n = sum_{r=2}^{n-1} C(n, r-1) 2^(r-1) (p-1)^r a_{n-r+1} + 2^(n-1) (p-1)^(n+1) (2 + n(p-2))`.
pub fn count_ncfs_recursive(p: PrimeModulus, n: usize) -> Result<BigUint> {
    require_n(n)?;
    let q = BigUint::from(p.get() - 1);
    let mut a: Vec<BigUint> = vec![BigUint::zero(); n + 1];
    a[2] = BigUint::from(4u32) * q.pow(4);
    for m in 3..=n {
        let mut acc = BigUint::zero();
        for r in 2..m {
            acc += binomial(m, r - 1) * (BigUint::one() << (r - 1)) * q.pow(r as u32) * &a[m - r + 1];
        }
        acc += (BigUint::one() << (m - 1)) * q.pow(m as u32 + 1) * BigUint::from(2 + m * (p.as_usize() - 2));
        a[m] = acc;
    }
    Ok(BigUint::from(p.get()) * &a[n])
}

/// Classes under variable permutation: `2^(n-1) (p-1)^(n+1) p^n`.
pub fn count_equivalence_classes(p: PrimeModulus, n: usize) -> Result<BigUint> {
    require_n(n)?;
    let q = BigUint::from(p.get() - 1);
    Ok((BigUint::one() << (n - 1)) * q.pow(n as u32 + 1) * BigUint::from(p.get()).pow(n as u32))
}

/// Number of NCFs with layer sizes exactly `sizes = (k_1, ..., k_r)`.
pub fn composition_count(p: PrimeModulus, sizes: &[usize]) -> BigUint {
    let n: usize = sizes.iter().sum();
    let r = sizes.len();
    if r == 0 || sizes.contains(&0) || n < 2 {
        return BigUint::zero();
    }
    let q = BigUint::from(p.get() - 1);
    let multinomial = sizes.iter().fold(factorial(n), |acc, &k| acc / factorial(k));
    let single_last = sizes[r - 1] == 1;
    // segments: 2(p-1) per variable, p-1 for an oriented single last variable
    let segments = if single_last {
        (BigUint::from(2u32) * &q).pow(n as u32 - 1) * &q
    } else {
        (BigUint::from(2u32) * &q).pow(n as u32)
    };
    let last = if single_last { BigUint::from(p.get() - 2) } else { q.clone() };
    multinomial * segments * BigUint::from(p.get()) * q.pow(r as u32 - 1) * last
}

/// Per-layer-number summand of the closed form, split by whether the last layer has one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratumCount {
    pub layers: usize,
    pub single_last: bool,
    pub count: BigUint,
}

/// The summands `N_1(r)` (`k_r = 1`, `r >= 2`) and `N_2(r)` (`k_r >= 2`) in closed form.
pub fn stratum_counts(p: PrimeModulus, n: usize) -> Result<Vec<StratumCount>> {
    require_n(n)?;
    let pb = BigInt::from(p.get());
    let q = BigInt::from(p.get() - 1);
    let sn = stirling2_row(n);
    let sn1 = stirling2_row(n - 1);
    let fact = |k: usize| BigInt::from(factorial(k));
    let mut out = Vec::new();
    for r in 1..=n {
        if r >= 2 {
            // 2^(n-1) p (p-2) (p-1)^(n+r-1) n (r-1)! S(n-1, r-1)
            let c = (BigInt::one() << (n - 1))
                * &pb
                * BigInt::from(p.get() as i64 - 2)
                * q.pow((n + r - 1) as u32)
                * BigInt::from(n)
                * fact(r - 1)
                * BigInt::from(sn1[r - 1].clone());
            out.push(StratumCount { layers: r, single_last: true, count: c.to_biguint().unwrap() });
        }
        if r < n {
            // 2^n p (p-1)^(n+r) [r! S(n,r) - n (r-1)! S(n-1,r-1)]
            let inner = fact(r) * BigInt::from(sn[r].clone())
                - BigInt::from(n) * fact(r - 1) * BigInt::from(sn1[r - 1].clone());
            let c = (BigInt::one() << n) * &pb * q.pow((n + r) as u32) * inner;
            out.push(StratumCount { layers: r, single_last: false, count: c.to_biguint().unwrap() });
        }
    }
    Ok(out)
}

pub(crate) fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}
