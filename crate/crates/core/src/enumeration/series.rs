use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{domain, Result};
use crate::field::PrimeModulus;

/// Taylor coefficients `g_0, ..., g_N` of
/// `G_p(s) = (p - p^2(p-1)s) / (p - (p-1) e^{2(p-1)s}) - p - p(p-1)(p-2)s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub p: u32,
    pub coefficients: Vec<BigRational>,
}

impl SeriesCoefficients {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `n! g_n`.
    pub fn scaled(&self, n: usize) -> Option<BigRational> {
        let fact: BigInt = (1..=n).fold(BigInt::one(), |acc, k| acc * k);
        self.coefficients.get(n).map(|c| c * BigRational::from_integer(fact))
    }
}

pub fn egf_coefficients(p: PrimeModulus, order: usize) -> Result<SeriesCoefficients> {
    if order < 2 {
        return Err(domain("series order must be at least 2"));
    }
    let pz = BigInt::from(p.get());
    let q = BigInt::from(p.get() - 1);
    let int = |x: BigInt| BigRational::from_integer(x);

    let mut numerator = vec![BigRational::zero(); order + 1];
    numerator[0] = int(pz.clone());
    numerator[1] = int(-(&pz * &pz * &q));

    // p - (p-1) exp(2(p-1)s)
    let rate = BigInt::from(2u32) * &q;
    let mut denominator = Vec::with_capacity(order + 1);
    let mut exp_term = BigRational::one();
    for k in 0..=order {
        if k > 0 {
            exp_term = exp_term * int(rate.clone()) / int(BigInt::from(k));
        }
        let mut d = -(int(q.clone()) * &exp_term);
        if k == 0 {
            d += int(pz.clone());
        }
        denominator.push(d);
    }
    assert!(denominator[0].is_one(), "denominator constant term is p - (p-1) = 1");

    let mut quotient: Vec<BigRational> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = numerator[k].clone();
        for j in 1..=k {
            acc -= &denominator[j] * &quotient[k - j];
        }
        quotient.push(acc / &denominator[0]);
    }
    quotient[0] -= int(pz.clone());
    quotient[1] -= int(&pz * &q * BigInt::from(p.get() as i64 - 2));
    Ok(SeriesCoefficients { p: p.get(), coefficients: quotient })
}

/// `n!` times the `n`th generating-function coefficient.
pub fn count_ncfs_egf(p: PrimeModulus, n: usize) -> Result<BigUint> {
    if n < 2 {
        return Err(domain(format!("counting formulas hold for n >= 2, got {n}")));
    }
    let series = egf_coefficients(p, n)?;
    let scaled = series.scaled(n).expect("order reaches n");
    if !scaled.is_integer() {
        return Err(domain("generating-function coefficient is not integral"));
    }
    Ok(scaled.to_integer().to_biguint().expect("count is nonnegative"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::count_ncfs;

    fn pm(p: u32) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn leading_terms_removed() {
        for p in [2, 3, 5] {
            let s = egf_coefficients(pm(p), 6).unwrap();
            assert!(s.coefficients[0].is_zero());
            assert!(s.coefficients[1].is_zero());
            assert_eq!(s.order(), 6);
        }
    }

    #[test]
    fn matches_closed_form() {
        let s3 = egf_coefficients(pm(3), 4).unwrap();
        assert_eq!(s3.coefficients[2], BigRational::from_integer(96.into()));
        let s2 = egf_coefficients(pm(2), 4).unwrap();
        assert_eq!(s2.scaled(4).unwrap(), BigRational::from_integer(736.into()));
        for p in [2, 3, 5, 7] {
            let s = egf_coefficients(pm(p), 20).unwrap();
            for n in 2..=20 {
                let exact = BigRational::from_integer(count_ncfs(pm(p), n).unwrap().into());
                assert_eq!(s.scaled(n).unwrap(), exact, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn order_validated() {
        assert!(egf_coefficients(pm(3), 1).is_err());
        assert!(count_ncfs_egf(pm(3), 1).is_err());
        assert_eq!(count_ncfs_egf(pm(3), 3).unwrap(), BigUint::from(5568u32));
    }
}
