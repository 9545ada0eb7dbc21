use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigUint;

use super::counting::count_ncfs;
use crate::error::{domain, Result};
use crate::field::PrimeModulus;

/// Working precision of the asymptotic evaluation (about 308 decimal digits).
pub const ASYMPTOTIC_PRECISION_BITS: usize = 1024;

const RM: RoundingMode = RoundingMode::ToEven;

struct Ctx {
    prec: usize,
    consts: Consts,
}

impl Ctx {
    fn new() -> Self {
        Self { prec: ASYMPTOTIC_PRECISION_BITS, consts: Consts::new().expect("constant cache allocates") }
    }

    fn int(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, self.prec)
    }

    fn big(&mut self, x: &BigUint) -> BigFloat {
        BigFloat::parse(&x.to_string(), Radix::Dec, self.prec, RM, &mut self.consts)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(self.prec, RM, &mut self.consts)
    }

    fn as_f64(&mut self, x: &BigFloat) -> f64 {
        let s = x.format(Radix::Dec, RM, &mut self.consts).expect("formatting succeeds");
        s.parse().unwrap_or(f64::NAN)
    }

    fn decimal(&mut self, x: &BigFloat, digits: usize) -> String {
        let mut y = x.clone();
        let bits = ((digits as f64) * std::f64::consts::LOG2_10).ceil() as usize + 4;
        y.set_precision(bits.max(64), RM).expect("precision change succeeds");
        let s = y.format(Radix::Dec, RM, &mut self.consts).expect("formatting succeeds");
        trim_mantissa(&s, digits)
    }
}

/// Shortens `d.ddddde±x` to `digits` significant digits (truncating).
fn trim_mantissa(s: &str, digits: usize) -> String {
    let (mantissa, exp) = s.split_once('e').unwrap_or((s, "+0"));
    let mut kept = String::new();
    let mut count = 0;
    for ch in mantissa.chars() {
        if ch.is_ascii_digit() {
            if count == digits {
                break;
            }
            count += 1;
        }
        kept.push(ch);
    }
    let exp: i64 = exp.parse().unwrap_or(0);
    format!("{kept}e{exp}")
}

/// `1 - (p/2) ln(p/(p-1))`.
pub fn asymptotic_prefactor(p: PrimeModulus) -> f64 {
    let mut cx = Ctx::new();
    let pref = prefactor(&mut cx, p);
    cx.as_f64(&pref)
}

fn log_ratio(cx: &mut Ctx, p: PrimeModulus) -> BigFloat {
    let ratio = cx.int(p.get() as u64).div(&cx.int(p.get() as u64 - 1), cx.prec, RM);
    cx.ln(&ratio)
}

fn prefactor(cx: &mut Ctx, p: PrimeModulus) -> BigFloat {
    let l = log_ratio(cx, p);
    let half_p = cx.int(p.get() as u64).div(&cx.int(2), cx.prec, RM);
    cx.int(1).sub(&half_p.mul(&l, cx.prec, RM), cx.prec, RM)
}

/// `ln` of `[1 - (p/2) L] 2^n (p-1)^n n! L^-(n+1)` with `L = ln(p/(p-1))`.
fn log_approx(cx: &mut Ctx, p: PrimeModulus, n: usize) -> BigFloat {
    let l = log_ratio(cx, p);
    let pref = prefactor(cx, p);
    let prec = cx.prec;
    let mut acc = cx.ln(&pref);
    let base = cx.ln(&cx.int(2 * (p.get() as u64 - 1)));
    acc = acc.add(&base.mul(&cx.int(n as u64), prec, RM), prec, RM);
    for k in 2..=n as u64 {
        let lk = cx.ln(&cx.int(k));
        acc = acc.add(&lk, prec, RM);
    }
    let ll = cx.ln(&l);
    acc.sub(&ll.mul(&cx.int(n as u64 + 1), prec, RM), prec, RM)
}

/// Leading-pole approximation of `|NCF(n)|`, evaluated in the log domain.
pub fn count_ncfs_asymptotic(p: PrimeModulus, n: usize) -> Result<BigFloat> {
    if n < 2 {
        return Err(domain(format!("approximation is stated for n >= 2, got {n}")));
    }
    let mut cx = Ctx::new();
    let lg = log_approx(&mut cx, p, n);
    Ok(lg.exp(cx.prec, RM, &mut cx.consts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRow {
    pub n: usize,
    pub exact: BigUint,
    /// Decimal rendering of the approximation, 30 significant digits.
    pub approx: String,
    pub approx_f64: f64,
    /// `(approx - exact) / exact`
    pub signed_rel_error: f64,
}

impl ApproxRow {
    pub fn rel_error(&self) -> f64 {
        self.signed_rel_error.abs()
    }
}

/// Exact count, approximation and relative error for `n = 2..=n_max`.
pub fn approximation_error_table(p: PrimeModulus, n_max: usize) -> Result<Vec<ApproxRow>> {
    if n_max < 2 {
        return Err(domain("n_max must be at least 2"));
    }
    let mut cx = Ctx::new();
    let prec = cx.prec;
    (2..=n_max)
        .map(|n| {
            let exact = count_ncfs(p, n)?;
            let lg = log_approx(&mut cx, p, n);
            let approx = lg.exp(prec, RM, &mut cx.consts);
            let ex = cx.big(&exact);
            let rel = approx.sub(&ex, prec, RM).div(&ex, prec, RM);
            Ok(ApproxRow {
                n,
                approx: cx.decimal(&approx, 30),
                approx_f64: cx.as_f64(&approx),
                signed_rel_error: cx.as_f64(&rel),
                exact,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(p: u32) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn prefactors() {
        assert!((asymptotic_prefactor(pm(2)) - (1.0 - std::f64::consts::LN_2)).abs() < 1e-15);
        assert!((asymptotic_prefactor(pm(5)) - 0.44214).abs() < 1e-5);
    }

    #[test]
    fn first_value() {
        let mut cx = Ctx::new();
        let a = count_ncfs_asymptotic(pm(2), 2).unwrap();
        let v = cx.as_f64(&a);
        assert!((v - 7.37129380921).abs() < 1e-9, "{v}");
    }

    #[test]
    fn large_n_does_not_overflow() {
        let rows = approximation_error_table(pm(7), 200).unwrap();
        let last = rows.last().unwrap();
        assert!(last.rel_error() < 1e-100);
        assert!(last.approx.starts_with(|c: char| c.is_ascii_digit()));
    }

    // reference values from an independent 60-digit evaluation
    const P2_REL: [(usize, f64); 9] = [
        (2, 0.0785882738487),
        (3, 0.00301290404844),
        (4, 0.000590148980597),
        (5, 4.72366151537e-5),
        (10, 3.4925786817e-10),
        (20, 2.00749801919e-19),
        (40, 2.83484929289e-39),
        (60, 1.01056586922e-57),
        (80, 6.35470459191e-77),
    ];
    const P5_REL: [(usize, f64); 9] = [
        (2, 0.00517223946889),
        (3, 2.06789424374e-5),
        (4, 4.24775070076e-6),
        (5, 3.45252380234e-8),
        (10, 7.3188247912e-15),
        (20, 1.81569963478e-29),
        (40, 2.22318963312e-59),
        (60, 1.49846115654e-87),
        (80, 2.5115122602e-116),
    ];

    #[test]
    fn frozen_relative_errors() {
        for (p, frozen) in [(2, &P2_REL), (5, &P5_REL)] {
            let rows = approximation_error_table(pm(p), 80).unwrap();
            for &(n, want) in frozen.iter() {
                let got = rows[n - 2].rel_error();
                assert!((got - want).abs() <= 1e-9 * want, "p={p} n={n}: {got} vs {want}");
            }
        }
        let rows = approximation_error_table(pm(2), 10).unwrap();
        assert_eq!(rows[8].exact, BigUint::from(64_255_903_744u64));
        assert!((rows[8].approx_f64 - 64_255_903_721.6).abs() < 0.1);
    }

    #[test]
    fn error_decay_is_not_strictly_monotone() {
        let steps_up = |p: u32| -> Vec<usize> {
            let rows = approximation_error_table(pm(p), 80).unwrap();
            rows.windows(2).filter(|w| w[1].rel_error() >= w[0].rel_error()).map(|w| w[1].n).collect()
        };
        assert_eq!(steps_up(2), vec![13, 28, 43, 56, 71]);
        assert_eq!(steps_up(5), vec![43]);
        // two steps always gain
        for p in [2, 5] {
            let rows = approximation_error_table(pm(p), 80).unwrap();
            assert!(rows.windows(3).all(|w| w[2].rel_error() < w[0].rel_error()), "p={p}");
        }
    }

    #[test]
    fn mantissa_trimming() {
        assert_eq!(trim_mantissa("1.23456789e+5", 3), "1.23e5");
        assert_eq!(trim_mantissa("7.0e-3", 5), "7.0e-3");
    }
}
