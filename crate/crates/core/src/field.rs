//! Prime moduli, segments of the ordered field and their indicator functions.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// A prime `p`; field values are the integers `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus(u32);

impl PrimeModulus {
    pub fn new(p: u32) -> Result<Self> {
        if p < 2 || !is_prime(p) {
            return Err(domain(format!("modulus {p} is not prime")));
        }
        Ok(Self(p))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    pub fn check_value(self, x: u32) -> Result<u32> {
        if x < self.0 {
            Ok(x)
        } else {
            Err(domain(format!("value {x} is not in F_{}", self.0)))
        }
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentKind {
    /// `{0, ..., j}`
    Lower,
    /// `{j, ..., p-1}`
    Upper,
}

/// A proper nonempty initial or final interval of `0 < 1 < ... < p-1`.
///
/// Stored as kind plus bound, so membership is a single comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    kind: SegmentKind,
    bound: u32,
    p: PrimeModulus,
}

impl Segment {
    /// `{0, ..., j}` with `0 <= j <= p-2`.
    pub fn lower(p: PrimeModulus, j: u32) -> Result<Self> {
        if j + 2 > p.get() {
            return Err(domain(format!("lower segment bound {j} must be <= p-2 = {}", p.get() - 2)));
        }
        Ok(Self { kind: SegmentKind::Lower, bound: j, p })
    }

    /// `{j, ..., p-1}` with `1 <= j <= p-1`.
    pub fn upper(p: PrimeModulus, j: u32) -> Result<Self> {
        if j == 0 || j >= p.get() {
            return Err(domain(format!("upper segment bound {j} must lie in 1..={}", p.get() - 1)));
        }
        Ok(Self { kind: SegmentKind::Upper, bound: j, p })
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.p
    }

    #[inline]
    pub fn contains(&self, x: u32) -> bool {
        match self.kind {
            SegmentKind::Lower => x <= self.bound,
            SegmentKind::Upper => x >= self.bound,
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.kind == SegmentKind::Lower
    }

    pub fn len(&self) -> u32 {
        match self.kind {
            SegmentKind::Lower => self.bound + 1,
            SegmentKind::Upper => self.p.get() - self.bound,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn complement(&self) -> Segment {
        match self.kind {
            SegmentKind::Lower => Segment {
                kind: SegmentKind::Upper,
                bound: self.bound + 1,
                p: self.p,
            },
            SegmentKind::Upper => Segment {
                kind: SegmentKind::Lower,
                bound: self.bound - 1,
                p: self.p,
            },
        }
    }

    /// `Q_S(x)`: 0 on the segment, 1 on its complement.
    pub fn indicator(&self, x: u32) -> Result<u32> {
        self.p.check_value(x)?;
        Ok(self.indicator_unchecked(x))
    }

    #[inline]
    pub(crate) fn indicator_unchecked(&self, x: u32) -> u32 {
        u32::from(!self.contains(x))
    }

    /// The segment `{a : a is in values}`, if that set is a segment.
    pub fn from_members(p: PrimeModulus, members: &[bool]) -> Option<Segment> {
        let size = members.iter().filter(|&&m| m).count() as u32;
        if size == 0 || size == p.get() {
            return None;
        }
        let candidate = if members[0] {
            Segment::lower(p, size - 1).ok()?
        } else {
            Segment::upper(p, p.get() - size).ok()?
        };
        (0..p.get())
            .all(|x| candidate.contains(x) == members[x as usize])
            .then_some(candidate)
    }

    /// Parses the `L:j` / `U:j` text form.
    pub fn parse(p: PrimeModulus, s: &str) -> Result<Self> {
        let (kind, bound) = s
            .split_once(':')
            .ok_or_else(|| domain(format!("malformed segment `{s}`")))?;
        let j: u32 = bound
            .trim()
            .parse()
            .map_err(|_| domain(format!("malformed segment bound in `{s}`")))?;
        match kind.trim() {
            "L" => Segment::lower(p, j),
            "U" => Segment::upper(p, j),
            _ => Err(domain(format!("unknown segment kind in `{s}`"))),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SegmentKind::Lower => write!(f, "L:{}", self.bound),
            SegmentKind::Upper => write!(f, "U:{}", self.bound),
        }
    }
}

impl FromStr for PrimeModulus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p: u32 = s.trim().parse().map_err(|_| domain(format!("`{s}` is not an integer")))?;
        PrimeModulus::new(p)
    }
}

/// All `2(p-1)` segments: lower ones by increasing size, then upper ones by increasing size.
pub fn all_segments(p: PrimeModulus) -> Vec<Segment> {
    let lower = (0..p.get() - 1).map(|j| Segment { kind: SegmentKind::Lower, bound: j, p });
    let upper = (1..p.get()).rev().map(|j| Segment { kind: SegmentKind::Upper, bound: j, p });
    lower.chain(upper).collect()
}

/// The `p-1` segments containing 0.
pub fn lower_segments(p: PrimeModulus) -> Vec<Segment> {
    (0..p.get() - 1)
        .map(|j| Segment { kind: SegmentKind::Lower, bound: j, p })
        .collect()
}
