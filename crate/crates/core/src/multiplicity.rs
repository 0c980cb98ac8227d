//! Bounded multiplicities: intervals over the naturals extended with ω.
//!
//! Abstraction counts nodes and edges only up to a precision bound. With the
//! bound fixed at one there are exactly six bounded values: `0`, `0..1`,
//! `0+`, `1`, `1+` and `2+`. Arithmetic is carried out on the exact
//! intervals and the result is re-approximated to the smallest bounded value
//! that contains it.
//!
//! The type itself can hold any interval `⟨lo, hi⟩`; the materialisation
//! machinery uses a few unbounded values such as `⟨2,2⟩` transiently, before
//! normalisation folds them back into bounded form.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Precision bound for node and edge counting.
pub const BOUND: u32 = 1;

/// Upper end of a multiplicity interval. `Omega` is larger than every natural.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Upper {
    Finite(u32),
    Omega,
}

impl Upper {
    fn saturating_add(self, other: Upper) -> Upper {
        match (self, other) {
            (Upper::Finite(a), Upper::Finite(b)) => match a.checked_add(b) {
                Some(s) => Upper::Finite(s),
                None => Upper::Omega,
            },
            _ => Upper::Omega,
        }
    }

    /// `true` when `k` does not exceed this bound.
    pub fn admits(self, k: u32) -> bool {
        match self {
            Upper::Finite(h) => k <= h,
            Upper::Omega => true,
        }
    }
}

/// An interval `⟨lo, hi⟩` of counts with `lo <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    lo: u32,
    hi: Upper,
}

impl Multiplicity {
    pub const ZERO: Multiplicity = Multiplicity { lo: 0, hi: Upper::Finite(0) };
    pub const ZERO_ONE: Multiplicity = Multiplicity { lo: 0, hi: Upper::Finite(1) };
    pub const ZERO_PLUS: Multiplicity = Multiplicity { lo: 0, hi: Upper::Omega };
    pub const ONE: Multiplicity = Multiplicity { lo: 1, hi: Upper::Finite(1) };
    pub const ONE_PLUS: Multiplicity = Multiplicity { lo: 1, hi: Upper::Omega };
    pub const TWO_PLUS: Multiplicity = Multiplicity { lo: 2, hi: Upper::Omega };

    /// The six bounded values, in a fixed order.
    pub const BOUNDED: [Multiplicity; 6] = [
        Multiplicity::ZERO,
        Multiplicity::ZERO_ONE,
        Multiplicity::ZERO_PLUS,
        Multiplicity::ONE,
        Multiplicity::ONE_PLUS,
        Multiplicity::TWO_PLUS,
    ];

    pub fn new(lo: u32, hi: Upper) -> Option<Multiplicity> {
        if hi.admits(lo) {
            Some(Multiplicity { lo, hi })
        } else {
            None
        }
    }

    /// The singleton interval `⟨k, k⟩` (not re-approximated).
    pub fn exactly(k: u32) -> Multiplicity {
        Multiplicity { lo: k, hi: Upper::Finite(k) }
    }

    /// `⟨k, ω⟩` (not re-approximated).
    pub fn at_least(k: u32) -> Multiplicity {
        Multiplicity { lo: k, hi: Upper::Omega }
    }

    pub fn lo(self) -> u32 {
        self.lo
    }

    pub fn hi(self) -> Upper {
        self.hi
    }

    /// Bounded approximation of a cardinality: 0, 1, or 2+ for everything larger.
    pub fn approx_card(k: usize) -> Multiplicity {
        let k = u32::try_from(k).unwrap_or(u32::MAX);
        Multiplicity::exactly(k).bounded()
    }

    /// Smallest bounded value whose interval contains this one.
    pub fn bounded(self) -> Multiplicity {
        let lo = self.lo.min(BOUND + 1);
        let hi = match self.hi {
            Upper::Finite(h) if h <= BOUND => Upper::Finite(h),
            _ => Upper::Omega,
        };
        Multiplicity { lo, hi }
    }

    pub fn is_bounded(self) -> bool {
        self.bounded() == self
    }

    pub fn is_zero(self) -> bool {
        self == Multiplicity::ZERO
    }

    /// A concrete multiplicity denotes exactly one element.
    pub fn is_concrete(self) -> bool {
        self == Multiplicity::ONE
    }

    pub fn contains(self, k: u32) -> bool {
        k >= self.lo && self.hi.admits(k)
    }

    /// Exact interval sum, without re-approximation.
    pub fn add_exact(self, other: Multiplicity) -> Multiplicity {
        Multiplicity {
            lo: self.lo.saturating_add(other.lo),
            hi: self.hi.saturating_add(other.hi),
        }
    }

    /// Bounded addition: exact interval sum re-approximated.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Multiplicity) -> Multiplicity {
        self.add_exact(other).bounded()
    }

    /// Exact removal of one unit: `⟨max(lo-1, 0), hi-1⟩` with `ω - 1 = ω`.
    pub fn minus_one_exact(self) -> Result<Multiplicity> {
        let hi = match self.hi {
            Upper::Finite(0) => {
                return Err(Error::Precondition(format!("cannot remove one unit from {self}")))
            }
            Upper::Finite(h) => Upper::Finite(h - 1),
            Upper::Omega => Upper::Omega,
        };
        Ok(Multiplicity { lo: self.lo.saturating_sub(1), hi })
    }

    /// Bounded removal of one unit. Requires `hi >= 1`.
    pub fn subtract_one(self) -> Result<Multiplicity> {
        self.minus_one_exact().map(Multiplicity::bounded)
    }

    /// Exact addition of one unit.
    pub fn plus_one_exact(self) -> Multiplicity {
        self.add_exact(Multiplicity::ONE)
    }

    /// Interval inclusion: `other ⊑ self`.
    pub fn subsumes(self, other: Multiplicity) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    /// Interval inclusion: `self ⊑ other`.
    pub fn is_subsumed_by(self, other: Multiplicity) -> bool {
        other.subsumes(self)
    }

    /// Interval intersection, if non-empty.
    pub fn meet(self, other: Multiplicity) -> Option<Multiplicity> {
        Multiplicity::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

impl PartialOrd for Multiplicity {
    /// The subsumption order.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.is_subsumed_by(*other), other.is_subsumed_by(*self)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }
}

/// Total order used for canonical sorting only (not subsumption).
impl Multiplicity {
    pub fn sort_key(self) -> (u32, Upper) {
        (self.lo, self.hi)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            Upper::Omega => write!(f, "{}+", self.lo),
            Upper::Finite(h) if h == self.lo => write!(f, "{}", self.lo),
            Upper::Finite(h) => write!(f, "{}..{}", self.lo, h),
        }
    }
}

impl std::str::FromStr for Multiplicity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Multiplicity> {
        let bad = || Error::Parse { line: 0, message: format!("bad multiplicity `{s}`") };
        if let Some(lo) = s.strip_suffix('+') {
            let lo = lo.parse().map_err(|_| bad())?;
            return Ok(Multiplicity::at_least(lo));
        }
        if let Some((lo, hi)) = s.split_once("..") {
            let lo = lo.parse().map_err(|_| bad())?;
            let hi = hi.parse().map_err(|_| bad())?;
            return Multiplicity::new(lo, Upper::Finite(hi)).ok_or_else(bad);
        }
        s.parse().map(Multiplicity::exactly).map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Multiplicity as M;

    #[test]
    fn six_bounded_values() {
        for m in M::BOUNDED {
            assert!(m.is_bounded(), "{m}");
        }
        assert!(!M::exactly(2).is_bounded());
        assert_eq!(M::exactly(2).bounded(), M::TWO_PLUS);
        assert_eq!(M::new(0, Upper::Finite(5)).unwrap().bounded(), M::ZERO_PLUS);
    }

    #[test]
    fn approximation_of_cardinalities() {
        assert_eq!(M::approx_card(0), M::ZERO);
        assert_eq!(M::approx_card(1), M::ONE);
        assert_eq!(M::approx_card(5), M::TWO_PLUS);
    }

    #[test]
    fn addition_examples() {
        for m in M::BOUNDED {
            assert_eq!(M::ZERO.add(m), m);
        }
        assert_eq!(M::ONE.add(M::ONE), M::TWO_PLUS);
        assert_eq!(M::ZERO_PLUS.add(M::ONE), M::ONE_PLUS);
    }

    #[test]
    fn subtraction_examples() {
        assert_eq!(M::ONE.subtract_one().unwrap(), M::ZERO);
        assert_eq!(M::TWO_PLUS.subtract_one().unwrap(), M::ONE_PLUS);
        assert_eq!(M::ZERO_PLUS.subtract_one().unwrap(), M::ZERO_PLUS);
        assert!(M::ZERO.subtract_one().is_err());
    }

    #[test]
    fn subsumption_examples() {
        assert!(M::ONE_PLUS.subsumes(M::TWO_PLUS));
        assert!(M::ZERO_ONE.subsumes(M::ONE));
        assert!(!M::TWO_PLUS.subsumes(M::ONE_PLUS));
    }

    #[test]
    fn rendering() {
        let text: Vec<String> = M::BOUNDED.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, ["0", "0..1", "0+", "1", "1+", "2+"]);
        for m in M::BOUNDED {
            assert_eq!(m.to_string().parse::<M>().unwrap(), m);
        }
    }

    #[test]
    fn meet_is_closed_on_bounded_values() {
        for a in M::BOUNDED {
            for b in M::BOUNDED {
                if let Some(m) = a.meet(b) {
                    assert!(m.is_bounded());
                }
            }
        }
        assert_eq!(M::TWO_PLUS.meet(M::ONE), None);
    }
}
