//! Integer intervals over mathematical integers.
//!
//! Bounds are `i128`; `i128::MIN` and `i128::MAX` act as -inf and +inf and
//! all bound arithmetic saturates, so no operation wraps inside the domain.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: i128,
    hi: i128,
}

pub const NEG_INF: i128 = i128::MIN;
pub const POS_INF: i128 = i128::MAX;

fn is_inf(v: i128) -> bool {
    v == NEG_INF || v == POS_INF
}

fn ext_neg(v: i128) -> i128 {
    match v {
        NEG_INF => POS_INF,
        POS_INF => NEG_INF,
        v => -v,
    }
}

/// Sum of two bounds; an infinite operand absorbs the other.
fn ext_add(a: i128, b: i128) -> i128 {
    if is_inf(a) {
        a
    } else if is_inf(b) {
        b
    } else {
        a.saturating_add(b)
    }
}

fn ext_mul(a: i128, b: i128) -> i128 {
    if a == 0 || b == 0 {
        0
    } else if is_inf(a) || is_inf(b) {
        if (a > 0) == (b > 0) {
            POS_INF
        } else {
            NEG_INF
        }
    } else {
        a.saturating_mul(b)
    }
}

fn tdiv(a: i128, b: i128) -> i128 {
    a.checked_div(b).unwrap_or(POS_INF)
}

fn pow2_mul(a: i128, k: u32) -> i128 {
    if a == 0 {
        0
    } else if k >= 127 {
        if a > 0 {
            POS_INF
        } else {
            NEG_INF
        }
    } else {
        a.saturating_mul(1i128 << k)
    }
}

fn min_max(vals: impl IntoIterator<Item = i128>) -> Interval {
    let mut it = vals.into_iter();
    let first = it.next().expect("non-empty corner set");
    let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
    Interval { lo, hi }
}

impl Interval {
    pub const BOTTOM: Interval = Interval { lo: POS_INF, hi: NEG_INF };
    pub const TOP: Interval = Interval { lo: NEG_INF, hi: POS_INF };

    /// `[lo, hi]`, or bottom when `lo > hi`.
    pub fn new(lo: i128, hi: i128) -> Self {
        if lo > hi {
            Self::BOTTOM
        } else {
            Interval { lo, hi }
        }
    }

    pub fn singleton(v: i128) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn is_bottom(&self) -> bool {
        self.lo > self.hi
    }

    pub fn bounds(&self) -> Option<(i128, i128)> {
        (!self.is_bottom()).then_some((self.lo, self.hi))
    }

    pub fn lo(&self) -> Option<i128> {
        self.bounds().map(|b| b.0)
    }

    pub fn hi(&self) -> Option<i128> {
        self.bounds().map(|b| b.1)
    }

    pub fn as_singleton(&self) -> Option<i128> {
        (!self.is_bottom() && self.lo == self.hi).then_some(self.lo)
    }

    pub fn contains(&self, v: i128) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.is_bottom() || (other.lo <= self.lo && self.hi <= other.hi)
    }

    pub fn is_disjoint(&self, other: &Interval) -> bool {
        self.meet(other).is_bottom()
    }

    pub fn join(&self, other: &Interval) -> Interval {
        match (self.is_bottom(), other.is_bottom()) {
            (true, _) => *other,
            (_, true) => *self,
            _ => Interval {
                lo: self.lo.min(other.lo),
                hi: self.hi.max(other.hi),
            },
        }
    }

    pub fn meet(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Jumps each unstable bound of `self` straight to `floor`/`ceil`.
    pub fn widen(&self, next: &Interval, floor: i128, ceil: i128) -> Interval {
        if self.is_bottom() {
            return *next;
        }
        if next.is_bottom() {
            return *self;
        }
        Interval {
            lo: if next.lo < self.lo { floor.min(next.lo) } else { self.lo },
            hi: if next.hi > self.hi { ceil.max(next.hi) } else { self.hi },
        }
    }

    fn lift(&self, other: &Interval, f: impl FnOnce(&Interval, &Interval) -> Interval) -> Interval {
        if self.is_bottom() || other.is_bottom() {
            Self::BOTTOM
        } else {
            f(self, other)
        }
    }

    pub fn neg(&self) -> Interval {
        if self.is_bottom() {
            return Self::BOTTOM;
        }
        Interval {
            lo: ext_neg(self.hi),
            hi: ext_neg(self.lo),
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        self.lift(other, |a, b| Interval {
            lo: ext_add(a.lo, b.lo),
            hi: ext_add(a.hi, b.hi),
        })
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        self.lift(other, |a, b| Interval {
            lo: ext_add(a.lo, ext_neg(b.hi)),
            hi: ext_add(a.hi, ext_neg(b.lo)),
        })
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        self.lift(other, |a, b| {
            min_max([
                ext_mul(a.lo, b.lo),
                ext_mul(a.lo, b.hi),
                ext_mul(a.hi, b.lo),
                ext_mul(a.hi, b.hi),
            ])
        })
    }

    /// The parts of `self` below and above zero.
    pub fn nonzero_parts(&self) -> [Interval; 2] {
        [self.meet(&Interval::new(NEG_INF, -1)), self.meet(&Interval::new(1, POS_INF))]
    }

    /// Truncating division over the nonzero part of the divisor.
    pub fn div(&self, divisor: &Interval) -> Interval {
        self.lift(divisor, |a, b| {
            b.nonzero_parts()
                .iter()
                .filter(|d| !d.is_bottom())
                .map(|d| min_max([tdiv(a.lo, d.lo), tdiv(a.lo, d.hi), tdiv(a.hi, d.lo), tdiv(a.hi, d.hi)]))
                .fold(Self::BOTTOM, |acc, r| acc.join(&r))
        })
    }

    /// Remainder with the sign of the dividend, over the nonzero part of the divisor.
    pub fn rem(&self, divisor: &Interval) -> Interval {
        self.lift(divisor, |a, b| {
            let m = b
                .nonzero_parts()
                .iter()
                .filter_map(|d| d.bounds())
                .map(|(lo, hi)| lo.unsigned_abs().max(hi.unsigned_abs()))
                .max();
            let Some(m) = m else { return Self::BOTTOM };
            let m = i128::try_from(m - 1).unwrap_or(POS_INF);
            Interval {
                lo: if a.lo >= 0 { 0 } else { a.lo.max(-m) },
                hi: if a.hi <= 0 { 0 } else { a.hi.min(m) },
            }
        })
    }

    /// `self * 2^amount` for amounts within `[0, 126]`; larger amounts saturate.
    pub fn shl(&self, amount: &Interval) -> Interval {
        self.lift(amount, |a, k| {
            let (k0, k1) = (k.lo.clamp(0, 127) as u32, k.hi.clamp(0, 127) as u32);
            min_max([pow2_mul(a.lo, k0), pow2_mul(a.lo, k1), pow2_mul(a.hi, k0), pow2_mul(a.hi, k1)])
        })
    }

    /// Arithmetic right shift, `floor(self / 2^amount)`, for non-negative amounts.
    pub fn shr(&self, amount: &Interval) -> Interval {
        self.lift(amount, |a, k| {
            let (k0, k1) = (k.lo.clamp(0, 127) as u32, k.hi.clamp(0, 127) as u32);
            min_max([a.lo >> k0, a.lo >> k1, a.hi >> k0, a.hi >> k1])
        })
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = |v: i128| match v {
            NEG_INF => "-inf".to_string(),
            POS_INF => "+inf".to_string(),
            v => v.to_string(),
        };
        match self.bounds() {
            None => f.write_str("bottom"),
            Some((lo, hi)) => write!(f, "[{}, {}]", bound(lo), bound(hi)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i128, hi: i128) -> Interval {
        Interval::new(lo, hi)
    }

    #[test]
    fn corner_subtraction() {
        assert_eq!(iv(0, 10).sub(&iv(3, 5)), iv(-5, 7));
    }

    #[test]
    fn promoted_timer_difference() {
        let t = iv(-32768, 32767);
        assert_eq!(t.sub(&t), iv(-65535, 65535));
    }

    #[test]
    fn bottom_is_absorbing_and_canonical() {
        assert_eq!(iv(3, 1), Interval::BOTTOM);
        assert!(Interval::BOTTOM.add(&iv(1, 2)).is_bottom());
        assert_eq!(Interval::BOTTOM.join(&iv(1, 2)), iv(1, 2));
        assert!(iv(1, 2).div(&iv(0, 0)).is_bottom());
    }

    #[test]
    fn division_skips_zero() {
        assert_eq!(iv(10, 10).div(&iv(-2, 5)), iv(-10, 10));
        assert_eq!(iv(-7, 7).rem(&iv(0, 3)), iv(-2, 2));
    }

    #[test]
    fn widening_jumps_to_bounds() {
        assert_eq!(iv(0, 3).widen(&iv(0, 4), -128, 127), iv(0, 127));
        assert_eq!(iv(0, 3).widen(&iv(-1, 3), -128, 127), iv(-128, 3));
        assert_eq!(iv(0, 3).widen(&iv(1, 2), -128, 127), iv(0, 3));
    }

    #[test]
    fn infinities_saturate() {
        assert_eq!(Interval::TOP.add(&iv(1, 1)), Interval::TOP);
        assert_eq!(iv(NEG_INF, 0).neg(), iv(0, POS_INF));
        assert_eq!(iv(-1, 1).shl(&iv(200, 200)), Interval::TOP);
    }
}
