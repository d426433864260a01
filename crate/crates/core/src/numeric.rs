//! Correctly rounded summation and number formatting.
//!
//! Every ball measure and ball average in the crate goes through these sums.
//! A sum is always the exact real sum of its (already rounded) terms rounded
//! once to the nearest `f64`, so it does not depend on the order in which
//! terms are visited. Different enumeration strategies over the same ball
//! therefore produce bit-identical results.

/// Exact running sum (Shewchuk non-overlapping partials), rounded on demand.
#[derive(Clone, Debug, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        debug_assert!(value.is_finite(), "non-finite summand {value}");
        let mut x = value;
        let mut kept = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        self.partials.truncate(kept);
        self.partials.push(x);
    }

    /// The non-overlapping partials, smallest magnitude first.
    pub fn partials(&self) -> &[f64] {
        &self.partials
    }

    /// The exact sum rounded to nearest, ties to even.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // Half-way correction: the remaining partials push a tie away from even.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            let yr = x - hi;
            if y == yr {
                hi = x;
            }
        }
        hi
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Correctly rounded sum of a sequence of finite values.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<ExactSum>().value()
}

/// Exact `2^e` for every `e` in the binary64 range.
pub(crate) fn pow2(e: i32) -> f64 {
    if e >= -1022 {
        debug_assert!(e <= 1023);
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        debug_assert!(e >= -1074);
        f64::from_bits(1u64 << (e + 1074))
    }
}

/// `|v| = m · 2^e` with `m` odd. `None` for zero.
fn decompose(v: f64) -> Option<(u64, i32)> {
    if v == 0.0 {
        return None;
    }
    let bits = v.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += tz as i32;
    Some((m, e))
}

#[derive(Clone, Debug)]
enum PrefixRepr {
    /// All terms are integer multiples of `2^scale` and every partial sum
    /// fits in an `i128`.
    Fixed { scale: i32, prefix: Vec<i128> },
    Expansion { prefix: Vec<ExactSum> },
}

/// Prefix sums whose range queries are correctly rounded.
///
/// `range(lo, hi)` equals `exact_sum(terms[lo..hi])` bit for bit. When the
/// binary exponents of the terms span a narrow enough window the prefixes are
/// exact 128-bit fixed-point integers; otherwise each prefix keeps its full
/// expansion.
#[derive(Clone, Debug)]
pub struct PrefixSums {
    repr: PrefixRepr,
}

impl PrefixSums {
    pub fn new(terms: &[f64]) -> Self {
        let mut lo_exp = i32::MAX;
        let mut hi_bit = i32::MIN;
        for &t in terms {
            debug_assert!(t.is_finite());
            if let Some((m, e)) = decompose(t) {
                lo_exp = lo_exp.min(e);
                hi_bit = hi_bit.max(e + (64 - m.leading_zeros() as i32));
            }
        }
        if lo_exp == i32::MAX {
            return Self {
                repr: PrefixRepr::Fixed {
                    scale: 0,
                    prefix: vec![0; terms.len() + 1],
                },
            };
        }
        let growth = (usize::BITS - terms.len().leading_zeros()) as i32;
        if hi_bit - lo_exp + growth < 126 {
            let mut prefix = Vec::with_capacity(terms.len() + 1);
            let mut acc: i128 = 0;
            prefix.push(acc);
            for &t in terms {
                if let Some((m, e)) = decompose(t) {
                    let mag = (m as i128) << (e - lo_exp);
                    acc += if t < 0.0 { -mag } else { mag };
                }
                prefix.push(acc);
            }
            Self {
                repr: PrefixRepr::Fixed {
                    scale: lo_exp,
                    prefix,
                },
            }
        } else {
            let mut prefix = Vec::with_capacity(terms.len() + 1);
            let mut acc = ExactSum::new();
            prefix.push(acc.clone());
            for &t in terms {
                acc.add(t);
                prefix.push(acc.clone());
            }
            Self {
                repr: PrefixRepr::Expansion { prefix },
            }
        }
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        match &self.repr {
            PrefixRepr::Fixed { prefix, .. } => prefix.len() - 1,
            PrefixRepr::Expansion { prefix } => prefix.len() - 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Correctly rounded sum of `terms[lo..hi]`.
    pub fn range(&self, lo: usize, hi: usize) -> f64 {
        debug_assert!(lo <= hi && hi <= self.len());
        match &self.repr {
            PrefixRepr::Fixed { scale, prefix } => {
                let s = prefix[hi] - prefix[lo];
                // i128 -> f64 rounds to nearest-even; the power-of-two scaling is exact.
                (s as f64) * pow2(*scale)
            }
            PrefixRepr::Expansion { prefix } => {
                let mut acc = prefix[hi].clone();
                for &p in prefix[lo].partials() {
                    acc.add(-p);
                }
                acc.value()
            }
        }
    }

    pub fn total(&self) -> f64 {
        self.range(0, self.len())
    }

    pub fn is_fixed_point(&self) -> bool {
        matches!(self.repr, PrefixRepr::Fixed { .. })
    }
}

/// Formats like C's `%.12g`.
pub fn fmt_num(v: f64) -> String {
    fmt_sig(v, 12)
}

pub(crate) fn fmt_sig(v: f64, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= digits as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_sum_recovers_cancelled_bits() {
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum([0.1, 0.2, 0.3]), 0.6);
        assert_eq!(exact_sum(std::iter::repeat(0.1).take(10)), 1.0);
        assert_eq!(exact_sum([]), 0.0);
    }

    #[test]
    fn ties_round_to_even() {
        // 1 + 2^-53 is exactly halfway between 1 and 1 + 2^-52.
        let half = pow2(-53);
        assert_eq!(exact_sum([1.0, half]), 1.0);
        // A tiny extra push breaks the tie upward.
        assert_eq!(exact_sum([1.0, half, pow2(-100)]), 1.0 + pow2(-52));
        assert_eq!(exact_sum([1.0, -half, -pow2(-100)]), 1.0 - pow2(-53));
    }

    #[test]
    fn pow2_covers_subnormals() {
        assert_eq!(pow2(0), 1.0);
        assert_eq!(pow2(-1074), f64::from_bits(1));
        assert_eq!(pow2(-1022), f64::MIN_POSITIVE);
        assert_eq!(pow2(10), 1024.0);
    }

    #[test]
    fn wide_exponent_span_falls_back_to_expansions() {
        let terms = [1e200, 1.0, 1e-200, -1e200];
        let p = PrefixSums::new(&terms);
        assert!(!p.is_fixed_point());
        assert_eq!(p.range(1, 3), 1.0);
        assert_eq!(p.total(), exact_sum(terms));
        assert_eq!(p.range(3, 4), -1e200);
    }

    #[test]
    fn formatting_matches_percent_g() {
        assert_eq!(fmt_num(5.0), "5");
        assert_eq!(fmt_num(1.618033988749895), "1.61803398875");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(1e-7), "1e-07");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(0.0001), "0.0001");
    }

    fn value_strategy() -> impl Strategy<Value = f64> {
        (-(1i64 << 53)..(1i64 << 53), -30i32..30).prop_map(|(m, e)| m as f64 * pow2(e))
    }

    proptest! {
        // Two independent exact routes: non-overlapping expansions and
        // fixed-point integer accumulation must agree bit for bit.
        #[test]
        fn expansion_and_fixed_point_agree(terms in prop::collection::vec(value_strategy(), 0..64)) {
            let p = PrefixSums::new(&terms);
            prop_assert!(p.is_fixed_point());
            for lo in 0..=terms.len() {
                for hi in lo..=terms.len() {
                    prop_assert_eq!(p.range(lo, hi).to_bits(), exact_sum(terms[lo..hi].iter().copied()).to_bits());
                }
            }
        }

        #[test]
        fn exact_sum_is_order_independent(mut terms in prop::collection::vec(-1e6f64..1e6, 1..50), seed in any::<u64>()) {
            let a = exact_sum(terms.iter().copied());
            let k = (seed as usize) % terms.len();
            terms.rotate_left(k);
            terms.reverse();
            prop_assert_eq!(a.to_bits(), exact_sum(terms.iter().copied()).to_bits());
        }
    }
}
