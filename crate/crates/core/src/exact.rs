//! Exact arbitrary-precision Stirling cycle numbers and the collision
//! probability built from them.
//!
//! Row `n` holds the unsigned Stirling numbers of the first kind `[n k]`,
//! `k = 1..=n`, which count permutations of `n` letters with exactly `k`
//! cycles and are the coefficients of the rising factorial
//! `x (x+1) ··· (x+n-1)`.
//!
//! Rows are built with the additive recurrence
//! `[n k] = (n-1)·[n-1 k] + [n-1 k-1]`, one in-place pass per row. Cost
//! grows roughly as `n³`: on one core row 5000 takes about 10 s and row
//! 10000 about 100 s, so `n = 20000` (the documented ceiling) is a
//! quarter-hour job holding some 300 MB of digits. Beyond a few thousand the
//! quadrature route in [`crate::analytic`] is the tool to use. The ceiling
//! is not enforced here.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Documented upper end of the exact route. Used as the default cut-off by
/// the report; never enforced by the functions in this module.
pub const EXACT_CEILING: u64 = 20_000;

/// Row `n` of the Stirling cycle numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StirlingRow {
    n: usize,
    coeffs: Vec<BigUint>,
}

impl StirlingRow {
    /// Wraps raw coefficients `[n 1], …, [n n]` without checking them.
    ///
    /// Intended for tests and for feeding alternative row builders into the
    /// verification suite; use [`stirling_row`] for real work.
    pub fn from_coeffs_unchecked(coeffs: Vec<BigUint>) -> Self {
        Self {
            n: coeffs.len(),
            coeffs,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficients indexed from zero: `coeffs()[k - 1] == [n k]`.
    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigUint> {
        self.coeffs
    }

    /// `[n k]` for `1 ≤ k ≤ n`, zero otherwise.
    pub fn get(&self, k: usize) -> BigUint {
        if k == 0 || k > self.n {
            BigUint::zero()
        } else {
            self.coeffs[k - 1].clone()
        }
    }

    pub fn sum(&self) -> BigUint {
        self.coeffs.iter().sum()
    }

    /// `Σ_k [n k]²`.
    pub fn squared_sum(&self) -> BigUint {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// `Σ_k [n k]² / (n!)²`, reduced.
    pub fn collision_probability(&self) -> ExactProbability {
        ExactProbability::new(self.squared_sum(), factorial(self.n()).pow(2))
    }

    /// Evaluates `Σ_k [n k] x^k` by Horner's rule.
    pub fn eval_polynomial(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = (acc + BigRational::from_integer(c.clone().into())) * x;
        }
        acc
    }
}

/// Successive Stirling rows `n = 1, 2, 3, …`, updated in place.
///
/// Holds a single row buffer; each step costs `O(n)` big-integer
/// operations.
#[derive(Debug, Clone, Default)]
pub struct StirlingRows {
    coeffs: Vec<BigUint>,
}

impl StirlingRows {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advances to the next row and returns it.
    pub fn advance(&mut self) -> &[BigUint] {
        // Current row index m = len; produce row m + 1.
        let m = self.coeffs.len();
        if m == 0 {
            self.coeffs.push(BigUint::one());
            return &self.coeffs;
        }
        self.coeffs.push(BigUint::zero());
        let factor = m as u64;
        for i in (1..=m).rev() {
            let (lo, hi) = self.coeffs.split_at_mut(i);
            hi[0] *= factor;
            hi[0] += &lo[i - 1];
        }
        self.coeffs[0] *= factor;
        &self.coeffs
    }

    /// Row number of the current buffer (0 before the first `advance`).
    pub fn current_n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn into_row(self) -> StirlingRow {
        StirlingRow::from_coeffs_unchecked(self.coeffs)
    }
}

impl Iterator for StirlingRows {
    type Item = StirlingRow;

    fn next(&mut self) -> Option<StirlingRow> {
        Some(StirlingRow::from_coeffs_unchecked(self.advance().to_vec()))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("n must be at least 1"))
    } else {
        Ok(())
    }
}

/// Row `n` of the Stirling cycle numbers.
pub fn stirling_row(n: usize) -> Result<StirlingRow> {
    check_n(n)?;
    let mut rows = StirlingRows::new();
    for _ in 0..n {
        rows.advance();
    }
    Ok(rows.into_row())
}

/// `n!` as a big integer (`0! = 1`).
pub fn factorial(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, j| acc * j)
}

/// The rising factorial `x (x+1) ··· (x+n-1)`, by direct product.
pub fn rising_factorial(n: usize, x: &BigRational) -> Result<BigRational> {
    check_n(n)?;
    let mut acc = BigRational::one();
    for j in 0..n {
        acc *= x + BigRational::from_integer(j.into());
    }
    Ok(acc)
}

/// `Σ_k [n k]²`, the number of ordered pairs of permutations of `n` letters
/// with equal cycle counts.
///
/// The row is consumed as it is squared, so no second copy is kept.
pub fn squared_row_sum(n: usize) -> Result<BigUint> {
    let row = stirling_row(n)?;
    Ok(row
        .into_coeffs()
        .into_iter()
        .fold(BigUint::zero(), |acc, c| acc + &c * &c))
}

/// Probability that two independent uniform permutations of `n` letters
/// have the same number of cycles, as an exact reduced fraction.
pub fn collision_probability(n: usize) -> Result<ExactProbability> {
    let f = squared_row_sum(n)?;
    let nf = factorial(n);
    Ok(ExactProbability::new(f, &nf * &nf))
}

/// Exact law of the cycle count of a uniform permutation of `n` letters.
pub fn cycle_distribution(n: usize) -> Result<CycleDistribution> {
    let row = stirling_row(n)?;
    let total: num_bigint::BigInt = factorial(n).into();
    let probs = row
        .into_coeffs()
        .into_iter()
        .map(|c| BigRational::new(c.into(), total.clone()))
        .collect();
    Ok(CycleDistribution { n, probs })
}

/// Exact law of the cycle count: `probs()[k - 1] == [n k] / n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleDistribution {
    n: usize,
    probs: Vec<BigRational>,
}

impl CycleDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    pub fn total(&self) -> BigRational {
        self.probs.iter().sum()
    }

    /// Probabilities rounded to `f64`.
    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(rational_to_f64).collect()
    }
}

/// A probability held as a reduced fraction together with its nearest
/// `f64`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactProbability {
    #[serde(serialize_with = "serialize_biguint")]
    numerator: BigUint,
    #[serde(serialize_with = "serialize_biguint")]
    denominator: BigUint,
    approx: f64,
}

fn serialize_biguint<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl ExactProbability {
    /// Reduces `numerator / denominator`.
    ///
    /// # Panics
    /// If the denominator is zero.
    pub fn new(numerator: BigUint, denominator: BigUint) -> Self {
        assert!(!denominator.is_zero(), "zero denominator");
        let g = numerator.gcd(&denominator);
        let (numerator, denominator) = if g.is_one() || g.is_zero() {
            (numerator, denominator)
        } else {
            (numerator / &g, denominator / &g)
        };
        let approx = ratio_to_f64(&numerator, &denominator);
        Self {
            numerator,
            denominator,
            approx,
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            self.numerator.clone().into(),
            self.denominator.clone().into(),
        )
    }

    /// Decimal rendering rounded half-up to `sig` significant digits.
    pub fn to_decimal_string(&self, sig: usize) -> String {
        decimal_string(&self.numerator, &self.denominator, sig)
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let v = ratio_to_f64(num, den);
    if r.numer().sign() == num_bigint::Sign::Minus {
        -v
    } else {
        v
    }
}

/// `num / den` correctly to within one rounding of a 64-bit quotient, for
/// operands far outside `f64` range.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mant = q.to_f64().unwrap_or(f64::INFINITY);
    scale_pow2(mant, -shift)
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

fn pow10(e: u32) -> BigUint {
    BigUint::from(10u32).pow(e)
}

/// Compares `num / den` against `10^e`.
fn cmp_pow10(num: &BigUint, den: &BigUint, e: i64) -> std::cmp::Ordering {
    if e >= 0 {
        num.cmp(&(den * pow10(e as u32)))
    } else {
        (num * pow10((-e) as u32)).cmp(den)
    }
}

/// Positional decimal rendering of a positive fraction with `sig`
/// significant digits, rounded half-up.
pub(crate) fn decimal_string(num: &BigUint, den: &BigUint, sig: usize) -> String {
    use std::cmp::Ordering::*;
    assert!(sig >= 1);
    if num.is_zero() {
        return "0".to_string();
    }
    // Decimal exponent: 10^e <= num/den < 10^(e+1).
    let approx = ratio_to_f64(num, den);
    let mut e = if approx.is_finite() && approx > 0.0 {
        approx.log10().floor() as i64
    } else {
        (num.bits() as i64 - den.bits() as i64) * 3 / 10
    };
    while cmp_pow10(num, den, e) == Less {
        e -= 1;
    }
    while cmp_pow10(num, den, e + 1) != Less {
        e += 1;
    }

    // scaled = round(num/den * 10^(sig-1-e))
    let k = sig as i64 - 1 - e;
    let (n2, d2) = if k >= 0 {
        (num * pow10(k as u32), den.clone())
    } else {
        (num.clone(), den * pow10((-k) as u32))
    };
    let mut scaled: BigUint = ((n2 << 1usize) + &d2) / (d2 << 1usize);
    if scaled == pow10(sig as u32) {
        scaled = pow10(sig as u32 - 1);
        e += 1;
    }
    let digits = scaled.to_str_radix(10);
    debug_assert_eq!(digits.len(), sig);

    if e >= 0 {
        let int_len = e as usize + 1;
        if int_len >= sig {
            let mut s = digits;
            s.extend(std::iter::repeat_n('0', int_len - sig));
            s
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else {
        let zeros = (-e - 1) as usize;
        format!("0.{}{}", "0".repeat(zeros), digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{cycle_histogram_by_enumeration, enumerate_cycle_counts};
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_rows() {
        assert_eq!(stirling_row(1).unwrap().coeffs(), big(&[1]).as_slice());
        assert_eq!(stirling_row(3).unwrap().coeffs(), big(&[2, 3, 1]).as_slice());
        assert_eq!(
            stirling_row(5).unwrap().coeffs(),
            big(&[24, 50, 35, 10, 1]).as_slice()
        );
    }

    #[test]
    fn zero_is_rejected() {
        assert!(matches!(stirling_row(0), Err(Error::Domain(_))));
        assert!(squared_row_sum(0).is_err());
        assert!(collision_probability(0).is_err());
        assert!(cycle_distribution(0).is_err());
        assert!(rising_factorial(0, &rat(1, 1)).is_err());
    }

    #[test]
    fn rows_match_enumeration() {
        for n in 1..=8 {
            let hist: Vec<BigUint> = cycle_histogram_by_enumeration(n)
                .into_iter()
                .map(BigUint::from)
                .collect();
            assert_eq!(stirling_row(n).unwrap().coeffs(), hist.as_slice(), "n = {n}");
        }
    }

    #[test]
    fn iterator_agrees_with_direct_rows() {
        for (i, row) in StirlingRows::new().take(30).enumerate() {
            assert_eq!(row, stirling_row(i + 1).unwrap());
        }
    }

    #[test]
    fn row_shape_invariants() {
        for n in 1..=60usize {
            let row = stirling_row(n).unwrap();
            assert_eq!(row.coeffs().len(), n);
            assert_eq!(row.sum(), factorial(n));
            assert!(row.get(n).is_one());
            assert_eq!(row.get(1), factorial(n - 1));
            if n >= 2 {
                assert_eq!(row.get(n - 1), BigUint::from(n * (n - 1) / 2));
            }
            assert!(row.coeffs().iter().all(|c| !c.is_zero()));
        }
    }

    #[test]
    fn rising_factorial_examples() {
        assert_eq!(rising_factorial(4, &rat(1, 1)).unwrap(), rat(24, 1));
        assert_eq!(rising_factorial(3, &rat(2, 1)).unwrap(), rat(24, 1));
        assert_eq!(rising_factorial(3, &rat(1, 2)).unwrap(), rat(15, 8));
        // 2/2 + 3/4 + 1/8
        let by_row = stirling_row(3).unwrap().eval_polynomial(&rat(1, 2));
        assert_eq!(by_row, rat(15, 8));
    }

    #[test]
    fn rising_factorial_matches_row_polynomial() {
        let xs = [rat(1, 1), rat(2, 1), rat(3, 1), rat(-1, 1), rat(1, 2), rat(5, 3)];
        for n in 1..=50 {
            let row = stirling_row(n).unwrap();
            for x in &xs {
                assert_eq!(rising_factorial(n, x).unwrap(), row.eval_polynomial(x), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn squared_sums() {
        assert_eq!(squared_row_sum(1).unwrap(), BigUint::from(1u32));
        assert_eq!(squared_row_sum(3).unwrap(), BigUint::from(14u32));
        assert_eq!(squared_row_sum(4).unwrap(), BigUint::from(194u32));
        assert_eq!(squared_row_sum(10).unwrap(), BigUint::from(3_161_107_700_156u64));
    }

    /// Ordered pairs of permutations with equal cycle counts, by direct
    /// enumeration of all n!² pairs.
    fn collision_pairs_by_enumeration(n: usize) -> (u64, u64) {
        let counts = enumerate_cycle_counts(n);
        let mut hits = 0u64;
        for a in &counts {
            for b in &counts {
                if a == b {
                    hits += 1;
                }
            }
        }
        (hits, (counts.len() * counts.len()) as u64)
    }

    #[test]
    fn probability_examples() {
        let p1 = collision_probability(1).unwrap();
        assert_eq!((p1.numerator().clone(), p1.denominator().clone()), (1u32.into(), 1u32.into()));
        let p2 = collision_probability(2).unwrap();
        assert_eq!(p2.to_string(), "1/2");
        let p3 = collision_probability(3).unwrap();
        assert_eq!(p3.to_string(), "7/18");
        for n in 1..=6 {
            let (hits, total) = collision_pairs_by_enumeration(n);
            let p = collision_probability(n).unwrap();
            assert_eq!(p.to_rational(), rat(hits as i64, total as i64));
        }
        assert_eq!(
            collision_probability(10).unwrap().to_string(),
            "16128100511/67184640000"
        );
    }

    #[test]
    fn approximation_is_tight() {
        // 40-digit references, rounded to f64.
        let refs = [
            (10, 0.240_056_365_725_856_4),
            (20, 0.200_577_090_159_074_32),
            (50, 0.167_806_837_908_924_6),
        ];
        for (n, want) in refs {
            let got = collision_probability(n).unwrap().approx();
            assert!(((got - want) / want).abs() <= 1e-15, "n={n}: {got} vs {want}");
        }
        // Far outside f64 range for numerator and denominator alike.
        let p = collision_probability(400).unwrap();
        assert!(p.approx() > 0.0 && p.approx() < 1.0);
        let digits: f64 = p.to_decimal_string(20).parse().unwrap();
        assert!(((digits - p.approx()) / p.approx()).abs() <= 1e-15);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(
            collision_probability(3).unwrap().to_decimal_string(20),
            "0.38888888888888888889"
        );
        assert_eq!(
            collision_probability(1).unwrap().to_decimal_string(20),
            "1.0000000000000000000"
        );
        assert_eq!(
            collision_probability(2).unwrap().to_decimal_string(5),
            "0.50000"
        );
        let one = BigUint::from(1u32);
        assert_eq!(decimal_string(&one, &BigUint::from(1000u32), 3), "0.00100");
        assert_eq!(decimal_string(&BigUint::from(999_999u32), &BigUint::from(1_000_000u32), 3), "1.00");
        assert_eq!(decimal_string(&BigUint::from(12_345u32), &one, 3), "12300");
        assert_eq!(decimal_string(&BigUint::from(25u32), &BigUint::from(2u32), 4), "12.50");
    }

    #[test]
    fn distribution_examples() {
        assert_eq!(cycle_distribution(1).unwrap().probs(), &[rat(1, 1)]);
        assert_eq!(cycle_distribution(2).unwrap().probs(), &[rat(1, 2), rat(1, 2)]);
        assert_eq!(
            cycle_distribution(3).unwrap().probs(),
            &[rat(2, 6), rat(3, 6), rat(1, 6)]
        );
    }

    proptest! {
        #[test]
        fn distribution_sums_to_one(n in 1usize..120) {
            let d = cycle_distribution(n).unwrap();
            prop_assert_eq!(d.total(), rat(1, 1));
            prop_assert!(d.probs().iter().all(|p| p > &BigRational::zero()));
        }

        #[test]
        fn probability_is_reduced_and_in_unit_interval(n in 1usize..150) {
            let p = collision_probability(n).unwrap();
            prop_assert!(p.numerator().gcd(p.denominator()).is_one());
            prop_assert!(!p.numerator().is_zero());
            prop_assert!(p.numerator() <= p.denominator());
            let exact = p.to_rational();
            let back = BigRational::from_float(p.approx()).unwrap();
            let rel = ((back - &exact) / &exact).to_f64().unwrap().abs();
            prop_assert!(rel <= 1e-14);
        }
    }
}
