//! Arithmetic in the prime field `Z/qZ` for `q < 2^64`.
//!
//! Elements always hold their canonical representative in `[0, q)`, so
//! structural equality is field equality. The operator impls panic when the
//! two operands carry different moduli; the `checked_*` methods report the
//! mismatch as an error instead.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use rand_core::RngCore;

/// 2^31 - 1, the default modulus.
pub const MERSENNE_31: u64 = 2_147_483_647;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldError {
    /// The requested modulus is below 3 or not prime.
    InvalidModulus(u64),
    ModulusMismatch {
        left: u64,
        right: u64,
    },
    InverseOfZero,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::InvalidModulus(q) => write!(f, "modulus {q} is not a prime >= 3"),
            FieldError::ModulusMismatch { left, right } => {
                write!(
                    f,
                    "field elements from different moduli ({left} vs {right})"
                )
            }
            FieldError::InverseOfZero => f.write_str("zero has no multiplicative inverse"),
        }
    }
}

impl core::error::Error for FieldError {}

/// A prime modulus `q >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldModulus(u64);

impl FieldModulus {
    pub fn new(q: u64) -> Result<Self, FieldError> {
        if q < 3 || !is_prime(q) {
            return Err(FieldError::InvalidModulus(q));
        }
        Ok(FieldModulus(q))
    }

    pub const fn get(self) -> u64 {
        self.0
    }

    /// Reduces an arbitrary integer into the field.
    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.0,
            modulus: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    /// Draws a uniform element by rejection sampling on raw 64-bit words.
    ///
    /// A word `w` below the largest multiple of `q` that fits in a `u64` is
    /// accepted and mapped to `w mod q`, so a generator that emits a value
    /// `v < q` yields exactly `v`.
    pub fn random_element<R: RngCore + ?Sized>(self, rng: &mut R) -> FieldElement {
        let q = self.0;
        let zone = u64::MAX - (u64::MAX % q);
        loop {
            let w = rng.next_u64();
            if w < zone {
                return self.element(w % q);
            }
        }
    }
}

impl Default for FieldModulus {
    fn default() -> Self {
        FieldModulus(MERSENNE_31)
    }
}

impl fmt::Display for FieldModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: FieldModulus,
}

impl FieldElement {
    pub const fn value(self) -> u64 {
        self.value
    }

    pub const fn modulus(self) -> FieldModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: FieldElement) -> Result<u64, FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch {
                left: self.modulus.0,
                right: other.modulus.0,
            });
        }
        Ok(self.modulus.0)
    }

    fn with_value(self, value: u64) -> FieldElement {
        FieldElement {
            value,
            modulus: self.modulus,
        }
    }

    pub fn checked_add(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        let q = self.same_field(rhs)?;
        let sum = (self.value as u128 + rhs.value as u128) % q as u128;
        Ok(self.with_value(sum as u64))
    }

    pub fn checked_sub(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        self.checked_add(-rhs)
    }

    pub fn checked_mul(self, rhs: FieldElement) -> Result<FieldElement, FieldError> {
        let q = self.same_field(rhs)?;
        let product = (self.value as u128 * rhs.value as u128) % q as u128;
        Ok(self.with_value(product as u64))
    }

    pub fn pow(self, mut exp: u64) -> FieldElement {
        let mut base = self;
        let mut acc = self.modulus.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self) -> Result<FieldElement, FieldError> {
        if self.value == 0 {
            return Err(FieldError::InverseOfZero);
        }
        let q = self.modulus.0 as i128;
        let (mut r0, mut r1) = (q, self.value as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.with_value(t0.rem_euclid(q) as u64))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;

    fn add(self, rhs: FieldElement) -> FieldElement {
        match self.checked_add(rhs) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;

    fn sub(self, rhs: FieldElement) -> FieldElement {
        match self.checked_sub(rhs) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;

    fn mul(self, rhs: FieldElement) -> FieldElement {
        match self.checked_mul(rhs) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        if self.value == 0 {
            self
        } else {
            self.with_value(self.modulus.0 - self.value)
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> FieldModulus {
        FieldModulus::new(q).unwrap()
    }

    #[test]
    fn addition_examples() {
        let q = f(17);
        assert_eq!((q.element(9) + q.element(12)).value(), 4);
        assert_eq!((q.element(5) + q.element(0)).value(), 5);
        assert_eq!((q.element(8) + q.element(9)).value(), 0);
    }

    #[test]
    fn multiplication_examples() {
        let q = f(17);
        assert_eq!((q.element(5) * q.element(7)).value(), 1);
        assert_eq!((q.element(13) * q.element(1)).value(), 13);
        assert_eq!((q.element(6) * q.element(0)).value(), 0);
    }

    #[test]
    fn negation_examples() {
        assert_eq!((-f(17).element(5)).value(), 12);
        assert_eq!((-f(17).element(0)).value(), 0);
        assert_eq!((-f(7).element(3)).value(), 4);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(f(17).element(5).inv().unwrap().value(), 7);
        assert_eq!(f(17).element(1).inv().unwrap().value(), 1);
        assert_eq!(f(7).element(3).inv().unwrap().value(), 5);
        assert_eq!(f(7).zero().inv(), Err(FieldError::InverseOfZero));
    }

    #[test]
    fn mismatched_moduli_are_rejected() {
        let a = f(17).element(3);
        let b = f(7).element(3);
        let err = FieldError::ModulusMismatch { left: 17, right: 7 };
        assert_eq!(a.checked_add(b), Err(err));
        assert_eq!(a.checked_mul(b), Err(err));
    }

    #[test]
    #[should_panic(expected = "different moduli")]
    fn operator_panics_on_mismatch() {
        let _ = f(17).element(3) + f(7).element(3);
    }

    #[test]
    fn modulus_validation() {
        assert_eq!(FieldModulus::new(2), Err(FieldError::InvalidModulus(2)));
        assert_eq!(FieldModulus::new(15), Err(FieldError::InvalidModulus(15)));
        assert!(FieldModulus::new(MERSENNE_31).is_ok());
        assert!(FieldModulus::new(18_446_744_073_709_551_557).is_ok());
        // Strong pseudoprime to several small bases.
        assert!(!is_prime(3_215_031_751));
    }

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            let naive = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), naive, "n = {n}");
        }
    }

    #[test]
    fn inverse_agrees_with_fermat() {
        let q = f(MERSENNE_31);
        for v in [2u64, 3, 65_535, 1_000_003, MERSENNE_31 - 1] {
            let a = q.element(v);
            assert_eq!(a.inv().unwrap(), a.pow(MERSENNE_31 - 2));
        }
    }

    #[test]
    fn exhaustive_laws_over_seven() {
        let q = f(7);
        let all: alloc::vec::Vec<_> = (0..7).map(|v| q.element(v)).collect();
        for &a in &all {
            assert_eq!(a + (-a), q.zero());
            if !a.is_zero() {
                assert_eq!(a * a.inv().unwrap(), q.one());
            }
            for &b in &all {
                assert_eq!(a + b, b + a);
                assert_eq!(a * b, b * a);
                assert_eq!((a - b) + b, a);
                for &c in &all {
                    assert_eq!((a + b) + c, a + (b + c));
                    assert_eq!((a * b) * c, a * (b * c));
                    assert_eq!(a * (b + c), a * b + a * c);
                }
            }
        }
    }

    struct Fixed(u64);

    impl RngCore for Fixed {
        fn next_u32(&mut self) -> u32 {
            self.0 as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(0)
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
            dest.fill(0);
            Ok(())
        }
    }

    #[test]
    fn random_element_passes_small_words_through() {
        assert_eq!(f(17).random_element(&mut Fixed(3)).value(), 3);
        assert_eq!(f(17).random_element(&mut Fixed(20)).value(), 3);
    }
}
