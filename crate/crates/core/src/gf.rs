//! Arithmetic in the binary extension fields GF(2^u), 1 <= u <= 16.
//!
//! Elements are polynomials over GF(2) packed into integers (bit k holds the
//! coefficient of x^k) and reduced modulo a fixed irreducible polynomial per
//! bit width. Addition is XOR. For u <= 8 multiplication and inversion go
//! through precomputed log/antilog tables; wider fields use shift-and-reduce
//! and exponentiation. Both paths compute the same field.

use std::fmt;

use rand_chacha::rand_core::RngCore;
use thiserror::Error;

/// Widest supported field, GF(2^16).
pub const MAX_BITS: u8 = 16;

/// Reduction polynomials indexed by `u - 1`; bit k is the coefficient of x^k
/// and bit u is always set.
///
/// | u  | polynomial                | hex     |
/// |----|---------------------------|---------|
/// | 1  | x + 1                     | 0x3     |
/// | 2  | x^2 + x + 1               | 0x7     |
/// | 3  | x^3 + x + 1               | 0xB     |
/// | 4  | x^4 + x + 1               | 0x13    |
/// | 5  | x^5 + x^2 + 1             | 0x25    |
/// | 6  | x^6 + x + 1               | 0x43    |
/// | 7  | x^7 + x + 1               | 0x83    |
/// | 8  | x^8 + x^4 + x^3 + x + 1   | 0x11B   |
/// | 9  | x^9 + x^4 + 1             | 0x211   |
/// | 10 | x^10 + x^3 + 1            | 0x409   |
/// | 11 | x^11 + x^2 + 1            | 0x805   |
/// | 12 | x^12 + x^6 + x^4 + x + 1  | 0x1053  |
/// | 13 | x^13 + x^4 + x^3 + x + 1  | 0x201B  |
/// | 14 | x^14 + x^10 + x^6 + x + 1 | 0x4443  |
/// | 15 | x^15 + x + 1              | 0x8003  |
/// | 16 | x^16 + x^12 + x^3 + x + 1 | 0x1100B |
pub const REDUCTION_POLYS: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("field bit width {0} outside supported range 1..=16")]
    UnsupportedWidth(u8),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("value {value:#x} is not an element of GF(2^{u})")]
    OutOfRange { value: u64, u: u8 },
}

/// An element of GF(2^u), valid for the [`FieldParams`] it was drawn from.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(pub u16);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field GF(2^u) together with its reduction polynomial and, for u <= 8,
/// log/antilog tables.
///
/// Immutable after construction and safe to share across threads.
#[derive(Clone, Debug)]
pub struct FieldParams {
    u: u8,
    poly: u32,
    mask: u16,
    /// log[a] for a in 1..2^u; log[0] unused.
    log: Vec<u16>,
    /// Powers of the generator, doubled in length so `exp[i + j]` never wraps.
    exp: Vec<u16>,
}

impl FieldParams {
    /// Field with the fixed reduction polynomial for the given bit width.
    pub fn new(u: u8) -> Result<Self, GfError> {
        if u == 0 || u > MAX_BITS {
            return Err(GfError::UnsupportedWidth(u));
        }
        let poly = REDUCTION_POLYS[usize::from(u) - 1];
        let mask = if u == 16 { u16::MAX } else { (1u16 << u) - 1 };
        let mut fp = FieldParams {
            u,
            poly,
            mask,
            log: Vec::new(),
            exp: Vec::new(),
        };
        if u <= 8 {
            fp.build_tables();
        }
        Ok(fp)
    }

    /// Fills log/antilog tables from the powers of a multiplicative
    /// generator. Not every irreducible polynomial is primitive (x has order
    /// 51 under x^8+x^4+x^3+x+1), so the generator is found by search.
    fn build_tables(&mut self) {
        let order = self.size() as usize - 1;
        let generator = (2..self.size() as u16)
            .find(|&g| {
                let mut e = g;
                let mut steps = 1;
                while e != 1 {
                    e = self.mul_shift_reduce(e, g);
                    steps += 1;
                }
                steps == order
            })
            .unwrap_or(1);
        let mut log = vec![0u16; self.size() as usize];
        let mut exp = vec![0u16; 2 * order];
        let mut e = 1u16;
        for (i, slot) in exp.iter_mut().enumerate().take(order) {
            *slot = e;
            log[e as usize] = i as u16;
            e = self.mul_shift_reduce(e, generator);
        }
        debug_assert_eq!(e, 1, "generator order divides the group order");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        self.log = log;
        self.exp = exp;
    }

    pub fn u(&self) -> u8 {
        self.u
    }

    /// Number of field elements, 2^u.
    pub fn size(&self) -> u32 {
        1u32 << self.u
    }

    pub fn reduction_poly(&self) -> u32 {
        self.poly
    }

    /// Checks that `value` encodes an element of this field.
    pub fn element(&self, value: u64) -> Result<FieldElement, GfError> {
        if value < u64::from(self.size()) {
            Ok(FieldElement(value as u16))
        } else {
            Err(GfError::OutOfRange { value, u: self.u })
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 ^ b.0)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if !self.log.is_empty() {
            if a.0 == 0 || b.0 == 0 {
                return FieldElement::ZERO;
            }
            let idx = usize::from(self.log[a.0 as usize]) + usize::from(self.log[b.0 as usize]);
            FieldElement(self.exp[idx])
        } else {
            FieldElement(self.mul_shift_reduce(a.0, b.0))
        }
    }

    /// Carryless product reduced modulo the field polynomial, one shift per
    /// multiplier bit with an interleaved degree-u reduction.
    fn mul_shift_reduce(&self, a: u16, b: u16) -> u16 {
        let mut a = u32::from(a);
        let b = u32::from(b);
        let mut acc = 0u32;
        for i in 0..self.u {
            if (b >> i) & 1 == 1 {
                acc ^= a;
            }
            a <<= 1;
            if (a >> self.u) & 1 == 1 {
                a ^= self.poly;
            }
        }
        acc as u16
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.0 == 0 {
            return Err(GfError::ZeroInverse);
        }
        if !self.log.is_empty() {
            let order = self.size() as usize - 1;
            let idx = order - usize::from(self.log[a.0 as usize]);
            Ok(FieldElement(self.exp[idx]))
        } else {
            // a^(2^u - 2) by square and multiply
            Ok(self.pow(a, u64::from(self.size()) - 2))
        }
    }

    pub fn pow(&self, base: FieldElement, mut e: u64) -> FieldElement {
        let mut base = base;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// One coefficient drawn uniformly from the whole field, zero included.
    pub fn uniform_random<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement((rng.next_u64() as u16) & self.mask)
    }
}

/// Where encoding coefficients come from. Monte Carlo trials draw from a
/// seeded RNG; exhaustive enumeration replays a fixed tape; a counting source
/// measures how many draws a generation performs.
pub trait CoeffSource {
    fn draw(&mut self, fp: &FieldParams) -> FieldElement;
}

pub struct RngCoeffSource<R: RngCore> {
    rng: R,
}

impl<R: RngCore> RngCoeffSource<R> {
    pub fn new(rng: R) -> Self {
        RngCoeffSource { rng }
    }
}

impl<R: RngCore> CoeffSource for RngCoeffSource<R> {
    fn draw(&mut self, fp: &FieldParams) -> FieldElement {
        fp.uniform_random(&mut self.rng)
    }
}

/// Replays a fixed assignment of coefficients; the tape length must equal the
/// number of draws the generation performs.
pub struct TapeCoeffSource<'a> {
    tape: &'a [u16],
    pos: usize,
}

impl<'a> TapeCoeffSource<'a> {
    pub fn new(tape: &'a [u16]) -> Self {
        TapeCoeffSource { tape, pos: 0 }
    }

    pub fn drawn(&self) -> usize {
        self.pos
    }
}

impl CoeffSource for TapeCoeffSource<'_> {
    fn draw(&mut self, _fp: &FieldParams) -> FieldElement {
        let v = self.tape[self.pos];
        self.pos += 1;
        FieldElement(v)
    }
}

/// Returns zero on every draw and counts them.
#[derive(Default)]
pub struct CountingCoeffSource {
    pub draws: usize,
}

impl CoeffSource for CountingCoeffSource {
    fn draw(&mut self, _fp: &FieldParams) -> FieldElement {
        self.draws += 1;
        FieldElement::ZERO
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: schoolbook carryless multiply followed by long
    /// division by the reduction polynomial.
    fn poly_mul_mod(a: u16, b: u16, poly: u32, u: u8) -> u16 {
        let mut wide: u64 = 0;
        for i in 0..16 {
            if (a >> i) & 1 == 1 {
                wide ^= u64::from(b) << i;
            }
        }
        for bit in (i32::from(u)..=31).rev() {
            if (wide >> bit) & 1 == 1 {
                wide ^= u64::from(poly) << (bit - i32::from(u));
            }
        }
        wide as u16
    }

    /// Trial division over GF(2): no divisor of degree 1..=u/2 divides poly.
    fn is_irreducible(poly: u32, u: u8) -> bool {
        for d in 1..=(u / 2).max(1) {
            for low in 0..(1u32 << d) {
                let div = (1u32 << d) | low;
                let mut rem = u64::from(poly);
                let deg_div = 31 - div.leading_zeros() as i32;
                for bit in (deg_div..=31).rev() {
                    if (rem >> bit) & 1 == 1 {
                        rem ^= u64::from(div) << (bit - deg_div);
                    }
                }
                if rem == 0 && div != poly {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn reduction_polys_are_irreducible() {
        for u in 1..=MAX_BITS {
            let poly = REDUCTION_POLYS[usize::from(u) - 1];
            assert!(poly >> u == 1, "leading bit of poly for u={u}");
            assert!(is_irreducible(poly, u), "poly for u={u} is reducible");
        }
    }

    #[test]
    fn unsupported_widths_rejected() {
        assert!(matches!(FieldParams::new(0), Err(GfError::UnsupportedWidth(0))));
        assert!(matches!(FieldParams::new(17), Err(GfError::UnsupportedWidth(17))));
    }

    #[test]
    fn add_is_xor() {
        let fp = FieldParams::new(3).unwrap();
        let x = FieldElement(0b101);
        assert_eq!(fp.add(FieldElement::ZERO, x), x);
        assert_eq!(fp.add(x, x), FieldElement::ZERO);
        assert_eq!(fp.add(FieldElement(0b101), FieldElement(0b011)), FieldElement(0b110));
    }

    #[test]
    fn mul_matches_schoolbook_oracle() {
        // GF(2^3), x^3+x+1: (x^2+x)(x+1) reduces to 1.
        let fp3 = FieldParams::new(3).unwrap();
        assert_eq!(poly_mul_mod(0b110, 0b011, 0xB, 3), 0b001);
        assert_eq!(fp3.mul(FieldElement(0b110), FieldElement(0b011)), FieldElement(0b001));
        // GF(2^8), AES polynomial: 0x02 * 0x80 = 0x1B.
        let fp8 = FieldParams::new(8).unwrap();
        assert_eq!(poly_mul_mod(0x02, 0x80, 0x11B, 8), 0x1B);
        assert_eq!(fp8.mul(FieldElement(0x02), FieldElement(0x80)), FieldElement(0x1B));
        assert_eq!(fp8.mul(FieldElement::ONE, FieldElement(0x53)), FieldElement(0x53));
    }

    #[test]
    fn table_and_shift_reduce_paths_agree() {
        // The tables are an optimization only; behavior must be identical.
        for u in [1u8, 2, 3, 4, 8] {
            let fp = FieldParams::new(u).unwrap();
            for a in 0..fp.size() as u16 {
                for b in 0..fp.size() as u16 {
                    assert_eq!(
                        fp.mul(FieldElement(a), FieldElement(b)).0,
                        fp.mul_shift_reduce(a, b),
                        "u={u} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn inverse_exhaustive_small_fields() {
        let fp = FieldParams::new(2).unwrap();
        assert_eq!(fp.inv(FieldElement(0b10)).unwrap(), FieldElement(0b11));
        for u in 1..=8 {
            let fp = FieldParams::new(u).unwrap();
            assert_eq!(fp.inv(FieldElement::ONE).unwrap(), FieldElement::ONE);
            assert!(matches!(fp.inv(FieldElement::ZERO), Err(GfError::ZeroInverse)));
            for a in 1..fp.size() as u16 {
                let a = FieldElement(a);
                let b = fp.inv(a).unwrap();
                assert_eq!(fp.mul(a, b), FieldElement::ONE);
            }
        }
    }

    #[test]
    fn inverse_wide_field_spot_checks() {
        let fp = FieldParams::new(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let a = fp.uniform_random(&mut rng);
            if a.is_zero() {
                continue;
            }
            assert_eq!(fp.mul(a, fp.inv(a).unwrap()), FieldElement::ONE);
        }
    }

    #[test]
    fn uniform_random_is_deterministic_and_covering() {
        let fp = FieldParams::new(4).unwrap();
        let mut seen = [false; 16];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            seen[fp.uniform_random(&mut rng).0 as usize] = true;
        }
        assert!(seen.iter().all(|&s| s), "all 16 values drawn in 10^4 draws");

        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(fp.uniform_random(&mut a), fp.uniform_random(&mut b));
        }

        // u = 1: frequency of ones over 10^5 draws close to 1/2.
        let fp1 = FieldParams::new(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ones: u32 = (0..100_000).map(|_| u32::from(fp1.uniform_random(&mut rng).0)).sum();
        let freq = f64::from(ones) / 100_000.0;
        assert!((freq - 0.5).abs() < 0.01, "freq={freq}");
    }

    #[test]
    fn tape_and_counting_sources() {
        let fp = FieldParams::new(4).unwrap();
        let tape = [3u16, 0, 9];
        let mut src = TapeCoeffSource::new(&tape);
        assert_eq!(src.draw(&fp), FieldElement(3));
        assert_eq!(src.draw(&fp), FieldElement(0));
        assert_eq!(src.draw(&fp), FieldElement(9));
        assert_eq!(src.drawn(), 3);

        let mut counter = CountingCoeffSource::default();
        for _ in 0..5 {
            assert!(counter.draw(&fp).is_zero());
        }
        assert_eq!(counter.draws, 5);
    }

    proptest! {
        #[test]
        fn field_axioms_sampled(u in 1u8..=16, seed in any::<u64>()) {
            let fp = FieldParams::new(u).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = fp.uniform_random(&mut rng);
            let b = fp.uniform_random(&mut rng);
            let c = fp.uniform_random(&mut rng);
            prop_assert_eq!(fp.add(a, b), fp.add(b, a));
            prop_assert_eq!(fp.mul(a, b), fp.mul(b, a));
            prop_assert_eq!(fp.add(fp.add(a, b), c), fp.add(a, fp.add(b, c)));
            prop_assert_eq!(fp.mul(fp.mul(a, b), c), fp.mul(a, fp.mul(b, c)));
            prop_assert_eq!(fp.mul(a, fp.add(b, c)), fp.add(fp.mul(a, b), fp.mul(a, c)));
            prop_assert_eq!(fp.add(fp.add(a, b), b), a);
            prop_assert_eq!(fp.mul(a, FieldElement::ONE), a);
        }
    }
}
