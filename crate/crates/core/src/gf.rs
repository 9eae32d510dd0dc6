//! Exact arithmetic in finite fields GF(p^k).
//!
//! Elements are stored as packed integer indices in `[0, p^k)` under the
//! polynomial-basis encoding `sum c_i * p^i`, fully reduced modulo a fixed
//! irreducible modulus. Field orders are capped at 2^20 so a rep always fits
//! one machine word; characteristic 2 gets a carry-less multiply fast path on
//! the packed bits.

use std::fmt;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_FIELD_ORDER: u64 = 1 << 20;

#[derive(Debug, PartialEq, Eq, Hash)]
struct FieldRepr {
    p: u32,
    k: u32,
    order: u32,
    /// Monic irreducible modulus, little-endian coefficients, length k+1.
    modulus: Vec<u32>,
    /// Modulus packed as bits (characteristic 2 only).
    modulus_bits: u64,
}

/// A finite field GF(p^k) with a fixed irreducible modulus.
///
/// Cheap to clone; all values derived from it are immutable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Field(Arc<FieldRepr>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order())
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.order())
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power q = p^k into (p, k). Errors if q is not a prime power.
pub fn prime_power(q: u64) -> Result<(u32, u32)> {
    if q < 2 {
        return Err(Error::NotPrimePower(q));
    }
    let mut p = 2u64;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if p * p > q {
        return Ok((q as u32, 1)); // q itself is prime
    }
    let mut rest = q;
    let mut k = 0u32;
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    if rest != 1 {
        return Err(Error::NotPrimePower(q));
    }
    Ok((p as u32, k))
}

// ---- polynomial helpers over GF(p), little-endian coefficient vectors ----

fn poly_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem(mut a: Vec<u32>, b: &[u32], p: u32) -> Vec<u32> {
    debug_assert!(b.last().is_some_and(|&c| c != 0));
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while a.len() > db {
        let da = a.len() - 1;
        let coef = (a[da] as u64 * lead_inv as u64 % p as u64) as u32;
        if coef != 0 {
            for i in 0..=db {
                let sub = (coef as u64 * b[i] as u64) % p as u64;
                let cur = a[da - db + i] as u64;
                a[da - db + i] = ((cur + p as u64 - sub) % p as u64) as u32;
            }
        }
        a.pop();
        poly_trim(&mut a);
        if a.is_empty() {
            break;
        }
    }
    a
}

fn poly_is_divisible(a: &[u32], b: &[u32], p: u32) -> bool {
    poly_rem(a.to_vec(), b, p).is_empty()
}

fn mod_inv(a: u32, p: u32) -> u32 {
    // p is prime and small; Fermat
    mod_pow(a, p as u64 - 2, p)
}

fn mod_pow(mut base: u32, mut exp: u64, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut b = base as u64 % p as u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u64;
        }
        b = b * b % p as u64;
        exp >>= 1;
    }
    base = acc as u32;
    base
}

/// Trial division by every monic polynomial of degree 1..=k/2.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let k = modulus.len() - 1;
    if k == 1 {
        return true;
    }
    for d in 1..=(k / 2) {
        // all monic polynomials of degree d: p^d of them
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let mut divisor = unpack_index(idx, p, d + 1);
            divisor[d] = 1;
            if poly_is_divisible(modulus, &divisor, p) {
                return false;
            }
        }
    }
    true
}

fn unpack_index(mut idx: u64, p: u32, len: usize) -> Vec<u32> {
    let mut v = vec![0u32; len];
    for c in v.iter_mut().take(len) {
        *c = (idx % p as u64) as u32;
        idx /= p as u64;
    }
    v
}

fn pack_coeffs(v: &[u32], p: u32) -> u32 {
    let mut acc = 0u64;
    for &c in v.iter().rev() {
        acc = acc * p as u64 + c as u64;
    }
    acc as u32
}

impl Field {
    /// Builds GF(p^k). When `modulus` is omitted, the lexicographically
    /// smallest monic irreducible of degree k is used (smallest packed index
    /// of the non-leading coefficients), which makes serialized data
    /// reproducible across builds.
    pub fn new(p: u64, k: u32, modulus: Option<Vec<u32>>) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::NonPrimeCharacteristic(p));
        }
        if k < 1 {
            return Err(Error::InvalidInput("extension degree must be >= 1".into()));
        }
        let order = (p as u128).checked_pow(k).ok_or(Error::FieldTooLarge {
            order: u128::MAX,
        })?;
        if order > MAX_FIELD_ORDER as u128 {
            return Err(Error::FieldTooLarge { order });
        }
        let p = p as u32;
        let order = order as u32;
        let modulus = match modulus {
            Some(mut m) => {
                poly_trim(&mut m);
                if m.len() != k as usize + 1 || m[k as usize] != 1 {
                    return Err(Error::InvalidInput(format!(
                        "modulus must be monic of degree {k}"
                    )));
                }
                if m.iter().any(|&c| c >= p) {
                    return Err(Error::InvalidInput(
                        "modulus coefficients must be reduced mod p".into(),
                    ));
                }
                if !is_irreducible(&m, p) {
                    return Err(Error::ReducibleModulus { p: p as u64 });
                }
                m
            }
            None => Self::default_modulus(p, k),
        };
        let mut modulus_bits = 0u64;
        if p == 2 {
            for (i, &c) in modulus.iter().enumerate() {
                modulus_bits |= (c as u64) << i;
            }
        }
        Ok(Field(Arc::new(FieldRepr {
            p,
            k,
            order,
            modulus,
            modulus_bits,
        })))
    }

    /// GF(q) for a prime power q, with the default modulus.
    pub fn of_order(q: u64) -> Result<Field> {
        let (p, k) = prime_power(q)?;
        Field::new(p as u64, k, None)
    }

    fn default_modulus(p: u32, k: u32) -> Vec<u32> {
        let count = (p as u64).pow(k);
        for idx in 0..count {
            let mut m = unpack_index(idx, p, k as usize + 1);
            m[k as usize] = 1;
            if is_irreducible(&m, p) {
                return m;
            }
        }
        unreachable!("an irreducible polynomial of every degree exists")
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn k(&self) -> u32 {
        self.0.k
    }

    pub fn order(&self) -> u32 {
        self.0.order
    }

    pub fn characteristic_two(&self) -> bool {
        self.0.p == 2
    }

    /// Little-endian modulus coefficients, length k+1.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            rep: 0,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            rep: 1,
        }
    }

    /// The element with the given packed index.
    pub fn element(&self, index: u32) -> Result<FieldElement> {
        if index >= self.0.order {
            return Err(Error::InvalidElement {
                index: index as u64,
                order: self.0.order as u64,
            });
        }
        Ok(FieldElement {
            field: self.clone(),
            rep: index,
        })
    }

    /// All elements in packed-index order, zero first.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.order).map(move |i| FieldElement {
            field: self.clone(),
            rep: i,
        })
    }

    fn unpack(&self, rep: u32) -> Vec<u32> {
        unpack_index(rep as u64, self.0.p, self.0.k as usize)
    }

    // ---- raw-rep arithmetic; callers guarantee reps < order ----

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.0.p == 2 {
            return a ^ b;
        }
        let mut va = self.unpack(a);
        let vb = self.unpack(b);
        for (x, y) in va.iter_mut().zip(vb) {
            *x = (*x + y) % self.0.p;
        }
        pack_coeffs(&va, self.0.p)
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.0.p == 2 {
            return a;
        }
        let mut va = self.unpack(a);
        for x in va.iter_mut() {
            *x = (self.0.p - *x) % self.0.p;
        }
        pack_coeffs(&va, self.0.p)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.0.p == 2 {
            return self.mul2(a, b);
        }
        let va = self.unpack(a);
        let vb = self.unpack(b);
        let p = self.0.p as u64;
        let mut prod = vec![0u32; 2 * self.0.k as usize];
        for (i, &x) in va.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in vb.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p) as u32;
            }
        }
        poly_trim(&mut prod);
        let rem = poly_rem(prod, &self.0.modulus, self.0.p);
        pack_coeffs(&rem, self.0.p)
    }

    /// Carry-less multiply and modulus reduction on packed bits.
    fn mul2(&self, a: u32, b: u32) -> u32 {
        let mut prod = 0u64;
        let mut x = a as u64;
        let mut bb = b;
        while bb != 0 {
            if bb & 1 == 1 {
                prod ^= x;
            }
            x <<= 1;
            bb >>= 1;
        }
        let k = self.0.k;
        let m = self.0.modulus_bits;
        let mut deg = 63 - prod.leading_zeros() as i64;
        while prod != 0 && deg >= k as i64 {
            prod ^= m << (deg as u32 - k);
            if prod == 0 {
                break;
            }
            deg = 63 - prod.leading_zeros() as i64;
        }
        prod as u32
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow_unsigned(a, self.0.order as u64 - 2))
    }

    fn pow_unsigned(&self, base: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    /// base^e; negative exponents invert the (nonzero) base first.
    pub fn pow(&self, base: u32, e: i64) -> Result<u32> {
        if e >= 0 {
            if base == 0 && e == 0 {
                return Ok(1);
            }
            return Ok(self.pow_unsigned(base, e as u64));
        }
        let inv = self.inv(base)?;
        Ok(self.pow_unsigned(inv, e.unsigned_abs()))
    }

    /// x ^ (p^(e mod k)); negative e realizes inverse Frobenius powers.
    pub fn frobenius(&self, x: u32, e: i64) -> u32 {
        let k = self.0.k as i64;
        let e = e.rem_euclid(k) as u32;
        let mut out = x;
        for _ in 0..e {
            out = self.pow_unsigned(out, self.0.p as u64);
        }
        out
    }

    /// Relative trace onto GF(p^sub_degree): sum of x^(p^(sub_degree*i)).
    pub fn trace_to(&self, x: u32, sub_degree: u32) -> Result<u32> {
        if sub_degree == 0 || self.0.k % sub_degree != 0 {
            return Err(Error::NonDivisorDegree {
                sub_degree,
                k: self.0.k,
            });
        }
        let steps = self.0.k / sub_degree;
        let mut acc = 0u32;
        let mut term = x;
        for _ in 0..steps {
            acc = self.add(acc, term);
            term = self.frobenius(term, sub_degree as i64);
        }
        Ok(acc)
    }

    /// Absolute trace onto the prime field.
    pub fn trace(&self, x: u32) -> u32 {
        self.trace_to(x, 1).expect("1 divides k")
    }
}

// External interface: {"p": int, "k": int, "modulus": [int,...]}
impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            p: u32,
            k: u32,
            modulus: &'a [u32],
        }
        Repr {
            p: self.p(),
            k: self.k(),
            modulus: self.modulus(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Field, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            p: u64,
            k: u32,
            modulus: Vec<u32>,
        }
        let r = Repr::deserialize(d)?;
        Field::new(r.p, r.k, Some(r.modulus)).map_err(D::Error::custom)
    }
}

/// An element of a [`Field`], compared by packed rep.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    field: Field,
    rep: u32,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.rep, self.field)
    }
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Packed integer index in [0, p^k). For characteristic 2 this is the
    /// coefficient bit vector.
    pub fn rep(&self) -> u32 {
        self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep == 0
    }

    fn same_field(&self, other: &FieldElement) -> Result<()> {
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        Ok(())
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(FieldElement {
            field: self.field.clone(),
            rep: self.field.add(self.rep, other.rep),
        })
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(FieldElement {
            field: self.field.clone(),
            rep: self.field.sub(self.rep, other.rep),
        })
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(FieldElement {
            field: self.field.clone(),
            rep: self.field.mul(self.rep, other.rep),
        })
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(FieldElement {
            field: self.field.clone(),
            rep: self.field.inv(self.rep)?,
        })
    }

    pub fn pow(&self, e: i64) -> Result<FieldElement> {
        Ok(FieldElement {
            field: self.field.clone(),
            rep: self.field.pow(self.rep, e)?,
        })
    }

    pub fn frobenius(&self, e: i64) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            rep: self.field.frobenius(self.rep, e),
        }
    }

    pub fn trace_to(&self, sub_degree: u32) -> Result<FieldElement> {
        Ok(FieldElement {
            field: self.field.clone(),
            rep: self.field.trace_to(self.rep, sub_degree)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u64) -> Field {
        Field::of_order(q).unwrap()
    }

    #[test]
    fn default_moduli() {
        // degree-1 default modulus is x
        assert_eq!(gf(2).modulus(), &[0, 1]);
        assert_eq!(gf(3).modulus(), &[0, 1]);
        // GF(4): x^2 + x + 1
        assert_eq!(gf(4).modulus(), &[1, 1, 1]);
        // GF(8): x^3 + x + 1
        assert_eq!(gf(8).modulus(), &[1, 1, 0, 1]);
        // GF(9): x^2 + 1
        assert_eq!(gf(9).modulus(), &[1, 0, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Field::new(4, 1, None).unwrap_err(),
            Error::NonPrimeCharacteristic(4)
        );
        // x^2 + 1 = (x+1)^2 over GF(2)
        assert_eq!(
            Field::new(2, 2, Some(vec![1, 0, 1])).unwrap_err(),
            Error::ReducibleModulus { p: 2 }
        );
        assert!(matches!(
            Field::new(2, 21, None).unwrap_err(),
            Error::FieldTooLarge { .. }
        ));
        // explicit irreducible accepted
        assert_eq!(Field::new(2, 3, Some(vec![1, 1, 0, 1])).unwrap().order(), 8);
    }

    #[test]
    fn gf8_arithmetic() {
        let f = gf(8);
        let g = 0b010; // class of x
        let g2 = f.mul(g, g);
        assert_eq!(g2, 0b100);
        // g * g^2 = g^3 = g + 1
        assert_eq!(f.mul(g, g2), 0b011);
        assert_eq!(f.inv(1).unwrap(), 1);
    }

    #[test]
    fn gf4_add() {
        let f = gf(4);
        // omega = x has rep 2, omega^2 = omega + 1 has rep 3
        let w = 2;
        assert_eq!(f.mul(w, w), 3);
        assert_eq!(f.add(2, 3), 1);
    }

    #[test]
    fn mixed_fields_rejected() {
        let a = Field::new(2, 3, Some(vec![1, 1, 0, 1])).unwrap();
        let b = Field::new(2, 3, Some(vec![1, 0, 1, 1])).unwrap();
        let x = a.one();
        let y = b.one();
        assert_eq!(x.add(&y).unwrap_err(), Error::MixedFields);
        assert_eq!(x.mul(&y).unwrap_err(), Error::MixedFields);
    }

    #[test]
    fn frobenius_examples() {
        let f8 = gf(8);
        let x = 0b010;
        // e = -2 == 1 (mod 3), so x -> x^2
        assert_eq!(f8.frobenius(x, -2), f8.mul(x, x));
        // cross-check by inverting: frobenius(.,-2) then frobenius(.,2) is identity
        for a in 0..8 {
            assert_eq!(f8.frobenius(f8.frobenius(a, -2), 2), a);
        }
        // discrete-log oracle: x^(2^-2) = x^(4^-1 mod 7) = x^2
        assert_eq!(f8.frobenius(x, -2), f8.pow(x, 2).unwrap());
        let f4 = gf(4);
        assert_eq!(f4.frobenius(2, 1), 3); // omega -> omega^2
        for a in 0..4 {
            assert_eq!(f4.frobenius(a, 0), a);
        }
    }

    #[test]
    fn trace_examples() {
        // GF(2^k), x = 1: trace = k mod 2
        for k in 1..=8 {
            let f = Field::new(2, k, None).unwrap();
            assert_eq!(f.trace(1), k % 2);
        }
        let f4 = gf(4);
        assert_eq!(f4.trace(2), 1); // Tr(omega) = omega + omega^2 = 1
        let f8 = gf(8);
        let nonzero_trace = (0..8).filter(|&a| f8.trace(a) != 0).count();
        assert_eq!(nonzero_trace, 4);
    }

    #[test]
    fn trace_subfield_errors() {
        let f8 = gf(8);
        assert_eq!(
            f8.trace_to(1, 2).unwrap_err(),
            Error::NonDivisorDegree { sub_degree: 2, k: 3 }
        );
        // GF(16) -> GF(4) relative trace lands in GF(4)
        let f16 = gf(16);
        for a in 0..16 {
            let t = f16.trace_to(a, 2).unwrap();
            assert_eq!(f16.frobenius(t, 2), t);
        }
    }

    /// Exhaustive invariants on every field of order <= 256.
    #[test]
    fn field_axioms_exhaustive() {
        let orders: Vec<u64> = (2..=256)
            .filter(|&q| prime_power(q).is_ok())
            .collect();
        for q in orders {
            let f = gf(q);
            let k = f.k() as i64;
            for a in 0..f.order() {
                // Frobenius has order k; absolute trace lands in the prime field
                assert_eq!(f.frobenius(a, k), a);
                let t = f.trace(a);
                assert_eq!(f.frobenius(t, 1), t);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..f.order() {
                    for e in [1i64, 2, -1] {
                        assert_eq!(
                            f.frobenius(f.mul(a, b), e),
                            f.mul(f.frobenius(a, e), f.frobenius(b, e))
                        );
                        assert_eq!(
                            f.frobenius(f.add(a, b), e),
                            f.add(f.frobenius(a, e), f.frobenius(b, e))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pow_negative_exponent() {
        let f = gf(9);
        for a in 1..9 {
            let inv = f.pow(a, -1).unwrap();
            assert_eq!(f.mul(a, inv), 1);
            assert_eq!(f.pow(a, -3).unwrap(), f.inv(f.pow(a, 3).unwrap()).unwrap());
        }
        assert_eq!(f.pow(0, -1).unwrap_err(), Error::DivisionByZero);
    }

    #[test]
    fn serde_roundtrip() {
        let f = gf(8);
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(js, r#"{"p":2,"k":3,"modulus":[1,1,0,1]}"#);
        let back: Field = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);
        // reducible modulus rejected on read
        let bad = r#"{"p":2,"k":2,"modulus":[1,0,1]}"#;
        assert!(serde_json::from_str::<Field>(bad).is_err());
    }
}
