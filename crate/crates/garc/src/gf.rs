//! Runtime-built finite fields GF(p^e) with exact arithmetic.
//!
//! A [`Field`] fixes the characteristic `p`, the degree `e` and a canonical
//! irreducible modulus. Element values are integers in `[0, q)`; the base-`p`
//! digits of a value, least significant first, are the coefficients of the
//! residue polynomial. The modulus is the lexicographically least monic
//! irreducible polynomial of degree `e`, comparing coefficient tuples in
//! ascending-degree order, so `Field::new(p, e)` agrees on representation
//! across runs and machines.

use std::fmt;
use std::sync::Arc;

use crate::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 20;

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// A finite field GF(p^e), q = p^e <= 2^20.
///
/// All value-level operations (`add`, `mul`, ...) act on integers in
/// `[0, q)` under the digit encoding described in the module docs. The
/// wrapped [`FieldElement`] type adds a field handle and rejects mixed-field
/// arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    p: u64,
    e: u32,
    q: u64,
    /// Modulus coefficients, ascending degree, length e+1, monic.
    modulus: Vec<u64>,
}

impl Field {
    /// Builds GF(p^e) with the canonical modulus.
    pub fn new(p: u64, e: u32) -> Result<Arc<Field>, Error> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if e == 0 {
            return Err(Error::ZeroDegree);
        }
        let mut q: u64 = 1;
        for _ in 0..e {
            q = q
                .checked_mul(p)
                .filter(|&v| v <= MAX_ORDER)
                .ok_or(Error::OrderTooLarge { p, e })?;
        }
        let modulus = least_irreducible(p, e);
        Ok(Arc::new(Field { p, e, q, modulus }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    /// Modulus coefficients, ascending degree; the leading entry is 1.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Base-p digits of `a`, least significant first, length `e`.
    pub fn coeffs(&self, a: u32) -> Vec<u64> {
        let mut v = a as u64;
        let mut out = Vec::with_capacity(self.e as usize);
        for _ in 0..self.e {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    fn value(&self, digits: &[u64]) -> u32 {
        let mut v: u64 = 0;
        for &d in digits.iter().rev() {
            v = v * self.p + d;
        }
        v as u32
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return ((a as u64 + b as u64) % self.p) as u32;
        }
        let (da, db) = (self.coeffs(a), self.coeffs(b));
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.value(&sum)
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.e == 1 {
            return ((self.p - a as u64) % self.p) as u32;
        }
        let da = self.coeffs(a);
        let neg: Vec<u64> = da.iter().map(|x| (self.p - x) % self.p).collect();
        self.value(&neg)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return ((a as u64 * b as u64) % self.p) as u32;
        }
        let (da, db) = (self.coeffs(a), self.coeffs(b));
        let mut prod = vec![0u64; 2 * self.e as usize - 1];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        poly_reduce(self.p, &self.modulus, &mut prod);
        prod.truncate(self.e as usize);
        self.value(&prod)
    }

    /// Inverse via a^(q-2); errors on zero.
    pub fn inv(&self, a: u32) -> Result<u32, Error> {
        if a == 0 {
            return Err(Error::DivisionByZero { q: self.q });
        }
        Ok(self.pow(a, self.q - 2))
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32, Error> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u32, mut k: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Wraps a raw value, checking the range.
    pub fn element(self: &Arc<Self>, value: u64) -> Result<FieldElement, Error> {
        if value >= self.q {
            return Err(Error::ValueOutOfRange { value, q: self.q });
        }
        Ok(FieldElement {
            field: Arc::clone(self),
            value: value as u32,
        })
    }

    /// All q elements in ascending value order.
    pub fn elements(self: &Arc<Self>) -> Vec<FieldElement> {
        (0..self.q)
            .map(|v| FieldElement {
                field: Arc::clone(self),
                value: v as u32,
            })
            .collect()
    }

    /// Serializes a value: decimal for prime fields; for extension fields a
    /// little-endian digit string over 0-9a-z when p <= 36, or dot-separated
    /// decimal digits otherwise.
    pub fn encode(&self, a: u32) -> String {
        if self.e == 1 {
            return a.to_string();
        }
        let digits = self.coeffs(a);
        if self.p <= 36 {
            digits
                .iter()
                .map(|&d| DIGITS[d as usize] as char)
                .collect()
        } else {
            digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// Inverse of [`Field::encode`].
    pub fn decode(&self, s: &str) -> Result<u32, Error> {
        let bad = || Error::Parse(format!("invalid element {s:?} for GF({})", self.q));
        if self.e == 1 {
            let v: u64 = s.parse().map_err(|_| bad())?;
            if v >= self.q {
                return Err(Error::ValueOutOfRange { value: v, q: self.q });
            }
            return Ok(v as u32);
        }
        let digits: Vec<u64> = if self.p <= 36 {
            s.bytes()
                .map(|c| DIGITS.iter().position(|&d| d == c).map(|v| v as u64))
                .collect::<Option<_>>()
                .ok_or_else(bad)?
        } else {
            s.split('.')
                .map(|t| t.parse().ok())
                .collect::<Option<_>>()
                .ok_or_else(bad)?
        };
        if digits.len() != self.e as usize || digits.iter().any(|&d| d >= self.p) {
            return Err(bad());
        }
        Ok(self.value(&digits))
    }
}

/// An element of a specific [`Field`]; mixed-field arithmetic is an error.
#[derive(Debug, Clone)]
pub struct FieldElement {
    field: Arc<Field>,
    value: u32,
}

impl FieldElement {
    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn coeffs(&self) -> Vec<u64> {
        self.field.coeffs(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, rhs: &FieldElement) -> Result<(), Error> {
        if *self.field == *rhs.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn add(&self, rhs: &FieldElement) -> Result<FieldElement, Error> {
        self.same_field(rhs)?;
        Ok(self.wrap(self.field.add(self.value, rhs.value)))
    }

    pub fn sub(&self, rhs: &FieldElement) -> Result<FieldElement, Error> {
        self.same_field(rhs)?;
        Ok(self.wrap(self.field.sub(self.value, rhs.value)))
    }

    pub fn mul(&self, rhs: &FieldElement) -> Result<FieldElement, Error> {
        self.same_field(rhs)?;
        Ok(self.wrap(self.field.mul(self.value, rhs.value)))
    }

    pub fn div(&self, rhs: &FieldElement) -> Result<FieldElement, Error> {
        self.same_field(rhs)?;
        Ok(self.wrap(self.field.div(self.value, rhs.value)?))
    }

    pub fn neg(&self) -> FieldElement {
        self.wrap(self.field.neg(self.value))
    }

    pub fn inv(&self) -> Result<FieldElement, Error> {
        Ok(self.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(&self, k: u64) -> FieldElement {
        self.wrap(self.field.pow(self.value, k))
    }

    fn wrap(&self, value: u32) -> FieldElement {
        FieldElement {
            field: Arc::clone(&self.field),
            value,
        }
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.value == other.value
    }
}

impl Eq for FieldElement {}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.encode(self.value))
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Reduces `poly` (ascending coefficients) modulo the monic `modulus` in place.
fn poly_reduce(p: u64, modulus: &[u64], poly: &mut Vec<u64>) {
    let e = modulus.len() - 1;
    while poly.len() > e {
        let lead = *poly.last().unwrap();
        let deg = poly.len() - 1;
        if lead != 0 {
            for (i, &m) in modulus.iter().enumerate().take(e) {
                let idx = deg - e + i;
                poly[idx] = (poly[idx] + (p - m % p) * lead) % p;
            }
        }
        poly.pop();
    }
    while poly.len() < e {
        poly.push(0);
    }
}

/// Remainder of `a` divided by monic `b`, both ascending-coefficient.
fn poly_rem(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let deg = r.len() - 1;
        if lead != 0 {
            for (i, &m) in b.iter().enumerate().take(db) {
                let idx = deg - db + i;
                r[idx] = (r[idx] + (p - m % p) * lead) % p;
            }
        }
        r.pop();
    }
    r
}

fn poly_is_zero(v: &[u64]) -> bool {
    v.iter().all(|&c| c == 0)
}

/// Trial division by every monic polynomial of degree 1..=e/2.
fn is_irreducible(p: u64, f: &[u64]) -> bool {
    let e = f.len() - 1;
    if e == 1 {
        return true;
    }
    for deg in 1..=(e / 2) {
        let mut coeffs = vec![0u64; deg];
        loop {
            let mut g = coeffs.clone();
            g.push(1);
            if poly_is_zero(&poly_rem(p, f, &g)) {
                return false;
            }
            // odometer over the non-leading coefficients
            let mut i = 0;
            loop {
                if i == deg {
                    break;
                }
                coeffs[i] += 1;
                if coeffs[i] < p {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
            if i == deg {
                break;
            }
        }
    }
    true
}

/// Lexicographically least monic irreducible of degree e, comparing the
/// ascending-degree coefficient tuple (c0, c1, ...) with c0 most significant.
fn least_irreducible(p: u64, e: u32) -> Vec<u64> {
    let e = e as usize;
    let mut coeffs = vec![0u64; e];
    loop {
        let mut f = coeffs.clone();
        f.push(1);
        if is_irreducible(p, &f) {
            return f;
        }
        // advance (c0, .., c_{e-1}) lexicographically: last coefficient fastest
        let mut i = e;
        loop {
            if i == 0 {
                unreachable!("an irreducible of degree {e} over GF({p}) exists");
            }
            i -= 1;
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
        }
    }
}
