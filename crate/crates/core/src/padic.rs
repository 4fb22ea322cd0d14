//! Fixed-precision p-adic numbers, Newton lifting, Hecke-polynomial roots and
//! the two embeddings of the quadratic field.
//!
//! A [`PadicNum`] is `p^val * unit + O(p^(val + prec))` with `unit` reduced
//! modulo `p^prec`. A value known only to vanish modulo `p^n` has `prec = 0`
//! and `val = n`, so `val + prec` is always the absolute precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quad_field::{PrimeSplit, QuadInt, QuadRat};

/// Absolute precision of an exact zero.
pub const INFINITE_PREC: i64 = i64::MAX / 4;

pub(crate) fn p_pow(p: u64, n: i64) -> BigInt {
    debug_assert!(n >= 0);
    num_traits::pow(BigInt::from(p), n as usize)
}

/// `(valuation, unit part)` of a nonzero integer.
fn split_valuation(n: &BigInt, p: u64) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

pub fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(m);
    let eg = a.extended_gcd(m);
    if !eg.gcd.is_one() {
        return None;
    }
    Some(eg.x.mod_floor(m))
}

fn pow_mod_u64(b: u64, e: u64, m: u64) -> u64 {
    let (mut r, mut b, mut e) = (1u128, (b % m) as u128, e);
    let m = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}

/// Legendre symbol `(a / p)` for an odd prime `p`.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod_u64(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Square root modulo an odd prime by Tonelli-Shanks.
pub fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mul = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = pow_mod_u64(z, q, p);
    let mut t = pow_mod_u64(a, q, p);
    let mut r = pow_mod_u64(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul(t2, t2);
            i += 1;
        }
        let b = pow_mod_u64(c, 1 << (m - i - 1), p);
        m = i;
        c = mul(b, b);
        t = mul(t, c);
        r = mul(r, b);
    }
    Some(r)
}

fn eval_poly(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn eval_derivative(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(BigInt::zero(), |acc, (i, c)| acc * x + c * BigInt::from(i))
}

/// Newton lifting of a simple root of an integer polynomial (constant term
/// first) from `seed mod p` to `mod p^prec`.
pub fn hensel_lift_integer(coeffs: &[BigInt], seed: &BigInt, p: u64, prec: u32) -> Result<BigInt> {
    let pb = BigInt::from(p);
    let seed = seed.mod_floor(&pb);
    if !eval_poly(coeffs, &seed).mod_floor(&pb).is_zero() {
        return Err(Error::NotARootModP(seed.to_string()));
    }
    if eval_derivative(coeffs, &seed).mod_floor(&pb).is_zero() {
        return Err(Error::NotSimpleRoot(seed.to_string()));
    }
    let mut x = seed;
    let mut reached = 1u32;
    while reached < prec {
        reached = (2 * reached).min(prec);
        let m = p_pow(p, reached as i64);
        let d = eval_derivative(coeffs, &x);
        let dinv = inverse_mod(&d, &m).expect("derivative is a unit");
        x = (&x - eval_poly(coeffs, &x) * dinv).mod_floor(&m);
    }
    Ok(x.mod_floor(&p_pow(p, prec as i64)))
}

/// A p-adic number with tracked precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicNum {
    p: u64,
    val: i64,
    unit: BigInt,
    prec: i64,
}

impl PadicNum {
    /// `p^val * m + O(p^(val + prec))`; `m` need not be a unit.
    pub fn from_parts(p: u64, val: i64, m: BigInt, prec: i64) -> Self {
        if prec <= 0 {
            return Self::zero(p, val.saturating_add(prec));
        }
        let modulus = p_pow(p, prec);
        let m = m.mod_floor(&modulus);
        if m.is_zero() {
            return Self::zero(p, val.saturating_add(prec));
        }
        let (v, u) = split_valuation(&m, p);
        if v == 0 {
            return Self { p, val, unit: u, prec };
        }
        let prec = prec - v;
        let unit = u.mod_floor(&p_pow(p, prec));
        Self { p, val: val + v, unit, prec }
    }

    /// Zero known modulo `p^abs_prec`.
    pub fn zero(p: u64, abs_prec: i64) -> Self {
        Self {
            p,
            val: abs_prec.min(INFINITE_PREC),
            unit: BigInt::zero(),
            prec: 0,
        }
    }

    /// Exact zero: the additive identity at every precision.
    pub fn exact_zero(p: u64) -> Self {
        Self::zero(p, INFINITE_PREC)
    }

    /// An integer with relative precision `prec`.
    pub fn from_bigint(p: u64, n: &BigInt, prec: i64) -> Self {
        if n.is_zero() {
            return Self::zero(p, prec);
        }
        let (v, u) = split_valuation(n, p);
        Self::from_parts(p, v, u, prec)
    }

    pub fn from_i64(p: u64, n: i64, prec: i64) -> Self {
        Self::from_bigint(p, &BigInt::from(n), prec)
    }

    pub fn one(p: u64, prec: i64) -> Self {
        Self::from_i64(p, 1, prec)
    }

    /// `p^e` with relative precision `prec`.
    pub fn p_power(p: u64, e: i64, prec: i64) -> Self {
        Self::from_parts(p, e, BigInt::one(), prec)
    }

    /// A rational with relative precision `prec`.
    pub fn from_rational(p: u64, r: &BigRational, prec: i64) -> Self {
        if r.is_zero() {
            return Self::zero(p, prec);
        }
        let (vn, un) = split_valuation(r.numer(), p);
        let (vd, ud) = split_valuation(r.denom(), p);
        let m = p_pow(p, prec);
        let inv = inverse_mod(&ud, &m).expect("unit part is invertible");
        Self::from_parts(p, vn - vd, un * inv, prec)
    }

    /// The integer residue `r` known modulo `p^abs_prec`.
    pub fn from_residue(p: u64, r: &BigInt, abs_prec: i64) -> Self {
        Self::from_parts(p, 0, r.clone(), abs_prec)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Valuation; for zero-to-precision values this is the absolute precision.
    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    pub fn rel_prec(&self) -> i64 {
        self.prec
    }

    pub fn abs_prec(&self) -> i64 {
        self.val.saturating_add(self.prec).min(INFINITE_PREC)
    }

    /// Zero to the precision at which it is known.
    pub fn is_zero(&self) -> bool {
        self.prec == 0
    }

    pub fn is_exact_zero(&self) -> bool {
        self.prec == 0 && self.val >= INFINITE_PREC
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    /// Valuation, or an error for zero-to-precision values.
    pub fn valuation(&self) -> Result<i64> {
        if self.is_zero() {
            Err(Error::InfiniteValuation)
        } else {
            Ok(self.val)
        }
    }

    /// Integer representative modulo `p^n`; requires `val >= 0`.
    pub fn residue(&self, n: i64) -> Result<BigInt> {
        if self.is_zero() {
            return Ok(BigInt::zero());
        }
        if self.val < 0 {
            return Err(Error::NotPIntegral(self.p));
        }
        if n <= self.val {
            return Ok(BigInt::zero());
        }
        let m = p_pow(self.p, n);
        Ok((p_pow(self.p, self.val) * &self.unit).mod_floor(&m))
    }

    /// Lowers the absolute precision by `delta` digits.
    pub fn truncate_abs(&self, delta: i64) -> Self {
        if self.is_exact_zero() || delta <= 0 {
            return self.clone();
        }
        if self.is_zero() {
            return Self::zero(self.p, self.val - delta);
        }
        Self::from_parts(self.p, self.val, self.unit.clone(), self.prec - delta)
    }

    /// Caps the absolute precision at `abs`.
    pub fn with_abs_prec(&self, abs: i64) -> Self {
        let cur = self.abs_prec();
        if abs >= cur {
            self.clone()
        } else {
            self.truncate_abs(cur - abs)
        }
    }

    /// Equality modulo the smaller of the two precisions.
    pub fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_zero()
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero { abs_prec: self.abs_prec() });
        }
        let m = p_pow(self.p, self.prec);
        let u = inverse_mod(&self.unit, &m).expect("unit");
        Ok(Self { p: self.p, val: -self.val, unit: u, prec: self.prec })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inv()?.pow(-e);
        }
        if self.is_zero() {
            if e == 0 {
                return Ok(Self::one(self.p, self.abs_prec().clamp(1, 64)));
            }
            return Ok(Self::zero(self.p, self.val.saturating_mul(e)));
        }
        let m = p_pow(self.p, self.prec);
        let unit = self.unit.modpow(&BigInt::from(e), &m);
        Ok(Self::from_parts(self.p, self.val * e, unit, self.prec))
    }

    /// The residue class modulo `p` of the unit part (0 for zero).
    pub fn leading_digit(&self) -> u64 {
        (&self.unit % BigInt::from(self.p)).to_u64().unwrap_or(0)
    }

    /// Same value as a rational number with denominator a power of `p`
    /// (the canonical lift of the stored digits).
    pub fn to_rational(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        if self.val >= 0 {
            BigRational::from_integer(p_pow(self.p, self.val) * &self.unit)
        } else {
            BigRational::new(self.unit.clone(), p_pow(self.p, -self.val))
        }
    }

    /// Signed representative of the residue modulo `p^n`, in `(-p^n/2, p^n/2]`.
    pub fn balanced_residue(&self, n: i64) -> Result<BigInt> {
        let r = self.residue(n)?;
        let m = p_pow(self.p, n);
        if &r * 2 > m {
            Ok(r - m)
        } else {
            Ok(r)
        }
    }
}

impl Add for PadicNum {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        if self.is_exact_zero() {
            return rhs;
        }
        if rhs.is_exact_zero() {
            return self;
        }
        let p = self.p;
        let abs = self.abs_prec().min(rhs.abs_prec());
        if self.is_zero() && rhs.is_zero() {
            return Self::zero(p, abs);
        }
        if self.is_zero() {
            return rhs.with_abs_prec(abs);
        }
        if rhs.is_zero() {
            return self.with_abs_prec(abs);
        }
        let vmin = self.val.min(rhs.val);
        if abs <= vmin {
            return Self::zero(p, abs);
        }
        let lift = |x: &Self| -> BigInt { p_pow(p, x.val - vmin) * &x.unit };
        let m = lift(&self) + lift(&rhs);
        Self::from_parts(p, vmin, m, abs - vmin)
    }
}

impl Neg for PadicNum {
    type Output = Self;
    fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let m = p_pow(self.p, self.prec);
        Self { unit: (m - &self.unit).mod_floor(&p_pow(self.p, self.prec)), ..self }
    }
}

impl Sub for PadicNum {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for PadicNum {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        match (self.is_zero(), rhs.is_zero()) {
            (true, true) => Self::zero(p, self.val.saturating_add(rhs.val)),
            (true, false) => Self::zero(p, self.val.saturating_add(rhs.val)),
            (false, true) => Self::zero(p, rhs.val.saturating_add(self.val)),
            (false, false) => {
                let prec = self.prec.min(rhs.prec);
                let m = p_pow(p, prec);
                let unit = (&self.unit * &rhs.unit).mod_floor(&m);
                Self { p, val: self.val + rhs.val, unit, prec }
            }
        }
    }
}

impl<'a> Add<&'a PadicNum> for &'a PadicNum {
    type Output = PadicNum;
    fn add(self, rhs: &PadicNum) -> PadicNum {
        self.clone() + rhs.clone()
    }
}

impl<'a> Sub<&'a PadicNum> for &'a PadicNum {
    type Output = PadicNum;
    fn sub(self, rhs: &PadicNum) -> PadicNum {
        self.clone() - rhs.clone()
    }
}

impl<'a> Mul<&'a PadicNum> for &'a PadicNum {
    type Output = PadicNum;
    fn mul(self, rhs: &PadicNum) -> PadicNum {
        self.clone() * rhs.clone()
    }
}

impl fmt::Display for PadicNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return write!(f, "0");
        }
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.val);
        }
        write!(f, "{}*{}^{} + O({}^{})", self.unit, self.p, self.val, self.p, self.abs_prec())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PadicRepr {
    Nonzero { p: u64, val: i64, mantissa: String, prec: i64 },
    Zero { p: u64, zero_prec: Option<i64> },
}

impl Serialize for PadicNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = if self.is_zero() {
            PadicRepr::Zero {
                p: self.p,
                zero_prec: (!self.is_exact_zero()).then_some(self.val),
            }
        } else {
            PadicRepr::Nonzero {
                p: self.p,
                val: self.val,
                mantissa: self.unit.to_string(),
                prec: self.prec,
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match PadicRepr::deserialize(d)? {
            PadicRepr::Zero { p, zero_prec } => Ok(Self::zero(p, zero_prec.unwrap_or(INFINITE_PREC))),
            PadicRepr::Nonzero { p, val, mantissa, prec } => {
                let m: BigInt = mantissa.parse().map_err(D::Error::custom)?;
                if prec <= 0 {
                    return Err(D::Error::custom("prec must be positive"));
                }
                if (&m % BigInt::from(p)).is_zero() {
                    return Err(D::Error::custom("mantissa must be a unit"));
                }
                Ok(Self::from_parts(p, val, m, prec))
            }
        }
    }
}

/// Coefficient rings: `Z_p`-algebras built from [`PadicNum`].
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn p(&self) -> u64;
    /// Multiplication by a base-ring scalar.
    fn mul_base(&self, c: &PadicNum) -> Self;
    /// The base-ring element `c`, in the ring `self` lives in.
    fn from_base_like(&self, c: PadicNum) -> Self;
    /// Zero to the working precision.
    fn is_negligible(&self) -> bool;
    fn try_inv(&self) -> Result<Self>;
    fn truncate_abs(&self, delta: i64) -> Self;
    /// Smallest absolute precision over all base-ring components.
    fn min_abs_prec(&self) -> i64;
    /// Projection to the base ring when all other components vanish.
    fn to_base(&self) -> Option<PadicNum>;

    fn zero_like(&self) -> Self {
        self.from_base_like(PadicNum::exact_zero(self.p()))
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_negligible()
    }
}

impl Coeff for PadicNum {
    fn p(&self) -> u64 {
        self.p
    }
    fn mul_base(&self, c: &PadicNum) -> Self {
        self * c
    }
    fn from_base_like(&self, c: PadicNum) -> Self {
        c
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
    fn try_inv(&self) -> Result<Self> {
        self.inv()
    }
    fn truncate_abs(&self, delta: i64) -> Self {
        PadicNum::truncate_abs(self, delta)
    }
    fn min_abs_prec(&self) -> i64 {
        self.abs_prec()
    }
    fn to_base(&self) -> Option<PadicNum> {
        Some(self.clone())
    }
}

/// The relation `alpha^2 = a*alpha - b`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadModulus<C> {
    pub a: C,
    pub b: C,
}

/// `c0 + c1*alpha` in `C[alpha]/(alpha^2 - a*alpha + b)`.
#[derive(Clone, Debug)]
pub struct QuadExt<C> {
    c0: C,
    c1: C,
    modulus: Arc<QuadModulus<C>>,
}

impl<C: Coeff> PartialEq for QuadExt<C> {
    fn eq(&self, other: &Self) -> bool {
        self.c0 == other.c0 && self.c1 == other.c1 && *self.modulus == *other.modulus
    }
}

impl<C: Coeff> QuadExt<C> {
    pub fn new(c0: C, c1: C, modulus: Arc<QuadModulus<C>>) -> Self {
        Self { c0, c1, modulus }
    }

    /// The root `alpha` of `X^2 - a X + b`.
    pub fn generator(a: C, b: C) -> Self {
        let zero = a.zero_like();
        let prec = b.min_abs_prec().clamp(1, 4096);
        let one = a.from_base_like(PadicNum::one(a.p(), prec));
        Self { c0: zero, c1: one, modulus: Arc::new(QuadModulus { a, b }) }
    }

    pub fn c0(&self) -> &C {
        &self.c0
    }

    pub fn c1(&self) -> &C {
        &self.c1
    }

    pub fn modulus(&self) -> &Arc<QuadModulus<C>> {
        &self.modulus
    }

    pub fn embed(&self, c: C) -> Self {
        let zero = c.zero_like();
        Self { c0: c, c1: zero, modulus: self.modulus.clone() }
    }

    /// `alpha -> a - alpha`.
    pub fn conj(&self) -> Self {
        Self {
            c0: self.c0.clone() + self.modulus.a.clone() * self.c1.clone(),
            c1: -self.c1.clone(),
            modulus: self.modulus.clone(),
        }
    }

    pub fn norm(&self) -> C {
        let (x0, x1) = (self.c0.clone(), self.c1.clone());
        let m = &self.modulus;
        x0.clone() * x0.clone() + m.a.clone() * x0 * x1.clone() + m.b.clone() * x1.clone() * x1
    }

    pub fn trace(&self) -> C {
        self.c0.clone() + self.c0.clone() + self.modulus.a.clone() * self.c1.clone()
    }
}

impl<C: Coeff> Add for QuadExt<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { c0: self.c0 + rhs.c0, c1: self.c1 + rhs.c1, modulus: self.modulus }
    }
}

impl<C: Coeff> Sub for QuadExt<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { c0: self.c0 - rhs.c0, c1: self.c1 - rhs.c1, modulus: self.modulus }
    }
}

impl<C: Coeff> Neg for QuadExt<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { c0: -self.c0, c1: -self.c1, modulus: self.modulus }
    }
}

impl<C: Coeff> Mul for QuadExt<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert!(*self.modulus == *rhs.modulus);
        let m = self.modulus.clone();
        let x1y1 = self.c1.clone() * rhs.c1.clone();
        let c0 = self.c0.clone() * rhs.c0.clone() - m.b.clone() * x1y1.clone();
        let c1 = self.c0 * rhs.c1 + self.c1 * rhs.c0 + m.a.clone() * x1y1;
        Self { c0, c1, modulus: m }
    }
}

impl<C: Coeff> Coeff for QuadExt<C> {
    fn p(&self) -> u64 {
        self.c0.p()
    }
    fn mul_base(&self, c: &PadicNum) -> Self {
        Self { c0: self.c0.mul_base(c), c1: self.c1.mul_base(c), modulus: self.modulus.clone() }
    }
    fn from_base_like(&self, c: PadicNum) -> Self {
        let c0 = self.c0.from_base_like(c);
        self.embed(c0)
    }
    fn is_negligible(&self) -> bool {
        self.c0.is_negligible() && self.c1.is_negligible()
    }
    fn try_inv(&self) -> Result<Self> {
        let n_inv = self.norm().try_inv()?;
        let c = self.conj();
        Ok(Self { c0: c.c0 * n_inv.clone(), c1: c.c1 * n_inv, modulus: c.modulus })
    }
    fn truncate_abs(&self, delta: i64) -> Self {
        Self {
            c0: self.c0.truncate_abs(delta),
            c1: self.c1.truncate_abs(delta),
            modulus: self.modulus.clone(),
        }
    }
    fn min_abs_prec(&self) -> i64 {
        self.c0.min_abs_prec().min(self.c1.min_abs_prec())
    }
    fn to_base(&self) -> Option<PadicNum> {
        if self.c1.is_negligible() {
            self.c0.to_base()
        } else {
            None
        }
    }
}

/// Reciprocal roots of `1 - a x + p^(k-1) x^2`.
#[derive(Clone, Debug, PartialEq)]
pub enum RootPair {
    /// Two roots in `Q_p`, smaller valuation first.
    Split { roots: [PadicNum; 2], slopes: [Rational64; 2] },
    /// Conjugate roots `alpha`, `a - alpha` in a quadratic extension.
    NonSplit { root: QuadExt<PadicNum>, slopes: [Rational64; 2] },
}

impl RootPair {
    pub fn kind(&self) -> &'static str {
        match self {
            RootPair::Split { .. } => "split",
            RootPair::NonSplit { .. } => "nonsplit",
        }
    }

    pub fn slopes(&self) -> [Rational64; 2] {
        match self {
            RootPair::Split { slopes, .. } | RootPair::NonSplit { slopes, .. } => *slopes,
        }
    }

    pub fn split_roots(&self) -> Option<(&PadicNum, &PadicNum)> {
        match self {
            RootPair::Split { roots, .. } => Some((&roots[0], &roots[1])),
            RootPair::NonSplit { .. } => None,
        }
    }

    /// Both roots in the extension ring (also for the split case, as constants).
    pub fn roots_in_ext(&self) -> Option<(QuadExt<PadicNum>, QuadExt<PadicNum>)> {
        match self {
            RootPair::Split { .. } => None,
            RootPair::NonSplit { root, .. } => Some((root.clone(), root.conj())),
        }
    }

    /// Sum and product of the roots, as base-ring values.
    pub fn sum_and_product(&self) -> (PadicNum, PadicNum) {
        match self {
            RootPair::Split { roots, .. } => {
                (&roots[0] + &roots[1], &roots[0] * &roots[1])
            }
            RootPair::NonSplit { root, .. } => {
                let m = root.modulus();
                (m.a.clone(), m.b.clone())
            }
        }
    }
}

/// Simple root of a polynomial with p-integral coefficients (constant term
/// first), lifted from `seed mod p` to absolute precision
/// `min(precision, coefficient precision)`.
pub fn hensel_root(coeffs: &[PadicNum], seed: u64, precision: u32) -> Result<PadicNum> {
    let p = coeffs
        .first()
        .map(|c| c.p())
        .ok_or_else(|| Error::InvalidInput("empty polynomial".into()))?;
    let target = coeffs
        .iter()
        .map(|c| c.abs_prec())
        .fold(precision as i64, i64::min);
    if target < 1 {
        return Err(Error::InsufficientPrecision {
            required: 1,
            context: "polynomial coefficients".into(),
        });
    }
    let ints = coeffs
        .iter()
        .map(|c| c.residue(target))
        .collect::<Result<Vec<_>>>()?;
    let r = hensel_lift_integer(&ints, &BigInt::from(seed), p, target as u32)?;
    Ok(PadicNum::from_residue(p, &r, target))
}

/// Reciprocal roots of `1 - a x + p^(k-1) x^2`, i.e. roots of
/// `y^2 - a y + p^(k-1)`, ordered by valuation.
pub fn hecke_roots(a: &PadicNum, k: i64, precision: u32) -> Result<RootPair> {
    if k < 2 {
        return Err(Error::InvalidWeights(format!("weight {k} < 2")));
    }
    let p = a.p();
    let m = precision as i64;
    let km1 = k - 1;
    let pk = PadicNum::p_power(p, km1, m);

    if a.is_zero() && 2 * a.abs_prec() < km1 {
        return Err(Error::InsufficientPrecision {
            required: (km1 + 1) / 2,
            context: "Hecke eigenvalue too imprecise to separate slopes".into(),
        });
    }

    if !a.is_zero() && 2 * a.val() < km1 {
        let sigma = a.val();
        let u = PadicNum::from_parts(p, 0, a.unit().clone(), a.rel_prec());
        let work = m.min(u.rel_prec());
        let c = PadicNum::p_power(p, km1 - 2 * sigma, work);
        let coeffs = [c, -u.clone(), PadicNum::one(p, work)];
        let z = hensel_root(&coeffs, u.leading_digit(), work as u32)?;
        let root0 = PadicNum::p_power(p, sigma, m) * z;
        let root1 = pk.div(&root0)?;
        let slopes = [Rational64::from_integer(sigma), Rational64::from_integer(km1 - sigma)];
        return Ok(RootPair::Split { roots: [root0, root1], slopes });
    }

    let half = Rational64::new(km1, 2);
    let slopes = [half, half];
    let four = PadicNum::from_i64(p, 4, m);
    let disc = a * a - four * pk.clone();
    if disc.is_zero() {
        return Err(Error::InsufficientPrecision {
            required: disc.abs_prec() + 1,
            context: "discriminant of the Hecke polynomial vanishes to working precision".into(),
        });
    }
    let dv = disc.val();
    let du = disc.unit().clone();
    let is_square = dv % 2 == 0 && legendre((&du % BigInt::from(p)).to_u64().unwrap(), p) == 1;
    if !is_square {
        let root = QuadExt::generator(a.clone(), pk);
        return Ok(RootPair::NonSplit { root, slopes });
    }
    let work = disc.rel_prec();
    let seed = sqrt_mod_prime((&du % BigInt::from(p)).to_u64().unwrap(), p).unwrap();
    let unit = PadicNum::from_parts(p, 0, du, work);
    let coeffs = [-unit, PadicNum::zero(p, INFINITE_PREC), PadicNum::one(p, work)];
    let s = hensel_root(&coeffs, seed, work as u32)?;
    let sqrt_disc = PadicNum::p_power(p, dv / 2, work) * s;
    let half_p = PadicNum::from_i64(p, 2, m).inv()?;
    let r0 = (a + &sqrt_disc) * half_p.clone();
    let r1 = (a - &sqrt_disc) * half_p;
    let mut roots = [r0, r1];
    roots.sort_by(|x, y| {
        x.val()
            .cmp(&y.val())
            .then_with(|| x.leading_digit().cmp(&y.leading_digit()))
            .then_with(|| x.unit().cmp(y.unit()))
    });
    Ok(RootPair::Split { roots, slopes })
}

/// `iota_pi` on integral elements: `w` goes to the residue fixed by the split.
pub fn embed_int(v: &QuadInt, s: &PrimeSplit) -> PadicNum {
    let m = s.precision() as i64;
    let r = BigInt::from(*v.x()) + BigInt::from(*v.y()) * s.omega_residue();
    PadicNum::from_residue(s.p(), &r, m)
}

/// `iota_pi'`, i.e. `iota_pi` of the conjugate.
pub fn embed_conj_int(v: &QuadInt, s: &PrimeSplit) -> PadicNum {
    embed_int(&v.conjugate(), s)
}

/// `iota_pi` on elements with p-integral rational coordinates.
pub fn embed(v: &QuadRat, s: &PrimeSplit) -> Result<PadicNum> {
    let p = s.p();
    let m = s.precision() as i64;
    let den = v.x().denom().lcm(v.y().denom());
    if (&den % BigInt::from(p)).is_zero() {
        return Err(Error::NotPIntegral(p));
    }
    let xn = v.x().numer() * (&den / v.x().denom());
    let yn = v.y().numer() * (&den / v.y().denom());
    let modulus = p_pow(p, m);
    let inv = inverse_mod(&den, &modulus).expect("p does not divide the denominator");
    let r = (xn + yn * s.omega_residue()) * inv;
    Ok(PadicNum::from_residue(p, &r, m))
}

pub fn embed_conj(v: &QuadRat, s: &PrimeSplit) -> Result<PadicNum> {
    embed(&v.conjugate(), s)
}

/// `z = mu * one_unit` with `mu^(p-1) = 1` and `one_unit = 1 mod p`.
pub fn teichmuller(z: &PadicNum) -> Result<(PadicNum, PadicNum)> {
    if !z.is_unit() {
        return Err(Error::NotAUnit(z.to_string()));
    }
    let p = z.p();
    let prec = z.rel_prec();
    let mut mu = z.clone();
    for _ in 0..prec {
        mu = mu.pow(p as i64)?;
    }
    let one_unit = z.div(&mu)?;
    Ok((mu, one_unit))
}

/// Compares two base-ring values by valuation (zero is largest).
pub fn cmp_valuation(a: &PadicNum, b: &PadicNum) -> Ordering {
    a.val().cmp(&b.val())
}

/// Absolute value of an integer residue, used for balanced printing.
pub fn abs_big(n: &BigInt) -> BigInt {
    n.abs()
}
