//! Real quadratic fields `K = Q(sqrt D)`: elements in integral-basis
//! coordinates, the totally positive cone, fundamental units and split primes.
//!
//! Elements are written `x + y*w` with `w = sqrt D` when `D = 2, 3 mod 4` and
//! `w = (1 + sqrt D)/2` when `D = 1 mod 4`. The first real embedding sends
//! `sqrt D` to the positive root. All sign decisions are exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic;

/// Scalars usable as coordinates of a quadratic-field element.
pub trait QuadScalar: Clone + fmt::Debug + Ord + num_traits::Num + Signed + FromPrimitive {}
impl<T: Clone + fmt::Debug + Ord + num_traits::Num + Signed + FromPrimitive> QuadScalar for T {}

/// Identifies the field an element lives in. `Copy`, so elements can carry it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldTag {
    d: i64,
}

impl FieldTag {
    pub fn d(self) -> i64 {
        self.d
    }

    /// True when the integral basis is `{1, (1 + sqrt D)/2}`.
    pub fn half_basis(self) -> bool {
        self.d.rem_euclid(4) == 1
    }

    pub fn basis_shift(self) -> u8 {
        u8::from(self.half_basis())
    }
}

/// `x + y*w` in integral-basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadElement<T> {
    field: FieldTag,
    x: T,
    y: T,
}

impl<T: QuadScalar> QuadElement<T> {
    pub fn new(field: FieldTag, x: T, y: T) -> Self {
        Self { field, x, y }
    }

    pub fn from_int(field: FieldTag, n: T) -> Self {
        Self::new(field, n, T::zero())
    }

    pub fn zero(field: FieldTag) -> Self {
        Self::from_int(field, T::zero())
    }

    pub fn one(field: FieldTag) -> Self {
        Self::from_int(field, T::one())
    }

    /// The second basis element `w`.
    pub fn omega(field: FieldTag) -> Self {
        Self::new(field, T::zero(), T::one())
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn x(&self) -> &T {
        &self.x
    }

    pub fn y(&self) -> &T {
        &self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    fn d(&self) -> T {
        T::from_i64(self.field.d).expect("D fits the scalar type")
    }

    pub fn conjugate(&self) -> Self {
        if self.field.half_basis() {
            // w' = 1 - w
            Self::new(self.field, self.x.clone() + self.y.clone(), -self.y.clone())
        } else {
            Self::new(self.field, self.x.clone(), -self.y.clone())
        }
    }

    pub fn trace(&self) -> T {
        let two_x = self.x.clone() + self.x.clone();
        if self.field.half_basis() {
            two_x + self.y.clone()
        } else {
            two_x
        }
    }

    pub fn norm(&self) -> T {
        let (x, y) = (self.x.clone(), self.y.clone());
        if self.field.half_basis() {
            let four = T::from_i64(4).unwrap();
            // (D - 1)/4 is an integer here
            let c = (self.d() - T::one()) / four;
            x.clone() * x.clone() + x * y.clone() - c * y.clone() * y
        } else {
            x.clone() * x - self.d() * y.clone() * y
        }
    }

    /// Coordinates `(a, b)` with `self = (a + b*sqrt D)/2`.
    pub fn doubled_sqrt_coords(&self) -> (T, T) {
        let two = T::from_i64(2).unwrap();
        if self.field.half_basis() {
            (self.trace(), self.y.clone())
        } else {
            (self.trace(), two * self.y.clone())
        }
    }

    /// Exact sign of the first real embedding.
    pub fn sign_first(&self) -> Ordering {
        let (a, b) = self.doubled_sqrt_coords();
        sign_of_sum_with_sqrt(&a, &b, &self.d())
    }

    /// Exact sign of the second real embedding.
    pub fn sign_second(&self) -> Ordering {
        self.conjugate().sign_first()
    }

    /// Both real embeddings are positive. Decided from trace and norm:
    /// a nonzero element is totally positive iff trace > 0 and norm > 0.
    pub fn is_totally_positive(&self) -> bool {
        self.trace().is_positive() && self.norm().is_positive()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.field);
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

/// Sign of `a + b*sqrt(d)` for a non-square `d > 0`.
fn sign_of_sum_with_sqrt<T: QuadScalar>(a: &T, b: &T, d: &T) -> Ordering {
    let sa = a.cmp(&T::zero());
    let sb = b.cmp(&T::zero());
    if sb == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    // opposite signs: compare a^2 with d*b^2
    let lhs = a.clone() * a.clone();
    let rhs = d.clone() * b.clone() * b.clone();
    match lhs.cmp(&rhs) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

impl<T: QuadScalar> Add for QuadElement<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.field, rhs.field);
        Self::new(self.field, self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: QuadScalar> Sub for QuadElement<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.field, rhs.field);
        Self::new(self.field, self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: QuadScalar> Neg for QuadElement<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(self.field, -self.x, -self.y)
    }
}

impl<T: QuadScalar> Mul for QuadElement<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.field, rhs.field);
        let (x1, y1, x2, y2) = (self.x, self.y, rhs.x, rhs.y);
        let cross = x1.clone() * y2.clone() + x2.clone() * y1.clone();
        let yy = y1 * y2;
        let d = T::from_i64(self.field.d).unwrap();
        if self.field.half_basis() {
            // w^2 = w + (D - 1)/4
            let c = (d - T::one()) / T::from_i64(4).unwrap();
            Self::new(self.field, x1 * x2 + c * yy.clone(), cross + yy)
        } else {
            Self::new(self.field, x1 * x2 + d * yy, cross)
        }
    }
}

impl<'a, T: QuadScalar> Mul<&'a QuadElement<T>> for &'a QuadElement<T> {
    type Output = QuadElement<T>;
    fn mul(self, rhs: &QuadElement<T>) -> QuadElement<T> {
        self.clone() * rhs.clone()
    }
}

/// Expansion indices order by trace, then by the `y` coordinate.
impl<T: QuadScalar> Ord for QuadElement<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.trace()
            .cmp(&other.trace())
            .then_with(|| self.y.cmp(&other.y))
            .then_with(|| self.x.cmp(&other.x))
            .then_with(|| self.field.cmp(&other.field))
    }
}

impl<T: QuadScalar> PartialOrd for QuadElement<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: QuadScalar + fmt::Display> fmt::Display for QuadElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = if self.field.half_basis() { "w" } else { "sqrt" };
        if self.field.half_basis() {
            write!(f, "{} + {}*{}", self.x, self.y, w)
        } else {
            write!(f, "{} + {}*sqrt{}", self.x, self.y, self.field.d)
        }
    }
}

impl QuadElement<i64> {
    /// Exact quotient in the ring of integers, if it exists.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        let n = rhs.norm();
        if n == 0 {
            return None;
        }
        let num = self * &rhs.conjugate();
        if num.x % n == 0 && num.y % n == 0 {
            Some(Self::new(self.field, num.x / n, num.y / n))
        } else {
            None
        }
    }

    pub fn divides(&self, v: &Self) -> bool {
        v.checked_div(self).is_some()
    }

    pub fn to_rational(&self) -> QuadElement<BigRational> {
        QuadElement::new(
            self.field,
            BigRational::from_integer(BigInt::from(self.x)),
            BigRational::from_integer(BigInt::from(self.y)),
        )
    }
}

impl QuadElement<BigRational> {
    /// Integral elements convert back to lattice coordinates.
    pub fn to_integral(&self) -> Option<QuadElement<i64>> {
        if !self.x.is_integer() || !self.y.is_integer() {
            return None;
        }
        Some(QuadElement::new(
            self.field,
            self.x.to_integer().to_i64()?,
            self.y.to_integer().to_i64()?,
        ))
    }

    /// `[x_num, x_den, y_num, y_den]`.
    pub fn to_quadruple(&self) -> [BigInt; 4] {
        [
            self.x.numer().clone(),
            self.x.denom().clone(),
            self.y.numer().clone(),
            self.y.denom().clone(),
        ]
    }

    pub fn from_quadruple(field: FieldTag, q: &[BigInt; 4]) -> Result<Self> {
        if q[1].is_zero() || q[3].is_zero() {
            return Err(Error::InvalidInput("zero denominator in quadruple".into()));
        }
        Ok(Self::new(
            field,
            BigRational::new(q[0].clone(), q[1].clone()),
            BigRational::new(q[2].clone(), q[3].clone()),
        ))
    }
}

/// `[x_num, x_den, y_num, y_den]` in JSON: integers, or decimal strings
/// beyond 64 bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quadruple(pub [BigInt; 4]);

impl Serialize for Quadruple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(4))?;
        for n in &self.0 {
            match n.to_i64() {
                Some(i) => seq.serialize_element(&i)?,
                None => seq.serialize_element(&n.to_string())?,
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Quadruple {
    fn deserialize<De: serde::Deserializer<'de>>(de: De) -> std::result::Result<Self, De::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Int(i64),
            Text(String),
        }
        let raw = <[Entry; 4]>::deserialize(de)?;
        let mut out: [BigInt; 4] = Default::default();
        for (slot, e) in out.iter_mut().zip(raw) {
            *slot = match e {
                Entry::Int(i) => BigInt::from(i),
                Entry::Text(t) => t.parse().map_err(serde::de::Error::custom)?,
            };
        }
        Ok(Quadruple(out))
    }
}

/// Lattice points of the ring of integers.
pub type QuadInt = QuadElement<i64>;
/// General field elements with rational coordinates.
pub type QuadRat = QuadElement<BigRational>;

/// A real quadratic field together with its fundamental unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadField {
    tag: FieldTag,
    disc: i64,
    fund_unit: QuadInt,
    has_norm_minus_one: bool,
}

impl QuadField {
    /// Builds `Q(sqrt d)`, requiring a unit of norm -1.
    pub fn new(d: i64) -> Result<Self> {
        Self::with_options(d, true)
    }

    pub fn with_options(d: i64, require_norm_minus_one: bool) -> Result<Self> {
        if d <= 1 {
            return Err(Error::InvalidDiscriminant(d));
        }
        if !is_squarefree(d) {
            return Err(Error::NotSquarefree(d));
        }
        let tag = FieldTag { d };
        let disc = if tag.half_basis() { d } else { 4 * d };
        let fund_unit = fundamental_unit(tag)?;
        let has_norm_minus_one = fund_unit.norm() == -1;
        if require_norm_minus_one && !has_norm_minus_one {
            return Err(Error::NoUnitOfNormMinusOne(d));
        }
        Ok(Self {
            tag,
            disc,
            fund_unit,
            has_norm_minus_one,
        })
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn d(&self) -> i64 {
        self.tag.d
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn basis_shift(&self) -> u8 {
        self.tag.basis_shift()
    }

    pub fn fund_unit(&self) -> &QuadInt {
        &self.fund_unit
    }

    pub fn has_norm_minus_one(&self) -> bool {
        self.has_norm_minus_one
    }

    pub fn int(&self, x: i64, y: i64) -> QuadInt {
        QuadInt::new(self.tag, x, y)
    }

    /// Integral totally positive elements of trace at most `trace_bound`,
    /// sorted by `(trace, y)`. Zero is prepended when `include_zero` is set.
    ///
    /// Writing an element as `(t + b*sqrt D)/2`, total positivity is
    /// `D b^2 < t^2`, which bounds `|b|` by `t/sqrt D`.
    pub fn enumerate_totally_positive(&self, trace_bound: u64, include_zero: bool) -> Vec<QuadInt> {
        let mut out = Vec::new();
        if include_zero {
            out.push(QuadInt::zero(self.tag));
        }
        let d = self.tag.d;
        for t in 1..=trace_bound as i64 {
            if self.tag.half_basis() {
                // trace = 2x + y, b = y
                let ymax = ((t * t - 1) / d).sqrt();
                for y in -ymax..=ymax {
                    if (t - y) % 2 != 0 || d * y * y >= t * t {
                        continue;
                    }
                    out.push(QuadInt::new(self.tag, (t - y) / 2, y));
                }
            } else {
                if t % 2 != 0 {
                    continue;
                }
                let x = t / 2;
                // b = 2y, need D y^2 < x^2
                let ymax = ((x * x - 1) / d).sqrt();
                for y in -ymax..=ymax {
                    if d * y * y < x * x {
                        out.push(QuadInt::new(self.tag, x, y));
                    }
                }
            }
        }
        out
    }

    /// Rational enclosure `lo < sqrt D < hi` with denominator `10^8`.
    pub fn sqrt_d_enclosure(&self) -> (BigRational, BigRational) {
        let scale = BigInt::from(10u64.pow(8));
        let s = (BigInt::from(self.tag.d) * &scale * &scale).sqrt();
        (
            BigRational::new(s.clone(), scale.clone()),
            BigRational::new(s + 1, scale),
        )
    }

    /// Rational lower bound on the smaller real embedding and upper bound on
    /// the larger one.
    pub fn embedding_enclosure(&self, v: &QuadInt) -> (BigRational, BigRational) {
        let (lo, hi) = self.sqrt_d_enclosure();
        let (a, b) = v.doubled_sqrt_coords();
        let a = BigRational::from_integer(BigInt::from(a));
        let b = BigRational::from_integer(BigInt::from(b.abs()));
        let two = BigRational::from_integer(BigInt::from(2));
        let min_lower = (&a - &b * &hi) / &two;
        let max_upper = (&a + &b * &hi) / &two;
        let _ = lo;
        (min_lower, max_upper)
    }

    /// Factors `p = pi * pi'` and fixes the `p`-adic embedding; see
    /// [`PrimeSplit`].
    pub fn split_prime(&self, p: u64, precision: u32) -> Result<PrimeSplit> {
        PrimeSplit::new(self.clone(), p, precision)
    }
}

impl Serialize for QuadField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("QuadField", 2)?;
        st.serialize_field("D", &self.tag.d)?;
        st.serialize_field("basis_shift", &self.basis_shift())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for QuadField {
    fn deserialize<De: serde::Deserializer<'de>>(de: De) -> std::result::Result<Self, De::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "D")]
            d: i64,
            basis_shift: Option<u8>,
        }
        let raw = Raw::deserialize(de)?;
        let field = QuadField::with_options(raw.d, false).map_err(serde::de::Error::custom)?;
        if let Some(shift) = raw.basis_shift {
            if shift != field.basis_shift() {
                return Err(serde::de::Error::custom("basis_shift does not match D"));
            }
        }
        Ok(field)
    }
}

pub fn is_squarefree(n: i64) -> bool {
    let mut n = n.abs();
    let mut f = 2;
    while f * f <= n {
        if n % (f * f) == 0 {
            return false;
        }
        if n % f == 0 {
            n /= f;
        }
        f += 1;
    }
    true
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut f = 2u64;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 1;
    }
    true
}

/// `floor((pp + sqrt d)/q)` for non-square `d`.
fn floor_quadratic(pp: &BigInt, q: &BigInt, d: &BigInt) -> BigInt {
    let s = d.sqrt();
    if q.is_positive() {
        (pp + &s).div_floor(q)
    } else {
        let qa = -q;
        let num: BigInt = -pp - &s - 1;
        num.div_floor(&qa)
    }
}

/// Fundamental unit `> 1`, read off the continued fraction of `w`.
///
/// For each convergent `p/q` of `w` the element `p - q*w'` is tested; the
/// first one of norm `+-1` is the fundamental unit.
fn fundamental_unit(tag: FieldTag) -> Result<QuadInt> {
    let d = BigInt::from(tag.d);
    let (mut pp, mut q) = if tag.half_basis() {
        (BigInt::one(), BigInt::from(2))
    } else {
        (BigInt::zero(), BigInt::one())
    };
    let (mut p_prev, mut p_cur) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::zero());
    for _ in 0..10_000 {
        let a = floor_quadratic(&pp, &q, &d);
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);

        let (x, y) = if tag.half_basis() {
            (&p_cur - &q_cur, q_cur.clone())
        } else {
            (p_cur.clone(), q_cur.clone())
        };
        let cand = QuadElement::<BigInt>::new(tag, x, y);
        if cand.norm().abs().is_one() {
            let x = cand.x().to_i64();
            let y = cand.y().to_i64();
            return match (x, y) {
                (Some(x), Some(y)) => Ok(QuadInt::new(tag, x, y)),
                _ => Err(Error::InvalidInput(format!(
                    "fundamental unit of Q(sqrt {}) does not fit in 64-bit coordinates",
                    tag.d
                ))),
            };
        }
        let p_new = &a * &q - &pp;
        let q_new = (&d - &p_new * &p_new) / &q;
        pp = p_new;
        q = q_new;
    }
    Err(Error::InvalidInput(format!("continued fraction of Q(sqrt {}) did not close", tag.d)))
}

/// A split prime `p = pi * pi'` with the `p`-adic embedding it determines.
///
/// `sqrt_d` is a square root of `D` modulo `p^precision`; the embedding
/// `iota_pi` sends `sqrt D` to it. Its sign is chosen so that
/// `iota_pi(pi_gen)` has valuation 1. `pi_conj_gen` is the Galois conjugate
/// of `pi_gen`, so `pi_gen * pi_conj_gen = p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeSplit {
    field: QuadField,
    p: u64,
    precision: u32,
    sqrt_d: BigInt,
    omega_residue: BigInt,
    pi_gen: QuadInt,
    pi_conj_gen: QuadInt,
    pi_min_lower: BigRational,
    pi_max_upper: BigRational,
}

const GENERATOR_SEARCH_BOUND: u64 = 100_000;

impl PrimeSplit {
    pub fn new(field: QuadField, p: u64, precision: u32) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be positive".into()));
        }
        let d = field.d();
        let d_mod = d.rem_euclid(p as i64) as u64;
        if d_mod == 0 || padic::legendre(d_mod, p) != 1 {
            return Err(Error::PrimeDoesNotSplit { d, p });
        }
        let pi_gen = find_generator(&field, p)?;
        let pi_conj_gen = pi_gen.conjugate();

        let root = padic::sqrt_mod_prime(d_mod, p).expect("D is a square mod p");
        let omega_mod_p = |s: u64| -> u64 {
            if field.tag().half_basis() {
                let inv2 = (p + 1) / 2;
                ((1 + s) % p) * inv2 % p
            } else {
                s % p
            }
        };
        let embed_mod_p = |s: u64| -> u64 {
            let w = omega_mod_p(s) as i128;
            let v = pi_gen.x as i128 + pi_gen.y as i128 * w;
            v.rem_euclid(p as i128) as u64
        };
        let root = if embed_mod_p(root) == 0 { root } else { p - root };
        debug_assert_eq!(embed_mod_p(root), 0);

        let modulus = BigInt::from(p).pow(precision);
        let coeffs = [BigInt::from(-d), BigInt::zero(), BigInt::one()];
        let sqrt_d = padic::hensel_lift_integer(&coeffs, &BigInt::from(root), p, precision)?;
        let omega_residue = if field.tag().half_basis() {
            let inv2 = padic::inverse_mod(&BigInt::from(2), &modulus).expect("p odd");
            ((BigInt::one() + &sqrt_d) * inv2).mod_floor(&modulus)
        } else {
            sqrt_d.clone()
        };
        let (pi_min_lower, pi_max_upper) = field.embedding_enclosure(&pi_gen);
        Ok(Self {
            field,
            p,
            precision,
            sqrt_d,
            omega_residue,
            pi_gen,
            pi_conj_gen,
            pi_min_lower,
            pi_max_upper,
        })
    }

    pub fn field(&self) -> &QuadField {
        &self.field
    }

    pub fn tag(&self) -> FieldTag {
        self.field.tag()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn sqrt_d(&self) -> &BigInt {
        &self.sqrt_d
    }

    /// Image of the basis element `w` under `iota_pi`, modulo `p^precision`.
    pub fn omega_residue(&self) -> &BigInt {
        &self.omega_residue
    }

    pub fn pi(&self) -> &QuadInt {
        &self.pi_gen
    }

    pub fn pi_conj(&self) -> &QuadInt {
        &self.pi_conj_gen
    }

    pub fn p_elem(&self) -> QuadInt {
        QuadInt::from_int(self.tag(), self.p as i64)
    }

    /// Lower bound on `min(pi_1, pi_2)` (shared by `pi'`).
    pub fn pi_min_lower(&self) -> &BigRational {
        &self.pi_min_lower
    }

    /// Upper bound on `max(pi_1, pi_2)` (shared by `pi'`).
    pub fn pi_max_upper(&self) -> &BigRational {
        &self.pi_max_upper
    }

    /// Same prime and field at another precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.field.clone(), self.p, precision)
    }

    /// Number of times `pi` divides `v`.
    pub fn pi_valuation(&self, v: &QuadInt) -> Result<u32> {
        valuation_by(v, &self.pi_gen)
    }

    /// Number of times `pi'` divides `v`.
    pub fn pi_conj_valuation(&self, v: &QuadInt) -> Result<u32> {
        valuation_by(v, &self.pi_conj_gen)
    }

    /// Same prime data at another precision, re-serialized as JSON.
    pub fn summary(&self) -> SplitSummary {
        SplitSummary {
            schema: crate::SCHEMA.to_string(),
            d: self.field.d(),
            p: self.p,
            prec: self.precision,
            sqrt_d_mod: self.sqrt_d.to_string(),
            pi_gen: Quadruple(self.pi_gen.to_rational().to_quadruple()),
            pi_conj_gen: Quadruple(self.pi_conj_gen.to_rational().to_quadruple()),
        }
    }
}

fn valuation_by(v: &QuadInt, pi: &QuadInt) -> Result<u32> {
    if v.is_zero() {
        return Err(Error::InfiniteValuation);
    }
    let mut n = 0;
    let mut cur = v.clone();
    while let Some(q) = cur.checked_div(pi) {
        cur = q;
        n += 1;
    }
    Ok(n)
}

/// JSON view of a [`PrimeSplit`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SplitSummary {
    pub schema: String,
    #[serde(rename = "D")]
    pub d: i64,
    pub p: u64,
    pub prec: u32,
    pub sqrt_d_mod: String,
    pub pi_gen: Quadruple,
    pub pi_conj_gen: Quadruple,
}

/// Totally positive generator of a prime above `p`, reduced so that
/// `1 <= pi_1/pi_2 < eps_1^4`.
fn find_generator(field: &QuadField, p: u64) -> Result<QuadInt> {
    let tag = field.tag();
    let d = field.d() as i128;
    let pi = p as i128;
    let from_sqrt_coords = |a: i128, b: i128| -> QuadInt {
        // a + b sqrt D
        if tag.half_basis() {
            QuadInt::new(tag, (a - b) as i64, (2 * b) as i64)
        } else {
            QuadInt::new(tag, a as i64, b as i64)
        }
    };
    let make_positive = |c: QuadInt| -> Option<QuadInt> {
        let c = if c.norm() < 0 {
            if !field.has_norm_minus_one() {
                return None;
            }
            c * field.fund_unit().clone()
        } else {
            c
        };
        if c.sign_first() == Ordering::Less {
            Some(-c)
        } else {
            Some(c)
        }
    };

    let mut found = None;
    'outer: for b in 1..=GENERATOR_SEARCH_BOUND as i128 {
        for target in [d * b * b + pi, d * b * b - pi] {
            if target < 0 {
                continue;
            }
            let a = target.sqrt();
            if a * a == target {
                if let Some(c) = make_positive(from_sqrt_coords(a, b)) {
                    found = Some(c);
                    break 'outer;
                }
            }
        }
    }
    if found.is_none() && tag.half_basis() {
        // half-integral coordinates (a + b sqrt D)/2 with a, b odd
        'half: for b in (1..=2 * GENERATOR_SEARCH_BOUND as i128).step_by(2) {
            for target in [d * b * b + 4 * pi, d * b * b - 4 * pi] {
                if target < 0 {
                    continue;
                }
                let a = target.sqrt();
                if a * a == target && a % 2 == 1 {
                    let c = QuadInt::new(tag, ((a - b) / 2) as i64, b as i64);
                    if let Some(c) = make_positive(c) {
                        found = Some(c);
                        break 'half;
                    }
                }
            }
        }
    }
    let mut pi_gen = found.ok_or(Error::GeneratorSearchFailed {
        p,
        bound: GENERATOR_SEARCH_BOUND,
    })?;

    let eps = field.fund_unit().clone();
    let eps2 = eps.clone() * eps.clone();
    let eps2_inv = eps2.conjugate();
    let eps4 = eps2.clone() * eps2.clone();
    let p_elem = QuadInt::from_int(tag, p as i64);
    for _ in 0..1000 {
        // pi_1/pi_2 >= 1  <=>  pi_1 - pi_2 >= 0  <=>  y >= 0
        if pi_gen.y() < &0 {
            pi_gen = pi_gen * eps2.clone();
            continue;
        }
        // pi_1/pi_2 = pi_1^2/p < eps_1^4
        let gap = p_elem.clone() * eps4.clone() - pi_gen.clone() * pi_gen.clone();
        if gap.sign_first() != Ordering::Greater {
            pi_gen = pi_gen * eps2_inv.clone();
            continue;
        }
        break;
    }
    debug_assert!(pi_gen.is_totally_positive());
    debug_assert_eq!(pi_gen.norm(), p as i64);
    Ok(pi_gen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> QuadField {
        QuadField::new(5).unwrap()
    }

    /// Continued fraction of sqrt(D) by brute force over small convergents:
    /// the smallest y >= 1 admitting x with norm(x + y w) = +-1 and x + y w > 1.
    fn brute_unit(d: i64) -> QuadInt {
        let tag = FieldTag { d };
        for y in 1..1000 {
            for x in -1000..1000 {
                let e = QuadInt::new(tag, x, y);
                if e.norm().abs() == 1 && e.sign_first() == Ordering::Greater {
                    let gap = e.clone() - QuadInt::one(tag);
                    if gap.sign_first() == Ordering::Greater {
                        return e;
                    }
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn make_field_examples() {
        let f = f5();
        assert_eq!(f.disc(), 5);
        assert_eq!(f.basis_shift(), 1);
        assert_eq!(f.fund_unit(), &f.int(0, 1));
        assert!(f.has_norm_minus_one());

        let f2 = QuadField::new(2).unwrap();
        assert_eq!(f2.disc(), 8);
        assert_eq!(f2.fund_unit(), &f2.int(1, 1));
        assert_eq!(f2.fund_unit().norm(), -1);

        assert_eq!(QuadField::new(4), Err(Error::NotSquarefree(4)));
        assert_eq!(QuadField::new(3), Err(Error::NoUnitOfNormMinusOne(3)));
        assert!(QuadField::with_options(3, false).is_ok());
    }

    #[test]
    fn fundamental_units_match_brute_force() {
        for d in [2, 3, 5, 6, 7, 10, 13, 17, 29, 41] {
            let f = QuadField::with_options(d, false).unwrap();
            assert_eq!(f.fund_unit(), &brute_unit(d), "D = {d}");
        }
    }

    #[test]
    fn trace_norm_examples() {
        let f = f5();
        let one = QuadInt::one(f.tag());
        assert_eq!((one.trace(), one.norm()), (2, 1));
        assert_eq!(one.conjugate(), one);
        let w = f.int(0, 1);
        assert_eq!((w.trace(), w.norm()), (1, -1));
        // (3 + sqrt5)/2 = 1 + w
        let v = f.int(1, 1);
        assert_eq!((v.trace(), v.norm()), (3, 1));
    }

    #[test]
    fn total_positivity_examples() {
        let f = f5();
        assert!(QuadInt::one(f.tag()).is_totally_positive());
        assert!(!f.int(0, 1).is_totally_positive());
        assert!(f.int(1, 1).is_totally_positive());
    }

    #[test]
    fn enumeration_examples() {
        let f = f5();
        assert_eq!(f.enumerate_totally_positive(2, false), vec![f.int(1, 0)]);
        // 1, (3 - sqrt5)/2 = 2 - w, (3 + sqrt5)/2 = 1 + w
        assert_eq!(
            f.enumerate_totally_positive(3, false),
            vec![f.int(1, 0), f.int(2, -1), f.int(1, 1)]
        );
        for d in [2, 5, 13] {
            let f = QuadField::with_options(d, false).unwrap();
            assert_eq!(f.enumerate_totally_positive(0, true), vec![QuadInt::zero(f.tag())]);
        }
    }

    #[test]
    fn enumeration_matches_lattice_box() {
        for d in [2, 5, 13, 29] {
            let f = QuadField::with_options(d, false).unwrap();
            let bound = 25i64;
            let mut brute = Vec::new();
            for x in -3 * bound..=3 * bound {
                for y in -3 * bound..=3 * bound {
                    let v = f.int(x, y);
                    if v.is_totally_positive() && v.trace() <= bound {
                        brute.push(v);
                    }
                }
            }
            brute.sort();
            assert_eq!(f.enumerate_totally_positive(bound as u64, false), brute, "D = {d}");
        }
    }

    #[test]
    fn split_prime_examples() {
        let f = f5();
        let s = f.split_prime(11, 2).unwrap();
        // pi = 4 + sqrt5 = 3 + 2w
        assert_eq!(s.pi(), &f.int(3, 2));
        assert_eq!(s.pi().norm(), 11);
        // sign fixed by val(iota(pi)) = 1: sqrt5 = -4 mod 11
        let brute = (0..121).find(|x| x % 11 == 7 && (x * x - 5) % 121 == 0).unwrap();
        assert_eq!(s.sqrt_d(), &BigInt::from(brute));
        assert_eq!((s.sqrt_d() * s.sqrt_d() - 5) % 121, BigInt::zero());

        assert_eq!(f.split_prime(3, 2), Err(Error::PrimeDoesNotSplit { d: 5, p: 3 }));
        assert_eq!(f.split_prime(5, 2), Err(Error::PrimeDoesNotSplit { d: 5, p: 5 }));
    }

    #[test]
    fn split_prime_generators_are_balanced() {
        for (d, p) in [(5, 11), (5, 19), (5, 29), (13, 17), (13, 3), (29, 5), (2, 7)] {
            let f = QuadField::new(d).unwrap();
            let s = f.split_prime(p, 3).unwrap();
            let pi = s.pi();
            assert!(pi.is_totally_positive());
            assert_eq!(pi.norm(), p as i64);
            assert_eq!(pi.clone() * s.pi_conj().clone(), s.p_elem());
            assert!(s.pi_min_lower() > &BigRational::zero());
            // 1 <= pi_1/pi_2 < eps_1^4
            assert!(*pi.y() >= 0);
            let eps4 = f.fund_unit().pow(4);
            let gap = s.p_elem() * eps4 - pi.clone() * pi.clone();
            assert_eq!(gap.sign_first(), Ordering::Greater);
        }
    }

    #[test]
    fn pi_valuation_examples() {
        let f = f5();
        let s = f.split_prime(11, 2).unwrap();
        assert_eq!(s.pi_valuation(&f.int(3, 2)).unwrap(), 1);
        // 4 - sqrt5 = 5 - 2w generates pi'
        assert_eq!(s.pi_valuation(&f.int(5, -2)).unwrap(), 0);
        assert_eq!(s.pi_valuation(&f.int(11, 0)).unwrap(), 1);
        assert_eq!(s.pi_valuation(&QuadInt::zero(f.tag())), Err(Error::InfiniteValuation));
    }

    #[test]
    fn embedding_enclosure_brackets_pi() {
        let f = f5();
        let s = f.split_prime(11, 2).unwrap();
        // 4 - sqrt5 ~ 1.7639, 4 + sqrt5 ~ 6.2361
        let lo = s.pi_min_lower().clone();
        let hi = s.pi_max_upper().clone();
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert!(lo > r(17639, 10000) && lo < r(17640, 10000));
        assert!(hi > r(62360, 10000) && hi < r(62361, 10000));
    }
}
