//! Truncated q-expansions of Hilbert and elliptic modular forms and the
//! operators acting on them.
//!
//! A Hilbert expansion is known exactly for every index of trace at most
//! `trace_bound`; indices missing from the map carry the coefficient 0. Every
//! operator returns the largest bound below which its output is determined by
//! its input.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{embed_conj_int, embed_int, Coeff, PadicNum};
use crate::quad_field::{PrimeSplit, QuadField, QuadInt, QuadRat, Quadruple};

fn scaled_floor(bound: u64, factor: &BigRational) -> u64 {
    let v = (BigRational::from_integer(BigInt::from(bound)) * factor).floor();
    if v.is_negative() {
        0
    } else {
        v.to_integer().to_u64().unwrap_or(u64::MAX)
    }
}

/// Which prime above `p` (or `p` itself) an index operator refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Pi,
    PiConj,
    P,
}

/// A truncated Hilbert q-expansion `sum a_nu q^nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertQExpansion<C> {
    split: Arc<PrimeSplit>,
    weight: (i64, i64),
    trace_bound: u64,
    coeffs: BTreeMap<QuadInt, C>,
    cuspidal: bool,
}

impl<C: Coeff> HilbertQExpansion<C> {
    pub fn new(
        split: Arc<PrimeSplit>,
        weight: (i64, i64),
        trace_bound: u64,
        coeffs: BTreeMap<QuadInt, C>,
        cuspidal: bool,
    ) -> Result<Self> {
        for (nu, c) in &coeffs {
            if nu.field() != split.tag() {
                return Err(Error::Mismatch("index from another field".into()));
            }
            if nu.is_zero() {
                if cuspidal {
                    return Err(Error::InvalidInput("cuspidal expansion with a constant term".into()));
                }
            } else if !nu.is_totally_positive() {
                return Err(Error::InvalidInput(format!("index {nu:?} is not totally positive")));
            }
            if nu.trace() as u64 > trace_bound {
                return Err(Error::InvalidInput(format!("index {nu:?} exceeds the trace bound")));
            }
            if c.p() != split.p() {
                return Err(Error::Mismatch("coefficient prime differs from the split prime".into()));
            }
        }
        Ok(Self { split, weight, trace_bound, coeffs, cuspidal })
    }

    /// Coefficients from a function on the totally positive cone up to `bound`.
    pub fn from_fn(
        split: Arc<PrimeSplit>,
        weight: (i64, i64),
        trace_bound: u64,
        mut f: impl FnMut(&QuadInt) -> Option<C>,
    ) -> Self {
        let coeffs = split
            .field()
            .enumerate_totally_positive(trace_bound, false)
            .into_iter()
            .filter_map(|nu| f(&nu).map(|c| (nu, c)))
            .collect();
        Self { split, weight, trace_bound, coeffs, cuspidal: true }
    }

    pub fn zero(split: Arc<PrimeSplit>, weight: (i64, i64), trace_bound: u64) -> Self {
        Self { split, weight, trace_bound, coeffs: BTreeMap::new(), cuspidal: true }
    }

    pub fn split(&self) -> &Arc<PrimeSplit> {
        &self.split
    }

    pub fn field(&self) -> &QuadField {
        self.split.field()
    }

    pub fn weight(&self) -> (i64, i64) {
        self.weight
    }

    pub fn trace_bound(&self) -> u64 {
        self.trace_bound
    }

    pub fn cuspidal(&self) -> bool {
        self.cuspidal
    }

    pub fn coeffs(&self) -> &BTreeMap<QuadInt, C> {
        &self.coeffs
    }

    pub fn coeff(&self, nu: &QuadInt) -> Option<&C> {
        self.coeffs.get(nu)
    }

    fn precision(&self) -> i64 {
        self.split.precision() as i64
    }

    fn with_coeffs(&self, weight: (i64, i64), trace_bound: u64, coeffs: BTreeMap<QuadInt, C>) -> Self {
        let cuspidal = !coeffs.keys().any(|k| k.is_zero());
        Self { split: self.split.clone(), weight, trace_bound, coeffs, cuspidal }
    }

    pub fn with_weight(mut self, weight: (i64, i64)) -> Self {
        self.weight = weight;
        self
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> HilbertQExpansion<D> {
        HilbertQExpansion {
            split: self.split.clone(),
            weight: self.weight,
            trace_bound: self.trace_bound,
            coeffs: self.coeffs.iter().map(|(k, c)| (k.clone(), f(c))).collect(),
            cuspidal: self.cuspidal,
        }
    }

    /// Keeps only indices of trace at most `bound`.
    pub fn truncate_bound(&self, bound: u64) -> Self {
        let bound = bound.min(self.trace_bound);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| k.trace() as u64 <= bound)
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        self.with_coeffs(self.weight, bound, coeffs)
    }

    /// Lowers the absolute precision of every coefficient by `delta`.
    pub fn truncate_precision(&self, delta: i64) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, c)| (k.clone(), c.truncate_abs(delta))).collect();
        Self { coeffs, ..self.clone() }
    }

    fn generator(&self, place: Place) -> QuadInt {
        match place {
            Place::Pi => self.split.pi().clone(),
            Place::PiConj => self.split.pi_conj().clone(),
            Place::P => self.split.p_elem(),
        }
    }

    /// `V_X : sum a_nu q^nu -> sum a_nu q^(X nu)`.
    pub fn v(&self, place: Place) -> Self {
        let g = self.generator(place);
        let bound = match place {
            Place::P => self.trace_bound.saturating_mul(self.split.p()),
            _ => scaled_floor(self.trace_bound, self.split.pi_min_lower()),
        };
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| (k.clone() * g.clone(), c.clone()))
            .filter(|(k, _)| k.trace() as u64 <= bound)
            .collect();
        self.with_coeffs(self.weight, bound, coeffs)
    }

    /// `U_X : sum a_nu q^nu -> sum a_(X nu) q^nu`.
    pub fn u(&self, place: Place) -> Self {
        let g = self.generator(place);
        let bound = match place {
            Place::P => self.trace_bound / self.split.p(),
            _ => {
                let inv = self.split.pi_max_upper().recip();
                scaled_floor(self.trace_bound, &inv)
            }
        };
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(k, c)| k.checked_div(&g).map(|q| (q, c.clone())))
            .filter(|(k, _)| k.trace() as u64 <= bound)
            .collect();
        self.with_coeffs(self.weight, bound, coeffs)
    }

    pub fn v_pi(&self) -> Self {
        self.v(Place::Pi)
    }
    pub fn v_pi_prime(&self) -> Self {
        self.v(Place::PiConj)
    }
    pub fn v_p(&self) -> Self {
        self.v(Place::P)
    }
    pub fn u_pi(&self) -> Self {
        self.u(Place::Pi)
    }
    pub fn u_pi_prime(&self) -> Self {
        self.u(Place::PiConj)
    }
    pub fn u_p(&self) -> Self {
        self.u(Place::P)
    }

    /// Removes the coefficients at indices divisible by `X`.
    pub fn deplete(&self, place: Place) -> Self {
        let g = self.generator(place);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| !g.divides(k))
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        self.with_coeffs(self.weight, self.trace_bound, coeffs)
    }

    pub fn deplete_pi(&self) -> Self {
        self.deplete(Place::Pi)
    }
    pub fn deplete_pi_prime(&self) -> Self {
        self.deplete(Place::PiConj)
    }
    pub fn deplete_p(&self) -> Self {
        self.deplete(Place::P)
    }

    fn combine(&self, other: &Self, neg: bool) -> Result<Self> {
        if self.split != other.split {
            return Err(Error::Mismatch("expansions over different primes".into()));
        }
        let bound = self.trace_bound.min(other.trace_bound);
        let mut coeffs: BTreeMap<QuadInt, C> = self
            .coeffs
            .iter()
            .filter(|(k, _)| k.trace() as u64 <= bound)
            .map(|(k, c)| (k.clone(), c.clone()))
            .collect();
        for (k, c) in other.coeffs.iter().filter(|(k, _)| k.trace() as u64 <= bound) {
            let c = if neg { -c.clone() } else { c.clone() };
            match coeffs.remove(k) {
                Some(a) => coeffs.insert(k.clone(), a + c),
                None => coeffs.insert(k.clone(), c),
            };
        }
        Ok(self.with_coeffs(self.weight, bound, coeffs))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    pub fn scale(&self, c: &C) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, a)| (k.clone(), c.clone() * a.clone())).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn scale_base(&self, c: &PadicNum) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, a)| (k.clone(), a.mul_base(c))).collect();
        Self { coeffs, ..self.clone() }
    }

    /// `(1 - c V_X) f`.
    pub fn one_minus_v(&self, c: &C, place: Place) -> Result<Self> {
        self.sub(&self.v(place).scale(c))
    }

    /// `(1 + c V_X) f`.
    pub fn one_plus_v(&self, c: &C, place: Place) -> Result<Self> {
        self.add(&self.v(place).scale(c))
    }

    fn parallel_weight(&self) -> Result<i64> {
        if self.weight.0 != self.weight.1 {
            return Err(Error::NonParallelWeight(self.weight));
        }
        Ok(self.weight.0)
    }

    /// `T_X = U_X + p^(k-1) V_X` for `X = pi, pi'`.
    pub fn hecke_t(&self, place: Place) -> Result<Self> {
        let k = self.parallel_weight()?;
        let pk = PadicNum::p_power(self.split.p(), k - 1, self.precision());
        self.u(place).add(&self.v(place).scale_base(&pk))
    }

    pub fn hecke_t_pi(&self) -> Result<Self> {
        self.hecke_t(Place::Pi)
    }

    pub fn hecke_t_pi_prime(&self) -> Result<Self> {
        self.hecke_t(Place::PiConj)
    }

    /// `theta`: multiplies `a_nu` by `iota_pi(nu)`.
    pub fn theta(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| !k.is_zero())
            .map(|(k, c)| (k.clone(), c.mul_base(&embed_int(k, &self.split))))
            .collect();
        self.with_coeffs((self.weight.0 + 2, self.weight.1), self.trace_bound, coeffs)
    }

    /// `theta'`: multiplies `a_nu` by `iota_pi(nu')`.
    pub fn theta_prime(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| !k.is_zero())
            .map(|(k, c)| (k.clone(), c.mul_base(&embed_conj_int(k, &self.split))))
            .collect();
        self.with_coeffs((self.weight.0, self.weight.1 + 2), self.trace_bound, coeffs)
    }

    fn theta_inverse_at(&self, power: u32, place: Place) -> Result<Self> {
        let divisor_place = match place {
            Place::Pi => self.split.pi().clone(),
            _ => self.split.pi_conj().clone(),
        };
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            if k.is_zero() || divisor_place.divides(k) {
                if c.is_negligible() {
                    continue;
                }
                return Err(Error::NotDepleted(format!("{k:?}")));
            }
            let e = match place {
                Place::Pi => embed_int(k, &self.split),
                _ => embed_conj_int(k, &self.split),
            };
            let d = e.pow(-(power as i64))?;
            coeffs.insert(k.clone(), c.mul_base(&d));
        }
        let shift = 2 * power as i64;
        let weight = match place {
            Place::Pi => (self.weight.0 - shift, self.weight.1),
            _ => (self.weight.0, self.weight.1 - shift),
        };
        Ok(self.with_coeffs(weight, self.trace_bound, coeffs))
    }

    /// Divides `a_nu` by `iota_pi(nu')^power`; the input must be
    /// `pi'`-depleted so that every divisor is a unit.
    pub fn theta_prime_inverse(&self, power: u32) -> Result<Self> {
        self.theta_inverse_at(power, Place::PiConj)
    }

    /// Divides `a_nu` by `iota_pi(nu)^power`; the input must be `pi`-depleted.
    pub fn theta_inverse(&self, power: u32) -> Result<Self> {
        self.theta_inverse_at(power, Place::Pi)
    }

    /// `sum a_nu q^Tr(nu)`, of weight `k + k'`.
    pub fn restrict(&self) -> ModularQExpansion<C> {
        let mut coeffs: BTreeMap<u64, C> = BTreeMap::new();
        for (k, c) in &self.coeffs {
            let n = k.trace() as u64;
            let v = match coeffs.remove(&n) {
                Some(a) => a + c.clone(),
                None => c.clone(),
            };
            coeffs.insert(n, v);
        }
        ModularQExpansion {
            p: self.split.p(),
            weight: self.weight.0 + self.weight.1,
            bound: self.trace_bound,
            coeffs,
        }
    }

    /// Coefficientwise equality below the smaller bound, within precision.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let bound = self.trace_bound.min(other.trace_bound);
        let negligible_or = |a: Option<&C>, b: Option<&C>| match (a, b) {
            (Some(a), Some(b)) => a.approx_eq(b),
            (Some(a), None) | (None, Some(a)) => a.is_negligible(),
            (None, None) => true,
        };
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .filter(|k| k.trace() as u64 <= bound)
            .all(|k| negligible_or(self.coeffs.get(k), other.coeffs.get(k)))
    }

    /// True when every coefficient is zero to precision.
    pub fn is_negligible(&self) -> bool {
        self.coeffs.values().all(|c| c.is_negligible())
    }

    /// Smallest absolute precision over all coefficients.
    pub fn min_abs_prec(&self) -> i64 {
        self.coeffs.values().map(|c| c.min_abs_prec()).min().unwrap_or(crate::padic::INFINITE_PREC)
    }
}

/// Formal simultaneous eigenform for `T_pi`, `T_pi'`.
///
/// Writing `nu = pi^a pi'^b nu0` with `nu0` prime to `p`, the coefficient is
/// `A_a A'_b seed(nu0)` where `A_0 = 1`, `A_1 = a_pi`,
/// `A_(n+1) = a_pi A_n - p^(k-1) A_(n-1)`. Indices whose `nu0` has no seed
/// value get coefficient 0.
pub fn make_formal_eigenform<C: Coeff>(
    split: Arc<PrimeSplit>,
    seed: impl Fn(&QuadInt) -> Option<C>,
    a_pi: &C,
    a_pi_prime: &C,
    k: i64,
    trace_bound: u64,
) -> Result<HilbertQExpansion<C>> {
    if k < 2 {
        return Err(Error::InvalidWeights(format!("weight {k} < 2")));
    }
    let prec = split.precision() as i64;
    let pk = PadicNum::p_power(split.p(), k - 1, prec);
    let ladder = |a: &C, n: u32| -> Vec<C> {
        let one = a.from_base_like(PadicNum::one(split.p(), prec));
        let mut out = vec![one, a.clone()];
        while out.len() <= n as usize {
            let l = out.len();
            let next = a.clone() * out[l - 1].clone() - out[l - 2].mul_base(&pk);
            out.push(next);
        }
        out
    };
    let nus = split.field().enumerate_totally_positive(trace_bound, false);
    let mut factored = Vec::with_capacity(nus.len());
    let (mut amax, mut bmax) = (0, 0);
    for nu in nus {
        let a = split.pi_valuation(&nu)?;
        let b = split.pi_conj_valuation(&nu)?;
        let mut nu0 = nu.clone();
        for _ in 0..a {
            nu0 = nu0.checked_div(split.pi()).expect("divisible");
        }
        for _ in 0..b {
            nu0 = nu0.checked_div(split.pi_conj()).expect("divisible");
        }
        amax = amax.max(a);
        bmax = bmax.max(b);
        factored.push((nu, a, b, nu0));
    }
    let la = ladder(a_pi, amax);
    let lb = ladder(a_pi_prime, bmax);
    let mut coeffs = BTreeMap::new();
    for (nu, a, b, nu0) in factored {
        if let Some(s) = seed(&nu0) {
            coeffs.insert(nu, la[a as usize].clone() * lb[b as usize].clone() * s);
        }
    }
    HilbertQExpansion::new(split, (k, k), trace_bound, coeffs, true)
}

/// The `theta'`-primitive of a `pi'`-depleted form, split along the
/// `eta'`-ladder: component `j` is `(-1)^j j! C(n', j) theta'^(-j-1) f`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveVector<C> {
    pub n_prime: u32,
    pub components: Vec<HilbertQExpansion<C>>,
}

pub fn primitive_vector<C: Coeff>(f: &HilbertQExpansion<C>, n_prime: u32) -> Result<PrimitiveVector<C>> {
    let p = f.split().p();
    let prec = f.precision();
    let mut components = Vec::with_capacity(n_prime as usize + 1);
    let mut factorial = BigInt::from(1);
    for j in 0..=n_prime {
        if j > 0 {
            factorial *= j;
        }
        let binom = binomial(n_prime as u64, j as u64);
        let mut c = &factorial * binom;
        if j % 2 == 1 {
            c = -c;
        }
        let scalar = PadicNum::from_bigint(p, &c, prec);
        let comp = f.theta_prime_inverse(j + 1)?.scale_base(&scalar);
        components.push(comp);
    }
    Ok(PrimitiveVector { n_prime, components })
}

pub(crate) fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

impl<C: Coeff> PrimitiveVector<C> {
    /// Applies `theta'` along the ladder: output 0 is `theta'(component_0)`
    /// and output `j >= 1` is `theta'(component_j) + (n' - j + 1) component_(j-1)`.
    /// For a genuine primitive the first output is `f` and the rest vanish.
    pub fn ladder(&self) -> Result<Vec<HilbertQExpansion<C>>> {
        let mut out = Vec::with_capacity(self.components.len());
        let p = self.components[0].split().p();
        let prec = self.components[0].precision();
        for (j, comp) in self.components.iter().enumerate() {
            let t = comp.theta_prime();
            if j == 0 {
                out.push(t);
            } else {
                let m = PadicNum::from_i64(p, self.n_prime as i64 - j as i64 + 1, prec);
                let prev = self.components[j - 1].scale_base(&m).with_weight(t.weight());
                out.push(t.add(&prev)?);
            }
        }
        Ok(out)
    }

    pub fn verify_ladder(&self, f: &HilbertQExpansion<C>) -> Result<bool> {
        let out = self.ladder()?;
        let f0 = f.theta_prime_inverse(0)?;
        Ok(out[0].approx_eq(&f0) && out[1..].iter().all(|e| e.is_negligible()))
    }
}

/// `restrict(1/2 theta'^(-1-t) f^[pi'] - 1/2 theta^(-1-t) f^[pi])`.
pub fn aj_integrand<C: Coeff>(f: &HilbertQExpansion<C>, t: u32) -> Result<ModularQExpansion<C>> {
    let p = f.split().p();
    let half = PadicNum::from_rational(p, &BigRational::new(1.into(), 2.into()), f.precision());
    let first = f.deplete_pi_prime().theta_prime_inverse(t + 1)?.scale_base(&half);
    let second = f.deplete_pi().theta_inverse(t + 1)?.scale_base(&half);
    first.restrict().sub(&second.restrict())
}

/// Checks that `restrict(theta^(-1-t) (V_pi' f)^[pi])` has no coefficient at
/// indices divisible by `p`.
pub fn kernel_lemma_check<C: Coeff>(f: &HilbertQExpansion<C>, t: u32) -> Result<bool> {
    let g = f.v_pi_prime().deplete_pi().theta_inverse(t + 1)?.restrict();
    let p = f.split().p();
    Ok(g.coeffs.iter().all(|(n, c)| n % p != 0 || c.is_negligible()))
}

/// A truncated elliptic q-expansion `sum b_n q^n`, known for `n <= bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularQExpansion<C> {
    p: u64,
    weight: i64,
    bound: u64,
    coeffs: BTreeMap<u64, C>,
}

impl<C: Coeff> ModularQExpansion<C> {
    pub fn new(p: u64, weight: i64, bound: u64, coeffs: BTreeMap<u64, C>) -> Result<Self> {
        if let Some((&n, _)) = coeffs.iter().next_back() {
            if n > bound {
                return Err(Error::InvalidInput(format!("index {n} exceeds bound {bound}")));
            }
        }
        if coeffs.values().any(|c| c.p() != p) {
            return Err(Error::Mismatch("coefficient prime".into()));
        }
        Ok(Self { p, weight, bound, coeffs })
    }

    pub fn from_fn(p: u64, weight: i64, bound: u64, mut f: impl FnMut(u64) -> Option<C>) -> Self {
        let coeffs = (1..=bound).filter_map(|n| f(n).map(|c| (n, c))).collect();
        Self { p, weight, bound, coeffs }
    }

    pub fn zero(p: u64, weight: i64, bound: u64) -> Self {
        Self { p, weight, bound, coeffs: BTreeMap::new() }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, C> {
        &self.coeffs
    }

    pub fn coeff(&self, n: u64) -> Option<&C> {
        self.coeffs.get(&n)
    }

    pub fn with_weight(mut self, weight: i64) -> Self {
        self.weight = weight;
        self
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> ModularQExpansion<D> {
        ModularQExpansion {
            p: self.p,
            weight: self.weight,
            bound: self.bound,
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, f(c))).collect(),
        }
    }

    pub fn truncate_bound(&self, bound: u64) -> Self {
        let bound = bound.min(self.bound);
        let coeffs = self.coeffs.range(..=bound).map(|(k, c)| (*k, c.clone())).collect();
        Self { coeffs, bound, ..self.clone() }
    }

    pub fn truncate_precision(&self, delta: i64) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, c)| (*k, c.truncate_abs(delta))).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn v_p(&self) -> Self {
        let bound = self.bound.saturating_mul(self.p);
        let coeffs = self.coeffs.iter().map(|(k, c)| (k * self.p, c.clone())).collect();
        Self { coeffs, bound, ..self.clone() }
    }

    pub fn u_p(&self) -> Self {
        self.u_p_power(self.p)
    }

    fn u_p_power(&self, q: u64) -> Self {
        let bound = self.bound / q;
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(k, _)| *k % q == 0 && *k / q <= bound)
            .map(|(k, c)| (k / q, c.clone()))
            .collect();
        Self { coeffs, bound, ..self.clone() }
    }

    /// `T_p = U_p + p^(k-1) V_p` in weight `k`.
    pub fn hecke_t_p(&self, precision: i64) -> Result<Self> {
        let pk = PadicNum::p_power(self.p, self.weight - 1, precision);
        self.u_p().add(&self.v_p().scale_base(&pk))
    }

    fn combine(&self, other: &Self, neg: bool) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::Mismatch("expansions at different primes".into()));
        }
        let bound = self.bound.min(other.bound);
        let mut coeffs: BTreeMap<u64, C> =
            self.coeffs.range(..=bound).map(|(k, c)| (*k, c.clone())).collect();
        for (k, c) in other.coeffs.range(..=bound) {
            let c = if neg { -c.clone() } else { c.clone() };
            let v = match coeffs.remove(k) {
                Some(a) => a + c,
                None => c,
            };
            coeffs.insert(*k, v);
        }
        Ok(Self { p: self.p, weight: self.weight, bound, coeffs })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, true)
    }

    pub fn scale(&self, c: &C) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, a)| (*k, c.clone() * a.clone())).collect();
        Self { coeffs, ..self.clone() }
    }

    pub fn scale_base(&self, c: &PadicNum) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, a)| (*k, a.mul_base(c))).collect();
        Self { coeffs, ..self.clone() }
    }

    /// `U_p^(d!)`, the finite-depth stand-in for the ordinary projector.
    pub fn e_ord_approx(&self, depth: u32) -> Result<Self> {
        let fact: u64 = (1..=depth as u64).product();
        let q = u32::try_from(fact).ok().and_then(|f| self.p.checked_pow(f));
        let q = match q {
            Some(q) if self.bound / q >= 1 => q,
            Some(q) => return Err(Error::InsufficientBound { required: q, have: self.bound }),
            None => return Err(Error::InsufficientBound { required: u64::MAX, have: self.bound }),
        };
        Ok(self.u_p_power(q))
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        let bound = self.bound.min(other.bound);
        let keys = self.coeffs.range(..=bound).chain(other.coeffs.range(..=bound)).map(|(k, _)| *k);
        for k in keys {
            let ok = match (self.coeffs.get(&k), other.coeffs.get(&k)) {
                (Some(a), Some(b)) => a.approx_eq(b),
                (Some(a), None) | (None, Some(a)) => a.is_negligible(),
                (None, None) => true,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    pub fn is_negligible(&self) -> bool {
        self.coeffs.values().all(|c| c.is_negligible())
    }

    pub fn min_abs_prec(&self) -> i64 {
        self.coeffs.values().map(|c| c.min_abs_prec()).min().unwrap_or(crate::padic::INFINITE_PREC)
    }
}

/// Formal `T_p`-eigenform: `b_(p^a m) = B_a seed(m)` with `B_0 = 1`,
/// `B_1 = b_p`, `B_(n+1) = b_p B_n - p^(k-1) B_(n-1)`.
pub fn make_modular_eigenform<C: Coeff>(
    seed: impl Fn(u64) -> Option<C>,
    b_p: &C,
    k: i64,
    bound: u64,
    precision: i64,
) -> ModularQExpansion<C> {
    let p = b_p.p();
    let pk = PadicNum::p_power(p, k - 1, precision);
    let mut ladder = vec![b_p.from_base_like(PadicNum::one(p, precision)), b_p.clone()];
    let mut coeffs = BTreeMap::new();
    for n in 1..=bound {
        let (mut a, mut m) = (0usize, n);
        while m % p == 0 {
            m /= p;
            a += 1;
        }
        while ladder.len() <= a {
            let l = ladder.len();
            let next = b_p.clone() * ladder[l - 1].clone() - ladder[l - 2].mul_base(&pk);
            ladder.push(next);
        }
        if let Some(s) = seed(m) {
            coeffs.insert(n, ladder[a].clone() * s);
        }
    }
    ModularQExpansion { p, weight: k, bound, coeffs }
}

#[derive(Serialize, Deserialize)]
struct CoeffRecord<K, V> {
    nu: K,
    c: V,
}

#[derive(Serialize, Deserialize)]
struct HilbertRepr {
    schema: String,
    #[serde(rename = "D")]
    d: i64,
    p: u64,
    prec: u32,
    weight: (i64, i64),
    trace_bound: String,
    cuspidal: bool,
    coeffs: Vec<CoeffRecord<Quadruple, PadicNum>>,
}

impl HilbertQExpansion<PadicNum> {
    pub fn to_json(&self) -> serde_json::Value {
        let repr = HilbertRepr {
            schema: crate::SCHEMA.into(),
            d: self.field().d(),
            p: self.split.p(),
            prec: self.split.precision(),
            weight: self.weight,
            trace_bound: self.trace_bound.to_string(),
            cuspidal: self.cuspidal,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| CoeffRecord { nu: Quadruple(k.to_rational().to_quadruple()), c: c.clone() })
                .collect(),
        };
        serde_json::to_value(repr).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let repr: HilbertRepr =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let field = QuadField::new(repr.d)?;
        let split = Arc::new(field.split_prime(repr.p, repr.prec)?);
        let bound: u64 = repr
            .trace_bound
            .parse()
            .map_err(|_| Error::InvalidInput(format!("trace_bound {:?}", repr.trace_bound)))?;
        let mut coeffs = BTreeMap::new();
        for rec in repr.coeffs {
            let nu = QuadRat::from_quadruple(field.tag(), &rec.nu.0)?
                .to_integral()
                .ok_or_else(|| Error::InvalidInput("non-integral index".into()))?;
            coeffs.insert(nu, rec.c);
        }
        Self::new(split, repr.weight, bound, coeffs, repr.cuspidal)
    }
}

#[derive(Serialize, Deserialize)]
struct ModularRepr {
    schema: String,
    p: u64,
    weight: i64,
    bound: String,
    coeffs: Vec<CoeffRecord<u64, PadicNum>>,
}

impl ModularQExpansion<PadicNum> {
    pub fn to_json(&self) -> serde_json::Value {
        let repr = ModularRepr {
            schema: crate::SCHEMA.into(),
            p: self.p,
            weight: self.weight,
            bound: self.bound.to_string(),
            coeffs: self.coeffs.iter().map(|(k, c)| CoeffRecord { nu: *k, c: c.clone() }).collect(),
        };
        serde_json::to_value(repr).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let repr: ModularRepr =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let bound = repr
            .bound
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bound {:?}", repr.bound)))?;
        let coeffs = repr.coeffs.into_iter().map(|r| (r.nu, r.c)).collect();
        Self::new(repr.p, repr.weight, bound, coeffs)
    }
}
