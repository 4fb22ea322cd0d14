//! Hecke root data, stabilizations, the characteristic polynomials of
//! Frobenius and the Euler factors entering the Gross-Zagier scalar.
//!
//! All four roots `alpha_i alpha'_i'` are realised in one [`Tower`]: the
//! roots at `pi` live in the inner quadratic extension, those at `pi'` in the
//! outer one. Split root pairs are constants of the tower, so one code path
//! covers every combination of split and nonsplit pairs.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::padic::{hecke_roots, Coeff, PadicNum, QuadExt, QuadModulus, RootPair};
use crate::qexpansion::{HilbertQExpansion, ModularQExpansion, Place};
use crate::Tower;

/// Hecke eigenvalues at `pi`, `pi'` and their reciprocal roots.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub p: u64,
    pub k: i64,
    pub precision: u32,
    pub a_pi: PadicNum,
    pub a_pi_prime: PadicNum,
    pub roots_pi: RootPair,
    pub roots_pi_prime: RootPair,
    pub sigma: Rational64,
    pub sigma_prime: Rational64,
}

fn slope(a: &PadicNum) -> Rational64 {
    // a zero-to-precision eigenvalue has slope at least its absolute precision
    Rational64::from_integer(a.val())
}

pub fn spectral_data(a_pi: &PadicNum, a_pi_prime: &PadicNum, k: i64, precision: u32) -> Result<SpectralData> {
    if a_pi.p() != a_pi_prime.p() {
        return Err(Error::Mismatch("eigenvalues at different primes".into()));
    }
    let roots_pi = hecke_roots(a_pi, k, precision)?;
    let roots_pi_prime = hecke_roots(a_pi_prime, k, precision)?;
    Ok(SpectralData {
        p: a_pi.p(),
        k,
        precision,
        a_pi: a_pi.clone(),
        a_pi_prime: a_pi_prime.clone(),
        sigma: slope(a_pi),
        sigma_prime: slope(a_pi_prime),
        roots_pi,
        roots_pi_prime,
    })
}

impl SpectralData {
    pub fn ordinary_at_pi(&self) -> bool {
        self.sigma == Rational64::from_integer(0)
    }

    pub fn ordinary_at_pi_prime(&self) -> bool {
        self.sigma_prime == Rational64::from_integer(0)
    }

    /// Positive slope at both primes.
    pub fn nonordinary(&self) -> bool {
        !self.ordinary_at_pi() && !self.ordinary_at_pi_prime()
    }

    fn prec(&self) -> i64 {
        self.precision as i64
    }

    fn pk(&self) -> PadicNum {
        PadicNum::p_power(self.p, self.k - 1, self.prec())
    }

    /// The two root pairs inside one tower. A nonsplit pair is written
    /// `a/2 +- delta` with `delta^2 = (a^2 - 4 p^(k-1))/4`, so that the
    /// basis `1, delta` is adapted to the valuation.
    pub fn root_tower(&self) -> RootTower {
        let p = self.p;
        let quarter = PadicNum::from_rational(p, &BigRational::new(1.into(), 4.into()), self.prec());
        let half = PadicNum::from_rational(p, &BigRational::new(1.into(), 2.into()), self.prec());
        let minus_quarter_disc = |a: &PadicNum| -(&(&(a * a) - &self.pk().mul_base(&PadicNum::from_i64(p, 4, self.prec()))) * &quarter);
        let zero = PadicNum::exact_zero(p);
        let inner = QuadExt::generator(zero.clone(), minus_quarter_disc(&self.a_pi));
        let outer = QuadExt::generator(inner.from_base_like(zero), inner.from_base_like(minus_quarter_disc(&self.a_pi_prime)));
        let constant = |x: &PadicNum| outer.from_base_like(x.clone());

        let alpha = match &self.roots_pi {
            RootPair::Split { roots, .. } => [constant(&roots[0]), constant(&roots[1])],
            RootPair::NonSplit { .. } => {
                let delta = outer.embed(inner.clone());
                let mid = constant(&(&self.a_pi * &half));
                [mid.clone() + delta.clone(), mid - delta]
            }
        };
        let alpha_prime = match &self.roots_pi_prime {
            RootPair::Split { roots, .. } => [constant(&roots[0]), constant(&roots[1])],
            RootPair::NonSplit { .. } => {
                let mid = constant(&(&self.a_pi_prime * &half));
                [mid.clone() + outer.clone(), mid - outer.clone()]
            }
        };
        let generator_val = |r: &RootPair, a: &PadicNum| -> Rational64 {
            match r {
                RootPair::Split { .. } => Rational64::from_integer(0),
                RootPair::NonSplit { .. } => {
                    let v = minus_quarter_disc(a).valuation().expect("nonsplit discriminant is nonzero");
                    Rational64::new(v, 2)
                }
            }
        };
        let generator_valuations =
            [generator_val(&self.roots_pi, &self.a_pi), generator_val(&self.roots_pi_prime, &self.a_pi_prime)];
        RootTower { alpha, alpha_prime, template: outer, generator_valuations }
    }

    /// `val(alpha_0 - alpha_1)` and `val(alpha'_0 - alpha'_1)`, half the
    /// valuations of the discriminants `a^2 - 4 p^(k-1)`.
    pub fn root_gap_valuations(&self) -> Result<[Rational64; 2]> {
        let four_pk = PadicNum::p_power(self.p, self.k - 1, self.prec()).mul_base(&PadicNum::from_i64(self.p, 4, self.prec()));
        let gap = |a: &PadicNum| -> Result<Rational64> {
            let disc = &(a * a) - &four_pk;
            Ok(Rational64::new(disc.valuation()?, 2))
        };
        Ok([gap(&self.a_pi)?, gap(&self.a_pi_prime)?])
    }

    /// Digits lost when dividing by `(alpha_0 - alpha_1)(alpha'_0 - alpha'_1)`.
    pub fn recombination_loss(&self) -> Result<i64> {
        let rt = self.root_tower();
        let d = (rt.alpha[0].clone() - rt.alpha[1].clone()) * (rt.alpha_prime[0].clone() - rt.alpha_prime[1].clone());
        // (a0 - a1)^2 is the discriminant, so half its valuation is the loss
        let disc = d.clone() * d;
        let base = disc.to_base().ok_or(Error::NotInBaseRing)?;
        Ok(base.valuation()? / 2)
    }
}

/// The roots `alpha_0, alpha_1` (at `pi`) and `alpha'_0, alpha'_1` (at `pi'`)
/// as elements of one ring.
#[derive(Clone, Debug)]
pub struct RootTower {
    pub alpha: [Tower; 2],
    pub alpha_prime: [Tower; 2],
    template: Tower,
    /// Valuations of the inner and outer generators when they generate a
    /// field, 0 otherwise.
    generator_valuations: [Rational64; 2],
}

impl RootTower {
    pub fn lift(&self, c: &PadicNum) -> Tower {
        self.template.from_base_like(c.clone())
    }

    /// Absolute precision measured by valuation: the smallest
    /// `abs_prec(c) + val(basis element)` over the four components.
    pub fn normalized_precision(&self, x: &Tower) -> Rational64 {
        let [v_in, v_out] = self.generator_valuations;
        let r = |c: &PadicNum| Rational64::from_integer(c.abs_prec());
        let parts = [
            r(x.c0().c0()),
            r(x.c0().c1()) + v_in,
            r(x.c1().c0()) + v_out,
            r(x.c1().c1()) + v_in + v_out,
        ];
        parts.into_iter().min().expect("four parts")
    }

    pub fn lift_expansion(&self, f: &HilbertQExpansion<PadicNum>) -> HilbertQExpansion<Tower> {
        f.map_coeffs(|c| self.lift(c))
    }
}

/// Projects an expansion whose coefficients land in the base ring.
pub fn project_to_base<C: Coeff>(f: &HilbertQExpansion<C>) -> Result<HilbertQExpansion<PadicNum>> {
    if f.coeffs().values().any(|c| c.to_base().is_none()) {
        return Err(Error::NotInBaseRing);
    }
    Ok(f.map_coeffs(|c| c.to_base().expect("checked above")))
}

/// Ordinary data of an elliptic eigenform: unit root `beta0` and
/// `beta1 = p^(k0-1)/beta0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrdinaryData {
    pub p: u64,
    pub precision: u32,
    pub b_p: PadicNum,
    pub k0: i64,
    pub beta0: PadicNum,
    pub beta1: PadicNum,
}

pub fn ordinary_data(b_p: &PadicNum, k0: i64, precision: u32) -> Result<OrdinaryData> {
    let rp = hecke_roots(b_p, k0, precision)?;
    match &rp {
        RootPair::Split { roots, .. } if roots[0].val() == 0 && !roots[0].is_zero() => Ok(OrdinaryData {
            p: b_p.p(),
            precision,
            b_p: b_p.clone(),
            k0,
            beta0: roots[0].clone(),
            beta1: roots[1].clone(),
        }),
        _ => Err(Error::InvalidInput(format!("b_p = {b_p} is not a p-adic unit"))),
    }
}

/// `(1 - beta_other V_p) g`.
pub fn stabilize_modular(g: &ModularQExpansion<PadicNum>, beta_other: &PadicNum) -> Result<ModularQExpansion<PadicNum>> {
    g.sub(&g.v_p().scale(beta_other))
}

/// `(beta0 g0 - beta1 g1)/(beta0 - beta1)`.
pub fn recombine_modular(
    g0: &ModularQExpansion<PadicNum>,
    g1: &ModularQExpansion<PadicNum>,
    beta0: &PadicNum,
    beta1: &PadicNum,
) -> Result<ModularQExpansion<PadicNum>> {
    let d = (beta0 - beta1).inv()?;
    g0.scale(&(beta0 * &d)).sub(&g1.scale(&(beta1 * &d)))
}

/// `(1 - c' V_pi')(1 - c V_pi) f`.
pub fn stabilize_hilbert<C: Coeff>(f: &HilbertQExpansion<C>, c: &C, c_prime: &C) -> Result<HilbertQExpansion<C>> {
    f.one_minus_v(c, Place::Pi)?.one_minus_v(c_prime, Place::PiConj)
}

/// The stabilization that is a `U_pi`-eigenform of eigenvalue `alpha_i` and a
/// `U_pi'`-eigenform of eigenvalue `alpha'_i'`: it removes the complementary
/// roots, `(1 - alpha'_(1-i') V_pi')(1 - alpha_(1-i) V_pi) f`.
pub fn u_eigen_stabilization(
    f: &HilbertQExpansion<Tower>,
    roots: &RootTower,
    i: usize,
    i_prime: usize,
) -> Result<HilbertQExpansion<Tower>> {
    stabilize_hilbert(f, &roots.alpha[1 - i], &roots.alpha_prime[1 - i_prime])
}

/// `sum (-1)^(i+i') alpha_i alpha'_i' f_ii'`, with `f_ii'` indexed as in
/// [`u_eigen_stabilization`].
pub fn recombination_numerator(
    stabs: &[[HilbertQExpansion<Tower>; 2]; 2],
    roots: &RootTower,
) -> Result<HilbertQExpansion<Tower>> {
    let mut acc: Option<HilbertQExpansion<Tower>> = None;
    for i in 0..2 {
        for ip in 0..2 {
            let mut c = roots.alpha[i].clone() * roots.alpha_prime[ip].clone();
            if (i + ip) % 2 == 1 {
                c = -c;
            }
            let term = stabs[i][ip].scale(&c);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
    }
    Ok(acc.expect("four terms"))
}

/// `(alpha_0 - alpha_1)(alpha'_0 - alpha'_1)`.
pub fn root_gap_product(roots: &RootTower) -> Tower {
    let [a0, a1] = roots.alpha.clone();
    let [b0, b1] = roots.alpha_prime.clone();
    (a0 - a1) * (b0 - b1)
}

/// The numerator divided by [`root_gap_product`]; recovers `f`.
pub fn recombine_hilbert(
    stabs: &[[HilbertQExpansion<Tower>; 2]; 2],
    roots: &RootTower,
) -> Result<HilbertQExpansion<Tower>> {
    let denom = root_gap_product(roots).try_inv()?;
    Ok(recombination_numerator(stabs, roots)?.scale(&denom))
}

/// Polynomial with constant term first.
pub type Poly = Vec<PadicNum>;

pub fn poly_eval<C: Coeff>(poly: &[C], x: &C) -> C {
    let mut it = poly.iter().rev();
    let mut acc = it.next().expect("nonempty polynomial").clone();
    for c in it {
        acc = acc * x.clone() + c.clone();
    }
    acc
}

fn poly_mul(a: &[PadicNum], b: &[PadicNum]) -> Poly {
    let p = a[0].p();
    let mut out = vec![PadicNum::exact_zero(p); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

/// `Q_f(x) = prod (1 - alpha_i alpha'_i' p^(2-2k) x)` from the elementary
/// symmetric functions of the four roots, expressed through `a_pi`, `a_pi'`
/// and `P = p^(k-1)`.
pub fn q_f_symmetric(sd: &SpectralData) -> Result<Poly> {
    let (p, m) = (sd.p, sd.prec());
    let s = sd.a_pi.clone();
    let sp = sd.a_pi_prime.clone();
    let pk = sd.pk();
    let two = PadicNum::from_i64(p, 2, m);
    let e1 = &s * &sp;
    let e2 = &(&(&pk * &(&s * &s)) + &(&pk * &(&sp * &sp))) - &(&two * &(&pk * &pk));
    let e3 = &(&pk * &pk) * &e1;
    let e4 = (&pk * &pk).pow(2)?;
    let c = PadicNum::p_power(p, 2 - 2 * sd.k, m);
    let one = PadicNum::one(p, m);
    Ok(vec![
        one,
        -(e1 * c.clone()),
        e2 * c.pow(2)?,
        -(e3 * c.pow(3)?),
        e4 * c.pow(4)?,
    ])
}

/// `Q_f` by multiplying out the four linear factors in the root tower.
pub fn q_f_roots(sd: &SpectralData) -> Result<Poly> {
    let rt = sd.root_tower();
    let c = rt.lift(&PadicNum::p_power(sd.p, 2 - 2 * sd.k, sd.prec()));
    let one = rt.lift(&PadicNum::one(sd.p, sd.prec()));
    let mut poly: Vec<Tower> = vec![one.clone()];
    for a in &rt.alpha {
        for b in &rt.alpha_prime {
            let r = -(a.clone() * b.clone() * c.clone());
            let mut next = vec![one.zero_like(); poly.len() + 1];
            for (i, x) in poly.iter().enumerate() {
                next[i] = next[i].clone() + x.clone();
                next[i + 1] = next[i + 1].clone() + x.clone() * r.clone();
            }
            poly = next;
        }
    }
    poly.iter().map(|t| t.to_base().ok_or(Error::NotInBaseRing)).collect()
}

/// `Q_f`, computed both ways and cross-checked.
pub fn q_f_polynomial(sd: &SpectralData) -> Result<Poly> {
    let a = q_f_symmetric(sd)?;
    let b = q_f_roots(sd)?;
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        if !x.approx_eq(y) {
            return Err(Error::Mismatch(format!("Q_f coefficient {i}: {x} vs {y}")));
        }
    }
    Ok(a)
}

/// `P_f(x) = (1 - p^(1-k) x) Q_f(x)`.
pub fn p_f_polynomial(sd: &SpectralData) -> Result<Poly> {
    let q = q_f_polynomial(sd)?;
    let lin = vec![PadicNum::one(sd.p, sd.prec()), -PadicNum::p_power(sd.p, 1 - sd.k, sd.prec())];
    Ok(poly_mul(&lin, &q))
}

impl OrdinaryData {
    fn prec(&self) -> i64 {
        self.precision as i64
    }

    /// `1 - beta1/beta0`.
    pub fn e0_via_quotient(&self) -> Result<PadicNum> {
        Ok(PadicNum::one(self.p, self.prec()) - self.beta1.div(&self.beta0)?)
    }

    /// `1 - beta1^2 p^(1-k0)`.
    pub fn e0_via_power(&self) -> PadicNum {
        let pw = PadicNum::p_power(self.p, 1 - self.k0, self.prec());
        PadicNum::one(self.p, self.prec()) - &(&self.beta1 * &self.beta1) * &pw
    }
}

/// `E_0(g)`, after checking that both expressions agree.
pub fn euler_e0(od: &OrdinaryData) -> Result<PadicNum> {
    let a = od.e0_via_quotient()?;
    let b = od.e0_via_power();
    if !a.approx_eq(&b) {
        return Err(Error::Mismatch(format!("E0: {a} vs {b}")));
    }
    Ok(b)
}

/// `E_1(g) = 1 - beta1^2 p^(-k0)`.
pub fn euler_e1(od: &OrdinaryData) -> PadicNum {
    let pw = PadicNum::p_power(od.p, -od.k0, od.prec());
    PadicNum::one(od.p, od.prec()) - &(&od.beta1 * &od.beta1) * &pw
}

/// `E_1` taken over both roots of `y^2 - b_p y + p^(k0-1)` and multiplied:
/// `1 - (b_p^2 - 2P) X + P^2 X^2` with `P = p^(k0-1)`, `X = p^(-k0)`.
/// Defined whether or not `b_p` is a unit.
pub fn euler_e1_norm(b_p: &PadicNum, k0: i64, precision: u32) -> PadicNum {
    let (p, m) = (b_p.p(), precision as i64);
    let pk = PadicNum::p_power(p, k0 - 1, m);
    let x = PadicNum::p_power(p, -k0, m);
    let two = PadicNum::from_i64(p, 2, m);
    let power_sum = b_p * b_p - &two * &pk;
    let px = &pk * &x;
    PadicNum::one(p, m) - &power_sum * &x + &px * &px
}

/// `E(f, g) = prod_(i,i') (1 - alpha_i alpha'_i' beta1 p^(2-2k+t))`, as a
/// product in the root tower.
pub fn euler_e_product(sd: &SpectralData, beta1: &PadicNum, t: i64) -> Result<PadicNum> {
    let rt = sd.root_tower();
    euler_e_with_roots(sd, &rt, beta1, t)
}

fn euler_e_with_roots(sd: &SpectralData, rt: &RootTower, beta1: &PadicNum, t: i64) -> Result<PadicNum> {
    let x = rt.lift(&(beta1 * &PadicNum::p_power(sd.p, 2 - 2 * sd.k + t, sd.prec())));
    let one = rt.lift(&PadicNum::one(sd.p, sd.prec()));
    let mut acc = one.clone();
    for a in &rt.alpha {
        for b in &rt.alpha_prime {
            acc = acc * (one.clone() - a.clone() * b.clone() * x.clone());
        }
    }
    acc.to_base().ok_or(Error::NotInBaseRing)
}

/// `E(f, g)` with the root pairs listed in the opposite order.
pub fn euler_e_swapped(sd: &SpectralData, beta1: &PadicNum, t: i64) -> Result<PadicNum> {
    let mut rt = sd.root_tower();
    rt.alpha.swap(0, 1);
    rt.alpha_prime.swap(0, 1);
    euler_e_with_roots(sd, &rt, beta1, t)
}

/// `E(f, g)`, cross-checked against `Q_f(beta1 p^t)`.
pub fn euler_e(sd: &SpectralData, beta1: &PadicNum, t: i64) -> Result<PadicNum> {
    if t < 0 {
        return Err(Error::InvalidInput(format!("t = {t} < 0")));
    }
    let prod = euler_e_product(sd, beta1, t)?;
    let q = q_f_symmetric(sd)?;
    let x = beta1 * &PadicNum::p_power(sd.p, t, sd.prec());
    let sym = poly_eval(&q, &x);
    if !prod.approx_eq(&sym) {
        return Err(Error::Mismatch(format!("E(f,g): {prod} vs {sym}")));
    }
    Ok(prod)
}

/// Both scalar factors of the p-adic Gross-Zagier formula.
#[derive(Clone, Debug, PartialEq)]
pub struct AjScalars {
    pub t: i64,
    pub sign: i64,
    pub factorial: BigInt,
    /// `(-1)^t t! E_1 / E`.
    pub aj_side: PadicNum,
    /// `(-1)^t t! E_0 E_1 / E`.
    pub l_side: PadicNum,
    pub e0: PadicNum,
    pub e1: PadicNum,
    pub e: PadicNum,
}

/// `t = k - 1 - k0/2` for even `k0`.
pub fn twist_index(k: i64, k0: i64) -> Result<i64> {
    if k0 % 2 != 0 {
        return Err(Error::InvalidWeights(format!("k0 = {k0} is odd")));
    }
    let t = k - 1 - k0 / 2;
    if t < 0 {
        return Err(Error::InvalidWeights(format!("t = k - 1 - k0/2 = {t} < 0")));
    }
    Ok(t)
}

pub fn aj_scalar(sd: &SpectralData, od: &OrdinaryData, t: i64) -> Result<AjScalars> {
    let expected = twist_index(sd.k, od.k0)?;
    if t != expected {
        return Err(Error::InvalidWeights(format!("t = {t}, but k - 1 - k0/2 = {expected}")));
    }
    let e = euler_e(sd, &od.beta1, t)?;
    if e.is_zero() {
        return Err(Error::InsufficientPrecision {
            required: e.abs_prec() + 1,
            context: "E(f,g) vanishes to working precision".into(),
        });
    }
    let e0 = euler_e0(od)?;
    let e1 = euler_e1(od);
    let sign = if t % 2 == 0 { 1 } else { -1 };
    let factorial: BigInt = (1..=t).map(BigInt::from).product();
    let scalar = PadicNum::from_bigint(sd.p, &(&factorial * sign), sd.prec());
    let aj_side = (&scalar * &e1).div(&e)?;
    let l_side = &aj_side * &e0;
    Ok(AjScalars { t, sign, factorial, aj_side, l_side, e0, e1, e })
}

/// `b_p^2 <= 4 p^(k0-1)`.
pub fn ramanujan_check(b_p: &BigInt, p: u64, k0: i64) -> bool {
    let bound = BigInt::from(4) * num_traits::pow(BigInt::from(p), (k0 - 1).max(0) as usize);
    b_p * b_p <= bound
}

/// `(sigma, sigma')`.
pub fn slope_of(sd: &SpectralData) -> (Rational64, Rational64) {
    (sd.sigma, sd.sigma_prime)
}

/// Lower bound `sigma + sigma' + val(beta1) + 2 - 2k + t` on `val(E - 1)`.
pub fn euler_e_valuation_floor(sd: &SpectralData, beta1: &PadicNum, t: i64) -> Rational64 {
    let [s0, _] = sd.roots_pi.slopes();
    let [s0p, _] = sd.roots_pi_prime.slopes();
    s0 + s0p + Rational64::from_integer(beta1.val() + 2 - 2 * sd.k + t)
}

/// Integer eigenvalue converted into the base ring.
pub fn padic_from_integer(p: u64, n: &BigInt, precision: u32) -> PadicNum {
    PadicNum::from_bigint(p, n, precision as i64)
}

/// Modulus of the inner extension, for callers building their own towers.
pub fn pi_modulus(sd: &SpectralData) -> Arc<QuadModulus<PadicNum>> {
    let rt = sd.root_tower();
    rt.template.c0().modulus().clone()
}

/// Integer value of a small rational slope, if integral.
pub fn integral_slope(r: Rational64) -> Option<i64> {
    r.is_integer().then(|| r.to_integer()).and_then(|v| v.to_i64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexpansion::make_formal_eigenform;
    use crate::quad_field::{QuadField, QuadInt};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(n: i64, m: i64) -> PadicNum {
        PadicNum::from_i64(11, n, m)
    }

    #[test]
    fn spectral_examples() {
        let sd = spectral_data(&c(11, 6), &c(11, 6), 3, 6).unwrap();
        assert_eq!(sd.roots_pi.kind(), "nonsplit");
        let sd = spectral_data(&c(11, 6), &c(3, 6), 4, 6).unwrap();
        assert_eq!(sd.roots_pi.kind(), "split");
        assert_eq!(sd.roots_pi.slopes(), [Rational64::from_integer(1), Rational64::from_integer(2)]);
        assert!(sd.ordinary_at_pi_prime());
        assert_eq!(slope_of(&sd).0, Rational64::from_integer(1));
        let sd = spectral_data(&c(121, 6), &c(121, 6), 6, 6).unwrap();
        assert_eq!(sd.sigma, Rational64::from_integer(2));
    }

    #[test]
    fn q_f_examples() {
        // x^4 coefficient p^(4-4k), linear coefficient -p^(2-2k) a a' (a' = 22 would give a double root at k = 3)
        let sd = spectral_data(&c(11, 6), &c(33, 6), 3, 6).unwrap();
        let q = q_f_polynomial(&sd).unwrap();
        assert_eq!(q[0], PadicNum::one(11, 6));
        assert_eq!(q[4].val(), 4 - 4 * 3);
        let lin = -(&(&c(11, 6) * &c(33, 6)) * &PadicNum::p_power(11, -4, 6));
        assert!(q[1].approx_eq(&lin));
        // a = a' = 0: (1 - p^(2-2k) x^2)^2
        let z = PadicNum::zero(11, 8);
        let sd = spectral_data(&z, &z, 2, 6).unwrap();
        let q = q_f_polynomial(&sd).unwrap();
        let c2 = PadicNum::p_power(11, -2, 6);
        assert!(q[1].is_zero() && q[3].is_zero());
        assert!(q[2].approx_eq(&(-(&c2 * &c(2, 6)))));
        assert!(q[4].approx_eq(&(&c2 * &c2)));
    }

    #[test]
    fn p_f_examples() {
        let sd = spectral_data(&c(3, 5), &c(5, 5), 2, 5).unwrap();
        let pf = p_f_polynomial(&sd).unwrap();
        assert_eq!(pf.len(), 6);
        assert_eq!(pf[0], PadicNum::one(11, 5));
        let at_p = poly_eval(&pf, &c(11, 5));
        assert!(at_p.is_zero());
    }

    #[test]
    fn e1_norm_is_product_over_roots() {
        let od = ordinary_data(&c(3, 6), 2, 6).unwrap();
        let swapped = OrdinaryData { beta1: od.beta0.clone(), ..od.clone() };
        let product = &euler_e1(&od) * &euler_e1(&swapped);
        assert!(euler_e1_norm(&od.b_p, 2, 6).approx_eq(&product));
        // b_p = 0, k0 = 2: (1 + 1/p)^2
        let e = euler_e1_norm(&PadicNum::zero(11, 8), 2, 6);
        assert_eq!(e.val(), -2);
        assert!(e.approx_eq(&(&c(144, 6) * &PadicNum::p_power(11, -2, 6))));
    }

    #[test]
    fn euler_factor_examples() {
        let od = ordinary_data(&c(3, 3), 2, 3).unwrap();
        assert_eq!(od.beta0.residue(2).unwrap(), BigInt::from(80));
        let e0 = euler_e0(&od).unwrap();
        assert_eq!((e0.clone() - PadicNum::one(11, 3)).val(), 1);
        let e1 = euler_e1(&od);
        assert_eq!(e1.residue(1).unwrap(), BigInt::from(7));
        let sd = spectral_data(&c(11, 3), &c(22, 3), 2, 3).unwrap();
        let zero = PadicNum::exact_zero(11);
        assert!(euler_e(&sd, &zero, 0).unwrap().approx_eq(&PadicNum::one(11, 3)));
    }

    #[test]
    fn ramanujan_examples() {
        assert!(ramanujan_check(&3.into(), 11, 2));
        assert!(!ramanujan_check(&12.into(), 11, 2));
        assert!(ramanujan_check(&0.into(), 11, 2));
    }

    #[test]
    fn aj_scalar_examples() {
        let od = ordinary_data(&c(3, 6), 2, 6).unwrap();
        let sd = spectral_data(&c(11, 6), &c(33, 6), 2, 6).unwrap();
        let s = aj_scalar(&sd, &od, 0).unwrap();
        assert_eq!((s.sign, s.factorial.clone()), (1, BigInt::from(1)));
        assert!(s.l_side.approx_eq(&(&s.aj_side * &s.e0)));
        let sd3 = spectral_data(&c(11, 6), &c(33, 6), 3, 6).unwrap();
        let s = aj_scalar(&sd3, &od, 1).unwrap();
        assert_eq!((s.t, s.sign), (1, -1));
        assert!(aj_scalar(&sd3, &od, 0).is_err());
    }

    fn eigen_setup(a: i64, ap: i64, k: i64, prec: u32) -> (SpectralData, HilbertQExpansion<PadicNum>) {
        let split = Arc::new(QuadField::new(5).unwrap().split_prime(11, prec).unwrap());
        let m = prec as i64;
        let sd = spectral_data(&c(a, m), &c(ap, m), k, prec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(a as u64 * 31 + ap as u64);
        let vals: Vec<i64> = (0..400).map(|_| rng.gen_range(1..1000)).collect();
        let seed = |nu: &QuadInt| {
            let h = (nu.x().rem_euclid(20) * 20 + nu.y().rem_euclid(20)) as usize;
            Some(c(vals[h], m))
        };
        let f = make_formal_eigenform(split, seed, &sd.a_pi, &sd.a_pi_prime, k, 120).unwrap();
        (sd, f)
    }

    #[test]
    fn four_term_recombination() {
        for (a, ap, k) in [(11, 22, 2), (11, 0, 2), (11, 121, 4), (0, 0, 3), (3, 5, 2)] {
            let (sd, f) = eigen_setup(a, ap, k, 6);
            let rt = sd.root_tower();
            let ft = rt.lift_expansion(&f);
            let stabs = [
                [u_eigen_stabilization(&ft, &rt, 0, 0).unwrap(), u_eigen_stabilization(&ft, &rt, 0, 1).unwrap()],
                [u_eigen_stabilization(&ft, &rt, 1, 0).unwrap(), u_eigen_stabilization(&ft, &rt, 1, 1).unwrap()],
            ];
            for i in 0..2 {
                for ip in 0..2 {
                    let s = &stabs[i][ip];
                    assert!(s.u_pi().approx_eq(&s.scale(&rt.alpha[i])), "U_pi eigen {a} {ap} {k}");
                    assert!(s.u_pi_prime().approx_eq(&s.scale(&rt.alpha_prime[ip])));
                }
            }
            let back = project_to_base(&recombine_hilbert(&stabs, &rt).unwrap()).unwrap();
            assert!(back.approx_eq(&f.truncate_bound(back.trace_bound())), "recombination {a} {ap} {k}");
        }
    }
}
