//! Families of Hilbert q-expansions whose coefficients are analytic in the
//! weight, the weight-twisted diagonal restriction built from them, and the
//! scalar assembly of p-adic L-values.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke_spectral::{aj_scalar, euler_e0, AjScalars, OrdinaryData, SpectralData};
use crate::padic::{embed_conj_int, embed_int, teichmuller, PadicNum};
use crate::qexpansion::{HilbertQExpansion, ModularQExpansion};
use crate::quad_field::{PrimeSplit, QuadField, QuadInt};

/// Default truncation degree of a [`LambdaCoeff`].
pub const DEFAULT_DEGREE: usize = 8;

/// `floor(2 sigma h+ (18(p-1)/(2(p-2)) sigma + 2))`, the radius exponent of
/// the weight ball on which a slope-`sigma` family is analytic.
pub fn theta_bound(sigma: &BigRational, h_plus: u64, p: u64) -> Result<u64> {
    if p < 3 {
        return Err(Error::NotOddPrime(p));
    }
    if sigma.is_negative() || h_plus == 0 {
        return Err(Error::InvalidInput(format!("sigma = {sigma}, h+ = {h_plus}")));
    }
    let r = |n: u64| BigRational::from_integer(BigInt::from(n));
    let ratio = BigRational::new(BigInt::from(18 * (p - 1)), BigInt::from(2 * (p - 2)));
    let v = r(2) * sigma * r(h_plus) * (ratio * sigma + r(2));
    Ok(v.floor().to_integer().to_u64().expect("nonnegative"))
}

/// `sum c_m ((w - n0)/p^theta)^m`, a truncated element of the Tate algebra of
/// the ball `val(w - n0) >= theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaCoeff {
    pub series: Vec<PadicNum>,
    pub center: i64,
    pub theta: u32,
}

impl LambdaCoeff {
    pub fn new(series: Vec<PadicNum>, center: i64, theta: u32) -> Result<Self> {
        let c = Self { series, center, theta };
        c.validate()?;
        Ok(c)
    }

    pub fn constant(c: PadicNum, center: i64, theta: u32) -> Self {
        Self { series: vec![c], center, theta }
    }

    fn validate(&self) -> Result<()> {
        let Some(first) = self.series.first() else {
            return Err(Error::InvalidInput("empty series".into()));
        };
        let p = first.p();
        for c in &self.series {
            if c.p() != p {
                return Err(Error::Mismatch("series over different primes".into()));
            }
            if !c.is_zero() && c.val() < 0 {
                return Err(Error::NotPIntegral(p));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> u64 {
        self.series[0].p()
    }

    pub fn degree(&self) -> usize {
        self.series.len() - 1
    }

    /// `(w - n0)/p^theta`, an integer on the ball.
    pub fn ball_coordinate(&self, w: i64) -> Result<BigInt> {
        let diff = BigInt::from(w) - BigInt::from(self.center);
        let radius = crate::padic::p_pow(self.p(), self.theta as i64);
        let (q, r) = diff.div_rem(&radius);
        if !r.is_zero() {
            return Err(Error::OutsideBall { s: w, center: self.center, radius: self.theta as i64 });
        }
        Ok(q)
    }

    pub fn eval(&self, w: i64) -> Result<PadicNum> {
        let y = self.ball_coordinate(w)?;
        let p = self.p();
        let prec = self.series.iter().map(|c| c.abs_prec()).min().expect("nonempty");
        let y = PadicNum::from_bigint(p, &y, prec.max(1));
        let mut it = self.series.iter().rev();
        let mut acc = it.next().expect("nonempty").clone();
        for c in it {
            acc = &(&acc * &y) + c;
        }
        Ok(acc)
    }
}

/// A family `nu -> a_nu(w)` over the ball around `n0`, specializing at
/// an integer `s` in the ball to a form of parallel weight `s + 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertFamily {
    pub split: Arc<PrimeSplit>,
    pub sigma: Rational64,
    pub sigma_prime: Rational64,
    pub n0: i64,
    pub theta: u32,
    pub trace_bound: u64,
    pub coeffs: BTreeMap<QuadInt, LambdaCoeff>,
    /// Optional `T_pi`, `T_pi'` eigenvalue families, used to check the slopes.
    pub eigenvalues: Option<[LambdaCoeff; 2]>,
}

impl HilbertFamily {
    pub fn new(
        split: Arc<PrimeSplit>,
        sigma: Rational64,
        sigma_prime: Rational64,
        n0: i64,
        theta: u32,
        trace_bound: u64,
        coeffs: BTreeMap<QuadInt, LambdaCoeff>,
    ) -> Result<Self> {
        for (nu, c) in &coeffs {
            if !nu.is_totally_positive() || nu.trace() as u64 > trace_bound {
                return Err(Error::InvalidInput(format!("index {nu:?} outside the cone or bound")));
            }
            if c.p() != split.p() || c.center != n0 || c.theta != theta {
                return Err(Error::Mismatch(format!("coefficient at {nu:?} lives on another ball")));
            }
        }
        Ok(Self { split, sigma, sigma_prime, n0, theta, trace_bound, coeffs, eigenvalues: None })
    }

    /// The family constant in the weight variable with the coefficients of `f`.
    pub fn constant(f: &HilbertQExpansion<PadicNum>, n0: i64, theta: u32) -> Result<Self> {
        let coeffs = f.coeffs().iter().map(|(k, c)| (k.clone(), LambdaCoeff::constant(c.clone(), n0, theta))).collect();
        let zero = Rational64::zero();
        Self::new(f.split().clone(), zero, zero, n0, theta, f.trace_bound(), coeffs)
    }

    pub fn with_eigenvalues(mut self, a_pi: LambdaCoeff, a_pi_prime: LambdaCoeff) -> Self {
        self.eigenvalues = Some([a_pi, a_pi_prime]);
        self
    }

    pub fn check_ball(&self, s: i64) -> Result<()> {
        let diff = BigInt::from(s) - BigInt::from(self.n0);
        if !(diff % crate::padic::p_pow(self.split.p(), self.theta as i64)).is_zero() {
            return Err(Error::OutsideBall { s, center: self.n0, radius: self.theta as i64 });
        }
        Ok(())
    }

    /// The weight-`(s+2, s+2)` member.
    pub fn specialize(&self, s: i64) -> Result<HilbertQExpansion<PadicNum>> {
        self.check_ball(s)?;
        if s < 0 {
            return Err(Error::InvalidWeights(format!("classical point {s} < 0")));
        }
        if let Some([a, ap]) = &self.eigenvalues {
            for (e, sigma) in [(a, self.sigma), (ap, self.sigma_prime)] {
                let v = e.eval(s)?;
                if !v.is_zero() && Rational64::from_integer(v.val()) != sigma {
                    return Err(Error::Mismatch(format!("eigenvalue slope {} differs from {sigma}", v.val())));
                }
            }
        }
        let mut coeffs = BTreeMap::new();
        for (nu, c) in &self.coeffs {
            coeffs.insert(nu.clone(), c.eval(s)?);
        }
        HilbertQExpansion::new(self.split.clone(), (s + 2, s + 2), self.trace_bound, coeffs, true)
    }

    /// Index shift `nu -> p nu` applied to every coefficient family.
    pub fn v_p(&self) -> Self {
        let p = self.split.p() as i64;
        let bound = self.trace_bound.saturating_mul(self.split.p());
        let coeffs = self.coeffs.iter().map(|(k, c)| (k.clone() * QuadInt::from_int(k.field(), p), c.clone())).collect();
        Self { trace_bound: bound, coeffs, ..self.clone() }
    }
}

/// One summand `mu(z)^-1 [<z>] (x) a_nu` of a coefficient of the twisted
/// restriction, for `z` an embedding of `nu` that is a unit.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistRecord {
    pub nu: QuadInt,
    pub teich_inv: PadicNum,
    pub one_unit: PadicNum,
    pub a: LambdaCoeff,
}

impl TwistRecord {
    fn new(nu: &QuadInt, z: &PadicNum, a: &LambdaCoeff) -> Result<Self> {
        if !z.is_unit() {
            return Err(Error::NotAUnit(format!("embedding of {nu:?}")));
        }
        let (mu, one_unit) = teichmuller(z)?;
        Ok(Self { nu: nu.clone(), teich_inv: mu.inv()?, one_unit, a: a.clone() })
    }

    /// `mu(z)^-1 <z>^j a_nu(s)`.
    pub fn evaluate(&self, j: i64, s: i64) -> Result<PadicNum> {
        Ok(&(&self.teich_inv * &self.one_unit.pow(j)?) * &self.a.eval(s)?)
    }
}

/// Per trace `n`: the records of `{nu : pi' does not divide nu}`, twisted
/// by the conjugate embedding, and of `{nu : pi does not divide nu}`,
/// twisted by the embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaH {
    pub p: u64,
    pub precision: u32,
    pub n0: i64,
    pub theta: u32,
    pub bound: u64,
    pub terms: BTreeMap<u64, (Vec<TwistRecord>, Vec<TwistRecord>)>,
}

pub fn build_lambda_h(fam: &HilbertFamily) -> Result<LambdaH> {
    let split = &fam.split;
    let mut terms: BTreeMap<u64, (Vec<TwistRecord>, Vec<TwistRecord>)> = BTreeMap::new();
    for (nu, a) in &fam.coeffs {
        let n = nu.trace() as u64;
        let entry = terms.entry(n).or_default();
        if !split.pi_conj().divides(nu) {
            entry.0.push(TwistRecord::new(nu, &embed_conj_int(nu, split), a)?);
        }
        if !split.pi().divides(nu) {
            entry.1.push(TwistRecord::new(nu, &embed_int(nu, split), a)?);
        }
    }
    Ok(LambdaH {
        p: split.p(),
        precision: split.precision(),
        n0: fam.n0,
        theta: fam.theta,
        bound: fam.trace_bound,
        terms,
    })
}

/// The specialization at `(j, s)`: the coefficient at `n` is
/// `1/2 sum_(pi' !| nu) mu(nu')^-1 <nu'>^j a_nu(s) - 1/2 sum_(pi !| nu) mu(nu)^-1 <nu>^j a_nu(s)`,
/// of weight `2(s+2) + 2j`, followed by `U_p^(d!)` when a depth `d` is given.
pub fn specialize_h(h: &LambdaH, j: i64, s: i64, e_ord_depth: Option<u32>) -> Result<ModularQExpansion<PadicNum>> {
    let p = h.p;
    if j < -1 || (j + 1) % (p as i64 - 1) != 0 {
        return Err(Error::BadTwist { j, modulus: p - 1 });
    }
    let diff = BigInt::from(s) - BigInt::from(h.n0);
    if !(diff % crate::padic::p_pow(p, h.theta as i64)).is_zero() {
        return Err(Error::OutsideBall { s, center: h.n0, radius: h.theta as i64 });
    }
    let weight = 2 * (s + 2) + 2 * j;
    if weight < 2 {
        return Err(Error::InvalidWeights(format!("restricted weight {weight} < 2")));
    }
    let prec = h.precision as i64;
    let half = PadicNum::from_rational(p, &BigRational::new(BigInt::one(), BigInt::from(2)), prec);
    let mut coeffs = BTreeMap::new();
    for (n, (conj_side, side)) in &h.terms {
        let mut acc = PadicNum::zero(p, prec);
        for r in conj_side {
            acc = &acc + &r.evaluate(j, s)?;
        }
        for r in side {
            acc = &acc - &r.evaluate(j, s)?;
        }
        let c = &half * &acc;
        if !c.is_zero() {
            coeffs.insert(*n, c);
        }
    }
    let out = ModularQExpansion::new(p, weight, h.bound, coeffs)?;
    match e_ord_depth {
        Some(d) => out.e_ord_approx(d),
        None => Ok(out),
    }
}

/// `mu(z)^-1 <z>^j == z^j`, which holds when `p - 1` divides `j + 1`.
pub fn teichmuller_collapse(z: &PadicNum, j: i64) -> Result<bool> {
    let (mu, one_unit) = teichmuller(z)?;
    let lhs = &mu.inv()? * &one_unit.pow(j)?;
    Ok(lhs.approx_eq(&z.pow(j)?))
}

/// Both sides of `e h^(p) = h - beta_1 V_p h`: `projected` is the
/// externally supplied projection of the depleted form and `h` the
/// level-`N` form.
pub fn hida_stabilization_identity(
    projected: &ModularQExpansion<PadicNum>,
    h: &ModularQExpansion<PadicNum>,
    beta1: &PadicNum,
) -> Result<(ModularQExpansion<PadicNum>, ModularQExpansion<PadicNum>)> {
    let rhs = h.sub(&h.v_p().scale(beta1))?;
    Ok((projected.clone(), rhs))
}

pub fn check_hida_stabilization(
    projected: &ModularQExpansion<PadicNum>,
    h: &ModularQExpansion<PadicNum>,
    beta1: &PadicNum,
) -> Result<bool> {
    let (lhs, rhs) = hida_stabilization_identity(projected, h, beta1)?;
    Ok(lhs.approx_eq(&rhs))
}

/// `E_0^-1` times the pairing with the stabilized form.
pub fn lp_scalar_assembly(pairing_value: &PadicNum, od: &OrdinaryData) -> Result<PadicNum> {
    let e0 = euler_e0(od)?;
    if e0.is_zero() {
        return Err(Error::DivisionByZero { abs_prec: e0.abs_prec() });
    }
    pairing_value.div(&e0)
}

/// The Abel-Jacobi value `(-1)^t t! E_0 E_1 / E * L_p` from an L-value, with
/// the scalars.
pub fn gross_zagier_assembly(
    l_value: &PadicNum,
    sd: &SpectralData,
    od: &OrdinaryData,
    t: i64,
) -> Result<(PadicNum, AjScalars)> {
    let scalars = aj_scalar(sd, od, t)?;
    Ok((&scalars.l_side * l_value, scalars))
}

#[derive(Serialize, Deserialize)]
struct FamilyRecord {
    nu: [i64; 2],
    #[serde(flatten)]
    coeff: LambdaCoeff,
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    schema: String,
    #[serde(rename = "D")]
    d: i64,
    p: u64,
    precision: u32,
    sigma: String,
    sigma_prime: String,
    n0: i64,
    theta: u32,
    trace_bound: String,
    coeffs: Vec<FamilyRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<[LambdaCoeff; 2]>,
}

fn parse_rational(s: &str) -> Result<Rational64> {
    s.parse::<Rational64>().map_err(|e| Error::InvalidInput(format!("rational {s:?}: {e}")))
}

impl HilbertFamily {
    pub fn to_json(&self) -> serde_json::Value {
        let file = FamilyFile {
            schema: crate::SCHEMA.into(),
            d: self.split.field().d(),
            p: self.split.p(),
            precision: self.split.precision(),
            sigma: self.sigma.to_string(),
            sigma_prime: self.sigma_prime.to_string(),
            n0: self.n0,
            theta: self.theta,
            trace_bound: self.trace_bound.to_string(),
            coeffs: self.coeffs.iter().map(|(k, c)| FamilyRecord { nu: [*k.x(), *k.y()], coeff: c.clone() }).collect(),
            eigenvalues: self.eigenvalues.clone(),
        };
        serde_json::to_value(file).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let file: FamilyFile =
            serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(format!("family JSON: {e}")))?;
        if file.schema != crate::SCHEMA {
            return Err(Error::InvalidInput(format!("schema {:?}", file.schema)));
        }
        let field = QuadField::with_options(file.d, false)?;
        let split = Arc::new(field.split_prime(file.p, file.precision)?);
        let bound = file
            .trace_bound
            .parse::<u64>()
            .map_err(|e| Error::InvalidInput(format!("trace_bound: {e}")))?;
        let mut coeffs = BTreeMap::new();
        for r in file.coeffs {
            r.coeff.validate()?;
            coeffs.insert(field.int(r.nu[0], r.nu[1]), r.coeff);
        }
        let fam = Self::new(
            split,
            parse_rational(&file.sigma)?,
            parse_rational(&file.sigma_prime)?,
            file.n0,
            file.theta,
            bound,
            coeffs,
        )?;
        Ok(match file.eigenvalues {
            Some([a, b]) => fam.with_eigenvalues(a, b),
            None => fam,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke_spectral::{ordinary_data, spectral_data};
    use crate::qexpansion::{aj_integrand, make_formal_eigenform};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn theta_bound_examples() {
        assert_eq!(theta_bound(&rat(0, 1), 1, 11).unwrap(), 0);
        assert_eq!(theta_bound(&rat(1, 1), 1, 11).unwrap(), 24);
        assert_eq!(theta_bound(&rat(1, 2), 1, 11).unwrap(), 7);
        assert!(theta_bound(&rat(1, 1), 1, 2).is_err());
    }

    fn split(d: i64, p: u64, prec: u32) -> Arc<PrimeSplit> {
        Arc::new(QuadField::new(d).unwrap().split_prime(p, prec).unwrap())
    }

    #[test]
    fn single_coefficient_at_one_cancels() {
        let s = split(5, 11, 4);
        let one = s.field().int(1, 0);
        let a = LambdaCoeff::constant(PadicNum::from_i64(11, 7, 4), 0, 0);
        let fam = HilbertFamily::new(s, Rational64::zero(), Rational64::zero(), 0, 0, 5, [(one, a)].into()).unwrap();
        let h = build_lambda_h(&fam).unwrap();
        let (c, d) = &h.terms[&2];
        assert_eq!((c.len(), d.len()), (1, 1));
        assert!(c[0].teich_inv.approx_eq(&PadicNum::one(11, 4)));
        let out = specialize_h(&h, -1, 0, None).unwrap();
        assert!(out.is_negligible());
    }

    #[test]
    fn pi_divisible_index_only_in_first_sum() {
        let s = split(5, 11, 4);
        let nu = s.pi().clone();
        let a = LambdaCoeff::constant(PadicNum::one(11, 4), 0, 0);
        let fam = HilbertFamily::new(s, Rational64::zero(), Rational64::zero(), 0, 0, 10, [(nu.clone(), a)].into()).unwrap();
        let h = build_lambda_h(&fam).unwrap();
        let (c, d) = &h.terms[&(nu.trace() as u64)];
        assert_eq!((c.len(), d.len()), (1, 0));
    }

    #[test]
    fn bad_twist_and_ball() {
        let s = split(5, 11, 4);
        let fam = HilbertFamily::new(s, Rational64::zero(), Rational64::zero(), 0, 1, 5, BTreeMap::new()).unwrap();
        let h = build_lambda_h(&fam).unwrap();
        assert!(matches!(specialize_h(&h, 0, 0, None), Err(Error::BadTwist { .. })));
        assert!(matches!(specialize_h(&h, -1, 3, None), Err(Error::OutsideBall { .. })));
        assert!(specialize_h(&h, 9, 11, None).unwrap().is_negligible());
    }

    #[test]
    fn path_equality_example() {
        let s = split(5, 11, 4);
        let seed = |nu: &QuadInt| Some(PadicNum::from_i64(11, nu.x() * 3 + nu.y() + 1, 4));
        let k = 2;
        let f = make_formal_eigenform(s.clone(), seed, &PadicNum::from_i64(11, 5, 4), &PadicNum::from_i64(11, 7, 4), k, 30)
            .unwrap();
        let fam = HilbertFamily::constant(&f, 0, 0).unwrap();
        let h = build_lambda_h(&fam).unwrap();
        let via_family = specialize_h(&h, -1, k - 2, None).unwrap();
        let direct = aj_integrand(&fam.specialize(k - 2).unwrap(), 0).unwrap();
        assert!(!direct.is_negligible());
        assert_eq!(via_family.weight(), direct.weight());
        assert!(via_family.approx_eq(&direct));
    }

    #[test]
    fn lambda_coeff_eval() {
        // 1 + 2Y + Y^2 with Y = (w - 3)/11
        let c = |n| PadicNum::from_i64(11, n, 5);
        let l = LambdaCoeff::new(vec![c(1), c(2), c(1)], 3, 1).unwrap();
        assert!(l.eval(25).unwrap().approx_eq(&c(9)));
        assert!(matches!(l.eval(4), Err(Error::OutsideBall { .. })));
    }

    #[test]
    fn family_json_round_trip() {
        let s = split(5, 11, 3);
        let c = |n| PadicNum::from_i64(11, n, 3);
        let coeffs = [(s.field().int(1, 1), LambdaCoeff::new(vec![c(1), c(5)], 2, 1).unwrap())].into();
        let fam = HilbertFamily::new(s, Rational64::new(1, 2), Rational64::zero(), 2, 1, 9, coeffs)
            .unwrap()
            .with_eigenvalues(LambdaCoeff::constant(c(3), 2, 1), LambdaCoeff::constant(c(4), 2, 1));
        let back = HilbertFamily::from_json(&fam.to_json()).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn slope_assertion_checked() {
        let s = split(5, 11, 3);
        let c = |n| PadicNum::from_i64(11, n, 3);
        let fam = HilbertFamily::new(s, Rational64::zero(), Rational64::zero(), 0, 0, 5, BTreeMap::new())
            .unwrap()
            .with_eigenvalues(LambdaCoeff::constant(c(22), 0, 0), LambdaCoeff::constant(c(1), 0, 0));
        assert!(matches!(fam.specialize(0), Err(Error::Mismatch(_))));
    }

    #[test]
    fn hida_identity_examples() {
        let h = ModularQExpansion::from_fn(11, 2, 40, |n| Some(PadicNum::from_i64(11, n as i64 + 1, 3)));
        let zero = PadicNum::zero(11, 3);
        assert!(check_hida_stabilization(&h, &h, &zero).unwrap());
        let beta = PadicNum::from_i64(11, 44, 3);
        let direct = ModularQExpansion::from_fn(11, 2, 40, |n| {
            let mut v = PadicNum::from_i64(11, n as i64 + 1, 3);
            if n % 11 == 0 {
                v = &v - &(&beta * &PadicNum::from_i64(11, n as i64 / 11 + 1, 3));
            }
            Some(v)
        });
        assert!(check_hida_stabilization(&direct, &h, &beta).unwrap());
        let mut perturbed = direct.coeffs().clone();
        perturbed.insert(22, PadicNum::from_i64(11, 1, 3));
        let perturbed = ModularQExpansion::new(11, 2, 40, perturbed).unwrap();
        assert!(!check_hida_stabilization(&perturbed, &h, &beta).unwrap());
    }

    #[test]
    fn lp_assembly_examples() {
        let od = ordinary_data(&PadicNum::from_i64(11, 3, 4), 2, 4).unwrap();
        let e0 = euler_e0(&od).unwrap();
        assert!(lp_scalar_assembly(&e0, &od).unwrap().approx_eq(&PadicNum::one(11, 4)));
        assert!(lp_scalar_assembly(&PadicNum::zero(11, 4), &od).unwrap().is_zero());
        let sd = spectral_data(&PadicNum::from_i64(11, 5, 4), &PadicNum::from_i64(11, 7, 4), 3, 4).unwrap();
        let lp = PadicNum::from_i64(11, 13, 4);
        let (aj, sc) = gross_zagier_assembly(&lp, &sd, &od, 1).unwrap();
        assert!(aj.div(&lp).unwrap().approx_eq(&sc.l_side));
        assert!((&sc.aj_side * &sc.e0).approx_eq(&sc.l_side));
    }
}
