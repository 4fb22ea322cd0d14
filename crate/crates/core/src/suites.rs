//! Verification suites, each producing a [`Report`].

use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::hecke_spectral::{
    ordinary_data, project_to_base, recombination_numerator, recombine_hilbert, recombine_modular, root_gap_product,
    spectral_data, stabilize_modular, u_eigen_stabilization, SpectralData,
};
use crate::padic::{Coeff, PadicNum};
use crate::pipeline::{apply_ops, Expansion, Op};
use crate::qexpansion::{make_formal_eigenform, make_modular_eigenform, HilbertQExpansion};
use crate::quad_field::{PrimeSplit, QuadField, QuadInt};
use crate::symbolic::{
    euler_summation_report, random_form, random_padic, random_seed_table, scholl_report, summation_grid,
    verify_operator_identities, CheckResult, Report, ADMISSIBLE_PAIRS,
};

pub const SUITES: [&str; 6] =
    ["euler-summation", "scholl", "operator-identities", "kernel-lemma", "recombination", "precision-soundness"];

/// Knobs shared by the suites; each suite reads the ones it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteParams {
    pub trials: usize,
    pub seed: u64,
    pub k: Option<i64>,
    pub t: Option<i64>,
    pub n: Option<usize>,
    pub d: Option<i64>,
    pub p: Option<u64>,
    pub precision: u32,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self { trials: 10, seed: 0, k: None, t: None, n: None, d: None, p: None, precision: 3 }
    }
}

pub fn run_suite(name: &str, params: &SuiteParams) -> Result<Report> {
    match name {
        "euler-summation" => {
            let points = match params.k {
                Some(k) => vec![(k, params.t.unwrap_or(0))],
                None => summation_grid(),
            };
            Ok(euler_summation_report(&points))
        }
        "scholl" => Ok(scholl_report(params.n.unwrap_or(4))),
        "operator-identities" => verify_operator_identities(params.trials, params.seed),
        "kernel-lemma" => {
            let pairs = match (params.d, params.p) {
                (Some(d), Some(p)) => vec![(d, p)],
                (None, None) => KERNEL_LEMMA_PAIRS.to_vec(),
                _ => return Err(Error::InvalidInput("give both D and p, or neither".into())),
            };
            let ts: Vec<u32> = match params.t {
                Some(t) if t >= 0 => vec![t as u32],
                Some(t) => return Err(Error::InvalidInput(format!("t = {t} < 0"))),
                None => vec![0, 1, 2],
            };
            kernel_lemma_report(params.trials, &pairs, &ts, params.precision, params.seed)
        }
        "recombination" => recombination_report(params.trials, params.precision.max(4), params.seed),
        "precision-soundness" => precision_soundness_report(params.trials, params.seed),
        other => Err(Error::InvalidInput(format!("unknown suite {other:?}; expected one of {SUITES:?}"))),
    }
}

pub const KERNEL_LEMMA_PAIRS: [(i64, u64); 3] = [(5, 11), (5, 19), (13, 17)];

fn split_for(d: i64, p: u64, precision: u32) -> Result<Arc<PrimeSplit>> {
    Ok(Arc::new(QuadField::new(d)?.split_prime(p, precision)?))
}

/// `restrict(theta^(-1-t) (V_pi' f)^[pi])` vanishes at every `n` divisible
/// by `p`, on random forms.
pub fn kernel_lemma_report(
    trials: usize,
    pairs: &[(i64, u64)],
    ts: &[u32],
    precision: u32,
    seed: u64,
) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("kernel-lemma");
    for &(d, p) in pairs {
        let split = split_for(d, p, precision)?;
        let mut ok = vec![true; ts.len()];
        let mut divisible_checked = vec![0usize; ts.len()];
        let mut nonzero_elsewhere = vec![0usize; ts.len()];
        let mut bound = 0;
        for _ in 0..trials {
            let f = random_form(&mut rng, &split, (2, 2), 40);
            let depleted = f.v_pi_prime().deplete_pi();
            for (slot, &t) in ts.iter().enumerate() {
                let g = depleted.theta_inverse(t + 1)?.restrict();
                bound = g.bound();
                for (n, c) in g.coeffs() {
                    if n % p == 0 {
                        divisible_checked[slot] += 1;
                        ok[slot] &= c.is_negligible();
                    } else if !c.is_negligible() {
                        nonzero_elsewhere[slot] += 1;
                    }
                }
            }
        }
        for (slot, &t) in ts.iter().enumerate() {
            let pass = ok[slot] && nonzero_elsewhere[slot] > 0;
            let terms = vec![
                format!("traces n <= {} with p | n: {}", bound, bound / p),
                format!("stored coefficients at p | n: {}", divisible_checked[slot]),
                format!("nonzero coefficients at p !| n: {}", nonzero_elsewhere[slot]),
            ];
            report.push(CheckResult::new(
                "kernel_lemma",
                json!({"D": d, "p": p, "t": t, "trials": trials}),
                pass,
                terms,
            ));
        }
    }
    Ok(report)
}

/// Random eigenvalue of valuation 0, 1, 2 or exactly zero.
fn random_eigenvalue(rng: &mut ChaCha8Rng, p: u64, precision: u32) -> PadicNum {
    let unit = loop {
        let u: i64 = rng.gen_range(1..(p * p) as i64);
        if u % p as i64 != 0 {
            break u;
        }
    };
    let m = precision as i64;
    match rng.gen_range(0..4) {
        0 => PadicNum::from_i64(p, unit, m),
        1 => PadicNum::from_i64(p, unit * p as i64, m),
        2 => PadicNum::from_i64(p, unit * (p * p) as i64, m),
        _ => PadicNum::zero(p, m + 4),
    }
}

/// Draws spectral data until the Hecke polynomials have distinct roots.
pub fn random_spectral_data(rng: &mut ChaCha8Rng, p: u64, precision: u32) -> (SpectralData, i64) {
    loop {
        let k = rng.gen_range(2..=4);
        let a = random_eigenvalue(rng, p, precision);
        let ap = random_eigenvalue(rng, p, precision);
        if let Ok(sd) = spectral_data(&a, &ap, k, precision) {
            if sd.recombination_loss().is_ok() {
                return (sd, k);
            }
        }
    }
}

/// Indices prime to `p`.
fn is_primitive(nu: &QuadInt, split: &PrimeSplit) -> bool {
    !split.pi().divides(nu) && !split.pi_conj().divides(nu)
}

pub const EIGENVALUE_EXTRA_DIGITS: u32 = 4;

/// Four-term and two-term stabilization and recombination on random
/// eigenforms.
pub fn recombination_report(trials: usize, precision: u32, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("recombination");
    for trial in 0..trials {
        let (d, p) = ADMISSIBLE_PAIRS[rng.gen_range(0..ADMISSIBLE_PAIRS.len())];
        let split = split_for(d, p, precision)?;
        let (sd, k) = random_spectral_data(&mut rng, p, precision + EIGENVALUE_EXTRA_DIGITS);
        let seed_fn = random_seed_table(&mut rng, p, precision);
        let f = make_formal_eigenform(split.clone(), seed_fn, &sd.a_pi, &sd.a_pi_prime, k, 80)?;
        let params = json!({
            "trial": trial, "D": d, "p": p, "k": k,
            "a_pi": sd.a_pi.to_string(), "a_pi_prime": sd.a_pi_prime.to_string(),
            "kinds": [sd.roots_pi.kind(), sd.roots_pi_prime.kind()],
        });
        let rt = sd.root_tower();
        let ft = rt.lift_expansion(&f);
        let mut stabs: Vec<Vec<HilbertQExpansion<crate::Tower>>> = Vec::new();
        let (mut eigen_ok, mut primitive_ok) = (true, true);
        for i in 0..2 {
            let mut row = Vec::new();
            for ip in 0..2 {
                let s = u_eigen_stabilization(&ft, &rt, i, ip)?;
                eigen_ok &= s.u_pi().approx_eq(&s.scale(&rt.alpha[i]));
                eigen_ok &= s.u_pi_prime().approx_eq(&s.scale(&rt.alpha_prime[ip]));
                for (nu, c) in ft.coeffs() {
                    if nu.trace() as u64 <= s.trace_bound() && is_primitive(nu, &split) {
                        primitive_ok &= s.coeff(nu).is_some_and(|x| x.approx_eq(c));
                    }
                }
                row.push(s);
            }
            stabs.push(row);
        }
        let stabs = [[stabs[0][0].clone(), stabs[0][1].clone()], [stabs[1][0].clone(), stabs[1][1].clone()]];
        report.push(CheckResult::new("u_eigen", params.clone(), eigen_ok, Vec::new()));
        report.push(CheckResult::new("primitive_coefficients", params.clone(), primitive_ok, Vec::new()));

        let back = project_to_base(&recombine_hilbert(&stabs, &rt)?)?;
        let reproduced = !back.coeffs().is_empty() && back.approx_eq(&f.truncate_bound(back.trace_bound()));
        report.push(CheckResult::new(
            "four_term_recombination",
            params.clone(),
            reproduced,
            vec![format!("bound {} with {} terms", back.trace_bound(), back.coeffs().len())],
        ));

        let [g, gp] = sd.root_gap_valuations()?;
        let predicted = g + gp;
        let numer = recombination_numerator(&stabs, &rt)?;
        let quotient = numer.scale(&root_gap_product(&rt).try_inv()?);
        let mut losses = std::collections::BTreeSet::new();
        for (nu, c) in numer.coeffs() {
            if let Some(q) = quotient.coeff(nu) {
                losses.insert(rt.normalized_precision(c) - rt.normalized_precision(q));
            }
        }
        let exact = losses.len() == 1 && losses.contains(&predicted);
        report.push(CheckResult::new(
            "division_loss",
            params.clone(),
            exact,
            vec![format!("predicted {predicted}, observed {losses:?}")],
        ));

        // two-term recombination for an ordinary elliptic eigenform
        let k0 = 2 * rng.gen_range(1..=2);
        let b_p = loop {
            let b: i64 = rng.gen_range(-(p as i64) * 3..=(p as i64) * 3);
            if b % p as i64 != 0 {
                break PadicNum::from_i64(p, b, precision as i64);
            }
        };
        let od = ordinary_data(&b_p, k0, precision)?;
        let table: Vec<PadicNum> = (0..64).map(|_| random_padic(&mut rng, p, precision)).collect();
        let gform = make_modular_eigenform(|n| Some(table[(n % 64) as usize].clone()), &b_p, k0, 300, precision as i64);
        let g0 = stabilize_modular(&gform, &od.beta1)?;
        let g1 = stabilize_modular(&gform, &od.beta0)?;
        let eigen = g0.u_p().approx_eq(&g0.scale(&od.beta0)) && g1.u_p().approx_eq(&g1.scale(&od.beta1));
        let back = recombine_modular(&g0, &g1, &od.beta0, &od.beta1)?;
        let gap = (&od.beta0 - &od.beta1).valuation()?;
        let loss = gform.min_abs_prec() - back.min_abs_prec();
        let ok = eigen && back.approx_eq(&gform) && loss == gap;
        report.push(CheckResult::new(
            "two_term_recombination",
            json!({"trial": trial, "p": p, "k0": k0, "b_p": b_p.to_string()}),
            ok,
            vec![format!("loss {loss}, val(beta0 - beta1) = {gap}")],
        ));
    }
    Ok(report)
}

/// A pipeline on Hilbert inputs, with the per-op precondition that
/// `theta_inverse` only sees depleted forms.
pub fn random_pipeline(rng: &mut ChaCha8Rng) -> Vec<Op> {
    let mut ops = Vec::new();
    let mut parallel = true;
    for _ in 0..rng.gen_range(1..=4) {
        match rng.gen_range(0..11) {
            0 => ops.push(Op::VPi),
            1 => ops.push(Op::VPiPrime),
            2 => ops.push([Op::UPi, Op::UPiPrime][rng.gen_range(0..2)].clone()),
            3 => ops.push([Op::DepletePi, Op::DepletePiPrime, Op::DepleteP][rng.gen_range(0..3)].clone()),
            4 => {
                ops.push([Op::Theta, Op::ThetaPrime][rng.gen_range(0..2)].clone());
                parallel = false;
            }
            5 => {
                ops.push(Op::DepletePi);
                ops.push(Op::ThetaInverse(rng.gen_range(1..=2)));
                parallel = false;
            }
            6 => {
                ops.push(Op::DepletePiPrime);
                ops.push(Op::ThetaPrimeInverse(rng.gen_range(1..=2)));
                parallel = false;
            }
            7 => ops.push(Op::Scale(BigInt::from(rng.gen_range(-50..=50)))),
            8 if parallel => ops.push([Op::HeckeTPi, Op::HeckeTPiPrime][rng.gen_range(0..2)].clone()),
            9 => ops.push(Op::VP),
            _ => ops.push(Op::UP),
        }
    }
    if rng.gen_bool(0.5) {
        ops.push(Op::Restrict);
        if rng.gen_bool(0.5) {
            ops.push([Op::VP, Op::UP][rng.gen_range(0..2)].clone());
        }
    }
    ops
}

/// A form whose coefficient at `nu` is a residue determined by `(seed, nu)`
/// alone, so that forms at different precisions and bounds agree.
pub fn consistent_random_form(
    split: &Arc<PrimeSplit>,
    bound: u64,
    seed: u64,
    residue_digits: u32,
) -> HilbertQExpansion<PadicNum> {
    let p = split.p();
    let prec = split.precision() as i64;
    HilbertQExpansion::from_fn(split.clone(), (2, 2), bound, |nu| {
        let h = seed ^ (*nu.x() as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (*nu.y() as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let r = random_padic(&mut rng, p, residue_digits);
        Some(PadicNum::from_residue(p, &r.residue(residue_digits as i64).ok()?, prec))
    })
}

/// Outcome of one metamorphic trial.
#[derive(Clone, Debug)]
pub struct MetamorphicTrial {
    pub d: i64,
    pub p: u64,
    pub precision: u32,
    pub bound: u64,
    pub ops: Vec<Op>,
    pub agrees: bool,
    pub output_bound: u64,
    pub output_terms: usize,
}

/// Runs `ops` at `(M, B)` and at `(M + 2, 2B)` and compares after
/// truncating the latter. Pipelines that exhaust their bound at `(M, B)`
/// return `None`.
pub fn metamorphic_trial(d: i64, p: u64, precision: u32, bound: u64, ops: &[Op], seed: u64) -> Result<Option<MetamorphicTrial>> {
    let digits = precision + 2;
    let lo_split = split_for(d, p, precision)?;
    let hi_split = split_for(d, p, precision + 2)?;
    let lo_in = consistent_random_form(&lo_split, bound, seed, digits);
    let hi_in = consistent_random_form(&hi_split, 2 * bound, seed, digits);
    let lo = match apply_ops(Expansion::Hilbert(lo_in), ops) {
        Ok((x, _)) => x,
        Err(e) if matches!(e.error, Error::InsufficientBound { .. }) => return Ok(None),
        Err(e) => return Err(e.error),
    };
    let (hi, _) = apply_ops(Expansion::Hilbert(hi_in), ops).map_err(|e| e.error)?;
    let back = hi.truncate(lo.bound(), 2);
    let terms = match &lo {
        Expansion::Hilbert(f) => f.coeffs().len(),
        Expansion::Modular(g) => g.coeffs().len(),
    };
    Ok(Some(MetamorphicTrial {
        d,
        p,
        precision,
        bound,
        ops: ops.to_vec(),
        agrees: back.content_json() == lo.content_json(),
        output_bound: lo.bound(),
        output_terms: terms,
    }))
}

/// Random pipelines recomputed at higher precision and bound reproduce
/// their output exactly after truncation.
pub fn precision_soundness_report(trials: usize, seed: u64) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new("precision-soundness");
    let mut done = 0;
    while done < trials {
        let (d, p) = ADMISSIBLE_PAIRS[rng.gen_range(0..ADMISSIBLE_PAIRS.len())];
        let precision = rng.gen_range(2..=4);
        let bound = rng.gen_range(20..=40);
        let ops = random_pipeline(&mut rng);
        let form_seed = rng.gen();
        let Some(t) = metamorphic_trial(d, p, precision, bound, &ops, form_seed)? else {
            continue;
        };
        let names: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
        report.push(CheckResult::new(
            "metamorphic",
            json!({"D": d, "p": p, "M": precision, "B": bound, "ops": names}),
            t.agrees,
            vec![format!("output bound {} with {} terms", t.output_bound, t.output_terms)],
        ));
        done += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_runs_and_passes() {
        let params = SuiteParams { trials: 2, seed: 5, ..Default::default() };
        for name in SUITES {
            let r = run_suite(name, &params).unwrap();
            assert!(!r.checks.is_empty(), "{name}");
            for c in &r.checks {
                assert!(c.passed(), "{name}: {c:?}");
            }
        }
        assert!(run_suite("nope", &params).is_err());
    }

    #[test]
    fn metamorphic_detects_precision_dependence() {
        let ops = vec![Op::VPi, Op::TruncatePrecision(1)];
        let t = metamorphic_trial(5, 11, 3, 30, &ops, 9).unwrap().unwrap();
        assert!(t.agrees);
        // an extra digit dropped on one side only is caught
        let split_lo = split_for(5, 11, 3).unwrap();
        let split_hi = split_for(5, 11, 5).unwrap();
        let lo = consistent_random_form(&split_lo, 20, 1, 5);
        let hi = consistent_random_form(&split_hi, 40, 1, 5);
        let shifted = Expansion::Hilbert(hi.truncate_precision(1)).truncate(20, 2);
        assert_ne!(shifted.content_json(), Expansion::Hilbert(lo).content_json());
    }
}
