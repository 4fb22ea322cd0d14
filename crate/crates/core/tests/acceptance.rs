use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hqx_core::family::{build_lambda_h, specialize_h, HilbertFamily};
use hqx_core::hecke_spectral::{
    aj_scalar, euler_e, euler_e0, euler_e1, euler_e1_norm, ordinary_data, q_f_roots, q_f_symmetric,
    ramanujan_check,
};
use hqx_core::padic::hecke_roots;
use hqx_core::qexpansion::{aj_integrand, make_formal_eigenform, Place};
use hqx_core::suites::{
    kernel_lemma_report, precision_soundness_report, random_spectral_data, recombination_report,
    KERNEL_LEMMA_PAIRS,
};
use hqx_core::symbolic::{
    euler_summation_report, random_form, random_padic, random_seed_table, scholl_report, summation_grid,
    Report, ADMISSIBLE_PAIRS,
};
use hqx_core::{HilbertQExp, PadicNum, PrimeSplit, QuadField, RootPair};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn split(d: i64, p: u64, precision: u32) -> Arc<PrimeSplit> {
    Arc::new(QuadField::new(d).unwrap().split_prime(p, precision).unwrap())
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

fn report_passes(r: &Report) -> Result<usize, String> {
    match r.checks.iter().find(|c| !c.passed()) {
        Some(c) => Err(format!("{} failed: {} {:?}", c.name, c.params, c.certificate_terms)),
        None if r.checks.is_empty() => Err(format!("{}: no checks ran", r.suite)),
        None => Ok(r.checks.len()),
    }
}

fn operator_algebra() -> Outcome {
    let start = Instant::now();
    let s = split(5, 11, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut smallest = u64::MAX;
    for trial in 0..100 {
        let f = random_form(&mut rng, &s, (2, 2), 50);
        let fail = |what: &str| format!("trial {trial}: {what}");
        for place in [Place::Pi, Place::PiConj, Place::P] {
            let back = f.v(place).u(place);
            smallest = smallest.min(back.trace_bound());
            ensure(back.approx_eq(&f), || fail(&format!("U V != 1 at {place:?}")))?;
            let d = f.deplete(place);
            let vu = f.u(place).v(place);
            smallest = smallest.min(vu.trace_bound());
            ensure(d.approx_eq(&f.sub(&vu).unwrap()), || fail(&format!("depletion at {place:?}")))?;
            ensure(d.deplete(place) == d, || fail(&format!("depletion not idempotent at {place:?}")))?;
        }
        ensure(f.u_p().approx_eq(&f.u_pi().u_pi_prime()), || fail("U_p != U_pi U_pi'"))?;
        ensure(f.u_p().approx_eq(&f.u_pi_prime().u_pi()), || fail("U_p != U_pi' U_pi"))?;
        let both = f.deplete_pi_prime().deplete_pi();
        let expanded = f
            .sub(&f.u_pi().v_pi())
            .and_then(|x| x.sub(&f.u_pi_prime().v_pi_prime()))
            .and_then(|x| x.add(&f.u_p().v_p()))
            .unwrap();
        smallest = smallest.min(expanded.trace_bound());
        ensure(both.approx_eq(&expanded), || fail("inclusion-exclusion for the two depletions"))?;
    }
    ensure(smallest > 0, || "every comparison was vacuous".into())?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("100 forms, smallest compared bound {smallest}, {:.2?}", start.elapsed()))
}

fn eigenforms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = 0;
    for trial in 0..30 {
        let (d, p) = ADMISSIBLE_PAIRS[trial % ADMISSIBLE_PAIRS.len()];
        let prec = 4;
        let s = split(d, p, prec);
        let k = rng.gen_range(2..=4);
        let a = random_padic(&mut rng, p, prec);
        let ap = random_padic(&mut rng, p, prec);
        let seeds = random_seed_table(&mut rng, p, prec);
        let f = make_formal_eigenform(s, seeds, &a, &ap, k, 60).map_err(|e| e.to_string())?;
        let pk = PadicNum::p_power(p, k - 1, prec as i64);
        for (place, c) in [(Place::Pi, &a), (Place::PiConj, &ap)] {
            let tf = f.hecke_t(place).map_err(|e| e.to_string())?;
            compared += tf.coeffs().len();
            ensure(tf.approx_eq(&f.scale(c)), || format!("trial {trial}: T f != a f at {place:?}"))?;
            let lhs = f.one_minus_v(c, place).and_then(|x| x.add(&f.v(place).v(place).scale(&pk))).unwrap();
            ensure(lhs.approx_eq(&f.deplete(place)), || {
                format!("trial {trial}: Hecke polynomial in V is not depletion at {place:?}")
            })?;
        }
    }
    ensure(compared > 0, || "no Hecke coefficients compared".into())?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("30 eigenforms, {compared} Hecke coefficients, {:.2?}", start.elapsed()))
}

fn recombination() -> Outcome {
    let r = recombination_report(40, 4, 3).map_err(|e| e.to_string())?;
    let n = report_passes(&r)?;
    for name in ["u_eigen", "primitive_coefficients", "four_term_recombination", "division_loss", "two_term_recombination"] {
        ensure(r.checks.iter().any(|c| c.name == name), || format!("no {name} checks"))?;
    }
    Ok(format!("{n} checks over 40 eigenforms"))
}

fn residue(x: &PadicNum, n: i64) -> BigInt {
    x.residue(n).unwrap()
}

/// Whether `x^2 = disc` has a solution modulo `p^(v+1)`, `v = val(disc)`.
fn brute_force_square(disc: &BigInt, p: u64) -> bool {
    let pb = BigInt::from(p);
    let mut v = 0u32;
    let mut rest = disc.clone();
    while (&rest % &pb).is_zero() {
        rest /= &pb;
        v += 1;
    }
    let m = num_traits::pow(pb, v as usize + 1);
    let target = disc.mod_floor(&m);
    let mut x = BigInt::zero();
    while x < m {
        if (&x * &x).mod_floor(&m) == target {
            return true;
        }
        x += 1;
    }
    false
}

fn hensel_roots() -> Outcome {
    let m = BigInt::from(121);
    let oracle: Vec<BigInt> = (0..121i64)
        .map(BigInt::from)
        .filter(|r: &BigInt| (r * r - BigInt::from(3) * r + BigInt::from(11)).mod_floor(&m).is_zero())
        .collect();
    let unit: Vec<&BigInt> = oracle.iter().filter(|r| !r.is_multiple_of(&BigInt::from(11))).collect();
    let nonunit: Vec<&BigInt> = oracle.iter().filter(|r| r.is_multiple_of(&BigInt::from(11))).collect();
    ensure(unit.len() == 1 && nonunit.len() == 1, || format!("oracle residues {oracle:?}"))?;
    let od = ordinary_data(&PadicNum::from_i64(11, 3, 2), 2, 2).map_err(|e| e.to_string())?;
    let (b0, b1) = (residue(&od.beta0, 2), residue(&od.beta1, 2));
    ensure(&b0 == unit[0] && b0 == BigInt::from(80), || format!("beta0 = {b0}, oracle {}", unit[0]))?;
    ensure(&b1 == nonunit[0] && b1 == BigInt::from(44), || format!("beta1 = {b1}, oracle {}", nonunit[0]))?;
    ensure(residue(&(&od.beta0 * &od.beta1), 2) == BigInt::from(11), || "beta0 beta1".into())?;
    ensure(residue(&(&od.beta0 + &od.beta1), 2) == BigInt::from(3), || "beta0 + beta1".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [0usize; 2];
    let mut done = 0;
    while done < 50 {
        let p = [5u64, 7, 11][rng.gen_range(0..3)];
        let k: i64 = rng.gen_range(2..=5);
        let a: i64 = rng.gen_range(-60..=60) * (p as i64).pow(rng.gen_range(0..=2));
        let pk = num_traits::pow(BigInt::from(p), (k - 1) as usize);
        let disc: BigInt = BigInt::from(a) * BigInt::from(a) - BigInt::from(4) * &pk;
        if disc.is_zero() {
            continue;
        }
        let a_val = if a == 0 { i64::MAX } else { PadicNum::from_i64(p, a, 12).val() };
        let expect_split = 2 * a_val.min(k) < k - 1 || brute_force_square(&disc, p);
        let roots = hecke_roots(&PadicNum::from_i64(p, a, 12), k, 10).map_err(|e| e.to_string())?;
        let got_split = matches!(roots, RootPair::Split { .. });
        ensure(got_split == expect_split, || format!("p={p} k={k} a={a}: split {got_split}, oracle {expect_split}"))?;
        counts[got_split as usize] += 1;
        done += 1;
    }
    ensure(counts[0] > 0 && counts[1] > 0, || format!("only one kind drawn: {counts:?}"))?;
    Ok(format!("beta0 = 80, beta1 = 44 mod 121; 50 pairs ({} split, {} nonsplit)", counts[1], counts[0]))
}

fn kernel_lemma() -> Outcome {
    let start = Instant::now();
    let r = kernel_lemma_report(100, &KERNEL_LEMMA_PAIRS, &[0, 1, 2], 3, 5).map_err(|e| e.to_string())?;
    let n = report_passes(&r)?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{n} (D, p, t) cells of 100 forms, {:.2?}", start.elapsed()))
}

fn euler_summation() -> Outcome {
    let start = Instant::now();
    let grid = summation_grid();
    let r = euler_summation_report(&grid);
    let n = report_passes(&r)?;
    ensure(r.checks.iter().any(|c| c.name.starts_with("mutation")), || "no mutation checks".into())?;
    within(start, Duration::from_secs(5))?;
    Ok(format!("{} grid points, {n} checks with mutations, {:.2?}", grid.len(), start.elapsed()))
}

fn scholl() -> Outcome {
    let start = Instant::now();
    let r = scholl_report(4);
    let n = report_passes(&r)?;
    within(start, Duration::from_secs(5))?;
    Ok(format!("n <= 4, {n} checks, {:.2?}", start.elapsed()))
}

fn euler_factors() -> Outcome {
    let prec = 6;
    let mut ordinary = 0;
    let mut all = 0;
    for (p, k0) in [(11u64, 2i64), (11, 4)] {
        for b in -200i64..=200 {
            if !ramanujan_check(&BigInt::from(b), p, k0) {
                continue;
            }
            all += 1;
            let b_p = PadicNum::from_i64(p, b, prec as i64);
            let norm = euler_e1_norm(&b_p, k0, prec);
            ensure(!norm.is_zero(), || format!("E1 vanishes over the roots for b_p = {b} at k0 = {k0}"))?;
            if b % p as i64 == 0 {
                continue;
            }
            ordinary += 1;
            let od = ordinary_data(&b_p, k0, prec).map_err(|e| e.to_string())?;
            euler_e0(&od).map_err(|e| format!("b_p = {b}: {e}"))?;
            let e1 = euler_e1(&od);
            ensure(!e1.is_zero(), || format!("E1 vanishes for b_p = {b} at k0 = {k0}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..100 {
        let p = [5u64, 7, 11][trial % 3];
        let (sd, _) = random_spectral_data(&mut rng, p, 5);
        let sym = q_f_symmetric(&sd).map_err(|e| e.to_string())?;
        let roots = q_f_roots(&sd).map_err(|e| e.to_string())?;
        let agree = sym.len() == roots.len() && sym.iter().zip(&roots).all(|(x, y)| x.approx_eq(y));
        ensure(agree, || format!("Q_f mismatch on trial {trial}"))?;
    }
    let mut crossed = 0;
    for trial in 0..40 {
        let (sd, k) = random_spectral_data(&mut rng, 11, 5);
        let b = loop {
            let b: i64 = rng.gen_range(-6..=6);
            if b % 11 != 0 {
                break b;
            }
        };
        let od = ordinary_data(&PadicNum::from_i64(11, b, 5), 2, 5).map_err(|e| e.to_string())?;
        let Ok(aj) = aj_scalar(&sd, &od, k - 2) else { continue };
        let e = euler_e(&sd, &od.beta1, k - 2).map_err(|e| e.to_string())?;
        let fact: i64 = (1..=k - 2).product();
        let scalar = PadicNum::from_i64(11, if (k - 2) % 2 == 0 { fact } else { -fact }, 5);
        let l_side = (&(&scalar * &euler_e0(&od).unwrap()) * &euler_e1(&od)).div(&e).map_err(|e| e.to_string())?;
        ensure((&aj.aj_side * &aj.e0).approx_eq(&aj.l_side), || format!("trial {trial}: AJ side E0 != L side"))?;
        ensure(l_side.approx_eq(&aj.l_side), || format!("trial {trial}: L side disagrees with direct assembly"))?;
        crossed += 1;
    }
    ensure(crossed > 0, || "no admissible aj_scalar instances".into())?;
    Ok(format!(
        "{all} Ramanujan b_p ({ordinary} ordinary), 100 Q_f cross-checks, {crossed} aj_scalar cross-checks"
    ))
}

fn path_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut compared = 0;
    for (trial, &(d, p)) in ADMISSIBLE_PAIRS.iter().cycle().take(10).enumerate() {
        let prec = 4;
        let s = split(d, p, prec);
        let f: HilbertQExp = if trial % 2 == 0 {
            let a = random_padic(&mut rng, p, prec);
            let ap = random_padic(&mut rng, p, prec);
            let seeds = random_seed_table(&mut rng, p, prec);
            make_formal_eigenform(s, seeds, &a, &ap, 2, 40).map_err(|e| e.to_string())?
        } else {
            random_form(&mut rng, &s, (2, 2), 40)
        };
        let fam = HilbertFamily::constant(&f, 0, 0).map_err(|e| e.to_string())?;
        let h = build_lambda_h(&fam).map_err(|e| e.to_string())?;
        let via_family = specialize_h(&h, -1, 0, None).map_err(|e| e.to_string())?;
        let direct = aj_integrand(&fam.specialize(0).map_err(|e| e.to_string())?, 0).map_err(|e| e.to_string())?;
        ensure(!direct.is_negligible(), || format!("trial {trial}: integrand vanishes"))?;
        ensure(via_family.weight() == direct.weight(), || format!("trial {trial}: weights differ"))?;
        ensure(via_family.approx_eq(&direct), || format!("trial {trial}: coefficients differ"))?;
        compared += direct.coeffs().len();
    }
    Ok(format!("10 families, {compared} coefficients, sign +1"))
}

fn precision_soundness() -> Outcome {
    let start = Instant::now();
    let r = precision_soundness_report(20, 10).map_err(|e| e.to_string())?;
    let n = report_passes(&r)?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("{n} pipelines, {:.2?}", start.elapsed()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("operator algebra", operator_algebra),
        ("eigenform suite", eigenforms),
        ("stabilization and recombination", recombination),
        ("Hensel lifting and root classification", hensel_roots),
        ("kernel lemma", kernel_lemma),
        ("Euler summation identity", euler_summation),
        ("Scholl idempotent", scholl),
        ("Euler factors", euler_factors),
        ("path equality", path_equality),
        ("precision and bound soundness", precision_soundness),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
