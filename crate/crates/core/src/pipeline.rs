//! Named operator chains on expansions, with a per-step log of bounds and
//! precision.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{PadicNum, INFINITE_PREC};
use crate::{HilbertQExp, ModularQExp};

/// One registered operator, written `name` or `name:arg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    VPi,
    VPiPrime,
    VP,
    UPi,
    UPiPrime,
    UP,
    DepletePi,
    DepletePiPrime,
    DepleteP,
    Theta,
    ThetaPrime,
    ThetaInverse(u32),
    ThetaPrimeInverse(u32),
    HeckeTPi,
    HeckeTPiPrime,
    HeckeTP,
    Restrict,
    Scale(BigInt),
    EOrd(u32),
    TruncateBound(u64),
    TruncatePrecision(i64),
}

pub const OP_NAMES: [&str; 21] = [
    "v_pi",
    "v_pi_prime",
    "v_p",
    "u_pi",
    "u_pi_prime",
    "u_p",
    "deplete_pi",
    "deplete_pi_prime",
    "deplete_p",
    "theta",
    "theta_prime",
    "theta_inverse",
    "theta_prime_inverse",
    "hecke_t_pi",
    "hecke_t_pi_prime",
    "hecke_t_p",
    "restrict",
    "scale",
    "e_ord",
    "truncate_bound",
    "truncate_precision",
];

impl FromStr for Op {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let bad = || Error::InvalidInput(format!("operator {s:?}"));
        let op = match name {
            "v_pi" => Op::VPi,
            "v_pi_prime" => Op::VPiPrime,
            "v_p" => Op::VP,
            "u_pi" => Op::UPi,
            "u_pi_prime" => Op::UPiPrime,
            "u_p" => Op::UP,
            "deplete_pi" => Op::DepletePi,
            "deplete_pi_prime" => Op::DepletePiPrime,
            "deplete_p" => Op::DepleteP,
            "theta" => Op::Theta,
            "theta_prime" => Op::ThetaPrime,
            "theta_inverse" => Op::ThetaInverse(arg.ok_or_else(bad)?.parse().map_err(|_| bad())?),
            "theta_prime_inverse" => Op::ThetaPrimeInverse(arg.ok_or_else(bad)?.parse().map_err(|_| bad())?),
            "hecke_t_pi" => Op::HeckeTPi,
            "hecke_t_pi_prime" => Op::HeckeTPiPrime,
            "hecke_t_p" => Op::HeckeTP,
            "restrict" => Op::Restrict,
            "scale" => Op::Scale(arg.ok_or_else(bad)?.parse().map_err(|_| bad())?),
            "e_ord" => Op::EOrd(arg.ok_or_else(bad)?.parse().map_err(|_| bad())?),
            "truncate_bound" => Op::TruncateBound(arg.ok_or_else(bad)?.parse().map_err(|_| bad())?),
            "truncate_precision" => Op::TruncatePrecision(arg.ok_or_else(bad)?.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        let takes_arg = matches!(
            op,
            Op::ThetaInverse(_)
                | Op::ThetaPrimeInverse(_)
                | Op::Scale(_)
                | Op::EOrd(_)
                | Op::TruncateBound(_)
                | Op::TruncatePrecision(_)
        );
        if arg.is_some() && !takes_arg {
            return Err(bad());
        }
        Ok(op)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::VPi => write!(f, "v_pi"),
            Op::VPiPrime => write!(f, "v_pi_prime"),
            Op::VP => write!(f, "v_p"),
            Op::UPi => write!(f, "u_pi"),
            Op::UPiPrime => write!(f, "u_pi_prime"),
            Op::UP => write!(f, "u_p"),
            Op::DepletePi => write!(f, "deplete_pi"),
            Op::DepletePiPrime => write!(f, "deplete_pi_prime"),
            Op::DepleteP => write!(f, "deplete_p"),
            Op::Theta => write!(f, "theta"),
            Op::ThetaPrime => write!(f, "theta_prime"),
            Op::ThetaInverse(n) => write!(f, "theta_inverse:{n}"),
            Op::ThetaPrimeInverse(n) => write!(f, "theta_prime_inverse:{n}"),
            Op::HeckeTPi => write!(f, "hecke_t_pi"),
            Op::HeckeTPiPrime => write!(f, "hecke_t_pi_prime"),
            Op::HeckeTP => write!(f, "hecke_t_p"),
            Op::Restrict => write!(f, "restrict"),
            Op::Scale(c) => write!(f, "scale:{c}"),
            Op::EOrd(d) => write!(f, "e_ord:{d}"),
            Op::TruncateBound(b) => write!(f, "truncate_bound:{b}"),
            Op::TruncatePrecision(d) => write!(f, "truncate_precision:{d}"),
        }
    }
}

/// A Hilbert or an elliptic expansion with base-ring coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum Expansion {
    Hilbert(HilbertQExp),
    Modular(ModularQExp),
}

impl Expansion {
    pub fn bound(&self) -> u64 {
        match self {
            Expansion::Hilbert(f) => f.trace_bound(),
            Expansion::Modular(g) => g.bound(),
        }
    }

    pub fn min_abs_prec(&self) -> i64 {
        match self {
            Expansion::Hilbert(f) => f.min_abs_prec(),
            Expansion::Modular(g) => g.min_abs_prec(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Expansion::Hilbert(f) => f.to_json(),
            Expansion::Modular(g) => g.to_json(),
        }
    }

    /// Hilbert documents carry the field discriminant `"D"`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        if v.get("D").is_some() {
            Ok(Expansion::Hilbert(HilbertQExp::from_json(v)?))
        } else {
            Ok(Expansion::Modular(ModularQExp::from_json(v)?))
        }
    }

    /// Lowers every absolute precision by `delta` and cuts the bound to `bound`.
    pub fn truncate(&self, bound: u64, delta: i64) -> Self {
        match self {
            Expansion::Hilbert(f) => Expansion::Hilbert(f.truncate_bound(bound).truncate_precision(delta)),
            Expansion::Modular(g) => Expansion::Modular(g.truncate_bound(bound).truncate_precision(delta)),
        }
    }

    /// The JSON fields that do not depend on the working precision of the
    /// prime data: weight, bound and coefficients.
    pub fn content_json(&self) -> serde_json::Value {
        let mut v = self.to_json();
        if let Some(m) = v.as_object_mut() {
            m.remove("prec");
        }
        v
    }
}

/// One executed step of a pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProvenanceEntry {
    pub index: usize,
    pub op: String,
    pub input_bound: String,
    pub output_bound: String,
    /// Smallest absolute precision among the output coefficients, `None` when
    /// every coefficient is exact or absent.
    pub precision: Option<i64>,
}

/// A failure at the step with the given index.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineError {
    pub index: usize,
    pub op: String,
    pub error: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op {} ({}): {}", self.index, self.op, self.error)
    }
}

impl std::error::Error for PipelineError {}

fn hilbert_only(op: &Op) -> Error {
    Error::InvalidInput(format!("{op} applies to Hilbert expansions only"))
}

fn apply_one(x: Expansion, op: &Op) -> Result<Expansion> {
    use Expansion::{Hilbert as H, Modular as M};
    Ok(match (x, op) {
        (H(f), Op::VPi) => H(f.v_pi()),
        (H(f), Op::VPiPrime) => H(f.v_pi_prime()),
        (H(f), Op::VP) => H(f.v_p()),
        (H(f), Op::UPi) => H(f.u_pi()),
        (H(f), Op::UPiPrime) => H(f.u_pi_prime()),
        (H(f), Op::UP) => H(f.u_p()),
        (H(f), Op::DepletePi) => H(f.deplete_pi()),
        (H(f), Op::DepletePiPrime) => H(f.deplete_pi_prime()),
        (H(f), Op::DepleteP) => H(f.deplete_p()),
        (H(f), Op::Theta) => H(f.theta()),
        (H(f), Op::ThetaPrime) => H(f.theta_prime()),
        (H(f), Op::ThetaInverse(n)) => H(f.theta_inverse(*n)?),
        (H(f), Op::ThetaPrimeInverse(n)) => H(f.theta_prime_inverse(*n)?),
        (H(f), Op::HeckeTPi) => H(f.hecke_t_pi()?),
        (H(f), Op::HeckeTPiPrime) => H(f.hecke_t_pi_prime()?),
        (H(f), Op::Restrict) => M(f.restrict()),
        (H(f), Op::Scale(c)) => {
            let c = PadicNum::from_bigint(f.split().p(), c, f.split().precision() as i64);
            H(f.scale(&c))
        }
        (H(f), Op::TruncateBound(b)) => H(f.truncate_bound(*b)),
        (H(f), Op::TruncatePrecision(d)) => H(f.truncate_precision(*d)),
        (H(_), op) => return Err(Error::InvalidInput(format!("{op} applies to elliptic expansions only"))),
        (M(g), Op::VP) => M(g.v_p()),
        (M(g), Op::UP) => M(g.u_p()),
        (M(g), Op::HeckeTP) => {
            let prec = match g.min_abs_prec() {
                INFINITE_PREC => return Err(Error::InvalidInput("hecke_t_p needs a finite precision".into())),
                m => m,
            };
            M(g.hecke_t_p(prec)?)
        }
        (M(g), Op::EOrd(d)) => M(g.e_ord_approx(*d)?),
        (M(g), Op::Scale(c)) => {
            let prec = g.min_abs_prec().min(i64::from(u32::MAX));
            M(g.scale(&PadicNum::from_bigint(g.p(), c, prec)))
        }
        (M(g), Op::TruncateBound(b)) => M(g.truncate_bound(*b)),
        (M(g), Op::TruncatePrecision(d)) => M(g.truncate_precision(*d)),
        (M(_), op) => return Err(hilbert_only(op)),
    })
}

/// Applies `ops` left to right. A step whose output bound is 0 while its
/// input bound was positive exhausts the bound and fails.
pub fn apply_ops(x: Expansion, ops: &[Op]) -> std::result::Result<(Expansion, Vec<ProvenanceEntry>), PipelineError> {
    let mut cur = x;
    let mut log = Vec::with_capacity(ops.len());
    for (index, op) in ops.iter().enumerate() {
        let input_bound = cur.bound();
        let fail = |error| PipelineError { index, op: op.to_string(), error };
        cur = apply_one(cur, op).map_err(fail)?;
        let output_bound = cur.bound();
        if output_bound == 0 && input_bound > 0 {
            return Err(fail(Error::InsufficientBound { required: 1, have: 0 }));
        }
        let prec = cur.min_abs_prec();
        log.push(ProvenanceEntry {
            index,
            op: op.to_string(),
            input_bound: input_bound.to_string(),
            output_bound: output_bound.to_string(),
            precision: (prec != INFINITE_PREC).then_some(prec),
        });
    }
    Ok((cur, log))
}

pub fn parse_ops(names: &[String]) -> Result<Vec<Op>> {
    names.iter().map(|s| s.parse()).collect()
}
