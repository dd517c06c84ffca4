use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::MLaw;

/// Integrated costs and variances of a model pair under a fixed proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfConstants {
    pub c_bar_hi: f64,
    pub c_bar_lo: f64,
    pub v_hi: f64,
    pub v_mf: f64,
    /// `∫ Δ_q² (λ_hi − ω_lo)² dρ`.
    pub e_mf: f64,
}

/// One point of a discrete `(θ, y_lo)` measure with its conditional moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: Vec<f64>,
    pub y_lo: Vec<f64>,
    pub mass: f64,
    pub delta_q: f64,
    /// `E((ω_hi − ω_lo)² | θ, y_lo)`.
    pub eta: f64,
    /// `E(c_hi | θ, y_lo)`.
    pub c_hi: f64,
    /// `E(ω_hi | θ, y_lo)`.
    pub lambda_hi: f64,
    pub omega_lo: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if atoms.iter().any(|a| !(a.mass >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("atom masses must be nonnegative and sum to 1, got {total}")));
        }
        Ok(Self { atoms })
    }
}

pub fn j_hi(c: &PerfConstants) -> f64 {
    c.c_bar_hi * c.v_hi
}

/// Cost and variance factors of `J_mf[μ]` for the given escalation law.
pub fn j_mf_factors(
    measure: &DiscreteMeasure,
    mu: &dyn Fn(&Atom) -> f64,
    law: &MLaw,
    c: &PerfConstants,
) -> Result<(f64, f64)> {
    let mut cost = c.c_bar_lo;
    let mut var = c.v_mf;
    for a in &measure.atoms {
        let m = mu(a);
        law.validate(m)?;
        cost += m * a.c_hi * a.mass;
        var += a.delta_q * a.delta_q * a.eta / m * a.mass;
    }
    var += match *law {
        MLaw::Poisson => 0.0,
        MLaw::Binomial { max } => -c.e_mf / max as f64,
        MLaw::Geometric => c.e_mf,
    };
    Ok((cost, var))
}

/// `J_mf[μ]`: expected cost per iteration times `E(w² Δ²)`.
pub fn j_mf(measure: &DiscreteMeasure, mu: &dyn Fn(&Atom) -> f64, law: &MLaw, c: &PerfConstants) -> Result<f64> {
    let (cost, var) = j_mf_factors(measure, mu, law, c)?;
    Ok(cost * var)
}

/// The pointwise optimal Poisson mean, unclamped.
pub fn mu_star(atom: &Atom, c: &PerfConstants) -> Result<f64> {
    if !(c.v_mf > 0.0) {
        return Err(Error::Undefined(format!("V_mf = {} is not positive", c.v_mf)));
    }
    if !(atom.c_hi > 0.0) {
        return Err(Error::invalid("atom has nonpositive high-fidelity cost"));
    }
    let sq = atom.delta_q * atom.delta_q * (atom.eta / c.v_mf) / (atom.c_hi / c.c_bar_lo);
    Ok(sq.sqrt())
}

/// Left-hand side of the existence condition and whether it is below 1.
pub fn existence_margin(measure: &DiscreteMeasure, c: &PerfConstants) -> (bool, f64) {
    let first = ((c.c_bar_lo / c.c_bar_hi) * (c.v_mf / c.v_hi)).sqrt();
    let second: f64 = measure
        .atoms
        .iter()
        .map(|a| (a.delta_q * a.delta_q * a.eta / c.v_hi).sqrt() * (a.c_hi / c.c_bar_hi).sqrt() * a.mass)
        .sum();
    let lhs = first + second;
    (lhs < 1.0, lhs)
}

/// Per-cell `c_k` and `V_k` of a piecewise-constant mean function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConstants {
    pub c: Vec<f64>,
    pub v: Vec<f64>,
}

/// `(c̄_lo + Σ c_k ν_k)(V_mf + Σ V_k/ν_k)`.
pub fn j_d(nu: &[f64], cells: &CellConstants, c: &PerfConstants) -> f64 {
    let cost = c.c_bar_lo + cells.c.iter().zip(nu).map(|(ck, n)| ck * n).sum::<f64>();
    let var = c.v_mf + cells.v.iter().zip(nu).map(|(vk, n)| vk / n).sum::<f64>();
    cost * var
}

/// `(sqrt(c̄_lo V_mf) + Σ sqrt(c_k V_k))²`.
pub fn j_d_star(cells: &CellConstants, c: &PerfConstants) -> f64 {
    let s = (c.c_bar_lo * c.v_mf).sqrt()
        + cells
            .c
            .iter()
            .zip(&cells.v)
            .map(|(ck, vk)| (ck * vk).sqrt())
            .sum::<f64>();
    s * s
}
