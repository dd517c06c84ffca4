//! Exact constants for models with finitely many outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::functionals::{Atom, CellConstants, DiscreteMeasure, PerfConstants};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteHi {
    pub prob: f64,
    pub omega: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteLo {
    pub y_lo: Vec<f64>,
    pub prob: f64,
    pub omega_lo: f64,
    pub cost: f64,
    /// Law of a coupled high-fidelity outcome given this low-fidelity one.
    pub hi: Vec<FiniteHi>,
}

/// A parameter atom with proposal mass `q`, prior mass `prior` and target `g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteTheta {
    pub theta: Vec<f64>,
    pub q: f64,
    pub prior: f64,
    pub g: f64,
    pub lo: Vec<FiniteLo>,
}

/// A coupled model pair over finitely many outcomes. The uncoupled
/// high-fidelity law is taken to be the marginal of the coupled one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteModel {
    pub thetas: Vec<FiniteTheta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub measure: DiscreteMeasure,
    pub constants: PerfConstants,
    /// Posterior mean of `G` under the high-fidelity weighting.
    pub g_bar_hi: f64,
    /// `E(w_hi) = Σ π(θ) L_hi(θ)`.
    pub evidence: f64,
}

fn check_probs(p: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut total = 0.0;
    for x in p {
        if !(x >= 0.0) {
            return Err(Error::invalid(format!("{what} probabilities must be nonnegative")));
        }
        total += x;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("{what} probabilities sum to {total}")));
    }
    Ok(())
}

impl FiniteModel {
    pub fn validate(&self) -> Result<()> {
        check_probs(self.thetas.iter().map(|t| t.q), "proposal")?;
        for t in &self.thetas {
            if !(t.q > 0.0) {
                return Err(Error::ZeroProposalDensity(t.theta.clone()));
            }
            check_probs(t.lo.iter().map(|l| l.prob), "low-fidelity")?;
            for l in &t.lo {
                check_probs(l.hi.iter().map(|h| h.prob), "high-fidelity")?;
            }
        }
        Ok(())
    }

    pub fn enumerate(&self) -> Result<Enumeration> {
        self.validate()?;
        // L_hi(θ) = E(ω_hi | θ)
        let lik: Vec<f64> = self
            .thetas
            .iter()
            .map(|t| {
                t.lo.iter()
                    .map(|l| l.prob * l.hi.iter().map(|h| h.prob * h.omega).sum::<f64>())
                    .sum()
            })
            .collect();
        let evidence: f64 = self.thetas.iter().zip(&lik).map(|(t, l)| t.prior * l).sum();
        if evidence == 0.0 {
            return Err(Error::DegenerateSample);
        }
        let g_bar_hi = self.thetas.iter().zip(&lik).map(|(t, l)| t.prior * l * t.g).sum::<f64>() / evidence;

        let mut atoms = Vec::new();
        let mut c = PerfConstants {
            c_bar_hi: 0.0,
            c_bar_lo: 0.0,
            v_hi: 0.0,
            v_mf: 0.0,
            e_mf: 0.0,
        };
        for t in &self.thetas {
            let delta_q = t.prior / t.q * (t.g - g_bar_hi);
            let d2 = delta_q * delta_q;
            for l in &t.lo {
                let mass = t.q * l.prob;
                let lambda: f64 = l.hi.iter().map(|h| h.prob * h.omega).sum();
                let second: f64 = l.hi.iter().map(|h| h.prob * h.omega * h.omega).sum();
                let eta: f64 = l.hi.iter().map(|h| h.prob * (h.omega - l.omega_lo).powi(2)).sum();
                let c_hi: f64 = l.hi.iter().map(|h| h.prob * h.cost).sum();
                c.c_bar_lo += mass * l.cost;
                c.c_bar_hi += mass * c_hi;
                c.v_hi += mass * d2 * second;
                c.v_mf += mass * d2 * lambda * lambda;
                c.e_mf += mass * d2 * (lambda - l.omega_lo).powi(2);
                atoms.push(Atom {
                    theta: t.theta.clone(),
                    y_lo: l.y_lo.clone(),
                    mass,
                    delta_q,
                    eta,
                    c_hi,
                    lambda_hi: lambda,
                    omega_lo: l.omega_lo,
                });
            }
        }
        Ok(Enumeration {
            measure: DiscreteMeasure::new(atoms)?,
            constants: c,
            g_bar_hi,
            evidence,
        })
    }
}

/// `c_k = ∫_{D_k} c_hi dρ` and `V_k = ∫_{D_k} Δ_q² η dρ` for the cells given by `cell_of`.
pub fn cell_constants(measure: &DiscreteMeasure, cells: usize, cell_of: &dyn Fn(&Atom) -> usize) -> Result<CellConstants> {
    let mut out = CellConstants {
        c: vec![0.0; cells],
        v: vec![0.0; cells],
    };
    for a in &measure.atoms {
        let k = cell_of(a);
        if k >= cells {
            return Err(Error::invalid(format!("cell {k} out of range")));
        }
        out.c[k] += a.c_hi * a.mass;
        out.v[k] += a.delta_q * a.delta_q * a.eta * a.mass;
    }
    Ok(out)
}
