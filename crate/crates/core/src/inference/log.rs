//! One JSON line per iteration.

use serde::{Deserialize, Serialize};

use crate::inference::types::{SampleRecord, WeightedSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogMode {
    /// Single-fidelity: logged as one batch with `μ = m = 1` and `ω_lo = 0`,
    /// which makes the multifidelity formulas reproduce the plain weight.
    Single,
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub i: u64,
    pub theta: Vec<f64>,
    pub w: f64,
    pub m: u64,
    pub mu: f64,
    pub cost_lo: f64,
    pub cost_hi_total: f64,
    pub omega_lo: f64,
    pub omega_hi_list: Vec<f64>,
    pub g: f64,
    /// Importance ratio `π/q` at `theta`.
    pub ratio: f64,
    pub mode: LogMode,
}

impl LogRow {
    pub fn from_sample(s: &WeightedSample) -> Self {
        let ratio = s.draw.ratio();
        match &s.record {
            SampleRecord::Single { omega, .. } => Self {
                i: s.index,
                theta: s.draw.theta.clone(),
                w: s.weight,
                m: 1,
                mu: 1.0,
                cost_lo: 0.0,
                cost_hi_total: s.total_cost,
                omega_lo: 0.0,
                omega_hi_list: vec![*omega],
                g: s.g_value,
                ratio,
                mode: LogMode::Single,
            },
            SampleRecord::Multi(r) => Self {
                i: s.index,
                theta: s.draw.theta.clone(),
                w: s.weight,
                m: r.m,
                mu: r.mu,
                cost_lo: r.cost_lo(),
                cost_hi_total: r.cost_hi_total(),
                omega_lo: r.omega_lo,
                omega_hi_list: r.omega_hi_values(),
                g: s.g_value,
                ratio,
                mode: LogMode::Multi,
            },
        }
    }

    pub fn total_cost(&self) -> f64 {
        self.cost_lo + self.cost_hi_total
    }
}

impl crate::inference::Weighted for LogRow {
    fn weight(&self) -> f64 {
        self.w
    }

    fn g_value(&self) -> f64 {
        self.g
    }

    fn cost(&self) -> f64 {
        self.total_cost()
    }
}
