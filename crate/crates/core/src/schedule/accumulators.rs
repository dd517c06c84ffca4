//! Running Monte Carlo estimates of the cost and variance terms that drive
//! the adaptive schedule.
//!
//! Every variance summand has the form `s_i·Δ_i²` with
//! `Δ_i = (G(θ_i) − Ḡ)·π/q`. Keeping `Σs`, `Σs·h` and `Σs·h²` with
//! `h = G − G_ref` lets the sums be evaluated exactly at the current `Ḡ`
//! rather than at the estimate available when each sample arrived.

use crate::error::{Error, Result};
use crate::inference::{CountLaw, MultifidelityRecord, WeightedSample};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Quadratic {
    s: f64,
    sh: f64,
    sh2: f64,
}

impl Quadratic {
    fn add(&mut self, s: f64, h: f64) {
        self.s += s;
        self.sh += s * h;
        self.sh2 += s * h * h;
    }

    /// `Σ s (h − d)²`, floored at zero against rounding.
    fn at(&self, d: f64) -> f64 {
        (self.sh2 - 2.0 * d * self.sh + d * d * self.s).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct CellSums {
    cost: f64,
    var: Quadratic,
}

/// Plug-in estimates after `r` samples. Cells are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleEstimates {
    pub r: u64,
    pub g_bar: f64,
    pub c_lo: f64,
    pub v_mf: f64,
    pub c: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Accumulators {
    r: u64,
    sum_w: f64,
    sum_wg: f64,
    g_ref: Option<f64>,
    c_lo_sum: f64,
    v_mf: Quadratic,
    cells: Vec<CellSums>,
}

impl Accumulators {
    pub fn new(cells: usize) -> Self {
        Self {
            r: 0,
            sum_w: 0.0,
            sum_wg: 0.0,
            g_ref: None,
            c_lo_sum: 0.0,
            v_mf: Quadratic::default(),
            cells: vec![CellSums::default(); cells],
        }
    }

    /// Starts the running `Ḡ` from weight sums gathered elsewhere.
    pub fn with_reference(cells: usize, sum_w: f64, sum_wg: f64) -> Self {
        Self {
            sum_w,
            sum_wg,
            ..Self::new(cells)
        }
    }

    pub fn count(&self) -> u64 {
        self.r
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Running `Ḡ = Σ w G / Σ w`, if any weight mass has been seen.
    pub fn g_bar(&self) -> Option<f64> {
        (self.sum_w != 0.0).then(|| self.sum_wg / self.sum_w)
    }

    /// Adds one multifidelity sample located in `cell`. `law` supplies the
    /// second factorial moment `E[m(m−1)]` that normalises the cross terms.
    pub fn update(&mut self, sample: &WeightedSample, cell: usize, law: &dyn CountLaw) -> Result<()> {
        let record = sample
            .record
            .as_multi()
            .ok_or_else(|| Error::invalid("schedule accumulators need multifidelity samples"))?;
        self.add(record, sample.draw.ratio(), sample.g_value, sample.weight, cell, law)
    }

    pub fn add(
        &mut self,
        record: &MultifidelityRecord,
        ratio: f64,
        g: f64,
        weight: f64,
        cell: usize,
        law: &dyn CountLaw,
    ) -> Result<()> {
        if cell >= self.cells.len() {
            return Err(Error::invalid(format!("cell {cell} out of range")));
        }
        let mu = record.mu;
        let g_ref = *self.g_ref.get_or_insert(g);
        let h = g - g_ref;
        self.r += 1;
        self.sum_w += weight;
        self.sum_wg += weight * g;
        self.c_lo_sum += record.cost_lo();
        if record.m == 0 {
            return Ok(());
        }
        let omegas = record.omega_hi_values();
        let r2 = ratio * ratio;
        let total: f64 = omegas.iter().sum();
        let squares: f64 = omegas.iter().map(|w| w * w).sum();
        let cross = total * total - squares;
        if cross != 0.0 {
            let f2 = law.second_factorial_moment(mu);
            if !(f2 > 0.0) {
                return Err(Error::invalid(format!(
                    "escalation law produced m = {} with E[m(m-1)] = {f2}",
                    record.m
                )));
            }
            self.v_mf.add(r2 * cross / f2, h);
        }
        let cell_sums = &mut self.cells[cell];
        cell_sums.cost += record.cost_hi_total() / mu;
        let disagreement: f64 = omegas.iter().map(|w| (w - record.omega_lo).powi(2)).sum();
        cell_sums.var.add(r2 * disagreement / mu, h);
        Ok(())
    }

    pub fn estimates(&self) -> Result<ScheduleEstimates> {
        let g_bar = self.g_bar().ok_or(Error::DegenerateSample)?;
        self.estimates_at(g_bar)
    }

    /// Estimates with `Δ_i` centred at `g_bar`.
    pub fn estimates_at(&self, g_bar: f64) -> Result<ScheduleEstimates> {
        if self.r == 0 {
            return Err(Error::DegenerateSample);
        }
        let n = self.r as f64;
        let d = g_bar - self.g_ref.unwrap_or(g_bar);
        Ok(ScheduleEstimates {
            r: self.r,
            g_bar,
            c_lo: self.c_lo_sum / n,
            v_mf: self.v_mf.at(d) / n,
            c: self.cells.iter().map(|c| c.cost / n).collect(),
            v: self.cells.iter().map(|c| c.var.at(d) / n).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::{HiBatch, MLaw, SimulationOutput};

    fn record(cost_lo: f64, mu: f64, omega_lo: f64, hi: &[(f64, f64)]) -> MultifidelityRecord {
        MultifidelityRecord {
            y_lo_batch: vec![SimulationOutput::new(vec![0.0], cost_lo)],
            omega_lo,
            mu,
            m: hi.len() as u64,
            hi_batches: hi
                .iter()
                .map(|&(omega, cost)| HiBatch {
                    outputs: vec![SimulationOutput::new(vec![0.0], cost)],
                    omega,
                })
                .collect(),
        }
    }

    #[test]
    fn hand_evaluated_single_record() {
        let mut acc = Accumulators::new(2);
        let rec = record(1.0, 1.0, 0.0, &[(1.0, 3.0), (1.0, 4.0)]);
        acc.add(&rec, 1.0, 1.0, 2.0, 1, &MLaw::Poisson).unwrap();
        let e = acc.estimates_at(0.0).unwrap();
        assert_eq!(e.c, vec![0.0, 7.0]);
        assert_eq!(e.v, vec![0.0, 2.0]);
        assert_eq!(e.v_mf, 2.0);
    }

    #[test]
    fn empty_escalation_only_moves_low_fidelity_cost() {
        let mut acc = Accumulators::new(1);
        acc.add(&record(2.0, 0.5, 1.0, &[]), 1.0, 0.3, 1.0, 0, &MLaw::Poisson).unwrap();
        acc.add(&record(4.0, 0.5, 1.0, &[]), 1.0, 0.7, 1.0, 0, &MLaw::Poisson).unwrap();
        let e = acc.estimates().unwrap();
        assert_eq!(e.c_lo, 3.0);
        assert_eq!((e.c[0], e.v[0], e.v_mf), (0.0, 0.0, 0.0));
        assert!((e.g_bar - 0.5).abs() < 1e-15);
    }

    #[test]
    fn retroactive_centring_matches_direct_sum() {
        let mut acc = Accumulators::new(1);
        let data = [(0.2, 1.3, 2.0), (1.5, 0.4, 0.5), (-0.7, 2.0, 1.5), (0.9, 0.8, 3.0)];
        let mut direct = 0.0;
        for (g, ratio, mu) in data {
            let rec = record(1.0, mu, 0.25, &[(1.0, 1.0), (0.0, 1.0)]);
            acc.add(&rec, ratio, g, 1.0, 0, &MLaw::Poisson).unwrap();
        }
        let g_bar = acc.g_bar().unwrap();
        for (g, ratio, mu) in data {
            let delta = (g - g_bar) * ratio;
            direct += delta * delta * (0.75f64.powi(2) + 0.25f64.powi(2)) / mu;
        }
        let e = acc.estimates().unwrap();
        assert!((e.v[0] - direct / 4.0).abs() < 1e-12);
    }
}
