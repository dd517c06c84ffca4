//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

/// Escalation count laws, enumerated directly from their mass functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    Poisson,
    Binomial(u64),
    Geometric,
}

/// `(m, P(M = m))` with mean `mu`, truncated once `m²·P(M = m)` is below 1e-18.
pub fn pmf(law: Law, mu: f64) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    match law {
        Law::Binomial(max) => {
            let p = mu / max as f64;
            for m in 0..=max {
                let mut c = 1.0;
                for j in 0..m {
                    c *= (max - j) as f64 / (j + 1) as f64;
                }
                out.push((m, c * p.powi(m as i32) * (1.0 - p).powi((max - m) as i32)));
            }
        }
        Law::Poisson | Law::Geometric => {
            let mut m = 0u64;
            loop {
                let pr = match law {
                    Law::Poisson => {
                        let mut t = (-mu).exp();
                        for j in 1..=m {
                            t *= mu / j as f64;
                        }
                        t
                    }
                    _ => {
                        let p = 1.0 / (1.0 + mu);
                        p * (1.0 - p).powi(m as i32)
                    }
                };
                out.push((m, pr));
                if m as f64 > mu && pr * ((m * m) as f64) < 1e-18 {
                    break;
                }
                m += 1;
            }
        }
    }
    out
}

/// The coin pair: `θ = p ∈ {0.25, 0.75}` with uniform prior, `y_lo = 1{U < p + shift}`,
/// `y_hi = 1{U' < p}` with `U'` uniform on the same side of `p + shift` as `U`.
#[derive(Debug, Clone, Copy)]
pub struct Coin {
    pub shift: f64,
    pub cost_lo: f64,
    pub cost_hi: f64,
    pub q: [f64; 2],
}

impl Default for Coin {
    fn default() -> Self {
        Coin {
            shift: 0.1,
            cost_lo: 1.0,
            cost_hi: 10.0,
            q: [0.5, 0.5],
        }
    }
}

pub const ATOMS: [f64; 2] = [0.25, 0.75];

#[derive(Debug, Clone, Copy)]
pub struct CoinOracle {
    pub g_bar: f64,
    pub evidence: f64,
    pub j_hi: f64,
    /// `E(C_mf)·E(w_mf² (G − Ḡ)²)` with constant rate.
    pub j_mf: f64,
    pub mean_w_mf: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub v_hi: f64,
    pub v_mf: f64,
    pub v_eta: f64,
    /// `∫Δ_q² (λ − ω_lo)² ρ`.
    pub e_mf: f64,
}

impl Coin {
    /// `(P(y_lo = y), P(y_hi = 1 | y_lo = y))` for `y = 1, 0`.
    pub fn branches(&self, p: f64) -> [(f64, f64, f64); 2] {
        let pl = (p + self.shift).clamp(0.0, 1.0);
        let heads = if pl > 0.0 { p.min(pl) / pl } else { 0.0 };
        let tails = if pl < 1.0 { (p - pl).max(0.0) / (1.0 - pl) } else { 0.0 };
        [(1.0, pl, heads), (0.0, 1.0 - pl, tails)]
    }

    pub fn oracle(&self, law: Law, mu: f64) -> CoinOracle {
        let prior = 0.5;
        let evidence: f64 = ATOMS.iter().map(|p| prior * p).sum();
        let g_bar = ATOMS.iter().map(|p| prior * p * p).sum::<f64>() / evidence;
        let counts = pmf(law, mu);
        let (mut s_hi, mut s_mf, mut mean_w) = (0.0, 0.0, 0.0);
        let (mut v_mf, mut v_eta, mut e_mf) = (0.0, 0.0, 0.0);
        for (t, &p) in ATOMS.iter().enumerate() {
            let q = self.q[t];
            let ratio = prior / q;
            let d2 = (ratio * (p - g_bar)).powi(2);
            s_hi += q * p * d2;
            for (omega_lo, p_lo, h) in self.branches(p) {
                let rho = q * p_lo;
                v_mf += rho * d2 * h * h;
                e_mf += rho * d2 * (h - omega_lo).powi(2);
                v_eta += rho * d2 * (h * (1.0 - omega_lo).powi(2) + (1.0 - h) * omega_lo * omega_lo);
                for &(m, pm) in &counts {
                    for k in 0..=m {
                        let mut c = 1.0;
                        for j in 0..k {
                            c *= (m - j) as f64 / (j + 1) as f64;
                        }
                        let pk = c * h.powi(k as i32) * (1.0 - h).powi((m - k) as i32);
                        let omega = omega_lo + (k as f64 - m as f64 * omega_lo) / mu;
                        let w = ratio * omega;
                        let pr = rho * pm * pk;
                        mean_w += pr * w;
                        s_mf += pr * w * w * (p - g_bar).powi(2);
                    }
                }
            }
        }
        CoinOracle {
            g_bar,
            evidence,
            j_hi: self.cost_hi * s_hi,
            j_mf: (self.cost_lo + mu * self.cost_hi) * s_mf,
            mean_w_mf: mean_w,
            c_lo: self.cost_lo,
            c_hi: self.cost_hi,
            v_hi: s_hi,
            v_mf,
            v_eta,
            e_mf,
        }
    }
}

/// Mean and standard error of `x` from `batches` equal batch means.
pub fn batch_mean_se(x: &[f64], batches: usize) -> (f64, f64) {
    let size = x.len() / batches;
    let means: Vec<f64> = x
        .chunks(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (m, (var / batches as f64).sqrt())
}
