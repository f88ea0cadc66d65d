use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;

fn h(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step from 0 to 1 on `[0, 1]` with `s(x) + s(1 − x) = 1`.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = h(x);
        a / (a + h(1.0 - x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeyerChecks {
    pub value_at_zero: f64,
    pub max_at_lattice: f64,
    pub integral: f64,
    pub partition_defect: f64,
}

/// Smooth window `φ(ξ) = Π φ_1(ξ_i)` with `φ(0) = 1`, `φ(k) = 0` on the rest
/// of the lattice and unit integral. `φ_1` is the Fourier transform of
/// `θ_1(t) = S(|t|)/2π`, where `S` equals 1 on `[0, a]`, falls smoothly to
/// 0 on `[2π − a, 2π]` and satisfies `S(t) + S(2π − t) = 1`.
#[derive(Debug, Clone)]
pub struct MeyerWindow {
    n: usize,
    plateau: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    checks: MeyerChecks,
}

impl MeyerWindow {
    /// Builds the window and verifies its defining properties: `φ(0) = 1`
    /// to 1e-10, `|φ(k)| ≤ 1e-8` for `0 < |k| ≤ check_radius` and
    /// `∫φ_1 = 1` to 1e-6.
    pub fn new(n: usize, plateau_fraction: f64, nodes: usize, check_radius: u32) -> Result<Self> {
        if !(0.0..0.5).contains(&plateau_fraction) || nodes < 16 {
            return Err(Error::InvalidSymbol("window needs plateau in [0, π/2) and at least 16 nodes".into()));
        }
        let plateau = plateau_fraction * PI;
        let dt = TAU / nodes as f64;
        let mut ts = Vec::with_capacity(nodes + 1);
        let mut weights = Vec::with_capacity(nodes + 1);
        for i in 0..=nodes {
            let t = i as f64 * dt;
            let end = if i == 0 || i == nodes { 0.5 } else { 1.0 };
            ts.push(t);
            weights.push(end * dt * Self::step_profile(t, plateau) / PI);
        }
        let mut w = Self {
            n,
            plateau,
            nodes: ts,
            weights,
            checks: MeyerChecks { value_at_zero: 0.0, max_at_lattice: 0.0, integral: 0.0, partition_defect: 0.0 },
        };
        w.checks = w.verify(check_radius);
        let c = w.checks;
        if (c.value_at_zero - 1.0).abs() > 1e-10 {
            return Err(Error::WindowCheck { check: "phi(0) = 1", value: (c.value_at_zero - 1.0).abs(), tol: 1e-10 });
        }
        if c.max_at_lattice > 1e-8 {
            return Err(Error::WindowCheck { check: "phi(k) = 0", value: c.max_at_lattice, tol: 1e-8 });
        }
        if (c.integral - 1.0).abs() > 1e-6 {
            return Err(Error::WindowCheck { check: "integral = 1", value: (c.integral - 1.0).abs(), tol: 1e-6 });
        }
        if c.partition_defect > 1e-14 {
            return Err(Error::WindowCheck { check: "partition identity", value: c.partition_defect, tol: 1e-14 });
        }
        Ok(w)
    }

    pub fn from_defaults(n: usize) -> Result<Self> {
        let d = crate::defaults::Defaults::default();
        Self::new(n, d.meyer_plateau, d.meyer_nodes, d.meyer_check_radius)
    }

    fn step_profile(t: f64, plateau: f64) -> f64 {
        1.0 - smooth_step((t - plateau) / (TAU - 2.0 * plateau))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn checks(&self) -> MeyerChecks {
        self.checks
    }

    /// `θ_1(t)`
    pub fn theta1(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= TAU {
            0.0
        } else {
            Self::step_profile(t, self.plateau) / TAU
        }
    }

    /// `φ_1(ξ) = (1/π) ∫_0^{2π} S(t) cos(ξt) dt`
    pub fn phi1(&self, xi: f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * (xi * t).cos()).sum()
    }

    pub fn phi(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|&x| self.phi1(x)).product()
    }

    fn verify(&self, check_radius: u32) -> MeyerChecks {
        let value_at_zero = self.phi1(0.0);
        let max_at_lattice = (1..=check_radius as i32)
            .map(|k| self.phi1(k as f64).abs())
            .fold(0.0, f64::max);
        // φ_1 is band-limited to |t| < 2π, so a step below 1 integrates it
        // exactly up to the truncation of the range.
        let step = 0.25;
        let reach = 96.0;
        let count = (reach / step) as i32;
        let integral = step * (-count..=count).map(|j| self.phi1(j as f64 * step)).sum::<f64>();
        let partition_defect = (0..=64)
            .map(|i| {
                let t = TAU * i as f64 / 64.0;
                (self.theta1(t) + self.theta1(TAU - t) - 1.0 / TAU).abs()
            })
            .fold(0.0, f64::max);
        MeyerChecks { value_at_zero, max_at_lattice, integral, partition_defect }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_properties() {
        let w = MeyerWindow::from_defaults(2).unwrap();
        let c = w.checks();
        assert!((c.value_at_zero - 1.0).abs() < 1e-12);
        assert!(c.max_at_lattice < 1e-12);
        assert!((c.integral - 1.0).abs() < 1e-6, "{}", c.integral);
        assert!((w.phi(&[0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!(w.phi(&[3.0, 0.4]).abs() < 1e-12);
        assert_eq!(w.phi1(2.5), w.phi1(-2.5));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MeyerWindow::new(1, 0.7, 4096, 4).is_err());
        assert!(MeyerWindow::new(1, 0.05, 8, 4).is_err());
    }
}
