// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Cavity-lifetime arithmetic: how good must the cavity be when it is only
//! virtually excited?
//!
//! The cavity lives T_c = Q/2πν. During a gate of length t_op it is excited
//! with probability P ≃ t_op/t_r, so photon loss acts on the qubits on the
//! slower scale T_c/P. Requiring that to exceed t_r gives Q ≫ 2πν·t_op.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocols::{GateSchedule, RabiSet, Step, Target};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeasibilityError {
    #[error("{name} must be positive and finite, got {value:e}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("malformed feasibility text: {0}")]
    Parse(String),
    #[error("{0}")]
    Schedule(String),
}

/// Default ≫ margin: Q must exceed this multiple of q_min.
pub const DEFAULT_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityInput {
    pub q_factor: f64,
    /// Cavity frequency ν (Hz).
    #[serde(rename = "nu_hz")]
    pub nu: f64,
    /// Gate time (s).
    #[serde(rename = "t_op_s")]
    pub t_op: f64,
    /// Relaxation time of level |2⟩ (s).
    #[serde(rename = "t_r_s")]
    pub t_r: f64,
}

impl FeasibilityInput {
    /// ν = 80 GHz + 0.1 GHz detuning, t_r = 1 µs, t_op = 0.01·t_r and the
    /// demonstrated Q = 10⁸.
    pub fn default_scenario() -> Self {
        FeasibilityInput {
            q_factor: 1e8,
            nu: 80e9 + 0.1e9,
            t_op: 0.01 * 1e-6,
            t_r: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<(), FeasibilityError> {
        for (name, value) in [
            ("q_factor", self.q_factor),
            ("nu_hz", self.nu),
            ("t_op_s", self.t_op),
            ("t_r_s", self.t_r),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(FeasibilityError::NonPositive { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub input: FeasibilityInput,
    /// Cavity lifetime Q/2πν (s).
    #[serde(rename = "T_c_s")]
    pub t_c: f64,
    /// Probability the cavity is excited during a gate, t_op/t_r.
    #[serde(rename = "P")]
    pub p: f64,
    /// T_c/P (s).
    #[serde(rename = "effective_decay_s")]
    pub effective_decay: f64,
    /// 2πν·t_op.
    pub q_min: f64,
    pub margin: f64,
    /// Q / q_min.
    pub achieved_margin: f64,
    pub pass: bool,
}

impl FeasibilityReport {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat numeric report always serializes")
    }
}

/// [`assess_with_margin`] with [`DEFAULT_MARGIN`].
pub fn assess(f: &FeasibilityInput) -> Result<FeasibilityReport, FeasibilityError> {
    assess_with_margin(f, DEFAULT_MARGIN)
}

/// Derived lifetimes and the verdict Q ≥ margin·q_min.
pub fn assess_with_margin(f: &FeasibilityInput, margin: f64) -> Result<FeasibilityReport, FeasibilityError> {
    f.validate()?;
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(FeasibilityError::NonPositive {
            name: "margin",
            value: margin,
        });
    }
    let t_c = f.q_factor / (2.0 * PI * f.nu);
    let p = f.t_op / f.t_r;
    let q_min = 2.0 * PI * f.nu * f.t_op;
    Ok(FeasibilityReport {
        input: *f,
        t_c,
        p,
        effective_decay: t_c / p,
        q_min,
        margin,
        achieved_margin: f.q_factor / q_min,
        pass: f.q_factor >= margin * q_min,
    })
}

/// Wall-clock length of a schedule: dispersive steps last γt/π·π/γ, pulses
/// θ/2Ω. Pulses on both SQUIDs are counted one after the other.
pub fn gate_time_estimate(gamma: f64, schedule: &GateSchedule, rabi: &RabiSet) -> Result<f64, FeasibilityError> {
    let mut total = 0.0;
    for s in &schedule.steps {
        match s.step {
            Step::Dispersive(d) => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(FeasibilityError::NonPositive {
                        name: "gamma",
                        value: gamma,
                    });
                }
                total += d.gamma_t_over_pi * PI / gamma;
            }
            Step::Ara(a) => {
                let omega = rabi
                    .get(a.transition)
                    .map_err(|e| FeasibilityError::Schedule(e.to_string()))?;
                let sites = if a.target == Target::Both { 2.0 } else { 1.0 };
                total += sites * a.theta_over_pi * PI / (2.0 * omega);
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{schedule_cps, schedule_swap};

    #[test]
    fn default_scenario_threshold() {
        let r = assess(&FeasibilityInput::default_scenario()).unwrap();
        assert!((r.q_min - 2.0 * PI * 80.1e9 * 1e-8).abs() < 1e-9);
        assert!(r.q_min > 5.0e3 && r.q_min < 5.1e3);
        assert!(r.pass);
        assert!((r.achieved_margin - 1e8 / r.q_min).abs() < 1e-6);
        assert!((r.t_c * 2.0 * PI * r.input.nu - r.input.q_factor).abs() <= 1e-8 * r.input.q_factor);
    }

    #[test]
    fn q_min_linear_in_gate_time() {
        let f = FeasibilityInput::default_scenario();
        let double = FeasibilityInput { t_op: 2.0 * f.t_op, ..f };
        assert_eq!(assess(&double).unwrap().q_min, 2.0 * assess(&f).unwrap().q_min);
    }

    #[test]
    fn marginal_cavity_fails() {
        let f = FeasibilityInput {
            q_factor: 2e4,
            ..FeasibilityInput::default_scenario()
        };
        let r = assess(&f).unwrap();
        assert!(r.q_factor_exceeds_q_min() && !r.pass);
    }

    impl FeasibilityReport {
        fn q_factor_exceeds_q_min(&self) -> bool {
            self.input.q_factor > self.q_min
        }
    }

    #[test]
    fn nonpositive_rejected() {
        let f = FeasibilityInput {
            t_r: 0.0,
            ..FeasibilityInput::default_scenario()
        };
        assert!(matches!(assess(&f), Err(FeasibilityError::NonPositive { name: "t_r_s", .. })));
        assert!(assess_with_margin(&FeasibilityInput::default_scenario(), -1.0).is_err());
    }

    #[test]
    fn gate_times() {
        let (g, w) = (1e6, 3e8);
        let rabi = RabiSet::uniform(w);
        let cps = gate_time_estimate(g, &schedule_cps(), &rabi).unwrap();
        assert!((cps - (PI / g + 4.0 * PI / (2.0 * w))).abs() < 1e-18);
        let swap = gate_time_estimate(g, &schedule_swap(), &rabi).unwrap();
        assert!(swap > cps);
        let empty = GateSchedule {
            name: "empty".into(),
            steps: vec![],
            ideal_unitary: None,
        };
        assert_eq!(gate_time_estimate(g, &empty, &rabi).unwrap(), 0.0);
    }

    #[test]
    fn report_roundtrips() {
        let r = assess(&FeasibilityInput::default_scenario()).unwrap();
        let back: FeasibilityReport = toml::from_str(&r.to_toml_string()).unwrap();
        assert_eq!(r, back);
    }
}
