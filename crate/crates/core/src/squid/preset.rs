// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Named SQUID parameter sets and the capacitance sweep that produced them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{solve, FluxGrid, SpectrumError, SquidParams};
use crate::units::FLUX_QUANTUM;

const REF15_LIKE: &str = include_str!("../../presets/ref15_like.toml");
const HARMONIC: &str = include_str!("../../presets/harmonic.toml");

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown SQUID preset {0:?} (known: ref15-like, harmonic)")]
    Unknown(String),
    #[error("malformed preset: {0}")]
    Parse(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// SQUID parameters plus the grid they are meant to be solved on.
///
/// Keys carry their units so a preset file is unambiguous on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquidPreset {
    #[serde(rename = "C_farad")]
    pub capacitance_f: f64,
    #[serde(rename = "L_henry")]
    pub inductance_h: f64,
    #[serde(rename = "Ic_ampere")]
    pub critical_current_a: f64,
    #[serde(rename = "Phix_over_Phi0")]
    pub external_flux_phi0: f64,
    pub grid_points: usize,
    #[serde(rename = "grid_halfwidth_over_Phi0")]
    pub grid_half_width_phi0: f64,
}

impl SquidPreset {
    pub const NAMES: [&'static str; 2] = ["ref15-like", "harmonic"];

    pub fn named(name: &str) -> Result<Self, PresetError> {
        match name {
            "ref15-like" => Self::from_toml_str(REF15_LIKE),
            "harmonic" => Self::from_toml_str(HARMONIC),
            other => Err(PresetError::Unknown(other.to_string())),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, PresetError> {
        let p: SquidPreset = toml::from_str(s).map_err(|e| PresetError::Parse(e.to_string()))?;
        p.params()?;
        p.grid()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat numeric table always serializes")
    }

    pub fn params(&self) -> Result<SquidParams, SpectrumError> {
        SquidParams::new(
            self.capacitance_f,
            self.inductance_h,
            self.critical_current_a,
            self.external_flux_phi0 * FLUX_QUANTUM,
        )
    }

    /// Grid centred on the bias flux.
    pub fn grid(&self) -> Result<FluxGrid, SpectrumError> {
        FluxGrid::new(
            self.external_flux_phi0 * FLUX_QUANTUM,
            self.grid_half_width_phi0 * FLUX_QUANTUM,
            self.grid_points,
        )
    }
}

/// Target and bracket for [`tune_capacitance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningTarget {
    /// Desired (E₂ − E₀)/ħ in rad/s.
    pub omega_20: f64,
    /// Capacitance bracket (F); ω₂₀ falls as C grows.
    pub c_min: f64,
    pub c_max: f64,
    /// Bisection steps in log C.
    pub iterations: usize,
}

/// Bisects the junction capacitance until ω₂₀ hits the target.
///
/// Everything except C is taken from `template`. Returns the tuned
/// parameters and the (C, ω₂₀) trail of every probe, in order.
pub fn tune_capacitance(
    template: &SquidParams,
    half_width_phi0: f64,
    points: usize,
    target: &TuningTarget,
) -> Result<(SquidParams, Vec<(f64, f64)>), SpectrumError> {
    let grid = FluxGrid::around_bias(template, half_width_phi0, points)?;
    let mut trail = Vec::new();
    let mut probe = |c: f64| -> Result<f64, SpectrumError> {
        let p = SquidParams {
            capacitance: c,
            ..*template
        };
        let w = solve(&p, &grid, 3)?.omega_20();
        trail.push((c, w));
        Ok(w)
    };
    let (mut lo, mut hi) = (target.c_min.ln(), target.c_max.ln());
    let w_lo = probe(target.c_min)?;
    let w_hi = probe(target.c_max)?;
    if !(w_lo >= target.omega_20 && target.omega_20 >= w_hi) {
        return Err(SpectrumError::NoBracket {
            lo: target.c_min,
            hi: target.c_max,
            w_lo,
            w_hi,
        });
    }
    for _ in 0..target.iterations {
        let mid = 0.5 * (lo + hi);
        if probe(mid.exp())? > target.omega_20 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tuned = SquidParams {
        capacitance: (0.5 * (lo + hi)).exp(),
        ..*template
    };
    Ok((tuned, trail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_presets_parse() {
        for name in SquidPreset::NAMES {
            let p = SquidPreset::named(name).unwrap();
            assert!(p.params().is_ok());
        }
        assert!(matches!(SquidPreset::named("nope"), Err(PresetError::Unknown(_))));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{}\nextra_key = 1.0\n", HARMONIC);
        let err = SquidPreset::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("extra_key"), "{err}");
    }

    #[test]
    fn toml_roundtrip() {
        let p = SquidPreset::named("ref15-like").unwrap();
        let back = SquidPreset::from_toml_str(&p.to_toml_string()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn default_preset_sweep_reproduces() {
        use std::f64::consts::PI;
        let stored = SquidPreset::named("ref15-like").unwrap();
        let template = stored.params().unwrap();
        assert!((template.beta_l() - 1.3).abs() < 1e-8);
        let target = TuningTarget {
            omega_20: 2.0 * PI * 80e9,
            c_min: 2e-15,
            c_max: 200e-15,
            iterations: 60,
        };
        let (tuned, trail) = tune_capacitance(&template, stored.grid_half_width_phi0, stored.grid_points, &target).unwrap();
        assert_eq!(trail.len(), 62);
        assert!((tuned.capacitance / stored.capacitance_f - 1.0).abs() < 1e-6);

        let grid = stored.grid().unwrap();
        let ls = solve(&template, &grid, 3).unwrap();
        assert!((ls.omega_20() / target.omega_20 - 1.0).abs() < 1e-5);
        assert!(super::super::lambda_check(&ls).is_lambda);

        let fine = solve(&template, &grid.refined(), 3).unwrap();
        for (a, b) in [(ls.omega_10(), fine.omega_10()), (ls.omega_20(), fine.omega_20())] {
            assert!(((a - b) / b).abs() < 1e-6);
        }
    }
}
