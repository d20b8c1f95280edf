// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files: one flat table, every physical key suffixed with its unit.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use cqed_core::protocols::{schedule_by_name, Backend, CavityBinding, DispersiveBinding, GateSchedule, RabiSet};
use cqed_core::squid::{FluxGrid, SquidParams, SquidPreset};
use cqed_core::units::FLUX_QUANTUM;

use crate::CliError;

/// Scenario used when no `--config` is given.
pub const BUILTIN: &str = include_str!("../scenarios/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Analytic,
    Dispersive,
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Dispersive,
    Rwa,
}

/// Every key is optional; omitted keys take the documented fallbacks,
/// except `t_op_s`, whose absence means "estimate it from the CPS schedule".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Named SQUID preset; inline `squid_*` / `grid_*` keys override its fields.
    pub squid_preset: Option<String>,
    #[serde(rename = "squid_C_farad")]
    pub squid_c_farad: Option<f64>,
    #[serde(rename = "squid_L_henry")]
    pub squid_l_henry: Option<f64>,
    #[serde(rename = "squid_Ic_ampere")]
    pub squid_ic_ampere: Option<f64>,
    #[serde(rename = "squid_Phix_over_Phi0")]
    pub squid_phix_over_phi0: Option<f64>,
    pub grid_points: Option<usize>,
    #[serde(rename = "grid_halfwidth_over_Phi0")]
    pub grid_halfwidth_over_phi0: Option<f64>,
    pub n_levels: Option<usize>,

    pub schedule: Option<String>,
    pub backend: Option<BackendKind>,
    /// Gate fidelity below which a cavity-backend run is a physics failure.
    pub min_fidelity: Option<f64>,

    /// Δ = |ω_c − ω₂₀|.
    pub detuning_radps: Option<f64>,
    /// g₀₂ given directly; otherwise `g02_over_delta`·Δ.
    pub g02_radps: Option<f64>,
    pub g02_over_delta: Option<f64>,
    /// γ for the effective backend; otherwise g₀₂²/Δ.
    pub gamma_radps: Option<f64>,
    pub fock_cutoff: Option<usize>,
    pub max_fock_cutoff: Option<usize>,
    pub samples_per_period: Option<usize>,
    pub rabi_02_radps: Option<f64>,
    pub rabi_12_radps: Option<f64>,
    pub rabi_01_radps: Option<f64>,

    pub scan_kind: Option<ScanKind>,
    /// g₀₂/Δ (dispersive scan) or Δ/ω_c (rwa scan) values.
    pub scan_ratios: Option<Vec<f64>>,
    /// g₀₂ of the rwa scan.
    pub scan_rwa_g02_radps: Option<f64>,

    pub q_factor: Option<f64>,
    /// Level-|2⟩ transition frequency ν₀; the cavity sits at ν₀ + Δ/2π.
    pub nu0_hz: Option<f64>,
    pub t_r_s: Option<f64>,
    pub t_op_s: Option<f64>,
    pub margin: Option<f64>,
}

const DEFAULT_DETUNING: f64 = 2.0 * PI * 0.1e9;
const DEFAULT_RABI: f64 = 2.0 * PI * 50e6;

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("shipped scenario parses")
    }

    /// Canonical text of the resolved scenario, hashed into output headers.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("flat table serializes")
    }

    pub fn squid(&self) -> Result<(SquidParams, FluxGrid, usize), CliError> {
        let name = self.squid_preset.as_deref().unwrap_or("ref15-like");
        let mut p = SquidPreset::named(name).map_err(|e| CliError::Usage(e.to_string()))?;
        p.capacitance_f = self.squid_c_farad.unwrap_or(p.capacitance_f);
        p.inductance_h = self.squid_l_henry.unwrap_or(p.inductance_h);
        p.critical_current_a = self.squid_ic_ampere.unwrap_or(p.critical_current_a);
        p.external_flux_phi0 = self.squid_phix_over_phi0.unwrap_or(p.external_flux_phi0);
        p.grid_points = self.grid_points.unwrap_or(p.grid_points);
        p.grid_half_width_phi0 = self.grid_halfwidth_over_phi0.unwrap_or(p.grid_half_width_phi0);
        let params = SquidParams::new(
            p.capacitance_f,
            p.inductance_h,
            p.critical_current_a,
            p.external_flux_phi0 * FLUX_QUANTUM,
        )
        .map_err(|e| CliError::Usage(e.to_string()))?;
        let grid = p.grid().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok((params, grid, self.n_levels.unwrap_or(3)))
    }

    pub fn schedule(&self) -> Result<GateSchedule, CliError> {
        let name = self.schedule.as_deref().unwrap_or("cps");
        schedule_by_name(name).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.unwrap_or(BackendKind::Analytic)
    }

    pub fn min_fidelity(&self) -> Result<f64, CliError> {
        let f = self.min_fidelity.unwrap_or(0.99);
        if (0.0..=1.0).contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(format!("min_fidelity must lie in [0, 1], got {f}")))
        }
    }

    pub fn detuning(&self) -> Result<f64, CliError> {
        positive("detuning_radps", self.detuning_radps.unwrap_or(DEFAULT_DETUNING))
    }

    pub fn g02(&self) -> Result<f64, CliError> {
        match self.g02_radps {
            Some(g) => positive("g02_radps", g),
            None => Ok(positive("g02_over_delta", self.g02_over_delta.unwrap_or(0.05))? * self.detuning()?),
        }
    }

    pub fn gamma(&self) -> Result<f64, CliError> {
        match self.gamma_radps {
            Some(g) => positive("gamma_radps", g),
            None => Ok(self.g02()?.powi(2) / self.detuning()?),
        }
    }

    pub fn rabi(&self) -> Result<RabiSet, CliError> {
        Ok(RabiSet {
            zero_two: Some(positive("rabi_02_radps", self.rabi_02_radps.unwrap_or(DEFAULT_RABI))?),
            one_two: Some(positive("rabi_12_radps", self.rabi_12_radps.unwrap_or(DEFAULT_RABI))?),
            zero_one: Some(positive("rabi_01_radps", self.rabi_01_radps.unwrap_or(DEFAULT_RABI))?),
        })
    }

    pub fn fock_cutoff(&self) -> Result<usize, CliError> {
        let n = self.fock_cutoff.unwrap_or(4);
        if n < 2 {
            return Err(CliError::Usage(format!("fock_cutoff must be at least 2, got {n}")));
        }
        Ok(n)
    }

    pub fn samples_per_period(&self) -> Result<usize, CliError> {
        match self.samples_per_period.unwrap_or(32) {
            0 => Err(CliError::Usage("samples_per_period must be positive".into())),
            n => Ok(n),
        }
    }

    pub fn backend(&self) -> Result<Backend, CliError> {
        Ok(match self.backend_kind() {
            BackendKind::Analytic => Backend::Analytic,
            BackendKind::Dispersive => Backend::Dispersive(DispersiveBinding {
                gamma: Some(self.gamma()?),
                rabi: self.rabi()?,
            }),
            BackendKind::Cavity => Backend::Cavity(self.cavity_binding()?),
        })
    }

    pub fn cavity_binding(&self) -> Result<CavityBinding, CliError> {
        Ok(CavityBinding {
            g02: self.g02()?,
            detuning: self.detuning()?,
            fock_cutoff: self.fock_cutoff()?,
            rabi: self.rabi()?,
            samples_per_period: self.samples_per_period()?,
        })
    }
}
