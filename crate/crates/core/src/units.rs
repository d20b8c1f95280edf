// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical constants (exact SI values where the 2019 redefinition fixes them).
//!
//! Energies of the bare SQUID and cavity are kept in joules. Every generator
//! that drives time evolution is expressed as an angular frequency (rad/s),
//! i.e. with ħ already divided out; [`HbarConvention`] states which of the
//! two a given operator uses.

use std::f64::consts::PI;

/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);

/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Superconducting flux quantum h/2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Vacuum permeability (N/A²).
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Units carried by an operator handed to a propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HbarConvention {
    /// Entries are angular frequencies; the propagator is exp(−i H t).
    #[default]
    AngularFrequency,
    /// Entries are energies in joules; the propagator is exp(−i H t / ħ).
    Joules,
}

impl HbarConvention {
    /// Factor that converts entries of this convention to rad/s.
    pub fn to_angular_frequency(self) -> f64 {
        match self {
            HbarConvention::AngularFrequency => 1.0,
            HbarConvention::Joules => 1.0 / HBAR,
        }
    }
}

/// Converts an ordinary frequency in hertz to rad/s.
pub fn hz_to_radps(f: f64) -> f64 {
    2.0 * PI * f
}

/// Converts rad/s to hertz.
pub fn radps_to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}
