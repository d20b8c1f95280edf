// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution.
//!
//! Time-independent generators are propagated exactly through their
//! eigendecomposition. Explicitly time-dependent ones use the exponential
//! midpoint rule ψ ← exp(−i H(t + dt/2) dt) ψ, which is unitary to roundoff
//! at every step and second-order accurate globally.

use thiserror::Error;

use crate::hilbert::{HilbertError, Operator, SpectralDecomposition, StateVector};
use crate::units::HbarConvention;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("step {dt:e} s exceeds {limit:e} s, 1/{STEPS_PER_PERIOD} of the fastest period (omega_max = {omega_max:e} rad/s)")]
    DtTooLarge { dt: f64, limit: f64, omega_max: f64 },
    #[error("step must be positive and finite, got {0:e}")]
    InvalidStep(f64),
    #[error("time span [{0:e}, {1:e}] is not finite")]
    InvalidSpan(f64, f64),
    #[error("state became non-finite at t = {0:e} s")]
    NonFinite(f64),
}

/// Minimum number of steps per period of the fastest frequency.
pub const STEPS_PER_PERIOD: f64 = 20.0;

/// A Hamiltonian (rad/s) that may depend explicitly on time.
pub trait TimeDependentHamiltonian: Sync {
    fn dims(&self) -> Vec<usize>;
    fn at(&self, t: f64) -> Operator;
    /// Largest angular frequency appearing in the time dependence.
    fn max_frequency(&self) -> f64;
}

/// Constant Hamiltonian viewed as a time-dependent one.
#[derive(Debug, Clone)]
pub struct Constant(pub Operator);

impl TimeDependentHamiltonian for Constant {
    fn dims(&self) -> Vec<usize> {
        self.0.dims().to_vec()
    }

    fn at(&self, _t: f64) -> Operator {
        self.0.clone()
    }

    fn max_frequency(&self) -> f64 {
        0.0
    }
}

/// Closure-backed Hamiltonian; the caller declares its fastest frequency.
pub struct FnHamiltonian<F> {
    dims: Vec<usize>,
    omega_max: f64,
    f: F,
}

impl<F: Fn(f64) -> Operator + Sync> FnHamiltonian<F> {
    pub fn new(dims: Vec<usize>, omega_max: f64, f: F) -> Self {
        FnHamiltonian { dims, omega_max, f }
    }
}

impl<F: Fn(f64) -> Operator + Sync> TimeDependentHamiltonian for FnHamiltonian<F> {
    fn dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn at(&self, t: f64) -> Operator {
        (self.f)(t)
    }

    fn max_frequency(&self) -> f64 {
        self.omega_max
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    pub propagator: Option<Operator>,
    pub step_count: usize,
    /// Largest |‖ψ‖² − 1| seen along the way.
    pub max_norm_drift: f64,
}

/// exp(−i h t) ψ (or exp(−i h t/ħ) ψ for joule-valued `h`).
pub fn evolve_const(
    h: &Operator,
    t: f64,
    psi: &StateVector,
    convention: HbarConvention,
) -> Result<EvolutionResult, DynamicsError> {
    let sd = SpectralDecomposition::new(h, convention)?;
    let out = sd.evolve(psi, t)?;
    let drift = (out.norm_sqr() - psi.norm_sqr()).abs();
    Ok(EvolutionResult {
        final_state: out,
        propagator: None,
        step_count: 1,
        max_norm_drift: drift,
    })
}

/// Same as [`evolve_const`] but also returns the propagator.
pub fn propagate_const(h: &Operator, t: f64, convention: HbarConvention) -> Result<Operator, DynamicsError> {
    Ok(SpectralDecomposition::new(h, convention)?.propagator(t))
}

/// Largest step allowed for `h`: 1/20 of its fastest period.
pub fn max_step(h: &dyn TimeDependentHamiltonian) -> f64 {
    let w = h.max_frequency();
    if w > 0.0 {
        2.0 * std::f64::consts::PI / w / STEPS_PER_PERIOD
    } else {
        f64::INFINITY
    }
}

fn plan(h: &dyn TimeDependentHamiltonian, t0: f64, t1: f64, dt: f64) -> Result<(usize, f64), DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidStep(dt));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(DynamicsError::InvalidSpan(t0, t1));
    }
    let limit = max_step(h);
    if dt > limit {
        return Err(DynamicsError::DtTooLarge {
            dt,
            limit,
            omega_max: h.max_frequency(),
        });
    }
    let span = t1 - t0;
    let steps = (span.abs() / dt).ceil() as usize;
    let h_step = if steps == 0 { 0.0 } else { span / steps as f64 };
    Ok((steps, h_step))
}

/// Exponential-midpoint propagation of `psi` from `t0` to `t1`.
///
/// The step is shrunk so an integer number of steps covers the span exactly;
/// `t1 < t0` runs backwards in time.
pub fn evolve_timedep(
    h: &dyn TimeDependentHamiltonian,
    t0: f64,
    t1: f64,
    dt: f64,
    psi: &StateVector,
) -> Result<EvolutionResult, DynamicsError> {
    evolve_timedep_observed(h, t0, t1, dt, psi, |_, _| {})
}

/// [`evolve_timedep`] that calls `observe(t, ψ(t))` at the start and after every step.
pub fn evolve_timedep_observed(
    h: &dyn TimeDependentHamiltonian,
    t0: f64,
    t1: f64,
    dt: f64,
    psi: &StateVector,
    mut observe: impl FnMut(f64, &StateVector),
) -> Result<EvolutionResult, DynamicsError> {
    if psi.dims() != h.dims().as_slice() {
        return Err(HilbertError::Incompatible(psi.dims().to_vec(), h.dims()).into());
    }
    let (steps, step) = plan(h, t0, t1, dt)?;
    let norm0 = psi.norm_sqr();
    let mut state = psi.clone();
    let mut drift: f64 = 0.0;
    observe(t0, &state);
    for k in 0..steps {
        let t = t0 + k as f64 * step;
        let sd = SpectralDecomposition::new(&h.at(t + 0.5 * step), HbarConvention::AngularFrequency)?;
        state = sd.evolve(&state, step)?;
        let n = state.norm_sqr();
        if !n.is_finite() {
            return Err(DynamicsError::NonFinite(t + step));
        }
        drift = drift.max((n - norm0).abs());
        observe(t + step, &state);
    }
    Ok(EvolutionResult {
        final_state: state,
        propagator: None,
        step_count: steps,
        max_norm_drift: drift,
    })
}

/// Full propagator U(t1, t0) with the exponential-midpoint rule.
pub fn propagate_timedep(
    h: &dyn TimeDependentHamiltonian,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<(Operator, usize), DynamicsError> {
    let (steps, step) = plan(h, t0, t1, dt)?;
    let mut u = Operator::identity(&h.dims())?;
    for k in 0..steps {
        let t = t0 + (k as f64 + 0.5) * step;
        let sd = SpectralDecomposition::new(&h.at(t), HbarConvention::AngularFrequency)?;
        u = sd.propagator(step).mul(&u)?;
    }
    Ok((u, steps))
}
