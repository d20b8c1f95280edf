// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse schedules for two SQUIDs sharing a cavity, and their execution.
//!
//! A schedule alternates ARA steps (coupling switched off, one resonant
//! rectangular pulse per addressed SQUID) with dispersive steps (free
//! evolution under the cavity-mediated exchange). Pulse areas follow
//! θ = 2Ωt, so a "π pulse" has Ωt = π/2 and maps |0⟩ → −i|2⟩ on 0↔2.
//!
//! Three backends execute a schedule:
//! * [`Backend::Analytic`] composes the closed-form rotation and dispersive maps;
//! * [`Backend::Dispersive`] exponentiates the drive and effective generators;
//! * [`Backend::Cavity`] keeps the cavity mode explicit during dispersive steps.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamiltonians::{
    dispersive_gamma, h_eff_vacuum, rotation_generator, HamiltonianError, Transition, TwoSquidCavity, SQUID_LEVELS,
};
use crate::hilbert::{kron, HilbertError, Operator, SpectralDecomposition, StateVector, C64};
use crate::units::HbarConvention;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error("backend parameter not bound: {0}")]
    Unbound(String),
    #[error("invalid backend parameter: {0}")]
    InvalidBinding(String),
    #[error("initial state must live on the two-SQUID space [3, 3], got {0:?}")]
    InitialDims(Vec<usize>),
    #[error("unknown schedule {0:?} (known: entangle, cps, swap, transfer)")]
    UnknownSchedule(String),
    #[error("malformed schedule: {0}")]
    Parse(String),
}

/// Which SQUID an ARA pulse addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    A,
    B,
    Both,
}

impl Target {
    fn sites(self) -> &'static [usize] {
        match self {
            Target::A => &[0],
            Target::B => &[1],
            Target::Both => &[0, 1],
        }
    }
}

/// A resonant pulse of area θ = `theta_over_pi`·π on `transition`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AraStep {
    pub target: Target,
    pub transition: Transition,
    pub theta_over_pi: f64,
}

/// Free dispersive evolution for t = `gamma_t_over_pi`·π/γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveStep {
    pub gamma_t_over_pi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Ara(AraStep),
    Dispersive(DispersiveStep),
}

/// A step tagged with the stage (table column) it belongs to, counted from 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledStep {
    pub stage: usize,
    pub step: Step,
}

#[derive(Debug, Clone)]
pub struct GateSchedule {
    pub name: String,
    pub steps: Vec<ScheduledStep>,
    /// Target map on the computational block {|00⟩, |01⟩, |10⟩, |11⟩}.
    pub ideal_unitary: Option<Operator>,
}

impl PartialEq for GateSchedule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.steps == other.steps
    }
}

impl GateSchedule {
    pub fn stage_count(&self) -> usize {
        self.steps.iter().map(|s| s.stage).max().unwrap_or(0)
    }
}

/// Shipped schedule names.
pub const SCHEDULE_NAMES: [&str; 4] = ["entangle", "cps", "swap", "transfer"];

/// cos(θ/2) on the two addressed levels, −i sin(θ/2) between them, 1 on the spectator.
pub fn rotation_map(transition: Transition, theta: f64) -> Operator {
    let (i, j) = transition.levels();
    let k = transition.spectator();
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let mut m = DMatrix::zeros(SQUID_LEVELS, SQUID_LEVELS);
    m[(i, i)] = C64::new(c, 0.0);
    m[(j, j)] = C64::new(c, 0.0);
    m[(i, j)] = C64::new(0.0, -s);
    m[(j, i)] = C64::new(0.0, -s);
    m[(k, k)] = C64::new(1.0, 0.0);
    Operator::new(m, vec![SQUID_LEVELS]).expect("3x3")
}

/// Closed-form dispersive evolution on `[3, 3]`:
/// e^{−iγt}[cos γt, −i sin γt] mixing of |2,0⟩ and |0,2⟩, e^{−iγt} on |2,1⟩
/// and |1,2⟩, e^{−2iγt} on |2,2⟩, identity elsewhere.
pub fn dispersive_map(gamma: f64, t: f64) -> Operator {
    let x = gamma * t;
    let idx = |a: usize, b: usize| a * SQUID_LEVELS + b;
    let mut m = DMatrix::<C64>::identity(9, 9);
    let phase = C64::from_polar(1.0, -x);
    let (c, s) = (x.cos(), x.sin());
    let (p20, p02) = (idx(2, 0), idx(0, 2));
    m[(p20, p20)] = phase * c;
    m[(p02, p02)] = phase * c;
    m[(p02, p20)] = phase * C64::new(0.0, -s);
    m[(p20, p02)] = phase * C64::new(0.0, -s);
    m[(idx(2, 1), idx(2, 1))] = phase;
    m[(idx(1, 2), idx(1, 2))] = phase;
    m[(idx(2, 2), idx(2, 2))] = C64::from_polar(1.0, -2.0 * x);
    Operator::new(m, vec![SQUID_LEVELS, SQUID_LEVELS]).expect("9x9")
}

fn ara(stage: usize, target: Target, transition: Transition, theta_over_pi: f64) -> ScheduledStep {
    ScheduledStep {
        stage,
        step: Step::Ara(AraStep {
            target,
            transition,
            theta_over_pi,
        }),
    }
}

fn disp(stage: usize, gamma_t_over_pi: f64) -> ScheduledStep {
    ScheduledStep {
        stage,
        step: Step::Dispersive(DispersiveStep { gamma_t_over_pi }),
    }
}

fn block_unitary(diag_or_perm: [[f64; 4]; 4]) -> Operator {
    let m = DMatrix::from_fn(4, 4, |r, c| C64::new(diag_or_perm[r][c], 0.0));
    Operator::new(m, vec![2, 2]).expect("4x4")
}

/// Prepares (i|0,1⟩ − |1,0⟩)/√2 from |0,0⟩.
pub fn schedule_entanglement() -> GateSchedule {
    use Transition::*;
    GateSchedule {
        name: "entangle".into(),
        steps: vec![
            ara(1, Target::A, ZeroTwo, 1.0),
            disp(2, 0.25),
            ara(3, Target::Both, OneTwo, 1.0),
        ],
        ideal_unitary: None,
    }
}

/// Controlled phase shift diag(1, 1, 1, −1).
pub fn schedule_cps() -> GateSchedule {
    use Transition::*;
    GateSchedule {
        name: "cps".into(),
        steps: vec![ara(1, Target::A, OneTwo, 1.0), disp(2, 1.0), ara(3, Target::A, OneTwo, 3.0)],
        ideal_unitary: Some(block_unitary([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ])),
    }
}

/// Five-stage SWAP.
pub fn schedule_swap() -> GateSchedule {
    use Transition::*;
    GateSchedule {
        name: "swap".into(),
        steps: vec![
            ara(1, Target::Both, OneTwo, 1.0),
            disp(2, 0.5),
            ara(3, Target::A, OneTwo, 2.0),
            ara(3, Target::B, OneTwo, 1.0),
            disp(4, 1.0),
            ara(5, Target::A, OneTwo, 3.0),
        ],
        ideal_unitary: Some(block_unitary([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])),
    }
}

/// Moves α|0⟩ + β|1⟩ from SQUID a to SQUID b (b starts in |0⟩).
pub fn schedule_transfer() -> GateSchedule {
    use Transition::*;
    GateSchedule {
        name: "transfer".into(),
        steps: vec![ara(1, Target::A, OneTwo, 1.0), disp(2, 0.5), ara(3, Target::B, OneTwo, 1.0)],
        ideal_unitary: None,
    }
}

pub fn schedule_by_name(name: &str) -> Result<GateSchedule, ProtocolError> {
    match name {
        "entangle" | "entanglement" => Ok(schedule_entanglement()),
        "cps" => Ok(schedule_cps()),
        "swap" => Ok(schedule_swap()),
        "transfer" => Ok(schedule_transfer()),
        other => Err(ProtocolError::UnknownSchedule(other.to_string())),
    }
}

/// Rabi rates (rad/s) per transition; only the ones a schedule uses are needed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RabiSet {
    pub zero_two: Option<f64>,
    pub one_two: Option<f64>,
    pub zero_one: Option<f64>,
}

impl RabiSet {
    pub fn uniform(rabi: f64) -> Self {
        RabiSet {
            zero_two: Some(rabi),
            one_two: Some(rabi),
            zero_one: Some(rabi),
        }
    }

    pub fn get(&self, t: Transition) -> Result<f64, ProtocolError> {
        let v = match t {
            Transition::ZeroTwo => self.zero_two,
            Transition::OneTwo => self.one_two,
            Transition::ZeroOne => self.zero_one,
        };
        match v {
            Some(r) if r > 0.0 && r.is_finite() => Ok(r),
            Some(r) => Err(ProtocolError::InvalidBinding(format!("rabi for {t} = {r:e}"))),
            None => Err(ProtocolError::Unbound(format!("rabi rate for the {t} transition"))),
        }
    }
}

/// Parameters of the effective-Hamiltonian backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveBinding {
    /// γ (rad/s).
    pub gamma: Option<f64>,
    pub rabi: RabiSet,
}

/// Parameters of the explicit-cavity backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityBinding {
    /// g₀₂ (rad/s).
    pub g02: f64,
    /// |ω_c − ω₂₀| (rad/s); γ = g₀₂²/detuning.
    pub detuning: f64,
    pub fock_cutoff: usize,
    pub rabi: RabiSet,
    /// Photon-number samples per detuning period during dispersive steps.
    pub samples_per_period: usize,
}

impl CavityBinding {
    /// Binding with the given g₀₂/Δ ratio and Δ, default Fock cutoff 4.
    pub fn from_ratio(ratio: f64, detuning: f64, rabi: RabiSet) -> Self {
        CavityBinding {
            g02: ratio * detuning,
            detuning,
            fock_cutoff: 4,
            rabi,
            samples_per_period: 32,
        }
    }

    pub fn gamma(&self) -> f64 {
        dispersive_gamma(self.g02, self.detuning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Analytic,
    Dispersive(DispersiveBinding),
    Cavity(CavityBinding),
}

/// Final and per-stage states of one run.
#[derive(Debug, Clone)]
pub struct ExecutionResult {
    pub final_state: StateVector,
    /// State after the last step of each stage.
    pub stage_states: Vec<StateVector>,
    /// Largest sampled mean photon number ⟨a†a⟩ (0 without a cavity).
    pub peak_photon_population: f64,
    /// Largest sampled population of the top Fock level.
    pub top_fock_population: f64,
    /// Largest change of ⟨a†a⟩ across any single ARA step.
    pub ara_photon_change: f64,
    /// Physical duration (s); zero for the analytic backend.
    pub elapsed: f64,
}

fn ara_operator(step: &AraStep) -> Result<Operator, ProtocolError> {
    let r = rotation_map(step.transition, step.theta_over_pi * std::f64::consts::PI);
    local_on_sites(&r, step.target)
}

fn local_on_sites(r: &Operator, target: Target) -> Result<Operator, ProtocolError> {
    let id = Operator::identity(&[SQUID_LEVELS])?;
    Ok(match target {
        Target::A => kron(r, &id)?,
        Target::B => kron(&id, r)?,
        Target::Both => kron(r, r)?,
    })
}

fn check_initial(psi0: &StateVector) -> Result<(), ProtocolError> {
    if psi0.dims() != [SQUID_LEVELS, SQUID_LEVELS] {
        return Err(ProtocolError::InitialDims(psi0.dims().to_vec()));
    }
    Ok(())
}

/// Runs `s` on `psi0` (a state of the two SQUIDs).
///
/// With the cavity backend the cavity starts in vacuum and the returned
/// states live on `[3, 3, N]`.
pub fn execute(s: &GateSchedule, psi0: &StateVector, backend: &Backend) -> Result<ExecutionResult, ProtocolError> {
    check_initial(psi0)?;
    match backend {
        Backend::Analytic => run_closed(s, psi0, None),
        Backend::Dispersive(b) => run_closed(s, psi0, Some(b)),
        Backend::Cavity(b) => run_cavity(s, psi0, b),
    }
}

fn staged<F>(s: &GateSchedule, psi0: StateVector, mut apply: F) -> Result<(StateVector, Vec<StateVector>), ProtocolError>
where
    F: FnMut(&Step, &StateVector) -> Result<StateVector, ProtocolError>,
{
    let mut state = psi0;
    let mut stages = Vec::new();
    for (k, st) in s.steps.iter().enumerate() {
        state = apply(&st.step, &state)?;
        let last_of_stage = s.steps.get(k + 1).is_none_or(|next| next.stage != st.stage);
        if last_of_stage {
            stages.push(state.clone());
        }
    }
    Ok((state, stages))
}

fn run_closed(
    s: &GateSchedule,
    psi0: &StateVector,
    binding: Option<&DispersiveBinding>,
) -> Result<ExecutionResult, ProtocolError> {
    let mut elapsed = 0.0;
    let (state, stages) = staged(s, psi0.clone(), |step, psi| {
        let op = match (step, binding) {
            (Step::Ara(a), None) => ara_operator(a)?,
            (Step::Dispersive(d), None) => dispersive_map(1.0, d.gamma_t_over_pi * std::f64::consts::PI),
            (Step::Ara(a), Some(b)) => {
                let (u, t) = ara_propagator(a, &b.rabi)?;
                elapsed += t;
                u
            }
            (Step::Dispersive(d), Some(b)) => {
                let gamma = b.gamma.ok_or_else(|| ProtocolError::Unbound("gamma".into()))?;
                if !(gamma.is_finite() && gamma != 0.0) {
                    return Err(ProtocolError::InvalidBinding(format!("gamma = {gamma:e}")));
                }
                let t = d.gamma_t_over_pi * std::f64::consts::PI / gamma;
                elapsed += t;
                SpectralDecomposition::new(&h_eff_vacuum(gamma), HbarConvention::AngularFrequency)?.propagator(t)
            }
        };
        Ok(psi.apply(&op)?)
    })?;
    Ok(ExecutionResult {
        final_state: state,
        stage_states: stages,
        peak_photon_population: 0.0,
        top_fock_population: 0.0,
        ara_photon_change: 0.0,
        elapsed,
    })
}

/// exp(−i Ω(|i⟩⟨j| + h.c.) t) on the addressed SQUIDs with t = θ/2Ω.
///
/// Pulses on both SQUIDs are counted one after the other (a single
/// microwave source redirected between them), so the reported time is
/// twice the single-pulse time.
fn ara_propagator(a: &AraStep, rabi: &RabiSet) -> Result<(Operator, f64), ProtocolError> {
    let omega = rabi.get(a.transition)?;
    let t = a.theta_over_pi * std::f64::consts::PI / (2.0 * omega);
    let u = SpectralDecomposition::new(&rotation_generator(a.transition, omega), HbarConvention::AngularFrequency)?.propagator(t);
    Ok((local_on_sites(&u, a.target)?, t * a.target.sites().len() as f64))
}

fn run_cavity(s: &GateSchedule, psi0: &StateVector, b: &CavityBinding) -> Result<ExecutionResult, ProtocolError> {
    if !(b.g02.is_finite() && b.detuning > 0.0 && b.detuning.is_finite()) {
        return Err(ProtocolError::InvalidBinding(format!(
            "g02 = {:e}, detuning = {:e}",
            b.g02, b.detuning
        )));
    }
    if b.fock_cutoff < 2 || b.samples_per_period == 0 {
        return Err(ProtocolError::InvalidBinding(format!(
            "fock cutoff {} / samples per period {}",
            b.fock_cutoff, b.samples_per_period
        )));
    }
    let model = TwoSquidCavity::for_detuning(b.g02, b.detuning, b.fock_cutoff);
    // The rotating frame differs from the interaction picture only by
    // e^{−iδ t a†a}, which commutes with every pulse and leaves the
    // vacuum component untouched, so no frame bookkeeping is required.
    let sd = SpectralDecomposition::new(&model.rotating_frame()?, HbarConvention::AngularFrequency)?;
    let n_op = model.photon_number()?;
    let id_c = Operator::identity(&[b.fock_cutoff])?;
    let gamma = b.gamma();
    let period = 2.0 * std::f64::consts::PI / b.detuning;
    let top = b.fock_cutoff - 1;

    let mut peak: f64 = 0.0;
    let mut top_pop: f64 = 0.0;
    let mut ara_change: f64 = 0.0;
    let mut elapsed = 0.0;
    let vac = StateVector::basis(&[b.fock_cutoff], &[0])?;
    let start = psi0.tensor(&vac)?;

    let mut observe = |psi: &StateVector| -> Result<f64, ProtocolError> {
        let n = psi.expectation(&n_op)?.re;
        peak = peak.max(n);
        let p_top: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(k, _)| k % b.fock_cutoff == top)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        top_pop = top_pop.max(p_top);
        Ok(n)
    };
    observe(&start)?;

    let (state, stages) = staged(s, start, |step, psi| match step {
        Step::Ara(a) => {
            let (u, t) = ara_propagator(a, &b.rabi)?;
            elapsed += t;
            let before = psi.expectation(&n_op)?.re;
            let out = psi.apply(&kron(&u, &id_c)?)?;
            let after = observe(&out)?;
            ara_change = ara_change.max((after - before).abs());
            Ok(out)
        }
        Step::Dispersive(d) => {
            let t = d.gamma_t_over_pi * std::f64::consts::PI / gamma;
            elapsed += t;
            let coords = sd.to_eigenbasis(psi)?;
            let samples = ((t.abs() / period) * b.samples_per_period as f64).ceil().max(1.0) as usize;
            for k in 1..samples {
                observe(&sd.evolve_coordinates(&coords, t * k as f64 / samples as f64))?;
            }
            let out = sd.evolve_coordinates(&coords, t);
            observe(&out)?;
            Ok(out)
        }
    })?;
    Ok(ExecutionResult {
        final_state: state,
        stage_states: stages,
        peak_photon_population: peak,
        top_fock_population: top_pop,
        ara_photon_change: ara_change,
        elapsed,
    })
}

/// Propagator on `[3, 3]` of a closed (analytic or effective) backend.
pub fn schedule_propagator(s: &GateSchedule, backend: &Backend) -> Result<Operator, ProtocolError> {
    let d = SQUID_LEVELS * SQUID_LEVELS;
    let mut cols = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        let e = StateVector::basis(&[SQUID_LEVELS, SQUID_LEVELS], &[k / SQUID_LEVELS, k % SQUID_LEVELS])?;
        let out = match backend {
            Backend::Cavity(_) => {
                return Err(ProtocolError::InvalidBinding(
                    "the explicit-cavity backend has no two-SQUID propagator; run basis states instead".into(),
                ))
            }
            _ => execute(s, &e, backend)?.final_state,
        };
        cols.set_column(k, out.amplitudes());
    }
    Ok(Operator::new(cols, vec![SQUID_LEVELS, SQUID_LEVELS])?)
}

// ---- serialization ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StepKind {
    Ara,
    Dispersive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepRecord {
    kind: StepKind,
    stage: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<Target>,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<Transition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_over_pi: Option<f64>,
    /// Dispersive duration as γt/π.
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_gamma_units: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRecord {
    name: String,
    step: Vec<StepRecord>,
}

impl GateSchedule {
    /// Step list as TOML; the ideal unitary is not part of the text form.
    pub fn to_toml_string(&self) -> String {
        let rec = ScheduleRecord {
            name: self.name.clone(),
            step: self
                .steps
                .iter()
                .map(|s| match s.step {
                    Step::Ara(a) => StepRecord {
                        kind: StepKind::Ara,
                        stage: s.stage,
                        target: Some(a.target),
                        levels: Some(a.transition),
                        theta_over_pi: Some(a.theta_over_pi),
                        duration_gamma_units: None,
                    },
                    Step::Dispersive(d) => StepRecord {
                        kind: StepKind::Dispersive,
                        stage: s.stage,
                        target: None,
                        levels: None,
                        theta_over_pi: None,
                        duration_gamma_units: Some(d.gamma_t_over_pi),
                    },
                })
                .collect(),
        };
        toml::to_string(&rec).expect("schedule records always serialize")
    }

    pub fn from_toml_str(text: &str) -> Result<GateSchedule, ProtocolError> {
        let rec: ScheduleRecord = toml::from_str(text).map_err(|e| ProtocolError::Parse(e.to_string()))?;
        if rec.step.is_empty() {
            return Err(ProtocolError::Parse("schedule has no steps".into()));
        }
        let mut steps = Vec::with_capacity(rec.step.len());
        let mut last_stage = 0;
        for (k, r) in rec.step.into_iter().enumerate() {
            let bad = |what: &str| ProtocolError::Parse(format!("step {}: {what}", k + 1));
            if r.stage == 0 || r.stage < last_stage {
                return Err(bad("stages must start at 1 and never decrease"));
            }
            last_stage = r.stage;
            let step = match r.kind {
                StepKind::Ara => {
                    if r.duration_gamma_units.is_some() {
                        return Err(bad("ara steps take no duration_gamma_units"));
                    }
                    let theta = r.theta_over_pi.ok_or_else(|| bad("missing theta_over_pi"))?;
                    if !theta.is_finite() {
                        return Err(bad("theta_over_pi must be finite"));
                    }
                    Step::Ara(AraStep {
                        target: r.target.ok_or_else(|| bad("missing target"))?,
                        transition: r.levels.ok_or_else(|| bad("missing levels"))?,
                        theta_over_pi: theta,
                    })
                }
                StepKind::Dispersive => {
                    if r.target.is_some() || r.levels.is_some() || r.theta_over_pi.is_some() {
                        return Err(bad("dispersive steps take only duration_gamma_units"));
                    }
                    let d = r.duration_gamma_units.ok_or_else(|| bad("missing duration_gamma_units"))?;
                    if !(d > 0.0 && d.is_finite()) {
                        return Err(bad("duration_gamma_units must be positive"));
                    }
                    Step::Dispersive(DispersiveStep { gamma_t_over_pi: d })
                }
            };
            steps.push(ScheduledStep { stage: r.stage, step });
        }
        Ok(GateSchedule {
            name: rec.name,
            steps,
            ideal_unitary: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ket(a: usize, b: usize) -> StateVector {
        StateVector::basis(&[3, 3], &[a, b]).unwrap()
    }

    fn close(a: &StateVector, b: &StateVector) -> bool {
        a.max_abs_diff(b).unwrap() < 1e-12
    }

    #[test]
    fn rotation_examples() {
        let i = C64::new(0.0, 1.0);
        let s = |k: usize| StateVector::basis(&[3], &[k]).unwrap();
        let r = rotation_map(Transition::ZeroTwo, PI);
        assert!(close3(&s(0).apply(&r).unwrap(), &s(2).scaled(-i)));
        let r = rotation_map(Transition::OneTwo, 3.0 * PI);
        assert!(close3(&s(2).apply(&r).unwrap(), &s(1).scaled(i)));
        let r = rotation_map(Transition::OneTwo, 2.0 * PI);
        assert!(close3(&s(2).apply(&r).unwrap(), &s(2).scaled(C64::new(-1.0, 0.0))));
        assert!(close3(&s(0).apply(&r).unwrap(), &s(0)));
    }

    fn close3(a: &StateVector, b: &StateVector) -> bool {
        a.max_abs_diff(b).unwrap() < 1e-15
    }

    #[test]
    fn dispersive_map_anchors() {
        let g = 3.0e6;
        let u = dispersive_map(g, PI / g);
        assert!(close(&ket(2, 1).apply(&u).unwrap(), &ket(2, 1).scaled(C64::new(-1.0, 0.0))));
        let u = dispersive_map(g, PI / (2.0 * g));
        assert!(close(&ket(2, 0).apply(&u).unwrap(), &ket(0, 2).scaled(C64::new(-1.0, 0.0))));
        for t in [0.1, 1.7, 44.0] {
            let u = dispersive_map(g, t / g);
            assert!(close(&ket(0, 0).apply(&u).unwrap(), &ket(0, 0)));
            assert!(close(&ket(0, 1).apply(&u).unwrap(), &ket(0, 1)));
            assert!(u.unitarity_defect() < 1e-14);
        }
    }

    #[test]
    fn cps_truth_table_analytic() {
        let s = schedule_cps();
        for (a, b, sign) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
            let r = execute(&s, &ket(a, b), &Backend::Analytic).unwrap();
            assert!(close(&r.final_state, &ket(a, b).scaled(C64::new(sign, 0.0))), "|{a}{b}⟩");
            assert_eq!(r.stage_states.len(), 3);
        }
    }

    #[test]
    fn unbound_parameters_reported() {
        let b = Backend::Dispersive(DispersiveBinding {
            gamma: None,
            rabi: RabiSet::uniform(1e8),
        });
        let err = execute(&schedule_cps(), &ket(1, 1), &b).unwrap_err();
        assert_eq!(err, ProtocolError::Unbound("gamma".into()));
        let b = Backend::Dispersive(DispersiveBinding {
            gamma: Some(1e6),
            rabi: RabiSet::default(),
        });
        assert!(matches!(
            execute(&schedule_cps(), &ket(1, 1), &b),
            Err(ProtocolError::Unbound(_))
        ));
    }

    #[test]
    fn schedule_text_roundtrip() {
        for name in SCHEDULE_NAMES {
            let s = schedule_by_name(name).unwrap();
            let text = s.to_toml_string();
            assert!(text.contains("duration_gamma_units"));
            assert_eq!(GateSchedule::from_toml_str(&text).unwrap(), s);
        }
        assert!(schedule_by_name("cnot").is_err());
    }

    #[test]
    fn malformed_schedule_rejected() {
        let text = "name = \"x\"\n[[step]]\nkind = \"ara\"\nstage = 1\ntarget = \"a\"\nlevels = \"1-2\"\n";
        assert!(GateSchedule::from_toml_str(text).is_err());
        let text = "name = \"x\"\n[[step]]\nkind = \"dispersive\"\nstage = 1\nduration_gamma_units = 1.0\nbogus = 2\n";
        assert!(GateSchedule::from_toml_str(text).is_err());
    }
}
