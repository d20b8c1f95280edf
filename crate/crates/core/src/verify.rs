// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Fidelities, entanglement, truth tables and approximation-error scans.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::{evolve_timedep, evolve_timedep_observed, max_step, DynamicsError, STEPS_PER_PERIOD};
use crate::hamiltonians::Transition;
use crate::hamiltonians::{
    h_eff_vacuum, h_int_full_interaction_picture, h_int_rwa, CavityMode, CouplingSet, HamiltonianError, TwoSquidCavity,
};
use crate::hilbert::{fidelity_up_to_global_phase, HilbertError, Operator, SpectralDecomposition, StateVector, C64};
use crate::protocols::{execute, rotation_map, Backend, CavityBinding, GateSchedule, ProtocolError};
use crate::squid::LevelStructure;
use crate::units::HbarConvention;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("operator is not unitary (max |U†U − I| = {0:e})")]
    NotUnitary(f64),
    #[error("state has population {0:e} outside the qubit levels")]
    Leakage(f64),
    #[error("no truth table for schedule {0:?}")]
    NoTable(String),
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("non-finite fidelity")]
    NonFinite,
}

/// 1 − F, rejecting NaN rather than letting a clamp hide it.
fn infidelity(f: f64) -> Result<f64, VerifyError> {
    if f.is_finite() {
        Ok((1.0 - f).max(0.0))
    } else {
        Err(VerifyError::NonFinite)
    }
}

/// Unitarity tolerance for [`gate_fidelity`].
pub const UNITARITY_TOL: f64 = 1e-8;

/// |Tr(U_ideal† U_sim)|² / d², insensitive to a global phase of either argument.
pub fn gate_fidelity(u_sim: &Operator, u_ideal: &Operator) -> Result<f64, VerifyError> {
    for u in [u_sim, u_ideal] {
        let d = u.unitarity_defect();
        if d > UNITARITY_TOL {
            return Err(VerifyError::NotUnitary(d));
        }
    }
    if u_sim.dims() != u_ideal.dims() {
        return Err(HilbertError::Incompatible(u_sim.dims().to_vec(), u_ideal.dims().to_vec()).into());
    }
    Ok(overlap_fidelity(u_sim.entries(), u_ideal.entries()))
}

fn overlap_fidelity(sim: &DMatrix<C64>, ideal: &DMatrix<C64>) -> f64 {
    let d = ideal.nrows() as f64;
    let tr: C64 = (ideal.adjoint() * sim).trace();
    // NaN passes through the clamp untouched.
    (tr.norm_sqr() / (d * d)).clamp(0.0, 1.0)
}

/// Flat indices of |00⟩, |01⟩, |10⟩, |11⟩ inside the two-SQUID space.
pub const QUBIT_INDICES: [usize; 4] = [0, 1, 3, 4];

/// Restriction of a `[3, 3]` operator to the two-qubit block.
pub fn computational_block(u: &Operator) -> Result<Operator, VerifyError> {
    if u.dims() != [3, 3] {
        return Err(HilbertError::Incompatible(u.dims().to_vec(), vec![3, 3]).into());
    }
    let m = DMatrix::from_fn(4, 4, |r, c| u.get(QUBIT_INDICES[r], QUBIT_INDICES[c]));
    Ok(Operator::new(m, vec![2, 2])?)
}

/// [`gate_fidelity`] of the two-qubit block of a `[3, 3]` propagator.
pub fn subspace_gate_fidelity(u: &Operator, ideal: &Operator) -> Result<f64, VerifyError> {
    gate_fidelity(&computational_block(u)?, ideal)
}

/// Entrywise distance after removing the best global phase.
pub fn phase_aligned_distance(u: &Operator, ideal: &Operator) -> Result<f64, VerifyError> {
    let tr: C64 = (ideal.entries().adjoint() * u.entries()).trace();
    let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    Ok(u.scaled_complex(phase.conj()).max_abs_diff(ideal)?)
}

/// Qubit amplitudes (a, b, c, d) of a two-SQUID or two-qubit state.
fn qubit_amplitudes(psi: &StateVector) -> Result<[C64; 4], VerifyError> {
    let amps = psi.amplitudes();
    match psi.dims() {
        [2, 2] => Ok([amps[0], amps[1], amps[2], amps[3]]),
        [3, 3] => {
            let leak: f64 = (0..9)
                .filter(|k| !QUBIT_INDICES.contains(k))
                .map(|k| amps[k].norm_sqr())
                .sum();
            if leak > 1e-10 {
                return Err(VerifyError::Leakage(leak));
            }
            Ok(QUBIT_INDICES.map(|k| amps[k]))
        }
        other => Err(HilbertError::Incompatible(other.to_vec(), vec![2, 2]).into()),
    }
}

/// Pure-state concurrence 2|ad − bc|.
pub fn concurrence(psi: &StateVector) -> Result<f64, VerifyError> {
    let [a, b, c, d] = qubit_amplitudes(psi)?;
    Ok((2.0 * (a * d - b * c).norm()).clamp(0.0, 1.0))
}

/// Vacuum component of a `[3, 3, N]` state as an (unnormalized) `[3, 3]` state.
pub fn vacuum_component(psi: &StateVector) -> Result<StateVector, VerifyError> {
    let dims = psi.dims();
    if dims.len() != 3 {
        return Err(HilbertError::Incompatible(dims.to_vec(), vec![3, 3, 0]).into());
    }
    let n = dims[2];
    let v = nalgebra::DVector::from_fn(dims[0] * dims[1], |k, _| psi.amplitudes()[k * n]);
    Ok(StateVector::new(v, dims[..2].to_vec())?)
}

/// Expected states of one input after each stage of a schedule.
#[derive(Debug, Clone)]
pub struct TruthRow {
    pub input: [usize; 2],
    /// One entry per stage, with exact phases; the last is the output.
    pub columns: Vec<StateVector>,
}

#[derive(Debug, Clone)]
pub struct TruthTable {
    pub schedule: String,
    pub rows: Vec<TruthRow>,
}

fn term(re: f64, im: f64, a: usize, b: usize) -> (C64, [usize; 2]) {
    (C64::new(re, im), [a, b])
}

fn state(terms: &[(C64, [usize; 2])]) -> StateVector {
    let mut v = nalgebra::DVector::zeros(9);
    for (c, [a, b]) in terms {
        v[a * 3 + b] += *c;
    }
    StateVector::new(v, vec![3, 3]).expect("9 amplitudes")
}

fn row(input: [usize; 2], columns: Vec<Vec<(C64, [usize; 2])>>) -> TruthRow {
    TruthRow {
        input,
        columns: columns.iter().map(|c| state(c)).collect(),
    }
}

/// The stage-by-stage tables for the shipped schedules.
pub fn truth_table(schedule: &str) -> Result<TruthTable, VerifyError> {
    let s = FRAC_1_SQRT_2;
    let rows = match schedule {
        "cps" => vec![
            row([0, 0], vec![vec![term(1., 0., 0, 0)]; 3]),
            row([0, 1], vec![vec![term(1., 0., 0, 1)]; 3]),
            row(
                [1, 0],
                vec![vec![term(0., -1., 2, 0)], vec![term(0., -1., 2, 0)], vec![term(1., 0., 1, 0)]],
            ),
            row(
                [1, 1],
                vec![vec![term(0., -1., 2, 1)], vec![term(0., 1., 2, 1)], vec![term(-1., 0., 1, 1)]],
            ),
        ],
        "swap" => vec![
            row([0, 0], vec![vec![term(1., 0., 0, 0)]; 5]),
            row(
                [0, 1],
                vec![
                    vec![term(0., -1., 0, 2)],
                    vec![term(0., 1., 2, 0)],
                    vec![term(0., -1., 2, 0)],
                    vec![term(0., -1., 2, 0)],
                    vec![term(1., 0., 1, 0)],
                ],
            ),
            row(
                [1, 0],
                vec![
                    vec![term(0., -1., 2, 0)],
                    vec![term(0., 1., 0, 2)],
                    vec![term(1., 0., 0, 1)],
                    vec![term(1., 0., 0, 1)],
                    vec![term(1., 0., 0, 1)],
                ],
            ),
            row(
                [1, 1],
                vec![
                    vec![term(-1., 0., 2, 2)],
                    vec![term(1., 0., 2, 2)],
                    vec![term(0., 1., 2, 1)],
                    vec![term(0., -1., 2, 1)],
                    vec![term(1., 0., 1, 1)],
                ],
            ),
        ],
        "transfer" => vec![
            row([0, 0], vec![vec![term(1., 0., 0, 0)]; 3]),
            row(
                [1, 0],
                vec![vec![term(0., -1., 2, 0)], vec![term(0., 1., 0, 2)], vec![term(1., 0., 0, 1)]],
            ),
        ],
        "entangle" => {
            // The dispersive stage carries a common factor e^{−iπ/4}.
            let p = C64::from_polar(1.0, -PI / 4.0);
            let scaled = |terms: Vec<(C64, [usize; 2])>| terms.into_iter().map(|(c, l)| (c * p, l)).collect::<Vec<_>>();
            vec![row(
                [0, 0],
                vec![
                    vec![term(0., -1., 2, 0)],
                    scaled(vec![term(-s, 0., 0, 2), term(0., -s, 2, 0)]),
                    scaled(vec![term(0., s, 0, 1), term(-s, 0., 1, 0)]),
                ],
            )]
        }
        other => return Err(VerifyError::NoTable(other.to_string())),
    };
    Ok(TruthTable {
        schedule: schedule.to_string(),
        rows,
    })
}

/// Outcome of one (input, stage) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub input: [usize; 2],
    pub stage: usize,
    /// Largest amplitude error, phases included.
    pub max_error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthTableReport {
    pub cells: Vec<CellReport>,
    pub passed: bool,
}

impl TruthTableReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter(|c| !c.passed)
    }
}

/// Phase-exact tolerance for truth-table cells.
pub const TRUTH_TABLE_TOL: f64 = 1e-9;

/// Runs every row through `s` and compares every stage amplitude-by-amplitude.
///
/// With the explicit-cavity backend the vacuum component is compared.
pub fn check_truth_table(s: &GateSchedule, t: &TruthTable, backend: &Backend) -> Result<TruthTableReport, VerifyError> {
    let mut cells = Vec::new();
    for r in &t.rows {
        let psi0 = StateVector::basis(&[3, 3], &r.input)?;
        let run = execute(s, &psi0, backend)?;
        if run.stage_states.len() != r.columns.len() {
            return Err(VerifyError::InvalidScan(format!(
                "table has {} columns but schedule {} has {} stages",
                r.columns.len(),
                s.name,
                run.stage_states.len()
            )));
        }
        for (k, (got, want)) in run.stage_states.iter().zip(&r.columns).enumerate() {
            let got = if got.dims().len() == 3 {
                vacuum_component(got)?
            } else {
                got.clone()
            };
            let err = got.max_abs_diff(want)?;
            cells.push(CellReport {
                input: r.input,
                stage: k + 1,
                max_error: err,
                passed: err <= TRUTH_TABLE_TOL,
            });
        }
    }
    let passed = cells.iter().all(|c| c.passed);
    Ok(TruthTableReport { cells, passed })
}

/// Gate fidelity of a schedule under the explicit-cavity backend.
///
/// The two-qubit block of the vacuum-projected map is generally not unitary
/// (population leaks into photons and level |2⟩), so the trace overlap is
/// taken directly: |Tr(U_ideal† M)|²/16.
pub fn cavity_gate_fidelity(s: &GateSchedule, binding: &CavityBinding) -> Result<(f64, f64), VerifyError> {
    let ideal = s
        .ideal_unitary
        .as_ref()
        .ok_or_else(|| VerifyError::NoTable(format!("{} has no ideal unitary", s.name)))?;
    let mut m = DMatrix::<C64>::zeros(4, 4);
    let mut peak: f64 = 0.0;
    for (c, &k) in QUBIT_INDICES.iter().enumerate() {
        let psi0 = StateVector::basis(&[3, 3], &[k / 3, k % 3])?;
        let run = execute(s, &psi0, &Backend::Cavity(*binding))?;
        peak = peak.max(run.peak_photon_population);
        let v = vacuum_component(&run.final_state)?;
        for (r, &j) in QUBIT_INDICES.iter().enumerate() {
            m[(r, c)] = v.amplitudes()[j];
        }
    }
    Ok((overlap_fidelity(&m, ideal.entries()), peak))
}

/// One evaluated scan point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub parameter: f64,
    /// 1 − fidelity, or `None` when the point could not be evaluated.
    pub error: Option<f64>,
    pub peak_photon_population: Option<f64>,
    /// Failure message or remark (e.g. an enlarged Fock cutoff).
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Column header for the swept parameter.
    pub parameter_name: String,
    /// Points in ascending parameter order.
    pub points: Vec<ScanPoint>,
    /// Errors never increase as the parameter decreases (all points evaluated).
    pub monotone: bool,
}

impl ScanResult {
    fn new(parameter_name: &str, mut points: Vec<ScanPoint>) -> Self {
        points.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
        let errors: Option<Vec<f64>> = points.iter().map(|p| p.error).collect();
        let monotone = match errors {
            Some(e) => e.windows(2).all(|w| w[0] <= w[1]),
            None => false,
        };
        ScanResult {
            parameter_name: parameter_name.to_string(),
            points,
            monotone,
        }
    }

    /// error(p_{k+1}) / error(p_k) for consecutive points.
    pub fn reduction_factors(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| match (w[0].error, w[1].error) {
                (Some(lo), Some(hi)) => hi / lo,
                _ => f64::NAN,
            })
            .collect()
    }

    pub fn error_at(&self, parameter: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.parameter - parameter).abs() <= 1e-12 * parameter.abs())
            .and_then(|p| p.error)
    }
}

/// Settings of [`rwa_error_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct RwaScanConfig {
    /// Δ/ω_c values.
    pub ratios: Vec<f64>,
    /// g₀₂ (rad/s).
    pub g02: f64,
    /// Δ = ω_c − ω₂₀ (rad/s), held fixed while ω_c varies.
    pub detuning: f64,
    pub fock_cutoff: usize,
}

impl Default for RwaScanConfig {
    fn default() -> Self {
        RwaScanConfig {
            ratios: vec![5e-3, 2.5e-3, 1.25e-3],
            g02: 2.0 * PI * 20e6,
            detuning: 2.0 * PI * 0.1e9,
            fock_cutoff: 4,
        }
    }
}

/// One RWA comparison: full versus rotating-wave interaction picture.
fn rwa_point(ratio: f64, cfg: &RwaScanConfig) -> Result<(f64, f64), VerifyError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(VerifyError::InvalidScan(format!("ratio {ratio} outside (0, 1)")));
    }
    let omega_c = cfg.detuning / ratio;
    let omega_20 = omega_c - cfg.detuning;
    let ls = LevelStructure::from_frequencies(&[0.0, omega_20 / 16.0, omega_20])
        .map_err(|e| VerifyError::InvalidScan(e.to_string()))?;
    let mode = CavityMode::new(omega_c, cfg.fock_cutoff, 0.0)?;
    let cs = CouplingSet::from_g02(cfg.g02);
    let full = h_int_full_interaction_picture(&cs, &ls, &mode)?;
    let rwa = h_int_rwa(&cs, &ls, &mode)?.hamiltonian;

    let dims = [3, cfg.fock_cutoff];
    let a = C64::new(FRAC_1_SQRT_2, 0.0);
    let probe = StateVector::superposition(&dims, &[(a, &[0, 0]), (a, &[2, 0])])?;
    let period = 2.0 * PI / (cfg.detuning * cfg.detuning + 4.0 * cfg.g02 * cfg.g02).sqrt();
    // The largest admissible step: 1/20 of the sum-frequency period (or of
    // the probe window when nothing oscillates).
    let dt = max_step(&full).min(period / STEPS_PER_PERIOD);

    let n_op = Operator::embed(
        &crate::hamiltonians::annihilation(cfg.fock_cutoff)
            .adjoint()
            .mul(&crate::hamiltonians::annihilation(cfg.fock_cutoff))?,
        1,
        &dims,
    )?;
    let mut peak: f64 = 0.0;
    let full_run = evolve_timedep_observed(&full, 0.0, period, dt, &probe, |_, psi| {
        if let Ok(n) = psi.expectation(&n_op) {
            peak = peak.max(n.re);
        }
    })?;
    let rwa_run = evolve_timedep(&rwa, 0.0, period, dt, &probe)?;
    let f = fidelity_up_to_global_phase(&full_run.final_state, &rwa_run.final_state)?;
    Ok((infidelity(f)?, peak))
}

/// Full (co- and counter-rotating) versus RWA propagation of
/// (|0⟩ + |2⟩)/√2 ⊗ |vac⟩ over one vacuum Rabi period, per Δ/ω_c.
///
/// Points run on the current rayon pool; failures are recorded per point.
pub fn rwa_error_scan(cfg: &RwaScanConfig) -> Result<ScanResult, VerifyError> {
    if cfg.ratios.is_empty() {
        return Err(VerifyError::InvalidScan("empty ratio grid".into()));
    }
    let points = cfg
        .ratios
        .par_iter()
        .map(|&r| match rwa_point(r, cfg) {
            Ok((e, peak)) => ScanPoint {
                parameter: r,
                error: Some(e),
                peak_photon_population: Some(peak),
                note: None,
            },
            Err(e) => ScanPoint {
                parameter: r,
                error: None,
                peak_photon_population: None,
                note: Some(e.to_string()),
            },
        })
        .collect();
    Ok(ScanResult::new("delta_over_omega_c", points))
}

/// Settings of [`dispersive_error_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveScanConfig {
    /// g₀₂/Δ values.
    pub ratios: Vec<f64>,
    /// Δ (rad/s).
    pub detuning: f64,
    pub fock_cutoff: usize,
    /// Largest cutoff tried when the top Fock level gets populated.
    pub max_fock_cutoff: usize,
    pub samples_per_period: usize,
}

/// Top-Fock population that forces a rerun with a larger cutoff.
pub const FOCK_TOP_LIMIT: f64 = 1e-6;

impl Default for DispersiveScanConfig {
    fn default() -> Self {
        DispersiveScanConfig {
            ratios: vec![0.025, 0.05, 0.1],
            detuning: 2.0 * PI * 0.1e9,
            fock_cutoff: 4,
            max_fock_cutoff: 12,
            samples_per_period: 32,
        }
    }
}

/// Outcome of one explicit-versus-effective comparison of the CPS dispersive segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersivePoint {
    pub error: f64,
    pub peak_photon_population: f64,
    pub top_fock_population: f64,
    pub fock_cutoff: usize,
}

/// The CPS dispersive segment (t = π/γ) from each of its four possible
/// inputs, under the explicit cavity model and under the vacuum effective
/// Hamiltonian; error is the worst 1 − fidelity.
pub fn dispersive_point(
    ratio: f64,
    detuning: f64,
    fock_cutoff: usize,
    samples_per_period: usize,
) -> Result<DispersivePoint, VerifyError> {
    if !(ratio > 0.0 && ratio < 0.2) {
        return Err(VerifyError::InvalidScan(format!("g/Δ = {ratio} outside (0, 0.2)")));
    }
    let g02 = ratio * detuning;
    let model = TwoSquidCavity::for_detuning(g02, detuning, fock_cutoff);
    let sd = SpectralDecomposition::new(&model.rotating_frame()?, HbarConvention::AngularFrequency)?;
    let n_op = model.photon_number()?;
    let gamma = g02 * g02 / detuning;
    let t = PI / gamma;
    let effective = SpectralDecomposition::new(&h_eff_vacuum(gamma), HbarConvention::AngularFrequency)?.propagator(t);
    let samples = ((t / (2.0 * PI / detuning)) * samples_per_period as f64).ceil() as usize;
    let vac = StateVector::basis(&[fock_cutoff], &[0])?;
    // Stage-one images of the qubit basis under the CPS schedule.
    let r = rotation_map(Transition::OneTwo, PI);
    let pre = Operator::embed(&r, 0, &[3, 3])?;

    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    let mut top: f64 = 0.0;
    for &k in &QUBIT_INDICES {
        let input = StateVector::basis(&[3, 3], &[k / 3, k % 3])?.apply(&pre)?;
        let start = input.tensor(&vac)?;
        let coords = sd.to_eigenbasis(&start)?;
        for s in 1..=samples {
            let psi = sd.evolve_coordinates(&coords, t * s as f64 / samples as f64);
            peak = peak.max(psi.expectation(&n_op)?.re);
            let p_top: f64 = psi
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(j, _)| j % fock_cutoff == fock_cutoff - 1)
                .map(|(_, z)| z.norm_sqr())
                .sum();
            top = top.max(p_top);
        }
        let explicit = sd.evolve_coordinates(&coords, t);
        let ideal = input.apply(&effective)?.tensor(&vac)?;
        let f = fidelity_up_to_global_phase(&ideal, &explicit)?;
        worst = worst.max(infidelity(f)?);
    }
    Ok(DispersivePoint {
        error: worst,
        peak_photon_population: peak,
        top_fock_population: top,
        fock_cutoff,
    })
}

fn dispersive_point_checked(ratio: f64, cfg: &DispersiveScanConfig) -> ScanPoint {
    let mut n = cfg.fock_cutoff;
    let mut note = None;
    loop {
        match dispersive_point(ratio, cfg.detuning, n, cfg.samples_per_period) {
            Ok(p) if p.top_fock_population >= FOCK_TOP_LIMIT && n + 2 <= cfg.max_fock_cutoff => {
                note = Some(format!(
                    "top Fock population {:.2e} at N={n}; rerun with N={}",
                    p.top_fock_population,
                    n + 2
                ));
                n += 2;
            }
            Ok(p) => {
                if p.top_fock_population >= FOCK_TOP_LIMIT {
                    note = Some(format!("top Fock population {:.2e} at maximum N={n}", p.top_fock_population));
                }
                return ScanPoint {
                    parameter: ratio,
                    error: Some(p.error),
                    peak_photon_population: Some(p.peak_photon_population),
                    note,
                };
            }
            Err(e) => {
                return ScanPoint {
                    parameter: ratio,
                    error: None,
                    peak_photon_population: None,
                    note: Some(e.to_string()),
                }
            }
        }
    }
}

/// Explicit-cavity versus effective-Hamiltonian error of the CPS dispersive
/// segment, per g₀₂/Δ.
pub fn dispersive_error_scan(cfg: &DispersiveScanConfig) -> Result<ScanResult, VerifyError> {
    if cfg.ratios.is_empty() {
        return Err(VerifyError::InvalidScan("empty ratio grid".into()));
    }
    let points = cfg.ratios.par_iter().map(|&r| dispersive_point_checked(r, cfg)).collect();
    Ok(ScanResult::new("g02_over_delta", points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{schedule_by_name, schedule_cps, SCHEDULE_NAMES};

    #[test]
    fn gate_fidelity_examples() {
        let id = Operator::identity(&[2, 2]).unwrap();
        let cz = Operator::diagonal(&[1.0, 1.0, 1.0, -1.0], vec![2, 2]).unwrap();
        assert!((gate_fidelity(&cz, &cz).unwrap() - 1.0).abs() < 1e-15);
        let shifted = cz.scaled_complex(C64::from_polar(1.0, 0.7));
        assert!((gate_fidelity(&shifted, &cz).unwrap() - 1.0).abs() < 1e-15);
        assert!((gate_fidelity(&id, &cz).unwrap() - 0.25).abs() < 1e-15);
        let bad = id.scaled(1.1);
        assert!(matches!(gate_fidelity(&bad, &cz), Err(VerifyError::NotUnitary(_))));
    }

    #[test]
    fn concurrence_examples() {
        let prod = StateVector::basis(&[2, 2], &[0, 1]).unwrap();
        assert!(concurrence(&prod).unwrap() < 1e-15);
        let th = PI / 8.0;
        let s = StateVector::superposition(
            &[2, 2],
            &[(C64::new(th.cos(), 0.0), &[0, 0]), (C64::new(th.sin(), 0.0), &[1, 1])],
        )
        .unwrap();
        assert!((concurrence(&s).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        let leaky = StateVector::basis(&[3, 3], &[2, 0]).unwrap();
        assert!(matches!(concurrence(&leaky), Err(VerifyError::Leakage(_))));
    }

    #[test]
    fn shipped_tables_pass_analytically() {
        for name in SCHEDULE_NAMES {
            let s = schedule_by_name(name).unwrap();
            let t = truth_table(name).unwrap();
            let r = check_truth_table(&s, &t, &Backend::Analytic).unwrap();
            assert!(r.passed, "{name}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn corrupted_schedule_fails_last_row() {
        let mut s = schedule_cps();
        if let crate::protocols::Step::Ara(a) = &mut s.steps[0].step {
            a.theta_over_pi = 0.9;
        }
        let r = check_truth_table(&s, &truth_table("cps").unwrap(), &Backend::Analytic).unwrap();
        assert!(!r.passed);
        assert!(r.failures().any(|c| c.input == [1, 1] && c.stage == 3 && c.max_error > 1e-3));
        assert!(r.failures().all(|c| c.input[0] == 1));
    }

    #[test]
    fn phase_blind_table_is_rejected() {
        // The identity has unit fidelity to every CPS row up to phase, but must fail.
        let t = truth_table("cps").unwrap();
        let id = GateSchedule {
            name: "id".into(),
            steps: vec![
                crate::protocols::ScheduledStep {
                    stage: 1,
                    step: crate::protocols::Step::Dispersive(crate::protocols::DispersiveStep { gamma_t_over_pi: 2.0 }),
                },
                crate::protocols::ScheduledStep {
                    stage: 2,
                    step: crate::protocols::Step::Dispersive(crate::protocols::DispersiveStep { gamma_t_over_pi: 2.0 }),
                },
                crate::protocols::ScheduledStep {
                    stage: 3,
                    step: crate::protocols::Step::Dispersive(crate::protocols::DispersiveStep { gamma_t_over_pi: 2.0 }),
                },
            ],
            ideal_unitary: None,
        };
        let r = check_truth_table(&id, &t, &Backend::Analytic).unwrap();
        assert!(r.cells.iter().any(|c| c.input == [1, 1] && c.stage == 3 && !c.passed));
    }

    #[test]
    fn scan_summary() {
        let r = ScanResult::new(
            "g02_over_delta",
            vec![
                ScanPoint {
                    parameter: 0.1,
                    error: Some(4e-3),
                    peak_photon_population: Some(0.02),
                    note: None,
                },
                ScanPoint {
                    parameter: 0.05,
                    error: Some(1e-3),
                    peak_photon_population: Some(0.005),
                    note: None,
                },
            ],
        );
        assert!(r.monotone);
        assert!((r.reduction_factors()[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_coupling_gives_no_rwa_error() {
        let cfg = RwaScanConfig {
            ratios: vec![0.05],
            g02: 0.0,
            ..Default::default()
        };
        let r = rwa_error_scan(&cfg).unwrap();
        assert!(r.points[0].error.unwrap() < 1e-12);
    }
}
