// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! The four subcommands. Each writes delimited tables whose first line is
//! `# cqed <command> config=<hash>`; timing and thread counts go to run.log
//! only, so identical scenarios give byte-identical tables.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use cqed_core::feasibility::{assess_with_margin, gate_time_estimate, FeasibilityInput};
use cqed_core::hilbert::{fidelity_up_to_global_phase, multi_index};
use cqed_core::protocols::{execute, schedule_cps, schedule_propagator, Backend};
use cqed_core::squid::{lambda_check, solve, SpectrumError};
use cqed_core::units::{FLUX_QUANTUM, PLANCK};
use cqed_core::verify::{
    cavity_gate_fidelity, check_truth_table, concurrence, dispersive_error_scan, rwa_error_scan, subspace_gate_fidelity,
    truth_table, vacuum_component, DispersiveScanConfig, RwaScanConfig, ScanResult, VerifyError, QUBIT_INDICES,
};
use cqed_core::{StateVector, C64};

use crate::config::{BackendKind, ScanKind, ScenarioConfig};
use crate::CliError;

pub struct Context<'a> {
    command: &'static str,
    cfg: &'a ScenarioConfig,
    out: &'a Path,
    workers: usize,
    hash: String,
    started: Instant,
    files: Mutex<Vec<String>>,
}

impl<'a> Context<'a> {
    pub fn new(command: &'static str, cfg: &'a ScenarioConfig, out: &'a Path, workers: usize) -> Self {
        let digest = Sha256::digest(cfg.canonical().as_bytes());
        Context {
            command,
            cfg,
            out,
            workers,
            hash: hex::encode(digest)[..16].to_string(),
            started: Instant::now(),
            files: Mutex::new(Vec::new()),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        self.files.lock().expect("unpoisoned").push(name.to_string());
        Ok(())
    }

    /// Header comment, column row, data rows and optional trailing comments.
    fn table(&self, name: &str, columns: &[&str], rows: &[Vec<String>], footer: &[String]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Io {
            path: self.path(name),
            source: std::io::Error::other(e),
        };
        w.write_record(columns).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io {
            path: self.path(name),
            source: std::io::Error::other(e.to_string()),
        })?;
        let mut text = format!("# cqed {} config={}\n", self.command, self.hash);
        text.push_str(&String::from_utf8(body).expect("csv of utf-8 fields"));
        for f in footer {
            text.push_str(&format!("# {f}\n"));
        }
        self.write(name, &text)
    }

    /// Run metadata, kept apart from the data tables.
    pub fn write_log(&self, result: &Result<(), CliError>) -> Result<(), CliError> {
        let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let status = match result {
            Ok(()) => "ok".to_string(),
            Err(e) => format!("error: {e}"),
        };
        let text = format!(
            "command = {}\nconfig_sha256_prefix = {}\nfinished_unix_s = {unix}\nelapsed_s = {:.3}\nworkers = {}\nfiles = {}\nstatus = {status}\n",
            self.command,
            self.hash,
            self.started.elapsed().as_secs_f64(),
            self.workers,
            self.files.lock().expect("unpoisoned").join(","),
        );
        let path = self.path("run.log");
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn fixed9(x: f64) -> String {
    format!("{x:.9}")
}

fn physics(e: VerifyError) -> CliError {
    CliError::Physics(e.to_string())
}

pub fn spectrum(ctx: &Context) -> Result<(), CliError> {
    let (params, grid, n) = ctx.cfg.squid()?;
    let ls = solve(&params, &grid, n).map_err(|e| match e {
        SpectrumError::InvalidParams(_) | SpectrumError::InvalidGrid(_) | SpectrumError::LevelCount { .. } => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Physics(other.to_string()),
    })?;
    let e = ls.energies();
    let rows: Vec<Vec<String>> = (0..ls.n_levels())
        .map(|k| {
            let spacing = if k == 0 {
                String::new()
            } else {
                num((e[k] - e[k - 1]) / PLANCK / 1e9)
            };
            vec![
                k.to_string(),
                num(e[k]),
                num(ls.omega(k, 0)),
                num(ls.omega(k, 0) / (2.0 * PI) / 1e9),
                spacing,
            ]
        })
        .collect();
    ctx.table(
        "spectrum_levels.csv",
        &[
            "level",
            "energy_J",
            "omega_from_ground_radps",
            "freq_from_ground_GHz",
            "spacing_GHz",
        ],
        &rows,
        &[],
    )?;

    let mut flux = Vec::new();
    for i in 0..ls.n_levels() {
        for j in i..ls.n_levels() {
            flux.push(vec![i.to_string(), j.to_string(), num(ls.flux(i, j) / FLUX_QUANTUM)]);
        }
    }
    ctx.table("spectrum_flux.csv", &["i", "j", "flux_element_over_Phi0"], &flux, &[])?;

    let lambda = lambda_check(&ls);
    ctx.table(
        "spectrum_lambda.csv",
        &["is_lambda", "omega20_over_omega10", "omega21_over_omega10", "reasons"],
        &[vec![
            lambda.is_lambda.to_string(),
            num(lambda.ratio_20_10),
            num(lambda.ratio_21_10),
            lambda.reasons.join("; "),
        ]],
        &[],
    )
}

fn label(dims: &[usize], flat: usize) -> String {
    let l = multi_index(dims, flat);
    match l.as_slice() {
        [a, b] => format!("{a}{b}"),
        [a, b, n] => format!("{a}{b}:{n}"),
        other => format!("{other:?}"),
    }
}

/// Normalized two-qubit part of a (vacuum-projected) two-SQUID state.
fn qubit_projection(psi: &StateVector) -> Result<StateVector, CliError> {
    let labels: Vec<[usize; 2]> = QUBIT_INDICES.iter().map(|&k| [k / 3, k % 3]).collect();
    let terms: Vec<(C64, &[usize])> = QUBIT_INDICES
        .iter()
        .zip(&labels)
        .map(|(&k, l)| (psi.amplitudes()[k], &l[..]))
        .collect();
    StateVector::superposition(&[2, 2], &terms).map_err(|e| CliError::Physics(e.to_string()))
}

pub fn gate(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let s = cfg.schedule()?;
    let backend = cfg.backend()?;
    let kind = cfg.backend_kind();
    let table = truth_table(&s.name).map_err(physics)?;
    let report = check_truth_table(&s, &table, &backend).map_err(physics)?;

    let mut state_rows = Vec::new();
    let mut row_rows = Vec::new();
    let mut worst_row: f64 = 1.0;
    let mut entangled = None;
    for r in &table.rows {
        let psi0 = StateVector::basis(&[3, 3], &r.input).map_err(|e| CliError::Physics(e.to_string()))?;
        let run = execute(&s, &psi0, &backend).map_err(|e| CliError::Physics(e.to_string()))?;
        let input = format!("{}{}", r.input[0], r.input[1]);
        for (k, st) in run.stage_states.iter().enumerate() {
            for (flat, z) in st.amplitudes().iter().enumerate() {
                if z.norm() > 1e-12 {
                    state_rows.push(vec![
                        input.clone(),
                        (k + 1).to_string(),
                        label(st.dims(), flat),
                        num(z.re),
                        num(z.im),
                    ]);
                }
            }
        }
        let last = r.columns.last().expect("tables have at least one column");
        let (fid, qubit_state) = if run.final_state.dims().len() == 3 {
            let v = vacuum_component(&run.final_state).map_err(physics)?;
            let ov: C64 = last.inner(&v).map_err(|e| CliError::Physics(e.to_string()))?;
            (ov.norm_sqr(), qubit_projection(&v)?)
        } else {
            let f = fidelity_up_to_global_phase(last, &run.final_state).map_err(|e| CliError::Physics(e.to_string()))?;
            (f, run.final_state.clone())
        };
        worst_row = worst_row.min(fid);
        if s.name == "entangle" && r.input == [0, 0] {
            entangled = Some(concurrence(&qubit_state).map_err(physics)?);
        }
        row_rows.push(vec![
            input,
            fixed9(fid),
            num(run.peak_photon_population),
            num(run.top_fock_population),
        ]);
    }

    let gate_fidelity = match (&s.ideal_unitary, &backend) {
        (None, _) => None,
        (Some(_), Backend::Cavity(b)) => Some(cavity_gate_fidelity(&s, b).map_err(physics)?.0),
        (Some(ideal), _) => {
            let u = schedule_propagator(&s, &backend).map_err(|e| CliError::Physics(e.to_string()))?;
            Some(subspace_gate_fidelity(&u, ideal).map_err(physics)?)
        }
    };
    let gate_time = gate_time_estimate(cfg.gamma()?, &s, &cfg.rabi()?).map_err(|e| CliError::Usage(e.to_string()))?;

    let cells: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            vec![
                format!("{}{}", c.input[0], c.input[1]),
                c.stage.to_string(),
                num(c.max_error),
                c.passed.to_string(),
            ]
        })
        .collect();
    let backend_name = match kind {
        BackendKind::Analytic => "analytic",
        BackendKind::Dispersive => "dispersive",
        BackendKind::Cavity => "cavity",
    };
    ctx.table(
        "gate_summary.csv",
        &[
            "schedule",
            "backend",
            "gate_fidelity",
            "concurrence",
            "gate_time_s",
            "truth_table_pass",
        ],
        &[vec![
            s.name.clone(),
            backend_name.into(),
            gate_fidelity.map(fixed9).unwrap_or_default(),
            entangled.map(fixed9).unwrap_or_default(),
            num(gate_time),
            report.passed.to_string(),
        ]],
        &[],
    )?;
    ctx.table(
        "gate_rows.csv",
        &["input", "output_fidelity", "peak_photon_population", "top_fock_population"],
        &row_rows,
        &[],
    )?;
    ctx.table(
        "gate_cells.csv",
        &["input", "stage", "max_amplitude_error", "pass"],
        &cells,
        &[],
    )?;
    ctx.table(
        "gate_states.csv",
        &["input", "stage", "basis", "amplitude_re", "amplitude_im"],
        &state_rows,
        &[],
    )?;

    if kind == BackendKind::Cavity {
        // The photon-dressed run only approximates the table; judge it by fidelity.
        let min = cfg.min_fidelity()?;
        let worst = gate_fidelity.map_or(worst_row, |g| g.min(worst_row));
        if worst < min {
            return Err(CliError::Physics(format!("fidelity {worst:.6} below {min}")));
        }
    } else if !report.passed {
        let n = report.failures().count();
        return Err(CliError::Physics(format!("{n} truth-table cells of {} differ", s.name)));
    }
    Ok(())
}

pub fn scan(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let kind = cfg.scan_kind.unwrap_or(ScanKind::Dispersive);
    let result: ScanResult = match kind {
        ScanKind::Dispersive => {
            let d = DispersiveScanConfig::default();
            let c = DispersiveScanConfig {
                ratios: cfg.scan_ratios.clone().unwrap_or(d.ratios),
                detuning: cfg.detuning()?,
                fock_cutoff: cfg.fock_cutoff()?,
                max_fock_cutoff: cfg.max_fock_cutoff.unwrap_or(d.max_fock_cutoff),
                samples_per_period: cfg.samples_per_period()?,
            };
            dispersive_error_scan(&c)
        }
        ScanKind::Rwa => {
            let d = RwaScanConfig::default();
            let c = RwaScanConfig {
                ratios: cfg.scan_ratios.clone().unwrap_or(d.ratios),
                g02: cfg.scan_rwa_g02_radps.unwrap_or(d.g02),
                detuning: cfg.detuning()?,
                fock_cutoff: cfg.fock_cutoff()?,
            };
            rwa_error_scan(&c)
        }
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;

    let fmt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "nan".into());
    let rows: Vec<Vec<String>> = result
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let ratio = if k == 0 {
                String::new()
            } else {
                match (p.error, result.points[k - 1].error) {
                    (Some(a), Some(b)) => num(a / b),
                    _ => "nan".into(),
                }
            };
            vec![
                num(p.parameter),
                fmt(p.error),
                fmt(p.peak_photon_population),
                ratio,
                p.note.clone().unwrap_or_default(),
            ]
        })
        .collect();
    let name = result.parameter_name.as_str();
    ctx.table(
        "scan.csv",
        &[
            name,
            "error_1_minus_fidelity",
            "peak_photon_population",
            "error_ratio_to_previous",
            "note",
        ],
        &rows,
        &[format!("monotone: {}", if result.monotone { "pass" } else { "fail" })],
    )
}

pub fn feasibility(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (t_op, source) = match cfg.t_op_s {
        Some(t) => (t, "config"),
        None => (
            gate_time_estimate(cfg.gamma()?, &schedule_cps(), &cfg.rabi()?).map_err(|e| CliError::Usage(e.to_string()))?,
            "cps_gate_time_estimate",
        ),
    };
    let input = FeasibilityInput {
        q_factor: cfg.q_factor.unwrap_or(1e8),
        nu: cfg.nu0_hz.unwrap_or(80e9) + cfg.detuning()? / (2.0 * PI),
        t_op,
        t_r: cfg.t_r_s.unwrap_or(1e-6),
    };
    let r = assess_with_margin(&input, cfg.margin.unwrap_or(10.0)).map_err(|e| CliError::Usage(e.to_string()))?;
    ctx.table(
        "feasibility.csv",
        &[
            "q_factor",
            "nu_hz",
            "t_op_s",
            "t_op_source",
            "t_r_s",
            "T_c_s",
            "P",
            "effective_decay_s",
            "q_min",
            "margin",
            "achieved_margin",
            "pass",
        ],
        &[vec![
            num(input.q_factor),
            num(input.nu),
            num(input.t_op),
            source.into(),
            num(input.t_r),
            num(r.t_c),
            num(r.p),
            num(r.effective_decay),
            num(r.q_min),
            num(r.margin),
            num(r.achieved_margin),
            r.pass.to_string(),
        ]],
        &[],
    )?;
    if r.pass {
        Ok(())
    } else {
        Err(CliError::Physics(format!(
            "Q = {:e} is below {} × q_min = {:e}",
            input.q_factor, r.margin, r.q_min
        )))
    }
}
