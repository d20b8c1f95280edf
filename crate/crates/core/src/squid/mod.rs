// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! rf-SQUID level structure in the flux basis.
//!
//! The Hamiltonian Q²/2C + (Φ − Φx)²/2L − E_J cos(2πΦ/Φ₀) is discretized on a
//! uniform flux grid with second-order central differences. The kinetic
//! term becomes a symmetric tridiagonal matrix, so the lowest few levels are
//! found with bisection and inverse iteration rather than a dense solver.

// `!(a > b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod preset;
pub(crate) mod tridiag;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::units::{FLUX_QUANTUM, HBAR};
use tridiag::SymTridiagonal;

pub use preset::{tune_capacitance, PresetError, SquidPreset, TuningTarget};

/// Most levels a single solve may retain.
pub const MAX_LEVELS: usize = 8;

/// Smallest grid accepted for a production solve.
pub const MIN_GRID_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid SQUID parameter: {0}")]
    InvalidParams(String),
    #[error("invalid flux grid: {0}")]
    InvalidGrid(String),
    #[error("requested {requested} levels; between 1 and {max} are supported")]
    LevelCount { requested: usize, max: usize },
    #[error("grid too narrow: edge potential {edge:e} J does not exceed level {level} at {energy:e} J")]
    GridTooNarrow { level: usize, energy: f64, edge: f64 },
    #[error(
        "grid does not resolve level {level}: transition energy moved by {relative_shift:e} (relative) \
         between {coarse_points} and {points} points, tolerance {tolerance:e}"
    )]
    Resolution {
        level: usize,
        relative_shift: f64,
        tolerance: f64,
        points: usize,
        coarse_points: usize,
    },
    #[error("level energies are not strictly ascending")]
    NotAscending,
    #[error("flux matrix must be {0}x{0}")]
    FluxShape(usize),
    #[error("no capacitance in [{lo:e}, {hi:e}] F brackets the target (ω20 spans {w_lo:e}..{w_hi:e} rad/s)")]
    NoBracket { lo: f64, hi: f64, w_lo: f64, w_hi: f64 },
}

/// Circuit parameters of one rf SQUID.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidParams {
    /// Junction capacitance C (F).
    pub capacitance: f64,
    /// Loop inductance L (H).
    pub inductance: f64,
    /// Critical current I_c (A); zero gives the bare LC oscillator.
    pub critical_current: f64,
    /// Static external flux Φx (Wb).
    pub external_flux: f64,
}

impl SquidParams {
    pub fn new(capacitance: f64, inductance: f64, critical_current: f64, external_flux: f64) -> Result<Self, SpectrumError> {
        let p = SquidParams {
            capacitance,
            inductance,
            critical_current,
            external_flux,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if !(self.capacitance > 0.0 && self.capacitance.is_finite()) {
            return Err(SpectrumError::InvalidParams(format!("capacitance {} F", self.capacitance)));
        }
        if !(self.inductance > 0.0 && self.inductance.is_finite()) {
            return Err(SpectrumError::InvalidParams(format!("inductance {} H", self.inductance)));
        }
        if !(self.critical_current >= 0.0 && self.critical_current.is_finite()) {
            return Err(SpectrumError::InvalidParams(format!(
                "critical current {} A",
                self.critical_current
            )));
        }
        if !self.external_flux.is_finite() {
            return Err(SpectrumError::InvalidParams("external flux is not finite".into()));
        }
        Ok(())
    }

    /// E_J = I_c Φ₀ / 2π.
    pub fn josephson_energy(&self) -> f64 {
        self.critical_current * FLUX_QUANTUM / (2.0 * PI)
    }

    /// β_L = 2π L I_c / Φ₀.
    pub fn beta_l(&self) -> f64 {
        2.0 * PI * self.inductance * self.critical_current / FLUX_QUANTUM
    }

    /// 1/√(LC), the level spacing of the bare oscillator in rad/s.
    pub fn lc_frequency(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }

    /// √(ħ√(L/C)), the flux width scale of the bare oscillator.
    pub fn oscillator_length(&self) -> f64 {
        (HBAR * (self.inductance / self.capacitance).sqrt()).sqrt()
    }

    /// √(ħ√(L/C)/2) = ⟨0|Φ|1⟩ of the bare oscillator.
    pub fn harmonic_flux_element(&self) -> f64 {
        self.oscillator_length() / 2f64.sqrt()
    }

    /// (Φ − Φx)²/2L − E_J cos(2πΦ/Φ₀).
    pub fn potential(&self, flux: f64) -> f64 {
        let dx = flux - self.external_flux;
        dx * dx / (2.0 * self.inductance) - self.josephson_energy() * (2.0 * PI * flux / FLUX_QUANTUM).cos()
    }
}

/// Uniform flux grid Φ_k = center + (k − (n−1)/2)·h, k = 0..n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxGrid {
    center: f64,
    half_width: f64,
    points: usize,
}

impl FluxGrid {
    pub fn new(center: f64, half_width: f64, points: usize) -> Result<Self, SpectrumError> {
        if points < MIN_GRID_POINTS || points % 2 == 0 {
            return Err(SpectrumError::InvalidGrid(format!(
                "{points} points; need an odd count of at least {MIN_GRID_POINTS}"
            )));
        }
        Self::unchecked(center, half_width, points)
    }

    fn unchecked(center: f64, half_width: f64, points: usize) -> Result<Self, SpectrumError> {
        if !(half_width > 0.0 && half_width.is_finite()) || !center.is_finite() || points < 3 {
            return Err(SpectrumError::InvalidGrid(format!(
                "half width {half_width:e} Wb around {center:e} Wb"
            )));
        }
        Ok(FluxGrid {
            center,
            half_width,
            points,
        })
    }

    /// Grid centred on the external flux, half width given in units of Φ₀.
    pub fn around_bias(p: &SquidParams, half_width_over_phi0: f64, points: usize) -> Result<Self, SpectrumError> {
        Self::new(p.external_flux, half_width_over_phi0 * FLUX_QUANTUM, points)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn flux(&self, k: usize) -> f64 {
        self.center - self.half_width + k as f64 * self.spacing()
    }

    /// Same span with 2n − 1 points (the old nodes are kept).
    pub fn refined(&self) -> FluxGrid {
        FluxGrid {
            points: 2 * self.points - 1,
            ..*self
        }
    }

    /// Same span with every other node dropped.
    pub fn coarsened(&self) -> FluxGrid {
        FluxGrid {
            points: (self.points - 1) / 2 + 1,
            ..*self
        }
    }
}

/// Samples the SQUID potential on the grid (J).
pub fn build_potential(p: &SquidParams, g: &FluxGrid) -> Vec<f64> {
    (0..g.points()).map(|k| p.potential(g.flux(k))).collect()
}

/// Energies and flux matrix elements of the retained levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStructure {
    energies: Vec<f64>,
    flux_elements: DMatrix<f64>,
    flux_scale: f64,
}

impl LevelStructure {
    /// Assembles a structure from known data; the flux matrix is symmetrized.
    ///
    /// `flux_scale` is the harmonic-scale element used as the reference for
    /// "dark transition" floors.
    pub fn from_parts(energies: Vec<f64>, flux_elements: DMatrix<f64>, flux_scale: f64) -> Result<Self, SpectrumError> {
        let n = energies.len();
        if flux_elements.nrows() != n || flux_elements.ncols() != n {
            return Err(SpectrumError::FluxShape(n));
        }
        if n == 0 || n > MAX_LEVELS {
            return Err(SpectrumError::LevelCount {
                requested: n,
                max: MAX_LEVELS,
            });
        }
        if energies.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SpectrumError::NotAscending);
        }
        let sym = (&flux_elements + flux_elements.transpose()) * 0.5;
        Ok(LevelStructure {
            energies,
            flux_elements: sym,
            flux_scale,
        })
    }

    /// Structure with the given level frequencies (rad/s above the ground
    /// state) and vanishing flux elements, for Hamiltonians parameterized
    /// directly by their couplings.
    pub fn from_frequencies(omegas: &[f64]) -> Result<Self, SpectrumError> {
        let energies = omegas.iter().map(|w| w * HBAR).collect();
        Self::from_parts(energies, DMatrix::zeros(omegas.len(), omegas.len()), 1.0)
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    /// ⟨i|Φ|j⟩ in Wb.
    pub fn flux(&self, i: usize, j: usize) -> f64 {
        self.flux_elements[(i, j)]
    }

    pub fn flux_elements(&self) -> &DMatrix<f64> {
        &self.flux_elements
    }

    pub fn flux_scale(&self) -> f64 {
        self.flux_scale
    }

    /// (E_i − E_j)/ħ.
    pub fn omega(&self, i: usize, j: usize) -> f64 {
        (self.energies[i] - self.energies[j]) / HBAR
    }

    pub fn omega_10(&self) -> f64 {
        self.omega(1, 0)
    }

    pub fn omega_20(&self) -> f64 {
        self.omega(2, 0)
    }

    pub fn omega_21(&self) -> f64 {
        self.omega(2, 1)
    }

    /// Copy with a single flux element (and its mirror) overwritten.
    pub fn with_flux_element(&self, i: usize, j: usize, value: f64) -> LevelStructure {
        let mut out = self.clone();
        out.flux_elements[(i, j)] = value;
        out.flux_elements[(j, i)] = value;
        out
    }
}

/// Knobs for [`solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Largest accepted relative change of any transition energy E_n − E₀
    /// when the grid is coarsened by a factor of two.
    pub convergence_tol: f64,
    /// Skip the coarse-grid comparison (used by the comparison itself).
    pub check_resolution: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            convergence_tol: 1e-3,
            check_resolution: true,
        }
    }
}

/// Lowest `n_levels` eigenpairs with default options.
pub fn solve(p: &SquidParams, g: &FluxGrid, n_levels: usize) -> Result<LevelStructure, SpectrumError> {
    solve_with(p, g, n_levels, &SolveOptions::default())
}

/// Raw eigenpairs on one grid: energies and grid-normalized real eigenfunctions.
pub(crate) fn eigenpairs(p: &SquidParams, g: &FluxGrid, n_levels: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let h = g.spacing();
    let hop = HBAR * HBAR / (2.0 * p.capacitance * h * h);
    let diag: Vec<f64> = build_potential(p, g).into_iter().map(|v| v + 2.0 * hop).collect();
    let t = SymTridiagonal::new(diag, vec![-hop; g.points() - 1]);
    let weights = trapezoid_weights(g);
    let mut energies = Vec::with_capacity(n_levels);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n_levels);
    for k in 0..n_levels {
        let e = t.eigenvalue(k);
        let mut v = t.eigenvector(e, &vectors);
        // Largest-magnitude component positive.
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        energies.push(e);
        vectors.push(v);
    }
    // Inverse iteration returns unit vectors in ℓ²; rescale to the grid L² norm.
    let wavefunctions = vectors
        .into_iter()
        .map(|v| {
            let norm: f64 = v.iter().zip(&weights).map(|(x, w)| x * x * w).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / norm).collect()
        })
        .collect();
    (energies, wavefunctions)
}

fn trapezoid_weights(g: &FluxGrid) -> Vec<f64> {
    let h = g.spacing();
    let n = g.points();
    (0..n).map(|k| if k == 0 || k == n - 1 { 0.5 * h } else { h }).collect()
}

/// Lowest `n_levels` eigenpairs of the discretized SQUID Hamiltonian.
pub fn solve_with(p: &SquidParams, g: &FluxGrid, n_levels: usize, opts: &SolveOptions) -> Result<LevelStructure, SpectrumError> {
    p.validate()?;
    if n_levels == 0 || n_levels > MAX_LEVELS {
        return Err(SpectrumError::LevelCount {
            requested: n_levels,
            max: MAX_LEVELS,
        });
    }
    let (energies, psi) = eigenpairs(p, g, n_levels);

    let top = energies[n_levels - 1];
    let edge = p.potential(g.flux(0)).min(p.potential(g.flux(g.points() - 1)));
    if edge <= top {
        return Err(SpectrumError::GridTooNarrow {
            level: n_levels - 1,
            energy: top,
            edge,
        });
    }

    if opts.check_resolution && n_levels > 1 {
        let coarse = g.coarsened();
        let (coarse_e, _) = eigenpairs(p, &coarse, n_levels);
        for n in 1..n_levels {
            let fine_gap = energies[n] - energies[0];
            let coarse_gap = coarse_e[n] - coarse_e[0];
            let shift = ((fine_gap - coarse_gap) / fine_gap).abs();
            if !(shift <= opts.convergence_tol) {
                return Err(SpectrumError::Resolution {
                    level: n,
                    relative_shift: shift,
                    tolerance: opts.convergence_tol,
                    points: g.points(),
                    coarse_points: coarse.points(),
                });
            }
        }
    }

    let weights = trapezoid_weights(g);
    let mut flux = DMatrix::<f64>::zeros(n_levels, n_levels);
    for i in 0..n_levels {
        for j in i..n_levels {
            let v: f64 = (0..g.points()).map(|k| weights[k] * psi[i][k] * psi[j][k] * g.flux(k)).sum();
            flux[(i, j)] = v;
            flux[(j, i)] = v;
        }
    }
    Ok(LevelStructure {
        energies,
        flux_elements: flux,
        flux_scale: p.harmonic_flux_element(),
    })
}

/// Thresholds for the Λ-configuration test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaCriteria {
    /// ω20 and ω21 must each exceed this multiple of ω10.
    pub frequency_ratio: f64,
    /// Flux elements below this fraction of the harmonic-scale element count as dark.
    pub element_floor: f64,
}

impl Default for LambdaCriteria {
    fn default() -> Self {
        LambdaCriteria {
            frequency_ratio: 5.0,
            element_floor: 1e-4,
        }
    }
}

/// Verdict of [`lambda_check`] with the reasons for a failure.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaReport {
    pub is_lambda: bool,
    pub ratio_20_10: f64,
    pub ratio_21_10: f64,
    pub reasons: Vec<String>,
}

pub fn lambda_check(ls: &LevelStructure) -> LambdaReport {
    lambda_check_with(ls, &LambdaCriteria::default())
}

/// Whether the three lowest levels form a Λ system usable by the protocols.
pub fn lambda_check_with(ls: &LevelStructure, c: &LambdaCriteria) -> LambdaReport {
    let mut reasons = Vec::new();
    if ls.n_levels() < 3 {
        return LambdaReport {
            is_lambda: false,
            ratio_20_10: f64::NAN,
            ratio_21_10: f64::NAN,
            reasons: vec!["fewer than three levels".into()],
        };
    }
    let w10 = ls.omega_10();
    let r20 = ls.omega_20() / w10;
    let r21 = ls.omega_21() / w10;
    if !(r20 >= c.frequency_ratio) {
        reasons.push(format!("ω20/ω10 = {r20:.3} below {}", c.frequency_ratio));
    }
    if !(r21 >= c.frequency_ratio) {
        reasons.push(format!("ω21/ω10 = {r21:.3} below {}", c.frequency_ratio));
    }
    let floor = c.element_floor * ls.flux_scale();
    if !(ls.flux(0, 2).abs() > floor) {
        reasons.push("dark 0↔2 transition".into());
    }
    if !(ls.flux(1, 2).abs() > floor) {
        reasons.push("dark 1↔2 transition".into());
    }
    LambdaReport {
        is_lambda: reasons.is_empty(),
        ratio_20_10: r20,
        ratio_21_10: r21,
        reasons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> SquidParams {
        SquidParams::new(40e-15, 100e-12, 0.0, 0.0).unwrap()
    }

    fn harmonic_grid(p: &SquidParams, points: usize) -> FluxGrid {
        FluxGrid::new(p.external_flux, 8.0 * p.oscillator_length(), points).unwrap()
    }

    #[test]
    fn parabola_when_junction_absent() {
        let p = SquidParams::new(40e-15, 100e-12, 0.0, 0.2 * FLUX_QUANTUM).unwrap();
        let g = FluxGrid::new(0.2 * FLUX_QUANTUM, 0.5 * FLUX_QUANTUM, 101).unwrap();
        let v = build_potential(&p, &g);
        let (kmin, _) = v
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |a, (k, &x)| if x < a.1 { (k, x) } else { a });
        assert_eq!(kmin, 50);
        assert!(v[50].abs() < 1e-30);
    }

    #[test]
    fn half_flux_double_well_is_symmetric() {
        let p = SquidParams::new(40e-15, 100e-12, 1.5 * FLUX_QUANTUM / (2.0 * PI * 100e-12), 0.5 * FLUX_QUANTUM).unwrap();
        assert!(p.beta_l() > 1.0);
        for delta in [0.01, 0.13, 0.31, 0.47] {
            let d = delta * FLUX_QUANTUM;
            let left = p.potential(0.5 * FLUX_QUANTUM - d);
            let right = p.potential(0.5 * FLUX_QUANTUM + d);
            assert!((left - right).abs() <= 1e-12 * left.abs().max(right.abs()));
        }
    }

    #[test]
    fn potential_at_zero_flux_is_minus_ej() {
        let p = SquidParams::new(40e-15, 100e-12, 3e-6, 0.0).unwrap();
        let g = FluxGrid::new(0.0, 0.5 * FLUX_QUANTUM, 65).unwrap();
        let v = build_potential(&p, &g);
        assert!((v[32] + p.josephson_energy()).abs() <= 1e-15 * p.josephson_energy());
    }

    #[test]
    fn harmonic_spacing_and_selection_rule() {
        let p = harmonic();
        let ls = solve(&p, &harmonic_grid(&p, 2001), 3).unwrap();
        let spacing = HBAR * p.lc_frequency();
        for n in 1..3 {
            let gap = ls.energies()[n] - ls.energies()[n - 1];
            assert!((gap / spacing - 1.0).abs() < 1e-3);
        }
        let x01 = p.harmonic_flux_element();
        assert!((ls.flux(0, 1).abs() / x01 - 1.0).abs() < 5e-3);
        assert!(ls.flux(0, 2).abs() < 1e-8 * x01);
    }

    #[test]
    fn transition_frequencies_are_additive() {
        let p = harmonic();
        let ls = solve(&p, &harmonic_grid(&p, 1001), 3).unwrap();
        assert!((ls.omega_20() - (ls.omega_21() + ls.omega_10())).abs() <= 1e-9 * ls.omega_20());
    }

    #[test]
    fn flux_elements_exactly_symmetric() {
        let p = SquidParams::new(20e-15, 100e-12, 4e-6, 0.501 * FLUX_QUANTUM).unwrap();
        let g = FluxGrid::around_bias(&p, 0.8, 1601).unwrap();
        let ls = solve(&p, &g, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(ls.flux(i, j), ls.flux(j, i));
            }
        }
    }

    #[test]
    fn richardson_ratio_harmonic() {
        let p = harmonic();
        let g = harmonic_grid(&p, 101);
        let e = |grid: &FluxGrid| {
            solve_with(
                &p,
                grid,
                3,
                &SolveOptions {
                    check_resolution: false,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        let (a, b, c) = (e(&g), e(&g.refined()), e(&g.refined().refined()));
        for n in 0..3 {
            let d1 = (a.energies()[n] - b.energies()[n]).abs();
            let d2 = (b.energies()[n] - c.energies()[n]).abs();
            assert!(d1 / d2 >= 3.5, "level {n}: ratio {}", d1 / d2);
        }
    }

    #[test]
    fn parity_at_half_flux() {
        let ic = 1.1 * FLUX_QUANTUM / (2.0 * PI * 100e-12);
        let p = SquidParams::new(40e-15, 100e-12, ic, 0.5 * FLUX_QUANTUM).unwrap();
        let g = FluxGrid::around_bias(&p, 1.0, 2001).unwrap();
        let ls = solve(&p, &g, 4).unwrap();
        let half = 0.5 * FLUX_QUANTUM;
        for i in 0..4 {
            for j in 0..4 {
                if (i + j) % 2 == 0 {
                    let centred = ls.flux(i, j) - if i == j { half } else { 0.0 };
                    assert!(centred.abs() < 1e-8 * ls.flux_scale(), "({i},{j}) = {centred:e}");
                } else {
                    assert!(ls.flux(i, j).abs() > 1e-3 * ls.flux_scale());
                }
            }
        }
    }

    #[test]
    fn narrow_grid_rejected() {
        let p = harmonic();
        let g = FluxGrid::new(0.0, 1.0 * p.oscillator_length(), 201).unwrap();
        assert!(matches!(solve(&p, &g, 3), Err(SpectrumError::GridTooNarrow { .. })));
    }

    #[test]
    fn under_resolved_grid_rejected() {
        let p = harmonic();
        let g = FluxGrid::new(0.0, 30.0 * p.oscillator_length(), 65).unwrap();
        assert!(matches!(solve(&p, &g, 3), Err(SpectrumError::Resolution { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(FluxGrid::new(0.0, 1e-15, 63).is_err());
        assert!(FluxGrid::new(0.0, 1e-15, 100).is_err());
        assert!(FluxGrid::new(0.0, -1e-15, 101).is_err());
        assert!(SquidParams::new(0.0, 1e-10, 0.0, 0.0).is_err());
        assert!(SquidParams::new(1e-15, 1e-10, -1.0, 0.0).is_err());
    }

    #[test]
    fn lambda_check_rejects_harmonic() {
        let p = harmonic();
        let ls = solve(&p, &harmonic_grid(&p, 1001), 3).unwrap();
        let r = lambda_check(&ls);
        assert!(!r.is_lambda);
        assert!(r.reasons.iter().any(|s| s.contains("dark 0↔2")));
    }

    #[test]
    fn lambda_check_flags_dark_one_two() {
        let ls = LevelStructure::from_parts(
            vec![0.0, 1.0e-24, 10.0e-24],
            DMatrix::from_row_slice(3, 3, &[0.0, 0.1, 0.2, 0.1, 0.0, 0.3, 0.2, 0.3, 0.0]),
            1.0,
        )
        .unwrap();
        assert!(lambda_check(&ls).is_lambda);
        let dark = ls.with_flux_element(1, 2, 0.0);
        let r = lambda_check(&dark);
        assert!(!r.is_lambda);
        assert_eq!(r.reasons, vec!["dark 1↔2 transition".to_string()]);
    }
}
