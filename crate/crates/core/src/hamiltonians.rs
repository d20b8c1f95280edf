// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! SQUID, cavity, coupling, drive and effective two-SQUID Hamiltonians.
//!
//! Ordering convention: in composite spaces each SQUID factor (dimension 3)
//! comes first and the cavity factor (dimension N) last, so a single SQUID
//! with its cavity lives on `[3, N]` and two SQUIDs on `[3, 3, N]`.
//!
//! [`h_squid`] and [`h_cavity`] return energies in joules. Every other
//! builder works in rad/s (ħ divided out), which is what the propagators in
//! [`crate::dynamics`] expect.

use nalgebra::{DMatrix, Matrix3};
use thiserror::Error;

use crate::dynamics::TimeDependentHamiltonian;
use crate::hilbert::{kron, HilbertError, Operator, C64};
use crate::squid::LevelStructure;
use crate::units::{HBAR, MU0};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error("expected exactly {expected} retained levels, found {found}")]
    LevelCount { expected: usize, found: usize },
    #[error("invalid cavity mode: {0}")]
    InvalidCavity(String),
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("drive at {omega_uw:e} rad/s is not resonant with the {transition} transition at {omega_ij:e} rad/s")]
    NotResonant {
        transition: Transition,
        omega_uw: f64,
        omega_ij: f64,
    },
}

/// Dimension of the truncated SQUID space.
pub const SQUID_LEVELS: usize = 3;

fn outer(n: usize, i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

fn flip(i: usize, j: usize) -> Operator {
    Operator::new(outer(SQUID_LEVELS, i, j), vec![SQUID_LEVELS]).expect("3x3")
}

/// |i⟩⟨j| on the three-level SQUID space.
pub fn squid_flip(i: usize, j: usize) -> Operator {
    flip(i, j)
}

/// Single cavity mode truncated to `fock_cutoff` photon-number states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityMode {
    omega_c: f64,
    fock_cutoff: usize,
    effective_flux_amplitude: f64,
}

impl CavityMode {
    /// `omega_c` in rad/s; `effective_flux_amplitude` is the scalar
    /// surface integral of the mode's magnetic field through the SQUID ring (Wb).
    pub fn new(omega_c: f64, fock_cutoff: usize, effective_flux_amplitude: f64) -> Result<Self, HamiltonianError> {
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(HamiltonianError::InvalidCavity(format!("omega_c = {omega_c:e} rad/s")));
        }
        if fock_cutoff < 2 {
            return Err(HamiltonianError::InvalidCavity(format!("fock cutoff {fock_cutoff} < 2")));
        }
        if !effective_flux_amplitude.is_finite() {
            return Err(HamiltonianError::InvalidCavity("flux amplitude not finite".into()));
        }
        Ok(CavityMode {
            omega_c,
            fock_cutoff,
            effective_flux_amplitude,
        })
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn effective_flux_amplitude(&self) -> f64 {
        self.effective_flux_amplitude
    }

    pub fn with_fock_cutoff(&self, n: usize) -> Result<Self, HamiltonianError> {
        Self::new(self.omega_c, n, self.effective_flux_amplitude)
    }

    /// a with a|n⟩ = √n|n−1⟩.
    pub fn annihilation(&self) -> Operator {
        annihilation(self.fock_cutoff)
    }

    pub fn creation(&self) -> Operator {
        self.annihilation().adjoint()
    }

    /// a†a, exact on the truncated space.
    pub fn number(&self) -> Operator {
        number(self.fock_cutoff)
    }
}

pub(crate) fn annihilation(n: usize) -> Operator {
    let mut m = DMatrix::zeros(n, n);
    for k in 1..n {
        m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    Operator::new(m, vec![n]).expect("square")
}

pub(crate) fn number(n: usize) -> Operator {
    let diag: Vec<f64> = (0..n).map(|k| k as f64).collect();
    Operator::diagonal(&diag, vec![n]).expect("square")
}

/// ħω_c(a†a + 1/2) in joules.
pub fn h_cavity(m: &CavityMode) -> Operator {
    let diag: Vec<f64> = (0..m.fock_cutoff).map(|n| HBAR * m.omega_c * (n as f64 + 0.5)).collect();
    Operator::diagonal(&diag, vec![m.fock_cutoff]).expect("square")
}

/// diag(E₀, E₁, E₂) in joules.
pub fn h_squid(ls: &LevelStructure) -> Result<Operator, HamiltonianError> {
    if ls.n_levels() != SQUID_LEVELS {
        return Err(HamiltonianError::LevelCount {
            expected: SQUID_LEVELS,
            found: ls.n_levels(),
        });
    }
    Ok(Operator::diagonal(ls.energies(), vec![SQUID_LEVELS])?)
}

/// Cavity couplings g_ij (rad/s) of one SQUID.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSet {
    g: Matrix3<f64>,
    /// Loop coupling coefficient −1/L when derived from a circuit.
    lambda_c: Option<f64>,
}

impl CouplingSet {
    /// Symmetrizes `g`.
    pub fn new(g: Matrix3<f64>, lambda_c: Option<f64>) -> Self {
        CouplingSet {
            g: (g + g.transpose()) * 0.5,
            lambda_c,
        }
    }

    /// Only the 0↔2 coupling, set directly.
    pub fn from_g02(g02: f64) -> Self {
        let mut g = Matrix3::zeros();
        g[(0, 2)] = g02;
        g[(2, 0)] = g02;
        CouplingSet { g, lambda_c: None }
    }

    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[(i, j)]
    }

    pub fn g02(&self) -> f64 {
        self.g[(0, 2)]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.g
    }

    pub fn lambda_c(&self) -> Option<f64> {
        self.lambda_c
    }

    /// Drops g₀₁ and g₁₂: keeps the diagonal terms and the 0↔2 pair,
    /// the couplings that survive when the cavity is far off resonance
    /// with every transition that involves level |1⟩.
    pub fn without_level_one_transitions(&self) -> Self {
        let mut g = self.g;
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            g[(i, j)] = 0.0;
        }
        CouplingSet { g, ..*self }
    }
}

/// g_ij = λ_c √(ħω_c/2μ₀) ⟨i|Φ|j⟩ Φ̃_c / ħ with λ_c = −1/L; the diagonal uses
/// ⟨i|Φ|i⟩ − Φx. All mode-geometry factors live in Φ̃_c.
pub fn couplings_from_structure(ls: &LevelStructure, m: &CavityMode, inductance: f64, external_flux: f64) -> CouplingSet {
    let lambda = -1.0 / inductance;
    let prefactor = lambda * (HBAR * m.omega_c / (2.0 * MU0)).sqrt() * m.effective_flux_amplitude / HBAR;
    let n = ls.n_levels().min(SQUID_LEVELS);
    let mut g = Matrix3::zeros();
    for i in 0..n {
        for j in 0..n {
            let element = if i == j {
                ls.flux(i, i) - external_flux
            } else {
                ls.flux(i, j)
            };
            g[(i, j)] = prefactor * element;
        }
    }
    CouplingSet::new(g, Some(lambda))
}

/// Which pair of levels a drive addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Transition {
    #[serde(rename = "0-2")]
    ZeroTwo,
    #[serde(rename = "1-2")]
    OneTwo,
    #[serde(rename = "0-1")]
    ZeroOne,
}

impl Transition {
    pub const ALL: [Transition; 3] = [Transition::ZeroTwo, Transition::OneTwo, Transition::ZeroOne];

    /// (lower, upper) level indices.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::ZeroTwo => (0, 2),
            Transition::OneTwo => (1, 2),
            Transition::ZeroOne => (0, 1),
        }
    }

    pub fn from_levels(i: usize, j: usize) -> Option<Transition> {
        match (i.min(j), i.max(j)) {
            (0, 2) => Some(Transition::ZeroTwo),
            (1, 2) => Some(Transition::OneTwo),
            (0, 1) => Some(Transition::ZeroOne),
            _ => None,
        }
    }

    /// The level not involved.
    pub fn spectator(self) -> usize {
        let (i, j) = self.levels();
        3 - i - j
    }
}

impl std::fmt::Display for Transition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (i, j) = self.levels();
        write!(f, "{i}↔{j}")
    }
}

/// A rectangular classical microwave pulse on one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    transition: Transition,
    rabi: f64,
    diagonal: [f64; 2],
    omega_uw: f64,
    duration: f64,
    resonant: bool,
}

impl DriveSpec {
    /// `rabi` is Ω (rad/s, > 0); the resonance flag is derived from `ls`.
    pub fn new(
        transition: Transition,
        rabi: f64,
        omega_uw: f64,
        duration: f64,
        ls: &LevelStructure,
    ) -> Result<Self, HamiltonianError> {
        if !(rabi > 0.0 && rabi.is_finite()) {
            return Err(HamiltonianError::InvalidDrive(format!("rabi {rabi:e} rad/s")));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(HamiltonianError::InvalidDrive(format!("duration {duration:e} s")));
        }
        if !(omega_uw >= 0.0 && omega_uw.is_finite()) {
            return Err(HamiltonianError::InvalidDrive(format!("omega_uw {omega_uw:e} rad/s")));
        }
        let (i, j) = transition.levels();
        let w = ls.omega(j, i);
        Ok(DriveSpec {
            transition,
            rabi,
            diagonal: [0.0, 0.0],
            omega_uw,
            duration,
            resonant: (omega_uw - w).abs() <= 1e-9 * w.abs(),
        })
    }

    /// Resonant drive of the given transition.
    pub fn resonant(transition: Transition, rabi: f64, duration: f64, ls: &LevelStructure) -> Result<Self, HamiltonianError> {
        let (i, j) = transition.levels();
        Self::new(transition, rabi, ls.omega(j, i), duration, ls)
    }

    /// Drive amplitudes from the circuit: Ω_ij = λ ⟨i|Φ|j⟩ Φ̃ / ħ with λ = −1/L
    /// and Ω_ii = λ(⟨i|Φ|i⟩ − Φx)Φ̃/ħ. The Rabi rate is |Ω_ij|; the sign of
    /// Ω_ij only flips the rotation sense.
    #[allow(clippy::too_many_arguments)]
    pub fn from_structure(
        transition: Transition,
        ls: &LevelStructure,
        inductance: f64,
        external_flux: f64,
        flux_amplitude: f64,
        omega_uw: f64,
        duration: f64,
    ) -> Result<Self, HamiltonianError> {
        let lambda = -1.0 / inductance;
        let (i, j) = transition.levels();
        let omega_ij = lambda * ls.flux(i, j) * flux_amplitude / HBAR;
        let mut d = Self::new(transition, omega_ij.abs(), omega_uw, duration, ls)?;
        d.diagonal = [
            lambda * (ls.flux(i, i) - external_flux) * flux_amplitude / HBAR,
            lambda * (ls.flux(j, j) - external_flux) * flux_amplitude / HBAR,
        ];
        Ok(d)
    }

    /// Sets the diagonal amplitudes (Ω_ii, Ω_jj) for the two driven levels.
    pub fn with_diagonal(mut self, omega_ii: f64, omega_jj: f64) -> Self {
        self.diagonal = [omega_ii, omega_jj];
        self
    }

    pub fn transition(&self) -> Transition {
        self.transition
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn diagonal(&self) -> [f64; 2] {
        self.diagonal
    }

    pub fn omega_uw(&self) -> f64 {
        self.omega_uw
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn is_resonant(&self) -> bool {
        self.resonant
    }

    /// Pulse area θ = 2Ω·duration.
    pub fn theta(&self) -> f64 {
        2.0 * self.rabi * self.duration
    }
}

/// A Hamiltonian of the form H(t) = Σ_k c_k e^{iν_k t} M_k (rad/s).
///
/// Every interaction-picture model here has this shape, so the time
/// dependence is evaluated by re-weighting fixed matrices.
#[derive(Debug, Clone)]
pub struct PhasedHamiltonian {
    dims: Vec<usize>,
    terms: Vec<PhasedTerm>,
}

#[derive(Debug, Clone)]
struct PhasedTerm {
    coefficient: f64,
    frequency: f64,
    matrix: DMatrix<C64>,
}

impl PhasedHamiltonian {
    fn new(dims: Vec<usize>) -> Self {
        PhasedHamiltonian { dims, terms: Vec::new() }
    }

    fn push(&mut self, coefficient: f64, frequency: f64, op: &Operator) {
        if coefficient != 0.0 {
            self.terms.push(PhasedTerm {
                coefficient,
                frequency,
                matrix: op.entries().clone(),
            });
        }
    }

    /// Number of non-zero terms.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Copy keeping only terms whose |ν_k| does not exceed `cutoff`.
    pub fn without_frequencies_above(&self, cutoff: f64) -> PhasedHamiltonian {
        PhasedHamiltonian {
            dims: self.dims.clone(),
            terms: self.terms.iter().filter(|t| t.frequency.abs() <= cutoff).cloned().collect(),
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<Operator, HilbertError> {
        let n: usize = self.dims.iter().product();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for term in &self.terms {
            let phase = C64::from_polar(term.coefficient, term.frequency * t);
            m.zip_apply(&term.matrix, |a, b| *a += phase * b);
        }
        Operator::hermitian(m, self.dims.clone())
    }
}

impl TimeDependentHamiltonian for PhasedHamiltonian {
    fn dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn at(&self, t: f64) -> Operator {
        self.evaluate(t).expect("phased terms are added in conjugate pairs")
    }

    fn max_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max)
    }
}

fn require_three(ls: &LevelStructure) -> Result<(), HamiltonianError> {
    if ls.n_levels() != SQUID_LEVELS {
        return Err(HamiltonianError::LevelCount {
            expected: SQUID_LEVELS,
            found: ls.n_levels(),
        });
    }
    Ok(())
}

/// (a e^{−iω_c t} + a† e^{iω_c t}) Σ_ij g_ij e^{iω_ij t} |i⟩⟨j| on `[3, N]`,
/// with ω_ij = (E_i − E_j)/ħ. Co- and counter-rotating terms and the
/// diagonal g_ii terms are all kept.
pub fn h_int_full_interaction_picture(
    cs: &CouplingSet,
    ls: &LevelStructure,
    m: &CavityMode,
) -> Result<PhasedHamiltonian, HamiltonianError> {
    require_three(ls)?;
    let a = m.annihilation();
    let ad = m.creation();
    let mut h = PhasedHamiltonian::new(vec![SQUID_LEVELS, m.fock_cutoff]);
    for i in 0..SQUID_LEVELS {
        for j in 0..SQUID_LEVELS {
            let g = cs.g(i, j);
            if g == 0.0 {
                continue;
            }
            let w = ls.omega(i, j);
            h.push(g, w - m.omega_c, &kron(&flip(i, j), &a)?);
            h.push(g, w + m.omega_c, &kron(&flip(i, j), &ad)?);
        }
    }
    Ok(h)
}

/// Whether a small-ratio approximation is being used inside its regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityCondition {
    /// The ratio that must be small.
    pub ratio: f64,
    /// Ratios below this count as satisfied.
    pub threshold: f64,
    pub satisfied: bool,
}

impl ValidityCondition {
    fn new(ratio: f64, threshold: f64) -> Self {
        ValidityCondition {
            ratio,
            threshold,
            satisfied: ratio.abs() < threshold,
        }
    }
}

/// Largest |Δ|/ω_c accepted as "ω_c ≫ Δ".
pub const RWA_RATIO_THRESHOLD: f64 = 0.1;
/// Largest g₀₂/|Δ| accepted as dispersive.
pub const DISPERSIVE_RATIO_THRESHOLD: f64 = 0.2;

/// Rotating-wave Hamiltonian with its validity record.
#[derive(Debug, Clone)]
pub struct RwaHamiltonian {
    pub hamiltonian: PhasedHamiltonian,
    /// |ω_c − ω₂₀| / ω_c.
    pub condition: ValidityCondition,
}

/// g₀₂[e^{iΔt} a†|0⟩⟨2| + e^{−iΔt} a|2⟩⟨0|], Δ = ω_c − ω₂₀, on `[3, N]`.
pub fn h_int_rwa(cs: &CouplingSet, ls: &LevelStructure, m: &CavityMode) -> Result<RwaHamiltonian, HamiltonianError> {
    require_three(ls)?;
    let delta = m.omega_c - ls.omega_20();
    let mut h = PhasedHamiltonian::new(vec![SQUID_LEVELS, m.fock_cutoff]);
    h.push(cs.g02(), delta, &kron(&flip(0, 2), &m.creation())?);
    h.push(cs.g02(), -delta, &kron(&flip(2, 0), &m.annihilation())?);
    Ok(RwaHamiltonian {
        hamiltonian: h,
        condition: ValidityCondition::new(delta.abs() / m.omega_c, RWA_RATIO_THRESHOLD),
    })
}

/// Classical drive in the SQUID interaction picture, counter-rotating and
/// diagonal terms included:
/// Ω(e^{iωt} + e^{−iωt})(e^{iω_ij t}|i⟩⟨j| + h.c.) + Σ Ω_kk(e^{iωt} + e^{−iωt})|k⟩⟨k|.
pub fn h_drive_full(d: &DriveSpec, ls: &LevelStructure) -> Result<PhasedHamiltonian, HamiltonianError> {
    require_three(ls)?;
    let (i, j) = d.transition.levels();
    let w = d.omega_uw;
    let wij = ls.omega(i, j);
    let mut h = PhasedHamiltonian::new(vec![SQUID_LEVELS]);
    for s in [1.0, -1.0] {
        h.push(d.rabi, s * w + wij, &flip(i, j));
        h.push(d.rabi, s * w - wij, &flip(j, i));
        h.push(d.diagonal[0], s * w, &flip(i, i));
        h.push(d.diagonal[1], s * w, &flip(j, j));
    }
    Ok(h)
}

/// Ω(|i⟩⟨j| + |j⟩⟨i|): the resonant drive after the rotating-wave approximation.
pub fn h_drive_rwa(d: &DriveSpec, ls: &LevelStructure) -> Result<Operator, HamiltonianError> {
    require_three(ls)?;
    if !d.resonant {
        let (i, j) = d.transition.levels();
        return Err(HamiltonianError::NotResonant {
            transition: d.transition,
            omega_uw: d.omega_uw,
            omega_ij: ls.omega(j, i),
        });
    }
    Ok(rotation_generator(d.transition, d.rabi))
}

/// Ω(|i⟩⟨j| + |j⟩⟨i|) on a single SQUID.
pub fn rotation_generator(transition: Transition, rabi: f64) -> Operator {
    let (i, j) = transition.levels();
    let mut m = DMatrix::zeros(SQUID_LEVELS, SQUID_LEVELS);
    m[(i, j)] = C64::new(rabi, 0.0);
    m[(j, i)] = C64::new(rabi, 0.0);
    Operator::hermitian(m, vec![SQUID_LEVELS]).expect("real symmetric")
}

/// Effective dispersive two-SQUID Hamiltonian with its parameters.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub operator: Operator,
    /// γ = g₀₂²/detuning (rad/s).
    pub gamma: f64,
    /// g₀₂ / |detuning|.
    pub condition: ValidityCondition,
}

/// γ = g₀₂²/detuning.
pub fn dispersive_gamma(g02: f64, detuning: f64) -> f64 {
    g02 * g02 / detuning
}

/// γ[Σ_m (|2⟩_m⟨2| aa† − |0⟩_m⟨0| a†a) + |2⟩_a⟨0|⊗|0⟩_b⟨2| + h.c.] on `[3, 3, N]`.
///
/// aa† is written as a†a + 1 so the top Fock level is not distorted by the
/// truncation.
pub fn h_eff_two_squid(cs: &CouplingSet, detuning: f64, m: &CavityMode) -> Result<EffectiveHamiltonian, HamiltonianError> {
    let gamma = dispersive_gamma(cs.g02(), detuning);
    let n = m.fock_cutoff;
    let dims = [SQUID_LEVELS, SQUID_LEVELS, n];
    let num = m.number();
    let id_c = Operator::identity(&[n])?;
    let aad = num.add(&id_c)?;

    let mut total = Operator::zeros(&dims)?;
    for site in 0..2 {
        let p2 = Operator::embed(&flip(2, 2), site, &[SQUID_LEVELS, SQUID_LEVELS])?;
        let p0 = Operator::embed(&flip(0, 0), site, &[SQUID_LEVELS, SQUID_LEVELS])?;
        total = total.add(&kron(&p2, &aad)?)?.sub(&kron(&p0, &num)?)?;
    }
    let exchange = kron(&flip(2, 0), &flip(0, 2))?;
    let exchange = exchange.add(&exchange.adjoint())?;
    total = total.add(&kron(&exchange, &id_c)?)?;
    let op = Operator::hermitian(total.scaled(gamma).into_entries(), dims.to_vec())?;
    Ok(EffectiveHamiltonian {
        operator: op,
        gamma,
        condition: ValidityCondition::new(cs.g02() / detuning.abs(), DISPERSIVE_RATIO_THRESHOLD),
    })
}

/// γ[Σ_m |2⟩_m⟨2| + |2⟩_a⟨0|⊗|0⟩_b⟨2| + h.c.] on `[3, 3]` (cavity in vacuum).
pub fn h_eff_vacuum(gamma: f64) -> Operator {
    let d = [SQUID_LEVELS, SQUID_LEVELS];
    let p2a = Operator::embed(&flip(2, 2), 0, &d).expect("valid site");
    let p2b = Operator::embed(&flip(2, 2), 1, &d).expect("valid site");
    let x = kron(&flip(2, 0), &flip(0, 2)).expect("small");
    let sum = p2a
        .add(&p2b)
        .and_then(|s| s.add(&x))
        .and_then(|s| s.add(&x.adjoint()))
        .expect("equal dims");
    Operator::hermitian(sum.scaled(gamma).into_entries(), d.to_vec()).expect("real symmetric")
}

/// Two identical SQUIDs sharing one cavity mode through their 0↔2 transitions.
///
/// `cavity_offset` is ω_c − ω₂₀. With γ = g₀₂²/detuning (detuning > 0), the
/// explicit model reduces to [`h_eff_vacuum`] when the cavity sits *below*
/// the transition, i.e. `cavity_offset = −detuning`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSquidCavity {
    pub g02: f64,
    pub cavity_offset: f64,
    pub fock_cutoff: usize,
}

impl TwoSquidCavity {
    /// Model whose dispersive limit has γ = g₀₂²/detuning.
    pub fn for_detuning(g02: f64, detuning: f64, fock_cutoff: usize) -> Self {
        TwoSquidCavity {
            g02,
            cavity_offset: -detuning,
            fock_cutoff,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![SQUID_LEVELS, SQUID_LEVELS, self.fock_cutoff]
    }

    fn raising_terms(&self) -> Result<(Operator, Operator), HamiltonianError> {
        let d = [SQUID_LEVELS, SQUID_LEVELS];
        let s_plus = Operator::embed(&flip(2, 0), 0, &d)?.add(&Operator::embed(&flip(2, 0), 1, &d)?)?;
        let a = annihilation(self.fock_cutoff);
        let lower = kron(&s_plus, &a)?; // a σ⁺
        let upper = lower.adjoint(); // a† σ⁻
        Ok((lower, upper))
    }

    /// g₀₂ Σ_m (e^{−iδt} a|2⟩_m⟨0| + e^{iδt} a†|0⟩_m⟨2|), δ = ω_c − ω₂₀.
    pub fn interaction_picture(&self) -> Result<PhasedHamiltonian, HamiltonianError> {
        let (lower, upper) = self.raising_terms()?;
        let mut h = PhasedHamiltonian::new(self.dims());
        h.push(self.g02, -self.cavity_offset, &lower);
        h.push(self.g02, self.cavity_offset, &upper);
        Ok(h)
    }

    /// δ a†a + g₀₂ Σ_m (a|2⟩_m⟨0| + a†|0⟩_m⟨2|): the same dynamics in the frame
    /// rotating with the cavity offset. States in the two frames differ only by
    /// the photon-number phase e^{−iδ t a†a}.
    pub fn rotating_frame(&self) -> Result<Operator, HamiltonianError> {
        let (lower, upper) = self.raising_terms()?;
        let n = kron(&Operator::identity(&[SQUID_LEVELS, SQUID_LEVELS])?, &number(self.fock_cutoff))?;
        let h = n.scaled(self.cavity_offset).add(&lower.add(&upper)?.scaled(self.g02))?;
        Ok(Operator::hermitian(h.into_entries(), self.dims())?)
    }

    /// a†a on the full space.
    pub fn photon_number(&self) -> Result<Operator, HamiltonianError> {
        Ok(kron(
            &Operator::identity(&[SQUID_LEVELS, SQUID_LEVELS])?,
            &number(self.fock_cutoff),
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{matexp_unitary, StateVector};
    use crate::units::HbarConvention;

    fn ls() -> LevelStructure {
        let w = 2.0 * std::f64::consts::PI;
        LevelStructure::from_frequencies(&[0.0, w * 4.8e9, w * 80e9]).unwrap()
    }

    #[test]
    fn cavity_ladder() {
        let m = CavityMode::new(1.0, 5, 0.0).unwrap();
        let comm = m.annihilation().commutator(&m.creation()).unwrap();
        for k in 0..4 {
            for l in 0..4 {
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((comm.get(k, l) - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        let h2 = h_cavity(&CavityMode::new(3.0, 2, 0.0).unwrap());
        assert!((h2.get(0, 0).re - HBAR * 1.5).abs() < 1e-40);
        assert!((h2.get(1, 1).re - HBAR * 4.5).abs() < 1e-40);
        let n = m.creation().mul(&m.annihilation()).unwrap();
        for k in 0..5 {
            assert!((n.get(k, k).re - k as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn squid_hamiltonian_is_diagonal() {
        let ls = ls();
        let h = h_squid(&ls).unwrap();
        let e = ls.energies();
        assert!((h.trace().re - (e[0] + e[1] + e[2])).abs() < 1e-30);
        let sq = h.mul(&h).unwrap();
        assert_eq!(h.commutator(&sq).unwrap().scale(), 1.0);
        let four = LevelStructure::from_frequencies(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(h_squid(&four), Err(HamiltonianError::LevelCount { .. })));
    }

    #[test]
    fn rwa_matrix_elements() {
        let ls = ls();
        let m = CavityMode::new(ls.omega_20() + 2.0e9, 4, 0.0).unwrap();
        let cs = CouplingSet::from_g02(1.0e8);
        let rwa = h_int_rwa(&cs, &ls, &m).unwrap();
        assert!(rwa.condition.satisfied);
        let t = 3.7e-10;
        let h = rwa.hamiltonian.at(t);
        let delta = m.omega_c() - ls.omega_20();
        for n in 0..3 {
            let el = h.element(&[0, n + 1], &[2, n]).unwrap();
            let want = C64::from_polar(1.0e8 * ((n + 1) as f64).sqrt(), delta * t);
            assert!((el - want).norm() < 1e-6);
        }
        for r in 0..12 {
            for c in 0..12 {
                if r / 4 == 1 || c / 4 == 1 {
                    assert_eq!(h.get(r, c), C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn drive_rwa_rotation() {
        let ls = ls();
        let omega = 1.0e7;
        let d = DriveSpec::resonant(Transition::ZeroTwo, omega, 1e-7, &ls).unwrap();
        let h = h_drive_rwa(&d, &ls).unwrap();
        let t = 0.37e-7;
        let u = matexp_unitary(&h, t, HbarConvention::AngularFrequency).unwrap();
        let (c, s) = ((omega * t).cos(), (omega * t).sin());
        assert!((u.get(0, 0) - C64::new(c, 0.0)).norm() < 1e-12);
        assert!((u.get(2, 0) - C64::new(0.0, -s)).norm() < 1e-12);
        let off = DriveSpec::new(Transition::ZeroTwo, omega, ls.omega_20() * 1.01, 1e-7, &ls).unwrap();
        assert!(matches!(h_drive_rwa(&off, &ls), Err(HamiltonianError::NotResonant { .. })));
    }

    #[test]
    fn vacuum_effective_spectrum() {
        let gamma = 2.5e6;
        let h = h_eff_vacuum(gamma);
        let s22 = StateVector::basis(&[3, 3], &[2, 2]).unwrap();
        let image = s22.apply(&h).unwrap();
        assert!(image.max_abs_diff(&s22.scaled(C64::new(2.0 * gamma, 0.0))).unwrap() < 1e-6);
        let s11 = StateVector::basis(&[3, 3], &[1, 1]).unwrap();
        assert!(s11.apply(&h).unwrap().norm_sqr() < 1e-30);
    }

    #[test]
    fn effective_two_squid_elements() {
        let m = CavityMode::new(1e11, 4, 0.0).unwrap();
        let cs = CouplingSet::from_g02(5e6);
        let eff = h_eff_two_squid(&cs, 1e8, &m).unwrap();
        let g = eff.gamma;
        assert_eq!(g, 5e6 * 5e6 / 1e8);
        let el = |r: [usize; 3], c: [usize; 3]| eff.operator.element(&r, &c).unwrap();
        assert!((el([2, 1, 0], [2, 1, 0]).re - g).abs() < 1e-9 * g);
        assert!((el([2, 0, 0], [0, 2, 0]).re - g).abs() < 1e-9 * g);
        assert_eq!(el([0, 0, 0], [0, 0, 0]).norm(), 0.0);
        // Photon-number dependent Stark shifts.
        assert!((el([2, 1, 2], [2, 1, 2]).re - 3.0 * g).abs() < 1e-9 * g);
        assert!((el([0, 1, 3], [0, 1, 3]).re + 3.0 * g).abs() < 1e-9 * g);
    }
}
