// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Cavity-QED simulation of rf-SQUID qubits.
//!
//! The crate is layered bottom-up: [`hilbert`] supplies dense tensor-product
//! linear algebra, [`squid`] solves the single-SQUID level structure,
//! [`hamiltonians`] and [`dynamics`] build and propagate the coupled
//! SQUID–cavity models, [`protocols`] encodes the pulse schedules,
//! [`verify`] measures how well they work, and [`feasibility`] does the
//! cavity-lifetime arithmetic.

pub mod dynamics;
pub mod feasibility;
pub mod hamiltonians;
pub mod hilbert;
pub mod protocols;
pub mod squid;
pub mod units;
pub mod verify;

pub use hilbert::{HilbertError, Operator, StateVector, C64};
pub use squid::{LevelStructure, SquidParams};
pub use units::HbarConvention;
