// Copyright 2026 The cqed Authors
// SPDX-License-Identifier: Apache-2.0

//! Criterion benchmarks for the simulator kernels; run with `cargo bench -p cqed-bench`.
