// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace nexus::harness {

/// `harness` command-line entry point: replay, sweep, gen-trace, faults.
int harness_main(int argc, char** argv);

}  // namespace nexus::harness
