// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace nexus::frontend {

/// Entry point of the sandbox process: waits out the modeled restore,
/// attaches, then serves invocations with the synthetic handler until the
/// backend goes away.
int guest_main(int argc, char** argv);

}  // namespace nexus::frontend
