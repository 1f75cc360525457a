// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/harness/cli.hpp"

int main(int argc, char** argv) { return nexus::harness::harness_main(argc, argv); }
