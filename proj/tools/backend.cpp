// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/backend.hpp"

int main(int argc, char** argv) { return nexus::backend::backend_main(argc, argv); }
