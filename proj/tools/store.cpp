// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/store/server.hpp"

int main(int argc, char** argv) { return nexus::store::store_main(argc, argv); }
