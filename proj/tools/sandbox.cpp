// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/frontend/guest.hpp"

int main(int argc, char** argv) { return nexus::frontend::guest_main(argc, argv); }
