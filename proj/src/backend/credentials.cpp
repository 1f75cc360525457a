// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/credentials.hpp"

#include <fmt/format.h>

#include "nexus/common/error.hpp"
#include "nexus/common/fnv.hpp"

namespace nexus::backend {

std::string token_fingerprint(const std::string& token) {
  return fmt::format("{:016x}", fnv1a64(as_bytes(token)));
}

void CredentialStore::set(const std::string& function, std::string token) {
  std::lock_guard lock(mu_);
  tokens_[function] = std::move(token);
}

void CredentialStore::erase(const std::string& function) {
  std::lock_guard lock(mu_);
  tokens_.erase(function);
}

std::string CredentialStore::resolve(const std::string& function) const {
  UseObserver obs;
  std::string token;
  {
    std::lock_guard lock(mu_);
    auto it = tokens_.find(function);
    if (it == tokens_.end()) throw Error(Errc::kUnknownFunction, function);
    token = it->second;
    obs = observer_;
  }
  if (obs) obs(function, token);
  return token;
}

std::string CredentialStore::fingerprint(const std::string& function) const {
  std::lock_guard lock(mu_);
  auto it = tokens_.find(function);
  if (it == tokens_.end()) throw Error(Errc::kUnknownFunction, function);
  return token_fingerprint(it->second);
}

std::map<std::string, std::string> CredentialStore::fingerprints() const {
  std::lock_guard lock(mu_);
  std::map<std::string, std::string> out;
  for (auto& [f, t] : tokens_) out[f] = token_fingerprint(t);
  return out;
}

void CredentialStore::set_observer(UseObserver obs) {
  std::lock_guard lock(mu_);
  observer_ = std::move(obs);
}

}  // namespace nexus::backend
