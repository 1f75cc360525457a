// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>

namespace nexus::backend {

/// Function credentials, held only inside the backend. Nothing here is
/// ever serialized toward a sandbox; the status report shows fingerprints.
class CredentialStore {
 public:
  using UseObserver = std::function<void(const std::string& function, const std::string& token)>;

  void set(const std::string& function, std::string token);
  void erase(const std::string& function);
  /// Throws UnknownFunction.
  std::string resolve(const std::string& function) const;
  /// FNV-1a-64 of the current token, hex.
  std::string fingerprint(const std::string& function) const;
  std::map<std::string, std::string> fingerprints() const;

  /// Called on every resolve; lets tests observe which token was used.
  void set_observer(UseObserver obs);

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> tokens_;
  UseObserver observer_;
};

std::string token_fingerprint(const std::string& token);

}  // namespace nexus::backend
