// Copyright 2026 The Nexus Authors.
// SPDX-License-Identifier: Apache-2.0

#include "nexus/backend/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "nexus/common/error.hpp"

namespace nexus::backend {

using json = nlohmann::json;

namespace {

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!j[key].is_number_unsigned()) throw Error(Errc::kSchemaError, path + key + ": expected an unsigned integer");
  }
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::kSchemaError, path + key + ": wrong type");
  }
}

void read_u64(const json& j, const char* key, std::uint64_t& out, const std::string& path) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_unsigned()) throw Error(Errc::kSchemaError, path + key + ": expected an unsigned integer");
  out = j[key].get<std::uint64_t>();
}

sandbox::RestoreModel parse_restore(const json& j, sandbox::RestoreModel base, const std::string& path) {
  if (!j.is_object()) throw Error(Errc::kSchemaError, path + ": expected an object");
  read_u64(j, "base_us", base.base_us, path + ".");
  read_u64(j, "per_page_us", base.per_page_us, path + ".");
  read_u64(j, "working_set_pages_coupled", base.working_set_pages_coupled, path + ".");
  read(j, "offload_ws_reduction", base.offload_ws_reduction, path + ".");
  try {
    base.validate();
  } catch (const Error&) {
    throw Error(Errc::kSchemaError, path + ".offload_ws_reduction: must be in [0, 1)");
  }
  return base;
}

json restore_json(const sandbox::RestoreModel& r) {
  return {{"base_us", r.base_us},
          {"per_page_us", r.per_page_us},
          {"working_set_pages_coupled", r.working_set_pages_coupled},
          {"offload_ws_reduction", r.offload_ws_reduction}};
}

}  // namespace

const FunctionConfig* BackendConfig::find(const std::string& name) const {
  for (auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

void BackendConfig::validate() const {
  if (max_active_sandboxes == 0) throw Error(Errc::kSchemaError, "max_active_sandboxes: must be > 0");
  if (ring_capacity_bytes == 0 || (ring_capacity_bytes & (ring_capacity_bytes - 1)) != 0) {
    throw Error(Errc::kSchemaError, "ring_capacity_bytes: must be a power of two");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const auto& f = functions[i];
    const auto path = "functions[" + std::to_string(i) + "]";
    if (f.name.empty()) throw Error(Errc::kSchemaError, path + ".name: must be non-empty");
    if (!seen.insert(f.name).second) throw Error(Errc::kSchemaError, path + ".name: duplicate function");
    if (f.rate_limit_bps == 0) throw Error(Errc::kSchemaError, path + ".rate_limit_bps: must be > 0");
    if (f.clients.empty()) throw Error(Errc::kSchemaError, path + ".clients: must name at least one client");
    f.restore.validate();
  }
}

BackendConfig parse_config(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::kSchemaError, "config: not a JSON object");
  BackendConfig c;
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) throw Error(Errc::kSchemaError, "mode: expected a string");
    c.mode = sandbox::parse_mode(j["mode"].get<std::string>());
  }
  read(j, "listen_ingress", c.listen_ingress, "");
  read(j, "store", c.store, "");
  if (j.contains("region_dir")) {
    std::string d;
    read(j, "region_dir", d, "");
    c.region_dir = d;
  }
  read(j, "sandbox_binary", c.sandbox_binary, "");
  read(j, "max_active_sandboxes", c.max_active_sandboxes, "");
  read(j, "warm_pool_per_function", c.warm_pool_per_function, "");
  read_u64(j, "region_cap_bytes", c.region_cap_bytes, "");
  read_u64(j, "ring_capacity_bytes", c.ring_capacity_bytes, "");
  read_u64(j, "max_object_bytes", c.max_object_bytes, "");
  read(j, "writeback_retries", c.writeback_retries, "");
  read_u64(j, "writeback_backoff_us", c.writeback_backoff_us, "");
  read_u64(j, "spawn_timeout_us", c.spawn_timeout_us, "");
  read(j, "verify_checksums", c.verify_checksums, "");
  read(j, "capture_frames", c.capture_frames, "");

  if (j.contains("restore")) c.default_restore = parse_restore(j["restore"], c.default_restore, "restore");
  const auto& default_restore = c.default_restore;
  if (j.contains("fabric")) {
    const auto& f = j["fabric"];
    read_u64(f, "per_request_us", c.fabric.per_request_us, "fabric.");
    read_u64(f, "per_mib_us", c.fabric.per_mib_us, "fabric.");
    read_u64(f, "rate_bps", c.fabric.rate_bps, "fabric.");
  }
  if (j.contains("functions")) {
    if (!j["functions"].is_array()) throw Error(Errc::kSchemaError, "functions: expected an array");
    for (std::size_t i = 0; i < j["functions"].size(); ++i) {
      const auto& fj = j["functions"][i];
      const auto path = "functions[" + std::to_string(i) + "].";
      if (!fj.is_object()) throw Error(Errc::kSchemaError, path.substr(0, path.size() - 1) + ": expected an object");
      FunctionConfig f;
      f.restore = default_restore;
      if (!fj.contains("name")) throw Error(Errc::kSchemaError, path + "name: required");
      read(fj, "name", f.name, path);
      read_u64(fj, "rate_limit_bps", f.rate_limit_bps, path);
      read(fj, "credentials_token", f.credentials_token, path);
      read(fj, "clients", f.clients, path);
      if (fj.contains("restore")) f.restore = parse_restore(fj["restore"], default_restore, path + "restore");
      c.functions.push_back(std::move(f));
    }
  }
  c.validate();
  return c;
}

BackendConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kFilesystemError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const BackendConfig& c) {
  json j;
  j["mode"] = std::string(sandbox::mode_name(c.mode));
  j["listen_ingress"] = c.listen_ingress;
  j["store"] = c.store;
  j["region_dir"] = c.region_dir.string();
  if (!c.sandbox_binary.empty()) j["sandbox_binary"] = c.sandbox_binary;
  j["max_active_sandboxes"] = c.max_active_sandboxes;
  j["warm_pool_per_function"] = c.warm_pool_per_function;
  j["region_cap_bytes"] = c.region_cap_bytes;
  j["ring_capacity_bytes"] = c.ring_capacity_bytes;
  j["max_object_bytes"] = c.max_object_bytes;
  j["writeback_retries"] = c.writeback_retries;
  j["writeback_backoff_us"] = c.writeback_backoff_us;
  j["spawn_timeout_us"] = c.spawn_timeout_us;
  j["verify_checksums"] = c.verify_checksums;
  j["capture_frames"] = c.capture_frames;
  j["fabric"] = {{"per_request_us", c.fabric.per_request_us},
                 {"per_mib_us", c.fabric.per_mib_us},
                 {"rate_bps", c.fabric.rate_bps}};
  j["restore"] = restore_json(c.default_restore);
  j["functions"] = json::array();
  for (auto& f : c.functions) {
    j["functions"].push_back({{"name", f.name},
                              {"rate_limit_bps", f.rate_limit_bps},
                              {"credentials_token", f.credentials_token},
                              {"clients", f.clients},
                              {"restore", restore_json(f.restore)}});
  }
  return j.dump(2);
}

}  // namespace nexus::backend
