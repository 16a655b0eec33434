// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulsecomp/pulse_codes.hpp"
#include "pulsecomp/rng.hpp"
#include "pulsecomp/scatter_model.hpp"

namespace pulsecomp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON field access with path-carrying errors. Every validation failure
// reports the full field path, e.g. "params.code.w".

inline const json& require_field(const json& j, const std::string& path,
                                 const std::string& key) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key + ": missing field");
  return *it;
}

inline double require_number(const json& j, const std::string& path,
                             const std::string& key) {
  const json& f = require_field(j, path, key);
  if (!f.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return f.get<double>();
}

inline std::int64_t require_integer(const json& j, const std::string& path,
                                    const std::string& key) {
  const json& f = require_field(j, path, key);
  if (!f.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return f.get<std::int64_t>();
}

inline std::string require_string(const json& j, const std::string& path,
                                  const std::string& key) {
  const json& f = require_field(j, path, key);
  if (!f.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return f.get<std::string>();
}

inline double number_or(const json& j, const std::string& path, const std::string& key,
                        double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return require_number(j, path, key);
}

inline std::int64_t integer_or(const json& j, const std::string& path,
                               const std::string& key, std::int64_t fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return require_integer(j, path, key);
}

inline std::vector<double> require_number_array(const json& j, const std::string& path,
                                                const std::string& key) {
  const json& f = require_field(j, path, key);
  if (!f.is_array() || f.empty()) {
    throw ConfigError(path + "." + key + ": expected a non-empty array of numbers");
  }
  std::vector<double> out;
  out.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f[i].is_number()) {
      throw ConfigError(path + "." + key + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(f[i].get<double>());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pulse code and variance field specs as they appear inside configs.

// {"type":"boxcar","d":16,"w":2} | {"type":"dirac","d":16}
// | {"type":"barker","n":13,"pad_to":16} (pad_to optional)
// | {"type":"explicit","label":..., "re":[...], "im":[...]}
// | {"type":"twin","of":{...},"stream":0} (random-phase twin; stream picks
//   the phase substream under the run seed)
inline PulseCode code_from_spec(const json& spec, const std::string& path,
                                std::uint64_t seed) {
  const std::string type = require_string(spec, path, "type");
  try {
    if (type == "boxcar") {
      return boxcar(require_integer(spec, path, "d"), require_integer(spec, path, "w"));
    }
    if (type == "dirac") {
      return dirac(require_integer(spec, path, "d"));
    }
    if (type == "barker") {
      PulseCode code = barker(static_cast<int>(require_integer(spec, path, "n")));
      const std::int64_t pad = integer_or(spec, path, "pad_to", code.d());
      if (pad != code.d()) code = zero_pad(code, pad);
      return code;
    }
    if (type == "explicit") {
      return code_from_json(spec);
    }
    if (type == "twin") {
      const PulseCode inner =
          code_from_spec(require_field(spec, path, "of"), path + ".of", seed);
      const std::uint64_t stream =
          static_cast<std::uint64_t>(integer_or(spec, path, "stream", 0));
      RngStream rng(seed, 0x5057494EULL + stream);
      return random_phase_twin(inner, rng);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".type: unknown code type '" + type + "'");
}

// {"type":"constant","sigma0_sq":1.0} | {"type":"pointwise","values":[...]}
// | {"type":"partition","windows":4,"sigma2":[...]} (raised-cosine windows)
inline VarianceField field_from_spec(const json& spec, const std::string& path,
                                     Eigen::Index d) {
  const std::string type = require_string(spec, path, "type");
  try {
    if (type == "constant") {
      return VarianceField::constant(require_number(spec, path, "sigma0_sq"));
    }
    if (type == "pointwise") {
      const auto values = require_number_array(spec, path, "values");
      if (static_cast<Eigen::Index>(values.size()) != d) {
        throw ConfigError(path + ".values: expected " + std::to_string(d) + " entries");
      }
      return VarianceField::pointwise(
          Eigen::Map<const RVector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    if (type == "partition") {
      const std::int64_t windows = require_integer(spec, path, "windows");
      const auto sigma2 = require_number_array(spec, path, "sigma2");
      if (static_cast<std::int64_t>(sigma2.size()) != windows) {
        throw ConfigError(path + ".sigma2: expected one entry per window");
      }
      return VarianceField::partition(
          Eigen::Map<const RVector>(sigma2.data(), static_cast<Eigen::Index>(sigma2.size())),
          smooth_partition(d, windows));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".type: unknown field type '" + type + "'");
}

// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string experiment;
  std::filesystem::path output_dir = "out";
  json params = json::object();
};

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.experiment = require_string(j, "config", "experiment");
  const std::int64_t seed = integer_or(j, "config", "seed", 1);
  if (seed < 0) throw ConfigError("config.seed: must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const std::int64_t workers = integer_or(j, "config", "workers", 1);
  if (workers < 1) throw ConfigError("config.workers: must be >= 1");
  cfg.workers = static_cast<int>(workers);
  if (j.contains("output_dir")) {
    cfg.output_dir = require_string(j, "config", "output_dir");
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("config.params: expected an object");
    cfg.params = j.at("params");
  }
  static const char* known[] = {"experiment", "seed", "workers", "output_dir", "params"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("config." + key + ": unknown field");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config: invalid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

}  // namespace pulsecomp
