#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "risbound/fim.hpp"
#include "risbound/geometry.hpp"

namespace risbound {

using Json = nlohmann::ordered_json;

/// Raised for malformed or inconsistent configuration input. The CLI maps it
/// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NumerologySettings {
  double f_c_hz = 1e11;
  int subcarrier_count = 256;
  double subcarrier_spacing_hz = 120e3;
  int symbol_count = 16;
  double noise_psd_dbm_per_hz = -174.0;
  double p_tx_dbm = 23.0;
};

struct RisPlacement {
  Vec3 position_m = Vec3::Zero();
  EulerAngles orientation_rad;
};

struct GeometrySettings {
  Vec3 p_b_m{0.0, 0.0, 4.0};
  Vec3 p_u_m{2.0, 3.0, 4.0};
  std::vector<RisPlacement> ris;
  double ris_spacing_wavelengths = 0.5;
  double rx_spacing_wavelengths = 0.5;
};

struct PathlossSettings {
  double q0 = 0.285;
  double g_b_db = 20.0;
  double g_u_db = 20.0;
};

struct SweepSettings {
  std::vector<int> n_u{1, 2, 4, 8, 16, 32, 64};
  std::vector<double> l_r_m{0.03, 0.05, 0.08};
  std::vector<double> f_c_hz;  // empty = use numerology.f_c_hz
};

struct FraunhoferSettings {
  std::vector<double> f_c_hz{1e10, 1e11};
  double l_r_min_m = 0.005;
  double l_r_max_m = 0.08;
  double l_r_step_m = 0.0025;
};

/// User-supplied comparison constants (external device or algorithm errors)
/// echoed alongside sweep output; never baked into the library.
struct ReferenceCurve {
  std::string label;
  double value = 0.0;
  std::string unit;
};

struct ExperimentConfig {
  NumerologySettings numerology;
  GeometrySettings geometry;
  PathlossSettings pathloss;
  SweepSettings sweep;
  FraunhoferSettings fraunhofer;
  std::vector<std::uint64_t> seeds;
  std::string scenario = "both";  // rest | exercise | both
  std::vector<ReferenceCurve> reference_curves;
  double identifiability_tol = 1e-9;
  FdSteps fd_steps;

  std::vector<double> sweep_frequencies() const {
    return sweep.f_c_hz.empty() ? std::vector<double>{numerology.f_c_hz} : sweep.f_c_hz;
  }
};

inline ExperimentConfig default_config() {
  ExperimentConfig config;
  config.geometry.ris.push_back(
      {Vec3{2.0, 2.0, 4.0}, EulerAngles{0.1, 0.2, 0.1}});
  config.geometry.ris.push_back(
      {Vec3{2.0, 2.3, 4.0}, EulerAngles{0.15, 0.12, 0.1}});
  for (std::uint64_t s = 1; s <= 11; ++s) config.seeds.push_back(s);
  return config;
}

namespace detail {

inline void require_keys(const Json& j, const char* block,
                         const std::vector<std::string>& allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const std::string& key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string("config: unknown key '") + item.key() + "' in " +
                        block);
    }
  }
}

inline double as_double(const Json& j, const char* context) {
  if (!j.is_number()) {
    throw ConfigError(std::string("config: expected a number for ") + context);
  }
  return j.get<double>();
}

inline int as_int(const Json& j, const char* context) {
  if (!j.is_number_integer()) {
    throw ConfigError(std::string("config: expected an integer for ") + context);
  }
  return j.get<int>();
}

inline Vec3 as_vec3(const Json& j, const char* context) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string("config: expected [x, y, z] for ") + context);
  }
  return Vec3(as_double(j[0], context), as_double(j[1], context),
              as_double(j[2], context));
}

inline EulerAngles as_angles(const Json& j, const char* context) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string("config: expected [yaw_z, pitch_y, roll_x] for ") +
                      context);
  }
  return EulerAngles(as_double(j[0], context), as_double(j[1], context),
                     as_double(j[2], context));
}

template <typename T, typename Fn>
std::vector<T> as_list(const Json& j, const char* context, Fn convert) {
  if (!j.is_array()) {
    throw ConfigError(std::string("config: expected a list for ") + context);
  }
  std::vector<T> out;
  for (const Json& item : j) out.push_back(convert(item, context));
  return out;
}

}  // namespace detail

/// Overlays a parsed document onto the built-in defaults. Unknown keys are
/// rejected so unit-suffix typos fail loudly.
inline ExperimentConfig config_from_json(const Json& doc) {
  using detail::as_angles;
  using detail::as_double;
  using detail::as_int;
  using detail::as_list;
  using detail::as_vec3;
  using detail::require_keys;

  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(doc, "top level",
               {"numerology", "geometry", "pathloss", "sweep", "fraunhofer", "seeds",
                "scenario", "reference_curves", "identifiability_tol", "fd_steps"});

  ExperimentConfig config = default_config();

  if (doc.contains("numerology")) {
    const Json& j = doc["numerology"];
    require_keys(j, "numerology",
                 {"f_c_hz", "subcarrier_count", "subcarrier_spacing_hz", "symbol_count",
                  "noise_psd_dbm_per_hz", "p_tx_dbm"});
    NumerologySettings& n = config.numerology;
    if (j.contains("f_c_hz")) n.f_c_hz = as_double(j["f_c_hz"], "numerology.f_c_hz");
    if (j.contains("subcarrier_count")) {
      n.subcarrier_count = as_int(j["subcarrier_count"], "numerology.subcarrier_count");
    }
    if (j.contains("subcarrier_spacing_hz")) {
      n.subcarrier_spacing_hz =
          as_double(j["subcarrier_spacing_hz"], "numerology.subcarrier_spacing_hz");
    }
    if (j.contains("symbol_count")) {
      n.symbol_count = as_int(j["symbol_count"], "numerology.symbol_count");
    }
    if (j.contains("noise_psd_dbm_per_hz")) {
      n.noise_psd_dbm_per_hz =
          as_double(j["noise_psd_dbm_per_hz"], "numerology.noise_psd_dbm_per_hz");
    }
    if (j.contains("p_tx_dbm")) n.p_tx_dbm = as_double(j["p_tx_dbm"], "numerology.p_tx_dbm");
  }

  if (doc.contains("geometry")) {
    const Json& j = doc["geometry"];
    require_keys(j, "geometry",
                 {"p_b_m", "p_u_m", "ris", "ris_spacing_wavelengths",
                  "rx_spacing_wavelengths"});
    GeometrySettings& g = config.geometry;
    if (j.contains("p_b_m")) g.p_b_m = as_vec3(j["p_b_m"], "geometry.p_b_m");
    if (j.contains("p_u_m")) g.p_u_m = as_vec3(j["p_u_m"], "geometry.p_u_m");
    if (j.contains("ris")) {
      if (!j["ris"].is_array() || j["ris"].empty()) {
        throw ConfigError("config: geometry.ris must be a nonempty list");
      }
      g.ris.clear();
      for (const Json& sensor : j["ris"]) {
        require_keys(sensor, "geometry.ris[]", {"p_m", "phi_rad"});
        if (!sensor.contains("p_m") || !sensor.contains("phi_rad")) {
          throw ConfigError("config: geometry.ris entries need p_m and phi_rad");
        }
        g.ris.push_back({as_vec3(sensor["p_m"], "geometry.ris[].p_m"),
                         as_angles(sensor["phi_rad"], "geometry.ris[].phi_rad")});
      }
    }
    if (j.contains("ris_spacing_wavelengths")) {
      g.ris_spacing_wavelengths =
          as_double(j["ris_spacing_wavelengths"], "geometry.ris_spacing_wavelengths");
    }
    if (j.contains("rx_spacing_wavelengths")) {
      g.rx_spacing_wavelengths =
          as_double(j["rx_spacing_wavelengths"], "geometry.rx_spacing_wavelengths");
    }
  }

  if (doc.contains("pathloss")) {
    const Json& j = doc["pathloss"];
    require_keys(j, "pathloss", {"q0", "g_b_db", "g_u_db"});
    if (j.contains("q0")) config.pathloss.q0 = as_double(j["q0"], "pathloss.q0");
    if (j.contains("g_b_db")) config.pathloss.g_b_db = as_double(j["g_b_db"], "pathloss.g_b_db");
    if (j.contains("g_u_db")) config.pathloss.g_u_db = as_double(j["g_u_db"], "pathloss.g_u_db");
  }

  if (doc.contains("sweep")) {
    const Json& j = doc["sweep"];
    require_keys(j, "sweep", {"n_u", "l_r_m", "f_c_hz"});
    if (j.contains("n_u")) {
      config.sweep.n_u = as_list<int>(j["n_u"], "sweep.n_u", detail::as_int);
    }
    if (j.contains("l_r_m")) {
      config.sweep.l_r_m = as_list<double>(j["l_r_m"], "sweep.l_r_m", detail::as_double);
    }
    if (j.contains("f_c_hz")) {
      config.sweep.f_c_hz =
          as_list<double>(j["f_c_hz"], "sweep.f_c_hz", detail::as_double);
    }
  }

  if (doc.contains("fraunhofer")) {
    const Json& j = doc["fraunhofer"];
    require_keys(j, "fraunhofer", {"f_c_hz", "l_r_min_m", "l_r_max_m", "l_r_step_m"});
    if (j.contains("f_c_hz")) {
      config.fraunhofer.f_c_hz =
          as_list<double>(j["f_c_hz"], "fraunhofer.f_c_hz", detail::as_double);
    }
    if (j.contains("l_r_min_m")) {
      config.fraunhofer.l_r_min_m = as_double(j["l_r_min_m"], "fraunhofer.l_r_min_m");
    }
    if (j.contains("l_r_max_m")) {
      config.fraunhofer.l_r_max_m = as_double(j["l_r_max_m"], "fraunhofer.l_r_max_m");
    }
    if (j.contains("l_r_step_m")) {
      config.fraunhofer.l_r_step_m = as_double(j["l_r_step_m"], "fraunhofer.l_r_step_m");
    }
  }

  if (doc.contains("seeds")) {
    if (!doc["seeds"].is_array() || doc["seeds"].empty()) {
      throw ConfigError("config: seeds must be a nonempty list");
    }
    config.seeds.clear();
    for (const Json& s : doc["seeds"]) {
      if (!s.is_number_integer() || s.get<long long>() < 0) {
        throw ConfigError("config: seeds must be nonnegative integers");
      }
      config.seeds.push_back(s.get<std::uint64_t>());
    }
  }

  if (doc.contains("scenario")) {
    if (!doc["scenario"].is_string()) throw ConfigError("config: scenario must be a string");
    config.scenario = doc["scenario"].get<std::string>();
  }

  if (doc.contains("reference_curves")) {
    if (!doc["reference_curves"].is_array()) {
      throw ConfigError("config: reference_curves must be a list");
    }
    config.reference_curves.clear();
    for (const Json& curve : doc["reference_curves"]) {
      require_keys(curve, "reference_curves[]", {"label", "value", "unit"});
      if (!curve.contains("label") || !curve.contains("value") ||
          !curve.contains("unit") || !curve["label"].is_string() ||
          !curve["unit"].is_string()) {
        throw ConfigError("config: reference curves need label, value, unit");
      }
      config.reference_curves.push_back(
          {curve["label"].get<std::string>(),
           as_double(curve["value"], "reference_curves[].value"),
           curve["unit"].get<std::string>()});
    }
  }

  if (doc.contains("identifiability_tol")) {
    config.identifiability_tol =
        as_double(doc["identifiability_tol"], "identifiability_tol");
  }

  if (doc.contains("fd_steps")) {
    const Json& j = doc["fd_steps"];
    require_keys(j, "fd_steps", {"position_m", "angle_rad", "gain"});
    if (j.contains("position_m")) {
      config.fd_steps.position_m = as_double(j["position_m"], "fd_steps.position_m");
    }
    if (j.contains("angle_rad")) {
      config.fd_steps.angle_rad = as_double(j["angle_rad"], "fd_steps.angle_rad");
    }
    if (j.contains("gain")) config.fd_steps.gain = as_double(j["gain"], "fd_steps.gain");
  }

  return config;
}

inline void validate_config(const ExperimentConfig& config) {
  const NumerologySettings& n = config.numerology;
  if (n.f_c_hz <= 0.0) throw ConfigError("config: numerology.f_c_hz must be positive");
  if (n.subcarrier_count < 1) throw ConfigError("config: subcarrier_count must be >= 1");
  if (n.subcarrier_spacing_hz <= 0.0) {
    throw ConfigError("config: subcarrier_spacing_hz must be positive");
  }
  if (n.symbol_count < 1) throw ConfigError("config: symbol_count must be >= 1");
  if (config.geometry.ris.empty()) throw ConfigError("config: at least one sensor");
  if (config.geometry.ris_spacing_wavelengths <= 0.0 ||
      config.geometry.rx_spacing_wavelengths <= 0.0) {
    throw ConfigError("config: element spacings must be positive");
  }
  for (const RisPlacement& ris : config.geometry.ris) {
    if ((ris.position_m - config.geometry.p_b_m).norm() == 0.0 ||
        (ris.position_m - config.geometry.p_u_m).norm() == 0.0) {
      throw ConfigError("config: sensor coincides with an endpoint");
    }
  }
  if ((config.geometry.p_b_m - config.geometry.p_u_m).norm() == 0.0) {
    throw ConfigError("config: transmitter and receiver coincide");
  }
  for (int n_u : config.sweep.n_u) {
    if (n_u < 1) throw ConfigError("config: sweep.n_u entries must be >= 1");
  }
  if (config.sweep.n_u.empty()) throw ConfigError("config: sweep.n_u must be nonempty");
  for (double l : config.sweep.l_r_m) {
    if (l <= 0.0) throw ConfigError("config: sweep.l_r_m entries must be positive");
  }
  if (config.sweep.l_r_m.empty()) throw ConfigError("config: sweep.l_r_m must be nonempty");
  for (double f : config.sweep_frequencies()) {
    if (f <= 0.0) throw ConfigError("config: sweep.f_c_hz entries must be positive");
  }
  const FraunhoferSettings& fr = config.fraunhofer;
  if (fr.l_r_min_m <= 0.0 || fr.l_r_max_m < fr.l_r_min_m || fr.l_r_step_m <= 0.0) {
    throw ConfigError("config: invalid fraunhofer length range");
  }
  for (double f : fr.f_c_hz) {
    if (f <= 0.0) throw ConfigError("config: fraunhofer.f_c_hz entries must be positive");
  }
  if (fr.f_c_hz.empty()) throw ConfigError("config: fraunhofer.f_c_hz must be nonempty");
  if (config.seeds.empty()) throw ConfigError("config: seeds must be nonempty");
  if (config.scenario != "rest" && config.scenario != "exercise" &&
      config.scenario != "both") {
    throw ConfigError("config: scenario must be rest, exercise, or both");
  }
  if (config.identifiability_tol <= 0.0) {
    throw ConfigError("config: identifiability_tol must be positive");
  }
  if (config.fd_steps.position_m <= 0.0 || config.fd_steps.angle_rad <= 0.0 ||
      config.fd_steps.gain <= 0.0) {
    throw ConfigError("config: fd_steps must be positive");
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& err) {
    throw ConfigError(std::string("config: parse error: ") + err.what());
  }
  ExperimentConfig config = config_from_json(doc);
  validate_config(config);
  return config;
}

/// Canonical serialization; also the hashing input, so formatting of the
/// source file does not matter.
inline Json config_to_json(const ExperimentConfig& config) {
  Json doc;
  doc["numerology"] = {{"f_c_hz", config.numerology.f_c_hz},
                       {"subcarrier_count", config.numerology.subcarrier_count},
                       {"subcarrier_spacing_hz", config.numerology.subcarrier_spacing_hz},
                       {"symbol_count", config.numerology.symbol_count},
                       {"noise_psd_dbm_per_hz", config.numerology.noise_psd_dbm_per_hz},
                       {"p_tx_dbm", config.numerology.p_tx_dbm}};
  Json ris = Json::array();
  for (const RisPlacement& sensor : config.geometry.ris) {
    ris.push_back({{"p_m", {sensor.position_m.x(), sensor.position_m.y(),
                            sensor.position_m.z()}},
                   {"phi_rad", {sensor.orientation_rad.yaw_z, sensor.orientation_rad.pitch_y,
                                sensor.orientation_rad.roll_x}}});
  }
  doc["geometry"] = {
      {"p_b_m", {config.geometry.p_b_m.x(), config.geometry.p_b_m.y(),
                 config.geometry.p_b_m.z()}},
      {"p_u_m", {config.geometry.p_u_m.x(), config.geometry.p_u_m.y(),
                 config.geometry.p_u_m.z()}},
      {"ris", ris},
      {"ris_spacing_wavelengths", config.geometry.ris_spacing_wavelengths},
      {"rx_spacing_wavelengths", config.geometry.rx_spacing_wavelengths}};
  doc["pathloss"] = {{"q0", config.pathloss.q0},
                     {"g_b_db", config.pathloss.g_b_db},
                     {"g_u_db", config.pathloss.g_u_db}};
  doc["sweep"] = {{"n_u", config.sweep.n_u},
                  {"l_r_m", config.sweep.l_r_m},
                  {"f_c_hz", config.sweep_frequencies()}};
  doc["fraunhofer"] = {{"f_c_hz", config.fraunhofer.f_c_hz},
                       {"l_r_min_m", config.fraunhofer.l_r_min_m},
                       {"l_r_max_m", config.fraunhofer.l_r_max_m},
                       {"l_r_step_m", config.fraunhofer.l_r_step_m}};
  doc["seeds"] = config.seeds;
  doc["scenario"] = config.scenario;
  Json curves = Json::array();
  for (const ReferenceCurve& curve : config.reference_curves) {
    curves.push_back(
        {{"label", curve.label}, {"value", curve.value}, {"unit", curve.unit}});
  }
  doc["reference_curves"] = curves;
  doc["identifiability_tol"] = config.identifiability_tol;
  doc["fd_steps"] = {{"position_m", config.fd_steps.position_m},
                     {"angle_rad", config.fd_steps.angle_rad},
                     {"gain", config.fd_steps.gain}};
  return doc;
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::string config_hash_hex(const ExperimentConfig& config) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0')
      << fnv1a64(config_to_json(config).dump(2));
  return out.str();
}

}  // namespace risbound
