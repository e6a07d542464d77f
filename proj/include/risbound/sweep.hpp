#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "risbound/bounds.hpp"
#include "risbound/channel.hpp"
#include "risbound/config.hpp"
#include "risbound/fim.hpp"
#include "risbound/geometry.hpp"
#include "risbound/ris_codes.hpp"
#include "risbound/version.hpp"

namespace risbound {

inline const char* scenario_label(Scenario scenario) {
  return scenario == Scenario::rest ? "rest" : "exercise";
}

inline const char* regime_label(Regime regime) {
  return regime == Regime::near ? "near" : "far";
}

/// Deterministic per-run randomness: the slow-varying profile is redrawn for
/// every (seed, aperture, sensor) and the gain phases for every (seed, sensor),
/// so growing the receive array never reshuffles the channel draw.
inline SignalModel build_signal_model(const ExperimentConfig& config, double l_r_m,
                                      int n_u, double f_c_hz, std::uint64_t seed,
                                      Regime regime) {
  const NumerologySettings& num = config.numerology;
  SignalModel model;
  model.numerology =
      make_numerology(f_c_hz, num.subcarrier_count, num.subcarrier_spacing_hz,
                      num.symbol_count, num.noise_psd_dbm_per_hz, num.p_tx_dbm);
  const double wavelength = model.numerology.wavelength_m;

  model.tx_position = config.geometry.p_b_m;
  model.receiver.position = config.geometry.p_u_m;
  model.receiver.layout = paired_grid_layout(
      static_cast<std::size_t>(n_u), config.geometry.rx_spacing_wavelengths * wavelength);

  const ArrayLayout ris_layout =
      square_layout(l_r_m, config.geometry.ris_spacing_wavelengths * wavelength);
  const double g_b = db_to_linear(config.pathloss.g_b_db);
  const double g_u = db_to_linear(config.pathloss.g_u_db);
  const std::uint64_t salt_lr =
      static_cast<std::uint64_t>(std::llround(l_r_m * 1e6));

  for (std::size_t m = 0; m < config.geometry.ris.size(); ++m) {
    const RisPlacement& placement = config.geometry.ris[m];
    RisSensor sensor;
    sensor.layout = ris_layout;
    sensor.pose = Pose{placement.position_m, placement.orientation_rad};
    sensor.profile =
        random_phase_profile(derive_seed(seed, 1, salt_lr, m + 1), ris_layout.count())
            .coefficients();
    const double d_tx = (placement.position_m - config.geometry.p_b_m).norm();
    const double d_rx = (config.geometry.p_u_m - placement.position_m).norm();
    const double magnitude =
        pathloss_gain(d_tx, d_rx, wavelength, g_b, g_u, config.pathloss.q0);
    sensor.gain = std::polar(magnitude, random_phase(derive_seed(seed, 2, m + 1)));
    model.sensors.push_back(std::move(sensor));
  }

  const double d_los = (config.geometry.p_u_m - config.geometry.p_b_m).norm();
  model.los_gain = std::polar(
      pathloss_gain_los(d_los, wavelength, g_b, g_u, config.pathloss.q0),
      random_phase(derive_seed(seed, 2, 0)));
  model.regime = regime;
  finalize_model(model);
  return model;
}

inline bool model_within_fraunhofer(const SignalModel& model) {
  for (const FraunhoferCheck& check : model.fraunhofer) {
    if (!check.all_within()) return false;
  }
  return !model.fraunhofer.empty();
}

inline FastVaryingCode sweep_codes(const ExperimentConfig& config) {
  try {
    return dft_code_assignment(static_cast<int>(config.geometry.ris.size()),
                               config.numerology.symbol_count);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("config: ") + err.what());
  }
}

namespace detail {

template <typename Fn>
void parallel_for(int count, int workers, Fn&& body) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (std::thread& worker : pool) worker.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct SweepPoint {
  double f_c_hz = 0.0;
  double l_r_m = 0.0;
  int n_u = 0;
  std::uint64_t seed = 0;
};

inline std::vector<SweepPoint> enumerate_points(const ExperimentConfig& config) {
  std::vector<SweepPoint> points;
  for (double f_c : config.sweep_frequencies()) {
    for (double l_r : config.sweep.l_r_m) {
      for (int n_u : config.sweep.n_u) {
        for (std::uint64_t seed : config.seeds) {
          points.push_back({f_c, l_r, n_u, seed});
        }
      }
    }
  }
  return points;
}

inline BoundReport base_report(Scenario scenario, Regime regime, const SweepPoint& point,
                               int sensor, bool within) {
  BoundReport report;
  report.scenario = scenario;
  report.regime = regime;
  report.f_c_hz = point.f_c_hz;
  report.l_r_m = point.l_r_m;
  report.n_u = point.n_u;
  report.seed = point.seed;
  report.sensor = sensor;
  report.within_fraunhofer = within;
  return report;
}

inline std::vector<BoundReport> scenario1_point(const ExperimentConfig& config,
                                                const FastVaryingCode& codes,
                                                const SweepPoint& point, Regime regime) {
  const int m_count = static_cast<int>(config.geometry.ris.size());
  const SignalModel model = build_signal_model(config, point.l_r_m, point.n_u,
                                               point.f_c_hz, point.seed, regime);
  const ParamVector params = scenario1_params(m_count, regime);
  const FimMatrix fim =
      fim_from_model(model, codes, params, model.numerology.noise_variance());
  const bool within = model_within_fraunhofer(model);

  std::vector<BoundReport> reports;
  for (int m = 0; m < m_count; ++m) {
    BoundReport report = base_report(Scenario::rest, regime, point, m + 1, within);
    try {
      const Efim efim = scenario1_path_efim(fim, m);
      const IdentifiabilityVerdict verdict =
          identifiability_verdict(efim, config.identifiability_tol);
      report.identifiable = verdict.identifiable;
      report.lambda_max_e = verdict.lambda_max;
      report.lambda_min_e = verdict.lambda_min;
      if (verdict.identifiable) {
        report.oeb_rad = oeb_scenario1(efim, config.identifiability_tol);
      }
    } catch (const SingularNuisanceError&) {
      report.identifiable = false;
    }
    reports.push_back(report);
  }
  return reports;
}

inline std::vector<BoundReport> scenario2_point(const ExperimentConfig& config,
                                                const FastVaryingCode& codes,
                                                const SweepPoint& point) {
  const int m_count = static_cast<int>(config.geometry.ris.size());
  const SignalModel model = build_signal_model(config, point.l_r_m, point.n_u,
                                               point.f_c_hz, point.seed, Regime::near);
  const ParamVector params = scenario2_params(m_count);
  const FimMatrix fim =
      fim_from_model(model, codes, params, model.numerology.noise_variance());
  const bool within = model_within_fraunhofer(model);

  std::vector<BoundReport> reports;
  for (int m = 0; m < m_count; ++m) {
    BoundReport report =
        base_report(Scenario::exercise, Regime::near, point, m + 1, within);
    try {
      const Efim efim = scenario2_path_efim(fim, m);
      const IdentifiabilityVerdict verdict =
          identifiability_verdict(efim, config.identifiability_tol);
      report.identifiable = verdict.identifiable;
      report.lambda_max_e = verdict.lambda_max;
      report.lambda_min_e = verdict.lambda_min;
      if (verdict.identifiable) {
        const PositionOrientationBound bound =
            peb_oeb_scenario2(efim, config.identifiability_tol);
        report.peb_m = bound.peb_m;
        report.oeb_rad = bound.oeb_rad;
      }
    } catch (const SingularNuisanceError&) {
      report.identifiable = false;
    }
    reports.push_back(report);
  }
  return reports;
}

}  // namespace detail

inline std::vector<BoundReport> run_scenario1_sweep(const ExperimentConfig& config,
                                                    Regime regime, int parallel = 1) {
  const FastVaryingCode codes = sweep_codes(config);
  const std::vector<detail::SweepPoint> points = detail::enumerate_points(config);
  std::vector<std::vector<BoundReport>> slots(points.size());
  detail::parallel_for(static_cast<int>(points.size()), parallel, [&](int i) {
    slots[static_cast<std::size_t>(i)] =
        detail::scenario1_point(config, codes, points[static_cast<std::size_t>(i)], regime);
  });
  std::vector<BoundReport> reports;
  for (const auto& slot : slots) reports.insert(reports.end(), slot.begin(), slot.end());
  return reports;
}

inline std::vector<BoundReport> run_scenario2_sweep(const ExperimentConfig& config,
                                                    int parallel = 1) {
  const FastVaryingCode codes = sweep_codes(config);
  const std::vector<detail::SweepPoint> points = detail::enumerate_points(config);
  std::vector<std::vector<BoundReport>> slots(points.size());
  detail::parallel_for(static_cast<int>(points.size()), parallel, [&](int i) {
    slots[static_cast<std::size_t>(i)] =
        detail::scenario2_point(config, codes, points[static_cast<std::size_t>(i)]);
  });
  std::vector<BoundReport> reports;
  for (const auto& slot : slots) reports.insert(reports.end(), slot.begin(), slot.end());
  return reports;
}

struct FraunhoferRow {
  double f_c_hz = 0.0;
  double l_r_m = 0.0;
  double d_f_m = 0.0;
};

inline std::vector<FraunhoferRow> run_fraunhofer_curve(const ExperimentConfig& config) {
  const FraunhoferSettings& settings = config.fraunhofer;
  std::vector<FraunhoferRow> rows;
  for (double f_c : settings.f_c_hz) {
    const double wavelength = kSpeedOfLight / f_c;
    for (int i = 0;; ++i) {
      const double l_r = settings.l_r_min_m + i * settings.l_r_step_m;
      if (l_r > settings.l_r_max_m + 0.5 * settings.l_r_step_m) break;
      rows.push_back(
          {f_c, l_r, fraunhofer_distance(square_aperture_diameter(l_r), wavelength)});
    }
  }
  return rows;
}

// CSV output. Fixed %.12e rendering keeps reruns byte-identical.

inline std::string format_sci(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.12e", value);
  return buffer;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) row += ',';
    row += csv_escape(fields[i]);
  }
  row += "\r\n";
  return row;
}

inline std::string fraunhofer_csv(const std::vector<FraunhoferRow>& rows) {
  std::string out = csv_row({"f_c_hz", "l_r_m", "d_f_m"});
  for (const FraunhoferRow& row : rows) {
    out += csv_row({format_sci(row.f_c_hz), format_sci(row.l_r_m), format_sci(row.d_f_m)});
  }
  return out;
}

namespace detail {

inline std::vector<std::string> report_prefix(const BoundReport& report) {
  return {scenario_label(report.scenario),
          regime_label(report.regime),
          format_sci(report.f_c_hz),
          format_sci(report.l_r_m),
          std::to_string(report.n_u),
          std::to_string(report.seed),
          std::to_string(report.sensor),
          report.identifiable ? "true" : "false",
          format_sci(report.lambda_max_e),
          format_sci(report.lambda_min_e)};
}

}  // namespace detail

inline std::string scenario1_csv(const std::vector<BoundReport>& reports) {
  std::string out =
      csv_row({"scenario", "regime", "f_c_hz", "l_r_m", "n_u", "seed", "sensor",
               "identifiable", "lambda_max_e", "lambda_min_e", "oeb_rad",
               "within_fraunhofer"});
  for (const BoundReport& report : reports) {
    std::vector<std::string> fields = detail::report_prefix(report);
    fields.push_back(report.oeb_rad ? format_sci(*report.oeb_rad) : "");
    fields.push_back(report.within_fraunhofer ? "true" : "false");
    out += csv_row(fields);
  }
  return out;
}

inline std::string scenario2_csv(const std::vector<BoundReport>& reports) {
  std::string out =
      csv_row({"scenario", "regime", "f_c_hz", "l_r_m", "n_u", "seed", "sensor",
               "identifiable", "lambda_max_e", "lambda_min_e", "peb_m", "oeb_rad",
               "within_fraunhofer"});
  for (const BoundReport& report : reports) {
    std::vector<std::string> fields = detail::report_prefix(report);
    fields.push_back(report.peb_m ? format_sci(*report.peb_m) : "");
    fields.push_back(report.oeb_rad ? format_sci(*report.oeb_rad) : "");
    fields.push_back(report.within_fraunhofer ? "true" : "false");
    out += csv_row(fields);
  }
  return out;
}

inline std::string reference_curves_csv(const ExperimentConfig& config) {
  std::string out = csv_row({"label", "value", "unit"});
  for (const ReferenceCurve& curve : config.reference_curves) {
    out += csv_row({curve.label, format_sci(curve.value), curve.unit});
  }
  return out;
}

inline Json make_manifest(const ExperimentConfig& config, const std::string& command,
                          const std::vector<std::string>& outputs, double wall_ms) {
  Json manifest;
  manifest["tool"] = "risbound";
  manifest["version"] = kVersion;
  manifest["command"] = command;
  manifest["config_fnv1a64"] = config_hash_hex(config);
  manifest["seeds"] = config.seeds;
  manifest["outputs"] = outputs;
  manifest["wall_ms"] = wall_ms;
  manifest["config"] = config_to_json(config);
  return manifest;
}

// Validation suite: quick self-checks over the configured physics, reduced
// grids where a full sweep would be slow. Each check names the module it
// guards so a failure points at the right place.

struct ValidationCheck {
  std::string name;
  std::string module;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const {
    for (const ValidationCheck& check : checks) {
      if (!check.pass) return false;
    }
    return !checks.empty();
  }

  std::string render() const {
    std::string out;
    int failed = 0;
    for (const ValidationCheck& check : checks) {
      out += check.pass ? "[ ok ] " : "[FAIL] ";
      out += check.module + "/" + check.name;
      if (!check.detail.empty()) out += ": " + check.detail;
      out += "\n";
      if (!check.pass) ++failed;
    }
    out += std::to_string(checks.size()) + " checks, " + std::to_string(failed) +
           " failed\n";
    return out;
  }
};

using JacobianProvider = std::function<Jacobian(
    const SignalModel&, const FastVaryingCode&, const ParamVector&)>;

namespace detail {

template <typename Fn>
void run_check(std::vector<ValidationCheck>& out, const char* name, const char* module,
               Fn&& body) {
  ValidationCheck check;
  check.name = name;
  check.module = module;
  try {
    body(check);
  } catch (const std::exception& err) {
    check.pass = false;
    check.detail = err.what();
  }
  out.push_back(check);
}

inline std::string sci3(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3e", value);
  return buffer;
}

/// Small model for derivative and invariant checks: configured physics, but a
/// 4x4 aperture and a short pilot so finite differences stay cheap.
inline SignalModel reduced_model(const ExperimentConfig& config, Regime regime, int n_u,
                                 int per_side, std::uint64_t seed) {
  ExperimentConfig small = config;
  small.numerology.subcarrier_count = 8;
  small.numerology.symbol_count =
      std::max(static_cast<int>(config.geometry.ris.size()) + 1, 4);
  const double wavelength = kSpeedOfLight / config.numerology.f_c_hz;
  const double side = per_side * config.geometry.ris_spacing_wavelengths * wavelength;
  return build_signal_model(small, side, n_u, config.numerology.f_c_hz, seed, regime);
}

inline FastVaryingCode reduced_codes(const ExperimentConfig& config) {
  const int m_count = static_cast<int>(config.geometry.ris.size());
  return dft_code_assignment(m_count, std::max(m_count + 1, 4));
}

inline double max_column_error(const Jacobian& analytic, const Jacobian& fd) {
  double worst = 0.0;
  for (int i = 0; i < analytic.matrix.cols(); ++i) {
    const double diff = (analytic.matrix.col(i) - fd.matrix.col(i)).norm();
    const double scale = std::max(analytic.matrix.col(i).norm(), fd.matrix.col(i).norm());
    worst = std::max(worst, scale < 1e-25 ? diff : diff / scale);
  }
  return worst;
}

inline void check_jacobian_fd(ValidationCheck& check, const ExperimentConfig& config,
                              const JacobianProvider& provider, const SignalModel& model,
                              const FastVaryingCode& codes, const ParamVector& params) {
  const Jacobian analytic = provider(model, codes, params);
  const Jacobian fd = fd_oracle(model, codes, params, config.fd_steps);
  const double worst = max_column_error(analytic, fd);
  check.pass = worst < 1e-6;
  check.detail = "max column error " + sci3(worst) + " over " +
                 std::to_string(params.size()) + " parameters";
}

}  // namespace detail

inline ValidationReport run_validation_suite(const ExperimentConfig& config,
                                             const JacobianProvider& provider = {}) {
  using detail::run_check;
  using detail::sci3;

  const JacobianProvider jacobian =
      provider ? provider
               : JacobianProvider([](const SignalModel& model, const FastVaryingCode& codes,
                                     const ParamVector& params) {
                   return analytic_jacobian(model, codes, params);
                 });

  ValidationReport report;
  const int m_count = static_cast<int>(config.geometry.ris.size());
  const std::uint64_t seed = config.seeds.front();

  run_check(report.checks, "numerology-invariants", "channel", [&](ValidationCheck& check) {
    const NumerologySettings& n = config.numerology;
    const OfdmNumerology num =
        make_numerology(n.f_c_hz, n.subcarrier_count, n.subcarrier_spacing_hz,
                        n.symbol_count, n.noise_psd_dbm_per_hz, n.p_tx_dbm);
    const double fl = num.wavelength_m * num.f_c_hz;
    const bool wavelength_ok = std::abs(fl - kSpeedOfLight) < 1e-3;
    const bool noise_ok =
        num.noise_variance() > 0.0 &&
        std::abs(num.noise_variance() -
                 num.noise_psd_w_per_hz * num.subcarrier_spacing_hz) == 0.0;
    const bool pilot_ok = num.pilot_energy() > 0.0;
    check.pass = wavelength_ok && noise_ok && pilot_ok;
    check.detail = "lambda f_c = " + sci3(fl) + " m/s, noise variance " +
                   sci3(num.noise_variance()) + " W";
  });

  run_check(report.checks, "code-constraints", "ris-codes", [&](ValidationCheck& check) {
    const FastVaryingCode codes =
        dft_code_assignment(m_count, config.numerology.symbol_count);
    const CodeConstraintReport residuals = verify_code_constraints(codes);
    check.pass = residuals.within(1e-12);
    check.detail = "column sum " + sci3(residuals.max_column_sum) + ", energy dev " +
                   sci3(residuals.max_energy_deviation) + ", cross " +
                   sci3(residuals.max_cross_correlation);
  });

  run_check(report.checks, "rotation-derivative-fd", "geometry", [&](ValidationCheck& check) {
    std::mt19937_64 rng(derive_seed(seed, 7));
    std::uniform_real_distribution<double> angle(-1.5, 1.5);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const EulerAngles angles(angle(rng), angle(rng), angle(rng));
      for (int axis = 0; axis < 3; ++axis) {
        const EulerAngles plus = angles.with_axis(axis, angles.axis(axis) + h);
        const EulerAngles minus = angles.with_axis(axis, angles.axis(axis) - h);
        const RotationMatrix fd =
            (rotation_from_euler(plus) - rotation_from_euler(minus)) / (2.0 * h);
        worst = std::max(
            worst, (rotation_derivative(angles, axis) - fd).cwiseAbs().maxCoeff());
      }
    }
    check.pass = worst < 1e-6;
    check.detail = "max entry error " + sci3(worst) + " over 20 poses";
  });

  const FastVaryingCode small_codes = detail::reduced_codes(config);

  // A millimetre-wave carrier puts ~1e4 rad on every propagation phase, so a
  // central difference loses eps * phase / h to rounding before any physics
  // enters. The derivative algebra does not depend on the carrier; compare at
  // one where the quotient is clean.
  ExperimentConfig fd_config = config;
  fd_config.numerology.f_c_hz = std::min(config.numerology.f_c_hz, 1e10);

  run_check(report.checks, "jacobian-fd-near-rest", "fim", [&](ValidationCheck& check) {
    const SignalModel model = detail::reduced_model(fd_config, Regime::near, 2, 4, seed);
    detail::check_jacobian_fd(check, fd_config, jacobian, model, small_codes,
                              scenario1_params(m_count, Regime::near));
  });

  run_check(report.checks, "jacobian-fd-near-exercise", "fim", [&](ValidationCheck& check) {
    const SignalModel model = detail::reduced_model(fd_config, Regime::near, 2, 4, seed);
    detail::check_jacobian_fd(check, fd_config, jacobian, model, small_codes,
                              scenario2_params(m_count));
  });

  run_check(report.checks, "jacobian-fd-far-rest", "fim", [&](ValidationCheck& check) {
    const SignalModel model = detail::reduced_model(fd_config, Regime::far, 2, 4, seed);
    detail::check_jacobian_fd(check, fd_config, jacobian, model, small_codes,
                              scenario1_params(m_count, Regime::far));
  });

  run_check(report.checks, "regime-consistency", "channel", [&](ValidationCheck& check) {
    // One sensor, 3x3 aperture, endpoints pushed to 1000x the boundary along
    // the configured directions. There the two evaluators must agree.
    const double wavelength = kSpeedOfLight / config.numerology.f_c_hz;
    const double spacing = config.geometry.ris_spacing_wavelengths * wavelength;
    const ArrayLayout layout = square_layout(3.0 * spacing, spacing);
    const double boundary =
        fraunhofer_distance(square_aperture_diameter(layout.side_m), wavelength);
    const double range = 1000.0 * std::max(boundary, wavelength);

    const RisPlacement& placement = config.geometry.ris.front();
    const Vec3 to_tx = (config.geometry.p_b_m - placement.position_m).normalized();
    const Vec3 to_rx = (config.geometry.p_u_m - placement.position_m).normalized();

    SignalModel near_model;
    near_model.numerology = make_numerology(
        config.numerology.f_c_hz, 4, config.numerology.subcarrier_spacing_hz, 2,
        config.numerology.noise_psd_dbm_per_hz, config.numerology.p_tx_dbm);
    near_model.tx_position = placement.position_m + range * to_tx;
    near_model.receiver.position = placement.position_m + range * to_rx;
    near_model.receiver.layout = paired_grid_layout(2, 0.5 * wavelength);
    RisSensor sensor;
    sensor.layout = layout;
    sensor.pose = Pose{placement.position_m, placement.orientation_rad};
    sensor.profile = random_phase_profile(derive_seed(seed, 3), layout.count()).coefficients();
    const double g_b = db_to_linear(config.pathloss.g_b_db);
    const double g_u = db_to_linear(config.pathloss.g_u_db);
    sensor.gain = std::polar(
        pathloss_gain(range, range, wavelength, g_b, g_u, config.pathloss.q0),
        random_phase(derive_seed(seed, 4)));
    near_model.sensors.push_back(sensor);
    const double d_los = (near_model.receiver.position - near_model.tx_position).norm();
    near_model.los_gain = std::polar(
        pathloss_gain_los(d_los, wavelength, g_b, g_u, config.pathloss.q0),
        random_phase(derive_seed(seed, 5)));
    near_model.regime = Regime::near;
    finalize_model(near_model);

    SignalModel far_model = near_model;
    far_model.regime = Regime::far;
    finalize_model(far_model);

    const FastVaryingCode codes = dft_code_assignment(1, 2);
    double worst = 0.0;
    for (int t = 0; t < near_model.numerology.symbol_count; ++t) {
      for (int n = 0; n < near_model.numerology.subcarrier_count; ++n) {
        const std::vector<Complex> far_values = far_field_signal(far_model, codes, t, n);
        for (std::size_t u = 0; u < near_model.antenna_count(); ++u) {
          const Complex near_value = noise_free_signal(near_model, codes, t, u, n);
          worst = std::max(worst,
                           std::abs(near_value - far_values[u]) / std::abs(near_value));
        }
      }
    }
    check.pass = worst < 1e-3;
    check.detail = "max relative gap " + sci3(worst) + " at " + sci3(range) +
                   " m (boundary " + sci3(boundary) + " m)";
  });

  run_check(report.checks, "far-field-nullity", "bounds", [&](ValidationCheck& check) {
    const SignalModel model = detail::reduced_model(config, Regime::far, 4, 4, seed);
    const ParamVector params = scenario1_params(m_count, Regime::far);
    const FimMatrix fim =
        fim_from_model(model, small_codes, params, model.numerology.noise_variance());
    double worst = 0.0;
    for (int m = 0; m < m_count; ++m) {
      const Efim efim = scenario1_path_efim(fim, m);
      const std::vector<int> angle_idx = fim.params.indices(m, ParamKind::angle);
      const Eigen::MatrixXd phi_block = fim.submatrix(angle_idx).matrix;
      const double denom = std::max(phi_block.norm(), 1e-300);
      worst = std::max(worst, efim.matrix.norm() / denom);
    }
    check.pass = worst < 1e-9;
    check.detail = "max |EFIM|/|J_phi| = " + sci3(worst);
  });

  run_check(report.checks, "near-field-single-antenna", "bounds", [&](ValidationCheck& check) {
    const SignalModel model = detail::reduced_model(config, Regime::near, 1, 4, seed);
    const ParamVector params = scenario1_params(m_count, Regime::near);
    const FimMatrix fim =
        fim_from_model(model, small_codes, params, model.numerology.noise_variance());
    const Efim efim = scenario1_path_efim(fim, 0);
    const std::vector<int> angle_idx = fim.params.indices(0, ParamKind::angle);
    const double denom = std::max(fim.submatrix(angle_idx).matrix.norm(), 1e-300);
    const double ratio = efim.matrix.norm() / denom;
    check.pass = ratio < 1e-9;
    check.detail = "|EFIM|/|J_phi| = " + sci3(ratio);
  });

  run_check(report.checks, "near-field-identifiable", "bounds", [&](ValidationCheck& check) {
    const SignalModel model = detail::reduced_model(config, Regime::near, 4, 4, seed);
    const ParamVector params = scenario1_params(m_count, Regime::near);
    const FimMatrix fim =
        fim_from_model(model, small_codes, params, model.numerology.noise_variance());
    const Efim efim = scenario1_path_efim(fim, 0);
    const IdentifiabilityVerdict verdict =
        identifiability_verdict(efim, config.identifiability_tol);
    check.pass = verdict.identifiable;
    check.detail = "lambda_min/lambda_max = " +
                   sci3(verdict.lambda_min / std::max(verdict.lambda_max, 1e-300));
  });

  // Structural invariants on a nontrivial near-field instance.
  const SignalModel structural_model = detail::reduced_model(config, Regime::near, 4, 4, seed);
  const ParamVector structural_params = scenario1_params(m_count, Regime::near);
  const FimMatrix structural_fim =
      fim_from_model(structural_model, small_codes, structural_params,
                     structural_model.numerology.noise_variance());

  run_check(report.checks, "fim-symmetry", "fim", [&](ValidationCheck& check) {
    const double gap =
        (structural_fim.matrix - structural_fim.matrix.transpose()).cwiseAbs().maxCoeff();
    const double scale = std::max(structural_fim.matrix.cwiseAbs().maxCoeff(), 1e-300);
    check.pass = gap <= 1e-12 * scale;
    check.detail = "max asymmetry " + sci3(gap);
  });

  run_check(report.checks, "fim-psd", "fim", [&](ValidationCheck& check) {
    const auto [ev_max, ev_min] = eigen_extremes(structural_fim.matrix);
    check.pass = ev_min >= -1e-9 * std::max(ev_max, 0.0);
    check.detail = "lambda_min " + sci3(ev_min) + ", lambda_max " + sci3(ev_max);
  });

  run_check(report.checks, "gain-block-isotropy", "fim", [&](ValidationCheck& check) {
    double worst = 0.0;
    for (int path = -1; path < m_count; ++path) {
      const std::vector<int> re_idx =
          structural_fim.params.indices(path, ParamKind::gain_real);
      const std::vector<int> im_idx =
          structural_fim.params.indices(path, ParamKind::gain_imag);
      if (re_idx.empty() || im_idx.empty()) continue;
      const double j_rr = structural_fim.matrix(re_idx[0], re_idx[0]);
      const double j_ii = structural_fim.matrix(im_idx[0], im_idx[0]);
      const double j_ri = structural_fim.matrix(re_idx[0], im_idx[0]);
      const double scale = std::max(std::abs(j_rr), 1e-300);
      worst = std::max(worst, std::abs(j_rr - j_ii) / scale);
      worst = std::max(worst, std::abs(j_ri) / scale);
    }
    check.pass = worst < 1e-9;
    check.detail = "max gain-block residual " + sci3(worst);
  });

  run_check(report.checks, "code-separability", "fim", [&](ValidationCheck& check) {
    double cross = 0.0;
    double diag = 0.0;
    for (int v = 0; v < structural_fim.size(); ++v) {
      diag = std::max(diag, std::abs(structural_fim.matrix(v, v)));
      for (int g = 0; g < structural_fim.size(); ++g) {
        if (structural_fim.params.labels[v].path != structural_fim.params.labels[g].path) {
          cross = std::max(cross, std::abs(structural_fim.matrix(v, g)));
        }
      }
    }
    check.pass = cross <= 1e-9 * std::max(diag, 1e-300);
    check.detail = "max cross-path entry " + sci3(cross) + " vs diag " + sci3(diag);
  });

  run_check(report.checks, "snr-homogeneity", "fim", [&](ValidationCheck& check) {
    SignalModel boosted = structural_model;
    boosted.numerology.pilot_magnitude *= std::sqrt(2.0);
    const FimMatrix doubled = fim_from_model(
        boosted, small_codes, structural_params, boosted.numerology.noise_variance());
    const double scale = std::max(structural_fim.matrix.cwiseAbs().maxCoeff(), 1e-300);
    const double gap =
        (doubled.matrix - 2.0 * structural_fim.matrix).cwiseAbs().maxCoeff() / (2.0 * scale);
    check.pass = gap < 1e-9;
    check.detail = "max relative gap " + sci3(gap) + " after sqrt(2) pilot scaling";
  });

  return report;
}

}  // namespace risbound
