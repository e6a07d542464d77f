#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "risbound/channel.hpp"
#include "risbound/common.hpp"
#include "risbound/geometry.hpp"
#include "risbound/ris_codes.hpp"

namespace risbound {

enum class Scenario { rest, exercise };

enum class ParamKind { gain_real, gain_imag, angle, position };

/// One tagged entry of the estimation parameter vector. path -1 is the direct
/// path, otherwise the sensor index. axis follows EulerAngles::axis for angles
/// (0 = z yaw, 1 = y pitch, 2 = x roll) and the Cartesian component for
/// positions.
struct ParamLabel {
  ParamKind kind = ParamKind::gain_real;
  int path = -1;
  int axis = -1;
  std::string name;
};

struct ParamVector {
  Scenario scenario = Scenario::rest;
  Regime regime = Regime::near;
  std::vector<ParamLabel> labels;

  int size() const { return static_cast<int>(labels.size()); }

  std::vector<int> indices_for_path(int path) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i) {
      if (labels[i].path == path) out.push_back(i);
    }
    return out;
  }

  std::vector<int> indices(int path, ParamKind kind) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i) {
      if (labels[i].path == path && labels[i].kind == kind) out.push_back(i);
    }
    return out;
  }

  ParamVector subset(const std::vector<int>& keep) const {
    ParamVector out;
    out.scenario = scenario;
    out.regime = regime;
    for (int i : keep) out.labels.push_back(labels.at(i));
    return out;
  }
};

namespace detail {
inline const char* angle_axis_name(int axis) {
  static const char* names[3] = {"z", "y", "x"};
  return names[axis];
}
inline const char* position_axis_name(int axis) {
  static const char* names[3] = {"x", "y", "z"};
  return names[axis];
}
}  // namespace detail

/// Limbs at rest: eta = [beta0_re, beta0_im, then per sensor Phi (3 angles),
/// beta_re, beta_im]. 12 entries for two sensors.
inline ParamVector scenario1_params(int sensor_count, Regime regime) {
  ParamVector out;
  out.scenario = Scenario::rest;
  out.regime = regime;
  out.labels.push_back({ParamKind::gain_real, -1, -1, "beta0_re"});
  out.labels.push_back({ParamKind::gain_imag, -1, -1, "beta0_im"});
  for (int m = 0; m < sensor_count; ++m) {
    const std::string tag = std::to_string(m + 1);
    for (int a = 0; a < 3; ++a) {
      out.labels.push_back(
          {ParamKind::angle, m, a, "phi" + tag + "_" + detail::angle_axis_name(a)});
    }
    out.labels.push_back({ParamKind::gain_real, m, -1, "beta" + tag + "_re"});
    out.labels.push_back({ParamKind::gain_imag, m, -1, "beta" + tag + "_im"});
  }
  return out;
}

/// During exercises: kappa per sensor = [p (3), Phi (3), beta_re, beta_im].
/// Positions only make sense with spherical wavefronts, so the regime is near.
inline ParamVector scenario2_params(int sensor_count) {
  ParamVector out;
  out.scenario = Scenario::exercise;
  out.regime = Regime::near;
  for (int m = 0; m < sensor_count; ++m) {
    const std::string tag = std::to_string(m + 1);
    for (int a = 0; a < 3; ++a) {
      out.labels.push_back(
          {ParamKind::position, m, a, "p" + tag + "_" + detail::position_axis_name(a)});
    }
    for (int a = 0; a < 3; ++a) {
      out.labels.push_back(
          {ParamKind::angle, m, a, "phi" + tag + "_" + detail::angle_axis_name(a)});
    }
    out.labels.push_back({ParamKind::gain_real, m, -1, "beta" + tag + "_re"});
    out.labels.push_back({ParamKind::gain_imag, m, -1, "beta" + tag + "_im"});
  }
  return out;
}

/// Complex sample derivatives, rows ordered t-major, then antenna, then
/// subcarrier: row = (t * N_U + u) * N + n.
struct Jacobian {
  Eigen::MatrixXcd matrix;
  ParamVector params;
};

/// Symmetric real information matrix over a tagged parameter vector.
struct FimMatrix {
  Eigen::MatrixXd matrix;
  ParamVector params;

  int size() const { return static_cast<int>(matrix.rows()); }

  FimMatrix submatrix(const std::vector<int>& keep) const {
    FimMatrix out;
    out.params = params.subset(keep);
    const int n = static_cast<int>(keep.size());
    out.matrix.resize(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) out.matrix(a, b) = matrix(keep[a], keep[b]);
    }
    return out;
  }
};

/// Factorized sample derivatives. Every derivative of mu separates as
///   d mu_{t,u}[n] / d eta_k = c_k(t) * D(k, u) * x,
/// with c_k(t) the fast-varying code value of the parameter's path (1 for the
/// direct path) and x the pilot magnitude. Both the dense Jacobian and the
/// information matrix are assembled from D.
struct SignalFactors {
  Eigen::MatrixXcd per_antenna;  // parameter count x N_U
  std::vector<int> code_column;  // per parameter; -1 = direct path
};

namespace detail {

inline void factors_near(const SignalModel& model, const ParamVector& param,
                         SignalFactors& out) {
  const double lambda = model.numerology.wavelength_m;
  const double k = kTwoPi / lambda;
  const std::vector<Vec3> antennas = model.receiver_positions();
  const std::size_t n_u = antennas.size();

  // Direct path carries only its complex gain.
  for (int i = 0; i < param.size(); ++i) {
    const ParamLabel& label = param.labels[i];
    if (label.path >= 0) continue;
    if (label.kind != ParamKind::gain_real && label.kind != ParamKind::gain_imag) {
      throw std::invalid_argument("signal_factors: direct path has only gain entries");
    }
    for (std::size_t u = 0; u < n_u; ++u) {
      const double d = (antennas[u] - model.tx_position).norm();
      const Complex base = propagation_phase(d, lambda);
      out.per_antenna(i, u) = label.kind == ParamKind::gain_real ? base : kImag * base;
    }
  }

  for (int m = 0; m < static_cast<int>(model.sensors.size()); ++m) {
    std::array<int, 3> angle_idx{-1, -1, -1};
    std::array<int, 3> pos_idx{-1, -1, -1};
    int gain_re = -1, gain_im = -1;
    bool any = false;
    for (int i = 0; i < param.size(); ++i) {
      const ParamLabel& label = param.labels[i];
      if (label.path != m) continue;
      any = true;
      switch (label.kind) {
        case ParamKind::angle: angle_idx[label.axis] = i; break;
        case ParamKind::position: pos_idx[label.axis] = i; break;
        case ParamKind::gain_real: gain_re = i; break;
        case ParamKind::gain_imag: gain_im = i; break;
      }
    }
    if (!any) continue;

    const RisSensor& sensor = model.sensors[m];
    const std::vector<Vec3> elements = element_positions(sensor.layout, sensor.pose);
    const std::size_t r_count = elements.size();

    // Per-element pose derivatives d p_r / d phi_a = (dQ/dphi_a) s_r.
    std::array<std::vector<Vec3>, 3> lever;
    for (int a = 0; a < 3; ++a) {
      if (angle_idx[a] < 0) continue;
      const RotationMatrix dq = rotation_derivative(sensor.pose.orientation, a);
      lever[a].reserve(r_count);
      for (const Vec3& s : sensor.layout.offsets) lever[a].push_back(dq * s);
    }

    for (std::size_t u = 0; u < n_u; ++u) {
      Complex a_sum{0.0, 0.0};
      std::array<Complex, 3> ang_sum{};
      std::array<Complex, 3> pos_sum{};
      for (std::size_t r = 0; r < r_count; ++r) {
        const Vec3 to_tx = elements[r] - model.tx_position;
        const double d_tx = to_tx.norm();
        const Vec3 to_rx = antennas[u] - elements[r];
        const double d_rx = to_rx.norm();
        if (d_tx == 0.0 || d_rx == 0.0) {
          throw std::invalid_argument("signal_factors: element coincides with endpoint");
        }
        const Complex term = sensor.profile[r] * propagation_phase(d_tx + d_rx, lambda);
        a_sum += term;
        // Gradient of the two-hop length w.r.t. the element position.
        const Vec3 grad = to_tx / d_tx - to_rx / d_rx;
        const Complex deriv = Complex(0.0, -k) * term;
        for (int a = 0; a < 3; ++a) {
          if (angle_idx[a] >= 0) ang_sum[a] += deriv * grad.dot(lever[a][r]);
        }
        for (int a = 0; a < 3; ++a) {
          if (pos_idx[a] >= 0) pos_sum[a] += deriv * grad[a];
        }
      }
      if (gain_re >= 0) out.per_antenna(gain_re, u) = a_sum;
      if (gain_im >= 0) out.per_antenna(gain_im, u) = kImag * a_sum;
      for (int a = 0; a < 3; ++a) {
        if (angle_idx[a] >= 0) out.per_antenna(angle_idx[a], u) = sensor.gain * ang_sum[a];
        if (pos_idx[a] >= 0) out.per_antenna(pos_idx[a], u) = sensor.gain * pos_sum[a];
      }
    }
  }
}

inline void factors_far(const SignalModel& model, const ParamVector& param,
                        SignalFactors& out) {
  const double lambda = model.numerology.wavelength_m;
  const double k = kTwoPi / lambda;
  const std::size_t n_u = model.antenna_count();

  const Direction los = direction_between(model.tx_position, model.receiver.position);
  const SteeringVector a_ub =
      far_field_steering(los, model.receiver.layout.offsets, lambda);
  for (int i = 0; i < param.size(); ++i) {
    const ParamLabel& label = param.labels[i];
    if (label.path >= 0) continue;
    if (label.kind != ParamKind::gain_real && label.kind != ParamKind::gain_imag) {
      throw std::invalid_argument("signal_factors: direct path has only gain entries");
    }
    for (std::size_t u = 0; u < n_u; ++u) {
      const Complex base = a_ub[u] * propagation_phase(los.distance, lambda);
      out.per_antenna(i, u) = label.kind == ParamKind::gain_real ? base : kImag * base;
    }
  }

  for (int m = 0; m < static_cast<int>(model.sensors.size()); ++m) {
    std::array<int, 3> angle_idx{-1, -1, -1};
    int gain_re = -1, gain_im = -1;
    bool any = false;
    for (int i = 0; i < param.size(); ++i) {
      const ParamLabel& label = param.labels[i];
      if (label.path != m) continue;
      any = true;
      switch (label.kind) {
        case ParamKind::angle: angle_idx[label.axis] = i; break;
        case ParamKind::gain_real: gain_re = i; break;
        case ParamKind::gain_imag: gain_im = i; break;
        case ParamKind::position:
          throw std::invalid_argument(
              "signal_factors: position derivatives are undefined in the far field");
      }
    }
    if (!any) continue;

    const RisSensor& sensor = model.sensors[m];
    const RotationMatrix q = rotation_from_euler(sensor.pose.orientation);
    std::vector<Vec3> rotated;
    rotated.reserve(sensor.layout.count());
    for (const Vec3& s : sensor.layout.offsets) rotated.push_back(q * s);

    const Direction incidence =
        direction_between(model.tx_position, sensor.pose.position);
    const Direction departure =
        direction_between(sensor.pose.position, model.receiver.position);
    const SteeringVector a_rb = far_field_steering(incidence, rotated, lambda);
    const SteeringVector a_ru = far_field_steering(departure, rotated, lambda);
    const SteeringVector a_ur =
        far_field_steering(departure, model.receiver.layout.offsets, lambda);
    const Complex bulk =
        propagation_phase(incidence.distance + departure.distance, lambda);
    const Vec3 phase_dir = departure.unit - incidence.unit;
    std::array<RotationMatrix, 3> dq;
    for (int a = 0; a < 3; ++a) {
      if (angle_idx[a] >= 0) dq[a] = rotation_derivative(sensor.pose.orientation, a);
    }

    Complex reflection{0.0, 0.0};
    std::array<Complex, 3> d_reflection{};
    for (std::size_t r = 0; r < rotated.size(); ++r) {
      const Complex term = std::conj(a_ru[r]) * sensor.profile[r] * a_rb[r];
      reflection += term;
      for (int a = 0; a < 3; ++a) {
        if (angle_idx[a] < 0) continue;
        const Vec3 dw = dq[a] * sensor.layout.offsets[r];
        d_reflection[a] += Complex(0.0, k * phase_dir.dot(dw)) * term;
      }
    }

    for (std::size_t u = 0; u < n_u; ++u) {
      const Complex base = a_ur[u] * bulk;
      if (gain_re >= 0) out.per_antenna(gain_re, u) = base * reflection;
      if (gain_im >= 0) out.per_antenna(gain_im, u) = kImag * base * reflection;
      for (int a = 0; a < 3; ++a) {
        if (angle_idx[a] >= 0) {
          out.per_antenna(angle_idx[a], u) = sensor.gain * base * d_reflection[a];
        }
      }
    }
  }
}

}  // namespace detail

inline SignalFactors signal_factors(const SignalModel& model, const ParamVector& param) {
  if (param.regime != model.regime) {
    throw std::invalid_argument("signal_factors: regime mismatch");
  }
  for (const ParamLabel& label : param.labels) {
    if (label.path >= static_cast<int>(model.sensors.size())) {
      throw std::invalid_argument("signal_factors: parameter path out of range");
    }
  }
  SignalFactors out;
  out.per_antenna.setZero(param.size(), static_cast<Eigen::Index>(model.antenna_count()));
  out.code_column.resize(param.labels.size());
  for (int i = 0; i < param.size(); ++i) out.code_column[i] = param.labels[i].path;
  if (model.regime == Regime::near) {
    detail::factors_near(model, param, out);
  } else {
    detail::factors_far(model, param, out);
  }
  return out;
}

inline void check_code_dimensions(const SignalModel& model, const FastVaryingCode& codes) {
  if (codes.sensor_count() != static_cast<int>(model.sensors.size()) ||
      codes.symbol_count() != model.numerology.symbol_count) {
    throw std::invalid_argument("code dimensions do not match the model");
  }
}

/// Expands per-antenna factors into the full dense Jacobian over samples.
inline Jacobian jacobian_from_factors(const SignalModel& model,
                                      const FastVaryingCode& codes,
                                      const SignalFactors& factors,
                                      const ParamVector& param) {
  check_code_dimensions(model, codes);
  const int t_count = model.numerology.symbol_count;
  const int n_count = model.numerology.subcarrier_count;
  const int n_u = static_cast<int>(model.antenna_count());
  const double x = model.numerology.pilot_magnitude;

  Jacobian jac;
  jac.params = param;
  jac.matrix.resize(static_cast<Eigen::Index>(t_count) * n_u * n_count, param.size());
  for (int t = 0; t < t_count; ++t) {
    for (int u = 0; u < n_u; ++u) {
      const Eigen::Index row0 = (static_cast<Eigen::Index>(t) * n_u + u) * n_count;
      for (int p = 0; p < param.size(); ++p) {
        const int col = factors.code_column[p];
        const Complex code = col < 0 ? Complex(1.0, 0.0) : codes.gamma(t, col);
        const Complex value = code * factors.per_antenna(p, u) * x;
        for (int n = 0; n < n_count; ++n) jac.matrix(row0 + n, p) = value;
      }
    }
  }
  return jac;
}

inline Jacobian derivatives_scenario1_near(const SignalModel& model,
                                           const FastVaryingCode& codes,
                                           const ParamVector& param) {
  if (param.scenario != Scenario::rest || param.regime != Regime::near ||
      model.regime != Regime::near) {
    throw std::invalid_argument("derivatives_scenario1_near: regime mismatch");
  }
  return jacobian_from_factors(model, codes, signal_factors(model, param), param);
}

inline Jacobian derivatives_scenario1_far(const SignalModel& model,
                                          const FastVaryingCode& codes,
                                          const ParamVector& param) {
  if (param.scenario != Scenario::rest || param.regime != Regime::far ||
      model.regime != Regime::far) {
    throw std::invalid_argument("derivatives_scenario1_far: regime mismatch");
  }
  return jacobian_from_factors(model, codes, signal_factors(model, param), param);
}

inline Jacobian derivatives_scenario2_near(const SignalModel& model,
                                           const FastVaryingCode& codes,
                                           const ParamVector& param) {
  if (param.scenario != Scenario::exercise || param.regime != Regime::near ||
      model.regime != Regime::near) {
    throw std::invalid_argument("derivatives_scenario2_near: regime mismatch");
  }
  return jacobian_from_factors(model, codes, signal_factors(model, param), param);
}

/// Dispatch on the parameter tags.
inline Jacobian analytic_jacobian(const SignalModel& model, const FastVaryingCode& codes,
                                  const ParamVector& param) {
  if (param.scenario == Scenario::rest) {
    return param.regime == Regime::near
               ? derivatives_scenario1_near(model, codes, param)
               : derivatives_scenario1_far(model, codes, param);
  }
  return derivatives_scenario2_near(model, codes, param);
}

/// [J]_{v,g} = (2 / sigma^2) sum_{t,u,n} Re{ conj(d mu / d eta_v) d mu / d eta_g }.
inline FimMatrix assemble_fim(const Jacobian& jac, double noise_variance) {
  if (noise_variance <= 0.0) {
    throw std::invalid_argument("assemble_fim: noise variance must be positive");
  }
  if (jac.matrix.cols() != jac.params.size()) {
    throw std::invalid_argument("assemble_fim: dimension mismatch");
  }
  const Eigen::MatrixXd gram =
      (2.0 / noise_variance) * (jac.matrix.adjoint() * jac.matrix).real();
  FimMatrix out;
  out.params = jac.params;
  out.matrix = 0.5 * (gram + gram.transpose());
  return out;
}

/// Information matrix straight from the factorized derivatives. The symbol sum
/// collapses to code correlations and the subcarrier sum to the pilot energy,
/// so no per-sample matrix is ever formed. Agrees with
/// assemble_fim(jacobian_from_factors(...)) to roundoff.
inline FimMatrix fim_from_model(const SignalModel& model, const FastVaryingCode& codes,
                                const ParamVector& param, double noise_variance) {
  if (noise_variance <= 0.0) {
    throw std::invalid_argument("fim_from_model: noise variance must be positive");
  }
  check_code_dimensions(model, codes);
  const SignalFactors factors = signal_factors(model, param);
  const int p = param.size();
  const double t_count = static_cast<double>(model.numerology.symbol_count);

  const Eigen::MatrixXcd code_gram = codes.gamma.adjoint() * codes.gamma;
  const Eigen::RowVectorXcd code_sums = codes.gamma.colwise().sum();
  // w(v,g) = sum_u D(v,u) conj(D(g,u)); the assembly needs its conjugate.
  const Eigen::MatrixXcd w = factors.per_antenna * factors.per_antenna.adjoint();

  const double scale = 2.0 / noise_variance * model.numerology.pilot_energy();
  FimMatrix out;
  out.params = param;
  out.matrix.resize(p, p);
  for (int v = 0; v < p; ++v) {
    for (int g = 0; g < p; ++g) {
      const int cv = factors.code_column[v];
      const int cg = factors.code_column[g];
      Complex symbol_sum;
      if (cv < 0 && cg < 0) {
        symbol_sum = Complex(t_count, 0.0);
      } else if (cv < 0) {
        symbol_sum = code_sums(cg);
      } else if (cg < 0) {
        symbol_sum = std::conj(code_sums(cv));
      } else {
        symbol_sum = code_gram(cv, cg);
      }
      out.matrix(v, g) = scale * std::real(symbol_sum * std::conj(w(v, g)));
    }
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

/// Central-difference steps for the oracle below.
struct FdSteps {
  double position_m = 1e-7;
  double angle_rad = 1e-6;
  double gain = 1e-6;
};

/// All noise-free samples in Jacobian row order.
inline Eigen::VectorXcd evaluate_sample_grid(const SignalModel& model,
                                             const FastVaryingCode& codes) {
  const int t_count = model.numerology.symbol_count;
  const int n_count = model.numerology.subcarrier_count;
  const int n_u = static_cast<int>(model.antenna_count());
  Eigen::VectorXcd out(static_cast<Eigen::Index>(t_count) * n_u * n_count);
  if (model.regime == Regime::near) {
    for (int t = 0; t < t_count; ++t) {
      for (int u = 0; u < n_u; ++u) {
        const Eigen::Index row0 = (static_cast<Eigen::Index>(t) * n_u + u) * n_count;
        for (int n = 0; n < n_count; ++n) {
          out(row0 + n) = noise_free_signal(model, codes, t, u, n);
        }
      }
    }
  } else {
    for (int t = 0; t < t_count; ++t) {
      for (int n = 0; n < n_count; ++n) {
        const std::vector<Complex> samples = far_field_signal(model, codes, t, n);
        for (int u = 0; u < n_u; ++u) {
          out((static_cast<Eigen::Index>(t) * n_u + u) * n_count + n) = samples[u];
        }
      }
    }
  }
  return out;
}

/// Independent derivative oracle: central differences of the exact signal
/// evaluators on perturbed model copies. Shares no code with the analytic
/// derivative path.
inline Jacobian fd_oracle(const SignalModel& model, const FastVaryingCode& codes,
                          const ParamVector& param, const FdSteps& steps = {}) {
  if (steps.position_m <= 0.0 || steps.angle_rad <= 0.0 || steps.gain <= 0.0) {
    throw std::invalid_argument("fd_oracle: step sizes must be positive");
  }
  check_code_dimensions(model, codes);
  const Eigen::Index rows = static_cast<Eigen::Index>(model.numerology.symbol_count) *
                            static_cast<Eigen::Index>(model.antenna_count()) *
                            model.numerology.subcarrier_count;
  Jacobian jac;
  jac.params = param;
  jac.matrix.resize(rows, param.size());

  for (int i = 0; i < param.size(); ++i) {
    const ParamLabel& label = param.labels[i];
    SignalModel plus = model;
    SignalModel minus = model;
    double h = 0.0;
    auto gain_of = [](SignalModel& m, int path) -> Complex& {
      return path < 0 ? m.los_gain : m.sensors.at(path).gain;
    };
    switch (label.kind) {
      case ParamKind::gain_real:
        h = steps.gain;
        gain_of(plus, label.path) += Complex(h, 0.0);
        gain_of(minus, label.path) -= Complex(h, 0.0);
        break;
      case ParamKind::gain_imag:
        h = steps.gain;
        gain_of(plus, label.path) += Complex(0.0, h);
        gain_of(minus, label.path) -= Complex(0.0, h);
        break;
      case ParamKind::angle: {
        h = steps.angle_rad;
        const EulerAngles base = model.sensors.at(label.path).pose.orientation;
        plus.sensors[label.path].pose.orientation =
            base.with_axis(label.axis, base.axis(label.axis) + h);
        minus.sensors[label.path].pose.orientation =
            base.with_axis(label.axis, base.axis(label.axis) - h);
        break;
      }
      case ParamKind::position:
        h = steps.position_m;
        plus.sensors.at(label.path).pose.position[label.axis] += h;
        minus.sensors.at(label.path).pose.position[label.axis] -= h;
        break;
    }
    jac.matrix.col(i) =
        (evaluate_sample_grid(plus, codes) - evaluate_sample_grid(minus, codes)) /
        (2.0 * h);
  }
  return jac;
}

}  // namespace risbound
