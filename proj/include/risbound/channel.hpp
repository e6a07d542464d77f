#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "risbound/common.hpp"
#include "risbound/geometry.hpp"
#include "risbound/ris_codes.hpp"

namespace risbound {

enum class Regime { near, far };

/// Pilot grid and noise bookkeeping. The pilot is constant modulus across
/// subcarriers and symbols, x = sqrt(P_tx / N), so total transmit power per
/// symbol is P_tx. Noise variance per received sample is N0 * subcarrier
/// spacing.
struct OfdmNumerology {
  double f_c_hz = 0.0;
  double wavelength_m = 0.0;
  int subcarrier_count = 0;
  double subcarrier_spacing_hz = 0.0;
  int symbol_count = 0;
  double noise_psd_w_per_hz = 0.0;
  double pilot_magnitude = 0.0;

  double noise_variance() const { return noise_psd_w_per_hz * subcarrier_spacing_hz; }
  double pilot_energy() const {
    return static_cast<double>(subcarrier_count) * pilot_magnitude * pilot_magnitude;
  }
};

inline OfdmNumerology make_numerology(double f_c_hz, int subcarrier_count,
                                      double subcarrier_spacing_hz, int symbol_count,
                                      double noise_psd_dbm_per_hz, double p_tx_dbm) {
  if (f_c_hz <= 0.0 || subcarrier_count < 1 || subcarrier_spacing_hz <= 0.0 ||
      symbol_count < 1) {
    throw std::invalid_argument("make_numerology: invalid pilot grid");
  }
  OfdmNumerology out;
  out.f_c_hz = f_c_hz;
  out.wavelength_m = kSpeedOfLight / f_c_hz;
  out.subcarrier_count = subcarrier_count;
  out.subcarrier_spacing_hz = subcarrier_spacing_hz;
  out.symbol_count = symbol_count;
  out.noise_psd_w_per_hz = dbm_to_watts(noise_psd_dbm_per_hz);
  out.pilot_magnitude =
      std::sqrt(dbm_to_watts(p_tx_dbm) / static_cast<double>(subcarrier_count));
  return out;
}

/// One reflective path: element grid, pose, static phase profile, complex gain.
struct RisSensor {
  ArrayLayout layout;
  Pose pose;
  std::vector<Complex> profile;  // unit modulus, one per element
  Complex gain{0.0, 0.0};
};

/// Receive antenna grid. Offsets are kept in the global frame directly (the
/// receiver orientation is not a model parameter).
struct ReceiverArray {
  Vec3 position = Vec3::Zero();
  ArrayLayout layout;
};

/// Near-field boundary bookkeeping for one sensor: is each hop inside the
/// reactive region bounded by 2 D^2 / lambda?
struct FraunhoferCheck {
  double boundary_m = 0.0;
  double tx_range_m = 0.0;
  double rx_range_m = 0.0;
  bool tx_within = false;
  bool rx_within = false;

  bool all_within() const { return tx_within && rx_within; }
};

struct SteeringVector {
  std::vector<Complex> entries;
  Regime regime = Regime::near;

  std::size_t size() const { return entries.size(); }
  const Complex& operator[](std::size_t i) const { return entries[i]; }
};

/// Full noise-free transmission setup: one transmit antenna, a receive grid,
/// and M reflective sensor paths plus the direct path.
struct SignalModel {
  OfdmNumerology numerology;
  Vec3 tx_position = Vec3::Zero();
  ReceiverArray receiver;
  std::vector<RisSensor> sensors;
  Complex los_gain{0.0, 0.0};
  Regime regime = Regime::near;
  std::vector<FraunhoferCheck> fraunhofer;  // one per sensor, see finalize_model

  std::size_t antenna_count() const { return receiver.layout.count(); }

  std::vector<Vec3> receiver_positions() const {
    std::vector<Vec3> out;
    out.reserve(receiver.layout.count());
    for (const Vec3& o : receiver.layout.offsets) out.push_back(receiver.position + o);
    return out;
  }
};

/// Checks structural invariants and records the per-sensor Fraunhofer ranges.
inline void finalize_model(SignalModel& model) {
  if (model.receiver.layout.count() < 1) {
    throw std::invalid_argument("finalize_model: receiver needs at least one antenna");
  }
  if (model.numerology.wavelength_m <= 0.0) {
    throw std::invalid_argument("finalize_model: numerology not initialized");
  }
  model.fraunhofer.clear();
  for (const RisSensor& sensor : model.sensors) {
    if (sensor.profile.size() != sensor.layout.count()) {
      throw std::invalid_argument("finalize_model: profile length != element count");
    }
    FraunhoferCheck check;
    check.boundary_m = fraunhofer_distance(square_aperture_diameter(sensor.layout.side_m),
                                           model.numerology.wavelength_m);
    check.tx_range_m = (sensor.pose.position - model.tx_position).norm();
    check.rx_range_m = (sensor.pose.position - model.receiver.position).norm();
    check.tx_within = check.tx_range_m < check.boundary_m;
    check.rx_within = check.rx_range_m < check.boundary_m;
    model.fraunhofer.push_back(check);
  }
}

inline Complex propagation_phase(double distance_m, double wavelength_m) {
  return std::exp(Complex(0.0, -kTwoPi * distance_m / wavelength_m));
}

/// Spherical-wavefront steering: entry r = exp(-j 2 pi d_r / lambda) with d_r
/// the exact source-to-element distance.
inline SteeringVector near_field_steering(const Vec3& source,
                                          const std::vector<Vec3>& element_positions,
                                          double wavelength_m) {
  SteeringVector out;
  out.regime = Regime::near;
  out.entries.reserve(element_positions.size());
  for (const Vec3& p : element_positions) {
    const double d = (p - source).norm();
    if (d == 0.0) {
      throw std::invalid_argument("near_field_steering: coincident source and element");
    }
    out.entries.push_back(propagation_phase(d, wavelength_m));
  }
  return out;
}

/// Plane-wave steering: entry r = exp(-j (2 pi / lambda) unit^T s_r). Offsets
/// are about the array reference point, expressed in the global frame.
inline SteeringVector far_field_steering(const Direction& direction,
                                         const std::vector<Vec3>& offsets,
                                         double wavelength_m) {
  SteeringVector out;
  out.regime = Regime::far;
  out.entries.reserve(offsets.size());
  for (const Vec3& s : offsets) {
    out.entries.push_back(
        std::exp(Complex(0.0, -kTwoPi / wavelength_m * direction.unit.dot(s))));
  }
  return out;
}

/// Amplitude of the two-hop reflected path,
///   lambda^2 sqrt(G_B G_U) / (32 pi d1^(q0+1) d2^(q0+1)).
/// Gains are linear (not dB).
inline double pathloss_gain(double d1_m, double d2_m, double wavelength_m, double g_b,
                            double g_u, double q0) {
  if (d1_m <= 0.0 || d2_m <= 0.0) {
    throw std::invalid_argument("pathloss_gain: nonpositive distance");
  }
  return wavelength_m * wavelength_m * std::sqrt(g_b) * std::sqrt(g_u) /
         (32.0 * kPi * std::pow(d1_m, q0 + 1.0) * std::pow(d2_m, q0 + 1.0));
}

/// Direct-path amplitude: same form with the single hop distance.
inline double pathloss_gain_los(double d_m, double wavelength_m, double g_b, double g_u,
                                double q0) {
  if (d_m <= 0.0) {
    throw std::invalid_argument("pathloss_gain_los: nonpositive distance");
  }
  return wavelength_m * wavelength_m * std::sqrt(g_b) * std::sqrt(g_u) /
         (32.0 * kPi * std::pow(d_m, q0 + 1.0));
}

/// Element sum of one sensor path toward antenna u with exact distances:
///   sum_r Gamma_r exp(-j 2 pi (d_{B,r} + d_{r,u}) / lambda).
inline Complex path_element_sum(const SignalModel& model, std::size_t sensor_index,
                                const Vec3& antenna_position) {
  const RisSensor& sensor = model.sensors.at(sensor_index);
  const double lambda = model.numerology.wavelength_m;
  const std::vector<Vec3> elements = element_positions(sensor.layout, sensor.pose);
  Complex sum{0.0, 0.0};
  for (std::size_t r = 0; r < elements.size(); ++r) {
    const double d_tx = (elements[r] - model.tx_position).norm();
    const double d_rx = (antenna_position - elements[r]).norm();
    if (d_tx == 0.0 || d_rx == 0.0) {
      throw std::invalid_argument("path_element_sum: element coincides with endpoint");
    }
    sum += sensor.profile[r] * propagation_phase(d_tx + d_rx, lambda);
  }
  return sum;
}

/// mu_{t,u}[n]: direct term plus one reflected term per sensor, spherical
/// wavefronts throughout. Indices are zero based.
inline Complex noise_free_signal(const SignalModel& model, const FastVaryingCode& codes,
                                 int t, int u, int n) {
  if (model.regime != Regime::near) {
    throw std::invalid_argument("noise_free_signal: model regime is not near");
  }
  if (t < 0 || t >= model.numerology.symbol_count ||
      u < 0 || u >= static_cast<int>(model.antenna_count()) ||
      n < 0 || n >= model.numerology.subcarrier_count) {
    throw std::out_of_range("noise_free_signal: index out of range");
  }
  if (codes.sensor_count() != static_cast<int>(model.sensors.size()) ||
      codes.symbol_count() != model.numerology.symbol_count) {
    throw std::invalid_argument("noise_free_signal: code dimensions mismatch");
  }
  const double lambda = model.numerology.wavelength_m;
  const double x = model.numerology.pilot_magnitude;
  const Vec3 p_u = model.receiver.position + model.receiver.layout.offsets[u];

  const double d_los = (p_u - model.tx_position).norm();
  Complex out = model.los_gain * propagation_phase(d_los, lambda) * x;
  for (std::size_t m = 0; m < model.sensors.size(); ++m) {
    out += codes.gamma(t, static_cast<int>(m)) * model.sensors[m].gain *
           path_element_sum(model, m, p_u) * x;
  }
  return out;
}

/// Plane-wave reflection factor of one sensor,
///   S = sum_r conj(a_RU[r]) Gamma_r a_RB[r],
/// where a_RB uses the incidence direction (tx toward sensor) and a_RU the
/// departure direction (sensor toward receiver), both over rotated offsets.
inline Complex far_field_reflection_factor(const SignalModel& model,
                                           std::size_t sensor_index) {
  const RisSensor& sensor = model.sensors.at(sensor_index);
  const double lambda = model.numerology.wavelength_m;
  const RotationMatrix q = rotation_from_euler(sensor.pose.orientation);
  std::vector<Vec3> rotated;
  rotated.reserve(sensor.layout.count());
  for (const Vec3& s : sensor.layout.offsets) rotated.push_back(q * s);

  const Direction incidence = direction_between(model.tx_position, sensor.pose.position);
  const Direction departure =
      direction_between(sensor.pose.position, model.receiver.position);
  const SteeringVector a_rb = far_field_steering(incidence, rotated, lambda);
  const SteeringVector a_ru = far_field_steering(departure, rotated, lambda);
  Complex sum{0.0, 0.0};
  for (std::size_t r = 0; r < rotated.size(); ++r) {
    sum += std::conj(a_ru[r]) * sensor.profile[r] * a_rb[r];
  }
  return sum;
}

/// mu_t[n] across the receive grid under the plane-wave approximation: centroid
/// delays carry the bulk phase, steering vectors the per-antenna and
/// per-element corrections.
inline std::vector<Complex> far_field_signal(const SignalModel& model,
                                             const FastVaryingCode& codes, int t, int n) {
  if (model.regime != Regime::far) {
    throw std::invalid_argument("far_field_signal: model regime is not far");
  }
  if (t < 0 || t >= model.numerology.symbol_count || n < 0 ||
      n >= model.numerology.subcarrier_count) {
    throw std::out_of_range("far_field_signal: index out of range");
  }
  if (codes.sensor_count() != static_cast<int>(model.sensors.size()) ||
      codes.symbol_count() != model.numerology.symbol_count) {
    throw std::invalid_argument("far_field_signal: code dimensions mismatch");
  }
  const double lambda = model.numerology.wavelength_m;
  const double x = model.numerology.pilot_magnitude;
  const std::size_t n_u = model.antenna_count();

  const Direction los = direction_between(model.tx_position, model.receiver.position);
  const SteeringVector a_ub =
      far_field_steering(los, model.receiver.layout.offsets, lambda);
  std::vector<Complex> out(n_u);
  for (std::size_t u = 0; u < n_u; ++u) {
    out[u] = model.los_gain * a_ub[u] * propagation_phase(los.distance, lambda) * x;
  }
  for (std::size_t m = 0; m < model.sensors.size(); ++m) {
    const RisSensor& sensor = model.sensors[m];
    const Direction departure =
        direction_between(sensor.pose.position, model.receiver.position);
    const double d_tx = (sensor.pose.position - model.tx_position).norm();
    const SteeringVector a_ur =
        far_field_steering(departure, model.receiver.layout.offsets, lambda);
    const Complex factor = codes.gamma(t, static_cast<int>(m)) * sensor.gain *
                           far_field_reflection_factor(model, m) *
                           propagation_phase(d_tx + departure.distance, lambda) * x;
    for (std::size_t u = 0; u < n_u; ++u) out[u] += factor * a_ur[u];
  }
  return out;
}

}  // namespace risbound
