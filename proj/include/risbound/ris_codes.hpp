#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "risbound/common.hpp"

namespace risbound {

/// Per-symbol scalar modulation applied by each sensor, one column per sensor.
/// Valid codes satisfy, per column m: sum_t gamma_t = 0 and sum_t |gamma_t|^2 = 1,
/// and across columns: sum_t conj(gamma_t^[m1]) gamma_t^[m2] = 0. These are the
/// constraints that decouple the LOS path and the individual sensor paths in
/// the information matrix.
struct FastVaryingCode {
  Eigen::MatrixXcd gamma;  // T x M

  int symbol_count() const { return static_cast<int>(gamma.rows()); }
  int sensor_count() const { return static_cast<int>(gamma.cols()); }
};

/// Worst-case residuals of the three code constraints.
struct CodeConstraintReport {
  double max_column_sum = 0.0;         // max_m |sum_t gamma_t|
  double max_energy_deviation = 0.0;   // max_m |sum_t |gamma_t|^2 - 1|
  double max_cross_correlation = 0.0;  // max over column pairs

  bool within(double tol) const {
    return max_column_sum < tol && max_energy_deviation < tol &&
           max_cross_correlation < tol;
  }
};

/// Static per-element phase profile of one sensor.
struct SlowVaryingProfile {
  std::vector<double> phases;  // [0, 2pi)

  std::vector<Complex> coefficients() const {
    std::vector<Complex> out;
    out.reserve(phases.size());
    for (double theta : phases) out.push_back(std::exp(Complex(0.0, theta)));
    return out;
  }
};

/// Assigns distinct nonzero DFT columns scaled by 1/sqrt(T). Column m carries
/// frequency index m+1; the DC column is excluded since it cannot sum to zero,
/// which is why T >= M + 1 symbols are required.
inline FastVaryingCode dft_code_assignment(int sensor_count, int symbol_count) {
  if (sensor_count < 0) {
    throw std::invalid_argument("dft_code_assignment: negative sensor count");
  }
  if (symbol_count < sensor_count + 1) {
    throw std::invalid_argument(
        "dft_code_assignment: insufficient symbols for separability");
  }
  FastVaryingCode code;
  code.gamma.resize(symbol_count, sensor_count);
  const double scale = 1.0 / std::sqrt(static_cast<double>(symbol_count));
  for (int m = 0; m < sensor_count; ++m) {
    for (int t = 0; t < symbol_count; ++t) {
      const double phase =
          -kTwoPi * static_cast<double>(m + 1) * static_cast<double>(t) /
          static_cast<double>(symbol_count);
      code.gamma(t, m) = scale * std::exp(Complex(0.0, phase));
    }
  }
  return code;
}

inline CodeConstraintReport verify_code_constraints(const FastVaryingCode& code) {
  CodeConstraintReport report;
  const int m_count = code.sensor_count();
  for (int m = 0; m < m_count; ++m) {
    report.max_column_sum =
        std::max(report.max_column_sum, std::abs(code.gamma.col(m).sum()));
    report.max_energy_deviation = std::max(
        report.max_energy_deviation, std::abs(code.gamma.col(m).squaredNorm() - 1.0));
    for (int g = m + 1; g < m_count; ++g) {
      report.max_cross_correlation =
          std::max(report.max_cross_correlation,
                   std::abs(code.gamma.col(m).dot(code.gamma.col(g))));
    }
  }
  return report;
}

/// Uniform phases on [0, 2pi), deterministic for a fixed seed. The top 53 bits
/// of each raw draw feed the mantissa directly, so the stream does not depend
/// on library distribution internals.
inline SlowVaryingProfile random_phase_profile(std::uint64_t seed,
                                               std::size_t element_count) {
  if (element_count == 0) {
    throw std::invalid_argument("random_phase_profile: zero elements");
  }
  std::mt19937_64 rng(seed);
  SlowVaryingProfile profile;
  profile.phases.reserve(element_count);
  for (std::size_t i = 0; i < element_count; ++i) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    profile.phases.push_back(kTwoPi * unit);
  }
  return profile;
}

/// Uniform phase on [0, 2pi) for a path gain, same bit discipline as above.
inline double random_phase(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return kTwoPi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

}  // namespace risbound
