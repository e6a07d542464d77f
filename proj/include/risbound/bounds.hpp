#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "risbound/fim.hpp"

namespace risbound {

inline constexpr double kIdentifiabilityTol = 1e-9;

/// Effective information matrix over the retained parameters after the
/// nuisance block has been eliminated.
struct Efim {
  Eigen::MatrixXd matrix;
  std::vector<ParamLabel> retained;
  std::vector<ParamLabel> nuisance;

  int size() const { return static_cast<int>(matrix.rows()); }
};

class SingularNuisanceError : public std::runtime_error {
 public:
  SingularNuisanceError(const std::string& what, double lambda_min)
      : std::runtime_error(what), lambda_min(lambda_min) {}
  double lambda_min = 0.0;
};

class NotIdentifiableError : public std::runtime_error {
 public:
  NotIdentifiableError(const std::string& what, double lambda_min)
      : std::runtime_error(what), lambda_min(lambda_min) {}
  double lambda_min = 0.0;
};

/// (lambda_max, lambda_min) of the symmetrized matrix.
inline std::pair<double, double> eigen_extremes(const Eigen::MatrixXd& matrix) {
  const Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev(ev.size() - 1), ev(0)};
}

inline std::pair<double, double> eigen_extremes(const Efim& efim) {
  return eigen_extremes(efim.matrix);
}

/// J_AA - J_AB J_BB^{-1} J_BA with A the retained indices and B the rest.
inline Efim schur_complement(const FimMatrix& fim, const std::vector<int>& retained) {
  std::vector<char> keep(fim.size(), 0);
  for (int i : retained) {
    if (i < 0 || i >= fim.size()) {
      throw std::invalid_argument("schur_complement: retained index out of range");
    }
    keep.at(i) = 1;
  }
  std::vector<int> nuisance;
  for (int i = 0; i < fim.size(); ++i) {
    if (!keep[i]) nuisance.push_back(i);
  }

  Efim out;
  for (int i : retained) out.retained.push_back(fim.params.labels.at(i));
  for (int i : nuisance) out.nuisance.push_back(fim.params.labels.at(i));

  const int a_n = static_cast<int>(retained.size());
  const int b_n = static_cast<int>(nuisance.size());
  Eigen::MatrixXd aa(a_n, a_n), ab(a_n, b_n), bb(b_n, b_n);
  for (int i = 0; i < a_n; ++i) {
    for (int j = 0; j < a_n; ++j) aa(i, j) = fim.matrix(retained[i], retained[j]);
    for (int j = 0; j < b_n; ++j) ab(i, j) = fim.matrix(retained[i], nuisance[j]);
  }
  for (int i = 0; i < b_n; ++i) {
    for (int j = 0; j < b_n; ++j) bb(i, j) = fim.matrix(nuisance[i], nuisance[j]);
  }

  if (b_n == 0) {
    out.matrix = 0.5 * (aa + aa.transpose());
    return out;
  }
  const auto [bb_max, bb_min] = eigen_extremes(bb);
  if (!(bb_min > 0.0) || bb_min <= 1e-12 * bb_max) {
    throw SingularNuisanceError("schur_complement: nuisance block singular", bb_min);
  }
  const Eigen::MatrixXd solved = bb.ldlt().solve(ab.transpose());
  const Eigen::MatrixXd schur = aa - ab * solved;
  out.matrix = 0.5 * (schur + schur.transpose());
  return out;
}

struct IdentifiabilityVerdict {
  bool identifiable = false;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Positive definiteness up to a relative tolerance on the eigenvalue spread.
inline IdentifiabilityVerdict identifiability_verdict(const Efim& efim,
                                                      double tol = kIdentifiabilityTol) {
  IdentifiabilityVerdict verdict;
  const auto [ev_max, ev_min] = eigen_extremes(efim);
  verdict.lambda_max = ev_max;
  verdict.lambda_min = ev_min;
  verdict.identifiable = ev_max > 0.0 && ev_min > tol * ev_max;
  return verdict;
}

/// sqrt(Tr{(J^e)^{-1}}) over the three orientation angles, radians.
inline double oeb_scenario1(const Efim& efim, double tol = kIdentifiabilityTol) {
  if (efim.size() != 3) {
    throw std::invalid_argument("oeb_scenario1: expected a 3x3 orientation block");
  }
  const IdentifiabilityVerdict verdict = identifiability_verdict(efim, tol);
  if (!verdict.identifiable) {
    throw NotIdentifiableError("oeb_scenario1: orientation not identifiable",
                               verdict.lambda_min);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      0.5 * (efim.matrix + efim.matrix.transpose()));
  double trace_inv = 0.0;
  for (int i = 0; i < 3; ++i) trace_inv += 1.0 / solver.eigenvalues()(i);
  return std::sqrt(trace_inv);
}

struct PositionOrientationBound {
  double peb_m = 0.0;
  double oeb_rad = 0.0;
};

/// Root traces of the position and orientation blocks of the inverted 6x6
/// effective information matrix, ordered [p (3), Phi (3)].
inline PositionOrientationBound peb_oeb_scenario2(const Efim& efim,
                                                  double tol = kIdentifiabilityTol) {
  if (efim.size() != 6) {
    throw std::invalid_argument("peb_oeb_scenario2: expected a 6x6 block");
  }
  const IdentifiabilityVerdict verdict = identifiability_verdict(efim, tol);
  if (!verdict.identifiable) {
    throw NotIdentifiableError("peb_oeb_scenario2: pose not identifiable",
                               verdict.lambda_min);
  }
  const Eigen::MatrixXd sym = 0.5 * (efim.matrix + efim.matrix.transpose());
  const Eigen::MatrixXd inverse =
      sym.ldlt().solve(Eigen::MatrixXd::Identity(6, 6));
  PositionOrientationBound out;
  out.peb_m = std::sqrt(inverse(0, 0) + inverse(1, 1) + inverse(2, 2));
  out.oeb_rad = std::sqrt(inverse(3, 3) + inverse(4, 4) + inverse(5, 5));
  return out;
}

/// Per-path effective orientation information with the path's complex gain as
/// the nuisance pair: the Schur complement inside the [Phi, beta] block.
inline Efim scenario1_path_efim(const FimMatrix& fim, int path) {
  const std::vector<int> angles = fim.params.indices(path, ParamKind::angle);
  std::vector<int> block = angles;
  for (int i : fim.params.indices(path, ParamKind::gain_real)) block.push_back(i);
  for (int i : fim.params.indices(path, ParamKind::gain_imag)) block.push_back(i);
  if (angles.size() != 3 || block.size() != 5) {
    throw std::invalid_argument("scenario1_path_efim: unexpected path block layout");
  }
  const FimMatrix sub = fim.submatrix(block);
  return schur_complement(sub, {0, 1, 2});
}

/// Same elimination for the exercise parameterization: retain [p, Phi], drop
/// the gain pair.
inline Efim scenario2_path_efim(const FimMatrix& fim, int path) {
  std::vector<int> block = fim.params.indices(path, ParamKind::position);
  for (int i : fim.params.indices(path, ParamKind::angle)) block.push_back(i);
  for (int i : fim.params.indices(path, ParamKind::gain_real)) block.push_back(i);
  for (int i : fim.params.indices(path, ParamKind::gain_imag)) block.push_back(i);
  if (block.size() != 8) {
    throw std::invalid_argument("scenario2_path_efim: unexpected path block layout");
  }
  const FimMatrix sub = fim.submatrix(block);
  return schur_complement(sub, {0, 1, 2, 3, 4, 5});
}

/// One configuration point of a sweep, for one sensor.
struct BoundReport {
  Scenario scenario = Scenario::rest;
  Regime regime = Regime::near;
  double f_c_hz = 0.0;
  double l_r_m = 0.0;
  int n_u = 0;
  std::uint64_t seed = 0;
  int sensor = 0;  // 1-based in reports, matching the path numbering
  bool identifiable = false;
  bool within_fraunhofer = false;
  double lambda_max_e = 0.0;
  double lambda_min_e = 0.0;
  std::optional<double> oeb_rad;
  std::optional<double> peb_m;
};

}  // namespace risbound
