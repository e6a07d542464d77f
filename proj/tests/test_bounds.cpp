#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>

#include "risbound/bounds.hpp"

using namespace risbound;

namespace {

FimMatrix plain_fim(const Eigen::MatrixXd& matrix) {
  FimMatrix out;
  out.matrix = matrix;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out.params.labels.push_back(
        {ParamKind::gain_real, -1, -1, "q" + std::to_string(i)});
  }
  return out;
}

Efim plain_efim(const Eigen::MatrixXd& matrix) {
  Efim out;
  out.matrix = matrix;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    out.retained.push_back({ParamKind::angle, 0, 0, "r" + std::to_string(i)});
  }
  return out;
}

// Generic two-hop geometry with a configurable receive grid, same endpoint
// boxes as the derivative tests.
SignalModel reflect_model(std::uint64_t seed, Regime regime, int sensor_count, int n_u) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-1.0, 1.0);

  SignalModel model;
  model.numerology = make_numerology(1e10, 8, 120e3, 4, -174.0, 23.0);
  const double lambda = model.numerology.wavelength_m;
  model.tx_position = Vec3{-2.0 + unit(rng), -1.0 + 2.0 * unit(rng), 2.0 * unit(rng)};
  model.receiver.position = Vec3{2.0 + unit(rng), -1.0 + 2.0 * unit(rng), 2.0 * unit(rng)};
  model.receiver.layout = paired_grid_layout(n_u, lambda / 2.0);
  for (int m = 0; m < sensor_count; ++m) {
    RisSensor sensor;
    sensor.layout = square_layout(3.0 * lambda / 2.0, lambda / 2.0);
    sensor.pose.position =
        Vec3{unit(rng), -1.0 + static_cast<double>(m) * 1.5 + unit(rng), 1.0 + unit(rng)};
    sensor.pose.orientation = EulerAngles{angle(rng), angle(rng), angle(rng)};
    sensor.profile = random_phase_profile(seed * 41 + m, sensor.layout.count()).coefficients();
    sensor.gain = std::polar(1e-6 * (0.5 + unit(rng)), kTwoPi * unit(rng));
    model.sensors.push_back(sensor);
  }
  model.los_gain = std::polar(2e-7 * (0.5 + unit(rng)), kTwoPi * unit(rng));
  model.regime = regime;
  finalize_model(model);
  return model;
}

constexpr double kSigma2 = 4.78e-16;

}  // namespace

TEST_CASE("schur complement on small matrices") {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 1.0, 1.0, 2.0;
  const Efim efim = schur_complement(plain_fim(m), {0});
  REQUIRE(efim.size() == 1);
  CHECK(efim.matrix(0, 0) == Catch::Approx(3.5));
  CHECK(efim.retained.size() == 1);
  CHECK(efim.nuisance.size() == 1);
  CHECK(efim.retained[0].name == "q0");

  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(4, 4);
  block.topLeftCorner(2, 2) << 3.0, 1.0, 1.0, 3.0;
  block.bottomRightCorner(2, 2) << 5.0, 0.0, 0.0, 6.0;
  const Efim top = schur_complement(plain_fim(block), {0, 1});
  CHECK((top.matrix - block.topLeftCorner(2, 2)).norm() < 1e-14);

  // No nuisance entries: plain restriction, singularity not probed.
  Eigen::MatrixXd flat = Eigen::MatrixXd::Zero(2, 2);
  flat(0, 0) = 1.0;
  const Efim all = schur_complement(plain_fim(flat), {0, 1});
  CHECK((all.matrix - flat).norm() == 0.0);

  REQUIRE_THROWS_AS(schur_complement(plain_fim(m), {2}), std::invalid_argument);
  REQUIRE_THROWS_AS(schur_complement(plain_fim(m), {-1}), std::invalid_argument);

  try {
    schur_complement(plain_fim(flat), {0});
    FAIL("expected a singular nuisance block");
  } catch (const SingularNuisanceError& error) {
    CHECK(std::abs(error.lambda_min) < 1e-14);
  }
}

TEST_CASE("eigen extremes symmetrize their input") {
  Eigen::MatrixXd d = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
  const auto [hi, lo] = eigen_extremes(d);
  CHECK(hi == Catch::Approx(3.0));
  CHECK(lo == Catch::Approx(1.0));

  Eigen::MatrixXd skew = Eigen::MatrixXd::Zero(2, 2);
  skew(0, 1) = 2.0;
  const auto [top, bottom] = eigen_extremes(skew);
  CHECK(top == Catch::Approx(1.0));
  CHECK(bottom == Catch::Approx(-1.0));
}

TEST_CASE("identifiability is a relative eigenvalue test") {
  CHECK(identifiability_verdict(plain_efim(Eigen::MatrixXd::Identity(3, 3))).identifiable);

  Eigen::MatrixXd spread = Eigen::Vector2d(1.0, 1e-12).asDiagonal();
  const IdentifiabilityVerdict bad = identifiability_verdict(plain_efim(spread));
  CHECK_FALSE(bad.identifiable);
  CHECK(bad.lambda_max == Catch::Approx(1.0));
  CHECK(bad.lambda_min == Catch::Approx(1e-12).margin(1e-15));

  Eigen::MatrixXd close = Eigen::Vector2d(1.0, 2e-9).asDiagonal();
  CHECK(identifiability_verdict(plain_efim(close)).identifiable);
  CHECK_FALSE(identifiability_verdict(plain_efim(Eigen::MatrixXd::Zero(2, 2))).identifiable);
  // The tolerance is an argument, not a constant baked into the verdict.
  CHECK_FALSE(identifiability_verdict(plain_efim(close), 1e-8).identifiable);
}

TEST_CASE("orientation bound closed forms") {
  CHECK(oeb_scenario1(plain_efim(Eigen::MatrixXd::Identity(3, 3))) ==
        Catch::Approx(std::sqrt(3.0)));
  CHECK(oeb_scenario1(plain_efim(4.0 * Eigen::MatrixXd::Identity(3, 3))) ==
        Catch::Approx(std::sqrt(0.75)));

  REQUIRE_THROWS_AS(oeb_scenario1(plain_efim(Eigen::MatrixXd::Identity(2, 2))),
                    std::invalid_argument);
  try {
    Eigen::MatrixXd sick = Eigen::Vector3d(1.0, 1.0, 1e-12).asDiagonal();
    oeb_scenario1(plain_efim(sick));
    FAIL("expected an identifiability failure");
  } catch (const NotIdentifiableError& error) {
    CHECK(error.lambda_min == Catch::Approx(1e-12).margin(1e-15));
  }
}

TEST_CASE("pose bound closed forms") {
  const PositionOrientationBound flat = peb_oeb_scenario2(
      plain_efim(Eigen::MatrixXd::Identity(6, 6)));
  CHECK(flat.peb_m == Catch::Approx(std::sqrt(3.0)));
  CHECK(flat.oeb_rad == Catch::Approx(std::sqrt(3.0)));

  Eigen::VectorXd diag(6);
  diag << 4.0, 4.0, 4.0, 9.0, 9.0, 9.0;
  const PositionOrientationBound split =
      peb_oeb_scenario2(plain_efim(Eigen::MatrixXd(diag.asDiagonal())));
  CHECK(split.peb_m == Catch::Approx(std::sqrt(0.75)));
  CHECK(split.oeb_rad == Catch::Approx(std::sqrt(1.0 / 3.0)));

  REQUIRE_THROWS_AS(peb_oeb_scenario2(plain_efim(Eigen::MatrixXd::Identity(3, 3))),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      peb_oeb_scenario2(plain_efim(Eigen::MatrixXd::Zero(6, 6))),
      NotIdentifiableError);
}

TEST_CASE("bounds scale as inverse square root of information") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a(i, j) = gauss(rng);
  }
  const Eigen::MatrixXd e = a * a.transpose() + Eigen::MatrixXd::Identity(3, 3);
  const double c = 7.3;
  const auto [hi, lo] = eigen_extremes(e);
  const auto [hi_c, lo_c] = eigen_extremes(Eigen::MatrixXd(c * e));
  CHECK(hi_c == Catch::Approx(c * hi));
  CHECK(lo_c == Catch::Approx(c * lo));
  CHECK(oeb_scenario1(plain_efim(c * e)) ==
        Catch::Approx(oeb_scenario1(plain_efim(e)) / std::sqrt(c)));
}

TEST_CASE("path elimination agrees with an explicit schur quotient") {
  const SignalModel model = reflect_model(5, Regime::near, 1, 4);
  const FastVaryingCode codes = dft_code_assignment(1, 4);
  const FimMatrix fim =
      fim_from_model(model, codes, scenario1_params(1, Regime::near), kSigma2);

  const Efim efim = scenario1_path_efim(fim, 0);
  REQUIRE(efim.size() == 3);
  CHECK(efim.retained[0].name == "phi1_z");
  CHECK(efim.nuisance.size() == 2);

  const std::vector<int> angles = fim.params.indices(0, ParamKind::angle);
  const std::vector<int> gains = {fim.params.indices(0, ParamKind::gain_real)[0],
                                  fim.params.indices(0, ParamKind::gain_imag)[0]};
  Eigen::MatrixXd aa(3, 3), ab(3, 2), bb(2, 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) aa(i, j) = fim.matrix(angles[i], angles[j]);
    for (int j = 0; j < 2; ++j) ab(i, j) = fim.matrix(angles[i], gains[j]);
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) bb(i, j) = fim.matrix(gains[i], gains[j]);
  }
  const Eigen::MatrixXd manual = aa - ab * bb.inverse() * ab.transpose();
  CHECK((efim.matrix - manual).norm() < 1e-12 * manual.norm());

  const FimMatrix fim2 =
      fim_from_model(model, codes, scenario2_params(1), kSigma2);
  const Efim pose = scenario2_path_efim(fim2, 0);
  REQUIRE(pose.size() == 6);
  CHECK(pose.retained[0].name == "p1_x");
  CHECK(pose.retained[3].name == "phi1_z");
}

TEST_CASE("plane-wave orientation information dies in the gain elimination") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const SignalModel model = reflect_model(seed, Regime::far, 2, 8);
    const FastVaryingCode codes = dft_code_assignment(2, 4);
    const FimMatrix fim =
        fim_from_model(model, codes, scenario1_params(2, Regime::far), kSigma2);
    for (int path = 0; path < 2; ++path) {
      const Efim efim = scenario1_path_efim(fim, path);
      const double raw =
          fim.submatrix(fim.params.indices(path, ParamKind::angle)).matrix.norm();
      REQUIRE(raw > 0.0);
      CHECK(efim.matrix.norm() < 1e-9 * raw);
      CHECK_FALSE(identifiability_verdict(efim).identifiable);
    }
  }
}

TEST_CASE("one receive antenna pins nothing after the gain elimination") {
  const SignalModel model = reflect_model(4, Regime::near, 1, 1);
  const FastVaryingCode codes = dft_code_assignment(1, 4);
  const FimMatrix fim =
      fim_from_model(model, codes, scenario1_params(1, Regime::near), kSigma2);
  const Efim efim = scenario1_path_efim(fim, 0);
  const double raw =
      fim.submatrix(fim.params.indices(0, ParamKind::angle)).matrix.norm();
  REQUIRE(raw > 0.0);
  CHECK(efim.matrix.norm() < 1e-9 * raw);
}

TEST_CASE("two receive antennas leave a flat orientation direction") {
  // The per-antenna derivative rows live in C^{N_U}; eliminating the complex
  // gain projects the three angle rows onto the orthocomplement of a complex
  // line, which has complex dimension N_U - 1. Two antennas therefore support
  // at most rank 2 over three angles, whatever the geometry or seed.
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const SignalModel model = reflect_model(seed, Regime::near, 1, 2);
    const FastVaryingCode codes = dft_code_assignment(1, 4);
    const FimMatrix fim =
        fim_from_model(model, codes, scenario1_params(1, Regime::near), kSigma2);
    const IdentifiabilityVerdict verdict =
        identifiability_verdict(scenario1_path_efim(fim, 0));
    CHECK(verdict.lambda_max > 0.0);
    CHECK(verdict.lambda_min < kIdentifiabilityTol * verdict.lambda_max);
    CHECK_FALSE(verdict.identifiable);
  }
}

TEST_CASE("four receive antennas identify the orientation") {
  const SignalModel model = reflect_model(6, Regime::near, 1, 4);
  const FastVaryingCode codes = dft_code_assignment(1, 4);
  const FimMatrix fim =
      fim_from_model(model, codes, scenario1_params(1, Regime::near), kSigma2);
  const Efim efim = scenario1_path_efim(fim, 0);
  const IdentifiabilityVerdict verdict = identifiability_verdict(efim);
  CHECK(verdict.identifiable);
  const double oeb = oeb_scenario1(efim);
  CHECK(oeb > 0.0);
  CHECK(std::isfinite(oeb));
}

TEST_CASE("doubling the noise floor scales the bound by sqrt two") {
  const SignalModel model = reflect_model(8, Regime::near, 1, 4);
  const FastVaryingCode codes = dft_code_assignment(1, 4);
  const ParamVector param = scenario1_params(1, Regime::near);
  const double base =
      oeb_scenario1(scenario1_path_efim(fim_from_model(model, codes, param, kSigma2), 0));
  const double noisy = oeb_scenario1(
      scenario1_path_efim(fim_from_model(model, codes, param, 2.0 * kSigma2), 0));
  CHECK(std::abs(noisy / base - std::sqrt(2.0)) < 1e-9);
}

TEST_CASE("estimating the position too can only loosen the orientation bound") {
  for (std::uint64_t seed : {3, 9}) {
    const SignalModel model = reflect_model(seed, Regime::near, 2, 8);
    const FastVaryingCode codes = dft_code_assignment(2, 4);
    const FimMatrix rest =
        fim_from_model(model, codes, scenario1_params(2, Regime::near), kSigma2);
    const FimMatrix exercise =
        fim_from_model(model, codes, scenario2_params(2), kSigma2);
    for (int path = 0; path < 2; ++path) {
      const double oeb_rest = oeb_scenario1(scenario1_path_efim(rest, path));
      const PositionOrientationBound pose =
          peb_oeb_scenario2(scenario2_path_efim(exercise, path));
      CHECK(pose.oeb_rad >= oeb_rest * (1.0 - 1e-9));
      CHECK(pose.peb_m > 0.0);
    }
  }
}
