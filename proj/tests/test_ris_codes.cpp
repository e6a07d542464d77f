#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "risbound/ris_codes.hpp"

using namespace risbound;

TEST_CASE("two-symbol code for one sensor is the +/- pair") {
  const FastVaryingCode code = dft_code_assignment(1, 2);
  REQUIRE(code.symbol_count() == 2);
  REQUIRE(code.sensor_count() == 1);
  const double amp = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(code.gamma(0, 0) - Complex(amp, 0.0)) < 1e-15);
  CHECK(std::abs(code.gamma(1, 0) - Complex(-amp, 0.0)) < 1e-15);
}

TEST_CASE("code columns are zero-sum, unit-energy, orthogonal") {
  for (int sensors : {1, 2, 3, 5}) {
    for (int symbols : {sensors + 1, sensors + 2, 4 * (sensors + 1)}) {
      const FastVaryingCode code = dft_code_assignment(sensors, symbols);
      const CodeConstraintReport residuals = verify_code_constraints(code);
      INFO("sensors " << sensors << " symbols " << symbols);
      CHECK(residuals.max_column_sum < 1e-13);
      CHECK(residuals.max_energy_deviation < 1e-13);
      CHECK(residuals.max_cross_correlation < 1e-13);
      CHECK(residuals.within(1e-12));
    }
  }
}

TEST_CASE("too few symbols cannot separate the paths") {
  REQUIRE_THROWS_AS(dft_code_assignment(2, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(dft_code_assignment(4, 4), std::invalid_argument);
  REQUIRE_THROWS_WITH(dft_code_assignment(3, 3),
                      Catch::Matchers::ContainsSubstring("insufficient symbols"));
  REQUIRE_NOTHROW(dft_code_assignment(3, 4));
}

TEST_CASE("constraint report flags a dc column") {
  FastVaryingCode code;
  code.gamma = Eigen::MatrixXcd::Constant(4, 1, Complex(0.5, 0.0));
  const CodeConstraintReport residuals = verify_code_constraints(code);
  CHECK(residuals.max_column_sum == Catch::Approx(2.0));
  CHECK_FALSE(residuals.within(1e-12));
}

TEST_CASE("constraint report flags duplicated columns") {
  const FastVaryingCode base = dft_code_assignment(1, 4);
  FastVaryingCode doubled;
  doubled.gamma.resize(4, 2);
  doubled.gamma.col(0) = base.gamma.col(0);
  doubled.gamma.col(1) = base.gamma.col(0);
  const CodeConstraintReport residuals = verify_code_constraints(doubled);
  CHECK(residuals.max_cross_correlation == Catch::Approx(1.0));
  CHECK_FALSE(residuals.within(1e-12));
}

TEST_CASE("code entries keep unit modulus before normalization") {
  const FastVaryingCode code = dft_code_assignment(3, 8);
  const double amp = 1.0 / std::sqrt(8.0);
  for (int t = 0; t < 8; ++t) {
    for (int m = 0; m < 3; ++m) {
      CHECK(std::abs(code.gamma(t, m)) == Catch::Approx(amp));
    }
  }
}

TEST_CASE("phase profiles are deterministic in the seed") {
  const SlowVaryingProfile a = random_phase_profile(77, 64);
  const SlowVaryingProfile b = random_phase_profile(77, 64);
  const SlowVaryingProfile c = random_phase_profile(78, 64);
  REQUIRE(a.phases.size() == 64);
  bool all_equal = true;
  bool any_differ = false;
  for (std::size_t r = 0; r < 64; ++r) {
    all_equal = all_equal && a.phases[r] == b.phases[r];
    any_differ = any_differ || a.phases[r] != c.phases[r];
  }
  CHECK(all_equal);
  CHECK(any_differ);
}

TEST_CASE("profile coefficients are unit modulus") {
  const SlowVaryingProfile profile = random_phase_profile(5, 256);
  for (const Complex& coefficient : profile.coefficients()) {
    CHECK(std::abs(coefficient) == Catch::Approx(1.0));
  }
}

TEST_CASE("profile phases cover [0, 2 pi) uniformly") {
  const std::size_t draws = 100000;
  const SlowVaryingProfile profile = random_phase_profile(123, draws);
  double sum = 0.0;
  for (double phase : profile.phases) {
    REQUIRE(phase >= 0.0);
    REQUIRE(phase < kTwoPi);
    sum += phase;
  }
  // mean pi with sd 2 pi / sqrt(12 n); 0.03 is a > 5 sigma band
  CHECK(sum / static_cast<double>(draws) == Catch::Approx(kPi).margin(0.03));
}

TEST_CASE("empty profile is rejected") {
  REQUIRE_THROWS_AS(random_phase_profile(1, 0), std::invalid_argument);
}

TEST_CASE("scalar phase draw is deterministic and in range") {
  const double a = random_phase(42);
  CHECK(a == random_phase(42));
  CHECK(a >= 0.0);
  CHECK(a < kTwoPi);
  CHECK(random_phase(43) != a);
}
