#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "cavnoise/model.hpp"
#include "cavnoise/spectra.hpp"

using namespace cavnoise;
using Catch::Approx;

TEST_CASE("validate_cavity derives the total rate", "[model]") {
  const auto matched = validate_cavity(0.5, 0.5, 0.0);
  CHECK(matched.kappa() == 1.0);
  CHECK(matched.is_impedance_matched());

  const auto sample = validate_cavity(4.9, 4.9, 1.0);
  CHECK(sample.kappa() == Approx(10.8).epsilon(1e-15));
  CHECK_FALSE(sample.is_impedance_matched());

  CHECK_FALSE(validate_cavity(0.5, 0.4, 0.0).is_impedance_matched());
}

TEST_CASE("validate_cavity rejects invalid rates", "[model][errors]") {
  auto code_of = [](double a, double b, double c) {
    try {
      validate_cavity(a, b, c);
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidConfig;
  };
  CHECK(code_of(0.0, 0.5, 0.0) == ErrorCode::NonPositiveInputCoupling);
  CHECK(code_of(-1.0, 0.5, 0.0) == ErrorCode::NonPositiveInputCoupling);
  CHECK(code_of(1.0, -0.5, 0.0) == ErrorCode::NegativeRate);
  CHECK(code_of(1.0, 0.5, -1e-9) == ErrorCode::NegativeRate);
  CHECK(code_of(NAN, 0.5, 0.0) == ErrorCode::NonFiniteValue);
  CHECK(code_of(1.0, INFINITY, 0.0) == ErrorCode::NonFiniteValue);
}

TEST_CASE("cavity construction is idempotent", "[model][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const auto c = validate_cavity(u(rng) + 1e-3, u(rng), u(rng));
    const auto again = validate_cavity(c.kappa_in(), c.kappa_out(), c.kappa_loss());
    CHECK(again == c);
    CHECK(again.kappa() == c.kappa_in() + c.kappa_out() + c.kappa_loss());
  }
}

TEST_CASE("steady state amplitude", "[model]") {
  CHECK(steady_state(validate_cavity(0.5, 0.5, 0.0), DriveField::coherent(1.0)).alpha == 1.0);
  // sqrt(2 * 1.0) * 2 / 2
  CHECK(steady_state(validate_cavity(1.0, 0.5, 0.5), DriveField::coherent(2.0)).alpha ==
        Approx(1.4142135623730951).epsilon(1e-15));
  CHECK(steady_state(validate_cavity(3.0, 0.1, 0.2), DriveField::coherent(0.0)).alpha == 0.0);
}

TEST_CASE("drive field enforces the uncertainty product", "[model][errors]") {
  CHECK_NOTHROW(DriveField(1.0, SpectralModel::constant(1e6), SpectralModel::constant(1.0)));
  CHECK_NOTHROW(DriveField(1.0, SpectralModel::constant(0.5), SpectralModel::constant(2.0)));
  CHECK_THROWS_AS(DriveField(1.0, SpectralModel::constant(0.5), SpectralModel::constant(1.0)), Error);
  CHECK_THROWS_AS(DriveField(-1.0, SpectralModel::constant(1.0), SpectralModel::constant(1.0)), Error);
  CHECK_THROWS_AS(SpectralModel::constant(-0.1), Error);

  // violation only at a tabulated node
  TabulatedSpectrum amp{{0.0, 1.0, 2.0}, {1.0, 0.9, 1.0}};
  try {
    DriveField(1.0, SpectralModel(amp), SpectralModel::constant(1.0));
    FAIL("expected UncertaintyViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UncertaintyViolation);
  }

  // a valid table re-checked on an evaluation grid outside its support
  const DriveField ok(1.0, SpectralModel(TabulatedSpectrum{{0.0, 10.0}, {1.0, 4.0}}), SpectralModel::constant(1.0));
  CHECK_NOTHROW(ok.validate_on(FrequencyGrid::linear(0.0, 10.0, 11)));
  CHECK_THROWS_AS(ok.validate_on(FrequencyGrid::linear(0.0, 11.0, 12)), Error);
}

TEST_CASE("tabulated spectra interpolate linearly and refuse to extrapolate", "[model]") {
  const SpectralModel t(TabulatedSpectrum{{1.0, 2.0, 4.0}, {3.0, 5.0, 1.0}});
  CHECK(t(1.0) == 3.0);
  CHECK(t(1.5) == Approx(4.0));
  CHECK(t(3.0) == Approx(3.0));
  CHECK(t(4.0) == 1.0);
  try {
    t(0.5);
    FAIL("expected OutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
  CHECK_THROWS_AS(SpectralModel(TabulatedSpectrum{{1.0, 1.0}, {1.0, 1.0}}), Error);
}

TEST_CASE("rational spectrum model", "[model]") {
  // 1 + 9 / (1 + w^2): single real pole at -1
  const SpectralModel r(RationalSpectrum{1.0, 9.0, {}, {cplx{-1.0, 0.0}}});
  CHECK(r(0.0) == Approx(10.0));
  CHECK(r(1.0) == Approx(5.5));
  CHECK_THROWS_AS(SpectralModel(RationalSpectrum{1.0, 1.0, {}, {cplx{1.0, 0.0}}}), Error);
  CHECK_THROWS_AS(SpectralModel(RationalSpectrum{1.0, 1.0, {}, {cplx{-1.0, 1.0}}}), Error);
}

TEST_CASE("detector efficiency bounds", "[model][errors]") {
  CHECK(DetectorParams::make(1.0).eta == 1.0);
  CHECK_THROWS_AS(DetectorParams::make(0.0), Error);
  CHECK_THROWS_AS(DetectorParams::make(1.01), Error);
}

TEST_CASE("mechanical response variants", "[model]") {
  const MechanicalResponse flat(ConstantResponse{2.0, 0.5});
  CHECK(flat.transfer(3.0) == 2.0);
  CHECK(flat.thermal(3.0) == 0.5);

  const MechanicalResponse osc(OscillatorResponse{1.0, 0.1, 10.0, 0.0});
  const double w = 0.05;
  CHECK(osc.transfer(w) == Approx(1.0 / (std::pow(0.01 - w * w, 2) + std::pow(w * 0.1 / 10.0, 2))));
  CHECK(osc.thermal(w) == 0.0);

  const MechanicalResponse tab(TabulatedResponse{{{0.0, 1.0}, {0.0, 2.0}}, {{0.0, 1.0}, {1.0, 1.0}}});
  CHECK(tab.transfer(0.25) == Approx(0.5));
  CHECK(tab.thermal(0.25) == Approx(1.0));

  CHECK_THROWS_AS(MechanicalResponse(OscillatorResponse{1.0, 0.0, 10.0, 0.0}), Error);
  CHECK_THROWS_AS(MechanicalResponse(ConstantResponse{-1.0, 0.0}), Error);
}

TEST_CASE("scaling all rates and frequencies leaves dimensionless quantities invariant", "[model][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  for (int i = 0; i < 30; ++i) {
    const auto c = validate_cavity(u(rng), u(rng), u(rng) - 0.05);
    const double s = u(rng) * 10.0;
    const auto cs = c.scaled(s);
    const DriveField drive(2.0, SpectralModel::constant(5.0), SpectralModel::constant(3.0));
    const auto grid = FrequencyGrid::logarithmic(1e-2, 10.0, 25);
    std::vector<double> scaled_omegas;
    for (double w : grid) scaled_omegas.push_back(w * s);
    const FrequencyGrid sgrid(scaled_omegas);

    const auto a = intracavity_amplitude_spectrum(c, drive, grid);
    const auto b = intracavity_amplitude_spectrum(cs, drive, sgrid);
    for (std::size_t j = 0; j < grid.size(); ++j)
      CHECK(b.total[j] * cs.kappa() == Approx(a.total[j] * c.kappa()).epsilon(1e-12));

    const auto det = DetectorParams::make(0.8);
    CHECK(suppression_ratio(cs, det).linear == Approx(suppression_ratio(c, det).linear).epsilon(1e-13));

    const double alpha = steady_state(c, drive).alpha;
    const double alpha_s = steady_state(cs, drive).alpha;
    CHECK(alpha_s * std::sqrt(s) == Approx(alpha).epsilon(1e-13));

    const MechanicalResponse none;
    const auto p = reflected_phase_spectrum(c, drive, steady_state(c, drive), none, grid);
    const auto q = reflected_phase_spectrum(cs, drive, steady_state(cs, drive), none, sgrid);
    for (std::size_t j = 0; j < grid.size(); ++j) CHECK(q.total[j] == Approx(p.total[j]).epsilon(1e-12));
  }
}
