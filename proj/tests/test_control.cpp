#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "cavnoise/control.hpp"
#include "cavnoise/spectra.hpp"
#include "reference.hpp"

using namespace cavnoise;
using Catch::Approx;

namespace {

const CavityParams kMatched = validate_cavity(0.5, 0.5, 0.0);
const DetectorParams kIdeal = DetectorParams::make(1.0);

}  // namespace

TEST_CASE("open-loop gain of a flat filter", "[control]") {
  const auto f = LoopFilter::flat(3.0);
  const cplx dc = open_loop_gain(kMatched, kIdeal, f, 0.0);
  CHECK(dc.real() == Approx(3.0));
  CHECK(dc.imag() == 0.0);
  const cplx at_kappa = open_loop_gain(kMatched, kIdeal, f, 1.0);
  CHECK(std::abs(at_kappa) == Approx(3.0 / std::sqrt(2.0)));
  CHECK(std::arg(at_kappa) * 180.0 / std::numbers::pi == Approx(-45.0));
  CHECK(loop_coupling(validate_cavity(4.9, 4.9, 1.0), DetectorParams::make(0.91)) ==
        Approx(2.0 * 4.9 * std::sqrt(0.91)));
}

TEST_CASE("flat gain without delay is unconditionally stable", "[control]") {
  for (double g : {0.1, 1.0, 1e3, 1e8}) {
    for (auto method : {StabilityMethod::polynomial_roots, StabilityMethod::nyquist_sampling}) {
      const auto r = is_stable(kMatched, kIdeal, LoopFilter::flat(g), method);
      CHECK(r.stable);
      CHECK(r.unstable_pole_count == 0);
      CHECK(std::isinf(r.gain_margin_db));
      CHECK(r.method == method);
    }
    const auto r = is_stable(kMatched, kIdeal, LoopFilter::flat(g));
    REQUIRE(r.closed_loop_poles.size() == 1);
    CHECK(r.closed_loop_poles[0].real() == Approx(-(1.0 + g)));
  }
}

TEST_CASE("polynomial method refuses a pure delay", "[control][errors]") {
  try {
    is_stable(kMatched, kIdeal, LoopFilter::flat(1.0, 0.1), StabilityMethod::polynomial_roots);
    FAIL("expected InvalidFilter");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFilter);
  }
  CHECK(is_stable(kMatched, kIdeal, LoopFilter::flat(1.0, 0.1)).method == StabilityMethod::nyquist_sampling);
}

TEST_CASE("delayed flat loop destabilizes at the analytic threshold", "[control][oracle]") {
  for (double tau : {0.1, 1.0, 5.0}) {
    for (double kappa_scale : {1.0, 7.0}) {
      const auto c = kMatched.scaled(kappa_scale);
      const double coupling = loop_coupling(c, kIdeal);
      const double threshold = reference::delayed_first_order_threshold(c.kappa(), tau, coupling);
      CHECK(is_stable(c, kIdeal, LoopFilter::flat(0.99 * threshold, tau)).stable);
      const auto bad = is_stable(c, kIdeal, LoopFilter::flat(1.01 * threshold, tau));
      CHECK_FALSE(bad.stable);
      CHECK(bad.unstable_pole_count >= 2);

      double lo = 0.5 * threshold, hi = 2.0 * threshold;
      for (int i = 0; i < 30; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (is_stable(c, kIdeal, LoopFilter::flat(mid, tau)).stable) lo = mid; else hi = mid;
      }
      CHECK(lo == Approx(threshold).epsilon(1e-3));
    }
  }
  // kappa = tau = 1: atan(w) + w = pi at w = 2.0288, critical gain sqrt(1 + w^2)
  CHECK(reference::delayed_first_order_threshold(1.0, 1.0, 1.0) == Approx(2.2618).epsilon(1e-4));
}

TEST_CASE("margins of a third-order loop", "[control]") {
  // L = g / (1 + s)^3 with the cavity pole at -1: phase crossover at sqrt(3), |L| = g/8
  const LoopFilter f(4.0, {}, {cplx{-1.0, 0.0}, cplx{-1.0, 0.0}});
  for (auto method : {StabilityMethod::polynomial_roots, StabilityMethod::nyquist_sampling}) {
    const auto r = is_stable(kMatched, kIdeal, f, method);
    CHECK(r.stable);
    CHECK(r.gain_margin_db == Approx(20.0 * std::log10(2.0)).margin(1e-6));
    REQUIRE(r.phase_crossover_omega);
    CHECK(*r.phase_crossover_omega == Approx(std::sqrt(3.0)).epsilon(1e-6));
    REQUIRE(r.phase_margin_deg);
    // |L| = 1 where (1 + w^2)^(3/2) = 4
    const double wc = std::sqrt(std::pow(4.0, 2.0 / 3.0) - 1.0);
    CHECK(*r.gain_crossover_omega == Approx(wc).epsilon(1e-6));
    CHECK(*r.phase_margin_deg == Approx(180.0 - 3.0 * std::atan(wc) * 180.0 / std::numbers::pi).margin(1e-4));
  }
  const LoopFilter hot(9.0, {}, {cplx{-1.0, 0.0}, cplx{-1.0, 0.0}});
  for (auto method : {StabilityMethod::polynomial_roots, StabilityMethod::nyquist_sampling}) {
    const auto r = is_stable(kMatched, kIdeal, hot, method);
    CHECK_FALSE(r.stable);
    CHECK(r.unstable_pole_count == 2);
    CHECK(r.gain_margin_db < 0.0);
  }
}

TEST_CASE("polynomial roots and Nyquist winding agree on random loops", "[control][property]") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int disagreements = 0, unstable = 0, tested = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = validate_cavity(0.1 + u(rng), 0.1 + u(rng), u(rng));
    const auto det = DetectorParams::make(0.2 + 0.8 * u(rng));
    std::vector<cplx> poles, zeros;
    const int np = 1 + static_cast<int>(u(rng) * 3.0);
    for (int i = 0; i < np; ++i) {
      if (i + 1 < np && u(rng) < 0.4) {
        const cplx p{-0.05 - 2.0 * u(rng), 3.0 * u(rng)};
        poles.push_back(p);
        poles.push_back(std::conj(p));
        ++i;
      } else {
        poles.push_back({-0.05 - 3.0 * u(rng), 0.0});
      }
    }
    if (u(rng) < 0.5) zeros.push_back({(u(rng) - 0.5) * 4.0, 0.0});
    const double gain = (u(rng) < 0.5 ? 1.0 : -1.0) * std::pow(10.0, 3.0 * u(rng) - 1.0);
    const LoopFilter f(gain, zeros, poles);
    const auto poly = is_stable(c, det, f, StabilityMethod::polynomial_roots);
    // skip loops sitting on the stability boundary
    double closest = INFINITY;
    for (const cplx& p : poly.closed_loop_poles) closest = std::min(closest, std::abs(p.real()));
    if (closest < 1e-6) continue;
    const auto nyq = is_stable(c, det, f, StabilityMethod::nyquist_sampling);
    ++tested;
    if (!poly.stable) ++unstable;
    if (poly.unstable_pole_count != nyq.unstable_pole_count) ++disagreements;
  }
  CHECK(tested > 250);
  CHECK(unstable > 20);
  CHECK(disagreements == 0);
}

TEST_CASE("characteristic polynomial of a first-order filter", "[control]") {
  // (1 + s)(s + 2) + 1 * 3 = s^2 + 3 s + 5
  const LoopFilter f(3.0, {}, {cplx{-2.0, 0.0}});
  const auto p = characteristic_polynomial(kMatched, kIdeal, f);
  REQUIRE(p.degree() == 2);
  CHECK(p[0] == Approx(5.0));
  CHECK(p[1] == Approx(3.0));
  CHECK(p[2] == Approx(1.0));
}

TEST_CASE("required loop gain", "[control]") {
  CHECK(required_loop_gain(60.0, 0.01).gain_db == Approx(80.0).margin(1e-9));
  CHECK(required_loop_gain(0.0, 1.0).gain_db == Approx(0.0).margin(1e-9));
  CHECK(required_loop_gain(60.0, 0.1).gain_db == Approx(70.0).margin(1e-9));

  const auto r = required_loop_gain(60.0, 0.01);
  CHECK(r.suppression == Approx(1e4));
  CHECK(r.loop_gain == Approx(9999.0));
  CHECK(r.loop_gain_db == Approx(20.0 * std::log10(9999.0)));
  CHECK(r.loop_gain_db_power == Approx(10.0 * std::log10(9999.0)));

  for (double bad : {0.0, -0.1, 1.5, static_cast<double>(NAN)}) {
    try {
      required_loop_gain(60.0, bad);
      FAIL("expected InvalidResidual");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidResidual);
    }
  }
  CHECK_THROWS_AS(required_loop_gain(10.0, 0.5, validate_cavity(1.0, 0.0, 0.0), kIdeal), Error);
}

TEST_CASE("required loop gain is monotone in its inputs", "[control][property]") {
  double prev = -INFINITY;
  for (double db = 0.0; db <= 120.0; db += 5.0) {
    const double g = required_loop_gain(db, 0.05).gain_db;
    CHECK(g >= prev);
    prev = g;
  }
  prev = INFINITY;
  for (double r = 0.001; r <= 1.0; r *= 2.0) {
    const double g = required_loop_gain(60.0, r).gain_db;
    CHECK(g <= prev);
    prev = g;
  }
}

TEST_CASE("required loop gain meets the residual target in the closed-loop spectrum", "[control][spectra]") {
  const auto req = required_loop_gain(60.0, 0.1);
  CHECK(req.gain_db == Approx(70.0).margin(1e-9));
  // coupling = 1 for this cavity, so flat K = |L(0)|
  const auto f = LoopFilter::flat(req.loop_gain);
  const FrequencyGrid dc({0.0});
  const auto noisy = intracavity_amplitude_spectrum_fb(
      kMatched, DriveField(1.0, SpectralModel::constant(1.0 + 1e6), SpectralModel::constant(1.0)), kIdeal, f, dc);
  const auto quiet = intracavity_amplitude_spectrum_fb(kMatched, DriveField::coherent(1.0), kIdeal, f, dc);
  const double classical = noisy.total[0] - quiet.total[0];
  CHECK(classical == Approx(0.1 * highgain_limit(kMatched, kIdeal)).epsilon(1e-8));

  const auto sample = validate_cavity(4.9, 4.9, 1.0);
  const auto det = DetectorParams::make(0.91);
  const auto req2 = required_loop_gain(40.0, 0.2, sample, det);
  const auto f2 = LoopFilter::flat(req2.loop_gain / loop_coupling(sample, det) * sample.kappa());
  const auto n2 = intracavity_amplitude_spectrum_fb(
      sample, DriveField(1.0, SpectralModel::constant(1.0 + 1e4), SpectralModel::constant(1.0)), det, f2, dc);
  const auto q2 = intracavity_amplitude_spectrum_fb(sample, DriveField::coherent(1.0), det, f2, dc);
  CHECK(n2.total[0] - q2.total[0] == Approx(0.2 * highgain_limit(sample, det)).epsilon(1e-8));
}

TEST_CASE("stable loops never hit a degenerate closed-loop denominator", "[control][spectra][property]") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto grid = FrequencyGrid::logarithmic(1e-4, 1e4, 300);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = validate_cavity(0.1 + u(rng), 0.1 + u(rng), u(rng));
    const LoopFilter f((u(rng) - 0.3) * 20.0, {}, {cplx{-0.1 - u(rng), 0.0}, cplx{-0.1 - 5.0 * u(rng), 0.0}});
    if (!is_stable(c, kIdeal, f).stable) continue;
    ++checked;
    CHECK_NOTHROW(intracavity_amplitude_spectrum_fb(c, DriveField::coherent(1.0), kIdeal, f, grid));
  }
  CHECK(checked > 30);
}
