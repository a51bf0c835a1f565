#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavnoise/error.hpp"
#include "cavnoise/polynomial.hpp"

namespace cavnoise {

/// Single-input single-output state-space model x' = A x + B u, y = C x + D u.
struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  Eigen::Index order() const { return A.rows(); }
};

/// Controllable canonical realization of num(s)/den(s), deg num <= deg den.
inline StateSpace realize(const Polynomial& num, const Polynomial& den) {
  const std::size_t n = den.degree();
  if (num.degree() > n && !num.is_zero())
    throw Error(ErrorCode::InvalidFilter, "improper transfer function cannot be realized");
  const double lead = den.leading();
  StateSpace ss;
  const auto N = static_cast<Eigen::Index>(n);
  ss.A = Eigen::MatrixXd::Zero(N, N);
  ss.B = Eigen::VectorXd::Zero(N);
  ss.C = Eigen::RowVectorXd::Zero(N);
  ss.D = (num.degree() == n && !num.is_zero()) ? num[n] / lead : 0.0;
  if (n == 0) return ss;
  for (Eigen::Index i = 0; i + 1 < N; ++i) ss.A(i, i + 1) = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    ss.A(N - 1, static_cast<Eigen::Index>(k)) = -den[k] / lead;
    ss.C(static_cast<Eigen::Index>(k)) = num[k] / lead - ss.D * den[k] / lead;
  }
  ss.B(N - 1) = 1.0;
  return ss;
}

/// Feedback electronics K(w) = gain * prod(iw - z) / prod(iw - p) * exp(-i w delay).
class LoopFilter {
 public:
  LoopFilter(double gain, std::vector<cplx> zeros = {}, std::vector<cplx> poles = {}, double delay = 0.0)
      : gain_(gain), zeros_(std::move(zeros)), poles_(std::move(poles)), delay_(delay) {
    if (!std::isfinite(gain_)) throw Error(ErrorCode::InvalidFilter, "filter gain must be finite");
    if (!std::isfinite(delay_) || delay_ < 0.0) throw Error(ErrorCode::InvalidFilter, "filter delay must be finite and >= 0");
    if (!is_conjugate_closed(zeros_)) throw Error(ErrorCode::InvalidFilter, "filter zeros are not closed under conjugation");
    if (!is_conjugate_closed(poles_)) throw Error(ErrorCode::InvalidFilter, "filter poles are not closed under conjugation");
    if (zeros_.size() > poles_.size())
      throw Error(ErrorCode::InvalidFilter, "filter has more zeros than poles (not realizable)");
    for (const cplx& p : poles_) {
      if (!std::isfinite(p.real()) || !std::isfinite(p.imag()) || !(p.real() < 0.0))
        throw Error(ErrorCode::InvalidFilter, "filter poles must lie strictly in the left half-plane");
    }
    for (const cplx& z : zeros_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Error(ErrorCode::InvalidFilter, "filter zeros must be finite");
    }
  }

  static LoopFilter flat(double gain, double delay = 0.0) { return LoopFilter(gain, {}, {}, delay); }
  static LoopFilter none() { return LoopFilter(0.0); }

  double gain() const { return gain_; }
  const std::vector<cplx>& zeros() const { return zeros_; }
  const std::vector<cplx>& poles() const { return poles_; }
  double delay() const { return delay_; }
  bool is_zero() const { return gain_ == 0.0; }

  /// Rational part evaluated at complex frequency s.
  cplx rational(cplx s) const {
    cplx k{gain_, 0.0};
    for (const cplx& z : zeros_) k *= (s - z);
    for (const cplx& p : poles_) k /= (s - p);
    return k;
  }

  cplx operator()(double omega) const {
    const cplx s{0.0, omega};
    cplx k = rational(s);
    if (delay_ > 0.0) k *= std::exp(cplx{0.0, -omega * delay_});
    return k;
  }

  /// gain * prod(s - z)
  Polynomial numerator() const { return gain_ * Polynomial::from_roots(zeros_); }
  /// prod(s - p)
  Polynomial denominator() const { return Polynomial::from_roots(poles_); }

  StateSpace state_space() const { return realize(numerator(), denominator()); }

 private:
  double gain_;
  std::vector<cplx> zeros_;
  std::vector<cplx> poles_;
  double delay_;
};

}  // namespace cavnoise
