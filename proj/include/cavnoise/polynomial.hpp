#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavnoise/error.hpp"

namespace cavnoise {

using cplx = std::complex<double>;

/// Real polynomial, coefficients in ascending powers: c[0] + c[1] s + ...
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  explicit Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    trim();
  }

  /// Monic polynomial with the given roots. The root set must be closed under
  /// conjugation; the result is real up to rounding, which is discarded.
  static Polynomial from_roots(std::span<const cplx> roots) {
    std::vector<cplx> c{cplx{1.0, 0.0}};
    for (const cplx& r : roots) {
      std::vector<cplx> next(c.size() + 1, cplx{});
      for (std::size_t k = 0; k < c.size(); ++k) {
        next[k + 1] += c[k];
        next[k] -= r * c[k];
      }
      c = std::move(next);
    }
    std::vector<double> real(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) real[k] = c[k].real();
    return Polynomial(std::move(real));
  }

  std::size_t degree() const { return coeffs_.size() - 1; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : 0.0; }
  double leading() const { return coeffs_.back(); }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  template <typename T>
  T operator()(T s) const {
    T acc = T(coeffs_.back());
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * s + T(coeffs_[k]);
    return acc;
  }

  Polynomial derivative() const {
    if (coeffs_.size() == 1) return Polynomial();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return Polynomial(std::move(d));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
    return Polynomial(std::move(c));
  }

  friend Polynomial operator*(double k, const Polynomial& p) {
    std::vector<double> c = p.coeffs_;
    for (double& x : c) x *= k;
    return Polynomial(std::move(c));
  }

 private:
  void trim() {
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
  }

  std::vector<double> coeffs_;
};

/// Every non-real value has its conjugate in the set, with matching multiplicity.
inline bool is_conjugate_closed(std::span<const cplx> values, double rel_tol = 1e-9) {
  std::vector<bool> used(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (used[i]) continue;
    const cplx v = values[i];
    const double tol = rel_tol * std::max(1.0, std::abs(v));
    if (std::abs(v.imag()) <= tol) {
      used[i] = true;
      continue;
    }
    bool found = false;
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      if (!used[j] && std::abs(values[j] - std::conj(v)) <= tol) {
        used[i] = used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

struct RootResult {
  std::vector<cplx> roots;
  double max_residual = 0.0;  // max |p(r)| / sum|c_k||r|^k over the roots
};

/// Roots via eigenvalues of the companion matrix, polished by a few Newton
/// steps. Throws NumericalRootFailure when the eigen solver fails or the
/// normalized residual stays above `tolerance`.
inline RootResult polynomial_roots(const Polynomial& p, double tolerance = 1e-8) {
  const std::size_t n = p.degree();
  RootResult out;
  if (n == 0) return out;
  const auto& c = p.coefficients();
  const double lead = p.leading();

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i < n; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < n; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n - 1)) = -c[i] / lead;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericalRootFailure, "companion eigenvalue iteration did not converge (method: polynomial_roots)");
  }

  const Polynomial dp = p.derivative();
  auto scale_at = [&](cplx r) {
    double acc = 0.0, pw = 1.0;
    for (double ck : c) {
      acc += std::abs(ck) * pw;
      pw *= std::abs(r);
    }
    return acc;
  };

  out.roots.reserve(n);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    cplx r = solver.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) {
      const cplx d = dp(r);
      if (std::abs(d) == 0.0) break;
      const cplx step = p(r) / d;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      const cplx candidate = r - step;
      if (std::abs(p(candidate)) < std::abs(p(r))) r = candidate; else break;
    }
    out.max_residual = std::max(out.max_residual, std::abs(p(r)) / scale_at(r));
    out.roots.push_back(r);
  }
  if (!(out.max_residual <= tolerance)) {
    throw Error(ErrorCode::NumericalRootFailure,
                "root residual " + std::to_string(out.max_residual) + " exceeds tolerance (method: polynomial_roots)");
  }
  return out;
}

}  // namespace cavnoise
