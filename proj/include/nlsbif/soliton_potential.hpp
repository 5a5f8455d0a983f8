#pragma once

// Closed-form soliton profiles of the 1D pure-power NLS near the cubic case,
// the 2x2 matrix potential of the linearization, its expansion in
// eps = p - 3, and the weights |V0|^{+-1/2}.
//
// Q denotes the cubic soliton Q_3, with Q^2(x) = 2 sech^2(x). Every profile is
// even in x and is evaluated through exp(-|x|) so that nothing overflows on a
// truncated domain of any practical length.

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace nlsbif {

using Mat2 = Eigen::Matrix2d;

namespace detail {

inline constexpr double sqrt2 = std::numbers::sqrt2;
inline constexpr double sqrt3 = std::numbers::sqrt3;

inline void require_soliton_power(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("soliton power p must satisfy 1 < p < inf, got " + std::to_string(p));
  }
}

inline Mat2 symmetric(double diag, double off) {
  Mat2 m;
  m << diag, off, off, diag;
  return m;
}

// [[2,1],[1,2]], the matrix multiplying Q^2 in -V0.
inline Mat2 coupling() { return symmetric(2.0, 1.0); }

// [[1,1],[1,1]]
inline Mat2 ones() { return symmetric(1.0, 1.0); }

// |V0|^{1/2} / Q
inline Mat2 weight_half_matrix() { return symmetric(0.5 * (sqrt3 + 1.0), 0.5 * (sqrt3 - 1.0)); }

// Q * |V0|^{-1/2}
inline Mat2 weight_half_inv_matrix() {
  const double s = 1.0 / (2.0 * sqrt3);
  return symmetric(s * (sqrt3 + 1.0), -s * (sqrt3 - 1.0));
}

}  // namespace detail

/// sech(x) = 2 e^{-|x|} / (1 + e^{-2|x|}).
inline double sech(double x) {
  const double e = std::exp(-std::abs(x));
  return 2.0 * e / (1.0 + e * e);
}

/// Q(x) = sqrt(2) sech(x).
inline double eval_Q(double x) { return detail::sqrt2 * sech(x); }

/// Q_p^{p-1}(x) = ((p+1)/2) sech^2(((p-1)/2) x).
inline double eval_soliton_power(double p, double x) {
  detail::require_soliton_power(p);
  const double s = sech(0.5 * (p - 1.0) * x);
  return 0.5 * (p + 1.0) * s * s;
}

struct QSeries {
  double Q2;  // Q^2
  double q1;
  double q2;
};

/// Coefficients of Q_p^{p-1} = Q^2 + eps q1 + eps^2 q2 + eps^3 qR.
inline QSeries eval_q_series(double x) {
  const double s = sech(x);
  const double s2 = s * s;
  const double t = std::tanh(x);
  return {2.0 * s2,
          s2 * (0.5 - 2.0 * x * t),
          0.5 * (2.0 * x * x * t * t * s2 - x * x * s2 * s2 - x * t * s2)};
}

/// (Q_p^{p-1} - Q^2 - eps q1 - eps^2 q2) / eps^3 with p = 3 + eps.
inline double eval_q_remainder(double eps, double x) {
  if (eps == 0.0) throw std::invalid_argument("q remainder is undefined at eps = 0");
  if (std::abs(eps) > 0.5) throw std::invalid_argument("q remainder requires |eps| <= 1/2");
  const auto [Q2, q1, q2] = eval_q_series(x);
  return (eval_soliton_power(3.0 + eps, x) - Q2 - eps * q1 - eps * eps * q2) / (eps * eps * eps);
}

/// Scalar profiles as first-class values, e.g. for tabulating on a grid.
struct ScalarProfile {
  enum class Kind { soliton_power, cubic_square, q1, q2, q_remainder };

  Kind kind = Kind::cubic_square;
  double parameter = 0.0;  // p for soliton_power, eps for q_remainder

  static ScalarProfile soliton_power(double p) {
    detail::require_soliton_power(p);
    return {Kind::soliton_power, p};
  }
  static ScalarProfile cubic_square() { return {Kind::cubic_square, 0.0}; }
  static ScalarProfile first_order() { return {Kind::q1, 0.0}; }
  static ScalarProfile second_order() { return {Kind::q2, 0.0}; }
  static ScalarProfile remainder(double eps) {
    if (eps == 0.0 || std::abs(eps) > 0.5) throw std::invalid_argument("remainder profile needs 0 < |eps| <= 1/2");
    return {Kind::q_remainder, eps};
  }

  double operator()(double x) const {
    switch (kind) {
      case Kind::soliton_power: return eval_soliton_power(parameter, x);
      case Kind::cubic_square: return eval_q_series(x).Q2;
      case Kind::q1: return eval_q_series(x).q1;
      case Kind::q2: return eval_q_series(x).q2;
      case Kind::q_remainder: return eval_q_remainder(parameter, x);
    }
    return 0.0;
  }
};

/// V^{(p)}(x) = -1/2 [[p+1, p-1], [p-1, p+1]] Q_p^{p-1}(x).
inline Mat2 eval_potential(double p, double x) {
  return -0.5 * detail::symmetric(p + 1.0, p - 1.0) * eval_soliton_power(p, x);
}

struct PotentialSeries {
  Mat2 V0;
  Mat2 V1;
  Mat2 V2;
};

inline PotentialSeries eval_potential_series(double x) {
  const auto [Q2, q1, q2] = eval_q_series(x);
  const Mat2 S = detail::coupling();
  const Mat2 J = detail::ones();
  return {-S * Q2, -0.5 * J * Q2 - S * q1, -0.5 * J * q1 - S * q2};
}

/// |V0|^{1/2}(x)
inline Mat2 eval_weight_half(double x) { return detail::weight_half_matrix() * eval_Q(x); }

/// |V0|^{-1/2}(x), exact inverse of eval_weight_half. Grows like cosh(x).
inline Mat2 eval_weight_half_inv(double x) { return detail::weight_half_inv_matrix() / eval_Q(x); }

/// Matrix profiles as first-class values.
struct MatrixProfile {
  enum class Kind { potential, V0, V1, V2, weight_half, weight_half_inv };

  Kind kind = Kind::V0;
  double p = 3.0;

  static MatrixProfile full_potential(double power) {
    detail::require_soliton_power(power);
    return {Kind::potential, power};
  }

  Mat2 operator()(double x) const {
    switch (kind) {
      case Kind::potential: return eval_potential(p, x);
      case Kind::V0: return eval_potential_series(x).V0;
      case Kind::V1: return eval_potential_series(x).V1;
      case Kind::V2: return eval_potential_series(x).V2;
      case Kind::weight_half: return eval_weight_half(x);
      case Kind::weight_half_inv: return eval_weight_half_inv(x);
    }
    return Mat2::Zero();
  }
};

// Right factors V |V0|^{-1/2} of the Birman-Schwinger kernels. The growing
// weight 1/Q is absorbed into the decaying scalar factors analytically:
//   Q^2 / Q = Q,   q1 / Q = sech(x)(1/2 - 2x tanh x)/sqrt2,   etc.
// and [[1,1],[1,1]] Q|V0|^{-1/2} = [[1,1],[1,1]] / sqrt3.

struct RightFactorSeries {
  Mat2 B0;  // V0 |V0|^{-1/2} = -|V0|^{1/2}
  Mat2 B1;  // V1 |V0|^{-1/2}
  Mat2 B2;  // V2 |V0|^{-1/2}
};

inline RightFactorSeries eval_right_factor_series(double x) {
  const double s = sech(x);
  const double t = std::tanh(x);
  const double Q = detail::sqrt2 * s;
  const double q1_over_Q = s * (0.5 - 2.0 * x * t) / detail::sqrt2;
  const double q2_over_Q = 0.5 * (2.0 * x * x * t * t * s - x * x * s * s * s - x * t * s) / detail::sqrt2;
  const Mat2 M = detail::weight_half_matrix();
  const Mat2 J = detail::ones() / detail::sqrt3;
  return {-M * Q, -0.5 * J * Q - M * q1_over_Q, -0.5 * J * q1_over_Q - M * q2_over_Q};
}

/// sech^2(c x) / sech(x) for c > 0 without forming either factor separately.
inline double sech2_over_sech(double c, double x) {
  const double a = std::abs(x);
  const double ec = std::exp(-2.0 * c * a);
  const double d = 1.0 + ec;
  return 2.0 * std::exp(-(2.0 * c - 1.0) * a) * (1.0 + std::exp(-2.0 * a)) / (d * d);
}

/// V^{(p)} |V0|^{-1/2}(x).
inline Mat2 eval_right_factor(double p, double x) {
  detail::require_soliton_power(p);
  const double ratio = 0.5 * (p + 1.0) * sech2_over_sech(0.5 * (p - 1.0), x) / detail::sqrt2;
  return -0.5 * detail::symmetric(p + 1.0, p - 1.0) * detail::weight_half_inv_matrix() * ratio;
}

}  // namespace nlsbif
