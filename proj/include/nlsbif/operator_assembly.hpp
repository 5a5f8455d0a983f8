#pragma once

// Dense Nystrom realizations of the Birman-Schwinger operator
//
//   K_{alpha,p} = |V0|^{1/2} R^{(alpha)} V^{(p)} |V0|^{-1/2}
//
// and of the pieces K_{mn} of its expansion in alpha and eps = p - 3:
//
//   K_{-1k} = |V0|^{1/2} R_{-1} V_k |V0|^{-1/2}
//   K_{0k}  = |V0|^{1/2} R_0    V_k |V0|^{-1/2}
//   K_{10}  = |V0|^{1/2} R_1    V_0 |V0|^{-1/2}
//
// Entry M[(i,a),(j,b)] approximates the kernel [A(x_i) R(x_i,x_j) B(x_j)]_{ab}
// times the quadrature weight of x_j, with A = |V0|^{1/2} and B the decaying
// right factor from soliton_potential.hpp.
//
// Each resolvent entry is k(|x - y|) with k smooth on [0, inf), so the
// integrand has a derivative jump at y = x. On a uniform grid that point is a
// node, and the trapezoid error there is known exactly from Euler-Maclaurin
// applied on each side of the kink:
//
//   I = T + (h^2/6) k'(0) g(x)
//         - (h^4/360) (3 k'(0) g''(x) + k'''(0) g(x))
//         + (h^6/15120) (5 k'(0) g''''(x) + 10 k'''(0) g''(x) + k^(5)(0) g(x)) + O(h^8)
//
// where g = B f is the smooth part. The derivatives of g come from 7-point
// central stencils, which makes the correction a symmetric banded matrix and
// keeps K00 exactly self-adjoint in the quadrature inner product.

#include "nlsbif/grid_quadrature.hpp"
#include "nlsbif/soliton_potential.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nlsbif {

enum class KernelTag { Km10, Km11, Km12, K00, K01, K02, K10, Full, Custom };

inline std::string to_string(KernelTag tag) {
  switch (tag) {
    case KernelTag::Km10: return "K_-10";
    case KernelTag::Km11: return "K_-11";
    case KernelTag::Km12: return "K_-12";
    case KernelTag::K00: return "K_00";
    case KernelTag::K01: return "K_01";
    case KernelTag::K02: return "K_02";
    case KernelTag::K10: return "K_10";
    case KernelTag::Full: return "K_full";
    case KernelTag::Custom: return "custom";
  }
  return "unknown";
}

/// Smallest alpha accepted by the full resolvent kernel.
inline constexpr double kMinFullAlpha = 1e-4;

/// R_{-1}, R_0, R_1 of the small-alpha expansion, or the full resolvent R^{(alpha)}.
struct ResolventPiece {
  enum class Kind { Rm1, R0, R1, Full };

  Kind kind = Kind::R0;
  double alpha = 0.0;

  static ResolventPiece rm1() { return {Kind::Rm1, 0.0}; }
  static ResolventPiece r0() { return {Kind::R0, 0.0}; }
  static ResolventPiece r1() { return {Kind::R1, 0.0}; }
  static ResolventPiece full(double a) {
    if (!(a > 0.0) || !(a < std::numbers::sqrt2)) {
      throw std::invalid_argument("full resolvent needs 0 < alpha < sqrt(2), got " + std::to_string(a));
    }
    return {Kind::Full, a};
  }
};

/// Scalar kernel k(s), s = |x - y| >= 0, with its odd derivatives at s = 0.
struct ScalarKernel {
  std::function<double(double)> value;
  std::array<double, 3> odd_derivatives{0.0, 0.0, 0.0};  // k'(0), k'''(0), k^(5)(0)

  bool is_zero() const { return !value; }
  bool has_kink() const {
    return odd_derivatives[0] != 0.0 || odd_derivatives[1] != 0.0 || odd_derivatives[2] != 0.0;
  }
};

namespace detail {

// e^{-c s} / (2c)
inline ScalarKernel decaying_exponential(double c) {
  const double n = -0.5;
  return {[c](double s) { return std::exp(-c * s) / (2.0 * c); }, {n, n * c * c, n * c * c * c * c}};
}

}  // namespace detail

/// Diagonal entry c (0 or 1) of the resolvent piece as a function of |x - y|.
inline ScalarKernel resolvent_component(const ResolventPiece& piece, int c) {
  using K = ResolventPiece::Kind;
  switch (piece.kind) {
    case K::Rm1:
      if (c == 0) return {[](double) { return 0.5; }, {}};
      return {};
    case K::R0:
      if (c == 0) return {[](double s) { return -0.5 * s; }, {-0.5, 0.0, 0.0}};
      return detail::decaying_exponential(std::numbers::sqrt2);
    case K::R1:
      if (c == 0) return {[](double s) { return 0.25 * s * s; }, {}};
      return {};
    case K::Full:
      if (c == 0) return detail::decaying_exponential(piece.alpha);
      return detail::decaying_exponential(std::sqrt(2.0 - piece.alpha * piece.alpha));
  }
  return {};
}

inline Mat2 eval_resolvent_kernel(const ResolventPiece& piece, double x, double y) {
  if (piece.kind == ResolventPiece::Kind::Full) ResolventPiece::full(piece.alpha);  // validates
  const double s = std::abs(x - y);
  Mat2 r = Mat2::Zero();
  for (int c = 0; c < 2; ++c) {
    const ScalarKernel k = resolvent_component(piece, c);
    if (!k.is_zero()) r(c, c) = k.value(s);
  }
  return r;
}

namespace detail {

// Adds coeff * stencil (7-point, centred) to the band of m, truncating at the ends.
inline void add_stencil(Eigen::MatrixXd& m, const std::array<double, 7>& stencil, double coeff) {
  const int n = static_cast<int>(m.rows());
  for (int i = 0; i < n; ++i) {
    for (int k = -3; k <= 3; ++k) {
      const int j = i + k;
      if (j >= 0 && j < n) m(i, j) += coeff * stencil[k + 3];
    }
  }
}

}  // namespace detail

/// Quadrature matrix Kq with (Kq g)_i ~ integral of k(|x_i - y|) g(y) dy.
/// Uniform grids get the kink correction; other rules use plain Nystrom weights.
inline Eigen::MatrixXd scalar_kernel_matrix(const Grid& grid, const ScalarKernel& kernel) {
  const int n = grid.size();
  const auto& x = grid.nodes();
  const auto& w = grid.weights();
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = kernel.value(std::abs(x[i] - x[j])) * w[j];
  }
  if (!grid.is_uniform() || !kernel.has_kink()) return m;

  const double h = grid.spacing();
  const auto [k1, k3, k5] = kernel.odd_derivatives;
  const double h2 = h * h;
  const double h4 = h2 * h2;
  const double h6 = h4 * h2;
  const double d0 = h2 / 6.0 * k1 - h4 / 360.0 * k3 + h6 / 15120.0 * k5;
  const double d2 = -h4 / 120.0 * k1 + h6 / 1512.0 * k3;
  const double d4 = h6 / 3024.0 * k1;
  // sixth-order second derivative and fourth-order fourth derivative
  constexpr std::array<double, 7> second{1.0 / 90, -3.0 / 20, 1.5, -49.0 / 18, 1.5, -3.0 / 20, 1.0 / 90};
  constexpr std::array<double, 7> fourth{-1.0 / 6, 2.0, -6.5, 28.0 / 3, -6.5, 2.0, -1.0 / 6};
  m.diagonal().array() += d0;
  detail::add_stencil(m, second, d2 / h2);
  detail::add_stencil(m, fourth, d4 / h4);
  return m;
}

/// Dense operator on grid functions, immutable after construction.
class KernelOperator {
 public:
  KernelOperator(GridPtr grid, Eigen::MatrixXd matrix, KernelTag tag, double alpha = 0.0, double eps = 0.0)
      : grid_(std::move(grid)), matrix_(std::move(matrix)), tag_(tag), alpha_(alpha), eps_(eps) {
    const Eigen::Index n = 2 * grid_->size();
    if (matrix_.rows() != n || matrix_.cols() != n) throw std::invalid_argument("operator matrix has wrong shape");
  }

  const GridPtr& grid() const { return grid_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  KernelTag tag() const { return tag_; }
  double alpha() const { return alpha_; }
  double eps() const { return eps_; }

  GridFunction apply(const GridFunction& f) const {
    if (f.grid() != grid_ && !f.grid()->same_layout(*grid_)) {
      throw std::invalid_argument("operator and function live on different grids");
    }
    return {grid_, matrix_ * f.values()};
  }

  GridFunction operator()(const GridFunction& f) const { return apply(f); }

 private:
  GridPtr grid_;
  Eigen::MatrixXd matrix_;
  KernelTag tag_;
  double alpha_;
  double eps_;
};

inline GridFunction apply(const KernelOperator& op, const GridFunction& f) { return op.apply(f); }

using RightFactor = std::function<Mat2(double)>;

/// Generic assembly of |V0|^{1/2} R B for a right factor B given in closed form.
inline KernelOperator assemble_kernel(const GridPtr& grid, const ResolventPiece& piece, const RightFactor& right,
                                      KernelTag tag, double alpha = 0.0, double eps = 0.0) {
  const int n = grid->size();
  Eigen::Matrix<double, Eigen::Dynamic, 4> A(n, 4), B(n, 4);  // row-major flattening of the 2x2 profiles
  for (int i = 0; i < n; ++i) {
    const double x = grid->node(i);
    const Mat2 a = eval_weight_half(x);
    const Mat2 b = right(x);
    A.row(i) << a(0, 0), a(0, 1), a(1, 0), a(1, 1);
    B.row(i) << b(0, 0), b(0, 1), b(1, 0), b(1, 1);
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int c = 0; c < 2; ++c) {
    const ScalarKernel kernel = resolvent_component(piece, c);
    if (kernel.is_zero()) continue;
    const Eigen::MatrixXd kq = scalar_kernel_matrix(*grid, kernel);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const auto left = A.col(2 * a + c);
        const auto rightcol = B.col(2 * c + b);
        auto block = m.block(a * n, b * n, n, n);
        for (int j = 0; j < n; ++j) {
          const double bj = rightcol[j];
          for (int i = 0; i < n; ++i) block(i, j) += left[i] * kq(i, j) * bj;
        }
      }
    }
  }
  return {grid, std::move(m), tag, alpha, eps};
}

/// One of the expansion operators K_{mn}.
inline KernelOperator assemble_K(KernelTag tag, const GridPtr& grid) {
  auto series = [](int k) -> RightFactor {
    return [k](double x) {
      const auto b = eval_right_factor_series(x);
      return k == 0 ? b.B0 : (k == 1 ? b.B1 : b.B2);
    };
  };
  switch (tag) {
    case KernelTag::Km10: return assemble_kernel(grid, ResolventPiece::rm1(), series(0), tag);
    case KernelTag::Km11: return assemble_kernel(grid, ResolventPiece::rm1(), series(1), tag);
    case KernelTag::Km12: return assemble_kernel(grid, ResolventPiece::rm1(), series(2), tag);
    case KernelTag::K00: return assemble_kernel(grid, ResolventPiece::r0(), series(0), tag);
    case KernelTag::K01: return assemble_kernel(grid, ResolventPiece::r0(), series(1), tag);
    case KernelTag::K02: return assemble_kernel(grid, ResolventPiece::r0(), series(2), tag);
    case KernelTag::K10: return assemble_kernel(grid, ResolventPiece::r1(), series(0), tag);
    default: break;
  }
  throw std::invalid_argument("assemble_K: tag " + to_string(tag) + " is not an expansion operator");
}

/// Full Birman-Schwinger operator K_{alpha,p}.
inline KernelOperator assemble_full_K(double alpha, double p, const GridPtr& grid) {
  if (!(alpha >= kMinFullAlpha)) {
    throw std::invalid_argument("full kernel needs alpha >= " + std::to_string(kMinFullAlpha));
  }
  if (!(p > 1.0 && p < 5.0)) throw std::invalid_argument("full kernel needs 1 < p < 5");
  return assemble_kernel(grid, ResolventPiece::full(alpha), [p](double x) { return eval_right_factor(p, x); },
                         KernelTag::Full, alpha, p - 3.0);
}

namespace detail {

// S = W^{1/2} M W^{-1/2}: the operator written in an orthonormal frame of the quadrature inner product.
inline Eigen::MatrixXd symmetrized_frame(const KernelOperator& op) {
  const auto& w = op.grid()->weights();
  Eigen::VectorXd sw(2 * w.size());
  sw << w.cwiseSqrt(), w.cwiseSqrt();
  return sw.asDiagonal() * op.matrix() * sw.cwiseInverse().asDiagonal();
}

}  // namespace detail

/// Frobenius norm of M - M^*, the adjoint taken in the quadrature inner product.
/// Bounds the operator-norm defect from above.
inline double self_adjoint_defect(const KernelOperator& op) {
  const Eigen::MatrixXd s = detail::symmetrized_frame(op);
  return (s - s.transpose()).norm();
}

/// Discrete Hilbert-Schmidt norm (double integral of the squared kernel).
inline double hilbert_schmidt_norm(const KernelOperator& op) { return detail::symmetrized_frame(op).norm(); }

}  // namespace nlsbif
