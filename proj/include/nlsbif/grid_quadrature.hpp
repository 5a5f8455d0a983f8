#pragma once

// Truncated-domain grids, two-component grid functions, the quadrature inner
// product, and the rank-one projections P (onto v) and P0 (onto w0).

#include "nlsbif/soliton_potential.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace nlsbif {

enum class QuadratureRule { trapezoid, gauss_legendre_composite };

inline std::string to_string(QuadratureRule rule) {
  return rule == QuadratureRule::trapezoid ? "trapezoid" : "gauss_legendre_composite";
}

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Nodes and weights on [-L, L]. Immutable once built.
class Grid {
 public:
  /// Points per panel of the composite Gauss-Legendre rule.
  static constexpr int kPanelOrder = 5;

  double half_length() const { return half_length_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  QuadratureRule rule() const { return rule_; }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double node(int i) const { return nodes_[i]; }
  double weight(int i) const { return weights_[i]; }

  bool is_uniform() const { return rule_ == QuadratureRule::trapezoid; }

  /// Node spacing of a uniform grid.
  double spacing() const {
    if (!is_uniform()) throw std::logic_error("spacing() requires a uniform (trapezoid) grid");
    return 2.0 * half_length_ / (size() - 1);
  }

  bool same_layout(const Grid& other) const {
    return half_length_ == other.half_length_ && size() == other.size() && rule_ == other.rule_;
  }

  friend GridPtr make_grid(double L, int N, QuadratureRule rule);

 private:
  Grid(double L, QuadratureRule rule, Eigen::VectorXd nodes, Eigen::VectorXd weights)
      : half_length_(L), rule_(rule), nodes_(std::move(nodes)), weights_(std::move(weights)) {}

  double half_length_;
  QuadratureRule rule_;
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

/// Trapezoid: N equispaced nodes including both ends (odd N puts a node at 0).
/// Composite Gauss-Legendre: N / 5 equal panels with 5 nodes each; N must be a
/// multiple of 5 (an odd panel count puts a node at 0).
inline GridPtr make_grid(double L, int N, QuadratureRule rule = QuadratureRule::trapezoid) {
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid half-length must be positive");
  if (N < 16) throw std::invalid_argument("grid needs at least 16 points, got " + std::to_string(N));
  Eigen::VectorXd x(N), w(N);
  if (rule == QuadratureRule::trapezoid) {
    const double h = 2.0 * L / (N - 1);
    for (int i = 0; i < N; ++i) {
      // symmetric construction so that x[i] == -x[N-1-i] exactly
      x[i] = (i - 0.5 * (N - 1)) * h;
      w[i] = h;
    }
    w[0] = w[N - 1] = 0.5 * h;
  } else {
    constexpr int m = Grid::kPanelOrder;
    if (N % m != 0) {
      throw std::invalid_argument("composite Gauss-Legendre needs N divisible by " + std::to_string(m));
    }
    // 5-point Gauss-Legendre on [-1, 1]
    const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    const std::array<double, m> t{-b, -a, 0.0, a, b};
    const std::array<double, m> tw{wb, wa, 128.0 / 225.0, wa, wb};
    const int panels = N / m;
    const double half_panel = L / panels;
    for (int k = 0; k < panels; ++k) {
      const double centre = (2 * k + 1 - panels) * half_panel;
      for (int j = 0; j < m; ++j) {
        x[k * m + j] = centre + half_panel * t[j];
        w[k * m + j] = half_panel * tw[j];
      }
    }
  }
  return GridPtr(new Grid(L, rule, std::move(x), std::move(w)));
}

/// Two-component function sampled on a grid. Values are stored component-major:
/// entries [0, N) hold the first component, [N, 2N) the second.
class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(GridPtr grid) : grid_(std::move(grid)), values_(Eigen::VectorXd::Zero(2 * grid_->size())) {}

  GridFunction(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != 2 * grid_->size()) throw std::invalid_argument("grid function has wrong length");
    if (!values_.allFinite()) throw std::domain_error("grid function has non-finite entries");
  }

  static GridFunction sample(GridPtr grid, const std::function<Eigen::Vector2d(double)>& f) {
    const int n = grid->size();
    Eigen::VectorXd vals(2 * n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d y = f(grid->node(i));
      vals[i] = y[0];
      vals[n + i] = y[1];
    }
    return {std::move(grid), std::move(vals)};
  }

  const GridPtr& grid() const { return grid_; }
  int size() const { return grid_ ? grid_->size() : 0; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  auto first() const { return values_.head(size()); }
  auto second() const { return values_.tail(size()); }

  GridFunction& operator+=(const GridFunction& o) {
    check(o);
    values_ += o.values_;
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check(o);
    values_ -= o.values_;
    return *this;
  }
  GridFunction& operator*=(double a) {
    values_ *= a;
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
  friend GridFunction operator*(GridFunction a, double s) { return a *= s; }
  friend GridFunction operator-(GridFunction a) { return a *= -1.0; }

  void check(const GridFunction& o) const {
    if (grid_ != o.grid_ && !(grid_ && o.grid_ && grid_->same_layout(*o.grid_))) {
      throw std::invalid_argument("grid functions live on different grids");
    }
  }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

inline void require_same_grid(const GridFunction& f, const GridFunction& g) { f.check(g); }

/// <f, g> = sum_i w_i (f1 g1 + f2 g2)(x_i).
inline double inner(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  const auto& w = f.grid()->weights();
  return (w.array() * (f.first().array() * g.first().array() + f.second().array() * g.second().array())).sum();
}

inline double norm(const GridFunction& f) { return std::sqrt(inner(f, f)); }

/// Weighted integral of a scalar sampled on the grid.
inline double integrate(const Grid& grid, const Eigen::VectorXd& values) { return grid.weights().dot(values); }

/// Orthogonal rank-one projection onto span{d} and its complement.
class RankOneProjection {
 public:
  explicit RankOneProjection(GridFunction direction)
      : direction_(std::move(direction)), norm_sq_(inner(direction_, direction_)) {
    if (!(norm_sq_ > 0.0)) throw std::invalid_argument("projection direction must be nonzero");
  }

  const GridFunction& direction() const { return direction_; }
  double direction_norm_sq() const { return norm_sq_; }

  double coefficient(const GridFunction& f) const { return inner(direction_, f) / norm_sq_; }
  GridFunction apply(const GridFunction& f) const { return coefficient(f) * direction_; }
  GridFunction complement(const GridFunction& f) const { return f - apply(f); }

 private:
  GridFunction direction_;
  double norm_sq_;
};

/// v = |V0|^{1/2} (1, 0)^T.
inline GridFunction sample_v(const GridPtr& grid) {
  return GridFunction::sample(grid, [](double x) -> Eigen::Vector2d { return eval_weight_half(x).col(0); });
}

/// Threshold resonance u0 = (2 - Q^2, -Q^2) = 2 (tanh^2 x, -sech^2 x). Bounded, not decaying.
inline Eigen::Vector2d eval_resonance(double x) {
  const double s = sech(x);
  const double t = std::tanh(x);
  return {2.0 * t * t, -2.0 * s * s};
}

/// w0 = |V0|^{1/2} u0.
inline GridFunction sample_w0(const GridPtr& grid) {
  return GridFunction::sample(grid, [](double x) -> Eigen::Vector2d { return eval_weight_half(x) * eval_resonance(x); });
}

inline GridFunction project_P(const GridFunction& f) { return RankOneProjection(sample_v(f.grid())).apply(f); }
inline GridFunction project_Pbar(const GridFunction& f) { return RankOneProjection(sample_v(f.grid())).complement(f); }
inline GridFunction project_P0(const GridFunction& f) { return RankOneProjection(sample_w0(f.grid())).apply(f); }
inline GridFunction project_P0bar(const GridFunction& f) { return RankOneProjection(sample_w0(f.grid())).complement(f); }

}  // namespace nlsbif
