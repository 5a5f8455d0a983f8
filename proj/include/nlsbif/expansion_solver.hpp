#pragma once

// Lyapunov-Schmidt expansion of the edge bifurcation near p = 3:
//
//   w     = w0 + eps w1 + eps^2 w2 + O(eps^3)
//   alpha = eps^2 alpha2 + O(eps^3)
//
// w0 is explicit. The components of w1, w2 along v are explicit; the
// components orthogonal to v are obtained by inverting Pbar (K00 + 1) Pbar on
// {v, w0}^perp with a Galerkin method in an enveloped Fourier basis.

#include "nlsbif/grid_quadrature.hpp"
#include "nlsbif/operator_assembly.hpp"
#include "nlsbif/soliton_potential.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlsbif {

/// Raised when a numerical step (Galerkin solve, denominator, cross-check) fails.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GalerkinOptions {
  int n_modes = 96;               // Fourier modes per component and parity
  double half_period = 20.0;      // modes are cos/sin(k pi x / half_period); clipped to L
  double envelope_rate = 0.5;     // envelope sech(envelope_rate * x)
  double prune_threshold = 1e-10; // relative Gram eigenvalue below which a direction is dropped
  double condition_ceiling = 1e8; // retained Gram condition never exceeds this
};

/// Orthonormal (in the quadrature inner product) functions spanning a subspace of {v, w0}^perp.
struct GalerkinBasis {
  GridPtr grid;
  Eigen::MatrixXd functions;  // 2N x m, column j holds phi_j
  double gram_condition = 1.0;
  int raw_count = 0;

  int size() const { return static_cast<int>(functions.cols()); }
  GridFunction function(int j) const { return {grid, functions.col(j)}; }
};

inline GridFunction build_w0(const GridPtr& grid) { return sample_w0(grid); }

inline GalerkinBasis build_galerkin_basis(const GridPtr& grid, int n_modes, const GalerkinOptions& opts = {}) {
  if (n_modes < 8) throw std::invalid_argument("Galerkin basis needs n_modes >= 8");
  const int n = grid->size();
  const double period = std::min(opts.half_period, grid->half_length());
  const int per_component = 2 * n_modes + 1;
  const int raw = 2 * per_component;
  const auto& x = grid->nodes();

  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(2 * n, raw);
  for (int comp = 0; comp < 2; ++comp) {
    for (int i = 0; i < n; ++i) {
      const double env = sech(opts.envelope_rate * x[i]);
      const double theta = std::numbers::pi * x[i] / period;
      const int row = comp * n + i;
      const int base = comp * per_component;
      phi(row, base) = env;
      for (int k = 1; k <= n_modes; ++k) {
        phi(row, base + 2 * k - 1) = env * std::cos(k * theta);
        phi(row, base + 2 * k) = env * std::sin(k * theta);
      }
    }
  }

  Eigen::VectorXd w(2 * n);
  w << grid->weights(), grid->weights();
  // v and w0 are orthogonal, so sequential projection removes both.
  for (const GridFunction& d : {sample_v(grid), sample_w0(grid)}) {
    const Eigen::VectorXd wd = w.cwiseProduct(d.values());
    const double dd = wd.dot(d.values());
    phi -= d.values() * ((wd.transpose() * phi) / dd);
  }

  const Eigen::MatrixXd gram = phi.transpose() * w.asDiagonal() * phi;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double top = lam.maxCoeff();
  const double cut = std::max(opts.prune_threshold, 1.0 / opts.condition_ceiling) * top;
  std::vector<int> keep;
  for (int k = 0; k < lam.size(); ++k) {
    if (lam[k] > cut) keep.push_back(k);
  }
  if (keep.empty()) throw NumericalFailure("Galerkin basis is empty after pruning");

  Eigen::MatrixXd coeffs(raw, static_cast<Eigen::Index>(keep.size()));
  double smallest = top;
  for (std::size_t c = 0; c < keep.size(); ++c) {
    coeffs.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]) / std::sqrt(lam[keep[c]]);
    smallest = std::min(smallest, lam[keep[c]]);
  }
  return {grid, phi * coeffs, top / smallest, raw};
}

/// Factorized Galerkin matrix B_jk = <phi_j, (K00 + 1) phi_k>.
class ComplementInverse {
 public:
  ComplementInverse(GalerkinBasis basis, const KernelOperator& k00, double precondition_tol = 1e-8)
      : basis_(std::move(basis)), v_(sample_v(basis_.grid)), w0_(sample_w0(basis_.grid)), tol_(precondition_tol) {
    if (k00.tag() != KernelTag::K00) throw std::invalid_argument("ComplementInverse needs the K00 operator");
    const int n = basis_.grid->size();
    weights_.resize(2 * n);
    weights_ << basis_.grid->weights(), basis_.grid->weights();
    const Eigen::MatrixXd applied = k00.matrix() * basis_.functions + basis_.functions;
    B_ = basis_.functions.transpose() * weights_.asDiagonal() * applied;
    lu_.compute(B_);
    const double smin = Eigen::JacobiSVD<Eigen::MatrixXd>(B_).singularValues().minCoeff();
    const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(B_).singularValues().maxCoeff();
    condition_ = smax / smin;
    if (!(smin > 1e-12 * smax)) throw NumericalFailure("Galerkin matrix is numerically singular");
  }

  const GalerkinBasis& basis() const { return basis_; }
  const Eigen::MatrixXd& matrix() const { return B_; }
  double condition() const { return condition_; }

  /// Solves Pbar (K00 + 1) Pbar x = g for x in span{phi_j}; g must be orthogonal to v and w0.
  GridFunction solve(const GridFunction& g) const {
    const double gn = norm(g);
    if (std::abs(inner(g, v_)) > tol_ * gn * norm(v_) || std::abs(inner(g, w0_)) > tol_ * gn * norm(w0_)) {
      throw std::invalid_argument("invert_on_complement: right-hand side is not orthogonal to v and w0");
    }
    const Eigen::VectorXd b = basis_.functions.transpose() * weights_.cwiseProduct(g.values());
    Eigen::VectorXd a = lu_.solve(b);
    a += lu_.solve(b - B_ * a);  // one step of iterative refinement
    return {basis_.grid, basis_.functions * a};
  }

 private:
  GalerkinBasis basis_;
  GridFunction v_;
  GridFunction w0_;
  double tol_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd B_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
};

inline GridFunction invert_on_complement(const GridFunction& g, const GalerkinBasis& basis, const KernelOperator& k00) {
  return ComplementInverse(basis, k00).solve(g);
}

struct ExpansionResult {
  GridFunction w0;
  GridFunction w1;
  GridFunction w2;
  double alpha2 = 0.0;
  std::array<double, 4> numerator_terms{};
  std::array<double, 2> denominator_terms{};
  Mat2 A = Mat2::Zero();
  double identity_residual = 0.0;
  double c2 = 0.0;
};

/// Bookkeeping of how well the defining relations hold for a computed expansion.
struct RelationResiduals {
  double range_w0 = 0.0;         // |K_-10 w0|
  double range_w1 = 0.0;         // |K_-11 w0 + K_-10 w1|
  double range_w2 = 0.0;         // |K_-10 w2 + K_-11 w1 + K_-12 w0 + alpha2 (K00+1) w0|
  double complement_w1 = 0.0;    // |Pbar (K00+1) w1 + Pbar K01 w0|
  double complement_w2 = 0.0;    // |Pbar (K00+1) w2 + Pbar K01 w1 + Pbar K02 w0 + alpha2 Pbar K10 w0|
  double solvability_w2 = 0.0;   // <w0, rhs of the w2 complement equation>
  double galerkin_residual = 0.0; // relative |Pbar (K00+1) Pbar w1 - g| / |g|
};

struct SingleIntegralCheck {
  double c2 = 0.0;
  double single_integral = 0.0;  // combined inner product from the one-dimensional reduction
  double double_integral = 0.0;  // <w0, K02 w0> + 1/4 <w0, K00 K_-12 w0> from the assembled operators
  double h_at_zero = 0.0;        // -1/2 int |y| (4Q^2 - 3Q^4) dy
  double h_profile_error = 0.0;  // max |h(x) + Q^2(x)|
  double exp_profile_error = 0.0;// max |(1/(2 sqrt2)) int e^{-sqrt2|x-y|}(2Q^2 - 3Q^4) dy + Q^2(x)|
};

/// Holds the grid, the reference directions v and w0, the cached K00 and the
/// Galerkin factorization. Other operators are assembled when first needed and
/// kept only while the grid is small enough.
class ExpansionSolver {
 public:
  /// Grids with more points than this keep only K00 resident.
  static constexpr int kCacheLimit = 2501;

  explicit ExpansionSolver(GridPtr grid, GalerkinOptions opts = {})
      : grid_(std::move(grid)),
        opts_(opts),
        v_(sample_v(grid_)),
        w0_(sample_w0(grid_)),
        P_(v_),
        k00_(assemble_K(KernelTag::K00, grid_)) {}

  const GridPtr& grid() const { return grid_; }
  const GridFunction& v() const { return v_; }
  const GridFunction& w0() const { return w0_; }
  const KernelOperator& k00() const { return k00_; }
  const GalerkinOptions& options() const { return opts_; }

  GridFunction P(const GridFunction& f) const { return P_.apply(f); }
  GridFunction Pbar(const GridFunction& f) const { return P_.complement(f); }

  GridFunction apply(KernelTag tag, const GridFunction& f) {
    if (tag == KernelTag::K00) return k00_.apply(f);
    if (auto it = cache_.find(tag); it != cache_.end()) return it->second.apply(f);
    KernelOperator op = assemble_K(tag, grid_);
    GridFunction out = op.apply(f);
    if (grid_->size() <= kCacheLimit) cache_.emplace(tag, std::move(op));
    return out;
  }

  const ComplementInverse& complement_inverse() {
    if (!inverse_) inverse_.emplace(build_galerkin_basis(grid_, opts_.n_modes, opts_), k00_);
    return *inverse_;
  }

  GridFunction invert_on_complement(const GridFunction& g) { return complement_inverse().solve(g); }

  /// Right-hand side g of Pbar (K00+1) Pbar (Pbar w1) = g.
  GridFunction w1_rhs() {
    const GridFunction a = apply(KernelTag::Km11, w0_);
    return -(0.25 * Pbar(k00_.apply(a)) + Pbar(apply(KernelTag::K01, w0_)));
  }

  GridFunction solve_w1() {
    const GridFunction pw1 = 0.25 * apply(KernelTag::Km11, w0_);
    return pw1 + invert_on_complement(w1_rhs());
  }

  double verify_first_order_identity() {
    const double a = first_order_summands()[0];
    const double b = first_order_summands()[1];
    return a + b;
  }

  /// <w0, 1/4 K00 K_-11 w0> and <w0, K01 w0>; they cancel.
  std::array<double, 2> first_order_summands() {
    return {0.25 * inner(w0_, k00_.apply(apply(KernelTag::Km11, w0_))), inner(w0_, apply(KernelTag::K01, w0_))};
  }

  Mat2 assemble_A() {
    Mat2 A;
    A(0, 0) = inner(w0_, apply(KernelTag::K10, w0_));
    A(0, 1) = inner(w0_, k00_.apply(v_));
    A(1, 0) = inner(v_, k00_.apply(w0_) + w0_);
    A(1, 1) = inner(v_, apply(KernelTag::Km10, v_));
    return A;
  }

  std::array<double, 2> denominator_terms() {
    const GridFunction kw0 = k00_.apply(w0_);
    return {inner(w0_, apply(KernelTag::K10, w0_)), 0.25 * inner(w0_, k00_.apply(kw0 + w0_))};
  }

  /// Fills w0, w1, the six inner products and alpha2.
  ExpansionResult compute_alpha2() {
    ExpansionResult r;
    r.w0 = w0_;
    r.w1 = solve_w1();
    r.numerator_terms = {-0.25 * inner(w0_, k00_.apply(apply(KernelTag::Km11, r.w1))),
                         -0.25 * inner(w0_, k00_.apply(apply(KernelTag::Km12, w0_))),
                         -inner(w0_, apply(KernelTag::K01, r.w1)), -inner(w0_, apply(KernelTag::K02, w0_))};
    r.denominator_terms = denominator_terms();
    const double den = r.denominator_terms[0] + r.denominator_terms[1];
    if (!(std::abs(den) >= 1e-6)) throw NumericalFailure("alpha2 denominator vanishes; assembly is inconsistent");
    const auto& n = r.numerator_terms;
    r.alpha2 = (n[0] + n[1] + n[2] + n[3]) / den;
    return r;
  }

  /// Right-hand side of the w2 complement equation (before the sign flip).
  GridFunction w2_complement_source(const GridFunction& w1, double alpha2) {
    const GridFunction k00w0 = k00_.apply(w0_);
    return 0.25 * Pbar(k00_.apply(apply(KernelTag::Km11, w1))) + 0.25 * Pbar(k00_.apply(apply(KernelTag::Km12, w0_))) +
           0.25 * alpha2 * Pbar(k00_.apply(k00w0 + w0_)) + Pbar(apply(KernelTag::K01, w1)) +
           Pbar(apply(KernelTag::K02, w0_)) + alpha2 * Pbar(apply(KernelTag::K10, w0_));
  }

  GridFunction solve_w2(const GridFunction& w1, double alpha2) {
    const GridFunction pw2 =
        0.25 * (apply(KernelTag::Km11, w1) + apply(KernelTag::Km12, w0_) + alpha2 * (k00_.apply(w0_) + w0_));
    return pw2 + invert_on_complement(-w2_complement_source(w1, alpha2));
  }

  SingleIntegralCheck single_integral_crosscheck(double agreement_tol = 1e-6) {
    SingleIntegralCheck out;
    const int n = grid_->size();
    const auto& x = grid_->nodes();
    Eigen::VectorXd Q2(n), core4(n), core2(n), first(n), second(n);
    for (int i = 0; i < n; ++i) {
      const auto [q2sq, q1, q2] = eval_q_series(x[i]);
      Q2[i] = q2sq;
      core4[i] = q2sq * q1 - q1 + 3.0 * q2sq * q2 - 4.0 * q2;
      core2[i] = q2sq * q1 - q1 + 3.0 * q2sq * q2 - 2.0 * q2;
    }
    out.c2 = 0.5 * integrate(*grid_, core4);
    first = Q2.cwiseProduct(core4 - 0.5 * out.c2 * Q2);
    second = Q2.cwiseProduct(core2 - 0.25 * out.c2 * Q2);
    out.single_integral = -integrate(*grid_, first) - integrate(*grid_, second);
    out.double_integral =
        inner(w0_, apply(KernelTag::K02, w0_)) + 0.25 * inner(w0_, k00_.apply(apply(KernelTag::Km12, w0_)));

    // The kernels of R0 turn 4Q^2 - 3Q^4 and 2Q^2 - 3Q^4 into -Q^2.
    const Eigen::VectorXd Q4 = Q2.cwiseProduct(Q2);
    const Eigen::VectorXd h =
        scalar_kernel_matrix(*grid_, resolvent_component(ResolventPiece::r0(), 0)) * (4.0 * Q2 - 3.0 * Q4);
    const Eigen::VectorXd e =
        scalar_kernel_matrix(*grid_, resolvent_component(ResolventPiece::r0(), 1)) * (2.0 * Q2 - 3.0 * Q4);
    out.h_at_zero = h[n / 2];
    out.h_profile_error = (h + Q2).cwiseAbs().maxCoeff();
    out.exp_profile_error = (e + Q2).cwiseAbs().maxCoeff();

    const double scale = std::max(std::abs(out.single_integral), std::abs(out.double_integral));
    if (std::abs(out.single_integral - out.double_integral) > agreement_tol * scale) {
      throw NumericalFailure("single- and double-integral evaluations disagree: " +
                             std::to_string(out.single_integral) + " vs " + std::to_string(out.double_integral));
    }
    return out;
  }

  /// Complete expansion: w0, w1, w2, alpha2, A, first-order identity and c2.
  ExpansionResult solve() {
    ExpansionResult r = compute_alpha2();
    r.w2 = solve_w2(r.w1, r.alpha2);
    r.A = assemble_A();
    r.identity_residual = verify_first_order_identity();
    r.c2 = single_integral_crosscheck().c2;
    return r;
  }

  RelationResiduals relation_residuals(const ExpansionResult& r) {
    RelationResiduals out;
    const GridFunction k00w0 = k00_.apply(r.w0);
    out.range_w0 = norm(apply(KernelTag::Km10, r.w0));
    out.range_w1 = norm(apply(KernelTag::Km11, r.w0) + apply(KernelTag::Km10, r.w1));
    out.range_w2 = norm(apply(KernelTag::Km10, r.w2) + apply(KernelTag::Km11, r.w1) +
                        apply(KernelTag::Km12, r.w0) + r.alpha2 * (k00w0 + r.w0));
    out.complement_w1 = norm(Pbar(k00_.apply(r.w1) + r.w1) + Pbar(apply(KernelTag::K01, r.w0)));
    out.complement_w2 = norm(Pbar(k00_.apply(r.w2) + r.w2) + Pbar(apply(KernelTag::K01, r.w1)) +
                             Pbar(apply(KernelTag::K02, r.w0)) + r.alpha2 * Pbar(apply(KernelTag::K10, r.w0)));
    out.solvability_w2 = inner(r.w0, w2_complement_source(r.w1, r.alpha2));
    const GridFunction g = w1_rhs();
    const GridFunction pw1bar = Pbar(r.w1);
    out.galerkin_residual = norm(Pbar(k00_.apply(pw1bar) + pw1bar) - g) / norm(g);
    return out;
  }

 private:
  GridPtr grid_;
  GalerkinOptions opts_;
  GridFunction v_;
  GridFunction w0_;
  RankOneProjection P_;
  KernelOperator k00_;
  std::map<KernelTag, KernelOperator> cache_;
  std::optional<ComplementInverse> inverse_;
};

// Free-function entry points for one-off evaluations on a grid.

inline Mat2 assemble_A(const GridPtr& grid) { return ExpansionSolver(grid).assemble_A(); }
inline double verify_first_order_identity(const GridPtr& grid) { return ExpansionSolver(grid).verify_first_order_identity(); }
inline SingleIntegralCheck single_integral_crosscheck(const GridPtr& grid) {
  return ExpansionSolver(grid).single_integral_crosscheck();
}

/// Truncated expansion w0 + eps w1 + eps^2 w2.
inline GridFunction expansion_profile(double eps, const ExpansionResult& r) { return r.w0 + eps * r.w1 + (eps * eps) * r.w2; }

struct ResidualBreakdown {
  double eps = 0.0;
  double alpha = 0.0;
  double full = 0.0;          // |(K_{alpha,eps} + 1) w|
  double complement = 0.0;    // |Pbar (K_{alpha,eps} + 1) w|
  double scaled_range = 0.0;  // alpha |P (K_{alpha,eps} + 1) w|
  double leading_only = 0.0;  // |(K_{alpha,eps} + 1) w0|
};

/// Residual of the truncated expansion in the full Birman-Schwinger equation at alpha = eps^2 alpha2.
inline ResidualBreakdown residual_breakdown(double eps, const ExpansionResult& r) {
  if (eps == 0.0) throw std::invalid_argument("residual is only defined for eps != 0");
  if (std::abs(eps) > 0.4) throw std::invalid_argument("residual needs |eps| <= 0.4");
  ResidualBreakdown out;
  out.eps = eps;
  out.alpha = eps * eps * r.alpha2;
  if (!(out.alpha >= kMinFullAlpha)) {
    throw std::invalid_argument("alpha = eps^2 alpha2 is below the full-kernel floor; increase |eps|");
  }
  const GridPtr& grid = r.w0.grid();
  const KernelOperator K = assemble_full_K(out.alpha, 3.0 + eps, grid);
  const GridFunction w = expansion_profile(eps, r);
  const GridFunction res = K.apply(w) + w;
  const RankOneProjection P(sample_v(grid));
  out.full = norm(res);
  out.complement = norm(P.complement(res));
  out.scaled_range = out.alpha * norm(P.apply(res));
  out.leading_only = norm(K.apply(r.w0) + r.w0);
  return out;
}

inline double residual_norm(double eps, const ExpansionResult& r) { return residual_breakdown(eps, r).full; }

/// Solution (alpha, w) of (K_{alpha,eps} + 1) w = 0 near alpha2 eps^2, normalised by <w0, w> = <w0, w0>.
struct TrueEigenpair {
  double eps = 0.0;
  double alpha = 0.0;
  double alpha_remainder = 0.0;      // alpha - eps^2 alpha2
  double profile_remainder = 0.0;    // |w - (w0 + eps w1 + eps^2 w2)|
  double eigenvalue_defect = 0.0;    // |mu + 1| at the returned alpha
  int iterations = 0;
};

namespace detail {

// Eigenvalue of K closest to -1 and its eigenvector, by shifted inverse iteration from a guess.
inline std::pair<double, GridFunction> eigen_near_minus_one(const KernelOperator& K, const GridFunction& guess) {
  const Eigen::Index n = K.matrix().rows();
  Eigen::MatrixXd shifted = K.matrix();
  shifted.diagonal().array() += 1.0 - 1e-9;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  Eigen::VectorXd y = guess.values();
  for (int it = 0; it < 6; ++it) {
    y = lu.solve(y);
    y /= y.norm();
  }
  (void)n;
  GridFunction f(K.grid(), y);
  const GridFunction kf = K.apply(f);
  return {inner(f, kf) / inner(f, f), f};
}

}  // namespace detail

inline TrueEigenpair solve_true_eigenpair(double eps, const ExpansionResult& r, double tol = 1e-12, int max_iter = 12) {
  if (eps == 0.0) throw std::invalid_argument("true eigenpair needs eps != 0");
  const GridPtr& grid = r.w0.grid();
  const GridFunction guess = expansion_profile(eps, r);
  const double a0 = eps * eps * r.alpha2;
  auto defect = [&](double a) {
    return detail::eigen_near_minus_one(assemble_full_K(a, 3.0 + eps, grid), guess);
  };
  double xa = 0.97 * a0;
  double xb = 1.03 * a0;
  double fa = defect(xa).first + 1.0;
  auto [mub, fb_vec] = defect(xb);
  double fb = mub + 1.0;
  GridFunction w = fb_vec;
  TrueEigenpair out;
  out.eps = eps;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    if (fb == fa) break;
    const double xn = xb - fb * (xb - xa) / (fb - fa);
    auto [mu, vec] = defect(xn);
    xa = xb;
    fa = fb;
    xb = xn;
    fb = mu + 1.0;
    w = vec;
    if (std::abs(fb) < tol) break;
  }
  if (!(std::abs(fb) < 1e-8)) throw NumericalFailure("secant search for the true eigenvalue did not converge");
  w *= inner(r.w0, r.w0) / inner(r.w0, w);
  out.alpha = xb;
  out.alpha_remainder = xb - a0;
  out.profile_remainder = norm(w - guess);
  out.eigenvalue_defect = std::abs(fb);
  return out;
}

}  // namespace nlsbif
