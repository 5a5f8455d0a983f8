#pragma once

// Finite-difference discretization of the linearized operator
//   L_p = sigma3 (-d^2/dx^2 + 1 + V^(p))
// on a truncated interval, dense eigenvalues through LAPACK dgeev, and the
// search for the gap eigenvalue z = 1 - alpha^2 just below the threshold.

#include "nlsbif/grid_quadrature.hpp"
#include "nlsbif/soliton_potential.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

extern "C" void dgeev_(const char* jobvl, const char* jobvr, const int* n, double* a, const int* lda, double* wr,
                       double* wi, double* vl, const int* ldvl, double* vr, const int* ldvr, double* work,
                       const int* lwork, int* info);

namespace nlsbif {

/// Reference value 2.53/8 used only to size the domain in scans.
inline constexpr double kAlpha2Reference = 2.53 / 8.0;

enum class Boundary { dirichlet, periodic };
enum class FdScheme { fd2, fd4 };

inline std::string to_string(Boundary bc) { return bc == Boundary::dirichlet ? "dirichlet" : "periodic"; }
inline std::string to_string(FdScheme s) { return s == FdScheme::fd2 ? "fd2" : "fd4"; }

class EigensolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiscretizedOperator {
  GridPtr grid;
  Eigen::MatrixXd matrix;  // 2N x 2N, component-major like GridFunction
  double p = 3.0;
  bool with_potential = true;
  Boundary bc = Boundary::dirichlet;
  FdScheme scheme = FdScheme::fd4;
};

namespace detail {

inline DiscretizedOperator discretize(const GridPtr& grid, const std::function<Mat2(double)>& V, double p,
                                      bool with_potential, Boundary bc, FdScheme scheme) {
  if (!grid->is_uniform()) throw std::invalid_argument("finite differences need a uniform grid");
  const int n = grid->size();
  const double h = grid->spacing();
  const double ih2 = 1.0 / (h * h);
  // -d^2/dx^2 stencil offsets 0, 1, 2
  const std::vector<double> stencil = scheme == FdScheme::fd2 ? std::vector<double>{2.0, -1.0}
                                                               : std::vector<double>{5.0 / 2.0, -4.0 / 3.0, 1.0 / 12.0};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int c = 0; c < 2; ++c) {
    const double sign = c == 0 ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) {
      const int row = c * n + i;
      m(row, row) += sign * (stencil[0] * ih2 + 1.0);
      for (int k = 1; k < static_cast<int>(stencil.size()); ++k) {
        for (int j : {i - k, i + k}) {
          if (bc == Boundary::periodic) {
            j = ((j % n) + n) % n;
          } else if (j < 0 || j >= n) {
            continue;
          }
          m(row, c * n + j) += sign * stencil[k] * ih2;
        }
      }
    }
  }
  if (with_potential) {
    for (int i = 0; i < n; ++i) {
      const Mat2 v = V(grid->node(i));
      for (int a = 0; a < 2; ++a) {
        const double sign = a == 0 ? 1.0 : -1.0;
        for (int b = 0; b < 2; ++b) m(a * n + i, b * n + i) += sign * v(a, b);
      }
    }
  }
  return {grid, std::move(m), p, with_potential, bc, scheme};
}

}  // namespace detail

inline DiscretizedOperator discretize_L(double p, const GridPtr& grid, Boundary bc = Boundary::dirichlet,
                                        FdScheme scheme = FdScheme::fd4) {
  if (!(p > 1.0 && p < 5.0)) throw std::invalid_argument("discretize_L needs 1 < p < 5");
  return detail::discretize(grid, [p](double x) { return eval_potential(p, x); }, p, true, bc, scheme);
}

/// sigma3 (-d^2/dx^2 + 1), whose spectrum avoids (-1, 1).
inline DiscretizedOperator discretize_free(const GridPtr& grid, Boundary bc = Boundary::dirichlet,
                                           FdScheme scheme = FdScheme::fd4) {
  return detail::discretize(grid, [](double) { return Mat2::Zero(); }, 0.0, false, bc, scheme);
}

/// All eigenvalues of a general real matrix (LAPACK dgeev, no eigenvectors).
inline std::vector<std::complex<double>> dense_eigenvalues(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw std::invalid_argument("dense_eigenvalues needs a square matrix");
  std::vector<double> wr(n), wi(n);
  const int one = 1;
  int info = 0;
  int lwork = -1;
  double query = 0.0;
  dgeev_("N", "N", &n, a.data(), &n, wr.data(), wi.data(), nullptr, &one, nullptr, &one, &query, &lwork, &info);
  if (info != 0) throw EigensolverFailure("dgeev workspace query failed, info = " + std::to_string(info));
  lwork = static_cast<int>(query);
  std::vector<double> work(lwork);
  dgeev_("N", "N", &n, a.data(), &n, wr.data(), wi.data(), nullptr, &one, nullptr, &one, work.data(), &lwork, &info);
  if (info != 0) throw EigensolverFailure("dgeev failed, info = " + std::to_string(info));
  std::vector<std::complex<double>> out(n);
  for (int i = 0; i < n; ++i) out[i] = {wr[i], wi[i]};
  return out;
}

inline std::vector<double> real_eigenvalues(const std::vector<std::complex<double>>& ev, double imag_tol = 1e-8) {
  std::vector<double> out;
  for (const auto& z : ev) {
    if (std::abs(z.imag()) < imag_tol) out.push_back(z.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> real_eigenvalues(const DiscretizedOperator& op, double imag_tol = 1e-8) {
  return real_eigenvalues(dense_eigenvalues(op.matrix), imag_tol);
}

/// Eigenvector for an eigenvalue estimate z by shifted inverse iteration (sparse LU).
inline GridFunction eigenvector_near(const DiscretizedOperator& op, double z, int iterations = 4) {
  const Eigen::Index n = op.matrix.rows();
  const double shift = z + 1e-10 * std::max(1.0, std::abs(z));
  Eigen::SparseMatrix<double> s = op.matrix.sparseView();
  for (Eigen::Index i = 0; i < n; ++i) s.coeffRef(i, i) -= shift;
  s.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(s);
  if (lu.info() != Eigen::Success) throw EigensolverFailure("sparse LU failed during inverse iteration");
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < iterations; ++it) {
    y = lu.solve(y);
    y /= y.norm();
  }
  return {op.grid, y};
}

/// Fraction of the squared norm of u carried by |x| <= radius.
inline double norm_fraction_inside(const GridFunction& u, double radius) {
  const auto& x = u.grid()->nodes();
  const auto& w = u.grid()->weights();
  double inside = 0.0;
  double total = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double d = w[i] * (u.first()[i] * u.first()[i] + u.second()[i] * u.second()[i]);
    total += d;
    if (std::abs(x[i]) <= radius) inside += d;
  }
  return inside / total;
}

/// Checks |u(x)| <= C e^{-rate |x|} on the outer quarter 3L/4 <= |x| <= L, with C taken
/// from the band L/4 <= |x| < L/2.
inline bool tail_bounded_by(const GridFunction& u, double rate) {
  const auto& x = u.grid()->nodes();
  const double L = u.grid()->half_length();
  double c_inner = 0.0;
  double c_outer = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double a = std::abs(x[i]);
    const double mag = std::hypot(u.first()[i], u.second()[i]) * std::exp(rate * a);
    if (a >= 0.25 * L && a < 0.5 * L) c_inner = std::max(c_inner, mag);
    if (a >= 0.75 * L) c_outer = std::max(c_outer, mag);
  }
  return c_outer <= c_inner;
}

struct SpectrumScanRow {
  double p = 0.0;
  double eps = 0.0;
  double z = 0.0;
  double alpha = 0.0;  // sqrt(1 - z)
  double ratio = 0.0;  // alpha / eps^2
};

enum class GapStatus { eigenvalue, resonance };

inline std::string to_string(GapStatus s) { return s == GapStatus::eigenvalue ? "eigenvalue" : "resonance/no-eigenvalue"; }

struct GapOptions {
  Boundary bc = Boundary::dirichlet;
  FdScheme scheme = FdScheme::fd4;
  double imag_tol = 1e-8;
  double localization = 0.99;  // squared-norm fraction required inside |x| <= L/2
  double lower_cut = 0.5;      // candidates are real eigenvalues above this
};

struct GapEigenvalueResult {
  GapStatus status = GapStatus::resonance;
  std::optional<SpectrumScanRow> row;  // set when status == eigenvalue
  double candidate_z = std::numeric_limits<double>::quiet_NaN();
  double localization = 0.0;
  bool tail_ok = false;
  double L = 0.0;
  int N = 0;
  std::optional<GridFunction> eigenvector;
};

/// Among real eigenvalues in (lower_cut, 1), the one closest to 1 whose eigenvector
/// is localized. Without one, the status is resonance and candidate_z is the real
/// eigenvalue closest to 1 from either side.
inline GapEigenvalueResult gap_eigenvalue(double p, double L, int N, const GapOptions& opts = {}) {
  if (!(p > 1.0 && p < 5.0)) throw std::invalid_argument("gap_eigenvalue needs 1 < p < 5");
  GapEigenvalueResult out;
  out.L = L;
  out.N = N;
  const DiscretizedOperator op = discretize_L(p, make_grid(L, N), opts.bc, opts.scheme);
  const std::vector<double> zs = real_eigenvalues(op, opts.imag_tol);

  std::vector<double> in_gap;
  double nearest = std::numeric_limits<double>::infinity();
  for (double z : zs) {
    if (z <= opts.lower_cut) continue;
    if (z < 1.0) in_gap.push_back(z);
    if (std::abs(z - 1.0) < std::abs(nearest - 1.0)) nearest = z;
  }
  std::sort(in_gap.rbegin(), in_gap.rend());
  for (double z : in_gap) {
    GridFunction u = eigenvector_near(op, z);
    const double loc = norm_fraction_inside(u, 0.5 * L);
    if (loc < opts.localization) continue;
    const double eps = p - 3.0;
    const double alpha = std::sqrt(1.0 - z);
    out.status = GapStatus::eigenvalue;
    out.candidate_z = z;
    out.localization = loc;
    out.tail_ok = tail_bounded_by(u, 0.8 * alpha);
    out.row = SpectrumScanRow{p, eps, z, alpha,
                              eps != 0.0 ? alpha / (eps * eps) : std::numeric_limits<double>::quiet_NaN()};
    out.eigenvector = std::move(u);
    return out;
  }
  if (std::isfinite(nearest)) {
    out.candidate_z = nearest;
    GridFunction u = eigenvector_near(op, nearest);
    out.localization = norm_fraction_inside(u, 0.5 * L);
    out.eigenvector = std::move(u);
  }
  return out;
}

/// Grid size for spacing h on [-L, L] (always odd so x = 0 is a node).
inline int points_for_spacing(double L, double h) {
  int n = static_cast<int>(std::lround(2.0 * L / h)) + 1;
  if (n % 2 == 0) ++n;
  return n;
}

/// L = max(40, 8 / (alpha2 eps^2)).
inline double default_domain_length(double eps) {
  return std::max(40.0, 8.0 / (kAlpha2Reference * eps * eps));
}

struct ScanFailure {
  double p = 0.0;
  double eps = 0.0;
  std::string reason;
};

struct ScanFit {
  double exponent = std::numeric_limits<double>::quiet_NaN();  // slope of log(1 - z) vs log|eps|
  double alpha2 = std::numeric_limits<double>::quiet_NaN();    // exp(mean log(alpha / eps^2))
  int count = 0;
};

struct ScanResult {
  std::vector<SpectrumScanRow> rows;
  std::vector<ScanFailure> failures;
  ScanFit fit;
};

/// Least-squares slope of log(1 - z) against log|eps|, and alpha2 from the
/// intercept of the fixed-slope law 1 - z = alpha2^2 eps^4 (geometric mean of ratio).
inline ScanFit fit_scan(const std::vector<SpectrumScanRow>& rows) {
  ScanFit fit;
  fit.count = static_cast<int>(rows.size());
  if (rows.empty()) return fit;
  double log_ratio = 0.0;
  for (const auto& r : rows) log_ratio += std::log(r.ratio);
  fit.alpha2 = std::exp(log_ratio / rows.size());
  if (rows.size() < 2) return fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double x = std::log(std::abs(r.eps));
    const double y = std::log(1.0 - r.z);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(rows.size());
  const double den = n * sxx - sx * sx;
  if (den > 0.0) fit.exponent = (n * sxy - sx * sy) / den;
  return fit;
}

struct ScanOptions {
  double spacing = 0.1;
  GapOptions gap;
  std::function<void(const SpectrumScanRow&)> on_row;  // progress hook
};

inline ScanResult scan_bifurcation(const std::vector<double>& p_list,
                                   const std::function<double(double)>& L_rule = default_domain_length,
                                   const ScanOptions& opts = {}) {
  for (double p : p_list) {
    if (p == 3.0) throw std::invalid_argument("scan_bifurcation excludes p = 3");
  }
  ScanResult out;
  for (double p : p_list) {
    const double eps = p - 3.0;
    try {
      const double L = L_rule(eps);
      const GapEigenvalueResult g = gap_eigenvalue(p, L, points_for_spacing(L, opts.spacing), opts.gap);
      if (g.status == GapStatus::eigenvalue) {
        out.rows.push_back(*g.row);
        if (opts.on_row) opts.on_row(*g.row);
      } else {
        out.failures.push_back({p, eps, "no localized eigenvalue below threshold (candidate z = " +
                                            std::to_string(g.candidate_z) + ")"});
      }
    } catch (const std::exception& e) {
      out.failures.push_back({p, eps, e.what()});
    }
  }
  out.fit = fit_scan(out.rows);
  return out;
}

struct ResonanceSample {
  double L = 0.0;
  int N = 0;
  double candidate_z = 0.0;
  double distance = 0.0;  // |1 - z|
  GapStatus status = GapStatus::resonance;
};

/// Candidate behaviour at p = 3 as the domain grows.
inline std::vector<ResonanceSample> resonance_signature(const std::vector<double>& lengths, double spacing = 0.1,
                                                        const GapOptions& opts = {}) {
  std::vector<ResonanceSample> out;
  for (double L : lengths) {
    const int N = points_for_spacing(L, spacing);
    const GapEigenvalueResult g = gap_eigenvalue(3.0, L, N, opts);
    out.push_back({L, N, g.candidate_z, std::abs(1.0 - g.candidate_z), g.status});
  }
  return out;
}

}  // namespace nlsbif
