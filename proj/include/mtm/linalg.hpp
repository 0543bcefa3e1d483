#pragma once

#include "mtm/compensated_sum.hpp"
#include "mtm/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace mtm {

struct JacobiResult
{
  Eigen::VectorXd eigenvalues; ///< sorted descending
  int sweeps = 0;
  double off_norm = 0.0;
  bool converged = false;
};

/// Cyclic Jacobi eigenvalues of a symmetric matrix. Sweeps until the off-diagonal
/// Frobenius norm is at most `tolerance`.
template <typename Derived>
JacobiResult jacobi_eigenvalues(const Eigen::MatrixBase<Derived>& symmetric, double tolerance = 1e-12,
                                int max_sweeps = 100)
{
  if (symmetric.rows() != symmetric.cols())
    throw DomainError("jacobi_eigenvalues needs a square matrix");
  Eigen::MatrixXd a = symmetric;
  const Eigen::Index n = a.rows();
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j)
          s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  JacobiResult result;
  result.off_norm = off_norm();
  Eigen::VectorXd col_p(n);
  while (result.off_norm > tolerance && result.sweeps < max_sweeps) {
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0)
          continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        col_p = a.col(p);
        a.col(p) = c * col_p - s * a.col(q);
        a.col(q) = s * col_p + c * a.col(q);
        col_p = a.row(p).transpose();
        a.row(p) = c * col_p.transpose() - s * a.row(q);
        a.row(q) = s * col_p.transpose() + c * a.row(q);
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
    ++result.sweeps;
    result.off_norm = off_norm();
  }
  result.converged = result.off_norm <= tolerance;
  result.eigenvalues = a.diagonal();
  std::sort(result.eigenvalues.data(), result.eigenvalues.data() + n, std::greater<double>());
  return result;
}

/// Half the L1 distance.
template <typename A, typename B>
double tv_distance(const Eigen::MatrixBase<A>& p, const Eigen::MatrixBase<B>& q)
{
  if (p.size() != q.size())
    throw DomainError("tv_distance: distributions have different lengths");
  CompensatedSum<> s;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    s += std::abs(p.derived().coeff(i) - q.derived().coeff(i));
  return 0.5 * s.value();
}

/// sqrt(var_pi[p/pi]) = sqrt(sum (p - pi)^2 / pi); p must vanish wherever pi does.
template <typename A, typename B>
double chi_square_distance(const Eigen::MatrixBase<A>& pi, const Eigen::MatrixBase<B>& p)
{
  if (p.size() != pi.size())
    throw DomainError("chi_square_distance: distributions have different lengths");
  CompensatedSum<> s;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double m = pi.derived().coeff(i);
    const double v = p.derived().coeff(i);
    if (m == 0.0) {
      if (v > 1e-15)
        throw DomainError("chi_square_distance: p puts mass where pi has none");
      continue;
    }
    s += (v - m) * (v - m) / m;
  }
  return std::sqrt(s.value());
}

/// max |pi(x) A(x,y) - pi(y) A(y,x)|.
template <typename M, typename V>
double flux_asymmetry(const Eigen::MatrixBase<M>& a, const Eigen::MatrixBase<V>& pi)
{
  double worst = 0.0;
  for (Eigen::Index x = 0; x < a.rows(); ++x)
    for (Eigen::Index y = x + 1; y < a.cols(); ++y)
      worst = std::max(worst, std::abs(pi.derived().coeff(x) * a(x, y) - pi.derived().coeff(y) * a(y, x)));
  return worst;
}

struct EigenCluster
{
  double value;
  std::size_t multiplicity;
};

/// Groups descending eigenvalues whose neighbours are within tol.
template <typename V>
std::vector<EigenCluster> cluster_eigenvalues(const Eigen::MatrixBase<V>& sorted_desc, double tol = 1e-9)
{
  std::vector<EigenCluster> clusters;
  Eigen::Index i = 0;
  while (i < sorted_desc.size()) {
    Eigen::Index j = i + 1;
    double sum = sorted_desc.derived().coeff(i);
    while (j < sorted_desc.size() && sorted_desc.derived().coeff(j - 1) - sorted_desc.derived().coeff(j) <= tol)
      sum += sorted_desc.derived().coeff(j++);
    clusters.push_back({sum / static_cast<double>(j - i), static_cast<std::size_t>(j - i)});
    i = j;
  }
  return clusters;
}

} // namespace mtm
