#pragma once

#include "mtm/distributions.hpp"
#include "mtm/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mtm {

/// Row x0 of A^n, by n vector-matrix products.
Eigen::VectorXd n_step_distribution(const TransitionMatrix& a, State x0, std::size_t n);

/// d(n) = max_x TV(A^n(x, .), pi); n >= 1.
double maximal_variation(const TransitionMatrix& a, std::size_t n);

enum class CurveKind
{
  tv,
  chi_square,
  coupling_survival
};

const char* to_string(CurveKind kind);

struct CurvePoint
{
  std::size_t n;
  double value;
};

struct DecayCurve
{
  std::vector<CurvePoint> points;
  CurveKind kind = CurveKind::tv;
  /// Per-point standard errors for simulated curves; empty for exact ones.
  std::vector<double> std_errors;
};

/// d(n) for n = 1..n_max.
DecayCurve variation_curve(const TransitionMatrix& a, std::size_t n_max);

/// TV(A^n(x0, .), pi) for n = 0..n_max.
DecayCurve tv_curve(const TransitionMatrix& a, State x0, std::size_t n_max);

/// d_chi(pi, A^n(x0, .)) for n = 0..n_max.
DecayCurve chi_square_curve(const TransitionMatrix& a, State x0, std::size_t n_max);

/// exp of the least-squares slope of log(value) against n, over the tail half of the
/// points with value > 1e-14 (at least 3 are needed).
double fit_rate(const DecayCurve& curve);

struct CouplingResult
{
  /// P(the two chains still differ after n steps), n = 1..n_max.
  DecayCurve meeting;
  /// P(no coalescing coin has come up in the first n steps), n = 1..n_max.
  DecayCurve coin;
  double h_star = 0.0;
};

/// Couples a chain from x0 with a stationary chain through
/// A = H_k(w*) 1 pi^T + (1 - H_k(w*)) q_res: with probability H_k(w*) both jump to one
/// draw from pi, otherwise each moves by q_res on its own. Chains that meet move together.
CouplingResult coupling_survival(const FinitePair& pair, std::size_t k, State x0, std::size_t n_max,
                                 std::uint64_t replicas, std::uint64_t seed);

} // namespace mtm
