#pragma once

#include "mtm/distributions.hpp"
#include "mtm/joint_proposal.hpp"
#include "mtm/linalg.hpp"
#include "mtm/samplers.hpp"
#include "mtm/stratified.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mtm {

struct KernelDiagnostics
{
  double max_row_error = 0.0;    ///< max |row sum - 1|
  double stationarity_error = 0.0; ///< max |(pi A - pi)(y)|
  double flux_asymmetry = 0.0;   ///< max |pi(x) A(x,y) - pi(y) A(y,x)|
  double min_entry = 0.0;
};

/// Row-stochastic kernel on {0, ..., N-1} with its stationary law.
struct TransitionMatrix
{
  Eigen::MatrixXd entries;
  FiniteDistribution stationary;
  std::string sampler_tag;
  /// Probability that a step from x is a rejection (empty when unknown).
  Eigen::VectorXd rejection;
  /// Entries in [-1e-15, 0) that were set to 0.
  std::size_t clamped_entries = 0;

  std::size_t size() const { return static_cast<std::size_t>(entries.rows()); }
  KernelDiagnostics diagnose() const;
};

/// Off-diagonal min{H_k(w(x)), H_k(w(y))} pi(y); diagonal takes the remaining mass.
TransitionMatrix build_kernel_mtm_is(const FinitePair& pair, std::size_t k, std::size_t budget = 2000);

/// MTM-IS (imh when k = 1) by enumerating every trial tuple.
struct MtmIsConfig
{
  FinitePair pair;
  std::size_t k = 1;
};

struct MtmGeneralConfig
{
  FiniteDistribution target;
  ConditionalProposal proposal;
  SymmetricFunction lambda = lambda_one();
  std::size_t k = 1;
};

struct GmtmConfig
{
  FiniteDistribution target;
  JointProposal joint;
  std::vector<SymmetricFunction> lambdas = {lambda_one()};
  Balancing balancing = Balancing::draw;
  std::optional<BalancingCertificate> certificate;
};

struct SrsworConfig
{
  FiniteDistribution target;
  std::size_t k = 1;
};

struct Srswor2Config
{
  FiniteDistribution target;
  std::size_t k = 1;
};

using EnumeratedSampler =
  std::variant<MtmIsConfig, MtmGeneralConfig, GmtmConfig, SrsworConfig, Srswor2Config, StratifiedDesign>;

/// Exact kernel by summing over every proposal outcome (and balancing draw).
/// Throws BudgetExceeded past `budget` terms.
TransitionMatrix build_kernel_enumerated(const EnumeratedSampler& sampler, double budget = 1e7);

struct SpectrumReport
{
  Eigen::VectorXd eigenvalues; ///< descending, over the support of the stationary law
  double spectral_gap = 0.0;   ///< 1 - max nonunit |eigenvalue|
  Eigen::VectorXd rejection_values;
  std::vector<EigenCluster> clusters;
  int jacobi_sweeps = 0;
};

/// Eigenvalues of D^{1/2} A D^{-1/2}, D = diag(pi), by cyclic Jacobi. Refuses kernels
/// whose flux asymmetry exceeds 1e-10.
SpectrumReport spectrum(const TransitionMatrix& a);

struct Example4ClosedForm
{
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 0.0;
  Eigen::VectorXd eigenvalues; ///< descending
  double imh2_rate = 0.0;      ///< (1 - 1/(N pi_1))^2
  bool dominance = false;      ///< |a2 - a3| and a4 both at most imh2_rate
};

/// pi_1 = 1 - p, pi_2 = ... = pi_N = p/(N-1), SRSWOR with k = 2; N >= 4.
Example4ClosedForm example4_closed_form(std::size_t n, double p);

/// The matrix built from a1..a4.
Eigen::MatrixXd example4_matrix(std::size_t n, double p);

} // namespace mtm
