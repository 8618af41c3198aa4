#pragma once

#include <span>

#include "cvpc/montecarlo.hpp"

namespace cvpc {

/// 1/(N-1) sample covariance.
double sample_covariance(std::span<const double> a, std::span<const double> b);

/// Moments entering the variance control-variate weight. Covariances use 1/(N-1).
struct CrossMoments {
  double var_q = 0.0;
  double var_qpc = 0.0;
  double cov_q_qpc = 0.0;
  double var_qpc_sq = 0.0;
  double cov_qsq_qpcsq = 0.0;
  double cov_q_qpcsq = 0.0;
  double cov_qsq_qpc = 0.0;
  double cov_qpcsq_qpc = 0.0;
  double mu = 0.0;
  double mu_pc = 0.0;

  static CrossMoments from_samples(std::span<const double> q, std::span<const double> qpc, double mu,
                                   double mu_pc);
};

/// -Cov[Q, Qpc] / Var[Qpc]. Throws DegenerateSurrogate for a constant surrogate.
double optimal_alpha_mean(std::span<const double> q, std::span<const double> qpc);

/// Weight for the variance estimator whose statistics are (Q - mu)^2 and (Qpc - mu_pc)^2:
/// -Cov[(Q-mu)^2, (Qpc-mu_pc)^2] / Var[(Qpc-mu_pc)^2], expanded in the raw cross moments.
/// Same sign convention as optimal_alpha_mean. Throws DegenerateSurrogate on a zero denominator.
double optimal_alpha_variance(const CrossMoments& m);

/// Pearson correlation clamped to [-1, 1]; 0 for a constant input.
double pearson(std::span<const double> a, std::span<const double> b, bool* clamped = nullptr);

/// Qmc + alpha (Qcme - cvm). Throws BatchMismatch unless both come from the same batch.
double cvpc_mean(const EstimatorResult& mc, const EstimatorResult& cme, double cvm_value, double alpha);

/// (1/N) sum (Q-mu)^2 + alpha [ (1/N) sum (Qpc-mu_pc)^2 - var_pc_analytic ].
double cvpc_variance(std::span<const double> q, std::span<const double> qpc, double mu, double mu_pc,
                     double var_pc_analytic, double alpha);

double variance_reduction_ratio(double rho);

struct CvWeights {
  double alpha_mean = 0.0;
  double alpha_variance = 0.0;
  double rho = 0.0;
  bool degenerate = false;  // surrogate carried no information; weights are 0
  bool rho_clamped = false;
};

/// Both weights from shared samples; a degenerate surrogate gives zero weights.
CvWeights cv_weights(std::span<const double> q, std::span<const double> qpc, double mu, double mu_pc);

}  // namespace cvpc
