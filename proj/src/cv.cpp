#include "cvpc/cv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvpc/error.hpp"

namespace cvpc {

namespace {

double mean_of(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v;
  return s / static_cast<double>(a.size());
}

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw BatchMismatch("per-sample vectors differ in length");
  if (a.size() < 2) throw std::invalid_argument("at least two samples are required");
}

bool is_constant(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [&](double v) { return v == a.front(); });
}

}  // namespace

double sample_covariance(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

CrossMoments CrossMoments::from_samples(std::span<const double> q, std::span<const double> qpc, double mu,
                                        double mu_pc) {
  check_pair(q, qpc);
  std::vector<double> q2(q.size()), p2(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q2[i] = q[i] * q[i];
    p2[i] = qpc[i] * qpc[i];
  }
  CrossMoments m;
  m.var_q = sample_covariance(q, q);
  m.var_qpc = sample_covariance(qpc, qpc);
  m.cov_q_qpc = sample_covariance(q, qpc);
  m.var_qpc_sq = sample_covariance(p2, p2);
  m.cov_qsq_qpcsq = sample_covariance(q2, p2);
  m.cov_q_qpcsq = sample_covariance(q, p2);
  m.cov_qsq_qpc = sample_covariance(q2, qpc);
  m.cov_qpcsq_qpc = sample_covariance(p2, qpc);
  m.mu = mu;
  m.mu_pc = mu_pc;
  return m;
}

double optimal_alpha_mean(std::span<const double> q, std::span<const double> qpc) {
  check_pair(q, qpc);
  const double var = sample_covariance(qpc, qpc);
  if (is_constant(qpc) || !(var > 0.0)) throw DegenerateSurrogate("surrogate samples have zero variance");
  return -sample_covariance(q, qpc) / var;
}

double optimal_alpha_variance(const CrossMoments& m) {
  const double num = m.cov_qsq_qpcsq - 2.0 * m.mu * m.cov_q_qpcsq - 2.0 * m.mu_pc * m.cov_qsq_qpc +
                     4.0 * m.mu * m.mu_pc * m.cov_q_qpc;
  const double den = m.var_qpc_sq + 4.0 * m.mu_pc * m.mu_pc * m.var_qpc - 4.0 * m.mu_pc * m.cov_qpcsq_qpc;
  if (!(den > 0.0)) throw DegenerateSurrogate("variance control variate has zero denominator");
  return -num / den;
}

double pearson(std::span<const double> a, std::span<const double> b, bool* clamped) {
  check_pair(a, b);
  if (clamped) *clamped = false;
  const double va = sample_covariance(a, a);
  const double vb = sample_covariance(b, b);
  if (is_constant(a) || is_constant(b) || !(va > 0.0) || !(vb > 0.0)) return 0.0;
  const double r = sample_covariance(a, b) / std::sqrt(va * vb);
  if (r > 1.0 || r < -1.0) {
    if (clamped) *clamped = true;
    return std::clamp(r, -1.0, 1.0);
  }
  return r;
}

double cvpc_mean(const EstimatorResult& mc, const EstimatorResult& cme, double cvm_value, double alpha) {
  if (mc.fingerprint != cme.fingerprint || mc.values.size() != cme.values.size()) {
    throw BatchMismatch("high- and low-fidelity estimates were built on different sample batches");
  }
  return mc.mean + alpha * (cme.mean - cvm_value);
}

double cvpc_variance(std::span<const double> q, std::span<const double> qpc, double mu, double mu_pc,
                     double var_pc_analytic, double alpha) {
  if (q.size() != qpc.size()) throw BatchMismatch("per-sample vectors differ in length");
  if (q.empty()) throw std::invalid_argument("no samples");
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    a += (q[i] - mu) * (q[i] - mu);
    b += (qpc[i] - mu_pc) * (qpc[i] - mu_pc);
  }
  const double n = static_cast<double>(q.size());
  return a / n + alpha * (b / n - var_pc_analytic);
}

double variance_reduction_ratio(double rho) {
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("correlation must lie in [-1, 1]");
  return 1.0 - rho * rho;
}

CvWeights cv_weights(std::span<const double> q, std::span<const double> qpc, double mu, double mu_pc) {
  CvWeights w;
  w.rho = pearson(q, qpc, &w.rho_clamped);
  try {
    w.alpha_mean = optimal_alpha_mean(q, qpc);
    w.alpha_variance = optimal_alpha_variance(CrossMoments::from_samples(q, qpc, mu, mu_pc));
  } catch (const DegenerateSurrogate&) {
    w = CvWeights{};
    w.degenerate = true;
  }
  if (!std::isfinite(w.alpha_mean) || !std::isfinite(w.alpha_variance)) {
    w = CvWeights{};
    w.degenerate = true;
  }
  return w;
}

}  // namespace cvpc
