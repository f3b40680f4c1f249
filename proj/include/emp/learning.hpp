#pragma once

/// @file learning.hpp
/// EM and gradient-ascent steps whose expectations are entropy-message-
/// passing H-values.
///
/// For p(x, theta) = prod_m p_m(x_m, theta) on a tree:
///
///  - gradient of p(theta): H-value with f_m = p_m(., theta_i) and
///    g_k = d p_k / d theta_j / p_k, one run per component j;
///  - gradient of Q(theta, theta_old): same g_k, but f_m = p_m(., theta_old);
///  - closed-form M-step for log-gradients that are linear, see
///    `em_linear_step`.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "emp/entropy.hpp"
#include "emp/error.hpp"
#include "emp/graph.hpp"

namespace emp {

/// Factor tables and their gradients at one parameter point.
struct ParametricFactorSet {
  std::size_t dim = 0;
  /// values[m][i] = p_m(x_m = i, theta)
  std::vector<std::vector<double>> values;
  /// gradients[m][j][i] = d p_m(x_m = i, theta) / d theta_j
  std::vector<std::vector<std::vector<double>>> gradients;
};

/// Anything that evaluates factor tables and gradients at a parameter point.
template <typename M>
concept ParametricModel = requires(const M& model, std::span<const double> theta) {
  { model.dim() } -> std::convertible_to<std::size_t>;
  { model.evaluate(theta) } -> std::same_as<ParametricFactorSet>;
};

/// p_m(x, theta) = base_m(x) + sum_j (theta_j - origin_j) slope_mj(x).
///
/// The gradient tables are the constant slopes.
class AffineModel {
 public:
  AffineModel(std::vector<std::vector<double>> base,
              std::vector<std::vector<std::vector<double>>> slopes, std::vector<double> origin)
      : base_(std::move(base)), slopes_(std::move(slopes)), origin_(std::move(origin)) {
    if (slopes_.size() != base_.size())
      throw Error(ErrorKind::InvalidModel, "one gradient block per factor required", "grad");
    for (std::size_t m = 0; m < slopes_.size(); ++m) {
      if (slopes_[m].size() != origin_.size())
        throw Error(ErrorKind::InvalidModel,
                    "expected " + std::to_string(origin_.size()) + " gradient tables",
                    "grad[" + std::to_string(m) + "]");
      for (std::size_t j = 0; j < slopes_[m].size(); ++j)
        if (slopes_[m][j].size() != base_[m].size())
          throw Error(ErrorKind::ScopeMismatch, "gradient table length differs from factor",
                      "grad[" + std::to_string(m) + "][" + std::to_string(j) + "]");
    }
  }

  std::size_t dim() const noexcept { return origin_.size(); }
  const std::vector<double>& origin() const noexcept { return origin_; }

  ParametricFactorSet evaluate(std::span<const double> theta) const {
    if (theta.size() != dim())
      throw Error(ErrorKind::InvalidModel, "theta has " + std::to_string(theta.size()) +
                                               " components, model has " + std::to_string(dim()));
    ParametricFactorSet pf{dim(), base_, slopes_};
    for (std::size_t m = 0; m < base_.size(); ++m)
      for (std::size_t j = 0; j < dim(); ++j) {
        const double shift = theta[j] - origin_[j];
        if (shift == 0.0) continue;
        for (std::size_t i = 0; i < base_[m].size(); ++i)
          pf.values[m][i] += shift * slopes_[m][j][i];
      }
    return pf;
  }

 private:
  std::vector<std::vector<double>> base_;
  std::vector<std::vector<std::vector<double>>> slopes_;
  std::vector<double> origin_;
};

namespace detail {

inline void check_parametric(const CheckedGraph& g, const ParametricFactorSet& pf) {
  if (pf.values.size() != g.num_factors() || pf.gradients.size() != g.num_factors())
    throw Error(ErrorKind::InvalidModel, "parametric set must cover every factor");
  for (std::size_t m = 0; m < g.num_factors(); ++m) {
    const std::size_t len = g.factor(m).values.size();
    if (pf.values[m].size() != len)
      throw Error(ErrorKind::ScopeMismatch, "value table length differs from factor",
                  factor_path(m, "values"));
    if (pf.gradients[m].size() != pf.dim)
      throw Error(ErrorKind::InvalidModel, "expected " + std::to_string(pf.dim) +
                                               " gradient tables",
                  factor_path(m, "grad"));
    for (const auto& table : pf.gradients[m])
      if (table.size() != len)
        throw Error(ErrorKind::ScopeMismatch, "gradient table length differs from factor",
                    factor_path(m, "grad"));
  }
}

/// g_k = (d p_k / d theta_j) / p_k; zero where both vanish.
inline std::vector<std::vector<double>> log_gradient_companions(const CheckedGraph& g,
                                                                const ParametricFactorSet& pf,
                                                                std::size_t j) {
  std::vector<std::vector<double>> out(g.num_factors());
  for (std::size_t m = 0; m < g.num_factors(); ++m) {
    const auto& p = pf.values[m];
    const auto& dp = pf.gradients[m][j];
    out[m].resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == 0.0) {
        if (dp[i] != 0.0)
          throw Error(ErrorKind::UndefinedQuotient,
                      "factor value is zero where its gradient is not",
                      factor_path(m, "grad[" + std::to_string(j) + "][" + std::to_string(i) + "]"));
        out[m][i] = 0.0;
      } else {
        out[m][i] = dp[i] / p[i];
      }
    }
  }
  return out;
}

}  // namespace detail

/// Gradient of Q(theta, theta_old) at theta_i:
///   component j = sum_x prod_m f_m sum_k (d p_k / d theta_j) / p_k
/// with f_m = `old_values` (tables at theta_old) and the quotients taken
/// from `at_theta` (tables and gradients at theta_i). One EMP run per
/// component.
inline std::vector<double> em_q_gradient(const CheckedGraph& g,
                                         std::span<const std::vector<double>> old_values,
                                         const ParametricFactorSet& at_theta,
                                         std::size_t root = 0) {
  detail::check_parametric(g, at_theta);
  std::vector<double> gradient(at_theta.dim, 0.0);
  for (std::size_t j = 0; j < at_theta.dim; ++j) {
    const auto companions = detail::log_gradient_companions(g, at_theta, j);
    const auto tables = lift_tables(g, old_values, companions);
    gradient[j] = compute_zh(g, tables, root).H;
  }
  return gradient;
}

/// Gradient of p(theta) = sum_x prod_m p_m(x_m, theta) at the point `pf`
/// was evaluated at.
inline std::vector<double> gradient_at(const CheckedGraph& g, const ParametricFactorSet& pf,
                                       std::size_t root = 0) {
  return em_q_gradient(g, pf.values, pf, root);
}

/// theta + step * gradient_at(model at theta).
template <ParametricModel M>
std::vector<double> grad_ascent_step(const CheckedGraph& g, const M& model,
                                     std::span<const double> theta, double step = 1.0) {
  const auto gradient = gradient_at(g, model.evaluate(theta));
  std::vector<double> next(theta.begin(), theta.end());
  for (std::size_t j = 0; j < next.size(); ++j) next[j] += step * gradient[j];
  return next;
}

struct AscentTrace {
  /// thetas.front() is the starting point.
  std::vector<std::vector<double>> thetas;
  std::vector<double> last_gradient;
  bool converged = false;
};

/// Repeats `grad_ascent_step` until the largest component change drops
/// below `tol` or `max_iters` steps have been taken.
template <ParametricModel M>
AscentTrace gradient_ascent(const CheckedGraph& g, const M& model, std::vector<double> theta,
                            double step, std::size_t max_iters, double tol = 1e-8) {
  AscentTrace trace;
  trace.thetas.push_back(theta);
  for (std::size_t it = 0; it < max_iters; ++it) {
    trace.last_gradient = gradient_at(g, model.evaluate(theta));
    double change = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double delta = step * trace.last_gradient[j];
      theta[j] += delta;
      change = std::max(change, std::abs(delta));
    }
    trace.thetas.push_back(theta);
    if (change < tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

/// Log-gradients of the form
///   grad_theta log p_k(x_k, theta) = u_k(x_k) Lambda + v_k(x_k) theta,
/// with scalar tables u_k, v_k and a constant vector Lambda. The factor
/// tables at theta_old are those of the graph.
struct LinearFactorSet {
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v;
  std::vector<double> lambda;
};

struct LinearStepResult {
  std::vector<double> theta;
  double h_a = 0.0;
  double h_b = 0.0;
  /// theta = coefficient * lambda.
  double coefficient = 0.0;
  /// H_a + H_b * coefficient; zero at an exact stationary point.
  double residual = 0.0;
};

/// Closed-form M-step theta_new = -(H_a / H_b) Lambda, where
///   H_a = sum_x prod_m p_m(x_m, theta_old) sum_k u_k(x_k)
///   H_b = sum_x prod_m p_m(x_m, theta_old) sum_k v_k(x_k)
/// are both computed by entropy message passing.
///
/// Throws DegenerateMStep when |H_b| <= 1e-12 |H_a| (including H_a = H_b = 0).
inline LinearStepResult em_linear_step(const CheckedGraph& g, const LinearFactorSet& lin,
                                       std::size_t root = 0) {
  if (lin.lambda.empty())
    throw Error(ErrorKind::InvalidModel, "lambda must have at least one component", "lambda");
  LinearStepResult out;
  out.h_a = compute_zh(g, lift_tables(g, lin.u), root).H;
  out.h_b = compute_zh(g, lift_tables(g, lin.v), root).H;
  if (!(std::abs(out.h_b) > 1e-12 * std::abs(out.h_a)) ||
      (std::abs(out.h_a) < kZeroEvidenceFloor && std::abs(out.h_b) < kZeroEvidenceFloor))
    throw Error(ErrorKind::DegenerateMStep,
                "stationarity equation has no unique solution (H_a = " + std::to_string(out.h_a) +
                    ", H_b = " + std::to_string(out.h_b) + ")");
  out.coefficient = -(out.h_a / out.h_b);
  out.theta.reserve(lin.lambda.size());
  for (double l : lin.lambda) out.theta.push_back(out.coefficient * l);
  out.residual = out.h_a + out.h_b * out.coefficient;
  return out;
}

}  // namespace emp
