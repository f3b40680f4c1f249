#pragma once

/// @file entropy.hpp
/// Entropy message passing: runs the generic engine over the entropy
/// semiring with factors lifted to (f, f g), producing
///
///   Z = sum_x prod_m f_m(x_m)
///   H = sum_x prod_m f_m(x_m) sum_k g_k(x_k)
///
/// and, for g = log2 f, the posterior entropy -H/Z + log2 Z in bits.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emp/error.hpp"
#include "emp/graph.hpp"
#include "emp/propagation.hpp"
#include "emp/semiring.hpp"

namespace emp {

/// Companion entry allowed only where the paired factor entry is zero.
inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

/// Totals below this are treated as zero evidence.
inline constexpr double kZeroEvidenceFloor = 1e-300;

/// A factor graph plus one companion table g_m per factor, sharing the
/// factor's scope and indexing.
struct WeightedGraph {
  FactorGraph base;
  std::vector<std::vector<double>> companions;
};

/// Entropy-semiring tables over a validated structure.
struct LiftedGraph {
  CheckedGraph graph;
  std::vector<std::vector<EntropyWeight>> tables;
};

struct EntropyResult {
  /// Mantissas; the true totals are Z * exp(log_scale) and H * exp(log_scale).
  double Z = 0.0;
  double H = 0.0;
  double log_scale = 0.0;
  /// Set by posterior-entropy computations only.
  std::optional<double> entropy_bits;

  double log2_z() const { return std::log2(Z) + log_scale / std::numbers::ln2; }
  double true_z() const { return Z * std::exp(log_scale); }
  double true_h() const { return H * std::exp(log_scale); }
};

enum class EntropyBase { Bits, Nats };

/// Converts an entropy in bits to `base`.
inline double convert_entropy(double bits, EntropyBase base) {
  return base == EntropyBase::Bits ? bits : bits * std::numbers::ln2;
}

/// g_m = log2 f_m for every factor, undefined where f_m = 0.
inline std::vector<std::vector<double>> log2_companions(const FactorGraph& g) {
  std::vector<std::vector<double>> out;
  out.reserve(g.factors().size());
  for (const auto& f : g.factors()) {
    auto& table = out.emplace_back();
    table.reserve(f.values.size());
    for (double v : f.values) table.push_back(v > 0.0 ? std::log2(v) : kUndefined);
  }
  return out;
}

/// Lifts each (f, g) entry pair of `g` with `companions` into the entropy
/// semiring. The factor values come from `values` (one table per factor).
inline std::vector<std::vector<EntropyWeight>> lift_tables(
    const CheckedGraph& g, std::span<const std::vector<double>> values,
    std::span<const std::vector<double>> companions) {
  if (values.size() != g.num_factors() || companions.size() != g.num_factors())
    throw Error(ErrorKind::ScopeMismatch, "expected one value and one companion table per factor");
  std::vector<std::vector<EntropyWeight>> tables(g.num_factors());
  for (std::size_t m = 0; m < g.num_factors(); ++m) {
    const auto& f = values[m];
    const auto& c = companions[m];
    const std::size_t expected = g.factor(m).values.size();
    if (f.size() != expected)
      throw Error(ErrorKind::ScopeMismatch, "value table length differs from scope size",
                  detail::factor_path(m, "values"));
    if (c.size() != expected)
      throw Error(ErrorKind::ScopeMismatch,
                  "companion table has " + std::to_string(c.size()) + " entries, scope requires " +
                      std::to_string(expected),
                  detail::factor_path(m, "g"));
    tables[m].reserve(expected);
    for (std::size_t i = 0; i < expected; ++i) {
      if (f[i] != 0.0 && !std::isfinite(c[i]))
        throw Error(ErrorKind::InvalidValue, "companion undefined where the factor is nonzero",
                    detail::factor_path(m, "g[" + std::to_string(i) + "]"));
      tables[m].push_back(lift(f[i], c[i]));
    }
  }
  return tables;
}

inline std::vector<std::vector<EntropyWeight>> lift_tables(
    const CheckedGraph& g, std::span<const std::vector<double>> companions) {
  std::vector<std::vector<double>> values;
  values.reserve(g.num_factors());
  for (std::size_t m = 0; m < g.num_factors(); ++m) values.push_back(g.factor(m).values);
  return lift_tables(g, values, companions);
}

/// Validates the structure of `wg` and lifts its tables.
inline LiftedGraph lift_graph(WeightedGraph wg) {
  auto checked = validate(std::move(wg.base));
  auto tables = lift_tables(checked, wg.companions);
  return {std::move(checked), std::move(tables)};
}

/// (Z, H) from tables already in the entropy semiring.
inline EntropyResult compute_zh(const CheckedGraph& g,
                                std::span<const std::vector<EntropyWeight>> tables,
                                std::size_t root = 0, bool rescale = false) {
  const auto result = run<Entropy>(g, tables, root, {.two_pass = false, .rescale = rescale});
  const auto total = total_sum<Entropy>(result);
  return {total.mantissa.score, total.mantissa.aux, total.log_scale, std::nullopt};
}

inline EntropyResult compute_zh(const LiftedGraph& lg, std::size_t root = 0, bool rescale = false) {
  return compute_zh(lg.graph, lg.tables, root, rescale);
}

/// Turns a (Z, H) pair computed with g = log2 f into -H/Z + log2 Z.
///
/// Throws ZeroEvidence when the Z mantissa is below `kZeroEvidenceFloor`.
/// Without rescaling the mantissa is the true Z.
inline EntropyResult with_posterior_entropy(EntropyResult zh) {
  if (!(zh.Z >= kZeroEvidenceFloor))
    throw Error(ErrorKind::ZeroEvidence,
                "total probability of the evidence is zero; entropy is undefined");
  double bits = -zh.H / zh.Z + zh.log2_z();
  if (bits < 0.0 && bits >= -1e-9) bits = 0.0;
  zh.entropy_bits = bits;
  return zh;
}

/// Posterior entropy in bits of a lifted graph whose companions are
/// g_m = log2 f_m.
inline EntropyResult posterior_entropy(const LiftedGraph& lg, std::size_t root = 0,
                                       bool rescale = false) {
  return with_posterior_entropy(compute_zh(lg, root, rescale));
}

/// Posterior entropy of an unweighted graph; companions are derived as log2 f.
inline EntropyResult posterior_entropy(const CheckedGraph& g, std::size_t root = 0,
                                       bool rescale = false) {
  const auto companions = log2_companions(g.graph());
  const auto tables = lift_tables(g, companions);
  return with_posterior_entropy(compute_zh(g, tables, root, rescale));
}

}  // namespace emp
