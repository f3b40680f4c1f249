#pragma once

/// @file oracle.hpp
/// Brute-force reference values by direct enumeration of joint assignments.
///
/// Nothing here calls the message-passing engine; only the plain data
/// types are shared. Intended for small instances (at most 10^6 joint
/// assignments).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "emp/error.hpp"
#include "emp/graph.hpp"
#include "emp/hmm.hpp"

namespace emp::oracle {

inline constexpr std::size_t kMaxAssignments = 1'000'000;

/// Mixed-radix odometer over all joint assignments; the last variable
/// changes fastest.
class AssignmentIterator {
 public:
  explicit AssignmentIterator(std::vector<std::size_t> cards)
      : cards_(std::move(cards)), current_(cards_.size(), 0) {
    std::size_t total = 1;
    for (auto c : cards_) {
      if (c == 0) {
        done_ = true;
        total = 0;
        break;
      }
      if (total > kMaxAssignments / c)
        throw Error(ErrorKind::TooLarge, "more than " + std::to_string(kMaxAssignments) +
                                             " joint assignments");
      total *= c;
    }
    total_ = total;
  }

  bool done() const noexcept { return done_; }
  const std::vector<std::size_t>& current() const noexcept { return current_; }
  std::size_t total() const noexcept { return total_; }

  void next() {
    for (std::size_t i = cards_.size(); i-- > 0;) {
      if (++current_[i] < cards_[i]) return;
      current_[i] = 0;
    }
    done_ = true;
  }

 private:
  std::vector<std::size_t> cards_;
  std::vector<std::size_t> current_;
  std::size_t total_ = 0;
  bool done_ = false;
};

namespace detail {

inline std::vector<std::size_t> cardinalities(const FactorGraph& g) {
  std::vector<std::size_t> cards;
  for (const auto& v : g.variables()) cards.push_back(v.cardinality);
  return cards;
}

inline std::size_t entry_of(const FactorGraph& g, std::size_t m,
                            const std::vector<std::size_t>& x) {
  std::size_t index = 0;
  for (auto n : g.factors()[m].scope) index = index * g.variables()[n].cardinality + x[n];
  return index;
}

/// Calls visit(x, product, entries) for every joint assignment x, where
/// entries[m] is the table position of factor m under x.
template <typename Visit>
void for_each_assignment(const FactorGraph& g, std::span<const std::vector<double>> values,
                         Visit&& visit) {
  std::vector<std::size_t> entries(g.factors().size());
  for (AssignmentIterator it(cardinalities(g)); !it.done(); it.next()) {
    double product = 1.0;
    for (std::size_t m = 0; m < entries.size(); ++m) {
      entries[m] = entry_of(g, m, it.current());
      product *= values[m][entries[m]];
    }
    visit(it.current(), product, entries);
  }
}

inline std::vector<std::vector<double>> own_values(const FactorGraph& g) {
  std::vector<std::vector<double>> values;
  for (const auto& f : g.factors()) values.push_back(f.values);
  return values;
}

}  // namespace detail

/// sum_x prod_m values_m(x_m)
inline double enumerate_z(const FactorGraph& g, std::span<const std::vector<double>> values) {
  double z = 0.0;
  detail::for_each_assignment(g, values, [&](const auto&, double p, const auto&) { z += p; });
  return z;
}

inline double enumerate_z(const FactorGraph& g) {
  const auto values = detail::own_values(g);
  return enumerate_z(g, values);
}

/// sum_x prod_m f_m(x_m) sum_k g_k(x_k). Assignments with zero product
/// contribute nothing, whatever their companions.
inline double enumerate_h(const FactorGraph& g, std::span<const std::vector<double>> values,
                          std::span<const std::vector<double>> companions) {
  double h = 0.0;
  detail::for_each_assignment(g, values, [&](const auto&, double p, const auto& entries) {
    if (p == 0.0) return;
    double sum = 0.0;
    for (std::size_t m = 0; m < entries.size(); ++m) sum += companions[m][entries[m]];
    h += p * sum;
  });
  return h;
}

inline double enumerate_h(const FactorGraph& g, std::span<const std::vector<double>> companions) {
  const auto values = detail::own_values(g);
  return enumerate_h(g, values, companions);
}

/// Unnormalized marginal of variable n: sum over every other variable.
inline std::vector<double> enumerate_marginal(const FactorGraph& g, std::size_t n) {
  const auto values = detail::own_values(g);
  std::vector<double> out(g.variables().at(n).cardinality, 0.0);
  detail::for_each_assignment(g, values,
                              [&](const auto& x, double p, const auto&) { out[x[n]] += p; });
  return out;
}

/// -sum_x P(x) log2 P(x) with P proportional to prod_m f_m.
inline double enumerate_entropy(const FactorGraph& g) {
  const double z = enumerate_z(g);
  if (!(z >= 1e-300)) throw Error(ErrorKind::ZeroEvidence, "total mass is zero");
  const auto values = detail::own_values(g);
  double h = 0.0;
  detail::for_each_assignment(g, values, [&](const auto&, double p, const auto&) {
    if (p > 0.0) {
      const double q = p / z;
      h -= q * std::log2(q);
    }
  });
  return h;
}

/// H(X | Y = y) of an HMM by summing over every hidden path, straight from
/// pi, A and B.
inline double enumerate_hmm_entropy(const HmmSpec& h) {
  const std::size_t T = h.observations.size();
  std::vector<std::size_t> cards(T, h.states);
  std::vector<double> joint;
  AssignmentIterator it(cards);
  joint.reserve(it.total());
  for (; !it.done(); it.next()) {
    const auto& x = it.current();
    double p = h.initial[x[0]] * h.emission[x[0]][h.observations[0]];
    for (std::size_t t = 1; t < T; ++t)
      p *= h.transition[x[t - 1]][x[t]] * h.emission[x[t]][h.observations[t]];
    joint.push_back(p);
  }
  double z = 0.0;
  for (double p : joint) z += p;
  if (!(z >= 1e-300)) throw Error(ErrorKind::ZeroEvidence, "observation sequence has probability zero");
  double entropy = 0.0;
  for (double p : joint)
    if (p > 0.0) entropy -= (p / z) * std::log2(p / z);
  return entropy;
}

/// Central differences of p(theta) = sum_x prod_m p_m(x_m, theta).
/// `values_at(theta)` returns the factor tables at theta.
template <typename ValuesAt>
std::vector<double> fd_gradient(const FactorGraph& g, ValuesAt&& values_at,
                                std::span<const double> theta, double h) {
  std::vector<double> grad(theta.size());
  std::vector<double> probe(theta.begin(), theta.end());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    probe[j] = theta[j] + h;
    const double up = enumerate_z(g, values_at(std::span<const double>(probe)));
    probe[j] = theta[j] - h;
    const double down = enumerate_z(g, values_at(std::span<const double>(probe)));
    probe[j] = theta[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace emp::oracle
