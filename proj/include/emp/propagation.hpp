#pragma once

/// @file propagation.hpp
/// Sum-product message passing over an arbitrary commutative semiring on a
/// validated forest.
///
///   q_{n->m}(x_n) = prod_{m' in N(n)\m} r_{m'->n}(x_n)
///   r_{m->n}(x_n) = sum_{x_m \ x_n} f_m(x_m) prod_{n' in N(m)\n} q_{n'->m}(x_n')
///   Z_n(x_n)      = prod_{m in N(n)} r_{m->n}(x_n)
///
/// With rescaling enabled every message is divided by its largest
/// first-component magnitude and the log of that factor is carried along
/// in a per-message accumulator. True values are mantissa * exp(log_scale).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "emp/error.hpp"
#include "emp/graph.hpp"
#include "emp/semiring.hpp"

namespace emp {

template <typename W>
struct Message {
  std::vector<W> values;
  double log_scale = 0.0;
};

/// Messages indexed by edge id, one slot per orientation.
template <typename W>
class MessageStore {
 public:
  MessageStore() = default;
  explicit MessageStore(const CheckedGraph& g)
      : to_factor_(g.num_edges()), to_variable_(g.num_edges()) {}

  bool ready(DirectedEdge de) const { return slot(de).written; }
  const Message<W>& get(DirectedEdge de) const { return slot(de).message; }

  /// Stores a message. Each orientation may be written only once.
  void put(DirectedEdge de, Message<W> message) {
    auto& s = slot(de);
    if (s.written)
      throw Error(ErrorKind::MissingDependency,
                  "message on edge " + std::to_string(de.edge) + " written twice");
    s.message = std::move(message);
    s.written = true;
    ++writes_;
  }

  std::size_t writes() const noexcept { return writes_; }
  std::size_t num_edges() const noexcept { return to_factor_.size(); }

 private:
  struct Slot {
    Message<W> message;
    bool written = false;
  };
  Slot& slot(DirectedEdge de) {
    return de.direction == Direction::VariableToFactor ? to_factor_.at(de.edge)
                                                       : to_variable_.at(de.edge);
  }
  const Slot& slot(DirectedEdge de) const {
    return de.direction == Direction::VariableToFactor ? to_factor_.at(de.edge)
                                                       : to_variable_.at(de.edge);
  }

  std::vector<Slot> to_factor_;
  std::vector<Slot> to_variable_;
  std::size_t writes_ = 0;
};

template <typename W>
struct Marginal {
  std::size_t variable = 0;
  std::vector<W> values;
  double log_scale = 0.0;
};

/// A semiring value whose true magnitude is `mantissa * exp(log_scale)`.
template <typename W>
struct ScaledTotal {
  W mantissa{};
  double log_scale = 0.0;
};

template <CommutativeSemiring S>
typename S::value_type scaled_value(const ScaledTotal<typename S::value_type>& t) {
  if (t.log_scale == 0.0) return t.mantissa;
  return S::scale(t.mantissa, std::exp(t.log_scale));
}

struct RunOptions {
  bool two_pass = false;
  bool rescale = false;
};

template <CommutativeSemiring S>
struct RunResult {
  using weight_type = typename S::value_type;

  Schedule schedule;
  MessageStore<weight_type> messages;
  /// Marginal at the root of every component, in `schedule.roots` order.
  std::vector<Marginal<weight_type>> root_marginals;
  /// Marginal of every variable, by variable index; filled by two-pass runs.
  std::vector<Marginal<weight_type>> marginals;
};

/// Maps the real tables of `g` into semiring `S`.
template <CommutativeSemiring S>
std::vector<std::vector<typename S::value_type>> semiring_tables(const CheckedGraph& g) {
  std::vector<std::vector<typename S::value_type>> tables(g.num_factors());
  for (std::size_t m = 0; m < g.num_factors(); ++m) {
    const auto& values = g.factor(m).values;
    tables[m].reserve(values.size());
    for (double v : values) tables[m].push_back(S::from_real(v));
  }
  return tables;
}

namespace detail {

template <CommutativeSemiring S>
void normalize(Message<typename S::value_type>& msg) {
  if constexpr (S::rescalable) {
    double peak = 0.0;
    for (const auto& w : msg.values) peak = std::max(peak, S::magnitude(w));
    if (peak == 0.0 || !std::isfinite(peak)) return;
    const double inv = 1.0 / peak;
    for (auto& w : msg.values) w = S::scale(w, inv);
    msg.log_scale += std::log(peak);
  }
}

template <typename W>
void require_tables(const CheckedGraph& g, std::span<const std::vector<W>> tables) {
  if (tables.size() != g.num_factors())
    throw Error(ErrorKind::ScopeMismatch, "expected " + std::to_string(g.num_factors()) +
                                              " tables, got " + std::to_string(tables.size()));
  for (std::size_t m = 0; m < tables.size(); ++m)
    if (tables[m].size() != g.factor(m).values.size())
      throw Error(ErrorKind::ScopeMismatch, "table size differs from factor", g.factor(m).id);
}

}  // namespace detail

/// Computes q_{n->m} for edge `e` (variable n = edge(e).variable, factor m =
/// edge(e).factor) from the factor messages already in `store`.
template <CommutativeSemiring S>
Message<typename S::value_type> variable_to_factor(const CheckedGraph& g,
                                                   const MessageStore<typename S::value_type>& store,
                                                   std::size_t e, bool rescale = false) {
  const auto n = g.edge(e).variable;
  Message<typename S::value_type> out;
  bool first = true;
  for (auto in : g.variable_edges(n)) {
    if (in == e) continue;
    const DirectedEdge de{in, Direction::FactorToVariable};
    if (!store.ready(de))
      throw Error(ErrorKind::MissingDependency,
                  "message from factor '" + g.factor(g.edge(in).factor).id + "' to variable '" +
                      g.variable(n).id + "' not yet computed");
    const auto& msg = store.get(de);
    if (first) {
      out.values = msg.values;
      first = false;
    } else {
      for (std::size_t x = 0; x < out.values.size(); ++x)
        out.values[x] = S::mul(out.values[x], msg.values[x]);
    }
    out.log_scale += msg.log_scale;
  }
  if (first) out.values.assign(g.cardinality(n), S::one());
  if (rescale) detail::normalize<S>(out);
  return out;
}

/// Computes r_{m->n} for edge `e` by summing the factor table times the
/// incoming variable messages over every other scope variable. Joint
/// assignments are visited in mixed-radix order.
template <CommutativeSemiring S>
Message<typename S::value_type> factor_to_variable(
    const CheckedGraph& g, std::span<const std::vector<typename S::value_type>> tables,
    const MessageStore<typename S::value_type>& store, std::size_t e, bool rescale = false) {
  using W = typename S::value_type;
  const auto m = g.edge(e).factor;
  const auto target = g.edge(e).position;
  const auto cards = g.scope_cardinalities(m);
  const std::size_t degree = cards.size();

  std::vector<const std::vector<W>*> incoming(degree, nullptr);
  Message<W> out;
  for (std::size_t p = 0; p < degree; ++p) {
    if (p == target) continue;
    const DirectedEdge de{g.factor_edge(m, p), Direction::VariableToFactor};
    if (!store.ready(de))
      throw Error(ErrorKind::MissingDependency,
                  "message from variable '" + g.variable(g.factor(m).scope[p]).id +
                      "' to factor '" + g.factor(m).id + "' not yet computed");
    incoming[p] = &store.get(de).values;
    out.log_scale += store.get(de).log_scale;
  }

  out.values.assign(cards[target], S::zero());
  const auto& table = tables[m];
  std::vector<std::size_t> digit(degree, 0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    W term = table[i];
    for (std::size_t p = 0; p < degree; ++p)
      if (p != target) term = S::mul(term, (*incoming[p])[digit[p]]);
    out.values[digit[target]] = S::add(out.values[digit[target]], term);
    for (std::size_t p = degree; p-- > 0;) {
      if (++digit[p] < cards[p]) break;
      digit[p] = 0;
    }
  }
  if (rescale) detail::normalize<S>(out);
  return out;
}

/// Writes the messages leaving leaves: the all-one vector from every
/// degree-one variable and the (mapped) table from every unary factor.
template <CommutativeSemiring S>
MessageStore<typename S::value_type> init_leaf_messages(
    const CheckedGraph& g, std::span<const std::vector<typename S::value_type>> tables,
    bool rescale = false) {
  using W = typename S::value_type;
  detail::require_tables(g, tables);
  MessageStore<W> store(g);
  for (std::size_t n = 0; n < g.num_variables(); ++n) {
    const auto edges = g.variable_edges(n);
    if (edges.size() != 1) continue;
    Message<W> msg{std::vector<W>(g.cardinality(n), S::one()), 0.0};
    store.put({edges.front(), Direction::VariableToFactor}, std::move(msg));
  }
  for (std::size_t m = 0; m < g.num_factors(); ++m) {
    if (g.factor_degree(m) != 1) continue;
    Message<W> msg{tables[m], 0.0};
    if (rescale) detail::normalize<S>(msg);
    store.put({g.factor_edge(m, 0), Direction::FactorToVariable}, std::move(msg));
  }
  return store;
}

/// Z_n(x_n): pointwise product of every factor message arriving at `n`.
template <CommutativeSemiring S>
Marginal<typename S::value_type> variable_marginal(
    const CheckedGraph& g, const MessageStore<typename S::value_type>& store, std::size_t n) {
  Marginal<typename S::value_type> out;
  out.variable = n;
  bool first = true;
  for (auto e : g.variable_edges(n)) {
    const DirectedEdge de{e, Direction::FactorToVariable};
    if (!store.ready(de))
      throw Error(ErrorKind::MissingDependency,
                  "marginal of '" + g.variable(n).id + "' requested before all messages arrived");
    const auto& msg = store.get(de);
    if (first) {
      out.values = msg.values;
      first = false;
    } else {
      for (std::size_t x = 0; x < out.values.size(); ++x)
        out.values[x] = S::mul(out.values[x], msg.values[x]);
    }
    out.log_scale += msg.log_scale;
  }
  if (first) out.values.assign(g.cardinality(n), S::one());
  return out;
}

template <CommutativeSemiring S>
RunResult<S> run(const CheckedGraph& g, std::span<const std::vector<typename S::value_type>> tables,
                 std::size_t root, RunOptions options = {}) {
  RunResult<S> result;
  result.schedule = make_schedule(g, root, options.two_pass);
  result.messages = init_leaf_messages<S>(g, tables, options.rescale);
  auto& store = result.messages;

  auto compute = [&](const DirectedEdge& de) {
    if (store.ready(de)) return;
    if (de.direction == Direction::VariableToFactor)
      store.put(de, variable_to_factor<S>(g, store, de.edge, options.rescale));
    else
      store.put(de, factor_to_variable<S>(g, tables, store, de.edge, options.rescale));
  };
  for (const auto& de : result.schedule.forward) compute(de);
  for (const auto& de : result.schedule.backward) compute(de);

  for (auto r : result.schedule.roots)
    result.root_marginals.push_back(variable_marginal<S>(g, store, r));
  if (options.two_pass) {
    result.marginals.reserve(g.num_variables());
    for (std::size_t n = 0; n < g.num_variables(); ++n)
      result.marginals.push_back(variable_marginal<S>(g, store, n));
  }
  return result;
}

/// Runs over the graph's own real tables mapped into `S`.
template <CommutativeSemiring S>
RunResult<S> run(const CheckedGraph& g, std::size_t root, RunOptions options = {}) {
  const auto tables = semiring_tables<S>(g);
  return run<S>(g, std::span<const std::vector<typename S::value_type>>(tables), root, options);
}

/// Semiring sum of a marginal over its variable's domain.
template <CommutativeSemiring S>
ScaledTotal<typename S::value_type> total_sum(const Marginal<typename S::value_type>& marginal) {
  ScaledTotal<typename S::value_type> total{S::zero(), marginal.log_scale};
  if (marginal.values.empty()) return total;
  total.mantissa = marginal.values.front();
  for (std::size_t x = 1; x < marginal.values.size(); ++x)
    total.mantissa = S::add(total.mantissa, marginal.values[x]);
  return total;
}

/// Total sum over the whole forest: the product of the component totals.
template <CommutativeSemiring S>
ScaledTotal<typename S::value_type> total_sum(const RunResult<S>& result) {
  ScaledTotal<typename S::value_type> total{S::one(), 0.0};
  bool first = true;
  for (const auto& marginal : result.root_marginals) {
    const auto part = total_sum<S>(marginal);
    total.mantissa = first ? part.mantissa : S::mul(total.mantissa, part.mantissa);
    total.log_scale += part.log_scale;
    first = false;
  }
  return total;
}

}  // namespace emp
