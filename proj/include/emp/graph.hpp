#pragma once

/// @file graph.hpp
/// Discrete factor graphs with dense tables, structural validation and
/// tree schedules.
///
/// Table layout is mixed-radix with the first scope variable as the most
/// significant digit: for scope (a, b) with cardinalities (2, 3), entry
/// (a=1, b=2) lives at index 1*3 + 2 = 5.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emp/error.hpp"

namespace emp {

struct VariableDecl {
  std::string id;
  std::size_t cardinality = 0;
};

struct FactorTable {
  std::string id;
  std::vector<std::size_t> scope;  // variable indices
  std::vector<double> values;
};

/// Flat index of `assignment` in a table over `cards`.
inline std::size_t assignment_index(std::span<const std::size_t> cards,
                                    std::span<const std::size_t> assignment) {
  if (cards.size() != assignment.size())
    throw Error(ErrorKind::OutOfDomain, "assignment has " + std::to_string(assignment.size()) +
                                            " values for " + std::to_string(cards.size()) +
                                            " variables");
  std::size_t index = 0;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (assignment[i] >= cards[i])
      throw Error(ErrorKind::OutOfDomain, "value " + std::to_string(assignment[i]) +
                                              " outside domain of size " +
                                              std::to_string(cards[i]));
    index = index * cards[i] + assignment[i];
  }
  return index;
}

/// Inverse of `assignment_index`.
inline std::vector<std::size_t> decode_index(std::span<const std::size_t> cards,
                                             std::size_t index) {
  std::vector<std::size_t> assignment(cards.size());
  for (std::size_t i = cards.size(); i-- > 0;) {
    assignment[i] = index % cards[i];
    index /= cards[i];
  }
  if (index != 0) throw Error(ErrorKind::OutOfDomain, "flat index exceeds table size");
  return assignment;
}

/// Unchecked factor graph under construction. Run `validate` before inference.
class FactorGraph {
 public:
  /// A probabilistic graph requires every table entry to be nonnegative.
  explicit FactorGraph(bool probabilistic = true) : probabilistic_(probabilistic) {}

  std::size_t add_variable(std::string id, std::size_t cardinality) {
    if (index_.contains(id)) throw Error(ErrorKind::DuplicateId, "variable declared twice", id);
    const std::size_t n = variables_.size();
    index_.emplace(id, n);
    variables_.push_back({std::move(id), cardinality});
    return n;
  }

  std::size_t add_factor(std::string id, const std::vector<std::string>& scope,
                         std::vector<double> values) {
    std::vector<std::size_t> indices;
    indices.reserve(scope.size());
    for (const auto& name : scope) {
      const auto n = find_variable(name);
      if (!n) throw Error(ErrorKind::UnknownVariable, "scope references '" + name + "'", id);
      indices.push_back(*n);
    }
    return add_factor_indices(std::move(id), std::move(indices), std::move(values));
  }

  std::size_t add_factor_indices(std::string id, std::vector<std::size_t> scope,
                                 std::vector<double> values) {
    factors_.push_back({std::move(id), std::move(scope), std::move(values)});
    return factors_.size() - 1;
  }

  std::optional<std::size_t> find_variable(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool probabilistic() const noexcept { return probabilistic_; }
  const std::vector<VariableDecl>& variables() const noexcept { return variables_; }
  const std::vector<FactorTable>& factors() const noexcept { return factors_; }
  std::vector<FactorTable>& mutable_factors() noexcept { return factors_; }

  std::vector<std::size_t> scope_cardinalities(std::size_t m) const {
    std::vector<std::size_t> cards;
    cards.reserve(factors_[m].scope.size());
    for (auto n : factors_[m].scope) cards.push_back(variables_[n].cardinality);
    return cards;
  }

 private:
  bool probabilistic_;
  std::vector<VariableDecl> variables_;
  std::vector<FactorTable> factors_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

inline std::string factor_path(std::size_t m, std::string_view field = {}) {
  std::string path = "factors[" + std::to_string(m) + "]";
  if (!field.empty()) path += "." + std::string(field);
  return path;
}

}  // namespace detail

/// Lists every structural problem of `g`. Empty iff `validate` would succeed.
///
/// Paths use document coordinates (`variables[i]`, `factors[m].values`).
inline std::vector<Error> diagnose(const FactorGraph& g) {
  std::vector<Error> errors;
  const auto& vars = g.variables();
  const auto& factors = g.factors();
  for (std::size_t n = 0; n < vars.size(); ++n)
    if (vars[n].cardinality == 0)
      errors.emplace_back(ErrorKind::InvalidCardinality, "cardinality must be >= 1",
                          "variables[" + std::to_string(n) + "].cardinality");

  bool structural = true;
  for (std::size_t m = 0; m < factors.size(); ++m) {
    const auto& f = factors[m];
    if (f.scope.empty()) {
      errors.emplace_back(ErrorKind::InvalidScope, "factor '" + f.id + "' has an empty scope",
                          detail::factor_path(m, "scope"));
      structural = false;
      continue;
    }
    bool scope_ok = true;
    for (std::size_t p = 0; p < f.scope.size(); ++p) {
      const auto n = f.scope[p];
      auto path = [&] { return detail::factor_path(m, "scope[" + std::to_string(p) + "]"); };
      if (n >= vars.size()) {
        errors.emplace_back(ErrorKind::UnknownVariable,
                            "variable index " + std::to_string(n) + " is not declared", path());
        scope_ok = false;
      } else if (std::find(f.scope.begin(), f.scope.begin() + p, n) != f.scope.begin() + p) {
        errors.emplace_back(ErrorKind::InvalidScope,
                            "variable '" + vars[n].id + "' repeated in scope", path());
        scope_ok = false;
      }
    }
    if (!scope_ok) {
      structural = false;
      continue;
    }
    std::size_t expected = 1;
    for (auto n : f.scope) expected *= vars[n].cardinality;
    if (f.values.size() != expected) {
      errors.emplace_back(ErrorKind::ScopeMismatch,
                          "table has " + std::to_string(f.values.size()) +
                              " entries, scope requires " + std::to_string(expected),
                          detail::factor_path(m, "values"));
    }
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      const double v = f.values[i];
      if (!std::isfinite(v) || (g.probabilistic() && v < 0.0)) {
        errors.emplace_back(ErrorKind::InvalidValue,
                            std::isfinite(v) ? "negative entry in a probabilistic table"
                                             : "non-finite table entry",
                            detail::factor_path(m, "values[" + std::to_string(i) + "]"));
        break;
      }
    }
  }
  if (!structural) return errors;

  std::vector<bool> covered(vars.size(), false);
  for (const auto& f : factors)
    for (auto n : f.scope) covered[n] = true;
  for (std::size_t n = 0; n < vars.size(); ++n)
    if (!covered[n])
      errors.emplace_back(ErrorKind::UncoveredVariable,
                          "variable '" + vars[n].id + "' appears in no factor",
                          "variables[" + std::to_string(n) + "]");

  // A bipartite graph is a forest iff every edge joins two previously
  // disconnected components.
  detail::DisjointSets sets(vars.size() + factors.size());
  for (std::size_t m = 0; m < factors.size(); ++m) {
    for (auto n : factors[m].scope) {
      if (!sets.unite(vars.size() + m, n)) {
        errors.emplace_back(ErrorKind::CycleDetected,
                            "edge between factor '" + factors[m].id + "' and variable '" +
                                vars[n].id + "' closes a cycle",
                            detail::factor_path(m, "scope"));
        return errors;
      }
    }
  }
  return errors;
}

enum class Direction : std::uint8_t { VariableToFactor, FactorToVariable };

/// One orientation of a variable-factor edge.
struct DirectedEdge {
  std::size_t edge = 0;
  Direction direction = Direction::VariableToFactor;

  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

/// A validated, acyclic factor graph with its bipartite adjacency.
///
/// Edge `e` joins factor `edge(e).factor` (at scope position
/// `edge(e).position`) to variable `edge(e).variable`. The edges of factor
/// `m` are contiguous, in scope order.
class CheckedGraph {
 public:
  struct Edge {
    std::size_t factor;
    std::size_t position;
    std::size_t variable;
  };

  const FactorGraph& graph() const noexcept { return graph_; }
  std::size_t num_variables() const noexcept { return graph_.variables().size(); }
  std::size_t num_factors() const noexcept { return graph_.factors().size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const VariableDecl& variable(std::size_t n) const { return graph_.variables()[n]; }
  const FactorTable& factor(std::size_t m) const { return graph_.factors()[m]; }
  std::size_t cardinality(std::size_t n) const { return graph_.variables()[n].cardinality; }

  const Edge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const std::size_t> variable_edges(std::size_t n) const { return var_edges_[n]; }
  std::size_t factor_edge(std::size_t m, std::size_t position) const {
    return factor_offset_[m] + position;
  }
  std::size_t factor_degree(std::size_t m) const { return graph_.factors()[m].scope.size(); }
  std::span<const std::size_t> scope_cardinalities(std::size_t m) const {
    return scope_cards_[m];
  }

  std::size_t num_components() const noexcept { return component_roots_.size(); }
  std::size_t component_of(std::size_t n) const { return component_[n]; }
  /// First declared variable of each component, in component order.
  std::span<const std::size_t> component_roots() const noexcept { return component_roots_; }

  std::size_t variable_index(std::string_view id) const {
    const auto n = graph_.find_variable(id);
    if (!n) throw Error(ErrorKind::UnknownVariable, "no variable named '" + std::string(id) + "'");
    return *n;
  }

 private:
  friend CheckedGraph validate(FactorGraph g);

  explicit CheckedGraph(FactorGraph g) : graph_(std::move(g)) {
    const std::size_t nv = num_variables();
    const std::size_t nf = num_factors();
    var_edges_.resize(nv);
    factor_offset_.resize(nf);
    scope_cards_.resize(nf);
    for (std::size_t m = 0; m < nf; ++m) {
      factor_offset_[m] = edges_.size();
      const auto& scope = graph_.factors()[m].scope;
      for (std::size_t p = 0; p < scope.size(); ++p) {
        var_edges_[scope[p]].push_back(edges_.size());
        edges_.push_back({m, p, scope[p]});
      }
      scope_cards_[m] = graph_.scope_cardinalities(m);
    }

    detail::DisjointSets sets(nv + nf);
    for (const auto& e : edges_) sets.unite(nv + e.factor, e.variable);
    component_.assign(nv, 0);
    std::unordered_map<std::size_t, std::size_t> label;
    for (std::size_t n = 0; n < nv; ++n) {
      const auto [it, fresh] = label.emplace(sets.find(n), component_roots_.size());
      if (fresh) component_roots_.push_back(n);
      component_[n] = it->second;
    }
  }

  FactorGraph graph_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> var_edges_;
  std::vector<std::size_t> factor_offset_;
  std::vector<std::vector<std::size_t>> scope_cards_;
  std::vector<std::size_t> component_;
  std::vector<std::size_t> component_roots_;
};

/// Validates `g` and freezes it. Throws the first problem `diagnose` finds.
inline CheckedGraph validate(FactorGraph g) {
  auto errors = diagnose(g);
  if (!errors.empty()) throw errors.front();
  return CheckedGraph(std::move(g));
}

/// Message order for one sweep toward the roots and, optionally, back.
struct Schedule {
  std::size_t root = 0;
  /// Root of every component; `roots.front() == root`.
  std::vector<std::size_t> roots;
  std::vector<DirectedEdge> forward;
  std::vector<DirectedEdge> backward;

  std::size_t size() const noexcept { return forward.size() + backward.size(); }
};

/// Builds a leaf-to-root schedule rooted at variable `root`. Components not
/// containing `root` are rooted at their first declared variable. With
/// `two_pass`, the root-to-leaf sweep is appended, so every orientation of
/// every edge appears exactly once.
inline Schedule make_schedule(const CheckedGraph& g, std::size_t root, bool two_pass) {
  if (root >= g.num_variables())
    throw Error(ErrorKind::UnknownVariable, "root index " + std::to_string(root) + " not declared");
  const std::size_t nv = g.num_variables();

  Schedule s;
  s.root = root;
  s.roots.push_back(root);
  for (auto r : g.component_roots())
    if (g.component_of(r) != g.component_of(root)) s.roots.push_back(r);

  // BFS over nodes: variables are 0..nv-1, factors are nv + m.
  struct Visit {
    std::size_t node;
    std::size_t parent_edge;
  };
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<Visit> order;
  order.reserve(nv + g.num_factors());
  std::vector<bool> seen(nv + g.num_factors(), false);
  for (auto r : s.roots) {
    std::size_t head = order.size();
    order.push_back({r, kNone});
    seen[r] = true;
    for (; head < order.size(); ++head) {
      const auto [node, via] = order[head];
      if (node < nv) {
        for (auto e : g.variable_edges(node)) {
          const std::size_t next = nv + g.edge(e).factor;
          if (e == via || seen[next]) continue;
          seen[next] = true;
          order.push_back({next, e});
        }
      } else {
        const std::size_t m = node - nv;
        for (std::size_t p = 0; p < g.factor_degree(m); ++p) {
          const std::size_t e = g.factor_edge(m, p);
          const std::size_t next = g.edge(e).variable;
          if (e == via || seen[next]) continue;
          seen[next] = true;
          order.push_back({next, e});
        }
      }
    }
  }

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (it->parent_edge == kNone) continue;
    s.forward.push_back({it->parent_edge, it->node < nv ? Direction::VariableToFactor
                                                        : Direction::FactorToVariable});
  }
  if (two_pass) {
    for (const auto& v : order) {
      if (v.parent_edge == kNone) continue;
      s.backward.push_back({v.parent_edge, v.node < nv ? Direction::FactorToVariable
                                                       : Direction::VariableToFactor});
    }
  }
  return s;
}

inline Schedule make_schedule(const CheckedGraph& g, std::string_view root, bool two_pass) {
  return make_schedule(g, g.variable_index(root), two_pass);
}

}  // namespace emp
