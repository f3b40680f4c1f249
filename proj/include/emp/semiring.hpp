#pragma once

/// @file semiring.hpp
/// Commutative semirings used by the message-passing engine.
///
/// Every semiring is a stateless policy type exposing `zero()`, `one()`,
/// `add()`, `mul()` and `from_real()` as static members. Rescaling support
/// (`rescalable`, `magnitude`, `scale`) lets long chains avoid underflow.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace emp {

enum class SemiringId { SumProduct, MaxProduct, Boolean, Entropy };

constexpr std::string_view to_string(SemiringId id) noexcept {
  switch (id) {
    case SemiringId::SumProduct: return "sum-product";
    case SemiringId::MaxProduct: return "max-product";
    case SemiringId::Boolean: return "boolean";
    case SemiringId::Entropy: return "entropy";
  }
  return "unknown";
}

/// Element (score, aux) of the entropy semiring. After a full summation it
/// carries (Z, H).
struct EntropyWeight {
  double score = 0.0;
  double aux = 0.0;

  friend bool operator==(const EntropyWeight&, const EntropyWeight&) = default;
};

template <typename S>
concept CommutativeSemiring = requires(const typename S::value_type& a,
                                       const typename S::value_type& b,
                                       double x) {
  typename S::value_type;
  { S::id } -> std::convertible_to<SemiringId>;
  { S::zero() } -> std::same_as<typename S::value_type>;
  { S::one() } -> std::same_as<typename S::value_type>;
  { S::add(a, b) } -> std::same_as<typename S::value_type>;
  { S::mul(a, b) } -> std::same_as<typename S::value_type>;
  { S::from_real(x) } -> std::same_as<typename S::value_type>;
  { S::distance(a, b) } -> std::convertible_to<double>;
  { S::rescalable } -> std::convertible_to<bool>;
};

namespace detail {

/// |a - b| relative to max(1, |a|, |b|).
inline double relative_gap(double a, double b) noexcept {
  if (a == b) return 0.0;
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) / scale;
}

}  // namespace detail

/// <R+, +, x, 0, 1>
struct SumProduct {
  using value_type = double;
  static constexpr SemiringId id = SemiringId::SumProduct;
  static constexpr bool rescalable = true;

  static value_type zero() noexcept { return 0.0; }
  static value_type one() noexcept { return 1.0; }
  static value_type add(value_type a, value_type b) noexcept { return a + b; }
  static value_type mul(value_type a, value_type b) noexcept { return a * b; }
  static value_type from_real(double x) noexcept { return x; }
  static double magnitude(value_type a) noexcept { return std::abs(a); }
  static value_type scale(value_type a, double c) noexcept { return a * c; }
  static double distance(value_type a, value_type b) noexcept {
    return detail::relative_gap(a, b);
  }
};

/// <R+, max, x, 0, 1>
struct MaxProduct {
  using value_type = double;
  static constexpr SemiringId id = SemiringId::MaxProduct;
  static constexpr bool rescalable = true;

  static value_type zero() noexcept { return 0.0; }
  static value_type one() noexcept { return 1.0; }
  static value_type add(value_type a, value_type b) noexcept { return std::max(a, b); }
  static value_type mul(value_type a, value_type b) noexcept { return a * b; }
  static value_type from_real(double x) noexcept { return x; }
  static double magnitude(value_type a) noexcept { return std::abs(a); }
  static value_type scale(value_type a, double c) noexcept { return a * c; }
  static double distance(value_type a, value_type b) noexcept {
    return detail::relative_gap(a, b);
  }
};

/// <{0, 1}, or, and, 0, 1>. Real table entries map to true iff nonzero.
struct Boolean {
  using value_type = bool;
  static constexpr SemiringId id = SemiringId::Boolean;
  static constexpr bool rescalable = false;

  static value_type zero() noexcept { return false; }
  static value_type one() noexcept { return true; }
  static value_type add(value_type a, value_type b) noexcept { return a || b; }
  static value_type mul(value_type a, value_type b) noexcept { return a && b; }
  static value_type from_real(double x) noexcept { return x != 0.0; }
  static double magnitude(value_type a) noexcept { return a ? 1.0 : 0.0; }
  static value_type scale(value_type a, double) noexcept { return a; }
  static double distance(value_type a, value_type b) noexcept { return a == b ? 0.0 : 1.0; }
};

/// <R^2, (+,+), product rule, (0,0), (1,0)>
///
///   (x1, y1) + (x2, y2) = (x1 + x2, y1 + y2)
///   (x1, y1) * (x2, y2) = (x1 x2, x1 y2 + x2 y1)
struct Entropy {
  using value_type = EntropyWeight;
  static constexpr SemiringId id = SemiringId::Entropy;
  static constexpr bool rescalable = true;

  static value_type zero() noexcept { return {0.0, 0.0}; }
  static value_type one() noexcept { return {1.0, 0.0}; }
  static value_type add(const value_type& a, const value_type& b) noexcept {
    return {a.score + b.score, a.aux + b.aux};
  }
  static value_type mul(const value_type& a, const value_type& b) noexcept {
    return {a.score * b.score, a.score * b.aux + b.score * a.aux};
  }
  /// A plain real enters with a zero companion.
  static value_type from_real(double x) noexcept { return {x, 0.0}; }
  static double magnitude(const value_type& a) noexcept { return std::abs(a.score); }
  static value_type scale(const value_type& a, double c) noexcept {
    return {a.score * c, a.aux * c};
  }
  static double distance(const value_type& a, const value_type& b) noexcept {
    return std::max(detail::relative_gap(a.score, b.score),
                    detail::relative_gap(a.aux, b.aux));
  }
};

/// Lifts a factor entry f with companion g to the pair (f, f g).
///
/// A zero entry yields (0, 0) whatever g is, so g may be NaN or infinite
/// there (the 0 log 0 = 0 convention).
inline EntropyWeight lift(double f, double g) noexcept {
  if (f == 0.0) return {0.0, 0.0};
  return {f, f * g};
}

/// Left fold of `mul` over `items`; the empty product is `one()`.
template <CommutativeSemiring S>
typename S::value_type nary_product(std::span<const typename S::value_type> items) {
  if (items.empty()) return S::one();
  auto acc = items.front();
  for (std::size_t i = 1; i < items.size(); ++i) acc = S::mul(acc, items[i]);
  return acc;
}

/// Closed form of the n-ary entropy product:
///   (prod a_m, sum_m b_m prod_{j != m} a_j).
inline EntropyWeight entropy_product_closed_form(std::span<const EntropyWeight> items) {
  double product = 1.0;
  for (const auto& w : items) product *= w.score;
  double aux = 0.0;
  for (std::size_t m = 0; m < items.size(); ++m) {
    double others = 1.0;
    for (std::size_t j = 0; j < items.size(); ++j)
      if (j != m) others *= items[j].score;
    aux += items[m].aux * others;
  }
  return {product, aux};
}

/// One failed axiom instance found by `verify_axioms`.
struct AxiomViolation {
  std::string axiom;
  std::array<std::size_t, 3> indices{};
  double gap = 0.0;
};

struct AxiomReport {
  bool pass = true;
  double max_violation = 0.0;
  std::size_t checked = 0;
  /// First violations found (capped at `kMaxRecorded`).
  std::vector<AxiomViolation> violations;

  static constexpr std::size_t kMaxRecorded = 32;

  bool violated(std::string_view axiom) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const AxiomViolation& v) { return v.axiom == axiom; });
  }
};

namespace detail {

template <CommutativeSemiring S>
void check_triple(const typename S::value_type& a, const typename S::value_type& b,
                  const typename S::value_type& c, std::array<std::size_t, 3> idx,
                  double tol, AxiomReport& report) {
  auto record = [&](std::string_view axiom, const typename S::value_type& lhs,
                    const typename S::value_type& rhs) {
    const double gap = S::distance(lhs, rhs);
    ++report.checked;
    report.max_violation = std::max(report.max_violation, gap);
    if (!(gap <= tol)) {
      report.pass = false;
      if (report.violations.size() < AxiomReport::kMaxRecorded)
        report.violations.push_back({std::string(axiom), idx, gap});
    }
  };
  record("add-associativity", S::add(S::add(a, b), c), S::add(a, S::add(b, c)));
  record("mul-associativity", S::mul(S::mul(a, b), c), S::mul(a, S::mul(b, c)));
  record("add-commutativity", S::add(a, b), S::add(b, a));
  record("mul-commutativity", S::mul(a, b), S::mul(b, a));
  record("add-identity", S::add(a, S::zero()), a);
  record("mul-identity", S::mul(a, S::one()), a);
  record("right-distributivity", S::mul(S::add(a, b), c), S::add(S::mul(a, c), S::mul(b, c)));
  record("left-distributivity", S::mul(c, S::add(a, b)), S::add(S::mul(c, a), S::mul(c, b)));
}

}  // namespace detail

/// Checks the commutative-semiring axioms on every ordered triple drawn from
/// `samples`. Failures are reported, not thrown.
template <CommutativeSemiring S>
AxiomReport verify_axioms(std::span<const typename S::value_type> samples, double tol) {
  AxiomReport report;
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        detail::check_triple<S>(samples[i], samples[j], samples[k], {i, j, k}, tol, report);
  return report;
}

/// Same checks as `verify_axioms`, restricted to the given triples.
template <CommutativeSemiring S>
AxiomReport verify_axioms_on_triples(
    std::span<const std::array<typename S::value_type, 3>> triples, double tol) {
  AxiomReport report;
  for (std::size_t t = 0; t < triples.size(); ++t)
    detail::check_triple<S>(triples[t][0], triples[t][1], triples[t][2], {t, t, t}, tol,
                            report);
  return report;
}

/// Calls `fn` with a default-constructed semiring policy matching `id`.
template <typename Fn>
decltype(auto) visit_semiring(SemiringId id, Fn&& fn) {
  switch (id) {
    case SemiringId::SumProduct: return fn(SumProduct{});
    case SemiringId::MaxProduct: return fn(MaxProduct{});
    case SemiringId::Boolean: return fn(Boolean{});
    case SemiringId::Entropy: return fn(Entropy{});
  }
  return fn(SumProduct{});
}

}  // namespace emp
