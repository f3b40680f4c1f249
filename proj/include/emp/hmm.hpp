#pragma once

/// @file hmm.hpp
/// Posterior state-sequence entropy H(X | Y = y) of a discrete HMM, computed
/// by entropy message passing over the hidden chain.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "emp/entropy.hpp"
#include "emp/error.hpp"
#include "emp/graph.hpp"

namespace emp {

struct HmmSpec {
  std::size_t states = 0;
  std::size_t alphabet = 0;
  std::vector<double> initial;                  // pi[s]
  std::vector<std::vector<double>> transition;  // A[s][s']
  std::vector<std::vector<double>> emission;    // B[s][o]
  std::vector<std::size_t> observations;        // y_1..y_T
};

namespace detail {

inline void check_distribution(const std::vector<double>& row, std::size_t size,
                               const std::string& path) {
  if (row.size() != size)
    throw Error(ErrorKind::InvalidModel,
                "expected " + std::to_string(size) + " entries, got " + std::to_string(row.size()),
                path);
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!std::isfinite(row[i]) || row[i] < 0.0)
      throw Error(ErrorKind::InvalidModel, "probabilities must be finite and nonnegative",
                  path + "[" + std::to_string(i) + "]");
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidModel, "row sums to " + std::to_string(sum) + ", not 1", path);
}

}  // namespace detail

/// Throws InvalidModel for non-stochastic parameters and InvalidObservation
/// for symbols outside the alphabet or an empty sequence.
inline void validate_hmm(const HmmSpec& h) {
  if (h.states == 0) throw Error(ErrorKind::InvalidModel, "need at least one state", "states");
  if (h.alphabet == 0)
    throw Error(ErrorKind::InvalidModel, "need at least one symbol", "alphabet");
  detail::check_distribution(h.initial, h.states, "pi");
  if (h.transition.size() != h.states)
    throw Error(ErrorKind::InvalidModel, "transition matrix needs one row per state", "A");
  if (h.emission.size() != h.states)
    throw Error(ErrorKind::InvalidModel, "emission matrix needs one row per state", "B");
  for (std::size_t s = 0; s < h.states; ++s) {
    detail::check_distribution(h.transition[s], h.states, "A[" + std::to_string(s) + "]");
    detail::check_distribution(h.emission[s], h.alphabet, "B[" + std::to_string(s) + "]");
  }
  if (h.observations.empty())
    throw Error(ErrorKind::InvalidObservation, "observation sequence is empty", "observations");
  for (std::size_t t = 0; t < h.observations.size(); ++t)
    if (h.observations[t] >= h.alphabet)
      throw Error(ErrorKind::InvalidObservation,
                  "symbol " + std::to_string(h.observations[t]) + " outside alphabet of size " +
                      std::to_string(h.alphabet),
                  "observations[" + std::to_string(t) + "]");
}

/// Builds the hidden chain x1..xT with
///   f1(x1)         = pi(x1) B(x1, y1)
///   ft(x{t-1}, xt) = A(x{t-1}, xt) B(xt, yt),   t = 2..T
/// and companions g = log2 f.
inline WeightedGraph hmm_to_weighted_graph(const HmmSpec& h) {
  validate_hmm(h);
  const std::size_t S = h.states;
  const std::size_t T = h.observations.size();
  WeightedGraph wg;
  for (std::size_t t = 0; t < T; ++t) wg.base.add_variable("x" + std::to_string(t + 1), S);

  std::vector<double> first(S);
  for (std::size_t s = 0; s < S; ++s) first[s] = h.initial[s] * h.emission[s][h.observations[0]];
  wg.base.add_factor_indices("f1", {0}, std::move(first));

  for (std::size_t t = 1; t < T; ++t) {
    std::vector<double> pair(S * S);
    const std::size_t y = h.observations[t];
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t j = 0; j < S; ++j) pair[i * S + j] = h.transition[i][j] * h.emission[j][y];
    wg.base.add_factor_indices("f" + std::to_string(t + 1), {t - 1, t}, std::move(pair));
  }
  wg.companions = log2_companions(wg.base);
  return wg;
}

/// Chains longer than this are rescaled unless the caller decides otherwise.
inline constexpr std::size_t kAutoRescaleLength = 1000;

/// H(X | Y = y) in bits. Time and memory are linear in the sequence length.
/// Throws ZeroEvidence when the observations have probability zero.
inline EntropyResult hmm_entropy(const HmmSpec& h, std::optional<bool> rescale = std::nullopt) {
  const bool scaled = rescale.value_or(h.observations.size() > kAutoRescaleLength);
  return posterior_entropy(lift_graph(hmm_to_weighted_graph(h)), 0, scaled);
}

}  // namespace emp
