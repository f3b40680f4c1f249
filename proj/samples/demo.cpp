// Posterior entropy of a small HMM, next to the brute-force value.

#include <cstdio>

#include "emp/emp.hpp"
#include "emp/oracle.hpp"

int main() {
  emp::HmmSpec h;
  h.states = 3;
  h.alphabet = 2;
  h.initial = {0.6, 0.3, 0.1};
  h.transition = {{0.7, 0.2, 0.1}, {0.1, 0.8, 0.1}, {0.3, 0.3, 0.4}};
  h.emission = {{0.9, 0.1}, {0.2, 0.8}, {0.5, 0.5}};
  h.observations = {0, 0, 1, 1, 0, 1, 0, 0};

  const auto r = emp::hmm_entropy(h);
  std::printf("Z = %.12g\n", r.true_z());
  std::printf("H(X | Y = y) = %.12f bits\n", *r.entropy_bits);
  std::printf("enumeration  = %.12f bits\n", emp::oracle::enumerate_hmm_entropy(h));
}
