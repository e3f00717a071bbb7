#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ebcsl/env.hpp"
#include "ebcsl/errors.hpp"

namespace ebcsl {

constexpr int kEnumerationCap = 12;  // max layover EBs for exact enumeration

struct OptionContext {
  Allocation prev_option;
  double termination_prob = 1.0;  // beta in [0,1]; 1 on forced termination
  std::vector<int> lay_set;
};

struct HighPolicyDistribution {
  std::vector<Allocation> support;
  std::vector<double> probs;
};

inline std::vector<int> layover_set(const std::vector<uint8_t>& lay_mask) {
  std::vector<int> out;
  for (size_t m = 0; m < lay_mask.size(); ++m)
    if (lay_mask[m]) out.push_back(static_cast<int>(m));
  return out;
}

inline std::vector<uint8_t> lay_mask_of(const GlobalState& s) {
  std::vector<uint8_t> mask(s.locals.size(), 0);
  for (size_t m = 0; m < s.locals.size(); ++m)
    mask[m] = s.locals[m].status == 1 ? 1 : 0;
  return mask;
}

// All 0/1 vectors over the layover set with at most N ones, zeros elsewhere.
// Enumerated by subset size, then lexicographically by member index, so the
// all-zero allocation is always first.
inline std::vector<Allocation> option_space(const std::vector<uint8_t>& lay_mask,
                                            int charger_count,
                                            int cap = kEnumerationCap) {
  std::vector<int> lay = layover_set(lay_mask);
  int n = static_cast<int>(lay.size());
  if (n > cap)
    throw EnumerationCapExceeded("option_space: " + std::to_string(n) +
                                 " layover EBs exceeds enumeration cap " +
                                 std::to_string(cap));
  int m_total = static_cast<int>(lay_mask.size());
  int max_pick = std::min(charger_count, n);

  std::vector<Allocation> out;
  for (int size = 0; size <= max_pick; ++size) {
    std::vector<int> comb(size);
    for (int i = 0; i < size; ++i) comb[i] = i;
    while (true) {
      Allocation a = Allocation::zeros(m_total);
      for (int i : comb) a.bits[lay[i]] = 1;
      out.push_back(std::move(a));
      if (size == 0) break;
      int i = size - 1;
      while (i >= 0 && comb[i] == n - size + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < size; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return out;
}

inline std::vector<Allocation> option_space(const GlobalState& s,
                                            const ScenarioConfig& cfg,
                                            int cap = kEnumerationCap) {
  return option_space(lay_mask_of(s), cfg.charger_count, cap);
}

inline int find_in_support(const std::vector<Allocation>& support, const Allocation& a) {
  for (size_t i = 0; i < support.size(); ++i)
    if (support[i] == a) return static_cast<int>(i);
  return -1;
}

// pi_H(w) = (1 - beta) * 1[w = w_prev] + beta * mu(w)
inline HighPolicyDistribution compose_high_policy(const std::vector<Allocation>& support,
                                                  const std::vector<double>& mu_probs,
                                                  double beta,
                                                  const Allocation& prev_option) {
  if (support.size() != mu_probs.size())
    throw ContractViolation("compose_high_policy: support/probs size mismatch");
  if (!(beta >= 0.0 && beta <= 1.0))
    throw ContractViolation("compose_high_policy: beta outside [0,1]");
  int prev_idx = find_in_support(support, prev_option);
  if (prev_idx < 0 && beta < 1.0)
    throw ContractViolation(
        "compose_high_policy: previous option infeasible with beta < 1");
  HighPolicyDistribution d;
  d.support = support;
  d.probs.resize(support.size());
  for (size_t i = 0; i < support.size(); ++i) {
    double keep = (static_cast<int>(i) == prev_idx) ? (1.0 - beta) : 0.0;
    d.probs[i] = keep + beta * mu_probs[i];
  }
  return d;
}

}  // namespace ebcsl
