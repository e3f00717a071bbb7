#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "ebcsl/autodiff.hpp"
#include "ebcsl/errors.hpp"
#include "ebcsl/nets.hpp"
#include "ebcsl/options.hpp"
#include "ebcsl/rng.hpp"

namespace ebcsl {

// --- squashed gaussian power head -------------------------------------------
//
// a = lo + (hi - lo) * (tanh(z) + 1) / 2 with z ~ N(mean, exp(log_std)).
// log_std is clamped to [-5, 2] wherever it is used; z is clamped to +-9 so
// samples stay strictly inside (lo, hi).

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kZClip = 9.0;

inline double squash_to_bounds(double z, double lo, double hi) {
  return lo + (hi - lo) * (std::tanh(z) + 1.0) * 0.5;
}

// log(1 - tanh(z)^2), stable for large |z|
inline double log1m_tanh_sq(double z) {
  return 2.0 * (std::numbers::ln2 - z - std::log1p(std::exp(-2.0 * z)));
}

struct PowerSample {
  double action = 0.0;
  double z = 0.0;
  double log_prob = 0.0;
};

inline double squashed_logprob_from_z(double z, double mean, double log_std,
                                      double lo, double hi) {
  double ls = std::min(kLogStdMax, std::max(kLogStdMin, log_std));
  double zn = (z - mean) * std::exp(-ls);
  return -0.5 * zn * zn - ls - 0.5 * std::log(2.0 * std::numbers::pi) -
         std::log((hi - lo) * 0.5) - log1m_tanh_sq(z);
}

inline PowerSample squashed_sample(double mean, double log_std, double lo, double hi,
                                   Rng& rng) {
  if (!(lo < hi)) throw ContractViolation("squashed head: need lo < hi");
  double ls = std::min(kLogStdMax, std::max(kLogStdMin, log_std));
  double z = mean + std::exp(ls) * rng.normal();
  z = std::min(kZClip, std::max(-kZClip, z));
  PowerSample s;
  s.z = z;
  s.action = squash_to_bounds(z, lo, hi);
  s.log_prob = squashed_logprob_from_z(z, mean, log_std, lo, hi);
  return s;
}

// Density over actions, for quadrature checks; inverts the squash.
inline double squashed_logprob(double action, double mean, double log_std,
                               double lo, double hi) {
  double u = 2.0 * (action - lo) / (hi - lo) - 1.0;
  u = std::min(1.0 - 1e-15, std::max(-1.0 + 1e-15, u));
  double z = std::atanh(u);
  return squashed_logprob_from_z(z, mean, log_std, lo, hi);
}

// Tape node for the log-prob of a stored sample z under the current mean /
// log_std nodes. The squash change-of-variables terms are constants in z.
inline int squashed_logprob_node(ad::Tape& tape, int mean_node, int log_std_node,
                                 double z, double lo, double hi) {
  int ls = tape.clip(log_std_node, kLogStdMin, kLogStdMax);
  int zc = tape.scalar(z);
  int zn = tape.mul(tape.sub(zc, mean_node), tape.exp_(tape.neg(ls)));
  int quad = tape.scale(tape.square(zn), -0.5);
  double constant = -0.5 * std::log(2.0 * std::numbers::pi) -
                    std::log((hi - lo) * 0.5) - log1m_tanh_sq(z);
  return tape.add_const(tape.sub(quad, ls), constant);
}

// --- allocation heads --------------------------------------------------------

enum class AllocationMode { Enumeration, Sequential };

struct AllocationSample {
  Allocation alloc;
  double log_prob = 0.0;
  int support_index = -1;  // enumeration mode only
};

// Enumeration mode: the scorer maps (global encoding, candidate bits) to one
// logit per feasible option; the distribution is the softmax over them.
inline std::vector<double> enum_option_logits(const Mlp& scorer, const ad::Vec& genc,
                                              const std::vector<Allocation>& support) {
  if (support.empty()) throw ContractViolation("enumeration head: empty option list");
  std::vector<double> logits(support.size());
  ad::Vec x(genc.size() + support.front().bits.size());
  x.head(genc.size()) = genc;
  for (size_t i = 0; i < support.size(); ++i) {
    for (size_t m = 0; m < support[i].bits.size(); ++m)
      x[genc.size() + m] = support[i].bits[m];
    logits[i] = scorer.forward(x)[0];
  }
  return logits;
}

inline std::vector<double> softmax(const std::vector<double>& logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) z += p[i] = std::exp(logits[i] - m);
  for (auto& v : p) v /= z;
  return p;
}

inline int sample_categorical(const std::vector<double>& probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

// Tape: vector of option logits for the current parameters.
inline int enum_logits_node(ad::Tape& tape, Mlp& scorer, const ad::Vec& genc,
                            const std::vector<Allocation>& support) {
  std::vector<int> scalars(support.size());
  for (size_t i = 0; i < support.size(); ++i) {
    ad::Vec x(genc.size() + support[i].bits.size());
    x.head(genc.size()) = genc;
    for (size_t m = 0; m < support[i].bits.size(); ++m)
      x[genc.size() + m] = support[i].bits[m];
    scalars[i] = scorer.forward(tape, tape.input(x));
  }
  return tape.stack(scalars);
}

// --- sequential (Plackett-Luce) head -----------------------------------------
//
// The net maps (global encoding, picked mask) to M+1 logits: one per EB plus a
// trailing STOP token. Picks are drawn without replacement from the layover
// EBs until STOP, no candidates remain, or N picks are made. The reported
// log-prob marginalizes over pick orders with a subset DP, so it is the exact
// likelihood of the resulting allocation.

namespace detail {

inline ad::Vec seq_input(const ad::Vec& genc, const std::vector<uint8_t>& picked) {
  ad::Vec x(genc.size() + picked.size());
  x.head(genc.size()) = genc;
  for (size_t m = 0; m < picked.size(); ++m) x[genc.size() + m] = picked[m];
  return x;
}

// Masked step distribution over candidate EBs plus STOP (index M).
inline std::vector<double> seq_step_probs(const Mlp& net, const ad::Vec& genc,
                                          const std::vector<uint8_t>& lay_mask,
                                          const std::vector<uint8_t>& picked) {
  ad::Vec logits = net.forward(seq_input(genc, picked));
  int m_count = static_cast<int>(lay_mask.size());
  std::vector<double> masked;
  std::vector<int> idx;
  for (int m = 0; m < m_count; ++m) {
    if (lay_mask[m] && !picked[m]) {
      masked.push_back(logits[m]);
      idx.push_back(m);
    }
  }
  masked.push_back(logits[m_count]);  // STOP
  idx.push_back(m_count);
  std::vector<double> p = softmax(masked);
  std::vector<double> full(m_count + 1, 0.0);
  for (size_t i = 0; i < idx.size(); ++i) full[idx[i]] = p[i];
  return full;
}

}  // namespace detail

// Exact allocation likelihood: DP over subsets U of the picked set S, where
// f(U) sums the pick-order probabilities of reaching U.
inline double seq_marginal_logprob(const Mlp& net, const ad::Vec& genc,
                                   const std::vector<uint8_t>& lay_mask,
                                   int charger_count, const Allocation& alloc) {
  int m_count = static_cast<int>(lay_mask.size());
  std::vector<int> picked_list;
  for (int m = 0; m < m_count; ++m) {
    if (alloc.bits[m]) {
      if (!lay_mask[m]) throw ContractViolation("seq head: allocation outside layover set");
      picked_list.push_back(m);
    }
  }
  int k = static_cast<int>(picked_list.size());
  if (k > charger_count) throw ContractViolation("seq head: allocation exceeds N");

  int lay_total = 0;
  for (auto b : lay_mask) lay_total += b;

  std::vector<double> f(1u << k, 0.0);
  f[0] = 1.0;
  std::vector<double> full_prob(1u << k, 0.0);
  for (uint32_t u = 0; u < (1u << k); ++u) {
    if (f[u] == 0.0 && u != 0) continue;
    std::vector<uint8_t> picked(m_count, 0);
    int picked_count = 0;
    for (int i = 0; i < k; ++i)
      if (u & (1u << i)) {
        picked[picked_list[i]] = 1;
        ++picked_count;
      }
    if (picked_count == k) {
      // termination factor: forced when N picks made or no candidates left
      if (k == charger_count || picked_count == lay_total) {
        full_prob[u] = f[u];
      } else {
        auto p = detail::seq_step_probs(net, genc, lay_mask, picked);
        full_prob[u] = f[u] * p[m_count];
      }
      continue;
    }
    auto p = detail::seq_step_probs(net, genc, lay_mask, picked);
    for (int i = 0; i < k; ++i) {
      if (u & (1u << i)) continue;
      f[u | (1u << i)] += f[u] * p[picked_list[i]];
    }
  }
  double prob = full_prob[(1u << k) - 1];
  return std::log(std::max(prob, 1e-300));
}

inline AllocationSample seq_sample(const Mlp& net, const ad::Vec& genc,
                                   const std::vector<uint8_t>& lay_mask,
                                   int charger_count, Rng& rng) {
  int m_count = static_cast<int>(lay_mask.size());
  std::vector<uint8_t> picked(m_count, 0);
  int picks = 0;
  int candidates = 0;
  for (auto b : lay_mask) candidates += b;
  while (picks < charger_count && candidates > 0) {
    auto p = detail::seq_step_probs(net, genc, lay_mask, picked);
    std::vector<double> probs;
    std::vector<int> idx;
    for (int m = 0; m <= m_count; ++m) {
      if (p[m] > 0.0 || m == m_count) {
        probs.push_back(p[m]);
        idx.push_back(m);
      }
    }
    int pick = idx[sample_categorical(probs, rng)];
    if (pick == m_count) break;  // STOP
    picked[pick] = 1;
    ++picks;
    --candidates;
  }
  AllocationSample s;
  s.alloc.bits = picked;
  s.log_prob = seq_marginal_logprob(net, genc, lay_mask, charger_count, s.alloc);
  return s;
}

// Tape version of the subset-DP marginal likelihood.
inline int seq_marginal_logprob_node(ad::Tape& tape, Mlp& net, const ad::Vec& genc,
                                     const std::vector<uint8_t>& lay_mask,
                                     int charger_count, const Allocation& alloc) {
  int m_count = static_cast<int>(lay_mask.size());
  std::vector<int> picked_list;
  for (int m = 0; m < m_count; ++m)
    if (alloc.bits[m]) picked_list.push_back(m);
  int k = static_cast<int>(picked_list.size());
  int lay_total = 0;
  for (auto b : lay_mask) lay_total += b;

  // step log-softmax node over the masked candidate list for a picked subset
  auto step_logprobs = [&](const std::vector<uint8_t>& picked,
                           std::vector<int>& idx_out) {
    int logits = net.forward(tape, tape.input(detail::seq_input(genc, picked)));
    std::vector<int> scalars;
    idx_out.clear();
    for (int m = 0; m < m_count; ++m) {
      if (lay_mask[m] && !picked[m]) {
        scalars.push_back(tape.pick(logits, m));
        idx_out.push_back(m);
      }
    }
    scalars.push_back(tape.pick(logits, m_count));
    idx_out.push_back(m_count);
    return tape.log_softmax(tape.stack(scalars));
  };

  std::vector<int> f_node(1u << k, -1);
  f_node[0] = tape.scalar(1.0);
  int total = -1;
  for (uint32_t u = 0; u < (1u << k); ++u) {
    if (f_node[u] < 0) continue;
    std::vector<uint8_t> picked(m_count, 0);
    int picked_count = 0;
    for (int i = 0; i < k; ++i)
      if (u & (1u << i)) {
        picked[picked_list[i]] = 1;
        ++picked_count;
      }
    if (picked_count == k) {
      int term;
      if (k == charger_count || picked_count == lay_total) {
        term = f_node[u];
      } else {
        std::vector<int> idx;
        int lsm = step_logprobs(picked, idx);
        int stop_lp = tape.pick(lsm, static_cast<int>(idx.size()) - 1);
        term = tape.mul(f_node[u], tape.exp_(stop_lp));
      }
      total = total < 0 ? term : tape.add(total, term);
      continue;
    }
    std::vector<int> idx;
    int lsm = step_logprobs(picked, idx);
    for (int i = 0; i < k; ++i) {
      if (u & (1u << i)) continue;
      int pos = -1;
      for (size_t q = 0; q < idx.size(); ++q)
        if (idx[q] == picked_list[i]) pos = static_cast<int>(q);
      int contrib = tape.mul(f_node[u], tape.exp_(tape.pick(lsm, pos)));
      uint32_t nu = u | (1u << i);
      f_node[nu] = f_node[nu] < 0 ? contrib : tape.add(f_node[nu], contrib);
    }
  }
  return tape.log_(total);
}

}  // namespace ebcsl
