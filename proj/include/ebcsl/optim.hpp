#pragma once

#include <cmath>
#include <vector>

#include "ebcsl/autodiff.hpp"
#include "ebcsl/nets.hpp"

namespace ebcsl {

// Single-tensor adaptive-moment update with bias correction.
inline void adam_update(ad::Vec& p, const ad::Vec& g, ad::Vec& m, ad::Vec& v,
                        long step, double lr, double beta1 = 0.9,
                        double beta2 = 0.999, double eps = 1e-8) {
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v.array() + (1.0 - beta2) * g.array().square();
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
}

// First-order optimizer over a fixed registry of parameter blocks. Gradient
// ascent is run as descent on the negated objective by the caller.
class Adam {
 public:
  Adam(std::vector<ad::Linear*> linears, std::vector<ad::ParamVec*> vecs, double lr)
      : linears_(std::move(linears)), vecs_(std::move(vecs)), lr_(lr) {
    for (auto* l : linears_) {
      m_.push_back(flatten(*l).setZero());
      v_.push_back(flatten(*l).setZero());
    }
    for (auto* p : vecs_) {
      m_.push_back(ad::Vec::Zero(p->v.size()));
      v_.push_back(ad::Vec::Zero(p->v.size()));
    }
  }

  double learning_rate() const { return lr_; }

  void zero_grad() {
    for (auto* l : linears_) l->zero_grad();
    for (auto* p : vecs_) p->zero_grad();
  }

  // Applies one step from the accumulated gradients. Returns false (and
  // leaves parameters untouched) when any gradient is non-finite.
  bool step() {
    for (auto* l : linears_)
      if (!l->gw.allFinite() || !l->gb.allFinite()) return ++rejected_, false;
    for (auto* p : vecs_)
      if (!p->g.allFinite()) return ++rejected_, false;

    ++step_count_;
    size_t slot = 0;
    for (auto* l : linears_) {
      ad::Vec p = flatten(*l);
      ad::Vec g = flatten_grad(*l);
      adam_update(p, g, m_[slot], v_[slot], step_count_, lr_);
      unflatten(*l, p);
      ++slot;
    }
    for (auto* pv : vecs_) {
      adam_update(pv->v, pv->g, m_[slot], v_[slot], step_count_, lr_);
      ++slot;
    }
    return true;
  }

  long steps_taken() const { return step_count_; }
  long rejected() const { return rejected_; }

 private:
  static ad::Vec flatten(const ad::Linear& l) {
    ad::Vec out(l.w.size() + l.b.size());
    out << Eigen::Map<const ad::Vec>(l.w.data(), l.w.size()), l.b;
    return out;
  }

  static ad::Vec flatten_grad(const ad::Linear& l) {
    ad::Vec out(l.gw.size() + l.gb.size());
    out << Eigen::Map<const ad::Vec>(l.gw.data(), l.gw.size()), l.gb;
    return out;
  }

  static void unflatten(ad::Linear& l, const ad::Vec& p) {
    Eigen::Map<ad::Mat>(l.w.data(), l.w.rows(), l.w.cols()) =
        Eigen::Map<const ad::Mat>(p.data(), l.w.rows(), l.w.cols());
    l.b = p.tail(l.b.size());
  }

  std::vector<ad::Linear*> linears_;
  std::vector<ad::ParamVec*> vecs_;
  double lr_;
  std::vector<ad::Vec> m_, v_;
  long step_count_ = 0;
  long rejected_ = 0;
};

}  // namespace ebcsl
