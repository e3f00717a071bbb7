#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ebcsl::ad {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense layer parameters with gradient accumulators.
struct Linear {
  Mat w;
  Vec b;
  Mat gw;
  Vec gb;

  Linear() = default;
  Linear(int out, int in) : w(Mat::Zero(out, in)), b(Vec::Zero(out)) { zero_grad(); }

  void zero_grad() {
    gw = Mat::Zero(w.rows(), w.cols());
    gb = Vec::Zero(b.size());
  }
};

// Free-standing learned vector parameter (e.g. a state-independent log-std).
struct ParamVec {
  Vec v;
  Vec g;

  ParamVec() = default;
  explicit ParamVec(int n) : v(Vec::Zero(n)), g(Vec::Zero(n)) {}
  void zero_grad() { g = Vec::Zero(v.size()); }
};

// Eager tape of vector-valued nodes. Values are computed on construction;
// backward() accumulates parameter gradients in reverse order. Supported
// primitives: affine, tanh, sigmoid, exp, log, clip/min/max (subgradient),
// elementwise arithmetic with scalar broadcast, reductions, stack/pick and
// log_softmax. Anything else must be composed from these.
class Tape {
 public:
  int input(const Vec& v) { return push(Op::Input, v); }

  int scalar(double c) { return push(Op::Input, Vec::Constant(1, c)); }

  int param(ParamVec& p) {
    int id = push(Op::Param, p.v);
    nodes_[id].pvec = &p;
    return id;
  }

  int affine(Linear& l, int x) {
    if (l.w.cols() != nodes_[x].val.size())
      throw std::invalid_argument("affine: input dimension mismatch");
    int id = push(Op::Affine, l.w * nodes_[x].val + l.b, x);
    nodes_[id].lin = &l;
    return id;
  }

  int tanh_(int x) { return push(Op::Tanh, nodes_[x].val.array().tanh(), x); }

  int sigmoid_(int x) {
    return push(Op::Sigmoid, (1.0 / (1.0 + (-nodes_[x].val.array()).exp())), x);
  }

  int exp_(int x) { return push(Op::Exp, nodes_[x].val.array().exp(), x); }

  int log_(int x) { return push(Op::Log, nodes_[x].val.array().log(), x); }

  int neg(int x) { return push(Op::Scale, -nodes_[x].val, x, -1.0); }

  int scale(int x, double c) { return push(Op::Scale, c * nodes_[x].val, x, c); }

  int add_const(int x, double c) {
    return push(Op::AddConst, nodes_[x].val.array() + c, x, c);
  }

  int add(int a, int b) { return binary(Op::Add, a, b); }
  int sub(int a, int b) { return binary(Op::Sub, a, b); }
  int mul(int a, int b) { return binary(Op::Mul, a, b); }

  int min_(int a, int b) { return binary(Op::Min, a, b); }
  int max_(int a, int b) { return binary(Op::Max, a, b); }

  // Subgradient 1 inside [lo, hi] (inclusive), 0 outside.
  int clip(int x, double lo, double hi) {
    int id = push(Op::Clip, nodes_[x].val.array().min(hi).max(lo), x);
    nodes_[id].c0 = lo;
    nodes_[id].c1 = hi;
    return id;
  }

  int sum(int x) { return push(Op::Sum, Vec::Constant(1, nodes_[x].val.sum()), x); }

  int mean(int x) {
    return push(Op::Mean, Vec::Constant(1, nodes_[x].val.mean()), x);
  }

  int square(int x) { return mul(x, x); }

  // Gathers length-1 nodes into one vector node.
  int stack(const std::vector<int>& scalars) {
    Vec v(scalars.size());
    for (size_t i = 0; i < scalars.size(); ++i) {
      if (nodes_[scalars[i]].val.size() != 1)
        throw std::invalid_argument("stack: inputs must be scalars");
      v[i] = nodes_[scalars[i]].val[0];
    }
    int id = push(Op::Stack, v);
    nodes_[id].inputs = scalars;
    return id;
  }

  int pick(int x, int index) {
    int id = push(Op::Pick, Vec::Constant(1, nodes_[x].val[index]), x);
    nodes_[id].c0 = index;
    return id;
  }

  int log_softmax(int logits) {
    const Vec& z = nodes_[logits].val;
    double m = z.maxCoeff();
    double lse = m + std::log((z.array() - m).exp().sum());
    return push(Op::LogSoftmax, z.array() - lse, logits);
  }

  const Vec& value(int id) const { return nodes_[id].val; }
  double scalar_value(int id) const { return nodes_[id].val[0]; }

  // Reverse pass from a scalar loss; gradients accumulate into the Linear /
  // ParamVec blocks referenced by the graph.
  void backward(int loss) {
    if (nodes_[loss].val.size() != 1)
      throw std::invalid_argument("backward: loss must be scalar");
    for (auto& n : nodes_) n.grad = Vec::Zero(n.val.size());
    nodes_[loss].grad[0] = 1.0;
    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.grad.isZero(0.0)) continue;
      switch (n.op) {
        case Op::Input:
          break;
        case Op::Param:
          n.pvec->g += n.grad;
          break;
        case Op::Affine: {
          const Vec& x = nodes_[n.a].val;
          n.lin->gw.noalias() += n.grad * x.transpose();
          n.lin->gb += n.grad;
          nodes_[n.a].grad.noalias() += n.lin->w.transpose() * n.grad;
          break;
        }
        case Op::Tanh:
          nodes_[n.a].grad.array() += n.grad.array() * (1.0 - n.val.array().square());
          break;
        case Op::Sigmoid:
          nodes_[n.a].grad.array() +=
              n.grad.array() * n.val.array() * (1.0 - n.val.array());
          break;
        case Op::Exp:
          nodes_[n.a].grad.array() += n.grad.array() * n.val.array();
          break;
        case Op::Log:
          nodes_[n.a].grad.array() += n.grad.array() / nodes_[n.a].val.array();
          break;
        case Op::Scale:
          nodes_[n.a].grad += n.c0 * n.grad;
          break;
        case Op::AddConst:
          nodes_[n.a].grad += n.grad;
          break;
        case Op::Add:
          accumulate(n.a, n.grad);
          accumulate(n.b, n.grad);
          break;
        case Op::Sub:
          accumulate(n.a, n.grad);
          accumulate(n.b, -n.grad);
          break;
        case Op::Mul: {
          const Vec& av = nodes_[n.a].val;
          const Vec& bv = nodes_[n.b].val;
          accumulate(n.a, broadcast_mul(n.grad, bv));
          accumulate(n.b, broadcast_mul(n.grad, av));
          break;
        }
        case Op::Min:
        case Op::Max: {
          const Vec& av = broadcast_to(nodes_[n.a].val, n.val.size());
          const Vec& bv = broadcast_to(nodes_[n.b].val, n.val.size());
          Vec ga = Vec::Zero(n.val.size());
          Vec gb = Vec::Zero(n.val.size());
          for (int i = 0; i < n.val.size(); ++i) {
            bool pick_a = n.op == Op::Min ? av[i] <= bv[i] : av[i] >= bv[i];
            (pick_a ? ga : gb)[i] = n.grad[i];
          }
          accumulate(n.a, ga);
          accumulate(n.b, gb);
          break;
        }
        case Op::Clip: {
          const Vec& x = nodes_[n.a].val;
          for (int i = 0; i < x.size(); ++i)
            if (x[i] >= n.c0 && x[i] <= n.c1) nodes_[n.a].grad[i] += n.grad[i];
          break;
        }
        case Op::Sum:
          nodes_[n.a].grad.array() += n.grad[0];
          break;
        case Op::Mean:
          nodes_[n.a].grad.array() += n.grad[0] / nodes_[n.a].val.size();
          break;
        case Op::Stack:
          for (size_t i = 0; i < n.inputs.size(); ++i)
            nodes_[n.inputs[i]].grad[0] += n.grad[i];
          break;
        case Op::Pick:
          nodes_[n.a].grad[static_cast<int>(n.c0)] += n.grad[0];
          break;
        case Op::LogSoftmax: {
          double gsum = n.grad.sum();
          nodes_[n.a].grad.array() += n.grad.array() - n.val.array().exp() * gsum;
          break;
        }
        default:
          throw std::logic_error("backward: unsupported primitive in graph");
      }
    }
  }

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(size_t n) { nodes_.reserve(n); }

 private:
  enum class Op {
    Input, Param, Affine, Tanh, Sigmoid, Exp, Log, Scale, AddConst,
    Add, Sub, Mul, Min, Max, Clip, Sum, Mean, Stack, Pick, LogSoftmax
  };

  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double c0 = 0.0;
    double c1 = 0.0;
    Vec val;
    Vec grad;
    Linear* lin = nullptr;
    ParamVec* pvec = nullptr;
    std::vector<int> inputs;
  };

  int push(Op op, Vec v, int a = -1, double c0 = 0.0) {
    Node n;
    n.op = op;
    n.a = a;
    n.c0 = c0;
    n.val = std::move(v);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Elementwise with scalar broadcast on either side.
  int binary(Op op, int a, int b) {
    const Vec& av = nodes_[a].val;
    const Vec& bv = nodes_[b].val;
    if (av.size() != bv.size() && av.size() != 1 && bv.size() != 1)
      throw std::invalid_argument("binary op: shape mismatch");
    int n = static_cast<int>(std::max(av.size(), bv.size()));
    Vec va = broadcast_to(av, n);
    Vec vb = broadcast_to(bv, n);
    Vec out(n);
    switch (op) {
      case Op::Add: out = va + vb; break;
      case Op::Sub: out = va - vb; break;
      case Op::Mul: out = va.cwiseProduct(vb); break;
      case Op::Min: out = va.cwiseMin(vb); break;
      case Op::Max: out = va.cwiseMax(vb); break;
      default: throw std::logic_error("binary: bad op");
    }
    int id = push(op, std::move(out), a);
    nodes_[id].b = b;
    return id;
  }

  static Vec broadcast_to(const Vec& v, Eigen::Index n) {
    if (v.size() == n) return v;
    return Vec::Constant(n, v[0]);
  }

  static Vec broadcast_mul(const Vec& g, const Vec& other) {
    if (other.size() == g.size() || other.size() == 1)
      return g.array() * broadcast_to(other, g.size()).array();
    return g;
  }

  // Sum-reduce when the upstream grad is wider than the node (broadcast).
  void accumulate(int id, const Vec& g) {
    Vec& dst = nodes_[id].grad;
    if (dst.size() == g.size()) {
      dst += g;
    } else {
      dst[0] += g.sum();
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace ebcsl::ad
