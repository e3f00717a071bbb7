#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "ebcsl/autodiff.hpp"
#include "ebcsl/errors.hpp"
#include "ebcsl/rng.hpp"

namespace ebcsl {

namespace detail {

// Orthogonal init: QR of a gaussian matrix, columns sign-fixed by diag(R).
inline ad::Mat orthogonal(int rows, int cols, double gain, Rng& rng) {
  int r = std::max(rows, cols);
  int c = std::min(rows, cols);
  ad::Mat a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<ad::Mat> qr(a);
  ad::Mat q = qr.householderQ() * ad::Mat::Identity(r, c);
  ad::Mat rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j)
    if (rmat(j, j) < 0) q.col(j) *= -1.0;
  ad::Mat out = rows >= cols ? q : ad::Mat(q.transpose());
  return gain * out;
}

}  // namespace detail

// Feed-forward net: tanh hidden activations, linear output.
struct Mlp {
  std::vector<int> layer_sizes;  // [in, hidden..., out]
  std::vector<ad::Linear> layers;

  static Mlp make(const std::vector<int>& sizes, Rng& rng, double out_gain = 0.01) {
    if (sizes.size() < 2) throw ConfigError("mlp: need at least input and output sizes");
    Mlp net;
    net.layer_sizes = sizes;
    for (size_t i = 0; i + 1 < sizes.size(); ++i) {
      ad::Linear l(sizes[i + 1], sizes[i]);
      bool last = i + 2 == sizes.size();
      l.w = detail::orthogonal(sizes[i + 1], sizes[i], last ? out_gain : 1.0, rng);
      l.b.setZero();
      net.layers.push_back(std::move(l));
    }
    return net;
  }

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }

  ad::Vec forward(const ad::Vec& x) const {
    if (x.size() != input_dim()) throw ContractViolation("mlp forward: input dim mismatch");
    ad::Vec h = x;
    for (size_t i = 0; i < layers.size(); ++i) {
      h = layers[i].w * h + layers[i].b;
      if (i + 1 < layers.size()) h = h.array().tanh();
    }
    return h;
  }

  int forward(ad::Tape& tape, int x) {
    int h = x;
    for (size_t i = 0; i < layers.size(); ++i) {
      h = tape.affine(layers[i], h);
      if (i + 1 < layers.size()) h = tape.tanh_(h);
    }
    return h;
  }

  void zero_grad() {
    for (auto& l : layers) l.zero_grad();
  }

  int num_params() const {
    int n = 0;
    for (const auto& l : layers)
      n += static_cast<int>(l.w.size() + l.b.size());
    return n;
  }

  ad::Vec params_flat() const {
    ad::Vec out(num_params());
    int i = 0;
    for (const auto& l : layers) {
      for (int c = 0; c < l.w.cols(); ++c)
        for (int r = 0; r < l.w.rows(); ++r) out[i++] = l.w(r, c);
      for (int r = 0; r < l.b.size(); ++r) out[i++] = l.b[r];
    }
    return out;
  }

  ad::Vec grads_flat() const {
    ad::Vec out(num_params());
    int i = 0;
    for (const auto& l : layers) {
      for (int c = 0; c < l.gw.cols(); ++c)
        for (int r = 0; r < l.gw.rows(); ++r) out[i++] = l.gw(r, c);
      for (int r = 0; r < l.gb.size(); ++r) out[i++] = l.gb[r];
    }
    return out;
  }

  void set_params_flat(const ad::Vec& p) {
    int i = 0;
    for (auto& l : layers) {
      for (int c = 0; c < l.w.cols(); ++c)
        for (int r = 0; r < l.w.rows(); ++r) l.w(r, c) = p[i++];
      for (int r = 0; r < l.b.size(); ++r) l.b[r] = p[i++];
    }
  }
};

// --- checkpoint io ----------------------------------------------------------
//
// Layout: u32 magic "EBCK", u32 schema version, u32 layer count, u32 sizes...,
// then the parameter payload as little-endian IEEE-754 doubles in the
// params_flat order. Round-trips bit-exactly.

constexpr uint32_t kCheckpointMagic = 0x4542434Bu;  // "EBCK"
constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw ParseError("checkpoint: truncated header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

inline void write_f64(std::ostream& os, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double read_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw ParseError("checkpoint: truncated payload");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace detail

inline void save_mlp(std::ostream& os, const Mlp& net) {
  detail::write_u32(os, kCheckpointMagic);
  detail::write_u32(os, kCheckpointVersion);
  detail::write_u32(os, static_cast<uint32_t>(net.layer_sizes.size()));
  for (int s : net.layer_sizes) detail::write_u32(os, static_cast<uint32_t>(s));
  ad::Vec p = net.params_flat();
  for (int i = 0; i < p.size(); ++i) detail::write_f64(os, p[i]);
}

inline Mlp load_mlp(std::istream& is) {
  if (detail::read_u32(is) != kCheckpointMagic)
    throw ParseError("checkpoint: bad magic");
  if (detail::read_u32(is) != kCheckpointVersion)
    throw ParseError("checkpoint: unsupported schema version");
  uint32_t n = detail::read_u32(is);
  if (n < 2 || n > 64) throw ParseError("checkpoint: bad layer count");
  std::vector<int> sizes(n);
  for (auto& s : sizes) s = static_cast<int>(detail::read_u32(is));
  Mlp net;
  net.layer_sizes = sizes;
  for (size_t i = 0; i + 1 < sizes.size(); ++i)
    net.layers.emplace_back(sizes[i + 1], sizes[i]);
  ad::Vec p(net.num_params());
  for (int i = 0; i < p.size(); ++i) p[i] = detail::read_f64(is);
  net.set_params_flat(p);
  return net;
}

inline void save_mlp(const std::string& path, const Mlp& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open checkpoint for writing: " + path);
  save_mlp(os, net);
}

inline Mlp load_mlp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path);
  return load_mlp(is);
}

}  // namespace ebcsl
