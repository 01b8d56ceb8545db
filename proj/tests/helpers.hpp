#pragma once

#include <functional>
#include <vector>

#include "stealth/model.hpp"
#include "stealth/rng.hpp"

namespace stealth::test {

inline Vec random_vec(Rng& rng, int n, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.next_gaussian();
  return v;
}

inline DenseLayer random_layer(Rng& rng, int in, int out, Activation act,
                               double scale = 0.0) {
  if (scale == 0.0) scale = 1.0 / std::sqrt(static_cast<double>(in));
  DenseLayer L;
  L.in_dim = in;
  L.out_dim = out;
  L.activation = act;
  L.weights.resize(out, in);
  for (int i = 0; i < out; ++i)
    for (int j = 0; j < in; ++j) L.weights(i, j) = scale * rng.next_gaussian();
  L.biases = random_vec(rng, out, 0.1);
  return L;
}

inline Network random_network(std::uint64_t seed, const std::vector<int>& dims,
                              const std::vector<Activation>& acts,
                              double box_lo = -2.0, double box_hi = 2.0) {
  Rng rng(seed);
  Network net;
  net.input_dim = dims.front();
  net.input_box.lower = Vec::Constant(net.input_dim, box_lo);
  net.input_box.upper = Vec::Constant(net.input_dim, box_hi);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k)
    net.layers.push_back(random_layer(rng, dims[k], dims[k + 1], acts[k]));
  net.validate();
  return net;
}

// Deliberately naive second evaluator: plain std::vector arithmetic, no
// shared code with the library's forward pass.
inline std::vector<double> independent_forward(const Network& net,
                                               const std::vector<double>& u,
                                               bool stop_pre_softmax = false) {
  std::vector<double> z = u;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const DenseLayer& L = net.layers[k];
    std::vector<double> s(L.out_dim, 0.0);
    for (int i = 0; i < L.out_dim; ++i) {
      double acc = 0.0;
      for (int j = 0; j < L.in_dim; ++j) acc += L.weights(i, j) * z[j];
      s[i] = acc + L.biases[i];
    }
    switch (L.activation) {
      case Activation::ReLU:
        for (double& v : s) v = v > 0 ? v : 0;
        break;
      case Activation::Sigmoid:
        for (double& v : s) v = 1.0 / (1.0 + std::exp(-v));
        break;
      case Activation::Softmax: {
        if (stop_pre_softmax && k + 1 == net.layers.size()) return s;
        double m = s[0];
        for (double v : s) m = std::max(m, v);
        double sum = 0.0;
        for (double& v : s) {
          v = std::exp(v - m);
          sum += v;
        }
        for (double& v : s) v /= sum;
        break;
      }
      case Activation::Identity:
        break;
    }
    z = std::move(s);
  }
  return z;
}

// Central finite differences of a scalar function.
inline Vec central_difference(const std::function<double(const Vec&)>& f,
                              const Vec& u, double h = 1e-5) {
  Vec g(u.size());
  for (int i = 0; i < u.size(); ++i) {
    Vec up = u, dn = u;
    up[i] += h;
    dn[i] -= h;
    g[i] = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

// Generic point: every pre-activation in the representation map is bounded
// away from the ReLU kink.
inline bool preactivations_generic(const Network& net, int cut, const Vec& u,
                                   double margin = 1e-3) {
  Vec z = u;
  for (int k = 0; k <= cut; ++k) {
    const DenseLayer& L = net.layers[k];
    Vec s = L.weights * z + L.biases;
    if (L.activation == Activation::ReLU)
      for (int i = 0; i < s.size(); ++i)
        if (std::abs(s[i]) < margin) return false;
    switch (L.activation) {
      case Activation::ReLU:
        z = s.cwiseMax(0.0);
        break;
      case Activation::Sigmoid:
        z = (1.0 + (-s.array()).exp()).inverse().matrix();
        break;
      default:
        z = s;
        break;
    }
  }
  return true;
}

}  // namespace stealth::test
