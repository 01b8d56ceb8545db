#include "stealth/model.hpp"

#include <algorithm>
#include <cmath>

namespace stealth {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
    case Activation::Identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::ReLU;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "softmax") return Activation::Softmax;
  if (s == "identity") return Activation::Identity;
  throw ParseError("unknown activation: " + s);
}

void Network::validate() const {
  if (input_dim <= 0) throw ShapeError("input_dim must be positive");
  if (layers.empty()) throw ShapeError("network has no layers");
  if (input_box.lower.size() != input_dim || input_box.upper.size() != input_dim)
    throw ShapeError("input_box size does not match input_dim");
  for (int i = 0; i < input_dim; ++i) {
    if (!std::isfinite(input_box.lower[i]) || !std::isfinite(input_box.upper[i]))
      throw DomainError("input_box bound is not finite");
    if (input_box.lower[i] > input_box.upper[i])
      throw DomainError("input_box lower exceeds upper at coordinate " +
                        std::to_string(i));
  }
  int prev = input_dim;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const DenseLayer& L = layers[k];
    if (L.in_dim <= 0 || L.out_dim <= 0)
      throw ShapeError("layer " + std::to_string(k) + " has nonpositive dims");
    if (L.in_dim != prev)
      throw ShapeError("layer " + std::to_string(k) + " expects in_dim " +
                       std::to_string(prev) + ", declares " +
                       std::to_string(L.in_dim));
    if (L.weights.rows() != L.out_dim || L.weights.cols() != L.in_dim)
      throw ShapeError("layer " + std::to_string(k) + " weight matrix shape mismatch");
    if (L.biases.size() != L.out_dim)
      throw ShapeError("layer " + std::to_string(k) + " bias vector shape mismatch");
    if (!L.weights.allFinite() || !L.biases.allFinite())
      throw DomainError("layer " + std::to_string(k) + " contains a non-finite value");
    if (L.activation == Activation::Softmax && k + 1 != layers.size())
      throw ShapeError("softmax permitted only as the final layer's activation");
    prev = L.out_dim;
  }
}

void LatentSplit::validate(const Network& net) const {
  const int L = static_cast<int>(net.layers.size());
  if (cut < 0 || cut >= L) throw ShapeError("split cut out of range");
  if (latent_dim != net.layers[cut].out_dim)
    throw ShapeError("latent_dim does not match layers[cut].out_dim");
  if (head_output_index < 0 || head_output_index >= net.layers.back().out_dim)
    throw ShapeError("head_output_index out of range");
}

bool inside_box(const Box& box, const Vec& u) {
  for (int i = 0; i < u.size(); ++i)
    if (u[i] < box.lower[i] || u[i] > box.upper[i]) return false;
  return true;
}

namespace {

// Sequential row-wise accumulation. Summation order is part of the planted
// network bit-exactness contract: widening a layer appends terms at the end
// of each row without touching the existing partial sums.
Vec affine(const DenseLayer& L, const Vec& z) {
  Vec s(L.out_dim);
  const double* W = L.weights.data();
  for (int i = 0; i < L.out_dim; ++i) {
    double acc = L.biases[i];
    const double* row = W + static_cast<std::ptrdiff_t>(i) * L.in_dim;
    for (int j = 0; j < L.in_dim; ++j) acc += row[j] * z[j];
    s[i] = acc;
  }
  return s;
}

Vec activate(Activation a, const Vec& s) {
  switch (a) {
    case Activation::Identity:
      return s;
    case Activation::ReLU: {
      Vec r(s.size());
      for (int i = 0; i < s.size(); ++i) r[i] = s[i] > 0.0 ? s[i] : 0.0;
      return r;
    }
    case Activation::Sigmoid: {
      Vec r(s.size());
      for (int i = 0; i < s.size(); ++i) r[i] = 1.0 / (1.0 + std::exp(-s[i]));
      return r;
    }
    case Activation::Softmax: {
      // max-subtraction for stability
      const double m = s.maxCoeff();
      Vec e(s.size());
      double sum = 0.0;
      for (int i = 0; i < s.size(); ++i) {
        e[i] = std::exp(s[i] - m);
        sum += e[i];
      }
      return e / sum;
    }
  }
  return s;
}

// d(activation)/d(pre-activation) applied to a cotangent. ReLU derivative at
// exactly 0 is 0.
Vec activation_vjp(Activation a, const Vec& preact, const Vec& post,
                   const Vec& cot) {
  switch (a) {
    case Activation::Identity:
      return cot;
    case Activation::ReLU: {
      Vec r(cot.size());
      for (int i = 0; i < cot.size(); ++i) r[i] = preact[i] > 0.0 ? cot[i] : 0.0;
      return r;
    }
    case Activation::Sigmoid: {
      Vec r(cot.size());
      for (int i = 0; i < cot.size(); ++i) r[i] = post[i] * (1.0 - post[i]) * cot[i];
      return r;
    }
    case Activation::Softmax: {
      // J = diag(p) - p p^T is symmetric: J^T c = p .* c - (p . c) p
      const double pc = post.dot(cot);
      Vec r(cot.size());
      for (int i = 0; i < cot.size(); ++i) r[i] = post[i] * (cot[i] - pc);
      return r;
    }
  }
  return cot;
}

}  // namespace

ForwardTrace forward(const Network& net, const Vec& u) {
  if (u.size() != net.input_dim)
    throw ShapeError("forward: input length " + std::to_string(u.size()) +
                     " != input_dim " + std::to_string(net.input_dim));
  ForwardTrace trace;
  trace.post.reserve(net.layers.size());
  Vec z = u;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    Vec s = affine(net.layers[k], z);
    if (k + 1 == net.layers.size()) trace.final_preact = s;
    z = activate(net.layers[k].activation, s);
    trace.post.push_back(z);
  }
  return trace;
}

Vec latent(const Network& net, const LatentSplit& split, const Vec& u) {
  split.validate(net);
  if (u.size() != net.input_dim) throw ShapeError("latent: input dim mismatch");
  Vec z = u;
  for (int k = 0; k <= split.cut; ++k)
    z = activate(net.layers[k].activation, affine(net.layers[k], z));
  return z;
}

double head_logit(const Network& net, const LatentSplit& split,
                  const ForwardTrace& trace) {
  const bool softmax_final = net.layers.back().activation == Activation::Softmax;
  const Vec& out = softmax_final ? trace.final_preact : trace.post.back();
  return out[split.head_output_index];
}

Vec head_vector(const Network& net, const LatentSplit& split, const Vec& z) {
  split.validate(net);
  if (z.size() != split.latent_dim)
    throw ShapeError("head: latent dim mismatch");
  const int L = static_cast<int>(net.layers.size());
  Vec v = z;
  Vec preact;
  for (int k = split.cut + 1; k < L; ++k) {
    preact = affine(net.layers[k], v);
    v = activate(net.layers[k].activation, preact);
  }
  if (split.cut + 1 >= L) {
    // degenerate cut at the final layer: the latent already is the output
    return z;
  }
  return net.layers.back().activation == Activation::Softmax ? preact : v;
}

double head_output(const Network& net, const LatentSplit& split, const Vec& z) {
  return head_vector(net, split, z)[split.head_output_index];
}

Vec latent_vjp(const Network& net, const LatentSplit& split, const Vec& u,
               const Vec& v) {
  split.validate(net);
  if (u.size() != net.input_dim) throw ShapeError("vjp: input dim mismatch");
  if (v.size() != split.latent_dim) throw ShapeError("vjp: cotangent dim mismatch");

  // forward through the representation map, keeping pre/post activations
  std::vector<Vec> preacts, posts;
  preacts.reserve(split.cut + 1);
  posts.reserve(split.cut + 1);
  Vec z = u;
  for (int k = 0; k <= split.cut; ++k) {
    Vec s = affine(net.layers[k], z);
    z = activate(net.layers[k].activation, s);
    preacts.push_back(std::move(s));
    posts.push_back(z);
  }

  Vec cot = v;
  for (int k = split.cut; k >= 0; --k) {
    const DenseLayer& L = net.layers[k];
    Vec dpre = activation_vjp(L.activation, preacts[k], posts[k], cot);
    // cot_prev = W^T dpre, accumulated column-wise in index order
    Vec prev = Vec::Zero(L.in_dim);
    const double* W = L.weights.data();
    for (int i = 0; i < L.out_dim; ++i) {
      const double* row = W + static_cast<std::ptrdiff_t>(i) * L.in_dim;
      const double d = dpre[i];
      if (d == 0.0) continue;
      for (int j = 0; j < L.in_dim; ++j) prev[j] += row[j] * d;
    }
    cot = std::move(prev);
  }
  return cot;
}

}  // namespace stealth
