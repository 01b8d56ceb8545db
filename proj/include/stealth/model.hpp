#pragma once

#include <map>
#include <string>
#include <vector>

#include "stealth/common.hpp"

namespace stealth {

enum class Activation { ReLU, Sigmoid, Softmax, Identity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  int in_dim = 0;
  int out_dim = 0;
  Mat weights;  // out_dim x in_dim
  Vec biases;   // out_dim
  Activation activation = Activation::Identity;
};

/// Coordinate-wise closed interval defining the admissible input set.
struct Box {
  Vec lower;
  Vec upper;
};

struct Network {
  int input_dim = 0;
  Box input_box;
  std::vector<DenseLayer> layers;
  std::map<std::string, std::string> metadata;

  int output_dim() const { return layers.empty() ? 0 : layers.back().out_dim; }
  /// Throws ShapeError/DomainError on any type-invariant violation.
  void validate() const;
};

/// Cut index partitioning the network into representation map and decision
/// head. The latent is the post-activation output of layers[cut]; the head is
/// layers cut+1..end with one tracked scalar output.
struct LatentSplit {
  int cut = 0;
  int latent_dim = 0;
  int head_output_index = 0;

  void validate(const Network& net) const;
};

struct ForwardTrace {
  std::vector<Vec> post;  // post-activation output of every layer
  Vec final_preact;       // pre-activation of the last layer

  const Vec& output() const { return post.back(); }
};

bool inside_box(const Box& box, const Vec& u);

/// Evaluates the network on u. Inputs outside the box are accepted (the CLI
/// warns); dimension mismatch throws ShapeError.
ForwardTrace forward(const Network& net, const Vec& u);

/// Latent representation: forward(net, u).post[split.cut].
Vec latent(const Network& net, const LatentSplit& split, const Vec& u);

/// Monitored head coordinate of an already-computed forward pass. Read
/// pre-softmax when the final activation is softmax, post-activation
/// otherwise.
double head_logit(const Network& net, const LatentSplit& split,
                  const ForwardTrace& trace);

/// Evaluates layers cut+1..end on a latent vector and returns the monitored
/// scalar (same pre-softmax convention as head_logit).
double head_output(const Network& net, const LatentSplit& split, const Vec& z);

/// Full pre-softmax output vector of the head evaluated on a latent vector
/// (final pre-activation when softmax, final post-activation otherwise).
Vec head_vector(const Network& net, const LatentSplit& split, const Vec& z);

/// Gradient of <v, latent(u)> with respect to u. ReLU subgradient at exactly
/// 0 is 0.
Vec latent_vjp(const Network& net, const LatentSplit& split, const Vec& u,
               const Vec& v);

}  // namespace stealth
