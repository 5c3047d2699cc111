#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "moral/embedstore.hpp"
#include "moral/matrix.hpp"
#include "moral/rng.hpp"
#include "moral/triples.hpp"

namespace moral {

// Trainable map from the frozen base space to the moral space: one hidden
// tanh layer with dropout on the hidden units.
struct ProjectionHead {
  Matrix w1;               // hidden x in
  std::vector<double> b1;  // hidden
  Matrix w2;               // out x hidden
  std::vector<double> b2;  // out
  double dropout_p = 0.1;

  std::size_t in_dim() const { return w1.cols(); }
  std::size_t hidden_dim() const { return w1.rows(); }
  std::size_t out_dim() const { return w2.rows(); }

  // Uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)] for weights and biases,
  // drawn in declaration order from the seed.
  static ProjectionHead init(std::size_t in, std::size_t hidden, std::size_t out,
                             double dropout_p, std::uint64_t seed);
};

// Per-hidden-unit keep indicators scaled by 1/(1-p); expectation of a
// masked activation equals the unmasked one.
struct DropoutMask {
  std::vector<double> scale;

  static DropoutMask sample(std::size_t n, double p, Rng& rng);
  static DropoutMask identity(std::size_t n);
};

// h = W2 (mask ⊙ tanh(W1 x + b1)) + b2; a null mask means evaluation mode.
std::vector<double> forward(const ProjectionHead& head, std::span<const double> x,
                            const DropoutMask* mask = nullptr);

enum class TrainMode : std::uint8_t { Supervised, Unsupervised };

struct TrainConfig {
  double temperature = 0.1;  // 0.05 is the unsupervised default at the CLI
  int batch_size = 32;
  int epochs = 2;
  double learning_rate = 1e-3;
  std::uint64_t seed = 42;
  TrainMode mode = TrainMode::Supervised;
  std::size_t hidden_dim = 256;
  std::size_t out_dim = 128;
  double dropout_p = 0.1;
};

// Mean InfoNCE loss over the batch and its exact gradients with respect to
// every input vector. sim is cosine; the softmax runs in log-sum-exp form.
struct SupLossResult {
  double loss = 0.0;
  Matrix grad_ref, grad_pos, grad_neg;
};
// l_i = -log e^{sim(h_i,h_i+)/tau} / sum_j (e^{sim(h_i,h_j+)/tau} + e^{sim(h_i,h_j-)/tau})
SupLossResult sup_loss(const Matrix& h_ref, const Matrix& h_pos, const Matrix& h_neg, double tau);

struct UnsupLossResult {
  double loss = 0.0;
  Matrix grad_z, grad_zp;
};
// l_i = -log e^{sim(h_i^z,h_i^z')/tau} / sum_j e^{sim(h_i^z,h_j^z')/tau}
UnsupLossResult unsup_loss(const Matrix& h_z, const Matrix& h_zp, double tau);

struct HeadGradients {
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;

  static HeadGradients zeros_like(const ProjectionHead& head);
};

// Batch loss plus gradients through the head, exactly as one training step
// computes them. Supervised runs the head in evaluation mode; unsupervised
// encodes each input twice under the two given masks.
std::pair<double, HeadGradients> sup_batch_gradients(const ProjectionHead& head,
                                                     const Matrix& x_ref, const Matrix& x_pos,
                                                     const Matrix& x_neg, double tau);
std::pair<double, HeadGradients> unsup_batch_gradients(const ProjectionHead& head,
                                                       const Matrix& x,
                                                       const std::vector<DropoutMask>& mask_z,
                                                       const std::vector<DropoutMask>& mask_zp,
                                                       double tau);

struct TrainResult {
  ProjectionHead head;
  std::vector<double> epoch_loss;  // item-weighted mean loss per epoch
};

// Adam over seeded shuffled batches (the order is drawn once and reused
// every epoch, so a zero learning rate yields a constant trace). Errors on
// a missing embedding id or a non-finite loss, naming the step.
TrainResult train_supervised(const ProjectionHead& head, const EmbeddingStore& base,
                             const TripleBuildReport& triples, const TrainConfig& cfg);

// Two fresh dropout masks per item per step; the mask stream restarts each
// epoch. Ids are sorted before shuffling so the result is a function of the
// id set, not its order.
TrainResult train_unsupervised(const ProjectionHead& head, const EmbeddingStore& base,
                               std::vector<std::string> doc_ids, const TrainConfig& cfg);

// Evaluation-mode forward over every vector; output dimension is out_dim.
EmbeddingStore encode_all(const ProjectionHead& head, const EmbeddingStore& base);

// Binary head file: magic "MHED", little-endian u32 in/hidden/out dims,
// f32 dropout probability, then row-major f32 W1, b1, W2, b2.
void save_head(const ProjectionHead& head, const std::filesystem::path& path);
ProjectionHead load_head(const std::filesystem::path& path);

void write_loss_trace(const std::vector<double>& epoch_loss, const std::filesystem::path& path);

}  // namespace moral
