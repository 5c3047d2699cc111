#include "moral/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "moral/detail/binio.hpp"
#include "moral/error.hpp"

namespace moral {

namespace {

constexpr char kHeadMagic[4] = {'M', 'H', 'E', 'D'};
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Substream tags for deriving independent RNG streams from the run seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kMaskStream = 2;

struct UnitRows {
  Matrix unit;                // rows scaled to unit norm
  std::vector<double> norms;  // original norms
};

UnitRows unit_rows(const Matrix& m, const char* who) {
  UnitRows out{Matrix(m.rows(), m.cols()), std::vector<double>(m.rows())};
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double n = norm2(m.row(i));
    if (n == 0.0)
      throw numeric_error(std::string(who) + ": zero-norm vector at batch row " +
                          std::to_string(i));
    out.norms[i] = n;
    const auto src = m.row(i);
    auto dst = out.unit.row(i);
    for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c] / n;
  }
  return out;
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw data_error(std::string(who) + ": batch shape mismatch");
}

}  // namespace

ProjectionHead ProjectionHead::init(std::size_t in, std::size_t hidden, std::size_t out,
                                    double dropout_p, std::uint64_t seed) {
  if (in == 0 || hidden == 0 || out == 0)
    throw data_error("projection head dimensions must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0))
    throw data_error("dropout probability must be in [0,1)");

  ProjectionHead head;
  head.dropout_p = dropout_p;
  head.w1 = Matrix(hidden, in);
  head.b1.assign(hidden, 0.0);
  head.w2 = Matrix(out, hidden);
  head.b2.assign(out, 0.0);

  Rng rng(seed);
  const auto fill_uniform = [&rng](std::span<double> dst, double bound) {
    for (double& v : dst) v = (2.0 * rng.uniform01() - 1.0) * bound;
  };
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  fill_uniform(head.w1.data(), bound1);
  fill_uniform(head.b1, bound1);
  fill_uniform(head.w2.data(), bound2);
  fill_uniform(head.b2, bound2);
  return head;
}

DropoutMask DropoutMask::sample(std::size_t n, double p, Rng& rng) {
  DropoutMask m;
  m.scale.resize(n);
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < n; ++i) m.scale[i] = rng.uniform01() < p ? 0.0 : keep_scale;
  return m;
}

DropoutMask DropoutMask::identity(std::size_t n) {
  DropoutMask m;
  m.scale.assign(n, 1.0);
  return m;
}

std::vector<double> forward(const ProjectionHead& head, std::span<const double> x,
                            const DropoutMask* mask) {
  if (x.size() != head.in_dim())
    throw data_error("forward: input has " + std::to_string(x.size()) + " components, head expects " +
                     std::to_string(head.in_dim()));
  if (mask && mask->scale.size() != head.hidden_dim())
    throw data_error("forward: dropout mask size mismatch");

  const std::size_t hidden = head.hidden_dim();
  const std::size_t out_dim = head.out_dim();
  std::vector<double> a(hidden);
  for (std::size_t r = 0; r < hidden; ++r) {
    double z = head.b1[r] + dot(head.w1.row(r), x);
    z = std::tanh(z);
    a[r] = mask ? z * mask->scale[r] : z;
  }
  std::vector<double> out(out_dim);
  for (std::size_t r = 0; r < out_dim; ++r) out[r] = head.b2[r] + dot(head.w2.row(r), a);
  return out;
}

SupLossResult sup_loss(const Matrix& h_ref, const Matrix& h_pos, const Matrix& h_neg, double tau) {
  if (h_ref.rows() == 0) throw data_error("sup_loss: empty batch");
  if (!(tau > 0.0)) throw data_error("sup_loss: temperature must be positive");
  check_same_shape(h_ref, h_pos, "sup_loss");
  check_same_shape(h_ref, h_neg, "sup_loss");

  const std::size_t n = h_ref.rows();
  const std::size_t d = h_ref.cols();
  const UnitRows ref = unit_rows(h_ref, "sup_loss");
  const UnitRows pos = unit_rows(h_pos, "sup_loss");
  const UnitRows neg = unit_rows(h_neg, "sup_loss");

  Matrix sim_pos(n, n), sim_neg(n, n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) {
      sim_pos(i, j) = dot(ref.unit.row(i), pos.unit.row(j));
      sim_neg(i, j) = dot(ref.unit.row(i), neg.unit.row(j));
    }
  }

  // Softmax weights per anchor over the 2N denominator terms, in
  // log-sum-exp form. weight_* holds dL/dsim scaled later by 1/(N tau).
  Matrix weight_pos(n, n), weight_neg(n, n);
  std::vector<double> losses(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      m = std::max(m, sim_pos(i, j) / tau);
      m = std::max(m, sim_neg(i, j) / tau);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      weight_pos(i, j) = std::exp(sim_pos(i, j) / tau - m);
      weight_neg(i, j) = std::exp(sim_neg(i, j) / tau - m);
      z += weight_pos(i, j) + weight_neg(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) {
      weight_pos(i, j) /= z;
      weight_neg(i, j) /= z;
    }
    losses[i] = m + std::log(z) - sim_pos(i, i) / tau;
  }

  SupLossResult res;
  for (double l : losses) res.loss += l;
  res.loss /= static_cast<double>(n);
  if (!std::isfinite(res.loss)) throw numeric_error("sup_loss: non-finite loss");

  const double scale = 1.0 / (static_cast<double>(n) * tau);
  res.grad_ref = Matrix(n, d);
  res.grad_pos = Matrix(n, d);
  res.grad_neg = Matrix(n, d);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto grad = res.grad_ref.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double ap = (weight_pos(i, j) - (i == j ? 1.0 : 0.0)) * scale;
      const double an = weight_neg(i, j) * scale;
      const auto pj = pos.unit.row(j);
      const auto gj = neg.unit.row(j);
      const auto ui = ref.unit.row(i);
      for (std::size_t c = 0; c < d; ++c) {
        grad[c] += ap * (pj[c] - sim_pos(i, j) * ui[c]) + an * (gj[c] - sim_neg(i, j) * ui[c]);
      }
    }
    for (std::size_t c = 0; c < d; ++c) grad[c] /= ref.norms[i];
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    auto gp = res.grad_pos.row(j);
    auto gn = res.grad_neg.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double ap = (weight_pos(i, j) - (i == j ? 1.0 : 0.0)) * scale;
      const double an = weight_neg(i, j) * scale;
      const auto ui = ref.unit.row(i);
      const auto pj = pos.unit.row(j);
      const auto gj = neg.unit.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        gp[c] += ap * (ui[c] - sim_pos(i, j) * pj[c]);
        gn[c] += an * (ui[c] - sim_neg(i, j) * gj[c]);
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      gp[c] /= pos.norms[j];
      gn[c] /= neg.norms[j];
    }
  }
  return res;
}

UnsupLossResult unsup_loss(const Matrix& h_z, const Matrix& h_zp, double tau) {
  if (h_z.rows() == 0) throw data_error("unsup_loss: empty batch");
  if (!(tau > 0.0)) throw data_error("unsup_loss: temperature must be positive");
  check_same_shape(h_z, h_zp, "unsup_loss");

  const std::size_t n = h_z.rows();
  const std::size_t d = h_z.cols();
  const UnitRows za = unit_rows(h_z, "unsup_loss");
  const UnitRows zb = unit_rows(h_zp, "unsup_loss");

  Matrix sim(n, n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) sim(i, j) = dot(za.unit.row(i), zb.unit.row(j));
  }

  Matrix weight(n, n);
  std::vector<double> losses(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, sim(i, j) / tau);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      weight(i, j) = std::exp(sim(i, j) / tau - m);
      z += weight(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) weight(i, j) /= z;
    losses[i] = m + std::log(z) - sim(i, i) / tau;
  }

  UnsupLossResult res;
  for (double l : losses) res.loss += l;
  res.loss /= static_cast<double>(n);
  if (!std::isfinite(res.loss)) throw numeric_error("unsup_loss: non-finite loss");

  const double scale = 1.0 / (static_cast<double>(n) * tau);
  res.grad_z = Matrix(n, d);
  res.grad_zp = Matrix(n, d);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto grad = res.grad_z.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = (weight(i, j) - (i == j ? 1.0 : 0.0)) * scale;
      const auto vj = zb.unit.row(j);
      const auto ui = za.unit.row(i);
      for (std::size_t c = 0; c < d; ++c) grad[c] += a * (vj[c] - sim(i, j) * ui[c]);
    }
    for (std::size_t c = 0; c < d; ++c) grad[c] /= za.norms[i];
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(n); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    auto grad = res.grad_zp.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = (weight(i, j) - (i == j ? 1.0 : 0.0)) * scale;
      const auto ui = za.unit.row(i);
      const auto vj = zb.unit.row(j);
      for (std::size_t c = 0; c < d; ++c) grad[c] += a * (ui[c] - sim(i, j) * vj[c]);
    }
    for (std::size_t c = 0; c < d; ++c) grad[c] /= zb.norms[j];
  }
  return res;
}

HeadGradients HeadGradients::zeros_like(const ProjectionHead& head) {
  HeadGradients g;
  g.w1 = Matrix(head.w1.rows(), head.w1.cols());
  g.b1.assign(head.b1.size(), 0.0);
  g.w2 = Matrix(head.w2.rows(), head.w2.cols());
  g.b2.assign(head.b2.size(), 0.0);
  return g;
}

namespace {

// Forward pass over a batch keeping the intermediates backprop needs.
struct ForwardCapture {
  const Matrix* x = nullptr;                    // batch inputs, rows
  Matrix tanh_h;                                // tanh(W1 x + b1)
  Matrix act_h;                                 // after the dropout mask
  const std::vector<DropoutMask>* masks = nullptr;  // null in eval mode
  Matrix out;
};

ForwardCapture capture_forward(const ProjectionHead& head, const Matrix& x,
                               const std::vector<DropoutMask>* masks) {
  const std::size_t m = x.rows();
  const std::size_t hidden = head.hidden_dim();
  const std::size_t out_dim = head.out_dim();
  if (x.cols() != head.in_dim()) throw data_error("train: input dimension mismatch");
  if (masks && masks->size() != m) throw data_error("train: mask count mismatch");

  ForwardCapture cap;
  cap.x = &x;
  cap.masks = masks;
  cap.tanh_h = Matrix(m, hidden);
  cap.act_h = Matrix(m, hidden);
  cap.out = Matrix(m, out_dim);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto xi = x.row(i);
    auto t = cap.tanh_h.row(i);
    auto a = cap.act_h.row(i);
    for (std::size_t r = 0; r < hidden; ++r) {
      t[r] = std::tanh(head.b1[r] + dot(head.w1.row(r), xi));
      a[r] = masks ? t[r] * (*masks)[i].scale[r] : t[r];
    }
    auto o = cap.out.row(i);
    for (std::size_t r = 0; r < out_dim; ++r) o[r] = head.b2[r] + dot(head.w2.row(r), a);
  }
  return cap;
}

// Adds the batch's parameter gradients for d(loss)/d(out) = grad_out.
// Phase one is parallel per item, phase two per parameter row with the item
// reduction kept in order, so results do not depend on the thread count.
void accumulate_param_grads(const ProjectionHead& head, const ForwardCapture& cap,
                            const Matrix& grad_out, HeadGradients& grads) {
  const std::size_t m = cap.out.rows();
  const std::size_t hidden = head.hidden_dim();
  const std::size_t out_dim = head.out_dim();
  const std::size_t in_dim = head.in_dim();

  Matrix dz1(m, hidden);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto g = grad_out.row(i);
    const auto t = cap.tanh_h.row(i);
    auto dz = dz1.row(i);
    for (std::size_t r = 0; r < hidden; ++r) {
      double da = 0.0;
      for (std::size_t o = 0; o < out_dim; ++o) da += head.w2(o, r) * g[o];
      const double mask = cap.masks ? (*cap.masks)[i].scale[r] : 1.0;
      dz[r] = da * mask * (1.0 - t[r] * t[r]);
    }
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(out_dim); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    auto w2r = grads.w2.row(r);
    double db = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double g = grad_out(i, r);
      db += g;
      const auto a = cap.act_h.row(i);
      for (std::size_t c = 0; c < hidden; ++c) w2r[c] += g * a[c];
    }
    grads.b2[r] += db;
  }

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(hidden); ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    auto w1r = grads.w1.row(r);
    double db = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double g = dz1(i, r);
      db += g;
      const auto xi = cap.x->row(i);
      for (std::size_t c = 0; c < in_dim; ++c) w1r[c] += g * xi[c];
    }
    grads.b1[r] += db;
  }
}

void check_finite(const HeadGradients& g, const char* where) {
  const auto scan = [&](std::span<const double> v) {
    for (double x : v) {
      if (!std::isfinite(x)) throw numeric_error(std::string("non-finite gradient at ") + where);
    }
  };
  scan(g.w1.data());
  scan(g.b1);
  scan(g.w2.data());
  scan(g.b2);
}

// Adam with bias correction; one state slot per parameter tensor.
class Adam {
 public:
  Adam(const ProjectionHead& head, double lr)
      : lr_(lr), m_(HeadGradients::zeros_like(head)), v_(HeadGradients::zeros_like(head)) {}

  void step(ProjectionHead& head, const HeadGradients& g) {
    ++t_;
    update(head.w1.data(), g.w1.data(), m_.w1.data(), v_.w1.data());
    update(head.b1, g.b1, m_.b1, v_.b1);
    update(head.w2.data(), g.w2.data(), m_.w2.data(), v_.w2.data());
    update(head.b2, g.b2, m_.b2, v_.b2);
  }

 private:
  void update(std::span<double> p, std::span<const double> g, std::span<double> m,
              std::span<double> v) {
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
    }
  }

  double lr_;
  int t_ = 0;
  HeadGradients m_, v_;
};

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, int batch_size) {
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(batch_size));
    std::vector<std::size_t> b(end - start);
    for (std::size_t i = start; i < end; ++i) b[i - start] = i;
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace

std::pair<double, HeadGradients> sup_batch_gradients(const ProjectionHead& head,
                                                     const Matrix& x_ref, const Matrix& x_pos,
                                                     const Matrix& x_neg, double tau) {
  const ForwardCapture ref = capture_forward(head, x_ref, nullptr);
  const ForwardCapture pos = capture_forward(head, x_pos, nullptr);
  const ForwardCapture neg = capture_forward(head, x_neg, nullptr);
  const SupLossResult loss = sup_loss(ref.out, pos.out, neg.out, tau);

  HeadGradients grads = HeadGradients::zeros_like(head);
  accumulate_param_grads(head, ref, loss.grad_ref, grads);
  accumulate_param_grads(head, pos, loss.grad_pos, grads);
  accumulate_param_grads(head, neg, loss.grad_neg, grads);
  return {loss.loss, std::move(grads)};
}

std::pair<double, HeadGradients> unsup_batch_gradients(const ProjectionHead& head,
                                                       const Matrix& x,
                                                       const std::vector<DropoutMask>& mask_z,
                                                       const std::vector<DropoutMask>& mask_zp,
                                                       double tau) {
  const ForwardCapture z = capture_forward(head, x, &mask_z);
  const ForwardCapture zp = capture_forward(head, x, &mask_zp);
  const UnsupLossResult loss = unsup_loss(z.out, zp.out, tau);

  HeadGradients grads = HeadGradients::zeros_like(head);
  accumulate_param_grads(head, z, loss.grad_z, grads);
  accumulate_param_grads(head, zp, loss.grad_zp, grads);
  return {loss.loss, std::move(grads)};
}

TrainResult train_supervised(const ProjectionHead& head, const EmbeddingStore& base,
                             const TripleBuildReport& triples, const TrainConfig& cfg) {
  if (triples.triples.empty()) throw data_error("train: no triples");
  if (cfg.batch_size < 1) throw data_error("train: batch_size must be >= 1");
  if (cfg.epochs < 1) throw data_error("train: epochs must be >= 1");
  for (const Triple& t : triples.triples) {
    for (const std::string* id : {&t.reference_id, &t.positive_id, &t.negative_id}) {
      if (!base.contains(*id)) throw data_error("train: missing embedding: " + *id);
    }
  }

  std::vector<std::size_t> order(triples.triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(cfg.seed, kShuffleStream));
  shuffle_rng.shuffle(order);
  const auto batches = make_batches(order.size(), cfg.batch_size);

  TrainResult result{head, {}};
  Adam optimizer(result.head, cfg.learning_rate);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t item_count = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& batch = batches[bi];
      std::vector<std::string> ref_ids, pos_ids, neg_ids;
      for (std::size_t slot : batch) {
        const Triple& t = triples.triples[order[slot]];
        ref_ids.push_back(t.reference_id);
        pos_ids.push_back(t.positive_id);
        neg_ids.push_back(t.negative_id);
      }
      const Matrix x_ref = base.align(ref_ids);
      const Matrix x_pos = base.align(pos_ids);
      const Matrix x_neg = base.align(neg_ids);

      auto [loss, grads] = sup_batch_gradients(result.head, x_ref, x_pos, x_neg, cfg.temperature);
      if (!std::isfinite(loss))
        throw numeric_error("supervised training diverged at epoch " + std::to_string(epoch + 1) +
                            " step " + std::to_string(bi + 1));
      check_finite(grads, ("epoch " + std::to_string(epoch + 1) + " step " +
                           std::to_string(bi + 1)).c_str());
      optimizer.step(result.head, grads);
      loss_sum += loss * static_cast<double>(batch.size());
      item_count += batch.size();
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(item_count));
  }
  return result;
}

TrainResult train_unsupervised(const ProjectionHead& head, const EmbeddingStore& base,
                               std::vector<std::string> doc_ids, const TrainConfig& cfg) {
  if (doc_ids.empty()) throw data_error("train: no documents");
  if (cfg.batch_size < 1) throw data_error("train: batch_size must be >= 1");
  if (cfg.epochs < 1) throw data_error("train: epochs must be >= 1");
  for (const std::string& id : doc_ids) {
    if (!base.contains(id)) throw data_error("train: missing embedding: " + id);
  }

  std::sort(doc_ids.begin(), doc_ids.end());
  Rng shuffle_rng(mix_seed(cfg.seed, kShuffleStream));
  shuffle_rng.shuffle(doc_ids);
  const auto batches = make_batches(doc_ids.size(), cfg.batch_size);

  TrainResult result{head, {}};
  Adam optimizer(result.head, cfg.learning_rate);
  const std::size_t hidden = head.hidden_dim();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // The mask stream restarts every epoch: the trace is then a pure
    // function of the parameters, and a zero learning rate keeps it flat.
    Rng mask_rng(mix_seed(cfg.seed, kMaskStream));
    double loss_sum = 0.0;
    std::size_t item_count = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& batch = batches[bi];
      std::vector<std::string> ids;
      for (std::size_t slot : batch) ids.push_back(doc_ids[slot]);
      const Matrix x = base.align(ids);

      std::vector<DropoutMask> mask_z, mask_zp;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        mask_z.push_back(DropoutMask::sample(hidden, result.head.dropout_p, mask_rng));
        mask_zp.push_back(DropoutMask::sample(hidden, result.head.dropout_p, mask_rng));
      }

      auto [loss, grads] =
          unsup_batch_gradients(result.head, x, mask_z, mask_zp, cfg.temperature);
      if (!std::isfinite(loss))
        throw numeric_error("unsupervised training diverged at epoch " + std::to_string(epoch + 1) +
                            " step " + std::to_string(bi + 1));
      check_finite(grads, ("epoch " + std::to_string(epoch + 1) + " step " +
                           std::to_string(bi + 1)).c_str());
      optimizer.step(result.head, grads);
      loss_sum += loss * static_cast<double>(batch.size());
      item_count += batch.size();
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(item_count));
  }
  return result;
}

EmbeddingStore encode_all(const ProjectionHead& head, const EmbeddingStore& base) {
  const std::vector<std::string> ids = base.ids();
  const Matrix x = base.align(ids);
  Matrix out(ids.size(), head.out_dim());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(ids.size()); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::vector<double> y = forward(head, x.row(i), nullptr);
    auto row = out.row(i);
    std::copy(y.begin(), y.end(), row.begin());
  }
  EmbeddingStore moral_space(head.out_dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<float> v(head.out_dim());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = static_cast<float>(out(i, c));
    moral_space.insert(ids[i], std::move(v));
  }
  return moral_space;
}

void save_head(const ProjectionHead& head, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write head file: " + path.string());
  out.write(kHeadMagic, 4);
  detail::write_u32(out, static_cast<std::uint32_t>(head.in_dim()));
  detail::write_u32(out, static_cast<std::uint32_t>(head.hidden_dim()));
  detail::write_u32(out, static_cast<std::uint32_t>(head.out_dim()));
  detail::write_f32(out, static_cast<float>(head.dropout_p));
  const auto dump = [&out](std::span<const double> v) {
    for (double x : v) detail::write_f32(out, static_cast<float>(x));
  };
  dump(head.w1.data());
  dump(head.b1);
  dump(head.w2.data());
  dump(head.b2);
}

ProjectionHead load_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open head file: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kHeadMagic, 4) != 0)
    throw data_error(path.string() + ": missing MHED magic");
  const char* what = "head file";
  const std::uint32_t in_dim = detail::read_u32(in, what);
  const std::uint32_t hidden = detail::read_u32(in, what);
  const std::uint32_t out_dim = detail::read_u32(in, what);
  const float dropout_p = detail::read_f32(in, what);

  ProjectionHead head;
  head.dropout_p = static_cast<double>(dropout_p);
  head.w1 = Matrix(hidden, in_dim);
  head.b1.resize(hidden);
  head.w2 = Matrix(out_dim, hidden);
  head.b2.resize(out_dim);
  const auto slurp = [&](std::span<double> v) {
    for (double& x : v) x = static_cast<double>(detail::read_f32(in, what));
  };
  slurp(head.w1.data());
  slurp(head.b1);
  slurp(head.w2.data());
  slurp(head.b2);
  return head;
}

void write_loss_trace(const std::vector<double>& epoch_loss, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write loss trace: " + path.string());
  out << "epoch,mean_loss\r\n";
  char buf[64];
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    const int n = std::snprintf(buf, sizeof(buf), "%.17g", epoch_loss[i]);
    out << (i + 1) << ',';
    out.write(buf, n);
    out << "\r\n";
  }
}

}  // namespace moral
