#include "moral/classify.hpp"

#include <algorithm>
#include <cmath>

#include "moral/error.hpp"
#include "moral/rng.hpp"

namespace moral {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Stable BCE-with-logits: max(z,0) - z*y + log(1 + exp(-|z|)).
double bce_with_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

LinearHead LinearHead::init(std::size_t num_labels, std::size_t embed_dim, std::uint64_t seed) {
  LinearHead head;
  head.w = Matrix(num_labels, embed_dim);
  head.b.assign(num_labels, 0.0);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  for (double& v : head.w.data()) v = (2.0 * rng.uniform01() - 1.0) * bound;
  for (double& v : head.b) v = (2.0 * rng.uniform01() - 1.0) * bound;
  return head;
}

LinearHead train_head(const Matrix& embeddings, const std::vector<LabelSet>& labels,
                      const CVConfig& cfg) {
  if (embeddings.rows() != labels.size()) throw data_error("train_head: length mismatch");
  if (embeddings.rows() == 0) throw data_error("train_head: empty input");
  if (cfg.batch_size < 1 || cfg.epochs < 1) throw data_error("train_head: bad config");
  const LabelScheme scheme = labels.front().scheme();
  const std::size_t num_labels = scheme_size(scheme);
  const std::size_t dim = embeddings.cols();
  const std::size_t n = embeddings.rows();

  // Binary indicator targets.
  Matrix y(n, num_labels);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Label& l : labels[i].labels()) y(i, l.index()) = 1.0;
  }

  LinearHead head = LinearHead::init(num_labels, dim, mix_seed(cfg.seed, 10));
  LinearHead m{Matrix(num_labels, dim), std::vector<double>(num_labels, 0.0)};
  LinearHead v{Matrix(num_labels, dim), std::vector<double>(num_labels, 0.0)};
  int t = 0;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng shuffle_rng(mix_seed(cfg.seed, 11));
  shuffle_rng.shuffle(order);

  Matrix grad_w(num_labels, dim);
  std::vector<double> grad_b(num_labels);
  Matrix dropped(static_cast<std::size_t>(cfg.batch_size), dim);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Restarting the dropout stream per epoch keeps training a pure
    // function of (inputs, seed) regardless of epoch count changes ahead.
    Rng drop_rng(mix_seed(cfg.seed, 12));
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      const std::size_t bn = end - start;

      const double keep_scale = 1.0 / (1.0 - cfg.dropout);
      for (std::size_t i = 0; i < bn; ++i) {
        const auto src = embeddings.row(order[start + i]);
        auto dst = dropped.row(i);
        for (std::size_t c = 0; c < dim; ++c) {
          const bool keep = cfg.dropout == 0.0 || drop_rng.uniform01() >= cfg.dropout;
          dst[c] = keep ? src[c] * (cfg.dropout == 0.0 ? 1.0 : keep_scale) : 0.0;
        }
      }

      grad_w.fill(0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      double loss = 0.0;
      const double inv = 1.0 / static_cast<double>(bn * num_labels);
      for (std::size_t i = 0; i < bn; ++i) {
        const auto xi = dropped.row(i);
        const std::size_t row = order[start + i];
        for (std::size_t l = 0; l < num_labels; ++l) {
          const double z = head.b[l] + dot(head.w.row(l), xi);
          loss += bce_with_logits(z, y(row, l)) * inv;
          const double delta = (sigmoid(z) - y(row, l)) * inv;
          grad_b[l] += delta;
          auto wr = grad_w.row(l);
          for (std::size_t c = 0; c < dim; ++c) wr[c] += delta * xi[c];
        }
      }
      if (!std::isfinite(loss))
        throw numeric_error("train_head: non-finite loss at epoch " + std::to_string(epoch + 1));

      ++t;
      const double c1 = 1.0 - std::pow(kBeta1, t);
      const double c2 = 1.0 - std::pow(kBeta2, t);
      const auto adam = [&](std::span<double> p, std::span<const double> g, std::span<double> mm,
                            std::span<double> vv) {
        for (std::size_t i = 0; i < p.size(); ++i) {
          mm[i] = kBeta1 * mm[i] + (1.0 - kBeta1) * g[i];
          vv[i] = kBeta2 * vv[i] + (1.0 - kBeta2) * g[i] * g[i];
          p[i] -= cfg.learning_rate * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + kAdamEps);
        }
      };
      adam(head.w.data(), grad_w.data(), m.w.data(), v.w.data());
      adam(head.b, grad_b, m.b, v.b);
    }
  }
  return head;
}

LabelSet predict(const LinearHead& head, std::span<const double> embedding, double threshold,
                 LabelScheme scheme) {
  if (embedding.size() != head.embed_dim()) throw data_error("predict: dimension mismatch");
  if (head.num_labels() != scheme_size(scheme)) throw data_error("predict: label-count mismatch");
  LabelSet out(scheme);
  for (std::size_t l = 0; l < head.num_labels(); ++l) {
    const double z = head.b[l] + dot(head.w.row(l), embedding);
    if (sigmoid(z) > threshold) out.insert(Label(scheme, static_cast<std::uint8_t>(l)));
  }
  return out;
}

CVReport cross_validate(const Matrix& embeddings, const std::vector<LabelSet>& labels,
                        const CVConfig& cfg) {
  const std::size_t n = embeddings.rows();
  if (n != labels.size()) throw data_error("cross_validate: length mismatch");
  if (cfg.folds < 2) throw data_error("cross_validate: folds must be >= 2");
  if (n < static_cast<std::size_t>(cfg.folds))
    throw data_error("cross_validate: fewer items (" + std::to_string(n) + ") than folds");
  const LabelScheme scheme = labels.front().scheme();

  // Seeded shuffled partition; sizes differ by at most one.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(cfg.seed, 20));
  rng.shuffle(order);
  CVReport report;
  report.folds.assign(static_cast<std::size_t>(cfg.folds), {});
  for (std::size_t i = 0; i < n; ++i)
    report.folds[i % static_cast<std::size_t>(cfg.folds)].push_back(order[i]);

  struct FoldOutput {
    F1Report f1;
    std::vector<LabelSet> gold, pred;
  };
  std::vector<FoldOutput> outputs(static_cast<std::size_t>(cfg.folds));

  // Folds are independent heads; results aggregate in fold order.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t f = 0; f < static_cast<std::ptrdiff_t>(cfg.folds); ++f) {
    const auto& held = report.folds[static_cast<std::size_t>(f)];
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < report.folds.size(); ++g) {
      if (g == static_cast<std::size_t>(f)) continue;
      train_rows.insert(train_rows.end(), report.folds[g].begin(), report.folds[g].end());
    }
    Matrix train_x(train_rows.size(), embeddings.cols());
    std::vector<LabelSet> train_y;
    train_y.reserve(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      const auto src = embeddings.row(train_rows[i]);
      std::copy(src.begin(), src.end(), train_x.row(i).begin());
      train_y.push_back(labels[train_rows[i]]);
    }
    CVConfig fold_cfg = cfg;
    fold_cfg.seed = mix_seed(cfg.seed, 30 + static_cast<std::uint64_t>(f));
    const LinearHead head = train_head(train_x, train_y, fold_cfg);

    FoldOutput& out = outputs[static_cast<std::size_t>(f)];
    for (std::size_t row : held) {
      out.gold.push_back(labels[row]);
      out.pred.push_back(predict(head, embeddings.row(row), cfg.threshold, scheme));
    }
    out.f1 = f1_scores(out.gold, out.pred);
  }

  const double fold_count = static_cast<double>(cfg.folds);
  const auto mean_std = [fold_count](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= fold_count;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(var / fold_count)};
  };

  std::vector<double> micro, macro;
  for (const FoldOutput& out : outputs) {
    micro.push_back(out.f1.micro);
    macro.push_back(out.f1.macro);
  }
  std::tie(report.micro_mean, report.micro_std) = mean_std(micro);
  std::tie(report.macro_mean, report.macro_std) = mean_std(macro);

  for (std::size_t l = 0; l < scheme_size(scheme); ++l) {
    std::vector<double> per;
    for (const FoldOutput& out : outputs) per.push_back(out.f1.per_label[l].second);
    const auto [mean, sd] = mean_std(per);
    report.per_label.emplace_back(Label(scheme, static_cast<std::uint8_t>(l)), mean, sd);
  }

  std::vector<LabelSet> all_gold, all_pred;
  for (const FoldOutput& out : outputs) {
    all_gold.insert(all_gold.end(), out.gold.begin(), out.gold.end());
    all_pred.insert(all_pred.end(), out.pred.begin(), out.pred.end());
  }
  report.errors = error_taxonomy(all_gold, all_pred);
  return report;
}

}  // namespace moral
