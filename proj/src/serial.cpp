#include "moral/serial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "moral/error.hpp"
#include "moral/rng.hpp"

namespace moral::serial {

double cosine(std::span<const double> u, std::span<const double> v) {
  double uu = 0.0, vv = 0.0, uv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uu += u[i] * u[i];
    vv += v[i] * v[i];
    uv += u[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0) throw numeric_error("serial cosine: zero-norm vector");
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

MoralSimilarityMatrix moral_similarity(
    const EmbeddingStore& store,
    const std::vector<std::pair<Label, std::vector<std::string>>>& groups) {
  MoralSimilarityMatrix out;
  out.values = Matrix(groups.size(), groups.size());
  for (const auto& [label, ids] : groups) out.labels.push_back(label);

  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = 0; b < groups.size(); ++b) {
      const auto& ids_a = groups[a].second;
      const auto& ids_b = groups[b].second;
      double sum = 0.0;
      std::size_t pairs = 0;
      if (a == b) {
        for (std::size_t i = 0; i < ids_a.size(); ++i) {
          for (std::size_t j = i + 1; j < ids_a.size(); ++j) {
            const Matrix m = store.align(std::array{ids_a[i], ids_a[j]});
            sum += cosine(m.row(0), m.row(1));
            ++pairs;
          }
        }
      } else {
        for (const std::string& ia : ids_a) {
          for (const std::string& ib : ids_b) {
            if (ia == ib) continue;
            const Matrix m = store.align(std::array{ia, ib});
            sum += cosine(m.row(0), m.row(1));
            ++pairs;
          }
        }
      }
      out.values(a, b) = pairs == 0 ? 0.0 : 100.0 * sum / static_cast<double>(pairs);
    }
  }
  return out;
}

namespace {

std::vector<double> unit(const std::vector<double>& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  const double n = std::sqrt(n2);
  if (n == 0.0) throw numeric_error("serial: zero-norm vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

double alignment(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                 double alpha) {
  double sum = 0.0;
  for (const auto& [x, y] : pairs) sum += std::pow(dist(unit(x), unit(y)), alpha);
  return sum / static_cast<double>(pairs.size());
}

double uniformity(const std::vector<std::vector<double>>& vectors, double t) {
  std::vector<std::vector<double>> u;
  u.reserve(vectors.size());
  for (const auto& v : vectors) u.push_back(unit(v));
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      const double d = dist(u[i], u[j]);
      sum += std::exp(-t * d * d);
      ++pairs;
    }
  }
  return std::log(sum / static_cast<double>(pairs));
}

double silhouette(const Matrix& points, std::span<const int> assignment) {
  const std::size_t n = points.rows();
  int k = 0;
  for (int c : assignment) k = std::max(k, c + 1);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int c : assignment) ++sizes[static_cast<std::size_t>(c)];

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int mine = assignment[i];
    if (sizes[static_cast<std::size_t>(mine)] < 2) continue;  // s(i) = 0
    double a = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || assignment[j] != mine) continue;
      a += euclidean_distance(points.row(i), points.row(j));
    }
    a /= static_cast<double>(sizes[static_cast<std::size_t>(mine)] - 1);

    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == mine || sizes[static_cast<std::size_t>(c)] == 0) continue;
      double mean = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (assignment[j] != c) continue;
        mean += euclidean_distance(points.row(i), points.row(j));
      }
      mean /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      b = std::min(b, mean);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double purity(std::span<const int> assignment, std::span<const int> truth) {
  int k = 0;
  for (int c : assignment) k = std::max(k, c + 1);
  std::size_t agree = 0;
  for (int c = 0; c < k; ++c) {
    // most frequent true label within cluster c
    std::size_t best = 0;
    int max_label = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) max_label = std::max(max_label, truth[i] + 1);
    for (int l = 0; l < max_label; ++l) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == c && truth[i] == l) ++count;
      }
      best = std::max(best, count);
    }
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(assignment.size());
}

F1Report f1_scores(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
  const LabelScheme scheme = gold.front().scheme();
  const std::size_t l = scheme_size(scheme);

  F1Report rep;
  double macro_sum = 0.0;
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (std::uint8_t j = 0; j < l; ++j) {
    const Label label(scheme, j);
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i].contains(label);
      const bool p = pred[i].contains(label);
      if (g && p) ++tp;
      if (!g && p) ++fp;
      if (g && !p) ++fn;
    }
    const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    rep.per_label.emplace_back(label, f1);
    macro_sum += f1;
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  const double precision = tp_all + fp_all == 0 ? 0.0
                              : static_cast<double>(tp_all) / static_cast<double>(tp_all + fp_all);
  const double recall = tp_all + fn_all == 0 ? 0.0
                           : static_cast<double>(tp_all) / static_cast<double>(tp_all + fn_all);
  rep.micro = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
  rep.macro = macro_sum / static_cast<double>(l);
  return rep;
}

namespace {

Matrix serial_plus_plus_init(const Matrix& points, int k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(static_cast<std::size_t>(k), points.cols());
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  auto copy_row = [&](std::size_t c, std::size_t p) {
    for (std::size_t j = 0; j < points.cols(); ++j) centroids(c, j) = points(p, j);
  };
  copy_row(0, static_cast<std::size_t>(rng.bounded(n)));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i],
                           squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(c - 1))));
      total += min_d2[i];
    }
    std::size_t chosen;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += min_d2[i];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<std::size_t>(rng.bounded(n));
    }
    copy_row(static_cast<std::size_t>(c), chosen);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, const KMeansConfig& cfg) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const auto k = static_cast<std::size_t>(cfg.k);

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    KMeansResult res;
    res.centroids = serial_plus_plus_init(points, cfg.k, rng);
    res.assignment.assign(n, 0);

    auto assign = [&] {
      for (std::size_t i = 0; i < n; ++i) {
        double bd = std::numeric_limits<double>::infinity();
        int bc = 0;
        for (std::size_t c = 0; c < k; ++c) {
          const double d2 = squared_distance(points.row(i), res.centroids.row(c));
          if (d2 < bd) {
            bd = d2;
            bc = static_cast<int>(c);
          }
        }
        res.assignment[i] = bc;
      }
    };

    Matrix sums(k, d);
    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
      res.iterations = iter + 1;
      assign();
      sums.fill(0.0);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(res.assignment[i]);
        ++counts[c];
        for (std::size_t j = 0; j < d; ++j) sums(c, j) += points(i, j);
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        double worst = -1.0;
        std::size_t steal = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto owner = static_cast<std::size_t>(res.assignment[i]);
          if (counts[owner] <= 1) continue;
          const double d2 = squared_distance(points.row(i), res.centroids.row(owner));
          if (d2 > worst) {
            worst = d2;
            steal = i;
          }
        }
        if (worst < 0.0) continue;
        const auto owner = static_cast<std::size_t>(res.assignment[steal]);
        --counts[owner];
        ++counts[c];
        res.assignment[steal] = static_cast<int>(c);
        for (std::size_t j = 0; j < d; ++j) {
          sums(owner, j) -= points(steal, j);
          sums(c, j) += points(steal, j);
        }
      }
      double max_shift = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;
        double shift2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double updated = sums(c, j) / static_cast<double>(counts[c]);
          const double delta = updated - res.centroids(c, j);
          shift2 += delta * delta;
          res.centroids(c, j) = updated;
        }
        max_shift = std::max(max_shift, std::sqrt(shift2));
      }
      if (max_shift < cfg.tol) break;
    }
    assign();
    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      res.inertia += squared_distance(points.row(i),
                                      res.centroids.row(static_cast<std::size_t>(res.assignment[i])));
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

}  // namespace moral::serial
