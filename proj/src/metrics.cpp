#include "moral/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "moral/error.hpp"

namespace moral {

namespace {

// Rows of unit vectors; errors on zero norms so cosine reduces to a dot.
Matrix normalized_rows(const Matrix& m, const char* who) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double n = norm2(m.row(i));
    if (n == 0.0) throw numeric_error(std::string(who) + ": zero-norm vector at row " +
                                      std::to_string(i));
    auto dst = out.row(i);
    const auto src = m.row(i);
    for (std::size_t c = 0; c < m.cols(); ++c) dst[c] = src[c] / n;
  }
  return out;
}

std::vector<double> normalized(std::span<const double> v, const char* who) {
  const double n = norm2(v);
  if (n == 0.0) throw numeric_error(std::string(who) + ": zero-norm vector");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw data_error("cosine: dimension mismatch");
  const double nu = norm2(u);
  const double nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) throw numeric_error("cosine: zero-norm vector");
  return dot(u, v) / (nu * nv);
}

MoralSimilarityMatrix moral_similarity(
    const EmbeddingStore& store,
    const std::vector<std::pair<Label, std::vector<std::string>>>& groups) {
  const std::size_t g = groups.size();
  for (const auto& [label, ids] : groups) {
    if (ids.empty())
      throw data_error("moral_similarity: empty group for label '" + std::string(label.name()) + "'");
    if (ids.size() < 2)
      throw data_error("moral_similarity: diagonal needs >= 2 members for label '" +
                       std::string(label.name()) + "'");
  }

  // Align and unit-normalize each group once; cosine becomes a dot product.
  std::vector<Matrix> unit(g);
  for (std::size_t i = 0; i < g; ++i)
    unit[i] = normalized_rows(store.align(groups[i].second), "moral_similarity");

  MoralSimilarityMatrix result;
  result.values = Matrix(g, g);
  for (const auto& [label, ids] : groups) result.labels.push_back(label);

  // Upper triangle cells are independent work items.
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = a; b < g; ++b) cells.emplace_back(a, b);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(cells.size()); ++ci) {
    const auto [a, b] = cells[static_cast<std::size_t>(ci)];
    const Matrix& ua = unit[a];
    const Matrix& ub = unit[b];
    const auto& ids_a = groups[a].second;
    const auto& ids_b = groups[b].second;
    double sum = 0.0;
    std::size_t pairs = 0;
    if (a == b) {
      for (std::size_t i = 0; i < ua.rows(); ++i)
        for (std::size_t j = i + 1; j < ua.rows(); ++j) sum += dot(ua.row(i), ua.row(j));
      pairs = ua.rows() * (ua.rows() - 1) / 2;
    } else {
      for (std::size_t i = 0; i < ua.rows(); ++i) {
        for (std::size_t j = 0; j < ub.rows(); ++j) {
          if (ids_a[i] == ids_b[j]) continue;  // same item in both groups
          sum += dot(ua.row(i), ub.row(j));
          ++pairs;
        }
      }
    }
    const double mean = pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
    result.values(a, b) = 100.0 * mean;
    result.values(b, a) = 100.0 * mean;
  }
  return result;
}

void write_similarity_csv(const MoralSimilarityMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write similarity csv: " + path.string());
  out << "label";
  for (const Label& l : m.labels) out << ',' << l.name();
  out << "\r\n";
  char buf[64];
  for (std::size_t r = 0; r < m.values.rows(); ++r) {
    out << m.labels[r].name();
    for (std::size_t c = 0; c < m.values.cols(); ++c) {
      const int n = std::snprintf(buf, sizeof(buf), "%.17g", m.values(r, c));
      out << ',';
      out.write(buf, n);
    }
    out << "\r\n";
  }
}

MoralSimilarityMatrix load_similarity_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open similarity csv: " + path.string());

  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (ch != '\r') {
        cur += ch;
      }
    }
    fields.push_back(cur);
    return fields;
  };

  std::string line;
  if (!std::getline(in, line)) throw data_error(path.string() + ": empty similarity csv");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "label")
    throw data_error(path.string() + ": bad similarity csv header");

  MoralSimilarityMatrix m;
  const std::size_t g = header.size() - 1;
  // Try the 11-label scheme first, fall back to the 6-label scheme.
  for (std::size_t i = 1; i < header.size(); ++i) {
    auto label = Label::parse(header[i], LabelScheme::Elements11);
    if (!label && g <= 6) label = Label::parse(header[i], LabelScheme::Foundations6);
    if (!label) throw data_error(path.string() + ": unknown label '" + header[i] + "'");
    m.labels.push_back(*label);
  }
  m.values = Matrix(g, g);
  for (std::size_t r = 0; r < g; ++r) {
    if (!std::getline(in, line))
      throw data_error(path.string() + ": expected " + std::to_string(g) + " data rows");
    const auto fields = split(line);
    if (fields.size() != g + 1)
      throw data_error(path.string() + ": row " + std::to_string(r + 1) + " has " +
                       std::to_string(fields.size()) + " fields");
    for (std::size_t c = 0; c < g; ++c) {
      const std::string& f = fields[c + 1];
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
        throw data_error(path.string() + ": bad value '" + f + "'");
      m.values(r, c) = v;
    }
  }
  return m;
}

double alignment(const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                 double alpha) {
  if (pairs.empty()) throw data_error("alignment: no positive pairs");
  std::vector<double> terms(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs.size()); ++i) {
    const auto x = normalized(pairs[static_cast<std::size_t>(i)].first, "alignment");
    const auto y = normalized(pairs[static_cast<std::size_t>(i)].second, "alignment");
    terms[static_cast<std::size_t>(i)] =
        std::pow(euclidean_distance(x, y), alpha);
  }
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / static_cast<double>(pairs.size());
}

double uniformity(const std::vector<std::vector<double>>& vectors, double t) {
  if (vectors.size() < 2) throw data_error("uniformity: needs >= 2 vectors");
  const std::size_t n = vectors.size();
  std::vector<std::vector<double>> unit(n);
  for (std::size_t i = 0; i < n; ++i) unit[i] = normalized(vectors[i], "uniformity");

  // Per-row partial sums over j > i, reduced serially in row order.
  std::vector<double> partial(n, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double s = 0.0;
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j)
      s += std::exp(-t * squared_distance(unit[static_cast<std::size_t>(i)], unit[j]));
    partial[static_cast<std::size_t>(i)] = s;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return std::log(sum / pairs);
}

double silhouette(const Matrix& points, std::span<const int> assignment) {
  const std::size_t n = points.rows();
  if (assignment.size() != n) throw data_error("silhouette: assignment length mismatch");

  int max_cluster = -1;
  for (int c : assignment) {
    if (c < 0) throw data_error("silhouette: negative cluster id");
    max_cluster = std::max(max_cluster, c);
  }
  const std::size_t k = static_cast<std::size_t>(max_cluster) + 1;
  std::vector<std::size_t> sizes(k, 0);
  for (int c : assignment) ++sizes[static_cast<std::size_t>(c)];
  std::size_t non_empty = 0;
  for (std::size_t s : sizes) non_empty += s > 0 ? 1 : 0;
  if (non_empty < 2) throw data_error("silhouette: needs >= 2 non-empty clusters");

  std::vector<double> scores(n, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto mine = static_cast<std::size_t>(assignment[i]);
    if (sizes[mine] < 2) {
      scores[i] = 0.0;  // singleton convention
      continue;
    }
    std::vector<double> dist_sum(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist_sum[static_cast<std::size_t>(assignment[j])] +=
          euclidean_distance(points.row(i), points.row(j));
    }
    const double a = dist_sum[mine] / static_cast<double>(sizes[mine] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == mine || sizes[c] == 0) continue;
      b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    scores[i] = denom == 0.0 ? 0.0 : (b - a) / denom;
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(n);
}

double purity(std::span<const int> assignment, std::span<const int> truth) {
  if (assignment.size() != truth.size()) throw data_error("purity: length mismatch");
  if (assignment.empty()) throw data_error("purity: empty input");
  int max_cluster = 0;
  int max_label = 0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] < 0 || truth[i] < 0) throw data_error("purity: negative id");
    max_cluster = std::max(max_cluster, assignment[i]);
    max_label = std::max(max_label, truth[i]);
  }
  const std::size_t k = static_cast<std::size_t>(max_cluster) + 1;
  const std::size_t l = static_cast<std::size_t>(max_label) + 1;
  std::vector<std::size_t> counts(k * l, 0);
  for (std::size_t i = 0; i < assignment.size(); ++i)
    ++counts[static_cast<std::size_t>(assignment[i]) * l + static_cast<std::size_t>(truth[i])];
  std::size_t agree = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best = 0;
    for (std::size_t j = 0; j < l; ++j) best = std::max(best, counts[c * l + j]);
    agree += best;
  }
  return static_cast<double>(agree) / static_cast<double>(assignment.size());
}

double purity(const std::map<std::string, int>& assignment,
              const std::map<std::string, int>& truth) {
  if (assignment.size() != truth.size())
    throw data_error("purity: assignment and truth cover different ids");
  std::vector<int> a, t;
  a.reserve(assignment.size());
  t.reserve(truth.size());
  for (const auto& [id, cluster] : assignment) {
    const auto it = truth.find(id);
    if (it == truth.end()) throw data_error("purity: id '" + id + "' missing from truth");
    a.push_back(cluster);
    t.push_back(it->second);
  }
  return purity(std::span<const int>(a), std::span<const int>(t));
}

F1Report f1_scores(const std::vector<LabelSet>& gold, const std::vector<LabelSet>& pred) {
  if (gold.size() != pred.size()) throw data_error("f1_scores: length mismatch");
  if (gold.empty()) throw data_error("f1_scores: empty input");
  const LabelScheme scheme = gold.front().scheme();
  const std::size_t l = scheme_size(scheme);

  std::vector<std::size_t> tp(l, 0), fp(l, 0), fn(l, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].scheme() != scheme || pred[i].scheme() != scheme)
      throw data_error("f1_scores: mixed label schemes");
    for (std::uint8_t j = 0; j < l; ++j) {
      const Label label(scheme, j);
      const bool g = gold[i].contains(label);
      const bool p = pred[i].contains(label);
      if (g && p) ++tp[j];
      else if (!g && p) ++fp[j];
      else if (g && !p) ++fn[j];
    }
  }

  auto f1_of = [](std::size_t tp_, std::size_t fp_, std::size_t fn_) {
    const double denom = static_cast<double>(2 * tp_ + fp_ + fn_);
    return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp_) / denom;
  };

  F1Report rep;
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  double macro_sum = 0.0;
  for (std::uint8_t j = 0; j < l; ++j) {
    const double f1 = f1_of(tp[j], fp[j], fn[j]);
    rep.per_label.emplace_back(Label(scheme, j), f1);
    macro_sum += f1;
    tp_all += tp[j];
    fp_all += fp[j];
    fn_all += fn[j];
  }
  rep.micro = f1_of(tp_all, fp_all, fn_all);
  rep.macro = macro_sum / static_cast<double>(l);
  return rep;
}

ErrorBreakdown error_taxonomy(const std::vector<LabelSet>& gold,
                              const std::vector<LabelSet>& pred) {
  if (gold.size() != pred.size()) throw data_error("error_taxonomy: length mismatch");
  ErrorBreakdown out;
  out.total = gold.size();
  std::size_t counts[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const LabelSet& g = gold[i];
    const LabelSet& p = pred[i];
    if (g == p) continue;
    ++out.misclassified;
    const bool pred_moral = p.has_moral();
    if (g.has_moral() && !pred_moral) {
      ++counts[0];  // I: moral item predicted non-moral or nothing
      continue;
    }
    if (g.is_pure_non_moral() && pred_moral) {
      ++counts[1];  // II: non-moral item predicted moral
      continue;
    }
    bool opposite_hit = false;
    if (g.scheme() == LabelScheme::Elements11) {
      for (const Label& gl : g.labels()) {
        if (gl.is_non_moral()) continue;
        if (p.contains(Label::element(gl.as_element().opposite()))) {
          opposite_hit = true;
          break;
        }
      }
    }
    if (opposite_hit) ++counts[3];  // IV: opposite polarity within foundation
    else ++counts[2];               // III: wrong foundation / other confusion
  }
  if (out.misclassified > 0) {
    const double m = static_cast<double>(out.misclassified);
    out.error_i = 100.0 * static_cast<double>(counts[0]) / m;
    out.error_ii = 100.0 * static_cast<double>(counts[1]) / m;
    out.error_iii = 100.0 * static_cast<double>(counts[2]) / m;
    out.error_iv = 100.0 * static_cast<double>(counts[3]) / m;
  }
  return out;
}

}  // namespace moral
