#include "moral/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "moral/error.hpp"

namespace moral {

namespace {

constexpr double kPowerTol = 1e-9;
constexpr int kPowerMaxIters = 1000;

// Largest eigenpair of the symmetric matrix a by power iteration, starting
// from a deterministic direction. Returns eigenvalue 0 and a basis vector
// orthogonal to `orthogonal_to` when a is (numerically) zero on the start.
std::pair<double, std::vector<double>> power_iteration(const Matrix& a,
                                                       const std::vector<double>* orthogonal_to) {
  const std::size_t d = a.rows();
  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  if (orthogonal_to) {
    const double proj = dot(v, *orthogonal_to);
    for (std::size_t i = 0; i < d; ++i) v[i] -= proj * (*orthogonal_to)[i];
    double n = norm2(v);
    if (n < 1e-12) {
      // Start direction happened to be parallel; fall back to a basis axis.
      for (std::size_t axis = 0; axis < d; ++axis) {
        std::fill(v.begin(), v.end(), 0.0);
        v[axis] = 1.0;
        const double p = dot(v, *orthogonal_to);
        for (std::size_t i = 0; i < d; ++i) v[i] -= p * (*orthogonal_to)[i];
        n = norm2(v);
        if (n >= 1e-12) break;
      }
    }
    for (double& x : v) x /= n;
  }

  double eigenvalue = 0.0;
  std::vector<double> next(d);
  for (int iter = 0; iter < kPowerMaxIters; ++iter) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(d); ++r)
      next[static_cast<std::size_t>(r)] = dot(a.row(static_cast<std::size_t>(r)), v);
    if (orthogonal_to) {
      const double proj = dot(next, *orthogonal_to);
      for (std::size_t i = 0; i < d; ++i) next[i] -= proj * (*orthogonal_to)[i];
    }
    const double n = norm2(next);
    if (n < 1e-300) return {0.0, v};  // zero (deflated) operator
    double delta = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      next[i] /= n;
      delta = std::max(delta, std::abs(next[i] - v[i]));
    }
    // Sign-insensitive convergence: compare against -next as well.
    double delta_flipped = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      delta_flipped = std::max(delta_flipped, std::abs(-next[i] - v[i]));
    v = next;
    eigenvalue = n;
    if (std::min(delta, delta_flipped) < kPowerTol) break;
  }
  return {eigenvalue, v};
}

void apply_sign_convention(std::vector<double>& axis) {
  std::size_t arg = 0;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (std::abs(axis[i]) > std::abs(axis[arg])) arg = i;
  }
  if (axis[arg] < 0.0) {
    for (double& x : axis) x = -x;
  }
}

std::string format_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Nine-step light-to-dark blue ramp, linear in value; darker = higher.
std::string ramp_color(double v, double lo, double hi) {
  static constexpr std::array<const char*, 9> kRamp = {
      "#f7fbff", "#deebf7", "#c6dbef", "#9ecae1", "#6baed6",
      "#4292c6", "#2171b5", "#08519c", "#08306b"};
  double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const auto step = std::min<std::size_t>(8, static_cast<std::size_t>(t * 9.0));
  return kRamp[step];
}

// Fixed colors per label index, non-moral last (gray).
std::string label_color(const Label& l) {
  static constexpr std::array<const char*, 11> kColors = {
      "#1f77b4", "#aec7e8", "#2ca02c", "#98df8a", "#9467bd", "#c5b0d5",
      "#ff7f0e", "#ffbb78", "#d62728", "#ff9896", "#7f7f7f"};
  if (l.is_non_moral()) return kColors[10];
  if (l.scheme() == LabelScheme::Elements11) return kColors[l.index()];
  return kColors[static_cast<std::size_t>(l.index()) * 2];
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write file: " + path.string());
  return out;
}

}  // namespace

Projection2D pca2d(const EmbeddingStore& store) {
  if (store.size() < 3) throw data_error("pca2d: needs >= 3 vectors");
  if (store.dim() < 2) throw data_error("pca2d: needs dimension >= 2");

  const std::vector<std::string> ids = store.ids();
  const Matrix x = store.align(ids);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= static_cast<double>(n);

  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = x.row(i);
    auto dst = centered.row(i);
    for (std::size_t c = 0; c < d; ++c) dst[c] = src[c] - mean[c];
  }

  // Covariance (times n); rows are independent work items.
  Matrix cov(d, d);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t aa = 0; aa < static_cast<std::ptrdiff_t>(d); ++aa) {
    const auto a = static_cast<std::size_t>(aa);
    for (std::size_t b = a; b < d; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += centered(i, a) * centered(i, b);
      cov(a, b) = s;
      cov(b, a) = s;
    }
  }

  double total_variance = 0.0;
  for (std::size_t c = 0; c < d; ++c) total_variance += cov(c, c);
  if (total_variance <= 0.0) throw data_error("pca2d: all points are identical (rank-0 data)");

  auto [lambda1, axis1] = power_iteration(cov, nullptr);
  apply_sign_convention(axis1);
  auto [lambda2, axis2] = power_iteration(cov, &axis1);
  apply_sign_convention(axis2);

  Projection2D proj;
  proj.explained_variance = {lambda1 / total_variance, lambda2 / total_variance};
  proj.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = centered.row(i);
    proj.points.emplace_back(ids[i], std::array<double, 2>{dot(row, axis1), dot(row, axis2)});
  }
  return proj;
}

void emit_heatmap(const MoralSimilarityMatrix& matrix, const std::filesystem::path& svg_path) {
  const std::size_t g = matrix.labels.size();
  if (g == 0) throw data_error("emit_heatmap: empty matrix");

  write_similarity_csv(matrix, std::filesystem::path(svg_path).replace_extension(".csv"));

  double lo = matrix.values(0, 0), hi = matrix.values(0, 0);
  for (double v : matrix.values.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  constexpr int kCell = 48;
  constexpr int kMargin = 110;
  const int size = kMargin + static_cast<int>(g) * kCell + 10;

  auto out = open_out(svg_path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  out << "<style>text{font-family:monospace;font-size:11px;}</style>\n";
  for (std::size_t r = 0; r < g; ++r) {
    out << "<text x=\"" << kMargin - 6 << "\" y=\"" << kMargin + r * kCell + kCell / 2 + 4
        << "\" text-anchor=\"end\">" << xml_escape(matrix.labels[r].name()) << "</text>\n";
    out << "<text x=\"" << kMargin + r * kCell + kCell / 2 << "\" y=\"" << kMargin - 8
        << "\" text-anchor=\"start\" transform=\"rotate(-60 "
        << kMargin + r * kCell + kCell / 2 << " " << kMargin - 8 << ")\">"
        << xml_escape(matrix.labels[r].name()) << "</text>\n";
  }
  for (std::size_t r = 0; r < g; ++r) {
    for (std::size_t c = 0; c < g; ++c) {
      const double v = matrix.values(r, c);
      const std::string fill = ramp_color(v, lo, hi);
      const int x = kMargin + static_cast<int>(c) * kCell;
      const int y = kMargin + static_cast<int>(r) * kCell;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCell << "\" height=\""
          << kCell << "\" fill=\"" << fill << "\" stroke=\"white\"/>\n";
      const bool dark = (v - lo) > 0.6 * (hi - lo);
      out << "<text x=\"" << x + kCell / 2 << "\" y=\"" << y + kCell / 2 + 4
          << "\" text-anchor=\"middle\" fill=\"" << (dark ? "#f1f1f1" : "#000000") << "\">"
          << format_num(std::round(v * 10.0) / 10.0) << "</text>\n";
    }
  }
  out << "</svg>\n";
}

void emit_scatter(const Projection2D& projection, const std::map<std::string, Label>& labels,
                  const std::filesystem::path& svg_path) {
  if (projection.points.empty()) throw data_error("emit_scatter: empty projection");

  {
    auto csv = open_out(std::filesystem::path(svg_path).replace_extension(".csv"));
    csv << "id,x,y,label\r\n";
    for (const auto& [id, xy] : projection.points) {
      const auto it = labels.find(id);
      csv << id << ',' << format_num(xy[0]) << ',' << format_num(xy[1]) << ','
          << (it != labels.end() ? it->second.name() : std::string_view("")) << "\r\n";
    }
  }

  double xlo = projection.points[0].second[0], xhi = xlo;
  double ylo = projection.points[0].second[1], yhi = ylo;
  for (const auto& [id, xy] : projection.points) {
    xlo = std::min(xlo, xy[0]);
    xhi = std::max(xhi, xy[0]);
    ylo = std::min(ylo, xy[1]);
    yhi = std::max(yhi, xy[1]);
  }
  const double xspan = xhi > xlo ? xhi - xlo : 1.0;
  const double yspan = yhi > ylo ? yhi - ylo : 1.0;

  constexpr int kPlot = 640;
  constexpr int kPad = 40;
  constexpr int kLegend = 150;
  const int width = kPlot + 2 * kPad + kLegend;
  const int height = kPlot + 2 * kPad;

  auto out = open_out(svg_path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<style>text{font-family:monospace;font-size:11px;}</style>\n";
  out << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kPlot << "\" height=\""
      << kPlot << "\" fill=\"#fcfcfc\" stroke=\"#cccccc\"/>\n";

  std::map<std::uint8_t, Label> seen;
  for (const auto& [id, xy] : projection.points) {
    const auto it = labels.find(id);
    const std::string color = it != labels.end() ? label_color(it->second) : "#bbbbbb";
    if (it != labels.end()) seen.emplace(it->second.index(), it->second);
    const double px = kPad + (xy[0] - xlo) / xspan * kPlot;
    const double py = kPad + kPlot - (xy[1] - ylo) / yspan * kPlot;
    out << "<circle cx=\"" << format_num(px) << "\" cy=\"" << format_num(py)
        << "\" r=\"3\" fill=\"" << color << "\" fill-opacity=\"0.75\"/>\n";
  }

  int ly = kPad + 10;
  for (const auto& [idx, label] : seen) {
    out << "<circle cx=\"" << kPad + kPlot + 20 << "\" cy=\"" << ly << "\" r=\"4\" fill=\""
        << label_color(label) << "\"/>\n";
    out << "<text x=\"" << kPad + kPlot + 30 << "\" y=\"" << ly + 4 << "\">"
        << xml_escape(label.name()) << "</text>\n";
    ly += 18;
  }
  out << "<text x=\"" << kPad << "\" y=\"" << height - 10 << "\">explained variance: "
      << format_num(projection.explained_variance[0]) << ", "
      << format_num(projection.explained_variance[1]) << "</text>\n";
  out << "</svg>\n";
}

void emit_metrics(const nlohmann::json& bundle, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << bundle.dump(2) << "\n";
}

}  // namespace moral
