#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "moral/corpus.hpp"
#include "moral/matrix.hpp"
#include "moral/rng.hpp"
#include "moral/taxonomy.hpp"

// Test-side oracles and generators. The loss oracles below are direct
// transcriptions of the objective formulas with no log-sum-exp rewrite and
// no shared code with the implementation they check.
namespace testsupport {

inline double oracle_cosine(std::span<const double> u, std::span<const double> v) {
  double uv = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  return uv / (std::sqrt(uu) * std::sqrt(vv));
}

inline double brute_sup_loss(const moral::Matrix& h, const moral::Matrix& hp,
                             const moral::Matrix& hn, double tau) {
  const std::size_t n = h.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double num = std::exp(oracle_cosine(h.row(i), hp.row(i)) / tau);
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      den += std::exp(oracle_cosine(h.row(i), hp.row(j)) / tau);
      den += std::exp(oracle_cosine(h.row(i), hn.row(j)) / tau);
    }
    total += -std::log(num / den);
  }
  return total / static_cast<double>(n);
}

inline double brute_unsup_loss(const moral::Matrix& hz, const moral::Matrix& hzp, double tau) {
  const std::size_t n = hz.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double num = std::exp(oracle_cosine(hz.row(i), hzp.row(i)) / tau);
    double den = 0.0;
    for (std::size_t j = 0; j < n; ++j) den += std::exp(oracle_cosine(hz.row(i), hzp.row(j)) / tau);
    total += -std::log(num / den);
  }
  return total / static_cast<double>(n);
}

inline moral::Matrix random_matrix(std::size_t rows, std::size_t cols, moral::Rng& rng,
                                   double scale = 1.0) {
  moral::Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal() * scale;
  return m;
}

// Guarded relative error for gradient checks.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Random label set under the parse-time invariant (non-moral exclusive).
inline moral::LabelSet random_label_set(moral::Rng& rng, double non_moral_prob = 0.3) {
  using namespace moral;
  if (rng.uniform01() < non_moral_prob) return LabelSet::of({Label::non_moral()});
  LabelSet s(LabelScheme::Elements11);
  const int count = 1 + static_cast<int>(rng.bounded(3));
  for (int i = 0; i < count; ++i)
    s.insert(Label::element(MoralElement::from_index(static_cast<std::uint8_t>(rng.bounded(10)))));
  return s;
}

inline moral::Corpus random_corpus(moral::Rng& rng, std::size_t n_docs,
                                   double non_moral_prob = 0.3) {
  moral::Corpus c;
  for (std::size_t i = 0; i < n_docs; ++i) {
    moral::Document d;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%04zu", i);
    d.id = buf;
    d.text = "text " + std::to_string(i);
    d.domain = "domain" + std::to_string(rng.bounded(3));
    d.resolved = random_label_set(rng, non_moral_prob);
    d.annotator_labels = {d.resolved, d.resolved, d.resolved};
    c.documents.push_back(std::move(d));
    c.domains.insert(c.documents.back().domain);
  }
  return c;
}

// Minimal well-formedness scan for the emitted SVG: XML declaration,
// balanced tags, quoted attribute values.
bool xml_well_formed(const std::string& content);

}  // namespace testsupport
