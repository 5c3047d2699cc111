#include "moral/triples.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "moral/error.hpp"
#include "moral/rng.hpp"

namespace moral {

std::string_view policy_name(TriplePolicy p) {
  return p == TriplePolicy::Opposite ? "opposite" : "outside";
}

namespace {

// Greedy matcher state over one corpus. Documents are grouped by exact
// label-set bits; groups keep their members sorted by id so "smallest id"
// tie-breaks are a front scan.
class TriplePool {
 public:
  TriplePool(const Corpus& corpus, LabelScheme scheme) : scheme_(scheme) {
    docs_.reserve(corpus.documents.size());
    for (const Document& d : corpus.documents) {
      const LabelSet resolved =
          scheme == LabelScheme::Elements11 ? d.resolved : to_foundation_scheme(d.resolved);
      docs_.push_back({d.id, resolved});
    }
    used_.assign(docs_.size(), false);

    std::vector<std::size_t> order(docs_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return docs_[a].id < docs_[b].id; });
    for (std::size_t i : order) groups_[docs_[i].resolved.bits()].push_back(i);
  }

  const LabelSet& resolved(std::size_t doc) const { return docs_[doc].resolved; }
  const std::string& id(std::size_t doc) const { return docs_[doc].id; }
  bool used(std::size_t doc) const { return used_[doc]; }
  void mark_used(std::size_t doc) { used_[doc] = true; }
  void mark_free(std::size_t doc) { used_[doc] = false; }
  std::size_t size() const { return docs_.size(); }

  std::uint16_t non_moral_bit() const {
    return static_cast<std::uint16_t>(1u << non_moral_index(scheme_));
  }

  // Smallest-id unused document with exactly these label bits.
  std::optional<std::size_t> exact_match(std::uint16_t bits, std::size_t exclude) const {
    const auto it = groups_.find(bits);
    if (it == groups_.end()) return std::nullopt;
    for (std::size_t doc : it->second) {
      if (!used_[doc] && doc != exclude) return doc;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> non_moral_fallback() const {
    return exact_match(non_moral_bit(), docs_.size());
  }

  // Best unused negative for target set T: the first pass requires the
  // label set to be a subset of T; the relaxation pass accepts >= 1 label
  // in T. Both passes demand disjointness from the reference (under
  // Opposite, a polarity-mixed reference like {care, harm} makes T overlap
  // the reference itself). Ranking is max |labels ∩ T|, then fewer total
  // labels, then smallest id.
  std::optional<std::size_t> best_negative(std::uint16_t target_bits,
                                           std::uint16_t reference_bits) const {
    const auto pick = [&](bool relaxed) -> std::optional<std::size_t> {
      std::optional<std::size_t> best;
      int best_overlap = -1;
      int best_total = 0;
      for (const auto& [bits, members] : groups_) {
        if (bits == non_moral_bit()) continue;
        const int overlap = std::popcount(static_cast<unsigned>(bits & target_bits));
        if (overlap == 0) continue;
        if ((bits & reference_bits) != 0) continue;
        if (!relaxed && (bits & ~target_bits) != 0) continue;
        const int total = std::popcount(static_cast<unsigned>(bits));
        if (best) {
          if (overlap < best_overlap) continue;
          if (overlap == best_overlap && total > best_total) continue;
        }
        std::optional<std::size_t> candidate;
        for (std::size_t doc : members) {
          if (!used_[doc]) {
            candidate = doc;
            break;
          }
        }
        if (!candidate) continue;
        if (!best || overlap > best_overlap ||
            (overlap == best_overlap && total < best_total) ||
            (overlap == best_overlap && total == best_total && id(*candidate) < id(*best))) {
          best = candidate;
          best_overlap = overlap;
          best_total = total;
        }
      }
      return best;
    };
    if (auto strict = pick(false)) return strict;
    return pick(true);
  }

 private:
  struct Doc {
    std::string id;
    LabelSet resolved;
  };

  LabelScheme scheme_;
  std::vector<Doc> docs_;
  std::vector<bool> used_;
  std::map<std::uint16_t, std::vector<std::size_t>> groups_;
};

// Target label bits per policy for a reference set.
std::uint16_t target_bits_for(const LabelSet& reference, TriplePolicy policy, LabelScheme scheme) {
  if (scheme == LabelScheme::Foundations6) {
    // Foundations variant: every foundation absent from the reference.
    std::uint16_t all = static_cast<std::uint16_t>((1u << kFoundationCount) - 1);
    return static_cast<std::uint16_t>(all & ~reference.bits());
  }
  if (policy == TriplePolicy::Opposite) {
    LabelSet t(LabelScheme::Elements11);
    for (const Label& l : reference.labels()) {
      if (l.is_moral()) t.insert(Label::element(l.as_element().opposite()));
    }
    return t.bits();
  }
  const FoundationSet covered = foundations_of(reference);
  LabelSet t(LabelScheme::Elements11);
  for (const MoralElement& e : all_elements()) {
    if (!covered.contains(e.foundation)) t.insert(Label::element(e));
  }
  return t.bits();
}

void run_policy(TriplePool& pool, const std::vector<std::size_t>& references,
                TriplePolicy policy, LabelScheme scheme, TripleBuildReport& report) {
  for (std::size_t ref : references) {
    if (pool.used(ref)) continue;
    const LabelSet& ref_set = pool.resolved(ref);

    Triple triple;
    triple.policy = policy;
    triple.reference_id = pool.id(ref);
    pool.mark_used(ref);

    auto positive = pool.exact_match(ref_set.bits(), ref);
    if (!positive) {
      positive = pool.non_moral_fallback();
      triple.positive_is_fallback = positive.has_value();
    }
    if (!positive) {
      pool.mark_free(ref);
      continue;
    }
    pool.mark_used(*positive);
    triple.positive_id = pool.id(*positive);

    const std::uint16_t target = target_bits_for(ref_set, policy, scheme);
    std::optional<std::size_t> negative;
    if (target != 0) negative = pool.best_negative(target, ref_set.bits());
    if (!negative) {
      negative = pool.non_moral_fallback();
      triple.negative_is_fallback = negative.has_value();
    }
    if (!negative) {
      pool.mark_free(ref);
      pool.mark_free(*positive);
      continue;
    }
    pool.mark_used(*negative);
    triple.negative_id = pool.id(*negative);

    if (triple.positive_is_fallback) ++report.positive_fallbacks;
    if (triple.negative_is_fallback) ++report.negative_fallbacks;
    if (policy == TriplePolicy::Opposite) ++report.opposite_count;
    else ++report.outside_count;
    report.triples.push_back(std::move(triple));
  }
}

std::vector<std::size_t> shuffled_moral_indices(const TriplePool& pool, std::uint64_t seed) {
  std::vector<std::size_t> moral;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool.resolved(i).has_moral()) moral.push_back(i);
  }
  if (moral.empty()) throw data_error("build_triples: no morally-loaded documents");
  Rng rng(seed);
  rng.shuffle(moral);
  return moral;
}

TripleBuildReport build_impl(const Corpus& train, LabelScheme scheme,
                             std::optional<TriplePolicy> single_policy, std::uint64_t seed) {
  TriplePool pool(train, scheme);
  const std::vector<std::size_t> moral = shuffled_moral_indices(pool, seed);

  TripleBuildReport report;
  if (single_policy) {
    run_policy(pool, moral, *single_policy, scheme, report);
  } else {
    const std::size_t opposite_half = (moral.size() + 1) / 2;  // odd extra to Opposite
    const std::vector<std::size_t> first(moral.begin(), moral.begin() + opposite_half);
    const std::vector<std::size_t> second(moral.begin() + opposite_half, moral.end());
    run_policy(pool, first, TriplePolicy::Opposite, scheme, report);
    run_policy(pool, second, TriplePolicy::Outside, scheme, report);
  }

  // A reference that found no triple stays free and may still be consumed
  // as a later triple's candidate, so leftovers are settled only now.
  for (std::size_t i : moral) {
    if (!pool.used(i)) report.unused_moral_ids.push_back(pool.id(i));
  }
  std::sort(report.unused_moral_ids.begin(), report.unused_moral_ids.end());
  return report;
}

}  // namespace

TripleBuildReport build_triples(const Corpus& train, std::uint64_t seed) {
  return build_impl(train, LabelScheme::Elements11, std::nullopt, seed);
}

TripleBuildReport build_triples_with_policy(const Corpus& train, TriplePolicy policy,
                                            std::uint64_t seed) {
  return build_impl(train, LabelScheme::Elements11, policy, seed);
}

TripleBuildReport build_triples_foundations(const Corpus& train, std::uint64_t seed) {
  return build_impl(train, LabelScheme::Foundations6, TriplePolicy::Outside, seed);
}

void write_triples_csv(const TripleBuildReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write triples csv: " + path.string());
  out << "reference_id,positive_id,negative_id,policy,pos_fallback,neg_fallback\r\n";
  for (const Triple& t : report.triples) {
    out << t.reference_id << ',' << t.positive_id << ',' << t.negative_id << ','
        << policy_name(t.policy) << ',' << (t.positive_is_fallback ? 1 : 0) << ','
        << (t.negative_is_fallback ? 1 : 0) << "\r\n";
  }
}

TripleBuildReport load_triples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open triples csv: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw data_error(path.string() + ": empty triples csv");

  TripleBuildReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6)
      throw data_error(path.string() + " line " + std::to_string(line_no) +
                       ": expected 6 fields");
    Triple t;
    t.reference_id = fields[0];
    t.positive_id = fields[1];
    t.negative_id = fields[2];
    if (fields[3] == "opposite") t.policy = TriplePolicy::Opposite;
    else if (fields[3] == "outside") t.policy = TriplePolicy::Outside;
    else
      throw data_error(path.string() + " line " + std::to_string(line_no) +
                       ": unknown policy '" + fields[3] + "'");
    t.positive_is_fallback = fields[4] == "1";
    t.negative_is_fallback = fields[5] == "1";
    if (t.policy == TriplePolicy::Opposite) ++report.opposite_count;
    else ++report.outside_count;
    if (t.positive_is_fallback) ++report.positive_fallbacks;
    if (t.negative_is_fallback) ++report.negative_fallbacks;
    report.triples.push_back(std::move(t));
  }
  return report;
}

}  // namespace moral
