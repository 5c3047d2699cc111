#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "moral/taxonomy.hpp"

namespace moral {

// One corpus item: a text with per-annotator label sets and the label set
// resolved from them by majority vote.
struct Document {
  std::string id;
  std::string text;
  std::string domain;
  std::vector<LabelSet> annotator_labels;
  LabelSet resolved{LabelScheme::Elements11};
};

struct Corpus {
  std::vector<Document> documents;
  std::set<std::string> domains;
};

struct LexiconEntry {
  std::string word;
  MoralElement element;
};

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 42;
};

enum class MajorityRule : std::uint8_t { Strict, AtLeastHalf };

// A moral element wins iff strictly more than half the annotators listed it
// (or at least half under AtLeastHalf); when nothing wins the vote resolves
// to {non-moral}. Errors on an empty annotation list.
LabelSet majority_vote(const std::vector<LabelSet>& annotator_labels,
                       MajorityRule rule = MajorityRule::Strict);

// Resolve every document's label set in place.
void resolve_labels(Corpus& c, MajorityRule rule = MajorityRule::Strict);

// Merge documents with identical normalized text: annotator lists are
// concatenated, the resolved set is re-voted over the pooled annotators, and
// the lexicographically smallest constituent id (with its domain) survives.
Corpus collapse_duplicates(const Corpus& c, MajorityRule rule = MajorityRule::Strict);

// Dedup key: lowercased text with runs of whitespace collapsed to one space
// and ends trimmed. Corpus text arrives pre-normalized from the embedding
// provider, so no further Unicode folding is applied.
std::string normalize_text(std::string_view text);

// Per domain, round((1 - train_fraction) * n) documents go to test, chosen
// uniformly without replacement from the run seed; deterministic in
// (corpus, spec). Rounding is half-away-from-zero.
std::pair<Corpus, Corpus> stratified_split(const Corpus& c, const SplitSpec& spec);

// JSON-lines corpus: one object per line with keys id, text, domain,
// annotations (list of label-name lists). Malformed lines and unknown label
// names raise data_error with the line number.
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& c, const std::filesystem::path& path);

// Lexicon TSV: `word<TAB>element`, UTF-8, '#'-prefixed comment lines ignored.
std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path);

// Count of documents whose resolved set contains each label, in canonical
// label order (the shape of the corpus label-distribution table).
std::vector<std::pair<Label, std::size_t>> label_distribution(const Corpus& c);

struct TokenOverlapRow {
  std::string token;
  std::size_t freq_a = 0;
  std::size_t freq_b = 0;
};

// Lowercase alphanumeric tokens occurring in documents resolved to label a
// and in documents resolved to label b, ranked by min(freq_a, freq_b)
// descending, ties by token order; at most top_k rows.
std::vector<TokenOverlapRow> token_overlap_report(const Corpus& c, Label a, Label b,
                                                  std::size_t top_k);

// id -> sorted unique ids per resolved label, in canonical label order.
// Labels with no member documents are omitted.
std::vector<std::pair<Label, std::vector<std::string>>> label_groups(
    const Corpus& c, LabelScheme scheme = LabelScheme::Elements11);

}  // namespace moral
