#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moral/corpus.hpp"
#include "moral/taxonomy.hpp"

namespace moral {

enum class TriplePolicy : std::uint8_t { Opposite, Outside };

std::string_view policy_name(TriplePolicy p);

// One supervised training unit. Unless flagged as fallback, the positive
// carries exactly the reference's label set and the negative satisfies the
// policy predicate for the reference.
struct Triple {
  std::string reference_id;
  std::string positive_id;
  std::string negative_id;
  TriplePolicy policy = TriplePolicy::Opposite;
  bool positive_is_fallback = false;
  bool negative_is_fallback = false;
};

struct TripleBuildReport {
  std::vector<Triple> triples;
  std::size_t opposite_count = 0;
  std::size_t outside_count = 0;
  std::size_t positive_fallbacks = 0;
  std::size_t negative_fallbacks = 0;
  // Morally-loaded documents left without a triple (no positive or negative
  // could be found, not even a non-moral fallback).
  std::vector<std::string> unused_moral_ids;
};

// Builds the supervised training set: morally-loaded documents are shuffled
// by seed and split into two halves (odd extra to Opposite); the first half
// runs the Opposite policy, the second the Outside policy. Each document is
// used in at most one triple across all roles; non-moral documents serve as
// positives or negatives when no suitable candidate exists. Errors when the
// corpus has no morally-loaded document.
TripleBuildReport build_triples(const Corpus& train, std::uint64_t seed);

// Same greedy construction with a single policy over all morally-loaded
// documents (the Fig-style micro-scenarios and policy studies use this).
TripleBuildReport build_triples_with_policy(const Corpus& train, TriplePolicy policy,
                                            std::uint64_t seed);

// Foundations-only variant on the 6-label scheme: the positive shares the
// reference's exact foundation set, the negative carries only foundations
// absent from it (reported under the Outside tag).
TripleBuildReport build_triples_foundations(const Corpus& train, std::uint64_t seed);

// CSV: reference_id,positive_id,negative_id,policy,pos_fallback,neg_fallback
void write_triples_csv(const TripleBuildReport& report, const std::filesystem::path& path);
TripleBuildReport load_triples_csv(const std::filesystem::path& path);

}  // namespace moral
