#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moral {

// The five moral foundations, each a virtue/vice pair, plus a distinguished
// non-moral marker. Canonical element order interleaves virtue before vice
// per foundation: care, harm, fairness, cheating, loyalty, betrayal,
// authority, subversion, purity, degradation; non-moral sorts last. All
// serialized matrices and CSVs use this order.

enum class Foundation : std::uint8_t { Care = 0, Fairness, Loyalty, Authority, Purity };
enum class Polarity : std::uint8_t { Virtue = 0, Vice };

inline constexpr std::size_t kFoundationCount = 5;
inline constexpr std::size_t kElementCount = 10;

struct MoralElement {
  Foundation foundation;
  Polarity polarity;

  constexpr std::uint8_t index() const {
    return static_cast<std::uint8_t>(static_cast<std::uint8_t>(foundation) * 2 +
                                     (polarity == Polarity::Vice ? 1 : 0));
  }
  static constexpr MoralElement from_index(std::uint8_t idx) {
    return {static_cast<Foundation>(idx / 2),
            (idx % 2 == 0) ? Polarity::Virtue : Polarity::Vice};
  }
  constexpr MoralElement opposite() const {
    return {foundation, polarity == Polarity::Virtue ? Polarity::Vice : Polarity::Virtue};
  }
  std::string_view name() const;

  auto operator<=>(const MoralElement&) const = default;
};

constexpr std::array<MoralElement, kElementCount> all_elements() {
  std::array<MoralElement, kElementCount> out{};
  for (std::uint8_t i = 0; i < kElementCount; ++i) out[i] = MoralElement::from_index(i);
  return out;
}

inline constexpr MoralElement opposite_of(MoralElement e) { return e.opposite(); }

std::string_view foundation_name(Foundation f);

// Two label schemes share one Label type: the 11-way element scheme
// (10 elements + non-moral) and the 6-way foundation scheme used by the
// foundations-only training and classification variants.
enum class LabelScheme : std::uint8_t { Elements11 = 0, Foundations6 };

inline constexpr std::size_t scheme_size(LabelScheme s) {
  return s == LabelScheme::Elements11 ? 11 : 6;
}
inline constexpr std::uint8_t non_moral_index(LabelScheme s) {
  return s == LabelScheme::Elements11 ? 10 : 5;
}

class Label {
 public:
  constexpr Label() : scheme_(LabelScheme::Elements11), index_(non_moral_index(LabelScheme::Elements11)) {}
  constexpr Label(LabelScheme scheme, std::uint8_t index) : scheme_(scheme), index_(index) {}

  static constexpr Label element(MoralElement e) { return {LabelScheme::Elements11, e.index()}; }
  static constexpr Label foundation(Foundation f) {
    return {LabelScheme::Foundations6, static_cast<std::uint8_t>(f)};
  }
  static constexpr Label non_moral(LabelScheme s = LabelScheme::Elements11) {
    return {s, non_moral_index(s)};
  }

  constexpr LabelScheme scheme() const { return scheme_; }
  constexpr std::uint8_t index() const { return index_; }
  constexpr bool is_non_moral() const { return index_ == non_moral_index(scheme_); }
  constexpr bool is_moral() const { return !is_non_moral(); }

  // Valid only for moral labels in the element scheme.
  constexpr MoralElement as_element() const { return MoralElement::from_index(index_); }
  // Valid only for moral labels; in the element scheme this is the
  // element's foundation.
  constexpr Foundation as_foundation() const {
    return scheme_ == LabelScheme::Elements11 ? as_element().foundation
                                              : static_cast<Foundation>(index_);
  }

  std::string_view name() const;
  static std::optional<Label> parse(std::string_view text,
                                    LabelScheme scheme = LabelScheme::Elements11);

  auto operator<=>(const Label&) const = default;

 private:
  LabelScheme scheme_;
  std::uint8_t index_;
};

// Small set of Labels under one scheme, stored as a bitmask and iterated in
// canonical order. Annotation data additionally requires non-moral to be
// exclusive; that is enforced at parse time (see corpus), not here, because
// classifier predictions may legitimately mix non-moral with moral labels.
class LabelSet {
 public:
  explicit constexpr LabelSet(LabelScheme scheme = LabelScheme::Elements11)
      : scheme_(scheme) {}

  static LabelSet of(std::initializer_list<Label> labels);

  constexpr LabelScheme scheme() const { return scheme_; }
  constexpr std::uint16_t bits() const { return bits_; }
  static constexpr LabelSet from_bits(LabelScheme scheme, std::uint16_t bits) {
    LabelSet s(scheme);
    s.bits_ = bits;
    return s;
  }

  void insert(Label l);
  bool contains(Label l) const;
  std::size_t size() const;
  bool empty() const { return bits_ == 0; }

  bool has_moral() const;
  // True when the set is exactly {non-moral}.
  bool is_pure_non_moral() const;

  std::vector<Label> labels() const;
  std::string to_string() const;  // comma-joined canonical names

  auto operator<=>(const LabelSet&) const = default;

 private:
  LabelScheme scheme_;
  std::uint16_t bits_ = 0;
};

// Set of foundations carried by the moral elements of a label set.
struct FoundationSet {
  std::uint8_t bits = 0;

  bool contains(Foundation f) const { return bits & (1u << static_cast<std::uint8_t>(f)); }
  void insert(Foundation f) { bits |= static_cast<std::uint8_t>(1u << static_cast<std::uint8_t>(f)); }
  std::size_t count() const;
  std::vector<Foundation> to_vector() const;

  auto operator<=>(const FoundationSet&) const = default;
};

// Foundations of all moral elements in s; empty for {non-moral} or the
// empty set. Requires the element scheme.
FoundationSet foundations_of(const LabelSet& s);

// All elements whose foundation is absent from s's foundations. Errors when
// s carries no moral element (no reference foundations exist).
LabelSet outside_elements(const LabelSet& s);

// Collapse each element to its foundation label; non-moral is preserved.
LabelSet to_foundation_scheme(const LabelSet& s);

}  // namespace moral
