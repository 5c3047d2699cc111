#include "moral/taxonomy.hpp"

#include <bit>

#include "moral/error.hpp"

namespace moral {

namespace {

constexpr std::array<std::string_view, kElementCount> kElementNames = {
    "care",      "harm",       "fairness", "cheating",   "loyalty",
    "betrayal",  "authority",  "subversion", "purity",   "degradation"};

constexpr std::array<std::string_view, kFoundationCount> kFoundationNames = {
    "care", "fairness", "loyalty", "authority", "purity"};

constexpr std::string_view kNonMoralName = "non-moral";

}  // namespace

std::string_view MoralElement::name() const { return kElementNames[index()]; }

std::string_view foundation_name(Foundation f) {
  return kFoundationNames[static_cast<std::uint8_t>(f)];
}

std::string_view Label::name() const {
  if (is_non_moral()) return kNonMoralName;
  if (scheme_ == LabelScheme::Elements11) return kElementNames[index_];
  return kFoundationNames[index_];
}

std::optional<Label> Label::parse(std::string_view text, LabelScheme scheme) {
  if (text == kNonMoralName) return Label::non_moral(scheme);
  if (scheme == LabelScheme::Elements11) {
    for (std::uint8_t i = 0; i < kElementCount; ++i) {
      if (kElementNames[i] == text) return Label(scheme, i);
    }
  } else {
    for (std::uint8_t i = 0; i < kFoundationCount; ++i) {
      if (kFoundationNames[i] == text) return Label(scheme, i);
    }
  }
  return std::nullopt;
}

LabelSet LabelSet::of(std::initializer_list<Label> labels) {
  LabelSet s(labels.size() ? labels.begin()->scheme() : LabelScheme::Elements11);
  for (const Label& l : labels) s.insert(l);
  return s;
}

void LabelSet::insert(Label l) {
  if (l.scheme() != scheme_) throw data_error("label scheme mismatch on insert");
  bits_ |= static_cast<std::uint16_t>(1u << l.index());
}

bool LabelSet::contains(Label l) const {
  return l.scheme() == scheme_ && (bits_ & (1u << l.index()));
}

std::size_t LabelSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

bool LabelSet::has_moral() const {
  const std::uint16_t moral_mask =
      static_cast<std::uint16_t>((1u << non_moral_index(scheme_)) - 1);
  return (bits_ & moral_mask) != 0;
}

bool LabelSet::is_pure_non_moral() const {
  return bits_ == (1u << non_moral_index(scheme_));
}

std::vector<Label> LabelSet::labels() const {
  std::vector<Label> out;
  for (std::uint8_t i = 0; i < scheme_size(scheme_); ++i) {
    if (bits_ & (1u << i)) out.emplace_back(scheme_, i);
  }
  return out;
}

std::string LabelSet::to_string() const {
  std::string out;
  for (const Label& l : labels()) {
    if (!out.empty()) out += ",";
    out += l.name();
  }
  return out;
}

std::size_t FoundationSet::count() const { return static_cast<std::size_t>(std::popcount(bits)); }

std::vector<Foundation> FoundationSet::to_vector() const {
  std::vector<Foundation> out;
  for (std::uint8_t i = 0; i < kFoundationCount; ++i) {
    if (bits & (1u << i)) out.push_back(static_cast<Foundation>(i));
  }
  return out;
}

FoundationSet foundations_of(const LabelSet& s) {
  if (s.scheme() != LabelScheme::Elements11)
    throw data_error("foundations_of requires the 11-label element scheme");
  FoundationSet f;
  for (const Label& l : s.labels()) {
    if (l.is_moral()) f.insert(l.as_element().foundation);
  }
  return f;
}

LabelSet outside_elements(const LabelSet& s) {
  const FoundationSet covered = foundations_of(s);
  if (covered.bits == 0)
    throw data_error("outside_elements: label set carries no moral element");
  LabelSet out(LabelScheme::Elements11);
  for (const MoralElement& e : all_elements()) {
    if (!covered.contains(e.foundation)) out.insert(Label::element(e));
  }
  return out;
}

LabelSet to_foundation_scheme(const LabelSet& s) {
  if (s.scheme() != LabelScheme::Elements11)
    throw data_error("to_foundation_scheme requires the 11-label element scheme");
  LabelSet out(LabelScheme::Foundations6);
  for (const Label& l : s.labels()) {
    if (l.is_non_moral()) {
      out.insert(Label::non_moral(LabelScheme::Foundations6));
    } else {
      out.insert(Label::foundation(l.as_element().foundation));
    }
  }
  return out;
}

}  // namespace moral
