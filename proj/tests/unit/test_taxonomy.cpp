#include <doctest.h>

#include "moral/error.hpp"
#include "moral/taxonomy.hpp"

using namespace moral;

TEST_CASE("ten distinct elements, canonical order") {
  const auto elements = all_elements();
  CHECK(elements.size() == 10);
  CHECK(elements[0].name() == "care");
  CHECK(elements[1].name() == "harm");
  CHECK(elements[2].name() == "fairness");
  CHECK(elements[3].name() == "cheating");
  CHECK(elements[4].name() == "loyalty");
  CHECK(elements[5].name() == "betrayal");
  CHECK(elements[6].name() == "authority");
  CHECK(elements[7].name() == "subversion");
  CHECK(elements[8].name() == "purity");
  CHECK(elements[9].name() == "degradation");
  for (std::uint8_t i = 0; i < 10; ++i) CHECK(elements[i].index() == i);
}

TEST_CASE("opposite_of flips polarity within the foundation") {
  const MoralElement harm{Foundation::Care, Polarity::Vice};
  const MoralElement care{Foundation::Care, Polarity::Virtue};
  CHECK(opposite_of(harm) == care);
  CHECK(opposite_of(care) == harm);
  const MoralElement purity{Foundation::Purity, Polarity::Virtue};
  CHECK(opposite_of(purity).name() == "degradation");

  for (const MoralElement& e : all_elements()) {
    CHECK(opposite_of(opposite_of(e)) == e);
    CHECK(opposite_of(e).foundation == e.foundation);
    CHECK(opposite_of(e).polarity != e.polarity);
  }
}

TEST_CASE("label parsing round-trips all 11 names") {
  int count = 0;
  for (const char* name : {"care", "harm", "fairness", "cheating", "loyalty", "betrayal",
                           "authority", "subversion", "purity", "degradation", "non-moral"}) {
    const auto label = Label::parse(name);
    REQUIRE(label.has_value());
    CHECK(label->name() == name);
    ++count;
  }
  CHECK(count == 11);
  CHECK(!Label::parse("caare").has_value());
  CHECK(!Label::parse("Care").has_value());
}

TEST_CASE("foundations_of") {
  const auto harm_betrayal = LabelSet::of({Label::parse("harm").value(), Label::parse("betrayal").value()});
  const auto f = foundations_of(harm_betrayal);
  CHECK(f.count() == 2);
  CHECK(f.contains(Foundation::Care));
  CHECK(f.contains(Foundation::Loyalty));

  CHECK(foundations_of(LabelSet::of({Label::non_moral()})).count() == 0);

  const auto care_harm = LabelSet::of({Label::parse("care").value(), Label::parse("harm").value()});
  CHECK(foundations_of(care_harm).count() == 1);
}

TEST_CASE("outside_elements") {
  const auto harm_betrayal = LabelSet::of({Label::parse("harm").value(), Label::parse("betrayal").value()});
  const auto outside = outside_elements(harm_betrayal);
  CHECK(outside.size() == 6);
  CHECK(outside.contains(Label::parse("cheating").value()));
  CHECK(outside.contains(Label::parse("purity").value()));
  CHECK(!outside.contains(Label::parse("care").value()));
  CHECK(!outside.contains(Label::parse("loyalty").value()));

  const auto all_five = LabelSet::of({Label::parse("care").value(), Label::parse("fairness").value(),
                                      Label::parse("loyalty").value(), Label::parse("authority").value(),
                                      Label::parse("purity").value()});
  CHECK(outside_elements(all_five).size() == 0);

  const auto degradation = LabelSet::of({Label::parse("degradation").value()});
  CHECK(outside_elements(degradation).size() == 8);

  CHECK_THROWS_AS(outside_elements(LabelSet::of({Label::non_moral()})), data_error);
  CHECK_THROWS_AS(outside_elements(LabelSet(LabelScheme::Elements11)), data_error);
}

TEST_CASE("outside_elements properties over random sets") {
  // |outside| = 10 - 2 * |foundations|, and the result avoids both the set
  // and its opposites.
  for (std::uint16_t bits = 1; bits < (1u << 10); bits = static_cast<std::uint16_t>(bits * 3 + 1)) {
    const auto s = LabelSet::from_bits(LabelScheme::Elements11, static_cast<std::uint16_t>(bits & 0x3ff));
    if (!s.has_moral()) continue;
    const auto outside = outside_elements(s);
    CHECK(outside.size() == 10 - 2 * foundations_of(s).count());
    for (const Label& l : s.labels()) {
      CHECK(!outside.contains(l));
      CHECK(!outside.contains(Label::element(l.as_element().opposite())));
    }
  }
}

TEST_CASE("to_foundation_scheme") {
  const auto care_harm = LabelSet::of({Label::parse("care").value(), Label::parse("harm").value()});
  const auto folded = to_foundation_scheme(care_harm);
  CHECK(folded.scheme() == LabelScheme::Foundations6);
  CHECK(folded.size() == 1);
  CHECK(folded.contains(Label::foundation(Foundation::Care)));

  const auto nm = to_foundation_scheme(LabelSet::of({Label::non_moral()}));
  CHECK(nm.is_pure_non_moral());
  CHECK(nm.size() == 1);

  const auto harm_betrayal = LabelSet::of({Label::parse("harm").value(), Label::parse("betrayal").value()});
  const auto hb = to_foundation_scheme(harm_betrayal);
  CHECK(hb.size() == 2);
  CHECK(hb.contains(Label::foundation(Foundation::Care)));
  CHECK(hb.contains(Label::foundation(Foundation::Loyalty)));
}

TEST_CASE("label set canonical ordering and serialization names") {
  LabelSet s(LabelScheme::Elements11);
  s.insert(Label::parse("purity").value());
  s.insert(Label::parse("care").value());
  s.insert(Label::parse("betrayal").value());
  CHECK(s.to_string() == "care,betrayal,purity");
}
