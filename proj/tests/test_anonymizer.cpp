#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "sdvc/anonymizer.hpp"
#include "sdvc/document.hpp"
#include "sdvc/text.hpp"

using namespace sdvc;

namespace {

std::string fixture(const char* name) {
  return std::string(SDVC_FIXTURE_DIR "/") + name;
}

Player make_player(const char* uid, const char* name) {
  Player p;
  p.uid = uid;
  p.name = name;
  return p;
}

// Two teams sharing the surname Silva, for disambiguation cases.
GameDocument silva_doc() {
  GameDocument doc;
  doc.game_id = "silvas";
  doc.teams[0].name = "City";
  doc.teams[1].name = "Madrid";
  doc.teams[0].players.push_back(make_player("d1", "David Silva"));
  doc.teams[1].players.push_back(make_player("t1", "Thiago Silva"));
  return doc;
}

}  // namespace

TEST_CASE("fixture captions reproduce exactly") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  for (const CaptionRecord& rec : doc.captions) {
    CAPTURE(rec.text_original);
    AnonymizeResult r = anonymize(rec.text_original, index);
    CHECK(r.identified == rec.text_identified);
    CHECK(r.anonymized == rec.text_anonymized);
    CHECK(r.unresolved.empty());
  }
}

TEST_CASE("anonymize_document rewrites every caption in place") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  GameDocument scrubbed = doc;
  for (CaptionRecord& rec : scrubbed.captions) {
    rec.text_identified.clear();
    rec.text_anonymized.clear();
  }
  EntityIndex index = build_entity_index(scrubbed);
  auto unresolved = anonymize_document(&scrubbed, index);
  REQUIRE(unresolved.size() == doc.captions.size());
  for (size_t i = 0; i < doc.captions.size(); ++i) {
    CHECK(scrubbed.captions[i].text_identified == doc.captions[i].text_identified);
    CHECK(scrubbed.captions[i].text_anonymized == doc.captions[i].text_anonymized);
    CHECK(unresolved[i].empty());
  }
}

TEST_CASE("anonymization is idempotent") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  for (const CaptionRecord& rec : doc.captions) {
    AnonymizeResult again = anonymize(rec.text_anonymized, index);
    CHECK(again.identified == rec.text_anonymized);
    CHECK(again.anonymized == rec.text_anonymized);
    CHECK(again.unresolved.empty());

    // Identified text is equally stable: placeholders are never re-matched.
    AnonymizeResult ident = anonymize(rec.text_identified, index);
    CHECK(ident.identified == rec.text_identified);
  }
}

TEST_CASE("anonymized output never leaks an index surface form") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  for (const CaptionRecord& rec : doc.captions) {
    AnonymizeResult r = anonymize(rec.text_original, index);
    auto folded = fold_codepoints(r.anonymized);
    for (const EntityEntry& e : index.entries) {
      for (const std::string& s : e.surface_forms) {
        CAPTURE(rec.text_original);
        CAPTURE(s);
        CHECK(find_word_occurrences(folded, fold_codepoints(s)).empty());
      }
    }
  }
}

TEST_CASE("fuzzy similarity scores") {
  CHECK(fuzzy_match("Sanchez", "S\xC3\xA1nchez") == 1.0);  // folding only
  CHECK(fuzzy_match("Kante", "Kant\xC3\xA9") == 1.0);
  CHECK(fuzzy_match("Oezil", "\xC3\x96zil") == doctest::Approx(0.8));
  CHECK(fuzzy_match("Mkhitarian", "Mkhitaryan") == doctest::Approx(0.9));
  CHECK(fuzzy_match("a hard", "Hazard") == doctest::Approx(0.5));
  CHECK(fuzzy_match("", "x") == doctest::Approx(0.0));
}

TEST_CASE("fuzzy tier auto-applies above the apply threshold") {
  GameDocument doc;
  doc.teams[0].name = "United";
  doc.teams[0].players.push_back(make_player("m1", "Henrikh Mkhitaryan"));
  EntityIndex index = build_entity_index(doc);

  AnonymizeResult r = anonymize("Mkhitarian scores!", index);
  CHECK(r.identified == "[Player_m1] scores!");
  CHECK(r.anonymized == "[PLAYER] scores!");
  REQUIRE(r.unresolved.size() == 1);
  CHECK(r.unresolved[0].applied);
  CHECK(r.unresolved[0].reason == "fuzzy");
  CHECK(r.unresolved[0].text == "Mkhitarian");
  CHECK(r.unresolved[0].matched == "Mkhitaryan");
  CHECK(r.unresolved[0].score == doctest::Approx(0.9));
}

TEST_CASE("mid-band fuzzy hits are reported but not applied") {
  GameDocument doc;
  doc.teams[0].name = "City";
  doc.teams[0].players.push_back(make_player("k1", "Kevin De Bruyne"));
  EntityIndex index = build_entity_index(doc);

  AnonymizeResult r = anonymize("Brilliant from De Bruyne!", index);
  // The surname still matches exactly; the wider span goes to review.
  CHECK(r.identified == "Brilliant from De [Player_k1]!");
  CHECK(r.anonymized == "Brilliant from De [PLAYER]!");
  REQUIRE(r.unresolved.size() == 1);
  const UnresolvedSpan& u = r.unresolved[0];
  CHECK(u.text == "De Bruyne");
  CHECK(u.matched == "Bruyne");
  CHECK(u.score == doctest::Approx(2.0 / 3.0));
  CHECK(!u.applied);
  CHECK(u.reason == "fuzzy");
  CHECK(u.byte_offset == 15);
}

TEST_CASE("windows around an applied match are not re-reported") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  // "Arsene Wenger brings" scores ~0.65 against "Arsene Wenger", but both
  // capitalized words are already covered by the applied exact match.
  AnonymizeResult r = anonymize("Arsene Wenger brings on a sub.", index);
  CHECK(r.identified == "[COACH] brings on a sub.");
  CHECK(r.unresolved.empty());
}

TEST_CASE("shared surname resolves to the team mentioned nearest") {
  EntityIndex index = build_entity_index(silva_doc());

  AnonymizeResult r = anonymize("City break quickly and Silva finishes.", index);
  CHECK(r.identified == "[TEAM] break quickly and [Player_d1] finishes.");
  CHECK(r.anonymized == "[TEAM] break quickly and [PLAYER] finishes.");
  CHECK(r.unresolved.empty());

  // Both teams mentioned: the closer one (fewer codepoints away) wins.
  r = anonymize("Silva strikes first for Madrid before City reply.", index);
  CHECK(r.identified == "[Player_t1] strikes first for [TEAM] before [TEAM] reply.");
  CHECK(r.unresolved.empty());
}

TEST_CASE("shared surname without a team cue stays untouched in both outputs") {
  EntityIndex index = build_entity_index(silva_doc());

  AnonymizeResult r = anonymize("Silva shoots just wide.", index);
  CHECK(r.identified == "Silva shoots just wide.");
  CHECK(r.anonymized == "Silva shoots just wide.");
  REQUIRE(r.unresolved.size() == 1);
  CHECK(r.unresolved[0].reason == "ambiguous");
  CHECK(r.unresolved[0].text == "Silva");
  CHECK(!r.unresolved[0].applied);
  CHECK(r.unresolved[0].byte_offset == 0);
}

TEST_CASE("team cues do not cross sentence boundaries") {
  EntityIndex index = build_entity_index(silva_doc());
  AnonymizeResult r = anonymize("Silva is down. City appeal to the referee.", index);
  CHECK(r.identified == "Silva is down. [TEAM] appeal to the referee.");
  CHECK(r.anonymized == "Silva is down. [TEAM] appeal to the referee.");
  REQUIRE(r.unresolved.size() == 1);
  CHECK(r.unresolved[0].reason == "ambiguous");
}

TEST_CASE("equidistant team cues leave the surname ambiguous") {
  EntityIndex index = build_entity_index(silva_doc());
  // "Silva" sits exactly 8 codepoints from each team mention.
  AnonymizeResult r = anonymize("City on Silva v Madrid.", index);
  CHECK(r.identified == "[TEAM] on Silva v [TEAM].");
  CHECK(r.anonymized == "[TEAM] on Silva v [TEAM].");
  REQUIRE(r.unresolved.size() == 1);
  CHECK(r.unresolved[0].reason == "ambiguous");
  CHECK(r.unresolved[0].text == "Silva");
}

TEST_CASE("fuzzy score ties across entities are never applied") {
  GameDocument doc;
  doc.teams[0].name = "North";
  doc.teams[1].name = "South";
  doc.teams[0].players.push_back(make_player("a1", "Henrikh Mkhitarian"));
  doc.teams[1].players.push_back(make_player("b1", "Sergei Mkhitarion"));
  EntityIndex index = build_entity_index(doc);

  // 0.9 against both surnames: above the apply threshold, but ambiguous.
  AnonymizeResult r = anonymize("Mkhitarien shoots!", index);
  CHECK(r.identified == "Mkhitarien shoots!");
  CHECK(r.anonymized == "Mkhitarien shoots!");
  REQUIRE(r.unresolved.size() == 1);
  CHECK(r.unresolved[0].reason == "ambiguous");
  CHECK(!r.unresolved[0].applied);
  CHECK(r.unresolved[0].score == doctest::Approx(0.9));
}

TEST_CASE("results do not depend on index entry order") {
  GameDocument doc = silva_doc();
  EntityIndex fwd = build_entity_index(doc);
  EntityIndex rev = fwd;
  std::reverse(rev.entries.begin(), rev.entries.end());

  for (const char* text :
       {"City on Silva v Madrid.", "Silva shoots just wide.",
        "Silva strikes first for Madrid before City reply.",
        "City break quickly and Silva finishes."}) {
    AnonymizeResult a = anonymize(text, fwd);
    AnonymizeResult b = anonymize(text, rev);
    CHECK(a.identified == b.identified);
    CHECK(a.anonymized == b.anonymized);
    CHECK(a.unresolved.size() == b.unresolved.size());
  }
}

TEST_CASE("overrides beat the exact tier and add new spans") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);

  auto dir = std::filesystem::temp_directory_path() / "sdvc_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / "overrides.json";
  {
    std::ofstream out(path);
    out << R"({"Alexis": {"kind": "PLAYER", "uid": "q9"},
               "Hazard": {"kind": "COACH"}})";
  }
  load_overrides(&index, path.string());

  // New span: the first name alone is not in the built index.
  AnonymizeResult r = anonymize("Alexis curls it over the bar.", index);
  CHECK(r.identified == "[Player_q9] curls it over the bar.");
  CHECK(r.anonymized == "[PLAYER] curls it over the bar.");

  // Conflicting span: the override wins over the lineup surname.
  r = anonymize("Hazard drills it home.", index);
  CHECK(r.identified == "[COACH] drills it home.");
  CHECK(r.anonymized == "[COACH] drills it home.");
}

TEST_CASE("override files are validated") {
  auto dir = std::filesystem::temp_directory_path() / "sdvc_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / "bad_overrides.json";
  EntityIndex index;
  {
    std::ofstream out(path);
    out << R"({"Span": {"kind": "WIZARD"}})";
  }
  CHECK_THROWS_AS(load_overrides(&index, path.string()), std::runtime_error);
  {
    std::ofstream out(path);
    out << R"(["not", "an", "object"])";
  }
  CHECK_THROWS_AS(load_overrides(&index, path.string()), std::runtime_error);
  CHECK_THROWS_AS(load_overrides(&index, (dir / "missing.json").string()),
                  std::runtime_error);
}

TEST_CASE("longest match wins over its own components") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  AnonymizeResult r = anonymize("David Luiz heads it clear.", index);
  CHECK(r.identified == "[Player_p4] heads it clear.");
  CHECK(r.anonymized == "[PLAYER] heads it clear.");
}

TEST_CASE("matching ignores case and diacritics") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  AnonymizeResult r = anonymize("OZIL and ozil and \xC3\x96ZIL combine.", index);
  CHECK(r.identified ==
        "[Player_q8] and [Player_q8] and [Player_q8] combine.");
}

TEST_CASE("surface forms never match inside larger words") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  // "time" contains no entity; "Costas" must not trigger "Costa".
  AnonymizeResult r = anonymize("Costas the steward waves play on.", index);
  CHECK(r.identified == "Costas the steward waves play on.");
  CHECK(r.anonymized == "Costas the steward waves play on.");
}

TEST_CASE("empty and entity-free text passes through") {
  GameDocument doc = load_game_document(fixture("game_valid.json"));
  EntityIndex index = build_entity_index(doc);
  AnonymizeResult r = anonymize("", index);
  CHECK(r.identified.empty());
  CHECK(r.anonymized.empty());
  CHECK(r.unresolved.empty());

  r = anonymize("A quiet spell of possession.", index);
  CHECK(r.identified == "A quiet spell of possession.");
  CHECK(r.unresolved.empty());
}
