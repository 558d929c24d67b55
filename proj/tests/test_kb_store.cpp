#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "horizon/kb_store.hpp"

using namespace horizon;

namespace {

const std::string kSample = std::string(HORIZON_SAMPLES_DIR) + "/sample.horizon.json";

KnowledgeBase from_text(const std::string& text) {
  std::istringstream in(text);
  return load_kb(in);
}

Error error_of(const std::string& text) {
  try {
    from_text(text);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected an Error";
  return Error(ErrorCode::invalid_argument, "none");
}

bool has_pair(const KnowledgeBase& kb, const std::string& a, const std::string& b, const std::string& la,
              const std::string& lb) {
  auto rel = kb.gallery.relation_between(a, b);
  if (!rel) return false;
  const bool same = rel->frame_a().id() == a;
  for (const auto& [x, y] : rel->label_pairs())
    if ((same && x == la && y == lb) || (!same && x == lb && y == la)) return true;
  return false;
}

// Structural comparison through the canonical form.
void expect_same(const KnowledgeBase& x, const KnowledgeBase& y) { EXPECT_EQ(kb_to_json(x), kb_to_json(y)); }

}  // namespace

TEST(KbLoad, SampleKb) {
  KnowledgeBase kb = load_kb_file(kSample);
  EXPECT_EQ(kb.gallery.frame_count(), 6u);
  EXPECT_GE(kb.gallery.relations().size(), 5u);
  for (auto id : {"classification", "country", "type", "speed", "diesels", "shafts"})
    EXPECT_TRUE(kb.gallery.has_frame(id)) << id;
  EXPECT_TRUE(has_pair(kb, "classification", "country", "Oberon", "Australia"));
  EXPECT_TRUE(has_pair(kb, "classification", "country", "Oberon", "Canada"));
  EXPECT_TRUE(has_pair(kb, "classification", "type", "Oberon", "SSK"));
  EXPECT_TRUE(has_pair(kb, "classification", "speed", "Oberon", "17"));
  EXPECT_TRUE(has_pair(kb, "classification", "diesels", "Oberon", "2"));
  EXPECT_TRUE(has_pair(kb, "classification", "shafts", "Oberon", "1"));
  EXPECT_FALSE(kb.static_boes.empty());
  for (const auto& b : kb.static_boes) EXPECT_EQ(b.source().entry_path, EntryPath::static_kb);
}

TEST(KbLoad, Errors) {
  Error e = error_of(R"({"version": "1", "frames": []})");
  EXPECT_EQ(e.code(), ErrorCode::validation_error);
  EXPECT_NE(std::string(e.what()).find("at least one frame"), std::string::npos);

  e = error_of(R"({"version": "1", "frames": [{"id": "f", "propositions": ["A", "B"]}],
    "static_boes": [{"id": "over", "frame": "f", "masses": [{"set": ["A"], "mass": 0.8}, {"set": ["B"], "mass": 0.4}]}]})");
  EXPECT_EQ(e.code(), ErrorCode::mass_sum_exceeded);
  EXPECT_NE(std::string(e.what()).find("over"), std::string::npos);

  EXPECT_EQ(error_of(R"({"version": "2", "frames": [{"id": "f", "propositions": ["A"]}]})").code(),
            ErrorCode::version_mismatch);
  EXPECT_EQ(error_of(R"({"frames": [{"id": "f", "propositions": ["A"]}, {"id": "f", "propositions": ["B"]}]})").code(),
            ErrorCode::validation_error);
  EXPECT_EQ(error_of(R"({"frames": [{"id": "f", "propositions": ["A", "A"]}]})").code(), ErrorCode::validation_error);
  EXPECT_EQ(error_of(R"({"frames": [{"id": "f", "propositions": ["A"]}],
    "relations": [{"a": "f", "b": "g", "pairs": []}]})").code(), ErrorCode::validation_error);
  EXPECT_EQ(error_of(R"({"frames": [{"id": "f", "propositions": ["A"]}, {"id": "g", "propositions": ["B"]}],
    "relations": [{"a": "f", "b": "g", "pairs": [["A", "C"]]}]})").code(), ErrorCode::validation_error);
  EXPECT_EQ(error_of(R"({"frames": [{"id": "f", "propositions": ["A"]}],
    "static_boes": [{"id": "x", "frame": "g", "masses": []}]})").code(), ErrorCode::validation_error);

  e = error_of("{\n  \"frames\": [\n    oops\n  ]\n}");
  EXPECT_EQ(e.code(), ErrorCode::parse_error);
  EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();

  EXPECT_THROW(load_kb_file("/nonexistent/kb.json"), Error);
  try {
    load_kb_file("/nonexistent/kb.json");
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::io_error);
  }
}

TEST(KbSave, SampleRoundTripIsByteStable) {
  KnowledgeBase kb = load_kb_file(kSample);
  const std::string first = save_kb_string(kb);
  KnowledgeBase again = from_text(first);
  const std::string second = save_kb_string(again);
  EXPECT_EQ(first, second);
  expect_same(kb, again);
}

TEST(KbSave, LargeFrameKeepsOrder) {
  KnowledgeBase kb;
  std::vector<std::string> props;
  for (int i = 351; i >= 0; --i) props.push_back("p" + std::to_string(i * 7 % 353));
  kb.gallery.add_frame(make_frame("big", props));
  KnowledgeBase back = from_text(save_kb_string(kb));
  EXPECT_EQ(back.gallery.frame("big")->propositions(), props);
}

TEST(KbSave, UnicodeLabels) {
  KnowledgeBase kb;
  kb.gallery.add_frame(make_frame("pays", {"Österreich", "日本", "Ελλάδα"}, "Länder"));
  kb.gallery.add_frame(make_frame("typ", {"U-Boot"}));
  kb.gallery.add_relation("pays", "typ", {{"日本", "U-Boot"}});
  kb.static_boes.push_back(make_boe(kb.gallery.frame("pays"), {{PropSet::of(*kb.gallery.frame("pays"), {"日本"}), 0.25}},
                                    SourceMeta{"Ö-Quelle", Confidence::possible, false, EntryPath::static_kb, "2026-01-01T00:00:00Z"},
                                    "b"));
  const std::string text = save_kb_string(kb);
  KnowledgeBase back = from_text(text);
  EXPECT_EQ(save_kb_string(back), text);
  EXPECT_EQ(back.gallery.frame("pays")->label(), "Länder");
  EXPECT_EQ(back.static_boes.at(0).source().name, "Ö-Quelle");
  EXPECT_FALSE(back.static_boes.at(0).source().independent);
  EXPECT_TRUE(back.static_boes.at(0).same_masses(kb.static_boes.at(0)));
}

TEST(KbSave, RandomKbsRoundTrip) {
  gen::Rng rng(55);
  for (int t = 0; t < 50; ++t) {
    KnowledgeBase kb;
    kb.meta = {"kb" + std::to_string(t), "1." + std::to_string(t), "2026-10-16T00:00:00Z"};
    const std::size_t nf = gen::pick(rng, 1, 6);
    for (std::size_t i = 0; i < nf; ++i) kb.gallery.add_frame(gen::frame(gen::pick(rng, 1, 10), "f" + std::to_string(i)));
    for (std::size_t i = 0; i + 1 < nf; ++i) {
      const auto& a = kb.gallery.frame("f" + std::to_string(i));
      const auto& b = kb.gallery.frame("f" + std::to_string(i + 1));
      std::set<CompatibilityRelation::IndexPair> pairs;
      for (std::size_t k = 0; k < a->size(); ++k) pairs.emplace(k, gen::pick(rng, 0, b->size() - 1));
      kb.gallery.put_relation(std::make_shared<const CompatibilityRelation>(a, b, pairs));
    }
    const std::size_t nb = gen::pick(rng, 0, 4);
    for (std::size_t i = 0; i < nb; ++i) {
      const auto& f = kb.gallery.frame("f" + std::to_string(gen::pick(rng, 0, nf - 1)));
      Boe b = gen::boe(rng, f, 4, true, "s" + std::to_string(i));
      kb.static_boes.push_back(b.with_source(SourceMeta{"src", Confidence::certain, true, EntryPath::static_kb, {}}));
    }
    const std::string text = save_kb_string(kb);
    KnowledgeBase back = from_text(text);
    EXPECT_EQ(save_kb_string(back), text);
    ASSERT_EQ(back.static_boes.size(), kb.static_boes.size());
    for (std::size_t i = 0; i < nb; ++i) {
      // Masses survive bit-exactly; make_boe may only add a sub-1e-12 Θ top-up.
      const auto& x = kb.static_boes[i];
      const auto& y = back.static_boes[i];
      for (const auto& fe : x.focal()) {
        if (fe.set.is_full())
          EXPECT_NEAR(y.mass_of(fe.set), fe.mass, 1e-12);
        else
          EXPECT_EQ(y.mass_of(fe.set), fe.mass);
      }
    }
  }
}

TEST(EditRelation, AddRemoveAndErrors) {
  KnowledgeBase kb = load_kb_file(kSample);
  KnowledgeBase added = edit_relation(kb, "classification", "country", {{"Collins", "Canada"}}, {});
  EXPECT_TRUE(has_pair(added, "classification", "country", "Collins", "Canada"));
  EXPECT_FALSE(has_pair(kb, "classification", "country", "Collins", "Canada"));

  KnowledgeBase back = edit_relation(added, "country", "classification", {}, {{"Canada", "Collins"}});
  expect_same(back, kb);
  EXPECT_EQ(save_kb_string(back), save_kb_string(kb));

  try {
    edit_relation(kb, "classification", "country", {}, {{"Kilo", "USA"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::missing_pair);
    EXPECT_NE(std::string(e.what()).find("(Kilo, USA)"), std::string::npos);
  }
  EXPECT_THROW(edit_relation(kb, "classification", "country", {{"Nautilus", "USA"}}, {}), Error);

  KnowledgeBase fresh = edit_relation(kb, "country", "shafts", {{"UK", "2"}}, {});
  EXPECT_TRUE(has_pair(fresh, "country", "shafts", "UK", "2"));
  EXPECT_EQ(fresh.gallery.relations().size(), kb.gallery.relations().size() + 1);
}
