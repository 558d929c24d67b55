#include <gtest/gtest.h>

#include <stop_token>
#include <string>
#include <variant>
#include <vector>

#include "horizon/engine.hpp"

using namespace horizon;

namespace {

const std::string kSample = std::string(HORIZON_SAMPLES_DIR) + "/sample.horizon.json";

SourceMeta src(std::string name, Confidence c, EntryPath path = EntryPath::manual) {
  return {std::move(name), c, true, path, std::nullopt};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::invalid_argument;
}

struct EyeWitness {
  Session s{load_kb_file(kSample)};
  NodeId eye, radar, sonar;
  EyeWitness() {
    eye = s.submit_boe("classification", {{{"Oberon"}, 0.7}, {{"Oberon", "Collins"}, 0.2}},
                       src("Eye-Witness", Confidence::certain));
    radar = s.submit_boe("speed", {{{"17"}, 0.5}}, src("Radar Track", Confidence::probable, EntryPath::automated_feed));
    sonar = s.submit_boe("diesels", {{{"2"}, 0.4}}, src("Sonar Operator", Confidence::possible));
  }
};

// Best-supported single proposition; supersets always have at least as much support.
std::string top_statement(const ConclusionReport& c) {
  for (const auto& r : c.rows)
    if (r.statement.members.count() == 1) return r.label;
  return {};
}

std::size_t count_ops(const Session& s, auto pred) {
  std::size_t n = 0;
  for (const auto* node : s.nodes()) n += pred(node->op) ? 1u : 0u;
  return n;
}

}  // namespace

TEST(Submit, CreatesInitialNodes) {
  EyeWitness fx;
  EXPECT_EQ(fx.s.node_count(), 3u);
  const auto& n = fx.s.node(fx.radar);
  EXPECT_EQ(n.kind(), BoeKind::initial);
  EXPECT_EQ(n.boe.source().entry_path, EntryPath::automated_feed);
  EXPECT_EQ(n.boe.id(), fx.radar);
  EXPECT_NEAR(n.boe.mass_of(n.boe.frame().full()), 0.5, 1e-15);
  EXPECT_EQ(fx.s.log_position(), 3u);
}

TEST(Submit, InvalidMassesLeaveSessionUntouched) {
  EyeWitness fx;
  const std::string before = fx.s.export_session();
  EXPECT_EQ(code_of([&] { fx.s.submit_boe("type", {{{"SSK"}, 0.8}, {{"SSN"}, 0.4}}, src("x", Confidence::certain)); }),
            ErrorCode::mass_sum_exceeded);
  EXPECT_EQ(code_of([&] { fx.s.submit_boe("type", {{{"SSK"}, -0.1}}, src("x", Confidence::certain)); }),
            ErrorCode::invalid_mass);
  EXPECT_EQ(code_of([&] { fx.s.submit_boe("nope", {{{"SSK"}, 0.1}}, src("x", Confidence::certain)); }),
            ErrorCode::unknown_frame);
  EXPECT_EQ(code_of([&] { fx.s.submit_boe("type", {{{"Typhoon"}, 0.1}}, src("x", Confidence::certain)); }),
            ErrorCode::unknown_label);
  EXPECT_EQ(fx.s.export_session(), before);
}

TEST(Fusion, WithoutAutoDiscountCreatesOnlyTheFusedNode) {
  Session s(load_kb_file(kSample));
  auto a = s.submit_boe("type", {{{"SSK"}, 0.6}}, src("a", Confidence::probable));
  auto b = s.submit_boe("type", {{{"SSN"}, 0.3}}, src("b", Confidence::possible));
  const std::size_t before = s.node_count();
  auto f = s.run_fusion({a, b}, FusionRule::dempster, "type", false);
  EXPECT_EQ(s.node_count(), before + 1);
  const auto& n = s.node(f);
  EXPECT_EQ(n.inputs, (std::vector<NodeId>{a, b}));
  EXPECT_TRUE(std::holds_alternative<op::Fused>(n.op));
  EXPECT_EQ(n.kind(), BoeKind::secondary);
}

TEST(Fusion, AutoDiscountUsesConfidenceRates) {
  Session s(load_kb_file(kSample));
  auto a = s.submit_boe("type", {{{"SSK"}, 0.6}}, src("a", Confidence::certain));
  auto b = s.submit_boe("type", {{{"SSN"}, 0.3}}, src("b", Confidence::possible));
  auto f = s.run_fusion({a, b}, FusionRule::dempster, "type", true);
  const auto& n = s.node(f);
  ASSERT_EQ(n.inputs.size(), 2u);
  // Certain sources are discounted at rate 0, which creates no node.
  EXPECT_EQ(n.inputs[0], a);
  const auto& d = s.node(n.inputs[1]);
  ASSERT_TRUE(std::holds_alternative<op::AutoDiscounted>(d.op));
  EXPECT_DOUBLE_EQ(std::get<op::AutoDiscounted>(d.op).rate, 0.4);
  EXPECT_NEAR(d.boe.mass_of(d.boe.frame().subset_of(std::vector<std::string>{"SSN"})), 0.18, 1e-15);
}

TEST(Fusion, AutoDiscountAppliedOnlyOnce) {
  Session s(load_kb_file(kSample));
  auto a = s.submit_boe("type", {{{"SSK"}, 0.6}}, src("a", Confidence::probable));
  auto b = s.submit_boe("type", {{{"SSK"}, 0.3}}, src("b", Confidence::probable));
  auto c = s.submit_boe("type", {{{"SSN"}, 0.2}}, src("c", Confidence::probable));
  auto f1 = s.run_fusion({a, b}, FusionRule::dempster, "type", true);
  auto is_auto = [](const Operation& o) { return std::holds_alternative<op::AutoDiscounted>(o); };
  EXPECT_EQ(count_ops(s, is_auto), 2u);
  auto f2 = s.run_fusion({f1, c}, FusionRule::dempster, "type", true);
  EXPECT_EQ(count_ops(s, is_auto), 3u);
  EXPECT_EQ(s.node(f2).inputs.front(), f1);
}

TEST(Fusion, TranslatesOntoTargetAndRanksEyeWitnessFirst) {
  EyeWitness fx;
  auto f = fx.s.run_fusion({fx.eye, fx.radar, fx.sonar}, FusionRule::dempster, "classification", true);
  auto is_translated = [](const Operation& o) { return std::holds_alternative<op::Translated>(o); };
  EXPECT_EQ(count_ops(fx.s, is_translated), 2u);
  for (const auto& in : fx.s.node(f).inputs) EXPECT_EQ(fx.s.node(in).boe.frame().id(), "classification");
  auto rep = fx.s.explanation_of(f);
  EXPECT_EQ(rep.most_influential, fx.eye);
  const auto text = explanation_text(rep, fx.s.source_names());
  EXPECT_EQ(text.rfind("Eye-Witness", 0), 0u) << text;
  auto c = fx.s.conclusion_of(f);
  EXPECT_EQ(c.frame_id, "classification");
  EXPECT_EQ(top_statement(c), "{Oberon}");
}

TEST(Fusion, Errors) {
  EyeWitness fx;
  EXPECT_EQ(code_of([&] { fx.s.run_fusion({fx.eye}, FusionRule::dempster, "classification"); }),
            ErrorCode::insufficient_inputs);
  EXPECT_EQ(code_of([&] { fx.s.run_fusion({fx.eye, "n99"}, FusionRule::dempster, "classification"); }),
            ErrorCode::unknown_node);
  EXPECT_EQ(code_of([&] { fx.s.run_fusion({fx.eye, fx.radar}, FusionRule::dempster, "nowhere"); }),
            ErrorCode::unknown_frame);
  fx.s.set_disabled(fx.radar, true);
  EXPECT_EQ(code_of([&] { fx.s.run_fusion({fx.eye, fx.radar}, FusionRule::dempster, "classification"); }),
            ErrorCode::disabled_node);
  fx.s.set_disabled(fx.radar, false);
  auto a = fx.s.submit_boe("type", {{{"SSK"}, 1.0}}, src("a", Confidence::certain));
  auto b = fx.s.submit_boe("type", {{{"SSN"}, 1.0}}, src("b", Confidence::certain));
  const auto count = fx.s.node_count();
  EXPECT_EQ(code_of([&] { fx.s.run_fusion({a, b}, FusionRule::dempster, "type"); }), ErrorCode::total_conflict);
  EXPECT_EQ(fx.s.node_count(), count);
}

TEST(Fusion, UnreachableTarget) {
  KnowledgeBase kb = load_kb_file(kSample);
  kb.gallery.add_frame(make_frame("island", {"x"}));
  Session s(std::move(kb));
  auto a = s.submit_boe("type", {{{"SSK"}, 0.5}}, src("a", Confidence::certain));
  auto b = s.submit_boe("island", {{{"x"}, 0.5}}, src("b", Confidence::certain));
  EXPECT_EQ(code_of([&] { s.run_fusion({a, b}, FusionRule::dempster, "type"); }), ErrorCode::unreachable_frame);
  EXPECT_EQ(s.node_count(), 2u);
}

TEST(WhatIf, DisablingTopSourceChangesTheConclusion) {
  EyeWitness fx;
  auto f = fx.s.run_fusion({fx.eye, fx.radar, fx.sonar}, FusionRule::dempster, "classification", true);
  auto w = fx.s.what_if(f, {fx.eye});
  EXPECT_NE(w, f);
  const auto& wn = std::get<op::Fused>(fx.s.node(w).op);
  EXPECT_EQ(wn.what_if_of, f);
  EXPECT_FALSE(fx.s.node(w).boe.same_masses(fx.s.node(f).boe));
  // The original is untouched.
  EXPECT_EQ(top_statement(fx.s.conclusion_of(f)), "{Oberon}");
}

TEST(WhatIf, NoChangeReproducesTheOriginal) {
  EyeWitness fx;
  auto f = fx.s.run_fusion({fx.eye, fx.radar, fx.sonar}, FusionRule::dempster, "classification", true);
  auto w = fx.s.what_if(f);
  EXPECT_NE(w, f);
  EXPECT_TRUE(fx.s.node(w).boe.same_masses(fx.s.node(f).boe));
}

TEST(WhatIf, RediscountReplacesAutoDiscount) {
  EyeWitness fx;
  auto f = fx.s.run_fusion({fx.eye, fx.radar}, FusionRule::dempster, "classification", true);
  auto w = fx.s.what_if(f, {}, {{fx.eye, 0.5}});
  const auto& first = fx.s.node(fx.s.node(w).inputs.front());
  ASSERT_TRUE(std::holds_alternative<op::Discounted>(first.op));
  EXPECT_DOUBLE_EQ(std::get<op::Discounted>(first.op).rate, 0.5);
  EXPECT_EQ(first.inputs.front(), fx.eye);
  EXPECT_EQ(code_of([&] { fx.s.what_if(f, {}, {{fx.eye, 1.5}}); }), ErrorCode::invalid_rate);
}

TEST(WhatIf, LeavingOneInputFails) {
  EyeWitness fx;
  auto f = fx.s.run_fusion({fx.eye, fx.radar, fx.sonar}, FusionRule::dempster, "classification", true);
  const auto count = fx.s.node_count();
  EXPECT_EQ(code_of([&] { fx.s.what_if(f, {fx.eye, fx.radar}); }), ErrorCode::insufficient_inputs);
  EXPECT_EQ(fx.s.node_count(), count);
  EXPECT_EQ(code_of([&] { fx.s.what_if(fx.eye); }), ErrorCode::invalid_argument);
}

TEST(Conclusion, UnknownMassAndVacuous) {
  Session s(load_kb_file(kSample));
  auto a = s.submit_boe("type", {{{"SSK"}, 0.7}}, src("a", Confidence::certain));
  auto b = s.submit_boe("type", {{{"SSN"}, 0.6}}, src("b", Confidence::certain));
  auto f = s.run_fusion({a, b}, FusionRule::smets, "type", false);
  auto c = s.conclusion_of(f);
  EXPECT_NEAR(c.unknown_mass, 0.42, 1e-12);

  auto v = s.submit_boe("type", {}, src("v", Confidence::certain));
  auto cv = s.conclusion_of(v);
  ASSERT_EQ(cv.rows.size(), 1u);
  EXPECT_EQ(cv.rows[0].label, "Θ");
  EXPECT_DOUBLE_EQ(cv.rows[0].support, 1.0);
  EXPECT_EQ(code_of([&] { s.conclusion_of("n404"); }), ErrorCode::unknown_node);
}

TEST(Session, StaticBoesLoad) {
  Session s(load_kb_file(kSample));
  auto ids = s.load_static_boes();
  EXPECT_EQ(ids.size(), s.kb().static_boes.size());
  for (const auto& id : ids) EXPECT_EQ(s.node(id).boe.source().entry_path, EntryPath::static_kb);
}

namespace {

Session busy_session() {
  Session s(load_kb_file(kSample));
  auto stat = s.load_static_boes();
  std::vector<NodeId> in;
  const char* classes[] = {"Oberon", "Collins", "Upholder", "Kilo", "LosAngeles", "Trafalgar"};
  for (int i = 0; i < 6; ++i)
    in.push_back(s.submit_boe("classification", {{{classes[i]}, 0.1 + 0.1 * i}},
                              src("s" + std::to_string(i), static_cast<Confidence>(i % 3))));
  in.push_back(s.submit_boe("speed", {{{"17"}, 0.3}, {{"20", "32"}, 0.2}}, src("sp", Confidence::probable)));
  auto d = s.discount(in[0], 0.25);
  auto t = s.translate(in[6], "classification");
  auto f1 = s.run_fusion({d, t, in[1], in[2]}, FusionRule::dempster, "classification", true);
  auto f2 = s.run_fusion({in[3], in[4], stat.at(0)}, FusionRule::dempster, "classification", true);
  auto f3 = s.run_fusion({f1, f2, in[5]}, FusionRule::dependent, "classification", false);
  s.what_if(f1, {in[1]});
  s.set_disabled(in[2], true);
  s.configure_auto_discount({0.05, 0.3, 0.5, true});
  s.run_fusion({f3, in[6], stat.at(1)}, FusionRule::dempster, "type");
  s.what_if(f2, {}, {{in[3], 0.6}});
  s.run_fusion({in[3], in[4]}, FusionRule::smets, "classification");
  return s;
}

}  // namespace

TEST(SessionFile, RoundTripOfBusySession) {
  Session s = busy_session();
  EXPECT_GE(s.node_count(), 35u);
  const std::string text = s.export_session();
  Session back = Session::import_session(text);
  EXPECT_EQ(back.export_session(), text);
  ASSERT_EQ(back.node_count(), s.node_count());
  for (const auto* n : s.nodes()) {
    const auto& m = back.node(n->id);
    EXPECT_TRUE(m.boe.same_masses(n->boe)) << n->id;
    EXPECT_EQ(m.inputs, n->inputs);
    EXPECT_EQ(m.disabled, n->disabled);
    EXPECT_EQ(m.boe.source(), n->boe.source());
  }
  EXPECT_EQ(back.auto_discount_config().rate_possible, 0.5);
}

TEST(SessionFile, EmptySession) {
  Session s(load_kb_file(kSample));
  Session back = Session::import_session(s.export_session());
  EXPECT_EQ(back.node_count(), 0u);
  EXPECT_EQ(back.export_session(), s.export_session());
}

TEST(SessionFile, TamperingIsDetected) {
  Session s = busy_session();
  Json doc = s.export_json();
  Json bad_result = doc;
  bad_result["log"][3]["result"] = Json::array({"n77"});
  EXPECT_EQ(code_of([&] { Session::import_json(bad_result); }), ErrorCode::replay_mismatch);

  Json bad_mass = doc;
  bool changed = false;
  for (auto& n : bad_mass["nodes"]) {
    auto& masses = n["masses"];
    if (!masses.empty()) {
      masses[0]["mass"] = "0.123";
      changed = true;
      break;
    }
  }
  ASSERT_TRUE(changed);
  EXPECT_EQ(code_of([&] { Session::import_json(bad_mass); }), ErrorCode::replay_mismatch);

  Json bad_version = doc;
  bad_version["version"] = "9";
  EXPECT_EQ(code_of([&] { Session::import_json(bad_version); }), ErrorCode::version_mismatch);
}

TEST(Cancellation, StopsFusionWithoutSideEffects) {
  EyeWitness fx;
  std::stop_source stop;
  stop.request_stop();
  const auto before = fx.s.export_session();
  EXPECT_EQ(code_of([&] {
              fx.s.run_fusion({fx.eye, fx.radar, fx.sonar}, FusionRule::dempster, "classification", true,
                              stop.get_token());
            }),
            ErrorCode::cancelled);
  EXPECT_EQ(fx.s.export_session(), before);
}
