#pragma once

// Session workspace. Every mutation is a JSON operation record applied through
// Session::apply, so a session log can be replayed against the same knowledge
// base to rebuild every node bit-for-bit. Derived BOEs form a lineage DAG of
// discount, auto-discount, translation and fusion nodes.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "horizon/belief.hpp"
#include "horizon/compat.hpp"
#include "horizon/error.hpp"
#include "horizon/evidence_ops.hpp"
#include "horizon/explain.hpp"
#include "horizon/json_io.hpp"
#include "horizon/kb_store.hpp"

namespace horizon {

inline constexpr const char* kSessionSchemaVersion = "1";

using NodeId = std::string;

namespace op {
struct Entered {};
struct Discounted {
  double rate = 0.0;
};
struct AutoDiscounted {
  double rate = 0.0;
};
struct Translated {
  std::vector<std::string> path;  // frame ids, source first
};
struct Fused {
  FusionRule rule = FusionRule::dempster;
  std::string target;
  std::vector<NodeId> selected;  // nodes the operator chose, before any pipeline stage
  bool auto_discount = false;
  std::optional<NodeId> what_if_of;
};
}  // namespace op

using Operation = std::variant<op::Entered, op::Discounted, op::AutoDiscounted, op::Translated, op::Fused>;

struct LineageNode {
  NodeId id;
  Boe boe;
  Operation op;
  std::vector<NodeId> inputs;
  bool disabled = false;

  BoeKind kind() const { return std::holds_alternative<op::Entered>(op) ? BoeKind::initial : BoeKind::secondary; }
};

inline std::string_view op_name(const Operation& o) {
  return std::visit(
      [](const auto& v) -> std::string_view {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, op::Entered>) return "entered";
        else if constexpr (std::is_same_v<T, op::Discounted>) return "discounted";
        else if constexpr (std::is_same_v<T, op::AutoDiscounted>) return "auto_discounted";
        else if constexpr (std::is_same_v<T, op::Translated>) return "translated";
        else return "fused";
      },
      o);
}

inline Json to_json(const Operation& o) {
  Json j{{"kind", std::string(op_name(o))}};
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, op::Discounted> || std::is_same_v<T, op::AutoDiscounted>) {
          j["rate"] = v.rate;
        } else if constexpr (std::is_same_v<T, op::Translated>) {
          j["path"] = v.path;
        } else if constexpr (std::is_same_v<T, op::Fused>) {
          j["rule"] = std::string(to_string(v.rule));
          j["target"] = v.target;
          j["selected"] = v.selected;
          j["auto_discount"] = v.auto_discount;
          if (v.what_if_of) j["what_if_of"] = *v.what_if_of;
        }
      },
      o);
  return j;
}

inline Json to_json(const AutoDiscountConfig& c) {
  return Json{{"certain", c.rate_certain}, {"probable", c.rate_probable}, {"possible", c.rate_possible},
              {"enabled", c.enabled}};
}

inline AutoDiscountConfig auto_discount_from_json(const Json& j) {
  AutoDiscountConfig c;
  if (j.is_null()) return c;
  if (j.contains("certain")) c.rate_certain = number_field(j, "certain", "auto_discount");
  if (j.contains("probable")) c.rate_probable = number_field(j, "probable", "auto_discount");
  if (j.contains("possible")) c.rate_possible = number_field(j, "possible", "auto_discount");
  if (j.contains("enabled")) c.enabled = field(j, "enabled", "auto_discount").get<bool>();
  for (double r : {c.rate_certain, c.rate_probable, c.rate_possible}) check_rate(r);
  return c;
}

inline Json node_to_json(const LineageNode& n) {
  return Json{{"id", n.id},
              {"frame", n.boe.frame().id()},
              {"kind", n.kind() == BoeKind::initial ? "initial" : "secondary"},
              {"op", to_json(n.op)},
              {"inputs", n.inputs},
              {"disabled", n.disabled},
              {"masses", masses_to_json(n.boe)},
              {"conflict", n.boe.conflict()},
              {"translation_loss", n.boe.translation_loss()},
              {"source", to_json(n.boe.source())}};
}

class Session {
 public:
  explicit Session(KnowledgeBase kb, AutoDiscountConfig auto_discount = {})
      : kb_(std::move(kb)), initial_auto_discount_(auto_discount), auto_discount_(auto_discount) {}

  const KnowledgeBase& kb() const noexcept { return kb_; }
  const AutoDiscountConfig& auto_discount_config() const noexcept { return auto_discount_; }
  const std::vector<Json>& log() const noexcept { return log_; }
  std::size_t log_position() const noexcept { return log_.size(); }
  double inconclusive_margin = kInconclusiveMargin;

  const LineageNode& node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) fail(ErrorCode::unknown_node, "unknown node '" + id + "'");
    return it->second;
  }
  bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }

  // Nodes in creation order.
  std::vector<const LineageNode*> nodes() const {
    std::vector<const LineageNode*> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(&nodes_.at(id));
    return out;
  }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // ---- operations; each builds a log record and applies it ----

  NodeId submit_boe(const std::string& frame_id, const std::vector<std::pair<std::vector<std::string>, double>>& masses,
                    const SourceMeta& source) {
    Json arr = Json::array();
    for (const auto& [labels, m] : masses) arr.push_back(Json{{"set", labels}, {"mass", m}});
    return apply_one(Json{{"op", "submit"}, {"frame", frame_id}, {"masses", std::move(arr)}, {"source", to_json(source)}});
  }

  // Adds every static BOE of the knowledge base as an entered node.
  std::vector<NodeId> load_static_boes() {
    const std::size_t before = order_.size();
    apply(Json{{"op", "load_static"}});
    return {order_.begin() + static_cast<std::ptrdiff_t>(before), order_.end()};
  }

  NodeId discount(const NodeId& id, double rate) {
    return apply_one(Json{{"op", "discount"}, {"node", id}, {"rate", rate}});
  }

  NodeId translate(const NodeId& id, const std::string& target) {
    return apply_one(Json{{"op", "translate"}, {"node", id}, {"target", target}});
  }

  NodeId run_fusion(const std::vector<NodeId>& ids, FusionRule rule, const std::string& target,
                    std::optional<bool> auto_discount = std::nullopt, std::stop_token stop = {}) {
    return apply_one(Json{{"op", "fuse"},
                          {"nodes", ids},
                          {"rule", std::string(to_string(rule))},
                          {"target", target},
                          {"auto_discount", auto_discount.value_or(auto_discount_.enabled)}},
                     stop);
  }

  NodeId what_if(const NodeId& recompute, const std::set<NodeId>& disable = {},
                 const std::map<NodeId, double>& rediscount = {}, std::stop_token stop = {}) {
    Json rd = Json::object();
    for (const auto& [k, v] : rediscount) rd[k] = v;
    return apply_one(Json{{"op", "what_if"},
                          {"recompute", recompute},
                          {"disable", std::vector<NodeId>(disable.begin(), disable.end())},
                          {"rediscount", std::move(rd)}},
                     stop);
  }

  void set_disabled(const NodeId& id, bool disabled) {
    apply(Json{{"op", "set_disabled"}, {"node", id}, {"disabled", disabled}});
  }

  void configure_auto_discount(const AutoDiscountConfig& cfg) {
    Json rec = to_json(cfg);
    rec["op"] = "configure_auto_discount";
    apply(rec);
  }

  // ---- queries ----

  ConclusionReport conclusion_of(const NodeId& id) const {
    return conclusion_report(node(id).boe, inconclusive_margin);
  }

  InfluenceReport explanation_of(const NodeId& id, std::size_t cap = kExplanationFrameCap) const {
    const LineageNode& n = node(id);
    const auto* fused = std::get_if<op::Fused>(&n.op);
    if (!fused) fail(ErrorCode::invalid_argument, "node '" + id + "' is not a fusion result");
    std::vector<Boe> contributions;
    for (const auto& in : n.inputs) contributions.push_back(node(in).boe);
    return influence(contributions, fused->rule, cap, id);
  }

  // Source names keyed by node id, for explanation text.
  std::map<std::string, std::string> source_names() const {
    std::map<std::string, std::string> out;
    for (const auto& [id, n] : nodes_) out[id] = n.boe.source().name;
    return out;
  }

  // Executes one operation record. Either every node it creates is committed
  // and the record appended to the log, or the session is left untouched.
  std::vector<NodeId> apply(const Json& record, std::stop_token stop = {}) {
    try {
      return apply_record(record, stop);
    } catch (const Json::exception& e) {
      fail(ErrorCode::validation_error, std::string("malformed operation record: ") + e.what());
    }
  }

  Json export_json() const {
    Json nodes = Json::array();
    for (const auto* n : this->nodes()) nodes.push_back(node_to_json(*n));
    return Json{{"version", kSessionSchemaVersion},
                {"kb", kb_to_json(kb_)},
                {"auto_discount", to_json(initial_auto_discount_)},
                {"log", log_},
                {"nodes", std::move(nodes)}};
  }

  std::string export_session() const { return to_canonical(export_json()); }

  static Session import_json(const Json& doc) {
    if (!doc.is_object()) fail(ErrorCode::validation_error, "session document must be a JSON object");
    const Json& v = field(doc, "version", "session");
    if (!v.is_string() || v.get<std::string>() != kSessionSchemaVersion)
      fail(ErrorCode::version_mismatch, "unsupported session version " + v.dump());
    Session s(kb_from_json(field(doc, "kb", "session")), auto_discount_from_json(doc.value("auto_discount", Json())));
    for (const auto& rec : array_field(doc, "log", "session")) {
      try {
        s.apply(rec);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::replay_mismatch) throw;
        fail(ErrorCode::replay_mismatch, std::string("log replay failed: ") + e.what());
      }
    }
    if (doc.contains("nodes")) {
      const Json& nodes = array_field(doc, "nodes", "session");
      if (nodes.size() != s.node_count())
        fail(ErrorCode::replay_mismatch, "replay produced " + std::to_string(s.node_count()) + " nodes, export lists " +
                                             std::to_string(nodes.size()));
      for (const auto& nj : nodes) {
        const std::string id = string_field(nj, "id", "node");
        if (!s.has_node(id)) fail(ErrorCode::replay_mismatch, "replay did not recreate node '" + id + "'");
        if (node_to_json(s.node(id)) != nj)
          fail(ErrorCode::replay_mismatch, "replayed node '" + id + "' differs from the exported value");
      }
    }
    return s;
  }

  static Session import_session(std::string_view text) { return import_json(parse_json(text)); }

 private:
  struct Staging {
    explicit Staging(const Session& s) : session(s), counter(s.next_id_) {}

    NodeId next_id() { return "n" + std::to_string(++counter); }

    void add(LineageNode n) { nodes.push_back(std::move(n)); }

    const LineageNode& get(const NodeId& id) const {
      for (const auto& n : nodes)
        if (n.id == id) return n;
      return session.node(id);
    }

    const Session& session;
    std::size_t counter;
    std::deque<LineageNode> nodes;
    std::vector<std::pair<NodeId, bool>> disable_updates;
    std::optional<AutoDiscountConfig> new_config;
  };

  std::vector<NodeId> apply_record(const Json& record, std::stop_token stop) {
    Staging st(*this);
    Json logged = record;
    logged.erase("result");
    const std::string kind = string_field(record, "op", "operation record");
    if (kind == "submit") {
      const FramePtr& frame = kb_.gallery.frame(string_field(record, "frame", "submit"));
      auto assignments = assignments_from_json(*frame, field(record, "masses", "submit"), "submit");
      SourceMeta src = source_from_json(record.value("source", Json()));
      const NodeId id = st.next_id();
      st.add({id, make_boe(frame, assignments, std::move(src), id), op::Entered{}, {}});
    } else if (kind == "load_static") {
      for (const auto& b : kb_.static_boes) {
        const NodeId id = st.next_id();
        st.add({id, b.with_id(id), op::Entered{}, {}});
      }
    } else if (kind == "discount") {
      const NodeId in = string_field(record, "node", "discount");
      const double rate = number_field(record, "rate", "discount");
      const NodeId id = st.next_id();
      st.add({id, horizon::discount(node(in).boe, rate).with_id(id), op::Discounted{rate}, {in}});
    } else if (kind == "translate") {
      const NodeId in = string_field(record, "node", "translate");
      stage_translation(st, in, string_field(record, "target", "translate"), /*force=*/true);
    } else if (kind == "fuse") {
      std::vector<NodeId> ids = string_list(field(record, "nodes", "fuse"), "fuse.nodes");
      for (const auto& id : ids)
        if (node(id).disabled) fail(ErrorCode::disabled_node, "node '" + id + "' is disabled");
      const FusionRule rule = parse_fusion_rule(string_field(record, "rule", "fuse"));
      const bool auto_on = record.contains("auto_discount") ? field(record, "auto_discount", "fuse").get<bool>()
                                                            : auto_discount_.enabled;
      stage_fusion(st, ids, rule, string_field(record, "target", "fuse"), auto_on, {}, std::nullopt, stop);
    } else if (kind == "what_if") {
      const NodeId target_id = string_field(record, "recompute", "what_if");
      const auto* fused = std::get_if<op::Fused>(&node(target_id).op);
      if (!fused) fail(ErrorCode::invalid_argument, "node '" + target_id + "' is not a fusion result");
      std::set<NodeId> disable;
      if (record.contains("disable"))
        for (auto& d : string_list(record["disable"], "what_if.disable")) disable.insert(std::move(d));
      std::map<NodeId, double> rediscount;
      if (record.contains("rediscount")) {
        const Json& rd = record["rediscount"];
        if (!rd.is_object()) fail(ErrorCode::validation_error, "what_if.rediscount must be an object");
        for (auto it = rd.begin(); it != rd.end(); ++it) {
          if (!it.value().is_number()) fail(ErrorCode::validation_error, "what_if.rediscount values must be numbers");
          check_rate(it.value().get<double>());
          rediscount[it.key()] = it.value().get<double>();
        }
      }
      std::vector<NodeId> survivors;
      for (const auto& id : fused->selected)
        if (!disable.count(id)) survivors.push_back(id);
      if (survivors.size() < 2)
        fail(ErrorCode::insufficient_inputs, "what-if would leave fewer than 2 inputs to fuse");
      stage_fusion(st, survivors, fused->rule, fused->target, fused->auto_discount, rediscount, target_id, stop);
    } else if (kind == "set_disabled") {
      const NodeId id = string_field(record, "node", "set_disabled");
      node(id);
      st.disable_updates.emplace_back(id, field(record, "disabled", "set_disabled").get<bool>());
    } else if (kind == "configure_auto_discount") {
      st.new_config = auto_discount_from_json(record);
    } else {
      fail(ErrorCode::validation_error, "unknown operation '" + kind + "'");
    }

    std::vector<NodeId> produced;
    for (const auto& n : st.nodes) produced.push_back(n.id);
    if (record.contains("result")) {
      const Json& expected = record["result"];
      if (expected != Json(produced))
        fail(ErrorCode::replay_mismatch, "log record '" + kind + "' produced " + Json(produced).dump() +
                                             " but the log says " + expected.dump());
    }
    if (stop.stop_requested()) fail(ErrorCode::cancelled, "operation cancelled");

    // commit
    for (auto& n : st.nodes) {
      order_.push_back(n.id);
      nodes_.emplace(n.id, std::move(n));
    }
    for (const auto& [id, d] : st.disable_updates) nodes_.at(id).disabled = d;
    if (st.new_config) auto_discount_ = *st.new_config;
    next_id_ = st.counter;
    logged["result"] = produced;
    log_.push_back(std::move(logged));
    return produced;
  }

  NodeId apply_one(const Json& record, std::stop_token stop = {}) {
    auto produced = apply(record, stop);
    return produced.back();
  }

  bool has_auto_discount_ancestor(const Staging& st, const NodeId& id) const {
    std::vector<NodeId> stack{id};
    std::set<NodeId> seen;
    while (!stack.empty()) {
      NodeId cur = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      const LineageNode& n = st.get(cur);
      if (std::holds_alternative<op::AutoDiscounted>(n.op)) return true;
      for (const auto& in : n.inputs) stack.push_back(in);
    }
    return false;
  }

  // Returns the id holding the BOE on `target`; without `force`, inputs
  // already on the target are passed through without a new node.
  NodeId stage_translation(Staging& st, const NodeId& in, const std::string& target, bool force) {
    const Boe& boe = st.get(in).boe;
    auto path = kb_.gallery.translation_path(boe.frame().id(), target);
    if (path.empty() && !force) return in;
    std::vector<std::string> frames{boe.frame().id()};
    for (const auto& step : path) frames.push_back(step.to());
    const NodeId id = st.next_id();
    st.add({id, translate_along(boe, path).with_id(id), op::Translated{std::move(frames)}, {in}});
    return id;
  }

  void stage_fusion(Staging& st, const std::vector<NodeId>& selected, FusionRule rule, const std::string& target,
                    bool auto_on, const std::map<NodeId, double>& rediscount, std::optional<NodeId> what_if_of,
                    std::stop_token stop) {
    if (selected.size() < 2) fail(ErrorCode::insufficient_inputs, "fusion needs at least 2 nodes");
    kb_.gallery.frame(target);
    for (const auto& id : selected) {
      node(id);
      kb_.gallery.translation_path(node(id).boe.frame().id(), target);  // reachability check up front
    }
    std::vector<NodeId> contributions;
    for (const auto& sel : selected) {
      if (stop.stop_requested()) fail(ErrorCode::cancelled, "fusion cancelled");
      NodeId cur = sel;
      if (auto it = rediscount.find(sel); it != rediscount.end()) {
        const NodeId id = st.next_id();
        st.add({id, horizon::discount(st.get(cur).boe, it->second).with_id(id), op::Discounted{it->second}, {cur}});
        cur = id;
      } else if (auto_on && !has_auto_discount_ancestor(st, cur)) {
        const Boe& boe = st.get(cur).boe;
        const double rate = auto_discount_.rate_for(boe.source().confidence);
        if (rate > 0.0) {
          const NodeId id = st.next_id();
          st.add({id, horizon::discount(boe, rate).with_id(id), op::AutoDiscounted{rate}, {cur}});
          cur = id;
        }
      }
      cur = stage_translation(st, cur, target, /*force=*/false);
      contributions.push_back(cur);
    }
    if (stop.stop_requested()) fail(ErrorCode::cancelled, "fusion cancelled");
    std::vector<Boe> boes;
    boes.reserve(contributions.size());
    for (const auto& c : contributions) boes.push_back(st.get(c).boe);
    Boe fused = fuse(boes, rule);
    const NodeId id = st.next_id();
    st.add({id, fused.with_id(id), op::Fused{rule, target, selected, auto_on, std::move(what_if_of)},
            std::move(contributions)});
  }

  KnowledgeBase kb_;
  AutoDiscountConfig initial_auto_discount_;
  AutoDiscountConfig auto_discount_;
  std::map<NodeId, LineageNode> nodes_;
  std::vector<NodeId> order_;
  std::vector<Json> log_;
  std::size_t next_id_ = 0;
};

}  // namespace horizon
