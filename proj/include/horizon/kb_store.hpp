#pragma once

// Knowledge base: the frame gallery plus static BOEs, stored as one canonical
// UTF-8 JSON document (*.horizon.json, schema version "1").

#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "horizon/belief.hpp"
#include "horizon/compat.hpp"
#include "horizon/error.hpp"
#include "horizon/json_io.hpp"

namespace horizon {

inline constexpr const char* kKbSchemaVersion = "1";

struct KbMeta {
  std::string name;
  std::string version;
  std::string created;  // ISO-8601

  bool operator==(const KbMeta&) const = default;
};

struct KnowledgeBase {
  FrameGallery gallery;
  std::vector<Boe> static_boes;
  KbMeta meta;
};

using LabelPairs = std::vector<std::pair<std::string, std::string>>;

inline Json kb_to_json(const KnowledgeBase& kb) {
  Json frames = Json::array();
  for (const auto& f : kb.gallery.frames()) frames.push_back(to_json(*f));
  Json relations = Json::array();
  for (const auto& rel : kb.gallery.relations()) {
    Json pairs = Json::array();
    for (const auto& [la, lb] : rel->label_pairs()) pairs.push_back(Json::array({la, lb}));
    relations.push_back(Json{{"a", rel->frame_a().id()}, {"b", rel->frame_b().id()}, {"pairs", std::move(pairs)}});
  }
  Json boes = Json::array();
  for (const auto& b : kb.static_boes)
    boes.push_back(Json{{"id", b.id()}, {"frame", b.frame().id()}, {"masses", masses_to_json(b)},
                        {"source", to_json(b.source())}});
  return Json{{"version", kKbSchemaVersion},
              {"meta", Json{{"name", kb.meta.name}, {"version", kb.meta.version}, {"created", kb.meta.created}}},
              {"frames", std::move(frames)},
              {"relations", std::move(relations)},
              {"static_boes", std::move(boes)}};
}

// Full validation; any defect raises before a KnowledgeBase value exists.
inline KnowledgeBase kb_from_json(const Json& doc) {
  if (!doc.is_object()) fail(ErrorCode::validation_error, "KB document must be a JSON object");
  if (doc.contains("version")) {
    const auto& v = doc["version"];
    if (!v.is_string() || v.get<std::string>() != kKbSchemaVersion)
      fail(ErrorCode::version_mismatch, "unsupported KB schema version " + v.dump());
  }
  KnowledgeBase kb;
  if (doc.contains("meta")) {
    const Json& m = doc["meta"];
    if (!m.is_object()) fail(ErrorCode::validation_error, "meta must be an object");
    if (m.contains("name")) kb.meta.name = string_field(m, "name", "meta");
    if (m.contains("version")) kb.meta.version = string_field(m, "version", "meta");
    if (m.contains("created")) kb.meta.created = string_field(m, "created", "meta");
  }

  const Json& frames = array_field(doc, "frames", "KB");
  if (frames.empty()) fail(ErrorCode::validation_error, "KB must define at least one frame");
  for (const auto& fj : frames) {
    FramePtr f;
    try {
      f = frame_from_json(fj);
    } catch (const Error& e) {
      fail(ErrorCode::validation_error, std::string("invalid frame: ") + e.what());
    }
    if (kb.gallery.has_frame(f->id()))
      fail(ErrorCode::validation_error, "frame '" + f->id() + "' is defined twice");
    kb.gallery.add_frame(std::move(f));
  }

  if (doc.contains("relations")) {
    for (const auto& rj : array_field(doc, "relations", "KB")) {
      const std::string a = string_field(rj, "a", "relation");
      const std::string b = string_field(rj, "b", "relation");
      const std::string where = "relation " + a + "<->" + b;
      LabelPairs pairs;
      for (const auto& p : array_field(rj, "pairs", where)) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
          fail(ErrorCode::validation_error, where + ": each pair must be [label_a, label_b]");
        pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
      }
      try {
        kb.gallery.add_relation(a, b, pairs);
      } catch (const Error& e) {
        fail(ErrorCode::validation_error, where + ": " + e.what());
      }
    }
  }

  if (doc.contains("static_boes")) {
    std::set<std::string> ids;
    for (const auto& bj : array_field(doc, "static_boes", "KB")) {
      const std::string id = string_field(bj, "id", "static BOE");
      const std::string where = "static BOE '" + id + "'";
      if (!ids.insert(id).second) fail(ErrorCode::validation_error, where + " is defined twice");
      const std::string frame_id = string_field(bj, "frame", where);
      if (!kb.gallery.has_frame(frame_id))
        fail(ErrorCode::validation_error, where + " references unknown frame '" + frame_id + "'");
      const FramePtr& frame = kb.gallery.frame(frame_id);
      try {
        auto assignments = assignments_from_json(*frame, field(bj, "masses", where), where);
        SourceMeta src = source_from_json(bj.value("source", Json()), EntryPath::static_kb);
        kb.static_boes.push_back(make_boe(frame, assignments, std::move(src), id));
      } catch (const Error& e) {
        fail(e.code() == ErrorCode::mass_sum_exceeded ? ErrorCode::mass_sum_exceeded : ErrorCode::validation_error,
             where + ": " + e.what());
      }
    }
  }
  return kb;
}

inline KnowledgeBase load_kb(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::io_error, "failed to read KB stream");
  return kb_from_json(parse_json(text));
}

inline KnowledgeBase load_kb_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open KB file '" + path + "'");
  return load_kb(in);
}

inline void save_kb(const KnowledgeBase& kb, std::ostream& out) {
  write_canonical(out, kb_to_json(kb));
  out.flush();
  if (!out) fail(ErrorCode::io_error, "failed to write KB stream");
}

inline std::string save_kb_string(const KnowledgeBase& kb) {
  std::ostringstream os;
  save_kb(kb, os);
  return os.str();
}

// Returns a new KB with pairs added to and removed from the a<->b relation.
// The relation is created when absent.
inline KnowledgeBase edit_relation(const KnowledgeBase& kb, const std::string& frame_a, const std::string& frame_b,
                                   const LabelPairs& add, const LabelPairs& remove) {
  const FramePtr& a = kb.gallery.frame(frame_a);
  const FramePtr& b = kb.gallery.frame(frame_b);
  if (a->id() == b->id()) fail(ErrorCode::invalid_argument, "a relation needs two distinct frames");
  RelationPtr existing = kb.gallery.relation_between(frame_a, frame_b);

  // Work in the caller's orientation, then map back onto the stored relation's.
  std::set<std::pair<std::string, std::string>> pairs;
  if (existing) {
    const bool same = existing->frame_a().id() == frame_a;
    for (auto [x, y] : existing->label_pairs()) pairs.insert(same ? std::make_pair(x, y) : std::make_pair(y, x));
  }
  for (const auto& [x, y] : add) {
    if (!a->index_of(x)) fail(ErrorCode::unknown_label, "frame '" + frame_a + "' has no proposition '" + x + "'");
    if (!b->index_of(y)) fail(ErrorCode::unknown_label, "frame '" + frame_b + "' has no proposition '" + y + "'");
    pairs.emplace(x, y);
  }
  std::string missing;
  for (const auto& p : remove) {
    if (pairs.erase(p) == 0) missing += (missing.empty() ? "" : ", ") + ("(" + p.first + ", " + p.second + ")");
  }
  if (!missing.empty()) fail(ErrorCode::missing_pair, "relation " + frame_a + "<->" + frame_b + " has no pair " + missing);

  KnowledgeBase out = kb;
  LabelPairs list(pairs.begin(), pairs.end());
  if (existing && existing->frame_a().id() != frame_a) {
    for (auto& p : list) std::swap(p.first, p.second);
    out.gallery.add_relation(frame_b, frame_a, list, true);
  } else {
    out.gallery.add_relation(frame_a, frame_b, list, true);
  }
  return out;
}

}  // namespace horizon
