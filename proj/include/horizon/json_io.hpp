#pragma once

// Canonical JSON writer and shared (de)serializers for frames, BOEs and
// source metadata. Object keys come out sorted, arrays keep their order and
// floating-point numbers print with 17 significant digits, so a value
// survives a write/read cycle bit-exactly and a second write is byte-identical.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "horizon/belief.hpp"
#include "horizon/error.hpp"

namespace horizon {

using Json = nlohmann::json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "  ";
}

inline void write_canonical(std::ostream& os, const Json& j, int depth) {
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        write_indent(os, depth + 1);
        os << Json(it.key()).dump() << ": ";
        write_canonical(os, it.value(), depth + 1);
      }
      os << "\n";
      write_indent(os, depth);
      os << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      if (flat) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i > 0) os << ", ";
          write_canonical(os, j[i], depth);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) os << ",\n";
        write_indent(os, depth + 1);
        write_canonical(os, j[i], depth + 1);
      }
      os << "\n";
      write_indent(os, depth);
      os << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) fail(ErrorCode::invalid_argument, "cannot serialize a non-finite number");
      os << format_double(v);
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline void write_canonical(std::ostream& os, const Json& j) {
  detail::write_canonical(os, j, 0);
  os << "\n";
}

inline std::string to_canonical(const Json& j) {
  std::ostringstream os;
  write_canonical(os, j);
  return os.str();
}

// Parses UTF-8 JSON text, turning parser failures into parse_error with a
// 1-based line and column.
inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::parse_error, "JSON parse error at line " + std::to_string(line) + ", column " +
                                     std::to_string(col) + ": " + e.what());
  }
}

// Typed field access that reports the path of the offending field.
inline const Json& field(const Json& obj, const char* key, std::string_view where) {
  if (!obj.is_object()) fail(ErrorCode::validation_error, std::string(where) + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end())
    fail(ErrorCode::validation_error, std::string(where) + " is missing field '" + key + "'");
  return *it;
}

inline std::string string_field(const Json& obj, const char* key, std::string_view where) {
  const Json& v = field(obj, key, where);
  if (!v.is_string()) fail(ErrorCode::validation_error, std::string(where) + "." + key + " must be a string");
  return v.get<std::string>();
}

inline double number_field(const Json& obj, const char* key, std::string_view where) {
  const Json& v = field(obj, key, where);
  if (!v.is_number()) fail(ErrorCode::validation_error, std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

inline const Json& array_field(const Json& obj, const char* key, std::string_view where) {
  const Json& v = field(obj, key, where);
  if (!v.is_array()) fail(ErrorCode::validation_error, std::string(where) + "." + key + " must be an array");
  return v;
}

inline std::vector<std::string> string_list(const Json& arr, std::string_view where) {
  if (!arr.is_array()) fail(ErrorCode::validation_error, std::string(where) + " must be an array of strings");
  std::vector<std::string> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_string()) fail(ErrorCode::validation_error, std::string(where) + " must contain only strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline Json to_json(const Frame& f) {
  return Json{{"id", f.id()}, {"label", f.label()}, {"propositions", f.propositions()}};
}

inline FramePtr frame_from_json(const Json& j) {
  const std::string id = string_field(j, "id", "frame");
  std::string label = j.contains("label") ? string_field(j, "label", "frame '" + id + "'") : id;
  return make_frame(id, string_list(field(j, "propositions", "frame '" + id + "'"), "frame '" + id + "'.propositions"),
                    std::move(label));
}

inline Json to_json(const SourceMeta& s) {
  Json j{{"name", s.name},
         {"confidence", std::string(to_string(s.confidence))},
         {"independent", s.independent},
         {"entry_path", std::string(to_string(s.entry_path))}};
  if (s.timestamp) j["timestamp"] = *s.timestamp;
  return j;
}

inline SourceMeta source_from_json(const Json& j, EntryPath default_path = EntryPath::manual) {
  SourceMeta s;
  s.entry_path = default_path;
  if (j.is_null()) return s;
  if (!j.is_object()) fail(ErrorCode::validation_error, "source must be an object");
  if (j.contains("name")) s.name = string_field(j, "name", "source");
  if (j.contains("confidence")) s.confidence = parse_confidence(string_field(j, "confidence", "source"));
  if (j.contains("independent")) {
    if (!j["independent"].is_boolean()) fail(ErrorCode::validation_error, "source.independent must be a boolean");
    s.independent = j["independent"].get<bool>();
  }
  if (j.contains("entry_path")) s.entry_path = parse_entry_path(string_field(j, "entry_path", "source"));
  if (j.contains("timestamp")) s.timestamp = string_field(j, "timestamp", "source");
  return s;
}

// Masses as [{"set": [labels...], "mass": x}] in focal-set order.
inline Json masses_to_json(const Boe& b) {
  Json arr = Json::array();
  for (const auto& fe : b.focal()) arr.push_back(Json{{"set", b.frame().labels_of(fe.set)}, {"mass", fe.mass}});
  return arr;
}

inline std::vector<Assignment> assignments_from_json(const Frame& frame, const Json& arr, std::string_view where) {
  if (!arr.is_array()) fail(ErrorCode::validation_error, std::string(where) + ".masses must be an array");
  std::vector<Assignment> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    const auto labels = string_list(field(e, "set", where), std::string(where) + ".set");
    out.push_back({PropSet::of(frame, labels), number_field(e, "mass", where)});
  }
  return out;
}

// Raw focal elements (empty set allowed) for restoring derived BOEs verbatim.
inline std::vector<FocalElement> focal_from_json(const Frame& frame, const Json& arr, std::string_view where) {
  if (!arr.is_array()) fail(ErrorCode::validation_error, std::string(where) + ".masses must be an array");
  std::vector<FocalElement> out;
  for (const auto& e : arr) {
    const auto labels = string_list(field(e, "set", where), std::string(where) + ".set");
    out.push_back({frame.subset_of(labels), number_field(e, "mass", where)});
  }
  return out;
}

}  // namespace horizon
