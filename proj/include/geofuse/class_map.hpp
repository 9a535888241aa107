#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geofuse/ascii_grid.hpp"  // split_lines / split_fields helpers
#include "geofuse/errors.hpp"
#include "geofuse/geometry.hpp"

namespace geofuse {

using Rgb = std::array<uint8_t, 3>;

/// Glob match with '*' wildcards only (the tag lists this mirrors are category
/// names, not regexes).
inline bool glob_match(std::string_view pattern, std::string_view value) {
  size_t p = 0, v = 0;
  size_t star = std::string_view::npos, mark = 0;
  while (v < value.size()) {
    if (p < pattern.size() && (pattern[p] == value[v])) {
      ++p;
      ++v;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = v;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      v = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

/// Tag predicate: exact key, glob pattern on the value.
struct TagSelector {
  std::string key;
  std::string value_pattern = "*";

  bool matches(const Feature& f) const {
    auto it = f.properties.find(key);
    return it != f.properties.end() && glob_match(value_pattern, it->second);
  }
};

struct ClassMapEntry {
  std::string tag_key;
  std::string tag_value_pattern;
  int class_id = 0;
  Rgb color{0, 0, 0};
  double buffer_radius = 0.0;  // world units; applies to points and linestrings

  bool matches(const Feature& f) const {
    return TagSelector{tag_key, tag_value_pattern}.matches(f);
  }
};

/// Ordered tag->class->color mapping. Later entries overwrite earlier ones
/// where features overlap (painter's order).
struct ClassMap {
  std::vector<ClassMapEntry> entries;
  int background_class_id = 0;
  Rgb background_color{0, 0, 0};

  void validate() const {
    std::set<int> ids;
    std::set<uint32_t> colors;
    auto pack = [](Rgb c) { return (uint32_t(c[0]) << 16) | (uint32_t(c[1]) << 8) | c[2]; };
    for (const auto& e : entries) {
      if (e.buffer_radius < 0.0) throw parameter_error("classmap: buffer radius must be >= 0");
      if (!ids.insert(e.class_id).second)
        throw parse_error("classmap: duplicate class id " + std::to_string(e.class_id));
      if (!colors.insert(pack(e.color)).second)
        throw parse_error("classmap: duplicate color for class " + std::to_string(e.class_id));
    }
    if (ids.count(background_class_id) == 0 && !colors.insert(pack(background_color)).second)
      throw parse_error("classmap: background color collides with an entry color");
  }

  const ClassMapEntry* find_class(int class_id) const {
    for (const auto& e : entries)
      if (e.class_id == class_id) return &e;
    return nullptr;
  }
};

namespace detail {

inline Rgb parse_color(std::string_view s, size_t line_no) {
  if (s.size() != 7 || s[0] != '#')
    throw parse_error("classmap line " + std::to_string(line_no) + ": color must be #RRGGBB");
  auto hex = [&](char ch) -> int {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
    throw parse_error("classmap line " + std::to_string(line_no) + ": bad hex digit");
  };
  Rgb c;
  for (int i = 0; i < 3; ++i)
    c[i] = static_cast<uint8_t>(hex(s[1 + 2 * i]) * 16 + hex(s[2 + 2 * i]));
  return c;
}

}  // namespace detail

/// Text config, one entry per line:
///   tag_key=tag_value_pattern class=<int> color=#RRGGBB buffer=<float>
/// plus an optional background declaration:
///   background class=<int> color=#RRGGBB
/// '#' at line start begins a comment.
inline ClassMap parse_class_map(std::string_view text) {
  ClassMap cm;
  auto lines = detail::split_lines(text);
  for (size_t li = 0; li < lines.size(); ++li) {
    auto line = lines[li];
    auto fields = detail::split_fields(line);
    if (fields.empty() || fields[0][0] == '#') continue;
    size_t line_no = li + 1;
    auto fail = [&](const std::string& what) {
      return parse_error("classmap line " + std::to_string(line_no) + ": " + what);
    };

    std::map<std::string, std::string> kv;
    std::string head(fields[0]);
    for (size_t i = 1; i < fields.size(); ++i) {
      std::string f(fields[i]);
      size_t eq = f.find('=');
      if (eq == std::string::npos) throw fail("expected key=value, got '" + f + "'");
      kv[f.substr(0, eq)] = f.substr(eq + 1);
    }

    if (head == "background") {
      if (kv.count("class")) cm.background_class_id = std::stoi(kv["class"]);
      if (kv.count("color")) cm.background_color = detail::parse_color(kv["color"], line_no);
      continue;
    }

    size_t eq = head.find('=');
    if (eq == std::string::npos) throw fail("entry must start with tag_key=tag_value_pattern");
    ClassMapEntry e;
    e.tag_key = head.substr(0, eq);
    e.tag_value_pattern = head.substr(eq + 1);
    if (!kv.count("class")) throw fail("missing class=<int>");
    e.class_id = std::stoi(kv["class"]);
    if (e.class_id < 0) throw fail("class id must be non-negative");
    if (!kv.count("color")) throw fail("missing color=#RRGGBB");
    e.color = detail::parse_color(kv["color"], line_no);
    if (kv.count("buffer")) e.buffer_radius = std::stod(kv["buffer"]);
    cm.entries.push_back(std::move(e));
  }
  cm.validate();
  return cm;
}

}  // namespace geofuse
