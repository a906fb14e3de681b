#pragma once

// Scenario text format.
//
//   # comment (to end of line)
//   name = gaussian-breaking
//
//   [grid]
//   L = 24
//   N = 32768
//
//   [weight.algebraic]      # nested section: <section>.<label>[.<sub>]
//   kind = standard
//
// Keys before the first section header belong to the root section. Every
// line is either blank, a comment, a section header or `key = value`.
// Duplicate sections and duplicate keys are errors.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "chlab/error.hpp"

namespace chlab::harness {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string name;  // "" for the root section
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const {
    for (const auto& e : entries)
      if (e.key == key) return &e;
    return nullptr;
  }
};

struct ConfigDoc {
  std::vector<ConfigSection> sections;

  ConfigSection& root() {
    if (sections.empty() || !sections.front().name.empty()) sections.insert(sections.begin(), ConfigSection{"", 0, {}});
    return sections.front();
  }

  const ConfigSection* find(std::string_view name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }

  /// Sets (or adds) `key` in `section`, creating the section if needed.
  void set(const std::string& section, const std::string& key, const std::string& value) {
    ConfigSection* sec = nullptr;
    if (section.empty()) {
      sec = &root();
    } else {
      for (auto& s : sections)
        if (s.name == section) sec = &s;
      if (!sec) {
        sections.push_back(ConfigSection{section, 0, {}});
        sec = &sections.back();
      }
    }
    for (auto& e : sec->entries)
      if (e.key == key) {
        e.value = value;
        return;
      }
    sec->entries.push_back(ConfigEntry{key, value, 0});
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace detail

inline ConfigDoc parse_config(std::string_view text) {
  ConfigDoc doc;
  doc.sections.push_back(ConfigSection{"", 0, {}});
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "", "section header is missing ']'");
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::valid_identifier(name) || name.front() == '.' || name.back() == '.' ||
          name.find("..") != std::string_view::npos)
        throw ParseError(line_no, std::string(name), "invalid section name");
      if (doc.find(name)) throw ParseError(line_no, std::string(name), "duplicate section");
      doc.sections.push_back(ConfigSection{std::string(name), line_no, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "", "expected 'key = value' or '[section]'");
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    if (!detail::valid_identifier(key) || key.find('.') != std::string_view::npos)
      throw ParseError(line_no, std::string(key), "invalid key");
    if (value.empty()) throw ParseError(line_no, std::string(key), "missing value");
    auto& sec = doc.sections.back();
    if (sec.find(key)) throw ParseError(line_no, std::string(key), "duplicate key");
    sec.entries.push_back(ConfigEntry{std::string(key), std::string(value), line_no});
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Typed access

/// Shortest round-trip representation; "inf" / "-inf" for infinities.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view s) {
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  if (s == "-inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
  return v;
}

/// Reads a section, remembering which keys were consumed so that leftovers
/// (typos) can be reported.
class SectionReader {
 public:
  SectionReader(const ConfigSection* sec, std::string name) : sec_(sec), name_(std::move(name)) {}

  bool present() const { return sec_ != nullptr; }
  std::size_t line() const { return sec_ ? sec_->line : 0; }
  const std::string& name() const { return name_; }

  bool has(std::string_view key) const { return sec_ && sec_->find(key); }

  double number(std::string_view key, std::optional<double> fallback = std::nullopt) {
    const ConfigEntry* e = take(key);
    if (!e) {
      if (fallback) return *fallback;
      throw ParseError(line(), qualified(key), "required numeric value is missing");
    }
    const auto v = parse_number(e->value);
    if (!v) throw ParseError(e->line, qualified(key), "'" + e->value + "' is not a number");
    return *v;
  }

  double positive(std::string_view key, std::optional<double> fallback = std::nullopt) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) throw ParseError(line_of(key), qualified(key), "must be > 0");
    return v;
  }

  std::int64_t integer(std::string_view key, std::optional<std::int64_t> fallback = std::nullopt) {
    const ConfigEntry* e = take(key);
    if (!e) {
      if (fallback) return *fallback;
      throw ParseError(line(), qualified(key), "required integer value is missing");
    }
    std::int64_t v = 0;
    const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (res.ec != std::errc() || res.ptr != e->value.data() + e->value.size())
      throw ParseError(e->line, qualified(key), "'" + e->value + "' is not an integer");
    return v;
  }

  bool boolean(std::string_view key, bool fallback) {
    const ConfigEntry* e = take(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "on") return true;
    if (e->value == "false" || e->value == "no" || e->value == "off") return false;
    throw ParseError(e->line, qualified(key), "'" + e->value + "' is not a boolean");
  }

  std::string text(std::string_view key, std::optional<std::string> fallback = std::nullopt) {
    const ConfigEntry* e = take(key);
    if (!e) {
      if (fallback) return *fallback;
      throw ParseError(line(), qualified(key), "required value is missing");
    }
    return e->value;
  }

  std::vector<double> number_list(std::string_view key, std::vector<double> fallback) {
    const ConfigEntry* e = take(key);
    if (!e) return fallback;
    std::vector<double> out;
    std::string_view rest = e->value;
    while (true) {
      const auto comma = rest.find(',');
      const auto item = detail::trim(rest.substr(0, comma));
      const auto v = parse_number(item);
      if (!v) throw ParseError(e->line, qualified(key), "'" + std::string(item) + "' is not a number");
      out.push_back(*v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return out;
  }

  std::size_t line_of(std::string_view key) const {
    const ConfigEntry* e = sec_ ? sec_->find(key) : nullptr;
    return e ? e->line : line();
  }

  std::string qualified(std::string_view key) const {
    return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
  }

  /// Throws on the first key that was never read.
  void finish() const {
    if (!sec_) return;
    for (const auto& e : sec_->entries)
      if (std::find(used_.begin(), used_.end(), e.key) == used_.end())
        throw ParseError(e.line, qualified(e.key), "unknown key");
  }

 private:
  const ConfigEntry* take(std::string_view key) {
    if (!sec_) return nullptr;
    const ConfigEntry* e = sec_->find(key);
    if (e) used_.emplace_back(key);
    return e;
  }

  const ConfigSection* sec_;
  std::string name_;
  std::vector<std::string> used_;
};

}  // namespace chlab::harness
