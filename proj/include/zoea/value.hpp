#pragma once

// Universal data value model: a JSON superset with an "unspecified"
// wildcard, canonical text rendering, paths and element enumeration.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace zoea {

class Value;

using ValueList = std::vector<Value>;
using ValueRecord = std::vector<std::pair<std::string, Value>>;

enum class ValueKind { Null, Boolean, Number, Text, List, Record, Unspecified };

// One step of a path: 0-based list index or record key.
using PathStep = std::variant<std::int64_t, std::string>;
using Path = std::vector<PathStep>;

struct ValueError : std::runtime_error {
  explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
  std::size_t offset;
  std::size_t line;
  ParseError(const std::string& msg, std::size_t offset_, std::size_t line_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) +
                           ", offset " + std::to_string(offset_) + ")"),
        offset(offset_),
        line(line_) {}
};

class Value {
 public:
  Value() : rep_(nullptr) {}  // Null
  Value(bool b) : rep_(b) {}
  Value(std::int64_t i) : rep_(i) {}
  Value(int i) : rep_(static_cast<std::int64_t>(i)) {}
  Value(double d) : rep_(d) {}
  Value(std::string text)
      : rep_(std::make_shared<const std::string>(std::move(text))) {}
  Value(const char* text) : Value(std::string(text)) {}

  static Value null() { return Value(); }
  static Value unspecified() {
    Value v;
    v.rep_ = Unspec{};
    return v;
  }
  static Value list(ValueList items) {
    Value v;
    v.rep_ = std::make_shared<const ValueList>(std::move(items));
    return v;
  }
  static Value record(ValueRecord fields) {
    for (std::size_t i = 0; i < fields.size(); ++i)
      for (std::size_t j = i + 1; j < fields.size(); ++j)
        if (fields[i].first == fields[j].first)
          throw ValueError("duplicate record key: " + fields[i].first);
    Value v;
    v.rep_ = std::make_shared<const ValueRecord>(std::move(fields));
    return v;
  }

  ValueKind kind() const {
    switch (rep_.index()) {
      case 0: return ValueKind::Null;
      case 1: return ValueKind::Boolean;
      case 2: return ValueKind::Number;
      case 3: return ValueKind::Number;
      case 4: return ValueKind::Text;
      case 5: return ValueKind::List;
      case 6: return ValueKind::Record;
      default: return ValueKind::Unspecified;
    }
  }

  bool is_null() const { return kind() == ValueKind::Null; }
  bool is_boolean() const { return kind() == ValueKind::Boolean; }
  bool is_number() const { return kind() == ValueKind::Number; }
  bool is_int() const { return rep_.index() == 2; }
  bool is_decimal() const { return rep_.index() == 3; }
  bool is_text() const { return kind() == ValueKind::Text; }
  bool is_list() const { return kind() == ValueKind::List; }
  bool is_record() const { return kind() == ValueKind::Record; }
  bool is_unspecified() const { return kind() == ValueKind::Unspecified; }

  bool as_boolean() const { return std::get<1>(rep_); }
  std::int64_t as_int() const { return std::get<2>(rep_); }
  double as_decimal() const { return std::get<3>(rep_); }
  // Numeric value as double regardless of representation.
  double number() const {
    return is_int() ? static_cast<double>(as_int()) : as_decimal();
  }
  const std::string& text() const { return *std::get<4>(rep_); }
  const ValueList& items() const { return *std::get<5>(rep_); }
  const ValueRecord& fields() const { return *std::get<6>(rep_); }

  const Value* field(std::string_view key) const {
    for (const auto& [k, v] : fields())
      if (k == key) return &v;
    return nullptr;
  }

  bool contains_unspecified() const {
    switch (kind()) {
      case ValueKind::Unspecified: return true;
      case ValueKind::List:
        for (const auto& it : items())
          if (it.contains_unspecified()) return true;
        return false;
      case ValueKind::Record:
        for (const auto& [k, v] : fields())
          if (v.contains_unspecified()) return true;
        return false;
      default: return false;
    }
  }

  friend bool operator==(const Value& a, const Value& b) {
    return compare(a, b) == 0;
  }
  friend bool operator!=(const Value& a, const Value& b) {
    return compare(a, b) != 0;
  }
  friend bool operator<(const Value& a, const Value& b) {
    return compare(a, b) < 0;
  }

  // Total order over all values. Kinds order Null < Boolean < Number < Text
  // < List < Record < Unspecified; numbers compare numerically (an exact
  // integer equals the numerically equal decimal), records compare as
  // key-sorted field sequences.
  static int compare(const Value& a, const Value& b) {
    int ka = kind_rank(a), kb = kind_rank(b);
    if (ka != kb) return ka < kb ? -1 : 1;
    switch (a.kind()) {
      case ValueKind::Null:
      case ValueKind::Unspecified: return 0;
      case ValueKind::Boolean: {
        bool x = a.as_boolean(), y = b.as_boolean();
        return x == y ? 0 : (x < y ? -1 : 1);
      }
      case ValueKind::Number: return compare_numbers(a, b);
      case ValueKind::Text: {
        int c = a.text().compare(b.text());
        return c == 0 ? 0 : (c < 0 ? -1 : 1);
      }
      case ValueKind::List: {
        const auto& x = a.items();
        const auto& y = b.items();
        std::size_t n = std::min(x.size(), y.size());
        for (std::size_t i = 0; i < n; ++i)
          if (int c = compare(x[i], y[i]); c != 0) return c;
        return x.size() == y.size() ? 0 : (x.size() < y.size() ? -1 : 1);
      }
      case ValueKind::Record: {
        auto xs = sorted_fields(a.fields());
        auto ys = sorted_fields(b.fields());
        std::size_t n = std::min(xs.size(), ys.size());
        for (std::size_t i = 0; i < n; ++i) {
          if (int c = xs[i]->first.compare(ys[i]->first); c != 0)
            return c < 0 ? -1 : 1;
          if (int c = compare(xs[i]->second, ys[i]->second); c != 0) return c;
        }
        return xs.size() == ys.size() ? 0 : (xs.size() < ys.size() ? -1 : 1);
      }
    }
    return 0;
  }

 private:
  struct Unspec {};
  using Rep = std::variant<std::nullptr_t, bool, std::int64_t, double,
                           std::shared_ptr<const std::string>,
                           std::shared_ptr<const ValueList>,
                           std::shared_ptr<const ValueRecord>, Unspec>;
  Rep rep_;

  static int kind_rank(const Value& v) {
    switch (v.kind()) {
      case ValueKind::Null: return 0;
      case ValueKind::Boolean: return 1;
      case ValueKind::Number: return 2;
      case ValueKind::Text: return 3;
      case ValueKind::List: return 4;
      case ValueKind::Record: return 5;
      case ValueKind::Unspecified: return 6;
    }
    return 7;
  }

  static int compare_numbers(const Value& a, const Value& b) {
    if (a.is_int() && b.is_int()) {
      auto x = a.as_int(), y = b.as_int();
      return x == y ? 0 : (x < y ? -1 : 1);
    }
    // Mixed or decimal: long double holds every int64 exactly on x86-64.
    long double x = a.is_int() ? static_cast<long double>(a.as_int())
                               : static_cast<long double>(a.as_decimal());
    long double y = b.is_int() ? static_cast<long double>(b.as_int())
                               : static_cast<long double>(b.as_decimal());
    return x == y ? 0 : (x < y ? -1 : 1);
  }

  static std::vector<const std::pair<std::string, Value>*> sorted_fields(
      const ValueRecord& r) {
    std::vector<const std::pair<std::string, Value>*> out;
    out.reserve(r.size());
    for (const auto& f : r) out.push_back(&f);
    std::sort(out.begin(), out.end(),
              [](auto* x, auto* y) { return x->first < y->first; });
    return out;
  }
};

namespace detail {

inline void render_text_quoted(const std::string& s, std::string& out) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xf];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

inline void render_number(const Value& v, std::string& out) {
  if (v.is_int()) {
    out += std::to_string(v.as_int());
    return;
  }
  double d = v.as_decimal();
  // A decimal with an exact integer value renders in integer form so that
  // canonical-text equality coincides with structural equality (4 == 4.0).
  if (d >= -9223372036854775808.0 && d < 9223372036854775808.0) {
    auto i = static_cast<std::int64_t>(d);
    if (static_cast<double>(i) == d) {
      out += std::to_string(i);
      return;
    }
  }
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, d);
  out.append(buf, r.ptr);
}

}  // namespace detail

// Canonical text: deterministic, injective on the non-Unspecified subset.
// Text is always quoted; record keys are sorted so that equal records (key
// order is not significant) render identically.
inline void render_value_to(const Value& v, std::string& out) {
  switch (v.kind()) {
    case ValueKind::Null: out += "null"; break;
    case ValueKind::Boolean: out += v.as_boolean() ? "true" : "false"; break;
    case ValueKind::Number: detail::render_number(v, out); break;
    case ValueKind::Text: detail::render_text_quoted(v.text(), out); break;
    case ValueKind::List: {
      out += '[';
      bool first = true;
      for (const auto& it : v.items()) {
        if (!first) out += ',';
        first = false;
        render_value_to(it, out);
      }
      out += ']';
      break;
    }
    case ValueKind::Record: {
      std::vector<const std::pair<std::string, Value>*> fs;
      for (const auto& f : v.fields()) fs.push_back(&f);
      std::sort(fs.begin(), fs.end(),
                [](auto* a, auto* b) { return a->first < b->first; });
      out += '{';
      bool first = true;
      for (auto* f : fs) {
        if (!first) out += ',';
        first = false;
        detail::render_text_quoted(f->first, out);
        out += ':';
        render_value_to(f->second, out);
      }
      out += '}';
      break;
    }
    case ValueKind::Unspecified: out += '_'; break;
  }
}

inline std::string render_value(const Value& v) {
  std::string out;
  render_value_to(v, out);
  return out;
}

// ---------------------------------------------------------------------------
// Value scanning. Shared by parse_value and the program source parser: scans
// exactly one value starting at `pos`, advancing past it.

class ValueScanner {
 public:
  ValueScanner(std::string_view src, std::size_t pos = 0)
      : src_(src), pos_(pos) {}

  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }

  std::size_t line_at(std::size_t pos) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos && i < src_.size(); ++i)
      if (src_[i] == '\n') ++line;
    return line;
  }

  void skip_ws() {
    while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= src_.size();
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, at, line_at(at));
  }

  Value scan_value() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected a value", pos_);
    char c = src_[pos_];
    if (c == '[') return scan_list();
    if (c == '{') return scan_record();
    if (c == '"' || c == '\'') return Value(scan_quoted());
    if (c == ']' || c == '}' || c == ',' || c == ':')
      fail(std::string("expected a value, found '") + c + "'", pos_);
    return classify_bare(scan_bare());
  }

  // A quoted string (single or double quotes) with backslash escapes.
  std::string scan_quoted() {
    std::size_t start = pos_;
    char quote = src_[pos_++];
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated quoted string", start);
      char c = src_[pos_++];
      if (c == quote) return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= src_.size()) fail("unterminated escape", start);
      char e = src_[pos_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case '/': out += '/'; break;
        case '\\': out += '\\'; break;
        case '\'': out += '\''; break;
        case '"': out += '"'; break;
        case 'u': {
          if (pos_ + 4 > src_.size()) fail("truncated \\u escape", pos_);
          unsigned cp = 0;
          for (int i = 0; i < 4; ++i) {
            char h = src_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= h - '0';
            else if (h >= 'a' && h <= 'f') cp |= h - 'a' + 10;
            else if (h >= 'A' && h <= 'F') cp |= h - 'A' + 10;
            else fail("bad hex digit in \\u escape", pos_ - 1);
          }
          append_utf8(cp, out);
          break;
        }
        default: fail(std::string("unknown escape '\\") + e + "'", pos_ - 2);
      }
    }
  }

  // A bare token: ends at whitespace or a structural character.
  std::string scan_bare() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && !is_space(src_[pos_]) &&
           !is_structural(src_[pos_]))
      ++pos_;
    if (pos_ == start) fail("expected a value", start);
    return std::string(src_.substr(start, pos_ - start));
  }

  static bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  }
  static bool is_structural(char c) {
    return c == '[' || c == ']' || c == '{' || c == '}' || c == ',' ||
           c == ':' || c == '"' || c == '\'';
  }

  static std::optional<Value> parse_number_token(std::string_view t) {
    // Strict JSON number grammar.
    std::size_t i = 0;
    bool is_decimal = false;
    if (i < t.size() && t[i] == '-') ++i;
    std::size_t d0 = i;
    while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i;
    if (i == d0) return std::nullopt;
    if (i < t.size() && t[i] == '.') {
      is_decimal = true;
      ++i;
      std::size_t d1 = i;
      while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i;
      if (i == d1) return std::nullopt;
    }
    if (i < t.size() && (t[i] == 'e' || t[i] == 'E')) {
      is_decimal = true;
      ++i;
      if (i < t.size() && (t[i] == '+' || t[i] == '-')) ++i;
      std::size_t d2 = i;
      while (i < t.size() && t[i] >= '0' && t[i] <= '9') ++i;
      if (i == d2) return std::nullopt;
    }
    if (i != t.size()) return std::nullopt;
    if (!is_decimal) {
      std::int64_t iv = 0;
      auto r = std::from_chars(t.data(), t.data() + t.size(), iv);
      if (r.ec == std::errc() && r.ptr == t.data() + t.size())
        return Value(iv);
      // Out of int64 range: fall through to decimal.
    }
    double dv = 0;
    auto r = std::from_chars(t.data(), t.data() + t.size(), dv);
    if (r.ec != std::errc()) return std::nullopt;
    return Value(dv);
  }

  static Value classify_bare(const std::string& token) {
    if (token == "_") return Value::unspecified();
    if (token == "true") return Value(true);
    if (token == "false") return Value(false);
    if (token == "null") return Value::null();
    if (auto n = parse_number_token(token)) return *n;
    return Value(token);
  }

 private:
  Value scan_list() {
    ++pos_;  // '['
    ValueList items;
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == ']') {
      ++pos_;
      return Value::list(std::move(items));
    }
    while (true) {
      items.push_back(scan_value());
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated list", pos_);
      char c = src_[pos_++];
      if (c == ']') return Value::list(std::move(items));
      if (c != ',') fail("expected ',' or ']' in list", pos_ - 1);
    }
  }

  Value scan_record() {
    std::size_t start = pos_;
    ++pos_;  // '{'
    ValueRecord fields;
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '}') {
      ++pos_;
      return Value::record(std::move(fields));
    }
    while (true) {
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated record", start);
      std::string key;
      char c = src_[pos_];
      if (c == '"' || c == '\'') key = scan_quoted();
      else key = scan_bare();
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != ':')
        fail("expected ':' after record key", pos_);
      ++pos_;
      Value v = scan_value();
      for (const auto& [k, unused] : fields)
        if (k == key) fail("duplicate record key '" + key + "'", start);
      fields.emplace_back(std::move(key), std::move(v));
      skip_ws();
      if (pos_ >= src_.size()) fail("unterminated record", start);
      c = src_[pos_++];
      if (c == '}') return Value::record(std::move(fields));
      if (c != ',') fail("expected ',' or '}' in record", pos_ - 1);
    }
  }

  static void append_utf8(unsigned cp, std::string& out) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xc0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    } else {
      out += static_cast<char>(0xe0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
      out += static_cast<char>(0x80 | (cp & 0x3f));
    }
  }

  std::string_view src_;
  std::size_t pos_;
};

// Parses a complete value text; trailing garbage is an error.
inline Value parse_value(std::string_view text) {
  ValueScanner sc(text);
  if (sc.at_end()) sc.fail("empty value text", 0);
  Value v = sc.scan_value();
  if (!sc.at_end()) sc.fail("trailing content after value", sc.pos());
  return v;
}

// ---------------------------------------------------------------------------
// Paths and elements.

struct PathError : std::runtime_error {
  explicit PathError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string render_path(const Path& p) {
  std::string out = "[";
  bool first = true;
  for (const auto& step : p) {
    if (!first) out += ',';
    first = false;
    if (std::holds_alternative<std::int64_t>(step))
      out += std::to_string(std::get<std::int64_t>(step));
    else
      detail::render_text_quoted(std::get<std::string>(step), out);
  }
  out += ']';
  return out;
}

inline Path parse_path(std::string_view text) {
  Value v = parse_value(text);
  if (!v.is_list()) throw ValueError("path text must be a list");
  Path p;
  for (const auto& step : v.items()) {
    if (step.is_int()) p.emplace_back(step.as_int());
    else if (step.is_text()) p.emplace_back(step.text());
    else throw ValueError("path step must be an index or key");
  }
  return p;
}

inline const Value& resolve_path(const Value& v, const Path& p) {
  const Value* cur = &v;
  for (const auto& step : p) {
    if (std::holds_alternative<std::int64_t>(step)) {
      auto idx = std::get<std::int64_t>(step);
      if (!cur->is_list())
        throw PathError("index step into non-list at " + render_value(*cur));
      if (idx < 0 || static_cast<std::size_t>(idx) >= cur->items().size())
        throw PathError("index " + std::to_string(idx) + " out of range");
      cur = &cur->items()[static_cast<std::size_t>(idx)];
    } else {
      const auto& key = std::get<std::string>(step);
      if (!cur->is_record())
        throw PathError("key step into non-record at " + render_value(*cur));
      const Value* f = cur->field(key);
      if (!f) throw PathError("key '" + key + "' absent");
      cur = f;
    }
  }
  return *cur;
}

// Pre-order traversal; the first entry is the root ([], v).
inline void enumerate_elements_to(const Value& v, Path& prefix,
                                  std::vector<std::pair<Path, Value>>& out) {
  out.emplace_back(prefix, v);
  if (v.is_list()) {
    for (std::size_t i = 0; i < v.items().size(); ++i) {
      prefix.emplace_back(static_cast<std::int64_t>(i));
      enumerate_elements_to(v.items()[i], prefix, out);
      prefix.pop_back();
    }
  } else if (v.is_record()) {
    for (const auto& [k, f] : v.fields()) {
      prefix.emplace_back(k);
      enumerate_elements_to(f, prefix, out);
      prefix.pop_back();
    }
  }
}

inline std::vector<std::pair<Path, Value>> enumerate_elements(const Value& v) {
  std::vector<std::pair<Path, Value>> out;
  Path prefix;
  enumerate_elements_to(v, prefix, out);
  return out;
}

// True iff `expected` equals `actual` treating every Unspecified node in
// `expected` as matching any subtree. Arity and key sets must still match.
inline bool matches_with_wildcards(const Value& expected, const Value& actual) {
  if (expected.is_unspecified()) return true;
  if (expected.kind() != actual.kind()) {
    // Numbers unify across representations already; other kinds must agree.
    return expected.is_number() && actual.is_number() && expected == actual;
  }
  switch (expected.kind()) {
    case ValueKind::List: {
      const auto& e = expected.items();
      const auto& a = actual.items();
      if (e.size() != a.size()) return false;
      for (std::size_t i = 0; i < e.size(); ++i)
        if (!matches_with_wildcards(e[i], a[i])) return false;
      return true;
    }
    case ValueKind::Record: {
      const auto& e = expected.fields();
      if (e.size() != actual.fields().size()) return false;
      for (const auto& [k, ev] : e) {
        const Value* av = actual.field(k);
        if (!av || !matches_with_wildcards(ev, *av)) return false;
      }
      return true;
    }
    default: return expected == actual;
  }
}

// True iff some wildcard-free value could satisfy both patterns. Used for
// up-front contradiction detection over duplicate inputs.
inline bool wildcard_patterns_compatible(const Value& a, const Value& b) {
  if (a.is_unspecified() || b.is_unspecified()) return true;
  if (a.kind() != b.kind())
    return a.is_number() && b.is_number() && a == b;
  switch (a.kind()) {
    case ValueKind::List: {
      if (a.items().size() != b.items().size()) return false;
      for (std::size_t i = 0; i < a.items().size(); ++i)
        if (!wildcard_patterns_compatible(a.items()[i], b.items()[i]))
          return false;
      return true;
    }
    case ValueKind::Record: {
      if (a.fields().size() != b.fields().size()) return false;
      for (const auto& [k, av] : a.fields()) {
        const Value* bv = b.field(k);
        if (!bv || !wildcard_patterns_compatible(av, *bv)) return false;
      }
      return true;
    }
    default: return a == b;
  }
}

// ---------------------------------------------------------------------------
// Code-point helpers (Text length and character operations count by code
// points; case mapping is ASCII-only).

namespace text_ops {

inline std::size_t codepoint_count(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xc0) != 0x80) ++n;
  return n;
}

// Byte offset of the code point with the given index (or npos).
inline std::size_t codepoint_offset(const std::string& s, std::size_t index) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xc0) != 0x80) {
      if (n == index) return i;
      ++n;
    }
  }
  return index == n ? s.size() : std::string::npos;
}

inline std::string substring_codepoints(const std::string& s,
                                        std::size_t from, std::size_t count) {
  std::size_t b0 = codepoint_offset(s, from);
  if (b0 == std::string::npos) return {};
  std::size_t b1 = codepoint_offset(s, from + count);
  if (b1 == std::string::npos) b1 = s.size();
  return s.substr(b0, b1 - b0);
}

inline char ascii_upper(char c) {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}
inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

}  // namespace text_ops

}  // namespace zoea
