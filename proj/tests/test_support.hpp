#pragma once

// Shared helpers for the test suites: deterministic random value generators
// and small reference oracles kept independent of the library code paths
// they check.

#include <random>
#include <string>
#include <vector>

#include "zoea/value.hpp"

namespace testsup {

using zoea::Value;
using zoea::ValueList;
using zoea::ValueRecord;

using Rng = std::mt19937;

inline int pick(Rng& rng, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng);
}

inline std::string random_text(Rng& rng) {
  static const char* words[] = {"",      "a",     "b",    "ab",   "a b",
                                "hello", "World", "x_y",  "日本", "q\"q",
                                "line\nbreak", "07/24/79", "123", "banana"};
  return words[pick(rng, 0, 13)];
}

inline Value random_value(Rng& rng, int depth, bool allow_wildcard) {
  int top = depth > 0 ? 7 : 5;
  if (!allow_wildcard) top = depth > 0 ? 6 : 4;
  switch (pick(rng, 0, top)) {
    case 0: return Value::null();
    case 1: return Value(pick(rng, 0, 1) == 1);
    case 2: return Value(static_cast<std::int64_t>(pick(rng, -50, 50)));
    case 3: {
      double d = pick(rng, -500, 500) / 8.0;
      return Value(d);
    }
    case 4: return Value(random_text(rng));
    case 5: {
      if (depth <= 0) return Value(random_text(rng));
      ValueList items;
      int n = pick(rng, 0, 3);
      for (int i = 0; i < n; ++i)
        items.push_back(random_value(rng, depth - 1, allow_wildcard));
      return Value::list(std::move(items));
    }
    case 6: {
      if (depth <= 0) return Value(random_text(rng));
      ValueRecord fields;
      int n = pick(rng, 0, 3);
      for (int i = 0; i < n; ++i) {
        std::string key = "k" + std::to_string(i) + random_text(rng);
        bool dup = false;
        for (auto& [k, v] : fields) dup = dup || k == key;
        if (!dup)
          fields.emplace_back(key, random_value(rng, depth - 1, allow_wildcard));
      }
      return Value::record(std::move(fields));
    }
    default: return Value::unspecified();
  }
}

// Reference wildcard matcher: recursive structural match with wildcard skip.
inline bool oracle_matches(const Value& expected, const Value& actual) {
  if (expected.is_unspecified()) return true;
  if (expected.is_number() && actual.is_number()) return expected == actual;
  if (expected.kind() != actual.kind()) return false;
  switch (expected.kind()) {
    case zoea::ValueKind::List: {
      if (expected.items().size() != actual.items().size()) return false;
      for (std::size_t i = 0; i < expected.items().size(); ++i)
        if (!oracle_matches(expected.items()[i], actual.items()[i]))
          return false;
      return true;
    }
    case zoea::ValueKind::Record: {
      if (expected.fields().size() != actual.fields().size()) return false;
      for (const auto& [k, ev] : expected.fields()) {
        const Value* av = actual.field(k);
        if (!av || !oracle_matches(ev, *av)) return false;
      }
      return true;
    }
    default: return expected == actual;
  }
}

// Counts nodes of a value the slow way (reference for enumerate_elements).
inline std::size_t oracle_node_count(const Value& v) {
  std::size_t n = 1;
  if (v.is_list())
    for (const auto& it : v.items()) n += oracle_node_count(it);
  if (v.is_record())
    for (const auto& [k, f] : v.fields()) n += oracle_node_count(f);
  return n;
}

// Replaces the node at `index` (pre-order) with the wildcard; returns the
// rewritten value and whether the index was found.
inline std::pair<Value, bool> replace_node_with_wildcard(const Value& v,
                                                         std::size_t& index) {
  if (index == 0) return {Value::unspecified(), true};
  --index;
  if (v.is_list()) {
    ValueList items = v.items();
    for (auto& it : items) {
      auto [nv, hit] = replace_node_with_wildcard(it, index);
      if (hit) {
        it = nv;
        return {Value::list(std::move(items)), true};
      }
    }
    return {v, false};
  }
  if (v.is_record()) {
    ValueRecord fields = v.fields();
    for (auto& [k, f] : fields) {
      auto [nv, hit] = replace_node_with_wildcard(f, index);
      if (hit) {
        f = nv;
        return {Value::record(std::move(fields)), true};
      }
    }
    return {v, false};
  }
  return {v, false};
}

}  // namespace testsup
