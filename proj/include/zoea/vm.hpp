#pragma once

// Instruction catalog, compiled program representation (dataflow DAG,
// conditional, recurrence) and the deterministic interpreter. The canonical
// program text emitted here is also the on-disk format used by the registry.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zoea/value.hpp"

namespace zoea {

enum class TypeClass { Number, Text, List, Record, Boolean, Any };

inline const char* type_class_name(TypeClass t) {
  switch (t) {
    case TypeClass::Number: return "number";
    case TypeClass::Text: return "text";
    case TypeClass::List: return "list";
    case TypeClass::Record: return "record";
    case TypeClass::Boolean: return "boolean";
    case TypeClass::Any: return "any";
  }
  return "?";
}

inline std::optional<TypeClass> type_class_from_name(std::string_view n) {
  if (n == "number") return TypeClass::Number;
  if (n == "text") return TypeClass::Text;
  if (n == "list") return TypeClass::List;
  if (n == "record") return TypeClass::Record;
  if (n == "boolean") return TypeClass::Boolean;
  if (n == "any") return TypeClass::Any;
  return std::nullopt;
}

inline TypeClass type_class_of(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Boolean: return TypeClass::Boolean;
    case ValueKind::Number: return TypeClass::Number;
    case ValueKind::Text: return TypeClass::Text;
    case ValueKind::List: return TypeClass::List;
    case ValueKind::Record: return TypeClass::Record;
    default: return TypeClass::Any;
  }
}

inline bool type_class_accepts(TypeClass want, const Value& v) {
  return want == TypeClass::Any || want == type_class_of(v);
}

enum class InstrGroup {
  Arith,
  Logic,
  ListOps,
  HigherOrder,
  Str,
  Regex,
  Date,
  Rec,
  Membership,
};

struct InstructionDescriptor {
  std::string name;
  int arity = 0;
  int fragment_slots = 0;
  std::vector<TypeClass> signature;  // one class per operand
  TypeClass result = TypeClass::Any;
  int cost = 1;
  InstrGroup group = InstrGroup::ListOps;
};

// ---------------------------------------------------------------------------
// Compiled programs.

class CompiledProgram;

struct DagNode {
  enum class Kind { InputRef, DataRef, Literal, Apply, Call };
  Kind kind = Kind::Literal;
  Path path;                                // InputRef / DataRef
  Value literal;                            // Literal
  std::string name;                         // Apply / Call
  std::vector<int> operands;                // each strictly less than own index
  std::vector<CompiledProgram> fragments;   // Apply only
};

class CompiledProgram {
 public:
  enum class Kind { Null, Direct, Conditional, Recurrence };

  CompiledProgram() = default;  // the null program

  static CompiledProgram null_program() { return {}; }
  static CompiledProgram direct(std::vector<DagNode> nodes, int output);
  static CompiledProgram conditional(
      std::vector<std::pair<CompiledProgram, CompiledProgram>> branches,
      std::optional<CompiledProgram> default_body);
  static CompiledProgram recurrence(
      std::vector<std::pair<std::int64_t, Value>> base, CompiledProgram step);

  Kind kind() const;
  bool is_null_program() const { return kind() == Kind::Null; }

  const std::vector<DagNode>& nodes() const;
  int output() const;
  const std::vector<std::pair<CompiledProgram, CompiledProgram>>& branches()
      const;
  const CompiledProgram* default_body() const;
  const std::vector<std::pair<std::int64_t, Value>>& base_cases() const;
  const CompiledProgram& step() const;

  friend bool operator==(const CompiledProgram& a, const CompiledProgram& b);

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct CompiledProgram::Impl {
  Kind kind = Kind::Direct;
  std::vector<DagNode> nodes;
  int output = -1;
  std::vector<std::pair<CompiledProgram, CompiledProgram>> branches;
  std::optional<CompiledProgram> default_body;
  std::vector<std::pair<std::int64_t, Value>> base;
  CompiledProgram step;
};

struct ProgramError : std::runtime_error {
  explicit ProgramError(const std::string& msg) : std::runtime_error(msg) {}
};

inline CompiledProgram CompiledProgram::direct(std::vector<DagNode> nodes,
                                               int output) {
  if (nodes.empty() || output < 0 ||
      static_cast<std::size_t>(output) >= nodes.size())
    throw ProgramError("direct program needs a valid output node");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (int op : nodes[i].operands)
      if (op < 0 || static_cast<std::size_t>(op) >= i)
        throw ProgramError("operand reference must point at an earlier node");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Direct;
  impl->nodes = std::move(nodes);
  impl->output = output;
  CompiledProgram p;
  p.impl_ = std::move(impl);
  return p;
}

inline CompiledProgram CompiledProgram::conditional(
    std::vector<std::pair<CompiledProgram, CompiledProgram>> branches,
    std::optional<CompiledProgram> default_body) {
  if (branches.empty() && !default_body)
    throw ProgramError("conditional needs at least one branch");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Conditional;
  impl->branches = std::move(branches);
  impl->default_body = std::move(default_body);
  CompiledProgram p;
  p.impl_ = std::move(impl);
  return p;
}

inline CompiledProgram CompiledProgram::recurrence(
    std::vector<std::pair<std::int64_t, Value>> base, CompiledProgram step) {
  if (base.empty()) throw ProgramError("recurrence needs a base case");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Recurrence;
  impl->base = std::move(base);
  impl->step = std::move(step);
  CompiledProgram p;
  p.impl_ = std::move(impl);
  return p;
}

inline CompiledProgram::Kind CompiledProgram::kind() const {
  return impl_ ? impl_->kind : Kind::Null;
}
inline const std::vector<DagNode>& CompiledProgram::nodes() const {
  return impl_->nodes;
}
inline int CompiledProgram::output() const { return impl_->output; }
inline const std::vector<std::pair<CompiledProgram, CompiledProgram>>&
CompiledProgram::branches() const {
  return impl_->branches;
}
inline const CompiledProgram* CompiledProgram::default_body() const {
  return impl_->default_body ? &*impl_->default_body : nullptr;
}
inline const std::vector<std::pair<std::int64_t, Value>>&
CompiledProgram::base_cases() const {
  return impl_->base;
}
inline const CompiledProgram& CompiledProgram::step() const {
  return impl_->step;
}

// ---------------------------------------------------------------------------
// Execution environment.

struct ProgramResolver {
  virtual ~ProgramResolver() = default;
  virtual const CompiledProgram* find(const std::string& name) const = 0;
};

struct ExecutionEnv {
  const Value* data = nullptr;
  const ProgramResolver* programs = nullptr;
  std::int64_t fuel = 1'000'000;
};

struct ExecError : std::runtime_error {
  explicit ExecError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Instruction implementations.

struct FragmentRunner {
  virtual ~FragmentRunner() = default;
  // Evaluates fragment `slot` on one value; nullopt on failure.
  virtual std::optional<Value> run(std::size_t slot, const Value& arg) = 0;
};

namespace instr_detail {

using Args = std::span<const Value>;
using ApplyFn = std::optional<Value> (*)(Args, FragmentRunner*, const char**);

inline std::optional<Value> fail(const char** err, const char* msg) {
  *err = msg;
  return std::nullopt;
}

inline bool both_int(const Value& a, const Value& b) {
  return a.is_int() && b.is_int();
}

inline std::optional<Value> num_result(double d, const char** err) {
  if (!std::isfinite(d)) return fail(err, "non-finite result");
  return Value(d);
}

// --- arithmetic

inline std::optional<Value> op_add(Args a, FragmentRunner*, const char** err) {
  if (both_int(a[0], a[1])) {
    std::int64_t r;
    if (__builtin_add_overflow(a[0].as_int(), a[1].as_int(), &r))
      return fail(err, "integer overflow");
    return Value(r);
  }
  return num_result(a[0].number() + a[1].number(), err);
}
inline std::optional<Value> op_sub(Args a, FragmentRunner*, const char** err) {
  if (both_int(a[0], a[1])) {
    std::int64_t r;
    if (__builtin_sub_overflow(a[0].as_int(), a[1].as_int(), &r))
      return fail(err, "integer overflow");
    return Value(r);
  }
  return num_result(a[0].number() - a[1].number(), err);
}
inline std::optional<Value> op_mul(Args a, FragmentRunner*, const char** err) {
  if (both_int(a[0], a[1])) {
    std::int64_t r;
    if (__builtin_mul_overflow(a[0].as_int(), a[1].as_int(), &r))
      return fail(err, "integer overflow");
    return Value(r);
  }
  return num_result(a[0].number() * a[1].number(), err);
}
inline std::optional<Value> op_div(Args a, FragmentRunner*, const char** err) {
  double d = a[1].number();
  if (d == 0.0) return fail(err, "division by zero");
  return num_result(a[0].number() / d, err);  // division is always decimal
}
inline std::optional<Value> op_mod(Args a, FragmentRunner*, const char** err) {
  if (both_int(a[0], a[1])) {
    if (a[1].as_int() == 0) return fail(err, "division by zero");
    if (a[0].as_int() == INT64_MIN && a[1].as_int() == -1)
      return fail(err, "integer overflow");
    return Value(a[0].as_int() % a[1].as_int());
  }
  if (a[1].number() == 0.0) return fail(err, "division by zero");
  return num_result(std::fmod(a[0].number(), a[1].number()), err);
}
inline std::optional<Value> op_neg(Args a, FragmentRunner*, const char** err) {
  if (a[0].is_int()) {
    if (a[0].as_int() == INT64_MIN) return fail(err, "integer overflow");
    return Value(-a[0].as_int());
  }
  return Value(-a[0].as_decimal());
}
inline std::optional<Value> op_abs(Args a, FragmentRunner*, const char** err) {
  if (a[0].is_int()) {
    if (a[0].as_int() == INT64_MIN) return fail(err, "integer overflow");
    return Value(a[0].as_int() < 0 ? -a[0].as_int() : a[0].as_int());
  }
  return Value(std::fabs(a[0].as_decimal()));
}
inline std::optional<Value> op_round(Args a, FragmentRunner*,
                                     const char** err) {
  if (a[0].is_int()) return a[0];
  double d = a[0].as_decimal();
  if (!(d >= -9.2e18 && d <= 9.2e18)) return fail(err, "integer overflow");
  return Value(static_cast<std::int64_t>(std::llround(d)));
}

// --- comparison / logic

inline std::optional<Value> op_eq(Args a, FragmentRunner*, const char**) {
  return Value(a[0] == a[1]);
}
inline std::optional<Value> op_lt(Args a, FragmentRunner*, const char**) {
  return Value(Value::compare(a[0], a[1]) < 0);
}
inline std::optional<Value> op_gt(Args a, FragmentRunner*, const char**) {
  return Value(Value::compare(a[0], a[1]) > 0);
}
inline std::optional<Value> op_lte(Args a, FragmentRunner*, const char**) {
  return Value(Value::compare(a[0], a[1]) <= 0);
}
inline std::optional<Value> op_gte(Args a, FragmentRunner*, const char**) {
  return Value(Value::compare(a[0], a[1]) >= 0);
}
inline std::optional<Value> op_not(Args a, FragmentRunner*, const char**) {
  return Value(!a[0].as_boolean());
}
inline std::optional<Value> op_and(Args a, FragmentRunner*, const char**) {
  return Value(a[0].as_boolean() && a[1].as_boolean());
}
inline std::optional<Value> op_or(Args a, FragmentRunner*, const char**) {
  return Value(a[0].as_boolean() || a[1].as_boolean());
}

// --- lists

inline std::optional<Value> op_length(Args a, FragmentRunner*, const char**) {
  return Value(static_cast<std::int64_t>(a[0].items().size()));
}
inline std::optional<Value> op_sort(Args a, FragmentRunner*, const char**) {
  ValueList out = a[0].items();
  std::stable_sort(out.begin(), out.end(),
                   [](const Value& x, const Value& y) { return x < y; });
  return Value::list(std::move(out));
}
inline std::optional<Value> op_reverse(Args a, FragmentRunner*, const char**) {
  ValueList out = a[0].items();
  std::reverse(out.begin(), out.end());
  return Value::list(std::move(out));
}
inline std::optional<Value> op_head(Args a, FragmentRunner*, const char** err) {
  if (a[0].items().empty()) return fail(err, "empty list");
  return a[0].items().front();
}
inline std::optional<Value> op_last(Args a, FragmentRunner*, const char** err) {
  if (a[0].items().empty()) return fail(err, "empty list");
  return a[0].items().back();
}
inline std::optional<Value> op_nth(Args a, FragmentRunner*, const char** err) {
  if (!a[1].is_int()) return fail(err, "index must be an integer");
  std::int64_t i = a[1].as_int();
  if (i < 0 || static_cast<std::size_t>(i) >= a[0].items().size())
    return fail(err, "index out of range");
  return a[0].items()[static_cast<std::size_t>(i)];
}
inline std::optional<Value> op_slice(Args a, FragmentRunner*,
                                     const char** err) {
  if (!a[1].is_int() || !a[2].is_int())
    return fail(err, "slice bounds must be integers");
  std::int64_t from = a[1].as_int(), to = a[2].as_int();
  auto n = static_cast<std::int64_t>(a[0].items().size());
  if (from < 0 || to < from || to > n) return fail(err, "slice out of range");
  ValueList out(a[0].items().begin() + from, a[0].items().begin() + to);
  return Value::list(std::move(out));
}
inline std::optional<Value> op_concat(Args a, FragmentRunner*, const char**) {
  ValueList out = a[0].items();
  out.insert(out.end(), a[1].items().begin(), a[1].items().end());
  return Value::list(std::move(out));
}
inline std::optional<Value> op_append(Args a, FragmentRunner*, const char**) {
  ValueList out = a[0].items();
  out.push_back(a[1]);
  return Value::list(std::move(out));
}
inline std::optional<Value> op_unique(Args a, FragmentRunner*, const char**) {
  ValueList out;
  for (const auto& v : a[0].items()) {
    bool seen = false;
    for (const auto& u : out)
      if (u == v) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(v);
  }
  return Value::list(std::move(out));
}
inline std::optional<Value> op_flatten(Args a, FragmentRunner*, const char**) {
  ValueList out;
  for (const auto& v : a[0].items()) {
    if (v.is_list())
      out.insert(out.end(), v.items().begin(), v.items().end());
    else
      out.push_back(v);
  }
  return Value::list(std::move(out));
}
inline std::optional<Value> op_zip(Args a, FragmentRunner*, const char** err) {
  const auto& x = a[0].items();
  const auto& y = a[1].items();
  if (x.size() != y.size()) return fail(err, "zip length mismatch");
  ValueList out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.push_back(Value::list({x[i], y[i]}));
  return Value::list(std::move(out));
}
inline std::optional<Value> op_range(Args a, FragmentRunner*,
                                     const char** err) {
  if (!a[0].is_int() || !a[1].is_int())
    return fail(err, "range bounds must be integers");
  std::int64_t from = a[0].as_int(), to = a[1].as_int();
  if (to < from) return Value::list({});
  if (to - from > 4096) return fail(err, "range too large");
  ValueList out;
  out.reserve(static_cast<std::size_t>(to - from));
  for (std::int64_t i = from; i < to; ++i) out.push_back(Value(i));
  return Value::list(std::move(out));
}

inline bool all_numbers(const ValueList& xs) {
  for (const auto& v : xs)
    if (!v.is_number()) return false;
  return true;
}

inline std::optional<Value> op_sum(Args a, FragmentRunner*, const char** err) {
  const auto& xs = a[0].items();
  if (!all_numbers(xs)) return fail(err, "sum needs numbers");
  bool ints = true;
  for (const auto& v : xs) ints = ints && v.is_int();
  if (ints) {
    std::int64_t acc = 0;
    for (const auto& v : xs)
      if (__builtin_add_overflow(acc, v.as_int(), &acc))
        return fail(err, "integer overflow");
    return Value(acc);
  }
  double acc = 0;
  for (const auto& v : xs) acc += v.number();
  return num_result(acc, err);
}
inline std::optional<Value> op_product(Args a, FragmentRunner*,
                                       const char** err) {
  const auto& xs = a[0].items();
  if (!all_numbers(xs)) return fail(err, "product needs numbers");
  bool ints = true;
  for (const auto& v : xs) ints = ints && v.is_int();
  if (ints) {
    std::int64_t acc = 1;
    for (const auto& v : xs)
      if (__builtin_mul_overflow(acc, v.as_int(), &acc))
        return fail(err, "integer overflow");
    return Value(acc);
  }
  double acc = 1;
  for (const auto& v : xs) acc *= v.number();
  return num_result(acc, err);
}
inline std::optional<Value> op_min(Args a, FragmentRunner*, const char** err) {
  const auto& xs = a[0].items();
  if (xs.empty()) return fail(err, "empty list");
  if (!all_numbers(xs)) return fail(err, "min needs numbers");
  const Value* best = &xs[0];
  for (const auto& v : xs)
    if (v < *best) best = &v;
  return *best;
}
inline std::optional<Value> op_max(Args a, FragmentRunner*, const char** err) {
  const auto& xs = a[0].items();
  if (xs.empty()) return fail(err, "empty list");
  if (!all_numbers(xs)) return fail(err, "max needs numbers");
  const Value* best = &xs[0];
  for (const auto& v : xs)
    if (*best < v) best = &v;
  return *best;
}
inline std::optional<Value> op_mean(Args a, FragmentRunner*, const char** err) {
  const auto& xs = a[0].items();
  if (xs.empty()) return fail(err, "empty list");
  if (!all_numbers(xs)) return fail(err, "mean needs numbers");
  double acc = 0;
  for (const auto& v : xs) acc += v.number();
  return num_result(acc / static_cast<double>(xs.size()), err);
}
inline std::optional<Value> op_median(Args a, FragmentRunner*,
                                      const char** err) {
  ValueList xs = a[0].items();
  if (xs.empty()) return fail(err, "empty list");
  if (!all_numbers(xs)) return fail(err, "median needs numbers");
  std::stable_sort(xs.begin(), xs.end(),
                   [](const Value& x, const Value& y) { return x < y; });
  std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return num_result((xs[n / 2 - 1].number() + xs[n / 2].number()) / 2.0, err);
}
inline std::optional<Value> op_make_list_2(Args a, FragmentRunner*,
                                           const char**) {
  return Value::list({a[0], a[1]});
}
inline std::optional<Value> op_make_list_3(Args a, FragmentRunner*,
                                           const char**) {
  return Value::list({a[0], a[1], a[2]});
}
inline std::optional<Value> op_contains(Args a, FragmentRunner*,
                                        const char**) {
  for (const auto& v : a[0].items())
    if (v == a[1]) return Value(true);
  return Value(false);
}

// --- higher order

inline std::optional<Value> op_map(Args a, FragmentRunner* fr,
                                   const char** err) {
  if (!fr) return fail(err, "missing fragment");
  ValueList out;
  out.reserve(a[0].items().size());
  for (const auto& v : a[0].items()) {
    auto r = fr->run(0, v);
    if (!r) return fail(err, "fragment failed");
    out.push_back(std::move(*r));
  }
  return Value::list(std::move(out));
}
inline std::optional<Value> op_filter(Args a, FragmentRunner* fr,
                                      const char** err) {
  if (!fr) return fail(err, "missing fragment");
  ValueList out;
  for (const auto& v : a[0].items()) {
    auto r = fr->run(0, v);
    if (!r) return fail(err, "fragment failed");
    if (!r->is_boolean()) return fail(err, "filter fragment must yield a boolean");
    if (r->as_boolean()) out.push_back(v);
  }
  return Value::list(std::move(out));
}
inline std::optional<Value> op_reduce(Args a, FragmentRunner* fr,
                                      const char** err) {
  if (!fr) return fail(err, "missing fragment");
  const auto& xs = a[0].items();
  if (xs.empty()) return fail(err, "empty list");
  Value acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) {
    auto r = fr->run(0, Value::list({acc, xs[i]}));
    if (!r) return fail(err, "fragment failed");
    acc = std::move(*r);
  }
  return acc;
}

// --- strings

inline std::optional<Value> op_split(Args a, FragmentRunner*,
                                     const char** err) {
  const std::string& s = a[0].text();
  const std::string& sep = a[1].text();
  ValueList out;
  if (sep.empty()) {
    // split into code points
    std::size_t i = 0;
    while (i < s.size()) {
      std::size_t j = i + 1;
      while (j < s.size() && (static_cast<unsigned char>(s[j]) & 0xc0) == 0x80)
        ++j;
      out.push_back(Value(s.substr(i, j - i)));
      i = j;
    }
    return Value::list(std::move(out));
  }
  (void)err;
  std::size_t start = 0;
  while (true) {
    std::size_t at = s.find(sep, start);
    if (at == std::string::npos) {
      out.push_back(Value(s.substr(start)));
      break;
    }
    out.push_back(Value(s.substr(start, at - start)));
    start = at + sep.size();
  }
  return Value::list(std::move(out));
}
inline std::optional<Value> op_join(Args a, FragmentRunner*,
                                    const char** err) {
  std::string out;
  bool first = true;
  for (const auto& v : a[0].items()) {
    if (!v.is_text()) return fail(err, "join needs text elements");
    if (!first) out += a[1].text();
    first = false;
    out += v.text();
  }
  return Value(std::move(out));
}
inline std::optional<Value> op_upper(Args a, FragmentRunner*, const char**) {
  std::string out = a[0].text();
  for (auto& c : out) c = text_ops::ascii_upper(c);
  return Value(std::move(out));
}
inline std::optional<Value> op_lower(Args a, FragmentRunner*, const char**) {
  std::string out = a[0].text();
  for (auto& c : out) c = text_ops::ascii_lower(c);
  return Value(std::move(out));
}
inline std::optional<Value> op_titlecase(Args a, FragmentRunner*,
                                         const char**) {
  std::string out = a[0].text();
  bool at_word_start = true;
  for (auto& c : out) {
    bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (alpha) {
      c = at_word_start ? text_ops::ascii_upper(c) : text_ops::ascii_lower(c);
      at_word_start = false;
    } else {
      at_word_start = true;
    }
  }
  return Value(std::move(out));
}
inline std::optional<Value> op_trim(Args a, FragmentRunner*, const char**) {
  const std::string& s = a[0].text();
  std::size_t b = 0, e = s.size();
  while (b < e && ValueScanner::is_space(s[b])) ++b;
  while (e > b && ValueScanner::is_space(s[e - 1])) --e;
  return Value(s.substr(b, e - b));
}
inline std::optional<Value> op_substring(Args a, FragmentRunner*,
                                         const char** err) {
  if (!a[1].is_int() || !a[2].is_int())
    return fail(err, "substring bounds must be integers");
  std::int64_t from = a[1].as_int(), to = a[2].as_int();
  auto n = static_cast<std::int64_t>(text_ops::codepoint_count(a[0].text()));
  if (from < 0 || to < from || to > n)
    return fail(err, "substring out of range");
  return Value(text_ops::substring_codepoints(
      a[0].text(), static_cast<std::size_t>(from),
      static_cast<std::size_t>(to - from)));
}
inline std::optional<Value> op_index_of(Args a, FragmentRunner*,
                                        const char** err) {
  std::size_t at = a[0].text().find(a[1].text());
  if (at == std::string::npos) return fail(err, "substring not found");
  // byte offset -> code point index
  std::size_t n = 0;
  for (std::size_t i = 0; i < at; ++i)
    if ((static_cast<unsigned char>(a[0].text()[i]) & 0xc0) != 0x80) ++n;
  return Value(static_cast<std::int64_t>(n));
}
inline std::optional<Value> op_replace(Args a, FragmentRunner*,
                                       const char** err) {
  const std::string& s = a[0].text();
  const std::string& from = a[1].text();
  const std::string& to = a[2].text();
  if (from.empty()) return fail(err, "replace needs a non-empty needle");
  std::string out;
  std::size_t start = 0;
  while (true) {
    std::size_t at = s.find(from, start);
    if (at == std::string::npos) {
      out += s.substr(start);
      return Value(std::move(out));
    }
    out += s.substr(start, at - start);
    out += to;
    start = at + from.size();
  }
}
inline std::optional<Value> op_text_length(Args a, FragmentRunner*,
                                           const char**) {
  return Value(static_cast<std::int64_t>(text_ops::codepoint_count(a[0].text())));
}

inline std::string plain_text_of(const Value& v) {
  // Unquoted text for display/concatenation; nested values render canonically.
  switch (v.kind()) {
    case ValueKind::Text: return v.text();
    default: return render_value(v);
  }
}

inline std::optional<Value> op_to_text(Args a, FragmentRunner*, const char**) {
  return Value(plain_text_of(a[0]));
}
inline std::optional<Value> op_parse_number(Args a, FragmentRunner*,
                                            const char** err) {
  auto n = ValueScanner::parse_number_token(a[0].text());
  if (!n) return fail(err, "not a number");
  return *n;
}
inline std::optional<Value> op_concat_text(Args a, FragmentRunner*,
                                           const char**) {
  return Value(a[0].text() + a[1].text());
}
inline std::optional<Value> op_template_fill(Args a, FragmentRunner*,
                                             const char**) {
  std::string out;
  for (const auto& v : a[0].items()) out += plain_text_of(v);
  return Value(std::move(out));
}

// --- regex

inline const std::regex* compiled_pattern(const std::string& pattern,
                                          const char** err) {
  // Patterns come from a small fixed library; cache compiled forms.
  static std::map<std::string, std::regex> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(pattern);
  if (it == cache.end()) {
    try {
      it = cache.emplace(pattern, std::regex(pattern)).first;
    } catch (const std::regex_error&) {
      *err = "malformed pattern";
      return nullptr;
    }
  }
  return &it->second;
}

inline std::optional<Value> op_regex_extract_all(Args a, FragmentRunner*,
                                                 const char** err) {
  const std::regex* re = compiled_pattern(a[1].text(), err);
  if (!re) return std::nullopt;
  ValueList out;
  const std::string& s = a[0].text();
  for (auto it = std::sregex_iterator(s.begin(), s.end(), *re);
       it != std::sregex_iterator(); ++it)
    out.push_back(Value(it->str()));
  return Value::list(std::move(out));
}
inline std::optional<Value> op_regex_matches(Args a, FragmentRunner*,
                                             const char** err) {
  const std::regex* re = compiled_pattern(a[1].text(), err);
  if (!re) return std::nullopt;
  return Value(std::regex_search(a[0].text(), *re));
}

// --- dates

struct DateParts {
  int day = 0, month = 0, year = 0;
};

// Formats use DD/D, MM/M, YYYY/YY tokens plus literal separators.
inline bool scan_date(const std::string& text, const std::string& format,
                      DateParts& out) {
  std::size_t ti = 0;
  auto read_int = [&](int max_digits, int min_digits, int& dst) {
    int n = 0, digs = 0;
    while (digs < max_digits && ti < text.size() && text[ti] >= '0' &&
           text[ti] <= '9') {
      n = n * 10 + (text[ti] - '0');
      ++ti;
      ++digs;
    }
    if (digs < min_digits) return false;
    dst = n;
    return true;
  };
  std::size_t fi = 0;
  while (fi < format.size()) {
    if (format.compare(fi, 4, "YYYY") == 0) {
      if (!read_int(4, 4, out.year)) return false;
      fi += 4;
    } else if (format.compare(fi, 2, "YY") == 0) {
      int yy;
      if (!read_int(2, 2, yy)) return false;
      out.year = yy < 70 ? 2000 + yy : 1900 + yy;
      fi += 2;
    } else if (format.compare(fi, 2, "MM") == 0) {
      if (!read_int(2, 2, out.month)) return false;
      fi += 2;
    } else if (format[fi] == 'M') {
      if (!read_int(2, 1, out.month)) return false;
      fi += 1;
    } else if (format.compare(fi, 2, "DD") == 0) {
      if (!read_int(2, 2, out.day)) return false;
      fi += 2;
    } else if (format[fi] == 'D') {
      if (!read_int(2, 1, out.day)) return false;
      fi += 1;
    } else {
      if (ti >= text.size() || text[ti] != format[fi]) return false;
      ++ti;
      ++fi;
    }
  }
  if (ti != text.size()) return false;
  return out.month >= 1 && out.month <= 12 && out.day >= 1 && out.day <= 31 &&
         out.year >= 1;
}

inline std::string render_date(const DateParts& d, const std::string& format) {
  auto pad = [](int v, int width) {
    std::string s = std::to_string(v);
    while (s.size() < static_cast<std::size_t>(width)) s.insert(s.begin(), '0');
    return s;
  };
  std::string out;
  std::size_t fi = 0;
  while (fi < format.size()) {
    if (format.compare(fi, 4, "YYYY") == 0) {
      out += pad(d.year, 4);
      fi += 4;
    } else if (format.compare(fi, 2, "YY") == 0) {
      out += pad(d.year % 100, 2);
      fi += 2;
    } else if (format.compare(fi, 2, "MM") == 0) {
      out += pad(d.month, 2);
      fi += 2;
    } else if (format[fi] == 'M') {
      out += std::to_string(d.month);
      fi += 1;
    } else if (format.compare(fi, 2, "DD") == 0) {
      out += pad(d.day, 2);
      fi += 2;
    } else if (format[fi] == 'D') {
      out += std::to_string(d.day);
      fi += 1;
    } else {
      out += format[fi];
      ++fi;
    }
  }
  return out;
}

inline std::optional<Value> op_reformat_date(Args a, FragmentRunner*,
                                             const char** err) {
  DateParts d;
  if (!scan_date(a[0].text(), a[1].text(), d))
    return fail(err, "text does not match date format");
  return Value(render_date(d, a[2].text()));
}

// --- records

inline std::optional<Value> op_get(Args a, FragmentRunner*, const char** err) {
  const Value* f = a[0].field(a[1].text());
  if (!f) return fail(err, "key absent");
  return *f;
}
inline std::optional<Value> op_put(Args a, FragmentRunner*, const char**) {
  ValueRecord fields = a[0].fields();
  for (auto& [k, v] : fields)
    if (k == a[1].text()) {
      v = a[2];
      return Value::record(std::move(fields));
    }
  fields.emplace_back(a[1].text(), a[2]);
  return Value::record(std::move(fields));
}
inline std::optional<Value> op_keys(Args a, FragmentRunner*, const char**) {
  ValueList out;
  for (const auto& [k, v] : a[0].fields()) out.push_back(Value(k));
  return Value::list(std::move(out));
}
inline std::optional<Value> op_values(Args a, FragmentRunner*, const char**) {
  ValueList out;
  for (const auto& [k, v] : a[0].fields()) out.push_back(v);
  return Value::list(std::move(out));
}
inline std::optional<Value> op_make_record(Args a, FragmentRunner*,
                                           const char** err) {
  const auto& ks = a[0].items();
  const auto& vs = a[1].items();
  if (ks.size() != vs.size()) return fail(err, "key/value length mismatch");
  ValueRecord fields;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!ks[i].is_text()) return fail(err, "record keys must be text");
    for (const auto& [k, unused] : fields)
      if (k == ks[i].text()) return fail(err, "duplicate record key");
    fields.emplace_back(ks[i].text(), vs[i]);
  }
  return Value::record(std::move(fields));
}

// --- membership

inline std::string ci_fold(const std::string& s) {
  std::string out = s;
  for (auto& c : out) c = text_ops::ascii_lower(c);
  return out;
}

inline std::optional<Value> op_contains_ci(Args a, FragmentRunner*,
                                           const char**) {
  if (a[1].is_text()) {
    std::string needle = ci_fold(a[1].text());
    for (const auto& v : a[0].items())
      if (v.is_text() && ci_fold(v.text()) == needle) return Value(true);
    return Value(false);
  }
  for (const auto& v : a[0].items())
    if (v == a[1]) return Value(true);
  return Value(false);
}

}  // namespace instr_detail

// ---------------------------------------------------------------------------
// Catalog.

struct Instruction {
  InstructionDescriptor desc;
  instr_detail::ApplyFn fn;
};

inline const std::vector<Instruction>& instruction_catalog() {
  using namespace instr_detail;
  using TC = TypeClass;
  static const std::vector<Instruction> table = [] {
    std::vector<Instruction> t;
    auto add = [&](const char* name, std::vector<TC> sig, TC res,
                   InstrGroup group, ApplyFn fn, int frag_slots = 0) {
      InstructionDescriptor d;
      d.name = name;
      d.arity = static_cast<int>(sig.size());
      d.fragment_slots = frag_slots;
      d.signature = std::move(sig);
      d.result = res;
      d.cost = 1;
      d.group = group;
      t.push_back({std::move(d), fn});
    };
    // arithmetic
    add("add", {TC::Number, TC::Number}, TC::Number, InstrGroup::Arith, op_add);
    add("sub", {TC::Number, TC::Number}, TC::Number, InstrGroup::Arith, op_sub);
    add("mul", {TC::Number, TC::Number}, TC::Number, InstrGroup::Arith, op_mul);
    add("div", {TC::Number, TC::Number}, TC::Number, InstrGroup::Arith, op_div);
    add("mod", {TC::Number, TC::Number}, TC::Number, InstrGroup::Arith, op_mod);
    add("neg", {TC::Number}, TC::Number, InstrGroup::Arith, op_neg);
    add("abs", {TC::Number}, TC::Number, InstrGroup::Arith, op_abs);
    add("round", {TC::Number}, TC::Number, InstrGroup::Arith, op_round);
    // comparison / logic
    add("eq", {TC::Any, TC::Any}, TC::Boolean, InstrGroup::Logic, op_eq);
    add("lt", {TC::Number, TC::Number}, TC::Boolean, InstrGroup::Logic, op_lt);
    add("gt", {TC::Number, TC::Number}, TC::Boolean, InstrGroup::Logic, op_gt);
    add("lte", {TC::Number, TC::Number}, TC::Boolean, InstrGroup::Logic, op_lte);
    add("gte", {TC::Number, TC::Number}, TC::Boolean, InstrGroup::Logic, op_gte);
    add("not", {TC::Boolean}, TC::Boolean, InstrGroup::Logic, op_not);
    add("and", {TC::Boolean, TC::Boolean}, TC::Boolean, InstrGroup::Logic, op_and);
    add("or", {TC::Boolean, TC::Boolean}, TC::Boolean, InstrGroup::Logic, op_or);
    // lists
    add("length", {TC::List}, TC::Number, InstrGroup::ListOps, op_length);
    add("sort", {TC::List}, TC::List, InstrGroup::ListOps, op_sort);
    add("reverse", {TC::List}, TC::List, InstrGroup::ListOps, op_reverse);
    add("head", {TC::List}, TC::Any, InstrGroup::ListOps, op_head);
    add("last", {TC::List}, TC::Any, InstrGroup::ListOps, op_last);
    add("nth", {TC::List, TC::Number}, TC::Any, InstrGroup::ListOps, op_nth);
    add("slice", {TC::List, TC::Number, TC::Number}, TC::List,
        InstrGroup::ListOps, op_slice);
    add("concat", {TC::List, TC::List}, TC::List, InstrGroup::ListOps,
        op_concat);
    add("append", {TC::List, TC::Any}, TC::List, InstrGroup::ListOps,
        op_append);
    add("unique", {TC::List}, TC::List, InstrGroup::ListOps, op_unique);
    add("flatten", {TC::List}, TC::List, InstrGroup::ListOps, op_flatten);
    add("zip", {TC::List, TC::List}, TC::List, InstrGroup::ListOps, op_zip);
    add("range", {TC::Number, TC::Number}, TC::List, InstrGroup::ListOps,
        op_range);
    add("sum", {TC::List}, TC::Number, InstrGroup::ListOps, op_sum);
    add("product", {TC::List}, TC::Number, InstrGroup::ListOps, op_product);
    add("min", {TC::List}, TC::Number, InstrGroup::ListOps, op_min);
    add("max", {TC::List}, TC::Number, InstrGroup::ListOps, op_max);
    add("mean", {TC::List}, TC::Number, InstrGroup::ListOps, op_mean);
    add("median", {TC::List}, TC::Number, InstrGroup::ListOps, op_median);
    add("make_list_2", {TC::Any, TC::Any}, TC::List, InstrGroup::ListOps,
        op_make_list_2);
    add("make_list_3", {TC::Any, TC::Any, TC::Any}, TC::List,
        InstrGroup::ListOps, op_make_list_3);
    add("contains", {TC::List, TC::Any}, TC::Boolean, InstrGroup::ListOps,
        op_contains);
    // higher order
    add("map", {TC::List}, TC::List, InstrGroup::HigherOrder, op_map, 1);
    add("filter", {TC::List}, TC::List, InstrGroup::HigherOrder, op_filter, 1);
    add("reduce", {TC::List}, TC::Any, InstrGroup::HigherOrder, op_reduce, 1);
    // strings
    add("split", {TC::Text, TC::Text}, TC::List, InstrGroup::Str, op_split);
    add("join", {TC::List, TC::Text}, TC::Text, InstrGroup::Str, op_join);
    add("upper", {TC::Text}, TC::Text, InstrGroup::Str, op_upper);
    add("lower", {TC::Text}, TC::Text, InstrGroup::Str, op_lower);
    add("titlecase", {TC::Text}, TC::Text, InstrGroup::Str, op_titlecase);
    add("trim", {TC::Text}, TC::Text, InstrGroup::Str, op_trim);
    add("substring", {TC::Text, TC::Number, TC::Number}, TC::Text,
        InstrGroup::Str, op_substring);
    add("index_of", {TC::Text, TC::Text}, TC::Number, InstrGroup::Str,
        op_index_of);
    add("replace", {TC::Text, TC::Text, TC::Text}, TC::Text, InstrGroup::Str,
        op_replace);
    add("text_length", {TC::Text}, TC::Number, InstrGroup::Str,
        op_text_length);
    add("to_text", {TC::Any}, TC::Text, InstrGroup::Str, op_to_text);
    add("parse_number", {TC::Text}, TC::Number, InstrGroup::Str,
        op_parse_number);
    add("concat_text", {TC::Text, TC::Text}, TC::Text, InstrGroup::Str,
        op_concat_text);
    add("template_fill", {TC::List}, TC::Text, InstrGroup::Str,
        op_template_fill);
    // regex (pattern operands are literals drawn from the pattern library)
    add("regex_extract_all", {TC::Text, TC::Text}, TC::List, InstrGroup::Regex,
        op_regex_extract_all);
    add("regex_matches", {TC::Text, TC::Text}, TC::Boolean, InstrGroup::Regex,
        op_regex_matches);
    // dates (format operands are literals drawn from the pattern library)
    add("reformat_date", {TC::Text, TC::Text, TC::Text}, TC::Text,
        InstrGroup::Date, op_reformat_date);
    // records
    add("get", {TC::Record, TC::Text}, TC::Any, InstrGroup::Rec, op_get);
    add("put", {TC::Record, TC::Text, TC::Any}, TC::Record, InstrGroup::Rec,
        op_put);
    add("keys", {TC::Record}, TC::List, InstrGroup::Rec, op_keys);
    add("values", {TC::Record}, TC::List, InstrGroup::Rec, op_values);
    add("make_record", {TC::List, TC::List}, TC::Record, InstrGroup::Rec,
        op_make_record);
    // membership
    add("contains_ci", {TC::List, TC::Any}, TC::Boolean,
        InstrGroup::Membership, op_contains_ci);
    return t;
  }();
  return table;
}

inline std::vector<InstructionDescriptor> catalog() {
  std::vector<InstructionDescriptor> out;
  for (const auto& i : instruction_catalog()) out.push_back(i.desc);
  return out;
}

inline const Instruction* find_instruction(std::string_view name) {
  static const std::unordered_map<std::string_view, const Instruction*> index =
      [] {
        std::unordered_map<std::string_view, const Instruction*> m;
        for (const auto& i : instruction_catalog()) m[i.desc.name] = &i;
        return m;
      }();
  auto it = index.find(name);
  return it == index.end() ? nullptr : it->second;
}

// ---------------------------------------------------------------------------
// Execution.

namespace exec_detail {

struct Evaluator;

struct DirectFragmentRunner final : FragmentRunner {
  Evaluator* ev;
  const DagNode* node;
  std::optional<Value> run(std::size_t slot, const Value& arg) override;
};

struct Evaluator {
  const ExecutionEnv& env;
  std::int64_t* fuel;
  std::string error;
  int error_node = -1;

  std::optional<Value> eval_program(const CompiledProgram& p,
                                    const Value& input);
  std::optional<Value> eval_direct(const CompiledProgram& p,
                                   const Value& input);
};

inline const Value* try_resolve(const Value& v, const Path& p) {
  const Value* cur = &v;
  for (const auto& step : p) {
    if (std::holds_alternative<std::int64_t>(step)) {
      auto idx = std::get<std::int64_t>(step);
      if (!cur->is_list() || idx < 0 ||
          static_cast<std::size_t>(idx) >= cur->items().size())
        return nullptr;
      cur = &cur->items()[static_cast<std::size_t>(idx)];
    } else {
      if (!cur->is_record()) return nullptr;
      cur = cur->field(std::get<std::string>(step));
      if (!cur) return nullptr;
    }
  }
  return cur;
}

inline std::optional<Value> Evaluator::eval_direct(const CompiledProgram& p,
                                                   const Value& input) {
  const auto& nodes = p.nodes();
  std::vector<std::optional<Value>> memo(nodes.size());
  // Mark nodes reachable from the output; only those are evaluated.
  std::vector<char> needed(nodes.size(), 0);
  {
    std::vector<int> stack{p.output()};
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      if (needed[static_cast<std::size_t>(i)]) continue;
      needed[static_cast<std::size_t>(i)] = 1;
      for (int op : nodes[static_cast<std::size_t>(i)].operands)
        stack.push_back(op);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!needed[i]) continue;
    if (--*fuel < 0) {
      error = "budget";
      return std::nullopt;
    }
    const DagNode& n = nodes[i];
    switch (n.kind) {
      case DagNode::Kind::InputRef: {
        const Value* v = try_resolve(input, n.path);
        if (!v) {
          error = "input path " + render_path(n.path) + " unresolvable";
          error_node = static_cast<int>(i);
          return std::nullopt;
        }
        memo[i] = *v;
        break;
      }
      case DagNode::Kind::DataRef: {
        if (!env.data) {
          error = "program has no data reference";
          error_node = static_cast<int>(i);
          return std::nullopt;
        }
        const Value* v = try_resolve(*env.data, n.path);
        if (!v) {
          error = "data path " + render_path(n.path) + " unresolvable";
          error_node = static_cast<int>(i);
          return std::nullopt;
        }
        memo[i] = *v;
        break;
      }
      case DagNode::Kind::Literal:
        memo[i] = n.literal;
        break;
      case DagNode::Kind::Apply: {
        const Instruction* instr = find_instruction(n.name);
        if (!instr) {
          error = "unknown instruction '" + n.name + "'";
          error_node = static_cast<int>(i);
          return std::nullopt;
        }
        std::vector<Value> args;
        args.reserve(n.operands.size());
        for (int op : n.operands) args.push_back(*memo[static_cast<std::size_t>(op)]);
        for (std::size_t k = 0; k < args.size(); ++k) {
          if (!type_class_accepts(instr->desc.signature[k], args[k])) {
            error = "operand " + std::to_string(k) + " of '" + n.name +
                    "' is not " + type_class_name(instr->desc.signature[k]);
            error_node = static_cast<int>(i);
            return std::nullopt;
          }
        }
        DirectFragmentRunner fr;
        fr.ev = this;
        fr.node = &n;
        const char* err = nullptr;
        auto r = instr->fn(args, n.fragments.empty() ? nullptr : &fr, &err);
        if (!r) {
          if (error.empty()) error = err ? err : "step failed";
          error = "'" + n.name + "': " + error;
          error_node = static_cast<int>(i);
          return std::nullopt;
        }
        memo[i] = std::move(*r);
        break;
      }
      case DagNode::Kind::Call: {
        const CompiledProgram* target =
            env.programs ? env.programs->find(n.name) : nullptr;
        if (!target) {
          error = "unknown program '" + n.name + "'";
          error_node = static_cast<int>(i);
          return std::nullopt;
        }
        auto r = eval_program(*target, *memo[static_cast<std::size_t>(n.operands[0])]);
        if (!r) {
          error_node = static_cast<int>(i);
          return std::nullopt;
        }
        memo[i] = std::move(*r);
        break;
      }
    }
  }
  return memo[static_cast<std::size_t>(p.output())];
}

inline std::optional<Value> DirectFragmentRunner::run(std::size_t slot,
                                                      const Value& arg) {
  if (slot >= node->fragments.size()) {
    ev->error = "fragment slot out of range";
    return std::nullopt;
  }
  auto r = ev->eval_program(node->fragments[slot], arg);
  if (!r) return std::nullopt;
  return r;
}

inline std::optional<Value> Evaluator::eval_program(const CompiledProgram& p,
                                                    const Value& input) {
  switch (p.kind()) {
    case CompiledProgram::Kind::Null:
      return Value::null();
    case CompiledProgram::Kind::Direct:
      return eval_direct(p, input);
    case CompiledProgram::Kind::Conditional: {
      for (const auto& [guard, body] : p.branches()) {
        Evaluator sub{env, fuel, {}, -1};
        auto g = sub.eval_program(guard, input);
        if (*fuel < 0) {
          error = "budget";
          return std::nullopt;
        }
        // A guard that fails or yields a non-boolean simply does not match.
        if (!g || !g->is_boolean() || !g->as_boolean()) continue;
        return eval_program(body, input);
      }
      if (const CompiledProgram* d = p.default_body())
        return eval_program(*d, input);
      error = "unmatched input";
      return std::nullopt;
    }
    case CompiledProgram::Kind::Recurrence: {
      if (!input.is_int()) {
        error = "recurrence input must be an integer";
        return std::nullopt;
      }
      std::int64_t n = input.as_int();
      const auto& base = p.base_cases();
      std::int64_t lo = base.front().first;
      Value prev;
      std::int64_t at = lo;
      bool found = false;
      for (const auto& [i, v] : base) {
        if (i == n) return Value::list({Value(n), v});
        if (i <= n && (!found || i > at)) {
          at = i;
          prev = v;
          found = true;
        }
      }
      if (!found || n < lo) {
        error = "recurrence input below base cases";
        return std::nullopt;
      }
      for (std::int64_t i = at + 1; i <= n; ++i) {
        if (--*fuel < 0) {
          error = "budget";
          return std::nullopt;
        }
        auto r = eval_program(p.step(), Value::list({Value(i), prev}));
        if (!r) return std::nullopt;
        prev = std::move(*r);
      }
      return Value::list({Value(n), prev});
    }
  }
  error = "invalid program";
  return std::nullopt;
}

}  // namespace exec_detail

struct ExecOutcome {
  std::optional<Value> value;
  std::string error;
  int error_node = -1;

  bool ok() const { return value.has_value(); }
};

inline ExecOutcome try_execute(const CompiledProgram& p, const Value& input,
                               const ExecutionEnv& env) {
  std::int64_t fuel = env.fuel > 0 ? env.fuel : 1;
  exec_detail::Evaluator ev{env, &fuel, {}, -1};
  ExecOutcome out;
  out.value = ev.eval_program(p, input);
  if (!out.value) {
    out.error = ev.error.empty() ? "execution failed" : ev.error;
    out.error_node = ev.error_node;
  }
  return out;
}

inline Value execute(const CompiledProgram& p, const Value& input,
                     const ExecutionEnv& env) {
  ExecOutcome out = try_execute(p, input, env);
  if (!out.ok()) {
    std::string msg = out.error;
    if (out.error_node >= 0)
      msg += " (node " + std::to_string(out.error_node) + ")";
    throw ExecError(msg);
  }
  return std::move(*out.value);
}

// Applies one instruction to already-evaluated operands. Higher-order
// instructions evaluate their fragment once per element.
inline Value apply_instruction(const std::string& name,
                               const std::vector<Value>& args,
                               const std::vector<CompiledProgram>& fragments,
                               const ExecutionEnv& env) {
  const Instruction* instr = find_instruction(name);
  if (!instr) throw ExecError("unknown instruction '" + name + "'");
  if (static_cast<int>(args.size()) != instr->desc.arity)
    throw ExecError("'" + name + "' expects " +
                    std::to_string(instr->desc.arity) + " operands");
  std::vector<DagNode> nodes;
  DagNode apply;
  apply.kind = DagNode::Kind::Apply;
  apply.name = name;
  apply.fragments = fragments;
  for (std::size_t i = 0; i < args.size(); ++i) {
    DagNode lit;
    lit.kind = DagNode::Kind::Literal;
    lit.literal = args[i];
    nodes.push_back(std::move(lit));
    apply.operands.push_back(static_cast<int>(i));
  }
  nodes.push_back(std::move(apply));
  auto p = CompiledProgram::direct(std::move(nodes),
                                   static_cast<int>(nodes.size()) - 1);
  return execute(p, Value::null(), env);
}

// ---------------------------------------------------------------------------
// Program size.

inline int program_size(const CompiledProgram& p) {
  switch (p.kind()) {
    case CompiledProgram::Kind::Null:
      return 0;
    case CompiledProgram::Kind::Direct: {
      const auto& nodes = p.nodes();
      std::vector<char> needed(nodes.size(), 0);
      std::vector<int> stack{p.output()};
      while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        if (needed[static_cast<std::size_t>(i)]) continue;
        needed[static_cast<std::size_t>(i)] = 1;
        for (int op : nodes[static_cast<std::size_t>(i)].operands)
          stack.push_back(op);
      }
      int total = 0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!needed[i]) continue;
        const DagNode& n = nodes[i];
        if (n.kind == DagNode::Kind::Apply) {
          const Instruction* instr = find_instruction(n.name);
          total += instr ? instr->desc.cost : 1;
          for (const auto& f : n.fragments) total += program_size(f);
        } else if (n.kind == DagNode::Kind::Call) {
          total += 1;
        }
      }
      return total;
    }
    case CompiledProgram::Kind::Conditional: {
      int total = 0;
      for (const auto& [g, b] : p.branches())
        total += program_size(g) + program_size(b);
      if (const CompiledProgram* d = p.default_body()) total += program_size(*d);
      return total;
    }
    case CompiledProgram::Kind::Recurrence:
      // The implicit iteration counts as one unit on top of the step body.
      return 1 + program_size(p.step());
  }
  return 0;
}

inline int branch_count(const CompiledProgram& p) {
  if (p.kind() != CompiledProgram::Kind::Conditional) return 1;
  return static_cast<int>(p.branches().size()) + (p.default_body() ? 1 : 0);
}

}  // namespace zoea

#include "zoea/canonical.hpp"
