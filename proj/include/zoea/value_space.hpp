#pragma once

// Distinct-intermediate-value search: the value space decouples which values
// are reachable from how they are derived. Forward enumeration grows the
// space breadth-first by depth with observational de-duplication; a reverse
// search reconstructs derivation DAGs for interesting values on demand.

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "zoea/parser.hpp"
#include "zoea/vm.hpp"

namespace zoea {

struct SeedOrigin {
  enum class Kind { InputRoot, InputElement, DataElement, Literal };
  Kind kind = Kind::Literal;
  Path path;  // InputElement / DataElement
};

struct SpaceEntry {
  Value value;
  std::string key;  // canonical text
  int min_depth = 0;
  int origin_count = 1;
  std::optional<SeedOrigin> origin;  // set iff inserted as a seed
};

class ValueSpace {
 public:
  explicit ValueSpace(std::size_t max_store = 50000) : max_store_(max_store) {}

  // Inserts if the canonical text is unseen; otherwise counts a duplicate
  // derivation. Returns the entry, or nullptr when the store is full.
  const SpaceEntry* insert(const Value& v, int depth,
                           std::optional<SeedOrigin> origin = std::nullopt) {
    std::string key = render_value(v);
    auto it = by_key_.find(key);
    if (it != by_key_.end()) {
      it->second->origin_count += 1;
      return it->second;
    }
    if (entries_.size() >= max_store_) {
      truncated_ = true;
      return nullptr;
    }
    entries_.push_back(SpaceEntry{v, key, depth, 1, std::move(origin)});
    SpaceEntry* e = &entries_.back();
    by_key_.emplace(e->key, e);
    if (layers_.size() <= static_cast<std::size_t>(depth))
      layers_.resize(static_cast<std::size_t>(depth) + 1);
    layers_[static_cast<std::size_t>(depth)].push_back(e);
    return e;
  }

  const SpaceEntry* find(const Value& v) const {
    return find_key(render_value(v));
  }
  const SpaceEntry* find_key(const std::string& key) const {
    auto it = by_key_.find(key);
    return it == by_key_.end() ? nullptr : it->second;
  }

  std::size_t size() const { return entries_.size(); }
  bool truncated() const { return truncated_; }
  void mark_truncated() { truncated_ = true; }
  int deepest() const { return static_cast<int>(layers_.size()) - 1; }

  static const std::vector<SpaceEntry*> kEmptyLayer;
  const std::vector<SpaceEntry*>& layer(int depth) const {
    if (depth < 0 || static_cast<std::size_t>(depth) >= layers_.size())
      return kEmptyLayer;
    return layers_[static_cast<std::size_t>(depth)];
  }

  // Deterministic iteration: by depth, then insertion order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& layer : layers_)
      for (const SpaceEntry* e : layer) fn(*e);
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for_each([&](const SpaceEntry& e) { out.push_back(e.key); });
    return out;
  }

 private:
  std::size_t max_store_;
  bool truncated_ = false;
  std::deque<SpaceEntry> entries_;  // stable addresses
  std::unordered_map<std::string, SpaceEntry*> by_key_;
  std::vector<std::vector<SpaceEntry*>> layers_;
};

inline const std::vector<SpaceEntry*> ValueSpace::kEmptyLayer = {};

// ---------------------------------------------------------------------------
// Seeds.

struct Seed {
  Value value;
  SeedOrigin origin;
};

// Literals mined once per spec and shared by every case's seed set.
struct MinedLiterals {
  std::vector<Value> values;
};

namespace space_detail {

inline void add_unique(std::vector<Value>& values, const Value& v) {
  for (const auto& u : values)
    if (u == v) return;
  values.push_back(v);
}

inline bool replays_exactly(const char* op, const Value& input,
                            const Value& constant, const Value& output) {
  const Instruction* instr = find_instruction(op);
  const char* err = nullptr;
  Value args[2] = {input, constant};
  auto r = instr->fn(std::span<const Value>(args, 2), nullptr, &err);
  return r && *r == output;
}

}  // namespace space_detail

// Numeric ratio/difference constants are mined only when at least two cases
// corroborate the same constant and the replay is exact; separator characters
// come from text inputs; small index constants cover container positions.
inline MinedLiterals mine_literals(const NormalizedSpec& spec) {
  using space_detail::add_unique;
  MinedLiterals out;
  add_unique(out.values, Value(0));
  add_unique(out.values, Value(1));
  add_unique(out.values, Value(""));
  add_unique(out.values, Value::list({}));

  // Index constants up to the largest observed container arity.
  std::int64_t max_index = 1;
  auto observe = [&](const Value& root) {
    for (const auto& [p, e] : enumerate_elements(root)) {
      if (e.is_list())
        max_index =
            std::max(max_index, static_cast<std::int64_t>(e.items().size()));
      if (e.is_text()) {
        // token count under whitespace split bounds field positions
        std::int64_t tokens = 1;
        for (char c : e.text())
          if (c == ' ') ++tokens;
        max_index = std::max(max_index, tokens);
      }
    }
  };
  if (spec.data) observe(*spec.data);
  for (const auto& c : spec.cases) {
    if (c.input) observe(*c.input);
    for (const auto& o : c.outputs) observe(o);
  }
  max_index = std::min<std::int64_t>(max_index, 12);
  for (std::int64_t i = 2; i <= max_index; ++i)
    add_unique(out.values, Value(i));

  // Separator characters found in text inputs (and data texts).
  auto mine_separators = [&](const Value& root) {
    for (const auto& [p, e] : enumerate_elements(root)) {
      if (!e.is_text()) continue;
      for (char ch : e.text()) {
        bool alnum = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                     (ch >= '0' && ch <= '9');
        if (!alnum && static_cast<unsigned char>(ch) < 0x80)
          add_unique(out.values, Value(std::string(1, ch)));
      }
    }
  };
  for (const auto& c : spec.cases)
    if (c.input) mine_separators(*c.input);
  if (spec.data) mine_separators(*spec.data);

  // Ratio and difference constants across numeric scalar cases.
  std::vector<std::pair<Value, Value>> numeric_pairs;
  for (const auto& c : spec.cases) {
    if (!c.input || c.outputs.size() != 1) continue;
    if (c.input->is_number() && c.outputs[0].is_number())
      numeric_pairs.emplace_back(*c.input, c.outputs[0]);
  }
  if (numeric_pairs.size() >= 2 &&
      numeric_pairs.size() == spec.cases.size()) {
    // ratio: consistent out/in across every case, replaying exactly
    bool ok = true;
    double ratio = 0;
    for (std::size_t i = 0; i < numeric_pairs.size() && ok; ++i) {
      double in = numeric_pairs[i].first.number();
      if (in == 0) {
        ok = false;
        break;
      }
      double r = numeric_pairs[i].second.number() / in;
      if (i == 0) ratio = r;
      ok = r == ratio &&
           space_detail::replays_exactly("mul", numeric_pairs[i].first,
                                         Value(ratio),
                                         numeric_pairs[i].second);
    }
    if (ok) add_unique(out.values, Value(ratio));
    // difference: consistent out - in
    bool dok = true;
    Value diff;
    for (std::size_t i = 0; i < numeric_pairs.size() && dok; ++i) {
      const char* err = nullptr;
      const Instruction* sub = find_instruction("sub");
      Value args[2] = {numeric_pairs[i].second, numeric_pairs[i].first};
      auto d = sub->fn(std::span<const Value>(args, 2), nullptr, &err);
      if (!d) {
        dok = false;
        break;
      }
      if (i == 0) diff = *d;
      dok = *d == diff &&
            space_detail::replays_exactly("add", numeric_pairs[i].first, diff,
                                          numeric_pairs[i].second);
    }
    if (dok) add_unique(out.values, diff);
  }

  // For boolean-output specs, mine input values that separate the true cases
  // from the false cases at a shared path (classifier anchors).
  bool boolean_spec = !spec.cases.empty();
  for (const auto& c : spec.cases)
    boolean_spec = boolean_spec && c.outputs.size() == 1 &&
                   c.outputs[0].is_boolean() && c.input.has_value();
  if (boolean_spec && spec.cases.size() >= 2) {
    std::map<std::string, std::vector<std::pair<Value, bool>>> by_path;
    for (const auto& c : spec.cases)
      for (const auto& [p, e] : enumerate_elements(*c.input))
        by_path[render_path(p)].emplace_back(e, c.outputs[0].as_boolean());
    std::size_t case_count = spec.cases.size();
    for (const auto& [path_text, seen] : by_path) {
      if (seen.size() != case_count) continue;  // path must exist everywhere
      for (bool marker : {true, false}) {
        // a value present at this path in every marker case and no other
        std::optional<Value> candidate;
        bool ok = true;
        for (const auto& [v, label] : seen) {
          if (label != marker) continue;
          if (!candidate) candidate = v;
          ok = ok && *candidate == v;
        }
        if (!ok || !candidate) continue;
        for (const auto& [v, label] : seen)
          if (label != marker && *candidate == v) ok = false;
        if (ok) add_unique(out.values, *candidate);
      }
    }
  }
  return out;
}

// Seeds for one case: input root, every input element, every data element,
// and the spec-wide mined literals.
inline std::vector<Seed> seed_values(const NormalizedCase& c,
                                     const std::optional<Value>& data,
                                     const MinedLiterals& mined) {
  std::vector<Seed> seeds;
  if (c.input) {
    for (const auto& [p, e] : enumerate_elements(*c.input)) {
      SeedOrigin o;
      o.kind = p.empty() ? SeedOrigin::Kind::InputRoot
                         : SeedOrigin::Kind::InputElement;
      o.path = p;
      seeds.push_back({e, std::move(o)});
    }
  }
  if (data) {
    for (const auto& [p, e] : enumerate_elements(*data)) {
      SeedOrigin o;
      o.kind = SeedOrigin::Kind::DataElement;
      o.path = p;
      seeds.push_back({e, std::move(o)});
    }
  }
  for (const auto& v : mined.values) {
    SeedOrigin o;
    o.kind = SeedOrigin::Kind::Literal;
    seeds.push_back({v, std::move(o)});
  }
  return seeds;
}

// ---------------------------------------------------------------------------
// Forward enumeration.

struct EnumLimits {
  int max_depth = 4;
  std::size_t max_store = 50000;
  std::size_t max_applications = 2'000'000;  // per layer
};

// Instructions that participate in generic forward enumeration: first order
// only; pattern-parameter groups are driven by their knowledge sources.
inline bool enumerable_instruction(const Instruction& i) {
  if (i.desc.fragment_slots > 0) return false;
  return i.desc.group != InstrGroup::Regex && i.desc.group != InstrGroup::Date;
}

struct LayerResult {
  std::vector<std::pair<Value, int>> added;  // value, depth
  std::size_t applications = 0;
  std::size_t duplicates = 0;
  bool truncated = false;
};

namespace space_detail {

// Applies fn over all operand tuples whose depths are < depth with at least
// one operand at exactly depth-1, in deterministic order.
template <typename Fn>
void for_each_tuple(const ValueSpace& space, int arity, int depth, Fn&& fn) {
  std::vector<const SpaceEntry*> pool;
  for (int d = 0; d < depth; ++d)
    for (const SpaceEntry* e : space.layer(d)) pool.push_back(e);
  std::vector<const SpaceEntry*> tuple(static_cast<std::size_t>(arity));
  std::function<bool(int, bool)> rec = [&](int slot, bool has_frontier) {
    if (slot == arity) {
      if (!has_frontier) return true;  // tuple seen at an earlier layer
      return fn(tuple);
    }
    for (const SpaceEntry* e : pool) {
      tuple[static_cast<std::size_t>(slot)] = e;
      bool frontier = has_frontier || e->min_depth == depth - 1;
      // Remaining slots cannot raise the max depth if none is frontier yet;
      // they still may, so recurse regardless.
      if (!rec(slot + 1, frontier)) return false;
    }
    return true;
  };
  rec(0, false);
}

}  // namespace space_detail

// Computes the values of one new depth layer without mutating the space.
// Deterministic: instruction order x operand insertion order.
inline LayerResult enumerate_layer(const ValueSpace& space,
                                   const std::vector<const Instruction*>& instrs,
                                   int depth, const EnumLimits& limits) {
  LayerResult result;
  if (depth <= 0 || depth > limits.max_depth) return result;
  std::unordered_map<std::string, bool> fresh;  // layer-local dedup
  std::size_t room = limits.max_store > space.size()
                         ? limits.max_store - space.size()
                         : 0;
  if (room == 0) {
    result.truncated = true;
    return result;
  }
  for (const Instruction* instr : instrs) {
    if (!enumerable_instruction(*instr)) continue;
    space_detail::for_each_tuple(
        space, instr->desc.arity, depth,
        [&](const std::vector<const SpaceEntry*>& tuple) {
          if (++result.applications > limits.max_applications) {
            result.truncated = true;
            return false;
          }
          for (std::size_t k = 0; k < tuple.size(); ++k)
            if (!type_class_accepts(instr->desc.signature[k],
                                    tuple[k]->value))
              return true;
          std::vector<Value> args;
          args.reserve(tuple.size());
          for (const SpaceEntry* e : tuple) args.push_back(e->value);
          const char* err = nullptr;
          auto r = instr->fn(args, nullptr, &err);
          if (!r) return true;
          // identity applications are semantically null
          for (const SpaceEntry* e : tuple)
            if (e->value == *r) return true;
          std::string key = render_value(*r);
          if (space.find_key(key)) {
            ++result.duplicates;
            return true;
          }
          if (!fresh.emplace(std::move(key), true).second) {
            ++result.duplicates;
            return true;
          }
          result.added.emplace_back(std::move(*r), depth);
          if (result.added.size() >= room) {
            result.truncated = true;
            return false;
          }
          return true;
        });
    if (result.truncated) break;
  }
  return result;
}

// Seeds plus breadth-first layers up to the depth limit. This is the whole
// forward enumeration as one call; the engine instead runs one layer per
// scheduling cycle through enumerate_layer.
inline ValueSpace forward_enumerate(const std::vector<Seed>& seeds,
                                    const std::vector<const Instruction*>& instrs,
                                    const EnumLimits& limits) {
  ValueSpace space(limits.max_store);
  for (const auto& s : seeds) space.insert(s.value, 0, s.origin);
  for (int depth = 1; depth <= limits.max_depth; ++depth) {
    LayerResult layer = enumerate_layer(space, instrs, depth, limits);
    for (const auto& [v, d] : layer.added) space.insert(v, d);
    if (layer.truncated) {
      space.mark_truncated();
      break;
    }
    if (layer.added.empty()) break;
  }
  return space;
}

// ---------------------------------------------------------------------------
// Reverse derivation search.

struct ReverseLimits {
  int max_results = 4;
  int tuples_per_instruction = 4;
  std::size_t max_tests = 500'000;
};

namespace space_detail {

struct Deriv {
  CompiledProgram program;
  int size = 0;
  std::string canon;
};

struct ReverseCtx {
  const ValueSpace& space;
  const std::vector<const Instruction*>& instrs;
  ReverseLimits limits;
  std::size_t tests = 0;
  std::unordered_map<std::string, std::vector<Deriv>> memo;
};

inline int seed_node(DagBuilder& b, const SeedOrigin& origin,
                     const Value& value) {
  switch (origin.kind) {
    case SeedOrigin::Kind::InputRoot:
    case SeedOrigin::Kind::InputElement:
      return b.input(origin.path);
    case SeedOrigin::Kind::DataElement:
      return b.data(origin.path);
    case SeedOrigin::Kind::Literal:
      return b.literal(value);
  }
  return b.literal(value);
}

// Merges a derivation program into a builder, keeping input references as-is.
inline int merge_program(DagBuilder& b, const CompiledProgram& p) {
  std::vector<int> remap(p.nodes().size(), -1);
  for (std::size_t i = 0; i < p.nodes().size(); ++i) {
    const DagNode& n = p.nodes()[i];
    switch (n.kind) {
      case DagNode::Kind::InputRef: remap[i] = b.input(n.path); break;
      case DagNode::Kind::DataRef: remap[i] = b.data(n.path); break;
      case DagNode::Kind::Literal: remap[i] = b.literal(n.literal); break;
      case DagNode::Kind::Apply: {
        std::vector<int> ops;
        for (int op : n.operands) ops.push_back(remap[static_cast<std::size_t>(op)]);
        remap[i] = b.apply(n.name, std::move(ops), n.fragments);
        break;
      }
      case DagNode::Kind::Call:
        remap[i] = b.call(n.name, remap[static_cast<std::size_t>(n.operands[0])]);
        break;
    }
  }
  return remap[static_cast<std::size_t>(p.output())];
}

inline void push_deriv(std::vector<Deriv>& out, CompiledProgram program,
                       int max_results) {
  Deriv d;
  d.size = program_size(program);
  d.canon = canonical_form(program);
  d.program = std::move(program);
  for (const auto& existing : out)
    if (existing.canon == d.canon) return;
  out.push_back(std::move(d));
  std::sort(out.begin(), out.end(), [](const Deriv& a, const Deriv& b) {
    return a.size != b.size ? a.size < b.size : a.canon < b.canon;
  });
  if (out.size() > static_cast<std::size_t>(max_results)) out.pop_back();
}

// Candidate operand tuples (stored entries of smaller depth) for one
// instruction producing `target`. Specialized inverses handle arithmetic and
// text concatenation; everything else goes through a bounded rescan.
inline std::vector<std::vector<const SpaceEntry*>> inverse_tuples(
    ReverseCtx& ctx, const Instruction& instr, const SpaceEntry& target) {
  std::vector<std::vector<const SpaceEntry*>> tuples;
  const int d = target.min_depth;
  auto find_smaller = [&](const Value& v) -> const SpaceEntry* {
    const SpaceEntry* e = ctx.space.find(v);
    return e && e->min_depth < d ? e : nullptr;
  };
  auto full = [&] {
    return tuples.size() >=
           static_cast<std::size_t>(ctx.limits.tuples_per_instruction);
  };
  const std::string& name = instr.desc.name;
  const char* err = nullptr;

  if (name == "add" || name == "sub" || name == "mul" || name == "div") {
    if (!target.value.is_number()) return tuples;
    for (int layer = 0; layer < d && !full(); ++layer) {
      for (const SpaceEntry* x : ctx.space.layer(layer)) {
        if (full()) break;
        if (!x->value.is_number()) continue;
        if (++ctx.tests > ctx.limits.max_tests) return tuples;
        // solve target = op(x, y) for y
        std::optional<Value> y;
        if (name == "add") {
          Value args[2] = {target.value, x->value};
          auto r = find_instruction("sub")->fn(std::span<const Value>(args, 2),
                                               nullptr, &err);
          if (r) y = *r;
        } else if (name == "sub") {
          Value args[2] = {x->value, target.value};
          auto r = find_instruction("sub")->fn(std::span<const Value>(args, 2),
                                               nullptr, &err);
          if (r) y = *r;  // x - y = target -> y = x - target
        } else if (name == "mul") {
          if (x->value.number() != 0) {
            Value args[2] = {target.value, x->value};
            auto r = find_instruction("div")->fn(
                std::span<const Value>(args, 2), nullptr, &err);
            if (r) y = *r;
          }
        } else {  // div: target = x / y -> y = x / target
          if (target.value.number() != 0) {
            Value args[2] = {x->value, target.value};
            auto r = find_instruction("div")->fn(
                std::span<const Value>(args, 2), nullptr, &err);
            if (r) y = *r;
          }
        }
        if (!y) continue;
        const SpaceEntry* ye = find_smaller(*y);
        if (!ye) continue;
        // verify exact replay (integer/decimal forms can differ)
        Value args[2] = {x->value, ye->value};
        if (name == "sub" || name == "div") args[1] = ye->value;
        auto r = instr.fn(std::span<const Value>(args, 2), nullptr, &err);
        if (!r || *r != target.value) continue;
        tuples.push_back({x, ye});
      }
    }
    return tuples;
  }
  if (name == "concat_text") {
    if (!target.value.is_text()) return tuples;
    const std::string& t = target.value.text();
    for (std::size_t cut = 1; cut < t.size() && !full(); ++cut) {
      if (++ctx.tests > ctx.limits.max_tests) return tuples;
      const SpaceEntry* a = find_smaller(Value(t.substr(0, cut)));
      const SpaceEntry* b = find_smaller(Value(t.substr(cut)));
      if (a && b) tuples.push_back({a, b});
    }
    return tuples;
  }
  if (name == "make_list_2" || name == "make_list_3") {
    std::size_t want = name == "make_list_2" ? 2 : 3;
    if (!target.value.is_list() || target.value.items().size() != want)
      return tuples;
    std::vector<const SpaceEntry*> tuple;
    for (const auto& item : target.value.items()) {
      const SpaceEntry* e = find_smaller(item);
      if (!e) return tuples;
      tuple.push_back(e);
    }
    tuples.push_back(std::move(tuple));
    return tuples;
  }
  if (name == "reverse") {
    if (!target.value.is_list()) return tuples;
    ValueList rev = target.value.items();
    std::reverse(rev.begin(), rev.end());
    if (const SpaceEntry* e = find_smaller(Value::list(std::move(rev))))
      tuples.push_back({e});
    return tuples;
  }

  // Generic bounded rescan over smaller-depth operand tuples.
  space_detail::for_each_tuple(
      const_cast<ValueSpace&>(ctx.space), instr.desc.arity, d,
      [&](const std::vector<const SpaceEntry*>& tuple) {
        if (full()) return false;
        if (++ctx.tests > ctx.limits.max_tests) return false;
        for (std::size_t k = 0; k < tuple.size(); ++k)
          if (!type_class_accepts(instr.desc.signature[k], tuple[k]->value))
            return true;
        std::vector<Value> args;
        for (const SpaceEntry* e : tuple) args.push_back(e->value);
        const char* aerr = nullptr;
        auto r = instr.fn(args, nullptr, &aerr);
        if (!r || *r != target.value) return true;
        bool identity = false;
        for (const SpaceEntry* e : tuple) identity = identity || e == &target;
        if (identity) return true;
        tuples.push_back(tuple);
        return true;
      });
  return tuples;
}

inline const std::vector<Deriv>& derive(ReverseCtx& ctx,
                                        const SpaceEntry& entry) {
  auto it = ctx.memo.find(entry.key);
  if (it != ctx.memo.end()) return it->second;
  // Seed the memo first so cycles (impossible by depth, but harmless) stop.
  std::vector<Deriv>& out = ctx.memo[entry.key];
  if (entry.origin) {
    DagBuilder b;
    int n = seed_node(b, *entry.origin, entry.value);
    push_deriv(out, b.build(n), ctx.limits.max_results);
  }
  if (entry.min_depth == 0) return out;
  for (const Instruction* instr : ctx.instrs) {
    if (!enumerable_instruction(*instr)) continue;
    auto tuples = inverse_tuples(ctx, *instr, entry);
    for (const auto& tuple : tuples) {
      // derive operands recursively; combine smallest-first
      std::vector<const std::vector<Deriv>*> kid_opts;
      bool viable = true;
      for (const SpaceEntry* e : tuple) {
        const std::vector<Deriv>& kids = derive(ctx, *e);
        if (kids.empty()) {
          viable = false;
          break;
        }
        kid_opts.push_back(&kids);
      }
      if (!viable) continue;
      // bounded cartesian combination
      std::vector<std::size_t> pick(tuple.size(), 0);
      int combos = 0;
      while (combos < ctx.limits.max_results) {
        ++combos;
        DagBuilder b;
        std::vector<int> ops;
        for (std::size_t k = 0; k < tuple.size(); ++k)
          ops.push_back(merge_program(b, (*kid_opts[k])[pick[k]].program));
        int node = b.apply(instr->desc.name, std::move(ops));
        push_deriv(out, b.build(node), ctx.limits.max_results);
        // advance picks odometer-style
        std::size_t slot = 0;
        while (slot < pick.size()) {
          if (pick[slot] + 1 < kid_opts[slot]->size()) {
            ++pick[slot];
            break;
          }
          pick[slot] = 0;
          ++slot;
        }
        if (slot == pick.size()) break;
      }
    }
  }
  return out;
}

}  // namespace space_detail

// Derivation DAGs for a target value present in the space, smallest first.
// Returns an empty list when nothing is found (not an error).
inline std::vector<CompiledProgram> reverse_derive(
    const Value& target, const ValueSpace& space,
    const std::vector<const Instruction*>& instrs,
    const ReverseLimits& limits = {}) {
  const SpaceEntry* entry = space.find(target);
  if (!entry) return {};
  space_detail::ReverseCtx ctx{space, instrs, limits, 0, {}};
  const auto& derivs = space_detail::derive(ctx, *entry);
  std::vector<CompiledProgram> out;
  out.reserve(derivs.size());
  for (const auto& d : derivs) out.push_back(d.program);
  return out;
}

}  // namespace zoea
