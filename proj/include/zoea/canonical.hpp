#pragma once

// Canonical program text: a deterministic, parseable rendering of compiled
// programs. Node ids are assigned by a canonical topological order, and
// structurally identical nodes are merged, so equal programs produce equal
// texts. This text is the registry's on-disk format.

#include "zoea/vm.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace zoea {

std::string canonical_form(const CompiledProgram& p);

namespace canon_detail {

inline int node_kind_rank(DagNode::Kind k) {
  switch (k) {
    case DagNode::Kind::InputRef: return 0;
    case DagNode::Kind::DataRef: return 1;
    case DagNode::Kind::Literal: return 2;
    case DagNode::Kind::Apply: return 3;
    case DagNode::Kind::Call: return 4;
  }
  return 5;
}

inline std::string node_payload_text(const DagNode& n) {
  switch (n.kind) {
    case DagNode::Kind::InputRef: return render_path(n.path);
    case DagNode::Kind::DataRef: return render_path(n.path);
    case DagNode::Kind::Literal: return render_value(n.literal);
    case DagNode::Kind::Apply: {
      std::string out = n.name;
      for (const auto& f : n.fragments) {
        out += '|';
        out += canonical_form(f);
      }
      return out;
    }
    case DagNode::Kind::Call: return render_value(Value(n.name));
  }
  return {};
}

struct CanonDirect {
  std::vector<const DagNode*> nodes;  // canonical order
  std::vector<std::vector<int>> operands;  // remapped operand ids
  int output = -1;
};

// Reachable-only, duplicate-merged, canonically ordered view of a DAG.
inline CanonDirect canonicalize_direct(const CompiledProgram& p) {
  const auto& nodes = p.nodes();
  std::vector<char> reach(nodes.size(), 0);
  {
    std::vector<int> stack{p.output()};
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      if (reach[static_cast<std::size_t>(i)]) continue;
      reach[static_cast<std::size_t>(i)] = 1;
      for (int op : nodes[static_cast<std::size_t>(i)].operands)
        stack.push_back(op);
    }
  }
  // Merge structurally identical nodes (operands already merged, since they
  // have smaller indexes).
  std::vector<int> rep(nodes.size(), -1);
  std::map<std::string, int> by_key;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!reach[i]) continue;
    const DagNode& n = nodes[i];
    std::string key = std::to_string(node_kind_rank(n.kind)) + ":" +
                      node_payload_text(n) + ":";
    for (int op : n.operands) key += std::to_string(rep[static_cast<std::size_t>(op)]) + ",";
    rep[i] = by_key.emplace(key, static_cast<int>(i)).first->second;
  }
  // Canonical order: repeatedly pick the ready representative with the
  // smallest (kind, payload, operand-new-ids) key.
  std::vector<int> reps;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (reach[i] && rep[i] == static_cast<int>(i)) reps.push_back(static_cast<int>(i));
  std::vector<int> new_id(nodes.size(), -1);
  CanonDirect out;
  std::vector<char> placed(nodes.size(), 0);
  while (out.nodes.size() < reps.size()) {
    int best = -1;
    std::tuple<int, std::string, std::vector<int>> best_key;
    for (int i : reps) {
      if (placed[static_cast<std::size_t>(i)]) continue;
      const DagNode& n = nodes[static_cast<std::size_t>(i)];
      bool ready = true;
      std::vector<int> ops;
      for (int op : n.operands) {
        int r = rep[static_cast<std::size_t>(op)];
        if (new_id[static_cast<std::size_t>(r)] < 0) {
          ready = false;
          break;
        }
        ops.push_back(new_id[static_cast<std::size_t>(r)]);
      }
      if (!ready) continue;
      auto key = std::make_tuple(node_kind_rank(n.kind), node_payload_text(n),
                                 std::move(ops));
      if (best < 0 || key < best_key) {
        best = i;
        best_key = std::move(key);
      }
    }
    new_id[static_cast<std::size_t>(best)] = static_cast<int>(out.nodes.size());
    placed[static_cast<std::size_t>(best)] = 1;
    out.nodes.push_back(&nodes[static_cast<std::size_t>(best)]);
    out.operands.push_back(std::get<2>(best_key));
  }
  out.output = new_id[static_cast<std::size_t>(rep[static_cast<std::size_t>(p.output())])];
  return out;
}

}  // namespace canon_detail

inline std::string canonical_form(const CompiledProgram& p) {
  using namespace canon_detail;
  switch (p.kind()) {
    case CompiledProgram::Kind::Null:
      return "(null)";
    case CompiledProgram::Kind::Direct: {
      CanonDirect c = canonicalize_direct(p);
      std::string out = "(direct";
      for (std::size_t i = 0; i < c.nodes.size(); ++i) {
        const DagNode& n = *c.nodes[i];
        out += ' ';
        switch (n.kind) {
          case DagNode::Kind::InputRef:
            out += "(in " + render_path(n.path) + ")";
            break;
          case DagNode::Kind::DataRef:
            out += "(data " + render_path(n.path) + ")";
            break;
          case DagNode::Kind::Literal:
            out += "(lit " + render_value(n.literal) + ")";
            break;
          case DagNode::Kind::Apply: {
            out += "(ap " + n.name;
            for (int op : c.operands[i]) out += ' ' + std::to_string(op);
            for (const auto& f : n.fragments)
              out += " (frag " + canonical_form(f) + ")";
            out += ')';
            break;
          }
          case DagNode::Kind::Call: {
            out += "(call " + render_value(Value(n.name));
            for (int op : c.operands[i]) out += ' ' + std::to_string(op);
            out += ')';
            break;
          }
        }
      }
      out += " (out " + std::to_string(c.output) + "))";
      return out;
    }
    case CompiledProgram::Kind::Conditional: {
      std::string out = "(cond";
      for (const auto& [g, b] : p.branches())
        out += " (br " + canonical_form(g) + " " + canonical_form(b) + ")";
      if (const CompiledProgram* d = p.default_body())
        out += " (else " + canonical_form(*d) + ")";
      out += ')';
      return out;
    }
    case CompiledProgram::Kind::Recurrence: {
      std::string out = "(rec (base";
      for (const auto& [i, v] : p.base_cases())
        out += " (" + std::to_string(i) + " " + render_value(v) + ")";
      out += ") (step " + canonical_form(p.step()) + "))";
      return out;
    }
  }
  return "(null)";
}

inline bool operator==(const CompiledProgram& a, const CompiledProgram& b) {
  return canonical_form(a) == canonical_form(b);
}

// ---------------------------------------------------------------------------
// Canonical text parsing (registry load path).

namespace canon_detail {

struct SexprToken {
  enum class Kind { Open, Close, Atom } kind;
  std::string text;
};

inline std::vector<SexprToken> sexpr_tokens(std::string_view text) {
  std::vector<SexprToken> out;
  std::size_t i = 0;
  auto fail = [&](const char* msg) {
    throw ProgramError(std::string(msg) + " at offset " + std::to_string(i));
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({SexprToken::Kind::Open, "("});
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({SexprToken::Kind::Close, ")"});
      ++i;
      continue;
    }
    // Atom: runs to whitespace or paren; quoted spans may contain both.
    std::string atom;
    while (i < text.size()) {
      char a = text[i];
      if (a == ' ' || a == '\n' || a == '\t' || a == '\r' || a == '(' ||
          a == ')')
        break;
      if (a == '"') {
        atom += a;
        ++i;
        while (i < text.size() && text[i] != '"') {
          if (text[i] == '\\') {
            atom += text[i];
            ++i;
            if (i >= text.size()) fail("unterminated escape");
          }
          atom += text[i];
          ++i;
        }
        if (i >= text.size()) fail("unterminated quote");
        atom += '"';
        ++i;
        continue;
      }
      atom += a;
      ++i;
    }
    out.push_back({SexprToken::Kind::Atom, std::move(atom)});
  }
  return out;
}

struct SexprCursor {
  const std::vector<SexprToken>& toks;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ProgramError("canonical program text: " + msg);
  }
  bool done() const { return i >= toks.size(); }
  const SexprToken& peek() const {
    if (done()) fail("unexpected end");
    return toks[i];
  }
  void expect_open() {
    if (peek().kind != SexprToken::Kind::Open) fail("expected '('");
    ++i;
  }
  void expect_close() {
    if (peek().kind != SexprToken::Kind::Close) fail("expected ')'");
    ++i;
  }
  bool at_close() const {
    return !done() && toks[i].kind == SexprToken::Kind::Close;
  }
  bool at_open() const {
    return !done() && toks[i].kind == SexprToken::Kind::Open;
  }
  std::string atom() {
    if (peek().kind != SexprToken::Kind::Atom) fail("expected an atom");
    return toks[i++].text;
  }
  int integer() {
    std::string a = atom();
    try {
      return std::stoi(a);
    } catch (...) {
      fail("expected an integer, found '" + a + "'");
    }
    return 0;  // unreachable
  }
};

CompiledProgram parse_program_sexpr(SexprCursor& cur);

inline CompiledProgram parse_direct_sexpr(SexprCursor& cur) {
  std::vector<DagNode> nodes;
  int output = -1;
  while (cur.at_open()) {
    cur.expect_open();
    std::string tag = cur.atom();
    if (tag == "out") {
      output = cur.integer();
      cur.expect_close();
      break;
    }
    DagNode n;
    if (tag == "in" || tag == "data") {
      n.kind = tag == "in" ? DagNode::Kind::InputRef : DagNode::Kind::DataRef;
      n.path = parse_path(cur.atom());
    } else if (tag == "lit") {
      n.kind = DagNode::Kind::Literal;
      n.literal = parse_value(cur.atom());
    } else if (tag == "ap") {
      n.kind = DagNode::Kind::Apply;
      n.name = cur.atom();
      while (!cur.at_close() && !cur.at_open()) n.operands.push_back(cur.integer());
      while (cur.at_open()) {
        cur.expect_open();
        if (cur.atom() != "frag") cur.fail("expected 'frag'");
        n.fragments.push_back(parse_program_sexpr(cur));
        cur.expect_close();
      }
    } else if (tag == "call") {
      n.kind = DagNode::Kind::Call;
      Value name = parse_value(cur.atom());
      if (!name.is_text()) cur.fail("call target must be a text name");
      n.name = name.text();
      n.operands.push_back(cur.integer());
    } else {
      cur.fail("unknown node tag '" + tag + "'");
    }
    nodes.push_back(std::move(n));
    cur.expect_close();
  }
  if (output < 0) cur.fail("direct program missing (out N)");
  return CompiledProgram::direct(std::move(nodes), output);
}

inline CompiledProgram parse_program_sexpr(SexprCursor& cur) {
  cur.expect_open();
  std::string tag = cur.atom();
  if (tag == "null") {
    cur.expect_close();
    return CompiledProgram::null_program();
  }
  if (tag == "direct") {
    CompiledProgram p = parse_direct_sexpr(cur);
    cur.expect_close();
    return p;
  }
  if (tag == "cond") {
    std::vector<std::pair<CompiledProgram, CompiledProgram>> branches;
    std::optional<CompiledProgram> default_body;
    while (cur.at_open()) {
      cur.expect_open();
      std::string k = cur.atom();
      if (k == "br") {
        CompiledProgram guard = parse_program_sexpr(cur);
        CompiledProgram body = parse_program_sexpr(cur);
        branches.emplace_back(std::move(guard), std::move(body));
      } else if (k == "else") {
        default_body = parse_program_sexpr(cur);
      } else {
        cur.fail("unknown conditional part '" + k + "'");
      }
      cur.expect_close();
    }
    cur.expect_close();
    return CompiledProgram::conditional(std::move(branches),
                                        std::move(default_body));
  }
  if (tag == "rec") {
    cur.expect_open();
    if (cur.atom() != "base") cur.fail("expected 'base'");
    std::vector<std::pair<std::int64_t, Value>> base;
    while (cur.at_open()) {
      cur.expect_open();
      std::int64_t idx = cur.integer();
      Value v = parse_value(cur.atom());
      base.emplace_back(idx, std::move(v));
      cur.expect_close();
    }
    cur.expect_close();
    cur.expect_open();
    if (cur.atom() != "step") cur.fail("expected 'step'");
    CompiledProgram step = parse_program_sexpr(cur);
    cur.expect_close();
    cur.expect_close();
    return CompiledProgram::recurrence(std::move(base), std::move(step));
  }
  cur.fail("unknown program tag '" + tag + "'");
}

}  // namespace canon_detail

inline CompiledProgram parse_canonical_program(std::string_view text) {
  auto toks = canon_detail::sexpr_tokens(text);
  canon_detail::SexprCursor cur{toks, 0};
  CompiledProgram p = canon_detail::parse_program_sexpr(cur);
  if (!cur.done()) cur.fail("trailing content");
  return p;
}

// ---------------------------------------------------------------------------
// DAG construction with structural de-duplication.

class DagBuilder {
 public:
  int input(const Path& p) {
    DagNode n;
    n.kind = DagNode::Kind::InputRef;
    n.path = p;
    return intern(std::move(n));
  }
  int data(const Path& p) {
    DagNode n;
    n.kind = DagNode::Kind::DataRef;
    n.path = p;
    return intern(std::move(n));
  }
  int literal(const Value& v) {
    DagNode n;
    n.kind = DagNode::Kind::Literal;
    n.literal = v;
    return intern(std::move(n));
  }
  int apply(const std::string& name, std::vector<int> operands,
            std::vector<CompiledProgram> fragments = {}) {
    DagNode n;
    n.kind = DagNode::Kind::Apply;
    n.name = name;
    n.operands = std::move(operands);
    n.fragments = std::move(fragments);
    return intern(std::move(n));
  }
  int call(const std::string& name, int operand) {
    DagNode n;
    n.kind = DagNode::Kind::Call;
    n.name = name;
    n.operands = {operand};
    return intern(std::move(n));
  }

  // Appends another direct program, feeding its input from `input_node`.
  // Input paths into the fed value become nth/get chains.
  int splice(const CompiledProgram& p, int input_node) {
    if (p.kind() != CompiledProgram::Kind::Direct)
      throw ProgramError("can only splice direct programs");
    std::vector<int> remap(p.nodes().size(), -1);
    for (std::size_t i = 0; i < p.nodes().size(); ++i) {
      const DagNode& n = p.nodes()[i];
      switch (n.kind) {
        case DagNode::Kind::InputRef: {
          int cur = input_node;
          for (const auto& step : n.path) {
            if (std::holds_alternative<std::int64_t>(step))
              cur = apply("nth", {cur, literal(Value(std::get<std::int64_t>(step)))});
            else
              cur = apply("get", {cur, literal(Value(std::get<std::string>(step)))});
          }
          remap[i] = cur;
          break;
        }
        case DagNode::Kind::DataRef: remap[i] = data(n.path); break;
        case DagNode::Kind::Literal: remap[i] = literal(n.literal); break;
        case DagNode::Kind::Apply: {
          std::vector<int> ops;
          for (int op : n.operands) ops.push_back(remap[static_cast<std::size_t>(op)]);
          remap[i] = apply(n.name, std::move(ops), n.fragments);
          break;
        }
        case DagNode::Kind::Call: {
          remap[i] = call(n.name, remap[static_cast<std::size_t>(n.operands[0])]);
          break;
        }
      }
    }
    return remap[static_cast<std::size_t>(p.output())];
  }

  CompiledProgram build(int output) const {
    return CompiledProgram::direct(nodes_, output);
  }

  std::size_t size() const { return nodes_.size(); }
  const DagNode& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

 private:
  int intern(DagNode n) {
    std::string key = std::to_string(canon_detail::node_kind_rank(n.kind)) +
                      ":" + canon_detail::node_payload_text(n) + ":";
    for (int op : n.operands) key += std::to_string(op) + ",";
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    index_.emplace(std::move(key), id);
    return id;
  }

  std::vector<DagNode> nodes_;
  std::map<std::string, int> index_;
};

// Convenience: a direct program returning a constant.
inline CompiledProgram literal_program(const Value& v) {
  DagBuilder b;
  int n = b.literal(v);
  return b.build(n);
}

// Convenience: a direct program returning an input element.
inline CompiledProgram input_program(const Path& p = {}) {
  DagBuilder b;
  int n = b.input(p);
  return b.build(n);
}

}  // namespace zoea
