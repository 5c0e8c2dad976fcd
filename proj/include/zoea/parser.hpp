#pragma once

// Source-language front end: tokenizer, program parser and spec
// normalization. A source file holds one or more programs made of tags
// (program/use/data/case/step/input/derive/output), colons and values.
// Layout carries no meaning; whitespace may occur in any quantity.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zoea/value.hpp"

namespace zoea {

enum class StepKind { Input, Derive, Output };

struct StepSpec {
  std::optional<Value> id;  // step identifier, metadata only
  StepKind kind = StepKind::Input;
  Value value;
};

struct CaseSpec {
  std::optional<Value> id;
  std::vector<StepSpec> steps;
};

struct ProgramSpec {
  Value name;  // identifier: number or text
  std::vector<std::string> uses;
  std::optional<Value> data;
  std::vector<CaseSpec> cases;
  bool implicit_case = false;  // steps appeared without a case tag

  std::string name_text() const {
    return name.is_text() ? name.text() : render_value(name);
  }
};

struct SpecError : std::runtime_error {
  explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Tokenizer.

enum class TokenKind { Tag, Colon, Value };

struct Token {
  TokenKind kind;
  std::string text;   // tag name, or raw token spelling for diagnostics
  Value value;        // for TokenKind::Value
  std::size_t offset = 0;
};

inline bool is_tag_word(std::string_view w) {
  return w == "program" || w == "use" || w == "data" || w == "case" ||
         w == "step" || w == "input" || w == "derive" || w == "output";
}

// Splits source into a strict tag/colon/value token sequence. A bare word at
// a value position that names a tag and is itself followed by ':' signals an
// omitted value. Values may span lines (nested lists and records).
inline std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> out;
  ValueScanner sc(source);
  while (!sc.at_end()) {
    std::size_t at = sc.pos();
    char c = source[at];
    if (ValueScanner::is_structural(c))
      sc.fail(std::string("expected a tag, found '") + c + "'", at);
    std::string word = sc.scan_bare();
    if (!is_tag_word(word)) sc.fail("unknown tag '" + word + "'", at);
    out.push_back({TokenKind::Tag, word, Value(), at});

    if (sc.at_end() || source[sc.pos()] != ':')
      sc.fail("expected ':' after tag '" + word + "'",
              sc.pos() >= source.size() ? source.size() : sc.pos());
    out.push_back({TokenKind::Colon, ":", Value(), sc.pos()});
    sc.set_pos(sc.pos() + 1);

    if (sc.at_end())
      sc.fail("missing value after tag '" + word + "'", source.size());
    std::size_t vat = sc.pos();
    char vc = source[vat];
    if (vc == ':' || vc == ']' || vc == '}' || vc == ',')
      sc.fail(std::string("expected a value, found '") + vc + "'", vat);
    if (!ValueScanner::is_structural(vc)) {
      std::string v = sc.scan_bare();
      ValueScanner peek(source, sc.pos());
      if (is_tag_word(v) && !peek.at_end() && source[peek.pos()] == ':')
        sc.fail("missing value after tag '" + word + "'", vat);
      out.push_back({TokenKind::Value, v, ValueScanner::classify_bare(v), vat});
    } else {
      Value v = sc.scan_value();
      out.push_back({TokenKind::Value, render_value(v), std::move(v), vat});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser.

namespace detail_parse {

struct Cursor {
  const std::vector<Token>& toks;
  std::string_view source;
  std::size_t i = 0;

  bool done() const { return i >= toks.size(); }
  const Token& peek() const { return toks[i]; }

  [[noreturn]] void fail(const std::string& msg, std::size_t offset) const {
    ValueScanner sc(source);
    throw ParseError(msg, offset, sc.line_at(offset));
  }

  std::string expect_tag() {
    if (done()) fail("expected a tag", source.size());
    const Token& t = toks[i];
    if (t.kind != TokenKind::Tag)
      fail("expected a tag, found value '" + t.text + "'", t.offset);
    ++i;
    if (done() || toks[i].kind != TokenKind::Colon)
      fail("expected ':' after tag '" + t.text + "'",
           done() ? source.size() : toks[i].offset);
    ++i;
    return t.text;
  }

  Value expect_value(const std::string& tag) {
    if (done() || toks[i].kind != TokenKind::Value)
      fail("missing value after tag '" + tag + "'",
           done() ? source.size() : toks[i].offset);
    return toks[i++].value;
  }
};

inline bool is_identifier(const Value& v) {
  return v.is_text() || v.is_number();
}

}  // namespace detail_parse

// Parses every program in a source text. Steps occurring before any case tag
// form a single implicit case; mixing top-level steps with case tags in one
// program is a grammar violation.
inline std::vector<ProgramSpec> parse_programs(std::string_view source) {
  using detail_parse::Cursor;
  std::vector<Token> toks = tokenize(source);
  Cursor cur{toks, source};
  std::vector<ProgramSpec> programs;

  if (cur.done()) cur.fail("no programs in source", 0);

  while (!cur.done()) {
    std::size_t prog_offset = cur.peek().offset;
    std::string tag = cur.expect_tag();
    if (tag != "program")
      cur.fail("expected 'program' tag, found '" + tag + "'", prog_offset);
    ProgramSpec prog;
    prog.name = cur.expect_value(tag);
    if (!detail_parse::is_identifier(prog.name) ||
        (prog.name.is_text() && prog.name.text().empty()))
      cur.fail("program name must be a non-empty identifier", prog_offset);

    bool seen_case_tag = false;
    bool seen_step = false;
    std::vector<StepSpec> implicit_steps;
    std::optional<Value> pending_step_id;

    auto current_steps = [&]() -> std::vector<StepSpec>& {
      if (seen_case_tag) return prog.cases.back().steps;
      return implicit_steps;
    };

    while (!cur.done() && !(cur.peek().kind == TokenKind::Tag &&
                            cur.peek().text == "program")) {
      std::size_t at = cur.peek().offset;
      std::string t = cur.expect_tag();
      if (t == "use") {
        if (seen_case_tag || seen_step)
          cur.fail("'use' must precede cases and steps", at);
        if (!prog.uses.empty()) cur.fail("duplicate 'use' tag", at);
        Value v = cur.expect_value(t);
        auto add_use = [&](const Value& u) {
          if (!detail_parse::is_identifier(u))
            cur.fail("'use' expects a program name or list of names", at);
          prog.uses.push_back(u.is_text() ? u.text() : render_value(u));
        };
        if (v.is_list())
          for (const auto& u : v.items()) add_use(u);
        else
          add_use(v);
      } else if (t == "data") {
        if (seen_case_tag || seen_step)
          cur.fail("'data' must precede cases and steps", at);
        if (prog.data) cur.fail("duplicate 'data' tag", at);
        Value v = cur.expect_value(t);
        if (v.contains_unspecified())
          cur.fail("'data' value may not contain the wildcard", at);
        prog.data = std::move(v);
      } else if (t == "case") {
        if (pending_step_id)
          cur.fail("'step' tag without a following input/derive/output", at);
        if (seen_step && !seen_case_tag)
          cur.fail("cannot mix top-level steps with case tags", at);
        Value id = cur.expect_value(t);
        if (!detail_parse::is_identifier(id))
          cur.fail("case identifier must be a number or string", at);
        for (const auto& c : prog.cases)
          if (c.id && *c.id == id)
            cur.fail("duplicate case identifier " + render_value(id), at);
        seen_case_tag = true;
        prog.cases.push_back(CaseSpec{id, {}});
      } else if (t == "step") {
        Value id = cur.expect_value(t);
        if (!detail_parse::is_identifier(id))
          cur.fail("step identifier must be a number or string", at);
        if (pending_step_id) cur.fail("consecutive 'step' tags", at);
        pending_step_id = std::move(id);
      } else if (t == "input" || t == "derive" || t == "output") {
        Value v = cur.expect_value(t);
        StepSpec step;
        step.id = std::move(pending_step_id);
        pending_step_id.reset();
        step.kind = t == "input"    ? StepKind::Input
                    : t == "derive" ? StepKind::Derive
                                    : StepKind::Output;
        if (step.kind == StepKind::Derive && v.contains_unspecified())
          cur.fail("derive value may not contain the wildcard", at);
        step.value = std::move(v);
        current_steps().push_back(std::move(step));
        seen_step = true;
      } else {
        cur.fail("tag '" + t + "' not allowed here", at);
      }
    }
    if (pending_step_id)
      cur.fail("'step' tag without a following input/derive/output",
               source.size());
    if (seen_case_tag) {
      for (const auto& c : prog.cases)
        if (c.steps.empty())
          cur.fail("case " + (c.id ? render_value(*c.id) : "?") +
                       " has no steps",
                   prog_offset);
    } else if (!implicit_steps.empty()) {
      prog.implicit_case = true;
      prog.cases.push_back(CaseSpec{std::nullopt, std::move(implicit_steps)});
    }
    programs.push_back(std::move(prog));
  }
  return programs;
}

// ---------------------------------------------------------------------------
// Normalization.

enum class SpecClass { NullProgram, LiteralOutput, Sequence, General };

struct NormalizedCase {
  std::optional<Value> id;
  std::optional<Value> input;
  std::vector<Value> derives;
  std::vector<Value> outputs;
};

struct NormalizedSpec {
  Value name;
  std::vector<std::string> uses;
  std::optional<Value> data;
  SpecClass spec_class = SpecClass::NullProgram;
  std::vector<NormalizedCase> cases;

  std::string name_text() const {
    return name.is_text() ? name.text() : render_value(name);
  }
};

inline const char* spec_class_name(SpecClass c) {
  switch (c) {
    case SpecClass::NullProgram: return "null";
    case SpecClass::LiteralOutput: return "literal";
    case SpecClass::Sequence: return "sequence";
    case SpecClass::General: return "general";
  }
  return "?";
}

// Assigns the spec class and partitions each case's steps. Step ids are
// dropped here; they carry no execution semantics.
inline NormalizedSpec normalize_spec(const ProgramSpec& spec) {
  NormalizedSpec out;
  out.name = spec.name;
  out.uses = spec.uses;
  out.data = spec.data;
  if (spec.name.is_text() && spec.name.text().empty())
    throw SpecError("empty program name");

  for (const auto& c : spec.cases) {
    NormalizedCase nc;
    nc.id = c.id;
    bool seen_output = false;
    for (const auto& s : c.steps) {
      switch (s.kind) {
        case StepKind::Input:
          if (nc.input)
            throw SpecError("case " + (c.id ? render_value(*c.id) : "?") +
                            " has more than one input step");
          if (seen_output)
            throw SpecError("input step after output step");
          nc.input = s.value;
          break;
        case StepKind::Derive:
          if (seen_output)
            throw SpecError("derive step after output step");
          nc.derives.push_back(s.value);
          break;
        case StepKind::Output:
          nc.outputs.push_back(s.value);
          seen_output = true;
          break;
      }
    }
    out.cases.push_back(std::move(nc));
  }

  if (out.cases.empty()) {
    out.spec_class = SpecClass::NullProgram;
    return out;
  }

  if (out.cases.size() == 1) {
    const auto& c = out.cases[0];
    if (!c.input && c.derives.empty() && c.outputs.size() == 1) {
      out.spec_class = SpecClass::LiteralOutput;
      return out;
    }
    if (!c.input && c.derives.empty() && c.outputs.size() >= 2) {
      out.spec_class = SpecClass::Sequence;
      return out;
    }
  }

  out.spec_class = SpecClass::General;
  for (const auto& c : out.cases) {
    std::string label =
        "case " + (c.id ? render_value(*c.id) : "?");
    if (!c.input) {
      if (!c.derives.empty())
        throw SpecError(label + ": derive steps require an input step");
      throw SpecError(label + ": missing input step");
    }
    if (c.outputs.empty()) throw SpecError(label + ": missing output step");
    if (c.outputs.size() >= 2)
      throw SpecError(label + ": multiple outputs with an input");
  }
  return out;
}

}  // namespace zoea
