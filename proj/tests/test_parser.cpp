#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "zoea/parser.hpp"

using namespace zoea;

namespace {

const char* kMedianSrc = R"(
program: median
case: 1 input: [3,5,6] output: 5
case: 2 input: [1,2,4,6,9] output: 4
case: 3 input: [2,4,5,8] output: 4.5
)";

const char* kWeekDaySrc = R"(
program: is_week_day
  data: [monday,tuesday,wednesday,
        thursday,friday,
        saturday,sunday]
  case:1 input: thursday output: true
  case:2 input: 'MONDAY' output: true
  case:3 input: banana output: false
  case:4 input: '' output: false
)";

const char* kTaxSrc = R"(
program: sales_tax
  case: 1
    input: 1000
    output: 175
  case: 2
    input: 2000
    output: 350

program: price_including_tax
  use: sales_tax
  input: 1000
  output: 1175
)";

bool steps_equal(const std::vector<StepSpec>& a,
                 const std::vector<StepSpec>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind) return false;
    if (a[i].value != b[i].value) return false;
    if (a[i].id.has_value() != b[i].id.has_value()) return false;
    if (a[i].id && *a[i].id != *b[i].id) return false;
  }
  return true;
}

bool specs_equal(const ProgramSpec& a, const ProgramSpec& b) {
  if (a.name != b.name || a.uses != b.uses) return false;
  if (a.data.has_value() != b.data.has_value()) return false;
  if (a.data && *a.data != *b.data) return false;
  if (a.cases.size() != b.cases.size()) return false;
  for (std::size_t i = 0; i < a.cases.size(); ++i) {
    if (a.cases[i].id.has_value() != b.cases[i].id.has_value()) return false;
    if (a.cases[i].id && *a.cases[i].id != *b.cases[i].id) return false;
    if (!steps_equal(a.cases[i].steps, b.cases[i].steps)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("tokenize splits tags, colons and values") {
  auto toks = tokenize("case:1 input: thursday output: true");
  REQUIRE(toks.size() == 9);
  CHECK(toks[0].kind == TokenKind::Tag);
  CHECK(toks[0].text == "case");
  CHECK(toks[1].kind == TokenKind::Colon);
  CHECK(toks[2].value == Value(1));
  CHECK(toks[3].text == "input");
  CHECK(toks[5].value == Value("thursday"));
  CHECK(toks[8].value == Value(true));

  auto two = tokenize("program: do_nothing");
  REQUIRE(two.size() == 3);
  CHECK(two[2].value == Value("do_nothing"));

  auto multi = tokenize("output:\n  \"hello world\"");
  REQUIRE(multi.size() == 3);
  CHECK(multi[2].value == Value("hello world"));

  CHECK_THROWS_AS(tokenize("output: \"unterminated"), ParseError);
  CHECK_THROWS_AS(tokenize("bogus: 1"), ParseError);
}

TEST_CASE("parse_programs on the simplest programs") {
  auto progs = parse_programs("program: do_nothing");
  REQUIRE(progs.size() == 1);
  CHECK(progs[0].name == Value("do_nothing"));
  CHECK(progs[0].cases.empty());

  auto hello = parse_programs("program: say_hello\n output: \"hello world\"");
  REQUIRE(hello.size() == 1);
  REQUIRE(hello[0].cases.size() == 1);
  CHECK(hello[0].implicit_case);
  REQUIRE(hello[0].cases[0].steps.size() == 1);
  CHECK(hello[0].cases[0].steps[0].kind == StepKind::Output);
  CHECK(hello[0].cases[0].steps[0].value == Value("hello world"));
}

TEST_CASE("parse_programs on a multi-case program") {
  auto progs = parse_programs(kMedianSrc);
  REQUIRE(progs.size() == 1);
  const auto& p = progs[0];
  CHECK(p.name == Value("median"));
  REQUIRE(p.cases.size() == 3);
  CHECK(*p.cases[0].id == Value(1));
  CHECK(*p.cases[1].id == Value(2));
  CHECK(*p.cases[2].id == Value(3));
  REQUIRE(p.cases[2].steps.size() == 2);
  CHECK(p.cases[2].steps[1].value == Value(4.5));
}

TEST_CASE("parse_programs on a multi-program file with use") {
  auto progs = parse_programs(kTaxSrc);
  REQUIRE(progs.size() == 2);
  CHECK(progs[0].name == Value("sales_tax"));
  CHECK(progs[0].uses.empty());
  CHECK(progs[1].name == Value("price_including_tax"));
  REQUIRE(progs[1].uses.size() == 1);
  CHECK(progs[1].uses[0] == "sales_tax");
  REQUIRE(progs[1].cases.size() == 1);
}

TEST_CASE("parse_programs carries data and step ids") {
  auto progs = parse_programs(kWeekDaySrc);
  REQUIRE(progs.size() == 1);
  REQUIRE(progs[0].data.has_value());
  CHECK(progs[0].data->items().size() == 7);
  REQUIRE(progs[0].cases.size() == 4);
  CHECK(progs[0].cases[1].steps[0].value == Value("MONDAY"));
  CHECK(progs[0].cases[3].steps[0].value == Value(""));

  auto with_step = parse_programs(
      "program: p step: s1 input: 1 step: s2 output: 2");
  REQUIRE(with_step.size() == 1);
  REQUIRE(with_step[0].cases.size() == 1);
  CHECK(*with_step[0].cases[0].steps[0].id == Value("s1"));
  CHECK(*with_step[0].cases[0].steps[1].id == Value("s2"));
}

TEST_CASE("parse_programs rejects grammar violations") {
  // duplicate case identifier
  CHECK_THROWS_AS(
      parse_programs("program: p case: 1 input: 1 output: 2 case: 1 input: 2 output: 3"),
      ParseError);
  // missing value after a tag
  CHECK_THROWS_AS(parse_programs("program: p input: output: 2"), ParseError);
  // use after cases/steps began
  CHECK_THROWS_AS(parse_programs("program: p input: 1 use: other output: 2"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_programs("program: p case: 1 input: 1 output: 2 data: [1]"),
      ParseError);
  // mixed top-level steps and case tags
  CHECK_THROWS_AS(
      parse_programs("program: p input: 1 output: 2 case: 2 input: 3 output: 4"),
      ParseError);
  // unknown tag
  CHECK_THROWS_AS(parse_programs("program: p shazam: 1"), ParseError);
  // case with no steps
  CHECK_THROWS_AS(parse_programs("program: p case: 1"), ParseError);
  // empty program name
  CHECK_THROWS_AS(parse_programs("program: '' input: 1 output: 1"),
                  ParseError);
}

TEST_CASE("layout invariance") {
  // Permute whitespace runs outside quotes; parses must be identical.
  auto base = parse_programs(kWeekDaySrc);
  std::string src(kWeekDaySrc);
  const char* fills[] = {" ", "\n", "\t", "  \n\t ", "\n\n", " \t"};
  for (int variant = 0; variant < 20; ++variant) {
    std::string mutated;
    bool in_quote = false;
    char quote = 0;
    int run = 0;
    for (char c : src) {
      if (in_quote) {
        mutated += c;
        if (c == quote) in_quote = false;
        continue;
      }
      if (c == '"' || c == '\'') {
        in_quote = true;
        quote = c;
        mutated += c;
        continue;
      }
      if (c == ' ' || c == '\n' || c == '\t') {
        ++run;
        mutated += fills[(variant + run) % 6];
        continue;
      }
      mutated += c;
    }
    auto parsed = parse_programs(mutated);
    REQUIRE(parsed.size() == base.size());
    CHECK(specs_equal(parsed[0], base[0]));
  }
}

TEST_CASE("normalize_spec classifies programs") {
  auto null_spec = normalize_spec(parse_programs("program: do_nothing")[0]);
  CHECK(null_spec.spec_class == SpecClass::NullProgram);

  auto lit = normalize_spec(
      parse_programs("program: say_hello output: \"hello world\"")[0]);
  CHECK(lit.spec_class == SpecClass::LiteralOutput);
  REQUIRE(lit.cases.size() == 1);
  CHECK(lit.cases[0].outputs[0] == Value("hello world"));

  auto seq = normalize_spec(parse_programs(
      "program: factorial output: [0,1] output: [1,1] output: [2,2] output: [3,6]")[0]);
  CHECK(seq.spec_class == SpecClass::Sequence);
  REQUIRE(seq.cases.size() == 1);
  CHECK(seq.cases[0].outputs.size() == 4);

  auto gen = normalize_spec(parse_programs(
      "program: ini_caps input: 'how now brown cow' derive: [how, now, brown, cow] "
      "derive: ['How', 'Now', 'Brown', 'Cow'] output: 'How Now Brown Cow'")[0]);
  CHECK(gen.spec_class == SpecClass::General);
  REQUIRE(gen.cases.size() == 1);
  CHECK(gen.cases[0].derives.size() == 2);
  CHECK(gen.cases[0].derives[0] == parse_value("[how, now, brown, cow]"));
}

TEST_CASE("normalize_spec rejects invalid cases") {
  CHECK_THROWS_AS(normalize_spec(parse_programs(
                      "program: p input: 1 input: 2 output: 3")[0]),
                  SpecError);
  CHECK_THROWS_AS(normalize_spec(parse_programs(
                      "program: p input: 1 output: 2 output: 3")[0]),
                  SpecError);
  CHECK_THROWS_AS(normalize_spec(parse_programs(
                      "program: p input: 1 output: 2 derive: 3")[0]),
                  SpecError);
  CHECK_THROWS_AS(
      normalize_spec(parse_programs("program: p case: 1 output: 2 case: 2 "
                                    "input: 1 output: 2")[0]),
      SpecError);
  CHECK_THROWS_AS(normalize_spec(parse_programs(
                      "program: p derive: 1 output: 2")[0]),
                  SpecError);
}

TEST_CASE("case order does not affect normalization semantics") {
  auto a = normalize_spec(parse_programs(kMedianSrc)[0]);
  auto reordered = parse_programs(
      "program: median\n"
      "case: 3 input: [2,4,5,8] output: 4.5\n"
      "case: 1 input: [3,5,6] output: 5\n"
      "case: 2 input: [1,2,4,6,9] output: 4\n");
  auto b = normalize_spec(reordered[0]);
  REQUIRE(a.cases.size() == b.cases.size());
  CHECK(a.spec_class == b.spec_class);
  for (const auto& ca : a.cases) {
    bool found = false;
    for (const auto& cb : b.cases)
      if (ca.id && cb.id && *ca.id == *cb.id && *ca.input == *cb.input &&
          ca.outputs == cb.outputs)
        found = true;
    CHECK(found);
  }
}
