#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <regex>
#include <set>

#include "test_support.hpp"
#include "zoea/vm.hpp"

using namespace zoea;

namespace {

CompiledProgram median_program() {
  DagBuilder b;
  int in = b.input({});
  int out = b.apply("median", {in});
  return b.build(out);
}

CompiledProgram factorial_program() {
  // base f(0)=1, step mul(index, previous)
  DagBuilder b;
  int in = b.input({});
  int idx = b.apply("nth", {in, b.literal(Value(0))});
  int prev = b.apply("nth", {in, b.literal(Value(1))});
  int out = b.apply("mul", {idx, prev});
  return CompiledProgram::recurrence({{0, Value(1)}}, b.build(out));
}

}  // namespace

TEST_CASE("catalog is well formed") {
  auto cat = catalog();
  std::set<std::string> names;
  bool has_median = false, has_regex = false, has_date = false;
  for (const auto& d : cat) {
    CHECK(names.insert(d.name).second);
    CHECK(d.arity == static_cast<int>(d.signature.size()));
    CHECK(d.cost > 0);
    has_median = has_median || d.name == "median";
    has_regex = has_regex || d.name == "regex_extract_all";
    has_date = has_date || d.name == "reformat_date";
  }
  CHECK(has_median);
  CHECK(has_regex);
  CHECK(has_date);
  const Instruction* med = find_instruction("median");
  REQUIRE(med != nullptr);
  CHECK(med->desc.signature[0] == TypeClass::List);
  CHECK(med->desc.result == TypeClass::Number);
}

TEST_CASE("apply_instruction basics") {
  ExecutionEnv env;
  CHECK(apply_instruction("sort", {parse_value("[3,5,6]")}, {}, env) ==
        parse_value("[3,5,6]"));
  CHECK(apply_instruction("median", {parse_value("[2,4,5,8]")}, {}, env) ==
        Value(4.5));
  CHECK(apply_instruction("reverse", {parse_value("[]")}, {}, env) ==
        parse_value("[]"));
  CHECK(apply_instruction("div", {Value(1), Value(2)}, {}, env) == Value(0.5));
  CHECK(apply_instruction("titlecase", {Value("how now")}, {}, env) ==
        Value("How Now"));
  CHECK(apply_instruction("contains_ci",
                          {parse_value("[monday,tuesday]"), Value("MONDAY")},
                          {}, env) == Value(true));
  CHECK(apply_instruction("template_fill",
                          {parse_value("[4,\" words\"]")}, {}, env) ==
        Value("4 words"));
  CHECK(apply_instruction("reformat_date",
                          {Value("07/24/79"), Value("MM/DD/YY"),
                           Value("DD-MM-YYYY")},
                          {}, env) == Value("24-07-1979"));
  CHECK_THROWS_AS(apply_instruction("div", {Value(1), Value(0)}, {}, env),
                  ExecError);
  CHECK_THROWS_AS(apply_instruction("median", {Value("nope")}, {}, env),
                  ExecError);
}

TEST_CASE("regex extraction matches a reference engine run") {
  // Reference: run std::regex directly over the input.
  const std::string input = "xyz21-07-1969abc123pqr22.7";
  const std::string pattern = "\\d{2}-\\d{2}-\\d{4}";
  std::regex re(pattern);
  std::vector<std::string> expected;
  for (auto it = std::sregex_iterator(input.begin(), input.end(), re);
       it != std::sregex_iterator(); ++it)
    expected.push_back(it->str());
  REQUIRE(expected == std::vector<std::string>{"21-07-1969"});

  ExecutionEnv env;
  Value got = apply_instruction("regex_extract_all",
                                {Value(input), Value(pattern)}, {}, env);
  REQUIRE(got.is_list());
  REQUIRE(got.items().size() == 1);
  CHECK(got.items()[0] == Value("21-07-1969"));
}

TEST_CASE("higher-order instructions run fragments per element") {
  // fragment: eq(nth(element, 1), "female")
  DagBuilder fb;
  int e = fb.input({});
  int snd = fb.apply("nth", {e, fb.literal(Value(1))});
  int pred = fb.apply("eq", {snd, fb.literal(Value("female"))});
  CompiledProgram frag = fb.build(pred);

  ExecutionEnv env;
  Value people = parse_value("[[fred, male],[wilma, female]]");
  Value got = apply_instruction("filter", {people}, {frag}, env);
  CHECK(got == parse_value("[[wilma, female]]"));

  DagBuilder mb;
  int x = mb.input({});
  int up = mb.apply("titlecase", {x});
  Value mapped = apply_instruction(
      "map", {parse_value("[how,now,brown,cow]")}, {mb.build(up)}, env);
  CHECK(mapped == parse_value("['How','Now','Brown','Cow']"));
}

TEST_CASE("execute direct programs") {
  ExecutionEnv env;
  CompiledProgram med = median_program();
  CHECK(execute(med, parse_value("[1,2,4,6,9]"), env) == Value(4));
  CHECK(execute(med, parse_value("[3,5,6]"), env) == Value(5));
  CHECK(execute(CompiledProgram::null_program(), Value("anything"), env) ==
        Value::null());
}

TEST_CASE("execute recurrence programs") {
  ExecutionEnv env;
  CompiledProgram fact = factorial_program();
  // Hand computation: f(5) = 120.
  CHECK(execute(fact, Value(5), env) == parse_value("[5,120]"));
  CHECK(execute(fact, Value(0), env) == parse_value("[0,1]"));
  CHECK(execute(fact, Value(3), env) == parse_value("[3,6]"));
  CHECK_THROWS_AS(execute(fact, Value(-1), env), ExecError);
  CHECK_THROWS_AS(execute(fact, Value("five"), env), ExecError);
}

TEST_CASE("execute conditionals") {
  // eq(length(input), 0) -> "empty" else head(input)
  DagBuilder gb;
  int gi = gb.input({});
  int glen = gb.apply("length", {gi});
  int guard = gb.apply("eq", {glen, gb.literal(Value(0))});
  DagBuilder bb;
  int body = bb.apply("head", {bb.input({})});
  CompiledProgram cond = CompiledProgram::conditional(
      {{gb.build(guard), literal_program(Value("empty"))}},
      bb.build(body));
  ExecutionEnv env;
  CHECK(execute(cond, parse_value("[]"), env) == Value("empty"));
  CHECK(execute(cond, parse_value("[1]"), env) == Value(1));

  CompiledProgram no_default = CompiledProgram::conditional(
      {{gb.build(guard), literal_program(Value("empty"))}}, std::nullopt);
  auto out = try_execute(no_default, parse_value("[1,2]"), env);
  REQUIRE_FALSE(out.ok());
  CHECK(out.error.find("unmatched input") != std::string::npos);
}

TEST_CASE("execution is pure and fuel bounded") {
  ExecutionEnv env;
  CompiledProgram med = median_program();
  Value in = parse_value("[2,4,5,8]");
  CHECK(execute(med, in, env) == execute(med, in, env));

  ExecutionEnv tiny;
  tiny.fuel = 2;
  CompiledProgram fact = factorial_program();
  auto out = try_execute(fact, Value(50), tiny);
  REQUIRE_FALSE(out.ok());
  CHECK(out.error.find("budget") != std::string::npos);
}

TEST_CASE("data references and calls") {
  DagBuilder b;
  int d = b.data({});
  int in = b.input({});
  int got = b.apply("contains_ci", {d, in});
  CompiledProgram p = b.build(got);

  Value days = parse_value("[monday,tuesday]");
  ExecutionEnv env;
  env.data = &days;
  CHECK(execute(p, Value("TUESDAY"), env) == Value(true));
  CHECK(execute(p, Value("banana"), env) == Value(false));

  ExecutionEnv nodata;
  auto out = try_execute(p, Value("x"), nodata);
  REQUIRE_FALSE(out.ok());

  // call: price = add(input, sales_tax(input))
  struct MapResolver : ProgramResolver {
    std::map<std::string, CompiledProgram> programs;
    const CompiledProgram* find(const std::string& name) const override {
      auto it = programs.find(name);
      return it == programs.end() ? nullptr : &it->second;
    }
  };
  MapResolver resolver;
  DagBuilder tax;
  int ti = tax.input({});
  int rate = tax.literal(Value(0.175));
  resolver.programs.emplace("sales_tax", tax.build(tax.apply("mul", {ti, rate})));

  DagBuilder price;
  int pi = price.input({});
  int call = price.call("sales_tax", pi);
  CompiledProgram pp = price.build(price.apply("add", {pi, call}));
  ExecutionEnv cenv;
  cenv.programs = &resolver;
  CHECK(execute(pp, Value(1000), cenv) == Value(1175));

  ExecutionEnv lost;
  auto miss = try_execute(pp, Value(1000), lost);
  REQUIRE_FALSE(miss.ok());
  CHECK(miss.error.find("sales_tax") != std::string::npos);
}

TEST_CASE("program_size counts instruction nodes") {
  CHECK(program_size(CompiledProgram::null_program()) == 0);
  CHECK(program_size(median_program()) == 1);

  // Conditional with 2 guards of one node and 2 bodies of two nodes -> 6.
  auto one_node_guard = [] {
    DagBuilder b;
    int i = b.input({});
    return b.build(b.apply("eq", {i, b.literal(Value(0))}));
  };
  auto two_node_body = [] {
    DagBuilder b;
    int i = b.input({});
    return b.build(b.apply("add", {b.apply("mul", {i, i}), i}));
  };
  CompiledProgram cond = CompiledProgram::conditional(
      {{one_node_guard(), two_node_body()}, {one_node_guard(), two_node_body()}},
      std::nullopt);
  CHECK(program_size(cond) == 6);

  CHECK(program_size(literal_program(Value("x"))) == 0);
  CHECK(program_size(factorial_program()) == 4);  // 3 step nodes + iteration
}

TEST_CASE("canonical form is order independent and parseable") {
  // Same DAG assembled in two different node orders.
  DagBuilder a;
  int a_in = a.input({});
  int a_one = a.literal(Value(1));
  int a_sum = a.apply("add", {a_in, a_one});
  int a_prod = a.apply("mul", {a_sum, a_in});
  CompiledProgram pa = a.build(a_prod);

  std::vector<DagNode> nodes;
  DagNode n_one;
  n_one.kind = DagNode::Kind::Literal;
  n_one.literal = Value(1);
  DagNode n_in;
  n_in.kind = DagNode::Kind::InputRef;
  DagNode n_sum;
  n_sum.kind = DagNode::Kind::Apply;
  n_sum.name = "add";
  n_sum.operands = {1, 0};
  DagNode n_prod;
  n_prod.kind = DagNode::Kind::Apply;
  n_prod.name = "mul";
  n_prod.operands = {2, 1};
  nodes.push_back(n_one);
  nodes.push_back(n_in);
  nodes.push_back(n_sum);
  nodes.push_back(n_prod);
  CompiledProgram pb = CompiledProgram::direct(std::move(nodes), 3);

  CHECK(canonical_form(pa) == canonical_form(pb));
  CHECK(pa == pb);

  CHECK(canonical_form(CompiledProgram::null_program()) == "(null)");
  std::string hello = canonical_form(literal_program(Value("hello world")));
  CHECK(hello.find("\"hello world\"") != std::string::npos);

  // Round trips through the canonical text parser.
  for (const CompiledProgram& p :
       {pa, factorial_program(), literal_program(parse_value("[1,{a:2}]"))}) {
    CompiledProgram back = parse_canonical_program(canonical_form(p));
    CHECK(canonical_form(back) == canonical_form(p));
  }

  // Conditional with fragments round trips too.
  DagBuilder fb;
  int e = fb.input({});
  CompiledProgram frag = fb.build(fb.apply("titlecase", {e}));
  DagBuilder mb;
  int li = mb.input({});
  CompiledProgram mapped = mb.build(mb.apply("map", {li}, {frag}));
  CompiledProgram cond = CompiledProgram::conditional(
      {{literal_program(Value(true)), mapped}}, literal_program(Value(0)));
  CompiledProgram back = parse_canonical_program(canonical_form(cond));
  CHECK(canonical_form(back) == canonical_form(cond));

  ExecutionEnv env;
  CHECK(execute(back, parse_value("[a,b]"), env) == parse_value("['A','B']"));
}

TEST_CASE("unreachable nodes do not affect canonical form or size") {
  std::vector<DagNode> nodes;
  DagNode n_in;
  n_in.kind = DagNode::Kind::InputRef;
  DagNode junk;
  junk.kind = DagNode::Kind::Literal;
  junk.literal = Value("junk");
  DagNode med;
  med.kind = DagNode::Kind::Apply;
  med.name = "median";
  med.operands = {0};
  nodes.push_back(n_in);
  nodes.push_back(junk);
  nodes.push_back(med);
  CompiledProgram with_junk = CompiledProgram::direct(std::move(nodes), 2);
  CHECK(canonical_form(with_junk) == canonical_form(median_program()));
  CHECK(program_size(with_junk) == 1);
}
