#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "zoea/registry.hpp"

using namespace zoea;

namespace {

std::filesystem::path fresh_root(const char* tag) {
  auto root = std::filesystem::temp_directory_path() /
              (std::string("zoea-registry-test-") + tag);
  std::filesystem::remove_all(root);
  return root;
}

CompiledProgram tax_program() {
  DagBuilder b;
  int in = b.input({});
  return b.build(b.apply("mul", {in, b.literal(Value(0.175))}));
}

RegistryEntry tax_entry() {
  RegistryEntry e;
  e.name = "sales_tax";
  e.compiled = tax_program();
  e.input_class = TypeClass::Number;
  e.output_class = TypeClass::Number;
  e.source_digest = source_digest("program: sales_tax ...");
  return e;
}

}  // namespace

TEST_CASE("store/load round-trips canonical text byte for byte") {
  Registry reg(fresh_root("roundtrip"));
  reg.store(tax_entry());
  RegistryEntry back = reg.load("sales_tax");
  CHECK(canonical_form(back.compiled) == canonical_form(tax_program()));
  CHECK(back.input_class == TypeClass::Number);
  CHECK(back.output_class == TypeClass::Number);
  CHECK(back.source_digest == source_digest("program: sales_tax ..."));

  ExecutionEnv env;
  CHECK(execute(back.compiled, Value(2000), env) == Value(350));
}

TEST_CASE("storing a name twice overwrites with one listing") {
  Registry reg(fresh_root("overwrite"));
  reg.store(tax_entry());
  RegistryEntry changed = tax_entry();
  DagBuilder b;
  int in = b.input({});
  changed.compiled = b.build(b.apply("mul", {in, b.literal(Value(0.2))}));
  reg.store(changed);
  auto names = reg.list();
  REQUIRE(names == std::vector<std::string>{"sales_tax"});
  CHECK(canonical_form(reg.load("sales_tax").compiled) ==
        canonical_form(changed.compiled));
}

TEST_CASE("dangling composition is rejected at store time") {
  Registry reg(fresh_root("dangling"));
  DagBuilder b;
  int in = b.input({});
  int call = b.call("sales_tax", in);
  RegistryEntry e;
  e.name = "price_including_tax";
  e.compiled = b.build(b.apply("add", {in, call}));
  CHECK_THROWS_WITH(reg.store(e), Catch::Matchers::ContainsSubstring(
                                      "dangling composition"));

  reg.store(tax_entry());
  reg.store(e);  // now fine
  RegistryEntry back = reg.load("price_including_tax");
  ExecutionEnv env;
  env.programs = &reg;
  CHECK(execute(back.compiled, Value(1000), env) == Value(1175));
}

TEST_CASE("load of an unknown name fails") {
  Registry reg(fresh_root("missing"));
  CHECK_THROWS_AS(reg.load("unknown"), NotFoundError);
  CHECK(reg.find("unknown") == nullptr);
}

TEST_CASE("resolve_uses builds callable descriptors") {
  Registry reg(fresh_root("uses"));
  reg.store(tax_entry());

  NormalizedSpec spec;
  spec.name = Value("price_including_tax");
  spec.uses = {"sales_tax"};
  auto descs = reg.resolve_uses(spec);
  REQUIRE(descs.size() == 1);
  CHECK(descs[0].name == "sales_tax");
  CHECK(descs[0].input_class == TypeClass::Number);
  CHECK(descs[0].output_class == TypeClass::Number);

  NormalizedSpec none;
  none.name = Value("standalone");
  CHECK(reg.resolve_uses(none).empty());

  NormalizedSpec broken;
  broken.name = Value("p");
  broken.uses = {"sales_tax", "b"};
  CHECK_THROWS_WITH(reg.resolve_uses(broken),
                    Catch::Matchers::ContainsSubstring("'b'"));
}

TEST_CASE("names with awkward characters are encoded") {
  Registry reg(fresh_root("encode"));
  RegistryEntry e = tax_entry();
  e.name = "weird name/100%";
  reg.store(e);
  CHECK(reg.exists("weird name/100%"));
  CHECK(reg.list() == std::vector<std::string>{"weird name/100%"});
  CHECK(canonical_form(reg.load("weird name/100%").compiled) ==
        canonical_form(tax_program()));
}
