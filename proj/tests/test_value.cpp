#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"
#include "zoea/value.hpp"

using namespace zoea;
using testsup::Rng;

TEST_CASE("parse_value handles the JSON superset") {
  Value v = parse_value("[3,5,6]");
  REQUIRE(v.is_list());
  REQUIRE(v.items().size() == 3);
  CHECK(v.items()[0] == Value(3));
  CHECK(v.items()[2] == Value(6));

  CHECK(parse_value("_").is_unspecified());
  Value q = parse_value("\"_\"");
  REQUIRE(q.is_text());
  CHECK(q.text() == "_");

  Value rec = parse_value(
      "{ \"name\": \"John Smith\", \"date\": \"24-07-1979\" }");
  REQUIRE(rec.is_record());
  REQUIRE(rec.field("name") != nullptr);
  CHECK(rec.field("name")->text() == "John Smith");
  CHECK(rec.field("date")->text() == "24-07-1979");

  Value bare = parse_value("banana");
  REQUIRE(bare.is_text());
  CHECK(bare.text() == "banana");

  CHECK(parse_value("true") == Value(true));
  CHECK(parse_value("'single'").text() == "single");
  CHECK(parse_value("-42") == Value(-42));
  CHECK(parse_value("4.5") == Value(4.5));
  CHECK(parse_value("24-07-1979").is_text());  // not a number
  CHECK(parse_value("1e3") == Value(1000.0));
  CHECK(parse_value("null").is_null());
}

TEST_CASE("parse_value rejects malformed input") {
  CHECK_THROWS_AS(parse_value("[1,2"), ParseError);
  CHECK_THROWS_AS(parse_value("\"abc"), ParseError);
  CHECK_THROWS_AS(parse_value("[1] junk"), ParseError);
  CHECK_THROWS_AS(parse_value("   "), ParseError);
  CHECK_THROWS_AS(parse_value("{a:1, a:2}"), ParseError);
  CHECK_THROWS_AS(parse_value("[1,]"), ParseError);
}

TEST_CASE("render_value produces canonical text") {
  CHECK(render_value(Value::list({Value(1), Value(2)})) == "[1,2]");
  CHECK(render_value(Value("a b")) == "\"a b\"");
  CHECK(render_value(Value(4.5)) == "4.5");
  CHECK(render_value(Value(4.0)) == "4");  // equal values, equal texts
  CHECK(render_value(Value::null()) == "null");
  CHECK(render_value(Value::unspecified()) == "_");
  CHECK(render_value(Value("x\"y\n")) == "\"x\\\"y\\n\"");
  // Record keys render sorted; key order is not significant.
  Value r1 = Value::record({{"b", Value(2)}, {"a", Value(1)}});
  Value r2 = Value::record({{"a", Value(1)}, {"b", Value(2)}});
  CHECK(render_value(r1) == render_value(r2));
  CHECK(r1 == r2);
}

TEST_CASE("resolve_path descends by index and key") {
  Value lst = parse_value("[7,3,11,15,6]");
  CHECK(resolve_path(lst, {PathStep{std::int64_t(2)}}) == Value(11));
  Value anything = parse_value("{x: [1,2]}");
  CHECK(resolve_path(anything, {}) == anything);
  Value rec = parse_value("{name: \"John Smith\"}");
  CHECK(resolve_path(rec, {PathStep{std::string("name")}}) ==
        Value("John Smith"));

  CHECK_THROWS_AS(resolve_path(lst, {PathStep{std::int64_t(9)}}), PathError);
  CHECK_THROWS_AS(resolve_path(lst, {PathStep{std::string("k")}}), PathError);
  CHECK_THROWS_AS(resolve_path(rec, {PathStep{std::string("zz")}}), PathError);
}

TEST_CASE("enumerate_elements yields a pre-order traversal") {
  Value v = parse_value("[2,1]");
  auto elems = enumerate_elements(v);
  REQUIRE(elems.size() == 3);
  CHECK(elems[0].first.empty());
  CHECK(elems[0].second == v);
  CHECK(elems[1].second == Value(2));
  CHECK(elems[2].second == Value(1));

  auto scalar = enumerate_elements(Value(5));
  REQUIRE(scalar.size() == 1);
  CHECK(scalar[0].second == Value(5));

  // Hand-expanded pre-order for {a: [1]}: root, [a], [a,0].
  Value rec = parse_value("{a: [1]}");
  auto re = enumerate_elements(rec);
  REQUIRE(re.size() == 3);
  CHECK(re[0].first == Path{});
  CHECK(re[1].first == Path{PathStep{std::string("a")}});
  CHECK(re[2].first ==
        Path{PathStep{std::string("a")}, PathStep{std::int64_t(0)}});
  CHECK(re[2].second == Value(1));
}

TEST_CASE("matches_with_wildcards") {
  CHECK(matches_with_wildcards(Value::unspecified(), parse_value("[1,[2]]")));
  CHECK(matches_with_wildcards(parse_value("[1,_,3]"), parse_value("[1,99,3]")));
  CHECK_FALSE(
      matches_with_wildcards(parse_value("[1,_]"), parse_value("[1,2,3]")));
  CHECK(matches_with_wildcards(Value(4), Value(4.0)));
  CHECK(matches_with_wildcards(parse_value("{a:_,b:2}"),
                               parse_value("{b:2,a:[5]}")));
  CHECK_FALSE(matches_with_wildcards(parse_value("{a:_}"),
                                     parse_value("{a:1,b:2}")));
}

TEST_CASE("round-trip property and canonical-text equality") {
  Rng rng(20240517);
  for (int iter = 0; iter < 400; ++iter) {
    Value v = testsup::random_value(rng, 5, false);
    CAPTURE(render_value(v));
    CHECK(parse_value(render_value(v)) == v);

    Value w = testsup::random_value(rng, 3, false);
    bool text_eq = render_value(v) == render_value(w);
    bool struct_eq = v == w;
    CHECK(text_eq == struct_eq);
  }
  // Numeric unification: 4 and 4.0 are one value in text and structure.
  CHECK(render_value(Value(4)) == render_value(Value(4.0)));
}

TEST_CASE("enumerate_elements agrees with resolve_path and node counts") {
  Rng rng(987);
  for (int iter = 0; iter < 200; ++iter) {
    Value v = testsup::random_value(rng, 4, false);
    auto elems = enumerate_elements(v);
    CHECK(elems.size() == testsup::oracle_node_count(v));
    for (const auto& [p, e] : elems) CHECK(resolve_path(v, p) == e);
  }
}

TEST_CASE("wildcard matching is reflexive and monotone") {
  Rng rng(555);
  for (int iter = 0; iter < 300; ++iter) {
    Value v = testsup::random_value(rng, 4, false);
    CHECK(matches_with_wildcards(v, v));

    // Replacing any subtree of the expectation with the wildcard never turns
    // a match into a non-match.
    std::size_t count = testsup::oracle_node_count(v);
    std::size_t at = static_cast<std::size_t>(
        testsup::pick(rng, 0, static_cast<int>(count) - 1));
    std::size_t idx = at;
    auto [loosened, hit] = testsup::replace_node_with_wildcard(v, idx);
    REQUIRE(hit);
    CHECK(matches_with_wildcards(loosened, v));
  }
}

TEST_CASE("matcher agrees with the reference oracle") {
  Rng rng(31337);
  for (int iter = 0; iter < 500; ++iter) {
    Value expected = testsup::random_value(rng, 3, true);
    Value actual = testsup::random_value(rng, 3, false);
    CHECK(matches_with_wildcards(expected, actual) ==
          testsup::oracle_matches(expected, actual));
  }
}
