#include <doctest.h>

#include <string>

#include "vgdial/program.hpp"

using namespace vgdial;

namespace {

Program sample_program() {
  Program p;
  p.nodes.push_back({"scene", {}, {}});
  p.nodes.push_back({"filter_color", {0}, {std::string("red")}});
  p.nodes.push_back({"unique", {1}, {}});
  p.nodes.push_back({"find_interval", {2}, {std::string("sliding"), 2}});
  p.nodes.push_back({"count_action", {3, 2}, {std::string("flying")}});
  return p;
}

}  // namespace

TEST_CASE("print emits the fixture line format") {
  CHECK(print_program(sample_program()) ==
        "#0: scene\n"
        "#1: filter_color[red](#0)\n"
        "#2: unique(#1)\n"
        "#3: find_interval[sliding,2](#2)\n"
        "#4: count_action[flying](#3, #2)\n");
}

TEST_CASE("parse accepts exactly what print emits") {
  Program p = sample_program();
  CHECK(parse_program(print_program(p)) == p);

  // whitespace and blank lines are tolerated
  Program q = parse_program("  #0: scene  \n\n  #1: count_object(#0)\n");
  REQUIRE(q.nodes.size() == 2);
  CHECK(q.nodes[1].module == "count_object");
  CHECK(q.nodes[1].inputs == std::vector<int>{0});
}

TEST_CASE("numeric side literals parse as ints") {
  Program p = parse_program("#0: scene\n#1: unique(#0)\n#2: find_interval[sliding,2](#1)\n");
  REQUIRE(p.nodes[2].side.size() == 2);
  CHECK(std::holds_alternative<std::string>(p.nodes[2].side[0]));
  CHECK(std::get<int>(p.nodes[2].side[1]) == 2);

  // the text form cannot tell "2" from 2, so a string spelling collapses
  Program spelled;
  spelled.nodes.push_back({"scene", {}, {}});
  spelled.nodes.push_back({"unique", {0}, {}});
  spelled.nodes.push_back({"find_interval", {1}, {std::string("sliding"), std::string("2")}});
  CHECK(print_program(spelled) == print_program(p));
  CHECK(parse_program(print_program(spelled)) == p);
}

TEST_CASE("json serialization roundtrips") {
  Program p = sample_program();
  CHECK(program_from_json(program_to_json(p)) == p);
  CHECK(program_to_json(program_from_json(program_to_json(p))) == program_to_json(p));
}

TEST_CASE("well-formedness rejects bad wiring") {
  Program empty;
  CHECK_FALSE(program_well_formed(empty));

  Program fwd;
  fwd.nodes.push_back({"scene", {}, {}});
  fwd.nodes.push_back({"count_object", {2}, {}});  // references a later node
  std::string why;
  CHECK_FALSE(program_well_formed(fwd, &why));
  CHECK(!why.empty());

  Program self;
  self.nodes.push_back({"count_object", {0}, {}});  // references itself
  CHECK_FALSE(program_well_formed(self));

  Program ok = sample_program();
  CHECK(program_well_formed(ok));
}

TEST_CASE("parse rejects malformed text") {
  CHECK_THROWS_AS(parse_program("scene\n"), DataError);
  CHECK_THROWS_AS(parse_program("#1: scene\n"), DataError);          // bad numbering
  CHECK_THROWS_AS(parse_program("#0: \n"), DataError);               // no module
  CHECK_THROWS_AS(parse_program("#0: scene\n#1: unique(#3)\n"), DataError);
  CHECK_THROWS_AS(parse_program("#0: filter_color[red(#0)\n"), DataError);
  CHECK_THROWS_AS(parse_program("#0: scene\n#1: unique(0)\n"), DataError);
}

TEST_CASE("size reports the node count") {
  CHECK(sample_program().size() == 5);
  CHECK(Program{}.size() == 0);
}
