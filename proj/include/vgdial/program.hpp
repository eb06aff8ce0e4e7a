#pragma once

#include <string>
#include <variant>
#include <vector>

#include "vgdial/util.hpp"

namespace vgdial {

using SideValue = std::variant<int, std::string>;

struct ProgramNode {
  std::string module;
  std::vector<int> inputs;     // indices of earlier nodes
  std::vector<SideValue> side; // literal parameters (attribute values, relations, ...)

  bool operator==(const ProgramNode&) const = default;
};

// A question program: an acyclic node list evaluated in order; the final node
// is the output.
struct Program {
  std::vector<ProgramNode> nodes;

  bool operator==(const Program&) const = default;
  int size() const { return static_cast<int>(nodes.size()); }
};

// structural sanity: node inputs refer strictly to earlier nodes
bool program_well_formed(const Program& p, std::string* why = nullptr);

std::string program_to_json(const Program& p);
Program program_from_json(const std::string& json_text);

// Compact fixture/inspection form, one node per line:
//   #0: scene
//   #1: filter_color[red](#0)
//   #2: unique(#1)
// parse_program accepts exactly what print_program emits.
std::string print_program(const Program& p);
Program parse_program(const std::string& text);

}  // namespace vgdial
