#include "vgdial/program.hpp"

#include <cctype>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vgdial {

using nlohmann::json;

bool program_well_formed(const Program& p, std::string* why) {
  if (p.nodes.empty()) {
    if (why) *why = "empty program";
    return false;
  }
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    for (int in : p.nodes[i].inputs) {
      if (in < 0 || in >= static_cast<int>(i)) {
        if (why)
          *why = "node " + std::to_string(i) + " references node " + std::to_string(in);
        return false;
      }
    }
  }
  return true;
}

std::string program_to_json(const Program& p) {
  json arr = json::array();
  for (const auto& n : p.nodes) {
    json side = json::array();
    for (const auto& s : n.side) {
      if (std::holds_alternative<int>(s))
        side.push_back(std::get<int>(s));
      else
        side.push_back(std::get<std::string>(s));
    }
    arr.push_back({{"module", n.module}, {"inputs", n.inputs}, {"side", side}});
  }
  return arr.dump();
}

Program program_from_json(const std::string& json_text) {
  json arr;
  try {
    arr = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("program parse error: ") + e.what());
  }
  if (!arr.is_array()) throw DataError("program json must be an array");
  Program p;
  for (const auto& jn : arr) {
    ProgramNode n;
    n.module = jn.at("module").get<std::string>();
    for (const auto& in : jn.at("inputs")) n.inputs.push_back(in.get<int>());
    for (const auto& s : jn.at("side")) {
      if (s.is_number_integer())
        n.side.emplace_back(s.get<int>());
      else
        n.side.emplace_back(s.get<std::string>());
    }
    p.nodes.push_back(std::move(n));
  }
  std::string why;
  if (!program_well_formed(p, &why)) throw DataError("malformed program: " + why);
  return p;
}

std::string print_program(const Program& p) {
  std::ostringstream out;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const auto& n = p.nodes[i];
    out << '#' << i << ": " << n.module;
    if (!n.side.empty()) {
      out << '[';
      for (std::size_t k = 0; k < n.side.size(); ++k) {
        if (k) out << ',';
        if (std::holds_alternative<int>(n.side[k]))
          out << std::get<int>(n.side[k]);
        else
          out << std::get<std::string>(n.side[k]);
      }
      out << ']';
    }
    if (!n.inputs.empty()) {
      out << '(';
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        if (k) out << ", ";
        out << '#' << n.inputs[k];
      }
      out << ')';
    }
    out << '\n';
  }
  return out.str();
}

namespace {

// side literals are ints when they look like ints, strings otherwise
SideValue parse_side_token(const std::string& tok) {
  if (!tok.empty() &&
      (std::isdigit(static_cast<unsigned char>(tok[0])) ||
       (tok[0] == '-' && tok.size() > 1))) {
    bool numeric = true;
    for (std::size_t i = (tok[0] == '-' ? 1 : 0); i < tok.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(tok[i]))) numeric = false;
    if (numeric) return SideValue(std::stoi(tok));
  }
  return SideValue(tok);
}

}  // namespace

Program parse_program(const std::string& text) {
  Program p;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    // trim
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    std::size_t colon = line.find(':');
    if (line[0] != '#' || colon == std::string::npos)
      throw DataError("program line must start with '#<idx>:': " + line);
    int idx = std::stoi(line.substr(1, colon - 1));
    if (idx != static_cast<int>(p.nodes.size()))
      throw DataError("program lines must be numbered consecutively: " + line);

    std::string rest = line.substr(colon + 1);
    b = rest.find_first_not_of(' ');
    rest = (b == std::string::npos) ? "" : rest.substr(b);

    ProgramNode n;
    std::size_t pos = 0;
    while (pos < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[pos])) || rest[pos] == '_'))
      ++pos;
    n.module = rest.substr(0, pos);
    if (n.module.empty()) throw DataError("missing module name: " + line);

    if (pos < rest.size() && rest[pos] == '[') {
      std::size_t close = rest.find(']', pos);
      if (close == std::string::npos) throw DataError("unterminated side list: " + line);
      std::string body = rest.substr(pos + 1, close - pos - 1);
      std::string tok;
      std::istringstream toks(body);
      while (std::getline(toks, tok, ','))
        if (!tok.empty()) n.side.push_back(parse_side_token(tok));
      pos = close + 1;
    }
    if (pos < rest.size() && rest[pos] == '(') {
      std::size_t close = rest.find(')', pos);
      if (close == std::string::npos) throw DataError("unterminated input list: " + line);
      std::string body = rest.substr(pos + 1, close - pos - 1);
      std::istringstream toks(body);
      std::string tok;
      while (std::getline(toks, tok, ',')) {
        std::size_t h = tok.find('#');
        if (h == std::string::npos) throw DataError("inputs must be #refs: " + line);
        n.inputs.push_back(std::stoi(tok.substr(h + 1)));
      }
    }
    p.nodes.push_back(std::move(n));
  }
  std::string why;
  if (!program_well_formed(p, &why)) throw DataError("malformed program: " + why);
  return p;
}

}  // namespace vgdial
