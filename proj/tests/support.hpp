#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "heapfix/parser.hpp"
#include "heapfix/patch.hpp"

namespace testsupport {

inline std::string corpus_dir() { return HEAPFIX_CORPUS; }

inline std::string read_file(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture_text(const std::string &name) {
  return read_file(corpus_dir() + "/" + name + ".mc");
}

inline heapfix::Program fixture(const std::string &name) {
  return heapfix::parse_program(fixture_text(name));
}

inline std::vector<std::string> corpus_names() {
  std::vector<std::string> out;
  for (const auto &e : std::filesystem::directory_iterator(corpus_dir()))
    if (e.path().extension() == ".mc")
      out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline heapfix::Patch insert_after(const std::string &fn, int ordinal, const std::string &code) {
  heapfix::Patch p;
  p.kind = heapfix::Patch::Kind::Insert;
  p.loc = {fn, ordinal, heapfix::Anchor::After};
  p.insert = heapfix::parse_stmts(code);
  return p;
}

inline heapfix::Patch guard_at(const std::string &fn, int ordinal, const std::string &cond) {
  heapfix::Patch p;
  p.kind = heapfix::Patch::Kind::Guard;
  p.loc = {fn, ordinal, heapfix::Anchor::After};
  p.cond = heapfix::parse_bool_expr(cond);
  return p;
}

} // namespace testsupport
