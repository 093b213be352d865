#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "heapfix/ast.hpp"

namespace heapfix {

/// INSERT places `insert` at `loc`; GUARD wraps the statement at `loc` as
/// `if (!(cond)) { stmt }`.
struct Patch {
  enum class Kind { Insert, Guard };
  Kind kind = Kind::Insert;
  Location loc;
  std::vector<Stmt> insert;
  BoolExpr cond;
  std::vector<std::string> derivation;
};

class PatchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PatchedProgram {
  Program program;
  std::map<int, int> location_map; // old ordinal -> new ordinal, patched function only
};

/// Returns a re-checked copy. Throws PatchError when the location does not
/// exist and ProgramError when the patched function is ill-formed.
PatchedProgram apply_patch(const Program &program, const Patch &patch);

/// Canonical single-line rendering; equal texts mean equal patches.
std::string patch_text(const Patch &patch);
/// Just the inserted code (or the guard condition), single line.
std::string patch_code(const Patch &patch);
int patch_size(const Patch &patch);
/// Inverse of patch_text. Throws PatchError on malformed text.
Patch parse_patch(std::string_view text);

std::string one_line(const std::vector<Stmt> &body);

} // namespace heapfix
