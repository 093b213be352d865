#include "heapfix/patch.hpp"

#include "heapfix/parser.hpp"

namespace heapfix {

namespace {

bool locate(std::vector<Stmt> &body, int ordinal, std::vector<Stmt> *&parent, size_t &index) {
  for (size_t i = 0; i < body.size(); ++i) {
    if (body[i].ordinal == ordinal) {
      parent = &body;
      index = i;
      return true;
    }
    if (locate(body[i].then_body, ordinal, parent, index) ||
        locate(body[i].else_body, ordinal, parent, index))
      return true;
  }
  return false;
}

} // namespace

std::string one_line(const std::vector<Stmt> &body) {
  std::string text = print_stmts(body, 0);
  std::string out;
  bool space = false;
  for (char c : text) {
    if (c == '\n' || c == ' ') {
      space = !out.empty();
      continue;
    }
    if (space)
      out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string patch_code(const Patch &patch) {
  if (patch.kind == Patch::Kind::Guard)
    return print_bool_expr(patch.cond);
  return one_line(patch.insert);
}

std::string patch_text(const Patch &patch) {
  std::string where = patch.loc.function + "#" + std::to_string(patch.loc.ordinal);
  if (patch.kind == Patch::Kind::Guard)
    return "GUARD " + where + ": " + patch_code(patch);
  const char *anchor = patch.loc.anchor == Anchor::Before ? "before " : "after ";
  return "INSERT " + std::string(anchor) + where + ": " + patch_code(patch);
}

Patch parse_patch(std::string_view text) {
  Patch patch;
  auto take = [&](std::string_view word) {
    if (text.substr(0, word.size()) != word)
      return false;
    text.remove_prefix(word.size());
    return true;
  };
  if (take("GUARD ")) {
    patch.kind = Patch::Kind::Guard;
  } else if (take("INSERT after ")) {
    patch.loc.anchor = Anchor::After;
  } else if (take("INSERT before ")) {
    patch.loc.anchor = Anchor::Before;
  } else {
    throw PatchError("malformed patch: expected INSERT or GUARD");
  }
  size_t hash = text.find('#'), colon = text.find(": ");
  if (hash == std::string_view::npos || colon == std::string_view::npos || colon < hash)
    throw PatchError("malformed patch: expected FUNCTION#ORDINAL: CODE");
  patch.loc.function = std::string(text.substr(0, hash));
  try {
    size_t used = 0;
    std::string ord(text.substr(hash + 1, colon - hash - 1));
    patch.loc.ordinal = std::stoi(ord, &used);
    if (used != ord.size())
      throw std::invalid_argument(ord);
  } catch (const std::logic_error &) {
    throw PatchError("malformed patch: bad ordinal");
  }
  std::string_view code = text.substr(colon + 2);
  try {
    if (patch.kind == Patch::Kind::Guard)
      patch.cond = parse_bool_expr(code);
    else
      patch.insert = parse_stmts(code);
  } catch (const ProgramError &e) {
    throw PatchError(std::string("malformed patch code: ") + e.what());
  }
  return patch;
}

int patch_size(const Patch &patch) {
  if (patch.kind == Patch::Kind::Guard)
    return 1 + node_count(patch.cond);
  return node_count(patch.insert);
}

PatchedProgram apply_patch(const Program &program, const Patch &patch) {
  PatchedProgram out{program, {}};
  FunctionDef *fn = out.program.find(patch.loc.function);
  if (!fn)
    throw PatchError("location-not-found: no function '" + patch.loc.function + "'");
  std::vector<Stmt> *parent = nullptr;
  size_t index = 0;
  if (!locate(fn->body, patch.loc.ordinal, parent, index))
    throw PatchError("location-not-found: " + patch.loc.function + "#" +
                     std::to_string(patch.loc.ordinal));

  std::map<int, int> old_ordinal;
  for_each_stmt(fn->body, [&](const Stmt &s) { old_ordinal[s.uid] = s.ordinal; });

  int next_uid = -1;
  SourcePos pos = (*parent)[index].pos;
  if (patch.kind == Patch::Kind::Guard) {
    Stmt wrapped = std::move((*parent)[index]);
    Stmt guard;
    guard.kind = StmtKind::If;
    guard.cond = BoolExpr::negation(patch.cond);
    guard.label = std::move(wrapped.label);
    wrapped.label.clear();
    guard.uid = next_uid--;
    guard.pos = pos;
    guard.then_body.push_back(std::move(wrapped));
    (*parent)[index] = std::move(guard);
  } else {
    std::vector<Stmt> code = patch.insert;
    for_each_stmt_mut(code, [&](Stmt &s) {
      s.uid = next_uid--;
      s.pos = pos;
    });
    size_t at = patch.loc.anchor == Anchor::After ? index + 1 : index;
    parent->insert(parent->begin() + static_cast<long>(at), code.begin(), code.end());
  }

  check_program(out.program);
  fn = out.program.find(patch.loc.function);
  for_each_stmt(fn->body, [&](const Stmt &s) {
    auto it = old_ordinal.find(s.uid);
    if (it != old_ordinal.end())
      out.location_map[it->second] = s.ordinal;
  });
  return out;
}

} // namespace heapfix
