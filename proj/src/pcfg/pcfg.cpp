#include "heapfix/pcfg.hpp"

#include <algorithm>
#include <climits>
#include <functional>
#include <set>

#include "heapfix/parser.hpp"

namespace heapfix {

namespace {

const char *rel_name(RelOp op) {
  switch (op) {
  case RelOp::Lt: return "lt";
  case RelOp::Le: return "le";
  case RelOp::Eq: return "eq";
  case RelOp::Ne: return "ne";
  case RelOp::Gt: return "gt";
  case RelOp::Ge: return "ge";
  }
  return "?";
}

std::string loc_tag(const Location &l) { return l.function + "#" + std::to_string(l.ordinal); }

using Chooser = std::function<const Rule &(const std::string &nt, int depth)>;

// Leftmost construction of a patch from a stream of rule choices.
class Builder {
public:
  Builder(const WeightedGrammar &g, Chooser choose, Derivation &out) : g_(g), choose_(std::move(choose)), out_(out) {}

  Patch patch() {
    const Rule &r = take(WeightedGrammar::kStart, 0);
    Patch p;
    p.loc = r.loc;
    switch (r.kind) {
    case Rule::Kind::Insert:
      p.kind = Patch::Kind::Insert;
      p.insert = seq(1);
      break;
    case Rule::Kind::InsertIf: {
      p.kind = Patch::Kind::Insert;
      Stmt s;
      s.kind = StmtKind::If;
      s.cond = cond(1);
      s.then_body = seq(1);
      p.insert.push_back(std::move(s));
      break;
    }
    default:
      p.kind = Patch::Kind::Guard;
      p.cond = cond(1);
      break;
    }
    return p;
  }

private:
  const Rule &take(const std::string &nt, int depth) {
    const Rule &r = choose_(nt, depth);
    out_.rules.push_back(r.id);
    out_.height = std::max(out_.height, depth);
    return r;
  }

  std::vector<Stmt> seq(int depth) {
    const Rule &r = take("HandlerSeq", depth);
    std::vector<Stmt> out{cmd(depth + 1)};
    if (r.kind == Rule::Kind::SeqCons)
      for (auto &s : seq(depth + 1))
        out.push_back(std::move(s));
    return out;
  }

  Stmt cmd(int depth) {
    const Rule &r = take("HandlerCmd", depth);
    Stmt s;
    switch (r.kind) {
    case Rule::Kind::ReturnPtr:
    case Rule::Kind::ReturnInt:
    case Rule::Kind::ReturnConst:
      s.kind = StmtKind::Return;
      s.has_value = true;
      s.value = atom(r.children[0], depth + 1);
      break;
    case Rule::Kind::ReturnVoid:
      s.kind = StmtKind::Return;
      break;
    case Rule::Kind::Free:
      s.kind = StmtKind::Free;
      s.target = atom("PtrAtom", depth + 1).name;
      break;
    case Rule::Kind::Goto:
      s.kind = StmtKind::Goto;
      s.goto_label = take("Label", depth + 1).label;
      break;
    case Rule::Kind::MallocAssign:
      s.kind = StmtKind::Malloc;
      s.target = atom("PtrAtom", depth + 1).name;
      break;
    default:
      s.kind = StmtKind::Abort;
      break;
    }
    return s;
  }

  BoolExpr cond(int depth) {
    const Rule &r = take("Cond", depth);
    switch (r.kind) {
    case Rule::Kind::True: return BoolExpr::truth(true);
    case Rule::Kind::False: return BoolExpr::truth(false);
    case Rule::Kind::PtrEq:
    case Rule::Kind::PtrNe: {
      Operand a = atom("PtrAtom", depth + 1);
      Operand b = atom("PtrAtom", depth + 1);
      return BoolExpr::rel(a, r.kind == Rule::Kind::PtrEq ? RelOp::Eq : RelOp::Ne, b);
    }
    case Rule::Kind::PtrEqNull:
    case Rule::Kind::PtrNeNull:
      return BoolExpr::rel(atom("PtrAtom", depth + 1), r.kind == Rule::Kind::PtrEqNull ? RelOp::Eq : RelOp::Ne,
                           Operand::null());
    case Rule::Kind::IntRel: {
      Operand a = atom("IntAtom", depth + 1);
      Operand b = atom("IntConst", depth + 1);
      return BoolExpr::rel(a, r.op, b);
    }
    case Rule::Kind::Not: return BoolExpr::negation(cond(depth + 1));
    default: {
      BoolExpr a = cond(depth + 1);
      BoolExpr b = cond(depth + 1);
      return BoolExpr::binary(r.kind == Rule::Kind::And ? BoolExpr::Kind::And : BoolExpr::Kind::Or, a, b);
    }
    }
  }

  Operand atom(const std::string &nt, int depth) { return take(nt, depth).atom; }

  const WeightedGrammar &g_;
  Chooser choose_;
  Derivation &out_;
};

} // namespace

double unit_draw(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

WeightedGrammar::WeightedGrammar(std::vector<Rule> rules, int height) : height_(height) {
  // drop rules that reach a nonterminal without rules, until stable
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<std::string> live;
    for (const auto &r : rules)
      live.insert(r.lhs);
    auto dead = [&](const Rule &r) {
      return std::any_of(r.children.begin(), r.children.end(), [&](const std::string &c) { return !live.count(c); });
    };
    size_t before = rules.size();
    rules.erase(std::remove_if(rules.begin(), rules.end(), dead), rules.end());
    changed = rules.size() != before;
  }
  rules_ = std::move(rules);
  for (size_t i = 0; i < rules_.size(); ++i) {
    if (!index_.emplace(rules_[i].id, i).second)
      throw GrammarError("duplicate rule " + rules_[i].id);
    by_lhs_[rules_[i].lhs].push_back(i);
  }
  // least fixpoint of minimal derivation heights
  for (const auto &[nt, idx] : by_lhs_)
    nt_height_[nt] = INT_MAX;
  changed = true;
  while (changed) {
    changed = false;
    for (auto &r : rules_) {
      int h = 0;
      for (const auto &c : r.children)
        h = std::max(h, nt_height_[c] == INT_MAX ? INT_MAX : nt_height_[c] + 1);
      r.min_height = h;
      if (h < nt_height_[r.lhs]) {
        nt_height_[r.lhs] = h;
        changed = true;
      }
    }
  }
  if (!by_lhs_.count(kStart) || nt_height_[kStart] > height_)
    throw GrammarError("grammar derives no patch within height " + std::to_string(height_));
}

const Rule &WeightedGrammar::rule(const std::string &id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw GrammarError("unknown rule " + id);
  return rules_[it->second];
}

std::vector<std::string> WeightedGrammar::nonterminals() const {
  std::vector<std::string> out;
  for (const auto &[nt, idx] : by_lhs_)
    out.push_back(nt);
  return out;
}

std::vector<const Rule *> WeightedGrammar::rules_of(const std::string &nt) const {
  std::vector<const Rule *> out;
  auto it = by_lhs_.find(nt);
  if (it != by_lhs_.end())
    for (size_t i : it->second)
      out.push_back(&rules_[i]);
  return out;
}

int WeightedGrammar::min_height(const std::string &nt) const {
  auto it = nt_height_.find(nt);
  return it == nt_height_.end() ? INT_MAX : it->second;
}

double WeightedGrammar::p_pi(const Rule &r) const {
  double total = 0;
  for (size_t i : by_lhs_.at(r.lhs))
    total += rules_[i].w_pi;
  return r.w_pi / total;
}

double WeightedGrammar::p_e(const Rule &r) const {
  double total = 0;
  for (size_t i : by_lhs_.at(r.lhs))
    total += rules_[i].w_e;
  return r.w_e / total;
}

std::map<std::string, std::vector<RuleProbability>> WeightedGrammar::probabilities() const {
  std::map<std::string, std::vector<RuleProbability>> out;
  for (const auto &[nt, idx] : by_lhs_)
    for (size_t i : idx)
      out[nt].push_back({rules_[i].id, p_pi(rules_[i]), p_e(rules_[i])});
  return out;
}

Derivation WeightedGrammar::sample(std::mt19937_64 &rng) const {
  Derivation d;
  Chooser choose = [&](const std::string &nt, int depth) -> const Rule & {
    std::vector<const Rule *> all = rules_of(nt), cands;
    for (const Rule *r : all)
      if (r->min_height != INT_MAX && depth + r->min_height <= height_)
        cands.push_back(r);
    if (cands.empty())
      cands = all;
    std::vector<double> w;
    double total = 0;
    for (const Rule *r : cands) {
      w.push_back(p_pi(*r) * p_e(*r));
      total += w.back();
    }
    double u = unit_draw(rng) * total;
    for (size_t i = 0; i < cands.size(); ++i) {
      if (u < w[i])
        return *cands[i];
      u -= w[i];
    }
    return *cands.back();
  };
  d.patch = Builder(*this, choose, d).patch();
  d.patch.derivation = d.rules;
  return d;
}

Derivation WeightedGrammar::sample(uint64_t seed) const {
  std::mt19937_64 rng(seed);
  return sample(rng);
}

Derivation WeightedGrammar::replay(const std::vector<std::string> &rules) const {
  Derivation d;
  size_t next = 0;
  Chooser choose = [&](const std::string &nt, int) -> const Rule & {
    if (next >= rules.size())
      throw GrammarError("derivation ends early at " + nt);
    const Rule &r = rule(rules[next++]);
    if (r.lhs != nt)
      throw GrammarError("rule " + r.id + " does not expand " + nt);
    return r;
  };
  d.patch = Builder(*this, choose, d).patch();
  if (next != rules.size())
    throw GrammarError("derivation has unused rules");
  d.patch.derivation = d.rules;
  return d;
}

void WeightedGrammar::reward(const Derivation &d, int tokens_pi, int tokens_e) {
  for (const auto &id : d.rules)
    rule(id);
  for (const auto &id : d.rules) {
    Rule &r = rules_[index_.at(id)];
    r.w_pi += tokens_pi;
    r.w_e += tokens_e;
  }
}

WeightedGrammar build_grammar(const FunctionDef &fn, const IngredientSet &ing, const std::vector<Location> &locs,
                              int height) {
  std::vector<Rule> rules;
  auto add = [&](const std::string &lhs, const std::string &name, Rule::Kind kind,
                 std::vector<std::string> children) -> Rule & {
    Rule r;
    r.id = lhs + "." + name;
    r.lhs = lhs;
    r.kind = kind;
    r.children = std::move(children);
    rules.push_back(std::move(r));
    return rules.back();
  };
  using K = Rule::Kind;
  for (const auto &l : locs) {
    add("Patch", "insert@" + loc_tag(l), K::Insert, {"HandlerSeq"}).loc = l;
    add("Patch", "insert-if@" + loc_tag(l), K::InsertIf, {"Cond", "HandlerSeq"}).loc = l;
    add("Patch", "guard@" + loc_tag(l), K::Guard, {"Cond"}).loc = l;
  }
  add("HandlerSeq", "one", K::SeqOne, {"HandlerCmd"});
  add("HandlerSeq", "cons", K::SeqCons, {"HandlerCmd", "HandlerSeq"});

  switch (fn.return_kind) {
  case ReturnKind::Ptr:
    add("HandlerCmd", "return-ptr", K::ReturnPtr, {"PtrAtom"});
    add("HandlerCmd", "return-const", K::ReturnConst, {"ConstAtom"});
    break;
  case ReturnKind::Int:
    add("HandlerCmd", "return-int", K::ReturnInt, {"IntAtom"});
    add("HandlerCmd", "return-const", K::ReturnConst, {"ConstAtom"});
    break;
  case ReturnKind::Void:
    add("HandlerCmd", "return-void", K::ReturnVoid, {});
    break;
  }
  add("HandlerCmd", "free", K::Free, {"PtrAtom"});
  add("HandlerCmd", "goto", K::Goto, {"Label"});
  add("HandlerCmd", "malloc-assign", K::MallocAssign, {"PtrAtom"});
  add("HandlerCmd", "abort", K::Abort, {});

  add("Cond", "true", K::True, {});
  add("Cond", "false", K::False, {});
  add("Cond", "ptr-eq", K::PtrEq, {"PtrAtom", "PtrAtom"});
  add("Cond", "ptr-ne", K::PtrNe, {"PtrAtom", "PtrAtom"});
  add("Cond", "ptr-eq-null", K::PtrEqNull, {"PtrAtom"});
  add("Cond", "ptr-ne-null", K::PtrNeNull, {"PtrAtom"});
  for (RelOp op : {RelOp::Lt, RelOp::Le, RelOp::Eq, RelOp::Ne, RelOp::Gt, RelOp::Ge})
    add("Cond", std::string("int-") + rel_name(op), K::IntRel, {"IntAtom", "IntConst"}).op = op;
  add("Cond", "not", K::Not, {"Cond"});
  add("Cond", "and", K::And, {"Cond", "Cond"});
  add("Cond", "or", K::Or, {"Cond", "Cond"});

  for (const auto &v : ing.ptr_vars)
    add("PtrAtom", v, K::Atom, {}).atom = Operand::var(v);
  for (const auto &v : ing.nonptr_vars)
    add("IntAtom", v, K::Atom, {}).atom = Operand::var(v);
  for (const auto &c : ing.constants) {
    bool is_null = c.kind == Operand::Kind::Null;
    if (is_null ? fn.return_kind == ReturnKind::Ptr : fn.return_kind == ReturnKind::Int)
      add("ConstAtom", print_operand(c), K::Atom, {}).atom = c;
    if (!is_null)
      add("IntConst", print_operand(c), K::Atom, {}).atom = c;
  }
  for (const auto &l : ing.labels)
    add("Label", l, K::Atom, {}).label = l;
  return WeightedGrammar(std::move(rules), height);
}

} // namespace heapfix
