/**
 * pddl.cc
 *
 * Copyright 2026. All Rights Reserved.
 */

#include "pgk/pddl.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace pgk {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

std::optional<int> Domain::FindPredicate(std::string_view name) const {
  for (size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

const ActionSchema* Domain::FindAction(std::string_view name) const {
  for (const ActionSchema& a : actions) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

namespace {

constexpr int kMaxDepth = 128;

const std::set<std::string, std::less<>> kSupportedRequirements = {
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":disjunctive-preconditions",
    ":existential-preconditions",
    ":universal-preconditions",
    ":conditional-effects",
};

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;
};

[[noreturn]] void Fail(const SExpr& at, const std::string& message) {
  throw ParseError(message, at.line, at.column);
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool IsKeyword(const SExpr& e, std::string_view keyword) {
  return !e.is_list && Lower(e.atom) == keyword;
}

std::string Describe(const SExpr& e) {
  return e.is_list ? std::string("list") : "'" + e.atom + "'";
}

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool IsName(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), IsNameChar);
}

bool IsVariable(std::string_view s) {
  return s.size() > 1 && s[0] == '?' && IsName(s.substr(1));
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExpr ReadDocument() {
    SkipSpace();
    if (pos_ >= text_.size()) throw ParseError("empty input", line_, column_);
    SExpr root = Read(0);
    SkipSpace();
    if (pos_ < text_.size()) {
      throw ParseError("unexpected text after the closing parenthesis", line_,
                       column_);
    }
    return root;
  }

 private:
  SExpr Read(int depth) {
    SExpr e;
    e.line = line_;
    e.column = column_;
    const char c = text_[pos_];
    if (c == ')') throw ParseError("unbalanced ')'", line_, column_);
    if (c == '(') {
      if (depth >= kMaxDepth) {
        throw ParseError("nesting deeper than " + std::to_string(kMaxDepth),
                         line_, column_);
      }
      e.is_list = true;
      Advance();
      while (true) {
        SkipSpace();
        if (pos_ >= text_.size()) {
          throw ParseError("missing ')' for list opened here", e.line,
                           e.column);
        }
        if (text_[pos_] == ')') {
          Advance();
          return e;
        }
        e.items.push_back(Read(depth + 1));
      }
    }
    while (pos_ < text_.size()) {
      const char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || IsSpace(d)) break;
      const auto u = static_cast<unsigned char>(d);
      if (u < 0x21 || u > 0x7e) {
        throw ParseError("invalid character in token", line_, column_);
      }
      e.atom.push_back(d);
      Advance();
    }
    return e;
  }

  static bool IsSpace(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  }

  void SkipSpace() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') Advance();
      } else if (IsSpace(c)) {
        Advance();
      } else {
        return;
      }
    }
  }

  void Advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

const SExpr& ExpectList(const SExpr& e, const std::string& what) {
  if (!e.is_list) Fail(e, "expected " + what + ", found " + Describe(e));
  return e;
}

const std::string& ExpectName(const SExpr& e, const std::string& what) {
  if (e.is_list || !IsName(e.atom)) {
    Fail(e, "expected " + what + ", found " + Describe(e));
  }
  return e.atom;
}

class Requirements {
 public:
  void Add(const SExpr& e) {
    if (e.is_list) Fail(e, "expected requirement flag, found list");
    const std::string flag = Lower(e.atom);
    if (!kSupportedRequirements.contains(flag)) {
      Fail(e, "unsupported requirement '" + e.atom + "'");
    }
    if (std::find(flags_.begin(), flags_.end(), flag) == flags_.end()) {
      flags_.push_back(flag);
    }
  }

  bool Has(std::string_view flag) const {
    return std::find(flags_.begin(), flags_.end(), flag) != flags_.end();
  }

  void Require(const SExpr& at, std::string_view flag,
               const std::string& construct) const {
    if (!Has(flag)) {
      Fail(at, construct + " requires " + std::string(flag));
    }
  }

  const std::vector<std::string>& flags() const { return flags_; }

 private:
  std::vector<std::string> flags_;
};

struct TypedName {
  const SExpr* token;
  TypeRef type;
};

// Parses `a b - t c - (either u v) d`; untyped trailing names are `object`.
std::vector<TypedName> ParseTypedList(const std::vector<SExpr>& items,
                                      size_t begin, bool variables,
                                      const TypeHierarchy& types,
                                      const Requirements& reqs) {
  std::vector<TypedName> out;
  size_t pending = 0;
  for (size_t i = begin; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (!e.is_list && e.atom == "-") {
      if (pending == 0) Fail(e, "'-' without preceding names");
      if (i + 1 >= items.size()) Fail(e, "missing type after '-'");
      const SExpr& t = items[++i];
      TypeRef ref;
      if (t.is_list) {
        if (t.items.size() < 2 || !IsKeyword(t.items[0], "either")) {
          Fail(t, "expected type name or (either ...)");
        }
        std::vector<std::string> names;
        for (size_t k = 1; k < t.items.size(); ++k) {
          names.push_back(ExpectName(t.items[k], "type name"));
        }
        ref = names.size() == 1 ? TypeRef(names[0]) : TypeRef(names);
      } else {
        ref = TypeRef(ExpectName(t, "type name"));
      }
      for (const std::string& n : ref.names) {
        if (!types.Contains(n)) Fail(t, "undeclared type '" + n + "'");
      }
      if (ref.names != std::vector<std::string>{std::string(kRootType)}) {
        reqs.Require(e, ":typing", "typed declaration");
      }
      for (size_t k = out.size() - pending; k < out.size(); ++k) {
        out[k].type = ref;
      }
      pending = 0;
      continue;
    }
    if (e.is_list) Fail(e, "expected name, found list");
    if (variables ? !IsVariable(e.atom) : !IsName(e.atom)) {
      Fail(e, std::string("expected ") + (variables ? "variable" : "name") +
                  ", found '" + e.atom + "'");
    }
    out.push_back({&e, TypeRef()});
    ++pending;
  }
  return out;
}

std::vector<Parameter> ToParameters(const std::vector<TypedName>& typed) {
  std::vector<Parameter> out;
  std::set<std::string> seen;
  for (const TypedName& t : typed) {
    if (!seen.insert(t.token->atom).second) {
      Fail(*t.token, "duplicate parameter '" + t.token->atom + "'");
    }
    out.push_back({t.token->atom, t.type});
  }
  return out;
}

enum class Mode { kCondition, kEffect, kWhenEffect };

/**
 * Converts s-expressions to formulas against a fixed predicate and object
 * table, checking that every construct is licensed by a requirement flag.
 */
class FormulaParser {
 public:
  FormulaParser(const std::vector<PredicateDef>& predicates,
                const std::vector<ObjectSym>& objects, const TypeHierarchy& types,
                const Requirements& reqs)
      : predicates_(predicates), objects_(objects), types_(types), reqs_(reqs) {}

  void Push(const std::vector<Parameter>& vars) {
    scope_.insert(scope_.end(), vars.begin(), vars.end());
  }
  void Pop(size_t n) { scope_.resize(scope_.size() - n); }

  Formula Parse(const SExpr& e, Mode mode) {
    if (!e.is_list) Fail(e, "expected formula, found " + Describe(e));
    if (e.items.empty()) return Formula::True();
    const SExpr& head = e.items[0];
    if (head.is_list) Fail(head, "expected formula head, found list");
    const std::string op = Lower(head.atom);

    if (op == "and") {
      std::vector<Formula> children;
      for (size_t i = 1; i < e.items.size(); ++i) {
        children.push_back(Parse(e.items[i], mode));
      }
      return Formula::And(std::move(children));
    }
    if (op == "not") {
      Arity(e, 1);
      if (mode == Mode::kCondition) {
        // Negation is also reachable through `imply`, so either flag licenses it.
        if (!reqs_.Has(":negative-preconditions") &&
            !reqs_.Has(":disjunctive-preconditions")) {
          Fail(head, "negated condition requires :negative-preconditions");
        }
        return Formula::Not(Parse(e.items[1], mode));
      }
      const SExpr& inner = e.items[1];
      if (!inner.is_list || inner.items.empty() || inner.items[0].is_list ||
          IsConnective(Lower(inner.items[0].atom))) {
        Fail(inner, "only atoms may be negated in an effect");
      }
      return Formula::Not(ParseAtom(inner));
    }
    if (op == "or" || op == "imply") {
      if (mode != Mode::kCondition) Fail(head, "'" + op + "' is not an effect");
      reqs_.Require(head, ":disjunctive-preconditions", "'" + op + "'");
      if (op == "imply") {
        Arity(e, 2);
        return Formula::Imply(Parse(e.items[1], mode), Parse(e.items[2], mode));
      }
      std::vector<Formula> children;
      for (size_t i = 1; i < e.items.size(); ++i) {
        children.push_back(Parse(e.items[i], mode));
      }
      return Formula::Or(std::move(children));
    }
    if (op == "exists" || op == "forall") {
      Arity(e, 2);
      if (op == "exists") {
        if (mode != Mode::kCondition) Fail(head, "'exists' is not an effect");
        reqs_.Require(head, ":existential-preconditions", "'exists'");
      } else if (mode == Mode::kCondition) {
        reqs_.Require(head, ":universal-preconditions", "'forall'");
      } else if (mode == Mode::kEffect) {
        reqs_.Require(head, ":conditional-effects", "'forall' in an effect");
      } else {
        Fail(head, "'forall' is not allowed inside 'when'");
      }
      const SExpr& vars = ExpectList(e.items[1], "variable list");
      const std::vector<Parameter> params =
          ToParameters(ParseTypedList(vars.items, 0, true, types_, reqs_));
      if (params.empty()) Fail(vars, "empty quantifier variable list");
      Push(params);
      Formula body = Parse(e.items[2], mode);
      Pop(params.size());
      for (auto it = params.rbegin(); it != params.rend(); ++it) {
        body = op == "exists" ? Formula::Exists(*it, std::move(body))
                              : Formula::Forall(*it, std::move(body));
      }
      return body;
    }
    if (op == "when") {
      if (mode != Mode::kEffect) {
        Fail(head, "'when' is only allowed at the top of an effect");
      }
      reqs_.Require(head, ":conditional-effects", "'when'");
      Arity(e, 2);
      Formula condition = Parse(e.items[1], Mode::kCondition);
      Formula effect = Parse(e.items[2], Mode::kWhenEffect);
      return Formula::When(std::move(condition), std::move(effect));
    }
    if (IsConnective(op)) Fail(head, "unsupported construct '" + head.atom + "'");
    return ParseAtom(e);
  }

  const std::vector<Parameter>& scope() const { return scope_; }

 private:
  static bool IsConnective(const std::string& op) {
    return op == "and" || op == "or" || op == "not" || op == "imply" ||
           op == "exists" || op == "forall" || op == "when" || op == "=" ||
           op == "either" || (!op.empty() && op[0] == ':');
  }

  static void Arity(const SExpr& e, size_t n) {
    if (e.items.size() != n + 1) {
      Fail(e, "'" + e.items[0].atom + "' takes " + std::to_string(n) +
                  " argument(s), found " + std::to_string(e.items.size() - 1));
    }
  }

  Formula ParseAtom(const SExpr& e) {
    const SExpr& head = e.items[0];
    if (head.is_list) Fail(head, "expected predicate name, found list");
    int pred = -1;
    for (size_t i = 0; i < predicates_.size(); ++i) {
      if (predicates_[i].name == head.atom) pred = static_cast<int>(i);
    }
    if (pred < 0) Fail(head, "unknown predicate '" + head.atom + "'");
    const PredicateDef& def = predicates_[pred];
    if (e.items.size() - 1 != def.arity()) {
      Fail(e, "predicate '" + def.name + "' expects " +
                  std::to_string(def.arity()) + " argument(s), found " +
                  std::to_string(e.items.size() - 1));
    }
    std::vector<Term> args;
    for (size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& t = e.items[i];
      if (t.is_list) Fail(t, "expected term, found list");
      if (IsVariable(t.atom)) {
        const bool bound =
            std::any_of(scope_.begin(), scope_.end(),
                        [&](const Parameter& p) { return p.name == t.atom; });
        if (!bound) Fail(t, "unbound variable '" + t.atom + "'");
        args.push_back(Term::Var(t.atom));
        continue;
      }
      const auto it =
          std::find_if(objects_.begin(), objects_.end(),
                       [&](const ObjectSym& o) { return o.name == t.atom; });
      if (it == objects_.end()) Fail(t, "unknown object '" + t.atom + "'");
      args.push_back(Term::Obj(it->id));
    }
    return Formula::Atom(pred, std::move(args));
  }

  const std::vector<PredicateDef>& predicates_;
  const std::vector<ObjectSym>& objects_;
  const TypeHierarchy& types_;
  const Requirements& reqs_;
  std::vector<Parameter> scope_;
};

// Sections are keyed lists `(:name ...)`; returns the lowercased key.
std::string SectionKey(const SExpr& section) {
  ExpectList(section, "section");
  if (section.items.empty() || section.items[0].is_list ||
      section.items[0].atom.empty() || section.items[0].atom[0] != ':') {
    Fail(section, "expected a (:keyword ...) section");
  }
  return Lower(section.items[0].atom);
}

// Checks `(define (<kind> NAME) ...)` and returns NAME.
std::string ParseHeader(const SExpr& root, std::string_view kind) {
  ExpectList(root, "(define ...)");
  if (root.items.size() < 2 || !IsKeyword(root.items[0], "define")) {
    Fail(root, "expected (define ...)");
  }
  const SExpr& header = ExpectList(root.items[1], "(" + std::string(kind) + " NAME)");
  if (header.items.size() != 2 || !IsKeyword(header.items[0], kind)) {
    Fail(header, "expected (" + std::string(kind) + " NAME)");
  }
  return ExpectName(header.items[1], std::string(kind) + " name");
}

void AddObjects(const std::vector<TypedName>& typed, std::vector<ObjectSym>& objects) {
  for (const TypedName& t : typed) {
    if (t.type.is_either()) Fail(*t.token, "object types cannot use 'either'");
    const bool duplicate =
        std::any_of(objects.begin(), objects.end(),
                    [&](const ObjectSym& o) { return o.name == t.token->atom; });
    if (duplicate) Fail(*t.token, "duplicate object '" + t.token->atom + "'");
    objects.push_back({static_cast<ObjectId>(objects.size()), t.token->atom,
                       t.type.names.front()});
  }
}

}  // namespace

Domain ParseDomain(std::string_view text) {
  const SExpr root = Reader(text).ReadDocument();
  Domain domain;
  domain.name = ParseHeader(root, "domain");

  const SExpr* requirements = nullptr;
  const SExpr* types = nullptr;
  const SExpr* constants = nullptr;
  const SExpr* predicates = nullptr;
  std::vector<const SExpr*> actions;
  for (size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& section = root.items[i];
    const std::string key = SectionKey(section);
    const SExpr** slot = nullptr;
    if (key == ":requirements") {
      slot = &requirements;
    } else if (key == ":types") {
      slot = &types;
    } else if (key == ":constants") {
      slot = &constants;
    } else if (key == ":predicates") {
      slot = &predicates;
    } else if (key == ":action") {
      actions.push_back(&section);
      continue;
    } else {
      Fail(section.items[0], "unsupported section '" + section.items[0].atom + "'");
    }
    if (*slot != nullptr) Fail(section, "duplicate section '" + key + "'");
    *slot = &section;
  }

  Requirements reqs;
  if (requirements != nullptr) {
    for (size_t i = 1; i < requirements->items.size(); ++i) {
      reqs.Add(requirements->items[i]);
    }
  }
  domain.requirements = reqs.flags();

  if (types != nullptr) {
    reqs.Require(*types, ":typing", "(:types ...)");
    // Parents may be declared after use, so collect names first.
    TypeHierarchy permissive;
    std::vector<std::pair<const SExpr*, std::string>> decls;
    const std::vector<SExpr>& items = types->items;
    size_t pending = 0;
    for (size_t i = 1; i < items.size(); ++i) {
      const SExpr& e = items[i];
      if (!e.is_list && e.atom == "-") {
        if (pending == 0) Fail(e, "'-' without preceding type names");
        if (i + 1 >= items.size()) Fail(e, "missing parent type after '-'");
        const SExpr& parent = items[++i];
        if (parent.is_list) Fail(parent, "a type's parent cannot use 'either'");
        ExpectName(parent, "parent type");
        for (size_t k = decls.size() - pending; k < decls.size(); ++k) {
          decls[k].second = parent.atom;
        }
        pending = 0;
        continue;
      }
      ExpectName(e, "type name");
      decls.emplace_back(&e, std::string(kRootType));
      ++pending;
    }
    for (const auto& [token, parent] : decls) {
      try {
        domain.types.Add(token->atom, parent);
      } catch (const std::invalid_argument& err) {
        Fail(*token, "invalid type declaration '" + token->atom + " - " +
                         parent + "'");
      }
    }
  }

  if (constants != nullptr) {
    AddObjects(ParseTypedList(constants->items, 1, false, domain.types, reqs),
               domain.constants);
  }

  if (predicates != nullptr) {
    for (size_t i = 1; i < predicates->items.size(); ++i) {
      const SExpr& p = ExpectList(predicates->items[i], "predicate declaration");
      if (p.items.empty()) Fail(p, "empty predicate declaration");
      const std::string& name = ExpectName(p.items[0], "predicate name");
      if (domain.FindPredicate(name)) {
        Fail(p.items[0], "duplicate predicate '" + name + "'");
      }
      domain.predicates.push_back(
          {name, ToParameters(ParseTypedList(p.items, 1, true, domain.types, reqs))});
    }
  }

  FormulaParser formulas(domain.predicates, domain.constants, domain.types, reqs);
  for (const SExpr* section : actions) {
    const std::vector<SExpr>& items = section->items;
    if (items.size() < 2) Fail(*section, "missing action name");
    ActionSchema action;
    action.name = ExpectName(items[1], "action name");
    if (domain.FindAction(action.name)) {
      Fail(items[1], "duplicate action '" + action.name + "'");
    }
    const SExpr* params = nullptr;
    const SExpr* pre = nullptr;
    const SExpr* eff = nullptr;
    for (size_t i = 2; i < items.size(); i += 2) {
      const SExpr& key = items[i];
      const SExpr** slot = nullptr;
      if (IsKeyword(key, ":parameters")) {
        slot = &params;
      } else if (IsKeyword(key, ":precondition")) {
        slot = &pre;
      } else if (IsKeyword(key, ":effect")) {
        slot = &eff;
      } else {
        Fail(key, "unexpected " + Describe(key) + " in action '" + action.name + "'");
      }
      if (*slot != nullptr) Fail(key, "duplicate " + key.atom);
      if (i + 1 >= items.size()) Fail(key, "missing value for " + key.atom);
      *slot = &items[i + 1];
    }
    if (params != nullptr) {
      ExpectList(*params, "parameter list");
      action.params = ToParameters(
          ParseTypedList(params->items, 0, true, domain.types, reqs));
    }
    formulas.Push(action.params);
    if (pre != nullptr) action.precondition = formulas.Parse(*pre, Mode::kCondition);
    if (eff != nullptr) action.effect = formulas.Parse(*eff, Mode::kEffect);
    formulas.Pop(action.params.size());
    domain.actions.push_back(std::move(action));
  }
  return domain;
}

Problem ParseProblem(std::string_view text, const Domain& domain) {
  const SExpr root = Reader(text).ReadDocument();
  Problem problem;
  problem.name = ParseHeader(root, "problem");

  Requirements reqs;
  for (const std::string& flag : domain.requirements) {
    SExpr token;
    token.atom = flag;
    reqs.Add(token);
  }

  const SExpr* domain_ref = nullptr;
  const SExpr* objects = nullptr;
  const SExpr* init = nullptr;
  const SExpr* goal = nullptr;
  const SExpr* requirements = nullptr;
  for (size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& section = root.items[i];
    const std::string key = SectionKey(section);
    const SExpr** slot = nullptr;
    if (key == ":domain") {
      slot = &domain_ref;
    } else if (key == ":requirements") {
      slot = &requirements;
    } else if (key == ":objects") {
      slot = &objects;
    } else if (key == ":init") {
      slot = &init;
    } else if (key == ":goal") {
      slot = &goal;
    } else {
      Fail(section.items[0], "unsupported section '" + section.items[0].atom + "'");
    }
    if (*slot != nullptr) Fail(section, "duplicate section '" + key + "'");
    *slot = &section;
  }

  if (domain_ref == nullptr) Fail(root, "missing (:domain NAME)");
  if (domain_ref->items.size() != 2) Fail(*domain_ref, "expected (:domain NAME)");
  problem.domain_name = ExpectName(domain_ref->items[1], "domain name");
  if (problem.domain_name != domain.name) {
    Fail(domain_ref->items[1], "problem is for domain '" + problem.domain_name +
                                   "', not '" + domain.name + "'");
  }
  if (requirements != nullptr) {
    for (size_t i = 1; i < requirements->items.size(); ++i) {
      reqs.Add(requirements->items[i]);
    }
  }

  problem.objects = domain.constants;
  if (objects != nullptr) {
    AddObjects(ParseTypedList(objects->items, 1, false, domain.types, reqs),
               problem.objects);
  }
  try {
    problem.index =
        EnumeratePropositions(domain.predicates, problem.objects, domain.types);
  } catch (const std::invalid_argument& err) {
    Fail(root, err.what());
  }

  FormulaParser formulas(domain.predicates, problem.objects, domain.types, reqs);
  problem.init = ClosedState(problem.index.size());
  if (init != nullptr) {
    for (size_t i = 1; i < init->items.size(); ++i) {
      const SExpr& fact = ExpectList(init->items[i], "initial fact");
      if (fact.items.empty() || fact.items[0].is_list) {
        Fail(fact, "expected ground atom");
      }
      const Formula atom = formulas.Parse(fact, Mode::kCondition);
      if (atom.kind() != Formula::Kind::kAtom) {
        Fail(fact, "initial facts must be positive ground atoms");
      }
      std::vector<ObjectId> args;
      for (const Term& t : atom.args()) {
        if (t.is_variable()) Fail(fact, "variable in initial fact");
        args.push_back(t.object);
      }
      const auto p = problem.index.Find(atom.predicate(), args);
      if (!p) Fail(fact, "initial fact is not a well-typed proposition");
      problem.init.Set(*p);
    }
  }

  if (goal == nullptr) Fail(root, "missing (:goal ...)");
  if (goal->items.size() != 2) Fail(*goal, "expected (:goal FORMULA)");
  problem.goal = formulas.Parse(goal->items[1], Mode::kCondition);
  return problem;
}

namespace {

std::string TypedEntry(const std::string& name, const TypeRef& type) {
  if (type == TypeRef()) return name;
  return name + " - " + type.ToString();
}

}  // namespace

std::string ToPddl(const Domain& domain) {
  std::ostringstream os;
  os << "(define (domain " << domain.name << ")\n";
  if (!domain.requirements.empty()) {
    os << "  (:requirements";
    for (const std::string& r : domain.requirements) os << " " << r;
    os << ")\n";
  }
  if (!domain.types.declarations().empty()) {
    os << "  (:types";
    for (const auto& [name, parent] : domain.types.declarations()) {
      os << "\n    " << name << " - " << parent;
    }
    os << ")\n";
  }
  if (!domain.constants.empty()) {
    os << "  (:constants";
    for (const ObjectSym& c : domain.constants) {
      os << " " << TypedEntry(c.name, TypeRef(c.type));
    }
    os << ")\n";
  }
  if (!domain.predicates.empty()) {
    os << "  (:predicates";
    for (const PredicateDef& p : domain.predicates) {
      os << "\n    (" << p.name;
      for (const Parameter& param : p.params) {
        os << " " << TypedEntry(param.name, param.type);
      }
      os << ")";
    }
    os << ")\n";
  }
  for (const ActionSchema& a : domain.actions) {
    os << "  (:action " << a.name << "\n    :parameters (";
    for (size_t i = 0; i < a.params.size(); ++i) {
      os << (i ? " " : "") << TypedEntry(a.params[i].name, a.params[i].type);
    }
    os << ")\n    :precondition "
       << FormulaToString(a.precondition, domain.predicates, domain.constants)
       << "\n    :effect "
       << FormulaToString(a.effect, domain.predicates, domain.constants) << ")\n";
  }
  os << ")\n";
  return os.str();
}

std::string ToPddl(const Problem& problem, const Domain& domain) {
  std::ostringstream os;
  os << "(define (problem " << problem.name << ")\n";
  os << "  (:domain " << problem.domain_name << ")\n";
  if (problem.objects.size() > domain.constants.size()) {
    os << "  (:objects";
    for (size_t i = domain.constants.size(); i < problem.objects.size(); ++i) {
      const ObjectSym& o = problem.objects[i];
      os << " " << TypedEntry(o.name, TypeRef(o.type));
    }
    os << ")\n";
  }
  os << "  (:init";
  problem.init.bits().for_each([&](size_t p) {
    const Proposition& prop = problem.index[p];
    os << "\n    (" << domain.predicates[prop.predicate].name;
    for (ObjectId a : prop.args) os << " " << problem.objects[a].name;
    os << ")";
  });
  os << ")\n";
  os << "  (:goal "
     << FormulaToString(problem.goal, domain.predicates, problem.objects) << "))\n";
  return os.str();
}

}  // namespace pgk
