#include "nora/rule_language.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "nora/error.hpp"

namespace nora {

bool Atom::ground() const noexcept {
  for (const auto& t : args)
    if (t.is_var()) return false;
  return true;
}

namespace {

// Returns an error message when r violates the structural invariants of its kind.
std::optional<std::string> structural_error(const Rule& r) {
  switch (r.kind) {
    case Rule::Kind::Definite:
      if (!r.head || r.body.empty()) return "definite rule needs a head and a nonempty body";
      break;
    case Rule::Kind::Constraint:
      if (r.head || r.body.empty()) return "constraint needs an empty head and a nonempty body";
      break;
    case Rule::Kind::Fact:
      if (!r.head || !r.body.empty()) return "fact needs a head and no body";
      if (!r.head->ground()) return "fact '" + to_string(*r.head) + "' is not ground";
      break;
    case Rule::Kind::CardinalityFact: {
      if (r.head || !r.body.empty() || !r.bounds) return "malformed cardinality fact";
      const auto k = static_cast<int>(r.choices.size());
      if (k < 2 || k > 3) return "cardinality fact must list 2 or 3 choices";
      const Bounds& b = *r.bounds;
      if (!(b.lower == 1 && (b.upper == 1 || b.upper == k)))
        return "cardinality bounds must be 1{..}1 or 1{..}k, got " + std::to_string(b.lower) + "{..}" +
               std::to_string(b.upper);
      const Atom& first = r.choices.front();
      if (first.args.empty()) return "cardinality choices need a first argument";
      std::set<std::string> seen;
      for (const auto& c : r.choices) {
        if (!c.ground()) return "cardinality choice '" + to_string(c) + "' is not ground";
        if (c.predicate != first.predicate) return "cardinality choices must share one predicate";
        if (c.args.empty() || c.args.front() != first.args.front())
          return "cardinality choices must share the first argument";
        if (!seen.insert(to_string(c)).second) return "duplicate cardinality choice '" + to_string(c) + "'";
      }
      break;
    }
  }
  return std::nullopt;
}

void collect_constants(const Atom& a, std::vector<const Term*>& out) {
  for (const auto& t : a.args)
    if (!t.is_var()) out.push_back(&t);
}

}  // namespace

void Program::add(Rule r) {
  if (auto err = structural_error(r)) {
    if (r.kind == Rule::Kind::CardinalityFact) throw BoundsError(*err, r.line, 1);
    throw ParseError(*err, r.line, 1);
  }
  std::vector<const Atom*> atoms;
  if (r.head) atoms.push_back(&*r.head);
  for (const auto& lit : r.body)
    if (const auto* a = std::get_if<Atom>(&lit)) atoms.push_back(a);
  for (const auto& c : r.choices) atoms.push_back(&c);

  for (const Atom* a : atoms) {
    auto it = arities_.find(a->predicate);
    if (it != arities_.end() && it->second != a->args.size())
      throw ArityError(a->predicate, r.line, 1,
                       "predicate '" + a->predicate + "' used with arity " + std::to_string(a->args.size()) +
                           " but declared with arity " + std::to_string(it->second));
  }
  std::vector<const Term*> consts;
  for (const Atom* a : atoms) {
    arities_.emplace(a->predicate, a->args.size());
    collect_constants(*a, consts);
  }
  for (const auto& lit : r.body)
    if (const auto* q = std::get_if<Inequality>(&lit)) {
      if (!q->lhs.is_var()) consts.push_back(&q->lhs);
      if (!q->rhs.is_var()) consts.push_back(&q->rhs);
    }
  for (const Term* t : consts)
    if (constant_set_.insert(t->name).second) constants_.push_back(t->name);
  rules_.push_back(std::move(r));
}

bool Program::has_constant(std::string_view c) const { return constant_set_.count(std::string(c)) > 0; }

std::set<std::string> Program::defined_predicates() const {
  std::set<std::string> out;
  for (const auto& r : rules_) {
    if (r.head) out.insert(r.head->predicate);
    for (const auto& c : r.choices) out.insert(c.predicate);
  }
  return out;
}

std::set<std::string> Program::input_predicates() const {
  std::set<std::string> out{std::string(kPersonType), std::string(kPlaceType)};
  for (const auto& r : rules_) {
    if (r.kind != Rule::Kind::Fact || r.head->args.empty()) continue;
    const auto& p = r.head->predicate;
    if (p == "story_relation" || p == "story_property" || p == "gender_marker")
      out.insert(r.head->args.front().name);
  }
  return out;
}

std::vector<std::string> undeclared_body_predicates(const Program& world) {
  auto known = world.defined_predicates();
  auto inputs = world.input_predicates();
  known.insert(inputs.begin(), inputs.end());
  std::set<std::string> bad;
  for (const auto& r : world.rules())
    for (const auto& lit : r.body)
      if (const auto* a = std::get_if<Atom>(&lit); a && !known.count(a->predicate)) bad.insert(a->predicate);
  return {bad.begin(), bad.end()};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Ident, Variable, Number, LParen, RParen, Comma, Semi, LBrace, RBrace, Dot, If, Neq, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t col;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Variable: return "variable";
    case Tok::Number: return "number";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Dot: return "'.'";
    case Tok::If: return "':-'";
    case Tok::Neq: return "'!='";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<std::string>& warnings) : src_(src), warnings_(warnings) {}

  Token next() {
    skip();
    const std::size_t line = line_, col = col_;
    if (pos_ >= src_.size()) return {Tok::End, "", line, col};
    const char c = src_[pos_];
    auto single = [&](Tok k) {
      advance();
      return Token{k, std::string(1, c), line, col};
    };
    switch (c) {
      case '(': return single(Tok::LParen);
      case ')': return single(Tok::RParen);
      case ',': return single(Tok::Comma);
      case ';': return single(Tok::Semi);
      case '{': return single(Tok::LBrace);
      case '}': return single(Tok::RBrace);
      case '.': return single(Tok::Dot);
      case ':':
        if (peek(1) == '-') {
          advance(2);
          return {Tok::If, ":-", line, col};
        }
        break;
      case '!':
        if (peek(1) == '=') {
          advance(2);
          return {Tok::Neq, "!=", line, col};
        }
        break;
      default: break;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      std::string text(src_.substr(start, pos_ - start));
      const bool var = std::isupper(static_cast<unsigned char>(c)) || c == '_';
      return {var ? Tok::Variable : Tok::Ident, std::move(text), line, col};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) advance();
      return {Tok::Number, std::string(src_.substr(start, pos_ - start)), line, col};
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }

 private:
  char peek(std::size_t off) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void advance(std::size_t n = 1) {
    for (; n > 0 && pos_ < src_.size(); --n, ++pos_) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '#') {
        directive();
      } else {
        break;
      }
    }
  }

  // A directive runs to the next '.' that is not followed by a digit.
  void directive() {
    const std::size_t line = line_;
    std::size_t start = pos_;
    while (pos_ < src_.size()) {
      if (src_[pos_] == '.' && !std::isdigit(static_cast<unsigned char>(peek(1)))) {
        advance();
        break;
      }
      advance();
    }
    std::string text(src_.substr(start, pos_ - start));
    auto sp = text.find_first_of(" \t\n.");
    warnings_.push_back("line " + std::to_string(line) + ": ignored directive " + text.substr(0, sp));
  }

  std::string_view src_;
  std::vector<std::string>& warnings_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src, warnings_) { shift(); }

  Program run() {
    Program prog;
    while (cur_.kind != Tok::End) statement(prog);
    for (auto& w : warnings_) prog.add_warning(std::move(w));
    return prog;
  }

 private:
  void shift() { cur_ = lex_.next(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expected " + what + ", found " +
                         (cur_.kind == Tok::End ? std::string(tok_name(Tok::End)) : "'" + cur_.text + "'"),
                     cur_.line, cur_.col);
  }

  Token expect(Tok k) {
    if (cur_.kind != k) fail(tok_name(k));
    Token t = cur_;
    shift();
    return t;
  }

  Term term() {
    switch (cur_.kind) {
      case Tok::Variable: {
        Term t = Term::var(cur_.text);
        shift();
        return t;
      }
      case Tok::Ident:
      case Tok::Number: {
        Term t = Term::constant(cur_.text);
        shift();
        return t;
      }
      default: fail("term");
    }
  }

  struct Located {
    Atom atom;
    std::size_t line, col;
  };

  Located atom() {
    if (cur_.kind != Tok::Ident) fail("predicate name");
    Located out{{cur_.text, {}}, cur_.line, cur_.col};
    shift();
    if (cur_.kind == Tok::LParen) {
      shift();
      out.atom.args.push_back(term());
      while (cur_.kind == Tok::Comma) {
        shift();
        out.atom.args.push_back(term());
      }
      expect(Tok::RParen);
    }
    return out;
  }

  void check_arity(const Located& a) {
    auto it = arities_.find(a.atom.predicate);
    if (it == arities_.end()) {
      arities_.emplace(a.atom.predicate, a.atom.args.size());
    } else if (it->second != a.atom.args.size()) {
      throw ArityError(a.atom.predicate, a.line, a.col,
                       "arity conflict for predicate '" + a.atom.predicate + "': " +
                           std::to_string(a.atom.args.size()) + " vs " + std::to_string(it->second));
    }
  }

  BodyLiteral literal() {
    if (cur_.kind == Tok::Variable || cur_.kind == Tok::Number) {
      Term lhs = term();
      expect(Tok::Neq);
      return Inequality{std::move(lhs), term()};
    }
    // Either an atom or a constant on the left of '!='.
    if (cur_.kind == Tok::Ident) {
      Token save = cur_;
      Located a = atom();
      if (cur_.kind == Tok::Neq) {
        if (!a.atom.args.empty()) fail("body literal");
        shift();
        return Inequality{Term::constant(save.text), term()};
      }
      check_arity(a);
      return std::move(a.atom);
    }
    fail("body literal");
  }

  std::vector<BodyLiteral> body() {
    std::vector<BodyLiteral> out;
    out.push_back(literal());
    while (cur_.kind == Tok::Comma) {
      shift();
      out.push_back(literal());
    }
    return out;
  }

  int bound(const Token& t) {
    if (t.text.size() > 6 || !std::all_of(t.text.begin(), t.text.end(), ::isdigit))
      throw BoundsError("malformed cardinality bound '" + t.text + "'", t.line, t.col);
    return std::stoi(t.text);
  }

  void add(Program& prog, Rule r, std::size_t line, std::size_t col) {
    if (auto err = structural_error(r)) {
      if (r.kind == Rule::Kind::CardinalityFact) throw BoundsError(*err, line, col);
      throw ParseError(*err, line, col);
    }
    r.line = line;
    prog.add(std::move(r));
  }

  void statement(Program& prog) {
    const std::size_t line = cur_.line, col = cur_.col;
    Rule r;
    r.line = line;
    if (cur_.kind == Tok::If) {
      shift();
      r.kind = Rule::Kind::Constraint;
      r.body = body();
      expect(Tok::Dot);
      return add(prog, std::move(r), line, col);
    }
    if (cur_.kind == Tok::Number || cur_.kind == Tok::LBrace) {
      return cardinality(prog, line, col);
    }
    Located head = atom();
    check_arity(head);
    r.head = std::move(head.atom);
    if (cur_.kind == Tok::If) {
      shift();
      r.kind = Rule::Kind::Definite;
      r.body = body();
    } else {
      r.kind = Rule::Kind::Fact;
    }
    expect(Tok::Dot);
    add(prog, std::move(r), line, col);
  }

  void cardinality(Program& prog, std::size_t line, std::size_t col) {
    Rule r;
    r.kind = Rule::Kind::CardinalityFact;
    if (cur_.kind != Tok::Number) throw BoundsError("cardinality fact needs an explicit lower bound", line, col);
    Bounds b;
    b.lower = bound(cur_);
    shift();
    expect(Tok::LBrace);
    for (;;) {
      Located a = atom();
      check_arity(a);
      r.choices.push_back(std::move(a.atom));
      if (cur_.kind == Tok::Semi) {
        shift();
        continue;
      }
      if (cur_.kind == Tok::Comma || cur_.kind == Tok::If)
        throw ParseError("only plain choices separated by ';' are supported in cardinality facts", cur_.line,
                         cur_.col);
      break;
    }
    expect(Tok::RBrace);
    if (cur_.kind != Tok::Number) throw BoundsError("cardinality fact needs an explicit upper bound", cur_.line, cur_.col);
    b.upper = bound(cur_);
    shift();
    if (cur_.kind == Tok::If) throw ParseError("choice rules with bodies are not supported", cur_.line, cur_.col);
    expect(Tok::Dot);
    r.bounds = b;
    add(prog, std::move(r), line, col);
  }

  std::vector<std::string> warnings_;
  Lexer lex_;
  Token cur_{Tok::End, "", 0, 0};
  std::map<std::string, std::size_t> arities_;
};

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).run(); }

Program parse_program_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open rule file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_program(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line(), e.column());
  }
}

// ---------------------------------------------------------------------------
// Serialization

std::string to_string(const Term& t) { return t.name; }

std::string to_string(const Atom& a) {
  std::string s = a.predicate;
  if (a.args.empty()) return s;
  s += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ',';
    s += a.args[i].name;
  }
  s += ')';
  return s;
}

namespace {

std::string literal_string(const BodyLiteral& lit) {
  if (const auto* a = std::get_if<Atom>(&lit)) return to_string(*a);
  const auto& q = std::get<Inequality>(lit);
  return q.lhs.name + " != " + q.rhs.name;
}

}  // namespace

std::string to_string(const Rule& r) {
  std::string s;
  switch (r.kind) {
    case Rule::Kind::Fact: return to_string(*r.head) + ".";
    case Rule::Kind::CardinalityFact: {
      s = std::to_string(r.bounds->lower) + "{";
      for (std::size_t i = 0; i < r.choices.size(); ++i) {
        if (i) s += "; ";
        s += to_string(r.choices[i]);
      }
      return s + "}" + std::to_string(r.bounds->upper) + ".";
    }
    case Rule::Kind::Definite: s = to_string(*r.head) + " :- "; break;
    case Rule::Kind::Constraint: s = ":- "; break;
  }
  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (i) s += ", ";
    s += literal_string(r.body[i]);
  }
  return s + ".";
}

std::string serialize_program(const Program& p) {
  std::string out;
  for (const auto& r : p.rules()) {
    out += to_string(r);
    out += '\n';
  }
  return out;
}

}  // namespace nora
