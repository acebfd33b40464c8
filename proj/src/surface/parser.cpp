#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "dse/surface/surface.hpp"

namespace dse::surface {

using namespace dse::kernel;

namespace {

enum class Tok { Ident, Int, Sym, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  Span span;
};

const std::set<std::string> kKeywords = {
    "context", "sets",  "constants", "machine", "refines", "sees", "variables", "invariants", "derived",
    "initialisation", "event", "any", "when", "with", "then", "end", "or", "not", "TRUE", "FALSE",
    "INT", "BOOL", "POW", "SIGMA", "dom", "card"};

// Longest symbols first.
const char* kSymbols[] = {"+->", "<->", "|->", ":=", "/:", "\\/", "<+", "=>", "/=", "<=", ">=", "\\", ":", "=",
                          "<",   ">",   "+",   "-",  "*",  "&",   "(",  ")",  "{",  "}",  ",", ";"};

class Lexer {
 public:
  Lexer(const std::string& text, int file, std::vector<Diagnostic>& diags) : text_(text), file_(file), diags_(diags) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skipSpace();
      Span s{file_, line_, col_, static_cast<int>(pos_), 0};
      if (pos_ >= text_.size()) {
        out.push_back({Tok::Eof, "", s});
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) advance();
        s.length = static_cast<int>(pos_ - start);
        out.push_back({Tok::Ident, text_.substr(start, pos_ - start), s});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        s.length = static_cast<int>(pos_ - start);
        out.push_back({Tok::Int, text_.substr(start, pos_ - start), s});
        continue;
      }
      bool matched = false;
      for (const char* sym : kSymbols) {
        std::string_view sv(sym);
        if (text_.compare(pos_, sv.size(), sv) == 0) {
          for (std::size_t i = 0; i < sv.size(); ++i) advance();
          s.length = static_cast<int>(sv.size());
          out.push_back({Tok::Sym, std::string(sv), s});
          matched = true;
          break;
        }
      }
      if (!matched) {
        s.length = 1;
        diags_.push_back({Diagnostic::Kind::Lex, s, std::string("unexpected character '") + c + "'"});
        advance();
      }
    }
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skipSpace() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  int file_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct ParseFailure {};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Diagnostic>& diags) : toks_(std::move(toks)), diags_(diags) {}

  void parseUnit(Project& p) {
    while (!at(Tok::Eof)) {
      try {
        if (isWord("context")) {
          p.contexts.push_back(context());
        } else if (isWord("machine")) {
          p.machines.push_back(machine());
        } else {
          fail("expected 'context' or 'machine'");
        }
      } catch (const ParseFailure&) {
        // resynchronise at the next top-level keyword
        while (!at(Tok::Eof) && !isWord("context") && !isWord("machine")) ++pos_;
      }
    }
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool isWord(std::string_view w, std::size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == w; }
  bool isSym(std::string_view s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }

  [[noreturn]] void fail(const std::string& msg) {
    auto& t = peek();
    std::string found = t.kind == Tok::Eof ? "end of input" : "'" + t.text + "'";
    diags_.push_back({Diagnostic::Kind::Parse, t.span, msg + ", found " + found});
    throw ParseFailure{};
  }

  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  void word(std::string_view w) {
    if (!isWord(w)) fail("expected '" + std::string(w) + "'");
    ++pos_;
  }
  void sym(std::string_view s) {
    if (!isSym(s)) fail("expected '" + std::string(s) + "'");
    ++pos_;
  }
  bool acceptSym(std::string_view s) {
    if (!isSym(s)) return false;
    ++pos_;
    return true;
  }
  std::string name() {
    if (!at(Tok::Ident) || kKeywords.count(peek().text)) fail("expected a name");
    return take().text;
  }
  bool atName(std::size_t k = 0) const { return peek(k).kind == Tok::Ident && !kKeywords.count(peek(k).text); }

  Context context() {
    Context c;
    c.span = peek().span;
    word("context");
    c.name = name();
    while (!isWord("end")) {
      if (isWord("sets")) {
        ++pos_;
        while (atName()) {
          CarrierSet s;
          s.name = name();
          sym("=");
          sym("{");
          if (!isSym("}")) {
            do s.elements.push_back(name());
            while (acceptSym(","));
          }
          sym("}");
          c.sets.push_back(std::move(s));
        }
      } else if (isWord("constants")) {
        ++pos_;
        while (atName()) {
          Constant k;
          k.name = name();
          sym(":");
          k.span = peek().span;
          k.type = type().first;
          sym("=");
          k.value = expr();
          c.constants.push_back(std::move(k));
        }
      } else {
        fail("expected 'sets', 'constants' or 'end'");
      }
    }
    word("end");
    return c;
  }

  // Second component reports a top-level `+->`.
  std::pair<Type, bool> type() {
    Type lhs = productType();
    if (isSym("+->") || isSym("<->")) {
      bool functional = isSym("+->");
      ++pos_;
      Type rhs = productType();
      return {Type::setOf(Type::pair(lhs, rhs)), functional};
    }
    return {lhs, false};
  }

  Type productType() {
    Type t = atomType();
    while (acceptSym("*")) t = Type::pair(t, atomType());
    return t;
  }

  Type atomType() {
    if (isWord("INT")) {
      ++pos_;
      return Type::integer();
    }
    if (isWord("BOOL")) {
      ++pos_;
      return Type::boolean();
    }
    if (isWord("POW")) {
      ++pos_;
      sym("(");
      auto inner = type().first;
      sym(")");
      return Type::setOf(inner);
    }
    if (acceptSym("(")) {
      auto inner = type().first;
      sym(")");
      return inner;
    }
    return Type::carrierOf(name());
  }

  Machine machine() {
    Machine m;
    m.span = peek().span;
    word("machine");
    m.name = name();
    if (isWord("refines")) {
      ++pos_;
      m.refines = name();
    }
    if (isWord("sees")) {
      ++pos_;
      do m.sees.push_back(name());
      while (acceptSym(","));
    }
    bool sawInit = false;
    while (!isWord("end")) {
      if (isWord("variables")) {
        ++pos_;
        while (atName()) {
          Variable v;
          v.name = name();
          sym(":");
          v.span = peek().span;
          auto [t, f] = type();
          v.type = t;
          v.functional = f;
          m.variables.push_back(std::move(v));
        }
      } else if (isWord("invariants")) {
        ++pos_;
        while (atName() || isWord("derived")) {
          Invariant inv;
          if (isWord("derived")) {
            ++pos_;
            inv.userGiven = false;
          }
          inv.label = name();
          sym(":");
          inv.expr = expr();
          m.invariants.push_back(std::move(inv));
        }
      } else if (isWord("initialisation")) {
        m.initialisation = event(true);
        sawInit = true;
      } else if (isWord("event")) {
        m.events.push_back(event(false));
      } else {
        fail("expected 'variables', 'invariants', 'initialisation', 'event' or 'end'");
      }
    }
    word("end");
    if (!sawInit) {
      m.initialisation.name = "INITIALISATION";
      m.initialisation.span = m.span;
    }
    return m;
  }

  Event event(bool init) {
    Event e;
    e.span = peek().span;
    if (init) {
      ++pos_;
      e.name = "INITIALISATION";
    } else {
      word("event");
      e.name = name();
    }
    if (isWord("any")) {
      ++pos_;
      do {
        Parameter p;
        p.name = name();
        sym(":");
        p.span = peek().span;
        p.type = type().first;
        e.parameters.push_back(std::move(p));
      } while (acceptSym(","));
    }
    if (isWord("when")) {
      ++pos_;
      while (atName()) e.guards.push_back(labeled());
    }
    if (isWord("with")) {
      ++pos_;
      while (atName()) e.witnesses.push_back(labeled());
    }
    if (isWord("then")) {
      ++pos_;
      while (atName()) e.actions.push_back(action());
    }
    word("end");
    return e;
  }

  Labeled labeled() {
    Labeled l;
    l.label = name();
    sym(":");
    l.expr = expr();
    return l;
  }

  Action action() {
    Action a;
    a.span = peek().span;
    a.label = name();
    sym(":");
    a.target = name();
    if (acceptSym("(")) {
      a.index = expr();
      sym(")");
    }
    sym(":=");
    a.rhs = expr();
    return a;
  }

  Expr node(Op op, Span s, std::vector<Expr> args) {
    Expr e;
    e.op = op;
    e.span = s;
    e.args = std::move(args);
    return e;
  }

  static Span cover(const Span& a, const Span& b) {
    Span s = a;
    s.length = std::max(a.length, b.offset + b.length - a.offset);
    return s;
  }

  Expr expr() { return implication(); }

  Expr implication() {
    Expr lhs = disjunction();
    if (acceptSym("=>")) {
      Expr rhs = implication();
      auto s = cover(lhs.span, rhs.span);
      return node(Op::Implies, s, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr disjunction() {
    Expr lhs = conjunctionExpr();
    while (isWord("or")) {
      ++pos_;
      Expr rhs = conjunctionExpr();
      auto s = cover(lhs.span, rhs.span);
      lhs = node(Op::Or, s, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr conjunctionExpr() {
    Expr lhs = negation();
    while (acceptSym("&")) {
      Expr rhs = negation();
      auto s = cover(lhs.span, rhs.span);
      lhs = node(Op::And, s, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr negation() {
    if (isWord("not")) {
      auto s = take().span;
      Expr inner = negation();
      return node(Op::Not, cover(s, inner.span), {std::move(inner)});
    }
    return comparison();
  }

  Expr comparison() {
    Expr lhs = setExpr();
    static const std::pair<const char*, Op> ops[] = {{"=", Op::Eq}, {"/=", Op::Neq}, {"<=", Op::Le}, {">=", Op::Ge},
                                                     {"<", Op::Lt}, {">", Op::Gt},   {":", Op::In},   {"/:", Op::NotIn}};
    for (auto& [text, op] : ops) {
      if (isSym(text)) {
        ++pos_;
        Expr rhs = setExpr();
        auto s = cover(lhs.span, rhs.span);
        return node(op, s, {std::move(lhs), std::move(rhs)});
      }
    }
    return lhs;
  }

  Expr setExpr() {
    Expr lhs = arith();
    while (true) {
      Op op;
      if (isSym("\\/")) op = Op::Union;
      else if (isSym("\\")) op = Op::SetMinus;
      else if (isSym("<+")) op = Op::Override;
      else if (isSym("|->")) op = Op::Maplet;
      else break;
      ++pos_;
      Expr rhs = arith();
      auto s = cover(lhs.span, rhs.span);
      lhs = node(op, s, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr arith() {
    Expr lhs = unary();
    while (isSym("+") || isSym("-")) {
      Op op = isSym("+") ? Op::Add : Op::Sub;
      ++pos_;
      Expr rhs = unary();
      auto s = cover(lhs.span, rhs.span);
      lhs = node(op, s, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr unary() {
    if (isSym("-")) {
      auto s = take().span;
      if (at(Tok::Int)) {
        auto t = take();
        Expr lit = Expr::intLit(-std::stoll(t.text));
        lit.span = cover(s, t.span);
        return lit;
      }
      Expr inner = unary();
      return node(Op::Neg, cover(s, inner.span), {std::move(inner)});
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = primary();
    while (isSym("(")) {
      ++pos_;
      Expr arg = tupleBody();
      auto end = peek().span;
      sym(")");
      auto s = cover(e.span, end);
      e = node(Op::Apply, s, {std::move(e), std::move(arg)});
    }
    return e;
  }

  // expr {, expr} folded into left-nested pairs
  Expr tupleBody() {
    Expr acc = expr();
    while (acceptSym(",")) {
      Expr rhs = expr();
      auto s = cover(acc.span, rhs.span);
      acc = node(Op::Maplet, s, {std::move(acc), std::move(rhs)});
    }
    return acc;
  }

  Expr primary() {
    auto& t = peek();
    if (t.kind == Tok::Int) {
      auto tok = take();
      Expr e = Expr::intLit(std::stoll(tok.text));
      e.span = tok.span;
      return e;
    }
    if (isWord("TRUE") || isWord("FALSE")) {
      auto tok = take();
      Expr e = Expr::boolLit(tok.text == "TRUE");
      e.span = tok.span;
      return e;
    }
    if (isWord("SIGMA") || isWord("dom") || isWord("card")) {
      auto tok = take();
      Op op = tok.text == "SIGMA" ? Op::Sigma : tok.text == "dom" ? Op::Dom : Op::Card;
      sym("(");
      Expr inner = expr();
      auto end = peek().span;
      sym(")");
      return node(op, cover(tok.span, end), {std::move(inner)});
    }
    if (isSym("{")) {
      auto start = take().span;
      std::vector<Expr> elems;
      if (!isSym("}")) {
        do elems.push_back(expr());
        while (acceptSym(","));
      }
      auto end = peek().span;
      sym("}");
      return node(Op::SetLit, cover(start, end), std::move(elems));
    }
    if (isSym("(")) {
      auto start = take().span;
      Expr inner = tupleBody();
      auto end = peek().span;
      sym(")");
      inner.span = cover(start, end);
      return inner;
    }
    if (atName()) {
      auto tok = take();
      Expr e = Expr::ident(tok.text);
      e.span = tok.span;
      return e;
    }
    fail("expected an expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Diagnostic>& diags_;
};

}  // namespace

ParseResult parseProject(const std::vector<SourceUnit>& sources, const std::string& root) {
  ParseResult r;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Lexer lex(sources[i].text, static_cast<int>(i), r.diagnostics);
    auto toks = lex.run();
    Parser parser(std::move(toks), r.diagnostics);
    parser.parseUnit(r.project);
  }
  if (!r.diagnostics.empty()) return r;
  r.project.root = root;
  if (r.project.root.empty() && !r.project.machines.empty()) r.project.root = r.project.machines.back().name;
  r.diagnostics = check(r.project);
  return r;
}

kernel::Project parseProjectOrThrow(const std::vector<SourceUnit>& sources, const std::string& root) {
  auto r = parseProject(sources, root);
  if (!r.ok()) throw DiagnosticError(std::move(r.diagnostics));
  return std::move(r.project);
}

Manifest parseManifest(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  auto unquote = [](std::string s) {
    auto a = s.find('"');
    auto b = s.rfind('"');
    if (a == std::string::npos || b <= a) throw std::invalid_argument("manifest: expected a quoted string in '" + s + "'");
    return s.substr(a + 1, b - a - 1);
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    std::string value = line.substr(eq + 1);
    if (key == "root") {
      m.root = unquote(value);
    } else if (key == "files") {
      auto a = value.find('[');
      auto b = value.rfind(']');
      if (a == std::string::npos || b == std::string::npos) throw std::invalid_argument("manifest: 'files' must be an array");
      std::string body = value.substr(a + 1, b - a - 1);
      std::size_t p = 0;
      while ((p = body.find('"', p)) != std::string::npos) {
        auto q = body.find('"', p + 1);
        if (q == std::string::npos) throw std::invalid_argument("manifest: unterminated string");
        m.files.push_back(body.substr(p + 1, q - p - 1));
        p = q + 1;
      }
    } else {
      throw std::invalid_argument("manifest: unknown key '" + key + "'");
    }
  }
  return m;
}

std::string renderManifest(const Manifest& m) {
  std::string out = "root = \"" + m.root + "\"\nfiles = [";
  for (std::size_t i = 0; i < m.files.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + m.files[i] + "\"";
  }
  return out + "]\n";
}

static std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

static std::filesystem::path manifestOf(const std::filesystem::path& p) {
  return std::filesystem::is_directory(p) ? p / "project.toml" : p;
}

std::vector<SourceUnit> readSources(const std::filesystem::path& path, Manifest& manifest) {
  auto manifestPath = manifestOf(path);
  manifest = parseManifest(readFile(manifestPath));
  std::vector<SourceUnit> units;
  for (auto& f : manifest.files) {
    auto p = manifestPath.parent_path() / f;
    units.push_back({p.string(), readFile(p)});
  }
  return units;
}

ParseResult loadProject(const std::filesystem::path& path) {
  Manifest manifest;
  auto units = readSources(path, manifest);
  return parseProject(units, manifest.root);
}

kernel::Project loadProjectOrThrow(const std::filesystem::path& path) {
  auto r = loadProject(path);
  if (!r.ok()) throw DiagnosticError(r.diagnostics);
  return std::move(r.project);
}

void saveProject(const kernel::Project& project, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Manifest m;
  m.root = project.root;
  for (auto& unit : render(project)) {
    std::ofstream(dir / unit.path, std::ios::binary) << unit.text;
    m.files.push_back(unit.path);
  }
  std::ofstream(dir / "project.toml", std::ios::binary) << renderManifest(m);
}

std::string formatDiagnostic(const kernel::Diagnostic& d, const std::vector<SourceUnit>& sources) {
  std::string where = "<project>";
  if (d.span.file >= 0 && d.span.file < static_cast<int>(sources.size()))
    where = sources[d.span.file].path + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column);
  return where + ": " + kindName(d.kind) + ": " + d.message;
}

}  // namespace dse::surface
