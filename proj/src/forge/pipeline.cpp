#include <algorithm>
#include <cctype>

#include "dse/forge/forge.hpp"

namespace dse::forge {

using kernel::Project;

namespace {

PipelinePtr make(Pipeline::Kind k, std::vector<PipelinePtr> parts, ConditionKind c = ConditionKind::HasOneEvent) {
  auto p = std::make_shared<Pipeline>();
  p->kind = k;
  p->condition = c;
  p->parts = std::move(parts);
  return p;
}

void flattenChain(const Pipeline& p, std::vector<const Pipeline*>& out) {
  if (p.kind == Pipeline::Kind::AndApply) {
    for (auto& part : p.parts) flattenChain(*part, out);
  } else {
    out.push_back(&p);
  }
}

class Runner {
 public:
  Runner(const Focus& focus, const ForgeConfig& config, PipelineResult& result)
      : focus_(focus), config_(config), result_(result) {}

  std::vector<Alternative> run(const Pipeline& p, const Alternative& in) {
    switch (p.kind) {
      case Pipeline::Kind::Atomic:
        return applyAtomic(in, p.op, focus_, config_, &result_.discards);
      case Pipeline::Kind::AndApply: {
        std::vector<Alternative> out;
        for (auto& mid : run(*p.parts[0], in)) {
          auto next = run(*p.parts[1], mid);
          std::move(next.begin(), next.end(), std::back_inserter(out));
        }
        return out;
      }
      case Pipeline::Kind::If:
        if (evalCondition(in.project, p.condition)) return run(*p.parts[0], in);
        return {in};
      case Pipeline::Kind::IfElse:
        return run(*p.parts[evalCondition(in.project, p.condition) ? 0 : 1], in);
      case Pipeline::Kind::While:
        return loop(p, in, /*testFirst=*/true);
      case Pipeline::Kind::RepeatUntil:
        return loop(p, in, /*testFirst=*/false);
      case Pipeline::Kind::Accumulator: {
        std::vector<const Pipeline*> stages;
        flattenChain(*p.parts[0], stages);
        std::vector<Alternative> cur{in}, out;
        for (auto* s : stages) {
          std::vector<Alternative> next;
          for (auto& a : cur) {
            auto r = run(*s, a);
            std::move(r.begin(), r.end(), std::back_inserter(next));
          }
          cur = std::move(next);
          out.insert(out.end(), cur.begin(), cur.end());
        }
        return out;
      }
    }
    return {};
  }

 private:
  // while: continue while the condition holds. repeatUntil: run the body, then
  // stop once the condition holds.
  std::vector<Alternative> loop(const Pipeline& p, const Alternative& in, bool testFirst) {
    std::vector<Alternative> done, cur;
    if (testFirst) {
      if (!evalCondition(in.project, p.condition)) return {in};
    }
    cur.push_back(in);
    for (int iter = 0; iter < config_.iterationCap && !cur.empty(); ++iter) {
      std::vector<Alternative> next;
      for (auto& a : cur) {
        for (auto& b : run(*p.parts[0], a)) {
          bool cond = evalCondition(b.project, p.condition);
          bool more = testFirst ? cond : !cond;
          (more ? next : done).push_back(std::move(b));
        }
      }
      cur = std::move(next);
    }
    for (auto& a : cur) {
      result_.capExceeded.push_back(a.describe());
      done.push_back(std::move(a));
    }
    return done;
  }

  const Focus& focus_;
  const ForgeConfig& config_;
  PipelineResult& result_;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  PipelineRequest request() {
    PipelineRequest r;
    keyword("Apply");
    r.pipeline = chain();
    keyword("On");
    r.model = ident("model id");
    skip();
    if (pos_ < s_.size()) {
      keyword("WithActiveElements");
      expect('(');
      do {
        std::size_t at = pos_;
        auto kind = ident("element kind");
        expect('(');
        auto name = ident("element name");
        expect(')');
        if (kind == "Event") {
          r.focus.events.insert(name);
        } else if (kind == "Variable") {
          r.focus.variables.insert(name);
        } else if (kind == "Invariant") {
          r.focus.invariants.insert(name);
        } else {
          throw PipelineSyntaxError("unknown element kind '" + kind + "'", at);
        }
      } while (accept(','));
      expect(')');
    }
    skip();
    if (pos_ < s_.size()) throw PipelineSyntaxError("unexpected trailing text", pos_);
    return r;
  }

 private:
  PipelinePtr chain() {
    auto p = term();
    while (peekWord() == "andApply") {
      ident("andApply");
      p = Pipeline::andApply(p, term());
    }
    return p;
  }

  PipelinePtr term() {
    skip();
    if (accept('(')) {
      auto p = chain();
      expect(')');
      return p;
    }
    std::size_t at = pos_;
    auto w = ident("operator");
    if (w == "if") {
      expect('(');
      auto c = condition();
      expect(',');
      auto p = chain();
      expect(')');
      return Pipeline::ifRule(c, p);
    }
    if (w == "ifElse") {
      expect('(');
      auto c = condition();
      expect(',');
      auto a = chain();
      expect(',');
      auto b = chain();
      expect(')');
      return Pipeline::ifElseRule(c, a, b);
    }
    if (w == "while") {
      expect('(');
      auto c = condition();
      expect(',');
      auto p = chain();
      expect(')');
      return Pipeline::whileRule(c, p);
    }
    if (w == "repeatUntil") {
      expect('(');
      auto p = chain();
      expect(',');
      auto c = condition();
      expect(')');
      return Pipeline::repeatUntilRule(p, c);
    }
    if (w == "accumulate") {
      expect('(');
      auto p = chain();
      expect(')');
      return Pipeline::accumulatorRule(p);
    }
    auto op = operatorFromName(w);
    if (!op) throw PipelineSyntaxError("unknown operator '" + w + "'", at);
    return Pipeline::atomic(*op);
  }

  ConditionKind condition() {
    skip();
    std::size_t at = pos_;
    auto w = ident("condition");
    auto c = conditionFromName(w);
    if (!c) throw PipelineSyntaxError("unknown condition '" + w + "'", at);
    return *c;
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw PipelineSyntaxError(std::string("expected '") + c + "'", pos_);
  }

  std::string peekWord() {
    skip();
    std::size_t e = pos_;
    while (e < s_.size() && isIdentChar(s_[e])) ++e;
    return s_.substr(pos_, e - pos_);
  }

  static bool isIdentChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  }

  std::string ident(const char* what) {
    skip();
    auto w = peekWord();
    if (w.empty()) throw PipelineSyntaxError(std::string("expected ") + what, pos_);
    pos_ += w.size();
    return w;
  }

  void keyword(const char* kw) {
    skip();
    std::size_t at = pos_;
    if (peekWord() != kw) throw PipelineSyntaxError(std::string("expected '") + kw + "'", at);
    pos_ += std::string_view(kw).size();
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

PipelinePtr Pipeline::atomic(OperatorKind op) {
  auto p = std::make_shared<Pipeline>();
  p->op = op;
  return p;
}
PipelinePtr Pipeline::andApply(PipelinePtr a, PipelinePtr b) { return make(Kind::AndApply, {a, b}); }
PipelinePtr Pipeline::ifRule(ConditionKind c, PipelinePtr p) { return make(Kind::If, {p}, c); }
PipelinePtr Pipeline::ifElseRule(ConditionKind c, PipelinePtr a, PipelinePtr b) { return make(Kind::IfElse, {a, b}, c); }
PipelinePtr Pipeline::repeatUntilRule(PipelinePtr p, ConditionKind c) { return make(Kind::RepeatUntil, {p}, c); }
PipelinePtr Pipeline::whileRule(ConditionKind c, PipelinePtr p) { return make(Kind::While, {p}, c); }
PipelinePtr Pipeline::accumulatorRule(PipelinePtr p) { return make(Kind::Accumulator, {p}); }

std::string Pipeline::toString() const {
  switch (kind) {
    case Kind::Atomic: return operatorName(op);
    case Kind::AndApply: {
      std::vector<const Pipeline*> stages;
      flattenChain(*this, stages);
      std::string out;
      for (auto* s : stages) {
        if (!out.empty()) out += " andApply ";
        out += s->toString();
      }
      return out;
    }
    case Kind::If: return std::string("if(") + conditionName(condition) + ", " + parts[0]->toString() + ")";
    case Kind::IfElse:
      return std::string("ifElse(") + conditionName(condition) + ", " + parts[0]->toString() + ", " +
             parts[1]->toString() + ")";
    case Kind::While: return std::string("while(") + conditionName(condition) + ", " + parts[0]->toString() + ")";
    case Kind::RepeatUntil:
      return "repeatUntil(" + parts[0]->toString() + ", " + conditionName(condition) + ")";
    case Kind::Accumulator: return "accumulate(" + parts[0]->toString() + ")";
  }
  return {};
}

std::string PipelineRequest::toString() const {
  std::string out = "Apply (" + pipeline->toString() + ") On " + model;
  std::vector<std::string> elems;
  for (auto& e : focus.events) elems.push_back("Event(" + e + ")");
  for (auto& v : focus.variables) elems.push_back("Variable(" + v + ")");
  for (auto& i : focus.invariants) elems.push_back("Invariant(" + i + ")");
  if (!elems.empty()) {
    out += " WithActiveElements (";
    for (std::size_t i = 0; i < elems.size(); ++i) out += (i ? ", " : "") + elems[i];
    out += ")";
  }
  return out;
}

PipelineRequest parsePipeline(const std::string& text) { return Parser(text).request(); }

PipelineResult runPipeline(const Project& model, const Pipeline& pipeline, const Focus& focus,
                           const ForgeConfig& config, const std::string& modelId) {
  const auto& root = model.rootMachine();
  for (auto& e : focus.events)
    if (!root.findEvent(e)) throw UnresolvedFocus("no event '" + e + "' in " + root.name);
  for (auto& v : focus.variables)
    if (!root.findVariable(v)) throw UnresolvedFocus("no variable '" + v + "' in " + root.name);
  for (auto& i : focus.invariants)
    if (std::none_of(root.invariants.begin(), root.invariants.end(), [&](auto& x) { return x.label == i; }))
      throw UnresolvedFocus("no invariant '" + i + "' in " + root.name);

  PipelineResult result;
  Alternative start;
  start.project = model;
  start.parent = modelId;
  Runner runner(focus, config, result);
  result.alternatives = runner.run(pipeline, start);
  std::stable_sort(result.alternatives.begin(), result.alternatives.end(),
                   [](const Alternative& a, const Alternative& b) { return a.provenance < b.provenance; });
  return result;
}

}  // namespace dse::forge
