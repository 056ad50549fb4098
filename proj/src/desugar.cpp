// SPDX-License-Identifier: Apache-2.0

#include <vector>

#include "preexp/syntax.hpp"

namespace preexp {
namespace {

class Desugarer {
 public:
  explicit Desugarer(FreshNames& fresh) : fresh_(fresh) {}

  // Return statements vanish from their enclosing sequence; the expression
  // is kept as program metadata.
  StmtPtr run(const StmtPtr& s) { return body(s); }

  ExprPtr result() const { return result_; }

 private:
  // Returns nullptr when the whole statement reduces to a removed return.
  StmtPtr rebuild(const StmtPtr& s) {
    switch (s->kind) {
      case StmtKind::kReturn:
        result_ = s->expr;
        return nullptr;
      case StmtKind::kSeq: {
        auto a = rebuild(s->first);
        auto b = rebuild(s->second);
        if (!a) return b;
        if (!b) return a;
        if (a == s->first && b == s->second) return s;
        return ast::seq(a, b);
      }
      default:
        return lower(s);
    }
  }

  StmtPtr body(const StmtPtr& s) {
    auto out = rebuild(s);
    return out ? out : ast::skip();
  }

  StmtPtr lower(const StmtPtr& s) {
    switch (s->kind) {
      case StmtKind::kIf: {
        auto b = body(s->first);
        return b == s->first ? s : ast::if_then(s->pred, b);
      }
      case StmtKind::kWhile: {
        auto b = body(s->first);
        return b == s->first ? s : ast::while_loop(s->pred, b);
      }
      case StmtKind::kIfElse:
        return if_else(s->pred, body(s->first), body(s->second));
      case StmtKind::kFlipIf: {
        // if(flip(p)){C} is u :~ U; if(u < p){C}.
        Symbol u = fresh_.next();
        PredPtr cond = ast::lt(ast::var(u), s->expr);
        StmtPtr branch = s->second ? if_else(cond, body(s->first), body(s->second))
                                   : ast::if_then(cond, body(s->first));
        return ast::seq(ast::draw(u), branch);
      }
      default:
        return s;
    }
  }

  // g := 0; if(phi){g := 1}; if(g = 1){C1}; if(g = 0){C2}. The flag pins the
  // branch choice even when C1 writes to variables of phi.
  StmtPtr if_else(const PredPtr& cond, StmtPtr then_branch, StmtPtr else_branch) {
    Symbol g = fresh_.next();
    return ast::seq({
        ast::assign(g, ast::lit(0.0)),
        ast::if_then(cond, ast::assign(g, ast::lit(1.0))),
        ast::if_then(ast::eq(ast::var(g), ast::lit(1.0)), std::move(then_branch)),
        ast::if_then(ast::eq(ast::var(g), ast::lit(0.0)), std::move(else_branch)),
    });
  }

  FreshNames& fresh_;
  ExprPtr result_;
};

}  // namespace

Program desugar(const StmtPtr& s, FreshNames& fresh) {
  Desugarer d(fresh);
  auto body = d.run(s);
  return Program{body, d.result()};
}

Program desugar(const StmtPtr& s) {
  FreshNames fresh("_t", vars(*s));
  return desugar(s, fresh);
}

}  // namespace preexp
