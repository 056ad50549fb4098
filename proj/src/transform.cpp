// SPDX-License-Identifier: Apache-2.0

#include "preexp/transform.hpp"

namespace preexp {
namespace {

class Unfolder {
 public:
  explicit Unfolder(const UnfoldOptions& options) : options_(options) {}

  StmtPtr rewrite(const StmtPtr& s) {
    switch (s->kind) {
      case StmtKind::kWhile: {
        std::size_t index = next_loop_++;
        auto it = options_.per_loop.find(index);
        std::size_t n = it == options_.per_loop.end() ? options_.depth : it->second;
        StmtPtr body = rewrite(s->first);
        StmtPtr out = ast::diverge();
        for (std::size_t k = 0; k < n; ++k) out = ast::if_then(s->pred, ast::seq(body, out));
        return out;
      }
      case StmtKind::kSeq:
      case StmtKind::kIf:
      case StmtKind::kIfElse:
      case StmtKind::kFlipIf:
        return rebuild(s);
      default:
        return s;
    }
  }

 private:
  StmtPtr rebuild(const StmtPtr& s) {
    StmtPtr a = s->first ? rewrite(s->first) : nullptr;
    StmtPtr b = s->second ? rewrite(s->second) : nullptr;
    if (a == s->first && b == s->second) return s;
    Stmt copy = *s;
    copy.first = std::move(a);
    copy.second = std::move(b);
    return std::make_shared<const Stmt>(std::move(copy));
  }

  const UnfoldOptions& options_;
  std::size_t next_loop_ = 0;
};

StmtPtr strip_scores(const StmtPtr& s, FreshNames& fresh) {
  switch (s->kind) {
    case StmtKind::kScore: {
      Symbol u = fresh.next();
      const ExprPtr& e = s->expr;
      PredPtr guard = ast::conj(ast::conj(ast::lt(ast::lit(0.0), e), ast::le(e, ast::lit(1.0))),
                                ast::le(ast::var(u), e));
      return ast::seq(ast::draw(u), ast::observe(guard));
    }
    case StmtKind::kSeq:
    case StmtKind::kIf:
    case StmtKind::kWhile:
    case StmtKind::kIfElse:
    case StmtKind::kFlipIf: {
      StmtPtr a = s->first ? strip_scores(s->first, fresh) : nullptr;
      StmtPtr b = s->second ? strip_scores(s->second, fresh) : nullptr;
      if (a == s->first && b == s->second) return s;
      Stmt copy = *s;
      copy.first = std::move(a);
      copy.second = std::move(b);
      return std::make_shared<const Stmt>(std::move(copy));
    }
    default:
      return s;
  }
}

}  // namespace

StmtPtr unfold_while(const StmtPtr& s, const UnfoldOptions& options) {
  return Unfolder(options).rewrite(s);
}

StmtPtr unfold_while(const StmtPtr& s, std::size_t depth) {
  UnfoldOptions options;
  options.depth = depth;
  return unfold_while(s, options);
}

std::size_t count_loops(const Stmt& s) {
  std::size_t n = s.kind == StmtKind::kWhile ? 1 : 0;
  if (s.first) n += count_loops(*s.first);
  if (s.second) n += count_loops(*s.second);
  return n;
}

StmtPtr noscore(const StmtPtr& s, FreshNames& fresh) { return strip_scores(s, fresh); }

StmtPtr noscore(const StmtPtr& s) {
  FreshNames fresh("_s", vars(*s));
  return noscore(s, fresh);
}

}  // namespace preexp
