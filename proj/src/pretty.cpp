// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <string>

#include "preexp/syntax.hpp"

namespace preexp {
namespace {

std::string number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kAdd:
    case ExprKind::kSub:
      return 1;
    case ExprKind::kMul:
    case ExprKind::kDiv:
      return 2;
    default:
      return 3;
  }
}

void print(const Expr& e, std::string& out);

void print_operand(const Expr& e, bool parenthesise, std::string& out) {
  if (parenthesise) out += '(';
  print(e, out);
  if (parenthesise) out += ')';
}

void print(const Expr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::kLiteral:
      out += number(e.value);
      return;
    case ExprKind::kVar:
      out += e.var.name();
      return;
    case ExprKind::kAdd:
    case ExprKind::kSub:
    case ExprKind::kMul:
    case ExprKind::kDiv: {
      static constexpr const char* kOps[] = {" + ", " - ", " * ", " / "};
      int p = precedence(e);
      print_operand(*e.args[0], precedence(*e.args[0]) < p, out);
      out += kOps[static_cast<int>(e.kind) - static_cast<int>(ExprKind::kAdd)];
      print_operand(*e.args[1], precedence(*e.args[1]) <= p, out);
      return;
    }
    case ExprKind::kGaussianInvCdf:
    case ExprKind::kGaussianPdf:
    case ExprKind::kSoftEq: {
      out += e.kind == ExprKind::kGaussianInvCdf ? "gaussian_inv_cdf("
             : e.kind == ExprKind::kGaussianPdf  ? "gaussian_pdf("
                                                 : "softeq(";
      for (std::size_t i = 0; i < arity(e.kind); ++i) {
        if (i) out += ", ";
        print(*e.args[i], out);
      }
      out += ')';
      return;
    }
  }
}

int precedence(const Pred& p) {
  switch (p.kind) {
    case PredKind::kOr: return 1;
    case PredKind::kAnd: return 2;
    default: return 3;
  }
}

void print(const Pred& p, std::string& out) {
  switch (p.kind) {
    case PredKind::kBool:
      out += p.value ? "true" : "false";
      return;
    case PredKind::kAnd:
    case PredKind::kOr: {
      int prec = precedence(p);
      bool lp = precedence(*p.left) < prec, rp = precedence(*p.right) <= prec;
      if (lp) out += '(';
      print(*p.left, out);
      if (lp) out += ')';
      out += p.kind == PredKind::kAnd ? " && " : " || ";
      if (rp) out += '(';
      print(*p.right, out);
      if (rp) out += ')';
      return;
    }
    case PredKind::kNot: {
      bool atom = p.left->kind == PredKind::kBool || p.left->kind == PredKind::kNot;
      out += '!';
      if (!atom) out += '(';
      print(*p.left, out);
      if (!atom) out += ')';
      return;
    }
    default: {
      static constexpr const char* kOps[] = {" < ", " <= ", " = ", " >= ", " > "};
      print(*p.lhs, out);
      out += kOps[static_cast<int>(p.kind) - static_cast<int>(PredKind::kLt)];
      print(*p.rhs, out);
      return;
    }
  }
}

void indent(int depth, std::string& out) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void print(const Stmt& s, int depth, std::string& out);

// Body of a braced block: the statement's own sequence, one per line.
void print_block(const Stmt& s, int depth, std::string& out) {
  out += "{\n";
  print(s, depth + 1, out);
  out += '\n';
  indent(depth, out);
  out += '}';
}

void print(const Stmt& s, int depth, std::string& out) {
  switch (s.kind) {
    case StmtKind::kSeq: {
      // A left operand that is itself a sequence keeps its grouping with a
      // bare block so the tree shape survives a reparse.
      if (s.first->kind == StmtKind::kSeq) {
        indent(depth, out);
        print_block(*s.first, depth, out);
      } else {
        print(*s.first, depth, out);
      }
      out += ";\n";
      print(*s.second, depth, out);
      return;
    }
    default:
      break;
  }
  indent(depth, out);
  switch (s.kind) {
    case StmtKind::kSkip:
      out += "skip";
      return;
    case StmtKind::kDiverge:
      out += "diverge";
      return;
    case StmtKind::kAssign:
      out += s.var.name() + " := ";
      print(*s.expr, out);
      return;
    case StmtKind::kDraw:
      out += s.var.name() + " :~ U";
      return;
    case StmtKind::kObserve:
      out += "observe(";
      print(*s.pred, out);
      out += ')';
      return;
    case StmtKind::kScore:
      out += "score(";
      print(*s.expr, out);
      out += ')';
      return;
    case StmtKind::kIf:
    case StmtKind::kIfElse:
      out += "if (";
      print(*s.pred, out);
      out += ") ";
      print_block(*s.first, depth, out);
      if (s.kind == StmtKind::kIfElse) {
        out += " else ";
        print_block(*s.second, depth, out);
      }
      return;
    case StmtKind::kFlipIf:
      out += "if (flip(";
      print(*s.expr, out);
      out += ")) ";
      print_block(*s.first, depth, out);
      if (s.second) {
        out += " else ";
        print_block(*s.second, depth, out);
      }
      return;
    case StmtKind::kWhile:
      out += "while (";
      print(*s.pred, out);
      out += ") ";
      print_block(*s.first, depth, out);
      return;
    case StmtKind::kReturn:
      out += "return ";
      print(*s.expr, out);
      return;
    case StmtKind::kSeq:
      return;
  }
}

}  // namespace

std::string pretty(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string pretty(const Pred& p) {
  std::string out;
  print(p, out);
  return out;
}

std::string pretty(const Stmt& s) {
  std::string out;
  print(s, 0, out);
  return out;
}

}  // namespace preexp
