#include "acep/parser.hpp"

#include <cctype>
#include <cstdio>
#include <optional>
#include <set>
#include <unordered_map>

namespace acep {

namespace {

enum class Tok { Ident, Number, LParen, RParen, Comma, Dot, Star, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return cur_; }

  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError("syntax error: expected " + expected + ", got '" +
                         (cur_.kind == Tok::End ? "<end>" : cur_.text) + "'",
                     cur_.offset);
  }

  Token expect(Tok kind, const std::string& what) {
    if (cur_.kind != kind) fail(what);
    return take();
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    cur_ = Token{};
    cur_.offset = pos_;
    if (pos_ >= text_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = text_[pos_];
    auto two = text_.substr(pos_, 2);
    if (two == "<=" || two == ">=" || two == "!=") {
      cur_.kind = Tok::Op;
      cur_.text = two;
      pos_ += 2;
      return;
    }
    if (c == '<' || c == '>' || c == '=') {
      cur_.kind = Tok::Op;
      cur_.text = std::string(1, c);
      ++pos_;
      return;
    }
    bool structural = true;
    switch (c) {
      case '(': cur_.kind = Tok::LParen; break;
      case ')': cur_.kind = Tok::RParen; break;
      case ',': cur_.kind = Tok::Comma; break;
      case '.':
        // A dot directly followed by a digit starts a number like ".5".
        if (pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
          structural = false;
          break;
        }
        cur_.kind = Tok::Dot;
        break;
      case '*': cur_.kind = Tok::Star; break;
      default: structural = false; break;
    }
    if (structural) {
      cur_.text = std::string(1, c);
      ++pos_;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      size_t start = pos_;
      if (c == '-' || c == '+') ++pos_;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
              text_[pos_] == 'e' || text_[pos_] == 'E' ||
              ((text_[pos_] == '-' || text_[pos_] == '+') &&
               (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
        ++pos_;
      cur_.kind = Tok::Number;
      cur_.text = text_.substr(start, pos_ - start);
      try {
        cur_.number = std::stod(cur_.text);
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + cur_.text + "'", start);
      }
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      cur_.kind = Tok::Ident;
      cur_.text = text_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  const std::string& text_;
  size_t pos_ = 0;
  Token cur_;
};

struct VarBinding {
  int disjunct;  // -1 for a non-Or pattern
  int pos;
};

CmpOp parse_op(const std::string& s, size_t offset) {
  if (s == "<") return CmpOp::Lt;
  if (s == "<=") return CmpOp::Le;
  if (s == "=") return CmpOp::Eq;
  if (s == ">=") return CmpOp::Ge;
  if (s == ">") return CmpOp::Gt;
  if (s == "!=") return CmpOp::Ne;
  throw ParseError("unknown comparison operator '" + s + "'", offset);
}

CmpOp flip_op(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Ge: return CmpOp::Le;
    default: return op;
  }
}

class PatternParser {
 public:
  explicit PatternParser(const std::string& text) : lex_(text) {}

  Pattern run() {
    expect_keyword("PATTERN");
    Pattern p = parse_group(/*allow_or=*/true);
    if (lex_.peek().kind == Tok::Ident && lex_.peek().text == "WHERE") {
      lex_.take();
      parse_where(p);
    }
    expect_keyword("WITHIN");
    p.window_ms = parse_window();
    if (lex_.peek().kind != Tok::End) lex_.fail("end of input");
    assign_window(p, p.window_ms);
    validate(p);
    return p;
  }

 private:
  void expect_keyword(const std::string& kw) {
    if (lex_.peek().kind != Tok::Ident || lex_.peek().text != kw) lex_.fail("'" + kw + "'");
    lex_.take();
  }

  Pattern parse_group(bool allow_or) {
    Token name = lex_.expect(Tok::Ident, "operator (SEQ, AND or OR)");
    Pattern p;
    if (name.text == "SEQ")
      p.op = PatternOp::Seq;
    else if (name.text == "AND")
      p.op = PatternOp::And;
    else if (name.text == "OR") {
      if (!allow_or) throw ParseError("OR may not be nested", name.offset);
      p.op = PatternOp::Or;
    } else {
      throw ParseError("unknown operator '" + name.text + "'", name.offset);
    }
    lex_.expect(Tok::LParen, "'('");
    if (p.op == PatternOp::Or) {
      int di = 0;
      for (;;) {
        Pattern child = parse_group(/*allow_or=*/false);
        register_vars(child, di++);
        p.disjuncts.push_back(std::move(child));
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
      if (p.disjuncts.size() < 2) throw ParseError("OR requires at least two sub-patterns", name.offset);
    } else {
      for (;;) {
        parse_position(p);
        if (lex_.peek().kind == Tok::Comma) {
          lex_.take();
          continue;
        }
        break;
      }
      finalize_ids(p);
    }
    lex_.expect(Tok::RParen, "')'");
    return p;
  }

  void parse_position(Pattern& p) {
    Position pos;
    Token t = lex_.expect(Tok::Ident, "event type name");
    if (t.text == "NOT") {
      pos.negated = true;
      t = lex_.expect(Tok::Ident, "event type name");
    }
    pos.type.name = t.text;
    if (lex_.peek().kind == Tok::Star) {
      lex_.take();
      pos.kleene = true;
    }
    Token var = lex_.expect(Tok::Ident, "variable name");
    pos.var = var.text;
    if (pos.negated && pos.kleene)
      throw ParseError("a position cannot be both negated and Kleene", t.offset);
    for (const auto& other : p.positions) {
      if (other.var == pos.var) throw ParseError("duplicate variable '" + pos.var + "'", var.offset);
      if (other.type.name == pos.type.name)
        throw ParseError("duplicate event type '" + pos.type.name + "'", t.offset);
    }
    p.positions.push_back(std::move(pos));
  }

  // Non-negated positions get ids 0..n-1 in declaration order, negated follow.
  void finalize_ids(Pattern& p) {
    TypeId next = 0;
    for (auto& pos : p.positions)
      if (!pos.negated) pos.type.id = next++;
    for (auto& pos : p.positions)
      if (pos.negated) pos.type.id = next++;
  }

  void register_vars(const Pattern& p, int disjunct) {
    for (int i = 0; i < p.position_count(); ++i) vars_[p.positions[static_cast<size_t>(i)].var] = {disjunct, i};
  }

  struct Operand {
    bool is_const = false;
    double value = 0.0;
    std::string var;
    std::string attr;
    size_t offset = 0;
  };

  Operand parse_operand() {
    Operand o;
    const Token& t = lex_.peek();
    o.offset = t.offset;
    if (t.kind == Tok::Number) {
      o.is_const = true;
      o.value = lex_.take().number;
      return o;
    }
    Token var = lex_.expect(Tok::Ident, "variable or number");
    lex_.expect(Tok::Dot, "'.'");
    Token attr = lex_.expect(Tok::Ident, "attribute name");
    o.var = var.text;
    o.attr = attr.text;
    return o;
  }

  void parse_where(Pattern& p) {
    if (!p.is_or())
      for (int i = 0; i < p.position_count(); ++i) vars_[p.positions[static_cast<size_t>(i)].var] = {-1, i};
    parse_conjunction(p);
  }

  void parse_conjunction(Pattern& p) {
    parse_term(p);
    while (lex_.peek().kind == Tok::Ident && lex_.peek().text == "AND") {
      lex_.take();
      parse_term(p);
    }
  }

  void parse_term(Pattern& p) {
    if (lex_.peek().kind == Tok::LParen) {
      // Either a parenthesized conjunction or a parenthesized comparison;
      // parse_conjunction covers both.
      lex_.take();
      parse_conjunction(p);
      lex_.expect(Tok::RParen, "')'");
      return;
    }
    parse_comparison(p);
  }

  VarBinding lookup(const Operand& o) {
    auto it = vars_.find(o.var);
    if (it == vars_.end()) throw ParseError("unknown variable '" + o.var + "' in WHERE", o.offset);
    return it->second;
  }

  void parse_comparison(Pattern& p) {
    Operand lhs = parse_operand();
    Token op_tok = lex_.expect(Tok::Op, "comparison operator");
    CmpOp op = parse_op(op_tok.text, op_tok.offset);
    Operand rhs = parse_operand();
    if (lhs.is_const && rhs.is_const)
      throw ParseError("comparison between two constants", op_tok.offset);
    if (lhs.is_const) {  // normalize to position-first form
      std::swap(lhs, rhs);
      op = flip_op(op);
    }
    Predicate pred;
    VarBinding lb = lookup(lhs);
    pred.lattr = lhs.attr;
    if (rhs.is_const) {
      pred.rhs_is_const = true;
      pred.constant = rhs.value;
    } else {
      VarBinding rb = lookup(rhs);
      if (rb.disjunct != lb.disjunct)
        throw ParseError("predicate references variables from different disjuncts", op_tok.offset);
      pred.rattr = rhs.attr;
      Pattern& target = lb.disjunct < 0 ? p : p.disjuncts[static_cast<size_t>(lb.disjunct)];
      pred.lpos = target.positions[static_cast<size_t>(lb.pos)].type.id;
      pred.rpos = target.positions[static_cast<size_t>(rb.pos)].type.id;
      pred.op = op;
      target.predicates.push_back(pred);
      return;
    }
    Pattern& target = lb.disjunct < 0 ? p : p.disjuncts[static_cast<size_t>(lb.disjunct)];
    pred.lpos = target.positions[static_cast<size_t>(lb.pos)].type.id;
    pred.op = op;
    target.predicates.push_back(pred);
  }

  Timestamp parse_window() {
    Token num = lex_.expect(Tok::Number, "window length");
    Token unit = lex_.expect(Tok::Ident, "time unit");
    double scale;
    const std::string& u = unit.text;
    if (u == "ms" || u == "millisecond" || u == "milliseconds")
      scale = 1;
    else if (u == "s" || u == "sec" || u == "second" || u == "seconds")
      scale = 1000;
    else if (u == "m" || u == "min" || u == "minute" || u == "minutes")
      scale = 60'000;
    else if (u == "h" || u == "hour" || u == "hours")
      scale = 3'600'000;
    else
      throw ParseError("unknown time unit '" + u + "'", unit.offset);
    double ms = num.number * scale;
    if (!(ms > 0)) throw ParseError("window must be positive", num.offset);
    return static_cast<Timestamp>(ms);
  }

  static void assign_window(Pattern& p, Timestamp w) {
    p.window_ms = w;
    for (auto& d : p.disjuncts) assign_window(d, w);
  }

  static void validate(const Pattern& p) {
    if (p.is_or()) {
      for (const auto& d : p.disjuncts) validate(d);
      return;
    }
    if (pattern_size(p) < 1)
      throw ParseError("pattern needs at least one non-negated position", 0);
  }

  Lexer lex_;
  std::unordered_map<std::string, VarBinding> vars_;
};

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void render_group(const Pattern& p, std::string& out) {
  out += p.op == PatternOp::Seq ? "SEQ(" : p.op == PatternOp::And ? "AND(" : "OR(";
  if (p.is_or()) {
    for (size_t i = 0; i < p.disjuncts.size(); ++i) {
      if (i) out += ",";
      render_group(p.disjuncts[i], out);
    }
  } else {
    for (size_t i = 0; i < p.positions.size(); ++i) {
      const auto& pos = p.positions[i];
      if (i) out += ",";
      if (pos.negated) out += "NOT ";
      out += pos.type.name;
      if (pos.kleene) out += "*";
      out += " " + pos.var;
    }
  }
  out += ")";
}

void render_predicates(const Pattern& p, std::string& out, bool& first) {
  for (const auto& pred : p.predicates) {
    if (!first) out += " AND ";
    first = false;
    const Position* lp = nullptr;
    const Position* rp = nullptr;
    for (const auto& pos : p.positions) {
      if (pos.type.id == pred.lpos) lp = &pos;
      if (!pred.rhs_is_const && pos.type.id == pred.rpos) rp = &pos;
    }
    out += "(" + lp->var + "." + pred.lattr + " " + cmp_op_text(pred.op) + " ";
    out += pred.rhs_is_const ? format_number(pred.constant) : rp->var + "." + pred.rattr;
    out += ")";
  }
  for (const auto& d : p.disjuncts) render_predicates(d, out, first);
}

bool has_predicates(const Pattern& p) {
  if (!p.predicates.empty()) return true;
  for (const auto& d : p.disjuncts)
    if (has_predicates(d)) return true;
  return false;
}

}  // namespace

Pattern parse_pattern(const std::string& text) { return PatternParser(text).run(); }

std::string render_pattern(const Pattern& p) {
  std::string out = "PATTERN ";
  render_group(p, out);
  if (has_predicates(p)) {
    out += " WHERE (";
    bool first = true;
    render_predicates(p, out, first);
    out += ")";
  }
  out += " WITHIN " + std::to_string(p.window_ms) + " ms";
  return out;
}

}  // namespace acep
