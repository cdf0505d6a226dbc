#include "luk/logic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace luk {

FormulaPtr Formula::var(int index) {
  if (index < 0) throw std::invalid_argument("negative variable index");
  auto f = std::make_shared<Formula>();
  f->kind = NodeKind::Var;
  f->var_index = index;
  return f;
}

FormulaPtr Formula::constant(bool one) {
  auto f = std::make_shared<Formula>();
  f->kind = one ? NodeKind::Const1 : NodeKind::Const0;
  return f;
}

FormulaPtr Formula::make(NodeKind k, FormulaPtr l, FormulaPtr r) {
  auto f = std::make_shared<Formula>();
  f->kind = k;
  f->left = std::move(l);
  f->right = std::move(r);
  return f;
}

int Formula::arity() const {
  switch (kind) {
    case NodeKind::Var: return var_index + 1;
    case NodeKind::Const0:
    case NodeKind::Const1: return 0;
    default: {
      int a = left ? left->arity() : 0;
      if (right) a = std::max(a, right->arity());
      return a;
    }
  }
}

int Formula::size() const {
  int s = 1;
  if (left) s += left->size();
  if (right) s += right->size();
  return s;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == NodeKind::Var) return a.var_index == b.var_index;
  if (static_cast<bool>(a.left) != static_cast<bool>(b.left)) return false;
  if (static_cast<bool>(a.right) != static_cast<bool>(b.right)) return false;
  if (a.left && !structurally_equal(*a.left, *b.left)) return false;
  if (a.right && !structurally_equal(*a.right, *b.right)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over
//   iff  := imp ( "<->" imp )*          left-assoc
//   imp  := sum ( "->" imp )?           right-assoc
//   sum  := prod ( ("+"|"|") prod )*    left-assoc, "+" -> Oplus, "|" -> Or
//   prod := unary ( ("*"|"&") unary )*  left-assoc, "*" -> Otimes, "&" -> And
//   unary:= "!" unary | atom
//   atom := "0" | "1" | variable | "(" iff ")"

namespace {

struct Parser {
  const std::string& text;
  size_t pos = 0;
  std::vector<std::string> names;
  std::map<std::string, int> bound;

  explicit Parser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(const std::string& tok) {
    skip_ws();
    if (text.compare(pos, tok.size(), tok) == 0) {
      // "<->" must not be consumed as "->"'s prefix and vice versa; callers
      // test the longer token first, but guard "-" inside identifiers anyway.
      pos += tok.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

  FormulaPtr parse_iff() {
    auto lhs = parse_imp();
    while (true) {
      skip_ws();
      if (text.compare(pos, 3, "<->") == 0) {
        pos += 3;
        lhs = Formula::make(NodeKind::Iff, lhs, parse_imp());
      } else {
        return lhs;
      }
    }
  }

  FormulaPtr parse_imp() {
    auto lhs = parse_sum();
    skip_ws();
    if (text.compare(pos, 2, "->") == 0) {
      pos += 2;
      return Formula::make(NodeKind::Implies, lhs, parse_imp());
    }
    return lhs;
  }

  FormulaPtr parse_sum() {
    auto lhs = parse_prod();
    while (true) {
      skip_ws();
      if (pos < text.size() && text[pos] == '+') {
        ++pos;
        lhs = Formula::make(NodeKind::Oplus, lhs, parse_prod());
      } else if (pos < text.size() && text[pos] == '|') {
        ++pos;
        lhs = Formula::make(NodeKind::Or, lhs, parse_prod());
      } else {
        return lhs;
      }
    }
  }

  FormulaPtr parse_prod() {
    auto lhs = parse_unary();
    while (true) {
      skip_ws();
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        lhs = Formula::make(NodeKind::Otimes, lhs, parse_unary());
      } else if (pos < text.size() && text[pos] == '&') {
        ++pos;
        lhs = Formula::make(NodeKind::And, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  FormulaPtr parse_unary() {
    skip_ws();
    if (pos < text.size() && text[pos] == '!') {
      ++pos;
      return Formula::make(NodeKind::Not, parse_unary());
    }
    return parse_atom();
  }

  FormulaPtr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      auto inner = parse_iff();
      skip_ws();
      if (pos >= text.size() || text[pos] != ')') fail("expected ')'");
      ++pos;
      return inner;
    }
    if (c == '0' || c == '1') {
      // A bare digit is a constant; x-prefixed digits were consumed below.
      ++pos;
      return Formula::constant(c == '1');
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) ||
              text[pos] == '_' || text[pos] == '.' || text[pos] == '=')) {
        ++pos;
      }
      std::string name = text.substr(start, pos - start);
      if (name.size() > 1 && name[0] == 'x' &&
          std::all_of(name.begin() + 1, name.end(),
                      [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        return Formula::var(std::stoi(name.substr(1)));
      }
      auto it = bound.find(name);
      if (it == bound.end()) {
        int idx = static_cast<int>(names.size());
        names.push_back(name);
        it = bound.emplace(name, idx).first;
      }
      return Formula::var(it->second);
    }
    fail(std::string("unknown token '") + c + "'");
  }
};

int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Iff: return 0;
    case NodeKind::Implies: return 1;
    case NodeKind::Oplus:
    case NodeKind::Or: return 2;
    case NodeKind::Otimes:
    case NodeKind::And: return 3;
    case NodeKind::Not: return 4;
    default: return 5;
  }
}

void format_rec(const Formula& f, int parent_prec, std::string& out) {
  int prec = precedence(f.kind);
  switch (f.kind) {
    case NodeKind::Var:
      out += "x" + std::to_string(f.var_index);
      return;
    case NodeKind::Const0: out += "0"; return;
    case NodeKind::Const1: out += "1"; return;
    case NodeKind::Not:
      out += "!";
      format_rec(*f.left, prec, out);
      return;
    default: break;
  }
  const char* op = nullptr;
  switch (f.kind) {
    case NodeKind::Otimes: op = " * "; break;
    case NodeKind::And: op = " & "; break;
    case NodeKind::Oplus: op = " + "; break;
    case NodeKind::Or: op = " | "; break;
    case NodeKind::Implies: op = " -> "; break;
    case NodeKind::Iff: op = " <-> "; break;
    default: break;
  }
  bool need_parens = prec < parent_prec;
  if (need_parens) out += "(";
  if (f.kind == NodeKind::Implies) {
    // right-assoc: the left child needs parens at equal precedence
    format_rec(*f.left, prec + 1, out);
    out += op;
    format_rec(*f.right, prec, out);
  } else {
    format_rec(*f.left, prec, out);
    out += op;
    format_rec(*f.right, prec + 1, out);
  }
  if (need_parens) out += ")";
}

}  // namespace

FormulaPtr parse_formula(const std::string& text, std::vector<std::string>& names_out) {
  Parser p(text);
  auto f = p.parse_iff();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  names_out = p.names;
  return f;
}

FormulaPtr parse_formula(const std::string& text) {
  std::vector<std::string> names;
  return parse_formula(text, names);
}

std::string format_formula(const Formula& f) {
  std::string out;
  format_rec(f, 0, out);
  return out;
}

FormulaPtr expand_derived(const Formula& f) {
  switch (f.kind) {
    case NodeKind::Var: return Formula::var(f.var_index);
    case NodeKind::Const0: return Formula::constant(false);
    case NodeKind::Const1:
      // 1 is 0 -> 0
      return Formula::make(NodeKind::Implies, Formula::constant(false),
                           Formula::constant(false));
    case NodeKind::Not:
      return Formula::make(NodeKind::Implies, expand_derived(*f.left),
                           Formula::constant(false));
    case NodeKind::Otimes:
      return Formula::make(NodeKind::Otimes, expand_derived(*f.left),
                           expand_derived(*f.right));
    case NodeKind::Implies:
      return Formula::make(NodeKind::Implies, expand_derived(*f.left),
                           expand_derived(*f.right));
    case NodeKind::Oplus: {
      // x + y  =  !(!x * !y)  =  (x -> 0 * (y -> 0)) -> 0 after expansion
      auto nx = Formula::make(NodeKind::Implies, expand_derived(*f.left),
                              Formula::constant(false));
      auto ny = Formula::make(NodeKind::Implies, expand_derived(*f.right),
                              Formula::constant(false));
      return Formula::make(NodeKind::Implies,
                           Formula::make(NodeKind::Otimes, nx, ny),
                           Formula::constant(false));
    }
    case NodeKind::And: {
      // x & y  =  x * (x -> y)
      auto x = expand_derived(*f.left);
      auto y = expand_derived(*f.right);
      return Formula::make(NodeKind::Otimes, x,
                           Formula::make(NodeKind::Implies, x, y));
    }
    case NodeKind::Or: {
      // x | y  =  ((x -> y) -> y) & ((y -> x) -> x)
      auto x = expand_derived(*f.left);
      auto y = expand_derived(*f.right);
      auto l = Formula::make(NodeKind::Implies,
                             Formula::make(NodeKind::Implies, x, y), y);
      auto r = Formula::make(NodeKind::Implies,
                             Formula::make(NodeKind::Implies, y, x), x);
      return Formula::make(NodeKind::Otimes, l,
                           Formula::make(NodeKind::Implies, l, r));
    }
    case NodeKind::Iff: {
      // x <-> y  =  (x -> y) * (y -> x)
      auto x = expand_derived(*f.left);
      auto y = expand_derived(*f.right);
      return Formula::make(NodeKind::Otimes,
                           Formula::make(NodeKind::Implies, x, y),
                           Formula::make(NodeKind::Implies, y, x));
    }
  }
  throw std::logic_error("unhandled node kind");
}

TruthValue eval_formula(const Formula& f, const std::vector<TruthValue>& v) {
  switch (f.kind) {
    case NodeKind::Var:
      if (static_cast<size_t>(f.var_index) >= v.size())
        throw std::out_of_range("assignment too short for formula arity");
      return v[f.var_index];
    case NodeKind::Const0: return 0.0;
    case NodeKind::Const1: return 1.0;
    case NodeKind::Not: return 1.0 - eval_formula(*f.left, v);
    case NodeKind::Otimes: {
      double a = eval_formula(*f.left, v), b = eval_formula(*f.right, v);
      return std::max(0.0, a + b - 1.0);
    }
    case NodeKind::Oplus: {
      double a = eval_formula(*f.left, v), b = eval_formula(*f.right, v);
      return std::min(1.0, a + b);
    }
    case NodeKind::Implies: {
      double a = eval_formula(*f.left, v), b = eval_formula(*f.right, v);
      return std::min(1.0, 1.0 - a + b);
    }
    case NodeKind::And:
      return std::min(eval_formula(*f.left, v), eval_formula(*f.right, v));
    case NodeKind::Or:
      return std::max(eval_formula(*f.left, v), eval_formula(*f.right, v));
    case NodeKind::Iff:
      return 1.0 - std::abs(eval_formula(*f.left, v) - eval_formula(*f.right, v));
  }
  throw std::logic_error("unhandled node kind");
}

std::vector<TruthValue> TruthTable::point(size_t index) const {
  std::vector<TruthValue> p(arity);
  size_t rest = index;
  for (int j = 0; j < arity; ++j) {
    size_t digit = rest % (resolution + 1);
    rest /= (resolution + 1);
    p[j] = static_cast<double>(digit) / resolution;
  }
  return p;
}

size_t grid_size(int arity, int resolution, size_t budget) {
  if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
  size_t total = 1;
  for (int j = 0; j < arity; ++j) {
    if (total > budget / (resolution + 1) + 1) {
      throw std::overflow_error("truth table exceeds size budget");
    }
    total *= resolution + 1;
  }
  if (total > budget) throw std::overflow_error("truth table exceeds size budget");
  return total;
}

TruthTable truth_subtable(const Formula& f, int resolution, size_t budget) {
  TruthTable t;
  t.arity = f.arity();
  t.resolution = resolution;
  size_t total = grid_size(t.arity, resolution, budget);
  t.values.resize(total);
  std::vector<TruthValue> p(t.arity, 0.0);
  std::vector<int> digits(t.arity, 0);
  for (size_t i = 0; i < total; ++i) {
    t.values[i] = eval_formula(f, p);
    for (int j = 0; j < t.arity; ++j) {
      if (++digits[j] <= resolution) {
        p[j] = static_cast<double>(digits[j]) / resolution;
        break;
      }
      digits[j] = 0;
      p[j] = 0.0;
    }
  }
  return t;
}

void write_truth_table_csv(const TruthTable& t, std::ostream& out) {
  for (int j = 0; j < t.arity; ++j) out << "x" << j << ",";
  out << "y\n";
  std::ostringstream cell;
  cell.precision(12);
  for (size_t i = 0; i < t.values.size(); ++i) {
    auto p = t.point(i);
    for (int j = 0; j < t.arity; ++j) {
      cell.str("");
      cell << p[j];
      out << cell.str() << ",";
    }
    cell.str("");
    cell << t.values[i];
    out << cell.str() << "\n";
  }
}

TruthTable read_truth_table_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty truth table file");
  int cols = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
  TruthTable t;
  t.arity = cols - 1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != cols)
      throw std::runtime_error("ragged row in truth table file");
    rows.push_back(std::move(row));
  }
  // Infer the resolution from the row count when the file is a full grid.
  size_t count = rows.size();
  t.resolution = 1;
  for (int n = 1; n <= 64; ++n) {
    size_t total = 1;
    bool ok = true;
    for (int j = 0; j < t.arity; ++j) {
      total *= n + 1;
      if (total > count) { ok = false; break; }
    }
    if (ok && total == count) { t.resolution = n; break; }
  }
  t.values.reserve(count);
  for (auto& r : rows) t.values.push_back(r.back());
  return t;
}

}  // namespace luk
