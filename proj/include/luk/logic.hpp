#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace luk {

/// Truth values live in [0,1]; stored as doubles, grid points are always
/// formed as k/n at the use site so subtable entries stay exact.
using TruthValue = double;

enum class NodeKind {
  Var,
  Const0,
  Const1,
  Not,
  Otimes,   // strong conjunction  x*y = max(0, x+y-1)
  Oplus,    // bounded sum         x+y = min(1, x+y)
  Implies,  // residuum            x->y = min(1, 1-x+y)
  And,      // min
  Or,       // max
  Iff,      // 1-|x-y|
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable AST node. Shared subtrees are allowed but not required.
struct Formula {
  NodeKind kind;
  int var_index = -1;  // valid when kind == Var
  FormulaPtr left;     // unary ops use left only
  FormulaPtr right;

  static FormulaPtr var(int index);
  static FormulaPtr constant(bool one);
  static FormulaPtr make(NodeKind k, FormulaPtr l, FormulaPtr r = nullptr);

  /// 1 + max variable index, 0 if the formula has no variables.
  int arity() const;
  /// Number of nodes; used for tie-breaking in approximation search.
  int size() const;
};

bool structurally_equal(const Formula& a, const Formula& b);

struct ParseError : std::runtime_error {
  size_t position;
  ParseError(const std::string& what, size_t pos)
      : std::runtime_error(what), position(pos) {}
};

/// Grammar (loosest to tightest): `<->`, `->` (right-assoc), `+`/`|`,
/// `*`/`&`, `!`, atoms. Variables are `x<digits>` or identifiers bound to
/// indices in first-occurrence order.
FormulaPtr parse_formula(const std::string& text);

/// Same, but also reports the name binding (index -> name) so tables built
/// from named variables are reproducible.
FormulaPtr parse_formula(const std::string& text, std::vector<std::string>& names_out);

std::string format_formula(const Formula& f);

/// Rewrites ¬, ⊕, ∧, ∨, ⇔ and the constant 1 into {Var, Const0, ⊗, ⇒}.
FormulaPtr expand_derived(const Formula& f);

TruthValue eval_formula(const Formula& f, const std::vector<TruthValue>& assignment);

/// Exhaustive table over (S_n)^m, mixed-radix indexed with variable 0 as the
/// least significant digit.
struct TruthTable {
  int arity = 0;
  int resolution = 1;  // n; grid S_n has n+1 points per axis
  std::vector<TruthValue> values;

  size_t size() const { return values.size(); }
  /// Decodes row index -> grid point.
  std::vector<TruthValue> point(size_t index) const;
};

inline constexpr size_t kDefaultTableBudget = size_t{1} << 24;

/// Number of grid points (n+1)^m; throws on budget overflow.
size_t grid_size(int arity, int resolution, size_t budget = kDefaultTableBudget);

TruthTable truth_subtable(const Formula& f, int resolution,
                          size_t budget = kDefaultTableBudget);

/// CSV with header x0,...,x{m-1},y; 12 significant digits.
void write_truth_table_csv(const TruthTable& t, std::ostream& out);
TruthTable read_truth_table_csv(std::istream& in);

}  // namespace luk
