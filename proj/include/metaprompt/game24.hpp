#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metaprompt/errors.hpp"

namespace metaprompt::game24 {

/// Exact rational with a canonical representation: reduced, positive
/// denominator, zero is 0/1. Arithmetic runs on 128-bit intermediates.
class Rational {
public:
    Rational() = default;
    Rational(long long numerator, long long denominator);
    static Rational from_int(long long value) { return Rational(value, 1); }

    long long numerator() const { return num_; }
    long long denominator() const { return den_; }
    bool is_zero() const { return num_ == 0; }

    Rational operator+(const Rational& other) const;
    Rational operator-(const Rational& other) const;
    Rational operator*(const Rational& other) const;
    /// Division by zero is the caller's problem; check is_zero() first.
    Rational operator/(const Rational& other) const;

    friend bool operator==(const Rational&, const Rational&) = default;

    std::string to_string() const;

private:
    long long num_ = 0;
    long long den_ = 1;
};

struct ExprNode;
using ExprTree = std::shared_ptr<const ExprNode>;

struct ExprNode {
    // leaf when op == 0
    char op = 0;
    Rational value;          // leaf value
    int source_index = -1;   // which input number this leaf consumes
    ExprTree left, right;
};

ExprTree make_leaf(Rational value, int source_index);
ExprTree make_op(char op, ExprTree left, ExprTree right);

/// Exact bottom-up evaluation; nullopt when any division's right operand is 0
/// (the subtree is rejected, never a crash).
std::optional<Rational> eval_expr(const ExprTree& tree);

/// Fully parenthesized infix text, e.g. "((3+(3/7))*7)".
std::string render_expr(const ExprTree& tree);

/// Collects each leaf's source index in order (for leaf-conservation checks).
void collect_source_indices(const ExprTree& tree, std::vector<int>& out);

struct Puzzle {
    std::vector<int> numbers;  // exactly 4, each >= 1
    std::string raw;           // original text, e.g. "3 3 7 7"
};

/// Parses 4 space-separated integers; throws MalformedRow-style Error via
/// the batch path, or Error when called directly.
Puzzle parse_puzzle(const std::string& text);

enum class SolveMode { first, all };

inline constexpr long long kTarget = 24;

/// Enumerates every tree shape x leaf permutation x operator assignment over
/// exact rationals. A solution evaluates to exactly 24. mode==all returns the
/// set deduplicated by rendered string; mode==first short-circuits.
std::vector<ExprTree> solve(const Puzzle& puzzle, SolveMode mode);

/// Independent solvability check: repeatedly combines two numbers with each
/// operation and recurses on the reduced multiset.
bool oracle_solvable(const Puzzle& puzzle);

struct SolveReport {
    std::size_t total = 0;
    std::size_t solved = 0;
    double solve_rate_pct = 0.0;
    std::size_t oracle_solvable_count = 0;  // disambiguates lists holding unsolvable puzzles
    std::map<std::string, std::vector<std::string>> per_puzzle;  // raw -> rendered solutions
    double elapsed_seconds = 0.0;
};

/// Reads a CSV with a "Puzzles" column, solves every row (mode=all) across
/// worker threads, and writes "Puzzle,Solution" rows in input order. Solution
/// is a semicolon-joined list or the literal "No solution found".
SolveReport batch(const std::filesystem::path& csv_in, const std::filesystem::path& csv_out,
                  std::size_t workers = 0);

inline constexpr const char* kNoSolution = "No solution found";

}  // namespace metaprompt::game24
