#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metaprompt/errors.hpp"

namespace metaprompt::eval {

enum class AnswerSource { boxed, answer_phrase, none };

std::string to_string(AnswerSource source);

struct ExtractedAnswer {
    std::string text;
    AnswerSource source = AnswerSource::none;
};

/// Pulls the model's final answer out of a response: the content of the last
/// \boxed{...} (balanced braces, escapes honored); failing that, the text
/// after the last "The answer is" up to the end of the sentence. Total on
/// arbitrary input.
ExtractedAnswer extract_answer(const std::string& response);

/// Normalizes an answer string: strips surrounding $, removes \left/\right,
/// collapses whitespace, \dfrac/\tfrac -> \frac, strips trailing periods and
/// trailing \% / ^\circ markers, drops \!, and removes thousands separators
/// from plain integers. Idempotent.
std::string normalize(const std::string& answer);

/// normalize() plus the stripped unit flags, which gate equivalence.
struct NormalizedAnswer {
    std::string text;
    bool percent = false;
    bool degrees = false;
};

NormalizedAnswer normalize_ex(const std::string& answer);

// ---------------------------------------------------------------------------
// Math AST

enum class NodeKind {
    integer,
    rational,
    decimal,
    symbol,
    neg,
    binary,   // op in + - * / ^
    function, // sqrt, abs (frac folds to rational or division at parse time)
    pi,
    interval,
    tuple,
};

struct MathExpr;
using ExprPtr = std::shared_ptr<const MathExpr>;

struct MathExpr {
    NodeKind kind = NodeKind::integer;
    long long int_value = 0;                        // integer
    long long numerator = 0, denominator = 1;       // rational; decimal's exact value
    std::string name;                               // symbol / function name
    char op = 0;                                    // binary operator
    std::vector<ExprPtr> children;                  // operands / args / elements / endpoints
    bool lo_closed = false, hi_closed = false;      // interval closures
};

/// Parses a normalized answer into an AST; nullopt when the grammar does not
/// cover the input (the unparseable carrier, not an exception).
std::optional<ExprPtr> parse_math(const std::string& normalized);

/// Sorts commutative operands by a stable key, folds exact-rational subtrees,
/// simplifies sqrt of perfect squares, and rewrites a-b as a+(-b) so sums
/// compare order-free.
ExprPtr canonicalize(const ExprPtr& expr);

/// Deterministic structural key; canonicalized trees are equal iff keys are.
std::string expr_key(const ExprPtr& expr);

/// True when the tree contains no free symbols (pi counts as numeric).
bool closed_form_numeric(const ExprPtr& expr);

/// Evaluates to double where defined (division by zero, sqrt of a negative
/// and symbolic leaves yield nullopt).
std::optional<double> eval_double(const ExprPtr& expr);

// ---------------------------------------------------------------------------
// Verdicts and scoring

enum class VerdictKind { equivalent, not_equivalent, unparseable };
enum class Method { string_match, symbolic, numeric };

std::string to_string(VerdictKind kind);
std::string to_string(Method method);

struct Verdict {
    VerdictKind kind = VerdictKind::not_equivalent;
    std::optional<Method> method;  // present iff equivalent
    bool is_equivalent() const { return kind == VerdictKind::equivalent; }
};

/// The rule-based equivalence pipeline: normalized string equality, then
/// canonical structural equality, then numeric comparison (exact rationals
/// where possible, else absolute tolerance 1e-6). unparseable only when both
/// sides fail to parse and the normalized strings differ.
Verdict equivalent(const std::string& gold, const std::string& candidate);

inline constexpr double kNumericTolerance = 1e-6;

struct SampleRecord {
    std::string task_id;
    std::string statement;     // the problem text put to the model
    std::string subject;       // e.g. "Algebra"; empty when unlabeled
    std::optional<int> level;  // 1..5 when present
    std::string gold;
    std::string response;      // full model output
};

struct EvalReport {
    double overall_pct = 0.0;             // one decimal
    std::map<std::string, double> per_type;
    std::map<int, double> per_level;
    std::size_t empty_samples = 0;
    std::size_t total = 0;
};

/// PASS@1 aggregation with per-type and per-level breakdowns; percentages are
/// rounded to one decimal. Throws LengthMismatch when inputs are misaligned.
EvalReport score(const std::vector<SampleRecord>& records, const std::vector<Verdict>& verdicts);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json_text);

/// Rounds a ratio to a one-decimal percentage.
double percentage(std::size_t correct, std::size_t total);

}  // namespace metaprompt::eval
