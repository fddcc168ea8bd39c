#include "metaprompt/game24.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace metaprompt::game24 {

namespace {

long long checked_narrow(__int128 value) {
    if (value > INT64_MAX || value < INT64_MIN) throw Error("rational overflow");
    return static_cast<long long>(value);
}

__int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational reduced(__int128 num, __int128 den) {
    if (den == 0) throw Error("zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(checked_narrow(num), checked_narrow(den));
}

}  // namespace

Rational::Rational(long long numerator, long long denominator) {
    if (denominator == 0) throw Error("zero denominator");
    if (denominator < 0) {
        numerator = -numerator;
        denominator = -denominator;
    }
    long long g = std::gcd(numerator < 0 ? -numerator : numerator, denominator);
    if (g > 1) {
        numerator /= g;
        denominator /= g;
    }
    num_ = numerator;
    den_ = denominator;
}

Rational Rational::operator+(const Rational& other) const {
    return reduced(static_cast<__int128>(num_) * other.den_ +
                       static_cast<__int128>(other.num_) * den_,
                   static_cast<__int128>(den_) * other.den_);
}

Rational Rational::operator-(const Rational& other) const {
    return reduced(static_cast<__int128>(num_) * other.den_ -
                       static_cast<__int128>(other.num_) * den_,
                   static_cast<__int128>(den_) * other.den_);
}

Rational Rational::operator*(const Rational& other) const {
    return reduced(static_cast<__int128>(num_) * other.num_,
                   static_cast<__int128>(den_) * other.den_);
}

Rational Rational::operator/(const Rational& other) const {
    return reduced(static_cast<__int128>(num_) * other.den_,
                   static_cast<__int128>(den_) * other.num_);
}

std::string Rational::to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

ExprTree make_leaf(Rational value, int source_index) {
    ExprNode node;
    node.value = value;
    node.source_index = source_index;
    return std::make_shared<const ExprNode>(std::move(node));
}

ExprTree make_op(char op, ExprTree left, ExprTree right) {
    ExprNode node;
    node.op = op;
    node.left = std::move(left);
    node.right = std::move(right);
    return std::make_shared<const ExprNode>(std::move(node));
}

std::optional<Rational> eval_expr(const ExprTree& tree) {
    if (tree->op == 0) return tree->value;
    auto left = eval_expr(tree->left);
    auto right = eval_expr(tree->right);
    if (!left || !right) return std::nullopt;
    switch (tree->op) {
        case '+': return *left + *right;
        case '-': return *left - *right;
        case '*': return *left * *right;
        case '/':
            if (right->is_zero()) return std::nullopt;
            return *left / *right;
    }
    return std::nullopt;
}

std::string render_expr(const ExprTree& tree) {
    if (tree->op == 0) return tree->value.to_string();
    return "(" + render_expr(tree->left) + tree->op + render_expr(tree->right) + ")";
}

void collect_source_indices(const ExprTree& tree, std::vector<int>& out) {
    if (tree->op == 0) {
        out.push_back(tree->source_index);
        return;
    }
    collect_source_indices(tree->left, out);
    collect_source_indices(tree->right, out);
}

Puzzle parse_puzzle(const std::string& text) {
    Puzzle puzzle;
    puzzle.raw = text;
    std::istringstream in(text);
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(token, &used);
        } catch (const std::exception&) {
            throw Error("puzzle token is not an integer: \"" + token + "\"");
        }
        if (used != token.size() || value < 1) {
            throw Error("puzzle numbers must be integers >= 1: \"" + token + "\"");
        }
        puzzle.numbers.push_back(value);
    }
    if (puzzle.numbers.size() != 4) {
        throw Error("puzzle must contain exactly 4 numbers: \"" + text + "\"");
    }
    return puzzle;
}

namespace {

constexpr char kOps[] = {'+', '-', '*', '/'};

/// All binary trees over leaves[lo..hi), operators enumerated per node.
void enumerate_trees(const std::vector<ExprTree>& leaves, std::size_t lo, std::size_t hi,
                     std::vector<ExprTree>& out) {
    if (hi - lo == 1) {
        out.push_back(leaves[lo]);
        return;
    }
    for (std::size_t mid = lo + 1; mid < hi; ++mid) {
        std::vector<ExprTree> lefts, rights;
        enumerate_trees(leaves, lo, mid, lefts);
        enumerate_trees(leaves, mid, hi, rights);
        for (const auto& left : lefts) {
            for (const auto& right : rights) {
                for (char op : kOps) out.push_back(make_op(op, left, right));
            }
        }
    }
}

}  // namespace

std::vector<ExprTree> solve(const Puzzle& puzzle, SolveMode mode) {
    const Rational target = Rational::from_int(kTarget);
    std::vector<int> order(puzzle.numbers.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end());

    std::vector<ExprTree> solutions;
    std::set<std::string> seen;
    do {
        std::vector<ExprTree> leaves;
        leaves.reserve(order.size());
        for (int index : order) {
            leaves.push_back(make_leaf(Rational::from_int(puzzle.numbers[index]), index));
        }
        std::vector<ExprTree> trees;
        enumerate_trees(leaves, 0, leaves.size(), trees);
        for (const auto& tree : trees) {
            auto value = eval_expr(tree);
            if (!value || !(*value == target)) continue;
            if (mode == SolveMode::first) return {tree};
            std::string rendered = render_expr(tree);
            if (seen.insert(std::move(rendered)).second) solutions.push_back(tree);
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return solutions;
}

namespace {

bool combine_search(std::vector<Rational>& values) {
    if (values.size() == 1) return values[0] == Rational::from_int(kTarget);
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (i == j) continue;
            std::vector<Rational> rest;
            rest.reserve(values.size() - 1);
            for (std::size_t k = 0; k < values.size(); ++k) {
                if (k != i && k != j) rest.push_back(values[k]);
            }
            const Rational a = values[i];
            const Rational b = values[j];
            for (char op : kOps) {
                if (op == '/' && b.is_zero()) continue;
                Rational combined = op == '+'   ? a + b
                                    : op == '-' ? a - b
                                    : op == '*' ? a * b
                                                : a / b;
                rest.push_back(combined);
                if (combine_search(rest)) return true;
                rest.pop_back();
            }
        }
    }
    return false;
}

}  // namespace

bool oracle_solvable(const Puzzle& puzzle) {
    std::vector<Rational> values;
    values.reserve(puzzle.numbers.size());
    for (int n : puzzle.numbers) values.push_back(Rational::from_int(n));
    return combine_search(values);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    if (!fields.empty() && !fields.back().empty() && fields.back().back() == '\r') {
        fields.back().pop_back();
    }
    return fields;
}

}  // namespace

SolveReport batch(const std::filesystem::path& csv_in, const std::filesystem::path& csv_out,
                  std::size_t workers) {
    std::ifstream in(csv_in);
    if (!in) throw IoError("cannot open puzzle file: " + csv_in.string());
    std::string header;
    if (!std::getline(in, header)) throw MissingColumn("Puzzles");
    auto columns = split_csv_line(header);
    std::size_t puzzle_column = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == "Puzzles") puzzle_column = i;
    }
    if (puzzle_column == columns.size()) throw MissingColumn("Puzzles");

    std::vector<Puzzle> puzzles;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() <= puzzle_column) throw MalformedRow(row, line);
        try {
            puzzles.push_back(parse_puzzle(fields[puzzle_column]));
        } catch (const Error&) {
            throw MalformedRow(row, fields[puzzle_column]);
        }
    }

    const auto start = std::chrono::steady_clock::now();
    std::vector<std::vector<std::string>> rendered(puzzles.size());
    if (workers == 0) workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = std::min(workers, puzzles.size() ? puzzles.size() : std::size_t{1});

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> oracle_count{0};
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= puzzles.size()) return;
            auto solutions = solve(puzzles[i], SolveMode::all);
            rendered[i].reserve(solutions.size());
            for (const auto& tree : solutions) rendered[i].push_back(render_expr(tree));
            if (oracle_solvable(puzzles[i])) oracle_count.fetch_add(1);
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    const auto end = std::chrono::steady_clock::now();

    std::ofstream out(csv_out, std::ios::binary);
    if (!out) throw IoError("cannot write solution file: " + csv_out.string());
    out << "Puzzle,Solution\n";
    SolveReport report;
    report.total = puzzles.size();
    for (std::size_t i = 0; i < puzzles.size(); ++i) {
        std::string joined;
        if (rendered[i].empty()) {
            joined = kNoSolution;
        } else {
            for (std::size_t k = 0; k < rendered[i].size(); ++k) {
                if (k) joined += ';';
                joined += rendered[i][k];
            }
            ++report.solved;
        }
        out << puzzles[i].raw << "," << joined << "\n";
        report.per_puzzle[puzzles[i].raw] = std::move(rendered[i]);
    }
    report.solve_rate_pct =
        report.total == 0 ? 0.0 : 100.0 * static_cast<double>(report.solved) / report.total;
    report.oracle_solvable_count = oracle_count.load();
    report.elapsed_seconds = std::chrono::duration<double>(end - start).count();
    return report;
}

}  // namespace metaprompt::game24
