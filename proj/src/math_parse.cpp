#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "metaprompt/evaluator.hpp"

namespace metaprompt::eval {

namespace {

// ---------------------------------------------------------------------------
// Exact rational arithmetic on 128-bit intermediates, used for folding.

struct Rat {
    __int128 num = 0;
    __int128 den = 1;
};

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

constexpr __int128 kFoldLimit = static_cast<__int128>(1) << 100;

std::optional<Rat> reduce(Rat r) {
    if (r.den == 0) return std::nullopt;
    if (r.den < 0) {
        r.num = -r.num;
        r.den = -r.den;
    }
    __int128 g = gcd128(r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    __int128 mag = r.num < 0 ? -r.num : r.num;
    if (mag > kFoldLimit || r.den > kFoldLimit) return std::nullopt;
    return r;
}

std::optional<Rat> rat_add(Rat a, Rat b) { return reduce({a.num * b.den + b.num * a.den, a.den * b.den}); }
std::optional<Rat> rat_sub(Rat a, Rat b) { return reduce({a.num * b.den - b.num * a.den, a.den * b.den}); }
std::optional<Rat> rat_mul(Rat a, Rat b) { return reduce({a.num * b.num, a.den * b.den}); }
std::optional<Rat> rat_div(Rat a, Rat b) {
    if (b.num == 0) return std::nullopt;
    return reduce({a.num * b.den, a.den * b.num});
}

std::optional<__int128> isqrt_exact(__int128 v) {
    if (v < 0) return std::nullopt;
    __int128 r = static_cast<__int128>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    if (r * r == v) return r;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Node constructors

ExprPtr make_node(MathExpr node) { return std::make_shared<const MathExpr>(std::move(node)); }

ExprPtr make_integer(long long value) {
    MathExpr node;
    node.kind = NodeKind::integer;
    node.int_value = value;
    return make_node(std::move(node));
}

ExprPtr make_rational(long long num, long long den) {
    MathExpr node;
    node.kind = NodeKind::rational;
    node.numerator = num;
    node.denominator = den;
    return make_node(std::move(node));
}

ExprPtr make_binary(char op, ExprPtr left, ExprPtr right) {
    MathExpr node;
    node.kind = NodeKind::binary;
    node.op = op;
    node.children = {std::move(left), std::move(right)};
    return make_node(std::move(node));
}

ExprPtr make_neg(ExprPtr child) {
    MathExpr node;
    node.kind = NodeKind::neg;
    node.children = {std::move(child)};
    return make_node(std::move(node));
}

ExprPtr from_rat(const Rat& r) {
    if (r.den == 1 && r.num >= -((__int128)1 << 62) && r.num <= ((__int128)1 << 62)) {
        return make_integer(static_cast<long long>(r.num));
    }
    if (r.num >= -((__int128)1 << 62) && r.num <= ((__int128)1 << 62) &&
        r.den <= ((__int128)1 << 62)) {
        return make_rational(static_cast<long long>(r.num), static_cast<long long>(r.den));
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Tokenizer

enum class Tok {
    number,   // integer or decimal literal
    symbol,   // single letter or greek command
    pi,
    frac,
    sqrt_fn,
    op,       // + - * / ^
    lparen,
    rparen,
    lbracket,
    rbracket,
    lbrace,
    rbrace,
    comma,
    pipe,
    end,
};

struct Token {
    Tok kind = Tok::end;
    std::string text;
};

const std::set<std::string>& greek_names() {
    static const std::set<std::string> kNames = {
        "alpha", "beta",  "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta",
        "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi", "omicron",
        "rho", "sigma", "tau", "upsilon", "phi", "varphi", "chi", "psi", "omega",
        "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Upsilon", "Phi",
        "Psi", "Omega", "infty",
    };
    return kNames;
}

std::optional<std::vector<Token>> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            std::size_t start = i;
            bool seen_dot = false;
            while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) ||
                             (text[i] == '.' && !seen_dot && i + 1 < n &&
                              std::isdigit(static_cast<unsigned char>(text[i + 1]))))) {
                if (text[i] == '.') seen_dot = true;
                ++i;
            }
            tokens.push_back({Tok::number, text.substr(start, i - start)});
            continue;
        }
        if (c == '\\') {
            std::size_t start = ++i;
            while (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
            std::string word = text.substr(start, i - start);
            if (word == "frac") {
                tokens.push_back({Tok::frac, word});
            } else if (word == "sqrt") {
                tokens.push_back({Tok::sqrt_fn, word});
            } else if (word == "pi") {
                tokens.push_back({Tok::pi, word});
            } else if (word == "cdot" || word == "times") {
                tokens.push_back({Tok::op, "*"});
            } else if (word == "div") {
                tokens.push_back({Tok::op, "/"});
            } else if (greek_names().count(word)) {
                tokens.push_back({Tok::symbol, word});
            } else {
                return std::nullopt;  // unknown command
            }
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            // a letter run is one token: single letters are symbols, words
            // (e.g. "hello") are outside the grammar
            std::size_t start = i;
            while (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
            if (i - start != 1) return std::nullopt;
            tokens.push_back({Tok::symbol, std::string(1, c)});
            continue;
        }
        switch (c) {
            case '+': case '-': case '*': case '/': case '^':
                tokens.push_back({Tok::op, std::string(1, c)});
                break;
            case '(': tokens.push_back({Tok::lparen, "("}); break;
            case ')': tokens.push_back({Tok::rparen, ")"}); break;
            case '[': tokens.push_back({Tok::lbracket, "["}); break;
            case ']': tokens.push_back({Tok::rbracket, "]"}); break;
            case '{': tokens.push_back({Tok::lbrace, "{"}); break;
            case '}': tokens.push_back({Tok::rbrace, "}"}); break;
            case ',': tokens.push_back({Tok::comma, ","}); break;
            case '|': tokens.push_back({Tok::pipe, "|"}); break;
            default: return std::nullopt;
        }
        ++i;
    }
    tokens.push_back({Tok::end, ""});
    return tokens;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    ExprPtr parse_full() {
        ExprPtr top = parse_top();
        if (!top || !at(Tok::end)) return nullptr;
        return top;
    }

private:
    const Token& peek() const { return tokens_[pos_]; }
    bool at(Tok kind) const { return peek().kind == kind; }
    const Token& advance() { return tokens_[pos_++]; }
    bool accept(Tok kind) {
        if (!at(kind)) return false;
        ++pos_;
        return true;
    }

    ExprPtr parse_top() {
        if (at(Tok::lbracket)) return parse_group();
        if (at(Tok::lparen)) {
            // "(1+2)*3" is an expression; "(2,5]" an interval; "(1,2)" a tuple
            std::size_t saved = pos_;
            ExprPtr expr = parse_expr();
            if (expr && at(Tok::end)) return expr;
            pos_ = saved;
            return parse_group();
        }
        return parse_expr();
    }

    // '[' or '(' expr (',' expr)+ ')' or ']' -> interval (2 elements, any
    // square bracket involved) or tuple (plain parentheses).
    ExprPtr parse_group() {
        bool lo_closed;
        if (accept(Tok::lbracket)) {
            lo_closed = true;
        } else if (accept(Tok::lparen)) {
            lo_closed = false;
        } else {
            return nullptr;
        }
        std::vector<ExprPtr> items;
        ExprPtr first = parse_expr();
        if (!first) return nullptr;
        items.push_back(std::move(first));
        while (accept(Tok::comma)) {
            ExprPtr item = parse_expr();
            if (!item) return nullptr;
            items.push_back(std::move(item));
        }
        bool hi_closed;
        if (accept(Tok::rbracket)) {
            hi_closed = true;
        } else if (accept(Tok::rparen)) {
            hi_closed = false;
        } else {
            return nullptr;
        }
        if (items.size() < 2) return nullptr;
        if (items.size() == 2 && (lo_closed || hi_closed)) {
            MathExpr node;
            node.kind = NodeKind::interval;
            node.children = std::move(items);
            node.lo_closed = lo_closed;
            node.hi_closed = hi_closed;
            return make_node(std::move(node));
        }
        if (lo_closed || hi_closed) return nullptr;  // "[1,2,3)" is not a thing
        MathExpr node;
        node.kind = NodeKind::tuple;
        node.children = std::move(items);
        return make_node(std::move(node));
    }

    ExprPtr parse_expr() {
        ExprPtr left = parse_term();
        if (!left) return nullptr;
        while (at(Tok::op) && (peek().text == "+" || peek().text == "-")) {
            char op = advance().text[0];
            ExprPtr right = parse_term();
            if (!right) return nullptr;
            left = make_binary(op, std::move(left), std::move(right));
        }
        return left;
    }

    bool starts_factor() const {
        switch (peek().kind) {
            case Tok::symbol:
            case Tok::pi:
            case Tok::frac:
            case Tok::sqrt_fn:
            case Tok::lparen:
            case Tok::pipe:
                return true;
            default:
                return false;
        }
    }

    ExprPtr parse_term() {
        ExprPtr left = parse_unary();
        if (!left) return nullptr;
        for (;;) {
            if (at(Tok::op) && (peek().text == "*" || peek().text == "/")) {
                char op = advance().text[0];
                ExprPtr right = parse_unary();
                if (!right) return nullptr;
                left = make_binary(op, std::move(left), std::move(right));
            } else if (starts_factor()) {
                // implicit multiplication: 2x, 2\pi, 3\sqrt{2}, 2(3)
                ExprPtr right = parse_unary();
                if (!right) return nullptr;
                left = make_binary('*', std::move(left), std::move(right));
            } else {
                return left;
            }
        }
    }

    ExprPtr parse_unary() {
        if (at(Tok::op) && peek().text == "-") {
            advance();
            ExprPtr child = parse_unary();
            if (!child) return nullptr;
            return make_neg(std::move(child));
        }
        if (at(Tok::op) && peek().text == "+") {
            advance();
            return parse_unary();
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_primary();
        if (!base) return nullptr;
        if (at(Tok::op) && peek().text == "^") {
            advance();
            ExprPtr exponent;
            if (accept(Tok::lbrace)) {
                exponent = parse_expr();
                if (!exponent || !accept(Tok::rbrace)) return nullptr;
            } else if (at(Tok::op) && peek().text == "-") {
                advance();
                ExprPtr inner = parse_primary();
                if (!inner) return nullptr;
                exponent = make_neg(std::move(inner));
            } else {
                exponent = parse_primary();
                if (!exponent) return nullptr;
            }
            return make_binary('^', std::move(base), std::move(exponent));
        }
        return base;
    }

    ExprPtr parse_braced() {
        if (!accept(Tok::lbrace)) return nullptr;
        ExprPtr inner = parse_expr();
        if (!inner || !accept(Tok::rbrace)) return nullptr;
        return inner;
    }

    ExprPtr parse_primary() {
        if (at(Tok::number)) {
            const std::string text = advance().text;
            std::size_t dot = text.find('.');
            if (dot == std::string::npos) {
                if (text.size() > 18) return nullptr;
                return make_integer(std::strtoll(text.c_str(), nullptr, 10));
            }
            std::string digits = text.substr(0, dot) + text.substr(dot + 1);
            std::size_t frac_digits = text.size() - dot - 1;
            if (digits.size() > 18 || frac_digits > 15) return nullptr;
            Rat value{std::strtoll(digits.c_str(), nullptr, 10), 1};
            for (std::size_t k = 0; k < frac_digits; ++k) value.den *= 10;
            auto reduced = reduce(value);
            if (!reduced) return nullptr;
            MathExpr node;
            node.kind = NodeKind::decimal;
            node.numerator = static_cast<long long>(reduced->num);
            node.denominator = static_cast<long long>(reduced->den);
            return make_node(std::move(node));
        }
        if (at(Tok::pi)) {
            advance();
            MathExpr node;
            node.kind = NodeKind::pi;
            return make_node(std::move(node));
        }
        if (at(Tok::symbol)) {
            MathExpr node;
            node.kind = NodeKind::symbol;
            node.name = advance().text;
            return make_node(std::move(node));
        }
        if (at(Tok::frac)) {
            advance();
            ExprPtr num = parse_braced();
            ExprPtr den = parse_braced();
            if (!num || !den) return nullptr;
            if (num->kind == NodeKind::integer && den->kind == NodeKind::integer &&
                den->int_value != 0) {
                auto reduced = reduce({num->int_value, den->int_value});
                if (reduced) {
                    if (ExprPtr r = from_rat(*reduced)) return r;
                }
            }
            return make_binary('/', std::move(num), std::move(den));
        }
        if (at(Tok::sqrt_fn)) {
            advance();
            ExprPtr arg;
            if (at(Tok::lbrace)) {
                arg = parse_braced();
            } else if (at(Tok::number)) {
                // \sqrt2 binds a single literal
                arg = parse_primary();
            }
            if (!arg) return nullptr;
            MathExpr node;
            node.kind = NodeKind::function;
            node.name = "sqrt";
            node.children = {std::move(arg)};
            return make_node(std::move(node));
        }
        if (accept(Tok::pipe)) {
            ExprPtr inner = parse_expr();
            if (!inner || !accept(Tok::pipe)) return nullptr;
            MathExpr node;
            node.kind = NodeKind::function;
            node.name = "abs";
            node.children = {std::move(inner)};
            return make_node(std::move(node));
        }
        if (accept(Tok::lparen)) {
            ExprPtr inner = parse_expr();
            if (!inner || !accept(Tok::rparen)) return nullptr;
            return inner;
        }
        if (at(Tok::lbrace)) {
            return parse_braced();
        }
        return nullptr;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Exact folding

std::optional<Rat> try_exact(const ExprPtr& expr) {
    switch (expr->kind) {
        case NodeKind::integer: return Rat{expr->int_value, 1};
        case NodeKind::rational:
        case NodeKind::decimal: return Rat{expr->numerator, expr->denominator};
        case NodeKind::neg: {
            auto child = try_exact(expr->children[0]);
            if (!child) return std::nullopt;
            return Rat{-child->num, child->den};
        }
        case NodeKind::binary: {
            auto left = try_exact(expr->children[0]);
            auto right = try_exact(expr->children[1]);
            if (!left || !right) return std::nullopt;
            switch (expr->op) {
                case '+': return rat_add(*left, *right);
                case '-': return rat_sub(*left, *right);
                case '*': return rat_mul(*left, *right);
                case '/': return rat_div(*left, *right);
                case '^': {
                    if (right->den != 1) return std::nullopt;
                    __int128 e = right->num;
                    if (e < -16 || e > 16) return std::nullopt;
                    Rat base = *left;
                    if (e < 0) {
                        if (base.num == 0) return std::nullopt;
                        base = {base.den, base.num};
                        e = -e;
                    }
                    Rat result{1, 1};
                    for (__int128 k = 0; k < e; ++k) {
                        auto next = rat_mul(result, base);
                        if (!next) return std::nullopt;
                        result = *next;
                    }
                    return reduce(result);
                }
            }
            return std::nullopt;
        }
        case NodeKind::function: {
            if (expr->name == "abs") {
                auto child = try_exact(expr->children[0]);
                if (!child) return std::nullopt;
                return Rat{child->num < 0 ? -child->num : child->num, child->den};
            }
            if (expr->name == "sqrt") {
                auto child = try_exact(expr->children[0]);
                if (!child || child->num < 0) return std::nullopt;
                auto rn = isqrt_exact(child->num);
                auto rd = isqrt_exact(child->den);
                if (!rn || !rd) return std::nullopt;
                return reduce({*rn, *rd});
            }
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

bool is_sum_op(const ExprPtr& e) { return e->kind == NodeKind::binary && e->op == '+'; }
bool is_mul_op(const ExprPtr& e) { return e->kind == NodeKind::binary && e->op == '*'; }

void collect_operands(const ExprPtr& expr, char op, std::vector<ExprPtr>& out) {
    if (expr->kind == NodeKind::binary && expr->op == op) {
        collect_operands(expr->children[0], op, out);
        collect_operands(expr->children[1], op, out);
    } else {
        out.push_back(expr);
    }
}

}  // namespace

std::optional<ExprPtr> parse_math(const std::string& normalized) {
    if (normalized.empty()) return std::nullopt;
    auto tokens = tokenize(normalized);
    if (!tokens) return std::nullopt;
    Parser parser(std::move(*tokens));
    ExprPtr expr = parser.parse_full();
    if (!expr) return std::nullopt;
    if (expr->kind == NodeKind::interval) {
        auto lo = eval_double(expr->children[0]);
        auto hi = eval_double(expr->children[1]);
        if (lo && hi && *lo > *hi) return std::nullopt;  // invariant: lo <= hi when numeric
    }
    return expr;
}

ExprPtr canonicalize(const ExprPtr& expr) {
    // fold whole exact-rational subtrees first
    if (auto exact = try_exact(expr)) {
        if (ExprPtr folded = from_rat(*exact)) return folded;
    }
    MathExpr node = *expr;
    node.children.clear();
    for (const auto& child : expr->children) node.children.push_back(canonicalize(child));

    switch (node.kind) {
        case NodeKind::decimal: {
            if (node.denominator == 1) return make_integer(node.numerator);
            return make_rational(node.numerator, node.denominator);
        }
        case NodeKind::rational: {
            if (node.denominator == 1) return make_integer(node.numerator);
            break;
        }
        case NodeKind::neg: {
            if (node.children[0]->kind == NodeKind::neg) return node.children[0]->children[0];
            break;
        }
        case NodeKind::function: {
            if (node.name == "sqrt") {
                if (auto exact = try_exact(node.children[0])) {
                    auto rn = isqrt_exact(exact->num);
                    auto rd = isqrt_exact(exact->den);
                    if (exact->num >= 0 && rn && rd) {
                        if (ExprPtr folded = from_rat({*rn, *rd})) return folded;
                    }
                }
            }
            break;
        }
        case NodeKind::binary: {
            if (node.op == '-') {
                // a-b == a+(-b); lets sums compare order-free
                ExprPtr rewritten = make_binary(
                    '+', node.children[0], canonicalize(make_neg(node.children[1])));
                return canonicalize(rewritten);
            }
            if (node.op == '+' || node.op == '*') {
                ExprPtr self = make_node(std::move(node));
                std::vector<ExprPtr> operands;
                collect_operands(self, self->op, operands);
                std::vector<std::pair<std::string, ExprPtr>> keyed;
                keyed.reserve(operands.size());
                for (auto& operand : operands) keyed.emplace_back(expr_key(operand), operand);
                std::stable_sort(keyed.begin(), keyed.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
                ExprPtr result = keyed[0].second;
                for (std::size_t i = 1; i < keyed.size(); ++i) {
                    result = make_binary(self->op, std::move(result), keyed[i].second);
                }
                return result;
            }
            break;
        }
        default: break;
    }
    return make_node(std::move(node));
}

std::string expr_key(const ExprPtr& expr) {
    switch (expr->kind) {
        case NodeKind::integer: return "i:" + std::to_string(expr->int_value);
        case NodeKind::rational:
        case NodeKind::decimal:
            return "r:" + std::to_string(expr->numerator) + "/" +
                   std::to_string(expr->denominator);
        case NodeKind::symbol: return "s:" + expr->name;
        case NodeKind::pi: return "pi";
        case NodeKind::neg: return "n(" + expr_key(expr->children[0]) + ")";
        case NodeKind::binary:
            return std::string("b") + expr->op + "(" + expr_key(expr->children[0]) + "," +
                   expr_key(expr->children[1]) + ")";
        case NodeKind::function: {
            std::string key = "f" + expr->name + "(";
            for (std::size_t i = 0; i < expr->children.size(); ++i) {
                if (i) key += ",";
                key += expr_key(expr->children[i]);
            }
            return key + ")";
        }
        case NodeKind::interval:
            return std::string("iv") + (expr->lo_closed ? "[" : "(") +
                   expr_key(expr->children[0]) + "," + expr_key(expr->children[1]) +
                   (expr->hi_closed ? "]" : ")");
        case NodeKind::tuple: {
            std::string key = "t(";
            for (std::size_t i = 0; i < expr->children.size(); ++i) {
                if (i) key += ",";
                key += expr_key(expr->children[i]);
            }
            return key + ")";
        }
    }
    return "?";
}

bool closed_form_numeric(const ExprPtr& expr) {
    if (expr->kind == NodeKind::symbol) return false;
    for (const auto& child : expr->children) {
        if (!closed_form_numeric(child)) return false;
    }
    return true;
}

std::optional<double> eval_double(const ExprPtr& expr) {
    switch (expr->kind) {
        case NodeKind::integer: return static_cast<double>(expr->int_value);
        case NodeKind::rational:
        case NodeKind::decimal:
            return static_cast<double>(expr->numerator) / static_cast<double>(expr->denominator);
        case NodeKind::pi: return M_PI;
        case NodeKind::symbol: return std::nullopt;
        case NodeKind::neg: {
            auto child = eval_double(expr->children[0]);
            if (!child) return std::nullopt;
            return -*child;
        }
        case NodeKind::binary: {
            auto left = eval_double(expr->children[0]);
            auto right = eval_double(expr->children[1]);
            if (!left || !right) return std::nullopt;
            switch (expr->op) {
                case '+': return *left + *right;
                case '-': return *left - *right;
                case '*': return *left * *right;
                case '/':
                    if (*right == 0.0) return std::nullopt;
                    return *left / *right;
                case '^': {
                    double value = std::pow(*left, *right);
                    if (!std::isfinite(value)) return std::nullopt;
                    return value;
                }
            }
            return std::nullopt;
        }
        case NodeKind::function: {
            auto child = eval_double(expr->children[0]);
            if (!child) return std::nullopt;
            if (expr->name == "abs") return std::fabs(*child);
            if (expr->name == "sqrt") {
                if (*child < 0) return std::nullopt;
                return std::sqrt(*child);
            }
            return std::nullopt;
        }
        default: return std::nullopt;  // intervals and tuples are not scalars
    }
}

}  // namespace metaprompt::eval
