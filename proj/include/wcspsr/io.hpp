// SPDX-License-Identifier: MIT
//
// Instance input and output.
//
// Two text formats are read: the common cost-function-network format (costs
// to be minimised, `.wcsp`) and a native weight format. Internally weights
// are always maximised, so costs are negated when read and costs at or above
// the declared upper bound become minus infinity.
//
// Native document:
//
//     wcsp-native 1
//     variables <n>
//     domains <d_0> ... <d_{n-1}>
//     scope <v_1> ... <v_k> : <w_1> ... <w_m>
//
// with one `scope` line per scope in tuple-block order, m the product of the
// scope's domain sizes, tuples in lexicographic order (first variable most
// significant) and each weight a decimal or `-inf`. `#` starts a comment.

#ifndef WCSPSR_IO_HPP
#define WCSPSR_IO_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "structure.hpp"
#include "weights.hpp"

namespace wcspsr {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what)
        , line_(line)
    {
    }
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct Instance {
    Structure structure;
    WeightVector weights;
};

namespace detail {

struct Token {
    std::string text;
    std::size_t line;
};

inline std::vector<Token> tokenize(std::string_view text, bool comments)
{
    std::vector<Token> out;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (comments && c == '#') {
            while (i < text.size() && text[i] != '\n')
                ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && !(comments && text[j] == '#'))
                ++j;
            out.push_back(Token { std::string(text.substr(i, j - i)), line });
            i = j;
        }
    }
    return out;
}

class TokenStream {
public:
    explicit TokenStream(std::vector<Token> toks)
        : toks_(std::move(toks))
    {
    }

    bool done() const { return pos_ >= toks_.size(); }
    std::size_t line() const { return done() ? (toks_.empty() ? 1 : toks_.back().line) : toks_[pos_].line; }

    const Token& next(const char* what)
    {
        if (done())
            throw ParseError(line(), std::string("unexpected end of input, expected ") + what);
        return toks_[pos_++];
    }

    const Token& peek() const { return toks_[pos_]; }

    long long integer(const char* what)
    {
        const Token& t = next(what);
        long long v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size())
            throw ParseError(t.line, std::string("expected integer ") + what + ", got '" + t.text + "'");
        return v;
    }

    double real(const char* what, bool allow_neg_inf)
    {
        const Token& t = next(what);
        if (allow_neg_inf && t.text == "-inf")
            return kNegInf;
        double v = 0.0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size() || !std::isfinite(v))
            throw ParseError(t.line, std::string("expected number ") + what + ", got '" + t.text + "'");
        return v;
    }

    void expect(std::string_view word)
    {
        const Token& t = next(std::string(word).c_str());
        if (t.text != word)
            throw ParseError(t.line, "expected '" + std::string(word) + "', got '" + t.text + "'");
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

inline std::size_t table_size(const std::vector<int>& domains, const std::vector<int>& vars)
{
    std::size_t n = 1;
    for (int v : vars)
        n *= static_cast<std::size_t>(domains[static_cast<std::size_t>(v)]);
    return n;
}

/// Row-major index of `values` over the domains of `vars`.
inline std::size_t table_index(const std::vector<int>& domains, const std::vector<int>& vars, const std::vector<int>& values)
{
    std::size_t idx = 0;
    for (std::size_t p = 0; p < vars.size(); ++p)
        idx = idx * static_cast<std::size_t>(domains[static_cast<std::size_t>(vars[p])]) + static_cast<std::size_t>(values[p]);
    return idx;
}

} // namespace detail

/// Reads the cost-function-network format with functions of arity 1 or 2.
/// A zero unary scope is added for every variable without one; repeated
/// scopes are summed.
inline Instance parse_wcsp(std::string_view text)
{
    detail::TokenStream ts(detail::tokenize(text, false));
    ts.next("problem name");
    const long long n = ts.integer("variable count");
    ts.integer("maximum domain size");
    const long long m = ts.integer("constraint count");
    const std::size_t ub_line = ts.line();
    const double ub = ts.real("upper bound", false);
    if (n <= 0)
        throw ParseError(1, "variable count must be positive");
    if (m < 0)
        throw ParseError(1, "constraint count must be non-negative");
    if (!(ub > 0.0))
        throw ParseError(ub_line, "upper bound must be positive");

    std::vector<int> domains;
    for (long long i = 0; i < n; ++i) {
        std::size_t line = ts.line();
        long long d = ts.integer("domain size");
        if (d <= 0 || d > 1 << 20)
            throw ParseError(line, "domain size out of range");
        domains.push_back(static_cast<int>(d));
    }

    auto weight_of = [&](double cost) { return cost >= ub ? kNegInf : -cost; };

    std::vector<std::vector<int>> order;
    std::map<std::vector<int>, std::vector<double>> tables;
    auto table_for = [&](const std::vector<int>& vars) -> std::vector<double>& {
        auto it = tables.find(vars);
        if (it == tables.end()) {
            order.push_back(vars);
            it = tables.emplace(vars, std::vector<double>(detail::table_size(domains, vars), 0.0)).first;
        }
        return it->second;
    };

    for (long long c = 0; c < m; ++c) {
        const std::size_t line = ts.line();
        const long long arity = ts.integer("arity");
        if (arity < 1 || arity > 2)
            throw ParseError(line, "unsupported arity " + std::to_string(arity));
        std::vector<int> vars;
        for (long long p = 0; p < arity; ++p) {
            long long v = ts.integer("scope variable");
            if (v < 0 || v >= n)
                throw ParseError(line, "scope variable " + std::to_string(v) + " out of range");
            vars.push_back(static_cast<int>(v));
        }
        std::vector<int> sorted = vars;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ParseError(line, "repeated variable in scope");
        const double default_cost = ts.real("default cost", false);
        const long long count = ts.integer("tuple count");
        if (count < 0 || static_cast<std::size_t>(count) > detail::table_size(domains, vars))
            throw ParseError(line, "tuple count mismatch");

        std::vector<double> costs(detail::table_size(domains, vars), default_cost);
        for (long long k = 0; k < count; ++k) {
            const std::size_t tline = ts.line();
            std::vector<int> values;
            for (std::size_t p = 0; p < vars.size(); ++p) {
                long long val = ts.integer("tuple value");
                if (val < 0 || val >= domains[static_cast<std::size_t>(vars[p])])
                    throw ParseError(tline, "tuple value out of range");
                values.push_back(static_cast<int>(val));
            }
            costs[detail::table_index(domains, vars, values)] = ts.real("tuple cost", false);
        }

        std::vector<double>& target = table_for(sorted);
        std::vector<int> values(vars.size(), 0), sorted_values(vars.size());
        for (std::size_t idx = 0; idx < costs.size(); ++idx) {
            std::size_t rem = idx;
            for (std::size_t p = vars.size(); p-- > 0;) {
                const auto d = static_cast<std::size_t>(domains[static_cast<std::size_t>(vars[p])]);
                values[p] = static_cast<int>(rem % d);
                rem /= d;
            }
            for (std::size_t p = 0; p < vars.size(); ++p) {
                auto q = static_cast<std::size_t>(std::find(sorted.begin(), sorted.end(), vars[p]) - sorted.begin());
                sorted_values[q] = values[p];
            }
            target[detail::table_index(domains, sorted, sorted_values)] += weight_of(costs[idx]);
        }
    }
    if (!ts.done())
        throw ParseError(ts.line(), "trailing content after the last constraint");

    std::vector<std::vector<int>> scopes;
    std::vector<double> weights;
    for (int v = 0; v < static_cast<int>(n); ++v) {
        std::vector<int> u { v };
        scopes.push_back(u);
        auto it = tables.find(u);
        if (it == tables.end())
            weights.insert(weights.end(), static_cast<std::size_t>(domains[static_cast<std::size_t>(v)]), 0.0);
        else
            weights.insert(weights.end(), it->second.begin(), it->second.end());
    }
    for (const auto& vars : order) {
        if (vars.size() == 1)
            continue;
        scopes.push_back(vars);
        const auto& t = tables.at(vars);
        weights.insert(weights.end(), t.begin(), t.end());
    }
    Structure st(domains, scopes);
    return Instance { std::move(st), WeightVector(std::move(weights)) };
}

/// Reads a native document.
inline Instance parse_native(std::string_view text)
{
    detail::TokenStream ts(detail::tokenize(text, true));
    ts.expect("wcsp-native");
    {
        std::size_t line = ts.line();
        if (ts.integer("format version") != 1)
            throw ParseError(line, "unsupported format version");
    }
    ts.expect("variables");
    const std::size_t nline = ts.line();
    const long long n = ts.integer("variable count");
    if (n < 0 || n > 1 << 24)
        throw ParseError(nline, "variable count out of range");
    ts.expect("domains");
    std::vector<int> domains;
    for (long long i = 0; i < n; ++i) {
        std::size_t line = ts.line();
        long long d = ts.integer("domain size");
        if (d <= 0 || d > 1 << 20)
            throw ParseError(line, "domain size out of range");
        domains.push_back(static_cast<int>(d));
    }
    std::vector<std::vector<int>> scopes;
    std::vector<double> weights;
    while (!ts.done()) {
        const std::size_t line = ts.line();
        ts.expect("scope");
        std::vector<int> vars;
        while (!ts.done() && ts.peek().text != ":") {
            long long v = ts.integer("scope variable");
            if (v < 0 || v >= n)
                throw ParseError(line, "scope variable " + std::to_string(v) + " out of range");
            vars.push_back(static_cast<int>(v));
        }
        ts.expect(":");
        if (vars.empty())
            throw ParseError(line, "empty scope");
        if (!std::is_sorted(vars.begin(), vars.end()) || std::adjacent_find(vars.begin(), vars.end()) != vars.end())
            throw ParseError(line, "scope variables must be strictly increasing");
        double size = 1.0;
        for (int v : vars)
            size *= domains[static_cast<std::size_t>(v)];
        if (size > double(1u << 26))
            throw ParseError(line, "scope table too large");
        for (std::size_t k = 0; k < detail::table_size(domains, vars); ++k)
            weights.push_back(ts.real("weight", true));
        if (!ts.done() && ts.peek().text != "scope")
            throw ParseError(ts.line(), "weight count mismatch for scope on line " + std::to_string(line));
        scopes.push_back(std::move(vars));
    }
    try {
        Structure st(domains, scopes);
        return Instance { std::move(st), WeightVector(std::move(weights)) };
    } catch (const ModelError& e) {
        throw ParseError(ts.line(), e.what());
    }
}

/// Inverse of parse_native; weights are printed with 17 significant digits.
inline std::string emit_native(const Structure& st, const WeightVector& f)
{
    check_weights(st, f);
    std::ostringstream os;
    os << "wcsp-native 1\nvariables " << st.variable_count() << "\ndomains";
    for (int d : st.domain_sizes())
        os << ' ' << d;
    os << '\n';
    char buf[64];
    for (ScopeIndex s = 0; s < st.scope_count(); ++s) {
        os << "scope";
        for (int v : st.scope(s))
            os << ' ' << v;
        os << " :";
        for (TupleIndex t = st.block_begin(s); t < st.block_end(s); ++t) {
            if (is_neg_inf(f[t]))
                os << " -inf";
            else {
                std::snprintf(buf, sizeof buf, "%.17g", f[t]);
                os << ' ' << buf;
            }
        }
        os << '\n';
    }
    return os.str();
}

/// Chooses the reader from the first token: `wcsp-native` or otherwise the
/// cost-function-network format.
inline Instance parse_auto(std::string_view text)
{
    auto toks = detail::tokenize(text, true);
    if (!toks.empty() && toks.front().text == "wcsp-native")
        return parse_native(text);
    return parse_wcsp(text);
}

/// Position of B_m between the worst bound B_w (0) and the best bound B_b
/// (1). Bounds within 1e-4 relative or 0.01 absolute of B_b count as 1.
inline double normalized_bound(double b_m, double b_w, double b_b)
{
    if (std::fabs(b_m - b_b) <= 1e-4 * std::fabs(b_b) || std::fabs(b_m - b_b) <= 0.01)
        return 1.0;
    if (b_w == b_b)
        return 1.0;
    if (!(b_w >= b_m && b_m >= b_b))
        throw std::invalid_argument("normalized_bound: expected worst >= measured >= best");
    return (b_w - b_m) / (b_w - b_b);
}

/// Quotes a CSV field when it contains a separator, quote or line break.
inline std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_number(double v, int digits = 17)
{
    if (std::isinf(v))
        return v < 0 ? "-inf" : "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            os << ',';
        os << csv_field(fields[i]);
    }
    os << "\r\n";
}

} // namespace wcspsr

#endif // WCSPSR_IO_HPP
