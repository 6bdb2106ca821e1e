// SPDX-License-Identifier: MIT
//
// WCSP structure: variables, domains, scopes and the dense tuple table.

#ifndef WCSPSR_STRUCTURE_HPP
#define WCSPSR_STRUCTURE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wcspsr {

using Assignment = std::vector<int>;
using TupleIndex = std::size_t;
using ScopeIndex = std::size_t;

/// Raised when a structure, instance or operation argument is malformed.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Structured view of one tuple: its scope and the values of the scope's
/// variables (ascending variable order).
struct TupleRef {
    ScopeIndex scope;
    std::vector<int> values;

    friend bool operator==(const TupleRef&, const TupleRef&) = default;
};

/// Returns the components of `x` at the variables of `scope_vars`, in the
/// order given (scopes are stored ascending).
inline std::vector<int> restrict_assignment(std::span<const int> x, std::span<const int> scope_vars)
{
    std::vector<int> out;
    out.reserve(scope_vars.size());
    for (int v : scope_vars)
        out.push_back(x[static_cast<std::size_t>(v)]);
    return out;
}

/// The fixed triple (domains, variables, scopes) plus a bijection between
/// structured tuples and dense indices 0..|T|-1.
///
/// Scope blocks are laid out in declaration order. Inside a block the value
/// tuples are enumerated lexicographically with the lowest variable most
/// significant, e.g. (a,a),(a,b),(b,a),(b,b).
class Structure {
public:
    Structure() = default;

    Structure(std::vector<int> domain_sizes, std::vector<std::vector<int>> scopes)
        : domains_(std::move(domain_sizes))
        , scopes_(std::move(scopes))
    {
        if (domains_.empty())
            throw ModelError("structure needs at least one variable");
        for (std::size_t i = 0; i < domains_.size(); ++i)
            if (domains_[i] <= 0)
                throw ModelError("domain size of variable " + std::to_string(i) + " must be positive");

        unary_.assign(domains_.size(), std::nullopt);
        offsets_.reserve(scopes_.size() + 1);
        offsets_.push_back(0);
        for (std::size_t s = 0; s < scopes_.size(); ++s) {
            auto& vars = scopes_[s];
            if (vars.empty())
                throw ModelError("empty scope is not allowed (scope " + std::to_string(s) + ")");
            for (int v : vars)
                if (v < 0 || static_cast<std::size_t>(v) >= domains_.size())
                    throw ModelError("scope " + std::to_string(s) + " references unknown variable " + std::to_string(v));
            if (!std::is_sorted(vars.begin(), vars.end()) || std::adjacent_find(vars.begin(), vars.end()) != vars.end())
                throw ModelError("scope " + std::to_string(s) + " must list distinct variables in ascending order");
            for (std::size_t p = 0; p < s; ++p)
                if (scopes_[p] == vars)
                    throw ModelError("duplicate scope " + std::to_string(s));

            std::vector<std::size_t> strides(vars.size());
            std::size_t block = 1;
            for (std::size_t k = vars.size(); k-- > 0;) {
                strides[k] = block;
                block *= static_cast<std::size_t>(domains_[static_cast<std::size_t>(vars[k])]);
            }
            strides_.push_back(std::move(strides));
            offsets_.push_back(offsets_.back() + block);
            if (vars.size() == 1)
                unary_[static_cast<std::size_t>(vars[0])] = s;
        }

        tuple_scope_.resize(tuple_count());
        for (std::size_t s = 0; s < scopes_.size(); ++s)
            std::fill(tuple_scope_.begin() + static_cast<std::ptrdiff_t>(offsets_[s]),
                tuple_scope_.begin() + static_cast<std::ptrdiff_t>(offsets_[s + 1]), s);

        var_scopes_.resize(domains_.size());
        for (std::size_t s = 0; s < scopes_.size(); ++s)
            for (int v : scopes_[s])
                var_scopes_[static_cast<std::size_t>(v)].push_back(s);
    }

    std::size_t variable_count() const { return domains_.size(); }
    int domain_size(int var) const { return domains_[static_cast<std::size_t>(var)]; }
    const std::vector<int>& domain_sizes() const { return domains_; }

    std::size_t scope_count() const { return scopes_.size(); }
    std::span<const int> scope(ScopeIndex s) const { return scopes_[s]; }
    const std::vector<std::vector<int>>& scopes() const { return scopes_; }
    std::size_t arity(ScopeIndex s) const { return scopes_[s].size(); }

    std::size_t tuple_count() const { return offsets_.back(); }
    TupleIndex block_begin(ScopeIndex s) const { return offsets_[s]; }
    TupleIndex block_end(ScopeIndex s) const { return offsets_[s + 1]; }
    std::size_t block_size(ScopeIndex s) const { return offsets_[s + 1] - offsets_[s]; }
    ScopeIndex scope_of(TupleIndex t) const { return tuple_scope_[t]; }

    /// Scopes containing `var`, in declaration order.
    const std::vector<ScopeIndex>& scopes_of(int var) const { return var_scopes_[static_cast<std::size_t>(var)]; }

    /// The unary scope {var}, if declared.
    std::optional<ScopeIndex> unary_scope(int var) const { return unary_[static_cast<std::size_t>(var)]; }

    bool has_all_unary() const
    {
        return std::all_of(unary_.begin(), unary_.end(), [](auto u) { return u.has_value(); });
    }

    bool is_binary() const
    {
        return std::all_of(scopes_.begin(), scopes_.end(), [](const auto& s) { return s.size() <= 2; });
    }

    std::optional<ScopeIndex> find_scope(std::span<const int> vars) const
    {
        for (std::size_t s = 0; s < scopes_.size(); ++s)
            if (std::equal(scopes_[s].begin(), scopes_[s].end(), vars.begin(), vars.end()))
                return s;
        return std::nullopt;
    }

    TupleIndex tuple_index(ScopeIndex s, std::span<const int> values) const
    {
        const auto& st = strides_[s];
        if (values.size() != st.size())
            throw ModelError("value tuple length does not match scope arity");
        std::size_t idx = 0;
        for (std::size_t k = 0; k < st.size(); ++k) {
            int v = values[k];
            if (v < 0 || v >= domain_size(scopes_[s][k]))
                throw ModelError("value out of domain range");
            idx += static_cast<std::size_t>(v) * st[k];
        }
        return offsets_[s] + idx;
    }

    /// Index of (S, x[S]) for a full assignment; no range checks.
    TupleIndex tuple_of_assignment(ScopeIndex s, std::span<const int> x) const
    {
        const auto& st = strides_[s];
        const auto& vars = scopes_[s];
        std::size_t idx = offsets_[s];
        for (std::size_t k = 0; k < st.size(); ++k)
            idx += static_cast<std::size_t>(x[static_cast<std::size_t>(vars[k])]) * st[k];
        return idx;
    }

    TupleRef tuple(TupleIndex t) const
    {
        ScopeIndex s = tuple_scope_[t];
        std::size_t rel = t - offsets_[s];
        const auto& st = strides_[s];
        std::vector<int> values(st.size());
        for (std::size_t k = 0; k < st.size(); ++k) {
            values[k] = static_cast<int>(rel / st[k]);
            rel %= st[k];
        }
        return {s, std::move(values)};
    }

    /// Value taken by scope variable at position `pos` in tuple `t`.
    int tuple_value(TupleIndex t, std::size_t pos) const
    {
        ScopeIndex s = tuple_scope_[t];
        const auto& st = strides_[s];
        std::size_t rel = t - offsets_[s];
        std::size_t dom = static_cast<std::size_t>(domain_size(scopes_[s][pos]));
        return static_cast<int>((rel / st[pos]) % dom);
    }

    /// Position of `var` inside scope `s`, or -1.
    int position_in_scope(ScopeIndex s, int var) const
    {
        const auto& vars = scopes_[s];
        auto it = std::lower_bound(vars.begin(), vars.end(), var);
        return (it != vars.end() && *it == var) ? static_cast<int>(it - vars.begin()) : -1;
    }

    /// All tuples of scope `s` whose component at position `pos` equals `value`.
    std::vector<TupleIndex> tuples_with_value(ScopeIndex s, std::size_t pos, int value) const
    {
        std::vector<TupleIndex> out;
        const auto& st = strides_[s];
        std::size_t dom = static_cast<std::size_t>(domain_size(scopes_[s][pos]));
        std::size_t outer = block_size(s) / (st[pos] * dom);
        for (std::size_t hi = 0; hi < outer; ++hi)
            for (std::size_t lo = 0; lo < st[pos]; ++lo)
                out.push_back(offsets_[s] + hi * st[pos] * dom + static_cast<std::size_t>(value) * st[pos] + lo);
        return out;
    }

    /// Number of assignments |D^V|, saturating at SIZE_MAX.
    std::size_t assignment_count() const
    {
        std::size_t n = 1;
        for (int d : domains_) {
            if (n > SIZE_MAX / static_cast<std::size_t>(d))
                return SIZE_MAX;
            n *= static_cast<std::size_t>(d);
        }
        return n;
    }

    bool valid_assignment(std::span<const int> x) const
    {
        if (x.size() != domains_.size())
            return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] < 0 || x[i] >= domains_[i])
                return false;
        return true;
    }

    /// Human-readable tuple label such as ({0,2},(a,b)); values are letters
    /// when every domain has at most 26 values.
    std::string describe(TupleIndex t) const
    {
        auto ref = tuple(t);
        bool letters = std::all_of(domains_.begin(), domains_.end(), [](int d) { return d <= 26; });
        std::string out = "({";
        const auto& vars = scopes_[ref.scope];
        for (std::size_t k = 0; k < vars.size(); ++k)
            out += (k ? "," : "") + std::to_string(vars[k]);
        out += "},";
        if (vars.size() > 1)
            out += "(";
        for (std::size_t k = 0; k < ref.values.size(); ++k) {
            if (k)
                out += ",";
            out += letters ? std::string(1, static_cast<char>('a' + ref.values[k])) : std::to_string(ref.values[k]);
        }
        if (vars.size() > 1)
            out += ")";
        out += ")";
        return out;
    }

    friend bool operator==(const Structure& a, const Structure& b)
    {
        return a.domains_ == b.domains_ && a.scopes_ == b.scopes_;
    }

private:
    std::vector<int> domains_;
    std::vector<std::vector<int>> scopes_;
    std::vector<std::vector<std::size_t>> strides_;
    std::vector<std::size_t> offsets_;
    std::vector<ScopeIndex> tuple_scope_;
    std::vector<std::optional<ScopeIndex>> unary_;
    std::vector<std::vector<ScopeIndex>> var_scopes_;
};

/// Thrown by exhaustive routines when |D^V| exceeds the configured cap.
class ScaleError : public std::runtime_error {
public:
    explicit ScaleError(std::size_t count, std::size_t cap)
        : std::runtime_error("oracle scale exceeded: " + (count == SIZE_MAX ? std::string("overflow") : std::to_string(count))
              + " assignments > cap " + std::to_string(cap))
    {
    }
};

inline constexpr std::size_t kDefaultScaleCap = std::size_t{1} << 22;

inline void check_scale(const Structure& st, std::size_t cap)
{
    std::size_t n = st.assignment_count();
    if (n > cap)
        throw ScaleError(n, cap);
}

/// Calls `fn(x)` for every assignment in lexicographic order (variable 0 most
/// significant). Stops early when `fn` returns false.
template <typename Fn>
void for_each_assignment(const Structure& st, Fn&& fn, std::size_t cap = kDefaultScaleCap)
{
    check_scale(st, cap);
    const std::size_t n = st.variable_count();
    Assignment x(n, 0);
    while (true) {
        if constexpr (std::is_same_v<std::invoke_result_t<Fn, const Assignment&>, bool>) {
            if (!fn(static_cast<const Assignment&>(x)))
                return;
        } else {
            fn(static_cast<const Assignment&>(x));
        }
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++x[i] < st.domain_size(static_cast<int>(i)))
                break;
            x[i] = 0;
            if (i == 0)
                return;
        }
        if (n == 0)
            return;
    }
}

/// Binary indicator vector phi(x): one 1 per scope block.
inline std::vector<std::uint8_t> indicator(const Structure& st, std::span<const int> x)
{
    if (!st.valid_assignment(x))
        throw ModelError("assignment does not match structure");
    std::vector<std::uint8_t> phi(st.tuple_count(), 0);
    for (ScopeIndex s = 0; s < st.scope_count(); ++s)
        phi[st.tuple_of_assignment(s, x)] = 1;
    return phi;
}

} // namespace wcspsr

#endif // WCSPSR_STRUCTURE_HPP
