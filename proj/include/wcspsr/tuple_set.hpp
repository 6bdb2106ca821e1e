// SPDX-License-Identifier: MIT

#ifndef WCSPSR_TUPLE_SET_HPP
#define WCSPSR_TUPLE_SET_HPP

#include <cstdint>
#include <vector>

#include "structure.hpp"

namespace wcspsr {

/// Subset of the tuple set T, one flag per tuple index. Used both for crisp
/// CSP instances (allowed tuples) and for sets of forbidden tuples.
class TupleSet {
public:
    TupleSet() = default;
    explicit TupleSet(std::size_t universe, bool full = false)
        : bits_(universe, full ? 1 : 0)
        , count_(full ? universe : 0)
    {
    }

    static TupleSet all(const Structure& st) { return TupleSet(st.tuple_count(), true); }
    static TupleSet none(const Structure& st) { return TupleSet(st.tuple_count(), false); }

    template <typename Range>
    static TupleSet of(const Structure& st, const Range& tuples)
    {
        TupleSet out(st.tuple_count());
        for (TupleIndex t : tuples)
            out.insert(t);
        return out;
    }

    std::size_t universe() const { return bits_.size(); }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    bool contains(TupleIndex t) const { return bits_[t] != 0; }

    void insert(TupleIndex t)
    {
        if (!bits_[t]) {
            bits_[t] = 1;
            ++count_;
        }
    }

    void erase(TupleIndex t)
    {
        if (bits_[t]) {
            bits_[t] = 0;
            --count_;
        }
    }

    std::vector<TupleIndex> members() const
    {
        std::vector<TupleIndex> out;
        out.reserve(count_);
        for (std::size_t t = 0; t < bits_.size(); ++t)
            if (bits_[t])
                out.push_back(t);
        return out;
    }

    /// Number of members inside the block of scope `s`.
    std::size_t count_in_scope(const Structure& st, ScopeIndex s) const
    {
        std::size_t n = 0;
        for (TupleIndex t = st.block_begin(s); t < st.block_end(s); ++t)
            n += bits_[t];
        return n;
    }

    bool intersects_scope(const Structure& st, ScopeIndex s) const
    {
        for (TupleIndex t = st.block_begin(s); t < st.block_end(s); ++t)
            if (bits_[t])
                return true;
        return false;
    }

    bool subset_of(const TupleSet& other) const
    {
        for (std::size_t t = 0; t < bits_.size(); ++t)
            if (bits_[t] && !other.bits_[t])
                return false;
        return true;
    }

    TupleSet operator&(const TupleSet& o) const
    {
        TupleSet out(bits_.size());
        for (std::size_t t = 0; t < bits_.size(); ++t)
            if (bits_[t] && o.bits_[t])
                out.insert(t);
        return out;
    }

    TupleSet operator|(const TupleSet& o) const
    {
        TupleSet out(bits_.size());
        for (std::size_t t = 0; t < bits_.size(); ++t)
            if (bits_[t] || o.bits_[t])
                out.insert(t);
        return out;
    }

    TupleSet operator-(const TupleSet& o) const
    {
        TupleSet out(bits_.size());
        for (std::size_t t = 0; t < bits_.size(); ++t)
            if (bits_[t] && !o.bits_[t])
                out.insert(t);
        return out;
    }

    TupleSet complement() const
    {
        TupleSet out(bits_.size());
        for (std::size_t t = 0; t < bits_.size(); ++t)
            if (!bits_[t])
                out.insert(t);
        return out;
    }

    friend bool operator==(const TupleSet& a, const TupleSet& b) { return a.bits_ == b.bits_; }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

/// A crisp CSP over a structure is its set of allowed tuples.
using CspInstance = TupleSet;

} // namespace wcspsr

#endif // WCSPSR_TUPLE_SET_HPP
