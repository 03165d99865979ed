#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace stabforge {

// A node state of a simulated algorithm: a short tuple of integers.
// All shipped algorithms encode their variables (identifiers, colors,
// distances, channel labels, booleans) as cells of this carrier; the
// simulator itself never looks inside, it only copies and compares.
class StateValue {
public:
    static constexpr std::size_t kMaxCells = 6;

    StateValue() = default;

    StateValue(std::initializer_list<std::int64_t> cells) {
        if (cells.size() > kMaxCells)
            throw std::length_error("StateValue: too many cells");
        for (std::int64_t c : cells) cells_[size_++] = c;
    }

    std::int64_t operator[](std::size_t i) const { return cells_[i]; }
    std::size_t size() const { return size_; }

    // Unused cells stay zero, so defaulted comparison is exact.
    friend bool operator==(const StateValue&, const StateValue&) = default;
    friend auto operator<=>(const StateValue&, const StateValue&) = default;

private:
    std::array<std::int64_t, kMaxCells> cells_{};
    std::uint32_t size_ = 0;
};

// Channel labels are opaque byte strings with a total order; internally a
// topology interns them to dense ids whose order matches the string order.
using LabelId = std::int32_t;

// One entry of a node's view of its incoming channels.
struct LabeledState {
    LabelId label;
    StateValue state;

    friend bool operator==(const LabeledState&, const LabeledState&) = default;
    friend auto operator<=>(const LabeledState&, const LabeledState&) = default;
};

using View = std::span<const LabeledState>;

// Sorts and deduplicates in place: the simulation passes *sets* of
// (label, state) pairs to algorithms, never multisets.
inline void dedup_view(std::vector<LabeledState>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Deterministic seeded generator (splitmix64). Used instead of std::
// distributions so that persisted seeds replay identically everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform draw in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    bool coin() { return (next() & 1) != 0; }

    // Derives an independent stream for a named component.
    Rng split(std::uint64_t tag) {
        return Rng(state_ ^ (0x632be59bd9b4e019ull * (tag + 1)));
    }

private:
    std::uint64_t state_;
};

}  // namespace stabforge
