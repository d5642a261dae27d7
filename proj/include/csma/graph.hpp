#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace csma {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Conflict graph over links: vertex = link, edge = "cannot transmit together".
// conflict_sets()[i] lists the links that collide with link i. Construction
// enforces symmetry and forbids self-conflict; a bitmask per link is cached
// for fast independent-set checks (link count is capped at 64 for that).
class ConflictGraph {
  public:
    // Conflict-list constructor. If symmetrize is false, asymmetric input is
    // rejected; if true, the symmetric closure is taken.
    static ConflictGraph from_conflict_lists(const std::vector<std::vector<int>>& lists,
                                             bool symmetrize = false);
    // Edge-list constructor (always symmetric by nature).
    static ConflictGraph from_edges(int link_count, const std::vector<std::pair<int, int>>& edges);

    static ConflictGraph path(int n);
    static ConflictGraph cycle(int n);
    static ConflictGraph complete(int n);
    static ConflictGraph grid(int rows, int cols);

    int link_count() const { return (int)conflicts_.size(); }
    const std::vector<int>& conflict_set(int i) const { return conflicts_[i]; }
    const std::vector<std::vector<int>>& conflict_sets() const { return conflicts_; }
    std::uint64_t conflict_mask(int i) const { return masks_[i]; }

    bool conflicts(int i, int j) const { return (masks_[i] >> j) & 1u; }

    // True iff the activation mask contains no conflicting pair.
    bool is_independent(std::uint64_t mask) const {
        for (int i = 0; i < link_count(); ++i)
            if ((mask >> i) & 1u)
                if (mask & masks_[i]) return false;
        return true;
    }

    // Union of conflict sets of all links in `mask`.
    std::uint64_t neighborhood(std::uint64_t mask) const {
        std::uint64_t out = 0;
        for (int i = 0; i < link_count(); ++i)
            if ((mask >> i) & 1u) out |= masks_[i];
        return out;
    }

  private:
    explicit ConflictGraph(std::vector<std::vector<int>> conflicts);
    std::vector<std::vector<int>> conflicts_;
    std::vector<std::uint64_t> masks_;
};

}  // namespace csma
