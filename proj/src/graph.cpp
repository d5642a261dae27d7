#include "csma/graph.hpp"

#include <algorithm>
#include <set>

namespace csma {

ConflictGraph::ConflictGraph(std::vector<std::vector<int>> conflicts)
    : conflicts_(std::move(conflicts)) {
    const int n = (int)conflicts_.size();
    if (n == 0) throw GraphError("graph must have at least one link");
    if (n > 64) throw GraphError("graph limited to 64 links");
    masks_.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        std::sort(conflicts_[i].begin(), conflicts_[i].end());
        conflicts_[i].erase(std::unique(conflicts_[i].begin(), conflicts_[i].end()),
                            conflicts_[i].end());
        for (int j : conflicts_[i]) {
            if (j < 0 || j >= n)
                throw GraphError("conflict id " + std::to_string(j) + " out of range for link " +
                                 std::to_string(i));
            if (j == i) throw GraphError("link " + std::to_string(i) + " conflicts with itself");
            masks_[i] |= (1ULL << j);
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j : conflicts_[i])
            if (!((masks_[j] >> i) & 1u))
                throw GraphError("asymmetric conflict: " + std::to_string(i) + " -> " +
                                 std::to_string(j) + " has no reverse entry");
}

ConflictGraph ConflictGraph::from_conflict_lists(const std::vector<std::vector<int>>& lists,
                                                 bool symmetrize) {
    if (!symmetrize) return ConflictGraph(lists);
    const int n = (int)lists.size();
    std::vector<std::set<int>> sym(n);
    for (int i = 0; i < n; ++i) {
        for (int j : lists[i]) {
            if (j < 0 || j >= n)
                throw GraphError("conflict id " + std::to_string(j) + " out of range for link " +
                                 std::to_string(i));
            if (j == i) throw GraphError("link " + std::to_string(i) + " conflicts with itself");
            sym[i].insert(j);
            sym[j].insert(i);
        }
    }
    std::vector<std::vector<int>> out(n);
    for (int i = 0; i < n; ++i) out[i].assign(sym[i].begin(), sym[i].end());
    return ConflictGraph(out);
}

ConflictGraph ConflictGraph::from_edges(int link_count,
                                        const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> lists(link_count);
    for (auto [a, b] : edges) {
        if (a < 0 || a >= link_count || b < 0 || b >= link_count)
            throw GraphError("edge endpoint out of range");
        if (a == b) throw GraphError("self-conflict edge");
        lists[a].push_back(b);
        lists[b].push_back(a);
    }
    return ConflictGraph(lists);
}

ConflictGraph ConflictGraph::path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return from_edges(n, e);
}

ConflictGraph ConflictGraph::cycle(int n) {
    if (n < 3) throw GraphError("cycle needs at least 3 links");
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return from_edges(n, e);
}

ConflictGraph ConflictGraph::complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return from_edges(n, e);
}

ConflictGraph ConflictGraph::grid(int rows, int cols) {
    if (rows < 1 || cols < 1) throw GraphError("grid dimensions must be positive");
    auto id = [cols](int r, int c) { return r * cols + c; };
    std::vector<std::pair<int, int>> e;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) e.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) e.emplace_back(id(r, c), id(r + 1, c));
        }
    return from_edges(rows * cols, e);
}

}  // namespace csma
