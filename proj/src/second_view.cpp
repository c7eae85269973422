#include "overlaymend/second_view.hpp"

#include <algorithm>

namespace overlaymend {

std::set<NodeId> second_neighbors(const SecondNeighborView& view) {
    std::set<NodeId> out;
    for (const auto& [q, through] : view.via) {
        out.insert(through.begin(), through.end());
    }
    return out;
}

bool contains_second(const SecondNeighborView& view, NodeId p) {
    for (const auto& [q, through] : view.via) {
        if (through.count(p) > 0) return true;
    }
    return false;
}

std::size_t second_neighbor_count(const SecondNeighborView& view,
                                  std::vector<std::uint32_t>& stamp, std::uint32_t generation) {
    std::size_t count = 0;
    for (const auto& [q, through] : view.via) {
        for (NodeId p : through) {
            if (stamp[p] != generation) {
                stamp[p] = generation;
                ++count;
            }
        }
    }
    return count;
}

SecondNeighborView rebuild_second_view(const OverlayGraph& g, NodeId n) {
    SecondNeighborView view;
    const auto& first = g.neighbors(n);
    for (NodeId q : first) {
        std::set<NodeId> through;
        for (NodeId p : g.neighbors(q)) {
            if (p != n && first.count(p) == 0) through.insert(p);
        }
        view.via.emplace(q, std::move(through));
    }
    return view;
}

}  // namespace overlaymend
