#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "overlaymend/graph.hpp"

namespace overlaymend {

// Per-node cache of 2nd neighbours keyed by the 1st neighbour they are
// reached through: via[q] = neighbors(q) - neighbors(n) - {n}. Entries may
// be empty sets; a key exists exactly for each current 1st neighbour.
struct SecondNeighborView {
    std::map<NodeId, std::set<NodeId>> via;

    bool operator==(const SecondNeighborView&) const = default;
};

// Union of all via entries.
std::set<NodeId> second_neighbors(const SecondNeighborView& view);

// True if p appears in any via entry.
bool contains_second(const SecondNeighborView& view, NodeId p);

// Size of the union without materialising it. `stamp` is a reusable buffer
// of at least slot-count entries; `generation` must be fresh per call.
std::size_t second_neighbor_count(const SecondNeighborView& view,
                                  std::vector<std::uint32_t>& stamp, std::uint32_t generation);

// Ground-truth view of n recomputed from the graph alone.
SecondNeighborView rebuild_second_view(const OverlayGraph& g, NodeId n);

}  // namespace overlaymend
