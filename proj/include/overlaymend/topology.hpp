#pragma once

#include <cstddef>
#include <vector>

#include "overlaymend/graph.hpp"
#include "overlaymend/rng.hpp"

namespace overlaymend {

// Families of bootstrap topologies and the matching join rules for nodes
// arriving later.
struct TopologyKind {
    enum class Family : std::uint8_t { Uniform, Clustered, Random };

    Family family{Family::Uniform};
    std::size_t degree{5};      // Uniform: exact degree of every node
    std::size_t clusters{4};    // Clustered: number of clusters
    double intra_prob{0.1};     // Clustered: per-pair link probability inside a cluster
    double inter_prob{0.1};     // Clustered: per (node, external cluster) link probability
    double edge_prob{0.05};     // Random: per-pair link probability

    static TopologyKind uniform(std::size_t degree);
    static TopologyKind clustered(std::size_t clusters, double intra, double inter);
    static TopologyKind random(double edge_prob);

    // Throws std::invalid_argument when parameters cannot produce a graph
    // over num_nodes slots.
    void validate(std::size_t num_nodes) const;

    bool operator==(const TopologyKind&) const = default;
};

// Every node gets exactly `degree` links (pairing construction; retries from
// scratch until the pairing is simple). Requires n*degree even and degree < n.
OverlayGraph gen_uniform(std::size_t n, std::size_t degree, Rng& rng);

// Nodes split into `clusters` near-equal contiguous blocks. Each intra-cluster
// pair links with probability intra; each (node, external cluster) pair adds,
// with probability inter, one link to a uniformly chosen member.
OverlayGraph gen_clustered(std::size_t n, std::size_t clusters, double intra, double inter,
                           Rng& rng);

// Erdos-Renyi style: each pair links with probability edge_prob.
OverlayGraph gen_random(std::size_t n, double edge_prob, Rng& rng);

OverlayGraph generate(const TopologyKind& kind, std::size_t n, Rng& rng);

// Join target selection. Targets are returned instead of applied so callers
// can attach per-link bookkeeping; the join_* wrappers below apply them.

// min(degree, available peers) distinct active peers, uniform without
// replacement.
std::vector<NodeId> join_targets_uniform(const OverlayGraph& g, NodeId n, std::size_t degree,
                                         Rng& rng);

// Each active member of n's cluster with probability intra; for each external
// cluster with at least one active member, one uniform member with
// probability inter. May legitimately select nothing.
std::vector<NodeId> join_targets_clustered(const OverlayGraph& g, NodeId n, int cluster,
                                           double intra, double inter, Rng& rng);

// Each active peer independently with probability edge_prob, mirroring the
// bootstrap rule of gen_random.
std::vector<NodeId> join_targets_random(const OverlayGraph& g, NodeId n, double edge_prob,
                                        Rng& rng);

std::vector<NodeId> join_targets(const OverlayGraph& g, NodeId n, const TopologyKind& kind,
                                 Rng& rng);

void join_uniform(OverlayGraph& g, NodeId n, std::size_t degree, Rng& rng);
void join_clustered(OverlayGraph& g, NodeId n, int cluster, double intra, double inter, Rng& rng);

}  // namespace overlaymend
