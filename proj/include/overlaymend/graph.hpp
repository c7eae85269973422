#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

namespace overlaymend {

using NodeId = std::uint32_t;

enum class NodeState : std::uint8_t { Active, Inactive };

// Snapshot taken at the instant a node fails, before any repair runs:
// the failed node's neighbour list plus each survivor's own list.
struct FailResult {
    NodeId failed{};
    std::set<NodeId> former_neighbors;
    std::map<NodeId, std::set<NodeId>> neighbor_adjacency;
};

// Undirected simple graph over a fixed universe of node slots. Slots toggle
// between Active and Inactive; only Active slots may carry links, so failing
// a node drops all of its edges at once.
class OverlayGraph {
public:
    explicit OverlayGraph(std::size_t slots, NodeState initial = NodeState::Active);

    std::size_t slot_count() const { return adjacency_.size(); }
    NodeState state(NodeId n) const;
    bool is_active(NodeId n) const { return state(n) == NodeState::Active; }
    std::size_t active_count() const { return active_count_; }
    std::vector<NodeId> active_nodes() const;    // ascending ids
    std::vector<NodeId> inactive_nodes() const;  // ascending ids

    const std::set<NodeId>& neighbors(NodeId n) const;
    std::size_t degree(NodeId n) const { return neighbors(n).size(); }
    bool has_link(NodeId a, NodeId b) const;
    std::size_t edge_count() const { return edge_count_; }

    // Cluster labels survive failure so a recycled slot rejoins its cluster.
    std::optional<int> cluster_of(NodeId n) const;
    void set_cluster(NodeId n, int label);

    // Idempotent. Throws std::invalid_argument on self-loops or ids out of
    // range, std::logic_error if either endpoint is Inactive.
    void add_link(NodeId a, NodeId b);

    // Marks f Inactive and removes every incident edge. Throws
    // std::logic_error if f is already Inactive.
    FailResult fail_node(NodeId f);

    // Recycles an Inactive slot with no links. Throws std::logic_error if
    // already Active. A cluster label, when given, replaces the stored one.
    void activate_node(NodeId n, std::optional<int> cluster = std::nullopt);

    // Test aid: verifies symmetry, no self-loops, edges only between Active
    // nodes, and the cached counters. Throws std::logic_error on violation.
    void check_consistency() const;

    // Edge-list snapshot: "# nodes=<N> active=<A> step=<t>" header, one
    // "c <id> <label>" row per labelled slot, one "u v" row per edge, u < v.
    void write_edge_list(std::ostream& out, std::size_t step) const;

private:
    void require_valid(NodeId n) const;

    std::vector<std::set<NodeId>> adjacency_;
    std::vector<NodeState> states_;
    std::vector<int> clusters_;  // -1 = unlabelled
    std::size_t active_count_{0};
    std::size_t edge_count_{0};
};

// Connected components over Active nodes. Each component is sorted
// ascending; components are ordered by their smallest member.
std::vector<std::vector<NodeId>> components(const OverlayGraph& g);

// Same partition via union-find. Kept as an independent route so the two
// implementations can cross-check each other.
std::vector<std::vector<NodeId>> components_union_find(const OverlayGraph& g);

// |largest component| / |active nodes|; 0 when no node is active.
double main_component_fraction(const OverlayGraph& g);

// Active nodes with degree zero.
std::size_t isolated_count(const OverlayGraph& g);

}  // namespace overlaymend
