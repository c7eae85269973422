#include "overlaymend/graph.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace overlaymend {

OverlayGraph::OverlayGraph(std::size_t slots, NodeState initial)
    : adjacency_(slots),
      states_(slots, initial),
      clusters_(slots, -1),
      active_count_(initial == NodeState::Active ? slots : 0) {}

NodeState OverlayGraph::state(NodeId n) const {
    require_valid(n);
    return states_[n];
}

std::vector<NodeId> OverlayGraph::active_nodes() const {
    std::vector<NodeId> out;
    out.reserve(active_count_);
    for (NodeId n = 0; n < adjacency_.size(); ++n) {
        if (states_[n] == NodeState::Active) out.push_back(n);
    }
    return out;
}

std::vector<NodeId> OverlayGraph::inactive_nodes() const {
    std::vector<NodeId> out;
    out.reserve(adjacency_.size() - active_count_);
    for (NodeId n = 0; n < adjacency_.size(); ++n) {
        if (states_[n] == NodeState::Inactive) out.push_back(n);
    }
    return out;
}

const std::set<NodeId>& OverlayGraph::neighbors(NodeId n) const {
    require_valid(n);
    return adjacency_[n];
}

bool OverlayGraph::has_link(NodeId a, NodeId b) const {
    require_valid(a);
    require_valid(b);
    return adjacency_[a].count(b) > 0;
}

std::optional<int> OverlayGraph::cluster_of(NodeId n) const {
    require_valid(n);
    if (clusters_[n] < 0) return std::nullopt;
    return clusters_[n];
}

void OverlayGraph::set_cluster(NodeId n, int label) {
    require_valid(n);
    if (label < 0) throw std::invalid_argument("set_cluster: label must be non-negative");
    clusters_[n] = label;
}

void OverlayGraph::add_link(NodeId a, NodeId b) {
    require_valid(a);
    require_valid(b);
    if (a == b) throw std::invalid_argument("add_link: self-loop on node " + std::to_string(a));
    if (states_[a] != NodeState::Active || states_[b] != NodeState::Active) {
        throw std::logic_error("add_link: both endpoints must be Active");
    }
    if (adjacency_[a].insert(b).second) {
        adjacency_[b].insert(a);
        ++edge_count_;
    }
}

FailResult OverlayGraph::fail_node(NodeId f) {
    require_valid(f);
    if (states_[f] != NodeState::Active) {
        throw std::logic_error("fail_node: node " + std::to_string(f) + " is already Inactive");
    }
    FailResult result;
    result.failed = f;
    result.former_neighbors = adjacency_[f];
    for (NodeId n : result.former_neighbors) {
        result.neighbor_adjacency.emplace(n, adjacency_[n]);
    }
    for (NodeId n : result.former_neighbors) {
        adjacency_[n].erase(f);
        --edge_count_;
    }
    adjacency_[f].clear();
    states_[f] = NodeState::Inactive;
    --active_count_;
    return result;
}

void OverlayGraph::activate_node(NodeId n, std::optional<int> cluster) {
    require_valid(n);
    if (states_[n] == NodeState::Active) {
        throw std::logic_error("activate_node: node " + std::to_string(n) + " is already Active");
    }
    states_[n] = NodeState::Active;
    ++active_count_;
    if (cluster) set_cluster(n, *cluster);
}

void OverlayGraph::check_consistency() const {
    std::size_t active = 0;
    std::size_t half_edges = 0;
    for (NodeId n = 0; n < adjacency_.size(); ++n) {
        if (states_[n] == NodeState::Active) ++active;
        if (states_[n] == NodeState::Inactive && !adjacency_[n].empty()) {
            throw std::logic_error("consistency: inactive node " + std::to_string(n) + " has links");
        }
        for (NodeId m : adjacency_[n]) {
            if (m == n) throw std::logic_error("consistency: self-loop on " + std::to_string(n));
            if (m >= adjacency_.size()) throw std::logic_error("consistency: neighbor out of range");
            if (states_[m] != NodeState::Active) {
                throw std::logic_error("consistency: link to inactive node " + std::to_string(m));
            }
            if (adjacency_[m].count(n) == 0) {
                throw std::logic_error("consistency: asymmetric link " + std::to_string(n) + "-" +
                                       std::to_string(m));
            }
            ++half_edges;
        }
    }
    if (active != active_count_) throw std::logic_error("consistency: active count drifted");
    if (half_edges != 2 * edge_count_) throw std::logic_error("consistency: edge count drifted");
}

void OverlayGraph::write_edge_list(std::ostream& out, std::size_t step) const {
    out << "# nodes=" << adjacency_.size() << " active=" << active_count_ << " step=" << step
        << "\n";
    for (NodeId n = 0; n < adjacency_.size(); ++n) {
        if (clusters_[n] >= 0) out << "c " << n << " " << clusters_[n] << "\n";
    }
    for (NodeId n = 0; n < adjacency_.size(); ++n) {
        for (NodeId m : adjacency_[n]) {
            if (n < m) out << n << " " << m << "\n";
        }
    }
}

void OverlayGraph::require_valid(NodeId n) const {
    if (n >= adjacency_.size()) {
        throw std::invalid_argument("node id " + std::to_string(n) + " out of range");
    }
}

std::vector<std::vector<NodeId>> components(const OverlayGraph& g) {
    std::vector<std::vector<NodeId>> out;
    std::vector<bool> seen(g.slot_count(), false);
    for (NodeId root = 0; root < g.slot_count(); ++root) {
        if (seen[root] || !g.is_active(root)) continue;
        std::vector<NodeId> comp;
        std::vector<NodeId> frontier{root};
        seen[root] = true;
        while (!frontier.empty()) {
            NodeId n = frontier.back();
            frontier.pop_back();
            comp.push_back(n);
            for (NodeId m : g.neighbors(n)) {
                if (!seen[m]) {
                    seen[m] = true;
                    frontier.push_back(m);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

namespace {

// Minimal union-find over node slots.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), NodeId{0});
    }

    NodeId find(NodeId x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(NodeId a, NodeId b) {
        NodeId ra = find(a), rb = find(b);
        if (ra == rb) return;
        if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
        parent_[rb] = ra;
        if (rank_[ra] == rank_[rb]) ++rank_[ra];
    }

private:
    std::vector<NodeId> parent_;
    std::vector<std::uint8_t> rank_;
};

}  // namespace

std::vector<std::vector<NodeId>> components_union_find(const OverlayGraph& g) {
    UnionFind uf(g.slot_count());
    for (NodeId n = 0; n < g.slot_count(); ++n) {
        if (!g.is_active(n)) continue;
        for (NodeId m : g.neighbors(n)) {
            if (n < m) uf.unite(n, m);
        }
    }
    std::map<NodeId, std::vector<NodeId>> by_root;
    for (NodeId n = 0; n < g.slot_count(); ++n) {
        if (g.is_active(n)) by_root[uf.find(n)].push_back(n);
    }
    std::vector<std::vector<NodeId>> out;
    out.reserve(by_root.size());
    for (auto& [root, members] : by_root) {
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

double main_component_fraction(const OverlayGraph& g) {
    if (g.active_count() == 0) return 0.0;
    std::size_t largest = 0;
    for (const auto& comp : components(g)) largest = std::max(largest, comp.size());
    return static_cast<double>(largest) / static_cast<double>(g.active_count());
}

std::size_t isolated_count(const OverlayGraph& g) {
    std::size_t count = 0;
    for (NodeId n = 0; n < g.slot_count(); ++n) {
        if (g.is_active(n) && g.degree(n) == 0) ++count;
    }
    return count;
}

}  // namespace overlaymend
