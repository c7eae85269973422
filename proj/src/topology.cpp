#include "overlaymend/topology.hpp"

#include <map>
#include <stdexcept>
#include <string>

namespace overlaymend {

TopologyKind TopologyKind::uniform(std::size_t degree) {
    TopologyKind k;
    k.family = Family::Uniform;
    k.degree = degree;
    return k;
}

TopologyKind TopologyKind::clustered(std::size_t clusters, double intra, double inter) {
    TopologyKind k;
    k.family = Family::Clustered;
    k.clusters = clusters;
    k.intra_prob = intra;
    k.inter_prob = inter;
    return k;
}

TopologyKind TopologyKind::random(double edge_prob) {
    TopologyKind k;
    k.family = Family::Random;
    k.edge_prob = edge_prob;
    return k;
}

void TopologyKind::validate(std::size_t num_nodes) const {
    if (num_nodes == 0) throw std::invalid_argument("topology: need at least one node");
    switch (family) {
        case Family::Uniform:
            if (degree < 1) throw std::invalid_argument("uniform topology: degree must be >= 1");
            if (degree >= num_nodes) {
                throw std::invalid_argument("uniform topology: degree must be < node count");
            }
            if ((num_nodes * degree) % 2 != 0) {
                throw std::invalid_argument("uniform topology: node count * degree must be even");
            }
            break;
        case Family::Clustered:
            if (clusters < 2) {
                throw std::invalid_argument("clustered topology: need at least 2 clusters");
            }
            if (num_nodes % clusters != 0) {
                throw std::invalid_argument(
                    "clustered topology: node count must be divisible by the cluster count");
            }
            if (intra_prob < 0.0 || intra_prob > 1.0 || inter_prob < 0.0 || inter_prob > 1.0) {
                throw std::invalid_argument("clustered topology: probabilities must be in [0, 1]");
            }
            break;
        case Family::Random:
            if (edge_prob < 0.0 || edge_prob > 1.0) {
                throw std::invalid_argument("random topology: edge probability must be in [0, 1]");
            }
            break;
    }
}

namespace {

OverlayGraph pair_regular(std::size_t n, std::size_t degree, Rng& rng) {
    std::vector<NodeId> stubs;
    stubs.reserve(n * degree);
    // Retry whole pairings rather than patching collisions; patching skews the
    // degree distribution at small n.
    constexpr std::size_t kMaxAttempts = 1000000;
    for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
        stubs.clear();
        for (NodeId v = 0; v < n; ++v) {
            for (std::size_t k = 0; k < degree; ++k) stubs.push_back(v);
        }
        rng.shuffle(stubs);
        OverlayGraph g(n);
        bool simple = true;
        for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
            NodeId a = stubs[i], b = stubs[i + 1];
            if (a == b || g.has_link(a, b)) {
                simple = false;
                break;
            }
            g.add_link(a, b);
        }
        if (simple) return g;
    }
    throw std::runtime_error("gen_uniform: no simple pairing found");
}

}  // namespace

OverlayGraph gen_uniform(std::size_t n, std::size_t degree, Rng& rng) {
    TopologyKind::uniform(degree).validate(n);
    // Simple pairings become vanishingly rare past half density, but the
    // complement of an (n-1-degree)-regular graph is degree-regular and the
    // complement bijection keeps the draw uniform.
    if (degree * 2 > n - 1) {
        const OverlayGraph sparse = pair_regular(n, n - 1 - degree, rng);
        OverlayGraph g(n);
        for (NodeId a = 0; a + 1 < n; ++a) {
            for (NodeId b = a + 1; b < n; ++b) {
                if (!sparse.has_link(a, b)) g.add_link(a, b);
            }
        }
        return g;
    }
    return pair_regular(n, degree, rng);
}

OverlayGraph gen_clustered(std::size_t n, std::size_t clusters, double intra, double inter,
                           Rng& rng) {
    TopologyKind::clustered(clusters, intra, inter).validate(n);
    OverlayGraph g(n);
    // Equal-size contiguous blocks; validate() guarantees clusters divides n.
    std::vector<std::vector<NodeId>> members(clusters);
    {
        const std::size_t size = n / clusters;
        NodeId next = 0;
        for (std::size_t c = 0; c < clusters; ++c) {
            for (std::size_t k = 0; k < size; ++k) {
                g.set_cluster(next, static_cast<int>(c));
                members[c].push_back(next);
                ++next;
            }
        }
    }
    for (std::size_t c = 0; c < clusters; ++c) {
        const auto& nodes = members[c];
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < nodes.size(); ++j) {
                if (rng.chance(intra)) g.add_link(nodes[i], nodes[j]);
            }
        }
    }
    for (NodeId u = 0; u < n; ++u) {
        const auto own = static_cast<std::size_t>(*g.cluster_of(u));
        for (std::size_t c = 0; c < clusters; ++c) {
            if (c == own || members[c].empty()) continue;
            if (rng.chance(inter)) {
                g.add_link(u, members[c][rng.index(members[c].size())]);
            }
        }
    }
    return g;
}

OverlayGraph gen_random(std::size_t n, double edge_prob, Rng& rng) {
    TopologyKind::random(edge_prob).validate(n);
    OverlayGraph g(n);
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (rng.chance(edge_prob)) g.add_link(u, v);
        }
    }
    return g;
}

OverlayGraph generate(const TopologyKind& kind, std::size_t n, Rng& rng) {
    switch (kind.family) {
        case TopologyKind::Family::Uniform:
            return gen_uniform(n, kind.degree, rng);
        case TopologyKind::Family::Clustered:
            return gen_clustered(n, kind.clusters, kind.intra_prob, kind.inter_prob, rng);
        case TopologyKind::Family::Random:
            return gen_random(n, kind.edge_prob, rng);
    }
    throw std::logic_error("generate: unknown topology family");
}

std::vector<NodeId> join_targets_uniform(const OverlayGraph& g, NodeId n, std::size_t degree,
                                         Rng& rng) {
    std::vector<NodeId> candidates;
    for (NodeId m : g.active_nodes()) {
        if (m != n) candidates.push_back(m);
    }
    const std::size_t want = std::min(degree, candidates.size());
    // Partial Fisher-Yates: the first `want` slots end up a uniform sample
    // without replacement.
    for (std::size_t i = 0; i < want; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.index(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(want);
    return candidates;
}

std::vector<NodeId> join_targets_clustered(const OverlayGraph& g, NodeId n, int cluster,
                                           double intra, double inter, Rng& rng) {
    std::map<int, std::vector<NodeId>> active_by_cluster;
    for (NodeId m : g.active_nodes()) {
        if (m == n) continue;
        if (auto label = g.cluster_of(m)) active_by_cluster[*label].push_back(m);
    }
    std::vector<NodeId> targets;
    if (auto it = active_by_cluster.find(cluster); it != active_by_cluster.end()) {
        for (NodeId m : it->second) {
            if (rng.chance(intra)) targets.push_back(m);
        }
    }
    for (const auto& [label, nodes] : active_by_cluster) {
        if (label == cluster) continue;
        if (rng.chance(inter)) targets.push_back(nodes[rng.index(nodes.size())]);
    }
    return targets;
}

std::vector<NodeId> join_targets_random(const OverlayGraph& g, NodeId n, double edge_prob,
                                        Rng& rng) {
    std::vector<NodeId> targets;
    for (NodeId m : g.active_nodes()) {
        if (m != n && rng.chance(edge_prob)) targets.push_back(m);
    }
    return targets;
}

std::vector<NodeId> join_targets(const OverlayGraph& g, NodeId n, const TopologyKind& kind,
                                 Rng& rng) {
    switch (kind.family) {
        case TopologyKind::Family::Uniform:
            return join_targets_uniform(g, n, kind.degree, rng);
        case TopologyKind::Family::Clustered: {
            const auto label = g.cluster_of(n);
            if (!label) throw std::logic_error("join_targets: node has no cluster label");
            return join_targets_clustered(g, n, *label, kind.intra_prob, kind.inter_prob, rng);
        }
        case TopologyKind::Family::Random:
            return join_targets_random(g, n, kind.edge_prob, rng);
    }
    throw std::logic_error("join_targets: unknown topology family");
}

void join_uniform(OverlayGraph& g, NodeId n, std::size_t degree, Rng& rng) {
    for (NodeId m : join_targets_uniform(g, n, degree, rng)) g.add_link(n, m);
}

void join_clustered(OverlayGraph& g, NodeId n, int cluster, double intra, double inter, Rng& rng) {
    for (NodeId m : join_targets_clustered(g, n, cluster, intra, inter, rng)) g.add_link(n, m);
}

}  // namespace overlaymend
