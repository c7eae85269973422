#include "overlaymend/protocol.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace overlaymend {

const char* message_kind_name(MessageKind kind) {
    switch (kind) {
        case MessageKind::LinkRequest: return "link_request";
        case MessageKind::LinkAnswer: return "link_answer";
        case MessageKind::LinkCreated: return "link_created";
        case MessageKind::NeighborLost: return "neighbor_lost";
    }
    return "unknown";
}

ProtocolMessage ProtocolMessage::link_request(NodeId from, NodeId to) {
    return {MessageKind::LinkRequest, from, to, 0, false};
}

ProtocolMessage ProtocolMessage::link_answer(NodeId from, NodeId to, bool accepted) {
    return {MessageKind::LinkAnswer, from, to, 0, accepted};
}

ProtocolMessage ProtocolMessage::link_created(NodeId owner, NodeId new_neighbor, NodeId notified) {
    return {MessageKind::LinkCreated, owner, notified, new_neighbor, false};
}

ProtocolMessage ProtocolMessage::neighbor_lost(NodeId owner, NodeId lost, NodeId notified) {
    return {MessageKind::NeighborLost, owner, notified, lost, false};
}

void ProtocolConfig::validate() const {
    if (wait_min < 0.0 || !(wait_min < wait_max)) {
        throw std::invalid_argument("protocol: need 0 <= wait_min < wait_max");
    }
}

const char* failure_class_name(FailureClass c) {
    switch (c) {
        case FailureClass::AlreadyFirst: return "already_first";
        case FailureClass::StillSecond: return "still_second";
        case FailureClass::Lost: return "lost";
    }
    return "unknown";
}

FailureClass classify_after_failure(NodeId p, const std::set<NodeId>& first,
                                    const SecondNeighborView& second) {
    if (first.count(p) > 0) return FailureClass::AlreadyFirst;
    if (contains_second(second, p)) return FailureClass::StillSecond;
    return FailureClass::Lost;
}

ProtocolEngine::ProtocolEngine(OverlayGraph& graph, ProtocolConfig config, Rng& rng,
                               EmitSink& sink)
    : graph_(graph), config_(config), rng_(&rng), sink_(&sink), nodes_(graph.slot_count()) {
    config_.validate();
    if (config_.threshold_degree == 0) {
        throw std::invalid_argument("protocol engine: threshold_degree must be resolved (>= 1)");
    }
}

const SecondNeighborView& ProtocolEngine::view(NodeId n) const { return nodes_.at(n).view; }

const std::vector<RepairSession>& ProtocolEngine::sessions(NodeId n) const {
    return nodes_.at(n).sessions;
}

const std::set<NodeId>& ProtocolEngine::committed(NodeId n) const {
    return nodes_.at(n).committed;
}

bool ProtocolEngine::has_open_sessions() const {
    return std::any_of(nodes_.begin(), nodes_.end(),
                       [](const NodeProtocol& np) { return !np.sessions.empty(); });
}

std::size_t ProtocolEngine::effective_degree(NodeId n) const {
    return graph_.degree(n) + nodes_[n].committed.size();
}

void ProtocolEngine::prime_from_graph() {
    for (NodeId n = 0; n < graph_.slot_count(); ++n) {
        nodes_[n] = NodeProtocol{};
        if (graph_.is_active(n)) nodes_[n].view = rebuild_second_view(graph_, n);
    }
}

void ProtocolEngine::node_failed(const FailResult& fail) {
    const NodeId f = fail.failed;
    nodes_[f] = NodeProtocol{};
    // Nobody may keep a handle on the failed node, whatever state the episode
    // was in when it died.
    for (auto& np : nodes_) {
        np.committed.erase(f);
        for (auto& s : np.sessions) s.pending.erase(f);
    }
    for (NodeId n : fail.former_neighbors) {
        nodes_[n].view.via.erase(f);
    }
    // Two hops out the failed node lingers in caches keyed by its survivors;
    // each survivor tells its remaining neighbours.
    for (NodeId n : fail.former_neighbors) {
        for (NodeId m : graph_.neighbors(n)) {
            if (config_.enabled) {
                sink_->send(ProtocolMessage::neighbor_lost(n, f, m));
            } else {
                apply_neighbor_lost(m, n, f);
            }
        }
    }
    if (config_.enabled) {
        for (NodeId n : fail.former_neighbors) open_session(n, fail);
    }
}

void ProtocolEngine::open_session(NodeId owner, const FailResult& fail) {
    auto& np = nodes_[owner];
    std::set<NodeId> lost;
    for (NodeId p : fail.former_neighbors) {
        if (p == owner || !graph_.is_active(p)) continue;
        if (classify_after_failure(p, graph_.neighbors(owner), np.view) == FailureClass::Lost) {
            lost.insert(p);
        }
    }
    if (lost.empty()) return;
    if (effective_degree(owner) > config_.threshold_degree) return;
    RepairSession s;
    s.id = next_session_id_++;
    s.owner = owner;
    s.failed = fail.failed;
    s.pending = std::move(lost);
    np.sessions.push_back(std::move(s));
    sink_->schedule_timer(owner, np.sessions.back().id,
                          rng_->uniform(config_.wait_min, config_.wait_max));
}

void ProtocolEngine::timer_expired(NodeId owner, std::uint64_t session_id) {
    if (!graph_.is_active(owner)) return;
    auto& sessions = nodes_[owner].sessions;
    auto it = std::find_if(sessions.begin(), sessions.end(),
                           [&](const RepairSession& s) { return s.id == session_id; });
    if (it == sessions.end()) return;
    if (it->awaiting_answer) return;
    if (it->pending.empty()) {
        // Notifications emptied the work list before the timer fired.
        sessions.erase(it);
        return;
    }
    if (effective_degree(owner) > config_.threshold_degree) {
        sessions.erase(it);
        return;
    }
    auto pit = it->pending.begin();
    std::advance(pit, static_cast<std::ptrdiff_t>(rng_->index(it->pending.size())));
    const NodeId target = *pit;
    it->pending.erase(pit);
    it->awaiting_answer = target;
    sink_->send(ProtocolMessage::link_request(owner, target));
}

void ProtocolEngine::deliver(const ProtocolMessage& msg) {
    if (!config_.enabled) throw std::logic_error("deliver: protocol is disabled");
    switch (msg.kind) {
        case MessageKind::LinkRequest:
            handle_link_request(msg);
            return;
        case MessageKind::LinkAnswer:
            handle_link_answer(msg);
            return;
        case MessageKind::LinkCreated:
            if (graph_.is_active(msg.to)) apply_link_created(msg.to, msg.from, msg.subject);
            return;
        case MessageKind::NeighborLost:
            if (graph_.is_active(msg.to)) apply_neighbor_lost(msg.to, msg.from, msg.subject);
            return;
    }
    throw std::logic_error("deliver: unknown message kind");
}

void ProtocolEngine::handle_link_request(const ProtocolMessage& msg) {
    const NodeId requester = msg.from;
    const NodeId target = msg.to;
    if (!graph_.is_active(requester)) return;
    if (!graph_.is_active(target)) {
        // The target died with the request in flight; the requester observes
        // the same outcome as a refusal.
        resolve_answer(requester, target, false);
        return;
    }
    auto& np = nodes_[target];
    const bool is_first = graph_.has_link(target, requester) || np.committed.count(requester) > 0;
    if (is_first || contains_second(np.view, requester)) {
        sink_->send(ProtocolMessage::link_answer(target, requester, false));
        return;
    }
    sink_->send(ProtocolMessage::link_answer(target, requester, true));
    // Current contacts, half-open ones included, hear about the newcomer.
    for (NodeId m : graph_.neighbors(target)) {
        sink_->send(ProtocolMessage::link_created(target, requester, m));
    }
    for (NodeId m : np.committed) {
        sink_->send(ProtocolMessage::link_created(target, requester, m));
    }
    np.committed.insert(requester);
}

void ProtocolEngine::handle_link_answer(const ProtocolMessage& msg) {
    if (!graph_.is_active(msg.to)) {
        // Requester died while the answer travelled; release the half-open
        // promise on the answering side.
        if (msg.accepted && graph_.is_active(msg.from)) nodes_[msg.from].committed.erase(msg.to);
        return;
    }
    resolve_answer(msg.to, msg.from, msg.accepted);
}

void ProtocolEngine::resolve_answer(NodeId owner, NodeId target, bool accepted) {
    auto& sessions = nodes_[owner].sessions;
    auto it = std::find_if(sessions.begin(), sessions.end(), [&](const RepairSession& s) {
        return s.awaiting_answer && *s.awaiting_answer == target;
    });
    if (it == sessions.end()) return;
    it->awaiting_answer.reset();
    if (accepted) {
        // Existing contacts learn about the new link before it closes, so
        // their caches converge within one latency hop.
        for (NodeId m : graph_.neighbors(owner)) {
            if (m != target) sink_->send(ProtocolMessage::link_created(owner, target, m));
        }
        for (NodeId m : nodes_[owner].committed) {
            if (m != target) sink_->send(ProtocolMessage::link_created(owner, target, m));
        }
        if (graph_.is_active(target)) {
            nodes_[target].committed.erase(owner);
            graph_.add_link(owner, target);
            apply_handshake(owner, target);
        }
    }
    if (it->pending.empty()) {
        sessions.erase(it);
        return;
    }
    if (effective_degree(owner) > config_.threshold_degree) {
        sessions.erase(it);
        return;
    }
    sink_->schedule_timer(owner, it->id, rng_->uniform(config_.wait_min, config_.wait_max));
}

void ProtocolEngine::link_added(NodeId a, NodeId b) {
    if (!graph_.has_link(a, b)) throw std::logic_error("link_added: link missing from graph");
    apply_handshake(a, b);
    const auto notify = [&](NodeId owner, NodeId fresh) {
        for (NodeId m : graph_.neighbors(owner)) {
            if (m == fresh) continue;
            if (config_.enabled) {
                sink_->send(ProtocolMessage::link_created(owner, fresh, m));
            } else {
                apply_link_created(m, owner, fresh);
            }
        }
        for (NodeId m : nodes_[owner].committed) {
            if (m == fresh) continue;
            if (config_.enabled) {
                sink_->send(ProtocolMessage::link_created(owner, fresh, m));
            } else {
                apply_link_created(m, owner, fresh);
            }
        }
    };
    notify(a, b);
    notify(b, a);
}

void ProtocolEngine::node_activated(NodeId n) {
    if (!graph_.is_active(n)) throw std::logic_error("node_activated: node is Inactive");
    nodes_[n] = NodeProtocol{};
}

void ProtocolEngine::apply_link_created(NodeId n, NodeId q, NodeId m) {
    // The newcomer is no longer worth chasing, whoever reported it.
    for (auto& s : nodes_[n].sessions) s.pending.erase(m);
    if (m == n) return;
    if (!graph_.has_link(n, q)) return;  // stale: q is not a 1st neighbour
    if (graph_.has_link(n, m)) return;   // already a 1st neighbour
    nodes_[n].view.via[q].insert(m);
}

void ProtocolEngine::apply_neighbor_lost(NodeId n, NodeId q, NodeId lost) {
    auto it = nodes_[n].view.via.find(q);
    if (it != nodes_[n].view.via.end()) it->second.erase(lost);
}

void ProtocolEngine::apply_handshake(NodeId a, NodeId b) {
    // Each endpoint stops being the other's 2nd neighbour.
    for (auto& [q, through] : nodes_[a].view.via) through.erase(b);
    for (auto& [q, through] : nodes_[b].view.via) through.erase(a);
    const auto snapshot = [&](NodeId self, NodeId peer) {
        std::set<NodeId> through;
        const auto& own = graph_.neighbors(self);
        for (NodeId p : graph_.neighbors(peer)) {
            if (p != self && own.count(p) == 0) through.insert(p);
        }
        nodes_[self].view.via[peer] = std::move(through);
    };
    snapshot(a, b);
    snapshot(b, a);
}

void ProtocolEngine::check_view_coherence() const {
    for (NodeId n = 0; n < graph_.slot_count(); ++n) {
        const auto& np = nodes_[n];
        if (!graph_.is_active(n)) {
            if (!np.view.via.empty() || !np.committed.empty() || !np.sessions.empty()) {
                throw std::logic_error("coherence: inactive node " + std::to_string(n) +
                                       " holds protocol state");
            }
            continue;
        }
        if (np.view != rebuild_second_view(graph_, n)) {
            throw std::logic_error("coherence: cache of node " + std::to_string(n) +
                                   " differs from rebuild");
        }
    }
}

void ProtocolEngine::check_quiescent() const {
    check_view_coherence();
    for (NodeId n = 0; n < graph_.slot_count(); ++n) {
        if (!nodes_[n].sessions.empty()) {
            throw std::logic_error("quiescence: node " + std::to_string(n) +
                                   " has an open session");
        }
        if (!nodes_[n].committed.empty()) {
            throw std::logic_error("quiescence: node " + std::to_string(n) +
                                   " has a half-open link");
        }
    }
}

}  // namespace overlaymend
