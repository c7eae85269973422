#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "overlaymend/graph.hpp"
#include "overlaymend/rng.hpp"
#include "overlaymend/second_view.hpp"

namespace overlaymend {

enum class MessageKind : std::uint8_t { LinkRequest, LinkAnswer, LinkCreated, NeighborLost };

const char* message_kind_name(MessageKind kind);

// Wire vocabulary. `subject` carries the third node id for LinkCreated (the
// new neighbour of `from`) and NeighborLost (the lost one); `accepted` is
// meaningful for LinkAnswer only.
struct ProtocolMessage {
    MessageKind kind{};
    NodeId from{};
    NodeId to{};
    NodeId subject{};
    bool accepted{false};

    static ProtocolMessage link_request(NodeId from, NodeId to);
    static ProtocolMessage link_answer(NodeId from, NodeId to, bool accepted);
    static ProtocolMessage link_created(NodeId owner, NodeId new_neighbor, NodeId notified);
    static ProtocolMessage neighbor_lost(NodeId owner, NodeId lost, NodeId notified);

    bool operator==(const ProtocolMessage&) const = default;
};

struct ProtocolConfig {
    // Active repair stops once degree exceeds this; 0 means "derive from the
    // bootstrap topology" (exact degree for uniform, ceil of the generated
    // mean degree otherwise).
    std::size_t threshold_degree{0};
    double wait_min{0.0};
    double wait_max{1.0};
    bool enabled{true};

    void validate() const;
    bool operator==(const ProtocolConfig&) const = default;
};

// One (owner, failed neighbour) repair episode. At most one request is in
// flight per session; `pending` holds targets not yet contacted.
struct RepairSession {
    std::uint64_t id{};
    NodeId owner{};
    NodeId failed{};
    std::set<NodeId> pending;
    std::optional<NodeId> awaiting_answer;
};

enum class FailureClass : std::uint8_t { AlreadyFirst, StillSecond, Lost };

const char* failure_class_name(FailureClass c);

// Case split for a former neighbour p of a failed node, seen from a node
// with 1st neighbours `first` and 2nd-neighbour cache `second` (the entry
// for the failed node already dropped).
FailureClass classify_after_failure(NodeId p, const std::set<NodeId>& first,
                                    const SecondNeighborView& second);

// Where engine output goes. The simulator enqueues messages at now + latency
// and timers at now + delay; tests substitute recording sinks.
class EmitSink {
public:
    virtual ~EmitSink() = default;
    virtual void send(const ProtocolMessage& msg) = 0;
    virtual void schedule_timer(NodeId owner, std::uint64_t session_id, double delay) = 0;
};

// Per-node protocol state plus the event handlers. The engine mutates the
// shared graph when links close and keeps each node's 2nd-neighbour cache in
// step using only local information (neighbour lists exchanged over new
// links, plus LinkCreated / NeighborLost notifications).
//
// With `enabled` false the caches are maintained by applying the identical
// update primitives synchronously instead of via messages, so cache metrics
// stay meaningful while no repair traffic exists.
class ProtocolEngine {
public:
    ProtocolEngine(OverlayGraph& graph, ProtocolConfig config, Rng& rng, EmitSink& sink);

    const ProtocolConfig& config() const { return config_; }
    bool enabled() const { return config_.enabled; }

    const SecondNeighborView& view(NodeId n) const;
    const std::vector<RepairSession>& sessions(NodeId n) const;
    // Requesters this node has accepted whose link has not closed yet. They
    // count toward the degree guard and receive notifications.
    const std::set<NodeId>& committed(NodeId n) const;
    bool has_open_sessions() const;

    // Seeds every active node's cache from the current graph, as if all
    // bootstrap links had completed their exchange. Called once before a
    // scenario starts.
    void prime_from_graph();

    // Churn entry points, called in both modes after the graph changed.

    // Survivors drop their cache entry for the failed node, everyone two hops
    // out is told, and (enabled mode) each survivor opens a repair session
    // over the former neighbours it lost sight of.
    void node_failed(const FailResult& fail);

    // A link (a, b) from a join or bootstrap was added to the graph: both
    // ends exchange neighbour lists and notify their other neighbours.
    void link_added(NodeId a, NodeId b);

    // Clears protocol state for a recycled slot.
    void node_activated(NodeId n);

    // Event delivery (enabled mode).
    void deliver(const ProtocolMessage& msg);
    void timer_expired(NodeId owner, std::uint64_t session_id);

    // Verifies every cache equals a fresh rebuild from the graph and that
    // inactive nodes hold no state. Meaningful at quiescence. Test aid;
    // throws std::logic_error on violation.
    void check_view_coherence() const;

    // Additionally requires no open sessions and no half-open links.
    void check_quiescent() const;

private:
    struct NodeProtocol {
        SecondNeighborView view;
        std::set<NodeId> committed;
        std::vector<RepairSession> sessions;
    };

    // Degree as the threshold guard sees it: closed links plus accepted
    // requesters not yet closed.
    std::size_t effective_degree(NodeId n) const;

    // Cache primitives shared by the message handlers and the disabled-mode
    // synchronous path.
    void apply_link_created(NodeId n, NodeId q, NodeId m);
    void apply_neighbor_lost(NodeId n, NodeId q, NodeId lost);
    // Fresh snapshots for both ends of a link that just closed; also scrubs
    // each endpoint from the other's existing cache entries.
    void apply_handshake(NodeId a, NodeId b);

    void open_session(NodeId owner, const FailResult& fail);
    void continue_session(NodeId owner, std::size_t idx);
    void erase_session(NodeId owner, std::uint64_t session_id);

    void handle_link_request(const ProtocolMessage& msg);
    void handle_link_answer(const ProtocolMessage& msg);
    void resolve_answer(NodeId owner, NodeId target, bool accepted);

    OverlayGraph& graph_;
    ProtocolConfig config_;
    Rng* rng_;
    EmitSink* sink_;
    std::vector<NodeProtocol> nodes_;
    std::uint64_t next_session_id_{1};
};

}  // namespace overlaymend
