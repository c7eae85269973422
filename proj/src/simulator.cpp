#include "overlaymend/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace overlaymend {

void ScenarioConfig::validate() const {
    topology.validate(num_nodes);
    protocol.validate();
    if (runs < 1) throw std::invalid_argument("scenario: runs must be >= 1");
    if (initial_forced_failures >= num_nodes) {
        throw std::invalid_argument("scenario: forced failures must leave at least one node");
    }
    if (scenario == Scenario::StableChurn) {
        if (steps < 1) throw std::invalid_argument("scenario: steps must be >= 1");
        if (transient_steps >= steps) {
            throw std::invalid_argument("scenario: transient window must be shorter than the run");
        }
    }
    if (livelock_cap < 1) throw std::invalid_argument("scenario: livelock cap must be >= 1");
}

LivelockError::LivelockError(std::size_t at_step)
    : std::runtime_error("macro step " + std::to_string(at_step) +
                         " exceeded the sub-event budget"),
      step(at_step) {}

void EventQueue::push_message(const ProtocolMessage& msg, double at) {
    SubEvent ev;
    ev.at = at;
    ev.seq = next_seq_++;
    ev.kind = SubEvent::Kind::Message;
    ev.message = msg;
    heap_.push(ev);
}

void EventQueue::push_timer(NodeId owner, std::uint64_t session_id, double at) {
    SubEvent ev;
    ev.at = at;
    ev.seq = next_seq_++;
    ev.kind = SubEvent::Kind::Timer;
    ev.timer_owner = owner;
    ev.session_id = session_id;
    heap_.push(ev);
}

SubEvent EventQueue::pop() {
    SubEvent ev = heap_.top();
    heap_.pop();
    if (ev.at > now_) now_ = ev.at;
    return ev;
}

void EventQueue::clear() {
    while (!heap_.empty()) heap_.pop();
}

void EventQueue::drop_timers() {
    std::vector<SubEvent> keep;
    keep.reserve(heap_.size());
    while (!heap_.empty()) {
        if (heap_.top().kind == SubEvent::Kind::Message) keep.push_back(heap_.top());
        heap_.pop();
    }
    for (const auto& ev : keep) heap_.push(ev);  // seq values survive, so order does too
}

void Simulator::QueueSink::send(const ProtocolMessage& msg) {
    ++sim_->messages_sent_;
    sim_->queue_.push_message(msg, sim_->queue_.now() + kMessageLatency);
}

void Simulator::QueueSink::schedule_timer(NodeId owner, std::uint64_t session_id, double delay) {
    sim_->queue_.push_timer(owner, session_id, sim_->queue_.now() + delay);
}

OverlayGraph Simulator::make_bootstrap(const ScenarioConfig& cfg, std::uint64_t run_seed) {
    cfg.validate();
    Rng topology_rng = make_stream(run_seed, StreamTag::Topology);
    return generate(cfg.topology, cfg.num_nodes, topology_rng);
}

ProtocolConfig Simulator::resolve_protocol(const ScenarioConfig& cfg, const OverlayGraph& g,
                                           bool protocol_on) {
    ProtocolConfig pc = cfg.protocol;
    pc.enabled = protocol_on;
    if (pc.threshold_degree == 0) {
        if (cfg.topology.family == TopologyKind::Family::Uniform) {
            pc.threshold_degree = cfg.topology.degree;
        } else {
            const double mean =
                g.active_count() == 0
                    ? 0.0
                    : 2.0 * static_cast<double>(g.edge_count()) /
                          static_cast<double>(g.active_count());
            pc.threshold_degree = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                               std::ceil(mean)));
        }
    }
    return pc;
}

Simulator::Simulator(const ScenarioConfig& cfg, bool protocol_on)
    : Simulator(cfg, protocol_on, cfg.seed) {}

Simulator::Simulator(const ScenarioConfig& cfg, bool protocol_on, std::uint64_t run_seed)
    : cfg_(cfg),
      protocol_on_(protocol_on),
      churn_rng_(make_stream(run_seed, StreamTag::Churn)),
      protocol_rng_(make_stream(run_seed, StreamTag::Protocol)),
      graph_(make_bootstrap(cfg_, run_seed)),
      sink_(this),
      engine_(graph_, resolve_protocol(cfg_, graph_, protocol_on), protocol_rng_, sink_),
      stamp_(graph_.slot_count(), 0) {
    engine_.prime_from_graph();
    initial_mean_degree_ = graph_.active_count() == 0
                               ? 0.0
                               : 2.0 * static_cast<double>(graph_.edge_count()) /
                                     static_cast<double>(graph_.active_count());
}

Simulator::Simulator(OverlayGraph graph, const ProtocolConfig& protocol, bool protocol_on,
                     std::uint64_t run_seed, std::size_t livelock_cap)
    : cfg_(),
      protocol_on_(protocol_on),
      churn_rng_(make_stream(run_seed, StreamTag::Churn)),
      protocol_rng_(make_stream(run_seed, StreamTag::Protocol)),
      graph_(std::move(graph)),
      sink_(this),
      engine_(graph_,
              [&] {
                  ProtocolConfig pc = protocol;
                  pc.enabled = protocol_on;
                  return pc;
              }(),
              protocol_rng_, sink_),
      scripted_(true),
      stamp_(graph_.slot_count(), 0) {
    cfg_.num_nodes = graph_.slot_count();
    cfg_.protocol = protocol;
    cfg_.livelock_cap = livelock_cap;
    engine_.prime_from_graph();
    initial_mean_degree_ = graph_.active_count() == 0
                               ? 0.0
                               : 2.0 * static_cast<double>(graph_.edge_count()) /
                                     static_cast<double>(graph_.active_count());
}

void Simulator::set_trace(std::ostream* out) {
    trace_ = out;
    if (trace_) *trace_ << "step,sub_time,type,from,to,payload\n";
}

void Simulator::trace_event(double at, const char* type, NodeId from, NodeId to,
                            const std::string& payload) {
    if (!trace_) return;
    char time_buf[48];
    std::snprintf(time_buf, sizeof(time_buf), "%.9g", at);
    *trace_ << step_ << "," << time_buf << "," << type << "," << from << "," << to << ","
            << payload << "\n";
}

void Simulator::begin_step() {
    queue_.set_now(0.0);
    step_events_ = 0;
}

void Simulator::settle() {
    while (!queue_.empty()) {
        if (++step_events_ > cfg_.livelock_cap) throw LivelockError(step_);
        const SubEvent ev = queue_.pop();
        if (ev.kind == SubEvent::Kind::Timer) {
            trace_event(ev.at, "timer", ev.timer_owner, ev.timer_owner,
                        std::to_string(ev.session_id));
            engine_.timer_expired(ev.timer_owner, ev.session_id);
            continue;
        }
        const ProtocolMessage& msg = ev.message;
        std::string payload;
        switch (msg.kind) {
            case MessageKind::LinkAnswer:
                payload = msg.accepted ? "accept" : "refuse";
                break;
            case MessageKind::LinkCreated:
            case MessageKind::NeighborLost:
                payload = std::to_string(msg.subject);
                break;
            case MessageKind::LinkRequest:
                break;
        }
        trace_event(ev.at, message_kind_name(msg.kind), msg.from, msg.to, payload);
        engine_.deliver(msg);
    }
}

void Simulator::do_failure() {
    const auto actives = graph_.active_nodes();
    if (actives.empty()) return;
    const NodeId victim = actives[churn_rng_.index(actives.size())];
    trace_event(queue_.now(), "fail", victim, victim, "");
    engine_.node_failed(graph_.fail_node(victim));
}

void Simulator::do_arrival() {
    const auto inactives = graph_.inactive_nodes();
    if (inactives.empty()) return;
    const NodeId n = inactives[churn_rng_.index(inactives.size())];
    graph_.activate_node(n);
    engine_.node_activated(n);
    const auto label = graph_.cluster_of(n);
    trace_event(queue_.now(), "arrive", n, n, label ? std::to_string(*label) : "");
    // Target choice depends only on the active set, never on edges, so a
    // repair-enabled and a repair-disabled leg draw identical joins.
    const auto targets = join_targets(graph_, n, cfg_.topology, churn_rng_);
    for (const NodeId t : targets) {
        graph_.add_link(n, t);
        trace_event(queue_.now(), "join", n, t, "");
        engine_.link_added(n, t);
    }
}

void Simulator::append_sample(const StepHooks& hooks, std::vector<MetricsRecord>& records) {
    records.push_back(
        sample_metrics(graph_, engine_, step_, messages_sent_, stamp_, stamp_generation_));
    if (hooks.on_sample) hooks.on_sample(*this, step_);
}

std::vector<MetricsRecord> Simulator::run(const StepHooks& hooks) {
    if (started_) throw std::logic_error("Simulator::run: already driven");
    if (scripted_) throw std::logic_error("Simulator::run: scripted harness cannot run scenarios");
    started_ = true;
    std::vector<MetricsRecord> records;
    step_ = 0;
    for (std::size_t i = 0; i < cfg_.initial_forced_failures; ++i) {
        if (graph_.active_count() == 0) break;
        begin_step();
        do_failure();
        settle();
    }
    append_sample(hooks, records);
    if (cfg_.scenario == Scenario::StableChurn) {
        for (step_ = 1; step_ <= cfg_.steps; ++step_) {
            begin_step();
            do_failure();
            settle();
            do_arrival();
            settle();
            append_sample(hooks, records);
        }
    } else {
        for (step_ = 1; graph_.active_count() > 0; ++step_) {
            begin_step();
            do_failure();
            settle();
            append_sample(hooks, records);
        }
    }
    return records;
}

MetricsRecord Simulator::sample_now() {
    return sample_metrics(graph_, engine_, step_, messages_sent_, stamp_, stamp_generation_);
}

void Simulator::fail_now(NodeId victim) {
    trace_event(queue_.now(), "fail", victim, victim, "");
    engine_.node_failed(graph_.fail_node(victim));
}

void Simulator::join_now(NodeId n, const std::vector<NodeId>& targets) {
    graph_.activate_node(n);
    engine_.node_activated(n);
    for (const NodeId t : targets) {
        graph_.add_link(n, t);
        engine_.link_added(n, t);
    }
}

void Simulator::inject_timer(NodeId owner, std::uint64_t session_id, double at) {
    queue_.push_timer(owner, session_id, at);
}

void Simulator::inject_message(const ProtocolMessage& msg, double at) {
    queue_.push_message(msg, at);
}

void Simulator::clear_queue() { queue_.clear(); }

}  // namespace overlaymend
