#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <vector>

#include "overlaymend/graph.hpp"
#include "overlaymend/metrics.hpp"
#include "overlaymend/protocol.hpp"
#include "overlaymend/rng.hpp"
#include "overlaymend/topology.hpp"

namespace overlaymend {

enum class Scenario : std::uint8_t { StableChurn, ProgressiveFailure };

// Time is two-level: macro steps count churn events and samples, while repair
// traffic inside a step runs on a real-valued sub-clock (contention waits
// plus a fixed per-hop latency) that drains to quiescence before the step
// ends.
inline constexpr double kMessageLatency = 1e-6;

struct ScenarioConfig {
    TopologyKind topology;
    std::size_t num_nodes{200};
    ProtocolConfig protocol;  // threshold_degree 0 derives from the topology
    Scenario scenario{Scenario::StableChurn};
    std::size_t steps{500};   // StableChurn only; ProgressiveFailure runs dry
    std::size_t initial_forced_failures{0};
    std::uint64_t seed{0};
    std::size_t runs{1};
    std::size_t transient_steps{50};
    std::size_t livelock_cap{1000000};

    void validate() const;
    bool operator==(const ScenarioConfig&) const = default;
};

// A macro step exceeded the sub-event budget; repair traffic never settled.
struct LivelockError : std::runtime_error {
    explicit LivelockError(std::size_t at_step);
    std::size_t step;
};

struct SubEvent {
    enum class Kind : std::uint8_t { Message, Timer };
    double at{};
    std::uint64_t seq{};
    Kind kind{Kind::Message};
    ProtocolMessage message{};
    NodeId timer_owner{};
    std::uint64_t session_id{};
};

// Min-heap on (at, seq); seq breaks ties in insertion order so simultaneous
// events replay identically.
class EventQueue {
public:
    double now() const { return now_; }
    void set_now(double t) { now_ = t; }
    void push_message(const ProtocolMessage& msg, double at);
    void push_timer(NodeId owner, std::uint64_t session_id, double at);
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    SubEvent pop();  // advances now() to the event's time
    void clear();
    // Removes pending timers, keeping messages and their ordering intact.
    void drop_timers();

private:
    struct Later {
        bool operator()(const SubEvent& a, const SubEvent& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<SubEvent, std::vector<SubEvent>, Later> heap_;
    double now_{0.0};
    std::uint64_t next_seq_{0};
};

class Simulator;

struct StepHooks {
    // Called right after each sample is appended, step 0 included.
    std::function<void(const Simulator&, std::size_t step)> on_sample;
};

// One run of one scenario leg. Seeding is split into topology, churn and
// protocol streams so a repair-enabled and a repair-disabled leg of the same
// run seed see identical bootstrap graphs and identical churn choices.
class Simulator {
public:
    Simulator(const ScenarioConfig& cfg, bool protocol_on);
    Simulator(const ScenarioConfig& cfg, bool protocol_on, std::uint64_t run_seed);

    // Scripted harness over an explicit graph; churn and joins stay manual.
    // protocol.threshold_degree must be resolved (>= 1).
    Simulator(OverlayGraph graph, const ProtocolConfig& protocol, bool protocol_on,
              std::uint64_t run_seed, std::size_t livelock_cap = 1000000);

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    const ScenarioConfig& config() const { return cfg_; }
    bool protocol_on() const { return protocol_on_; }
    const OverlayGraph& graph() const { return graph_; }
    OverlayGraph& mutable_graph() { return graph_; }
    const ProtocolEngine& engine() const { return engine_; }
    std::uint64_t messages_sent() const { return messages_sent_; }
    double initial_mean_degree() const { return initial_mean_degree_; }
    std::size_t resolved_threshold() const { return engine_.config().threshold_degree; }
    std::size_t current_step() const { return step_; }

    // CSV trace of every churn event, timer firing and message delivery.
    // Must be set before run(); the header is written immediately.
    void set_trace(std::ostream* out);

    // Executes the whole scenario and returns one record per sample. Either
    // this or the scripted accessors drive a Simulator, not both.
    std::vector<MetricsRecord> run(const StepHooks& hooks = {});

    MetricsRecord sample_now();

    // Scripted access for protocol-level tests.
    void fail_now(NodeId victim);
    void join_now(NodeId n, const std::vector<NodeId>& targets);
    void inject_timer(NodeId owner, std::uint64_t session_id, double at);
    void inject_message(const ProtocolMessage& msg, double at);
    void clear_queue();
    void drop_timers() { queue_.drop_timers(); }
    void set_queue_time(double t) { queue_.set_now(t); }
    double queue_time() const { return queue_.now(); }
    std::size_t queue_size() const { return queue_.size(); }
    void deliver_to_quiescence() { settle(); }

private:
    class QueueSink : public EmitSink {
    public:
        explicit QueueSink(Simulator* sim) : sim_(sim) {}
        void send(const ProtocolMessage& msg) override;
        void schedule_timer(NodeId owner, std::uint64_t session_id, double delay) override;

    private:
        Simulator* sim_;
    };

    static OverlayGraph make_bootstrap(const ScenarioConfig& cfg, std::uint64_t run_seed);
    static ProtocolConfig resolve_protocol(const ScenarioConfig& cfg, const OverlayGraph& g,
                                           bool protocol_on);

    void begin_step();
    void settle();
    void do_failure();
    void do_arrival();
    void append_sample(const StepHooks& hooks, std::vector<MetricsRecord>& records);
    void trace_event(double at, const char* type, NodeId from, NodeId to,
                     const std::string& payload);

    ScenarioConfig cfg_;
    bool protocol_on_;
    Rng churn_rng_;
    Rng protocol_rng_;
    OverlayGraph graph_;
    double initial_mean_degree_{0.0};
    EventQueue queue_;
    QueueSink sink_;
    ProtocolEngine engine_;
    std::uint64_t messages_sent_{0};
    std::size_t step_{0};
    std::size_t step_events_{0};
    bool started_{false};
    bool scripted_{false};
    std::ostream* trace_{nullptr};
    std::vector<std::uint32_t> stamp_;
    std::uint32_t stamp_generation_{0};
};

}  // namespace overlaymend
