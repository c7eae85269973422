#include <algorithm>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "overlaymend/graph.hpp"
#include "overlaymend/protocol.hpp"
#include "overlaymend/rng.hpp"
#include "overlaymend/second_view.hpp"
#include "overlaymend/simulator.hpp"

using namespace overlaymend;

namespace {

struct RecordingSink : EmitSink {
    struct TimerReq {
        NodeId owner;
        std::uint64_t session;
        double delay;
    };
    std::vector<ProtocolMessage> messages;
    std::vector<TimerReq> timers;

    void send(const ProtocolMessage& msg) override { messages.push_back(msg); }
    void schedule_timer(NodeId owner, std::uint64_t session_id, double delay) override {
        timers.push_back({owner, session_id, delay});
    }
    std::size_t count(MessageKind kind) const {
        return static_cast<std::size_t>(
            std::count_if(messages.begin(), messages.end(),
                          [&](const ProtocolMessage& m) { return m.kind == kind; }));
    }
};

// Star: hub 0 linked to leaves 1..leaf_count.
OverlayGraph make_star(std::size_t leaf_count) {
    OverlayGraph g(leaf_count + 1);
    for (NodeId leaf = 1; leaf <= leaf_count; ++leaf) g.add_link(0, leaf);
    return g;
}

std::size_t bfs_distance(const OverlayGraph& g, NodeId from, NodeId to) {
    std::vector<std::size_t> dist(g.slot_count(), SIZE_MAX);
    std::queue<NodeId> q;
    dist[from] = 0;
    q.push(from);
    while (!q.empty()) {
        NodeId cur = q.front();
        q.pop();
        if (cur == to) break;
        for (NodeId nb : g.neighbors(cur)) {
            if (dist[nb] == SIZE_MAX) {
                dist[nb] = dist[cur] + 1;
                q.push(nb);
            }
        }
    }
    return dist[to];
}

}  // namespace

TEST_CASE("classification after a central failure") {
    // Path 0-1-2-3 whose center of gravity 4 was linked to everyone; when 4
    // dies, node 0 keeps 1, still sees 2 through 1, and loses sight of 3.
    OverlayGraph g(5);
    g.add_link(0, 1);
    g.add_link(1, 2);
    g.add_link(2, 3);
    for (NodeId n = 0; n < 4; ++n) g.add_link(4, n);
    g.fail_node(4);

    const auto& first = g.neighbors(0);
    const auto second = rebuild_second_view(g, 0);
    CHECK(classify_after_failure(1, first, second) == FailureClass::AlreadyFirst);
    CHECK(classify_after_failure(2, first, second) == FailureClass::StillSecond);
    CHECK(classify_after_failure(3, first, second) == FailureClass::Lost);
}

TEST_CASE("message constructors fill the conventional fields") {
    auto req = ProtocolMessage::link_request(1, 2);
    CHECK(req.kind == MessageKind::LinkRequest);
    CHECK(req.from == 1);
    CHECK(req.to == 2);

    auto ans = ProtocolMessage::link_answer(2, 1, true);
    CHECK(ans.kind == MessageKind::LinkAnswer);
    CHECK(ans.accepted);

    auto created = ProtocolMessage::link_created(3, 7, 5);
    CHECK(created.kind == MessageKind::LinkCreated);
    CHECK(created.from == 3);
    CHECK(created.to == 5);
    CHECK(created.subject == 7);

    auto lost = ProtocolMessage::neighbor_lost(3, 9, 5);
    CHECK(lost.kind == MessageKind::NeighborLost);
    CHECK(lost.to == 5);
    CHECK(lost.subject == 9);
}

TEST_CASE("protocol config validation") {
    ProtocolConfig ok;
    ok.threshold_degree = 5;
    CHECK_NOTHROW(ok.validate());

    ProtocolConfig bad = ok;
    bad.wait_min = 1.0;
    bad.wait_max = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.wait_min = -0.5;
    bad.wait_max = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("engine requires a resolved threshold") {
    OverlayGraph g(2);
    Rng rng(1);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 0;
    CHECK_THROWS_AS(ProtocolEngine(g, pc, rng, sink), std::invalid_argument);
}

TEST_CASE("failure among mutually adjacent survivors opens no session") {
    // Triangle 0-1-2 plus node 3 linked to all: survivors already know each
    // other first-hand, so only loss notifications go out.
    OverlayGraph g(4);
    g.add_link(0, 1);
    g.add_link(1, 2);
    g.add_link(0, 2);
    for (NodeId n = 0; n < 3; ++n) g.add_link(3, n);
    Rng rng(1);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();

    engine.node_failed(g.fail_node(3));
    CHECK_FALSE(engine.has_open_sessions());
    CHECK(sink.timers.empty());
    // Each survivor tells its two remaining neighbours about the loss.
    CHECK(sink.messages.size() == 6);
    CHECK(sink.count(MessageKind::NeighborLost) == 6);
    for (const auto& m : sink.messages) CHECK(m.subject == 3);
}

TEST_CASE("hub failure opens one session per stranded leaf") {
    OverlayGraph g = make_star(5);
    Rng rng(2);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();

    engine.node_failed(g.fail_node(0));
    CHECK(sink.messages.empty());  // leaves have nobody left to notify
    REQUIRE(sink.timers.size() == 5);
    for (const auto& t : sink.timers) {
        CHECK(t.delay >= 0.0);
        CHECK(t.delay < 1.0);
    }
    for (NodeId leaf = 1; leaf <= 5; ++leaf) {
        REQUIRE(engine.sessions(leaf).size() == 1);
        const auto& s = engine.sessions(leaf)[0];
        CHECK(s.owner == leaf);
        CHECK(s.failed == 0);
        CHECK_FALSE(s.awaiting_answer.has_value());
        std::set<NodeId> expect;
        for (NodeId other = 1; other <= 5; ++other) {
            if (other != leaf) expect.insert(other);
        }
        CHECK(s.pending == expect);
    }
}

TEST_CASE("degree above threshold suppresses the session") {
    OverlayGraph wide(8);
    for (NodeId leaf = 1; leaf <= 5; ++leaf) wide.add_link(0, leaf);
    wide.add_link(1, 6);
    wide.add_link(1, 7);
    Rng rng(3);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 1;
    ProtocolEngine engine(wide, pc, rng, sink);
    engine.prime_from_graph();

    engine.node_failed(wide.fail_node(0));
    CHECK(engine.sessions(1).empty());  // degree 2 > threshold 1
    for (NodeId leaf = 2; leaf <= 5; ++leaf) CHECK(engine.sessions(leaf).size() == 1);
    CHECK(sink.timers.size() == 4);
    // Leaf 1 still notifies its two private neighbours of the loss.
    CHECK(sink.count(MessageKind::NeighborLost) == 2);
}

TEST_CASE("timer extracts one random pending target") {
    auto run_once = [](std::uint64_t seed) {
        OverlayGraph g = make_star(5);
        Rng rng(seed);
        RecordingSink sink;
        ProtocolConfig pc;
        pc.threshold_degree = 3;
        ProtocolEngine engine(g, pc, rng, sink);
        engine.prime_from_graph();
        engine.node_failed(g.fail_node(0));
        engine.timer_expired(1, engine.sessions(1)[0].id);
        return std::pair{engine.sessions(1)[0], sink.messages.back()};
    };

    auto [session, msg] = run_once(42);
    CHECK(msg.kind == MessageKind::LinkRequest);
    CHECK(msg.from == 1);
    REQUIRE(session.awaiting_answer.has_value());
    CHECK(*session.awaiting_answer == msg.to);
    CHECK(session.pending.size() == 3);
    CHECK(session.pending.count(msg.to) == 0);

    auto [session2, msg2] = run_once(42);
    CHECK(msg2 == msg);  // same seed, same extraction
    CHECK(session2.pending == session.pending);
}

TEST_CASE("timer on an emptied session closes it silently") {
    OverlayGraph g = make_star(5);
    Rng rng(4);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();
    engine.node_failed(g.fail_node(0));

    const auto sid = engine.sessions(1)[0].id;
    // Gossip about links to every pending target drains the work list. The
    // reporting node is a live non-neighbour, so no via entry grows.
    for (NodeId m = 2; m <= 5; ++m) {
        engine.deliver(ProtocolMessage::link_created(m == 2 ? 3 : 2, m, 1));
    }
    CHECK(engine.sessions(1)[0].pending.empty());
    const auto msgs_before = sink.messages.size();
    engine.timer_expired(1, sid);
    CHECK(engine.sessions(1).empty());
    CHECK(sink.messages.size() == msgs_before);
}

TEST_CASE("timer aborts a session whose owner grew past the threshold") {
    OverlayGraph g = make_star(5);
    Rng rng(5);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 1;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();
    engine.node_failed(g.fail_node(0));
    REQUIRE(engine.sessions(1).size() == 1);
    const auto sid = engine.sessions(1)[0].id;

    g.add_link(1, 2);
    engine.link_added(1, 2);
    g.add_link(1, 3);
    engine.link_added(1, 3);
    const auto msgs_before = sink.messages.size();
    engine.timer_expired(1, sid);  // degree 2 > threshold 1
    CHECK(engine.sessions(1).empty());
    CHECK(sink.messages.size() == msgs_before);
}

TEST_CASE("timers for unknown sessions or dead owners are ignored") {
    OverlayGraph g = make_star(3);
    Rng rng(6);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();
    engine.node_failed(g.fail_node(0));

    engine.timer_expired(1, 999);  // no such session
    CHECK(engine.sessions(1).size() == 1);
    engine.timer_expired(0, 1);  // owner is the failed node
    CHECK(sink.count(MessageKind::LinkRequest) == 0);
}

TEST_CASE("requests from current or two-hop contacts are refused") {
    OverlayGraph g(3);
    g.add_link(0, 1);
    g.add_link(1, 2);
    Rng rng(7);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();

    engine.deliver(ProtocolMessage::link_request(0, 1));  // already a 1st neighbour
    REQUIRE(sink.messages.size() == 1);
    CHECK(sink.messages[0].kind == MessageKind::LinkAnswer);
    CHECK_FALSE(sink.messages[0].accepted);

    engine.deliver(ProtocolMessage::link_request(0, 2));  // 2nd neighbour via 1
    REQUIRE(sink.messages.size() == 2);
    CHECK(sink.messages[1].kind == MessageKind::LinkAnswer);
    CHECK(sink.messages[1].to == 0);
    CHECK_FALSE(sink.messages[1].accepted);
    CHECK(engine.committed(1).empty());
    CHECK(engine.committed(2).empty());
}

TEST_CASE("a stranger's request is accepted, gossiped and committed") {
    OverlayGraph g(4);
    g.add_link(0, 1);  // requester 3 is unknown to 0's side
    Rng rng(8);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 1;  // passive side has no degree guard
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();

    engine.deliver(ProtocolMessage::link_request(3, 0));
    REQUIRE(sink.messages.size() == 2);
    CHECK(sink.messages[0].kind == MessageKind::LinkAnswer);
    CHECK(sink.messages[0].accepted);
    CHECK(sink.messages[1] == ProtocolMessage::link_created(0, 3, 1));
    CHECK(engine.committed(0) == std::set<NodeId>{3});
    // The half-open link counts against quiescence until the answer lands.
    CHECK_THROWS_AS(engine.check_quiescent(), std::logic_error);

    // A second request from the same stranger now hits the committed set.
    engine.deliver(ProtocolMessage::link_request(3, 0));
    REQUIRE(sink.messages.size() == 3);
    CHECK_FALSE(sink.messages[2].accepted);
}

TEST_CASE("accepted answer closes the link and reschedules the session") {
    OverlayGraph g = make_star(5);
    Rng rng(9);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();
    engine.node_failed(g.fail_node(0));
    engine.timer_expired(1, engine.sessions(1)[0].id);
    const NodeId target = *engine.sessions(1)[0].awaiting_answer;
    const auto timers_before = sink.timers.size();

    engine.deliver(ProtocolMessage::link_answer(target, 1, true));
    CHECK(g.has_link(1, target));
    REQUIRE(engine.sessions(1).size() == 1);
    CHECK_FALSE(engine.sessions(1)[0].awaiting_answer.has_value());
    CHECK(engine.sessions(1)[0].pending.size() == 3);
    CHECK(sink.timers.size() == timers_before + 1);  // next round scheduled
    // Both ends now see each other first-hand; caches were handshaken.
    CHECK(engine.view(1).via.count(target) == 1);
    CHECK(engine.view(target).via.count(1) == 1);
}

TEST_CASE("refused answer drops the target for good") {
    OverlayGraph g = make_star(5);
    Rng rng(10);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();
    engine.node_failed(g.fail_node(0));
    engine.timer_expired(1, engine.sessions(1)[0].id);
    const NodeId target = *engine.sessions(1)[0].awaiting_answer;
    const auto timers_before = sink.timers.size();

    engine.deliver(ProtocolMessage::link_answer(target, 1, false));
    CHECK_FALSE(g.has_link(1, target));
    REQUIRE(engine.sessions(1).size() == 1);
    CHECK_FALSE(engine.sessions(1)[0].awaiting_answer.has_value());
    CHECK(engine.sessions(1)[0].pending.count(target) == 0);  // not retried
    CHECK(engine.sessions(1)[0].pending.size() == 3);
    CHECK(sink.timers.size() == timers_before + 1);
}

TEST_CASE("a request reaching a dead target counts as a refusal") {
    OverlayGraph g = make_star(5);
    Rng rng(11);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();
    engine.node_failed(g.fail_node(0));
    engine.timer_expired(1, engine.sessions(1)[0].id);
    const NodeId target = *engine.sessions(1)[0].awaiting_answer;

    engine.node_failed(g.fail_node(target));
    const auto timers_before = sink.timers.size();
    engine.deliver(ProtocolMessage::link_request(1, target));  // the in-flight request
    REQUIRE(engine.sessions(1).size() == 1);
    CHECK_FALSE(engine.sessions(1)[0].awaiting_answer.has_value());
    CHECK(engine.sessions(1)[0].pending.count(target) == 0);
    CHECK(sink.timers.size() == timers_before + 1);
}

TEST_CASE("link gossip prunes pending targets and extends the cache") {
    OverlayGraph g(5);
    g.add_link(0, 1);
    g.add_link(0, 2);
    Rng rng(12);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();

    // New 2nd neighbour through a real 1st neighbour is recorded.
    engine.deliver(ProtocolMessage::link_created(1, 4, 0));
    CHECK(engine.view(0).via.at(1) == std::set<NodeId>{4});
    // Recorded under a second via as well.
    engine.deliver(ProtocolMessage::link_created(2, 4, 0));
    CHECK(engine.view(0).via.at(2) == std::set<NodeId>{4});
    // Self and existing 1st neighbours are not cache-worthy.
    engine.deliver(ProtocolMessage::link_created(1, 0, 0));
    CHECK(engine.view(0).via.at(1) == std::set<NodeId>{4});
    engine.deliver(ProtocolMessage::link_created(1, 2, 0));
    CHECK(engine.view(0).via.at(1) == std::set<NodeId>{4});
    // Gossip from a non-neighbour cannot invent a via entry.
    engine.deliver(ProtocolMessage::link_created(3, 4, 0));
    CHECK(engine.view(0).via.count(3) == 0);
}

TEST_CASE("loss gossip trims exactly the named route") {
    OverlayGraph g(4);
    g.add_link(0, 1);
    g.add_link(0, 2);
    g.add_link(1, 3);
    g.add_link(2, 3);
    Rng rng(13);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();
    REQUIRE(engine.view(0).via.at(1) == std::set<NodeId>{3});
    REQUIRE(engine.view(0).via.at(2) == std::set<NodeId>{3});

    engine.deliver(ProtocolMessage::neighbor_lost(1, 3, 0));
    CHECK(engine.view(0).via.at(1).empty());
    CHECK(contains_second(engine.view(0), 3));  // still reachable via 2
    engine.deliver(ProtocolMessage::neighbor_lost(2, 3, 0));
    CHECK_FALSE(contains_second(engine.view(0), 3));
}

TEST_CASE("disabled engine keeps caches current without any traffic") {
    Rng gen(55);
    OverlayGraph g = gen_random(30, 0.12, gen);
    Rng rng(14);
    RecordingSink sink;
    ProtocolConfig pc;
    pc.threshold_degree = 3;
    pc.enabled = false;
    ProtocolEngine engine(g, pc, rng, sink);
    engine.prime_from_graph();

    CHECK_THROWS_AS(engine.deliver(ProtocolMessage::link_request(0, 1)), std::logic_error);

    Rng churn(15);
    for (int i = 0; i < 20; ++i) {
        auto act = g.active_nodes();
        if (act.size() > 2 && churn.chance(0.6)) {
            engine.node_failed(g.fail_node(act[churn.index(act.size())]));
        } else {
            auto inact = g.inactive_nodes();
            if (inact.empty()) continue;
            const NodeId n = inact[churn.index(inact.size())];
            g.activate_node(n);
            engine.node_activated(n);
            act = g.active_nodes();
            for (int k = 0; k < 3; ++k) {
                const NodeId t = act[churn.index(act.size())];
                if (t == n || g.has_link(n, t)) continue;
                g.add_link(n, t);
                engine.link_added(n, t);
            }
        }
        engine.check_view_coherence();
    }
    CHECK(sink.messages.empty());
    CHECK(sink.timers.empty());
    CHECK_FALSE(engine.has_open_sessions());
}

TEST_CASE("stranded leaves heal back into one tight component") {
    // After the hub dies every leaf repairs toward its lost two-hop contacts;
    // at quiescence the survivors sit within two hops of each other again.
    OverlayGraph g = make_star(5);
    ProtocolConfig pc;
    pc.threshold_degree = 5;
    Simulator sim(std::move(g), pc, true, 71);
    sim.fail_now(0);
    sim.deliver_to_quiescence();

    sim.engine().check_quiescent();
    CHECK(components(sim.graph()).size() == 1);
    for (NodeId a = 1; a <= 5; ++a) {
        for (NodeId b = a + 1; b <= 5; ++b) {
            CHECK(bfs_distance(sim.graph(), a, b) <= 2);
        }
    }
    CHECK(sim.messages_sent() > 0);
}

TEST_CASE("single-session episode produces the expected event trace") {
    // 1 bridges 0 and 2; 2 has private contacts 4 and 5. Threshold 1 keeps 2
    // passive (degree 2), so only 0 repairs: one timer, one request, one
    // accept, then gossip to 2's other contacts.
    OverlayGraph g(6);
    g.add_link(1, 0);
    g.add_link(1, 2);
    g.add_link(2, 4);
    g.add_link(2, 5);
    ProtocolConfig pc;
    pc.threshold_degree = 1;
    Simulator sim(std::move(g), pc, true, 77);
    std::ostringstream trace;
    sim.set_trace(&trace);

    sim.fail_now(1);
    sim.deliver_to_quiescence();
    sim.engine().check_quiescent();
    CHECK(sim.graph().has_link(0, 2));

    std::vector<std::string> types;
    std::istringstream in(trace.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,sub_time,type,from,to,payload");
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        types.push_back(line.substr(c2 + 1, c3 - c2 - 1));
    }
    CHECK(types == std::vector<std::string>{"fail", "neighbor_lost", "neighbor_lost", "timer",
                                            "link_request", "link_answer", "link_created",
                                            "link_created"});
    CHECK(trace.str().find("link_answer,2,0,accept") != std::string::npos);
}

namespace {

// Race fixture: hub 0 holds 1, 2, 3 together; 1-2 know each other, 3 has
// private contacts 4 and 5. When 0 dies, 1 and 2 (degree 1 each) both lose
// sight of 3 and open competing sessions; 3 (degree 2 > threshold 1) stays
// passive.
Simulator make_race() {
    OverlayGraph g(6);
    g.add_link(0, 1);
    g.add_link(0, 2);
    g.add_link(0, 3);
    g.add_link(1, 2);
    g.add_link(3, 4);
    g.add_link(3, 5);
    ProtocolConfig pc;
    pc.threshold_degree = 1;
    return Simulator(std::move(g), pc, true, 99);
}

}  // namespace

TEST_CASE("race resolved by gossip: the loser's session drains before firing") {
    Simulator sim = make_race();
    sim.fail_now(0);
    REQUIRE(sim.engine().sessions(1).size() == 1);
    REQUIRE(sim.engine().sessions(2).size() == 1);
    CHECK(sim.engine().sessions(1)[0].pending == std::set<NodeId>{3});
    CHECK(sim.engine().sessions(2)[0].pending == std::set<NodeId>{3});
    CHECK(sim.engine().sessions(3).empty());

    sim.drop_timers();  // replace the random waits with scripted ones
    const auto s1 = sim.engine().sessions(1)[0].id;
    const auto s2 = sim.engine().sessions(2)[0].id;
    sim.inject_timer(1, s1, 0.1);
    // Fires well after 1's repair finished and the resulting gossip reached
    // 2 through their shared link.
    sim.inject_timer(2, s2, 0.15);
    sim.deliver_to_quiescence();

    sim.engine().check_quiescent();
    CHECK(sim.graph().has_link(1, 3));
    CHECK_FALSE(sim.graph().has_link(2, 3));
    CHECK(sim.graph().edge_count() == 4);  // 1-2, 3-4, 3-5 plus the repair
    CHECK(components(sim.graph()).size() == 1);
}

TEST_CASE("race resolved by refusal: the second request finds a 2nd neighbour") {
    Simulator sim = make_race();
    sim.fail_now(0);
    sim.drop_timers();
    const auto s1 = sim.engine().sessions(1)[0].id;
    const auto s2 = sim.engine().sessions(2)[0].id;
    sim.inject_timer(1, s1, 0.1);
    // Fires after 1's new link exists (closed at 0.1 + 2 hops of latency)
    // but before 1's gossip reaches 2 at 0.1 + 3 hops: the request is
    // already en route when the cancellation lands, and 3 must refuse it.
    sim.inject_timer(2, s2, 0.1 + 2.5e-6);
    sim.deliver_to_quiescence();

    sim.engine().check_quiescent();
    CHECK(sim.graph().has_link(1, 3));
    CHECK_FALSE(sim.graph().has_link(2, 3));
    CHECK(sim.graph().edge_count() == 4);
    CHECK(components(sim.graph()).size() == 1);
}

TEST_CASE("disabled protocol inside the harness schedules nothing") {
    OverlayGraph g = make_star(4);
    ProtocolConfig pc;
    pc.threshold_degree = 4;
    pc.enabled = false;
    Simulator sim(std::move(g), pc, false, 5);
    sim.fail_now(0);
    CHECK(sim.queue_size() == 0);  // no messages, no timers
    sim.deliver_to_quiescence();
    CHECK(sim.messages_sent() == 0);
    sim.engine().check_quiescent();
    CHECK(isolated_count(sim.graph()) == 4);
}

TEST_CASE("caches stay coherent through a randomized churn burst") {
    for (const bool enabled : {true, false}) {
        Rng gen(31);
        OverlayGraph g = gen_random(40, 0.1, gen);
        ProtocolConfig pc;
        pc.threshold_degree = 4;
        pc.enabled = enabled;
        Simulator sim(std::move(g), pc, enabled, 123);

        Rng churn(77);
        for (int i = 0; i < 60; ++i) {
            auto act = sim.graph().active_nodes();
            if (act.size() > 2 && churn.chance(0.5)) {
                sim.fail_now(act[churn.index(act.size())]);
            } else {
                auto inact = sim.graph().inactive_nodes();
                if (inact.empty()) continue;
                const NodeId n = inact[churn.index(inact.size())];
                std::vector<NodeId> targets;
                for (int k = 0; k < 3; ++k) {
                    const NodeId t = act[churn.index(act.size())];
                    if (t != n && std::find(targets.begin(), targets.end(), t) == targets.end()) {
                        targets.push_back(t);
                    }
                }
                sim.join_now(n, targets);
            }
            sim.deliver_to_quiescence();
            sim.engine().check_quiescent();
        }
        if (!enabled) CHECK(sim.messages_sent() == 0);
    }
}
