#include "cbdc/error.hpp"
#include "cbdc/netsim.hpp"

#include <gtest/gtest.h>

using namespace cbdc;

namespace {

struct Sink : Endpoint {
    std::vector<std::pair<NodeId, Bytes>> got;
    std::vector<std::uint64_t> timers;
    void on_message(NodeId from, const SharedBytes& m) override { got.emplace_back(from, *m); }
    void on_timer(std::uint64_t tag) override { timers.push_back(tag); }
};

SharedBytes msg(std::uint8_t b, std::size_t n = 8) { return std::make_shared<const Bytes>(n, b); }

// Gossip workload: every delivery triggers a reply until a hop budget runs out.
struct Chatter : Endpoint {
    Simulator* sim = nullptr;
    NodeId self = 0;
    std::size_t peers = 0;
    void on_message(NodeId from, const SharedBytes& m) override {
        auto hops = (*m)[0];
        if (hops == 0) return;
        auto next = std::make_shared<const Bytes>(Bytes{static_cast<std::uint8_t>(hops - 1), (*m)[1]});
        sim->send(self, (from + 1 + self) % peers, "chat", next);
        sim->send(self, from, "chat", next);
    }
    void on_timer(std::uint64_t) override {}
};

Hash256 chatter_run(SimConfig cfg) {
    Simulator sim(cfg);
    std::vector<Chatter> nodes(5);
    for (NodeId i = 0; i < 5; ++i) {
        nodes[i].sim = &sim;
        nodes[i].self = i;
        nodes[i].peers = 5;
        sim.add_node(i, &nodes[i]);
    }
    for (NodeId i = 0; i < 5; ++i) {
        sim.send(i, (i + 1) % 5, "chat", std::make_shared<const Bytes>(Bytes{6, static_cast<std::uint8_t>(i)}));
    }
    sim.run_until(100'000);
    return sim.trace_hash();
}

}  // namespace

TEST(SimSend, UnknownNode) {
    Simulator sim({});
    Sink a;
    sim.add_node(1, &a);
    EXPECT_THROW(sim.send(1, 2, "x", msg(0)), Error);
    EXPECT_THROW(sim.send(3, 1, "x", msg(0)), Error);
}

TEST(SimSend, DropProbabilityOneDeliversNothing) {
    SimConfig cfg;
    cfg.drop_probability = 1.0;
    Simulator sim(cfg);
    Sink a, b;
    sim.add_node(1, &a);
    sim.add_node(2, &b);
    for (int i = 0; i < 100; ++i) sim.send(1, 2, "x", msg(1));
    sim.run_until(10'000);
    EXPECT_TRUE(b.got.empty());
    EXPECT_EQ(sim.delivered(), 0u);
    EXPECT_EQ(sim.dropped(), 100u);
}

TEST(SimSend, PartitionWindowBlocksBothDirections) {
    SimConfig cfg;
    cfg.partitions.push_back({100, 200, {1}, {2}});
    Simulator sim(cfg);
    Sink a, b, c;
    sim.add_node(1, &a);
    sim.add_node(2, &b);
    sim.add_node(3, &c);
    sim.schedule(120, [&] {
        sim.send(1, 2, "x", msg(1));
        sim.send(2, 1, "x", msg(2));
        sim.send(1, 3, "x", msg(3));
    });
    sim.schedule(250, [&] { sim.send(1, 2, "x", msg(4)); });
    auto trace = sim.run_until(1000);
    ASSERT_EQ(b.got.size(), 1u);
    EXPECT_EQ(b.got[0].second, *msg(4));
    EXPECT_TRUE(a.got.empty());
    EXPECT_EQ(c.got.size(), 1u);
    std::size_t drops = 0;
    for (const auto& r : trace) {
        if (r.event == TraceEvent::Drop) {
            ++drops;
            EXPECT_GE(r.time, 100u);
            EXPECT_LT(r.time, 200u);
        }
    }
    EXPECT_EQ(drops, 2u);
}

TEST(SimSend, FifoPerLink) {
    SimConfig cfg;
    cfg.latency_min = 1;
    cfg.latency_max = 200;
    Simulator sim(cfg);
    Sink a, b;
    sim.add_node(1, &a);
    sim.add_node(2, &b);
    for (int i = 0; i < 200; ++i) {
        sim.schedule(static_cast<TimeMs>(i), [&, i] { sim.send(1, 2, "x", msg(static_cast<std::uint8_t>(i))); });
    }
    sim.run_until(10'000);
    ASSERT_EQ(b.got.size(), 200u);
    for (int i = 0; i < 200; ++i) EXPECT_EQ(b.got[i].second[0], i);
}

TEST(SimSend, SameSeedSameTrace) {
    SimConfig cfg;
    cfg.seed = 99;
    cfg.drop_probability = 0.1;
    auto h1 = chatter_run(cfg);
    auto h2 = chatter_run(cfg);
    EXPECT_EQ(h1, h2);
    cfg.seed = 100;
    EXPECT_NE(chatter_run(cfg), h1);
}

TEST(RunUntil, EmptyQueueEmptyTrace) {
    Simulator sim({});
    EXPECT_TRUE(sim.run_until(1000).empty());
    EXPECT_EQ(sim.now(), 1000u);
    EXPECT_THROW(sim.run_until(10), Error);
}

TEST(RunUntil, FixedLatencyDeliversOnTime) {
    SimConfig cfg;
    cfg.latency_min = cfg.latency_max = 5;
    Simulator sim(cfg);
    Sink a, b;
    sim.add_node(1, &a);
    sim.add_node(2, &b);
    sim.send(1, 2, "ping", msg(7));
    auto early = sim.run_until(4);
    EXPECT_TRUE(early.empty());
    auto trace = sim.run_until(5);
    ASSERT_EQ(trace.size(), 1u);
    EXPECT_EQ(trace[0].time, 5u);
    EXPECT_EQ(trace[0].kind, "ping");
    EXPECT_EQ(trace[0].digest, sha256(*msg(7)));
    EXPECT_EQ(b.got.size(), 1u);
}

TEST(RunUntil, TimersAndTiesInInsertionOrder) {
    Simulator sim({});
    Sink a;
    sim.add_node(1, &a);
    sim.set_timer(1, 50, 2);
    sim.set_timer(1, 50, 1);
    sim.set_timer(1, 10, 3);
    sim.run_until(100);
    EXPECT_EQ(a.timers, (std::vector<std::uint64_t>{3, 2, 1}));
}

TEST(Behaviors, MuteDelayCorrupt) {
    SimConfig cfg;
    cfg.latency_min = cfg.latency_max = 10;
    cfg.roster[1] = Behavior{BehaviorKind::Mute, 100};
    cfg.roster[2] = Behavior{BehaviorKind::Delay, 0, 300};
    cfg.roster[3] = Behavior{BehaviorKind::Corrupt, 0, 0, 1.0};
    Simulator sim(cfg);
    Sink n1, n2, n3, n4;
    sim.add_node(1, &n1);
    sim.add_node(2, &n2);
    sim.add_node(3, &n3);
    sim.add_node(4, &n4);
    sim.send(1, 4, "x", msg(1));  // before mute starts
    sim.schedule(150, [&] { sim.send(1, 4, "x", msg(1)); });
    sim.run_until(200);
    EXPECT_EQ(n4.got.size(), 1u);

    n4.got.clear();
    sim.send(2, 4, "x", msg(2));
    sim.run_until(200 + 309);
    EXPECT_TRUE(n4.got.empty());
    sim.run_until(200 + 310);
    EXPECT_EQ(n4.got.size(), 1u);

    n4.got.clear();
    sim.send(3, 4, "x", msg(3, 32));
    sim.run_until(1000);
    ASSERT_EQ(n4.got.size(), 2u);  // duplicated
    EXPECT_NE(n4.got[0].second, *msg(3, 32));
    EXPECT_TRUE(sim.behaves(3, BehaviorKind::Corrupt));
    EXPECT_FALSE(sim.behaves(4, BehaviorKind::Corrupt));
}

TEST(Trace, ExportIsLineDelimited) {
    Simulator sim({});
    Sink a, b;
    sim.add_node(1, &a);
    sim.add_node(2, &b);
    sim.send(1, 2, "x", msg(1));
    sim.send(2, 1, "y", msg(2));
    sim.run_until(100);
    auto text = sim.export_trace();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    EXPECT_NE(text.find(" deliver 1 2 x "), std::string::npos);
}
