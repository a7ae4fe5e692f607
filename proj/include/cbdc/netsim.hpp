#pragma once

#include "cbdc/bytes.hpp"
#include "cbdc/crypto.hpp"
#include "cbdc/transport.hpp"
#include "cbdc/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace cbdc {

enum class BehaviorKind : std::uint8_t { Equivocate, Mute, Delay, Corrupt };

std::string_view to_string(BehaviorKind k) noexcept;
std::optional<BehaviorKind> behavior_from_string(std::string_view s) noexcept;

/// A fault attached to one node from `from_ms` on. Mute, Delay and Corrupt act
/// on the node's outgoing traffic here; Equivocate is carried out by the
/// replica itself, which asks the simulator whether it is enabled.
struct Behavior {
    BehaviorKind kind = BehaviorKind::Mute;
    TimeMs from_ms = 0;
    /// Extra latency for Delay.
    TimeMs delay_ms = 200;
    /// Per-message chance for Corrupt to flip a byte; the same chance again
    /// decides whether the message is also delivered twice.
    double corrupt_probability = 0.5;
};

/// Both directions between the two sides are cut during [start, end).
struct Partition {
    TimeMs start = 0;
    TimeMs end = 0;
    std::set<NodeId> side_a;
    std::set<NodeId> side_b;

    bool separates(NodeId from, NodeId to, TimeMs at) const;
};

struct SimConfig {
    std::uint64_t seed = 1;
    TimeMs latency_min = 5;
    TimeMs latency_max = 50;
    double drop_probability = 0.0;
    std::vector<Partition> partitions;
    std::map<NodeId, Behavior> roster;
    /// Keep trace records in memory. The running trace hash is maintained
    /// either way.
    bool record_trace = true;
    /// Skip per-message digests and the trace hash entirely (benchmarks).
    bool trace_hashing = true;
};

enum class TraceEvent : std::uint8_t { Deliver, Drop };

struct TraceRecord {
    TimeMs time = 0;
    TraceEvent event = TraceEvent::Deliver;
    NodeId from = 0;
    NodeId to = 0;
    std::string_view kind;
    Hash256 digest;

    /// "time event from to kind digest", space separated.
    std::string line() const;
};

class Simulator : public Transport {
public:
    explicit Simulator(SimConfig config);

    /// The endpoint must outlive the simulator run.
    void add_node(NodeId id, Endpoint* endpoint);
    bool has_node(NodeId id) const { return nodes_.contains(id); }

    /// Throws UnknownNode if either end is unregistered.
    void send(NodeId from, NodeId to, std::string_view kind, SharedBytes message) override;
    void set_timer(NodeId node, TimeMs at, std::uint64_t tag) override;
    TimeMs now() const override { return now_; }

    /// Runs `action` at simulated time `at` (clamped to now).
    void schedule(TimeMs at, std::function<void()> action);

    /// Processes every event with time <= t_end in (time, insertion) order and
    /// returns the trace records produced along the way. Throws if t_end < now.
    std::vector<TraceRecord> run_until(TimeMs t_end);
    /// Runs until `done()` holds after an event, the queue empties, or t_end.
    /// Returns true if `done()` held.
    bool run_until_done(const std::function<bool()>& done, TimeMs t_end);
    bool idle() const { return queue_.empty(); }

    /// Observes every send before faults apply (transcript scans).
    using Tap = std::function<void(NodeId from, NodeId to, std::string_view kind, const SharedBytes&)>;
    void set_tap(Tap tap) { tap_ = std::move(tap); }

    const Behavior* behavior(NodeId id) const;
    bool behaves(NodeId id, BehaviorKind kind) const;

    const SimConfig& config() const { return config_; }
    const std::vector<TraceRecord>& trace() const { return trace_; }
    const Hash256& trace_hash() const { return trace_hash_; }
    std::string export_trace() const;

    std::uint64_t sent() const { return sent_; }
    std::uint64_t delivered() const { return delivered_; }
    std::uint64_t dropped() const { return dropped_; }

private:
    enum class EventType : std::uint8_t { Message, Timer, Action };
    struct Event {
        TimeMs time = 0;
        std::uint64_t seq = 0;
        EventType type = EventType::Message;
        NodeId from = 0;
        NodeId to = 0;
        std::string_view kind;
        SharedBytes message;
        std::uint64_t tag = 0;
        Hash256 digest;

        bool operator>(const Event& o) const {
            return time != o.time ? time > o.time : seq > o.seq;
        }
    };

    void push(Event e);
    void record(TraceEvent ev, TimeMs at, const Event& e);
    void process(const Event& e);
    bool step(TimeMs t_end, std::vector<TraceRecord>* out);

    SimConfig config_;
    Rng rng_;
    Rng fault_rng_;
    TimeMs now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::unordered_map<NodeId, Endpoint*> nodes_;
    std::unordered_map<std::uint64_t, TimeMs> link_clock_;
    std::unordered_map<std::uint64_t, std::function<void()>> actions_;
    std::vector<TraceRecord> trace_;
    std::vector<TraceRecord>* sink_ = nullptr;
    Tap tap_;
    Hash256 trace_hash_;
    std::uint64_t sent_ = 0;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_ = 0;
};

}  // namespace cbdc
