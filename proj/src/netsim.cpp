#include "cbdc/netsim.hpp"

#include "cbdc/error.hpp"
#include "cbdc/serialize.hpp"

#include <algorithm>

namespace cbdc {

namespace {

std::uint64_t link_key(NodeId from, NodeId to) {
    return (static_cast<std::uint64_t>(from) << 32) | to;
}

}  // namespace

std::string_view to_string(BehaviorKind k) noexcept {
    switch (k) {
        case BehaviorKind::Equivocate: return "equivocate";
        case BehaviorKind::Mute: return "mute";
        case BehaviorKind::Delay: return "delay";
        case BehaviorKind::Corrupt: return "corrupt";
    }
    return "unknown";
}

std::optional<BehaviorKind> behavior_from_string(std::string_view s) noexcept {
    for (auto k : {BehaviorKind::Equivocate, BehaviorKind::Mute, BehaviorKind::Delay,
                   BehaviorKind::Corrupt}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

bool Partition::separates(NodeId from, NodeId to, TimeMs at) const {
    if (at < start || at >= end) return false;
    return (side_a.contains(from) && side_b.contains(to)) ||
           (side_b.contains(from) && side_a.contains(to));
}

std::string TraceRecord::line() const {
    std::string out = std::to_string(time);
    out += event == TraceEvent::Deliver ? " deliver " : " drop ";
    out += std::to_string(from) + " " + std::to_string(to) + " ";
    out += kind;
    out += " " + digest.hex();
    return out;
}

Simulator::Simulator(SimConfig config)
    : config_(std::move(config)), rng_(config_.seed), fault_rng_(rng_.fork("faults")) {
    if (config_.latency_max < config_.latency_min) {
        throw Error(Errc::ConfigError, "latency_max < latency_min");
    }
    if (config_.drop_probability < 0.0 || config_.drop_probability > 1.0) {
        throw Error(Errc::ConfigError, "drop_probability outside [0, 1]");
    }
}

void Simulator::add_node(NodeId id, Endpoint* endpoint) { nodes_[id] = endpoint; }

const Behavior* Simulator::behavior(NodeId id) const {
    auto it = config_.roster.find(id);
    if (it == config_.roster.end() || now_ < it->second.from_ms) return nullptr;
    return &it->second;
}

bool Simulator::behaves(NodeId id, BehaviorKind kind) const {
    const auto* b = behavior(id);
    return b != nullptr && b->kind == kind;
}

void Simulator::push(Event e) {
    e.seq = next_seq_++;
    queue_.push(std::move(e));
}

void Simulator::record(TraceEvent ev, TimeMs at, const Event& e) {
    if (!config_.trace_hashing) return;
    TraceRecord rec{at, ev, e.from, e.to, e.kind, e.digest};
    Writer w;
    w.u64(rec.time).u8(static_cast<std::uint8_t>(ev)).u32(rec.from).u32(rec.to).str(rec.kind).digest(
        rec.digest);
    trace_hash_ = Sha256{}.update(trace_hash_).update(w.data()).finish();
    if (sink_ != nullptr) sink_->push_back(rec);
    if (config_.record_trace) trace_.push_back(rec);
}

void Simulator::send(NodeId from, NodeId to, std::string_view kind, SharedBytes message) {
    if (!nodes_.contains(from)) throw Error(Errc::UnknownNode, std::to_string(from));
    if (!nodes_.contains(to)) throw Error(Errc::UnknownNode, std::to_string(to));
    ++sent_;
    if (tap_) tap_(from, to, kind, message);

    Event e;
    e.type = EventType::Message;
    e.from = from;
    e.to = to;
    e.kind = kind;
    e.message = std::move(message);

    const auto* b = behavior(from);
    bool duplicate = false;
    if (b != nullptr && b->kind == BehaviorKind::Corrupt) {
        if (fault_rng_.chance(b->corrupt_probability) && !e.message->empty()) {
            auto copy = std::make_shared<Bytes>(*e.message);
            auto pos = fault_rng_.uniform(copy->size());
            (*copy)[pos] ^= static_cast<std::uint8_t>(1 + fault_rng_.uniform(255));
            e.message = std::move(copy);
        }
        duplicate = fault_rng_.chance(b->corrupt_probability);
    }
    if (config_.trace_hashing) e.digest = sha256(*e.message);

    // Latency is sampled even for dropped messages so that the random stream
    // does not depend on which messages survive.
    TimeMs latency = rng_.between(config_.latency_min, config_.latency_max);
    bool lost = config_.drop_probability > 0.0 && rng_.chance(config_.drop_probability);
    if (b != nullptr && b->kind == BehaviorKind::Mute) lost = true;
    for (const auto& p : config_.partitions) {
        if (p.separates(from, to, now_)) lost = true;
    }
    if (lost) {
        ++dropped_;
        record(TraceEvent::Drop, now_, e);
        return;
    }
    if (b != nullptr && b->kind == BehaviorKind::Delay) latency += b->delay_ms;

    auto& clock = link_clock_[link_key(from, to)];
    e.time = std::max(now_ + latency, clock);
    clock = e.time;
    if (duplicate) push(e);
    push(std::move(e));
}

void Simulator::set_timer(NodeId node, TimeMs at, std::uint64_t tag) {
    if (!nodes_.contains(node)) throw Error(Errc::UnknownNode, std::to_string(node));
    Event e;
    e.type = EventType::Timer;
    e.time = std::max(at, now_);
    e.to = node;
    e.tag = tag;
    push(std::move(e));
}

void Simulator::schedule(TimeMs at, std::function<void()> action) {
    Event e;
    e.type = EventType::Action;
    e.time = std::max(at, now_);
    e.tag = next_seq_;
    actions_.emplace(e.tag, std::move(action));
    push(std::move(e));
}

void Simulator::process(const Event& e) {
    switch (e.type) {
        case EventType::Message: {
            for (const auto& p : config_.partitions) {
                if (p.separates(e.from, e.to, now_)) {
                    ++dropped_;
                    record(TraceEvent::Drop, now_, e);
                    return;
                }
            }
            ++delivered_;
            record(TraceEvent::Deliver, now_, e);
            nodes_.at(e.to)->on_message(e.from, e.message);
            break;
        }
        case EventType::Timer:
            nodes_.at(e.to)->on_timer(e.tag);
            break;
        case EventType::Action: {
            auto node = actions_.extract(e.tag);
            node.mapped()();
            break;
        }
    }
}

bool Simulator::step(TimeMs t_end, std::vector<TraceRecord>* out) {
    if (queue_.empty() || queue_.top().time > t_end) return false;
    Event e = queue_.top();
    queue_.pop();
    now_ = e.time;
    sink_ = out;
    process(e);
    sink_ = nullptr;
    return true;
}

std::vector<TraceRecord> Simulator::run_until(TimeMs t_end) {
    if (t_end < now_) {
        throw Error(Errc::ConfigError, "run_until into the past");
    }
    std::vector<TraceRecord> out;
    while (step(t_end, &out)) {
    }
    now_ = t_end;
    return out;
}

bool Simulator::run_until_done(const std::function<bool()>& done, TimeMs t_end) {
    if (done()) return true;
    while (step(t_end, nullptr)) {
        if (done()) return true;
    }
    return done();
}

std::string Simulator::export_trace() const {
    std::string out;
    for (const auto& rec : trace_) {
        out += rec.line();
        out += '\n';
    }
    return out;
}

}  // namespace cbdc
