#pragma once

#include "cbdc/netsim.hpp"
#include "cbdc/replica.hpp"
#include "support/world.hpp"

#include <memory>
#include <set>
#include <vector>

namespace cbdc::testing {

inline constexpr NodeId kObserverId = kCentralBankId;

/// Validators (and optionally one observer) wired to a simulator.
struct SimCluster {
    World& world;
    Simulator sim;
    std::vector<std::unique_ptr<Replica>> replicas;
    std::unique_ptr<Replica> observer;

    SimCluster(World& w, SimConfig cfg, ReplicaConfig base = {}, bool with_observer = false)
        : world(w), sim(std::move(cfg)) {
        const auto& g = *w.genesis();
        if (with_observer) base.observers = {kObserverId};
        for (const auto& v : g.validators) {
            auto rc = base;
            rc.id = v.id;
            rc.equivocating = [this, id = v.id] { return sim.behaves(id, BehaviorKind::Equivocate); };
            replicas.push_back(std::make_unique<Replica>(w.genesis(), rc, w.validator_key(v.id), sim));
            sim.add_node(v.id, replicas.back().get());
        }
        if (with_observer) {
            auto rc = base;
            rc.id = kObserverId;
            rc.observer = true;
            observer = std::make_unique<Replica>(w.genesis(), rc, std::nullopt, sim);
            sim.add_node(kObserverId, observer.get());
        }
    }

    Replica& at(NodeId id) { return *replicas.at(id); }

    bool faulty(NodeId id) const { return sim.config().roster.contains(id); }

    /// Every honest replica has executed the entry.
    bool executed_everywhere(const Hash256& entry_hash) const {
        for (const auto& r : replicas) {
            if (!faulty(r->id()) && !r->has_executed(entry_hash)) return false;
        }
        return true;
    }

    /// No two honest replicas executed different batches at one sequence.
    bool safe() const {
        std::vector<const Replica*> honest;
        for (const auto& r : replicas) {
            if (!faulty(r->id())) honest.push_back(r.get());
        }
        if (observer) honest.push_back(observer.get());
        for (std::size_t i = 0; i < honest.size(); ++i) {
            for (std::size_t j = i + 1; j < honest.size(); ++j) {
                const auto& a = honest[i]->executed_digests();
                const auto& b = honest[j]->executed_digests();
                auto n = std::min(a.size(), b.size());
                for (std::size_t k = 0; k < n; ++k) {
                    if (a[k] != b[k]) return false;
                }
            }
        }
        return true;
    }

    std::set<std::pair<NodeId, std::pair<std::uint64_t, std::uint64_t>>> evidence() const {
        std::set<std::pair<NodeId, std::pair<std::uint64_t, std::uint64_t>>> out;
        for (const auto& r : replicas) {
            if (faulty(r->id())) continue;
            for (const auto& e : r->evidence()) out.insert({e.equivocator, {e.view, e.seq}});
        }
        return out;
    }
};

}  // namespace cbdc::testing
