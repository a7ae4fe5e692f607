// Throughput benchmark. The entry stream (withdrawals, then deposits of the
// tokens they minted) is generated outside the timed region; only submission
// and consensus processing are measured.

#include "cbdc/error.hpp"
#include "cbdc/harness.hpp"

#include <chrono>

namespace cbdc {
namespace {

class StreamGenerator {
public:
    StreamGenerator(const Deployment& d, std::uint64_t seed)
        : d_(d), rng_(Sha256().update("cbdc/bench/v1").update_u64(seed).finish()),
          nonces_(d.genesis->size(), 1) {}

    /// `pairs` withdrawals plus deposits of the previous chunk's tokens.
    std::vector<LedgerEntry> next(std::size_t pairs) {
        std::vector<LedgerEntry> out;
        std::vector<Token> minted;
        const auto& g = *d_.genesis;
        const auto& denoms = g.denominations.values();
        for (std::size_t i = 0; i < pairs; ++i) {
            NodeId m = static_cast<NodeId>(rng_.uniform(g.size()));
            auto d = denoms[rng_.uniform(denoms.size())];
            const auto& key = d_.bank->issuer_key(g.issuers.find(d, g.vintage)->key_id);
            auto [keys, id] = new_pretoken(d, g.vintage, g.denominations, rng_);
            auto [blinded, factor] = blind(id.view(), key.pub(), rng_);

            LedgerEntry w;
            w.submitter = m;
            w.nonce = nonces_[m]++;
            w.timestamp = clock_++;
            w.payload = WithdrawalPayload{commitment(m), d, {blinded}};
            w.sign(d_.validator_keys[m]);
            out.push_back(std::move(w));

            auto sig = unblind(sign_blinded(blinded, key), factor, key.pub());
            minted.push_back(Token{std::move(keys), Certificate{id, key.key_id(), sig}});
        }
        for (const auto& t : carry_) {
            NodeId m = static_cast<NodeId>(rng_.uniform(g.size()));
            const auto& pub = g.issuers.at(t.certificate.key_id);
            LedgerEntry e;
            e.submitter = m;
            e.nonce = nonces_[m]++;
            e.timestamp = clock_++;
            SpendContext ctx{m, e.nonce, pub.denomination, e.timestamp};
            e.payload = DepositPayload{{make_spend_input(t, ctx, pub)}, commitment(m), pub.denomination, {}};
            e.sign(d_.validator_keys[m]);
            out.push_back(std::move(e));
        }
        carry_ = std::move(minted);
        return out;
    }

private:
    static Hash256 commitment(NodeId m) { return Sha256().update("cbdc/bench/account").update_u64(m).finish(); }

    const Deployment& d_;
    Rng rng_;
    std::vector<std::uint64_t> nonces_;
    std::vector<Token> carry_;
    TimeMs clock_ = 1;
};

}  // namespace

BenchResult run_bench(const BenchConfig& config) {
    if (config.validators < kMinValidators) {
        throw Error(Errc::ConfigError, "--validators: need at least " + std::to_string(kMinValidators));
    }
    if (config.batch == 0) throw Error(Errc::ConfigError, "--batch: must be positive");
    BenchResult r;
    if (config.duration_ms == 0) return r;

    TopologyConfig topo;
    topo.validators = config.validators;
    topo.denominations = DenominationSet::powers_of_two(6).values();
    topo.initial_reserve = 1'000'000'000;
    topo.policy.msb_daily_withdrawal_cap = 1'000'000'000'000;

    ClusterOptions opt;
    opt.sim.seed = config.seed;
    opt.sim.record_trace = false;
    opt.sim.trace_hashing = false;
    opt.sim.latency_min = 1;
    opt.sim.latency_max = 5;
    opt.batch_size = config.batch;
    opt.bank_observer = false;
    opt.ledger.retain_log = false;
    opt.timeout_ms = 2'000;
    Cluster cluster(topo, config.seed, opt);
    StreamGenerator gen(cluster.deployment(), config.seed);

    using clock = std::chrono::steady_clock;
    const auto budget = std::chrono::milliseconds(config.duration_ms);
    clock::duration spent{};
    const std::size_t pairs = std::max<std::size_t>(256, config.batch * opt.window * 2);
    auto& ref = cluster.replica(0);

    while (spent < budget) {
        auto entries = gen.next(pairs);
        auto target = ref.ledger().height() + entries.size();
        auto t0 = clock::now();
        for (const auto& e : entries) {
            cluster.submit(e.submitter, e);
        }
        auto& sim = cluster.sim();
        bool done = sim.run_until_done([&] { return ref.ledger().height() >= target; }, sim.now() + 600'000);
        spent += clock::now() - t0;
        if (!done) break;
    }
    r.committed = ref.ledger().accepted_count();
    r.seconds = std::chrono::duration<double>(spent).count();
    r.rate = r.seconds > 0 ? static_cast<double>(r.committed) / r.seconds : 0.0;
    r.views = ref.view();
    return r;
}

}  // namespace cbdc
