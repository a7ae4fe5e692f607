// Topology, scenario and genesis files, plus deterministic deployment.

#include "cbdc/error.hpp"
#include "cbdc/harness.hpp"
#include "cbdc/token.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cbdc {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
    throw Error(Errc::ConfigError, (where.empty() ? "/" : where) + ": " + what);
}

// Typed access to one JSON object with JSON-pointer diagnostics.
class Fields {
public:
    Fields(const json& j, std::string where, std::set<std::string> allowed) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) config_error(where_, "expected an object");
        for (const auto& [key, value] : j_.items()) {
            if (!allowed.contains(key)) config_error(path(key), "unknown field");
        }
    }

    std::string path(const std::string& key) const { return where_ + "/" + key; }
    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key) const {
        if (!j_.contains(key)) config_error(path(key), "missing required field");
        return j_.at(key);
    }

    std::uint64_t u64(const std::string& key) const {
        const auto& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            config_error(path(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? u64(key) : fallback;
    }
    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_number()) config_error(path(key), "expected a number");
        return v.get<double>();
    }
    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) config_error(path(key), "expected true or false");
        return v.get<bool>();
    }
    std::string str(const std::string& key) const {
        const auto& v = raw(key);
        if (!v.is_string()) config_error(path(key), "expected a string");
        return v.get<std::string>();
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        return has(key) ? str(key) : fallback;
    }
    const json& array(const std::string& key) const {
        const auto& v = raw(key);
        if (!v.is_array()) config_error(path(key), "expected an array");
        return v;
    }

private:
    const json& j_;
    std::string where_;
};

std::vector<std::uint64_t> u64_list(const json& arr, const std::string& where) {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number_unsigned()) config_error(where + "/" + std::to_string(i), "expected a non-negative integer");
        out.push_back(arr[i].get<std::uint64_t>());
    }
    return out;
}

std::vector<std::string> string_list(const json& arr, const std::string& where) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_string()) config_error(where + "/" + std::to_string(i), "expected a string");
        out.push_back(arr[i].get<std::string>());
    }
    return out;
}

CountExpectation count_from_json(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return {v.get<std::uint64_t>(), false};
    if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s.rfind(">=", 0) == 0) {
            try {
                std::size_t used = 0;
                auto n = std::stoull(s.substr(2), &used);
                if (used == s.size() - 2) return {n, true};
            } catch (const std::exception&) {
            }
        }
    }
    config_error(where, "expected a count or \">=n\"");
}

Hash256 seed_hash(std::string_view label, std::uint64_t seed, std::uint64_t index = 0) {
    return Sha256().update("cbdc/deploy/v1").update(label).update_u64(seed).update_u64(index).finish();
}

std::set<std::string> keys_of(std::initializer_list<const char*> names) {
    return {names.begin(), names.end()};
}

}  // namespace

json parse_json_text(std::string_view text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(Errc::ConfigError, source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                           ": " + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::ConfigError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path.string());
}

PolicyConfig policy_from_json(const json& j, const std::string& where) {
    Fields f(j, where,
             keys_of({"account_daily_withdrawal_cap", "account_daily_deposit_cap", "id_threshold",
                      "msb_daily_withdrawal_cap", "mediated_fee", "vintage_exchange_fee", "day_ms"}));
    PolicyConfig p;
    p.account_daily_withdrawal_cap = f.u64("account_daily_withdrawal_cap", p.account_daily_withdrawal_cap);
    p.account_daily_deposit_cap = f.u64("account_daily_deposit_cap", p.account_daily_deposit_cap);
    p.id_threshold = f.u64("id_threshold", p.id_threshold);
    p.msb_daily_withdrawal_cap = f.u64("msb_daily_withdrawal_cap", p.msb_daily_withdrawal_cap);
    p.mediated_fee = f.u64("mediated_fee", p.mediated_fee);
    p.vintage_exchange_fee = f.u64("vintage_exchange_fee", p.vintage_exchange_fee);
    p.day_ms = f.u64("day_ms", p.day_ms);
    try {
        p.validate();
    } catch (const Error& e) {
        config_error(where, e.what());
    }
    return p;
}

TopologyConfig topology_from_json(const json& j) {
    Fields f(j, "", keys_of({"validators", "denominations", "vintage", "key_bits", "initial_reserve",
                              "issuer_label", "policy", "accounts", "wallets"}));
    TopologyConfig t;
    t.validators = f.u64("validators", t.validators);
    if (t.validators < kMinValidators) {
        config_error("/validators", "need at least " + std::to_string(kMinValidators) +
                                        " validators to tolerate one fault, got " + std::to_string(t.validators));
    }
    if (f.has("denominations")) t.denominations = u64_list(f.array("denominations"), "/denominations");
    try {
        DenominationSet check(t.denominations);
        if (check.empty()) config_error("/denominations", "empty");
    } catch (const Error& e) {
        if (e.code() == Errc::ConfigError) throw;
        config_error("/denominations", e.what());
    }
    t.vintage = static_cast<std::uint32_t>(f.u64("vintage", t.vintage));
    t.key_bits = static_cast<unsigned>(f.u64("key_bits", t.key_bits));
    if (t.key_bits < kMinTestModulusBits || t.key_bits % 2 != 0) {
        config_error("/key_bits", "must be even and at least " + std::to_string(kMinTestModulusBits));
    }
    t.initial_reserve = f.u64("initial_reserve", t.initial_reserve);
    t.issuer_label = f.str("issuer_label", t.issuer_label);
    if (f.has("policy")) t.policy = policy_from_json(f.raw("policy"), "/policy");

    std::set<std::string> seen;
    if (f.has("accounts")) {
        const auto& arr = f.array("accounts");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto where = "/accounts/" + std::to_string(i);
            Fields a(arr[i], where, keys_of({"id", "msb", "tier", "balance", "registered"}));
            AccountSpec s;
            s.id = a.str("id");
            if (s.id.empty()) config_error(a.path("id"), "empty account id");
            if (!seen.insert(s.id).second) config_error(a.path("id"), "duplicate account '" + s.id + "'");
            s.msb = static_cast<NodeId>(a.u64("msb"));
            if (s.msb >= t.validators) config_error(a.path("msb"), "no such validator");
            try {
                s.tier = kyc_tier_from_string(a.str("tier", "basic"));
            } catch (const Error&) {
                config_error(a.path("tier"), "expected \"basic\" or \"verified\"");
            }
            s.balance = a.u64("balance", 0);
            s.registered = a.boolean("registered", true);
            t.accounts.push_back(std::move(s));
        }
    }
    std::set<std::string> wallet_names;
    if (f.has("wallets")) {
        const auto& arr = f.array("wallets");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto where = "/wallets/" + std::to_string(i);
            WalletSpec w;
            if (arr[i].is_string()) {
                w.name = arr[i].get<std::string>();
            } else {
                Fields wf(arr[i], where, keys_of({"name", "spend_delay_ms"}));
                w.name = wf.str("name");
                w.spend_delay_ms = wf.u64("spend_delay_ms", 0);
            }
            if (!wallet_names.insert(w.name).second) config_error(where, "duplicate wallet '" + w.name + "'");
            t.wallets.push_back(std::move(w));
        }
    }
    return t;
}

json genesis_to_json(const Genesis& g) {
    json validators = json::array();
    for (const auto& v : g.validators) {
        validators.push_back({{"id", v.id},
                              {"name", v.name},
                              {"key", to_hex(v.key.view())},
                              {"initial_reserve", v.initial_reserve}});
    }
    json issuers = json::array();
    for (const auto& [id, k] : g.issuers.keys()) {
        issuers.push_back(issuer_key_to_json(k));
    }
    json commitments = json::array();
    for (const auto& c : g.registered_commitments) {
        commitments.push_back(c.hex());
    }
    const auto& p = g.policy;
    return {
        {"protocol", g.protocol},
        {"issuer_label", g.issuer_label},
        {"vintage", g.vintage},
        {"denominations", g.denominations.values()},
        {"validators", validators},
        {"central_bank_key", to_hex(g.central_bank_key.view())},
        {"issuers", issuers},
        {"policy",
         {{"account_daily_withdrawal_cap", p.account_daily_withdrawal_cap},
          {"account_daily_deposit_cap", p.account_daily_deposit_cap},
          {"id_threshold", p.id_threshold},
          {"msb_daily_withdrawal_cap", p.msb_daily_withdrawal_cap},
          {"mediated_fee", p.mediated_fee},
          {"vintage_exchange_fee", p.vintage_exchange_fee},
          {"day_ms", p.day_ms}}},
        {"registered_commitments", commitments},
        {"genesis_hash", g.hash().hex()},
    };
}

std::shared_ptr<const Genesis> genesis_from_json(const json& j) {
    auto g = std::make_shared<Genesis>();
    try {
        g->protocol = j.at("protocol").get<std::string>();
        g->issuer_label = j.at("issuer_label").get<std::string>();
        g->vintage = j.at("vintage").get<std::uint32_t>();
        g->denominations = DenominationSet(j.at("denominations").get<std::vector<Amount>>());
        for (const auto& v : j.at("validators")) {
            ValidatorInfo info;
            info.id = v.at("id").get<NodeId>();
            info.name = v.at("name").get<std::string>();
            auto key = from_hex(v.at("key").get<std::string>());
            if (key.size() != info.key.bytes.size()) throw Error(Errc::Malformed, "validator key length");
            std::copy(key.begin(), key.end(), info.key.bytes.begin());
            info.initial_reserve = v.at("initial_reserve").get<Amount>();
            g->validators.push_back(info);
        }
        auto cb = from_hex(j.at("central_bank_key").get<std::string>());
        if (cb.size() != g->central_bank_key.bytes.size()) throw Error(Errc::Malformed, "central bank key length");
        std::copy(cb.begin(), cb.end(), g->central_bank_key.bytes.begin());
        for (const auto& k : j.at("issuers")) {
            g->issuers.add(issuer_key_from_json(k));
        }
        g->policy = policy_from_json(j.at("policy"), "/policy");
        for (const auto& c : j.at("registered_commitments")) {
            g->registered_commitments.insert(Hash256::from_hex_string(c.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, std::string("genesis: ") + e.what());
    }
    if (j.contains("genesis_hash") && Hash256::from_hex_string(j.at("genesis_hash").get<std::string>()) != g->hash()) {
        throw Error(Errc::HashMismatch, "genesis hash does not match its contents");
    }
    return g;
}

namespace {

const std::map<std::string, ActionKind, std::less<>>& action_names() {
    static const std::map<std::string, ActionKind, std::less<>> names{
        {"withdraw", ActionKind::Withdraw},       {"deposit", ActionKind::Deposit},
        {"mediate", ActionKind::Mediate},         {"disburse", ActionKind::Disburse},
        {"double_spend", ActionKind::DoubleSpend}, {"reserve_exchange", ActionKind::ReserveExchange},
    };
    return names;
}

bool valid_expect(const std::string& e) {
    if (e == "commit" || e == "reject" || e == "one_commit") return true;
    auto suffix_ok = [&](std::string_view prefix) {
        return e.size() > prefix.size() && e.compare(0, prefix.size(), prefix) == 0;
    };
    return suffix_ok("reject:") || suffix_ok("error:");
}

SimConfig network_from_json(const json& j, std::size_t validators) {
    Fields f(j, "/network", keys_of({"latency_min", "latency_max", "drop_probability", "partitions", "faults"}));
    SimConfig c;
    c.latency_min = f.u64("latency_min", c.latency_min);
    c.latency_max = f.u64("latency_max", c.latency_max);
    if (c.latency_max < c.latency_min) config_error("/network/latency_max", "below latency_min");
    c.drop_probability = f.number("drop_probability", 0.0);
    if (c.drop_probability < 0 || c.drop_probability >= 1) {
        config_error("/network/drop_probability", "must be in [0, 1)");
    }
    auto node_set = [&](const json& arr, const std::string& where) {
        std::set<NodeId> out;
        for (auto v : u64_list(arr, where)) {
            if (v >= validators) config_error(where, "no validator " + std::to_string(v));
            out.insert(static_cast<NodeId>(v));
        }
        return out;
    };
    if (f.has("partitions")) {
        const auto& arr = f.array("partitions");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto where = "/network/partitions/" + std::to_string(i);
            Fields p(arr[i], where, keys_of({"start", "end", "side_a", "side_b"}));
            Partition part;
            part.start = p.u64("start");
            part.end = p.u64("end");
            if (part.end <= part.start) config_error(p.path("end"), "must be after start");
            part.side_a = node_set(p.array("side_a"), p.path("side_a"));
            part.side_b = node_set(p.array("side_b"), p.path("side_b"));
            c.partitions.push_back(std::move(part));
        }
    }
    if (f.has("faults")) {
        const auto& arr = f.array("faults");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            auto where = "/network/faults/" + std::to_string(i);
            Fields b(arr[i], where, keys_of({"node", "behavior", "from_ms", "delay_ms", "corrupt_probability"}));
            auto node = b.u64("node");
            if (node >= validators) config_error(b.path("node"), "no validator " + std::to_string(node));
            Behavior beh;
            auto kind = behavior_from_string(b.str("behavior"));
            if (!kind) config_error(b.path("behavior"), "expected equivocate, mute, delay or corrupt");
            beh.kind = *kind;
            beh.from_ms = b.u64("from_ms", 0);
            beh.delay_ms = b.u64("delay_ms", beh.delay_ms);
            beh.corrupt_probability = b.number("corrupt_probability", beh.corrupt_probability);
            if (!c.roster.emplace(static_cast<NodeId>(node), beh).second) {
                config_error(b.path("node"), "one behavior per node");
            }
        }
    }
    return c;
}

Action action_from_json(const json& j, const std::string& where, const TopologyConfig& t) {
    Fields f(j, where,
             keys_of({"at", "do", "wallet", "payee", "account", "accounts", "gap_ms", "msb", "amount", "id_info",
                      "verified", "claim", "treasury", "direction", "expect"}));
    Action a;
    auto kind = f.str("do");
    auto it = action_names().find(kind);
    if (it == action_names().end()) config_error(f.path("do"), "unknown action '" + kind + "'");
    a.kind = it->second;
    a.at = f.u64("at");
    a.amount = f.u64("amount");
    if (a.amount == 0) config_error(f.path("amount"), "must be positive");

    auto wallet_ref = [&](const std::string& key) {
        auto name = f.str(key);
        bool known = std::any_of(t.wallets.begin(), t.wallets.end(), [&](const auto& w) { return w.name == name; });
        if (!known) config_error(f.path(key), "unknown wallet '" + name + "'");
        return name;
    };
    auto account_ref = [&](const std::string& name, const std::string& path) {
        bool known =
            std::any_of(t.accounts.begin(), t.accounts.end(), [&](const auto& acc) { return acc.id == name; });
        if (!known) config_error(path, "unknown account '" + name + "'");
        return name;
    };
    auto msb_ref = [&] {
        auto m = f.u64("msb");
        if (m >= t.validators) config_error(f.path("msb"), "no validator " + std::to_string(m));
        return static_cast<NodeId>(m);
    };

    switch (a.kind) {
        case ActionKind::Withdraw:
        case ActionKind::Deposit:
            a.wallet = wallet_ref("wallet");
            a.account = account_ref(f.str("account"), f.path("account"));
            break;
        case ActionKind::Mediate:
            a.wallet = wallet_ref("wallet");
            a.payee = wallet_ref("payee");
            a.msb = msb_ref();
            a.id_info = f.boolean("id_info", false);
            break;
        case ActionKind::Disburse:
            a.wallet = wallet_ref("wallet");
            a.msb = msb_ref();
            a.claim = f.str("claim");
            a.verified = f.boolean("verified", true);
            a.treasury = account_ref(f.str("treasury", a.treasury), f.path("treasury"));
            break;
        case ActionKind::DoubleSpend: {
            a.wallet = wallet_ref("wallet");
            auto list = string_list(f.array("accounts"), f.path("accounts"));
            if (list.size() < 2) config_error(f.path("accounts"), "need at least two accounts");
            for (std::size_t i = 0; i < list.size(); ++i) {
                a.accounts.push_back(account_ref(list[i], f.path("accounts") + "/" + std::to_string(i)));
            }
            a.gap_ms = f.u64("gap_ms", 0);
            break;
        }
        case ActionKind::ReserveExchange: {
            a.msb = msb_ref();
            auto dir = f.str("direction", "fund");
            if (dir == "fund") {
                a.direction = ReserveDirection::Fund;
            } else if (dir == "drain") {
                a.direction = ReserveDirection::Drain;
            } else {
                config_error(f.path("direction"), "expected \"fund\" or \"drain\"");
            }
            break;
        }
    }
    if (f.has("expect")) {
        auto e = f.str("expect");
        if (!valid_expect(e)) {
            config_error(f.path("expect"), "expected commit, reject, reject:<code>, error:<code> or one_commit");
        }
        a.expect = e;
    }
    return a;
}

template <class F>
void each_count(const Fields& f, const std::string& key, F&& put) {
    if (!f.has(key)) return;
    const auto& obj = f.raw(key);
    if (!obj.is_object()) config_error(f.path(key), "expected an object");
    for (const auto& [name, v] : obj.items()) {
        put(name, count_from_json(v, f.path(key) + "/" + name));
    }
}

Expectations expectations_from_json(const json& j) {
    Fields f(j, "/expect", keys_of({"account_balances", "wallet_balances", "alerts", "rejects", "accepted", "max_view"}));
    Expectations e;
    for (const char* key : {"account_balances", "wallet_balances"}) {
        if (!f.has(key)) continue;
        const auto& obj = f.raw(key);
        if (!obj.is_object()) config_error(f.path(key), "expected an object");
        auto& target = std::string_view(key) == "account_balances" ? e.account_balances : e.wallet_balances;
        for (const auto& [name, v] : obj.items()) {
            if (!v.is_number_unsigned()) config_error(f.path(key) + "/" + name, "expected a non-negative integer");
            target[name] = v.get<Amount>();
        }
    }
    each_count(f, "alerts", [&](const std::string& name, CountExpectation c) { e.alerts[name] = c; });
    each_count(f, "rejects", [&](const std::string& name, CountExpectation c) { e.rejects[name] = c; });
    if (f.has("accepted")) e.accepted = count_from_json(f.raw("accepted"), f.path("accepted"));
    if (f.has("max_view")) e.max_view = f.u64("max_view");
    return e;
}

}  // namespace

std::string_view to_string(ActionKind k) noexcept {
    for (const auto& [name, kind] : action_names()) {
        if (kind == k) return name;
    }
    return "?";
}

Scenario scenario_from_json(const json& j) {
    Fields f(j, "", keys_of({"name", "seed", "topology", "network", "consensus", "actions", "expect", "settle_ms"}));
    Scenario s;
    s.name = f.str("name");
    s.seed = f.u64("seed", s.seed);
    s.topology = topology_from_json(f.has("topology") ? f.raw("topology") : json::object());
    s.cluster.sim = network_from_json(f.has("network") ? f.raw("network") : json::object(), s.topology.validators);
    s.cluster.sim.seed = s.seed;
    if (f.has("consensus")) {
        Fields c(f.raw("consensus"), "/consensus", keys_of({"batch_size", "window", "timeout_ms"}));
        s.cluster.batch_size = c.u64("batch_size", s.cluster.batch_size);
        s.cluster.window = c.u64("window", s.cluster.window);
        s.cluster.timeout_ms = c.u64("timeout_ms", s.cluster.timeout_ms);
        if (s.cluster.batch_size == 0) config_error("/consensus/batch_size", "must be positive");
        if (s.cluster.window == 0) config_error("/consensus/window", "must be positive");
        if (s.cluster.timeout_ms == 0) config_error("/consensus/timeout_ms", "must be positive");
    }
    s.settle_ms = f.u64("settle_ms", s.settle_ms);
    const auto& arr = f.array("actions");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        s.actions.push_back(action_from_json(arr[i], "/actions/" + std::to_string(i), s.topology));
    }
    if (f.has("expect")) s.expect = expectations_from_json(f.raw("expect"));
    for (const auto& [name, amount] : s.expect.account_balances) {
        bool known = std::any_of(s.topology.accounts.begin(), s.topology.accounts.end(),
                                 [&](const auto& a) { return a.id == name; });
        if (!known) config_error("/expect/account_balances/" + name, "unknown account");
    }
    for (const auto& [name, amount] : s.expect.wallet_balances) {
        bool known = std::any_of(s.topology.wallets.begin(), s.topology.wallets.end(),
                                 [&](const auto& w) { return w.name == name; });
        if (!known) config_error("/expect/wallet_balances/" + name, "unknown wallet");
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    auto j = read_json_file(path);
    try {
        return scenario_from_json(j);
    } catch (const Error& e) {
        if (e.code() != Errc::ConfigError) throw;
        throw Error(Errc::ConfigError, path.string() + ": " + std::string(e.what()).substr(13));
    }
}

Deployment deploy(const TopologyConfig& topology, std::uint64_t seed) {
    if (topology.validators < kMinValidators) {
        throw Error(Errc::ConfigError, "/validators: need at least " + std::to_string(kMinValidators));
    }
    Deployment d;
    d.bank = std::make_shared<CentralBank>(topology.issuer_label,
                                           SigningKey::from_seed(seed_hash("central-bank", seed)));
    DenominationSet denoms(topology.denominations);
    d.epoch = d.bank->provision_vintage(topology.vintage, denoms, topology.key_bits, seed);

    auto g = std::make_shared<Genesis>();
    g->protocol = std::string(kProtocolVersion);
    g->issuer_label = topology.issuer_label;
    g->denominations = denoms;
    g->vintage = topology.vintage;
    g->policy = topology.policy;
    g->central_bank_key = d.bank->key().verify_key();
    for (const auto& k : d.epoch.keys) {
        g->issuers.add(k);
    }
    for (std::size_t i = 0; i < topology.validators; ++i) {
        d.validator_keys.push_back(SigningKey::from_seed(seed_hash("validator", seed, i)));
        d.account_salts.push_back(seed_hash("account-salt", seed, i));
        g->validators.push_back({static_cast<NodeId>(i), "msb-" + std::to_string(i),
                                 d.validator_keys.back().verify_key(), topology.initial_reserve});
    }
    for (const auto& a : topology.accounts) {
        if (a.msb >= topology.validators) {
            throw Error(Errc::ConfigError, "account '" + a.id + "' names validator " + std::to_string(a.msb));
        }
        if (a.registered) g->registered_commitments.insert(account_commitment(d.account_salts[a.msb], a.id));
    }
    d.genesis = g;
    d.bank->attach(d.genesis);
    return d;
}

}  // namespace cbdc
