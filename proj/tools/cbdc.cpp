// cbdc: genesis generation, scenario runs, benchmarks and audits.
//
// Exit codes: 0 success, 1 assertion or audit failure, 2 configuration error.
// CBDC_LOG=debug prints per-action outcomes during `run`.

#include "cbdc/error.hpp"
#include "cbdc/harness.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cbdc;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfig = 2;

bool debug_logging() {
    const char* v = std::getenv("CBDC_LOG");
    return v != nullptr && std::string_view(v) == "debug";
}

void write_text(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << text;
}

void write_bytes(const fs::path& path, const Bytes& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Bytes read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string jsonl(const std::vector<nlohmann::json>& lines) {
    std::string out;
    for (const auto& l : lines) {
        out += l.dump() + "\n";
    }
    return out;
}

int cmd_init(const std::string& config_path, std::uint64_t seed, const fs::path& out_dir) {
    auto topology = topology_from_json(read_json_file(config_path));
    auto d = deploy(topology, seed);
    fs::create_directories(out_dir);
    write_text(out_dir / "genesis.json", genesis_to_json(*d.genesis).dump(2) + "\n");
    write_text(out_dir / "epoch.json", d.epoch.to_json().dump(2) + "\n");
    std::cout << "genesis " << d.genesis->hash().hex() << ": " << d.genesis->size() << " validators, "
              << d.genesis->issuers.size() << " issuer keys -> " << (out_dir / "genesis.json").string() << "\n";
    return kOk;
}

int cmd_run(const std::string& scenario_path, const std::optional<fs::path>& out_dir) {
    auto scenario = load_scenario(scenario_path);
    if (out_dir) scenario.cluster.record_dir = *out_dir / "records";
    auto result = run_scenario(scenario, {.capture_transcript = false, .keep_trace = out_dir.has_value()});

    if (debug_logging()) {
        for (const auto& o : result.outcomes) {
            std::cerr << "action " << o.index << " " << to_string(o.kind) << ":";
            for (const auto& r : o.results) {
                std::cerr << " " << r;
            }
            std::cerr << "\n";
        }
    }
    if (out_dir) {
        fs::create_directories(*out_dir);
        write_text(*out_dir / "trace.txt", result.trace_text);
        write_bytes(*out_dir / "audit.bin", result.audit_stream);
        write_text(*out_dir / "genesis.json", result.genesis.dump(2) + "\n");
        write_text(*out_dir / "report.jsonl", jsonl(result.report.lines()));
        std::vector<nlohmann::json> alerts;
        for (const auto& a : result.alerts) {
            alerts.push_back(a.to_json());
        }
        write_text(*out_dir / "alerts.jsonl", jsonl(alerts));
    }
    std::cout << "scenario " << result.name << ": height " << result.height << ", state " << result.state_hash.hex()
              << ", trace " << result.trace_hash.hex() << ", alerts " << result.alerts.size() << "\n";
    for (const auto& f : result.failures) {
        std::cout << "FAIL " << f << "\n";
    }
    std::cout << (result.passed ? "PASS" : "FAIL") << "\n";
    return result.passed ? kOk : kFailed;
}

int cmd_bench(const BenchConfig& config) {
    auto r = run_bench(config);
    std::cout << "committed " << r.committed << " entries in " << r.seconds << " s: " << r.rate
              << " entries/sec (validators " << config.validators << ", batch " << config.batch << ", views "
              << r.views << ")\n";
    return kOk;
}

int cmd_audit(const fs::path& stream_path, const fs::path& genesis_path) {
    auto genesis = genesis_from_json(read_json_file(genesis_path));
    AuditReplica audit(genesis);
    try {
        audit.ingest(AuditBatch::decode(read_bytes(stream_path)));
    } catch (const Error& e) {
        if (e.code() != Errc::GapDetected && e.code() != Errc::HashMismatch && e.code() != Errc::Malformed) throw;
        std::cerr << "audit failed: " << e.what() << "\n";
        return kFailed;
    }
    std::cout << jsonl(audit.report().lines());
    for (const auto& a : audit.detect_anomalies()) {
        std::cout << a.to_json().dump() << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CBDC prototype: genesis, scenarios, benchmark, audit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 1;
    std::string init_out = ".";
    auto* init = app.add_subcommand("init", "Generate genesis.json and epoch.json from a topology config");
    init->add_option("--config", config_path, "Topology config (JSON)")->required();
    init->add_option("--seed", seed, "Deployment seed");
    init->add_option("--out", init_out, "Output directory");

    std::string scenario_path;
    std::string run_out;
    auto* run = app.add_subcommand("run", "Execute a scenario file");
    run->add_option("scenario", scenario_path, "Scenario (JSON)")->required();
    run->add_option("--out", run_out, "Write trace, audit stream, report and alerts here");

    BenchConfig bench_cfg;
    auto* bench = app.add_subcommand("bench", "Measure committed entries per second");
    bench->add_option("--duration-ms", bench_cfg.duration_ms, "Processing time budget");
    bench->add_option("--batch", bench_cfg.batch, "Entries per proposal");
    bench->add_option("--validators", bench_cfg.validators, "Validator count");
    bench->add_option("--seed", bench_cfg.seed, "Entry stream seed");

    std::string audit_path;
    std::string audit_genesis = "genesis.json";
    auto* audit = app.add_subcommand("audit", "Replay an audit stream and print the regulator report");
    audit->add_option("stream", audit_path, "audit.bin written by `run --out`")->required();
    audit->add_option("--genesis", audit_genesis, "genesis.json of the run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        auto code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*init) return cmd_init(config_path, seed, init_out);
        if (*run) return cmd_run(scenario_path, run_out.empty() ? std::nullopt : std::optional<fs::path>(run_out));
        if (*bench) return cmd_bench(bench_cfg);
        if (*audit) return cmd_audit(audit_path, audit_genesis);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == Errc::ConfigError ? kConfig : kFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kOk;
}
