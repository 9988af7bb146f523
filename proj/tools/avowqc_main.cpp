#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "avowqc/errors.hpp"
#include "avowqc/runner.hpp"

namespace {

using namespace avowqc;
using nlohmann::json;

constexpr int EXIT_OK = 0;
constexpr int EXIT_ABORT_OR_REJECT = 1;
constexpr int EXIT_USAGE = 2;
constexpr int EXIT_GUILTY = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// Accepts "intercept-resend", "intercept-resend:0.5",
// "intercept-resend-fixed:z", "intercept-resend-fixed:z:0.25" or "none".
void apply_eve_spec(RunConfig& cfg, const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty()) throw ParseError("empty adversary spec");
    const std::string& kind = parts[0];
    if (kind == "none") {
        cfg.eve_kind = EveKind::None;
        return;
    }
    if (kind == "intercept-resend") {
        cfg.eve_kind = EveKind::InterceptResendRandomBasis;
        cfg.eve_coverage = parts.size() > 1 ? std::stod(parts[1]) : 1.0;
        return;
    }
    if (kind == "intercept-resend-fixed") {
        cfg.eve_kind = EveKind::InterceptResendFixedBasis;
        if (parts.size() < 2) throw ParseError("intercept-resend-fixed needs a basis, e.g. intercept-resend-fixed:z");
        if (parts[1] != "z" && parts[1] != "x") throw ParseError("basis must be z or x, got " + parts[1]);
        cfg.eve_basis = parts[1] == "z" ? Basis::Z : Basis::X;
        cfg.eve_coverage = parts.size() > 2 ? std::stod(parts[2]) : 1.0;
        return;
    }
    throw ParseError("unknown adversary spec '" + spec + "'");
}

struct TeleportArgs {
    int n = 0;
    uint64_t seed = 0;
    std::string states_file, trace_path, config_file;
    bool n_set = false, seed_set = false;
};

int cmd_teleport(const TeleportArgs& a) {
    RunConfig cfg;
    cfg.protocol = "teleport";
    if (!a.config_file.empty()) cfg = RunConfig::from_json(parse_json_file(a.config_file));
    if (a.n_set) cfg.n = a.n;
    if (a.seed_set) cfg.seed = a.seed;
    if (!a.states_file.empty()) {
        cfg.states.clear();
        json st = parse_json_file(a.states_file);
        json wrapped{{"protocol", "teleport"}, {"seed", cfg.seed}, {"n", st.size()}, {"states", st}};
        cfg.states = RunConfig::from_json(wrapped).states;
        if (!a.n_set) cfg.n = static_cast<int>(cfg.states.size());
    }

    TeleportRunResult res = run_teleport(cfg);
    std::cout << "protocol: teleport\n";
    std::cout << "run: " << res.transcript.run_id() << " seed=" << res.transcript.seed()
              << " n=" << res.transcript.config().at("n").get<int>() << "\n";
    if (!a.trace_path.empty()) {
        res.transcript.save(a.trace_path);
        std::cout << "trace: " << a.trace_path << "\n";
    }
    if (res.aborted) {
        std::cout << "status: abort (" << res.abort_cause << ")\n";
        return EXIT_ABORT_OR_REJECT;
    }
    double mean = 0.0;
    for (double f : res.fidelities) mean += f;
    mean /= static_cast<double>(res.fidelities.size());
    std::cout << std::fixed << std::setprecision(12);
    std::cout << "fidelity: min=" << res.min_fidelity << " mean=" << mean << "\n";
    std::cout << "key usage: ka " << res.ka_consumed_alice << "/" << res.ka_size << " bits, kb "
              << res.kb_consumed_bob << "/" << res.kb_size << " bits\n";
    std::cout << "status: ok\n";
    return EXIT_OK;
}

struct QsdcArgs {
    std::string message_hex;
    uint64_t seed = 0;
    std::string eve_spec, trace_path, config_file;
    int trials = 1;
    int check_threshold = 0;
    bool seed_set = false, threshold_set = false;
};

int run_qsdc_once(const RunConfig& cfg, const std::string& trace_path) {
    QsdcRunResult res = run_qsdc(cfg);
    std::cout << "protocol: qsdc\n";
    std::cout << "run: " << res.transcript.run_id() << " seed=" << res.transcript.seed() << " n="
              << res.transcript.config().at("n").get<int>() << "\n";
    if (!trace_path.empty()) {
        res.transcript.save(trace_path);
        std::cout << "trace: " << trace_path << "\n";
    }
    std::cout << "check: " << res.check.positions.size() << " positions, " << res.check.mismatches
              << " mismatches (threshold " << cfg.check_threshold << ")\n";
    if (res.aborted) {
        std::cout << "status: abort (" << res.abort_cause << ")\n";
        return EXIT_ABORT_OR_REJECT;
    }
    std::cout << "decoded: " << res.decoded.to_string() << "\n";
    std::cout << "signature: " << (res.accepted ? "accept" : "reject") << "\n";
    std::cout << "status: " << (res.accepted ? "ok" : "reject") << "\n";
    return res.accepted ? EXIT_OK : EXIT_ABORT_OR_REJECT;
}

int run_qsdc_trials(const RunConfig& base, int trials) {
    int accepted = 0, rejected = 0, aborted = 0;
    std::size_t mismatch_sum = 0, position_sum = 0;
    for (int t = 0; t < trials; ++t) {
        RunConfig cfg = base;
        cfg.seed = base.seed + static_cast<uint64_t>(t);
        QsdcRunResult res = run_qsdc(cfg);
        mismatch_sum += res.check.mismatches;
        position_sum += res.check.positions.size();
        if (res.aborted) {
            ++aborted;
        } else if (res.accepted) {
            ++accepted;
        } else {
            ++rejected;
        }
    }
    std::cout << "protocol: qsdc\n";
    std::cout << "trials: " << trials << " accepted=" << accepted << " rejected=" << rejected
              << " aborted=" << aborted << "\n";
    std::cout << std::fixed << std::setprecision(6);
    if (position_sum > 0) {
        std::cout << "check mismatch rate: "
                  << static_cast<double>(mismatch_sum) / static_cast<double>(position_sum) << " over "
                  << position_sum << " positions\n";
    }
    std::cout << "escape rate: " << static_cast<double>(accepted + rejected) / static_cast<double>(trials) << "\n";
    return EXIT_OK;
}

int cmd_qsdc(const QsdcArgs& a) {
    RunConfig cfg;
    cfg.protocol = "qsdc";
    if (!a.config_file.empty()) cfg = RunConfig::from_json(parse_json_file(a.config_file));
    if (a.seed_set) cfg.seed = a.seed;
    if (a.threshold_set) cfg.check_threshold = a.check_threshold;
    if (!a.message_hex.empty()) {
        cfg.message = BitString::from_hex(a.message_hex);
        cfg.n = static_cast<int>(cfg.message.size());
    }
    if (!a.eve_spec.empty()) apply_eve_spec(cfg, a.eve_spec);
    if (a.trials < 1) throw ParseError("--trials must be at least 1");
    if (a.trials > 1) return run_qsdc_trials(cfg, a.trials);
    return run_qsdc_once(cfg, a.trace_path);
}

int cmd_dispute(const std::string& transcript_path, const std::string& claim_name) {
    Transcript t = Transcript::load(transcript_path);
    Claim claim = claim_from_string(claim_name);
    std::vector<std::string> evidence;
    Verdict v = adjudicate(t, claim, &evidence);
    std::cout << "claim: " << to_string(claim) << "\n";
    std::cout << "verdict: " << to_string(v) << "\n";
    std::cout << "evidence:\n";
    for (const std::string& line : evidence) std::cout << "  - " << line << "\n";
    return v == Verdict::Guilty ? EXIT_GUILTY : EXIT_OK;
}

int cmd_replay(const std::string& transcript_path) {
    ReplayResult r = replay_verify(read_file(transcript_path));
    std::cout << "replay: " << (r.identical ? r.detail : "MISMATCH - " + r.detail) << "\n";
    return r.identical ? EXIT_OK : EXIT_ABORT_OR_REJECT;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"avowqc: deterministic simulator for avowable quantum communication"};
    app.require_subcommand(1);

    TeleportArgs ta;
    CLI::App* tele = app.add_subcommand("teleport", "run the arbitrated teleportation protocol");
    auto* opt_n = tele->add_option("--n", ta.n, "number of states to teleport");
    auto* opt_ts = tele->add_option("--seed", ta.seed, "master seed");
    tele->add_option("--states", ta.states_file, "JSON file with input states [[ [re,im],[re,im] ], ...]");
    tele->add_option("--trace", ta.trace_path, "write the run transcript to this path");
    tele->add_option("--config", ta.config_file, "JSON run config (flags override its fields)");

    QsdcArgs qa;
    CLI::App* qsdc = app.add_subcommand("qsdc", "run the hash-signed direct communication protocol");
    qsdc->add_option("--message", qa.message_hex, "message bits, hex encoded (4 bits per digit)");
    auto* opt_qs = qsdc->add_option("--seed", qa.seed, "master seed");
    qsdc->add_option("--eve", qa.eve_spec,
                     "adversary: none | intercept-resend[:coverage] | intercept-resend-fixed:z|x[:coverage]");
    qsdc->add_option("--trials", qa.trials, "run this many seeds (seed, seed+1, ...) and summarize");
    auto* opt_qt = qsdc->add_option("--check-threshold", qa.check_threshold,
                                    "largest tolerated number of check mismatches");
    qsdc->add_option("--trace", qa.trace_path, "write the run transcript to this path");
    qsdc->add_option("--config", qa.config_file, "JSON run config (flags override its fields)");

    std::string dispute_transcript, dispute_claim;
    CLI::App* dispute = app.add_subcommand("dispute", "adjudicate a repudiation claim from a saved transcript");
    dispute->add_option("--transcript", dispute_transcript, "transcript file")->required();
    dispute->add_option("--claim", dispute_claim, "alice-denies-sending | bob-denies-receiving")->required();

    std::string replay_transcript;
    CLI::App* replay = app.add_subcommand("replay", "re-run a transcript's config and compare byte for byte");
    replay->add_option("--transcript", replay_transcript, "transcript file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? EXIT_OK : EXIT_USAGE;
    }

    try {
        if (tele->parsed()) {
            ta.n_set = opt_n->count() > 0;
            ta.seed_set = opt_ts->count() > 0;
            return cmd_teleport(ta);
        }
        if (qsdc->parsed()) {
            qa.seed_set = opt_qs->count() > 0;
            qa.threshold_set = opt_qt->count() > 0;
            return cmd_qsdc(qa);
        }
        if (dispute->parsed()) return cmd_dispute(dispute_transcript, dispute_claim);
        if (replay->parsed()) return cmd_replay(replay_transcript);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_USAGE;
    } catch (const ProtocolAbort& e) {
        std::cerr << "abort: " << e.cause << "\n";
        return EXIT_ABORT_OR_REJECT;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return EXIT_USAGE;
    }
    return EXIT_USAGE;
}
