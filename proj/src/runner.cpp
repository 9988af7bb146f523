#include "avowqc/runner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "avowqc/errors.hpp"

namespace avowqc {

using nlohmann::json;

namespace {

std::string eve_kind_string(EveKind k) {
    switch (k) {
        case EveKind::None: return "none";
        case EveKind::InterceptResendRandomBasis: return "intercept-resend";
        case EveKind::InterceptResendFixedBasis: return "intercept-resend-fixed";
    }
    return "?";
}

EveKind eve_kind_value(const std::string& s) {
    if (s == "none") return EveKind::None;
    if (s == "intercept-resend") return EveKind::InterceptResendRandomBasis;
    if (s == "intercept-resend-fixed") return EveKind::InterceptResendFixedBasis;
    throw ParseError("unknown adversary kind: " + s);
}

Basis basis_value(const std::string& s) {
    if (s == "z") return Basis::Z;
    if (s == "x") return Basis::X;
    throw ParseError("unknown basis: " + s);
}

// Draw a uniformly random pure qubit state: uniform point on the Bloch
// sphere, alpha kept real and non-negative.
std::pair<Amp, Amp> random_state(CounterRng& rng) {
    double u = rng.next_double();
    double phi = 2.0 * std::numbers::pi * rng.next_double();
    double theta = std::acos(1.0 - 2.0 * u);
    return {Amp(std::cos(theta / 2.0), 0.0), std::polar(std::sin(theta / 2.0), phi)};
}

void resolve_states(RunConfig& cfg) {
    if (cfg.protocol != "teleport" || !cfg.states.empty()) return;
    CounterRng rng(derive_seed(cfg.seed, "states"));
    cfg.states.reserve(static_cast<std::size_t>(cfg.n));
    for (int i = 0; i < cfg.n; ++i) cfg.states.push_back(random_state(rng));
}

// Sifting and error sampling can leave fewer than `length` bits (small
// keys sit a few sigma from the edge); the parties then simply run another
// session with fresh pulses. Attempt k draws its pulses from child seed k,
// so the whole sequence is a pure function of the master seed and the
// arbitrator can re-derive it.
Bb84Result establish_key_with_retry(std::size_t length, uint64_t master, const char* label, PartyId sender,
                                    PartyId receiver) {
    constexpr uint64_t MAX_ATTEMPTS = 8;
    for (uint64_t attempt = 0; attempt < MAX_ATTEMPTS; ++attempt) {
        try {
            return bb84_establish_key(length, derive_seed(master, label, attempt), nullptr, sender, receiver);
        } catch (const ProtocolAbort&) {
            continue;
        }
    }
    Bb84Result out;
    out.aborted = true;
    return out;
}

}  // namespace

json RunConfig::to_json() const {
    json j{{"protocol", protocol}, {"seed", seed}, {"n", n}};
    if (protocol == "teleport") {
        json st = json::array();
        for (const auto& [a, b] : states) {
            st.push_back(json::array(
                {json::array({a.real(), a.imag()}), json::array({b.real(), b.imag()})}));
        }
        j["states"] = std::move(st);
    } else if (protocol == "qsdc") {
        j["message_hex"] = message.to_hex();
        j["check_threshold"] = check_threshold;
        json e{{"kind", eve_kind_string(eve_kind)}};
        if (eve_kind != EveKind::None) e["coverage"] = eve_coverage;
        if (eve_kind == EveKind::InterceptResendFixedBasis) e["basis"] = to_string(eve_basis);
        j["eve"] = std::move(e);
    }
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    try {
        c.protocol = j.at("protocol").get<std::string>();
        c.seed = j.at("seed").get<uint64_t>();
        c.n = j.at("n").get<int>();
        if (j.contains("states")) {
            for (const json& s : j.at("states")) {
                Amp a(s.at(0).at(0).get<double>(), s.at(0).at(1).get<double>());
                Amp b(s.at(1).at(0).get<double>(), s.at(1).at(1).get<double>());
                c.states.emplace_back(a, b);
            }
        }
        if (j.contains("message_hex")) {
            BitString all = BitString::from_hex(j.at("message_hex").get<std::string>());
            if (c.n < 0 || all.size() < static_cast<std::size_t>(c.n)) {
                throw ParseError("message_hex carries fewer than n bits");
            }
            c.message = all.slice(0, static_cast<std::size_t>(c.n));
        }
        if (j.contains("check_threshold")) c.check_threshold = j.at("check_threshold").get<int>();
        if (j.contains("eve")) {
            const json& e = j.at("eve");
            c.eve_kind = eve_kind_value(e.at("kind").get<std::string>());
            if (e.contains("coverage")) c.eve_coverage = e.at("coverage").get<double>();
            if (e.contains("basis")) c.eve_basis = basis_value(e.at("basis").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad run config: ") + e.what());
    }
    return c;
}

void RunConfig::validate() const {
    if (protocol != "teleport" && protocol != "qsdc") {
        throw ParseError("protocol must be 'teleport' or 'qsdc', got '" + protocol + "'");
    }
    if (n < 1 || n > 4096) throw ParseError("n must be in [1, 4096], got " + std::to_string(n));
    if (protocol == "teleport") {
        if (!states.empty() && states.size() != static_cast<std::size_t>(n)) {
            throw ParseError("expected " + std::to_string(n) + " input states, got " + std::to_string(states.size()));
        }
        for (const auto& [a, b] : states) {
            double norm = std::norm(a) + std::norm(b);
            if (std::abs(norm - 1.0) > 1e-6) {
                throw ParseError("input state is not normalized (|alpha|^2+|beta|^2 = " + std::to_string(norm) + ")");
            }
        }
    } else {
        if (message.size() != static_cast<std::size_t>(n)) {
            throw ParseError("message must carry exactly n=" + std::to_string(n) + " bits, got " +
                             std::to_string(message.size()));
        }
        if (eve_coverage < 0.0 || eve_coverage > 1.0) {
            throw ParseError("adversary coverage must lie in [0, 1]");
        }
        if (check_threshold < 0 || check_threshold > n) {
            throw ParseError("check threshold must lie in [0, n]");
        }
    }
}

std::string run_id_for(const json& config_snapshot) {
    std::string s = config_snapshot.dump();
    Digest d = sha256_bytes(std::vector<uint8_t>(s.begin(), s.end()));
    return d.to_hex().substr(0, 16);
}

TeleportRunResult run_teleport(const RunConfig& config, const RunOptions& options) {
    RunConfig cfg = config;
    if (cfg.protocol.empty()) cfg.protocol = "teleport";
    if (cfg.n == 0 && !cfg.states.empty()) cfg.n = static_cast<int>(cfg.states.size());
    resolve_states(cfg);
    cfg.validate();

    json snapshot = cfg.to_json();
    TeleportRunResult res;
    res.inputs = cfg.states;
    res.transcript = Transcript(run_id_for(snapshot), cfg.seed, "teleport", snapshot);

    const std::size_t ka_len = ka_bits_for(static_cast<std::size_t>(cfg.n));
    const std::size_t kb_len = kb_bits_for(static_cast<std::size_t>(cfg.n));
    Bb84Result ka = establish_key_with_retry(ka_len, cfg.seed, "bb84-ka", PartyId::Alice, PartyId::Charlie);
    Bb84Result kb = establish_key_with_retry(kb_len, cfg.seed, "bb84-kb", PartyId::Bob, PartyId::Charlie);
    res.ka_size = ka_len;
    res.kb_size = kb_len;
    if (ka.aborted || kb.aborted) {
        res.aborted = true;
        res.abort_cause = "key_establishment";
        res.transcript.log_abort(PartyId::Charlie, "key_establishment");
        return res;
    }

    TeleportKeys keys{Key(ka.sender_key_bits, PartyId::Alice, PartyId::Charlie),
                      Key(ka.receiver_key_bits, PartyId::Alice, PartyId::Charlie),
                      Key(kb.receiver_key_bits, PartyId::Bob, PartyId::Charlie),
                      Key(kb.sender_key_bits, PartyId::Bob, PartyId::Charlie)};
    if (options.forge_charlie_ka) {
        CounterRng forged(derive_seed(cfg.seed, "forged-ka"));
        keys.charlie_ka = Key(BitString::random(forged, ka_len), PartyId::Alice, PartyId::Charlie);
    }

    TeleportSession session(cfg.states, std::move(keys), cfg.seed, res.transcript);
    auto snapshot_key_usage = [&res, &session] {
        res.ka_consumed_alice = session.alice_ka().consumed();
        res.ka_consumed_charlie = session.charlie_ka().consumed();
        res.kb_consumed_bob = session.bob_kb().consumed();
        res.kb_consumed_charlie = session.charlie_kb().consumed();
    };
    try {
        session.request_session();
        std::vector<BellOutcome> outcomes = session.swap_entanglement();
        session.correct_channel(outcomes);
        Ciphertext s_a = session.alice_measure_and_wrap();
        if (options.tamper == RunOptions::Tamper::OutcomeRecord) s_a.bits.flip_bit(s_a.bits.size() - 1);
        Ciphertext s_c = session.relay_reencrypt(s_a);
        std::vector<BellOutcome> record = session.bob_decrypt_record(s_c);
        res.recovered = session.bob_recover(record);
    } catch (const ProtocolAbort& a) {
        res.aborted = true;
        res.abort_cause = a.cause;
        snapshot_key_usage();
        return res;
    }
    snapshot_key_usage();

    res.min_fidelity = 1.0;
    for (std::size_t i = 0; i < res.recovered.size(); ++i) {
        StateVector want = single_qubit_state(res.inputs[i].first, res.inputs[i].second);
        double f = fidelity_up_to_phase(want, res.recovered[i]);
        res.fidelities.push_back(f);
        res.min_fidelity = std::min(res.min_fidelity, f);
    }
    return res;
}

QsdcRunResult run_qsdc(const RunConfig& config, const RunOptions& options) {
    RunConfig cfg = config;
    if (cfg.protocol.empty()) cfg.protocol = "qsdc";
    if (cfg.n == 0 && !cfg.message.empty()) cfg.n = static_cast<int>(cfg.message.size());
    cfg.validate();

    json snapshot = cfg.to_json();
    QsdcRunResult res;
    res.transcript = Transcript(run_id_for(snapshot), cfg.seed, "qsdc", snapshot);

    std::optional<Eve> eve;
    if (cfg.eve_kind == EveKind::InterceptResendRandomBasis) {
        eve.emplace(EveStrategy::intercept_resend(cfg.eve_coverage, derive_seed(cfg.seed, "eve")));
    } else if (cfg.eve_kind == EveKind::InterceptResendFixedBasis) {
        eve.emplace(EveStrategy::intercept_resend_fixed(cfg.eve_basis, cfg.eve_coverage, derive_seed(cfg.seed, "eve")));
    }

    QsdcSession session(cfg.message, cfg.seed, cfg.check_threshold, res.transcript);
    try {
        session.agree_hash();
        session.distribute_pairs(eve ? &*eve : nullptr);
        res.check = session.channel_check();
        session.encode_message();
        BitString announced = session.alice_measure_announce();
        Digest digest = session.send_hash();
        if (options.tamper == RunOptions::Tamper::Announced) announced.flip_bit(0);
        if (options.tamper == RunOptions::Tamper::Digest) digest.bits.flip_bit(0);
        BitString decoded = session.bob_decode(announced);
        if (options.tamper == RunOptions::Tamper::Decoded) decoded.flip_bit(0);
        res.digest = digest;
        res.decoded = decoded;
        res.reached_verify = true;
        res.accepted = session.verify_signature(decoded, digest);
    } catch (const ProtocolAbort& a) {
        res.aborted = true;
        res.abort_cause = a.cause;
        res.check = session.check_report();
        return res;
    }
    return res;
}

ArbitratorKeys derive_arbitrator_keys(const RunConfig& config) {
    Bb84Result ka = establish_key_with_retry(ka_bits_for(static_cast<std::size_t>(config.n)), config.seed,
                                             "bb84-ka", PartyId::Alice, PartyId::Charlie);
    Bb84Result kb = establish_key_with_retry(kb_bits_for(static_cast<std::size_t>(config.n)), config.seed,
                                             "bb84-kb", PartyId::Bob, PartyId::Charlie);
    if (ka.aborted || kb.aborted || !ka.key || !kb.key) {
        throw ProtocolError("arbitrator key re-derivation failed");
    }
    return {ka.receiver_key_bits, kb.receiver_key_bits};
}

Verdict adjudicate(const Transcript& transcript, Claim claim, std::vector<std::string>* evidence) {
    if (transcript.protocol() == "teleport") {
        RunConfig cfg = RunConfig::from_json(transcript.config());
        return adjudicate_teleport_dispute(transcript, claim, derive_arbitrator_keys(cfg), evidence);
    }
    if (transcript.protocol() == "qsdc") {
        return adjudicate_qsdc_dispute(transcript, claim, evidence);
    }
    if (evidence) evidence->push_back("unknown protocol '" + transcript.protocol() + "'");
    return Verdict::Inconclusive;
}

ReplayResult replay_verify(const std::string& original_text) {
    Transcript t = Transcript::parse(original_text);
    RunConfig cfg = RunConfig::from_json(t.config());
    if (cfg.protocol != t.protocol()) throw ParseError("transcript header protocol disagrees with its config");
    if (cfg.seed != t.seed()) throw ParseError("transcript header seed disagrees with its config");

    std::string regenerated = cfg.protocol == "teleport" ? run_teleport(cfg).transcript.serialize()
                                                         : run_qsdc(cfg).transcript.serialize();
    if (regenerated == original_text) {
        std::size_t lines = static_cast<std::size_t>(std::count(original_text.begin(), original_text.end(), '\n'));
        return {true, "identical (" + std::to_string(lines) + " lines)"};
    }

    // Locate the first line where the two serializations part ways.
    std::size_t line = 1, i = 0, j = 0;
    while (i < original_text.size() && j < regenerated.size() && original_text[i] == regenerated[j]) {
        if (original_text[i] == '\n') ++line;
        ++i;
        ++j;
    }
    return {false, "diverges at line " + std::to_string(line)};
}

void randomize_send_payload(Transcript& t, uint64_t event_seq, uint64_t seed) {
    for (TraceEvent& e : t.mutable_events()) {
        if (e.seq != event_seq) continue;
        if (e.kind != EventKind::Send || !e.details.contains("payload")) {
            throw ProtocolError("event " + std::to_string(event_seq) + " is not a payload-carrying send");
        }
        json& p = e.details.at("payload");
        std::size_t len = p.contains("len") ? p.at("len").get<std::size_t>() : 256;
        CounterRng rng(seed);
        BitString fresh = BitString::random(rng, len);
        p["hex"] = fresh.to_hex();
        e.details["payload_hash"] = hash_digest(fresh).to_hex();
        return;
    }
    throw ProtocolError("no event with seq " + std::to_string(event_seq));
}

std::optional<uint64_t> find_outcome_record_send(const Transcript& t) {
    int seen = 0;
    for (const TraceEvent& e : t.events()) {
        if (e.kind != EventKind::Send || !e.details.contains("payload")) continue;
        const json& p = e.details.at("payload");
        if (p.value("type", "") != "ciphertext") continue;
        if (e.details.at("from").get<std::string>() != "alice") continue;
        if (e.details.at("to").get<std::string>() != "charlie") continue;
        if (++seen == 2) return e.seq;
    }
    return std::nullopt;
}

std::optional<uint64_t> find_data_announcement_send(const Transcript& t) {
    std::optional<uint64_t> digest_seq;
    for (const TraceEvent& e : t.events()) {
        if (e.kind != EventKind::Send || !e.details.contains("payload")) continue;
        if (e.details.at("payload").value("type", "") == "digest" &&
            e.details.at("from").get<std::string>() == "alice") {
            digest_seq = e.seq;
            break;
        }
    }
    if (!digest_seq) return std::nullopt;
    std::optional<uint64_t> found;
    for (const TraceEvent& e : t.events()) {
        if (e.seq >= *digest_seq) break;
        if (e.kind != EventKind::Send || !e.details.contains("payload")) continue;
        if (e.details.at("payload").value("type", "") != "bits") continue;
        if (e.details.at("from").get<std::string>() == "alice" && e.details.at("to").get<std::string>() == "bob") {
            found = e.seq;
        }
    }
    return found;
}

void erase_event(Transcript& t, uint64_t event_seq) {
    std::erase_if(t.mutable_events(), [event_seq](const TraceEvent& e) { return e.seq == event_seq; });
}

}  // namespace avowqc
