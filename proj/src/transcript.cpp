#include "avowqc/transcript.hpp"

#include <fstream>
#include <sstream>

#include "avowqc/errors.hpp"

namespace avowqc {

using nlohmann::json;

std::string to_string(ChannelKind c) {
    switch (c) {
        case ChannelKind::ClassicalPrivate: return "classical_private";
        case ChannelKind::ClassicalPublic: return "classical_public";
        case ChannelKind::Quantum: return "quantum";
    }
    return "?";
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::Send: return "send";
        case EventKind::Receive: return "receive";
        case EventKind::Measure: return "measure";
        case EventKind::Apply: return "apply";
        case EventKind::Abort: return "abort";
        case EventKind::Verdict: return "verdict";
    }
    return "?";
}

ChannelKind channel_from_string(const std::string& s) {
    if (s == "classical_private") return ChannelKind::ClassicalPrivate;
    if (s == "classical_public") return ChannelKind::ClassicalPublic;
    if (s == "quantum") return ChannelKind::Quantum;
    throw ParseError("unknown channel: " + s);
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "send") return EventKind::Send;
    if (s == "receive") return EventKind::Receive;
    if (s == "measure") return EventKind::Measure;
    if (s == "apply") return EventKind::Apply;
    if (s == "abort") return EventKind::Abort;
    if (s == "verdict") return EventKind::Verdict;
    throw ParseError("unknown event kind: " + s);
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Guilty: return "guilty";
        case Verdict::NotGuilty: return "not_guilty";
        case Verdict::Forgery: return "forgery";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::string to_string(Claim c) {
    return c == Claim::AliceDeniesSending ? "alice-denies-sending" : "bob-denies-receiving";
}

Claim claim_from_string(const std::string& s) {
    if (s == "alice-denies-sending") return Claim::AliceDeniesSending;
    if (s == "bob-denies-receiving") return Claim::BobDeniesReceiving;
    throw ParseError("unknown claim: " + s);
}

json TraceEvent::to_json() const {
    return json{{"seq", seq},
                {"ts", timestamp_logical},
                {"actor", to_string(actor)},
                {"kind", to_string(kind)},
                {"details", details}};
}

TraceEvent TraceEvent::from_json(const json& j) {
    TraceEvent e;
    e.seq = j.at("seq").get<uint64_t>();
    e.timestamp_logical = j.at("ts").get<uint64_t>();
    e.actor = party_from_string(j.at("actor").get<std::string>());
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.details = j.at("details");
    return e;
}

Transcript::Transcript(std::string run_id, uint64_t seed, std::string protocol, json config)
    : run_id_(std::move(run_id)), seed_(seed), protocol_(std::move(protocol)), config_(std::move(config)) {}

uint64_t Transcript::append(PartyId actor, EventKind kind, json details) {
    TraceEvent e;
    e.seq = events_.size();
    e.timestamp_logical = e.seq;
    e.actor = actor;
    e.kind = kind;
    e.details = std::move(details);
    events_.push_back(std::move(e));
    return events_.back().seq;
}

uint64_t Transcript::log_send_ciphertext(PartyId from, PartyId to, ChannelKind channel, const Ciphertext& ct,
                                         const std::string& key_pair) {
    json payload{{"type", "ciphertext"},
                 {"hex", ct.bits.to_hex()},
                 {"len", ct.bits.size()},
                 {"key_offset", ct.key_offset},
                 {"key_pair", key_pair}};
    return append(from, EventKind::Send,
                  json{{"from", to_string(from)},
                       {"to", to_string(to)},
                       {"channel", to_string(channel)},
                       {"payload", std::move(payload)},
                       {"payload_hash", hash_digest(ct.bits).to_hex()}});
}

uint64_t Transcript::log_send_bits(PartyId from, PartyId to, ChannelKind channel, const BitString& bits) {
    json payload{{"type", "bits"}, {"hex", bits.to_hex()}, {"len", bits.size()}};
    return append(from, EventKind::Send,
                  json{{"from", to_string(from)},
                       {"to", to_string(to)},
                       {"channel", to_string(channel)},
                       {"payload", std::move(payload)},
                       {"payload_hash", hash_digest(bits).to_hex()}});
}

uint64_t Transcript::log_send_digest(PartyId from, PartyId to, const Digest& digest) {
    json payload{{"type", "digest"}, {"hex", digest.to_hex()}};
    return append(from, EventKind::Send,
                  json{{"from", to_string(from)},
                       {"to", to_string(to)},
                       {"channel", to_string(ChannelKind::ClassicalPublic)},
                       {"payload", std::move(payload)},
                       {"payload_hash", hash_digest(digest.bits).to_hex()}});
}

uint64_t Transcript::log_send_qubit(PartyId from, PartyId to, int index, const std::string& label) {
    json payload{{"type", "qubit"}, {"index", index}, {"label", label}};
    return append(from, EventKind::Send,
                  json{{"from", to_string(from)},
                       {"to", to_string(to)},
                       {"channel", to_string(ChannelKind::Quantum)},
                       {"payload", std::move(payload)}});
}

void Transcript::log_receive(PartyId actor, PartyId from, ChannelKind channel, uint64_t ref_seq) {
    append(actor, EventKind::Receive,
           json{{"from", to_string(from)}, {"to", to_string(actor)}, {"channel", to_string(channel)},
                {"ref_seq", ref_seq}});
}

void Transcript::log_measure(PartyId actor, const std::string& role, int index, const std::string& basis,
                             const json& outcome) {
    append(actor, EventKind::Measure, json{{"role", role}, {"index", index}, {"basis", basis}, {"outcome", outcome}});
}

void Transcript::log_apply(PartyId actor, const std::string& role, const std::string& op, const std::string& target,
                           int index) {
    append(actor, EventKind::Apply, json{{"role", role}, {"op", op}, {"target", target}, {"index", index}});
}

void Transcript::log_abort(PartyId actor, const std::string& cause, json extra) {
    extra["cause"] = cause;
    append(actor, EventKind::Abort, std::move(extra));
}

void Transcript::log_verdict(PartyId actor, json details) { append(actor, EventKind::Verdict, std::move(details)); }

std::string Transcript::serialize() const {
    std::ostringstream out;
    out << json{{"run_id", run_id_}, {"seed", seed_}, {"protocol", protocol_}, {"config", config_}}.dump() << '\n';
    for (const TraceEvent& e : events_) out << e.to_json().dump() << '\n';
    return out.str();
}

Transcript Transcript::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    Transcript t;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("transcript line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
        try {
            if (!have_header) {
                t.run_id_ = j.at("run_id").get<std::string>();
                t.seed_ = j.at("seed").get<uint64_t>();
                t.protocol_ = j.at("protocol").get<std::string>();
                t.config_ = j.at("config");
                have_header = true;
            } else {
                t.events_.push_back(TraceEvent::from_json(j));
            }
        } catch (const json::exception& e) {
            throw ParseError("transcript line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    if (!have_header) throw ParseError("transcript is empty", 0);
    return t;
}

void Transcript::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << serialize();
}

Transcript Transcript::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

}  // namespace avowqc
