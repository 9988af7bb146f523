#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "avowqc/crypto.hpp"

namespace avowqc {

enum class ChannelKind { ClassicalPrivate, ClassicalPublic, Quantum };
enum class EventKind { Send, Receive, Measure, Apply, Abort, Verdict };

std::string to_string(ChannelKind c);
std::string to_string(EventKind k);
ChannelKind channel_from_string(const std::string& s);
EventKind event_kind_from_string(const std::string& s);

// Outcome of a dispute adjudication.
enum class Verdict { Guilty, NotGuilty, Forgery, Inconclusive };
enum class Claim { AliceDeniesSending, BobDeniesReceiving };

std::string to_string(Verdict v);
std::string to_string(Claim c);
Claim claim_from_string(const std::string& s);

// One logged protocol event. `details` is the kind-specific record and is
// kept as parsed JSON so that serialize(parse(x)) == x byte for byte.
struct TraceEvent {
    uint64_t seq = 0;
    uint64_t timestamp_logical = 0;  // equals seq; time is event order
    PartyId actor = PartyId::Alice;
    EventKind kind = EventKind::Send;
    nlohmann::json details;

    nlohmann::json to_json() const;
    static TraceEvent from_json(const nlohmann::json& j);
};

// Append-only event log of one protocol run. Serialized as JSON-lines:
// one header object (run_id, seed, protocol, config) followed by one
// object per event. Bit strings are hex-encoded most-significant-bit
// first with an explicit bit length; this encoding is normative.
class Transcript {
public:
    Transcript() = default;
    Transcript(std::string run_id, uint64_t seed, std::string protocol, nlohmann::json config);

    const std::string& run_id() const { return run_id_; }
    uint64_t seed() const { return seed_; }
    const std::string& protocol() const { return protocol_; }
    const nlohmann::json& config() const { return config_; }
    const std::vector<TraceEvent>& events() const { return events_; }
    std::vector<TraceEvent>& mutable_events() { return events_; }

    // Send events return their seq so the matching Receive can reference it.
    uint64_t log_send_ciphertext(PartyId from, PartyId to, ChannelKind channel, const Ciphertext& ct,
                                 const std::string& key_pair);
    uint64_t log_send_bits(PartyId from, PartyId to, ChannelKind channel, const BitString& bits);
    uint64_t log_send_digest(PartyId from, PartyId to, const Digest& digest);
    uint64_t log_send_qubit(PartyId from, PartyId to, int index, const std::string& label);
    void log_receive(PartyId actor, PartyId from, ChannelKind channel, uint64_t ref_seq);
    void log_measure(PartyId actor, const std::string& role, int index, const std::string& basis,
                     const nlohmann::json& outcome);
    void log_apply(PartyId actor, const std::string& role, const std::string& op, const std::string& target,
                   int index);
    void log_abort(PartyId actor, const std::string& cause, nlohmann::json extra = nlohmann::json::object());
    void log_verdict(PartyId actor, nlohmann::json details);

    std::string serialize() const;
    static Transcript parse(const std::string& text);

    void save(const std::filesystem::path& path) const;
    static Transcript load(const std::filesystem::path& path);

private:
    uint64_t append(PartyId actor, EventKind kind, nlohmann::json details);

    std::string run_id_;
    uint64_t seed_ = 0;
    std::string protocol_;
    nlohmann::json config_;
    std::vector<TraceEvent> events_;
};

}  // namespace avowqc
