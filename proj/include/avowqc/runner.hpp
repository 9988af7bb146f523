#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "avowqc/adversary.hpp"
#include "avowqc/qsdc.hpp"
#include "avowqc/teleport.hpp"
#include "avowqc/transcript.hpp"

namespace avowqc {

// Complete description of one run. Serialized into the transcript header;
// a parsed config plus the seed reproduces the run bit for bit.
struct RunConfig {
    std::string protocol;  // "teleport" or "qsdc"
    uint64_t seed = 0;
    int n = 0;

    // teleport: input states (alpha, beta) per index. Empty means "draw n
    // uniformly random pure states from the seed"; the drawn states are
    // materialized into the config snapshot so replay sees them.
    std::vector<std::pair<Amp, Amp>> states;

    // qsdc
    BitString message;
    EveKind eve_kind = EveKind::None;
    double eve_coverage = 1.0;
    Basis eve_basis = Basis::Z;
    int check_threshold = 0;

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    void validate() const;
};

// Derives the run id: first 16 hex digits of the digest of the canonical
// config snapshot.
std::string run_id_for(const nlohmann::json& config_snapshot);

// Fault injection for dispute and robustness tests. These model in-flight
// interference, not config changes, so they are deliberately not part of
// the config snapshot.
struct RunOptions {
    // Replace Charlie's copy of K_a with random bits of the same length
    // (the session application then fails its identity check).
    bool forge_charlie_ka = false;

    enum class Tamper {
        None,
        OutcomeRecord,  // teleport: flip one bit of S_a between Alice and Charlie
        Announced,      // qsdc: flip one bit of Alice's announced outcomes
        Digest,         // qsdc: flip one bit of the published digest
        Decoded         // qsdc: flip one bit of Bob's decoded message
    };
    Tamper tamper = Tamper::None;
};

struct TeleportRunResult {
    Transcript transcript;
    std::vector<std::pair<Amp, Amp>> inputs;
    std::vector<StateVector> recovered;
    std::vector<double> fidelities;
    double min_fidelity = 0.0;
    bool aborted = false;
    std::string abort_cause;

    std::size_t ka_size = 0, kb_size = 0;
    std::size_t ka_consumed_alice = 0, ka_consumed_charlie = 0;
    std::size_t kb_consumed_bob = 0, kb_consumed_charlie = 0;

    bool ok() const { return !aborted && min_fidelity >= 1.0 - NORM_TOL; }
};

struct QsdcRunResult {
    Transcript transcript;
    bool aborted = false;
    std::string abort_cause;
    CheckReport check;
    bool reached_verify = false;
    bool accepted = false;
    BitString decoded;
    Digest digest;
};

TeleportRunResult run_teleport(const RunConfig& config, const RunOptions& options = {});
QsdcRunResult run_qsdc(const RunConfig& config, const RunOptions& options = {});

// Re-derives the arbitrator's copies of K_a and K_b for a teleport config.
// Key establishment is deterministic in the seed, which is what lets the
// arbitrator audit evidence long after the run.
ArbitratorKeys derive_arbitrator_keys(const RunConfig& config);

// Protocol-dispatching adjudication entry point.
Verdict adjudicate(const Transcript& transcript, Claim claim, std::vector<std::string>* evidence = nullptr);

struct ReplayResult {
    bool identical = false;
    std::string detail;  // first divergence, or a summary when identical
};

// Re-runs the transcript's config and compares the regenerated transcript
// byte for byte with the original text.
ReplayResult replay_verify(const std::string& original_text);

// --- evidence-tampering utilities (dispute tests and demos) ---

// Replaces the payload bits of the send event `event_seq` with random bits
// of the same length and refreshes its logged payload digest, as a forger
// without the keys would.
void randomize_send_payload(Transcript& t, uint64_t event_seq, uint64_t seed);

// Seq of the teleport outcome-record send S_a (the second Alice->Charlie
// ciphertext), if present.
std::optional<uint64_t> find_outcome_record_send(const Transcript& t);

// Seq of the qsdc data-outcome announcement (the last Alice->Bob public
// bit string before the digest), if present.
std::optional<uint64_t> find_data_announcement_send(const Transcript& t);

// Removes the event with the given seq. Later events keep their seq, as
// they would in a log someone edited after the fact.
void erase_event(Transcript& t, uint64_t event_seq);

}  // namespace avowqc
