#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "avowqc/adversary.hpp"
#include "avowqc/crypto.hpp"
#include "avowqc/quantum.hpp"
#include "avowqc/rng.hpp"
#include "avowqc/transcript.hpp"

namespace avowqc {

enum class QsdcPhase {
    Init,
    HashAgreed,
    PairsSent,
    ChannelChecked,
    Encoded,
    AliceAnnounced,
    HashSent,
    Decoded,
    Verified,
    Rejected,
    Aborted
};

std::string to_string(QsdcPhase p);

// Result of the eavesdropping check: which pairs were sacrificed, the
// bases used, and both parties' outcomes at those positions.
struct CheckReport {
    std::vector<std::size_t> positions;  // ascending pair indices
    std::vector<Basis> bases;            // one per position
    BitString bob_bits;
    BitString alice_bits;
    std::size_t mismatches = 0;
};

// One direct-communication session: Alice holds an n-bit message, prepares
// l = 2n EPR pairs, sends Bob one half of each, sacrifices half of them to
// detect interception, encodes each message bit as I or X on her remaining
// halves, and signs the message with the agreed hash so Bob can verify
// what he decodes.
class QsdcSession {
public:
    // check_threshold: largest tolerated number of check-position
    // mismatches (0 = any mismatch aborts).
    QsdcSession(BitString message, uint64_t seed, int check_threshold, Transcript& transcript);

    // Charlie announces the hash function everyone will use. Returns its
    // registry id.
    int agree_hash();

    // Alice builds the pairs and transmits Bob's halves. Eve, if present,
    // touches each qubit while it crosses the channel.
    void distribute_pairs(Eve* eve = nullptr);

    // Bob picks half the pairs, both sides measure them in Bob's announced
    // bases, and the outcomes are compared in public. Aborts the session
    // if mismatches exceed the threshold.
    CheckReport channel_check();

    // Alice applies I (bit 0) or X (bit 1) to her half of each surviving
    // pair, in message order.
    void encode_message();

    // Alice measures her halves in Z and announces the outcomes a_k.
    BitString alice_measure_announce();

    // Alice publishes the digest of her message.
    Digest send_hash();

    // Bob measures his halves in Z and decodes m'_k = a_k xor b_k.
    BitString bob_decode(const BitString& announced);

    // Bob recomputes the digest of what he decoded and compares. Logs his
    // accept/reject verdict; returns true iff accepted.
    bool verify_signature(const BitString& decoded, const Digest& announced_digest);

    int n() const { return n_; }
    std::size_t pair_count() const { return 2 * static_cast<std::size_t>(n_); }
    QsdcPhase phase() const { return phase_; }
    const BitString& message() const { return message_; }
    const std::vector<std::size_t>& check_positions() const { return check_positions_; }
    const std::vector<std::size_t>& data_positions() const { return data_positions_; }
    const CheckReport& check_report() const { return report_; }

    QuantumRegister& pair_register(std::size_t j) { return *pairs_.at(j).reg; }
    QubitId qubit_alice(std::size_t j) const { return pairs_.at(j).a; }
    QubitId qubit_bob(std::size_t j) const { return pairs_.at(j).b; }

private:
    struct Pair {
        std::unique_ptr<QuantumRegister> reg;
        QubitId a, b;
    };

    void require_phase(QsdcPhase expected, const std::string& step);

    int n_;
    BitString message_;
    uint64_t seed_;
    int check_threshold_;
    Transcript& transcript_;
    CounterRng bob_rng_;
    QsdcPhase phase_ = QsdcPhase::Init;
    std::vector<Pair> pairs_;
    std::vector<std::size_t> check_positions_;
    std::vector<std::size_t> data_positions_;
    CheckReport report_;
};

// Decides whether Alice can deny having sent the message Bob accepted,
// using only the transcript: reconstructs M' from Alice's announced bits
// and Bob's logged data measurements, and compares its digest with the
// digest Alice published. BobDeniesReceiving is judged from the same
// evidence plus Bob's own logged verdict.
Verdict adjudicate_qsdc_dispute(const Transcript& transcript, Claim claim,
                                std::vector<std::string>* evidence = nullptr);

}  // namespace avowqc
