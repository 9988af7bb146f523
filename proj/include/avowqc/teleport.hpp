#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "avowqc/crypto.hpp"
#include "avowqc/quantum.hpp"
#include "avowqc/rng.hpp"
#include "avowqc/transcript.hpp"

namespace avowqc {

// Fixed-format application record Alice sends to open a session:
// sender(2) | receiver(2) | n(16) | nonce(64), 84 bits total.
struct ApplicationRecord {
    PartyId sender = PartyId::Alice;
    PartyId receiver = PartyId::Bob;
    int n = 0;
    uint64_t nonce = 0;

    BitString to_bits() const;
    static ApplicationRecord from_bits(const BitString& bits);
};

inline constexpr std::size_t RECORD_BITS = 84;
inline constexpr std::size_t TAG_KEY_BITS = 128;
// Plaintext of the application message: record || tag(record || tag key).
inline constexpr std::size_t APPLICATION_PLAINTEXT_BITS = RECORD_BITS + 256;
// Total K_a bits the application consumes: tag key + one-time pad.
inline constexpr std::size_t APPLICATION_OVERHEAD_BITS = TAG_KEY_BITS + APPLICATION_PLAINTEXT_BITS;

// K_a must cover the application, the swap-outcome message (2n) and S_a
// (2n); K_b only the relayed record (2n).
inline constexpr std::size_t ka_bits_for(std::size_t n) { return APPLICATION_OVERHEAD_BITS + 4 * n; }
inline constexpr std::size_t kb_bits_for(std::size_t n) { return 2 * n; }

enum class TeleportPhase { Init, Applied, ChannelBuilt, Corrected, Measured, Relayed, Recovered, Done, Aborted };

std::string to_string(TeleportPhase p);

// Key copies held by each end. Alice and Charlie hold K_a; Bob and Charlie
// hold K_b. Consumption advances independently per copy but stays in
// lockstep in an honest run.
struct TeleportKeys {
    Key alice_ka;
    Key charlie_ka;
    Key charlie_kb;
    Key bob_kb;
};

// One arbitrated teleportation session: Alice teleports n single-qubit
// states to Bob through EPR pairs she and Bob each share with Charlie.
// Each indexed state lives in its own 5-qubit register (u, C_A, A, C_B, B);
// phases advance strictly in protocol order and every message lands in the
// transcript.
class TeleportSession {
public:
    TeleportSession(std::vector<std::pair<Amp, Amp>> inputs, TeleportKeys keys, uint64_t seed,
                    Transcript& transcript);

    // Alice applies for the session; Charlie decrypts and checks the tag
    // to prove her identity. Throws ProtocolAbort on an identity failure.
    Ciphertext request_session();

    // Charlie Bell-measures each (C_A, C_B), turning the two arbitrated
    // pairs into one Alice-Bob pair per index, and sends the outcomes to
    // Alice under K_a. Returns Alice's decrypted copy.
    std::vector<BellOutcome> swap_entanglement();

    // Alice applies {PhiPlus->I, PhiMinus->Z, PsiPlus->X, PsiMinus->iY} to
    // her half so every AB pair becomes |phi+>.
    void correct_channel(const std::vector<BellOutcome>& outcomes);

    // Alice Bell-measures each (u, A), wraps the outcome record under K_a
    // and sends it to Charlie as S_a.
    Ciphertext alice_measure_and_wrap();

    // Charlie decrypts S_a with K_a and re-encrypts the record under K_b
    // as S_c for Bob.
    Ciphertext relay_reencrypt(const Ciphertext& s_a);

    // Bob's local decryption of S_c.
    std::vector<BellOutcome> bob_decrypt_record(const Ciphertext& s_c);

    // Bob applies the per-outcome correction to his half and reads the
    // recovered states out of the registers.
    std::vector<StateVector> bob_recover(const std::vector<BellOutcome>& record);

    int n() const { return n_; }
    TeleportPhase phase() const { return phase_; }
    uint64_t session_id() const { return session_id_; }
    const std::vector<std::pair<Amp, Amp>>& inputs() const { return inputs_; }
    const std::vector<BellOutcome>& charlie_swap_outcomes() const { return swap_outcomes_; }
    const std::vector<BellOutcome>& alice_outcomes() const { return alice_outcomes_; }

    const Key& alice_ka() const { return keys_.alice_ka; }
    const Key& charlie_ka() const { return keys_.charlie_ka; }
    const Key& charlie_kb() const { return keys_.charlie_kb; }
    const Key& bob_kb() const { return keys_.bob_kb; }

    // White-box access for verification: the register and qubit handles of
    // one indexed round.
    QuantumRegister& round_register(int i) { return *rounds_.at(static_cast<std::size_t>(i)).reg; }
    QubitId qubit_u(int i) const { return rounds_.at(static_cast<std::size_t>(i)).u; }
    QubitId qubit_a(int i) const { return rounds_.at(static_cast<std::size_t>(i)).a; }
    QubitId qubit_b(int i) const { return rounds_.at(static_cast<std::size_t>(i)).b; }

private:
    struct Round {
        std::unique_ptr<QuantumRegister> reg;
        QubitId u, ca, a, cb, b;
    };

    void require_phase(TeleportPhase expected, const std::string& step);

    int n_;
    std::vector<std::pair<Amp, Amp>> inputs_;
    TeleportKeys keys_;
    Transcript& transcript_;
    CounterRng alice_rng_;
    TeleportPhase phase_ = TeleportPhase::Init;
    uint64_t session_id_ = 0;
    std::vector<Round> rounds_;
    std::vector<BellOutcome> swap_outcomes_;
    std::vector<BellOutcome> alice_outcomes_;
};

// Arbitrator's key material for dispute resolution: Charlie's copies of
// the K_a / K_b bit streams.
struct ArbitratorKeys {
    BitString ka_bits;
    BitString kb_bits;
};

// Decides a teleport dispute purely from the transcript and the
// arbitrator's keys. Guilty means the denial is refuted by the evidence;
// Forgery means the logged ciphertexts do not decrypt consistently under
// the real keys; NotGuilty means the claimed message never appears;
// Inconclusive means the transcript never reached completion.
Verdict adjudicate_teleport_dispute(const Transcript& transcript, Claim claim, const ArbitratorKeys& keys,
                                    std::vector<std::string>* evidence = nullptr);

}  // namespace avowqc
