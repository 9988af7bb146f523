#include "avowqc/teleport.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "avowqc/errors.hpp"

namespace avowqc {

using nlohmann::json;

BitString ApplicationRecord::to_bits() const {
    BitString b;
    b.append_uint(static_cast<uint64_t>(sender), 2);
    b.append_uint(static_cast<uint64_t>(receiver), 2);
    b.append_uint(static_cast<uint64_t>(n), 16);
    b.append_uint(nonce, 64);
    return b;
}

ApplicationRecord ApplicationRecord::from_bits(const BitString& bits) {
    if (bits.size() != RECORD_BITS) {
        throw ParseError("application record must be " + std::to_string(RECORD_BITS) + " bits, got " +
                         std::to_string(bits.size()));
    }
    ApplicationRecord r;
    r.sender = static_cast<PartyId>(bits.read_uint(0, 2));
    r.receiver = static_cast<PartyId>(bits.read_uint(2, 2));
    r.n = static_cast<int>(bits.read_uint(4, 16));
    r.nonce = bits.read_uint(20, 64);
    return r;
}

std::string to_string(TeleportPhase p) {
    switch (p) {
        case TeleportPhase::Init: return "init";
        case TeleportPhase::Applied: return "applied";
        case TeleportPhase::ChannelBuilt: return "channel_built";
        case TeleportPhase::Corrected: return "corrected";
        case TeleportPhase::Measured: return "measured";
        case TeleportPhase::Relayed: return "relayed";
        case TeleportPhase::Recovered: return "recovered";
        case TeleportPhase::Done: return "done";
        case TeleportPhase::Aborted: return "aborted";
    }
    return "?";
}

TeleportSession::TeleportSession(std::vector<std::pair<Amp, Amp>> inputs, TeleportKeys keys, uint64_t seed,
                                 Transcript& transcript)
    : n_(static_cast<int>(inputs.size())),
      inputs_(std::move(inputs)),
      keys_(std::move(keys)),
      transcript_(transcript),
      alice_rng_(derive_seed(seed, "alice")) {
    if (n_ < 1) throw ProtocolError("teleport session requires at least one input state");
    if (keys_.alice_ka.remaining() < ka_bits_for(n_) || keys_.charlie_ka.remaining() < ka_bits_for(n_)) {
        throw KeyError("K_a too short: need " + std::to_string(ka_bits_for(n_)) + " bits");
    }
    if (keys_.bob_kb.remaining() < kb_bits_for(n_) || keys_.charlie_kb.remaining() < kb_bits_for(n_)) {
        throw KeyError("K_b too short: need " + std::to_string(kb_bits_for(n_)) + " bits");
    }
    rounds_.reserve(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        Round r;
        r.reg = std::make_unique<QuantumRegister>(5, derive_seed(seed, "teleport-reg", static_cast<uint64_t>(i)));
        r.u = r.reg->allocate_qubit();
        r.reg->prepare_single(r.u, inputs_[static_cast<std::size_t>(i)].first,
                              inputs_[static_cast<std::size_t>(i)].second);
        transcript_.log_apply(PartyId::Alice, "prepare", "state", "u", i);
        std::tie(r.ca, r.a) = r.reg->make_epr_pair();
        transcript_.log_apply(PartyId::Charlie, "setup", "epr", "CA-A", i);
        std::tie(r.cb, r.b) = r.reg->make_epr_pair();
        transcript_.log_apply(PartyId::Charlie, "setup", "epr", "CB-B", i);
        uint64_t sa = transcript_.log_send_qubit(PartyId::Charlie, PartyId::Alice, i, "A");
        transcript_.log_receive(PartyId::Alice, PartyId::Charlie, ChannelKind::Quantum, sa);
        uint64_t sb = transcript_.log_send_qubit(PartyId::Charlie, PartyId::Bob, i, "B");
        transcript_.log_receive(PartyId::Bob, PartyId::Charlie, ChannelKind::Quantum, sb);
        rounds_.push_back(std::move(r));
    }
}

void TeleportSession::require_phase(TeleportPhase expected, const std::string& step) {
    if (phase_ == expected) return;
    transcript_.log_abort(PartyId::Charlie, "phase_order",
                          json{{"step", step}, {"phase", to_string(phase_)}, {"expected", to_string(expected)}});
    throw ProtocolError("step '" + step + "' invoked in phase '" + to_string(phase_) + "' (expected '" +
                        to_string(expected) + "')");
}

Ciphertext TeleportSession::request_session() {
    require_phase(TeleportPhase::Init, "request_session");

    ApplicationRecord rec;
    rec.sender = PartyId::Alice;
    rec.receiver = PartyId::Bob;
    rec.n = n_;
    rec.nonce = alice_rng_.next_u64();
    session_id_ = rec.nonce;

    BitString record_bits = rec.to_bits();
    BitString tag_key = keys_.alice_ka.consume(TAG_KEY_BITS);
    BitString tag_input = record_bits;
    tag_input.append(tag_key);
    BitString plaintext = record_bits;
    plaintext.append(hash_digest(tag_input).bits);
    Ciphertext ct = otp_encrypt(keys_.alice_ka, plaintext);
    uint64_t seq =
        transcript_.log_send_ciphertext(PartyId::Alice, PartyId::Charlie, ChannelKind::ClassicalPrivate, ct, "ka");
    transcript_.log_receive(PartyId::Charlie, PartyId::Alice, ChannelKind::ClassicalPrivate, seq);

    // Charlie's identity check: decrypt with his K_a copy and verify the
    // keyed tag and the record fields.
    BitString tag_key_c = keys_.charlie_ka.consume(TAG_KEY_BITS);
    BitString pt = otp_decrypt(keys_.charlie_ka, ct);
    BitString got_record = pt.slice(0, RECORD_BITS);
    BitString got_tag = pt.slice(RECORD_BITS, 256);
    BitString check_input = got_record;
    check_input.append(tag_key_c);
    bool tag_ok = hash_digest(check_input).bits == got_tag;
    ApplicationRecord parsed = ApplicationRecord::from_bits(got_record);
    bool fields_ok = parsed.sender == PartyId::Alice && parsed.receiver == PartyId::Bob && parsed.n == n_;
    if (!tag_ok || !fields_ok) {
        phase_ = TeleportPhase::Aborted;
        transcript_.log_abort(PartyId::Charlie, "identity_check",
                              json{{"tag_ok", tag_ok}, {"fields_ok", fields_ok}});
        throw ProtocolAbort("identity_check");
    }
    phase_ = TeleportPhase::Applied;
    return ct;
}

std::vector<BellOutcome> TeleportSession::swap_entanglement() {
    require_phase(TeleportPhase::Applied, "swap_entanglement");
    swap_outcomes_.clear();
    for (int i = 0; i < n_; ++i) {
        Round& r = rounds_[static_cast<std::size_t>(i)];
        BellOutcome o = r.reg->measure_bell(r.ca, r.cb);
        transcript_.log_measure(PartyId::Charlie, "swap", i, "bell", to_string(o));
        swap_outcomes_.push_back(o);
    }
    Ciphertext ct = otp_encrypt(keys_.charlie_ka, encode_outcomes(swap_outcomes_));
    uint64_t seq = transcript_.log_send_ciphertext(PartyId::Charlie, PartyId::Alice, ChannelKind::ClassicalPrivate,
                                                   ct, "ka");
    transcript_.log_receive(PartyId::Alice, PartyId::Charlie, ChannelKind::ClassicalPrivate, seq);
    std::vector<BellOutcome> alice_view = decode_outcomes(otp_decrypt(keys_.alice_ka, ct));
    phase_ = TeleportPhase::ChannelBuilt;
    return alice_view;
}

void TeleportSession::correct_channel(const std::vector<BellOutcome>& outcomes) {
    require_phase(TeleportPhase::ChannelBuilt, "correct_channel");
    if (static_cast<int>(outcomes.size()) != n_) {
        throw ProtocolError("correct_channel needs one outcome per index, got " + std::to_string(outcomes.size()) +
                            " for n=" + std::to_string(n_));
    }
    for (int i = 0; i < n_; ++i) {
        Round& r = rounds_[static_cast<std::size_t>(i)];
        PauliOp op = correction_for(outcomes[static_cast<std::size_t>(i)]);
        r.reg->apply_pauli(op, r.a);
        transcript_.log_apply(PartyId::Alice, "correction", to_string(op), "A", i);
    }
    phase_ = TeleportPhase::Corrected;
}

Ciphertext TeleportSession::alice_measure_and_wrap() {
    require_phase(TeleportPhase::Corrected, "alice_measure_and_wrap");
    alice_outcomes_.clear();
    for (int i = 0; i < n_; ++i) {
        Round& r = rounds_[static_cast<std::size_t>(i)];
        BellOutcome o = r.reg->measure_bell(r.u, r.a);
        transcript_.log_measure(PartyId::Alice, "teleport", i, "bell", to_string(o));
        alice_outcomes_.push_back(o);
    }
    Ciphertext s_a = otp_encrypt(keys_.alice_ka, encode_outcomes(alice_outcomes_));
    uint64_t seq = transcript_.log_send_ciphertext(PartyId::Alice, PartyId::Charlie, ChannelKind::ClassicalPrivate,
                                                   s_a, "ka");
    transcript_.log_receive(PartyId::Charlie, PartyId::Alice, ChannelKind::ClassicalPrivate, seq);
    phase_ = TeleportPhase::Measured;
    return s_a;
}

Ciphertext TeleportSession::relay_reencrypt(const Ciphertext& s_a) {
    require_phase(TeleportPhase::Measured, "relay_reencrypt");
    if (s_a.bits.size() != 2 * static_cast<std::size_t>(n_) || s_a.bits.empty()) {
        throw ProtocolError("outcome record must be 2n=" + std::to_string(2 * n_) + " bits, got " +
                            std::to_string(s_a.bits.size()));
    }
    BitString record = otp_decrypt(keys_.charlie_ka, s_a);
    Ciphertext s_c = otp_encrypt(keys_.charlie_kb, record);
    uint64_t seq = transcript_.log_send_ciphertext(PartyId::Charlie, PartyId::Bob, ChannelKind::ClassicalPrivate,
                                                   s_c, "kb");
    transcript_.log_receive(PartyId::Bob, PartyId::Charlie, ChannelKind::ClassicalPrivate, seq);
    phase_ = TeleportPhase::Relayed;
    return s_c;
}

std::vector<BellOutcome> TeleportSession::bob_decrypt_record(const Ciphertext& s_c) {
    require_phase(TeleportPhase::Relayed, "bob_decrypt_record");
    if (s_c.bits.size() != 2 * static_cast<std::size_t>(n_)) {
        throw ProtocolError("relayed record must be 2n=" + std::to_string(2 * n_) + " bits, got " +
                            std::to_string(s_c.bits.size()));
    }
    return decode_outcomes(otp_decrypt(keys_.bob_kb, s_c));
}

std::vector<StateVector> TeleportSession::bob_recover(const std::vector<BellOutcome>& record) {
    require_phase(TeleportPhase::Relayed, "bob_recover");
    if (static_cast<int>(record.size()) != n_) {
        throw ProtocolError("bob_recover needs one outcome per index, got " + std::to_string(record.size()) +
                            " for n=" + std::to_string(n_));
    }
    phase_ = TeleportPhase::Recovered;
    std::vector<StateVector> out;
    out.reserve(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        Round& r = rounds_[static_cast<std::size_t>(i)];
        PauliOp op = correction_for(record[static_cast<std::size_t>(i)]);
        r.reg->apply_pauli(op, r.b);
        transcript_.log_apply(PartyId::Bob, "recovery", to_string(op), "B", i);
        out.push_back(r.reg->extract_pure_state({r.b}));
    }
    phase_ = TeleportPhase::Done;
    return out;
}

namespace {

// A ciphertext send pulled out of the event log.
struct CtRecord {
    uint64_t seq = 0;
    BitString bits;
    std::size_t key_offset = 0;
    std::string key_pair;
    std::string payload_hash;
};

std::optional<CtRecord> ciphertext_of(const TraceEvent& e) {
    if (e.kind != EventKind::Send) return std::nullopt;
    if (!e.details.contains("payload")) return std::nullopt;
    const json& p = e.details.at("payload");
    if (p.value("type", "") != "ciphertext") return std::nullopt;
    CtRecord r;
    r.seq = e.seq;
    std::size_t len = p.at("len").get<std::size_t>();
    BitString all = BitString::from_hex(p.at("hex").get<std::string>());
    if (all.size() < len) throw ParseError("ciphertext hex shorter than declared length in event " +
                                           std::to_string(e.seq));
    r.bits = all.slice(0, len);
    r.key_offset = p.at("key_offset").get<std::size_t>();
    r.key_pair = p.value("key_pair", "");
    r.payload_hash = e.details.value("payload_hash", "");
    return r;
}

}  // namespace

Verdict adjudicate_teleport_dispute(const Transcript& t, Claim claim, const ArbitratorKeys& keys,
                                    std::vector<std::string>* evidence) {
    auto note = [&](const std::string& s) {
        if (evidence) evidence->push_back(s);
    };

    if (t.protocol() != "teleport") {
        note("transcript protocol is '" + t.protocol() + "', not a teleport run");
        return Verdict::Inconclusive;
    }
    int n = 0;
    if (t.config().contains("n")) n = t.config().at("n").get<int>();
    if (n < 1) {
        note("config carries no usable session size");
        return Verdict::Inconclusive;
    }
    const std::size_t record_len = 2 * static_cast<std::size_t>(n);

    std::vector<CtRecord> alice_to_charlie, charlie_to_bob;
    std::set<uint64_t> received_seqs;
    int swap_measures = 0;
    int bob_recoveries = 0;
    bool aborted = false;
    for (const TraceEvent& e : t.events()) {
        if (e.kind == EventKind::Abort) aborted = true;
        if (e.kind == EventKind::Receive) received_seqs.insert(e.details.at("ref_seq").get<uint64_t>());
        if (e.kind == EventKind::Measure && e.actor == PartyId::Charlie && e.details.value("role", "") == "swap") {
            ++swap_measures;
        }
        if (e.kind == EventKind::Apply && e.actor == PartyId::Bob && e.details.value("role", "") == "recovery") {
            ++bob_recoveries;
        }
        if (auto ct = ciphertext_of(e)) {
            PartyId from = party_from_string(e.details.at("from").get<std::string>());
            PartyId to = party_from_string(e.details.at("to").get<std::string>());
            if (from == PartyId::Alice && to == PartyId::Charlie) alice_to_charlie.push_back(std::move(*ct));
            if (from == PartyId::Charlie && to == PartyId::Bob) charlie_to_bob.push_back(std::move(*ct));
        }
    }

    // Completeness: the run must have reached Bob's recovery with no abort
    // on record. Anything less cannot support a verdict either way.
    const bool complete = !aborted && swap_measures == n && bob_recoveries == n && !alice_to_charlie.empty() &&
                          charlie_to_bob.size() == 1 && received_seqs.count(charlie_to_bob.front().seq) > 0;
    if (!complete) {
        note("transcript incomplete (aborted=" + std::string(aborted ? "yes" : "no") +
             ", swap measurements=" + std::to_string(swap_measures) + "/" + std::to_string(n) +
             ", recovery operations=" + std::to_string(bob_recoveries) + "/" + std::to_string(n) +
             ", relayed records=" + std::to_string(charlie_to_bob.size()) + ")");
        return Verdict::Inconclusive;
    }

    // The first Alice->Charlie ciphertext is the session application; the
    // second is the signed outcome record S_a.
    if (alice_to_charlie.size() < 2) {
        note("no outcome record signed under the Alice-Charlie key appears in the transcript");
        return Verdict::NotGuilty;
    }
    const CtRecord& app = alice_to_charlie[0];
    const CtRecord& sa = alice_to_charlie[1];
    const CtRecord& sc = charlie_to_bob.front();

    const std::size_t sa_offset = APPLICATION_OVERHEAD_BITS + record_len;
    if (keys.ka_bits.size() < sa_offset + record_len || keys.kb_bits.size() < record_len) {
        note("arbitrator key material shorter than the claimed consumption layout");
        return Verdict::Inconclusive;
    }

    // Framing checks: each logged ciphertext must sit at its canonical key
    // offset with the canonical length, and its logged payload digest must
    // match its payload. A transcript that violates these was edited.
    auto framing_ok = [&](const CtRecord& c, std::size_t offset, std::size_t len, const std::string& name) {
        if (c.key_offset != offset || c.bits.size() != len) {
            note(name + " framing inconsistent: offset " + std::to_string(c.key_offset) + " (expected " +
                 std::to_string(offset) + "), length " + std::to_string(c.bits.size()) + " (expected " +
                 std::to_string(len) + ")");
            return false;
        }
        if (hash_digest(c.bits).to_hex() != c.payload_hash) {
            note(name + " payload digest does not match its logged payload");
            return false;
        }
        return true;
    };
    if (!framing_ok(app, TAG_KEY_BITS, APPLICATION_PLAINTEXT_BITS, "session application") ||
        !framing_ok(sa, sa_offset, record_len, "outcome record S_a") ||
        !framing_ok(sc, 0, record_len, "relayed record S_c")) {
        return Verdict::Forgery;
    }

    // The application must carry a valid keyed tag under the real K_a; a
    // random substitute key has a 2^-256 chance of passing.
    BitString app_pt = app.bits ^ keys.ka_bits.slice(TAG_KEY_BITS, APPLICATION_PLAINTEXT_BITS);
    BitString app_record = app_pt.slice(0, RECORD_BITS);
    BitString tag_input = app_record;
    tag_input.append(keys.ka_bits.slice(0, TAG_KEY_BITS));
    if (hash_digest(tag_input).bits != app_pt.slice(RECORD_BITS, 256)) {
        note("session application does not authenticate under the arbitrated Alice-Charlie key");
        return Verdict::Forgery;
    }
    ApplicationRecord parsed = ApplicationRecord::from_bits(app_record);
    if (parsed.n != n) {
        note("authenticated application requests n=" + std::to_string(parsed.n) + " but the transcript carries n=" +
             std::to_string(n));
        return Verdict::Forgery;
    }
    note("session application authenticates under the arbitrated Alice-Charlie key (n=" + std::to_string(parsed.n) +
         ")");

    // Cross-decryption: S_a under K_a and S_c under K_b must reveal the
    // same outcome record. A forged S_a decrypts to an unrelated record
    // except with probability 4^-n.
    BitString r1 = sa.bits ^ keys.ka_bits.slice(sa_offset, record_len);
    BitString r2 = sc.bits ^ keys.kb_bits.slice(0, record_len);
    if (r1 == r2) {
        note("S_a decrypted under the Alice-Charlie key equals S_c decrypted under the Charlie-Bob key (" +
             r1.to_string() + ")");
        if (claim == Claim::AliceDeniesSending) {
            note("the matching record is signed by Alice's exclusive key: denial of sending refuted");
        } else {
            note("Bob holds the only non-arbitrator copy of the relay key and logged " + std::to_string(n) +
                 " recovery operations: denial of receiving refuted");
        }
        return Verdict::Guilty;
    }
    note("records disagree in " + std::to_string(r1.hamming_distance(r2)) +
         " of " + std::to_string(record_len) + " bits: the logged evidence was not produced with the arbitrated keys");
    return Verdict::Forgery;
}

}  // namespace avowqc
