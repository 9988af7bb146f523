#include "avowqc/qsdc.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>

#include "avowqc/errors.hpp"

namespace avowqc {

using nlohmann::json;

std::string to_string(QsdcPhase p) {
    switch (p) {
        case QsdcPhase::Init: return "init";
        case QsdcPhase::HashAgreed: return "hash_agreed";
        case QsdcPhase::PairsSent: return "pairs_sent";
        case QsdcPhase::ChannelChecked: return "channel_checked";
        case QsdcPhase::Encoded: return "encoded";
        case QsdcPhase::AliceAnnounced: return "alice_announced";
        case QsdcPhase::HashSent: return "hash_sent";
        case QsdcPhase::Decoded: return "decoded";
        case QsdcPhase::Verified: return "verified";
        case QsdcPhase::Rejected: return "rejected";
        case QsdcPhase::Aborted: return "aborted";
    }
    return "?";
}

QsdcSession::QsdcSession(BitString message, uint64_t seed, int check_threshold, Transcript& transcript)
    : n_(static_cast<int>(message.size())),
      message_(std::move(message)),
      seed_(seed),
      check_threshold_(check_threshold),
      transcript_(transcript),
      bob_rng_(derive_seed(seed, "bob")) {
    if (check_threshold_ < 0) throw ProtocolError("check threshold must be non-negative");
}

void QsdcSession::require_phase(QsdcPhase expected, const std::string& step) {
    if (phase_ == expected) return;
    transcript_.log_abort(PartyId::Charlie, "phase_order",
                          json{{"step", step}, {"phase", to_string(phase_)}, {"expected", to_string(expected)}});
    throw ProtocolError("step '" + step + "' invoked in phase '" + to_string(phase_) + "' (expected '" +
                        to_string(expected) + "')");
}

int QsdcSession::agree_hash() {
    require_phase(QsdcPhase::Init, "agree_hash");
    BitString id_bits;
    id_bits.append_uint(HASH_FUNCTION_SHA256_FRAMED, 8);
    uint64_t s1 = transcript_.log_send_bits(PartyId::Charlie, PartyId::Alice, ChannelKind::ClassicalPublic, id_bits);
    transcript_.log_receive(PartyId::Alice, PartyId::Charlie, ChannelKind::ClassicalPublic, s1);
    uint64_t s2 = transcript_.log_send_bits(PartyId::Charlie, PartyId::Bob, ChannelKind::ClassicalPublic, id_bits);
    transcript_.log_receive(PartyId::Bob, PartyId::Charlie, ChannelKind::ClassicalPublic, s2);
    phase_ = QsdcPhase::HashAgreed;
    return HASH_FUNCTION_SHA256_FRAMED;
}

void QsdcSession::distribute_pairs(Eve* eve) {
    require_phase(QsdcPhase::HashAgreed, "distribute_pairs");
    const std::size_t l = pair_count();
    pairs_.reserve(l);
    for (std::size_t j = 0; j < l; ++j) {
        Pair p;
        p.reg = std::make_unique<QuantumRegister>(2, derive_seed(seed_, "qsdc-pair", j));
        std::tie(p.a, p.b) = p.reg->make_epr_pair();
        transcript_.log_apply(PartyId::Alice, "setup", "epr", "pair", static_cast<int>(j));
        uint64_t seq = transcript_.log_send_qubit(PartyId::Alice, PartyId::Bob, static_cast<int>(j), "B");
        if (eve != nullptr) eve->attack_in_transit(*p.reg, p.b);
        transcript_.log_receive(PartyId::Bob, PartyId::Alice, ChannelKind::Quantum, seq);
        pairs_.push_back(std::move(p));
    }
    phase_ = QsdcPhase::PairsSent;
}

CheckReport QsdcSession::channel_check() {
    require_phase(QsdcPhase::PairsSent, "channel_check");
    const std::size_t l = pair_count();
    const std::size_t c = l - static_cast<std::size_t>(n_);

    // Bob draws c distinct positions (partial Fisher-Yates), then one
    // basis per position in ascending position order.
    std::vector<std::size_t> idx(l);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t pick = k + static_cast<std::size_t>(bob_rng_.next_below(l - k));
        std::swap(idx[k], idx[pick]);
    }
    check_positions_.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(c));
    std::sort(check_positions_.begin(), check_positions_.end());
    data_positions_.clear();
    {
        std::vector<char> is_check(l, 0);
        for (std::size_t j : check_positions_) is_check[j] = 1;
        for (std::size_t j = 0; j < l; ++j) {
            if (!is_check[j]) data_positions_.push_back(j);
        }
    }

    report_ = CheckReport{};
    report_.positions = check_positions_;
    for (std::size_t k = 0; k < c; ++k) report_.bases.push_back(bob_rng_.next_bit() ? Basis::X : Basis::Z);

    // Bob measures his halves first, then announces positions and bases.
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t j = check_positions_[k];
        Basis basis = report_.bases[k];
        Pair& p = pairs_[j];
        int b = basis == Basis::Z ? p.reg->measure_z(p.b) : p.reg->measure_x(p.b);
        transcript_.log_measure(PartyId::Bob, "check", static_cast<int>(j), to_string(basis), b);
        report_.bob_bits.push_back(b);
    }
    BitString announcement(l, 0);
    for (std::size_t j : check_positions_) announcement.set_bit(j, 1);
    for (Basis basis : report_.bases) announcement.push_back(basis == Basis::X ? 1 : 0);
    uint64_t s1 = transcript_.log_send_bits(PartyId::Bob, PartyId::Alice, ChannelKind::ClassicalPublic, announcement);
    transcript_.log_receive(PartyId::Alice, PartyId::Bob, ChannelKind::ClassicalPublic, s1);

    // Alice measures the same positions in the same bases and both sides
    // publish their outcomes.
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t j = check_positions_[k];
        Basis basis = report_.bases[k];
        Pair& p = pairs_[j];
        int a = basis == Basis::Z ? p.reg->measure_z(p.a) : p.reg->measure_x(p.a);
        transcript_.log_measure(PartyId::Alice, "check", static_cast<int>(j), to_string(basis), a);
        report_.alice_bits.push_back(a);
    }
    uint64_t s2 =
        transcript_.log_send_bits(PartyId::Alice, PartyId::Bob, ChannelKind::ClassicalPublic, report_.alice_bits);
    transcript_.log_receive(PartyId::Bob, PartyId::Alice, ChannelKind::ClassicalPublic, s2);
    uint64_t s3 =
        transcript_.log_send_bits(PartyId::Bob, PartyId::Alice, ChannelKind::ClassicalPublic, report_.bob_bits);
    transcript_.log_receive(PartyId::Alice, PartyId::Bob, ChannelKind::ClassicalPublic, s3);

    report_.mismatches = report_.alice_bits.hamming_distance(report_.bob_bits);
    if (report_.mismatches > static_cast<std::size_t>(check_threshold_)) {
        phase_ = QsdcPhase::Aborted;
        transcript_.log_abort(PartyId::Bob, "channel_check",
                              json{{"mismatches", report_.mismatches},
                                   {"threshold", check_threshold_},
                                   {"positions", c}});
        throw ProtocolAbort("channel_check");
    }
    phase_ = QsdcPhase::ChannelChecked;
    return report_;
}

void QsdcSession::encode_message() {
    require_phase(QsdcPhase::ChannelChecked, "encode_message");
    for (int k = 0; k < n_; ++k) {
        std::size_t j = data_positions_[static_cast<std::size_t>(k)];
        Pair& p = pairs_[j];
        PauliOp op = message_.bit(static_cast<std::size_t>(k)) ? PauliOp::X : PauliOp::I;
        p.reg->apply_pauli(op, p.a);
        transcript_.log_apply(PartyId::Alice, "encode", to_string(op), "A", static_cast<int>(j));
    }
    phase_ = QsdcPhase::Encoded;
}

BitString QsdcSession::alice_measure_announce() {
    require_phase(QsdcPhase::Encoded, "alice_measure_announce");
    BitString announced;
    for (int k = 0; k < n_; ++k) {
        std::size_t j = data_positions_[static_cast<std::size_t>(k)];
        Pair& p = pairs_[j];
        int a = p.reg->measure_z(p.a);
        transcript_.log_measure(PartyId::Alice, "data", static_cast<int>(j), "z", a);
        announced.push_back(a);
    }
    uint64_t seq = transcript_.log_send_bits(PartyId::Alice, PartyId::Bob, ChannelKind::ClassicalPublic, announced);
    transcript_.log_receive(PartyId::Bob, PartyId::Alice, ChannelKind::ClassicalPublic, seq);
    phase_ = QsdcPhase::AliceAnnounced;
    return announced;
}

Digest QsdcSession::send_hash() {
    require_phase(QsdcPhase::AliceAnnounced, "send_hash");
    Digest d = hash_digest(message_);
    uint64_t seq = transcript_.log_send_digest(PartyId::Alice, PartyId::Bob, d);
    transcript_.log_receive(PartyId::Bob, PartyId::Alice, ChannelKind::ClassicalPublic, seq);
    phase_ = QsdcPhase::HashSent;
    return d;
}

BitString QsdcSession::bob_decode(const BitString& announced) {
    require_phase(QsdcPhase::HashSent, "bob_decode");
    if (announced.size() != static_cast<std::size_t>(n_)) {
        throw ProtocolError("announced outcomes must be n=" + std::to_string(n_) + " bits, got " +
                            std::to_string(announced.size()));
    }
    BitString decoded;
    for (int k = 0; k < n_; ++k) {
        std::size_t j = data_positions_[static_cast<std::size_t>(k)];
        Pair& p = pairs_[j];
        int b = p.reg->measure_z(p.b);
        transcript_.log_measure(PartyId::Bob, "data", static_cast<int>(j), "z", b);
        decoded.push_back(announced.bit(static_cast<std::size_t>(k)) ^ b);
    }
    phase_ = QsdcPhase::Decoded;
    return decoded;
}

bool QsdcSession::verify_signature(const BitString& decoded, const Digest& announced_digest) {
    require_phase(QsdcPhase::Decoded, "verify_signature");
    bool accept = hash_digest(decoded) == announced_digest;
    transcript_.log_verdict(PartyId::Bob, json{{"type", "signature"}, {"result", accept ? "accept" : "reject"}});
    phase_ = accept ? QsdcPhase::Verified : QsdcPhase::Rejected;
    return accept;
}

namespace {

std::optional<BitString> bits_of(const TraceEvent& e) {
    if (e.kind != EventKind::Send || !e.details.contains("payload")) return std::nullopt;
    const json& p = e.details.at("payload");
    if (p.value("type", "") != "bits") return std::nullopt;
    std::size_t len = p.at("len").get<std::size_t>();
    BitString all = BitString::from_hex(p.at("hex").get<std::string>());
    if (all.size() < len) throw ParseError("bit payload shorter than declared length in event " +
                                           std::to_string(e.seq));
    return all.slice(0, len);
}

}  // namespace

Verdict adjudicate_qsdc_dispute(const Transcript& t, Claim claim, std::vector<std::string>* evidence) {
    auto note = [&](const std::string& s) {
        if (evidence) evidence->push_back(s);
    };

    if (t.protocol() != "qsdc") {
        note("transcript protocol is '" + t.protocol() + "', not a direct-communication run");
        return Verdict::Inconclusive;
    }

    std::optional<int> hash_id;
    std::optional<std::string> verdict_result;
    std::optional<std::string> digest_hex;
    uint64_t digest_seq = 0;
    std::vector<std::pair<uint64_t, BitString>> alice_public_bits;  // (seq, bits)
    std::map<int, int> bob_data_bits;                               // pair index -> outcome

    for (const TraceEvent& e : t.events()) {
        if (e.kind == EventKind::Send && e.details.contains("payload")) {
            const json& p = e.details.at("payload");
            PartyId from = party_from_string(e.details.at("from").get<std::string>());
            PartyId to = party_from_string(e.details.at("to").get<std::string>());
            if (p.value("type", "") == "digest" && from == PartyId::Alice && to == PartyId::Bob && !digest_hex) {
                digest_hex = p.at("hex").get<std::string>();
                digest_seq = e.seq;
            }
            if (from == PartyId::Charlie && !hash_id) {
                if (auto b = bits_of(e); b && b->size() == 8) hash_id = static_cast<int>(b->read_uint(0, 8));
            }
            if (from == PartyId::Alice && to == PartyId::Bob) {
                if (auto b = bits_of(e)) alice_public_bits.emplace_back(e.seq, std::move(*b));
            }
        }
        if (e.kind == EventKind::Measure && e.actor == PartyId::Bob && e.details.value("role", "") == "data") {
            bob_data_bits[e.details.at("index").get<int>()] = e.details.at("outcome").get<int>();
        }
        if (e.kind == EventKind::Verdict && e.actor == PartyId::Bob &&
            e.details.value("type", "") == "signature") {
            verdict_result = e.details.at("result").get<std::string>();
        }
    }

    if (!verdict_result) {
        note("the run never reached Bob's verification step");
        return Verdict::Inconclusive;
    }
    if (*verdict_result == "reject") {
        note("Bob rejected the signature in this run; no accepted message exists to dispute");
        return Verdict::Inconclusive;
    }
    if (!hash_id || *hash_id != HASH_FUNCTION_SHA256_FRAMED) {
        note("the logged hash-function agreement is missing or names an unknown function");
        return Verdict::Inconclusive;
    }
    if (!digest_hex) {
        note("Alice never published a message digest: nothing binds her to the decoded message");
        return Verdict::NotGuilty;
    }

    // The announcement of Alice's data outcomes is the last public bit
    // string she sent Bob before publishing the digest.
    std::optional<BitString> announced;
    for (const auto& [seq, bits] : alice_public_bits) {
        if (seq < digest_seq) announced = bits;
    }
    if (!announced) {
        note("no announced data outcomes precede the digest: the decode cannot be reconstructed");
        return Verdict::Inconclusive;
    }
    if (bob_data_bits.size() != announced->size()) {
        note("Bob logged " + std::to_string(bob_data_bits.size()) + " data measurements but Alice announced " +
             std::to_string(announced->size()) + " outcomes: the decode cannot be reconstructed");
        return Verdict::Inconclusive;
    }

    // Reconstruct M' exactly as Bob computed it: announced bit xor his
    // logged outcome, in ascending pair order.
    BitString reconstructed;
    std::size_t k = 0;
    for (const auto& [index, outcome] : bob_data_bits) {
        reconstructed.push_back(announced->bit(k) ^ outcome);
        ++k;
    }
    Digest recomputed = hash_digest(reconstructed);
    note("reconstructed decoded message " + reconstructed.to_string() + " with digest " + recomputed.to_hex());
    note("digest Alice published: " + *digest_hex);

    if (recomputed.to_hex() == *digest_hex) {
        if (claim == Claim::AliceDeniesSending) {
            note("the published digest matches the decoded message and only the sender could arrange that: "
                 "denial of sending refuted");
        } else {
            note("Bob's own logged verdict accepts this message and the digest matches: denial of receiving refuted");
        }
        return Verdict::Guilty;
    }
    note("the digest does not match the decoded message even though the logged verdict accepts it: "
         "the evidence was altered after the fact");
    return Verdict::Forgery;
}

}  // namespace avowqc
