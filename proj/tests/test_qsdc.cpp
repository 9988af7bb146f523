#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "avowqc/errors.hpp"
#include "avowqc/qsdc.hpp"
#include "avowqc/runner.hpp"
#include "avowqc/transcript.hpp"

using namespace avowqc;
using nlohmann::json;

namespace {

struct HonestQsdc {
    Transcript transcript{"run-q", 0, "qsdc", json::object()};
    BitString announced;
    BitString decoded;
    Digest digest;
    bool accepted = false;
};

HonestQsdc honest_qsdc(const std::string& message_bits, uint64_t seed) {
    HonestQsdc out;
    out.transcript = Transcript("run-q", seed, "qsdc", json::object());
    QsdcSession s(BitString::from_string(message_bits), seed, 0, out.transcript);
    s.agree_hash();
    s.distribute_pairs();
    s.channel_check();
    s.encode_message();
    out.announced = s.alice_measure_announce();
    out.digest = s.send_hash();
    out.decoded = s.bob_decode(out.announced);
    out.accepted = s.verify_signature(out.decoded, out.digest);
    return out;
}

uint64_t digest_send_seq(const Transcript& t) {
    for (const TraceEvent& e : t.events()) {
        if (e.kind == EventKind::Send && e.details.contains("payload") &&
            e.details.at("payload").value("type", "") == "digest")
            return e.seq;
    }
    REQUIRE(false);
    return 0;
}

uint64_t verdict_seq(const Transcript& t) {
    for (const TraceEvent& e : t.events())
        if (e.kind == EventKind::Verdict) return e.seq;
    REQUIRE(false);
    return 0;
}

}  // namespace

TEST_CASE("session construction checks its arguments") {
    Transcript t("x", 1, "qsdc", json::object());
    CHECK_THROWS_AS(QsdcSession(BitString::from_string("101"), 1, -1, t), ProtocolError);
    QsdcSession s(BitString::from_string("10100111"), 1, 0, t);
    CHECK(s.n() == 8);
    CHECK(s.pair_count() == 16);
    CHECK(s.phase() == QsdcPhase::Init);
    CHECK(s.message() == BitString::from_string("10100111"));
}

TEST_CASE("an honest session delivers and authenticates the message") {
    Transcript t("run-h", 601, "qsdc", json::object());
    BitString msg = BitString::from_string("10100111");
    QsdcSession s(msg, 601, 0, t);

    CHECK(s.agree_hash() == HASH_FUNCTION_SHA256_FRAMED);
    CHECK(s.phase() == QsdcPhase::HashAgreed);

    s.distribute_pairs();
    CHECK(s.phase() == QsdcPhase::PairsSent);

    CheckReport report = s.channel_check();
    CHECK(s.phase() == QsdcPhase::ChannelChecked);
    CHECK(report.mismatches == 0);
    CHECK(report.positions.size() == 8);  // half of the 16 pairs
    CHECK(report.bases.size() == 8);
    CHECK(report.bob_bits.size() == 8);
    CHECK(report.alice_bits.size() == 8);
    CHECK(report.alice_bits == report.bob_bits);  // undisturbed EPR halves agree

    s.encode_message();
    CHECK(s.phase() == QsdcPhase::Encoded);

    BitString announced = s.alice_measure_announce();
    CHECK(s.phase() == QsdcPhase::AliceAnnounced);
    CHECK(announced.size() == 8);

    Digest d = s.send_hash();
    CHECK(s.phase() == QsdcPhase::HashSent);
    CHECK(d == hash_digest(msg));

    BitString decoded = s.bob_decode(announced);
    CHECK(s.phase() == QsdcPhase::Decoded);
    CHECK(decoded == msg);

    CHECK(s.verify_signature(decoded, d));
    CHECK(s.phase() == QsdcPhase::Verified);
    const TraceEvent& v = t.events().back();
    CHECK(v.kind == EventKind::Verdict);
    CHECK(v.details.at("result") == "accept");
}

TEST_CASE("check and data positions partition the pairs") {
    Transcript t("run-p", 602, "qsdc", json::object());
    QsdcSession s(BitString::from_string("110010"), 602, 0, t);
    s.agree_hash();
    s.distribute_pairs();
    s.channel_check();

    const auto& check = s.check_positions();
    const auto& data = s.data_positions();
    CHECK(check.size() == 6);
    CHECK(data.size() == 6);
    CHECK(std::is_sorted(check.begin(), check.end()));
    CHECK(std::is_sorted(data.begin(), data.end()));
    std::set<std::size_t> all(check.begin(), check.end());
    all.insert(data.begin(), data.end());
    CHECK(all.size() == 12);
    CHECK(*all.rbegin() == 11);  // exactly the indices 0..l-1
}

TEST_CASE("different seeds move the sacrificed positions") {
    auto positions = [](uint64_t seed) {
        Transcript t("run", seed, "qsdc", json::object());
        QsdcSession s(BitString::from_string("11001010"), seed, 0, t);
        s.agree_hash();
        s.distribute_pairs();
        s.channel_check();
        return s.check_positions();
    };
    CHECK(positions(603) == positions(603));
    bool moved = false;
    for (uint64_t s = 0; s < 10 && !moved; ++s) moved = positions(700 + s) != positions(800 + s);
    CHECK(moved);
}

TEST_CASE("encoding turns each surviving pair into the bell state for its bit") {
    Transcript t("run-e", 604, "qsdc", json::object());
    BitString msg = BitString::from_string("0110");
    QsdcSession s(msg, 604, 0, t);
    s.agree_hash();
    s.distribute_pairs();
    s.channel_check();
    s.encode_message();
    for (int k = 0; k < s.n(); ++k) {
        std::size_t j = s.data_positions()[static_cast<std::size_t>(k)];
        StateVector pair = s.pair_register(j).extract_pure_state({s.qubit_alice(j), s.qubit_bob(j)});
        BellOutcome want = msg.bit(static_cast<std::size_t>(k)) ? BellOutcome::PsiPlus : BellOutcome::PhiPlus;
        CHECK(fidelity_up_to_phase(pair, bell_state(want)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    // The transcript records one I/X application per data position.
    int encodes = 0;
    for (const TraceEvent& e : t.events()) {
        if (e.kind != EventKind::Apply || e.details.value("role", "") != "encode") continue;
        std::size_t k = static_cast<std::size_t>(encodes++);
        CHECK(e.details.at("op") == (msg.bit(k) ? "X" : "I"));
        CHECK(e.details.at("index") == s.data_positions()[k]);
    }
    CHECK(encodes == 4);
}

TEST_CASE("the announced outcomes carry no information about the message") {
    // Same seed, two different messages: every public announcement before
    // the digest is identical bit for bit.
    auto run = [](const std::string& msg) { return honest_qsdc(msg, 605); };
    HonestQsdc a = run("00000000");
    HonestQsdc b = run("11111111");
    HonestQsdc c = run("10100111");
    CHECK(a.announced == b.announced);
    CHECK(a.announced == c.announced);
    CHECK(a.decoded != b.decoded);  // the messages still arrive distinct

    // Event-level check: every public send before the digest agrees
    // across the two transcripts. (Alice's local encode operations differ,
    // but those never leave her lab.)
    uint64_t cut = digest_send_seq(a.transcript);
    for (uint64_t i = 0; i < cut; ++i) {
        const TraceEvent& ea = a.transcript.events().at(i);
        const TraceEvent& eb = b.transcript.events().at(i);
        if (ea.kind != EventKind::Send || ea.details.at("channel") != "classical_public") continue;
        CHECK(ea.to_json() == eb.to_json());
    }
}

TEST_CASE("full interception usually trips the channel check") {
    int aborts = 0;
    bool inspected = false;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Transcript t("run-eve", seed, "qsdc", json::object());
        QsdcSession s(BitString::from_string("10100111"), seed, 0, t);
        s.agree_hash();
        Eve eve(EveStrategy::intercept_resend(1.0, derive_seed(seed, "eve")));
        s.distribute_pairs(&eve);
        CHECK(eve.log().size() == 16);  // every transported qubit seen
        try {
            s.channel_check();
        } catch (const ProtocolAbort& ex) {
            ++aborts;
            CHECK(ex.cause == "channel_check");
            CHECK(s.phase() == QsdcPhase::Aborted);
            if (!inspected) {
                inspected = true;
                const TraceEvent& abort = t.events().back();
                CHECK(abort.kind == EventKind::Abort);
                CHECK(abort.details.at("cause") == "channel_check");
                CHECK(abort.details.at("mismatches").get<int>() > 0);
                CHECK(abort.details.at("threshold") == 0);
                // The dead session refuses further steps.
                CHECK_THROWS_AS(s.encode_message(), ProtocolError);
            }
        }
    }
    // P(escape) = (3/4)^8 ~ 0.100 per run; 20 runs abort ~18 times.
    CHECK(aborts >= 14);
    CHECK(aborts < 20);
}

TEST_CASE("a tolerant threshold lets an intercepted run continue to verification") {
    for (uint64_t seed = 0; seed < 6; ++seed) {
        Transcript t("run-tol", seed, "qsdc", json::object());
        BitString msg = BitString::from_string("10100111");
        QsdcSession s(msg, seed, 8, t);  // tolerate any number of mismatches
        s.agree_hash();
        Eve eve(EveStrategy::intercept_resend(1.0, derive_seed(seed, "eve")));
        s.distribute_pairs(&eve);
        CheckReport report = s.channel_check();  // must not throw
        s.encode_message();
        BitString announced = s.alice_measure_announce();
        Digest d = s.send_hash();
        BitString decoded = s.bob_decode(announced);
        bool accepted = s.verify_signature(decoded, d);
        CHECK(accepted == (decoded == msg));  // the digest binds the message exactly
        CHECK((s.phase() == QsdcPhase::Verified || s.phase() == QsdcPhase::Rejected));
        CHECK(report.positions.size() == 8);
    }
}

TEST_CASE("tampered announcements or digests are rejected") {
    SUBCASE("flipped announced bit") {
        Transcript t("run-ta", 606, "qsdc", json::object());
        BitString msg = BitString::from_string("10100111");
        QsdcSession s(msg, 606, 0, t);
        s.agree_hash();
        s.distribute_pairs();
        s.channel_check();
        s.encode_message();
        BitString announced = s.alice_measure_announce();
        Digest d = s.send_hash();
        announced.flip_bit(0);
        BitString decoded = s.bob_decode(announced);
        CHECK(decoded != msg);
        CHECK(!s.verify_signature(decoded, d));
        CHECK(s.phase() == QsdcPhase::Rejected);
        CHECK(t.events().back().details.at("result") == "reject");
    }
    SUBCASE("substituted digest") {
        Transcript t("run-td", 607, "qsdc", json::object());
        BitString msg = BitString::from_string("10100111");
        QsdcSession s(msg, 607, 0, t);
        s.agree_hash();
        s.distribute_pairs();
        s.channel_check();
        s.encode_message();
        BitString announced = s.alice_measure_announce();
        s.send_hash();
        BitString decoded = s.bob_decode(announced);
        CHECK(!s.verify_signature(decoded, hash_digest(BitString::from_string("00000000"))));
        CHECK(s.phase() == QsdcPhase::Rejected);
    }
}

TEST_CASE("protocol steps enforce their order and argument shapes") {
    Transcript t("run-o", 608, "qsdc", json::object());
    QsdcSession s(BitString::from_string("11"), 608, 0, t);
    std::size_t before = t.events().size();
    CHECK_THROWS_AS(s.channel_check(), ProtocolError);
    CHECK(s.phase() == QsdcPhase::Init);
    CHECK(t.events().size() == before + 1);
    CHECK(t.events().back().details.at("cause") == "phase_order");

    s.agree_hash();
    CHECK_THROWS_AS(s.agree_hash(), ProtocolError);
    s.distribute_pairs();
    CHECK_THROWS_AS(s.encode_message(), ProtocolError);  // check first
    s.channel_check();
    s.encode_message();
    BitString announced = s.alice_measure_announce();
    Digest d = s.send_hash();
    CHECK_THROWS_AS(s.bob_decode(BitString(5)), ProtocolError);  // wrong width
    BitString decoded = s.bob_decode(announced);
    CHECK_THROWS_AS(s.bob_decode(announced), ProtocolError);  // qubits already consumed
    CHECK(s.verify_signature(decoded, d));
}

TEST_CASE("an empty message passes vacuously") {
    Transcript t("run-0", 609, "qsdc", json::object());
    QsdcSession s(BitString(), 609, 0, t);
    s.agree_hash();
    s.distribute_pairs();
    CheckReport report = s.channel_check();
    CHECK(report.positions.empty());
    s.encode_message();
    BitString announced = s.alice_measure_announce();
    CHECK(announced.empty());
    Digest d = s.send_hash();
    CHECK(s.verify_signature(s.bob_decode(announced), d));
}

TEST_CASE("adjudication holds the sender to an accepted message") {
    HonestQsdc run = honest_qsdc("10100111", 610);
    REQUIRE(run.accepted);
    for (Claim claim : {Claim::AliceDeniesSending, Claim::BobDeniesReceiving}) {
        std::vector<std::string> evidence;
        CHECK(adjudicate_qsdc_dispute(run.transcript, claim, &evidence) == Verdict::Guilty);
        CHECK(!evidence.empty());
    }
}

TEST_CASE("adjudication of damaged direct-communication transcripts") {
    SUBCASE("no published digest exonerates the sender") {
        HonestQsdc run = honest_qsdc("10100111", 611);
        erase_event(run.transcript, digest_send_seq(run.transcript));
        CHECK(adjudicate_qsdc_dispute(run.transcript, Claim::AliceDeniesSending) == Verdict::NotGuilty);
    }
    SUBCASE("a randomized announcement no longer matches the digest") {
        HonestQsdc run = honest_qsdc("10100111", 612);
        auto seq = find_data_announcement_send(run.transcript);
        REQUIRE(seq.has_value());
        randomize_send_payload(run.transcript, *seq, 99);
        std::vector<std::string> evidence;
        CHECK(adjudicate_qsdc_dispute(run.transcript, Claim::AliceDeniesSending, &evidence) == Verdict::Forgery);
    }
    SUBCASE("a run without a verdict is undecidable") {
        HonestQsdc run = honest_qsdc("10100111", 613);
        erase_event(run.transcript, verdict_seq(run.transcript));
        CHECK(adjudicate_qsdc_dispute(run.transcript, Claim::AliceDeniesSending) == Verdict::Inconclusive);
    }
    SUBCASE("a rejected run leaves nothing to dispute") {
        Transcript t("run-rej", 614, "qsdc", json::object());
        BitString msg = BitString::from_string("10100111");
        QsdcSession s(msg, 614, 0, t);
        s.agree_hash();
        s.distribute_pairs();
        s.channel_check();
        s.encode_message();
        BitString announced = s.alice_measure_announce();
        Digest d = s.send_hash();
        announced.flip_bit(3);
        s.verify_signature(s.bob_decode(announced), d);
        CHECK(adjudicate_qsdc_dispute(t, Claim::AliceDeniesSending) == Verdict::Inconclusive);
    }
    SUBCASE("an unknown hash agreement is undecidable") {
        HonestQsdc run = honest_qsdc("10100111", 615);
        for (TraceEvent& e : run.transcript.mutable_events()) {
            if (e.kind == EventKind::Send && e.details.contains("payload") &&
                e.details.at("payload").value("type", "") == "bits" && e.details.at("from") == "charlie") {
                e.details.at("payload")["hex"] = "7f";  // names registry entry 127
            }
        }
        CHECK(adjudicate_qsdc_dispute(run.transcript, Claim::AliceDeniesSending) == Verdict::Inconclusive);
    }
    SUBCASE("a foreign transcript is not judged") {
        Transcript t("other", 1, "teleport", json::object());
        CHECK(adjudicate_qsdc_dispute(t, Claim::AliceDeniesSending) == Verdict::Inconclusive);
    }
}
