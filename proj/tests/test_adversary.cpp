#include <doctest.h>

#include <tuple>
#include <vector>

#include "avowqc/adversary.hpp"
#include "avowqc/errors.hpp"
#include "avowqc/quantum.hpp"

using namespace avowqc;

TEST_CASE("strategy validation rejects malformed configurations") {
    CHECK_THROWS_AS(EveStrategy::intercept_resend(-0.1, 1).validate(), ProtocolError);
    CHECK_THROWS_AS(EveStrategy::intercept_resend(1.5, 1).validate(), ProtocolError);

    EveStrategy missing_basis{EveKind::InterceptResendFixedBasis, 0.5, std::nullopt, 1};
    CHECK_THROWS_AS(missing_basis.validate(), ProtocolError);
    EveStrategy stray_basis{EveKind::InterceptResendRandomBasis, 0.5, Basis::Z, 1};
    CHECK_THROWS_AS(Eve{stray_basis}, ProtocolError);  // ctor validates too

    CHECK_NOTHROW(EveStrategy::none().validate());
    CHECK_NOTHROW(EveStrategy::intercept_resend(1.0, 2).validate());
    CHECK_NOTHROW(EveStrategy::intercept_resend_fixed(Basis::X, 0.25, 3).validate());
}

TEST_CASE("an absent or zero-coverage attacker leaves the register untouched") {
    auto run = [](Eve* eve) {
        QuantumRegister reg(2, 77);
        auto [a, b] = reg.make_epr_pair();
        if (eve) eve->attack_in_transit(reg, b);
        return reg.state().amplitudes;
    };
    Eve none(EveStrategy::none());
    Eve idle(EveStrategy::intercept_resend(0.0, 5));
    auto baseline = run(nullptr);
    CHECK(run(&none) == baseline);  // amplitudes bit-identical
    CHECK(run(&idle) == baseline);
    CHECK(none.log().size() == 1);
    CHECK(!none.log()[0].attacked);
    CHECK(idle.log().size() == 1);
    CHECK(!idle.log()[0].attacked);
}

TEST_CASE("one log entry per transit in order, attacked or not") {
    Eve eve(EveStrategy::intercept_resend(0.3, 9));
    const int transits = 2000;
    int attacked = 0;
    for (int i = 0; i < transits; ++i) {
        QuantumRegister reg(1, derive_seed(40, "transit", static_cast<uint64_t>(i)));
        QubitId q = reg.allocate_qubit();
        AttackLogEntry e = eve.attack_in_transit(reg, q);
        CHECK(e.transit_index == static_cast<std::size_t>(i));
        attacked += e.attacked;
    }
    CHECK(eve.log().size() == static_cast<std::size_t>(transits));
    for (int i = 0; i < transits; ++i) CHECK(eve.log()[static_cast<std::size_t>(i)].transit_index == static_cast<std::size_t>(i));
    // Binomial(2000, 0.3): sd ~20.5, so +-85 is > 4 sigma.
    CHECK(attacked > 600 - 85);
    CHECK(attacked < 600 + 85);
}

TEST_CASE("a fixed-z attack collapses an epr half onto a classical pair") {
    for (uint64_t i = 0; i < 100; ++i) {
        Eve eve(EveStrategy::intercept_resend_fixed(Basis::Z, 1.0, derive_seed(41, "eve", i)));
        QuantumRegister reg(2, derive_seed(41, "reg", i));
        auto [a, b] = reg.make_epr_pair();
        AttackLogEntry e = eve.attack_in_transit(reg, b);
        CHECK(e.attacked);
        CHECK(e.basis == Basis::Z);
        CHECK(reg.is_live(b));  // the qubit keeps travelling
        // The pair is now the product state |vv>.
        StateVector s = reg.extract_pure_state({a, b});
        std::vector<Amp> want(4, Amp(0));
        want[static_cast<std::size_t>(e.outcome) * 3] = Amp(1);  // index 0 or 3
        CHECK(fidelity_up_to_phase(s, StateVector(2, want)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(reg.measure_z(b) == e.outcome);
        CHECK(reg.measure_z(a) == e.outcome);
    }
}

TEST_CASE("random-basis interception picks each basis about half the time") {
    Eve eve(EveStrategy::intercept_resend(1.0, 12));
    int x_count = 0;
    const int transits = 2000;
    for (int i = 0; i < transits; ++i) {
        QuantumRegister reg(1, derive_seed(42, "basis", static_cast<uint64_t>(i)));
        QubitId q = reg.allocate_qubit();
        x_count += eve.attack_in_transit(reg, q).basis == Basis::X;
    }
    CHECK(x_count > 1000 - 90);
    CHECK(x_count < 1000 + 90);
}

TEST_CASE("intercept-resend on a z eigenstate flips the receiver bit a quarter of the time") {
    Eve eve(EveStrategy::intercept_resend(1.0, 13));
    int errors = 0;
    const int transits = 4000;
    for (int i = 0; i < transits; ++i) {
        QuantumRegister reg(1, derive_seed(43, "ir", static_cast<uint64_t>(i)));
        QubitId q = reg.allocate_qubit();
        int sent = i & 1;
        if (sent) reg.apply_pauli(PauliOp::X, q);
        eve.attack_in_transit(reg, q);
        errors += reg.measure_z(q) != sent;
    }
    double rate = errors / static_cast<double>(transits);  // expectation 1/4
    CHECK(rate > 0.25 - 0.03);
    CHECK(rate < 0.25 + 0.03);
}

TEST_CASE("intercept-resend on epr halves breaks a quarter of z correlations") {
    Eve eve(EveStrategy::intercept_resend(1.0, 14));
    int mismatches = 0;
    const int trials = 4000;
    for (int i = 0; i < trials; ++i) {
        QuantumRegister reg(2, derive_seed(44, "epr", static_cast<uint64_t>(i)));
        auto [a, b] = reg.make_epr_pair();
        eve.attack_in_transit(reg, b);
        mismatches += reg.measure_z(a) != reg.measure_z(b);
    }
    double rate = mismatches / static_cast<double>(trials);
    CHECK(rate > 0.25 - 0.03);
    CHECK(rate < 0.25 + 0.03);
}

TEST_CASE("identical seeds reproduce identical attack logs") {
    auto run = [](uint64_t eve_seed, uint64_t reg_seed) {
        Eve eve(EveStrategy::intercept_resend(0.5, eve_seed));
        for (int i = 0; i < 50; ++i) {
            QuantumRegister reg(1, derive_seed(reg_seed, "det", static_cast<uint64_t>(i)));
            QubitId q = reg.allocate_qubit();
            eve.attack_in_transit(reg, q);
        }
        std::vector<std::tuple<bool, Basis, int>> out;
        for (const auto& e : eve.log()) out.emplace_back(e.attacked, e.basis, e.outcome);
        return out;
    };
    CHECK(run(7, 8) == run(7, 8));
    CHECK(run(7, 8) != run(9, 8));
}
