#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "avowqc/quantum.hpp"
#include "avowqc/rng.hpp"

namespace avowqc {

enum class EveKind { None, InterceptResendRandomBasis, InterceptResendFixedBasis };

// Eavesdropper configuration. coverage is the fraction of transmitted
// qubits attacked; fixed_basis is present iff kind is
// InterceptResendFixedBasis.
struct EveStrategy {
    EveKind kind = EveKind::None;
    double coverage = 0.0;
    std::optional<Basis> fixed_basis;
    uint64_t seed = 0;

    static EveStrategy none() { return {}; }
    static EveStrategy intercept_resend(double coverage, uint64_t seed) {
        return {EveKind::InterceptResendRandomBasis, coverage, std::nullopt, seed};
    }
    static EveStrategy intercept_resend_fixed(Basis basis, double coverage, uint64_t seed) {
        return {EveKind::InterceptResendFixedBasis, coverage, basis, seed};
    }

    void validate() const;
};

// One qubit transit as seen from Eve's side. Entries are appended in
// transit order, attacked or not, so entry k always describes the k-th
// qubit that crossed the channel.
struct AttackLogEntry {
    std::size_t transit_index = 0;
    bool attacked = false;
    Basis basis = Basis::Z;
    int outcome = 0;
};

// Run-scoped eavesdropper: immutable strategy plus a private stream and
// log. Strategy draws (attack? which basis?) come from Eve's own stream;
// the Born-rule outcome comes from the register, like any measurement.
class Eve {
public:
    explicit Eve(EveStrategy strategy);

    // Called for each qubit while it is on the quantum channel. With
    // probability `coverage` Eve measures it in her chosen basis and
    // forwards the collapsed qubit.
    AttackLogEntry attack_in_transit(QuantumRegister& reg, QubitId q);

    const EveStrategy& strategy() const { return strategy_; }
    const std::vector<AttackLogEntry>& log() const { return log_; }

private:
    EveStrategy strategy_;
    CounterRng rng_;
    std::vector<AttackLogEntry> log_;
};

}  // namespace avowqc
