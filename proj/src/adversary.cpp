#include "avowqc/adversary.hpp"

#include "avowqc/errors.hpp"

namespace avowqc {

void EveStrategy::validate() const {
    if (coverage < 0.0 || coverage > 1.0) throw ProtocolError("eve coverage must lie in [0, 1]");
    if ((kind == EveKind::InterceptResendFixedBasis) != fixed_basis.has_value())
        throw ProtocolError("fixed_basis must be present exactly for the fixed-basis strategy");
}

Eve::Eve(EveStrategy strategy) : strategy_(strategy), rng_(strategy.seed) { strategy_.validate(); }

AttackLogEntry Eve::attack_in_transit(QuantumRegister& reg, QubitId q) {
    AttackLogEntry entry;
    entry.transit_index = log_.size();
    if (strategy_.kind != EveKind::None) {
        // coverage == 0 draws but never attacks, so the register stream is
        // untouched and downstream behavior matches a missing adversary.
        if (rng_.next_double() < strategy_.coverage) {
            entry.attacked = true;
            entry.basis = strategy_.kind == EveKind::InterceptResendFixedBasis
                              ? *strategy_.fixed_basis
                              : (rng_.next_bit() ? Basis::X : Basis::Z);
            entry.outcome = reg.collapse_in_basis(q, entry.basis);
        }
    }
    log_.push_back(entry);
    return entry;
}

}  // namespace avowqc
