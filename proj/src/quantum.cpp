#include "avowqc/quantum.hpp"

#include <atomic>
#include <cmath>

#include "avowqc/errors.hpp"

namespace avowqc {

namespace {

constexpr double INV_SQRT2 = 0.70710678118654752440;

// bell_amp[outcome][b1][b2]: amplitude of |b1 b2> in each Bell state, with
// b1 the first particle of the measured pair.
constexpr double BELL_AMP[4][2][2] = {
    {{INV_SQRT2, 0.0}, {0.0, INV_SQRT2}},   // PhiPlus : (|00>+|11>)/sqrt2
    {{INV_SQRT2, 0.0}, {0.0, -INV_SQRT2}},  // PhiMinus: (|00>-|11>)/sqrt2
    {{0.0, INV_SQRT2}, {INV_SQRT2, 0.0}},   // PsiPlus : (|01>+|10>)/sqrt2
    {{0.0, INV_SQRT2}, {-INV_SQRT2, 0.0}},  // PsiMinus: (|01>-|10>)/sqrt2
};

std::atomic<uint64_t> next_register_uid{1};

void check_finite(Amp a) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw NormalizationError("amplitude is not finite");
}

}  // namespace

std::string to_string(BellOutcome o) {
    switch (o) {
        case BellOutcome::PhiPlus: return "phi_plus";
        case BellOutcome::PhiMinus: return "phi_minus";
        case BellOutcome::PsiPlus: return "psi_plus";
        case BellOutcome::PsiMinus: return "psi_minus";
    }
    return "?";
}

std::string to_string(PauliOp op) {
    switch (op) {
        case PauliOp::I: return "I";
        case PauliOp::X: return "X";
        case PauliOp::YTimesI: return "iY";
        case PauliOp::Z: return "Z";
    }
    return "?";
}

std::string to_string(Basis b) { return b == Basis::Z ? "z" : "x"; }

BellOutcome bell_outcome_from_string(const std::string& s) {
    if (s == "phi_plus") return BellOutcome::PhiPlus;
    if (s == "phi_minus") return BellOutcome::PhiMinus;
    if (s == "psi_plus") return BellOutcome::PsiPlus;
    if (s == "psi_minus") return BellOutcome::PsiMinus;
    throw ParseError("unknown Bell outcome name: " + s);
}

BitString encode_outcomes(const std::vector<BellOutcome>& outcomes) {
    BitString out;
    for (BellOutcome o : outcomes) out.append_uint(static_cast<uint64_t>(o), 2);
    return out;
}

std::vector<BellOutcome> decode_outcomes(const BitString& bits) {
    if (bits.size() % 2 != 0) throw DimensionError("outcome record must hold 2 bits per outcome");
    std::vector<BellOutcome> out;
    out.reserve(bits.size() / 2);
    for (std::size_t i = 0; i < bits.size(); i += 2) out.push_back(static_cast<BellOutcome>(bits.read_uint(i, 2)));
    return out;
}

PauliOp correction_for(BellOutcome o) {
    switch (o) {
        case BellOutcome::PhiPlus: return PauliOp::I;
        case BellOutcome::PhiMinus: return PauliOp::Z;
        case BellOutcome::PsiPlus: return PauliOp::X;
        case BellOutcome::PsiMinus: return PauliOp::YTimesI;
    }
    return PauliOp::I;
}

StateVector::StateVector(int n, std::vector<Amp> amps) : num_qubits(n), amplitudes(std::move(amps)) {
    if (n < 1 || n > MAX_QUBITS) throw CapacityError("state vector must span 1..8 qubits");
    if (amplitudes.size() != (std::size_t{1} << n)) throw DimensionError("amplitude count must be 2^num_qubits");
    for (Amp a : amplitudes) check_finite(a);
}

double StateVector::norm_sq() const {
    double s = 0.0;
    for (Amp a : amplitudes) s += std::norm(a);
    return s;
}

StateVector single_qubit_state(Amp alpha, Amp beta) {
    double n = std::norm(alpha) + std::norm(beta);
    if (std::abs(n - 1.0) > NORM_TOL) throw NormalizationError("single-qubit state is not normalized");
    return StateVector(1, {alpha, beta});
}

StateVector bell_state(BellOutcome o) {
    const auto& t = BELL_AMP[static_cast<int>(o)];
    // Index = b1 | (b2 << 1): qubit 0 is the first particle.
    return StateVector(2, {Amp(t[0][0]), Amp(t[1][0]), Amp(t[0][1]), Amp(t[1][1])});
}

double fidelity_up_to_phase(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw DimensionError("fidelity of states with different dimensions");
    Amp ip{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) ip += std::conj(a.amplitudes[i]) * b.amplitudes[i];
    return std::norm(ip);
}

QuantumRegister::QuantumRegister(int num_qubits, uint64_t seed)
    : uid_(next_register_uid.fetch_add(1)),
      num_qubits_(num_qubits),
      rng_(seed) {
    if (num_qubits < 1 || num_qubits > MAX_QUBITS) throw CapacityError("register capacity must be 1..8 qubits");
    amps_.assign(std::size_t{1} << num_qubits, Amp{0.0, 0.0});
    amps_[0] = Amp{1.0, 0.0};
    status_.assign(static_cast<std::size_t>(num_qubits), SlotStatus::Fresh);
}

QubitId QuantumRegister::allocate_qubit() {
    if (next_fresh_ >= num_qubits_) throw CapacityError("register capacity exhausted");
    int k = next_fresh_++;
    status_[static_cast<std::size_t>(k)] = SlotStatus::Live;
    return QubitId{uid_, k};
}

std::pair<QubitId, QubitId> QuantumRegister::make_epr_pair() {
    if (next_fresh_ + 2 > num_qubits_) throw CapacityError("register capacity exhausted");
    QubitId a = allocate_qubit();
    QubitId b = allocate_qubit();
    // H on a, then CNOT a->b, starting from |00>.
    static const Amp H[2][2] = {{INV_SQRT2, INV_SQRT2}, {INV_SQRT2, -INV_SQRT2}};
    apply_single_gate(H, a.index);
    const uint64_t ca = 1ULL << a.index, tb = 1ULL << b.index;
    for (uint64_t i = 0; i < amps_.size(); ++i) {
        if ((i & ca) && !(i & tb)) std::swap(amps_[i], amps_[i | tb]);
    }
    return {a, b};
}

int QuantumRegister::check_owned(QubitId q) const {
    if (q.register_uid != uid_) throw QubitError("qubit belongs to a different register");
    if (q.index < 0 || q.index >= num_qubits_) throw QubitError("qubit index out of range");
    if (status_[static_cast<std::size_t>(q.index)] == SlotStatus::Fresh) throw QubitError("qubit was never claimed");
    return q.index;
}

int QuantumRegister::check_live(QubitId q) const {
    int k = check_owned(q);
    if (status_[static_cast<std::size_t>(k)] == SlotStatus::Released)
        throw QubitError("qubit was measured and released");
    return k;
}

bool QuantumRegister::is_live(QubitId q) const {
    if (q.register_uid != uid_ || q.index < 0 || q.index >= num_qubits_) return false;
    return status_[static_cast<std::size_t>(q.index)] == SlotStatus::Live;
}

void QuantumRegister::prepare_single(QubitId q, Amp alpha, Amp beta) {
    int k = check_live(q);
    check_finite(alpha);
    check_finite(beta);
    if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > NORM_TOL)
        throw NormalizationError("|alpha|^2+|beta|^2 must be 1");
    const uint64_t bit = 1ULL << k;
    double p1 = 0.0;
    for (uint64_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) p1 += std::norm(amps_[i]);
    }
    if (p1 > 1e-12) throw QubitError("prepare_single requires the qubit in |0>");
    for (uint64_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        amps_[i | bit] = beta * amps_[i];
        amps_[i] = alpha * amps_[i];
    }
}

void QuantumRegister::apply_single_gate(const Amp m[2][2], int k) {
    const uint64_t bit = 1ULL << k;
    for (uint64_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        Amp a0 = amps_[i], a1 = amps_[i | bit];
        amps_[i] = m[0][0] * a0 + m[0][1] * a1;
        amps_[i | bit] = m[1][0] * a0 + m[1][1] * a1;
    }
}

void QuantumRegister::apply_pauli(PauliOp op, QubitId q) {
    int k = check_live(q);
    static const Amp I[2][2] = {{1, 0}, {0, 1}};
    static const Amp X[2][2] = {{0, 1}, {1, 0}};
    static const Amp IY[2][2] = {{0, 1}, {-1, 0}};  // i*sigma_y
    static const Amp Z[2][2] = {{1, 0}, {0, -1}};
    switch (op) {
        case PauliOp::I: apply_single_gate(I, k); break;
        case PauliOp::X: apply_single_gate(X, k); break;
        case PauliOp::YTimesI: apply_single_gate(IY, k); break;
        case PauliOp::Z: apply_single_gate(Z, k); break;
    }
}

int QuantumRegister::sample_two(double p0) {
    // Fixed enum order (0, 1); the final bucket absorbs rounding slack.
    return rng_.next_double() < p0 ? 0 : 1;
}

int QuantumRegister::collapse_z(int k) {
    const uint64_t bit = 1ULL << k;
    double p0 = 0.0;
    for (uint64_t i = 0; i < amps_.size(); ++i) {
        if (!(i & bit)) p0 += std::norm(amps_[i]);
    }
    int outcome = sample_two(p0);
    const double keep_p = outcome == 0 ? p0 : 1.0 - p0;
    const double scale = 1.0 / std::sqrt(keep_p);
    for (uint64_t i = 0; i < amps_.size(); ++i) {
        const bool one = (i & bit) != 0;
        if (one != (outcome == 1)) {
            amps_[i] = Amp{0.0, 0.0};
        } else {
            amps_[i] *= scale;
        }
    }
    return outcome;
}

int QuantumRegister::collapse_in_basis(QubitId q, Basis basis) {
    int k = check_live(q);
    if (basis == Basis::Z) return collapse_z(k);
    static const Amp H[2][2] = {{INV_SQRT2, INV_SQRT2}, {INV_SQRT2, -INV_SQRT2}};
    // Rotate to the diagonal basis, collapse, rotate back so the qubit is
    // left in |+> or |->.
    apply_single_gate(H, k);
    int outcome = collapse_z(k);
    apply_single_gate(H, k);
    return outcome;
}

int QuantumRegister::measure_z(QubitId q) {
    int outcome = collapse_in_basis(q, Basis::Z);
    status_[static_cast<std::size_t>(q.index)] = SlotStatus::Released;
    return outcome;
}

int QuantumRegister::measure_x(QubitId q) {
    int outcome = collapse_in_basis(q, Basis::X);
    status_[static_cast<std::size_t>(q.index)] = SlotStatus::Released;
    return outcome;
}

BellOutcome QuantumRegister::measure_bell(QubitId q1, QubitId q2) {
    int k1 = check_live(q1);
    int k2 = check_live(q2);
    if (k1 == k2) throw QubitError("Bell measurement needs two distinct qubits");
    const uint64_t b1 = 1ULL << k1, b2 = 1ULL << k2;
    const uint64_t pair_mask = b1 | b2;

    // Projection coefficients c_k(e) = <Bell_k| psi restricted to env e.
    std::vector<std::vector<Amp>> coeff(4);
    double probs[4] = {0, 0, 0, 0};
    for (int o = 0; o < 4; ++o) coeff[o].reserve(amps_.size() / 4);
    for (uint64_t e = 0; e < amps_.size(); ++e) {
        if (e & pair_mask) continue;
        for (int o = 0; o < 4; ++o) {
            Amp c{0.0, 0.0};
            for (int v1 = 0; v1 < 2; ++v1) {
                for (int v2 = 0; v2 < 2; ++v2) {
                    const double w = BELL_AMP[o][v1][v2];
                    if (w == 0.0) continue;
                    c += w * amps_[e | (static_cast<uint64_t>(v1) * b1) | (static_cast<uint64_t>(v2) * b2)];
                }
            }
            coeff[o].push_back(c);
            probs[o] += std::norm(c);
        }
    }

    // Inverse-CDF in fixed enum order PhiPlus, PhiMinus, PsiPlus, PsiMinus.
    const double u = rng_.next_double();
    int outcome = 3;
    double cum = 0.0;
    for (int o = 0; o < 3; ++o) {
        cum += probs[o];
        if (u < cum) {
            outcome = o;
            break;
        }
    }

    // Collapse the pair onto the outcome Bell state, conditioned env intact.
    const double scale = 1.0 / std::sqrt(probs[outcome]);
    std::size_t ei = 0;
    for (uint64_t e = 0; e < amps_.size(); ++e) {
        if (e & pair_mask) continue;
        const Amp c = coeff[outcome][ei++] * scale;
        for (int v1 = 0; v1 < 2; ++v1) {
            for (int v2 = 0; v2 < 2; ++v2) {
                amps_[e | (static_cast<uint64_t>(v1) * b1) | (static_cast<uint64_t>(v2) * b2)] =
                    BELL_AMP[outcome][v1][v2] * c;
            }
        }
    }

    status_[static_cast<std::size_t>(k1)] = SlotStatus::Released;
    status_[static_cast<std::size_t>(k2)] = SlotStatus::Released;
    return static_cast<BellOutcome>(outcome);
}

StateVector QuantumRegister::state() const { return StateVector(num_qubits_, amps_); }

StateVector QuantumRegister::extract_pure_state(const std::vector<QubitId>& qubits) const {
    if (qubits.empty() || qubits.size() > static_cast<std::size_t>(num_qubits_))
        throw DimensionError("extract_pure_state needs 1..num_qubits qubits");
    uint64_t mask = 0;
    std::vector<int> ks;
    for (QubitId q : qubits) {
        int k = check_live(q);
        const uint64_t bit = 1ULL << k;
        if (mask & bit) throw QubitError("duplicate qubit in extraction list");
        mask |= bit;
        ks.push_back(k);
    }
    const std::size_t sub_dim = std::size_t{1} << qubits.size();
    auto scatter = [&](std::size_t a) {
        uint64_t idx = 0;
        for (std::size_t j = 0; j < ks.size(); ++j) {
            if (a & (std::size_t{1} << j)) idx |= 1ULL << ks[j];
        }
        return idx;
    };

    // Reduced density matrix of the subset.
    std::vector<std::vector<Amp>> rho(sub_dim, std::vector<Amp>(sub_dim, Amp{0.0, 0.0}));
    for (uint64_t e = 0; e < amps_.size(); ++e) {
        if (e & mask) continue;
        for (std::size_t a = 0; a < sub_dim; ++a) {
            const Amp va = amps_[e | scatter(a)];
            if (va == Amp{0.0, 0.0}) continue;
            for (std::size_t b = 0; b < sub_dim; ++b) {
                rho[a][b] += va * std::conj(amps_[e | scatter(b)]);
            }
        }
    }

    double purity = 0.0;
    for (std::size_t a = 0; a < sub_dim; ++a)
        for (std::size_t b = 0; b < sub_dim; ++b) purity += std::norm(rho[a][b]);
    if (std::abs(purity - 1.0) > NORM_TOL)
        throw NormalizationError("qubits are entangled with the rest of the register");

    // For a pure rho = |psi><psi|, any column with nonzero diagonal is
    // proportional to psi.
    std::size_t best = 0;
    for (std::size_t a = 1; a < sub_dim; ++a) {
        if (rho[a][a].real() > rho[best][best].real()) best = a;
    }
    const double inv = 1.0 / std::sqrt(rho[best][best].real());
    std::vector<Amp> psi(sub_dim);
    for (std::size_t a = 0; a < sub_dim; ++a) psi[a] = rho[a][best] * inv;
    return StateVector(static_cast<int>(qubits.size()), std::move(psi));
}

double QuantumRegister::total_probability() const {
    double s = 0.0;
    for (Amp a : amps_) s += std::norm(a);
    return s;
}

}  // namespace avowqc
