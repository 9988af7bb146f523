#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "avowqc/bits.hpp"
#include "avowqc/rng.hpp"

namespace avowqc {

using Amp = std::complex<double>;

// Tolerance for analytic equalities (normalization, fidelity-one checks).
constexpr double NORM_TOL = 1e-9;

constexpr int MAX_QUBITS = 8;

enum class Basis { Z, X };

// Single-qubit operators used by the protocols. YTimesI is the operator
// i*sigma_y = [[0, 1], [-1, 0]]; each entry squares to the identity up to
// global phase.
enum class PauliOp { I, X, YTimesI, Z };

// Result of a Bell-basis measurement, encoded as two bits:
// PhiPlus=00, PhiMinus=01, PsiPlus=10, PsiMinus=11.
enum class BellOutcome : int { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

std::string to_string(BellOutcome o);
std::string to_string(PauliOp op);
std::string to_string(Basis b);
BellOutcome bell_outcome_from_string(const std::string& s);

// Fixed 2-bit wire encoding of Bell outcomes, most significant bit first.
BitString encode_outcomes(const std::vector<BellOutcome>& outcomes);
std::vector<BellOutcome> decode_outcomes(const BitString& bits);

// Correction that maps the post-swap (or post-teleport) state back onto
// |phi+> (or the input state): PhiPlus->I, PhiMinus->Z, PsiPlus->X,
// PsiMinus->i*sigma_y.
PauliOp correction_for(BellOutcome o);

// Plain value state: amplitudes over 2^num_qubits basis states. Qubit j of
// a value state addresses bit (1<<j) of the amplitude index.
struct StateVector {
    int num_qubits = 0;
    std::vector<Amp> amplitudes;

    StateVector() = default;
    StateVector(int n, std::vector<Amp> amps);

    std::size_t dim() const { return amplitudes.size(); }
    double norm_sq() const;
};

// Reference states for tests and protocol checks.
StateVector single_qubit_state(Amp alpha, Amp beta);
// Two-qubit Bell state with qubit 0 the first particle, qubit 1 the second.
StateVector bell_state(BellOutcome o);

// |<a|b>|^2. Insensitive to global phase of either argument.
double fidelity_up_to_phase(const StateVector& a, const StateVector& b);

class QuantumRegister;

// Handle to one qubit slot of one register. A released handle is never
// reissued within a run.
struct QubitId {
    uint64_t register_uid = 0;
    int index = -1;

    bool operator==(const QubitId&) const = default;
};

// Complex-amplitude register for up to MAX_QUBITS simulated qubits. Owns
// all collapse randomness through one counter-based stream; Born sampling
// uses inverse-CDF in fixed outcome order, so a seed fully determines every
// measurement record.
class QuantumRegister {
public:
    // All qubits start fresh in |0>.
    QuantumRegister(int num_qubits, uint64_t seed);

    int num_qubits() const { return num_qubits_; }
    uint64_t uid() const { return uid_; }

    // Claims the next fresh qubit (still in |0>).
    QubitId allocate_qubit();
    // Claims two fresh qubits and entangles them into (|00>+|11>)/sqrt(2).
    std::pair<QubitId, QubitId> make_epr_pair();

    // Loads alpha|0>+beta|1> onto a claimed qubit that is still in |0>.
    // The amplitudes are stored exactly as given; |alpha|^2+|beta|^2 must
    // be 1 within NORM_TOL.
    void prepare_single(QubitId q, Amp alpha, Amp beta);

    void apply_pauli(PauliOp op, QubitId q);

    // Projective measurement in the Z (computational) basis; collapses and
    // releases the qubit.
    int measure_z(QubitId q);
    // Same in the diagonal basis; bit 0 corresponds to |+>.
    int measure_x(QubitId q);

    // Measurement that collapses the qubit without releasing the handle.
    // This is what an in-transit intercept-resend attack does: the qubit
    // keeps travelling, in the collapsed state.
    int collapse_in_basis(QubitId q, Basis basis);

    // Projects the pair onto the Bell basis. Both qubits are released; the
    // register keeps the pair collapsed onto the outcome's Bell state, so
    // the rest of the register sees the correct conditional state.
    BellOutcome measure_bell(QubitId q1, QubitId q2);

    bool is_live(QubitId q) const;

    // Full amplitude vector over every slot of the register.
    StateVector state() const;

    // State of a subset of live qubits, qubit j of the result being
    // qubits[j]. Requires the subset to be unentangled with the rest of
    // the register (purity within NORM_TOL); throws otherwise.
    StateVector extract_pure_state(const std::vector<QubitId>& qubits) const;

    double total_probability() const;

private:
    enum class SlotStatus { Fresh, Live, Released };

    int check_owned(QubitId q) const;      // any claimed slot
    int check_live(QubitId q) const;       // claimed and not yet measured
    void apply_single_gate(const Amp m[2][2], int k);
    int sample_two(double p0);             // inverse-CDF over (outcome 0, outcome 1)
    int collapse_z(int k);                 // Born sample + collapse, no release

    uint64_t uid_;
    int num_qubits_;
    std::vector<Amp> amps_;
    std::vector<SlotStatus> status_;
    int next_fresh_ = 0;
    CounterRng rng_;
};

}  // namespace avowqc
