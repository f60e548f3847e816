// Exact pure-state register for up to 6 qubits: gates, computational-basis
// measurement, and projective measurement in an arbitrary orthonormal basis.
//
// Index convention (fixed project-wide): qubit 0 is the leftmost ket symbol
// and occupies the MOST significant bit of the amplitude index. |q0 q1 q2>
// with q0=1, q1=0, q2=1 sits at index 0b101 = 5. Measurements keep every
// qubit in the register; collapsed qubits remain as product factors.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqss/rng.hpp"

namespace sqss::qsim {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 6;
inline constexpr double kUnitaryTol = 1e-10; // unitarity / orthonormality / norm
inline constexpr double kAmplitudeTol = 1e-12;

class StateVector {
public:
    // |00...0> on num_qubits qubits.
    explicit StateVector(int num_qubits);

    static StateVector basis_state(int num_qubits, std::uint64_t index);

    // Validates length 2^n and unit norm (within kUnitaryTol).
    static StateVector from_amplitudes(int num_qubits, std::vector<cplx> amps);

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }

    cplx amplitude(std::uint64_t index) const { return amps_[index]; }
    std::span<const cplx> amplitudes() const { return amps_; }

    double norm_sq() const;

    // index-bit weight of a qubit: qubit 0 maps to the MSB
    std::uint64_t stride_of(int qubit) const { return std::uint64_t{1} << (num_qubits_ - 1 - qubit); }

    // bit value of `qubit` within basis index `index`
    int bit_of(std::uint64_t index, int qubit) const {
        return static_cast<int>((index >> (num_qubits_ - 1 - qubit)) & 1u);
    }

    cplx* data() { return amps_.data(); }
    const cplx* data() const { return amps_.data(); }

private:
    StateVector() = default;

    int num_qubits_ = 0;
    std::vector<cplx> amps_;
};

// Gates are validated at construction, so a Gate2/Gate4 value is unitary by
// invariant and application never re-checks.
class Gate2 {
public:
    // row-major [g00 g01; g10 g11]; throws std::invalid_argument if not
    // unitary within kUnitaryTol
    static Gate2 make(const cplx m[4], std::string name = {});
    const cplx* matrix() const { return m_; }
    const std::string& name() const { return name_; }

private:
    Gate2() = default;
    cplx m_[4];
    std::string name_;
};

class Gate4 {
public:
    // row-major 4x4 over |t0 t1> in {00,01,10,11}; t0 is the first target
    // passed to apply_gate and is the more significant of the pair
    static Gate4 make(const cplx m[16], std::string name = {});
    const cplx* matrix() const { return m_; }
    const std::string& name() const { return name_; }

private:
    Gate4() = default;
    cplx m_[16];
    std::string name_;
};

namespace gates {
const Gate2& hadamard();
const Gate2& pauli_x();
const Gate2& identity();
const Gate4& cnot(); // control = first target
} // namespace gates

void apply_gate(StateVector& state, const Gate2& gate, int target);
void apply_gate(StateVector& state, const Gate4& gate, int target_a, int target_b);

enum class BasisLabel { Computational, Bell, Phi, Custom };

std::string to_string(BasisLabel label);

// An ordered orthonormal basis over `num_qubits` qubits. Factories validate
// pairwise orthonormality (within kUnitaryTol), so a constructed NamedBasis
// is sound by invariant.
class NamedBasis {
public:
    static NamedBasis make(std::string label, BasisLabel kind,
                           std::vector<StateVector> vectors);

    const std::string& label() const { return label_; }
    BasisLabel kind() const { return kind_; }
    int num_qubits() const { return num_qubits_; }
    std::size_t size() const { return vectors_.size(); }
    const StateVector& vector(std::size_t i) const { return vectors_[i]; }

private:
    NamedBasis() = default;
    std::string label_;
    BasisLabel kind_ = BasisLabel::Custom;
    int num_qubits_ = 0;
    std::vector<StateVector> vectors_;
};

struct MeasurementOutcome {
    BasisLabel basis_label = BasisLabel::Computational;
    int outcome_index = 0;
    StateVector post_state{1};
};

// --- in-place measurement (protocol hot path) ---

// Computational-basis measurement of one qubit; collapses in place, returns 0/1.
int collapse_computational(StateVector& state, int target, Rng& rng);

// Projective measurement of `targets` in `basis`; collapses in place, returns
// the outcome index. targets[0] is the most significant bit of the basis
// vectors' own index space.
int collapse_in_basis(StateVector& state, const NamedBasis& basis,
                      std::span<const int> targets, Rng& rng);

// --- value-style wrappers matching the module contract ---

MeasurementOutcome measure_computational(StateVector state, int target, Rng& rng);
MeasurementOutcome measure_in_basis(StateVector state, const NamedBasis& basis,
                                    std::span<const int> targets, Rng& rng);

// Exact Born probabilities of each basis outcome (no sampling, no collapse).
std::vector<double> born_distribution(const StateVector& state, const NamedBasis& basis,
                                      std::span<const int> targets);

// Tensor an ancilla |0> or |1> onto the register; the ancilla takes the
// highest qubit index. Throws std::length_error past kMaxQubits.
StateVector extend_with_ancilla(const StateVector& state, int ancilla_value);

// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);

} // namespace sqss::qsim
