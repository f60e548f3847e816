// The protocol's fixed states and bases: the GHZ-type triplet built by its
// preparation circuit, the standard GHZ state, the Bell basis, and the
// eight-vector phi basis whose first element equals the triplet state.

#pragma once

#include "sqss/statevector.hpp"

namespace sqss::states {

using qsim::NamedBasis;
using qsim::StateVector;

// Bell-basis outcome labels, in basis order.
enum BellOutcome : int {
    kPhiPlus = 0,  // (|00> + |11>)/sqrt(2)
    kPhiMinus = 1, // (|00> - |11>)/sqrt(2)
    kPsiPlus = 2,  // (|01> + |10>)/sqrt(2)
    kPsiMinus = 3, // (|01> - |10>)/sqrt(2)
};

// The shared triplet: built by circuit as H on qubit 0 of |0> (x) PhiPlus,
// then CNOT 0->1. Equals amplitude 1/2 on |000>,|011>,|101>,|110>.
// Qubit roles: 0 = Alice, 1 = Bob, 2 = Charlie.
StateVector prepare_psi();

// (|000> + |111>)/sqrt(2); H on every qubit maps prepare_psi() onto this.
StateVector ghz();

StateVector bell_phi_plus();

const NamedBasis& bell_basis();

// Eight orthonormal three-qubit vectors; index 0 equals prepare_psi(), so
// outcome 0 certifies an untampered triplet.
const NamedBasis& phi_basis();

const NamedBasis& computational_basis(int num_qubits);

} // namespace sqss::states
