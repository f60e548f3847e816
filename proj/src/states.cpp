#include "sqss/states.hpp"

#include <stdexcept>

namespace sqss::states {

using qsim::cplx;

namespace {

constexpr double kHalf = 0.5;
constexpr double kInvSqrt2 = 0.70710678118654752440;

} // namespace

StateVector bell_phi_plus() {
    std::vector<cplx> a(4, cplx{0.0, 0.0});
    a[0b00] = kInvSqrt2;
    a[0b11] = kInvSqrt2;
    return StateVector::from_amplitudes(2, std::move(a));
}

StateVector prepare_psi() {
    // input register |0> (x) (|00>+|11>)/sqrt(2)
    std::vector<cplx> a(8, cplx{0.0, 0.0});
    a[0b000] = kInvSqrt2;
    a[0b011] = kInvSqrt2;
    StateVector psi = StateVector::from_amplitudes(3, std::move(a));
    qsim::apply_gate(psi, qsim::gates::hadamard(), 0);
    qsim::apply_gate(psi, qsim::gates::cnot(), 0, 1);
    return psi;
}

StateVector ghz() {
    std::vector<cplx> a(8, cplx{0.0, 0.0});
    a[0b000] = kInvSqrt2;
    a[0b111] = kInvSqrt2;
    return StateVector::from_amplitudes(3, std::move(a));
}

const NamedBasis& bell_basis() {
    static const NamedBasis basis = [] {
        auto vec = [](int i, int j, double sign) {
            std::vector<cplx> a(4, cplx{0.0, 0.0});
            a[i] = kInvSqrt2;
            a[j] = sign * kInvSqrt2;
            return StateVector::from_amplitudes(2, std::move(a));
        };
        std::vector<StateVector> v;
        v.push_back(vec(0b00, 0b11, +1.0)); // PhiPlus
        v.push_back(vec(0b00, 0b11, -1.0)); // PhiMinus
        v.push_back(vec(0b01, 0b10, +1.0)); // PsiPlus
        v.push_back(vec(0b01, 0b10, -1.0)); // PsiMinus
        return NamedBasis::make("bell", qsim::BasisLabel::Bell, std::move(v));
    }();
    return basis;
}

const NamedBasis& phi_basis() {
    // phi_{4a+2t+s} = ( |a>(|00> +- |11>) + (-1)^s |1-a>(|01> +- |10>) ) / 2
    // with t choosing the inner sign for both halves. Index 0 reproduces the
    // shared triplet state.
    static const NamedBasis basis = [] {
        std::vector<StateVector> v;
        v.reserve(8);
        for (int k = 0; k < 8; ++k) {
            const int a = (k >> 2) & 1;
            const double inner = ((k >> 1) & 1) ? -1.0 : 1.0;
            const double outer = (k & 1) ? -1.0 : 1.0;
            std::vector<cplx> amp(8, cplx{0.0, 0.0});
            const unsigned lead = static_cast<unsigned>(a) << 2;
            const unsigned lead_bar = static_cast<unsigned>(1 - a) << 2;
            amp[lead | 0b00] = kHalf;
            amp[lead | 0b11] = inner * kHalf;
            amp[lead_bar | 0b01] = outer * kHalf;
            amp[lead_bar | 0b10] = outer * inner * kHalf;
            v.push_back(StateVector::from_amplitudes(3, std::move(amp)));
        }
        return NamedBasis::make("phi", qsim::BasisLabel::Phi, std::move(v));
    }();
    return basis;
}

const NamedBasis& computational_basis(int num_qubits) {
    static const auto make = [](int n) {
        std::vector<StateVector> v;
        const std::size_t dim = std::size_t{1} << n;
        v.reserve(dim);
        for (std::size_t k = 0; k < dim; ++k) v.push_back(StateVector::basis_state(n, k));
        return NamedBasis::make("computational", qsim::BasisLabel::Computational, std::move(v));
    };
    static const NamedBasis b1 = make(1);
    static const NamedBasis b2 = make(2);
    static const NamedBasis b3 = make(3);
    switch (num_qubits) {
    case 1: return b1;
    case 2: return b2;
    case 3: return b3;
    default: throw std::out_of_range("computational basis cached for 1..3 qubits");
    }
}

} // namespace sqss::states
