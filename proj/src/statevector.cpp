#include "sqss/statevector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "sqss/kernels.hpp"

namespace sqss::qsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Outcome slivers below this are rounding noise of an exactly-zero projection
// and are excluded from sampling.
constexpr double kZeroProb = 1e-24;

void check_qubit_count(int n) {
    if (n < 1 || n > kMaxQubits) {
        throw std::out_of_range("qubit count must be in 1.." + std::to_string(kMaxQubits));
    }
}

void check_target(const StateVector& s, int q) {
    if (q < 0 || q >= s.num_qubits()) throw std::out_of_range("target qubit out of range");
}

// Samples an index from `probs`, skipping probability-0 branches. `total`
// should be ~1; u is scaled by it so rounding in the sum cannot push the draw
// past the last nonzero branch.
int sample_outcome(std::span<const double> probs, Rng& rng) {
    double total = 0.0;
    for (double p : probs) total += p;
    const double u = rng.next_double() * total;
    double cum = 0.0;
    int last_nonzero = -1;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < kZeroProb) continue;
        last_nonzero = static_cast<int>(i);
        cum += probs[i];
        if (u < cum) return last_nonzero;
    }
    if (last_nonzero < 0) throw std::runtime_error("all outcomes have zero probability");
    return last_nonzero;
}

} // namespace

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
    check_qubit_count(num_qubits);
    amps_.assign(std::size_t{1} << num_qubits, cplx{0.0, 0.0});
    amps_[0] = cplx{1.0, 0.0};
}

StateVector StateVector::basis_state(int num_qubits, std::uint64_t index) {
    StateVector s(num_qubits);
    if (index >= s.dim()) throw std::out_of_range("basis index out of range");
    s.amps_[0] = cplx{0.0, 0.0};
    s.amps_[index] = cplx{1.0, 0.0};
    return s;
}

StateVector StateVector::from_amplitudes(int num_qubits, std::vector<cplx> amps) {
    check_qubit_count(num_qubits);
    if (amps.size() != (std::size_t{1} << num_qubits)) {
        throw std::invalid_argument("amplitude vector length must be 2^num_qubits");
    }
    StateVector s;
    s.num_qubits_ = num_qubits;
    s.amps_ = std::move(amps);
    if (std::abs(s.norm_sq() - 1.0) > kUnitaryTol) {
        throw std::invalid_argument("amplitudes are not normalized");
    }
    return s;
}

double StateVector::norm_sq() const {
    return kernels::active().norm_sq(amps_.data(), amps_.size());
}

namespace {

bool is_unitary(const cplx* m, int n) {
    // rows orthonormal: M M^dagger = I
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            cplx s{0.0, 0.0};
            for (int k = 0; k < n; ++k) s += m[i * n + k] * std::conj(m[j * n + k]);
            const cplx want = (i == j) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
            if (std::abs(s - want) > kUnitaryTol) return false;
        }
    }
    return true;
}

} // namespace

Gate2 Gate2::make(const cplx m[4], std::string name) {
    if (!is_unitary(m, 2)) throw std::invalid_argument("2x2 gate is not unitary");
    Gate2 g;
    std::copy(m, m + 4, g.m_);
    g.name_ = std::move(name);
    return g;
}

Gate4 Gate4::make(const cplx m[16], std::string name) {
    if (!is_unitary(m, 4)) throw std::invalid_argument("4x4 gate is not unitary");
    Gate4 g;
    std::copy(m, m + 16, g.m_);
    g.name_ = std::move(name);
    return g;
}

namespace gates {

const Gate2& hadamard() {
    static const Gate2 g = [] {
        const cplx m[4] = {{kInvSqrt2, 0}, {kInvSqrt2, 0}, {kInvSqrt2, 0}, {-kInvSqrt2, 0}};
        return Gate2::make(m, "H");
    }();
    return g;
}

const Gate2& pauli_x() {
    static const Gate2 g = [] {
        const cplx m[4] = {{0, 0}, {1, 0}, {1, 0}, {0, 0}};
        return Gate2::make(m, "X");
    }();
    return g;
}

const Gate2& identity() {
    static const Gate2 g = [] {
        const cplx m[4] = {{1, 0}, {0, 0}, {0, 0}, {1, 0}};
        return Gate2::make(m, "I");
    }();
    return g;
}

const Gate4& cnot() {
    static const Gate4 g = [] {
        cplx m[16] = {};
        m[0 * 4 + 0] = 1; // |00> -> |00>
        m[1 * 4 + 1] = 1; // |01> -> |01>
        m[2 * 4 + 3] = 1; // |10> -> |11>
        m[3 * 4 + 2] = 1; // |11> -> |10>
        return Gate4::make(m, "CNOT");
    }();
    return g;
}

} // namespace gates

void apply_gate(StateVector& state, const Gate2& gate, int target) {
    check_target(state, target);
    kernels::active().pair_transform(state.data(), state.dim(), state.stride_of(target),
                                     gate.matrix());
}

void apply_gate(StateVector& state, const Gate4& gate, int target_a, int target_b) {
    check_target(state, target_a);
    check_target(state, target_b);
    if (target_a == target_b) throw std::invalid_argument("two-qubit gate targets must be distinct");

    const std::uint64_t ma = state.stride_of(target_a);
    const std::uint64_t mb = state.stride_of(target_b);
    const cplx* m = gate.matrix();
    cplx* a = state.data();
    const std::size_t dim = state.dim();
    // quads are small and irregular; this loop stays scalar
    for (std::size_t k = 0; k < dim; ++k) {
        if (k & (ma | mb)) continue;
        const std::size_t i00 = k;
        const std::size_t i01 = k | mb;
        const std::size_t i10 = k | ma;
        const std::size_t i11 = k | ma | mb;
        const cplx v0 = a[i00], v1 = a[i01], v2 = a[i10], v3 = a[i11];
        a[i00] = m[0] * v0 + m[1] * v1 + m[2] * v2 + m[3] * v3;
        a[i01] = m[4] * v0 + m[5] * v1 + m[6] * v2 + m[7] * v3;
        a[i10] = m[8] * v0 + m[9] * v1 + m[10] * v2 + m[11] * v3;
        a[i11] = m[12] * v0 + m[13] * v1 + m[14] * v2 + m[15] * v3;
    }
}

std::string to_string(BasisLabel label) {
    switch (label) {
    case BasisLabel::Computational: return "computational";
    case BasisLabel::Bell: return "bell";
    case BasisLabel::Phi: return "phi";
    case BasisLabel::Custom: return "custom";
    }
    return "?";
}

NamedBasis NamedBasis::make(std::string label, BasisLabel kind,
                            std::vector<StateVector> vectors) {
    if (vectors.empty()) throw std::invalid_argument("basis has no vectors");
    const int nq = vectors.front().num_qubits();
    if (vectors.size() != (std::size_t{1} << nq)) {
        throw std::invalid_argument("basis must have 2^qubits vectors");
    }
    const auto& ops = kernels::active();
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].num_qubits() != nq) {
            throw std::invalid_argument("basis vectors differ in qubit count");
        }
        for (std::size_t j = 0; j <= i; ++j) {
            const cplx g = ops.dot_conj(vectors[i].data(), vectors[j].data(), vectors[i].dim());
            const cplx want = (i == j) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
            if (std::abs(g - want) > kUnitaryTol) {
                throw std::invalid_argument("basis vectors are not orthonormal");
            }
        }
    }
    NamedBasis b;
    b.label_ = std::move(label);
    b.kind_ = kind;
    b.num_qubits_ = nq;
    b.vectors_ = std::move(vectors);
    return b;
}

int collapse_computational(StateVector& state, int target, Rng& rng) {
    check_target(state, target);
    const auto& ops = kernels::active();
    const std::uint64_t stride = state.stride_of(target);
    const double total = ops.norm_sq(state.data(), state.dim());
    const double p1 = ops.bit_marginal(state.data(), state.dim(), stride);
    const double p0 = total - p1;

    int outcome;
    if (p1 < kZeroProb) {
        outcome = 0;
    } else if (p0 < kZeroProb) {
        outcome = 1;
    } else {
        outcome = rng.next_double() * total < p1 ? 1 : 0;
    }
    const double kept = outcome ? p1 : p0;
    ops.collapse_bit(state.data(), state.dim(), stride, outcome, 1.0 / std::sqrt(kept));
    return outcome;
}

namespace {

// Index split for measuring a target subset: global = cpart[m] | tpart[s],
// where s indexes the target subspace (targets[0] = MSB) and m the complement.
struct SubspaceMap {
    std::size_t t_dim = 1, c_dim = 1;
    std::array<std::uint64_t, 64> tpart{};
    std::array<std::uint64_t, 64> cpart{};
};

SubspaceMap build_subspace_map(const StateVector& state, std::span<const int> targets) {
    const int n = state.num_qubits();
    const int t = static_cast<int>(targets.size());
    std::uint64_t used = 0;
    for (int q : targets) {
        if (q < 0 || q >= n) throw std::out_of_range("measurement target out of range");
        const std::uint64_t m = state.stride_of(q);
        if (used & m) throw std::invalid_argument("duplicate measurement target");
        used |= m;
    }
    SubspaceMap map;
    map.t_dim = std::size_t{1} << t;
    map.c_dim = std::size_t{1} << (n - t);
    for (std::size_t s = 0; s < map.t_dim; ++s) {
        std::uint64_t g = 0;
        for (int j = 0; j < t; ++j) {
            if ((s >> (t - 1 - j)) & 1u) g |= state.stride_of(targets[j]);
        }
        map.tpart[s] = g;
    }
    // complement qubits in ascending index order
    std::array<std::uint64_t, kMaxQubits> comp_strides{};
    int c = 0;
    for (int q = 0; q < n; ++q) {
        const std::uint64_t m = state.stride_of(q);
        if (!(used & m)) comp_strides[c++] = m;
    }
    for (std::size_t m = 0; m < map.c_dim; ++m) {
        std::uint64_t g = 0;
        for (int j = 0; j < c; ++j) {
            if ((m >> (c - 1 - j)) & 1u) g |= comp_strides[j];
        }
        map.cpart[m] = g;
    }
    return map;
}

// Projection coefficients coeff[i*c_dim + m] = <b_i (x) m | state> and the
// resulting outcome probabilities.
struct Projection {
    SubspaceMap map;
    std::array<cplx, 64> coeff{};
    std::vector<double> probs;
};

Projection project_onto_basis(const StateVector& state, const NamedBasis& basis,
                              std::span<const int> targets) {
    if (static_cast<std::size_t>(basis.num_qubits()) != targets.size()) {
        throw std::invalid_argument("basis dimension does not match target count");
    }
    Projection pr;
    pr.map = build_subspace_map(state, targets);
    const auto& ops = kernels::active();
    std::array<cplx, 64> gather{};
    pr.probs.assign(basis.size(), 0.0);
    for (std::size_t m = 0; m < pr.map.c_dim; ++m) {
        for (std::size_t s = 0; s < pr.map.t_dim; ++s) {
            gather[s] = state.amplitude(pr.map.cpart[m] | pr.map.tpart[s]);
        }
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const cplx c = ops.dot_conj(basis.vector(i).data(), gather.data(), pr.map.t_dim);
            pr.coeff[i * pr.map.c_dim + m] = c;
            pr.probs[i] += std::norm(c);
        }
    }
    return pr;
}

} // namespace

int collapse_in_basis(StateVector& state, const NamedBasis& basis,
                      std::span<const int> targets, Rng& rng) {
    Projection pr = project_onto_basis(state, basis, targets);
    const int outcome = sample_outcome(pr.probs, rng);

    const auto& ops = kernels::active();
    const double inv = 1.0 / std::sqrt(pr.probs[outcome]);
    std::array<cplx, 64> block{};
    std::fill(state.data(), state.data() + state.dim(), cplx{0.0, 0.0});
    for (std::size_t m = 0; m < pr.map.c_dim; ++m) {
        const cplx c = pr.coeff[outcome * pr.map.c_dim + m] * inv;
        ops.store_scaled(block.data(), basis.vector(outcome).data(), pr.map.t_dim, c);
        for (std::size_t s = 0; s < pr.map.t_dim; ++s) {
            state.data()[pr.map.cpart[m] | pr.map.tpart[s]] = block[s];
        }
    }
    return outcome;
}

MeasurementOutcome measure_computational(StateVector state, int target, Rng& rng) {
    const int outcome = collapse_computational(state, target, rng);
    return MeasurementOutcome{BasisLabel::Computational, outcome, std::move(state)};
}

MeasurementOutcome measure_in_basis(StateVector state, const NamedBasis& basis,
                                    std::span<const int> targets, Rng& rng) {
    const int outcome = collapse_in_basis(state, basis, targets, rng);
    return MeasurementOutcome{basis.kind(), outcome, std::move(state)};
}

std::vector<double> born_distribution(const StateVector& state, const NamedBasis& basis,
                                      std::span<const int> targets) {
    return project_onto_basis(state, basis, targets).probs;
}

StateVector extend_with_ancilla(const StateVector& state, int ancilla_value) {
    if (state.num_qubits() >= kMaxQubits) {
        throw std::length_error("register capacity exceeded");
    }
    if (ancilla_value != 0 && ancilla_value != 1) {
        throw std::invalid_argument("ancilla value must be 0 or 1");
    }
    std::vector<cplx> amps(state.dim() * 2, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < state.dim(); ++k) {
        amps[(k << 1) | static_cast<unsigned>(ancilla_value)] = state.amplitude(k);
    }
    return StateVector::from_amplitudes(state.num_qubits() + 1, std::move(amps));
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("fidelity requires equal qubit counts");
    }
    return std::norm(kernels::active().dot_conj(a.data(), b.data(), a.dim()));
}

} // namespace sqss::qsim
