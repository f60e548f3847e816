#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "sqss/statevector.hpp"
#include "sqss/states.hpp"
#include "test_support.hpp"

using namespace sqss;
using qsim::cplx;
using qsim::Rng;
using qsim::StateVector;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void check_state(const StateVector& s, const oracle::Vec& want, double tol = 1e-12) {
    REQUIRE(s.dim() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(std::abs(s.amplitude(i) - want[i]) <= tol);
    }
}

} // namespace

TEST_CASE("hadamard on |0> gives the uniform superposition") {
    StateVector s(1);
    qsim::apply_gate(s, qsim::gates::hadamard(), 0);
    check_state(s, {cplx{kInvSqrt2, 0}, cplx{kInvSqrt2, 0}});
}

TEST_CASE("cnot with qubit 0 as control flips |10> to |11>") {
    auto s = StateVector::basis_state(2, 0b10);
    qsim::apply_gate(s, qsim::gates::cnot(), 0, 1);
    check_state(s, {cplx{0, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}});
}

TEST_CASE("the preparation circuit reproduces the frozen amplitude table") {
    // |0> (x) PhiPlus, H on qubit 0, CNOT 0->1
    oracle::Vec v(8, cplx{0, 0});
    v[0b000] = kInvSqrt2;
    v[0b011] = kInvSqrt2;
    auto s = StateVector::from_amplitudes(3, v);
    qsim::apply_gate(s, qsim::gates::hadamard(), 0);
    // intermediate: (1/sqrt2)(|0> + |1>) (x) PhiPlus
    check_state(s, {cplx{0.5, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0.5, 0}, cplx{0.5, 0},
                    cplx{0, 0}, cplx{0, 0}, cplx{0.5, 0}});
    qsim::apply_gate(s, qsim::gates::cnot(), 0, 1);
    check_state(s, oracle::psi_table());
}

TEST_CASE("gate application matches the dense Kronecker oracle") {
    Rng rng(2024);
    for (int n = 1; n <= 4; ++n) {
        for (int rep = 0; rep < 20; ++rep) {
            const auto v = oracle::random_state(std::size_t{1} << n, rng);

            // single-qubit
            for (int q = 0; q < n; ++q) {
                const auto u = oracle::random_unitary(2, rng);
                const cplx g[4] = {u[0][0], u[0][1], u[1][0], u[1][1]};
                auto s = oracle::to_state(n, v);
                qsim::apply_gate(s, qsim::Gate2::make(g), q);
                const auto want = oracle::matvec(oracle::embed_1q(g, n, q), v);
                check_state(s, want, 1e-11);
                CHECK(std::abs(s.norm_sq() - 1.0) < 1e-10);
            }
            // two-qubit on every ordered pair
            if (n >= 2) {
                const auto u = oracle::random_unitary(4, rng);
                cplx g[16];
                for (int i = 0; i < 4; ++i)
                    for (int j = 0; j < 4; ++j) g[i * 4 + j] = u[i][j];
                for (int qa = 0; qa < n; ++qa) {
                    for (int qb = 0; qb < n; ++qb) {
                        if (qa == qb) continue;
                        auto s = oracle::to_state(n, v);
                        qsim::apply_gate(s, qsim::Gate4::make(g), qa, qb);
                        const auto want = oracle::matvec(oracle::embed_2q(g, n, qa, qb), v);
                        check_state(s, want, 1e-11);
                    }
                }
            }
        }
    }
}

TEST_CASE("non-unitary matrices and bad targets are rejected") {
    const cplx bad2[4] = {{1, 0}, {1, 0}, {0, 0}, {1, 0}};
    CHECK_THROWS_AS(qsim::Gate2::make(bad2), std::invalid_argument);
    cplx bad4[16] = {};
    CHECK_THROWS_AS(qsim::Gate4::make(bad4), std::invalid_argument);

    StateVector s(2);
    CHECK_THROWS_AS(qsim::apply_gate(s, qsim::gates::hadamard(), 2), std::out_of_range);
    CHECK_THROWS_AS(qsim::apply_gate(s, qsim::gates::cnot(), 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(qsim::apply_gate(s, qsim::gates::cnot(), 0, 5), std::out_of_range);
}

TEST_CASE("measuring the uniform superposition is a fair coin") {
    Rng rng(99);
    int ones = 0;
    const int samples = 100000;
    for (int i = 0; i < samples; ++i) {
        StateVector s(1);
        qsim::apply_gate(s, qsim::gates::hadamard(), 0);
        ones += qsim::collapse_computational(s, 0, rng);
    }
    const double sigma = std::sqrt(0.25 / samples);
    CHECK(std::abs(ones / double(samples) - 0.5) < 3 * sigma);
}

TEST_CASE("measuring Bob's qubit of the triplet collapses to the projected state") {
    // oracle: project the frozen table onto B=0 / B=1 and renormalize by hand
    const auto psi = oracle::psi_table();
    for (int want_b = 0; want_b < 2; ++want_b) {
        oracle::Vec proj(8, cplx{0, 0});
        for (std::size_t k = 0; k < 8; ++k) {
            if (static_cast<int>((k >> 1) & 1) == want_b) proj[k] = psi[k];
        }
        const double norm = std::sqrt(oracle::norm_sq(proj));
        for (auto& a : proj) a /= norm;

        // drive sampling until the desired branch comes up
        for (std::uint64_t seed = 0;; ++seed) {
            Rng rng(seed);
            auto m = qsim::measure_computational(oracle::to_state(3, psi), 1, rng);
            if (m.outcome_index == want_b) {
                check_state(m.post_state, proj);
                break;
            }
            REQUIRE(seed < 64); // a fair branch cannot dodge this long
        }
    }
}

TEST_CASE("measuring an eigenstate never flips it") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        auto s = StateVector::basis_state(2, 0b00);
        CHECK(qsim::collapse_computational(s, 0, rng) == 0);
        check_state(s, {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0, 0}});
    }
}

TEST_CASE("bell measurement of PhiPlus is deterministic") {
    Rng rng(1);
    const std::array<int, 2> targets{0, 1};
    for (int i = 0; i < 100; ++i) {
        auto s = states::bell_phi_plus();
        CHECK(qsim::collapse_in_basis(s, states::bell_basis(), targets, rng) == states::kPhiPlus);
    }
}

TEST_CASE("phi measurement of the triplet always yields outcome 0") {
    Rng rng(2);
    const std::array<int, 3> targets{0, 1, 2};
    for (int i = 0; i < 100; ++i) {
        auto s = states::prepare_psi();
        CHECK(qsim::collapse_in_basis(s, states::phi_basis(), targets, rng) == 0);
    }
}

TEST_CASE("bell measurement of |00> splits evenly between PhiPlus and PhiMinus") {
    // oracle: expand |00> in the frozen Bell table by hand
    const auto bell = oracle::bell_table();
    oracle::Vec zz(4, cplx{0, 0});
    zz[0] = 1.0;
    std::array<double, 4> want{};
    for (int i = 0; i < 4; ++i) want[i] = std::norm(oracle::dot_conj(bell[i], zz));
    CHECK(want[0] == doctest::Approx(0.5));
    CHECK(want[1] == doctest::Approx(0.5));
    CHECK(want[2] == doctest::Approx(0.0));
    CHECK(want[3] == doctest::Approx(0.0));

    Rng rng(3);
    const std::array<int, 2> targets{0, 1};
    std::array<int, 4> counts{};
    const int samples = 100000;
    for (int i = 0; i < samples; ++i) {
        auto s = StateVector::basis_state(2, 0b00);
        counts[qsim::collapse_in_basis(s, states::bell_basis(), targets, rng)]++;
    }
    CHECK(counts[2] == 0);
    CHECK(counts[3] == 0);
    const double sigma = std::sqrt(0.25 / samples);
    CHECK(std::abs(counts[0] / double(samples) - 0.5) < 3 * sigma);
}

TEST_CASE("born_distribution matches the frozen-table projections") {
    const std::array<int, 3> targets{0, 1, 2};

    // triplet in the phi basis: all weight on phi0
    auto probs = qsim::born_distribution(states::prepare_psi(), states::phi_basis(), targets);
    CHECK(probs[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 1; i < 8; ++i) CHECK(probs[i] == doctest::Approx(0.0).epsilon(1e-12));
    double sum = 0;
    for (double p : probs) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-10);

    // |0>_A (x) PhiPlus_BC against the frozen phi table
    oracle::Vec v(8, cplx{0, 0});
    v[0b000] = kInvSqrt2;
    v[0b011] = kInvSqrt2;
    const auto phi = oracle::phi_table();
    std::array<double, 8> want{};
    for (int i = 0; i < 8; ++i) want[i] = std::norm(oracle::dot_conj(phi[i], v));
    CHECK(want[0] == doctest::Approx(0.5));
    probs = qsim::born_distribution(oracle::to_state(3, v), states::phi_basis(), targets);
    for (int i = 0; i < 8; ++i) CHECK(probs[i] == doctest::Approx(want[i]).epsilon(1e-12));

    // computational distribution of |1>
    const std::array<int, 1> one{0};
    probs = qsim::born_distribution(StateVector::basis_state(1, 1),
                                    states::computational_basis(1), one);
    CHECK(probs[0] == doctest::Approx(0.0));
    CHECK(probs[1] == doctest::Approx(1.0));
}

TEST_CASE("born_distribution on a measured subset of a larger register") {
    // Bell statistics of the (Alice, Charlie) pair inside the triplet:
    // regrouping the state gives PhiPlus or PsiPlus at 1/2 each
    const std::array<int, 2> ac{0, 2};
    const auto probs =
        qsim::born_distribution(states::prepare_psi(), states::bell_basis(), ac);
    CHECK(probs[states::kPhiPlus] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[states::kPsiPlus] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(probs[states::kPhiMinus] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(probs[states::kPsiMinus] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("basis validation rejects broken inputs") {
    std::vector<StateVector> not_orthogonal;
    not_orthogonal.push_back(StateVector::basis_state(1, 0));
    not_orthogonal.push_back(StateVector::basis_state(1, 0));
    CHECK_THROWS_AS(
        qsim::NamedBasis::make("bad", qsim::BasisLabel::Custom, std::move(not_orthogonal)),
        std::invalid_argument);

    // dimension mismatch: 2-qubit basis against 1 target
    StateVector s(2);
    Rng rng(1);
    const std::array<int, 1> targets{0};
    CHECK_THROWS_AS(qsim::collapse_in_basis(s, states::bell_basis(), targets, rng),
                    std::invalid_argument);
    const std::array<int, 2> dup{0, 0};
    CHECK_THROWS_AS(qsim::collapse_in_basis(s, states::bell_basis(), dup, rng),
                    std::invalid_argument);
}

TEST_CASE("extend_with_ancilla appends at the highest qubit index") {
    const auto psi = states::prepare_psi();
    auto ext = qsim::extend_with_ancilla(psi, 0);
    CHECK(ext.num_qubits() == 4);
    for (std::uint64_t k = 0; k < 16; ++k) {
        const cplx want = (k & 1) ? cplx{0, 0} : psi.amplitude(k >> 1);
        CHECK(std::abs(ext.amplitude(k) - want) < 1e-12);
    }

    auto one = qsim::extend_with_ancilla(StateVector::basis_state(1, 0), 1);
    check_state(one, {cplx{0, 0}, cplx{1, 0}, cplx{0, 0}, cplx{0, 0}});

    auto twice = qsim::extend_with_ancilla(qsim::extend_with_ancilla(psi, 0), 1);
    CHECK(twice.num_qubits() == 5);
    CHECK(std::abs(twice.norm_sq() - 1.0) < 1e-10);

    auto full = StateVector(6);
    CHECK_THROWS_AS(qsim::extend_with_ancilla(full, 0), std::length_error);
}

TEST_CASE("collapse is idempotent in both measurement flavors") {
    Rng rng(77);
    const std::array<int, 2> pair{0, 1};
    for (int rep = 0; rep < 300; ++rep) {
        auto v = oracle::random_state(8, rng);
        auto s = oracle::to_state(3, v);
        const int first = qsim::collapse_computational(s, 2, rng);
        CHECK(qsim::collapse_computational(s, 2, rng) == first);

        auto t = oracle::to_state(3, v);
        const int b1 = qsim::collapse_in_basis(t, states::bell_basis(), pair, rng);
        CHECK(qsim::collapse_in_basis(t, states::bell_basis(), pair, rng) == b1);
        CHECK(std::abs(t.norm_sq() - 1.0) < 1e-10);
    }
}

TEST_CASE("built-in bases resolve the identity on random states") {
    Rng rng(31337);
    for (int rep = 0; rep < 200; ++rep) {
        auto v = oracle::random_state(8, rng);
        auto s = oracle::to_state(3, v);
        const std::array<int, 3> t3{0, 1, 2};
        const std::array<int, 2> t2{1, 2};
        const std::array<int, 1> t1{0};
        for (const auto& probs :
             {qsim::born_distribution(s, states::phi_basis(), t3),
              qsim::born_distribution(s, states::bell_basis(), t2),
              qsim::born_distribution(s, states::computational_basis(1), t1)}) {
            double sum = 0;
            for (double p : probs) sum += p;
            CHECK(std::abs(sum - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("phi-basis sampling frequencies match the Born distribution") {
    // |0>_A (x) PhiPlus_BC splits its weight between phi0 and phi1
    oracle::Vec v(8, cplx{0, 0});
    v[0b000] = kInvSqrt2;
    v[0b011] = kInvSqrt2;
    const auto state = oracle::to_state(3, v);
    const std::array<int, 3> targets{0, 1, 2};
    const auto probs = qsim::born_distribution(state, states::phi_basis(), targets);

    Rng rng(515151);
    std::array<int, 8> counts{};
    const int samples = 100000;
    for (int i = 0; i < samples; ++i) {
        auto s = state;
        counts[qsim::collapse_in_basis(s, states::phi_basis(), targets, rng)]++;
    }
    for (int k = 0; k < 8; ++k) {
        const double f = counts[k] / double(samples);
        const double sigma = std::sqrt(std::max(probs[k] * (1 - probs[k]), 0.0) / samples);
        CHECK(std::abs(f - probs[k]) <= 3 * sigma + 1e-12);
    }
    CHECK(counts[0] + counts[1] == samples);
}

TEST_CASE("zero-probability branches are never sampled") {
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        auto s = StateVector::basis_state(1, 0);
        CHECK(qsim::collapse_computational(s, 0, rng) == 0);
    }
}
