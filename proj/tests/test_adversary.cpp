#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sqss/adversary.hpp"
#include "sqss/protocol.hpp"
#include "sqss/states.hpp"

using namespace sqss;
using namespace sqss::adversary;
using protocol::Choice;
using protocol::SessionConfig;
using protocol::Variant;

namespace {

SessionConfig make_config(Variant v, int n, std::uint64_t seed, bool receipt_first = true) {
    SessionConfig cfg;
    cfg.variant = v;
    cfg.n_triplets = n;
    cfg.seed = seed;
    cfg.announce_receipt_before_disclosure = receipt_first;
    return cfg;
}

struct Tally {
    long long escaped = 0;
    long long trials = 0;
    std::array<long long, 4> case_rounds{};
    std::array<long long, 4> case_errors{};
    long long both_share = 0;
    long long guesses = 0;
    long long correct = 0;
    std::array<std::array<long long, 2>, 2> joint{};
};

template <typename MakeAttack>
Tally sweep(const SessionConfig& base, MakeAttack make, int trials) {
    Tally t;
    for (int i = 0; i < trials; ++i) {
        SessionConfig cfg = base;
        cfg.seed = base.seed + static_cast<std::uint64_t>(i);
        auto attack = make();
        const auto result = protocol::run_session(cfg, *attack);
        const auto sc = score(*attack, result);
        t.trials++;
        t.escaped += sc.escaped ? 1 : 0;
        for (int k = 0; k < 4; ++k) {
            t.case_rounds[k] += sc.attacked_case_rounds[k];
            t.case_errors[k] += sc.attacked_case_errors[k];
        }
        t.both_share += sc.both_share_attacked;
        t.guesses += sc.guesses_scored;
        t.correct += sc.bits_learned;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) t.joint[a][b] += sc.alice_bob_joint[a][b];
    }
    return t;
}

double rate(long long num, long long den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

double sigma3(double p, long long n) { return 3.0 * std::sqrt(p * (1 - p) / n); }

double plugin_mi(const std::array<std::array<long long, 2>, 2>& j) {
    const double n = double(j[0][0] + j[0][1] + j[1][0] + j[1][1]);
    double mi = 0;
    const double pa[2] = {(j[0][0] + j[0][1]) / n, (j[1][0] + j[1][1]) / n};
    const double pb[2] = {(j[0][0] + j[1][0]) / n, (j[0][1] + j[1][1]) / n};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double p = j[a][b] / n;
            if (p > 0) mi += p * std::log2(p / (pa[a] * pb[b]));
        }
    return mi;
}

} // namespace

TEST_CASE("honest strategy leaves no trace and learns nothing") {
    const auto cfg = make_config(Variant::RandomizationBased, 256, 42);
    auto attack = honest();
    const auto with_attack = protocol::run_session(cfg, *attack);
    const auto without = protocol::run_session(cfg);

    const auto sc = score(*attack, with_attack);
    CHECK(sc.escaped);
    CHECK(sc.bits_learned == 0);
    CHECK(sc.detection_rate == 0.0);
    CHECK(sc.attacked_rounds == 0);

    REQUIRE(with_attack.records.size() == without.records.size());
    for (std::size_t i = 0; i < without.records.size(); ++i) {
        CHECK(with_attack.records[i].bob_bit == without.records[i].bob_bit);
        CHECK(with_attack.records[i].alice_bit == without.records[i].alice_bit);
        CHECK(with_attack.records[i].error_flag == without.records[i].error_flag);
    }
    CHECK(with_attack.alice_secret == without.alice_secret);
}

TEST_CASE("dishonest Bob escapes at 3/4 per position and is caught via Bell checks") {
    const auto cfg = make_config(Variant::RandomizationBased, 16, 1000);
    const int trials = 20000;
    const auto t = sweep(cfg, [] { return dishonest_bob(1); }, trials);

    // per-position escape probability 3/4 (single attacked position)
    const double escape = rate(t.escaped, t.trials);
    CHECK(std::abs(escape - 0.75) < sigma3(0.75, trials));

    // detection happens only when Charlie CHECKed (attacked case-2 rounds),
    // and then with probability 1/2
    CHECK(t.case_errors[0] == 0);
    CHECK(t.case_rounds[2] == 0); // Bob always SHAREs at attacked positions
    CHECK(t.case_rounds[3] == 0);
    const double det2 = rate(t.case_errors[1], t.case_rounds[1]);
    CHECK(std::abs(det2 - 0.5) < sigma3(0.5, t.case_rounds[1]));

    // when Charlie SHAREd the guess is always right
    CHECK(t.guesses == t.both_share);
    CHECK(t.correct == t.guesses);
    CHECK(t.both_share > 0);
}

TEST_CASE("dishonest Bob across more positions escapes at (3/4)^l") {
    const auto cfg = make_config(Variant::RandomizationBased, 16, 5000);
    const int trials = 20000;
    const auto t = sweep(cfg, [] { return dishonest_bob(4); }, trials);
    const double ref = std::pow(0.75, 4);
    CHECK(std::abs(rate(t.escaped, t.trials) - ref) < sigma3(ref, trials));
}

TEST_CASE("dishonest Bob also works against measure-resend") {
    const auto cfg = make_config(Variant::MeasureResend, 16, 1500);
    const int trials = 20000;
    const auto t = sweep(cfg, [] { return dishonest_bob(1); }, trials);
    CHECK(std::abs(rate(t.escaped, t.trials) - 0.75) < sigma3(0.75, trials));
    CHECK(t.correct == t.guesses);
}

TEST_CASE("attacked position budget follows the paper's l <= N/4") {
    auto cfg = make_config(Variant::RandomizationBased, 16, 1);
    auto attack = dishonest_bob(5); // 5 > 16/4
    CHECK_THROWS_AS(protocol::run_session(cfg, *attack), std::invalid_argument);
    auto eve = eve_bell(5);
    CHECK_THROWS_AS(protocol::run_session(cfg, *eve), std::invalid_argument);
}

TEST_CASE("Eve's Bell interception escapes at 5/8 per position") {
    const auto cfg = make_config(Variant::RandomizationBased, 16, 2000);
    const int trials = 20000;
    const auto t = sweep(cfg, [] { return eve_bell(1); }, trials);

    const double escape = rate(t.escaped, t.trials);
    CHECK(std::abs(escape - 0.625) < sigma3(0.625, trials));

    // conditional detection 1/2 in each checked case
    for (int k : {1, 2, 3}) {
        const double det = rate(t.case_errors[k], t.case_rounds[k]);
        CHECK(std::abs(det - 0.5) < sigma3(0.5, t.case_rounds[k]));
    }
    CHECK(t.case_errors[0] == 0); // both-SHARE rounds stay consistent

    // the Bell outcome tells Eve Alice's bit outright on both-SHARE rounds
    CHECK(t.guesses == t.both_share);
    CHECK(t.correct == t.guesses);
}

TEST_CASE("Eve's Bell outcome on the honest state is never PhiMinus/PsiMinus") {
    qsim::Rng rng(77);
    for (int i = 0; i < 500; ++i) {
        protocol::TripletRegister t;
        t.position = 1;
        t.reg = states::prepare_psi();
        OutboundView view(t, rng);
        const int outcome = view.bell_measure_pair();
        CHECK((outcome == states::kPhiPlus || outcome == states::kPsiPlus));
        // collapsed Alice qubit matches the guess rule
        const int alice = qsim::collapse_computational(t.reg, 0, rng);
        CHECK(alice == (outcome == states::kPhiPlus ? 0 : 1));
    }
}

TEST_CASE("compliant CNOT wiretap is caught through the entangled ancilla") {
    auto cfg = make_config(Variant::RandomizationBased, 8, 3000);
    cfg.error_threshold = 0.999; // sessions keep going; we want round statistics
    const int trials = 20000;
    const auto t = sweep(
        cfg, [] { return eve_cnot_ancilla({true, false}, CnotTiming::Compliant); }, trials);

    // Action4: P(phi0) drops to 1/2 with one unreverted Bob ancilla
    const double det4 = rate(t.case_errors[3], t.case_rounds[3]);
    CHECK(std::abs(det4 - 0.5) < sigma3(0.5, t.case_rounds[3]));

    // Action3 (Bob's qubit reflected, ancilla attached): same exposure
    const double det3 = rate(t.case_errors[2], t.case_rounds[2]);
    CHECK(std::abs(det3 - 0.5) < sigma3(0.5, t.case_rounds[2]));

    // Action2 (Bob measured; ancilla is a collapsed product factor): silent
    CHECK(t.case_errors[1] == 0);
    CHECK(t.case_errors[0] == 0);

    // the lone ancilla reveals Bob's bit but nothing about Alice's
    CHECK(t.joint[0][0] + t.joint[0][1] + t.joint[1][0] + t.joint[1][1] == t.both_share);
    CHECK(plugin_mi(t.joint) < 1e-3);
    // single-party wiretap cannot form an Alice guess
    CHECK(t.guesses == 0);
}

TEST_CASE("broken-ordering CNOT wiretap is invisible and learns every SHARE bit") {
    auto cfg = make_config(Variant::RandomizationBased, 32, 4000, /*receipt_first=*/false);
    const int trials = 300;
    const auto t = sweep(
        cfg, [] { return eve_cnot_ancilla({true, true}, CnotTiming::BrokenOrdering); }, trials);

    for (int k = 0; k < 4; ++k) CHECK(t.case_errors[k] == 0);
    CHECK(t.escaped == t.trials);
    CHECK(t.both_share > 0);
    CHECK(t.guesses == t.both_share);
    CHECK(t.correct == t.both_share);
}

TEST_CASE("broken-ordering CNOT drains the measure-resend variant too") {
    auto cfg = make_config(Variant::MeasureResend, 32, 4500, /*receipt_first=*/false);
    const int trials = 300;
    const auto t = sweep(
        cfg, [] { return eve_cnot_ancilla({true, true}, CnotTiming::BrokenOrdering); }, trials);
    for (int k = 0; k < 4; ++k) CHECK(t.case_errors[k] == 0);
    CHECK(t.escaped == t.trials);
    CHECK(t.both_share > 0);
    CHECK(t.correct == t.both_share);
}

TEST_CASE("broken-ordering CNOT against the compliant step order is rejected") {
    const auto cfg = make_config(Variant::RandomizationBased, 16, 1, /*receipt_first=*/true);
    auto attack = eve_cnot_ancilla({true, true}, CnotTiming::BrokenOrdering);
    CHECK_THROWS_AS(protocol::run_session(cfg, *attack), protocol::ProtocolOrderError);
}

TEST_CASE("measure-resend slot-matched second CNOT resets every ancilla") {
    // without reordering Eve can always undo the wiretap, but then the
    // ancilla is |0> on SHARE slots too and carries nothing
    auto cfg = make_config(Variant::MeasureResend, 32, 6000);
    const int trials = 500;
    const auto t = sweep(
        cfg, [] { return eve_cnot_ancilla({true, true}, CnotTiming::Compliant); }, trials);
    for (int k = 0; k < 4; ++k) CHECK(t.case_errors[k] == 0);
    CHECK(t.escaped == t.trials);
    CHECK(t.guesses == 0);
    CHECK(t.joint[0][0] + t.joint[0][1] + t.joint[1][0] + t.joint[1][1] == 0);
}

TEST_CASE("delayed measurement attack drains the measure-resend variant") {
    auto cfg = make_config(Variant::MeasureResend, 32, 7000, /*receipt_first=*/false);
    const int trials = 300;
    const auto t = sweep(cfg, [] { return eve_measure_resend_delay(); }, trials);
    for (int k = 0; k < 4; ++k) CHECK(t.case_errors[k] == 0);
    CHECK(t.escaped == t.trials);
    CHECK(t.both_share > 0);
    CHECK(t.correct == t.both_share);
}

TEST_CASE("delayed measurement attack is rejected under compliant ordering") {
    const auto cfg = make_config(Variant::MeasureResend, 16, 1, /*receipt_first=*/true);
    auto attack = eve_measure_resend_delay();
    CHECK_THROWS_AS(protocol::run_session(cfg, *attack), protocol::ProtocolOrderError);
}

TEST_CASE("delayed measurement attack needs the measure-resend variant") {
    const auto cfg = make_config(Variant::RandomizationBased, 16, 1, /*receipt_first=*/false);
    auto attack = eve_measure_resend_delay();
    CHECK_THROWS_AS(protocol::run_session(cfg, *attack), std::invalid_argument);
}

TEST_CASE("ancilla references cannot reach foreign registers or protocol qubits") {
    qsim::Rng rng(9);
    protocol::TripletRegister t1, t2;
    t1.position = 1;
    t2.position = 2;
    t1.reg = states::prepare_psi();
    t2.reg = states::prepare_psi();
    OutboundView v1(t1, rng);
    const AncillaRef anc = v1.attach_cnot_ancilla(Party::Bob);

    ReturnSlot wrong_slot(t2, Party::Bob, false, rng);
    CHECK_THROWS_AS(wrong_slot.apply_cnot_to_ancilla(anc), std::logic_error);

    // a forged reference pointing at a protocol qubit is rejected
    AncillaRef forged = anc;
    forged.qubit = protocol::TripletRegister::kAlice;
    ReturnSlot own_slot(t1, Party::Bob, false, rng);
    CHECK_THROWS_AS(own_slot.apply_cnot_to_ancilla(forged), std::logic_error);

    std::array<protocol::TripletRegister, 2> regs{std::move(t1), std::move(t2)};
    FinalizeView fin(regs, rng);
    CHECK_THROWS_AS(fin.measure_ancilla(forged), std::logic_error);
    AncillaRef out_of_range = anc;
    out_of_range.position = 7;
    CHECK_THROWS_AS(fin.measure_ancilla(out_of_range), std::out_of_range);
    CHECK_NOTHROW(fin.measure_ancilla(anc));
}

TEST_CASE("holding is rejected whenever receipt precedes disclosure") {
    qsim::Rng rng(10);
    protocol::TripletRegister t;
    t.position = 1;
    t.reg = states::prepare_psi();
    ReflectedStream stream(Party::Bob, {&t}, /*may_hold=*/false, rng);
    CHECK_THROWS_AS(stream.hold(), protocol::ProtocolOrderError);
    ReturnSlot slot(t, Party::Bob, /*may_hold=*/false, rng);
    CHECK_THROWS_AS(slot.hold(), protocol::ProtocolOrderError);
}
