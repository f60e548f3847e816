// One full secret-sharing session over N entangled triplets, for either
// protocol variant: distribution, classical-party turns, returns, the
// receipt/disclosure ordering, Alice's per-case checks, error accounting,
// reveal, and secret reconstruction.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sqss/rng.hpp"
#include "sqss/statevector.hpp"

namespace sqss::adversary {
class AttackStrategy;
}

namespace sqss::protocol {

enum class Variant { RandomizationBased, MeasureResend };
enum class Choice { Share, Check };
enum class AliceAction { Action1 = 1, Action2 = 2, Action3 = 3, Action4 = 4 };
enum class Party { Bob = 0, Charlie = 1 };

const char* to_string(Variant v);
const char* to_string(Choice c);
const char* to_string(Party p);

// Raised when a step-order rule is violated (holding reflected qubits past
// Alice's receipt announcement).
struct ProtocolOrderError : std::logic_error {
    using std::logic_error::logic_error;
};

// Raised when a classical party would perform an operation outside the
// variant's permitted set.
struct ClassicalityViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Session timeline markers, in occurrence order.
enum class StepEvent {
    Distributed,
    PartyTurnsDone,
    ReceiptAnnounced,
    Disclosed,
    ChecksDone,
    Finalized,
};

struct CheckOutcome {
    qsim::BasisLabel basis = qsim::BasisLabel::Bell;
    int outcome = 0;
};

struct RoundRecord {
    int index = 0; // position, 1-based
    Choice bob_choice = Choice::Share;
    Choice charlie_choice = Choice::Share;
    std::optional<int> bob_bit;
    std::optional<int> charlie_bit;
    AliceAction alice_action = AliceAction::Action1;
    std::optional<int> alice_bit;
    std::optional<CheckOutcome> check_outcome;
    bool error_flag = false;
    bool revealed = false;
};

struct SessionConfig {
    Variant variant = Variant::RandomizationBased;
    int n_triplets = 0;
    double error_threshold = 0.0; // abort when a case rate strictly exceeds this
    double reveal_fraction = 0.5; // share of Action1 rounds revealed at the end
    bool announce_receipt_before_disclosure = true;
    std::uint64_t seed = 0;
};

struct SessionResult {
    std::vector<RoundRecord> records;
    std::array<double, 4> error_rates{}; // [k-1] = case k rate
    bool aborted = false;
    std::vector<int> secret_positions;
    std::vector<int> revealed_positions;
    std::vector<std::uint8_t> alice_secret;
    std::vector<std::uint8_t> reconstructed_secret;
    std::vector<StepEvent> step_trace;
};

// One triplet's live register. Qubit roles are fixed; attack ancillas occupy
// indices >= 3.
struct TripletRegister {
    static constexpr int kAlice = 0;
    static constexpr int kBob = 1;
    static constexpr int kCharlie = 2;

    int position = 0; // 1-based
    qsim::StateVector reg{3};
};

inline int party_qubit(Party p) { return p == Party::Bob ? TripletRegister::kBob : TripletRegister::kCharlie; }

// Dispatch table: (Bob, Charlie) -> Alice's action.
AliceAction dispatch_action(Choice bob, Choice charlie);

// The operation set available to a classical party, gated by variant. Every
// party turn goes through this guard, which is what makes the classicality
// restriction structural rather than conventional.
class ClassicalOps {
public:
    ClassicalOps(Variant v, TripletRegister& t, Party p, qsim::Rng& rng)
        : variant_(v), triplet_(&t), party_(p), rng_(&rng) {}

    // computational-basis measurement of the party's own qubit
    int measure();

    // return the qubit untouched, in its original slot
    void reflect();

    // randomization variant only: queue the qubit for permuted return
    void enqueue_reordered();

    // measure-resend variant only: send a fresh qubit prepared in the state
    // just observed (the collapsed register qubit is exactly that state)
    void resend_measured();

private:
    Variant variant_;
    TripletRegister* triplet_;
    Party party_;
    qsim::Rng* rng_;
    bool measured_ = false;
};

struct PartyTurn {
    std::optional<int> bit;
    bool returns_qubit = false; // travels the return leg
    bool reordered = false;     // part of the party's permuted return stream
};

PartyTurn classical_party_turn(Variant v, Choice c, TripletRegister& t, Party p,
                               qsim::Rng& rng);

struct CheckResult {
    bool error = false;
    CheckOutcome outcome;
};

// Case 2: Bell measurement on (Alice, Charlie-reflected), judged against
// Bob's announced bit (0 -> PhiPlus, 1 -> PsiPlus).
CheckResult alice_check_action2(TripletRegister& t, int bob_bit, qsim::Rng& rng);
// Case 3: mirror image, (Alice, Bob-reflected) against Charlie's bit.
CheckResult alice_check_action3(TripletRegister& t, int charlie_bit, qsim::Rng& rng);
// Case 4: phi-basis measurement of the reassembled triplet; outcome 0 passes.
CheckResult alice_check_action4(TripletRegister& t, qsim::Rng& rng);

// Error accounting and reveal: per-case error rates, abort decision, reveal
// draw, and secret extraction from the surviving Action1 rounds.
SessionResult finalize(std::vector<RoundRecord> records, const SessionConfig& cfg,
                       qsim::Rng& rng);

SessionResult run_session(const SessionConfig& cfg, adversary::AttackStrategy& attack);
SessionResult run_session(const SessionConfig& cfg); // honest channel

// Flat per-round transcript lines (CSV).
void write_transcript_header(std::ostream& os);
void write_transcript(const SessionResult& result, int trial, std::ostream& os);

} // namespace sqss::protocol
