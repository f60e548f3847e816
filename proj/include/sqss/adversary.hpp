// Channel interceptors. Each strategy acts only through the capability views
// the session hands it: outbound legs, return legs/streams, the public
// disclosure, and (afterwards) its own ancilla workspace. Alice's retained
// qubit is not reachable from any view, which makes interception locality a
// property of the interface rather than of attacker goodwill.

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sqss/protocol.hpp"

namespace sqss::adversary {

using protocol::Choice;
using protocol::Party;

// A wiretap ancilla living inside one triplet's register.
struct AncillaRef {
    int position = 0;         // 1-based triplet position
    Party party = Party::Bob; // leg it was attached to
    int qubit = -1;           // register qubit index (>= 3)
};

// Both travelling qubits of one triplet while they are in transit from Alice.
class OutboundView {
public:
    OutboundView(protocol::TripletRegister& t, qsim::Rng& rng) : t_(&t), rng_(&rng) {}

    int position() const { return t_->position; }

    // intercept-and-measure that leg's qubit; the collapsed qubit travels on
    int measure(Party p);

    // Bell measurement of the (Bob, Charlie) pair; collapsed halves travel on
    int bell_measure_pair();

    // append an ancilla |0> and CNOT (party qubit as control) onto it
    AncillaRef attach_cnot_ancilla(Party p);

private:
    protocol::TripletRegister* t_;
    qsim::Rng* rng_;
};

// One party's reflected qubits in the party's secret return order
// (randomization variant). Which position a slot carries stays hidden until
// the disclosure step.
class ReflectedStream {
public:
    ReflectedStream(Party p, std::vector<protocol::TripletRegister*> slots, bool may_hold,
                    qsim::Rng& rng)
        : party_(p), slots_(std::move(slots)), may_hold_(may_hold), rng_(&rng) {}

    Party party() const { return party_; }
    int size() const { return static_cast<int>(slots_.size()); }

    // Keep the qubits instead of forwarding them to Alice. Only possible when
    // the session disclosed positions/orders before the receipt announcement.
    void hold();
    bool held() const { return held_; }

    // Post-disclosure repair of a CNOT wiretap: applies CNOT (slot qubit as
    // control) onto the given ancilla. Rejects ancillas that do not live in
    // the slot's register.
    void apply_cnot_from_slot(int slot, const AncillaRef& anc);

private:
    Party party_;
    std::vector<protocol::TripletRegister*> slots_;
    bool may_hold_ = false;
    bool held_ = false;
    qsim::Rng* rng_;
};

// One returned qubit in the measure-resend variant; returns keep their
// position labels (there is no reordering in this variant).
class ReturnSlot {
public:
    ReturnSlot(protocol::TripletRegister& t, Party p, bool may_hold, qsim::Rng& rng)
        : t_(&t), party_(p), may_hold_(may_hold), rng_(&rng) {}

    int position() const { return t_->position; }
    Party party() const { return party_; }

    void hold();
    bool held() const { return held_; }

    // computational measurement of the returned qubit
    int measure();

    // CNOT from the returned qubit onto one of the attacker's ancillas in the
    // same register
    void apply_cnot_to_ancilla(const AncillaRef& anc);

private:
    protocol::TripletRegister* t_;
    Party party_;
    bool may_hold_ = false;
    bool held_ = false;
    qsim::Rng* rng_;
};

// Step-4 public announcements.
struct Disclosure {
    std::span<const Choice> bob_choices;     // index 0 = position 1
    std::span<const Choice> charlie_choices;
    // randomization variant: stream slot -> position, per party
    std::span<const int> bob_stream_positions;
    std::span<const int> charlie_stream_positions;
};

// Post-session access to the attacker's own ancillas.
class FinalizeView {
public:
    FinalizeView(std::span<protocol::TripletRegister> regs, qsim::Rng& rng)
        : regs_(regs), rng_(&rng) {}

    int measure_ancilla(const AncillaRef& anc);

private:
    std::span<protocol::TripletRegister> regs_;
    qsim::Rng* rng_;
};

// What the attacker wrote down, scored after the session.
struct GuessLog {
    std::vector<int> attacked_positions; // sorted, 1-based
    // per position (index 0 = position 1): learned party bits and the guessed
    // Alice bit; -1 = none
    std::vector<std::array<int, 2>> party_bits;
    std::vector<int> alice_guess;

    void reset(int n_positions) {
        attacked_positions.clear();
        party_bits.assign(n_positions, {-1, -1});
        alice_guess.assign(n_positions, -1);
    }
    bool attacked(int pos) const;
};

enum class CnotTiming { Compliant, BrokenOrdering };

class AttackStrategy {
public:
    virtual ~AttackStrategy() = default;

    virtual std::string_view label() const = 0;

    // Called once before distribution; validates parameters against the
    // session and draws attacked positions.
    virtual void begin_session(const protocol::SessionConfig& cfg, qsim::Rng& attack_rng);

    // A malicious insider may force its own protocol choice at a position.
    virtual std::optional<Choice> force_choice(int pos, Party p);

    // Insider status: the session feeds that party's turn results back.
    virtual bool insider(Party p) const;
    virtual void observe_party_turn(int pos, Party p, Choice c, std::optional<int> bit);

    virtual void on_outbound(OutboundView& view);

    // randomization variant returns
    virtual void on_reflected_returns(ReflectedStream& bob, ReflectedStream& charlie);

    // measure-resend variant returns
    virtual void on_returns(std::vector<ReturnSlot>& slots);

    // The disclosure step. Held streams/slots are passed back for post-disclosure work and
    // are forwarded to Alice when the hook returns; under the compliant step
    // order the pointers are null because nothing can still be in transit.
    virtual void on_disclosure(const Disclosure& d, ReflectedStream* held_bob,
                               ReflectedStream* held_charlie,
                               std::vector<ReturnSlot>* held_returns);

    // After the session: measure remaining ancillas, fill in guesses.
    virtual void finalize_guesses(FinalizeView& view);

    const GuessLog& log() const { return log_; }

protected:
    GuessLog log_;
};

std::unique_ptr<AttackStrategy> honest();

// Insider Bob measures Charlie's outbound qubit at l positions (forcing his
// own choice there to SHARE) and forwards the collapsed qubit.
std::unique_ptr<AttackStrategy> dishonest_bob(int l);

// Outsider Eve Bell-measures the travelling (Bob, Charlie) pair at m
// positions and resends the collapsed halves.
std::unique_ptr<AttackStrategy> eve_bell(int m);

struct PartySet {
    bool bob = false;
    bool charlie = false;
};

// CNOT-ancilla wiretap on every position. Compliant mode forwards reflected
// qubits before disclosure (randomization: the ancillas stay entangled on
// CHECK positions; measure-resend: the per-slot second CNOT always resets
// them). BrokenOrdering mode holds the returns until disclosure and undoes
// the wiretap exactly.
std::unique_ptr<AttackStrategy> eve_cnot_ancilla(PartySet targets, CnotTiming timing);

// Measure-resend variant only: hold every returned qubit until positions are
// disclosed, then measure exactly the SHARE-position qubits.
std::unique_ptr<AttackStrategy> eve_measure_resend_delay();

struct AttackScore {
    bool escaped = true;        // no error flagged on any attacked round
    int bits_learned = 0;       // correct guesses on both-SHARE rounds
    double detection_rate = 0.0; // flagged attacked rounds / attacked rounds
    int attacked_rounds = 0;
    int attacked_errors = 0;
    // attacked rounds split by dispatch case (index k-1)
    std::array<int, 4> attacked_case_rounds{};
    std::array<int, 4> attacked_case_errors{};
    int both_share_attacked = 0; // attacked Action1 rounds
    int guesses_scored = 0;
    // joint (Alice bit, learned Bob bit) counts on attacked Action1 rounds;
    // feeds the lone-ancilla mutual-information estimate
    std::array<std::array<long long, 2>, 2> alice_bob_joint{};
};

AttackScore score(const AttackStrategy& strategy, const protocol::SessionResult& result);

} // namespace sqss::adversary
