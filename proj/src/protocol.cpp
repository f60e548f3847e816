#include "sqss/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sqss/adversary.hpp"
#include "sqss/states.hpp"

namespace sqss::protocol {

const char* to_string(Variant v) {
    return v == Variant::RandomizationBased ? "randomization" : "measure-resend";
}
const char* to_string(Choice c) { return c == Choice::Share ? "SHARE" : "CHECK"; }
const char* to_string(Party p) { return p == Party::Bob ? "bob" : "charlie"; }

AliceAction dispatch_action(Choice bob, Choice charlie) {
    if (bob == Choice::Share) {
        return charlie == Choice::Share ? AliceAction::Action1 : AliceAction::Action2;
    }
    return charlie == Choice::Share ? AliceAction::Action3 : AliceAction::Action4;
}

int ClassicalOps::measure() {
    measured_ = true;
    return qsim::collapse_computational(triplet_->reg, party_qubit(party_), *rng_);
}

void ClassicalOps::reflect() {
    // permitted in both variants; no state change
}

void ClassicalOps::enqueue_reordered() {
    if (variant_ != Variant::RandomizationBased) {
        throw ClassicalityViolation("reordering is not permitted in the measure-resend variant");
    }
}

void ClassicalOps::resend_measured() {
    if (variant_ != Variant::MeasureResend) {
        throw ClassicalityViolation(
            "preparing a fresh qubit is not permitted in the randomization variant");
    }
    if (!measured_) {
        throw ClassicalityViolation("resend requires a prior measurement outcome");
    }
    // The register qubit is already collapsed to the observed classical
    // state, which is exactly the fresh qubit the party sends back.
}

PartyTurn classical_party_turn(Variant v, Choice c, TripletRegister& t, Party p,
                               qsim::Rng& rng) {
    ClassicalOps ops(v, t, p, rng);
    PartyTurn turn;
    if (v == Variant::RandomizationBased) {
        if (c == Choice::Share) {
            turn.bit = ops.measure();
        } else {
            ops.enqueue_reordered();
            turn.returns_qubit = true;
            turn.reordered = true;
        }
    } else {
        if (c == Choice::Share) {
            turn.bit = ops.measure();
            ops.resend_measured();
        } else {
            ops.reflect();
        }
        turn.returns_qubit = true;
    }
    return turn;
}

namespace {

CheckResult bell_check(TripletRegister& t, int partner_qubit, int announced_bit,
                       qsim::Rng& rng) {
    const std::array<int, 2> targets{TripletRegister::kAlice, partner_qubit};
    const int outcome = qsim::collapse_in_basis(t.reg, states::bell_basis(), targets, rng);
    const int expected = announced_bit ? states::kPsiPlus : states::kPhiPlus;
    return CheckResult{outcome != expected, CheckOutcome{qsim::BasisLabel::Bell, outcome}};
}

} // namespace

CheckResult alice_check_action2(TripletRegister& t, int bob_bit, qsim::Rng& rng) {
    return bell_check(t, TripletRegister::kCharlie, bob_bit, rng);
}

CheckResult alice_check_action3(TripletRegister& t, int charlie_bit, qsim::Rng& rng) {
    return bell_check(t, TripletRegister::kBob, charlie_bit, rng);
}

CheckResult alice_check_action4(TripletRegister& t, qsim::Rng& rng) {
    const std::array<int, 3> targets{TripletRegister::kAlice, TripletRegister::kBob,
                                     TripletRegister::kCharlie};
    const int outcome = qsim::collapse_in_basis(t.reg, states::phi_basis(), targets, rng);
    return CheckResult{outcome != 0, CheckOutcome{qsim::BasisLabel::Phi, outcome}};
}

SessionResult finalize(std::vector<RoundRecord> records, const SessionConfig& cfg,
                       qsim::Rng& rng) {
    SessionResult out;
    out.records = std::move(records);

    std::array<int, 4> case_rounds{};
    std::array<int, 4> case_errors{};
    std::vector<std::size_t> action1_rounds;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
        const auto& r = out.records[i];
        const int k = static_cast<int>(r.alice_action) - 1;
        case_rounds[k]++;
        if (r.error_flag) case_errors[k]++;
        if (r.alice_action == AliceAction::Action1) action1_rounds.push_back(i);
    }
    for (int k = 1; k < 4; ++k) {
        out.error_rates[k] = case_rounds[k] ? static_cast<double>(case_errors[k]) / case_rounds[k] : 0.0;
    }

    // channel-check cases
    bool abort6 = false;
    for (int k = 1; k < 4; ++k) abort6 = abort6 || out.error_rates[k] > cfg.error_threshold;

    if (!abort6) {
        // reveal a random subset of the Action1 rounds
        const std::size_t reveal_count = static_cast<std::size_t>(
            std::ceil(static_cast<double>(action1_rounds.size()) * cfg.reveal_fraction));
        auto picks = rng.sample_without_replacement(action1_rounds.size(), reveal_count);
        std::sort(picks.begin(), picks.end());
        int reveal_errors = 0;
        for (std::size_t p : picks) {
            auto& r = out.records[action1_rounds[p]];
            r.revealed = true;
            out.revealed_positions.push_back(r.index);
            const int want = *r.bob_bit ^ *r.charlie_bit;
            if (*r.alice_bit != want) {
                r.error_flag = true;
                ++reveal_errors;
            }
        }
        out.error_rates[0] =
            reveal_count ? static_cast<double>(reveal_errors) / reveal_count : 0.0;
    }

    out.aborted = abort6 || out.error_rates[0] > cfg.error_threshold;

    if (!out.aborted) {
        for (std::size_t i : action1_rounds) {
            const auto& r = out.records[i];
            if (r.revealed) continue;
            out.secret_positions.push_back(r.index);
            out.alice_secret.push_back(static_cast<std::uint8_t>(*r.alice_bit));
            out.reconstructed_secret.push_back(
                static_cast<std::uint8_t>(*r.bob_bit ^ *r.charlie_bit));
        }
    }
    return out;
}

namespace {

void validate_config(const SessionConfig& cfg) {
    if (cfg.n_triplets < 0) throw std::invalid_argument("n_triplets must be >= 0");
    if (cfg.error_threshold < 0.0 || cfg.error_threshold >= 1.0) {
        throw std::invalid_argument("error_threshold must lie in [0,1)");
    }
    if (cfg.reveal_fraction <= 0.0 || cfg.reveal_fraction >= 1.0) {
        throw std::invalid_argument("reveal_fraction must lie in (0,1)");
    }
}

} // namespace

SessionResult run_session(const SessionConfig& cfg, adversary::AttackStrategy& attack) {
    validate_config(cfg);

    qsim::Rng master(cfg.seed);
    qsim::Rng choice_rng(master.next_u64());
    qsim::Rng quantum_rng(master.next_u64());
    qsim::Rng protocol_rng(master.next_u64());
    qsim::Rng attack_rng(master.next_u64());

    const int n = cfg.n_triplets;
    attack.begin_session(cfg, attack_rng);

    std::vector<StepEvent> trace;
    std::vector<RoundRecord> records(n);
    std::vector<TripletRegister> regs(n);

    // distribution: the attack rides the outbound legs
    for (int i = 0; i < n; ++i) {
        regs[i].position = i + 1;
        regs[i].reg = states::prepare_psi();
        adversary::OutboundView view(regs[i], quantum_rng);
        attack.on_outbound(view);
    }
    trace.push_back(StepEvent::Distributed);

    // classical-party turns
    std::vector<Choice> bob_choices(n, Choice::Share), charlie_choices(n, Choice::Share);
    for (int i = 0; i < n; ++i) {
        records[i].index = i + 1;
        for (Party p : {Party::Bob, Party::Charlie}) {
            Choice c;
            if (auto forced = attack.force_choice(i + 1, p)) {
                c = *forced;
            } else {
                c = choice_rng.next_bit() ? Choice::Check : Choice::Share;
            }
            const PartyTurn turn = classical_party_turn(cfg.variant, c, regs[i], p, quantum_rng);
            if (p == Party::Bob) {
                bob_choices[i] = c;
                records[i].bob_choice = c;
                records[i].bob_bit = turn.bit;
            } else {
                charlie_choices[i] = c;
                records[i].charlie_choice = c;
                records[i].charlie_bit = turn.bit;
            }
            if (attack.insider(p)) attack.observe_party_turn(i + 1, p, c, turn.bit);
        }
    }
    trace.push_back(StepEvent::PartyTurnsDone);

    // return legs
    const bool may_hold = !cfg.announce_receipt_before_disclosure;
    std::optional<adversary::ReflectedStream> bob_stream, charlie_stream;
    std::vector<int> bob_stream_positions, charlie_stream_positions;
    std::vector<adversary::ReturnSlot> slots;

    if (cfg.variant == Variant::RandomizationBased) {
        // each party reflects its CHECK qubits in a fresh secret order
        auto build = [&](Party p, std::vector<int>& positions) {
            std::vector<TripletRegister*> ptrs;
            for (int i = 0; i < n; ++i) {
                const Choice c = p == Party::Bob ? bob_choices[i] : charlie_choices[i];
                if (c == Choice::Check) positions.push_back(i + 1);
            }
            protocol_rng.shuffle(positions);
            for (int pos : positions) ptrs.push_back(&regs[pos - 1]);
            return adversary::ReflectedStream(p, std::move(ptrs), may_hold, quantum_rng);
        };
        bob_stream.emplace(build(Party::Bob, bob_stream_positions));
        charlie_stream.emplace(build(Party::Charlie, charlie_stream_positions));
        attack.on_reflected_returns(*bob_stream, *charlie_stream);
    } else {
        // every qubit returns in its original slot
        slots.reserve(2 * static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            slots.emplace_back(regs[i], Party::Bob, may_hold, quantum_rng);
            slots.emplace_back(regs[i], Party::Charlie, may_hold, quantum_rng);
        }
        attack.on_returns(slots);
    }

    const bool anything_held = (bob_stream && bob_stream->held()) ||
                               (charlie_stream && charlie_stream->held()) ||
                               std::any_of(slots.begin(), slots.end(),
                                           [](const adversary::ReturnSlot& s) { return s.held(); });

    adversary::Disclosure disclosure{
        bob_choices, charlie_choices, bob_stream_positions, charlie_stream_positions};

    if (cfg.announce_receipt_before_disclosure) {
        // secure order: receipt is announced before anything is disclosed
        if (anything_held) {
            throw ProtocolOrderError("reflected qubits held past the receipt announcement");
        }
        trace.push_back(StepEvent::ReceiptAnnounced);
        trace.push_back(StepEvent::Disclosed);
        attack.on_disclosure(disclosure, nullptr, nullptr, nullptr);
    } else {
        // broken order: positions and orders become public while qubits may
        // still be in transit
        trace.push_back(StepEvent::Disclosed);
        const bool slots_held = std::any_of(slots.begin(), slots.end(),
                                            [](const adversary::ReturnSlot& s) { return s.held(); });
        attack.on_disclosure(disclosure,
                             bob_stream && bob_stream->held() ? &*bob_stream : nullptr,
                             charlie_stream && charlie_stream->held() ? &*charlie_stream : nullptr,
                             slots_held ? &slots : nullptr);
        trace.push_back(StepEvent::ReceiptAnnounced);
    }

    // Alice's per-case actions
    for (int i = 0; i < n; ++i) {
        auto& r = records[i];
        r.alice_action = dispatch_action(r.bob_choice, r.charlie_choice);
        switch (r.alice_action) {
        case AliceAction::Action1:
            r.alice_bit = qsim::collapse_computational(regs[i].reg, TripletRegister::kAlice,
                                                       quantum_rng);
            break;
        case AliceAction::Action2: {
            const CheckResult cr = alice_check_action2(regs[i], *r.bob_bit, quantum_rng);
            r.error_flag = cr.error;
            r.check_outcome = cr.outcome;
            break;
        }
        case AliceAction::Action3: {
            const CheckResult cr = alice_check_action3(regs[i], *r.charlie_bit, quantum_rng);
            r.error_flag = cr.error;
            r.check_outcome = cr.outcome;
            break;
        }
        case AliceAction::Action4: {
            const CheckResult cr = alice_check_action4(regs[i], quantum_rng);
            r.error_flag = cr.error;
            r.check_outcome = cr.outcome;
            break;
        }
        }
    }
    trace.push_back(StepEvent::ChecksDone);

    SessionResult out = finalize(std::move(records), cfg, protocol_rng);
    trace.push_back(StepEvent::Finalized);
    out.step_trace = std::move(trace);

    adversary::FinalizeView fin(regs, quantum_rng);
    attack.finalize_guesses(fin);
    return out;
}

SessionResult run_session(const SessionConfig& cfg) {
    auto attack = adversary::honest();
    return run_session(cfg, *attack);
}

namespace {

void put_opt(std::ostream& os, const std::optional<int>& v) {
    if (v) {
        os << *v;
    }
}

} // namespace

void write_transcript_header(std::ostream& os) {
    os << "trial,position,bob_choice,charlie_choice,bob_bit,charlie_bit,action,"
          "alice_bit,check_basis,check_outcome,error,revealed\n";
}

void write_transcript(const SessionResult& result, int trial, std::ostream& os) {
    for (const auto& r : result.records) {
        os << trial << ',' << r.index << ',' << to_string(r.bob_choice) << ','
           << to_string(r.charlie_choice) << ',';
        put_opt(os, r.bob_bit);
        os << ',';
        put_opt(os, r.charlie_bit);
        os << ',' << static_cast<int>(r.alice_action) << ',';
        put_opt(os, r.alice_bit);
        os << ',';
        if (r.check_outcome) os << qsim::to_string(r.check_outcome->basis);
        os << ',';
        if (r.check_outcome) os << r.check_outcome->outcome;
        os << ',' << (r.error_flag ? 1 : 0) << ',' << (r.revealed ? 1 : 0) << '\n';
    }
}

} // namespace sqss::protocol
