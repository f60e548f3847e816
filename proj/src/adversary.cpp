#include "sqss/adversary.hpp"

#include <algorithm>
#include <stdexcept>

#include "sqss/states.hpp"

namespace sqss::adversary {

using protocol::ProtocolOrderError;
using protocol::SessionConfig;
using protocol::TripletRegister;
using protocol::Variant;

// --- capability views ---

int OutboundView::measure(Party p) {
    return qsim::collapse_computational(t_->reg, protocol::party_qubit(p), *rng_);
}

int OutboundView::bell_measure_pair() {
    const std::array<int, 2> targets{TripletRegister::kBob, TripletRegister::kCharlie};
    return qsim::collapse_in_basis(t_->reg, states::bell_basis(), targets, *rng_);
}

AncillaRef OutboundView::attach_cnot_ancilla(Party p) {
    t_->reg = qsim::extend_with_ancilla(t_->reg, 0);
    const int anc = t_->reg.num_qubits() - 1;
    qsim::apply_gate(t_->reg, qsim::gates::cnot(), protocol::party_qubit(p), anc);
    return AncillaRef{t_->position, p, anc};
}

namespace {

void check_ancilla(const TripletRegister& t, const AncillaRef& anc) {
    if (anc.position != t.position) {
        throw std::logic_error("ancilla does not live in this slot's register");
    }
    if (anc.qubit < 3 || anc.qubit >= t.reg.num_qubits()) {
        throw std::logic_error("not an attack ancilla qubit");
    }
}

} // namespace

void ReflectedStream::hold() {
    if (!may_hold_) {
        throw ProtocolOrderError(
            "cannot hold reflected qubits: Alice announces receipt before disclosure");
    }
    held_ = true;
}

void ReflectedStream::apply_cnot_from_slot(int slot, const AncillaRef& anc) {
    if (slot < 0 || slot >= size()) throw std::out_of_range("stream slot out of range");
    TripletRegister& t = *slots_[static_cast<std::size_t>(slot)];
    check_ancilla(t, anc);
    if (anc.party != party_) throw std::logic_error("ancilla belongs to the other leg");
    qsim::apply_gate(t.reg, qsim::gates::cnot(), protocol::party_qubit(party_), anc.qubit);
}

void ReturnSlot::hold() {
    if (!may_hold_) {
        throw ProtocolOrderError(
            "cannot hold returned qubits: Alice announces receipt before disclosure");
    }
    held_ = true;
}

int ReturnSlot::measure() {
    return qsim::collapse_computational(t_->reg, protocol::party_qubit(party_), *rng_);
}

void ReturnSlot::apply_cnot_to_ancilla(const AncillaRef& anc) {
    check_ancilla(*t_, anc);
    if (anc.party != party_) throw std::logic_error("ancilla belongs to the other leg");
    qsim::apply_gate(t_->reg, qsim::gates::cnot(), protocol::party_qubit(party_), anc.qubit);
}

int FinalizeView::measure_ancilla(const AncillaRef& anc) {
    if (anc.position < 1 || static_cast<std::size_t>(anc.position) > regs_.size()) {
        throw std::out_of_range("ancilla position out of range");
    }
    TripletRegister& t = regs_[static_cast<std::size_t>(anc.position - 1)];
    check_ancilla(t, anc);
    return qsim::collapse_computational(t.reg, anc.qubit, *rng_);
}

bool GuessLog::attacked(int pos) const {
    return std::binary_search(attacked_positions.begin(), attacked_positions.end(), pos);
}

// --- base strategy: honest defaults ---

void AttackStrategy::begin_session(const SessionConfig& cfg, qsim::Rng&) {
    log_.reset(cfg.n_triplets);
}
std::optional<Choice> AttackStrategy::force_choice(int, Party) { return std::nullopt; }
bool AttackStrategy::insider(Party) const { return false; }
void AttackStrategy::observe_party_turn(int, Party, Choice, std::optional<int>) {}
void AttackStrategy::on_outbound(OutboundView&) {}
void AttackStrategy::on_reflected_returns(ReflectedStream&, ReflectedStream&) {}
void AttackStrategy::on_returns(std::vector<ReturnSlot>&) {}
void AttackStrategy::on_disclosure(const Disclosure&, ReflectedStream*, ReflectedStream*,
                                   std::vector<ReturnSlot>*) {}
void AttackStrategy::finalize_guesses(FinalizeView&) {}

namespace {

std::vector<int> draw_positions(int n, int count, qsim::Rng& rng) {
    auto picks = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                static_cast<std::size_t>(count));
    std::vector<int> positions;
    positions.reserve(picks.size());
    for (std::size_t p : picks) positions.push_back(static_cast<int>(p) + 1);
    std::sort(positions.begin(), positions.end());
    return positions;
}

void check_position_budget(int count, int n, const char* what) {
    if (count < 0) throw std::invalid_argument("attacked position count must be >= 0");
    if (count > n / 4) {
        throw std::invalid_argument(std::string(what) +
                                    ": attacked position count exceeds N/4");
    }
}

class Honest final : public AttackStrategy {
public:
    std::string_view label() const override { return "honest"; }
};

class DishonestBob final : public AttackStrategy {
public:
    explicit DishonestBob(int l) : l_(l) {}

    std::string_view label() const override { return "dishonest-bob"; }

    void begin_session(const SessionConfig& cfg, qsim::Rng& rng) override {
        check_position_budget(l_, cfg.n_triplets, "dishonest-bob");
        log_.reset(cfg.n_triplets);
        log_.attacked_positions = draw_positions(cfg.n_triplets, l_, rng);
        own_bit_.assign(static_cast<std::size_t>(cfg.n_triplets), -1);
    }

    // he measures his own qubit at attacked positions, so his declared
    // choice there is SHARE
    std::optional<Choice> force_choice(int pos, Party p) override {
        if (p == Party::Bob && log_.attacked(pos)) return Choice::Share;
        return std::nullopt;
    }

    bool insider(Party p) const override { return p == Party::Bob; }

    void observe_party_turn(int pos, Party, Choice, std::optional<int> bit) override {
        if (bit && log_.attacked(pos)) own_bit_[static_cast<std::size_t>(pos - 1)] = *bit;
    }

    void on_outbound(OutboundView& view) override {
        const int pos = view.position();
        if (!log_.attacked(pos)) return;
        // measure Charlie's travelling qubit and forward the collapsed state
        const int c = view.measure(Party::Charlie);
        log_.party_bits[static_cast<std::size_t>(pos - 1)][1] = c;
    }

    void finalize_guesses(FinalizeView&) override {
        for (int pos : log_.attacked_positions) {
            const std::size_t i = static_cast<std::size_t>(pos - 1);
            const int b = own_bit_[i];
            const int c = log_.party_bits[i][1];
            if (b >= 0) log_.party_bits[i][0] = b;
            if (b >= 0 && c >= 0) log_.alice_guess[i] = b ^ c;
        }
    }

private:
    int l_;
    std::vector<int> own_bit_;
};

class EveBell final : public AttackStrategy {
public:
    explicit EveBell(int m) : m_(m) {}

    std::string_view label() const override { return "eve-bell"; }

    void begin_session(const SessionConfig& cfg, qsim::Rng& rng) override {
        check_position_budget(m_, cfg.n_triplets, "eve-bell");
        log_.reset(cfg.n_triplets);
        log_.attacked_positions = draw_positions(cfg.n_triplets, m_, rng);
    }

    void on_outbound(OutboundView& view) override {
        const int pos = view.position();
        if (!log_.attacked(pos)) return;
        const int outcome = view.bell_measure_pair();
        // PhiPlus pairs with Alice's 0; anything else with 1
        log_.alice_guess[static_cast<std::size_t>(pos - 1)] =
            outcome == states::kPhiPlus ? 0 : 1;
    }

private:
    int m_;
};

class EveCnot final : public AttackStrategy {
public:
    EveCnot(PartySet targets, CnotTiming timing) : targets_(targets), timing_(timing) {
        if (!targets_.bob && !targets_.charlie) {
            throw std::invalid_argument("eve-cnot needs at least one targeted party");
        }
    }

    std::string_view label() const override { return "eve-cnot"; }

    void begin_session(const SessionConfig& cfg, qsim::Rng&) override {
        variant_ = cfg.variant;
        log_.reset(cfg.n_triplets);
        for (int pos = 1; pos <= cfg.n_triplets; ++pos) log_.attacked_positions.push_back(pos);
        ancillas_.assign(static_cast<std::size_t>(cfg.n_triplets), {});
        choices_[0].clear();
        choices_[1].clear();
    }

    void on_outbound(OutboundView& view) override {
        const std::size_t i = static_cast<std::size_t>(view.position() - 1);
        if (targets_.bob) ancillas_[i][0] = view.attach_cnot_ancilla(Party::Bob);
        if (targets_.charlie) ancillas_[i][1] = view.attach_cnot_ancilla(Party::Charlie);
    }

    void on_reflected_returns(ReflectedStream& bob, ReflectedStream& charlie) override {
        if (timing_ == CnotTiming::BrokenOrdering) {
            // wait for the order disclosure, then undo the wiretap
            if (targets_.bob) bob.hold();
            if (targets_.charlie) charlie.hold();
        }
        // compliant: forward as-is; the permutation hides which ancilla
        // matches which slot, so no second CNOT is possible
    }

    void on_returns(std::vector<ReturnSlot>& slots) override {
        if (timing_ == CnotTiming::BrokenOrdering) {
            for (auto& s : slots) {
                if (targeted(s.party())) s.hold();
            }
            return;
        }
        // measure-resend returns keep their position labels, so the second
        // CNOT always matches; on SHARE slots the fresh qubit carries the
        // same bit as the ancilla, resetting it to |0>
        for (auto& s : slots) {
            if (const auto& anc = ancilla_for(s.position(), s.party())) {
                s.apply_cnot_to_ancilla(*anc);
            }
        }
    }

    void on_disclosure(const Disclosure& d, ReflectedStream* held_bob,
                       ReflectedStream* held_charlie,
                       std::vector<ReturnSlot>* held_returns) override {
        choices_[0].assign(d.bob_choices.begin(), d.bob_choices.end());
        choices_[1].assign(d.charlie_choices.begin(), d.charlie_choices.end());
        if (timing_ != CnotTiming::BrokenOrdering) return;

        auto repair_stream = [&](ReflectedStream* stream, std::span<const int> slot_positions) {
            if (!stream) return;
            for (int slot = 0; slot < stream->size(); ++slot) {
                const int pos = slot_positions[static_cast<std::size_t>(slot)];
                if (const auto& anc = ancilla_for(pos, stream->party())) {
                    stream->apply_cnot_from_slot(slot, *anc);
                }
            }
        };
        repair_stream(held_bob, d.bob_stream_positions);
        repair_stream(held_charlie, d.charlie_stream_positions);

        if (held_returns) {
            for (auto& s : *held_returns) {
                if (!s.held()) continue;
                const Choice c = choice_at(s.position(), s.party());
                // undo only on CHECK slots; SHARE ancillas keep the party's bit
                if (c == Choice::Check) {
                    if (const auto& anc = ancilla_for(s.position(), s.party())) {
                        s.apply_cnot_to_ancilla(*anc);
                    }
                }
            }
        }
    }

    void finalize_guesses(FinalizeView& view) override {
        const bool undone_everywhere =
            variant_ == Variant::MeasureResend && timing_ == CnotTiming::Compliant;
        for (int pos : log_.attacked_positions) {
            const std::size_t i = static_cast<std::size_t>(pos - 1);
            for (int pi = 0; pi < 2; ++pi) {
                const auto& anc = ancillas_[i][pi];
                if (!anc) continue;
                const Party p = pi == 0 ? Party::Bob : Party::Charlie;
                const int bit = view.measure_ancilla(*anc);
                // the ancilla copies the party's bit only where that party
                // measured (SHARE); elsewhere its outcome carries nothing
                if (!undone_everywhere && choice_at(pos, p) == Choice::Share) {
                    log_.party_bits[i][pi] = bit;
                }
            }
            const int b = log_.party_bits[i][0];
            const int c = log_.party_bits[i][1];
            if (b >= 0 && c >= 0) log_.alice_guess[i] = b ^ c;
        }
    }

private:
    const std::optional<AncillaRef>& ancilla_for(int pos, Party p) const {
        return ancillas_[static_cast<std::size_t>(pos - 1)][p == Party::Bob ? 0 : 1];
    }

    bool targeted(Party p) const { return p == Party::Bob ? targets_.bob : targets_.charlie; }

    Choice choice_at(int pos, Party p) const {
        return choices_[p == Party::Bob ? 0 : 1][static_cast<std::size_t>(pos - 1)];
    }

    PartySet targets_;
    CnotTiming timing_;
    Variant variant_ = Variant::RandomizationBased;
    std::vector<std::array<std::optional<AncillaRef>, 2>> ancillas_;
    std::array<std::vector<Choice>, 2> choices_;
};

class EveDelay final : public AttackStrategy {
public:
    std::string_view label() const override { return "eve-delay"; }

    void begin_session(const SessionConfig& cfg, qsim::Rng&) override {
        if (cfg.variant != Variant::MeasureResend) {
            throw std::invalid_argument("eve-delay applies to the measure-resend variant only");
        }
        log_.reset(cfg.n_triplets);
        for (int pos = 1; pos <= cfg.n_triplets; ++pos) log_.attacked_positions.push_back(pos);
    }

    void on_returns(std::vector<ReturnSlot>& slots) override {
        for (auto& s : slots) s.hold();
    }

    void on_disclosure(const Disclosure& d, ReflectedStream*, ReflectedStream*,
                       std::vector<ReturnSlot>* held_returns) override {
        if (!held_returns) return;
        for (auto& s : *held_returns) {
            if (!s.held()) continue;
            const auto& choices =
                s.party() == Party::Bob ? d.bob_choices : d.charlie_choices;
            if (choices[static_cast<std::size_t>(s.position() - 1)] == Choice::Share) {
                // a fresh classical-state qubit: measuring reproduces the
                // party's bit without disturbance
                const int bit = s.measure();
                log_.party_bits[static_cast<std::size_t>(s.position() - 1)]
                               [s.party() == Party::Bob ? 0 : 1] = bit;
            }
        }
    }

    void finalize_guesses(FinalizeView&) override {
        for (int pos : log_.attacked_positions) {
            const std::size_t i = static_cast<std::size_t>(pos - 1);
            const int b = log_.party_bits[i][0];
            const int c = log_.party_bits[i][1];
            if (b >= 0 && c >= 0) log_.alice_guess[i] = b ^ c;
        }
    }
};

} // namespace

std::unique_ptr<AttackStrategy> honest() { return std::make_unique<Honest>(); }

std::unique_ptr<AttackStrategy> dishonest_bob(int l) {
    return std::make_unique<DishonestBob>(l);
}

std::unique_ptr<AttackStrategy> eve_bell(int m) { return std::make_unique<EveBell>(m); }

std::unique_ptr<AttackStrategy> eve_cnot_ancilla(PartySet targets, CnotTiming timing) {
    return std::make_unique<EveCnot>(targets, timing);
}

std::unique_ptr<AttackStrategy> eve_measure_resend_delay() {
    return std::make_unique<EveDelay>();
}

AttackScore score(const AttackStrategy& strategy, const protocol::SessionResult& result) {
    const GuessLog& log = strategy.log();
    AttackScore s;
    for (const auto& r : result.records) {
        if (!log.attacked(r.index)) continue;
        ++s.attacked_rounds;
        const int k = static_cast<int>(r.alice_action) - 1;
        s.attacked_case_rounds[static_cast<std::size_t>(k)]++;
        if (r.error_flag) {
            ++s.attacked_errors;
            s.attacked_case_errors[static_cast<std::size_t>(k)]++;
        }
        if (r.alice_action != protocol::AliceAction::Action1) continue;

        ++s.both_share_attacked;
        const std::size_t i = static_cast<std::size_t>(r.index - 1);
        const int guess = log.alice_guess[i];
        if (guess >= 0) {
            ++s.guesses_scored;
            if (guess == *r.alice_bit) ++s.bits_learned;
        }
        const int eve_bob_bit = log.party_bits[i][0];
        if (eve_bob_bit >= 0) {
            s.alice_bob_joint[static_cast<std::size_t>(*r.alice_bit)]
                             [static_cast<std::size_t>(eve_bob_bit)]++;
        }
    }
    s.escaped = s.attacked_errors == 0;
    s.detection_rate =
        s.attacked_rounds ? static_cast<double>(s.attacked_errors) / s.attacked_rounds : 0.0;
    return s;
}

} // namespace sqss::adversary
