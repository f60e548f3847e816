// Monte Carlo experiment runner: sweeps an attack over seeded trials,
// aggregates scores, compares them against the closed-form predictions where
// those exist, and emits JSON/CSV reports.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqss/adversary.hpp"
#include "sqss/protocol.hpp"

namespace sqss::harness {

enum class AttackKind { Honest, DishonestBob, EveBell, EveCnot, EveDelay };

const char* to_string(AttackKind k);
// throws std::invalid_argument for unknown labels
AttackKind attack_from_label(const std::string& label);

enum class ReportFormat { Json, Csv };

struct ExperimentSpec {
    protocol::SessionConfig session; // session.seed is ignored; seeds derive from base_seed
    AttackKind attack = AttackKind::Honest;
    int positions = 0; // l (dishonest-bob) or m (eve-bell)
    adversary::CnotTiming timing = adversary::CnotTiming::Compliant;
    // eve-cnot legs; both false = pick by timing (compliant: Bob only,
    // broken: both, so the XOR recovery is possible)
    adversary::PartySet cnot_targets{};
    int trials = 1;
    std::uint64_t base_seed = 1; // trial i runs with seed base_seed + i
    int threads = 0;             // 0 = hardware concurrency
};

// Everything scored about one trial. The CSV row is the stable prefix
// (trial..agree); the remaining fields feed the statistical gates and appear
// in the JSON per-trial array.
struct TrialRow {
    int trial = 0;
    bool escaped = true;
    double detection_rate = 0.0;
    int bits_learned = 0;
    std::array<double, 4> err_case{};
    int secret_len = 0;
    bool agree = true;
    bool aborted = false;
    int attacked_rounds = 0;
    std::array<int, 4> attacked_case_rounds{};
    std::array<int, 4> attacked_case_errors{};
    int both_share_attacked = 0;
    int guesses_scored = 0;
    std::array<std::array<long long, 2>, 2> joint{};
};

// One statistical comparison. Two-sided gates pass when
// |observed - reference| <= 3*sigma + slack; one-sided gates pass when
// observed <= reference + slack.
struct GateCheck {
    std::string name;
    double observed = 0.0;
    double reference = 0.0;
    double sigma = 0.0;
    double slack = 0.0;
    long long samples = 0;
    bool one_sided = false;
    bool pass = false;
    std::string formula;
};

struct Aggregates {
    double escape_rate = 0.0;
    double detection_rate = 0.0; // pooled over attacked rounds
    std::array<double, 4> mean_error_rates{};
    std::array<long long, 4> attacked_case_rounds{};
    std::array<long long, 4> attacked_case_errors{};
    double mean_secret_len = 0.0;
    long long both_share_total = 0;
    long long bits_learned_total = 0;
    long long attacked_rounds_total = 0;
    long long attacked_errors_total = 0;
    std::array<std::array<long long, 2>, 2> joint_total{};
    std::optional<double> mutual_information_bits;
    std::optional<double> analytic_escape;
    std::optional<std::string> analytic_formula;
    int aborted_trials = 0;
    bool all_agree = true;
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::vector<TrialRow> trials;
    Aggregates aggregates;
    std::vector<GateCheck> gates;
    bool pass = true;
};

// Raised by analytic_escape for strategies with no closed form.
struct NoAnalyticReference : std::domain_error {
    using std::domain_error::domain_error;
};

// (3/4)^l for dishonest-bob, (5/8)^m for eve-bell.
double analytic_escape(AttackKind kind, int positions);
double analytic_escape(const std::string& label, int positions);

// Plug-in mutual information (bits) of a 2x2 joint count table.
double mutual_information_bits(const std::array<std::array<long long, 2>, 2>& joint);

// Detection probability of an Action4 check on a triplet carrying unreverted
// CNOT ancillas, computed from the exact Born distribution (the oracle the
// sampled experiment is checked against).
double cnot_action4_detection_oracle(adversary::PartySet targets);

// Validates the spec, runs all trials (in parallel; aggregation is a
// deterministic fold in trial order), and evaluates the statistical gates.
ExperimentReport run_experiment(const ExperimentSpec& spec);

void write_json(const ExperimentReport& report, std::ostream& os);
void write_csv(const ExperimentReport& report, std::ostream& os);
void write_report_file(const ExperimentReport& report, const std::string& path,
                       ReportFormat format);
// One transcript line per round per trial; reruns every trial to stream the
// per-round records.
void write_transcripts(const ExperimentSpec& spec, std::ostream& os);

} // namespace sqss::harness
