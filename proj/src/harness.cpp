#include "sqss/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sqss/states.hpp"

namespace sqss::harness {

using json = nlohmann::ordered_json;

const char* to_string(AttackKind k) {
    switch (k) {
    case AttackKind::Honest: return "honest";
    case AttackKind::DishonestBob: return "dishonest-bob";
    case AttackKind::EveBell: return "eve-bell";
    case AttackKind::EveCnot: return "eve-cnot";
    case AttackKind::EveDelay: return "eve-delay";
    }
    return "?";
}

AttackKind attack_from_label(const std::string& label) {
    if (label == "honest") return AttackKind::Honest;
    if (label == "dishonest-bob") return AttackKind::DishonestBob;
    if (label == "eve-bell") return AttackKind::EveBell;
    if (label == "eve-cnot") return AttackKind::EveCnot;
    if (label == "eve-delay") return AttackKind::EveDelay;
    throw std::invalid_argument("unknown attack label: " + label);
}

double analytic_escape(AttackKind kind, int positions) {
    if (positions < 0) throw std::invalid_argument("positions must be >= 0");
    switch (kind) {
    case AttackKind::DishonestBob: return std::pow(0.75, positions);
    case AttackKind::EveBell: return std::pow(0.625, positions);
    default:
        throw NoAnalyticReference(std::string("no analytic escape formula for ") +
                                  to_string(kind));
    }
}

double analytic_escape(const std::string& label, int positions) {
    return analytic_escape(attack_from_label(label), positions);
}

double mutual_information_bits(const std::array<std::array<long long, 2>, 2>& joint) {
    const double n = static_cast<double>(joint[0][0] + joint[0][1] + joint[1][0] + joint[1][1]);
    if (n <= 0.0) return 0.0;
    const double pa[2] = {(joint[0][0] + joint[0][1]) / n, (joint[1][0] + joint[1][1]) / n};
    const double pb[2] = {(joint[0][0] + joint[1][0]) / n, (joint[0][1] + joint[1][1]) / n};
    double mi = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double pab = joint[a][b] / n;
            if (pab > 0.0) mi += pab * std::log2(pab / (pa[a] * pb[b]));
        }
    }
    return mi;
}

double cnot_action4_detection_oracle(adversary::PartySet targets) {
    protocol::TripletRegister t;
    t.position = 1;
    t.reg = states::prepare_psi();
    qsim::Rng unused(0);
    adversary::OutboundView view(t, unused);
    if (targets.bob) view.attach_cnot_ancilla(protocol::Party::Bob);
    if (targets.charlie) view.attach_cnot_ancilla(protocol::Party::Charlie);
    const std::array<int, 3> triplet{0, 1, 2};
    const auto probs = qsim::born_distribution(t.reg, states::phi_basis(), triplet);
    return 1.0 - probs[0];
}

namespace {

adversary::PartySet resolved_targets(const ExperimentSpec& spec) {
    if (spec.cnot_targets.bob || spec.cnot_targets.charlie) return spec.cnot_targets;
    if (spec.timing == adversary::CnotTiming::BrokenOrdering) return {true, true};
    return {true, false}; // lone wiretap on Bob's leg
}

std::unique_ptr<adversary::AttackStrategy> make_attack(const ExperimentSpec& spec) {
    switch (spec.attack) {
    case AttackKind::Honest: return adversary::honest();
    case AttackKind::DishonestBob: return adversary::dishonest_bob(spec.positions);
    case AttackKind::EveBell: return adversary::eve_bell(spec.positions);
    case AttackKind::EveCnot: return adversary::eve_cnot_ancilla(resolved_targets(spec), spec.timing);
    case AttackKind::EveDelay: return adversary::eve_measure_resend_delay();
    }
    throw std::invalid_argument("unknown attack kind");
}

void validate_spec(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (spec.session.n_triplets < 0) throw std::invalid_argument("triplets must be >= 0");
    const bool takes_positions =
        spec.attack == AttackKind::DishonestBob || spec.attack == AttackKind::EveBell;
    if (takes_positions) {
        if (spec.positions < 0 || spec.positions > spec.session.n_triplets / 4) {
            throw std::invalid_argument(
                "attacked position count must lie in 0..N/4 for this attack");
        }
    } else if (spec.positions != 0) {
        throw std::invalid_argument("--positions applies to dishonest-bob and eve-bell only");
    }
    if (spec.attack == AttackKind::EveDelay) {
        if (spec.session.variant != protocol::Variant::MeasureResend) {
            throw std::invalid_argument("eve-delay applies to the measure-resend variant only");
        }
        if (spec.session.announce_receipt_before_disclosure) {
            throw std::invalid_argument("eve-delay requires broken timing (--timing broken)");
        }
    }
    if (spec.attack == AttackKind::EveCnot &&
        spec.timing == adversary::CnotTiming::BrokenOrdering &&
        spec.session.announce_receipt_before_disclosure) {
        throw std::invalid_argument(
            "eve-cnot broken ordering requires broken timing (--timing broken)");
    }
}

TrialRow run_trial(const ExperimentSpec& spec, int trial) {
    protocol::SessionConfig cfg = spec.session;
    cfg.seed = spec.base_seed + static_cast<std::uint64_t>(trial);
    auto attack = make_attack(spec);
    const protocol::SessionResult result = protocol::run_session(cfg, *attack);
    const adversary::AttackScore sc = adversary::score(*attack, result);

    TrialRow row;
    row.trial = trial;
    row.escaped = sc.escaped;
    row.detection_rate = sc.detection_rate;
    row.bits_learned = sc.bits_learned;
    row.err_case = result.error_rates;
    row.secret_len = static_cast<int>(result.alice_secret.size());
    row.agree = result.alice_secret == result.reconstructed_secret;
    row.aborted = result.aborted;
    row.attacked_rounds = sc.attacked_rounds;
    row.attacked_case_rounds = sc.attacked_case_rounds;
    row.attacked_case_errors = sc.attacked_case_errors;
    row.both_share_attacked = sc.both_share_attacked;
    row.guesses_scored = sc.guesses_scored;
    row.joint = sc.alice_bob_joint;
    return row;
}

// binomial 3-sigma width for a rate estimated from n samples
double binomial_sigma(double p, long long n) {
    if (n <= 0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

GateCheck two_sided(std::string name, double observed, double reference, double sigma,
                    long long samples, std::string formula, double slack = 0.0) {
    GateCheck g;
    g.name = std::move(name);
    g.observed = observed;
    g.reference = reference;
    g.sigma = sigma;
    g.slack = slack;
    g.samples = samples;
    g.one_sided = false;
    g.pass = std::abs(observed - reference) <= 3.0 * sigma + slack;
    g.formula = std::move(formula);
    return g;
}

GateCheck one_sided(std::string name, double observed, double bound, long long samples,
                    std::string formula) {
    GateCheck g;
    g.name = std::move(name);
    g.observed = observed;
    g.reference = bound;
    g.samples = samples;
    g.one_sided = true;
    g.pass = observed <= bound;
    g.formula = std::move(formula);
    return g;
}

void evaluate_gates(ExperimentReport& rep) {
    const ExperimentSpec& spec = rep.spec;
    Aggregates& agg = rep.aggregates;
    const long long t = rep.trials.size();
    const double n = spec.session.n_triplets;

    switch (spec.attack) {
    case AttackKind::Honest: {
        double max_rate = 0.0;
        for (double r : agg.mean_error_rates) max_rate = std::max(max_rate, r);
        rep.gates.push_back(one_sided("zero_error_rates", max_rate, 0.0, t,
                                      "noiseless honest channel: every case rate 0"));
        rep.gates.push_back(two_sided("all_secrets_agree", agg.all_agree ? 1.0 : 0.0, 1.0,
                                      0.0, t, "reconstructed secret equals Alice's"));
        const double sigma = std::sqrt(3.0 * n / 64.0) / std::sqrt(static_cast<double>(t));
        rep.gates.push_back(two_sided("secret_len_mean", agg.mean_secret_len, n / 8.0, sigma,
                                      t, "about N/8 surviving SHARE bits", 0.5));
        break;
    }
    case AttackKind::DishonestBob:
    case AttackKind::EveBell: {
        const double ref = analytic_escape(spec.attack, spec.positions);
        agg.analytic_escape = ref;
        agg.analytic_formula = spec.attack == AttackKind::DishonestBob
                                   ? "(3/4)^l"
                                   : "(5/8)^m";
        rep.gates.push_back(two_sided("escape_rate", agg.escape_rate, ref,
                                      binomial_sigma(ref, t), t, *agg.analytic_formula));
        const int k = spec.attack == AttackKind::DishonestBob ? 1 : 3; // case 2 / case 4
        const long long rounds = agg.attacked_case_rounds[k];
        const double det = rounds ? static_cast<double>(agg.attacked_case_errors[k]) / rounds : 0.0;
        rep.gates.push_back(two_sided(spec.attack == AttackKind::DishonestBob
                                          ? "detection_given_charlie_check"
                                          : "detection_given_double_check",
                                      det, 0.5, binomial_sigma(0.5, rounds), rounds,
                                      "1/2 per checked position"));
        break;
    }
    case AttackKind::EveCnot: {
        if (spec.timing == adversary::CnotTiming::BrokenOrdering) {
            rep.gates.push_back(one_sided("zero_detection",
                                          static_cast<double>(agg.attacked_errors_total), 0.0,
                                          agg.attacked_rounds_total,
                                          "order known before receipt: no disturbance"));
            const double recovery =
                agg.both_share_total
                    ? static_cast<double>(agg.bits_learned_total) / agg.both_share_total
                    : 1.0;
            rep.gates.push_back(two_sided("both_share_recovery", recovery, 1.0, 0.0,
                                          agg.both_share_total,
                                          "ancilla XOR yields every SHARE bit"));
        } else {
            const double ref = cnot_action4_detection_oracle(resolved_targets(spec));
            const long long rounds = agg.attacked_case_rounds[3];
            const double det =
                rounds ? static_cast<double>(agg.attacked_case_errors[3]) / rounds : 0.0;
            rep.gates.push_back(two_sided("action4_detection", det, ref,
                                          binomial_sigma(ref, rounds), rounds,
                                          "1 - P(phi0) from the Born-distribution oracle"));
            const long long mi_samples =
                agg.joint_total[0][0] + agg.joint_total[0][1] + agg.joint_total[1][0] +
                agg.joint_total[1][1];
            if (mi_samples >= 100000) {
                rep.gates.push_back(one_sided("lone_ancilla_mi",
                                              *agg.mutual_information_bits, 1e-3, mi_samples,
                                              "ancilla bit carries nothing about Alice's bit"));
            }
        }
        break;
    }
    case AttackKind::EveDelay: {
        rep.gates.push_back(one_sided("zero_detection",
                                      static_cast<double>(agg.attacked_errors_total), 0.0,
                                      agg.attacked_rounds_total,
                                      "classical-state returns measured without disturbance"));
        const double recovery =
            agg.both_share_total
                ? static_cast<double>(agg.bits_learned_total) / agg.both_share_total
                : 1.0;
        rep.gates.push_back(two_sided("both_share_recovery", recovery, 1.0, 0.0,
                                      agg.both_share_total,
                                      "held SHARE qubits reveal both bits"));
        break;
    }
    }

    rep.pass = std::all_of(rep.gates.begin(), rep.gates.end(),
                           [](const GateCheck& g) { return g.pass; });
}

} // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);

    ExperimentReport rep;
    rep.spec = spec;
    rep.trials.resize(static_cast<std::size_t>(spec.trials));

    int threads = spec.threads > 0 ? spec.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, spec.trials);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= spec.trials) return;
            rep.trials[static_cast<std::size_t>(i)] = run_trial(spec, i);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // deterministic fold in trial order
    Aggregates& agg = rep.aggregates;
    long long escaped_count = 0;
    double secret_len_sum = 0.0;
    for (const TrialRow& row : rep.trials) {
        escaped_count += row.escaped ? 1 : 0;
        for (int k = 0; k < 4; ++k) {
            agg.mean_error_rates[k] += row.err_case[k];
            agg.attacked_case_rounds[k] += row.attacked_case_rounds[k];
            agg.attacked_case_errors[k] += row.attacked_case_errors[k];
        }
        secret_len_sum += row.secret_len;
        agg.both_share_total += row.both_share_attacked;
        agg.bits_learned_total += row.bits_learned;
        agg.attacked_rounds_total += row.attacked_rounds;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) agg.joint_total[a][b] += row.joint[a][b];
        agg.aborted_trials += row.aborted ? 1 : 0;
        agg.all_agree = agg.all_agree && row.agree;
    }
    for (int k = 0; k < 4; ++k) {
        agg.attacked_errors_total += agg.attacked_case_errors[k];
        agg.mean_error_rates[k] /= static_cast<double>(spec.trials);
    }
    agg.escape_rate = static_cast<double>(escaped_count) / spec.trials;
    agg.detection_rate =
        agg.attacked_rounds_total
            ? static_cast<double>(agg.attacked_errors_total) / agg.attacked_rounds_total
            : 0.0;
    agg.mean_secret_len = secret_len_sum / static_cast<double>(spec.trials);
    agg.mutual_information_bits = mutual_information_bits(agg.joint_total);

    evaluate_gates(rep);
    return rep;
}

namespace {

json spec_to_json(const ExperimentSpec& spec) {
    json j;
    j["variant"] = protocol::to_string(spec.session.variant);
    j["attack"] = to_string(spec.attack);
    j["positions"] = spec.positions;
    j["triplets"] = spec.session.n_triplets;
    j["trials"] = spec.trials;
    j["base_seed"] = spec.base_seed;
    j["timing"] = spec.session.announce_receipt_before_disclosure ? "compliant" : "broken";
    j["threshold"] = spec.session.error_threshold;
    j["reveal_fraction"] = spec.session.reveal_fraction;
    if (spec.attack == AttackKind::EveCnot) {
        const auto t = resolved_targets(spec);
        json targets = json::array();
        if (t.bob) targets.push_back("bob");
        if (t.charlie) targets.push_back("charlie");
        j["cnot_targets"] = targets;
    }
    return j;
}

} // namespace

void write_json(const ExperimentReport& rep, std::ostream& os) {
    const Aggregates& agg = rep.aggregates;
    json j;
    j["spec"] = spec_to_json(rep.spec);

    json ja;
    ja["escape_rate"] = agg.escape_rate;
    ja["detection_rate"] = agg.detection_rate;
    ja["mean_error_rates"] = agg.mean_error_rates;
    json cond;
    for (int k = 0; k < 4; ++k) {
        json c;
        c["rounds"] = agg.attacked_case_rounds[k];
        c["errors"] = agg.attacked_case_errors[k];
        c["rate"] = agg.attacked_case_rounds[k]
                        ? static_cast<double>(agg.attacked_case_errors[k]) /
                              agg.attacked_case_rounds[k]
                        : 0.0;
        cond["case" + std::to_string(k + 1)] = c;
    }
    ja["attacked_detection_by_case"] = cond;
    ja["mean_secret_len"] = agg.mean_secret_len;
    ja["both_share_total"] = agg.both_share_total;
    ja["bits_learned_total"] = agg.bits_learned_total;
    ja["joint_alice_bob"] = agg.joint_total;
    if (agg.mutual_information_bits) {
        ja["mutual_information_bits"] = *agg.mutual_information_bits;
    }
    ja["aborted_trials"] = agg.aborted_trials;
    ja["all_agree"] = agg.all_agree;
    if (agg.analytic_escape) {
        ja["analytic_escape"] = *agg.analytic_escape;
        ja["analytic_formula"] = *agg.analytic_formula;
    } else {
        ja["analytic_escape"] = nullptr;
        ja["analytic_formula"] = nullptr;
    }
    j["aggregates"] = ja;

    json jg = json::array();
    for (const auto& g : rep.gates) {
        json e;
        e["name"] = g.name;
        e["observed"] = g.observed;
        e["reference"] = g.reference;
        e["sigma"] = g.sigma;
        e["slack"] = g.slack;
        e["samples"] = g.samples;
        e["one_sided"] = g.one_sided;
        e["pass"] = g.pass;
        e["formula"] = g.formula;
        jg.push_back(e);
    }
    j["gates"] = jg;
    j["pass"] = rep.pass;

    json jt = json::array();
    for (const auto& r : rep.trials) {
        json e;
        e["trial"] = r.trial;
        e["escaped"] = r.escaped;
        e["detection_rate"] = r.detection_rate;
        e["bits_learned"] = r.bits_learned;
        e["err_case1"] = r.err_case[0];
        e["err_case2"] = r.err_case[1];
        e["err_case3"] = r.err_case[2];
        e["err_case4"] = r.err_case[3];
        e["secret_len"] = r.secret_len;
        e["agree"] = r.agree;
        e["aborted"] = r.aborted;
        e["attacked_rounds"] = r.attacked_rounds;
        e["attacked_case_rounds"] = r.attacked_case_rounds;
        e["attacked_case_errors"] = r.attacked_case_errors;
        e["both_share_attacked"] = r.both_share_attacked;
        e["joint_alice_bob"] = r.joint;
        jt.push_back(e);
    }
    j["trials"] = jt;

    os << j.dump(2) << '\n';
}

void write_csv(const ExperimentReport& rep, std::ostream& os) {
    os << "trial,escaped,detection_rate,bits_learned,err_case1,err_case2,err_case3,"
          "err_case4,secret_len,agree\n";
    std::ostringstream num;
    num << std::setprecision(17);
    auto fmt = [&num](double v) {
        num.str("");
        num << v;
        return num.str();
    };
    for (const auto& r : rep.trials) {
        os << r.trial << ',' << (r.escaped ? 1 : 0) << ',' << fmt(r.detection_rate) << ','
           << r.bits_learned << ',' << fmt(r.err_case[0]) << ',' << fmt(r.err_case[1]) << ','
           << fmt(r.err_case[2]) << ',' << fmt(r.err_case[3]) << ',' << r.secret_len << ','
           << (r.agree ? 1 : 0) << '\n';
    }
}

void write_report_file(const ExperimentReport& rep, const std::string& path,
                       ReportFormat format) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output path for writing: " + path);
    if (format == ReportFormat::Json) {
        write_json(rep, os);
    } else {
        write_csv(rep, os);
    }
    os.flush();
    if (!os) throw std::runtime_error("write failed on output path: " + path);
}

void write_transcripts(const ExperimentSpec& spec, std::ostream& os) {
    validate_spec(spec);
    protocol::write_transcript_header(os);
    for (int i = 0; i < spec.trials; ++i) {
        protocol::SessionConfig cfg = spec.session;
        cfg.seed = spec.base_seed + static_cast<std::uint64_t>(i);
        auto attack = make_attack(spec);
        const auto result = protocol::run_session(cfg, *attack);
        protocol::write_transcript(result, i, os);
    }
}

} // namespace sqss::harness
