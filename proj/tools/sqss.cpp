// sqss: run seeded secret-sharing experiments against channel attacks, check
// the built-in states, or run the quick property battery.
//
// Exit codes: 0 = all statistical gates passed, 1 = a gate failed,
// 2 = usage/configuration error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqss/harness.hpp"
#include "sqss/kernels.hpp"
#include "sqss/states.hpp"

namespace {

using sqss::harness::AttackKind;
using sqss::harness::ExperimentReport;
using sqss::harness::ExperimentSpec;
using sqss::harness::GateCheck;

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

void print_check(const CheckLine& c) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name;
    if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
    std::cout << '\n';
}

void print_gate(const GateCheck& g) {
    std::ostringstream detail;
    detail << std::setprecision(10) << "observed=" << g.observed;
    if (g.one_sided) {
        detail << " bound=" << g.reference;
    } else {
        detail << " reference=" << g.reference << " 3sigma=" << 3.0 * g.sigma;
        if (g.slack > 0) detail << " slack=" << g.slack;
    }
    detail << " n=" << g.samples << "; " << g.formula;
    print_check({g.name, g.pass, detail.str()});
}

bool print_report_gates(const ExperimentReport& rep) {
    for (const auto& g : rep.gates) print_gate(g);
    return rep.pass;
}

// ---- verify-state: the states-module checks ----

std::vector<CheckLine> state_checks() {
    using namespace sqss;
    std::vector<CheckLine> out;
    std::ostringstream detail;

    const auto psi = states::prepare_psi();
    {
        bool ok = true;
        double worst = 0.0;
        for (std::uint64_t k = 0; k < 8; ++k) {
            const double want = (k == 0 || k == 3 || k == 5 || k == 6) ? 0.5 : 0.0;
            worst = std::max(worst, std::abs(psi.amplitude(k) - qsim::cplx{want, 0.0}));
        }
        ok = worst <= qsim::kAmplitudeTol;
        detail.str("");
        detail << "max amplitude deviation " << worst;
        out.push_back({"triplet_amplitudes", ok, detail.str()});
    }
    {
        auto h3 = psi;
        for (int q = 0; q < 3; ++q) qsim::apply_gate(h3, qsim::gates::hadamard(), q);
        const double f = qsim::fidelity(h3, states::ghz());
        detail.str("");
        detail << "fidelity " << std::setprecision(17) << f;
        out.push_back({"hadamard_cubed_maps_to_ghz", f >= 1.0 - qsim::kAmplitudeTol, detail.str()});
    }
    {
        const auto& phi = states::phi_basis();
        double worst = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            for (std::size_t j = 0; j < phi.size(); ++j) {
                qsim::cplx g{0.0, 0.0};
                for (std::uint64_t k = 0; k < 8; ++k) {
                    g += std::conj(phi.vector(i).amplitude(k)) * phi.vector(j).amplitude(k);
                }
                const qsim::cplx want = i == j ? qsim::cplx{1.0, 0.0} : qsim::cplx{0.0, 0.0};
                worst = std::max(worst, std::abs(g - want));
            }
        }
        detail.str("");
        detail << "max Gram deviation " << worst;
        out.push_back({"phi_basis_orthonormal", worst <= qsim::kUnitaryTol, detail.str()});

        // completeness: sum_i |phi_i><phi_i| = identity
        worst = 0.0;
        for (std::uint64_t r = 0; r < 8; ++r) {
            for (std::uint64_t c = 0; c < 8; ++c) {
                qsim::cplx sum{0.0, 0.0};
                for (std::size_t i = 0; i < phi.size(); ++i) {
                    sum += phi.vector(i).amplitude(r) * std::conj(phi.vector(i).amplitude(c));
                }
                const qsim::cplx want = r == c ? qsim::cplx{1.0, 0.0} : qsim::cplx{0.0, 0.0};
                worst = std::max(worst, std::abs(sum - want));
            }
        }
        detail.str("");
        detail << "max resolution-of-identity deviation " << worst;
        out.push_back({"phi_basis_complete", worst <= qsim::kUnitaryTol, detail.str()});

        const double f = qsim::fidelity(phi.vector(0), psi);
        detail.str("");
        detail << "fidelity " << std::setprecision(17) << f;
        out.push_back({"phi0_equals_triplet", f >= 1.0 - qsim::kAmplitudeTol, detail.str()});
    }
    {
        const auto& bell = states::bell_basis();
        double worst = 0.0;
        for (std::size_t i = 0; i < bell.size(); ++i) {
            for (std::size_t j = 0; j < bell.size(); ++j) {
                qsim::cplx g{0.0, 0.0};
                for (std::uint64_t k = 0; k < 4; ++k) {
                    g += std::conj(bell.vector(i).amplitude(k)) * bell.vector(j).amplitude(k);
                }
                const qsim::cplx want = i == j ? qsim::cplx{1.0, 0.0} : qsim::cplx{0.0, 0.0};
                worst = std::max(worst, std::abs(g - want));
            }
        }
        detail.str("");
        detail << "max Gram deviation " << worst;
        out.push_back({"bell_basis_orthonormal", worst <= qsim::kUnitaryTol, detail.str()});
    }
    {
        // every nonzero amplitude of the triplet satisfies a = b XOR c
        bool ok = true;
        for (std::uint64_t k = 0; k < 8; ++k) {
            if (std::abs(psi.amplitude(k)) < 1e-14) continue;
            const int a = static_cast<int>((k >> 2) & 1);
            const int b = static_cast<int>((k >> 1) & 1);
            const int c = static_cast<int>(k & 1);
            ok = ok && a == (b ^ c);
        }
        out.push_back({"xor_correlation_law", ok, "support obeys a = b XOR c"});
    }
    return out;
}

// ---- selftest: quick property battery over the production paths ----

std::vector<CheckLine> qsim_property_checks() {
    using namespace sqss;
    std::vector<CheckLine> out;
    std::ostringstream detail;

    {
        // Born consistency, 1e5 samples: phi measurement of |0> (x) PhiPlus
        // hits phi0/phi1 half the time each
        qsim::Rng rng(20260808);
        auto base = qsim::extend_with_ancilla(states::bell_phi_plus(), 0);
        // reorder: want |0>_A (x) PhiPlus_BC; build directly instead
        std::vector<qsim::cplx> a(8, qsim::cplx{0.0, 0.0});
        a[0b000] = 1.0 / std::sqrt(2.0);
        a[0b011] = 1.0 / std::sqrt(2.0);
        auto state = qsim::StateVector::from_amplitudes(3, std::move(a));
        (void)base;
        const std::array<int, 3> targets{0, 1, 2};
        const auto probs = qsim::born_distribution(state, states::phi_basis(), targets);
        const int samples = 100000;
        std::array<int, 8> counts{};
        for (int i = 0; i < samples; ++i) {
            auto s = state;
            counts[static_cast<std::size_t>(
                qsim::collapse_in_basis(s, states::phi_basis(), targets, rng))]++;
        }
        bool ok = true;
        double worst = 0.0;
        for (int k = 0; k < 8; ++k) {
            const double f = static_cast<double>(counts[k]) / samples;
            const double sigma = std::sqrt(std::max(probs[k] * (1 - probs[k]), 0.0) / samples);
            const double dev = std::abs(f - probs[k]);
            worst = std::max(worst, sigma > 0 ? dev / sigma : dev);
            ok = ok && dev <= 3.0 * sigma + 1e-12;
        }
        detail.str("");
        detail << "worst deviation " << worst << " sigma over " << samples << " samples";
        out.push_back({"born_consistency_phi", ok, detail.str()});
    }
    {
        // collapse idempotence: second measurement repeats the first
        qsim::Rng rng(7);
        bool ok = true;
        for (int rep = 0; rep < 500 && ok; ++rep) {
            std::vector<qsim::cplx> a(8);
            double norm = 0.0;
            for (auto& v : a) {
                v = {rng.next_double() - 0.5, rng.next_double() - 0.5};
                norm += std::norm(v);
            }
            for (auto& v : a) v /= std::sqrt(norm);
            auto s = qsim::StateVector::from_amplitudes(3, std::move(a));
            const int first = qsim::collapse_computational(s, 1, rng);
            const int second = qsim::collapse_computational(s, 1, rng);
            ok = first == second;
        }
        out.push_back({"collapse_idempotent", ok, "500 random states"});
    }
    {
        // determinism: equal seeds give identical outcome sequences
        auto run = [](std::uint64_t seed) {
            qsim::Rng rng(seed);
            std::vector<int> seq;
            for (int i = 0; i < 200; ++i) {
                auto psi = sqss::states::prepare_psi();
                seq.push_back(qsim::collapse_computational(psi, 1, rng));
                const std::array<int, 2> pair{0, 2};
                seq.push_back(qsim::collapse_in_basis(psi, states::bell_basis(), pair, rng));
            }
            return seq;
        };
        const bool ok = run(99) == run(99) && run(99) != run(100);
        out.push_back({"deterministic_streams", ok, "equal seeds, equal outcomes"});
    }
    {
        const char* name = qsim::kernels::active().name;
        detail.str("");
        detail << "kernel backend: " << name;
        out.push_back({"kernel_backend_selected", true, detail.str()});
    }
    return out;
}

ExperimentSpec base_spec(AttackKind kind, sqss::protocol::Variant variant, int triplets,
                         int trials, std::uint64_t seed) {
    ExperimentSpec spec;
    spec.session.variant = variant;
    spec.session.n_triplets = triplets;
    spec.attack = kind;
    spec.trials = trials;
    spec.base_seed = seed;
    return spec;
}

int run_selftest() {
    using sqss::adversary::CnotTiming;
    using sqss::protocol::Variant;

    bool all = true;
    std::cout << "== state checks ==\n";
    for (const auto& c : state_checks()) {
        print_check(c);
        all = all && c.pass;
    }
    std::cout << "== simulator properties ==\n";
    for (const auto& c : qsim_property_checks()) {
        print_check(c);
        all = all && c.pass;
    }

    struct Item {
        const char* title;
        ExperimentSpec spec;
    };
    std::vector<Item> items;
    items.push_back({"honest randomization", base_spec(AttackKind::Honest, Variant::RandomizationBased, 1024, 20, 11)});
    items.push_back({"honest measure-resend", base_spec(AttackKind::Honest, Variant::MeasureResend, 1024, 20, 12)});
    {
        auto s = base_spec(AttackKind::DishonestBob, Variant::RandomizationBased, 16, 20000, 13);
        s.positions = 1;
        s.session.error_threshold = 0.0;
        items.push_back({"dishonest-bob l=1", s});
    }
    {
        auto s = base_spec(AttackKind::EveBell, Variant::RandomizationBased, 16, 20000, 14);
        s.positions = 1;
        items.push_back({"eve-bell m=1", s});
    }
    {
        auto s = base_spec(AttackKind::EveCnot, Variant::RandomizationBased, 32, 200, 15);
        s.timing = CnotTiming::BrokenOrdering;
        s.session.announce_receipt_before_disclosure = false;
        items.push_back({"eve-cnot broken ordering", s});
    }
    {
        auto s = base_spec(AttackKind::EveDelay, Variant::MeasureResend, 32, 200, 16);
        s.session.announce_receipt_before_disclosure = false;
        items.push_back({"eve-delay broken ordering", s});
    }
    {
        auto s = base_spec(AttackKind::EveCnot, Variant::RandomizationBased, 32, 2000, 17);
        s.timing = CnotTiming::Compliant;
        items.push_back({"eve-cnot compliant", s});
    }

    for (const auto& item : items) {
        std::cout << "== " << item.title << " ==\n";
        const auto rep = sqss::harness::run_experiment(item.spec);
        all = print_report_gates(rep) && all;
    }
    std::cout << (all ? "selftest: PASS\n" : "selftest: FAIL\n");
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-quantum secret sharing simulator"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "run a Monte Carlo experiment");
    std::string variant = "randomization";
    std::string attack = "honest";
    int positions = 0;
    int triplets = 64;
    int trials = 1000;
    std::uint64_t seed = 1;
    std::string timing = "compliant";
    double threshold = 0.0;
    std::string out_path;
    std::string format = "json";
    std::string transcript_path;
    int threads = 0;

    std::string config_path;
    run->add_option("--config", config_path,
                    "flat key=value file mirroring the flags; flags override");
    run->add_option("--variant", variant, "randomization | measure-resend")
        ->check(CLI::IsMember({"randomization", "measure-resend"}));
    run->add_option("--attack", attack, "honest | dishonest-bob | eve-bell | eve-cnot | eve-delay")
        ->check(CLI::IsMember({"honest", "dishonest-bob", "eve-bell", "eve-cnot", "eve-delay"}));
    run->add_option("--positions", positions, "attacked position count (dishonest-bob l / eve-bell m)");
    run->add_option("--triplets", triplets, "entangled triplets per session (N)");
    run->add_option("--trials", trials, "Monte Carlo trials");
    run->add_option("--seed", seed, "base seed; trial i uses seed+i");
    run->add_option("--timing", timing, "compliant | broken (receipt/disclosure order)")
        ->check(CLI::IsMember({"compliant", "broken"}));
    run->add_option("--threshold", threshold, "abort threshold for case error rates");
    run->add_option("--out", out_path, "report file path");
    run->add_option("--format", format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
    run->add_option("--transcript", transcript_path, "per-round transcript CSV path");
    run->add_option("--threads", threads, "worker threads (0 = hardware)");

    // --- verify-state ---
    auto* verify = app.add_subcommand("verify-state", "check the built-in states and bases");

    // --- selftest ---
    auto* selftest = app.add_subcommand("selftest", "run the quick property battery");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) {
            bool all = true;
            for (const auto& c : state_checks()) {
                print_check(c);
                all = all && c.pass;
            }
            std::cout << (all ? "verify-state: PASS\n" : "verify-state: FAIL\n");
            return all ? 0 : 1;
        }
        if (selftest->parsed()) {
            return run_selftest();
        }

        // run: merge config-file values under explicit flags
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw std::invalid_argument("cannot read config file: " + config_path);
            const auto given = [&run](const std::string& flag) {
                return run->count(flag) > 0;
            };
            std::string line;
            int lineno = 0;
            while (std::getline(is, line)) {
                ++lineno;
                const auto hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                const auto eq = line.find('=');
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                if (eq == std::string::npos) {
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                " is not key=value");
                }
                auto trim = [](std::string s) {
                    const auto b = s.find_first_not_of(" \t\r");
                    const auto e = s.find_last_not_of(" \t\r");
                    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
                };
                const std::string key = trim(line.substr(0, eq));
                const std::string value = trim(line.substr(eq + 1));
                try {
                    if (key == "variant") {
                        if (!given("--variant")) variant = value;
                    } else if (key == "attack") {
                        if (!given("--attack")) attack = value;
                    } else if (key == "positions") {
                        if (!given("--positions")) positions = std::stoi(value);
                    } else if (key == "triplets") {
                        if (!given("--triplets")) triplets = std::stoi(value);
                    } else if (key == "trials") {
                        if (!given("--trials")) trials = std::stoi(value);
                    } else if (key == "seed") {
                        if (!given("--seed")) seed = std::stoull(value);
                    } else if (key == "timing") {
                        if (!given("--timing")) timing = value;
                    } else if (key == "threshold") {
                        if (!given("--threshold")) threshold = std::stod(value);
                    } else if (key == "out") {
                        if (!given("--out")) out_path = value;
                    } else if (key == "format") {
                        if (!given("--format")) format = value;
                    } else if (key == "transcript") {
                        if (!given("--transcript")) transcript_path = value;
                    } else if (key == "threads") {
                        if (!given("--threads")) threads = std::stoi(value);
                    } else {
                        throw std::invalid_argument("unknown config key: " + key);
                    }
                } catch (const std::invalid_argument&) {
                    throw;
                } catch (const std::exception&) {
                    throw std::invalid_argument("bad value for config key " + key + ": " + value);
                }
            }
            // config values bypass the flag validators; re-check the enums
            const auto expect = [](const char* name, const std::string& val,
                                   std::initializer_list<const char*> allowed) {
                for (const char* a : allowed) {
                    if (val == a) return;
                }
                std::string msg = std::string(name) + " must be one of:";
                for (const char* a : allowed) msg += std::string(" ") + a;
                throw std::invalid_argument(msg);
            };
            expect("variant", variant, {"randomization", "measure-resend"});
            expect("timing", timing, {"compliant", "broken"});
            expect("format", format, {"json", "csv"});
        }

        ExperimentSpec spec;
        spec.session.variant = variant == "randomization"
                                   ? sqss::protocol::Variant::RandomizationBased
                                   : sqss::protocol::Variant::MeasureResend;
        spec.session.n_triplets = triplets;
        spec.session.error_threshold = threshold;
        spec.session.announce_receipt_before_disclosure = timing == "compliant";
        spec.attack = sqss::harness::attack_from_label(attack);
        spec.positions = positions;
        spec.timing = timing == "compliant" ? sqss::adversary::CnotTiming::Compliant
                                            : sqss::adversary::CnotTiming::BrokenOrdering;
        spec.trials = trials;
        spec.base_seed = seed;
        spec.threads = threads;

        const ExperimentReport rep = sqss::harness::run_experiment(spec);

        if (!out_path.empty()) {
            sqss::harness::write_report_file(rep, out_path,
                                             format == "json"
                                                 ? sqss::harness::ReportFormat::Json
                                                 : sqss::harness::ReportFormat::Csv);
        }
        if (!transcript_path.empty()) {
            std::ofstream os(transcript_path, std::ios::binary);
            if (!os) throw std::runtime_error("cannot open output path for writing: " + transcript_path);
            sqss::harness::write_transcripts(spec, os);
        }

        std::cout << "attack=" << attack << " variant=" << variant << " triplets=" << triplets
                  << " trials=" << trials << " seed=" << seed << '\n';
        const bool pass = print_report_gates(rep);
        if (!out_path.empty()) std::cout << "report: " << out_path << '\n';
        std::cout << (pass ? "result: PASS\n" : "result: FAIL\n");
        return pass ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
