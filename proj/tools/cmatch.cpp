// cmatch: command-line driver for stable-set listing, mechanism evaluation,
// obvious-manipulation checks and certification on market files.
//
// Exit codes: 0 success / negative finding, 1 usage or parse error,
// 2 positive finding (manipulation, obvious manipulation, failed
// certification), 3 search budget exceeded.

#include <cmatch/cmatch.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_found = 2;
constexpr int exit_budget = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string market_path;
    std::string mechanism;
    std::string q;
    std::string doctor;
    std::string truth;
    std::string report;
    std::string property = "nom";
    std::uint64_t budget = cmatch::default_budget;
    unsigned workers = 1;
    std::string format = "text";
    std::string out;
    std::size_t k = 0;
};

cmatch::ParsedMarket load_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open market file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return cmatch::parse_market(buf.str());
}

const cmatch::Profile& require_profile(const cmatch::ParsedMarket& pm) {
    if (!pm.profile) throw UsageError("market file has no doctor lines; a full profile is required");
    return *pm.profile;
}

cmatch::Mechanism resolve_mechanism(const RunConfig& cfg) {
    if (cfg.mechanism.empty() || cfg.mechanism == "quantile") {
        if (cfg.q.empty()) throw UsageError("--mechanism is required (or --q for a quantile mechanism)");
        return cmatch::Mechanism::quantile(cmatch::Quantile::parse(cfg.q));
    }
    if (!cfg.q.empty()) throw UsageError("--q only applies to --mechanism quantile");
    return cmatch::Mechanism::parse(cfg.mechanism);
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(cfg.out);
    if (!out) throw UsageError("cannot write '" + cfg.out + "'");
    out << text << (text.empty() || text.back() == '\n' ? "" : "\n");
}

int cmd_stable(const RunConfig& cfg) {
    auto pm = load_market(cfg.market_path);
    const auto& profile = require_profile(pm);
    auto s = cmatch::enumerate_stable(profile, pm.market);
    std::ostringstream os;
    for (const auto& y : s.allocations) os << cmatch::format_allocation(pm.market, y) << '\n';
    os << "k=" << s.k() << '\n';
    emit(cfg, os.str());
    return exit_ok;
}

int cmd_mech(const RunConfig& cfg) {
    auto pm = load_market(cfg.market_path);
    const auto& profile = require_profile(pm);
    const auto mech = resolve_mechanism(cfg);
    const auto& m = pm.market;
    auto y = cmatch::apply_mechanism(mech, profile, m);
    std::ostringstream os;
    os << mech.descriptor() << ": " << cmatch::format_allocation(m, y) << '\n';
    for (std::size_t d = 0; d < m.num_doctors(); ++d) {
        auto doc = cmatch::make_ix<cmatch::DoctorIx>(d);
        os << m.name(doc) << ':' << cmatch::format_outcome(m, cmatch::assigned_contract(m, y, doc)) << '\n';
    }
    emit(cfg, os.str());
    return exit_ok;
}

int cmd_check_om(const RunConfig& cfg) {
    auto pm = load_market(cfg.market_path);
    const auto& m = pm.market;
    const auto mech = resolve_mechanism(cfg);
    auto d = m.find_doctor(cfg.doctor);
    if (!d) throw UsageError("unknown doctor '" + cfg.doctor + "'");
    cmatch::DoctorPreference truth;
    if (!cfg.truth.empty() || !pm.profile)
        truth = cmatch::parse_ranking(m, *d, cfg.truth);
    else
        truth = (*pm.profile)[*d];
    const auto report = cmatch::parse_ranking(m, *d, cfg.report);

    cmatch::SearchOptions opts;
    opts.budget = cfg.budget;
    opts.workers = cfg.workers;
    auto v = cmatch::is_obvious_manipulation(mech, m, *d, truth, report, opts);
    if (cfg.format == "record")
        emit(cfg, cmatch::verdict_record(m, v));
    else
        emit(cfg, "mechanism:         " + mech.descriptor() + "\n" + cmatch::verdict_text(m, v));
    return v.is_obvious ? exit_found : exit_ok;
}

int cmd_certify(const RunConfig& cfg) {
    auto pm = load_market(cfg.market_path);
    const auto mech = resolve_mechanism(cfg);
    cmatch::CertifyOptions opts;
    opts.budget = cfg.budget;
    opts.workers = cfg.workers;
    auto cert = cmatch::certify(mech, pm.market, cmatch::parse_property(cfg.property), opts);
    emit(cfg, cfg.format == "record" ? cmatch::certificate_record(pm.market, cert)
                                     : cmatch::certificate_text(pm.market, cert));
    return cert.passed ? exit_ok : exit_found;
}

int cmd_theorem1(const RunConfig& cfg) {
    if (cfg.q.empty()) throw UsageError("--q is required");
    const auto q = cmatch::Quantile::parse(cfg.q);
    std::size_t k = cfg.k;
    if (k == 0) k = cmatch::minimal_k_for(q);
    const auto inst = cmatch::theorem1_market(k, q);
    const auto& m = inst.market;
    const auto file = cmatch::serialize_market(m, inst.truthful_profile());

    std::ostringstream os;
    if (cfg.out.empty()) {
        os << "# generated market (k=" << k << ", q=" << q.str() << ")\n" << file << '\n';
    } else {
        std::ofstream out(cfg.out);
        if (!out) throw UsageError("cannot write '" + cfg.out + "'");
        out << file;
        os << "market written to " << cfg.out << '\n';
    }

    const auto mech = cmatch::Mechanism::quantile(q);
    cmatch::SearchOptions opts;
    opts.budget = cfg.budget;
    opts.workers = cfg.workers;
    auto v = cmatch::is_obvious_manipulation(mech, m, cmatch::DoctorIx{0}, inst.truth, inst.report, opts);
    if (cfg.format == "record") {
        std::cout << os.str() << cmatch::verdict_record(m, v) << '\n';
    } else {
        os << "mechanism:   " << mech.descriptor() << '\n'
           << "O(P1)  = " << cmatch::detail::outcome_set_text(m, v.truth_options) << "   P1  = "
           << cmatch::format_ranking(m, inst.truth) << '\n'
           << "O(P1') = " << cmatch::detail::outcome_set_text(m, v.report_options) << "   P1' = "
           << cmatch::format_ranking(m, inst.report) << '\n'
           << "condition:   " << cmatch::to_string(v.triggered) << '\n'
           << "obvious manipulation: " << (v.is_obvious ? "yes" : "no") << '\n'
           << "NOM: " << (v.is_obvious ? "FAIL" : "PASS") << '\n';
        std::cout << os.str();
    }
    return v.is_obvious ? exit_found : exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stable matching with contracts: quantile mechanisms and obvious manipulations"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_search = [&](CLI::App* sub) {
        sub->add_option("--budget", cfg.budget, "Maximum number of search iterations")->check(CLI::PositiveNumber);
        sub->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "record"}));
    };
    auto add_mechanism = [&](CLI::App* sub) {
        sub->add_option("--mechanism", cfg.mechanism,
                        "quantile:<num>/<den> | quantile | interior | da:doctors | da:hospitals");
        sub->add_option("--q", cfg.q, "Quantile as num/den (with --mechanism quantile)");
    };

    auto* stable = app.add_subcommand("stable", "List all stable allocations under the file's doctor profile");
    stable->add_option("market", cfg.market_path, "Market file")->required();
    stable->add_option("--out", cfg.out, "Write output to a file");

    auto* mech = app.add_subcommand("mech", "Apply a mechanism to the file's doctor profile");
    mech->add_option("market", cfg.market_path, "Market file")->required();
    add_mechanism(mech);
    mech->add_option("--out", cfg.out, "Write output to a file");

    auto* check = app.add_subcommand("check-om", "Test whether a misreport is an obvious manipulation");
    check->add_option("market", cfg.market_path, "Market file")->required();
    add_mechanism(check);
    check->add_option("--doctor", cfg.doctor, "Doctor id")->required();
    check->add_option("--truth", cfg.truth, "True ranking, e.g. \"x1>x2\" (default: the file's doctor line)");
    check->add_option("--report", cfg.report, "Reported ranking, e.g. \"x1\"")->required();
    add_search(check);
    check->add_option("--out", cfg.out, "Write the verdict to a file");

    auto* cert = app.add_subcommand("certify", "Exhaustively certify NOM or strategy-proofness");
    cert->add_option("market", cfg.market_path, "Market file")->required();
    add_mechanism(cert);
    cert->add_option("--property", cfg.property, "nom | sp")->check(CLI::IsMember({"nom", "sp"}));
    add_search(cert);
    cert->add_option("--out", cfg.out, "Write the certificate to a file");

    auto* thm = app.add_subcommand("theorem1", "Build the two-doctor counterexample market and check it");
    thm->add_option("--k", cfg.k, "Number of d1-h1 contracts (default: smallest valid k)");
    thm->add_option("--q", cfg.q, "Quantile as num/den")->required();
    add_search(thm);
    thm->add_option("--out", cfg.out, "Write the generated market file here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*stable) return cmd_stable(cfg);
        if (*mech) return cmd_mech(cfg);
        if (*check) return cmd_check_om(cfg);
        if (*cert) return cmd_certify(cfg);
        if (*thm) return cmd_theorem1(cfg);
    } catch (const cmatch::BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return exit_budget;
    } catch (const cmatch::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return exit_usage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}
