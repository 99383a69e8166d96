#ifndef CMATCH_REPORT_HPP
#define CMATCH_REPORT_HPP

// Human-readable and machine-readable (JSON record) renderings of verdicts
// and certificates. Records use symbolic ids and read back through the same
// market to an equal value.

#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "parse.hpp"
#include "strategy.hpp"

namespace cmatch {

namespace detail {

using nlohmann::json;

inline json outcome_json(const Market& m, Outcome o) { return o ? json(m.name(*o)) : json(nullptr); }

inline Outcome outcome_from(const Market& m, const json& j) {
    if (j.is_null()) return std::nullopt;
    auto c = m.find_contract(j.get<std::string>());
    if (!c) throw std::invalid_argument("record names unknown contract " + j.get<std::string>());
    return c;
}

inline json ranking_json(const Market& m, const DoctorPreference& p) {
    json out = json::array();
    for (auto c : p.order) out.push_back(m.name(c));
    return out;
}

inline DoctorPreference ranking_from(const Market& m, DoctorIx d, const json& j) {
    DoctorPreference p{d, {}};
    for (const auto& id : j) {
        auto c = m.find_contract(id.get<std::string>());
        if (!c) throw std::invalid_argument("record names unknown contract " + id.get<std::string>());
        p.order.push_back(*c);
    }
    m.validate(p);
    return p;
}

inline json subprofile_json(const Market& m, const Subprofile& s) {
    json out = json::object();
    for (const auto& p : s.others) out[m.name(p.owner)] = ranking_json(m, p);
    return out;
}

inline Subprofile subprofile_from(const Market& m, DoctorIx omitted, const json& j) {
    Subprofile s{omitted, {}};
    for (std::size_t d = 0; d < m.num_doctors(); ++d) {
        if (d == idx(omitted)) continue;
        s.others.push_back(ranking_from(m, make_ix<DoctorIx>(d), j.at(m.doctors()[d])));
    }
    return s;
}

inline json options_json(const Market& m, const OptionSet& o) {
    json out = json::array();
    for (std::size_t i = 0; i < o.outcomes.size(); ++i)
        out.push_back({{"outcome", outcome_json(m, o.outcomes[i])}, {"witness", subprofile_json(m, o.witnesses[i])}});
    return out;
}

inline OptionSet options_from(const Market& m, DoctorIx d, const DoctorPreference& reported, const json& j) {
    OptionSet o{d, reported, {}, {}};
    for (const auto& e : j) {
        o.outcomes.push_back(outcome_from(m, e.at("outcome")));
        o.witnesses.push_back(subprofile_from(m, d, e.at("witness")));
    }
    return o;
}

inline Condition condition_from(const std::string& s) {
    for (auto c : {Condition::none, Condition::worst_case, Condition::best_case, Condition::both})
        if (s == to_string(c)) return c;
    throw std::invalid_argument("unknown condition '" + s + "'");
}

inline std::string outcome_set_text(const Market& m, const OptionSet& o) {
    std::string out = "{";
    for (std::size_t i = 0; i < o.outcomes.size(); ++i) {
        if (i) out += ",";
        out += format_outcome(m, o.outcomes[i]);
    }
    return out + "}";
}

inline std::string subprofile_text(const Market& m, const Subprofile& s) {
    std::string out;
    for (const auto& p : s.others) {
        if (!out.empty()) out += "; ";
        out += m.name(p.owner) + ": " + (p.order.empty() ? std::string("(nothing acceptable)") : format_ranking(m, p));
    }
    return out.empty() ? std::string("(no other doctors)") : out;
}

}  // namespace detail

inline nlohmann::json verdict_json(const Market& m, const OmVerdict& v) {
    using detail::outcome_json;
    nlohmann::json j;
    j["doctor"] = m.name(v.doctor);
    j["truth"] = detail::ranking_json(m, v.truth);
    j["report"] = detail::ranking_json(m, v.report);
    j["is_manipulation"] = v.manipulation.found;
    j["manipulation_witness"] =
        v.manipulation.witness ? detail::subprofile_json(m, *v.manipulation.witness) : nlohmann::json(nullptr);
    j["truthful_outcome"] = outcome_json(m, v.manipulation.truthful_outcome);
    j["reported_outcome"] = outcome_json(m, v.manipulation.reported_outcome);
    j["is_obvious"] = v.is_obvious;
    j["condition"] = to_string(v.triggered);
    j["worst_report"] = outcome_json(m, v.worst_report);
    j["worst_truth"] = outcome_json(m, v.worst_truth);
    j["best_report"] = outcome_json(m, v.best_report);
    j["best_truth"] = outcome_json(m, v.best_truth);
    j["truth_options"] = detail::options_json(m, v.truth_options);
    j["report_options"] = detail::options_json(m, v.report_options);
    return j;
}

inline OmVerdict verdict_from_json(const Market& m, const nlohmann::json& j) {
    using detail::outcome_from;
    OmVerdict v;
    v.doctor = m.doctor(j.at("doctor").get<std::string>());
    v.truth = detail::ranking_from(m, v.doctor, j.at("truth"));
    v.report = detail::ranking_from(m, v.doctor, j.at("report"));
    v.manipulation.found = j.at("is_manipulation").get<bool>();
    if (!j.at("manipulation_witness").is_null())
        v.manipulation.witness = detail::subprofile_from(m, v.doctor, j.at("manipulation_witness"));
    v.manipulation.truthful_outcome = outcome_from(m, j.at("truthful_outcome"));
    v.manipulation.reported_outcome = outcome_from(m, j.at("reported_outcome"));
    v.is_obvious = j.at("is_obvious").get<bool>();
    v.triggered = detail::condition_from(j.at("condition").get<std::string>());
    v.worst_report = outcome_from(m, j.at("worst_report"));
    v.worst_truth = outcome_from(m, j.at("worst_truth"));
    v.best_report = outcome_from(m, j.at("best_report"));
    v.best_truth = outcome_from(m, j.at("best_truth"));
    v.truth_options = detail::options_from(m, v.doctor, v.truth, j.at("truth_options"));
    v.report_options = detail::options_from(m, v.doctor, v.report, j.at("report_options"));
    return v;
}

inline nlohmann::json certificate_json(const Market& m, const Certificate& c) {
    nlohmann::json j;
    j["property"] = to_string(c.property);
    j["mechanism"] = c.mechanism;
    j["market_digest"] = c.market_digest;
    j["result"] = c.passed ? "PASS" : "FAIL";
    j["counterexample"] = c.counterexample ? verdict_json(m, *c.counterexample) : nlohmann::json(nullptr);
    j["iterations"] = c.iterations;
    j["evaluations"] = c.evaluations;
    j["pairs_examined"] = c.pairs_examined;
    j["wall_us"] = c.wall_us;
    return j;
}

inline Certificate certificate_from_json(const Market& m, const nlohmann::json& j) {
    Certificate c;
    c.property = parse_property(j.at("property").get<std::string>());
    c.mechanism = j.at("mechanism").get<std::string>();
    c.market_digest = j.at("market_digest").get<std::string>();
    const auto result = j.at("result").get<std::string>();
    if (result != "PASS" && result != "FAIL") throw std::invalid_argument("result must be PASS or FAIL");
    c.passed = result == "PASS";
    if (!j.at("counterexample").is_null()) c.counterexample = verdict_from_json(m, j.at("counterexample"));
    c.iterations = j.at("iterations").get<std::uint64_t>();
    c.evaluations = j.at("evaluations").get<std::uint64_t>();
    c.pairs_examined = j.at("pairs_examined").get<std::uint64_t>();
    c.wall_us = j.at("wall_us").get<std::int64_t>();
    return c;
}

inline std::string verdict_record(const Market& m, const OmVerdict& v) { return verdict_json(m, v).dump(); }
inline OmVerdict parse_verdict_record(const Market& m, const std::string& s) {
    return verdict_from_json(m, nlohmann::json::parse(s));
}
inline std::string certificate_record(const Market& m, const Certificate& c) { return certificate_json(m, c).dump(); }
inline Certificate parse_certificate_record(const Market& m, const std::string& s) {
    return certificate_from_json(m, nlohmann::json::parse(s));
}

inline std::string verdict_text(const Market& m, const OmVerdict& v) {
    auto rank = [&](const DoctorPreference& p) {
        return p.order.empty() ? std::string("(nothing acceptable)") : format_ranking(m, p);
    };
    std::ostringstream os;
    os << "doctor:            " << m.name(v.doctor) << '\n'
       << "truth:             " << rank(v.truth) << '\n'
       << "report:            " << rank(v.report) << '\n'
       << "O(truth):          " << detail::outcome_set_text(m, v.truth_options) << '\n'
       << "O(report):         " << detail::outcome_set_text(m, v.report_options) << '\n'
       << "worst  report/truth: " << format_outcome(m, v.worst_report) << " / " << format_outcome(m, v.worst_truth)
       << '\n'
       << "best   report/truth: " << format_outcome(m, v.best_report) << " / " << format_outcome(m, v.best_truth)
       << '\n'
       << "manipulation:      " << (v.manipulation.found ? "yes" : "no") << '\n';
    if (v.manipulation.witness)
        os << "  witness:         " << detail::subprofile_text(m, *v.manipulation.witness) << '\n'
           << "  outcome truth -> report: " << format_outcome(m, v.manipulation.truthful_outcome) << " -> "
           << format_outcome(m, v.manipulation.reported_outcome) << '\n';
    os << "condition:         " << to_string(v.triggered) << '\n'
       << "obvious:           " << (v.is_obvious ? "yes" : "no") << '\n';
    return os.str();
}

inline std::string certificate_text(const Market& m, const Certificate& c) {
    std::ostringstream os;
    os << "property:       " << to_string(c.property) << '\n'
       << "mechanism:      " << c.mechanism << '\n'
       << "market digest:  " << c.market_digest << '\n'
       << "result:         " << (c.passed ? "PASS" : "FAIL") << '\n';
    if (c.counterexample) os << "counterexample:\n" << verdict_text(m, *c.counterexample);
    os << "iterations:     " << c.iterations << '\n'
       << "evaluations:    " << c.evaluations << '\n'
       << "pairs examined: " << c.pairs_examined << '\n'
       << "wall time:      " << static_cast<double>(c.wall_us) / 1000.0 << " ms\n";
    return os.str();
}

}  // namespace cmatch

#endif  // CMATCH_REPORT_HPP
