#ifndef CMATCH_STRATEGY_HPP
#define CMATCH_STRATEGY_HPP

// Exhaustive strategic analysis for a single doctor: option sets over the
// full preference domain of the other doctors, manipulation and obvious
// manipulation tests, whole-market certification, and the two-doctor
// construction showing every quantile mechanism with q > 0 fails NOM.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "market.hpp"
#include "mechanisms.hpp"
#include "parse.hpp"

namespace cmatch {

inline constexpr std::uint64_t default_budget = 100'000'000;

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(std::uint64_t required, std::uint64_t budget)
        : std::runtime_error("search needs " + (required == std::numeric_limits<std::uint64_t>::max()
                                                     ? std::string("more than 2^64")
                                                     : std::to_string(required)) +
                             " iterations, budget is " + std::to_string(budget)),
          required_(required),
          budget_(budget) {}

    std::uint64_t required() const { return required_; }
    std::uint64_t budget() const { return budget_; }

private:
    std::uint64_t required_;
    std::uint64_t budget_;
};

struct SearchOptions {
    std::uint64_t budget = default_budget;
    unsigned workers = 1;
    /// Restricts every other doctor to the preference given here instead of
    /// the full domain. Certification always uses the full domain.
    std::optional<Profile> fixed_opponents;
};

/// Preferences of every doctor except `omitted`, in roster order.
struct Subprofile {
    DoctorIx omitted{};
    std::vector<DoctorPreference> others;

    Profile with(const DoctorPreference& own) const {
        Profile p;
        p.prefs.reserve(others.size() + 1);
        for (std::size_t i = 0, o = 0; i <= others.size(); ++i)
            p.prefs.push_back(i == idx(omitted) ? own : others[o++]);
        return p;
    }

    friend bool operator==(const Subprofile&, const Subprofile&) = default;
};

struct OptionSet {
    DoctorIx doctor{};
    DoctorPreference reported;
    /// Distinct outcomes, empty first, then by contract roster index.
    std::vector<Outcome> outcomes;
    /// witnesses[i] reproduces outcomes[i].
    std::vector<Subprofile> witnesses;

    bool contains(Outcome o) const { return std::find(outcomes.begin(), outcomes.end(), o) != outcomes.end(); }

    friend bool operator==(const OptionSet&, const OptionSet&) = default;
};

/// W(p, O): the worst member of the option set under `p`.
inline Outcome worst_case(const DoctorPreference& p, const OptionSet& o) {
    if (o.outcomes.empty()) throw std::invalid_argument("empty option set");
    return *std::max_element(o.outcomes.begin(), o.outcomes.end(),
                             [&](Outcome a, Outcome b) { return p.key(a) < p.key(b); });
}

/// C(p, O): the best member of the option set under `p`.
inline Outcome best_case(const DoctorPreference& p, const OptionSet& o) {
    if (o.outcomes.empty()) throw std::invalid_argument("empty option set");
    return *std::min_element(o.outcomes.begin(), o.outcomes.end(),
                             [&](Outcome a, Outcome b) { return p.key(a) < p.key(b); });
}

enum class Condition { none, worst_case, best_case, both };

inline const char* to_string(Condition c) {
    switch (c) {
        case Condition::none: return "none";
        case Condition::worst_case: return "worst-case";
        case Condition::best_case: return "best-case";
        case Condition::both: return "both";
    }
    return "none";
}

struct ManipulationResult {
    bool found = false;
    std::optional<Subprofile> witness;
    /// Outcomes at the witness under the truthful and the misreported preference.
    Outcome truthful_outcome, reported_outcome;

    friend bool operator==(const ManipulationResult&, const ManipulationResult&) = default;
};

struct OmVerdict {
    DoctorIx doctor{};
    DoctorPreference truth, report;
    ManipulationResult manipulation;
    bool is_obvious = false;
    Condition triggered = Condition::none;
    Outcome worst_report, worst_truth, best_report, best_truth;
    OptionSet truth_options, report_options;

    bool is_manipulation() const { return manipulation.found; }

    friend bool operator==(const OmVerdict&, const OmVerdict&) = default;
};

namespace detail {

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return b > std::numeric_limits<std::uint64_t>::max() - a ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

/// Runs fn(i) for i in [0, count) over `workers` threads in contiguous chunks.
template <class F>
void parallel_for(std::uint64_t count, unsigned workers, F fn) {
    if (workers <= 1 || count < 2) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> threads;
        const std::uint64_t chunk = (count + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    const std::uint64_t end = std::min(count, (w + 1) * chunk);
                    for (std::uint64_t i = w * chunk; i < end; ++i) fn(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Preference domains per doctor and mixed-radix addressing of profiles.
/// Doctor 0 is the most significant digit.
class ProfileSpace {
public:
    ProfileSpace(const Market& m, const std::optional<Profile>& fixed = std::nullopt) {
        if (fixed) m.validate(*fixed);
        for (std::size_t d = 0; d < m.num_doctors(); ++d) {
            if (fixed)
                domains_.push_back({fixed->prefs[d]});
            else
                domains_.push_back(enumerate_preferences(m, make_ix<DoctorIx>(d)));
        }
    }

    std::size_t num_doctors() const { return domains_.size(); }
    const std::vector<DoctorPreference>& domain(DoctorIx d) const { return domains_[idx(d)]; }

    std::uint64_t profile_count() const {
        std::uint64_t n = 1;
        for (const auto& dom : domains_) n = saturating_mul(n, dom.size());
        return n;
    }

    std::uint64_t subprofile_count(DoctorIx d) const {
        std::uint64_t n = 1;
        for (std::size_t i = 0; i < domains_.size(); ++i)
            if (i != idx(d)) n = saturating_mul(n, domains_[i].size());
        return n;
    }

    /// Digits (domain positions) of every doctor except `d` for subprofile `sub`.
    std::vector<std::size_t> sub_digits(DoctorIx d, std::uint64_t sub) const {
        std::vector<std::size_t> digits(domains_.size(), 0);
        for (std::size_t i = domains_.size(); i-- > 0;) {
            if (i == idx(d)) continue;
            digits[i] = static_cast<std::size_t>(sub % domains_[i].size());
            sub /= domains_[i].size();
        }
        return digits;
    }

    std::vector<std::size_t> profile_digits(std::uint64_t t) const {
        std::vector<std::size_t> digits(domains_.size(), 0);
        for (std::size_t i = domains_.size(); i-- > 0;) {
            digits[i] = static_cast<std::size_t>(t % domains_[i].size());
            t /= domains_[i].size();
        }
        return digits;
    }

    std::uint64_t profile_index(const std::vector<std::size_t>& digits) const {
        std::uint64_t t = 0;
        for (std::size_t i = 0; i < domains_.size(); ++i) t = t * domains_[i].size() + digits[i];
        return t;
    }

    Subprofile subprofile(DoctorIx d, std::uint64_t sub) const {
        auto digits = sub_digits(d, sub);
        Subprofile s{d, {}};
        for (std::size_t i = 0; i < domains_.size(); ++i)
            if (i != idx(d)) s.others.push_back(domains_[i][digits[i]]);
        return s;
    }

    Profile profile(const std::vector<std::size_t>& digits) const {
        Profile p;
        for (std::size_t i = 0; i < domains_.size(); ++i) p.prefs.push_back(domains_[i][digits[i]]);
        return p;
    }

private:
    std::vector<std::vector<DoctorPreference>> domains_;
};

/// d's outcome at (own, P_{-d}) for every subprofile in enumeration order.
inline std::vector<Outcome> outcome_row(const MechanismEvaluator& eval, const ProfileSpace& space, DoctorIx d,
                                        const DoctorPreference& own, unsigned workers) {
    const std::uint64_t count = space.subprofile_count(d);
    std::vector<Outcome> row(count);
    parallel_for(count, workers, [&](std::uint64_t sub) {
        row[sub] = assigned_contract(eval.market(), eval(space.subprofile(d, sub).with(own)), d);
    });
    return row;
}

inline OptionSet collect_options(const ProfileSpace& space, DoctorIx d, const DoctorPreference& reported,
                                 const std::vector<Outcome>& row) {
    std::vector<std::pair<Outcome, std::uint64_t>> first_seen;
    for (std::uint64_t sub = 0; sub < row.size(); ++sub) {
        bool seen = false;
        for (const auto& f : first_seen) seen = seen || f.first == row[sub];
        if (!seen) first_seen.emplace_back(row[sub], sub);
    }
    std::sort(first_seen.begin(), first_seen.end(), [](const auto& a, const auto& b) {
        if (!a.first || !b.first) return !a.first && b.first;
        return *a.first < *b.first;
    });
    OptionSet o{d, reported, {}, {}};
    for (const auto& [outcome, sub] : first_seen) {
        o.outcomes.push_back(outcome);
        o.witnesses.push_back(space.subprofile(d, sub));
    }
    if (o.outcomes.empty()) throw std::logic_error("empty option set");
    return o;
}

inline ManipulationResult find_manipulation(const ProfileSpace& space, DoctorIx d, const DoctorPreference& truth,
                                            const std::vector<Outcome>& truthful, const std::vector<Outcome>& reported) {
    for (std::uint64_t sub = 0; sub < truthful.size(); ++sub)
        if (truth.key(reported[sub]) < truth.key(truthful[sub]))
            return ManipulationResult{true, space.subprofile(d, sub), truthful[sub], reported[sub]};
    return {};
}

inline OmVerdict make_verdict(const ProfileSpace& space, DoctorIx d, const DoctorPreference& truth,
                              const DoctorPreference& report, const std::vector<Outcome>& truthful,
                              const std::vector<Outcome>& reported) {
    OmVerdict v;
    v.doctor = d;
    v.truth = truth;
    v.report = report;
    v.truth_options = collect_options(space, d, truth, truthful);
    v.report_options = collect_options(space, d, report, reported);
    v.worst_truth = worst_case(truth, v.truth_options);
    v.worst_report = worst_case(truth, v.report_options);
    v.best_truth = best_case(truth, v.truth_options);
    v.best_report = best_case(truth, v.report_options);
    if (truth != report) v.manipulation = find_manipulation(space, d, truth, truthful, reported);

    const bool worst_case_gain = truth.key(v.worst_report) < truth.key(v.worst_truth);
    const bool best_case_gain = truth.key(v.best_report) < truth.key(v.best_truth);
    v.triggered = worst_case_gain && best_case_gain ? Condition::both
                  : worst_case_gain                 ? Condition::worst_case
                  : best_case_gain                  ? Condition::best_case
                                                    : Condition::none;
    v.is_obvious = v.manipulation.found && v.triggered != Condition::none;
    if (v.is_obvious && !v.is_manipulation()) throw std::logic_error("obvious manipulation without manipulation");
    return v;
}

inline void check_preference(const Market& m, DoctorIx d, const DoctorPreference& p) {
    if (p.owner != d) throw std::invalid_argument("preference does not belong to doctor " + m.name(d));
    m.validate(p);
}

inline void check_budget(std::uint64_t required, std::uint64_t budget) {
    if (required > budget) throw BudgetExceeded(required, budget);
}

}  // namespace detail

/// O(reported): every outcome `d` can get while the other doctors range over
/// their full preference domains, each with one witnessing subprofile.
inline OptionSet option_set(const Mechanism& mech, const Market& m, DoctorIx d, const DoctorPreference& reported,
                            const SearchOptions& opts = {}) {
    detail::check_preference(m, d, reported);
    detail::ProfileSpace space(m, opts.fixed_opponents);
    detail::check_budget(space.subprofile_count(d), opts.budget);
    MechanismEvaluator eval(m, mech);
    return detail::collect_options(space, d, reported, detail::outcome_row(eval, space, d, reported, opts.workers));
}

/// Searches for a subprofile where reporting `report` beats reporting `truth`,
/// judged by `truth`. A report equal to the truth is never a manipulation.
inline ManipulationResult is_manipulation(const Mechanism& mech, const Market& m, DoctorIx d,
                                          const DoctorPreference& truth, const DoctorPreference& report,
                                          const SearchOptions& opts = {}) {
    detail::check_preference(m, d, truth);
    detail::check_preference(m, d, report);
    if (truth == report) return {};
    detail::ProfileSpace space(m, opts.fixed_opponents);
    detail::check_budget(detail::saturating_mul(2, space.subprofile_count(d)), opts.budget);
    MechanismEvaluator eval(m, mech);
    return detail::find_manipulation(space, d, truth, detail::outcome_row(eval, space, d, truth, opts.workers),
                                     detail::outcome_row(eval, space, d, report, opts.workers));
}

inline OmVerdict is_obvious_manipulation(const Mechanism& mech, const Market& m, DoctorIx d,
                                         const DoctorPreference& truth, const DoctorPreference& report,
                                         const SearchOptions& opts = {}) {
    detail::check_preference(m, d, truth);
    detail::check_preference(m, d, report);
    detail::ProfileSpace space(m, opts.fixed_opponents);
    detail::check_budget(detail::saturating_mul(2, space.subprofile_count(d)), opts.budget);
    MechanismEvaluator eval(m, mech);
    return detail::make_verdict(space, d, truth, report, detail::outcome_row(eval, space, d, truth, opts.workers),
                                detail::outcome_row(eval, space, d, report, opts.workers));
}

enum class Property { nom, sp };

inline const char* to_string(Property p) { return p == Property::nom ? "nom" : "sp"; }

inline Property parse_property(std::string_view s) {
    if (s == "nom") return Property::nom;
    if (s == "sp") return Property::sp;
    throw std::invalid_argument("unknown property '" + std::string(s) + "' (expected nom or sp)");
}

struct Certificate {
    Property property = Property::nom;
    std::string mechanism;
    std::string market_digest;
    bool passed = true;
    /// First counterexample in (doctor, truth, report) enumeration order.
    std::optional<OmVerdict> counterexample;
    /// Nominal truth × report × subprofile iterations covered by the search.
    std::uint64_t iterations = 0;
    /// Distinct mechanism evaluations actually performed.
    std::uint64_t evaluations = 0;
    std::uint64_t pairs_examined = 0;
    std::int64_t wall_us = 0;

    friend bool operator==(const Certificate&, const Certificate&) = default;
};

struct CertifyOptions {
    std::uint64_t budget = default_budget;
    unsigned workers = 1;
};

/// Checks every doctor, every true preference and every misreport for a
/// manipulation (SP) or an obvious manipulation (NOM).
inline Certificate certify(const Mechanism& mech, const Market& m, Property property, const CertifyOptions& opts = {}) {
    const auto start = std::chrono::steady_clock::now();
    detail::ProfileSpace space(m);
    const std::size_t n = m.num_doctors();

    std::uint64_t nominal = 0;
    for (std::size_t d = 0; d < n; ++d) {
        const std::uint64_t size = space.domain(make_ix<DoctorIx>(d)).size();
        nominal = detail::saturating_add(
            nominal, detail::saturating_mul(size * (size - 1), space.subprofile_count(make_ix<DoctorIx>(d))));
    }
    detail::check_budget(nominal, opts.budget);
    const std::uint64_t total = space.profile_count();
    detail::check_budget(total, opts.budget);
    // One outcome per (profile, doctor) is kept in memory.
    detail::check_budget(detail::saturating_mul(total, n), std::uint64_t{1} << 28);

    Certificate cert;
    cert.property = property;
    cert.mechanism = mech.descriptor();
    cert.market_digest = market_digest(m);
    cert.iterations = nominal;
    cert.evaluations = total;

    MechanismEvaluator eval(m, mech);
    std::vector<Outcome> table(static_cast<std::size_t>(total * n));
    detail::parallel_for(total, opts.workers, [&](std::uint64_t t) {
        const Allocation y = eval(space.profile(space.profile_digits(t)));
        for (std::size_t d = 0; d < n; ++d) table[t * n + d] = assigned_contract(m, y, make_ix<DoctorIx>(d));
    });

    for (std::size_t d = 0; d < n && cert.passed; ++d) {
        const auto doc = make_ix<DoctorIx>(d);
        const auto& domain = space.domain(doc);
        const std::uint64_t subs = space.subprofile_count(doc);
        std::vector<std::vector<Outcome>> rows(domain.size(), std::vector<Outcome>(subs));
        for (std::uint64_t sub = 0; sub < subs; ++sub) {
            auto digits = space.sub_digits(doc, sub);
            for (std::size_t pi = 0; pi < domain.size(); ++pi) {
                digits[d] = pi;
                rows[pi][sub] = table[space.profile_index(digits) * n + d];
            }
        }
        // Per-preference worst/best keys under a given truth are cheap to
        // recompute; distinct outcome lists are shared across truths.
        std::vector<std::vector<Outcome>> distinct(domain.size());
        for (std::size_t pi = 0; pi < domain.size(); ++pi) {
            for (auto o : rows[pi])
                if (std::find(distinct[pi].begin(), distinct[pi].end(), o) == distinct[pi].end())
                    distinct[pi].push_back(o);
        }
        auto extremes = [](const DoctorPreference& truth, const std::vector<Outcome>& outs) {
            std::size_t worst = 0, best = std::numeric_limits<std::size_t>::max();
            for (auto o : outs) {
                worst = std::max(worst, truth.key(o));
                best = std::min(best, truth.key(o));
            }
            return std::pair{worst, best};
        };

        for (std::size_t ti = 0; ti < domain.size() && cert.passed; ++ti) {
            const auto& truth = domain[ti];
            const auto [worst_truth, best_truth] = extremes(truth, distinct[ti]);
            for (std::size_t ri = 0; ri < domain.size(); ++ri) {
                if (ri == ti) continue;
                ++cert.pairs_examined;
                if (property == Property::nom) {
                    const auto [worst_report, best_report] = extremes(truth, distinct[ri]);
                    if (worst_report >= worst_truth && best_report >= best_truth) continue;
                }
                if (!detail::find_manipulation(space, doc, truth, rows[ti], rows[ri]).found) continue;
                cert.passed = false;
                cert.counterexample = detail::make_verdict(space, doc, truth, domain[ri], rows[ti], rows[ri]);
                break;
            }
        }
    }
    cert.wall_us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
    return cert;
}

/// Smallest k >= 2 with ⌈kq⌉ = 2.
inline std::size_t minimal_k_for(const Quantile& q) {
    if (q.numerator() == 0) throw std::invalid_argument("no k satisfies ceil(k*q) = 2 when q = 0");
    std::size_t k = 2;
    while (quantile_index(k, q) != 2) ++k;
    return k;
}

struct Theorem1Instance {
    Market market;
    DoctorPreference truth;   // d1: x1 > ... > xk
    DoctorPreference report;  // d1: x1 only
    DoctorPreference other;   // d2: w acceptable

    Profile truthful_profile() const { return Profile{{truth, other}}; }
};

/// Two doctors and two hospitals; d1 and h1 share contracts x1..xk ranked in
/// opposite orders, d2 and h2 share w. Requires ⌈kq⌉ = 2.
inline Theorem1Instance theorem1_market(std::size_t k, const Quantile& q) {
    if (q.numerator() == 0) throw std::invalid_argument("q must be positive");
    if (k < 2 || quantile_index(k, q) != 2) {
        const std::size_t lo = minimal_k_for(q);
        std::size_t hi = lo;
        while (quantile_index(hi + 1, q) == 2) ++hi;
        throw std::invalid_argument("ceil(k*q) must equal 2, but ceil(" + std::to_string(k) + "*" + q.str() +
                                    ") = " + std::to_string(k < 1 ? 0 : quantile_index(k, q)) + "; valid k for q=" +
                                    q.str() + ": " + std::to_string(lo) + (hi > lo ? ".." + std::to_string(hi) : ""));
    }
    std::vector<Contract> contracts;
    for (std::size_t t = 1; t <= k; ++t)
        contracts.push_back(Contract{"x" + std::to_string(t), DoctorIx{0}, HospitalIx{0}});
    contracts.push_back(Contract{"w", DoctorIx{1}, HospitalIx{1}});

    HospitalPreference h1{HospitalIx{0}, {}};
    DoctorPreference truth{DoctorIx{0}, {}};
    for (std::size_t t = 0; t < k; ++t) {
        h1.order.push_back(make_ix<ContractIx>(k - 1 - t));
        truth.order.push_back(make_ix<ContractIx>(t));
    }
    const auto w = make_ix<ContractIx>(k);
    Market m({"d1", "d2"}, {"h1", "h2"}, std::move(contracts), {h1, HospitalPreference{HospitalIx{1}, {w}}});
    return Theorem1Instance{std::move(m), truth, DoctorPreference{DoctorIx{0}, {ContractIx{0}}},
                            DoctorPreference{DoctorIx{1}, {w}}};
}

}  // namespace cmatch

#endif  // CMATCH_STRATEGY_HPP
