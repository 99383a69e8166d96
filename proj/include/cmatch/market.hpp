#ifndef CMATCH_MARKET_HPP
#define CMATCH_MARKET_HPP

// One-to-one matching markets with contracts: agents, contracts, strict
// preferences over own contracts plus the empty outcome, and allocations.
//
// Ids are symbolic in files and reports; internally every agent and contract
// is a dense index into the market rosters.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cmatch {

enum class DoctorIx : std::uint32_t {};
enum class HospitalIx : std::uint32_t {};
enum class ContractIx : std::uint32_t {};

template <class Ix>
constexpr std::size_t idx(Ix i) noexcept {
    return static_cast<std::size_t>(i);
}

template <class Ix>
constexpr Ix make_ix(std::size_t i) noexcept {
    return static_cast<Ix>(static_cast<std::uint32_t>(i));
}

/// What a single agent ends up with: one of its contracts, or nothing.
using Outcome = std::optional<ContractIx>;

struct Contract {
    std::string id;
    DoctorIx doctor;
    HospitalIx hospital;

    friend bool operator==(const Contract&, const Contract&) = default;
};

/// Strict ranking of the owner's acceptable contracts, best first. Contracts
/// of the owner that are not listed are unacceptable: they rank below the
/// empty outcome, and among themselves in contract roster order.
template <class Owner>
struct Ranking {
    Owner owner{};
    std::vector<ContractIx> order;

    /// Position of `c` in the ranking, or nullopt when unlisted.
    std::optional<std::size_t> position(ContractIx c) const {
        auto it = std::find(order.begin(), order.end(), c);
        if (it == order.end()) return std::nullopt;
        return static_cast<std::size_t>(it - order.begin());
    }

    bool accepts(ContractIx c) const { return position(c).has_value(); }

    /// Total-order key over X_i and the empty outcome; smaller is better.
    std::size_t key(Outcome o) const {
        if (!o) return order.size();
        if (auto p = position(*o)) return *p;
        return order.size() + 1 + idx(*o);
    }

    friend bool operator==(const Ranking&, const Ranking&) = default;
};

using DoctorPreference = Ranking<DoctorIx>;
using HospitalPreference = Ranking<HospitalIx>;

/// One preference per doctor, indexed by doctor.
struct Profile {
    std::vector<DoctorPreference> prefs;

    const DoctorPreference& operator[](DoctorIx d) const { return prefs[idx(d)]; }
    DoctorPreference& operator[](DoctorIx d) { return prefs[idx(d)]; }

    friend bool operator==(const Profile&, const Profile&) = default;
};

/// A set of contracts, no agent appearing twice. Members are kept sorted by
/// contract roster index.
struct Allocation {
    std::vector<ContractIx> contracts;

    Allocation() = default;
    explicit Allocation(std::vector<ContractIx> cs) : contracts(std::move(cs)) {
        std::sort(contracts.begin(), contracts.end());
    }

    bool contains(ContractIx c) const {
        return std::binary_search(contracts.begin(), contracts.end(), c);
    }
    bool empty() const { return contracts.empty(); }
    std::size_t size() const { return contracts.size(); }

    friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Canonical allocation order: by size, then lexicographically by roster index.
inline bool canonical_less(const Allocation& a, const Allocation& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.contracts < b.contracts;
}

class Market {
public:
    Market() = default;

    /// Validates rosters and hospital preferences and builds the index maps.
    /// Throws std::invalid_argument on any inconsistency.
    Market(std::vector<std::string> doctors, std::vector<std::string> hospitals,
           std::vector<Contract> contracts, std::vector<HospitalPreference> hospital_prefs)
        : doctors_(std::move(doctors)),
          hospitals_(std::move(hospitals)),
          contracts_(std::move(contracts)),
          hospital_prefs_(std::move(hospital_prefs)) {
        index_roster(doctors_, doctor_lookup_, "doctor");
        index_roster(hospitals_, hospital_lookup_, "hospital");
        for (const auto& h : hospitals_)
            if (doctor_lookup_.contains(h))
                throw std::invalid_argument("agent id used for both a doctor and a hospital: " + h);

        doctor_contracts_.resize(doctors_.size());
        hospital_contracts_.resize(hospitals_.size());
        for (std::size_t i = 0; i < contracts_.size(); ++i) {
            const auto& c = contracts_[i];
            if (!valid_token(c.id)) throw std::invalid_argument("invalid contract id '" + c.id + "'");
            if (!contract_lookup_.emplace(c.id, make_ix<ContractIx>(i)).second)
                throw std::invalid_argument("duplicate contract id: " + c.id);
            if (doctor_lookup_.contains(c.id) || hospital_lookup_.contains(c.id))
                throw std::invalid_argument("contract id clashes with an agent id: " + c.id);
            if (idx(c.doctor) >= doctors_.size() || idx(c.hospital) >= hospitals_.size())
                throw std::invalid_argument("contract " + c.id + " references an unknown agent");
            doctor_contracts_[idx(c.doctor)].push_back(make_ix<ContractIx>(i));
            hospital_contracts_[idx(c.hospital)].push_back(make_ix<ContractIx>(i));
        }

        if (hospital_prefs_.size() != hospitals_.size())
            throw std::invalid_argument("every hospital needs exactly one preference");
        for (std::size_t h = 0; h < hospitals_.size(); ++h) {
            const auto& p = hospital_prefs_[h];
            if (idx(p.owner) != h)
                throw std::invalid_argument("hospital preferences must be listed in roster order");
            check_ranking(p.order, [&](ContractIx c) { return idx(contract(c).hospital) == h; },
                          "hospital " + hospitals_[h]);
        }
    }

    std::size_t num_doctors() const { return doctors_.size(); }
    std::size_t num_hospitals() const { return hospitals_.size(); }
    std::size_t num_contracts() const { return contracts_.size(); }

    const std::vector<std::string>& doctors() const { return doctors_; }
    const std::vector<std::string>& hospitals() const { return hospitals_; }
    const std::vector<Contract>& contracts() const { return contracts_; }
    const std::vector<HospitalPreference>& hospital_prefs() const { return hospital_prefs_; }

    const Contract& contract(ContractIx c) const { return contracts_.at(idx(c)); }
    const std::string& name(DoctorIx d) const { return doctors_.at(idx(d)); }
    const std::string& name(HospitalIx h) const { return hospitals_.at(idx(h)); }
    const std::string& name(ContractIx c) const { return contracts_.at(idx(c)).id; }
    const HospitalPreference& preference(HospitalIx h) const { return hospital_prefs_.at(idx(h)); }

    /// X_d and X_h, in contract roster order.
    const std::vector<ContractIx>& contracts_of(DoctorIx d) const { return doctor_contracts_.at(idx(d)); }
    const std::vector<ContractIx>& contracts_of(HospitalIx h) const { return hospital_contracts_.at(idx(h)); }

    std::optional<DoctorIx> find_doctor(std::string_view id) const { return find(doctor_lookup_, id); }
    std::optional<HospitalIx> find_hospital(std::string_view id) const { return find(hospital_lookup_, id); }
    std::optional<ContractIx> find_contract(std::string_view id) const { return find(contract_lookup_, id); }

    DoctorIx doctor(std::string_view id) const {
        if (auto d = find_doctor(id)) return *d;
        throw std::invalid_argument("unknown doctor: " + std::string(id));
    }

    bool involves(DoctorIx d, ContractIx c) const { return contract(c).doctor == d; }
    bool involves(HospitalIx h, ContractIx c) const { return contract(c).hospital == h; }

    /// Throws std::invalid_argument unless `p` ranks only the owner's contracts, once each.
    void validate(const DoctorPreference& p) const {
        if (idx(p.owner) >= doctors_.size()) throw std::invalid_argument("preference owner is not a doctor");
        check_ranking(p.order, [&](ContractIx c) { return contract(c).doctor == p.owner; },
                      "doctor " + doctors_[idx(p.owner)]);
    }

    void validate(const Profile& profile) const {
        if (profile.prefs.size() != doctors_.size())
            throw std::invalid_argument("profile must cover exactly the doctor roster");
        for (std::size_t d = 0; d < doctors_.size(); ++d) {
            if (idx(profile.prefs[d].owner) != d)
                throw std::invalid_argument("profile entries must follow the doctor roster");
            validate(profile.prefs[d]);
        }
    }

    friend bool operator==(const Market& a, const Market& b) {
        return a.doctors_ == b.doctors_ && a.hospitals_ == b.hospitals_ && a.contracts_ == b.contracts_ &&
               a.hospital_prefs_ == b.hospital_prefs_;
    }

    static bool valid_token(std::string_view s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) {
            return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_';
        });
    }

private:
    template <class Ix>
    static std::optional<Ix> find(const std::unordered_map<std::string, Ix>& m, std::string_view id) {
        auto it = m.find(std::string(id));
        if (it == m.end()) return std::nullopt;
        return it->second;
    }

    template <class Ix>
    static void index_roster(const std::vector<std::string>& roster, std::unordered_map<std::string, Ix>& out,
                             const char* what) {
        for (std::size_t i = 0; i < roster.size(); ++i) {
            if (!valid_token(roster[i]))
                throw std::invalid_argument(std::string("invalid ") + what + " id '" + roster[i] + "'");
            if (!out.emplace(roster[i], make_ix<Ix>(i)).second)
                throw std::invalid_argument(std::string("duplicate ") + what + " id: " + roster[i]);
        }
    }

    template <class Involves>
    void check_ranking(const std::vector<ContractIx>& order, Involves involves, const std::string& who) const {
        std::vector<bool> seen(contracts_.size(), false);
        for (auto c : order) {
            if (idx(c) >= contracts_.size()) throw std::invalid_argument(who + " ranks an unknown contract");
            if (!involves(c))
                throw std::invalid_argument(who + " ranks contract " + contracts_[idx(c)].id +
                                            " which does not involve it");
            if (seen[idx(c)])
                throw std::invalid_argument(who + " ranks contract " + contracts_[idx(c)].id + " twice");
            seen[idx(c)] = true;
        }
    }

    std::vector<std::string> doctors_;
    std::vector<std::string> hospitals_;
    std::vector<Contract> contracts_;
    std::vector<HospitalPreference> hospital_prefs_;

    std::unordered_map<std::string, DoctorIx> doctor_lookup_;
    std::unordered_map<std::string, HospitalIx> hospital_lookup_;
    std::unordered_map<std::string, ContractIx> contract_lookup_;
    std::vector<std::vector<ContractIx>> doctor_contracts_;
    std::vector<std::vector<ContractIx>> hospital_contracts_;
};

/// Y_i: the contract of `Y` involving agent `i`, if any.
template <class Agent>
Outcome assigned_contract(const Market& m, const Allocation& y, Agent i) {
    for (auto c : y.contracts)
        if (m.involves(i, c)) return c;
    return std::nullopt;
}

/// Strict preference `a P b` under `p`. Both outcomes must be empty or
/// contracts of the owner.
template <class Owner>
bool prefers(const Market& m, const Ranking<Owner>& p, Outcome a, Outcome b) {
    for (Outcome o : {a, b})
        if (o && !m.involves(p.owner, *o))
            throw std::invalid_argument("contract " + m.name(*o) + " does not involve " + m.name(p.owner));
    return p.key(a) < p.key(b);
}

/// Σ_s C(n,s)·s!, the size of a doctor's preference domain over n contracts.
inline std::uint64_t preference_domain_size(std::size_t n) {
    std::uint64_t total = 0, term = 1;  // term = n!/(n-s)!
    for (std::size_t s = 0; s <= n; ++s) {
        total += term;
        term *= (n - s);
    }
    return total;
}

/// Every strict ranking of every subset of the owner's contracts. Order: by
/// subset size, then subsets lexicographically by roster index, then
/// permutations lexicographically.
template <class Owner>
std::vector<Ranking<Owner>> enumerate_rankings(Owner owner, const std::vector<ContractIx>& own) {
    std::vector<Ranking<Owner>> out;
    out.reserve(preference_domain_size(own.size()));
    const std::size_t n = own.size();
    for (std::size_t s = 0; s <= n; ++s) {
        std::vector<bool> pick(n, false);
        std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(s), true);
        do {
            std::vector<ContractIx> subset;
            for (std::size_t i = 0; i < n; ++i)
                if (pick[i]) subset.push_back(own[i]);
            std::sort(subset.begin(), subset.end());
            do {
                out.push_back(Ranking<Owner>{owner, subset});
            } while (std::next_permutation(subset.begin(), subset.end()));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return out;
}

inline std::vector<DoctorPreference> enumerate_preferences(const Market& m, DoctorIx d) {
    return enumerate_rankings(d, m.contracts_of(d));
}

inline std::vector<HospitalPreference> enumerate_preferences(const Market& m, HospitalIx h) {
    return enumerate_rankings(h, m.contracts_of(h));
}

/// A(X) in canonical order.
inline std::vector<Allocation> enumerate_allocations(const Market& m) {
    std::vector<Allocation> out;
    std::vector<bool> doctor_used(m.num_doctors(), false), hospital_used(m.num_hospitals(), false);
    std::vector<ContractIx> current;
    auto recurse = [&](auto& self, std::size_t next) -> void {
        out.emplace_back(current);
        for (std::size_t i = next; i < m.num_contracts(); ++i) {
            const auto& c = m.contracts()[i];
            if (doctor_used[idx(c.doctor)] || hospital_used[idx(c.hospital)]) continue;
            doctor_used[idx(c.doctor)] = hospital_used[idx(c.hospital)] = true;
            current.push_back(make_ix<ContractIx>(i));
            self(self, i + 1);
            current.pop_back();
            doctor_used[idx(c.doctor)] = hospital_used[idx(c.hospital)] = false;
        }
    };
    recurse(recurse, 0);
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

/// True iff no agent appears in two members of `y`.
inline bool is_allocation(const Market& m, const Allocation& y) {
    std::vector<bool> doctor_used(m.num_doctors(), false), hospital_used(m.num_hospitals(), false);
    for (auto c : y.contracts) {
        if (idx(c) >= m.num_contracts()) return false;
        const auto& con = m.contract(c);
        if (doctor_used[idx(con.doctor)] || hospital_used[idx(con.hospital)]) return false;
        doctor_used[idx(con.doctor)] = hospital_used[idx(con.hospital)] = true;
    }
    return std::adjacent_find(y.contracts.begin(), y.contracts.end()) == y.contracts.end();
}

}  // namespace cmatch

#endif  // CMATCH_MARKET_HPP
