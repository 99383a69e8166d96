#ifndef CMATCH_STABILITY_HPP
#define CMATCH_STABILITY_HPP

// Individual rationality, blocking, stability, brute-force stable-set
// enumeration, and deferred acceptance from either side.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "market.hpp"

namespace cmatch {

/// Precomputed preference keys for one (market, profile) pair; smaller key
/// means more preferred. Contracts are indexed by roster position.
class RankView {
public:
    RankView(const Market& m, const Profile& p)
        : m_(&m),
          doctor_key_(m.num_contracts()),
          hospital_key_(m.num_contracts()),
          doctor_null_(m.num_doctors()),
          hospital_null_(m.num_hospitals()) {
        if (p.prefs.size() != m.num_doctors()) throw std::invalid_argument("profile must cover exactly the doctor roster");
        for (std::size_t d = 0; d < m.num_doctors(); ++d) doctor_null_[d] = p.prefs[d].key(std::nullopt);
        for (std::size_t h = 0; h < m.num_hospitals(); ++h) hospital_null_[h] = m.hospital_prefs()[h].key(std::nullopt);
        for (std::size_t c = 0; c < m.num_contracts(); ++c) {
            const auto& con = m.contracts()[c];
            doctor_key_[c] = p.prefs[idx(con.doctor)].key(make_ix<ContractIx>(c));
            hospital_key_[c] = m.preference(con.hospital).key(make_ix<ContractIx>(c));
        }
    }

    const Market& market() const { return *m_; }

    std::size_t doctor_key(ContractIx c) const { return doctor_key_[idx(c)]; }
    std::size_t hospital_key(ContractIx c) const { return hospital_key_[idx(c)]; }
    std::size_t doctor_key(DoctorIx d, Outcome o) const { return o ? doctor_key_[idx(*o)] : doctor_null_[idx(d)]; }
    std::size_t hospital_key(HospitalIx h, Outcome o) const {
        return o ? hospital_key_[idx(*o)] : hospital_null_[idx(h)];
    }

    bool doctor_accepts(ContractIx c) const { return doctor_key_[idx(c)] < doctor_null_[idx(m_->contract(c).doctor)]; }
    bool hospital_accepts(ContractIx c) const {
        return hospital_key_[idx(c)] < hospital_null_[idx(m_->contract(c).hospital)];
    }

    bool is_individually_rational(const Allocation& y) const {
        for (auto c : y.contracts)
            if (!doctor_accepts(c) || !hospital_accepts(c)) return false;
        return true;
    }

    /// Calls `on_block(x)` for each blocking contract; stops early when it returns false.
    template <class F>
    void for_each_blocking(const Allocation& y, F on_block) const {
        const auto& m = *m_;
        std::vector<std::size_t> doctor_current(doctor_null_), hospital_current(hospital_null_);
        for (auto c : y.contracts) {
            const auto& con = m.contract(c);
            doctor_current[idx(con.doctor)] = doctor_key_[idx(c)];
            hospital_current[idx(con.hospital)] = hospital_key_[idx(c)];
        }
        for (std::size_t x = 0; x < m.num_contracts(); ++x) {
            const auto& con = m.contracts()[x];
            if (doctor_key_[x] < doctor_current[idx(con.doctor)] &&
                hospital_key_[x] < hospital_current[idx(con.hospital)] && !y.contains(make_ix<ContractIx>(x)))
                if (!on_block(make_ix<ContractIx>(x))) return;
        }
    }

    bool is_stable(const Allocation& y) const {
        if (!is_individually_rational(y)) return false;
        bool blocked = false;
        for_each_blocking(y, [&](ContractIx) {
            blocked = true;
            return false;
        });
        return !blocked;
    }

private:
    const Market* m_;
    std::vector<std::size_t> doctor_key_, hospital_key_;
    std::vector<std::size_t> doctor_null_, hospital_null_;
};

inline bool is_individually_rational(const Allocation& y, const Profile& p, const Market& m) {
    return RankView(m, p).is_individually_rational(y);
}

inline std::vector<ContractIx> blocking_contracts(const Allocation& y, const Profile& p, const Market& m) {
    std::vector<ContractIx> out;
    RankView(m, p).for_each_blocking(y, [&](ContractIx x) {
        out.push_back(x);
        return true;
    });
    return out;
}

inline bool is_stable(const Allocation& y, const Profile& p, const Market& m) { return RankView(m, p).is_stable(y); }

/// All stable allocations under a profile, in canonical order. Never empty.
struct StableSet {
    std::vector<Allocation> allocations;

    std::size_t k() const { return allocations.size(); }
    bool contains(const Allocation& y) const {
        for (const auto& a : allocations)
            if (a == y) return true;
        return false;
    }
};

/// Filters a precomputed A(X) (canonical order) through the stability test.
inline StableSet enumerate_stable(const RankView& view, const std::vector<Allocation>& all) {
    StableSet s;
    for (const auto& y : all)
        if (view.is_stable(y)) s.allocations.push_back(y);
    if (s.allocations.empty()) throw std::logic_error("empty stable set: stability check is broken");
    return s;
}

inline StableSet enumerate_stable(const Profile& p, const Market& m) {
    return enumerate_stable(RankView(m, p), enumerate_allocations(m));
}

namespace detail {

// Proposers make offers down their ranking in rounds (roster order within a
// round); each receiver keeps its best acceptable offer and rejects the rest.
template <class ProposerOf, class ReceiverOf, class ReceiverKey, class ReceiverAccepts>
Allocation deferred_acceptance(const std::vector<std::vector<ContractIx>>& rankings, std::size_t num_receivers,
                               ProposerOf proposer_of, ReceiverOf receiver_of, ReceiverKey receiver_key,
                               ReceiverAccepts receiver_accepts) {
    const std::size_t n = rankings.size();
    std::vector<std::size_t> next(n, 0);
    std::vector<bool> held_by_proposer(n, false);
    std::vector<Outcome> held(num_receivers);

    bool moved = true;
    while (moved) {
        moved = false;
        std::vector<ContractIx> offers;
        for (std::size_t i = 0; i < n; ++i)
            if (!held_by_proposer[i] && next[i] < rankings[i].size()) offers.push_back(rankings[i][next[i]++]);
        for (auto c : offers) {
            moved = true;
            if (!receiver_accepts(c)) continue;
            auto r = receiver_of(c);
            auto& cur = held[r];
            if (!cur) {
                cur = c;
                held_by_proposer[proposer_of(c)] = true;
            } else if (receiver_key(c) < receiver_key(*cur)) {
                held_by_proposer[proposer_of(*cur)] = false;
                cur = c;
                held_by_proposer[proposer_of(c)] = true;
            }
        }
    }
    std::vector<ContractIx> out;
    for (const auto& h : held)
        if (h) out.push_back(*h);
    return Allocation(std::move(out));
}

}  // namespace detail

inline Allocation doctor_proposing_da(const Profile& p, const Market& m) {
    RankView view(m, p);
    std::vector<std::vector<ContractIx>> rankings;
    for (const auto& pref : p.prefs) rankings.push_back(pref.order);
    return detail::deferred_acceptance(
        rankings, m.num_hospitals(), [&](ContractIx c) { return idx(m.contract(c).doctor); },
        [&](ContractIx c) { return idx(m.contract(c).hospital); }, [&](ContractIx c) { return view.hospital_key(c); },
        [&](ContractIx c) { return view.hospital_accepts(c); });
}

inline Allocation hospital_proposing_da(const Profile& p, const Market& m) {
    RankView view(m, p);
    std::vector<std::vector<ContractIx>> rankings;
    for (const auto& pref : m.hospital_prefs()) rankings.push_back(pref.order);
    return detail::deferred_acceptance(
        rankings, m.num_doctors(), [&](ContractIx c) { return idx(m.contract(c).hospital); },
        [&](ContractIx c) { return idx(m.contract(c).doctor); }, [&](ContractIx c) { return view.doctor_key(c); },
        [&](ContractIx c) { return view.doctor_accepts(c); });
}

}  // namespace cmatch

#endif  // CMATCH_STABILITY_HPP
