#ifndef CMATCH_MECHANISMS_HPP
#define CMATCH_MECHANISMS_HPP

// Quantile stable mechanisms, a canonical interior-stable mechanism, and the
// two deferred acceptance mechanisms behind one descriptor type.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/rational.hpp>

#include "market.hpp"
#include "stability.hpp"

namespace cmatch {

/// Exact rational in [0, 1].
class Quantile {
public:
    using value_type = boost::rational<std::int64_t>;

    Quantile() = default;
    Quantile(std::int64_t num, std::int64_t den) {
        if (den <= 0) throw std::invalid_argument("quantile denominator must be positive");
        if (num < 0 || num > den) throw std::invalid_argument("quantile must lie in [0, 1]");
        value_ = value_type(num, den);
    }

    /// Accepts "num/den" or a bare integer.
    static Quantile parse(std::string_view text) {
        auto slash = text.find('/');
        auto num = parse_int(text.substr(0, slash));
        auto den = slash == std::string_view::npos ? std::int64_t{1} : parse_int(text.substr(slash + 1));
        return Quantile(num, den);
    }

    std::int64_t numerator() const { return value_.numerator(); }
    std::int64_t denominator() const { return value_.denominator(); }
    const value_type& value() const { return value_; }

    std::string str() const { return std::to_string(numerator()) + "/" + std::to_string(denominator()); }

    friend bool operator==(const Quantile&, const Quantile&) = default;
    friend bool operator<(const Quantile& a, const Quantile& b) { return a.value_ < b.value_; }

private:
    static std::int64_t parse_int(std::string_view s) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
            throw std::invalid_argument("malformed rational '" + std::string(s) + "'");
        return v;
    }

    value_type value_{0};
};

/// ⌈k·q⌉ in exact arithmetic, with ⌈0⌉ taken as 1.
inline std::size_t quantile_index(std::size_t k, const Quantile& q) {
    if (k < 1) throw std::invalid_argument("quantile_index needs k >= 1");
    auto num = static_cast<unsigned __int128>(k) * static_cast<unsigned __int128>(q.numerator());
    auto den = static_cast<unsigned __int128>(q.denominator());
    auto j = static_cast<std::size_t>((num + den - 1) / den);
    return j == 0 ? 1 : j;
}

/// X^(j): each doctor's j-th best assignment across the stable set (an empty
/// outcome counts at its preference rank; repeats count as separate entries).
/// Throws std::logic_error if the union is not a member of the stable set.
inline Allocation quantile_allocation(const StableSet& s, const RankView& view, std::size_t j) {
    if (j < 1 || j > s.k()) throw std::out_of_range("quantile position out of range");
    const auto& m = view.market();
    std::vector<ContractIx> picked;
    std::vector<Outcome> column(s.k());
    for (std::size_t d = 0; d < m.num_doctors(); ++d) {
        const auto doc = make_ix<DoctorIx>(d);
        for (std::size_t t = 0; t < s.k(); ++t) column[t] = assigned_contract(m, s.allocations[t], doc);
        std::stable_sort(column.begin(), column.end(),
                         [&](Outcome a, Outcome b) { return view.doctor_key(doc, a) < view.doctor_key(doc, b); });
        if (column[j - 1]) picked.push_back(*column[j - 1]);
    }
    Allocation y(std::move(picked));
    if (!is_allocation(m, y) || !s.contains(y))
        throw std::logic_error("quantile allocation " + std::to_string(j) + " is not a stable allocation");
    return y;
}

inline Allocation quantile_allocation(const StableSet& s, const Profile& p, const Market& m, std::size_t j) {
    return quantile_allocation(s, RankView(m, p), j);
}

struct QuantileKind {
    Quantile q;
    friend bool operator==(const QuantileKind&, const QuantileKind&) = default;
};
struct InteriorKind {
    friend bool operator==(const InteriorKind&, const InteriorKind&) = default;
};
struct DoctorDaKind {
    friend bool operator==(const DoctorDaKind&, const DoctorDaKind&) = default;
};
struct HospitalDaKind {
    friend bool operator==(const HospitalDaKind&, const HospitalDaKind&) = default;
};

class Mechanism {
public:
    using Kind = std::variant<QuantileKind, InteriorKind, DoctorDaKind, HospitalDaKind>;

    static Mechanism quantile(Quantile q) { return Mechanism(QuantileKind{q}); }
    static Mechanism interior() { return Mechanism(InteriorKind{}); }
    static Mechanism doctor_da() { return Mechanism(DoctorDaKind{}); }
    static Mechanism hospital_da() { return Mechanism(HospitalDaKind{}); }

    /// "quantile:<num>/<den>", "interior", "da:doctors" or "da:hospitals".
    static Mechanism parse(std::string_view s) {
        if (s == "interior") return interior();
        if (s == "da:doctors") return doctor_da();
        if (s == "da:hospitals") return hospital_da();
        constexpr std::string_view prefix = "quantile:";
        if (s.starts_with(prefix)) return quantile(Quantile::parse(s.substr(prefix.size())));
        throw std::invalid_argument("unknown mechanism descriptor '" + std::string(s) + "'");
    }

    std::string descriptor() const {
        struct {
            std::string operator()(const QuantileKind& k) const { return "quantile:" + k.q.str(); }
            std::string operator()(const InteriorKind&) const { return "interior"; }
            std::string operator()(const DoctorDaKind&) const { return "da:doctors"; }
            std::string operator()(const HospitalDaKind&) const { return "da:hospitals"; }
        } visitor;
        return std::visit(visitor, kind_);
    }

    const Kind& kind() const { return kind_; }

    /// True when evaluation goes through the full stable set.
    bool needs_stable_set() const { return std::holds_alternative<QuantileKind>(kind_) || std::holds_alternative<InteriorKind>(kind_); }

    friend bool operator==(const Mechanism&, const Mechanism&) = default;

private:
    explicit Mechanism(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

/// A stable allocation that is neither doctor- nor hospital-optimal when one
/// exists: the lowest-indexed quantile allocation X^(j) that is not an
/// extreme, else the first such member of the stable set in canonical order.
/// With no interior option it returns X^(1).
inline Allocation interior_stable_mechanism(const StableSet& s, const RankView& view) {
    const Allocation top = quantile_allocation(s, view, 1);
    if (s.k() <= 2) return top;
    const Allocation bottom = quantile_allocation(s, view, s.k());
    for (std::size_t j = 2; j < s.k(); ++j) {
        Allocation y = quantile_allocation(s, view, j);
        if (y != top && y != bottom) return y;
    }
    // Quantiles can collapse onto the extremes when the lattice is a product.
    for (const auto& y : s.allocations)
        if (y != top && y != bottom) return y;
    return top;
}

inline Allocation interior_stable_mechanism(const Profile& p, const Market& m) {
    RankView view(m, p);
    return interior_stable_mechanism(enumerate_stable(view, enumerate_allocations(m)), view);
}

/// Mechanism evaluator bound to one market; caches A(X) across profiles.
class MechanismEvaluator {
public:
    MechanismEvaluator(const Market& m, Mechanism mech) : m_(&m), mech_(std::move(mech)) {
        if (mech_.needs_stable_set()) allocations_ = enumerate_allocations(m);
    }

    const Market& market() const { return *m_; }
    const Mechanism& mechanism() const { return mech_; }

    Allocation operator()(const Profile& p) const {
        const auto& m = *m_;
        if (std::holds_alternative<DoctorDaKind>(mech_.kind())) return doctor_proposing_da(p, m);
        if (std::holds_alternative<HospitalDaKind>(mech_.kind())) return hospital_proposing_da(p, m);
        RankView view(m, p);
        StableSet s = enumerate_stable(view, allocations_);
        if (auto* qk = std::get_if<QuantileKind>(&mech_.kind())) return quantile_allocation(s, view, quantile_index(s.k(), qk->q));
        return interior_stable_mechanism(s, view);
    }

private:
    const Market* m_;
    Mechanism mech_;
    std::vector<Allocation> allocations_;
};

inline Allocation apply_mechanism(const Mechanism& mech, const Profile& p, const Market& m) {
    m.validate(p);
    return MechanismEvaluator(m, mech)(p);
}

}  // namespace cmatch

#endif  // CMATCH_MECHANISMS_HPP
