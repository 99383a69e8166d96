#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cmatch;
using namespace cmatch::testing;

TEST(Quantile, ParsesAndValidates) {
    EXPECT_EQ(Quantile::parse("1/2"), Quantile(1, 2));
    EXPECT_EQ(Quantile::parse("2/4"), Quantile(1, 2));
    EXPECT_EQ(Quantile::parse("1"), Quantile(1, 1));
    EXPECT_EQ(Quantile::parse("0/7").str(), "0/1");
    EXPECT_THROW(Quantile::parse("3/2"), std::invalid_argument);
    EXPECT_THROW(Quantile::parse("-1/2"), std::invalid_argument);
    EXPECT_THROW(Quantile::parse("1/0"), std::invalid_argument);
    EXPECT_THROW(Quantile::parse("0.5"), std::invalid_argument);
}

TEST(QuantileIndex, ExactCeiling) {
    EXPECT_EQ(quantile_index(4, Quantile(1, 2)), 2u);
    EXPECT_EQ(quantile_index(7, Quantile(0, 1)), 1u);
    EXPECT_EQ(quantile_index(3, Quantile(1, 1)), 3u);
    EXPECT_EQ(quantile_index(3, Quantile(1, 2)), 2u);
    EXPECT_EQ(quantile_index(6, Quantile(1, 3)), 2u);  // kq exactly integral
    EXPECT_EQ(quantile_index(7, Quantile(1, 3)), 3u);
    EXPECT_THROW(quantile_index(0, Quantile(1, 2)), std::invalid_argument);
}

TEST(QuantileIndex, MonotoneInQWithFixedEndpoints) {
    for (std::size_t k = 1; k <= 12; ++k) {
        EXPECT_EQ(quantile_index(k, Quantile(0, 1)), 1u);
        EXPECT_EQ(quantile_index(k, Quantile(1, 1)), k);
        std::size_t prev = 1;
        for (std::int64_t num = 0; num <= 24; ++num) {
            auto j = quantile_index(k, Quantile(num, 24));
            EXPECT_GE(j, prev);
            EXPECT_LE(j, k);
            prev = j;
        }
    }
}

TEST(Mechanism, DescriptorsRoundTrip) {
    for (const auto& mech : builtin_mechanisms()) EXPECT_EQ(Mechanism::parse(mech.descriptor()), mech);
    EXPECT_EQ(Mechanism::parse("quantile:1/2").descriptor(), "quantile:1/2");
    EXPECT_THROW(Mechanism::parse("quantile:3/2"), std::invalid_argument);
    EXPECT_THROW(Mechanism::parse("median"), std::invalid_argument);
}

TEST(QuantileAllocation, Theorem1MarketPicksSecondContract) {
    auto inst = theorem1_market(4, Quantile(1, 2));
    const auto& m = inst.market;
    const auto p = inst.truthful_profile();
    auto s = enumerate_stable(p, m);
    EXPECT_EQ(quantile_allocation(s, p, m, 2), alloc(m, {"x2", "w"}));
    EXPECT_EQ(quantile_allocation(s, p, m, 1), doctor_proposing_da(p, m));
    EXPECT_EQ(quantile_allocation(s, p, m, 4), hospital_proposing_da(p, m));
    EXPECT_THROW(quantile_allocation(s, p, m, 0), std::out_of_range);
    EXPECT_THROW(quantile_allocation(s, p, m, 5), std::out_of_range);
}

TEST(ApplyMechanism, Theorem1Outcomes) {
    auto inst = theorem1_market(4, Quantile(1, 2));
    const auto& m = inst.market;
    const auto q = Mechanism::quantile(Quantile(1, 2));
    auto truthful = inst.truthful_profile();
    EXPECT_EQ(assigned_contract(m, apply_mechanism(q, truthful, m), m.doctor("d1")), outcome(m, "x2"));
    EXPECT_EQ(assigned_contract(m, apply_mechanism(q, truthful, m), m.doctor("d2")), outcome(m, "w"));

    Profile misreport{{inst.report, inst.other}};
    EXPECT_EQ(assigned_contract(m, apply_mechanism(q, misreport, m), m.doctor("d1")), outcome(m, "x1"));

    EXPECT_EQ(apply_mechanism(Mechanism::quantile(Quantile(0, 1)), truthful, m), doctor_proposing_da(truthful, m));
    EXPECT_EQ(apply_mechanism(Mechanism::doctor_da(), truthful, m), alloc(m, {"x1", "w"}));
    EXPECT_EQ(apply_mechanism(Mechanism::hospital_da(), truthful, m), alloc(m, {"x4", "w"}));
}

TEST(InteriorStable, PicksSecondQuantileOnlyWithThreeOrMore) {
    auto inst = theorem1_market(4, Quantile(1, 2));
    EXPECT_EQ(interior_stable_mechanism(inst.truthful_profile(), inst.market), alloc(inst.market, {"x2", "w"}));

    auto two = theorem1_market(2, Quantile(1, 1));
    EXPECT_EQ(interior_stable_mechanism(two.truthful_profile(), two.market),
              doctor_proposing_da(two.truthful_profile(), two.market));

    Market single({"d"}, {"h"}, {{"x", DoctorIx{0}, HospitalIx{0}}}, {HospitalPreference{HospitalIx{0}, {ContractIx{0}}}});
    Profile p{{DoctorPreference{DoctorIx{0}, {ContractIx{0}}}}};
    EXPECT_EQ(interior_stable_mechanism(p, single), Allocation({ContractIx{0}}));
}

TEST(InteriorStable, AvoidsExtremesWhenQuantilesCollapse) {
    // Two independent two-contract submarkets: four stable allocations and
    // X^(2) equals the doctor-optimal one.
    auto pm = parse_market(R"(doctors: d1 d2
hospitals: h1 h2
contract a1 = (d1, h1)
contract a2 = (d1, h1)
contract b1 = (d2, h2)
contract b2 = (d2, h2)
hospital h1 : a2 > a1
hospital h2 : b2 > b1
doctor d1 : a1 > a2
doctor d2 : b1 > b2
)");
    const auto& m = pm.market;
    const auto& p = *pm.profile;
    auto s = enumerate_stable(p, m);
    ASSERT_EQ(s.k(), 4u);
    EXPECT_EQ(quantile_allocation(s, p, m, 2), doctor_proposing_da(p, m));
    EXPECT_EQ(quantile_allocation(s, p, m, 3), hospital_proposing_da(p, m));
    EXPECT_EQ(interior_stable_mechanism(p, m), alloc(m, {"a1", "b2"}));
}

TEST(QuantileAllocation, PropertiesOnRandomMarkets) {
    std::mt19937_64 rng(99);
    const auto mechs = builtin_mechanisms();
    for (int round = 0; round < 300; ++round) {
        auto rm = random_market(rng, 3, 3, 7);
        const auto& m = rm.market;
        const auto& p = rm.profile;
        auto s = enumerate_stable(p, m);
        for (std::size_t j = 1; j <= s.k(); ++j) {
            auto y = quantile_allocation(s, p, m, j);
            EXPECT_TRUE(s.contains(y));
            if (j < s.k()) {
                auto next = quantile_allocation(s, p, m, j + 1);
                for (std::size_t d = 0; d < m.num_doctors(); ++d) {
                    auto doc = make_ix<DoctorIx>(d);
                    EXPECT_FALSE(prefers(m, p[doc], assigned_contract(m, next, doc), assigned_contract(m, y, doc)));
                }
            }
        }
        EXPECT_EQ(apply_mechanism(Mechanism::quantile(Quantile(0, 1)), p, m), doctor_proposing_da(p, m));
        EXPECT_EQ(apply_mechanism(Mechanism::quantile(Quantile(1, 1)), p, m), hospital_proposing_da(p, m));

        auto interior = interior_stable_mechanism(p, m);
        EXPECT_TRUE(s.contains(interior));
        const auto top = doctor_proposing_da(p, m), bottom = hospital_proposing_da(p, m);
        const bool has_interior = std::any_of(s.allocations.begin(), s.allocations.end(),
                                              [&](const Allocation& y) { return y != top && y != bottom; });
        if (has_interior) {
            EXPECT_NE(interior, top);
            EXPECT_NE(interior, bottom);
        } else {
            EXPECT_EQ(interior, top);
        }
        for (const auto& mech : mechs) EXPECT_TRUE(s.contains(apply_mechanism(mech, p, m)));
    }
}
