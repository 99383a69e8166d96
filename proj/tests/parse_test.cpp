#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cmatch;
using namespace cmatch::testing;

TEST(ParseMarket, Theorem1File) {
    auto pm = parse_market(theorem1_k2_text);
    const auto& m = pm.market;
    EXPECT_EQ(m.num_contracts(), 3u);
    EXPECT_EQ(m.num_doctors(), 2u);
    EXPECT_EQ(m.num_hospitals(), 2u);
    EXPECT_EQ(m.preference(HospitalIx{0}).order, (std::vector{*m.find_contract("x2"), *m.find_contract("x1")}));
    ASSERT_TRUE(pm.profile);
    EXPECT_EQ((*pm.profile)[m.doctor("d1")], dpref(m, "d1", {"x1", "x2"}));
    EXPECT_EQ((*pm.profile)[m.doctor("d2")], dpref(m, "d2", {"w"}));
}

TEST(ParseMarket, EmptyMarketIsValid) {
    auto pm = parse_market("doctors:\nhospitals:\n");
    EXPECT_EQ(pm.market.num_doctors(), 0u);
    EXPECT_EQ(pm.market.num_contracts(), 0u);
    ASSERT_TRUE(pm.profile);
    EXPECT_TRUE(pm.profile->prefs.empty());
    EXPECT_EQ(parse_market("# nothing at all\n").market.num_hospitals(), 0u);
    EXPECT_FALSE(parse_market("doctors: d1\nhospitals:\n").profile);
}

TEST(ParseMarket, EmptyRankingsAndNoDoctorLines) {
    auto pm = parse_market("doctors: d1 d3\nhospitals: h\ncontract a = (d1, h)\nhospital h :\ndoctor d1 : a\ndoctor d3 :\n");
    EXPECT_TRUE(pm.market.preference(HospitalIx{0}).order.empty());
    ASSERT_TRUE(pm.profile);
    EXPECT_TRUE((*pm.profile)[pm.market.doctor("d3")].order.empty());
}

namespace {

ParseError parse_error(const std::string& text) {
    try {
        parse_market(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "expected a parse error for:\n" << text;
    return ParseError(0, 0, "none");
}

}  // namespace

TEST(ParseMarket, ReportsLineAndColumn) {
    auto e = parse_error("doctors: d1\nhospitals: h1 h2\ncontract x = (d1, h1)\nhospital h1 : x\nhospital h2 : x\n");
    EXPECT_EQ(e.line(), 5u);
    EXPECT_EQ(e.column(), 15u);
    EXPECT_NE(std::string(e.what()).find("does not involve"), std::string::npos);

    e = parse_error("doctors: d1\nhospitals: h1\ncontract x = (d1 h1)\n");
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 18u);
}

TEST(ParseMarket, ValidationErrors) {
    // unknown agent
    auto e = parse_error("doctors: d1\nhospitals: h1\ncontract x = (d1, h9)\nhospital h1 :\n");
    EXPECT_NE(std::string(e.what()).find("unknown hospital: h9"), std::string::npos);
    // duplicate contract id
    e = parse_error("doctors: d1\nhospitals: h1\ncontract x = (d1, h1)\ncontract x = (d1, h1)\nhospital h1 :\n");
    EXPECT_EQ(e.line(), 4u);
    // missing hospital line
    parse_error("doctors: d1\nhospitals: h1\n");
    // duplicate ranking entry
    parse_error("doctors: d1\nhospitals: h1\ncontract x = (d1, h1)\nhospital h1 : x > x\n");
    // doctor ranking another doctor's contract
    parse_error("doctors: d1 d2\nhospitals: h1\ncontract x = (d1, h1)\nhospital h1 : x\ndoctor d1 :\ndoctor d2 : x\n");
    // partial profile
    parse_error("doctors: d1 d2\nhospitals: h1\nhospital h1 :\ndoctor d1 :\n");
    // unknown statement
    parse_error("physicians: d1\n");
}

TEST(ParseRanking, CommandLineSyntax) {
    auto m = parse_market(theorem1_k2_text).market;
    EXPECT_EQ(parse_ranking(m, m.doctor("d1"), "x1>x2"), dpref(m, "d1", {"x1", "x2"}));
    EXPECT_EQ(parse_ranking(m, m.doctor("d1"), " x2 > x1 "), dpref(m, "d1", {"x2", "x1"}));
    EXPECT_EQ(parse_ranking(m, m.doctor("d1"), ""), dpref(m, "d1", {}));
    EXPECT_THROW(parse_ranking(m, m.doctor("d1"), "w"), ParseError);
    EXPECT_THROW(parse_ranking(m, m.doctor("d1"), "x3"), ParseError);
}

TEST(SerializeMarket, RoundTripsRandomMarkets) {
    std::mt19937_64 rng(3);
    for (int round = 0; round < 200; ++round) {
        auto rm = random_market(rng, 3, 3, 8, 0.7);
        const auto text = serialize_market(rm.market, rm.profile);
        auto back = parse_market(text);
        EXPECT_EQ(back.market, rm.market);
        ASSERT_TRUE(back.profile);
        EXPECT_EQ(*back.profile, rm.profile);
        EXPECT_EQ(serialize_market(back.market, back.profile), text);
        EXPECT_EQ(market_digest(back.market), market_digest(rm.market));
    }
}
