// Drives the cmatch executable end to end and checks output and exit codes.

#include <cmatch/cmatch.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(CMATCH_CLI) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    std::string out;
    std::array<char, 4096> buf{};
    while (auto n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return Run{WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string sample(const char* name) { return std::string(CMATCH_SAMPLES) + "/" + name; }

bool has(const std::string& haystack, const std::string& needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, StableListsAllocationsAndK) {
    auto r = run("stable " + sample("theorem1_k2.market"));
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "{x1,w}\n{x2,w}\nk=2\n");

    r = run("stable " + sample("empty.market"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out, "{}\nk=1\n");

    r = run("stable " + sample("crossing.market"));
    EXPECT_EQ(r.out, "{a,e}\n{b,c}\nk=2\n");

    r = run("stable " + sample("unknown_hospital.market"));
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(has(r.out, "unknown hospital: h9")) << r.out;
}

TEST(Cli, StableWithDoctorsButNoContracts) {
    // Zero contracts but one doctor with an empty ranking: the only stable allocation is {}.
    auto tmp = std::filesystem::temp_directory_path() / "cmatch_cli_lonely.market";
    std::ofstream(tmp) << "doctors: d1\nhospitals:\ndoctor d1 :\n";
    auto r = run("stable " + tmp.string());
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out, "{}\nk=1\n");
}

TEST(Cli, MechAppliesDescriptors) {
    auto r = run("mech " + sample("theorem1_k4.market") + " --mechanism quantile:1/2");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has(r.out, "d1:x2\nd2:w\n")) << r.out;

    r = run("mech " + sample("theorem1_k4.market") + " --mechanism quantile --q 1/2");
    EXPECT_TRUE(has(r.out, "d1:x2")) << r.out;

    r = run("mech " + sample("theorem1_k4.market") + " --mechanism da:doctors");
    EXPECT_TRUE(has(r.out, "d1:x1")) << r.out;

    r = run("mech " + sample("theorem1_k4.market") + " --mechanism quantile:3/2");
    EXPECT_EQ(r.code, 1);
}

TEST(Cli, CheckOmExitCodes) {
    const std::string base = "check-om " + sample("theorem1_k2.market") + " --doctor d1 --truth \"x1>x2\" --report x1";
    auto r = run(base + " --mechanism quantile:1/1");
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_TRUE(has(r.out, "condition:         both")) << r.out;
    EXPECT_TRUE(has(r.out, "obvious:           yes")) << r.out;

    r = run(base + " --mechanism quantile:0/1");
    EXPECT_EQ(r.code, 0) << r.out;

    r = run("check-om " + sample("theorem1_k2.market") + " --mechanism da:doctors --doctor d9 --report x1");
    EXPECT_EQ(r.code, 1);

    r = run(base + " --mechanism quantile:1/1 --budget 1");
    EXPECT_EQ(r.code, 3) << r.out;
}

TEST(Cli, CheckOmRecordRoundTrips) {
    auto r = run("check-om " + sample("theorem1_k2.market") +
                 " --mechanism da:hospitals --doctor d1 --truth \"x1 > x2\" --report x1 --format record");
    EXPECT_EQ(r.code, 2);
    auto inst = cmatch::theorem1_market(2, cmatch::Quantile(1, 1));
    auto v = cmatch::parse_verdict_record(inst.market, r.out);
    EXPECT_EQ(v, cmatch::is_obvious_manipulation(cmatch::Mechanism::hospital_da(), inst.market, cmatch::DoctorIx{0},
                                                 inst.truth, inst.report));
}

TEST(Cli, CertifyReports) {
    auto r = run("certify " + sample("theorem1_k3.market") + " --mechanism quantile:1/2 --property nom");
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(has(r.out, "result:         FAIL")) << r.out;
    EXPECT_TRUE(has(r.out, "truth:             x1 > x2 > x3")) << r.out;
    EXPECT_TRUE(has(r.out, "report:            x1\n")) << r.out;

    r = run("certify " + sample("theorem1_k3.market") + " --mechanism da:doctors --property sp");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(has(r.out, "result:         PASS")) << r.out;

    r = run("certify " + sample("theorem1_k3.market") + " --mechanism interior --property nom");
    EXPECT_EQ(r.code, 2);

    auto tmp = std::filesystem::temp_directory_path() / "cmatch_cli_cert.json";
    r = run("certify " + sample("theorem1_k3.market") + " --mechanism quantile:1/2 --format record --workers 2 --out " +
            tmp.string());
    EXPECT_EQ(r.code, 2);
    std::stringstream record;
    record << std::ifstream(tmp).rdbuf();
    auto inst = cmatch::theorem1_market(3, cmatch::Quantile(1, 2));
    auto cert = cmatch::parse_certificate_record(inst.market, record.str());
    EXPECT_FALSE(cert.passed);
    EXPECT_EQ(cert.counterexample->report, inst.report);

    r = run("certify " + sample("theorem1_k3.market") + " --mechanism quantile:1/2 --budget 5");
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, Theorem1EndToEnd) {
    auto r = run("theorem1 --k 2 --q 1/1");
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_TRUE(has(r.out, "O(P1)  = {x2}")) << r.out;
    EXPECT_TRUE(has(r.out, "O(P1') = {x1}")) << r.out;
    EXPECT_TRUE(has(r.out, "NOM: FAIL")) << r.out;

    r = run("theorem1 --k 5 --q 1/4");
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_TRUE(has(r.out, "NOM: FAIL")) << r.out;

    r = run("theorem1 --k 2 --q 1/4");
    EXPECT_EQ(r.code, 1);
    EXPECT_TRUE(has(r.out, "valid k for q=1/4: 5..8")) << r.out;

    auto tmp = std::filesystem::temp_directory_path() / "cmatch_cli_thm1.market";
    r = run("theorem1 --q 1/3 --out " + tmp.string());
    EXPECT_EQ(r.code, 2);
    std::stringstream text;
    text << std::ifstream(tmp).rdbuf();
    auto pm = cmatch::parse_market(text.str());
    EXPECT_EQ(pm.market, cmatch::theorem1_market(4, cmatch::Quantile(1, 3)).market);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 1);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("stable").code, 1);
    EXPECT_EQ(run("--help").code, 0);
}
