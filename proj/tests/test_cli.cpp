#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "dicat/json_io.hpp"

using namespace dicat;

namespace {

struct RunOut {
    int code;
    std::string out;
};

RunOut run(const std::string& args) {
    std::string cmd = std::string(DICAT_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    while (fgets(buf.data(), buf.size(), p)) out += buf.data();
    int status = pclose(p);
    return {WEXITSTATUS(status), out};
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = "/tmp/dicat_cli_" + name;
    std::ofstream f(path);
    f << content;
    return path;
}

}  // namespace

TEST_CASE("check on the nontrivial z2 instance exits zero") {
    auto r = run("check --instance cocycle --group z2 --omega nontrivial");
    CHECK(r.code == 0);
    CHECK(r.out.find("RESULT: pass") != std::string::npos);
}

TEST_CASE("check prints each axiom with its citation anchor") {
    auto r = run("check --instance trivial");
    CHECK(r.code == 0);
    CHECK(r.out.find("pentagon identity") != std::string::npos);
}

TEST_CASE("a pentagon-breaking tamper exits one and names the pentagon") {
    auto r = run("check --instance cocycle --group z4 --omega nontrivial --tamper 1,1,1");
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL D3-17") != std::string::npos);
}

TEST_CASE("unknown instances exit two") {
    auto r = run("check --instance nonsense");
    CHECK(r.code == 2);
}

TEST_CASE("mutate detects a perturbed associator and reports the no-op as undetected") {
    auto r = run("mutate --instance cocycle --group z3 --omega nontrivial --target D2-12");
    CHECK(r.code == 0);
    CHECK(r.out.find("detected") != std::string::npos);
    auto r2 = run("mutate --instance trivial --target D2-12 --identity-mutation");
    CHECK(r2.code == 1);
    CHECK(r2.out.find("undetected") != std::string::npos);
    auto r3 = run("mutate --instance trivial --target D9-99");
    CHECK(r3.code == 2);
}

TEST_CASE("validate accepts a sound fincat bundle and names planted defects") {
    ordered_json cat = {
        {"name", "pt"},
        {"objects", {"x"}},
        {"morphisms", {{{"id", "1x"}, {"src", "x"}, {"dst", "x"}}}},
        {"composition", {{"1x", "1x", "1x"}}},
        {"identities", {{"x", "1x"}}},
    };
    ordered_json good = {{"schema", "fincat/v1"}, {"categories", {cat}}};
    auto path = write_temp("good.json", good.dump());
    auto r = run("validate " + path);
    CHECK(r.code == 0);
    CHECK(r.out.find("valid") != std::string::npos);

    ordered_json broken = good;
    broken["categories"][0]["composition"] = ordered_json::array();
    auto path2 = write_temp("broken.json", broken.dump());
    auto r2 = run("validate " + path2);
    CHECK(r2.code == 1);
    CHECK(r2.out.find("composition undefined") != std::string::npos);
}

TEST_CASE("validate flags a dicat bundle with a missing structure functor") {
    FinCatInstanceData data = trivial_instance_data();
    data.d1.erase(D1Key::IL);
    auto path = write_temp("missing_il.json", dicat_to_json(data).dump());
    auto r = run("validate " + path);
    CHECK(r.code == 1);
    CHECK(r.out.find("missing structure functor il") != std::string::npos);
}

TEST_CASE("malformed json exits two") {
    auto path = write_temp("garbage.json", "{not json");
    auto r = run("validate " + path);
    CHECK(r.code == 2);
}

TEST_CASE("user-supplied morita bundles load, validate and pass") {
    ordered_json j = {
        {"schema", "morita/v1"},
        {"algebras", {{{"label", "K"}, {"blocks", {1}}}, {{"label", "K2"}, {"blocks", {1, 1}}}}},
        {"bimodules",
         {{{"label", "plane"},
           {"left", "K"},
           {"right", "K"},
           {"dim", 2},
           {"left_action", {{1, 0}, {0, 1}}},
           {"right_action", {{1, 0}, {0, 1}}}}}},
        {"maps",
         {{{"source", "plane"}, {"target", "plane"}, {"matrix", {{0, 1}, {1, 0}}}}}},
    };
    auto path = write_temp("user_morita.json", j.dump());
    auto r = run("validate " + path);
    CHECK(r.code == 0);
    auto r2 = run("check --file " + path);
    CHECK(r2.code == 0);
    CHECK(r2.out.find("RESULT: pass") != std::string::npos);
}

TEST_CASE("probe presets select smaller probe families") {
    auto r = run("check --instance morita --probes small --axioms D3-17");
    CHECK(r.code == 0);
}

TEST_CASE("json reports are written where requested") {
    auto r = run("check --instance trivial --report /tmp/dicat_cli_report.json --format json");
    CHECK(r.code == 0);
    std::ifstream f("/tmp/dicat_cli_report.json");
    ordered_json j = ordered_json::parse(f);
    CHECK(j["schema"] == "report/v1");
    CHECK(j["summary"]["pass"] == true);
}
