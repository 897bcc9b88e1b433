// End-to-end checks of the command-line front end via std::system.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "blockrg/io.hpp"

using blockrg::json;

namespace {

std::string tmp_dir() {
    static int counter = 0;
    std::string d = "cli_tmp_" + std::to_string(counter++);
    std::system(("mkdir -p " + d).c_str());
    return d;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(BLOCKRG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    f << j.dump(2);
}

json ring16_renormalize_config() {
    json cfg;
    cfg["lattice"] = {{"geometry", "square_1d"}, {"extent", {16}}, {"boundary", "periodic"}};
    json terms = json::array();
    for (int i = 0; i < 16; ++i) {
        json sites = json::array();
        sites.push_back({i, 0});
        sites.push_back({(i + 1) % 16, 0});
        terms.push_back({{"sites", sites}, {"value", 0.5}});
    }
    cfg["interaction"] = {{"couplings", terms}};
    cfg["kernel"] = {{"kind", "decimation"}};
    cfg["b"] = 2;
    return cfg;
}

}  // namespace

TEST_CASE("renormalize subcommand reproduces the 1D closed form") {
    std::string dir = tmp_dir();
    write_json(dir + "/cfg.json", ring16_renormalize_config());
    int rc = run_cli("renormalize --config " + dir + "/cfg.json --out " + dir + "/out.json");
    REQUIRE(rc == 0);
    json out = blockrg::read_json(dir + "/out.json");
    double expect = 0.5 * std::log(std::cosh(1.0));
    bool found = false;
    for (const auto& t : out.at("couplings")) {
        auto sites = t.at("sites");
        if (sites.size() == 2) {
            int x0 = sites[0][0].get<int>(), x1 = sites[1][0].get<int>();
            int d = std::abs(x0 - x1);
            if (std::min(d, 8 - d) == 1) {
                CHECK(t.at("value").get<double>() == doctest::Approx(expect).epsilon(1e-8));
                found = true;
            }
        }
    }
    CHECK(found);
}

TEST_CASE("count subcommand emits catalan numbers") {
    std::string dir = tmp_dir();
    json cfg{{"p", 2}, {"n_max", 5}};
    write_json(dir + "/cfg.json", cfg);
    REQUIRE(run_cli("count --config " + dir + "/cfg.json --out " + dir + "/out.csv") == 0);
    std::ifstream f(dir + "/out.csv");
    std::stringstream ss;
    ss << f.rdbuf();
    std::string csv = ss.str();
    CHECK(csv.find("1,1,1,1") != std::string::npos);
    CHECK(csv.find("2,2,1,2") != std::string::npos);
    CHECK(csv.find("5,42,1,42") != std::string::npos);
}

TEST_CASE("hypothesis-check with J=0 reports the sentinel") {
    std::string dir = tmp_dir();
    json inst;
    inst["lattice"] = {{"geometry", "square_1d"}, {"extent", {8}}, {"boundary", "periodic"}};
    inst["interaction"] = {{"couplings", json::array()}};
    inst["kernel"] = {{"kind", "decimation"}};
    inst["b"] = 2;
    json cfg;
    cfg["instances"] = json::array({inst});
    write_json(dir + "/cfg.json", cfg);
    REQUIRE(run_cli("hypothesis-check --config " + dir + "/cfg.json --seed 1 --out " + dir +
                    "/out.json") == 0);
    json out = blockrg::read_json(dir + "/out.json");
    CHECK(out.at("holds").get<bool>());
    CHECK(out.at("c_hyp").get<double>() == 0.0);
}

TEST_CASE("exit codes") {
    std::string dir = tmp_dir();
    SUBCASE("schema violation is exit 2") {
        write_json(dir + "/bad.json", json{{"nonsense", 1}});
        CHECK(run_cli("renormalize --config " + dir + "/bad.json") == 2);
    }
    SUBCASE("cap exceeded is exit 3") {
        json cfg = ring16_renormalize_config();
        cfg["lattice"]["extent"] = {32};
        cfg["interaction"]["couplings"] = json::array();
        write_json(dir + "/big.json", cfg);
        CHECK(run_cli("renormalize --config " + dir + "/big.json") == 3);
    }
    SUBCASE("divergent expansion is exit 4") {
        json cfg{{"p", 2}, {"epsilon", 10.0}};  // far past the divergence point
        write_json(dir + "/div.json", cfg);
        CHECK(run_cli("count --config " + dir + "/div.json --out " + dir + "/div.csv") == 4);
    }
    SUBCASE("invalid parameters are exit 2") {
        json cfg{{"p", 2}, {"M_num", 1}, {"M_den", 2}};  // M <= 1
        write_json(dir + "/badm.json", cfg);
        CHECK(run_cli("count --config " + dir + "/badm.json") == 2);
    }
    SUBCASE("missing config file is exit 2") {
        CHECK(run_cli("renormalize --config does_not_exist.json") == 2);
    }
}

TEST_CASE("validate-only runs no computation") {
    std::string dir = tmp_dir();
    write_json(dir + "/cfg.json", ring16_renormalize_config());
    REQUIRE(run_cli("renormalize --config " + dir + "/cfg.json --validate-only --out " + dir +
                    "/none.json") == 0);
    std::ifstream f(dir + "/none.json");
    CHECK_FALSE(f.good());  // no artifact written
}

TEST_CASE("determinism across reruns and thread counts") {
    std::string dir = tmp_dir();
    json inst;
    inst["lattice"] = {{"geometry", "square_1d"},
                       {"extent", {8}},
                       {"boundary", "periodic"}};
    json terms = json::array();
    for (int i = 0; i < 8; ++i) {
        json sites = json::array();
        sites.push_back({i, 0});
        sites.push_back({(i + 1) % 8, 0});
        terms.push_back({{"sites", sites}, {"value", 0.4}});
    }
    inst["interaction"] = {{"couplings", terms}};
    inst["kernel"] = {{"kind", "decimation"}};
    inst["b"] = 2;
    json cfg;
    cfg["instances"] = json::array({inst});
    write_json(dir + "/cfg.json", cfg);
    auto read_all = [](const std::string& p) {
        std::ifstream f(p);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    REQUIRE(run_cli("hypothesis-check --config " + dir + "/cfg.json --seed 7 --out " + dir +
                    "/a.json") == 0);
    REQUIRE(run_cli("hypothesis-check --config " + dir + "/cfg.json --seed 7 --threads 2 --out " +
                    dir + "/b.json") == 0);
    CHECK(read_all(dir + "/a.json") == read_all(dir + "/b.json"));
}
