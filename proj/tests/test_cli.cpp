#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("nlheat_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run(const std::string& args, const fs::path& out) {
    std::string cmd = std::string(NLHEAT_CLI_PATH) + " --out " + out.string() + " " + args + " > " +
                      (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string s;
    std::getline(in, s);
    return s;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
    auto d = scratch("usage");
    CHECK(run("", d) == 2);
    CHECK(run("no-such-command", d) == 2);
    CHECK(run("phi --r", d) == 2);
}

TEST_CASE("config errors exit with 2") {
    auto d = scratch("config");
    CHECK(run("heat-kernel --kernel gaussian --t 1 --n 1000", d) == 2);
    CHECK(run("kernel-info --kernel /nonexistent/kernel.json", d) == 2);
    std::ofstream(d / "bad.json") << "{\"tail_class\": \"weird\"}";
    CHECK(run("kernel-info --kernel " + (d / "bad.json").string(), d) == 2);
}

TEST_CASE("closed gaussian phi writes a csv and a manifest") {
    auto d = scratch("phi");
    REQUIRE(run("phi --gaussian --r 1", d) == 0);
    CHECK(first_line(d / "phi.csv") == "r,xi_hat,phi");
    std::ifstream in(d / "phi.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    double phi = std::stod(row.substr(row.rfind(',') + 1));
    CHECK(phi == doctest::Approx(0.2270855212200287).epsilon(1e-15));
    auto m = nlohmann::json::parse(slurp(d / "manifest_phi.json"));
    CHECK(m["command"] == "phi");
    CHECK(m.contains("versions"));
}

TEST_CASE("rate-fn marks the outside of a compact support as infinite") {
    auto d = scratch("rate");
    REQUIRE(run("rate-fn --kernel tent --r 0.5,1.5", d) == 0);
    auto text = slurp(d / "rate.csv");
    CHECK(text.find("inf") != std::string::npos);
}

TEST_CASE("simulate is reproducible") {
    auto a = scratch("sim_a"), b = scratch("sim_b");
    const std::string args = "simulate --kernel laplace --t 3 --paths 5000 --seed 17";
    REQUIRE(run(args, a) == 0);
    REQUIRE(run("--workers 1 " + args, b) == 0);
    CHECK(slurp(a / "mc.csv") == slurp(b / "mc.csv"));
    CHECK(!slurp(a / "mc.csv").empty());
}

TEST_CASE("validate on a single suite") {
    auto d = scratch("validate");
    REQUIRE(run("validate --suite phi", d) == 0);
    auto rep = nlohmann::json::parse(slurp(d / "validation_report.json"));
    CHECK(rep["pass"] == true);
    CHECK(run("validate --suite phi --compare " + (d / "validation_report.json").string(), d) == 0);
    CHECK(run("validate --suite nonsense", d) == 2);
}

}
