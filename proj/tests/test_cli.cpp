// End-to-end tests that drive the built command-line binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "dtaboot/study_data.hpp"
#include "support/fixtures.hpp"
#include "support/xml_lite.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return DTABOOT_CLI_PATH; }

struct RunResult {
    int exit_code{-1};
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(cli_path()) + " " + args + " > " + out.string() + " 2> " +
                            err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("dtaboot_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_csv(const fs::path& path, const dtaboot::Dataset& d, const std::string& group = "") {
    std::ofstream out(path);
    out << "study,TP,FP,FN,TN" << (group.empty() ? "" : ",test") << "\n";
    for (const auto& s : d.studies) {
        out << s.label << ',' << s.tp << ',' << s.fp << ',' << s.fn << ',' << s.tn;
        if (!group.empty()) out << ',' << (s.test_group.empty() ? group : s.test_group);
        out << "\n";
    }
}

fs::path two_group_file(const fs::path& dir) {
    dtaboot::Dataset a = testsupport::synthetic_dataset(6, 311, 1.2, -1.2, 0.45, -0.3, 90);
    dtaboot::Dataset b = testsupport::synthetic_dataset(6, 313, 0.6, -1.8, 0.5, -0.2, 90);
    dtaboot::Dataset merged;
    int i = 0;
    for (auto& s : a.studies) {
        s.label = "a" + std::to_string(++i);
        s.test_group = "T1";
        merged.studies.push_back(s);
    }
    for (auto& s : b.studies) {
        s.label = "b" + std::to_string(++i);
        s.test_group = "T2";
        merged.studies.push_back(s);
    }
    const fs::path path = dir / "two_groups.csv";
    write_csv(path, merged, "T1");
    return path;
}

} // namespace

TEST_CASE("fit: artifacts, human table, exit 0") {
    const fs::path dir = fresh_dir("fit");
    const fs::path input = two_group_file(dir);
    const auto r = run_cli("fit --input " + input.string() + " --out " + dir.string(), dir);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("T1") != std::string::npos);
    CHECK(r.out.find("T2") != std::string::npos);
    CHECK(fs::exists(dir / "fit.json"));
    CHECK(fs::exists(dir / "fit.csv"));
    const auto doc = nlohmann::json::parse(slurp(dir / "fit.json"));
    CHECK(doc.at("fits").size() == 2);
    CHECK(doc.at("meta").at("command") == "fit");
}

TEST_CASE("fit --stdout --no-timestamp is machine-readable and reproducible") {
    const fs::path dir = fresh_dir("fitstdout");
    const fs::path input = two_group_file(dir);
    const std::string args = "fit --input " + input.string() + " --out " + dir.string() +
                             " --stdout --no-timestamp";
    const auto r1 = run_cli(args, dir);
    CHECK(r1.exit_code == 0);
    const auto doc = nlohmann::json::parse(r1.out); // stdout carries the artifact
    CHECK(doc.contains("fits"));
    const auto r2 = run_cli(args, dir);
    CHECK(r1.out == r2.out);
    CHECK(slurp(dir / "fit.json") == r1.out.substr(0, r1.out.size() - 1)); // minus final newline
}

TEST_CASE("auc-ci on a 2-study file exits with the minimum-study-count error") {
    const fs::path dir = fresh_dir("tiny");
    const fs::path input = dir / "tiny.csv";
    std::ofstream(input) << "study,TP,FP,FN,TN\ns1,10,2,5,40\ns2,9,3,6,41\n";
    const auto r = run_cli("auc-ci --input " + input.string() + " --out " + dir.string() +
                               " --b 1000 --seed 1",
                           dir);
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("minimum study count") != std::string::npos);
}

TEST_CASE("usage and input errors are distinct") {
    const fs::path dir = fresh_dir("errors");
    SUBCASE("unknown flag -> usage") {
        const auto r = run_cli("fit --nonsense", dir);
        CHECK(r.exit_code == 1);
    }
    SUBCASE("missing input file -> parse") {
        const auto r = run_cli("fit --input " + (dir / "missing.csv").string(), dir);
        CHECK(r.exit_code == 2);
    }
    SUBCASE("compare needs exactly two groups") {
        const fs::path input = two_group_file(dir);
        const auto r = run_cli("compare --input " + input.string() + " --groups T1 --b 1000", dir);
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("two groups") != std::string::npos);
    }
    SUBCASE("b below 1000 is rejected") {
        const fs::path input = two_group_file(dir);
        const auto r = run_cli("auc-ci --input " + input.string() + " --b 500", dir);
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("auc-ci: seeded runs are byte-identical") {
    const fs::path dir = fresh_dir("aucci");
    const fs::path input = two_group_file(dir);
    const std::string args = "auc-ci --input " + input.string() + " --group T1 --b 1000 --seed 42" +
                             " --threads 2 --out " + dir.string() + " --no-timestamp --dump-replicates";
    const auto r1 = run_cli(args, dir);
    REQUIRE(r1.exit_code == 0);
    const std::string json1 = slurp(dir / "auc_ci.json");
    const std::string reps1 = slurp(dir / "replicates_T1.csv");
    const auto r2 = run_cli(args, dir);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(dir / "auc_ci.json") == json1);
    CHECK(slurp(dir / "replicates_T1.csv") == reps1);
    CHECK(fs::exists(dir / "auc_ci.csv"));

    const auto doc = nlohmann::json::parse(json1);
    const auto& res = doc.at("results").at(0);
    CHECK(res.at("bootstrap").at("effective_b").get<int>() == 1000);
    const double lo = res.at("auc").at("interval").at("lower").get<double>();
    const double hi = res.at("auc").at("interval").at("upper").get<double>();
    CHECK(lo < hi);
}

TEST_CASE("compare runs end-to-end on two groups") {
    const fs::path dir = fresh_dir("compare");
    const fs::path input = two_group_file(dir);
    const auto r = run_cli("compare --input " + input.string() +
                               " --groups T1,T2 --b 1000 --seed 9 --threads 2 --out " + dir.string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("dAUC") != std::string::npos);
    const auto doc = nlohmann::json::parse(slurp(dir / "compare.json"));
    CHECK(doc.at("group1") == "T1");
    CHECK(doc.at("dauc").at("p_value").get<double>() > 0.0);
    CHECK(fs::exists(dir / "compare.csv"));
}

TEST_CASE("influence writes the table with the documented columns") {
    const fs::path dir = fresh_dir("influence");
    dtaboot::Dataset d = testsupport::synthetic_dataset(6, 331);
    const fs::path input = dir / "influence.csv.in";
    write_csv(input, d);
    const auto r = run_cli("influence --input " + input.string() +
                               " --b 1000 --seed 4 --threads 2 --out " + dir.string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(dir / "influence.csv");
    CHECK(csv.rfind("study,AUC,dAUC,p2.5,p97.5,flag", 0) == 0);
    int lines = 0;
    for (const char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 7); // header + 6 studies
}

TEST_CASE("plot emits well-formed SVG and optional curve CSV") {
    const fs::path dir = fresh_dir("plot");
    const fs::path input = two_group_file(dir);
    const auto r = run_cli("plot --input " + input.string() + " --format svg,csv --out " +
                               dir.string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    const std::string svg = slurp(dir / "sroc.svg");
    std::string why;
    CHECK_MESSAGE(testsupport::xml_well_formed(svg, &why), why);
    CHECK(fs::exists(dir / "curve_T1.csv"));
    CHECK(fs::exists(dir / "curve_T2.csv"));
}

TEST_CASE("simulate appends the coverage ledger") {
    const fs::path dir = fresh_dir("simulate");
    const fs::path scenario = dir / "scenario.txt";
    std::ofstream(scenario) << "mu_a = 1.2\nmu_b = -1.0\nsigma_a = 0.5\nsigma_b = 0.5\n"
                            << "rho = -0.4\nn_studies = 8\nn_pos = 100\nn_neg = 100\n"
                            << "replications = 100\nb = 1000\nseed = 11\n";
    const auto r = run_cli("simulate --scenario " + scenario.string() + " --threads 2 --out " +
                               dir.string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "simulate.json"));
    const std::string ledger = slurp(dir / "coverage_results.csv");
    CHECK(ledger.rfind("scenario_hash,", 0) == 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "simulate.json"));
    CHECK(doc.at("completed").get<int>() == 100);
    CHECK(doc.at("coverage").get<double>() >= 0.0);
}

TEST_CASE("environment thread default is honored") {
    const fs::path dir = fresh_dir("envthreads");
    const fs::path input = two_group_file(dir);
    // DTABOOT_THREADS feeds the meta echo when --threads is absent
    const std::string cmd = "DTABOOT_THREADS=3 " + std::string(cli_path()) + " fit --input " +
                            input.string() + " --out " + dir.string() +
                            " --no-timestamp --stdout > " + (dir / "o.txt").string() + " 2> " +
                            (dir / "e.txt").string();
    REQUIRE(std::system(cmd.c_str()) == 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "o.txt"));
    CHECK(doc.at("meta").at("threads").get<int>() == 3);
}
