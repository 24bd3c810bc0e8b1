// End-to-end checks of the command-line surface: subcommands, config
// handling, file outputs, exit codes, byte stability.

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CRA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path make_config(const fs::path& dir, const std::string& body) {
    fs::create_directories(dir);
    const fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("fidelity-scan writes sweep files and is byte stable") {
    const fs::path dir = fs::temp_directory_path() / "cra_cli_fidelity";
    fs::remove_all(dir);
    const fs::path config = make_config(
        dir, R"({"c": [1.0], "N": [2, 4, 6], "tau": [0.5], "K": [0], "theta_grid": 201})");

    const std::string out1 = (dir / "run1").string();
    const std::string out2 = (dir / "run2").string();
    CHECK(run_cli("fidelity-scan --config " + config.string() + " --out " + out1 +
                  " --threads 1") == 0);
    CHECK(fs::exists(out1 + "/sweep.csv"));
    CHECK(fs::exists(out1 + "/summary.json"));

    CHECK(run_cli("fidelity-scan --config " + config.string() + " --out " + out2 +
                  " --threads 1") == 0);
    CHECK(slurp(out1 + "/sweep.csv") == slurp(out2 + "/sweep.csv"));
    CHECK(slurp(out1 + "/summary.json") == slurp(out2 + "/summary.json"));
    fs::remove_all(dir);
}

TEST_CASE("fit recomputes exponents from a sweep csv") {
    const fs::path dir = fs::temp_directory_path() / "cra_cli_fit";
    fs::remove_all(dir);
    const fs::path config = make_config(
        dir, R"({"c": [1.0], "N": [2, 4, 6], "tau": [0.5], "K": [0], "theta_grid": 201})");
    const std::string out = (dir / "scan").string();
    REQUIRE(run_cli("fidelity-scan --config " + config.string() + " --out " + out +
                    " --threads 1") == 0);
    CHECK(run_cli("fit --csv " + out + "/sweep.csv --kind gamma --out " + (dir / "fits").string()) ==
          0);
    CHECK(fs::exists(dir / "fits" / "fits.json"));
    fs::remove_all(dir);
}

TEST_CASE("gap-map subcommand") {
    const fs::path dir = fs::temp_directory_path() / "cra_cli_gapmap";
    fs::remove_all(dir);
    const fs::path config = make_config(
        dir, R"({"c": [0.5], "N": [4], "tau": [1.0], "K": [0], "map_grid": 8})");
    const std::string out = (dir / "maps").string();
    CHECK(run_cli("gap-map --config " + config.string() + " --out " + out) == 0);
    CHECK(fs::exists(out + "/gap_map_N4_c0.5.csv"));
    CHECK(fs::exists(out + "/gap_map_N4_c0.5.json"));
    fs::remove_all(dir);
}

TEST_CASE("tts-scan subcommand") {
    const fs::path dir = fs::temp_directory_path() / "cra_cli_tts";
    fs::remove_all(dir);
    const fs::path config = make_config(
        dir, R"({"c": [0.5], "N": [4], "tau": [0.5, 1.0, 2.0], "K": [0, 1], "theta_grid": 201})");
    const std::string out = (dir / "tts").string();
    CHECK(run_cli("tts-scan --config " + config.string() + " --out " + out + " --threads 1") == 0);
    CHECK(fs::exists(out + "/tts.csv"));
    CHECK(fs::exists(out + "/tts.json"));
    fs::remove_all(dir);
}

TEST_CASE("bad inputs exit nonzero") {
    const fs::path dir = fs::temp_directory_path() / "cra_cli_bad";
    fs::remove_all(dir);
    // non-integral cN
    const fs::path config =
        make_config(dir, R"({"c": [0.7], "N": [5], "tau": [1.0], "K": [0]})");
    CHECK(run_cli("fidelity-scan --config " + config.string() + " --out " + (dir / "x").string()) !=
          0);
    // unknown subcommand
    CHECK(run_cli("frobnicate") != 0);
    // missing config file
    CHECK(run_cli("fidelity-scan --config /nonexistent.json --out " + (dir / "y").string()) != 0);
    fs::remove_all(dir);
}
