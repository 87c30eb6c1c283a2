#include <doctest.h>

#include <sys/wait.h>

#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ids/model.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into stdout.
Run run(const std::string& args) {
    const std::string cmd = std::string(IDS_STAB_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    Run r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("ids_stab_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path_ / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string path(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string read_file(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("check --method amc").code == 2);
    const auto missing = run("check --system /nonexistent.json --method amc");
    CHECK(missing.code == 2);
    CHECK(contains(missing.out, "error:"));
    CHECK(run("--help").code == 0);
}

TEST_CASE("check reports verdicts through the exit code") {
    TempDir dir;
    const auto ok = dir.file("ok.json", ids::save_system(ids::reference_system(0.3, 0.04)));
    const auto bad = dir.file("bad.json", ids::save_system(ids::reference_system(0.3, 0.06)));

    const auto pass = run("check --system " + ok + " --method spectral");
    CHECK(pass.code == 0);
    CHECK(contains(pass.out, "verdict: pass"));
    CHECK(contains(pass.out, "rho: "));
    CHECK(run("check --system " + bad + " --method spectral").code == 1);

    const auto lmi = run("check --system " + ok + " --method amc --witness-out " + dir.path("w.csv"));
    CHECK(lmi.code == 0);
    CHECK(contains(lmi.out, "verdict: feasible"));
    const auto csv = read_file(dir.path("w.csv"));
    CHECK(csv.starts_with("variable,row,col,value\n"));
    CHECK(contains(csv, "\nP,1,1,"));
    CHECK(contains(csv, "\nQ2,2,2,"));

    const auto unknown = run("check --system " + ok + " --method th9");
    CHECK(unknown.code == 2);
    CHECK(contains(unknown.out, "unknown criterion 'th9'"));
    CHECK(run("check --system " + ok + " --method spectral --witness-out " + dir.path("x.csv")).code == 2);
    CHECK(run("check --system " + ok + " --method single-delay").code == 2);

    const auto weighted = run("check --system " + ok + " --method spectral-weighted --alpha 0.9,0.1");
    CHECK(weighted.code == 0);
    CHECK(contains(weighted.out, "alpha: 0.9, 0.1"));
}

TEST_CASE("margin on the reference system") {
    TempDir dir;
    const auto sys02 = dir.file("s02.json", ids::save_system(ids::reference_system(0.2, 0.01)));
    const auto amc = run("margin --system " + sys02 + " --vary 2 --method amc");
    CHECK(amc.code == 0);
    CHECK(std::abs(std::stod(amc.out) - 0.1527) <= 2e-3);

    const auto sys01 = dir.file("s01.json", ids::save_system(ids::reference_system(0.1, 0.01)));
    const auto lmi = run("margin --system " + sys01 + " --vary 2 --method th2-lmi");
    CHECK(lmi.code == 0);
    CHECK(std::abs(std::stod(lmi.out) - 0.4882) <= 2e-3);

    const auto sys04 = dir.file("s04.json", ids::save_system(ids::reference_system(0.4, 0.01)));
    const auto none = run("margin --system " + sys04 + " --vary 2 --method spectral");
    CHECK(none.code == 1);
    CHECK(none.out == "inf\n");

    CHECK(run("margin --system " + sys04 + " --vary 3 --method spectral").code == 2);
    CHECK(run("margin --system " + sys04 + " --vary 2 --method spectral --lo 1 --hi 0.5").code == 2);
}

TEST_CASE("simulate writes a trajectory") {
    TempDir dir;
    const auto zero = dir.file("zero.json", R"({"A": [[[0, 0], [0, 0]]], "tau": [1]})");
    const auto res = run("simulate --system " + zero + " --h 0.1 --T 6 --history constant:1,2 --out " +
                         dir.path("traj.csv"));
    CHECK(res.code == 0);
    const auto csv = read_file(dir.path("traj.csv"));
    CHECK(contains(csv, "# decay fit: alpha = 1, beta = inf"));
    CHECK(contains(csv, "\nt, x1, x2\n"));
    CHECK(contains(csv, "\n6, 0, 0\n"));

    const auto to_stdout = run("simulate --system " + zero + " --h 0.1 --T 2 --history random:3");
    CHECK(to_stdout.code == 0);
    CHECK(contains(to_stdout.out, "t, x1, x2"));

    CHECK(run("simulate --system " + zero + " --h 0.5 --T 6").code == 2);
    CHECK(run("simulate --system " + zero + " --h 0.1 --T 6 --history constant:1").code == 2);
    CHECK(run("simulate --system " + zero + " --h 0.1 --T 6 --history wobbly").code == 2);
}

TEST_CASE("table1 writes the margin table") {
    TempDir dir;
    const auto res = run("table1 --out " + dir.path("t.csv"));
    CHECK(res.code == 0);
    const auto csv = read_file(dir.path("t.csv"));
    CHECK(csv.starts_with("tau1, th2-lmi, amc, single, spectral\n0.4, "));
    CHECK(contains(csv, ", inf, inf, inf\n"));
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 5);
}
