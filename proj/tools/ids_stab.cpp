// ids_stab: stability checks, delay margins and simulations for integral
// delay systems.
//
// Exit codes: 0 pass / success, 1 fail (criterion not satisfied, margin
// infeasible, selftest failure), 2 usage or input error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ids/margin.hpp"
#include "ids/model.hpp"
#include "ids/selftest.hpp"
#include "ids/simulator.hpp"

namespace {

using ids::margin::format_number;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("IDS_STAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("IDS_STAB_SEED is not an unsigned integer: ") + env);
        }
    }
    return ids::lmi::SolverConfig{}.seed;
}

struct SolverFlags {
    std::optional<std::uint64_t> seed;
    int restarts = ids::lmi::SolverConfig{}.restarts;
    int max_iters = ids::lmi::SolverConfig{}.max_iters;
    double eps_feas = ids::lmi::SolverConfig{}.eps_feas;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Solver seed (default: IDS_STAB_SEED or 20140528)");
        cmd->add_option("--restarts", restarts, "Solver restarts")->check(CLI::NonNegativeNumber);
        cmd->add_option("--max-iters", max_iters, "Solver iteration budget per restart")->check(CLI::PositiveNumber);
        cmd->add_option("--eps-feas", eps_feas, "Feasibility margin")->check(CLI::PositiveNumber);
    }

    [[nodiscard]] ids::lmi::SolverConfig config() const {
        ids::lmi::SolverConfig cfg;
        cfg.seed = seed ? *seed : default_seed();
        cfg.restarts = restarts;
        cfg.max_iters = max_iters;
        cfg.eps_feas = eps_feas;
        return cfg;
    }
};

ids::IdsSystem load(const std::string& path) { return ids::read_system_file(path).integral(); }

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    return out;
}

void write_witness(const std::string& path, const ids::lmi::Witness& w) {
    auto out = open_output(path);
    out << "variable,row,col,value\n";
    for (const auto& [name, m] : w) {
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c)
                out << name << "," << r + 1 << "," << c + 1 << "," << format_number(m(r, c)) << "\n";
    }
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ", ") + format_number(x);
    return s;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("not a number: '" + item + "'");
        }
    }
    return out;
}

std::vector<std::vector<double>> read_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open history samples " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        rows.push_back(parse_list(line));
    }
    return rows;
}

// "random", "random:SEED", "constant:v1,v2,…" or "samples:FILE".
ids::sim::HistorySpec parse_history(const std::string& spec, std::uint64_t seed) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "random") {
        if (arg.empty()) return ids::sim::HistorySpec::make_random_smooth(seed);
        try {
            return ids::sim::HistorySpec::make_random_smooth(std::stoull(arg));
        } catch (const std::exception&) {
            throw UsageError("bad history seed '" + arg + "'");
        }
    }
    if (kind == "constant" && !arg.empty()) return ids::sim::HistorySpec::make_constant(parse_list(arg));
    if (kind == "samples" && !arg.empty()) return ids::sim::HistorySpec::make_sampled(read_samples(arg));
    throw UsageError("bad history '" + spec + "' (expected random[:SEED], constant:v1,v2,... or samples:FILE)");
}

int run_check(const std::string& system, const std::string& method, const SolverFlags& flags,
              const std::string& alpha, const std::string& witness_out) {
    const auto sys = load(system);
    const auto criterion = ids::margin::parse_criterion(method);
    const bool lmi = ids::margin::is_lmi(criterion);
    if (!witness_out.empty() && !lmi) throw UsageError("--witness-out applies to LMI criteria only");
    const auto verdict =
        ids::margin::evaluate_criterion(sys, criterion, flags.config(), alpha.empty() ? std::vector<double>{} : parse_list(alpha));
    std::cout << "method: " << method << "\n";
    std::cout << "verdict: " << (lmi ? (verdict.pass ? "feasible" : "not_found") : (verdict.pass ? "pass" : "fail"))
              << "\n";
    std::cout << verdict.scalar_name << ": " << format_number(verdict.scalar) << "\n";
    if (!lmi) {
        std::cout << "threshold: " << format_number(verdict.threshold) << "\n";
        if (verdict.boundary) std::cout << "boundary: yes\n";
    }
    if (!verdict.alpha.empty()) std::cout << "alpha: " << join(verdict.alpha) << "\n";
    if (!witness_out.empty()) write_witness(witness_out, *verdict.witness);
    return verdict.pass ? kPass : kFail;
}

int run_margin(const std::string& system, std::size_t vary, const std::string& method, double tol,
               std::optional<double> lo, std::optional<double> hi, const SolverFlags& flags) {
    const auto sys = load(system);
    const auto criterion = ids::margin::parse_criterion(method);
    if (vary < 1 || vary > sys.terms()) throw UsageError("--vary must lie in 1.." + std::to_string(sys.terms()));
    const double upper = hi ? *hi : ids::margin::default_upper_bracket(sys);
    const double lower = lo ? *lo : ids::margin::table1_probe_lo;
    const auto m = ids::margin::bisect_margin(sys, vary - 1, criterion, lower, upper, tol, flags.config());
    std::cout << (m ? format_number(*m) : std::string("inf")) << "\n";
    return m ? kPass : kFail;
}

int run_table1(const std::string& out_path, bool serial, const SolverFlags& flags) {
    const auto table = ids::margin::table1(flags.config(), !serial);
    if (out_path.empty()) {
        ids::margin::write_table_csv(std::cout, table);
    } else {
        auto out = open_output(out_path);
        ids::margin::write_table_csv(out, table);
        std::cout << "wrote " << out_path << "\n";
    }
    return kPass;
}

int run_simulate(const std::string& system, double h, double t_final, const std::string& history,
                 const std::string& out_path, std::optional<std::uint64_t> seed) {
    const auto sys = load(system);
    const auto traj = ids::sim::simulate(sys, parse_history(history, seed ? *seed : default_seed()), h, t_final);
    if (out_path.empty()) {
        ids::sim::write_csv(std::cout, traj);
    } else {
        auto out = open_output(out_path);
        ids::sim::write_csv(out, traj);
    }
    auto& info = out_path.empty() ? std::cerr : std::cout;
    if (traj.decay_fit) {
        info << "decay fit: alpha = " << format_number(traj.decay_fit->alpha)
             << ", beta = " << format_number(traj.decay_fit->beta) << "\n";
    } else if (traj.steps() >= 5 * traj.history_steps) {
        info << "decay fit: none (no decay observed)\n";
    } else {
        info << "decay fit: skipped (T < 5 tau)\n";
    }
    return kPass;
}

int run_selftest(std::optional<std::uint64_t> seed) {
    const auto report = ids::selftest::run_all(seed ? *seed : default_seed());
    std::cout << report.text();
    return report.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability analysis of integral delay systems"};
    app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with the step flag --h
    app.require_subcommand(1);

    std::string system, method, alpha, witness_out, out_path, history = "random";
    SolverFlags flags;

    auto* check = app.add_subcommand("check", "Evaluate one stability criterion");
    check->add_option("--system", system, "System file (JSON)")->required();
    check->add_option("--method", method, "Criterion identifier")->required();
    check->add_option("--alpha", alpha, "Weights for spectral-weighted, comma separated");
    check->add_option("--witness-out", witness_out, "Write the LMI witness as CSV");
    flags.add_to(check);

    std::size_t vary = 0;
    double tol = 1e-4;
    std::optional<double> lo, hi;
    auto* margin = app.add_subcommand("margin", "Largest delay at which a criterion holds");
    margin->add_option("--system", system, "System file (JSON)")->required();
    margin->add_option("--vary", vary, "Delay to vary (1-based)")->required();
    margin->add_option("--method", method, "Criterion identifier")->required();
    margin->add_option("--tol", tol, "Bisection tolerance")->check(CLI::PositiveNumber);
    margin->add_option("--lo", lo, "Lower bracket (default 1e-4)")->check(CLI::PositiveNumber);
    margin->add_option("--hi", hi, "Upper bracket (default 10 * max delay)")->check(CLI::PositiveNumber);
    flags.add_to(margin);

    bool serial = false;
    auto* table = app.add_subcommand("table1", "Delay margins of the two-delay reference system");
    table->add_option("--out", out_path, "Output CSV file (default stdout)");
    table->add_flag("--serial", serial, "Compute cells one after another");
    flags.add_to(table);

    double h = 0.0, t_final = 0.0;
    auto* simulate = app.add_subcommand("simulate", "Integrate the system and fit a decay rate");
    simulate->add_option("--system", system, "System file (JSON)")->required();
    simulate->add_option("--h", h, "Step size")->required();
    simulate->add_option("--T", t_final, "Final time")->required();
    simulate->add_option("--history", history, "random[:SEED] | constant:v1,v2,... | samples:FILE");
    simulate->add_option("--out", out_path, "Trajectory CSV (default stdout)");
    std::optional<std::uint64_t> sim_seed;
    simulate->add_option("--seed", sim_seed, "Seed for random histories");

    std::optional<std::uint64_t> test_seed;
    auto* selftest = app.add_subcommand("selftest", "Run the seeded property suites");
    selftest->add_option("--seed", test_seed, "Suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kUsage;
    }

    try {
        if (check->parsed()) return run_check(system, method, flags, alpha, witness_out);
        if (margin->parsed()) return run_margin(system, vary, method, tol, lo, hi, flags);
        if (table->parsed()) return run_table1(out_path, serial, flags);
        if (simulate->parsed()) return run_simulate(system, h, t_final, history, out_path, sim_seed);
        if (selftest->parsed()) return run_selftest(test_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
