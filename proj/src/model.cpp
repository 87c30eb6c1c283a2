#include "ids/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace ids {

namespace {

void check_matrices(const std::vector<Matrix>& a, std::size_t& n_out) {
    if (a.empty()) {
        throw ModelError("N = 0: at least one delay term is required");
    }
    const std::size_t n = a.front().rows();
    if (n == 0) {
        throw ModelError("dimension mismatch: A1 is empty");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].rows() != n || a[i].cols() != n) {
            std::ostringstream os;
            os << "dimension mismatch: A" << (i + 1) << " is " << a[i].rows() << "x" << a[i].cols()
               << ", expected " << n << "x" << n;
            throw ModelError(os.str());
        }
        for (double v : a[i].data()) {
            if (!std::isfinite(v)) {
                throw ModelError("non-finite entry in A" + std::to_string(i + 1));
            }
        }
    }
    n_out = n;
}

void check_delays(const std::vector<double>& tau, std::size_t terms) {
    if (tau.size() != terms) {
        throw ModelError("dimension mismatch: " + std::to_string(terms) + " matrices but " +
                         std::to_string(tau.size()) + " delays");
    }
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!std::isfinite(tau[i]) || tau[i] <= 0.0) {
            std::ostringstream os;
            os << "nonpositive delay: tau" << (i + 1) << " = " << tau[i];
            throw ModelError(os.str());
        }
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

Matrix parse_matrix(const nlohmann::json& j, std::size_t index) {
    const std::string where = "A[" + std::to_string(index) + "]";
    if (!j.is_array()) {
        throw ModelError("field " + where + ": expected a list of rows");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto& row = j[r];
        if (!row.is_array()) {
            throw ModelError("field " + where + " row " + std::to_string(r) + ": expected a list of numbers");
        }
        std::vector<double> vals;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!row[c].is_number()) {
                throw ModelError("field " + where + " row " + std::to_string(r) + " col " + std::to_string(c) +
                                 ": expected a number");
            }
            vals.push_back(row[c].get<double>());
        }
        if (!rows.empty() && vals.size() != rows.front().size()) {
            throw ModelError("dimension mismatch: field " + where + " has ragged rows");
        }
        rows.push_back(std::move(vals));
    }
    return Matrix::from_rows(rows);
}

}  // namespace

IdsSystem validate_system(std::vector<Matrix> a, std::vector<double> tau) {
    IdsSystem sys;
    check_matrices(a, sys.n_);
    check_delays(tau, a.size());
    sys.tau_max_ = *std::max_element(tau.begin(), tau.end());
    sys.a_ = std::move(a);
    sys.tau_ = std::move(tau);
    return sys;
}

IdsSystem validate_system(const IdsSystem& candidate) { return validate_system(candidate.a(), candidate.tau()); }

IdsSystem IdsSystem::with_delay(std::size_t index, double value) const {
    auto t = tau_;
    t.at(index) = value;
    return validate_system(a_, std::move(t));
}

DiscreteIds validate_discrete(std::vector<Matrix> a, std::vector<double> tau) {
    DiscreteIds sys;
    check_matrices(a, sys.n_);
    check_delays(tau, a.size());
    for (std::size_t i = 1; i < tau.size(); ++i) {
        if (!(tau[i - 1] < tau[i])) {
            throw ModelError("discrete delays must be strictly increasing");
        }
    }
    sys.a_ = std::move(a);
    sys.tau_ = std::move(tau);
    return sys;
}

IdsSystem SystemFile::integral() const { return validate_system(a, tau); }
DiscreteIds SystemFile::discrete() const { return validate_discrete(a, tau); }

SystemFile parse_system_file(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(std::string("parse error: ") + e.what());
    }
    if (!j.is_object()) {
        throw ModelError("parse error: top level must be an object");
    }
    if (!j.contains("A")) throw ModelError("parse error: missing field \"A\"");
    if (!j.contains("tau")) throw ModelError("parse error: missing field \"tau\"");
    if (!j["A"].is_array()) throw ModelError("field A: expected a list of matrices");
    if (!j["tau"].is_array()) throw ModelError("field tau: expected a list of numbers");

    SystemFile f;
    if (j.contains("kind")) {
        if (!j["kind"].is_string()) throw ModelError("field kind: expected a string");
        const auto k = j["kind"].get<std::string>();
        if (k == "integral") {
            f.kind = SystemKind::integral;
        } else if (k == "discrete") {
            f.kind = SystemKind::discrete;
        } else {
            throw ModelError("field kind: unknown value \"" + k + "\"");
        }
    }
    for (std::size_t i = 0; i < j["A"].size(); ++i) f.a.push_back(parse_matrix(j["A"][i], i));
    for (std::size_t i = 0; i < j["tau"].size(); ++i) {
        if (!j["tau"][i].is_number()) {
            throw ModelError("field tau[" + std::to_string(i) + "]: expected a number");
        }
        f.tau.push_back(j["tau"][i].get<double>());
    }
    // Validate eagerly so malformed files fail at load time.
    if (f.kind == SystemKind::integral) {
        (void)f.integral();
    } else {
        (void)f.discrete();
    }
    return f;
}

SystemFile read_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ModelError("cannot open system file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system_file(ss.str());
}

IdsSystem load_system(const std::string& text) {
    const auto f = parse_system_file(text);
    if (f.kind != SystemKind::integral) {
        throw ModelError("expected an integral system, file declares kind \"discrete\"");
    }
    return f.integral();
}

namespace {

std::string save_impl(const std::vector<Matrix>& a, const std::vector<double>& tau, const char* kind) {
    std::ostringstream os;
    os << "{\n  \"kind\": \"" << kind << "\",\n  \"A\": [\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
        os << "    [";
        for (std::size_t r = 0; r < a[i].rows(); ++r) {
            os << (r == 0 ? "[" : ", [");
            for (std::size_t c = 0; c < a[i].cols(); ++c) os << (c == 0 ? "" : ", ") << format_double(a[i](r, c));
            os << "]";
        }
        os << "]" << (i + 1 < a.size() ? "," : "") << "\n";
    }
    os << "  ],\n  \"tau\": [";
    for (std::size_t i = 0; i < tau.size(); ++i) os << (i == 0 ? "" : ", ") << format_double(tau[i]);
    os << "]\n}\n";
    return os.str();
}

}  // namespace

std::string save_system(const IdsSystem& sys) { return save_impl(sys.a(), sys.tau(), "integral"); }
std::string save_system(const DiscreteIds& sys) { return save_impl(sys.a(), sys.tau(), "discrete"); }

Matrix reference_a1() { return Matrix{{-4.0, 1.0}, {-13.0, 2.0}}; }
Matrix reference_a2() { return Matrix{{0.0, -1.0}, {1.0, 0.0}}; }

IdsSystem reference_system(double tau1, double tau2) {
    return validate_system({reference_a1(), reference_a2()}, {tau1, tau2});
}

}  // namespace ids
