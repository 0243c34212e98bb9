// ghzalign command-line driver. Every output carries a schema string, the tool
// version and the full run configuration (including seeds).

#include "ghzalign.hpp"
#include "ghzalign/state_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace ghzalign;
using json = nlohmann::json;

namespace {

enum ExitCode : int { kOk = 0, kInputError = 2, kDomainError = 3, kNotConverged = 4 };

struct OutputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw OutputError("cannot open output file " + path);
    out << text;
}

json envelope(const std::string& command, json config) {
    return {{"schema", "ghzalign." + command + ".v1"}, {"version", kVersion}, {"config", std::move(config)}};
}

std::string csv_header(const std::string& command, const json& config, const std::vector<std::string>& columns) {
    std::ostringstream os;
    os << "# schema: ghzalign." << command << ".v1\n";
    os << "# version: " << kVersion << "\n";
    os << "# config: " << config.dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    return os.str();
}

json matrix_json(const Eigen::Matrix3d& m) {
    json rows = json::array();
    for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
    return rows;
}

json vec3_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

struct AngleArgs {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    bool degrees = false;

    void add_to(CLI::App* cmd, double a0, double b0, double g0) {
        alpha = a0;
        beta = b0;
        gamma = g0;
        cmd->add_option("--alpha", alpha, "Euler angle alpha")->capture_default_str();
        cmd->add_option("--beta", beta, "Euler angle beta")->capture_default_str();
        cmd->add_option("--gamma", gamma, "Euler angle gamma")->capture_default_str();
        cmd->add_flag("--degrees", degrees, "Angles are given in degrees");
    }
    double scale() const { return degrees ? kPi / 180.0 : 1.0; }
    EulerAngles radians() const { return EulerAngles(alpha * scale(), beta * scale(), gamma * scale()); }
    json to_json() const { return {{"alpha", alpha}, {"beta", beta}, {"gamma", gamma}, {"degrees", degrees}}; }
};

// ---------------------------------------------------------------------------

struct QfiCmd {
    int n = 2;
    double delta = 0.0;
    std::string state_file;
    bool want_inverse = false;
    AngleArgs angles;

    int run(const std::string& out) const {
        const SpinState state = state_file.empty() ? ghz_state(n, delta) : load_state_file(state_file);
        const EulerAngles ang = angles.radians();
        const QfiMatrix f = qfi_pure(state, ang);

        json config = {{"N", state.spin.twice()}, {"angles", angles.to_json()}, {"inverse", want_inverse}};
        config["state"] = state_file.empty() ? json{{"kind", "ghz"}, {"delta", delta}} : json{{"kind", "file"}, {"path", state_file}};
        json doc = envelope("qfi", config);
        doc["angles_radians"] = {ang.alpha(), ang.beta(), ang.gamma()};
        doc["F"] = matrix_json(f.entries);
        doc["trace"] = f.trace();
        try {
            const Eigen::Matrix3d inv = inverse(f);
            doc["inverse"] = matrix_json(inv);
            doc["inverse_trace"] = inv.trace();
        } catch (const SingularRotation& e) {
            if (want_inverse) throw;
            doc["inverse"] = nullptr;
            doc["inverse_trace"] = nullptr;
            doc["note"] = std::string("SingularRotation: ") + e.what();
        }
        emit(doc.dump(2) + "\n", out);
        return kOk;
    }
};

struct SweepCmd {
    int n = 4;
    int steps = 100;
    bool goldberg = false;
    std::string format = "csv";

    int run(const std::string& out) const {
        if (n < 1) throw std::invalid_argument("sweep-beta: N must be >= 1");
        if (steps < 2) throw std::invalid_argument("sweep-beta: steps must be >= 2");
        const json config = {{"N", n}, {"steps", steps}, {"compare_goldberg", goldberg}, {"format", format}};
        const SpinState ghz = ghz_state(n, 0.0);

        std::vector<std::string> cols = {"beta", "trace_inv_ghz", "trace_inv_ghz_numeric"};
        if (goldberg) cols.insert(cols.end(), {"trace_inv_goldberg", "ratio"});
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < steps; ++i) {
            const double beta = kPi * (i + 0.5) / steps;
            const double closed = ghz_crb_trace_inverse(n, beta);
            double numeric = INFINITY;
            try {
                numeric = trace_inverse(qfi_pure(ghz, EulerAngles(0.0, beta, 0.0)));
            } catch (const SingularRotation&) {
            }
            std::vector<double> row = {beta, closed, numeric};
            if (goldberg) {
                const double gb = goldberg_bound(n, beta);
                row.insert(row.end(), {gb, closed / gb});
            }
            rows.push_back(std::move(row));
        }

        if (format == "json") {
            json doc = envelope("sweep-beta", config);
            doc["columns"] = cols;
            json data = json::array();
            for (const auto& r : rows) {
                json jr = json::array();
                for (double x : r) jr.push_back(std::isfinite(x) ? json(x) : json(num(x)));
                data.push_back(jr);
            }
            doc["rows"] = data;
            emit(doc.dump(2) + "\n", out);
        } else {
            std::string text = csv_header("sweep-beta", config, cols);
            for (const auto& r : rows) {
                for (std::size_t k = 0; k < r.size(); ++k) text += (k ? "," : "") + num(r[k]);
                text += "\n";
            }
            emit(text, out);
        }
        return kOk;
    }
};

struct HaarCmd {
    int n = 2;
    std::string state_file;
    bool analytic = false;
    long long mc_samples = 0;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    int run(const std::string& out) const {
        const SpinState state = state_file.empty() ? ghz_state(n, 0.0) : load_state_file(state_file);
        const bool do_analytic = analytic || mc_samples == 0;
        json config = {{"N", state.spin.twice()}, {"analytic", do_analytic}, {"mc_samples", mc_samples},
                       {"seed", seed}, {"threads", threads}};
        config["state"] = state_file.empty() ? json{{"kind", "ghz"}} : json{{"kind", "file"}, {"path", state_file}};
        json doc = envelope("haar", config);
        std::optional<double> exact;
        if (do_analytic) {
            exact = haar_avg_trace_analytic(state).value;
            doc["analytic"] = {{"value", *exact}};
        }
        if (mc_samples > 0) {
            const HaarAverage mc = haar_avg_trace_mc(state, mc_samples, seed, threads);
            doc["mc"] = {{"value", mc.value}, {"std_error", mc.std_error}, {"n_samples", mc.n_samples}, {"seed", seed}};
            if (exact && mc.std_error > 0.0) {
                const double z = (mc.value - *exact) / mc.std_error;
                doc["mc"]["z_score"] = z;
                doc["mc"]["within_3_std_error"] = std::abs(z) <= 3.0;
            }
        }
        if (state_file.empty()) doc["ghz_reference"] = n * (4.0 * n + 5.0) / 3.0;
        emit(doc.dump(2) + "\n", out);
        return kOk;
    }
};

struct NoiseCmd {
    int n = 4;
    std::string model = "dephasing";
    std::vector<double> ps = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> betas = {kPi / 2};
    double alpha = 0.0, gamma = 0.0;
    bool degrees = false;
    std::string format = "csv";

    int run(const std::string& out) const {
        const double s = degrees ? kPi / 180.0 : 1.0;
        const json config = {{"N", n},           {"model", model}, {"p", ps},       {"beta", betas},
                             {"alpha", alpha},   {"gamma", gamma}, {"degrees", degrees}, {"format", format}};
        std::vector<std::string> cols;
        std::vector<std::vector<double>> rows;
        if (model == "dephasing") {
            cols = {"p", "beta", "closed_form", "numeric", "abs_diff"};
            for (double p : ps) {
                const MixedQfi mixed(dephase_ghz(n, p));
                for (double b : betas) {
                    const EulerAngles ang(alpha * s, b * s, gamma * s);
                    const double closed = dephased_trace_qfi_closed(n, p, ang.beta());
                    const double numeric = mixed.at(ang).trace();
                    rows.push_back({p, b, closed, numeric, std::abs(closed - numeric)});
                }
            }
        } else {
            cols = {"p", "beta", "factor_exact", "factor_leading", "factor_bound", "closed_form", "numeric", "numeric_ratio",
                    "offdiag_ratio"};
            const SpinState ghz = ghz_state(n, 0.0);
            std::vector<EulerAngles> grid;
            for (double b : betas) grid.emplace_back(alpha * s, b * s, gamma * s);
            for (double p : ps) {
                const DepolarizingFactor f = depol_qfi_factor(n, p);
                const double bound = 8.0 * (1.0 - p) / std::ldexp(1.0, n);
                std::vector<DepolarizingComparison> cmp;
                if (n <= 10) cmp = compare_depolarized(ghz, p, grid);
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    const double pure = qfi_pure(ghz, grid[i]).trace();
                    const double numeric = cmp.empty() ? NAN : cmp[i].trace_mixed;
                    const double ratio = cmp.empty() ? NAN : cmp[i].trace_ratio;
                    const double offdiag = cmp.empty() ? NAN : cmp[i].offdiag_ratio;
                    rows.push_back({p, betas[i], f.exact, f.leading, bound, f.exact * pure, numeric, ratio, offdiag});
                }
            }
        }

        if (format == "json") {
            json doc = envelope("noise", config);
            json data = json::array();
            for (const auto& r : rows) {
                json obj;
                for (std::size_t k = 0; k < cols.size(); ++k) obj[cols[k]] = std::isfinite(r[k]) ? json(r[k]) : json(nullptr);
                data.push_back(obj);
            }
            doc["rows"] = data;
            emit(doc.dump(2) + "\n", out);
        } else {
            std::string text = csv_header("noise", config, cols);
            for (const auto& r : rows) {
                for (std::size_t k = 0; k < r.size(); ++k) text += (k ? "," : "") + num(r[k]);
                text += "\n";
            }
            emit(text, out);
        }
        return kOk;
    }
};

json run_json(const EstimationRun& r) {
    json j = {{"seed", r.seed},
              {"ok", r.ok},
              {"estimates", r.estimates},
              {"alpha_branches", r.alpha_branches},
              {"beta_branches", r.beta_branches},
              {"gamma_set", r.gamma_set},
              {"second_moments", r.second_moments},
              {"parity_mean", r.parity_mean},
              {"inversion_quality", r.inversion_quality},
              {"squared_error", r.empirical_error},
              {"total_squared_error", r.total_squared_error()}};
    if (!r.ok) j["error"] = r.error;
    return j;
}

struct EstimateCmd {
    int n = 4;
    int shots = 100000;
    int batches = 10;
    std::uint64_t seed = 0;
    bool idealized = false;
    bool summary_only = false;
    AngleArgs angles;

    int run(const std::string& out) const {
        ProtocolOptions opts;
        opts.idealized_realignment = idealized;
        const EulerAngles truth = angles.radians();
        const BatchSummary s = run_batches(truth, n, shots, batches, seed, opts);
        const json config = {{"N", n},       {"angles", angles.to_json()}, {"shots_per_setting", shots},
                             {"batches", batches}, {"seed", seed}, {"idealized_realignment", idealized}};
        json doc = envelope("estimate", config);
        doc["truth_fundamental_domain"] = fundamental_domain(truth, n);
        if (!summary_only) {
            json runs = json::array();
            for (const auto& r : s.runs) runs.push_back(run_json(r));
            doc["runs"] = runs;
        }
        json summary = {{"failures", s.failures},
                        {"mean_squared_error", s.mean_squared_error},
                        {"mean_total_squared_error", s.mean_total_squared_error},
                        {"total_error_std_error", s.total_error_std_error}};
        if (std::isfinite(s.crb_trace)) {
            summary["crb_trace"] = s.crb_trace;
            summary["crb_over_shots"] = s.crb_over_shots;
            summary["crb_over_total_copies"] = s.crb_over_total_copies;
            summary["error_over_crb"] = s.mean_total_squared_error / s.crb_over_shots;
        } else {
            summary["crb_trace"] = nullptr;
            summary["note"] = "sin(beta) ~ 0: Cramer-Rao bound undefined in this chart";
        }
        doc["summary"] = summary;
        emit(doc.dump(2) + "\n", out);
        return kOk;
    }
};

struct OptimizeCmd {
    double j = 1.0;
    MaximizeOptions opt;

    int run(const std::string& out) const {
        const Spin spin = Spin::from_value(j);
        const OptimizationResult r = maximize(spin, opt);
        const json config = {{"j", j}, {"restarts", opt.restarts}, {"seed", opt.seed}, {"tol", opt.tol}, {"max_iter", opt.max_iter}};
        json doc = envelope("optimize", config);
        const SpinOperators ops = spin_operators(spin);
        const double nn = spin.twice();
        json maximizers = json::array();
        for (const auto& m : r.distinct_maximizers)
            maximizers.push_back({{"transverse_mean", m.transverse_mean},
                                  {"axial_mean", m.axial_mean},
                                  {"transverse_second", {m.transverse_second(0), m.transverse_second(1)}},
                                  {"axial_second", m.axial_second}});
        doc["result"] = {{"best_value", r.best_value},
                         {"ghz_value", nn * (4.0 * nn + 5.0) / 3.0},
                         {"best_state", state_to_json(r.best_state)},
                         {"first_moments", vec3_json(first_moments(r.best_state, ops))},
                         {"second_moments", vec3_json(second_moments(r.best_state, ops))},
                         {"restarts_used", r.restarts_used},
                         {"iterations", r.iterations},
                         {"total_iterations", r.total_iterations},
                         {"converged", r.converged},
                         {"distinct_maximizers", maximizers}};
        emit(doc.dump(2) + "\n", out);
        if (!r.converged) {
            std::cerr << "optimize: no restart converged within max-iter\n";
            return kNotConverged;
        }
        return kOk;
    }
};

struct MajoranaCmd {
    std::string state_file;
    int ghz_n = 0;
    std::vector<double> rotate;
    bool degrees = false;

    int run(const std::string& out) const {
        SpinState state = state_file.empty() ? ghz_state(ghz_n, 0.0) : load_state_file(state_file);
        json config = {{"degrees", degrees}};
        config["state"] = state_file.empty() ? json{{"kind", "ghz"}, {"N", ghz_n}} : json{{"kind", "file"}, {"path", state_file}};
        if (!rotate.empty()) {
            const double s = degrees ? kPi / 180.0 : 1.0;
            config["rotate"] = rotate;
            state.amplitudes = rotation(state.spin, rotate[0] * s, rotate[1] * s, rotate[2] * s) * state.amplitudes;
        }
        json doc = envelope("majorana", config);
        doc["j"] = state.spin.value();
        json pts = json::array();
        for (const SpherePoint& p : majorana_roots(state).directions) {
            const Eigen::Vector3d v = p.unit_vector();
            pts.push_back({{"theta", p.theta}, {"phi", p.phi}, {"x", v.x()}, {"y", v.y()}, {"z", v.z()}});
        }
        doc["points"] = pts;
        emit(doc.dump(2) + "\n", out);
        return kOk;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"QFI toolkit for SU(2) frame alignment with GHZ probes"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    std::string output;
    app.add_option("-o,--output", output, "Write results to this file instead of stdout");

    QfiCmd qfi;
    auto* c_qfi = app.add_subcommand("qfi", "Fisher matrix, trace and inverse trace at given Euler angles");
    c_qfi->add_option("--N", qfi.n, "Number of qubits of the GHZ probe")->capture_default_str();
    c_qfi->add_option("--delta", qfi.delta, "Relative GHZ phase")->capture_default_str();
    c_qfi->add_option("--state", qfi.state_file, "JSON state file instead of GHZ");
    c_qfi->add_flag("--inverse", qfi.want_inverse, "Fail with exit 3 when F is singular");
    qfi.angles.add_to(c_qfi, 0.0, 0.0, 0.0);

    SweepCmd sweep;
    auto* c_sweep = app.add_subcommand("sweep-beta", "Tr F^-1 of GHZ versus beta");
    c_sweep->add_option("--N", sweep.n, "Number of qubits")->capture_default_str();
    c_sweep->add_option("--steps", sweep.steps, "Grid points, beta = pi (i + 1/2) / steps")->capture_default_str();
    c_sweep->add_flag("--compare-goldberg", sweep.goldberg, "Add the anti-coherent baseline and ratio columns");
    c_sweep->add_option("--format", sweep.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    HaarCmd haar;
    auto* c_haar = app.add_subcommand("haar", "Haar-averaged trace of the Fisher matrix");
    auto* haar_n = c_haar->add_option("--N", haar.n, "Number of qubits of the GHZ probe")->capture_default_str();
    auto* haar_state = c_haar->add_option("--state", haar.state_file, "JSON state file instead of GHZ");
    haar_n->excludes(haar_state);
    c_haar->add_flag("--analytic", haar.analytic, "Moment formula (default when --mc is absent)");
    c_haar->add_option("--mc", haar.mc_samples, "Monte Carlo sample count");
    c_haar->add_option("--seed", haar.seed, "Monte Carlo seed")->capture_default_str();
    c_haar->add_option("--threads", haar.threads, "Worker threads; results do not depend on it")->capture_default_str();

    NoiseCmd noise;
    auto* c_noise = app.add_subcommand("noise", "Closed-form versus numeric QFI under noise");
    c_noise->add_option("--N", noise.n, "Number of qubits")->capture_default_str();
    c_noise->add_option("--model", noise.model, "Noise channel")->check(CLI::IsMember({"dephasing", "depolarizing"}))->capture_default_str();
    c_noise->add_option("--p", noise.ps, "Comma-separated noise parameters")->delimiter(',');
    c_noise->add_option("--beta", noise.betas, "Comma-separated beta values")->delimiter(',');
    c_noise->add_option("--alpha", noise.alpha, "Euler angle alpha")->capture_default_str();
    c_noise->add_option("--gamma", noise.gamma, "Euler angle gamma")->capture_default_str();
    c_noise->add_flag("--degrees", noise.degrees, "Angles are given in degrees");
    c_noise->add_option("--format", noise.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    EstimateCmd est;
    auto* c_est = app.add_subcommand("estimate", "Monte Carlo of the measurement protocol");
    c_est->add_option("--N", est.n, "Number of qubits")->capture_default_str();
    c_est->add_option("--shots", est.shots, "Copies per measurement setting")->capture_default_str();
    c_est->add_option("--batches", est.batches, "Independent protocol runs")->capture_default_str();
    c_est->add_option("--seed", est.seed, "Master seed")->capture_default_str();
    c_est->add_flag("--idealized-realignment", est.idealized, "Re-align parity copies with the true angles");
    c_est->add_flag("--summary-only", est.summary_only, "Omit per-run records");
    est.angles.add_to(c_est, 0.7, kPi / 2, 0.3);

    OptimizeCmd optim;
    auto* c_opt = app.add_subcommand("optimize", "Maximize the Haar-averaged trace over spin-j states");
    c_opt->add_option("--j", optim.j, "Spin quantum number (N/2)")->capture_default_str();
    c_opt->add_option("--restarts", optim.opt.restarts, "Random starts")->capture_default_str();
    c_opt->add_option("--seed", optim.opt.seed, "Seed for the starting states")->capture_default_str();
    c_opt->add_option("--tol", optim.opt.tol, "Convergence tolerance")->capture_default_str();
    c_opt->add_option("--max-iter", optim.opt.max_iter, "Iteration cap per restart")->capture_default_str();

    MajoranaCmd maj;
    auto* c_maj = app.add_subcommand("majorana", "Majorana points of a state");
    auto* maj_state = c_maj->add_option("--state", maj.state_file, "JSON state file");
    auto* maj_ghz = c_maj->add_option("--ghz", maj.ghz_n, "GHZ state of N qubits");
    maj_state->excludes(maj_ghz);
    c_maj->add_option("--rotate", maj.rotate, "Rotate the state by Euler angles a b g first")->expected(3);
    c_maj->add_flag("--degrees", maj.degrees, "Rotation angles are given in degrees");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    try {
        if (c_qfi->parsed()) return qfi.run(output);
        if (c_sweep->parsed()) return sweep.run(output);
        if (c_haar->parsed()) return haar.run(output);
        if (c_noise->parsed()) return noise.run(output);
        if (c_est->parsed()) return est.run(output);
        if (c_opt->parsed()) return optim.run(output);
        if (c_maj->parsed()) {
            if (maj.state_file.empty() && maj.ghz_n < 1) throw std::invalid_argument("majorana: give --state or --ghz N");
            return maj.run(output);
        }
    } catch (const StateFileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const SingularRotation& e) {
        std::cerr << "error: singular rotation: " << e.what() << "\n";
        return kDomainError;
    } catch (const DegenerateState& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainError;
    } catch (const DegenerateInversion& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomainError;
    } catch (const OutputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kInputError;
}
