// SPDX-License-Identifier: MIT
//
// wcsp-sr: upper bounds for weighted CSPs by iterated super-reparametrization.
//
// Exit status: 0 success, 1 usage error, 2 unreadable or malformed input,
// 3 --verify refused because the instance is too large to enumerate,
// 4 partial result after a time or iteration limit (bound still printed),
// 5 a --verify check failed.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wcspsr/wcspsr.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitScale = 3;
constexpr int kExitPartial = 4;
constexpr int kExitVerify = 5;

std::string format_bound(double b)
{
    if (std::isinf(b))
        return b < 0 ? "-inf" : "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", b);
    return buf;
}

wcspsr::Instance load(const std::string& path, const std::string& format)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (format == "wcsp")
        return wcspsr::parse_wcsp(text);
    if (format == "native")
        return wcspsr::parse_native(text);
    return wcspsr::parse_auto(text);
}

// Returns an exit status, 0 when every check passes.
int verify(const wcspsr::Instance& inst, const wcspsr::SolverReport& rep, wcspsr::SolverMode mode)
{
    const auto& st = inst.structure;
    try {
        wcspsr::check_scale(st, wcspsr::kDefaultScaleCap);
    } catch (const wcspsr::ScaleError& e) {
        std::cerr << "verify: " << e.what() << '\n';
        return kExitScale;
    }
    const auto opt = wcspsr::brute_force_optimum(st, inst.weights);
    bool ok = true;
    if (!(rep.bound >= opt.value - wcspsr::kOracleTolerance)) {
        std::cerr << "verify: bound " << format_bound(rep.bound) << " is below the optimum " << format_bound(opt.value) << '\n';
        ok = false;
    }
    if (std::isfinite(rep.bound) && !wcspsr::is_superreparametrization(st, rep.weights, inst.weights)) {
        std::cerr << "verify: final weights are not a super-reparametrization of the input\n";
        ok = false;
    }
    if (mode == wcspsr::SolverMode::VAC && std::isfinite(rep.bound) && !wcspsr::is_reparametrization(st, rep.weights, inst.weights)) {
        std::cerr << "verify: arc consistency mode changed some objective value\n";
        ok = false;
    }
    std::cerr << "verify: optimum " << format_bound(opt.value) << ", bound " << format_bound(rep.bound) << (ok ? ", ok" : ", FAILED") << '\n';
    return ok ? 0 : kExitVerify;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Upper bounds for weighted CSPs (maximisation) by iterated super-reparametrization." };
    std::string input;
    std::string format = "auto";
    std::string mode_name = "vsac-sr";
    std::optional<double> theta_init;
    wcspsr::SolverConfig cfg;
    std::string csv_path;
    bool do_verify = false;

    app.add_option("input", input, "Instance file (.wcsp cost-function network or native document)")->required();
    app.add_option("--format", format, "Input format")->check(CLI::IsMember({ "auto", "wcsp", "native" }));
    app.add_option("--mode", mode_name, "Propagator used to find improving directions")
        ->check(CLI::IsMember({ "vac", "vsac-sr", "vcc-sr" }));
    app.add_option("--theta-init", theta_init, "Initial capacity-scaling threshold (default: from the instance)");
    app.add_option("--theta-factor", cfg.theta_factor, "Divisor applied to theta at each fixpoint");
    app.add_option("--theta-min", cfg.theta_min, "Threshold at which scaling stops");
    app.add_option("--stall-window", cfg.stall_window, "Iterations inspected by the stall rule");
    app.add_option("--stall-eps", cfg.stall_epsilon, "Minimum improvement over the stall window");
    app.add_option("--max-iters", cfg.max_iterations, "Iteration limit");
    app.add_option("--time-limit-s", cfg.time_limit_s, "Wall-clock limit in seconds (0 disables)");
    bool no_prepass = false;
    app.add_flag("--no-vac-prepass", no_prepass, "Skip the arc consistency stage before singleton or cycle mode");
    app.add_option("--log-csv", csv_path, "Write per-iteration records to this CSV file");
    app.add_flag("--verify", do_verify, "Check the result against exhaustive enumeration");

    if (argc <= 1) {
        std::cerr << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    cfg.theta_init = theta_init;
    cfg.vac_prepass = !no_prepass;
    cfg.mode = mode_name == "vac" ? wcspsr::SolverMode::VAC : mode_name == "vcc-sr" ? wcspsr::SolverMode::VCC_SR : wcspsr::SolverMode::VSAC_SR;
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    wcspsr::Instance inst;
    try {
        inst = load(input, format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << input << ": " << e.what() << '\n';
        return kExitParse;
    }
    if (cfg.mode == wcspsr::SolverMode::VCC_SR && !inst.structure.is_binary()) {
        std::cerr << "error: cycle mode needs a binary instance\n";
        return kExitUsage;
    }
    if (!inst.structure.has_all_unary()) {
        std::cerr << "error: every variable needs a unary scope\n";
        return kExitParse;
    }

    const wcspsr::SolverReport rep = wcspsr::solve(inst.structure, inst.weights, cfg);
    std::cout << format_bound(rep.bound) << '\n';
    std::cerr << "termination: " << wcspsr::to_string(rep.termination) << ", iterations: " << rep.iterations << '\n';

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) {
            std::cerr << "error: cannot write " << csv_path << '\n';
            return kExitUsage;
        }
        wcspsr::write_csv_row(csv, { "k", "bound", "theta", "alpha", "cert_nnz", "elapsed" });
        for (const auto& r : rep.log)
            wcspsr::write_csv_row(csv,
                { std::to_string(r.iteration), wcspsr::format_number(r.bound), wcspsr::format_number(r.theta),
                    wcspsr::format_number(r.alpha), std::to_string(r.certificate_nnz), wcspsr::format_number(r.elapsed_s) });
    }

    if (do_verify)
        if (int status = verify(inst, rep, cfg.mode))
            return status;
    return rep.partial() ? kExitPartial : 0;
}
