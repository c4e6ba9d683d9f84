// Command-line front end: threshold calibration, Monte Carlo simulation,
// datacube classification, and map rendering.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcm/pcm.hpp"

using nlohmann::json;

namespace {

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double load_eta(const std::string& eta_arg) {
    // either a literal number or a calibration JSON produced by `calibrate`
    try {
        std::size_t pos = 0;
        const double v = std::stod(eta_arg, &pos);
        if (pos == eta_arg.size()) return v;
    } catch (const std::exception&) {
    }
    std::ifstream is(eta_arg);
    if (!is) throw pcm::IoError(eta_arg);
    json j;
    is >> j;
    return j.at("eta").get<double>();
}

struct CommonOpts {
    std::string arch = "AIC-D-P1";
    int K = 120;
    int trials = 1000;
    std::uint64_t seed = 0;
    double pfa = 0.01;
    double rho = 0.0;  // 0 = architecture default
    int h_max = 10;
    double epsilon = 1e-4;
    int threads = pcm::default_thread_count();

    pcm::Architecture architecture() const { return pcm::Architecture::parse(arch, rho); }

    pcm::EmConfig em_config() const {
        pcm::EmConfig cfg;
        cfg.h_max = h_max;
        cfg.epsilon = epsilon;
        return cfg;
    }

    void attach(CLI::App* cmd, bool with_pfa) {
        cmd->add_option("--arch", arch, "Architecture name (e.g. AIC-D-P1, BASELINE-BIC)");
        cmd->add_option("--K", K, "Window size in pixels");
        cmd->add_option("--trials", trials, "Monte Carlo trials");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--rho", rho, "GIC rho override (> 1)");
        cmd->add_option("--h-max", h_max, "Maximum EM iterations");
        cmd->add_option("--epsilon", epsilon, "EM relative log-likelihood tolerance");
        cmd->add_option("--threads", threads, "Worker threads");
        if (with_pfa) cmd->add_option("--pfa", pfa, "Nominal false alarm probability");
    }
};

int run_calibrate(const CommonOpts& opt, const std::string& out_path) {
    pcm::CalibrationSpec spec;
    spec.architecture = opt.architecture();
    spec.K = opt.K;
    spec.pfa = opt.pfa;
    spec.trials = opt.trials;
    spec.seed = opt.seed;
    spec.em_config = opt.em_config();

    const auto t0 = std::chrono::steady_clock::now();
    const pcm::CalibrationResult res = pcm::calibrate(spec, opt.threads);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json j;
    j["architecture"] = spec.architecture.name;
    j["K"] = spec.K;
    j["pfa"] = spec.pfa;
    j["trials"] = spec.trials;
    j["seed"] = spec.seed;
    if (spec.architecture.rule.kind == pcm::PenaltyKind::gic)
        j["rho"] = spec.architecture.rule.rho;
    j["per_class_thresholds"] = res.per_class_thresholds;
    j["eta"] = res.eta;
    j["runtime_seconds"] = secs;

    std::ofstream os(out_path);
    if (!os) throw pcm::IoError(out_path);
    os << j.dump(2) << "\n";
    return 0;
}

int run_simulate(const CommonOpts& opt, const std::string& scenario, const std::string& eta_arg,
                 const std::string& out_path, const std::string& trace_path) {
    const pcm::Architecture arch = opt.architecture();
    const pcm::Hypothesis kind = pcm::hypothesis_from_name(scenario);
    const double eta = arch.baseline ? 0.0 : load_eta(eta_arg);
    const pcm::MetricsReport r = pcm::run_experiment(arch, opt.K, kind, opt.trials, opt.seed,
                                                     eta, opt.em_config(), opt.threads);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw pcm::IoError(out_path);
        os = &file;
    }
    *os << "architecture,scenario,K,trials,seed,eta,pc,pd,rmsce\n"
        << r.architecture << "," << pcm::hypothesis_name(r.scenario) << "," << r.K << ","
        << r.trials << "," << opt.seed << "," << fmt_full(r.eta) << "," << fmt_full(r.pc) << ","
        << fmt_full(r.pd) << "," << fmt_full(r.rmsce) << "\n";

    if (!trace_path.empty()) {
        const auto rows = pcm::loglik_variation_study({opt.K}, kind, opt.trials, opt.seed,
                                                      opt.h_max, opt.threads);
        std::ofstream ts(trace_path);
        if (!ts) throw pcm::IoError(trace_path);
        ts << "K,m,h,mean_abs_delta\n";
        for (const auto& row : rows)
            for (std::size_t h = 0; h < row.mean_abs_delta.size(); ++h)
                ts << row.K << "," << row.m << "," << (h + 2) << ","
                   << fmt_full(row.mean_abs_delta[h]) << "\n";
    }
    return 0;
}

int run_classify(const CommonOpts& opt, const std::string& cube_path, const std::string& window,
                 const std::string& eta_arg, const std::string& out_path) {
    unsigned wr = 0, wc = 0;
    if (std::sscanf(window.c_str(), "%ux%u", &wr, &wc) != 2 || wr == 0 || wc == 0)
        throw CLI::ValidationError("--window must look like 11x11");
    const pcm::DataCube cube = pcm::read_cube(cube_path);
    const pcm::Architecture arch = opt.architecture();
    const double eta = arch.baseline ? 0.0 : load_eta(eta_arg);
    const pcm::ClassMap map =
        pcm::classify_cube(cube, arch, eta, wr, wc, opt.em_config(), opt.threads);
    pcm::write_map(map, out_path, pcm::MapFormat::csv);
    return 0;
}

int run_render(const std::string& map_path, const std::string& out_path) {
    const pcm::ClassMap map = pcm::read_map_csv(map_path);
    pcm::write_map(map, out_path, pcm::MapFormat::ppm);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polarimetric covariance structure detection and classification"};
    app.require_subcommand(1);

    CommonOpts opt;

    auto* cal = app.add_subcommand("calibrate", "Monte Carlo threshold calibration");
    std::string cal_out = "calibration.json";
    opt.attach(cal, true);
    cal->add_option("--out", cal_out, "Output JSON path");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo metric estimation");
    std::string scenario = "H0", eta_arg, sim_out, trace_out;
    opt.attach(sim, false);
    sim->add_option("--scenario", scenario, "H0, H11, H12 or H13");
    sim->add_option("--eta", eta_arg, "Threshold: number or calibration JSON path")->required();
    sim->add_option("--out", sim_out, "Metrics CSV path (default: stdout)");
    sim->add_option("--loglik-trace", trace_out, "Also emit the per-iteration |dL| CSV");

    auto* cls = app.add_subcommand("classify", "Classify a datacube with a sliding window");
    std::string cube_path, window = "11x11", cls_eta, cls_out = "map.csv";
    opt.attach(cls, false);
    cls->add_option("--cube", cube_path, "PCUBE or CSV cube path")->required();
    cls->add_option("--window", window, "Window dims, e.g. 11x11");
    cls->add_option("--eta", cls_eta, "Threshold: number or calibration JSON path");
    cls->add_option("--out", cls_out, "ClassMap CSV path");

    auto* ren = app.add_subcommand("render", "Render a class map CSV to PPM");
    std::string map_path, ren_out = "map.ppm";
    ren->add_option("--map", map_path, "ClassMap CSV path")->required();
    ren->add_option("--out", ren_out, "Output PPM path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (cal->parsed()) return run_calibrate(opt, cal_out);
        if (sim->parsed()) {
            if (!opt.architecture().baseline && eta_arg.empty())
                throw CLI::ValidationError("--eta is required for detector architectures");
            return run_simulate(opt, scenario, eta_arg, sim_out, trace_out);
        }
        if (cls->parsed()) {
            if (!opt.architecture().baseline && cls_eta.empty())
                throw CLI::ValidationError("--eta is required for detector architectures");
            return run_classify(opt, cube_path, window, cls_eta, cls_out);
        }
        if (ren->parsed()) return run_render(map_path, ren_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
