#include "oscmult/atoms.hpp"
#include "oscmult/experiments.hpp"
#include "oscmult/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace oscmult;

namespace {

struct RunConfig {
    int n = 1;
    double s = 0.5;
    double m = 0.0;
    bool m_set = false;
    int j_min = 4;
    int j_max = 10;
    double atom_radius = 0.0625;
    std::string inputs = "random";
    std::string input_path;
    std::string out_dir;
    std::uint64_t seed = 456789;
    unsigned threads = 0;
    // explicit grid override (0 = auto policy)
    double grid_half_width = 0.0;
    std::size_t grid_points = 0;
    int level = 8;
    double min_half_width = 0.0;
    int a_max = 16;
    int n_decay = 4;
    int trials = 20;

    void load_file(const fs::path& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("config: cannot open " + path.string());
        nlohmann::json j;
        is >> j;
        if (j.contains("n")) n = j["n"].get<int>();
        if (j.contains("s")) s = j["s"].get<double>();
        if (j.contains("m")) {
            m = j["m"].get<double>();
            m_set = true;
        }
        if (j.contains("j_min")) j_min = j["j_min"].get<int>();
        if (j.contains("j_max")) j_max = j["j_max"].get<int>();
        if (j.contains("j")) level = j["j"].get<int>();
        if (j.contains("r")) atom_radius = j["r"].get<double>();
        if (j.contains("inputs")) inputs = j["inputs"].get<std::string>();
        if (j.contains("out")) out_dir = j["out"].get<std::string>();
        if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) threads = j["threads"].get<unsigned>();
        if (j.contains("a_max")) a_max = j["a_max"].get<int>();
        if (j.contains("n_decay")) n_decay = j["n_decay"].get<int>();
        if (j.contains("trials")) trials = j["trials"].get<int>();
        if (j.contains("grid")) {
            const auto& g = j["grid"];
            if (g.is_object()) {
                if (g.contains("L")) grid_half_width = g["L"].get<double>();
                if (g.contains("N")) grid_points = g["N"].get<std::size_t>();
            }
        }
    }

    nlohmann::json resolved() const {
        nlohmann::json j;
        j["n"] = n;
        j["s"] = s;
        if (m_set) j["m"] = m;
        j["j_min"] = j_min;
        j["j_max"] = j_max;
        j["j"] = level;
        j["r"] = atom_radius;
        j["inputs"] = inputs;
        j["out"] = out_dir;
        j["seed"] = seed;
        j["threads"] = threads;
        j["a_max"] = a_max;
        j["n_decay"] = n_decay;
        j["trials"] = trials;
        if (grid_half_width > 0.0 || grid_points > 0)
            j["grid"] = {{"L", grid_half_width}, {"N", grid_points}};
        else
            j["grid"] = "auto";
        return j;
    }
};

// exit codes: 0 all pass, 1 usage/config error, 2 a check failed,
// 3 inconclusive fits present
int report_outcome(const std::vector<ExperimentReport>& reports, const RunConfig& cfg) {
    bool failed = false, inconclusive = false;
    fs::path out = cfg.out_dir;
    if (!out.empty()) fs::create_directories(out);
    for (const auto& rep : reports) {
        std::string stem = rep.id;
        for (auto& ch : stem)
            if (ch == ':' || ch == '/') ch = '_';
        if (!out.empty()) {
            nlohmann::json doc = rep.to_json();
            doc["config"] = cfg.resolved();
            write_json(out / (stem + ".json"), doc);
            for (const auto& s : rep.series) {
                DataSeries named = s;
                write_csv(out / (stem + "_" + s.name + ".csv"), named);
            }
        }
        for (const auto& c : rep.checks) {
            const char* verdict = c.inconclusive ? "INCONCLUSIVE" : (c.passed ? "PASS" : "FAIL");
            std::cout << verdict << " " << rep.id << "/" << c.name << " observed "
                      << format_double(c.observed) << " expected " << format_double(c.expected)
                      << " tol " << format_double(c.tolerance) << "\n";
            if (c.inconclusive)
                inconclusive = true;
            else if (!c.passed)
                failed = true;
        }
    }
    if (failed) return 2;
    if (inconclusive) return 3;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"oscillatory bilinear multiplier verification"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* env = std::getenv("OSCMULT_OUT")) cfg.out_dir = env;
    std::string config_path;

    // precedence: command line > config file > defaults. The file loads first
    // so that parsed flags overwrite its values.
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    }
    if (!config_path.empty()) {
        try {
            cfg.load_file(config_path);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }

    app.add_option("--config", config_path, "JSON config file (flags override it)");
    auto* opt_m = app.add_option("--m", cfg.m, "symbol order m");
    app.add_option("--n", cfg.n, "dimension (1 or 2)");
    app.add_option("--s", cfg.s, "phase exponent s (s > 0, s != 1)");
    app.add_option("--j-min", cfg.j_min, "lowest dyadic level");
    app.add_option("--j-max", cfg.j_max, "highest dyadic level");
    app.add_option("--j", cfg.level, "single dyadic level");
    app.add_option("--r", cfg.atom_radius, "atom radius in (0, 1]");
    app.add_option("--inputs", cfg.inputs, "convergence inputs: random | sharpness");
    app.add_option("--input", cfg.input_path, "sample container or CSV input path");
    app.add_option("--out", cfg.out_dir, "output directory for CSV/JSON reports");
    app.add_option("--seed", cfg.seed, "random seed recorded in reports");
    app.add_option("--threads", cfg.threads, "worker threads (0 = auto)");
    app.add_option("--a-max", cfg.a_max, "lattice window for symbol expansion");
    app.add_option("--n-decay", cfg.n_decay, "decay order for symbol expansion");
    app.add_option("--trials", cfg.trials, "trial count for randomized checks");
    app.add_option("--L", cfg.grid_half_width, "explicit grid half-width");
    app.add_option("--N", cfg.grid_points, "explicit points per axis");

    auto* c_order = app.add_subcommand("critical-order", "critical symbol order m_s");
    auto* c_kernel = app.add_subcommand("kernel-scan", "kernel norm growth across levels; "
                                                       "CSV columns: j,l1,l2,linf");
    auto* c_regime = app.add_subcommand("regime-check", "kernel zone statistics; CSV columns: "
                                                        "j,near_max,main_max,main_min,ratio,far_slope");
    auto* c_env = app.add_subcommand("envelope-check", "shell-decay exponents; CSV columns: "
                                                       "k,radius,max_abs per zone");
    auto* c_energy = app.add_subcommand("local-energy", "localized L2 growth; CSV columns: A,value");
    auto* c_symbol = app.add_subcommand("symbol-expand", "dyadic block expansion decay; CSV "
                                                         "columns: part,j,ell,a,b,abs_c,weighted");
    auto* c_tri = app.add_subcommand("trilinear", "trilinear form against the frequency oracle");
    auto* c_atoms = app.add_subcommand("atoms", "atomic decomposition of samples; CSV columns: "
                                                "trial,atom_count,weight_sum,l1,ratio,recon_resid");
    auto* c_sharp = app.add_subcommand("sharpness", "order-bound construction for the given s");
    auto* c_region = app.add_subcommand("region-probe", "region-resolved trilinear masses");
    auto* c_conv = app.add_subcommand("convergence", "weighted partial sums across levels");
    auto* c_all = app.add_subcommand("all", "full verification campaign at acceptance scale");
    for (auto* sc : app.get_subcommands({})) sc->fallthrough();

    CLI11_PARSE(app, argc, argv);
    if (opt_m->count() > 0) cfg.m_set = true;

    try {
        ExperimentContext ctx{cfg.seed, WorkerPool{cfg.threads}};
        std::vector<ExperimentReport> reports;

        if (*c_order) {
            const CriticalOrder mc = critical_order(cfg.n, cfg.s);
            std::cout << "m_s(" << cfg.n << ", " << format_double(cfg.s)
                      << ") = " << format_double(mc.m_s) << "\n";
            if (!cfg.out_dir.empty()) {
                fs::create_directories(cfg.out_dir);
                DataSeries ds{"critical_order", {"n", "s", "m_s"},
                              {{static_cast<double>(mc.n), mc.s, mc.m_s}}};
                write_csv(fs::path(cfg.out_dir) / "critical_order.csv", ds);
            }
            return 0;
        } else if (*c_kernel) {
            reports.push_back(kernel_scan(ctx, cfg.n, cfg.s, cfg.j_min, cfg.j_max));
        } else if (*c_regime) {
            reports.push_back(regime_check(ctx, cfg.n, cfg.s, cfg.j_min, cfg.j_max));
        } else if (*c_env) {
            double min_hw = cfg.grid_half_width;
            if (min_hw <= 0.0) min_hw = cfg.s < 1.0 ? 64.0 : (cfg.s <= 2.0 ? 4096.0 : 16384.0);
            reports.push_back(envelope_check(ctx, cfg.n, cfg.s, cfg.level, min_hw));
        } else if (*c_energy) {
            reports.push_back(local_energy(ctx, cfg.n, cfg.s, cfg.level,
                                           {0.5, 1.0, 2.0, 4.0, 8.0}));
        } else if (*c_symbol) {
            reports.push_back(symbol_expand(ctx, cfg.m_set ? cfg.m : -1.0, cfg.j_max,
                                            cfg.n_decay, cfg.a_max));
        } else if (*c_tri) {
            reports.push_back(trilinear_check(ctx, cfg.n, cfg.s, cfg.level));
        } else if (*c_atoms) {
            if (!cfg.input_path.empty()) {
                SampledFunction h = read_container(cfg.input_path);
                AtomicDecomposition dec = decompose(h);
                std::cout << "atoms " << dec.atoms.size() << " weight_sum "
                          << format_double(dec.weight_sum()) << " source_l1 "
                          << format_double(dec.source_l1) << "\n";
                return 0;
            }
            reports.push_back(atoms_check(ctx, cfg.trials));
        } else if (*c_sharp) {
            if (cfg.s < 1.0)
                reports.push_back(
                    sharpness_small_order(ctx, cfg.n, cfg.s, cfg.j_min, cfg.j_max));
            else if (cfg.s <= 2.0)
                reports.push_back(sharpness_mid_order(ctx, cfg.n, cfg.s, cfg.j_min, cfg.j_max));
            else
                reports.push_back(
                    sharpness_large_order(ctx, cfg.n, cfg.s, cfg.j_min, cfg.j_max));
        } else if (*c_region) {
            reports.push_back(
                region_probe(ctx, cfg.n, cfg.s, cfg.j_min, cfg.j_max, cfg.atom_radius));
        } else if (*c_conv) {
            const double order = cfg.m_set ? cfg.m : critical_order(cfg.n, cfg.s).m_s - 0.2;
            const ConvergenceInputs in = cfg.inputs == "sharpness"
                                             ? ConvergenceInputs::sharpness_family
                                             : ConvergenceInputs::random_bounded;
            reports.push_back(
                convergence_probe(ctx, cfg.n, cfg.s, order, in, cfg.j_min, cfg.j_max));
        } else if (*c_all) {
            reports = run_acceptance_suite(ctx);
        }

        return report_outcome(reports, cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
