#pragma once

#include "oscmult/atoms.hpp"
#include "oscmult/bilinear.hpp"
#include "oscmult/grid.hpp"
#include "oscmult/io.hpp"
#include "oscmult/oscillatory.hpp"
#include "oscmult/partition.hpp"
#include "oscmult/thread_pool.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace oscmult {

/// Critical symbol order for the triple fractional phase:
/// -ns/2 - ns(1-s) on 0 < s < 1, -ns/2 on 1 < s <= 2, -n(s-1) beyond.
struct CriticalOrder {
    int n = 1;
    double s = 0.5;
    double m_s = 0.0;
};
CriticalOrder critical_order(int n, double s);

struct CheckResult {
    std::string name;
    bool passed = false;
    bool inconclusive = false; // slope fit residual above 0.5
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ExperimentReport {
    std::string id;
    nlohmann::json parameters;
    std::vector<DataSeries> series;
    std::vector<CheckResult> checks;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;

    bool all_passed() const;
    bool any_inconclusive() const;
    nlohmann::json to_json() const;
};

struct ExperimentContext {
    std::uint64_t seed = 456789;
    WorkerPool pool{0};
};

// --- experiment runners -----------------------------------------------------

ExperimentReport kernel_scan(const ExperimentContext& ctx, int n, double s, int j_min, int j_max);
ExperimentReport regime_check(const ExperimentContext& ctx, int n, double s, int j_min, int j_max);
ExperimentReport envelope_check(const ExperimentContext& ctx, int n, double s, int level,
                                double min_half_width);
ExperimentReport local_energy(const ExperimentContext& ctx, int n, double s, int level,
                              std::vector<double> radii);
ExperimentReport symbol_expand(const ExperimentContext& ctx, double order, int level_max,
                               int n_decay, int a_max);
ExperimentReport transposition_check(const ExperimentContext& ctx, int trials);
ExperimentReport trilinear_check(const ExperimentContext& ctx, int n, double s, int level);
ExperimentReport atoms_check(const ExperimentContext& ctx, int trials);
ExperimentReport sharpness_small_order(const ExperimentContext& ctx, int n, double s, int j_min,
                                       int j_max);
ExperimentReport sharpness_mid_order(const ExperimentContext& ctx, int n, double s, int j_min,
                                     int j_max);
ExperimentReport sharpness_large_order(const ExperimentContext& ctx, int n, double s, int j_min,
                                       int j_max);
ExperimentReport region_probe(const ExperimentContext& ctx, int n, double s, int j_min, int j_max,
                              double atom_radius);
enum class ConvergenceInputs { random_bounded, sharpness_family };
ExperimentReport convergence_probe(const ExperimentContext& ctx, int n, double s, double order,
                                   ConvergenceInputs inputs, int j_min, int j_max);

/// The full verification campaign at the acceptance parameter set; one report
/// per named criterion, in a fixed order.
std::vector<ExperimentReport> run_acceptance_suite(const ExperimentContext& ctx);

// --- deterministic input builders (exposed for tests) ------------------------

/// Random +-1 block signs low-pass smoothed and renormalized to sup norm 1.
SampledFunction random_bounded_field(const GridSpec& spec, std::uint64_t seed,
                                     double block_width = 0.25);

/// Smooth nonnegative bump supported in |x| <= r with sup norm r^{-dim}.
SampledFunction positive_atom(const GridSpec& spec, double radius);

} // namespace oscmult
