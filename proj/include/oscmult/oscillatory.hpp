#pragma once

#include "oscmult/grid.hpp"
#include "oscmult/partition.hpp"

#include <optional>
#include <vector>

namespace oscmult {

/// Fractional phase |xi|^s with sign +-1; s away from the degenerate s = 1.
struct PhaseSpec {
    double s = 0.5;
    int sign = +1;
    void validate() const; // s > 0, |s-1| >= 0.05, sign in {-1, +1}
};

/// Zone constants of the dyadic kernel in the rescaled variable
/// u = 2^{j(1-s)} |x|: rapid decay for u < a, two-sided level on
/// [a_prime, b_prime], rapid spatial decay for u > b.
struct RegimeConstants {
    double a = 0.0;
    double b = 0.0;
    double a_prime = 0.0;
    double b_prime = 0.0;
    int j0 = -1; // calibrated stabilization level; -1 when not yet calibrated

    static RegimeConstants from_order(double s);
};

/// Sampled kernel (e^{i sign |xi|^s} theta(2^{-j} xi))^vee with its norms.
struct KernelRecord {
    int level = 0;
    PhaseSpec phase;
    RadialBump localizer;
    SampledFunction samples; // physical space
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
    RegimeConstants regime;
    double tail_fraction = 0.0; // share of the L1 mass in {|x| > L/2}
};

/// Sizing rules for kernels and propagator applications. A scaled localizer
/// supported in {|xi| <= R 2^j} needs nyquist >= 1.25 R 2^j; the half-width
/// must cover four times the essential support radius (2 for s < 1,
/// C 2^{j(s-1)+2} for s > 1 with C the dyadic spread constant).
struct GridPolicy {
    double min_half_width = 16.0;
    std::size_t max_points = std::size_t{1} << 24;
    double oversample = 1.0; // extra factor on the frequency margin
};

double dyadic_spread_constant(const PhaseSpec& phase, const RadialBump& localizer);
double essential_radius(const PhaseSpec& phase, const RadialBump& localizer, double dilation);
GridSpec kernel_grid(const PhaseSpec& phase, const RadialBump& localizer, double dilation,
                     const GridPolicy& policy = {}, int dim = 1);
void check_admissible(const GridSpec& grid, double support_radius);

/// (e^{i sign |xi|^s} theta(xi / dilation))^vee on the given grid.
SampledFunction synthesize_kernel(const PhaseSpec& phase, const RadialBump& localizer,
                                  double dilation, const GridSpec& grid);

KernelRecord compute_kernel(const PhaseSpec& phase, const RadialBump& localizer, int level,
                            const GridSpec& grid);

/// e^{i sign |D|^s} theta(D / dilation) f. Pass an empty localizer to apply
/// the bare phase multiplier.
SampledFunction apply_propagator(const PhaseSpec& phase, const std::optional<RadialBump>& localizer,
                                 double dilation, const SampledFunction& f);

struct ShellSample {
    int index = 0;      // shell {2^k <= |x| < 2^{k+1}}
    double radius = 0.0; // 2^k
    double max_abs = 0.0;
};

struct RegimeReport {
    RegimeConstants regime;
    double near_max = 0.0;   // sup |K| on {u < a}
    double main_max = 0.0;   // sup |K| on [a', b']
    double main_min = 0.0;   // inf |K| on [a', b']
    double main_ratio = 0.0;
    std::size_t main_samples = 0;
    ExponentFit far_fit;     // spatial decay exponent beyond u > b
    double predicted_level = 0.0; // 2^{j(n - ns/2)}
};

/// Zone statistics of one annular-localizer kernel. Requires the localizer to
/// be annular (plateau away from 0) and the grid fine enough to put at least
/// 32 samples across the [a', b'] annulus.
RegimeReport verify_regimes(const KernelRecord& record);

struct EnvelopeReport {
    double calibrated_spread = 0.0; // dyadic C (s > 1 only, else 0)
    ExponentFit inner;
    ExponentFit outer;
    double inner_expected = 0.0;
    double outer_expected = 0.0;
    std::vector<ShellSample> inner_shells;
    std::vector<ShellSample> outer_shells;
};

/// Shell-decay exponents of a ball-localizer kernel. For s < 1 the inner fit
/// runs over (32 dx, 1] and the outer over (1, L/4]. For s > 1 the inner fit
/// runs up to the stationary image of the plateau edge, the outer from the
/// calibrated dyadic spread radius to L/4. Fewer than four shells in a zone is
/// an error.
EnvelopeReport verify_envelopes(const KernelRecord& record);

/// Fit of log2 ||K_j||_{L1} against j (and L-infinity for s < 1) over a level
/// range; each level is sized by the grid policy.
struct NormScaling {
    ExponentFit l1_fit;
    std::optional<ExponentFit> linf_fit;
    std::vector<std::array<double, 4>> rows; // j, l1, l2, linf
};
NormScaling verify_norm_scaling(const PhaseSpec& phase, const RadialBump& localizer, int j_min,
                                int j_max, const GridPolicy& policy = {});

struct LocalEnergyRow {
    double radius = 0.0;
    double value = 0.0; // ||S_j f||_{L2(|x| <= A)} / ||f||_inf
};
struct LocalEnergyReport {
    std::vector<LocalEnergyRow> rows;
    ExponentFit fit;          // slope of value against log2 A
    double expected_slope = 0.0;
};

/// Localized L2 growth of the propagated field over a list of ball radii.
LocalEnergyReport local_energy_probe(const PhaseSpec& phase, const RadialBump& localizer,
                                     int level, const SampledFunction& f,
                                     std::span<const double> radii);

/// Smallest level from which the main-zone max/min ratio stays within a
/// factor 2 of the top-level ratio.
int calibrate_stabilization_level(std::span<const std::pair<int, double>> level_ratios);

} // namespace oscmult
