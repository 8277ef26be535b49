#include "oscmult/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oscmult {

namespace {

double pow2ceil(double x) { return std::exp2(std::ceil(std::log2(x))); }

std::size_t pow2ceil_size(double x) {
    std::size_t n = 16;
    while (static_cast<double>(n) < x) n <<= 1;
    return n;
}

std::vector<ShellSample> shell_maxima(const SampledFunction& f, double r_lo, double r_hi) {
    std::vector<ShellSample> shells;
    int k = static_cast<int>(std::ceil(std::log2(r_lo) - 1e-9));
    while (std::exp2(k + 1) <= r_hi * (1.0 + 1e-12)) {
        shells.push_back({k, std::exp2(k), 0.0});
        ++k;
    }
    if (shells.empty()) return shells;
    const int k0 = shells.front().index;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = f.radius(i);
        if (r < shells.front().radius || r >= 2.0 * shells.back().radius) continue;
        const int idx = static_cast<int>(std::floor(std::log2(r))) - k0;
        if (idx < 0 || idx >= static_cast<int>(shells.size())) continue;
        shells[idx].max_abs = std::max(shells[idx].max_abs, std::abs(f[i]));
    }
    return shells;
}

ExponentFit fit_shells(const std::vector<ShellSample>& shells) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : shells)
        if (s.max_abs > 0.0) pts.emplace_back(static_cast<double>(s.index), s.max_abs);
    return fit_exponent(pts);
}

} // namespace

void PhaseSpec::validate() const {
    if (!(s > 0.0)) throw std::invalid_argument("PhaseSpec: s must be positive");
    if (std::abs(s - 1.0) < 0.05)
        throw std::invalid_argument("PhaseSpec: s must stay 0.05 away from 1");
    if (sign != 1 && sign != -1) throw std::invalid_argument("PhaseSpec: sign must be +-1");
}

RegimeConstants RegimeConstants::from_order(double s) {
    RegimeConstants r;
    const double e = std::abs(1.0 - s);
    r.a = s * std::pow(4.0, -e);
    r.b = s * std::pow(4.0, e);
    r.a_prime = s * std::pow(1.5, -e);
    r.b_prime = s * std::pow(1.5, e);
    return r;
}

double dyadic_spread_constant(const PhaseSpec& phase, const RadialBump& localizer) {
    if (phase.s < 1.0) return 0.0;
    // Stationary points of |xi|^s + x.xi reach |x| = s |xi|^{s-1}; over the
    // localizer support that is s R^{s-1} 2^{j(s-1)}. Round up to a power of 2.
    return pow2ceil(phase.s * std::pow(localizer.support_outer, phase.s - 1.0));
}

double essential_radius(const PhaseSpec& phase, const RadialBump& localizer, double dilation) {
    if (phase.s < 1.0) return 2.0;
    const double c = dyadic_spread_constant(phase, localizer);
    return 4.0 * c * std::pow(dilation, phase.s - 1.0);
}

GridSpec kernel_grid(const PhaseSpec& phase, const RadialBump& localizer, double dilation,
                     const GridPolicy& policy, int dim) {
    phase.validate();
    const double support = localizer.support_outer * dilation;
    const double half_width =
        pow2ceil(std::max(policy.min_half_width, 4.0 * essential_radius(phase, localizer, dilation)));
    const double needed = 2.0 * half_width * 1.25 * policy.oversample * support / kPi;
    const std::size_t n = pow2ceil_size(needed);
    if (n > policy.max_points)
        throw std::invalid_argument("kernel_grid: admissible grid would exceed the point budget");
    return GridSpec{dim, half_width, n};
}

void check_admissible(const GridSpec& grid, double support_radius) {
    if (grid.nyquist() < 1.25 * support_radius)
        throw std::invalid_argument(
            "grid admissibility violated: nyquist < 1.25 x frequency support radius");
}

SampledFunction synthesize_kernel(const PhaseSpec& phase, const RadialBump& localizer,
                                  double dilation, const GridSpec& grid) {
    phase.validate();
    grid.validate();
    check_admissible(grid, localizer.support_outer * dilation);
    const double s = phase.s;
    const double sg = phase.sign;
    auto symbol = SampledFunction::sample_radial(grid, Space::frequency, [&](double r) -> Complex {
        const double amp = localizer(r / dilation);
        if (amp == 0.0) return {0.0, 0.0};
        const double ph = sg * std::pow(r, s); // |0|^s evaluates to 0
        return amp * Complex{std::cos(ph), std::sin(ph)};
    });
    return inverse_transform(symbol);
}

KernelRecord compute_kernel(const PhaseSpec& phase, const RadialBump& localizer, int level,
                            const GridSpec& grid) {
    const double dilation = std::exp2(level);
    SampledFunction k = synthesize_kernel(phase, localizer, dilation, grid);
    KernelRecord rec{level, phase, localizer, std::move(k)};
    rec.l1 = norm(rec.samples, NormKind::l1);
    rec.l2 = norm(rec.samples, NormKind::l2);
    rec.linf = norm(rec.samples, NormKind::linf);
    rec.regime = RegimeConstants::from_order(phase.s);
    const double outer_l1 =
        norm(rec.samples, NormKind::l1, Region::complement_ball(grid.half_width / 2.0));
    rec.tail_fraction = rec.l1 > 0.0 ? outer_l1 / rec.l1 : 0.0;
    return rec;
}

SampledFunction apply_propagator(const PhaseSpec& phase, const std::optional<RadialBump>& localizer,
                                 double dilation, const SampledFunction& f) {
    phase.validate();
    if (f.space() != Space::physical)
        throw std::invalid_argument("apply_propagator: input must be physical-tagged");
    SampledFunction spectrum = forward_transform(f);
    // Admissibility is judged on the combined support: the multiplier output
    // lives in the localizer support intersected with the input spectrum
    // truncated at 1e-12 relative.
    {
        const double fmax = spectrum.max_abs();
        double active = 0.0;
        for (std::size_t i = 0; i < spectrum.size(); ++i)
            if (std::abs(spectrum[i]) > 1e-12 * fmax)
                active = std::max(active, spectrum.radius(i));
        double effective = active;
        if (localizer) effective = std::min(effective, localizer->support_outer * dilation);
        if (localizer || effective < f.spec().nyquist())
            check_admissible(f.spec(), effective);
    }
    const double s = phase.s;
    const double sg = phase.sign;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double r = spectrum.radius(i);
        double amp = 1.0;
        if (localizer) amp = (*localizer)(r / dilation);
        if (amp == 0.0) {
            spectrum[i] = 0.0;
            continue;
        }
        const double ph = sg * std::pow(r, s);
        spectrum[i] *= amp * Complex{std::cos(ph), std::sin(ph)};
    }
    return inverse_transform(spectrum);
}

RegimeReport verify_regimes(const KernelRecord& record) {
    if (record.localizer.is_ball())
        throw std::invalid_argument("verify_regimes: localizer must be annular");
    const double s = record.phase.s;
    const double scale = std::exp2(record.level * (1.0 - s)); // u = scale * |x|
    RegimeReport rep;
    rep.regime = record.regime;
    const double n = record.samples.spec().dim;
    rep.predicted_level = std::exp2(record.level * (n - n * s / 2.0));

    double main_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < record.samples.size(); ++i) {
        const double u = scale * record.samples.radius(i);
        const double a = std::abs(record.samples[i]);
        if (u < rep.regime.a) {
            rep.near_max = std::max(rep.near_max, a);
        } else if (u >= rep.regime.a_prime && u <= rep.regime.b_prime) {
            rep.main_max = std::max(rep.main_max, a);
            main_min = std::min(main_min, a);
            ++rep.main_samples;
        }
    }
    if (rep.main_samples < 32)
        throw std::invalid_argument(
            "verify_regimes: fewer than 32 samples across the [a', b'] annulus");
    rep.main_min = main_min;
    rep.main_ratio = rep.main_max / rep.main_min;

    // Far-zone spatial decay over dyadic shells beyond u > b.
    const double r_far = rep.regime.b / scale;
    const double L = record.samples.spec().half_width;
    if (r_far * 4.0 < L / 2.0) {
        auto shells = shell_maxima(record.samples, r_far, L / 2.0);
        std::vector<std::pair<double, double>> pts;
        for (const auto& sh : shells)
            if (sh.max_abs > 0.0) pts.emplace_back(static_cast<double>(sh.index), sh.max_abs);
        if (pts.size() >= 3) rep.far_fit = fit_exponent(pts);
    }
    return rep;
}

EnvelopeReport verify_envelopes(const KernelRecord& record) {
    if (!record.localizer.is_ball())
        throw std::invalid_argument("verify_envelopes: localizer must be ball-supported");
    const double s = record.phase.s;
    const double n = record.samples.spec().dim;
    const double L = record.samples.spec().half_width;
    const double dx = record.samples.spec().spatial_step();
    EnvelopeReport rep;

    double inner_lo, inner_hi, outer_lo, outer_hi;
    if (s < 1.0) {
        inner_lo = 32.0 * dx;
        inner_hi = 1.0;
        outer_lo = 1.0;
        outer_hi = L / 4.0;
        rep.inner_expected = -n / 2.0 - n / (2.0 * (1.0 - s));
        rep.outer_expected = -(n + s);
    } else {
        const double c = dyadic_spread_constant(record.phase, record.localizer);
        rep.calibrated_spread = c;
        const double dil = std::exp2(record.level);
        // Growth regime ends where the plateau edge's stationary image ends.
        inner_lo = 1.0;
        inner_hi = s * std::pow(record.localizer.plateau_outer * dil, s - 1.0);
        outer_lo = c * std::pow(dil, s - 1.0);
        outer_hi = L / 4.0;
        rep.inner_expected = -n / 2.0 + n / (2.0 * (s - 1.0));
        rep.outer_expected = -(n + s);
    }

    rep.inner_shells = shell_maxima(record.samples, inner_lo, inner_hi);
    rep.outer_shells = shell_maxima(record.samples, outer_lo, outer_hi);
    if (rep.inner_shells.size() < 4)
        throw std::invalid_argument("verify_envelopes: fewer than 4 shells in the inner zone");
    if (rep.outer_shells.size() < 4)
        throw std::invalid_argument("verify_envelopes: fewer than 4 shells in the outer zone");
    rep.inner = fit_shells(rep.inner_shells);
    rep.outer = fit_shells(rep.outer_shells);
    return rep;
}

NormScaling verify_norm_scaling(const PhaseSpec& phase, const RadialBump& localizer, int j_min,
                                int j_max, const GridPolicy& policy) {
    if (j_max - j_min + 1 < 5)
        throw std::invalid_argument("verify_norm_scaling: need at least 5 levels");
    NormScaling out;
    std::vector<std::pair<double, double>> l1pts, linfpts;
    for (int j = j_min; j <= j_max; ++j) {
        GridSpec grid = kernel_grid(phase, localizer, std::exp2(j), policy);
        KernelRecord rec = compute_kernel(phase, localizer, j, grid);
        out.rows.push_back({static_cast<double>(j), rec.l1, rec.l2, rec.linf});
        l1pts.emplace_back(j, rec.l1);
        linfpts.emplace_back(j, rec.linf);
    }
    out.l1_fit = fit_exponent(l1pts);
    if (phase.s < 1.0) out.linf_fit = fit_exponent(linfpts);
    return out;
}

LocalEnergyReport local_energy_probe(const PhaseSpec& phase, const RadialBump& localizer,
                                     int level, const SampledFunction& f,
                                     std::span<const double> radii) {
    const double L = f.spec().half_width;
    for (double A : radii)
        if (A > L / 2.0)
            throw std::invalid_argument("local_energy_probe: radius exceeds half the domain");
    const double fmax = f.max_abs();
    LocalEnergyReport rep;
    const double n = f.spec().dim;
    rep.expected_slope = phase.s < 1.0 ? n * (1.0 - phase.s) / 2.0 : n / 2.0;
    if (fmax == 0.0) {
        for (double A : radii) rep.rows.push_back({A, 0.0});
        return rep;
    }
    SampledFunction sf = apply_propagator(phase, localizer, std::exp2(level), f);
    std::vector<std::pair<double, double>> pts;
    for (double A : radii) {
        const double v = norm(sf, NormKind::l2, Region::ball(A)) / fmax;
        rep.rows.push_back({A, v});
        if (v > 0.0) pts.emplace_back(std::log2(A), v);
    }
    if (pts.size() >= 3) rep.fit = fit_exponent(pts);
    return rep;
}

int calibrate_stabilization_level(std::span<const std::pair<int, double>> level_ratios) {
    if (level_ratios.empty()) return -1;
    const double top = level_ratios.back().second;
    int j0 = level_ratios.back().first;
    for (auto it = level_ratios.rbegin(); it != level_ratios.rend(); ++it) {
        const double q = it->second / top;
        if (q > 2.0 || q < 0.5) break;
        j0 = it->first;
    }
    return j0;
}

} // namespace oscmult
