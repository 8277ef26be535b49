#include "oscmult/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace oscmult {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

enum class Sense { two_sided, at_most, at_least };

CheckResult slope_check(std::string name, const ExponentFit& fit, double expected, double tol,
                        Sense sense) {
    CheckResult c;
    c.name = std::move(name);
    c.observed = fit.slope;
    c.expected = expected;
    c.tolerance = tol;
    c.inconclusive = fit.residual > 0.5;
    switch (sense) {
        case Sense::two_sided: c.passed = std::abs(fit.slope - expected) <= tol; break;
        case Sense::at_most: c.passed = fit.slope <= expected + tol; break;
        case Sense::at_least: c.passed = fit.slope >= expected - tol; break;
    }
    c.detail = "slope " + format_double(fit.slope) + " residual " + format_double(fit.residual);
    return c;
}

CheckResult value_check(std::string name, double observed, double expected, double tol,
                        Sense sense) {
    CheckResult c;
    c.name = std::move(name);
    c.observed = observed;
    c.expected = expected;
    c.tolerance = tol;
    switch (sense) {
        case Sense::two_sided: c.passed = std::abs(observed - expected) <= tol; break;
        case Sense::at_most: c.passed = observed <= expected + tol; break;
        case Sense::at_least: c.passed = observed >= expected - tol; break;
    }
    return c;
}

CheckResult flag_check(std::string name, bool ok, std::string detail = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.passed = ok;
    c.observed = ok ? 1.0 : 0.0;
    c.expected = 1.0;
    c.detail = std::move(detail);
    return c;
}

const RadialBump& unit_ball_bump() {
    static const RadialBump b = make_ball(1.0, 2.0);
    return b;
}

GridSpec simple_grid(int dim, double half_width, double max_freq, std::size_t min_points = 16) {
    std::size_t n = std::max<std::size_t>(min_points, 16);
    const double needed = 2.0 * half_width * 1.25 * max_freq / kPi;
    while (static_cast<double>(n) < needed) n <<= 1;
    return GridSpec{dim, half_width, n};
}

} // namespace

CriticalOrder critical_order(int n, double s) {
    if (n != 1 && n != 2) throw std::invalid_argument("critical_order: n must be 1 or 2");
    PhaseSpec{s, +1}.validate();
    CriticalOrder c;
    c.n = n;
    c.s = s;
    if (s < 1.0)
        c.m_s = -n * s / 2.0 - n * s * (1.0 - s);
    else if (s <= 2.0)
        c.m_s = -n * s / 2.0;
    else
        c.m_s = -n * (s - 1.0);
    return c;
}

bool ExperimentReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

bool ExperimentReport::any_inconclusive() const {
    for (const auto& c : checks)
        if (c.inconclusive) return true;
    return false;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j;
    j["id"] = id;
    j["parameters"] = parameters;
    j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json cj;
        cj["name"] = c.name;
        cj["passed"] = c.passed;
        cj["inconclusive"] = c.inconclusive;
        cj["observed"] = c.observed;
        cj["expected"] = c.expected;
        cj["tolerance"] = c.tolerance;
        cj["detail"] = c.detail;
        j["checks"].push_back(std::move(cj));
    }
    j["series"] = nlohmann::json::array();
    for (const auto& s : series) {
        nlohmann::json sj;
        sj["name"] = s.name;
        sj["columns"] = s.columns;
        sj["rows"] = s.rows;
        j["series"].push_back(std::move(sj));
    }
    return j;
}

SampledFunction random_bounded_field(const GridSpec& spec, std::uint64_t seed,
                                     double block_width) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coin(0, 1);
    const std::size_t n = spec.points_per_axis;
    const double L = spec.half_width;
    const auto blocks =
        static_cast<std::size_t>(std::max(2.0, std::ceil(2.0 * L / block_width)));
    std::vector<double> signs(spec.dim == 1 ? blocks : blocks * blocks);
    for (auto& v : signs) v = coin(rng) ? 1.0 : -1.0;

    SampledFunction f(spec, Space::physical);
    auto block_of = [&](double x) {
        return std::min(blocks - 1,
                        static_cast<std::size_t>((x + L) / (2.0 * L) * static_cast<double>(blocks)));
    };
    if (spec.dim == 1) {
        for (std::size_t i = 0; i < n; ++i)
            f[i] = signs[block_of(spec.coordinate(i, Space::physical))];
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                f[i * n + j] = signs[block_of(spec.coordinate(i, Space::physical)) * blocks +
                                     block_of(spec.coordinate(j, Space::physical))];
    }
    // low-pass at a quarter of the band, then renormalize the sup
    SampledFunction F = forward_transform(f);
    const double cutoff = 0.25 * spec.nyquist();
    for (std::size_t i = 0; i < F.size(); ++i) {
        const double r = F.radius(i) / cutoff;
        F[i] *= std::exp(-r * r);
    }
    SampledFunction smooth = inverse_transform(F);
    const double m = smooth.max_abs();
    for (std::size_t i = 0; i < smooth.size(); ++i) smooth[i] /= m;
    return smooth;
}

SampledFunction positive_atom(const GridSpec& spec, double radius) {
    if (!(radius > 0.0 && radius <= 1.0))
        throw std::invalid_argument("positive_atom: radius must lie in (0, 1]");
    const RadialBump profile = make_ball(0.5, 1.0);
    const double height = std::pow(radius, -spec.dim);
    return SampledFunction::sample_radial(spec, Space::physical, [&](double r) -> Complex {
        return height * profile(r / radius);
    });
}

// --- kernel scan -------------------------------------------------------------

ExperimentReport kernel_scan(const ExperimentContext& ctx, int n, double s, int j_min,
                             int j_max) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "kernel-scan";
    rep.seed = ctx.seed;
    rep.parameters = {{"n", n}, {"s", s}, {"j_min", j_min}, {"j_max", j_max}};
    const PhaseSpec phase{s, +1};
    const RadialBump& loc = unit_ball_bump();

    const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
    std::vector<std::array<double, 4>> rows(count);
    ctx.pool.map_indexed(count, [&](std::size_t i) {
        const int j = j_min + static_cast<int>(i);
        GridSpec grid = kernel_grid(phase, loc, std::exp2(j), GridPolicy{}, n);
        KernelRecord rec = compute_kernel(phase, loc, j, grid);
        rows[i] = {static_cast<double>(j), rec.l1, rec.l2, rec.linf};
    });

    DataSeries ds{"kernel_norms", {"j", "l1", "l2", "linf"}, {}};
    std::vector<std::pair<double, double>> l1pts, linfpts;
    for (const auto& r : rows) {
        ds.rows.push_back({r[0], r[1], r[2], r[3]});
        l1pts.emplace_back(r[0], r[1]);
        linfpts.emplace_back(r[0], r[3]);
    }
    rep.series.push_back(std::move(ds));

    const ExponentFit l1fit = fit_exponent(l1pts);
    rep.checks.push_back(
        slope_check("l1-growth", l1fit, n * s / 2.0, 0.15, Sense::two_sided));
    if (s < 1.0) {
        const ExponentFit linffit = fit_exponent(linfpts);
        rep.checks.push_back(
            slope_check("linf-growth", linffit, n - n * s / 2.0, 0.15, Sense::two_sided));
    }
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- regime check ------------------------------------------------------------

ExperimentReport regime_check(const ExperimentContext& ctx, int n, double s, int j_min,
                              int j_max) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "regime-check";
    rep.seed = ctx.seed;
    rep.parameters = {{"n", n}, {"s", s}, {"j_min", j_min}, {"j_max", j_max}};
    const PhaseSpec phase{s, +1};
    const RadialBump loc = make_localizer(LocalizerKind::psi_narrow);
    const RegimeConstants regime = RegimeConstants::from_order(s);

    const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
    std::vector<RegimeReport> reports(count);
    ctx.pool.map_indexed(count, [&](std::size_t i) {
        const int j = j_min + static_cast<int>(i);
        // enough resolution to put ~48 samples across the [a', b'] annulus
        const double width =
            (regime.b_prime - regime.a_prime) * std::exp2(-j * (1.0 - s));
        GridPolicy policy;
        GridSpec base = kernel_grid(phase, loc, std::exp2(j), policy, n);
        std::size_t npts = base.points_per_axis;
        while (2.0 * base.half_width / static_cast<double>(npts) > width / 24.0) npts <<= 1;
        GridSpec grid{n, base.half_width, npts};
        KernelRecord rec = compute_kernel(phase, loc, j, grid);
        reports[i] = verify_regimes(rec);
    });

    DataSeries ds{"regimes", {"j", "near_max", "main_max", "main_min", "ratio", "far_slope"}, {}};
    std::vector<std::pair<double, double>> levels;
    std::vector<std::pair<int, double>> ratios;
    for (std::size_t i = 0; i < count; ++i) {
        const int j = j_min + static_cast<int>(i);
        const auto& r = reports[i];
        ds.rows.push_back({static_cast<double>(j), r.near_max, r.main_max, r.main_min,
                           r.main_ratio, r.far_fit.slope});
        ratios.emplace_back(j, r.main_ratio);
    }
    rep.series.push_back(ds);

    const int j0 = calibrate_stabilization_level(ratios);
    rep.parameters["calibrated_j0"] = j0;
    for (std::size_t i = 0; i < count; ++i) {
        const int j = j_min + static_cast<int>(i);
        if (j >= j0) levels.emplace_back(static_cast<double>(j), reports[i].main_max);
    }

    // top four levels: ratio should be j-stable within a factor 2
    double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
    const std::size_t top = std::min<std::size_t>(4, count);
    for (std::size_t i = count - top; i < count; ++i) {
        rmax = std::max(rmax, reports[i].main_ratio);
        rmin = std::min(rmin, reports[i].main_ratio);
    }
    rep.checks.push_back(value_check("main-ratio-stability", rmax / rmin, 2.0, 0.0,
                                     Sense::at_most));
    if (levels.size() >= 3) {
        rep.checks.push_back(slope_check("main-level-growth", fit_exponent(levels),
                                         n - n * s / 2.0, 0.15, Sense::two_sided));
    }
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- envelope check ----------------------------------------------------------

ExperimentReport envelope_check(const ExperimentContext& ctx, int n, double s, int level,
                                double min_half_width) {
    (void)ctx;
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "envelope-check";
    rep.seed = ctx.seed;
    rep.parameters = {{"n", n}, {"s", s}, {"j", level}, {"min_half_width", min_half_width}};
    const PhaseSpec phase{s, +1};
    const RadialBump& loc = unit_ball_bump();

    GridPolicy policy;
    policy.min_half_width = min_half_width;
    GridSpec grid = kernel_grid(phase, loc, std::exp2(level), policy, n);
    KernelRecord rec = compute_kernel(phase, loc, level, grid);
    EnvelopeReport env = verify_envelopes(rec);

    DataSeries inner{"inner_shells", {"k", "radius", "max_abs"}, {}};
    for (const auto& sh : env.inner_shells)
        inner.rows.push_back({static_cast<double>(sh.index), sh.radius, sh.max_abs});
    DataSeries outer{"outer_shells", {"k", "radius", "max_abs"}, {}};
    for (const auto& sh : env.outer_shells)
        outer.rows.push_back({static_cast<double>(sh.index), sh.radius, sh.max_abs});
    rep.series.push_back(std::move(inner));
    rep.series.push_back(std::move(outer));
    rep.parameters["calibrated_spread_constant"] = env.calibrated_spread;
    rep.parameters["grid_N"] = grid.points_per_axis;
    rep.parameters["grid_L"] = grid.half_width;

    rep.checks.push_back(
        slope_check("inner-envelope", env.inner, env.inner_expected, 0.2, Sense::two_sided));
    rep.checks.push_back(
        slope_check("outer-envelope", env.outer, env.outer_expected, 0.2, Sense::two_sided));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- local energy ------------------------------------------------------------

ExperimentReport local_energy(const ExperimentContext& ctx, int n, double s, int level,
                              std::vector<double> radii) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "local-energy";
    rep.seed = derive_seed(ctx.seed, "local-energy");
    rep.parameters = {{"n", n}, {"s", s}, {"j", level}, {"radii", radii}};
    const PhaseSpec phase{s, +1};
    const RadialBump& loc = unit_ball_bump();

    const double max_radius = *std::max_element(radii.begin(), radii.end());
    const double L = std::max(32.0, 2.0 * max_radius);
    GridSpec grid = simple_grid(n, L, 2.0 * std::exp2(level));
    SampledFunction f = random_bounded_field(grid, rep.seed);

    LocalEnergyReport probe = local_energy_probe(phase, loc, level, f, radii);
    DataSeries ds{"local_energy", {"A", "value"}, {}};
    for (const auto& row : probe.rows) ds.rows.push_back({row.radius, row.value});
    rep.series.push_back(std::move(ds));
    rep.checks.push_back(
        slope_check("local-energy-slope", probe.fit, probe.expected_slope, 0.15, Sense::at_most));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- symbol expansion ---------------------------------------------------------

ExperimentReport symbol_expand(const ExperimentContext& ctx, double order, int level_max,
                               int n_decay, int a_max) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "symbol-expand";
    rep.seed = derive_seed(ctx.seed, "symbol-expand");
    rep.parameters = {
        {"order", order}, {"level_max", level_max}, {"n_decay", n_decay}, {"a_max", a_max}};

    BilinearSymbol sigma = BilinearSymbol::scalar(
        [order](double xi, double eta) -> Complex {
            return std::pow(1.0 + xi * xi + eta * eta, order / 2.0);
        },
        order, 8);

    SymbolDecomposition dec = decompose_symbol(sigma, level_max, n_decay, a_max);

    // weighted coefficient table and per-window sups
    DataSeries ds{"decay", {"part", "j", "ell", "a", "b", "abs_c", "weighted"}, {}};
    double sup_small = 0.0, sup_full = 0.0;
    std::vector<std::pair<double, double>> level_sup;
    const int small_window = a_max / 2;
    for (const auto& blk : dec.blocks) {
        const int per = 2 * blk.a_max + 1;
        double blk_sup = 0.0;
        for (int a = -blk.a_max; a <= blk.a_max; ++a) {
            for (int b = -blk.a_max; b <= blk.a_max; ++b) {
                const int ai[1] = {a}, bi[1] = {b};
                const Complex c = blk.coeff(std::span<const int>(ai, 1),
                                            std::span<const int>(bi, 1));
                const double w = std::abs(c) * std::exp2(-blk.level * order) *
                                 std::pow(1.0 + std::abs(a), n_decay) *
                                 std::pow(1.0 + std::abs(b), n_decay);
                if (std::abs(a) <= small_window && std::abs(b) <= small_window)
                    sup_small = std::max(sup_small, w);
                sup_full = std::max(sup_full, w);
                blk_sup = std::max(blk_sup, w);
                if (std::abs(c) > 1e-14)
                    ds.rows.push_back({static_cast<double>(blk.part),
                                       static_cast<double>(blk.level),
                                       static_cast<double>(blk.offset), static_cast<double>(a),
                                       static_cast<double>(b), std::abs(c), w});
            }
        }
        (void)per;
    }
    {
        // per-level sup across parts for the j-stability check
        std::map<int, double> by_level;
        for (const auto& row : ds.rows) {
            const int j = static_cast<int>(row[1]);
            by_level[j] = std::max(by_level[j], row[6]);
        }
        for (const auto& [j, v] : by_level) level_sup.emplace_back(static_cast<double>(j), v);
    }
    rep.series.push_back(std::move(ds));
    rep.parameters["fitted_decay_constant"] = dec.fitted_decay_constant;
    rep.parameters["tail_bound"] = dec.tail_bound;

    double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
    for (const auto& [j, v] : level_sup) {
        if (j < 3) continue; // part-2 low levels carry the origin block
        lmax = std::max(lmax, v);
        lmin = std::min(lmin, v);
    }
    rep.checks.push_back(
        value_check("decay-sup-level-stability", lmax / lmin, 1.0, 1.0, Sense::at_most));
    rep.checks.push_back(
        value_check("decay-sup-window-stability", sup_full / sup_small, 1.0, 1.0,
                    Sense::at_most));

    // reconstruction at deterministic sample points against the direct value
    std::mt19937_64 rng(rep.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const PartitionOfUnity pou;
    double worst_resid = 0.0, worst_allow = 0.0;
    bool recon_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const double rad = std::exp2(unif(rng) * (level_max - 2)); // within covered scales
        const double xi = rad * (unif(rng) > 0 ? 1.0 : -1.0);
        const double eta = rad * unif(rng);
        Complex series{0.0, 0.0};
        double allow = 0.0;
        for (const auto& blk : dec.blocks) {
            const double dxi = blk.dilation_xi();
            const double deta = blk.dilation_eta();
            double mxi, meta;
            if (blk.part == 1) {
                mxi = pou.psi_level(blk.level, std::abs(xi));
                meta = pou.phi_level(blk.level - 3, std::abs(eta));
            } else if (blk.part == 2) {
                mxi = pou.psi_level(blk.level, std::abs(xi));
                meta = pou.psi_level(blk.level - blk.offset, std::abs(eta));
            } else {
                mxi = pou.phi_level(blk.level - 3, std::abs(xi));
                meta = pou.psi_level(blk.level, std::abs(eta));
            }
            if (mxi == 0.0 || meta == 0.0) continue;
            allow += dec.tail_bound * std::exp2(blk.level * order);
            Complex acc{0.0, 0.0};
            for (int a = -blk.a_max; a <= blk.a_max; ++a) {
                for (int b = -blk.a_max; b <= blk.a_max; ++b) {
                    const int ai[1] = {a}, bi[1] = {b};
                    const Complex c =
                        blk.coeff(std::span<const int>(ai, 1), std::span<const int>(bi, 1));
                    const double ph = a * xi / dxi + b * eta / deta;
                    acc += c * Complex{std::cos(ph), std::sin(ph)};
                }
            }
            series += acc * (mxi * meta);
        }
        // direct value times the included coverage
        double coverage = 0.0;
        for (int j = 0; j <= level_max; ++j) {
            for (int k = 0; k <= level_max; ++k) {
                const bool in_part1 = (j - k >= 3) && j >= 3;
                const bool in_part2 = std::abs(j - k) <= 2;
                const bool in_part3 = (k - j >= 3) && k >= 3;
                if (!(in_part1 || in_part2 || in_part3)) continue;
                coverage += pou.psi_level(j, std::abs(xi)) * pou.psi_level(k, std::abs(eta));
            }
        }
        const Complex direct = sigma.at(xi, eta) * coverage;
        const double resid = std::abs(series - direct);
        if (resid > worst_resid) {
            worst_resid = resid;
            worst_allow = allow;
        }
        if (resid > allow + 1e-12) recon_ok = false;
    }
    {
        CheckResult c = flag_check("reconstruction-within-tail-bound", recon_ok);
        c.observed = worst_resid;
        c.expected = worst_allow;
        c.detail = "worst residual " + format_double(worst_resid) + " allowed " +
                   format_double(worst_allow);
        rep.checks.push_back(std::move(c));
    }
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- transposition pairing ----------------------------------------------------

ExperimentReport transposition_check(const ExperimentContext& ctx, int trials) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "trilinear-transposition";
    rep.seed = derive_seed(ctx.seed, "transposition");
    rep.parameters = {{"trials", trials}};

    const GridSpec spec{1, 16.0, 512};
    std::mt19937_64 rng(rep.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    BilinearSymbol sigma = BilinearSymbol::scalar(
        [](double xi, double eta) -> Complex {
            return std::pow(1.0 + xi * xi + eta * eta, -0.5);
        },
        -1.0, 8);
    BilinearSymbol star1 = transpose_symbol(sigma, Transposition::star1);

    auto band_limited = [&](int width) {
        SampledFunction F(spec, Space::frequency);
        const std::size_t c = spec.points_per_axis / 2;
        for (int k = -width; k <= width; ++k)
            F[c + k] = Complex{gauss(rng), gauss(rng)};
        return inverse_transform(F);
    };

    DataSeries ds{"pairing", {"trial", "lhs_re", "lhs_im", "rel_err"}, {}};
    double worst = 0.0;
    const double cell = spec.spatial_step();
    for (int t = 0; t < trials; ++t) {
        SampledFunction f = band_limited(20);
        SampledFunction g = band_limited(20);
        SampledFunction h = band_limited(20);
        SampledFunction Tfg = apply_bilinear(sigma, f, g);
        SampledFunction Thg = apply_bilinear(star1, h, g);
        Complex lhs{0.0, 0.0}, rhs{0.0, 0.0};
        for (std::size_t i = 0; i < Tfg.size(); ++i) {
            lhs += Tfg[i] * h[i];
            rhs += Thg[i] * f[i];
        }
        lhs *= cell;
        rhs *= cell;
        const double rel = std::abs(lhs - rhs) / std::max(1e-300, std::abs(lhs));
        worst = std::max(worst, rel);
        ds.rows.push_back({static_cast<double>(t), lhs.real(), lhs.imag(), rel});
    }
    rep.series.push_back(std::move(ds));
    rep.checks.push_back(value_check("pairing-identity", worst, 0.0, 1e-8, Sense::at_most));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- trilinear oracle check ----------------------------------------------------

ExperimentReport trilinear_check(const ExperimentContext& ctx, int n, double s, int level) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "trilinear";
    rep.seed = derive_seed(ctx.seed, "trilinear");
    rep.parameters = {{"n", n}, {"s", s}, {"j", level}};
    const PhaseSpec phase{s, +1};
    const RadialBump theta1 = unit_ball_bump();
    const RadialBump theta2 = unit_ball_bump();
    const RadialBump theta3 = make_ball(4.4, 5.5);

    GridSpec grid = simple_grid(n, 16.0, 5.5 * std::exp2(level), 1u << 9);
    std::mt19937_64 rng(rep.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto band_limited = [&](int width) {
        SampledFunction F(grid, Space::frequency);
        const std::size_t c = grid.points_per_axis / 2;
        for (int k = -width; k <= width; ++k) F[c + k] = Complex{gauss(rng), gauss(rng)};
        return inverse_transform(F);
    };
    SampledFunction f = band_limited(24);
    SampledFunction g = band_limited(24);
    SampledFunction h = band_limited(24);

    TrilinearResult res = trilinear_form(phase, theta1, theta2, theta3, level, f, g, h);

    // frequency-domain oracle: (2 pi)^{-2n} sum sigma(xi,eta) fhat ghat hhat(-xi-eta)
    SampledFunction F = forward_transform(f);
    SampledFunction G = forward_transform(g);
    SampledFunction H = forward_transform(h);
    const std::size_t N = grid.points_per_axis;
    const std::size_t c = N / 2;
    const double dxi = grid.frequency_step();
    Complex oracle{0.0, 0.0};
    const double dil = std::exp2(level);
    for (std::size_t k = 0; k < N; ++k) {
        if (std::abs(F[k]) < 1e-13) continue;
        const double xi = grid.coordinate(k, Space::frequency);
        for (std::size_t l = 0; l < N; ++l) {
            if (std::abs(G[l]) < 1e-13) continue;
            const double eta = grid.coordinate(l, Space::frequency);
            const std::ptrdiff_t msum = static_cast<std::ptrdiff_t>(c) -
                                        (static_cast<std::ptrdiff_t>(k) +
                                         static_cast<std::ptrdiff_t>(l) -
                                         static_cast<std::ptrdiff_t>(c));
            if (msum < 0 || msum >= static_cast<std::ptrdiff_t>(N)) continue;
            const double zr = std::hypot(xi + eta, 0.0);
            const double ph = std::pow(std::abs(xi), s) + std::pow(std::abs(eta), s) +
                              std::pow(zr, s);
            const Complex osc{std::cos(ph), std::sin(ph)};
            oracle += osc * theta1(std::abs(xi) / dil) * theta2(std::abs(eta) / dil) *
                      theta3(zr / dil) * F[k] * G[l] * H[static_cast<std::size_t>(msum)];
        }
    }
    oracle *= dxi * dxi / std::pow(2.0 * kPi, 2);

    const double rel = std::abs(res.value - oracle) / std::max(1e-300, std::abs(oracle));
    DataSeries ds{"trilinear", {"j", "value_re", "value_im", "oracle_re", "oracle_im", "rel"}, {}};
    ds.rows.push_back({static_cast<double>(level), res.value.real(), res.value.imag(),
                       oracle.real(), oracle.imag(), rel});
    rep.series.push_back(std::move(ds));
    rep.checks.push_back(value_check("frequency-oracle-agreement", rel, 0.0, 1e-6,
                                     Sense::at_most));
    rep.checks.push_back(flag_check("value-within-product-norm",
                                    std::abs(res.value) <= res.l1_product_norm * (1.0 + 1e-12)));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- atoms --------------------------------------------------------------------

ExperimentReport atoms_check(const ExperimentContext& ctx, int trials) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "atoms";
    rep.seed = derive_seed(ctx.seed, "atoms");
    rep.parameters = {{"trials", trials}};

    const GridSpec spec{1, 16.0, 1u << 12};
    std::mt19937_64 rng(rep.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    DataSeries ds{"atoms", {"trial", "atom_count", "weight_sum", "l1", "ratio", "recon_resid"}, {}};
    bool ok_recon = true, ok_bounds = true, ok_valid = true;
    for (int t = 0; t < trials; ++t) {
        SampledFunction F(spec, Space::frequency);
        const std::size_t c = spec.points_per_axis / 2;
        for (int k = -10; k <= 10; ++k) F[c + k] = Complex{gauss(rng), gauss(rng)};
        SampledFunction h = inverse_transform(F);

        AtomicDecomposition dec = decompose(h);
        SampledFunction recon = dec.reconstruct();
        double resid = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
            resid = std::max(resid, std::abs(recon[i] - h[i]));
        const double rel_resid = resid / h.max_abs();
        const double lam = dec.weight_sum();
        const double l1 = dec.source_l1;
        const double ratio = lam / l1;
        if (rel_resid > 1e-10) ok_recon = false;
        if (!(0.99 * l1 <= lam && lam <= 4.04 * l1)) ok_bounds = false;
        for (const auto& atom : dec.atoms)
            if (!validate_atom(atom).ok) ok_valid = false;
        ds.rows.push_back({static_cast<double>(t), static_cast<double>(dec.atoms.size()), lam, l1,
                           ratio, rel_resid});
    }
    rep.series.push_back(std::move(ds));
    rep.checks.push_back(flag_check("exact-reconstruction", ok_recon));
    rep.checks.push_back(flag_check("weight-sum-two-sided", ok_bounds));
    rep.checks.push_back(flag_check("atoms-validate", ok_valid));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- sharpness, s < 1 -----------------------------------------------------------

ExperimentReport sharpness_small_order(const ExperimentContext& ctx, int n, double s, int j_min,
                                       int j_max) {
    const auto t0 = Clock::now();
    if (!(s > 0.0 && s <= 0.95))
        throw std::invalid_argument("sharpness_small_order: requires 0 < s <= 0.95");
    ExperimentReport rep;
    rep.id = "sharpness-s-lt-1";
    rep.seed = ctx.seed;
    rep.parameters = {{"n", n}, {"s", s}, {"j_min", j_min}, {"j_max", j_max}};
    const RadialBump narrow = make_localizer(LocalizerKind::psi_narrow);
    const double ms = critical_order(n, s).m_s;

    const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
    struct Row {
        double q, f_inf, g_l1, plateau_dev;
    };
    std::vector<Row> rows(count);
    ctx.pool.map_indexed(count, [&](std::size_t i) {
        const int j = j_min + static_cast<int>(i);
        const double lam = std::exp2(j * (1.0 - s)); // dilation of the slow family
        const double dil = std::exp2(j);
        GridSpec grid = simple_grid(n, 16.0, 2.0 * dil * 1.0, 1u << 14);
        const PhaseSpec minus{s, -1};
        const PhaseSpec plus{s, +1};

        SampledFunction Fj = synthesize_kernel(minus, narrow, lam, grid);
        // G carries no phase: plain localizer spectrum at scale 2^j
        SampledFunction Gj = inverse_transform(SampledFunction::sample_radial(
            grid, Space::frequency, [&](double r) -> Complex { return narrow(r / dil); }));

        // phase-cancelled factor: e^{i|D|^s} phi(2^{-j} D) F_j = (psi(xi/lam))^vee
        const RadialBump phi_loc = make_localizer(LocalizerKind::phi_ball);
        SampledFunction eF = apply_propagator(plus, phi_loc, dil, Fj);
        SampledFunction eF_expected = inverse_transform(SampledFunction::sample_radial(
            grid, Space::frequency, [&](double r) -> Complex { return narrow(r / lam); }));
        double dev = 0.0, ref = 0.0;
        for (std::size_t m = 0; m < eF.size(); ++m) {
            dev += std::norm(eF[m] - eF_expected[m]);
            ref += std::norm(eF_expected[m]);
        }
        const double plateau_dev = std::sqrt(dev / std::max(1e-300, ref));

        const RadialBump theta_loc = make_localizer(LocalizerKind::theta_annular);
        SampledFunction eG = apply_propagator(plus, theta_loc, dil, Gj);
        SampledFunction bare = apply_propagator(plus, std::nullopt, 1.0, Fj);

        const double cell = std::pow(grid.spatial_step(), grid.dim);
        double l1 = 0.0;
        for (std::size_t m = 0; m < eF.size(); ++m)
            l1 += std::abs(bare[m]) * std::abs(eF[m]) * std::abs(eG[m]);
        l1 *= cell;
        const double f_inf = Fj.max_abs();
        const double g_l1 = norm(Gj, NormKind::l1);
        rows[i] = {l1 / (f_inf * f_inf * std::max(1.0, g_l1)), f_inf, g_l1, plateau_dev};
    });

    DataSeries ds{"sharpness", {"j", "Q", "F_inf", "G_l1", "plateau_dev"}, {}};
    std::vector<std::pair<double, double>> qpts, fpts;
    double worst_dev = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const int j = j_min + static_cast<int>(i);
        ds.rows.push_back({static_cast<double>(j), rows[i].q, rows[i].f_inf, rows[i].g_l1,
                           rows[i].plateau_dev});
        qpts.emplace_back(j, rows[i].q);
        fpts.emplace_back(j, rows[i].f_inf);
        worst_dev = std::max(worst_dev, rows[i].plateau_dev);
    }
    rep.series.push_back(std::move(ds));

    const ExponentFit qfit = fit_exponent(qpts);
    rep.parameters["implied_order_bound"] = -qfit.slope;
    rep.parameters["critical_order"] = ms;
    rep.checks.push_back(slope_check("normalized-growth", qfit, -ms, 0.2, Sense::at_least));
    rep.checks.push_back(
        value_check("plateau-identity", worst_dev, 0.0, 1e-8, Sense::at_most));
    rep.checks.push_back(slope_check("slow-family-sup-growth", fit_exponent(fpts),
                                     (1.0 - s) * (n - n * s / 2.0), 0.15, Sense::at_most));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- sharpness, 1 < s <= 2 ------------------------------------------------------

namespace {

double bump_pair_quadrature(const RadialBump& p1, const RadialBump& p2, const RadialBump& p3,
                            int samples) {
    // iint p1(|xi+eta|) p2(|xi|) p3(|eta|) over the support box, midpoint rule
    const double xb = p2.support_outer;
    const double eb = p3.support_outer;
    const double dx = 2.0 * xb / samples;
    const double de = 2.0 * eb / (2 * samples);
    double acc = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double xi = -xb + (i + 0.5) * dx;
        const double v2 = p2(std::abs(xi));
        if (v2 == 0.0) continue;
        double inner = 0.0;
        for (int k = 0; k < 2 * samples; ++k) {
            const double eta = -eb + (k + 0.5) * de;
            inner += p1(std::abs(xi + eta)) * p3(std::abs(eta));
        }
        acc += v2 * inner * de;
    }
    return acc * dx;
}

} // namespace

ExperimentReport sharpness_mid_order(const ExperimentContext& ctx, int n, double s, int j_min,
                                     int j_max) {
    const auto t0 = Clock::now();
    if (!(s >= 1.05 && s <= 2.0))
        throw std::invalid_argument("sharpness_mid_order: requires 1.05 <= s <= 2");
    ExperimentReport rep;
    rep.id = "sharpness-1-lt-s-le-2";
    rep.seed = ctx.seed;
    rep.parameters = {{"n", n}, {"s", s}, {"j_min", j_min}, {"j_max", j_max}};
    const PhaseSpec plus{s, +1};
    const PhaseSpec minus{s, -1};
    const double ms = critical_order(n, s).m_s;

    const RadialBump psi1 = make_annulus(0.125, 0.25, 4.0, 8.0);
    const RadialBump psi2 = make_annulus(0.5, 2.0 / 3.0, 1.5, 2.0);
    const RadialBump psi3 = make_annulus(0.25, 0.5, 2.0, 4.0);
    const RadialBump theta = make_localizer(LocalizerKind::theta_annular);
    const RadialBump phi = make_localizer(LocalizerKind::phi_ball);

    const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
    struct Row {
        double value, f1, f2, f3;
    };
    std::vector<Row> rows(count);
    ctx.pool.map_indexed(count, [&](std::size_t i) {
        const int j = j_min + static_cast<int>(i);
        const double dil = std::exp2(j);

        // trilinear value on a moderate grid; the phase cancels exactly
        GridSpec vgrid = simple_grid(n, 128.0, 8.0 * dil, 1u << 14);
        SampledFunction F1 = synthesize_kernel(minus, psi1, dil, vgrid);
        SampledFunction F2 = synthesize_kernel(minus, psi2, dil, vgrid);
        SampledFunction F3 = synthesize_kernel(minus, psi3, dil, vgrid);
        TrilinearResult tri =
            trilinear_form(plus, theta, phi, std::nullopt, j, F1, F2, F3);

        // sup / L1 measurements need fully resolved kernels
        GridPolicy policy;
        GridSpec g1 = kernel_grid(minus, psi1, dil, policy, n);
        GridSpec g2 = kernel_grid(minus, psi2, dil, policy, n);
        GridSpec g3 = kernel_grid(minus, psi3, dil, policy, n);
        const double f1 = synthesize_kernel(minus, psi1, dil, g1).max_abs();
        const double f2 = synthesize_kernel(minus, psi2, dil, g2).max_abs();
        const double f3 = norm(synthesize_kernel(minus, psi3, dil, g3), NormKind::l1);
        rows[i] = {std::abs(tri.value), f1, f2, f3};
    });

    DataSeries ds{"sharpness", {"j", "value", "F1_inf", "F2_inf", "F3_l1"}, {}};
    std::vector<std::pair<double, double>> vpts, f1pts, f2pts, f3pts;
    for (std::size_t i = 0; i < count; ++i) {
        const int j = j_min + static_cast<int>(i);
        ds.rows.push_back({static_cast<double>(j), rows[i].value, rows[i].f1, rows[i].f2,
                           rows[i].f3});
        vpts.emplace_back(j, rows[i].value);
        f1pts.emplace_back(j, rows[i].f1);
        f2pts.emplace_back(j, rows[i].f2);
        f3pts.emplace_back(j, rows[i].f3);
    }
    rep.series.push_back(std::move(ds));

    // frequency-side quadrature oracle at the two lowest levels
    const double base = bump_pair_quadrature(psi1, psi2, psi3, 4096);
    double worst_oracle = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, count); ++i) {
        const int j = j_min + static_cast<int>(i);
        const double oracle =
            base * std::exp2(2.0 * n * j) / std::pow(2.0 * kPi, 2 * n);
        const double rel = std::abs(rows[i].value - oracle) / oracle;
        worst_oracle = std::max(worst_oracle, rel);
    }
    rep.checks.push_back(
        value_check("frequency-quadrature-agreement", worst_oracle, 0.0, 1e-6, Sense::at_most));

    const ExponentFit f1fit = fit_exponent(f1pts);
    const ExponentFit f2fit = fit_exponent(f2pts);
    const ExponentFit f3fit = fit_exponent(f3pts);
    const ExponentFit vfit = fit_exponent(vpts);
    rep.checks.push_back(
        slope_check("fast-family-sup-1", f1fit, n - n * s / 2.0, 0.15, Sense::two_sided));
    rep.checks.push_back(
        slope_check("fast-family-sup-2", f2fit, n - n * s / 2.0, 0.15, Sense::two_sided));
    rep.checks.push_back(
        slope_check("third-family-l1", f3fit, n * s / 2.0, 0.15, Sense::two_sided));
    const double implied = f1fit.slope + f2fit.slope + f3fit.slope - vfit.slope;
    rep.parameters["implied_order_bound"] = implied;
    rep.parameters["critical_order"] = ms;
    rep.checks.push_back(
        value_check("implied-order-bound", implied, ms, 0.2, Sense::two_sided));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- sharpness, s > 2 ------------------------------------------------------------

ExperimentReport sharpness_large_order(const ExperimentContext& ctx, int n, double s, int j_min,
                                       int j_max) {
    const auto t0 = Clock::now();
    if (!(s > 2.0))
        throw std::invalid_argument("sharpness_large_order: requires s > 2");
    ExperimentReport rep;
    rep.id = "sharpness-s-gt-2";
    rep.seed = ctx.seed;
    rep.parameters = {{"n", n}, {"s", s}, {"j_min", j_min}, {"j_max", j_max}};
    const PhaseSpec plus{s, +1};
    const PhaseSpec minus{s, -1};
    const double ms = critical_order(n, s).m_s;

    // construction grid: scale psi so |psi_vee| >= 1 near 0, build phi with a
    // nonnegative inverse transform by squaring a real bump transform
    const GridSpec cgrid{n, 64.0, 1u << 14};
    const RadialBump psi_raw = make_annulus(0.5, 0.75, 1.5, 2.0);
    const RadialBump beta = make_ball(2.0, 4.0);

    SampledFunction psi_vee = inverse_transform(SampledFunction::sample_radial(
        cgrid, Space::frequency, [&](double r) -> Complex { return psi_raw(r); }));
    const std::size_t center = cgrid.size() / 2;
    const double scale_psi = 2.0 / psi_vee[center].real();

    SampledFunction beta_vee = inverse_transform(SampledFunction::sample_radial(
        cgrid, Space::frequency, [&](double r) -> Complex { return beta(r); }));
    SampledFunction phi_vee(cgrid, Space::physical);
    for (std::size_t i = 0; i < phi_vee.size(); ++i) {
        const double b = beta_vee[i].real();
        phi_vee[i] = b * b;
    }
    const double scale_phi = 2.0 / phi_vee[center].real();
    for (std::size_t i = 0; i < phi_vee.size(); ++i) phi_vee[i] *= scale_phi;
    SampledFunction phi_freq = forward_transform(phi_vee); // supp within 8 < 10

    auto plateau_radius = [&](const SampledFunction& v) {
        std::size_t d = 0;
        while (center + d + 1 < v.size() && std::abs(v[center + d + 1]) >= 1.0 &&
               std::abs(v[center - d - 1]) >= 1.0)
            ++d;
        return static_cast<double>(d) * v.spec().spatial_step();
    };
    SampledFunction psi_vee_scaled = psi_vee;
    for (std::size_t i = 0; i < psi_vee_scaled.size(); ++i) psi_vee_scaled[i] *= scale_psi;
    const double delta_psi = plateau_radius(psi_vee_scaled);
    const double delta_phi = plateau_radius(phi_vee);
    const double delta = std::min(delta_psi, delta_phi);
    if (!(delta > 0.0))
        throw std::runtime_error("sharpness_large_order: unit plateau of the inverse transforms "
                                 "not achieved");
    const double lower_coeff = std::pow(2.0 * delta, n); // A in the bound A 2^{jm} 2^{jn}
    rep.parameters["delta"] = delta;
    rep.parameters["lower_coefficient"] = lower_coeff;

    const RadialBump theta = make_localizer(LocalizerKind::theta_annular);
    const RadialBump phi_loc = make_localizer(LocalizerKind::phi_ball);

    const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
    struct Row {
        double value, f_inf;
    };
    std::vector<Row> rows(count);
    ctx.pool.map_indexed(count, [&](std::size_t i) {
        const int j = j_min + static_cast<int>(i);
        const double dil = std::exp2(j);

        // value on a moderate grid; h = (e^{-i|xi|^s} phi(xi))^vee with phi
        // rebuilt on this grid by the same squared-transform construction
        GridSpec vgrid = simple_grid(n, 64.0, std::max(2.0 * dil, 8.0) * 1.0, 1u << 12);
        SampledFunction F = synthesize_kernel(minus, psi_raw, dil, vgrid);
        for (std::size_t m = 0; m < F.size(); ++m) F[m] *= scale_psi;

        SampledFunction beta_v = inverse_transform(SampledFunction::sample_radial(
            vgrid, Space::frequency, [&](double r) -> Complex { return beta(r); }));
        SampledFunction phi_v(vgrid, Space::physical);
        for (std::size_t m = 0; m < phi_v.size(); ++m) {
            const double b = beta_v[m].real();
            phi_v[m] = scale_phi * b * b;
        }
        SampledFunction h_freq = forward_transform(phi_v);
        for (std::size_t m = 0; m < h_freq.size(); ++m) {
            const double r = h_freq.radius(m);
            const double ph = -std::pow(r, s);
            h_freq[m] *= Complex{std::cos(ph), std::sin(ph)};
        }
        SampledFunction h = inverse_transform(h_freq);

        SampledFunction u = apply_propagator(plus, theta, dil, F);
        SampledFunction v = apply_propagator(plus, phi_loc, dil, F);
        SampledFunction w = apply_propagator(plus, std::nullopt, 1.0, h);
        Complex acc{0.0, 0.0};
        for (std::size_t m = 0; m < u.size(); ++m) acc += u[m] * v[m] * w[m];
        const double value = std::abs(acc) * std::pow(vgrid.spatial_step(), n);

        GridPolicy policy;
        GridSpec big = kernel_grid(minus, psi_raw, dil, policy, n);
        SampledFunction Fbig = synthesize_kernel(minus, psi_raw, dil, big);
        rows[i] = {value, Fbig.max_abs() * scale_psi};
    });

    DataSeries ds{"sharpness", {"j", "value", "lower_bound", "F_inf"}, {}};
    std::vector<std::pair<double, double>> vpts, fpts;
    bool lower_ok = true;
    for (std::size_t i = 0; i < count; ++i) {
        const int j = j_min + static_cast<int>(i);
        const double lower = lower_coeff * std::exp2(n * j);
        if (rows[i].value < lower) lower_ok = false;
        ds.rows.push_back({static_cast<double>(j), rows[i].value, lower, rows[i].f_inf});
        vpts.emplace_back(j, rows[i].value);
        fpts.emplace_back(j, rows[i].f_inf);
    }
    rep.series.push_back(std::move(ds));

    const ExponentFit vfit = fit_exponent(vpts);
    const ExponentFit ffit = fit_exponent(fpts);
    const double implied = 2.0 * ffit.slope - vfit.slope;
    rep.parameters["implied_order_bound"] = implied;
    rep.parameters["critical_order"] = ms;
    rep.checks.push_back(flag_check("trilinear-lower-bound", lower_ok));
    rep.checks.push_back(
        value_check("implied-order-bound", implied, ms, 0.25, Sense::at_most));
    rep.checks.push_back(
        slope_check("fast-family-sup", ffit, n - n * s / 2.0, 0.15, Sense::two_sided));
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- region probe ------------------------------------------------------------

ExperimentReport region_probe(const ExperimentContext& ctx, int n, double s, int j_min, int j_max,
                              double atom_radius) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "region-probe";
    rep.seed = derive_seed(ctx.seed, "region-probe");
    rep.parameters = {
        {"n", n}, {"s", s}, {"j_min", j_min}, {"j_max", j_max}, {"r", atom_radius}};
    const PhaseSpec phase{s, +1};
    const RadialBump theta1 = unit_ball_bump();
    const RadialBump theta3 = make_ball(4.4, 5.5);
    const double ms = critical_order(n, s).m_s;

    if (s < 1.0) {
        const double L = 32.0;
        const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
        std::vector<std::array<double, 3>> vals(count);
        ctx.pool.map_indexed(count, [&](std::size_t i) {
            const int j = j_min + static_cast<int>(i);
            GridSpec grid = simple_grid(n, L, 5.5 * std::exp2(j));
            SampledFunction f = random_bounded_field(grid, derive_seed(rep.seed, "f"));
            SampledFunction g = random_bounded_field(grid, derive_seed(rep.seed, "g"));
            SampledFunction h = positive_atom(grid, atom_radius);
            const Region regions[3] = {Region::ball(2.0 * atom_radius),
                                       Region::annulus(2.0 * atom_radius, 4.0),
                                       Region::complement_ball(4.0)};
            TrilinearResult tri = trilinear_form(phase, theta1, theta1, theta3, j, f, g, h,
                                                 std::span<const Region>(regions, 3));
            vals[i] = {tri.regional[0].second, tri.regional[1].second, tri.regional[2].second};
        });
        DataSeries ds{"regions",
                      {"j", "near_raw", "mid_raw", "far_raw", "near_norm", "mid_norm",
                       "far_norm"},
                      {}};
        std::vector<std::pair<double, double>> p1, p2, p3;
        for (std::size_t i = 0; i < count; ++i) {
            const int j = j_min + static_cast<int>(i);
            const double n1 = vals[i][0] * std::exp2(j * ms);
            const double n2 = vals[i][1] * std::exp2(j * ms);
            const double n3 = vals[i][2] / std::exp2(j * n * s / 2.0);
            ds.rows.push_back({static_cast<double>(j), vals[i][0], vals[i][1], vals[i][2], n1,
                               n2, n3});
            if (n1 > 0) p1.emplace_back(j, n1);
            if (n2 > 0) p2.emplace_back(j, n2);
            if (n3 > 0) p3.emplace_back(j, n3);
        }
        rep.series.push_back(std::move(ds));
        rep.checks.push_back(
            slope_check("near-region-bounded", fit_exponent(p1), 0.0, 0.15, Sense::at_most));
        rep.checks.push_back(
            slope_check("mid-region-bounded", fit_exponent(p2), 0.0, 0.15, Sense::at_most));
        rep.checks.push_back(
            slope_check("far-region-bounded", fit_exponent(p3), 0.0, 0.15, Sense::at_most));
    } else {
        const double spread = dyadic_spread_constant(phase, theta1);
        const double L = 8192.0;
        const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
        std::vector<double> aj_norm(count);
        std::vector<std::vector<std::pair<double, double>>> shell_pts(count);
        ctx.pool.map_indexed(count, [&](std::size_t i) {
            const int j = j_min + static_cast<int>(i);
            GridSpec grid = simple_grid(n, L, 5.5 * std::exp2(j));
            SampledFunction f = random_bounded_field(grid, derive_seed(rep.seed, "f"));
            SampledFunction g = random_bounded_field(grid, derive_seed(rep.seed, "g"));
            SampledFunction h = positive_atom(grid, atom_radius);
            const double crit = spread * std::exp2(j * (s - 1.0) + 2.0);
            std::vector<Region> regions{Region::ball(crit)};
            const int k_lo =
                static_cast<int>(std::ceil(std::log2(spread) + j * (s - 1.0) + 1.0));
            const int k_hi = static_cast<int>(std::floor(std::log2(L))) - 1;
            for (int k = k_lo; k <= k_hi; ++k) regions.push_back(Region::shell(k));
            TrilinearResult tri = trilinear_form(phase, theta1, theta1, theta3, j, f, g, h,
                                                 regions);
            aj_norm[i] = tri.regional[0].second * std::exp2(j * ms);
            for (std::size_t q = 1; q < tri.regional.size(); ++q) {
                const double v = tri.regional[q].second;
                if (v > 0)
                    shell_pts[i].emplace_back(static_cast<double>(k_lo) + (q - 1.0), v);
            }
        });
        DataSeries ds{"regions", {"j", "core_norm", "shell_slope"}, {}};
        std::vector<std::pair<double, double>> corepts;
        bool shells_ok = true;
        double worst_shell_slope = -1e9;
        for (std::size_t i = 0; i < count; ++i) {
            const int j = j_min + static_cast<int>(i);
            double shell_slope = 0.0;
            if (shell_pts[i].size() >= 3) {
                const ExponentFit fit = fit_exponent(shell_pts[i]);
                shell_slope = fit.slope;
                worst_shell_slope = std::max(worst_shell_slope, fit.slope);
                if (fit.slope > -s + 0.2) shells_ok = false;
            }
            ds.rows.push_back({static_cast<double>(j), aj_norm[i], shell_slope});
            if (aj_norm[i] > 0) corepts.emplace_back(j, aj_norm[i]);
        }
        rep.series.push_back(std::move(ds));
        rep.checks.push_back(
            slope_check("core-region-bounded", fit_exponent(corepts), 0.0, 0.15,
                        Sense::at_most));
        CheckResult sc = flag_check("shell-decay", shells_ok);
        sc.observed = worst_shell_slope;
        sc.expected = -s;
        sc.tolerance = 0.2;
        rep.checks.push_back(std::move(sc));
    }
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- convergence probe -----------------------------------------------------------

ExperimentReport convergence_probe(const ExperimentContext& ctx, int n, double s, double order,
                                   ConvergenceInputs inputs, int j_min, int j_max) {
    const auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "convergence";
    rep.seed = derive_seed(ctx.seed, "convergence");
    rep.parameters = {{"n", n},
                      {"s", s},
                      {"m", order},
                      {"j_min", j_min},
                      {"j_max", j_max},
                      {"inputs", inputs == ConvergenceInputs::random_bounded ? "random"
                                                                             : "sharpness"}};
    const PhaseSpec phase{s, +1};
    const double ms = critical_order(n, s).m_s;
    rep.parameters["critical_order"] = ms;

    const std::size_t count = static_cast<std::size_t>(j_max - j_min + 1);
    std::vector<double> terms(count);

    if (inputs == ConvergenceInputs::random_bounded) {
        const RadialBump theta1 = unit_ball_bump();
        const RadialBump theta3 = make_ball(4.4, 5.5);
        ctx.pool.map_indexed(count, [&](std::size_t i) {
            const int j = j_min + static_cast<int>(i);
            GridSpec grid = simple_grid(n, 32.0, 5.5 * std::exp2(j));
            SampledFunction f = random_bounded_field(grid, derive_seed(rep.seed, "f"));
            SampledFunction g = random_bounded_field(grid, derive_seed(rep.seed, "g"));
            SampledFunction h = positive_atom(grid, 0.25);
            TrilinearResult tri =
                trilinear_form(phase, theta1, theta1, theta3, j, f, g, h);
            terms[i] = std::exp2(j * order) * tri.l1_product_norm;
        });
    } else {
        // normalized terms of the slow-family construction (s < 1 inputs)
        ExperimentContext sub{ctx.seed, WorkerPool{ctx.pool.thread_count()}};
        ExperimentReport sharp = sharpness_small_order(sub, n, s, j_min, j_max);
        const auto& rows = sharp.series.front().rows;
        for (std::size_t i = 0; i < count; ++i)
            terms[i] = std::exp2((j_min + static_cast<int>(i)) * order) * rows[i][1];
    }

    DataSeries ds{"terms", {"j", "term", "partial_sum", "ratio"}, {}};
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        sum += terms[i];
        const double ratio = i > 0 ? terms[i] / terms[i - 1] : 0.0;
        ds.rows.push_back({static_cast<double>(j_min + static_cast<int>(i)), terms[i], sum,
                           ratio});
    }
    rep.series.push_back(std::move(ds));

    if (order <= ms - 0.1) {
        const double r1 = terms[count - 1] / terms[count - 2];
        const double r2 = terms[count - 2] / terms[count - 3];
        rep.checks.push_back(
            value_check("tail-ratio-decay", std::max(r1, r2), 0.9, 0.0, Sense::at_most));
    } else if (order >= ms + 0.1) {
        const bool growing = terms[count - 1] > terms[count - 2] &&
                             terms[count - 2] > terms[count - 3];
        rep.checks.push_back(flag_check("term-growth", growing));
    }
    rep.wall_seconds = seconds_since(t0);
    return rep;
}

// --- acceptance suite --------------------------------------------------------

std::vector<ExperimentReport> run_acceptance_suite(const ExperimentContext& ctx) {
    std::vector<ExperimentReport> out;
    auto add = [&](ExperimentReport rep, const std::string& criterion) {
        rep.parameters["criterion"] = criterion;
        rep.id = criterion + ":" + rep.id;
        out.push_back(std::move(rep));
    };
    auto keep_only = [](ExperimentReport rep, const std::string& check) {
        std::erase_if(rep.checks, [&](const CheckResult& c) { return c.name != check; });
        return rep;
    };

    add(keep_only(kernel_scan(ctx, 1, 0.5, 4, 12), "l1-growth"), "c01a");
    add(keep_only(kernel_scan(ctx, 1, 1.5, 4, 10), "l1-growth"), "c01b");
    add(keep_only(kernel_scan(ctx, 1, 0.5, 4, 12), "linf-growth"), "c02");
    add(regime_check(ctx, 1, 0.5, 8, 15), "c03a");
    add(regime_check(ctx, 1, 2.0, 4, 8), "c03b");
    add(envelope_check(ctx, 1, 0.5, 14, 64.0), "c04a");
    add(envelope_check(ctx, 1, 1.5, 8, 4096.0), "c04b");
    add(envelope_check(ctx, 1, 3.0, 2, 16384.0), "c04c");
    add(local_energy(ctx, 1, 0.5, 8, {0.5, 1.0, 2.0, 4.0, 8.0}), "c05");
    add(symbol_expand(ctx, -1.0, 8, 4, 16), "c06");
    add(transposition_check(ctx, 20), "c07");
    add(atoms_check(ctx, 10), "c08");
    add(sharpness_small_order(ctx, 1, 0.5, 6, 11), "c09");
    add(sharpness_mid_order(ctx, 1, 1.5, 4, 8), "c10");
    add(sharpness_large_order(ctx, 1, 3.0, 1, 5), "c11");
    {
        const double ms = critical_order(1, 0.5).m_s;
        add(convergence_probe(ctx, 1, 0.5, ms - 0.2, ConvergenceInputs::random_bounded, 4, 11),
            "c12a");
        add(convergence_probe(ctx, 1, 0.5, ms + 0.5, ConvergenceInputs::sharpness_family, 6, 11),
            "c12b");
    }
    return out;
}

} // namespace oscmult
