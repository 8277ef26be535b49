#include "oscmult/bilinear.hpp"
#include "oscmult/detail/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oscmult {

namespace {

const PartitionOfUnity& pou() {
    static const PartitionOfUnity p;
    return p;
}

// Fattened cutoffs for the per-block Fourier series: equal to 1 on the slot's
// support, supported strictly inside the period box (-pi, pi). The annular
// cutoff keeps clear of the origin, where the rescaled symbol derivatives
// degrade.
const RadialBump& series_cutoff_annular() {
    static const RadialBump b = make_annulus(0.25, 0.5, 2.0, 3.10);
    return b;
}
const RadialBump& series_cutoff_ball() {
    static const RadialBump b = make_ball(2.0, 3.10);
    return b;
}

struct SlotSpec {
    bool ball = false;  // ball slot carries varphi-type localization
    int level = 0;      // dyadic scale of the slot
    double dilation() const { return std::exp2(level); }
    double multiplier(double r) const {
        return ball ? pou().phi_level(level, r) : pou().psi_level(level, r);
    }
    double cutoff(double rescaled) const {
        // psi_0 == phi, so level 0 annular slots fall back to the ball cutoff
        const bool annular = !ball && level > 0;
        return annular ? series_cutoff_annular()(rescaled) : series_cutoff_ball()(rescaled);
    }
};

SlotSpec xi_slot(const SymbolBlock& blk) {
    switch (blk.part) {
        case 1: return {false, blk.level};
        case 2: return {false, blk.level};
        default: return {true, blk.level - 3};
    }
}

SlotSpec eta_slot(const SymbolBlock& blk) {
    switch (blk.part) {
        case 1: return {true, blk.level - 3};
        case 2: return {false, blk.level - blk.offset};
        default: return {false, blk.level};
    }
}

std::size_t window_count(int a_max, int dim) {
    const std::size_t w = static_cast<std::size_t>(2 * a_max + 1);
    return dim == 1 ? w : w * w;
}

// flattened index of a lattice vector with entries in [-a_max, a_max]
std::size_t lattice_index(std::span<const int> a, int a_max) {
    const std::size_t w = static_cast<std::size_t>(2 * a_max + 1);
    std::size_t idx = 0;
    for (int c : a) idx = idx * w + static_cast<std::size_t>(c + a_max);
    return idx;
}

double lattice_norm(std::span<const int> a) {
    double acc = 0.0;
    for (int c : a) acc += static_cast<double>(c) * c;
    return std::sqrt(acc);
}

} // namespace

BilinearSymbol::BilinearSymbol(int dim, Eval eval, double declared_order, int derivative_budget)
    : dim_(dim), eval_(std::move(eval)), declared_order_(declared_order),
      derivative_budget_(derivative_budget) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("BilinearSymbol: dim must be 1 or 2");
    if (derivative_budget < 0 || derivative_budget > 8)
        throw std::invalid_argument("BilinearSymbol: derivative budget must be in [0, 8]");
}

BilinearSymbol BilinearSymbol::scalar(std::function<Complex(double, double)> eval,
                                      double declared_order, int derivative_budget) {
    auto wrapped = [eval = std::move(eval)](std::span<const double> xi,
                                            std::span<const double> eta) {
        return eval(xi[0], eta[0]);
    };
    return BilinearSymbol(1, std::move(wrapped), declared_order, derivative_budget);
}

Complex BilinearSymbol::operator()(std::span<const double> xi, std::span<const double> eta) const {
    return eval_(xi, eta);
}

Complex BilinearSymbol::at(double xi, double eta) const {
    if (dim_ != 1) throw std::invalid_argument("BilinearSymbol::at is for dim 1");
    const double x[1] = {xi}, e[1] = {eta};
    return eval_(std::span<const double>(x, 1), std::span<const double>(e, 1));
}

double symbol_class_constant(const BilinearSymbol& symbol, int max_order, int max_scale) {
    if (max_order > symbol.derivative_budget())
        throw std::invalid_argument("symbol_class_constant: order exceeds derivative budget");
    const int d = symbol.dim();
    const int vars = 2 * d;
    const double m = symbol.declared_order();

    // deterministic sample directions per scale
    std::vector<std::vector<double>> points;
    for (int t = 0; t <= max_scale; ++t) {
        const double r = std::exp2(t);
        if (d == 1) {
            points.push_back({r, 0.1 * r});
            points.push_back({0.1 * r, r});
            points.push_back({0.7 * r, -0.7 * r});
        } else {
            points.push_back({r, 0.0, 0.1 * r, 0.05 * r});
            points.push_back({0.1 * r, 0.05 * r, r, 0.0});
            points.push_back({0.5 * r, 0.5 * r, -0.5 * r, 0.5 * r});
        }
    }

    // multi-indices of total order <= max_order over `vars` variables
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur(vars, 0);
    std::function<void(int, int)> gen = [&](int pos, int left) {
        if (pos == vars) {
            alphas.push_back(cur);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            cur[pos] = k;
            gen(pos + 1, left - k);
        }
        cur[pos] = 0;
    };
    gen(0, max_order);

    double worst = 0.0;
    std::vector<double> base(vars), shifted(vars);
    for (const auto& p : points) {
        double size = 1.0;
        {
            double rx = 0, re = 0;
            for (int i = 0; i < d; ++i) rx += p[i] * p[i];
            for (int i = 0; i < d; ++i) re += p[d + i] * p[d + i];
            size = 1.0 + std::sqrt(rx) + std::sqrt(re);
        }
        const double h = 0.02 * size;
        for (const auto& alpha : alphas) {
            const int total = std::accumulate(alpha.begin(), alpha.end(), 0);
            // tensor binomial difference
            std::vector<int> t(vars, 0);
            double acc_re = 0.0, acc_im = 0.0;
            std::function<void(int, double)> walk = [&](int pos, double coeff) {
                if (pos == vars) {
                    for (int i = 0; i < vars; ++i)
                        shifted[i] = p[i] + (t[i] - alpha[i] / 2.0) * h;
                    const Complex v = symbol(std::span<const double>(shifted.data(), d),
                                             std::span<const double>(shifted.data() + d, d));
                    acc_re += coeff * v.real();
                    acc_im += coeff * v.imag();
                    return;
                }
                double binom = 1.0;
                for (int k = 0; k <= alpha[pos]; ++k) {
                    const double sign = ((alpha[pos] - k) & 1) ? -1.0 : 1.0;
                    t[pos] = k;
                    walk(pos + 1, coeff * sign * binom);
                    binom = binom * (alpha[pos] - k) / (k + 1);
                }
                t[pos] = 0;
            };
            walk(0, 1.0);
            const double deriv = std::abs(Complex(acc_re, acc_im)) / std::pow(h, total);
            const double scale = std::pow(size, m - total);
            worst = std::max(worst, deriv / scale);
        }
    }
    return worst;
}

BilinearSymbol transpose_symbol(const BilinearSymbol& symbol, Transposition which) {
    const int d = symbol.dim();
    auto eval = [symbol, which, d](std::span<const double> xi,
                                   std::span<const double> eta) -> Complex {
        double a[2], b[2];
        if (which == Transposition::star1) {
            for (int i = 0; i < d; ++i) {
                a[i] = -xi[i] - eta[i];
                b[i] = eta[i];
            }
        } else {
            for (int i = 0; i < d; ++i) {
                a[i] = xi[i];
                b[i] = -xi[i] - eta[i];
            }
        }
        return symbol(std::span<const double>(a, d), std::span<const double>(b, d));
    };
    return BilinearSymbol(d, std::move(eval), symbol.declared_order(),
                          symbol.derivative_budget());
}

double SymbolBlock::dilation_xi() const {
    switch (part) {
        case 1: return std::exp2(level);
        case 2: return std::exp2(level);
        default: return std::exp2(level - 3);
    }
}

double SymbolBlock::dilation_eta() const {
    switch (part) {
        case 1: return std::exp2(level - 3);
        case 2: return std::exp2(level - offset);
        default: return std::exp2(level);
    }
}

Complex SymbolBlock::coeff(std::span<const int> a, std::span<const int> b) const {
    const std::size_t w = window_count(a_max, dim);
    return coeffs[lattice_index(a, a_max) * w + lattice_index(b, a_max)];
}

namespace {

// Fourier coefficients of W over the box [-pi, pi)^{2 dim}: one multi-d DFT,
// recentred so index a carries e^{i a u}.
std::vector<Complex> box_coefficients(const SymbolBlock& blk, const BilinearSymbol& symbol,
                                      std::size_t samples_per_axis) {
    const int d = blk.dim;
    const std::size_t M = samples_per_axis;
    const SlotSpec sx = xi_slot(blk);
    const SlotSpec se = eta_slot(blk);
    const double dil_xi = blk.dilation_xi();
    const double dil_eta = blk.dilation_eta();

    const int rank = 2 * d;
    std::size_t total = 1;
    for (int i = 0; i < rank; ++i) total *= M;
    std::vector<Complex> w(total);

    std::vector<double> ax(M);
    for (std::size_t i = 0; i < M; ++i)
        ax[i] = -kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(M);

    std::vector<std::size_t> idx(rank, 0);
    std::vector<double> u(d), v(d), xi(d), eta(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int i = rank - 1; i >= 0; --i) {
            idx[i] = rem % M;
            rem /= M;
        }
        double ru = 0, rv = 0;
        for (int i = 0; i < d; ++i) {
            u[i] = ax[idx[i]];
            v[i] = ax[idx[d + i]];
            ru += u[i] * u[i];
            rv += v[i] * v[i];
        }
        ru = std::sqrt(ru);
        rv = std::sqrt(rv);
        const double amp = sx.cutoff(ru) * se.cutoff(rv);
        if (amp == 0.0) {
            w[flat] = 0.0;
            continue;
        }
        for (int i = 0; i < d; ++i) {
            xi[i] = dil_xi * u[i];
            eta[i] = dil_eta * v[i];
        }
        w[flat] = amp * symbol(xi, eta);
    }

    std::vector<std::size_t> dims(rank, M);
    detail::dft(w.data(), dims, -1);

    const std::size_t win = window_count(blk.a_max, d);
    std::vector<Complex> out(win * win);
    const double scale = 1.0 / static_cast<double>(total);

    std::vector<int> a(d), b(d);
    const std::size_t wAll = win * win;
    for (std::size_t flat = 0; flat < wAll; ++flat) {
        std::size_t rem = flat;
        const std::size_t wb = win;
        const std::size_t bi = rem % wb;
        const std::size_t aif = rem / wb;
        // unpack lattice vectors
        std::size_t ra = aif, rb = bi;
        const std::size_t per = static_cast<std::size_t>(2 * blk.a_max + 1);
        for (int i = d - 1; i >= 0; --i) {
            a[i] = static_cast<int>(ra % per) - blk.a_max;
            ra /= per;
            b[i] = static_cast<int>(rb % per) - blk.a_max;
            rb /= per;
        }
        // c(a,b) = M^{-rank} sum W e^{-i a.u} e^{-i b.v}; u starts at -pi so a
        // parity factor recentres each axis.
        double par = 1.0;
        std::size_t src = 0;
        for (int i = 0; i < d; ++i) {
            const int k = a[i];
            src = src * M + static_cast<std::size_t>((k % static_cast<int>(M) + M) % M);
            if (k & 1) par = -par;
        }
        for (int i = 0; i < d; ++i) {
            const int k = b[i];
            src = src * M + static_cast<std::size_t>((k % static_cast<int>(M) + M) % M);
            if (k & 1) par = -par;
        }
        out[flat] = par * scale * w[src];
    }
    return out;
}

double one_dim_window_sum(int n_decay) {
    double s = 0.0;
    for (int a = -4096; a <= 4096; ++a) s += std::pow(1.0 + std::abs(a), -n_decay);
    s += 2.0 * std::pow(4097.0, 1.0 - n_decay) / (n_decay - 1.0);
    return s;
}

double one_dim_tail_sum(int a_max, int n_decay) {
    double s = 0.0;
    for (int a = a_max + 1; a <= 4096; ++a) s += 2.0 * std::pow(1.0 + a, -n_decay);
    s += 2.0 * std::pow(4097.0, 1.0 - n_decay) / (n_decay - 1.0);
    return s;
}

} // namespace

nlohmann::json SymbolDecomposition::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["declared_order"] = declared_order;
    j["level_max"] = level_max;
    j["n_decay"] = n_decay;
    j["a_max"] = a_max;
    j["fitted_decay_constant"] = fitted_decay_constant;
    j["tail_bound"] = tail_bound;
    j["blocks"] = nlohmann::json::array();
    for (const auto& blk : blocks) {
        nlohmann::json b;
        b["part"] = blk.part;
        b["level"] = blk.level;
        b["offset"] = blk.offset;
        b["a_max"] = blk.a_max;
        b["dim"] = blk.dim;
        b["period_xi"] = 2.0 * kPi * blk.dilation_xi();
        b["period_eta"] = 2.0 * kPi * blk.dilation_eta();
        nlohmann::json c = nlohmann::json::array();
        for (const auto& z : blk.coeffs) c.push_back({z.real(), z.imag()});
        b["coeffs"] = std::move(c);
        j["blocks"].push_back(std::move(b));
    }
    return j;
}

SymbolDecomposition SymbolDecomposition::from_json(const nlohmann::json& j) {
    SymbolDecomposition d;
    d.dim = j.at("dim").get<int>();
    d.declared_order = j.at("declared_order").get<double>();
    d.level_max = j.at("level_max").get<int>();
    d.n_decay = j.at("n_decay").get<int>();
    d.a_max = j.at("a_max").get<int>();
    d.fitted_decay_constant = j.at("fitted_decay_constant").get<double>();
    d.tail_bound = j.at("tail_bound").get<double>();
    for (const auto& b : j.at("blocks")) {
        SymbolBlock blk;
        blk.part = b.at("part").get<int>();
        blk.level = b.at("level").get<int>();
        blk.offset = b.at("offset").get<int>();
        blk.a_max = b.at("a_max").get<int>();
        blk.dim = b.at("dim").get<int>();
        for (const auto& z : b.at("coeffs"))
            blk.coeffs.emplace_back(z[0].get<double>(), z[1].get<double>());
        d.blocks.push_back(std::move(blk));
    }
    return d;
}

SymbolDecomposition decompose_symbol(const BilinearSymbol& symbol, int level_max, int n_decay,
                                     int a_max) {
    if (n_decay > symbol.derivative_budget())
        throw std::invalid_argument("decompose_symbol: n_decay exceeds the derivative budget");
    if (level_max < 3) throw std::invalid_argument("decompose_symbol: level_max must be >= 3");
    if (a_max < 1) throw std::invalid_argument("decompose_symbol: a_max must be >= 1");

    const int d = symbol.dim();
    const std::size_t M = d == 1 ? 256 : 24;

    SymbolDecomposition out;
    out.dim = d;
    out.declared_order = symbol.declared_order();
    out.level_max = level_max;
    out.n_decay = n_decay;
    out.a_max = a_max;

    auto add_block = [&](int part, int level, int offset) {
        SymbolBlock blk;
        blk.part = part;
        blk.level = level;
        blk.offset = offset;
        blk.a_max = a_max;
        blk.dim = d;
        blk.coeffs = box_coefficients(blk, symbol, M);
        out.blocks.push_back(std::move(blk));
    };

    for (int j = 3; j <= level_max; ++j) add_block(1, j, 0);
    for (int ell = -2; ell <= 2; ++ell)
        for (int j = std::max(0, ell); j <= level_max; ++j) add_block(2, j, ell);
    for (int k = 3; k <= level_max; ++k) add_block(3, k, 0);

    // Decay check: per level, the weighted sup should be uniformly bounded.
    const double m = symbol.declared_order();
    std::vector<std::pair<double, double>> level_sup;
    const std::size_t win = window_count(a_max, d);
    std::vector<int> a(d), b(d);
    const std::size_t per = static_cast<std::size_t>(2 * a_max + 1);
    double global = 0.0;
    for (int j = 0; j <= level_max; ++j) {
        double sup = 0.0;
        for (const auto& blk : out.blocks) {
            if (blk.level != j) continue;
            for (std::size_t ia = 0; ia < win; ++ia) {
                std::size_t ra = ia;
                for (int i = d - 1; i >= 0; --i) {
                    a[i] = static_cast<int>(ra % per) - a_max;
                    ra /= per;
                }
                for (std::size_t ib = 0; ib < win; ++ib) {
                    std::size_t rb = ib;
                    for (int i = d - 1; i >= 0; --i) {
                        b[i] = static_cast<int>(rb % per) - a_max;
                        rb /= per;
                    }
                    const double wgt = std::pow(1.0 + lattice_norm(a), n_decay) *
                                       std::pow(1.0 + lattice_norm(b), n_decay);
                    const double val =
                        std::abs(blk.coeffs[ia * win + ib]) * std::exp2(-j * m) * wgt;
                    sup = std::max(sup, val);
                }
            }
        }
        if (sup > 0.0) level_sup.emplace_back(static_cast<double>(j), sup);
        global = std::max(global, sup);
    }
    out.fitted_decay_constant = global;
    if (level_sup.size() >= 3) {
        const ExponentFit fit = fit_exponent(level_sup);
        if (fit.slope > 0.5)
            throw std::invalid_argument(
                "decompose_symbol: coefficient decay degrades with level; symbol does not meet "
                "the declared class");
    }

    // Tail of the window: sum over lattice vectors beyond a_max of the fitted
    // envelope, per unit 2^{jm}.
    if (d == 1) {
        const double full = one_dim_window_sum(n_decay);
        const double tail = one_dim_tail_sum(a_max, n_decay);
        out.tail_bound = out.fitted_decay_constant * (2.0 * tail * full + tail * tail);
    } else {
        // crude ring bound for the two-dimensional lattice sums
        double full = 0.0, tail = 0.0;
        for (int r = 0; r <= 4096; ++r) {
            const double count = r == 0 ? 1.0 : 8.0 * r;
            const double w = count * std::pow(1.0 + r, -n_decay);
            full += w;
            if (r > a_max) tail += w;
        }
        out.tail_bound = out.fitted_decay_constant * (2.0 * tail * full + tail * tail);
    }
    return out;
}

SampledFunction apply_bilinear(const BilinearSymbol& symbol, const SampledFunction& f,
                               const SampledFunction& g) {
    if (!(f.spec() == g.spec()))
        throw std::invalid_argument("apply_bilinear: operand grids differ");
    if (f.spec().dim != symbol.dim())
        throw std::invalid_argument("apply_bilinear: symbol and grid dimension differ");
    const GridSpec& spec = f.spec();
    const std::size_t n = spec.points_per_axis;

    SampledFunction F = forward_transform(f);
    SampledFunction G = forward_transform(g);
    const double fmax = F.max_abs(), gmax = G.max_abs();
    std::vector<std::size_t> af, ag;
    for (std::size_t i = 0; i < F.size(); ++i)
        if (std::abs(F[i]) > 1e-12 * fmax) af.push_back(i);
    for (std::size_t i = 0; i < G.size(); ++i)
        if (std::abs(G[i]) > 1e-12 * gmax) ag.push_back(i);

    SampledFunction H(spec, Space::frequency);
    const double w = std::pow(spec.frequency_step() / (2.0 * kPi), spec.dim);

    if (spec.dim == 1) {
        const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(n / 2);
        double xi[1], eta[1];
        for (std::size_t k : af) {
            xi[0] = spec.coordinate(k, Space::frequency);
            for (std::size_t l : ag) {
                const std::ptrdiff_t msum =
                    static_cast<std::ptrdiff_t>(k) + static_cast<std::ptrdiff_t>(l) - half;
                if (msum < 0 || msum >= static_cast<std::ptrdiff_t>(n)) continue;
                eta[0] = spec.coordinate(l, Space::frequency);
                H[static_cast<std::size_t>(msum)] +=
                    symbol(std::span<const double>(xi, 1), std::span<const double>(eta, 1)) *
                    F[k] * G[l];
            }
        }
    } else {
        const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(n / 2);
        double xi[2], eta[2];
        for (std::size_t k : af) {
            const std::ptrdiff_t k0 = static_cast<std::ptrdiff_t>(k / n);
            const std::ptrdiff_t k1 = static_cast<std::ptrdiff_t>(k % n);
            xi[0] = spec.coordinate(k / n, Space::frequency);
            xi[1] = spec.coordinate(k % n, Space::frequency);
            for (std::size_t l : ag) {
                const std::ptrdiff_t l0 = static_cast<std::ptrdiff_t>(l / n);
                const std::ptrdiff_t l1 = static_cast<std::ptrdiff_t>(l % n);
                const std::ptrdiff_t m0 = k0 + l0 - half;
                const std::ptrdiff_t m1 = k1 + l1 - half;
                if (m0 < 0 || m0 >= static_cast<std::ptrdiff_t>(n) || m1 < 0 ||
                    m1 >= static_cast<std::ptrdiff_t>(n))
                    continue;
                eta[0] = spec.coordinate(l / n, Space::frequency);
                eta[1] = spec.coordinate(l % n, Space::frequency);
                H[static_cast<std::size_t>(m0) * n + static_cast<std::size_t>(m1)] +=
                    symbol(std::span<const double>(xi, 2), std::span<const double>(eta, 2)) *
                    F[k] * G[l];
            }
        }
    }
    for (std::size_t i = 0; i < H.size(); ++i) H[i] *= w;
    return inverse_transform(H);
}

namespace {

// translated frequency-localized factor: (e^{i a . xi / dil} slot(xi) fhat)^vee
SampledFunction modulated_piece(const SampledFunction& spectrum, const SlotSpec& slot,
                                std::span<const int> a, double dil) {
    const GridSpec& spec = spectrum.spec();
    SampledFunction piece(spec, Space::frequency);
    const std::size_t n = spec.points_per_axis;
    if (spec.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            const double xi = spec.coordinate(i, Space::frequency);
            const double amp = slot.multiplier(std::abs(xi));
            if (amp == 0.0) continue;
            const double ph = a[0] * xi / dil;
            piece[i] = spectrum[i] * amp * Complex{std::cos(ph), std::sin(ph)};
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double x0 = spec.coordinate(i, Space::frequency);
            for (std::size_t j = 0; j < n; ++j) {
                const double x1 = spec.coordinate(j, Space::frequency);
                const double amp = slot.multiplier(std::hypot(x0, x1));
                if (amp == 0.0) continue;
                const double ph = (a[0] * x0 + a[1] * x1) / dil;
                piece[i * n + j] = spectrum[i * n + j] * amp * Complex{std::cos(ph), std::sin(ph)};
            }
        }
    }
    return inverse_transform(piece);
}

} // namespace

SampledFunction apply_bilinear(const SymbolDecomposition& decomposition, const SampledFunction& f,
                               const SampledFunction& g) {
    if (!(f.spec() == g.spec()))
        throw std::invalid_argument("apply_bilinear: operand grids differ");
    if (f.spec().dim != decomposition.dim)
        throw std::invalid_argument("apply_bilinear: decomposition and grid dimension differ");
    const GridSpec& spec = f.spec();
    const int d = spec.dim;
    const int a_max = decomposition.a_max;
    const std::size_t win = window_count(a_max, d);
    const std::size_t per = static_cast<std::size_t>(2 * a_max + 1);

    SampledFunction F = forward_transform(f);
    SampledFunction G = forward_transform(g);
    SampledFunction out(spec, Space::physical);

    std::vector<int> a(d), b(d);
    for (const auto& blk : decomposition.blocks) {
        const SlotSpec sx = xi_slot(blk);
        const SlotSpec se = eta_slot(blk);
        // all translated pieces for this block, indexed by lattice vector
        std::vector<SampledFunction> fp, gp;
        fp.reserve(win);
        gp.reserve(win);
        for (std::size_t ia = 0; ia < win; ++ia) {
            std::size_t ra = ia;
            for (int i = d - 1; i >= 0; --i) {
                a[i] = static_cast<int>(ra % per) - a_max;
                ra /= per;
            }
            fp.push_back(modulated_piece(F, sx, a, blk.dilation_xi()));
            gp.push_back(modulated_piece(G, se, a, blk.dilation_eta()));
        }
        // deterministic accumulation: by |a|+|b|, then lexicographic
        std::vector<std::tuple<int, std::size_t, std::size_t>> order;
        order.reserve(win * win);
        for (std::size_t ia = 0; ia < win; ++ia) {
            std::size_t ra = ia;
            int na = 0;
            for (int i = d - 1; i >= 0; --i) {
                na += std::abs(static_cast<int>(ra % per) - a_max);
                ra /= per;
            }
            for (std::size_t ib = 0; ib < win; ++ib) {
                std::size_t rb = ib;
                int nb = 0;
                for (int i = d - 1; i >= 0; --i) {
                    nb += std::abs(static_cast<int>(rb % per) - a_max);
                    rb /= per;
                }
                order.emplace_back(na + nb, ia, ib);
            }
        }
        std::sort(order.begin(), order.end());
        for (const auto& [key, ia, ib] : order) {
            (void)key;
            const Complex c = blk.coeffs[ia * win + ib];
            if (std::abs(c) == 0.0) continue;
            const auto& pf = fp[ia];
            const auto& pg = gp[ib];
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * pf[i] * pg[i];
        }
    }
    return out;
}

SampledFunction apply_tensor(const RadialBump& theta1, const RadialBump& theta2, double dilation,
                             const SampledFunction& f, const SampledFunction& g) {
    if (!(f.spec() == g.spec()))
        throw std::invalid_argument("apply_tensor: operand grids differ");
    SampledFunction F = forward_transform(f);
    SampledFunction G = forward_transform(g);
    for (std::size_t i = 0; i < F.size(); ++i) {
        F[i] *= theta1(F.radius(i) / dilation);
        G[i] *= theta2(G.radius(i) / dilation);
    }
    SampledFunction u = inverse_transform(F);
    SampledFunction v = inverse_transform(G);
    SampledFunction out(f.spec(), Space::physical);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] * v[i];
    return out;
}

TrilinearResult trilinear_form(const PhaseSpec& phase, const RadialBump& theta1,
                               const RadialBump& theta2, const std::optional<RadialBump>& theta3,
                               int level, const SampledFunction& f, const SampledFunction& g,
                               const SampledFunction& h, std::span<const Region> regions) {
    if (!(f.spec() == g.spec()) || !(f.spec() == h.spec()))
        throw std::invalid_argument("trilinear_form: operand grids differ");
    if (theta3) {
        const double need = theta1.support_outer + theta2.support_outer;
        if (theta3->plateau_outer < need)
            throw std::invalid_argument(
                "trilinear_form: third localizer's plateau does not cover the support sum of the "
                "first two");
    }
    const double dil = std::exp2(level);
    SampledFunction u = apply_propagator(phase, theta1, dil, f);
    SampledFunction v = apply_propagator(phase, theta2, dil, g);
    SampledFunction w = apply_propagator(phase, theta3, dil, h);

    TrilinearResult res;
    res.level = level;
    const double cell = std::pow(f.spec().spatial_step(), f.spec().dim);
    SampledFunction prod(f.spec(), Space::physical);
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u[i] * v[i] * w[i];
    Complex acc{0.0, 0.0};
    double l1 = 0.0;
    for (std::size_t i = 0; i < prod.size(); ++i) {
        acc += prod[i];
        l1 += std::abs(prod[i]);
    }
    res.value = acc * cell;
    res.l1_product_norm = l1 * cell;
    for (const Region& region : regions)
        res.regional.emplace_back(region, norm(prod, NormKind::l1, region));
    return res;
}

} // namespace oscmult
