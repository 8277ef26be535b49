#pragma once

#include "oscmult/grid.hpp"
#include "oscmult/oscillatory.hpp"
#include "oscmult/partition.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <vector>

namespace oscmult {

/// Symbol sigma(xi, eta) with a declared order m in the (1+|xi|+|eta|)^{m-|a|}
/// derivative scale. Evaluation is lazy; nothing is tabulated.
class BilinearSymbol {
public:
    using Eval = std::function<Complex(std::span<const double>, std::span<const double>)>;

    BilinearSymbol(int dim, Eval eval, double declared_order, int derivative_budget = 6);

    /// Convenience for dim 1.
    static BilinearSymbol scalar(std::function<Complex(double, double)> eval,
                                 double declared_order, int derivative_budget = 6);

    Complex operator()(std::span<const double> xi, std::span<const double> eta) const;
    Complex at(double xi, double eta) const;

    int dim() const { return dim_; }
    double declared_order() const { return declared_order_; }
    int derivative_budget() const { return derivative_budget_; }

private:
    int dim_;
    Eval eval_;
    double declared_order_;
    int derivative_budget_;
};

/// Largest sampled ratio |finite-difference d^(a,b) sigma| over
/// (1+|xi|+|eta|)^{m-|a|-|b|}, taken on dyadic annuli. A finite value backs
/// the declared order.
double symbol_class_constant(const BilinearSymbol& symbol, int max_order, int max_scale);

enum class Transposition { star1, star2 };

/// star1: (xi, eta) -> sigma(-xi-eta, eta); star2: (xi, eta) -> sigma(xi, -xi-eta).
BilinearSymbol transpose_symbol(const BilinearSymbol& symbol, Transposition which);

/// One dyadic block of the three-part symbol splitting. Parts: 1 = xi-dominant
/// (psi_j x varphi_{j-3}), 2 = diagonal (psi_j x psi_{j-offset}), 3 mirrors 1.
struct SymbolBlock {
    int part = 1;
    int level = 3;   // j
    int offset = 0;  // ell, part 2 only
    int a_max = 16;
    int dim = 1;
    // coefficients indexed row-major over the (2 a_max + 1)^dim lattice per slot
    std::vector<Complex> coeffs;

    double dilation_xi() const;  // modulation scale on the xi side
    double dilation_eta() const;
    Complex coeff(std::span<const int> a, std::span<const int> b) const;
};

struct SymbolDecomposition {
    int dim = 1;
    double declared_order = 0.0;
    int level_max = 8;
    int n_decay = 6;
    int a_max = 16;
    std::vector<SymbolBlock> blocks;
    double fitted_decay_constant = 0.0; // sup |c| 2^{-jm} (1+|a|)^N (1+|b|)^N
    double tail_bound = 0.0;            // series remainder beyond the window, per block scale 2^{jm}

    nlohmann::json to_json() const;
    static SymbolDecomposition from_json(const nlohmann::json& j);
};

/// Fourier-series expansion of the symbol over each dyadic block, with decay
/// check against the declared order. Throws when the fitted decay table is
/// unbounded (symbol not in the declared class).
SymbolDecomposition decompose_symbol(const BilinearSymbol& symbol, int level_max, int n_decay,
                                     int a_max);

/// T_sigma(f, g) by direct summation over active frequency modes. Intended for
/// band-limited inputs; cost is (active f modes) x (active g modes).
SampledFunction apply_bilinear(const BilinearSymbol& symbol, const SampledFunction& f,
                               const SampledFunction& g);

/// T_sigma(f, g) through the block/lattice expansion: per block and lattice
/// mode, two translated frequency-localized factors multiplied pointwise.
/// Deterministic summation order (part, level, offset, |a|+|b|, a, b).
SampledFunction apply_bilinear(const SymbolDecomposition& decomposition, const SampledFunction& f,
                               const SampledFunction& g);

/// Tensor fast path: theta1(D/d) f . theta2(D/d) g.
SampledFunction apply_tensor(const RadialBump& theta1, const RadialBump& theta2, double dilation,
                             const SampledFunction& f, const SampledFunction& g);

struct TrilinearResult {
    int level = 0;
    Complex value{0.0, 0.0};       // integral of the three propagated factors
    double l1_product_norm = 0.0;  // L1 norm of the pointwise product
    std::vector<std::pair<Region, double>> regional; // L1 over caller regions
};

/// value = integral S^1_j f . S^2_j g . S^3_j h dx with S^l_j the propagator
/// with localizer theta_l at level j (theta3 empty = bare phase). Requires the
/// third localizer's plateau to cover the support sum of the first two.
TrilinearResult trilinear_form(const PhaseSpec& phase, const RadialBump& theta1,
                               const RadialBump& theta2, const std::optional<RadialBump>& theta3,
                               int level, const SampledFunction& f, const SampledFunction& g,
                               const SampledFunction& h, std::span<const Region> regions = {});

} // namespace oscmult
