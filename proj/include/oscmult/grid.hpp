#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace oscmult {

inline constexpr double kPi = std::numbers::pi_v<double>;
using Complex = std::complex<double>;

enum class Space { physical, frequency };

/// Uniform periodic grid on [-L, L)^dim with N samples per axis.
/// Frequency samples live on {k * pi/L : -N/2 <= k < N/2} per axis, so a
/// physical grid and its frequency grid carry the same index layout.
struct GridSpec {
    int dim = 1;
    double half_width = 16.0;          // L
    std::size_t points_per_axis = 1024; // N, power of two, >= 16

    double spatial_step() const { return 2.0 * half_width / static_cast<double>(points_per_axis); }
    double frequency_step() const { return kPi / half_width; }
    double nyquist() const { return kPi * static_cast<double>(points_per_axis) / (2.0 * half_width); }
    std::size_t size() const;
    double extent(Space space) const {
        return space == Space::physical ? half_width : nyquist();
    }
    /// Coordinate of sample i along one axis: -extent + i * step.
    double coordinate(std::size_t i, Space space) const;
    double step(Space space) const {
        return space == Space::physical ? spatial_step() : frequency_step();
    }
    void validate() const; // throws std::invalid_argument on violated invariants

    bool operator==(const GridSpec&) const = default;
};

/// Complex samples of a function on a GridSpec, tagged physical or frequency.
/// Values are row-major in axis order. Immutable use is the norm; operations
/// return fresh instances.
class SampledFunction {
public:
    SampledFunction(GridSpec spec, Space space);
    SampledFunction(GridSpec spec, Space space, std::vector<Complex> values);

    const GridSpec& spec() const { return spec_; }
    Space space() const { return space_; }
    std::span<const Complex> values() const { return values_; }
    std::span<Complex> values() { return values_; }
    std::size_t size() const { return values_.size(); }
    Complex operator[](std::size_t i) const { return values_[i]; }
    Complex& operator[](std::size_t i) { return values_[i]; }

    /// Point coordinates of flattened index i.
    std::array<double, 2> point(std::size_t i) const;
    double radius(std::size_t i) const;

    static SampledFunction sample_radial(const GridSpec& spec, Space space,
                                         const std::function<Complex(double)>& f);
    static SampledFunction sample(const GridSpec& spec, Space space,
                                  const std::function<Complex(std::span<const double>)>& f);

    double max_abs() const;

private:
    GridSpec spec_;
    Space space_;
    std::vector<Complex> values_;
};

/// f_hat(xi) = integral e^{-i xi.x} f(x) dx, as a Riemann sum on the grid.
SampledFunction forward_transform(const SampledFunction& f);

/// g_vee(x) = (2 pi)^{-dim} integral e^{i xi.x} g(xi) dxi, as a Riemann sum.
SampledFunction inverse_transform(const SampledFunction& g);

/// Radial region of the spatial domain. shell k means {2^k <= |x| < 2^{k+1}}.
struct Region {
    enum class Kind { whole, ball, annulus, complement_ball, shell };
    Kind kind = Kind::whole;
    double inner = 0.0;
    double outer = 0.0;
    int shell_index = 0;
    std::array<double, 2> center{0.0, 0.0};

    static Region whole();
    static Region ball(double radius, std::array<double, 2> center = {0.0, 0.0});
    static Region annulus(double inner, double outer, std::array<double, 2> center = {0.0, 0.0});
    static Region complement_ball(double radius, std::array<double, 2> center = {0.0, 0.0});
    static Region shell(int k);

    bool contains(std::span<const double> x) const;
    void validate() const;
};

enum class NormKind { l1, l2, linf };

/// Riemann-sum L^p norm of a physical-space function restricted to a region.
/// Throws if the region misses the grid entirely (a mis-scaled region is a bug,
/// not a zero).
double norm(const SampledFunction& f, NormKind p, const Region& region = Region::whole());

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // max |log2(value) - line|
    int sample_count = 0;
};

/// Least-squares line through (level, log2 value). Values must be positive and
/// at least three points are required.
ExponentFit fit_exponent(std::span<const std::pair<double, double>> series);

} // namespace oscmult
