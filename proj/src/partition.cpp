#include "oscmult/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oscmult {

namespace {

double mollifier(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp(-1.0 / (t * (1.0 - t)));
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGl = 16;
const double kGlX[kGl] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
const double kGlW[kGl] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

double gl_panel(double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < kGl; ++i) acc += kGlW[i] * mollifier(c + h * kGlX[i]);
    return acc * h;
}

} // namespace

BumpProfile::BumpProfile() {
    const std::size_t panels = 1u << 15;
    step_ = 1.0 / static_cast<double>(panels);
    val_.resize(panels + 1);
    der_.resize(panels + 1);
    double acc = 0.0;
    val_[0] = 0.0;
    der_[0] = 0.0;
    for (std::size_t i = 1; i <= panels; ++i) {
        const double a = static_cast<double>(i - 1) * step_;
        const double b = static_cast<double>(i) * step_;
        acc += gl_panel(a, b);
        val_[i] = acc;
        der_[i] = mollifier(b);
    }
    const double total = acc;
    norm_ = 1.0 / total;
    for (std::size_t i = 0; i <= panels; ++i) {
        val_[i] /= total;
        der_[i] /= total;
    }
}

const BumpProfile& BumpProfile::standard() {
    static const BumpProfile profile;
    return profile;
}

double BumpProfile::value(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double u = t / step_;
    std::size_t i = std::min(static_cast<std::size_t>(u), val_.size() - 2);
    const double s = u - static_cast<double>(i); // in [0, 1)
    // Cubic Hermite on [t_i, t_{i+1}] with exact derivatives.
    const double h = step_;
    const double p0 = val_[i], p1 = val_[i + 1];
    const double m0 = der_[i] * h, m1 = der_[i + 1] * h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 +
           (s3 - s2) * m1;
}

double BumpProfile::derivative(double t) const {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return mollifier(t) * norm_;
}

void RadialBump::validate() const {
    if (!(support_inner <= plateau_inner && plateau_inner < plateau_outer &&
          plateau_outer <= support_outer))
        throw std::invalid_argument("RadialBump: need support_inner <= plateau_inner < "
                                    "plateau_outer <= support_outer");
    if (support_inner < 0.0) throw std::invalid_argument("RadialBump: negative radius");
    if (support_inner > 0.0 && !(support_inner < plateau_inner))
        throw std::invalid_argument("RadialBump: annular bump needs support_inner < plateau_inner");
    if (!(plateau_outer < support_outer))
        throw std::invalid_argument("RadialBump: plateau must end strictly inside the support");
}

double RadialBump::operator()(double r) const {
    r = std::abs(r);
    if (r >= support_outer) return 0.0;
    if (r > plateau_outer)
        return 1.0 - BumpProfile::standard().value((r - plateau_outer) /
                                                   (support_outer - plateau_outer));
    if (r >= plateau_inner) return 1.0;
    if (r <= support_inner) return 0.0;
    return BumpProfile::standard().value((r - support_inner) / (plateau_inner - support_inner));
}

RadialBump make_ball(double plateau, double support) {
    RadialBump b{0.0, 0.0, plateau, support, LocalizerKind::custom};
    b.validate();
    return b;
}

RadialBump make_annulus(double support_inner, double plateau_inner, double plateau_outer,
                        double support_outer) {
    RadialBump b{support_inner, plateau_inner, plateau_outer, support_outer,
                 LocalizerKind::custom};
    b.validate();
    return b;
}

RadialBump make_localizer(LocalizerKind kind) {
    RadialBump b;
    switch (kind) {
        case LocalizerKind::theta_annular: b = make_annulus(0.1, 0.125, 8.0, 10.0); break;
        case LocalizerKind::phi_ball: b = make_ball(2.0, 3.0); break;
        case LocalizerKind::psi_narrow: b = make_annulus(0.5, 2.0 / 3.0, 1.5, 2.0); break;
        case LocalizerKind::custom: b = make_ball(1.0, 2.0); break;
    }
    b.kind = kind;
    return b;
}

std::string localizer_name(LocalizerKind kind) {
    switch (kind) {
        case LocalizerKind::theta_annular: return "theta_annular";
        case LocalizerKind::phi_ball: return "phi_ball";
        case LocalizerKind::psi_narrow: return "psi_narrow";
        case LocalizerKind::custom: return "custom";
    }
    return "custom";
}

PartitionOfUnity::PartitionOfUnity(const BumpProfile& profile) {
    (void)profile; // the standard profile backs every bump
    phi_ = make_ball(1.0, 2.0);
}

double PartitionOfUnity::phi(double r) const { return phi_(r); }

double PartitionOfUnity::psi(double r) const { return phi_(r) - phi_(2.0 * r); }

double PartitionOfUnity::psi_level(int j, double r) const {
    if (j < 0) throw std::invalid_argument("psi_level: j must be nonnegative");
    if (j == 0) return phi(r);
    return psi(std::ldexp(r, -j));
}

double PartitionOfUnity::phi_level(int j, double r) const {
    if (j < 0) throw std::invalid_argument("phi_level: j must be nonnegative");
    return phi(std::ldexp(r, -j));
}

namespace {

// k-th binomial difference along one axis; the sup over sample positions
// divided by h^k estimates sup |d^k f| to second order.
double max_difference_1d(const std::vector<double>& v, int k, double h) {
    std::vector<double> coeff(k + 1);
    coeff[0] = 1.0;
    for (int t = 1; t <= k; ++t) coeff[t] = coeff[t - 1] * (k - t + 1) / t;
    double mx = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i + k < n; ++i) {
        double acc = 0.0;
        for (int t = 0; t <= k; ++t) {
            const double sign = ((k - t) & 1) ? -1.0 : 1.0;
            acc += sign * coeff[t] * v[i + t];
        }
        mx = std::max(mx, std::abs(acc));
    }
    return mx / std::pow(h, k);
}

} // namespace

CNormEstimate c_norm(const std::function<double(double)>& radial, int order,
                     const GridSpec& grid) {
    if (order < 0 || order > 8)
        throw std::invalid_argument("c_norm: profile accuracy is not certified beyond order 8");
    grid.validate();

    const std::size_t n = grid.points_per_axis;
    const double h = grid.spatial_step();
    CNormEstimate est;
    est.order = order;

    if (grid.dim == 1) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = radial(std::abs(grid.coordinate(i, Space::physical)));
        for (int k = 0; k <= order; ++k)
            est.value = std::max(est.value, max_difference_1d(v, k, h));
        return est;
    }

    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = grid.coordinate(i, Space::physical);
    std::vector<std::vector<double>> v(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v[i][j] = radial(std::hypot(c[i], c[j]));

    for (int k1 = 0; k1 <= order; ++k1) {
        for (int k2 = 0; k1 + k2 <= order; ++k2) {
            // difference k1 times along axis 0, then k2 along axis 1
            std::vector<double> coeff1(k1 + 1), coeff2(k2 + 1);
            coeff1[0] = coeff2[0] = 1.0;
            for (int t = 1; t <= k1; ++t) coeff1[t] = coeff1[t - 1] * (k1 - t + 1) / t;
            for (int t = 1; t <= k2; ++t) coeff2[t] = coeff2[t - 1] * (k2 - t + 1) / t;
            double mx = 0.0;
            for (std::size_t i = 0; i + k1 < n; ++i) {
                for (std::size_t j = 0; j + k2 < n; ++j) {
                    double acc = 0.0;
                    for (int t1 = 0; t1 <= k1; ++t1) {
                        const double s1 = ((k1 - t1) & 1) ? -1.0 : 1.0;
                        double inner = 0.0;
                        for (int t2 = 0; t2 <= k2; ++t2) {
                            const double s2 = ((k2 - t2) & 1) ? -1.0 : 1.0;
                            inner += s2 * coeff2[t2] * v[i + t1][j + t2];
                        }
                        acc += s1 * coeff1[t1] * inner;
                    }
                    mx = std::max(mx, std::abs(acc));
                }
            }
            est.value = std::max(est.value, mx / std::pow(h, k1 + k2));
        }
    }
    return est;
}

} // namespace oscmult
