#pragma once

#include "oscmult/grid.hpp"

#include <functional>
#include <string>

namespace oscmult {

/// Smooth 0 -> 1 transition on [0, 1]: the normalized primitive of
/// t -> exp(-1/(t(1-t))). Tabulated once at high resolution; evaluation is a
/// cubic Hermite patch with exact endpoint derivatives, accurate to ~1e-15.
class BumpProfile {
public:
    static const BumpProfile& standard();

    double value(double t) const;      // clamped: 0 for t <= 0, 1 for t >= 1
    double derivative(double t) const; // of the normalized primitive
    double tolerance() const { return 1e-14; }

private:
    BumpProfile();
    std::vector<double> val_;
    std::vector<double> der_;
    double step_;
    double norm_ = 1.0;
};

enum class LocalizerKind { theta_annular, phi_ball, psi_narrow, custom };

/// Radial plateau bump: 1 on [plateau_inner, plateau_outer], 0 outside
/// (support_inner, support_outer), monotone smooth transitions in between.
/// A ball bump has support_inner == plateau_inner == 0.
struct RadialBump {
    double support_inner = 0.0;
    double plateau_inner = 0.0;
    double plateau_outer = 1.0;
    double support_outer = 2.0;
    LocalizerKind kind = LocalizerKind::custom;

    double operator()(double r) const;
    bool is_ball() const { return plateau_inner <= 0.0; }
    void validate() const;
};

RadialBump make_ball(double plateau, double support);
RadialBump make_annulus(double support_inner, double plateau_inner, double plateau_outer,
                        double support_outer);
/// theta_annular: 1 on [1/8, 8], supported in [1/10, 10].
/// phi_ball:      1 on [0, 2],   supported in [0, 3].
/// psi_narrow:    1 on [2/3, 3/2], supported in [1/2, 2].
RadialBump make_localizer(LocalizerKind kind);

std::string localizer_name(LocalizerKind kind);

/// The dyadic partition: phi = 1 on {|xi| <= 1}, supp phi in {|xi| <= 2};
/// psi(xi) = phi(xi) - phi(2 xi) so that phi + sum_{j>=1} psi(2^{-j} xi) = 1
/// telescopes exactly. psi_level(0, r) = phi(r).
class PartitionOfUnity {
public:
    explicit PartitionOfUnity(const BumpProfile& profile = BumpProfile::standard());

    double phi(double r) const;
    double psi(double r) const;
    double psi_level(int j, double r) const;
    double phi_level(int j, double r) const;
    double zeta(double r) const { return 1.0 - phi(r); }

    const RadialBump& phi_bump() const { return phi_; }

private:
    RadialBump phi_;
};

struct CNormEstimate {
    int order = 0;
    double value = 0.0; // max over |alpha| <= order of sampled sup |d^alpha|
};

/// C^N estimate of a radial function by central finite differences on the
/// given sampling grid (physical coordinates). Second-order accurate in the
/// grid step; orders above 8 are rejected.
CNormEstimate c_norm(const std::function<double(double)>& radial, int order, const GridSpec& grid);

} // namespace oscmult
