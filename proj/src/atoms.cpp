#include "oscmult/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace oscmult {

namespace {

double cell_measure(const GridSpec& spec) { return std::pow(spec.spatial_step(), spec.dim); }

struct CubeKey {
    long long c0 = 0;
    long long c1 = 0;
    bool operator<(const CubeKey& o) const {
        return c0 != o.c0 ? c0 < o.c0 : c1 < o.c1;
    }
};

CubeKey cube_of(const std::array<double, 2>& p, double side, int dim) {
    CubeKey k;
    k.c0 = static_cast<long long>(std::floor(p[0] / side));
    if (dim == 2) k.c1 = static_cast<long long>(std::floor(p[1] / side));
    return k;
}

struct CoverCube {
    CubeKey key;
    double side;
    std::vector<std::size_t> points;
};

// Subdivide every less-than-half-filled cube until it fills or reaches the
// grid step, so the final cover volume is at most 2 |E_k|.
void refine(const SampledFunction& h, CoverCube cube, double dx, int dim,
            std::vector<CoverCube>& out) {
    const double vol = std::pow(cube.side, dim);
    const double filled = static_cast<double>(cube.points.size()) * std::pow(dx, dim);
    if (filled * 2.0 >= vol || cube.side <= dx * 1.5) {
        out.push_back(std::move(cube));
        return;
    }
    std::map<CubeKey, CoverCube> children;
    const double half = cube.side / 2.0;
    for (std::size_t i : cube.points) {
        const auto p = h.point(i);
        const CubeKey key = cube_of(p, half, dim);
        auto& child = children[key];
        child.key = key;
        child.side = half;
        child.points.push_back(i);
    }
    for (auto& [key, child] : children) refine(h, std::move(child), dx, dim, out);
}

} // namespace

AtomValidity validate_atom(const Atom& atom) {
    AtomValidity v;
    const GridSpec& spec = atom.samples.spec();
    const int dim = spec.dim;
    if (!(atom.radius > 0.0) || atom.radius > 1.0) {
        return {false, "radius must lie in (0, 1]"};
    }
    const double slack = spec.spatial_step();
    const double size_cap = std::pow(atom.radius, -dim) * (1.0 + 1e-9);
    for (std::size_t i = 0; i < atom.samples.size(); ++i) {
        const double a = std::abs(atom.samples[i]);
        if (a == 0.0) continue;
        if (a > size_cap) return {false, "size: sup norm exceeds radius^{-dim}"};
        const auto p = atom.samples.point(i);
        const double d = dim == 1 ? std::abs(p[0] - atom.center[0])
                                  : std::hypot(p[0] - atom.center[0], p[1] - atom.center[1]);
        if (d > atom.radius + slack) return {false, "support: sample outside the ball"};
    }
    return v;
}

double AtomicDecomposition::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

SampledFunction AtomicDecomposition::reconstruct() const {
    if (atoms.empty() && !remainder)
        throw std::invalid_argument("reconstruct: empty decomposition");
    const GridSpec spec = atoms.empty() ? remainder->spec() : atoms.front().samples.spec();
    SampledFunction out(spec, Space::physical);
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        const double w = weights[a];
        const auto& vals = atoms[a].samples;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * vals[i];
    }
    if (remainder)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*remainder)[i];
    return out;
}

AtomicDecomposition decompose(const SampledFunction& h) {
    if (h.space() != Space::physical)
        throw std::invalid_argument("decompose: input must be physical-tagged");
    const GridSpec& spec = h.spec();
    const int dim = spec.dim;
    const double dx = spec.spatial_step();
    const double cell = cell_measure(spec);
    // largest dyadic cube side with diameter <= 1
    const double base_side = dim == 1 ? 1.0 : 0.5;
    if (dx > base_side)
        throw std::invalid_argument("decompose: grid is coarser than the unit atom scale");

    AtomicDecomposition out;
    out.source_l1 = norm(h, NormKind::l1);
    if (out.source_l1 == 0.0) return out;

    const double hmax = h.max_abs();
    const int k_max = static_cast<int>(std::floor(std::log2(hmax)));
    constexpr int kLevelCap = 64;

    // levels from the top until the remaining mass is negligible
    double remaining = out.source_l1;
    int k = k_max;
    std::vector<char> assigned(h.size(), 0);
    while (remaining > 1e-8 * out.source_l1) {
        if (k_max - k > kLevelCap)
            throw std::invalid_argument("decompose: level cap exceeded; values span too many "
                                        "octaves for the grid resolution");
        const double lo = std::exp2(k), hi = std::exp2(k + 1);
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double a = std::abs(h[i]);
            if (a >= lo && a < hi) members.push_back(i);
        }
        if (!members.empty()) {
            // coarsest admissible generation: cubes of side base_side
            std::map<CubeKey, CoverCube> top;
            for (std::size_t i : members) {
                const CubeKey key = cube_of(h.point(i), base_side, dim);
                auto& cube = top[key];
                cube.key = key;
                cube.side = base_side;
                cube.points.push_back(i);
            }
            std::vector<CoverCube> cover;
            for (auto& [key, cube] : top) refine(h, std::move(cube), dx, dim, cover);
            for (const auto& cube : cover) {
                const double r = cube.side * std::sqrt(static_cast<double>(dim));
                const double lambda = std::exp2(k + 1) * std::pow(r, dim);
                Atom atom{{cube.key.c0 * cube.side + cube.side / 2.0,
                           dim == 2 ? cube.key.c1 * cube.side + cube.side / 2.0 : 0.0},
                          r,
                          SampledFunction(spec, Space::physical)};
                double level_mass = 0.0;
                for (std::size_t i : cube.points) {
                    atom.samples[i] = h[i] / lambda;
                    level_mass += std::abs(h[i]) * cell;
                    assigned[i] = 1;
                }
                remaining -= level_mass;
                out.atoms.push_back(std::move(atom));
                out.weights.push_back(lambda);
            }
        }
        --k;
    }

    // sub-threshold residue: everything not yet assigned
    bool any = false;
    SampledFunction rem(spec, Space::physical);
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!assigned[i] && h[i] != Complex{0.0, 0.0}) {
            rem[i] = h[i];
            any = true;
        }
    }
    if (any) out.remainder = std::move(rem);
    return out;
}

} // namespace oscmult
