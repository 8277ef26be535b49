#include "oscmult/grid.hpp"
#include "oscmult/detail/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

namespace oscmult {

namespace detail {

namespace {

// FFTW plans are cached per (dims, sign). Planning is not thread safe;
// execution on distinct buffers is. FFTW_UNALIGNED lets one plan serve any
// buffer, and FFTW_ESTIMATE keeps planning deterministic.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    void execute(Complex* data, std::span<const std::size_t> dims, int sign) {
        fftw_plan plan = nullptr;
        std::vector<int> nd(dims.begin(), dims.end());
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto key = std::make_pair(nd, sign);
            auto it = plans_.find(key);
            if (it == plans_.end()) {
                auto* buf = reinterpret_cast<fftw_complex*>(data);
                plan = fftw_plan_dft(static_cast<int>(nd.size()), nd.data(), buf, buf, sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
                plans_.emplace(std::move(key), plan);
            } else {
                plan = it->second;
            }
        }
        auto* buf = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(plan, buf, buf);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

} // namespace

void dft(Complex* data, std::span<const std::size_t> dims, int sign) {
    PlanCache::instance().execute(data, dims, sign);
}

} // namespace detail

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double parity(std::ptrdiff_t k) { return (k & 1) ? -1.0 : 1.0; }

} // namespace

std::size_t GridSpec::size() const {
    std::size_t n = points_per_axis;
    return dim == 1 ? n : n * n;
}

double GridSpec::coordinate(std::size_t i, Space space) const {
    return -extent(space) + static_cast<double>(i) * step(space);
}

void GridSpec::validate() const {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("GridSpec: dim must be 1 or 2");
    if (!(half_width > 0.0))
        throw std::invalid_argument("GridSpec: half_width must be positive");
    if (points_per_axis < 16 || !is_power_of_two(points_per_axis))
        throw std::invalid_argument("GridSpec: points_per_axis must be a power of two >= 16");
}

SampledFunction::SampledFunction(GridSpec spec, Space space)
    : spec_(spec), space_(space), values_(spec.size()) {
    spec_.validate();
}

SampledFunction::SampledFunction(GridSpec spec, Space space, std::vector<Complex> values)
    : spec_(spec), space_(space), values_(std::move(values)) {
    spec_.validate();
    if (values_.size() != spec_.size())
        throw std::invalid_argument("SampledFunction: values size does not match grid");
}

std::array<double, 2> SampledFunction::point(std::size_t i) const {
    const std::size_t n = spec_.points_per_axis;
    if (spec_.dim == 1) return {spec_.coordinate(i, space_), 0.0};
    return {spec_.coordinate(i / n, space_), spec_.coordinate(i % n, space_)};
}

double SampledFunction::radius(std::size_t i) const {
    auto p = point(i);
    return spec_.dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

SampledFunction SampledFunction::sample_radial(const GridSpec& spec, Space space,
                                               const std::function<Complex(double)>& f) {
    SampledFunction out(spec, space);
    const std::size_t n = spec.points_per_axis;
    if (spec.dim == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(std::abs(spec.coordinate(i, space)));
    } else {
        std::vector<double> c(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = spec.coordinate(i, space);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out[i * n + j] = f(std::hypot(c[i], c[j]));
    }
    return out;
}

SampledFunction SampledFunction::sample(const GridSpec& spec, Space space,
                                        const std::function<Complex(std::span<const double>)>& f) {
    SampledFunction out(spec, space);
    const std::size_t n = spec.points_per_axis;
    if (spec.dim == 1) {
        double x[1];
        for (std::size_t i = 0; i < n; ++i) {
            x[0] = spec.coordinate(i, space);
            out[i] = f(std::span<const double>(x, 1));
        }
    } else {
        double x[2];
        for (std::size_t i = 0; i < n; ++i) {
            x[0] = spec.coordinate(i, space);
            for (std::size_t j = 0; j < n; ++j) {
                x[1] = spec.coordinate(j, space);
                out[i * n + j] = f(std::span<const double>(x, 2));
            }
        }
    }
    return out;
}

double SampledFunction::max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// Index shuffle between the centered layout (index i <-> mode k = i - N/2) and
// FFTW's standard layout (mode k at index k mod N). With N even the map is
// i -> (i + N/2) mod N in both directions.
void half_shift_1d(std::span<const Complex> in, std::span<Complex> out, std::size_t n,
                   bool apply_parity) {
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + h) % n;
        const auto k = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(h);
        out[j] = apply_parity ? parity(k) * in[i] : in[i];
    }
}

void unshift_1d(std::span<const Complex> in, std::span<Complex> out, std::size_t n,
                bool apply_parity) {
    const std::size_t h = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + h) % n;
        const auto k = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(h);
        out[i] = apply_parity ? parity(k) * in[j] : in[j];
    }
}

std::vector<Complex> transformed(const SampledFunction& f, int sign, double weight,
                                 bool parity_before, bool parity_after) {
    const GridSpec& spec = f.spec();
    const std::size_t n = spec.points_per_axis;
    std::vector<Complex> buf(f.size());

    if (spec.dim == 1) {
        if (parity_before)
            half_shift_1d(f.values(), buf, n, true);
        else
            std::copy(f.values().begin(), f.values().end(), buf.begin());
        const std::size_t dims1[] = {n};
        detail::dft(buf.data(), dims1, sign);
        std::vector<Complex> out(f.size());
        if (parity_after)
            unshift_1d(buf, out, n, true);
        else
            out = buf;
        for (auto& v : out) v *= weight;
        return out;
    }

    // dim == 2: apply the shift/parity per axis.
    std::vector<Complex> work(f.size());
    auto in = f.values();
    if (parity_before) {
        std::vector<Complex> row(n), srow(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = in[i * n + j];
            half_shift_1d(row, srow, n, true);
            for (std::size_t j = 0; j < n; ++j) work[i * n + j] = srow[j];
        }
        std::vector<Complex> col(n), scol(n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = work[i * n + j];
            half_shift_1d(col, scol, n, true);
            for (std::size_t i = 0; i < n; ++i) buf[i * n + j] = scol[i];
        }
    } else {
        std::copy(in.begin(), in.end(), buf.begin());
    }
    const std::size_t dims2[] = {n, n};
    detail::dft(buf.data(), dims2, sign);
    std::vector<Complex> out(f.size());
    if (parity_after) {
        std::vector<Complex> row(n), srow(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) row[j] = buf[i * n + j];
            unshift_1d(row, srow, n, true);
            for (std::size_t j = 0; j < n; ++j) work[i * n + j] = srow[j];
        }
        std::vector<Complex> col(n), scol(n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = work[i * n + j];
            unshift_1d(col, scol, n, true);
            for (std::size_t i = 0; i < n; ++i) out[i * n + j] = scol[i];
        }
    } else {
        out = buf;
    }
    for (auto& v : out) v *= weight;
    return out;
}

} // namespace

SampledFunction forward_transform(const SampledFunction& f) {
    if (f.space() != Space::physical)
        throw std::invalid_argument("forward_transform: input must be physical-tagged");
    const GridSpec& spec = f.spec();
    const double w = std::pow(spec.spatial_step(), spec.dim);
    // F(xi_k) = dx^dim (-1)^{k1+..} DFT[f], modes recentered afterwards.
    auto out = transformed(f, FFTW_FORWARD, w, false, true);
    return SampledFunction(spec, Space::frequency, std::move(out));
}

SampledFunction inverse_transform(const SampledFunction& g) {
    if (g.space() != Space::frequency)
        throw std::invalid_argument("inverse_transform: input must be frequency-tagged");
    const GridSpec& spec = g.spec();
    const double w = std::pow(spec.frequency_step() / (2.0 * kPi), spec.dim);
    auto out = transformed(g, FFTW_BACKWARD, w, true, false);
    return SampledFunction(spec, Space::physical, std::move(out));
}

Region Region::whole() { return Region{}; }

Region Region::ball(double radius, std::array<double, 2> center) {
    Region r;
    r.kind = Kind::ball;
    r.outer = radius;
    r.center = center;
    r.validate();
    return r;
}

Region Region::annulus(double inner, double outer, std::array<double, 2> center) {
    Region r;
    r.kind = Kind::annulus;
    r.inner = inner;
    r.outer = outer;
    r.center = center;
    r.validate();
    return r;
}

Region Region::complement_ball(double radius, std::array<double, 2> center) {
    Region r;
    r.kind = Kind::complement_ball;
    r.inner = radius;
    r.center = center;
    r.validate();
    return r;
}

Region Region::shell(int k) {
    Region r;
    r.kind = Kind::shell;
    r.shell_index = k;
    return r;
}

void Region::validate() const {
    if (kind == Kind::annulus && !(0.0 <= inner && inner < outer))
        throw std::invalid_argument("Region: need 0 <= inner < outer");
    if (kind == Kind::ball && !(outer > 0.0))
        throw std::invalid_argument("Region: ball radius must be positive");
    if (kind == Kind::complement_ball && !(inner >= 0.0))
        throw std::invalid_argument("Region: complement radius must be nonnegative");
}

bool Region::contains(std::span<const double> x) const {
    double r = 0.0;
    if (x.size() == 1)
        r = std::abs(x[0] - center[0]);
    else
        r = std::hypot(x[0] - center[0], x[1] - center[1]);
    switch (kind) {
        case Kind::whole: return true;
        case Kind::ball: return r <= outer;
        case Kind::annulus: return inner <= r && r <= outer;
        case Kind::complement_ball: return r >= inner;
        case Kind::shell: {
            const double lo = std::ldexp(1.0, shell_index);
            return lo <= r && r < 2.0 * lo;
        }
    }
    return false;
}

double norm(const SampledFunction& f, NormKind p, const Region& region) {
    if (f.space() != Space::physical)
        throw std::invalid_argument("norm: input must be physical-tagged");
    const GridSpec& spec = f.spec();
    const double cell = std::pow(spec.spatial_step(), spec.dim);
    const std::size_t n = spec.points_per_axis;

    double acc = 0.0;
    double mx = 0.0;
    std::size_t hits = 0;

    auto visit = [&](double r2_unused, const Complex& v) {
        (void)r2_unused;
        ++hits;
        const double a = std::abs(v);
        switch (p) {
            case NormKind::l1: acc += a; break;
            case NormKind::l2: acc += a * a; break;
            case NormKind::linf: mx = std::max(mx, a); break;
        }
    };

    if (spec.dim == 1) {
        double x[1];
        for (std::size_t i = 0; i < n; ++i) {
            x[0] = spec.coordinate(i, Space::physical);
            if (region.contains(std::span<const double>(x, 1))) visit(0.0, f[i]);
        }
    } else {
        double x[2];
        for (std::size_t i = 0; i < n; ++i) {
            x[0] = spec.coordinate(i, Space::physical);
            for (std::size_t j = 0; j < n; ++j) {
                x[1] = spec.coordinate(j, Space::physical);
                if (region.contains(std::span<const double>(x, 2))) visit(0.0, f[i * n + j]);
            }
        }
    }

    if (hits == 0)
        throw std::invalid_argument("norm: region does not intersect the grid");

    switch (p) {
        case NormKind::l1: return acc * cell;
        case NormKind::l2: return std::sqrt(acc * cell);
        case NormKind::linf: return mx;
    }
    return 0.0;
}

ExponentFit fit_exponent(std::span<const std::pair<double, double>> series) {
    if (series.size() < 3)
        throw std::invalid_argument("fit_exponent: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [j, v] : series) {
        if (!(v > 0.0)) throw std::invalid_argument("fit_exponent: values must be positive");
        const double y = std::log2(v);
        sx += j;
        sy += y;
        sxx += j * j;
        sxy += j * y;
    }
    const double m = static_cast<double>(series.size());
    const double det = m * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit_exponent: degenerate abscissae");
    ExponentFit fit;
    fit.slope = (m * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;
    fit.sample_count = static_cast<int>(series.size());
    for (const auto& [j, v] : series) {
        const double dev = std::abs(std::log2(v) - (fit.slope * j + fit.intercept));
        fit.residual = std::max(fit.residual, dev);
    }
    return fit;
}

} // namespace oscmult
