#include <uvol/core.hpp>

#include <atomic>
#include <sstream>

namespace uvol {

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

Point::Point(std::initializer_list<double> xs) {
    if (xs.size() == 0 || xs.size() > kMaxDim)
        fail(ErrorCode::kUnsupported, "point dimension must be in 1.." + std::to_string(kMaxDim));
    dim = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) c[i++] = x;
}

double Aabb::volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.dim; ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
}

Aabb Aabb::united(const Aabb& o) const {
    Aabb u = *this;
    for (int i = 0; i < lo.dim; ++i) {
        u.lo[i] = std::min(lo[i], o.lo[i]);
        u.hi[i] = std::max(hi[i], o.hi[i]);
    }
    return u;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) fail(ErrorCode::kParameter, "uniform_below: empty range");
    if ((n & (n - 1)) == 0) return rng() & (n - 1);
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = rng();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        std::uint64_t t = (0 - n) % n;
        while (low < t) {
            x = rng();
            m = static_cast<unsigned __int128>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

namespace {

std::uint64_t poisson_inversion(double rate, Rng& rng) {
    double u = uniform01(rng);
    double p = std::exp(-rate);
    double cdf = p;
    std::uint64_t k = 0;
    // The tail beyond a few hundred terms is below double resolution for rate < 30.
    while (u > cdf && k < 1000) {
        ++k;
        p *= rate / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

// Hormann's transformed rejection with squeeze.
std::uint64_t poisson_ptrs(double mu, Rng& rng) {
    const double smu = std::sqrt(mu);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
        double u = uniform01(rng) - 0.5;
        double v = uniform01(rng);
        double us = 0.5 - std::fabs(u);
        double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        double lhs = std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b);
        double rhs = -mu + k * log_mu - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::uint64_t>(k);
    }
}

}  // namespace

std::uint64_t poisson(double rate, Rng& rng) {
    if (rate == std::numeric_limits<double>::infinity())
        fail(ErrorCode::kParameter, "poisson: rate must be finite");
    if (!(rate >= 0.0)) fail(ErrorCode::kParameter, "poisson: rate must be a finite nonnegative number");
    if (rate == 0.0) return 0;
    if (rate < 30.0) return poisson_inversion(rate, rng);
    if (rate > 9.0e18) fail(ErrorCode::kParameter, "poisson: rate too large");
    return poisson_ptrs(rate, rng);
}

int level_for_floor(double vol, double floor) {
    if (!(vol > 0.0) || !std::isfinite(vol)) fail(ErrorCode::kParameter, "level: volume must be positive and finite");
    if (!(floor > 0.0) || !std::isfinite(floor)) fail(ErrorCode::kParameter, "level: bad threshold");
    int l = static_cast<int>(std::floor(std::log2(vol / floor)));
    // log2 may be off by one near powers of two; settle with exact scaling.
    while (std::ldexp(vol, -l) < floor) --l;
    while (std::ldexp(vol, -l) >= 2.0 * floor) ++l;
    return l;
}

int level(double vol, double n, double eps) {
    if (!(n >= 2.0) || !std::isfinite(n)) fail(ErrorCode::kParameter, "level: n must be at least 2");
    if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorCode::kParameter, "level: eps must be positive");
    return level_for_floor(vol, Thresholds{}.level_lo * threshold_log(n) / (eps * eps));
}

namespace {
std::atomic<ObjectId> next_object_id{1};
}

ObjectOracle::ObjectOracle() : id_(next_object_id.fetch_add(1, std::memory_order_relaxed)) {}

VolumeWindow VolumeWindow::for_params(double n, double eps) {
    double m = 3.0 * n / eps;
    return {m * m, m * m * m * m};
}

bool VolumeWindow::admits(double v) const {
    constexpr double slack = 1e-9;
    return v >= lo * (1.0 - slack) && v <= hi * (1.0 + slack);
}

void check_params(double n, double eps) {
    if (!(n >= 2.0) || !std::isfinite(n)) fail(ErrorCode::kParameter, "operation budget n must be at least 2");
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::kParameter, "precision eps must lie in (0,1)");
}

}  // namespace uvol
