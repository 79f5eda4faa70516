#include <uvol/ilp.hpp>
#include <uvol/weak_sampling.hpp>

#include <algorithm>

namespace uvol {

namespace {

using i128 = __int128;

constexpr double kNormalScale = 65536.0;

i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

}  // namespace

FilterRegion filter_region(const RotatedBox& box, std::uint64_t delta) {
    const int d = box.dim();
    if (static_cast<double>(delta) * kNormalScale * 4.0 * d > 0x1p62)
        fail(ErrorCode::kUnsupported, "grid too large for integral filter rows");
    FilterRegion r;
    r.dim = d;
    const auto corners = box.corners();
    for (const auto& h : box.halfspaces()) {
        std::array<std::int64_t, kMaxDim> a{};
        double norm1 = 0.0;
        for (int i = 0; i < d; ++i) {
            a[i] = static_cast<std::int64_t>(std::llround(h.a[i] * kNormalScale));
            norm1 += std::fabs(static_cast<double>(a[i]));
        }
        double top = -std::numeric_limits<double>::infinity(), reach = 0.0;
        for (const auto& c : corners) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) {
                s += static_cast<double>(a[i]) * c[i];
                reach = std::max(reach, std::fabs(c[i]));
            }
            top = std::max(top, s);
        }
        // Outward rounding absorbs floating error in the corner evaluation.
        double margin = 1e-9 * norm1 * (reach + 1.0) + 1.0;
        r.normals.push_back(a);
        r.offsets.push_back(static_cast<std::int64_t>(std::ceil(top + margin)));
    }
    Aabb ab = box.aabb();
    r.lo.dim = r.hi.dim = d;
    for (int i = 0; i < d; ++i) {
        double ext = ab.hi[i] - ab.lo[i];
        double pad = 0.01 * ext + 2.0;
        double lo = std::max(1.0, std::floor(ab.lo[i] - pad));
        double hi = std::min(static_cast<double>(delta), std::ceil(ab.hi[i] + pad));
        if (lo > hi) r.empty = true;
        r.lo[i] = static_cast<std::int64_t>(lo);
        r.hi[i] = static_cast<std::int64_t>(std::max(lo, hi));
    }
    return r;
}

namespace {

std::vector<GridPoint> filter_lattice(const ObjectOracle& x, const FilterRegion& reg, const HashParams& hp, int l) {
    std::vector<GridPoint> out;
    if (reg.empty) return out;
    const int d = reg.dim;
    const std::uint64_t t = hp.threshold(l);
    GridPoint g;
    g.dim = d;
    for (int i = 1; i < d; ++i) g[i] = reg.lo[i];
    for (;;) {
        // Interval of x_0 allowed by every row, given x_1..x_{d-1}.
        i128 lo = reg.lo[0], hi = reg.hi[0];
        for (size_t r = 0; r < reg.normals.size() && lo <= hi; ++r) {
            const auto& a = reg.normals[r];
            i128 rest = reg.offsets[r];
            for (int i = 1; i < d; ++i) rest -= static_cast<i128>(a[i]) * g[i];
            if (a[0] > 0) hi = std::min(hi, floor_div(rest, a[0]));
            else if (a[0] < 0) lo = std::max(lo, ceil_div(rest, a[0]));
            else if (rest < 0) hi = lo - 1;
        }
        if (lo <= hi) {
            std::uint64_t rest_key = 0, w = hp.delta;
            for (int i = 1; i < d; ++i) {
                rest_key += w * static_cast<std::uint64_t>(g[i]);
                w *= hp.delta;
            }
            // h(x_0) = (c + b * x_0) mod p along the row.
            const std::uint64_t c = hp.eval_key(rest_key);
            auto x0 = static_cast<std::uint64_t>(lo);
            const auto end = static_cast<std::uint64_t>(hi);
            while (x0 <= end) {
                std::uint64_t shift = static_cast<std::uint64_t>((static_cast<unsigned __int128>(hp.b) * x0 + c) % hp.p);
                auto k = first_hit(hp.b, shift, hp.p, t);
                if (!k || *k > end - x0) break;
                x0 += *k;
                g[0] = static_cast<std::int64_t>(x0);
                if (x.contains(g.to_point())) out.push_back(g);
                ++x0;
            }
        }
        int i = 1;
        for (; i < d; ++i) {
            if (g[i] < reg.hi[i]) {
                ++g[i];
                break;
            }
            g[i] = reg.lo[i];
        }
        if (i >= d) break;
    }
    return out;
}

std::vector<GridPoint> filter_ilp(const ObjectOracle& x, const FilterRegion& reg, const HashParams& hp, int l) {
    std::vector<GridPoint> out;
    if (reg.empty) return out;
    const int d = reg.dim;
    // Variables: x_0..x_{d-1}, y, z.
    IntegerProgram ip(d + 2);
    for (int i = 0; i < d; ++i) {
        ip.lower[i] = mpz_class(1);
        ip.upper[i] = mpz_class(static_cast<unsigned long>(hp.delta));
    }
    auto big = [](std::uint64_t v) {
        mpz_class z;
        mpz_import(z.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
        return z;
    };
    ip.lower[d] = mpz_class(0);
    ip.upper[d] = big(hp.threshold(l));
    ip.lower[d + 1] = mpz_class(0);
    ip.upper[d + 1] = big(static_cast<std::uint64_t>(d)) * big(hp.grid_size());
    for (size_t r = 0; r < reg.normals.size(); ++r) {
        std::vector<mpq_class> a(d + 2);
        for (int i = 0; i < d; ++i) a[i] = mpq_class(static_cast<long>(reg.normals[r][i]));
        ip.add(std::move(a), Sense::kLe, mpq_class(static_cast<long>(reg.offsets[r])));
    }
    {
        // a + b * key(x) = y + z p
        std::vector<mpq_class> a(d + 2);
        mpz_class w = 1;
        for (int i = 0; i < d; ++i) {
            a[i] = mpq_class(big(hp.b) * w);
            w *= big(hp.delta);
        }
        a[d] = -1;
        a[d + 1] = mpq_class(-big(hp.p));
        ip.add(std::move(a), Sense::kEq, mpq_class(-big(hp.a)));
    }
    for (const auto& sol : ilp_list(ip)) {
        GridPoint g;
        g.dim = d;
        for (int i = 0; i < d; ++i) g[i] = sol[i].get_si();
        if (x.contains(g.to_point())) out.push_back(g);
    }
    return out;
}

}  // namespace

std::vector<GridPoint> filter_in_region(const ObjectOracle& x, const FilterRegion& region, const HashParams& hp,
                                        int l, FilterStrategy strategy) {
    if (region.dim != hp.dim || x.dim() != hp.dim) fail(ErrorCode::kParameter, "filter: dimension mismatch");
    auto out = strategy == FilterStrategy::kIlp ? filter_ilp(x, region, hp, l) : filter_lattice(x, region, hp, l);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<GridPoint> filter(const ObjectOracle& x, const HashParams& hp, int l, double n, Rng& rng,
                              FilterStrategy strategy, const BoxOptions& opts) {
    RotatedBox box = bounding_box(x, n, rng, opts);
    return filter_in_region(x, filter_region(box, hp.delta), hp, l, strategy);
}

}  // namespace uvol
