#include <uvol/truth.hpp>

#include <uvol/objects.hpp>

#include <algorithm>
#include <set>

namespace uvol::truth {

double box_union(std::span<const Aabb> boxes) {
    if (boxes.empty()) return 0.0;
    const int d = boxes.front().dim();
    if (d < 1 || d > 3) fail(ErrorCode::kUnsupported, "exact box union needs d <= 3");
    std::array<std::vector<double>, 3> cuts;
    for (const auto& b : boxes) {
        if (b.dim() != d) fail(ErrorCode::kParameter, "mixed dimensions");
        for (int i = 0; i < d; ++i) {
            cuts[i].push_back(b.lo[i]);
            cuts[i].push_back(b.hi[i]);
        }
    }
    std::array<std::size_t, 3> ext{1, 1, 1};
    for (int i = 0; i < d; ++i) {
        auto& c = cuts[i];
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        ext[i] = c.size();
    }
    const std::size_t cells = ext[0] * ext[1] * ext[2];
    if (cells > 200'000'000) fail(ErrorCode::kUnsupported, "too many boxes for exact union");
    std::vector<std::int32_t> diff(cells, 0);
    auto at = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * ext[1] + j) * ext[0] + i; };
    for (const auto& b : boxes) {
        std::array<std::size_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
        bool empty = false;
        for (int i = 0; i < d; ++i) {
            lo[i] = static_cast<std::size_t>(std::lower_bound(cuts[i].begin(), cuts[i].end(), b.lo[i]) - cuts[i].begin());
            hi[i] = static_cast<std::size_t>(std::lower_bound(cuts[i].begin(), cuts[i].end(), b.hi[i]) - cuts[i].begin());
            empty |= lo[i] == hi[i];
        }
        if (empty) continue;
        for (int mask = 0; mask < (1 << d); ++mask) {
            std::array<std::size_t, 3> c{0, 0, 0};
            int sign = 1;
            for (int i = 0; i < d; ++i) {
                c[i] = (mask >> i & 1) ? hi[i] : lo[i];
                if (mask >> i & 1) sign = -sign;
            }
            diff[at(c[0], c[1], c[2])] += sign;
        }
    }
    for (int axis = 0; axis < d; ++axis)
        for (std::size_t k = 0; k < ext[2]; ++k)
            for (std::size_t j = 0; j < ext[1]; ++j)
                for (std::size_t i = 0; i < ext[0]; ++i) {
                    std::array<std::size_t, 3> c{i, j, k};
                    if (c[axis] == 0) continue;
                    auto prev = c;
                    --prev[axis];
                    diff[at(i, j, k)] += diff[at(prev[0], prev[1], prev[2])];
                }
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < std::max<std::size_t>(ext[2], 2); ++k)
        for (std::size_t j = 0; j + 1 < std::max<std::size_t>(ext[1], 2); ++j)
            for (std::size_t i = 0; i + 1 < ext[0]; ++i) {
                if (diff[at(i, j, k)] <= 0) continue;
                double v = cuts[0][i + 1] - cuts[0][i];
                if (d > 1) v *= cuts[1][j + 1] - cuts[1][j];
                if (d > 2) v *= cuts[2][k + 1] - cuts[2][k];
                total += v;
            }
    return total;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
    });
    auto cross = [](const Point& o, const Point& a, const Point& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    if (pts.size() < 3) return pts;
    std::vector<Point> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

namespace {

struct Polygon {
    std::vector<Point> v;  // counter-clockwise
    double xlo, xhi, ylo, yhi;
};

// Vertical extent of a convex polygon at abscissa x strictly inside its x-range.
std::pair<double, double> chord(const Polygon& p, double x) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < p.v.size(); ++i) {
        const Point& a = p.v[i];
        const Point& b = p.v[(i + 1) % p.v.size()];
        if ((a[0] - x) * (b[0] - x) > 0 || a[0] == b[0]) continue;
        double y = a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0]);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    return {lo, hi};
}

}  // namespace

double polygon_union_area(std::span<const std::vector<Point>> polygons) {
    std::vector<Polygon> polys;
    std::vector<double> xs;
    for (const auto& raw : polygons) {
        Polygon p{convex_hull(raw), 0, 0, 0, 0};
        if (p.v.size() < 3) continue;
        p.xlo = p.xhi = p.v[0][0];
        p.ylo = p.yhi = p.v[0][1];
        for (const auto& q : p.v) {
            p.xlo = std::min(p.xlo, q[0]);
            p.xhi = std::max(p.xhi, q[0]);
            p.ylo = std::min(p.ylo, q[1]);
            p.yhi = std::max(p.yhi, q[1]);
            xs.push_back(q[0]);
        }
        polys.push_back(std::move(p));
    }
    // Edge crossings split slabs so the union's structure is fixed inside each one.
    for (std::size_t i = 0; i < polys.size(); ++i)
        for (std::size_t j = i + 1; j < polys.size(); ++j) {
            const auto &P = polys[i], &Q = polys[j];
            if (P.xhi < Q.xlo || Q.xhi < P.xlo || P.yhi < Q.ylo || Q.yhi < P.ylo) continue;
            for (std::size_t a = 0; a < P.v.size(); ++a)
                for (std::size_t b = 0; b < Q.v.size(); ++b) {
                    const Point &p0 = P.v[a], &p1 = P.v[(a + 1) % P.v.size()];
                    const Point &q0 = Q.v[b], &q1 = Q.v[(b + 1) % Q.v.size()];
                    double rx = p1[0] - p0[0], ry = p1[1] - p0[1];
                    double sx = q1[0] - q0[0], sy = q1[1] - q0[1];
                    double den = rx * sy - ry * sx;
                    if (den == 0.0) continue;
                    double t = ((q0[0] - p0[0]) * sy - (q0[1] - p0[1]) * sx) / den;
                    double u = ((q0[0] - p0[0]) * ry - (q0[1] - p0[1]) * rx) / den;
                    if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) xs.push_back(p0[0] + t * rx);
                }
        }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(polys.begin(), polys.end(), [](const Polygon& a, const Polygon& b) { return a.xlo < b.xlo; });

    double area = 0.0;
    std::vector<std::pair<double, double>> iv;
    for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
        const double x0 = xs[s], x1 = xs[s + 1];
        if (x1 <= x0) continue;
        // Union length is linear across a slab, so the midpoint rule is exact.
        const double xm = 0.5 * (x0 + x1);
        iv.clear();
        for (const auto& p : polys) {
            if (p.xlo > xm) break;
            if (p.xhi < xm) continue;
            auto [lo, hi] = chord(p, xm);
            if (lo < hi) iv.emplace_back(lo, hi);
        }
        std::sort(iv.begin(), iv.end());
        double len = 0.0, cur_lo = 0.0, cur_hi = -std::numeric_limits<double>::infinity();
        for (auto [lo, hi] : iv) {
            if (lo > cur_hi) {
                if (cur_hi > cur_lo) len += cur_hi - cur_lo;
                cur_lo = lo;
                cur_hi = hi;
            } else {
                cur_hi = std::max(cur_hi, hi);
            }
        }
        if (cur_hi > cur_lo) len += cur_hi - cur_lo;
        area += len * (x1 - x0);
    }
    return area;
}

std::uint64_t grid_count(std::span<const ObjectPtr> objects, std::uint64_t delta) {
    if (objects.empty()) return 0;
    const int d = objects.front()->dim();
    double cells = std::pow(static_cast<double>(delta), d);
    if (cells > 1e8) fail(ErrorCode::kUnsupported, "grid too large for an exact count");
    std::vector<bool> hit(static_cast<std::size_t>(cells), false);
    std::uint64_t count = 0;
    for (const auto& x : objects) {
        Aabb b = x->bounds();
        std::array<std::int64_t, kMaxDim> lo{}, hi{};
        bool empty = false;
        for (int i = 0; i < d; ++i) {
            lo[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(b.lo[i])));
            hi[i] = std::min<std::int64_t>(static_cast<std::int64_t>(delta), static_cast<std::int64_t>(std::floor(b.hi[i])));
            empty |= lo[i] > hi[i];
        }
        if (empty) continue;
        std::array<std::int64_t, kMaxDim> g = lo;
        for (;;) {
            std::size_t idx = 0, w = 1;
            Point p(d);
            for (int i = 0; i < d; ++i) {
                p[i] = static_cast<double>(g[i]);
                idx += static_cast<std::size_t>(g[i] - 1) * w;
                w *= delta;
            }
            if (!hit[idx] && x->contains(p)) {
                hit[idx] = true;
                ++count;
            }
            int i = 0;
            for (; i < d; ++i) {
                if (g[i] < hi[i]) {
                    ++g[i];
                    break;
                }
                g[i] = lo[i];
            }
            if (i == d) break;
        }
    }
    return count;
}

TruthResult monte_carlo(std::span<const ObjectPtr> objects, std::uint64_t samples, Rng& rng) {
    TruthResult r{0.0, "monte-carlo", 0.0};
    if (objects.empty()) return r;
    if (samples < 2) fail(ErrorCode::kParameter, "need at least two samples");
    std::vector<double> cum;
    double total = 0.0;
    for (const auto& x : objects) cum.push_back(total += underlying(*x).size());
    double sum = 0.0, sum2 = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        double u = uniform01(rng) * total;
        auto i = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
        i = std::min(i, objects.size() - 1);
        Point p = objects[i]->sample(rng);
        int cover = 0;
        for (const auto& y : objects) cover += y->contains(p);
        double w = 1.0 / std::max(cover, 1);
        sum += w;
        sum2 += w * w;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 / n - mean * mean) * n / (n - 1));
    r.value = total * mean;
    r.stderr_ = total * std::sqrt(var / n);
    return r;
}

TruthResult union_volume(std::span<const ObjectPtr> objects, std::uint64_t mc_samples, Rng& rng) {
    if (objects.empty()) return {0.0, "empty", 0.0};
    const int d = objects.front()->dim();
    bool boxes = true, polygons = d == 2, points = true;
    for (const auto& x : objects) {
        const std::string k = underlying(*x).kind();
        boxes &= k == "box";
        polygons &= k == "box" || k == "simplex" || k == "polytope";
        points &= k == "points";
    }
    if (boxes && d <= 3) {
        std::vector<Aabb> bs;
        for (const auto& x : objects) bs.push_back(static_cast<const AxisBox&>(underlying(*x)).box());
        return {box_union(bs), "box-union", 0.0};
    }
    if (polygons) {
        std::vector<std::vector<Point>> ps;
        for (const auto& x : objects) {
            const ObjectOracle& u = underlying(*x);
            if (auto* b = dynamic_cast<const AxisBox*>(&u)) {
                const Aabb& a = b->box();
                ps.push_back({a.lo, Point{a.hi[0], a.lo[1]}, a.hi, Point{a.lo[0], a.hi[1]}});
            } else if (auto* s = dynamic_cast<const Simplex*>(&u)) {
                ps.push_back(s->vertices());
            } else {
                ps.push_back(static_cast<const HalfspacePolytope&>(u).vertices());
            }
        }
        return {polygon_union_area(ps), "polygon-sweep", 0.0};
    }
    if (points) {
        std::set<std::array<double, kMaxDim>> all;
        for (const auto& x : objects)
            for (const auto& p : static_cast<const DiscretePointSet&>(underlying(*x)).points()) all.insert(p.c);
        return {static_cast<double>(all.size()), "point-union", 0.0};
    }
    return monte_carlo(objects, mc_samples, rng);
}

}  // namespace uvol::truth
