#include <uvol/objects.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <numbers>

namespace uvol {

namespace {

void check_dim(int d) {
    if (d < 1 || d > kMaxDim) fail(ErrorCode::kUnsupported, "dimension must be in 1.." + std::to_string(kMaxDim));
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

double ball_volume(int d, double radius) {
    return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0) * std::pow(radius, d);
}

AxisBox::AxisBox(Point lo, Point hi) {
    check_dim(lo.dim);
    if (lo.dim != hi.dim) fail(ErrorCode::kParameter, "box corners differ in dimension");
    for (int i = 0; i < lo.dim; ++i)
        if (!(hi[i] > lo[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
            fail(ErrorCode::kDegenerate, "box must have positive finite side lengths");
    box_ = {lo, hi};
    volume_ = box_.volume();
}

Point AxisBox::sample(Rng& rng) const {
    Point x(box_.dim());
    for (int i = 0; i < x.dim; ++i) x[i] = box_.lo[i] + (box_.hi[i] - box_.lo[i]) * uniform01(rng);
    return x;
}

void AxisBox::sample_many(Rng& rng, std::span<Point> out) const {
    for (auto& p : out) p = AxisBox::sample(rng);
}

std::optional<double> AxisBox::inner_radius() const {
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < box_.dim(); ++i) r = std::min(r, 0.5 * (box_.hi[i] - box_.lo[i]));
    return r;
}

Simplex::Simplex(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.empty()) fail(ErrorCode::kParameter, "simplex needs vertices");
    dim_ = vertices_.front().dim;
    check_dim(dim_);
    if (static_cast<int>(vertices_.size()) != dim_ + 1)
        fail(ErrorCode::kParameter, "simplex in dimension d needs d+1 vertices");
    for (const auto& v : vertices_)
        if (v.dim != dim_) fail(ErrorCode::kParameter, "simplex vertices differ in dimension");

    const int d = dim_;
    Eigen::MatrixXd e(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) e(i, j) = vertices_[j + 1][i] - vertices_[0][i];
    double det = e.determinant();
    double scale = 1.0;
    for (int j = 0; j < d; ++j) scale *= e.col(j).norm();
    if (!(std::fabs(det) > 1e-12 * scale) || !std::isfinite(det))
        fail(ErrorCode::kDegenerate, "simplex vertices are affinely dependent");
    volume_ = std::fabs(det) / factorial(d);

    Eigen::MatrixXd inv = e.inverse();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) inv_[i * kMaxDim + j] = inv(i, j);

    // r = d * V / (total facet measure); facet measure from the Gram determinant.
    double facets = 0.0;
    for (int skip = 0; skip <= d; ++skip) {
        if (d == 1) {
            facets += 1.0;
            continue;
        }
        std::vector<int> idx;
        for (int k = 0; k <= d; ++k)
            if (k != skip) idx.push_back(k);
        Eigen::MatrixXd f(d, d - 1);
        for (int j = 1; j < d; ++j)
            for (int i = 0; i < d; ++i) f(i, j - 1) = vertices_[idx[j]][i] - vertices_[idx[0]][i];
        facets += std::sqrt(std::max(0.0, (f.transpose() * f).determinant())) / factorial(d - 1);
    }
    inradius_ = d * volume_ / facets;

    bounds_ = {vertices_[0], vertices_[0]};
    for (const auto& v : vertices_) bounds_ = bounds_.united({v, v});
}

Point Simplex::sample(Rng& rng) const {
    // Spacings of sorted uniforms are uniform on the standard simplex.
    std::array<double, kMaxDim + 2> u{};
    u[0] = 0.0;
    for (int i = 1; i <= dim_; ++i) u[i] = uniform01(rng);
    u[dim_ + 1] = 1.0;
    for (int i = 2; i <= dim_; ++i)
        for (int j = i; j > 1 && u[j - 1] > u[j]; --j) std::swap(u[j - 1], u[j]);
    Point x(dim_);
    for (int k = 0; k <= dim_; ++k) {
        double w = u[k + 1] - u[k];
        for (int i = 0; i < dim_; ++i) x[i] += w * vertices_[k][i];
    }
    return x;
}

void Simplex::sample_many(Rng& rng, std::span<Point> out) const {
    for (auto& p : out) p = Simplex::sample(rng);
}

bool Simplex::contains(const Point& x) const {
    if (!bounds_.contains(x)) return false;
    constexpr double tol = 1e-12;
    double diff[kMaxDim];
    for (int i = 0; i < dim_; ++i) diff[i] = x[i] - vertices_[0][i];
    double sum = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double lam = 0.0;
        for (int j = 0; j < dim_; ++j) lam += inv_[i * kMaxDim + j] * diff[j];
        if (lam < -tol) return false;
        sum += lam;
    }
    return sum <= 1.0 + tol;
}

Ball::Ball(Point center, double radius) : center_(center), radius_(radius) {
    check_dim(center.dim);
    if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorCode::kDegenerate, "ball radius must be positive");
    volume_ = ball_volume(center.dim, radius);
}

Point Ball::sample(Rng& rng) const {
    for (;;) {
        Point x(center_.dim);
        double r2 = 0.0;
        for (int i = 0; i < x.dim; ++i) {
            double u = 2.0 * uniform01(rng) - 1.0;
            x[i] = u;
            r2 += u * u;
        }
        if (r2 > 1.0) continue;
        for (int i = 0; i < x.dim; ++i) x[i] = center_[i] + radius_ * x[i];
        return x;
    }
}

bool Ball::contains(const Point& x) const {
    double r2 = 0.0;
    for (int i = 0; i < center_.dim; ++i) {
        double t = x[i] - center_[i];
        r2 += t * t;
    }
    return r2 <= radius_ * radius_;
}

Aabb Ball::bounds() const {
    Aabb b{center_, center_};
    for (int i = 0; i < center_.dim; ++i) {
        b.lo[i] -= radius_;
        b.hi[i] += radius_;
    }
    return b;
}

namespace {

struct Row {
    std::array<double, kMaxDim> a{};
    double b = 0.0;
};

// Normalizes rows and drops near-duplicates; returns false if some row is infeasible.
bool normalize_rows(std::vector<Row>& rows, int d) {
    std::vector<Row> out;
    for (auto r : rows) {
        double norm = 0.0;
        for (int i = 0; i < d; ++i) norm += r.a[i] * r.a[i];
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            if (r.b < -1e-9) return false;
            continue;
        }
        for (int i = 0; i < d; ++i) r.a[i] /= norm;
        r.b /= norm;
        bool dup = false;
        for (auto& o : out) {
            double diff = 0.0;
            for (int i = 0; i < d; ++i) diff = std::max(diff, std::fabs(o.a[i] - r.a[i]));
            if (diff < 1e-10) {
                o.b = std::min(o.b, r.b);
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(r);
    }
    rows = std::move(out);
    return true;
}

// Lasserre's recursion: vol_d(P) = (1/d) sum_i (b_i / |a_ij|) vol_{d-1}(Q_i),
// where Q_i is facet i with variable j eliminated.
double lasserre(std::vector<Row> rows, int d) {
    if (!normalize_rows(rows, d)) return 0.0;
    if (d == 1) {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) {
            if (r.a[0] > 0) hi = std::min(hi, r.b / r.a[0]);
            else lo = std::max(lo, r.b / r.a[0]);
        }
        return std::max(0.0, hi - lo);
    }
    double total = 0.0;
    for (size_t f = 0; f < rows.size(); ++f) {
        const Row& face = rows[f];
        if (std::fabs(face.b) < 1e-300) continue;
        int j = 0;
        for (int i = 1; i < d; ++i)
            if (std::fabs(face.a[i]) > std::fabs(face.a[j])) j = i;
        std::vector<Row> sub;
        sub.reserve(rows.size() - 1);
        for (size_t g = 0; g < rows.size(); ++g) {
            if (g == f) continue;
            const Row& r = rows[g];
            double t = r.a[j] / face.a[j];
            Row s;
            int k = 0;
            for (int i = 0; i < d; ++i)
                if (i != j) s.a[k++] = r.a[i] - t * face.a[i];
            s.b = r.b - t * face.b;
            sub.push_back(s);
        }
        total += face.b / std::fabs(face.a[j]) * lasserre(std::move(sub), d - 1);
    }
    return total / d;
}

}  // namespace

HalfspacePolytope::HalfspacePolytope(std::vector<Halfspace> halfspaces, Point center, double r, double R)
    : halfspaces_(std::move(halfspaces)), center_(center), r_(r), R_(R) {
    const int d = center.dim;
    check_dim(d);
    if (!(r > 0.0) || !(R > 0.0) || !std::isfinite(R)) fail(ErrorCode::kParameter, "polytope needs r > 0 and finite R > 0");
    for (const auto& h : halfspaces_) {
        if (h.a.dim != d) fail(ErrorCode::kParameter, "halfspace normal has wrong dimension");
        double norm = 0.0, dot = 0.0;
        for (int i = 0; i < d; ++i) {
            norm += h.a[i] * h.a[i];
            dot += h.a[i] * center[i];
        }
        norm = std::sqrt(norm);
        if (!(norm > 0.0)) fail(ErrorCode::kParameter, "halfspace normal is zero");
        if (h.b - dot < r * norm * (1.0 - 1e-9))
            fail(ErrorCode::kUsage, "inner ball certificate violated: halfspace slack at center is below r");
    }
    for (int i = 0; i < d; ++i)
        if (center[i] - r < -1e-9 * R || center[i] + r > R * (1.0 + 1e-9))
            fail(ErrorCode::kUsage, "inner ball is not inside [0,R]^d");

    // The enclosing cube closes the body, so it is bounded by construction.
    std::vector<Halfspace> all = halfspaces_;
    for (int i = 0; i < d; ++i) {
        Halfspace up{Point(d), R};
        up.a[i] = 1.0;
        Halfspace down{Point(d), 0.0};
        down.a[i] = -1.0;
        all.push_back(up);
        all.push_back(down);
    }

    // Vertices: every d-subset of tight constraints with a feasible unique solution.
    const int m = static_cast<int>(all.size());
    std::vector<int> pick(d);
    auto feasible = [&](const Eigen::VectorXd& x) {
        for (const auto& h : all) {
            double s = 0.0, norm = 0.0;
            for (int i = 0; i < d; ++i) {
                s += h.a[i] * x[i];
                norm += h.a[i] * h.a[i];
            }
            if (s > h.b + 1e-9 * std::sqrt(norm) * std::max(1.0, R)) return false;
        }
        return true;
    };
    std::function<void(int, int)> choose = [&](int start, int depth) {
        if (depth == d) {
            Eigen::MatrixXd a(d, d);
            Eigen::VectorXd b(d);
            for (int k = 0; k < d; ++k) {
                for (int i = 0; i < d; ++i) a(k, i) = all[pick[k]].a[i];
                b[k] = all[pick[k]].b;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (lu.rank() < d) return;
            Eigen::VectorXd x = lu.solve(b);
            if (!feasible(x)) return;
            Point v(d);
            for (int i = 0; i < d; ++i) v[i] = x[i];
            vertices_.push_back(v);
            return;
        }
        for (int k = start; k < m; ++k) {
            pick[depth] = k;
            choose(k + 1, depth + 1);
        }
    };
    choose(0, 0);
    if (vertices_.empty()) fail(ErrorCode::kDegenerate, "polytope has no vertices");
    bounds_ = {vertices_[0], vertices_[0]};
    for (const auto& v : vertices_) bounds_ = bounds_.united({v, v});

    // Volume about the center, where every right-hand side is positive.
    std::vector<Row> rows;
    for (const auto& h : all) {
        Row row;
        double dot = 0.0;
        for (int i = 0; i < d; ++i) {
            row.a[i] = h.a[i];
            dot += h.a[i] * center[i];
        }
        row.b = h.b - dot;
        rows.push_back(row);
    }
    volume_ = lasserre(std::move(rows), d);
    if (!(volume_ > 0.0)) fail(ErrorCode::kDegenerate, "polytope has zero volume");
}

Point HalfspacePolytope::sample(Rng& rng) const {
    for (;;) {
        Point x(center_.dim);
        for (int i = 0; i < x.dim; ++i) x[i] = bounds_.lo[i] + (bounds_.hi[i] - bounds_.lo[i]) * uniform01(rng);
        if (contains(x)) return x;
    }
}

bool HalfspacePolytope::contains(const Point& x) const {
    if (!bounds_.contains(x)) return false;
    for (const auto& h : halfspaces_) {
        double s = 0.0;
        for (int i = 0; i < center_.dim; ++i) s += h.a[i] * x[i];
        if (s > h.b) return false;
    }
    return true;
}

namespace {
bool lex_less(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.c.begin(), a.c.begin() + a.dim, b.c.begin(), b.c.begin() + b.dim);
}
bool same_point(const Point& a, const Point& b) {
    return a.dim == b.dim && std::equal(a.c.begin(), a.c.begin() + a.dim, b.c.begin());
}
}  // namespace

DiscretePointSet::DiscretePointSet(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) fail(ErrorCode::kDegenerate, "point set is empty");
    check_dim(points_.front().dim);
    for (const auto& p : points_)
        if (p.dim != points_.front().dim) fail(ErrorCode::kParameter, "points differ in dimension");
    std::sort(points_.begin(), points_.end(), lex_less);
    points_.erase(std::unique(points_.begin(), points_.end(), same_point), points_.end());
    bounds_ = {points_[0], points_[0]};
    for (const auto& p : points_) bounds_ = bounds_.united({p, p});
}

Point DiscretePointSet::sample(Rng& rng) const { return points_[uniform_below(rng, points_.size())]; }

bool DiscretePointSet::contains(const Point& x) const {
    if (x.dim != dim()) return false;
    auto it = std::lower_bound(points_.begin(), points_.end(), x, lex_less);
    return it != points_.end() && same_point(*it, x);
}

ScaledOracle::ScaledOracle(ObjectPtr base, double volume_scale)
    : base_(std::move(base)), scale_(volume_scale), size_(base_->size() * volume_scale) {
    if (!(volume_scale > 0.0) || !std::isfinite(size_)) fail(ErrorCode::kParameter, "volume scale must be positive");
}

CountingOracle::CountingOracle(ObjectPtr base, OracleCounters* counters)
    : base_(std::move(base)), counters_(counters) {}

double CountingOracle::size() const {
    ++counters_->size;
    return base_->size();
}

Point CountingOracle::sample(Rng& rng) const {
    ++counters_->sample;
    return base_->sample(rng);
}

void CountingOracle::sample_many(Rng& rng, std::span<Point> out) const {
    counters_->sample += out.size();
    base_->sample_many(rng, out);
}

bool CountingOracle::contains(const Point& x) const {
    ++counters_->contains;
    return base_->contains(x);
}

const ObjectOracle& underlying(const ObjectOracle& x) {
    if (auto* s = dynamic_cast<const ScaledOracle*>(&x)) return underlying(*s->base());
    if (auto* c = dynamic_cast<const CountingOracle*>(&x)) return underlying(*c->base());
    return x;
}

}  // namespace uvol
