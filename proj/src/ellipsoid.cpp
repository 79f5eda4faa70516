#include <uvol/weak_sampling.hpp>

#include <Eigen/Eigenvalues>

#include <numbers>

namespace uvol {

namespace {

Eigen::VectorXd vec(const Point& p) {
    Eigen::VectorXd v(p.dim);
    for (int i = 0; i < p.dim; ++i) v[i] = p[i];
    return v;
}

Point point(const Eigen::VectorXd& v) {
    Point p(static_cast<int>(v.size()));
    for (int i = 0; i < p.dim; ++i) p[i] = v[i];
    return p;
}

}  // namespace

bool Ellipsoid::contains(const Point& x, double slack) const {
    Eigen::VectorXd d = vec(x) - center;
    return d.dot(shape * d) <= 1.0 + slack;
}

double Ellipsoid::volume() const {
    const int d = static_cast<int>(center.size());
    return ball_volume(d, 1.0) / std::sqrt(shape.determinant());
}

Ellipsoid min_enclosing_ellipsoid(std::span<const Point> points, double tau) {
    if (points.empty()) fail(ErrorCode::kDegenerate, "enclosing ellipsoid of no points");
    if (!(tau > 0.0 && tau <= 0.1)) fail(ErrorCode::kParameter, "tau must lie in (0, 0.1]");
    const int d = points.front().dim;
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd p(d, n);
    for (Eigen::Index j = 0; j < n; ++j) p.col(j) = vec(points[j]);

    Eigen::VectorXd mean = p.rowwise().mean();
    Eigen::MatrixXd centered = p.colwise() - mean;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(centered);
    lu.setThreshold(1e-10);
    if (n < d + 1 || lu.rank() < d) fail(ErrorCode::kDegenerate, "points are affinely dependent");

    Eigen::MatrixXd q(d + 1, n);
    q.topRows(d) = p;
    q.row(d).setOnes();
    Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    const double target = (1.0 + tau) * (d + 1);
    double max_m = 0.0;
    for (int iter = 0; iter < 200000; ++iter) {
        Eigen::MatrixXd x = q * u.asDiagonal() * q.transpose();
        Eigen::LLT<Eigen::MatrixXd> llt(x);
        Eigen::MatrixXd solved = llt.solve(q);
        Eigen::VectorXd m = (q.array() * solved.array()).colwise().sum().transpose();
        Eigen::Index j;
        max_m = m.maxCoeff(&j);
        if (max_m <= target) break;
        double step = (max_m - d - 1.0) / ((d + 1.0) * (max_m - 1.0));
        u *= 1.0 - step;
        u[j] += step;
    }

    Ellipsoid e;
    e.center = p * u;
    Eigen::MatrixXd sigma = p * u.asDiagonal() * p.transpose() - e.center * e.center.transpose();
    // (x_j - c)^T sigma^-1 (x_j - c) = M_j - 1, so this scaling covers every point.
    e.shape = sigma.inverse() / (max_m - 1.0);
    e.shape = 0.5 * (e.shape + e.shape.transpose());
    Eigen::LLT<Eigen::MatrixXd> check(e.shape);
    if (check.info() != Eigen::Success) fail(ErrorCode::kDegenerate, "ellipsoid shape is not positive definite");
    return e;
}

std::vector<Halfspace> RotatedBox::halfspaces() const {
    std::vector<Halfspace> out;
    const int d = dim();
    for (int j = 0; j < d; ++j) {
        Eigen::VectorXd u = axes.col(j);
        double c = u.dot(center);
        out.push_back({point(u), c + half[j]});
        out.push_back({point(-u), -c + half[j]});
    }
    return out;
}

std::vector<Point> RotatedBox::corners() const {
    const int d = dim();
    std::vector<Point> out;
    for (int mask = 0; mask < (1 << d); ++mask) {
        Eigen::VectorXd v = center;
        for (int j = 0; j < d; ++j) v += ((mask >> j) & 1 ? 1.0 : -1.0) * half[j] * axes.col(j);
        out.push_back(point(v));
    }
    return out;
}

bool RotatedBox::contains(const Point& x, double slack) const {
    Eigen::VectorXd t = axes.transpose() * (vec(x) - center);
    for (int j = 0; j < dim(); ++j)
        if (std::fabs(t[j]) > half[j] * (1.0 + slack)) return false;
    return true;
}

double RotatedBox::volume() const {
    double v = 1.0;
    for (int j = 0; j < dim(); ++j) v *= 2.0 * half[j];
    return v;
}

Aabb RotatedBox::aabb() const {
    const int d = dim();
    Aabb b{Point(d), Point(d)};
    for (int i = 0; i < d; ++i) {
        double ext = 0.0;
        for (int j = 0; j < d; ++j) ext += std::fabs(axes(i, j)) * half[j];
        b.lo[i] = center[i] - ext;
        b.hi[i] = center[i] + ext;
    }
    return b;
}

RotatedBox RotatedBox::from_aabb(const Aabb& b) {
    const int d = b.dim();
    RotatedBox r;
    r.center.resize(d);
    r.half.resize(d);
    r.axes = Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i) {
        r.center[i] = 0.5 * (b.lo[i] + b.hi[i]);
        r.half[i] = 0.5 * (b.hi[i] - b.lo[i]);
    }
    return r;
}

std::uint64_t box_sample_count(int d, double n, BoxMode mode) {
    if (mode == BoxMode::kCalibrated) return 512 * static_cast<std::uint64_t>(d);
    double k = std::pow(6.0 * d * d, d) * (d + 2.0 * threshold_log(n));
    return static_cast<std::uint64_t>(std::ceil(k));
}

double box_dilation(int d, double tau, BoxMode mode) {
    if (mode == BoxMode::kCalibrated) return 2.0 * (1.0 + tau);
    return 6.0 * d * d * (1.0 + tau);
}

RotatedBox bounding_box(const ObjectOracle& x, double n, Rng& rng, const BoxOptions& opts) {
    if (opts.analytic && x.has_analytic_bounds()) return RotatedBox::from_aabb(x.bounds());
    const int d = x.dim();
    const std::uint64_t k = box_sample_count(d, n, opts.mode);
    if (k > 50'000'000) fail(ErrorCode::kConfig, "bounding box sample count is beyond desk scale; use calibrated mode");
    std::vector<Point> pts;
    pts.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i) pts.push_back(x.sample(rng));
    Ellipsoid e = min_enclosing_ellipsoid(pts, opts.tau);
    const double scale = box_dilation(d, opts.tau, opts.mode);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e.shape);
    RotatedBox b;
    b.center = e.center;
    b.axes = eig.eigenvectors();
    b.half.resize(d);
    for (int j = 0; j < d; ++j) b.half[j] = scale / std::sqrt(eig.eigenvalues()[j]);
    return b;
}

}  // namespace uvol
