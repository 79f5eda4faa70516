#pragma once

#include <uvol/core.hpp>

#include <vector>

namespace uvol {

class AxisBox final : public ObjectOracle {
public:
    AxisBox(Point lo, Point hi);

    int dim() const override { return box_.dim(); }
    double size() const override { return volume_; }
    Point sample(Rng& rng) const override;
    void sample_many(Rng& rng, std::span<Point> out) const override;
    bool contains(const Point& x) const override { return box_.contains(x); }
    Aabb bounds() const override { return box_; }
    bool has_analytic_bounds() const override { return true; }
    std::optional<double> inner_radius() const override;
    std::string kind() const override { return "box"; }

    const Aabb& box() const { return box_; }

private:
    Aabb box_;
    double volume_;
};

class Simplex final : public ObjectOracle {
public:
    explicit Simplex(std::vector<Point> vertices);

    int dim() const override { return dim_; }
    double size() const override { return volume_; }
    Point sample(Rng& rng) const override;
    void sample_many(Rng& rng, std::span<Point> out) const override;
    bool contains(const Point& x) const override;
    Aabb bounds() const override { return bounds_; }
    bool has_analytic_bounds() const override { return true; }
    std::optional<double> inner_radius() const override { return inradius_; }
    std::string kind() const override { return "simplex"; }

    const std::vector<Point>& vertices() const { return vertices_; }

private:
    int dim_;
    std::vector<Point> vertices_;
    // Barycentric map: lambda_{1..d} = inv_ * (x - v0), lambda_0 = 1 - sum.
    std::array<double, kMaxDim * kMaxDim> inv_{};
    double volume_;
    double inradius_;
    Aabb bounds_;
};

class Ball final : public ObjectOracle {
public:
    Ball(Point center, double radius);

    int dim() const override { return center_.dim; }
    double size() const override { return volume_; }
    Point sample(Rng& rng) const override;
    bool contains(const Point& x) const override;
    Aabb bounds() const override;
    bool has_analytic_bounds() const override { return true; }
    std::optional<double> inner_radius() const override { return radius_; }
    std::string kind() const override { return "ball"; }

    const Point& center() const { return center_; }
    double radius() const { return radius_; }

private:
    Point center_;
    double radius_;
    double volume_;
};

// Halfspaces a_i . x <= b_i.
struct Halfspace {
    Point a;
    double b = 0.0;
};

class HalfspacePolytope final : public ObjectOracle {
public:
    // center and r certify an inscribed ball; R bounds the coordinates.
    HalfspacePolytope(std::vector<Halfspace> halfspaces, Point center, double r, double R);

    int dim() const override { return center_.dim; }
    double size() const override { return volume_; }
    Point sample(Rng& rng) const override;
    bool contains(const Point& x) const override;
    Aabb bounds() const override { return bounds_; }
    std::optional<double> inner_radius() const override { return r_; }
    std::string kind() const override { return "polytope"; }

    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const Point& center() const { return center_; }
    double r() const { return r_; }
    double R() const { return R_; }

private:
    std::vector<Halfspace> halfspaces_;
    Point center_;
    double r_;
    double R_;
    std::vector<Point> vertices_;
    Aabb bounds_;
    double volume_;
};

// Counting measure on a finite set of distinct points.
class DiscretePointSet final : public ObjectOracle {
public:
    explicit DiscretePointSet(std::vector<Point> points);

    int dim() const override { return points_.front().dim; }
    double size() const override { return static_cast<double>(points_.size()); }
    Point sample(Rng& rng) const override;
    bool contains(const Point& x) const override;
    Aabb bounds() const override { return bounds_; }
    std::string kind() const override { return "points"; }

    const std::vector<Point>& points() const { return points_; }

private:
    std::vector<Point> points_;  // sorted lexicographically
    Aabb bounds_;
};

// Multiplies the measure by a constant; geometry is untouched.
class ScaledOracle final : public ObjectOracle {
public:
    ScaledOracle(ObjectPtr base, double volume_scale);

    int dim() const override { return base_->dim(); }
    double size() const override { return size_; }
    Point sample(Rng& rng) const override { return base_->sample(rng); }
    void sample_many(Rng& rng, std::span<Point> out) const override { base_->sample_many(rng, out); }
    bool contains(const Point& x) const override { return base_->contains(x); }
    Aabb bounds() const override { return base_->bounds(); }
    bool has_analytic_bounds() const override { return base_->has_analytic_bounds(); }
    std::optional<double> inner_radius() const override { return base_->inner_radius(); }
    std::string kind() const override { return base_->kind(); }

    const ObjectPtr& base() const { return base_; }
    double volume_scale() const { return scale_; }

private:
    ObjectPtr base_;
    double scale_;
    double size_;
};

struct OracleCounters {
    std::uint64_t size = 0;
    std::uint64_t sample = 0;
    std::uint64_t contains = 0;

    std::uint64_t total() const { return size + sample + contains; }
};

// Counts queries into a caller-owned tally; single-threaded use only.
class CountingOracle final : public ObjectOracle {
public:
    CountingOracle(ObjectPtr base, OracleCounters* counters);

    int dim() const override { return base_->dim(); }
    double size() const override;
    Point sample(Rng& rng) const override;
    void sample_many(Rng& rng, std::span<Point> out) const override;
    bool contains(const Point& x) const override;
    Aabb bounds() const override { return base_->bounds(); }
    bool has_analytic_bounds() const override { return base_->has_analytic_bounds(); }
    std::optional<double> inner_radius() const override { return base_->inner_radius(); }
    std::string kind() const override { return base_->kind(); }

    const ObjectPtr& base() const { return base_; }

private:
    ObjectPtr base_;
    OracleCounters* counters_;
};

// Strips Scaled/Counting wrappers.
const ObjectOracle& underlying(const ObjectOracle& x);

double ball_volume(int d, double radius);

}  // namespace uvol
