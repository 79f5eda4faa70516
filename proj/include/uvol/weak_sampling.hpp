#pragma once

#include <uvol/core.hpp>
#include <uvol/objects.hpp>

#include <Eigen/Dense>

#include <compare>
#include <vector>

namespace uvol {

struct GridPoint {
    std::array<std::int64_t, kMaxDim> c{};
    int dim = 0;

    std::int64_t operator[](int i) const { return c[i]; }
    std::int64_t& operator[](int i) { return c[i]; }
    Point to_point() const;
    friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

bool is_prime(std::uint64_t n);
// Smallest prime >= n.
std::uint64_t next_prime(std::uint64_t n);

// h(x) = (a + b * key(x)) mod p over the grid {1..delta}^dim.
struct HashParams {
    std::uint64_t delta = 2;
    int dim = 1;
    std::uint64_t p = 2;
    std::uint64_t a = 0;
    std::uint64_t b = 0;

    std::uint64_t key(const GridPoint& x) const;
    std::uint64_t eval(const GridPoint& x) const;
    std::uint64_t eval_key(std::uint64_t key) const;
    // Largest selected hash value at level l: ceil(p / 2^l) - 1.
    std::uint64_t threshold(int l) const;
    double q(int l) const;
    // floor(log2 p).
    int top_level() const;
    std::uint64_t grid_size() const;
    std::uint64_t key_min() const;
    std::uint64_t key_max() const;
    bool decode(std::uint64_t key, GridPoint& out) const;
};

// Hashes are kept to 62-bit universes; larger grids are refused.
HashParams hash_params(std::uint64_t delta, int d, std::uint64_t a, std::uint64_t b);
HashParams make_hash(std::uint64_t delta, int d, Rng& rng);

struct Ellipsoid {
    Eigen::VectorXd center;
    // {x : (x - c)^T A (x - c) <= 1}
    Eigen::MatrixXd shape;

    bool contains(const Point& x, double slack = 0.0) const;
    double volume() const;
};

// Khachiyan's barycentric coordinate ascent; the result contains every input point.
Ellipsoid min_enclosing_ellipsoid(std::span<const Point> points, double tau = 0.01);

struct RotatedBox {
    Eigen::VectorXd center;
    Eigen::MatrixXd axes;  // orthonormal columns
    Eigen::VectorXd half;

    int dim() const { return static_cast<int>(center.size()); }
    std::vector<Halfspace> halfspaces() const;
    std::vector<Point> corners() const;
    bool contains(const Point& x, double slack = 0.0) const;
    double volume() const;
    Aabb aabb() const;
    static RotatedBox from_aabb(const Aabb& b);
};

enum class BoxMode { kWorstCase, kCalibrated };

struct BoxOptions {
    BoxMode mode = BoxMode::kWorstCase;
    bool analytic = true;
    double tau = 0.01;
};

std::uint64_t box_sample_count(int d, double n, BoxMode mode);
double box_dilation(int d, double tau, BoxMode mode);
RotatedBox bounding_box(const ObjectOracle& x, double n, Rng& rng, const BoxOptions& opts = {});

enum class FilterStrategy { kIlp, kRowLattice };

// A bounding box rounded outward to integral halfspaces a . x <= b, clipped to the grid.
struct FilterRegion {
    int dim = 0;
    std::vector<std::array<std::int64_t, kMaxDim>> normals;
    std::vector<std::int64_t> offsets;
    GridPoint lo, hi;
    bool empty = false;
};

FilterRegion filter_region(const RotatedBox& box, std::uint64_t delta);

// Grid points of x inside the region whose hash is at most threshold(l).
std::vector<GridPoint> filter_in_region(const ObjectOracle& x, const FilterRegion& region, const HashParams& hp,
                                        int l, FilterStrategy strategy);

std::vector<GridPoint> filter(const ObjectOracle& x, const HashParams& hp, int l, double n, Rng& rng,
                              FilterStrategy strategy = FilterStrategy::kIlp, const BoxOptions& opts = {});

// Smallest k >= 0 with (c + b*k) mod p <= t, if any exists.
std::optional<std::uint64_t> first_hit(std::uint64_t b, std::uint64_t c, std::uint64_t p, std::uint64_t t);

}  // namespace uvol
