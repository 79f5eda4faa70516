#pragma once

#include <uvol/core.hpp>

#include <span>
#include <string>

namespace uvol::truth {

struct TruthResult {
    double value = 0.0;
    std::string method;
    // Zero for exact methods.
    double stderr_ = 0.0;
};

// Union volume of axis-aligned boxes, d <= 3, by coordinate compression.
double box_union(std::span<const Aabb> boxes);

// Area of a union of convex polygons (vertices in any order) by a slab sweep.
double polygon_union_area(std::span<const std::vector<Point>> polygons);

// Number of points of {1..delta}^d inside the union.
std::uint64_t grid_count(std::span<const ObjectPtr> objects, std::uint64_t delta);

// Coverage-weighted Monte Carlo: sum of sizes times the mean of 1/cover.
TruthResult monte_carlo(std::span<const ObjectPtr> objects, std::uint64_t samples, Rng& rng);

// Geometric union volume ignoring measure wrappers: exact when every backend allows it.
TruthResult union_volume(std::span<const ObjectPtr> objects, std::uint64_t mc_samples, Rng& rng);

// Convex hull vertices in counter-clockwise order.
std::vector<Point> convex_hull(std::vector<Point> pts);

}  // namespace uvol::truth
