#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uvol {

inline constexpr int kMaxDim = 4;

enum class ErrorCode {
    kParameter = 1,
    kUsage,
    kUnsupported,
    kDegenerate,
    kParse,
    kConfig,
    kInternal,
    kUnbounded,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

struct Point {
    std::array<double, kMaxDim> c{};
    int dim = 0;

    Point() = default;
    explicit Point(int d) : dim(d) {}
    Point(std::initializer_list<double> xs);

    double operator[](int i) const { return c[i]; }
    double& operator[](int i) { return c[i]; }
    std::span<const double> coords() const { return {c.data(), static_cast<size_t>(dim)}; }
};

// Closed axis-aligned box, used both as a backend and as a locality hint.
struct Aabb {
    Point lo, hi;

    int dim() const { return lo.dim; }
    bool contains(const Point& x) const {
        for (int i = 0; i < lo.dim; ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
    bool intersects(const Aabb& o) const {
        for (int i = 0; i < lo.dim; ++i)
            if (o.hi[i] < lo[i] || o.lo[i] > hi[i]) return false;
        return true;
    }
    double volume() const;
    Aabb united(const Aabb& o) const;
};

using Rng = std::mt19937_64;

// 53 random mantissa bits, in [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

// Uniform integer in [0, n), rejection-free for n a power of two.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

std::uint64_t poisson(double rate, Rng& rng);

// Natural log for every sampling threshold; doubling structures use log2.
inline double threshold_log(double n) { return std::log(n); }

int level_for_floor(double vol, double floor);
int level(double vol, double n, double eps);

using ObjectId = std::uint64_t;

class ObjectOracle {
public:
    ObjectOracle();
    virtual ~ObjectOracle() = default;
    ObjectOracle(const ObjectOracle&) = delete;
    ObjectOracle& operator=(const ObjectOracle&) = delete;

    virtual int dim() const = 0;
    virtual double size() const = 0;
    virtual Point sample(Rng& rng) const = 0;
    // Fills out with independent samples; same stream as repeated sample() calls.
    virtual void sample_many(Rng& rng, std::span<Point> out) const {
        for (auto& p : out) p = sample(rng);
    }
    virtual bool contains(const Point& x) const = 0;

    // contains() is false outside these bounds.
    virtual Aabb bounds() const = 0;
    virtual bool has_analytic_bounds() const { return false; }
    // Radius of a certified inscribed ball, when the backend knows one.
    virtual std::optional<double> inner_radius() const { return std::nullopt; }
    virtual std::string kind() const = 0;

    ObjectId id() const { return id_; }

private:
    ObjectId id_;
};

using ObjectPtr = std::shared_ptr<const ObjectOracle>;

// Admissible volume window for an estimator; lo = 0 and hi = inf disables the check.
struct VolumeWindow {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    static VolumeWindow for_params(double n, double eps);
    bool admits(double v) const;
};

struct Thresholds {
    double resample_cap = 160.0;
    double refresh_floor = 24.0;
    double level_lo = 32.0;
    double level_hi = 64.0;
    double suffix_capacity = 100.0;
    double klm_trials = 120.0;
};

struct GlobalParams {
    std::uint64_t n = 2;
    double eps = 0.25;
    std::uint64_t seed = 1;
};

void check_params(double n, double eps);

}  // namespace uvol
