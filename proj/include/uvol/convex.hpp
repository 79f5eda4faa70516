#pragma once

#include <uvol/estimator.hpp>
#include <uvol/sparse_recovery.hpp>
#include <uvol/weak_sampling.hpp>

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace uvol {

// Filter regions per object, computed once so inserts and deletes enumerate identical point sets.
class RegionCache {
public:
    RegionCache(std::uint64_t delta, double n, BoxOptions opts, std::uint64_t seed);

    const FilterRegion& acquire(const ObjectOracle& x);
    const FilterRegion& find(const ObjectOracle& x) const;
    void release(const ObjectOracle& x);
    std::size_t size() const { return entries_.size(); }
    std::uint64_t delta() const { return delta_; }

private:
    struct Entry {
        FilterRegion region;
        int refs = 0;
    };
    std::uint64_t delta_;
    double n_;
    BoxOptions opts_;
    Rng rng_;
    std::map<ObjectId, Entry> entries_;
};

struct ConvexCountConfig {
    std::uint64_t delta = 64;
    int d = 2;
    double n = 2;
    double eps = 0.5;
    std::uint64_t seed = 1;
    FilterStrategy strategy = FilterStrategy::kRowLattice;
    BoxOptions box{};
    int max_levels = 64;
    std::size_t memory_budget = std::size_t{1} << 30;
};

// Per-level sparse sketches of hash-selected grid points of the union, over {1..delta}^d.
// Objects live in grid coordinates.
class ConvexCountStream {
public:
    explicit ConvexCountStream(const ConvexCountConfig& cfg, std::shared_ptr<RegionCache> cache = nullptr);

    void insert(const ObjectOracle& x);
    void erase(const ObjectOracle& x);

    // Weak-sample count of the union scaled by 1/q_L; +inf when the sketches disagree.
    double estimate_count();

    const HashParams& hash() const { return hp_; }
    int top_level() const { return hp_.top_level(); }
    std::uint64_t k() const { return k_; }
    double delta_fail() const { return delta_fail_; }
    double gate(int l) const;
    std::optional<std::uint64_t> support(int l) const;
    int last_level() const { return last_level_; }
    std::uint64_t failures() const { return failures_; }
    std::uint64_t updates() const { return updates_; }
    bool is_fresh() const;
    bool same_state(const ConvexCountStream& o) const;
    std::size_t bytes_per_level() const { return level_bytes_; }

private:
    void apply(const ObjectOracle& x, const FilterRegion& region, int b);
    SparseRecovery& level(int l);

    ConvexCountConfig cfg_;
    HashParams hp_;
    std::uint64_t k_;
    double delta_fail_;
    std::shared_ptr<RegionCache> cache_;
    std::vector<std::uint64_t> level_seeds_;
    std::vector<std::optional<SparseRecovery>> levels_;
    std::size_t level_bytes_ = 0;
    int last_level_ = 0;
    std::uint64_t failures_ = 0;
    std::uint64_t updates_ = 0;
};

// Continuous object in [0,R]^d seen through the grid map u = lambda * x + 1.
class GridMappedOracle final : public ObjectOracle {
public:
    GridMappedOracle(ObjectPtr base, double lambda);

    int dim() const override { return base_->dim(); }
    double size() const override { return base_->size() * scale_; }
    Point sample(Rng& rng) const override;
    bool contains(const Point& u) const override;
    Aabb bounds() const override;
    bool has_analytic_bounds() const override { return base_->has_analytic_bounds(); }
    std::optional<double> inner_radius() const override;
    std::string kind() const override { return base_->kind(); }

    const ObjectPtr& base() const { return base_; }

private:
    ObjectPtr base_;
    double lambda_;
    double scale_;
};

struct ConvexConfig {
    double n = 2;
    double eps = 0.5;
    int d = 2;
    double R = 1.0;
    double r = 0.25;
    std::uint64_t seed = 1;
    int copies = 1;
    FilterStrategy strategy = FilterStrategy::kRowLattice;
    BoxOptions box{};
    int max_levels = 64;
    std::size_t memory_budget = std::size_t{1} << 30;
    // Grid scale; the default is 18 d^1.5 n / (eps r).
    std::optional<double> lambda;
};

double grid_scale(const ConvexConfig& cfg);
std::uint64_t grid_side(const ConvexConfig& cfg);

// Union volume of convex bodies under inserts and deletes: median over independent grid count streams.
class ConvexStream final : public DynamicEstimator {
public:
    explicit ConvexStream(const ConvexConfig& cfg);

    void insert(const ObjectPtr& x) override;
    void erase(const ObjectPtr& x) override;
    double estimate() override;

    double estimate_count();
    std::vector<double> copy_counts();
    double lambda() const { return lambda_; }
    std::uint64_t delta() const { return delta_; }
    int copies() const { return static_cast<int>(streams_.size()); }
    const ConvexCountStream& stream(int i) const { return streams_[i]; }
    std::uint64_t failures() const;

private:
    void validate(const ObjectOracle& x) const;

    ConvexConfig cfg_;
    double lambda_;
    std::uint64_t delta_;
    std::shared_ptr<RegionCache> cache_;
    std::vector<ConvexCountStream> streams_;
    std::map<ObjectId, ObjectPtr> mapped_;
};

double median(std::vector<double> xs);

}  // namespace uvol
