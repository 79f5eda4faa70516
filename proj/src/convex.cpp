#include <uvol/convex.hpp>

#include <algorithm>

namespace uvol {

RegionCache::RegionCache(std::uint64_t delta, double n, BoxOptions opts, std::uint64_t seed)
    : delta_(delta), n_(n), opts_(opts), rng_(seed) {}

const FilterRegion& RegionCache::acquire(const ObjectOracle& x) {
    auto it = entries_.find(x.id());
    if (it == entries_.end())
        it = entries_.emplace(x.id(), Entry{filter_region(bounding_box(x, n_, rng_, opts_), delta_), 0}).first;
    ++it->second.refs;
    return it->second.region;
}

const FilterRegion& RegionCache::find(const ObjectOracle& x) const {
    auto it = entries_.find(x.id());
    if (it == entries_.end()) fail(ErrorCode::kUsage, "object was never inserted");
    return it->second.region;
}

void RegionCache::release(const ObjectOracle& x) {
    auto it = entries_.find(x.id());
    if (it == entries_.end()) fail(ErrorCode::kUsage, "object was never inserted");
    if (--it->second.refs == 0) entries_.erase(it);
}

ConvexCountStream::ConvexCountStream(const ConvexCountConfig& cfg, std::shared_ptr<RegionCache> cache)
    : cfg_(cfg) {
    check_params(cfg.n, cfg.eps);
    if (cfg.d < 1 || cfg.d > kMaxDim) fail(ErrorCode::kParameter, "dimension out of range");
    Rng rng(cfg.seed);
    hp_ = make_hash(cfg.delta, cfg.d, rng);
    const int top = hp_.top_level();
    if (top > cfg.max_levels) fail(ErrorCode::kConfig, "grid needs " + std::to_string(top + 1) + " levels, beyond the configured limit");
    k_ = static_cast<std::uint64_t>(std::ceil(100.0 / (cfg.eps * cfg.eps)));
    delta_fail_ = 1.0 / (20.0 * std::log2(static_cast<double>(hp_.p)));
    const std::uint64_t grid = hp_.grid_size();
    if (grid > (std::uint64_t{1} << 31)) fail(ErrorCode::kConfig, "grid has more than 2^31 points");
    level_bytes_ = static_cast<std::size_t>(SparseRecovery::rows_for(k_, delta_fail_)) * 2 * k_ *
                   (sizeof(std::int64_t) + sizeof(__int128) + sizeof(std::uint64_t));
    if (level_bytes_ * static_cast<std::size_t>(top + 1) > cfg.memory_budget)
        fail(ErrorCode::kConfig, "sketch memory exceeds the configured budget");
    for (int l = 0; l <= top; ++l) level_seeds_.push_back(rng());
    levels_.resize(static_cast<std::size_t>(top) + 1);
    cache_ = cache ? std::move(cache) : std::make_shared<RegionCache>(cfg.delta, cfg.n, cfg.box, rng());
    if (cache_->delta() != cfg.delta) fail(ErrorCode::kParameter, "region cache grid mismatch");
}

double ConvexCountStream::gate(int l) const { return 1600.0 / (cfg_.eps * cfg_.eps * hp_.q(l)); }

SparseRecovery& ConvexCountStream::level(int l) {
    auto& slot = levels_[l];
    if (!slot) {
        Rng rng(level_seeds_[l]);
        slot.emplace(k_, delta_fail_, hp_.key_min(), hp_.key_max(), rng);
    }
    return *slot;
}

void ConvexCountStream::insert(const ObjectOracle& x) { apply(x, cache_->acquire(x), +1); }

void ConvexCountStream::erase(const ObjectOracle& x) {
    apply(x, cache_->find(x), -1);
    cache_->release(x);
}

void ConvexCountStream::apply(const ObjectOracle& x, const FilterRegion& region, int b) {
    if (x.dim() != cfg_.d) fail(ErrorCode::kParameter, "object dimension mismatch");
    const int top = hp_.top_level();
    const double size = x.size();
    // Gates grow with l, so the admitted levels form a suffix; selections are nested.
    int first = 0;
    while (first <= top && size > gate(first)) ++first;
    if (first > top) return;
    for (const GridPoint& g : filter_in_region(x, region, hp_, first, cfg_.strategy)) {
        const std::uint64_t key = hp_.key(g);
        const std::uint64_t h = hp_.eval_key(key);
        for (int l = first; l <= top && h <= hp_.threshold(l); ++l) {
            level(l).update(key, b);
            ++updates_;
        }
    }
}

std::optional<std::uint64_t> ConvexCountStream::support(int l) const {
    const auto& slot = levels_.at(l);
    if (!slot) return 0;
    return slot->support();
}

double ConvexCountStream::estimate_count() {
    const int top = hp_.top_level();
    std::uint64_t above = 0;
    for (int l = top; l >= 0; --l) {
        auto s = support(l);
        if (s) {
            above = *s;
            continue;
        }
        last_level_ = l + 1;
        if (l == top) {
            ++failures_;
            return std::numeric_limits<double>::infinity();
        }
        return static_cast<double>(above) / hp_.q(last_level_);
    }
    last_level_ = 0;
    return static_cast<double>(above);
}

bool ConvexCountStream::is_fresh() const {
    return std::all_of(levels_.begin(), levels_.end(), [](const auto& s) { return !s || s->is_zero(); });
}

bool ConvexCountStream::same_state(const ConvexCountStream& o) const {
    if (levels_.size() != o.levels_.size()) return false;
    for (std::size_t l = 0; l < levels_.size(); ++l) {
        const auto &a = levels_[l], &b = o.levels_[l];
        if (a && b) {
            if (!a->same_state(*b)) return false;
        } else if ((a && !a->is_zero()) || (b && !b->is_zero())) {
            return false;
        }
    }
    return true;
}

GridMappedOracle::GridMappedOracle(ObjectPtr base, double lambda)
    : base_(std::move(base)), lambda_(lambda), scale_(std::pow(lambda, base_->dim())) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::kParameter, "grid scale must be positive");
}

Point GridMappedOracle::sample(Rng& rng) const {
    Point p = base_->sample(rng);
    for (int i = 0; i < p.dim; ++i) p[i] = lambda_ * p[i] + 1.0;
    return p;
}

bool GridMappedOracle::contains(const Point& u) const {
    Point x = u;
    for (int i = 0; i < x.dim; ++i) x[i] = (u[i] - 1.0) / lambda_;
    return base_->contains(x);
}

Aabb GridMappedOracle::bounds() const {
    Aabb b = base_->bounds();
    for (int i = 0; i < b.dim(); ++i) {
        b.lo[i] = lambda_ * b.lo[i] + 1.0;
        b.hi[i] = lambda_ * b.hi[i] + 1.0;
    }
    return b;
}

std::optional<double> GridMappedOracle::inner_radius() const {
    auto r = base_->inner_radius();
    if (r) *r *= lambda_;
    return r;
}

double grid_scale(const ConvexConfig& cfg) {
    if (cfg.lambda) return *cfg.lambda;
    return 18.0 * std::pow(cfg.d, 1.5) * cfg.n / (cfg.eps * cfg.r);
}

std::uint64_t grid_side(const ConvexConfig& cfg) {
    const double side = std::floor(grid_scale(cfg) * cfg.R) + 1.0;
    if (!(side < 0x1p62)) fail(ErrorCode::kConfig, "grid side overflows");
    return static_cast<std::uint64_t>(side);
}

ConvexStream::ConvexStream(const ConvexConfig& cfg) : cfg_(cfg) {
    check_params(cfg.n, cfg.eps);
    if (!(cfg.r > 0.0) || !(cfg.R >= 2.0 * cfg.r)) fail(ErrorCode::kParameter, "need 0 < 2r <= R");
    if (cfg.copies < 1 || cfg.copies % 2 == 0) fail(ErrorCode::kParameter, "copies must be odd and positive");
    lambda_ = grid_scale(cfg);
    delta_ = grid_side(cfg);
    if (delta_ < 2) fail(ErrorCode::kParameter, "grid side below 2");
    std::seed_seq seq{cfg.seed, std::uint64_t{0x636f6e766578}};
    std::vector<std::uint32_t> seeds(2 * static_cast<std::size_t>(cfg.copies) + 2);
    seq.generate(seeds.begin(), seeds.end());
    auto seed_at = [&](std::size_t i) { return (std::uint64_t{seeds[2 * i]} << 32) | seeds[2 * i + 1]; };
    cache_ = std::make_shared<RegionCache>(delta_, cfg.n, cfg.box, seed_at(0));
    for (int c = 0; c < cfg.copies; ++c) {
        ConvexCountConfig cc{delta_, cfg.d, cfg.n, cfg.eps / 3.0, seed_at(static_cast<std::size_t>(c) + 1),
                             cfg.strategy, cfg.box, cfg.max_levels, cfg.memory_budget};
        streams_.emplace_back(cc, cache_);
    }
}

void ConvexStream::validate(const ObjectOracle& x) const {
    if (x.dim() != cfg_.d) fail(ErrorCode::kParameter, "object dimension mismatch");
    const double tol = 1e-9 * cfg_.R;
    if (auto ir = x.inner_radius(); ir && *ir < cfg_.r - tol)
        fail(ErrorCode::kUsage, "object does not contain a ball of radius r");
    Aabb b = x.bounds();
    for (int i = 0; i < cfg_.d; ++i)
        if (b.lo[i] < -tol || b.hi[i] > cfg_.R + tol) fail(ErrorCode::kUsage, "object leaves [0,R]^d");
}

void ConvexStream::insert(const ObjectPtr& x) {
    validate(*x);
    if (mapped_.count(x->id())) fail(ErrorCode::kUsage, "object inserted twice");
    auto g = std::make_shared<GridMappedOracle>(x, lambda_);
    for (auto& s : streams_) s.insert(*g);
    mapped_.emplace(x->id(), std::move(g));
}

void ConvexStream::erase(const ObjectPtr& x) {
    auto it = mapped_.find(x->id());
    if (it == mapped_.end()) fail(ErrorCode::kUsage, "deleting an object that is not live");
    for (auto& s : streams_) s.erase(*it->second);
    mapped_.erase(it);
}

std::vector<double> ConvexStream::copy_counts() {
    std::vector<double> out;
    for (auto& s : streams_) out.push_back(s.estimate_count());
    return out;
}

double ConvexStream::estimate_count() { return median(copy_counts()); }

double ConvexStream::estimate() { return estimate_count() / std::pow(lambda_, cfg_.d); }

std::uint64_t ConvexStream::failures() const {
    std::uint64_t f = 0;
    for (const auto& s : streams_) f += s.failures();
    return f;
}

double median(std::vector<double> xs) {
    if (xs.empty()) fail(ErrorCode::kParameter, "median of nothing");
    auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
    std::nth_element(xs.begin(), mid, xs.end());
    if (xs.size() % 2 == 1) return *mid;
    double hi = *mid;
    double lo = *std::max_element(xs.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace uvol
