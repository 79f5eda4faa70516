#include <uvol/suffix.hpp>

#include <algorithm>

namespace uvol {

namespace {

std::size_t count_from(const std::deque<TimedSample>& points, std::uint64_t a) {
    auto it = std::lower_bound(points.begin(), points.end(), a,
                               [](const TimedSample& p, std::uint64_t v) { return p.time < v; });
    return static_cast<std::size_t>(points.end() - it);
}

}  // namespace

SuffixStream::SuffixStream(const SuffixConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    check_params(cfg.n, cfg.eps);
    window_ = cfg.admissible.value_or(VolumeWindow::for_params(cfg.n, cfg.eps));
    capacity_ = cfg.thresholds.suffix_capacity * threshold_log(cfg.n) / (cfg.eps * cfg.eps);
    const int lmax = static_cast<int>(std::ceil(5.0 * std::log2(3.0 * cfg.n / cfg.eps)));
    levels_.resize(static_cast<std::size_t>(lmax) + 1);
}

std::size_t SuffixStream::stored() const {
    std::size_t total = 0;
    for (const auto& lv : levels_) total += lv.points.size();
    return total;
}

std::uint64_t SuffixStream::cutoff(const std::deque<TimedSample>& points, std::uint64_t start, double n, double cap) {
    const double room = cap - n;
    if (static_cast<double>(points.size()) <= room) return start;
    // Evict at least `drop` oldest points; a batch sharing a timestamp goes together.
    auto keep = static_cast<std::size_t>(std::max(0.0, std::floor(room)));
    std::size_t drop = points.size() - keep;
    if (drop == 0) return start;
    return std::max(start, points[drop - 1].time + 1);
}

void SuffixStream::insert(const ObjectPtr& x) {
    if (!window_.admits(x->size())) fail(ErrorCode::kUsage, "object volume outside the admissible range");
    if (static_cast<double>(t_ + 1) > cfg_.n) fail(ErrorCode::kUsage, "operation budget n exceeded");
    ++t_;
    const ObjectOracle& obj = *x;
    const Aabb box = obj.bounds();
    const double size = obj.size();
    for (int l = 0; l <= max_level(); ++l) {
        Level& lv = levels_[l];
        std::erase_if(lv.points, [&](const TimedSample& p) { return box.contains(p.point) && obj.contains(p.point); });
        std::uint64_t n = poisson(std::ldexp(size, -l), rng_);
        if (static_cast<double>(n) <= capacity_) {
            std::uint64_t a = cutoff(lv.points, lv.start, static_cast<double>(n), capacity_);
            while (!lv.points.empty() && lv.points.front().time < a) lv.points.pop_front();
            lv.start = a;
            scratch_.clear();
            for (std::uint64_t i = 0; i < n; ++i) scratch_.push_back({obj.sample(rng_), t_, next_id_++});
            lv.points.insert(lv.points.end(), scratch_.begin(), scratch_.end());
            if (observer_) observer_(l, t_, scratch_, false);
        } else {
            lv.points.clear();
            lv.start = t_ + 1;
            if (observer_) observer_(l, t_, {}, true);
        }
    }
    if (static_cast<double>(stored()) > static_cast<double>(levels_.size()) * capacity_)
        fail(ErrorCode::kInternal, "suffix stream exceeded its space bound");
}

int SuffixStream::query_level(std::int64_t s) const {
    const std::uint64_t q = s <= 0 ? 1 : static_cast<std::uint64_t>(s);
    for (int l = 0; l <= max_level(); ++l)
        if (levels_[l].start <= q) return l;
    return -1;
}

double SuffixStream::estimate(std::int64_t s) {
    if (s <= 0) s = 1;
    if (static_cast<std::uint64_t>(s) > t_ + 1) fail(ErrorCode::kUsage, "suffix start lies beyond t+1");
    int l = query_level(s);
    if (l < 0) fail(ErrorCode::kInternal, "no level admits the suffix");
    return std::ldexp(static_cast<double>(count_from(levels_[l].points, static_cast<std::uint64_t>(s))), l);
}

}  // namespace uvol
