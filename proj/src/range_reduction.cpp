#include <uvol/range_reduction.hpp>

#include <algorithm>

namespace uvol {

std::pair<int, int> volume_classes(double vol, double m) {
    if (!(vol > 0.0) || !std::isfinite(vol)) fail(ErrorCode::kParameter, "object volume must be positive");
    if (!(m > 1.0)) fail(ErrorCode::kParameter, "class base must exceed 1");
    // k with vol in (m^k, m^(k+1)]; the classes are k and k+1.
    int k = static_cast<int>(std::floor(std::log(vol) / std::log(m)));
    while (std::pow(m, k + 1) < vol) ++k;
    while (std::pow(m, k) >= vol) --k;
    return {k, k + 1};
}

double class_scale(int l, double m) { return std::pow(m, 3 - l); }

namespace {

InnerParams inner_params(const RangeConfig& cfg, double m, Rng& rng) {
    return {cfg.n, cfg.eps / 3.0, VolumeWindow{m * m, m * m * m * m}, rng()};
}

}  // namespace

RangeReducedDynamic::RangeReducedDynamic(const RangeConfig& cfg, DynamicFactory factory)
    : cfg_(cfg), factory_(std::move(factory)), m_(3.0 * cfg.n / cfg.eps), rng_(cfg.seed) {
    check_params(cfg.n, cfg.eps);
}

void RangeReducedDynamic::insert(const ObjectPtr& x) {
    auto [a, b] = volume_classes(x->size(), m_);
    for (int l : {a, b}) {
        Class& c = classes_[l];
        if (!c.inner) c.inner = factory_(inner_params(cfg_, m_, rng_));
        auto scaled = std::make_shared<ScaledOracle>(x, class_scale(l, m_));
        c.inner->insert(scaled);
        c.scaled[x->id()].push_back(std::move(scaled));
        ++c.count;
    }
}

void RangeReducedDynamic::erase(const ObjectPtr& x) {
    auto [a, b] = volume_classes(x->size(), m_);
    for (int l : {a, b}) {
        auto it = classes_.find(l);
        if (it == classes_.end() || !it->second.scaled.contains(x->id()))
            fail(ErrorCode::kUsage, "delete of an object that was never inserted");
    }
    for (int l : {a, b}) {
        Class& c = classes_[l];
        auto& list = c.scaled[x->id()];
        ObjectPtr scaled = list.back();
        list.pop_back();
        if (list.empty()) c.scaled.erase(x->id());
        c.inner->erase(scaled);
        if (--c.count == 0) classes_.erase(l);
    }
}

double RangeReducedDynamic::estimate() {
    if (classes_.empty()) return 0.0;
    if (classes_.size() < 2) fail(ErrorCode::kInternal, "a nonempty structure must hold two classes");
    auto it = std::prev(classes_.end(), 2);
    return it->second.inner->estimate() * std::pow(m_, it->first - 3);
}

std::vector<int> RangeReducedDynamic::active_classes() const {
    std::vector<int> out;
    for (const auto& [l, c] : classes_) out.push_back(l);
    return out;
}

std::size_t RangeReducedDynamic::class_count(int l) const {
    auto it = classes_.find(l);
    return it == classes_.end() ? 0 : it->second.count;
}

RangeReducedSuffix::RangeReducedSuffix(const RangeConfig& cfg, SuffixFactory factory)
    : cfg_(cfg), factory_(std::move(factory)), m_(3.0 * cfg.n / cfg.eps), rng_(cfg.seed) {
    check_params(cfg.n, cfg.eps);
}

void RangeReducedSuffix::insert(const ObjectPtr& x) {
    auto [a, b] = volume_classes(x->size(), m_);
    ++t_;
    for (int l : {a, b}) {
        Class& c = classes_[l];
        if (!c.inner) c.inner = factory_(inner_params(cfg_, m_, rng_));
        c.inner->insert(std::make_shared<ScaledOracle>(x, class_scale(l, m_)));
        c.times.push_back(t_);
    }
}

std::vector<int> RangeReducedSuffix::active_classes() const {
    std::vector<int> out;
    for (const auto& [l, c] : classes_) out.push_back(l);
    return out;
}

std::vector<int> RangeReducedSuffix::active_classes(std::int64_t s) const {
    std::vector<int> out;
    for (const auto& [l, c] : classes_)
        if (!c.times.empty() && static_cast<std::int64_t>(c.times.back()) >= s) out.push_back(l);
    return out;
}

double RangeReducedSuffix::estimate(std::int64_t s) {
    if (s <= 0) s = 1;
    if (static_cast<std::uint64_t>(s) > t_ + 1) fail(ErrorCode::kUsage, "suffix start lies beyond t+1");
    auto active = active_classes(s);
    if (active.empty()) return 0.0;
    if (active.size() < 2) fail(ErrorCode::kInternal, "a nonempty suffix must touch two classes");
    const int l = active[active.size() - 2];
    Class& c = classes_.at(l);
    auto first = std::lower_bound(c.times.begin(), c.times.end(), static_cast<std::uint64_t>(s));
    auto inner_s = static_cast<std::int64_t>(first - c.times.begin()) + 1;
    return c.inner->estimate(inner_s) * std::pow(m_, l - 3);
}

}  // namespace uvol
