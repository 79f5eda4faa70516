#include <uvol/dynamic.hpp>

#include <algorithm>

namespace uvol {

FullyDynamicEstimator::FullyDynamicEstimator(const DynamicConfig& cfg)
    : cfg_(cfg), rng_(cfg.seed) {
    check_params(cfg.n, cfg.eps);
    const double lg = std::log2(cfg.n);
    bin_eps_ = cfg.eps / (1.0 + lg);
    window_ = cfg.admissible.value_or(VolumeWindow::for_params(cfg.n, cfg.eps));
    const int count = static_cast<int>(std::ceil(lg)) + 1;
    DigestConfig dc{cfg.n, bin_eps_, cfg.thresholds, cfg.klm, window_};
    bins_.reserve(count);
    for (int j = 0; j < count; ++j) bins_.push_back({DecrementalDigest(dc, rng_), 0});
}

std::size_t FullyDynamicEstimator::live_objects() const {
    std::size_t m = 0;
    for (const auto& b : bins_) m += b.digest.objects().size();
    return m;
}

void FullyDynamicEstimator::insert(const ObjectPtr& x) {
    if (!window_.admits(x->size())) fail(ErrorCode::kUsage, "object volume outside the admissible range");
    if (static_cast<double>(++ops_) > cfg_.n) fail(ErrorCode::kUsage, "operation budget n exceeded");

    std::size_t total = 1;
    int h = 0;
    for (;; ++h) {
        if (h == bin_count()) fail(ErrorCode::kInternal, "no bin can absorb the insert");
        total += bins_[h].digest.objects().size();
        if (static_cast<double>(total) <= std::ldexp(1.0, h)) break;
    }

    std::vector<ObjectPtr> merged;
    merged.reserve(total);
    for (int j = 0; j <= h; ++j) {
        for (const auto& y : bins_[j].digest.objects()) {
            merged.push_back(y);
            if (j < h) {
                auto& where = membership_[y->id()];
                *std::find(where.begin(), where.end(), j) = h;
            }
        }
    }
    merged.push_back(x);
    membership_[x->id()].push_back(h);

    for (int j = 0; j < h; ++j) {
        bins_[j].digest.initialize({});
        bins_[j].uncovered = 0;
    }
    bins_[h].digest.initialize(std::move(merged));
    bins_[h].uncovered = bins_[h].digest.samples().size();

    const ObjectOracle& obj = *x;
    for (int k = h + 1; k < bin_count(); ++k) {
        Bin& b = bins_[k];
        b.digest.samples().for_each_in(obj.bounds(), [&](SampleRecord& r) {
            if (!obj.contains(r.point)) return;
            if (r.cross++ == 0) --b.uncovered;
        });
    }
}

void FullyDynamicEstimator::erase(const ObjectPtr& x) {
    auto it = membership_.find(x->id());
    if (it == membership_.end() || it->second.empty()) fail(ErrorCode::kUsage, "delete of an object that is not live");
    if (static_cast<double>(++ops_) > cfg_.n) fail(ErrorCode::kUsage, "operation budget n exceeded");
    auto pos = std::min_element(it->second.begin(), it->second.end());
    const int j = *pos;
    it->second.erase(pos);
    if (it->second.empty()) membership_.erase(it);

    Bin& home = bins_[j];
    bool refreshed = home.digest.erase(*x, [&](const SampleRecord& r) {
        if (r.cross == 0) --home.uncovered;
    });
    if (refreshed) recount_cross(j);

    const ObjectOracle& obj = *x;
    for (int k = j + 1; k < bin_count(); ++k) {
        Bin& b = bins_[k];
        b.digest.samples().for_each_in(obj.bounds(), [&](SampleRecord& r) {
            if (!obj.contains(r.point)) return;
            if (--r.cross == 0) ++b.uncovered;
        });
    }
}

void FullyDynamicEstimator::recount_cross(int j) {
    SampleIndex& s = bins_[j].digest.samples();
    s.for_each([](SampleRecord& r) { r.cross = 0; });
    for (int k = 0; k < j; ++k)
        for (const auto& y : bins_[k].digest.objects()) {
            const ObjectOracle& obj = *y;
            s.for_each_in(obj.bounds(), [&](SampleRecord& r) {
                if (obj.contains(r.point)) ++r.cross;
            });
        }
    std::size_t zeros = 0;
    s.for_each([&](const SampleRecord& r) { zeros += r.cross == 0; });
    bins_[j].uncovered = zeros;
}

double FullyDynamicEstimator::estimate() {
    double sum = 0.0;
    for (const auto& b : bins_)
        if (b.digest.has_level()) sum += std::ldexp(static_cast<double>(b.uncovered), b.digest.level());
    return sum;
}

bool FullyDynamicEstimator::counters_consistent() const {
    for (int j = 0; j < bin_count(); ++j) {
        std::size_t zeros = 0;
        bool ok = true;
        bins_[j].digest.samples().for_each([&](const SampleRecord& r) {
            int cover = 0, cross = 0;
            for (const auto& y : bins_[j].digest.objects()) cover += y->contains(r.point);
            for (int k = 0; k < j; ++k)
                for (const auto& y : bins_[k].digest.objects()) cross += y->contains(r.point);
            if (cover != r.cover || cross != r.cross || cover < 1) ok = false;
            zeros += r.cross == 0;
        });
        if (!ok || zeros != bins_[j].uncovered) return false;
        if (bins_[j].digest.objects().size() > (std::size_t{1} << j)) return false;
    }
    return true;
}

}  // namespace uvol
