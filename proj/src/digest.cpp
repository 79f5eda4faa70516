#include <uvol/digest.hpp>

#include <algorithm>

namespace uvol {

namespace {

// Refreshes triggered by initialize alone when S lands below the floor.
constexpr int kMaxInitialRefreshes = 64;

Aabb domain_of(std::span<const ObjectPtr> objects) {
    Aabb d = objects.front()->bounds();
    for (const auto& x : objects) d = d.united(x->bounds());
    return d;
}

}  // namespace

DecrementalDigest::DecrementalDigest(DigestConfig cfg, Rng& rng) : cfg_(cfg), rng_(&rng) {
    check_params(cfg_.n, cfg_.eps);
}

double DecrementalDigest::resample_cap() const {
    return cfg_.thresholds.resample_cap * threshold_log(cfg_.n) / (cfg_.eps * cfg_.eps);
}

double DecrementalDigest::refresh_floor() const {
    return cfg_.thresholds.refresh_floor * threshold_log(cfg_.n) / (cfg_.eps * cfg_.eps);
}

double DecrementalDigest::level_floor() const {
    return cfg_.thresholds.level_lo * threshold_log(cfg_.n) / (cfg_.eps * cfg_.eps);
}

bool DecrementalDigest::resample(std::span<const ObjectPtr> objects, int level, double cap, Rng& rng,
                                 SampleIndex& out, std::uint64_t& next_id, std::vector<std::uint64_t>* first_ids) {
    if (first_ids) first_ids->clear();
    if (objects.empty()) {
        out.clear();
        return true;
    }
    double mass = 0.0;
    if (level != kNoLevel)
        for (const auto& x : objects) mass += std::ldexp(x->size(), -level);
    out.reset(domain_of(objects), static_cast<std::size_t>(std::min(mass, cap)));
    if (level == kNoLevel) return true;

    for (const auto& x : objects) {
        const ObjectOracle& obj = *x;
        out.erase_in(obj.bounds(), [&](const SampleRecord& r) { return obj.contains(r.point); });
        std::uint64_t n = poisson(std::ldexp(obj.size(), -level), rng);
        if (static_cast<double>(out.size()) + static_cast<double>(n) > cap) {
            out.clear();
            return false;
        }
        if (first_ids) first_ids->push_back(next_id);
        thread_local std::vector<Point> batch;
        if (batch.size() < n) batch.resize(static_cast<std::size_t>(n));
        std::span<Point> draws(batch.data(), static_cast<std::size_t>(n));
        obj.sample_many(rng, draws);
        for (const auto& p : draws) out.add(p, next_id++);
    }
    if (first_ids) first_ids->push_back(next_id);
    return true;
}

void DecrementalDigest::initialize(std::vector<ObjectPtr> objects) {
    for (const auto& x : objects)
        if (!cfg_.admissible.admits(x->size()))
            fail(ErrorCode::kUsage, "object volume " + std::to_string(x->size()) + " outside the admissible range [" +
                                        std::to_string(cfg_.admissible.lo) + ", " + std::to_string(cfg_.admissible.hi) + "]");
    objects_ = std::move(objects);
    level_ = kNoLevel;
    refresh();
    for (int k = 0; k < kMaxInitialRefreshes && !aborted_ && !objects_.empty() &&
                    static_cast<double>(samples_.size()) < refresh_floor();
         ++k)
        refresh();
}

void DecrementalDigest::refresh() {
    ++refreshes_;
    aborted_ = false;
    if (objects_.empty()) {
        level_ = kNoLevel;
        samples_.clear();
        return;
    }
    double v = klm_estimate(objects_, cfg_.n, *rng_, cfg_.klm).value;
    int fresh = level_for_floor(v, level_floor());
    level_ = level_ == kNoLevel ? fresh : std::min(level_ - 1, fresh);
    std::vector<std::uint64_t> first;
    aborted_ = !resample(objects_, level_, resample_cap(), *rng_, samples_, next_id_, &first);
    if (aborted_) return;
    if (first.size() != objects_.size() + 1) {
        recount_cover();
        return;
    }
    // Survivors drawn from object j lie in j and in no earlier object; only later ones need a test.
    for (std::size_t j = 0; j < objects_.size(); ++j) {
        const ObjectOracle& obj = *objects_[j];
        const std::uint64_t lo = first[j], hi = first[j + 1];
        samples_.for_each_in(obj.bounds(), [&](SampleRecord& r) {
            if (r.id >= lo && (r.id < hi || obj.contains(r.point))) ++r.cover;
        });
    }
}

void DecrementalDigest::recount_cover() {
    samples_.for_each([](SampleRecord& r) { r.cover = 0; });
    for (const auto& x : objects_) {
        const ObjectOracle& obj = *x;
        samples_.for_each_in(obj.bounds(), [&](SampleRecord& r) {
            if (obj.contains(r.point)) ++r.cover;
        });
    }
}

bool DecrementalDigest::erase(const ObjectOracle& x, const DropHook& on_drop) {
    auto it = std::find_if(objects_.begin(), objects_.end(), [&](const ObjectPtr& p) { return p->id() == x.id(); });
    if (it == objects_.end()) fail(ErrorCode::kUsage, "delete of an object that is not in the digest");
    objects_.erase(it);
    samples_.erase_in(x.bounds(), [&](SampleRecord& r) {
        if (!x.contains(r.point)) return false;
        if (--r.cover > 0) return false;
        if (on_drop) on_drop(r);
        return true;
    });
    if (static_cast<double>(samples_.size()) < refresh_floor()) {
        refresh();
        return true;
    }
    return false;
}

double DecrementalDigest::estimate() const {
    if (!has_level()) return 0.0;
    return std::ldexp(static_cast<double>(samples_.size()), level_);
}

}  // namespace uvol
