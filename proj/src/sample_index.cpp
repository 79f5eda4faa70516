#include <uvol/sample_index.hpp>

#include <algorithm>

namespace uvol {

void SampleIndex::reset(const Aabb& domain, std::size_t expected) {
    records_.clear();
    alive_.clear();
    live_ = dead_ = 0;
    domain_ = domain;
    axes_ = std::min(domain.dim(), 2);
    const std::size_t target = std::clamp<std::size_t>(expected / 8, 1, std::size_t{1} << 20);
    double w0 = domain.hi[0] - domain.lo[0];
    if (axes_ == 2) {
        double w1 = domain.hi[1] - domain.lo[1];
        if (!(w0 > 0.0) || !(w1 > 0.0)) {
            axes_ = 0;
        } else {
            double g0 = std::sqrt(static_cast<double>(target) * w0 / w1);
            grid_[0] = std::clamp(static_cast<int>(g0), 1, 4096);
            grid_[1] = std::clamp(static_cast<int>(static_cast<double>(target) / grid_[0]), 1, 4096);
        }
    } else if (axes_ == 1) {
        if (!(w0 > 0.0)) axes_ = 0;
        grid_[0] = static_cast<int>(std::min<std::size_t>(target, 1 << 22));
        grid_[1] = 1;
    }
    if (axes_ == 0) grid_[0] = grid_[1] = 1;
    for (int a = 0; a < 2; ++a)
        inv_width_[a] = a < axes_ ? grid_[a] / (domain.hi[a] - domain.lo[a]) : 0.0;
    head_.assign(static_cast<std::size_t>(grid_[0]) * grid_[1], -1);
    next_.clear();
    records_.reserve(expected);
    alive_.reserve(expected);
    next_.reserve(expected);
}

void SampleIndex::clear() {
    records_.clear();
    alive_.clear();
    next_.clear();
    std::fill(head_.begin(), head_.end(), -1);
    live_ = dead_ = 0;
}

void SampleIndex::add(const Point& p, std::uint64_t id) {
    auto i = static_cast<std::uint32_t>(records_.size());
    records_.push_back({p, id, 0, 0});
    alive_.push_back(1);
    if (axes_ > 0) {
        auto& h = head_[cell_of(p)];
        next_.push_back(h);
        h = static_cast<std::int32_t>(i);
    }
    ++live_;
}

std::vector<SampleRecord> SampleIndex::snapshot() const {
    std::vector<SampleRecord> out;
    out.reserve(live_);
    for_each([&](const SampleRecord& r) { out.push_back(r); });
    return out;
}

void SampleIndex::maybe_compact() {
    if (dead_ < 4096 || dead_ < live_) return;
    std::size_t w = 0;
    for (std::size_t i = 0; i < records_.size(); ++i)
        if (alive_[i]) records_[w++] = records_[i];
    records_.resize(w);
    alive_.assign(w, 1);
    dead_ = 0;
    rebuild_cells();
}

void SampleIndex::rebuild_cells() {
    std::fill(head_.begin(), head_.end(), -1);
    next_.clear();
    if (axes_ == 0) return;
    for (std::uint32_t i = 0; i < records_.size(); ++i) {
        auto& h = head_[cell_of(records_[i].point)];
        next_.push_back(h);
        h = static_cast<std::int32_t>(i);
    }
}

}  // namespace uvol
