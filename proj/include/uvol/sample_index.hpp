#pragma once

#include <uvol/core.hpp>

#include <cstdint>
#include <vector>

namespace uvol {

struct SampleRecord {
    Point point;
    std::uint64_t id = 0;
    // Live objects of the owning digest containing the point.
    std::int32_t cover = 0;
    // Live objects of lower bins containing the point.
    std::int32_t cross = 0;
};

// Sample store bucketed on a uniform grid over the first two coordinates.
// Removal leaves a tombstone; storage is compacted once tombstones dominate.
class SampleIndex {
public:
    void reset(const Aabb& domain, std::size_t expected);
    void clear();

    std::size_t size() const { return live_; }
    bool empty() const { return live_ == 0; }

    void add(const Point& p, std::uint64_t id);

    template <class F>
    void for_each(F&& f) {
        for (std::size_t i = 0; i < records_.size(); ++i)
            if (alive_[i]) f(records_[i]);
    }
    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < records_.size(); ++i)
            if (alive_[i]) f(records_[i]);
    }

    template <class F>
    void for_each_in(const Aabb& box, F&& f) {
        visit_cells(box, [&](std::uint32_t i) {
            if (alive_[i] && box.contains(records_[i].point)) f(records_[i]);
        });
    }

    // Removes records inside box for which pred returns true.
    template <class Pred>
    std::size_t erase_in(const Aabb& box, Pred&& pred) {
        std::size_t removed = 0;
        visit_cells(box, [&](std::uint32_t i) {
            if (alive_[i] && box.contains(records_[i].point) && pred(records_[i])) {
                alive_[i] = 0;
                ++removed;
            }
        });
        live_ -= removed;
        dead_ += removed;
        maybe_compact();
        return removed;
    }

    template <class Pred>
    std::size_t erase_if(Pred&& pred) {
        std::size_t removed = 0;
        for (std::size_t i = 0; i < records_.size(); ++i)
            if (alive_[i] && pred(records_[i])) {
                alive_[i] = 0;
                ++removed;
            }
        live_ -= removed;
        dead_ += removed;
        maybe_compact();
        return removed;
    }

    std::vector<SampleRecord> snapshot() const;

private:
    int cell_coord(int axis, double x) const {
        double t = (x - domain_.lo[axis]) * inv_width_[axis];
        if (!(t > 0.0)) return 0;
        int c = static_cast<int>(t);
        return c >= grid_[axis] ? grid_[axis] - 1 : c;
    }
    std::size_t cell_of(const Point& p) const {
        std::size_t c = static_cast<std::size_t>(cell_coord(0, p[0]));
        if (axes_ == 2) c += static_cast<std::size_t>(cell_coord(1, p[1])) * grid_[0];
        return c;
    }

    template <class F>
    void visit_cells(const Aabb& box, F&& f) {
        if (live_ == 0) return;
        if (axes_ == 0) {
            for (std::uint32_t i = 0; i < records_.size(); ++i) f(i);
            return;
        }
        int x0 = cell_coord(0, box.lo[0]), x1 = cell_coord(0, box.hi[0]);
        int y0 = 0, y1 = 0;
        if (axes_ == 2) {
            y0 = cell_coord(1, box.lo[1]);
            y1 = cell_coord(1, box.hi[1]);
        }
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                for (std::int32_t i = head_[static_cast<std::size_t>(y) * grid_[0] + x]; i >= 0; i = next_[i])
                    f(static_cast<std::uint32_t>(i));
    }

    void maybe_compact();
    void rebuild_cells();

    Aabb domain_;
    int axes_ = 0;
    int grid_[2] = {1, 1};
    double inv_width_[2] = {0.0, 0.0};
    std::vector<SampleRecord> records_;
    std::vector<std::uint8_t> alive_;
    // Intrusive per-cell lists: head_ per cell, next_ per record, -1 terminates.
    std::vector<std::int32_t> head_;
    std::vector<std::int32_t> next_;
    std::size_t live_ = 0;
    std::size_t dead_ = 0;
};

}  // namespace uvol
