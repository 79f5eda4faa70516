#pragma once

#include <uvol/estimator.hpp>

#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace uvol {

struct SuffixConfig {
    double n = 2.0;
    double eps = 0.25;
    std::uint64_t seed = 1;
    Thresholds thresholds{};
    // Defaults to VolumeWindow::for_params(n, eps).
    std::optional<VolumeWindow> admissible;
};

struct TimedSample {
    Point point;
    std::uint64_t time = 0;
    std::uint64_t id = 0;
};

// Insertion-only stream answering union estimates over any suffix of the inserts.
class SuffixStream final : public SuffixEstimator {
public:
    // Called once per level and insert with the accepted fresh draws; cleared levels report cleared = true.
    using Observer = std::function<void(int level, std::uint64_t t, std::span<const TimedSample> fresh, bool cleared)>;

    explicit SuffixStream(const SuffixConfig& cfg);

    void insert(const ObjectPtr& x) override;
    double estimate(std::int64_t s) override;
    std::uint64_t time() const override { return t_; }

    int max_level() const { return static_cast<int>(levels_.size()) - 1; }
    double capacity() const { return capacity_; }
    std::uint64_t start(int l) const { return levels_[l].start; }
    const std::deque<TimedSample>& samples(int l) const { return levels_[l].points; }
    std::size_t stored() const;
    // Level answering a suffix query from s.
    int query_level(std::int64_t s) const;

    void set_observer(Observer obs) { observer_ = std::move(obs); }

    // Smallest a >= start with n + #{time >= a} <= cap, over a time-sorted sequence.
    static std::uint64_t cutoff(const std::deque<TimedSample>& points, std::uint64_t start, double n, double cap);

private:
    struct Level {
        std::deque<TimedSample> points;
        std::uint64_t start = 1;
    };

    SuffixConfig cfg_;
    VolumeWindow window_;
    double capacity_;
    Rng rng_;
    std::vector<Level> levels_;
    std::uint64_t t_ = 0;
    std::uint64_t next_id_ = 1;
    Observer observer_;
    std::vector<TimedSample> scratch_;
};

}  // namespace uvol
