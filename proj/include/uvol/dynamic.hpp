#pragma once

#include <uvol/digest.hpp>
#include <uvol/estimator.hpp>

#include <map>
#include <optional>
#include <vector>

namespace uvol {

struct DynamicConfig {
    double n = 2.0;
    double eps = 0.25;
    std::uint64_t seed = 1;
    Thresholds thresholds{};
    KlmConfig klm{};
    // Defaults to VolumeWindow::for_params(n, eps).
    std::optional<VolumeWindow> admissible;
};

// Logarithmic method over decremental digests with cross-bin coverage counters.
class FullyDynamicEstimator final : public DynamicEstimator {
public:
    explicit FullyDynamicEstimator(const DynamicConfig& cfg);
    FullyDynamicEstimator(const FullyDynamicEstimator&) = delete;
    FullyDynamicEstimator& operator=(const FullyDynamicEstimator&) = delete;

    void insert(const ObjectPtr& x) override;
    void erase(const ObjectPtr& x) override;
    double estimate() override;

    int bin_count() const { return static_cast<int>(bins_.size()); }
    const DecrementalDigest& bin(int j) const { return bins_[j].digest; }
    double bin_eps() const { return bin_eps_; }
    std::size_t live_objects() const;

    // Recomputes every counter from scratch and compares; for tests.
    bool counters_consistent() const;

private:
    struct Bin {
        DecrementalDigest digest;
        std::size_t uncovered = 0;  // points with cross == 0
    };

    void recount_cross(int j);

    DynamicConfig cfg_;
    double bin_eps_;
    VolumeWindow window_;
    Rng rng_;
    std::vector<Bin> bins_;
    std::map<ObjectId, std::vector<int>> membership_;
    std::uint64_t ops_ = 0;
};

}  // namespace uvol
