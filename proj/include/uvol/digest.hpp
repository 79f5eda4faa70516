#pragma once

#include <uvol/klm.hpp>
#include <uvol/sample_index.hpp>

#include <functional>
#include <limits>
#include <vector>

namespace uvol {

struct DigestConfig {
    double n = 2.0;
    double eps = 0.1;
    Thresholds thresholds{};
    KlmConfig klm{};
    VolumeWindow admissible{};
};

// Decremental union digest: a level L and an L-sample S with coverage counts.
class DecrementalDigest {
public:
    static constexpr int kNoLevel = std::numeric_limits<int>::max();
    using DropHook = std::function<void(const SampleRecord&)>;

    DecrementalDigest(DigestConfig cfg, Rng& rng);

    void initialize(std::vector<ObjectPtr> objects);
    // Removes one occurrence of x; true iff a refresh ran.
    bool erase(const ObjectOracle& x, const DropHook& on_drop = {});
    void refresh();

    bool has_level() const { return level_ != kNoLevel; }
    int level() const { return level_; }
    double estimate() const;

    const std::vector<ObjectPtr>& objects() const { return objects_; }
    SampleIndex& samples() { return samples_; }
    const SampleIndex& samples() const { return samples_; }

    std::size_t refresh_count() const { return refreshes_; }
    bool last_resample_aborted() const { return aborted_; }
    const DigestConfig& config() const { return cfg_; }

    double resample_cap() const;
    double refresh_floor() const;
    double level_floor() const;

    // Poisson L-sample of the union by erase-and-resample; false (and out empty) on abort.
    // first_ids receives the first sample id drawn from each object, plus the end id.
    static bool resample(std::span<const ObjectPtr> objects, int level, double cap, Rng& rng,
                         SampleIndex& out, std::uint64_t& next_id, std::vector<std::uint64_t>* first_ids = nullptr);

private:
    void recount_cover();

    DigestConfig cfg_;
    Rng* rng_;
    std::vector<ObjectPtr> objects_;
    int level_ = kNoLevel;
    SampleIndex samples_;
    std::uint64_t next_id_ = 1;
    std::size_t refreshes_ = 0;
    bool aborted_ = false;
};

}  // namespace uvol
