#pragma once

#include <uvol/core.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace uvol {

// Linear sketch of an integer vector over keys [lo, hi] that recovers the support when it has at most k entries.
class SparseRecovery {
public:
    SparseRecovery(std::uint64_t k, double delta, std::uint64_t lo, std::uint64_t hi, Rng& rng);

    void update(std::uint64_t x, int b);

    // Support size, or nullopt when the support exceeds k (or decoding fails).
    std::optional<std::uint64_t> support() const;
    // Recovered (key, value) pairs, when decoding succeeds.
    std::optional<std::vector<std::pair<std::uint64_t, std::int64_t>>> recover() const;

    std::uint64_t k() const { return k_; }
    int rows() const { return rows_; }
    std::uint64_t width() const { return width_; }
    std::uint64_t fingerprint_prime() const { return q_; }
    bool is_zero() const;
    bool same_state(const SparseRecovery& o) const;
    std::size_t bytes() const;

    static int rows_for(std::uint64_t k, double delta);

private:
    std::uint64_t bucket(int r, std::uint64_t x) const;
    std::uint64_t phi(std::uint64_t x) const;

    std::uint64_t k_;
    int rows_;
    std::uint64_t width_;
    std::uint64_t lo_, hi_;
    std::uint64_t q_;
    std::vector<std::uint64_t> alpha_, beta_;
    std::array<std::uint64_t, 4> phi_{};

    std::vector<std::int64_t> count_;
    std::vector<__int128> keysum_;
    std::vector<std::uint64_t> fp_;
    std::uint64_t global_fp_ = 0;

    mutable std::vector<std::int64_t> scratch_count_;
    mutable std::vector<__int128> scratch_keysum_;
    mutable std::vector<std::uint64_t> scratch_fp_;
    mutable std::vector<std::uint32_t> queue_;
};

}  // namespace uvol
