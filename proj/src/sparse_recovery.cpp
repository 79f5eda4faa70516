#include <uvol/sparse_recovery.hpp>

#include <uvol/weak_sampling.hpp>

#include <algorithm>
#include <map>

namespace uvol {

namespace {

using u128 = unsigned __int128;
constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

std::uint64_t mod_m61(u128 v) {
    std::uint64_t lo = static_cast<std::uint64_t>(v & kMersenne61);
    std::uint64_t hi = static_cast<std::uint64_t>(v >> 61);
    std::uint64_t s = lo + (hi & kMersenne61) + static_cast<std::uint64_t>(hi >> 61);
    while (s >= kMersenne61) s -= kMersenne61;
    return s;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

// c * f mod q for a signed multiplier c.
std::uint64_t signed_mul(std::int64_t c, std::uint64_t f, std::uint64_t q) {
    std::uint64_t m = mulmod(static_cast<std::uint64_t>(c < 0 ? -static_cast<u128>(c) : static_cast<u128>(c)) % q, f, q);
    return c < 0 && m != 0 ? q - m : m;
}

}  // namespace

int SparseRecovery::rows_for(std::uint64_t k, double delta) {
    if (k == 0) fail(ErrorCode::kParameter, "sparsity budget must be positive");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::kParameter, "failure budget must lie in (0,1)");
    return static_cast<int>(std::ceil(std::log2(static_cast<double>(k) / delta))) + 2;
}

SparseRecovery::SparseRecovery(std::uint64_t k, double delta, std::uint64_t lo, std::uint64_t hi, Rng& rng)
    : k_(k), rows_(rows_for(k, delta)), width_(2 * k), lo_(lo), hi_(hi) {
    if (hi < lo) fail(ErrorCode::kParameter, "empty sketch universe");
    const std::uint64_t size = hi - lo + 1;
    if (size > (std::uint64_t{1} << 31) || hi >= kMersenne61)
        fail(ErrorCode::kUnsupported, "sketch universe exceeds 2^31 keys");
    q_ = next_prime(std::max<std::uint64_t>(size * size, std::uint64_t{1} << 61) + 1);
    for (int r = 0; r < rows_; ++r) {
        alpha_.push_back(1 + uniform_below(rng, kMersenne61 - 1));
        beta_.push_back(uniform_below(rng, kMersenne61));
    }
    for (auto& c : phi_) c = uniform_below(rng, q_);
    const std::size_t cells = static_cast<std::size_t>(rows_) * width_;
    count_.assign(cells, 0);
    keysum_.assign(cells, 0);
    fp_.assign(cells, 0);
}

std::uint64_t SparseRecovery::bucket(int r, std::uint64_t x) const {
    return mod_m61(static_cast<u128>(alpha_[r]) * x + beta_[r]) % width_;
}

std::uint64_t SparseRecovery::phi(std::uint64_t x) const {
    // A cubic keeps singleton verification sensitive to the decoded key.
    std::uint64_t xs = x % q_;
    std::uint64_t v = phi_[3];
    for (int i = 2; i >= 0; --i) v = (mulmod(v, xs, q_) + phi_[i]) % q_;
    return v;
}

void SparseRecovery::update(std::uint64_t x, int b) {
    if (x < lo_ || x > hi_) fail(ErrorCode::kUsage, "sketch update outside the universe");
    if (b != 1 && b != -1) fail(ErrorCode::kParameter, "sketch updates are +1 or -1");
    const std::uint64_t f = phi(x);
    const std::uint64_t df = b > 0 ? f : (f == 0 ? 0 : q_ - f);
    for (int r = 0; r < rows_; ++r) {
        const std::size_t i = static_cast<std::size_t>(r) * width_ + bucket(r, x);
        count_[i] += b;
        keysum_[i] += b > 0 ? static_cast<__int128>(x) : -static_cast<__int128>(x);
        fp_[i] = (fp_[i] + df) % q_;
    }
    global_fp_ = (global_fp_ + df) % q_;
}

std::optional<std::vector<std::pair<std::uint64_t, std::int64_t>>> SparseRecovery::recover() const {
    scratch_count_ = count_;
    scratch_keysum_ = keysum_;
    scratch_fp_ = fp_;
    std::uint64_t gfp = global_fp_;
    queue_.clear();
    for (std::uint32_t i = 0; i < count_.size(); ++i)
        if (count_[i] != 0 || keysum_[i] != 0 || fp_[i] != 0) queue_.push_back(i);

    std::map<std::uint64_t, std::int64_t> found;
    std::size_t recovered = 0;
    while (!queue_.empty()) {
        const std::uint32_t i = queue_.back();
        queue_.pop_back();
        const std::int64_t c = scratch_count_[i];
        if (c == 0) continue;
        const __int128 s = scratch_keysum_[i];
        if (s % c != 0) continue;
        const __int128 xv = s / c;
        if (xv < static_cast<__int128>(lo_) || xv > static_cast<__int128>(hi_)) continue;
        const auto x = static_cast<std::uint64_t>(xv);
        const int r = static_cast<int>(i / width_);
        if (bucket(r, x) != i % width_) continue;
        const std::uint64_t cf = signed_mul(c, phi(x), q_);
        if (scratch_fp_[i] != cf) continue;

        found[x] += c;
        if (++recovered > 2 * k_ + 2) return std::nullopt;
        const std::uint64_t neg = cf == 0 ? 0 : q_ - cf;
        for (int rr = 0; rr < rows_; ++rr) {
            const std::size_t j = static_cast<std::size_t>(rr) * width_ + bucket(rr, x);
            scratch_count_[j] -= c;
            scratch_keysum_[j] -= static_cast<__int128>(c) * static_cast<__int128>(x);
            scratch_fp_[j] = (scratch_fp_[j] + neg) % q_;
            if (scratch_count_[j] != 0) queue_.push_back(static_cast<std::uint32_t>(j));
        }
        gfp = (gfp + neg) % q_;
    }
    for (std::size_t i = 0; i < scratch_count_.size(); ++i)
        if (scratch_count_[i] != 0 || scratch_keysum_[i] != 0 || scratch_fp_[i] != 0) return std::nullopt;
    if (gfp != 0) return std::nullopt;

    std::vector<std::pair<std::uint64_t, std::int64_t>> out;
    for (auto [x, v] : found)
        if (v != 0) out.emplace_back(x, v);
    return out;
}

std::optional<std::uint64_t> SparseRecovery::support() const {
    auto items = recover();
    if (!items || items->size() > k_) return std::nullopt;
    return items->size();
}

bool SparseRecovery::is_zero() const {
    if (global_fp_ != 0) return false;
    for (std::size_t i = 0; i < count_.size(); ++i)
        if (count_[i] != 0 || keysum_[i] != 0 || fp_[i] != 0) return false;
    return true;
}

bool SparseRecovery::same_state(const SparseRecovery& o) const {
    return count_ == o.count_ && keysum_ == o.keysum_ && fp_ == o.fp_ && global_fp_ == o.global_fp_ &&
           alpha_ == o.alpha_ && beta_ == o.beta_ && phi_ == o.phi_;
}

std::size_t SparseRecovery::bytes() const {
    return count_.size() * (sizeof(std::int64_t) + sizeof(__int128) + sizeof(std::uint64_t));
}

}  // namespace uvol
