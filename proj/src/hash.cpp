#include <uvol/weak_sampling.hpp>

#include <bit>

namespace uvol {

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

constexpr std::uint64_t kMaxUniverse = std::uint64_t{1} << 62;

}  // namespace

Point GridPoint::to_point() const {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = static_cast<double>(c[i]);
    return p;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // These bases are deterministic for all 64-bit n.
    for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t next_prime(std::uint64_t n) {
    if (n <= 2) return 2;
    if (n > (std::uint64_t{1} << 63)) fail(ErrorCode::kUnsupported, "next_prime: argument too large");
    while (!is_prime(n)) ++n;
    return n;
}

std::uint64_t HashParams::grid_size() const {
    u128 g = 1;
    for (int i = 0; i < dim; ++i) g *= delta;
    return static_cast<std::uint64_t>(g);
}

std::uint64_t HashParams::key_min() const {
    std::uint64_t k = 0, w = 1;
    for (int i = 0; i < dim; ++i) {
        k += w;
        w *= delta;
    }
    return k;
}

std::uint64_t HashParams::key_max() const { return key_min() + grid_size() - 1; }

std::uint64_t HashParams::key(const GridPoint& x) const {
    if (x.dim != dim) fail(ErrorCode::kUsage, "grid point has the wrong dimension");
    std::uint64_t k = 0, w = 1;
    for (int i = 0; i < dim; ++i) {
        if (x[i] < 1 || static_cast<std::uint64_t>(x[i]) > delta) fail(ErrorCode::kUsage, "grid point lies off the grid");
        k += w * static_cast<std::uint64_t>(x[i]);
        w *= delta;
    }
    return k;
}

std::uint64_t HashParams::eval_key(std::uint64_t k) const {
    return static_cast<std::uint64_t>((static_cast<u128>(b) * (k % p) + a) % p);
}

std::uint64_t HashParams::eval(const GridPoint& x) const { return eval_key(key(x)); }

std::uint64_t HashParams::threshold(int l) const {
    if (l < 0) fail(ErrorCode::kParameter, "level must be nonnegative");
    if (l >= 64) return 0;
    u128 c = (static_cast<u128>(p) + ((u128{1} << l) - 1)) >> l;
    return static_cast<std::uint64_t>(c) - 1;
}

double HashParams::q(int l) const { return static_cast<double>(threshold(l) + 1) / static_cast<double>(p); }

int HashParams::top_level() const { return 63 - std::countl_zero(p); }

bool HashParams::decode(std::uint64_t k, GridPoint& out) const {
    if (k < key_min() || k > key_max()) return false;
    std::uint64_t r = k - key_min();
    out.dim = dim;
    for (int i = 0; i < dim; ++i) {
        out[i] = static_cast<std::int64_t>(r % delta) + 1;
        r /= delta;
    }
    return true;
}

HashParams hash_params(std::uint64_t delta, int d, std::uint64_t a, std::uint64_t b) {
    if (delta < 2) fail(ErrorCode::kParameter, "grid side must be at least 2");
    if (d < 1 || d > kMaxDim) fail(ErrorCode::kUnsupported, "unsupported grid dimension");
    u128 g = 1;
    for (int i = 0; i < d; ++i) {
        g *= delta;
        if (g > kMaxUniverse) fail(ErrorCode::kUnsupported, "grid universe exceeds 2^62 points");
    }
    HashParams hp;
    hp.delta = delta;
    hp.dim = d;
    hp.p = next_prime(static_cast<std::uint64_t>(g));
    hp.a = a % hp.p;
    hp.b = b % hp.p;
    return hp;
}

HashParams make_hash(std::uint64_t delta, int d, Rng& rng) {
    HashParams hp = hash_params(delta, d, 0, 0);
    hp.a = uniform_below(rng, hp.p);
    hp.b = uniform_below(rng, hp.p);
    return hp;
}

namespace {

// Smallest x >= 0 with l <= (a x) mod m <= r, for 0 <= l <= r < m and a < m.
std::optional<u128> first_in_range(u128 a, u128 m, u128 l, u128 r) {
    if (l == 0) return 0;
    if (a == 0) return std::nullopt;
    u128 k = (l + a - 1) / a;
    if (a * k <= r) return k;
    auto y = first_in_range(m % a, a, (a - r % a) % a, (a - l % a) % a);
    if (!y) return std::nullopt;
    return (l + m * *y + a - 1) / a;
}

}  // namespace

std::optional<std::uint64_t> first_hit(std::uint64_t b, std::uint64_t c, std::uint64_t p, std::uint64_t t) {
    b %= p;
    c %= p;
    if (c <= t) return 0;
    if (t >= p) return 0;
    auto k = first_in_range(b, p, p - c, p - c + t);
    if (!k) return std::nullopt;
    return static_cast<std::uint64_t>(*k);
}

}  // namespace uvol
