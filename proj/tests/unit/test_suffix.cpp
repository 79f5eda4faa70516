#include "../support/shapes.hpp"

#include <uvol/suffix.hpp>
#include <uvol/truth.hpp>

#include <doctest.h>

#include <map>
#include <set>

using namespace uvol;
using namespace uvol::testing;

namespace {

SuffixConfig config(double n, double eps, std::uint64_t seed) {
    SuffixConfig c;
    c.n = n;
    c.eps = eps;
    c.seed = seed;
    c.admissible = VolumeWindow{};
    return c;
}

std::deque<TimedSample> at_times(std::initializer_list<std::uint64_t> ts) {
    std::deque<TimedSample> out;
    for (auto t : ts) out.push_back({Point{0.0}, t, 0});
    return out;
}

double exact_area(std::span<const ObjectPtr> xs) {
    std::vector<std::vector<Point>> polys;
    for (const auto& x : xs) {
        if (auto* b = dynamic_cast<const AxisBox*>(x.get()))
            polys.push_back({b->box().lo, Point{b->box().hi[0], b->box().lo[1]}, b->box().hi, Point{b->box().lo[0], b->box().hi[1]}});
        else
            polys.push_back(dynamic_cast<const Simplex&>(*x).vertices());
    }
    return truth::polygon_union_area(polys);
}

ObjectPtr random_planar(Rng& rng, double domain, double smin, double smax) {
    if (uniform_below(rng, 2)) return random_box(rng, 2, domain, smin, smax);
    return random_simplex(rng, 2, domain, smin, smax);
}

}  // namespace

TEST_CASE("suffix: level count and capacity") {
    SuffixStream s(config(40, 0.5, 1));
    CHECK(s.max_level() == static_cast<int>(std::ceil(5 * std::log2(240.0))));
    CHECK(s.capacity() == doctest::Approx(100 * std::log(40.0) / 0.25));
    SuffixStream u(config(1000, 0.1, 1));
    CHECK(u.max_level() == 75);  // 5 * log2(30000) = 74.3
    CHECK(s.time() == 0);
    CHECK(s.stored() == 0);
    for (int l = 0; l <= s.max_level(); ++l) CHECK(s.start(l) == 1);
}

TEST_CASE("suffix: cutoff examples") {
    auto p = at_times({1, 1, 2, 3, 3, 3});
    CHECK(SuffixStream::cutoff(p, 1, 0, 6) == 1);
    CHECK(SuffixStream::cutoff(p, 1, 2, 6) == 2);
    CHECK(SuffixStream::cutoff(p, 1, 2, 5) == 3);
    // A timestamp batch is evicted whole.
    CHECK(SuffixStream::cutoff(p, 1, 4, 6) == 4);
    // Never moves backwards.
    CHECK(SuffixStream::cutoff(p, 5, 0, 100) == 5);
    CHECK(SuffixStream::cutoff(p, 3, 2, 6) == 3);
    CHECK(SuffixStream::cutoff(at_times({}), 7, 10, 5) == 7);
}

TEST_CASE("suffix: cutoff is the smallest admissible start") {
    Rng rng(2);
    for (int t = 0; t < 500; ++t) {
        std::deque<TimedSample> p;
        std::uint64_t time = 1;
        const int m = static_cast<int>(uniform_below(rng, 30));
        for (int i = 0; i < m; ++i) {
            time += uniform_below(rng, 3);
            p.push_back({Point{0.0}, time, 0});
        }
        const std::uint64_t start = 1 + uniform_below(rng, 5);
        const double n = static_cast<double>(uniform_below(rng, 10));
        const double cap = n + static_cast<double>(uniform_below(rng, 25));
        auto count_from = [&](std::uint64_t a) {
            return static_cast<double>(std::count_if(p.begin(), p.end(), [&](const TimedSample& s) { return s.time >= a; }));
        };
        std::uint64_t want = start;
        while (n + count_from(want) > cap) ++want;
        CHECK(SuffixStream::cutoff(p, start, n, cap) == want);
    }
}

TEST_CASE("suffix: an oversized first insert clears the low levels") {
    SuffixStream s(config(10, 0.5, 3));
    std::vector<std::pair<int, bool>> seen;
    s.set_observer([&](int l, std::uint64_t t, std::span<const TimedSample> fresh, bool cleared) {
        CHECK(t == 1);
        if (cleared) CHECK(fresh.empty());
        seen.emplace_back(l, cleared);
    });
    auto big = std::make_shared<AxisBox>(Point{0, 0}, Point{1000, 1000});
    s.insert(big);
    REQUIRE(static_cast<int>(seen.size()) == s.max_level() + 1);
    int first_kept = -1;
    for (int l = 0; l <= s.max_level(); ++l) {
        CHECK(seen[l].first == l);
        if (seen[l].second) {
            CHECK(s.start(l) == 2);
            CHECK(s.samples(l).empty());
        } else {
            if (first_kept < 0) first_kept = l;
            CHECK(s.start(l) == 1);
            CHECK(static_cast<double>(s.samples(l).size()) <= s.capacity());
        }
    }
    // Rate 1e6 / 2^l exceeds the capacity (about 921) for l <= 9 and falls well below it from l = 11.
    CHECK(first_kept >= 9);
    CHECK(first_kept <= 11);
    CHECK(s.query_level(1) == first_kept);
    CHECK(std::fabs(s.estimate(1) / 1e6 - 1.0) < 0.5);
}

TEST_CASE("suffix: reinserting an object replaces its samples") {
    SuffixStream s(config(10, 0.5, 4));
    auto x = std::make_shared<AxisBox>(Point{0, 0}, Point{20, 20});
    s.insert(x);
    s.insert(x);
    for (int l = 0; l <= s.max_level(); ++l)
        for (const auto& p : s.samples(l)) CHECK(p.time == 2);
    CHECK(s.estimate(1) == s.estimate(2));
    CHECK(s.estimate(3) == 0.0);
}

TEST_CASE("suffix: query clamping and errors") {
    SuffixStream s(config(3, 0.5, 5));
    CHECK(s.estimate(1) == 0.0);
    CHECK(s.estimate(0) == 0.0);
    CHECK(s.estimate(-4) == 0.0);
    auto x = std::make_shared<AxisBox>(Point{0, 0}, Point{10, 10});
    s.insert(x);
    CHECK(s.estimate(-4) == s.estimate(1));
    CHECK(s.estimate(2) == 0.0);
    auto code_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::kInternal;
    };
    CHECK(code_of([&] { s.estimate(3); }) == ErrorCode::kUsage);
    s.insert(x);
    s.insert(x);
    CHECK(code_of([&] { s.insert(x); }) == ErrorCode::kUsage);
    CHECK(code_of([] { SuffixStream bad(config(5, 0.0, 1)); }) == ErrorCode::kParameter);

    SuffixConfig c = config(10, 0.5, 1);
    c.admissible.reset();  // ((60)^2, (60)^4]
    SuffixStream w(c);
    CHECK(code_of([&] { w.insert(x); }) == ErrorCode::kUsage);
}

TEST_CASE("suffix: stored points are exactly the surviving fresh draws") {
    // Level l keeps every draw made at a time >= start(l) that no later object contains.
    Rng rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        const double n = 60;
        SuffixStream s(config(n, 0.5, 60 + trial));
        std::vector<std::vector<TimedSample>> drawn(static_cast<std::size_t>(s.max_level()) + 1);
        s.set_observer([&](int l, std::uint64_t, std::span<const TimedSample> fresh, bool cleared) {
            if (cleared) drawn[l].clear();
            drawn[l].insert(drawn[l].end(), fresh.begin(), fresh.end());
        });
        std::vector<ObjectPtr> xs;
        for (int t = 1; t <= 60; ++t) {
            xs.push_back(random_planar(rng, 100, 5, 40));
            s.insert(xs.back());
            for (int l = 0; l <= s.max_level(); l += 3) {
                std::set<std::uint64_t> want;
                for (const auto& p : drawn[l]) {
                    if (p.time < s.start(l)) continue;
                    bool covered = false;
                    for (std::size_t k = p.time; k < xs.size() && !covered; ++k) covered = xs[k]->contains(p.point);
                    if (!covered) want.insert(p.id);
                }
                std::set<std::uint64_t> got;
                for (const auto& p : s.samples(l)) got.insert(p.id);
                REQUIRE(got == want);
                CHECK(static_cast<double>(s.samples(l).size()) <= s.capacity());
                CHECK(std::is_sorted(s.samples(l).begin(), s.samples(l).end(),
                                     [](const TimedSample& a, const TimedSample& b) { return a.time < b.time; }));
            }
        }
    }
}

TEST_CASE("suffix: level starts are monotone in time and level") {
    Rng rng(7);
    SuffixStream s(config(80, 0.5, 7));
    std::vector<std::uint64_t> prev(static_cast<std::size_t>(s.max_level()) + 1, 1);
    for (int t = 0; t < 80; ++t) {
        s.insert(random_planar(rng, 200, 10, 80));
        for (int l = 0; l <= s.max_level(); ++l) {
            CHECK(s.start(l) >= prev[l]);
            prev[l] = s.start(l);
            if (l > 0) CHECK(s.start(l) <= s.start(l - 1));
        }
        CHECK(static_cast<double>(s.stored()) <= (s.max_level() + 1) * s.capacity());
    }
}

TEST_CASE("suffix: every suffix estimate is accurate") {
    Rng rng(8);
    const double eps = 0.5;
    int checks = 0, good = 0;
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 50;
        SuffixStream s(config(n, eps, 80 + trial));
        std::vector<ObjectPtr> xs;
        for (int t = 1; t <= n; ++t) {
            xs.push_back(random_planar(rng, 120, 5, 50));
            s.insert(xs.back());
            if (t % 10) continue;
            for (int a = 1; a <= t; ++a) {
                const double want = exact_area(std::span<const ObjectPtr>(xs).subspan(static_cast<std::size_t>(a - 1)));
                ++checks;
                good += std::fabs(s.estimate(a) / want - 1.0) <= eps;
            }
        }
    }
    CHECK(good >= checks - checks / 50);
}

TEST_CASE("suffix: the chosen level holds enough points") {
    // The level answering a query is the lowest one whose window reaches back to s, so one level
    // lower the suffix mass already overflowed the capacity.
    Rng rng(9);
    SuffixStream s(config(60, 0.5, 9));
    std::vector<ObjectPtr> xs;
    for (int t = 1; t <= 60; ++t) {
        xs.push_back(random_planar(rng, 300, 20, 150));
        s.insert(xs.back());
    }
    int bad = 0;
    for (int a = 1; a <= 60; ++a) {
        const int l = s.query_level(a);
        REQUIRE(l >= 0);
        if (l == 0) continue;
        const double mass = std::ldexp(exact_area(std::span<const ObjectPtr>(xs).subspan(static_cast<std::size_t>(a - 1))), -(l - 1));
        bad += mass < 0.5 * s.capacity();
    }
    CHECK(bad == 0);
}
