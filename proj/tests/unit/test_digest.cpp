#include "../support/shapes.hpp"

#include <uvol/digest.hpp>
#include <uvol/truth.hpp>

#include <doctest.h>

#include <map>
#include <set>

using namespace uvol;
using namespace uvol::testing;

namespace {

DigestConfig config(double n, double eps) {
    DigestConfig c;
    c.n = n;
    c.eps = eps;
    return c;
}

std::vector<ObjectPtr> random_family(Rng& rng, int m, double domain = 30) {
    std::vector<ObjectPtr> xs;
    for (int i = 0; i < m; ++i)
        xs.push_back(i % 2 ? ObjectPtr(random_box(rng, 2, domain, 2, 8)) : ObjectPtr(random_simplex(rng, 2, domain, 2, 8)));
    return xs;
}

double exact_area(const std::vector<ObjectPtr>& xs) {
    std::vector<std::vector<Point>> polys;
    for (const auto& x : xs) {
        if (auto* b = dynamic_cast<const AxisBox*>(x.get()))
            polys.push_back({b->box().lo, Point{b->box().hi[0], b->box().lo[1]}, b->box().hi, Point{b->box().lo[0], b->box().hi[1]}});
        else
            polys.push_back(dynamic_cast<const Simplex&>(*x).vertices());
    }
    return truth::polygon_union_area(polys);
}

// Every stored sample lies in the union and carries the true number of live objects covering it.
void check_cover(const DecrementalDigest& dg) {
    std::size_t bad = 0;
    dg.samples().for_each([&](const SampleRecord& r) {
        int c = 0;
        for (const auto& x : dg.objects()) c += x->contains(r.point);
        bad += c == 0 || c != r.cover;
    });
    CHECK(bad == 0);
}

}  // namespace

TEST_CASE("sample index matches a flat list") {
    Rng rng(1);
    for (int d = 1; d <= 3; ++d) {
        SampleIndex idx;
        Aabb dom{Point(d), Point(d)};
        for (int i = 0; i < d; ++i) dom.hi[i] = 10;
        idx.reset(dom, 500);
        std::map<std::uint64_t, Point> ref;
        std::uint64_t id = 1;
        for (int round = 0; round < 40; ++round) {
            for (int i = 0; i < 50; ++i) {
                Point p(d);
                for (int k = 0; k < d; ++k) p[k] = uniform(rng, -1, 11);  // some points outside the domain
                idx.add(p, id);
                ref[id++] = p;
            }
            Aabb q = random_box(rng, d, 10, 1, 6)->box();
            const bool odd = round % 2;
            std::set<std::uint64_t> seen;
            idx.for_each_in(q, [&](const SampleRecord& r) { seen.insert(r.id); });
            std::set<std::uint64_t> want;
            for (const auto& [k, p] : ref)
                if (q.contains(p)) want.insert(k);
            CHECK(seen == want);
            idx.erase_in(q, [&](const SampleRecord& r) { return (r.id % 2 == 1) == odd; });
            for (auto k : want)
                if ((k % 2 == 1) == odd) ref.erase(k);
            if (round % 7 == 6) {
                idx.erase_if([](const SampleRecord& r) { return r.id % 3 == 0; });
                std::erase_if(ref, [](const auto& kv) { return kv.first % 3 == 0; });
            }
            REQUIRE(idx.size() == ref.size());
        }
        std::set<std::uint64_t> all;
        for (const auto& r : idx.snapshot()) all.insert(r.id);
        std::set<std::uint64_t> want;
        for (const auto& kv : ref) want.insert(kv.first);
        CHECK(all == want);
        idx.clear();
        CHECK(idx.empty());
    }
}

TEST_CASE("resample: empty family and missing level") {
    Rng rng(2);
    SampleIndex out;
    std::uint64_t next = 1;
    CHECK(DecrementalDigest::resample({}, 0, 100, rng, out, next));
    CHECK(out.empty());
    std::vector<ObjectPtr> xs{std::make_shared<AxisBox>(Point{0, 0}, Point{1, 1})};
    CHECK(DecrementalDigest::resample(xs, DecrementalDigest::kNoLevel, 100, rng, out, next));
    CHECK(out.empty());
}

TEST_CASE("resample: count is Poisson with the union mass") {
    Rng rng(3);
    std::vector<ObjectPtr> xs{std::make_shared<AxisBox>(Point{0, 0}, Point{4, 4}),
                              std::make_shared<AxisBox>(Point{2, 2}, Point{6, 6}),
                              std::make_shared<AxisBox>(Point{5, 0}, Point{7, 3})};
    const double area = 16 + 16 - 4 + 6 - 1;  // 33
    const int level = -1;                      // rate 66
    const int reps = 4000;
    double s = 0, s2 = 0;
    long long in_overlap = 0, total = 0;
    Aabb overlap{Point{2, 2}, Point{4, 4}};
    for (int i = 0; i < reps; ++i) {
        SampleIndex out;
        std::uint64_t next = 1;
        REQUIRE(DecrementalDigest::resample(xs, level, 1e9, rng, out, next));
        double c = static_cast<double>(out.size());
        s += c;
        s2 += c * c;
        out.for_each([&](const SampleRecord& r) {
            in_overlap += overlap.contains(r.point);
            ++total;
            bool inside = false;
            for (const auto& x : xs) inside |= x->contains(r.point);
            CHECK(inside);
        });
    }
    const double rate = std::ldexp(area, -level);
    const double mean = s / reps, var = s2 / reps - mean * mean;
    CHECK(std::fabs(mean - rate) < 4 * std::sqrt(rate / reps));
    CHECK(var == doctest::Approx(rate).epsilon(0.1));
    // Uniform over the union: the doubly covered square holds 4/33 of the points.
    const double p = 4.0 / area;
    CHECK(std::fabs(static_cast<double>(in_overlap) / total - p) < 4 * std::sqrt(p * (1 - p) / total));
}

TEST_CASE("resample: aborts past the cap and leaves nothing behind") {
    Rng rng(4);
    std::vector<ObjectPtr> xs{std::make_shared<AxisBox>(Point{0, 0}, Point{10, 10})};
    SampleIndex out;
    std::uint64_t next = 1;
    CHECK_FALSE(DecrementalDigest::resample(xs, 0, 20, rng, out, next));  // rate 100
    CHECK(out.empty());
}

TEST_CASE("resample: first ids partition the draws per object") {
    Rng rng(5);
    auto xs = random_family(rng, 6);
    SampleIndex out;
    std::uint64_t next = 10;
    std::vector<std::uint64_t> first;
    REQUIRE(DecrementalDigest::resample(xs, -2, 1e9, rng, out, next, &first));
    REQUIRE(first.size() == xs.size() + 1);
    CHECK(first.front() == 10);
    CHECK(first.back() == next);
    CHECK(std::is_sorted(first.begin(), first.end()));
    out.for_each([&](const SampleRecord& r) {
        auto j = static_cast<std::size_t>(std::upper_bound(first.begin(), first.end(), r.id) - first.begin()) - 1;
        CHECK(xs[j]->contains(r.point));
        for (std::size_t k = j + 1; k < xs.size(); ++k) CHECK_FALSE(xs[k]->contains(r.point));
    });
}

TEST_CASE("digest: empty and singleton families") {
    Rng rng(6);
    DecrementalDigest empty(config(16, 0.5), rng);
    empty.initialize({});
    CHECK_FALSE(empty.has_level());
    CHECK(empty.estimate() == 0.0);

    int good = 0;
    for (int t = 0; t < 50; ++t) {
        auto x = random_convex(rng, 2, 100, 10, 60);
        DecrementalDigest dg(config(16, 0.5), rng);
        dg.initialize({x});
        REQUIRE(dg.has_level());
        check_cover(dg);
        good += std::fabs(dg.estimate() / x->size() - 1.0) <= 0.5;
        dg.erase(*x);
        CHECK_FALSE(dg.has_level());
        CHECK(dg.estimate() == 0.0);
        CHECK(dg.samples().empty());
    }
    CHECK(good >= 49);
}

TEST_CASE("digest: initial level and sample size") {
    Rng rng(7);
    int near = 0;
    const int trials = 60;
    for (int t = 0; t < trials; ++t) {
        auto xs = random_family(rng, 16);
        DecrementalDigest dg(config(16, 0.5), rng);
        dg.initialize(xs);
        REQUIRE_FALSE(dg.last_resample_aborted());
        const int want = level(exact_area(xs), 16, 0.5);
        near += std::abs(dg.level() - want) <= 1;
        CHECK(static_cast<double>(dg.samples().size()) >= dg.refresh_floor());
        CHECK(static_cast<double>(dg.samples().size()) <= dg.resample_cap());
        check_cover(dg);
    }
    CHECK(near >= trials - 2);
}

TEST_CASE("digest: thresholds scale with log n over eps squared") {
    Rng rng(8);
    DecrementalDigest dg(config(100, 0.2), rng);
    const double base = std::log(100.0) / 0.04;
    CHECK(dg.resample_cap() == doctest::Approx(160 * base));
    CHECK(dg.refresh_floor() == doctest::Approx(24 * base));
    CHECK(dg.level_floor() == doctest::Approx(32 * base));
}

TEST_CASE("digest: deletions keep coverage counts exact and estimates accurate") {
    Rng rng(9);
    const double eps = 0.5;
    int checks = 0, good = 0;
    for (int t = 0; t < 10; ++t) {
        auto xs = random_family(rng, 32, 40);
        DecrementalDigest dg(config(32, eps), rng);
        dg.initialize(xs);
        auto order = xs;
        std::shuffle(order.begin(), order.end(), rng);
        auto live = xs;
        for (const auto& x : order) {
            const int before = dg.level();
            const std::size_t refreshes = dg.refresh_count();
            std::size_t dropped = 0;
            std::vector<SampleRecord> before_samples = dg.samples().snapshot();
            const bool refreshed = dg.erase(*x, [&](const SampleRecord& r) {
                ++dropped;
                CHECK(x->contains(r.point));
                CHECK(r.cover == 0);
            });
            std::erase_if(live, [&](const ObjectPtr& p) { return p.get() == x.get(); });
            CHECK(dg.objects().size() == live.size());
            if (refreshed) {
                CHECK(dg.refresh_count() == refreshes + 1);
                if (!live.empty()) CHECK(dg.level() <= before - 1);
            } else {
                // Without a refresh the sample shrinks to exactly the points no live object covers.
                std::size_t uncovered = 0;
                for (const auto& r : before_samples) {
                    bool in = false;
                    for (const auto& y : live) in |= y->contains(r.point);
                    uncovered += !in;
                }
                CHECK(dropped == uncovered);
                CHECK(dg.samples().size() == before_samples.size() - uncovered);
                CHECK(dg.level() == before);
            }
            check_cover(dg);
            if (!live.empty() && !dg.last_resample_aborted()) {
                ++checks;
                good += std::fabs(dg.estimate() / exact_area(live) - 1.0) <= eps;
            }
        }
        CHECK_FALSE(dg.has_level());
        CHECK(dg.estimate() == 0.0);
    }
    CHECK(good >= checks - checks / 50);
}

TEST_CASE("digest: refreshes stay logarithmic over a full deletion sequence") {
    Rng rng(10);
    const double n = 256, eps = 0.5;
    auto xs = random_family(rng, 256, 80);
    DecrementalDigest dg(config(n, eps), rng);
    dg.initialize(xs);
    const std::size_t initial = dg.refresh_count();
    std::size_t refreshed = 0;
    std::shuffle(xs.begin(), xs.end(), rng);
    for (const auto& x : xs) refreshed += dg.erase(*x);
    CHECK(dg.refresh_count() == initial + refreshed);
    CHECK(static_cast<double>(refreshed) <= 5 * std::log2(n / eps));
}

TEST_CASE("digest: aborts are rare") {
    Rng rng(11);
    int aborted = 0;
    for (int t = 0; t < 200; ++t) {
        DecrementalDigest dg(config(16, 0.5), rng);
        dg.initialize(random_family(rng, 16));
        aborted += dg.last_resample_aborted();
    }
    CHECK(aborted <= 1);
}

TEST_CASE("digest: usage errors") {
    Rng rng(12);
    CHECK_THROWS_AS(DecrementalDigest(config(1, 0.5), rng), Error);
    CHECK_THROWS_AS(DecrementalDigest(config(16, 1.0), rng), Error);
    CHECK_THROWS_AS(DecrementalDigest(config(16, 0.0), rng), Error);

    DecrementalDigest dg(config(16, 0.5), rng);
    auto a = std::make_shared<AxisBox>(Point{0, 0}, Point{10, 10});
    auto b = std::make_shared<AxisBox>(Point{0, 0}, Point{10, 10});
    dg.initialize({a});
    try {
        dg.erase(*b);  // equal shape, different object
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kUsage);
    }

    DigestConfig c = config(16, 0.5);
    c.admissible = {50, 200};
    DecrementalDigest win(c, rng);
    try {
        win.initialize({a, std::make_shared<AxisBox>(Point{0, 0}, Point{1, 1})});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kUsage);
    }
}
