#include "../support/shapes.hpp"

#include <uvol/klm.hpp>
#include <uvol/truth.hpp>

#include <doctest.h>

using namespace uvol;
using namespace uvol::testing;

namespace {

std::vector<Aabb> boxes_of(const std::vector<ObjectPtr>& xs) {
    std::vector<Aabb> out;
    for (const auto& x : xs) out.push_back(x->bounds());
    return out;
}

}  // namespace

TEST_CASE("klm: empty input is zero") {
    Rng rng(1);
    auto r = klm_estimate(std::vector<ObjectPtr>{}, 10, rng);
    CHECK(r.value == 0.0);
    CHECK(r.trials == 0);
}

TEST_CASE("klm: trial count") {
    CHECK(klm_trials(2) == static_cast<std::uint64_t>(std::ceil(120 * std::log(2.0))));
    CHECK(klm_trials(1000) == static_cast<std::uint64_t>(std::ceil(120 * std::log(1000.0))));
    CHECK(klm_trials(100, KlmConfig{10, 64}) == 47);
    Rng rng(2);
    std::vector<ObjectPtr> one{std::make_shared<AxisBox>(Point{0, 0}, Point{1, 1})};
    CHECK(klm_estimate(one, 100, rng).trials == klm_trials(100));
}

TEST_CASE("klm: a single object is reported exactly") {
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        auto x = random_convex(rng, 2, 10, 1, 5);
        std::vector<ObjectPtr> xs{x};
        auto r = klm_estimate(xs, 50, rng);
        CHECK(r.value == doctest::Approx(x->size()).epsilon(1e-12));
        CHECK(r.tests == r.trials);
        CHECK(r.restarts == 0);
    }
}

TEST_CASE("klm: identical copies collapse to one volume") {
    Rng rng(4);
    auto x = std::make_shared<AxisBox>(Point{0, 0, 0}, Point{2, 1, 3});
    std::vector<ObjectPtr> xs(7, x);
    double sum = 0.0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) sum += klm_estimate(xs, 7, rng).value;
    CHECK(sum / reps == doctest::Approx(6.0).epsilon(0.03));
}

TEST_CASE("klm: disjoint boxes") {
    Rng rng(5);
    std::vector<ObjectPtr> xs;
    for (int i = 0; i < 8; ++i) xs.push_back(std::make_shared<AxisBox>(Point{3.0 * i, 0}, Point{3.0 * i + 1 + i % 3, 1}));
    const double want = truth::box_union(boxes_of(xs));
    double sum = 0.0;
    const int reps = 50;
    for (int i = 0; i < reps; ++i) sum += klm_estimate(xs, 8, rng).value;
    CHECK(std::fabs(sum / reps / want - 1.0) < 0.1);
}

TEST_CASE("klm: mean over many runs matches the exact union") {
    // Each trial's step count is geometric with mean m/c(x), so the estimator is unbiased
    // up to the step cap, which never binds here.
    Rng rng(6);
    std::vector<ObjectPtr> xs;
    for (int i = 0; i < 12; ++i) xs.push_back(random_box(rng, 2, 10, 1, 5));
    const double want = truth::box_union(boxes_of(xs));
    const int reps = 400;
    double s = 0.0, s2 = 0.0;
    std::uint64_t restarts = 0;
    for (int i = 0; i < reps; ++i) {
        auto r = klm_estimate(xs, 12, rng);
        s += r.value;
        s2 += r.value * r.value;
        restarts += r.restarts;
    }
    const double mean = s / reps;
    const double se = std::sqrt((s2 / reps - mean * mean) / reps);
    CHECK(restarts == 0);
    CHECK(std::fabs(mean - want) < 4 * se);
}

TEST_CASE("klm: constant-factor accuracy with high probability") {
    Rng rng(7);
    int good = 0;
    for (int t = 0; t < 100; ++t) {
        const int m = 10 + static_cast<int>(uniform_below(rng, 41));
        std::vector<ObjectPtr> xs;
        for (int i = 0; i < m; ++i) xs.push_back(random_box(rng, 2, 20, 1, 6));
        const double want = truth::box_union(boxes_of(xs));
        const double got = klm_estimate(xs, m, rng).value;
        good += std::fabs(got - want) <= 0.5 * want;
    }
    CHECK(good >= 99);
}

TEST_CASE("klm: membership queries stay within the trial budget") {
    Rng rng(8);
    OracleCounters counters;
    std::vector<ObjectPtr> xs;
    for (int i = 0; i < 30; ++i) xs.push_back(std::make_shared<CountingOracle>(random_box(rng, 2, 20, 1, 6), &counters));
    auto r = klm_estimate(xs, 30, rng);
    CHECK(counters.contains == r.tests);
    CHECK(counters.sample == r.trials + r.restarts);
    // Expected tests per trial is at most m.
    CHECK(static_cast<double>(r.tests) <= 2.0 * 30 * r.trials);
}

TEST_CASE("klm: parameter errors") {
    Rng rng(9);
    std::vector<ObjectPtr> xs{std::make_shared<AxisBox>(Point{0, 0}, Point{1, 1})};
    CHECK_THROWS_AS(klm_estimate(xs, 1.0, rng), Error);
}

TEST_CASE("klm: deterministic under a fixed seed") {
    std::vector<ObjectPtr> xs;
    Rng g(10);
    for (int i = 0; i < 10; ++i) xs.push_back(random_convex(g, 2, 10, 1, 4));
    Rng a(99), b(99);
    CHECK(klm_estimate(xs, 10, a).value == klm_estimate(xs, 10, b).value);
}
