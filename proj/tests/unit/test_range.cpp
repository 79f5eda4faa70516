#include "../support/shapes.hpp"

#include <uvol/dynamic.hpp>
#include <uvol/range_reduction.hpp>
#include <uvol/suffix.hpp>
#include <uvol/truth.hpp>

#include <doctest.h>

using namespace uvol;
using namespace uvol::testing;

namespace {

// Exact inner structures over scaled boxes; they also audit the admitted volumes.
struct Audit {
    std::size_t outside = 0;
    std::vector<InnerParams> params;
};

double scaled_union(std::span<const ObjectPtr> xs) {
    if (xs.empty()) return 0.0;
    std::vector<Aabb> boxes;
    for (const auto& x : xs) boxes.push_back(x->bounds());
    return truth::box_union(boxes) * dynamic_cast<const ScaledOracle&>(*xs.front()).volume_scale();
}

class ExactDynamic final : public DynamicEstimator {
public:
    ExactDynamic(const InnerParams& p, Audit& a) : p_(p), audit_(&a) {}
    void insert(const ObjectPtr& x) override {
        audit_->outside += !p_.window.admits(x->size());
        live_.push_back(x);
    }
    void erase(const ObjectPtr& x) override {
        auto it = std::find(live_.begin(), live_.end(), x);
        REQUIRE(it != live_.end());
        live_.erase(it);
    }
    double estimate() override { return scaled_union(live_); }

private:
    InnerParams p_;
    Audit* audit_;
    std::vector<ObjectPtr> live_;
};

class ExactSuffix final : public SuffixEstimator {
public:
    ExactSuffix(const InnerParams& p, Audit& a) : p_(p), audit_(&a) {}
    void insert(const ObjectPtr& x) override {
        audit_->outside += !p_.window.admits(x->size());
        seq_.push_back(x);
    }
    double estimate(std::int64_t s) override {
        REQUIRE(s >= 1);
        REQUIRE(static_cast<std::size_t>(s) <= seq_.size() + 1);
        return scaled_union(std::span<const ObjectPtr>(seq_).subspan(static_cast<std::size_t>(s - 1)));
    }
    std::uint64_t time() const override { return seq_.size(); }

private:
    InnerParams p_;
    Audit* audit_;
    std::vector<ObjectPtr> seq_;
};

// Boxes whose areas spread over about twelve orders of magnitude.
std::shared_ptr<AxisBox> wide_box(Rng& rng) {
    const double side = std::pow(10.0, uniform(rng, -3, 3));
    const double aspect = uniform(rng, 0.5, 2.0);
    Point lo{uniform(rng, 0, 1000), uniform(rng, 0, 1000)};
    return std::make_shared<AxisBox>(lo, Point{lo[0] + side * aspect, lo[1] + side / aspect});
}

double box_area(const std::vector<ObjectPtr>& xs) {
    std::vector<Aabb> boxes;
    for (const auto& x : xs) boxes.push_back(x->bounds());
    return truth::box_union(boxes);
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("volume classes") {
    using P = std::pair<int, int>;
    CHECK(volume_classes(50, 10) == P{1, 2});
    CHECK(volume_classes(100, 10) == P{1, 2});
    CHECK(volume_classes(100.0001, 10) == P{2, 3});
    CHECK(volume_classes(10, 10) == P{0, 1});
    CHECK(volume_classes(1, 10) == P{-1, 0});
    CHECK(volume_classes(0.5, 10) == P{-1, 0});
    CHECK(volume_classes(1e-7, 10) == P{-8, -7});
    CHECK(code_of([] { volume_classes(0, 10); }) == ErrorCode::kParameter);
    CHECK(code_of([] { volume_classes(1, 1); }) == ErrorCode::kParameter);
    CHECK(class_scale(3, 10) == doctest::Approx(1));
    CHECK(class_scale(1, 10) == doctest::Approx(100));
    CHECK(class_scale(5, 10) == doctest::Approx(0.01));

    // Both classes map the volume into (m^2, m^4].
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double m = uniform(rng, 2, 5000);
        const double v = std::pow(10.0, uniform(rng, -30, 30));
        auto [a, b] = volume_classes(v, m);
        CHECK(b == a + 1);
        for (int l : {a, b}) {
            const double s = v * class_scale(l, m);
            CHECK(s > m * m * (1 - 1e-9));
            CHECK(s <= m * m * m * m * (1 + 1e-9));
        }
    }
}

TEST_CASE("range dynamic: inner parameters") {
    Audit audit;
    RangeReducedDynamic r({20, 0.5, 3}, [&](const InnerParams& p) {
        audit.params.push_back(p);
        return std::make_unique<ExactDynamic>(p, audit);
    });
    CHECK(r.m() == doctest::Approx(120));
    CHECK(r.estimate() == 0.0);
    r.insert(std::make_shared<AxisBox>(Point{0, 0}, Point{3, 3}));
    REQUIRE(audit.params.size() == 2);
    for (const auto& p : audit.params) {
        CHECK(p.n == 20);
        CHECK(p.eps == doctest::Approx(0.5 / 3));
        CHECK(p.window.lo == doctest::Approx(120.0 * 120));
        CHECK(p.window.hi == doctest::Approx(std::pow(120.0, 4)));
    }
    CHECK(audit.params[0].seed != audit.params[1].seed);
    CHECK(r.active_classes() == std::vector<int>{0, 1});
    CHECK(r.estimate() == doctest::Approx(9.0));
}

TEST_CASE("range dynamic: exact inner structures give a one-sided sandwich") {
    Rng rng(2);
    const double n = 40, eps = 0.5;
    for (int trial = 0; trial < 20; ++trial) {
        Audit audit;
        RangeReducedDynamic r({n, eps, 20u + trial}, [&](const InnerParams& p) { return std::make_unique<ExactDynamic>(p, audit); });
        std::vector<ObjectPtr> live;
        for (int op = 0; op < 40; ++op) {
            if (!live.empty() && uniform01(rng) < 0.3) {
                auto k = uniform_below(rng, live.size());
                r.erase(live[k]);
                live.erase(live.begin() + static_cast<std::ptrdiff_t>(k));
            } else {
                live.push_back(wide_box(rng));
                r.insert(live.back());
            }
            const double want = box_area(live);
            const double got = r.estimate();
            if (live.empty()) {
                CHECK(got == 0.0);
                CHECK(r.active_classes().empty());
                continue;
            }
            CHECK(r.active_classes().size() >= 2);
            CHECK(got <= want * (1 + 1e-9));
            CHECK(got >= (1 - eps / 3) * want * (1 - 1e-9));
            std::size_t total = 0;
            for (int l : r.active_classes()) total += r.class_count(l);
            CHECK(total == 2 * live.size());
        }
        CHECK(audit.outside == 0);
    }
}

TEST_CASE("range dynamic: deleting everything restores the empty state") {
    Rng rng(3);
    RangeReducedDynamic r({16, 0.5, 3}, [](const InnerParams& p) {
        static Audit a;
        return std::make_unique<ExactDynamic>(p, a);
    });
    std::vector<ObjectPtr> xs;
    for (int i = 0; i < 8; ++i) {
        xs.push_back(wide_box(rng));
        r.insert(xs.back());
    }
    auto classes = r.active_classes();
    auto extra = wide_box(rng);
    r.insert(extra);
    r.erase(extra);
    CHECK(r.active_classes().size() <= classes.size() + 2);
    for (int l : classes) CHECK(r.class_count(l) > 0);
    for (const auto& x : xs) r.erase(x);
    CHECK(r.active_classes().empty());
    CHECK(r.estimate() == 0.0);
    CHECK(code_of([&] { r.erase(xs[0]); }) == ErrorCode::kUsage);
}

TEST_CASE("range suffix: exact inner structures give a one-sided sandwich on every suffix") {
    Rng rng(4);
    const double n = 40, eps = 0.5;
    for (int trial = 0; trial < 10; ++trial) {
        Audit audit;
        RangeReducedSuffix r({n, eps, 40u + trial}, [&](const InnerParams& p) { return std::make_unique<ExactSuffix>(p, audit); });
        std::vector<ObjectPtr> xs;
        CHECK(r.estimate(1) == 0.0);
        for (int t = 1; t <= 40; ++t) {
            xs.push_back(wide_box(rng));
            r.insert(xs.back());
            CHECK(r.time() == static_cast<std::uint64_t>(t));
            for (int s = 1; s <= t; ++s) {
                std::vector<ObjectPtr> tail(xs.begin() + (s - 1), xs.end());
                const double want = box_area(tail);
                const double got = r.estimate(s);
                CHECK(r.active_classes(s).size() >= 2);
                CHECK(got <= want * (1 + 1e-9));
                CHECK(got >= (1 - eps / 3) * want * (1 - 1e-9));
            }
            CHECK(r.estimate(t + 1) == 0.0);
        }
        CHECK(audit.outside == 0);
        CHECK(code_of([&] { r.estimate(42); }) == ErrorCode::kUsage);
        CHECK(r.estimate(0) == r.estimate(1));
    }
}

TEST_CASE("range reduction around the real estimators") {
    Rng rng(5);
    const double n = 8, eps = 0.9;
    RangeReducedDynamic dyn({n, eps, 5}, [](const InnerParams& p) {
        return std::make_unique<FullyDynamicEstimator>(DynamicConfig{p.n, p.eps, p.seed, {}, {}, p.window});
    });
    RangeReducedSuffix suf({n, eps, 5}, [](const InnerParams& p) {
        return std::make_unique<SuffixStream>(SuffixConfig{p.n, p.eps, p.seed, {}, p.window});
    });
    std::vector<ObjectPtr> xs;
    for (int i = 0; i < 4; ++i) {
        xs.push_back(wide_box(rng));
        dyn.insert(xs.back());
        suf.insert(xs.back());
    }
    const double want = box_area(xs);
    CHECK(std::fabs(dyn.estimate() / want - 1.0) <= eps);
    CHECK(std::fabs(suf.estimate(1) / want - 1.0) <= eps);
    dyn.erase(xs[0]);
    xs.erase(xs.begin());
    CHECK(std::fabs(dyn.estimate() / box_area(xs) - 1.0) <= eps);
}
