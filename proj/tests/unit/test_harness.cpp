#include "../support/shapes.hpp"

#include <uvol/harness.hpp>
#include <uvol/json_io.hpp>

#include <doctest.h>

#include <cstdlib>
#include <map>
#include <sstream>

using namespace uvol;
using namespace uvol::harness;

namespace {

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::kInternal;
}

std::string dump(const std::vector<WorkloadOp>& ops) {
    std::ostringstream out;
    write_workload(out, ops);
    return out.str();
}

WorkloadSpec small(const std::string& generator, const std::string& estimator) {
    WorkloadSpec s;
    s.generator = generator;
    s.estimator = estimator;
    s.n = 24;
    s.eps = 0.5;
    s.seed = 3;
    s.domain = 30;
    s.size_min = 3;
    s.size_max = 8;
    return s;
}

}  // namespace

TEST_CASE("spec JSON round trip") {
    WorkloadSpec s = small("sliding-window", "suffix");
    s.window = 7;
    s.shapes = {"box", "simplex"};
    s.query_every = 3;
    WorkloadSpec back = spec_from_json(spec_to_json(s));
    CHECK(spec_to_json(back) == spec_to_json(s));
    CHECK(back.window == 7);
    CHECK(back.shapes == std::vector<std::string>{"box", "simplex"});

    WorkloadSpec c = small("random-convex", "convex");
    c.convex.R = 50;
    c.convex.copies = 3;
    c.convex.filter = "ilp";
    WorkloadSpec cb = spec_from_json(spec_to_json(c));
    CHECK(cb.convex.R == 50);
    CHECK(cb.convex.copies == 3);
    CHECK(cb.convex.filter == "ilp");

    // Missing fields take defaults.
    WorkloadSpec d = spec_from_json(json::parse(R"({"n": 12})"));
    CHECK(d.n == 12);
    CHECK(d.generator == "random-boxes");
    CHECK(d.eps == 0.25);

    CHECK(code_of([] { spec_from_json(json::parse(R"({"n": 12, "colour": 1})")); }) == ErrorCode::kConfig);
    CHECK(code_of([] { spec_from_json(json::parse(R"({"n": "twelve"})")); }) == ErrorCode::kConfig);
    CHECK(code_of([] { spec_from_json(json::parse("[1, 2]")); }) == ErrorCode::kConfig);
}

TEST_CASE("spec validation") {
    std::vector<std::function<void(WorkloadSpec&)>> breakers{
        [](WorkloadSpec& s) { s.generator = "spiral"; },
        [](WorkloadSpec& s) { s.estimator = "oracle"; },
        [](WorkloadSpec& s) { s.wrap = "both"; },
        [](WorkloadSpec& s) { s.d = 0; },
        [](WorkloadSpec& s) { s.eps = 1.0; },
        [](WorkloadSpec& s) { s.n = 0; },
        [](WorkloadSpec& s) { s.size_min = 0; },
        [](WorkloadSpec& s) { s.size_max = 1; },
        [](WorkloadSpec& s) { s.delete_prob = 1.0; },
        [](WorkloadSpec& s) { s.query_every = 0; },
        [](WorkloadSpec& s) { s.truth = "oracle"; },
        [](WorkloadSpec& s) { s.truth = "grid"; },
        [](WorkloadSpec& s) { s.shapes = {"torus"}; },
        [](WorkloadSpec& s) { s.domain = 5; },
        [](WorkloadSpec& s) {
            s.estimator = "suffix";
            s.generator = "insert-all-delete-all";
        },
        [](WorkloadSpec& s) {
            s.estimator = "klm";
            s.wrap = "range";
        },
        [](WorkloadSpec& s) {
            s.estimator = "convex";
            s.convex.copies = 2;
        },
        [](WorkloadSpec& s) {
            s.estimator = "convex";
            s.convex.r = 40;
        },
        [](WorkloadSpec& s) {
            s.estimator = "convex";
            s.convex.box = "sphere";
        },
    };
    CHECK_NOTHROW(validate(small("random-boxes", "dynamic")));
    for (std::size_t i = 0; i < breakers.size(); ++i) {
        WorkloadSpec s = small("random-boxes", "dynamic");
        breakers[i](s);
        CAPTURE(i);
        CHECK(code_of([&] { validate(s); }) == ErrorCode::kConfig);
    }
}

TEST_CASE("generators") {
    SUBCASE("random boxes stay in the domain with the requested sizes") {
        WorkloadSpec s = small("random-boxes", "dynamic");
        s.n = 200;
        auto ops = generate(s);
        std::uint64_t updates = 0;
        std::map<std::int64_t, int> live;
        for (const auto& op : ops) {
            if (op.op == OpKind::kEstimate) continue;
            ++updates;
            if (op.op == OpKind::kInsert) {
                CHECK(op.object->kind() == "box");
                const Aabb b = op.object->bounds();
                for (int i = 0; i < 2; ++i) {
                    CHECK(b.lo[i] >= 0.0);
                    CHECK(b.hi[i] <= s.domain);
                    CHECK(b.hi[i] - b.lo[i] <= s.size_max);
                    CHECK(b.hi[i] - b.lo[i] >= 0.5 * s.size_min);
                }
                CHECK(++live[op.label] == 1);
            } else {
                CHECK(--live[op.label] == 0);
            }
        }
        CHECK(updates == s.n);
        CHECK(ops.back().op == OpKind::kEstimate);
    }
    SUBCASE("suffix workloads only insert") {
        WorkloadSpec s = small("random-simplices", "suffix");
        for (const auto& op : generate(s)) {
            CHECK(op.op != OpKind::kDelete);
            if (op.op == OpKind::kInsert) CHECK(op.object->kind() == "simplex");
        }
    }
    SUBCASE("sliding window") {
        WorkloadSpec s = small("sliding-window", "suffix");
        s.window = 5;
        std::int64_t t = 0;
        for (const auto& op : generate(s)) {
            if (op.op == OpKind::kInsert) ++t;
            if (op.op == OpKind::kEstimate) CHECK(op.s == std::max<std::int64_t>(1, t - 4));
        }
        WorkloadSpec d = small("sliding-window", "dynamic");
        d.window = 5;
        std::size_t live = 0;
        for (const auto& op : generate(d)) {
            live += op.op == OpKind::kInsert;
            live -= op.op == OpKind::kDelete;
            CHECK(live <= 5);
        }
    }
    SUBCASE("insert all then delete all") {
        WorkloadSpec s = small("insert-all-delete-all", "dynamic");
        auto ops = generate(s);
        std::size_t live = 0, peak = 0;
        for (const auto& op : ops) {
            live += op.op == OpKind::kInsert;
            live -= op.op == OpKind::kDelete;
            peak = std::max(peak, live);
        }
        CHECK(live == 0);
        CHECK(peak == s.n / 2);
    }
    SUBCASE("volume ramp spans M") {
        WorkloadSpec s = small("volume-ramp", "suffix");
        s.M = 1e6;
        s.size_min = 1;
        s.n = 300;
        double lo = 1e300, hi = 0;
        for (const auto& op : generate(s))
            if (op.op == OpKind::kInsert) {
                lo = std::min(lo, op.object->size());
                hi = std::max(hi, op.object->size());
            }
        CHECK(hi / lo > 1e4);
        CHECK(hi <= 1e6 * 1.0001);
    }
    SUBCASE("convex workloads respect R and r") {
        WorkloadSpec s = small("random-convex", "convex");
        s.convex.R = 40;
        s.convex.r = 3;
        s.size_min = 8;
        s.size_max = 20;
        for (const auto& op : generate(s)) {
            if (op.op != OpKind::kInsert) continue;
            const Aabb b = op.object->bounds();
            for (int i = 0; i < 2; ++i) {
                CHECK(b.lo[i] >= -1e-9);
                CHECK(b.hi[i] <= 40 + 1e-9);
            }
            if (auto r = op.object->inner_radius()) CHECK(*r >= 3 - 1e-9);
        }
    }
    SUBCASE("query cadence") {
        WorkloadSpec s = small("random-boxes", "dynamic");
        s.query_every = 4;
        std::uint64_t queries = 0;
        for (const auto& op : generate(s)) queries += op.op == OpKind::kEstimate;
        CHECK(queries == s.n / 4);
    }
}

TEST_CASE("generation is deterministic in the seed") {
    WorkloadSpec s = small("random-convex", "dynamic");
    CHECK(dump(generate(s)) == dump(generate(s)));
    WorkloadSpec t = s;
    t.seed = 4;
    CHECK(dump(generate(s)) != dump(generate(t)));
}

TEST_CASE("workload files round trip") {
    WorkloadSpec s = small("random-convex", "dynamic");
    auto ops = generate(s);
    std::istringstream in(dump(ops));
    auto back = read_workload(in);
    REQUIRE(back.size() == ops.size());
    CHECK(dump(back) == dump(ops));
    for (std::size_t i = 0; i < ops.size(); ++i) {
        CHECK(back[i].op == ops[i].op);
        CHECK(back[i].label == ops[i].label);
        if (ops[i].object) CHECK(back[i].object->size() == doctest::Approx(ops[i].object->size()).epsilon(1e-12));
    }
}

TEST_CASE("run: insert-all-delete-all ends at zero") {
    WorkloadSpec s = small("insert-all-delete-all", "dynamic");
    s.n = 20;
    auto r = run(s);
    REQUIRE_FALSE(r.records.empty());
    CHECK(r.records.back().estimate == 0.0);
    CHECK(r.records.back().truth == 0.0);
    CHECK_FALSE(r.records.back().failed);
}

TEST_CASE("run: replaying a generated trace reproduces the run") {
    WorkloadSpec s = small("random-boxes", "dynamic");
    auto a = run(s);
    auto b = run(s, generate(s));
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].estimate == b.records[i].estimate);
        CHECK(a.records[i].truth == b.records[i].truth);
    }
    CHECK(a.summary.queries == a.records.size());
}

TEST_CASE("run: every estimator kind") {
    for (const std::string est : {"dynamic", "suffix", "klm"}) {
        WorkloadSpec s = small("random-boxes", est);
        auto r = run(s);
        CAPTURE(est);
        CHECK(r.summary.queries > 0);
        for (const auto& q : r.records) CHECK(std::isfinite(q.estimate));
    }
    WorkloadSpec c = small("random-convex", "convex");
    c.n = 6;
    c.eps = 0.9;
    c.convex.R = 8;
    c.convex.r = 1;
    c.size_min = 2;
    c.size_max = 6;
    auto r = run(c);
    CHECK(r.summary.queries > 0);
    bool covered = false;
    for (const auto& q : r.records) {
        CHECK(q.truth >= 0.0);
        CHECK(std::isfinite(q.estimate));
        covered |= q.truth > 0.0;
    }
    CHECK(covered);
}

TEST_CASE("sweeps are independent of the thread count") {
    WorkloadSpec s = small("random-simplices", "dynamic");
    s.n = 12;
    auto one = sweep(s, {1, 2, 3, 4}, 1);
    auto many = sweep(s, {1, 2, 3, 4}, 3);
    REQUIRE(one.records.size() == many.records.size());
    for (std::size_t i = 0; i < one.records.size(); ++i) {
        CHECK(one.records[i].seed == many.records[i].seed);
        CHECK(one.records[i].estimate == many.records[i].estimate);
    }
    CHECK(one.summary.trials == 4);
}

TEST_CASE("summaries and CSV") {
    std::vector<QueryRecord> recs;
    for (int i = 0; i < 20; ++i) {
        QueryRecord q;
        q.seed = 1;
        q.t = static_cast<std::uint64_t>(i);
        q.op = "estimate";
        q.estimate = 1.0 + 0.01 * i;
        q.truth = 1.0;
        q.rel_err = 0.01 * i;
        q.failed = i >= 18;
        recs.push_back(q);
    }
    Summary s = summarize(recs);
    CHECK(s.queries == 20);
    CHECK(s.failures == 2);
    CHECK(s.failure_rate == doctest::Approx(0.1));
    CHECK(s.p50 == doctest::Approx(0.09));  // floor(0.5 * 19) = 9
    CHECK(s.p95 == doctest::Approx(0.18));  // floor(0.95 * 19) = 18
    CHECK(s.max_rel_err == doctest::Approx(0.19));
    CHECK(summarize({}).queries == 0);

    std::ostringstream out;
    write_csv(out, recs);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "seed,t,op,estimate,truth,rel_err,oracle_calls");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 20);

    TrialReport r;
    r.records = recs;
    r.summary = s;
    json j = summary_to_json(r);
    CHECK(j.at("queries") == 20);
    CHECK(j.at("failures") == 2);
}

TEST_CASE("UVOL_SEED") {
    ::unsetenv("UVOL_SEED");
    CHECK_FALSE(env_seed().has_value());
    ::setenv("UVOL_SEED", "42", 1);
    CHECK(env_seed() == 42u);
    ::setenv("UVOL_SEED", "4x", 1);
    CHECK(code_of([] { env_seed(); }) == ErrorCode::kConfig);
    ::setenv("UVOL_SEED", "-1", 1);
    CHECK(code_of([] { env_seed(); }) == ErrorCode::kConfig);
    ::unsetenv("UVOL_SEED");
}

TEST_CASE("verify suites") {
    auto suites = verify_suites();
    CHECK(std::find(suites.begin(), suites.end(), "ilp") != suites.end());
    auto res = verify("ilp", 1);
    REQUIRE_FALSE(res.empty());
    for (const auto& r : res) CHECK_MESSAGE(r.pass, r.name << ": " << r.detail);
    CHECK(code_of([] { verify("nonsense", 1); }) == ErrorCode::kConfig);
}
