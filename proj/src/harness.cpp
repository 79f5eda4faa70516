#include <uvol/harness.hpp>

#include <uvol/convex.hpp>
#include <uvol/dynamic.hpp>
#include <uvol/ilp.hpp>
#include <uvol/klm.hpp>
#include <uvol/range_reduction.hpp>
#include <uvol/sparse_recovery.hpp>
#include <uvol/suffix.hpp>
#include <uvol/truth.hpp>
#include <uvol/weak_sampling.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cerrno>
#include <cstring>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace uvol::harness {

namespace {

const std::set<std::string> kGenerators{"random-boxes",          "random-simplices", "random-convex",
                                        "insert-all-delete-all", "sliding-window",   "volume-ramp"};
const std::set<std::string> kEstimators{"dynamic", "suffix", "convex", "klm"};
const std::set<std::string> kShapes{"box", "simplex", "ball", "polytope"};

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq q{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    std::array<std::uint32_t, 2> out{};
    q.generate(out.begin(), out.end());
    return (std::uint64_t{out[0]} << 32) | out[1];
}

constexpr std::uint64_t kTagGen = 0x67656e;
constexpr std::uint64_t kTagEst = 0x657374;
constexpr std::uint64_t kTagTruth = 0x747275;
constexpr std::uint64_t kTagKlm = 0x6b6c6d;

template <class T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::vector<std::string> shapes_for(const WorkloadSpec& s) {
    if (!s.shapes.empty()) return s.shapes;
    if (s.generator == "random-simplices") return {"simplex"};
    if (s.generator == "random-convex") return {"box", "simplex", "ball", "polytope"};
    return {"box"};
}

}  // namespace

WorkloadSpec spec_from_json(const json& j) {
    if (!j.is_object()) fail(ErrorCode::kConfig, "spec must be a JSON object");
    static const std::set<std::string> known{"generator", "n",     "d",          "eps",        "seed",
                                             "estimator", "wrap",  "window",     "M",          "domain",
                                             "size_min",  "size_max", "shapes",  "delete_prob", "query_every",
                                             "truth",     "mc_samples", "workload", "convex"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) fail(ErrorCode::kConfig, "unknown spec field '" + it.key() + "'");
    WorkloadSpec s;
    try {
        take(j, "generator", s.generator);
        take(j, "n", s.n);
        take(j, "d", s.d);
        take(j, "eps", s.eps);
        take(j, "seed", s.seed);
        take(j, "estimator", s.estimator);
        take(j, "wrap", s.wrap);
        take(j, "window", s.window);
        take(j, "M", s.M);
        take(j, "domain", s.domain);
        take(j, "size_min", s.size_min);
        take(j, "size_max", s.size_max);
        take(j, "shapes", s.shapes);
        take(j, "delete_prob", s.delete_prob);
        take(j, "query_every", s.query_every);
        take(j, "truth", s.truth);
        take(j, "mc_samples", s.mc_samples);
        take(j, "workload", s.workload);
        if (j.contains("convex")) {
            const json& c = j.at("convex");
            take(c, "R", s.convex.R);
            take(c, "r", s.convex.r);
            take(c, "copies", s.convex.copies);
            take(c, "lambda", s.convex.lambda);
            take(c, "filter", s.convex.filter);
            take(c, "box", s.convex.box);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::kConfig, std::string("bad spec field: ") + e.what());
    }
    return s;
}

json spec_to_json(const WorkloadSpec& s) {
    json j{{"generator", s.generator}, {"n", s.n},          {"d", s.d},
           {"eps", s.eps},             {"seed", s.seed},    {"estimator", s.estimator},
           {"wrap", s.wrap},           {"window", s.window}, {"M", s.M},
           {"domain", s.domain},       {"size_min", s.size_min}, {"size_max", s.size_max},
           {"shapes", s.shapes},       {"delete_prob", s.delete_prob}, {"query_every", s.query_every},
           {"truth", s.truth},         {"mc_samples", s.mc_samples}};
    if (!s.workload.empty()) j["workload"] = s.workload;
    if (s.estimator == "convex")
        j["convex"] = {{"R", s.convex.R},           {"r", s.convex.r},         {"copies", s.convex.copies},
                       {"lambda", s.convex.lambda}, {"filter", s.convex.filter}, {"box", s.convex.box}};
    return j;
}

void validate(const WorkloadSpec& s) {
    auto bad = [](const std::string& m) { fail(ErrorCode::kConfig, m); };
    if (!kGenerators.count(s.generator)) bad("unknown generator '" + s.generator + "'");
    if (!kEstimators.count(s.estimator)) bad("unknown estimator '" + s.estimator + "'");
    if (s.wrap != "none" && s.wrap != "range") bad("wrap must be none or range");
    if (s.d < 1 || s.d > kMaxDim) bad("d must lie in 1.." + std::to_string(kMaxDim));
    if (!(s.eps > 0.0 && s.eps < 1.0)) bad("eps must lie in (0,1)");
    if (s.n < 1) bad("n must be positive");
    if (s.window < 1) bad("window must be positive");
    if (!(s.M >= 1.0)) bad("M must be at least 1");
    if (!(s.size_min > 0.0) || !(s.size_max >= s.size_min)) bad("need 0 < size_min <= size_max");
    if (s.query_every < 1) bad("query_every must be positive");
    if (!(s.delete_prob >= 0.0 && s.delete_prob < 1.0)) bad("delete_prob must lie in [0,1)");
    if (s.truth != "auto" && s.truth != "mc" && s.truth != "grid") bad("truth must be auto, mc or grid");
    if (s.mc_samples < 2) bad("mc_samples must be at least 2");
    for (const auto& sh : shapes_for(s))
        if (!kShapes.count(sh)) bad("unknown shape '" + sh + "'");
    if (s.generator != "volume-ramp" && s.estimator != "convex" && !(s.domain > s.size_max))
        bad("domain must exceed size_max");
    if (s.estimator == "suffix" && s.generator == "insert-all-delete-all")
        bad("the suffix estimator takes no deletes");
    if ((s.estimator == "convex" || s.estimator == "klm") && s.wrap != "none")
        bad("range wrapping applies to the dynamic and suffix estimators only");
    if (s.truth == "grid" && s.estimator != "convex") bad("grid truth needs the convex estimator");
    if (s.estimator == "convex") {
        const auto& c = s.convex;
        if (!(c.r > 0.0) || !(c.R >= 2.0 * c.r)) bad("convex block needs 0 < 2r <= R");
        if (c.copies < 1 || c.copies % 2 == 0) bad("convex copies must be odd and positive");
        if (c.lambda < 0.0) bad("convex lambda must be non-negative");
        if (c.filter != "lattice" && c.filter != "ilp") bad("convex filter must be lattice or ilp");
        if (c.box != "worst-case" && c.box != "calibrated") bad("convex box must be worst-case or calibrated");
    }
}

namespace {

struct Gen {
    const WorkloadSpec& s;
    Rng rng;
    std::vector<std::string> shapes;
    double domain;
    double min_inner;
    bool ramp;

    double side() {
        if (!ramp) return s.size_min + (s.size_max - s.size_min) * uniform01(rng);
        const double v = std::pow(s.size_min, s.d) * std::pow(s.M, uniform01(rng));
        return std::pow(v, 1.0 / s.d);
    }

    double at(double extent) { return (domain - extent) * uniform01(rng); }

    ObjectPtr attempt(const std::string& shape, double side) {
        const int d = s.d;
        if (shape == "box") {
            Point lo(d), hi(d);
            for (int i = 0; i < d; ++i) {
                double e = side * (0.5 + 0.5 * uniform01(rng));
                lo[i] = at(e);
                hi[i] = lo[i] + e;
            }
            return std::make_shared<AxisBox>(lo, hi);
        }
        if (shape == "ball") {
            Point c(d);
            for (int i = 0; i < d; ++i) c[i] = side / 2 + at(side);
            return std::make_shared<Ball>(c, side / 2);
        }
        if (shape == "simplex") {
            Point base(d);
            for (int i = 0; i < d; ++i) base[i] = at(side);
            std::vector<Point> v(static_cast<std::size_t>(d) + 1, Point(d));
            for (auto& p : v)
                for (int i = 0; i < d; ++i) p[i] = base[i] + side * uniform01(rng);
            try {
                auto sx = std::make_shared<Simplex>(v);
                double fact = 1.0;
                for (int i = 2; i <= d; ++i) fact *= i;
                if (sx->size() < 0.05 * std::pow(side, d) / fact) return nullptr;
                return sx;
            } catch (const Error&) {
                return nullptr;
            }
        }
        // Random polytope around an inscribed ball, closed off by the coordinate directions.
        const double rin = side / 4;
        Point c(d);
        for (int i = 0; i < d; ++i) c[i] = side / 2 + at(side);
        std::vector<Halfspace> hs;
        auto add = [&](const Point& a) {
            double b = rin * (1.0 + uniform01(rng));
            for (int i = 0; i < d; ++i) b += a[i] * c[i];
            hs.push_back({a, b});
        };
        for (int i = 0; i < d; ++i)
            for (double sg : {-1.0, 1.0}) {
                Point a(d);
                a[i] = sg;
                add(a);
            }
        std::normal_distribution<double> g;
        for (int k = 0; k < 2 * d; ++k) {
            Point a(d);
            double norm = 0.0;
            for (int i = 0; i < d; ++i) norm += (a[i] = g(rng)) * a[i];
            norm = std::sqrt(norm);
            if (norm < 1e-9) continue;
            for (int i = 0; i < d; ++i) a[i] /= norm;
            add(a);
        }
        return std::make_shared<HalfspacePolytope>(hs, c, rin, domain);
    }

    ObjectPtr object() {
        const std::string& shape = shapes[uniform_below(rng, shapes.size())];
        for (int tries = 0; tries < 10000; ++tries) {
            auto x = attempt(shape, side());
            if (!x) continue;
            if (min_inner > 0.0) {
                auto r = x->inner_radius();
                if (r && *r < min_inner) continue;
            }
            return x;
        }
        fail(ErrorCode::kConfig, "could not generate a '" + shape + "' meeting the size constraints");
    }
};

}  // namespace

std::vector<WorkloadOp> generate(const WorkloadSpec& s) {
    validate(s);
    Gen g{s, Rng(derive(s.seed, kTagGen)), shapes_for(s), s.domain, 0.0, s.generator == "volume-ramp"};
    if (g.ramp) {
        const double top = std::pow(std::pow(s.size_min, s.d) * s.M, 1.0 / s.d);
        g.domain = std::max(s.domain, 2.0 * top);
    }
    if (s.estimator == "convex") {
        g.domain = s.convex.R;
        g.min_inner = s.convex.r;
    }
    const bool inserts_only = s.estimator == "suffix";

    std::vector<WorkloadOp> ops;
    std::vector<std::pair<std::int64_t, ObjectPtr>> live;
    std::int64_t next_label = 0;
    std::uint64_t t = 0, updates = 0;

    auto query = [&] {
        std::int64_t start = 0;
        if (inserts_only && t > 0) {
            if (s.generator == "sliding-window")
                start = std::max<std::int64_t>(1, static_cast<std::int64_t>(t) - static_cast<std::int64_t>(s.window) + 1);
            else
                start = 1 + static_cast<std::int64_t>(uniform_below(g.rng, t));
        }
        ops.push_back({OpKind::kEstimate, -1, nullptr, start});
    };
    auto after_update = [&] {
        ++updates;
        if (updates % s.query_every == 0) query();
    };
    auto insert = [&] {
        auto x = g.object();
        ops.push_back({OpKind::kInsert, next_label, x, 0});
        live.emplace_back(next_label++, x);
        ++t;
        after_update();
    };
    auto erase_at = [&](std::size_t i) {
        auto [label, x] = live[i];
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
        ops.push_back({OpKind::kDelete, label, x, 0});
        after_update();
    };

    if (s.generator == "insert-all-delete-all") {
        const std::uint64_t half = std::max<std::uint64_t>(1, s.n / 2);
        for (std::uint64_t i = 0; i < half; ++i) insert();
        while (!live.empty()) erase_at(uniform_below(g.rng, live.size()));
    } else if (s.generator == "sliding-window") {
        while (updates < s.n) {
            if (!inserts_only && live.size() >= s.window) erase_at(0);
            if (updates < s.n) insert();
        }
    } else {
        while (updates < s.n) {
            if (inserts_only || live.empty() || uniform01(g.rng) >= s.delete_prob) insert();
            else erase_at(uniform_below(g.rng, live.size()));
        }
    }
    if (ops.empty() || ops.back().op != OpKind::kEstimate) query();
    return ops;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Estimator {
    std::unique_ptr<DynamicEstimator> dynamic;
    std::unique_ptr<SuffixEstimator> suffix;
    ConvexStream* convex = nullptr;
    bool klm = false;
};

Estimator make_estimator(const WorkloadSpec& s, double n, std::uint64_t seed) {
    Estimator e;
    if (s.estimator == "dynamic") {
        if (s.wrap == "range") {
            e.dynamic = std::make_unique<RangeReducedDynamic>(RangeConfig{n, s.eps, seed}, [](const InnerParams& p) {
                DynamicConfig c;
                c.n = p.n;
                c.eps = p.eps;
                c.seed = p.seed;
                c.admissible = p.window;
                return std::make_unique<FullyDynamicEstimator>(c);
            });
        } else {
            DynamicConfig c;
            c.n = n;
            c.eps = s.eps;
            c.seed = seed;
            e.dynamic = std::make_unique<FullyDynamicEstimator>(c);
        }
    } else if (s.estimator == "suffix") {
        if (s.wrap == "range") {
            e.suffix = std::make_unique<RangeReducedSuffix>(RangeConfig{n, s.eps, seed}, [](const InnerParams& p) {
                SuffixConfig c;
                c.n = p.n;
                c.eps = p.eps;
                c.seed = p.seed;
                c.admissible = p.window;
                return std::make_unique<SuffixStream>(c);
            });
        } else {
            SuffixConfig c;
            c.n = n;
            c.eps = s.eps;
            c.seed = seed;
            e.suffix = std::make_unique<SuffixStream>(c);
        }
    } else if (s.estimator == "convex") {
        ConvexConfig c;
        c.n = n;
        c.eps = s.eps;
        c.d = s.d;
        c.R = s.convex.R;
        c.r = s.convex.r;
        c.seed = seed;
        c.copies = s.convex.copies;
        c.strategy = s.convex.filter == "ilp" ? FilterStrategy::kIlp : FilterStrategy::kRowLattice;
        c.box.mode = s.convex.box == "worst-case" ? BoxMode::kWorstCase : BoxMode::kCalibrated;
        if (s.convex.lambda > 0.0) c.lambda = s.convex.lambda;
        auto stream = std::make_unique<ConvexStream>(c);
        e.convex = stream.get();
        e.dynamic = std::move(stream);
    } else {
        e.klm = true;
    }
    return e;
}

bool is_update(const WorkloadOp& op) { return op.op != OpKind::kEstimate; }

}  // namespace

TrialReport run(const WorkloadSpec& s, const std::vector<WorkloadOp>& ops) {
    validate(s);
    const auto start = Clock::now();
    std::uint64_t updates = 0;
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
    for (const auto& op : ops) {
        if (!is_update(op)) continue;
        ++updates;
        if (op.op == OpKind::kInsert) {
            if (op.object->dim() != s.d) fail(ErrorCode::kConfig, "workload dimension differs from the spec");
            if (s.estimator == "suffix" || s.estimator == "dynamic") {
                vmin = std::min(vmin, op.object->size());
                vmax = std::max(vmax, op.object->size());
            }
        } else if (s.estimator == "suffix") {
            fail(ErrorCode::kConfig, "the suffix estimator takes no deletes");
        }
    }
    const double n = std::max<double>(2.0, static_cast<double>(updates));

    // Direct mode rescales the measure uniformly into the admissible window.
    double scale = 1.0;
    if (s.wrap == "none" && vmax > 0.0) {
        const double m = 3.0 * n / s.eps;
        scale = 1.01 * m * m / vmin;
        if (vmax * scale > m * m * m * m / 1.001)
            fail(ErrorCode::kConfig, "volume spread exceeds the admissible window; use wrap=range");
    }

    Estimator est = make_estimator(s, n, derive(s.seed, kTagEst));
    Rng truth_rng(derive(s.seed, kTagTruth));
    Rng klm_rng(derive(s.seed, kTagKlm));
    OracleCounters counters;

    std::map<std::int64_t, std::pair<ObjectPtr, ObjectPtr>> live;  // label -> (wrapped, geometric)
    std::vector<ObjectPtr> by_time;
    std::vector<ObjectPtr> wrapped_by_time;
    TrialReport report;
    report.spec = s;
    std::uint64_t t = 0, last_calls = 0, est_failures = 0;

    for (const auto& op : ops) {
        if (op.op == OpKind::kInsert) {
            if (live.count(op.label)) fail(ErrorCode::kUsage, "label inserted twice");
            ObjectPtr w = std::make_shared<CountingOracle>(op.object, &counters);
            if (scale != 1.0) w = std::make_shared<ScaledOracle>(w, scale);
            if (est.dynamic) est.dynamic->insert(w);
            if (est.suffix) est.suffix->insert(w);
            live.emplace(op.label, std::make_pair(w, op.object));
            by_time.push_back(op.object);
            wrapped_by_time.push_back(w);
            ++t;
            continue;
        }
        if (op.op == OpKind::kDelete) {
            auto it = live.find(op.label);
            if (it == live.end()) fail(ErrorCode::kUsage, "delete of a label that is not live");
            if (est.dynamic) est.dynamic->erase(it->second.first);
            live.erase(it);
            ++t;
            continue;
        }

        std::vector<ObjectPtr> geo, wrapped;
        if (est.suffix) {
            const std::size_t from = op.s > 0 ? static_cast<std::size_t>(op.s - 1) : 0;
            for (std::size_t i = from; i < by_time.size(); ++i) {
                geo.push_back(by_time[i]);
                wrapped.push_back(wrapped_by_time[i]);
            }
        } else {
            if (op.s > 0) fail(ErrorCode::kConfig, "suffix queries need the suffix estimator");
            for (const auto& [label, pr] : live) {
                wrapped.push_back(pr.first);
                geo.push_back(pr.second);
            }
        }

        double value = 0.0;
        if (est.suffix) value = est.suffix->estimate(op.s) / scale;
        else if (est.dynamic) value = est.dynamic->estimate() / scale;
        else if (!wrapped.empty()) value = klm_estimate(wrapped, n, klm_rng).value;

        double truth = 0.0, tol_extra = 0.0;
        if (s.truth == "grid") {
            std::vector<ObjectPtr> mapped;
            for (const auto& x : geo) mapped.push_back(std::make_shared<GridMappedOracle>(x, est.convex->lambda()));
            truth = static_cast<double>(truth::grid_count(mapped, est.convex->delta())) /
                    std::pow(est.convex->lambda(), s.d);
        } else if (s.truth == "mc") {
            auto r = truth::monte_carlo(geo, s.mc_samples, truth_rng);
            truth = r.value;
            tol_extra = 3.0 * r.stderr_;
        } else {
            auto r = truth::union_volume(geo, s.mc_samples, truth_rng);
            truth = r.value;
            tol_extra = 3.0 * r.stderr_;
        }

        QueryRecord rec;
        rec.seed = s.seed;
        rec.t = t;
        rec.op = op.s > 0 ? "suffix:" + std::to_string(op.s) : "estimate";
        rec.estimate = value;
        rec.truth = truth;
        if (!std::isfinite(value)) ++est_failures;
        if (truth == 0.0) rec.rel_err = value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        else rec.rel_err = std::fabs(value / truth - 1.0);
        rec.failed = !(std::fabs(value - truth) <= s.eps * truth + tol_extra) || !std::isfinite(value);
        rec.oracle_calls = counters.total() - last_calls;
        last_calls = counters.total();
        report.records.push_back(std::move(rec));
    }
    report.summary = summarize(report.records);
    report.summary.counters = counters;
    report.summary.estimator_failures = est_failures;
    report.summary.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return report;
}

TrialReport run(const WorkloadSpec& s) {
    if (!s.workload.empty()) {
        std::ifstream in(s.workload);
        if (!in) fail(ErrorCode::kConfig, "cannot open workload '" + s.workload + "'");
        return run(s, read_workload(in));
    }
    return run(s, generate(s));
}

TrialReport sweep(const WorkloadSpec& s, const std::vector<std::uint64_t>& seeds, unsigned threads) {
    validate(s);
    const auto start = Clock::now();
    std::vector<TrialReport> parts(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next++) < seeds.size();) {
            try {
                WorkloadSpec one = s;
                one.seed = seeds[i];
                parts[i] = run(one);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, seeds.size())));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    TrialReport out;
    out.spec = s;
    OracleCounters total;
    std::uint64_t est_failures = 0;
    for (auto& p : parts) {
        out.records.insert(out.records.end(), p.records.begin(), p.records.end());
        total.size += p.summary.counters.size;
        total.sample += p.summary.counters.sample;
        total.contains += p.summary.counters.contains;
        est_failures += p.summary.estimator_failures;
    }
    out.summary = summarize(out.records);
    out.summary.counters = total;
    out.summary.estimator_failures = est_failures;
    out.summary.trials = seeds.size();
    out.summary.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return out;
}

Summary summarize(const std::vector<QueryRecord>& records) {
    Summary s;
    s.queries = records.size();
    std::vector<double> errs;
    for (const auto& r : records) {
        s.failures += r.failed;
        errs.push_back(r.rel_err);
    }
    if (errs.empty()) return s;
    std::sort(errs.begin(), errs.end());
    auto pct = [&](double q) { return errs[static_cast<std::size_t>(std::floor(q * static_cast<double>(errs.size() - 1)))]; };
    s.failure_rate = static_cast<double>(s.failures) / static_cast<double>(s.queries);
    s.p50 = pct(0.5);
    s.p95 = pct(0.95);
    s.max_rel_err = errs.back();
    return s;
}

void write_csv(std::ostream& out, const std::vector<QueryRecord>& records) {
    out << "seed,t,op,estimate,truth,rel_err,oracle_calls\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%llu,%llu,%s,%.17g,%.17g,%.17g,%llu\n",
                      static_cast<unsigned long long>(r.seed), static_cast<unsigned long long>(r.t), r.op.c_str(),
                      r.estimate, r.truth, r.rel_err, static_cast<unsigned long long>(r.oracle_calls));
        out << buf;
    }
}

json summary_to_json(const TrialReport& r) {
    const Summary& s = r.summary;
    auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j{{"spec", spec_to_json(r.spec)},
           {"trials", s.trials},
           {"queries", s.queries},
           {"failures", s.failures},
           {"failure_rate", s.failure_rate},
           {"p50_rel_err", finite(s.p50)},
           {"p95_rel_err", finite(s.p95)},
           {"max_rel_err", finite(s.max_rel_err)},
           {"wall_seconds", s.wall_seconds},
           {"estimator_failures", s.estimator_failures},
           {"oracle_calls", {{"size", s.counters.size}, {"sample", s.counters.sample}, {"contains", s.counters.contains}}}};
    if (!r.records.empty()) {
        j["final_estimate"] = finite(r.records.back().estimate);
        j["final_truth"] = r.records.back().truth;
    }
    return j;
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("UVOL_SEED");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    unsigned long long x = std::strtoull(v, &end, 10);
    if (errno != 0 || *end != '\0' || v[0] == '-') fail(ErrorCode::kConfig, "UVOL_SEED must be a non-negative integer");
    return x;
}

// ---- verify suites -------------------------------------------------------------------------

namespace {

VerifyResult verify_ilp(std::uint64_t seed) {
    Rng rng(seed);
    int mismatches = 0, cases = 200;
    for (int c = 0; c < cases; ++c) {
        const int k = 1 + static_cast<int>(uniform_below(rng, 3));
        IntegerProgram p(k);
        for (int j = 0; j < k; ++j) {
            p.lower[j] = mpz_class(static_cast<long>(uniform_below(rng, 5)));
            p.upper[j] = mpz_class(static_cast<long>(10 + uniform_below(rng, 11)));
        }
        const int rows = static_cast<int>(uniform_below(rng, 4));
        for (int r = 0; r < rows; ++r) {
            std::vector<mpq_class> a(k);
            for (int j = 0; j < k; ++j) a[j] = mpq_class(static_cast<long>(uniform_below(rng, 13)) - 6, 1 + static_cast<long>(uniform_below(rng, 4)));
            p.add(a, Sense::kLe, mpq_class(static_cast<long>(uniform_below(rng, 60)), 1 + static_cast<long>(uniform_below(rng, 3))));
        }
        std::set<std::vector<long>> want;
        std::vector<long> x(k);
        std::function<void(int)> scan = [&](int j) {
            if (j == k) {
                for (const auto& r : p.rows) {
                    mpq_class s = 0;
                    for (int i = 0; i < k; ++i) s += r.a[i] * x[i];
                    if (s > r.b) return;
                }
                want.insert(x);
                return;
            }
            for (long v = p.lower[j]->get_si(); v <= p.upper[j]->get_si(); ++v) {
                x[j] = v;
                scan(j + 1);
            }
        };
        scan(0);
        std::set<std::vector<long>> got;
        for (const auto& sol : ilp_list(p)) {
            std::vector<long> y;
            for (const auto& v : sol) y.push_back(v.get_si());
            got.insert(y);
        }
        mismatches += got != want;
    }
    return {"ilp_list matches grid scan", mismatches == 0,
            std::to_string(cases - mismatches) + "/" + std::to_string(cases) + " cases agree"};
}

VerifyResult verify_filter(std::uint64_t seed) {
    Rng rng(seed);
    int mismatches = 0, cases = 60;
    for (int c = 0; c < cases; ++c) {
        const int d = 1 + static_cast<int>(uniform_below(rng, 2));
        const std::uint64_t delta = 8 + uniform_below(rng, 25);
        HashParams hp = make_hash(delta, d, rng);
        const int l = static_cast<int>(uniform_below(rng, std::min(hp.top_level(), 5) + 1));
        ObjectPtr x;
        const double D = static_cast<double>(delta);
        if (d == 1 || uniform_below(rng, 2) == 0) {
            Point lo(d), hi(d);
            for (int i = 0; i < d; ++i) {
                lo[i] = 1 + (D - 1) * uniform01(rng) * 0.6;
                hi[i] = std::min(D, lo[i] + 1 + (D - lo[i]) * uniform01(rng));
            }
            x = std::make_shared<AxisBox>(lo, hi);
        } else {
            std::vector<Point> v(3, Point(2));
            for (auto& p : v)
                for (int i = 0; i < 2; ++i) p[i] = 1 + (D - 1) * uniform01(rng);
            try {
                x = std::make_shared<Simplex>(v);
            } catch (const Error&) {
                --c;
                continue;
            }
        }
        std::vector<GridPoint> want;
        GridPoint g;
        g.dim = d;
        std::uint64_t total = d == 1 ? delta : delta * delta;
        for (std::uint64_t idx = 0; idx < total; ++idx) {
            g[0] = static_cast<std::int64_t>(idx % delta) + 1;
            if (d == 2) g[1] = static_cast<std::int64_t>(idx / delta) + 1;
            if (x->contains(g.to_point()) && hp.eval(g) <= hp.threshold(l)) want.push_back(g);
        }
        std::sort(want.begin(), want.end());
        for (auto strat : {FilterStrategy::kIlp, FilterStrategy::kRowLattice})
            mismatches += filter(*x, hp, l, 16, rng, strat) != want;
    }
    return {"filter matches grid scan", mismatches == 0,
            std::to_string(2 * cases - mismatches) + "/" + std::to_string(2 * cases) + " runs agree"};
}

std::vector<VerifyResult> verify_sparse(std::uint64_t seed) {
    Rng rng(seed);
    const int trials = 100;
    const std::uint64_t k = 25;
    int exact = 0, fresh = 0, overflow = 0;
    for (int t = 0; t < trials; ++t) {
        SparseRecovery sk(k, 0.01, 1, 1u << 20, rng);
        std::set<std::uint64_t> keys;
        while (keys.size() < 10) keys.insert(1 + uniform_below(rng, 1u << 20));
        for (auto x : keys) sk.update(x, +1);
        auto rec = sk.recover();
        bool ok = rec && rec->size() == keys.size();
        if (ok)
            for (auto [x, v] : *rec) ok &= keys.count(x) && v == 1;
        exact += ok;
        for (auto x : keys) sk.update(x, -1);
        fresh += sk.is_zero();
        SparseRecovery big(k, 0.01, 1, 1u << 20, rng);
        std::set<std::uint64_t> many;
        while (many.size() < 4 * k) many.insert(1 + uniform_below(rng, 1u << 20));
        for (auto x : many) big.update(x, +1);
        overflow += !big.support().has_value();
    }
    auto line = [&](const char* name, int good) {
        return VerifyResult{name, good >= trials * 99 / 100, std::to_string(good) + "/" + std::to_string(trials)};
    };
    return {line("sparse recovery: exact support", exact), line("sparse recovery: matched pairs cancel", fresh),
            line("sparse recovery: overload reports infinity", overflow)};
}

VerifyResult verify_weak(std::uint64_t seed) {
    Rng rng(seed);
    const std::uint64_t delta = 16;
    const int draws = 4000;
    GridPoint x;
    x.dim = 2;
    x[0] = 3;
    x[1] = 7;
    int worst_l = -1;
    double worst = 0.0;
    for (int l = 0; l <= 4; ++l) {
        int hits = 0;
        double q = 0.0;
        for (int i = 0; i < draws; ++i) {
            HashParams hp = make_hash(delta, 2, rng);
            q = hp.q(l);
            hits += hp.eval(x) <= hp.threshold(l);
        }
        const double se = std::sqrt(q * (1 - q) / draws);
        const double z = se > 0 ? std::fabs(hits / static_cast<double>(draws) - q) / se : 0.0;
        if (z > worst) {
            worst = z;
            worst_l = l;
        }
    }
    std::ostringstream msg;
    msg << "largest deviation " << worst << " SE at level " << worst_l;
    return {"weak-sample selection rate", worst <= 4.0, msg.str()};
}

VerifyResult verify_determinism(std::uint64_t seed) {
    WorkloadSpec s;
    s.generator = "random-convex";
    s.shapes = {"box", "simplex"};
    s.n = 40;
    s.seed = seed;
    auto a = run(s), b = run(s);
    bool same = a.records.size() == b.records.size();
    for (std::size_t i = 0; same && i < a.records.size(); ++i)
        same = std::memcmp(&a.records[i].estimate, &b.records[i].estimate, sizeof(double)) == 0;
    return {"replay is bitwise identical", same, std::to_string(a.records.size()) + " estimates compared"};
}

}  // namespace

std::vector<std::string> verify_suites() { return {"ilp", "filter", "sparse", "weak", "determinism", "all"}; }

std::vector<VerifyResult> verify(const std::string& suite, std::uint64_t seed) {
    std::vector<VerifyResult> out;
    const bool all = suite == "all";
    bool known = all;
    if (all || suite == "ilp") out.push_back(verify_ilp(seed)), known = true;
    if (all || suite == "filter") out.push_back(verify_filter(seed)), known = true;
    if (all || suite == "sparse") {
        auto v = verify_sparse(seed);
        out.insert(out.end(), v.begin(), v.end());
        known = true;
    }
    if (all || suite == "weak") out.push_back(verify_weak(seed)), known = true;
    if (all || suite == "determinism") out.push_back(verify_determinism(seed)), known = true;
    if (!known) fail(ErrorCode::kConfig, "unknown verify suite '" + suite + "'");
    return out;
}

}  // namespace uvol::harness
