#include <uvol/uvol.h>

#include <uvol/convex.hpp>
#include <uvol/dynamic.hpp>
#include <uvol/harness.hpp>
#include <uvol/klm.hpp>
#include <uvol/range_reduction.hpp>
#include <uvol/suffix.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>

struct uvol_object {
    uvol::ObjectPtr ptr;
};

struct uvol_estimator {
    uvol_estimator_kind kind;
    std::unique_ptr<uvol::DynamicEstimator> dynamic;
    std::unique_ptr<uvol::SuffixEstimator> suffix;
};

namespace {

thread_local std::string last_error;

template <class F>
uvol_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return UVOL_OK;
    } catch (const uvol::Error& e) {
        last_error = e.what();
        return static_cast<uvol_status>(e.code());
    } catch (const nlohmann::json::exception& e) {
        last_error = e.what();
        return UVOL_E_PARSE;
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return UVOL_E_IO;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return UVOL_E_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return UVOL_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) uvol::fail(uvol::ErrorCode::kParameter, std::string(what) + " is null");
}

uvol::Point point_of(int d, const double* xs) {
    if (d < 1 || d > uvol::kMaxDim) uvol::fail(uvol::ErrorCode::kParameter, "dimension out of range");
    need(xs, "coordinates");
    uvol::Point p(d);
    for (int i = 0; i < d; ++i) p[i] = xs[i];
    return p;
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

uvol::harness::WorkloadSpec load_spec(const char* spec_json, const uint64_t* seed) {
    need(spec_json, "spec");
    uvol::json j;
    try {
        j = uvol::json::parse(spec_json);
    } catch (const uvol::json::exception& e) {
        uvol::fail(uvol::ErrorCode::kParse, std::string("spec is not valid JSON: ") + e.what());
    }
    auto s = uvol::harness::spec_from_json(j);
    if (seed) s.seed = *seed;
    if (auto env = uvol::harness::env_seed()) s.seed = *env;
    uvol::harness::validate(s);
    return s;
}

std::filesystem::path prepare(const char* out_dir) {
    need(out_dir, "output directory");
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
    if (!out) uvol::fail(uvol::ErrorCode::kConfig, "cannot write " + p.string());
}

void write_report(const std::filesystem::path& dir, const uvol::harness::TrialReport& r, char** summary_json) {
    {
        std::ofstream csv(dir / "records.csv");
        uvol::harness::write_csv(csv, r.records);
        if (!csv) uvol::fail(uvol::ErrorCode::kConfig, "cannot write records.csv");
    }
    const std::string summary = uvol::harness::summary_to_json(r).dump(2);
    write_text(dir / "summary.json", summary + "\n");
    if (summary_json) *summary_json = dup(summary);
}

}  // namespace

extern "C" {

const char* uvol_last_error(void) { return last_error.c_str(); }

const char* uvol_status_name(uvol_status s) {
    switch (s) {
        case UVOL_OK: return "ok";
        case UVOL_E_PARAMETER: return "parameter error";
        case UVOL_E_USAGE: return "usage error";
        case UVOL_E_UNSUPPORTED: return "unsupported";
        case UVOL_E_DEGENERATE: return "degenerate input";
        case UVOL_E_PARSE: return "parse error";
        case UVOL_E_CONFIG: return "configuration error";
        case UVOL_E_INTERNAL: return "internal error";
        case UVOL_E_UNBOUNDED: return "unbounded";
        case UVOL_E_IO: return "i/o error";
    }
    return "unknown status";
}

const char* uvol_version(void) { return "0.1.0"; }

uvol_status uvol_object_from_json(const char* text, uvol_object** out) {
    return guarded([&] {
        need(text, "json");
        need(out, "out");
        uvol::json j;
        try {
            j = uvol::json::parse(text);
        } catch (const uvol::json::exception& e) {
            uvol::fail(uvol::ErrorCode::kParse, e.what());
        }
        *out = new uvol_object{uvol::object_from_json(j)};
    });
}

uvol_status uvol_object_box(int d, const double* lo, const double* hi, uvol_object** out) {
    return guarded([&] {
        need(out, "out");
        *out = new uvol_object{std::make_shared<uvol::AxisBox>(point_of(d, lo), point_of(d, hi))};
    });
}

uvol_status uvol_object_simplex(int d, const double* vertices, uvol_object** out) {
    return guarded([&] {
        need(out, "out");
        need(vertices, "vertices");
        std::vector<uvol::Point> v;
        for (int i = 0; i <= d; ++i) v.push_back(point_of(d, vertices + static_cast<std::ptrdiff_t>(i) * d));
        *out = new uvol_object{std::make_shared<uvol::Simplex>(std::move(v))};
    });
}

uvol_status uvol_object_ball(int d, const double* center, double radius, uvol_object** out) {
    return guarded([&] {
        need(out, "out");
        *out = new uvol_object{std::make_shared<uvol::Ball>(point_of(d, center), radius)};
    });
}

void uvol_object_free(uvol_object* x) { delete x; }

uvol_status uvol_object_size(const uvol_object* x, double* out) {
    return guarded([&] {
        need(x, "object");
        need(out, "out");
        *out = x->ptr->size();
    });
}

uvol_status uvol_object_contains(const uvol_object* x, const double* point, int* out) {
    return guarded([&] {
        need(x, "object");
        need(out, "out");
        *out = x->ptr->contains(point_of(x->ptr->dim(), point)) ? 1 : 0;
    });
}

uvol_status uvol_object_sample(const uvol_object* x, uint64_t seed, double* point_out) {
    return guarded([&] {
        need(x, "object");
        need(point_out, "out");
        uvol::Rng rng(seed);
        uvol::Point p = x->ptr->sample(rng);
        for (int i = 0; i < p.dim; ++i) point_out[i] = p[i];
    });
}

void uvol_estimator_config_default(uvol_estimator_config* cfg) {
    if (!cfg) return;
    *cfg = uvol_estimator_config{};
    cfg->n = 100;
    cfg->eps = 0.25;
    cfg->seed = 1;
    cfg->d = 2;
    cfg->R = 64;
    cfg->r = 4;
    cfg->copies = 1;
}

uvol_status uvol_estimator_create(uvol_estimator_kind kind, const uvol_estimator_config* cfg, uvol_estimator** out) {
    return guarded([&] {
        need(cfg, "config");
        need(out, "out");
        auto e = std::make_unique<uvol_estimator>();
        e->kind = kind;
        switch (kind) {
            case UVOL_DYNAMIC:
                if (cfg->range_wrap) {
                    e->dynamic = std::make_unique<uvol::RangeReducedDynamic>(
                        uvol::RangeConfig{cfg->n, cfg->eps, cfg->seed}, [](const uvol::InnerParams& p) {
                            uvol::DynamicConfig c;
                            c.n = p.n;
                            c.eps = p.eps;
                            c.seed = p.seed;
                            c.admissible = p.window;
                            return std::make_unique<uvol::FullyDynamicEstimator>(c);
                        });
                } else {
                    uvol::DynamicConfig c;
                    c.n = cfg->n;
                    c.eps = cfg->eps;
                    c.seed = cfg->seed;
                    e->dynamic = std::make_unique<uvol::FullyDynamicEstimator>(c);
                }
                break;
            case UVOL_SUFFIX:
                if (cfg->range_wrap) {
                    e->suffix = std::make_unique<uvol::RangeReducedSuffix>(
                        uvol::RangeConfig{cfg->n, cfg->eps, cfg->seed}, [](const uvol::InnerParams& p) {
                            uvol::SuffixConfig c;
                            c.n = p.n;
                            c.eps = p.eps;
                            c.seed = p.seed;
                            c.admissible = p.window;
                            return std::make_unique<uvol::SuffixStream>(c);
                        });
                } else {
                    uvol::SuffixConfig c;
                    c.n = cfg->n;
                    c.eps = cfg->eps;
                    c.seed = cfg->seed;
                    e->suffix = std::make_unique<uvol::SuffixStream>(c);
                }
                break;
            case UVOL_CONVEX: {
                if (cfg->range_wrap) uvol::fail(uvol::ErrorCode::kConfig, "the convex stream takes no range wrapper");
                uvol::ConvexConfig c;
                c.n = cfg->n;
                c.eps = cfg->eps;
                c.d = cfg->d;
                c.R = cfg->R;
                c.r = cfg->r;
                c.seed = cfg->seed;
                c.copies = cfg->copies;
                if (cfg->lambda > 0) c.lambda = cfg->lambda;
                e->dynamic = std::make_unique<uvol::ConvexStream>(c);
                break;
            }
            default:
                uvol::fail(uvol::ErrorCode::kParameter, "unknown estimator kind");
        }
        *out = e.release();
    });
}

void uvol_estimator_free(uvol_estimator* e) { delete e; }

uvol_status uvol_estimator_insert(uvol_estimator* e, const uvol_object* x) {
    return guarded([&] {
        need(e, "estimator");
        need(x, "object");
        if (e->dynamic) e->dynamic->insert(x->ptr);
        else e->suffix->insert(x->ptr);
    });
}

uvol_status uvol_estimator_delete(uvol_estimator* e, const uvol_object* x) {
    return guarded([&] {
        need(e, "estimator");
        need(x, "object");
        if (!e->dynamic) uvol::fail(uvol::ErrorCode::kUsage, "the suffix estimator takes no deletes");
        e->dynamic->erase(x->ptr);
    });
}

uvol_status uvol_estimator_estimate(uvol_estimator* e, double* out) {
    return guarded([&] {
        need(e, "estimator");
        need(out, "out");
        *out = e->dynamic ? e->dynamic->estimate() : e->suffix->estimate(1);
    });
}

uvol_status uvol_estimator_estimate_suffix(uvol_estimator* e, int64_t s, double* out) {
    return guarded([&] {
        need(e, "estimator");
        need(out, "out");
        if (!e->suffix) uvol::fail(uvol::ErrorCode::kUsage, "suffix queries need the suffix estimator");
        *out = e->suffix->estimate(s);
    });
}

uvol_status uvol_klm_estimate(const uvol_object* const* objects, size_t count, double n, uint64_t seed, double* out) {
    return guarded([&] {
        need(out, "out");
        if (count > 0) need(objects, "objects");
        std::vector<uvol::ObjectPtr> xs;
        for (size_t i = 0; i < count; ++i) {
            need(objects[i], "object");
            xs.push_back(objects[i]->ptr);
        }
        uvol::Rng rng(seed);
        *out = uvol::klm_estimate(xs, n, rng).value;
    });
}

uvol_status uvol_generate(const char* spec_json, const uint64_t* seed, const char* out_dir) {
    return guarded([&] {
        auto s = load_spec(spec_json, seed);
        auto dir = prepare(out_dir);
        auto ops = uvol::harness::generate(s);
        std::ofstream out(dir / "workload.jsonl");
        uvol::write_workload(out, ops);
        if (!out) uvol::fail(uvol::ErrorCode::kConfig, "cannot write workload.jsonl");
        write_text(dir / "spec.json", uvol::harness::spec_to_json(s).dump(2) + "\n");
    });
}

uvol_status uvol_run(const char* spec_json, const uint64_t* seed, const char* out_dir, char** summary_json) {
    return guarded([&] {
        auto s = load_spec(spec_json, seed);
        auto ops = uvol::harness::generate(s);
        auto report = uvol::harness::run(s, ops);
        if (out_dir) {
            // Keep the trace next to the results so the run can be replayed.
            auto dir = prepare(out_dir);
            std::ofstream out(dir / "workload.jsonl");
            uvol::write_workload(out, ops);
            if (!out) uvol::fail(uvol::ErrorCode::kConfig, "cannot write workload.jsonl");
            write_text(dir / "spec.json", uvol::harness::spec_to_json(s).dump(2) + "\n");
            write_report(dir, report, summary_json);
        } else if (summary_json) *summary_json = dup(uvol::harness::summary_to_json(report).dump(2));
    });
}

uvol_status uvol_sweep(const char* spec_json, const uint64_t* seed, uint64_t trials, unsigned threads,
                       const char* out_dir, char** summary_json) {
    return guarded([&] {
        if (trials == 0) uvol::fail(uvol::ErrorCode::kConfig, "sweep needs at least one trial");
        auto s = load_spec(spec_json, seed);
        std::vector<std::uint64_t> seeds;
        for (std::uint64_t i = 0; i < trials; ++i) seeds.push_back(s.seed + i);
        auto report = uvol::harness::sweep(s, seeds, threads);
        if (out_dir) write_report(prepare(out_dir), report, summary_json);
        else if (summary_json) *summary_json = dup(uvol::harness::summary_to_json(report).dump(2));
    });
}

uvol_status uvol_verify(const char* suite, uint64_t seed, char** report_json, int* all_pass) {
    return guarded([&] {
        need(suite, "suite");
        if (auto env = uvol::harness::env_seed()) seed = *env;
        auto results = uvol::harness::verify(suite, seed);
        uvol::json j = uvol::json::array();
        bool ok = true;
        for (const auto& r : results) {
            j.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
            ok &= r.pass;
        }
        if (all_pass) *all_pass = ok ? 1 : 0;
        if (report_json) *report_json = dup(j.dump(2));
    });
}

void uvol_string_free(char* s) { std::free(s); }

}  // extern "C"
