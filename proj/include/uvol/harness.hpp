#pragma once

#include <uvol/json_io.hpp>
#include <uvol/objects.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace uvol::harness {

struct ConvexBlock {
    double R = 64.0;
    double r = 4.0;
    int copies = 1;
    // Grid scale override; by default derived from n, eps, d and r.
    double lambda = 0.0;
    std::string filter = "lattice";  // lattice | ilp
    std::string box = "calibrated";  // worst-case | calibrated
};

struct WorkloadSpec {
    std::string generator = "random-boxes";
    // Update operations (inserts plus deletes) in the trace.
    std::uint64_t n = 100;
    int d = 2;
    double eps = 0.25;
    std::uint64_t seed = 1;
    std::string estimator = "dynamic";  // dynamic | suffix | convex | klm
    std::string wrap = "none";          // none | range

    std::uint64_t window = 32;
    double M = 1e6;
    double domain = 40.0;
    double size_min = 1.0;
    double size_max = 4.0;
    std::vector<std::string> shapes;
    double delete_prob = 0.3;
    std::uint64_t query_every = 1;
    std::string truth = "auto";  // auto | mc | grid
    std::uint64_t mc_samples = 20000;
    std::string workload;  // replay this JSON-lines trace instead of generating
    ConvexBlock convex;
};

WorkloadSpec spec_from_json(const json& j);
json spec_to_json(const WorkloadSpec& s);
void validate(const WorkloadSpec& s);

std::vector<WorkloadOp> generate(const WorkloadSpec& s);

struct QueryRecord {
    std::uint64_t seed = 0;
    std::uint64_t t = 0;
    std::string op;
    double estimate = 0.0;
    double truth = 0.0;
    double rel_err = 0.0;
    std::uint64_t oracle_calls = 0;
    bool failed = false;
};

struct Summary {
    std::uint64_t queries = 0;
    std::uint64_t failures = 0;
    double failure_rate = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double max_rel_err = 0.0;
    double wall_seconds = 0.0;
    OracleCounters counters;
    std::uint64_t estimator_failures = 0;
    std::uint64_t trials = 1;
};

struct TrialReport {
    WorkloadSpec spec;
    std::vector<QueryRecord> records;
    Summary summary;
};

TrialReport run(const WorkloadSpec& s);
TrialReport run(const WorkloadSpec& s, const std::vector<WorkloadOp>& ops);
// Seeds may run on worker threads; records merge in seed order.
TrialReport sweep(const WorkloadSpec& s, const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

Summary summarize(const std::vector<QueryRecord>& records);
void write_csv(std::ostream& out, const std::vector<QueryRecord>& records);
json summary_to_json(const TrialReport& r);

struct VerifyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<std::string> verify_suites();
std::vector<VerifyResult> verify(const std::string& suite, std::uint64_t seed = 1);

// UVOL_SEED overrides the spec seed when set.
std::optional<std::uint64_t> env_seed();

}  // namespace uvol::harness
