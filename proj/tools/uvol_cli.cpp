#include <uvol/uvol.h>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

int report(uvol_status st) {
    if (st == UVOL_OK) return 0;
    std::cerr << "uvol: " << uvol_status_name(st) << ": " << uvol_last_error() << "\n";
    return 2;
}

std::optional<std::string> slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void print_and_free(char* s) {
    if (!s) return;
    std::cout << s << "\n";
    uvol_string_free(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic union volume estimation: workload generation, runs and checks"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::uint64_t trials = 10;
    unsigned threads = 0;
    std::string suite = "all";

    auto add_common = [&](CLI::App* sub, bool needs_spec) {
        auto* opt = sub->add_option("--spec", spec_path, "workload spec (JSON)");
        if (needs_spec) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "seed; the UVOL_SEED environment variable takes precedence");
        sub->add_option("--out", out_dir, "output directory");
    };
    auto* gen = app.add_subcommand("gen", "write a workload trace to <out>/workload.jsonl");
    add_common(gen, true);
    gen->get_option("--out")->required();
    auto* run = app.add_subcommand("run", "run one trial; writes records.csv, summary.json, workload.jsonl and spec.json");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "run consecutive seeds and aggregate");
    add_common(sweep, true);
    sweep->add_option("--trials", trials, "number of seeds")->check(CLI::PositiveNumber);
    sweep->add_option("--threads", threads, "worker threads (0 = all cores)");
    auto* verify = app.add_subcommand("verify", "run a built-in cross-check suite");
    add_common(verify, false);
    verify->add_option("suite", suite, "ilp | filter | sparse | weak | determinism | all");

    CLI11_PARSE(app, argc, argv);

    std::string spec;
    if (!spec_path.empty()) {
        auto text = slurp(spec_path);
        if (!text) {
            std::cerr << "uvol: cannot read " << spec_path << "\n";
            return 2;
        }
        spec = *text;
    }
    const std::uint64_t* seed_ptr = seed ? &*seed : nullptr;
    const char* out = out_dir.empty() ? nullptr : out_dir.c_str();

    if (*gen) return report(uvol_generate(spec.c_str(), seed_ptr, out));
    if (*run || *sweep) {
        char* summary = nullptr;
        uvol_status st = *run ? uvol_run(spec.c_str(), seed_ptr, out, &summary)
                              : uvol_sweep(spec.c_str(), seed_ptr, trials, threads, out, &summary);
        print_and_free(summary);
        return report(st);
    }
    char* listing = nullptr;
    int pass = 0;
    uvol_status st = uvol_verify(suite.c_str(), seed.value_or(1), &listing, &pass);
    if (st == UVOL_OK && out) {
        std::ofstream f(out_dir + "/verify.json");
        if (listing) f << listing << "\n";
    }
    print_and_free(listing);
    if (st != UVOL_OK) return report(st);
    return pass ? 0 : 1;
}
