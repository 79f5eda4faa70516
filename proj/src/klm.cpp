#include <uvol/klm.hpp>

#include <algorithm>
#include <vector>

namespace uvol {

std::uint64_t klm_trials(double n, const KlmConfig& cfg) {
    return static_cast<std::uint64_t>(std::ceil(cfg.trials_constant * threshold_log(n)));
}

KlmResult klm_estimate(std::span<const ObjectPtr> objects, double n, Rng& rng, const KlmConfig& cfg) {
    KlmResult res;
    if (objects.empty()) return res;
    if (!(n >= 2.0)) fail(ErrorCode::kParameter, "klm: n must be at least 2");

    const std::uint64_t m = objects.size();
    std::vector<double> cumulative(m);
    double total = 0.0;
    for (std::uint64_t i = 0; i < m; ++i) {
        double v = objects[i]->size();
        if (!(v > 0.0)) fail(ErrorCode::kParameter, "klm: object volumes must be positive");
        total += v;
        cumulative[i] = total;
    }

    const std::uint64_t trials = klm_trials(n, cfg);
    const auto step_cap = static_cast<std::uint64_t>(std::ceil(cfg.step_cap_constant * static_cast<double>(m) * threshold_log(n)));
    std::uint64_t tests = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (;;) {
            double u = uniform01(rng) * total;
            auto i = static_cast<std::uint64_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
            if (i >= m) i = m - 1;
            Point x = objects[i]->sample(rng);
            std::uint64_t steps = 0;
            bool hit = false;
            while (steps < step_cap) {
                ++steps;
                if (objects[uniform_below(rng, m)]->contains(x)) {
                    hit = true;
                    break;
                }
            }
            res.tests += steps;
            if (hit) {
                tests += steps;
                break;
            }
            ++res.restarts;
        }
    }
    res.trials = trials;
    res.value = static_cast<double>(tests) * total / (static_cast<double>(trials) * static_cast<double>(m));
    return res;
}

}  // namespace uvol
