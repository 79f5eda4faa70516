#pragma once

#include <uvol/core.hpp>

#include <span>

namespace uvol {

struct KlmConfig {
    double trials_constant = 120.0;
    double step_cap_constant = 64.0;
};

struct KlmResult {
    double value = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t tests = 0;
    // Trials abandoned at the step cap and redrawn.
    std::uint64_t restarts = 0;
};

// Constant-factor union volume by self-adjusting coverage.
KlmResult klm_estimate(std::span<const ObjectPtr> objects, double n, Rng& rng, const KlmConfig& cfg = {});

std::uint64_t klm_trials(double n, const KlmConfig& cfg = {});

}  // namespace uvol
