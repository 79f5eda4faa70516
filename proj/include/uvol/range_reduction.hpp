#pragma once

#include <uvol/estimator.hpp>
#include <uvol/objects.hpp>

#include <functional>
#include <map>
#include <memory>
#include <vector>

namespace uvol {

struct InnerParams {
    double n = 2.0;
    double eps = 0.1;
    VolumeWindow window{};
    std::uint64_t seed = 1;
};

struct RangeConfig {
    double n = 2.0;
    double eps = 0.25;
    std::uint64_t seed = 1;
};

// Two consecutive class indices l with vol in (m^(l-1), m^(l+1)].
std::pair<int, int> volume_classes(double vol, double m);
double class_scale(int l, double m);

using DynamicFactory = std::function<std::unique_ptr<DynamicEstimator>(const InnerParams&)>;
using SuffixFactory = std::function<std::unique_ptr<SuffixEstimator>(const InnerParams&)>;

// Lifts a range-restricted dynamic estimator to arbitrary volumes.
class RangeReducedDynamic final : public DynamicEstimator {
public:
    RangeReducedDynamic(const RangeConfig& cfg, DynamicFactory factory);

    void insert(const ObjectPtr& x) override;
    void erase(const ObjectPtr& x) override;
    double estimate() override;

    double m() const { return m_; }
    std::vector<int> active_classes() const;
    std::size_t class_count(int l) const;
    DynamicEstimator& inner(int l) { return *classes_.at(l).inner; }

private:
    struct Class {
        std::size_t count = 0;
        std::unique_ptr<DynamicEstimator> inner;
        std::map<ObjectId, std::vector<ObjectPtr>> scaled;
    };

    RangeConfig cfg_;
    DynamicFactory factory_;
    double m_;
    Rng rng_;
    std::map<int, Class> classes_;
};

// The insertion-only counterpart; suffix starts are mapped into each class's own clock.
class RangeReducedSuffix final : public SuffixEstimator {
public:
    RangeReducedSuffix(const RangeConfig& cfg, SuffixFactory factory);

    void insert(const ObjectPtr& x) override;
    double estimate(std::int64_t s) override;
    std::uint64_t time() const override { return t_; }

    double m() const { return m_; }
    std::vector<int> active_classes() const;
    // Classes holding at least one insert at time >= s.
    std::vector<int> active_classes(std::int64_t s) const;

private:
    struct Class {
        std::vector<std::uint64_t> times;
        std::unique_ptr<SuffixEstimator> inner;
    };

    RangeConfig cfg_;
    SuffixFactory factory_;
    double m_;
    Rng rng_;
    std::map<int, Class> classes_;
    std::uint64_t t_ = 0;
};

}  // namespace uvol
