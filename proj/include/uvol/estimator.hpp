#pragma once

#include <uvol/core.hpp>

namespace uvol {

class DynamicEstimator {
public:
    virtual ~DynamicEstimator() = default;
    virtual void insert(const ObjectPtr& x) = 0;
    virtual void erase(const ObjectPtr& x) = 0;
    virtual double estimate() = 0;
};

class SuffixEstimator {
public:
    virtual ~SuffixEstimator() = default;
    virtual void insert(const ObjectPtr& x) = 0;
    // Union of the objects inserted at times s..t.
    virtual double estimate(std::int64_t s) = 0;
    virtual std::uint64_t time() const = 0;
};

}  // namespace uvol
