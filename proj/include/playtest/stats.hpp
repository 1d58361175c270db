#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace playtest {

struct AggregateStats {
    std::string group_key;
    std::int64_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // population variance
    double min = 0.0;
    double max = 0.0;

    bool operator==(const AggregateStats&) const = default;
};

/// Streaming mean/variance. Sums are kept in long double and the result is
/// independent of insertion order up to rounding of the sums; merging two
/// accumulators equals accumulating the union.
class Accumulator {
public:
    void add(double x) {
        ++n_;
        sum_ += x;
        sumsq_ += static_cast<long double>(x) * x;
        min_ = std::min(min_, x);
        max_ = std::max(max_, x);
    }

    void merge(const Accumulator& o) {
        n_ += o.n_;
        sum_ += o.sum_;
        sumsq_ += o.sumsq_;
        min_ = std::min(min_, o.min_);
        max_ = std::max(max_, o.max_);
    }

    std::int64_t count() const { return n_; }
    bool empty() const { return n_ == 0; }

    AggregateStats stats(std::string key) const {
        AggregateStats s;
        s.group_key = std::move(key);
        s.count = n_;
        if (n_ == 0) return s;
        const long double n = static_cast<long double>(n_);
        const long double mean = sum_ / n;
        const long double var = sumsq_ / n - mean * mean;
        // Rounding can push the results a hair outside their exact bounds.
        s.mean = std::clamp(static_cast<double>(mean), min_, max_);
        s.variance = min_ == max_ ? 0.0 : std::max(0.0, static_cast<double>(var));
        s.min = min_;
        s.max = max_;
        return s;
    }

private:
    std::int64_t n_ = 0;
    long double sum_ = 0;
    long double sumsq_ = 0;
    double min_ = std::numeric_limits<double>::infinity();
    double max_ = -std::numeric_limits<double>::infinity();
};

}  // namespace playtest
