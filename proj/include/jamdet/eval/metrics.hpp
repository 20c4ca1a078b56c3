#pragma once

#include <cstddef>
#include <vector>

namespace jamdet::eval {

// Positive class is jammed (label 1).
struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const Confusion&) const = default;
};

// Labels and predictions in {0, 1}, equal lengths.
Confusion confusion(const std::vector<int>& labels, const std::vector<int>& predictions);

// Fractions in [0, 1]. A ratio with a zero denominator is reported as 0 and
// flagged; mdr shares recall's denominator and flag.
struct MetricRow {
    double precision = 0.0;  // tp / (tp + fp)
    double recall = 0.0;     // tp / (tp + fn)
    double f1 = 0.0;         // harmonic mean of precision and recall
    double accuracy = 0.0;   // (tp + tn) / total
    double far = 0.0;        // fp / (fp + tn)
    double mdr = 0.0;        // fn / (tp + fn)

    struct Undefined {
        bool precision = false;
        bool recall = false;  // also mdr
        bool f1 = false;
        bool far = false;

        bool any() const { return precision || recall || f1 || far; }
        bool operator==(const Undefined&) const = default;
    } undefined;

    bool operator==(const MetricRow&) const = default;
};

MetricRow metrics(const Confusion& c);

// Arithmetic mean of every field; a flag is set if any input row has it.
MetricRow aggregate(const std::vector<MetricRow>& rows);

}  // namespace jamdet::eval
