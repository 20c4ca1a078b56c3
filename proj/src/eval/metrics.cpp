#include "jamdet/eval/metrics.hpp"

#include "jamdet/error.hpp"

#include <string>

namespace jamdet::eval {

namespace {

// num / den, or 0 with `undefined` set.
double ratio(std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

Confusion confusion(const std::vector<int>& labels, const std::vector<int>& predictions) {
    if (labels.size() != predictions.size())
        throw DomainError("confusion: " + std::to_string(labels.size()) + " labels vs " +
                          std::to_string(predictions.size()) + " predictions");
    Confusion c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i], p = predictions[i];
        if ((y != 0 && y != 1) || (p != 0 && p != 1))
            throw DomainError("confusion: entry " + std::to_string(i) + " is not binary");
        if (y == 1)
            ++(p == 1 ? c.tp : c.fn);
        else
            ++(p == 1 ? c.fp : c.tn);
    }
    return c;
}

MetricRow metrics(const Confusion& c) {
    if (c.total() == 0) throw DomainError("metrics of an empty confusion matrix");
    MetricRow m;
    bool unused = false;
    m.precision = ratio(c.tp, c.tp + c.fp, m.undefined.precision);
    m.recall = ratio(c.tp, c.tp + c.fn, m.undefined.recall);
    m.mdr = ratio(c.fn, c.tp + c.fn, unused);
    m.far = ratio(c.fp, c.fp + c.tn, m.undefined.far);
    m.accuracy = ratio(c.tp + c.tn, c.total(), unused);
    const double sum = m.precision + m.recall;
    m.undefined.f1 = m.undefined.precision || m.undefined.recall || sum == 0.0;
    m.f1 = sum > 0.0 ? 2.0 * m.precision * m.recall / sum : 0.0;
    return m;
}

MetricRow aggregate(const std::vector<MetricRow>& rows) {
    if (rows.empty()) throw DomainError("aggregate of no rows");
    MetricRow out;
    for (const auto& r : rows) {
        out.precision += r.precision;
        out.recall += r.recall;
        out.f1 += r.f1;
        out.accuracy += r.accuracy;
        out.far += r.far;
        out.mdr += r.mdr;
        out.undefined.precision = out.undefined.precision || r.undefined.precision;
        out.undefined.recall = out.undefined.recall || r.undefined.recall;
        out.undefined.f1 = out.undefined.f1 || r.undefined.f1;
        out.undefined.far = out.undefined.far || r.undefined.far;
    }
    const double n = static_cast<double>(rows.size());
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
    out.accuracy /= n;
    out.far /= n;
    out.mdr /= n;
    return out;
}

}  // namespace jamdet::eval
