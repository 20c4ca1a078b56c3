#pragma once

#include "jamdet/detect/autoencoder.hpp"
#include "jamdet/eval/metrics.hpp"

#include <map>
#include <string>
#include <vector>

namespace jamdet::eval {

// One (profile, variant) experiment cell. A failed cell carries the error of
// the stage that aborted it and zero counts.
struct CellResult {
    int profile_id = 0;
    std::string profile_name;
    detect::VariantKind variant = detect::VariantKind::Cae;
    bool ok = false;
    std::string error;
    Confusion confusion;
    MetricRow metrics;

    bool operator==(const CellResult&) const = default;
};

struct Report {
    std::vector<CellResult> cells;  // ordered by (profile id, variant)
    std::map<std::string, std::string> metadata;

    std::size_t failures() const;
    // Variants present among successful cells, in enum order.
    std::vector<detect::VariantKind> variants() const;
    // aggregate() over the successful cells of `variant`.
    MetricRow average(detect::VariantKind variant) const;

    bool operator==(const Report&) const = default;
};

// Stable sort by (profile id, variant).
void sort_cells(std::vector<CellResult>& cells);

// "# key=value" metadata lines, then one row per cell:
//   profile_id,profile_name,variant,status,tp,fp,tn,fn,precision,recall,f1,
//   accuracy,far,mdr,undefined,error
// Fractions are written with 17 significant digits so parsing restores the
// report exactly. Names and errors are double-quoted when needed.
std::string report_csv(const Report& report);
Report parse_report_csv(const std::string& text, const std::string& source = "<string>");
void save_report_csv(const std::string& path, const Report& report);
Report load_report_csv(const std::string& path);

// Per-cell table and per-variant averages, percentages with 2 decimals.
std::string report_text(const Report& report);

}  // namespace jamdet::eval
