#pragma once

#include "buffgraph/error.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace buffgraph {

struct ClassMetrics {
    std::int32_t class_id = 0;
    std::int64_t support = 0;   // true members in the mask
    std::int64_t predicted = 0; // predicted members in the mask
    std::int64_t true_positive = 0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    std::optional<double> heterophily; // class score h_c when supplied
};

/// acc is pooled correctness; bacc the mean recall and macro_f1 the mean F1
/// over classes with nonzero support. Zero-support classes are excluded
/// from both means and listed so callers can warn.
struct MetricsReport {
    double acc = 0.0;
    double bacc = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class; // indexed by class id
    std::vector<std::int32_t> zero_support_classes;
    std::string mask_name;
};

MetricsReport compute(std::span<const std::int32_t> predictions,
                      std::span<const std::int32_t> labels,
                      std::span<const std::int32_t> mask, std::int32_t num_classes,
                      const std::vector<std::optional<double>>* class_heterophily = nullptr,
                      std::string mask_name = {});

/// One row of the class-wise accuracy / heterophily analysis.
struct ClassReportRow {
    std::int32_t class_id = 0;
    std::int64_t support = 0;
    double recall = 0.0;
    std::optional<double> heterophily;
    friend bool operator==(const ClassReportRow&, const ClassReportRow&) = default;
};

/// Rows sorted by descending support, ties broken by ascending class id.
std::vector<ClassReportRow> class_report(const MetricsReport& report);

std::string class_report_csv(std::span<const ClassReportRow> rows);
std::vector<ClassReportRow> parse_class_report_csv(const std::string& csv);

/// JSON document with the scalar metrics and the per-class array.
std::string metrics_json(const MetricsReport& report);

} // namespace buffgraph
