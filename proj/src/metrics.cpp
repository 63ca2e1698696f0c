#include "buffgraph/metrics.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace buffgraph {

MetricsReport compute(std::span<const std::int32_t> predictions,
                      std::span<const std::int32_t> labels,
                      std::span<const std::int32_t> mask, std::int32_t num_classes,
                      const std::vector<std::optional<double>>* class_heterophily,
                      std::string mask_name) {
    if (mask.empty()) throw InvalidArgument("metrics: empty mask");
    if (class_heterophily != nullptr &&
        static_cast<std::int32_t>(class_heterophily->size()) != num_classes) {
        throw InvalidArgument("metrics: class_heterophily length mismatch");
    }

    MetricsReport report;
    report.mask_name = std::move(mask_name);
    report.per_class.resize(static_cast<std::size_t>(num_classes));
    for (std::int32_t c = 0; c < num_classes; ++c) {
        report.per_class[static_cast<std::size_t>(c)].class_id = c;
        if (class_heterophily != nullptr) {
            report.per_class[static_cast<std::size_t>(c)].heterophily =
                (*class_heterophily)[static_cast<std::size_t>(c)];
        }
    }

    std::int64_t correct = 0;
    for (std::int32_t v : mask) {
        std::int32_t y = labels[static_cast<std::size_t>(v)];
        std::int32_t p = predictions[static_cast<std::size_t>(v)];
        if (y < 0 || y >= num_classes) {
            throw InvalidArgument("metrics: node " + std::to_string(v) +
                                  " has label " + std::to_string(y) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
        }
        if (p < 0 || p >= num_classes) {
            throw InvalidArgument("metrics: node " + std::to_string(v) +
                                  " has prediction " + std::to_string(p) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
        }
        report.per_class[static_cast<std::size_t>(y)].support++;
        report.per_class[static_cast<std::size_t>(p)].predicted++;
        if (p == y) {
            report.per_class[static_cast<std::size_t>(y)].true_positive++;
            ++correct;
        }
    }
    report.acc = static_cast<double>(correct) / static_cast<double>(mask.size());

    double recall_sum = 0.0;
    double f1_sum = 0.0;
    std::int64_t scored = 0;
    for (auto& cm : report.per_class) {
        if (cm.support == 0) {
            report.zero_support_classes.push_back(cm.class_id);
            continue;
        }
        cm.recall = static_cast<double>(cm.true_positive) / static_cast<double>(cm.support);
        cm.precision = cm.predicted > 0
                           ? static_cast<double>(cm.true_positive) / static_cast<double>(cm.predicted)
                           : 0.0;
        cm.f1 = (cm.precision + cm.recall) > 0.0
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        recall_sum += cm.recall;
        f1_sum += cm.f1;
        ++scored;
    }
    if (scored == 0) throw InvalidArgument("metrics: no class has support in the mask");
    report.bacc = recall_sum / static_cast<double>(scored);
    report.macro_f1 = f1_sum / static_cast<double>(scored);
    return report;
}

std::vector<ClassReportRow> class_report(const MetricsReport& report) {
    std::vector<ClassReportRow> rows;
    rows.reserve(report.per_class.size());
    for (const auto& cm : report.per_class) {
        rows.push_back({cm.class_id, cm.support, cm.recall, cm.heterophily});
    }
    std::sort(rows.begin(), rows.end(), [](const ClassReportRow& a, const ClassReportRow& b) {
        if (a.support != b.support) return a.support > b.support;
        return a.class_id < b.class_id;
    });
    return rows;
}

std::string class_report_csv(std::span<const ClassReportRow> rows) {
    std::ostringstream out;
    out << "class,support,recall,heterophily\n";
    char buf[32];
    for (const auto& row : rows) {
        out << row.class_id << ',' << row.support << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.recall);
        out << buf << ',';
        if (row.heterophily.has_value()) {
            std::snprintf(buf, sizeof buf, "%.17g", *row.heterophily);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

std::vector<ClassReportRow> parse_class_report_csv(const std::string& csv) {
    std::vector<ClassReportRow> rows;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        ClassReportRow row;
        std::size_t p1 = line.find(',');
        std::size_t p2 = line.find(',', p1 + 1);
        std::size_t p3 = line.find(',', p2 + 1);
        if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos) {
            throw InvalidArgument("class report: malformed row \"" + line + "\"");
        }
        auto parse_num = [&line](std::size_t begin, std::size_t end, auto& out) {
            auto [ptr, ec] = std::from_chars(line.data() + begin, line.data() + end, out);
            if (ec != std::errc() || ptr != line.data() + end) {
                throw InvalidArgument("class report: malformed field in \"" + line + "\"");
            }
        };
        parse_num(0, p1, row.class_id);
        parse_num(p1 + 1, p2, row.support);
        parse_num(p2 + 1, p3, row.recall);
        if (p3 + 1 < line.size()) {
            double h = 0.0;
            parse_num(p3 + 1, line.size(), h);
            row.heterophily = h;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string metrics_json(const MetricsReport& report) {
    nlohmann::json j;
    j["mask"] = report.mask_name;
    j["acc"] = report.acc;
    j["bacc"] = report.bacc;
    j["macro_f1"] = report.macro_f1;
    j["per_class"] = nlohmann::json::array();
    for (const auto& cm : report.per_class) {
        nlohmann::json c;
        c["class"] = cm.class_id;
        c["support"] = cm.support;
        c["recall"] = cm.recall;
        c["precision"] = cm.precision;
        c["f1"] = cm.f1;
        if (cm.heterophily.has_value()) c["heterophily"] = *cm.heterophily;
        else c["heterophily"] = nullptr;
        j["per_class"].push_back(std::move(c));
    }
    j["zero_support_classes"] = report.zero_support_classes;
    return j.dump(2);
}

} // namespace buffgraph
