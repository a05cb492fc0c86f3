#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mia/attack.hpp"

namespace mia {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

// Threshold-sweep ROC with grouped ties: every set of equal scores enters in
// one step, producing a single diagonal segment. points.front() == (0,0),
// points.back() == (1,1); thresholds[k] is the score cutoff that realizes
// points[k] ("member iff score >= thresholds[k]"; thresholds[0] = +inf).
struct RocCurve {
    std::vector<RocPoint> points;
    std::vector<double> thresholds;
};

RocCurve roc_curve(std::span<const double> scores,
                   std::span<const std::uint8_t> truth);
RocCurve roc_curve(const AttackResult& result);

// Trapezoidal area; with grouped ties this equals the Mann-Whitney pairwise
// probability with half credit for ties.
double auc(const RocCurve& curve);

// Maximum TPR over operating points with FPR <= fpr_level, interpolating
// linearly inside tie segments; never reads beyond the allowed FPR.
double tpr_at_fpr(const RocCurve& curve, double fpr_level);

// Best (tpr + (1 - fpr)) / 2 over the curve's operating points.
double balanced_accuracy(const RocCurve& curve);

struct MetricsReport {
    double auc = 0.0;
    std::vector<std::pair<double, double>> tpr_at_fpr;  // (level, tpr)
    double balanced_accuracy = 0.0;
};

MetricsReport compute_metrics(const AttackResult& result,
                              const std::vector<double>& fpr_levels);

struct ReportCell {
    AttackVariant attack;
    ScoreVariant score;
    MetricsReport metrics;
};

// Shortest decimal string that round-trips to the same f64.
std::string format_double(double v);

// CSV report: header "attack,score_variant,auc,tpr@L...,balanced_acc", one
// row per grid cell in fixed order (attacks outer, score variants inner).
void write_csv_report(const std::vector<ReportCell>& cells,
                      const std::vector<double>& fpr_levels,
                      const std::string& path);

// Grouped AUC bar chart: one group per score variant, one bar per attack
// variant, 0.5 chance line. Byte-identical output for identical inputs.
void write_svg_report(const std::vector<ReportCell>& cells,
                      const std::string& path);

}  // namespace mia
