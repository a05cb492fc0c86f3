#include "mia/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mia/binio.hpp"
#include "mia/error.hpp"

namespace mia {

RocCurve roc_curve(std::span<const double> scores,
                   std::span<const std::uint8_t> truth) {
    if (scores.size() != truth.size())
        throw ValidationError("roc_curve: scores/truth length mismatch");
    if (scores.empty()) throw ValidationError("roc_curve: empty input");

    std::size_t positives = 0;
    for (std::uint8_t t : truth) positives += t ? 1 : 0;
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0)
        throw ValidationError(
            "roc_curve: truth contains a single class; need at least one "
            "member and one non-member");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());

    std::size_t tp = 0, fp = 0, k = 0;
    while (k < order.size()) {
        const double value = scores[order[k]];
        // All cells tied at this score enter in one step.
        while (k < order.size() && scores[order[k]] == value) {
            if (truth[order[k]]) ++tp;
            else ++fp;
            ++k;
        }
        curve.points.push_back(
            {static_cast<double>(fp) / static_cast<double>(negatives),
             static_cast<double>(tp) / static_cast<double>(positives)});
        curve.thresholds.push_back(value);
    }
    return curve;
}

RocCurve roc_curve(const AttackResult& result) {
    return roc_curve(std::span<const double>(result.scores),
                     std::span<const std::uint8_t>(result.membership_truth));
}

double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const RocPoint& a = curve.points[k - 1];
        const RocPoint& b = curve.points[k];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return area;
}

double tpr_at_fpr(const RocCurve& curve, double fpr_level) {
    if (!(fpr_level > 0.0) || !(fpr_level < 1.0))
        throw ValidationError("tpr_at_fpr: level must be in (0, 1)");

    // Points are non-decreasing in both coordinates, so the last point with
    // fpr <= level dominates every earlier one.
    std::size_t i = 0;
    for (std::size_t k = 0; k < curve.points.size(); ++k)
        if (curve.points[k].fpr <= fpr_level) i = k;

    const RocPoint& p = curve.points[i];
    if (i + 1 >= curve.points.size()) return p.tpr;
    const RocPoint& q = curve.points[i + 1];
    if (q.fpr <= p.fpr) return p.tpr;
    const double t = (fpr_level - p.fpr) / (q.fpr - p.fpr);
    return p.tpr + t * (q.tpr - p.tpr);
}

double balanced_accuracy(const RocCurve& curve) {
    double best = 0.0;
    for (const RocPoint& p : curve.points)
        best = std::max(best, (p.tpr + (1.0 - p.fpr)) * 0.5);
    return best;
}

MetricsReport compute_metrics(const AttackResult& result,
                              const std::vector<double>& fpr_levels) {
    const RocCurve curve = roc_curve(result);
    MetricsReport report;
    report.auc = auc(curve);
    for (double level : fpr_levels)
        report.tpr_at_fpr.emplace_back(level, tpr_at_fpr(curve, level));
    report.balanced_accuracy = balanced_accuracy(curve);
    return report;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

// Fixed report order: attacks outer, score variants inner.
std::vector<ReportCell> ordered_cells(const std::vector<ReportCell>& cells) {
    std::map<std::pair<std::uint8_t, std::uint8_t>, ReportCell> grid;
    for (const ReportCell& cell : cells)
        grid[{static_cast<std::uint8_t>(cell.attack),
              static_cast<std::uint8_t>(cell.score)}] = cell;
    std::vector<ReportCell> out;
    for (AttackVariant a : kAllAttackVariants)
        for (ScoreVariant s : kAllScoreVariants) {
            auto it = grid.find({static_cast<std::uint8_t>(a),
                                 static_cast<std::uint8_t>(s)});
            if (it != grid.end()) out.push_back(it->second);
        }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    BinaryWriter w(path);
    w.bytes(content.data(), content.size());
    w.commit();
}

}  // namespace

void write_csv_report(const std::vector<ReportCell>& cells,
                      const std::vector<double>& fpr_levels,
                      const std::string& path) {
    if (cells.empty()) throw ValidationError("csv report: empty grid");

    std::string out = "attack,score_variant,auc";
    for (double level : fpr_levels) out += ",tpr@" + format_double(level);
    out += ",balanced_acc\n";

    for (const ReportCell& cell : ordered_cells(cells)) {
        out += to_token(cell.attack);
        out += ',';
        out += to_token(cell.score);
        out += ',';
        out += format_double(cell.metrics.auc);
        for (const auto& [level, tpr] : cell.metrics.tpr_at_fpr) {
            out += ',';
            out += format_double(tpr);
        }
        out += ',';
        out += format_double(cell.metrics.balanced_accuracy);
        out += '\n';
    }
    write_text_file(path, out);
}

namespace {

const char* attack_color(AttackVariant v) {
    switch (v) {
        case AttackVariant::online: return "#14326e";
        case AttackVariant::online_fixed_variance: return "#ff8c00";
        case AttackVariant::offline: return "#8c8c8c";
        case AttackVariant::offline_fixed_variance: return "#d4af37";
        case AttackVariant::global_threshold: return "#1f77b4";
    }
    return "#000000";
}

}  // namespace

void write_svg_report(const std::vector<ReportCell>& cells,
                      const std::string& path) {
    if (cells.empty()) throw ValidationError("svg report: empty grid");
    const std::vector<ReportCell> grid = ordered_cells(cells);

    constexpr double kWidth = 960.0, kHeight = 480.0;
    constexpr double kLeft = 70.0, kTop = 40.0;
    constexpr double kPlotW = 710.0, kPlotH = 380.0;
    const double base_y = kTop + kPlotH;

    auto y_of = [&](double auc_value) {
        return kTop + kPlotH * (1.0 - auc_value);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           format_double(kWidth) + "\" height=\"" + format_double(kHeight) +
           "\" viewBox=\"0 0 " + format_double(kWidth) + " " +
           format_double(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + format_double(kWidth) +
           "\" height=\"" + format_double(kHeight) + "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + format_double(kLeft) + "\" y=\"24\" "
           "font-family=\"sans-serif\" font-size=\"16\">Attack AUC by score "
           "variant</text>\n";

    // Axes and horizontal ticks.
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = 0.25 * tick;
        const double y = y_of(v);
        svg += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" +
               format_double(y) + "\" x2=\"" + format_double(kLeft + kPlotW) +
               "\" y2=\"" + format_double(y) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + format_double(kLeft - 8.0) + "\" y=\"" +
               format_double(y + 4.0) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"12\">" +
               format_double(v) + "</text>\n";
    }

    // Grouped bars: one group per score variant, one bar per attack.
    constexpr std::size_t kGroups = 5, kBars = 5;
    const double group_w = kPlotW / static_cast<double>(kGroups);
    const double bar_w = group_w / static_cast<double>(kBars + 1);

    std::size_t group_index = 0;
    for (ScoreVariant s : kAllScoreVariants) {
        const double gx =
            kLeft + group_w * static_cast<double>(group_index) + bar_w * 0.5;
        std::size_t bar_index = 0;
        for (AttackVariant a : kAllAttackVariants) {
            for (const ReportCell& cell : grid) {
                if (cell.attack != a || cell.score != s) continue;
                const double x =
                    gx + bar_w * static_cast<double>(bar_index);
                const double y = y_of(cell.metrics.auc);
                svg += "<rect x=\"" + format_double(x) + "\" y=\"" +
                       format_double(y) + "\" width=\"" +
                       format_double(bar_w) + "\" height=\"" +
                       format_double(base_y - y) + "\" fill=\"" +
                       attack_color(a) + "\" data-attack=\"" + to_token(a) +
                       "\" data-score=\"" + to_token(s) + "\" data-auc=\"" +
                       format_double(cell.metrics.auc) + "\"/>\n";
            }
            ++bar_index;
        }
        svg += "<text x=\"" +
               format_double(kLeft + group_w * (group_index + 0.5)) +
               "\" y=\"" + format_double(base_y + 20.0) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"12\">" +
               to_token(s) + "</text>\n";
        ++group_index;
    }

    // Chance line at AUC 0.5.
    svg += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" +
           format_double(y_of(0.5)) + "\" x2=\"" +
           format_double(kLeft + kPlotW) + "\" y2=\"" +
           format_double(y_of(0.5)) +
           "\" stroke=\"#cc0000\" stroke-width=\"1\" "
           "stroke-dasharray=\"6,4\"/>\n";

    // Axis frame.
    svg += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" +
           format_double(kTop) + "\" x2=\"" + format_double(kLeft) +
           "\" y2=\"" + format_double(base_y) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + format_double(kLeft) + "\" y1=\"" +
           format_double(base_y) + "\" x2=\"" + format_double(kLeft + kPlotW) +
           "\" y2=\"" + format_double(base_y) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // Legend.
    double legend_y = kTop + 10.0;
    const double legend_x = kLeft + kPlotW + 20.0;
    for (AttackVariant a : kAllAttackVariants) {
        svg += "<rect x=\"" + format_double(legend_x) + "\" y=\"" +
               format_double(legend_y) +
               "\" width=\"14\" height=\"14\" fill=\"" + attack_color(a) +
               "\"/>\n";
        svg += "<text x=\"" + format_double(legend_x + 20.0) + "\" y=\"" +
               format_double(legend_y + 12.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" +
               to_token(a) + "</text>\n";
        legend_y += 22.0;
    }

    svg += "</svg>\n";
    write_text_file(path, svg);
}

}  // namespace mia
