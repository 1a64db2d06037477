#include "crowdstrata/evaluation.hpp"

#include <cmath>
#include <sstream>

#include "crowdstrata/error.hpp"
#include "crowdstrata/text.hpp"

namespace crowdstrata {

namespace {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

// Two passes: mean first, then the centered second moment.
Moments abs_error_moments(const std::vector<double>& errors) {
    Moments m;
    if (errors.empty()) return m;
    const double n = static_cast<double>(errors.size());
    double sum = 0.0;
    for (double e : errors) sum += e;
    m.mean = sum / n;
    double ss = 0.0;
    for (double e : errors) ss += (e - m.mean) * (e - m.mean);
    m.std = errors.size() > 1 ? std::sqrt(ss / n) : 0.0;
    return m;
}

}  // namespace

std::vector<PredictionRecord> ingest_predictions(std::string_view text) {
    std::vector<PredictionRecord> preds;
    bool header_seen = false;
    for_each_csv_line(text, [&](std::size_t line_no, const std::vector<std::string_view>& fields) {
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "id" || fields[1] != "count_true" || fields[2] != "count_pred")
                throw ParseError("expected header 'id,count_true,count_pred'", line_no);
            header_seen = true;
            return;
        }
        if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
        const Count y = parse_integer(fields[1], line_no);
        if (y < 0) throw ValidationError("line " + std::to_string(line_no) + ": negative ground-truth count");
        preds.push_back({std::string(fields[0]), y, parse_real(fields[2], line_no)});
    });
    if (!header_seen) throw ParseError("missing header 'id,count_true,count_pred'", 1);
    return preds;
}

std::vector<BinStats> per_bin_stats(const std::vector<PredictionRecord>& preds, const Partition& partition) {
    partition.validate();
    std::vector<std::vector<double>> errors(partition.size());
    for (const auto& p : preds)
        errors[partition.bin_index(p.y)].push_back(std::abs(static_cast<double>(p.y) - p.y_hat));

    std::vector<BinStats> stats;
    stats.reserve(partition.size());
    for (std::size_t k = 0; k < partition.size(); ++k) {
        BinStats s{partition.bins[k], errors[k].size(), std::nullopt, std::nullopt};
        if (s.n > 0) {
            const Moments m = abs_error_moments(errors[k]);
            s.mae = m.mean;
            s.std = m.std;
        }
        stats.push_back(s);
    }
    return stats;
}

std::pair<double, double> pool(const std::vector<BinStats>& stats) {
    double n_sum = 0.0, mean_sum = 0.0, var_sum = 0.0;
    for (const auto& s : stats) {
        if (s.n == 0) continue;
        const double n = static_cast<double>(s.n);
        n_sum += n;
        mean_sum += n * s.mae.value();
        var_sum += n * s.std.value() * s.std.value();
    }
    if (n_sum == 0.0) throw ValidationError("cannot pool: every bin is empty");
    return {mean_sum / n_sum, std::sqrt(var_sum / n_sum)};
}

std::pair<double, double> global_stats(const std::vector<PredictionRecord>& preds) {
    if (preds.empty()) throw ValidationError("global statistics need at least one prediction");
    std::vector<double> errors;
    errors.reserve(preds.size());
    for (const auto& p : preds) errors.push_back(std::abs(static_cast<double>(p.y) - p.y_hat));
    const Moments m = abs_error_moments(errors);
    return {m.mean, m.std};
}

EvalReport evaluate(const std::vector<PredictionRecord>& preds, const Partition& partition) {
    EvalReport report;
    report.per_bin = per_bin_stats(preds, partition);
    std::tie(report.pooled_mae, report.pooled_std) = pool(report.per_bin);
    std::tie(report.global_mae, report.global_std) = global_stats(preds);
    report.n_total = preds.size();
    return report;
}

std::string render_report(const EvalReport& report, const Partition& partition) {
    if (report.per_bin.size() != partition.size())
        throw ValidationError("report and partition disagree on the number of bins");
    std::ostringstream out;
    out << "bin_lo,bin_hi,n,mae,std\n";
    for (std::size_t k = 0; k < report.per_bin.size(); ++k) {
        const auto& s = report.per_bin[k];
        out << partition.bins[k].lo << ',' << partition.bins[k].hi << ',' << s.n << ',';
        if (s.mae) out << format_real(*s.mae);
        out << ',';
        if (s.std) out << format_real(*s.std);
        out << '\n';
    }
    out << "pooled,," << report.n_total << ',' << format_real(report.pooled_mae) << ','
        << format_real(report.pooled_std) << '\n';
    out << "global,," << report.n_total << ',' << format_real(report.global_mae) << ','
        << format_real(report.global_std) << '\n';
    return out.str();
}

}  // namespace crowdstrata
