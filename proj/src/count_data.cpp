#include "crowdstrata/count_data.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "crowdstrata/error.hpp"
#include "crowdstrata/text.hpp"

namespace crowdstrata {

CountHistogram::CountHistogram(std::vector<Count> freqs, Count beta) : freqs_(std::move(freqs)), beta_(beta) {
    if (freqs_.empty()) throw ValidationError("histogram needs at least one cell");
    if (beta_ < 0) throw ValidationError("smoothing beta must be non-negative");
    for (Count f : freqs_) {
        if (f < 0) throw ValidationError("histogram frequencies must be non-negative");
        if (f < beta_) throw ValidationError("smoothed histogram has a cell below beta");
        total_ += f;
    }
}

std::vector<Count> CountHistogram::support() const {
    std::vector<Count> cells;
    for (std::size_t c = 0; c < freqs_.size(); ++c)
        if (freqs_[c] > 0) cells.push_back(static_cast<Count>(c));
    return cells;
}

std::vector<CountRecord> ingest_counts(std::string_view text) {
    std::vector<CountRecord> records;
    std::unordered_set<std::string> seen;
    bool header_seen = false;
    for_each_csv_line(text, [&](std::size_t line_no, const std::vector<std::string_view>& fields) {
        if (!header_seen) {
            if (fields.size() != 2 || fields[0] != "id" || fields[1] != "count")
                throw ParseError("expected header 'id,count'", line_no);
            header_seen = true;
            return;
        }
        if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
        if (fields[0].empty()) throw ParseError("empty id", line_no);
        const Count count = parse_integer(fields[1], line_no);
        if (count < 0) throw ValidationError("line " + std::to_string(line_no) + ": negative count");
        std::string id(fields[0]);
        if (!seen.insert(id).second)
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate id '" + id + "'");
        records.push_back({std::move(id), count});
    });
    if (!header_seen) throw ParseError("missing header 'id,count'", 1);
    return records;
}

CountHistogram build_histogram(const std::vector<CountRecord>& records, std::optional<Count> max_count_override) {
    if (records.empty() && !max_count_override)
        throw ValidationError("cannot build a histogram from no records without a max_count override");
    Count observed_max = 0;
    for (const auto& r : records) {
        if (r.count < 0) throw ValidationError("negative count for id '" + r.id + "'");
        observed_max = std::max(observed_max, r.count);
    }
    Count max_count = observed_max;
    if (max_count_override) {
        if (*max_count_override < observed_max)
            throw ValidationError("max_count override " + std::to_string(*max_count_override) +
                                  " is below the observed maximum " + std::to_string(observed_max));
        max_count = *max_count_override;
    }
    std::vector<Count> freqs(static_cast<std::size_t>(max_count) + 1, 0);
    for (const auto& r : records) ++freqs[static_cast<std::size_t>(r.count)];
    return CountHistogram(std::move(freqs));
}

CountHistogram smooth(const CountHistogram& hist, Count beta) {
    if (beta < 0) throw ValidationError("smoothing beta must be non-negative");
    std::vector<Count> freqs = hist.freqs();
    for (Count& f : freqs) f += beta;
    return CountHistogram(std::move(freqs), hist.smoothing_beta() + beta);
}

Count round_count(double value) {
    if (!std::isfinite(value)) throw ValidationError("count is not finite");
    return static_cast<Count>(std::floor(value + 0.5));
}

}  // namespace crowdstrata
