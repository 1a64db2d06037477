#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdstrata {

using Count = std::int64_t;

struct CountRecord {
    std::string id;
    Count count = 0;

    friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// Default additive smoothing applied before binning.
inline constexpr Count kDefaultBeta = 1;

/// Frequencies of integer counts over the closed range [0, max_count].
///
/// Immutable once built. `total()` may be zero only for a histogram padded
/// from an empty record set; the partitioning routines reject that case.
class CountHistogram {
public:
    /// Validates freqs (non-negative, length >= 1) and that every cell is at
    /// least `beta` when beta > 0.
    explicit CountHistogram(std::vector<Count> freqs, Count beta = 0);

    [[nodiscard]] Count max_count() const noexcept { return static_cast<Count>(freqs_.size()) - 1; }
    [[nodiscard]] const std::vector<Count>& freqs() const noexcept { return freqs_; }
    [[nodiscard]] Count freq(Count c) const { return freqs_.at(static_cast<std::size_t>(c)); }
    [[nodiscard]] Count smoothing_beta() const noexcept { return beta_; }
    [[nodiscard]] Count total() const noexcept { return total_; }

    /// Counts with nonzero frequency, ascending. These are the cells a
    /// partition may start a bin at.
    [[nodiscard]] std::vector<Count> support() const;

    friend bool operator==(const CountHistogram&, const CountHistogram&) = default;

private:
    std::vector<Count> freqs_;
    Count beta_ = 0;
    Count total_ = 0;
};

/// Parses `id,count` CSV (LF or CRLF). Blank lines are ignored.
/// Throws ParseError (with line number) or ValidationError.
std::vector<CountRecord> ingest_counts(std::string_view text);

CountHistogram build_histogram(const std::vector<CountRecord>& records,
                               std::optional<Count> max_count_override = std::nullopt);

/// Adds beta to every cell in [0, C].
CountHistogram smooth(const CountHistogram& hist, Count beta = kDefaultBeta);

/// Rounds a real-valued count half-up to the nearest integer.
Count round_count(double value);

}  // namespace crowdstrata
