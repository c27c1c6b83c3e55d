#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgemeta {

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 2x2 table: events/total per arm (treatment, control).
struct CountTable {
    long events1 = 0;
    long total1 = 0;
    long events2 = 0;
    long total2 = 0;
};

enum class EffectScale { LogOddsRatio, StdMeanDifference, Generic };

struct Study {
    double effect = 0.0;    // point estimate on the analysis scale
    double variance = 0.0;  // squared standard error, > 0
    std::string label;
    std::optional<CountTable> counts;
};

// Immutable after validation; estimators take it read-only.
class MetaDataset {
public:
    const std::vector<Study>& studies() const { return studies_; }
    std::size_t size() const { return studies_.size(); }
    EffectScale scale() const { return scale_; }
    const Study& operator[](std::size_t i) const { return studies_[i]; }

private:
    friend MetaDataset validate_dataset(std::vector<Study> studies, EffectScale scale);
    MetaDataset(std::vector<Study> studies, EffectScale scale)
        : studies_(std::move(studies)), scale_(scale) {}

    std::vector<Study> studies_;
    EffectScale scale_;
};

// Log odds ratio with variance = sum of reciprocal cell counts. A zero cell
// is an error unless continuity correction is enabled, in which case 0.5 is
// added to all four cells (only when some cell is zero).
Study log_or_from_counts(long events1, long total1, long events2, long total2,
                         const std::string& label = "",
                         bool continuity_correction = false);

MetaDataset validate_dataset(std::vector<Study> studies,
                             EffectScale scale = EffectScale::Generic);

// CSV ingestion; schema is detected from the header row:
//   label,effect,se
//   label,events1,total1,events2,total2
MetaDataset read_csv(const std::string& path, bool continuity_correction = false);
MetaDataset parse_csv(const std::string& content, bool continuity_correction = false);

}  // namespace edgemeta
