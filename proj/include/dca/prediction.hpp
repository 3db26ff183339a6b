#ifndef DCA_PREDICTION_HPP
#define DCA_PREDICTION_HPP

#include <cstdint>

namespace dca {

// One scored sample: routing, value, and the reliability verdict.
struct PredictionOutcome {
    std::int64_t row_id = 0;
    int interval = 0;          // classifier-assigned interval
    double predicted = 0.0;    // original target scale
    double range_low = 0.0;    // assigned interval's valid range, original scale
    double range_high = 0.0;
    bool range_empty = false;  // the assigned interval is configured away
    bool excluded = false;     // prediction fell outside the valid range
};

}  // namespace dca

#endif  // DCA_PREDICTION_HPP
