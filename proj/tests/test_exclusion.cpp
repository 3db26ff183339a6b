#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "dca/exclusion.hpp"

namespace {

dca::PredictionOutcome outcome(int interval, double predicted, bool excluded = false) {
    dca::PredictionOutcome o;
    o.interval = interval;
    o.predicted = predicted;
    o.excluded = excluded;
    return o;
}

}  // namespace

TEST_CASE("expand_intervals widens symmetrically about the midpoint") {
    // Single interval [100, 200], factor 1.0025: half-width 50 -> 50.125.
    dca::SegmentationList seg;
    seg.n_intervals = 1;
    dca::ExclusionConfig cfg = dca::uniform_exclusion_config(1, 1.0025);
    std::vector<dca::ValidRange> ranges = dca::expand_intervals(seg, cfg, 100.0, 200.0);
    REQUIRE(ranges.size() == 1);
    CHECK(ranges[0].low == doctest::Approx(99.875).epsilon(1e-12));
    CHECK(ranges[0].high == doctest::Approx(200.125).epsilon(1e-12));
    CHECK_FALSE(ranges[0].empty);
}

TEST_CASE("factor one leaves ranges identical to the raw spans") {
    dca::SegmentationList seg;
    seg.cuts = {0.4, 0.6};
    seg.n_intervals = 3;
    std::vector<dca::ValidRange> ranges = dca::expand_intervals(
        seg, dca::uniform_exclusion_config(3, 1.0), 0.0, 1.0);
    // center +/- half arithmetic may differ from the raw edges by an ulp
    CHECK(ranges[0].low == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ranges[0].high == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(ranges[1].low == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(ranges[1].high == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(ranges[2].low == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(ranges[2].high == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dropped edge intervals become empty ranges") {
    dca::SegmentationList seg;
    seg.cuts = {0.5};
    seg.n_intervals = 2;
    dca::ExclusionConfig cfg = dca::uniform_exclusion_config(2, 1.05, true, true);
    std::vector<dca::ValidRange> ranges = dca::expand_intervals(seg, cfg, 0.0, 1.0);
    CHECK(ranges[0].empty);
    CHECK(ranges[1].empty);
}

TEST_CASE("expand_intervals validates the factor list") {
    dca::SegmentationList seg;
    seg.cuts = {0.5};
    seg.n_intervals = 2;
    dca::ExclusionConfig wrong_len;
    wrong_len.factors = {1.05};
    CHECK_THROWS_AS(dca::expand_intervals(seg, wrong_len, 0.0, 1.0),
                    std::invalid_argument);
    dca::ExclusionConfig shrinking;
    shrinking.factors = {1.05, 0.9};
    CHECK_THROWS_AS(dca::expand_intervals(seg, shrinking, 0.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("apply_exclusion flags by range membership, inclusively at the edges") {
    std::vector<dca::ValidRange> ranges(2);
    ranges[0] = {0.0, 10.0, false};
    ranges[1] = {10.0, 20.0, false};
    std::vector<dca::PredictionOutcome> outcomes = {
        outcome(0, 5.0),    // interior: retained
        outcome(0, 0.0),    // exactly at low: retained
        outcome(0, 10.0),   // exactly at high: retained
        outcome(0, 10.5),   // beyond its own range: excluded
        outcome(1, 10.5),   // same value, correct interval: retained
        outcome(1, 25.0),   // beyond high: excluded
    };
    std::vector<dca::PredictionOutcome> flagged =
        dca::apply_exclusion(outcomes, ranges);
    REQUIRE(flagged.size() == 6);
    CHECK_FALSE(flagged[0].excluded);
    CHECK_FALSE(flagged[1].excluded);
    CHECK_FALSE(flagged[2].excluded);
    CHECK(flagged[3].excluded);
    CHECK_FALSE(flagged[4].excluded);
    CHECK(flagged[5].excluded);
    // Range metadata is attached to every outcome.
    CHECK(flagged[0].range_low == 0.0);
    CHECK(flagged[0].range_high == 10.0);
}

TEST_CASE("empty ranges exclude their whole interval") {
    std::vector<dca::ValidRange> ranges(2);
    ranges[0] = {0.0, 0.0, true};
    ranges[1] = {10.0, 20.0, false};
    std::vector<dca::PredictionOutcome> outcomes = {outcome(0, 5.0), outcome(1, 15.0)};
    std::vector<dca::PredictionOutcome> flagged =
        dca::apply_exclusion(outcomes, ranges);
    CHECK(flagged[0].excluded);
    CHECK(flagged[0].range_empty);
    CHECK_FALSE(flagged[1].excluded);
}

TEST_CASE("widening factors never excludes a previously retained outcome") {
    dca::SegmentationList seg;
    seg.cuts = {0.3, 0.7};
    seg.n_intervals = 3;
    std::vector<dca::PredictionOutcome> outcomes;
    for (double v = -0.3; v <= 1.3; v += 0.01) {
        for (int k = 0; k < 3; ++k) outcomes.push_back(outcome(k, v));
    }
    std::vector<bool> previously_retained;
    for (double factor : {1.0, 1.05, 1.2, 1.6, 2.5}) {
        auto ranges = dca::expand_intervals(
            seg, dca::uniform_exclusion_config(3, factor), 0.0, 1.0);
        auto flagged = dca::apply_exclusion(outcomes, ranges);
        if (!previously_retained.empty()) {
            for (std::size_t i = 0; i < flagged.size(); ++i) {
                if (previously_retained[i]) CHECK_FALSE(flagged[i].excluded);
            }
        }
        previously_retained.clear();
        for (const auto& o : flagged) previously_retained.push_back(!o.excluded);
    }
}

TEST_CASE("exclusion_summary reproduces the headline percentages") {
    std::vector<dca::PredictionOutcome> outcomes;
    outcomes.reserve(85227);
    for (int i = 0; i < 85227; ++i) {
        outcomes.push_back(outcome(i % 3, 1.0, i < 3644));
    }
    dca::ExclusionSummary summary = dca::exclusion_summary(outcomes, 3);
    CHECK(summary.total == 85227);
    CHECK(summary.excluded == 3644);
    CHECK(summary.retained == 81583);
    CHECK(summary.excluded_rate == doctest::Approx(0.042756).epsilon(1e-4));
    CHECK(summary.retained_rate == doctest::Approx(0.957244).epsilon(1e-4));
    CHECK(summary.excluded_rate + summary.retained_rate == 1.0);

    std::int64_t per_interval = 0;
    for (auto c : summary.per_interval_total) per_interval += c;
    CHECK(per_interval == 85227);
    CHECK_THROWS_AS(dca::exclusion_summary({}, 1), std::invalid_argument);
}
