#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "evdfa/events.hpp"

namespace evdfa::dfa {

/// Inter-event intervals x_i = t_{i+1} - t_i, carried as reals so that
/// scale transformations with non-integer factors stay exact in tests.
struct IntervalSeries {
    std::vector<double> values;
    std::int64_t origin_t0 = 0;
};

/// Cumulative profile X_i of the interval series. For a stream this is
/// X_i = t_{i+1} - t_0, i.e. the timestamps relative to the first event.
struct ProfileSeries {
    std::vector<double> values;
};

/// Geometric ladder of segment lengths n, deduplicated after rounding.
struct SegmentSchedule {
    std::vector<std::size_t> sizes;
    double ratio = 0.0;
};

/// F(n) per schedule entry. A point is flagged degenerate when the
/// detrended fluctuation vanishes (exactly periodic input); such points
/// carry no information for the log-log fit.
struct FluctuationCurve {
    std::vector<std::size_t> n;
    std::vector<double> f;
    std::vector<bool> degenerate;

    std::size_t size() const { return n.size(); }
};

struct FitRange {
    std::size_t n_lo = 0;
    std::size_t n_hi = 0;
};

/// Power-law fit F(n) ~ C * n^alpha, done as ordinary least squares on
/// (ln n, ln F). intercept is ln C; residual is the RMS misfit in log
/// space over the points used.
struct ScalingFit {
    double alpha = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    FitRange fit_range; // n of the first and last point actually used
};

inline constexpr double kDefaultScheduleRatio =
    1.1892071150027210667; // 2^(1/4)

struct DfaConfig {
    double q = kDefaultScheduleRatio;
    std::size_t m1 = 4;
    double max_fraction = 0.25; // largest segment as a fraction of N
    int detrend_order = 1;
    std::optional<FitRange> fit_range; // default: all non-degenerate points
};

void validate_config(const DfaConfig& config);

struct DfaResult {
    FluctuationCurve curve;
    ScalingFit fit;
};

/// Requires at least two events.
IntervalSeries intervals(const EventStream& s);

ProfileSeries profile(const IntervalSeries& series);

/// Sizes round(m1 * q^k) for k = 0, 1, 2, ..., deduplicated and capped at
/// floor(n_total * max_fraction). Throws SeriesTooShortError when fewer
/// than three sizes survive.
SegmentSchedule segment_schedule(std::size_t n_total, const DfaConfig& config);

/// RMS residual of a least-squares polynomial detrend over profile
/// values [segment_start, segment_start + n). Requires n >= order + 2.
double local_fluctuation(const ProfileSeries& profile, std::size_t segment_start,
                         std::size_t n, int order);

/// For each n: the first floor(N/n) * n points split into contiguous
/// segments, per-segment fluctuations combined as the root of their mean
/// square. The trailing N mod n points are discarded. Summation order is
/// fixed (sequential in k and l) so results do not depend on threading;
/// schedule entries may be computed on worker threads.
FluctuationCurve fluctuation_curve(const ProfileSeries& profile,
                                   const SegmentSchedule& schedule, int order);

/// Throws DegenerateSeriesError when fewer than three non-degenerate
/// points fall inside the fit range.
ScalingFit fit_alpha(const FluctuationCurve& curve,
                     std::optional<FitRange> fit_range = {});

DfaResult dfa_on_intervals(const IntervalSeries& series,
                           const DfaConfig& config = {});

/// Full pipeline: intervals -> profile -> schedule -> curve -> fit.
DfaResult dfa_exponent(const EventStream& s, const DfaConfig& config = {});

/// Report document: curve, fit and config echo in one JSON object.
struct DfaReport {
    DfaResult result;
    DfaConfig config;
};

void write_report(std::ostream& out, const DfaReport& report);
DfaReport read_report(std::istream& in);

} // namespace evdfa::dfa
