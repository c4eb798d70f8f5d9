#pragma once

#include "evdfa/events.hpp"

namespace evdfa {

/// symmetric: a neighbor correlates when |t_i - t_j| <= dt.
/// causal: only the past counts, 0 <= t_i - t_j <= dt. Equal timestamps
/// count in both modes.
enum class TemporalMode { symmetric, causal };

/// The correlation box of the background-activity filter. An event is
/// signal when at least rho_min other events fall inside its
/// (dsx, dsy, dt) spatiotemporal box.
struct BaFilterParams {
    int dsx = 1;
    int dsy = 1;
    std::int64_t dt = 0; // microseconds, must be >= 1; no default
    int rho_min = 1;
    TemporalMode mode = TemporalMode::symmetric;
};

void validate_params(const BaFilterParams& params);

/// One entry per event, signal or noise, aligned with the stream index.
using LabelVector = std::vector<Label>;

struct Partition {
    EventStream clean;
    EventStream noise;
    BaFilterParams params;
};

/// Correlated-neighbor count for event i by direct scan over the whole
/// stream. This is the reference oracle for classify; O(N) per call.
int correlation_count_naive(const EventStream& s, const BaFilterParams& params,
                            std::size_t i);

/// Signal/noise label per event. Bit-identical to evaluating
/// correlation_count_naive at every index, computed through a two-pointer
/// temporal window over the sorted stream with a per-pixel count grid.
/// Pure; may run chunks of the index range on worker threads.
LabelVector classify(const EventStream& s, const BaFilterParams& params);

/// Splits the stream by label, preserving relative order on both sides.
Partition partition(const EventStream& s, const LabelVector& labels,
                    const BaFilterParams& params = {});

/// Same split carrying ground-truth labels along with their events.
struct LabeledPartition {
    LabeledStream clean;
    LabeledStream noise;
    BaFilterParams params;
};
LabeledPartition partition(const LabeledStream& s, const LabelVector& labels,
                           const BaFilterParams& params = {});

} // namespace evdfa
