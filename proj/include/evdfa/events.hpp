#pragma once

#include <cstdint>
#include <vector>

#include "evdfa/errors.hpp"

namespace evdfa {

/// One DVS event: timestamp in integer microseconds, pixel address, polarity.
struct Event {
    std::int64_t t = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::int8_t p = 1; // +1 or -1

    bool operator==(const Event&) const = default;
};

struct SensorGeometry {
    std::uint16_t width = 0;
    std::uint16_t height = 0;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * height;
    }
    bool contains(std::uint16_t x, std::uint16_t y) const {
        return x < width && y < height;
    }
    bool operator==(const SensorGeometry&) const = default;
};

/// Time-sorted sequence of events on a fixed sensor array. Ties in t are
/// allowed; their relative order is whatever the producer emitted.
struct EventStream {
    SensorGeometry geometry;
    std::vector<Event> events;

    std::size_t size() const { return events.size(); }
    bool empty() const { return events.empty(); }
    bool operator==(const EventStream&) const = default;
};

/// Per-event classification. `unknown` only appears in ground-truth files
/// (CSV label column 0); the filter and the generators emit signal/noise.
enum class Label : std::uint8_t { unknown = 0, signal = 1, noise = 2 };

/// A stream plus an optional per-event label vector. Empty labels means
/// the stream is unlabeled; otherwise labels.size() == stream.size().
struct LabeledStream {
    EventStream stream;
    std::vector<Label> labels;

    bool has_labels() const { return !labels.empty(); }
    bool operator==(const LabeledStream&) const = default;
};

/// Half-open time interval [start, start + duration).
struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t duration = 0;
};

struct PixelCoord {
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    auto operator<=>(const PixelCoord&) const = default;
};

struct PixelHistogram {
    SensorGeometry geometry;
    std::vector<std::uint64_t> counts; // row-major, index = y * width + x

    std::uint64_t at(std::uint16_t x, std::uint16_t y) const {
        return counts[static_cast<std::size_t>(y) * geometry.width + x];
    }
    std::uint64_t total() const;
};

enum class SortMode { strict, stable_sort };

void validate_geometry(const SensorGeometry& g);

/// Checks geometry, per-event bounds, polarity domain and t ordering.
void validate_stream(const EventStream& s);

/// strict: throws UnsortedInputError on any timestamp decrease.
/// stable_sort: stably sorts by t, preserving order of equal timestamps.
EventStream validate_sort(SensorGeometry geometry, std::vector<Event> events,
                          SortMode mode);
LabeledStream validate_sort(LabeledStream in, SortMode mode);

/// Events with start <= t < start + duration, order preserved.
EventStream slice_window(const EventStream& s, TimeWindow w);
LabeledStream slice_window(const LabeledStream& s, TimeWindow w);

PixelHistogram pixel_histogram(const EventStream& s);

/// Pixels whose count exceeds factor times the median of the nonzero
/// per-pixel counts. Requires factor > 1. Returned sorted by (x, y).
std::vector<PixelCoord> detect_hot_pixels(const PixelHistogram& hist,
                                          double factor);

/// Drops every event at one of the listed pixels. Idempotent.
EventStream remove_pixels(const EventStream& s,
                          const std::vector<PixelCoord>& pixels);
LabeledStream remove_pixels(const LabeledStream& s,
                            const std::vector<PixelCoord>& pixels);

/// Keeps only events of the given polarity (labels follow).
LabeledStream select_polarity(const LabeledStream& s, std::int8_t p);

} // namespace evdfa
