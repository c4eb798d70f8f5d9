#include "evdfa/events.hpp"

#include <algorithm>
#include <numeric>

namespace evdfa {

std::uint64_t PixelHistogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

void validate_geometry(const SensorGeometry& g) {
    if (g.width < 1 || g.height < 1)
        throw UsageError("sensor geometry must be at least 1x1");
}

void validate_stream(const EventStream& s) {
    validate_geometry(s.geometry);
    std::int64_t prev_t = 0;
    bool first = true;
    for (const Event& e : s.events) {
        if (e.p != 1 && e.p != -1)
            throw MalformedPolarityError("polarity must be +1 or -1");
        if (e.t < 0)
            throw DataError("negative timestamp");
        if (!s.geometry.contains(e.x, e.y))
            throw OutOfBoundsError("event pixel outside sensor geometry");
        if (!first && e.t < prev_t)
            throw UnsortedInputError("timestamps decrease");
        prev_t = e.t;
        first = false;
    }
}

EventStream validate_sort(SensorGeometry geometry, std::vector<Event> events,
                          SortMode mode) {
    if (mode == SortMode::strict) {
        for (std::size_t i = 1; i < events.size(); ++i) {
            if (events[i].t < events[i - 1].t)
                throw UnsortedInputError("timestamps decrease at record " +
                                         std::to_string(i));
        }
    } else {
        std::stable_sort(events.begin(), events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
    }
    return EventStream{geometry, std::move(events)};
}

LabeledStream validate_sort(LabeledStream in, SortMode mode) {
    if (!in.has_labels())
        return LabeledStream{
            validate_sort(in.stream.geometry, std::move(in.stream.events), mode), {}};

    if (in.labels.size() != in.stream.size())
        throw LengthMismatchError("label count does not match event count");
    if (mode == SortMode::strict) {
        EventStream s = validate_sort(in.stream.geometry,
                                      std::move(in.stream.events), mode);
        return LabeledStream{std::move(s), std::move(in.labels)};
    }
    // Sort an index permutation so labels ride along with their events.
    std::vector<std::size_t> order(in.stream.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return in.stream.events[a].t < in.stream.events[b].t;
    });
    LabeledStream out;
    out.stream.geometry = in.stream.geometry;
    out.stream.events.reserve(order.size());
    out.labels.reserve(order.size());
    for (std::size_t i : order) {
        out.stream.events.push_back(in.stream.events[i]);
        out.labels.push_back(in.labels[i]);
    }
    return out;
}

namespace {

std::pair<std::size_t, std::size_t> window_range(const std::vector<Event>& events,
                                                 TimeWindow w) {
    if (w.duration <= 0)
        throw UsageError("time window duration must be positive");
    auto by_t = [](const Event& e, std::int64_t t) { return e.t < t; };
    auto lo = std::lower_bound(events.begin(), events.end(), w.start, by_t);
    auto hi = std::lower_bound(lo, events.end(), w.start + w.duration, by_t);
    return {static_cast<std::size_t>(lo - events.begin()),
            static_cast<std::size_t>(hi - events.begin())};
}

} // namespace

EventStream slice_window(const EventStream& s, TimeWindow w) {
    auto [lo, hi] = window_range(s.events, w);
    return EventStream{s.geometry,
                       {s.events.begin() + lo, s.events.begin() + hi}};
}

LabeledStream slice_window(const LabeledStream& s, TimeWindow w) {
    auto [lo, hi] = window_range(s.stream.events, w);
    LabeledStream out;
    out.stream.geometry = s.stream.geometry;
    out.stream.events.assign(s.stream.events.begin() + lo,
                             s.stream.events.begin() + hi);
    if (s.has_labels())
        out.labels.assign(s.labels.begin() + lo, s.labels.begin() + hi);
    return out;
}

PixelHistogram pixel_histogram(const EventStream& s) {
    validate_geometry(s.geometry);
    PixelHistogram hist{s.geometry,
                        std::vector<std::uint64_t>(s.geometry.pixel_count(), 0)};
    for (const Event& e : s.events)
        ++hist.counts[static_cast<std::size_t>(e.y) * s.geometry.width + e.x];
    return hist;
}

std::vector<PixelCoord> detect_hot_pixels(const PixelHistogram& hist,
                                          double factor) {
    if (!(factor > 1.0))
        throw UsageError("hot-pixel factor must exceed 1");

    std::vector<std::uint64_t> nonzero;
    nonzero.reserve(hist.counts.size());
    for (std::uint64_t c : hist.counts)
        if (c > 0) nonzero.push_back(c);
    if (nonzero.empty()) return {};

    // Median of the nonzero counts (midpoint average for even length).
    std::sort(nonzero.begin(), nonzero.end());
    const std::size_t m = nonzero.size();
    const double median = (m % 2 == 1)
                              ? static_cast<double>(nonzero[m / 2])
                              : 0.5 * (static_cast<double>(nonzero[m / 2 - 1]) +
                                       static_cast<double>(nonzero[m / 2]));

    const double threshold = factor * median;
    std::vector<PixelCoord> hot;
    for (std::uint16_t y = 0; y < hist.geometry.height; ++y) {
        for (std::uint16_t x = 0; x < hist.geometry.width; ++x) {
            if (static_cast<double>(hist.at(x, y)) > threshold)
                hot.push_back(PixelCoord{x, y});
        }
    }
    std::sort(hot.begin(), hot.end());
    return hot;
}

namespace {

std::vector<char> pixel_mask(const SensorGeometry& g,
                             const std::vector<PixelCoord>& pixels) {
    std::vector<char> mask(g.pixel_count(), 0);
    for (const PixelCoord& p : pixels) {
        if (g.contains(p.x, p.y))
            mask[static_cast<std::size_t>(p.y) * g.width + p.x] = 1;
    }
    return mask;
}

} // namespace

EventStream remove_pixels(const EventStream& s,
                          const std::vector<PixelCoord>& pixels) {
    if (pixels.empty()) return s;
    const auto mask = pixel_mask(s.geometry, pixels);
    EventStream out;
    out.geometry = s.geometry;
    out.events.reserve(s.events.size());
    for (const Event& e : s.events) {
        if (!mask[static_cast<std::size_t>(e.y) * s.geometry.width + e.x])
            out.events.push_back(e);
    }
    return out;
}

LabeledStream remove_pixels(const LabeledStream& s,
                            const std::vector<PixelCoord>& pixels) {
    if (pixels.empty()) return s;
    const auto mask = pixel_mask(s.stream.geometry, pixels);
    LabeledStream out;
    out.stream.geometry = s.stream.geometry;
    for (std::size_t i = 0; i < s.stream.events.size(); ++i) {
        const Event& e = s.stream.events[i];
        if (mask[static_cast<std::size_t>(e.y) * s.stream.geometry.width + e.x])
            continue;
        out.stream.events.push_back(e);
        if (s.has_labels()) out.labels.push_back(s.labels[i]);
    }
    return out;
}

LabeledStream select_polarity(const LabeledStream& s, std::int8_t p) {
    LabeledStream out;
    out.stream.geometry = s.stream.geometry;
    for (std::size_t i = 0; i < s.stream.events.size(); ++i) {
        if (s.stream.events[i].p != p) continue;
        out.stream.events.push_back(s.stream.events[i]);
        if (s.has_labels()) out.labels.push_back(s.labels[i]);
    }
    return out;
}

} // namespace evdfa
