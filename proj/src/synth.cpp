#include "evdfa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "evdfa/errors.hpp"
#include "evdfa/rng.hpp"

namespace evdfa::synth {

namespace {

/// Seconds to integer microseconds, truncating. Generators work in seconds
/// internally so rates keep their natural units.
std::int64_t to_micros(double t_s) { return static_cast<std::int64_t>(t_s * 1e6); }

void require_geometry(const SensorGeometry& geometry) {
    if (geometry.width == 0 || geometry.height == 0) {
        throw UsageError("sensor geometry must be non-empty");
    }
}

} // namespace

LabeledStream gen_poisson_noise(const NoiseModel& model, double duration_s) {
    require_geometry(model.geometry);
    if (!(model.rate > 0.0)) {
        throw UsageError("noise rate must be positive");
    }
    if (!(duration_s > 0.0)) {
        throw UsageError("duration must be positive");
    }

    double pinned_rate = 0.0;
    if (model.pinned_pixel) {
        const auto& px = *model.pinned_pixel;
        if (!model.geometry.contains(px.x, px.y)) {
            throw UsageError("pinned pixel (" + std::to_string(px.x) + ", " +
                             std::to_string(px.y) + ") is outside the sensor");
        }
        if (!(model.pinned_rate_factor >= 0.0)) {
            throw UsageError("pinned rate factor must be non-negative");
        }
        pinned_rate =
            model.pinned_rate_factor * model.rate / static_cast<double>(model.geometry.pixel_count());
    }

    const double total_rate = model.rate + pinned_rate;
    const double pinned_share = pinned_rate / total_rate;

    Rng rng(model.seed);
    LabeledStream out;
    out.stream.geometry = model.geometry;
    out.stream.events.reserve(static_cast<std::size_t>(total_rate * duration_s * 1.1) + 16);

    double t = 0.0;
    while (true) {
        t += rng.exponential(total_rate);
        if (t >= duration_s) {
            break;
        }
        Event ev;
        ev.t = to_micros(t);
        if (model.pinned_pixel && rng.uniform01() < pinned_share) {
            ev.x = model.pinned_pixel->x;
            ev.y = model.pinned_pixel->y;
        } else {
            ev.x = static_cast<std::uint16_t>(rng.uniform_below(model.geometry.width));
            ev.y = static_cast<std::uint16_t>(rng.uniform_below(model.geometry.height));
        }
        ev.p = rng.polarity();
        out.stream.events.push_back(ev);
    }
    out.labels.assign(out.stream.events.size(), Label::noise);
    return out;
}

LabeledStream gen_moving_object(const ObjectModel& model) {
    require_geometry(model.geometry);
    if (model.extent == 0) {
        throw UsageError("object extent must be at least 1");
    }
    if (!(model.event_rate > 0.0)) {
        throw UsageError("object event rate must be positive");
    }
    if (!(model.duration_s > 0.0)) {
        throw UsageError("object duration must be positive");
    }

    const std::int64_t w = model.shape == ObjectShape::dot ? model.extent : 1;
    const std::int64_t h = model.extent;

    // Linear motion reaches its extreme footprint at the endpoints, so
    // checking t = 0 and t = duration covers the whole pass.
    for (const double tt : {0.0, model.duration_s}) {
        const auto bx = std::llround(model.trajectory.start_x + model.trajectory.vx * tt);
        const auto by = std::llround(model.trajectory.start_y + model.trajectory.vy * tt);
        if (bx < 0 || by < 0 || bx + w > model.geometry.width || by + h > model.geometry.height) {
            throw TrajectoryOutOfBoundsError(
                "object footprint leaves the sensor at t = " + std::to_string(tt) + " s");
        }
    }

    Rng rng(model.seed);
    LabeledStream out;
    out.stream.geometry = model.geometry;
    out.stream.events.reserve(
        static_cast<std::size_t>(model.event_rate * model.duration_s * 1.1) + 16);

    double t = 0.0;
    while (true) {
        t += rng.exponential(model.event_rate);
        if (t >= model.duration_s) {
            break;
        }
        const auto bx = std::llround(model.trajectory.start_x + model.trajectory.vx * t);
        const auto by = std::llround(model.trajectory.start_y + model.trajectory.vy * t);
        Event ev;
        ev.t = to_micros(t);
        ev.x = static_cast<std::uint16_t>(
            bx + (w > 1 ? rng.uniform_below(static_cast<std::uint32_t>(w)) : 0));
        ev.y = static_cast<std::uint16_t>(
            by + (h > 1 ? rng.uniform_below(static_cast<std::uint32_t>(h)) : 0));
        ev.p = rng.polarity();
        out.stream.events.push_back(ev);
    }
    out.labels.assign(out.stream.events.size(), Label::signal);
    return out;
}

LabeledStream merge(const LabeledStream& a, const LabeledStream& b) {
    if (a.stream.geometry.width != b.stream.geometry.width ||
        a.stream.geometry.height != b.stream.geometry.height) {
        throw GeometryMismatchError("cannot merge streams with different sensor geometry");
    }
    if (a.labels.size() != a.stream.events.size() || b.labels.size() != b.stream.events.size()) {
        throw LengthMismatchError("label vector length does not match event count");
    }

    LabeledStream out;
    out.stream.geometry = a.stream.geometry;
    const std::size_t total = a.stream.events.size() + b.stream.events.size();
    out.stream.events.reserve(total);
    out.labels.reserve(total);
    out.stream.events = a.stream.events;
    out.stream.events.insert(out.stream.events.end(), b.stream.events.begin(),
                             b.stream.events.end());
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        return out.stream.events[lhs].t < out.stream.events[rhs].t;
    });

    LabeledStream sorted;
    sorted.stream.geometry = out.stream.geometry;
    sorted.stream.events.reserve(total);
    sorted.labels.reserve(total);
    for (const std::size_t idx : order) {
        sorted.stream.events.push_back(out.stream.events[idx]);
        sorted.labels.push_back(out.labels[idx]);
    }
    return sorted;
}

LabeledStream default_scene(std::uint64_t seed) {
    const SensorGeometry geometry{128, 128};

    NoiseModel noise;
    noise.geometry = geometry;
    noise.rate = 5000.0;
    noise.seed = seed;

    ObjectModel object;
    object.geometry = geometry;
    object.shape = ObjectShape::bar;
    object.extent = 80;
    object.trajectory = {10.0, 24.0, 50.0, 0.0};
    object.event_rate = 20000.0;
    object.duration_s = 2.0;
    object.seed = seed + 1;

    return merge(gen_poisson_noise(noise, 10.0), gen_moving_object(object));
}

} // namespace evdfa::synth
