#pragma once

#include <cstdint>
#include <optional>

#include "evdfa/events.hpp"

namespace evdfa::synth {

/// Homogeneous Poisson background: every pixel fires independently at
/// rate / pixel_count events per second. When pinned_pixel is set, that
/// pixel additionally fires at pinned_rate_factor times the per-pixel
/// base rate (a stuck "hot" pixel).
struct NoiseModel {
    SensorGeometry geometry;
    double rate = 0.0; ///< total events per second across the sensor
    std::uint64_t seed = 0;
    std::optional<PixelCoord> pinned_pixel;
    double pinned_rate_factor = 0.0;
};

enum class ObjectShape : std::uint8_t {
    dot, ///< extent x extent square
    bar, ///< 1 x extent vertical segment
};

/// Linear motion: position(t) = start + velocity * t, in pixels / second.
struct Trajectory {
    double start_x = 0.0;
    double start_y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
};

struct ObjectModel {
    SensorGeometry geometry;
    ObjectShape shape = ObjectShape::bar;
    std::uint16_t extent = 1;
    Trajectory trajectory;
    double event_rate = 0.0; ///< total events per second over the object
    double duration_s = 0.0;
    std::uint64_t seed = 0;
};

/// Poisson background over [0, duration_s), labelled Label::noise.
/// Timestamps are microseconds.
LabeledStream gen_poisson_noise(const NoiseModel& model, double duration_s);

/// Moving-object events over [0, model.duration_s), labelled Label::signal.
/// Event times follow a Poisson process at event_rate; each event lands on a
/// uniformly chosen pixel of the object footprint at that instant. Throws
/// TrajectoryOutOfBoundsError if the footprint ever leaves the sensor.
LabeledStream gen_moving_object(const ObjectModel& model);

/// Merge two labelled streams into one, sorted by time (stable: ties keep
/// a-before-b order). Throws GeometryMismatchError on differing geometry.
LabeledStream merge(const LabeledStream& a, const LabeledStream& b);

/// The stock validation scene: 128x128 sensor, 5000 ev/s background for
/// 10 s, plus a vertical bar (extent 80) sweeping left to right for the
/// first 2 s at 20000 ev/s. The object is bright and brief on purpose:
/// whatever leaks into the noise partition of a correlation filter then
/// carries a strong rate modulation that interval statistics can see.
LabeledStream default_scene(std::uint64_t seed);

} // namespace evdfa::synth
