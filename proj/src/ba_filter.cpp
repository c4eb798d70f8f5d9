#include "evdfa/ba_filter.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_map>

#include "evdfa/parallel.hpp"

namespace evdfa {

void validate_params(const BaFilterParams& params) {
    if (params.dt < 1) throw UsageError("filter dt must be >= 1 microsecond");
    if (params.rho_min < 1) throw UsageError("rho_min must be >= 1");
    if (params.dsx < 0 || params.dsy < 0)
        throw UsageError("dsx and dsy must be >= 0");
}

int correlation_count_naive(const EventStream& s, const BaFilterParams& params,
                            std::size_t i) {
    validate_params(params);
    if (i >= s.events.size()) throw UsageError("event index out of range");

    const Event& ei = s.events[i];
    int rho = 0;
    for (std::size_t j = 0; j < s.events.size(); ++j) {
        if (j == i) continue;
        const Event& ej = s.events[j];
        const std::int64_t dt = ei.t - ej.t;
        const bool in_time = (params.mode == TemporalMode::symmetric)
                                 ? (std::llabs(dt) <= params.dt)
                                 : (dt >= 0 && dt <= params.dt);
        if (!in_time) continue;
        if (std::abs(int(ei.x) - int(ej.x)) > params.dsx) continue;
        if (std::abs(int(ei.y) - int(ej.y)) > params.dsy) continue;
        ++rho;
    }
    return rho;
}

namespace {

// Count of events currently inside the temporal window, per pixel. Dense
// array for normal sensor sizes, hash map beyond that.
class CountGrid {
  public:
    explicit CountGrid(const SensorGeometry& g)
        : width_(g.width), height_(g.height) {
        const std::size_t cells = g.pixel_count();
        if (cells <= kDenseLimit) dense_.assign(cells, 0);
    }

    void add(std::uint16_t x, std::uint16_t y) {
        if (!dense_.empty())
            ++dense_[index(x, y)];
        else
            ++sparse_[index(x, y)];
    }

    void remove(std::uint16_t x, std::uint16_t y) {
        if (!dense_.empty()) {
            --dense_[index(x, y)];
        } else {
            auto it = sparse_.find(index(x, y));
            if (--it->second == 0) sparse_.erase(it);
        }
    }

    long box_sum(int cx, int cy, int dsx, int dsy) const {
        const int x0 = std::max(0, cx - dsx);
        const int x1 = std::min(int(width_) - 1, cx + dsx);
        const int y0 = std::max(0, cy - dsy);
        const int y1 = std::min(int(height_) - 1, cy + dsy);
        long sum = 0;
        if (!dense_.empty()) {
            for (int y = y0; y <= y1; ++y) {
                const std::size_t row = static_cast<std::size_t>(y) * width_;
                for (int x = x0; x <= x1; ++x) sum += dense_[row + x];
            }
        } else {
            for (int y = y0; y <= y1; ++y) {
                for (int x = x0; x <= x1; ++x) {
                    auto it = sparse_.find(static_cast<std::size_t>(y) * width_ + x);
                    if (it != sparse_.end()) sum += it->second;
                }
            }
        }
        return sum;
    }

  private:
    static constexpr std::size_t kDenseLimit = std::size_t{1} << 22;

    std::size_t index(std::uint16_t x, std::uint16_t y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    std::uint16_t width_;
    std::uint16_t height_;
    std::vector<std::int32_t> dense_;
    std::unordered_map<std::size_t, std::int32_t> sparse_;
};

} // namespace

LabelVector classify(const EventStream& s, const BaFilterParams& params) {
    validate_params(params);
    const auto& ev = s.events;
    LabelVector labels(ev.size());
    if (ev.empty()) return labels;

    // With equal timestamps the window is defined by time, not index, so
    // future events at t_i also enter in causal mode (t_i - t_j = 0).
    const std::int64_t ahead = (params.mode == TemporalMode::symmetric)
                                   ? params.dt
                                   : 0;

    auto by_t = [](const Event& e, std::int64_t t) { return e.t < t; };
    auto worker = [&](std::size_t begin, std::size_t end) {
        CountGrid grid(s.geometry);
        // grid holds exactly the events in [lo, hi)
        std::size_t lo = static_cast<std::size_t>(
            std::lower_bound(ev.begin(), ev.end(), ev[begin].t - params.dt, by_t) -
            ev.begin());
        std::size_t hi = lo;
        for (std::size_t i = begin; i < end; ++i) {
            const Event& ei = ev[i];
            while (hi < ev.size() && ev[hi].t <= ei.t + ahead) {
                grid.add(ev[hi].x, ev[hi].y);
                ++hi;
            }
            while (ev[lo].t < ei.t - params.dt) {
                grid.remove(ev[lo].x, ev[lo].y);
                ++lo;
            }
            const long rho =
                grid.box_sum(ei.x, ei.y, params.dsx, params.dsy) - 1;
            labels[i] = (rho >= params.rho_min) ? Label::signal : Label::noise;
        }
    };
    detail::parallel_chunks(ev.size(), 4096, worker);
    return labels;
}

Partition partition(const EventStream& s, const LabelVector& labels,
                    const BaFilterParams& params) {
    if (labels.size() != s.events.size())
        throw LengthMismatchError("label count does not match event count");
    Partition out;
    out.params = params;
    out.clean.geometry = s.geometry;
    out.noise.geometry = s.geometry;
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        if (labels[i] == Label::signal)
            out.clean.events.push_back(s.events[i]);
        else
            out.noise.events.push_back(s.events[i]);
    }
    return out;
}

LabeledPartition partition(const LabeledStream& s, const LabelVector& labels,
                           const BaFilterParams& params) {
    if (labels.size() != s.stream.events.size())
        throw LengthMismatchError("label count does not match event count");
    LabeledPartition out;
    out.params = params;
    out.clean.stream.geometry = s.stream.geometry;
    out.noise.stream.geometry = s.stream.geometry;
    for (std::size_t i = 0; i < s.stream.events.size(); ++i) {
        LabeledStream& side =
            (labels[i] == Label::signal) ? out.clean : out.noise;
        side.stream.events.push_back(s.stream.events[i]);
        if (s.has_labels()) side.labels.push_back(s.labels[i]);
    }
    return out;
}

} // namespace evdfa
