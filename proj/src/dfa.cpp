#include "evdfa/dfa.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "evdfa/parallel.hpp"

namespace evdfa::dfa {

namespace {

// F(n) below this fraction of the profile magnitude is indistinguishable
// from rounding noise of the detrend and is treated as exactly zero.
constexpr double kDegenerateRelEps = 1e-12;

} // namespace

void validate_config(const DfaConfig& config) {
    if (!(config.q > 1.0)) throw UsageError("schedule ratio q must exceed 1");
    if (config.m1 < 4) throw UsageError("minimum segment m1 must be >= 4");
    if (!(config.max_fraction > 0.0 && config.max_fraction <= 1.0))
        throw UsageError("max_fraction must be in (0, 1]");
    if (config.detrend_order < 1 || config.detrend_order > 3)
        throw UsageError("detrend order must be 1, 2 or 3");
    if (config.fit_range && !(config.fit_range->n_lo < config.fit_range->n_hi))
        throw UsageError("fit range must satisfy n_lo < n_hi");
}

IntervalSeries intervals(const EventStream& s) {
    if (s.events.size() < 2)
        throw TooFewEventsError("need at least two events for intervals");
    IntervalSeries out;
    out.origin_t0 = s.events.front().t;
    out.values.reserve(s.events.size() - 1);
    for (std::size_t i = 1; i < s.events.size(); ++i)
        out.values.push_back(
            static_cast<double>(s.events[i].t - s.events[i - 1].t));
    return out;
}

ProfileSeries profile(const IntervalSeries& series) {
    if (series.values.empty())
        throw TooFewEventsError("empty interval series");
    ProfileSeries out;
    out.values.resize(series.values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        sum += series.values[i];
        out.values[i] = sum;
    }
    return out;
}

SegmentSchedule segment_schedule(std::size_t n_total, const DfaConfig& config) {
    validate_config(config);
    SegmentSchedule schedule;
    schedule.ratio = config.q;

    const double cap = std::floor(static_cast<double>(n_total) *
                                  config.max_fraction);
    const double m1 = static_cast<double>(config.m1);
    const double logq = std::log(config.q);
    double k = 0.0;
    while (true) {
        const double value = m1 * std::pow(config.q, k);
        if (value > cap + 0.5) break;
        const auto m = static_cast<std::size_t>(std::llround(value));
        if (m < config.m1 || static_cast<double>(m) > cap) break;
        if (schedule.sizes.empty() || m > schedule.sizes.back())
            schedule.sizes.push_back(m);
        // jump over k values that round to the same size
        const double k_same =
            std::ceil(std::log((static_cast<double>(m) + 0.5) / m1) / logq);
        k = std::max(k + 1.0, k_same);
    }

    if (schedule.sizes.size() < 3)
        throw SeriesTooShortError(
            "series of length " + std::to_string(n_total) +
            " yields fewer than three segment sizes");
    return schedule;
}

namespace {

// Orthonormal polynomial basis of degree <= order on n samples, abscissa
// centered and scaled to [-1, 1]. Modified Gram-Schmidt with one
// re-orthogonalization pass. The basis depends only on (n, order), so
// fluctuation_curve builds it once per schedule entry.
std::vector<std::vector<double>> detrend_basis(std::size_t n, int order) {
    const double half = 0.5 * static_cast<double>(n - 1);
    std::vector<double> u(n);
    for (std::size_t l = 0; l < n; ++l)
        u[l] = (static_cast<double>(l) - half) / (half > 0.0 ? half : 1.0);

    std::vector<std::vector<double>> q;
    q.reserve(static_cast<std::size_t>(order) + 1);
    std::vector<double> col(n);
    for (int j = 0; j <= order; ++j) {
        for (std::size_t l = 0; l < n; ++l)
            col[l] = (j == 0) ? 1.0 : std::pow(u[l], j);
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& prev : q) {
                double dot = 0.0;
                for (std::size_t l = 0; l < n; ++l) dot += prev[l] * col[l];
                for (std::size_t l = 0; l < n; ++l) col[l] -= dot * prev[l];
            }
        }
        double norm2 = 0.0;
        for (double v : col) norm2 += v * v;
        const double inv = 1.0 / std::sqrt(norm2);
        std::vector<double> unit(n);
        for (std::size_t l = 0; l < n; ++l) unit[l] = col[l] * inv;
        q.push_back(std::move(unit));
    }
    return q;
}

// Mean squared residual of one segment against the basis fit; summation
// order is fixed left to right.
double segment_residual_meansq(const double* y, std::size_t n,
                               const std::vector<std::vector<double>>& basis,
                               std::vector<double>& resid) {
    resid.assign(y, y + n);
    for (const auto& qcol : basis) {
        double coeff = 0.0;
        for (std::size_t l = 0; l < n; ++l) coeff += qcol[l] * resid[l];
        for (std::size_t l = 0; l < n; ++l) resid[l] -= coeff * qcol[l];
    }
    double sumsq = 0.0;
    for (std::size_t l = 0; l < n; ++l) sumsq += resid[l] * resid[l];
    return sumsq / static_cast<double>(n);
}

double profile_max_abs(const ProfileSeries& p) {
    double m = 0.0;
    for (double v : p.values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

double local_fluctuation(const ProfileSeries& profile, std::size_t segment_start,
                         std::size_t n, int order) {
    if (order < 1) throw UsageError("detrend order must be >= 1");
    if (n < static_cast<std::size_t>(order) + 2)
        throw UsageError("segment length must be at least order + 2");
    if (segment_start + n > profile.values.size())
        throw UsageError("segment exceeds profile length");

    const auto basis = detrend_basis(n, order);
    std::vector<double> resid;
    return std::sqrt(segment_residual_meansq(
        profile.values.data() + segment_start, n, basis, resid));
}

FluctuationCurve fluctuation_curve(const ProfileSeries& profile,
                                   const SegmentSchedule& schedule, int order) {
    const std::size_t total = profile.values.size();
    if (schedule.sizes.empty()) throw UsageError("empty segment schedule");
    if (schedule.sizes.front() < static_cast<std::size_t>(order) + 2)
        throw UsageError("smallest segment too short for detrend order");
    if (schedule.sizes.back() > total)
        throw UsageError("schedule exceeds profile length");

    FluctuationCurve curve;
    curve.n = schedule.sizes;
    curve.f.assign(schedule.sizes.size(), 0.0);
    curve.degenerate.assign(schedule.sizes.size(), false);

    detail::parallel_chunks(
        schedule.sizes.size(), 1, [&](std::size_t begin, std::size_t end) {
            std::vector<double> resid;
            for (std::size_t idx = begin; idx < end; ++idx) {
                const std::size_t n = schedule.sizes[idx];
                const std::size_t segments = total / n;
                const auto basis = detrend_basis(n, order);
                double mean_sq = 0.0;
                for (std::size_t k = 0; k < segments; ++k)
                    mean_sq += segment_residual_meansq(
                        profile.values.data() + k * n, n, basis, resid);
                mean_sq /= static_cast<double>(segments);
                curve.f[idx] = std::sqrt(mean_sq);
            }
        });
    // vector<bool> packs bits, so the flags are set outside the workers
    const double eps = kDegenerateRelEps * profile_max_abs(profile);
    for (std::size_t idx = 0; idx < curve.f.size(); ++idx)
        curve.degenerate[idx] = (curve.f[idx] <= eps);
    return curve;
}

ScalingFit fit_alpha(const FluctuationCurve& curve,
                     std::optional<FitRange> fit_range) {
    std::vector<double> log_n, log_f;
    FitRange used{0, 0};
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.degenerate[i]) continue;
        const std::size_t n = curve.n[i];
        if (fit_range && (n < fit_range->n_lo || n > fit_range->n_hi)) continue;
        if (log_n.empty()) used.n_lo = n;
        used.n_hi = n;
        log_n.push_back(std::log(static_cast<double>(n)));
        log_f.push_back(std::log(curve.f[i]));
    }
    if (log_n.size() < 3)
        throw DegenerateSeriesError(
            "fewer than three usable points for the log-log fit");

    const auto count = static_cast<double>(log_n.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        mean_x += log_n[i];
        mean_y += log_f[i];
    }
    mean_x /= count;
    mean_y /= count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        const double dx = log_n[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (log_f[i] - mean_y);
    }
    ScalingFit fit;
    fit.alpha = sxy / sxx;
    fit.intercept = mean_y - fit.alpha * mean_x;
    fit.fit_range = used;
    double ss = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        const double r = log_f[i] - (fit.intercept + fit.alpha * log_n[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / count);
    return fit;
}

DfaResult dfa_on_intervals(const IntervalSeries& series,
                           const DfaConfig& config) {
    validate_config(config);
    const ProfileSeries prof = profile(series);
    const SegmentSchedule schedule =
        segment_schedule(prof.values.size(), config);
    DfaResult result;
    result.curve = fluctuation_curve(prof, schedule, config.detrend_order);
    result.fit = fit_alpha(result.curve, config.fit_range);
    return result;
}

DfaResult dfa_exponent(const EventStream& s, const DfaConfig& config) {
    return dfa_on_intervals(intervals(s), config);
}

// --- report document

namespace {

nlohmann::json fit_range_json(const FitRange& r) {
    return nlohmann::json{{"n_lo", r.n_lo}, {"n_hi", r.n_hi}};
}

nlohmann::json config_json(const DfaConfig& c) {
    nlohmann::json j{{"q", c.q},
                     {"m1", c.m1},
                     {"max_fraction", c.max_fraction},
                     {"order", c.detrend_order}};
    j["fit_range"] = c.fit_range ? fit_range_json(*c.fit_range)
                                 : nlohmann::json(nullptr);
    return j;
}

} // namespace

void write_report(std::ostream& out, const DfaReport& report) {
    const DfaResult& r = report.result;
    nlohmann::json j;
    j["n"] = r.curve.n;
    j["F"] = r.curve.f;
    j["flags"] = r.curve.degenerate;
    j["alpha"] = r.fit.alpha;
    j["intercept"] = r.fit.intercept;
    j["residual"] = r.fit.residual;
    j["fit_range"] = fit_range_json(r.fit.fit_range);
    j["config"] = config_json(report.config);
    out << j.dump(2) << '\n';
}

DfaReport read_report(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("dfa report: ") + e.what());
    }
    try {
        DfaReport report;
        report.result.curve.n = j.at("n").get<std::vector<std::size_t>>();
        report.result.curve.f = j.at("F").get<std::vector<double>>();
        report.result.curve.degenerate =
            j.at("flags").get<std::vector<bool>>();
        report.result.fit.alpha = j.at("alpha").get<double>();
        report.result.fit.intercept = j.at("intercept").get<double>();
        report.result.fit.residual = j.at("residual").get<double>();
        report.result.fit.fit_range.n_lo =
            j.at("fit_range").at("n_lo").get<std::size_t>();
        report.result.fit.fit_range.n_hi =
            j.at("fit_range").at("n_hi").get<std::size_t>();
        const auto& cfg = j.at("config");
        report.config.q = cfg.at("q").get<double>();
        report.config.m1 = cfg.at("m1").get<std::size_t>();
        report.config.max_fraction = cfg.at("max_fraction").get<double>();
        report.config.detrend_order = cfg.at("order").get<int>();
        if (!cfg.at("fit_range").is_null()) {
            FitRange r;
            r.n_lo = cfg.at("fit_range").at("n_lo").get<std::size_t>();
            r.n_hi = cfg.at("fit_range").at("n_hi").get<std::size_t>();
            report.config.fit_range = r;
        }
        if (report.result.curve.f.size() != report.result.curve.n.size() ||
            report.result.curve.degenerate.size() !=
                report.result.curve.n.size())
            throw DataError("dfa report: mismatched array lengths");
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("dfa report: ") + e.what());
    }
}

} // namespace evdfa::dfa
