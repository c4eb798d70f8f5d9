#include "evdfa/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "evdfa/errors.hpp"

namespace evdfa::analysis {

namespace {

/// Fixed-format numeral for plot files; prints non-finite values as
/// inf/-inf/nan so downstream tools see a consistent token.
std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

double ConfusionMatrix::precision() const {
    const std::uint64_t denom = true_pos + false_pos;
    if (denom == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return static_cast<double>(true_pos) / static_cast<double>(denom);
}

double ConfusionMatrix::recall() const {
    const std::uint64_t denom = true_pos + false_neg;
    if (denom == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return static_cast<double>(true_pos) / static_cast<double>(denom);
}

DenoiseMetrics snr_from_counts(std::size_t n_clean, std::size_t n_noise) {
    DenoiseMetrics m;
    m.n_clean = n_clean;
    m.n_noise = n_noise;
    if (n_noise == 0) {
        m.flag = SnrFlag::undefined;
        m.snr_ratio = std::numeric_limits<double>::quiet_NaN();
        m.snr_db = std::numeric_limits<double>::quiet_NaN();
    } else if (n_clean == 0) {
        m.flag = SnrFlag::minus_infinity;
        m.snr_ratio = 0.0;
        m.snr_db = -std::numeric_limits<double>::infinity();
    } else {
        m.flag = SnrFlag::ok;
        m.snr_ratio = static_cast<double>(n_clean) / static_cast<double>(n_noise);
        m.snr_db = 10.0 * std::log10(m.snr_ratio);
    }
    return m;
}

DenoiseMetrics snr(const Partition& partition) {
    return snr_from_counts(partition.clean.size(), partition.noise.size());
}

ConfusionMatrix confusion(const LabelVector& predicted, const std::vector<Label>& truth) {
    if (predicted.size() != truth.size()) {
        throw LengthMismatchError("predicted and truth label vectors differ in length (" +
                                  std::to_string(predicted.size()) + " vs " +
                                  std::to_string(truth.size()) + ")");
    }
    ConfusionMatrix c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == Label::unknown) {
            throw DataError("ground truth contains an unlabeled event at index " +
                            std::to_string(i));
        }
        if (predicted[i] == Label::unknown) {
            throw DataError("prediction contains an unlabeled event at index " +
                            std::to_string(i));
        }
        const bool pred_signal = predicted[i] == Label::signal;
        const bool true_signal = truth[i] == Label::signal;
        if (pred_signal && true_signal) {
            ++c.true_pos;
        } else if (pred_signal && !true_signal) {
            ++c.false_pos;
        } else if (!pred_signal && true_signal) {
            ++c.false_neg;
        } else {
            ++c.true_neg;
        }
    }
    return c;
}

namespace {

SweepTable sweep_impl(const EventStream& stream, const std::vector<Label>* truth,
                      const std::vector<std::int64_t>& dt_list,
                      const BaFilterParams& params_base, const dfa::DfaConfig& dfa_config) {
    if (dt_list.empty()) {
        throw UsageError("sweep needs at least one dt");
    }
    for (std::size_t i = 1; i < dt_list.size(); ++i) {
        if (dt_list[i] <= dt_list[i - 1]) {
            throw UsageError("dt list must be strictly increasing");
        }
    }
    dfa::validate_config(dfa_config);

    SweepTable table;
    table.config.params_base = params_base;
    table.config.dfa_config = dfa_config;
    table.rows.reserve(dt_list.size());

    std::exception_ptr first_degenerate;
    bool any_alpha_noise = false;
    for (const std::int64_t dt : dt_list) {
        const auto t_begin = std::chrono::steady_clock::now();
        BaFilterParams params = params_base;
        params.dt = dt;

        const LabelVector labels = classify(stream, params);
        const Partition part = partition(stream, labels, params);

        SweepRow row;
        row.dt = dt;
        row.metrics = snr(part);
        if (truth != nullptr) {
            row.confusion = confusion(labels, *truth);
        }
        try {
            row.alpha_noise = dfa::dfa_exponent(part.noise, dfa_config).fit;
            any_alpha_noise = true;
        } catch (const DegenerateError&) {
            if (!first_degenerate) {
                first_degenerate = std::current_exception();
            }
        }
        try {
            row.alpha_clean = dfa::dfa_exponent(part.clean, dfa_config).fit;
        } catch (const DegenerateError&) {
            // diagnostics only; an empty clean side at tiny dt is expected
        }
        row.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t_begin)
                               .count();
        table.rows.push_back(std::move(row));
    }
    if (!any_alpha_noise && first_degenerate) {
        std::rethrow_exception(first_degenerate);
    }
    return table;
}

} // namespace

SweepTable sweep(const EventStream& stream, const std::vector<std::int64_t>& dt_list,
                 const BaFilterParams& params_base, const dfa::DfaConfig& dfa_config) {
    return sweep_impl(stream, nullptr, dt_list, params_base, dfa_config);
}

SweepTable sweep(const LabeledStream& stream, const std::vector<std::int64_t>& dt_list,
                 const BaFilterParams& params_base, const dfa::DfaConfig& dfa_config) {
    if (stream.has_labels() && stream.labels.size() != stream.stream.events.size()) {
        throw LengthMismatchError("label vector length does not match event count");
    }
    return sweep_impl(stream.stream, stream.has_labels() ? &stream.labels : nullptr, dt_list,
                      params_base, dfa_config);
}

Selection select_optimal_dt(const SweepTable& table, double epsilon) {
    if (table.rows.empty()) {
        throw DataError("sweep table has no rows");
    }
    if (!(epsilon > 0.0)) {
        throw UsageError("epsilon must be positive");
    }
    // Decimal boundary cases (say alpha 0.52 against epsilon 0.02) land a
    // few ulps past the exact threshold in binary floating point; the
    // slack keeps <= behaving the way the decimals read.
    constexpr double kBoundarySlack = 1e-12;
    for (const SweepRow& row : table.rows) {
        if (!row.alpha_noise) {
            continue;
        }
        if (std::abs(row.alpha_noise->alpha - 0.5) <= epsilon + kBoundarySlack) {
            Selection sel;
            sel.dt = row.dt;
            sel.converged = true;
            sel.alpha_noise = row.alpha_noise;
            std::ostringstream why;
            why << "smallest dt with |alpha_noise - 0.5| <= " << epsilon
                << " (alpha_noise = " << row.alpha_noise->alpha << ")";
            sel.rationale = why.str();
            return sel;
        }
    }
    const SweepRow& last = table.rows.back();
    Selection sel;
    sel.dt = last.dt;
    sel.converged = false;
    sel.alpha_noise = last.alpha_noise;
    std::ostringstream why;
    why << "no swept dt reached |alpha_noise - 0.5| <= " << epsilon
        << "; falling back to the largest dt";
    sel.rationale = why.str();
    return sel;
}

void emit_dfa_loglog(std::ostream& out, const dfa::FluctuationCurve& curve) {
    out << "# log10_n log10_F\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.degenerate[i]) {
            continue;
        }
        out << num(std::log10(static_cast<double>(curve.n[i]))) << ' '
            << num(std::log10(curve.f[i])) << '\n';
    }
    if (!out) {
        throw DataError("failed to write plot data");
    }
}

void emit_sweep_summary(std::ostream& out, const SweepTable& table) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << "# dt snr_db alpha_noise alpha_clean\n";
    for (const SweepRow& row : table.rows) {
        out << row.dt << ' ' << num(row.metrics.snr_db) << ' '
            << num(row.alpha_noise ? row.alpha_noise->alpha : nan) << ' '
            << num(row.alpha_clean ? row.alpha_clean->alpha : nan) << '\n';
    }
    if (!out) {
        throw DataError("failed to write plot data");
    }
}

void emit_xyt_cloud(std::ostream& out, const EventStream& stream, std::size_t cap) {
    if (cap == 0) {
        throw UsageError("xyt cap must be at least 1");
    }
    out << "# t x y p\n";
    const std::size_t n = stream.size();
    const auto write_event = [&](const Event& ev) {
        out << ev.t << ' ' << ev.x << ' ' << ev.y << ' ' << static_cast<int>(ev.p) << '\n';
    };
    if (n <= cap) {
        for (const Event& ev : stream.events) {
            write_event(ev);
        }
    } else {
        // Uniform stride: exactly cap lines at indices floor(k * n / cap).
        for (std::size_t k = 0; k < cap; ++k) {
            write_event(stream.events[k * n / cap]);
        }
    }
    if (!out) {
        throw DataError("failed to write plot data");
    }
}

namespace {

nlohmann::json fit_range_json(const dfa::FitRange& r) {
    return nlohmann::json{{"n_lo", r.n_lo}, {"n_hi", r.n_hi}};
}

nlohmann::json fit_json(const std::optional<dfa::ScalingFit>& fit) {
    if (!fit) {
        return nullptr;
    }
    return nlohmann::json{{"alpha", fit->alpha},
                          {"intercept", fit->intercept},
                          {"residual", fit->residual},
                          {"fit_range", fit_range_json(fit->fit_range)}};
}

std::optional<dfa::ScalingFit> fit_from_json(const nlohmann::json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    dfa::ScalingFit fit;
    fit.alpha = j.at("alpha").get<double>();
    fit.intercept = j.at("intercept").get<double>();
    fit.residual = j.at("residual").get<double>();
    fit.fit_range.n_lo = j.at("fit_range").at("n_lo").get<std::size_t>();
    fit.fit_range.n_hi = j.at("fit_range").at("n_hi").get<std::size_t>();
    return fit;
}

const char* mode_name(TemporalMode mode) {
    return mode == TemporalMode::symmetric ? "symmetric" : "causal";
}

TemporalMode mode_from_name(const std::string& name) {
    if (name == "symmetric") {
        return TemporalMode::symmetric;
    }
    if (name == "causal") {
        return TemporalMode::causal;
    }
    throw DataError("unknown temporal mode '" + name + "'");
}

} // namespace

void write_table(std::ostream& out, const SweepTable& table) {
    nlohmann::json j;
    j["config"]["filter"] = {{"dsx", table.config.params_base.dsx},
                             {"dsy", table.config.params_base.dsy},
                             {"rho_min", table.config.params_base.rho_min},
                             {"mode", mode_name(table.config.params_base.mode)}};
    nlohmann::json dfa_cfg{{"q", table.config.dfa_config.q},
                           {"m1", table.config.dfa_config.m1},
                           {"max_fraction", table.config.dfa_config.max_fraction},
                           {"order", table.config.dfa_config.detrend_order}};
    dfa_cfg["fit_range"] = table.config.dfa_config.fit_range
                               ? fit_range_json(*table.config.dfa_config.fit_range)
                               : nlohmann::json(nullptr);
    j["config"]["dfa"] = std::move(dfa_cfg);

    j["rows"] = nlohmann::json::array();
    for (const SweepRow& row : table.rows) {
        nlohmann::json r;
        r["dt"] = row.dt;
        r["n_clean"] = row.metrics.n_clean;
        r["n_noise"] = row.metrics.n_noise;
        // The counts are authoritative; ratio/db are echoed for readers
        // and recomputed on load (JSON cannot carry -inf/nan).
        switch (row.metrics.flag) {
        case SnrFlag::ok:
            r["snr"] = {{"flag", "ok"},
                        {"ratio", row.metrics.snr_ratio},
                        {"db", row.metrics.snr_db}};
            break;
        case SnrFlag::undefined:
            r["snr"] = {{"flag", "undefined"}};
            break;
        case SnrFlag::minus_infinity:
            r["snr"] = {{"flag", "minus_infinity"}, {"ratio", 0.0}};
            break;
        }
        r["alpha_noise"] = fit_json(row.alpha_noise);
        r["alpha_clean"] = fit_json(row.alpha_clean);
        if (row.confusion) {
            nlohmann::json c{{"true_pos", row.confusion->true_pos},
                             {"false_pos", row.confusion->false_pos},
                             {"true_neg", row.confusion->true_neg},
                             {"false_neg", row.confusion->false_neg}};
            if (!std::isnan(row.confusion->precision())) {
                c["precision"] = row.confusion->precision();
            }
            if (!std::isnan(row.confusion->recall())) {
                c["recall"] = row.confusion->recall();
            }
            r["confusion"] = std::move(c);
        } else {
            r["confusion"] = nullptr;
        }
        r["wall_time_ms"] = row.wall_time_ms;
        j["rows"].push_back(std::move(r));
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw DataError("failed to write sweep table");
    }
}

SweepTable read_table(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("sweep table: ") + e.what());
    }
    try {
        SweepTable table;
        const auto& filter = j.at("config").at("filter");
        table.config.params_base.dsx = filter.at("dsx").get<int>();
        table.config.params_base.dsy = filter.at("dsy").get<int>();
        table.config.params_base.rho_min = filter.at("rho_min").get<int>();
        table.config.params_base.mode = mode_from_name(filter.at("mode").get<std::string>());
        const auto& cfg = j.at("config").at("dfa");
        table.config.dfa_config.q = cfg.at("q").get<double>();
        table.config.dfa_config.m1 = cfg.at("m1").get<std::size_t>();
        table.config.dfa_config.max_fraction = cfg.at("max_fraction").get<double>();
        table.config.dfa_config.detrend_order = cfg.at("order").get<int>();
        if (!cfg.at("fit_range").is_null()) {
            dfa::FitRange r;
            r.n_lo = cfg.at("fit_range").at("n_lo").get<std::size_t>();
            r.n_hi = cfg.at("fit_range").at("n_hi").get<std::size_t>();
            table.config.dfa_config.fit_range = r;
        }
        for (const auto& rj : j.at("rows")) {
            SweepRow row;
            row.dt = rj.at("dt").get<std::int64_t>();
            row.metrics = snr_from_counts(rj.at("n_clean").get<std::size_t>(),
                                          rj.at("n_noise").get<std::size_t>());
            row.alpha_noise = fit_from_json(rj.at("alpha_noise"));
            row.alpha_clean = fit_from_json(rj.at("alpha_clean"));
            if (!rj.at("confusion").is_null()) {
                const auto& c = rj.at("confusion");
                ConfusionMatrix cm;
                cm.true_pos = c.at("true_pos").get<std::uint64_t>();
                cm.false_pos = c.at("false_pos").get<std::uint64_t>();
                cm.true_neg = c.at("true_neg").get<std::uint64_t>();
                cm.false_neg = c.at("false_neg").get<std::uint64_t>();
                row.confusion = cm;
            }
            row.wall_time_ms = rj.at("wall_time_ms").get<double>();
            if (!table.rows.empty() && row.dt <= table.rows.back().dt) {
                throw DataError("sweep table rows are not strictly increasing in dt");
            }
            table.rows.push_back(std::move(row));
        }
        return table;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("sweep table: ") + e.what());
    }
}

} // namespace evdfa::analysis
