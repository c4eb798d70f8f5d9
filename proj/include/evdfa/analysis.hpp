#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evdfa/ba_filter.hpp"
#include "evdfa/dfa.hpp"
#include "evdfa/events.hpp"

namespace evdfa::analysis {

enum class SnrFlag : std::uint8_t {
    ok,             ///< both partitions non-empty
    undefined,      ///< noise partition empty: ratio has no value
    minus_infinity, ///< clean partition empty: ratio 0, dB diverges
};

/// Clean-to-noise event-count ratio. SNR here is a definition choice: the
/// binary partition is all the filter yields, so the count ratio (and its
/// dB form 10*log10) is the computable reading of "signal-to-noise".
struct DenoiseMetrics {
    std::size_t n_clean = 0;
    std::size_t n_noise = 0;
    SnrFlag flag = SnrFlag::ok;
    double snr_ratio = 0.0; ///< meaningless when flag == undefined
    double snr_db = 0.0;    ///< meaningful only when flag == ok
};

/// Ground-truth tally with signal as the positive class.
struct ConfusionMatrix {
    std::uint64_t true_pos = 0;
    std::uint64_t false_pos = 0;
    std::uint64_t true_neg = 0;
    std::uint64_t false_neg = 0;

    std::uint64_t total() const { return true_pos + false_pos + true_neg + false_neg; }
    /// NaN when no events were predicted signal.
    double precision() const;
    /// NaN when the ground truth holds no signal events.
    double recall() const;
};

/// One swept dt. The alpha fits are absent when the corresponding
/// partition was too small or too regular for a scaling fit; such rows
/// stay in the table but are ineligible for selection. confusion is
/// present only when ground-truth labels were supplied.
struct SweepRow {
    std::int64_t dt = 0;
    DenoiseMetrics metrics;
    std::optional<dfa::ScalingFit> alpha_noise;
    std::optional<dfa::ScalingFit> alpha_clean;
    std::optional<ConfusionMatrix> confusion;
    double wall_time_ms = 0.0;
};

/// Everything that was held fixed across the sweep. params_base.dt is
/// ignored; the row dt takes its place.
struct SweepConfig {
    BaFilterParams params_base;
    dfa::DfaConfig dfa_config;
};

struct SweepTable {
    SweepConfig config;
    std::vector<SweepRow> rows; ///< strictly increasing dt
};

/// Outcome of select_optimal_dt. converged means some row reached
/// |alpha_noise - 0.5| <= epsilon; otherwise dt falls back to the largest
/// swept value and rationale says why.
struct Selection {
    std::int64_t dt = 0;
    bool converged = false;
    std::optional<dfa::ScalingFit> alpha_noise;
    std::string rationale;
};

DenoiseMetrics snr_from_counts(std::size_t n_clean, std::size_t n_noise);
DenoiseMetrics snr(const Partition& partition);

/// Standard 2x2 tally. Throws LengthMismatchError on differing lengths
/// and DataError when the truth vector contains unlabeled entries.
ConfusionMatrix confusion(const LabelVector& predicted, const std::vector<Label>& truth);

/// classify -> partition -> snr -> DFA on both partitions, once per dt.
/// dt_list must be non-empty and strictly increasing. A partition too
/// degenerate for DFA yields a row without that alpha; if every row ends
/// up without alpha_noise the first such error is rethrown.
SweepTable sweep(const EventStream& stream, const std::vector<std::int64_t>& dt_list,
                 const BaFilterParams& params_base, const dfa::DfaConfig& dfa_config);

/// Same sweep; when the stream carries labels each row also gets a
/// confusion matrix against them.
SweepTable sweep(const LabeledStream& stream, const std::vector<std::int64_t>& dt_list,
                 const BaFilterParams& params_base, const dfa::DfaConfig& dfa_config);

/// Smallest dt whose alpha_noise lies within epsilon of 0.5 (the noise
/// partition looks uncorrelated, and a smaller window costs less); when
/// no row qualifies, the largest dt with converged = false. Requires a
/// non-empty table and epsilon > 0.
Selection select_optimal_dt(const SweepTable& table, double epsilon);

/// Plot data, gnuplot-flavored: '#' headers, space-separated columns.
/// dfa-loglog: log10(n) log10(F) for the non-degenerate points.
void emit_dfa_loglog(std::ostream& out, const dfa::FluctuationCurve& curve);
/// sweep-summary: dt snr_db alpha_noise alpha_clean, one row per dt
/// (nan for absent fits, -inf/nan for flagged snr).
void emit_sweep_summary(std::ostream& out, const SweepTable& table);
/// xyt-cloud: t x y p, uniformly strided down to at most cap events.
/// Requires cap >= 1.
void emit_xyt_cloud(std::ostream& out, const EventStream& stream, std::size_t cap);

/// JSON round-trip of the sweep table (config echo included).
void write_table(std::ostream& out, const SweepTable& table);
SweepTable read_table(std::istream& in);

} // namespace evdfa::analysis
