#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evdfa/analysis.hpp"
#include "evdfa/ba_filter.hpp"
#include "evdfa/codec.hpp"
#include "evdfa/dfa.hpp"
#include "evdfa/errors.hpp"
#include "evdfa/events.hpp"
#include "evdfa/synth.hpp"

namespace {

using namespace evdfa;

std::pair<double, double> parse_xy(const std::string& text, const std::string& flag) {
    std::istringstream ss(text);
    double a = 0.0;
    double b = 0.0;
    char comma = 0;
    if (!(ss >> a >> comma >> b) || comma != ',' || !(ss >> std::ws).eof()) {
        throw UsageError(flag + " expects two comma-separated numbers, got '" + text + "'");
    }
    return {a, b};
}

std::vector<std::int64_t> parse_dt_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoll(item, &pos));
            if (pos != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw UsageError("--dt-list expects comma-separated integers, got '" + item + "'");
        }
    }
    if (out.empty()) {
        throw UsageError("--dt-list must not be empty");
    }
    return out;
}

dfa::FitRange parse_fit_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw UsageError("--fit expects LO:HI, got '" + text + "'");
    }
    try {
        std::size_t pos = 0;
        dfa::FitRange r;
        r.n_lo = std::stoull(text.substr(0, colon), &pos);
        if (pos != colon) {
            throw std::invalid_argument(text);
        }
        r.n_hi = std::stoull(text.substr(colon + 1), &pos);
        if (pos != text.size() - colon - 1) {
            throw std::invalid_argument(text);
        }
        return r;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception&) {
        throw UsageError("--fit expects LO:HI integers, got '" + text + "'");
    }
}

std::int8_t parse_polarity(const std::string& text) {
    if (text == "1" || text == "+1") {
        return 1;
    }
    if (text == "-1") {
        return -1;
    }
    throw UsageError("--polarity expects +1 or -1, got '" + text + "'");
}

TemporalMode parse_mode(const std::string& text) {
    return text == "causal" ? TemporalMode::causal : TemporalMode::symmetric;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open " + path + " for writing");
    }
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return in;
}

struct FilterFlags {
    int dsx = 1;
    int dsy = 1;
    int rho_min = 1;
    std::string mode = "symmetric";

    void attach(CLI::App* cmd) {
        cmd->add_option("--dsx", dsx, "Spatial half-window in x (pixels)")
            ->capture_default_str();
        cmd->add_option("--dsy", dsy, "Spatial half-window in y (pixels)")
            ->capture_default_str();
        cmd->add_option("--rho-min", rho_min, "Minimum correlated-neighbor count")
            ->capture_default_str();
        cmd->add_option("--mode", mode, "Temporal window: symmetric or causal")
            ->check(CLI::IsMember({"symmetric", "causal"}))
            ->capture_default_str();
    }
    BaFilterParams params(std::int64_t dt = 0) const {
        BaFilterParams p;
        p.dsx = dsx;
        p.dsy = dsy;
        p.dt = dt;
        p.rho_min = rho_min;
        p.mode = parse_mode(mode);
        return p;
    }
};

struct DfaFlags {
    double q = dfa::kDefaultScheduleRatio;
    std::size_t m1 = 4;
    double max_fraction = 0.25;
    int order = 1;
    std::string fit;

    void attach(CLI::App* cmd) {
        cmd->add_option("--q", q, "Segment-schedule ratio (> 1)")->capture_default_str();
        cmd->add_option("--m1", m1, "Smallest segment length")->capture_default_str();
        cmd->add_option("--max-fraction", max_fraction,
                        "Largest segment as a fraction of the series length")
            ->capture_default_str();
        cmd->add_option("--order", order, "Detrending polynomial order (1-3)")
            ->capture_default_str();
        cmd->add_option("--fit", fit, "Restrict the scaling fit to segment sizes LO:HI");
    }
    dfa::DfaConfig config() const {
        dfa::DfaConfig c;
        c.q = q;
        c.m1 = m1;
        c.max_fraction = max_fraction;
        c.detrend_order = order;
        if (!fit.empty()) {
            c.fit_range = parse_fit_range(fit);
        }
        return c;
    }
};

LabeledStream load_maybe_polarity(const std::string& path, const std::string& polarity) {
    LabeledStream s = load_stream_file(path);
    if (!polarity.empty()) {
        s = select_polarity(s, parse_polarity(polarity));
    }
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Background-activity filtering and interval-scaling analysis "
                 "for event-camera streams"};
    app.require_subcommand(1);

    // synth -------------------------------------------------------------
    struct {
        unsigned width = 128, height = 128;
        double noise_rate = 5000.0, duration = 10.0;
        std::string object = "bar";
        unsigned extent = 80;
        std::string start = "10,24", velocity = "50,0";
        double object_rate = 20000.0, object_duration = 2.0;
        std::uint64_t seed = 42;
        std::string out;
    } sy;
    auto* synth_cmd =
        app.add_subcommand("synth", "Generate a labeled synthetic stream (noise + object)");
    synth_cmd->add_option("--width", sy.width, "Sensor width in pixels")->capture_default_str();
    synth_cmd->add_option("--height", sy.height, "Sensor height in pixels")
        ->capture_default_str();
    synth_cmd->add_option("--noise-rate", sy.noise_rate, "Background rate, events per second")
        ->capture_default_str();
    synth_cmd->add_option("--duration", sy.duration, "Recording length in seconds")
        ->capture_default_str();
    synth_cmd->add_option("--object", sy.object, "Object shape: dot, bar, or none")
        ->check(CLI::IsMember({"dot", "bar", "none"}))
        ->capture_default_str();
    synth_cmd->add_option("--extent", sy.extent, "Object size in pixels")
        ->capture_default_str();
    synth_cmd->add_option("--start", sy.start, "Object start position X,Y")
        ->capture_default_str();
    synth_cmd->add_option("--velocity", sy.velocity, "Object velocity VX,VY in pixels/second")
        ->capture_default_str();
    synth_cmd->add_option("--object-rate", sy.object_rate, "Object rate, events per second")
        ->capture_default_str();
    synth_cmd
        ->add_option("--object-duration", sy.object_duration,
                     "Seconds the object stays active")
        ->capture_default_str();
    synth_cmd->add_option("--seed", sy.seed, "RNG seed")->capture_default_str();
    synth_cmd->add_option("-o,--output", sy.out, "Output stream (.csv or .evs)")->required();
    synth_cmd->callback([&] {
        if (sy.width == 0 || sy.width > 0xFFFF || sy.height == 0 || sy.height > 0xFFFF) {
            throw UsageError("sensor dimensions must be in [1, 65535]");
        }
        const SensorGeometry geometry{static_cast<std::uint16_t>(sy.width),
                                      static_cast<std::uint16_t>(sy.height)};
        synth::NoiseModel noise;
        noise.geometry = geometry;
        noise.rate = sy.noise_rate;
        noise.seed = sy.seed;
        LabeledStream scene = synth::gen_poisson_noise(noise, sy.duration);
        if (sy.object != "none") {
            synth::ObjectModel object;
            object.geometry = geometry;
            object.shape = sy.object == "dot" ? synth::ObjectShape::dot : synth::ObjectShape::bar;
            object.extent = static_cast<std::uint16_t>(sy.extent);
            const auto [sx, sy_] = parse_xy(sy.start, "--start");
            const auto [vx, vy] = parse_xy(sy.velocity, "--velocity");
            object.trajectory = {sx, sy_, vx, vy};
            object.event_rate = sy.object_rate;
            object.duration_s = sy.object_duration;
            object.seed = sy.seed + 1;
            scene = synth::merge(scene, synth::gen_moving_object(object));
        }
        save_stream_file(sy.out, scene);
        std::cout << "wrote " << scene.stream.size() << " events to " << sy.out << '\n';
    });

    // hotpixel ----------------------------------------------------------
    struct {
        double factor = 10.0;
        std::string in, out;
    } hp;
    auto* hotpixel_cmd =
        app.add_subcommand("hotpixel", "Drop pixels firing far above the typical rate");
    hotpixel_cmd->add_option("--factor", hp.factor, "Threshold factor over the median count")
        ->capture_default_str();
    hotpixel_cmd->add_option("-i,--input", hp.in, "Input stream")->required();
    hotpixel_cmd->add_option("-o,--output", hp.out, "Output stream")->required();
    hotpixel_cmd->callback([&] {
        const LabeledStream s = load_stream_file(hp.in);
        const auto hot = detect_hot_pixels(pixel_histogram(s.stream), hp.factor);
        const LabeledStream kept = remove_pixels(s, hot);
        save_stream_file(hp.out, kept);
        std::cout << "removed " << hot.size() << " hot pixels ("
                  << s.stream.size() - kept.stream.size() << " events), kept "
                  << kept.stream.size() << '\n';
    });

    // filter --------------------------------------------------------------
    struct {
        std::int64_t dt = 0;
        FilterFlags flags;
        std::string polarity;
        std::string in, clean_out, noise_out;
    } fl;
    auto* filter_cmd =
        app.add_subcommand("filter", "Split a stream into clean and noise partitions");
    filter_cmd->add_option("--dt", fl.dt, "Temporal window in microseconds")->required();
    fl.flags.attach(filter_cmd);
    filter_cmd->add_option("--polarity", fl.polarity, "Keep only +1 or -1 events first");
    filter_cmd->add_option("-i,--input", fl.in, "Input stream")->required();
    filter_cmd->add_option("--clean-out", fl.clean_out, "Output for the clean partition");
    filter_cmd->add_option("--noise-out", fl.noise_out, "Output for the noise partition");
    filter_cmd->callback([&] {
        if (fl.clean_out.empty() && fl.noise_out.empty()) {
            throw UsageError("give at least one of --clean-out / --noise-out");
        }
        const LabeledStream s = load_maybe_polarity(fl.in, fl.polarity);
        const BaFilterParams params = fl.flags.params(fl.dt);
        const LabelVector labels = classify(s.stream, params);
        const LabeledPartition part = partition(s, labels, params);
        if (!fl.clean_out.empty()) {
            save_stream_file(fl.clean_out, part.clean);
        }
        if (!fl.noise_out.empty()) {
            save_stream_file(fl.noise_out, part.noise);
        }
        const auto metrics =
            analysis::snr_from_counts(part.clean.stream.size(), part.noise.stream.size());
        std::cout << "clean " << metrics.n_clean << "  noise " << metrics.n_noise;
        if (metrics.flag == analysis::SnrFlag::ok) {
            std::cout << "  snr_db " << metrics.snr_db;
        }
        std::cout << '\n';
    });

    // dfa -----------------------------------------------------------------
    struct {
        DfaFlags flags;
        std::string polarity;
        std::string in, out;
    } df;
    auto* dfa_cmd =
        app.add_subcommand("dfa", "Scaling exponent of the inter-event interval series");
    df.flags.attach(dfa_cmd);
    dfa_cmd->add_option("--polarity", df.polarity, "Keep only +1 or -1 events first");
    dfa_cmd->add_option("-i,--input", df.in, "Input stream")->required();
    dfa_cmd->add_option("-o,--output", df.out, "Report file (JSON); stdout when omitted");
    dfa_cmd->callback([&] {
        const LabeledStream s = load_maybe_polarity(df.in, df.polarity);
        const dfa::DfaConfig config = df.flags.config();
        const dfa::DfaReport report{dfa::dfa_exponent(s.stream, config), config};
        if (df.out.empty()) {
            dfa::write_report(std::cout, report);
        } else {
            auto out = open_output(df.out);
            dfa::write_report(out, report);
            std::cout << "alpha = " << report.result.fit.alpha << " over n in ["
                      << report.result.fit.fit_range.n_lo << ", "
                      << report.result.fit.fit_range.n_hi << "]\n";
        }
    });

    // sweep -----------------------------------------------------------------
    struct {
        std::string dt_list = "1000,2000,4000,8000,16000";
        FilterFlags filter_flags;
        DfaFlags dfa_flags;
        std::string in, out;
    } sw;
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Run filter + DFA across a list of dt values");
    sweep_cmd->add_option("--dt-list", sw.dt_list, "Comma-separated dt values, increasing")
        ->capture_default_str();
    sw.filter_flags.attach(sweep_cmd);
    sw.dfa_flags.attach(sweep_cmd);
    sweep_cmd->add_option("-i,--input", sw.in, "Input stream")->required();
    sweep_cmd->add_option("-o,--output", sw.out, "Sweep table (JSON)")->required();
    sweep_cmd->callback([&] {
        const LabeledStream s = load_stream_file(sw.in);
        const auto table = analysis::sweep(s, parse_dt_list(sw.dt_list),
                                           sw.filter_flags.params(), sw.dfa_flags.config());
        auto out = open_output(sw.out);
        analysis::write_table(out, table);
        analysis::emit_sweep_summary(std::cout, table);
    });

    // select ----------------------------------------------------------------
    struct {
        double epsilon = 0.02;
        std::string in;
    } se;
    auto* select_cmd =
        app.add_subcommand("select", "Pick the smallest dt whose noise looks uncorrelated");
    select_cmd->add_option("--epsilon", se.epsilon, "Tolerance on |alpha_noise - 0.5|")
        ->capture_default_str();
    select_cmd->add_option("-i,--input", se.in, "Sweep table (JSON)")->required();
    select_cmd->callback([&] {
        auto in = open_input(se.in);
        const auto sel = analysis::select_optimal_dt(analysis::read_table(in), se.epsilon);
        nlohmann::json j{{"dt", sel.dt},
                         {"converged", sel.converged},
                         {"rationale", sel.rationale}};
        j["alpha_noise"] =
            sel.alpha_noise ? nlohmann::json(sel.alpha_noise->alpha) : nlohmann::json(nullptr);
        std::cout << j.dump(2) << '\n';
    });

    // plot ------------------------------------------------------------------
    struct {
        std::string kind;
        std::size_t cap = 10000;
        std::string in, out;
    } pl;
    auto* plot_cmd = app.add_subcommand("plot", "Emit plain-text plot data");
    plot_cmd->add_option("--kind", pl.kind, "dfa-loglog, sweep-summary, or xyt-cloud")
        ->required()
        ->check(CLI::IsMember({"dfa-loglog", "sweep-summary", "xyt-cloud"}));
    plot_cmd->add_option("--cap", pl.cap, "Max points for xyt-cloud")->capture_default_str();
    plot_cmd->add_option("-i,--input", pl.in, "Input artifact")->required();
    plot_cmd->add_option("-o,--output", pl.out, "Output file; stdout when omitted");
    plot_cmd->callback([&] {
        std::ofstream file;
        std::ostream* out = &std::cout;
        if (!pl.out.empty()) {
            file = open_output(pl.out);
            out = &file;
        }
        if (pl.kind == "dfa-loglog") {
            auto in = open_input(pl.in);
            analysis::emit_dfa_loglog(*out, dfa::read_report(in).result.curve);
        } else if (pl.kind == "sweep-summary") {
            auto in = open_input(pl.in);
            analysis::emit_sweep_summary(*out, analysis::read_table(in));
        } else {
            analysis::emit_xyt_cloud(*out, load_stream_file(pl.in).stream, pl.cap);
        }
    });

    // window ------------------------------------------------------------
    struct {
        std::int64_t start = 0, duration = 0;
        std::string in, out;
    } wd;
    auto* window_cmd =
        app.add_subcommand("window", "Keep events with start <= t < start + duration");
    window_cmd->add_option("--start", wd.start, "Window start in microseconds")->required();
    window_cmd->add_option("--duration", wd.duration, "Window length in microseconds")
        ->required();
    window_cmd->add_option("-i,--input", wd.in, "Input stream")->required();
    window_cmd->add_option("-o,--output", wd.out, "Output stream")->required();
    window_cmd->callback([&] {
        const LabeledStream s = load_stream_file(wd.in);
        const LabeledStream cut = slice_window(s, TimeWindow{wd.start, wd.duration});
        save_stream_file(wd.out, cut);
        std::cout << "kept " << cut.stream.size() << " of " << s.stream.size() << " events\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DegenerateError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
