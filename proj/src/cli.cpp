#include "mks/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "mks/baseline.hpp"
#include "mks/errors.hpp"
#include "mks/fitter.hpp"
#include "mks/io.hpp"
#include "mks/synth.hpp"

namespace mks::cli {

namespace {

namespace fs = std::filesystem;

// Files are staged and renamed into place together after the subcommand
// has finished all of its work.
class PendingOutputs {
public:
    void add(std::string path, std::string contents) {
        if (!path.empty()) files_.emplace_back(std::move(path), std::move(contents));
    }

    void commit() {
        std::vector<fs::path> staged;
        try {
            for (const auto& [path, contents] : files_) {
                fs::path tmp = fs::path(path);
                tmp += ".tmp-mks";
                std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
                if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
                staged.push_back(tmp);
                f << contents;
                f.close();
                if (!f) throw IoError("failed writing " + tmp.string());
            }
            for (std::size_t i = 0; i < files_.size(); ++i) {
                std::error_code ec;
                fs::rename(staged[i], files_[i].first, ec);
                if (ec) throw IoError("cannot move output into place at " + files_[i].first + ": " + ec.message());
            }
        } catch (...) {
            for (const auto& tmp : staged) {
                std::error_code ignored;
                fs::remove(tmp, ignored);
            }
            throw;
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double parse_real(std::string_view s, const std::string& what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw UsageError("invalid number in " + what + ": \"" + std::string(s) + "\"");
    }
    return v;
}

std::size_t parse_index(std::string_view s, const std::string& what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw UsageError("invalid integer in " + what + ": \"" + std::string(s) + "\"");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t begin = 0;
    while (true) {
        const auto pos = s.find(sep, begin);
        parts.push_back(s.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin));
        if (pos == std::string_view::npos) break;
        begin = pos + 1;
    }
    return parts;
}

PeakSpec parse_peak(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("peak must be center:amplitude:width, got \"" + text + "\"");
    return {parse_real(parts[0], "--peaks"), parse_real(parts[1], "--peaks"), parse_real(parts[2], "--peaks")};
}

Region parse_region(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) throw UsageError("region must be start:end, got \"" + text + "\"");
    return {parse_index(parts[0], "--region"), parse_index(parts[1], "--region")};
}

std::vector<int> parse_levels(const std::string& text) {
    std::vector<int> levels;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const auto lo = parse_index(std::string_view(text).substr(0, dots), "--levels");
        const auto hi = parse_index(std::string_view(text).substr(dots + 2), "--levels");
        if (hi < lo) throw UsageError("--levels range is empty");
        for (std::size_t l = lo; l <= hi; ++l) levels.push_back(static_cast<int>(l));
    } else {
        for (auto part : split(text, ',')) levels.push_back(static_cast<int>(parse_index(part, "--levels")));
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
        if (levels[i] <= levels[i - 1]) throw UsageError("--levels must be strictly increasing");
    }
    if (levels.empty() || levels.back() > 20) throw UsageError("--levels must name levels in [0, 20]");
    return levels;
}

Spectrum load_spectrum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input " + path);
    return io::read_spectrum(in);
}

std::string spectrum_text(const Spectrum& s) {
    std::ostringstream o;
    io::write_spectrum(s, o);
    return o.str();
}

struct SynthFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> channels;
    std::optional<double> baseline;
    std::vector<std::string> peaks;

    void attach(CLI::App& app) {
        app.add_option("--seed", seed, "PRNG seed");
        app.add_option("--channels", channels, "number of channels");
        app.add_option("--baseline", baseline, "flat baseline in counts");
        app.add_option("--peaks", peaks, "Gaussian peak center:amplitude:width (repeatable)");
    }

    SynthConfig config(std::size_t default_channels) const {
        SynthConfig c;
        c.n_channels = channels.value_or(default_channels);
        if (baseline) c.baseline = *baseline;
        if (!peaks.empty()) {
            c.peaks.clear();
            for (const auto& p : peaks) c.peaks.push_back(parse_peak(p));
        }
        c.seed = *seed;
        c.validate();
        return c;
    }
};

struct BasisFlags {
    int order = 2;
    std::string shifts;

    void attach(CLI::App& app) {
        app.add_option("--order", order, "B-spline degree of the many-knot basis (1..3)")->capture_default_str();
        app.add_option("--shifts", shifts, "comma-separated shifts a_0..a_{k-1}; required for order 3");
    }

    ManyKnotBasis basis() const {
        const BSplineOrder k(order);
        if (shifts.empty()) {
            if (order == 2) return ManyKnotBasis::quadric();
            if (order == 1) return ManyKnotBasis::derive(k, {0.0});
            throw UsageError("--shifts is required for order " + std::to_string(order));
        }
        std::vector<double> a;
        for (auto part : split(shifts, ',')) a.push_back(parse_real(part, "--shifts"));
        return ManyKnotBasis::derive(k, std::move(a));
    }
};

Region region_or_whole(const std::string& flag, const Spectrum& spectrum) {
    const Region r = flag.empty() ? whole(spectrum) : parse_region(flag);
    validate_region(r, spectrum);
    return r;
}

// Smoothed per-channel counts: fitted inside the region, raw outside it,
// and floored at zero so the result is itself a valid spectrum.
Spectrum smoothed_spectrum(const Spectrum& raw, const Region& region, std::span<const double> fitted) {
    std::vector<double> counts(raw.counts().begin(), raw.counts().end());
    for (std::size_t i = 0; i < fitted.size(); ++i) counts[region.start + i] = std::max(0.0, fitted[i]);
    return Spectrum(std::move(counts));
}

std::vector<double> full_length(const Spectrum& raw, const Region& region, std::span<const double> fitted) {
    std::vector<double> v(raw.counts().begin(), raw.counts().end());
    std::copy(fitted.begin(), fitted.end(), v.begin() + static_cast<std::ptrdiff_t>(region.start));
    return v;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct MethodRun {
    io::FitReportDocument report;
    std::vector<double> fitted;  // region channels
};

MethodRun run_many_knot(const Spectrum& spectrum, const Region& region, const ManyKnotBasis& basis,
                        std::optional<int> level, bool early_stop) {
    const auto t0 = std::chrono::steady_clock::now();
    MethodRun run;
    if (level) {
        auto rec = fit_level(spectrum, region, KnotGrid::at_level(region, *level), basis);
        run.fitted = rec.curve.sample_region();
        run.report.method = "many-knot";
        run.report.basis_order = basis.order().degree();
        run.report.region = region;
        run.report.levels = {{rec.level, rec.knot_count, rec.chi_square}};
        run.report.selected_level = rec.level;
        run.report.n_points = region.n_points();
    } else {
        const auto result = fit(spectrum, region, basis, FitOptions{early_stop, nullptr});
        run.fitted = result.selected().curve.sample_region();
        run.report = io::make_fit_report(result, region);
    }
    run.report.timing_seconds = seconds_since(t0);
    run.report.rms_vs_raw = rms_difference(spectrum.counts().subspan(region.start, region.n_points()), run.fitted);
    return run;
}

MethodRun run_lsq(const Spectrum& spectrum, const Region& region, int level) {
    const auto t0 = std::chrono::steady_clock::now();
    auto lsq = lsq_fit(spectrum, KnotGrid::at_level(region, level), region);
    MethodRun run;
    run.report.method = "bspline-lsq";
    run.report.basis_order = 3;
    run.report.region = region;
    run.report.levels = {{level, lsq.grid.size(), lsq.residual_chi_square}};
    run.report.selected_level = level;
    run.report.n_points = region.n_points();
    run.report.timing_seconds = seconds_since(t0);
    run.fitted = std::move(lsq.fitted);
    run.report.rms_vs_raw = rms_difference(spectrum.counts().subspan(region.start, region.n_points()), run.fitted);
    return run;
}

std::string plot_tsv(const Spectrum& s, std::span<const double> smooth, const std::optional<Spectrum>& truth) {
    std::ostringstream o;
    std::optional<std::span<const double>> t;
    if (truth) t = truth->counts();
    io::write_plot_data(s, smooth, t, o);
    return o.str();
}

std::string plot_svg(const Spectrum& s, std::span<const double> smooth, const std::optional<Spectrum>& truth) {
    std::ostringstream o;
    std::optional<std::span<const double>> t;
    if (truth) t = truth->counts();
    io::write_plot_svg(s, smooth, t, o);
    return o.str();
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Many-knot spline smoothing of spectroscopic data", "mks"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic spectrum");
    SynthFlags gen_synth;
    gen_synth.attach(*gen);
    std::string gen_out;
    std::string gen_truth_out;
    gen->add_option("--out", gen_out, "spectrum CSV to write")->required();
    gen->add_option("--truth-out", gen_truth_out, "also write the noiseless curve as CSV");

    // smooth
    auto* smooth = app.add_subcommand("smooth", "smooth a spectrum");
    std::string sm_in;
    std::string sm_out;
    std::string sm_report;
    std::string sm_plot;
    std::string sm_plot_svg;
    std::string sm_truth;
    std::string sm_region;
    std::string sm_method = "many-knot";
    std::optional<int> sm_level;
    bool sm_early_stop = false;
    BasisFlags sm_basis;
    smooth->add_option("--in", sm_in, "input spectrum CSV")->required();
    smooth->add_option("--out", sm_out, "smoothed spectrum CSV")->required();
    smooth->add_option("--report", sm_report, "fit report JSON");
    smooth->add_option("--plot", sm_plot, "plot data TSV");
    smooth->add_option("--plot-svg", sm_plot_svg, "standalone SVG chart");
    smooth->add_option("--truth", sm_truth, "noiseless spectrum CSV added to the plot output");
    smooth->add_option("--region", sm_region, "start:end, inclusive (default: whole spectrum)");
    smooth->add_option("--method", sm_method, "many-knot | bspline-lsq")
        ->check(CLI::IsMember({"many-knot", "bspline-lsq"}));
    smooth->add_option("--level", sm_level, "single grid level instead of the full pipeline");
    smooth->add_flag("--early-stop", sm_early_stop, "stop refining at the first level meeting the criterion");
    sm_basis.attach(*smooth);

    // compare
    auto* compare = app.add_subcommand("compare", "run both smoothers on the same grid");
    std::string cmp_in;
    std::string cmp_out;
    std::string cmp_curves;
    std::string cmp_region;
    std::optional<int> cmp_level;
    compare->add_option("--in", cmp_in, "input spectrum CSV")->required();
    compare->add_option("--out", cmp_out, "joint report JSON")->required();
    compare->add_option("--curves", cmp_curves, "per-channel TSV: channel raw many_knot bspline_lsq");
    compare->add_option("--region", cmp_region, "start:end, inclusive (default: whole spectrum)");
    compare->add_option("--level", cmp_level, "grid level for both methods (default: many-knot selection)");

    // bench
    auto* bench = app.add_subcommand("bench", "time both smoothers across grid levels");
    std::string b_in;
    std::string b_out;
    std::string b_tsv;
    std::string b_region;
    std::string b_levels = "0..6";
    int b_repeats = 5;
    SynthFlags b_synth;
    bench->add_option("--in", b_in, "input spectrum CSV (otherwise synthesized; needs --seed)");
    bench->add_option("--out", b_out, "bench report JSON")->required();
    bench->add_option("--tsv", b_tsv, "knot_count/mks/lsq timing TSV");
    bench->add_option("--region", b_region, "start:end, inclusive (default: whole spectrum)");
    bench->add_option("--levels", b_levels, "a..b or comma list")->capture_default_str();
    bench->add_option("--repeats", b_repeats, "timing repeats per entry (>= 3)")->capture_default_str();
    b_synth.attach(*bench);

    std::vector<std::string> argv_storage{"mks"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return usage;
    }

    try {
        PendingOutputs outputs;

        if (gen->parsed()) {
            if (!gen_synth.seed) throw UsageError("generate requires --seed");
            const auto config = gen_synth.config(SynthConfig{}.n_channels);
            outputs.add(gen_out, spectrum_text(synthesize(config)));
            if (!gen_truth_out.empty()) outputs.add(gen_truth_out, spectrum_text(Spectrum(truth_curve(config))));
            outputs.commit();
            return ok;
        }

        if (smooth->parsed()) {
            const auto basis = sm_basis.basis();
            const Spectrum spectrum = load_spectrum(sm_in);
            std::optional<Spectrum> truth;
            if (!sm_truth.empty()) {
                truth = load_spectrum(sm_truth);
                if (truth->size() != spectrum.size()) throw UsageError("--truth must have as many channels as --in");
            }
            const Region region = region_or_whole(sm_region, spectrum);
            MethodRun result;
            if (sm_method == "many-knot") {
                result = run_many_knot(spectrum, region, basis, sm_level, sm_early_stop);
            } else {
                if (!sm_level) {
                    sm_level = fit(spectrum, region, basis).selected_level;
                }
                result = run_lsq(spectrum, region, *sm_level);
            }
            outputs.add(sm_out, spectrum_text(smoothed_spectrum(spectrum, region, result.fitted)));
            outputs.add(sm_report, io::serialize_fit_report(result.report));
            const auto full = full_length(spectrum, region, result.fitted);
            if (!sm_plot.empty()) outputs.add(sm_plot, plot_tsv(spectrum, full, truth));
            if (!sm_plot_svg.empty()) outputs.add(sm_plot_svg, plot_svg(spectrum, full, truth));
            outputs.commit();
            for (const auto& l : result.report.levels) {
                if (l.level != result.report.selected_level) continue;
                out << result.report.method << ": selected level " << l.level << ", " << l.knot_count
                    << " knots, chi2 " << l.chi_square << "\n";
            }
            return ok;
        }

        if (compare->parsed()) {
            const Spectrum spectrum = load_spectrum(cmp_in);
            const Region region = region_or_whole(cmp_region, spectrum);
            const auto basis = ManyKnotBasis::quadric();
            const int level = cmp_level ? *cmp_level : fit(spectrum, region, basis).selected_level;
            auto mk = run_many_knot(spectrum, region, basis, level, false);
            auto lsq = run_lsq(spectrum, region, level);
            io::CompareSummary summary{mk.report, lsq.report, rms_difference(mk.fitted, lsq.fitted)};
            outputs.add(cmp_out, io::serialize_compare_report(summary));
            if (!cmp_curves.empty()) {
                std::string tsv = "channel\traw\tmany_knot\tbspline_lsq\n";
                for (std::size_t i = 0; i < region.n_points(); ++i) {
                    const std::size_t c = region.start + i;
                    tsv += std::to_string(c) + "\t" + io::format_double(spectrum[c]) + "\t" +
                           io::format_double(mk.fitted[i]) + "\t" + io::format_double(lsq.fitted[i]) + "\n";
                }
                outputs.add(cmp_curves, std::move(tsv));
            }
            outputs.commit();
            out << "level " << level << ": many-knot chi2 " << mk.report.levels.front().chi_square
                << ", bspline-lsq chi2 " << lsq.report.levels.front().chi_square << ", rms difference "
                << summary.rms_difference << "\n";
            return ok;
        }

        if (bench->parsed()) {
            if (b_repeats < min_bench_repeats) throw UsageError("--repeats must be at least 3");
            const auto levels = parse_levels(b_levels);
            Spectrum spectrum = [&] {
                if (!b_in.empty()) return load_spectrum(b_in);
                if (!b_synth.seed) throw UsageError("bench without --in requires --seed");
                return synthesize(b_synth.config(4096));
            }();
            const Region region = region_or_whole(b_region, spectrum);
            const auto report = bench_compare(spectrum, region, levels, b_repeats);
            outputs.add(b_out, io::serialize_bench_report(report));
            if (!b_tsv.empty()) {
                std::ostringstream o;
                io::write_bench_tsv(report, o);
                outputs.add(b_tsv, o.str());
            }
            outputs.commit();
            for (const auto& e : report.entries) {
                out << "level " << e.level << " knots " << e.knot_count;
                if (e.error) {
                    out << " failed: " << *e.error << "\n";
                } else {
                    out << " mks " << e.mks_seconds << " s, lsq " << e.lsq_seconds << " s\n";
                }
            }
            return ok;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return usage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return parse_failure;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return io_failure;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << "\n";
        return usage;
    } catch (const RankDeficient& e) {
        err << "numeric failure: " << e.what() << "\n";
        return numeric_failure;
    } catch (const CannotRefine& e) {
        err << "numeric failure: " << e.what() << "\n";
        return numeric_failure;
    }
    return usage;
}

}  // namespace mks::cli
