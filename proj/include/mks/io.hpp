#pragma once

// Stable on-disk formats.
//
// Spectrum CSV (UTF-8):
//   channel,count            header, exactly
//   <integer>,<decimal>      one line per channel, channels 0, 1, 2, ...
// LF or CRLF line endings are accepted on read; LF is written. Counts are
// written in shortest round-trip form. Nothing is repaired on read: any
// deviation is a ParseError carrying the 1-based line number.
//
// Fit report: a JSON object, see FitReportDocument.
//
// Plot data: tab-separated "channel raw smooth [truth]" with one header line.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mks/baseline.hpp"
#include "mks/fitter.hpp"
#include "mks/spectrum.hpp"

namespace mks::io {

inline constexpr std::string_view spectrum_header = "channel,count";
inline constexpr std::string_view fit_report_format = "mks-fit-report/1";
inline constexpr std::string_view bench_report_format = "mks-bench-report/1";
inline constexpr std::string_view compare_report_format = "mks-compare-report/1";

[[nodiscard]] Spectrum read_spectrum(std::istream& in);
void write_spectrum(const Spectrum& spectrum, std::ostream& out);

/// Shortest decimal form that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

struct LevelSummary {
    int level = 0;
    std::size_t knot_count = 0;
    double chi_square = 0.0;

    friend bool operator==(const LevelSummary&, const LevelSummary&) = default;
};

/// JSON schema:
///   {"format": "mks-fit-report/1", "method": str, "basis_order": int,
///    "region": {"start": int, "end": int},
///    "levels": [{"level": int, "knot_count": int, "chi_square": num}, ...],
///    "selected_level": int, "n_points": int,
///    "rms_vs_raw": num (optional), "timing_seconds": num (optional)}
/// Optional members are omitted when absent.
struct FitReportDocument {
    std::string method;
    int basis_order = 2;
    Region region;
    std::vector<LevelSummary> levels;
    int selected_level = 0;
    std::size_t n_points = 0;
    std::optional<double> rms_vs_raw;
    std::optional<double> timing_seconds;

    friend bool operator==(const FitReportDocument&, const FitReportDocument&) = default;
};

[[nodiscard]] FitReportDocument make_fit_report(const FitResult& result, const Region& region);

[[nodiscard]] std::string serialize_fit_report(const FitReportDocument& report);
void write_fit_report(const FitReportDocument& report, std::ostream& out);
/// Throws ParseError (malformed_document) on anything that does not match
/// the schema.
[[nodiscard]] FitReportDocument parse_fit_report(std::string_view text);

/// `smooth` and `truth` must hold one value per spectrum channel.
void write_plot_data(const Spectrum& spectrum, std::span<const double> smooth,
                     std::optional<std::span<const double>> truth, std::ostream& out);

/// Standalone SVG line chart of the same columns.
void write_plot_svg(const Spectrum& spectrum, std::span<const double> smooth,
                    std::optional<std::span<const double>> truth, std::ostream& out);

[[nodiscard]] std::string serialize_bench_report(const BenchReport& report);
/// "knot_count mks_seconds lsq_seconds", tab-separated, failed entries skipped.
void write_bench_tsv(const BenchReport& report, std::ostream& out);

struct CompareSummary {
    FitReportDocument many_knot;
    FitReportDocument bspline_lsq;
    double rms_difference = 0.0;
};

[[nodiscard]] std::string serialize_compare_report(const CompareSummary& summary);

}  // namespace mks::io
