#include "mks/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mks/errors.hpp"

namespace mks::io {

using Json = nlohmann::ordered_json;

namespace {

void check_stream(const std::ostream& out) {
    if (!out) throw IoError("write to output stream failed");
}

bool parse_channel(std::string_view s, long long& value) {
    if (s.empty() || s.front() == '-' || s.front() == '+') return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_count(std::string_view s, double& value) {
    if (s.empty() || s.front() == '+') return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, std::chars_format::general);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(value);
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

Spectrum read_spectrum(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line() || line != spectrum_header) {
        throw ParseError(ParseError::Kind::malformed_header, 1,
                         "expected header \"" + std::string(spectrum_header) + "\"");
    }

    std::vector<double> counts;
    while (next_line()) {
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError(ParseError::Kind::malformed_line, line_no, "expected \"<channel>,<count>\"");
        }
        const std::string_view text(line);
        long long channel = 0;
        double count = 0.0;
        if (!parse_channel(text.substr(0, comma), channel)) {
            throw ParseError(ParseError::Kind::malformed_line, line_no, "channel is not a nonnegative integer");
        }
        const auto count_text = text.substr(comma + 1);
        if (!count_text.empty() && count_text.front() == '-') {
            double magnitude = 0.0;
            if (parse_count(count_text.substr(1), magnitude) && magnitude > 0.0) {
                throw ParseError(ParseError::Kind::negative_count, line_no, "count is negative");
            }
        }
        if (!parse_count(count_text, count)) {
            throw ParseError(ParseError::Kind::malformed_line, line_no, "count is not a finite decimal number");
        }
        if (count < 0.0) throw ParseError(ParseError::Kind::negative_count, line_no, "count is negative");
        if (static_cast<std::size_t>(channel) != counts.size()) {
            throw ParseError(ParseError::Kind::non_contiguous_channels, line_no,
                             "expected channel " + std::to_string(counts.size()) + ", got " + std::to_string(channel));
        }
        counts.push_back(count);
    }
    if (in.bad()) throw IoError("read from input stream failed");
    if (counts.size() < Spectrum::min_channels) {
        throw ParseError(ParseError::Kind::too_few_channels, line_no + 1,
                         "a spectrum needs at least 5 channels, got " + std::to_string(counts.size()));
    }
    return Spectrum(std::move(counts));
}

void write_spectrum(const Spectrum& spectrum, std::ostream& out) {
    std::string buffer;
    buffer.reserve(spectrum.size() * 12 + 16);
    buffer.append(spectrum_header).push_back('\n');
    for (std::size_t c = 0; c < spectrum.size(); ++c) {
        buffer.append(std::to_string(c)).push_back(',');
        buffer.append(format_double(spectrum[c])).push_back('\n');
    }
    out << buffer;
    check_stream(out);
}

FitReportDocument make_fit_report(const FitResult& result, const Region& region) {
    FitReportDocument doc;
    doc.method = "many-knot";
    doc.basis_order = result.levels.empty() ? 2 : result.levels.front().curve.basis().order().degree();
    doc.region = region;
    for (const auto& rec : result.levels) doc.levels.push_back({rec.level, rec.knot_count, rec.chi_square});
    doc.selected_level = result.selected_level;
    doc.n_points = result.n_points;
    return doc;
}

namespace {

Json to_json(const FitReportDocument& r) {
    Json j;
    j["format"] = fit_report_format;
    j["method"] = r.method;
    j["basis_order"] = r.basis_order;
    j["region"] = {{"start", r.region.start}, {"end", r.region.end}};
    Json levels = Json::array();
    for (const auto& l : r.levels) {
        levels.push_back({{"level", l.level}, {"knot_count", l.knot_count}, {"chi_square", l.chi_square}});
    }
    j["levels"] = std::move(levels);
    j["selected_level"] = r.selected_level;
    j["n_points"] = r.n_points;
    if (r.rms_vs_raw) j["rms_vs_raw"] = *r.rms_vs_raw;
    if (r.timing_seconds) j["timing_seconds"] = *r.timing_seconds;
    return j;
}

[[noreturn]] void bad_document(const std::string& what) {
    throw ParseError(ParseError::Kind::malformed_document, 0, "fit report: " + what);
}

void expect_keys(const Json& obj, const std::set<std::string>& required, const std::set<std::string>& optional) {
    if (!obj.is_object()) bad_document("expected an object");
    for (const auto& key : required) {
        if (!obj.contains(key)) bad_document("missing member \"" + key + "\"");
    }
    for (const auto& [key, value] : obj.items()) {
        if (!required.contains(key) && !optional.contains(key)) bad_document("unknown member \"" + key + "\"");
    }
}

double get_number(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) bad_document(std::string(key) + " must be a number");
    return v.get<double>();
}

std::size_t get_unsigned(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_unsigned()) bad_document(std::string(key) + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

int get_int(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) bad_document(std::string(key) + " must be an integer");
    return v.get<int>();
}

}  // namespace

std::string serialize_fit_report(const FitReportDocument& report) { return to_json(report).dump(2) + "\n"; }

void write_fit_report(const FitReportDocument& report, std::ostream& out) {
    out << serialize_fit_report(report);
    check_stream(out);
}

FitReportDocument parse_fit_report(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        bad_document(e.what());
    }
    expect_keys(j, {"format", "method", "basis_order", "region", "levels", "selected_level", "n_points"},
                {"rms_vs_raw", "timing_seconds"});
    if (!j["format"].is_string() || j["format"].get<std::string>() != fit_report_format) {
        bad_document("unsupported format tag");
    }
    FitReportDocument r;
    if (!j["method"].is_string()) bad_document("method must be a string");
    r.method = j["method"].get<std::string>();
    r.basis_order = get_int(j, "basis_order");
    expect_keys(j["region"], {"start", "end"}, {});
    r.region.start = get_unsigned(j["region"], "start");
    r.region.end = get_unsigned(j["region"], "end");
    if (!j["levels"].is_array()) bad_document("levels must be an array");
    for (const auto& l : j["levels"]) {
        expect_keys(l, {"level", "knot_count", "chi_square"}, {});
        r.levels.push_back({get_int(l, "level"), get_unsigned(l, "knot_count"), get_number(l, "chi_square")});
    }
    r.selected_level = get_int(j, "selected_level");
    r.n_points = get_unsigned(j, "n_points");
    if (j.contains("rms_vs_raw")) r.rms_vs_raw = get_number(j, "rms_vs_raw");
    if (j.contains("timing_seconds")) r.timing_seconds = get_number(j, "timing_seconds");
    return r;
}

void write_plot_data(const Spectrum& spectrum, std::span<const double> smooth,
                     std::optional<std::span<const double>> truth, std::ostream& out) {
    if (smooth.size() != spectrum.size() || (truth && truth->size() != spectrum.size())) {
        throw InvalidInput("plot columns must have one value per channel");
    }
    std::string buffer = truth ? "channel\traw\tsmooth\ttruth\n" : "channel\traw\tsmooth\n";
    for (std::size_t c = 0; c < spectrum.size(); ++c) {
        buffer.append(std::to_string(c)).push_back('\t');
        buffer.append(format_double(spectrum[c])).push_back('\t');
        buffer.append(format_double(smooth[c]));
        if (truth) buffer.append("\t").append(format_double((*truth)[c]));
        buffer.push_back('\n');
    }
    out << buffer;
    check_stream(out);
}

void write_plot_svg(const Spectrum& spectrum, std::span<const double> smooth,
                    std::optional<std::span<const double>> truth, std::ostream& out) {
    if (smooth.size() != spectrum.size() || (truth && truth->size() != spectrum.size())) {
        throw InvalidInput("plot columns must have one value per channel");
    }
    constexpr double width = 900.0;
    constexpr double height = 500.0;
    constexpr double margin = 40.0;
    double y_max = 1.0;
    for (std::size_t c = 0; c < spectrum.size(); ++c) {
        y_max = std::max({y_max, spectrum[c], smooth[c], truth ? (*truth)[c] : 0.0});
    }
    const double x_scale = (width - 2 * margin) / static_cast<double>(spectrum.size() - 1);
    const double y_scale = (height - 2 * margin) / y_max;

    auto polyline = [&](auto value_at, const char* colour, double stroke) {
        std::ostringstream s;
        s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << stroke << "\" points=\"";
        for (std::size_t c = 0; c < spectrum.size(); ++c) {
            s << margin + static_cast<double>(c) * x_scale << ',' << height - margin - value_at(c) * y_scale << ' ';
        }
        s << "\"/>\n";
        return s.str();
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << margin << "\" y=\"" << margin - 10 << "\" font-size=\"12\">max " << format_double(y_max)
        << " counts, " << spectrum.size() << " channels</text>\n";
    svg << polyline([&](std::size_t c) { return spectrum[c]; }, "#999999", 0.8);
    if (truth) svg << polyline([&](std::size_t c) { return (*truth)[c]; }, "#2a9d2a", 1.0);
    svg << polyline([&](std::size_t c) { return smooth[c]; }, "#c0392b", 1.5);
    svg << "</svg>\n";
    out << svg.str();
    check_stream(out);
}

std::string serialize_bench_report(const BenchReport& report) {
    Json j;
    j["format"] = bench_report_format;
    j["environment"] = report.environment;
    Json entries = Json::array();
    std::vector<double> knots;
    std::vector<double> mks_t;
    std::vector<double> lsq_t;
    for (const auto& e : report.entries) {
        Json item = {{"level", e.level}, {"knot_count", e.knot_count}};
        if (e.error) {
            item["error"] = *e.error;
        } else {
            item["mks_seconds"] = e.mks_seconds;
            item["lsq_seconds"] = e.lsq_seconds;
            item["mks_chi2"] = e.mks_chi2;
            item["lsq_chi2"] = e.lsq_chi2;
            item["mks_sum_squares"] = e.mks_sum_squares;
            item["lsq_sum_squares"] = e.lsq_sum_squares;
            knots.push_back(static_cast<double>(e.knot_count));
            mks_t.push_back(e.mks_seconds);
            lsq_t.push_back(e.lsq_seconds);
        }
        entries.push_back(std::move(item));
    }
    j["entries"] = std::move(entries);
    if (auto s = loglog_slope(knots, mks_t)) j["mks_loglog_slope"] = *s;
    if (auto s = loglog_slope(knots, lsq_t)) j["lsq_loglog_slope"] = *s;
    return j.dump(2) + "\n";
}

void write_bench_tsv(const BenchReport& report, std::ostream& out) {
    std::string buffer = "knot_count\tmks_seconds\tlsq_seconds\n";
    for (const auto& e : report.entries) {
        if (e.error) continue;
        buffer.append(std::to_string(e.knot_count)).push_back('\t');
        buffer.append(format_double(e.mks_seconds)).push_back('\t');
        buffer.append(format_double(e.lsq_seconds)).push_back('\n');
    }
    out << buffer;
    check_stream(out);
}

std::string serialize_compare_report(const CompareSummary& summary) {
    Json j;
    j["format"] = compare_report_format;
    j["many_knot"] = to_json(summary.many_knot);
    j["bspline_lsq"] = to_json(summary.bspline_lsq);
    j["rms_difference"] = summary.rms_difference;
    return j.dump(2) + "\n";
}

}  // namespace mks::io
