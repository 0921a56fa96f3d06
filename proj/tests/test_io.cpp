#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mks/errors.hpp"
#include "mks/io.hpp"

using namespace mks;

namespace {

Spectrum parse(const std::string& text) {
    std::istringstream in(text);
    return io::read_spectrum(in);
}

ParseError::Kind parse_error_kind(const std::string& text, std::size_t* line = nullptr) {
    try {
        (void)parse(text);
    } catch (const ParseError& e) {
        if (line != nullptr) *line = e.line();
        return e.kind();
    }
    FAIL("expected a parse error");
    return ParseError::Kind::malformed_document;
}

}  // namespace

TEST_CASE("read_spectrum") {
    const auto s = parse("channel,count\n0,5\n1,7\n2,6\n3,5\n4,4\n");
    CHECK(s == Spectrum({5, 7, 6, 5, 4}));
    CHECK(parse("channel,count\r\n0,5\r\n1,7\r\n2,6\r\n3,5\r\n4,4.25\r\n") == Spectrum({5, 7, 6, 5, 4.25}));
    CHECK(parse("channel,count\n0,5\n1,7\n2,6\n3,5\n4,4") == Spectrum({5, 7, 6, 5, 4}));

    std::size_t line = 0;
    CHECK(parse_error_kind("channel,count\n0,5\n2,7\n", &line) == ParseError::Kind::non_contiguous_channels);
    CHECK(line == 3);
    CHECK(parse_error_kind("channel,count\n0,-1\n1,2\n2,2\n3,2\n4,2\n", &line) == ParseError::Kind::negative_count);
    CHECK(line == 2);
    CHECK(parse_error_kind("chan,count\n0,1\n") == ParseError::Kind::malformed_header);
    CHECK(parse_error_kind("") == ParseError::Kind::malformed_header);
    CHECK(parse_error_kind("channel,count\n0,1\n1,x\n", &line) == ParseError::Kind::malformed_line);
    CHECK(line == 3);
    CHECK(parse_error_kind("channel,count\n0,1\n\n") == ParseError::Kind::malformed_line);
    CHECK(parse_error_kind("channel,count\n0,1,2\n") == ParseError::Kind::malformed_line);
    CHECK(parse_error_kind("channel,count\n0, 1\n") == ParseError::Kind::malformed_line);
    CHECK(parse_error_kind("channel,count\n1,1\n") == ParseError::Kind::non_contiguous_channels);
    CHECK(parse_error_kind("channel,count\n0,nan\n") == ParseError::Kind::malformed_line);
    CHECK(parse_error_kind("channel,count\n0,1\n1,1\n") == ParseError::Kind::too_few_channels);
    CHECK(parse_error_kind("channel,count\n# comment\n") == ParseError::Kind::malformed_line);
}

TEST_CASE("write_spectrum") {
    std::ostringstream out;
    io::write_spectrum(Spectrum({1, 2.5, 0.1, 3e-7, 12345678.875}), out);
    CHECK(out.str() == "channel,count\n0,1\n1,2.5\n2,0.1\n3,3e-07\n4,12345678.875\n");
}

TEST_CASE("spectrum CSV round-trips randomized spectra") {
    std::mt19937_64 rng(123);
    std::uniform_int_distribution<int> len(5, 300);
    std::uniform_real_distribution<double> mag(-3.0, 7.0);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> counts(static_cast<std::size_t>(len(rng)));
        for (double& c : counts) {
            switch (rng() % 3) {
                case 0: c = std::round(std::pow(10.0, mag(rng))); break;
                case 1: c = std::pow(10.0, mag(rng)); break;
                default: c = 0.0;
            }
        }
        const Spectrum s(counts);
        std::stringstream io_buf;
        io::write_spectrum(s, io_buf);
        CHECK(io::read_spectrum(io_buf) == s);
    }
}

TEST_CASE("fit report documents") {
    io::FitReportDocument doc;
    doc.method = "many-knot";
    doc.basis_order = 2;
    doc.region = {3, 500};
    doc.levels = {{0, 5, 1234.5678901234567}};
    doc.selected_level = 0;
    doc.n_points = 498;

    SUBCASE("minimal round trip") {
        CHECK(io::parse_fit_report(io::serialize_fit_report(doc)) == doc);
    }
    SUBCASE("absent optionals are omitted") {
        const auto text = io::serialize_fit_report(doc);
        CHECK(text.find("rms_vs_raw") == std::string::npos);
        CHECK(text.find("timing_seconds") == std::string::npos);
        CHECK(text.find("null") == std::string::npos);
        doc.rms_vs_raw = 2.5;
        doc.timing_seconds = 0.001;
        CHECK(io::parse_fit_report(io::serialize_fit_report(doc)) == doc);
    }
    SUBCASE("chi-square keeps at least 12 significant digits") {
        const auto text = io::serialize_fit_report(doc);
        CHECK(text.find("1234.5678901234") != std::string::npos);
    }
    SUBCASE("malformed documents are rejected") {
        auto expect_reject = [](const std::string& text) {
            CHECK_THROWS_AS((void)io::parse_fit_report(text), ParseError);
        };
        expect_reject("{");
        expect_reject("[]");
        auto text = io::serialize_fit_report(doc);
        expect_reject(text.replace(text.find("mks-fit-report/1"), 16, "mks-fit-report/9"));
        text = io::serialize_fit_report(doc);
        expect_reject(text.replace(text.find("\"n_points\""), 10, "\"n_pointz\""));
        text = io::serialize_fit_report(doc);
        expect_reject(text.replace(text.find("498"), 3, "\"498\""));
    }
    SUBCASE("randomized round trips") {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> u(0.0, 1e6);
        for (int trial = 0; trial < 500; ++trial) {
            io::FitReportDocument d;
            d.method = trial % 2 == 0 ? "many-knot" : "bspline-lsq";
            d.basis_order = 1 + static_cast<int>(rng() % 3);
            d.region = {rng() % 100, 100 + rng() % 5000};
            const std::size_t n_levels = 1 + rng() % 10;
            for (std::size_t l = 0; l < n_levels; ++l) {
                d.levels.push_back({static_cast<int>(l), (std::size_t{4} << l) + 1, u(rng) / (1.0 + u(rng))});
            }
            d.selected_level = static_cast<int>(rng() % n_levels);
            d.n_points = d.region.n_points();
            if (rng() % 2 == 0) d.rms_vs_raw = u(rng);
            if (rng() % 2 == 0) d.timing_seconds = u(rng) * 1e-9;
            CHECK(io::parse_fit_report(io::serialize_fit_report(d)) == d);
        }
    }
}

TEST_CASE("plot data") {
    const Spectrum s({1, 2, 3, 4, 5});
    const std::vector<double> smooth{1.5, 2, 3, 4, 4.5};
    const std::vector<double> truth{1, 2, 3, 4, 5};

    std::ostringstream a;
    io::write_plot_data(s, smooth, std::nullopt, a);
    CHECK(a.str() == "channel\traw\tsmooth\n0\t1\t1.5\n1\t2\t2\n2\t3\t3\n3\t4\t4\n4\t5\t4.5\n");

    std::ostringstream b;
    io::write_plot_data(s, smooth, std::span<const double>(truth), b);
    std::istringstream lines(b.str());
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        ++n;
        CHECK(std::count(line.begin(), line.end(), '\t') == 3);
    }
    CHECK(n == 6);

    const std::vector<double> short_smooth{1, 2};
    std::ostringstream c;
    CHECK_THROWS_AS(io::write_plot_data(s, short_smooth, std::nullopt, c), InvalidInput);

    std::ostringstream svg;
    io::write_plot_svg(s, smooth, std::span<const double>(truth), svg);
    CHECK(svg.str().rfind("<svg", 0) == 0);
    CHECK(svg.str().find("</svg>") != std::string::npos);
}

TEST_CASE("bench report serialization") {
    BenchReport r;
    r.environment = "test";
    r.entries.push_back({0, 5, 1e-4, 2e-4, 10.0, 9.0, 100.0, 90.0, std::nullopt});
    r.entries.push_back({1, 9, 0, 0, 0, 0, 0, 0, std::string("rank deficient")});
    const auto text = io::serialize_bench_report(r);
    CHECK(text.find("\"format\": \"mks-bench-report/1\"") != std::string::npos);
    CHECK(text.find("rank deficient") != std::string::npos);
    std::ostringstream tsv;
    io::write_bench_tsv(r, tsv);
    CHECK(tsv.str() == "knot_count\tmks_seconds\tlsq_seconds\n5\t1e-04\t2e-04\n");
}

TEST_CASE("write failures surface as IoError") {
    std::ostringstream out;
    out.setstate(std::ios::badbit);
    CHECK_THROWS_AS(io::write_spectrum(Spectrum({1, 2, 3, 4, 5}), out), IoError);
}
