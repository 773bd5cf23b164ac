#pragma once

/// CSV and JSON serialization. CSV floats are written with 17 significant
/// digits so values round-trip losslessly.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ddident/analysis.hpp"
#include "ddident/channel.hpp"
#include "ddident/errors.hpp"
#include "ddident/estimation.hpp"
#include "ddident/measures.hpp"

namespace ddident {

using Json = nlohmann::json;

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// FNV-1a 64-bit hash; stable across platforms, used for config manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string(what) + ": malformed number '" + s + "'");
    }
}

/// Reads rows of exactly `width` doubles, skipping an optional header line.
inline std::vector<std::vector<double>> read_rows(std::istream& in, std::size_t width,
                                                  const char* what) {
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (first) {
            first = false;
            bool header = false;
            for (const auto& f : fields) {
                if (!f.empty() && !std::isdigit(static_cast<unsigned char>(f[0])) && f[0] != '-' &&
                    f[0] != '+' && f[0] != '.')
                    header = true;
            }
            if (header) continue;
        }
        if (fields.size() != width)
            throw ValidationError(std::string(what) + ": expected " + std::to_string(width) +
                                  " columns, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(width);
        for (const auto& f : fields) row.push_back(parse_double(f, what));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

// ---- point sets: tau,nu ----

inline void write_points_csv(std::ostream& out, std::span<const Point> points) {
    out << "tau,nu\n";
    for (const Point& p : points) out << format_g17(p.tau) << ',' << format_g17(p.nu) << '\n';
}

inline std::vector<Point> read_points_csv(std::istream& in) {
    std::vector<Point> points;
    for (const auto& row : detail::read_rows(in, 2, "points csv"))
        points.push_back({row[0], row[1]});
    return points;
}

// ---- sampled signals: t,re,im ----

inline void write_signal_csv(std::ostream& out, const SampledSignal& s) {
    out << "t,re,im\n";
    for (std::size_t i = 0; i < s.values.size(); ++i)
        out << format_g17(s.time_at(i)) << ',' << format_g17(s.values[i].real()) << ','
            << format_g17(s.values[i].imag()) << '\n';
}

inline SampledSignal read_signal_csv(std::istream& in) {
    const auto rows = detail::read_rows(in, 3, "signal csv");
    if (rows.size() < 2) throw ValidationError("signal csv: need at least two samples");
    const double t0 = rows.front()[0];
    const double dt = (rows.back()[0] - t0) / static_cast<double>(rows.size() - 1);
    if (!(dt > 0.0)) throw ValidationError("signal csv: non-increasing time column");
    std::vector<Complex> values;
    values.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double expected = t0 + static_cast<double>(i) * dt;
        if (std::abs(rows[i][0] - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
            throw ValidationError("signal csv: time column is not uniformly spaced");
        values.emplace_back(rows[i][1], rows[i][2]);
    }
    return {t0, dt, std::move(values)};
}

// ---- taps: a_re,a_im,tau,nu ----

inline void write_taps_csv(std::ostream& out, std::span<const Tap> taps) {
    out << "a_re,a_im,tau,nu\n";
    for (const Tap& t : taps)
        out << format_g17(t.amplitude.real()) << ',' << format_g17(t.amplitude.imag()) << ','
            << format_g17(t.delay) << ',' << format_g17(t.doppler) << '\n';
}

inline std::vector<Tap> read_taps_csv(std::istream& in) {
    std::vector<Tap> taps;
    for (const auto& row : detail::read_rows(in, 4, "taps csv"))
        taps.push_back({Complex(row[0], row[1]), row[2], row[3]});
    return taps;
}

// ---- JSON emission ----

inline Json to_json(const MatchReport& report) {
    return Json{{"rmse_tau", report.rmse_delay},
                {"rmse_nu", report.rmse_doppler},
                {"rmse_amp", report.rmse_amplitude},
                {"unmatched", report.unmatched()}};
}

inline Json to_json(const EstimationResult& result) {
    Json taps = Json::array();
    for (const Tap& t : result.taps)
        taps.push_back({{"a_re", t.amplitude.real()},
                        {"a_im", t.amplitude.imag()},
                        {"tau", t.delay},
                        {"nu", t.doppler}});
    Json poles = Json::array();
    for (const Complex& z : result.model.poles)
        poles.push_back({{"re", z.real()}, {"im", z.imag()}});
    Json j{{"taps", std::move(taps)},
           {"poles", std::move(poles)},
           {"cond", result.vandermonde_cond},
           {"residual", result.fit_residual}};
    if (result.matching) j["matching"] = to_json(*result.matching);
    if (!result.warnings.empty()) j["warnings"] = result.warnings;
    return j;
}

inline Json to_json(const DensityReport& report) {
    return Json{{"radii", report.radii},
                {"n_minus", report.n_minus},
                {"n_plus", report.n_plus},
                {"lower_estimate", report.lower_estimate},
                {"upper_estimate", report.upper_estimate}};
}

inline Json to_json(const IdentityReport& report) {
    Json samples = Json::array();
    for (const IdentitySample& s : report.samples)
        samples.push_back({{"point", {{"tau", s.point.tau}, {"nu", s.point.nu}}},
                           {"lhs", {{"re", s.lhs.real()}, {"im", s.lhs.imag()}}},
                           {"rhs", {{"re", s.rhs.real()}, {"im", s.rhs.imag()}}},
                           {"abs_err", s.abs_err}});
    return Json{{"samples", std::move(samples)}, {"max_abs_err", report.max_abs_err}};
}

// ---- small file helpers ----

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << content;
}

}  // namespace ddident
