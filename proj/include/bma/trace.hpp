#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "bma/calibration.hpp"
#include "bma/errors.hpp"
#include "bma/units.hpp"

/// CSV ingestion and emission. Files use mm/ml; records are SI.
///
/// Trace:        t_s,volume_ml,pressure_pa[,force_n,indent_mm]
/// Calibration:  volume_ml,height_mm,phase
namespace bma::trace {

struct TraceRecord {
    double t = 0.0;       ///< [s]
    double v_fluid = 0.0; ///< [m^3]
    double p = 0.0;       ///< [Pa]
    std::optional<double> F_true;  ///< [N]
    std::optional<double> h2_true; ///< [m]

    bool has_truth() const noexcept { return F_true.has_value() && h2_true.has_value(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos)
            return cells;
        start = comma + 1;
    }
}

inline double number(std::string_view cell, std::size_t line, std::string_view column) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw ParseError(line, "invalid number '" + std::string(cell) + "' in column " + std::string(column));
    return v;
}

inline std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    return out;
}

} // namespace detail

inline std::vector<TraceRecord> read_trace(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line))
        throw ParseError(line_no, "empty trace file");
    const auto header = detail::split(line);
    const bool basic = header.size() == 3;
    const bool truth = header.size() == 5 && header[3] == "force_n" && header[4] == "indent_mm";
    if (!(basic || truth) || header[0] != "t_s" || header[1] != "volume_ml" || header[2] != "pressure_pa")
        throw ParseError(line_no, "expected header t_s,volume_ml,pressure_pa[,force_n,indent_mm]");

    std::vector<TraceRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const auto cells = detail::split(line);
        if (cells.size() != header.size())
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " columns");
        TraceRecord r;
        r.t = detail::number(cells[0], line_no, "t_s");
        const double v_ml = detail::number(cells[1], line_no, "volume_ml");
        if (v_ml < 0.0)
            throw ParseError(line_no, "negative volume");
        r.v_fluid = units::ml(v_ml);
        r.p = detail::number(cells[2], line_no, "pressure_pa");
        if (truth) {
            if (!cells[3].empty())
                r.F_true = detail::number(cells[3], line_no, "force_n");
            if (!cells[4].empty())
                r.h2_true = units::mm(detail::number(cells[4], line_no, "indent_mm"));
        }
        if (!out.empty() && !(r.t > out.back().t))
            throw NonMonotoneTime(line_no, "timestamps must be strictly increasing");
        out.push_back(r);
    }
    return out;
}

inline std::vector<TraceRecord> read_trace(const std::string& path) {
    auto in = detail::open_in(path);
    return read_trace(in);
}

inline void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
    bool truth = false;
    for (const auto& r : records)
        truth = truth || r.F_true || r.h2_true;
    out << "t_s,volume_ml,pressure_pa" << (truth ? ",force_n,indent_mm" : "") << '\n';
    for (const auto& r : records) {
        out << detail::format(r.t) << ',' << detail::format(units::to_ml(r.v_fluid)) << ','
            << detail::format(r.p);
        if (truth) {
            out << ',' << (r.F_true ? detail::format(*r.F_true) : "") << ','
                << (r.h2_true ? detail::format(units::to_mm(*r.h2_true)) : "");
        }
        out << '\n';
    }
}

inline void write_trace(const std::string& path, const std::vector<TraceRecord>& records) {
    auto out = detail::open_out(path);
    write_trace(out, records);
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

inline std::vector<calibration::Sample> read_calibration(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line))
        throw ParseError(line_no, "empty calibration file");
    const auto header = detail::split(line);
    if (header.size() != 3 || header[0] != "volume_ml" || header[1] != "height_mm" || header[2] != "phase")
        throw ParseError(line_no, "expected header volume_ml,height_mm,phase");
    std::vector<calibration::Sample> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const auto cells = detail::split(line);
        if (cells.size() != 3)
            throw ParseError(line_no, "expected 3 columns");
        calibration::Sample s;
        const double v_ml = detail::number(cells[0], line_no, "volume_ml");
        if (v_ml < 0.0)
            throw ParseError(line_no, "negative volume");
        s.volume = units::ml(v_ml);
        s.height = units::mm(detail::number(cells[1], line_no, "height_mm"));
        if (cells[2] == "inflate")
            s.phase = calibration::Phase::inflate;
        else if (cells[2] == "deflate")
            s.phase = calibration::Phase::deflate;
        else
            throw ParseError(line_no, "phase must be 'inflate' or 'deflate'");
        out.push_back(s);
    }
    return out;
}

inline std::vector<calibration::Sample> read_calibration(const std::string& path) {
    auto in = detail::open_in(path);
    return read_calibration(in);
}

} // namespace bma::trace
