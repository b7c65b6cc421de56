#include "fc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace fc {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

const char* variant_name(FcVariant v) {
    switch (v) {
    case FcVariant::Weights: return "weights";
    case FcVariant::Comp:    return "comp";
    case FcVariant::State:   return "state";
    }
    return "?";
}

const char* schedule_name(ScheduleKind k) {
    switch (k) {
    case ScheduleKind::SingleRepeated: return "single";
    case ScheduleKind::XorCyclic:      return "xor";
    case ScheduleKind::RandomSamples:  return "random";
    }
    return "?";
}

} // namespace

void emit_csv(const EquivalenceReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "iteration,y_bp,y_fc,abs_err,gate1,gate2\n";
    for (const TraceRow& row : report.rows) {
        out << row.iteration << ',' << format_double(row.y_bp) << ','
            << format_double(row.y_fc) << ',' << format_double(row.abs_err) << ','
            << transition_token(row.gate1) << ',' << transition_token(row.gate2) << '\n';
    }
    close_out(out, path);
}

void emit_sweep_csv(const SweepSummary& summary, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "seed,eta,max_abs_err,unsupported_steps,output_identity_worst,node_identity_worst,"
           "annihilation_worst,recurrence_worst,error\n";
    for (const SweepRunResult& r : summary.runs) {
        out << r.seed << ',' << format_double(r.eta) << ','
            << format_double(r.max_abs_err) << ',' << r.unsupported_steps << ','
            << format_double(r.output_identity_worst) << ',' << format_double(r.node_identity_worst) << ','
            << format_double(r.annihilation_worst) << ','
            << format_double(r.recurrence_worst) << ',' << r.error << '\n';
    }
    close_out(out, path);
}

namespace {

// fixed two-decimal pixel coordinates keep the byte stream reproducible
std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

} // namespace

void emit_svg(const EquivalenceReport& report, const std::string& path, bool log_scale) {
    if (report.rows.empty()) throw IoError("emit_svg: empty report: " + path);

    constexpr double width = 960.0, height = 600.0;
    constexpr double left = 90.0, right = 930.0, top = 70.0, bottom = 540.0;
    constexpr double display_floor = 1e-18; // log-axis draw floor only

    const long n = static_cast<long>(report.rows.size());

    double y_min = 0.0, y_max = 0.0;
    if (log_scale) {
        double lo = 0.0, hi = -17.0;
        bool any = false;
        for (const TraceRow& row : report.rows) {
            const double v = std::log10(std::max(row.abs_err, display_floor));
            if (!any) { lo = hi = v; any = true; }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        y_min = std::floor(lo) - 0.5;
        y_max = std::ceil(hi) + 0.5;
    } else {
        for (const TraceRow& row : report.rows) y_max = std::max(y_max, row.abs_err);
        if (y_max == 0.0) y_max = 1.0;
        y_max *= 1.05;
    }

    const auto x_of = [&](long i) {
        if (n == 1) return (left + right) / 2.0;
        return left + (right - left) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    const auto y_of = [&](double err) {
        const double v = log_scale ? std::log10(std::max(err, display_floor)) : err;
        return bottom - (bottom - top) * (v - y_min) / (y_max - y_min);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << px((left + right) / 2) << "\" y=\"32\" font-family=\"monospace\" "
           "font-size=\"18\" text-anchor=\"middle\">variant="
        << variant_name(report.config.variant) << " seed=" << report.config.seed
        << " eta=" << sci(report.config.eta) << " schedule="
        << schedule_name(report.config.schedule) << "</text>\n";
    svg << "<text x=\"" << px((left + right) / 2) << "\" y=\"54\" font-family=\"monospace\" "
           "font-size=\"14\" text-anchor=\"middle\">max |y_bp - y_fc| = "
        << sci(report.max_abs_err) << " over " << n << " iterations</text>\n";

    svg << "<line x1=\"" << px(left) << "\" y1=\"" << px(bottom) << "\" x2=\"" << px(right)
        << "\" y2=\"" << px(bottom) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << px(left) << "\" y1=\"" << px(top) << "\" x2=\"" << px(left)
        << "\" y2=\"" << px(bottom) << "\" stroke=\"black\"/>\n";

    // x ticks at ~8 round positions
    long x_step = std::max(1L, n / 8);
    for (long i = 0; i < n; i += x_step) {
        const double x = x_of(i);
        svg << "<line x1=\"" << px(x) << "\" y1=\"" << px(bottom) << "\" x2=\"" << px(x)
            << "\" y2=\"" << px(bottom + 6) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << px(x) << "\" y=\"" << px(bottom + 24)
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">" << i
            << "</text>\n";
    }
    svg << "<text x=\"" << px((left + right) / 2) << "\" y=\"" << px(bottom + 48)
        << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">"
           "iteration</text>\n";

    // y ticks: decades on log axis, fifths otherwise
    if (log_scale) {
        const int lo = static_cast<int>(std::ceil(y_min));
        const int hi = static_cast<int>(std::floor(y_max));
        const int step = std::max(1, (hi - lo) / 8);
        for (int d = lo; d <= hi; d += step) {
            const double y = bottom - (bottom - top) * (d - y_min) / (y_max - y_min);
            svg << "<line x1=\"" << px(left - 6) << "\" y1=\"" << px(y) << "\" x2=\""
                << px(left) << "\" y2=\"" << px(y) << "\" stroke=\"black\"/>\n";
            svg << "<text x=\"" << px(left - 10) << "\" y=\"" << px(y + 4)
                << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">1e"
                << d << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 5; ++i) {
            const double v = y_max * i / 5.0;
            const double y = y_of(v);
            svg << "<line x1=\"" << px(left - 6) << "\" y1=\"" << px(y) << "\" x2=\""
                << px(left) << "\" y2=\"" << px(y) << "\" stroke=\"black\"/>\n";
            svg << "<text x=\"" << px(left - 10) << "\" y=\"" << px(y + 4)
                << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">"
                << sci(v) << "</text>\n";
        }
    }
    svg << "<text x=\"24\" y=\"" << px((top + bottom) / 2)
        << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 24 "
        << px((top + bottom) / 2) << ")\">|y_bp - y_fc|</text>\n";

    svg << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
    for (long i = 0; i < n; ++i) {
        if (i) svg << ' ';
        svg << px(x_of(i)) << ',' << px(y_of(report.rows[static_cast<std::size_t>(i)].abs_err));
    }
    svg << "\"/>\n</svg>\n";

    std::ofstream out = open_out(path);
    out << svg.str();
    close_out(out, path);
}

} // namespace fc
