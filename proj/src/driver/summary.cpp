#include "aimm/driver/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aimm/core/errors.hpp"

namespace aimm {

namespace {

// mean and half peak-to-peak over [i0, end)
void window_stats(const std::vector<double>& u, std::size_t i0, double& mean,
                  double& amp) {
    double sum = 0.0, lo = u[i0], hi = u[i0];
    for (std::size_t i = i0; i < u.size(); ++i) {
        sum += u[i];
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
    }
    mean = sum / double(u.size() - i0);
    amp = 0.5 * (hi - lo);
}

std::size_t first_index_at(const std::vector<double>& t, double t0) {
    std::size_t i = 0;
    while (i + 1 < t.size() && t[i] < t0) ++i;
    return i;
}

}  // namespace

SignalSummary summarize_signal(const std::string& name, const std::vector<double>& t,
                               const std::vector<double>& u) {
    if (t.size() != u.size()) throw Error("summarize_signal: t/u size mismatch");
    if (t.empty()) throw Error("summarize_signal: empty signal");

    SignalSummary s;
    s.name = name;
    if (t.size() == 1) {
        s.mean = u[0];
        return s;
    }

    double span = t.back() - t.front();
    std::size_t w0 = first_index_at(t, t.back() - 0.3 * span);
    double mean, amp;
    window_stats(u, w0, mean, amp);

    // zero crossings of the demeaned window signal, linearly interpolated
    // between the bracketing nonzero samples (exact zeros carry no sign)
    std::vector<double> tc;
    std::size_t anchor = 0;
    bool have_anchor = false;
    for (std::size_t i = w0; i < t.size(); ++i) {
        double d = u[i] - mean;
        if (d == 0.0) continue;
        if (have_anchor) {
            double a = u[anchor] - mean;
            if (a * d < 0.0)
                tc.push_back(t[anchor] + (t[i] - t[anchor]) * a / (a - d));
        }
        anchor = i;
        have_anchor = true;
    }
    s.zero_crossings = int(tc.size());

    if (tc.size() >= 10) {
        s.oscillatory = true;
        s.mean = mean;
        s.amplitude = amp;
        s.frequency = double(tc.size() - 1) / (2.0 * (tc.back() - tc.front()));
    } else {
        std::size_t q0 = first_index_at(t, t.back() - 0.1 * span);
        window_stats(u, q0, s.mean, s.amplitude);
    }
    return s;
}

std::string format_summary(const std::vector<SignalSummary>& channels) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return std::string(buf);
    };
    for (const SignalSummary& c : channels) {
        out << c.name << "_mode=" << (c.oscillatory ? "oscillatory" : "steady") << "\n";
        out << c.name << "_mean=" << num(c.mean) << "\n";
        out << c.name << "_amplitude=" << num(c.amplitude) << "\n";
        if (c.oscillatory) out << c.name << "_frequency=" << num(c.frequency) << "\n";
    }
    return out.str();
}

bool TimeSeries::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::vector<double> TimeSeries::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error("timeseries: no column '" + name + "'");
    std::size_t j = std::size_t(it - columns.begin());
    std::vector<double> col;
    col.reserve(rows.size());
    for (const auto& row : rows) col.push_back(row[j]);
    return col;
}

TimeSeries read_timeseries_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");

    TimeSeries ts;
    std::string line;
    if (!std::getline(in, line)) throw Error("'" + path + "': empty file");
    std::stringstream head(line);
    std::string cell;
    while (std::getline(head, cell, ',')) ts.columns.push_back(cell);
    if (ts.columns.empty()) throw Error("'" + path + "': no header columns");

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream row(line);
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error("'" + path + "' line " + std::to_string(lineno) +
                            ": bad number '" + cell + "'");
            }
        }
        if (vals.size() != ts.columns.size())
            throw Error("'" + path + "' line " + std::to_string(lineno) +
                        ": expected " + std::to_string(ts.columns.size()) + " cells");
        ts.rows.push_back(std::move(vals));
    }
    return ts;
}

}  // namespace aimm
