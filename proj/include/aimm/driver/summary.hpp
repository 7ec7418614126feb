#pragma once

#include <string>
#include <vector>

namespace aimm {

// Windowed statistics of one tracked channel of a time series.
struct SignalSummary {
    std::string name;
    bool oscillatory = false;
    double mean = 0.0;       // window mean (tail mean when steady)
    double amplitude = 0.0;  // half the peak-to-peak range of the window
    double frequency = 0.0;  // 1 / (2 x mean zero-crossing spacing); 0 when steady
    int zero_crossings = 0;
};

// Analyzes the last 30% (by time) of the samples. The channel counts as
// oscillatory when the demeaned window signal crosses zero at least 10
// times; the frequency then comes from the mean spacing of the linearly
// interpolated crossing times. With fewer crossings the signal is reported
// as steady: mean and half peak-to-peak of the final 10%.
SignalSummary summarize_signal(const std::string& name, const std::vector<double>& t,
                               const std::vector<double>& u);

// key=value lines (<name>_mode/_mean/_amplitude and, for oscillatory
// channels, _frequency), one channel after the other.
std::string format_summary(const std::vector<SignalSummary>& channels);

// Comma-separated table with a header row, as written by the run loop.
struct TimeSeries {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;  // throws Error
    bool has_column(const std::string& name) const;
};

TimeSeries read_timeseries_csv(const std::string& path);

}  // namespace aimm
