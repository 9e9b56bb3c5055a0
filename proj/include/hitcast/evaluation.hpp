#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hitcast/dataset.hpp"
#include "hitcast/errors.hpp"

namespace hitcast {

inline double mae(const std::vector<double>& preds, const std::vector<double>& targets) {
    if (preds.empty() || preds.size() != targets.size())
        throw InvalidInputError("mae needs two equal-length non-empty vectors");
    double sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) sum += std::abs(preds[i] - targets[i]);
    return sum / static_cast<double>(preds.size());
}

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
};

/// Thresholded-classification view of the regression output. Metrics with a
/// zero denominator are absent rather than 0, so they can never drag down an
/// average unnoticed.
struct ThresholdMetrics {
    double threshold = 0.0;
    Confusion confusion;
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

inline ThresholdMetrics metrics_from_confusion(const Confusion& c, double threshold = 0.0) {
    if (c.total() == 0) throw InvalidInputError("empty confusion matrix");
    ThresholdMetrics m;
    m.threshold = threshold;
    m.confusion = c;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0)
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0)
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    return m;
}

/// Labels both sides by the same popularity cutoff: a track is "popular" when
/// its score reaches the threshold, and the model claims popularity when its
/// prediction does.
inline ThresholdMetrics threshold_metrics(const std::vector<double>& preds,
                                          const std::vector<double>& targets,
                                          double threshold) {
    if (preds.empty() || preds.size() != targets.size())
        throw InvalidInputError("threshold_metrics needs two equal-length non-empty vectors");
    if (!(threshold > 0.0 && threshold < 100.0))
        throw InvalidInputError("threshold must be inside (0, 100)");
    Confusion c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool actual = targets[i] >= threshold;
        const bool predicted = preds[i] >= threshold;
        if (actual && predicted) ++c.tp;
        else if (!actual && predicted) ++c.fp;
        else if (actual && !predicted) ++c.fn;
        else ++c.tn;
    }
    return metrics_from_confusion(c, threshold);
}

inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InvalidInputError("pearson needs two equal-length vectors of at least 2 values");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UndefinedCorrelationError("correlation of a constant sequence is undefined");
    return sxy / std::sqrt(sxx * syy);
}

struct CorrelationEntry {
    std::string feature;
    std::optional<double> r;  // absent: feature (or popularity) was constant
};

/// Feature-vs-popularity correlations, weakest first; skipped features trail
/// the ranked ones so a report never silently loses a column.
struct CorrelationTable {
    std::vector<CorrelationEntry> entries;
};

inline CorrelationTable correlation_report(const std::vector<TrackRecord>& records) {
    if (records.size() < 2)
        throw InvalidInputError("correlation report needs at least 2 records");
    std::vector<double> pop;
    pop.reserve(records.size());
    for (const auto& r : records) pop.push_back(r.popularity);

    std::vector<CorrelationEntry> ranked;
    std::vector<CorrelationEntry> skipped;
    for (const auto& name : model_feature_names()) {
        std::vector<double> xs;
        xs.reserve(records.size());
        for (const auto& r : records) xs.push_back(model_feature(r, name));
        try {
            ranked.push_back({name, pearson(xs, pop)});
        } catch (const UndefinedCorrelationError&) {
            skipped.push_back({name, std::nullopt});
        }
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const CorrelationEntry& a, const CorrelationEntry& b) { return *a.r < *b.r; });
    CorrelationTable table;
    table.entries = std::move(ranked);
    table.entries.insert(table.entries.end(), skipped.begin(), skipped.end());
    return table;
}

struct ErrorHistogram {
    std::vector<double> edges;       // bin_count + 1 ascending
    std::vector<std::size_t> counts; // per bin, last bin right-closed
    double mean_error = 0.0;         // signed mean of pred - actual
};

inline ErrorHistogram error_histogram(const std::vector<double>& preds,
                                      const std::vector<double>& targets,
                                      std::size_t bin_count) {
    if (preds.empty() || preds.size() != targets.size())
        throw InvalidInputError("error histogram needs two equal-length non-empty vectors");
    if (bin_count == 0) throw InvalidInputError("bin_count must be at least 1");

    std::vector<double> errors(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) errors[i] = preds[i] - targets[i];

    double lo = errors[0], hi = errors[0], sum = 0.0;
    for (double e : errors) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        sum += e;
    }
    if (lo == hi) {  // degenerate spread: widen so the single value sits mid-range
        lo -= 0.5;
        hi += 0.5;
    }

    ErrorHistogram h;
    h.mean_error = sum / static_cast<double>(errors.size());
    const double width = (hi - lo) / static_cast<double>(bin_count);
    h.edges.resize(bin_count + 1);
    for (std::size_t i = 0; i <= bin_count; ++i)
        h.edges[i] = lo + width * static_cast<double>(i);
    h.edges.back() = hi;
    h.counts.assign(bin_count, 0);
    for (double e : errors) {
        std::size_t idx = static_cast<std::size_t>((e - lo) / width);
        if (idx >= bin_count) idx = bin_count - 1;
        ++h.counts[idx];
    }
    return h;
}

struct HeatmapCell {
    double mean = 0.0;
    std::size_t count = 0;
};

/// Mean popularity by release date. Absent cells simply have no entry, which
/// keeps "no releases" distinguishable from "mean of 0".
struct HeatmapGrid {
    std::vector<int> years;  // ascending, one per year present
    std::map<std::pair<int, int>, HeatmapCell> cells;

    const HeatmapCell* cell(int year, int month) const {
        const auto it = cells.find({year, month});
        return it == cells.end() ? nullptr : &it->second;
    }
};

inline HeatmapGrid monthly_popularity_heatmap(const std::vector<TrackRecord>& records) {
    HeatmapGrid grid;
    for (const auto& r : records) {
        auto& cell = grid.cells[{r.release_year, r.release_month}];
        cell.mean += r.popularity;  // running sum until the division below
        ++cell.count;
    }
    for (auto& [key, cell] : grid.cells) cell.mean /= static_cast<double>(cell.count);
    int last_year = 0;
    bool first = true;
    for (const auto& [key, cell] : grid.cells) {
        if (first || key.first != last_year) {
            grid.years.push_back(key.first);
            last_year = key.first;
            first = false;
        }
    }
    return grid;
}

struct ComparisonRow {
    std::string track_id;
    double actual = 0.0;
    double predicted = 0.0;
    double abs_error = 0.0;
};

/// Paired actual-vs-predicted rows, most popular first (ties by id) so the
/// emitted table matches a ranked bar chart.
inline std::vector<ComparisonRow> prediction_comparison(const std::vector<TrackRecord>& records,
                                                        const std::vector<double>& preds) {
    if (records.size() != preds.size())
        throw InvalidInputError("prediction comparison needs one prediction per record");
    std::vector<ComparisonRow> rows;
    rows.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        rows.push_back({records[i].track_id, records[i].popularity, preds[i],
                        std::abs(preds[i] - records[i].popularity)});
    std::sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.actual != b.actual) return a.actual > b.actual;
        return a.track_id < b.track_id;
    });
    return rows;
}

inline void write_comparison_csv(const std::filesystem::path& path,
                                 const std::vector<ComparisonRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "track_id,actual,predicted,abs_error\n";
    for (const auto& r : rows)
        out << detail::csv_escape(r.track_id) << ',' << detail::fmt_g17(r.actual) << ','
            << detail::fmt_g17(r.predicted) << ',' << detail::fmt_g17(r.abs_error) << '\n';
    if (!out.flush()) throw IoError("failed writing " + path.string());
}

inline void write_correlation_csv(const std::filesystem::path& path,
                                  const CorrelationTable& table) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "feature,r\n";
    for (const auto& e : table.entries) {
        out << detail::csv_escape(e.feature) << ',';
        if (e.r) out << detail::fmt_g17(*e.r);
        out << '\n';
    }
    if (!out.flush()) throw IoError("failed writing " + path.string());
}

inline void write_histogram_csv(const std::filesystem::path& path, const ErrorHistogram& h) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "bin_start,bin_end,count\n";
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        out << detail::fmt_g17(h.edges[i]) << ',' << detail::fmt_g17(h.edges[i + 1]) << ','
            << h.counts[i] << '\n';
    if (!out.flush()) throw IoError("failed writing " + path.string());
}

inline void write_heatmap_csv(const std::filesystem::path& path, const HeatmapGrid& grid) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "year,month,mean_popularity,count\n";
    for (const auto& [key, cell] : grid.cells)
        out << key.first << ',' << key.second << ',' << detail::fmt_g17(cell.mean) << ','
            << cell.count << '\n';
    if (!out.flush()) throw IoError("failed writing " + path.string());
}

}  // namespace hitcast
