#pragma once

#include "pedgnn/clipio.hpp"
#include "pedgnn/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pedgnn {

struct ConfusionCounts {
    long long tp = 0, fp = 0, tn = 0, fn = 0;
    long long total() const { return tp + fp + tn + fn; }
    void merge(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
    }
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool degenerate = false; // some divisor was zero; affected metrics are 0
};

// One emitted (sample, frame) prediction, C positive.
struct PredictionEvent {
    std::string clip_id;
    int pedestrian_id = 0;
    int frame_index = 0;
    double p_cross = 0.5;
    Label predicted = Label::NoCross;
    std::optional<Label> ground_truth;
};

ConfusionCounts count_events(const std::vector<PredictionEvent>& events);
Metrics compute_metrics(const ConfusionCounts& counts);
Metrics compute_metrics(const std::vector<PredictionEvent>& events);

// Sliding window, step 1: per pedestrian a prediction is emitted at every
// frame once N_F consecutive observations are buffered; a gap in the frame
// index resets the buffer.
std::vector<PredictionEvent> stream_predict(const ClipRecord& clip,
                                            const PedGnnParams& params,
                                            const SpectralBasis& basis);
std::vector<PredictionEvent> stream_predict(const std::vector<ClipRecord>& clips,
                                            const PedGnnParams& params,
                                            const SpectralBasis& basis);

// Evaluate F1 (C positive) of params over clips; events with null ground
// truth are excluded.
Metrics evaluate_clips(const std::vector<ClipRecord>& clips,
                       const PedGnnParams& params, const SpectralBasis& basis);

struct ReportRow {
    std::string train;
    std::string test;
    int n_frames = 0;
    Metrics metrics;
};

// Aligned text table with columns Train, Test, N_F, Accuracy, Precision,
// Recall, F1-score (percentages, 2 decimals), rows sorted by (Test, Train).
std::string format_report(std::vector<ReportRow> rows);
// Machine-readable CSV of the same rows; parses back to the same values.
std::string format_report_csv(std::vector<ReportRow> rows);
std::vector<ReportRow> parse_report_csv(const std::string& text);

std::string event_log_line(const PredictionEvent& e);

} // namespace pedgnn
