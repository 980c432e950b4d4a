#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "motifcast/arma.hpp"
#include "motifcast/neural.hpp"
#include "motifcast/roadgraph.hpp"
#include "motifcast/speed_matrix.hpp"
#include "motifcast/wavelet.hpp"

namespace motifcast::pipeline {

// One forecasting target (day d, interval t) with its input time indices:
// trend_times are the m intervals before the target within day d,
// period_times the same interval of the n preceding days.
struct WindowSample {
    int day = 0;
    int interval = 0;
    int target_time = 0;
    std::vector<int> trend_times;
    std::vector<int> period_times;
};

struct WindowSet {
    std::vector<WindowSample> train;
    std::vector<WindowSample> test;
};

// Emits every target whose windows are fully available: interval >= m and
// day >= n. Training targets lie before the split day, test targets after;
// period frames of test targets may reach back into training days.
WindowSet build_windows(int total_days, int training_days, int intervals_per_day, int m, int n);

// Per-segment frequency bands, each N x T like the input.
struct BandSet {
    Eigen::MatrixXd low;
    std::vector<Eigen::MatrixXd> high;  // finest band first
};

BandSet decompose_all(const Eigen::MatrixXd& speeds, int level, const wavelet::FilterBank& bank,
                      wavelet::BoundaryMode mode, int threads = 1);
BandSet decompose_all(const SpeedMatrix& speeds, int level, const wavelet::FilterBank& bank,
                      wavelet::BoundaryMode mode, int threads = 1);

struct PipelineConfig {
    // wavelet stage
    int level = 3;
    std::string wavelet_name = "db4";
    wavelet::BoundaryMode boundary = wavelet::BoundaryMode::Periodic;
    // network stage
    neural::ModelShape shape;
    int trend_window = 2;   // m
    int period_window = 7;  // n
    neural::TrainConfig train;
    // high-frequency stage
    int arma_max_p = 3;
    int arma_max_q = 3;
    // split and metrics
    int training_days = 24;
    double eps_mape = 1.0;  // actuals below this are excluded from MAPE
    int threads = 1;

    void validate() const;
};

struct EvaluationReport {
    double mae = 0.0;
    double mape_percent = 0.0;
    double rmse = 0.0;
    std::size_t sample_count = 0;
    std::size_t mape_sample_count = 0;
    std::vector<double> per_segment_mae;
    std::vector<double> per_segment_mape;  // NaN when no eligible point
    std::vector<double> per_segment_rmse;
};

// MAE / MAPE / RMSE over unmasked points. MAPE skips actuals below eps_mape.
EvaluationReport evaluate(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals,
                          const BoolMask& valid, double eps_mape);

struct HybridArtifacts {
    neural::MotifGcrnnModel model;
    std::vector<std::vector<arma::ArmaModel>> band_models;  // [segment][band]
    std::vector<double> loss_history;
};

// Training phase of Fig-2-style hybrid forecasting. Reads only the first
// training_days of the matrix: decomposes the training split, trains the
// Motif-GCRNN on the low band, and fits one ARMA per (segment, high band).
HybridArtifacts fit_hybrid(const SpeedMatrix& speeds, const roadgraph::DirectedRoadGraph& graph,
                           const PipelineConfig& config);

struct PredictionSet {
    std::vector<WindowSample> targets;
    Eigen::MatrixXd predicted;  // N x targets
    Eigen::MatrixXd actual;     // N x targets
    BoolMask valid;             // false where the actual was imputed/missing
};

// Rolling one-step forecasts over the test days. Inputs for a target at time
// t come from a fresh decomposition of the causal prefix [0, t), so no test
// value at or after t can influence its own prediction.
PredictionSet predict_hybrid(const HybridArtifacts& artifacts, const SpeedMatrix& speeds,
                             const PipelineConfig& config);

struct RunOutput {
    EvaluationReport report;
    PredictionSet predictions;
    HybridArtifacts artifacts;
};

RunOutput run_hybrid(const SpeedMatrix& speeds, const roadgraph::DirectedRoadGraph& graph,
                     const PipelineConfig& config);

enum class BaselineKind { Persistence, HistoricalAverage, LstmOnly, ArmaOnly, MotifGcrnnNoDwt };

std::string to_string(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& name);

struct BaselineOutput {
    EvaluationReport report;
    PredictionSet predictions;
};

// Reference forecasters scored on exactly the same test targets as
// run_hybrid. The graph is only required for MotifGcrnnNoDwt.
BaselineOutput run_baseline(const SpeedMatrix& speeds, const roadgraph::DirectedRoadGraph* graph,
                            const PipelineConfig& config, BaselineKind kind);

struct SweepRow {
    std::string axis;
    int value = 0;
    EvaluationReport report;
};

// Re-runs the hybrid once per value of one axis (K, m or n), all other
// settings fixed.
std::vector<SweepRow> parameter_sweep(const SpeedMatrix& speeds,
                                      const roadgraph::DirectedRoadGraph& graph,
                                      const PipelineConfig& config, const std::string& axis,
                                      std::span<const int> values);

}  // namespace motifcast::pipeline
