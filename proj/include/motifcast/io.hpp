#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "motifcast/arma.hpp"
#include "motifcast/data.hpp"
#include "motifcast/neural.hpp"
#include "motifcast/pipeline.hpp"
#include "motifcast/speed_matrix.hpp"

namespace motifcast::io {

// Speed matrix CSV: header row of segment ids, one row per interval, empty
// field = missing. A `<stem>.meta.json` sidecar carries start time and
// interval length.
void save_speed_matrix(const pipeline::SpeedMatrix& matrix, const std::filesystem::path& csv_path);
pipeline::SpeedMatrix load_speed_matrix(const std::filesystem::path& csv_path);

// Wide matrix CSV without a mask (band exports share the matrix layout).
void save_matrix_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& segment_ids,
                     const std::filesystem::path& path);
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path,
                                std::vector<std::string>* segment_ids = nullptr);

// Predictions CSV: segment_id,day,interval,predicted_speed,actual_speed.
// The actual field is empty where the observation was missing.
void save_predictions_csv(const pipeline::PredictionSet& predictions,
                          const std::vector<std::string>& segment_ids,
                          const std::filesystem::path& path);
pipeline::PredictionSet load_predictions_csv(const std::filesystem::path& path,
                                             std::vector<std::string>* segment_ids = nullptr);

void save_report_json(const pipeline::EvaluationReport& report,
                      const std::vector<std::string>& segment_ids,
                      const std::filesystem::path& path);

void save_sweep_csv(std::span<const pipeline::SweepRow> rows, const std::filesystem::path& path);

// CSV `epoch,loss`.
void save_loss_history_csv(std::span<const double> losses, const std::filesystem::path& path);

// One record per (segment, band): segment_id, band, p, q, c, phi[], lambda[],
// noise_variance.
std::string serialize_arma_models(const std::vector<std::vector<arma::ArmaModel>>& models,
                                  const std::vector<std::string>& segment_ids);
void save_arma_models(const std::vector<std::vector<arma::ArmaModel>>& models,
                      const std::vector<std::string>& segment_ids,
                      const std::filesystem::path& path);
std::vector<std::vector<arma::ArmaModel>> load_arma_models(const std::filesystem::path& path);

// Model checkpoint: magic "MGCRNN1\n", a little-endian u64 header length, a
// JSON header with shapes, then raw little-endian doubles for lambda_max, the
// Laplacian, the normalizer and every parameter tensor.
std::string serialize_checkpoint(const neural::MotifGcrnnModel& model);
void save_checkpoint(const neural::MotifGcrnnModel& model, const std::filesystem::path& path);
neural::MotifGcrnnModel load_checkpoint(const std::filesystem::path& path);

// Records CSV `timestamp_iso8601,segment_id,speed_kmh`; an optional header
// line and `#` comments are skipped. Parse errors name the line.
std::vector<data::GpsSpeedRecord> load_records_csv(const std::filesystem::path& path);

void save_synthetic_spec(const data::SyntheticSpec& spec, const std::filesystem::path& path);
data::SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

}  // namespace motifcast::io
