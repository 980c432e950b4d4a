#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motifcast/roadgraph.hpp"

namespace motifcast::neural {

// Row-major dense value carrier used at the module boundary. Internally the
// network works on Eigen types.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    static Tensor zeros(std::vector<std::size_t> shape);
    static Tensor from_matrix(const Eigen::MatrixXd& m);
    static Tensor from_vector(const Eigen::VectorXd& v);

    std::size_t size() const;
    void validate() const;  // value count matches shape product, entries finite
    Eigen::MatrixXd matrix() const;
    Eigen::VectorXd vector() const;
};

enum class Activation { ReLU, Identity };

// Chebyshev filter coefficients theta_k, one F_in x F_out block per
// polynomial order 0..K.
struct ChebFilterParams {
    int order = 0;  // K
    std::vector<Eigen::MatrixXd> coefficients;

    int input_width() const;
    int output_width() const;
    void validate() const;
};

// Graph convolution sum_k T_k(L) x theta_k with the Chebyshev recurrence
// T_0 = I, T_1 = L, T_k = 2 L T_{k-1} - T_{k-2}; the polynomial matrices are
// never materialized. lap must be rescaled (spectrum within [-1, 1]).
Eigen::MatrixXd cheb_graph_conv(const Eigen::MatrixXd& x, const ChebFilterParams& params,
                                const roadgraph::GraphLaplacian& lap,
                                Activation activation = Activation::ReLU);
Tensor cheb_graph_conv(const Tensor& x, const ChebFilterParams& params,
                       const roadgraph::GraphLaplacian& lap,
                       Activation activation = Activation::ReLU);

// Gate weights stacked row-wise in the order [input; forget; output;
// candidate], so w_input is (4H x In) and w_hidden is (4H x H).
struct LstmParams {
    Eigen::MatrixXd w_input;
    Eigen::MatrixXd w_hidden;
    Eigen::VectorXd bias;

    int hidden_size() const { return static_cast<int>(w_hidden.cols()); }
    int input_size() const { return static_cast<int>(w_input.cols()); }
    void validate() const;
};

// Runs the standard LSTM recurrence from zero initial state and returns the
// final hidden state.
Eigen::VectorXd lstm_forward(std::span<const Eigen::VectorXd> sequence, const LstmParams& params);
Tensor lstm_forward(std::span<const Tensor> sequence, const LstmParams& params);

// Per-segment min-max scaling to [-1, 1] fitted on the training split.
// Segments with a degenerate range normalize to 0 and denormalize to their
// minimum.
struct Normalizer {
    Eigen::VectorXd min_value;
    Eigen::VectorXd max_value;

    static Normalizer fit(const Eigen::MatrixXd& training_series);  // rows = segments
    static Normalizer identity(int segments);
    Eigen::VectorXd normalize(const Eigen::VectorXd& raw) const;
    Eigen::VectorXd denormalize(const Eigen::VectorXd& scaled) const;
    Eigen::MatrixXd normalize_series(const Eigen::MatrixXd& raw) const;
};

struct ModelShape {
    int cheb_order = 3;    // K
    int mgc_layers = 1;    // 0 disables graph convolution (LSTM-only)
    int mgc_filters = 32;  // F_out of every MGC layer
    int lstm_hidden = 64;
};

// The Motif-GCRNN: a shared MGC stack applied to every input frame, one LSTM
// over the recent-trend frames, one LSTM over the daily-period frames, and a
// tanh regression head over the concatenated final hidden states.
struct MotifGcrnnModel {
    std::vector<ChebFilterParams> mgc_layers;
    LstmParams trend_lstm;
    LstmParams period_lstm;
    Eigen::MatrixXd fc_weight;  // N x (H or 2H)
    Eigen::VectorXd fc_bias;    // N
    roadgraph::GraphLaplacian laplacian;
    int trend_window = 2;   // m >= 1
    int period_window = 7;  // n >= 0 (0 disables the period branch)
    Normalizer norm;

    int node_count() const { return static_cast<int>(fc_bias.size()); }
    int feature_width() const;     // F of the last MGC layer, or 1
    int lstm_input_width() const;  // N * feature_width
    void validate() const;

    static MotifGcrnnModel create(const roadgraph::GraphLaplacian& rescaled_laplacian,
                                  const ModelShape& shape, int trend_window, int period_window,
                                  Normalizer norm, std::uint64_t seed);
};

// Inference in speed units: frames are raw N-vectors, output is the
// denormalized next-interval prediction.
Eigen::VectorXd forward(const MotifGcrnnModel& model,
                        std::span<const Eigen::VectorXd> trend_frames,
                        std::span<const Eigen::VectorXd> period_frames);
Tensor forward(const MotifGcrnnModel& model, std::span<const Tensor> trend_frames,
               std::span<const Tensor> period_frames);

// Network composition in normalized space (tanh output, inside (-1, 1)).
Eigen::VectorXd forward_normalized(const MotifGcrnnModel& model,
                                   std::span<const Eigen::VectorXd> trend_frames,
                                   std::span<const Eigen::VectorXd> period_frames);

// Squared Euclidean distance between prediction and target.
double loss_mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);
double loss_mse(const Tensor& predicted, const Tensor& actual);

struct LstmGradients {
    Eigen::MatrixXd w_input;
    Eigen::MatrixXd w_hidden;
    Eigen::VectorXd bias;
};

struct ModelGradients {
    std::vector<std::vector<Eigen::MatrixXd>> mgc;  // [layer][k]
    LstmGradients trend;
    LstmGradients period;
    Eigen::MatrixXd fc_weight;
    Eigen::VectorXd fc_bias;

    static ModelGradients zeros_like(const MotifGcrnnModel& model);
    double squared_norm() const;
    void scale(double factor);
};

// One training sample: time indices into a normalized N x T series. The
// trend_times are the m intervals before the target, period_times the same
// interval of the n preceding days, both in chronological order.
struct TrainingWindow {
    std::vector<int> trend_times;
    std::vector<int> period_times;
    int target_time = 0;
};

// Batch objective: sum over windows of the normalized-space squared error.
// Returns the loss and its gradients with respect to every parameter tensor.
std::pair<double, ModelGradients> backward(const MotifGcrnnModel& model,
                                           const Eigen::MatrixXd& normalized_series,
                                           std::span<const TrainingWindow> batch);

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 200;
    int batch_size = 32;
    std::uint64_t seed = 42;
    std::optional<double> gradient_clip = 5.0;  // global norm; nullopt disables

    void validate() const;
};

struct TrainResult {
    std::vector<double> epoch_mean_loss;  // mean per-sample loss per epoch
};

// Mini-batch SGD with seeded shuffling. Deterministic for a fixed seed;
// raises NumericError if the loss or a parameter becomes non-finite.
TrainResult train(MotifGcrnnModel& model, const Eigen::MatrixXd& normalized_series,
                  std::span<const TrainingWindow> windows, const TrainConfig& config);

// Named flat views over every parameter tensor, in a fixed order shared with
// gradient_views. Used by the optimizer, serialization, and gradient checks.
std::vector<std::pair<std::string, std::span<double>>> parameter_views(MotifGcrnnModel& model);
std::vector<std::pair<std::string, std::span<double>>> gradient_views(ModelGradients& grads);

}  // namespace motifcast::neural
