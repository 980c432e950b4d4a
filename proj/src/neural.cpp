#include "motifcast/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "motifcast/common.hpp"

namespace motifcast::neural {
namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw DataError("neural: " + message);
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

bool matrix_finite(const Eigen::MatrixXd& m) {
    return all_finite({m.data(), static_cast<std::size_t>(m.size())});
}

void fill_uniform(Rng& rng, Eigen::MatrixXd& m, double radius) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.uniform(-radius, radius);
    }
}

// T_k(L) x for k = 0..K via the Chebyshev recurrence.
std::vector<Eigen::MatrixXd> cheb_apply(const Eigen::MatrixXd& lap, const Eigen::MatrixXd& x,
                                        int order) {
    std::vector<Eigen::MatrixXd> zs;
    zs.reserve(static_cast<std::size_t>(order) + 1);
    zs.push_back(x);
    if (order >= 1) zs.push_back(lap * x);
    for (int k = 2; k <= order; ++k) {
        zs.push_back(2.0 * (lap * zs.back()) - zs[static_cast<std::size_t>(k - 2)]);
    }
    return zs;
}

// sum_k T_k(L) u_k evaluated with the Clenshaw recurrence.
Eigen::MatrixXd cheb_adjoint_sum(const Eigen::MatrixXd& lap,
                                 const std::vector<Eigen::MatrixXd>& us) {
    const int order = static_cast<int>(us.size()) - 1;
    Eigen::MatrixXd b1 = Eigen::MatrixXd::Zero(us[0].rows(), us[0].cols());
    Eigen::MatrixXd b2 = b1;
    for (int k = order; k >= 1; --k) {
        Eigen::MatrixXd b = us[static_cast<std::size_t>(k)] + 2.0 * (lap * b1) - b2;
        b2 = std::move(b1);
        b1 = std::move(b);
    }
    return us[0] + lap * b1 - b2;
}

struct MgcFrameCache {
    std::vector<std::vector<Eigen::MatrixXd>> zs;  // [layer][k]
    std::vector<Eigen::MatrixXd> preact;           // [layer]
    Eigen::VectorXd flat;
};

// Shared MGC stack applied to one frame; x is the N-vector of the frame.
MgcFrameCache run_mgc_stack(const MotifGcrnnModel& model, const Eigen::VectorXd& x) {
    MgcFrameCache cache;
    Eigen::MatrixXd current = x;
    for (const ChebFilterParams& layer : model.mgc_layers) {
        auto zs = cheb_apply(model.laplacian.matrix, current, layer.order);
        Eigen::MatrixXd preact =
            Eigen::MatrixXd::Zero(current.rows(), layer.output_width());
        for (std::size_t k = 0; k < zs.size(); ++k) {
            preact.noalias() += zs[k] * layer.coefficients[k];
        }
        cache.zs.push_back(std::move(zs));
        cache.preact.push_back(preact);
        current = preact.cwiseMax(0.0);  // ReLU
    }
    cache.flat = Eigen::Map<const Eigen::VectorXd>(current.data(), current.size());
    if (!all_finite({cache.flat.data(), static_cast<std::size_t>(cache.flat.size())})) {
        throw NumericError("neural: non-finite activation in graph convolution");
    }
    return cache;
}

struct LstmCache {
    std::vector<Eigen::VectorXd> inputs;
    std::vector<Eigen::VectorXd> gate_i, gate_f, gate_o, gate_g, cell, tanh_cell, hidden;
};

Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
    return ((-v.array()).exp() + 1.0).inverse().matrix();
}

Eigen::VectorXd run_lstm(const LstmParams& params, std::vector<Eigen::VectorXd> inputs,
                         LstmCache* cache) {
    const int hidden = params.hidden_size();
    Eigen::VectorXd h = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(hidden);
    for (const Eigen::VectorXd& x : inputs) {
        Eigen::VectorXd pre = params.bias;
        pre.noalias() += params.w_input * x;
        pre.noalias() += params.w_hidden * h;
        Eigen::VectorXd i = sigmoid(pre.segment(0, hidden));
        Eigen::VectorXd f = sigmoid(pre.segment(hidden, hidden));
        Eigen::VectorXd o = sigmoid(pre.segment(2 * hidden, hidden));
        Eigen::VectorXd g = pre.segment(3 * hidden, hidden).array().tanh().matrix();
        c = f.cwiseProduct(c) + i.cwiseProduct(g);
        Eigen::VectorXd tc = c.array().tanh().matrix();
        h = o.cwiseProduct(tc);
        if (cache != nullptr) {
            cache->gate_i.push_back(std::move(i));
            cache->gate_f.push_back(std::move(f));
            cache->gate_o.push_back(std::move(o));
            cache->gate_g.push_back(std::move(g));
            cache->cell.push_back(c);
            cache->tanh_cell.push_back(std::move(tc));
            cache->hidden.push_back(h);
        }
    }
    if (cache != nullptr) cache->inputs = std::move(inputs);
    return h;
}

struct SampleCache {
    std::vector<MgcFrameCache> trend_frames, period_frames;
    LstmCache trend, period;
    Eigen::VectorXd y_c;
    Eigen::VectorXd output;  // tanh(fc)
};

Eigen::VectorXd run_network(const MotifGcrnnModel& model,
                            std::span<const Eigen::VectorXd> trend_frames,
                            std::span<const Eigen::VectorXd> period_frames,
                            SampleCache* cache) {
    require(static_cast<int>(trend_frames.size()) == model.trend_window,
            "expected " + std::to_string(model.trend_window) + " trend frames, got " +
                std::to_string(trend_frames.size()));
    require(static_cast<int>(period_frames.size()) == model.period_window,
            "expected " + std::to_string(model.period_window) + " period frames, got " +
                std::to_string(period_frames.size()));
    for (const auto& frame : trend_frames) {
        require(frame.size() == model.node_count(), "trend frame width mismatch");
    }
    for (const auto& frame : period_frames) {
        require(frame.size() == model.node_count(), "period frame width mismatch");
    }

    const auto run_branch = [&](std::span<const Eigen::VectorXd> frames, const LstmParams& lstm,
                                std::vector<MgcFrameCache>* frame_caches, LstmCache* lstm_cache) {
        std::vector<Eigen::VectorXd> lstm_inputs;
        lstm_inputs.reserve(frames.size());
        for (const Eigen::VectorXd& frame : frames) {
            MgcFrameCache fc = run_mgc_stack(model, frame);
            lstm_inputs.push_back(fc.flat);
            if (frame_caches != nullptr) frame_caches->push_back(std::move(fc));
        }
        return run_lstm(lstm, std::move(lstm_inputs), lstm_cache);
    };

    Eigen::VectorXd h_trend = run_branch(trend_frames, model.trend_lstm,
                                         cache ? &cache->trend_frames : nullptr,
                                         cache ? &cache->trend : nullptr);
    Eigen::VectorXd y_c;
    if (model.period_window > 0) {
        Eigen::VectorXd h_period = run_branch(period_frames, model.period_lstm,
                                              cache ? &cache->period_frames : nullptr,
                                              cache ? &cache->period : nullptr);
        y_c.resize(h_trend.size() + h_period.size());
        y_c << h_trend, h_period;
    } else {
        y_c = std::move(h_trend);
    }

    Eigen::VectorXd u = model.fc_weight * y_c + model.fc_bias;
    if (!all_finite({u.data(), static_cast<std::size_t>(u.size())})) {
        throw NumericError("neural: non-finite activation in the regression layer");
    }
    Eigen::VectorXd y = u.array().tanh().matrix();
    if (cache != nullptr) {
        cache->y_c = std::move(y_c);
        cache->output = y;
    }
    return y;
}

// Backpropagation through one LSTM branch given the gradient at the final
// hidden state; returns the per-step input gradients.
std::vector<Eigen::VectorXd> lstm_backward(const LstmParams& params, const LstmCache& cache,
                                           Eigen::VectorXd d_hidden, LstmGradients& grads) {
    const int hidden = params.hidden_size();
    const int steps = static_cast<int>(cache.inputs.size());
    std::vector<Eigen::VectorXd> d_inputs(static_cast<std::size_t>(steps));
    Eigen::VectorXd d_cell = Eigen::VectorXd::Zero(hidden);
    Eigen::VectorXd d_gates(4 * hidden);
    for (int t = steps - 1; t >= 0; --t) {
        const std::size_t ts = static_cast<std::size_t>(t);
        const Eigen::VectorXd& i = cache.gate_i[ts];
        const Eigen::VectorXd& f = cache.gate_f[ts];
        const Eigen::VectorXd& o = cache.gate_o[ts];
        const Eigen::VectorXd& g = cache.gate_g[ts];
        const Eigen::VectorXd& tc = cache.tanh_cell[ts];

        Eigen::VectorXd d_o = d_hidden.cwiseProduct(tc);
        d_cell += d_hidden.cwiseProduct(o).cwiseProduct(
            (1.0 - tc.array().square()).matrix());

        Eigen::VectorXd c_prev =
            t > 0 ? cache.cell[ts - 1] : Eigen::VectorXd::Zero(hidden);
        Eigen::VectorXd d_i = d_cell.cwiseProduct(g);
        Eigen::VectorXd d_f = d_cell.cwiseProduct(c_prev);
        Eigen::VectorXd d_g = d_cell.cwiseProduct(i);
        d_cell = d_cell.cwiseProduct(f);

        d_gates.segment(0, hidden) =
            d_i.cwiseProduct(i).cwiseProduct((1.0 - i.array()).matrix());
        d_gates.segment(hidden, hidden) =
            d_f.cwiseProduct(f).cwiseProduct((1.0 - f.array()).matrix());
        d_gates.segment(2 * hidden, hidden) =
            d_o.cwiseProduct(o).cwiseProduct((1.0 - o.array()).matrix());
        d_gates.segment(3 * hidden, hidden) =
            d_g.cwiseProduct((1.0 - g.array().square()).matrix());

        grads.w_input.noalias() += d_gates * cache.inputs[ts].transpose();
        if (t > 0) {
            grads.w_hidden.noalias() += d_gates * cache.hidden[ts - 1].transpose();
        }
        grads.bias += d_gates;
        d_inputs[ts] = params.w_input.transpose() * d_gates;
        d_hidden = params.w_hidden.transpose() * d_gates;
    }
    return d_inputs;
}

// Backpropagation through the shared MGC stack for one frame.
void mgc_backward(const MotifGcrnnModel& model, const MgcFrameCache& cache,
                  const Eigen::VectorXd& d_flat, ModelGradients& grads) {
    if (model.mgc_layers.empty()) return;
    const Eigen::MatrixXd& last_pre = cache.preact.back();
    Eigen::MatrixXd d_out =
        Eigen::Map<const Eigen::MatrixXd>(d_flat.data(), last_pre.rows(), last_pre.cols());
    for (int l = static_cast<int>(model.mgc_layers.size()) - 1; l >= 0; --l) {
        const std::size_t ls = static_cast<std::size_t>(l);
        const ChebFilterParams& layer = model.mgc_layers[ls];
        const Eigen::MatrixXd mask =
            (cache.preact[ls].array() > 0.0).cast<double>().matrix();
        Eigen::MatrixXd d_pre = d_out.cwiseProduct(mask);
        for (std::size_t k = 0; k < layer.coefficients.size(); ++k) {
            grads.mgc[ls][k].noalias() += cache.zs[ls][k].transpose() * d_pre;
        }
        if (l > 0) {
            std::vector<Eigen::MatrixXd> us;
            us.reserve(layer.coefficients.size());
            for (const Eigen::MatrixXd& theta : layer.coefficients) {
                us.push_back(d_pre * theta.transpose());
            }
            d_out = cheb_adjoint_sum(model.laplacian.matrix, us);
        }
    }
}

std::vector<Eigen::VectorXd> gather_frames(const Eigen::MatrixXd& series,
                                           std::span<const int> times) {
    std::vector<Eigen::VectorXd> frames;
    frames.reserve(times.size());
    for (int t : times) {
        require(t >= 0 && t < series.cols(), "window index " + std::to_string(t) +
                                                 " outside the series of length " +
                                                 std::to_string(series.cols()));
        frames.push_back(series.col(t));
    }
    return frames;
}

void sgd_update(MotifGcrnnModel& model, ModelGradients& grads, double learning_rate) {
    auto params = parameter_views(model);
    auto gradients = gradient_views(grads);
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::span<double> p = params[i].second;
        std::span<const double> g = gradients[i].second;
        for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] -= learning_rate * g[j];
        }
    }
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
    Tensor t;
    t.shape = std::move(shape);
    t.values.assign(t.size(), 0.0);
    return t;
}

Tensor Tensor::from_matrix(const Eigen::MatrixXd& m) {
    Tensor t;
    t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    t.values.resize(static_cast<std::size_t>(m.size()));
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        t.values.data(), m.rows(), m.cols()) = m;
    return t;
}

Tensor Tensor::from_vector(const Eigen::VectorXd& v) {
    Tensor t;
    t.shape = {static_cast<std::size_t>(v.size())};
    t.values.assign(v.data(), v.data() + v.size());
    return t;
}

std::size_t Tensor::size() const {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<std::size_t>());
}

void Tensor::validate() const {
    require(values.size() == size(), "tensor value count does not match its shape");
    if (!all_finite(values)) throw NumericError("neural: tensor contains non-finite values");
}

Eigen::MatrixXd Tensor::matrix() const {
    validate();
    require(shape.size() == 2, "expected a rank-2 tensor");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
}

Eigen::VectorXd Tensor::vector() const {
    validate();
    require(shape.size() == 1, "expected a rank-1 tensor");
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
}

int ChebFilterParams::input_width() const {
    return coefficients.empty() ? 0 : static_cast<int>(coefficients.front().rows());
}

int ChebFilterParams::output_width() const {
    return coefficients.empty() ? 0 : static_cast<int>(coefficients.front().cols());
}

void ChebFilterParams::validate() const {
    require(order >= 0, "Chebyshev order must be >= 0");
    require(coefficients.size() == static_cast<std::size_t>(order) + 1,
            "expected K+1 coefficient blocks");
    for (const auto& c : coefficients) {
        require(c.rows() == coefficients.front().rows() &&
                    c.cols() == coefficients.front().cols(),
                "coefficient blocks must share one shape");
        if (!matrix_finite(c)) throw NumericError("neural: non-finite filter coefficients");
    }
}

Eigen::MatrixXd cheb_graph_conv(const Eigen::MatrixXd& x, const ChebFilterParams& params,
                                const roadgraph::GraphLaplacian& lap, Activation activation) {
    params.validate();
    require(lap.matrix.rows() == lap.matrix.cols(), "Laplacian must be square");
    require(x.rows() == lap.matrix.rows(), "signal rows must match the Laplacian dimension");
    require(static_cast<int>(x.cols()) == params.input_width(),
            "signal width must match F_in of the filter");
    require(lap.lambda_max <= 1.0 + 1e-9,
            "Laplacian must be rescaled before Chebyshev filtering");

    const auto zs = cheb_apply(lap.matrix, x, params.order);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), params.output_width());
    for (std::size_t k = 0; k < zs.size(); ++k) {
        out.noalias() += zs[k] * params.coefficients[k];
    }
    if (activation == Activation::ReLU) out = out.cwiseMax(0.0);
    if (!matrix_finite(out)) throw NumericError("neural: non-finite convolution output");
    return out;
}

Tensor cheb_graph_conv(const Tensor& x, const ChebFilterParams& params,
                       const roadgraph::GraphLaplacian& lap, Activation activation) {
    return Tensor::from_matrix(cheb_graph_conv(x.matrix(), params, lap, activation));
}

void LstmParams::validate() const {
    const int hidden = hidden_size();
    require(hidden >= 0, "invalid hidden size");
    require(w_input.rows() == 4 * hidden && w_hidden.rows() == 4 * hidden &&
                bias.size() == 4 * hidden,
            "LSTM gate blocks must stack to 4H rows");
    if (!matrix_finite(w_input) || !matrix_finite(w_hidden) ||
        !all_finite({bias.data(), static_cast<std::size_t>(bias.size())})) {
        throw NumericError("neural: non-finite LSTM parameters");
    }
}

Eigen::VectorXd lstm_forward(std::span<const Eigen::VectorXd> sequence,
                             const LstmParams& params) {
    params.validate();
    require(!sequence.empty(), "LSTM sequence must be non-empty");
    std::vector<Eigen::VectorXd> inputs;
    inputs.reserve(sequence.size());
    for (const auto& x : sequence) {
        require(x.size() == params.input_size(), "LSTM input width mismatch");
        inputs.push_back(x);
    }
    return run_lstm(params, std::move(inputs), nullptr);
}

Tensor lstm_forward(std::span<const Tensor> sequence, const LstmParams& params) {
    std::vector<Eigen::VectorXd> frames;
    frames.reserve(sequence.size());
    for (const Tensor& t : sequence) frames.push_back(t.vector());
    return Tensor::from_vector(lstm_forward(frames, params));
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& training_series) {
    require(training_series.cols() > 0, "cannot fit a normalizer on an empty series");
    Normalizer norm;
    norm.min_value = training_series.rowwise().minCoeff();
    norm.max_value = training_series.rowwise().maxCoeff();
    return norm;
}

Normalizer Normalizer::identity(int segments) {
    Normalizer norm;
    norm.min_value = Eigen::VectorXd::Constant(segments, -1.0);
    norm.max_value = Eigen::VectorXd::Constant(segments, 1.0);
    return norm;
}

Eigen::VectorXd Normalizer::normalize(const Eigen::VectorXd& raw) const {
    require(raw.size() == min_value.size(), "normalizer width mismatch");
    Eigen::VectorXd out(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        const double range = max_value(i) - min_value(i);
        out(i) = range > 1e-12 ? 2.0 * (raw(i) - min_value(i)) / range - 1.0 : 0.0;
    }
    return out;
}

Eigen::VectorXd Normalizer::denormalize(const Eigen::VectorXd& scaled) const {
    require(scaled.size() == min_value.size(), "normalizer width mismatch");
    Eigen::VectorXd out(scaled.size());
    for (Eigen::Index i = 0; i < scaled.size(); ++i) {
        const double range = max_value(i) - min_value(i);
        out(i) = range > 1e-12 ? (scaled(i) + 1.0) * 0.5 * range + min_value(i) : min_value(i);
    }
    return out;
}

Eigen::MatrixXd Normalizer::normalize_series(const Eigen::MatrixXd& raw) const {
    Eigen::MatrixXd out(raw.rows(), raw.cols());
    for (Eigen::Index t = 0; t < raw.cols(); ++t) {
        out.col(t) = normalize(raw.col(t));
    }
    return out;
}

int MotifGcrnnModel::feature_width() const {
    return mgc_layers.empty() ? 1 : mgc_layers.back().output_width();
}

int MotifGcrnnModel::lstm_input_width() const { return node_count() * feature_width(); }

void MotifGcrnnModel::validate() const {
    require(trend_window >= 1, "trend window m must be >= 1");
    require(period_window >= 0, "period window n must be >= 0");
    const int n = node_count();
    require(laplacian.matrix.rows() == n && laplacian.matrix.cols() == n,
            "Laplacian dimension must equal the output width N");
    int width = 1;
    for (const auto& layer : mgc_layers) {
        layer.validate();
        require(layer.input_width() == width, "MGC layer widths must chain");
        width = layer.output_width();
    }
    trend_lstm.validate();
    require(trend_lstm.input_size() == lstm_input_width(), "trend LSTM input width mismatch");
    int concat = trend_lstm.hidden_size();
    if (period_window > 0) {
        period_lstm.validate();
        require(period_lstm.input_size() == lstm_input_width(),
                "period LSTM input width mismatch");
        concat += period_lstm.hidden_size();
    }
    require(fc_weight.rows() == n && fc_bias.size() == n,
            "regression head must emit one value per segment");
    require(fc_weight.cols() == concat, "regression head width must match Y_C");
    require(norm.min_value.size() == n, "normalizer width must equal N");
    if (!matrix_finite(fc_weight) ||
        !all_finite({fc_bias.data(), static_cast<std::size_t>(fc_bias.size())})) {
        throw NumericError("neural: non-finite regression parameters");
    }
}

MotifGcrnnModel MotifGcrnnModel::create(const roadgraph::GraphLaplacian& rescaled_laplacian,
                                        const ModelShape& shape, int trend_window,
                                        int period_window, Normalizer norm, std::uint64_t seed) {
    require(trend_window >= 1, "trend window m must be >= 1");
    require(period_window >= 0, "period window n must be >= 0");
    require(shape.mgc_layers >= 0 && shape.cheb_order >= 0 && shape.lstm_hidden >= 1 &&
                shape.mgc_filters >= 1,
            "invalid model shape");

    const int n = static_cast<int>(rescaled_laplacian.matrix.rows());
    MotifGcrnnModel model;
    model.laplacian = rescaled_laplacian;
    model.trend_window = trend_window;
    model.period_window = period_window;
    model.norm = std::move(norm);

    Rng rng(seed);
    int width = 1;
    for (int l = 0; l < shape.mgc_layers; ++l) {
        ChebFilterParams layer;
        layer.order = shape.cheb_order;
        const double radius = 1.0 / std::sqrt(static_cast<double>(width) * (shape.cheb_order + 1));
        for (int k = 0; k <= shape.cheb_order; ++k) {
            Eigen::MatrixXd theta(width, shape.mgc_filters);
            fill_uniform(rng, theta, radius);
            layer.coefficients.push_back(std::move(theta));
        }
        model.mgc_layers.push_back(std::move(layer));
        width = shape.mgc_filters;
    }

    const int input = n * width;
    const int hidden = shape.lstm_hidden;
    const auto make_lstm = [&](bool enabled) {
        LstmParams lstm;
        const int rows = enabled ? 4 * hidden : 0;
        lstm.w_input.resize(rows, enabled ? input : 0);
        lstm.w_hidden.resize(rows, enabled ? hidden : 0);
        lstm.bias = Eigen::VectorXd::Zero(rows);
        if (enabled) {
            fill_uniform(rng, lstm.w_input, 1.0 / std::sqrt(static_cast<double>(input)));
            fill_uniform(rng, lstm.w_hidden, 1.0 / std::sqrt(static_cast<double>(hidden)));
        }
        return lstm;
    };
    model.trend_lstm = make_lstm(true);
    model.period_lstm = make_lstm(period_window > 0);

    const int concat = period_window > 0 ? 2 * hidden : hidden;
    model.fc_weight.resize(n, concat);
    fill_uniform(rng, model.fc_weight, 1.0 / std::sqrt(static_cast<double>(concat)));
    model.fc_bias = Eigen::VectorXd::Zero(n);
    model.validate();
    return model;
}

Eigen::VectorXd forward_normalized(const MotifGcrnnModel& model,
                                   std::span<const Eigen::VectorXd> trend_frames,
                                   std::span<const Eigen::VectorXd> period_frames) {
    return run_network(model, trend_frames, period_frames, nullptr);
}

Eigen::VectorXd forward(const MotifGcrnnModel& model,
                        std::span<const Eigen::VectorXd> trend_frames,
                        std::span<const Eigen::VectorXd> period_frames) {
    std::vector<Eigen::VectorXd> trend_scaled, period_scaled;
    trend_scaled.reserve(trend_frames.size());
    period_scaled.reserve(period_frames.size());
    for (const auto& f : trend_frames) trend_scaled.push_back(model.norm.normalize(f));
    for (const auto& f : period_frames) period_scaled.push_back(model.norm.normalize(f));
    return model.norm.denormalize(forward_normalized(model, trend_scaled, period_scaled));
}

Tensor forward(const MotifGcrnnModel& model, std::span<const Tensor> trend_frames,
               std::span<const Tensor> period_frames) {
    std::vector<Eigen::VectorXd> trend, period;
    for (const Tensor& t : trend_frames) trend.push_back(t.vector());
    for (const Tensor& t : period_frames) period.push_back(t.vector());
    return Tensor::from_vector(forward(model, trend, period));
}

double loss_mse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
    require(predicted.size() == actual.size(), "loss_mse shape mismatch");
    return (predicted - actual).squaredNorm();
}

double loss_mse(const Tensor& predicted, const Tensor& actual) {
    return loss_mse(predicted.vector(), actual.vector());
}

ModelGradients ModelGradients::zeros_like(const MotifGcrnnModel& model) {
    ModelGradients g;
    for (const auto& layer : model.mgc_layers) {
        std::vector<Eigen::MatrixXd> zs;
        for (const auto& theta : layer.coefficients) {
            zs.push_back(Eigen::MatrixXd::Zero(theta.rows(), theta.cols()));
        }
        g.mgc.push_back(std::move(zs));
    }
    const auto zero_lstm = [](const LstmParams& p) {
        return LstmGradients{Eigen::MatrixXd::Zero(p.w_input.rows(), p.w_input.cols()),
                             Eigen::MatrixXd::Zero(p.w_hidden.rows(), p.w_hidden.cols()),
                             Eigen::VectorXd::Zero(p.bias.size())};
    };
    g.trend = zero_lstm(model.trend_lstm);
    g.period = zero_lstm(model.period_lstm);
    g.fc_weight = Eigen::MatrixXd::Zero(model.fc_weight.rows(), model.fc_weight.cols());
    g.fc_bias = Eigen::VectorXd::Zero(model.fc_bias.size());
    return g;
}

double ModelGradients::squared_norm() const {
    double total = 0.0;
    for (const auto& layer : mgc) {
        for (const auto& theta : layer) total += theta.squaredNorm();
    }
    for (const LstmGradients* l : {&trend, &period}) {
        total += l->w_input.squaredNorm() + l->w_hidden.squaredNorm() + l->bias.squaredNorm();
    }
    return total + fc_weight.squaredNorm() + fc_bias.squaredNorm();
}

void ModelGradients::scale(double factor) {
    for (auto& layer : mgc) {
        for (auto& theta : layer) theta *= factor;
    }
    for (LstmGradients* l : {&trend, &period}) {
        l->w_input *= factor;
        l->w_hidden *= factor;
        l->bias *= factor;
    }
    fc_weight *= factor;
    fc_bias *= factor;
}

std::pair<double, ModelGradients> backward(const MotifGcrnnModel& model,
                                           const Eigen::MatrixXd& normalized_series,
                                           std::span<const TrainingWindow> batch) {
    model.validate();
    require(normalized_series.rows() == model.node_count(),
            "series rows must equal the node count");
    require(!batch.empty(), "backward needs at least one window");

    double loss = 0.0;
    ModelGradients grads = ModelGradients::zeros_like(model);
    const int hidden = model.trend_lstm.hidden_size();

    for (const TrainingWindow& window : batch) {
        require(static_cast<int>(window.trend_times.size()) == model.trend_window,
                "window trend length must equal m");
        require(static_cast<int>(window.period_times.size()) == model.period_window,
                "window period length must equal n");
        auto trend_frames = gather_frames(normalized_series, window.trend_times);
        auto period_frames = gather_frames(normalized_series, window.period_times);

        SampleCache cache;
        Eigen::VectorXd y = run_network(model, trend_frames, period_frames, &cache);
        require(window.target_time >= 0 && window.target_time < normalized_series.cols(),
                "target index outside the series");
        Eigen::VectorXd target = normalized_series.col(window.target_time);
        Eigen::VectorXd err = y - target;
        loss += err.squaredNorm();

        Eigen::VectorXd d_u =
            (2.0 * err).cwiseProduct((1.0 - y.array().square()).matrix());
        grads.fc_weight.noalias() += d_u * cache.y_c.transpose();
        grads.fc_bias += d_u;
        Eigen::VectorXd d_yc = model.fc_weight.transpose() * d_u;

        auto d_trend_inputs =
            lstm_backward(model.trend_lstm, cache.trend, d_yc.segment(0, hidden), grads.trend);
        for (std::size_t t = 0; t < d_trend_inputs.size(); ++t) {
            mgc_backward(model, cache.trend_frames[t], d_trend_inputs[t], grads);
        }
        if (model.period_window > 0) {
            auto d_period_inputs = lstm_backward(model.period_lstm, cache.period,
                                                 d_yc.segment(hidden, hidden), grads.period);
            for (std::size_t t = 0; t < d_period_inputs.size(); ++t) {
                mgc_backward(model, cache.period_frames[t], d_period_inputs[t], grads);
            }
        }
    }

    if (!std::isfinite(loss) || !std::isfinite(grads.squared_norm())) {
        throw NumericError("neural: non-finite loss or gradient in backward pass");
    }
    return {loss, std::move(grads)};
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw DataError("neural: learning_rate must be a finite non-negative value");
    }
    if (epochs < 1) throw DataError("neural: epochs must be >= 1");
    if (batch_size < 1) throw DataError("neural: batch_size must be >= 1");
    if (gradient_clip && !(*gradient_clip > 0.0)) {
        throw DataError("neural: gradient_clip must be positive when set");
    }
}

TrainResult train(MotifGcrnnModel& model, const Eigen::MatrixXd& normalized_series,
                  std::span<const TrainingWindow> windows, const TrainConfig& config) {
    config.validate();
    model.validate();
    if (windows.empty()) throw DataError("neural: training needs at least one window");

    Rng rng(config.seed);
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    result.epoch_mean_loss.reserve(static_cast<std::size_t>(config.epochs));
    std::vector<TrainingWindow> batch;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size();
             begin += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = begin; i < end; ++i) batch.push_back(windows[order[i]]);

            double loss = 0.0;
            ModelGradients grads;
            try {
                std::tie(loss, grads) = backward(model, normalized_series, batch);
            } catch (const NumericError& e) {
                throw NumericError("neural: training diverged at epoch " +
                                   std::to_string(epoch + 1) + " (" + e.what() +
                                   "); reduce learning_rate or enable gradient_clip");
            }
            if (!std::isfinite(loss)) {
                throw NumericError(
                    "neural: training diverged (non-finite loss) at epoch " +
                    std::to_string(epoch + 1) +
                    "; reduce learning_rate or enable gradient_clip");
            }
            epoch_loss += loss;

            if (config.gradient_clip) {
                const double norm = std::sqrt(grads.squared_norm());
                if (norm > *config.gradient_clip) {
                    grads.scale(*config.gradient_clip / norm);
                }
            }
            sgd_update(model, grads, config.learning_rate);
        }
        result.epoch_mean_loss.push_back(epoch_loss / static_cast<double>(windows.size()));
    }

    for (const auto& [name, values] : parameter_views(model)) {
        if (!all_finite(values)) {
            throw NumericError("neural: training diverged (non-finite parameter " + name +
                               "); reduce learning_rate or enable gradient_clip");
        }
    }
    return result;
}

std::vector<std::pair<std::string, std::span<double>>> parameter_views(MotifGcrnnModel& model) {
    std::vector<std::pair<std::string, std::span<double>>> views;
    for (std::size_t l = 0; l < model.mgc_layers.size(); ++l) {
        auto& layer = model.mgc_layers[l];
        for (std::size_t k = 0; k < layer.coefficients.size(); ++k) {
            auto& theta = layer.coefficients[k];
            views.emplace_back(
                "mgc" + std::to_string(l) + ".theta" + std::to_string(k),
                std::span<double>(theta.data(), static_cast<std::size_t>(theta.size())));
        }
    }
    const auto add = [&views](const std::string& name, auto& m) {
        views.emplace_back(name,
                           std::span<double>(m.data(), static_cast<std::size_t>(m.size())));
    };
    add("trend.w_input", model.trend_lstm.w_input);
    add("trend.w_hidden", model.trend_lstm.w_hidden);
    add("trend.bias", model.trend_lstm.bias);
    add("period.w_input", model.period_lstm.w_input);
    add("period.w_hidden", model.period_lstm.w_hidden);
    add("period.bias", model.period_lstm.bias);
    add("fc.weight", model.fc_weight);
    add("fc.bias", model.fc_bias);
    return views;
}

std::vector<std::pair<std::string, std::span<double>>> gradient_views(ModelGradients& grads) {
    std::vector<std::pair<std::string, std::span<double>>> views;
    for (std::size_t l = 0; l < grads.mgc.size(); ++l) {
        for (std::size_t k = 0; k < grads.mgc[l].size(); ++k) {
            auto& theta = grads.mgc[l][k];
            views.emplace_back(
                "mgc" + std::to_string(l) + ".theta" + std::to_string(k),
                std::span<double>(theta.data(), static_cast<std::size_t>(theta.size())));
        }
    }
    const auto add = [&views](const std::string& name, auto& m) {
        views.emplace_back(name,
                           std::span<double>(m.data(), static_cast<std::size_t>(m.size())));
    };
    add("trend.w_input", grads.trend.w_input);
    add("trend.w_hidden", grads.trend.w_hidden);
    add("trend.bias", grads.trend.bias);
    add("period.w_input", grads.period.w_input);
    add("period.w_hidden", grads.period.w_hidden);
    add("period.bias", grads.period.bias);
    add("fc.weight", grads.fc_weight);
    add("fc.bias", grads.fc_bias);
    return views;
}

}  // namespace motifcast::neural
