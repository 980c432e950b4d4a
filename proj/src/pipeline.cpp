#include "motifcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "motifcast/common.hpp"

namespace motifcast::pipeline {
namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw DataError("pipeline: " + message);
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const DataError& e) {
        throw DataError("[" + name + "] " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("[" + name + "] " + e.what());
    }
}

// Deterministic data-parallel loop: worker w owns a contiguous index range and
// writes only its own slots.
template <typename Fn>
void parallel_over(int count, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::string> errors(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        const int begin = static_cast<int>(static_cast<long long>(count) * w / threads);
        const int end = static_cast<int>(static_cast<long long>(count) * (w + 1) / threads);
        pool.emplace_back([&, begin, end, w] {
            try {
                fn(begin, end);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(w)] = e.what();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const std::string& e : errors) {
        if (!e.empty()) throw DataError(e);
    }
}

std::vector<std::vector<double>> rows_of(const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index t = 0; t < m.cols(); ++t) {
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] = m(i, t);
        }
    }
    return rows;
}

neural::TrainingWindow to_training_window(const WindowSample& w) {
    return neural::TrainingWindow{w.trend_times, w.period_times, w.target_time};
}

// Trains a fresh network on an N x T_train series (low band for the hybrid,
// raw speeds for the network baselines).
neural::MotifGcrnnModel train_network(const Eigen::MatrixXd& training_series,
                                      const roadgraph::GraphLaplacian& laplacian,
                                      const neural::ModelShape& shape,
                                      const PipelineConfig& config,
                                      std::vector<double>* loss_history) {
    const int intervals_per_day = static_cast<int>(training_series.cols()) / config.training_days;
    neural::Normalizer norm = neural::Normalizer::fit(training_series);
    neural::MotifGcrnnModel model =
        neural::MotifGcrnnModel::create(laplacian, shape, config.trend_window,
                                        config.period_window, std::move(norm), config.train.seed);

    const WindowSet windows = build_windows(config.training_days, config.training_days,
                                            intervals_per_day, config.trend_window,
                                            config.period_window);
    require(!windows.train.empty(),
            "no training window fits m=" + std::to_string(config.trend_window) +
                ", n=" + std::to_string(config.period_window) + " in " +
                std::to_string(config.training_days) + " training days");

    if (config.train.epochs > 0) {
        std::vector<neural::TrainingWindow> train_windows;
        train_windows.reserve(windows.train.size());
        for (const WindowSample& w : windows.train) train_windows.push_back(to_training_window(w));
        const Eigen::MatrixXd normalized = model.norm.normalize_series(training_series);
        neural::TrainResult result =
            neural::train(model, normalized, train_windows, config.train);
        if (loss_history != nullptr) *loss_history = std::move(result.epoch_mean_loss);
    } else if (loss_history != nullptr) {
        loss_history->clear();
    }
    return model;
}

// Network prediction for one window, reading raw frames from a full series.
Eigen::VectorXd predict_network(const neural::MotifGcrnnModel& model,
                                const Eigen::MatrixXd& series, const WindowSample& w) {
    std::vector<Eigen::VectorXd> trend, period;
    trend.reserve(w.trend_times.size());
    period.reserve(w.period_times.size());
    for (int t : w.trend_times) trend.push_back(series.col(t));
    for (int t : w.period_times) period.push_back(series.col(t));
    return neural::forward(model, trend, period);
}

PredictionSet make_prediction_set(const SpeedMatrix& speeds, std::vector<WindowSample> targets) {
    PredictionSet set;
    const int n = speeds.segment_count();
    const int count = static_cast<int>(targets.size());
    set.targets = std::move(targets);
    set.predicted = Eigen::MatrixXd::Zero(n, count);
    set.actual = Eigen::MatrixXd::Zero(n, count);
    set.valid = BoolMask::Constant(n, count, true);
    for (int idx = 0; idx < count; ++idx) {
        const int pt = set.targets[static_cast<std::size_t>(idx)].target_time;
        set.actual.col(idx) = speeds.values.col(pt);
        set.valid.col(idx) = !speeds.missing.col(pt).array();
    }
    return set;
}

std::vector<WindowSample> test_targets(const SpeedMatrix& speeds, const PipelineConfig& config) {
    const WindowSet windows =
        build_windows(speeds.day_count(), config.training_days, speeds.intervals_per_day(),
                      config.trend_window, config.period_window);
    require(!windows.test.empty(),
            "no test window fits m=" + std::to_string(config.trend_window) +
                ", n=" + std::to_string(config.period_window) + " in the test days");
    return windows.test;
}

void check_inputs(const SpeedMatrix& speeds, const PipelineConfig& config) {
    config.validate();
    speeds.validate();
    require(!speeds.has_missing(), "speeds contain missing cells; run imputation first");
    require(speeds.interval_count() % speeds.intervals_per_day() == 0,
            "speed matrix does not span whole days");
    require(config.training_days < speeds.day_count(),
            "training_days must leave at least one test day");
}

}  // namespace

void PipelineConfig::validate() const {
    if (level < 1) throw DataError("pipeline: wavelet level must be >= 1");
    if (trend_window < 1) throw DataError("pipeline: trend window m must be >= 1");
    if (period_window < 0) throw DataError("pipeline: period window n must be >= 0");
    if (training_days < 1) throw DataError("pipeline: training_days must be >= 1");
    if (arma_max_p < 1 || arma_max_q < 1) {
        throw DataError("pipeline: arma_max_p and arma_max_q must be >= 1");
    }
    if (!(eps_mape >= 0.0)) throw DataError("pipeline: eps_mape must be >= 0");
    if (threads < 1) throw DataError("pipeline: threads must be >= 1");
    if (train.epochs < 0) throw DataError("pipeline: epochs must be >= 0");
    if (train.epochs > 0) train.validate();
    wavelet::filter_bank_from_name(wavelet_name);
}

WindowSet build_windows(int total_days, int training_days, int intervals_per_day, int m, int n) {
    if (total_days < 1 || intervals_per_day < 1) {
        throw DataError("pipeline: empty day grid");
    }
    if (m < 1 || n < 0) throw DataError("pipeline: need m >= 1 and n >= 0");
    if (training_days < 0 || training_days > total_days) {
        throw DataError("pipeline: training_days outside the dataset");
    }

    WindowSet set;
    for (int day = n; day < total_days; ++day) {
        for (int interval = m; interval < intervals_per_day; ++interval) {
            WindowSample w;
            w.day = day;
            w.interval = interval;
            w.target_time = day * intervals_per_day + interval;
            for (int i = m; i >= 1; --i) w.trend_times.push_back(w.target_time - i);
            for (int i = n; i >= 1; --i) {
                w.period_times.push_back((day - i) * intervals_per_day + interval);
            }
            if (day < training_days) {
                set.train.push_back(std::move(w));
            } else {
                set.test.push_back(std::move(w));
            }
        }
    }
    return set;
}

BandSet decompose_all(const Eigen::MatrixXd& speeds, int level, const wavelet::FilterBank& bank,
                      wavelet::BoundaryMode mode, int threads) {
    const int n = static_cast<int>(speeds.rows());
    const int total = static_cast<int>(speeds.cols());
    BandSet bands;
    bands.low = Eigen::MatrixXd::Zero(n, total);
    bands.high.assign(static_cast<std::size_t>(level), Eigen::MatrixXd::Zero(n, total));

    const auto rows = rows_of(speeds);
    parallel_over(n, threads, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            wavelet::BandComponents comp;
            try {
                comp = wavelet::band_components(rows[static_cast<std::size_t>(i)], bank, level,
                                                mode);
            } catch (const DataError& e) {
                throw DataError("segment " + std::to_string(i) + ": " + e.what());
            }
            for (int t = 0; t < total; ++t) {
                bands.low(i, t) = comp.low_frequency[static_cast<std::size_t>(t)];
            }
            for (int b = 0; b < level; ++b) {
                for (int t = 0; t < total; ++t) {
                    bands.high[static_cast<std::size_t>(b)](i, t) =
                        comp.high_frequency[static_cast<std::size_t>(b)]
                                           [static_cast<std::size_t>(t)];
                }
            }
        }
    });
    return bands;
}

BandSet decompose_all(const SpeedMatrix& speeds, int level, const wavelet::FilterBank& bank,
                      wavelet::BoundaryMode mode, int threads) {
    speeds.validate();
    require(!speeds.has_missing(), "decompose_all requires imputed data (missing cells remain)");
    return decompose_all(speeds.values, level, bank, mode, threads);
}

EvaluationReport evaluate(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& actuals,
                          const BoolMask& valid, double eps_mape) {
    require(predictions.rows() == actuals.rows() && predictions.cols() == actuals.cols(),
            "evaluate: prediction and actual shapes differ");
    require(predictions.rows() == valid.rows() && predictions.cols() == valid.cols(),
            "evaluate: mask shape differs");

    const int n = static_cast<int>(predictions.rows());
    EvaluationReport report;
    report.per_segment_mae.assign(static_cast<std::size_t>(n), 0.0);
    report.per_segment_mape.assign(static_cast<std::size_t>(n), 0.0);
    report.per_segment_rmse.assign(static_cast<std::size_t>(n), 0.0);

    double abs_sum = 0.0, sq_sum = 0.0, mape_sum = 0.0;
    std::size_t count = 0, mape_count = 0;
    for (int i = 0; i < n; ++i) {
        double seg_abs = 0.0, seg_sq = 0.0, seg_mape = 0.0;
        std::size_t seg_count = 0, seg_mape_count = 0;
        for (int t = 0; t < predictions.cols(); ++t) {
            if (!valid(i, t)) continue;
            const double err = predictions(i, t) - actuals(i, t);
            seg_abs += std::abs(err);
            seg_sq += err * err;
            ++seg_count;
            if (actuals(i, t) >= eps_mape) {
                seg_mape += std::abs(err) / actuals(i, t);
                ++seg_mape_count;
            }
        }
        abs_sum += seg_abs;
        sq_sum += seg_sq;
        mape_sum += seg_mape;
        count += seg_count;
        mape_count += seg_mape_count;
        const std::size_t si = static_cast<std::size_t>(i);
        report.per_segment_mae[si] =
            seg_count > 0 ? seg_abs / static_cast<double>(seg_count)
                          : std::numeric_limits<double>::quiet_NaN();
        report.per_segment_rmse[si] =
            seg_count > 0 ? std::sqrt(seg_sq / static_cast<double>(seg_count))
                          : std::numeric_limits<double>::quiet_NaN();
        report.per_segment_mape[si] =
            seg_mape_count > 0 ? 100.0 * seg_mape / static_cast<double>(seg_mape_count)
                               : std::numeric_limits<double>::quiet_NaN();
    }
    if (count == 0) throw DataError("pipeline: evaluate has no valid points");

    report.sample_count = count;
    report.mape_sample_count = mape_count;
    report.mae = abs_sum / static_cast<double>(count);
    report.rmse = std::sqrt(sq_sum / static_cast<double>(count));
    report.mape_percent =
        mape_count > 0 ? 100.0 * mape_sum / static_cast<double>(mape_count)
                       : std::numeric_limits<double>::quiet_NaN();
    return report;
}

HybridArtifacts fit_hybrid(const SpeedMatrix& speeds, const roadgraph::DirectedRoadGraph& graph,
                           const PipelineConfig& config) {
    check_inputs(speeds, config);
    require(graph.node_count() == speeds.segment_count(),
            "graph node count (" + std::to_string(graph.node_count()) +
                ") must equal segment count (" + std::to_string(speeds.segment_count()) + ")");

    // Everything below reads only the training block.
    const int train_cols = config.training_days * speeds.intervals_per_day();
    const Eigen::MatrixXd training = speeds.values.leftCols(train_cols);
    const wavelet::FilterBank bank = wavelet::filter_bank_from_name(config.wavelet_name);

    const BandSet bands = stage("decompose", [&] {
        return decompose_all(training, config.level, bank, config.boundary, config.threads);
    });

    const roadgraph::GraphLaplacian laplacian = stage("motif-laplacian", [&] {
        return roadgraph::rescaled_motif_laplacian(graph, config.threads);
    });

    HybridArtifacts artifacts;
    artifacts.model = stage("train-network", [&] {
        return train_network(bands.low, laplacian, config.shape, config, &artifacts.loss_history);
    });

    stage("fit-arma", [&] {
        const auto high_rows = [&] {
            std::vector<std::vector<std::vector<double>>> rows;
            for (const auto& band : bands.high) rows.push_back(rows_of(band));
            return rows;
        }();
        artifacts.band_models.assign(static_cast<std::size_t>(speeds.segment_count()), {});
        for (auto& models : artifacts.band_models) {
            models.resize(static_cast<std::size_t>(config.level));
        }
        parallel_over(speeds.segment_count(), config.threads, [&](int begin, int end) {
            for (int i = begin; i < end; ++i) {
                for (int b = 0; b < config.level; ++b) {
                    const auto& series =
                        high_rows[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
                    try {
                        const auto [p, q] =
                            arma::select_orders(series, config.arma_max_p, config.arma_max_q);
                        artifacts.band_models[static_cast<std::size_t>(i)]
                                             [static_cast<std::size_t>(b)] =
                            arma::fit_arma(series, p, q);
                    } catch (const DataError& e) {
                        throw DataError("segment " + std::to_string(i) + ", band D" +
                                        std::to_string(b + 1) + ": " + e.what());
                    }
                }
            }
        });
        return 0;
    });
    return artifacts;
}

PredictionSet predict_hybrid(const HybridArtifacts& artifacts, const SpeedMatrix& speeds,
                             const PipelineConfig& config) {
    check_inputs(speeds, config);
    const int n = speeds.segment_count();
    require(artifacts.model.node_count() == n, "model width does not match the matrix");
    require(static_cast<int>(artifacts.band_models.size()) == n,
            "ARMA models do not match the matrix");

    const wavelet::FilterBank bank = wavelet::filter_bank_from_name(config.wavelet_name);
    PredictionSet out = make_prediction_set(speeds, test_targets(speeds, config));
    const auto series_rows = rows_of(speeds.values);

    const int frame_count = config.trend_window + config.period_window;
    for (std::size_t idx = 0; idx < out.targets.size(); ++idx) {
        const WindowSample& w = out.targets[idx];
        const std::size_t prefix = static_cast<std::size_t>(w.target_time);

        // Causal prefix decomposition: band values for this target are
        // computed from samples strictly before it.
        Eigen::MatrixXd low_frames(n, frame_count);
        Eigen::VectorXd high_forecast = Eigen::VectorXd::Zero(n);
        parallel_over(n, config.threads, [&](int begin, int end) {
            for (int i = begin; i < end; ++i) {
                const std::span<const double> head{series_rows[static_cast<std::size_t>(i)].data(),
                                                   prefix};
                const wavelet::BandComponents comp =
                    wavelet::band_components(head, bank, config.level, config.boundary);
                int col = 0;
                for (int t : w.trend_times) {
                    low_frames(i, col++) = comp.low_frequency[static_cast<std::size_t>(t)];
                }
                for (int t : w.period_times) {
                    low_frames(i, col++) = comp.low_frequency[static_cast<std::size_t>(t)];
                }
                double total = 0.0;
                for (int b = 0; b < config.level; ++b) {
                    const auto& band = comp.high_frequency[static_cast<std::size_t>(b)];
                    const arma::ArmaModel& model =
                        artifacts.band_models[static_cast<std::size_t>(i)]
                                             [static_cast<std::size_t>(b)];
                    const std::vector<double> residuals = arma::one_step_residuals(model, band);
                    total += arma::forecast_one_step(model, band, residuals);
                }
                high_forecast(i) = total;
            }
        });

        std::vector<Eigen::VectorXd> trend, period;
        for (int c = 0; c < config.trend_window; ++c) trend.push_back(low_frames.col(c));
        for (int c = 0; c < config.period_window; ++c) {
            period.push_back(low_frames.col(config.trend_window + c));
        }
        const Eigen::VectorXd low_pred = neural::forward(artifacts.model, trend, period);
        out.predicted.col(static_cast<Eigen::Index>(idx)) = low_pred + high_forecast;
    }
    return out;
}

RunOutput run_hybrid(const SpeedMatrix& speeds, const roadgraph::DirectedRoadGraph& graph,
                     const PipelineConfig& config) {
    RunOutput out;
    out.artifacts = fit_hybrid(speeds, graph, config);
    out.predictions = stage("predict", [&] { return predict_hybrid(out.artifacts, speeds, config); });
    out.report = stage("evaluate", [&] {
        return evaluate(out.predictions.predicted, out.predictions.actual, out.predictions.valid,
                        config.eps_mape);
    });
    return out;
}

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Persistence: return "persistence";
        case BaselineKind::HistoricalAverage: return "historical_average";
        case BaselineKind::LstmOnly: return "lstm_only";
        case BaselineKind::ArmaOnly: return "arma_only";
        case BaselineKind::MotifGcrnnNoDwt: return "motif_gcrnn_no_dwt";
    }
    return "?";
}

BaselineKind baseline_from_string(const std::string& name) {
    for (BaselineKind kind :
         {BaselineKind::Persistence, BaselineKind::HistoricalAverage, BaselineKind::LstmOnly,
          BaselineKind::ArmaOnly, BaselineKind::MotifGcrnnNoDwt}) {
        if (to_string(kind) == name) return kind;
    }
    throw DataError("pipeline: unknown baseline '" + name + "'");
}

BaselineOutput run_baseline(const SpeedMatrix& speeds, const roadgraph::DirectedRoadGraph* graph,
                            const PipelineConfig& config, BaselineKind kind) {
    check_inputs(speeds, config);
    const int n = speeds.segment_count();
    const int intervals_per_day = speeds.intervals_per_day();
    const int train_cols = config.training_days * intervals_per_day;

    BaselineOutput out;
    out.predictions = make_prediction_set(speeds, test_targets(speeds, config));
    auto& pred = out.predictions;

    switch (kind) {
        case BaselineKind::Persistence: {
            for (std::size_t idx = 0; idx < pred.targets.size(); ++idx) {
                pred.predicted.col(static_cast<Eigen::Index>(idx)) =
                    speeds.values.col(pred.targets[idx].target_time - 1);
            }
            break;
        }
        case BaselineKind::HistoricalAverage: {
            Eigen::MatrixXd averages = Eigen::MatrixXd::Zero(n, intervals_per_day);
            for (int day = 0; day < config.training_days; ++day) {
                averages += speeds.values.middleCols(day * intervals_per_day, intervals_per_day);
            }
            averages /= static_cast<double>(config.training_days);
            for (std::size_t idx = 0; idx < pred.targets.size(); ++idx) {
                pred.predicted.col(static_cast<Eigen::Index>(idx)) =
                    averages.col(pred.targets[idx].interval);
            }
            break;
        }
        case BaselineKind::ArmaOnly: {
            const auto series_rows = rows_of(speeds.values);
            parallel_over(n, config.threads, [&](int begin, int end) {
                for (int i = begin; i < end; ++i) {
                    const auto& row = series_rows[static_cast<std::size_t>(i)];
                    const std::span<const double> training{row.data(),
                                                           static_cast<std::size_t>(train_cols)};
                    arma::ArmaModel model;
                    try {
                        const auto [p, q] =
                            arma::select_orders(training, config.arma_max_p, config.arma_max_q);
                        model = arma::fit_arma(training, p, q);
                    } catch (const DataError& e) {
                        throw DataError("segment " + std::to_string(i) + ": " + e.what());
                    }
                    // The raw series is fixed, so the causal residual
                    // recursion over the whole series matches recomputing it
                    // per prefix.
                    const std::vector<double> residuals = arma::one_step_residuals(model, row);
                    for (std::size_t idx = 0; idx < pred.targets.size(); ++idx) {
                        const std::size_t prefix =
                            static_cast<std::size_t>(pred.targets[idx].target_time);
                        pred.predicted(i, static_cast<Eigen::Index>(idx)) =
                            arma::forecast_one_step(model, {row.data(), prefix},
                                                    {residuals.data(), prefix});
                    }
                }
            });
            break;
        }
        case BaselineKind::LstmOnly:
        case BaselineKind::MotifGcrnnNoDwt: {
            neural::ModelShape shape = config.shape;
            roadgraph::GraphLaplacian laplacian;
            if (kind == BaselineKind::LstmOnly) {
                shape.mgc_layers = 0;
                laplacian.matrix = Eigen::MatrixXd::Identity(n, n);
                laplacian.lambda_max = 1.0;
            } else {
                require(graph != nullptr, "motif_gcrnn_no_dwt needs the road graph");
                require(graph->node_count() == n, "graph node count must equal segment count");
                laplacian = roadgraph::rescaled_motif_laplacian(*graph, config.threads);
            }
            const Eigen::MatrixXd training = speeds.values.leftCols(train_cols);
            const neural::MotifGcrnnModel model =
                train_network(training, laplacian, shape, config, nullptr);
            for (std::size_t idx = 0; idx < pred.targets.size(); ++idx) {
                pred.predicted.col(static_cast<Eigen::Index>(idx)) =
                    predict_network(model, speeds.values, pred.targets[idx]);
            }
            break;
        }
    }

    out.report = evaluate(pred.predicted, pred.actual, pred.valid, config.eps_mape);
    return out;
}

std::vector<SweepRow> parameter_sweep(const SpeedMatrix& speeds,
                                      const roadgraph::DirectedRoadGraph& graph,
                                      const PipelineConfig& config, const std::string& axis,
                                      std::span<const int> values) {
    require(!values.empty(), "sweep needs at least one value");
    std::vector<SweepRow> rows;
    for (int value : values) {
        PipelineConfig variant = config;
        if (axis == "K") {
            variant.shape.cheb_order = value;
        } else if (axis == "m") {
            variant.trend_window = value;
        } else if (axis == "n") {
            variant.period_window = value;
        } else {
            throw DataError("pipeline: unknown sweep axis '" + axis + "' (use K, m or n)");
        }
        const RunOutput run = run_hybrid(speeds, graph, variant);
        rows.push_back(SweepRow{axis, value, run.report});
    }
    return rows;
}

}  // namespace motifcast::pipeline
