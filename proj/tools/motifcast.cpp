#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "motifcast/common.hpp"
#include "motifcast/config.hpp"
#include "motifcast/data.hpp"
#include "motifcast/io.hpp"
#include "motifcast/pipeline.hpp"
#include "motifcast/roadgraph.hpp"

namespace {

namespace fs = std::filesystem;
using namespace motifcast;

fs::path ensure_output_dir(const std::string& dir) {
    if (dir.empty()) throw UsageError("an output directory is required (--out)");
    fs::path path(dir);
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
    return path;
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw UsageError(what + " is required");
    if (!fs::exists(path)) throw DataError(what + " '" + path + "' does not exist");
}

std::vector<std::string> graph_segment_ids(const roadgraph::DirectedRoadGraph& graph) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(graph.node_count()));
    for (int i = 0; i < graph.node_count(); ++i) ids.push_back(std::to_string(i));
    return ids;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("cannot parse integer '" + item + "' in --values");
        }
    }
    if (values.empty()) throw UsageError("--values must list at least one integer");
    return values;
}

struct CommonArgs {
    std::string config_path;
    std::string matrix_path;
    std::string graph_path;
    std::string output_dir;
    std::string seed;     // empty = keep config value
    int threads = 0;      // 0 = keep config value

    cli::RunConfig resolve() const {
        cli::RunConfig config = config_path.empty() ? cli::RunConfig::defaults()
                                                    : cli::RunConfig::from_file(config_path);
        if (!matrix_path.empty()) config.matrix_path = matrix_path;
        if (!graph_path.empty()) config.graph_path = graph_path;
        if (!output_dir.empty()) config.output_dir = output_dir;
        if (!seed.empty()) config.pipeline.train.seed = std::stoull(seed);
        if (threads > 0) config.pipeline.threads = threads;
        config.pipeline.validate();
        return config;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_graph = true) {
    cmd->add_option("--config", args.config_path, "experiment config JSON");
    cmd->add_option("--matrix", args.matrix_path, "speed matrix CSV");
    if (with_graph) cmd->add_option("--graph", args.graph_path, "edge-list file");
    cmd->add_option("--out", args.output_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the training seed");
    cmd->add_option("--threads", args.threads, "parallelism degree (default 1, bit-reproducible)");
}

int cmd_ingest(const std::string& records_path, const std::string& graph_path,
               const std::string& out_dir, int interval_minutes) {
    require_file(records_path, "--records");
    require_file(graph_path, "--graph");
    const fs::path out = ensure_output_dir(out_dir);

    const auto graph = roadgraph::load_edge_list(graph_path);
    const auto records = io::load_records_csv(records_path);
    const auto result = data::aggregate(records, interval_minutes, graph_segment_ids(graph));
    if (result.unknown_segment_records > 0) {
        std::cerr << "warning: " << result.unknown_segment_records
                  << " records referenced unknown segments and were not aggregated\n";
    }
    const auto imputed = data::impute(result.matrix);
    io::save_speed_matrix(imputed, out / "speeds.csv");
    std::cout << "wrote " << (out / "speeds.csv").string() << " (" << imputed.segment_count()
              << " segments x " << imputed.interval_count() << " intervals)\n";
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& graph_path,
              const std::string& out_dir) {
    require_file(spec_path, "--spec");
    require_file(graph_path, "--graph");
    const fs::path out = ensure_output_dir(out_dir);

    const auto spec = io::load_synthetic_spec(spec_path);
    const auto graph = roadgraph::load_edge_list(graph_path);
    const auto result = data::generate_synthetic(spec, graph);
    io::save_speed_matrix(result.matrix, out / "speeds.csv");
    std::cout << "wrote " << (out / "speeds.csv").string() << " (clipping rate "
              << result.clipping_rate << ")\n";
    return 0;
}

int cmd_decompose(const CommonArgs& args, bool verify) {
    cli::RunConfig config = args.resolve();
    require_file(config.matrix_path, "--matrix");
    const fs::path out = ensure_output_dir(config.output_dir);

    const auto matrix = io::load_speed_matrix(config.matrix_path);
    const auto bank = wavelet::filter_bank_from_name(config.pipeline.wavelet_name);
    const auto bands = pipeline::decompose_all(matrix, config.pipeline.level, bank,
                                               config.pipeline.boundary,
                                               config.pipeline.threads);
    io::save_matrix_csv(bands.low, matrix.segment_ids,
                        out / ("band_rA" + std::to_string(config.pipeline.level) + ".csv"));
    for (std::size_t b = 0; b < bands.high.size(); ++b) {
        io::save_matrix_csv(bands.high[b], matrix.segment_ids,
                            out / ("band_rD" + std::to_string(b + 1) + ".csv"));
    }
    if (verify) {
        Eigen::MatrixXd sum = bands.low;
        for (const auto& band : bands.high) sum += band;
        const double max_err = (sum - matrix.values).cwiseAbs().maxCoeff();
        if (max_err >= 1e-8) {
            throw NumericError("band additivity check failed: max |sum - original| = " +
                               std::to_string(max_err));
        }
        std::cout << "band additivity verified (max abs error " << max_err << ")\n";
    }
    std::cout << "wrote " << (bands.high.size() + 1) << " band files to " << out.string() << "\n";
    return 0;
}

int cmd_train(const CommonArgs& args) {
    cli::RunConfig config = args.resolve();
    require_file(config.matrix_path, "--matrix");
    require_file(config.graph_path, "--graph");
    const fs::path out = ensure_output_dir(config.output_dir);

    const auto matrix = io::load_speed_matrix(config.matrix_path);
    const auto graph = roadgraph::load_edge_list(config.graph_path);
    const auto artifacts = pipeline::fit_hybrid(matrix, graph, config.pipeline);

    io::save_checkpoint(artifacts.model, out / "checkpoint.bin");
    io::save_arma_models(artifacts.band_models, matrix.segment_ids, out / "arma_models.json");
    io::save_loss_history_csv(artifacts.loss_history, out / "loss_history.csv");
    config.save(out / "config_used.json");
    std::cout << "wrote checkpoint.bin, arma_models.json, loss_history.csv to " << out.string()
              << "\n";
    if (!artifacts.loss_history.empty()) {
        std::cout << "final epoch mean loss: " << artifacts.loss_history.back() << "\n";
    }
    return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& checkpoint_path,
                const std::string& arma_path) {
    cli::RunConfig config = args.resolve();
    require_file(config.matrix_path, "--matrix");
    require_file(checkpoint_path, "--checkpoint");
    require_file(arma_path, "--arma");
    const fs::path out = ensure_output_dir(config.output_dir);

    const auto matrix = io::load_speed_matrix(config.matrix_path);
    pipeline::HybridArtifacts artifacts;
    artifacts.model = io::load_checkpoint(checkpoint_path);
    artifacts.band_models = io::load_arma_models(arma_path);
    // Window sizes travel with the checkpoint.
    config.pipeline.trend_window = artifacts.model.trend_window;
    config.pipeline.period_window = artifacts.model.period_window;

    const auto predictions = pipeline::predict_hybrid(artifacts, matrix, config.pipeline);
    io::save_predictions_csv(predictions, matrix.segment_ids, out / "predictions.csv");
    std::cout << "wrote " << (out / "predictions.csv").string() << " ("
              << predictions.targets.size() << " targets)\n";
    return 0;
}

int cmd_evaluate(const std::string& predictions_path, const std::string& out_dir,
                 double eps_mape) {
    require_file(predictions_path, "--predictions");
    const fs::path out = ensure_output_dir(out_dir);

    std::vector<std::string> segment_ids;
    const auto predictions = io::load_predictions_csv(predictions_path, &segment_ids);
    const auto report = pipeline::evaluate(predictions.predicted, predictions.actual,
                                           predictions.valid, eps_mape);
    io::save_report_json(report, segment_ids, out / "report.json");
    std::cout << "MAE " << report.mae << "  MAPE " << report.mape_percent << "%  RMSE "
              << report.rmse << " over " << report.sample_count << " points\n";
    std::cout << "wrote " << (out / "report.json").string() << "\n";
    return 0;
}

int cmd_run(const CommonArgs& args) {
    cli::RunConfig config = args.resolve();
    require_file(config.matrix_path, "--matrix");
    require_file(config.graph_path, "--graph");
    const fs::path out = ensure_output_dir(config.output_dir);

    const auto matrix = io::load_speed_matrix(config.matrix_path);
    const auto graph = roadgraph::load_edge_list(config.graph_path);
    const auto run = pipeline::run_hybrid(matrix, graph, config.pipeline);

    io::save_checkpoint(run.artifacts.model, out / "checkpoint.bin");
    io::save_arma_models(run.artifacts.band_models, matrix.segment_ids, out / "arma_models.json");
    io::save_loss_history_csv(run.artifacts.loss_history, out / "loss_history.csv");
    io::save_predictions_csv(run.predictions, matrix.segment_ids, out / "predictions.csv");
    io::save_report_json(run.report, matrix.segment_ids, out / "report.json");
    config.save(out / "config_used.json");
    std::cout << "hybrid: MAE " << run.report.mae << "  MAPE " << run.report.mape_percent
              << "%  RMSE " << run.report.rmse << "\n";
    return 0;
}

int cmd_baseline(const CommonArgs& args, const std::string& kind_name) {
    cli::RunConfig config = args.resolve();
    require_file(config.matrix_path, "--matrix");
    const fs::path out = ensure_output_dir(config.output_dir);

    const auto kind = pipeline::baseline_from_string(kind_name);
    const auto matrix = io::load_speed_matrix(config.matrix_path);

    std::optional<roadgraph::DirectedRoadGraph> graph;
    if (kind == pipeline::BaselineKind::MotifGcrnnNoDwt) {
        require_file(config.graph_path, "--graph");
        graph.emplace(roadgraph::load_edge_list(config.graph_path));
    }
    const auto result = pipeline::run_baseline(matrix, graph ? &*graph : nullptr, config.pipeline,
                                               kind);
    io::save_predictions_csv(result.predictions, matrix.segment_ids,
                             out / (kind_name + "_predictions.csv"));
    io::save_report_json(result.report, matrix.segment_ids, out / (kind_name + "_report.json"));
    std::cout << kind_name << ": MAE " << result.report.mae << "  MAPE "
              << result.report.mape_percent << "%  RMSE " << result.report.rmse << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis, const std::string& values_text,
              bool force) {
    cli::RunConfig config = args.resolve();
    require_file(config.matrix_path, "--matrix");
    require_file(config.graph_path, "--graph");
    const fs::path out = ensure_output_dir(config.output_dir);

    const std::vector<int> values = parse_int_list(values_text);
    if (!force) {
        // Default sweep ranges: K in 1..5, m and n in 1..8.
        const int lo = 1;
        const int hi = axis == "K" ? 5 : 8;
        for (int v : values) {
            if (v < lo || v > hi) {
                throw UsageError("value " + std::to_string(v) + " is outside the default " +
                                 axis + " range " + std::to_string(lo) + ".." +
                                 std::to_string(hi) + " (use --force to override)");
            }
        }
    }

    const auto matrix = io::load_speed_matrix(config.matrix_path);
    const auto graph = roadgraph::load_edge_list(config.graph_path);
    const auto rows = pipeline::parameter_sweep(matrix, graph, config.pipeline, axis, values);
    io::save_sweep_csv(rows, out / "sweep.csv");
    std::cout << "wrote " << (out / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid traffic speed forecasting: wavelet bands, a motif-based graph "
                 "convolutional recurrent network for the low band, ARMA for the high bands."};
    app.require_subcommand(1);

    std::string records_path, spec_path, predictions_path, checkpoint_path, arma_path;
    std::string baseline_kind = "persistence", sweep_axis = "K", sweep_values;
    int interval_minutes = 15;
    double eps_mape = 1.0;
    bool verify = false, force = false;

    CommonArgs ingest_args, synth_args, decompose_args, train_args, predict_args, run_args,
        baseline_args, sweep_args;

    CLI::App* ingest = app.add_subcommand("ingest", "aggregate GPS speed records into a matrix");
    ingest->add_option("--records", records_path, "records CSV")->required();
    ingest->add_option("--graph", ingest_args.graph_path, "edge-list file")->required();
    ingest->add_option("--out", ingest_args.output_dir, "output directory")->required();
    ingest->add_option("--interval", interval_minutes, "interval length in minutes (default 15)");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic benchmark matrix");
    synth->add_option("--spec", spec_path, "synthetic spec JSON")->required();
    synth->add_option("--graph", synth_args.graph_path, "edge-list file")->required();
    synth->add_option("--out", synth_args.output_dir, "output directory")->required();

    CLI::App* decompose = app.add_subcommand("decompose", "write per-band component matrices");
    add_common(decompose, decompose_args, /*with_graph=*/false);
    decompose->add_flag("--verify", verify, "check that the bands sum back to the input");

    CLI::App* train = app.add_subcommand("train", "fit the hybrid model on the training days");
    add_common(train, train_args);

    CLI::App* predict = app.add_subcommand("predict", "rolling one-step forecasts over test days");
    add_common(predict, predict_args);
    predict->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    predict->add_option("--arma", arma_path, "fitted ARMA models JSON")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a predictions file");
    evaluate->add_option("--predictions", predictions_path, "predictions CSV")->required();
    evaluate->add_option("--out", run_args.output_dir, "output directory")->required();
    evaluate->add_option("--eps-mape", eps_mape, "exclude actuals below this from MAPE");

    CLI::App* run = app.add_subcommand("run", "train, predict and evaluate in one go");
    add_common(run, run_args);

    CLI::App* baseline = app.add_subcommand("baseline", "run a reference forecaster");
    add_common(baseline, baseline_args);
    baseline->add_option("--kind", baseline_kind,
                         "persistence | historical_average | lstm_only | arma_only | "
                         "motif_gcrnn_no_dwt");

    CLI::App* sweep = app.add_subcommand("sweep", "re-run the hybrid over one parameter axis");
    add_common(sweep, sweep_args);
    sweep->add_option("--axis", sweep_axis, "K | m | n")->required();
    sweep->add_option("--values", sweep_values, "comma-separated integers")->required();
    sweep->add_flag("--force", force, "allow values outside the default ranges");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*ingest) {
            return cmd_ingest(records_path, ingest_args.graph_path, ingest_args.output_dir,
                              interval_minutes);
        }
        if (*synth) return cmd_synth(spec_path, synth_args.graph_path, synth_args.output_dir);
        if (*decompose) return cmd_decompose(decompose_args, verify);
        if (*train) return cmd_train(train_args);
        if (*predict) return cmd_predict(predict_args, checkpoint_path, arma_path);
        if (*evaluate) return cmd_evaluate(predictions_path, run_args.output_dir, eps_mape);
        if (*run) return cmd_run(run_args);
        if (*baseline) return cmd_baseline(baseline_args, baseline_kind);
        if (*sweep) return cmd_sweep(sweep_args, sweep_axis, sweep_values, force);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
