#include "motifcast/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "motifcast/common.hpp"

namespace motifcast::cli {
namespace {

using nlohmann::json;

void check_keys(const json& object, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        bool ok = false;
        for (const char* name : allowed) {
            if (key == name) {
                ok = true;
                break;
            }
        }
        if (!ok) throw DataError("config: unknown key '" + key + "' in " + where);
    }
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("config: cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("config: invalid JSON in '" + path.string() + "': " + e.what());
    }

    check_keys(j, {"version", "paths", "model", "wavelet", "train", "arma", "split", "metrics",
                   "threads"},
               path.string());
    if (j.value("version", 0) != 1) {
        throw DataError("config: '" + path.string() + "' must declare \"version\": 1");
    }

    RunConfig config;
    try {
        if (j.contains("paths")) {
            const json& paths = j["paths"];
            check_keys(paths, {"graph", "matrix", "records", "output"}, "paths");
            config.graph_path = paths.value("graph", "");
            config.matrix_path = paths.value("matrix", "");
            config.records_path = paths.value("records", "");
            config.output_dir = paths.value("output", "");
        }
        if (j.contains("model")) {
            const json& model = j["model"];
            check_keys(model,
                       {"cheb_order", "mgc_layers", "mgc_filters", "lstm_hidden", "trend_window",
                        "period_window"},
                       "model");
            auto& shape = config.pipeline.shape;
            shape.cheb_order = model.value("cheb_order", shape.cheb_order);
            shape.mgc_layers = model.value("mgc_layers", shape.mgc_layers);
            shape.mgc_filters = model.value("mgc_filters", shape.mgc_filters);
            shape.lstm_hidden = model.value("lstm_hidden", shape.lstm_hidden);
            config.pipeline.trend_window =
                model.value("trend_window", config.pipeline.trend_window);
            config.pipeline.period_window =
                model.value("period_window", config.pipeline.period_window);
        }
        if (j.contains("wavelet")) {
            const json& wave = j["wavelet"];
            check_keys(wave, {"level", "name", "boundary"}, "wavelet");
            config.pipeline.level = wave.value("level", config.pipeline.level);
            config.pipeline.wavelet_name = wave.value("name", config.pipeline.wavelet_name);
            config.pipeline.boundary = wavelet::boundary_mode_from_string(
                wave.value("boundary", to_string(config.pipeline.boundary)));
        }
        if (j.contains("train")) {
            const json& train = j["train"];
            check_keys(train,
                       {"learning_rate", "epochs", "batch_size", "seed", "gradient_clip"},
                       "train");
            auto& t = config.pipeline.train;
            t.learning_rate = train.value("learning_rate", t.learning_rate);
            t.epochs = train.value("epochs", t.epochs);
            t.batch_size = train.value("batch_size", t.batch_size);
            t.seed = train.value("seed", t.seed);
            if (train.contains("gradient_clip")) {
                if (train["gradient_clip"].is_null()) {
                    t.gradient_clip.reset();
                } else {
                    t.gradient_clip = train["gradient_clip"].get<double>();
                }
            }
        }
        if (j.contains("arma")) {
            const json& arma_cfg = j["arma"];
            check_keys(arma_cfg, {"max_p", "max_q"}, "arma");
            config.pipeline.arma_max_p = arma_cfg.value("max_p", config.pipeline.arma_max_p);
            config.pipeline.arma_max_q = arma_cfg.value("max_q", config.pipeline.arma_max_q);
        }
        if (j.contains("split")) {
            check_keys(j["split"], {"training_days"}, "split");
            config.pipeline.training_days =
                j["split"].value("training_days", config.pipeline.training_days);
        }
        if (j.contains("metrics")) {
            check_keys(j["metrics"], {"eps_mape"}, "metrics");
            config.pipeline.eps_mape = j["metrics"].value("eps_mape", config.pipeline.eps_mape);
        }
        config.pipeline.threads = j.value("threads", config.pipeline.threads);
    } catch (const json::exception& e) {
        throw DataError("config: invalid value in '" + path.string() + "': " + e.what());
    }
    config.pipeline.validate();
    return config;
}

void RunConfig::save(const std::filesystem::path& path) const {
    json j;
    j["version"] = 1;
    j["paths"] = {{"graph", graph_path},
                  {"matrix", matrix_path},
                  {"records", records_path},
                  {"output", output_dir}};
    j["model"] = {{"cheb_order", pipeline.shape.cheb_order},
                  {"mgc_layers", pipeline.shape.mgc_layers},
                  {"mgc_filters", pipeline.shape.mgc_filters},
                  {"lstm_hidden", pipeline.shape.lstm_hidden},
                  {"trend_window", pipeline.trend_window},
                  {"period_window", pipeline.period_window}};
    j["wavelet"] = {{"level", pipeline.level},
                    {"name", pipeline.wavelet_name},
                    {"boundary", to_string(pipeline.boundary)}};
    j["train"] = {{"learning_rate", pipeline.train.learning_rate},
                  {"epochs", pipeline.train.epochs},
                  {"batch_size", pipeline.train.batch_size},
                  {"seed", pipeline.train.seed},
                  {"gradient_clip", pipeline.train.gradient_clip
                                        ? json(*pipeline.train.gradient_clip)
                                        : json(nullptr)}};
    j["arma"] = {{"max_p", pipeline.arma_max_p}, {"max_q", pipeline.arma_max_q}};
    j["split"] = {{"training_days", pipeline.training_days}};
    j["metrics"] = {{"eps_mape", pipeline.eps_mape}};
    j["threads"] = pipeline.threads;

    std::ofstream out(path);
    if (!out) throw DataError("config: cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace motifcast::cli
