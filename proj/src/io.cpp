#include "motifcast/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "motifcast/common.hpp"

namespace motifcast::io {
namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw DataError("io: cannot parse number '" + text + "' in " + where);
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("io: cannot write '" + path.string() + "'");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("io: cannot open '" + path.string() + "'");
    return in;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".meta.json");
    return p;
}

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
        if (!ok) throw DataError("io: unknown key '" + key + "' in " + where);
    }
}

json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("io: invalid JSON in '" + path.string() + "': " + e.what());
    }
    return j;
}

void append_doubles(std::string& out, const double* data, std::size_t count) {
    out.append(reinterpret_cast<const char*>(data), count * sizeof(double));
}

void read_doubles(const std::string& bytes, std::size_t& offset, double* data,
                  std::size_t count) {
    const std::size_t need = count * sizeof(double);
    if (offset + need > bytes.size()) throw DataError("io: truncated checkpoint payload");
    std::memcpy(data, bytes.data() + offset, need);
    offset += need;
}

}  // namespace

void save_speed_matrix(const pipeline::SpeedMatrix& matrix,
                       const std::filesystem::path& csv_path) {
    matrix.validate();
    std::ofstream out = open_out(csv_path);
    for (std::size_t i = 0; i < matrix.segment_ids.size(); ++i) {
        if (i > 0) out << ',';
        out << matrix.segment_ids[i];
    }
    out << '\n';
    for (int t = 0; t < matrix.interval_count(); ++t) {
        for (int i = 0; i < matrix.segment_count(); ++i) {
            if (i > 0) out << ',';
            if (!matrix.missing(i, t)) out << format_double(matrix.values(i, t));
        }
        out << '\n';
    }

    json meta;
    meta["version"] = 1;
    meta["start_timestamp"] = matrix.start_timestamp;
    meta["interval_minutes"] = matrix.interval_minutes;
    std::ofstream meta_out = open_out(sidecar_path(csv_path));
    meta_out << meta.dump(2) << '\n';
}

pipeline::SpeedMatrix load_speed_matrix(const std::filesystem::path& csv_path) {
    std::ifstream in = open_in(csv_path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("io: empty matrix file '" + csv_path.string() + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    pipeline::SpeedMatrix matrix;
    matrix.segment_ids = split_csv_line(line);
    const int n = static_cast<int>(matrix.segment_ids.size());
    if (n == 0) throw DataError("io: matrix header has no segment ids");

    std::vector<double> values;
    std::vector<bool> missing;
    int rows = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != n) {
            throw DataError("io: row " + std::to_string(line_no) + " of '" + csv_path.string() +
                            "' has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(n));
        }
        for (const std::string& field : fields) {
            if (field.empty()) {
                values.push_back(0.0);
                missing.push_back(true);
            } else {
                values.push_back(parse_double(field, csv_path.string() + ":" +
                                                         std::to_string(line_no)));
                missing.push_back(false);
            }
        }
        ++rows;
    }
    if (rows == 0) throw DataError("io: matrix '" + csv_path.string() + "' has no data rows");

    matrix.values.resize(n, rows);
    matrix.missing.resize(n, rows);
    for (int t = 0; t < rows; ++t) {
        for (int i = 0; i < n; ++i) {
            matrix.values(i, t) = values[static_cast<std::size_t>(t) * n + i];
            matrix.missing(i, t) = missing[static_cast<std::size_t>(t) * n + i];
        }
    }

    const auto meta_file = sidecar_path(csv_path);
    if (std::filesystem::exists(meta_file)) {
        json meta = parse_json_file(meta_file);
        check_keys(meta, {"version", "start_timestamp", "interval_minutes"}, meta_file.string());
        matrix.start_timestamp = meta.value("start_timestamp", "");
        matrix.interval_minutes = meta.value("interval_minutes", 15);
    } else {
        matrix.start_timestamp = "1970-01-01T00:00:00";
    }
    matrix.validate();
    return matrix;
}

void save_matrix_csv(const Eigen::MatrixXd& values, const std::vector<std::string>& segment_ids,
                     const std::filesystem::path& path) {
    if (static_cast<Eigen::Index>(segment_ids.size()) != values.rows()) {
        throw DataError("io: segment id count does not match matrix rows");
    }
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < segment_ids.size(); ++i) {
        if (i > 0) out << ',';
        out << segment_ids[i];
    }
    out << '\n';
    for (Eigen::Index t = 0; t < values.cols(); ++t) {
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            if (i > 0) out << ',';
            out << format_double(values(i, t));
        }
        out << '\n';
    }
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path,
                                std::vector<std::string>* segment_ids) {
    pipeline::SpeedMatrix m = load_speed_matrix(path);
    if (m.has_missing()) throw DataError("io: '" + path.string() + "' has empty cells");
    if (segment_ids != nullptr) *segment_ids = m.segment_ids;
    return m.values;
}

void save_predictions_csv(const pipeline::PredictionSet& predictions,
                          const std::vector<std::string>& segment_ids,
                          const std::filesystem::path& path) {
    if (static_cast<Eigen::Index>(segment_ids.size()) != predictions.predicted.rows()) {
        throw DataError("io: segment id count does not match predictions");
    }
    std::ofstream out = open_out(path);
    out << "segment_id,day,interval,predicted_speed,actual_speed\n";
    for (std::size_t idx = 0; idx < predictions.targets.size(); ++idx) {
        const pipeline::WindowSample& w = predictions.targets[idx];
        for (Eigen::Index i = 0; i < predictions.predicted.rows(); ++i) {
            out << segment_ids[static_cast<std::size_t>(i)] << ',' << w.day << ',' << w.interval
                << ',' << format_double(predictions.predicted(i, static_cast<Eigen::Index>(idx)))
                << ',';
            if (predictions.valid(i, static_cast<Eigen::Index>(idx))) {
                out << format_double(predictions.actual(i, static_cast<Eigen::Index>(idx)));
            }
            out << '\n';
        }
    }
}

pipeline::PredictionSet load_predictions_csv(const std::filesystem::path& path,
                                             std::vector<std::string>* segment_ids) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("io: empty predictions file");

    struct Row {
        std::string segment;
        int day, interval;
        double predicted;
        bool has_actual;
        double actual;
    };
    std::vector<Row> rows;
    std::vector<std::string> ids;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 5) {
            throw DataError("io: predictions row " + std::to_string(line_no) +
                            " must have 5 fields");
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        Row row;
        row.segment = fields[0];
        row.day = static_cast<int>(parse_double(fields[1], where));
        row.interval = static_cast<int>(parse_double(fields[2], where));
        row.predicted = parse_double(fields[3], where);
        row.has_actual = !fields[4].empty();
        row.actual = row.has_actual ? parse_double(fields[4], where) : 0.0;
        rows.push_back(std::move(row));
        if (std::find(ids.begin(), ids.end(), rows.back().segment) == ids.end()) {
            ids.push_back(rows.back().segment);
        }
    }
    if (rows.empty()) throw DataError("io: predictions file '" + path.string() + "' has no rows");

    std::vector<std::pair<int, int>> targets;
    for (const Row& row : rows) {
        const std::pair<int, int> key{row.day, row.interval};
        if (targets.empty() || targets.back() != key) {
            if (std::find(targets.begin(), targets.end(), key) != targets.end()) {
                throw DataError("io: predictions file interleaves targets");
            }
            targets.push_back(key);
        }
    }

    pipeline::PredictionSet set;
    const int n = static_cast<int>(ids.size());
    const int count = static_cast<int>(targets.size());
    set.predicted = Eigen::MatrixXd::Zero(n, count);
    set.actual = Eigen::MatrixXd::Zero(n, count);
    set.valid = pipeline::BoolMask::Constant(n, count, false);
    for (int idx = 0; idx < count; ++idx) {
        pipeline::WindowSample w;
        w.day = targets[static_cast<std::size_t>(idx)].first;
        w.interval = targets[static_cast<std::size_t>(idx)].second;
        set.targets.push_back(std::move(w));
    }
    for (const Row& row : rows) {
        const auto seg =
            static_cast<int>(std::find(ids.begin(), ids.end(), row.segment) - ids.begin());
        const auto idx = static_cast<int>(
            std::find(targets.begin(), targets.end(), std::pair<int, int>{row.day, row.interval}) -
            targets.begin());
        set.predicted(seg, idx) = row.predicted;
        set.actual(seg, idx) = row.actual;
        set.valid(seg, idx) = row.has_actual;
    }
    if (segment_ids != nullptr) *segment_ids = ids;
    return set;
}

void save_report_json(const pipeline::EvaluationReport& report,
                      const std::vector<std::string>& segment_ids,
                      const std::filesystem::path& path) {
    json j;
    j["version"] = 1;
    j["overall"] = {{"mae", report.mae},
                    {"mape_percent", std::isfinite(report.mape_percent)
                                         ? json(report.mape_percent)
                                         : json(nullptr)},
                    {"rmse", report.rmse},
                    {"sample_count", report.sample_count},
                    {"mape_sample_count", report.mape_sample_count}};
    json segments = json::array();
    for (std::size_t i = 0; i < report.per_segment_mae.size(); ++i) {
        const auto value_or_null = [](double v) {
            return std::isfinite(v) ? json(v) : json(nullptr);
        };
        segments.push_back({{"segment_id", i < segment_ids.size() ? segment_ids[i]
                                                                  : std::to_string(i)},
                            {"mae", value_or_null(report.per_segment_mae[i])},
                            {"mape_percent", value_or_null(report.per_segment_mape[i])},
                            {"rmse", value_or_null(report.per_segment_rmse[i])}});
    }
    j["per_segment"] = std::move(segments);
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void save_sweep_csv(std::span<const pipeline::SweepRow> rows, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "axis,value,mae,mape,rmse\n";
    for (const pipeline::SweepRow& row : rows) {
        out << row.axis << ',' << row.value << ',' << format_double(row.report.mae) << ','
            << format_double(row.report.mape_percent) << ',' << format_double(row.report.rmse)
            << '\n';
    }
}

void save_loss_history_csv(std::span<const double> losses, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < losses.size(); ++e) {
        out << (e + 1) << ',' << format_double(losses[e]) << '\n';
    }
}

std::string serialize_arma_models(const std::vector<std::vector<arma::ArmaModel>>& models,
                                  const std::vector<std::string>& segment_ids) {
    json j;
    j["version"] = 1;
    json records = json::array();
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t b = 0; b < models[i].size(); ++b) {
            const arma::ArmaModel& m = models[i][b];
            records.push_back({{"segment_id", i < segment_ids.size() ? segment_ids[i]
                                                                     : std::to_string(i)},
                               {"band", b + 1},
                               {"p", m.p()},
                               {"q", m.q()},
                               {"c", m.intercept},
                               {"phi", m.ar_coeffs},
                               {"lambda", m.ma_coeffs},
                               {"noise_variance", m.noise_variance},
                               {"mean_only", m.mean_only},
                               {"stationarity_repaired", m.stationarity_repaired}});
        }
    }
    j["models"] = std::move(records);
    return j.dump(2) + "\n";
}

void save_arma_models(const std::vector<std::vector<arma::ArmaModel>>& models,
                      const std::vector<std::string>& segment_ids,
                      const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << serialize_arma_models(models, segment_ids);
}

std::vector<std::vector<arma::ArmaModel>> load_arma_models(const std::filesystem::path& path) {
    json j = parse_json_file(path);
    check_keys(j, {"version", "models"}, path.string());
    std::vector<std::vector<arma::ArmaModel>> models;
    std::vector<std::string> seen_ids;
    for (const json& record : j.at("models")) {
        check_keys(record,
                   {"segment_id", "band", "p", "q", "c", "phi", "lambda", "noise_variance",
                    "mean_only", "stationarity_repaired"},
                   path.string());
        const std::string segment = record.at("segment_id").get<std::string>();
        auto it = std::find(seen_ids.begin(), seen_ids.end(), segment);
        if (it == seen_ids.end()) {
            seen_ids.push_back(segment);
            models.emplace_back();
            it = seen_ids.end() - 1;
        }
        arma::ArmaModel m;
        m.intercept = record.at("c").get<double>();
        m.ar_coeffs = record.at("phi").get<std::vector<double>>();
        m.ma_coeffs = record.at("lambda").get<std::vector<double>>();
        m.noise_variance = record.at("noise_variance").get<double>();
        m.mean_only = record.value("mean_only", false);
        m.stationarity_repaired = record.value("stationarity_repaired", false);
        models[static_cast<std::size_t>(it - seen_ids.begin())].push_back(std::move(m));
    }
    if (models.empty()) throw DataError("io: '" + path.string() + "' holds no ARMA models");
    return models;
}

std::string serialize_checkpoint(const neural::MotifGcrnnModel& model) {
    json header;
    header["version"] = 1;
    header["format"] = "mgcrnn";
    header["nodes"] = model.node_count();
    header["trend_window"] = model.trend_window;
    header["period_window"] = model.period_window;
    header["lstm_hidden"] = model.trend_lstm.hidden_size();
    header["laplacian_kind"] =
        model.laplacian.kind == roadgraph::LaplacianKind::MotifLaplacian ? "motif" : "standard";
    json layers = json::array();
    for (const auto& layer : model.mgc_layers) {
        layers.push_back({{"order", layer.order},
                          {"input", layer.input_width()},
                          {"output", layer.output_width()}});
    }
    header["mgc"] = std::move(layers);

    std::string bytes = "MGCRNN1\n";
    const std::string head = header.dump();
    const std::uint64_t head_len = head.size();
    bytes.append(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
    bytes += head;

    append_doubles(bytes, &model.laplacian.lambda_max, 1);
    append_doubles(bytes, model.laplacian.matrix.data(),
                   static_cast<std::size_t>(model.laplacian.matrix.size()));
    append_doubles(bytes, model.norm.min_value.data(),
                   static_cast<std::size_t>(model.norm.min_value.size()));
    append_doubles(bytes, model.norm.max_value.data(),
                   static_cast<std::size_t>(model.norm.max_value.size()));
    for (auto& [name, view] : neural::parameter_views(const_cast<neural::MotifGcrnnModel&>(model))) {
        append_doubles(bytes, view.data(), view.size());
    }
    return bytes;
}

void save_checkpoint(const neural::MotifGcrnnModel& model, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    const std::string bytes = serialize_checkpoint(model);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

neural::MotifGcrnnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string bytes = buffer.str();

    const std::string magic = "MGCRNN1\n";
    if (bytes.size() < magic.size() + sizeof(std::uint64_t) ||
        bytes.compare(0, magic.size(), magic) != 0) {
        throw DataError("io: '" + path.string() + "' is not a model checkpoint");
    }
    std::size_t offset = magic.size();
    std::uint64_t head_len = 0;
    std::memcpy(&head_len, bytes.data() + offset, sizeof(head_len));
    offset += sizeof(head_len);
    if (offset + head_len > bytes.size()) throw DataError("io: truncated checkpoint header");
    json header;
    try {
        header = json::parse(bytes.substr(offset, head_len));
    } catch (const json::exception& e) {
        throw DataError("io: invalid checkpoint header: " + std::string(e.what()));
    }
    offset += head_len;
    if (header.value("version", 0) != 1 || header.value("format", "") != "mgcrnn") {
        throw DataError("io: unsupported checkpoint version in '" + path.string() + "'");
    }

    const int n = header.at("nodes").get<int>();
    const int hidden = header.at("lstm_hidden").get<int>();

    neural::MotifGcrnnModel model;
    model.trend_window = header.at("trend_window").get<int>();
    model.period_window = header.at("period_window").get<int>();
    model.laplacian.kind = header.at("laplacian_kind").get<std::string>() == "motif"
                               ? roadgraph::LaplacianKind::MotifLaplacian
                               : roadgraph::LaplacianKind::StandardNormalized;
    model.laplacian.matrix.resize(n, n);
    model.norm.min_value.resize(n);
    model.norm.max_value.resize(n);

    int width = 1;
    for (const json& layer : header.at("mgc")) {
        neural::ChebFilterParams params;
        params.order = layer.at("order").get<int>();
        const int f_in = layer.at("input").get<int>();
        const int f_out = layer.at("output").get<int>();
        if (f_in != width) throw DataError("io: checkpoint MGC widths do not chain");
        for (int k = 0; k <= params.order; ++k) {
            params.coefficients.emplace_back(Eigen::MatrixXd::Zero(f_in, f_out));
        }
        width = f_out;
        model.mgc_layers.push_back(std::move(params));
    }

    const int input = n * width;
    const auto alloc_lstm = [&](bool enabled) {
        neural::LstmParams lstm;
        const int rows = enabled ? 4 * hidden : 0;
        lstm.w_input = Eigen::MatrixXd::Zero(rows, enabled ? input : 0);
        lstm.w_hidden = Eigen::MatrixXd::Zero(rows, enabled ? hidden : 0);
        lstm.bias = Eigen::VectorXd::Zero(rows);
        return lstm;
    };
    model.trend_lstm = alloc_lstm(true);
    model.period_lstm = alloc_lstm(model.period_window > 0);
    model.fc_weight =
        Eigen::MatrixXd::Zero(n, model.period_window > 0 ? 2 * hidden : hidden);
    model.fc_bias = Eigen::VectorXd::Zero(n);

    read_doubles(bytes, offset, &model.laplacian.lambda_max, 1);
    read_doubles(bytes, offset, model.laplacian.matrix.data(),
                 static_cast<std::size_t>(model.laplacian.matrix.size()));
    read_doubles(bytes, offset, model.norm.min_value.data(), static_cast<std::size_t>(n));
    read_doubles(bytes, offset, model.norm.max_value.data(), static_cast<std::size_t>(n));
    for (auto& [name, view] : neural::parameter_views(model)) {
        read_doubles(bytes, offset, view.data(), view.size());
    }
    if (offset != bytes.size()) throw DataError("io: trailing bytes in checkpoint");
    model.validate();
    return model;
}

std::vector<data::GpsSpeedRecord> load_records_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<data::GpsSpeedRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (line_no == 1 && line.rfind("timestamp", 0) == 0) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
            throw DataError("io: malformed record at " + path.string() + ":" +
                            std::to_string(line_no) +
                            " (expected timestamp_iso8601,segment_id,speed_kmh)");
        }
        records.push_back({fields[0], fields[1],
                           parse_double(fields[2],
                                        path.string() + ":" + std::to_string(line_no))});
    }
    if (records.empty()) throw DataError("io: no records in '" + path.string() + "'");
    return records;
}

void save_synthetic_spec(const data::SyntheticSpec& spec, const std::filesystem::path& path) {
    json j;
    j["version"] = 1;
    j["segment_count"] = spec.segment_count;
    j["days"] = spec.days;
    j["intervals_per_day"] = spec.intervals_per_day;
    j["daily_profile"] = spec.daily_profile;
    j["spatial_coupling"] = spec.spatial_coupling;
    j["noise_phi"] = spec.noise_phi;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    json events = json::array();
    for (const data::CongestionEvent& e : spec.congestion_events) {
        events.push_back({{"segments", e.segments},
                          {"start_interval", e.start_interval},
                          {"duration_intervals", e.duration_intervals},
                          {"depth_kmh", e.depth_kmh}});
    }
    j["congestion_events"] = std::move(events);
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

data::SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
    json j = parse_json_file(path);
    check_keys(j,
               {"version", "segment_count", "days", "intervals_per_day", "daily_profile",
                "spatial_coupling", "noise_phi", "noise_sigma", "seed", "congestion_events"},
               path.string());
    data::SyntheticSpec spec;
    try {
        spec.segment_count = j.at("segment_count").get<int>();
        spec.days = j.at("days").get<int>();
        spec.intervals_per_day = j.at("intervals_per_day").get<int>();
        spec.daily_profile = j.at("daily_profile").get<std::vector<double>>();
        spec.spatial_coupling = j.at("spatial_coupling").get<double>();
        spec.noise_phi = j.at("noise_phi").get<double>();
        spec.noise_sigma = j.at("noise_sigma").get<double>();
        spec.seed = j.at("seed").get<std::uint64_t>();
        for (const json& e : j.value("congestion_events", json::array())) {
            check_keys(e, {"segments", "start_interval", "duration_intervals", "depth_kmh"},
                       path.string());
            data::CongestionEvent event;
            event.segments = e.at("segments").get<std::vector<int>>();
            event.start_interval = e.at("start_interval").get<int>();
            event.duration_intervals = e.at("duration_intervals").get<int>();
            event.depth_kmh = e.at("depth_kmh").get<double>();
            spec.congestion_events.push_back(std::move(event));
        }
    } catch (const json::exception& e) {
        throw DataError("io: invalid synthetic spec '" + path.string() + "': " + e.what());
    }
    spec.validate();
    return spec;
}

}  // namespace motifcast::io
