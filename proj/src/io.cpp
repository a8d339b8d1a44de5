#include "ncal/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace ncal {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'N', 'C', 'F', '1'};
constexpr uint32_t kVersion = 1;

void put_u32le(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32le(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::BadFormat, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::BadFormat, "cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) raise(ErrorCode::BadFormat, "short write to " + path);
}

std::string index_path_for(const std::string& dump_path) { return dump_path + ".idx"; }

void write_feature_dump(const std::string& path, const FeatureMatrix& features,
                        const std::vector<int32_t>& labels) {
    if (labels.size() != features.n_samples())
        raise(ErrorCode::IndexMismatch, "one label per sample required");

    std::string blob;
    blob.reserve(16 + 4 * features.data().size());
    blob.append(kMagic, 4);
    put_u32le(blob, kVersion);
    put_u32le(blob, static_cast<uint32_t>(features.n_samples()));
    put_u32le(blob, static_cast<uint32_t>(features.dim()));
    for (double v : features.data()) {
        uint32_t bits = std::bit_cast<uint32_t>(static_cast<float>(v));
        put_u32le(blob, bits);
    }
    write_text_file(path, blob);

    std::string index;
    for (std::size_t r = 0; r < features.n_samples(); ++r) {
        index += std::to_string(features.ids()[r]);
        index += ',';
        index += std::to_string(labels[r]);
        index += '\n';
    }
    write_text_file(index_path_for(path), index);
}

FeatureDump read_feature_dump(const std::string& path) {
    std::string blob = read_text_file(path);
    if (blob.size() < 4 || std::memcmp(blob.data(), kMagic, 4) != 0)
        raise(ErrorCode::BadMagic, path);
    if (blob.size() < 16) raise(ErrorCode::TruncatedPayload, "header short in " + path);

    const unsigned char* p = reinterpret_cast<const unsigned char*>(blob.data());
    uint32_t version = get_u32le(p + 4);
    if (version != kVersion)
        raise(ErrorCode::BadFormat, "unsupported version " + std::to_string(version));
    std::size_t n = get_u32le(p + 8);
    std::size_t d = get_u32le(p + 12);
    std::size_t expected = 16 + 4 * n * d;
    if (blob.size() != expected)
        raise(ErrorCode::TruncatedPayload, path + ": " + std::to_string(blob.size()) +
                                               " bytes, expected " + std::to_string(expected));

    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < n * d; ++i) {
        float f = std::bit_cast<float>(get_u32le(p + 16 + 4 * i));
        if (!std::isfinite(f))
            raise(ErrorCode::NonFiniteValue,
                  "row " + std::to_string(i / d) + " col " + std::to_string(i % d) +
                      " (byte offset " + std::to_string(16 + 4 * i) + ")");
        data[i] = static_cast<double>(f);
    }

    std::string index = read_text_file(index_path_for(path));
    std::vector<SampleId> ids;
    std::vector<int32_t> labels;
    std::istringstream lines(index);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            raise(ErrorCode::BadFormat, "index line " + std::to_string(line_no));
        try {
            ids.push_back(std::stoll(line.substr(0, comma)));
            labels.push_back(static_cast<int32_t>(std::stol(line.substr(comma + 1))));
        } catch (const std::exception&) {
            raise(ErrorCode::BadFormat, "index line " + std::to_string(line_no));
        }
    }
    if (ids.size() != n)
        raise(ErrorCode::IndexMismatch, "index has " + std::to_string(ids.size()) +
                                            " entries for " + std::to_string(n) + " samples");

    FeatureDump dump;
    dump.features = FeatureMatrix::create(d, std::move(ids), std::move(data));
    dump.labels = std::move(labels);
    return dump;
}

void write_prediction_log(const std::string& path, const CheckpointPredictions& preds) {
    std::vector<SampleId> ids = preds.ids();
    std::sort(ids.begin(), ids.end());
    std::string out = "sample_id,epoch,predicted_class\n";
    for (SampleId id : ids) {
        auto row = preds.row(id);
        for (std::size_t e = 0; e < preds.epochs().size(); ++e) {
            out += std::to_string(id);
            out += ',';
            out += std::to_string(preds.epochs()[e]);
            out += ',';
            out += std::to_string(row[e]);
            out += '\n';
        }
    }
    write_text_file(path, out);
}

CheckpointPredictions read_prediction_log(const std::string& path) {
    std::istringstream lines(read_text_file(path));
    std::string line;
    if (!std::getline(lines, line) || line != "sample_id,epoch,predicted_class")
        raise(ErrorCode::BadFormat, "missing prediction log header in " + path);

    std::vector<SampleId> ids;
    std::map<SampleId, std::pair<std::vector<int>, std::vector<int32_t>>> rows;
    std::size_t line_no = 1;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            raise(ErrorCode::BadFormat, "prediction log line " + std::to_string(line_no));
        SampleId id;
        int epoch;
        int32_t cls;
        try {
            id = std::stoll(line.substr(0, c1));
            epoch = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
            cls = static_cast<int32_t>(std::stol(line.substr(c2 + 1)));
        } catch (const std::exception&) {
            raise(ErrorCode::BadFormat, "prediction log line " + std::to_string(line_no));
        }
        auto [it, fresh] = rows.try_emplace(id);
        if (fresh) ids.push_back(id);
        it->second.first.push_back(epoch);
        it->second.second.push_back(cls);
    }
    if (rows.empty()) raise(ErrorCode::EmptyInput, "no prediction rows in " + path);

    const std::vector<int>& epochs = rows.begin()->second.first;
    std::vector<int32_t> table;
    table.reserve(rows.size() * epochs.size());
    std::sort(ids.begin(), ids.end());
    for (SampleId id : ids) {
        const auto& [row_epochs, row_preds] = rows.at(id);
        if (row_epochs != epochs)
            raise(ErrorCode::IndexMismatch,
                  "sample " + std::to_string(id) + " has a different epoch sequence");
        table.insert(table.end(), row_preds.begin(), row_preds.end());
    }
    return CheckpointPredictions::create(epochs, std::move(ids), std::move(table));
}

namespace {

json candidate_to_json(const CandidateScore& c) {
    return json{{"id", c.id},
                {"predicted_class", c.predicted_class},
                {"cmap_raw", c.cmap_raw},
                {"ff_raw", c.ff_raw},
                {"cmap_std", c.cmap_std},
                {"ff_std", c.ff_std},
                {"score", c.score},
                {"rank", c.rank},
                {"selected", c.selected}};
}

CandidateScore candidate_from_json(const json& j) {
    CandidateScore c;
    c.id = j.at("id").get<SampleId>();
    c.predicted_class = j.at("predicted_class").get<int32_t>();
    c.cmap_raw = j.at("cmap_raw").get<double>();
    c.ff_raw = j.at("ff_raw").get<int32_t>();
    c.cmap_std = j.at("cmap_std").get<double>();
    c.ff_std = j.at("ff_std").get<double>();
    c.score = j.at("score").get<double>();
    c.rank = j.at("rank").get<int32_t>();
    c.selected = j.at("selected").get<bool>();
    return c;
}

}  // namespace

json selection_report_to_json(const SelectionReport& report) {
    json cands = json::array();
    double cmap_sum = 0.0, ff_sum = 0.0;
    json selected_ids = json::array();

    std::vector<std::size_t> order(report.candidates.size());
    for (std::size_t i = 0; i < report.candidates.size(); ++i)
        order[static_cast<std::size_t>(report.candidates[i].rank)] = i;
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto& c = report.candidates[order[r]];
        if (c.selected) selected_ids.push_back(c.id);
    }
    for (const auto& c : report.candidates) {
        cands.push_back(candidate_to_json(c));
        cmap_sum += c.cmap_raw;
        ff_sum += static_cast<double>(c.ff_raw);
    }
    const double n = static_cast<double>(report.candidates.size());
    json summary{{"n_candidates", report.candidates.size()},
                 {"cmap_raw_mean", n > 0 ? cmap_sum / n : 0.0},
                 {"ff_raw_mean", n > 0 ? ff_sum / n : 0.0},
                 {"selected_ids", selected_ids}};
    return json{{"config", report.config},
                {"k", report.k},
                {"candidates", cands},
                {"summary", summary}};
}

void write_selection_report(const std::string& path, const SelectionReport& report) {
    write_text_file(path, selection_report_to_json(report).dump(2) + "\n");
}

SelectionReport read_selection_report(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        raise(ErrorCode::BadFormat, std::string("selection report: ") + e.what());
    }
    SelectionReport report;
    try {
        report.config = j.at("config");
        report.k = j.at("k").get<std::size_t>();
        for (const auto& c : j.at("candidates")) report.candidates.push_back(candidate_from_json(c));
    } catch (const json::exception& e) {
        raise(ErrorCode::BadFormat, std::string("selection report: ") + e.what());
    }

    std::vector<bool> seen(report.candidates.size(), false);
    for (const auto& c : report.candidates) {
        if (c.rank < 0 || static_cast<std::size_t>(c.rank) >= report.candidates.size() ||
            seen[static_cast<std::size_t>(c.rank)])
            raise(ErrorCode::IndexMismatch, "ranks are not a permutation");
        seen[static_cast<std::size_t>(c.rank)] = true;
    }
    return report;
}

json collapse_to_json(const CollapseReport& r) {
    return json{{"nc1_ratio", r.nc1_ratio},
                {"nc2_cos_mean", r.nc2_cos_mean},
                {"nc2_cos_std", r.nc2_cos_std},
                {"nc2_target", r.nc2_target},
                {"nc4_agreement", r.nc4_agreement},
                {"interclass_dist_mean", r.interclass_dist_mean},
                {"interclass_dist_values", r.interclass_dist_values}};
}

json cycle_record_to_json(const CycleRecord& rec) {
    return json{{"cycle", rec.cycle},
                {"labeled_count", rec.labeled_count},
                {"test_accuracy", rec.test_accuracy},
                {"collapse", collapse_to_json(rec.collapse)},
                {"selected", rec.selected},
                {"noisy_selected", rec.noisy_selected}};
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

SimulationConfig parse_simulation_config(const json& j) {
    static const std::vector<std::string> known = {
        "initial_fraction", "acquisition_fraction", "budget_fraction", "strategy",
        "seeds", "noise_rate", "longtail_beta", "test_fraction", "threads",
        "num_classes", "per_class_count", "separation", "stddev", "input_dim",
        "hidden_dim", "learning_rate", "weight_decay", "batch_size", "epochs",
        "tpt_threshold"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            raise(ErrorCode::BadFormat, "unknown config key '" + key + "'");
    }

    SimulationConfig cfg;
    try {
        read_field(j, "initial_fraction", cfg.protocol.initial_fraction);
        read_field(j, "acquisition_fraction", cfg.protocol.acquisition_fraction);
        read_field(j, "budget_fraction", cfg.protocol.budget_fraction);
        if (j.contains("strategy"))
            cfg.protocol.strategy = parse_strategy(j.at("strategy").get<std::string>());
        read_field(j, "seeds", cfg.protocol.seeds);
        read_field(j, "noise_rate", cfg.protocol.noise_rate);
        read_field(j, "longtail_beta", cfg.protocol.longtail_beta);
        read_field(j, "test_fraction", cfg.protocol.test_fraction);
        read_field(j, "threads", cfg.protocol.threads);
        read_field(j, "num_classes", cfg.num_classes);
        read_field(j, "per_class_count", cfg.per_class_count);
        read_field(j, "separation", cfg.separation);
        read_field(j, "stddev", cfg.stddev);
        read_field(j, "input_dim", cfg.input_dim);
        read_field(j, "hidden_dim", cfg.trainer.hidden_dim);
        read_field(j, "learning_rate", cfg.trainer.learning_rate);
        read_field(j, "weight_decay", cfg.trainer.weight_decay);
        read_field(j, "batch_size", cfg.trainer.batch_size);
        read_field(j, "epochs", cfg.trainer.epochs);
        read_field(j, "tpt_threshold", cfg.trainer.tpt_threshold);
    } catch (const json::exception& e) {
        raise(ErrorCode::BadFormat, std::string("config: ") + e.what());
    }
    if (cfg.protocol.seeds.empty()) raise(ErrorCode::BadFormat, "config: seeds must be non-empty");
    return cfg;
}

SimulationConfig load_simulation_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        raise(ErrorCode::BadFormat, std::string("config: ") + e.what());
    }
    return parse_simulation_config(j);
}

json simulation_config_to_json(const SimulationConfig& cfg) {
    return json{{"initial_fraction", cfg.protocol.initial_fraction},
                {"acquisition_fraction", cfg.protocol.acquisition_fraction},
                {"budget_fraction", cfg.protocol.budget_fraction},
                {"strategy", strategy_name(cfg.protocol.strategy)},
                {"seeds", cfg.protocol.seeds},
                {"noise_rate", cfg.protocol.noise_rate},
                {"longtail_beta", cfg.protocol.longtail_beta},
                {"test_fraction", cfg.protocol.test_fraction},
                {"threads", cfg.protocol.threads},
                {"num_classes", cfg.num_classes},
                {"per_class_count", cfg.per_class_count},
                {"separation", cfg.separation},
                {"stddev", cfg.stddev},
                {"input_dim", cfg.input_dim},
                {"hidden_dim", cfg.trainer.hidden_dim},
                {"learning_rate", cfg.trainer.learning_rate},
                {"weight_decay", cfg.trainer.weight_decay},
                {"batch_size", cfg.trainer.batch_size},
                {"epochs", cfg.trainer.epochs},
                {"tpt_threshold", cfg.trainer.tpt_threshold}};
}

BlobSpec blob_spec_for(const SimulationConfig& cfg, uint64_t seed) {
    BlobSpec spec;
    spec.num_classes = cfg.num_classes;
    spec.per_class_counts.assign(static_cast<std::size_t>(cfg.num_classes), cfg.per_class_count);
    spec.separation = cfg.separation;
    spec.stddev = cfg.stddev;
    spec.input_dim = cfg.input_dim;
    spec.seed = seed;
    return spec;
}

}  // namespace ncal
