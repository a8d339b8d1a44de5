#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ncal/acquisition.hpp"
#include "ncal/loop.hpp"
#include "ncal/pool.hpp"
#include "ncal/trainer.hpp"

namespace ncal {

// Binary embedding dump: 16-byte header (magic "NCF1", u32 version,
// u32 n_samples, u32 dim, all little-endian) followed by n*dim float32
// payload, row-major. A text index with one "sample_id,label" line per
// row rides alongside at <path>.idx; unlabeled rows carry label -1.
// Values are promoted to double on read.
struct FeatureDump {
    FeatureMatrix features;
    std::vector<int32_t> labels;  // by row, -1 = unlabeled
};

std::string index_path_for(const std::string& dump_path);

void write_feature_dump(const std::string& path, const FeatureMatrix& features,
                        const std::vector<int32_t>& labels);
FeatureDump read_feature_dump(const std::string& path);

// Text checkpoint table: "sample_id,epoch,predicted_class" header, rows
// sorted by (sample_id, epoch), every sample carrying the same epochs.
void write_prediction_log(const std::string& path, const CheckpointPredictions& preds);
CheckpointPredictions read_prediction_log(const std::string& path);

struct SelectionReport {
    nlohmann::json config;  // free-form echo of the producing invocation
    std::size_t k = 0;
    std::vector<CandidateScore> candidates;  // ascending id
};

nlohmann::json selection_report_to_json(const SelectionReport& report);
void write_selection_report(const std::string& path, const SelectionReport& report);
SelectionReport read_selection_report(const std::string& path);

nlohmann::json collapse_to_json(const CollapseReport& report);
nlohmann::json cycle_record_to_json(const CycleRecord& record);

// Flat JSON configuration for the simulator: protocol fields mirrored
// one-to-one plus dataset and trainer settings.
struct SimulationConfig {
    ProtocolConfig protocol;
    TrainerConfig trainer;
    int num_classes = 10;
    int per_class_count = 625;
    double separation = 3.0;
    double stddev = 1.0;
    int input_dim = 16;
};

SimulationConfig parse_simulation_config(const nlohmann::json& j);
SimulationConfig load_simulation_config(const std::string& path);
nlohmann::json simulation_config_to_json(const SimulationConfig& cfg);

BlobSpec blob_spec_for(const SimulationConfig& cfg, uint64_t seed);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ncal
