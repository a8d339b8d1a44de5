#include "ncal/cli.hpp"

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncal/io.hpp"

namespace ncal {

using nlohmann::json;

namespace {

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        write_text_file(out_path, content);
    }
}

int run_score(const std::string& features_path, const std::string& preds_path, std::size_t k,
              int threads, const std::string& out_path) {
    FeatureDump dump = read_feature_dump(features_path);
    CheckpointPredictions preds = read_prediction_log(preds_path);

    int32_t max_class = 0;
    for (int32_t label : dump.labels) max_class = std::max(max_class, label);
    for (SampleId id : preds.ids())
        max_class = std::max(max_class, preds.final_prediction(id));

    PoolState pool = PoolState::create(max_class + 1, dump.features.ids());
    for (std::size_t r = 0; r < dump.labels.size(); ++r) {
        if (dump.labels[r] >= 0)
            pool.apply_label(dump.features.ids()[r], dump.labels[r]);
    }
    if (pool.unlabeled.empty()) raise(ErrorCode::EmptyInput, "no unlabeled candidates in index");

    ClassStats stats = compute_class_stats(dump.features, pool);
    AcquisitionResult result = score_candidates(dump.features, pool, stats, preds, threads);
    if (k > 0) mark_selected(result, k);

    SelectionReport report;
    report.config = json{{"features", features_path}, {"preds", preds_path},
                         {"k", k}, {"threads", threads}};
    report.k = k;
    report.candidates = std::move(result.candidates);
    emit(out_path, selection_report_to_json(report).dump(2) + "\n");
    return 0;
}

int run_select(const std::string& report_path, std::size_t k, const std::string& out_path) {
    SelectionReport report = read_selection_report(report_path);
    AcquisitionResult result;
    result.candidates = std::move(report.candidates);
    std::string out;
    for (SampleId id : select_top_k(result, k)) {
        out += std::to_string(id);
        out += '\n';
    }
    emit(out_path, out);
    return 0;
}

int run_simulate(const std::string& config_path, bool seed_set, uint64_t seed_override,
                 const std::string& strategy_override, int threads_override,
                 const std::string& out_path) {
    SimulationConfig cfg = load_simulation_config(config_path);
    if (seed_set) cfg.protocol.seeds = {seed_override};
    if (!strategy_override.empty()) cfg.protocol.strategy = parse_strategy(strategy_override);
    if (threads_override > 0) cfg.protocol.threads = threads_override;

    json runs = json::array();
    std::vector<double> final_accs;
    for (uint64_t seed : cfg.protocol.seeds) {
        SyntheticDataset dataset = generate_blobs(blob_spec_for(cfg, seed));
        std::vector<CycleRecord> records =
            run_protocol(cfg.protocol, cfg.trainer, dataset, seed);
        json rec_json = json::array();
        for (const auto& rec : records) rec_json.push_back(cycle_record_to_json(rec));
        runs.push_back(json{{"strategy", strategy_name(cfg.protocol.strategy)},
                            {"seed", seed},
                            {"records", rec_json}});
        final_accs.push_back(records.back().test_accuracy);
    }

    double mean_final = 0.0;
    for (double a : final_accs) mean_final += a;
    mean_final /= static_cast<double>(final_accs.size());

    json out{{"config", simulation_config_to_json(cfg)},
             {"runs", runs},
             {"summary", json{{"strategy", strategy_name(cfg.protocol.strategy)},
                              {"final_test_accuracy_per_seed", final_accs},
                              {"mean_final_test_accuracy", mean_final}}}};
    emit(out_path, out.dump(2) + "\n");
    return 0;
}

int run_collapse(const std::string& features_path, const std::string& out_path) {
    FeatureDump dump = read_feature_dump(features_path);
    int32_t max_class = 0;
    for (int32_t label : dump.labels) max_class = std::max(max_class, label);

    PoolState pool = PoolState::create(max_class + 1, dump.features.ids());
    std::unordered_map<SampleId, int32_t> labels_as_preds;
    for (std::size_t r = 0; r < dump.labels.size(); ++r) {
        if (dump.labels[r] >= 0) {
            pool.apply_label(dump.features.ids()[r], dump.labels[r]);
            labels_as_preds[dump.features.ids()[r]] = dump.labels[r];
        }
    }
    CollapseReport report = collapse_report(dump.features, pool, labels_as_preds);
    emit(out_path, collapse_to_json(report).dump(2) + "\n");
    return 0;
}

int run_longtail(int classes, int n_max, double beta, uint64_t seed,
                 const std::string& out_path) {
    if (classes < 1 || n_max < 1)
        raise(ErrorCode::InvalidSpec, "classes and n-max must be positive");
    std::vector<std::vector<SampleId>> per_class(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c) {
        per_class[static_cast<std::size_t>(c)].resize(static_cast<std::size_t>(n_max));
        for (int i = 0; i < n_max; ++i)
            per_class[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] =
                static_cast<SampleId>(c) * n_max + i;
    }
    LongtailResult result = make_longtail(per_class, beta, seed);
    std::string out;
    for (SampleId id : result.kept_ids) {
        out += std::to_string(id);
        out += ',';
        out += std::to_string(id / n_max);
        out += '\n';
    }
    emit(out_path, out);
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"Neural-collapse-guided active learning toolkit"};
    app.require_subcommand(1);

    std::string features_path, preds_path, report_path, config_path, out_path;
    std::string strategy_override;
    std::size_t k = 0;
    int threads = 1;
    int sim_threads = 0;  // 0 = keep the config value
    uint64_t seed = 0;
    int classes = 100, n_max = 1300;
    double beta = 0.05;

    auto* score = app.add_subcommand("score", "Score unlabeled candidates from a feature dump");
    score->add_option("--features", features_path, "feature dump path")->required();
    score->add_option("--preds", preds_path, "prediction log path")->required();
    score->add_option("--k", k, "flag the k best candidates as selected");
    score->add_option("--threads", threads, "parallel scoring workers");
    score->add_option("--out", out_path, "report path (stdout when omitted)");

    auto* select = app.add_subcommand("select", "Extract the top-k ids from a report");
    select->add_option("--report", report_path, "selection report path")->required();
    select->add_option("--k", k, "batch size")->required();
    select->add_option("--out", out_path, "id list path (stdout when omitted)");

    auto* simulate = app.add_subcommand("simulate", "Run the acquisition protocol end to end");
    simulate->add_option("--config", config_path, "simulation config (JSON)")->required();
    auto* seed_opt = simulate->add_option("--seed", seed, "override the config seed list");
    simulate->add_option("--strategy", strategy_override, "override the config strategy");
    simulate->add_option("--threads", sim_threads, "parallel scoring workers");
    simulate->add_option("--out", out_path, "output path (stdout when omitted)");

    auto* collapse = app.add_subcommand("collapse", "Collapse diagnostics for a feature dump");
    collapse->add_option("--features", features_path, "feature dump path")->required();
    collapse->add_option("--out", out_path, "report path (stdout when omitted)");

    auto* longtail = app.add_subcommand("longtail", "Sample an exponential-decay pool index");
    longtail->add_option("--classes", classes, "number of classes");
    longtail->add_option("--n-max", n_max, "largest per-class count");
    longtail->add_option("--beta", beta, "decay factor");
    longtail->add_option("--seed", seed, "sampling seed");
    longtail->add_option("--out", out_path, "index path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (score->parsed()) return run_score(features_path, preds_path, k, threads, out_path);
        if (select->parsed()) return run_select(report_path, k, out_path);
        if (simulate->parsed())
            return run_simulate(config_path, !seed_opt->empty(), seed, strategy_override,
                                sim_threads, out_path);
        if (collapse->parsed()) return run_collapse(features_path, out_path);
        if (longtail->parsed()) return run_longtail(classes, n_max, beta, seed, out_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace ncal
