#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ncal/acquisition.hpp"
#include "ncal/collapse.hpp"
#include "ncal/trainer.hpp"

namespace ncal {

enum class Strategy { ncal, random, coreset };

Strategy parse_strategy(const std::string& name);  // InvalidSpec on unknown name
const char* strategy_name(Strategy s);

struct ProtocolConfig {
    double initial_fraction = 0.1;
    double acquisition_fraction = 0.05;
    double budget_fraction = 0.4;
    Strategy strategy = Strategy::ncal;
    std::vector<uint64_t> seeds = {1};
    double noise_rate = 0.0;      // symmetric label-flip probability
    double longtail_beta = 0.0;   // 0 = balanced pool
    double test_fraction = 0.2;   // held-out split, never enters the pool
    int threads = 1;
};

struct CycleRecord {
    int cycle = 0;
    std::size_t labeled_count = 0;
    double test_accuracy = 0.0;
    CollapseReport collapse;
    std::vector<SampleId> selected;  // batch acquired at this cycle (empty at budget)
    int noisy_selected = 0;          // selected samples whose oracle label was flipped
};

// Annotation oracle: true label with probability 1-noise_rate, otherwise a
// uniformly random different class. Deterministic in (sample_id, seed).
int32_t oracle_label(SampleId sample_id, int32_t true_label, int num_classes, double noise_rate,
                     uint64_t seed);

// splitmix64 finalizer; the seed-stream derivation used across the loop.
uint64_t mix64(uint64_t x);

// Noise-oracle seed derived from a run seed; run_protocol feeds every
// annotation through oracle_label with this value, so audits can recount
// flipped labels after the fact.
uint64_t protocol_noise_seed(uint64_t run_seed);

// Uniform k-sample without replacement from the (sorted) candidate list.
std::vector<SampleId> random_select(std::span<const SampleId> candidates, std::size_t k,
                                    uint64_t seed);

// Greedy k-center selection: repeatedly take the candidate farthest from
// every labeled or already-chosen point; ties broken by ascending id.
std::vector<SampleId> coreset_select(const FeatureMatrix& features,
                                     std::span<const SampleId> labeled_ids,
                                     std::span<const SampleId> candidates, std::size_t k);

struct LongtailResult {
    std::vector<int> counts;          // kept count per class
    std::vector<SampleId> kept_ids;   // union of kept samples, sorted
};

// Exponential-decay subsample: class c keeps max(1, round(n_c * exp(-beta*c)))
// of its ids, drawn uniformly without replacement.
LongtailResult make_longtail(const std::vector<std::vector<SampleId>>& per_class_ids,
                             double beta, uint64_t seed);

using CycleObserver =
    std::function<void(int cycle, Strategy strategy, const AcquisitionResult& result)>;

// Full acquisition protocol for a single seed: hold out a test split,
// optionally decay the pool to a long tail, label an initial fraction
// through the (possibly noisy) oracle, then alternate train / score /
// select / label until the budget fraction is reached. The observer, when
// set, sees each cycle's scored candidates (ncal strategy only).
std::vector<CycleRecord> run_protocol(const ProtocolConfig& config, const TrainerConfig& trainer,
                                      const SyntheticDataset& dataset, uint64_t seed,
                                      const CycleObserver& observer = {});

}  // namespace ncal
