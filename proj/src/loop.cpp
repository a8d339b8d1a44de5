#include "ncal/loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ncal/kernels.hpp"

namespace ncal {

Strategy parse_strategy(const std::string& name) {
    if (name == "ncal") return Strategy::ncal;
    if (name == "random") return Strategy::random;
    if (name == "coreset") return Strategy::coreset;
    raise(ErrorCode::InvalidSpec, "unknown strategy '" + name + "'");
}

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::ncal: return "ncal";
        case Strategy::random: return "random";
        case Strategy::coreset: return "coreset";
    }
    return "?";
}

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t protocol_noise_seed(uint64_t run_seed) { return mix64(run_seed ^ 0x01dcafeULL); }

int32_t oracle_label(SampleId sample_id, int32_t true_label, int num_classes, double noise_rate,
                     uint64_t seed) {
    if (noise_rate < 0.0 || noise_rate >= 1.0)
        raise(ErrorCode::InvalidSpec, "noise_rate must be in [0, 1)");
    if (noise_rate == 0.0 || num_classes < 2) return true_label;

    uint64_t bits = mix64(seed ^ mix64(static_cast<uint64_t>(sample_id)));
    double u = static_cast<double>(bits >> 11) * 0x1.0p-53;  // uniform [0,1)
    if (u >= noise_rate) return true_label;

    uint64_t alt = mix64(bits) % static_cast<uint64_t>(num_classes - 1);
    int32_t wrong = static_cast<int32_t>(alt);
    if (wrong >= true_label) ++wrong;  // uniform over the other classes
    return wrong;
}

std::vector<SampleId> random_select(std::span<const SampleId> candidates, std::size_t k,
                                    uint64_t seed) {
    if (k > candidates.size())
        raise(ErrorCode::BudgetExceedsPool, "k=" + std::to_string(k) + " > " +
                                                std::to_string(candidates.size()) +
                                                " candidates");
    std::vector<SampleId> ids(candidates.begin(), candidates.end());
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
        std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(k);
    return ids;
}

std::vector<SampleId> coreset_select(const FeatureMatrix& features,
                                     std::span<const SampleId> labeled_ids,
                                     std::span<const SampleId> candidates, std::size_t k) {
    if (k > candidates.size())
        raise(ErrorCode::BudgetExceedsPool, "k=" + std::to_string(k) + " > " +
                                                std::to_string(candidates.size()) +
                                                " candidates");
    const std::size_t d = features.dim();
    const std::size_t n = candidates.size();

    // min squared distance from each candidate to the covered set
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        const double* z = features.row(candidates[i]).data();
        for (SampleId lid : labeled_ids)
            min_d[i] = std::min(min_d[i], kern::l2sq(z, features.row(lid).data(), d));
    }

    std::vector<SampleId> chosen;
    chosen.reserve(k);
    std::vector<bool> taken(n, false);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (taken[i]) continue;
            if (best == n || min_d[i] > min_d[best] ||
                (min_d[i] == min_d[best] && candidates[i] < candidates[best]))
                best = i;
        }
        taken[best] = true;
        chosen.push_back(candidates[best]);
        const double* zb = features.row(candidates[best]).data();
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i])
                min_d[i] = std::min(min_d[i], kern::l2sq(features.row(candidates[i]).data(), zb, d));
        }
    }
    return chosen;
}

LongtailResult make_longtail(const std::vector<std::vector<SampleId>>& per_class_ids,
                             double beta, uint64_t seed) {
    if (beta < 0.0) raise(ErrorCode::InvalidSpec, "beta must be non-negative");
    LongtailResult out;
    out.counts.reserve(per_class_ids.size());
    for (std::size_t c = 0; c < per_class_ids.size(); ++c) {
        const auto& ids = per_class_ids[c];
        double target = static_cast<double>(ids.size()) *
                        std::exp(-beta * static_cast<double>(c));
        std::size_t keep = static_cast<std::size_t>(
            std::max(1.0, std::round(target)));
        keep = std::min(keep, ids.size());
        out.counts.push_back(static_cast<int>(keep));
        std::vector<SampleId> sampled =
            random_select(ids, keep, mix64(seed ^ mix64(static_cast<uint64_t>(c))));
        out.kept_ids.insert(out.kept_ids.end(), sampled.begin(), sampled.end());
    }
    std::sort(out.kept_ids.begin(), out.kept_ids.end());
    return out;
}

namespace {

std::size_t rounded_count(double fraction, std::size_t n) {
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

std::vector<CycleRecord> run_protocol(const ProtocolConfig& config, const TrainerConfig& trainer,
                                      const SyntheticDataset& dataset, uint64_t seed,
                                      const CycleObserver& observer) {
    const FeatureMatrix& inputs = dataset.features;
    const std::size_t n_total = inputs.n_samples();
    const int k_classes = dataset.spec.num_classes;

    if (!(config.initial_fraction > 0.0 && config.initial_fraction < 1.0) ||
        !(config.acquisition_fraction > 0.0 && config.acquisition_fraction < 1.0) ||
        !(config.budget_fraction > 0.0 && config.budget_fraction <= 1.0))
        raise(ErrorCode::InvalidSpec, "protocol fractions out of range");
    if (config.test_fraction < 0.0 || config.test_fraction >= 1.0)
        raise(ErrorCode::InvalidSpec, "test_fraction must be in [0, 1)");

    const uint64_t split_seed = mix64(seed ^ 0x59117ULL);
    const uint64_t init_seed = mix64(seed ^ 0x1a17ULL);
    const uint64_t noise_seed = protocol_noise_seed(seed);

    // Held-out test split, drawn over the whole dataset.
    std::vector<SampleId> all_ids = inputs.ids();
    std::sort(all_ids.begin(), all_ids.end());
    std::size_t n_test = rounded_count(config.test_fraction, n_total);
    std::vector<SampleId> test_ids = random_select(all_ids, n_test, split_seed);
    std::sort(test_ids.begin(), test_ids.end());
    std::vector<SampleId> pool_ids;
    pool_ids.reserve(n_total - n_test);
    std::set_difference(all_ids.begin(), all_ids.end(), test_ids.begin(), test_ids.end(),
                        std::back_inserter(pool_ids));

    if (config.longtail_beta > 0.0) {
        std::vector<std::vector<SampleId>> per_class(static_cast<std::size_t>(k_classes));
        for (SampleId id : pool_ids)
            per_class[static_cast<std::size_t>(
                          dataset.labels[inputs.row_of(id)])].push_back(id);
        pool_ids = make_longtail(per_class, config.longtail_beta,
                                 mix64(seed ^ 0x7a11ULL)).kept_ids;
    }

    const std::size_t n_pool = pool_ids.size();
    const std::size_t n_init = rounded_count(config.initial_fraction, n_pool);
    const std::size_t n_batch = rounded_count(config.acquisition_fraction, n_pool);
    const std::size_t n_budget = rounded_count(config.budget_fraction, n_pool);
    if (n_init < 1 || n_batch < 1 || n_init > n_pool)
        raise(ErrorCode::InvalidSpec, "pool too small for the configured fractions");

    PoolState pool = PoolState::create(k_classes, pool_ids);
    auto annotate = [&](SampleId id) {
        int32_t truth = dataset.labels[inputs.row_of(id)];
        return oracle_label(id, truth, k_classes, config.noise_rate, noise_seed);
    };
    for (SampleId id : random_select(pool_ids, n_init, init_seed))
        pool.apply_label(id, annotate(id));

    std::vector<CycleRecord> records;
    for (int cycle = 0;; ++cycle) {
        pool.cycle = cycle;

        std::vector<SampleId> labeled_ids;
        std::vector<int32_t> labeled_classes;
        for (const auto& [cls, ids] : pool.labeled) {
            for (SampleId id : ids) {
                labeled_ids.push_back(id);
                labeled_classes.push_back(cls);
            }
        }
        std::vector<SampleId> unlabeled_ids(pool.unlabeled.begin(), pool.unlabeled.end());

        ToyModel model = ToyModel::init(static_cast<int>(inputs.dim()), trainer.hidden_dim,
                                        k_classes, mix64(seed ^ (0xC0DE0000ULL + cycle)));
        TrainerConfig cycle_cfg = trainer;
        cycle_cfg.seed = mix64(seed ^ (0x5EED0000ULL + cycle));
        TrainingTrace trace =
            train_model(model, inputs, labeled_ids, labeled_classes, unlabeled_ids, cycle_cfg);

        CycleRecord rec;
        rec.cycle = cycle;
        rec.labeled_count = pool.labeled_count();

        std::size_t correct = 0;
        for (SampleId id : test_ids) {
            if (trace.final_predictions[inputs.row_of(id)] == dataset.labels[inputs.row_of(id)])
                ++correct;
        }
        rec.test_accuracy =
            test_ids.empty() ? 0.0
                             : static_cast<double>(correct) / static_cast<double>(test_ids.size());

        std::unordered_map<SampleId, int32_t> labeled_preds;
        for (SampleId id : labeled_ids)
            labeled_preds[id] = trace.final_predictions[inputs.row_of(id)];
        rec.collapse = collapse_report(trace.hidden_features, pool, labeled_preds);

        if (rec.labeled_count >= n_budget || unlabeled_ids.empty()) {
            records.push_back(std::move(rec));
            break;
        }

        std::size_t k = std::min({n_batch, n_budget - rec.labeled_count, unlabeled_ids.size()});
        std::vector<SampleId> batch;
        switch (config.strategy) {
            case Strategy::ncal: {
                ClassStats stats = compute_class_stats(trace.hidden_features, pool);
                AcquisitionResult scored =
                    score_candidates(trace.hidden_features, pool, stats,
                                     trace_checkpoints(trace), config.threads);
                mark_selected(scored, k);
                if (observer) observer(cycle, config.strategy, scored);
                batch = select_top_k(scored, k);
                break;
            }
            case Strategy::random:
                batch = random_select(unlabeled_ids, k, mix64(seed ^ (0xA2B40000ULL + cycle)));
                break;
            case Strategy::coreset:
                batch = coreset_select(trace.hidden_features, labeled_ids, unlabeled_ids, k);
                break;
        }

        rec.selected = batch;
        for (SampleId id : batch) {
            int32_t truth = dataset.labels[inputs.row_of(id)];
            int32_t assigned = annotate(id);
            if (assigned != truth) ++rec.noisy_selected;
            pool.apply_label(id, assigned);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace ncal
