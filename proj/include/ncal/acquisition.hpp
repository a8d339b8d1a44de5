#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "ncal/pool.hpp"

namespace ncal {

// Predicted class per sample across the terminal-phase checkpoints.
// Every sample carries one prediction per checkpoint epoch.
class CheckpointPredictions {
public:
    // preds is row-major ids.size() x epochs.size().
    // Throws TooFewCheckpoints (< 2 epochs), InvalidSpec (non-increasing
    // epochs), IndexMismatch (shape or duplicate ids).
    static CheckpointPredictions create(std::vector<int> epochs, std::vector<SampleId> ids,
                                        std::vector<int32_t> preds);

    const std::vector<int>& epochs() const { return epochs_; }
    const std::vector<SampleId>& ids() const { return ids_; }
    std::size_t n_samples() const { return ids_.size(); }
    bool contains(SampleId id) const { return row_index_.count(id) != 0; }

    std::span<const int32_t> row(SampleId id) const;
    int32_t final_prediction(SampleId id) const { return row(id).back(); }

private:
    std::vector<int> epochs_;
    std::vector<SampleId> ids_;
    std::vector<int32_t> preds_;
    std::unordered_map<SampleId, std::size_t> row_index_;
};

// Number of consecutive-checkpoint prediction changes for one sample.
int feature_fluctuation(const CheckpointPredictions& preds, SampleId sample_id);

// Mean pairwise cosine similarity of the present-class means.
// Throws TooFewClasses below 2 present classes.
double class_mean_alignment(const ClassStats& stats);

// Incremental class mean after adding feature z to class cls:
// (n*mean + z) / (n + 1); returns z itself when the class is empty.
std::vector<double> updated_class_mean(const ClassStats& stats, int cls,
                                       std::span<const double> z);

// Alignment perturbation of candidate z assigned to class cls, evaluated
// as the dot product of the normalized-mean displacement against the
// remaining-mean sum. For an empty class the displacement term reduces to
// the normalized candidate itself.
double cmap_closed_form(const ClassStats& stats, int cls, std::span<const double> z);

// Independent oracle for cmap_closed_form: recomputes the full alignment
// from raw features with and without z assigned to cls, and rescales the
// difference by K'(K'-1)/2 so both routes share one scale. Deliberately
// built on plain loops, not the shared statistics path.
double cmap_bruteforce(const FeatureMatrix& features, const PoolState& pool, int cls,
                       std::span<const double> z);

// (v - mean) / population std; all zeros when the spread underflows.
std::vector<double> zscore(std::span<const double> values);

struct CandidateScore {
    SampleId id = 0;
    int32_t predicted_class = 0;
    double cmap_raw = 0.0;
    int32_t ff_raw = 0;
    double cmap_std = 0.0;
    double ff_std = 0.0;
    double score = 0.0;
    int32_t rank = 0;
    bool selected = false;
};

struct AcquisitionResult {
    std::vector<CandidateScore> candidates;  // ascending sample id

    // Candidates ordered best-first (score desc, id asc).
    std::vector<std::size_t> by_rank() const;
};

// Scores every unlabeled candidate: perturbation score from the closed
// form (class taken from the final-checkpoint prediction), fluctuation
// count from the checkpoint history, each standardized across the
// candidate set, fused by plain averaging. Candidate order and ranks are
// deterministic for any thread count.
AcquisitionResult score_candidates(const FeatureMatrix& features, const PoolState& pool,
                                   const ClassStats& stats, const CheckpointPredictions& preds,
                                   int threads = 1);

// Flags the k best-ranked candidates in place. Throws BudgetExceedsPool.
void mark_selected(AcquisitionResult& result, std::size_t k);

// Ids of the k best candidates, best first; ties broken by ascending id.
// Throws BudgetExceedsPool if k is 0 or exceeds the candidate count.
std::vector<SampleId> select_top_k(const AcquisitionResult& result, std::size_t k);

}  // namespace ncal
