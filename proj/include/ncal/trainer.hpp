#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ncal/acquisition.hpp"
#include "ncal/pool.hpp"

namespace ncal {

struct BlobSpec {
    int num_classes = 2;
    std::vector<int> per_class_counts;
    double separation = 6.0;
    double stddev = 1.0;
    int input_dim = 8;
    uint64_t seed = 0;
};

// Gaussian blobs with class centers separation * e_c (all on the sphere of
// radius separation). Sample ids are 0..N-1, class-contiguous.
struct SyntheticDataset {
    BlobSpec spec;
    FeatureMatrix features;
    std::vector<int32_t> labels;  // by row
};

SyntheticDataset generate_blobs(const BlobSpec& spec);

struct TrainerConfig {
    int hidden_dim = 64;
    double learning_rate = 0.5;
    double weight_decay = 1e-3;  // L2 penalty on weights, not biases
    int batch_size = 32;
    int epochs = 400;
    double tpt_threshold = 0.995;
    uint64_t seed = 0;
};

// One-hidden-layer rectifier network; the hidden activations are the
// penultimate features every acquisition score runs on.
struct ToyModel {
    int in_dim = 0;
    int hidden_dim = 0;
    int num_classes = 0;
    std::vector<double> w1, b1;  // hidden_dim x in_dim, hidden_dim
    std::vector<double> w2, b2;  // num_classes x hidden_dim, num_classes

    // Zero-mean uniform weights scaled by 1/sqrt(fan-in); zero biases.
    static ToyModel init(int in_dim, int hidden_dim, int num_classes, uint64_t seed);

    void forward(const double* x, double* hidden, double* logits) const;
    int32_t predict(const double* x, double* hidden_buf, double* logit_buf) const;
    std::size_t param_count() const;
};

struct Gradients {
    std::vector<double> w1, b1, w2, b2;
    void resize_like(const ToyModel& m);
};

// Mean softmax cross-entropy over the batch plus (wd/2)*(|w1|^2+|w2|^2);
// fills grads with the matching analytic gradient.
double loss_and_gradients(const ToyModel& model, const FeatureMatrix& inputs,
                          std::span<const SampleId> batch_ids,
                          std::span<const int32_t> batch_labels, double weight_decay,
                          Gradients& grads);

// Same objective, forward only (finite-difference probes in tests).
double batch_loss(const ToyModel& model, const FeatureMatrix& inputs,
                  std::span<const SampleId> batch_ids, std::span<const int32_t> batch_labels,
                  double weight_decay);

struct TrainingTrace {
    std::vector<double> train_accuracy;  // one entry per epoch
    int tpt_start = 0;
    int tpt_end = 0;
    std::vector<int> checkpoint_epochs;     // tpt_start..tpt_end
    std::vector<SampleId> eval_ids;         // samples monitored across checkpoints
    std::vector<int32_t> eval_predictions;  // checkpoint-major, |epochs| x |eval_ids|
    FeatureMatrix hidden_features;          // all input rows, dim = hidden_dim
    std::vector<int32_t> final_predictions;  // per input row
};

// First epoch at or above the accuracy threshold, with the last-20%-of-
// epochs fallback when the threshold is never reached; end is always the
// last epoch.
std::pair<int, int> detect_tpt(std::span<const double> accuracy, double threshold);

// Mini-batch SGD on the labeled rows. Prediction snapshots for eval_ids
// are kept for every epoch of the detected terminal window (the window is
// widened to two epochs when detection collapses to a single one, so
// fluctuation counting always has a consecutive pair). Throws
// DivergedTraining when the loss or a parameter leaves the finite range.
TrainingTrace train_model(ToyModel& model, const FeatureMatrix& inputs,
                          std::span<const SampleId> labeled_ids,
                          std::span<const int32_t> labels, std::span<const SampleId> eval_ids,
                          const TrainerConfig& cfg);

// Checkpoint table for the traced eval samples.
CheckpointPredictions trace_checkpoints(const TrainingTrace& trace);

}  // namespace ncal
