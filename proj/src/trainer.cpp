#include "ncal/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "ncal/kernels.hpp"

namespace ncal {

SyntheticDataset generate_blobs(const BlobSpec& spec) {
    if (spec.num_classes < 2) raise(ErrorCode::InvalidSpec, "need at least 2 classes");
    if (static_cast<int>(spec.per_class_counts.size()) != spec.num_classes)
        raise(ErrorCode::InvalidSpec, "per-class counts must have one entry per class");
    for (int c : spec.per_class_counts)
        if (c < 1) raise(ErrorCode::InvalidSpec, "per-class counts must be >= 1");
    if (!(spec.separation > 0.0)) raise(ErrorCode::InvalidSpec, "separation must be positive");
    if (spec.stddev < 0.0) raise(ErrorCode::InvalidSpec, "stddev must be non-negative");
    if (spec.input_dim < spec.num_classes)
        raise(ErrorCode::InvalidSpec, "input_dim must be >= num_classes for axis-aligned centers");

    const std::size_t d = static_cast<std::size_t>(spec.input_dim);
    std::size_t n = 0;
    for (int c : spec.per_class_counts) n += static_cast<std::size_t>(c);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> data(n * d, 0.0);
    std::vector<SampleId> ids(n);
    std::vector<int32_t> labels(n);
    std::size_t row = 0;
    for (int cls = 0; cls < spec.num_classes; ++cls) {
        for (int i = 0; i < spec.per_class_counts[static_cast<std::size_t>(cls)]; ++i) {
            double* x = data.data() + row * d;
            x[static_cast<std::size_t>(cls)] = spec.separation;
            if (spec.stddev > 0.0) {
                for (std::size_t j = 0; j < d; ++j) x[j] += spec.stddev * gauss(rng);
            }
            ids[row] = static_cast<SampleId>(row);
            labels[row] = cls;
            ++row;
        }
    }

    SyntheticDataset ds;
    ds.spec = spec;
    ds.features = FeatureMatrix::create(d, std::move(ids), std::move(data));
    ds.labels = std::move(labels);
    return ds;
}

ToyModel ToyModel::init(int in_dim, int hidden_dim, int num_classes, uint64_t seed) {
    if (in_dim < 1 || hidden_dim < 1 || num_classes < 2)
        raise(ErrorCode::InvalidSpec, "model dims must be positive with >= 2 classes");
    ToyModel m;
    m.in_dim = in_dim;
    m.hidden_dim = hidden_dim;
    m.num_classes = num_classes;
    m.w1.resize(static_cast<std::size_t>(hidden_dim) * in_dim);
    m.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    m.w2.resize(static_cast<std::size_t>(num_classes) * hidden_dim);
    m.b2.assign(static_cast<std::size_t>(num_classes), 0.0);

    std::mt19937_64 rng(seed);
    double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    std::uniform_real_distribution<double> u1(-s1, s1);
    for (double& w : m.w1) w = u1(rng);
    double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    std::uniform_real_distribution<double> u2(-s2, s2);
    for (double& w : m.w2) w = u2(rng);
    return m;
}

void ToyModel::forward(const double* x, double* hidden, double* logits) const {
    const std::size_t d = static_cast<std::size_t>(in_dim);
    const std::size_t h = static_cast<std::size_t>(hidden_dim);
    for (std::size_t j = 0; j < h; ++j)
        hidden[j] = b1[j] + kern::dot(w1.data() + j * d, x, d);
    kern::relu(hidden, hidden, h);
    for (std::size_t k = 0; k < static_cast<std::size_t>(num_classes); ++k)
        logits[k] = b2[k] + kern::dot(w2.data() + k * h, hidden, h);
}

int32_t ToyModel::predict(const double* x, double* hidden_buf, double* logit_buf) const {
    forward(x, hidden_buf, logit_buf);
    int32_t best = 0;
    for (int k = 1; k < num_classes; ++k)
        if (logit_buf[k] > logit_buf[best]) best = k;
    return best;
}

std::size_t ToyModel::param_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
}

void Gradients::resize_like(const ToyModel& m) {
    w1.assign(m.w1.size(), 0.0);
    b1.assign(m.b1.size(), 0.0);
    w2.assign(m.w2.size(), 0.0);
    b2.assign(m.b2.size(), 0.0);
}

namespace {

// Stable log-softmax pieces: returns loss term -log p[label] and writes
// the probability vector into probs.
double softmax_ce(const double* logits, int num_classes, int32_t label, double* probs) {
    double mx = logits[0];
    for (int k = 1; k < num_classes; ++k) mx = std::max(mx, logits[k]);
    double sum = 0.0;
    for (int k = 0; k < num_classes; ++k) {
        probs[k] = std::exp(logits[k] - mx);
        sum += probs[k];
    }
    for (int k = 0; k < num_classes; ++k) probs[k] /= sum;
    return -(logits[label] - mx - std::log(sum));
}

double l2_half(const std::vector<double>& w) {
    return 0.5 * kern::nrm2sq(w.data(), w.size());
}

}  // namespace

double loss_and_gradients(const ToyModel& model, const FeatureMatrix& inputs,
                          std::span<const SampleId> batch_ids,
                          std::span<const int32_t> batch_labels, double weight_decay,
                          Gradients& grads) {
    if (batch_ids.empty()) raise(ErrorCode::EmptyInput, "empty batch");
    if (batch_ids.size() != batch_labels.size())
        raise(ErrorCode::IndexMismatch, "batch ids/labels length mismatch");

    const std::size_t d = static_cast<std::size_t>(model.in_dim);
    const std::size_t h = static_cast<std::size_t>(model.hidden_dim);
    const std::size_t kk = static_cast<std::size_t>(model.num_classes);
    grads.resize_like(model);

    std::vector<double> hidden(h), logits(kk), probs(kk), dhidden(h);
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch_ids.size());

    for (std::size_t i = 0; i < batch_ids.size(); ++i) {
        const double* x = inputs.row(batch_ids[i]).data();
        int32_t y = batch_labels[i];
        if (y < 0 || y >= model.num_classes)
            raise(ErrorCode::UnknownClass, "label " + std::to_string(y));
        model.forward(x, hidden.data(), logits.data());
        loss += inv_b * softmax_ce(logits.data(), model.num_classes, y, probs.data());

        // d loss / d logits = (p - onehot) / B
        probs[static_cast<std::size_t>(y)] -= 1.0;
        kern::scal(inv_b, probs.data(), kk);

        for (std::size_t k = 0; k < kk; ++k) {
            kern::axpy(probs[k], hidden.data(), grads.w2.data() + k * h, h);
            grads.b2[k] += probs[k];
        }
        std::fill(dhidden.begin(), dhidden.end(), 0.0);
        for (std::size_t k = 0; k < kk; ++k)
            kern::axpy(probs[k], model.w2.data() + k * h, dhidden.data(), h);
        for (std::size_t j = 0; j < h; ++j) {
            if (hidden[j] <= 0.0) dhidden[j] = 0.0;
        }
        for (std::size_t j = 0; j < h; ++j) {
            if (dhidden[j] != 0.0) {
                kern::axpy(dhidden[j], x, grads.w1.data() + j * d, d);
                grads.b1[j] += dhidden[j];
            }
        }
    }

    if (weight_decay != 0.0) {
        loss += weight_decay * (l2_half(model.w1) + l2_half(model.w2));
        kern::axpy(weight_decay, model.w1.data(), grads.w1.data(), model.w1.size());
        kern::axpy(weight_decay, model.w2.data(), grads.w2.data(), model.w2.size());
    }
    return loss;
}

double batch_loss(const ToyModel& model, const FeatureMatrix& inputs,
                  std::span<const SampleId> batch_ids, std::span<const int32_t> batch_labels,
                  double weight_decay) {
    if (batch_ids.empty()) raise(ErrorCode::EmptyInput, "empty batch");
    const std::size_t h = static_cast<std::size_t>(model.hidden_dim);
    const std::size_t kk = static_cast<std::size_t>(model.num_classes);
    std::vector<double> hidden(h), logits(kk), probs(kk);
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch_ids.size());
    for (std::size_t i = 0; i < batch_ids.size(); ++i) {
        model.forward(inputs.row(batch_ids[i]).data(), hidden.data(), logits.data());
        loss += inv_b * softmax_ce(logits.data(), model.num_classes, batch_labels[i], probs.data());
    }
    if (weight_decay != 0.0)
        loss += weight_decay * (l2_half(model.w1) + l2_half(model.w2));
    return loss;
}

std::pair<int, int> detect_tpt(std::span<const double> accuracy, double threshold) {
    if (accuracy.empty()) raise(ErrorCode::EmptyInput, "no recorded epochs");
    const int n = static_cast<int>(accuracy.size());
    int t_f = n - 1;
    for (int e = 0; e < n; ++e) {
        if (accuracy[static_cast<std::size_t>(e)] >= threshold) return {e, t_f};
    }
    int tail = static_cast<int>(std::ceil(0.2 * static_cast<double>(n)));
    return {n - tail, t_f};
}

TrainingTrace train_model(ToyModel& model, const FeatureMatrix& inputs,
                          std::span<const SampleId> labeled_ids,
                          std::span<const int32_t> labels, std::span<const SampleId> eval_ids,
                          const TrainerConfig& cfg) {
    if (labeled_ids.empty()) raise(ErrorCode::EmptyInput, "no labeled samples to train on");
    if (labeled_ids.size() != labels.size())
        raise(ErrorCode::IndexMismatch, "labeled ids/labels length mismatch");
    if (cfg.epochs < 1 || cfg.batch_size < 1)
        raise(ErrorCode::InvalidSpec, "epochs and batch size must be >= 1");

    const std::size_t h = static_cast<std::size_t>(model.hidden_dim);
    const std::size_t kk = static_cast<std::size_t>(model.num_classes);
    const std::size_t n_lab = labeled_ids.size();

    std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(n_lab);
    std::iota(order.begin(), order.end(), std::size_t{0});

    Gradients grads;
    std::vector<SampleId> batch_ids;
    std::vector<int32_t> batch_labels;
    std::vector<double> hidden(h), logits(kk);

    // Snapshots are needed for every epoch from the first threshold
    // crossing onward, or from the fixed 20% tail when the threshold is
    // never reached; the tail start is also capped so at least two
    // checkpoints always exist.
    const int fallback_start =
        cfg.epochs - static_cast<int>(std::ceil(0.2 * static_cast<double>(cfg.epochs)));
    const int always_record_from = std::max(0, std::min(fallback_start, cfg.epochs - 2));
    bool crossed = false;

    TrainingTrace trace;
    trace.eval_ids.assign(eval_ids.begin(), eval_ids.end());
    std::vector<int> recorded_epochs;
    std::vector<std::vector<int32_t>> recorded_preds;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < n_lab;
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t end = std::min(n_lab, start + static_cast<std::size_t>(cfg.batch_size));
            batch_ids.clear();
            batch_labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch_ids.push_back(labeled_ids[order[i]]);
                batch_labels.push_back(labels[order[i]]);
            }
            double loss =
                loss_and_gradients(model, inputs, batch_ids, batch_labels, cfg.weight_decay, grads);
            if (!std::isfinite(loss))
                raise(ErrorCode::DivergedTraining,
                      "non-finite loss at epoch " + std::to_string(epoch));
            kern::axpy(-cfg.learning_rate, grads.w1.data(), model.w1.data(), model.w1.size());
            kern::axpy(-cfg.learning_rate, grads.b1.data(), model.b1.data(), model.b1.size());
            kern::axpy(-cfg.learning_rate, grads.w2.data(), model.w2.data(), model.w2.size());
            kern::axpy(-cfg.learning_rate, grads.b2.data(), model.b2.data(), model.b2.size());
        }

        std::size_t correct = 0;
        for (std::size_t i = 0; i < n_lab; ++i) {
            if (model.predict(inputs.row(labeled_ids[i]).data(), hidden.data(), logits.data()) ==
                labels[i])
                ++correct;
        }
        double acc = static_cast<double>(correct) / static_cast<double>(n_lab);
        trace.train_accuracy.push_back(acc);
        if (acc >= cfg.tpt_threshold) crossed = true;

        if (crossed || epoch >= always_record_from) {
            std::vector<int32_t> snap(trace.eval_ids.size());
            for (std::size_t i = 0; i < trace.eval_ids.size(); ++i)
                snap[i] =
                    model.predict(inputs.row(trace.eval_ids[i]).data(), hidden.data(), logits.data());
            recorded_epochs.push_back(epoch);
            recorded_preds.push_back(std::move(snap));
        }
    }

    for (double w : model.w1)
        if (!std::isfinite(w)) raise(ErrorCode::DivergedTraining, "non-finite parameter");
    for (double w : model.w2)
        if (!std::isfinite(w)) raise(ErrorCode::DivergedTraining, "non-finite parameter");

    auto [t_i, t_f] = detect_tpt(trace.train_accuracy, cfg.tpt_threshold);
    if (t_i == t_f && cfg.epochs >= 2) t_i = cfg.epochs - 2;  // widen for flip counting
    trace.tpt_start = t_i;
    trace.tpt_end = t_f;

    for (std::size_t s = 0; s < recorded_epochs.size(); ++s) {
        int epoch = recorded_epochs[s];
        if (epoch < t_i || epoch > t_f) continue;
        trace.checkpoint_epochs.push_back(epoch);
        trace.eval_predictions.insert(trace.eval_predictions.end(), recorded_preds[s].begin(),
                                      recorded_preds[s].end());
    }

    // Final-model view of the whole dataset: penultimate features plus
    // argmax predictions for every row.
    const std::size_t n_all = inputs.n_samples();
    std::vector<double> hidden_all(n_all * h);
    trace.final_predictions.resize(n_all);
    for (std::size_t r = 0; r < n_all; ++r) {
        model.forward(inputs.row_at(r).data(), hidden_all.data() + r * h, logits.data());
        int32_t best = 0;
        for (int k = 1; k < model.num_classes; ++k)
            if (logits[static_cast<std::size_t>(k)] > logits[static_cast<std::size_t>(best)])
                best = k;
        trace.final_predictions[r] = best;
    }
    trace.hidden_features = FeatureMatrix::create(h, inputs.ids(), std::move(hidden_all));
    return trace;
}

CheckpointPredictions trace_checkpoints(const TrainingTrace& trace) {
    const std::size_t n_eval = trace.eval_ids.size();
    const std::size_t n_ck = trace.checkpoint_epochs.size();
    // stored checkpoint-major; the prediction table wants sample-major
    std::vector<int32_t> rows(n_eval * n_ck);
    for (std::size_t s = 0; s < n_ck; ++s) {
        for (std::size_t i = 0; i < n_eval; ++i)
            rows[i * n_ck + s] = trace.eval_predictions[s * n_eval + i];
    }
    return CheckpointPredictions::create(trace.checkpoint_epochs, trace.eval_ids,
                                         std::move(rows));
}

}  // namespace ncal
