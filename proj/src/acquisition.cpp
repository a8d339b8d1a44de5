#include "ncal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "ncal/kernels.hpp"

namespace ncal {

CheckpointPredictions CheckpointPredictions::create(std::vector<int> epochs,
                                                    std::vector<SampleId> ids,
                                                    std::vector<int32_t> preds) {
    if (epochs.size() < 2)
        raise(ErrorCode::TooFewCheckpoints,
              std::to_string(epochs.size()) + " checkpoint(s), need at least 2");
    for (std::size_t i = 1; i < epochs.size(); ++i) {
        if (epochs[i] <= epochs[i - 1])
            raise(ErrorCode::InvalidSpec, "checkpoint epochs not strictly increasing");
    }
    if (preds.size() != ids.size() * epochs.size())
        raise(ErrorCode::IndexMismatch, "prediction table shape mismatch");

    CheckpointPredictions cp;
    cp.epochs_ = std::move(epochs);
    cp.ids_ = std::move(ids);
    cp.preds_ = std::move(preds);
    cp.row_index_.reserve(cp.ids_.size());
    for (std::size_t r = 0; r < cp.ids_.size(); ++r) {
        if (!cp.row_index_.emplace(cp.ids_[r], r).second)
            raise(ErrorCode::IndexMismatch, "duplicate sample id " + std::to_string(cp.ids_[r]));
    }
    return cp;
}

std::span<const int32_t> CheckpointPredictions::row(SampleId id) const {
    auto it = row_index_.find(id);
    if (it == row_index_.end())
        raise(ErrorCode::MissingSample, "no predictions for sample " + std::to_string(id));
    return {preds_.data() + it->second * epochs_.size(), epochs_.size()};
}

int feature_fluctuation(const CheckpointPredictions& preds, SampleId sample_id) {
    auto r = preds.row(sample_id);
    int flips = 0;
    for (std::size_t t = 1; t < r.size(); ++t) {
        if (r[t] != r[t - 1]) ++flips;
    }
    return flips;
}

double class_mean_alignment(const ClassStats& stats) {
    const std::size_t kp = stats.num_present();
    if (kp < 2)
        raise(ErrorCode::TooFewClasses,
              std::to_string(kp) + " present class(es), need at least 2");
    double sum = 0.0;
    for (std::size_t i = 0; i < kp; ++i) {
        for (std::size_t j = i + 1; j < kp; ++j) {
            sum += kern::dot(stats.unit_mean(stats.present[i]).data(),
                             stats.unit_mean(stats.present[j]).data(), stats.dim);
        }
    }
    // ordered-pair average; each unordered pair counts twice
    return 2.0 * sum / (static_cast<double>(kp) * static_cast<double>(kp - 1));
}

std::vector<double> updated_class_mean(const ClassStats& stats, int cls,
                                       std::span<const double> z) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= stats.counts.size())
        raise(ErrorCode::UnknownClass, "class " + std::to_string(cls));
    if (z.size() != stats.dim) raise(ErrorCode::IndexMismatch, "candidate dimension mismatch");
    for (double v : z) {
        if (!std::isfinite(v)) raise(ErrorCode::NonFiniteValue, "candidate feature");
    }
    const double n = static_cast<double>(stats.counts[static_cast<std::size_t>(cls)]);
    std::vector<double> out(z.begin(), z.end());
    if (n == 0.0) return out;
    auto mean = stats.mean(cls);
    for (std::size_t j = 0; j < stats.dim; ++j) out[j] = (n * mean[j] + z[j]) / (n + 1.0);
    return out;
}

namespace {

void normalize_or_throw(std::vector<double>& v, const char* what) {
    double norm = std::sqrt(kern::nrm2sq(v.data(), v.size()));
    if (norm < 1e-12) raise(ErrorCode::ZeroNormMean, what);
    kern::scal(1.0 / norm, v.data(), v.size());
}

}  // namespace

double cmap_closed_form(const ClassStats& stats, int cls, std::span<const double> z) {
    if (stats.num_present() < 2)
        raise(ErrorCode::TooFewClasses, "perturbation needs at least 2 present classes");

    std::vector<double> updated = updated_class_mean(stats, cls, z);
    normalize_or_throw(updated, "updated class mean underflows");

    const std::size_t d = stats.dim;
    if (stats.counts[static_cast<std::size_t>(cls)] == 0) {
        // First sample of a new class: no prior mean to displace, the
        // perturbation is the normalized candidate against the mean sum.
        return kern::dot(updated.data(), stats.m_sum.data(), d);
    }

    auto unit = stats.unit_mean(cls);
    std::vector<double> diff(d), rest(d);
    for (std::size_t j = 0; j < d; ++j) {
        diff[j] = updated[j] - unit[j];
        rest[j] = stats.m_sum[j] - unit[j];
    }
    return kern::dot(diff.data(), rest.data(), d);
}

namespace {

// Plain-loop cosine of two raw vectors; part of the oracle path.
double cos_plain(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        ab += a[j] * b[j];
        aa += a[j] * a[j];
        bb += b[j] * b[j];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double cma_of_means(const std::vector<std::vector<double>>& means) {
    const std::size_t kp = means.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < kp; ++i) {
        for (std::size_t j = 0; j < kp; ++j) {
            if (i != j) sum += cos_plain(means[i], means[j]);
        }
    }
    return sum / (static_cast<double>(kp) * static_cast<double>(kp - 1));
}

}  // namespace

double cmap_bruteforce(const FeatureMatrix& features, const PoolState& pool, int cls,
                       std::span<const double> z) {
    const std::size_t d = features.dim();
    if (z.size() != d) raise(ErrorCode::IndexMismatch, "candidate dimension mismatch");

    auto cls_it = pool.labeled.find(cls);
    if (cls_it == pool.labeled.end() || cls_it->second.empty())
        raise(ErrorCode::InvalidSpec,
              "brute-force perturbation requires a present class, got " + std::to_string(cls));

    std::vector<std::vector<double>> before, after;
    for (const auto& [c, ids] : pool.labeled) {
        if (ids.empty()) continue;
        std::vector<double> sum(d, 0.0);
        for (SampleId id : ids) {
            auto r = features.row(id);
            for (std::size_t j = 0; j < d; ++j) sum[j] += r[j];
        }
        std::vector<double> mean(d);
        for (std::size_t j = 0; j < d; ++j) mean[j] = sum[j] / static_cast<double>(ids.size());
        before.push_back(mean);

        if (c == cls) {
            for (std::size_t j = 0; j < d; ++j) sum[j] += z[j];
            for (std::size_t j = 0; j < d; ++j)
                mean[j] = sum[j] / static_cast<double>(ids.size() + 1);
        }
        after.push_back(std::move(mean));
    }

    const std::size_t kp = before.size();
    if (kp < 2)
        raise(ErrorCode::TooFewClasses,
              std::to_string(kp) + " present class(es), need at least 2");

    double delta = cma_of_means(after) - cma_of_means(before);
    return delta * static_cast<double>(kp) * static_cast<double>(kp - 1) / 2.0;
}

std::vector<double> zscore(std::span<const double> values) {
    if (values.empty()) raise(ErrorCode::EmptyInput, "zscore of empty list");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    double sd = std::sqrt(var);

    std::vector<double> out(values.size(), 0.0);
    if (sd < 1e-12) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
    return out;
}

std::vector<std::size_t> AcquisitionResult::by_rank() const {
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        order[static_cast<std::size_t>(candidates[i].rank)] = i;
    return order;
}

AcquisitionResult score_candidates(const FeatureMatrix& features, const PoolState& pool,
                                   const ClassStats& stats, const CheckpointPredictions& preds,
                                   int threads) {
    if (pool.unlabeled.empty()) raise(ErrorCode::EmptyInput, "no unlabeled candidates");

    AcquisitionResult result;
    result.candidates.resize(pool.unlabeled.size());
    std::vector<SampleId> ids(pool.unlabeled.begin(), pool.unlabeled.end());

    // Raw scores per candidate slot; slots are independent, so any thread
    // partition yields the same result.
    auto score_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            CandidateScore& c = result.candidates[i];
            c.id = ids[i];
            try {
                c.predicted_class = preds.final_prediction(c.id);
                c.ff_raw = feature_fluctuation(preds, c.id);
                c.cmap_raw = cmap_closed_form(stats, c.predicted_class, features.row(c.id));
            } catch (const Error& e) {
                throw Error(e.code(),
                            "candidate " + std::to_string(c.id) + ": " + e.what());
            }
        }
    };

    const std::size_t n = ids.size();
    if (threads <= 1 || n < 2) {
        score_range(0, n);
    } else {
        const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
        std::vector<std::exception_ptr> errs(nt);
        std::vector<std::thread> workers;
        workers.reserve(nt);
        for (std::size_t t = 0; t < nt; ++t) {
            std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
            workers.emplace_back([&, t, lo, hi] {
                try {
                    score_range(lo, hi);
                } catch (...) {
                    errs[t] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (auto& e : errs) {
            if (e) std::rethrow_exception(e);  // lowest chunk wins; chunks are ordered
        }
    }

    std::vector<double> cmap_raw(n), ff_raw(n);
    for (std::size_t i = 0; i < n; ++i) {
        cmap_raw[i] = result.candidates[i].cmap_raw;
        ff_raw[i] = static_cast<double>(result.candidates[i].ff_raw);
    }
    std::vector<double> cmap_std = zscore(cmap_raw);
    std::vector<double> ff_std = zscore(ff_raw);
    for (std::size_t i = 0; i < n; ++i) {
        result.candidates[i].cmap_std = cmap_std[i];
        result.candidates[i].ff_std = ff_std[i];
        result.candidates[i].score = 0.5 * (cmap_std[i] + ff_std[i]);
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = result.candidates[a];
        const auto& cb = result.candidates[b];
        if (ca.score != cb.score) return ca.score > cb.score;
        return ca.id < cb.id;
    });
    for (std::size_t r = 0; r < n; ++r)
        result.candidates[order[r]].rank = static_cast<int32_t>(r);
    return result;
}

void mark_selected(AcquisitionResult& result, std::size_t k) {
    if (k > result.candidates.size())
        raise(ErrorCode::BudgetExceedsPool, "k=" + std::to_string(k) + " > " +
                                                std::to_string(result.candidates.size()) +
                                                " candidates");
    for (auto& c : result.candidates)
        c.selected = static_cast<std::size_t>(c.rank) < k;
}

std::vector<SampleId> select_top_k(const AcquisitionResult& result, std::size_t k) {
    if (k < 1 || k > result.candidates.size())
        raise(ErrorCode::BudgetExceedsPool, "k=" + std::to_string(k) + " outside [1, " +
                                                std::to_string(result.candidates.size()) + "]");
    auto order = result.by_rank();
    std::vector<SampleId> out;
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) out.push_back(result.candidates[order[r]].id);
    return out;
}

}  // namespace ncal
