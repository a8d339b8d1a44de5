#include "ncal/collapse.hpp"

#include <cmath>
#include <string>

#include "ncal/kernels.hpp"

namespace ncal {

std::vector<double> labeled_global_mean(const FeatureMatrix& features, const PoolState& pool) {
    const std::size_t d = features.dim();
    std::vector<double> mean(d, 0.0);
    std::size_t n = 0;
    for (const auto& [cls, ids] : pool.labeled) {
        for (SampleId id : ids) {
            kern::axpy(1.0, features.row(id).data(), mean.data(), d);
            ++n;
        }
    }
    if (n == 0) raise(ErrorCode::EmptyInput, "no labeled samples");
    kern::scal(1.0 / static_cast<double>(n), mean.data(), d);
    return mean;
}

double nc1_variability(const FeatureMatrix& features, const PoolState& pool) {
    ClassStats stats = compute_class_stats(features, pool);
    if (stats.num_present() < 2)
        raise(ErrorCode::TooFewClasses, "variability ratio needs at least 2 present classes");

    const std::size_t d = features.dim();
    std::vector<double> global = labeled_global_mean(features, pool);

    double tr_within = 0.0;
    std::size_t n = 0;
    for (const auto& [cls, ids] : pool.labeled) {
        if (ids.empty()) continue;
        auto mean = stats.mean(cls);
        for (SampleId id : ids) {
            tr_within += kern::l2sq(features.row(id).data(), mean.data(), d);
            ++n;
        }
    }
    tr_within /= static_cast<double>(n);

    double tr_between = 0.0;
    for (int cls : stats.present)
        tr_between += kern::l2sq(stats.mean(cls).data(), global.data(), d);
    tr_between /= static_cast<double>(stats.num_present());

    if (tr_between < 1e-12)
        raise(ErrorCode::DegenerateBetween, "between-class trace " + std::to_string(tr_between));
    return tr_within / tr_between;
}

EtfDeviation nc2_etf_deviation(const ClassStats& stats, std::span<const double> global_mean) {
    const std::size_t kp = stats.num_present();
    if (kp < 2)
        raise(ErrorCode::TooFewClasses, "simplex deviation needs at least 2 present classes");
    if (global_mean.size() != stats.dim)
        raise(ErrorCode::IndexMismatch, "global mean dimension mismatch");

    const std::size_t d = stats.dim;
    std::vector<double> centered(kp * d);
    for (std::size_t i = 0; i < kp; ++i) {
        auto mean = stats.mean(stats.present[i]);
        double* row = centered.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] = mean[j] - global_mean[j];
        double norm = std::sqrt(kern::nrm2sq(row, d));
        if (norm < 1e-12)
            raise(ErrorCode::ZeroNormMean,
                  "class " + std::to_string(stats.present[i]) + " mean coincides with centroid");
        kern::scal(1.0 / norm, row, d);
    }

    std::vector<double> cosines;
    cosines.reserve(kp * (kp - 1) / 2);
    for (std::size_t i = 0; i < kp; ++i) {
        for (std::size_t j = i + 1; j < kp; ++j)
            cosines.push_back(kern::dot(centered.data() + i * d, centered.data() + j * d, d));
    }

    double mean = 0.0;
    for (double c : cosines) mean += c;
    mean /= static_cast<double>(cosines.size());
    double var = 0.0;
    for (double c : cosines) var += (c - mean) * (c - mean);
    var /= static_cast<double>(cosines.size());

    EtfDeviation out;
    out.cos_mean = mean;
    out.cos_std = std::sqrt(var);
    out.target = -1.0 / (static_cast<double>(kp) - 1.0);
    return out;
}

double nc4_nearest_mean_agreement(const FeatureMatrix& features, const PoolState& pool,
                                  const std::unordered_map<SampleId, int32_t>& predictions) {
    ClassStats stats = compute_class_stats(features, pool);
    if (stats.num_present() == 0) raise(ErrorCode::EmptyInput, "no labeled samples");

    const std::size_t d = features.dim();
    std::size_t agree = 0, total = 0;
    for (const auto& [cls, ids] : pool.labeled) {
        for (SampleId id : ids) {
            auto z = features.row(id);
            int best = stats.present.front();
            double best_d = kern::l2sq(z.data(), stats.mean(best).data(), d);
            for (std::size_t i = 1; i < stats.num_present(); ++i) {
                int c = stats.present[i];
                double dist = kern::l2sq(z.data(), stats.mean(c).data(), d);
                if (dist < best_d) {
                    best_d = dist;
                    best = c;
                }
            }
            auto it = predictions.find(id);
            if (it == predictions.end())
                raise(ErrorCode::MissingSample,
                      "no prediction for sample " + std::to_string(id));
            if (it->second == best) ++agree;
            ++total;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

InterclassDistances interclass_distances(const ClassStats& stats) {
    const std::size_t kp = stats.num_present();
    if (kp < 2)
        raise(ErrorCode::TooFewClasses, "pairwise distances need at least 2 present classes");

    InterclassDistances out;
    out.values.reserve(kp * (kp - 1) / 2);
    for (std::size_t i = 0; i < kp; ++i) {
        for (std::size_t j = i + 1; j < kp; ++j) {
            out.values.push_back(std::sqrt(kern::l2sq(stats.mean(stats.present[i]).data(),
                                                      stats.mean(stats.present[j]).data(),
                                                      stats.dim)));
        }
    }
    for (double v : out.values) out.mean += v;
    out.mean /= static_cast<double>(out.values.size());
    return out;
}

CollapseReport collapse_report(const FeatureMatrix& features, const PoolState& pool,
                               const std::unordered_map<SampleId, int32_t>& predictions) {
    ClassStats stats = compute_class_stats(features, pool);
    CollapseReport r;
    r.nc1_ratio = nc1_variability(features, pool);
    EtfDeviation etf = nc2_etf_deviation(stats, labeled_global_mean(features, pool));
    r.nc2_cos_mean = etf.cos_mean;
    r.nc2_cos_std = etf.cos_std;
    r.nc2_target = etf.target;
    r.nc4_agreement = nc4_nearest_mean_agreement(features, pool, predictions);
    InterclassDistances dist = interclass_distances(stats);
    r.interclass_dist_mean = dist.mean;
    r.interclass_dist_values = std::move(dist.values);
    return r;
}

}  // namespace ncal
