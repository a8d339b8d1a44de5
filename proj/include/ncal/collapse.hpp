#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "ncal/pool.hpp"

namespace ncal {

struct EtfDeviation {
    double cos_mean = 0.0;
    double cos_std = 0.0;
    double target = 0.0;  // -1/(K'-1)
};

struct InterclassDistances {
    double mean = 0.0;
    std::vector<double> values;  // K'(K'-1)/2 pairwise distances, pair order (i<j)
};

struct CollapseReport {
    double nc1_ratio = 0.0;
    double nc2_cos_mean = 0.0;
    double nc2_cos_std = 0.0;
    double nc2_target = 0.0;
    double nc4_agreement = 0.0;
    double interclass_dist_mean = 0.0;
    std::vector<double> interclass_dist_values;
};

// Within-class over between-class variability, as a ratio of covariance
// traces; 0 means every labeled sample sits exactly on its class mean.
// Throws TooFewClasses (< 2 present) and DegenerateBetween (coincident means).
double nc1_variability(const FeatureMatrix& features, const PoolState& pool);

// Mean/std of pairwise cosines between globally-centered, unit-normalized
// class means, plus the simplex target -1/(K'-1).
EtfDeviation nc2_etf_deviation(const ClassStats& stats, std::span<const double> global_mean);

// Fraction of labeled samples whose nearest class mean (Euclidean, over
// present classes) matches the supplied prediction.
double nc4_nearest_mean_agreement(const FeatureMatrix& features, const PoolState& pool,
                                  const std::unordered_map<SampleId, int32_t>& predictions);

// Pairwise Euclidean distances between unnormalized class means.
InterclassDistances interclass_distances(const ClassStats& stats);

// Sample mean of the labeled features (the centering vector for nc2).
std::vector<double> labeled_global_mean(const FeatureMatrix& features, const PoolState& pool);

CollapseReport collapse_report(const FeatureMatrix& features, const PoolState& pool,
                               const std::unordered_map<SampleId, int32_t>& predictions);

}  // namespace ncal
