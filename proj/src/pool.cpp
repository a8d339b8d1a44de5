#include "ncal/pool.hpp"

#include <cmath>
#include <string>

#include "ncal/kernels.hpp"

namespace ncal {

FeatureMatrix FeatureMatrix::create(std::size_t dim, std::vector<SampleId> ids,
                                    std::vector<double> data) {
    if (dim == 0) raise(ErrorCode::InvalidSpec, "feature dimension must be positive");
    if (data.size() != ids.size() * dim)
        raise(ErrorCode::IndexMismatch,
              "data size " + std::to_string(data.size()) + " != n_samples*dim " +
                  std::to_string(ids.size() * dim));
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i]))
            raise(ErrorCode::NonFiniteValue,
                  "row " + std::to_string(i / dim) + " col " + std::to_string(i % dim));
    }
    FeatureMatrix m;
    m.dim_ = dim;
    m.ids_ = std::move(ids);
    m.data_ = std::move(data);
    m.row_index_.reserve(m.ids_.size());
    for (std::size_t r = 0; r < m.ids_.size(); ++r) {
        if (!m.row_index_.emplace(m.ids_[r], r).second)
            raise(ErrorCode::IndexMismatch, "duplicate sample id " + std::to_string(m.ids_[r]));
    }
    return m;
}

std::span<const double> FeatureMatrix::row(SampleId id) const {
    return row_at(row_of(id));
}

std::size_t FeatureMatrix::row_of(SampleId id) const {
    auto it = row_index_.find(id);
    if (it == row_index_.end())
        raise(ErrorCode::MissingSample, "sample id " + std::to_string(id));
    return it->second;
}

PoolState PoolState::create(int num_classes, std::span<const SampleId> universe) {
    if (num_classes < 1) raise(ErrorCode::InvalidSpec, "num_classes must be >= 1");
    PoolState pool;
    pool.num_classes = num_classes;
    pool.unlabeled.insert(universe.begin(), universe.end());
    if (pool.unlabeled.size() != universe.size())
        raise(ErrorCode::IndexMismatch, "duplicate ids in sample universe");
    return pool;
}

void PoolState::apply_label(SampleId sample_id, int cls) {
    if (cls < 0 || cls >= num_classes)
        raise(ErrorCode::UnknownClass, "class " + std::to_string(cls) + " outside [0, " +
                                           std::to_string(num_classes) + ")");
    auto it = unlabeled.find(sample_id);
    if (it == unlabeled.end()) {
        for (const auto& [c, ids] : labeled) {
            if (ids.count(sample_id))
                raise(ErrorCode::AlreadyLabeled, "sample " + std::to_string(sample_id) +
                                                     " already in class " + std::to_string(c));
        }
        raise(ErrorCode::MissingSample, "sample " + std::to_string(sample_id) + " not in pool");
    }
    unlabeled.erase(it);
    labeled[cls].insert(sample_id);
}

std::size_t PoolState::labeled_count() const {
    std::size_t n = 0;
    for (const auto& [c, ids] : labeled) n += ids.size();
    return n;
}

ClassStats compute_class_stats(const FeatureMatrix& features, const PoolState& pool) {
    const std::size_t d = features.dim();
    const std::size_t k = static_cast<std::size_t>(pool.num_classes);

    ClassStats stats;
    stats.dim = d;
    stats.counts.assign(k, 0);
    stats.means.assign(k * d, 0.0);
    stats.unit_means.assign(k * d, 0.0);
    stats.m_sum.assign(d, 0.0);

    for (const auto& [cls, ids] : pool.labeled) {
        if (ids.empty()) continue;
        double* mean = stats.means.data() + static_cast<std::size_t>(cls) * d;
        for (SampleId id : ids) {
            kern::axpy(1.0, features.row(id).data(), mean, d);
        }
        kern::scal(1.0 / static_cast<double>(ids.size()), mean, d);
        stats.counts[static_cast<std::size_t>(cls)] = ids.size();
        stats.present.push_back(cls);

        double norm = std::sqrt(kern::nrm2sq(mean, d));
        if (norm < 1e-12)
            raise(ErrorCode::ZeroNormMean,
                  "class " + std::to_string(cls) + " mean norm " + std::to_string(norm));
        double* unit = stats.unit_means.data() + static_cast<std::size_t>(cls) * d;
        for (std::size_t j = 0; j < d; ++j) unit[j] = mean[j] / norm;
        kern::axpy(1.0, unit, stats.m_sum.data(), d);
    }
    return stats;
}

}  // namespace ncal
