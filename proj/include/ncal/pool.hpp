#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "ncal/error.hpp"

namespace ncal {

using SampleId = int64_t;

// Row-major N x D matrix of embedding coordinates keyed by sample id.
// All entries are validated finite on construction; statistics downstream
// are computed in double precision regardless of the on-disk storage width.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    // Takes ownership of ids and data (data.size() must equal ids.size() * dim).
    // Throws NonFiniteValue / IndexMismatch on invalid input.
    static FeatureMatrix create(std::size_t dim, std::vector<SampleId> ids,
                                std::vector<double> data);

    std::size_t n_samples() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<SampleId>& ids() const { return ids_; }
    const std::vector<double>& data() const { return data_; }

    bool contains(SampleId id) const { return row_index_.count(id) != 0; }

    // Row lookup by sample id; throws MissingSample if absent.
    std::span<const double> row(SampleId id) const;
    std::span<const double> row_at(std::size_t r) const {
        return {data_.data() + r * dim_, dim_};
    }
    std::size_t row_of(SampleId id) const;

private:
    std::size_t dim_ = 0;
    std::vector<SampleId> ids_;
    std::vector<double> data_;
    std::unordered_map<SampleId, std::size_t> row_index_;
};

// Partition of the sample universe into per-class labeled sets and the
// unlabeled pool. Mutation is single-writer: only the acquisition loop
// moves samples between sets.
struct PoolState {
    int num_classes = 0;
    int cycle = 0;
    std::map<int, std::set<SampleId>> labeled;  // class -> ids, classes with >= 1 sample
    std::set<SampleId> unlabeled;

    static PoolState create(int num_classes, std::span<const SampleId> universe);

    // Moves sample_id from unlabeled to labeled[cls].
    // Throws AlreadyLabeled, UnknownClass, MissingSample.
    void apply_label(SampleId sample_id, int cls);

    std::size_t labeled_count() const;
    std::size_t universe_size() const { return labeled_count() + unlabeled.size(); }
};

// Per-class first-order statistics over the labeled pool.
// Rows of means/unit_means are valid only for classes listed in present.
struct ClassStats {
    std::size_t dim = 0;
    std::vector<std::size_t> counts;   // size num_classes
    std::vector<double> means;         // num_classes x dim, row-major
    std::vector<double> unit_means;    // num_classes x dim, rows have unit norm
    std::vector<double> m_sum;         // sum of unit means over present classes
    std::vector<int> present;          // ascending classes with count > 0

    std::size_t num_present() const { return present.size(); }
    std::span<const double> mean(int cls) const {
        return {means.data() + static_cast<std::size_t>(cls) * dim, dim};
    }
    std::span<const double> unit_mean(int cls) const {
        return {unit_means.data() + static_cast<std::size_t>(cls) * dim, dim};
    }
};

// Exact per-class means plus unit-normalized means and their sum, over
// present classes only. Throws MissingSample if a labeled id is absent
// from the matrix, ZeroNormMean if a class mean underflows normalization.
ClassStats compute_class_stats(const FeatureMatrix& features, const PoolState& pool);

}  // namespace ncal
