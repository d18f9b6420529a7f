#ifndef MEDIATOP_DISSIMILARITY_HPP
#define MEDIATOP_DISSIMILARITY_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mediatop/dataset.hpp"
#include "mediatop/matrix.hpp"

namespace mediatop {

/// Read-only provider of pairwise dissimilarities d(i, j). Implementations
/// must be safe for concurrent readers.
class DissimilaritySource {
public:
    virtual ~DissimilaritySource() = default;

    virtual std::size_t size() const = 0;
    virtual double operator()(std::size_t i, std::size_t j) const = 0;
    virtual bool symmetric() const = 0;

    /// out[r * cols.size() + c] = d(rows[r], cols[c]).
    virtual void fill_block(std::span<const std::size_t> rows,
                            std::span<const std::size_t> cols, double* out) const;
};

/// Fully materialized N x N matrix.
class DenseDissimilarity final : public DissimilaritySource {
public:
    DenseDissimilarity() = default;
    DenseDissimilarity(Matrix values, bool symmetric);

    std::size_t size() const override { return values_.rows(); }
    double operator()(std::size_t i, std::size_t j) const override { return values_(i, j); }
    bool symmetric() const override { return symmetric_; }

    const double* row(std::size_t i) const { return values_.data() + i * values_.cols(); }
    const Matrix& values() const { return values_; }

    /// Square submatrix on the given index list (in that order).
    DenseDissimilarity restrict_to(std::span<const std::size_t> idx) const;

private:
    Matrix values_;
    bool symmetric_ = false;
};

enum class Metric { squared_euclidean, cosine, edit };

const char* to_string(Metric m);
Metric metric_from_string(const std::string& name);

/// Evaluates the metric on the fly from the stored data.
class MetricDissimilarity final : public DissimilaritySource {
public:
    MetricDissimilarity(std::shared_ptr<const VectorDataset> data, Metric metric);
    MetricDissimilarity(std::shared_ptr<const SequenceDataset> data, double indel_cost);

    std::size_t size() const override;
    double operator()(std::size_t i, std::size_t j) const override;
    bool symmetric() const override { return true; }

private:
    std::shared_ptr<const VectorDataset> vectors_;
    std::shared_ptr<const SequenceDataset> sequences_;
    Metric metric_;
    double indel_cost_ = 0.0;
};

/// Random access into a binary DSM1 file without loading it.
class BinaryFileDissimilarity final : public DissimilaritySource {
public:
    BinaryFileDissimilarity(const std::string& path, bool symmetric);
    ~BinaryFileDissimilarity() override;
    BinaryFileDissimilarity(const BinaryFileDissimilarity&) = delete;
    BinaryFileDissimilarity& operator=(const BinaryFileDissimilarity&) = delete;

    std::size_t size() const override { return n_; }
    double operator()(std::size_t i, std::size_t j) const override;
    bool symmetric() const override { return symmetric_; }
    void fill_block(std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                    double* out) const override;

private:
    int fd_ = -1;
    std::size_t n_ = 0;
    bool symmetric_ = false;
};

/// Wraps another source and counts every entry read. With per-entry
/// tracking enabled it also records how often each (i, j) was read.
class CountingDissimilarity final : public DissimilaritySource {
public:
    explicit CountingDissimilarity(const DissimilaritySource& inner, bool track_entries = false);

    std::size_t size() const override { return inner_.size(); }
    double operator()(std::size_t i, std::size_t j) const override;
    bool symmetric() const override { return inner_.symmetric(); }
    void fill_block(std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                    double* out) const override;

    std::uint64_t accesses() const { return accesses_.load(); }
    /// Reads of entry (i, j); requires track_entries.
    std::uint32_t reads(std::size_t i, std::size_t j) const;

private:
    void record(std::size_t i, std::size_t j) const;

    const DissimilaritySource& inner_;
    mutable std::atomic<std::uint64_t> accesses_{0};
    bool track_;
    std::unique_ptr<std::atomic<std::uint32_t>[]> per_entry_;
};

/// Copy any source into memory.
DenseDissimilarity materialize(const DissimilaritySource& source);

DenseDissimilarity materialize_dissimilarity(const VectorDataset& data, Metric metric);
DenseDissimilarity materialize_dissimilarity(const SequenceDataset& data,
                                             double indel_cost);

/// Checks zero diagonal, finiteness and nonnegativity on all pairs (N <= 200)
/// or on a seeded sample of pairs; symmetry too when declared.
void validate_dissimilarity(const DissimilaritySource& source, std::size_t sample_pairs = 20000,
                            std::uint64_t seed = 0);

}  // namespace mediatop

#endif  // MEDIATOP_DISSIMILARITY_HPP
