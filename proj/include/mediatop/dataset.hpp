#ifndef MEDIATOP_DATASET_HPP
#define MEDIATOP_DATASET_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mediatop/matrix.hpp"

namespace mediatop {

/// Per-point class information in full disjunctive coding. Rows with
/// mask[i] == false carry no label (semi-supervised setting).
struct LabelSet {
    Matrix coding;                        // N x d, rows on the simplex
    std::vector<char> mask;               // N flags, 1 = label present
    std::vector<std::string> class_names; // d names

    std::size_t classes() const { return coding.cols(); }
    bool present(std::size_t i) const { return mask[i] != 0; }
    /// Crisp class of point i (argmax, lowest index on ties); -1 if unlabeled.
    int crisp(std::size_t i) const;

    /// One-hot coding from class indices; -1 marks an unlabeled point.
    static LabelSet from_classes(const std::vector<int>& classes,
                                 std::vector<std::string> names);
    LabelSet subset(const std::vector<std::size_t>& rows) const;
};

struct VectorDataset {
    Matrix points;                  // N x M
    std::optional<LabelSet> labels;

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }

    /// Throws ErrorKind::data when an invariant does not hold.
    void validate() const;
    VectorDataset subset(const std::vector<std::size_t>& rows) const;
};

struct SequenceDataset {
    std::vector<std::vector<double>> sequences;
    std::optional<LabelSet> labels;

    std::size_t size() const { return sequences.size(); }
    void validate() const;
};

enum class StdConvention { population, sample };

const char* to_string(StdConvention c);

/// Column-wise z-scores. Zero-variance columns are only centered.
VectorDataset zscore_standardize(const VectorDataset& data,
                                 StdConvention convention = StdConvention::population);

}  // namespace mediatop

#endif  // MEDIATOP_DATASET_HPP
