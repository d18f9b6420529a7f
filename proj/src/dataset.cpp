#include "mediatop/dataset.hpp"

#include <cmath>
#include <string>

#include "mediatop/error.hpp"

namespace mediatop {

int LabelSet::crisp(std::size_t i) const {
    if (!present(i)) return -1;
    const auto row = coding.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
        if (row[c] > row[best]) best = c;
    }
    return static_cast<int>(best);
}

LabelSet LabelSet::from_classes(const std::vector<int>& classes, std::vector<std::string> names) {
    LabelSet out;
    out.coding = Matrix(classes.size(), names.size());
    out.mask.assign(classes.size(), 0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] < 0) continue;
        if (static_cast<std::size_t>(classes[i]) >= names.size()) {
            fail(ErrorKind::data, "class index out of range at point " + std::to_string(i));
        }
        out.coding(i, static_cast<std::size_t>(classes[i])) = 1.0;
        out.mask[i] = 1;
    }
    out.class_names = std::move(names);
    return out;
}

LabelSet LabelSet::subset(const std::vector<std::size_t>& rows) const {
    LabelSet out;
    out.coding = Matrix(rows.size(), coding.cols());
    out.mask.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = coding.row(rows[r]);
        std::copy(src.begin(), src.end(), out.coding.row(r).begin());
        out.mask[r] = mask[rows[r]];
    }
    out.class_names = class_names;
    return out;
}

static void validate_labels(const LabelSet& labels, std::size_t n) {
    if (labels.coding.rows() != n || labels.mask.size() != n) {
        fail(ErrorKind::data, "label rows do not match the number of points");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!labels.present(i)) continue;
        double sum = 0.0;
        for (double v : labels.coding.row(i)) {
            if (!(v >= 0.0 && v <= 1.0)) {
                fail(ErrorKind::data, "label entry outside [0,1] at point " + std::to_string(i));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            fail(ErrorKind::data, "label row does not sum to 1 at point " + std::to_string(i));
        }
    }
}

void VectorDataset::validate() const {
    if (points.rows() < 1 || points.cols() < 1) fail(ErrorKind::data, "dataset needs N >= 1 and M >= 1");
    for (double v : points.values()) {
        if (!std::isfinite(v)) fail(ErrorKind::data, "dataset contains a non-finite value");
    }
    if (labels) validate_labels(*labels, points.rows());
}

VectorDataset VectorDataset::subset(const std::vector<std::size_t>& rows) const {
    VectorDataset out;
    out.points = Matrix(rows.size(), points.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = points.row(rows[r]);
        std::copy(src.begin(), src.end(), out.points.row(r).begin());
    }
    if (labels) out.labels = labels->subset(rows);
    return out;
}

void SequenceDataset::validate() const {
    if (sequences.empty()) fail(ErrorKind::data, "sequence dataset is empty");
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        if (sequences[i].empty()) fail(ErrorKind::data, "empty sequence at line " + std::to_string(i + 1));
        for (double v : sequences[i]) {
            if (!std::isfinite(v)) fail(ErrorKind::data, "non-finite entry in sequence " + std::to_string(i));
        }
    }
    if (labels) validate_labels(*labels, sequences.size());
}

const char* to_string(StdConvention c) {
    return c == StdConvention::population ? "population" : "sample";
}

VectorDataset zscore_standardize(const VectorDataset& data, StdConvention convention) {
    const std::size_t n = data.size();
    const std::size_t m = data.dim();
    if (n < 2) fail(ErrorKind::data, "z-scores need at least two points");
    VectorDataset out = data;
    const double denom = convention == StdConvention::population ? static_cast<double>(n)
                                                                  : static_cast<double>(n - 1);
    for (std::size_t c = 0; c < m; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data.points(i, c);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = data.points(i, c) - mean;
            ss += dv * dv;
        }
        const double sd = std::sqrt(ss / denom);
        for (std::size_t i = 0; i < n; ++i) {
            const double centered = data.points(i, c) - mean;
            out.points(i, c) = sd > 0.0 ? centered / sd : centered;
        }
    }
    return out;
}

}  // namespace mediatop
