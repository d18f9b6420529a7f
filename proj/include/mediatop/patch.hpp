#ifndef MEDIATOP_PATCH_HPP
#define MEDIATOP_PATCH_HPP

// Single-pass patch median NG. The data are split into consecutive patches;
// the prototypes of one patch travel into the next as extra points whose
// multiplicity is the number of original points they stand for.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mediatop/dissimilarity.hpp"
#include "mediatop/median.hpp"

namespace mediatop {

struct PatchPlan {
    std::size_t n = 0;
    std::size_t patches = 0;
    std::size_t base = 0;  // floor(N / patches)
    std::vector<std::pair<std::size_t, std::size_t>> bounds;  // [begin, end)

    std::size_t patch_size(std::size_t i) const { return bounds[i].second - bounds[i].first; }
};

/// The first N - base * patches patches receive one extra point.
PatchPlan make_patch_plan(std::size_t n, std::size_t patches);

/// Reads the diagonal blocks of a symmetric source one patch at a time.
/// Only the strict upper triangle of each block is read.
class RowBlockIterator {
public:
    RowBlockIterator(const DissimilaritySource& source, const PatchPlan& plan);

    bool done() const { return next_ >= plan_.patches; }
    std::size_t index() const { return next_; }
    /// Dissimilarities within the next patch; advances the iterator.
    Matrix next();

private:
    const DissimilaritySource& source_;
    const PatchPlan& plan_;
    std::size_t next_ = 0;
};

/// Symmetric (K + p') x (K + p') block: carried prototypes first, then the
/// patch points.
struct ExtendedPatch {
    Matrix dissim;
    std::vector<double> multiplicity;
    std::vector<std::size_t> origin;  // global data index per row
    std::size_t carried = 0;          // number of leading carried prototypes

    std::size_t size() const { return origin.size(); }
};

/// `patch_block` (optional) supplies the already read patch dissimilarities.
ExtendedPatch build_extended_patch(const DissimilaritySource& d, const PatchPlan& plan, std::size_t i,
                                   std::span<const std::size_t> prev_loc,
                                   std::span<const double> prev_multiplicity,
                                   const Matrix* patch_block = nullptr);

enum class MultiplicityMode {
    point,     // m_i weights every point's contribution (cost and argmin)
    literal,   // m_j per prototype: constant in the argmin, so training is unweighted
};

const char* to_string(MultiplicityMode m);

struct PatchOptions {
    SupervisionConfig supervision;
    NgImpl ng_impl = NgImpl::early_coarse;
    TiePolicy ties = TiePolicy::lowest_index;
    MultiplicityMode multiplicity = MultiplicityMode::point;
};

struct WeightedNgResult {
    MedianPrototypes prototypes;      // local row indices of the extended patch
    std::vector<double> totals;       // sum of m_i over each final receptive field
    MedianModel model;
};

/// `labels` rows follow the extended patch rows; `init` gives local starting
/// rows (seeded sampling when absent).
WeightedNgResult weighted_median_ng(const ExtendedPatch& extended, std::size_t k,
                                    const AnnealingSchedule& schedule, std::uint64_t seed,
                                    const PatchOptions& options = {}, const LabelSet* labels = nullptr,
                                    std::optional<std::vector<std::size_t>> init = std::nullopt);

struct PatchRecord {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t epochs_run = 0;
    double final_cost = 0.0;  // weighted half error within the extended patch
    double mass = 0.0;        // total multiplicity after the patch
};

struct PatchResult {
    MedianPrototypes prototypes;  // global indices
    std::vector<double> multiplicity;
    std::vector<PatchRecord> history;
};

/// `labels` (optional) covers all N points in global order.
PatchResult patch_median_ng(const DissimilaritySource& d, std::size_t k, std::size_t patches,
                            const AnnealingSchedule& schedule, std::uint64_t seed,
                            const PatchOptions& options = {}, const LabelSet* labels = nullptr);

}  // namespace mediatop

#endif  // MEDIATOP_PATCH_HPP
