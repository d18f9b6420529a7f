#ifndef MEDIATOP_MEDIAN_HPP
#define MEDIATOP_MEDIAN_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mediatop/dataset.hpp"
#include "mediatop/dissimilarity.hpp"
#include "mediatop/matrix.hpp"
#include "mediatop/neighborhood.hpp"

namespace mediatop {

enum class MedianAlgorithm { median_ng, median_som, kmedoids };

/// Prototype search engines for median SOM. All produce identical results.
enum class SomImpl { naive, block, bnb_self, bnb_full, bnb_full_early };

/// Prototype search engines for median NG. With the lowest-index or random
/// tie policy all produce identical results.
enum class NgImpl { naive, early_none, early_candidate, early_fine, early_coarse };

/// How equal criterion values between candidates are resolved.
///   lowest_index: smallest data index wins (default, implementation independent)
///   random:       smallest key of a seeded per-epoch permutation wins
///   scan_order:   first candidate met in the engine's scan order wins
enum class TiePolicy { lowest_index, random, scan_order };

const char* to_string(MedianAlgorithm a);
const char* to_string(SomImpl i);
const char* to_string(NgImpl i);
const char* to_string(TiePolicy t);
MedianAlgorithm median_algorithm_from_string(const std::string& s);
SomImpl som_impl_from_string(const std::string& s);
NgImpl ng_impl_from_string(const std::string& s);
TiePolicy tie_policy_from_string(const std::string& s);

struct MedianPrototypes {
    std::vector<std::size_t> loc;  // data indices, pairwise distinct
    Matrix labels;                 // K x d label vectors Y^j; empty when unsupervised

    std::size_t size() const { return loc.size(); }
    bool operator==(const MedianPrototypes&) const = default;
};

struct SupervisionConfig {
    bool enabled = false;
    double beta = 1.0;
    bool blended_ranks = true;  // rank/winner on d_beta (true) or plain d

    void validate() const;
    /// Label term enters distances only when enabled with beta < 1.
    bool active() const { return enabled && beta < 1.0; }
};

/// beta * d_input + (1 - beta) * ||y - Y||^2; y == nullptr means unlabeled.
double blended_distance(double d_input, const double* y, std::span<const double> Y, double beta);

/// Work counters reported per epoch by the search engines.
struct SearchCounters {
    std::uint64_t candidates_evaluated = 0;
    std::uint64_t classes_pruned = 0;
    std::uint64_t partial_sums_abandoned = 0;
    std::uint64_t terms_summed = 0;

    SearchCounters& operator+=(const SearchCounters& o);
};

/// Read-only view of an in-memory dissimilarity matrix that also offers
/// contiguous columns d(., l).
class MedianContext {
public:
    explicit MedianContext(const DenseDissimilarity& d);
    MedianContext(const MedianContext&) = delete;
    MedianContext& operator=(const MedianContext&) = delete;

    const DenseDissimilarity& matrix() const { return d_; }
    std::size_t size() const { return d_.size(); }
    double operator()(std::size_t i, std::size_t j) const { return d_(i, j); }
    const double* row(std::size_t i) const { return d_.row(i); }
    /// col(l)[i] == d(i, l)
    const double* col(std::size_t l) const {
        return transposed_.empty() ? d_.row(l) : transposed_.data() + l * transposed_.cols();
    }

private:
    const DenseDissimilarity& d_;
    Matrix transposed_;  // only for asymmetric input
};

struct EpochOptions {
    SomImpl som_impl = SomImpl::block;
    NgImpl ng_impl = NgImpl::early_coarse;
    TiePolicy ties = TiePolicy::lowest_index;
    std::uint64_t tie_seed = 0;  // random tie keys derive from (tie_seed, epoch)
    std::size_t epoch = 0;
};

struct EpochResult {
    MedianPrototypes prototypes;        // after update and collision pass
    std::vector<std::size_t> winner;    // winner used for this epoch's assignment
    std::vector<std::size_t> field;     // receptive field owner (I* for SOM)
    std::vector<std::uint32_t> ranks;   // N x K, NG only
    std::vector<std::size_t> chosen;    // pre-collision argmin per prototype
    double cost = 0.0;                  // half cost at the assignment step
    double criterion_sum = 0.0;         // sum of minimized criteria after collisions
    std::size_t collisions = 0;
    SearchCounters counters;
};

/// Per-prototype fallback used by collision prevention: best unclaimed
/// candidate for prototype j.
using NextBest = std::function<std::size_t(std::size_t j, const std::vector<char>& claimed)>;

/// Prototypes keep their choice in index order unless already claimed in
/// this pass, in which case they take next_best(j, claimed).
std::vector<std::size_t> resolve_collisions(std::span<const std::size_t> choices, std::size_t n,
                                            const NextBest& next_best,
                                            std::size_t* collisions = nullptr);

/// Same with explicit per-candidate cost lists (costs[j][l]); ties by index.
std::vector<std::size_t> resolve_collisions(const std::vector<std::vector<double>>& costs);

/// Initial label vectors: the label of the prototype's data point, or the
/// uniform vector for unlabeled points.
Matrix initial_prototype_labels(std::span<const std::size_t> loc, const LabelSet& labels);

MedianPrototypes initial_median_prototypes(std::size_t n, std::size_t k, std::uint64_t seed,
                                           const LabelSet* labels, const SupervisionConfig& sup);

EpochResult median_ng_epoch(const MedianContext& ctx, const MedianPrototypes& protos, double sigma,
                            const SupervisionConfig& sup, const LabelSet* labels,
                            const EpochOptions& options = {},
                            std::span<const double> weights = {});

EpochResult median_som_epoch(const MedianContext& ctx, const MedianPrototypes& protos,
                             const Lattice& lattice, double sigma, const SupervisionConfig& sup,
                             const LabelSet* labels, const EpochOptions& options = {});

EpochResult kmedoids_epoch(const MedianContext& ctx, const MedianPrototypes& protos,
                           const SupervisionConfig& sup, const LabelSet* labels);

/// Winner by input dissimilarity only, lowest index on ties.
std::vector<std::size_t> median_winners(const DissimilaritySource& d, std::span<const std::size_t> loc);

/// Half quantization error over the given winners.
double median_quantization_error(const DissimilaritySource& d, std::span<const std::size_t> loc,
                                 std::span<const std::size_t> winner);

/// Majority class of labeled points in each receptive field; empty fields
/// take the class of the labeled point nearest to the prototype.
std::vector<int> posterior_label(const DissimilaritySource& d, std::span<const std::size_t> loc,
                                 std::span<const std::size_t> winner, const LabelSet& labels);

/// Crisp labels from label vectors Y^j (argmax, lowest index on ties);
/// rows with zero label mass fall back to `fallback`.
std::vector<int> crisp_prototype_labels(const Matrix& label_vectors, std::span<const int> fallback);

struct MedianConfig {
    std::size_t k = 2;
    AnnealingSchedule schedule;
    SupervisionConfig supervision;
    std::uint64_t seed = 0;
    std::optional<Lattice> lattice;  // median SOM only
    SomImpl som_impl = SomImpl::block;
    NgImpl ng_impl = NgImpl::early_coarse;
    TiePolicy ties = TiePolicy::lowest_index;
    std::optional<std::vector<std::size_t>> init;  // explicit initial locations
    std::vector<double> weights;                   // NG multiplicities; empty = 1
    bool record_trajectory = false;                // keep loc after every epoch
};

struct EpochRecord {
    double sigma = 0.0;
    double cost = 0.0;
    double seconds = 0.0;
    std::size_t collisions = 0;
    SearchCounters counters;
};

struct MedianModel {
    MedianAlgorithm algorithm = MedianAlgorithm::median_ng;
    MedianPrototypes prototypes;
    std::vector<std::size_t> winner;  // final assignment, input distance
    std::vector<EpochRecord> history;
    std::vector<std::vector<std::size_t>> trajectory;  // when requested
    std::size_t epochs_run = 0;
    bool converged = false;
    double final_cost = 0.0;  // half quantization error of the final state
};

/// Runs epochs until a fixed point at the final sigma or the epoch budget.
/// epochs == 0 returns the initial prototypes.
MedianModel train_median(const MedianContext& ctx, MedianAlgorithm algorithm,
                         const MedianConfig& config, const LabelSet* labels = nullptr);

MedianModel train_median(const DissimilaritySource& d, MedianAlgorithm algorithm,
                         const MedianConfig& config, const LabelSet* labels = nullptr);

}  // namespace mediatop

#endif  // MEDIATOP_MEDIAN_HPP
