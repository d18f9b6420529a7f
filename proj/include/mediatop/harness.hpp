#ifndef MEDIATOP_HARNESS_HPP
#define MEDIATOP_HARNESS_HPP

// Experiment plumbing shared by the C API and the command-line tool:
// configuration, training on index subsets, splits, evaluation, benchmarks
// and JSON/CSV serialization.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mediatop/dataset.hpp"
#include "mediatop/dissimilarity.hpp"
#include "mediatop/median.hpp"
#include "mediatop/metrics.hpp"
#include "mediatop/neighborhood.hpp"
#include "mediatop/patch.hpp"

namespace mediatop {

inline constexpr int kReportVersion = 1;

enum class AlgorithmId { median_ng, median_som, kmedoids, patch_ng, batch_ng, batch_som, batch_kmeans };

const char* to_string(AlgorithmId a);
AlgorithmId algorithm_from_string(const std::string& s);
/// Works on dissimilarities (as opposed to vectors in Euclidean space).
bool is_median(AlgorithmId a);

enum class SplitMode { none, kfold, halves };

const char* to_string(SplitMode s);
SplitMode split_mode_from_string(const std::string& s);

struct ExperimentConfig {
    AlgorithmId algorithm = AlgorithmId::median_ng;
    std::string implementation;          // empty: module default
    std::size_t k = 2;
    std::size_t epochs = 100;
    std::optional<double> sigma_start;   // default K/2 (NG), half the lattice diameter (SOM)
    double sigma_end = 0.01;
    bool supervised = false;
    double beta = 1.0;
    bool blended_ranks = true;
    std::size_t patches = 1;
    MultiplicityMode multiplicity = MultiplicityMode::point;
    std::uint64_t seed = 0;
    SplitMode split = SplitMode::none;
    std::size_t folds = 10;
    std::size_t repeats = 1;
    std::optional<bool> stratified;      // default: on for k-fold, off for halves
    double train_fraction = 0.5;
    Metric metric = Metric::squared_euclidean;
    double indel = kDefaultIndelCost;
    bool standardize = false;
    StdConvention std_convention = StdConvention::population;
    LatticeShape lattice_shape = LatticeShape::rectangular;
    std::size_t lattice_rows = 0;        // 0: near-square factorization of K
    std::size_t lattice_cols = 0;
    TiePolicy ties = TiePolicy::lowest_index;

    void validate() const;
    bool stratify() const { return stratified.value_or(split == SplitMode::kfold); }
};

std::string config_to_json(const ExperimentConfig& c);
/// Missing fields keep their defaults; unknown fields are a config error.
ExperimentConfig config_from_json(const std::string& json);

Lattice default_lattice(const ExperimentConfig& c);
AnnealingSchedule default_schedule(const ExperimentConfig& c);
SomImpl som_impl_of(const ExperimentConfig& c);
NgImpl ng_impl_of(const ExperimentConfig& c);

/// Loaded input. Exactly one of vectors, sequences or source is set.
struct ExperimentData {
    std::optional<VectorDataset> vectors;
    std::optional<SequenceDataset> sequences;
    std::shared_ptr<const DissimilaritySource> source;  // precomputed matrix
    std::optional<LabelSet> labels;

    std::size_t size() const;
    const LabelSet* label_set() const { return labels ? &*labels : nullptr; }
};

/// Applies standardization and checks the input fits the configuration.
ExperimentData prepare_data(ExperimentData data, const ExperimentConfig& c);

/// Dissimilarity source for median algorithms: the given matrix, or the
/// metric evaluated on all pairs.
std::shared_ptr<const DissimilaritySource> dissimilarity_for(const ExperimentData& data,
                                                             const ExperimentConfig& c);

struct TrainedModel {
    AlgorithmId algorithm = AlgorithmId::median_ng;
    ExperimentConfig config;
    AnnealingSchedule schedule;
    std::string lattice;                    // description, SOM only
    std::vector<std::size_t> loc;           // median: global data indices
    Matrix vectors;                         // batch: prototype vectors
    Matrix label_vectors;                   // supervised: Y^j
    std::vector<int> labels;                // crisp prototype classes, -1 unknown
    std::vector<std::string> class_names;
    std::vector<double> multiplicity;       // patch: receptive-field mass
    std::vector<EpochRecord> history;
    std::size_t epochs_run = 0;
    bool converged = false;
    double final_cost = 0.0;                // half quantization error on the training rows

    std::size_t k() const;
};

struct Assignments {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> winner;
    std::vector<double> distance;  // input distance to the winner
};

/// Trains on `rows` (all points when empty). Prototype labels come from Y^j
/// when supervised, from a majority vote of the receptive fields otherwise.
TrainedModel fit(const ExperimentData& data, const DissimilaritySource* d, std::span<const std::size_t> rows,
                 const ExperimentConfig& c, std::uint64_t seed);

/// Winners by input distance only (lowest prototype index on ties).
Assignments assign(const TrainedModel& model, const ExperimentData& data, const DissimilaritySource* d,
                   std::span<const std::size_t> rows);

/// Fraction of labeled rows whose winner carries their class; NaN if none.
double accuracy(const TrainedModel& model, const Assignments& a, const LabelSet& labels);

/// Class of the nearest prototype; `distances[j]` is the input distance to
/// prototype j. NaN entries count as missing.
int classify_by_prototypes(std::span<const double> distances, std::span<const int> prototype_labels);

std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(const std::string& json);
std::string assignments_csv(const Assignments& a);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded splits for repeat r. k-fold returns `folds` splits, halves one.
std::vector<Split> make_splits(std::size_t n, const LabelSet* labels, const ExperimentConfig& c, std::size_t repeat);

struct RunRecord {
    std::size_t run = 0;
    std::size_t repeat = 0;
    std::size_t fold = 0;
    std::uint64_t seed = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    double e_half = 0.0;
    double e_norm = 0.0;
    double accuracy = 0.0;
    double train_accuracy = 0.0;
    std::size_t epochs_run = 0;
    bool converged = false;
    double seconds_per_epoch = 0.0;
    SearchCounters counters;
};

struct Aggregate {
    double mean = 0.0;
    double sd = 0.0;
};

struct EvaluationReport {
    ExperimentConfig config;
    std::vector<RunRecord> runs;
    Aggregate e_half, e_norm, accuracy, train_accuracy, epochs, seconds_per_epoch;
};

EvaluationReport cross_validate(const ExperimentData& data, const ExperimentConfig& c);
/// Aggregates over runs; NaN accuracies are skipped.
void aggregate(EvaluationReport& report);
std::string report_json(const EvaluationReport& r);

struct BenchmarkRow {
    std::string implementation;
    std::size_t epochs = 0;
    double mean_epoch_seconds = 0.0;
    SearchCounters counters;
    double final_cost = 0.0;
    bool identical = true;
};

struct BenchmarkReport {
    ExperimentConfig config;
    std::vector<BenchmarkRow> rows;
    bool exact = true;  // equality was asserted
};

/// Same seeded training with every implementation; rows record whether the
/// per-epoch prototype trajectory equals the first implementation's.
BenchmarkReport benchmark(const ExperimentData& data, const ExperimentConfig& c,
                          const std::vector<std::string>& implementations);
/// Raises ErrorKind::invariant when implementations claimed exact disagree.
void require_identical(const BenchmarkReport& r);
std::string benchmark_json(const BenchmarkReport& r);
std::string benchmark_csv(const BenchmarkReport& r);

}  // namespace mediatop

#endif  // MEDIATOP_HARNESS_HPP
