#include "mediatop/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mediatop/error.hpp"
#include "mediatop/euclid_batch.hpp"
#include "mediatop/parallel.hpp"
#include "mediatop/random.hpp"

namespace mediatop {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::pair<const char*, AlgorithmId> kAlgorithmIds[] = {
    {"median-ng", AlgorithmId::median_ng},   {"median-som", AlgorithmId::median_som},
    {"kmedoids", AlgorithmId::kmedoids},     {"patch-ng", AlgorithmId::patch_ng},
    {"batch-ng", AlgorithmId::batch_ng},     {"batch-som", AlgorithmId::batch_som},
    {"batch-kmeans", AlgorithmId::batch_kmeans},
};

const char* shape_name(LatticeShape s) {
    switch (s) {
        case LatticeShape::rectangular: return "rectangular";
        case LatticeShape::hexagonal: return "hexagonal";
        case LatticeShape::explicit_table: return "table";
    }
    return "?";
}

LatticeShape shape_from_string(const std::string& s) {
    if (s == "rectangular" || s == "rect") return LatticeShape::rectangular;
    if (s == "hexagonal" || s == "hex") return LatticeShape::hexagonal;
    fail(ErrorKind::config, "unknown lattice shape '" + s + "'");
}

StdConvention convention_from_string(const std::string& s) {
    if (s == "population") return StdConvention::population;
    if (s == "sample") return StdConvention::sample;
    fail(ErrorKind::config, "unknown standard deviation convention '" + s + "'");
}

MultiplicityMode multiplicity_from_string(const std::string& s) {
    if (s == "point") return MultiplicityMode::point;
    if (s == "literal") return MultiplicityMode::literal;
    fail(ErrorKind::config, "unknown multiplicity mode '" + s + "'");
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

DenseDissimilarity restrict_source(const DissimilaritySource& d, std::span<const std::size_t> rows) {
    if (const auto* dense = dynamic_cast<const DenseDissimilarity*>(&d)) return dense->restrict_to(rows);
    Matrix m(rows.size(), rows.size());
    d.fill_block(rows, rows, m.data());
    return DenseDissimilarity(std::move(m), d.symmetric());
}

bool is_identity(std::span<const std::size_t> rows, std::size_t n) {
    if (rows.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i] != i) return false;
    }
    return true;
}

// Majority vote per receptive field over labeled points (ties by class
// index); empty fields take the class of the nearest labeled vector.
std::vector<int> vote_labels(std::span<const std::size_t> winner, const LabelSet& labels, std::size_t k,
                             const std::function<std::size_t(std::size_t j)>& nearest_labeled) {
    const std::size_t classes = labels.classes();
    std::vector<std::vector<std::size_t>> votes(k, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < winner.size(); ++i) {
        const int c = labels.crisp(i);
        if (c >= 0) ++votes[winner[i]][static_cast<std::size_t>(c)];
    }
    std::vector<int> out(k, -1);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (votes[j][c] > votes[j][best]) best = c;
        }
        if (classes > 0 && votes[j][best] > 0) {
            out[j] = static_cast<int>(best);
        } else {
            const std::size_t i = nearest_labeled(j);
            out[j] = i == static_cast<std::size_t>(-1) ? -1 : labels.crisp(i);
        }
    }
    return out;
}

bool any_labeled(const LabelSet* labels) {
    return labels && std::any_of(labels->mask.begin(), labels->mask.end(), [](char m) { return m != 0; });
}

json counters_json(const SearchCounters& c) {
    return {{"candidates_evaluated", c.candidates_evaluated},
            {"classes_pruned", c.classes_pruned},
            {"partial_sums_abandoned", c.partial_sums_abandoned},
            {"terms_summed", c.terms_summed}};
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json generator_json() {
    return {{"name", "mediatop"}, {"version", "1.0.0"}, {"rng", kGeneratorName}};
}

}  // namespace

const char* to_string(AlgorithmId a) {
    for (const auto& [name, value] : kAlgorithmIds) {
        if (value == a) return name;
    }
    return "?";
}

AlgorithmId algorithm_from_string(const std::string& s) {
    for (const auto& [name, value] : kAlgorithmIds) {
        if (s == name) return value;
    }
    fail(ErrorKind::config, "unknown algorithm '" + s + "'");
}

bool is_median(AlgorithmId a) {
    return a == AlgorithmId::median_ng || a == AlgorithmId::median_som || a == AlgorithmId::kmedoids ||
           a == AlgorithmId::patch_ng;
}

const char* to_string(SplitMode s) {
    switch (s) {
        case SplitMode::none: return "none";
        case SplitMode::kfold: return "kfold";
        case SplitMode::halves: return "halves";
    }
    return "?";
}

SplitMode split_mode_from_string(const std::string& s) {
    if (s == "none") return SplitMode::none;
    if (s == "kfold") return SplitMode::kfold;
    if (s == "halves") return SplitMode::halves;
    fail(ErrorKind::config, "unknown split mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// configuration

void ExperimentConfig::validate() const {
    if (k < 1) fail(ErrorKind::config, "K must be at least 1");
    if (!(sigma_end > 0.0)) fail(ErrorKind::config, "sigma_end must be positive");
    if (sigma_start && !(*sigma_start >= sigma_end)) fail(ErrorKind::config, "sigma_start must be >= sigma_end");
    if (!(beta > 0.0 && beta <= 1.0)) fail(ErrorKind::config, "beta must lie in (0, 1]");
    if (supervised && !is_median(algorithm)) fail(ErrorKind::config, "supervision is available for median algorithms only");
    if (patches < 1) fail(ErrorKind::config, "patches must be at least 1");
    if (patches > 1 && algorithm != AlgorithmId::patch_ng) fail(ErrorKind::config, "patches apply to patch-ng only");
    if (split == SplitMode::kfold && folds < 2) fail(ErrorKind::config, "k-fold needs at least 2 folds");
    if (repeats < 1) fail(ErrorKind::config, "repeats must be at least 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(ErrorKind::config, "train_fraction must lie in (0, 1)");
    if (!(indel > 0.0)) fail(ErrorKind::config, "indel cost must be positive");
    if ((lattice_rows == 0) != (lattice_cols == 0)) fail(ErrorKind::config, "give both lattice rows and columns");
    if (lattice_rows && lattice_rows * lattice_cols != k) fail(ErrorKind::config, "lattice rows x cols must equal K");
    if (!is_median(algorithm) && metric != Metric::squared_euclidean) {
        fail(ErrorKind::config, "batch algorithms work with squared Euclidean distance only");
    }
    if (!implementation.empty()) {
        switch (algorithm) {
            case AlgorithmId::median_som: (void)som_impl_from_string(implementation); break;
            case AlgorithmId::median_ng:
            case AlgorithmId::patch_ng: (void)ng_impl_from_string(implementation); break;
            default: fail(ErrorKind::config, std::string("no implementation choice for ") + to_string(algorithm));
        }
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["algorithm"] = to_string(c.algorithm);
    j["implementation"] = c.implementation;
    j["k"] = c.k;
    j["epochs"] = c.epochs;
    j["sigma_start"] = c.sigma_start ? json(*c.sigma_start) : json(nullptr);
    j["sigma_end"] = c.sigma_end;
    j["supervised"] = c.supervised;
    j["beta"] = c.beta;
    j["blended_ranks"] = c.blended_ranks;
    j["patches"] = c.patches;
    j["multiplicity"] = to_string(c.multiplicity);
    j["seed"] = c.seed;
    j["split"] = to_string(c.split);
    j["folds"] = c.folds;
    j["repeats"] = c.repeats;
    j["stratified"] = c.stratified ? json(*c.stratified) : json(nullptr);
    j["train_fraction"] = c.train_fraction;
    j["metric"] = to_string(c.metric);
    j["indel"] = c.indel;
    j["standardize"] = c.standardize;
    j["std_convention"] = to_string(c.std_convention);
    j["lattice_shape"] = shape_name(c.lattice_shape);
    j["lattice_rows"] = c.lattice_rows;
    j["lattice_cols"] = c.lattice_cols;
    j["ties"] = to_string(c.ties);
    return j.dump();
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
    ExperimentConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "algorithm") c.algorithm = algorithm_from_string(v.get<std::string>());
            else if (key == "implementation") c.implementation = v.get<std::string>();
            else if (key == "k") c.k = v.get<std::size_t>();
            else if (key == "epochs") c.epochs = v.get<std::size_t>();
            else if (key == "sigma_start") c.sigma_start = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
            else if (key == "sigma_end") c.sigma_end = v.get<double>();
            else if (key == "supervised") c.supervised = v.get<bool>();
            else if (key == "beta") c.beta = v.get<double>();
            else if (key == "blended_ranks") c.blended_ranks = v.get<bool>();
            else if (key == "patches") c.patches = v.get<std::size_t>();
            else if (key == "multiplicity") c.multiplicity = multiplicity_from_string(v.get<std::string>());
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "split") c.split = split_mode_from_string(v.get<std::string>());
            else if (key == "folds") c.folds = v.get<std::size_t>();
            else if (key == "repeats") c.repeats = v.get<std::size_t>();
            else if (key == "stratified") c.stratified = v.is_null() ? std::nullopt : std::optional<bool>(v.get<bool>());
            else if (key == "train_fraction") c.train_fraction = v.get<double>();
            else if (key == "metric") c.metric = metric_from_string(v.get<std::string>());
            else if (key == "indel") c.indel = v.get<double>();
            else if (key == "standardize") c.standardize = v.get<bool>();
            else if (key == "std_convention") c.std_convention = convention_from_string(v.get<std::string>());
            else if (key == "lattice_shape") c.lattice_shape = shape_from_string(v.get<std::string>());
            else if (key == "lattice_rows") c.lattice_rows = v.get<std::size_t>();
            else if (key == "lattice_cols") c.lattice_cols = v.get<std::size_t>();
            else if (key == "ties") c.ties = tie_policy_from_string(v.get<std::string>());
            else fail(ErrorKind::config, "unknown config field '" + key + "'");
        }
    } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("bad config value: ") + e.what());
    }
    return c;
}

Lattice default_lattice(const ExperimentConfig& c) {
    std::size_t rows = c.lattice_rows;
    std::size_t cols = c.lattice_cols;
    if (rows == 0) {
        rows = static_cast<std::size_t>(std::sqrt(static_cast<double>(c.k)));
        while (rows > 1 && c.k % rows != 0) --rows;
        rows = std::max<std::size_t>(rows, 1);
        cols = c.k / rows;
    }
    return c.lattice_shape == LatticeShape::hexagonal ? Lattice::hexagonal(rows, cols)
                                                       : Lattice::rectangular(rows, cols);
}

AnnealingSchedule default_schedule(const ExperimentConfig& c) {
    AnnealingSchedule s;
    s.sigma_end = c.sigma_end;
    s.epochs = c.epochs;
    double start = 0.0;
    if (c.sigma_start) {
        start = *c.sigma_start;
    } else if (c.algorithm == AlgorithmId::median_som || c.algorithm == AlgorithmId::batch_som) {
        start = default_lattice(c).diameter() / 2.0;
    } else {
        start = static_cast<double>(c.k) / 2.0;
    }
    s.sigma_start = std::max(start, s.sigma_end);
    return s;
}

SomImpl som_impl_of(const ExperimentConfig& c) {
    return c.implementation.empty() ? SomImpl::block : som_impl_from_string(c.implementation);
}

NgImpl ng_impl_of(const ExperimentConfig& c) {
    return c.implementation.empty() ? NgImpl::early_coarse : ng_impl_from_string(c.implementation);
}

// ---------------------------------------------------------------------------
// data

std::size_t ExperimentData::size() const {
    if (vectors) return vectors->size();
    if (sequences) return sequences->size();
    if (source) return source->size();
    return 0;
}

ExperimentData prepare_data(ExperimentData data, const ExperimentConfig& c) {
    const int kinds = (data.vectors ? 1 : 0) + (data.sequences ? 1 : 0) + (data.source ? 1 : 0);
    if (kinds != 1) fail(ErrorKind::input, "exactly one input kind is required");
    if (data.vectors) {
        data.vectors->validate();
        if (!data.labels && data.vectors->labels) data.labels = data.vectors->labels;
        if (c.metric == Metric::edit) fail(ErrorKind::config, "edit distance needs sequence input");
        if (c.standardize) data.vectors = zscore_standardize(*data.vectors, c.std_convention);
    } else {
        if (c.standardize) fail(ErrorKind::config, "standardization applies to vector input only");
        if (!is_median(c.algorithm)) fail(ErrorKind::config, "batch algorithms need vector input");
    }
    if (data.sequences) {
        data.sequences->validate();
        if (!data.labels && data.sequences->labels) data.labels = data.sequences->labels;
        if (c.metric != Metric::edit) fail(ErrorKind::config, "sequence input needs the edit metric");
    }
    if (data.labels && data.labels->mask.size() != data.size()) {
        fail(ErrorKind::data, "label count differs from the number of points");
    }
    if (c.k > data.size()) fail(ErrorKind::config, "K exceeds the number of points");
    return data;
}

std::shared_ptr<const DissimilaritySource> dissimilarity_for(const ExperimentData& data,
                                                             const ExperimentConfig& c) {
    if (data.source) return data.source;
    if (data.vectors) return std::make_shared<DenseDissimilarity>(materialize_dissimilarity(*data.vectors, c.metric));
    if (data.sequences) return std::make_shared<DenseDissimilarity>(materialize_dissimilarity(*data.sequences, c.indel));
    fail(ErrorKind::input, "no input data");
}

// ---------------------------------------------------------------------------
// training and assignment

std::size_t TrainedModel::k() const { return is_median(algorithm) ? loc.size() : vectors.rows(); }

TrainedModel fit(const ExperimentData& data, const DissimilaritySource* d, std::span<const std::size_t> rows_in,
                 const ExperimentConfig& c, std::uint64_t seed) {
    c.validate();
    const std::size_t n_all = data.size();
    const std::vector<std::size_t> rows = rows_in.empty() ? all_rows(n_all)
                                                          : std::vector<std::size_t>(rows_in.begin(), rows_in.end());
    const std::size_t n = rows.size();
    if (c.k > n) fail(ErrorKind::config, "K exceeds the number of training points");
    const bool whole = is_identity(rows, n_all);
    std::optional<LabelSet> train_labels;
    if (data.labels) train_labels = whole ? *data.labels : data.labels->subset(rows);
    if (c.supervised && !any_labeled(train_labels ? &*train_labels : nullptr)) {
        fail(ErrorKind::config, "supervised training needs labeled points");
    }

    TrainedModel m;
    m.algorithm = c.algorithm;
    m.config = c;
    m.config.seed = seed;
    m.schedule = default_schedule(c);
    if (data.labels) m.class_names = data.labels->class_names;

    std::vector<std::size_t> local_winner;  // winner per training row
    if (is_median(c.algorithm)) {
        if (!d) fail(ErrorKind::input, "median algorithms need a dissimilarity source");
        std::optional<DenseDissimilarity> sub;
        if (!whole || (c.algorithm != AlgorithmId::patch_ng && !dynamic_cast<const DenseDissimilarity*>(d))) {
            sub = restrict_source(*d, rows);
        }
        const DissimilaritySource& src = sub ? static_cast<const DissimilaritySource&>(*sub) : *d;
        const LabelSet* ls = train_labels ? &*train_labels : nullptr;
        SupervisionConfig sup;
        sup.enabled = c.supervised;
        sup.beta = c.beta;
        sup.blended_ranks = c.blended_ranks;

        std::vector<std::size_t> local_loc;
        if (c.algorithm == AlgorithmId::patch_ng) {
            PatchOptions po;
            po.supervision = sup;
            po.ng_impl = ng_impl_of(c);
            po.ties = c.ties;
            po.multiplicity = c.multiplicity;
            PatchResult r = patch_median_ng(src, c.k, c.patches, m.schedule, seed, po, c.supervised ? ls : nullptr);
            local_loc = r.prototypes.loc;
            m.label_vectors = r.prototypes.labels;
            m.multiplicity = r.multiplicity;
            for (const auto& rec : r.history) m.epochs_run += rec.epochs_run;
            local_winner = median_winners(src, local_loc);
            m.final_cost = median_quantization_error(src, local_loc, local_winner);
        } else {
            MedianConfig mc;
            mc.k = c.k;
            mc.schedule = m.schedule;
            mc.supervision = sup;
            mc.seed = seed;
            mc.ties = c.ties;
            if (c.algorithm == AlgorithmId::median_som) {
                mc.som_impl = som_impl_of(c);
                mc.lattice = default_lattice(c);
                m.lattice = mc.lattice->describe();
            } else if (c.algorithm == AlgorithmId::median_ng) {
                mc.ng_impl = ng_impl_of(c);
            }
            const MedianAlgorithm alg = c.algorithm == AlgorithmId::median_ng    ? MedianAlgorithm::median_ng
                                        : c.algorithm == AlgorithmId::median_som ? MedianAlgorithm::median_som
                                                                                 : MedianAlgorithm::kmedoids;
            MedianModel r = train_median(src, alg, mc, c.supervised ? ls : nullptr);
            local_loc = r.prototypes.loc;
            m.label_vectors = r.prototypes.labels;
            m.history = std::move(r.history);
            m.epochs_run = r.epochs_run;
            m.converged = r.converged;
            m.final_cost = r.final_cost;
            local_winner = std::move(r.winner);
        }
        m.loc.resize(local_loc.size());
        for (std::size_t j = 0; j < local_loc.size(); ++j) m.loc[j] = rows[local_loc[j]];

        if (ls) {
            const auto nearest = [&](std::size_t j) {
                std::size_t best = static_cast<std::size_t>(-1);
                double best_d = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!ls->present(i)) continue;
                    const double v = src(local_loc[j], i);
                    if (best == static_cast<std::size_t>(-1) || v < best_d) {
                        best = i;
                        best_d = v;
                    }
                }
                return best;
            };
            const auto votes = vote_labels(local_winner, *ls, c.k, nearest);
            m.labels = c.supervised ? crisp_prototype_labels(m.label_vectors, votes) : votes;
        } else {
            m.labels.assign(c.k, -1);
        }
    } else {
        if (!data.vectors) fail(ErrorKind::config, "batch algorithms need vector input");
        const Matrix points = whole ? data.vectors->points : data.vectors->subset(rows).points;
        const auto start = std::chrono::steady_clock::now();
        EuclideanRun r;
        switch (c.algorithm) {
            case AlgorithmId::batch_ng: r = batch_ng(points, c.k, m.schedule, seed); break;
            case AlgorithmId::batch_som: {
                const Lattice lattice = default_lattice(c);
                m.lattice = lattice.describe();
                r = batch_som(points, lattice, m.schedule, seed);
                break;
            }
            default: r = batch_kmeans(points, c.k, c.epochs, seed); break;
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        m.vectors = std::move(r.prototypes);
        m.epochs_run = r.epochs_run;
        m.converged = r.converged;
        for (std::size_t t = 0; t < r.history.size(); ++t) {
            EpochRecord rec;
            rec.cost = r.history[t];
            rec.sigma = c.algorithm == AlgorithmId::batch_kmeans || t >= m.schedule.epochs ? 0.0 : sigma_at(m.schedule, t);
            rec.seconds = seconds / static_cast<double>(std::max<std::size_t>(r.history.size(), 1));
            m.history.push_back(rec);
        }
        local_winner.resize(n);
        for (std::size_t i = 0; i < n; ++i) local_winner[i] = winner_index(points.row(i), m.vectors);
        m.final_cost = quantization_error(points, m.vectors, local_winner).half;
        if (train_labels) {
            const LabelSet& ls = *train_labels;
            const auto nearest = [&](std::size_t j) {
                std::size_t best = static_cast<std::size_t>(-1);
                double best_d = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!ls.present(i)) continue;
                    const double v = squared_euclidean(points.row(i), m.vectors.row(j));
                    if (best == static_cast<std::size_t>(-1) || v < best_d) {
                        best = i;
                        best_d = v;
                    }
                }
                return best;
            };
            m.labels = vote_labels(local_winner, ls, c.k, nearest);
        } else {
            m.labels.assign(c.k, -1);
        }
    }
    return m;
}

Assignments assign(const TrainedModel& model, const ExperimentData& data, const DissimilaritySource* d,
                   std::span<const std::size_t> rows_in) {
    const std::vector<std::size_t> rows = rows_in.empty() ? all_rows(data.size())
                                                          : std::vector<std::size_t>(rows_in.begin(), rows_in.end());
    Assignments a;
    a.rows = rows;
    a.winner.resize(rows.size());
    a.distance.resize(rows.size());
    const std::size_t k = model.k();
    if (k == 0) fail(ErrorKind::config, "model has no prototypes");
    if (is_median(model.algorithm)) {
        if (!d) fail(ErrorKind::input, "median models need a dissimilarity source");
        for (std::size_t l : model.loc) {
            if (l >= d->size()) fail(ErrorKind::input, "model prototype index outside the data");
        }
        parallel_for(rows.size(), [&](std::size_t r) {
            std::vector<double> buf(k);
            const std::size_t row[1] = {rows[r]};
            d->fill_block(row, model.loc, buf.data());
            std::size_t best = 0;
            for (std::size_t j = 1; j < k; ++j) {
                if (buf[j] < buf[best]) best = j;
            }
            a.winner[r] = best;
            a.distance[r] = buf[best];
        });
    } else {
        if (!data.vectors) fail(ErrorKind::input, "vector models need vector input");
        if (data.vectors->dim() != model.vectors.cols()) fail(ErrorKind::input, "input dimension differs from the model");
        parallel_for(rows.size(), [&](std::size_t r) {
            const auto x = data.vectors->points.row(rows[r]);
            const std::size_t w = winner_index(x, model.vectors);
            a.winner[r] = w;
            a.distance[r] = squared_euclidean(x, model.vectors.row(w));
        });
    }
    return a;
}

double accuracy(const TrainedModel& model, const Assignments& a, const LabelSet& labels) {
    std::size_t total = 0;
    std::size_t correct = 0;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        const int c = labels.crisp(a.rows[r]);
        if (c < 0) continue;
        ++total;
        if (model.labels[a.winner[r]] == c) ++correct;
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : kNaN;
}

int classify_by_prototypes(std::span<const double> distances, std::span<const int> prototype_labels) {
    if (distances.size() != prototype_labels.size() || distances.empty()) {
        fail(ErrorKind::input, "need one distance per prototype");
    }
    std::size_t best = static_cast<std::size_t>(-1);
    for (std::size_t j = 0; j < distances.size(); ++j) {
        if (std::isnan(distances[j])) continue;
        if (best == static_cast<std::size_t>(-1) || distances[j] < distances[best]) best = j;
    }
    if (best == static_cast<std::size_t>(-1)) fail(ErrorKind::input, "no distance to any prototype");
    return prototype_labels[best];
}

// ---------------------------------------------------------------------------
// serialization

std::string model_to_json(const TrainedModel& m) {
    const ExperimentConfig& c = m.config;
    json j;
    j["algorithm"] = to_string(m.algorithm);
    j["K"] = m.k();
    if (is_median(m.algorithm)) {
        j["prototype_indices"] = m.loc;
    } else {
        json protos = json::array();
        for (std::size_t r = 0; r < m.vectors.rows(); ++r) {
            const auto row = m.vectors.row(r);
            protos.push_back(std::vector<double>(row.begin(), row.end()));
        }
        j["prototypes"] = protos;
    }
    j["prototype_labels"] = m.labels;
    j["sigma_schedule"] = {{"start", m.schedule.sigma_start},
                           {"end", m.schedule.sigma_end},
                           {"epochs", m.schedule.epochs},
                           {"decay", "exponential"},
                           {"restart_per_patch", m.algorithm == AlgorithmId::patch_ng}};
    j["beta"] = c.supervised ? c.beta : 1.0;
    j["seed"] = c.seed;
    j["epochs_run"] = m.epochs_run;
    j["final_cost"] = m.final_cost;
    j["converged"] = m.converged;
    j["class_names"] = m.class_names;
    if (m.label_vectors.rows() > 0) {
        json rows = json::array();
        for (std::size_t r = 0; r < m.label_vectors.rows(); ++r) {
            const auto row = m.label_vectors.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        j["prototype_label_vectors"] = rows;
    }
    if (!m.multiplicity.empty()) j["multiplicity"] = m.multiplicity;
    if (!m.lattice.empty()) j["lattice"] = m.lattice;
    j["config"] = json::parse(config_to_json(c));
    j["generator"] = generator_json();
    return j.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::data, std::string("model is not valid JSON: ") + e.what());
    }
    TrainedModel m;
    try {
        if (j.contains("config")) m.config = config_from_json(j["config"].dump());
        m.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
        m.config.algorithm = m.algorithm;
        if (is_median(m.algorithm)) {
            m.loc = j.at("prototype_indices").get<std::vector<std::size_t>>();
        } else {
            const auto rows = j.at("prototypes").get<std::vector<std::vector<double>>>();
            const std::size_t dim = rows.empty() ? 0 : rows.front().size();
            m.vectors = Matrix(rows.size(), dim);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != dim) fail(ErrorKind::data, "ragged prototype vectors");
                std::copy(rows[r].begin(), rows[r].end(), m.vectors.row(r).begin());
            }
        }
        m.labels = j.at("prototype_labels").get<std::vector<int>>();
        if (m.labels.size() != m.k() || m.k() != j.at("K").get<std::size_t>()) {
            fail(ErrorKind::data, "prototype count mismatch in model");
        }
        const auto& s = j.at("sigma_schedule");
        m.schedule.sigma_start = s.at("start").get<double>();
        m.schedule.sigma_end = s.at("end").get<double>();
        m.schedule.epochs = s.at("epochs").get<std::size_t>();
        m.epochs_run = j.at("epochs_run").get<std::size_t>();
        m.final_cost = j.at("final_cost").get<double>();
        m.converged = j.value("converged", false);
        m.class_names = j.value("class_names", std::vector<std::string>{});
        if (j.contains("prototype_label_vectors")) {
            const auto rows = j["prototype_label_vectors"].get<std::vector<std::vector<double>>>();
            const std::size_t dim = rows.empty() ? 0 : rows.front().size();
            m.label_vectors = Matrix(rows.size(), dim);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != dim) fail(ErrorKind::data, "ragged label vectors");
                std::copy(rows[r].begin(), rows[r].end(), m.label_vectors.row(r).begin());
            }
        }
        m.multiplicity = j.value("multiplicity", std::vector<double>{});
        m.lattice = j.value("lattice", std::string{});
    } catch (const json::exception& e) {
        fail(ErrorKind::data, std::string("malformed model: ") + e.what());
    }
    return m;
}

std::string assignments_csv(const Assignments& a) {
    std::ostringstream out;
    out << "point_index,winner,rank0_distance\n";
    char buf[64];
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        const auto res = std::to_chars(buf, buf + sizeof buf, a.distance[r]);
        out << a.rows[r] << ',' << a.winner[r] << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
            << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// evaluation

std::vector<Split> make_splits(std::size_t n, const LabelSet* labels, const ExperimentConfig& c, std::size_t repeat) {
    Rng rng(Rng::derive(c.seed, 0x5b1f0000ULL + repeat));
    // Groups: one per class (unlabeled points form their own group) when
    // stratified, otherwise one group with everything.
    std::vector<std::vector<std::size_t>> groups;
    if (c.stratify() && labels) {
        groups.resize(labels->classes() + 1);
        for (std::size_t i = 0; i < n; ++i) {
            const int cl = labels->crisp(i);
            groups[cl < 0 ? labels->classes() : static_cast<std::size_t>(cl)].push_back(i);
        }
    } else {
        groups.push_back(all_rows(n));
    }
    for (auto& g : groups) {
        const auto perm = rng.permutation(g.size());
        std::vector<std::size_t> shuffled(g.size());
        for (std::size_t p = 0; p < g.size(); ++p) shuffled[p] = g[perm[p]];
        g = std::move(shuffled);
    }

    std::vector<Split> splits;
    if (c.split == SplitMode::kfold) {
        std::vector<std::size_t> fold_of(n);
        std::size_t counter = 0;
        for (const auto& g : groups) {
            for (std::size_t i : g) fold_of[i] = counter++ % c.folds;
        }
        splits.resize(c.folds);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < c.folds; ++f) (f == fold_of[i] ? splits[f].test : splits[f].train).push_back(i);
        }
    } else {
        Split s;
        for (const auto& g : groups) {
            const auto take = static_cast<std::size_t>(std::llround(c.train_fraction * static_cast<double>(g.size())));
            s.train.insert(s.train.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(take));
            s.test.insert(s.test.end(), g.begin() + static_cast<std::ptrdiff_t>(take), g.end());
        }
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.test.begin(), s.test.end());
        splits.push_back(std::move(s));
    }
    return splits;
}

EvaluationReport cross_validate(const ExperimentData& data, const ExperimentConfig& c) {
    c.validate();
    EvaluationReport report;
    report.config = c;
    const std::size_t n = data.size();
    const LabelSet* labels = data.label_set();
    if (c.split != SplitMode::none && !any_labeled(labels)) {
        fail(ErrorKind::config, "evaluation with held-out data needs labels");
    }
    std::shared_ptr<const DissimilaritySource> d;
    if (is_median(c.algorithm)) d = dissimilarity_for(data, c);

    struct Job {
        std::size_t repeat, fold;
        Split split;
    };
    std::vector<Job> jobs;
    if (c.split == SplitMode::none) {
        jobs.push_back({0, 0, {all_rows(n), {}}});
    } else {
        for (std::size_t r = 0; r < c.repeats; ++r) {
            auto splits = make_splits(n, labels, c, r);
            for (std::size_t f = 0; f < splits.size(); ++f) jobs.push_back({r, f, std::move(splits[f])});
        }
    }
    report.runs.resize(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t idx) {
        const Job& job = jobs[idx];
        RunRecord& rec = report.runs[idx];
        rec.run = idx;
        rec.repeat = job.repeat;
        rec.fold = job.fold;
        rec.seed = c.split == SplitMode::none ? c.seed : Rng::derive(c.seed, idx);
        rec.train_size = job.split.train.size();
        rec.test_size = job.split.test.size();
        const auto start = std::chrono::steady_clock::now();
        const TrainedModel m = fit(data, d.get(), job.split.train, c, rec.seed);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rec.e_half = m.final_cost;
        rec.e_norm = m.final_cost / static_cast<double>(rec.train_size);
        rec.epochs_run = m.epochs_run;
        rec.converged = m.converged;
        rec.seconds_per_epoch = seconds / static_cast<double>(std::max<std::size_t>(m.epochs_run, 1));
        for (const auto& h : m.history) rec.counters += h.counters;
        rec.train_accuracy = kNaN;
        rec.accuracy = kNaN;
        if (labels) {
            rec.train_accuracy = accuracy(m, assign(m, data, d.get(), job.split.train), *labels);
            rec.accuracy = job.split.test.empty() ? rec.train_accuracy
                                                  : accuracy(m, assign(m, data, d.get(), job.split.test), *labels);
        }
    });
    aggregate(report);
    return report;
}

void aggregate(EvaluationReport& report) {
    const auto agg = [&](auto get) {
        std::vector<double> v;
        for (const auto& r : report.runs) {
            const double x = get(r);
            if (!std::isnan(x)) v.push_back(x);
        }
        Aggregate a;
        if (v.empty()) {
            a.mean = kNaN;
            a.sd = kNaN;
            return a;
        }
        double s = 0.0;
        for (double x : v) s += x;
        a.mean = s / static_cast<double>(v.size());
        double q = 0.0;
        for (double x : v) q += (x - a.mean) * (x - a.mean);
        a.sd = v.size() > 1 ? std::sqrt(q / static_cast<double>(v.size() - 1)) : 0.0;
        return a;
    };
    report.e_half = agg([](const RunRecord& r) { return r.e_half; });
    report.e_norm = agg([](const RunRecord& r) { return r.e_norm; });
    report.accuracy = agg([](const RunRecord& r) { return r.accuracy; });
    report.train_accuracy = agg([](const RunRecord& r) { return r.train_accuracy; });
    report.epochs = agg([](const RunRecord& r) { return static_cast<double>(r.epochs_run); });
    report.seconds_per_epoch = agg([](const RunRecord& r) { return r.seconds_per_epoch; });
}

std::string report_json(const EvaluationReport& r) {
    json j;
    j["report_version"] = kReportVersion;
    j["generator"] = generator_json();
    j["config"] = json::parse(config_to_json(r.config));
    json runs = json::array();
    for (const auto& x : r.runs) {
        runs.push_back({{"run", x.run},
                        {"repeat", x.repeat},
                        {"fold", x.fold},
                        {"seed", x.seed},
                        {"train_size", x.train_size},
                        {"test_size", x.test_size},
                        {"e_half", x.e_half},
                        {"e_norm", x.e_norm},
                        {"accuracy", number_or_null(x.accuracy)},
                        {"train_accuracy", number_or_null(x.train_accuracy)},
                        {"epochs_run", x.epochs_run},
                        {"converged", x.converged},
                        {"seconds_per_epoch", x.seconds_per_epoch},
                        {"counters", counters_json(x.counters)}});
    }
    j["runs"] = runs;
    const auto agg = [](const Aggregate& a) { return json{{"mean", number_or_null(a.mean)}, {"sd", number_or_null(a.sd)}}; };
    j["aggregate"] = {{"e_half", agg(r.e_half)},
                      {"e_norm", agg(r.e_norm)},
                      {"accuracy", agg(r.accuracy)},
                      {"train_accuracy", agg(r.train_accuracy)},
                      {"epochs_run", agg(r.epochs)},
                      {"seconds_per_epoch", agg(r.seconds_per_epoch)}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// benchmark

BenchmarkReport benchmark(const ExperimentData& data, const ExperimentConfig& c,
                          const std::vector<std::string>& implementations) {
    c.validate();
    if (c.algorithm != AlgorithmId::median_ng && c.algorithm != AlgorithmId::median_som) {
        fail(ErrorKind::config, "benchmark supports median-ng and median-som");
    }
    if (implementations.empty()) fail(ErrorKind::config, "no implementations to benchmark");
    const auto d = dissimilarity_for(data, c);
    const DenseDissimilarity dense = materialize(*d);
    const MedianContext ctx(dense);

    BenchmarkReport report;
    report.config = c;
    report.exact = c.algorithm == AlgorithmId::median_som || c.ties != TiePolicy::scan_order;
    std::vector<std::vector<std::size_t>> reference;
    for (const auto& impl : implementations) {
        ExperimentConfig ci = c;
        ci.implementation = impl;
        ci.validate();
        MedianConfig mc;
        mc.k = c.k;
        mc.schedule = default_schedule(c);
        mc.seed = c.seed;
        mc.ties = c.ties;
        mc.record_trajectory = true;
        MedianAlgorithm alg = MedianAlgorithm::median_ng;
        if (c.algorithm == AlgorithmId::median_som) {
            alg = MedianAlgorithm::median_som;
            mc.lattice = default_lattice(c);
            mc.som_impl = som_impl_of(ci);
        } else {
            mc.ng_impl = ng_impl_of(ci);
        }
        const MedianModel m = train_median(ctx, alg, mc);
        BenchmarkRow row;
        row.implementation = impl;
        row.epochs = m.epochs_run;
        double total = 0.0;
        for (const auto& h : m.history) {
            total += h.seconds;
            row.counters += h.counters;
        }
        row.mean_epoch_seconds = m.epochs_run ? total / static_cast<double>(m.epochs_run) : 0.0;
        row.final_cost = m.final_cost;
        if (reference.empty() && report.rows.empty()) {
            reference = m.trajectory;
        } else {
            row.identical = m.trajectory == reference;
        }
        report.rows.push_back(row);
    }
    return report;
}

void require_identical(const BenchmarkReport& r) {
    if (!r.exact) return;
    for (const auto& row : r.rows) {
        if (!row.identical) {
            fail(ErrorKind::invariant, "implementation " + row.implementation + " differs from " +
                                           r.rows.front().implementation);
        }
    }
}

std::string benchmark_json(const BenchmarkReport& r) {
    json j;
    j["report_version"] = kReportVersion;
    j["generator"] = generator_json();
    j["config"] = json::parse(config_to_json(r.config));
    j["exact"] = r.exact;
    json rows = json::array();
    for (const auto& x : r.rows) {
        rows.push_back({{"implementation", x.implementation},
                        {"epochs", x.epochs},
                        {"mean_epoch_seconds", x.mean_epoch_seconds},
                        {"final_cost", x.final_cost},
                        {"identical", x.identical},
                        {"counters", counters_json(x.counters)}});
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

std::string benchmark_csv(const BenchmarkReport& r) {
    std::ostringstream out;
    out << "implementation,epochs,mean_epoch_seconds,candidates_evaluated,classes_pruned,"
           "partial_sums_abandoned,terms_summed,final_cost,identical\n";
    out.precision(17);
    for (const auto& x : r.rows) {
        out << x.implementation << ',' << x.epochs << ',' << x.mean_epoch_seconds << ','
            << x.counters.candidates_evaluated << ',' << x.counters.classes_pruned << ','
            << x.counters.partial_sums_abandoned << ',' << x.counters.terms_summed << ',' << x.final_cost << ','
            << (x.identical ? "true" : "false") << '\n';
    }
    return out.str();
}

}  // namespace mediatop
