#include "mediatop/median.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

#include "mediatop/error.hpp"
#include "mediatop/euclid_batch.hpp"
#include "mediatop/fast_ng.hpp"
#include "mediatop/fast_som.hpp"
#include "mediatop/parallel.hpp"
#include "mediatop/random.hpp"
#include "median_internal.hpp"

namespace mediatop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

template <class E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&table)[N], const char* what) {
    for (const auto& [name, value] : table) {
        if (s == name) return value;
    }
    fail(ErrorKind::config, std::string("unknown ") + what + " '" + s + "'");
}

const std::pair<const char*, MedianAlgorithm> kAlgorithms[] = {
    {"median-ng", MedianAlgorithm::median_ng},
    {"median-som", MedianAlgorithm::median_som},
    {"kmedoids", MedianAlgorithm::kmedoids},
};
const std::pair<const char*, SomImpl> kSomImpls[] = {
    {"naive", SomImpl::naive},         {"block", SomImpl::block},
    {"bnb-self", SomImpl::bnb_self},   {"bnb-full", SomImpl::bnb_full},
    {"bnb-full-early", SomImpl::bnb_full_early},
};
const std::pair<const char*, NgImpl> kNgImpls[] = {
    {"naive", NgImpl::naive},
    {"ng-early-none", NgImpl::early_none},
    {"ng-early-candidate", NgImpl::early_candidate},
    {"ng-early-fine", NgImpl::early_fine},
    {"ng-early-coarse", NgImpl::early_coarse},
    {"early-none", NgImpl::early_none},
    {"early-candidate", NgImpl::early_candidate},
    {"early-fine", NgImpl::early_fine},
    {"early-coarse", NgImpl::early_coarse},
};
const std::pair<const char*, TiePolicy> kTies[] = {
    {"lowest-index", TiePolicy::lowest_index},
    {"random", TiePolicy::random},
    {"scan-order", TiePolicy::scan_order},
};

template <class E, std::size_t N>
const char* enum_name(E v, const std::pair<const char*, E> (&table)[N]) {
    for (const auto& [name, value] : table) {
        if (v == value) return name;
    }
    return "?";
}

const double* label_row(const LabelSet* labels, std::size_t i) {
    if (!labels || !labels->present(i)) return nullptr;
    return labels->coding.data() + i * labels->coding.cols();
}

double weight_of(std::span<const double> weights, std::size_t i) {
    return weights.empty() ? 1.0 : weights[i];
}

std::vector<std::uint64_t> tie_keys(const EpochOptions& options, std::size_t n) {
    if (options.ties != TiePolicy::random) return {};
    Rng rng(Rng::derive(options.tie_seed, options.epoch));
    const auto perm = rng.permutation(n);
    return {perm.begin(), perm.end()};
}

// Y^j = sum_i w_ij y^i / sum_i w_ij over labeled points; keeps Y^j when
// no labeled point carries weight.
void update_labels(Matrix& Y, const LabelSet& labels, std::size_t k,
                   const std::function<double(std::size_t i, std::size_t j)>& weight) {
    const std::size_t n = labels.mask.size();
    const std::size_t d = labels.classes();
    parallel_for(k, [&](std::size_t j) {
        std::vector<double> acc(d, 0.0);
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!labels.present(i)) continue;
            const double w = weight(i, j);
            if (w == 0.0) continue;
            mass += w;
            const double* y = labels.coding.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) acc[c] += w * y[c];
        }
        if (mass > 0.0) {
            for (std::size_t c = 0; c < d; ++c) Y(j, c) = acc[c] / mass;
        }
    });
}

bool supervised(const SupervisionConfig& sup, const LabelSet* labels, const MedianPrototypes& p) {
    return sup.enabled && labels && p.labels.rows() == p.size();
}

}  // namespace

const char* to_string(MedianAlgorithm a) { return enum_name(a, kAlgorithms); }
const char* to_string(SomImpl i) { return enum_name(i, kSomImpls); }
const char* to_string(NgImpl i) { return enum_name(i, kNgImpls); }
const char* to_string(TiePolicy t) { return enum_name(t, kTies); }
MedianAlgorithm median_algorithm_from_string(const std::string& s) { return parse_enum(s, kAlgorithms, "algorithm"); }
SomImpl som_impl_from_string(const std::string& s) { return parse_enum(s, kSomImpls, "SOM implementation"); }
NgImpl ng_impl_from_string(const std::string& s) { return parse_enum(s, kNgImpls, "NG implementation"); }
TiePolicy tie_policy_from_string(const std::string& s) { return parse_enum(s, kTies, "tie policy"); }

void SupervisionConfig::validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) fail(ErrorKind::config, "beta must lie in (0, 1]");
}

double blended_distance(double d_input, const double* y, std::span<const double> Y, double beta) {
    if (!(beta > 0.0 && beta <= 1.0)) fail(ErrorKind::domain, "beta must lie in (0, 1]");
    if (beta == 1.0) return d_input;
    if (!y) return beta * d_input;
    double sq = 0.0;
    for (std::size_t c = 0; c < Y.size(); ++c) {
        const double diff = y[c] - Y[c];
        sq += diff * diff;
    }
    return beta * d_input + (1.0 - beta) * sq;
}

SearchCounters& SearchCounters::operator+=(const SearchCounters& o) {
    candidates_evaluated += o.candidates_evaluated;
    classes_pruned += o.classes_pruned;
    partial_sums_abandoned += o.partial_sums_abandoned;
    terms_summed += o.terms_summed;
    return *this;
}

MedianContext::MedianContext(const DenseDissimilarity& d) : d_(d) {
    if (!d.symmetric()) {
        const std::size_t n = d.size();
        transposed_ = Matrix(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = d.row(i);
            for (std::size_t l = 0; l < n; ++l) transposed_(l, i) = r[l];
        }
    }
}

namespace detail {

namespace {
Matrix distances_to(const MedianContext& ctx, const MedianPrototypes& protos,
                    const SupervisionConfig& sup, const LabelSet* labels, bool blend) {
    const std::size_t n = ctx.size();
    const std::size_t k = protos.size();
    Matrix out(n, k, 0.0);
    const bool with_labels = blend && sup.active() && labels && protos.labels.rows() == k;
    parallel_for(n, [&](std::size_t i) {
        const double* row = ctx.row(i);
        const double* y = with_labels ? label_row(labels, i) : nullptr;
        for (std::size_t j = 0; j < k; ++j) {
            const double d = row[protos.loc[j]];
            out(i, j) = with_labels ? blended_distance(d, y, protos.labels.row(j), sup.beta) : d;
        }
    });
    return out;
}
}  // namespace

Matrix assignment_distances(const MedianContext& ctx, const MedianPrototypes& protos,
                            const SupervisionConfig& sup, const LabelSet* labels) {
    return distances_to(ctx, protos, sup, labels, sup.blended_ranks);
}

Matrix blended_distances(const MedianContext& ctx, const MedianPrototypes& protos,
                         const SupervisionConfig& sup, const LabelSet* labels) {
    return distances_to(ctx, protos, sup, labels, true);
}

SomAssignment som_assign(const MedianContext& ctx, const MedianPrototypes& protos,
                         const Lattice& lattice, double sigma, const SupervisionConfig& sup,
                         const LabelSet* labels) {
    const std::size_t n = ctx.size();
    const std::size_t k = protos.size();
    if (lattice.size() != k) fail(ErrorKind::config, "lattice size differs from K");
    const Matrix a = assignment_distances(ctx, protos, sup, labels);
    const bool same = !(sup.active() && labels) || sup.blended_ranks;
    const Matrix b = same ? Matrix() : blended_distances(ctx, protos, sup, labels);
    const Matrix& cost_d = same ? a : b;

    Matrix h(k, k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t m = 0; m < k; ++m) h(j, m) = neighborhood_weight(lattice.nd(j, m), sigma);
    }
    SomAssignment out;
    out.star.resize(n);
    out.winner.resize(n);
    std::vector<double> part(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto row = a.row(i);
        std::size_t star = 0;
        double star_v = kInf;
        std::size_t win = 0;
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < k; ++m) s += h(j, m) * row[m];
            if (s < star_v) {
                star_v = s;
                star = j;
            }
            if (row[j] < row[win]) win = j;
        }
        out.star[i] = star;
        out.winner[i] = win;
        const auto crow = cost_d.row(i);
        double c = 0.0;
        for (std::size_t m = 0; m < k; ++m) c += h(star, m) * crow[m];
        part[i] = c;
    });
    double cost = 0.0;
    for (double v : part) cost += v;
    out.cost = 0.5 * cost;
    return out;
}

}  // namespace detail

std::vector<std::size_t> resolve_collisions(std::span<const std::size_t> choices, std::size_t n,
                                            const NextBest& next_best, std::size_t* collisions) {
    if (choices.size() > n) fail(ErrorKind::config, "more prototypes than data points");
    std::vector<char> claimed(n, 0);
    std::vector<std::size_t> out(choices.size());
    std::size_t count = 0;
    for (std::size_t j = 0; j < choices.size(); ++j) {
        std::size_t c = choices[j];
        if (c >= n) fail(ErrorKind::range, "prototype choice out of range");
        if (claimed[c]) {
            c = next_best(j, claimed);
            ++count;
            if (c >= n || claimed[c]) fail(ErrorKind::invariant, "collision fallback returned a claimed index");
        }
        claimed[c] = 1;
        out[j] = c;
    }
    if (collisions) *collisions = count;
    return out;
}

std::vector<std::size_t> resolve_collisions(const std::vector<std::vector<double>>& costs) {
    if (costs.empty()) return {};
    const std::size_t n = costs.front().size();
    std::vector<std::size_t> choices(costs.size());
    for (std::size_t j = 0; j < costs.size(); ++j) {
        if (costs[j].size() != n) fail(ErrorKind::shape, "cost lists differ in length");
        choices[j] = static_cast<std::size_t>(std::min_element(costs[j].begin(), costs[j].end()) - costs[j].begin());
    }
    return resolve_collisions(choices, n, [&](std::size_t j, const std::vector<char>& claimed) {
        std::size_t best = kNone;
        for (std::size_t l = 0; l < n; ++l) {
            if (!claimed[l] && (best == kNone || costs[j][l] < costs[j][best])) best = l;
        }
        return best;
    });
}

Matrix initial_prototype_labels(std::span<const std::size_t> loc, const LabelSet& labels) {
    const std::size_t d = labels.classes();
    Matrix Y(loc.size(), d, d ? 1.0 / static_cast<double>(d) : 0.0);
    for (std::size_t j = 0; j < loc.size(); ++j) {
        if (!labels.present(loc[j])) continue;
        for (std::size_t c = 0; c < d; ++c) Y(j, c) = labels.coding(loc[j], c);
    }
    return Y;
}

MedianPrototypes initial_median_prototypes(std::size_t n, std::size_t k, std::uint64_t seed,
                                           const LabelSet* labels, const SupervisionConfig& sup) {
    if (k == 0 || k > n) fail(ErrorKind::config, "need 1 <= K <= N");
    MedianPrototypes p;
    Rng rng(seed);
    p.loc = rng.sample_without_replacement(n, k);
    if (sup.enabled && labels) p.labels = initial_prototype_labels(p.loc, *labels);
    return p;
}

// ---------------------------------------------------------------------------
// median NG

EpochResult median_ng_epoch(const MedianContext& ctx, const MedianPrototypes& protos, double sigma,
                            const SupervisionConfig& sup, const LabelSet* labels,
                            const EpochOptions& options, std::span<const double> weights) {
    const std::size_t n = ctx.size();
    const std::size_t k = protos.size();
    if (k == 0 || k > n) fail(ErrorKind::config, "need 1 <= K <= N");
    if (!weights.empty() && weights.size() != n) fail(ErrorKind::shape, "weights need one entry per point");

    EpochResult res;
    const Matrix a = detail::assignment_distances(ctx, protos, sup, labels);
    const bool same = !(sup.active() && labels) || sup.blended_ranks;
    const Matrix b = same ? Matrix() : detail::blended_distances(ctx, protos, sup, labels);
    const Matrix& cost_d = same ? a : b;

    std::vector<double> h(k);
    for (std::size_t r = 0; r < k; ++r) h[r] = neighborhood_weight(static_cast<double>(r), sigma);

    res.ranks.resize(n * k);
    res.winner.resize(n);
    std::vector<double> part(n);
    parallel_for(n, [&](std::size_t i) {
        std::span<std::uint32_t> rk(res.ranks.data() + i * k, k);
        rank_distances(a.row(i), rk);
        const auto crow = cost_d.row(i);
        double c = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (rk[j] == 0) res.winner[i] = j;
            c += h[rk[j]] * crow[j];
        }
        part[i] = weight_of(weights, i) * c;
    });
    double cost = 0.0;
    for (double v : part) cost += v;
    res.cost = 0.5 * cost;
    res.field = res.winner;

    const RankPartition partition = rank_partition(res.ranks, n, k);
    NgSearchInput in;
    in.ctx = &ctx;
    in.ranks = res.ranks.data();
    in.partition = &partition;
    in.h = h;
    in.weights = weights;
    in.k = k;
    const std::vector<std::uint64_t> keys = tie_keys(options, n);
    const TieBreak ties{options.ties, keys};

    res.chosen.resize(k);
    NextBest next_best;
    std::vector<double> table;  // naive: K x N criteria
    std::vector<std::vector<std::uint32_t>> orderings;
    const NgEngine engine = ng_engine(options.ng_impl);

    if (options.ng_impl == NgImpl::naive) {
        table.resize(k * n);
        parallel_for(k, [&](std::size_t j) {
            std::vector<double> scratch;
            for (std::size_t l = 0; l < n; ++l) table[j * n + l] = naive_ng_criterion(l, j, in, scratch);
        });
        res.counters.candidates_evaluated = k * n;
        res.counters.terms_summed = static_cast<std::uint64_t>(k) * n * n;
        auto pick = [&](std::size_t j, const std::vector<char>* excluded) {
            std::size_t best = kNone;
            double best_v = kInf;
            for (std::size_t l = 0; l < n; ++l) {
                if (excluded && (*excluded)[l]) continue;
                const double v = table[j * n + l];
                if (ties.better(v, l, best_v, best)) {
                    best = l;
                    best_v = v;
                }
            }
            return best;
        };
        for (std::size_t j = 0; j < k; ++j) res.chosen[j] = pick(j, nullptr);
        next_best = [pick](std::size_t j, const std::vector<char>& claimed) { return pick(j, &claimed); };
    } else {
        orderings.resize(k);
        std::vector<SearchCounters> per(k);
        parallel_for(k, [&](std::size_t j) {
            orderings[j] = order_candidates(j, engine.order, protos.loc, ctx, res.winner, partition);
            const auto r = ng_prototype_search(j, orderings[j], in, engine.natural_inner, engine.grain,
                                               ties, nullptr, &per[j]);
            res.chosen[j] = r.index;
        });
        for (const auto& c : per) res.counters += c;
        next_best = [&](std::size_t j, const std::vector<char>& claimed) {
            return ng_prototype_search(j, orderings[j], in, engine.natural_inner, engine.grain, ties,
                                       &claimed, &res.counters)
                .index;
        };
    }
    res.prototypes.loc = resolve_collisions(res.chosen, n, next_best, &res.collisions);

    double crit = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        crit += factorized_criterion(res.prototypes.loc[j], j, in, kInf, Grain::coarse).value;
    }
    res.criterion_sum = crit;

    res.prototypes.labels = protos.labels;
    if (supervised(sup, labels, protos)) {
        update_labels(res.prototypes.labels, *labels, k, [&](std::size_t i, std::size_t j) {
            return h[res.ranks[i * k + j]] * weight_of(weights, i);
        });
    }
    return res;
}

// ---------------------------------------------------------------------------
// median SOM

EpochResult median_som_epoch(const MedianContext& ctx, const MedianPrototypes& protos,
                             const Lattice& lattice, double sigma, const SupervisionConfig& sup,
                             const LabelSet* labels, const EpochOptions& options) {
    const std::size_t n = ctx.size();
    const std::size_t k = protos.size();
    if (k == 0 || k > n) fail(ErrorKind::config, "need 1 <= K <= N");

    EpochResult res;
    auto assign = detail::som_assign(ctx, protos, lattice, sigma, sup, labels);
    res.cost = assign.cost;
    res.winner = std::move(assign.winner);
    const ReceptiveFields fields = ReceptiveFields::from_owner(assign.star, k);
    res.field = std::move(assign.star);
    const CanonicalWeights weights = CanonicalWeights::make(lattice, sigma);

    res.chosen.resize(k);
    NextBest next_best;
    std::vector<double> table;
    BlockSums sums;
    BoundTable bounds;

    auto argmin_row = [n](const std::function<double(std::size_t)>& value, const std::vector<char>* excluded) {
        std::size_t best = kNone;
        double best_v = kInf;
        for (std::size_t l = 0; l < n; ++l) {
            if (excluded && (*excluded)[l]) continue;
            const double v = value(l);
            if (best == kNone || v < best_v) {
                best = l;
                best_v = v;
            }
        }
        return best;
    };

    switch (options.som_impl) {
        case SomImpl::naive: {
            table = naive_som_criteria(ctx, fields, weights);
            res.counters.candidates_evaluated = k * n;
            res.counters.terms_summed = static_cast<std::uint64_t>(k) * n * n;
            auto pick = [&table, n, argmin_row](std::size_t j, const std::vector<char>* excluded) {
                return argmin_row([&](std::size_t l) { return table[j * n + l]; }, excluded);
            };
            for (std::size_t j = 0; j < k; ++j) res.chosen[j] = pick(j, nullptr);
            next_best = [pick](std::size_t j, const std::vector<char>& claimed) { return pick(j, &claimed); };
            break;
        }
        case SomImpl::block: {
            sums = block_sums(ctx, fields);
            res.chosen = block_prototype_update(sums, lattice, sigma);
            res.counters.candidates_evaluated = k * n;
            res.counters.terms_summed = static_cast<std::uint64_t>(k) * n * k;
            next_best = [&](std::size_t j, const std::vector<char>& claimed) {
                return argmin_row([&](std::size_t l) { return weights.criterion(j, sums.sums.data() + l * k); },
                                  &claimed);
            };
            break;
        }
        case SomImpl::bnb_self:
        case SomImpl::bnb_full:
        case SomImpl::bnb_full_early: {
            sums = block_sums(ctx, fields);
            bounds = bnb_bounds(sums, weights,
                                options.som_impl == SomImpl::bnb_self ? ThetaMode::self : ThetaMode::full);
            const bool early = options.som_impl == SomImpl::bnb_full_early;
            res.chosen = bnb_prototype_search(sums, bounds, fields, weights, early, &res.counters);
            next_best = [&, early](std::size_t j, const std::vector<char>& claimed) {
                return bnb_search_one(j, sums, bounds, fields, weights, early, &claimed, &res.counters);
            };
            break;
        }
    }
    res.prototypes.loc = resolve_collisions(res.chosen, n, next_best, &res.collisions);

    double crit = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double* col = ctx.col(res.prototypes.loc[j]);
        const std::uint32_t* ord = weights.order.data() + j * k;
        const double* hw = weights.weight.data() + j * k;
        double s = 0.0;
        for (std::size_t r = 0; r < k; ++r) {
            double part = 0.0;
            for (std::uint32_t i : fields.members_of(ord[r])) part += col[i];
            s += hw[r] * part;
        }
        crit += s;
    }
    res.criterion_sum = crit;

    res.prototypes.labels = protos.labels;
    if (supervised(sup, labels, protos)) {
        update_labels(res.prototypes.labels, *labels, k, [&](std::size_t i, std::size_t j) {
            return neighborhood_weight(lattice.nd(res.field[i], j), sigma);
        });
    }
    return res;
}

// ---------------------------------------------------------------------------
// K-medoids

EpochResult kmedoids_epoch(const MedianContext& ctx, const MedianPrototypes& protos,
                           const SupervisionConfig& sup, const LabelSet* labels) {
    const std::size_t n = ctx.size();
    const std::size_t k = protos.size();
    if (k == 0 || k > n) fail(ErrorKind::config, "need 1 <= K <= N");

    EpochResult res;
    const Matrix a = detail::assignment_distances(ctx, protos, sup, labels);
    const bool same = !(sup.active() && labels) || sup.blended_ranks;
    const Matrix b = same ? Matrix() : detail::blended_distances(ctx, protos, sup, labels);
    const Matrix& cost_d = same ? a : b;

    res.winner.resize(n);
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = a.row(i);
        std::size_t w = 0;
        for (std::size_t j = 1; j < k; ++j) {
            if (row[j] < row[w]) w = j;
        }
        res.winner[i] = w;
        cost += cost_d(i, w);
    }
    res.cost = 0.5 * cost;
    res.field = res.winner;
    const ReceptiveFields fields = ReceptiveFields::from_owner(res.winner, k);

    auto field_cost = [&](std::size_t j, std::size_t l) {
        const double* col = ctx.col(l);
        if (fields.class_size(j) == 0) return col[protos.loc[j]];
        double s = 0.0;
        for (std::uint32_t i : fields.members_of(j)) s += col[i];
        return s;
    };
    res.chosen.resize(k);
    parallel_for(k, [&](std::size_t j) {
        if (fields.class_size(j) == 0) {
            res.chosen[j] = protos.loc[j];
            return;
        }
        std::size_t best = kNone;
        double best_v = kInf;
        for (std::uint32_t l : fields.members_of(j)) {
            const double v = field_cost(j, l);
            if (best == kNone || v < best_v) {
                best = l;
                best_v = v;
            }
        }
        res.chosen[j] = best;
    });
    res.counters.candidates_evaluated = n;
    res.prototypes.loc = resolve_collisions(
        res.chosen, n,
        [&](std::size_t j, const std::vector<char>& claimed) {
            std::size_t best = kNone;
            double best_v = kInf;
            for (std::size_t l = 0; l < n; ++l) {
                if (claimed[l]) continue;
                const double v = field_cost(j, l);
                if (best == kNone || v < best_v) {
                    best = l;
                    best_v = v;
                }
            }
            return best;
        },
        &res.collisions);

    double crit = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (fields.class_size(j) > 0) crit += field_cost(j, res.prototypes.loc[j]);
    }
    res.criterion_sum = crit;

    res.prototypes.labels = protos.labels;
    if (supervised(sup, labels, protos)) {
        update_labels(res.prototypes.labels, *labels, k, [&](std::size_t i, std::size_t j) {
            return res.winner[i] == j ? 1.0 : 0.0;
        });
    }
    return res;
}

// ---------------------------------------------------------------------------
// evaluation helpers

std::vector<std::size_t> median_winners(const DissimilaritySource& d, std::span<const std::size_t> loc) {
    const std::size_t n = d.size();
    if (loc.empty()) fail(ErrorKind::config, "no prototypes");
    std::vector<std::size_t> w(n);
    std::vector<std::size_t> rows(1);
    std::vector<double> buf(loc.size());
    for (std::size_t i = 0; i < n; ++i) {
        rows[0] = i;
        d.fill_block(rows, loc, buf.data());
        std::size_t best = 0;
        for (std::size_t j = 1; j < loc.size(); ++j) {
            if (buf[j] < buf[best]) best = j;
        }
        w[i] = best;
    }
    return w;
}

double median_quantization_error(const DissimilaritySource& d, std::span<const std::size_t> loc,
                                 std::span<const std::size_t> winner) {
    if (winner.size() != d.size()) fail(ErrorKind::shape, "one winner per point expected");
    double s = 0.0;
    for (std::size_t i = 0; i < winner.size(); ++i) s += d(i, loc[winner[i]]);
    return 0.5 * s;
}

std::vector<int> posterior_label(const DissimilaritySource& d, std::span<const std::size_t> loc,
                                 std::span<const std::size_t> winner, const LabelSet& labels) {
    const std::size_t n = d.size();
    const std::size_t k = loc.size();
    const std::size_t classes = labels.classes();
    if (winner.size() != n || labels.mask.size() != n) fail(ErrorKind::shape, "labels and winners must cover all points");
    std::vector<std::vector<std::size_t>> votes(k, std::vector<std::size_t>(classes, 0));
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = labels.crisp(i);
        if (c < 0) continue;
        any = true;
        ++votes[winner[i]][static_cast<std::size_t>(c)];
    }
    if (!any) fail(ErrorKind::config, "posterior labeling needs labeled points");
    std::vector<int> out(k, -1);
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < classes; ++c) {
            if (votes[j][c] > votes[j][best]) best = c;
        }
        if (votes[j][best] > 0) {
            out[j] = static_cast<int>(best);
            continue;
        }
        std::size_t nearest = kNone;
        double nearest_d = kInf;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels.crisp(i) < 0) continue;
            const double v = d(loc[j], i);
            if (nearest == kNone || v < nearest_d) {
                nearest = i;
                nearest_d = v;
            }
        }
        out[j] = labels.crisp(nearest);
    }
    return out;
}

std::vector<int> crisp_prototype_labels(const Matrix& label_vectors, std::span<const int> fallback) {
    const std::size_t k = label_vectors.rows();
    if (fallback.size() != k) fail(ErrorKind::shape, "one fallback label per prototype expected");
    std::vector<int> out(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto row = label_vectors.row(j);
        double mass = 0.0;
        std::size_t best = 0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            mass += row[c];
            if (row[c] > row[best]) best = c;
        }
        out[j] = mass > 0.0 ? static_cast<int>(best) : fallback[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// training

MedianModel train_median(const MedianContext& ctx, MedianAlgorithm algorithm,
                         const MedianConfig& config, const LabelSet* labels) {
    const std::size_t n = ctx.size();
    const std::size_t k = config.k;
    if (k == 0 || k > n) fail(ErrorKind::config, "need 1 <= K <= N (K=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
    config.supervision.validate();
    if (config.schedule.epochs > 0) config.schedule.validate();
    if (config.supervision.enabled) {
        if (!labels) fail(ErrorKind::config, "supervised training needs labels");
        if (labels->mask.size() != n) fail(ErrorKind::shape, "labels must cover every point");
    }
    if (algorithm == MedianAlgorithm::median_som) {
        if (!config.lattice) fail(ErrorKind::config, "median SOM needs a lattice");
        if (config.lattice->size() != k) fail(ErrorKind::config, "lattice size differs from K");
    }
    if (!config.weights.empty()) {
        if (algorithm != MedianAlgorithm::median_ng) fail(ErrorKind::config, "multiplicities are supported for median NG only");
        if (config.weights.size() != n) fail(ErrorKind::shape, "weights need one entry per point");
        for (double w : config.weights) {
            if (!(w > 0.0)) fail(ErrorKind::config, "multiplicities must be positive");
        }
    }
    const LabelSet* used_labels = config.supervision.enabled ? labels : nullptr;

    MedianModel model;
    model.algorithm = algorithm;
    if (config.init) {
        const auto& init = *config.init;
        if (init.size() != k) fail(ErrorKind::config, "initial locations must have K entries");
        std::vector<char> seen(n, 0);
        for (std::size_t l : init) {
            if (l >= n || seen[l]) fail(ErrorKind::config, "initial locations must be distinct data indices");
            seen[l] = 1;
        }
        model.prototypes.loc = init;
        if (used_labels) model.prototypes.labels = initial_prototype_labels(init, *used_labels);
    } else {
        model.prototypes = initial_median_prototypes(n, k, config.seed, used_labels, config.supervision);
    }

    EpochOptions options;
    options.som_impl = config.som_impl;
    options.ng_impl = config.ng_impl;
    options.ties = config.ties;
    options.tie_seed = Rng::derive(config.seed, 0x7469u);

    for (std::size_t t = 0; t < config.schedule.epochs; ++t) {
        const double sigma = sigma_at(config.schedule, t);
        options.epoch = t;
        const auto start = std::chrono::steady_clock::now();
        EpochResult r;
        switch (algorithm) {
            case MedianAlgorithm::median_ng:
                r = median_ng_epoch(ctx, model.prototypes, sigma, config.supervision, used_labels, options,
                                    config.weights);
                break;
            case MedianAlgorithm::median_som:
                r = median_som_epoch(ctx, model.prototypes, *config.lattice, sigma, config.supervision,
                                     used_labels, options);
                break;
            case MedianAlgorithm::kmedoids:
                r = kmedoids_epoch(ctx, model.prototypes, config.supervision, used_labels);
                break;
        }
        const auto stop = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.sigma = sigma;
        rec.cost = r.cost;
        rec.seconds = std::chrono::duration<double>(stop - start).count();
        rec.collisions = r.collisions;
        rec.counters = r.counters;
        model.history.push_back(rec);
        ++model.epochs_run;
        const bool fixed = r.prototypes == model.prototypes;
        model.prototypes = std::move(r.prototypes);
        if (config.record_trajectory) model.trajectory.push_back(model.prototypes.loc);
        const bool at_end = algorithm == MedianAlgorithm::kmedoids || sigma == config.schedule.sigma_end;
        if (fixed && at_end) {
            model.converged = true;
            break;
        }
    }

    model.winner = median_winners(ctx.matrix(), model.prototypes.loc);
    model.final_cost = median_quantization_error(ctx.matrix(), model.prototypes.loc, model.winner);
    return model;
}

MedianModel train_median(const DissimilaritySource& d, MedianAlgorithm algorithm,
                         const MedianConfig& config, const LabelSet* labels) {
    if (const auto* dense = dynamic_cast<const DenseDissimilarity*>(&d)) {
        const MedianContext ctx(*dense);
        return train_median(ctx, algorithm, config, labels);
    }
    const DenseDissimilarity dense = materialize(d);
    const MedianContext ctx(dense);
    return train_median(ctx, algorithm, config, labels);
}

}  // namespace mediatop
