#include "mediatop/fast_ng.hpp"

#include <algorithm>
#include <cfloat>
#include <limits>
#include <numeric>

#include "mediatop/error.hpp"

namespace mediatop {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
}  // namespace

RankPartition rank_partition(std::span<const std::uint32_t> ranks, std::size_t n, std::size_t k) {
    if (ranks.size() != n * k) fail(ErrorKind::shape, "rank table has wrong size");
    RankPartition p;
    p.n = n;
    p.k = k;
    p.offsets.assign(k * (k + 1), 0);
    p.members.resize(k * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const std::uint32_t r = ranks[i * k + j];
            if (r >= k) fail(ErrorKind::range, "rank out of range");
            ++p.offsets[j * (k + 1) + r + 1];
        }
    }
    std::vector<std::uint32_t> fill(k * k);
    for (std::size_t j = 0; j < k; ++j) {
        std::uint32_t* off = p.offsets.data() + j * (k + 1);
        for (std::size_t r = 0; r < k; ++r) off[r + 1] += off[r];
        std::copy(off, off + k, fill.begin() + static_cast<std::ptrdiff_t>(j * k));
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const std::uint32_t r = ranks[i * k + j];
            p.members[j * n + fill[j * k + r]++] = static_cast<std::uint32_t>(i);
        }
    }
    return p;
}

FactorizedValue factorized_criterion(std::size_t l, std::size_t j, const NgSearchInput& in,
                                     double budget, Grain grain, SearchCounters* counters) {
    const double* col = in.ctx->col(l);
    const bool weighted = !in.weights.empty();
    double s = 0.0;
    std::uint64_t terms = 0;
    FactorizedValue out;
    for (std::size_t r = 0; r < in.k && !out.stopped; ++r) {
        const double h = in.h[r];
        if (h == 0.0) break;  // h is nonincreasing in the rank
        double part = 0.0;
        const auto members = in.partition->members_of(j, r);
        if (grain == Grain::fine) {
            for (std::uint32_t i : members) {
                part += weighted ? in.weights[i] * col[i] : col[i];
                ++terms;
                if (s + h * part > budget) {
                    out.stopped = true;
                    break;
                }
            }
        } else {
            for (std::uint32_t i : members) part += weighted ? in.weights[i] * col[i] : col[i];
            terms += members.size();
        }
        if (out.stopped) break;
        s += h * part;
        if (s > budget) out.stopped = true;
    }
    out.value = s;
    if (counters) {
        counters->terms_summed += terms;
        if (out.stopped) ++counters->partial_sums_abandoned;
    }
    return out;
}

double naive_ng_criterion(std::size_t l, std::size_t j, const NgSearchInput& in,
                          std::vector<double>& scratch) {
    const double* col = in.ctx->col(l);
    const std::size_t n = in.ctx->size();
    const bool weighted = !in.weights.empty();
    scratch.assign(in.k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        scratch[in.ranks[i * in.k + j]] += weighted ? in.weights[i] * col[i] : col[i];
    }
    double s = 0.0;
    for (std::size_t r = 0; r < in.k; ++r) s += in.h[r] * scratch[r];
    return s;
}

std::vector<std::uint32_t> order_candidates(std::size_t j, CandidateOrder mode,
                                            std::span<const std::size_t> loc,
                                            const MedianContext& ctx,
                                            std::span<const std::size_t> winner,
                                            const RankPartition& partition) {
    const std::size_t n = ctx.size();
    std::vector<std::uint32_t> out;
    switch (mode) {
        case CandidateOrder::natural:
            out.resize(n);
            std::iota(out.begin(), out.end(), 0u);
            break;
        case CandidateOrder::rank: {
            const auto r = partition.by_rank(j);
            out.assign(r.begin(), r.end());
            break;
        }
        case CandidateOrder::field_distance: {
            const std::size_t k = loc.size();
            std::vector<std::size_t> protos(k);
            std::iota(protos.begin(), protos.end(), 0);
            const double* dj = ctx.row(loc[j]);
            std::stable_sort(protos.begin(), protos.end(), [&](std::size_t a, std::size_t b) {
                if (a == j || b == j) return a == j && b != j;
                return dj[loc[a]] < dj[loc[b]];
            });
            std::vector<std::uint32_t> offsets(k + 1, 0);
            for (std::size_t w : winner) ++offsets[w + 1];
            for (std::size_t c = 0; c < k; ++c) offsets[c + 1] += offsets[c];
            std::vector<std::uint32_t> fields(n);
            std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
            for (std::size_t i = 0; i < n; ++i) fields[fill[winner[i]]++] = static_cast<std::uint32_t>(i);
            out.reserve(n);
            for (std::size_t c : protos) {
                out.insert(out.end(), fields.begin() + offsets[c], fields.begin() + offsets[c + 1]);
            }
            break;
        }
    }
    return out;
}

namespace {

// Coarse grain evaluated one rank class at a time for all live candidates.
// The rows d(i, .) of a class are streamed once, where candidate-major order
// would pull one cache line per entry out of every candidate column. Each
// candidate still sums its classes in order and each class in ascending
// member order, so values equal factorized_criterion. The budget always comes
// from a fully evaluated candidate and pruning needs the partial sum to
// exceed it, so pruned candidates can neither win nor tie.
NgSearchResult class_major_search(std::size_t j, std::span<const std::uint32_t> ordering, const NgSearchInput& in,
                                  const TieBreak& ties, const std::vector<char>* excluded, SearchCounters& local) {
    const std::size_t n = in.ctx->size();
    const bool weighted = !in.weights.empty();
    NgSearchResult best;
    best.value = kInf;

    std::vector<std::uint32_t> live;
    live.reserve(ordering.size());
    for (std::uint32_t l : ordering) {
        if (excluded && (*excluded)[l]) continue;
        live.push_back(l);
    }
    local.candidates_evaluated += live.size();
    if (live.empty()) return best;

    double budget = factorized_criterion(live.front(), j, in, kInf, Grain::coarse, &local).value;
    std::sort(live.begin(), live.end());
    std::vector<double> s(n, 0.0), part(n, 0.0);
    std::vector<char> done(n, 0);  // fully evaluated, value in s

    for (std::size_t r = 0; r < in.k && !live.empty(); ++r) {
        const double h = in.h[r];
        if (h == 0.0) break;
        const auto members = in.partition->members_of(j, r);
        if (members.empty()) continue;
        const bool dense = live.size() * 4 > n;
        if (dense) std::fill(part.begin(), part.end(), 0.0);
        else for (std::uint32_t l : live) part[l] = 0.0;
        for (std::uint32_t i : members) {
            const double* row = in.ctx->row(i);
            const double w = weighted ? in.weights[i] : 1.0;
            if (dense && weighted) {
                for (std::size_t l = 0; l < n; ++l) part[l] += w * row[l];
            } else if (dense) {
                for (std::size_t l = 0; l < n; ++l) part[l] += row[l];
            } else if (weighted) {
                for (std::uint32_t l : live) part[l] += w * row[l];
            } else {
                for (std::uint32_t l : live) part[l] += row[l];
            }
        }
        local.terms_summed += members.size() * live.size();

        std::size_t keep = 0;
        for (std::uint32_t l : live) {
            s[l] += h * part[l];
            if (s[l] > budget) ++local.partial_sums_abandoned;
            else live[keep++] = l;
        }
        live.resize(keep);

        // tighten the budget with the most promising survivor
        if (live.size() > 8) {
            std::uint32_t lead = live.front();
            for (std::uint32_t l : live) {
                if (s[l] < s[lead]) lead = l;
            }
            if (!done[lead]) {
                const auto v = factorized_criterion(lead, j, in, budget, Grain::coarse, &local);
                done[lead] = 1;
                if (!v.stopped) budget = std::min(budget, v.value);
            }
        }
    }

    std::vector<char> alive(n, 0);
    for (std::uint32_t l : live) alive[l] = 1;
    for (std::uint32_t l : ordering) {
        if (!alive[l]) continue;
        if (ties.better(s[l], l, best.value, best.index)) {
            best.index = l;
            best.value = s[l];
        }
    }
    return best;
}

}  // namespace

NgSearchResult ng_prototype_search(std::size_t j, std::span<const std::uint32_t> ordering,
                                   const NgSearchInput& in, bool natural_inner, Grain grain,
                                   const TieBreak& ties, const std::vector<char>* excluded,
                                   SearchCounters* counters) {
    const std::size_t n = in.ctx->size();
    const bool weighted = !in.weights.empty();
    // A natural-order partial sum can differ from the reference order by
    // rounding; abandon only once it clears the incumbent by more than that.
    const double slack = 1.0 + 8.0 * static_cast<double>(n + in.k + 2) * DBL_EPSILON;
    SearchCounters local;
    NgSearchResult best;
    best.value = kInf;

    if (!natural_inner && grain == Grain::coarse) {
        best = class_major_search(j, ordering, in, ties, excluded, local);
        if (counters) *counters += local;
        return best;
    }

    for (std::uint32_t l : ordering) {
        if (excluded && (*excluded)[l]) continue;
        ++local.candidates_evaluated;
        const double budget = best.index == kNone ? kInf : best.value;
        if (natural_inner && best.index != kNone) {
            const double* col = in.ctx->col(l);
            const double limit = budget * slack;
            double s = 0.0;
            bool abandoned = false;
            std::size_t i = 0;
            for (; i < n; ++i) {
                const double term = weighted ? in.weights[i] * col[i] : col[i];
                s += in.h[in.ranks[i * in.k + j]] * term;
                if (s > limit) {
                    abandoned = true;
                    break;
                }
            }
            local.terms_summed += abandoned ? i + 1 : n;
            if (abandoned) {
                ++local.partial_sums_abandoned;
                continue;
            }
        }
        const auto v = factorized_criterion(l, j, in, budget, natural_inner ? Grain::coarse : grain, &local);
        if (v.stopped) continue;
        if (ties.better(v.value, l, best.value, best.index)) {
            best.index = l;
            best.value = v.value;
        }
    }
    if (counters) *counters += local;
    return best;
}

NgEngine ng_engine(NgImpl impl) {
    switch (impl) {
        case NgImpl::naive: return {CandidateOrder::natural, false, Grain::coarse};
        case NgImpl::early_none: return {CandidateOrder::natural, true, Grain::fine};
        case NgImpl::early_candidate: return {CandidateOrder::field_distance, true, Grain::fine};
        case NgImpl::early_fine: return {CandidateOrder::rank, false, Grain::fine};
        case NgImpl::early_coarse: return {CandidateOrder::rank, false, Grain::coarse};
    }
    fail(ErrorKind::config, "unknown NG implementation");
}

}  // namespace mediatop
