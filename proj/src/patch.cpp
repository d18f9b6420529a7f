#include "mediatop/patch.hpp"

#include <algorithm>
#include <numeric>

#include "mediatop/error.hpp"
#include "mediatop/random.hpp"

namespace mediatop {

PatchPlan make_patch_plan(std::size_t n, std::size_t patches) {
    if (patches == 0 || patches > n) fail(ErrorKind::config, "need 1 <= patches <= N");
    PatchPlan plan;
    plan.n = n;
    plan.patches = patches;
    plan.base = n / patches;
    const std::size_t extra = n - plan.base * patches;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < patches; ++i) {
        const std::size_t size = plan.base + (i < extra ? 1 : 0);
        plan.bounds.emplace_back(begin, begin + size);
        begin += size;
    }
    return plan;
}

namespace {

// Strict upper triangle of the block on `idx`, mirrored.
void read_symmetric_block(const DissimilaritySource& d, std::span<const std::size_t> idx, Matrix& out,
                          std::size_t offset) {
    const std::size_t m = idx.size();
    std::vector<double> buf(m);
    for (std::size_t a = 0; a + 1 < m; ++a) {
        const std::size_t row[1] = {idx[a]};
        const auto cols = idx.subspan(a + 1);
        d.fill_block(row, cols, buf.data());
        for (std::size_t b = 0; b < cols.size(); ++b) {
            out(offset + a, offset + a + 1 + b) = buf[b];
            out(offset + a + 1 + b, offset + a) = buf[b];
        }
    }
}

std::vector<std::size_t> range_indices(std::size_t begin, std::size_t end) {
    std::vector<std::size_t> v(end - begin);
    std::iota(v.begin(), v.end(), begin);
    return v;
}

}  // namespace

RowBlockIterator::RowBlockIterator(const DissimilaritySource& source, const PatchPlan& plan)
    : source_(source), plan_(plan) {
    if (!source.symmetric()) fail(ErrorKind::config, "patch processing needs a symmetric dissimilarity");
    if (source.size() != plan.n) fail(ErrorKind::shape, "patch plan does not match the source size");
}

Matrix RowBlockIterator::next() {
    if (done()) fail(ErrorKind::range, "no patches left");
    const auto [begin, end] = plan_.bounds[next_++];
    const auto idx = range_indices(begin, end);
    Matrix block(idx.size(), idx.size(), 0.0);
    read_symmetric_block(source_, idx, block, 0);
    return block;
}

ExtendedPatch build_extended_patch(const DissimilaritySource& d, const PatchPlan& plan, std::size_t i,
                                   std::span<const std::size_t> prev_loc,
                                   std::span<const double> prev_multiplicity, const Matrix* patch_block) {
    if (!d.symmetric()) fail(ErrorKind::config, "patch processing needs a symmetric dissimilarity");
    if (d.size() != plan.n) fail(ErrorKind::shape, "patch plan does not match the source size");
    if (i >= plan.patches) fail(ErrorKind::range, "patch index out of range");
    if (prev_loc.size() != prev_multiplicity.size()) fail(ErrorKind::shape, "one multiplicity per prototype expected");

    const auto [begin, end] = plan.bounds[i];
    const auto idx = range_indices(begin, end);
    const std::size_t k = prev_loc.size();
    const std::size_t p = idx.size();
    for (std::size_t l : prev_loc) {
        if (l >= begin && l < end) fail(ErrorKind::invariant, "carried prototype lies inside the new patch");
    }

    ExtendedPatch ext;
    ext.carried = k;
    ext.dissim = Matrix(k + p, k + p, 0.0);
    ext.origin.assign(prev_loc.begin(), prev_loc.end());
    ext.origin.insert(ext.origin.end(), idx.begin(), idx.end());
    ext.multiplicity.assign(prev_multiplicity.begin(), prev_multiplicity.end());
    ext.multiplicity.resize(k + p, 1.0);

    read_symmetric_block(d, prev_loc, ext.dissim, 0);
    if (k > 0 && p > 0) {
        std::vector<double> cross(k * p);
        d.fill_block(prev_loc, idx, cross.data());
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < p; ++b) {
                ext.dissim(a, k + b) = cross[a * p + b];
                ext.dissim(k + b, a) = cross[a * p + b];
            }
        }
    }
    if (patch_block) {
        if (patch_block->rows() != p || patch_block->cols() != p) fail(ErrorKind::shape, "patch block has wrong shape");
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) ext.dissim(k + a, k + b) = (*patch_block)(a, b);
        }
    } else {
        read_symmetric_block(d, idx, ext.dissim, k);
    }
    return ext;
}

const char* to_string(MultiplicityMode m) { return m == MultiplicityMode::point ? "point" : "literal"; }

WeightedNgResult weighted_median_ng(const ExtendedPatch& extended, std::size_t k,
                                    const AnnealingSchedule& schedule, std::uint64_t seed,
                                    const PatchOptions& options, const LabelSet* labels,
                                    std::optional<std::vector<std::size_t>> init) {
    const std::size_t n = extended.size();
    if (k == 0 || k > n) fail(ErrorKind::config, "need 1 <= K <= extended patch size");
    const DenseDissimilarity d(extended.dissim, true);
    const MedianContext ctx(d);

    MedianConfig config;
    config.k = k;
    config.schedule = schedule;
    config.supervision = options.supervision;
    config.seed = seed;
    config.ng_impl = options.ng_impl;
    config.ties = options.ties;
    config.init = std::move(init);
    const bool all_one = std::all_of(extended.multiplicity.begin(), extended.multiplicity.end(),
                                     [](double m) { return m == 1.0; });
    if (options.multiplicity == MultiplicityMode::point && !all_one) config.weights = extended.multiplicity;

    WeightedNgResult out;
    out.model = train_median(ctx, MedianAlgorithm::median_ng, config, labels);
    out.prototypes = out.model.prototypes;
    out.totals.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) out.totals[out.model.winner[i]] += extended.multiplicity[i];
    return out;
}

namespace {

// Labels for the rows of an extended patch: carried prototypes bring their
// label vectors, patch points their own coding.
LabelSet extended_labels(const LabelSet& global, const ExtendedPatch& ext, const MedianPrototypes& prev) {
    LabelSet ls;
    const std::size_t d = global.classes();
    ls.class_names = global.class_names;
    ls.coding = Matrix(ext.size(), d, 0.0);
    ls.mask.assign(ext.size(), 0);
    for (std::size_t r = 0; r < ext.size(); ++r) {
        if (r < ext.carried) {
            if (prev.labels.rows() == 0) continue;
            for (std::size_t c = 0; c < d; ++c) ls.coding(r, c) = prev.labels(r, c);
            ls.mask[r] = 1;
        } else {
            const std::size_t g = ext.origin[r];
            if (!global.present(g)) continue;
            for (std::size_t c = 0; c < d; ++c) ls.coding(r, c) = global.coding(g, c);
            ls.mask[r] = 1;
        }
    }
    return ls;
}

}  // namespace

PatchResult patch_median_ng(const DissimilaritySource& d, std::size_t k, std::size_t patches,
                            const AnnealingSchedule& schedule, std::uint64_t seed,
                            const PatchOptions& options, const LabelSet* labels) {
    const std::size_t n = d.size();
    if (!d.symmetric()) fail(ErrorKind::config, "patch processing needs a symmetric dissimilarity");
    const PatchPlan plan = make_patch_plan(n, patches);
    if (k == 0 || k > plan.base) {
        fail(ErrorKind::config, "K=" + std::to_string(k) + " exceeds the patch size " + std::to_string(plan.base));
    }
    if (options.supervision.enabled) {
        if (!labels) fail(ErrorKind::config, "supervised patch training needs labels");
        if (labels->mask.size() != n) fail(ErrorKind::shape, "labels must cover every point");
    }

    PatchResult result;
    MedianPrototypes local;
    RowBlockIterator blocks(d, plan);
    while (!blocks.done()) {
        const std::size_t i = blocks.index();
        const Matrix block = blocks.next();
        const ExtendedPatch ext =
            build_extended_patch(d, plan, i, result.prototypes.loc, result.multiplicity, &block);
        std::optional<LabelSet> ls;
        if (options.supervision.enabled) ls = extended_labels(*labels, ext, result.prototypes);

        std::optional<std::vector<std::size_t>> init;
        if (i > 0) {
            init.emplace(k);
            std::iota(init->begin(), init->end(), std::size_t{0});
        }
        const std::uint64_t patch_seed = i == 0 ? seed : Rng::derive(seed, i);
        WeightedNgResult r = weighted_median_ng(ext, k, schedule, patch_seed, options, ls ? &*ls : nullptr,
                                                std::move(init));

        MedianPrototypes global;
        global.loc.resize(k);
        for (std::size_t j = 0; j < k; ++j) global.loc[j] = ext.origin[r.prototypes.loc[j]];
        global.labels = r.prototypes.labels;
        result.prototypes = std::move(global);
        result.multiplicity = r.totals;

        PatchRecord rec;
        rec.begin = plan.bounds[i].first;
        rec.end = plan.bounds[i].second;
        rec.epochs_run = r.model.epochs_run;
        double cost = 0.0;
        for (std::size_t q = 0; q < ext.size(); ++q) {
            cost += ext.multiplicity[q] * ext.dissim(q, r.prototypes.loc[r.model.winner[q]]);
        }
        rec.final_cost = 0.5 * cost;
        rec.mass = std::accumulate(r.totals.begin(), r.totals.end(), 0.0);
        result.history.push_back(rec);
    }
    return result;
}

}  // namespace mediatop
