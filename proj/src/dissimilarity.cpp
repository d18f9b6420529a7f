#include "mediatop/dissimilarity.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstring>

#include "mediatop/error.hpp"
#include "mediatop/metrics.hpp"
#include "mediatop/random.hpp"

namespace mediatop {

void DissimilaritySource::fill_block(std::span<const std::size_t> rows,
                                     std::span<const std::size_t> cols, double* out) const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out[r * cols.size() + c] = (*this)(rows[r], cols[c]);
        }
    }
}

DenseDissimilarity::DenseDissimilarity(Matrix values, bool symmetric)
    : values_(std::move(values)), symmetric_(symmetric) {
    if (values_.rows() != values_.cols()) fail(ErrorKind::shape, "dissimilarity matrix must be square");
}

DenseDissimilarity DenseDissimilarity::restrict_to(std::span<const std::size_t> idx) const {
    Matrix sub(idx.size(), idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const double* src = row(idx[r]);
        double* dst = sub.row(r).data();
        for (std::size_t c = 0; c < idx.size(); ++c) dst[c] = src[idx[c]];
    }
    return DenseDissimilarity(std::move(sub), symmetric_);
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::squared_euclidean: return "sqeuclidean";
        case Metric::cosine: return "cosine";
        case Metric::edit: return "edit";
    }
    return "?";
}

Metric metric_from_string(const std::string& name) {
    if (name == "sqeuclidean" || name == "squared-euclidean") return Metric::squared_euclidean;
    if (name == "cosine") return Metric::cosine;
    if (name == "edit") return Metric::edit;
    fail(ErrorKind::config, "unknown metric '" + name + "'");
}

MetricDissimilarity::MetricDissimilarity(std::shared_ptr<const VectorDataset> data, Metric metric)
    : vectors_(std::move(data)), metric_(metric) {
    if (metric == Metric::edit) fail(ErrorKind::config, "edit distance needs sequence data");
}

MetricDissimilarity::MetricDissimilarity(std::shared_ptr<const SequenceDataset> data,
                                         double indel_cost)
    : sequences_(std::move(data)), metric_(Metric::edit), indel_cost_(indel_cost) {
    if (!(indel_cost > 0.0)) fail(ErrorKind::domain, "indel cost must be positive");
}

std::size_t MetricDissimilarity::size() const {
    return vectors_ ? vectors_->size() : sequences_->size();
}

double MetricDissimilarity::operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (sequences_) {
        return weighted_edit_distance(sequences_->sequences[i], sequences_->sequences[j], indel_cost_);
    }
    const auto x = vectors_->points.row(i);
    const auto y = vectors_->points.row(j);
    return metric_ == Metric::cosine ? cosine_dissimilarity(x, y) : squared_euclidean(x, y);
}

namespace {

constexpr char kMagic[4] = {'D', 'S', 'M', '1'};
constexpr std::size_t kHeaderBytes = 12;

bool pread_all(int fd, void* buf, std::size_t bytes, std::size_t offset) {
    auto* p = static_cast<char*>(buf);
    while (bytes > 0) {
        const ssize_t got = ::pread(fd, p, bytes, static_cast<off_t>(offset));
        if (got <= 0) return false;
        p += got;
        bytes -= static_cast<std::size_t>(got);
        offset += static_cast<std::size_t>(got);
    }
    return true;
}

double decode_le_double(const unsigned char* b) {
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = (bits << 8) | b[k];
    return std::bit_cast<double>(bits);
}

}  // namespace

BinaryFileDissimilarity::BinaryFileDissimilarity(const std::string& path, bool symmetric)
    : symmetric_(symmetric) {
    fd_ = ::open(path.c_str(), O_RDONLY);
    if (fd_ < 0) fail(ErrorKind::io, "cannot open '" + path + "'");
    unsigned char header[kHeaderBytes];
    if (!pread_all(fd_, header, kHeaderBytes, 0) || std::memcmp(header, kMagic, 4) != 0) {
        ::close(fd_);
        fail(ErrorKind::data, "'" + path + "' is not a DSM1 file");
    }
    std::uint64_t n = 0;
    for (int k = 7; k >= 0; --k) n = (n << 8) | header[4 + k];
    n_ = static_cast<std::size_t>(n);
    const off_t expected = static_cast<off_t>(kHeaderBytes + n_ * n_ * 8);
    if (::lseek(fd_, 0, SEEK_END) < expected) {
        ::close(fd_);
        fail(ErrorKind::data, "'" + path + "' is truncated");
    }
}

BinaryFileDissimilarity::~BinaryFileDissimilarity() {
    if (fd_ >= 0) ::close(fd_);
}

double BinaryFileDissimilarity::operator()(std::size_t i, std::size_t j) const {
    unsigned char b[8];
    if (!pread_all(fd_, b, 8, kHeaderBytes + (i * n_ + j) * 8)) fail(ErrorKind::io, "short read in DSM1 file");
    return decode_le_double(b);
}

void BinaryFileDissimilarity::fill_block(std::span<const std::size_t> rows,
                                         std::span<const std::size_t> cols, double* out) const {
    if (cols.empty()) return;
    // Read the span of each row covering the requested columns in one call.
    std::size_t lo = cols[0], hi = cols[0];
    for (std::size_t c : cols) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    std::vector<unsigned char> buf((hi - lo + 1) * 8);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!pread_all(fd_, buf.data(), buf.size(), kHeaderBytes + (rows[r] * n_ + lo) * 8)) {
            fail(ErrorKind::io, "short read in DSM1 file");
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out[r * cols.size() + c] = decode_le_double(buf.data() + (cols[c] - lo) * 8);
        }
    }
}

CountingDissimilarity::CountingDissimilarity(const DissimilaritySource& inner, bool track_entries)
    : inner_(inner), track_(track_entries) {
    if (track_) {
        const std::size_t n = inner_.size();
        per_entry_ = std::make_unique<std::atomic<std::uint32_t>[]>(n * n);
        for (std::size_t k = 0; k < n * n; ++k) per_entry_[k].store(0);
    }
}

void CountingDissimilarity::record(std::size_t i, std::size_t j) const {
    accesses_.fetch_add(1, std::memory_order_relaxed);
    if (track_) per_entry_[i * inner_.size() + j].fetch_add(1, std::memory_order_relaxed);
}

double CountingDissimilarity::operator()(std::size_t i, std::size_t j) const {
    record(i, j);
    return inner_(i, j);
}

void CountingDissimilarity::fill_block(std::span<const std::size_t> rows,
                                       std::span<const std::size_t> cols, double* out) const {
    for (std::size_t r : rows) {
        for (std::size_t c : cols) record(r, c);
    }
    inner_.fill_block(rows, cols, out);
}

std::uint32_t CountingDissimilarity::reads(std::size_t i, std::size_t j) const {
    if (!track_) fail(ErrorKind::config, "per-entry tracking is disabled");
    return per_entry_[i * inner_.size() + j].load();
}

DenseDissimilarity materialize(const DissimilaritySource& source) {
    if (const auto* dense = dynamic_cast<const DenseDissimilarity*>(&source)) return *dense;
    const std::size_t n = source.size();
    Matrix values(n, n);
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    source.fill_block(all, all, values.data());
    return DenseDissimilarity(std::move(values), source.symmetric());
}

namespace {

template <class Fn>
DenseDissimilarity fill_symmetric(std::size_t n, Fn&& fn) {
    Matrix values(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = fn(i, j);
            values(i, j) = v;
            values(j, i) = v;
        }
    }
    return DenseDissimilarity(std::move(values), true);
}

}  // namespace

DenseDissimilarity materialize_dissimilarity(const VectorDataset& data, Metric metric) {
    if (metric == Metric::edit) fail(ErrorKind::config, "edit distance needs sequence data");
    return fill_symmetric(data.size(), [&](std::size_t i, std::size_t j) {
        const auto x = data.points.row(i);
        const auto y = data.points.row(j);
        return metric == Metric::cosine ? cosine_dissimilarity(x, y) : squared_euclidean(x, y);
    });
}

DenseDissimilarity materialize_dissimilarity(const SequenceDataset& data, double indel_cost) {
    return fill_symmetric(data.size(), [&](std::size_t i, std::size_t j) {
        return weighted_edit_distance(data.sequences[i], data.sequences[j], indel_cost);
    });
}

void validate_dissimilarity(const DissimilaritySource& source, std::size_t sample_pairs,
                            std::uint64_t seed) {
    const std::size_t n = source.size();
    if (n == 0) fail(ErrorKind::data, "dissimilarity source is empty");
    auto check = [&](std::size_t i, std::size_t j) {
        const double v = source(i, j);
        if (!std::isfinite(v) || v < 0.0) {
            fail(ErrorKind::data, "d(" + std::to_string(i) + "," + std::to_string(j) +
                                      ") is negative or not finite");
        }
        if (i == j && v != 0.0) fail(ErrorKind::data, "nonzero diagonal at " + std::to_string(i));
        if (source.symmetric() && i != j && source(j, i) != v) {
            fail(ErrorKind::data, "declared symmetric but d(" + std::to_string(i) + "," +
                                      std::to_string(j) + ") != d(" + std::to_string(j) + "," +
                                      std::to_string(i) + ")");
        }
    };
    if (n <= 200) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) check(i, j);
        }
        return;
    }
    for (std::size_t i = 0; i < n; ++i) check(i, i);
    Rng rng(seed);
    for (std::size_t s = 0; s < sample_pairs; ++s) {
        check(static_cast<std::size_t>(rng.below(n)), static_cast<std::size_t>(rng.below(n)));
    }
}

}  // namespace mediatop
