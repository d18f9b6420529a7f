#ifndef MEDIATOP_IO_HPP
#define MEDIATOP_IO_HPP

#include <string>

#include "mediatop/dataset.hpp"
#include "mediatop/dissimilarity.hpp"

namespace mediatop {

/// Delimited text, one point per row. Fields may be separated by commas or
/// whitespace. With label_column the last field is a class name; an empty
/// field or "?" marks an unlabeled point.
VectorDataset read_vectors(const std::string& path, bool label_column);

/// One sequence per line, whitespace separated entries.
SequenceDataset read_sequences(const std::string& path);

/// One class name per line, matched to points by position.
LabelSet read_label_file(const std::string& path, std::size_t expected);

/// Text ("N" then N rows) or binary (magic "DSM1", u64 LE N, N*N f64 LE).
/// The format is detected from the first four bytes.
DenseDissimilarity read_dissimilarity(const std::string& path, bool symmetric);

void write_dissimilarity_binary(const DissimilaritySource& d, const std::string& path);
void write_dissimilarity_text(const DissimilaritySource& d, const std::string& path);

bool is_binary_dissimilarity(const std::string& path);

}  // namespace mediatop

#endif  // MEDIATOP_IO_HPP
