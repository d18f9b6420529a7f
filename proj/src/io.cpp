#include "mediatop/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mediatop/error.hpp"

namespace mediatop {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool comma_mode = line.find(',') != std::string::npos;
    auto flush = [&](bool keep_empty) {
        // trim
        const auto b = cur.find_first_not_of(" \t\r");
        const auto e = cur.find_last_not_of(" \t\r");
        std::string field = b == std::string::npos ? std::string() : cur.substr(b, e - b + 1);
        if (keep_empty || !field.empty()) out.push_back(std::move(field));
        cur.clear();
    };
    for (char ch : line) {
        if (comma_mode ? ch == ',' : (ch == ' ' || ch == '\t')) {
            flush(comma_mode);
        } else {
            cur.push_back(ch);
        }
    }
    flush(comma_mode);
    return out;
}

double parse_double(const std::string& field, const std::string& path, std::size_t line_no) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        fail(ErrorKind::data, path + ":" + std::to_string(line_no) + ": cannot parse '" + field + "'");
    }
    return v;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
    return in;
}

LabelSet labels_from_names(const std::vector<std::string>& names) {
    // Class indices follow first appearance.
    std::map<std::string, int> index;
    std::vector<std::string> order;
    std::vector<int> classes(names.size(), -1);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto& n = names[i];
        if (n.empty() || n == "?") continue;
        auto [it, inserted] = index.emplace(n, static_cast<int>(order.size()));
        if (inserted) order.push_back(n);
        classes[i] = it->second;
    }
    return LabelSet::from_classes(classes, order);
}

}  // namespace

VectorDataset read_vectors(const std::string& path, bool label_column) {
    auto in = open_input(path);
    std::vector<double> values;
    std::vector<std::string> names;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line) || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (label_column) {
            if (fields.size() < 2) fail(ErrorKind::data, path + ":" + std::to_string(line_no) + ": missing label column");
            names.push_back(fields.back());
            fields.pop_back();
        }
        if (rows == 0) cols = fields.size();
        if (fields.size() != cols || cols == 0) {
            fail(ErrorKind::data, path + ":" + std::to_string(line_no) + ": expected " +
                                      std::to_string(cols) + " features");
        }
        for (const auto& f : fields) values.push_back(parse_double(f, path, line_no));
        ++rows;
    }
    if (rows == 0) fail(ErrorKind::data, "'" + path + "' contains no points");
    VectorDataset out;
    out.points = Matrix(rows, cols, std::move(values));
    if (label_column) out.labels = labels_from_names(names);
    out.validate();
    return out;
}

SequenceDataset read_sequences(const std::string& path) {
    auto in = open_input(path);
    SequenceDataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line) || line[0] == '#') continue;
        std::istringstream ss(line);
        std::vector<double> seq;
        std::string tok;
        while (ss >> tok) seq.push_back(parse_double(tok, path, line_no));
        out.sequences.push_back(std::move(seq));
    }
    out.validate();
    return out;
}

LabelSet read_label_file(const std::string& path, std::size_t expected) {
    auto in = open_input(path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        const auto e = line.find_last_not_of(" \t\r");
        if (b == std::string::npos) continue;
        names.push_back(line.substr(b, e - b + 1));
    }
    if (names.size() != expected) {
        fail(ErrorKind::data, "'" + path + "' has " + std::to_string(names.size()) +
                                  " labels, expected " + std::to_string(expected));
    }
    return labels_from_names(names);
}

bool is_binary_dissimilarity(const std::string& path) {
    auto in = open_input(path);
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && std::memcmp(magic, "DSM1", 4) == 0;
}

DenseDissimilarity read_dissimilarity(const std::string& path, bool symmetric) {
    if (is_binary_dissimilarity(path)) {
        BinaryFileDissimilarity file(path, symmetric);
        return materialize(file);
    }
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const double v = parse_double(split_fields(line).at(0), path, line_no);
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            fail(ErrorKind::data, path + ": header must be a positive count");
        }
        n = static_cast<std::size_t>(v);
        break;
    }
    if (n == 0) fail(ErrorKind::data, "'" + path + "' has no header");
    Matrix values(n, n);
    std::size_t r = 0;
    while (r < n && std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const auto fields = split_fields(line);
        if (fields.size() != n) {
            fail(ErrorKind::data, path + ":" + std::to_string(line_no) + ": expected " + std::to_string(n) + " values");
        }
        for (std::size_t c = 0; c < n; ++c) values(r, c) = parse_double(fields[c], path, line_no);
        ++r;
    }
    if (r != n) fail(ErrorKind::data, "'" + path + "' has fewer than " + std::to_string(n) + " rows");
    return DenseDissimilarity(std::move(values), symmetric);
}

void write_dissimilarity_binary(const DissimilaritySource& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
    const std::uint64_t n = d.size();
    auto put_u64 = [&](std::uint64_t v) {
        unsigned char b[8];
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
        out.write(reinterpret_cast<const char*>(b), 8);
    };
    out.write("DSM1", 4);
    put_u64(n);
    std::vector<std::size_t> row(1), cols(n);
    for (std::size_t c = 0; c < n; ++c) cols[c] = c;
    std::vector<double> buf(n);
    for (std::size_t i = 0; i < n; ++i) {
        row[0] = i;
        d.fill_block(row, cols, buf.data());
        for (double v : buf) put_u64(std::bit_cast<std::uint64_t>(v));
    }
    if (!out) fail(ErrorKind::io, "write to '" + path + "' failed");
}

void write_dissimilarity_text(const DissimilaritySource& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
    const std::size_t n = d.size();
    out << n << '\n';
    char buf[64];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // shortest round-trip representation
            auto res = std::to_chars(buf, buf + sizeof buf, d(i, j));
            if (j) out << ' ';
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
    if (!out) fail(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace mediatop
