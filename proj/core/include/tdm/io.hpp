#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tdm/dimension.hpp"
#include "tdm/tensor.hpp"

namespace tdm {

/// RFC-4180 style reader: quoted fields, "" escapes, quoted fields may span
/// lines; delimiter configurable.
class CsvReader {
public:
    CsvReader(std::istream& in, char delimiter = ',');

    /// Read one record; false at end of input. Short rows are not padded.
    bool next(std::vector<std::string>& row);

private:
    std::istream& in_;
    char delimiter_;
};

/// Quote a cell if it contains the delimiter, a quote or a newline.
std::string csv_escape(const std::string& cell, char delimiter = ',');

// --- COO tensor text format --------------------------------------------
//
//   # tensor <name> order <N> dims <name1:size1> <name2:size2> ...
//   i1<TAB>i2<TAB>...<TAB>value
//
// Entries are written in lexicographic coordinate order, so output is
// byte-stable for equal tensors.

void write_tensor_coo(std::ostream& out, const TypedTensor& t);
std::string to_coo_string(const TypedTensor& t);

/// Read the format back. When dims are given they override the header's
/// anonymous 1..size integer dimensions (sizes must agree). Without an
/// explicit value type, integer-looking values make an integer tensor,
/// anything else a real one; the default value is zero.
TypedTensor read_tensor_coo(std::istream& in,
                            std::optional<std::vector<Dimension>> dims = std::nullopt,
                            std::optional<ValueType> value_type = std::nullopt);

// --- Dimension CSV -------------------------------------------------------
//
//   key,index
//   u1,1
//   \N,4

void write_dimension_csv(std::ostream& out, const Dimension& dim);

/// Key type inference when not given: integer if every key parses as an
/// integer, else timestamp if every key parses as a date, else real, else
/// string. Inferred timestamp dimensions get granularity 1 (exact compare)
/// unless one is supplied.
Dimension read_dimension_csv(std::istream& in, std::string name,
                             std::optional<KeyType> key_type = std::nullopt,
                             std::optional<std::int64_t> granularity = std::nullopt);

// --- Factor matrices ------------------------------------------------------

/// "key,f1,...,fR" with rows labeled through the dimension.
void write_factor_csv(std::ostream& out, const DenseMatrix& factor, const Dimension& labels);

/// One-column "weight" CSV.
void write_weights_csv(std::ostream& out, const std::vector<double>& weights);

// --- Atomic multi-file output ---------------------------------------------

/// Buffers whole files in memory; commit() writes each through a temp file
/// and renames it into place. Without commit nothing touches the directory,
/// so a failed command leaves no partial outputs.
class AtomicWriter {
public:
    explicit AtomicWriter(std::filesystem::path dir);
    ~AtomicWriter();

    AtomicWriter(const AtomicWriter&) = delete;
    AtomicWriter& operator=(const AtomicWriter&) = delete;

    void add(std::string filename, std::string content);
    void commit();

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace tdm
