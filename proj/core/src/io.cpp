#include "tdm/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "tdm/error.hpp"
#include "tdm/time.hpp"

namespace tdm {

CsvReader::CsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

bool CsvReader::next(std::vector<std::string>& row) {
    row.clear();
    if (in_.peek() == std::char_traits<char>::eof()) return false;

    std::string cell;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
        any = true;
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    cell.push_back('"');
                    in_.get();
                } else {
                    in_quotes = false;
                }
            } else {
                cell.push_back(ch);
            }
        } else if (ch == '"' && cell.empty()) {
            in_quotes = true;
        } else if (ch == delimiter_) {
            row.push_back(std::move(cell));
            cell.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch == '\r') {
            if (in_.peek() == '\n') in_.get();
            break;
        } else {
            cell.push_back(ch);
        }
    }
    if (!any) return false;
    row.push_back(std::move(cell));
    return true;
}

std::string csv_escape(const std::string& cell, char delimiter) {
    bool needs_quotes = false;
    for (char ch : cell) {
        if (ch == delimiter || ch == '"' || ch == '\n' || ch == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return cell;
    std::string out = "\"";
    for (char ch : cell) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

void write_tensor_coo(std::ostream& out, const TypedTensor& t) {
    out << "# tensor " << t.name() << " order " << t.order() << " dims";
    for (const auto& d : t.dims()) out << ' ' << d.name() << ':' << d.size();
    out << '\n';
    for (const auto& [coords, v] : t.sorted_entries()) {
        for (std::size_t n = 0; n < coords.size(); ++n) {
            if (n) out << '\t';
            out << coords[n];
        }
        if (!coords.empty()) out << '\t';
        out << format_value(v) << '\n';
    }
}

std::string to_coo_string(const TypedTensor& t) {
    std::ostringstream os;
    write_tensor_coo(os, t);
    return os.str();
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(std::move(tok));
    return out;
}

bool looks_integer(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}

}  // namespace

TypedTensor read_tensor_coo(std::istream& in, std::optional<std::vector<Dimension>> dims,
                            std::optional<ValueType> value_type) {
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty COO input");
    auto tokens = split_ws(header);
    // # tensor <name> order <N> dims <name:size> ...
    if (tokens.size() < 5 || tokens[0] != "#" || tokens[1] != "tensor" || tokens[3] != "order") {
        throw IoError("malformed COO header: " + header);
    }
    const std::string name = tokens[2];
    const std::size_t order = std::stoul(tokens[4]);
    if (tokens.size() < 6 || tokens[5] != "dims" || tokens.size() != 6 + order) {
        throw IoError("malformed COO header dims: " + header);
    }

    std::vector<std::string> dim_names(order);
    std::vector<std::size_t> dim_sizes(order);
    for (std::size_t n = 0; n < order; ++n) {
        const std::string& tok = tokens[6 + n];
        const auto colon = tok.rfind(':');
        if (colon == std::string::npos) throw IoError("malformed dim token: " + tok);
        dim_names[n] = tok.substr(0, colon);
        dim_sizes[n] = std::stoul(tok.substr(colon + 1));
    }
    if (dims) {
        if (dims->size() != order) throw IoError("dimension count does not match COO header");
        for (std::size_t n = 0; n < order; ++n) {
            if ((*dims)[n].size() != dim_sizes[n]) {
                throw IoError("dimension '" + (*dims)[n].name() + "' size " +
                              std::to_string((*dims)[n].size()) + " does not match header size " +
                              std::to_string(dim_sizes[n]));
            }
        }
    } else {
        dims.emplace();
        for (std::size_t n = 0; n < order; ++n) {
            std::vector<Key> keys;
            keys.reserve(dim_sizes[n]);
            for (std::size_t i = 1; i <= dim_sizes[n]; ++i) {
                keys.emplace_back(static_cast<std::int64_t>(i));
            }
            dims->emplace_back(dim_names[n], KeyType::Integer, std::move(keys));
        }
    }

    struct RawEntry {
        Coords coords;
        std::string value;
    };
    std::vector<RawEntry> raw;
    bool all_integer = true;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_ws(line);
        if (cells.size() != order + 1) {
            throw IoError("COO entry has " + std::to_string(cells.size()) + " fields, expected " +
                          std::to_string(order + 1));
        }
        RawEntry e;
        e.coords.resize(order);
        for (std::size_t n = 0; n < order; ++n) {
            e.coords[n] = static_cast<Index>(std::stoul(cells[n]));
        }
        e.value = cells[order];
        if (!looks_integer(e.value)) all_integer = false;
        raw.push_back(std::move(e));
    }

    const ValueType vt = value_type.value_or(all_integer ? ValueType::Integer : ValueType::Real);
    const Value def = vt == ValueType::Integer  ? Value(std::int64_t{0})
                      : vt == ValueType::Boolean ? Value(false)
                                                  : Value(0.0);
    TensorBuilder out(name, *dims, vt, def);
    for (const auto& e : raw) out.set_at(e.coords, parse_value(e.value, vt));
    return std::move(out).build();
}

void write_dimension_csv(std::ostream& out, const Dimension& dim) {
    out << "key,index\n";
    for (std::size_t i = 1; i <= dim.size(); ++i) {
        out << csv_escape(csv_key(dim.key_of(i), dim.key_type())) << ',' << i << '\n';
    }
}

Dimension read_dimension_csv(std::istream& in, std::string name,
                             std::optional<KeyType> key_type,
                             std::optional<std::int64_t> granularity) {
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row) || row.size() < 2 || row[0] != "key" || row[1] != "index") {
        throw IoError("dimension CSV must start with the header 'key,index'");
    }
    std::vector<std::pair<std::size_t, std::string>> cells;
    while (reader.next(row)) {
        if (row.size() != 2) throw IoError("dimension CSV rows need exactly two columns");
        cells.emplace_back(std::stoul(row[1]), row[0]);
    }
    std::sort(cells.begin(), cells.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].first != i + 1) {
            throw IoError("dimension CSV indices must cover 1..n without gaps");
        }
    }

    KeyType type;
    if (key_type) {
        type = *key_type;
    } else {
        bool all_int = true, all_date = true, all_real = true;
        for (const auto& [idx, text] : cells) {
            if (text == "\\N") continue;
            if (!looks_integer(text)) all_int = false;
            if (!parse_timestamp(text) || looks_integer(text)) all_date = false;
            try {
                (void)parse_key(text, KeyType::Real);
            } catch (const TypeMismatchError&) {
                all_real = false;
            }
        }
        type = all_int    ? KeyType::Integer
               : all_date ? KeyType::Timestamp
               : all_real ? KeyType::Real
                          : KeyType::String;
    }

    // Granularity 1 keeps inferred timestamp comparisons exact.
    const std::int64_t gran = granularity.value_or(type == KeyType::Timestamp ? 1 : 3600);
    std::vector<Key> keys;
    keys.reserve(cells.size());
    for (const auto& [idx, text] : cells) keys.push_back(parse_key(text, type));
    return Dimension(std::move(name), type, std::move(keys), gran);
}

void write_factor_csv(std::ostream& out, const DenseMatrix& factor, const Dimension& labels) {
    if (static_cast<std::size_t>(factor.rows()) != labels.size()) {
        throw ShapeMismatchError("factor rows do not match the labeling dimension");
    }
    out << "key";
    for (Eigen::Index c = 0; c < factor.cols(); ++c) out << ",f" << (c + 1);
    out << '\n';
    for (Eigen::Index r = 0; r < factor.rows(); ++r) {
        out << csv_escape(csv_key(labels.key_of(static_cast<std::size_t>(r + 1)),
                                  labels.key_type()));
        for (Eigen::Index c = 0; c < factor.cols(); ++c) out << ',' << format_real(factor(r, c));
        out << '\n';
    }
}

void write_weights_csv(std::ostream& out, const std::vector<double>& weights) {
    out << "weight\n";
    for (double w : weights) out << format_real(w) << '\n';
}

AtomicWriter::AtomicWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

AtomicWriter::~AtomicWriter() = default;

void AtomicWriter::add(std::string filename, std::string content) {
    files_.emplace_back(std::move(filename), std::move(content));
}

void AtomicWriter::commit() {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec && !std::filesystem::is_directory(dir_)) {
        throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
    std::vector<std::filesystem::path> temps;
    try {
        for (const auto& [name, content] : files_) {
            const auto tmp = dir_ / (name + ".tmp");
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write " + tmp.string());
            out << content;
            out.close();
            if (!out) throw IoError("write failed for " + tmp.string());
            temps.push_back(tmp);
        }
        for (std::size_t i = 0; i < files_.size(); ++i) {
            std::filesystem::rename(temps[i], dir_ / files_[i].first);
        }
    } catch (...) {
        for (const auto& tmp : temps) {
            std::error_code ignore;
            std::filesystem::remove(tmp, ignore);
        }
        throw;
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace tdm
