#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tdm/error.hpp"
#include "tdm/io.hpp"
#include "tdm/polystore.hpp"
#include "tdm/value.hpp"

namespace tdm {

namespace {

std::optional<double> try_number(const std::string& s) {
    double out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return out;
}

bool filter_passes(const std::string& cell, const RowFilter& f) {
    int cmp;
    const auto lhs = try_number(cell);
    const auto rhs = try_number(f.literal);
    if (lhs && rhs) {
        cmp = (*lhs < *rhs) ? -1 : (*lhs > *rhs) ? 1 : 0;
    } else {
        cmp = cell.compare(f.literal);
        cmp = (cmp < 0) ? -1 : (cmp > 0) ? 1 : 0;
    }
    switch (f.op) {
        case CmpOp::Eq: return cmp == 0;
        case CmpOp::Ne: return cmp != 0;
        case CmpOp::Lt: return cmp < 0;
        case CmpOp::Le: return cmp <= 0;
        case CmpOp::Gt: return cmp > 0;
        case CmpOp::Ge: return cmp >= 0;
    }
    return false;
}

struct TupleHash {
    std::size_t operator()(const std::vector<std::string>& v) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (const auto& s : v) {
            for (char c : s) {
                h ^= static_cast<unsigned char>(c);
                h *= 0x100000001b3ULL;
            }
            h ^= 0xff;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

}  // namespace

void Adapter::run(const TableQuery& query, std::size_t arity,
                  const std::function<void(const std::vector<std::string>&)>& sink) const {
    const std::size_t expected =
        query.aggregate.op == Aggregate::Op::None ? query.select.size() : query.select.size() + 1;
    if (expected != arity) {
        throw ArityMismatchError("adapter '" + id() + "' produces " + std::to_string(expected) +
                                 " cells per row, binding expects " + std::to_string(arity));
    }

    // Scan projects select columns first, then filter and aggregate inputs.
    std::vector<std::string> columns = query.select;
    for (const auto& f : query.where) columns.push_back(f.column);
    const bool needs_agg_col = query.aggregate.op == Aggregate::Op::Sum ||
                               query.aggregate.op == Aggregate::Op::Last;
    if (needs_agg_col) {
        if (query.aggregate.column.empty()) {
            throw ConfigInvalidError("sum/last aggregation needs a source column");
        }
        columns.push_back(query.aggregate.column);
    }
    const std::size_t n_select = query.select.size();
    const std::size_t n_where = query.where.size();

    if (query.aggregate.op == Aggregate::Op::None) {
        scan(columns, [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < n_where; ++i) {
                if (!filter_passes(cells[n_select + i], query.where[i])) return;
            }
            sink(std::vector<std::string>(cells.begin(), cells.begin() + n_select));
        });
        return;
    }

    struct Group {
        std::size_t order;
        std::int64_t count = 0;
        double sum = 0.0;
        bool sum_integral = true;
        std::int64_t isum = 0;
        std::string last;
    };
    std::unordered_map<std::vector<std::string>, Group, TupleHash> groups;
    std::size_t order_counter = 0;

    scan(columns, [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < n_where; ++i) {
            if (!filter_passes(cells[n_select + i], query.where[i])) return;
        }
        std::vector<std::string> key(cells.begin(), cells.begin() + n_select);
        auto [it, inserted] = groups.try_emplace(std::move(key));
        if (inserted) it->second.order = order_counter++;
        Group& g = it->second;
        g.count += 1;
        if (needs_agg_col) {
            const std::string& cell = cells[n_select + n_where];
            if (query.aggregate.op == Aggregate::Op::Sum) {
                const auto num = try_number(cell);
                if (!num) {
                    throw AdapterFailureError("adapter '" + id() + "': cannot sum cell '" + cell +
                                              "'");
                }
                g.sum += *num;
                std::int64_t iv = 0;
                auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), iv);
                if (ec != std::errc() || p != cell.data() + cell.size()) g.sum_integral = false;
                g.isum += iv;
            } else {
                g.last = cell;
            }
        }
    });

    // Emit groups in first-seen order.
    std::vector<const std::pair<const std::vector<std::string>, Group>*> ordered(groups.size());
    for (const auto& kv : groups) ordered[kv.second.order] = &kv;
    std::vector<std::string> row;
    for (const auto* kv : ordered) {
        row = kv->first;
        switch (query.aggregate.op) {
            case Aggregate::Op::Count:
                row.push_back(std::to_string(kv->second.count));
                break;
            case Aggregate::Op::Sum:
                row.push_back(kv->second.sum_integral ? std::to_string(kv->second.isum)
                                                      : format_real(kv->second.sum));
                break;
            case Aggregate::Op::Last:
                row.push_back(kv->second.last);
                break;
            case Aggregate::Op::None:
                break;
        }
        sink(row);
    }
}

// --- CSV --------------------------------------------------------------

CsvAdapter::CsvAdapter(std::string id, CsvConfig config)
    : Adapter(std::move(id)), config_(std::move(config)) {}

void CsvAdapter::scan(const std::vector<std::string>& columns,
                      const std::function<void(const std::vector<std::string>&)>& yield) const {
    std::ifstream in(config_.path, std::ios::binary);
    if (!in) {
        throw AdapterFailureError("adapter '" + id() + "': cannot open " + config_.path);
    }
    CsvReader reader(in, config_.delimiter);
    std::vector<std::string> row;

    std::unordered_map<std::string, std::size_t> header_index;
    if (config_.header) {
        if (!reader.next(row)) return;
        for (std::size_t i = 0; i < row.size(); ++i) header_index.emplace(row[i], i);
    }

    auto column_slot = [&](const std::string& name) -> std::size_t {
        if (!name.empty() && name[0] == '#') {
            return static_cast<std::size_t>(std::stoul(name.substr(1)));
        }
        auto it = header_index.find(name);
        if (it == header_index.end()) {
            throw AdapterFailureError("adapter '" + id() + "': no column '" + name + "' in " +
                                      config_.path);
        }
        return it->second;
    };
    std::vector<std::size_t> slots;
    slots.reserve(columns.size());
    for (const auto& c : columns) slots.push_back(column_slot(c));

    std::vector<std::string> cells(columns.size());
    while (reader.next(row)) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            cells[i] = slots[i] < row.size() ? row[slots[i]] : std::string();
        }
        yield(cells);
    }
}

// --- JSON lines ---------------------------------------------------------

JsonLinesAdapter::JsonLinesAdapter(std::string id, std::string path)
    : Adapter(std::move(id)), path_(std::move(path)) {}

namespace {

std::string json_cell(const nlohmann::json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_float()) return format_real(v.get<double>());
    return v.dump();
}

const nlohmann::json* walk_path(const nlohmann::json& obj, const std::string& path) {
    const nlohmann::json* cur = &obj;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto dot = path.find('.', start);
        const std::string part =
            path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!cur->is_object()) return nullptr;
        auto it = cur->find(part);
        if (it == cur->end()) return nullptr;
        cur = &*it;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return cur;
}

}  // namespace

void JsonLinesAdapter::scan(const std::vector<std::string>& columns,
                            const std::function<void(const std::vector<std::string>&)>& yield) const {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw AdapterFailureError("adapter '" + id() + "': cannot open " + path_);

    // One path may end in "[]": it explodes an array into one row per
    // element. An empty/missing array still yields one row with an empty
    // cell so null-key policies see the record.
    std::ptrdiff_t explode_slot = -1;
    const std::vector<std::string>& paths = columns;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (!paths[i].ends_with("[]")) continue;
        if (explode_slot >= 0 && paths[static_cast<std::size_t>(explode_slot)] != paths[i]) {
            throw ConfigInvalidError("adapter '" + id() +
                                     "': at most one exploding [] path per query");
        }
        if (explode_slot < 0) explode_slot = static_cast<std::ptrdiff_t>(i);
    }

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> cells(columns.size());
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw AdapterFailureError("adapter '" + id() + "': " + path_ + ":" +
                                      std::to_string(line_no) + ": " + e.what());
        }

        std::vector<const nlohmann::json*> resolved(columns.size(), nullptr);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            std::string p = paths[i];
            if (p.ends_with("[]")) p = p.substr(0, p.size() - 2);
            resolved[i] = walk_path(obj, p);
        }

        if (explode_slot < 0) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                cells[i] = resolved[i] ? json_cell(*resolved[i]) : "";
            }
            yield(cells);
            continue;
        }

        const nlohmann::json* arr = resolved[static_cast<std::size_t>(explode_slot)];
        std::vector<std::string> elements;
        if (arr && arr->is_array()) {
            for (const auto& e : *arr) elements.push_back(json_cell(e));
        } else if (arr && !arr->is_null()) {
            elements.push_back(json_cell(*arr));
        }
        if (elements.empty()) elements.emplace_back();
        for (const auto& element : elements) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (static_cast<std::ptrdiff_t>(i) == explode_slot ||
                    paths[i] == paths[static_cast<std::size_t>(explode_slot)]) {
                    cells[i] = element;
                } else {
                    cells[i] = resolved[i] ? json_cell(*resolved[i]) : "";
                }
            }
            yield(cells);
        }
    }
}

// --- In-memory table ------------------------------------------------------

MemTableAdapter::MemTableAdapter(std::string id, MemTable table)
    : Adapter(std::move(id)), table_(std::move(table)) {}

void MemTableAdapter::scan(const std::vector<std::string>& columns,
                           const std::function<void(const std::vector<std::string>&)>& yield) const {
    std::vector<std::size_t> slots;
    slots.reserve(columns.size());
    for (const auto& name : columns) {
        if (!name.empty() && name[0] == '#') {
            slots.push_back(static_cast<std::size_t>(std::stoul(name.substr(1))));
            continue;
        }
        auto it = std::find(table_.columns.begin(), table_.columns.end(), name);
        if (it == table_.columns.end()) {
            throw AdapterFailureError("adapter '" + id() + "': no column '" + name + "'");
        }
        slots.push_back(static_cast<std::size_t>(it - table_.columns.begin()));
    }
    std::vector<std::string> cells(columns.size());
    for (const auto& row : table_.rows) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            cells[i] = slots[i] < row.size() ? row[slots[i]] : std::string();
        }
        yield(cells);
    }
}

// --- Registry --------------------------------------------------------

void AdapterRegistry::add(std::unique_ptr<Adapter> adapter) {
    for (const auto& a : adapters_) {
        if (a->id() == adapter->id()) {
            throw DuplicateAdapterIdError("adapter id '" + adapter->id() + "' already registered");
        }
    }
    adapters_.push_back(std::move(adapter));
}

bool AdapterRegistry::contains(const std::string& id) const {
    for (const auto& a : adapters_) {
        if (a->id() == id) return true;
    }
    return false;
}

const Adapter& AdapterRegistry::at(const std::string& id) const {
    for (const auto& a : adapters_) {
        if (a->id() == id) return *a;
    }
    throw SchemaError("no adapter registered under id '" + id + "'");
}

}  // namespace tdm
