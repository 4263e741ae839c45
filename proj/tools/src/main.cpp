// tdm — build tensors from data sources, query them, decompose them, and run
// the user-clustering pipeline. See README.md for the file formats.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tdm/analysis.hpp"
#include "tdm/decomp.hpp"
#include "tdm/error.hpp"
#include "tdm/io.hpp"
#include "tdm/polystore.hpp"
#include "tdm/query_parser.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };
LogLevel g_log_level = LogLevel::Info;

void log_info(const std::string& msg) {
    if (g_log_level >= LogLevel::Info) std::fprintf(stderr, "%s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
    if (g_log_level >= LogLevel::Debug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

// Exit codes: 1 schema/config, 2 source/io, 3 build, 4 query parse,
// 5 semantic, 6 numeric.
int classify(const std::exception& e) {
    if (dynamic_cast<const tdm::ParseError*>(&e)) return 4;
    if (dynamic_cast<const tdm::UnknownDimensionError*>(&e)) return 5;
    if (dynamic_cast<const tdm::SchemaError*>(&e) ||
        dynamic_cast<const tdm::ConfigInvalidError*>(&e) ||
        dynamic_cast<const tdm::DuplicateAdapterIdError*>(&e))
        return 1;
    if (dynamic_cast<const tdm::AdapterFailureError*>(&e) ||
        dynamic_cast<const tdm::IoError*>(&e))
        return 2;
    if (dynamic_cast<const tdm::KeyNotFoundError*>(&e) ||
        dynamic_cast<const tdm::MergeConflictError*>(&e) ||
        dynamic_cast<const tdm::ArityMismatchError*>(&e) ||
        dynamic_cast<const tdm::TypeMismatchError*>(&e) ||
        dynamic_cast<const tdm::DuplicateKeyError*>(&e) ||
        dynamic_cast<const tdm::DuplicateDimensionNameError*>(&e))
        return 3;
    if (dynamic_cast<const tdm::Error*>(&e)) return 6;
    return 70;
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return classify(e);
    }
}

std::string json_of_value(const tdm::Value& v) { return tdm::format_value(v); }

ordered_json meta_json(const tdm::TypedTensor& t) {
    ordered_json meta;
    meta["tensor"] = t.name();
    meta["value_type"] = std::string(tdm::value_type_name(t.value_type()));
    meta["default"] = json_of_value(t.default_value());
    meta["dimensions"] = ordered_json::array();
    for (const auto& d : t.dims()) {
        ordered_json dim;
        dim["name"] = d.name();
        dim["key_type"] = std::string(tdm::key_type_name(d.key_type()));
        dim["granularity"] = d.granularity();
        dim["null_key"] = d.has_null();
        meta["dimensions"].push_back(std::move(dim));
    }
    return meta;
}

/// Stage <name>.coo, <name>.meta.json and one dim CSV per dimension.
void stage_tensor_files(tdm::AtomicWriter& out, const tdm::TypedTensor& t) {
    out.add(t.name() + ".coo", tdm::to_coo_string(t));
    out.add(t.name() + ".meta.json", meta_json(t).dump(2) + "\n");
    for (const auto& d : t.dims()) {
        std::ostringstream os;
        tdm::write_dimension_csv(os, d);
        out.add(t.name() + ".dim." + d.name() + ".csv", os.str());
    }
}

/// Load a tensor written by stage_tensor_files: the sibling meta file and
/// dimension CSVs restore key types; without them the COO header alone
/// yields anonymous integer dimensions.
tdm::TypedTensor load_tensor(const fs::path& coo_path) {
    std::ifstream coo(coo_path);
    if (!coo) throw tdm::IoError("cannot open " + coo_path.string());

    std::string base = coo_path.string();
    if (base.size() > 4 && base.ends_with(".coo")) base.resize(base.size() - 4);

    const fs::path meta_path = base + ".meta.json";
    if (!fs::exists(meta_path)) {
        log_debug("no meta file next to " + coo_path.string() + "; using header dimensions");
        return tdm::read_tensor_coo(coo);
    }

    ordered_json meta;
    try {
        meta = ordered_json::parse(tdm::read_file(meta_path));
    } catch (const ordered_json::exception& e) {
        throw tdm::IoError(meta_path.string() + ": " + e.what());
    }
    const auto vt = tdm::value_type_from_name(meta.value("value_type", "real"));
    if (!vt) throw tdm::IoError(meta_path.string() + ": bad value_type");

    std::vector<tdm::Dimension> dims;
    for (const auto& dj : meta.value("dimensions", ordered_json::array())) {
        const std::string name = dj.value("name", "");
        const auto kt = tdm::key_type_from_name(dj.value("key_type", "string"));
        if (!kt) throw tdm::IoError(meta_path.string() + ": bad key_type");
        const std::int64_t gran = dj.value("granularity", std::int64_t{3600});
        const fs::path dim_path = base + ".dim." + name + ".csv";
        std::ifstream din(dim_path);
        if (!din) throw tdm::IoError("cannot open " + dim_path.string());
        dims.push_back(tdm::read_dimension_csv(din, name, *kt, gran));
    }
    return tdm::read_tensor_coo(coo, std::move(dims), *vt);
}

// --- build ------------------------------------------------------------

int cmd_build(const std::string& schema_path, const std::string& tensor_name,
              const std::string& out_dir) {
    return run_guarded([&] {
        const tdm::TensorSchema schema = tdm::load_schema(schema_path);
        const tdm::AdapterRegistry registry = tdm::make_registry(schema);
        const tdm::TypedTensor t = tdm::build_tensor(schema, tensor_name, registry);
        log_info("built tensor '" + t.name() + "' with " + std::to_string(t.stored_count()) +
                 " stored entries");

        tdm::AtomicWriter out(out_dir);
        stage_tensor_files(out, t);
        out.commit();
    });
}

// --- query ------------------------------------------------------------

int cmd_query(const std::string& tensor_file, const std::string& query_text,
              const std::string& out_file) {
    return run_guarded([&] {
        const tdm::TypedTensor t = load_tensor(tensor_file);
        const tdm::TypedTensor result = tdm::run_query(t, query_text);
        log_info("query kept " + std::to_string(result.stored_count()) + " of " +
                 std::to_string(t.stored_count()) + " entries");
        if (out_file.empty()) {
            tdm::write_tensor_coo(std::cout, result);
            return;
        }
        const fs::path out_path(out_file);
        tdm::AtomicWriter out(out_path.parent_path().empty() ? "." : out_path.parent_path());
        out.add(out_path.filename().string(), tdm::to_coo_string(result));
        out.commit();
    });
}

// --- decompose ----------------------------------------------------------

int cmd_decompose(const std::string& tensor_file, const std::string& method, std::size_t rank,
                  std::vector<std::size_t> ranks, std::size_t max_iters, double tol,
                  std::uint64_t seed, const std::string& out_dir) {
    return run_guarded([&] {
        const tdm::TypedTensor t = load_tensor(tensor_file);
        tdm::AtomicWriter out(out_dir);

        if (method == "cp") {
            const tdm::CpResult r = tdm::cp_als(t, rank, max_iters, tol, seed);
            for (std::size_t n = 0; n < t.order(); ++n) {
                std::ostringstream os;
                tdm::write_factor_csv(os, r.factors[n], t.dim(n + 1));
                out.add(t.name() + ".cp.factor." + t.dim(n + 1).name() + ".csv", os.str());
            }
            std::ostringstream ws;
            tdm::write_weights_csv(ws, r.weights);
            out.add(t.name() + ".cp.weights.csv", ws.str());
            out.commit();
            std::printf("fit %.10f after %zu iterations\n", r.final_fit, r.iterations);
            return;
        }

        if (method == "hosvd") {
            std::vector<std::size_t> use_ranks = std::move(ranks);
            if (use_ranks.empty()) {
                for (std::size_t n = 1; n <= t.order(); ++n) use_ranks.push_back(t.dim(n).size());
            }
            const tdm::TuckerResult r = tdm::hosvd(t, use_ranks);
            for (std::size_t n = 0; n < t.order(); ++n) {
                std::ostringstream os;
                tdm::write_factor_csv(os, r.factors[n], t.dim(n + 1));
                out.add(t.name() + ".hosvd.factor." + t.dim(n + 1).name() + ".csv", os.str());
            }
            out.add(t.name() + ".hosvd.core.coo", tdm::to_coo_string(r.core));
            out.commit();
            // Orthonormal factors: |t - approx|^2 = |t|^2 - |core|^2.
            const double norm_t = tdm::frobenius_norm(t);
            const double norm_core = tdm::frobenius_norm(r.core);
            const double err = std::sqrt(std::max(0.0, norm_t * norm_t - norm_core * norm_core));
            std::printf("fit %.10f\n", norm_t == 0.0 ? 1.0 : 1.0 - err / norm_t);
            return;
        }

        throw tdm::ConfigInvalidError("unknown method '" + method + "' (use cp or hosvd)");
    });
}

// --- pipeline -----------------------------------------------------------

int cmd_pipeline(const std::string& schema_path, const std::string& pipeline_name,
                 const std::string& out_dir, std::optional<std::uint64_t> seed_override) {
    return run_guarded([&] {
        const tdm::TensorSchema schema = tdm::load_schema(schema_path);
        const tdm::PipelineSpec& spec = schema.pipeline(pipeline_name);
        const tdm::AdapterRegistry registry = tdm::make_registry(schema);
        const std::uint64_t seed = seed_override.value_or(spec.seed);

        const tdm::TypedTensor t = tdm::build_tensor(schema, spec.tensor, registry);
        const std::size_t user_mode = t.mode_of(spec.user_dimension);
        log_info("tensor '" + t.name() + "': " + std::to_string(t.stored_count()) +
                 " stored entries");

        std::size_t rank = spec.rank;
        bool stabilized = true;
        if (rank == 0) {
            const tdm::RankSelection sel = tdm::rank_by_cluster_stability(
                t, user_mode, spec.k, spec.rank_range, seed, spec.ari_threshold);
            rank = sel.rank;
            stabilized = sel.stabilized;
            log_info("stability sweep selected rank " + std::to_string(rank) +
                     (sel.stabilized ? "" : " (did not stabilize)"));
        }

        const tdm::UserClustering result = tdm::bot_pipeline(t, user_mode, rank, spec.k, seed);

        std::ostringstream clusters;
        clusters << "user,cluster\n";
        for (std::size_t i = 0; i < result.users.size(); ++i) {
            clusters << tdm::csv_escape(tdm::csv_key(result.users[i], result.user_key_type)) << ','
                     << result.clustering.assignments[i] << '\n';
        }

        ordered_json summary;
        summary["pipeline"] = spec.name;
        summary["tensor"] = spec.tensor;
        summary["rank"] = rank;
        summary["rank_stabilized"] = stabilized;
        summary["k"] = spec.k;
        summary["seed"] = seed;
        summary["fit"] = result.fit;
        summary["inertia"] = result.clustering.inertia;
        std::vector<std::size_t> sizes(spec.k, 0);
        for (std::size_t a : result.clustering.assignments) sizes[a - 1] += 1;
        summary["cluster_sizes"] = sizes;

        if (spec.breakout) {
            const tdm::BreakoutSpec& bo = *spec.breakout;
            const tdm::TimeSeries series =
                tdm::time_series(t, t.mode_of(bo.dimension), bo.window, {});
            const auto points = tdm::detect_breakouts(series, bo.min_segment, bo.n_permutations,
                                                      bo.alpha, seed);
            summary["breakout"] = ordered_json::object();
            summary["breakout"]["window"] = bo.window;
            summary["breakout"]["series_length"] = series.counts.size();
            summary["breakout"]["change_points"] = points;
        }

        tdm::AtomicWriter out(out_dir);
        out.add(spec.name + ".clusters.csv", clusters.str());
        out.add(spec.name + ".summary.json", summary.dump(2) + "\n");
        out.commit();
        log_info("pipeline '" + spec.name + "' done: rank " + std::to_string(rank) + ", fit " +
                 tdm::format_real(result.fit));
    });
}

// --- export -------------------------------------------------------------

int cmd_export(const std::string& tensor_file, const std::string& format,
               const std::string& out_file) {
    return run_guarded([&] {
        const tdm::TypedTensor t = load_tensor(tensor_file);
        std::string content;
        if (format == "coo") {
            content = tdm::to_coo_string(t);
        } else if (format == "long") {
            // Long CSV: one row per stored entry, keys instead of indices.
            std::ostringstream os;
            for (std::size_t n = 1; n <= t.order(); ++n) {
                os << tdm::csv_escape(t.dim(n).name()) << ',';
            }
            os << "value\n";
            for (const auto& [coords, v] : t.sorted_entries()) {
                for (std::size_t n = 0; n < coords.size(); ++n) {
                    const auto& d = t.dim(n + 1);
                    os << tdm::csv_escape(tdm::csv_key(d.key_of(coords[n]), d.key_type())) << ',';
                }
                os << tdm::format_value(v) << '\n';
            }
            content = os.str();
        } else {
            throw tdm::ConfigInvalidError("unknown export format '" + format +
                                          "' (use coo or long)");
        }
        if (out_file.empty()) {
            std::cout << content;
            return;
        }
        const fs::path out_path(out_file);
        tdm::AtomicWriter out(out_path.parent_path().empty() ? "." : out_path.parent_path());
        out.add(out_path.filename().string(), std::move(content));
        out.commit();
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tdm: typed sparse tensors over heterogeneous data sources"};
    app.require_subcommand(1);

    std::string log_level = "info";
    app.add_option("--log-level", log_level, "quiet, info or debug")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));

    std::string schema_path, out_dir = ".", tensor_name, tensor_file, query_text, out_file;
    std::string method = "cp", format = "long", pipeline_name;
    std::size_t rank = 2, max_iters = 500;
    std::vector<std::size_t> ranks;
    double tol = 1e-8;
    std::uint64_t seed = 0;

    auto* build = app.add_subcommand("build", "Materialize a tensor from its schema bindings");
    build->fallthrough();
    build->add_option("--schema", schema_path, "schema JSON file")->required();
    build->add_option("--tensor", tensor_name, "tensor to build")->required();
    build->add_option("--out", out_dir, "output directory");

    auto* query = app.add_subcommand("query", "Run a select query against a built tensor");
    query->fallthrough();
    query->add_option("--tensor", tensor_file, "tensor .coo file")->required();
    query->add_option("--query", query_text, "select [dims] [values] tensor")->required();
    query->add_option("--out", out_file, "output file (default: stdout)");

    auto* decompose = app.add_subcommand("decompose", "CP or HOSVD decomposition");
    decompose->fallthrough();
    decompose->add_option("--tensor", tensor_file, "tensor .coo file")->required();
    decompose->add_option("--method", method, "cp or hosvd")
        ->check(CLI::IsMember({"cp", "hosvd"}));
    decompose->add_option("--rank", rank, "CP rank");
    decompose->add_option("--ranks", ranks, "HOSVD per-mode ranks")->delimiter(',');
    decompose->add_option("--max-iters", max_iters, "ALS iteration cap");
    decompose->add_option("--tol", tol, "ALS fit-change stopping tolerance");
    decompose->add_option("--seed", seed, "random seed");
    decompose->add_option("--out", out_dir, "output directory");

    auto* pipeline = app.add_subcommand("pipeline", "Decompose, embed and cluster users");
    pipeline->fallthrough();
    pipeline->add_option("--schema", schema_path, "schema JSON file")->required();
    pipeline->add_option("--pipeline", pipeline_name, "pipeline name in the schema")->required();
    auto* pipe_seed = pipeline->add_option("--seed", seed, "override the schema seed");
    pipeline->add_option("--out", out_dir, "output directory");

    auto* exportc = app.add_subcommand("export", "Re-export a built tensor");
    exportc->fallthrough();
    exportc->add_option("--tensor", tensor_file, "tensor .coo file")->required();
    exportc->add_option("--format", format, "long or coo")
        ->check(CLI::IsMember({"long", "coo"}));
    exportc->add_option("--out", out_file, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    g_log_level = log_level == "quiet" ? LogLevel::Quiet
                  : log_level == "debug" ? LogLevel::Debug
                                         : LogLevel::Info;

    if (build->parsed()) return cmd_build(schema_path, tensor_name, out_dir);
    if (query->parsed()) return cmd_query(tensor_file, query_text, out_file);
    if (decompose->parsed()) {
        return cmd_decompose(tensor_file, method, rank, ranks, max_iters, tol, seed, out_dir);
    }
    if (pipeline->parsed()) {
        std::optional<std::uint64_t> seed_override;
        if (pipe_seed->count() > 0) seed_override = seed;
        return cmd_pipeline(schema_path, pipeline_name, out_dir, seed_override);
    }
    if (exportc->parsed()) return cmd_export(tensor_file, format, out_file);
    return 0;
}
